import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from acceptance_log import LINES  # noqa: E402

# property tests are deterministic so that reruns reproduce failures
settings.register_profile("repro", deadline=None, derandomize=True, max_examples=100)
settings.load_profile("repro")


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
