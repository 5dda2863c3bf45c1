"""Shared record of acceptance outcomes, printed at the end of a pytest run."""
import time
from contextlib import contextmanager

LINES = []


class Criterion:
    def __init__(self, number, title, budget_s=None):
        self.number, self.title, self.budget_s = number, title, budget_s
        self.details = []
        self.ok = True
        self.elapsed = 0.0

    def require(self, cond, detail):
        self.ok = self.ok and bool(cond)
        self.details.append(("ok " if cond else "BAD ") + detail)


@contextmanager
def criterion(number, title, budget_s=None):
    c = Criterion(number, title, budget_s)
    start = time.perf_counter()
    try:
        yield c
    except Exception as exc:
        c.ok = False
        c.details.append(f"raised {type(exc).__name__}: {exc}")
        raise
    finally:
        c.elapsed = time.perf_counter() - start
        if c.budget_s is not None and c.elapsed > c.budget_s:
            c.ok = False
            c.details.append(f"BAD runtime {c.elapsed:.2f}s over budget {c.budget_s}s")
        status = "PASS" if c.ok else "FAIL"
        line = f"[{status}] criterion {c.number:>2}: {c.title} ({c.elapsed:.2f}s); " + "; ".join(c.details)
        LINES.append(line)
        print(line)
    assert c.ok, line
