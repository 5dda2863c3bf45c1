import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from energy_spectrum import conformal, recovery
from energy_spectrum.errors import DegenerateConfiguration, InvalidInput
from energy_spectrum.fuchsian import GroupRep
from energy_spectrum.hypgeo import MoebiusMap
from energy_spectrum.recovery import TauSeries
from energy_spectrum.surface_words import CurvePair

NS = np.arange(1, 201)


def test_series_validation():
    with pytest.raises(InvalidInput):
        TauSeries([1, 2], [1.0])
    with pytest.raises(InvalidInput):
        TauSeries([0, 1], [1.0, 1.0])
    with pytest.raises(InvalidInput):
        TauSeries([2, 1], [1.0, 1.0])
    with pytest.raises(InvalidInput):
        TauSeries([1, 2], [1.0, np.nan])
    with pytest.raises(InvalidInput):
        TauSeries([1, 2], [1.0, 2.0], window=0)
    with pytest.raises(InvalidInput):
        recovery.tau_estimates(TauSeries([1, 2], [1.0, 2.0], window=5))
    assert recovery.default_window(50) == 5 and recovery.default_window(1000) == 100


def test_pure_quadratic_energy():
    est = recovery.tau_estimates(TauSeries(NS, 0.7 * NS ** 2))
    assert est.tau_minus == pytest.approx(0.7, rel=1e-15)
    assert est.tau_plus == pytest.approx(0.7, rel=1e-15)


def test_raw_tail_is_biased_and_corrected_is_not():
    series = TauSeries(NS, 0.7 * NS ** 2 + 5.0 * NS + 3.0)
    raw = recovery.tau_estimates(series)
    fixed = recovery.corrected_tau_estimates(series)
    assert raw.tau_plus - 0.7 > 0.02
    assert fixed.corrected
    assert fixed.tau_minus == pytest.approx(0.7, abs=1e-10)
    assert fixed.tau_plus == pytest.approx(0.7, abs=1e-10)
    short = recovery.corrected_tau_estimates(TauSeries([1, 2], [1.0, 4.0], window=2))
    assert not short.corrected


@given(st.lists(st.floats(0, 1e6), min_size=5, max_size=60))
def test_tau_minus_not_above_tau_plus(energies):
    series = TauSeries(np.arange(1, len(energies) + 1), energies)
    for est in (recovery.tau_estimates(series), recovery.corrected_tau_estimates(series)):
        assert est.tau_minus <= est.tau_plus


def test_sandwich_examples(caplog):
    s = recovery.sandwich(1.0, 1.0, 1, 2.0)
    assert (s.lower, s.upper, s.collar_ok) == (2.0, 2.0, True)
    # equality in the collar inequality closes the sandwich
    s = recovery.sandwich(2.0, 2.0, 2, 1.3)
    assert s.lower == pytest.approx(s.upper)
    b = conformal.glued_square_bounds(conformal.GluedSquareParams(0.01))
    s = recovery.sandwich(b.gamma_upper, b.eta_upper, 2, 1.0)
    assert s.lower < s.upper
    with caplog.at_level(logging.WARNING):
        s = recovery.sandwich(0.5, 0.5, 1, 1.0)
    assert not s.collar_ok and "collar" in caplog.text
    for args in ((0.0, 1.0, 1, 1.0), (1.0, 1.0, 0, 1.0), (1.0, 1.0, 1, -1.0)):
        with pytest.raises(InvalidInput):
            recovery.sandwich(*args)


@given(st.floats(0.01, 10), st.floats(1e-4, 0.24))
def test_length_interval_contains_length_for_exact_tau(ell, delta):
    b = conformal.glued_square_bounds(conformal.GluedSquareParams(delta))
    s = recovery.sandwich(b.gamma_upper, b.eta_upper, 2, ell)
    for tau in (s.lower, s.upper, 0.5 * (s.lower + s.upper)):
        est = recovery.TauEstimates(tau, tau, 1)
        lo, hi = recovery.length_interval(est, b.gamma_upper, b.eta_upper, 2)
        assert lo <= ell * (1 + 1e-12) and ell <= hi * (1 + 1e-12)


# ---------------------------------------------------------------------------
# recovery over the glued-square family


def synthetic_oracle(ell):
    def oracle(k, n):
        g = conformal.xk_family(True, k).bounds.gamma_upper
        return 0.5 * g * ell * ell * n * n + 2.0 * n + 7.0
    return oracle


def source(k):
    return conformal.xk_family(True, k)


def test_recover_synthetic_length():
    res = recovery.recover_length(synthetic_oracle(1.5), source, 300, 1000)
    lo, hi = res.interval
    assert lo <= 1.5 * (1 + 1e-9) and 1.5 <= hi
    assert res.ell_hat == pytest.approx(1.5, rel=2e-3)
    assert res.nested and res.shrinking and not res.flags
    assert hi - lo < 0.01
    assert [r.k for r in res.per_k] == [1, 10, 100, 1000]


def test_recover_rows_and_threads():
    res = recovery.recover_length(synthetic_oracle(0.9), source, 40, 10)
    rows = list(res.rows())
    assert len(rows) == 2 * 40
    assert all(len(r) == len(recovery.CSV_COLUMNS) for r in rows)
    assert rows[0][:2] == (1, 1)
    threaded = recovery.recover_length(synthetic_oracle(0.9), source, 40, 10, threads=4)
    assert threaded.ell_hat == res.ell_hat and threaded.interval == res.interval


def swing(k, n):
    return n * n * (1 + 0.5 * (n % 2))


def test_recover_flags_inconsistent_data(caplog):
    # tau swinging by half its size cannot fit one length: the interval is empty
    with caplog.at_level(logging.WARNING):
        res = recovery.recover_length(swing, source, 30, 10, corrected=False)
    assert any("empty" in f for f in res.flags)
    assert "empty" in caplog.text
    # the curvature fit extrapolates the swing below zero
    res = recovery.recover_length(swing, source, 30, 10)
    assert any("nonpositive" in f for f in res.flags)


def test_recover_validation():
    with pytest.raises(InvalidInput):
        recovery.recover_length(synthetic_oracle(1.0), source, 0, 10)
    with pytest.raises(InvalidInput):
        recovery.recover_length(synthetic_oracle(1.0), lambda k: object(), 10, 1)
    assert recovery.default_ks(1000) == [1, 10, 100, 1000]
    assert recovery.default_ks(50) == [1, 10, 50]


# ---------------------------------------------------------------------------
# twist slopes


def diag_rep(eta):
    gens = (MoebiusMap.diagonal(2.0), eta, MoebiusMap.identity(), MoebiusMap.identity())
    return GroupRep(2, gens, "real", checked=False)


def test_slope_of_a_diagonal_gamma():
    rep = diag_rep(MoebiusMap(1.5, 0.5, 0.4, (1 + 0.2) / 1.5))
    out = recovery.twist_slope(rep, CurvePair.from_strings("a1", "b1", 1), n_max=50)
    assert out.gamma_length == pytest.approx(2 * math.log(2), rel=1e-14)
    assert out.slope_hat == pytest.approx(2 * math.log(2), rel=1e-2)
    assert abs(out.coefficient) == pytest.approx(1.5, rel=1e-12)
    assert out.decay_holds
    assert np.all(np.abs(out.asymptotic_residuals[-10:]) < 1e-12)


def test_vanishing_coefficient_is_degenerate():
    rep = diag_rep(MoebiusMap(0.0, 1.0, -1.0, 0.0))
    with pytest.raises(DegenerateConfiguration):
        recovery.twist_slope(rep, CurvePair.from_strings("a1", "b1", 1))


def test_twist_slope_needs_enough_points():
    rep = diag_rep(MoebiusMap(1.5, 0.5, 0.4, (1 + 0.2) / 1.5))
    with pytest.raises(InvalidInput):
        recovery.twist_slope(rep, CurvePair.from_strings("a1", "b1", 1), n_max=4)
