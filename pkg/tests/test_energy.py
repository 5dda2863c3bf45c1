import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from energy_spectrum import energy
from energy_spectrum.energy import TwistedMapParams
from energy_spectrum.errors import InvalidInput


@st.composite
def params(draw, n_min=0):
    m = draw(st.floats(0.1, 5))
    return TwistedMapParams(draw(st.integers(n_min, 500)), m, draw(st.floats(0.01, 0.49)) * m,
                            draw(st.floats(0.01, 10)), draw(st.floats(0, 50)))


def test_density_examples():
    assert energy.energy_density_flat(1, 1) == 1.0
    assert energy.energy_density_flat(0, 0) == 0.0
    out = energy.energy_density_flat(np.array([1.0, 2.0]), np.array([0.0, 0.0]))
    assert np.allclose(out, [0.5, 2.0])


def test_density_of_twisted_map():
    p = TwistedMapParams(3, 1.5, 0.2, 0.7)
    gx = p.n / p.width * p.length
    gy = p.length
    expected = 0.5 * ((p.n / p.width) ** 2 + 1) * p.length ** 2
    assert energy.energy_density_flat(gx, gy) == pytest.approx(expected)


def test_kn_examples():
    p = TwistedMapParams(0, 2.0, 0.25, 1.3)
    assert energy.kn_collar_energy(p) == pytest.approx(0.5 * 1.5 * 1.3 ** 2)
    near = TwistedMapParams(1, 1.0, 1e-12, 1.7)
    assert energy.kn_collar_energy(near) == pytest.approx(1.7 ** 2, rel=1e-10)
    assert energy.kn_total_energy(TwistedMapParams(2, 1.0, 0.1, 1.0, 3.0)) == pytest.approx(
        energy.kn_collar_energy(TwistedMapParams(2, 1.0, 0.1, 1.0)) + 3.0)


def test_params_validation():
    with pytest.raises(InvalidInput):
        TwistedMapParams(-1, 1.0, 0.1, 1.0)
    with pytest.raises(InvalidInput):
        TwistedMapParams(1, 1.0, 0.5, 1.0)
    with pytest.raises(InvalidInput):
        TwistedMapParams(1, 1.0, 0.1, 0.0)
    with pytest.raises(InvalidInput):
        TwistedMapParams(1, 1.0, 0.1, 1.0, -1.0)


@given(params())
def test_kn_matches_quadrature(p):
    exact = energy.kn_collar_energy(p)
    quad = oracles.strip_map_energy(p.n, p.modulus, p.inset, p.length)
    assert quad == pytest.approx(exact, rel=1e-10)


@given(params())
def test_map_height_linear_across_the_strip(p):
    ys = np.array([0.0, 0.3])
    h = energy.kn_map_height(p, np.array([p.inset, p.modulus - p.inset]), ys)
    assert h[1] - h[0] == pytest.approx(p.length * (0.3 + p.n), rel=1e-12)
    # outside the strip the map is untwisted
    assert energy.kn_map_height(p, 0.0, 0.5) == pytest.approx(energy.kn_map_height(p, p.inset, 0.5))


@given(params(n_min=1))
def test_kn_increasing_and_tau_decreasing(p):
    seq = [TwistedMapParams(n, p.modulus, p.inset, p.length) for n in range(1, 30)]
    e = np.array([energy.kn_collar_energy(q) for q in seq])
    tau = e / np.arange(1, 30) ** 2
    limit = 0.5 * p.length ** 2 / p.width
    assert np.all(np.diff(e) > 0)
    assert np.all(np.diff(tau) < 0)
    assert np.all(tau > limit)


@given(params(), st.floats(0.1, 10))
def test_homogeneous_in_length(p, s):
    scaled = TwistedMapParams(p.n, p.modulus, p.inset, p.length * s)
    assert energy.kn_collar_energy(scaled) == pytest.approx(s * s * energy.kn_collar_energy(
        TwistedMapParams(p.n, p.modulus, p.inset, p.length)), rel=1e-12)


def test_minsky_examples():
    assert energy.minsky_lower_bound(0.0, 1.0) == 0.0
    assert energy.minsky_lower_bound(2.0, 1.0) == 2.0
    with pytest.raises(InvalidInput):
        energy.minsky_lower_bound(1.0, 0.0)


@given(params(n_min=1))
def test_kn_above_minsky_for_the_crossing_arc(p):
    # the arc across the strip has extremal length w and image length n l
    bound = energy.minsky_lower_bound(p.n * p.length, p.width)
    assert energy.kn_collar_energy(p) >= bound


def test_area_examples():
    assert energy.area_lower_bound(2) == pytest.approx(4 * math.pi)
    assert energy.area_lower_bound(3) == pytest.approx(8 * math.pi)
    assert energy.area_lower_bound(2) == pytest.approx(oracles.gauss_bonnet_area(2))
    with pytest.raises(InvalidInput):
        energy.area_lower_bound(1)
    assert energy.area_equality(4 * math.pi * (1 + 1e-4), 2, 1e-3)
    assert not energy.area_equality(4 * math.pi * 1.1, 2, 1e-3)


def test_bilipschitz_examples():
    assert energy.bilipschitz_energy_interval(3.0, 1.0) == (3.0, 3.0)
    assert energy.bilipschitz_energy_interval(10.0, 2.0) == (5.0, 20.0)
    with pytest.raises(InvalidInput):
        energy.bilipschitz_energy_interval(1.0, 0.5)
    with pytest.raises(InvalidInput):
        energy.bilipschitz_energy_interval(-1.0, 2.0)
