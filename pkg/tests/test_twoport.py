import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lnasynth.errors import BandOutsideGrid, DegenerateConversion
from lnasynth.twoport import (
    TwoPortParams,
    available_gain,
    available_gain_db,
    band_metrics,
    effective_transconductance,
    output_conductance,
    s_to_y,
    s_to_z,
    stability,
    transducer_gain_db,
    y_to_s,
    z_to_s,
)

W0 = 2 * math.pi * 2.45e9


# -- conversions -------------------------------------------------------------------


def test_series_resistor_y_to_s():
    y = np.array([[1 / 50, -1 / 50], [-1 / 50, 1 / 50]])
    s = y_to_s(y, 50.0)
    np.testing.assert_allclose(s, [[1 / 3, 2 / 3], [2 / 3, 1 / 3]], atol=1e-15)


def test_open_network():
    np.testing.assert_allclose(y_to_s(np.zeros((2, 2)), 50), np.eye(2))


def test_z_to_s_matches_y_route():
    z = np.array([[60 + 5j, 10], [10, 45 - 3j]])
    np.testing.assert_allclose(z_to_s(z), y_to_s(np.linalg.inv(z)), atol=1e-14)
    np.testing.assert_allclose(s_to_z(z_to_s(z)), z, rtol=1e-12)


def test_degenerate_conversion():
    # S = -I means a short at both ports: Y does not exist
    with pytest.raises(DegenerateConversion):
        s_to_y(-np.eye(2))
    with pytest.raises(DegenerateConversion):
        s_to_z(np.eye(2))


def random_passive_y(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    g = a @ a.conj().T * 0.01  # positive semidefinite Hermitian part
    b = rng.standard_normal((2, 2)) * 0.01
    return g + 1j * (b + b.T)


def test_round_trip_100_passive():
    rng = np.random.default_rng(7)
    ys = np.array([random_passive_y(rng) for _ in range(100)])
    back = s_to_y(y_to_s(ys, 50.0), 50.0)
    np.testing.assert_allclose(back, ys, rtol=1e-12, atol=1e-12 * np.abs(ys).max())
    # passive Y gives |S| entries bounded by 1
    assert np.all(np.linalg.norm(y_to_s(ys), ord=2, axis=(1, 2)) <= 1 + 1e-12)


@settings(max_examples=100)
@given(
    st.lists(st.floats(-1, 1), min_size=8, max_size=8),
    st.floats(10.0, 200.0),
)
def test_round_trip_property(vals, z0):
    y = (np.array(vals[:4]) + 1j * np.array(vals[4:])).reshape(2, 2) / z0
    den = np.linalg.det(np.eye(2) + z0 * y)
    if abs(den) < 1e-3:
        return
    s = y_to_s(y, z0)
    if abs(np.linalg.det(np.eye(2) + s)) < 1e-3:
        return
    np.testing.assert_allclose(s_to_y(s, z0), y, rtol=1e-10, atol=1e-12)


# -- gain chain ------------------------------------------------------------------------


def test_effective_transconductance():
    gm = effective_transconductance(1.8e-9, W0)
    assert W0 == pytest.approx(1.53938e10, rel=1e-5)
    assert gm == pytest.approx(18.04e-3, abs=0.01e-3)
    assert effective_transconductance(3.6e-9, W0) == pytest.approx(gm / 2, rel=1e-15)
    assert effective_transconductance(1e9, W0) < 1e-18


def test_output_conductance():
    go = output_conductance(9.5e-9, 10, 1e-4, W0)
    assert go == pytest.approx(7.838e-4, abs=0.0005e-4)
    assert output_conductance(9.5e-9, 1e15, 1e-4, W0) == pytest.approx(1e-4, rel=1e-9)
    assert output_conductance(9.5e-9, 10, 0.0, W0) == pytest.approx(1 / (W0 * 9.5e-9 * 10), rel=1e-15)


def test_available_gain_worked_example():
    g = available_gain(1.8e-9, 9.5e-9, 10, 1e-4, 50, W0)
    hand = 0.01804**2 * 50 / 7.838e-4
    assert hand == pytest.approx(20.77, abs=0.01)
    assert g.gain_db == pytest.approx(10 * math.log10(hand), abs=0.01)
    assert round(g.gain_db, 1) == 13.2
    assert g.gain_linear == g.gm_eff**2 * g.r_s / g.go_prime


def test_available_gain_structure():
    a = available_gain(1.8e-9, 9.5e-9, 10, 1e-4, 50, W0)
    b = available_gain(0.9e-9, 9.5e-9, 10, 1e-4, 50, W0)
    assert b.gain_linear == pytest.approx(4 * a.gain_linear, rel=1e-13)
    # larger L_D*Q_D at fixed L_S -> strictly more gain
    prods = [(9.5e-9, 5), (9.5e-9, 10), (12e-9, 10), (15e-9, 12)]
    gains = [available_gain(1.8e-9, l, q, 1e-4, 50, W0).gain_linear for l, q in prods]
    assert all(b > a for a, b in zip(gains, gains[1:]))


# -- stability ------------------------------------------------------------------------


def test_symmetric_fixture():
    p = TwoPortParams([2.45e9], [[[0, 0.5], [0.5, 0]]])
    r = stability(p)
    assert abs(r.k[0] - 2.125) < 1e-12
    assert abs(r.delta_mag[0] - 0.25) < 1e-12
    assert r.stable[0] and not r.unilateral[0]


def test_unilateral_flags():
    p = TwoPortParams([1e9, 2e9], [[[0.2, 0], [3, 0.1]], [[0, 0], [1, 0]]])
    r = stability(p)
    assert r.unilateral.all()
    assert np.all(np.isinf(r.k)) and np.all(r.k > 0)


@pytest.mark.parametrize(
    "k_ok,d_ok",
    [(True, True), (True, False), (False, True)],
)
def test_verdict_needs_both(k_ok, d_ok):
    # build points with a chosen K and |Delta| side by direct construction
    if k_ok and d_ok:
        s = [[0, 0.5], [0.5, 0]]
    elif k_ok:
        s = [[1.2, 0.01], [0.01, 1.2]]  # |Delta| > 1 while K > 1
    else:
        s = [[0.9, 0.5], [2.0, 0.9]]
    r = stability(TwoPortParams([1e9], [s]))
    assert (r.k[0] > 1) == k_ok
    assert (r.delta_mag[0] < 1) == d_ok
    assert r.stable[0] == (k_ok and d_ok)


def test_k_exactly_one_is_not_stable():
    # series resistor is lossless-boundary passive with K = 1
    s = [[1 / 3, 2 / 3], [2 / 3, 1 / 3]]
    r = stability(TwoPortParams([1e9], [s]))
    assert r.k[0] == pytest.approx(1.0, abs=1e-12)


cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=100)
@given(cplx, cplx, cplx, cplx, st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_stability_invariant_under_reference_plane_rotation(a, b, c, d, t1, t2):
    s = np.array([[a, b], [c, d]])
    if abs(b * c) < 1e-6:
        return
    rot = np.diag([np.exp(1j * t1), np.exp(1j * t2)])
    r0 = stability(TwoPortParams([1e9], [s]))
    r1 = stability(TwoPortParams([1e9], [rot @ s @ rot]))
    assert r1.k[0] == pytest.approx(r0.k[0], rel=1e-12, abs=1e-12)
    assert r1.delta_mag[0] == pytest.approx(r0.delta_mag[0], rel=1e-12, abs=1e-12)


# -- band metrics ---------------------------------------------------------------------


def test_band_metrics_example():
    s = np.zeros((3, 2, 2), dtype=complex)
    s[:, 1, 0] = [3.0, 3.2, 3.1]
    s[:, 0, 0] = 0.1
    s[:, 1, 1] = [0.05, 0.2, 0.1]
    s[:, 0, 1] = 0.01
    m = band_metrics(TwoPortParams([2.4e9, 2.45e9, 2.5e9], s), (2.4e9, 2.5e9))
    assert m.max_s21_db == pytest.approx(10.10, abs=0.005)
    assert m.min_s21_db == pytest.approx(9.54, abs=0.005)
    assert m.worst_s11_db == pytest.approx(-20.0, abs=1e-12)
    assert m.worst_s22_db == pytest.approx(20 * math.log10(0.2), abs=1e-12)
    assert m.s12_center_db == pytest.approx(-40.0, abs=1e-12)


def test_band_metrics_through():
    f = np.linspace(2e9, 3e9, 11)
    s = np.tile([[0, 1], [1, 0]], (11, 1, 1))
    m = band_metrics(TwoPortParams(f, s), (2.4e9, 2.5e9))
    assert m.min_s21_db == m.max_s21_db == 0.0


def test_band_outside_grid():
    p = TwoPortParams([2.4e9, 2.45e9], np.zeros((2, 2, 2)))
    with pytest.raises(BandOutsideGrid):
        band_metrics(p, (2.4e9, 2.5e9))


def test_gain_labels():
    s = np.array([[[0, 0], [3.0, 0.5]]])
    p = TwoPortParams([1e9], s)
    assert transducer_gain_db(p)[0] == pytest.approx(20 * math.log10(3))
    assert available_gain_db(p)[0] == pytest.approx(10 * math.log10(9 / 0.75))


def test_params_validation():
    with pytest.raises(ValueError):
        TwoPortParams([2e9, 1e9], np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        TwoPortParams([1e9], np.zeros((1, 2, 2)), z0=0)
    with pytest.raises(ValueError):
        TwoPortParams([1e9], np.full((1, 2, 2), np.nan))
