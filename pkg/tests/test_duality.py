import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wpduality import duality, gpt
from wpduality.duality import DualityPoint
from wpduality.errors import EmptySlice, ProbabilityOutOfRange, ValidationError
from wpduality.gpt import StateSpaceModel
from wpduality.interferometer import PrepSettings, prepare

unit = st.floats(0, 1, allow_nan=False)
angle = st.floats(0, 2 * math.pi, allow_nan=False)
H = math.sqrt(3) / 2


def test_visibility_and_distinguishability_examples():
    plus, L, s1 = prepare(PrepSettings(0.5)), prepare(PrepSettings(0.0)), prepare(PrepSettings(0.75))
    assert duality.fringe_visibility(plus) == pytest.approx(1.0)
    assert duality.fringe_visibility(L) == pytest.approx(0.0)
    assert duality.fringe_visibility(s1) == pytest.approx(H, abs=1e-15)
    assert duality.path_distinguishability(L) == 1.0
    assert duality.path_distinguishability(prepare(PrepSettings(0.5, 2.0))) == pytest.approx(0.0, abs=1e-15)
    assert duality.path_distinguishability(prepare(PrepSettings(0.75, 1.0))) == pytest.approx(0.5)


@given(unit, st.floats(0, 2 * math.pi, exclude_max=True))
def test_raw_contrast_equals_expectation_form(r, phi):
    s = prepare(PrepSettings(r, phi))
    assert duality.fringe_visibility_raw(s) == pytest.approx(duality.fringe_visibility(s), abs=1e-12)


def test_out_of_range_state_propagates():
    with pytest.raises(ProbabilityOutOfRange):
        duality.fringe_visibility(gpt.plane_state(1.5, 0.0))


@pytest.mark.parametrize("pt,ok,margin", [
    ((1.0, 0.0), True, 0.0),
    ((H, 0.5), False, 1 - H - 0.5),
    ((0.5, 0.4), True, 0.1),
])
def test_nc_bound(pt, ok, margin):
    got_ok, got_margin = duality.nc_bound_satisfied(DualityPoint(*pt))
    assert got_ok is ok and got_margin == pytest.approx(margin, abs=1e-12)


@pytest.mark.parametrize("pt,ok,margin", [
    ((H, 0.5), True, 0.0), ((1.0, 1.0), False, -1.0), ((0.0, 0.0), True, 1.0),
])
def test_quantum_bound(pt, ok, margin):
    got_ok, got_margin = duality.quantum_bound_satisfied(DualityPoint(*pt))
    assert got_ok is ok and got_margin == pytest.approx(margin, abs=1e-12)


def test_duality_point_range_checked():
    with pytest.raises(ValidationError):
        DualityPoint(1.2, 0.0)


def test_disc_curve_is_circle():
    c = duality.tradeoff_sweep(StateSpaceModel.disc(), 101)
    np.testing.assert_allclose(c.V, np.sqrt(1 - c.P ** 2), atol=1e-9)


def test_diamond_and_square_curves():
    d = duality.tradeoff_sweep(StateSpaceModel.diamond(), 51)
    np.testing.assert_allclose(d.V, 1 - d.P, atol=1e-12)
    s = duality.tradeoff_sweep(StateSpaceModel.square(), 51)
    np.testing.assert_allclose(s.V, 1.0, atol=1e-12)


def test_hexagon_curve_brute_force():
    space = StateSpaceModel.regular_polygon(6)
    c = duality.tradeoff_sweep(space, 41)
    # brute force: densely sample the body and take max |x| per |z| bin
    xs = np.linspace(-1, 1, 801)
    for P, V in zip(c.P, c.V):
        inside = [abs(x) for x in xs for z in (P, -P) if space.contains(space.point(x, z), 1e-12)]
        assert V == pytest.approx(max(inside), abs=2.5e-3)
        assert V >= max(inside) - 1e-12


def test_empty_slice():
    tri = StateSpaceModel.polytope([(0, 0.3), (-1, -0.5), (1, -0.5)])
    with pytest.raises(EmptySlice):
        duality.max_visibility(tri, 0.9)
    with pytest.raises(EmptySlice):
        duality.max_visibility(StateSpaceModel.disc(), 1.5)


def test_curve_requires_increasing_P():
    with pytest.raises(ValidationError):
        duality.TradeoffCurve((DualityPoint(0.5, 0.5), DualityPoint(0.5, 0.5)), "x")
    with pytest.raises(ValidationError):
        duality.tradeoff_sweep(StateSpaceModel.disc(), 1)


def test_csv_format():
    text = duality.curves_to_csv([duality.tradeoff_sweep(StateSpaceModel.disc(), 3)])
    assert text.splitlines() == ["P,V,space", "0.0,1.0,disc", "0.5,0.8660254037844386,disc", "1.0,0.0,disc"]


@pytest.mark.parametrize("shape", ["disc", "diamond"])
def test_curves_non_increasing(shape):
    c = duality.tradeoff_sweep(getattr(StateSpaceModel, shape)(), 201)
    assert np.all(np.diff(c.V) <= 1e-12)


@given(angle, unit)
def test_disc_states_obey_quantum_bound(t, rad):
    s = StateSpaceModel.disc().point(rad * math.sin(t), rad * math.cos(t))
    ok, margin = duality.quantum_bound_satisfied(duality.duality_point(s))
    assert ok
    assert margin == pytest.approx(1 - rad ** 2, abs=1e-12)


@given(angle, unit)
def test_diamond_states_obey_nc_bound(t, rad):
    # radial scaling of a diamond boundary point
    x, z = math.sin(t), math.cos(t)
    norm1 = abs(x) + abs(z)
    s = StateSpaceModel.diamond().point(rad * x / norm1, rad * z / norm1)
    ok, margin = duality.nc_bound_satisfied(duality.duality_point(s))
    assert ok and margin >= -1e-12


@given(angle, unit, angle, unit, unit)
def test_predictabilities_bounded_under_mixing(t1, r1, t2, r2, w):
    disc = StateSpaceModel.disc()
    a = disc.point(r1 * math.sin(t1), r1 * math.cos(t1))
    b = disc.point(r2 * math.sin(t2), r2 * math.cos(t2))
    m = gpt.mix([a, b], [w, 1 - w])
    for f in (duality.fringe_visibility, duality.path_distinguishability):
        assert f(m) <= max(f(a), f(b)) + 1e-12


def test_witness_sum_values():
    assert duality.witness_sum(0.75) == pytest.approx(0.5 + H, abs=1e-15)
    assert duality.witness_sum((1 + 1 / math.sqrt(2)) / 2) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert duality.witness_sum(0.5) == pytest.approx(1.0)


def test_optimal_reflectivity_reports_both_maximizers():
    winners, best = duality.optimal_reflectivity()
    assert best == pytest.approx(math.sqrt(2), abs=1e-9)
    np.testing.assert_allclose(winners, [(1 - 1 / math.sqrt(2)) / 2, (1 + 1 / math.sqrt(2)) / 2], atol=1e-6)
    assert duality.witness_sum(0.75) < best


def test_optimal_reflectivity_custom_objective():
    winners, best = duality.optimal_reflectivity(lambda r: -(r - 0.3) ** 2, grid=101)
    assert winners == [pytest.approx(0.3, abs=1e-6)] and best == pytest.approx(0.0, abs=1e-12)
