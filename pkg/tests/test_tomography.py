import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wpduality import gpt, tomography
from wpduality.errors import DegenerateData, SingularMap, ValidationError
from wpduality.interferometer import orbit_preparations, sample_counts
from wpduality.pipeline import experiment
from wpduality.tomography import TomographyFit, fit_frequencies, fit_gpt, gauge_align


def plane_states(q):
    return [gpt.plane_state(s.coords[1], s.coords[3]) for s in q.states]


def exact_table(states, effects):
    return np.array([[gpt.probability(s, e) for e in effects] for s in states])


@pytest.fixture(scope="module")
def orbit_exact():
    states = plane_states(orbit_preparations(0.75))
    Z, X = gpt.direction_measurement([0, 1]), gpt.direction_measurement([1, 0])
    effects = [gpt.unit_effect(3), Z.plus, X.plus]
    return states, exact_table(states, effects)


def test_exact_orbit_data_recovers_rank_three(orbit_exact):
    states, F = orbit_exact
    fit = fit_frequencies(F)
    assert fit.rank == 3
    assert fit.training_residual < 1e-18
    assert np.max(np.abs(fit.predicted() - F)) < 1e-9
    aligned = gauge_align(fit, states)
    for s, t in zip(aligned.states, states):
        np.testing.assert_allclose(s.coords, t.coords, atol=1e-9)


def test_single_cell_is_rank_one():
    fit = fit_frequencies([[0.37]], shots=np.array([[100]]))
    assert fit.rank == 1
    assert fit.predicted()[0, 0] == pytest.approx(0.37, abs=1e-9)


def test_fit_invariants(orbit_exact):
    _, F = orbit_exact
    fit = fit_frequencies(F)
    assert all(s.coords[0] == 1.0 for s in fit.states)
    # the minus effect of each measurement completes the unit effect
    unit = gpt.unit_effect(fit.rank).coords
    for k in range(0, len(fit.effects), 2):
        np.testing.assert_allclose(fit.effects[k].coords + fit.effects[k + 1].coords, unit)


def test_residual_never_increases():
    rng = np.random.default_rng(0)
    F = np.clip(rng.uniform(size=(6, 4)), 0.05, 0.95)
    W = tomography.cell_weights(F, np.full(F.shape, 500))
    hist = []
    tomography._als(F, W, np.ones_like(F, dtype=bool), 3, np.random.default_rng(1), 500, 1e-12, hist)
    assert len(hist) > 2
    assert all(b <= a * (1 + 1e-12) for a, b in zip(hist, hist[1:]))


def test_pipeline_design_rank_and_accuracy():
    ids, states, meas = experiment(0.75, 0.05)
    counts = sample_counts(states, meas, 100_000, seed=4, prep_ids=ids)
    fit = fit_gpt(counts, seed=4, restarts=2)
    assert fit.rank == 3
    aligned = gauge_align(fit, states)
    exp_fit = np.array([[gpt.expectation(s, aligned.measurement(m.label)) for m in meas]
                        for s in aligned.states])
    exp_true = np.array([[gpt.expectation(s, m) for m in meas] for s in states])
    assert np.max(np.abs(exp_fit - exp_true)) < 0.01
    pred = fit.predicted()
    assert pred.min() >= -1e-6 and pred.max() <= 1 + 1e-6


def test_fit_is_deterministic():
    ids, states, meas = experiment(0.75, 0.05)
    counts = sample_counts(states, meas, 10_000, seed=2, prep_ids=ids)
    a = fit_gpt(counts, seed=3, restarts=2).dumps()
    b = fit_gpt(counts, seed=3, restarts=2).dumps()
    assert a == b


@settings(max_examples=6)
@given(st.integers(2, 3), st.integers(0, 10_000))
def test_holdout_separates_true_rank(d, seed):
    # random exact rank-d GPT data inside the disc
    rng = np.random.default_rng(seed)
    n_p, n_m = 8, 6
    t = rng.uniform(0, 2 * math.pi, n_p)
    rad = rng.uniform(0.3, 1.0, n_p)
    S = np.column_stack([np.ones(n_p), rad * np.sin(t), rad * np.cos(t)])[:, :d]
    u = rng.uniform(0, 2 * math.pi, n_m)
    E = 0.5 * np.column_stack([np.ones(n_m), np.sin(u), np.cos(u)])[:, :d]
    F = S @ E.T
    fit = fit_frequencies(F, rank_candidates=range(1, d + 2), seed=seed)
    assert fit.rank == d
    scores = fit.rank_scores
    assert scores[d]["holdout"] * 100 <= scores[d - 1]["holdout"]


def test_holdout_mask_identifiable():
    mask = tomography.holdout_mask((8, 4), 3, seed=1)
    assert (~mask).sum() == round(0.2 * 32)
    assert np.all(mask.sum(axis=1) >= 2) and np.all(mask.sum(axis=0) >= 3)
    assert np.array_equal(mask, tomography.holdout_mask((8, 4), 3, seed=1))


def test_input_validation():
    with pytest.raises(ValidationError):
        fit_frequencies([[1.2, 0.3]])
    with pytest.raises(ValidationError):
        fit_frequencies(np.zeros((0, 2)))
    with pytest.raises(ValidationError):
        fit_frequencies([[0.2, 0.3], [0.4, 0.5]], rank_candidates=[4])


def test_constant_columns_are_degenerate():
    with pytest.raises(DegenerateData):
        fit_frequencies(np.full((4, 3), 0.5), rank_candidates=[2, 3])
    assert fit_frequencies(np.full((4, 3), 0.5)).rank == 1


def test_gauge_align_identity_and_errors(orbit_exact):
    _, F = orbit_exact
    fit = fit_frequencies(F)
    same = gauge_align(fit, fit.states)
    np.testing.assert_allclose(same.S, fit.S, atol=1e-12)
    np.testing.assert_allclose(same.predicted(), fit.predicted(), atol=1e-12)
    with pytest.raises(SingularMap):
        gauge_align(fit, [gpt.mixed_state(4)] * 4)
    with pytest.raises(SingularMap):
        gauge_align(fit, [gpt.mixed_state(3)] * 4)


def test_json_round_trip():
    ids, states, meas = experiment(0.75, 0.05)
    counts = sample_counts(states, meas, 5_000, seed=9, prep_ids=ids)
    fit = fit_gpt(counts, restarts=1)
    back = TomographyFit.from_json(fit.to_json())
    np.testing.assert_array_equal(back.predicted(), fit.predicted())
    assert back.prep_ids == ids and back.rank == fit.rank
    with pytest.raises(ValidationError):
        fit.measurement("nope")
