"""Theory-agnostic GPT tomography from outcome frequencies.

The frequency matrix ``F`` (preparations x measurements, probability of +1)
is factorized as ``F ~ S @ E.T`` where every state row has unit coordinate 1
and the unit effect is ``(1, 0, ..., 0)``. Minus-outcome effects are
``unit - plus``, so only plus effects are fitted.

Fitting is alternating weighted least squares. Each block update (one effect
row, or one state row) is a small convex QP solved exactly with quadprog,
with every predicted probability constrained to [0, 1]; an update is kept
only if it does not raise that block's residual, so the total residual never
increases.

Rank selection holds out a fraction of cells chosen by a seeded shuffle,
taking only cells whose removal leaves each state and each effect
identifiable. Ranks too large to be identified under that split are judged
by a goodness-of-fit test on all cells instead.

Caveat: the probed preparations and measurements are assumed tomographically
complete; nothing here can test that assumption.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import quadprog
from scipy.stats import chi2

from .errors import DegenerateData, NoConvergence, SingularMap, ValidationError
from .gpt import EFFECT, STATE, BinaryMeasurement, GptVector, unit_effect
from .interferometer import CountsTable

log = logging.getLogger(__name__)

HOLDOUT_FRACTION = 0.2
PROB_SLACK = 1e-6


@dataclass(frozen=True, eq=False)
class TomographyFit:
    states: tuple[GptVector, ...]
    effects: tuple[GptVector, ...]  # plus, minus per measurement
    rank: int
    training_residual: float
    holdout_residual: float | None
    prep_ids: tuple[str, ...] = ()
    measurements: tuple[str, ...] = ()
    rank_scores: dict = field(default_factory=dict)

    @property
    def S(self) -> np.ndarray:
        return np.stack([s.coords for s in self.states])

    @property
    def E_plus(self) -> np.ndarray:
        return np.stack([e.coords for e in self.effects[0::2]])

    def predicted(self) -> np.ndarray:
        """Fitted probability of outcome +1 per (preparation, measurement)."""
        return self.S @ self.E_plus.T

    def measurement(self, label: str) -> BinaryMeasurement:
        try:
            j = self.measurements.index(label)
        except ValueError:
            raise ValidationError(f"fit has no measurement {label!r}") from None
        return BinaryMeasurement(self.effects[2 * j], self.effects[2 * j + 1], label)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "training_residual": self.training_residual,
            "holdout_residual": self.holdout_residual,
            "prep_ids": list(self.prep_ids),
            "measurements": list(self.measurements),
            "unit_effect": unit_effect(self.rank).to_json()["coords"],
            "states": [s.to_json()["coords"] for s in self.states],
            "effects": [{"measurement": m, "plus": self.effects[2 * j].to_json()["coords"],
                         "minus": self.effects[2 * j + 1].to_json()["coords"]}
                        for j, m in enumerate(self.measurements)],
            "rank_scores": {str(k): v for k, v in self.rank_scores.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "TomographyFit":
        states = tuple(GptVector(c, STATE) for c in data["states"])
        effects = []
        for e in data["effects"]:
            effects += [GptVector(e["plus"], EFFECT), GptVector(e["minus"], EFFECT)]
        return cls(states, tuple(effects), int(data["rank"]), float(data["training_residual"]),
                   data.get("holdout_residual"), tuple(data.get("prep_ids", ())),
                   tuple(e["measurement"] for e in data["effects"]),
                   {int(k): v for k, v in data.get("rank_scores", {}).items()})


def cell_weights(F: np.ndarray, shots: np.ndarray | None) -> np.ndarray:
    if shots is None:
        return np.ones_like(F)
    shots = np.asarray(shots, dtype=float)
    return shots / (F * (1 - F) + 1 / shots)


def _residual(F, W, mask, S, E) -> float:
    return float(np.sum(mask * W * (F - S @ E.T) ** 2))


def _block_qp(A, y, w, C, lo, hi, old):
    """argmin sum w (y - A v)^2 s.t. lo <= C v <= hi; falls back to ``old`` if not better."""
    def obj(v):
        return float(np.sum(w * (y - A @ v) ** 2))

    n = A.shape[1]
    w = w / w.max()  # same minimizer; keeps quadprog's feasibility checks well scaled
    G = 2 * (A.T * w) @ A
    G += (1e-12 * (np.trace(G) / n + 1.0)) * np.eye(n)
    a = 2 * (A.T * w) @ y
    Cq = np.vstack([C, -C]).T
    bq = np.concatenate([lo, -hi])
    try:
        v = quadprog.solve_qp(G, a, Cq, bq)[0]
    except ValueError:
        return old
    if old is not None and obj(v) > obj(old):
        return old
    return v


def _e_step(F, W, mask, S, E_old):
    n_p, d = S.shape
    E = np.empty((F.shape[1], d))
    lo, hi = np.zeros(n_p), np.ones(n_p)
    # the fair coin is feasible for any states with unit coordinate 1
    coin = np.zeros(d)
    coin[0] = 0.5
    for j in range(F.shape[1]):
        obs = mask[:, j]
        old = coin if E_old is None else E_old[j]
        E[j] = _block_qp(S[obs], F[obs, j], W[obs, j], S, lo, hi, old)
    return E


def _s_step(F, W, mask, S_old, E):
    S = S_old.copy()
    if E.shape[1] == 1:
        return S
    base, B = E[:, 0], E[:, 1:]
    for i in range(F.shape[0]):
        obs = mask[i]
        S[i, 1:] = _block_qp(B[obs], F[i, obs] - base[obs], W[i, obs], B,
                             -base, 1 - base, S_old[i, 1:])
    return S


def _init_states(F, mask, d, rng):
    n_p = F.shape[0]
    S = np.ones((n_p, d))
    if d == 1:
        return S
    if rng is None:
        col_mean = np.nanmean(np.where(mask, F, np.nan), axis=0)
        filled = np.where(mask, F, col_mean)
        U, _, _ = np.linalg.svd(filled - filled.mean(axis=0), full_matrices=False)
        k = min(d - 1, U.shape[1])
        S[:, 1:1 + k] = U[:, :k]
        if k < d - 1:
            S[:, 1 + k:] = 0.0
    else:
        S[:, 1:] = rng.normal(size=(n_p, d - 1))
    return S


def _als(F, W, mask, d, rng, max_iter, rtol, history=None):
    S = _init_states(F, mask, d, rng)
    E = _e_step(F, W, mask, S, None)
    res = _residual(F, W, mask, S, E)
    # below this the residual is rounding noise of the products S @ E.T
    scale = float(np.sum(W * mask))
    floor = 1e-22 * scale
    converged = False
    for _ in range(max_iter):
        S = _s_step(F, W, mask, S, E)
        E = _e_step(F, W, mask, S, E)
        new = _residual(F, W, mask, S, E)
        assert new <= res * (1 + 1e-12) + floor, (res, new)
        if history is not None:
            history.append(new)
        if res - new <= rtol * res + 1e-18 * scale or new <= floor:
            res = new
            converged = True
            break
        res = new
    return S, E, res, converged


def _best_fit(F, W, mask, d, seed, restarts, max_iter, rtol, require=True):
    best = None
    any_converged = False
    for k in range(max(restarts, 1)):
        rng = None if k == 0 else np.random.default_rng([seed, d, k])
        S, E, res, ok = _als(F, W, mask, d, rng, max_iter, rtol)
        any_converged |= ok
        if best is None or res < best[2]:
            best = (S, E, res)
    if require and not any_converged:
        raise NoConvergence(f"rank {d}: no restart converged in {max_iter} iterations")
    return best + (any_converged,)


def holdout_mask(shape, d_split: int, seed: int, fraction: float = HOLDOUT_FRACTION) -> np.ndarray:
    """Training mask (True = used for fitting) with identifiable rows and columns."""
    n_p, n_m = shape
    mask = np.ones(shape, dtype=bool)
    target = int(round(fraction * n_p * n_m))
    order = np.random.default_rng(seed).permutation(n_p * n_m)
    held = 0
    for cell in order:
        if held >= target:
            break
        i, j = divmod(int(cell), n_m)
        if mask[i].sum() - 1 >= d_split - 1 and mask[:, j].sum() - 1 >= d_split:
            mask[i, j] = False
            held += 1
    return mask


def fit_frequencies(F, shots=None, rank_candidates: Sequence[int] | None = None, seed: int = 0,
                    restarts: int = 3, max_iter: int = 3000, rtol: float = 1e-11,
                    prep_ids=(), measurements=()) -> TomographyFit:
    """Fit states and effects to a matrix of +1 frequencies.

    ``shots=None`` means exact probabilities (unit weights).
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.size == 0:
        raise ValidationError("frequency matrix must be non-empty and 2-D")
    if np.any(F < 0) or np.any(F > 1):
        raise ValidationError("frequencies must lie in [0, 1]")
    n_p, n_m = F.shape
    max_rank = min(n_p, n_m + 1)
    ranks = sorted(set(rank_candidates or range(1, max_rank + 1)))
    if ranks[0] < 1 or ranks[-1] > max_rank:
        raise ValidationError(f"rank candidates must lie in [1, {max_rank}]")
    if n_p > 1 and ranks[0] > 1 and np.all(np.ptp(F, axis=0) <= 1e-15):
        raise DegenerateData("every measurement column is constant; only rank 1 is identifiable")
    W = cell_weights(F, shots)
    full = np.ones_like(F, dtype=bool)

    d_split = min(n_m, n_p - 1)
    mask = holdout_mask(F.shape, d_split, seed) if d_split >= 1 else full
    n_hold = int((~mask).sum())

    scores: dict[int, dict] = {}
    fits = {}
    for d in ranks:
        S, E, res, _ = _best_fit(F, W, full, d, seed, restarts, max_iter, rtol)
        fits[d] = (S, E, res)
        entry = {"training": res, "holdout": None}
        if n_hold and d <= d_split:
            # a holdout fit only scores the rank, so a stalled one is kept
            Sh, Eh, _, ok = _best_fit(F, W, mask, d, seed, restarts, max_iter, rtol, require=False)
            entry["holdout"] = _residual(F, W, ~mask, Sh, Eh)
            entry["holdout_converged"] = ok
        scores[d] = entry

    exact = shots is None
    cells = F.size
    fit_threshold = 1e-12 * cells if exact else float(chi2.ppf(0.999, cells))
    hold_slack = 1e-12 * max(n_hold, 1) if exact else 2 * np.sqrt(2 * max(n_hold, 1))

    validated = [d for d in ranks if scores[d]["holdout"] is not None]
    chosen = None
    if validated:
        best = min(scores[d]["holdout"] for d in validated)
        chosen = next(d for d in validated if scores[d]["holdout"] <= best + hold_slack)
    # holdout guards against overfitting; the goodness-of-fit test against underfitting
    if chosen is None or scores[chosen]["training"] > fit_threshold:
        larger = [d for d in ranks if chosen is None or d > chosen]
        passing = [d for d in larger if scores[d]["training"] <= fit_threshold]
        if passing:
            chosen = passing[0]
        elif chosen is None:
            chosen = min(ranks, key=lambda d: (scores[d]["training"], d))
    log.debug("rank scores %s -> %d", scores, chosen)

    S, E, res = fits[chosen]
    states = tuple(GptVector(row, STATE) for row in S)
    unit = unit_effect(chosen).coords
    effects = []
    for e in E:
        effects += [GptVector(e, EFFECT), GptVector(unit - e, EFFECT)]
    fit = TomographyFit(states, tuple(effects), chosen, res, scores[chosen]["holdout"],
                        tuple(prep_ids), tuple(measurements), scores)
    pred = fit.predicted()
    if np.any(pred < -PROB_SLACK) or np.any(pred > 1 + PROB_SLACK):
        raise NoConvergence("fitted probabilities left [0, 1]")
    return fit


def fit_gpt(counts: CountsTable, rank_candidates: Sequence[int] | None = None, seed: int = 0,
            restarts: int = 3) -> TomographyFit:
    return fit_frequencies(counts.frequencies(), counts.shots, rank_candidates, seed, restarts,
                           prep_ids=counts.prep_ids, measurements=counts.measurements)


def gauge_align(fit: TomographyFit, reference: Sequence[GptVector]) -> TomographyFit:
    """Apply the gauge map ``s -> s A``, ``e -> A^-1 e`` bringing the states closest to ``reference``.

    ``A`` keeps its first column at the unit vector, so unit coordinates of
    states and the unit effect are preserved.
    """
    R = np.stack([r.coords for r in reference])
    S = fit.S
    if R.shape != S.shape:
        raise SingularMap(f"reference has shape {R.shape}, fit states {S.shape}")
    A = np.zeros((fit.rank, fit.rank))
    A[0, 0] = 1.0
    if fit.rank > 1:
        A[:, 1:] = np.linalg.lstsq(S, R[:, 1:], rcond=None)[0]
    if np.linalg.cond(A) > 1e12:
        raise SingularMap("reference does not determine an invertible gauge map")
    A_inv = np.linalg.inv(A)
    states = tuple(GptVector(s @ A, STATE) for s in S)
    effects = tuple(GptVector(A_inv @ e.coords, EFFECT) for e in fit.effects)
    return replace(fit, states=states, effects=effects)
