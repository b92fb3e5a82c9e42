"""Fringe visibility, path distinguishability and their tradeoff curves."""
from __future__ import annotations

import io
import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import gpt
from .errors import EmptySlice, ValidationError
from .gpt import DISC, BinaryMeasurement, GptVector, StateSpaceModel
from .interferometer import which_phase, which_way

BOUND_TOL = 1e-12


@dataclass(frozen=True)
class DualityPoint:
    visibility: float
    distinguishability: float
    source: str | None = None

    def __post_init__(self):
        for name in ("visibility", "distinguishability"):
            v = getattr(self, name)
            if not (-1e-12 <= v <= 1 + 1e-12):
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")

    @property
    def witness(self) -> float:
        return self.visibility + self.distinguishability


@dataclass(frozen=True)
class TradeoffCurve:
    points: tuple[DualityPoint, ...]
    space: str

    def __post_init__(self):
        ps = [p.distinguishability for p in self.points]
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValidationError("distinguishability must increase strictly along a curve")

    @property
    def P(self) -> np.ndarray:
        return np.array([p.distinguishability for p in self.points])

    @property
    def V(self) -> np.ndarray:
        return np.array([p.visibility for p in self.points])

    def csv_rows(self):
        for p in self.points:
            yield (repr(float(p.distinguishability)), repr(float(p.visibility)), self.space)


def curves_to_csv(curves: Sequence[TradeoffCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("P", "V", "space"))
    for c in curves:
        w.writerows(c.csv_rows())
    return buf.getvalue()


def _default(m: BinaryMeasurement | None, factory, s: GptVector) -> BinaryMeasurement:
    return factory(s.dim) if m is None else m


def fringe_visibility_raw(s: GptVector, measurement: BinaryMeasurement | None = None) -> float:
    """Normalized contrast ``(P_max - P_min) / (P_max + P_min)`` of the two output ports."""
    m = _default(measurement, which_phase, s)
    p_plus, p_minus = gpt.probability(s, m.plus), gpt.probability(s, m.minus)
    hi, lo = max(p_plus, p_minus), min(p_plus, p_minus)
    return (hi - lo) / (hi + lo)


def fringe_visibility(s: GptVector, measurement: BinaryMeasurement | None = None) -> float:
    m = _default(measurement, which_phase, s)
    v = gpt.predictability(s, m)
    raw = fringe_visibility_raw(s, m)
    # port probabilities sum to one, so the contrast denominator is trivial
    assert abs(raw - v) <= 1e-9, (raw, v)
    return v


def path_distinguishability(s: GptVector, measurement: BinaryMeasurement | None = None) -> float:
    return gpt.predictability(s, _default(measurement, which_way, s))


def duality_point(s: GptVector, source: str | None = None) -> DualityPoint:
    return DualityPoint(fringe_visibility(s), path_distinguishability(s), source)


def nc_bound_satisfied(pt: DualityPoint) -> tuple[bool, float]:
    """Check ``V + P <= 1``; returns (satisfied, margin)."""
    margin = 1.0 - (pt.visibility + pt.distinguishability)
    return margin >= -BOUND_TOL, margin


def quantum_bound_satisfied(pt: DualityPoint) -> tuple[bool, float]:
    """Check ``V**2 + P**2 <= 1``; returns (satisfied, margin)."""
    margin = 1.0 - (pt.visibility ** 2 + pt.distinguishability ** 2)
    return margin >= -BOUND_TOL, margin


def _slice_x(vertices: np.ndarray, z: float, tol: float = 1e-12):
    """x-extent of a convex polygon at height z, or None if the line misses it."""
    xs = []
    nxt = np.roll(vertices, -1, axis=0)
    for (x0, z0), (x1, z1) in zip(vertices, nxt):
        if min(z0, z1) - tol <= z <= max(z0, z1) + tol:
            if abs(z1 - z0) <= tol:
                xs.extend((x0, x1))
            else:
                t = min(max((z - z0) / (z1 - z0), 0.0), 1.0)
                xs.append(x0 + t * (x1 - x0))
    if not xs:
        return None
    return min(xs), max(xs)


def max_visibility(space: StateSpaceModel, P: float) -> float:
    """Largest |<X>| over states of ``space`` with |<Z>| = P."""
    if space.shape == DISC:
        if P > 1 + 1e-12:
            raise EmptySlice(f"no state of the disc has |<Z>| = {P}")
        return math.sqrt(max(0.0, 1.0 - P * P))
    best = None
    for z in (P, -P):
        ext = _slice_x(space.polygon_vertices, z)
        if ext is not None:
            v = max(abs(ext[0]), abs(ext[1]))
            best = v if best is None else max(best, v)
    if best is None:
        raise EmptySlice(f"no state of {space.label} has |<Z>| = {P}")
    return best


def tradeoff_sweep(space: StateSpaceModel, grid: int = 101) -> TradeoffCurve:
    """Maximal visibility on a uniform distinguishability grid over [0, 1]."""
    if grid < 2:
        raise ValidationError("grid must be at least 2")
    pts = tuple(DualityPoint(max_visibility(space, float(P)), float(P))
                for P in np.linspace(0.0, 1.0, grid))
    return TradeoffCurve(pts, space.label)


def nc_line(grid: int = 101) -> TradeoffCurve:
    """The noncontextual bound ``V = 1 - P`` on the same grid as :func:`tradeoff_sweep`."""
    pts = tuple(DualityPoint(float(1.0 - P), float(P)) for P in np.linspace(0.0, 1.0, grid))
    return TradeoffCurve(pts, "nc_bound")


def witness_sum(r: float) -> float:
    """``V + P`` of the ideal pure state prepared with reflectivity r, phase 0."""
    return 2 * math.sqrt(max(r * (1 - r), 0.0)) + abs(1 - 2 * r)


def optimal_reflectivity(objective: Callable[[float], float] = witness_sum,
                         grid: int = 10001, tol: float = 1e-9):
    """All global maximizers of ``objective`` on [0, 1] and the maximal value.

    A dense grid brackets every local maximum, each of which is refined with a
    bounded scalar search; maximizers within ``tol`` of the best value are kept.
    """
    rs = np.linspace(0.0, 1.0, grid)
    vals = np.array([objective(float(r)) for r in rs])
    cands = []
    for k in range(grid):
        left = vals[k - 1] if k > 0 else -np.inf
        right = vals[k + 1] if k < grid - 1 else -np.inf
        if vals[k] >= left and vals[k] >= right:
            lo, hi = rs[max(k - 1, 0)], rs[min(k + 1, grid - 1)]
            res = minimize_scalar(lambda r: -objective(r), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-13})
            r_star, v_star = (float(res.x), -float(res.fun)) if -res.fun >= vals[k] else (float(rs[k]), float(vals[k]))
            cands.append((r_star, v_star))
    best = max(v for _, v in cands)
    winners: list[float] = []
    for r, v in sorted(cands):
        if v >= best - tol and not any(abs(r - w) < 1e-6 for w in winners):
            winners.append(r)
    return winners, best
