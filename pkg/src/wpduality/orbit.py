"""Orbits of the two-reflection group acting on the expectation values of (M, M').

A quadruple ``s1..s4`` is an orbit when the expectation pairs follow the sign
pattern ``(a, b), (a, -b), (-a, -b), (-a, b)`` and the equal mixtures of the
diagonal pairs coincide: ``s1/2 + s3/2 == s2/2 + s4/2``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gpt
from .errors import DimensionMismatch, NotAPlaneFragment, ValidationError
from .gpt import STATE, BinaryMeasurement, GptVector, StateSpaceModel

# relabelings of the 4-cycle s1-s2-s3-s4; all of them preserve the diagonal pairs
RELABELINGS = (
    (0, 1, 2, 3), (1, 2, 3, 0), (2, 3, 0, 1), (3, 0, 1, 2),
    (0, 3, 2, 1), (3, 2, 1, 0), (2, 1, 0, 3), (1, 0, 3, 2),
)

SIGN_PATTERN = ((1, 1), (1, -1), (-1, -1), (-1, 1))


@dataclass(frozen=True, eq=False)
class OrbitQuadruple:
    states: tuple[GptVector, GptVector, GptVector, GptVector]
    M: BinaryMeasurement
    M_prime: BinaryMeasurement

    def __post_init__(self):
        states = tuple(self.states)
        if len(states) != 4:
            raise ValidationError("an orbit quadruple has exactly four states")
        dims = {s.dim for s in states} | {self.M.dim, self.M_prime.dim}
        if len(dims) != 1:
            raise DimensionMismatch(f"quadruple mixes dimensions {sorted(dims)}")
        if any(s.kind != STATE for s in states):
            raise ValidationError("orbit members must be states")
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.M.dim

    def expectations(self) -> np.ndarray:
        """Array of shape (4, 2): ``<M>`` and ``<M'>`` per state."""
        return np.array([[gpt.expectation(s, self.M), gpt.expectation(s, self.M_prime)]
                         for s in self.states])

    def relabeled(self, order: Sequence[int]) -> "OrbitQuadruple":
        return OrbitQuadruple(tuple(self.states[k] for k in order), self.M, self.M_prime)

    def to_json(self) -> dict:
        return {"states": [s.to_json() for s in self.states],
                "M": self.M.to_json(), "M_prime": self.M_prime.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "OrbitQuadruple":
        return cls(tuple(GptVector.from_json(s) for s in data["states"]),
                   BinaryMeasurement.from_json(data["M"]),
                   BinaryMeasurement.from_json(data["M_prime"]))


@dataclass(frozen=True)
class OrbitReport:
    symmetry_residual: float
    equivalence_residual: float
    tol: float
    assignment: tuple[int, int, int, int]
    expectations: tuple[tuple[float, float], ...]

    @property
    def passed(self) -> bool:
        return self.symmetry_residual <= self.tol and self.equivalence_residual <= self.tol

    def to_json(self) -> dict:
        return {"pass": self.passed, "symmetry_residual": self.symmetry_residual,
                "equivalence_residual": self.equivalence_residual, "tol": self.tol,
                "assignment": list(self.assignment),
                "expectations": [list(e) for e in self.expectations]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _symmetry_residual(ev: np.ndarray) -> float:
    m, mp = ev[:, 0], ev[:, 1]
    gaps = (m[0] - m[1], m[1] + m[2], m[2] - m[3],
            mp[0] + mp[1], mp[1] - mp[2], mp[2] + mp[3])
    return float(np.max(np.abs(gaps)))


def check_orbit(q: OrbitQuadruple, tol: float = 1e-12) -> OrbitReport:
    """Residuals of the sign-pattern and mixture conditions, best over relabelings."""
    if tol <= 0:
        raise ValidationError("tol must be positive")
    ev = q.expectations()
    best = min(RELABELINGS, key=lambda order: _symmetry_residual(ev[list(order)]))
    sym = _symmetry_residual(ev[list(best)])
    c = np.stack([s.coords for s in q.states])[list(best)]
    equiv = float(np.max(np.abs(0.5 * (c[0] + c[2]) - 0.5 * (c[1] + c[3]))))
    return OrbitReport(sym, equiv, tol, best, tuple(map(tuple, ev.tolist())))


def _plane_solver(M: BinaryMeasurement, M_prime: BinaryMeasurement):
    a = np.stack([M.observable[1:], M_prime.observable[1:]])
    gram = a @ a.T
    scale = np.sqrt(gram[0, 0] * gram[1, 1])
    if scale == 0 or abs(np.linalg.det(gram)) <= 1e-12 * scale ** 2:
        raise NotAPlaneFragment(f"{M.label} and {M_prime.label} do not fix two independent coordinates")
    return a, np.linalg.inv(gram)


def complete_orbit(s1: GptVector, M: BinaryMeasurement, M_prime: BinaryMeasurement,
                   space: StateSpaceModel, tol: float = gpt.MEMBERSHIP_TOL):
    """Sign-flipped counterparts ``(s2, s3, s4)`` of ``s1``, or None if one leaves ``space``.

    Each counterpart moves ``s1`` only within the span of the two observables,
    so coordinates outside that plane are left as they are.
    """
    if not space.contains(s1, tol):
        raise ValidationError("s1 is not a state of the given space")
    a, inv_gram = _plane_solver(M, M_prime)
    m, mp = gpt.expectation(s1, M), gpt.expectation(s1, M_prime)
    out = []
    for sm, smp in SIGN_PATTERN[1:]:
        delta = np.array([sm * m - m, smp * mp - mp])
        shift = a.T @ (inv_gram @ delta)
        coords = np.array(s1.coords)
        coords[1:] += shift
        cand = GptVector(coords, STATE)
        if not space.contains(cand, tol):
            return None
        out.append(cand)
    return tuple(out)


def scan_points(space: StateSpaceModel, grid: int) -> list[GptVector]:
    """Boundary samples followed by shrunken copies towards the mixed point."""
    pts = space.boundary_points(grid)
    scales = np.linspace(1.0, 0.0, max(grid // 8, 2) + 1)
    out = []
    for lam in scales:
        for x, z in pts:
            out.append(space.point(lam * x, lam * z))
        if lam == 0.0:
            break
    return out[: len(out) - len(pts) + 1]


def symmetry_scan(space: StateSpaceModel, M: BinaryMeasurement, M_prime: BinaryMeasurement,
                  grid: int = 64, tol: float = gpt.MEMBERSHIP_TOL):
    """Whether every sampled state completes to an orbit; also the failing states."""
    if grid < 3:
        raise ValidationError("grid must be at least 3")
    _plane_solver(M, M_prime)
    failures = [s for s in scan_points(space, grid)
                if complete_orbit(s, M, M_prime, space, tol) is None]
    return not failures, failures
