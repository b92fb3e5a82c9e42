"""Vectors, measurements and convex state spaces of a finite-dimensional GPT.

States and effects are real vectors whose pairing is the outcome probability.
Coordinate 0 is the unit coordinate. For the plane fragment used throughout,
states are ``(1, x, z)`` with ``x = <X>`` and ``z = <Z>``; the full dual-rail
qubit uses ``(1, x, y, z)``. Effects are stored as ``(c, n)/2``-style
coefficient vectors so that ``probability(s, e) == s @ e`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .errors import (
    BadWeights,
    DimensionMismatch,
    KindMismatch,
    ProbabilityOutOfRange,
    ValidationError,
)

UNIT_INDEX = 0
PROB_TOL = 1e-9
MEMBERSHIP_TOL = 1e-9

STATE = "state"
EFFECT = "effect"

_AXES = {3: {"x": 1, "z": 2}, 4: {"x": 1, "y": 2, "z": 3}}


def axis_index(name: str, dim: int) -> int:
    """Coordinate index of Bloch axis ``name`` ('x', 'y' or 'z') in dimension ``dim``."""
    try:
        return _AXES[dim][name]
    except KeyError:
        raise DimensionMismatch(f"no axis {name!r} in dimension {dim}") from None


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatch(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GptVector:
    """A state or effect vector. States carry ``coords[0] == 1``."""

    coords: np.ndarray
    kind: str = STATE

    def __post_init__(self):
        coords = _frozen(self.coords)
        if self.kind not in (STATE, EFFECT):
            raise KindMismatch(f"unknown kind {self.kind!r}")
        if self.kind == STATE:
            if abs(coords[UNIT_INDEX] - 1.0) > 1e-9:
                raise ValidationError(
                    f"state unit coordinate must be 1, got {coords[UNIT_INDEX]!r}")
            if coords[UNIT_INDEX] != 1.0:
                coords = coords.copy()
                coords[UNIT_INDEX] = 1.0
                coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.size

    @property
    def is_state(self) -> bool:
        return self.kind == STATE

    def __repr__(self):
        body = ", ".join(f"{c:.6g}" for c in self.coords)
        return f"GptVector({self.kind}: [{body}])"

    def allclose(self, other: "GptVector", atol: float = 1e-12) -> bool:
        return (self.kind == other.kind and self.dim == other.dim
                and bool(np.allclose(self.coords, other.coords, rtol=0, atol=atol)))

    def to_json(self) -> dict:
        return {"kind": self.kind, "coords": [float(c) for c in self.coords]}

    @classmethod
    def from_json(cls, data: dict) -> "GptVector":
        return cls(data["coords"], data.get("kind", STATE))


def state(*coords: float) -> GptVector:
    return GptVector(coords, STATE)


def effect(*coords: float) -> GptVector:
    return GptVector(coords, EFFECT)


def plane_state(x: float, z: float) -> GptVector:
    """State ``(1, x, z)`` of the x-z plane fragment."""
    return GptVector((1.0, x, z), STATE)


def mixed_state(dim: int = 3) -> GptVector:
    coords = np.zeros(dim)
    coords[UNIT_INDEX] = 1.0
    return GptVector(coords, STATE)


def unit_effect(dim: int = 3) -> GptVector:
    coords = np.zeros(dim)
    coords[UNIT_INDEX] = 1.0
    return GptVector(coords, EFFECT)


@dataclass(frozen=True, eq=False)
class BinaryMeasurement:
    """Two-outcome measurement with outcomes +1 and -1."""

    plus: GptVector
    minus: GptVector
    label: str = "M"

    def __post_init__(self):
        if self.plus.kind != EFFECT or self.minus.kind != EFFECT:
            raise KindMismatch("measurement outcomes must be effects")
        if self.plus.dim != self.minus.dim:
            raise DimensionMismatch("outcome effects differ in dimension")
        total = self.plus.coords + self.minus.coords
        if not np.allclose(total, unit_effect(self.dim).coords, rtol=0, atol=1e-9):
            raise ValidationError(f"outcomes of {self.label!r} do not sum to the unit effect")

    @property
    def dim(self) -> int:
        return self.plus.dim

    @property
    def observable(self) -> np.ndarray:
        """Linear functional ``plus - minus``; its pairing with a state is ``<M>``."""
        return self.plus.coords - self.minus.coords

    def swapped(self) -> "BinaryMeasurement":
        return BinaryMeasurement(self.minus, self.plus, self.label)

    def to_json(self) -> dict:
        return {"label": self.label,
                "plus": [float(c) for c in self.plus.coords],
                "minus": [float(c) for c in self.minus.coords]}

    @classmethod
    def from_json(cls, data: dict) -> "BinaryMeasurement":
        return cls(GptVector(data["plus"], EFFECT), GptVector(data["minus"], EFFECT),
                   data.get("label", "M"))


def measurement_from_plus(plus: GptVector, label: str = "M") -> BinaryMeasurement:
    minus = GptVector(unit_effect(plus.dim).coords - plus.coords, EFFECT)
    return BinaryMeasurement(plus, minus, label)


def direction_measurement(direction: Sequence[float], label: str = "M") -> BinaryMeasurement:
    """Sharp measurement along a unit Bloch direction (non-unit coordinates)."""
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if not math.isclose(norm, 1.0, abs_tol=1e-9):
        raise ValidationError(f"direction must have unit norm, got {norm}")
    plus = np.concatenate(([1.0], n)) / 2
    return measurement_from_plus(GptVector(plus, EFFECT), label)


def _check_pair(s: GptVector, e: GptVector) -> None:
    if s.kind != STATE or e.kind != EFFECT:
        raise KindMismatch(f"expected (state, effect), got ({s.kind}, {e.kind})")
    if s.dim != e.dim:
        raise DimensionMismatch(f"state has dimension {s.dim}, effect {e.dim}")


def probability(s: GptVector, e: GptVector) -> float:
    _check_pair(s, e)
    p = float(s.coords @ e.coords)
    if p < -PROB_TOL or p > 1 + PROB_TOL:
        raise ProbabilityOutOfRange(f"pairing gives {p!r}, outside [0, 1]")
    return p


def expectation(s: GptVector, m: BinaryMeasurement) -> float:
    return probability(s, m.plus) - probability(s, m.minus)


def predictability(s: GptVector, m: BinaryMeasurement) -> float:
    return abs(expectation(s, m))


def mix(states: Sequence[GptVector], weights: Sequence[float]) -> GptVector:
    """Convex combination of states."""
    w = np.asarray(weights, dtype=float)
    if len(states) == 0 or w.shape != (len(states),):
        raise BadWeights("need one weight per state")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise BadWeights(f"weights must be a probability vector, got {w}")
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise DimensionMismatch(f"states of differing dimension {sorted(dims)}")
    if any(s.kind != STATE for s in states):
        raise KindMismatch("mix is defined on states")
    coords = w @ np.stack([s.coords for s in states])
    coords[UNIT_INDEX] = 1.0
    return GptVector(coords, STATE)


# ---------------------------------------------------------------------------
# convex state spaces in the <M>-<M'> plane

DISC = "disc"
SQUARE = "square"
DIAMOND = "diamond"
POLYGON = "polygon"
POLYTOPE = "polytope"


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Convex body of valid ``(x, z)`` pairs, embedded in dimension ``dim``.

    ``disc`` is the unit Euclidean ball over every non-unit coordinate (the
    Bloch ball when ``dim == 4``). Polygonal bodies live in the x-z plane and
    require any further coordinate to vanish.
    """

    shape: str = DISC
    dim: int = 3
    n: int | None = None
    vertices: tuple | None = None
    _hull: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.dim not in _AXES:
            raise DimensionMismatch(f"unsupported embedding dimension {self.dim}")
        if self.shape == DISC:
            return
        if self.shape == SQUARE:
            verts = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
        elif self.shape == DIAMOND:
            verts = [(0, 1), (-1, 0), (0, -1), (1, 0)]
        elif self.shape == POLYGON:
            if self.n is None or self.n < 3:
                raise ValidationError("regular polygon needs n >= 3")
            # one vertex on the +z axis, circumradius 1
            ang = 2 * np.pi * np.arange(self.n) / self.n
            verts = np.column_stack((np.sin(ang), np.cos(ang)))
        elif self.shape == POLYTOPE:
            if self.vertices is None or len(self.vertices) < 3:
                raise ValidationError("polytope needs at least three vertices")
            verts = self.vertices
        else:
            raise ValidationError(f"unknown state-space shape {self.shape!r}")
        pts = np.asarray(verts, dtype=float)
        hull = ConvexHull(pts)
        ordered = pts[hull.vertices]  # counter-clockwise
        object.__setattr__(self, "_hull", ordered)
        if not self._in_polygon(0.0, 0.0, 0.0):
            raise ValidationError("state space must contain the maximally mixed point")

    @classmethod
    def disc(cls, dim: int = 3) -> "StateSpaceModel":
        return cls(DISC, dim)

    @classmethod
    def square(cls, dim: int = 3) -> "StateSpaceModel":
        return cls(SQUARE, dim)

    @classmethod
    def diamond(cls, dim: int = 3) -> "StateSpaceModel":
        return cls(DIAMOND, dim)

    @classmethod
    def regular_polygon(cls, n: int, dim: int = 3) -> "StateSpaceModel":
        return cls(POLYGON, dim, n=n)

    @classmethod
    def polytope(cls, vertices: Iterable[Sequence[float]], dim: int = 3) -> "StateSpaceModel":
        return cls(POLYTOPE, dim, vertices=tuple(tuple(map(float, v)) for v in vertices))

    @property
    def label(self) -> str:
        if self.shape == POLYGON:
            return f"polygon{self.n}"
        return self.shape

    @property
    def polygon_vertices(self) -> np.ndarray | None:
        """Hull vertices in ``(x, z)``, counter-clockwise; None for the disc."""
        return self._hull

    def _in_polygon(self, x: float, z: float, tol: float) -> bool:
        v = self._hull
        edges = np.roll(v, -1, axis=0) - v
        # cross(edge, p - v0) >= 0 for every edge of a CCW polygon
        rel = np.array([x, z]) - v
        cross = edges[:, 0] * rel[:, 1] - edges[:, 1] * rel[:, 0]
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        return bool(np.all(cross / lengths >= -tol))

    def contains(self, s: GptVector, tol: float = MEMBERSHIP_TOL) -> bool:
        if s.dim != self.dim:
            raise DimensionMismatch(f"state has dimension {s.dim}, space {self.dim}")
        rest = s.coords[1:]
        if self.shape == DISC:
            return bool(np.linalg.norm(rest) <= 1 + tol)
        ix, iz = axis_index("x", self.dim), axis_index("z", self.dim)
        others = [k for k in range(1, self.dim) if k not in (ix, iz)]
        if others and np.any(np.abs(s.coords[others]) > tol):
            return False
        return self._in_polygon(s.coords[ix], s.coords[iz], tol)

    def point(self, x: float, z: float) -> GptVector:
        coords = np.zeros(self.dim)
        coords[UNIT_INDEX] = 1.0
        coords[axis_index("x", self.dim)] = x
        coords[axis_index("z", self.dim)] = z
        return GptVector(coords, STATE)

    def boundary_points(self, count: int) -> np.ndarray:
        """``count`` points ``(x, z)`` spread along the boundary, counter-clockwise."""
        if self.shape == DISC:
            t = 2 * np.pi * np.arange(count) / count
            return np.column_stack((np.sin(t), np.cos(t)))
        v = self._hull
        nxt = np.roll(v, -1, axis=0)
        seg = np.hypot(*(nxt - v).T)
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        out = []
        for t in np.arange(count) * cum[-1] / count:
            k = min(np.searchsorted(cum, t, side="right") - 1, len(v) - 1)
            frac = (t - cum[k]) / seg[k]
            out.append(v[k] + frac * (nxt[k] - v[k]))
        return np.array(out)

    def functional_range(self, functional: np.ndarray) -> tuple[float, float]:
        """Min and max of ``functional @ s`` over states of the space."""
        f = np.asarray(functional, dtype=float)
        if f.size != self.dim:
            raise DimensionMismatch("functional dimension differs from the space")
        c = f[UNIT_INDEX]
        if self.shape == DISC:
            r = float(np.linalg.norm(f[1:]))
            return c - r, c + r
        ix, iz = axis_index("x", self.dim), axis_index("z", self.dim)
        vals = c + self._hull @ np.array([f[ix], f[iz]])
        return float(vals.min()), float(vals.max())

    def is_valid_effect(self, e: GptVector, tol: float = PROB_TOL) -> bool:
        lo, hi = self.functional_range(e.coords)
        return lo >= -tol and hi <= 1 + tol
