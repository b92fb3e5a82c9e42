"""Mach-Zehnder settings to dual-rail qubit states, noise and finite-shot sampling.

Conventions: the prepared state is ``sqrt(r)|R> + exp(i phi) sqrt(1-r)|L>`` with
``Z = |L><L| - |R><R|``, so ``<Z> = 1 - 2r`` and ``<X> = 2 sqrt(r(1-r)) cos(phi)``.
The measurement-stage beamsplitter is the Hadamard; outcome +1 of the
which-phase measurement is the left output port.

Counts are drawn with numpy's PCG64 bit generator. Cell ``k`` (row-major over
preparations x measurements) is seeded with ``seed ^ k``, so any cell can be
reproduced on its own and cells may be sampled in any order.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gpt
from .errors import KindMismatch, ValidationError
from .gpt import EFFECT, STATE, BinaryMeasurement, GptVector

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class PrepSettings:
    r: float
    phi: float = 0.0
    swap_after: bool = False

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0) or not math.isfinite(self.r):
            raise ValidationError(f"reflectivity must lie in [0, 1], got {self.r!r}")
        if not math.isfinite(self.phi):
            raise ValidationError("phase must be finite")
        object.__setattr__(self, "phi", self.phi % TWO_PI)


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing shrink ``p`` on states, bias ``eps`` towards the fair coin on effects."""

    p: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        for name in ("p", "eps"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"noise parameter {name} must lie in [0, 1], got {v!r}")


def prepare(settings: PrepSettings, dim: int = 4) -> GptVector:
    """GPT state produced by a beamsplitter of reflectivity r and phase shift phi.

    ``dim=3`` returns the x-z plane fragment and requires phi in {0, pi}.
    """
    r, phi = settings.r, settings.phi
    amp = 2 * math.sqrt(r * (1 - r))
    x, y, z = amp * math.cos(phi), amp * math.sin(phi), 1 - 2 * r
    if settings.swap_after:
        z = -z
    if dim == 4:
        return GptVector((1.0, x, y, z), STATE)
    if dim == 3:
        if abs(y) > 1e-12:
            raise ValidationError("phase takes the state out of the x-z plane")
        return GptVector((1.0, x, z), STATE)
    raise ValidationError(f"unsupported dimension {dim}")


def which_way(dim: int = 4) -> BinaryMeasurement:
    """Path detection: +1 for the photon found in the left arm."""
    return axis_measurement("z", dim, "Z")


def which_phase(dim: int = 4) -> BinaryMeasurement:
    """Recombination at a 50-50 beamsplitter: +1 for the left output port."""
    return axis_measurement("x", dim, "X")


def axis_measurement(axis: str, dim: int = 4, label: str | None = None) -> BinaryMeasurement:
    n = np.zeros(dim - 1)
    n[gpt.axis_index(axis, dim) - 1] = 1.0
    return gpt.direction_measurement(n, label or axis.upper())


def rotated_measurement(theta: float, dim: int = 4, label: str | None = None) -> BinaryMeasurement:
    """Sharp measurement along ``cos(theta) z + sin(theta) x`` in the x-z plane."""
    n = np.zeros(dim - 1)
    n[gpt.axis_index("z", dim) - 1] = math.cos(theta)
    n[gpt.axis_index("x", dim) - 1] = math.sin(theta)
    n /= np.linalg.norm(n)
    return gpt.direction_measurement(n, label or f"R{math.degrees(theta):g}")


def orbit_settings(r: float) -> list[PrepSettings]:
    return [PrepSettings(r, 0.0, False), PrepSettings(r, math.pi, False),
            PrepSettings(r, math.pi, True), PrepSettings(r, 0.0, True)]


def orbit_preparations(r: float, dim: int = 4):
    """The four preparations of the reflectivity-r orbit with (which_way, which_phase)."""
    from .orbit import OrbitQuadruple

    states = [prepare(s, dim) for s in orbit_settings(r)]
    return OrbitQuadruple(tuple(states), which_way(dim), which_phase(dim))


def apply_noise(target, noise: NoiseModel):
    """Depolarize a state, bias an effect, or bias both outcomes of a measurement."""
    if isinstance(target, BinaryMeasurement):
        return BinaryMeasurement(apply_noise(target.plus, noise),
                                 apply_noise(target.minus, noise), target.label)
    if not isinstance(target, GptVector):
        raise KindMismatch(f"cannot apply noise to {type(target).__name__}")
    c = np.array(target.coords)
    if target.kind == STATE:
        c[1:] *= 1 - noise.p
        return GptVector(c, STATE)
    unit = gpt.unit_effect(target.dim).coords
    return GptVector((1 - noise.eps) * c + noise.eps * unit / 2, EFFECT)


# ---------------------------------------------------------------------------
# finite statistics

CSV_HEADER = ("prep_id", "measurement", "outcome", "count", "shots")


@dataclass(frozen=True, eq=False)
class CountsTable:
    """Outcome counts; ``counts[i, j]`` holds (n(+1), n(-1)) for prep i, measurement j."""

    prep_ids: tuple[str, ...]
    measurements: tuple[str, ...]
    counts: np.ndarray
    shots: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        shots = np.asarray(self.shots)
        n_p, n_m = len(self.prep_ids), len(self.measurements)
        if n_p == 0 or n_m == 0:
            raise ValidationError("counts table is empty")
        if counts.shape != (n_p, n_m, 2) or shots.shape != (n_p, n_m):
            raise ValidationError("counts table shape does not match its labels")
        if len(set(self.prep_ids)) != n_p or len(set(self.measurements)) != n_m:
            raise ValidationError("duplicate preparation or measurement labels")
        if np.any(counts < 0) or np.any(shots < 1):
            raise ValidationError("counts must be nonnegative and shots positive")
        if not np.array_equal(counts.sum(axis=2), shots):
            raise ValidationError("outcome counts do not sum to the declared shots")
        counts = counts.astype(np.int64)
        shots = shots.astype(np.int64)
        counts.setflags(write=False)
        shots.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "shots", shots)
        object.__setattr__(self, "prep_ids", tuple(map(str, self.prep_ids)))
        object.__setattr__(self, "measurements", tuple(map(str, self.measurements)))

    def frequencies(self) -> np.ndarray:
        """Empirical probability of outcome +1, shape (preps, measurements)."""
        return self.counts[:, :, 0] / self.shots

    def rows(self):
        for i, pid in enumerate(self.prep_ids):
            for j, m in enumerate(self.measurements):
                for k, outcome in enumerate((1, -1)):
                    yield pid, m, outcome, int(self.counts[i, j, k]), int(self.shots[i, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows():
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CountsTable":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValidationError(f"expected CSV header {','.join(CSV_HEADER)}")
        prep_ids: list[str] = []
        meas: list[str] = []
        cells: dict = {}
        for line, row in enumerate(reader, start=2):
            try:
                pid, m = row["prep_id"], row["measurement"]
                outcome, count, shots = int(row["outcome"]), int(row["count"]), int(row["shots"])
            except (TypeError, ValueError):
                raise ValidationError(f"malformed counts row at line {line}") from None
            if outcome not in (1, -1):
                raise ValidationError(f"outcome must be +1 or -1 at line {line}")
            if pid not in prep_ids:
                prep_ids.append(pid)
            if m not in meas:
                meas.append(m)
            key = (pid, m, outcome)
            if key in cells:
                raise ValidationError(f"duplicate row at line {line}")
            cells[key] = (count, shots)
        counts = np.zeros((len(prep_ids), len(meas), 2), dtype=np.int64)
        shots_arr = np.zeros((len(prep_ids), len(meas)), dtype=np.int64)
        for i, pid in enumerate(prep_ids):
            for j, m in enumerate(meas):
                declared = set()
                for k, outcome in enumerate((1, -1)):
                    if (pid, m, outcome) not in cells:
                        raise ValidationError(f"missing cell {pid}/{m}/{outcome:+d}")
                    counts[i, j, k], s = cells[(pid, m, outcome)]
                    declared.add(s)
                if len(declared) != 1:
                    raise ValidationError(f"inconsistent shots for {pid}/{m}")
                shots_arr[i, j] = declared.pop()
        return cls(tuple(prep_ids), tuple(meas), counts, shots_arr)

    def to_json(self) -> dict:
        return {"prep_ids": list(self.prep_ids), "measurements": list(self.measurements),
                "counts": self.counts.tolist(), "shots": self.shots.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "CountsTable":
        return cls(tuple(data["prep_ids"]), tuple(data["measurements"]),
                   np.array(data["counts"]), np.array(data["shots"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def sample_counts(preps: Sequence[GptVector], measurements: Sequence[BinaryMeasurement],
                  shots: int, seed: int, prep_ids: Sequence[str] | None = None) -> CountsTable:
    """Binomial outcome counts for every (preparation, measurement) cell."""
    if shots < 1:
        raise ValidationError("shots must be at least 1")
    if prep_ids is None:
        prep_ids = [f"P{i + 1}" for i in range(len(preps))]
    n_p, n_m = len(preps), len(measurements)
    counts = np.zeros((n_p, n_m, 2), dtype=np.int64)
    for i, s in enumerate(preps):
        for j, m in enumerate(measurements):
            p = gpt.probability(s, m.plus)
            rng = np.random.Generator(np.random.PCG64(int(seed) ^ (i * n_m + j)))
            k = int(rng.binomial(shots, min(max(p, 0.0), 1.0)))
            counts[i, j] = (k, shots - k)
    return CountsTable(tuple(prep_ids), tuple(m.label for m in measurements), counts,
                       np.full((n_p, n_m), shots, dtype=np.int64))
