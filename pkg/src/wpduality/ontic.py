"""Noncontextual ontological models for an orbit quadruple, decided by LP feasibility.

The ontic space defaults to the four deterministic value assignments to
(M, M'). Any response function of a binary measurement is a mixture of the
deterministic ones, and that mixing can be pushed into the preparation
distributions, so nothing is lost; ``responses`` lets callers check this
by supplying a larger ontic space with indeterministic responses.

Unknowns are ``mu[i, lam] >= 0`` for the four preparations. Constraints:

* each ``mu[i]`` is normalized;
* ``sum_lam (2 xi(+|M, lam) - 1) mu[i, lam] = <M>_i`` and the same for M';
* preparation noncontextuality for ``s1/2 + s3/2 == s2/2 + s4/2``:
  ``mu[0] + mu[2] == mu[1] + mu[3]`` componentwise.

Infeasibility comes with a Farkas vector ``y`` (``A.T y >= 0``, ``b.y < 0``)
that is re-verified in exact rational arithmetic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import exact, gpt
from .errors import OrbitInvalid, SolverFailure, ValidationError
from .interferometer import NoiseModel, apply_noise, orbit_preparations
from .orbit import OrbitQuadruple, check_orbit

DETERMINISTIC = ((1.0, 1.0), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0))
LP_TOL = 1e-9
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"


def _lam_label(resp) -> str:
    def sym(v):
        return {1.0: "+", 0.0: "-"}.get(float(v), f"{float(v):g}")
    return f"({sym(resp[0])},{sym(resp[1])})"


@dataclass(frozen=True, eq=False)
class OnticModel:
    """``mu``: preparations x ontic states; ``xi``: effects x ontic states.

    Effect rows are ordered ``M(+1), M(-1), M'(+1), M'(-1)``.
    """

    labels: tuple[str, ...]
    mu: np.ndarray
    xi: np.ndarray

    def to_json(self) -> dict:
        return {"ontic_states": list(self.labels), "mu": self.mu.tolist(), "xi": self.xi.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "OnticModel":
        return cls(tuple(data["ontic_states"]), np.array(data["mu"], dtype=float),
                   np.array(data["xi"], dtype=float))


@dataclass(frozen=True, eq=False)
class FarkasCertificate:
    """Multipliers ``y`` over the equality rows of ``A x = b``.

    For every ``x`` with entries in [0, 1] (implied by normalization),
    ``y.b = (A.T y).x >= sum(min(0, A.T y))``; ``gap < 0`` contradicts this.
    """

    y: np.ndarray
    A: np.ndarray
    b: np.ndarray
    row_labels: tuple[str, ...]
    y_exact: tuple[Fraction, ...] | None = None

    def exact_gap(self) -> Fraction:
        y = list(self.y_exact) if self.y_exact is not None else [Fraction(float(v)) for v in self.y]
        c = [sum((Fraction(float(a)) * yi for a, yi in zip(col, y)), Fraction(0))
             for col in self.A.T]
        by = sum((Fraction(float(bi)) * yi for bi, yi in zip(self.b, y)), Fraction(0))
        return by - sum((min(Fraction(0), ck) for ck in c), Fraction(0))

    @property
    def gap(self) -> float:
        return float(self.exact_gap())

    def verify(self) -> bool:
        return self.exact_gap() < 0

    def describe(self) -> str:
        return (f"sum_k y_k*(A x - b)_k = 0 forces {float(self.y @ self.b):.6g} >= "
                f"{float(np.minimum(self.A.T @ self.y, 0).sum()):.6g} for any x in [0,1]^n; "
                f"violated by {-self.gap:.6g}")

    def to_json(self) -> dict:
        return {"y": [float(v) for v in self.y], "rows": list(self.row_labels),
                "gap": self.gap, "verified": self.verify(), "description": self.describe()}


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    status: str
    tol: float
    margin: float
    expectations: tuple[float, float]
    model: OnticModel | None = None
    certificate: FarkasCertificate | None = None
    exact_checked: bool = False

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def to_json(self) -> dict:
        out = {"status": self.status, "tol": self.tol, "margin": self.margin,
               "predictabilities": [abs(self.expectations[0]), abs(self.expectations[1])],
               "exact_checked": self.exact_checked}
        if self.model is not None:
            out["model"] = self.model.to_json()
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class _System:
    A: np.ndarray
    b: np.ndarray
    rows: tuple[str, ...]
    responses: np.ndarray
    labels: tuple[str, ...] = field(default=())


def orbit_values(q: OrbitQuadruple) -> tuple[float, float]:
    """``(a, b)`` with ``s1`` at ``(a, b)``: the exact orbit closest to the data."""
    ev = q.expectations()
    a = (ev[0, 0] + ev[1, 0] - ev[2, 0] - ev[3, 0]) / 4
    b = (ev[0, 1] - ev[1, 1] - ev[2, 1] + ev[3, 1]) / 4
    return float(a), float(b)


def _system(a: float, b: float, responses) -> _System:
    resp = np.asarray(responses, dtype=float)
    if resp.ndim != 2 or resp.shape[1] != 2 or np.any(resp < 0) or np.any(resp > 1):
        raise ValidationError("responses must be pairs of probabilities")
    L = len(resp)
    n = 4 * L
    rows, A, rhs = [], [], []
    targets = [(a, b), (a, -b), (-a, -b), (-a, b)]
    for i in range(4):
        row = np.zeros(n)
        row[i * L:(i + 1) * L] = 1.0
        A.append(row); rhs.append(1.0); rows.append(f"norm[{i + 1}]")
    for k, name in enumerate(("M", "M'")):
        for i in range(4):
            row = np.zeros(n)
            row[i * L:(i + 1) * L] = 2 * resp[:, k] - 1
            A.append(row); rhs.append(targets[i][k]); rows.append(f"<{name}>[{i + 1}]")
    for lam in range(L):
        row = np.zeros(n)
        row[[lam, 2 * L + lam]] = 1.0
        row[[L + lam, 3 * L + lam]] = -1.0
        A.append(row); rhs.append(0.0); rows.append(f"nc[{lam}]")
    return _System(np.array(A), np.array(rhs), tuple(rows), resp,
                   tuple(_lam_label(r) for r in resp))


def _float_solve(sys_: _System, tol: float):
    res = linprog(np.zeros(sys_.A.shape[1]), A_eq=sys_.A, b_eq=sys_.b, bounds=(0, None),
                  method="highs", options={"primal_feasibility_tolerance": tol,
                                           "dual_feasibility_tolerance": tol})
    if res.status == 0:
        return True, res.x
    if res.status == 2:
        return False, None
    raise SolverFailure(f"LP solver failed: {res.message}")


def _exact_solve(sys_: _System):
    """Feasibility of the same system over the rationals (float data taken as exact)."""
    ok, v = exact.feasibility(sys_.A, sys_.b)
    return ok, (np.array([float(t) for t in v]) if ok else v)


def _farkas(sys_: _System) -> FarkasCertificate:
    m = sys_.A.shape[0]
    res = linprog(sys_.b, A_ub=-sys_.A.T, b_ub=np.zeros(sys_.A.shape[1]),
                  bounds=[(-1, 1)] * m, method="highs")
    if res.status != 0:
        raise SolverFailure(f"certificate LP failed: {res.message}")
    return FarkasCertificate(res.x, sys_.A, sys_.b, sys_.rows)


def _exact_farkas(sys_: _System) -> FarkasCertificate:
    ok, y = exact.feasibility(sys_.A, sys_.b)
    if ok:
        raise SolverFailure("system is feasible over the rationals; no certificate exists")
    return FarkasCertificate(np.array([float(t) for t in y]), sys_.A, sys_.b, sys_.rows,
                             y_exact=tuple(y))


def _model(sys_: _System, x: np.ndarray) -> OnticModel:
    L = len(sys_.responses)
    mu = np.clip(x.reshape(4, L), 0.0, None)
    mu /= mu.sum(axis=1, keepdims=True)
    r = sys_.responses
    xi = np.stack([r[:, 0], 1 - r[:, 0], r[:, 1], 1 - r[:, 1]])
    return OnticModel(sys_.labels, mu, xi)


def nc_model_feasibility(q: OrbitQuadruple, tol: float = LP_TOL,
                         responses: Sequence[Sequence[float]] = DETERMINISTIC,
                         orbit_tol: float = 1e-9) -> FeasibilityResult:
    """Decide whether ``q`` admits a preparation-noncontextual ontological model.

    The LP is posed on the orbit values returned by :func:`orbit_values`.
    Verdicts with ``|margin| < 10 * tol`` are re-decided over the rationals.
    """
    report = check_orbit(q, orbit_tol)
    if not report.passed:
        raise OrbitInvalid(f"not an orbit: symmetry residual {report.symmetry_residual:.3g}, "
                           f"equivalence residual {report.equivalence_residual:.3g}")
    q = q.relabeled(report.assignment)
    a, b = orbit_values(q)
    margin = 1.0 - (abs(a) + abs(b))
    sys_ = _system(a, b, responses)
    feasible, x = _float_solve(sys_, tol)
    exact = abs(margin) < 10 * tol
    if exact:
        feasible, x = _exact_solve(sys_)
    if feasible:
        model = _model(sys_, x)
        if not verify_model(model, q, max(tol * 10, 1e-8)):
            raise SolverFailure("LP returned a model that fails verification")
        return FeasibilityResult(FEASIBLE, tol, margin, (a, b), model=model, exact_checked=exact)
    cert = _farkas(sys_)
    if not cert.verify():
        cert = _exact_farkas(sys_)
        exact = True
    if not cert.verify():
        raise SolverFailure("could not certify infeasibility")
    return FeasibilityResult(INFEASIBLE, tol, margin, (a, b), certificate=cert, exact_checked=exact)


def verify_model(model: OnticModel, q: OrbitQuadruple, tol: float = 1e-8) -> bool:
    """Independent check of normalization, response validity, reproduction and noncontextuality."""
    mu, xi = np.asarray(model.mu, float), np.asarray(model.xi, float)
    if mu.shape[0] != 4 or xi.shape != (4, mu.shape[1]):
        return False
    if np.any(mu < -tol) or np.any(np.abs(mu.sum(axis=1) - 1) > tol):
        return False
    if np.any(xi < -tol) or np.any(xi > 1 + tol):
        return False
    if np.any(np.abs(xi[0] + xi[1] - 1) > tol) or np.any(np.abs(xi[2] + xi[3] - 1) > tol):
        return False
    effects = (q.M.plus, q.M.minus, q.M_prime.plus, q.M_prime.minus)
    ops = np.array([[gpt.probability(s, e) for e in effects] for s in q.states])
    if np.any(np.abs(mu @ xi.T - ops) > tol):
        return False
    return bool(np.all(np.abs(mu[0] + mu[2] - mu[1] - mu[3]) <= tol))


@dataclass(frozen=True)
class BoundaryScan:
    parameter: str
    entries: tuple[tuple[float, str], ...]

    @property
    def transitions(self) -> list[tuple[float, float]]:
        """Brackets ``(left, right)`` of consecutive grid values whose verdicts differ."""
        e = self.entries
        return [(e[k][0], e[k + 1][0]) for k in range(len(e) - 1) if e[k][1] != e[k + 1][1]]

    @property
    def transition_point(self) -> float | None:
        t = self.transitions
        return None if not t else 0.5 * (t[0][0] + t[0][1])

    def to_json(self) -> dict:
        return {"parameter": self.parameter,
                "entries": [{"value": v, "status": s} for v, s in self.entries],
                "transitions": [list(t) for t in self.transitions],
                "transition_point": self.transition_point}


def noisy_orbit(r: float, p: float) -> OrbitQuadruple:
    q = orbit_preparations(r)
    noise = NoiseModel(p=p)
    return OrbitQuadruple(tuple(apply_noise(s, noise) for s in q.states), q.M, q.M_prime)


def feasibility_boundary(values: Sequence[float], parameter: str = "p", r: float = 0.75,
                         p: float = 0.0, tol: float = LP_TOL) -> BoundaryScan:
    """Sweep the depolarizing strength (``parameter='p'``) or reflectivity (``'r'``)."""
    values = [float(v) for v in values]
    if len(values) < 2:
        raise ValidationError("grid needs at least two values")
    if parameter not in ("p", "r"):
        raise ValidationError("parameter must be 'p' or 'r'")
    entries = []
    for v in values:
        q = noisy_orbit(r, v) if parameter == "p" else noisy_orbit(v, p)
        entries.append((v, nc_model_feasibility(q, tol).status))
    return BoundaryScan(parameter, tuple(entries))
