"""Secondary quadruples: exact orbits inside the convex hull of realized states."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import gpt
from .duality import DualityPoint, nc_bound_satisfied, quantum_bound_satisfied
from .errors import InfeasibleOrbit, SolverFailure, ValidationError
from .gpt import BinaryMeasurement, GptVector
from .ontic import FeasibilityResult, nc_model_feasibility
from .orbit import OrbitQuadruple, OrbitReport, check_orbit

ORBIT_TOL = 1e-9
SECTORS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True, eq=False)
class SecondaryQuadruple:
    weights: np.ndarray  # 4 x n, row-stochastic
    quadruple: OrbitQuadruple
    witness: float
    sector: tuple[int, int]
    report: OrbitReport

    @property
    def margin(self) -> float:
        return 1.0 - self.witness


def _solve_sector(u, up, S, sector, tol):
    n, d = S.shape
    sm, smp = sector
    nv = 4 * n

    def var(k):
        row = np.zeros(nv)
        row[k * n:(k + 1) * n] = 1.0
        return row

    def lin(k, vals):
        row = np.zeros(nv)
        row[k * n:(k + 1) * n] = vals
        return row

    A, b = [], []
    for k in range(4):
        A.append(var(k)); b.append(1.0)
    # <M>: t1 = t2 = -t3 = -t4 ; <M'>: t1 = -t2 = -t3 = t4
    A += [lin(0, u) - lin(1, u), lin(0, u) + lin(2, u), lin(0, u) + lin(3, u),
          lin(0, up) + lin(1, up), lin(0, up) + lin(2, up), lin(0, up) - lin(3, up)]
    b += [0.0] * 6
    for c in range(1, d):
        col = S[:, c]
        A.append(lin(0, col) + lin(2, col) - lin(1, col) - lin(3, col)); b.append(0.0)
    A_ub = np.stack([-sm * lin(0, u), -smp * lin(0, up)])
    cost = -(sm * lin(0, u) + smp * lin(0, up))
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(2), A_eq=np.stack(A), b_eq=np.array(b),
                  bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": tol, "dual_feasibility_tolerance": tol})
    if res.status == 2:
        return None
    if res.status != 0:
        raise SolverFailure(f"secondary LP failed: {res.message}")
    Wm = np.clip(res.x.reshape(4, n), 0.0, None)
    Wm /= Wm.sum(axis=1, keepdims=True)
    return Wm, -float(res.fun)


def find_secondary_quadruple(realized: Sequence[GptVector], M: BinaryMeasurement,
                             M_prime: BinaryMeasurement, tol: float = 1e-10) -> SecondaryQuadruple:
    """Maximize ``|<M>| + |<M'>|`` over exact orbits in the hull of ``realized``.

    The sign sector of the first secondary state is fixed per LP; all four are
    tried, starting with the sector of ``realized[0]``, and the first best one
    is kept.
    """
    if not realized:
        raise ValidationError("need at least one realized state")
    S = np.stack([s.coords for s in realized])
    if S.shape[1] != M.dim or M.dim != M_prime.dim:
        raise ValidationError("states and measurements differ in dimension")
    u = np.array([gpt.expectation(s, M) for s in realized])
    up = np.array([gpt.expectation(s, M_prime) for s in realized])
    first = (1 if u[0] >= 0 else -1, 1 if up[0] >= 0 else -1)
    order = [first] + [s for s in SECTORS if s != first]
    best = None
    for sector in order:
        out = _solve_sector(u, up, S, sector, tol)
        if out is not None and (best is None or out[1] > best[1] + 1e-12):
            best = (out[0], out[1], sector)
    if best is None:
        raise InfeasibleOrbit("the realized hull contains no exact orbit")
    Wm, _, sector = best
    states = tuple(gpt.mix(realized, row) for row in Wm)
    q = OrbitQuadruple(states, M, M_prime)
    report = check_orbit(q, ORBIT_TOL)
    if not report.passed:
        raise SolverFailure(f"secondary quadruple misses the orbit conditions: "
                            f"{report.symmetry_residual:.3g}, {report.equivalence_residual:.3g}")
    ev = q.expectations()
    witness = float(abs(ev[0, 0]) + abs(ev[0, 1]))
    return SecondaryQuadruple(Wm, q, witness, sector, report)


@dataclass(frozen=True, eq=False)
class WitnessReport:
    point: DualityPoint
    nc_margin: float
    quantum_margin: float
    orbit: OrbitReport
    feasibility: FeasibilityResult
    weights: np.ndarray | None = None

    @property
    def witness(self) -> float:
        return self.point.witness

    @property
    def violation(self) -> bool:
        return self.nc_margin < -1e-12

    def verdict(self) -> str:
        if self.violation:
            return "violates noncontextual bound"
        if abs(self.nc_margin) <= 1e-9:
            return "bound saturated, no violation"
        return "no violation"

    def to_json(self) -> dict:
        out = {"V": self.point.visibility, "P": self.point.distinguishability,
               "V_plus_P": self.witness, "nc_margin": self.nc_margin,
               "quantum_margin": self.quantum_margin, "verdict": self.verdict(),
               "orbit": self.orbit.to_json(), "nc_model": self.feasibility.to_json()}
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def summary(self) -> str:
        rows = [("V (fringe visibility)", f"{self.point.visibility:.6f}"),
                ("P (path distinguishability)", f"{self.point.distinguishability:.6f}"),
                ("V + P", f"{self.witness:.6f}"),
                ("noncontextual margin 1-(V+P)", f"{self.nc_margin:+.6f}"),
                ("quantum margin 1-(V^2+P^2)", f"{self.quantum_margin:+.6f}"),
                ("orbit residuals (sym, equiv)",
                 f"{self.orbit.symmetry_residual:.2e}, {self.orbit.equivalence_residual:.2e}"),
                ("noncontextual model", self.feasibility.status),
                ("verdict", self.verdict())]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def quadruple_report(q: OrbitQuadruple, weights=None, orbit_tol: float = ORBIT_TOL) -> WitnessReport:
    """Duality point of the orbit (M = which-way gives P, M' = which-phase gives V) and LP verdict."""
    orbit = check_orbit(q, orbit_tol)
    ev = q.expectations()
    pt = DualityPoint(min(abs(ev[0, 1]), 1.0), min(abs(ev[0, 0]), 1.0))
    _, nc_margin = nc_bound_satisfied(pt)
    _, q_margin = quantum_bound_satisfied(pt)
    feas = nc_model_feasibility(q, orbit_tol=orbit_tol)
    return WitnessReport(pt, nc_margin, q_margin, orbit, feas, weights)


def witness_report(sq: SecondaryQuadruple) -> WitnessReport:
    return quadruple_report(sq.quadruple, sq.weights)
