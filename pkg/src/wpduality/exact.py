"""Exact feasibility of ``A x = b, x >= 0`` over the rationals.

Phase-I simplex on a dense Fraction tableau with Bland's rule, so it cannot
cycle. Floats are converted with ``Fraction(float)``, which is exact. When the
system is infeasible the optimal phase-I multipliers give a Farkas vector
``y`` with ``A.T y >= 0`` and ``b . y < 0``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def _frac_matrix(A) -> list[list[Fraction]]:
    return [[Fraction(float(v)) if not isinstance(v, Fraction) else v for v in row] for row in A]


def feasibility(A: Sequence[Sequence], b: Sequence):
    """Return ``(True, x)`` with a feasible point, or ``(False, y)`` with a Farkas vector."""
    A = _frac_matrix(A)
    b = [Fraction(float(v)) if not isinstance(v, Fraction) else v for v in b]
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return True, [Fraction(0)] * n
    sign = [1 if bi >= 0 else -1 for bi in b]
    # tableau rows: [A_i * sign | I | b_i * sign]
    T = []
    for i in range(m):
        row = [sign[i] * a for a in A[i]]
        row += [Fraction(1 if k == i else 0) for k in range(m)]
        row.append(sign[i] * b[i])
        T.append(row)
    basis = list(range(n, n + m))
    width = n + m
    # phase-I cost: sum of artificials; reduced-cost row z_j = c_j - c_B B^-1 A_j
    cost = [Fraction(0)] * n + [Fraction(1)] * m

    def reduced(j):
        return cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m))

    while True:
        entering = next((j for j in range(width) if reduced(j) < 0), None)
        if entering is None:
            break
        ratios = [(T[i][-1] / T[i][entering], basis[i], i)
                  for i in range(m) if T[i][entering] > 0]
        _, _, leave = min(ratios)
        piv = T[leave][entering]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][entering] != 0:
                f = T[i][entering]
                T[i] = [vi - f * vl for vi, vl in zip(T[i], T[leave])]
        basis[leave] = entering

    value = sum(cost[basis[i]] * T[i][-1] for i in range(m))
    if value == 0:
        x = [Fraction(0)] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = T[i][-1]
        return True, x
    # multipliers pi_i = c_B B^-1 e_i, read from the artificial columns
    pi = [sum(cost[basis[r]] * T[r][n + i] for r in range(m)) for i in range(m)]
    # undo the row sign flips; y = -pi satisfies A^T y >= 0 and b.y = -value < 0
    y = [-sign[i] * pi[i] for i in range(m)]
    return False, y
