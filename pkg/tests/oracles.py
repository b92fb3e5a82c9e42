"""Independent reference computations used by the tests.

Nothing here imports the package: the qubit oracle works with 2x2 density
matrices and the LP oracle decides feasibility by brute-force vertex
enumeration over exact rationals.
"""
from fractions import Fraction
from itertools import combinations

import numpy as np

KET_L = np.array([1, 0], dtype=complex)
KET_R = np.array([0, 1], dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]])
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SWAP = PAULI_X


def interferometer_ket(r, phi, swap=False):
    """sqrt(r)|R> + e^{i phi} sqrt(1-r)|L>, optionally followed by a mode swap."""
    psi = np.sqrt(r) * KET_R + np.exp(1j * phi) * np.sqrt(1 - r) * KET_L
    return SWAP @ psi if swap else psi


def density(psi):
    return np.outer(psi, psi.conj())


def bloch(rho):
    return tuple(float(np.real(np.trace(rho @ P))) for P in (PAULI_X, PAULI_Y, PAULI_Z))


def depolarize(rho, p):
    return (1 - p) * rho + p * np.eye(2) / 2


def born(rho, projector):
    return float(np.real(np.trace(rho @ projector)))


def projector_plus(axis):
    P = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}[axis]
    return (np.eye(2) + P) / 2


def nc_feasible_by_vertices(a, b):
    """Exact feasibility of the four-preparation noncontextual system.

    The parametrization: mu_i over the four deterministic (M, M') responses,
    reproducing (a,b), (a,-b), (-a,-b), (-a,b), with mu_1 + mu_3 = mu_2 + mu_4.
    Solved as a linear system over Fractions by trying every basis of the
    equality constraints (tiny problem, so enumeration is cheap).
    """
    a, b = Fraction(a), Fraction(b)
    resp = [(1, 1), (1, -1), (-1, 1), (-1, -1)]  # (+-1 values of M, M')
    targets = [(a, b), (a, -b), (-a, -b), (-a, b)]
    n = 16
    rows, rhs = [], []
    for i in range(4):
        row = [0] * n
        for l in range(4):
            row[4 * i + l] = 1
        rows.append(row); rhs.append(Fraction(1))
        for k in range(2):
            row = [0] * n
            for l in range(4):
                row[4 * i + l] = resp[l][k]
            rows.append(row); rhs.append(targets[i][k])
    for l in range(4):
        row = [0] * n
        row[l], row[8 + l], row[4 + l], row[12 + l] = 1, 1, -1, -1
        rows.append(row); rhs.append(Fraction(0))
    A = [[Fraction(v) for v in row] for row in rows]
    rank_rows = _independent_rows(A)
    A = [A[i] for i in rank_rows]
    rhs = [rhs[i] for i in rank_rows]
    m = len(A)
    for cols in combinations(range(n), m):
        sub = [[A[i][j] for j in cols] for i in range(m)]
        sol = _solve(sub, rhs)
        if sol is not None and all(v >= 0 for v in sol):
            return True
    return False


def _independent_rows(A):
    basis, keep = [], []
    for i, row in enumerate(A):
        v = list(row)
        for piv, brow in basis:
            if v[piv] != 0:
                f = v[piv] / brow[piv]
                v = [x - f * y for x, y in zip(v, brow)]
        nz = next((j for j, x in enumerate(v) if x != 0), None)
        if nz is not None:
            basis.append((nz, v))
            keep.append(i)
    return keep


def _solve(M, y):
    n = len(M)
    aug = [list(r) + [v] for r, v in zip(M, y)]
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if piv is None:
            return None
        aug[c], aug[piv] = aug[piv], aug[c]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c] / aug[c][c]
                aug[r] = [x - f * z for x, z in zip(aug[r], aug[c])]
    return [aug[i][n] / aug[i][i] for i in range(n)]
