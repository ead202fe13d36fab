"""Exact rational linear algebra: rank, kernel, sparse solve, and LDL^T.

Everything here uses ``fractions.Fraction`` end to end; this is the layer
certificate verification stands on, so no floating point is allowed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import RepairSingular

ZERO = Fraction(0)


def rational_rank(rows: list[list[Fraction]]) -> int:
    """Rank by Gaussian elimination, exact."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = 1 / m[row][col]
        m[row] = [v * inv for v in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        rank += 1
        row += 1
        if row == len(m):
            break
    return rank


def rational_kernel(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of the right kernel (solutions of M x = 0)."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots: dict[int, int] = {}
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = 1 / m[row][col]
        m[row] = [v * inv for v in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        pivots[col] = row
        row += 1
        if row == len(m):
            break
    basis = []
    free_cols = [c for c in range(ncols) if c not in pivots]
    for free in free_cols:
        v = [ZERO] * ncols
        v[free] = Fraction(1)
        for col, r in pivots.items():
            v[col] = -m[r][free]
        basis.append(v)
    return basis


def solve_min_norm(rows: list[dict[int, Fraction]],
                   rhs: list[Fraction]) -> dict[int, Fraction]:
    """Minimum-Frobenius-norm solution of a consistent sparse system.

    Dependent rows are dropped after an exact consistency check; the
    normal equations of the remaining independent rows are solved with
    rational arithmetic, so the correction spreads over every variable a
    constraint touches instead of concentrating on one pivot.  Raises
    RepairSingular on inconsistency.
    """
    work = [dict(r) for r in rows]
    b = list(rhs)
    independent: list[int] = []
    pivot_col: list[int] = []
    for i in range(len(work)):
        row = work[i]
        if not row:
            if b[i] != 0:
                raise RepairSingular(
                    f"constraint {i} became inconsistent during repair")
            continue
        col = min(row)
        independent.append(i)
        pivot_col.append(col)
        inv = 1 / row[col]
        for j in range(i + 1, len(work)):
            other = work[j]
            coeff = other.get(col)
            if coeff is None:
                continue
            factor = coeff * inv
            for c, v in row.items():
                nv = other.get(c, ZERO) - factor * v
                if nv:
                    other[c] = nv
                else:
                    other.pop(c, None)
            b[j] -= factor * b[i]
    if not independent:
        return {}
    base = [rows[i] for i in independent]
    target = [rhs[i] for i in independent]
    r = len(base)
    gram = [[ZERO] * r for _ in range(r)]
    for i in range(r):
        for j in range(i, r):
            acc = ZERO
            small, large = (base[i], base[j]) if len(base[i]) <= len(base[j]) \
                else (base[j], base[i])
            for c, v in small.items():
                w = large.get(c)
                if w is not None:
                    acc += v * w
            gram[i][j] = acc
            gram[j][i] = acc
    lam = _solve_dense(gram, target)
    correction: dict[int, Fraction] = {}
    for i in range(r):
        if lam[i] == 0:
            continue
        for c, v in base[i].items():
            nv = correction.get(c, ZERO) + lam[i] * v
            if nv:
                correction[c] = nv
            else:
                correction.pop(c, None)
    return correction


def _solve_dense(m: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(m)
    aug = [list(row) + [b[i]] for i, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise RepairSingular("normal equations are singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


@dataclass
class LDLResult:
    """Exact semidefinite LDL^T outcome.

    ``ok`` means every pivot was >= 0 and every zero pivot had a zero
    remaining row; ``failure_index`` names the first bad pivot otherwise.
    """

    ok: bool
    lower: list[list[Fraction]]
    pivots: list[Fraction]
    failure_index: int = -1


def ldl_decompose(q: list[list[Fraction]]) -> LDLResult:
    """LDL^T of a symmetric rational matrix, accepting semidefiniteness."""
    n = len(q)
    m = [list(map(Fraction, row)) for row in q]
    lower = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    pivots = [ZERO] * n
    for k in range(n):
        piv = m[k][k]
        if piv < 0:
            return LDLResult(False, lower, pivots, k)
        if piv == 0:
            if any(m[k][j] != 0 for j in range(k + 1, n)):
                return LDLResult(False, lower, pivots, k)
            continue
        pivots[k] = piv
        for i in range(k + 1, n):
            lower[i][k] = m[i][k] / piv
        for i in range(k + 1, n):
            if m[i][k] == 0:
                continue
            f = m[i][k] / piv
            for j in range(k + 1, n):
                if m[k][j] != 0:
                    m[i][j] -= f * m[k][j]
        for i in range(k + 1, n):
            m[i][k] = ZERO
            m[k][i] = ZERO
    return LDLResult(True, lower, pivots)


def ldl_reconstruct(res: LDLResult) -> list[list[Fraction]]:
    """L D L^T, for checking the factorization."""
    n = len(res.pivots)
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = sum(
                (res.lower[i][k] * res.pivots[k] * res.lower[j][k]
                 for k in range(n)), ZERO)
    return out
