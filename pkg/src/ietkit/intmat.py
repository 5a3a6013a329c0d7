"""Exact linear algebra over the integers / rationals.

Matrices are tuples of tuples of Python ints (or Fractions where noted),
row-major.  Everything here is exact: rank parity and kernel dimensions
are load-bearing elsewhere, so no floating point is allowed in this
module.
"""

from __future__ import annotations

import math
from fractions import Fraction


def identity(d: int):
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def elementary(d: int, a: int, b: int):
    """Identity plus a single unit in row ``a``, column ``b``."""
    return tuple(
        tuple((1 if i == j else 0) + (1 if (i == a and j == b) else 0) for j in range(d))
        for i in range(d)
    )


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    assert len(A[0]) == k
    Bt = tuple(zip(*B))
    return tuple(
        tuple(sum(ra[i] * cb[i] for i in range(k)) for cb in Bt) for ra in A
    )


def mat_vec(A, v):
    return tuple(sum(r[i] * v[i] for i in range(len(v))) for r in A)


def transpose(A):
    return tuple(zip(*A))


def mat_sub(A, B):
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_eq(A, B) -> bool:
    return all(tuple(ra) == tuple(rb) for ra, rb in zip(A, B))


def mat_pow(A, k: int):
    d = len(A)
    R = identity(d)
    P = A
    while k:
        if k & 1:
            R = mat_mul(R, P)
        k >>= 1
        if k:
            P = mat_mul(P, P)
    return R


def entry_sum(A) -> int:
    """Sum of all entries; our norm of choice for nonnegative cocycle
    matrices (dominates every induced operator norm, and makes the
    per-step length-balance inequality an exact theorem)."""
    return sum(sum(r) for r in A)


def is_positive(A) -> bool:
    return all(x > 0 for r in A for x in r)


def is_nonnegative(A) -> bool:
    return all(x >= 0 for r in A for x in r)


def log_norm(A) -> float:
    """Natural log of entry_sum, safe for huge integer entries."""
    s = entry_sum(A)
    if s <= 0:
        raise ValueError("log_norm needs a nonzero nonnegative matrix")
    return log_int(s)


def log_int(n) -> float:
    """log of a (possibly huge) positive int without float overflow."""
    if n <= 0:
        raise ValueError("positive argument required")
    return math.log(n)


def det_bareiss(A) -> int:
    """Fraction-free determinant (Bareiss) of an integer matrix."""
    n = len(A)
    M = [list(r) for r in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[-1][-1]


def _echelon(rows):
    """Row-reduce a list of Fraction rows in place; returns pivot columns."""
    if not rows:
        return []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank(A) -> int:
    rows = [[Fraction(x) for x in r] for r in A]
    return len(_echelon(rows))


def kernel_basis(A):
    """Basis of the right kernel of an integer/rational matrix.

    Returns primitive integer vectors (tuples), deterministic order:
    one vector per free column of the reduced echelon form.
    """
    if not A:
        return []
    ncols = len(A[0])
    rows = [[Fraction(x) for x in r] for r in A]
    pivots = _echelon(rows)
    rows = rows[: len(pivots)]
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r_idx, pc in enumerate(pivots):
            v[pc] = -rows[r_idx][fc]
        den = math.lcm(*(x.denominator for x in v))
        w = [int(x * den) for x in v]
        g = math.gcd(*(abs(x) for x in w if x != 0))
        basis.append(tuple(x // g for x in w))
    return basis


def column_space_basis(A):
    """Primitive integer basis of the column space (deterministic)."""
    rows = [[Fraction(x) for x in r] for r in transpose(A)]
    pivots = _echelon(rows)
    basis = []
    for r in rows[: len(pivots)]:
        den = math.lcm(*(x.denominator for x in r))
        w = [int(x * den) for x in r]
        g = math.gcd(*(abs(x) for x in w if x != 0))
        basis.append(tuple(x // g for x in w))
    return basis


def solve_exact(A, b):
    """Solve A x = b exactly (A square invertible), Fractions out."""
    n = len(A)
    rows = [[Fraction(x) for x in r] + [Fraction(b[i])] for i, r in enumerate(A)]
    pivots = _echelon(rows)
    if len(pivots) != n or any(p >= n for p in pivots):
        raise ValueError("singular system")
    x = [Fraction(0)] * n
    for r_idx, pc in enumerate(pivots):
        x[pc] = rows[r_idx][n]
    return tuple(x)


def invert_exact(A):
    """Exact inverse of a square integer/rational matrix, Fraction entries."""
    n = len(A)
    cols = [solve_exact(A, tuple(1 if i == j else 0 for i in range(n))) for j in range(n)]
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def same_subspace(B1, B2) -> bool:
    """Do two lists of rational row vectors span the same subspace?"""
    if len(B1) != len(B2):
        return False
    joint = [[Fraction(x) for x in v] for v in list(B1) + list(B2)]
    return rank(B1) == len(_echelon(joint))
