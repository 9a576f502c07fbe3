"""Small exact integer linear algebra: echelon forms with unimodular transforms.

Matrices are lists of lists of Python ints.  Sizes here are tiny (n <= a
few dozen), so clarity wins over asymptotics.
"""
from __future__ import annotations

from gmpy2 import gcdext


def identity(n: int):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(A, ncols=None):
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A, B):
    if not A:
        return []
    inner = len(B)
    ncols = len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(ncols)] for i in range(len(A))]


def determinant(A) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
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
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def echelon(A, nrows=None, ncols=None):
    """Row-style Hermite normal form with transform.

    Returns ``(H, U, rank)`` with ``U`` unimodular and ``U A = H``; the first
    ``rank`` rows of ``H`` are in Hermite form (positive pivots, entries above
    each pivot reduced into ``[0, pivot)``) and the remaining rows are zero.
    """
    m = len(A) if nrows is None else nrows
    c = (len(A[0]) if A else 0) if ncols is None else ncols
    H = [list(map(int, row)) for row in A]
    U = identity(m)
    r = 0
    pivots = []
    for col in range(c):
        if r >= m:
            break
        for i in range(r + 1, m):
            b = H[i][col]
            if b == 0:
                continue
            a = H[r][col]
            g, s, t = (int(v) for v in gcdext(a, b))
            ag, bg = a // g, b // g
            for M in (H, U):
                Rr, Ri = M[r], M[i]
                M[r] = [s * p + t * q for p, q in zip(Rr, Ri)]
                M[i] = [-bg * p + ag * q for p, q in zip(Rr, Ri)]
        if H[r][col] != 0:
            if H[r][col] < 0:
                H[r] = [-v for v in H[r]]
                U[r] = [-v for v in U[r]]
            piv = H[r][col]
            for i in range(r):
                q = H[i][col] // piv
                if q:
                    H[i] = [p - q * v for p, v in zip(H[i], H[r])]
                    U[i] = [p - q * v for p, v in zip(U[i], U[r])]
            pivots.append(col)
            r += 1
    return H, U, r


def hermite_rows(B):
    """Hermite normal form (nonzero rows only) of the lattice spanned by rows of ``B``."""
    if not B:
        return []
    H, _, r = echelon(B)
    return [row for row in H[:r]]


def pivot_columns(H):
    cols = []
    for row in H:
        for j, v in enumerate(row):
            if v:
                cols.append(j)
                break
    return cols


def left_kernel(A, nrows):
    """Basis of ``{k in Z^nrows : k A = 0}`` (saturated by construction)."""
    if not A or not A[0]:
        return identity(nrows)
    _, U, r = echelon(A)
    return [U[i] for i in range(r, nrows)]


def unit_upper_inverse(T):
    """Inverse of an upper-triangular integer matrix with unit diagonal."""
    n = len(T)
    inv = identity(n)
    for col in range(n):
        for i in range(col - 1, -1, -1):
            inv[i][col] = -sum(T[i][k] * inv[k][col] for k in range(i + 1, col + 1))
    return inv
