"""Resonance lattice, dual bases and torus generators.

Frequencies are declared structurally: ``gamma_j = sum_l C[j][l] * omega_l``
with Gaussian-rational coordinates ``C`` over a basis ``omega`` that is
assumed linearly independent over Q.  Resonance of an integer vector ``k``
means ``k^T C = 0`` exactly; numeric values of the basis are only used to
evaluate eigenvalues, never to decide resonance.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Sequence

from gmpy2 import mpq

from . import intlattice as il
from .coeffs import GaussQ
from .errors import DimensionMismatch, ExactModeUnavailable, LatticeError, ValidationError
from .series import TruncatedSeries


@dataclass(frozen=True)
class Eigenvalue:
    """Eigenvalue of ``ad_{H_ss}`` on a monomial.

    ``coords`` are exact coordinates over the frequency basis; ``value`` is
    the exact scalar when the basis has exact values, ``numeric`` the float
    value when numeric basis values are known.
    """

    coords: tuple
    value: GaussQ | None
    numeric: complex | None

    def is_zero(self) -> bool:
        return not any(self.coords)


class FrequencyModel:
    """Frequencies as exact coordinates over a declared independent basis.

    Parameters
    ----------
    coords : n x d nested sequence of Gaussian rationals
    numeric : optional d complex values of the basis elements
    basis_values : optional d exact values of the basis elements; only
        allowed for ``d == 1`` (rational values of two or more basis
        elements would contradict their independence).  A one-dimensional
        basis with neither ``numeric`` nor ``basis_values`` defaults to
        ``omega_1 = 1``.
    """

    __slots__ = ("coords", "numeric", "basis_values", "n", "d")

    def __init__(self, coords, numeric=None, basis_values=None):
        rows = tuple(tuple(GaussQ.coerce(c) for c in row) for row in coords)
        if not rows:
            raise ValidationError("frequency model needs at least one degree of freedom")
        d = len(rows[0])
        if d == 0 or any(len(r) != d for r in rows):
            raise ValidationError("ragged or empty frequency coordinate matrix")
        self.coords = rows
        self.n = len(rows)
        self.d = d
        if basis_values is not None:
            basis_values = tuple(GaussQ.coerce(v) for v in basis_values)
            if len(basis_values) != d:
                raise ValidationError("basis_values length differs from the basis dimension")
            if d != 1:
                raise ValidationError("exact basis values are only meaningful for a one-dimensional basis")
            if not basis_values[0]:
                raise ValidationError("basis element must be nonzero")
        elif d == 1 and numeric is None:
            basis_values = (GaussQ(1),)
        self.basis_values = basis_values
        if numeric is None and basis_values is not None:
            numeric = tuple(complex(v) for v in basis_values)
        if numeric is not None:
            numeric = tuple(complex(v) for v in numeric)
            if len(numeric) != d:
                raise ValidationError("numeric basis values length differs from the basis dimension")
        self.numeric = numeric

    @classmethod
    def rational(cls, gammas: Sequence) -> "FrequencyModel":
        """One-dimensional basis ``omega_1 = 1``: each gamma_j is exact."""
        return cls([[g] for g in gammas])

    def __eq__(self, other):
        if not isinstance(other, FrequencyModel):
            return NotImplemented
        return (self.coords, self.numeric, self.basis_values) == (other.coords, other.numeric, other.basis_values)

    def __hash__(self):
        return hash((self.coords, self.numeric, self.basis_values))

    def __repr__(self):
        return f"FrequencyModel(n={self.n}, d={self.d}, coords={self.coords})"

    @property
    def has_exact_values(self) -> bool:
        return self.basis_values is not None

    def weight(self, mono) -> tuple:
        """Integer vector ``b - a`` of a monomial."""
        n = self.n
        if len(mono) != 2 * n:
            raise DimensionMismatch(f"monomial has {len(mono)} exponents, expected {2 * n}")
        return tuple(mono[n + j] - mono[j] for j in range(n))

    def coordinates_of(self, k) -> tuple:
        """Exact coordinates of ``sum_j k_j gamma_j`` over the basis."""
        if len(k) != self.n:
            raise DimensionMismatch(f"integer vector of length {len(k)}, expected {self.n}")
        out = []
        for l in range(self.d):
            acc = GaussQ(0)
            for j, kj in enumerate(k):
                if kj:
                    acc = acc + self.coords[j][l] * kj
            out.append(acc)
        return tuple(out)

    def is_resonance(self, k) -> bool:
        return not any(self.coordinates_of(k))

    def eigenvalue(self, mono) -> Eigenvalue:
        coords = self.coordinates_of(self.weight(mono))
        value = None
        if self.basis_values is not None:
            value = GaussQ(0)
            for c, w in zip(coords, self.basis_values):
                value = value + c * w
        numeric = None
        if self.numeric is not None:
            numeric = sum(complex(c) * w for c, w in zip(coords, self.numeric))
        return Eigenvalue(coords, value, numeric)

    def exact_gamma(self) -> tuple:
        if self.basis_values is None:
            raise ExactModeUnavailable(
                "frequencies have no exact scalar values (basis dimension > 1); use float mode")
        return tuple(sum((c * w for c, w in zip(row, self.basis_values)), GaussQ(0)) for row in self.coords)

    def numeric_gamma(self) -> tuple:
        if self.numeric is None:
            raise ExactModeUnavailable("frequency model has no numeric basis values")
        return tuple(sum((complex(c) * w for c, w in zip(row, self.numeric)), 0j) for row in self.coords)

    def integer_matrix(self):
        """Integer n x (2d) matrix whose left kernel is the resonance lattice."""
        cols = []
        for l in range(self.d):
            for part in ("re", "im"):
                col = [getattr(self.coords[j][l], part) for j in range(self.n)]
                if not any(col):
                    continue
                den = lcm(*(int(v.denominator) for v in col))
                cols.append([int(v * den) for v in col])
        return il.transpose(cols, self.n) if cols else [[] for _ in range(self.n)]


def is_resonant(mono, F: FrequencyModel) -> bool:
    """True iff ``(b - a)^T C = 0`` exactly."""
    return F.is_resonance(F.weight(mono))


def resonance_lattice(F: FrequencyModel):
    """``(q, mu)``: rank and Hermite-canonical basis of ``{k : k^T C = 0}``."""
    A = F.integer_matrix()
    if not A[0]:
        kernel = il.identity(F.n)
    else:
        kernel = il.left_kernel(A, F.n)
    mu = il.hermite_rows(kernel)
    return len(mu), tuple(tuple(r) for r in mu)


def dual_basis(mu, n: int):
    """Unimodular basis ``rho`` of Z^n biorthogonal to ``mu``.

    Rows ``rho[0..n-q-1]`` are orthogonal to every ``mu[h]``; row
    ``rho[n-q+h]`` pairs to 1 with ``mu[h]`` and 0 with the others.  The
    first block is put in Hermite form and the last block is reduced modulo
    the first, which makes the output canonical.
    """
    mu = [list(r) for r in mu]
    q = len(mu)
    if any(len(r) != n for r in mu):
        raise DimensionMismatch("lattice vectors have the wrong length")
    if q == 0:
        return tuple(tuple(r) for r in il.identity(n))
    H, U, rank = il.echelon(il.transpose(mu), n, q)
    if rank != q:
        raise LatticeError("lattice basis vectors are linearly dependent")
    top = [H[i][:q] for i in range(q)]
    if any(top[i][i] != 1 for i in range(q)):
        raise LatticeError("lattice is not saturated; no unimodular dual basis exists")
    tail = il.matmul(il.unit_upper_inverse(top), U[:q])
    head = il.hermite_rows(U[q:]) if q < n else []
    if len(head) != n - q:
        raise LatticeError("complement lattice has unexpected rank")
    for row in tail:
        for hrow, col in zip(head, il.pivot_columns(head)):
            t = row[col] // hrow[col]
            if t:
                for j in range(n):
                    row[j] -= t * hrow[j]
    rho = head + tail
    if abs(il.determinant(rho)) != 1:
        raise LatticeError("dual basis is not unimodular")
    return tuple(tuple(r) for r in rho)


def torus_generators(rho, q: int, n: int, order: int = 2):
    """``F^(k) = sum_j rho[k]_j x_j y_j`` for ``k = 1..n-q`` (exact)."""
    return [TruncatedSeries.action(n, rho[k], order) for k in range(n - q)]


def _solve_rational(M, rhs):
    """Solve ``M c = rhs`` exactly (square, invertible, rational entries)."""
    n = len(M)
    A = [[mpq(v) for v in row] + [mpq(r)] for row, r in zip(M, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if A[i][col] != 0), None)
        if piv is None:
            raise LatticeError("singular system")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [v / p for v in A[col]]
        for i in range(n):
            if i != col and A[i][col] != 0:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[col])]
    return [A[i][n] for i in range(n)]


def alpha_coefficients(F: FrequencyModel, rho) -> tuple:
    """Coordinates ``alpha_k`` with ``gamma = sum_{k <= n-q} alpha_k rho^(k)``.

    Each ``alpha_k`` is a tuple of exact coordinates over the frequency
    basis.  The components along the last ``q`` rows of ``rho`` must vanish.
    """
    n = F.n
    Rt = il.transpose([list(r) for r in rho])
    sol = []
    for l in range(F.d):
        re = _solve_rational(Rt, [F.coords[j][l].re for j in range(n)])
        im = _solve_rational(Rt, [F.coords[j][l].im for j in range(n)])
        sol.append([GaussQ(a, b) for a, b in zip(re, im)])
    coeffs = [tuple(sol[l][k] for l in range(F.d)) for k in range(n)]
    q, _ = resonance_lattice(F)
    if any(any(c) for c in coeffs[n - q:]):
        raise LatticeError("frequencies are not in the span of the non-resonant dual vectors")
    return tuple(coeffs[: n - q])


@dataclass(frozen=True)
class ResonanceBasis:
    q: int
    mu: tuple
    rho: tuple
    alpha: tuple

    @property
    def n(self) -> int:
        return len(self.rho)

    def generators(self, order: int = 2):
        return torus_generators(self.rho, self.q, self.n, order)

    def check(self):
        """Assert biorthogonality and unimodularity."""
        n, q = self.n, self.q
        for h, m in enumerate(self.mu):
            for k, r in enumerate(self.rho):
                dot = sum(a * b for a, b in zip(r, m))
                want = 1 if k == n - q + h else 0
                if dot != want:
                    raise LatticeError(f"rho[{k}] . mu[{h}] = {dot}, expected {want}")
        if abs(il.determinant([list(r) for r in self.rho])) != 1:
            raise LatticeError("rho is not unimodular")


def resonance_basis(F: FrequencyModel) -> ResonanceBasis:
    q, mu = resonance_lattice(F)
    rho = dual_basis(mu, F.n)
    alpha = alpha_coefficients(F, rho)
    basis = ResonanceBasis(q, mu, rho, alpha)
    basis.check()
    return basis


def in_lattice_span(v, basis: ResonanceBasis) -> bool:
    """Membership test through the dual basis: ``rho^(k) . v = 0`` for ``k <= n-q``."""
    return all(sum(a * b for a, b in zip(r, v)) == 0 for r in basis.rho[: basis.n - basis.q])
