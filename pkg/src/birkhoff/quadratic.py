"""Quadratic part: Hamiltonian matrix, Jordan-Chevalley split, canonical frequencies.

Exact matrices are :class:`sympy.polys.matrices.DomainMatrix` over ``QQ_I``;
float matrices are complex numpy arrays.  With ``z = (x, y)`` and
``H = z^T A z / 2`` the Hamiltonian matrix is ``M = -Omega A`` where
``Omega = [[0, I], [-I, 0]]``, i.e. ``xdot = -dH/dy``, ``ydot = dH/dx``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from sympy import Dummy, Poly
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .coeffs import GaussQ
from .errors import (DimensionMismatch, EigenvalueClustering, NotQuadratic,
                     UnsupportedEigenstructure)
from .series import TruncatedSeries, multiply

FLOAT_TOL = 1e-10


def to_qqi(c: GaussQ):
    return QQ_I(c.re, c.im)


def from_qqi(e) -> GaussQ:
    return GaussQ(e.x, e.y)


def is_exact_matrix(M) -> bool:
    return isinstance(M, DomainMatrix)


def to_numpy(M) -> np.ndarray:
    if isinstance(M, DomainMatrix):
        return np.array([[complex(from_qqi(e)) for e in row] for row in M.to_list()], dtype=complex)
    return np.asarray(M, dtype=complex)


def exact_matrix(rows) -> DomainMatrix:
    rows = [[to_qqi(GaussQ.coerce(v)) for v in row] for row in rows]
    return DomainMatrix(rows, (len(rows), len(rows[0]) if rows else 0), QQ_I)


@lru_cache(maxsize=None)
def _omega_rows(n):
    rows = [[0] * (2 * n) for _ in range(2 * n)]
    for j in range(n):
        rows[j][n + j] = 1
        rows[n + j][j] = -1
    return tuple(tuple(r) for r in rows)


def omega(n: int, exact: bool = True):
    """Matrix of ``omega = sum dx_j ^ dy_j``: ``omega(u, v) = u^T Omega v``."""
    rows = _omega_rows(n)
    if exact:
        return exact_matrix(rows)
    return np.array(rows, dtype=complex)


def _check_quadratic(H2: TruncatedSeries):
    bad = [m for m in H2.terms if sum(m) != 2]
    if bad:
        raise NotQuadratic(f"series has non-quadratic terms, e.g. {bad[0]}")


def _hessian_rows(H2):
    nv = 2 * H2.n
    zero = GaussQ(0) if H2.exact else 0j
    A = [[zero] * nv for _ in range(nv)]
    for mono, c in H2.terms.items():
        idx = [i for i, e in enumerate(mono) for _ in range(e)]
        i, j = idx
        if i == j:
            A[i][i] = c * 2
        else:
            A[i][j] = c
            A[j][i] = c
    return A


def hamiltonian_matrix(H2: TruncatedSeries):
    """Matrix of the linear vector field ``X_{H2}`` acting on ``z = (x, y)``."""
    _check_quadratic(H2)
    n = H2.n
    A = _hessian_rows(H2)
    M = [[-v for v in A[n + i]] for i in range(n)] + [list(A[i]) for i in range(n)]
    if H2.exact:
        return exact_matrix(M)
    return np.array(M, dtype=complex)


def quadratic_form(M, n: int, order: int = 2) -> TruncatedSeries:
    """Inverse of :func:`hamiltonian_matrix`: the quadratic series of ``M``."""
    exact = is_exact_matrix(M)
    if exact:
        rows = [[from_qqi(e) for e in row] for row in M.to_list()]
    else:
        rows = np.asarray(M, dtype=complex).tolist()
    if len(rows) != 2 * n:
        raise DimensionMismatch(f"matrix of size {len(rows)} for n={n}")
    A = [rows[n + i] for i in range(n)] + [[-v for v in rows[i]] for i in range(n)]
    terms = {}
    half = GaussQ(1, 0) / 2 if exact else 0.5
    for i in range(2 * n):
        for j in range(i, 2 * n):
            mono = [0] * (2 * n)
            mono[i] += 1
            mono[j] += 1
            c = A[i][j] * half if i == j else A[i][j]
            terms[tuple(mono)] = c
    return TruncatedSeries(n, max(order, 2), terms, exact)


def _poly_at(coeffs, S, eye):
    R = eye * coeffs[0]
    for c in coeffs[1:]:
        R = R.matmul(S) + eye * c
    return R


def _jordan_chevalley_exact(M):
    size = M.shape[0]
    eye = DomainMatrix.eye(size, QQ_I).to_dense()
    t = Dummy("t")
    chi = Poly.from_list(M.charpoly(), t, domain=QQ_I)
    p = chi.quo(chi.gcd(chi.diff(t))).monic()
    dp = p.diff(t)
    pc = p.rep.to_list()
    dpc = dp.rep.to_list()
    S = M
    for _ in range(64):
        P = _poly_at(pc, S, eye)
        if P.is_zero_matrix:
            break
        S = S - P.matmul(_poly_at(dpc, S, eye).inv())
    else:  # pragma: no cover - Newton converges in log2(max multiplicity) steps
        raise RuntimeError("Jordan-Chevalley iteration did not terminate")
    return S, M - S


def _cluster(values, tol):
    """Single-linkage clusters of complex numbers; returns list of index lists."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _jordan_chevalley_float(M, tol, gap_floor):
    M = np.asarray(M, dtype=complex)
    T, _ = scipy.linalg.schur(M, output="complex")
    eig = np.diag(T)
    groups = _cluster(list(eig), tol)
    centers = [np.mean(eig[g]) for g in groups]
    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            if abs(centers[a] - centers[b]) < gap_floor:
                raise EigenvalueClustering(
                    f"eigenvalues {centers[a]:.3g} and {centers[b]:.3g} are too close to separate "
                    "reliably; use exact coefficients or perturb the input")
    eye = np.eye(M.shape[0], dtype=complex)
    S = M.copy()
    scale = max(1.0, np.abs(M).max())
    for _ in range(100):
        P = eye.copy()
        for c in centers:
            P = P @ (S - c * eye)
        if np.abs(P).max() <= 1e-15 * scale ** len(centers):
            break
        D = np.zeros_like(M)
        for i in range(len(centers)):
            term = eye.copy()
            for j, c in enumerate(centers):
                if j != i:
                    term = term @ (S - c * eye)
            D += term
        S = S - P @ np.linalg.inv(D)
    return S, M - S


def jordan_chevalley(M, tol: float = 1e-9, gap_floor: float = 1e-6):
    """Split ``M = S + N`` with ``S`` semisimple, ``N`` nilpotent, ``SN = NS``.

    Exact input uses the Chevalley-Newton iteration on the square-free part
    of the characteristic polynomial, so ``S`` is a polynomial in ``M`` and
    stays in sp(2n).  Float input clusters Schur eigenvalues within ``tol``
    and runs the same iteration numerically.
    """
    if is_exact_matrix(M):
        return _jordan_chevalley_exact(M)
    return _jordan_chevalley_float(M, tol, gap_floor)


@dataclass(frozen=True)
class LinearSymplecticMap:
    """Linear change of coordinates ``z = P z'``."""

    P: object

    @property
    def exact(self) -> bool:
        return is_exact_matrix(self.P)

    @property
    def n(self) -> int:
        return self.P.shape[0] // 2

    @classmethod
    def identity(cls, n: int, exact: bool = True):
        if exact:
            return cls(DomainMatrix.eye(2 * n, QQ_I).to_dense())
        return cls(np.eye(2 * n, dtype=complex))

    def symplectic_defect(self) -> float:
        """``max |P^T Omega P - Omega|`` (0 exactly for exact maps that pass)."""
        n = self.n
        if self.exact:
            W = omega(n)
            D = self.P.transpose().matmul(W).matmul(self.P) - W
            return 0.0 if D.is_zero_matrix else float(np.abs(to_numpy(D)).max())
        W = omega(n, exact=False)
        return float(np.abs(self.P.T @ W @ self.P - W).max())

    def is_symplectic(self, tol: float = FLOAT_TOL) -> bool:
        d = self.symplectic_defect()
        return d == 0.0 if self.exact else d <= tol

    def inverse(self) -> "LinearSymplecticMap":
        """``P^{-1} = -Omega P^T Omega`` for symplectic ``P``."""
        n = self.n
        if self.exact:
            W = omega(n)
            return LinearSymplecticMap(-(W.matmul(self.P.transpose()).matmul(W)))
        W = omega(n, exact=False)
        return LinearSymplecticMap(-(W @ self.P.T @ W))

    def __call__(self, A: TruncatedSeries) -> TruncatedSeries:
        return apply_linear(A, self)


def apply_linear(A: TruncatedSeries, P) -> TruncatedSeries:
    """Substitute ``z = P z'`` into ``A``; degrees are preserved."""
    if isinstance(P, LinearSymplecticMap):
        P = P.P
    nv = 2 * A.n
    if P.shape != (nv, nv):
        raise DimensionMismatch(f"matrix shape {P.shape} for n={A.n}")
    exact = A.exact and is_exact_matrix(P)
    if exact:
        rows = [[from_qqi(e) for e in row] for row in P.to_list()]
    else:
        rows = to_numpy(P).tolist()
        A = A.to_float()
    linear = []
    for i in range(nv):
        terms = {}
        for j in range(nv):
            mono = [0] * nv
            mono[j] = 1
            terms[tuple(mono)] = rows[i][j]
        linear.append(TruncatedSeries(A.n, A.order, terms, exact))
    cache = {}

    def pw(i, e):
        if (i, e) not in cache:
            cache[(i, e)] = linear[i] if e == 1 else multiply(pw(i, e - 1), linear[i])
        return cache[(i, e)]

    out = TruncatedSeries.zero(A.n, A.order, exact)
    for mono, c in A.items():
        term = TruncatedSeries.constant(A.n, A.order, c, exact)
        for i, e in enumerate(mono):
            if e:
                term = multiply(term, pw(i, e))
        out = out + term
    return out


def _canonical_sign(g) -> bool:
    """True if ``g`` already has argument in (-pi/2, pi/2] (or is zero)."""
    if isinstance(g, GaussQ):
        return g.re > 0 or (g.re == 0 and g.im >= 0)
    return g.real > 0 or (g.real == 0 and g.imag >= 0)


def _sort_key(g):
    c = complex(g)
    mag = g.norm2() if isinstance(g, GaussQ) else abs(c) ** 2
    return (mag, cmath.phase(c) if c else 0.0)


def _exact_eigen(S):
    """Exact eigenpairs if the characteristic polynomial splits over Q(i), else None."""
    t = Dummy("t")
    chi = Poly.from_list(S.charpoly(), t, domain=QQ_I)
    _, factors = chi.factor_list()
    if any(f.degree() != 1 for f, _ in factors):
        return None
    size = S.shape[0]
    eye = DomainMatrix.eye(size, QQ_I).to_dense()
    out = []
    for f, mult in factors:
        a, b = f.rep.to_list()
        lam = -b / a
        ns = (S - eye * lam).nullspace().to_list()
        out.append((from_qqi(lam), mult, [[from_qqi(e) for e in v] for v in ns]))
    return out


def _pair_exact(S, n):
    eig = _exact_eigen(S)
    if eig is None:
        return None
    by_value = {lam: vecs for lam, _, vecs in eig}
    pairs = []
    seen = set()
    for lam, mult, vecs in eig:
        if lam in seen:
            continue
        if not lam:
            if len(vecs) != 2:
                raise UnsupportedEigenstructure(
                    f"zero eigenvalue with eigenspace dimension {len(vecs)}; supply canonical coordinates")
            pairs.append((GaussQ(0), vecs[0], vecs[1]))
            seen.add(lam)
            continue
        if len(vecs) != 1 or -lam not in by_value or len(by_value[-lam]) != 1:
            raise UnsupportedEigenstructure(
                "repeated frequency pairs are not supported; supply coordinates with H_ss = sum gamma_j x_j y_j")
        gamma = lam if _canonical_sign(lam) else -lam
        pairs.append((gamma, by_value[-gamma][0], by_value[gamma][0]))
        seen.update((lam, -lam))
    return pairs


def _pair_float(S, n, tol):
    vals, vecs = np.linalg.eig(np.asarray(S, dtype=complex))
    used = set()
    pairs = []
    for i in sorted(range(2 * n), key=lambda k: (abs(vals[k]), cmath.phase(vals[k]))):
        if i in used:
            continue
        lam = vals[i]
        if abs(lam) <= tol:
            zeros = [k for k in range(2 * n) if abs(vals[k]) <= tol and k not in used]
            if len(zeros) != 2:
                raise UnsupportedEigenstructure("repeated zero frequencies are not supported")
            used.update(zeros)
            pairs.append((0j, vecs[:, zeros[0]], vecs[:, zeros[1]]))
            continue
        partners = [k for k in range(2 * n) if k != i and k not in used and abs(vals[k] + lam) <= tol]
        close = [k for k in range(2 * n) if k != i and abs(vals[k] - lam) <= tol]
        if len(partners) != 1 or close:
            raise UnsupportedEigenstructure(
                "repeated frequency pairs are not supported; supply coordinates with H_ss = sum gamma_j x_j y_j")
        j = partners[0]
        used.update((i, j))
        gamma, gi, mi = (lam, i, j) if _canonical_sign(lam) else (vals[j], j, i)
        pairs.append((complex(gamma), vecs[:, mi], vecs[:, gi]))
    return pairs


def eigen_symplectic_basis(S, tol: float = 1e-9):
    """Symplectic ``P`` and canonical frequencies with ``P^{-1} S P = diag(-gamma, gamma)``.

    In coordinates ``z = P z'`` the quadratic function of ``S`` becomes
    ``sum_j gamma_j x'_j y'_j``.  Each gamma_j has argument in
    ``(-pi/2, pi/2]`` and the pairs are sorted by ``(|gamma|, arg gamma)``.
    Exact input stays exact when every eigenvalue lies in Q(i).
    """
    n = S.shape[0] // 2
    pairs = _pair_exact(S, n) if is_exact_matrix(S) else None
    exact = pairs is not None
    if not exact:
        pairs = _pair_float(to_numpy(S), n, tol)
    pairs.sort(key=lambda p: _sort_key(p[0]))
    for a, b in zip(pairs, pairs[1:]):
        if _sort_key(a[0]) == _sort_key(b[0]):
            raise UnsupportedEigenstructure("repeated frequency pairs are not supported")
    W = omega(n, exact=False) if not exact else None
    cols_x, cols_y, gammas = [], [], []
    for gamma, u, v in pairs:
        if exact:
            s = GaussQ(0)
            for i in range(n):
                s = s + u[i] * v[n + i] - u[n + i] * v[i]
            if not s:
                raise UnsupportedEigenstructure("eigenvectors are symplectically orthogonal")
            v = [e / s for e in v]
        else:
            u = np.asarray(u, dtype=complex)
            v = np.asarray(v, dtype=complex)
            s = u @ W @ v
            if abs(s) <= tol:
                raise UnsupportedEigenstructure("eigenvectors are symplectically orthogonal")
            v = v / s
        cols_x.append(u)
        cols_y.append(v)
        gammas.append(gamma)
    cols = cols_x + cols_y
    if exact:
        rows = [[cols[j][i] for j in range(2 * n)] for i in range(2 * n)]
        return LinearSymplecticMap(exact_matrix(rows)), tuple(gammas)
    return LinearSymplecticMap(np.array(cols, dtype=complex).T), tuple(gammas)


@dataclass(frozen=True)
class QuadraticData:
    H2: TruncatedSeries
    M: object
    S: object
    Nn: object
    Hss: TruncatedSeries
    Hnil: TruncatedSeries

    @property
    def n(self) -> int:
        return self.H2.n

    @property
    def exact(self) -> bool:
        return self.H2.exact

    def is_canonical(self) -> bool:
        """True if ``H_ss`` only contains ``x_j y_j`` terms."""
        n = self.n
        for mono in self.Hss.terms:
            if any(mono[j] != mono[n + j] for j in range(n)):
                return False
        return True

    def frequencies(self) -> tuple:
        """``gamma_j`` read off a canonical ``H_ss``."""
        if not self.is_canonical():
            raise UnsupportedEigenstructure("H_ss is not of the form sum gamma_j x_j y_j")
        n = self.n
        out = []
        for j in range(n):
            mono = [0] * (2 * n)
            mono[j] = mono[n + j] = 1
            out.append(self.Hss.coefficient(mono))
        return tuple(out)


def quadratic_data(H2: TruncatedSeries, tol: float = 1e-9) -> QuadraticData:
    """Classify a quadratic Hamiltonian (or the quadratic part of ``H``)."""
    H2 = H2.homogeneous_part(2).with_order(2)
    M = hamiltonian_matrix(H2)
    S, Nn = jordan_chevalley(M, tol)
    Hss = quadratic_form(S, H2.n)
    Hnil = quadratic_form(Nn, H2.n)
    if not H2.exact:
        Hss = _clean(Hss, tol)
        Hnil = _clean(Hnil, tol)
    return QuadraticData(H2, M, S, Nn, Hss, Hnil)


def _clean(A: TruncatedSeries, tol):
    return A.filter(lambda m: abs(A.terms[m]) > tol)
