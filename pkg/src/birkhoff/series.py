"""Truncated polynomial series on C^{2n} and their Poisson algebra.

Variables are ordered ``(x_1, ..., x_n, y_1, ..., y_n)`` and a monomial is
the tuple of its ``2n`` exponents.  The bracket convention is

    {A, B} = sum_j dA/dx_j dB/dy_j - dA/dy_j dB/dx_j,

so that ``{H, F} = X_H(F)`` with ``i_{X_H} omega = -dH`` and
``omega = sum_j dx_j ^ dy_j``.
"""
from __future__ import annotations

from math import comb
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from gmpy2 import mpq

from . import kernels
from .coeffs import GaussQ
from .errors import CoefficientKindMismatch, DimensionMismatch, InvalidGenerator

FORWARD = "forward"
INVERSE = "inverse"


def degree(mono: Sequence[int]) -> int:
    return sum(mono)


def monomial_key(mono: Sequence[int]):
    """Sort key of the canonical graded-lex order.

    Lower degree first; within a degree, lexicographically larger exponent
    tuples first (so ``x1`` precedes ``x2`` precedes ``y1``).
    """
    return (sum(mono), tuple(-e for e in mono))


def split_monomial(mono: Sequence[int], n: int):
    return tuple(mono[:n]), tuple(mono[n:])


def monomials_of_degree(nvar: int, k: int):
    """All exponent tuples of total degree ``k`` in ``nvar`` variables, canonical order."""
    if nvar == 0:
        return [()] if k == 0 else []
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    rec((), k, nvar)
    return out


def count_monomials(nvar: int, k: int) -> int:
    return comb(k + nvar - 1, nvar - 1)


def _coerce(value, exact: bool):
    if exact:
        try:
            return GaussQ.coerce(value)
        except TypeError as exc:
            raise CoefficientKindMismatch(str(exc)) from None
    if isinstance(value, GaussQ):
        return complex(value)
    return complex(value)


class TruncatedSeries:
    """Sparse polynomial in ``2n`` variables with truncation order ``order``.

    Coefficients are either all exact (:class:`~birkhoff.coeffs.GaussQ`) or
    all float (``complex``).  Zero coefficients and terms above the order are
    never stored, so equal series have equal term maps.
    """

    __slots__ = ("n", "order", "exact", "_terms", "_compiled")

    def __init__(self, n: int, order: int, terms=(), exact: bool = True):
        if n < 0 or order < 0:
            raise ValueError("n and order must be non-negative")
        self.n = int(n)
        self.order = int(order)
        self.exact = bool(exact)
        self._compiled = None
        items = terms.items() if isinstance(terms, Mapping) else terms
        store = {}
        nvar = 2 * self.n
        for mono, coef in items:
            mono = tuple(int(e) for e in mono)
            if len(mono) != nvar:
                raise DimensionMismatch(f"monomial {mono} has {len(mono)} exponents, expected {nvar}")
            if min(mono, default=0) < 0:
                raise ValueError(f"negative exponent in {mono}")
            if sum(mono) > self.order:
                continue
            c = _coerce(coef, self.exact)
            if mono in store:
                c = store[mono] + c
            store[mono] = c
        self._terms = {m: c for m, c in store.items() if c}

    @classmethod
    def _wrap(cls, n, order, terms, exact):
        obj = object.__new__(cls)
        obj.n = n
        obj.order = order
        obj.exact = exact
        obj._terms = terms
        obj._compiled = None
        return obj

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, n: int, order: int, exact: bool = True) -> "TruncatedSeries":
        return cls._wrap(n, order, {}, exact)

    @classmethod
    def constant(cls, n, order, value, exact=True):
        return cls(n, order, {(0,) * (2 * n): value}, exact)

    @classmethod
    def variable(cls, n: int, index: int, order: int, exact: bool = True):
        """Coordinate function ``z_index`` (x's first, then y's)."""
        mono = [0] * (2 * n)
        mono[index] = 1
        return cls(n, order, {tuple(mono): 1 if exact else 1.0}, exact)

    @classmethod
    def action(cls, n: int, weights: Sequence, order: int = 2, exact: bool = True):
        """``sum_j w_j x_j y_j``."""
        terms = {}
        for j, w in enumerate(weights):
            mono = [0] * (2 * n)
            mono[j] = mono[n + j] = 1
            terms[tuple(mono)] = w
        return cls(n, max(order, 2), terms, exact)

    # views ---------------------------------------------------------------
    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def items(self):
        """Terms in canonical order."""
        return sorted(self._terms.items(), key=lambda kv: monomial_key(kv[0]))

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.items())

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, mono):
        return self._terms.get(tuple(mono), GaussQ(0) if self.exact else 0j)

    def min_degree(self):
        return min((sum(m) for m in self._terms), default=None)

    def max_degree(self):
        return max((sum(m) for m in self._terms), default=None)

    def homogeneous_part(self, k: int) -> "TruncatedSeries":
        return TruncatedSeries._wrap(
            self.n, self.order, {m: c for m, c in self._terms.items() if sum(m) == k}, self.exact)

    def filter(self, keep) -> "TruncatedSeries":
        """Sub-series of the monomials for which ``keep(mono)`` is true."""
        return TruncatedSeries._wrap(
            self.n, self.order, {m: c for m, c in self._terms.items() if keep(m)}, self.exact)

    def with_order(self, order: int) -> "TruncatedSeries":
        """Same terms (those fitting) under a new truncation order."""
        return TruncatedSeries._wrap(
            self.n, order, {m: c for m, c in self._terms.items() if sum(m) <= order}, self.exact)

    def max_abs_coef(self, k=None) -> float:
        vals = [abs(c) for m, c in self._terms.items() if k is None or sum(m) == k]
        return float(max(vals, default=0.0))

    def is_real(self) -> bool:
        if self.exact:
            return all(not c.im for c in self._terms.values())
        return all(c.imag == 0 for c in self._terms.values())

    def to_float(self) -> "TruncatedSeries":
        if not self.exact:
            return self
        return TruncatedSeries._wrap(
            self.n, self.order, {m: complex(c) for m, c in self._terms.items()}, False)

    def compiled(self):
        """``(exponents, coefficients)`` arrays for numeric evaluation (cached)."""
        if self._compiled is None:
            items = self.items()
            exps = np.array([m for m, _ in items], dtype=np.intc).reshape(len(items), 2 * self.n)
            coefs = np.array([complex(c) for _, c in items], dtype=complex)
            self._compiled = (exps, coefs)
        return self._compiled

    # arithmetic ------------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatch(f"series in {self.n} and {other.n} degrees of freedom")
        if other.exact != self.exact:
            raise CoefficientKindMismatch("cannot mix exact and float series")

    def __add__(self, other):
        self._check(other)
        order = min(self.order, other.order)
        out = {m: c for m, c in self._terms.items() if sum(m) <= order}
        for m, c in other._terms.items():
            if sum(m) > order:
                continue
            if m in out:
                v = out[m] + c
                if v:
                    out[m] = v
                else:
                    del out[m]
            else:
                out[m] = c
        return TruncatedSeries._wrap(self.n, order, out, self.exact)

    def __neg__(self):
        return TruncatedSeries._wrap(self.n, self.order, {m: -c for m, c in self._terms.items()}, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "TruncatedSeries":
        if self.exact:
            if isinstance(factor, (float, complex)):
                raise CoefficientKindMismatch("float scale factor on exact series")
            if not isinstance(factor, (int, GaussQ, type(mpq(0)))):
                factor = GaussQ.coerce(factor)
        else:
            factor = complex(factor)
        if not factor:
            return TruncatedSeries.zero(self.n, self.order, self.exact)
        return TruncatedSeries._wrap(
            self.n, self.order, {m: c * factor for m, c in self._terms.items()}, self.exact)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.n == other.n and self.exact == other.exact and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, self.exact, frozenset(self._terms.items())))

    def __repr__(self):
        if not self._terms:
            return f"TruncatedSeries(n={self.n}, order={self.order}, 0)"
        return f"TruncatedSeries(n={self.n}, order={self.order}, {to_string(self)})"

    def __call__(self, z):
        return evaluate(self, z)


def _var_name(i: int, n: int) -> str:
    return f"x{i + 1}" if i < n else f"y{i - n + 1}"


def to_string(A: TruncatedSeries) -> str:
    """Human-readable rendering, e.g. ``x1*y1 + (1/3)*x1^3``."""
    parts = []
    for mono, c in A.items():
        factors = []
        for i, e in enumerate(mono):
            if e:
                name = _var_name(i, A.n)
                factors.append(name if e == 1 else f"{name}^{e}")
        coef = c.format() if A.exact else repr(c)
        if A.exact and not c.im:
            coef = coef.split(",")[0]
        if factors and coef in ("1", "1,0"):
            parts.append("*".join(factors))
        else:
            parts.append(f"({coef})" + ("*" + "*".join(factors) if factors else ""))
    return " + ".join(parts)


def _same_space(A, B):
    if not isinstance(A, TruncatedSeries) or not isinstance(B, TruncatedSeries):
        raise TypeError("expected TruncatedSeries arguments")
    if A.n != B.n:
        raise DimensionMismatch(f"series in {A.n} and {B.n} degrees of freedom")
    if A.exact != B.exact:
        raise CoefficientKindMismatch("cannot mix exact and float series")


def poisson_bracket(A: TruncatedSeries, B: TruncatedSeries) -> TruncatedSeries:
    """``{A, B}`` truncated to ``min(A.order, B.order)``."""
    _same_space(A, B)
    order = min(A.order, B.order)
    if not A._terms or not B._terms:
        return TruncatedSeries.zero(A.n, order, A.exact)
    terms = kernels.bracket(list(A._terms.items()), list(B._terms.items()), A.n, order)
    return TruncatedSeries._wrap(A.n, order, terms, A.exact)


def multiply(A: TruncatedSeries, B: TruncatedSeries) -> TruncatedSeries:
    """Truncated product."""
    _same_space(A, B)
    order = min(A.order, B.order)
    out = {}
    bs = sorted(B._terms.items(), key=lambda kv: sum(kv[0]))
    for ma, ca in A._terms.items():
        da = sum(ma)
        for mb, cb in bs:
            if da + sum(mb) > order:
                break
            m = tuple(p + q for p, q in zip(ma, mb))
            v = ca * cb
            out[m] = out[m] + v if m in out else v
    return TruncatedSeries._wrap(A.n, order, {m: c for m, c in out.items() if c}, A.exact)


def power(A: TruncatedSeries, k: int) -> TruncatedSeries:
    result = TruncatedSeries.constant(A.n, A.order, 1 if A.exact else 1.0, A.exact)
    for _ in range(k):
        result = multiply(result, A)
    return result


def truncate(A: TruncatedSeries, m: int) -> TruncatedSeries:
    """Drop every term of degree above ``m``; the order becomes ``min(A.order, m)``."""
    if m < 0:
        raise ValueError("truncation degree must be non-negative")
    return A.with_order(min(A.order, m))


def mono_eigenvalue(mono: Sequence[int], gamma):
    """Eigenvalue ``sum_j (b_j - a_j) gamma_j`` of ``{H_ss, .}`` on a monomial.

    ``gamma`` is either a :class:`~birkhoff.resonance.FrequencyModel`, giving
    an :class:`~birkhoff.resonance.Eigenvalue` with exact basis coordinates,
    or a plain sequence of scalars, giving a scalar.
    """
    from .resonance import FrequencyModel  # circular at module level

    if isinstance(gamma, FrequencyModel):
        return gamma.eigenvalue(mono)
    n = len(gamma)
    if len(mono) != 2 * n:
        raise DimensionMismatch(f"monomial has {len(mono)} exponents for {n} frequencies")
    total = 0
    for j in range(n):
        w = mono[n + j] - mono[j]
        if w:
            total = total + w * gamma[j]
    return total


def _check_generator(L: TruncatedSeries):
    bad = [m for m in L._terms if sum(m) <= 2]
    if bad:
        raise InvalidGenerator(f"generator has terms of degree <= 2: {sorted(bad)[:3]}")


def lie_transform(A: TruncatedSeries, L: TruncatedSeries, direction: str = FORWARD,
                  m: int | None = None) -> TruncatedSeries:
    """Truncated exponential Lie series of ``ad_L = {L, .}`` applied to ``A``.

    ``forward`` gives ``sum_i (-1)^i/i! ad_L^i A`` (the function expressed in
    the coordinates produced by the time-one map of ``X_L``), ``inverse``
    gives ``sum_i 1/i! ad_L^i A``.
    """
    _same_space(A, L)
    if direction not in (FORWARD, INVERSE):
        raise ValueError(f"direction must be {FORWARD!r} or {INVERSE!r}")
    _check_generator(L)
    m = A.order if m is None else m
    A = truncate(A, m)
    if L.is_zero():
        return A
    gen = L.with_order(max(L.order, m))
    dl = L.min_degree()
    lowest = min((sum(mo) for mo in A._terms if sum(mo) > 0), default=None)
    if lowest is None or lowest > A.order:
        return A
    # each bracket raises the degree by at least dl - 2 >= 1
    imax = (A.order - lowest) // (dl - 2)
    sign = -1 if direction == FORWARD else 1
    result = A
    term = A
    for i in range(1, imax + 1):
        term = poisson_bracket(gen, term)
        if term.is_zero():
            break
        factor = mpq(sign, i) if A.exact else sign / i
        term = term.scale(factor)
        result = result + term
    else:
        assert poisson_bracket(gen, term).is_zero(), "Lie series failed to terminate"
    return result


def apply_generators(A: TruncatedSeries, gens: Iterable[TruncatedSeries], direction: str = FORWARD,
                     m: int | None = None) -> TruncatedSeries:
    """Compose Lie transforms: forward applies ``gens`` in order, inverse in reverse."""
    gens = list(gens)
    if direction == INVERSE:
        gens = gens[::-1]
    for L in gens:
        if not L.is_zero():
            A = lie_transform(A, L, direction, m)
    return truncate(A, A.order if m is None else m)


def evaluate(A: TruncatedSeries, z) -> complex:
    """Numeric value at a point ``z = (x_1..x_n, y_1..y_n)``."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != 2 * A.n:
        raise DimensionMismatch(f"point has {z.shape[0]} coordinates, expected {2 * A.n}")
    exps, coefs = A.compiled()
    return complex(kernels.eval_batch(exps, coefs, z.reshape(1, -1))[0])


def evaluate_many(A: TruncatedSeries, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[1] != 2 * A.n:
        raise DimensionMismatch(f"points must have shape (N, {2 * A.n})")
    exps, coefs = A.compiled()
    return kernels.eval_batch(exps, coefs, Z)


def gradient_many(A: TruncatedSeries, Z):
    """Values and gradients at many points: ``((N,), (N, 2n))``."""
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[1] != 2 * A.n:
        raise DimensionMismatch(f"points must have shape (N, {2 * A.n})")
    exps, coefs = A.compiled()
    return kernels.eval_jac(exps, coefs, Z)
