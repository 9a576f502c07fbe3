"""Order-by-order Birkhoff normalization.

At degree ``k`` the homological equation ``H_k = -{H_2, L_k} + H'_k`` is
solved with ``H'_k`` in the kernel of ``{H_ss, .}``; the time-one map of
``X_{L_k}`` then replaces ``H_k`` by ``H'_k`` and leaves lower degrees
untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (ExactModeUnavailable, NearResonance, UnsupportedEigenstructure,
                     ValidationError)
from .quadratic import (QuadraticData, apply_linear, eigen_symplectic_basis,
                        quadratic_data)
from .resonance import FrequencyModel
from .series import (FORWARD, INVERSE, TruncatedSeries, apply_generators,
                     count_monomials, lie_transform, poisson_bracket, truncate)

NEAR_RESONANCE_FLOOR = 1e-8


@dataclass(frozen=True)
class NormalizationResult:
    """Normal form ``N`` (order ``m``) and generators ``L_3..L_m``.

    ``per_degree`` holds ``(k, max|L_k|, max|N_k|)`` for ``k = 3..m``.
    """

    m: int
    N: TruncatedSeries
    gens: tuple
    per_degree: tuple
    Hss: TruncatedSeries
    freq: FrequencyModel | None = None
    steps: tuple = field(default=(), repr=False)

    def generator(self, k: int) -> TruncatedSeries:
        return self.gens[k - 3]


def _eigen_scalar(F: FrequencyModel, mono, exact: bool, floor: float):
    ev = F.eigenvalue(mono)
    if exact:
        if ev.value is None:
            raise ExactModeUnavailable(
                "exact normalization needs exact frequency values (one-dimensional basis)")
        assert ev.value, f"zero eigenvalue on structurally non-resonant monomial {mono}"
        return ev.value
    if ev.numeric is None:
        raise ExactModeUnavailable("float normalization needs numeric frequency values")
    if abs(ev.numeric) < floor:
        raise NearResonance(
            f"|lambda| = {abs(ev.numeric):.3e} below floor {floor:g} on monomial {mono}; "
            "refine the frequency model")
    return ev.numeric


def _split_canonical(Hk, Hnil, F, floor):
    exact = Hk.exact
    resonant = {}
    inv = {}
    for mono, c in Hk.terms.items():
        if F.is_resonance(F.weight(mono)):
            resonant[mono] = c
        else:
            inv[mono] = _eigen_scalar(F, mono, exact, floor)
    Hprime = TruncatedSeries(Hk.n, Hk.order, resonant, exact)
    T = Hk.filter(lambda mono: mono in inv)
    L = TruncatedSeries.zero(Hk.n, Hk.order, exact)
    if T.is_zero():
        return L, Hprime
    nil = Hnil.with_order(Hk.order) if Hnil is not None and not Hnil.is_zero() else None
    k = Hk.max_degree()
    bound = count_monomials(2 * Hk.n, k) + 1
    cache = {}

    def eig(mono):
        if mono not in cache:
            cache[mono] = inv[mono] if mono in inv else _eigen_scalar(F, mono, exact, floor)
        return cache[mono]

    # L = -sum_i D (-N D)^i R, D = ad_{H_ss}^{-1} on non-resonant monomials, N = ad_{H_nil}
    for _ in range(bound):
        U = TruncatedSeries(Hk.n, Hk.order, {m: c / eig(m) for m, c in T.terms.items()}, exact)
        L = L - U
        if nil is None:
            break
        T = -poisson_bracket(nil, U)
        if T.is_zero():
            break
    else:
        raise AssertionError("Neumann series for the nilpotent part did not terminate")
    return L, Hprime


def homological_split(Hk: TruncatedSeries, qdata: QuadraticData, F: FrequencyModel | None = None,
                      floor: float = NEAR_RESONANCE_FLOOR):
    """Solve ``Hk = -{H_2, Lk} + Hk'`` with ``{H_ss, Hk'} = 0``.

    ``Hk'`` is the component of ``Hk`` in the kernel of ``ad_{H_ss}`` and
    ``Lk`` has no component there.  When ``H_nil != 0`` the operator
    ``ad_{H_2} = ad_{H_ss} + ad_{H_nil}`` is inverted on each non-zero
    eigenspace by a terminating Neumann series.

    If ``H_ss`` is not of the form ``sum gamma_j x_j y_j`` the equation is
    solved in exact symplectic eigen-coordinates and pulled back.
    """
    degs = {sum(m) for m in Hk.terms}
    if len(degs) > 1 or (degs and min(degs) < 3):
        raise ValueError("Hk must be homogeneous of degree >= 3")
    if qdata.is_canonical():
        if F is None:
            F = _rational_model(qdata.frequencies())
        Hnil = qdata.Hnil if Hk.exact == qdata.exact else qdata.Hnil.to_float()
        return _split_canonical(Hk, Hnil, F, floor)
    P, gammas = eigen_symplectic_basis(qdata.S)
    if not (P.exact and Hk.exact):
        raise UnsupportedEigenstructure(
            "non-canonical H_ss needs exact eigen-coordinates; supply canonical coordinates")
    Pinv = P.inverse()
    Hnil = apply_linear(qdata.Hnil, P)
    L, Hp = _split_canonical(apply_linear(Hk, P), Hnil, FrequencyModel.rational(gammas), floor)
    return apply_linear(L, Pinv), apply_linear(Hp, Pinv)


def _rational_model(gammas):
    from .coeffs import GaussQ

    if all(isinstance(g, GaussQ) for g in gammas):
        return FrequencyModel.rational(gammas)
    raise ExactModeUnavailable(
        "float frequencies need an explicit FrequencyModel (resonance is never decided from floats)")


def _check_frequencies(qdata: QuadraticData, F: FrequencyModel, exact: bool, tol=1e-9):
    gam = qdata.frequencies()
    if len(gam) != F.n:
        raise ValidationError(f"frequency model has n={F.n}, Hamiltonian has n={len(gam)}")
    if exact:
        want = F.exact_gamma()
        if tuple(gam) != tuple(want):
            raise ValidationError(f"H_ss frequencies {gam} differ from the model {want}")
        return
    want = F.numeric_gamma()
    scale = max(1.0, max(abs(w) for w in want))
    for g, w in zip(gam, want):
        if abs(complex(g) - w) > tol * scale:
            raise ValidationError(f"H_ss frequency {g} differs from model value {w}")


def _lower_degrees_equal(A, B, k, exact, tol=1e-9):
    a, b = truncate(A, k - 1), truncate(B, k - 1)
    if exact:
        return a == b
    return (a - b).max_abs_coef() <= tol * max(1.0, a.max_abs_coef())


def normalize(H: TruncatedSeries, m: int, qdata: QuadraticData | None = None,
              F: FrequencyModel | None = None, floor: float = NEAR_RESONANCE_FLOOR,
              keep_steps: bool = False) -> NormalizationResult:
    """Birkhoff normal form of ``H`` through degree ``m``.

    ``H`` must have no constant or linear terms and its ``H_ss`` must be
    ``sum gamma_j x_j y_j`` (see :func:`to_canonical_coordinates`).
    Exact input stays exact; float input requires a frequency model with
    numeric values, and resonance is still decided from its exact
    coordinates.
    """
    low = [mono for mono in H.terms if sum(mono) < 2]
    if low:
        raise ValidationError("H must vanish to second order at the origin")
    if qdata is None:
        qdata = quadratic_data(H)
    if not qdata.is_canonical():
        raise UnsupportedEigenstructure(
            "H_ss is not of the form sum gamma_j x_j y_j; transform coordinates first")
    if F is None:
        F = _rational_model(qdata.frequencies())
    _check_frequencies(qdata, F, H.exact)
    Hss = qdata.Hss if H.exact == qdata.exact else qdata.Hss.to_float()
    Hnil = qdata.Hnil if H.exact == qdata.exact else qdata.Hnil.to_float()
    H = truncate(H, m)
    if m < 3:
        return NormalizationResult(m, H, (), (), Hss, F)
    gens = []
    steps = []
    for k in range(3, m + 1):
        Hk = H.homogeneous_part(k)
        L, Hp = _split_canonical(Hk, Hnil, F, floor)
        if not L.is_zero():
            Hnew = lie_transform(H, L.with_order(m), FORWARD, m)
            assert _lower_degrees_equal(H, Hnew, k, H.exact), f"degree-{k} step changed lower orders"
            newk = Hnew.homogeneous_part(k)
            if H.exact:
                assert newk == Hp, f"degree-{k} part is not the resonant remainder"
            else:
                # equal up to roundoff; store the exact remainder so no
                # non-resonant dust survives
                Hnew = Hnew - newk + Hp.with_order(m)
            H = Hnew
        gens.append(L.with_order(m))
        if keep_steps:
            steps.append((k, Hk, L, Hp))
    per_degree = tuple((k, gens[k - 3].max_abs_coef(), H.max_abs_coef(k)) for k in range(3, m + 1))
    return NormalizationResult(m, H, tuple(gens), per_degree, Hss, F, tuple(steps))


def transform_function(G: TruncatedSeries, gens, direction: str = FORWARD, m: int | None = None):
    """Apply the composed normalizing transforms to another function.

    ``forward`` expresses ``G`` in the normalized coordinates (what
    :func:`normalize` does to ``H``); ``inverse`` pulls a function of the
    normalized coordinates back to the original ones.
    """
    m = G.order if m is None else m
    gens = [L if L.exact == G.exact else L.to_float() for L in gens]
    return apply_generators(G, gens, direction, m)


def check_normal_form(A: TruncatedSeries, Hss: TruncatedSeries, m: int, tol: float = 0.0):
    """``(ok, residual)`` with ``residual = {H_ss, truncate(A, m)}``."""
    if Hss.exact != A.exact:
        Hss = Hss.to_float()
        A = A.to_float()
    residual = poisson_bracket(Hss.with_order(max(m, 2)), truncate(A, m))
    if A.exact:
        return residual.is_zero(), residual
    return residual.max_abs_coef() <= tol, residual


def torus_average(A: TruncatedSeries, F: FrequencyModel) -> TruncatedSeries:
    """Projection onto the resonant monomials (average over the torus action)."""
    return A.filter(lambda mono: F.is_resonance(F.weight(mono)))


def convergence_report(result: NormalizationResult):
    """Rows ``(k, max|L_k|, max|N_k|, max|N_k|**(1/k))`` for ``k = 3..m``."""
    return [(k, g, nk, nk ** (1.0 / k)) for k, g, nk in result.per_degree]


def report_csv(rows) -> str:
    lines = ["degree,gen_maxcoef,nf_maxcoef,nf_root"]
    lines += [f"{k},{g!r},{nk!r},{root!r}" for k, g, nk, root in rows]
    return "\n".join(lines) + "\n"


def to_canonical_coordinates(H: TruncatedSeries, tol: float = 1e-9):
    """Bring ``H_ss`` to ``sum gamma_j x_j y_j`` by a linear symplectic map.

    Returns ``(H', P, gammas)`` with ``H'(z') = H(P z')``; ``P`` is the
    identity when ``H_ss`` is already canonical.
    """
    from .quadratic import LinearSymplecticMap

    qd = quadratic_data(H, tol)
    if qd.is_canonical():
        return H, LinearSymplecticMap.identity(H.n, H.exact), qd.frequencies()
    P, gammas = eigen_symplectic_basis(qd.S, tol)
    return apply_linear(H, P), P, gammas
