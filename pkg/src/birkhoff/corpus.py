"""Integrable test systems with known first integrals.

An integrable normal form ``N(x1 y1, x2 y2)`` is pushed through the
time-one maps of cubic generators that depend only on ``x`` or only on
``y``.  Each such Lie series terminates on polynomials, so the result is an
exact polynomial Hamiltonian whose first integrals are the pushed actions.
Alternating ``x``- and ``y``-shears makes the normalizing map a genuinely
infinite series.
"""
from __future__ import annotations

from .coeffs import GaussQ
from .resonance import FrequencyModel
from .series import FORWARD, TruncatedSeries, lie_transform
from .sysfile import SystemSpec

# cubic shears, alternating x-only and y-only; monomials as (a1, a2, b1, b2)
DEFAULT_SHEARS = (
    {(2, 1, 0, 0): GaussQ(1), (1, 2, 0, 0): GaussQ(1, 2)},
    {(0, 0, 1, 2): GaussQ(1), (0, 0, 2, 1): GaussQ(-1, 1)},
    {(3, 0, 0, 0): GaussQ(1), (0, 3, 0, 0): GaussQ(0, 1)},
)


def _is_shear(terms, n):
    return all(not any(m[n:]) for m in terms) or all(not any(m[:n]) for m in terms)


def push(A: TruncatedSeries, shears) -> TruncatedSeries:
    """``A`` expressed in the coordinates produced by the shears, in order."""
    for L in shears:
        A = lie_transform(A, L, FORWARD, A.order)
    return A


def shear_system(N_terms=None, shears=DEFAULT_SHEARS, n: int = 2, order: int = 8,
                 gamma=(1, 2), work_order: int = 48):
    """``(spec, N, actions)`` for a shear-conjugated integrable system.

    ``N_terms`` defaults to ``x1 y1 + 2 x2 y2 + (x1 y1)^2``.  ``actions``
    are the pushed ``x_j y_j`` (exact first integrals); the system's
    integrals are ``G_j = actions[j]`` for ``j >= 2``.
    """
    if N_terms is None:
        N_terms = {(1, 0, 1, 0): 1, (0, 1, 0, 1): 2, (2, 0, 2, 0): 1}
    gens = []
    for t in shears:
        if not _is_shear(t, n) or any(sum(m) != 3 for m in t):
            raise ValueError("shears must be cubic and depend on x only or on y only")
        gens.append(TruncatedSeries(n, work_order, t))
    N0 = TruncatedSeries(n, work_order, N_terms)
    H = push(N0, gens)
    acts = []
    for j in range(n):
        mono = [0] * (2 * n)
        mono[j] = mono[n + j] = 1
        acts.append(push(TruncatedSeries(n, work_order, {tuple(mono): 1}), gens))
    deg = max(H.max_degree(), *(a.max_degree() for a in acts))
    H = H.with_order(deg)
    acts = [a.with_order(deg) for a in acts]
    spec = SystemSpec(n, order, H, FrequencyModel.rational([GaussQ(g) for g in gamma]),
                      {j + 1: acts[j] for j in range(1, n)})
    return spec, N0.with_order(deg), acts
