"""Pure-Python reference kernels.

Same signatures as the compiled ``_kernels`` extension; selected at import
time by :mod:`birkhoff.kernels` when the extension is not built.
"""
import numpy as np

# 16 bits per exponent slot; exponents never exceed the truncation order + 2.
_SLOT = 16


def _pack(exps):
    key = 0
    for i, e in enumerate(exps):
        key |= e << (_SLOT * i)
    return key


def _unpack(key, nvar):
    mask = (1 << _SLOT) - 1
    return tuple((key >> (_SLOT * i)) & mask for i in range(nvar))


def bracket(a_items, b_items, n, order):
    """Truncated Poisson bracket of two term lists.

    ``a_items``/``b_items`` are lists of ``(exponents, coefficient)`` with
    exponents of length ``2n`` ordered ``(a_1..a_n, b_1..b_n)``.  Returns a
    dict ``exponents -> coefficient`` with zero entries removed and no term
    of degree above ``order``.

    Both bracket terms land on the same monomial, so each pair of input
    terms contributes ``ca*cb*(a_j b'_j - b_j a'_j)`` to the monomial with
    exponents ``e + e' - x_j - y_j``.
    """
    nvar = 2 * n
    if order + 2 >= (1 << _SLOT):
        raise ValueError("truncation order too large for packed exponents")
    dec = [(1 << (_SLOT * j)) + (1 << (_SLOT * (n + j))) for j in range(n)]
    pa = [(sum(e), _pack(e), e[:n], e[n:], c) for e, c in a_items]
    pb = sorted(((sum(e), _pack(e), e[:n], e[n:], c) for e, c in b_items),
                key=lambda t: t[0])
    out = {}
    get = out.get
    rng = range(n)
    for da, ka, xa, ya, ca in pa:
        lim = order + 2 - da
        for db, kb, xb, yb, cb in pb:
            if db > lim:
                break
            prod = None
            s = ka + kb
            for j in rng:
                f = xa[j] * yb[j] - ya[j] * xb[j]
                if f:
                    if prod is None:
                        prod = ca * cb
                    key = s - dec[j]
                    v = f * prod
                    old = get(key)
                    out[key] = v if old is None else old + v
    return {_unpack(k, nvar): v for k, v in out.items() if v}


def _factor_table(exps, Z):
    """Per-variable factors z_v**e_v, shape (nvar, npts, nterms)."""
    maxdeg = int(exps.max()) if exps.size else 0
    npts, nvar = Z.shape
    powers = np.ones((nvar, maxdeg + 1, npts), dtype=complex)
    for d in range(1, maxdeg + 1):
        powers[:, d, :] = powers[:, d - 1, :] * Z.T
    fac = np.empty((nvar, npts, exps.shape[0]), dtype=complex)
    for v in range(nvar):
        fac[v] = powers[v][exps[:, v]].T
    return powers, fac


def eval_batch(exps, coefs, Z):
    """Values of one polynomial at many points.

    exps: (T, nvar) int array, coefs: (T,) complex, Z: (N, nvar) complex.
    """
    Z = np.asarray(Z, dtype=complex)
    if exps.shape[0] == 0:
        return np.zeros(Z.shape[0], dtype=complex)
    _, fac = _factor_table(exps, Z)
    return np.prod(fac, axis=0) @ coefs


def eval_jac(exps, coefs, Z):
    """Values and gradients; returns ((N,), (N, nvar))."""
    Z = np.asarray(Z, dtype=complex)
    npts, nvar = Z.shape
    if exps.shape[0] == 0:
        return np.zeros(npts, dtype=complex), np.zeros((npts, nvar), dtype=complex)
    powers, fac = _factor_table(exps, Z)
    vals = np.prod(fac, axis=0) @ coefs
    grad = np.zeros((npts, nvar), dtype=complex)
    for v in range(nvar):
        ev = exps[:, v]
        lowered = powers[v][np.maximum(ev - 1, 0)].T * ev
        others = np.ones((npts, exps.shape[0]), dtype=complex)
        for u in range(nvar):
            if u != v:
                others *= fac[u]
        grad[:, v] = (others * lowered) @ coefs
    return vals, grad
