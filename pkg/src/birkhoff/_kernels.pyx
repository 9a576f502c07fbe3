# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
# distutils: libraries = gmp
"""Compiled hot loops: sparse Poisson bracket and batched polynomial evaluation.

Drop-in replacement for ``_kernels_py``.  The bracket accumulates exact
coefficients as GMP rationals and float ones as complex doubles in a hash
map keyed by packed exponents; evaluation runs on complex doubles.
"""
import numpy as np

from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from cython.operator cimport dereference as deref

from birkhoff.coeffs import GaussQ
from gmpy2 import mpq as _mpq


cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef struct __mpq_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    ctypedef __mpq_struct mpq_t[1]
    ctypedef __mpz_struct* mpz_ptr
    ctypedef __mpq_struct* mpq_ptr
    void mpz_init(mpz_ptr)
    void mpz_clear(mpz_ptr)
    void mpz_set_si(mpz_ptr, long)
    int mpz_set_str(mpz_ptr, const char*, int)
    int mpz_fits_slong_p(mpz_ptr)
    long mpz_get_si(mpz_ptr)
    char* mpz_get_str(char*, int, mpz_ptr)
    void mpq_init(mpq_ptr)
    void mpq_clear(mpq_ptr)
    void mpq_set_si(mpq_ptr, long, unsigned long)
    void mpq_set_num(mpq_ptr, mpz_ptr)
    void mpq_set_den(mpq_ptr, mpz_ptr)
    void mpq_canonicalize(mpq_ptr)
    void mpq_add(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_sub(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_mul(mpq_ptr, mpq_ptr, mpq_ptr)
    int mpq_sgn(mpq_ptr)
    mpz_ptr mpq_numref(mpq_ptr)
    mpz_ptr mpq_denref(mpq_ptr)
    void mp_get_memory_functions(void *(**)(size_t), void *(**)(void *, size_t, size_t),
                                 void (**)(void *, size_t))


cdef long _SMALL = 1L << 62


cdef void _set_mpz(mpz_ptr z, object v):
    v = int(v)
    if -_SMALL < v < _SMALL:
        mpz_set_si(z, <long> v)
    else:
        mpz_set_str(z, format(v, "x").encode(), 16)


cdef object _get_mpz(mpz_ptr z):
    cdef char* buf
    cdef void (*freefunc)(void *, size_t) noexcept
    if mpz_fits_slong_p(z):
        return mpz_get_si(z)
    buf = mpz_get_str(NULL, 16, z)
    try:
        return int(buf.decode(), 16)
    finally:
        mp_get_memory_functions(NULL, NULL, &freefunc)
        freefunc(buf, len(buf) + 1)


cdef void _set_mpq(mpq_ptr q, object v):
    _set_mpz(mpq_numref(q), v.numerator)
    _set_mpz(mpq_denref(q), v.denominator)


cdef object _get_mpq(mpq_ptr q):
    return _mpq(_get_mpz(mpq_numref(q)), _get_mpz(mpq_denref(q)))


cdef int _slot_bits(list items, int nvar, int limit):
    """Bits per exponent slot, or 0 when the packed key would overflow."""
    cdef int bits = 64 // nvar
    cdef int top = limit
    for exps, _ in items:
        for e in exps:
            if e > top:
                top = e
    if bits >= 63 or top < (1 << bits):
        return bits
    return 0


cdef class _Packed:
    """Exponent rows, packed keys and degrees of a term list."""

    cdef int[:, ::1] e
    cdef uint64_t[::1] key
    cdef int[::1] deg
    cdef list coefs
    cdef Py_ssize_t size

    def __init__(self, list items, int nvar, int bits, bint by_degree):
        if by_degree:
            items = sorted(items, key=lambda t: sum(t[0]))
        self.size = len(items)
        e_np = np.zeros((max(self.size, 1), nvar), dtype=np.intc)
        self.e = e_np
        self.key = np.zeros(max(self.size, 1), dtype=np.uint64)
        self.deg = np.zeros(max(self.size, 1), dtype=np.intc)
        self.coefs = [c for _, c in items]
        cdef Py_ssize_t i
        cdef int j, d
        cdef uint64_t k
        for i in range(self.size):
            exps = items[i][0]
            k = 0
            d = 0
            for j in range(nvar):
                self.e[i, j] = exps[j]
                d += exps[j]
                k |= (<uint64_t> exps[j]) << (bits * j)
            self.key[i] = k
            self.deg[i] = d


cdef tuple _unpack(uint64_t key, int nvar, int bits):
    cdef uint64_t mask = ((<uint64_t> 1) << bits) - 1
    return tuple([<int> ((key >> (bits * j)) & mask) for j in range(nvar)])


cdef dict _bracket_float(_Packed A, _Packed B, int n, int order, int bits):
    cdef int nvar = 2 * n
    cdef Py_ssize_t na = A.size, nb = B.size, i, k
    cdef int j, f, lim
    cdef double complex* ca = <double complex*> malloc(max(na, 1) * sizeof(double complex))
    cdef double complex* cb = <double complex*> malloc(max(nb, 1) * sizeof(double complex))
    cdef uint64_t dec[32]
    cdef unordered_map[uint64_t, double complex] acc
    cdef double complex prod
    cdef bint have
    cdef uint64_t s
    cdef int[:, ::1] ea = A.e, eb = B.e
    cdef uint64_t[::1] ka = A.key, kb = B.key
    cdef int[::1] da = A.deg, db = B.deg
    try:
        for i in range(na):
            ca[i] = A.coefs[i]
        for i in range(nb):
            cb[i] = B.coefs[i]
        for j in range(n):
            dec[j] = ((<uint64_t> 1) << (bits * j)) + ((<uint64_t> 1) << (bits * (n + j)))
        with nogil:
            for i in range(na):
                lim = order + 2 - da[i]
                for k in range(nb):
                    if db[k] > lim:
                        break
                    have = False
                    s = ka[i] + kb[k]
                    for j in range(n):
                        f = ea[i, j] * eb[k, n + j] - ea[i, n + j] * eb[k, j]
                        if f != 0:
                            if not have:
                                prod = ca[i] * cb[k]
                                have = True
                            acc[s - dec[j]] += f * prod
    finally:
        free(ca)
        free(cb)
    cdef dict out = {}
    for kv in acc:
        if kv.second != 0:
            out[_unpack(kv.first, nvar, bits)] = kv.second
    return out


cdef dict _bracket_exact(_Packed A, _Packed B, int n, int order, int bits):
    cdef int nvar = 2 * n
    cdef Py_ssize_t na = A.size, nb = B.size, i, k, slot
    cdef int j, f, lim
    cdef mpq_t* ca = <mpq_t*> malloc(max(na, 1) * 2 * sizeof(mpq_t))
    cdef mpq_t* cb = <mpq_t*> malloc(max(nb, 1) * 2 * sizeof(mpq_t))
    cdef vector[__mpq_struct] sums
    cdef unordered_map[uint64_t, Py_ssize_t] index
    cdef unordered_map[uint64_t, Py_ssize_t].iterator it
    cdef mpq_t pre, pim, t1, t2, fq
    cdef __mpq_struct blank
    cdef bint have, real = True
    cdef uint64_t dec[32]
    cdef vector[char] areal = vector[char](max(na, 1))
    cdef vector[char] breal = vector[char](max(nb, 1))
    cdef uint64_t s, key
    for i in range(2 * na):
        mpq_init(ca[i])
    for i in range(2 * nb):
        mpq_init(cb[i])
    mpq_init(pre)
    mpq_init(pim)
    mpq_init(t1)
    mpq_init(t2)
    mpq_init(fq)
    try:
        for i in range(na):
            c = A.coefs[i]
            _set_mpq(ca[2 * i], c.re)
            _set_mpq(ca[2 * i + 1], c.im)
            areal[i] = not c.im
        for i in range(nb):
            c = B.coefs[i]
            _set_mpq(cb[2 * i], c.re)
            _set_mpq(cb[2 * i + 1], c.im)
            breal[i] = not c.im
        for j in range(n):
            dec[j] = ((<uint64_t> 1) << (bits * j)) + ((<uint64_t> 1) << (bits * (n + j)))
        for i in range(na):
            lim = order + 2 - A.deg[i]
            for k in range(nb):
                if B.deg[k] > lim:
                    break
                have = False
                s = A.key[i] + B.key[k]
                for j in range(n):
                    f = A.e[i, j] * B.e[k, n + j] - A.e[i, n + j] * B.e[k, j]
                    if f == 0:
                        continue
                    if not have:
                        # (ar + i ai)(br + i bi); real inputs skip the imaginary part
                        real = areal[i] and breal[k]
                        mpq_mul(pre, ca[2 * i], cb[2 * k])
                        if not real:
                            mpq_mul(t2, ca[2 * i + 1], cb[2 * k + 1])
                            mpq_sub(pre, pre, t2)
                            mpq_mul(t1, ca[2 * i], cb[2 * k + 1])
                            mpq_mul(t2, ca[2 * i + 1], cb[2 * k])
                            mpq_add(pim, t1, t2)
                        have = True
                    key = s - dec[j]
                    it = index.find(key)
                    if it == index.end():
                        slot = sums.size()
                        index[key] = slot
                        sums.push_back(blank)
                        sums.push_back(blank)
                        mpq_init(&sums[slot])
                        mpq_init(&sums[slot + 1])
                    else:
                        slot = deref(it).second
                    mpq_set_si(fq, f, 1)
                    mpq_mul(t1, fq, pre)
                    mpq_add(&sums[slot], &sums[slot], t1)
                    if not real:
                        mpq_mul(t1, fq, pim)
                        mpq_add(&sums[slot + 1], &sums[slot + 1], t1)
        out = {}
        for kv in index:
            slot = kv.second
            if mpq_sgn(&sums[slot]) or mpq_sgn(&sums[slot + 1]):
                out[_unpack(kv.first, nvar, bits)] = GaussQ._raw(_get_mpq(&sums[slot]),
                                                                 _get_mpq(&sums[slot + 1]))
        return out
    finally:
        for i in range(2 * na):
            mpq_clear(ca[i])
        for i in range(2 * nb):
            mpq_clear(cb[i])
        for i in range(<Py_ssize_t> sums.size()):
            mpq_clear(&sums[i])
        mpq_clear(pre)
        mpq_clear(pim)
        mpq_clear(t1)
        mpq_clear(t2)
        mpq_clear(fq)
        free(ca)
        free(cb)


def bracket(list a_items, list b_items, int n, int order):
    """Truncated Poisson bracket of two term lists (see ``_kernels_py.bracket``).

    Exact coefficients are accumulated as GMP rationals, float ones as C
    complex doubles.  Falls back to the Python kernel when packed exponent
    keys would not fit in 64 bits.
    """
    cdef int nvar = 2 * n
    if not a_items or not b_items:
        return {}
    cdef int bits = _slot_bits(a_items, nvar, order + 2)
    if bits:
        bits = min(bits, _slot_bits(b_items, nvar, order + 2) or 0)
    exact = isinstance(a_items[0][1], GaussQ)
    if not bits or nvar > 32 or not (exact or isinstance(a_items[0][1], complex)):
        from birkhoff._kernels_py import bracket as slow
        return slow(a_items, b_items, n, order)
    A = _Packed(a_items, nvar, bits, False)
    B = _Packed(b_items, nvar, bits, True)
    if exact:
        return _bracket_exact(A, B, n, order, bits)
    return _bracket_float(A, B, n, order, bits)


cdef inline void _powers(const double complex[:, ::1] z, Py_ssize_t p, Py_ssize_t nvar, int top,
                         double complex* pw) noexcept nogil:
    cdef Py_ssize_t v
    cdef int d
    for v in range(nvar):
        pw[v * (top + 1)] = 1
        for d in range(1, top + 1):
            pw[v * (top + 1) + d] = pw[v * (top + 1) + d - 1] * z[p, v]


def eval_batch(exps, coefs, Z):
    """Values of one polynomial at many points (complex double)."""
    cdef const int[:, ::1] e = np.ascontiguousarray(exps, dtype=np.intc).reshape(-1, np.shape(Z)[1])
    cdef const double complex[::1] c = np.ascontiguousarray(coefs, dtype=complex)
    cdef const double complex[:, ::1] z = np.ascontiguousarray(Z, dtype=complex)
    cdef Py_ssize_t npts = z.shape[0], nterms = e.shape[0], nvar = z.shape[1]
    cdef Py_ssize_t p, t, v
    cdef int top = int(np.max(exps)) if nterms else 0
    cdef double complex acc, mono
    out_np = np.zeros(npts, dtype=complex)
    cdef double complex[::1] out = out_np
    if nterms == 0:
        return out_np
    cdef double complex* pw = <double complex*> malloc(nvar * (top + 1) * sizeof(double complex))
    try:
        with nogil:
            for p in range(npts):
                _powers(z, p, nvar, top, pw)
                acc = 0
                for t in range(nterms):
                    mono = c[t]
                    for v in range(nvar):
                        mono = mono * pw[v * (top + 1) + e[t, v]]
                    acc = acc + mono
                out[p] = acc
    finally:
        free(pw)
    return out_np


def eval_jac(exps, coefs, Z):
    """Values and gradients of one polynomial at many points."""
    cdef const int[:, ::1] e = np.ascontiguousarray(exps, dtype=np.intc).reshape(-1, np.shape(Z)[1])
    cdef const double complex[::1] c = np.ascontiguousarray(coefs, dtype=complex)
    cdef const double complex[:, ::1] z = np.ascontiguousarray(Z, dtype=complex)
    cdef Py_ssize_t npts = z.shape[0], nterms = e.shape[0], nvar = z.shape[1]
    cdef Py_ssize_t p, t, v
    cdef int top = int(np.max(exps)) if nterms else 0
    cdef double complex run
    vals_np = np.zeros(npts, dtype=complex)
    grad_np = np.zeros((npts, nvar), dtype=complex)
    cdef double complex[::1] vals = vals_np
    cdef double complex[:, ::1] grad = grad_np
    if nterms == 0:
        return vals_np, grad_np
    cdef double complex* pw = <double complex*> malloc(nvar * (top + 1) * sizeof(double complex))
    # pre[v] = product of factors before v, suf[v] = product from v on
    cdef double complex* pre = <double complex*> malloc((nvar + 1) * sizeof(double complex))
    cdef double complex* suf = <double complex*> malloc((nvar + 1) * sizeof(double complex))
    try:
        with nogil:
            for p in range(npts):
                _powers(z, p, nvar, top, pw)
                for t in range(nterms):
                    pre[0] = c[t]
                    for v in range(nvar):
                        pre[v + 1] = pre[v] * pw[v * (top + 1) + e[t, v]]
                    suf[nvar] = 1
                    for v in range(nvar - 1, -1, -1):
                        suf[v] = suf[v + 1] * pw[v * (top + 1) + e[t, v]]
                    vals[p] = vals[p] + pre[nvar]
                    for v in range(nvar):
                        if e[t, v] > 0:
                            run = pre[v] * e[t, v] * pw[v * (top + 1) + e[t, v] - 1] * suf[v + 1]
                            grad[p, v] = grad[p, v] + run
    finally:
        free(pw)
        free(pre)
        free(suf)
    return vals_np, grad_np
