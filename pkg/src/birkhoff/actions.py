"""Action functions from period integrals over projected circle orbits.

Pipeline for one base point ``z``:

1. flow the approximate circle action: ``Phi^{-1}(R_t Phi(z))`` where
   ``Phi`` is the truncated normalizing map and ``R_t`` the linear flow of
   ``i F^(k)``;
2. project each sample back onto the fiber ``G = G(z)`` by Newton steps
   that move orthogonally to ``ker DG`` (pseudoinverse);
3. integrate ``beta = sum x_j dy_j`` over the closed curve, divided by 2*pi.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (DegenerateCurve, DimensionMismatch, NonConvergence, OutOfRadius,
                     RegularityViolation, ValidationError)
from .normalizer import transform_function
from .series import (FORWARD, INVERSE, TruncatedSeries, evaluate_many, gradient_many,
                     poisson_bracket)

TWO_PI = 2.0 * np.pi


def _env_threads() -> int:
    try:
        return max(1, int(os.environ.get("BIRKHOFF_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ActionConfig:
    nsteps: int = 256
    tol: float = 1e-12
    max_iter: int = 50
    regularity_floor: float = 1e-8
    radius: float = 0.25
    rcond: float = 1e-12
    threads: int = field(default_factory=_env_threads)


class ClosedCurve:
    """Samples ``z(t_i)``, ``t_i = 2 pi i / N``, implicitly periodic."""

    MIN_STEPS = 16

    def __init__(self, samples, displacement=None, iterations=None, check_gaps=True):
        samples = np.array(samples, dtype=complex)
        if samples.ndim != 2 or samples.shape[1] % 2:
            raise DegenerateCurve("samples must have shape (N, 2n)")
        N = samples.shape[0]
        if N < self.MIN_STEPS or N % 2:
            raise DegenerateCurve(f"need an even number of at least {self.MIN_STEPS} samples, got {N}")
        if not np.all(np.isfinite(samples)):
            raise DegenerateCurve("non-finite curve samples")
        if check_gaps:
            gaps = np.linalg.norm(np.roll(samples, -1, axis=0) - samples, axis=1)
            if gaps.max() > 4.0 * gaps.mean() + 1e-300:
                raise DegenerateCurve("curve samples are unevenly spaced (max gap > 4x mean gap)")
        samples.setflags(write=False)
        self.samples = samples
        self.displacement = displacement
        self.iterations = iterations

    @property
    def nsteps(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1] // 2

    def reversed(self) -> "ClosedCurve":
        """Same cycle traversed backwards (``t -> -t``)."""
        return ClosedCurve(np.roll(self.samples[::-1], 1, axis=0), check_gaps=False)


class MomentumMap:
    """Float first integrals ``(G_1 = H, ..., G_n)`` with vanishing pairwise brackets."""

    def __init__(self, functions, tol: float = 1e-10):
        funcs = tuple(f.to_float() for f in functions)
        if not funcs:
            raise ValidationError("momentum map needs at least one function")
        n = funcs[0].n
        if any(f.n != n for f in funcs):
            raise DimensionMismatch("momentum map components live in different spaces")
        if len(funcs) != n:
            raise ValidationError(f"need n = {n} functions, got {len(funcs)}")
        scale = max(1.0, max(f.max_abs_coef() for f in funcs))
        for i in range(n):
            for j in range(i + 1, n):
                br = poisson_bracket(funcs[i], funcs[j])
                if br.max_abs_coef() > tol * scale * scale:
                    raise ValidationError(
                        f"components {i + 1} and {j + 1} do not Poisson-commute "
                        f"(max coefficient {br.max_abs_coef():.3e})")
        self.functions = funcs
        self.n = n

    def __call__(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        return np.stack([evaluate_many(f, Z) for f in self.functions], axis=1)

    def value_and_jacobian(self, Z):
        """``(values (N, n), jacobians (N, n, 2n))``."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        vals, jacs = zip(*(gradient_many(f, Z) for f in self.functions))
        return np.stack(vals, axis=1), np.stack(jacs, axis=1)


class CoordinateMap:
    """Truncated normalizing map ``Phi_m`` and its inverse as polynomial maps."""

    def __init__(self, gens, n: int, order: int):
        self.gens = tuple(gens)
        self.n = n
        self.order = order

    def _components(self, direction):
        out = []
        for i in range(2 * self.n):
            coord = TruncatedSeries.variable(self.n, i, self.order, exact=True)
            if self.gens and not self.gens[0].exact:
                coord = coord.to_float()
            out.append(transform_function(coord, self.gens, direction, self.order).to_float())
        return tuple(out)

    @cached_property
    def forward(self):
        """Components of ``Phi_m``: ``z -> (x_(m), y_(m))``."""
        return self._components(INVERSE)

    @cached_property
    def inverse(self):
        return self._components(FORWARD)

    @property
    def is_identity(self) -> bool:
        return all(g.is_zero() for g in self.gens)

    @staticmethod
    def _apply(components, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        return np.stack([evaluate_many(c, Z) for c in components], axis=1)

    def __call__(self, Z):
        return Z if self.is_identity else self._apply(self.forward, Z)

    def inv(self, Z):
        return Z if self.is_identity else self._apply(self.inverse, Z)


def linear_circle_flow(weights, t, z):
    """Time-``t`` flow of the real part of ``X_{iF}``, ``F = sum w_j x_j y_j``.

    ``x_j -> x_j exp(-i w_j t)``, ``y_j -> y_j exp(i w_j t)``.  ``t`` may be
    an array, giving one row per time.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if z.shape[0] != 2 * n:
        raise DimensionMismatch(f"point has {z.shape[0]} coordinates for {n} weights")
    t = np.asarray(t, dtype=float)
    phase = np.exp(1j * np.multiply.outer(t, w))
    x = z[:n] / phase
    y = z[n:] * phase
    return np.concatenate([x, y], axis=-1)


def _check_point(z, n, radius):
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != 2 * n:
        raise DimensionMismatch(f"point has {z.shape[0]} coordinates, expected {2 * n}")
    if not np.all(np.isfinite(z)):
        raise OutOfRadius("non-finite base point")
    if np.linalg.norm(z) > radius:
        raise OutOfRadius(f"|z| = {np.linalg.norm(z):.3g} exceeds the working radius {radius:g}")
    return z


def normalized_circle_orbit(z, weights, gens=(), nsteps: int = 256, order: int | None = None,
                            cmap: CoordinateMap | None = None, radius: float = np.inf) -> ClosedCurve:
    """Closed orbit through ``z`` of the circle action generated by ``F^(k)_m``.

    Samples ``Phi^{-1}(R_t Phi(z))``, shifted by the constant
    ``z - Phi^{-1}(Phi(z))`` so the curve starts exactly at ``z`` (the shift
    is of the order of the truncation error).
    """
    n = len(weights)
    z = _check_point(z, n, radius)
    if cmap is None:
        gens = tuple(gens)
        if order is None:
            order = max((g.order for g in gens), default=2)
        cmap = CoordinateMap(gens, n, order)
    t = TWO_PI * np.arange(nsteps) / nsteps
    w0 = cmap(z.reshape(1, -1))[0]
    W = linear_circle_flow(weights, t, w0)
    Z = cmap.inv(W)
    Z = Z + (z - cmap.inv(w0.reshape(1, -1))[0])
    Z[0] = z
    if not np.all(np.isfinite(Z)):
        raise OutOfRadius("evaluation overflow along the orbit; reduce |z|")
    return ClosedCurve(Z)


def regularity_diagnostic(G: MomentumMap, z):
    """``(min singular value of DG(z), product of singular values)``."""
    _, J = G.value_and_jacobian(np.asarray(z, dtype=complex).reshape(1, -1))
    s = np.linalg.svd(J[0], compute_uv=False)
    return float(s.min()), float(np.prod(s))


def _newton_step(G, W, target, rcond):
    vals, J = G.value_and_jacobian(W)
    res = vals - target
    return res, np.einsum("pij,pj->pi", np.linalg.pinv(J, rcond=rcond), res)


def project_to_fiber(curve: ClosedCurve, G: MomentumMap, target, tol: float = 1e-12,
                     max_iter: int = 50, regularity_floor: float = 1e-8, rcond: float = 1e-12,
                     threads: int = 1) -> ClosedCurve:
    """Newton/least-squares projection of every sample onto ``G = target``.

    Each step is ``w <- w - DG(w)^+ (G(w) - target)``, which moves in the
    orthogonal complement of ``ker DG``.  All samples take the same number
    of steps (at least one) so the projected curve stays smooth;
    ``iterations`` records when each sample first met ``tol``.
    """
    target = np.asarray(target, dtype=complex).reshape(-1)
    if target.shape[0] != G.n or curve.n != G.n:
        raise DimensionMismatch("target, curve and momentum map dimensions disagree")
    Z = curve.samples
    _, J = G.value_and_jacobian(Z)
    smin = np.linalg.svd(J, compute_uv=False).min(axis=1)
    if smin.min() < regularity_floor:
        raise RegularityViolation(
            f"min singular value of DG is {smin.min():.3e} < floor {regularity_floor:g}; "
            "curve passes too close to the singular locus")
    chunks = [c for c in np.array_split(np.arange(Z.shape[0]), max(1, threads)) if c.size]
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 and len(chunks) > 1 else None
    W = Z.copy()
    iters = np.zeros(Z.shape[0], dtype=int)
    converged = np.zeros(Z.shape[0], dtype=bool)
    try:
        # every sample takes the same number of steps so the curve stays smooth
        for it in range(max_iter + 1):
            if pool is None:
                parts = [_newton_step(G, W[c], target, rcond) for c in chunks]
            else:
                parts = list(pool.map(lambda c: _newton_step(G, W[c], target, rcond), chunks))
            res = np.concatenate([p[0] for p in parts])
            ok = np.linalg.norm(res, axis=1) <= tol
            iters[ok & ~converged] = it
            converged |= ok
            if converged.all() and it >= 1:
                break
            if it == max_iter:
                raise NonConvergence(
                    f"projection did not reach tolerance {tol:g} within {max_iter} iterations; "
                    "point may be close to the singular locus")
            W = W - np.concatenate([p[1] for p in parts])
    finally:
        if pool is not None:
            pool.shutdown()
    disp = np.linalg.norm(W - Z, axis=1)
    return ClosedCurve(W, displacement=disp, iterations=iters)


def _derivative(Y):
    N = Y.shape[0]
    if N >= 64:
        k = np.fft.fftfreq(N, d=1.0 / N)
        k[N // 2] = 0.0
        return np.fft.ifft(1j * k[:, None] * np.fft.fft(Y, axis=0), axis=0)
    h = TWO_PI / N
    return (np.roll(Y, -1, axis=0) - np.roll(Y, 1, axis=0)) / (2.0 * h)


def period_integral(curve: ClosedCurve) -> complex:
    """``(1/2pi) * closed integral of sum_j x_j dy_j`` (trapezoidal rule).

    Derivatives along the curve are spectral for ``N >= 64`` and centered
    differences below.
    """
    if not isinstance(curve, ClosedCurve):
        curve = ClosedCurve(curve)
    n = curve.n
    X = curve.samples[:, :n]
    dY = _derivative(curve.samples[:, n:])
    integrand = np.sum(X * dY, axis=1)
    total = 0j
    for v in integrand:  # fixed summation order
        total += v
    return complex(total / curve.nsteps)


@dataclass(frozen=True)
class ActionResult:
    value: complex
    orbit: ClosedCurve
    projected: ClosedCurve
    max_residual: float
    max_displacement: float
    min_singular: float


def compute_action(z, weights, gens, G: MomentumMap, config: ActionConfig = ActionConfig(),
                   cmap: CoordinateMap | None = None, order: int | None = None) -> ActionResult:
    z = _check_point(z, G.n, config.radius)
    orbit = normalized_circle_orbit(z, weights, gens, config.nsteps, order=order, cmap=cmap)
    target = G(z.reshape(1, -1))[0]
    proj = project_to_fiber(orbit, G, target, config.tol, config.max_iter,
                            config.regularity_floor, config.rcond, config.threads)
    residual = float(np.linalg.norm(G(proj.samples) - target, axis=1).max())
    _, J = G.value_and_jacobian(proj.samples)
    smin = float(np.linalg.svd(J, compute_uv=False).min())
    return ActionResult(period_integral(proj), orbit, proj, residual,
                        float(proj.displacement.max()), smin)


def action_function(z, weights, gens, G: MomentumMap, config: ActionConfig = ActionConfig(),
                    cmap: CoordinateMap | None = None, order: int | None = None) -> complex:
    """Period integral of ``beta`` over the projected circle orbit through ``z``."""
    return compute_action(z, weights, gens, G, config, cmap, order).value


def hamiltonian_flow(F: TruncatedSeries, z, t: float, rtol: float = 1e-13, atol: float = 1e-16):
    """Numerically integrate ``zdot = X_F(z)`` (real time ``t``) from ``z``."""
    F = F.to_float()
    n = F.n
    z = np.asarray(z, dtype=complex).reshape(-1)

    def rhs(_, w):
        _, g = gradient_many(F, w.reshape(1, -1))
        g = g[0]
        return np.concatenate([-g[n:], g[:n]])

    sol = solve_ivp(rhs, (0.0, t), z, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise NonConvergence(f"flow integration failed: {sol.message}")
    return sol.y[:, -1]


def order_estimate(err_small: float, r_small: float, err_large: float, r_large: float) -> float:
    """Slope of ``log(err)`` against ``log(r)`` from two radii."""
    return float(np.log(err_large / err_small) / np.log(r_large / r_small))
