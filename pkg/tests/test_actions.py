import numpy as np
import pytest

from birkhoff.actions import (ActionConfig, ClosedCurve, CoordinateMap, MomentumMap,
                              action_function, compute_action, hamiltonian_flow,
                              linear_circle_flow, normalized_circle_orbit, order_estimate,
                              period_integral, project_to_fiber, regularity_diagnostic)
from birkhoff.corpus import shear_system
from birkhoff.errors import (DegenerateCurve, DimensionMismatch, NonConvergence, OutOfRadius,
                             RegularityViolation, ValidationError)
from birkhoff.normalizer import normalize, transform_function
from birkhoff.series import INVERSE, TruncatedSeries, evaluate

TWO_PI = 2 * np.pi


def analytic_curve(N, a=0.8):
    # x = 1/(1 - a e^{-it}), y = e^{it}: (1/2pi) int x dy = i a exactly
    t = TWO_PI * np.arange(N) / N
    return np.stack([1 / (1 - a * np.exp(-1j * t)), np.exp(1j * t)], axis=1)


@pytest.fixture(scope="module")
def corpus():
    spec, N0, acts = shear_system()
    res = normalize(spec.H.with_order(8), 8)
    G = MomentumMap(spec.momentum_functions())
    return spec, res, G, CoordinateMap(res.gens, 2, 8)


def test_linear_flow_is_periodic_and_preserves_actions():
    z = np.array([0.1 + 0.02j, -0.03j, 0.05, 0.02 - 0.01j])
    w = (1, 2)
    assert np.allclose(linear_circle_flow(w, TWO_PI, z), z)
    pts = linear_circle_flow(w, np.linspace(0, 3, 7), z)
    assert np.allclose(pts[:, :2] * pts[:, 2:], z[:2] * z[2:])
    with pytest.raises(DimensionMismatch):
        linear_circle_flow((1,), 0.0, z)


def test_period_integral_of_linear_orbit():
    z = np.array([0.1 + 0.2j, 0.05j, -0.07, 0.3])
    w = (1, 2)
    curve = ClosedCurve(linear_circle_flow(w, TWO_PI * np.arange(64) / 64, z))
    expect = 1j * (z[0] * z[2] + 2 * z[1] * z[3])
    assert abs(period_integral(curve) - expect) < 1e-15
    # reversing the orientation flips the sign
    assert abs(period_integral(curve.reversed()) + expect) < 1e-15


def test_period_integral_spectral_convergence():
    # the curve bunches samples near t = 0, so skip the spacing guard
    errs = {N: abs(period_integral(ClosedCurve(analytic_curve(N), check_gaps=False)) - 0.8j)
            for N in (64, 128, 256)}
    assert errs[64] > 1e-9  # not yet resolved at 64 samples
    assert errs[128] < 1e-5 * errs[64]
    assert errs[256] < 1e-15


def test_period_integral_finite_differences_below_64():
    e16 = abs(period_integral(ClosedCurve(analytic_curve(16, 0.3))) - 0.3j)
    e32 = abs(period_integral(ClosedCurve(analytic_curve(32, 0.3))) - 0.3j)
    assert e32 < e16 < 0.05


@pytest.mark.parametrize("N", [8, 15, 17])
def test_closed_curve_sample_count(N):
    with pytest.raises(DegenerateCurve):
        ClosedCurve(np.ones((N, 2)))


def test_closed_curve_rejects_uneven_spacing():
    t = np.concatenate([np.linspace(0, 0.3, 30, endpoint=False), [2.0, 4.0]])
    with pytest.raises(DegenerateCurve):
        ClosedCurve(np.stack([np.exp(-1j * t), np.exp(1j * t)], axis=1))
    with pytest.raises(DegenerateCurve):
        ClosedCurve(np.full((16, 2), np.nan))


def test_momentum_map_requires_commuting_functions():
    H = TruncatedSeries(2, 3, {(1, 0, 1, 0): 1, (0, 1, 0, 1): 2, (2, 0, 0, 1): 1})
    with pytest.raises(ValidationError):
        MomentumMap([H, TruncatedSeries(2, 3, {(0, 1, 0, 1): 1})])
    with pytest.raises(ValidationError):
        MomentumMap([H])


def test_coordinate_maps_are_mutually_inverse(corpus):
    _, res, _, cmap = corpus
    # both maps are truncated at degree 8, so the round trip is exact only to O(|z|^9)
    Z = np.random.default_rng(0).normal(size=(10, 4))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    e1 = np.abs(cmap.inv(cmap(0.01 * Z)) - 0.01 * Z).max()
    e2 = np.abs(cmap.inv(cmap(0.005 * Z)) - 0.005 * Z).max()
    assert e1 < 1e-12 and e2 < e1 / 2 ** 8
    Z *= 0.005
    # Phi pushes F forward: F o Phi = F_m
    F = TruncatedSeries.action(2, (1, 2), 8)
    Fm = transform_function(F, res.gens, INVERSE, 8)
    W = cmap(Z)
    for z, w in zip(Z, W):
        assert abs(evaluate(F, w) - evaluate(Fm, z)) < 1e-16


def test_orbit_starts_at_base_point_and_closes(corpus):
    _, res, _, cmap = corpus
    z = np.array([0.02, 0.01j, -0.015, 0.01])
    orbit = normalized_circle_orbit(z, (1, 2), cmap=cmap, nsteps=64)
    assert np.array_equal(orbit.samples[0], z)
    assert orbit.nsteps == 64


def test_projection_lands_on_fiber(corpus):
    _, res, G, cmap = corpus
    z = np.array([0.03, 0.01, 0.02, -0.025])
    orbit = normalized_circle_orbit(z, (1, 2), cmap=cmap)
    target = G(z)[0]
    proj = project_to_fiber(orbit, G, target)
    assert np.abs(G(proj.samples) - target).max() <= 1e-12
    assert proj.displacement.max() < 1e-6
    assert proj.iterations.max() <= 3


def test_projection_threads_are_deterministic(corpus):
    _, res, G, cmap = corpus
    z = np.array([0.03, 0.01, 0.02, -0.025])
    orbit = normalized_circle_orbit(z, (1, 2), cmap=cmap)
    target = G(z)[0]
    one = project_to_fiber(orbit, G, target, threads=1).samples
    four = project_to_fiber(orbit, G, target, threads=4).samples
    assert np.array_equal(one, four)


def test_projection_errors(corpus):
    _, res, G, cmap = corpus
    z = np.array([0.03, 0.01, 0.02, -0.025])
    orbit = normalized_circle_orbit(z, (1, 2), cmap=cmap)
    with pytest.raises(NonConvergence):
        project_to_fiber(orbit, G, G(z)[0] + 1e-3, max_iter=1)
    # the origin is singular: DG vanishes there
    tiny = ClosedCurve(linear_circle_flow((1, 2), TWO_PI * np.arange(16) / 16, np.full(4, 1e-9)))
    with pytest.raises(RegularityViolation):
        project_to_fiber(tiny, G, G(tiny.samples[:1])[0])


def test_regularity_diagnostic(corpus):
    _, _, G, _ = corpus
    smin, prod = regularity_diagnostic(G, [0.03, 0.01, 0.02, -0.025])
    assert 0 < smin and 0 < prod
    smin0, prod0 = regularity_diagnostic(G, np.zeros(4))
    assert smin0 == 0 and prod0 == 0


def test_action_matches_truncated_integral_and_is_fiber_constant(corpus):
    _, res, G, cmap = corpus
    z = np.array([0.03, 0.01, 0.02, -0.025])
    r = compute_action(z, (1, 2), res.gens, G, cmap=cmap)
    Fm = transform_function(TruncatedSeries.action(2, (1, 2), 8), res.gens, INVERSE, 8)
    assert abs(r.value - 1j * evaluate(Fm, z)) < 1e-6
    w = hamiltonian_flow(G.functions[1], z, 0.4)
    assert abs(action_function(w, (1, 2), res.gens, G, cmap=cmap) - r.value) < 1e-12


def test_action_on_normal_form_is_exact():
    N = TruncatedSeries(2, 4, {(1, 0, 1, 0): 1, (0, 1, 0, 1): 2, (2, 0, 2, 0): 1})
    G = MomentumMap([N, TruncatedSeries(2, 4, {(0, 1, 0, 1): 1})])
    z = np.array([0.1, 0.05j, 0.08, -0.02])
    P = action_function(z, (1, 2), (), G)
    assert abs(P - 1j * (z[0] * z[2] + 2 * z[1] * z[3])) < 1e-15


def test_radius_guard():
    N = TruncatedSeries(1, 2, {(1, 1): 1})
    G = MomentumMap([N])
    with pytest.raises(OutOfRadius):
        action_function([1.0, 1.0], (1,), (), G)
    with pytest.raises(OutOfRadius):
        action_function([np.inf, 0], (1,), (), G, ActionConfig(radius=np.inf))


def test_order_estimate():
    assert order_estimate(1e-12, 0.05, 1e-9, 0.1) == pytest.approx(np.log2(1000))


def test_circle_orbit_of_single_action():
    # (1/2pi) closed integral of x dy along the x1 y1 orbit through (0.1, 0.2) is 0.02 i
    curve = ClosedCurve(linear_circle_flow((1,), TWO_PI * np.arange(256) / 256, np.array([0.1, 0.2])))
    assert abs(period_integral(curve) - 0.02j) < 1e-16


def test_newton_returns_perturbed_points_to_quadratic_fiber():
    G = MomentumMap([TruncatedSeries(1, 2, {(1, 1): 1})])
    z = np.array([0.3 + 0.1j, 0.2 - 0.05j])
    orbit = linear_circle_flow((1,), TWO_PI * np.arange(32) / 32, z)
    grad = np.conj(orbit[:, ::-1])  # gradient of x*y is (y, x)
    eps = 1e-3
    off = ClosedCurve(orbit + eps * grad / np.linalg.norm(grad, axis=1)[:, None])
    target = z[0] * z[1]
    proj = project_to_fiber(off, G, target, tol=1e-12)
    assert np.abs(G(proj.samples)[:, 0] - target).max() <= 1e-12
    assert proj.iterations.max() <= 5
    start = np.abs(G(off.samples)[:, 0] - target).max()
    assert proj.displacement.max() <= 10 * start
