
import numpy as np
import pytest
from scipy.optimize import minimize

from conftest import random_directions, scan_from
from oracles import central_gradient, normal_equations_ls
from radar_egovel import (
    LossSpec,
    RadarScan,
    RankDeficient,
    SolverConfig,
    objective_and_gradient,
    solve_linear_ls,
    solve_robust,
)
from radar_egovel.optimize import line_search_wolfe, minimize_bfgs
from radar_egovel.synth import SceneSpec, generate_scan

ROBUST = [
    LossSpec("huber", c=0.1),
    LossSpec("cauchy", c=0.2),
    LossSpec("truncated_l2", truncation=0.3),
    LossSpec("barron", c=0.2, alpha=1.0),
    LossSpec("barron", c=0.2, alpha=-2.0),
]


def test_linear_ls_exact(rng):
    v = np.array([1.0, -2.0, 0.5])
    scan = scan_from(random_directions(rng, 30), v)
    res = solve_linear_ls(scan)
    np.testing.assert_allclose(res.velocity, v, atol=1e-10)
    assert res.converged and res.gradient_norm < 1e-9


def test_linear_ls_square_system():
    scan = RadarScan.from_arrays(0.0, np.eye(3) * 5, [-1, -2, -3])
    np.testing.assert_allclose(solve_linear_ls(scan).velocity, [1, 2, 3], atol=1e-14)


def test_linear_ls_matches_normal_equations(rng):
    scan, _ = generate_scan(SceneSpec(n_static=200, ego_velocity=(3, 1, -0.5), doppler_noise_sigma=0.05, seed=9))
    w = rng.uniform(0.1, 1.0, len(scan))
    res = solve_linear_ls(scan, None, w)
    ref = normal_equations_ls(scan.directions, scan.dopplers, w)
    np.testing.assert_allclose(res.velocity, ref, atol=1e-8)
    assert res.gradient_norm < 1e-9


def test_linear_ls_rank_deficient():
    ang = np.linspace(0, np.pi, 10)
    planar = np.column_stack([np.cos(ang), np.sin(ang), np.zeros_like(ang)])
    scan = scan_from(planar, (1, 1, 0))
    with pytest.raises(RankDeficient):
        solve_linear_ls(scan)
    with pytest.raises(RankDeficient):
        solve_robust(scan, None, LossSpec("cauchy"))


def test_linear_ls_respects_mask(rng):
    u = random_directions(rng, 40)
    offsets = np.r_[np.zeros(30), np.full(10, 3.0)]
    scan = scan_from(u, (0.5, 0.5, 0.5), offsets=offsets)
    mask = offsets == 0
    np.testing.assert_allclose(solve_linear_ls(scan, mask).velocity, (0.5, 0.5, 0.5), atol=1e-12)


def test_objective_single_detection():
    scan = RadarScan.from_arrays(0.0, [[2.0, 0, 0]], [0.0])
    f, g = objective_and_gradient(scan, None, LossSpec("l2"), (1.0, 0, 0))
    assert f == 0.5
    np.testing.assert_array_equal(g, [1.0, 0, 0])


def test_gradient_zero_at_truth(rng):
    v = np.array([0.3, -1.2, 2.0])
    scan = scan_from(random_directions(rng, 25), v)
    for loss in ROBUST + [LossSpec("l2")]:
        _, g = objective_and_gradient(scan, None, loss, v)
        assert np.linalg.norm(g) < 1e-12


@pytest.mark.parametrize("loss", ROBUST + [LossSpec("l2"), LossSpec("barron", c=1.0, alpha=0.0)], ids=str)
def test_gradient_finite_differences(loss, rng):
    scan, _ = generate_scan(SceneSpec(n_static=40, n_dynamic=10, ego_velocity=(2, 0, 1), doppler_noise_sigma=0.05, seed=4))
    w = rng.uniform(0.2, 1.0, len(scan))
    for _ in range(20):
        v = rng.normal([2, 0, 1], 0.5)
        _, g = objective_and_gradient(scan, None, loss, v, w)
        fd = central_gradient(lambda x: objective_and_gradient(scan, None, loss, x, w)[0], v)
        assert np.linalg.norm(fd - g) <= 1e-6 * np.linalg.norm(g)


def test_robust_l2_matches_linear(rng):
    scan, _ = generate_scan(SceneSpec(n_static=60, ego_velocity=(1, 2, 3), doppler_noise_sigma=0.05, seed=1))
    lin = solve_linear_ls(scan)
    rob = solve_robust(scan, None, LossSpec("l2"), initial=(0, 0, 0))
    np.testing.assert_allclose(rob.velocity, lin.velocity, atol=1e-6)
    assert rob.converged


def test_cauchy_without_rejection():
    v_true = np.array([4.0, -1.0, 0.5])
    spec = SceneSpec(
        n_static=90, n_dynamic=10, ego_velocity=tuple(v_true), doppler_noise_sigma=0.05,
        dynamic_offset_interval=(1.0, 5.0), seed=21,
    )
    scan, labels = generate_scan(spec)
    reference = solve_linear_ls(scan, labels).velocity
    res = solve_robust(scan, None, LossSpec("cauchy", c=0.2), initial=v_true + 0.1)
    assert np.all(np.abs(res.velocity - v_true) < 0.05)
    assert np.all(np.abs(res.velocity - reference) < 0.05)


@pytest.mark.parametrize("loss", ROBUST, ids=str)
def test_start_at_optimum(loss, rng):
    v = np.array([1.0, 1.0, -1.0])
    scan = scan_from(random_directions(rng, 30), v)
    f0, _ = objective_and_gradient(scan, None, loss, v)
    res = solve_robust(scan, None, loss, initial=v)
    assert res.iterations <= 2
    assert res.objective == f0
    np.testing.assert_allclose(res.velocity, v, atol=1e-12)


@pytest.mark.parametrize("loss", ROBUST, ids=str)
def test_monotone_descent(loss):
    scan, _ = generate_scan(SceneSpec(n_static=70, n_dynamic=30, ego_velocity=(5, 0, 0), doppler_noise_sigma=0.05, seed=3))
    res = solve_robust(scan, None, loss, initial=(3.0, 1.0, -1.0))
    assert len(res.objective_history) == res.iterations + 1
    assert np.all(np.diff(res.objective_history) <= 0)


def test_translation_consistency(rng):
    u = random_directions(rng, 50)
    v = np.array([1.0, 2.0, -1.0])
    delta = np.array([0.25, -0.5, 2.0])
    noise = rng.normal(0, 0.05, 50)
    a = scan_from(u, v, offsets=noise)
    b = scan_from(u, v + delta, offsets=noise)
    shift = solve_linear_ls(b).velocity - solve_linear_ls(a).velocity
    np.testing.assert_allclose(shift, delta, atol=1e-9)


@pytest.mark.parametrize("loss", [LossSpec("l2"), LossSpec("huber", c=0.1)], ids=str)
def test_convex_solution_independent_of_start(loss):
    scan, _ = generate_scan(SceneSpec(n_static=60, n_dynamic=20, ego_velocity=(2, 2, 0), doppler_noise_sigma=0.1, seed=8))
    sols = [solve_robust(scan, None, loss, initial=x0).velocity for x0 in ((0, 0, 0), (10, -5, 3), (-3, 8, 1))]
    for s in sols[1:]:
        np.testing.assert_allclose(s, sols[0], atol=1e-6)


@pytest.mark.parametrize("loss", [LossSpec("cauchy"), LossSpec("barron", alpha=1.0), LossSpec("huber")], ids=str)
def test_bfgs_agrees_with_scipy(loss):
    scan, _ = generate_scan(SceneSpec(n_static=80, n_dynamic=20, ego_velocity=(1, -3, 0.5), doppler_noise_sigma=0.05, seed=13))
    x0 = np.array([1.2, -2.8, 0.4])
    res = solve_robust(scan, None, loss, initial=x0)
    ref = minimize(
        lambda v: objective_and_gradient(scan, None, loss, v), x0, jac=True, method="BFGS", options={"gtol": 1e-10}
    )
    np.testing.assert_allclose(res.velocity, ref.x, atol=1e-6)
    assert res.converged


def test_bfgs_rosenbrock():
    def fg(x):
        a, b = x
        f = (1 - a) ** 2 + 100 * (b - a * a) ** 2
        g = np.array([-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)])
        return f, g

    x, f, g, k, reason, hist = minimize_bfgs(fg, np.array([-1.2, 1.0]), SolverConfig(max_iterations=200))
    np.testing.assert_allclose(x, [1, 1], atol=1e-6)
    assert reason in ("gradient", "step")
    assert np.all(np.diff(hist) <= 0)


def test_line_search_satisfies_wolfe():
    def fg(x):
        return float(x @ x), 2 * x

    x = np.array([3.0, -4.0])
    f0, g0 = fg(x)
    p = -g0
    a, f, g = line_search_wolfe(fg, x, p, f0, g0, 1e-4, 0.9)
    assert f <= f0 + 1e-4 * a * (g0 @ p)
    assert abs(g @ p) <= 0.9 * abs(g0 @ p)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(wolfe_c1=0.9, wolfe_c2=0.1)
    with pytest.raises(ValueError):
        SolverConfig(grad_tolerance=0)
