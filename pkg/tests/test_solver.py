import math

import numpy as np
import pytest

from qisdp.errors import InfeasibleState
from qisdp.instance import GeneratorConfig, QipInstance, generate_instance
from qisdp.model import A0, ZERO, ConstraintMatrix, Coord, build_augmented_q, facet_matrix, inner_with
from qisdp.oracle import (
    brute_force_opt,
    check_dual_feasible,
    dense_barrier,
    dense_slack,
    exhaustive_select,
    finite_diff_gradient,
    random_feasible_point,
)
from qisdp.solver import (
    DualPoint,
    SolverConfig,
    SolverState,
    apply_step,
    barrier_value,
    gradient_entry,
    initial_point,
    line_search_1d,
    plane_search_2d,
    read_trace,
    select_coordinate,
    sigma_update,
    solve,
    write_trace,
)
from qisdp.linalg import pd_window

from conftest import random_instance

LOWER = ConstraintMatrix(1, 1.0, 0.5, -1.0)
UPPER = ConstraintMatrix(1, 0.0, 0.0, 1.0)


# -- starting point ---------------------------------------------------------


def test_initial_point_neg_one(neg_one_instance):
    q = build_augmented_q(neg_one_instance)
    y = initial_point(q, neg_one_instance.domains)
    assert y.y0 == pytest.approx(-1.0)
    assert y.facet_y == {Coord(1, 1): pytest.approx(-2.0)}
    np.testing.assert_allclose(dense_slack(neg_one_instance, y), np.eye(2), atol=1e-12)


def test_initial_point_psd_not_pd():
    inst = QipInstance(qhat=np.array([[2.0]]), lhat=np.zeros(1), chat=0.0, domains=[(-1, 1)])
    y = initial_point(build_augmented_q(inst), inst.domains)
    assert y.y0 == pytest.approx(-1.0) and y.facet_y == {}
    np.testing.assert_allclose(dense_slack(inst, y), np.diag([1.0, 2.0]), atol=1e-12)


def test_initial_point_zero_when_pd():
    inst = QipInstance(qhat=np.eye(2), lhat=np.zeros(2), chat=1.0, domains=[(-1, 1)] * 2)
    y = initial_point(build_augmented_q(inst), inst.domains)
    assert y.y0 == 0.0 and y.facet_y == {} and y.bound == 0.0


def test_initial_point_random_feasible(rng):
    for _ in range(30):
        inst = random_instance(rng, int(rng.integers(1, 9)), max_width=5)
        y = initial_point(build_augmented_q(inst), inst.domains)
        assert check_dual_feasible(inst, y, tol=0.0)


# -- barrier / gradient -----------------------------------------------------


def test_barrier_value_identity():
    inst = QipInstance(qhat=np.eye(1), lhat=np.zeros(1), chat=1.0, domains=[(0, 1)])
    state = SolverState(inst, SolverConfig())
    assert barrier_value(state, dense=True) == pytest.approx(0.0, abs=1e-14)
    assert barrier_value(state) == pytest.approx(0.0, abs=1e-14)


def test_barrier_value_from_start(neg_one_instance):
    state = SolverState(neg_one_instance, SolverConfig())
    assert barrier_value(state, dense=True) == pytest.approx(-3.0)
    assert barrier_value(state) == pytest.approx(-3.0)


def test_barrier_value_rejects_infeasible(neg_one_instance):
    state = SolverState(neg_one_instance, SolverConfig())
    state.y0 = 5.0
    with pytest.raises(InfeasibleState):
        barrier_value(state, dense=True)


def test_gradient_entry_examples():
    assert gradient_entry(np.eye(3), 1.0, A0) == 0.0
    W = np.array([[2.0, 0.3], [0.3, 0.7]])
    for j in (-2, -1, 0, 3):
        cm = facet_matrix(Coord(1, j), [(-2, 4)])
        phi = 1.0 - 0.4 * ((1 - j * (j + 1)) * W[0, 0] + (2 * j + 1) * W[0, 1] - W[1, 1])
        assert gradient_entry(W, 0.4, cm) == pytest.approx(phi, rel=1e-14)


def test_gradient_matches_finite_differences(rng):
    worst = 0.0
    for _ in range(40):
        inst = random_instance(rng, int(rng.integers(1, 6)), max_width=4)
        y = random_feasible_point(inst, rng)
        sigma = float(10 ** rng.uniform(-3, 0))
        W = np.linalg.inv(dense_slack(inst, y))
        for c in (ZERO, Coord(1, inst.domains[0][0]), Coord(1, inst.domains[0][1])):
            g = gradient_entry(W, sigma, facet_matrix(c, inst.domains))
            fd = finite_diff_gradient(inst, y, sigma, c)
            worst = max(worst, abs(fd - g) / max(1.0, abs(g)))
    assert worst <= 1e-5


# -- selection --------------------------------------------------------------


def test_select_none_at_identity():
    assert select_coordinate(np.eye(2), 1.0, DualPoint(0.0), [(-1, 1)]) is None


def test_select_matches_exhaustive(rng):
    for _ in range(200):
        inst = random_instance(rng, int(rng.integers(1, 8)), max_width=10)
        y = random_feasible_point(inst, rng, density=float(rng.random()) * 0.5)
        W = np.linalg.inv(dense_slack(inst, y))
        sigma = float(10 ** rng.uniform(-5, 0))
        a = select_coordinate(W, sigma, y, inst.domains)
        b = exhaustive_select(W, sigma, y, inst.domains)
        assert (a is None) == (b is None)
        if a is not None:
            assert a[0] == b[0]
            assert a[1] == pytest.approx(b[1], rel=1e-9, abs=1e-12)


def test_vertex_rounding_candidate():
    # W0i/W00 - 1/2 = -0.2 rounds to 0; only the vertex facet j=0 is reachable
    # inside the wide domain, so the selection must find it.
    W = np.array([[1.0, 0.3], [0.3, 0.2]])
    domains = [(-5, 5)]
    got = select_coordinate(W, 1.0, DualPoint(0.0), domains)
    ref = exhaustive_select(W, 1.0, DualPoint(0.0), domains)
    assert got[0] == ref[0]


# -- searches ---------------------------------------------------------------


def test_line_search_y0():
    s, clamped = line_search_1d(np.eye(2), 0.25, A0)
    assert s == pytest.approx(0.75) and not clamped


def test_line_search_lower_facet():
    s, clamped = line_search_1d(np.eye(2), 0.2, LOWER, -2.0)
    assert s == pytest.approx(0.716515, abs=1e-6) and not clamped
    lo, hi = pd_window(np.eye(2), LOWER)
    assert lo < s < hi


def test_line_search_lower_facet_clamped():
    s, clamped = line_search_1d(np.eye(2), 0.2, LOWER, -0.5)
    assert s == 0.5 and clamped
    grad = 1.0 - 0.2 * (2.5 * s) / (1.0 - 1.25 * s * s)
    assert grad > 0


def test_plane_search_decoupled():
    s0, s, clamped = plane_search_2d(np.eye(2), 0.5, UPPER, -2.0)
    assert (s0, s) == (pytest.approx(0.5), pytest.approx(0.5)) and not clamped


def test_plane_search_decoupled_clamped():
    s0, s, clamped = plane_search_2d(np.eye(2), 0.5, UPPER, -0.2)
    assert s == pytest.approx(0.2) and s0 == pytest.approx(0.5) and clamped


def test_plane_search_rejects_zero_coordinate():
    with pytest.raises(ValueError):
        plane_search_2d(np.eye(2), 0.5, A0, 0.0)


def _random_search_case(rng):
    inst = random_instance(rng, int(rng.integers(1, 6)), max_width=4)
    y = random_feasible_point(inst, rng, density=0.4)
    W = np.linalg.inv(dense_slack(inst, y))
    W = 0.5 * (W + W.T)
    lo, hi = inst.domains[0]
    c = Coord(1, int(rng.integers(lo, hi + 1)))
    return inst, y, W, c


def test_line_search_stationary_on_random_states(rng):
    for _ in range(200):
        inst, y, W, c = _random_search_case(rng)
        sigma = float(10 ** rng.uniform(-4, 0))
        cm = facet_matrix(c, inst.domains)
        s, clamped = line_search_1d(W, sigma, cm, y.value(c))
        lo, hi = pd_window(W, cm)
        assert lo < s < hi
        fy = dict(y.facet_y)
        fy[c] = 0.0 if clamped else fy.get(c, 0.0) + s
        W2 = np.linalg.inv(dense_slack(inst, DualPoint(y.y0, fy)))
        g = gradient_entry(W2, sigma, cm)
        if clamped:
            assert g > 0
        else:
            assert abs(g) <= 1e-7 * (1 + sigma) * 10


def test_plane_search_stationary_on_random_states(rng):
    for _ in range(200):
        inst, y, W, c = _random_search_case(rng)
        sigma = float(10 ** rng.uniform(-4, 0))
        cm = facet_matrix(c, inst.domains)
        s0, s, clamped = plane_search_2d(W, sigma, cm, y.value(c))
        fy = dict(y.facet_y)
        fy[c] = 0.0 if clamped else fy.get(c, 0.0) + s
        slack = dense_slack(inst, DualPoint(y.y0 + s0, fy))
        assert np.linalg.eigvalsh(slack)[0] > 0
        W2 = np.linalg.inv(slack)
        assert abs(gradient_entry(W2, sigma, A0)) <= 1e-6
        g = gradient_entry(W2, sigma, cm)
        if clamped:
            assert g > 0
        else:
            assert abs(g) <= 1e-6


# -- state updates ----------------------------------------------------------


def test_apply_step_zero_only_counts(neg_one_instance):
    state = SolverState(neg_one_instance, SolverConfig())
    W, y0, bound = state.W.copy(), state.y0, state.bound
    apply_step(state, 0, 0.0)
    assert state.iter == 1 and state.y0 == y0 and state.bound == bound
    np.testing.assert_array_equal(state.W, W)


def test_apply_step_bound_accounting_and_inverse(rng):
    inst = random_instance(rng, 4, max_width=3)
    state = SolverState(inst, SolverConfig())
    for _ in range(30):
        k = int(rng.integers(-1, state.index.m))
        if k < 0:
            s = line_search_1d(state.W, 0.5, A0)[0]
            s0 = 0.0
        else:
            s0, s, clamped = plane_search_2d(state.W, 0.5, state.matrix(k), state.y[k])
        before = state.bound
        apply_step(state, k, s, s0, k >= 0 and clamped)
        assert state.bound == pytest.approx(before + s + s0, abs=1e-12)
        assert np.all(state.y <= 0)
        assert state.residual() < 1e-8
        assert check_dual_feasible(inst, state.dual_point())


@pytest.mark.parametrize("sigma, grad, expect", [(1.0, 0.005, 0.25), (2e-5, 0.001, 1e-5), (1.0, 0.5, 1.0)])
def test_sigma_update(neg_one_instance, sigma, grad, expect):
    state = SolverState(neg_one_instance, SolverConfig())
    state.sigma = sigma
    sigma_update(state, grad)
    assert state.sigma == pytest.approx(expect)


# -- full runs --------------------------------------------------------------


@pytest.mark.parametrize("alg", ["cd", "cd2d"])
def test_certified_optima(neg_one_instance, identity_instance, alg):
    cfg = SolverConfig(algorithm=alg, max_iters=5000)
    assert solve(neg_one_instance, cfg).bound == pytest.approx(-1.0, abs=1e-4)
    assert solve(identity_instance, cfg).bound == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize("alg", ["cd", "cd2d"])
def test_weak_duality_small(rng, alg):
    for _ in range(8):
        inst = random_instance(rng, int(rng.integers(2, 7)), max_width=2)
        res = solve(inst, SolverConfig(algorithm=alg))
        opt, _ = brute_force_opt(inst)
        assert res.bound <= opt + 1e-6
        assert check_dual_feasible(inst, res.y)
        assert res.y.bound == pytest.approx(res.bound, abs=1e-9)


def test_invariants_in_debug_mode(rng):
    inst = generate_instance(GeneratorConfig(n=8, p=50, seed=3))
    res = solve(inst, SolverConfig(algorithm="cd2d", debug_check_every=10, refresh_period=50, record_steps=True))
    assert res.debug_checks > 0 and res.feasibility_violations == 0
    assert res.refresh_residuals and max(res.refresh_residuals) <= 1e-6
    iters = [r.iter for r in res.trace]
    assert iters == sorted(set(iters))
    elapsed = [r.elapsed_s for r in res.trace]
    assert all(a <= b for a, b in zip(elapsed, elapsed[1:]))


def test_barrier_monotone_for_fixed_sigma():
    inst = generate_instance(GeneratorConfig(n=10, p=100, seed=1))
    for alg in ("cd", "cd2d"):
        res = solve(inst, SolverConfig(algorithm=alg))
        for a, b in zip(res.trace, res.trace[1:]):
            if a.sigma == b.sigma:
                assert b.barrier >= a.barrier - 1e-9 * (1 + abs(a.barrier))


def test_bound_target_stops_early(neg_one_instance):
    res = solve(neg_one_instance, SolverConfig(bound_target=-1.5))
    assert res.termination_reason == "target" and res.bound >= -1.5
    full = solve(neg_one_instance, SolverConfig())
    assert res.iterations < full.iterations


def test_zero_iterations(neg_one_instance):
    res = solve(neg_one_instance, SolverConfig(max_iters=0))
    assert res.iterations == 0 and res.trace == [] and res.bound == pytest.approx(-3.0)


def test_trace_roundtrip(tmp_path, neg_one_instance):
    res = solve(neg_one_instance, SolverConfig(max_iters=50))
    path = tmp_path / "t.csv"
    write_trace(res.trace, path)
    rows = read_trace(path)
    assert len(rows) == len(res.trace)
    assert float(rows[-1]["bound"]) == res.trace[-1].bound
    assert Coord.parse(rows[0]["coordinate"]) == res.trace[0].coordinate


def test_deterministic_runs():
    inst = generate_instance(GeneratorConfig(n=12, p=50, seed=7))
    a = solve(inst, SolverConfig(algorithm="cd2d"))
    b = solve(inst, SolverConfig(algorithm="cd2d"))
    assert [r.row()[2:] for r in a.trace] == [r.row()[2:] for r in b.trace]


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(algorithm="newton")
    with pytest.raises(ValueError):
        SolverConfig(sigma0=0.0)
    with pytest.raises(ValueError):
        SolverConfig(sigma_shrink=1.5)


def test_sdp_optimum_cross_check():
    cp = pytest.importorskip("cvxpy")
    if "CLARABEL" not in cp.installed_solvers():
        pytest.skip("CLARABEL not available")
    inst = generate_instance(GeneratorConfig(n=6, p=50, seed=11))
    q = build_augmented_q(inst)
    X = cp.Variable((7, 7), symmetric=True)
    cons = [X >> 0, X[0, 0] == 1]
    for i in range(1, 7):
        cons += [X[i, i] >= X[0, i], X[i, i] >= -X[0, i], X[i, i] <= 1]
    opt = cp.Problem(cp.Minimize(cp.trace(q @ X)), cons).solve(solver="CLARABEL")
    res = solve(inst, SolverConfig(algorithm="cd2d", max_iters=20000))
    assert res.bound <= opt + 1e-6
    assert res.bound == pytest.approx(opt, abs=1e-3 * max(1, abs(opt)))


def test_centering_gives_same_bound_in_original_coordinates():
    inst = generate_instance(GeneratorConfig(n=6, p=50, seed=9, domain=(3, 6)))
    a = solve(inst, SolverConfig(algorithm="cd2d", max_iters=20000))
    b = solve(inst, SolverConfig(algorithm="cd2d", max_iters=20000, center_domains=False))
    assert a.bound == pytest.approx(b.bound, abs=1e-4)
    assert all(3 <= c.j <= 6 for c in a.y.facet_y)
    assert all(3 <= r.coordinate.j <= 6 for r in a.trace if not r.coordinate.is_zero)
    assert check_dual_feasible(inst, a.y)
    assert a.bound <= brute_force_opt(inst)[0] + 1e-6
    assert max(a.refresh_residuals, default=0.0) <= 1e-6
