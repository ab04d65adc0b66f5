import numpy as np
import pytest

from conftest import (
    HYPERBOLIC_FACTOR,
    SPHERE_FACTOR,
    flat_grid_field,
    hyperbolic_field,
    sphere_field,
    torus_field,
)
from riemflow.bialternate import bialternate_product
from riemflow.charts import GridChart, MetricField
from riemflow.curvature import riemann, weyl
from riemflow.errors import DimensionTooSmall, EmptyTrajectory, NoSingularity
from riemflow.families import make_family
from riemflow.flow import (
    check_metric_equivalence,
    homothety_flow_solution,
    induced_riemann_flow_rhs,
    integrate_flow,
    monitor_blow_up,
    ricci_flow_rhs,
    riemann_flow_residual,
    riemann_type_flow_rhs,
)


# ---------------------------------------------------------------------------
# velocities
# ---------------------------------------------------------------------------

def test_flat_velocities_vanish():
    fld, _ = flat_grid_field(3)
    assert np.abs(ricci_flow_rhs(fld)).max() == 0.0
    assert np.abs(induced_riemann_flow_rhs(fld)).max() == 0.0


def test_ricci_velocity_on_model_charts():
    # Ric = (n-1) * factor * g, so the first-order velocity is -2 (n-1) factor g
    for build, factor in ((sphere_field, SPHERE_FACTOR),
                          (hyperbolic_field, HYPERBOLIC_FACTOR)):
        fld, _ = build(3)
        vel = ricci_flow_rhs(fld)
        assert np.abs(vel + 4.0 * factor * fld.samples).max() < 1e-6


def test_induced_velocity_is_minus_factor_times_metric():
    for build, factor in ((sphere_field, SPHERE_FACTOR),
                          (hyperbolic_field, HYPERBOLIC_FACTOR)):
        fld, _ = build(3)
        vel = induced_riemann_flow_rhs(fld)
        assert np.abs(vel + factor * fld.samples).max() < 1e-6


def test_induced_velocity_dimension_guard():
    fld, _ = sphere_field(2)
    with pytest.raises(DimensionTooSmall):
        induced_riemann_flow_rhs(fld)


def test_trace_self_consistency():
    # trace of the solved velocity must match the double contraction of the
    # pair-product equation computed through an independent arithmetic path
    fld, _ = torus_field(3, points=8, amplitude=0.1)
    g = fld.samples
    ginv = np.linalg.inv(g)
    vel = induced_riemann_flow_rhs(fld)
    tr_solved = np.einsum('sik,sik->s', ginv, vel)
    R = riemann(fld).array
    double = np.einsum('sik,sjl,sijkl->s', ginv, ginv, -2.0 * R)
    n = 3
    tr_contracted = double / (2.0 * (n - 1))
    assert np.abs(tr_solved - tr_contracted).max() < 1e-13 * max(np.abs(tr_solved).max(), 1)


def test_scaled_flow_alpha_sign():
    # the candidate first-order velocity -2 Ric satisfies the scaled
    # pair-product flow only for alpha = -2(n-2); the opposite sign fails
    fam = make_family("conformal-torus", 4, {"amplitude": 0.05, "mode": 1},
                      np.random.default_rng(9))
    fld = MetricField.from_function(GridChart(4, 8, 2.0 * np.pi), fam.metric_function)
    from riemflow.bialternate import kulkarni_nomizu
    vel = ricci_flow_rhs(fld)
    dG = kulkarni_nomizu(vel, fld.samples)
    n = 4
    good = riemann_type_flow_rhs(fld, -2.0 * (n - 2), 1.0 / (n - 1))
    bad = riemann_type_flow_rhs(fld, 2.0 * (n - 2), 1.0 / (n - 1))
    assert np.abs(dG - good).max() < 1e-12
    assert np.abs(dG - bad).max() > 1e-2


def test_riemann_type_integration_matches_ricci_flow():
    fld, _ = torus_field(3, points=8, amplitude=0.06)
    n = 3
    t1 = integrate_flow(fld, "ricci", 5e-3, 0.05, stride=2)
    t2 = integrate_flow(fld, ("riemann-type", {"alpha": -2.0 * (n - 2),
                                               "beta": 1.0 / (n - 1)}),
                        5e-3, 0.05, stride=2)
    diff = max(np.abs(a - b).max() for a, b in zip(t1.states, t2.states))
    assert diff < 1e-13


# ---------------------------------------------------------------------------
# pair-product equation residual
# ---------------------------------------------------------------------------

def test_residual_flat_zero():
    fld, _ = flat_grid_field(3)
    assert riemann_flow_residual(fld, np.zeros_like(fld.samples)) == 0.0


def test_residual_dimension_three_is_roundoff():
    # in n = 3 the pair-trace inversion solves the full system identically,
    # so the residual sits at round-off for any resolution (in particular it
    # is bounded by c h^4 with room to spare)
    for points in (8, 16):
        fld, _ = torus_field(3, points=points, amplitude=0.1)
        vel = induced_riemann_flow_rhs(fld)
        res = riemann_flow_residual(fld, vel)
        h = 2.0 * np.pi / points
        assert res < 1e-10
        assert res < 1.0 * h ** 4


def test_residual_dimension_four_equals_twice_weyl():
    def g(x):
        x = np.asarray(x)
        base = np.broadcast_to(np.eye(4), x.shape[:-1] + (4, 4)).copy()
        base[..., 0, 0] += 0.3 * np.sin(x[..., 1])
        base[..., 1, 1] += 0.25 * np.cos(x[..., 2])
        base[..., 2, 3] = base[..., 3, 2] = 0.1 * np.sin(x[..., 0])
        return base

    fld = MetricField.from_function(GridChart(4, 8, 2.0 * np.pi), g)
    from riemflow.bialternate import kulkarni_nomizu
    vel = induced_riemann_flow_rhs(fld)
    R = riemann(fld)
    resid = kulkarni_nomizu(vel, fld.samples) + 2.0 * R.array
    C = weyl(fld, R).array
    assert np.abs(C).max() > 1e-4
    assert np.abs(resid - 2.0 * C).max() < 1e-12 * max(np.abs(C).max(), 1)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def test_flat_metric_is_fixed_point():
    fld, _ = flat_grid_field(3)
    for law in ("ricci", "riemann-induced",
                ("riemann-type", {"alpha": -2.0, "beta": 0.5})):
        traj = integrate_flow(fld, law, 0.05, 1.0, stride=5)
        assert traj.termination == "t_end"
        drift = max(np.abs(s - traj.states[0]).max() for s in traj.states)
        assert drift < 1e-12


def test_collapsing_homothety_matches_exact_solution():
    # hyperbolic chart: factor +1, f(t) = 1 - t, collapse at T = 1
    fld, fam = hyperbolic_field(3)
    lam = fam.constant_curvature
    traj = integrate_flow(fld, "riemann-induced", 1e-3, 2.0, stride=10)
    assert traj.termination == "collapse"
    t = np.asarray(traj.times)
    f = traj.diagnostic("f_est")
    mask = t <= 0.9 / lam
    rel = np.abs(f[mask] - (1.0 - lam * t[mask])) / (1.0 - lam * t[mask])
    assert rel.max() < 1e-6
    report = monitor_blow_up(traj)
    assert abs(report.T_est - 1.0 / lam) < 1e-3
    assert abs(report.exponent + 1.0) < 0.05


def test_expanding_homothety_matches_exact_solution():
    # sphere chart: factor -1, f(t) = 1 + t grows for all time
    fld, fam = sphere_field(3)
    lam = fam.constant_curvature
    traj = integrate_flow(fld, "riemann-induced", 1e-2, 3.0, stride=10)
    assert traj.termination == "t_end"
    t = np.asarray(traj.times)
    f = traj.diagnostic("f_est")
    assert np.abs(f - (1.0 - lam * t)).max() < 1e-6
    with pytest.raises(NoSingularity):
        monitor_blow_up(traj)


def test_ricci_flow_collapse_time_on_hyperbolic():
    # Ric = mu g with mu = 2 on the hyperbolic chart; f = 1 - 2 mu t
    fld, _ = hyperbolic_field(3)
    traj = integrate_flow(fld, "ricci", 5e-4, 1.0, stride=10)
    assert traj.termination == "collapse"
    report = monitor_blow_up(traj)
    mu = 2.0 * HYPERBOLIC_FACTOR
    assert abs(report.T_est - 1.0 / (2.0 * mu)) < 1e-3


def test_ricci_flow_on_sphere_has_no_singularity():
    fld, _ = sphere_field(3)
    traj = integrate_flow(fld, "ricci", 1e-2, 1.0, stride=10)
    assert traj.termination == "t_end"
    with pytest.raises(NoSingularity):
        monitor_blow_up(traj)


def test_rk4_temporal_order():
    # exponential pair-product decay: beta dG/dt + gamma G = 0 on a flat
    # torus gives f(t) = exp(-gamma t / (2 beta)) exactly
    fld, _ = flat_grid_field(3)
    errs = []
    for dt in (0.1, 0.05):
        traj = integrate_flow(fld, ("general", {"beta": 1.0, "gamma": 1.0,
                                                "delta": 0.0}), dt, 2.0,
                              stride=10 ** 9)
        f = traj.diagnostic("f_est")[-1]
        errs.append(abs(f - np.exp(-1.0)))
    order = np.log2(errs[0] / errs[1])
    assert abs(order - 4.0) < 0.3


def test_cross_check_mode_agrees_with_recovery():
    fld, _ = hyperbolic_field(3)
    traj = integrate_flow(fld, "riemann-induced", 1e-3, 0.5, stride=10,
                          cross_check_stride=5)
    cc = traj.diagnostic("cross_check_error")
    assert np.any(np.isfinite(cc))
    assert np.nanmax(cc) < 1e-8


def test_curvature_cap_termination():
    fld, _ = hyperbolic_field(3)
    traj = integrate_flow(fld, "riemann-induced", 1e-3, 2.0, stride=10,
                          curvature_cap=50.0)
    assert traj.termination == "curvature_cap"
    assert traj.times[-1] < 1.0
    report = monitor_blow_up(traj)
    assert abs(report.T_est - 1.0) < 1e-2


def test_integrate_accepts_flow_state():
    from riemflow.flow import FlowState
    fld, _ = flat_grid_field(3)
    traj = integrate_flow(FlowState(t=0.5, field=fld), "ricci", 0.1, 1.0, stride=1)
    assert traj.times[0] == 0.5
    assert abs(traj.times[-1] - 1.0) < 1e-12


def test_homothety_solution_values():
    sol = homothety_flow_solution(1.0, 0.5)
    assert sol.scale == 0.5 and sol.pair_scale == 0.25 and sol.collapse_time == 1.0
    assert homothety_flow_solution(0.0, 7.0).scale == 1.0
    sol = homothety_flow_solution(-1.0, 2.0)
    assert sol.scale == 3.0 and sol.collapse_time is None


# ---------------------------------------------------------------------------
# metric equivalence sandwich
# ---------------------------------------------------------------------------

def test_sandwich_on_flat_trajectory():
    fld, _ = flat_grid_field(3)
    traj = integrate_flow(fld, "riemann-induced", 0.1, 1.0, stride=2)
    for which in ("ricci", "riemann"):
        report = check_metric_equivalence(traj, which=which)
        assert report.passed
        assert report.bound == 0.0


def test_sandwich_on_model_trajectories():
    for build in (sphere_field, hyperbolic_field):
        fld, _ = build(3)
        traj = integrate_flow(fld, "riemann-induced", 1e-2, 0.3, stride=5)
        for which in ("ricci", "riemann"):
            assert check_metric_equivalence(traj, which=which).passed


class _FakeTrajectory:
    def __init__(self, times, states):
        self.times = times
        self.states = states

    def diagnostic(self, key):
        raise KeyError(key)


def test_sandwich_negative_control():
    # a fabricated trajectory that jumps far outside e^{±2mt} must fail
    g0 = np.eye(3)[None]
    fake = _FakeTrajectory([0.0, 0.1], [g0, 50.0 * g0])
    report = check_metric_equivalence(fake, m=1.0, which="ricci")
    assert not report.passed
    assert report.worst_margin < 0


def test_sandwich_empty_trajectory():
    with pytest.raises(EmptyTrajectory):
        check_metric_equivalence(_FakeTrajectory([], []), m=1.0)
