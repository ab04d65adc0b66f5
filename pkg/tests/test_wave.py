import numpy as np
import pytest
from scipy.interpolate import interp1d

from conftest import (
    flat_grid_field,
    hyperbolic_field,
    sphere_field,
    torus_field,
)
from riemflow.errors import (
    CFLViolated,
    DegenerateCoefficients,
    DimensionTooSmall,
    NoSingularity,
    PositivityLost,
)
from riemflow.flow import integrate_flow
from riemflow.wave import (
    conformally_flat_wave_solve,
    constant_curvature_wave_ode,
    general_form_accel,
    general_form_residual,
    integrate_wave,
    monitor_wave_blow_up,
    ricci_wave_accel,
    riemann_wave_accel,
)


# ---------------------------------------------------------------------------
# accelerations
# ---------------------------------------------------------------------------

def test_flat_acceleration_vanishes():
    fld, _ = flat_grid_field(3)
    k = np.zeros_like(fld.samples)
    assert np.abs(riemann_wave_accel(fld, k)).max() == 0.0
    assert np.abs(ricci_wave_accel(fld)).max() == 0.0


def test_ricci_wave_accel_matches_first_order_rhs():
    fld, _ = torus_field(3, points=8, amplitude=0.08)
    from riemflow.flow import ricci_flow_rhs
    assert np.array_equal(ricci_wave_accel(fld), ricci_flow_rhs(fld))


def test_constant_curvature_acceleration_reduces_to_scale_ode():
    # g = f g0, k = f' g0 forces the acceleration f'' g0 with
    # f'' = -(f'^2 + lam f)/f
    fld, fam = hyperbolic_field(3)
    lam = fam.constant_curvature
    f, fp = 0.8, -0.3
    scaled = type(fld).from_function(fld.chart,
                                     lambda x: f * fam.metric_function(x))
    k = fp * fld.samples
    acc = riemann_wave_accel(scaled, k)
    fpp = -(fp * fp + lam * f) / f
    assert np.abs(acc - fpp * fld.samples).max() < 1e-6


def test_wave_dimension_guard():
    fld, _ = sphere_field(2)
    with pytest.raises(DimensionTooSmall):
        riemann_wave_accel(fld, np.zeros_like(fld.samples))


# ---------------------------------------------------------------------------
# general family
# ---------------------------------------------------------------------------

def test_general_form_reduces_to_flow_bitwise():
    fld, _ = torus_field(3, points=8, amplitude=0.08)
    t1 = integrate_flow(fld, "riemann-induced", 5e-3, 0.05, stride=2)
    t2 = integrate_wave(fld, ("general", {"alpha": 0.0, "beta": 1.0,
                                          "gamma": 0.0, "delta": 2.0}),
                        5e-3, 0.05, stride=2)
    assert all(np.array_equal(a, b) for a, b in zip(t1.states, t2.states))
    assert t1.times == t2.times


def test_general_form_reduces_to_wave_bitwise():
    fld, _ = torus_field(3, points=8, amplitude=0.08)
    k = 0.1 * fld.samples
    a1 = riemann_wave_accel(fld, k)
    a2 = general_form_accel(fld, k, 1.0, 0.0, 0.0, 2.0)
    assert np.array_equal(a1, a2)


def test_general_form_constant_curvature_residual():
    fldS, famS = sphere_field(3)
    lam = famS.constant_curvature
    assert general_form_residual(fldS, 0.0, 0.0, 1.0, -1.0 / lam) < 1e-6
    fldT, _ = torus_field(3, points=8, amplitude=0.08)
    assert general_form_residual(fldT, 0.0, 0.0, 1.0, -1.0 / lam) > 1e-1


def test_general_form_degenerate_coefficients():
    fld, _ = torus_field(3, points=8)
    with pytest.raises(DegenerateCoefficients):
        general_form_accel(fld, np.zeros_like(fld.samples), 0.0, 0.0, 1.0, 2.0)
    with pytest.raises(DegenerateCoefficients):
        integrate_wave(fld, ("general", {"alpha": 0.0, "beta": 0.0,
                                         "gamma": 1.0, "delta": 2.0}), 1e-2, 0.1)


# ---------------------------------------------------------------------------
# scale ODE
# ---------------------------------------------------------------------------

def test_scale_ode_flat_fixed_point():
    res = constant_curvature_wave_ode(0.0, 0.0, 1e-2, 1.0)
    assert np.abs(res.scales - 1.0).max() == 0.0
    assert res.collapse_time is None


def test_scale_ode_polynomial_case():
    # lam = -6, v = 2 satisfies v^2 = -2 lam / 3, so f = (1 + t)^2 exactly
    res = constant_curvature_wave_ode(-6.0, 2.0, 1e-3, 5.0, record_stride=50)
    assert res.polynomial_residual == 0.0
    exact = (1.0 + res.times) ** 2
    assert np.abs(res.scales - exact).max() < 1e-8


def test_scale_ode_polynomial_condition_reported():
    res = constant_curvature_wave_ode(-6.0, 1.0, 1e-3, 1.0, record_stride=50)
    assert abs(res.polynomial_residual - (1.0 + 2.0 * (-6.0) / 3.0)) < 1e-15
    poly = 1.0 + res.times - (-6.0) / 6.0 * res.times ** 2
    assert np.abs(res.scales - poly).max() > 1e-3  # not a solution here


def test_scale_ode_collapse_and_reference():
    coarse = constant_curvature_wave_ode(1.0, 0.0, 1e-3, 3.0)
    assert coarse.collapse_time is not None
    assert coarse.concave
    fine = constant_curvature_wave_ode(1.0, 0.0, 1e-5, 3.0, record_stride=100)
    assert abs(coarse.collapse_time - fine.collapse_time) < 1e-4
    assert 1.0 < coarse.collapse_time < 1.1


def test_scale_ode_time_reversal():
    fwd = constant_curvature_wave_ode(-2.0, 0.0, 1e-3, 1.0)
    bwd = constant_curvature_wave_ode(-2.0, 0.0, 1e-3, -1.0)
    assert np.abs(fwd.times + bwd.times).max() < 1e-12
    assert np.abs(fwd.scales - bwd.scales).max() < 1e-9


# ---------------------------------------------------------------------------
# tensor wave vs scale ODE
# ---------------------------------------------------------------------------

def test_tensor_wave_matches_ode_collapsing():
    fld, fam = hyperbolic_field(3)
    lam = fam.constant_curvature
    traj = integrate_wave(fld, "riemann-wave", 1e-3, 2.0, stride=10)
    assert traj.termination == "collapse"
    ref = constant_curvature_wave_ode(lam, 0.0, 1e-5, 1.2, record_stride=10)
    T = ref.collapse_time
    fref = interp1d(ref.times, ref.scales, kind="cubic", bounds_error=False)
    t = np.asarray(traj.times)
    f = traj.diagnostic("f_est")
    mask = t <= 0.9 * T
    assert np.abs(f[mask] - fref(t[mask])).max() < 1e-6
    report = monitor_wave_blow_up(traj)
    assert abs(report.T_est - T) < 1e-3
    assert -0.7 < report.exponent < -0.3  # square-root collapse


def test_tensor_wave_matches_ode_growing():
    fld, fam = sphere_field(3)
    lam = fam.constant_curvature
    traj = integrate_wave(fld, "riemann-wave", 1e-3, 3.0, stride=10)
    assert traj.termination == "t_end"
    ref = constant_curvature_wave_ode(lam, 0.0, 1e-4, 3.0, record_stride=10)
    fref = interp1d(ref.times, ref.scales, kind="cubic", bounds_error=False,
                    fill_value="extrapolate")
    t = np.asarray(traj.times)
    f = traj.diagnostic("f_est")
    assert np.abs(f - fref(t)).max() < 1e-6
    with pytest.raises(NoSingularity):
        monitor_wave_blow_up(traj)


def test_tensor_wave_polynomial_solution():
    # v^2 = -2 lam / 3 needs lam < 0: the sphere chart under the implemented
    # convention; the exact solution is the quadratic 1 + v t - lam t^2 / 6
    fld, fam = sphere_field(3)
    lam = fam.constant_curvature
    v = np.sqrt(-2.0 * lam / 3.0)
    traj = integrate_wave(fld, "riemann-wave", 1e-3, 2.0,
                          velocity=v * fld.samples, stride=10)
    t = np.asarray(traj.times)
    exact = 1.0 + v * t - lam / 6.0 * t ** 2
    assert np.abs(traj.diagnostic("f_est") - exact).max() < 1e-6


def test_integrate_accepts_wave_state():
    from riemflow.wave import WaveState
    fld, _ = flat_grid_field(3)
    state = WaveState(t=0.25, field=fld, velocity=np.zeros_like(fld.samples))
    traj = integrate_wave(state, "riemann-wave", 0.25, 1.0, stride=1)
    assert traj.times[0] == 0.25
    assert len(traj.velocity_states) == len(traj.states)


def test_flat_wave_is_steady():
    fld, _ = flat_grid_field(3)
    traj = integrate_wave(fld, "riemann-wave", 0.05, 1.0, stride=5)
    drift = max(np.abs(s - traj.states[0]).max() for s in traj.states)
    assert drift < 1e-12
    with pytest.raises(NoSingularity):
        monitor_wave_blow_up(traj)


# ---------------------------------------------------------------------------
# conformally flat 1+1 wave
# ---------------------------------------------------------------------------

def test_conformal_wave_constant_steady():
    N = 64
    res = conformally_flat_wave_solve(np.full(N, 2.5), np.zeros(N),
                                      0.2 / N, 0.5, length=1.0, stride=10)
    assert np.abs(res.u - 2.5).max() == 0.0


def test_conformal_wave_unit_speed():
    N, L, eps = 128, 1.0, 1e-4
    x = np.arange(N) * (L / N)
    u0 = 1.0 + eps * np.sin(2.0 * np.pi * x / L)
    res = conformally_flat_wave_solve(u0, np.zeros(N), 0.25 * L / N, 0.5,
                                      length=L, stride=1)
    # with zero initial rate the mode amplitude follows cos(2 pi c t / L);
    # its first zero crossing at t = L / (4 c) measures the speed c
    prof = np.sin(2.0 * np.pi * x / L)
    amp = (res.u - 1.0) @ prof * 2.0 / N
    tz = None
    for i in range(len(amp) - 1):
        if amp[i] > 0.0 >= amp[i + 1]:
            tz = res.times[i] + (res.times[i + 1] - res.times[i]) * \
                amp[i] / (amp[i] - amp[i + 1])
            break
    assert tz is not None
    speed = L / (4.0 * tz)
    assert abs(speed - 1.0) < 0.02


def test_conformal_wave_self_convergence():
    L, t_end = 1.0, 0.25
    sols = {}
    for N in (64, 128, 256):
        x = np.arange(N) * (L / N)
        u0 = 1.0 + 0.01 * np.sin(2.0 * np.pi * x / L)
        steps = int(round(t_end * N / (0.2 * L)))
        sols[N] = conformally_flat_wave_solve(u0, np.zeros(N), t_end / steps,
                                              t_end, length=L, stride=10 ** 9)
    e1 = np.abs(sols[64].u[-1] - sols[128].u[-1][::2]).max()
    e2 = np.abs(sols[128].u[-1] - sols[256].u[-1][::2]).max()
    assert np.log2(e1 / e2) > 1.7


def test_conformal_wave_positivity_margin():
    N, L = 128, 1.0
    x = np.arange(N) * (L / N)
    u0 = 1.0 + 0.05 * np.sin(2.0 * np.pi * x / L)
    res = conformally_flat_wave_solve(u0, np.zeros(N), 0.2 * L / N, 2.0,
                                      length=L, stride=20)
    assert res.u.min() >= 0.5 * u0.min()


def test_conformal_wave_cfl_guard():
    N = 64
    with pytest.raises(CFLViolated):
        conformally_flat_wave_solve(np.ones(N), np.zeros(N), 1.0 / N, 1.0,
                                    length=1.0)


def test_conformal_wave_positivity_lost():
    N = 64
    u0 = np.full(N, 0.05)
    u1 = np.full(N, -10.0)  # crushes the factor within a step or two
    with pytest.raises(PositivityLost):
        conformally_flat_wave_solve(u0, u1, 0.1 / N, 1.0, length=1.0)
