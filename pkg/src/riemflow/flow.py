"""First-order metric evolutions driven by curvature.

Three laws are integrated on the metric components:

* ``ricci``:             dg/dt = -2 Ric(g)
* ``riemann-induced``:   the unique velocity solving the pair-trace
                         contraction of dG/dt = -2 Riem(g), namely
                         (n-2) v + tr(v) g = g^{jl} (-2 R)_ijkl
* ``riemann-type``:      dG/dt = alpha Riem + beta (d ln det g / dt) G,
                         solved for the metric velocity (well posed when
                         beta != 1/(n-1) + (n-2)/(n(n-1)) fails; see below)
* ``general``:           the first-order member of the general family,
                         beta dG/dt + gamma G + delta Riem = 0

On periodic grids the evolution is a genuine method-of-lines PDE solve.  On
analytic single-point charts the state is the metric at the evaluation point
expressed in the frame of the initial metric; the spatial field is
reconstructed as ``g_t(x) = L0(x) Y(t) L0(x)^T`` with ``L0`` the pointwise
Cholesky factor of the initial metric.  That reconstruction is exact for
congruence-homogeneous evolutions (in particular every constant-curvature
scenario); general inhomogeneous dynamics belong on grid charts.
"""

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.optimize import brentq

from .bialternate import recover_metric
from .charts import MetricField
from .curvature import (
    kn_product,
    pair_product_from_samples,
    ricci_scalar_from_arrays,
    riemann,
    tensor_norm,
)
from .errors import (
    DimensionTooSmall,
    EmptyTrajectory,
    NoSingularity,
    StepRejected,
)

COLLAPSE_EIG_FRACTION = 1e-6
SOFT_COLLAPSE_FRACTION = 1e-2
MAX_HALVINGS = 20


# ---------------------------------------------------------------------------
# velocities
# ---------------------------------------------------------------------------


def solve_pair_trace(g, ginv, rhs4):
    """Solve (v ^ g)_ijkl = rhs4 for the symmetric velocity v.

    Contracting with ``g^{jl}`` gives ``(n-2) v + tr(v) g = W`` with
    ``W = g^{jl} rhs4_ijkl``; the trace of that equation fixes ``tr v``.
    """
    n = g.shape[-1]
    if n < 3:
        raise DimensionTooSmall("the pair-trace inversion needs n >= 3")
    W = np.einsum('...jl,...ijkl->...ik', ginv, rhs4)
    trW = np.einsum('...ik,...ik->...', ginv, W)
    trv = trW / (2.0 * (n - 1))
    return (W - trv[..., None, None] * g) / (n - 2)


def ricci_flow_rhs(field: MetricField):
    """-2 Ric(g), the classical first-order law."""
    vel, _ = _flow_velocity(field, "ricci", {})
    return vel


def induced_riemann_flow_rhs(field: MetricField):
    """Metric velocity induced by the pair-product flow dG/dt = -2 Riem."""
    vel, _ = _flow_velocity(field, "riemann-induced", {})
    return vel


def riemann_type_flow_rhs(field: MetricField, alpha, beta):
    """Evaluate alpha Riem + beta (d ln det g/dt) G for the candidate
    velocity -2 Ric, for which d ln det g/dt = -2 R.

    This is the conversion check of the scaled flow; the sign of ``alpha``
    that actually reproduces dG/dt under the candidate velocity is pinned by
    the tests (it is ``-2(n-2)``, the opposite of the commonly quoted value).
    """
    n = field.dimension
    if n < 3:
        raise DimensionTooSmall("the scaled flow needs n >= 3")
    riem = riemann(field)
    g = field.samples
    ginv = np.linalg.inv(g)
    _, scal = ricci_scalar_from_arrays(ginv, riem.array)
    G = pair_product_from_samples(g)
    dlndet = -2.0 * scal
    return alpha * riem.array + beta * dlndet[..., None, None, None, None] * G


def riemann_flow_residual(field: MetricField, velocity):
    """max |dG/dt(v) + 2 Riem(g)| with dG/dt(v) = (v ^ g)."""
    g = field.samples
    riem = riemann(field)
    resid = kn_product(np.asarray(velocity, dtype=float), g) + 2.0 * riem.array
    return float(np.abs(resid).max())


def _flow_velocity(field, law, params, riem_array=None):
    """Velocity samples plus the curvature array (reused by diagnostics)."""
    g = field.samples
    n = g.shape[-1]
    if riem_array is None:
        riem_array = riemann(field).array
    ginv = np.linalg.inv(g)
    if law == "ricci":
        ric, _ = ricci_scalar_from_arrays(ginv, riem_array)
        return -2.0 * ric, riem_array
    if law == "riemann-induced":
        return solve_pair_trace(g, ginv, -2.0 * riem_array), riem_array
    if law == "general":
        beta = float(params.get("beta"))
        gamma = float(params.get("gamma", 0.0))
        delta = float(params.get("delta", 0.0))
        if beta == 0.0:
            raise ValueError("first-order general law needs beta != 0")
        G = pair_product_from_samples(g)
        rhs4 = -(gamma * G + delta * riem_array) / beta
        return solve_pair_trace(g, ginv, rhs4), riem_array
    if law == "riemann-type":
        if n < 3:
            raise DimensionTooSmall("the scaled flow needs n >= 3")
        alpha = float(params.get("alpha", -2.0 * (n - 2)))
        beta = float(params.get("beta", 1.0 / (n - 1)))
        # dG/dt = alpha Riem + beta tr(v) G couples tr(v); contracting:
        # (n-2) v + [1 - beta (n-1)] tr(v) g = alpha S
        S, scal = ricci_scalar_from_arrays(ginv, riem_array)
        c = 1.0 - beta * (n - 1.0)
        denom = (n - 2.0) + n * c
        if abs(denom) < 1e-14:
            raise ValueError("degenerate scaled-flow coefficients")
        trv = alpha * scal / denom
        vel = (alpha * S - c * trv[..., None, None] * g) / (n - 2.0)
        return vel, riem_array
    raise ValueError(f"unknown flow law {law!r}")


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass
class FlowState:
    t: float
    field: MetricField


@dataclass
class HomothetySolution:
    """Exact uniform-scaling solution for constant-curvature data."""

    factor: float          # lam with Riem(g0) = lam * G0
    scale: float           # f(t) = 1 - lam t
    pair_scale: float      # f(t)^2
    collapse_time: float   # 1/lam when lam > 0, else None


def homothety_flow_solution(lam, t):
    f = 1.0 - lam * t
    T = 1.0 / lam if lam > 0 else None
    return HomothetySolution(factor=lam, scale=f, pair_scale=f * f, collapse_time=T)


@dataclass
class Trajectory:
    """Recorded evolution samples plus per-record diagnostics."""

    chart: object
    law: str
    times: list
    states: list                      # metric samples (S, n, n) per record
    velocities: list                  # d(state)/dt samples at records
    diagnostics: dict
    termination: str = "t_end"
    wave: bool = False
    velocity_states: list = dataclass_field(default_factory=list)  # wave only

    @property
    def initial_samples(self):
        return self.states[0]

    def diagnostic(self, key):
        return np.asarray(self.diagnostics[key], dtype=float)


def _rel_eig_factors(g0_samples):
    L0 = np.linalg.cholesky(g0_samples)
    return np.linalg.inv(L0)


def _relative_eigenvalues(g_samples, L0inv):
    M = np.einsum('...ab,...bc,...dc->...ad', L0inv, g_samples, L0inv)
    return np.linalg.eigvalsh(M)


def _frozen_frame_builder(chart, base_func):
    """Field builder for analytic charts: g_Y(x) = L0(x) Y L0(x)^T."""

    def build(Y):
        def metric(x):
            g0 = np.asarray(base_func(x), dtype=float)
            L = np.linalg.cholesky(g0)
            return np.einsum('...ab,bc,...dc->...ad', L, Y, L)
        return MetricField.from_function(chart, metric)

    return build


class _FlowSystem:
    """First-order state (metric only)."""

    wave = False

    def __init__(self, field, law, params):
        self.chart = field.chart
        self.law = law
        self.params = params
        self.n = field.dimension
        if self.chart.kind == "periodic-grid":
            self.grid = True
            self.state0 = [field.samples.copy()]
        else:
            self.grid = False
            self._build = _frozen_frame_builder(self.chart, field.func)
            self.state0 = [np.eye(self.n)]
            self._L0 = np.linalg.cholesky(field.samples[0])
            self._L0inv = np.linalg.inv(self._L0)
        self._g0 = field.samples.copy()

    def field_of(self, state):
        if self.grid:
            vals = state[0].reshape(self.chart.grid_shape + (self.n, self.n))
            return MetricField.from_samples(self.chart, vals)
        return self._build(state[0])

    def metric_samples(self, state):
        if self.grid:
            return state[0]
        return np.einsum('ab,bc,dc->ad', self._L0, state[0], self._L0)[None]

    def rhs(self, state):
        fld = self.field_of(state)
        vel, riem_arr = _flow_velocity(fld, self.law, self.params)
        if self.grid:
            return [vel], riem_arr, vel
        dY = self._L0inv @ vel[0] @ self._L0inv.T
        return [0.5 * (dY + dY.T)], riem_arr, vel

    def spd_ok(self, state):
        try:
            np.linalg.cholesky(self.metric_samples(state))
            return True
        except np.linalg.LinAlgError:
            return False

    def equation_residual(self, state, g, vel, riem_arr):
        dG = kn_product(vel, g)
        if self.law in ("riemann-induced", "ricci"):
            return float(np.abs(dG + 2.0 * riem_arr).max())
        if self.law == "general":
            beta = float(self.params.get("beta"))
            gamma = float(self.params.get("gamma", 0.0))
            delta = float(self.params.get("delta", 0.0))
            G = pair_product_from_samples(g)
            return float(np.abs(beta * dG + gamma * G + delta * riem_arr).max())
        if self.law == "riemann-type":
            n = g.shape[-1]
            alpha = float(self.params.get("alpha", -2.0 * (n - 2)))
            beta = float(self.params.get("beta", 1.0 / (n - 1)))
            ginv = np.linalg.inv(g)
            trv = np.einsum('...ik,...ik->...', ginv, vel)
            G = pair_product_from_samples(g)
            rhs = alpha * riem_arr + beta * trv[..., None, None, None, None] * G
            return float(np.abs(dG - rhs).max())
        return float("nan")


def _law_key(law):
    if isinstance(law, (tuple, list)):
        return law[0], dict(law[1] or {})
    return law, {}


def integrate_flow(initial, law, dt, t_end, *, stride=10,
                   collapse_threshold=COLLAPSE_EIG_FRACTION,
                   curvature_cap=None, max_halvings=MAX_HALVINGS,
                   cross_check_stride=None):
    """Integrate a first-order law with classical RK4.

    Parameters
    ----------
    initial : MetricField or FlowState
        Starting metric (t = 0 unless a state is given).
    law : str or (str, dict)
        ``'ricci'``, ``'riemann-induced'``, ``('riemann-type', {...})`` or
        ``('general', {'beta': .., 'gamma': .., 'delta': ..})``.
    dt, t_end : float
        Base step and horizon.
    stride : int
        Record every ``stride``-th accepted step (the last step is always
        recorded).
    collapse_threshold : float
        Relative eigenvalue floor; the run flags ``collapse`` below it.
    curvature_cap : float, optional
        Stop with ``curvature_cap`` termination when sup |Riem| exceeds it.
    cross_check_stride : int, optional
        Every so many records, also evolve the pair product directly and
        confirm the recovered metric agrees with the evolved one.
    """
    if isinstance(initial, FlowState):
        t0, fld = initial.t, initial.field
    else:
        t0, fld = 0.0, initial
    if dt <= 0:
        raise ValueError("dt must be positive")
    fld.validate_spd()
    law_name, params = _law_key(law)
    system = _FlowSystem(fld, law_name, params)
    return _rk4_evolve(system, t0, dt, t_end, stride, collapse_threshold,
                       curvature_cap, max_halvings, cross_check_stride)


def _rk4_evolve(system, t0, dt_base, t_end, stride, collapse_threshold,
                curvature_cap, max_halvings, cross_check_stride):
    state = [a.copy() for a in system.state0]
    g0 = system.metric_samples(state).copy()
    L0inv = _rel_eig_factors(g0)
    det0 = np.linalg.det(g0)
    n = g0.shape[-1]

    traj = Trajectory(chart=system.chart, law=system.law, times=[], states=[],
                      velocities=[], diagnostics={k: [] for k in (
                          "f_est", "min_rel_eig", "max_rel_eig", "sup_ric_norm",
                          "sup_riem_norm", "scalar_min", "scalar_max",
                          "eq_residual", "det_g_min", "cross_check_error")},
                      wave=getattr(system, "wave", False))

    cross_G = None
    if cross_check_stride:
        cross_G = pair_product_from_samples(g0).copy()

    def record(t, state):
        g = system.metric_samples(state)
        fld = system.field_of(state)
        derivs, riem_arr, vel = system.rhs(state)
        ginv = np.linalg.inv(g)
        ric, scal = ricci_scalar_from_arrays(ginv, riem_arr)
        rel = _relative_eigenvalues(g, L0inv)
        riem_norm = tensor_norm(riem_arr, ginv)
        ric_norm = tensor_norm(ric, ginv)
        traj.times.append(t)
        traj.states.append(g.copy())
        traj.velocities.append(vel.copy())
        if traj.wave:
            traj.velocity_states.append(system.velocity_samples(state).copy())
        d = traj.diagnostics
        d["f_est"].append(float(np.mean((np.linalg.det(g) / det0) ** (1.0 / n))))
        d["min_rel_eig"].append(float(rel.min()))
        d["max_rel_eig"].append(float(rel.max()))
        d["sup_ric_norm"].append(float(ric_norm.max()))
        d["sup_riem_norm"].append(float(riem_norm.max()))
        d["scalar_min"].append(float(scal.min()))
        d["scalar_max"].append(float(scal.max()))
        d["eq_residual"].append(system.equation_residual(state, g, vel, riem_arr))
        d["det_g_min"].append(float(np.linalg.det(g).min()))
        if cross_G is not None and (len(traj.times) - 1) % cross_check_stride == 0:
            err = 0.0
            for s in range(g.shape[0]):
                rec = recover_metric(cross_G[s], n)
                err = max(err, float(np.abs(rec - g[s]).max()))
            d["cross_check_error"].append(err)
        else:
            d["cross_check_error"].append(float("nan"))
        return float(riem_norm.max()), float(rel.min())

    sup_riem, min_rel = record(t0, state)
    t = t0
    steps = 0
    dt_cur = dt_base
    termination = "t_end"
    while t < t_end - 1e-14:
        dt = min(dt_cur, t_end - t)
        halvings = 0
        while True:
            ok, new_state, cross_new = _rk4_step(system, state, dt, cross_G)
            if ok:
                break
            halvings += 1
            if halvings > max_halvings:
                rel = _relative_eigenvalues(system.metric_samples(state), L0inv)
                if rel.min() < SOFT_COLLAPSE_FRACTION:
                    termination = "collapse"
                    break
                raise StepRejected(
                    f"step at t={t:.6g} still fails positivity after {max_halvings} halvings")
            dt *= 0.5
            dt_cur = dt
        if termination == "collapse":
            break
        state = new_state
        cross_G = cross_new
        t += dt
        steps += 1
        dt_cur = min(dt_cur * 2.0, dt_base)
        rel = _relative_eigenvalues(system.metric_samples(state), L0inv)
        min_rel = float(rel.min())
        # keep a dense record of the approach to collapse for the monitors
        near_collapse = min_rel < max(0.1, 1e3 * collapse_threshold)
        if (steps % stride == 0 or near_collapse or t >= t_end - 1e-14
                or min_rel < collapse_threshold):
            sup_riem, min_rel = record(t, state)
        if min_rel < collapse_threshold:
            termination = "collapse"
            break
        if curvature_cap is not None and sup_riem > curvature_cap:
            termination = "curvature_cap"
            break
    if traj.times[-1] < t - 1e-15:
        record(t, state)
    traj.termination = termination
    return traj


def _rk4_step(system, state, dt, cross_G):
    """One classical RK4 step with a positivity guard on every stage."""
    try:
        k1, r1, _ = system.rhs(state)
        s2 = [y + 0.5 * dt * k for y, k in zip(state, k1)]
        if not system.spd_ok(s2):
            return False, None, None
        k2, r2, _ = system.rhs(s2)
        s3 = [y + 0.5 * dt * k for y, k in zip(state, k2)]
        if not system.spd_ok(s3):
            return False, None, None
        k3, r3, _ = system.rhs(s3)
        s4 = [y + dt * k for y, k in zip(state, k3)]
        if not system.spd_ok(s4):
            return False, None, None
        k4, r4, _ = system.rhs(s4)
        new = [y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
               for y, a, b, c, d in zip(state, k1, k2, k3, k4)]
        if not system.spd_ok(new):
            return False, None, None
    except (np.linalg.LinAlgError, FloatingPointError):
        return False, None, None
    if not all(np.all(np.isfinite(a)) for a in new):
        return False, None, None
    cross_new = cross_G
    if cross_G is not None:
        # pair product evolved directly with the same stage curvatures
        cross_new = cross_G + dt / 6.0 * (-2.0) * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
    return True, new, cross_new


# ---------------------------------------------------------------------------
# trajectory checks
# ---------------------------------------------------------------------------


@dataclass
class EquivalenceReport:
    passed: bool
    bound: float
    worst_margin: float
    worst_time: float
    worst_sample: int


def check_metric_equivalence(trajectory, m=None, which="ricci", slack=1e-9):
    """Check e^{-2mt} g(0) <= g(t) <= e^{2mt} g(0) in the eigenvalue sense.

    ``which='ricci'`` bounds the metric itself with m = sup |Ric|;
    ``which='riemann'`` bounds the pair product with m = sup |Riem|.
    Semidefinite ordering is evaluated through generalized eigenvalues
    relative to the initial state.
    """
    times = list(getattr(trajectory, "times", []))
    states = list(getattr(trajectory, "states", []))
    if not times or not states:
        raise EmptyTrajectory("equivalence check needs at least one sample")
    t0 = times[0]
    if m is None:
        key = "sup_ric_norm" if which == "ricci" else "sup_riem_norm"
        m = float(np.max(trajectory.diagnostic(key)))

    if which == "ricci":
        mats0 = states[0]
        mats = states
    elif which == "riemann":
        mats0 = _pair_matrix(states[0])
        mats = [_pair_matrix(s) for s in states]
    else:
        raise ValueError("which must be 'ricci' or 'riemann'")

    L0inv = _rel_eig_factors(mats0)
    worst = (math.inf, 0.0, 0)
    for t, mat in zip(times, mats):
        rel = _relative_eigenvalues(mat, L0inv)
        arg = 2.0 * m * (t - t0)
        lo = math.exp(-arg)
        hi = math.exp(arg) if arg < 700.0 else math.inf
        margin = min(float(rel.min() - lo), float(hi - rel.max()))
        if margin < worst[0]:
            worst = (margin, t, int(np.argmin(rel.min(axis=-1))))
    passed = worst[0] >= -slack
    return EquivalenceReport(passed=passed, bound=m, worst_margin=worst[0],
                             worst_time=worst[1], worst_sample=worst[2])


def _pair_matrix(g_samples):
    """Pair product as a matrix on the (i<j) basis of 2-forms."""
    G = pair_product_from_samples(g_samples)
    n = g_samples.shape[-1]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    D = len(pairs)
    out = np.empty(g_samples.shape[:-2] + (D, D))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            out[..., a, b] = G[..., i, j, k, l]
    return out


# ---------------------------------------------------------------------------
# blow-up monitoring
# ---------------------------------------------------------------------------


@dataclass
class BlowUpReport:
    T_est: float
    exponent: float
    curve: tuple   # (T_est - t, sup |Riem|) over the fit window


def estimate_singular_time(times, scales, with_uncertainty=False):
    """Singular time from the decay of a positive scale series.

    Fits ``scale ~ C (T - t)^alpha`` through three late samples, solving for
    ``T`` by bisection; falls back to a Newton step from the last two samples
    when the fit degenerates.  With ``with_uncertainty=True`` also returns
    the spread between the fit and the Newton estimate, a practical proxy
    for the resolution of ``T``.
    """
    t = np.asarray(times, dtype=float)
    f = np.asarray(scales, dtype=float)
    good = f > 0
    t, f = t[good], f[good]
    if len(t) < 3:
        raise ValueError("need at least three positive samples")
    T = _three_point_singular_time(t, f)
    if with_uncertainty:
        if len(t) >= 4:
            T_alt = _three_point_singular_time(t[:-1], f[:-1])
        else:
            T_alt = T
        unc = abs(T - T_alt) + 1e-12 * max(1.0, abs(T))
        return T, unc
    return T


def _three_point_singular_time(t, f):
    i3 = len(t) - 1
    i1 = max(0, i3 - 8)
    i2 = (i1 + i3) // 2
    if i2 == i1 or i2 == i3:
        i1, i2, i3 = len(t) - 3, len(t) - 2, len(t) - 1
    t1, t2, t3 = t[i1], t[i2], t[i3]
    f1, f2, f3 = f[i1], f[i2], f[i3]

    newton = t3 + f3 * (t3 - t2) / max(f2 - f3, 1e-300)

    def mismatch(T):
        a12 = (math.log(f1) - math.log(f2)) / (math.log(T - t1) - math.log(T - t2))
        a23 = (math.log(f2) - math.log(f3)) / (math.log(T - t2) - math.log(T - t3))
        return a12 - a23

    lo = t3 + 1e-15 * max(1.0, abs(t3))
    hi = max(newton * 2.0, t3 + 10.0 * (t3 - t1))
    try:
        mlo = mismatch(lo + (hi - lo) * 1e-12)
        mhi = mismatch(hi)
        if mlo * mhi <= 0:
            return brentq(mismatch, lo + (hi - lo) * 1e-12, hi, xtol=1e-14)
    except (ValueError, ZeroDivisionError, OverflowError):
        pass
    return newton


def monitor_blow_up(trajectory, norm_key="sup_riem_norm"):
    """Singular-time estimate and curvature growth exponent.

    Requires a trajectory that stopped at collapse or the curvature cap;
    raises :class:`NoSingularity` otherwise.  The exponent is the least-squares
    slope of ``log sup|Riem|`` against ``log (T - t)`` over the final decade
    of ``T - t``.
    """
    if trajectory.termination not in ("collapse", "curvature_cap"):
        raise NoSingularity(f"trajectory ended with {trajectory.termination!r}")
    times = np.asarray(trajectory.times, dtype=float)
    scale = trajectory.diagnostic("min_rel_eig")
    T, unc = estimate_singular_time(times, scale, with_uncertainty=True)

    norms = trajectory.diagnostic(norm_key)
    gap = T - times
    # gaps below the resolution of T carry no slope information
    ok = (gap > 100.0 * unc) & (norms > 0)
    gap, norms = gap[ok], norms[ok]
    if len(gap) < 3:
        raise NoSingularity("too few resolved samples near the singular time")
    gmin = gap.min()
    widen = 10.0
    window = gap <= widen * gmin
    while window.sum() < 3 and widen < gap.max() / gmin:
        widen *= 10.0
        window = gap <= widen * gmin
    x = np.log(gap[window])
    y = np.log(norms[window])
    slope = float(np.polyfit(x, y, 1)[0])
    return BlowUpReport(T_est=float(T), exponent=slope,
                        curve=(gap[window], norms[window]))
