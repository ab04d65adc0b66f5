import numpy as np
import pytest

from conftest import (
    HYPERBOLIC_FACTOR,
    SPHERE_FACTOR,
    flat_grid_field,
    hyperbolic_field,
    rand_spd,
    sphere_field,
    torus_field,
)
from riemflow.bialternate import bialternate_product
from riemflow.charts import AnalyticChart, GridChart, MetricField, analytic_scalar_jet
from riemflow.curvature import (
    CurvatureBound,
    CurvatureTensor,
    christoffel,
    inverse_metric,
    orthogonal_metric_curvature,
    ricci_and_scalar,
    riemann,
    riemann_from_jets,
    tensor_norm,
    weyl,
)
from riemflow.errors import DimensionTooSmall, NonpositiveLame, NotPositiveDefinite
from riemflow.families import make_family


# ---------------------------------------------------------------------------
# inverse metric
# ---------------------------------------------------------------------------

def test_inverse_identity_and_diagonal():
    assert np.allclose(inverse_metric(np.eye(3)[None]), np.eye(3), atol=1e-15)
    inv = inverse_metric(np.diag([4.0, 1.0])[None])[0]
    assert np.allclose(inv, np.diag([0.25, 1.0]), atol=1e-15)


def test_inverse_random_spd(rng):
    g = rand_spd(3, rng)
    inv = inverse_metric(g[None])[0]
    assert np.abs(g @ inv - np.eye(3)).max() < 1e-12


def test_inverse_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        inverse_metric(np.diag([1.0, -2.0])[None])


# ---------------------------------------------------------------------------
# christoffel
# ---------------------------------------------------------------------------

def test_christoffel_flat_zero():
    fld, _ = flat_grid_field(3)
    gam = christoffel(fld)
    assert np.abs(gam.array).max() == 0.0


def test_christoffel_polar_hand_values():
    def g(x):
        x = np.asarray(x)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = x[..., 0] ** 2
        return out

    fld = MetricField.from_function(AnalyticChart(2, [2.0, 0.5], 1e-3), g)
    gam = christoffel(fld).array[0]
    assert abs(gam[1, 0, 1] - 0.5) < 1e-10
    assert abs(gam[1, 1, 0] - 0.5) < 1e-10
    assert abs(gam[0, 1, 1] + 2.0) < 1e-10


def test_christoffel_conformal_vanishes_at_origin():
    fld, _ = sphere_field(2)
    gam = christoffel(fld).array[0]
    assert np.abs(gam).max() < 1e-10


def test_christoffel_symmetric_lower_indices():
    fld, _ = torus_field(3)
    gam = christoffel(fld).array
    assert np.array_equal(gam, np.swapaxes(gam, -1, -2))


# ---------------------------------------------------------------------------
# curvature values pinned by the symbolic oracle
# ---------------------------------------------------------------------------

def test_flat_torus_curvature_zero():
    fld, _ = flat_grid_field(3)
    assert np.abs(riemann(fld).array).max() < 1e-12


def test_sphere_sectional_factor():
    fld, _ = sphere_field(2)
    R = riemann(fld)
    g = fld.samples[0]
    kappa = R.array[0, 0, 1, 0, 1] / (g[0, 0] * g[1, 1] - g[0, 1] ** 2)
    assert abs(kappa - SPHERE_FACTOR) < 1e-6


def test_poincare_sectional_factor():
    fld, _ = hyperbolic_field(2)
    R = riemann(fld)
    g = fld.samples[0]
    kappa = R.array[0, 0, 1, 0, 1] / (g[0, 0] * g[1, 1] - g[0, 1] ** 2)
    assert abs(kappa - HYPERBOLIC_FACTOR) < 1e-6


def test_sphere_3d_is_constant_curvature():
    fld, _ = sphere_field(3)
    R = riemann(fld)
    G = bialternate_product(fld.samples)
    assert np.abs(R.array - SPHERE_FACTOR * G.array).max() < 1e-6


def test_ricci_and_scalar_model_values():
    # Ric = (n-1) * factor * g and R = n (n-1) * factor on the model charts
    for build, factor in ((sphere_field, SPHERE_FACTOR),
                          (hyperbolic_field, HYPERBOLIC_FACTOR)):
        for n in (2, 3):
            fld, _ = build(n)
            ric, scal = ricci_and_scalar(fld, riemann(fld))
            assert np.abs(ric - (n - 1) * factor * fld.samples).max() < 1e-6
            assert abs(scal[0] - n * (n - 1) * factor) < 1e-5


def test_scaling_homogeneity():
    # Riem(c g) = c Riem(g) to round-off; Ricci unchanged, scalar divided by c
    fam = make_family("conformal-torus", 3, {"amplitude": 0.08, "mode": 1},
                      np.random.default_rng(3))
    chart = GridChart(3, 8, 2.0 * np.pi)
    c = 2.5
    f1 = MetricField.from_function(chart, fam.metric_function)
    f2 = MetricField.from_function(chart, lambda x: c * fam.metric_function(x))
    R1, R2 = riemann(f1).array, riemann(f2).array
    assert np.abs(R2 - c * R1).max() < 1e-13 * np.abs(R1).max() + 1e-15
    ric1, s1 = ricci_and_scalar(f1, riemann(f1))
    ric2, s2 = ricci_and_scalar(f2, riemann(f2))
    assert np.abs(ric2 - ric1).max() < 1e-13
    assert np.abs(s2 - s1 / c).max() < 1e-13


def test_curvature_symmetries_on_raw_evaluation():
    fld, _ = torus_field(3, points=8, amplitude=0.1)
    R = riemann(fld).array
    scale = np.abs(R).max()
    assert np.abs(R + np.swapaxes(R, 1, 2)).max() < 1e-12 * max(scale, 1)
    assert np.abs(R + np.swapaxes(R, 3, 4)).max() < 1e-12 * max(scale, 1)
    pair = np.transpose(R, (0, 3, 4, 1, 2))
    assert np.abs(R - pair).max() < 1e-12 * max(scale, 1)
    bianchi = R + np.transpose(R, (0, 1, 3, 4, 2)) + np.transpose(R, (0, 1, 4, 2, 3))
    assert np.abs(bianchi).max() < 1e-12 * max(scale, 1)


def test_grid_curvature_converges_to_analytic():
    fam = make_family("conformal-torus", 2, {"amplitude": 0.1, "mode": 1},
                      np.random.default_rng(11))
    errs = []
    for N in (16, 32, 64):
        chart = GridChart(2, N, 2.0 * np.pi)
        fld = MetricField.from_function(chart, fam.metric_function)
        Rg = riemann(fld).array
        g0, d1, d2 = analytic_scalar_jet(fam.metric_function, chart.sample_points,
                                         2, 1e-3)
        Rref = riemann_from_jets(g0, d1, d2)
        errs.append(np.abs(Rg - Rref).max())
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) > 3.7


# ---------------------------------------------------------------------------
# Weyl
# ---------------------------------------------------------------------------

def test_weyl_flat_zero():
    fld, _ = flat_grid_field(3)
    assert np.abs(weyl(fld, riemann(fld)).array).max() < 1e-14


def test_weyl_vanishes_in_dimension_three():
    # generic (non-conformal) 3-metric
    def g(x):
        x = np.asarray(x)
        base = np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3)).copy()
        base[..., 0, 0] += 0.3 * np.sin(x[..., 1])
        base[..., 1, 1] += 0.2 * np.cos(x[..., 0] + x[..., 2])
        base[..., 0, 1] = base[..., 1, 0] = 0.1 * np.sin(x[..., 2])
        base[..., 1, 2] = base[..., 2, 1] = 0.08 * np.cos(x[..., 0])
        return base

    fld = MetricField.from_function(GridChart(3, 8, 2.0 * np.pi), g)
    R = riemann(fld)
    assert np.abs(R.array).max() > 1e-3  # genuinely curved
    assert np.abs(weyl(fld, R).array).max() < 1e-10


def test_weyl_vanishes_conformally_flat_4d():
    fam = make_family("conformal-torus", 4, {"amplitude": 0.06, "mode": 1},
                      np.random.default_rng(7))
    fld = MetricField.from_function(GridChart(4, 8, 2.0 * np.pi), fam.metric_function)
    R = riemann(fld)
    assert np.abs(R.array).max() > 1e-3
    assert np.abs(weyl(fld, R).array).max() < 1e-10


def test_weyl_trace_free_generic_4d():
    def g(x):
        x = np.asarray(x)
        base = np.broadcast_to(np.eye(4), x.shape[:-1] + (4, 4)).copy()
        base[..., 0, 0] += 0.3 * np.sin(x[..., 1])
        base[..., 1, 1] += 0.25 * np.cos(x[..., 2])
        base[..., 2, 3] = base[..., 3, 2] = 0.1 * np.sin(x[..., 0])
        base[..., 0, 2] = base[..., 2, 0] = 0.12 * np.cos(x[..., 3])
        return base

    fld = MetricField.from_function(GridChart(4, 8, 2.0 * np.pi), g)
    C = weyl(fld, riemann(fld)).array
    assert np.abs(C).max() > 1e-4  # the generic metric is not conformally flat
    ginv = np.linalg.inv(fld.samples)
    tr24 = np.einsum('sjl,sijkl->sik', ginv, C)
    tr13 = np.einsum('sik,sijkl->sjl', ginv, C)
    assert np.abs(tr24).max() < 1e-11
    assert np.abs(tr13).max() < 1e-11


def test_weyl_dimension_guard():
    fld, _ = sphere_field(2)
    with pytest.raises(DimensionTooSmall):
        weyl(fld, riemann(fld))


# ---------------------------------------------------------------------------
# diagonal (orthogonal) metrics
# ---------------------------------------------------------------------------

def _ones(x):
    return np.ones(np.asarray(x).shape[:-1])


def test_lame_flat():
    chart = AnalyticChart(3, [0.3, 0.1, -0.2], 1e-2)
    R = orthogonal_metric_curvature([_ones, _ones, _ones], chart)
    assert np.abs(R.array).max() < 1e-12


def test_lame_conformal_matches_generic():
    def H(x):
        x = np.asarray(x)
        return np.sqrt(1.0 + 0.3 * np.sin(x[..., 0]))

    chart = AnalyticChart(3, [0.4, 0.1, -0.2], 1e-2)
    R_lame = orthogonal_metric_curvature([H, H, H], chart)

    def g(x):
        x = np.asarray(x)
        u = 1.0 + 0.3 * np.sin(x[..., 0])
        return u[..., None, None] * np.eye(3)

    R_gen = riemann(MetricField.from_function(chart, g))
    scale = np.abs(R_gen.array).max()
    assert np.abs(R_lame.array - R_gen.array).max() < 1e-8 * max(scale, 1)


def test_lame_polar_matches_generic():
    chart = AnalyticChart(2, [2.0, 0.7], 1e-3)
    H2 = lambda x: np.asarray(x)[..., 0]  # noqa: E731
    R_lame = orthogonal_metric_curvature([_ones, H2], chart)

    def g(x):
        x = np.asarray(x)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = x[..., 0] ** 2
        return out

    R_gen = riemann(MetricField.from_function(chart, g))
    assert np.abs(R_lame.array - R_gen.array).max() < 1e-9


def test_lame_generic_diagonal_matches_and_four_distinct_vanish():
    Hs = [
        lambda x: 1.0 + np.asarray(x)[..., 1] ** 2 / 4.0,
        lambda x: 1.0 + np.asarray(x)[..., 0] * np.asarray(x)[..., 2] / 5.0,
        lambda x: 1.0 + np.asarray(x)[..., 0] ** 2 / 7.0 + np.asarray(x)[..., 1] / 9.0,
        lambda x: 1.0 + np.asarray(x)[..., 3] ** 2 / 6.0 + np.asarray(x)[..., 0] / 8.0,
    ]
    chart = AnalyticChart(4, [0.31, 0.23, -0.19, 0.11], 1e-2)
    R_lame = orthogonal_metric_curvature(Hs, chart)

    def g(x):
        x = np.asarray(x)
        out = np.zeros(x.shape[:-1] + (4, 4))
        for k, H in enumerate(Hs):
            out[..., k, k] = H(x) ** 2
        return out

    R_gen = riemann(MetricField.from_function(chart, g))
    scale = np.abs(R_gen.array).max()
    assert np.abs(R_lame.array - R_gen.array).max() < 1e-7 * max(scale, 1)
    for perm in ((0, 1, 2, 3), (2, 0, 3, 1), (3, 1, 0, 2)):
        assert R_lame.array[0][perm] == 0.0


def test_lame_rejects_nonpositive():
    bad = lambda x: np.asarray(x)[..., 0]  # noqa: E731  (vanishes at 0)
    chart = AnalyticChart(2, [0.0, 0.0], 1e-2)
    with pytest.raises(NonpositiveLame):
        orthogonal_metric_curvature([_ones, bad], chart)


# ---------------------------------------------------------------------------
# norms, bounds, storage
# ---------------------------------------------------------------------------

def test_tensor_norm_basics(rng):
    g = rand_spd(3, rng)[None]
    ginv = np.linalg.inv(g)
    assert tensor_norm(np.zeros((1, 3, 3, 3, 3)), ginv)[0] == 0.0
    assert abs(tensor_norm(g, ginv)[0] - np.sqrt(3.0)) < 1e-12
    G = bialternate_product(np.eye(3))
    assert abs(tensor_norm(G.array, np.eye(3)[None])[0] - np.sqrt(12.0)) < 1e-12
    assert tensor_norm(np.array([-2.5]), ginv)[0] == 2.5  # rank-0 per sample
    with pytest.raises(ValueError):
        tensor_norm(np.zeros((1, 3, 3, 3)), ginv)


def test_curvature_bound_monotone():
    bound = CurvatureBound()
    assert bound.update([1.0, 3.0]) == 3.0
    assert bound.update([2.0]) == 3.0
    assert bound.update([5.5]) == 5.5


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_independent_component_count(n):
    assert CurvatureTensor.independent_component_count(n) == n * n * (n * n - 1) // 12
    slots = CurvatureTensor._packed_slots(n)
    assert len(slots) == n * n * (n * n - 1) // 12


@pytest.mark.parametrize("n", [3, 4])
def test_packed_roundtrip(n):
    fld, _ = torus_field(n, points=8, amplitude=0.07)
    R = riemann(fld)
    packed = R.packed()
    assert packed.shape == (fld.chart.sample_count,
                            CurvatureTensor.independent_component_count(n))
    back = CurvatureTensor.from_packed(packed, n)
    assert np.abs(back.array - R.array).max() < 1e-12 * max(np.abs(R.array).max(), 1)
