import numpy as np
import pytest

from riemflow.charts import AnalyticChart, GridChart, MetricField
from riemflow.families import make_family

# Constant-curvature factors of the model charts under the implemented
# component formula, pinned once by a one-time symbolic differentiation
# oracle (tools/pin_constants.py) and frozen here.  The commonly quoted
# values are (n-1) with the opposite sign.
SPHERE_FACTOR = -1.0
HYPERBOLIC_FACTOR = 1.0


def rand_spd(n, rng, spread=0.4):
    """Random SPD matrix with eigenvalues of order one."""
    a = rng.normal(size=(n, n)) * spread
    return a @ a.T + np.eye(n)


def sphere_field(n=3, step=1e-2):
    fam = make_family("sphere-stereographic", n)
    chart = AnalyticChart(n, [0.0] * n, step)
    return MetricField.from_function(chart, fam.metric_function), fam


def hyperbolic_field(n=3, step=1e-2):
    fam = make_family("hyperbolic-poincare", n)
    chart = AnalyticChart(n, [0.0] * n, step)
    return MetricField.from_function(chart, fam.metric_function), fam


def torus_field(n=3, points=8, amplitude=0.08, mode=1, seed=3):
    fam = make_family("conformal-torus", n, {"amplitude": amplitude, "mode": mode},
                      np.random.default_rng(seed))
    chart = GridChart(n, points, 2.0 * np.pi)
    return MetricField.from_function(chart, fam.metric_function), fam


def flat_grid_field(n=3, points=8):
    fam = make_family("flat", n)
    chart = GridChart(n, points, 2.0 * np.pi)
    return MetricField.from_function(chart, fam.metric_function), fam


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
