"""Coordinate charts, metric fields and finite-difference jets.

Two chart backends are supported:

* :class:`AnalyticChart` -- a single evaluation point together with a
  user-supplied metric function.  Derivatives are taken with second-order
  central differences at steps ``h`` and ``h/2`` followed by one Richardson
  extrapolation, which makes the jet fourth-order accurate.
* :class:`GridChart` -- a periodic grid over a flat torus.  Derivatives are
  taken with fourth-order central stencils and periodic wrap-around, so no
  boundary conditions ever enter.

A :class:`MetricField` couples a chart with metric samples (grid) or a metric
function (analytic) and produces the 2-jet ``(g, dg, d2g)`` that the curvature
kernel consumes.  Index conventions for jets: ``dg[..., i, j, k] = d_k g_ij``
and ``d2g[..., i, j, k, l] = d_k d_l g_ij`` with the derivative pair
symmetrised.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import NotPositiveDefinite, StencilOutOfDomain

DEFAULT_ANALYTIC_STEP = 1e-2


@dataclass(frozen=True)
class AnalyticChart:
    """Single-point chart for metrics given in closed form.

    Parameters
    ----------
    dimension : int
        Chart dimension ``n >= 2``.
    point : array_like
        Coordinates of the evaluation point, shape ``(n,)``.
    step : float
        Base finite-difference step ``h > 0``.
    """

    dimension: int
    point: np.ndarray
    step: float = DEFAULT_ANALYTIC_STEP

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("chart dimension must be at least 2")
        if self.step <= 0:
            raise ValueError("finite-difference step must be positive")
        pt = np.asarray(self.point, dtype=float).reshape(self.dimension)
        object.__setattr__(self, "point", pt)

    @property
    def kind(self):
        return "analytic-point"

    @property
    def sample_count(self):
        return 1

    @property
    def sample_points(self):
        return self.point[None, :]


@dataclass(frozen=True)
class GridChart:
    """Periodic grid chart modelling flat-torus topology.

    Parameters
    ----------
    dimension : int
        Chart dimension ``n >= 2`` (the 1+1 conformal wave uses its own
        scalar grid, not this class).
    points_per_axis : int or tuple of int
        Number of samples along each axis, at least 8.
    lengths : float or tuple of float
        Torus periods per axis.
    """

    dimension: int
    points_per_axis: tuple
    lengths: tuple

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("chart dimension must be at least 2")
        ppa = self.points_per_axis
        if np.isscalar(ppa):
            ppa = (int(ppa),) * self.dimension
        ppa = tuple(int(p) for p in ppa)
        if len(ppa) != self.dimension:
            raise ValueError("points_per_axis must match the chart dimension")
        if min(ppa) < 8:
            raise ValueError("grid charts need at least 8 points per axis")
        lengths = self.lengths
        if np.isscalar(lengths):
            lengths = (float(lengths),) * self.dimension
        lengths = tuple(float(L) for L in lengths)
        if len(lengths) != self.dimension:
            raise ValueError("lengths must match the chart dimension")
        if min(lengths) <= 0:
            raise ValueError("torus periods must be positive")
        object.__setattr__(self, "points_per_axis", ppa)
        object.__setattr__(self, "lengths", lengths)

    @property
    def kind(self):
        return "periodic-grid"

    @property
    def grid_shape(self):
        return self.points_per_axis

    @property
    def spacings(self):
        return tuple(L / p for L, p in zip(self.lengths, self.points_per_axis))

    @property
    def sample_count(self):
        return int(np.prod(self.points_per_axis))

    @property
    def sample_points(self):
        axes = [np.arange(p) * h for p, h in zip(self.points_per_axis, self.spacings)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)


# ---------------------------------------------------------------------------
# grid stencils (fourth order, periodic)
# ---------------------------------------------------------------------------


def _grid_d1(values, axis, h):
    """Fourth-order periodic first derivative along a grid axis."""
    def sh(s):
        return np.roll(values, -s, axis=axis)

    return (-sh(2) + 8.0 * sh(1) - 8.0 * sh(-1) + sh(-2)) / (12.0 * h)


def _grid_d2(values, axis, h):
    """Fourth-order periodic pure second derivative along a grid axis."""
    def sh(s):
        return np.roll(values, -s, axis=axis)

    return (-sh(2) + 16.0 * sh(1) - 30.0 * values + 16.0 * sh(-1) - sh(-2)) / (12.0 * h * h)


def grid_scalar_jet(values, chart):
    """Value, gradient and symmetrised Hessian of grid-sampled components.

    ``values`` has shape ``grid_shape + tail``; the returned derivative arrays
    append one (resp. two) axes of length ``n`` after the tail.
    """
    n = chart.dimension
    hs = chart.spacings
    tail = values.shape[n:]
    d1 = np.empty(values.shape + (n,))
    for a in range(n):
        d1[..., a] = _grid_d1(values, a, hs[a])
    d2 = np.empty(values.shape + (n, n))
    for a in range(n):
        d2[..., a, a] = _grid_d2(values, a, hs[a])
        for b in range(a + 1, n):
            mixed = _grid_d1(d1[..., a], b, hs[b])
            d2[..., a, b] = mixed
            d2[..., b, a] = mixed
    flat = (chart.sample_count,) + tail
    return (values.reshape(flat),
            d1.reshape(flat + (n,)),
            d2.reshape(flat + (n, n)))


# ---------------------------------------------------------------------------
# analytic stencils (second order + Richardson)
# ---------------------------------------------------------------------------


def _analytic_offsets(n, h):
    """Stencil offsets used by the Richardson jet, shape (P, n)."""
    offsets = [np.zeros(n)]
    for scale in (h, 0.5 * h):
        for k in range(n):
            for s in (+1.0, -1.0):
                off = np.zeros(n)
                off[k] = s * scale
                offsets.append(off)
        for k in range(n):
            for l in range(k + 1, n):
                for sk in (+1.0, -1.0):
                    for sl in (+1.0, -1.0):
                        off = np.zeros(n)
                        off[k] = sk * scale
                        off[l] = sl * scale
                        offsets.append(off)
    return np.array(offsets)


def analytic_scalar_jet(func, points, n, h):
    """Richardson-extrapolated 2-jet of ``func`` at a batch of points.

    ``func`` maps arrays of shape ``(..., n)`` to component arrays of shape
    ``(...,) + tail``; ``points`` has shape ``(B, n)``.  Returns value,
    gradient and symmetrised Hessian with tail-first layout matching
    :func:`grid_scalar_jet`.
    """
    points = np.asarray(points, dtype=float).reshape(-1, n)
    offsets = _analytic_offsets(n, h)
    stencil = points[:, None, :] + offsets[None, :, :]
    vals = np.asarray(func(stencil), dtype=float)
    if not np.all(np.isfinite(vals)):
        finite = np.isfinite(vals).reshape(vals.shape[0], vals.shape[1], -1).all(axis=-1)
        b, p = np.argwhere(~finite)[0]
        raise StencilOutOfDomain(stencil[b, p])
    tail = vals.shape[2:]
    B = points.shape[0]

    # index map into the offsets table
    idx = 1
    plus = {}
    minus = {}
    cross = {}
    for scale_id, scale in enumerate((h, 0.5 * h)):
        for k in range(n):
            plus[(scale_id, k)] = idx
            idx += 1
            minus[(scale_id, k)] = idx
            idx += 1
        for k in range(n):
            for l in range(k + 1, n):
                # order: (+,+), (+,-), (-,+), (-,-)
                cross[(scale_id, k, l)] = idx
                idx += 4

    g0 = vals[:, 0]
    d1 = np.empty((B,) + tail + (n,))
    d2 = np.empty((B,) + tail + (n, n))
    for k in range(n):
        est = []
        est2 = []
        for scale_id, scale in enumerate((h, 0.5 * h)):
            fp = vals[:, plus[(scale_id, k)]]
            fm = vals[:, minus[(scale_id, k)]]
            est.append((fp - fm) / (2.0 * scale))
            est2.append((fp - 2.0 * g0 + fm) / (scale * scale))
        d1[..., k] = (4.0 * est[1] - est[0]) / 3.0
        d2[..., k, k] = (4.0 * est2[1] - est2[0]) / 3.0
    for k in range(n):
        for l in range(k + 1, n):
            est = []
            for scale_id, scale in enumerate((h, 0.5 * h)):
                base = cross[(scale_id, k, l)]
                fpp = vals[:, base]
                fpm = vals[:, base + 1]
                fmp = vals[:, base + 2]
                fmm = vals[:, base + 3]
                est.append((fpp - fpm - fmp + fmm) / (4.0 * scale * scale))
            mixed = (4.0 * est[1] - est[0]) / 3.0
            d2[..., k, l] = mixed
            d2[..., l, k] = mixed
    return g0, d1, d2


# ---------------------------------------------------------------------------
# metric fields
# ---------------------------------------------------------------------------


@dataclass
class MetricField:
    """Metric components attached to a chart.

    Use :meth:`from_function` for closed-form metrics (both chart kinds) or
    :meth:`from_samples` for component arrays on a grid chart.
    """

    chart: object
    func: object = None
    values: np.ndarray = None
    _samples: np.ndarray = dataclass_field(default=None, repr=False)

    @classmethod
    def from_function(cls, chart, func):
        if chart.kind == "periodic-grid":
            pts = chart.sample_points.reshape(chart.grid_shape + (chart.dimension,))
            vals = np.asarray(func(pts), dtype=float)
            expected = chart.grid_shape + (chart.dimension, chart.dimension)
            if vals.shape != expected:
                raise ValueError(f"metric function returned shape {vals.shape}, expected {expected}")
            return cls(chart=chart, func=func, values=vals)
        return cls(chart=chart, func=func)

    @classmethod
    def from_samples(cls, chart, values):
        values = np.asarray(values, dtype=float)
        if chart.kind != "periodic-grid":
            raise ValueError("analytic charts need a metric function; use from_function")
        expected = chart.grid_shape + (chart.dimension, chart.dimension)
        if values.shape != expected:
            raise ValueError(f"samples have shape {values.shape}, expected {expected}")
        return cls(chart=chart, values=values)

    @property
    def dimension(self):
        return self.chart.dimension

    @property
    def samples(self):
        """Metric components at the chart's sample points, shape (S, n, n)."""
        if self._samples is None:
            n = self.dimension
            if self.chart.kind == "periodic-grid":
                self._samples = self.values.reshape(-1, n, n)
            else:
                pt = self.chart.point
                self._samples = np.asarray(self.func(pt[None, :]), dtype=float).reshape(1, n, n)
        return self._samples

    def eigenvalue_range(self):
        w = np.linalg.eigvalsh(self.samples)
        return float(w.min()), float(w.max())

    def validate_spd(self, tolerance=0.0):
        """Raise :class:`NotPositiveDefinite` at the worst offending sample."""
        w = np.linalg.eigvalsh(self.samples)
        mins = w[:, 0]
        worst = int(np.argmin(mins))
        if mins[worst] <= tolerance:
            raise NotPositiveDefinite(worst, float(mins[worst]))

    def jets(self):
        """Return ``(g, dg, d2g)`` flattened over samples."""
        n = self.dimension
        if self.chart.kind == "periodic-grid":
            return grid_scalar_jet(self.values, self.chart)
        g0, d1, d2 = analytic_scalar_jet(
            self.func, self.chart.point[None, :], n, self.chart.step
        )
        return g0, d1, d2

    def jets_at(self, points):
        """Analytic-chart jets at arbitrary points (reference computations)."""
        if self.chart.kind != "analytic-point":
            raise ValueError("jets_at is only available on analytic charts")
        return analytic_scalar_jet(self.func, points, self.dimension, self.chart.step)
