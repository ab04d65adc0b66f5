"""Named metric families for charts, scenarios and the CLI.

Registered names: ``flat``, ``sphere-stereographic``, ``hyperbolic-poincare``,
``conformal-torus`` (parameters ``amplitude`` and ``mode``, optional random
phases drawn from the scenario seed) and ``diagonal-lame`` (a table of
coefficient expressions, one per axis).

``sphere-stereographic`` is the unit-sphere conformal chart
``4 delta / (1 + |x|^2)^2`` and ``hyperbolic-poincare`` the unit-ball chart
``4 delta / (1 - |x|^2)^2``.  Their constant-curvature factors under the
implemented curvature convention are -1 and +1 respectively (pinned by the
one-time symbolic oracle; the commonly quoted factors have the opposite
sign).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnknownFamily

# constant-curvature factors under the implemented component formula
SPHERE_CURVATURE_FACTOR = -1.0
HYPERBOLIC_CURVATURE_FACTOR = 1.0

_SAFE_FUNCS = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "cosh", "sinh", "tanh", "abs",
)}
_SAFE_FUNCS["pi"] = math.pi


@dataclass
class MetricFamily:
    """A metric function plus the structural facts scenarios rely on."""

    name: str
    dimension: int
    metric_function: object
    constant_curvature: float = None   # factor lam with Riem = lam * G, if constant
    lame: tuple = None                 # diagonal coefficient callables, if orthogonal
    periodic: bool = False
    default_lengths: tuple = None


def _flat(n):
    eye = np.eye(n)

    def metric(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(eye, x.shape[:-1] + (n, n)).copy()

    return MetricFamily("flat", n, metric, constant_curvature=0.0,
                        lame=tuple(_const_one() for _ in range(n)),
                        periodic=True, default_lengths=(2.0 * math.pi,) * n)


def _const_one():
    def H(x):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1])
    return H


def _conformal_ball(n, sign, name, curvature):
    def metric(x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        phi = 4.0 / (1.0 + sign * r2) ** 2
        return phi[..., None, None] * np.eye(n)

    return MetricFamily(name, n, metric, constant_curvature=curvature)


def _conformal_torus(n, amplitude, mode, phases, lengths):
    mode = int(mode)
    lengths = np.asarray(lengths, dtype=float)
    phases = np.asarray(phases, dtype=float)

    def metric(x):
        x = np.asarray(x, dtype=float)
        args = 2.0 * math.pi * mode * x / lengths + phases
        phi = amplitude * np.sum(np.sin(args), axis=-1)
        return np.exp(2.0 * phi)[..., None, None] * np.eye(n)

    fam = MetricFamily("conformal-torus", n, metric, periodic=True,
                       default_lengths=tuple(lengths))
    return fam


def _diagonal_lame(n, expressions):
    if len(expressions) != n:
        raise ValueError("diagonal-lame needs one coefficient expression per axis")

    def make_H(expr):
        def H(x):
            x = np.asarray(x, dtype=float)
            names = {f"x{k + 1}": x[..., k] for k in range(n)}
            names.update(_SAFE_FUNCS)
            out = eval(expr, {"__builtins__": {}}, names)  # noqa: S307 - documented restricted namespace
            return np.broadcast_to(np.asarray(out, dtype=float), x.shape[:-1]).copy()
        return H

    Hs = tuple(make_H(e) for e in expressions)

    def metric(x):
        x = np.asarray(x, dtype=float)
        vals = np.stack([H(x) for H in Hs], axis=-1)
        out = np.zeros(x.shape[:-1] + (n, n))
        for k in range(n):
            out[..., k, k] = vals[..., k] ** 2
        return out

    return MetricFamily("diagonal-lame", n, metric, lame=Hs)


def make_family(name, dimension, params=None, rng=None):
    """Instantiate a registered metric family.

    Parameters
    ----------
    name : str
        One of the registered family names.
    dimension : int
        Chart dimension.
    params : dict, optional
        Family parameters (``amplitude``, ``mode``, ``phases`` for the
        conformal torus; ``expressions`` for diagonal-lame).
    rng : numpy.random.Generator, optional
        Source for the conformal torus phases when none are given.
    """
    params = dict(params or {})
    if name == "flat":
        return _flat(dimension)
    if name == "sphere-stereographic":
        return _conformal_ball(dimension, +1.0, name, SPHERE_CURVATURE_FACTOR)
    if name == "hyperbolic-poincare":
        return _conformal_ball(dimension, -1.0, name, HYPERBOLIC_CURVATURE_FACTOR)
    if name == "conformal-torus":
        amplitude = float(params.pop("amplitude", 0.05))
        mode = params.pop("mode", 1)
        lengths = params.pop("lengths", (2.0 * math.pi,) * dimension)
        phases = params.pop("phases", None)
        if phases is None:
            gen = rng if rng is not None else np.random.default_rng(0)
            phases = gen.uniform(0.0, 2.0 * math.pi, size=dimension)
        if params:
            raise ValueError(f"unknown conformal-torus parameters: {sorted(params)}")
        return _conformal_torus(dimension, amplitude, mode, phases, lengths)
    if name == "diagonal-lame":
        expressions = params.pop("expressions", None)
        if expressions is None:
            raise ValueError("diagonal-lame needs an 'expressions' table")
        if params:
            raise ValueError(f"unknown diagonal-lame parameters: {sorted(params)}")
        return _diagonal_lame(dimension, tuple(expressions))
    raise UnknownFamily(f"no metric family named {name!r}")


FAMILY_NAMES = ("flat", "sphere-stereographic", "hyperbolic-poincare",
                "conformal-torus", "diagonal-lame")
