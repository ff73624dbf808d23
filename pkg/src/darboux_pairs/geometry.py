"""Vector algebra, parametric surfaces, embedded curves and arc length.

Vectors are numpy arrays whose last axis has length 3; every evaluator in
this module broadcasts over leading axes, so a whole sample grid is handled
in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import PchipInterpolator

from .errors import (
    DegenerateParameterization,
    DegenerateSpeed,
    OutOfDomain,
    OutOfRange,
    TooFewSamples,
)

EPS_REG = 1e-9

_GL_X, _GL_W = leggauss(5)


def dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def norm(a):
    return np.sqrt(dot(a, a))


def cross(a, b):
    return np.cross(a, b)


def unit(a):
    return a / norm(a)[..., None]


@dataclass(frozen=True)
class SurfaceJet:
    """Position and partial derivatives up to second order."""

    P: np.ndarray
    Pu: np.ndarray
    Pv: np.ndarray
    Puu: np.ndarray
    Puv: np.ndarray
    Pvv: np.ndarray


class SurfacePatch:
    """A regular parametric surface over a rectangular parameter domain.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(u, v) -> SurfaceJet`` for broadcastable float arrays.
    domain : ((u_min, u_max), (v_min, v_max))
    name : str
        Label used in reports.
    """

    def __init__(self, evaluator: Callable, domain, name: str = "patch", params=None):
        self._evaluator = evaluator
        (u0, u1), (v0, v1) = domain
        self.domain = ((float(u0), float(u1)), (float(v0), float(v1)))
        self.name = name
        self.params = dict(params or {})

    def __repr__(self):
        return f"SurfacePatch({self.name!r}, domain={self.domain})"

    def contains(self, u, v):
        (u0, u1), (v0, v1) = self.domain
        tol_u = 1e-12 * max(1.0, abs(u0), abs(u1))
        tol_v = 1e-12 * max(1.0, abs(v0), abs(v1))
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return ((u >= u0 - tol_u) & (u <= u1 + tol_u)
                & (v >= v0 - tol_v) & (v <= v1 + tol_v))

    def evaluate(self, u, v, check: bool = True) -> SurfaceJet:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if check and not np.all(self.contains(u, v)):
            bad = ~np.broadcast_to(self.contains(u, v), np.broadcast(u, v).shape)
            uu, vv = np.broadcast_arrays(u, v)
            raise OutOfDomain(
                f"({float(uu[bad].flat[0]):.6g}, {float(vv[bad].flat[0]):.6g}) "
                f"outside domain {self.domain} of {self.name}")
        return self._evaluator(u, v)

    def position(self, u, v):
        return self.evaluate(u, v).P


@dataclass(frozen=True)
class CurveJet:
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    d2u: np.ndarray
    d2v: np.ndarray


class ParamCurve:
    """A curve ``t -> (u(t), v(t))`` in a surface's parameter domain.

    ``func(t)`` returns a :class:`CurveJet` with first and second
    derivatives; it must broadcast over arrays of ``t``.
    """

    def __init__(self, func: Callable, t_range, name: str = "curve", params=None):
        self._func = func
        t0, t1 = t_range
        if not t1 > t0:
            raise ValueError(f"empty t-range {t_range}")
        self.t_range = (float(t0), float(t1))
        self.name = name
        self.params = dict(params or {})

    def __repr__(self):
        return f"ParamCurve({self.name!r}, t_range={self.t_range})"

    def __call__(self, t) -> CurveJet:
        return self._func(np.asarray(t, dtype=float))


def line_curve(t_range, name: str = "line", v0: float = 0.0) -> ParamCurve:
    """The parameter line ``u = t, v = v0``."""

    def func(t):
        z = np.zeros_like(t)
        return CurveJet(t, z + v0, z + 1.0, z, z, z)

    return ParamCurve(func, t_range, name=name)


@dataclass(frozen=True)
class EmbeddedJet:
    x: np.ndarray
    dx: np.ndarray
    d2x: np.ndarray


@dataclass(frozen=True)
class CurveState:
    """Embedded derivatives plus the surface normal and its rate along t."""

    x: np.ndarray
    dx: np.ndarray
    d2x: np.ndarray
    n: np.ndarray
    dn: np.ndarray


def _normal_from_jet(jet: SurfaceJet, name="patch"):
    N = cross(jet.Pu, jet.Pv)
    size = norm(N)
    if np.any(~(size > EPS_REG)):
        where = np.argmin(np.where(np.isfinite(size), size, -1.0))
        raise DegenerateParameterization(
            f"|P_u x P_v| = {float(np.ravel(size)[where]):.3g} <= {EPS_REG:g} on {name} "
            f"(non-regular point)")
    return N / size[..., None], N, size


def surface_normal(patch: SurfacePatch, u, v) -> np.ndarray:
    """Unit normal ``(P_u x P_v) / |P_u x P_v|``."""
    n, _, _ = _normal_from_jet(patch.evaluate(u, v), patch.name)
    return n


def embed_curve(patch: SurfacePatch, curve: ParamCurve, t, check: bool = True) -> EmbeddedJet:
    """Position, velocity and acceleration of the embedded curve (chain rule)."""
    c = curve(t)
    jet = patch.evaluate(c.u, c.v, check=check)
    return _embed(jet, c)


def _embed(jet: SurfaceJet, c: CurveJet) -> EmbeddedJet:
    du = c.du[..., None]
    dv = c.dv[..., None]
    dx = jet.Pu * du + jet.Pv * dv
    d2x = (jet.Puu * du * du + 2.0 * jet.Puv * du * dv + jet.Pvv * dv * dv
           + jet.Pu * c.d2u[..., None] + jet.Pv * c.d2v[..., None])
    return EmbeddedJet(jet.P, dx, d2x)


def curve_state(patch: SurfacePatch, curve: ParamCurve, t, check: bool = True) -> CurveState:
    c = curve(t)
    jet = patch.evaluate(c.u, c.v, check=check)
    emb = _embed(jet, c)
    n, N, size = _normal_from_jet(jet, patch.name)
    du = c.du[..., None]
    dv = c.dv[..., None]
    dN = cross(jet.Puu * du + jet.Puv * dv, jet.Pv) + cross(jet.Pu, jet.Puv * du + jet.Pvv * dv)
    dn = (dN - n * dot(n, dN)[..., None]) / size[..., None]
    return CurveState(emb.x, emb.dx, emb.d2x, n, dn)


# finite-difference oracle ---------------------------------------------------

def fd_step(t, rel: float = 1e-5):
    return rel * np.maximum(1.0, np.abs(np.asarray(t, dtype=float)))


def central_difference(func: Callable, t, h=None):
    """Second-order central difference of ``func`` at ``t``.

    ``h`` defaults to ``1e-5 * max(1, |t|)``.
    """
    t = np.asarray(t, dtype=float)
    if h is None:
        h = fd_step(t)
    h = np.broadcast_to(np.asarray(h, dtype=float), t.shape)
    fp = np.asarray(func(t + h))
    fm = np.asarray(func(t - h))
    hb = h.reshape(h.shape + (1,) * (fp.ndim - h.ndim))
    return (fp - fm) / (2.0 * hb)


def five_point_derivative(func: Callable, t, h):
    """Fourth-order central difference ``(-f2 + 8f1 - 8f-1 + f-2) / 12h``."""
    t = np.asarray(t, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), t.shape)
    stacked = np.stack([t - 2 * h, t - h, t + h, t + 2 * h])
    vals = np.asarray(func(stacked))
    fm2, fm1, fp1, fp2 = vals
    hb = h.reshape(h.shape + (1,) * (vals.ndim - 1 - h.ndim))
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * hb)


def fd_surface_partials(patch: SurfacePatch, u, v, h: float = 1e-5) -> SurfaceJet:
    """Finite-difference estimate of the patch partials.

    First partials difference the position map; second partials difference
    the analytic first partials, which keeps the rounding error at O(eps/h)
    instead of O(eps/h^2).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ev = lambda a, b: patch.evaluate(a, b, check=False)  # noqa: E731
    pu_p, pu_m = ev(u + h, v), ev(u - h, v)
    pv_p, pv_m = ev(u, v + h), ev(u, v - h)
    return SurfaceJet(
        P=ev(u, v).P,
        Pu=(pu_p.P - pu_m.P) / (2 * h),
        Pv=(pv_p.P - pv_m.P) / (2 * h),
        Puu=(pu_p.Pu - pu_m.Pu) / (2 * h),
        Puv=(pv_p.Pu - pv_m.Pu) / (2 * h),
        Pvv=(pv_p.Pv - pv_m.Pv) / (2 * h),
    )


# arc length -----------------------------------------------------------------

def _gl_integral(speed: Callable, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * _GL_X
    return half * (speed(nodes) * _GL_W).sum(axis=-1)


@dataclass(frozen=True)
class ArcLengthTable:
    """Cumulative arc length at quadrature knots, with its inverse."""

    knots: np.ndarray
    cumulative_length: np.ndarray
    total_length: float
    speed: Callable = field(repr=False, compare=False)

    def arclength(self, t):
        """Arc length from the start of the curve to parameter ``t``."""
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.knots) - 2)
        return self.cumulative_length[k] + _gl_integral(self.speed, self.knots[k], t)


def _speed_function(patch, curve):
    def speed(t):
        sp = norm(embed_curve(patch, curve, t, check=False).dx)
        if np.any(~(sp > EPS_REG)):
            raise DegenerateSpeed(
                f"|dx/dt| <= {EPS_REG:g} on {curve.name} (min {float(np.nanmin(sp)):.3g})")
        return sp

    return speed


def arc_length_table(patch: SurfacePatch, curve: ParamCurve, n_knots: int = 65,
                     rtol: float = 1e-10) -> ArcLengthTable:
    """Tabulate arc length by adaptive composite 5-point Gauss-Legendre.

    A panel is bisected until its one-panel and two-half-panel estimates
    agree to ``rtol`` relative; the refined estimate is kept.
    """
    if n_knots < 2:
        raise ValueError("n_knots must be >= 2")
    t0, t1 = curve.t_range
    # domain check on the whole range once; quadrature nodes are inside it
    embed_curve(patch, curve, np.linspace(t0, t1, n_knots))
    speed = _speed_function(patch, curve)

    edges = np.linspace(t0, t1, n_knots)
    speed(edges)
    pending = (edges[:-1], edges[1:])
    done_a, done_b, done_val = [], [], []
    min_width = 1e-13 * (t1 - t0)
    for _ in range(60):
        a, b = pending
        if a.size == 0:
            break
        m = 0.5 * (a + b)
        whole = _gl_integral(speed, a, b)
        halves = _gl_integral(speed, a, m) + _gl_integral(speed, m, b)
        ok = (np.abs(whole - halves) <= rtol * np.abs(halves)) | ((b - a) < min_width)
        done_a.append(a[ok])
        done_b.append(b[ok])
        done_val.append(halves[ok])
        bad = ~ok
        pending = (np.concatenate([a[bad], m[bad]]), np.concatenate([m[bad], b[bad]]))
    else:
        raise DegenerateSpeed(f"arc-length quadrature did not converge on {curve.name}")

    a = np.concatenate(done_a)
    order = np.argsort(a)
    knots = np.concatenate([a[order], np.concatenate(done_b)[order][-1:]])
    cum = np.concatenate([[0.0], np.cumsum(np.concatenate(done_val)[order])])
    return ArcLengthTable(knots, cum, float(cum[-1]), speed)


def reparameterize(table: ArcLengthTable, s):
    """Invert the arc-length map: the parameter ``t`` at arc length ``s``.

    Monotone cubic interpolation gives the starting point; bracketed Newton
    steps on the exact quadrature polish it.
    """
    s_in = np.asarray(s, dtype=float)
    L = table.total_length
    tol = 1e-12 * max(1.0, L)
    if np.any((s_in < -tol) | (s_in > L + tol)) or not np.all(np.isfinite(s_in)):
        raise OutOfRange(f"arc length outside [0, {L:.17g}]")
    s_arr = np.clip(s_in, 0.0, L)
    knots, cum = table.knots, table.cumulative_length
    k = np.clip(np.searchsorted(cum, s_arr, side="right") - 1, 0, len(knots) - 2)
    lo, hi = knots[k].copy(), knots[k + 1].copy()
    t = np.clip(PchipInterpolator(cum, knots)(s_arr), lo, hi)
    ftol = 4e-16 * max(1.0, L)
    active = np.ones(np.shape(s_arr), dtype=bool)
    for _ in range(60):
        F = cum[k] + _gl_integral(table.speed, knots[k], t) - s_arr
        active = active & (np.abs(F) > ftol)
        if not np.any(active):
            break
        hi = np.where(active & (F > 0), t, hi)
        lo = np.where(active & (F < 0), t, lo)
        t_new = t - F / table.speed(t)
        inside = (t_new > lo) & (t_new < hi)
        t = np.where(active, np.where(inside, t_new, 0.5 * (lo + hi)), t)
    t = np.where(s_arr == 0.0, knots[0], np.where(s_arr == L, knots[-1], t))
    return float(t) if np.ndim(s_in) == 0 else t


# scalar series ----------------------------------------------------------------

@dataclass(frozen=True)
class ScalarSeries:
    """Values sampled on a uniform grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-D of equal length")
        if grid.size >= 2:
            d = np.diff(grid)
            h = (grid[-1] - grid[0]) / (grid.size - 1)
            if not h > 0 or np.max(np.abs(d - h)) > 1e-12 * max(abs(h), np.max(np.abs(grid))):
                raise ValueError("grid is not uniform")

    @property
    def spacing(self) -> float:
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    def __len__(self):
        return self.grid.size


def fd_derivative(series: ScalarSeries) -> ScalarSeries:
    """Central differences inside, one-sided second-order stencils at the ends."""
    if len(series) < 3:
        raise TooFewSamples("need at least 3 samples to differentiate")
    return ScalarSeries(series.grid, np.gradient(series.values, series.spacing, edge_order=2))
