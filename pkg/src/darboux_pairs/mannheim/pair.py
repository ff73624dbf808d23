"""Mannheim D-pairs: normal offset of a partner curve plus a ruled carrier surface.

Given a partner curve ``x1`` on a surface with unit normal ``n1`` and a
constant ``lam``, the base curve is ``x = x1 + lam * n1``. It is placed on
the ruled surface ``S(t, v) = x(t) + v * n1(t)``, whose tangent plane along
``v = 0`` is spanned by ``x'`` and ``n1``. As ``x'`` is orthogonal to ``n1``,
the Darboux vector ``g`` of ``x`` on ``S`` equals ``n1`` at every station.

Both curves share the partner's uniform arc-length grid ``s1``; ``s`` is the
induced arc length of the base curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from ..errors import DegenerateSweep, SingularOffset, ZeroLambda
from ..framing import DarbouxArrays, FramedCurve, darboux_invariants, frame_at_parameters
from ..geometry import (
    EPS_REG,
    ParamCurve,
    ScalarSeries,
    SurfaceJet,
    SurfacePatch,
    arc_length_table,
    cross,
    curve_state,
    dot,
    five_point_derivative,
    line_curve,
    norm,
    reparameterize,
)

EPS_OFFSET = 1e-6
MIN_STATIONS = 16

# relative steps for the inner (n1'') and outer (dotted quantities) differences
_INNER_STEP = 5e-4
_OUTER_STEP = 2e-3


def offset_curve(partner: FramedCurve, lam: float) -> np.ndarray:
    """Positions ``x1 + lam * n1`` of the base curve at the partner's stations."""
    lam = float(lam)
    if lam == 0.0 or not np.isfinite(lam):
        raise ZeroLambda(f"offset constant must be finite and nonzero, got {lam!r}")
    denom = 1.0 - lam * partner.k_n
    bad = np.flatnonzero(np.abs(denom) <= EPS_OFFSET)
    if bad.size:
        i = int(bad[0])
        raise SingularOffset(
            f"|1 - lambda*k_n1| = {abs(denom[i]):.3g} at s1 = {partner.s[i]:.17g}",
            s1=float(partner.s[i]))
    return partner.x + lam * partner.n


def sweep_surface(path: Callable, ruling: Callable, t_range, v_half_width: float,
                  name: str = "sweep", n_check: int = 257) -> SurfacePatch:
    """Ruled surface ``S(t, v) = x(t) + v * d(t)`` over ``t_range x [-w, w]``.

    ``path(t)`` returns ``(x, x', x'')`` and ``ruling(t)`` returns
    ``(d, d', d'')``, each an array of shape ``t.shape + (3,)``. Regularity
    is checked on ``n_check`` parameter values along both strip edges and
    the center line.
    """
    w = float(v_half_width)
    if not w > 0:
        raise ValueError("v_half_width must be positive")

    def evaluator(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        shape = np.broadcast(u, v).shape
        ub = np.broadcast_to(u, shape)
        vb = np.broadcast_to(v, shape)[..., None]
        x, dx, d2x = path(ub)
        d, dd, d2d = ruling(ub)
        return SurfaceJet(x + vb * d, dx + vb * dd, d, d2x + vb * d2d, dd, np.zeros(shape + (3,)))

    patch = SurfacePatch(evaluator, (t_range, (-w, w)), name=name)
    ts = np.linspace(*t_range, n_check)
    for v in (-w, 0.0, w):
        jet = patch.evaluate(ts, np.full_like(ts, v))
        size = norm(cross(jet.Pu, jet.Pv))
        if np.any(~(size > EPS_REG)):
            i = int(np.argmin(np.where(np.isfinite(size), size, -1.0)))
            raise DegenerateSweep(
                f"ruled surface is not regular at t = {ts[i]:.6g}, v = {v:.6g} "
                f"(|S_t x S_v| = {size[i]:.3g})")
    return patch


@dataclass(frozen=True)
class PairState:
    """Both curves' Darboux data and the correspondence at parameters ``t``."""

    t: np.ndarray
    x1: np.ndarray
    partner: DarbouxArrays
    x: np.ndarray
    base: DarbouxArrays
    theta: np.ndarray  # principal branch, in (-pi, pi]

    @property
    def speed_ratio(self) -> np.ndarray:
        return self.base.speed / self.partner.speed


class PairModel:
    """Pointwise evaluator of an offset pair as a function of the partner parameter.

    Everything is analytic except ``n1''``, which is a fourth-order
    difference of the analytic ``n1'``.
    """

    def __init__(self, patch1: SurfacePatch, curve1: ParamCurve, lam: float):
        self.patch1 = patch1
        self.curve1 = curve1
        self.lam = float(lam)

    def _partner(self, t):
        return curve_state(self.patch1, self.curve1, t, check=False)

    def ruling(self, t):
        t = np.asarray(t, dtype=float)
        st = self._partner(t)
        h = _INNER_STEP * np.maximum(1.0, np.abs(t))
        d2n = five_point_derivative(lambda tt: self._partner(tt).dn, t, h)
        return st.n, st.dn, d2n

    def path(self, t):
        t = np.asarray(t, dtype=float)
        st = self._partner(t)
        _, dn, d2n = self.ruling(t)
        lam = self.lam
        return st.x + lam * st.n, st.dx + lam * dn, st.d2x + lam * d2n

    def state(self, t) -> PairState:
        t = np.asarray(t, dtype=float)
        st = self._partner(t)
        n1, dn1, d2n1 = self.ruling(t)
        lam = self.lam
        x, dx, d2x = st.x + lam * n1, st.dx + lam * dn1, st.d2x + lam * d2n1
        partner = darboux_invariants(st.dx, st.d2x, n1, dn1)
        # normal of the sweep along v = 0 and its rate along t
        N = cross(dx, n1)
        size = norm(N)
        n = N / size[..., None]
        dN = cross(d2x, n1) + cross(dx, dn1)
        dn = (dN - n * dot(n, dN)[..., None]) / size[..., None]
        base = darboux_invariants(dx, d2x, n, dn)
        theta = np.arctan2(dot(base.T, partner.g), dot(base.T, partner.T))
        return PairState(t, st.x, partner, x, base, theta)


@dataclass(frozen=True)
class PairRates:
    """Derivatives with respect to the partner arc length ``s1``."""

    tau_g1: np.ndarray
    k_n1: np.ndarray
    theta: np.ndarray
    tau_g: np.ndarray
    k_g: np.ndarray


def _stencil_weights(t, h, t_range):
    """Fourth-order first-derivative stencils kept inside ``t_range``."""
    t0, t1 = t_range
    central = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    forward = np.arange(5.0), np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    backward = -forward[0][::-1], -forward[1][::-1]
    fwd = t - 2 * h < t0
    bwd = t + 2 * h > t1
    offs = np.where(fwd[:, None], forward[0], np.where(bwd[:, None], backward[0], central[0]))
    wts = np.where(fwd[:, None], forward[1], np.where(bwd[:, None], backward[1], central[1]))
    return t[:, None] + offs * h[:, None], wts / h[:, None]


def pair_rates(model: PairModel, t, t_range, theta_center) -> PairRates:
    """Dotted quantities by station-wise fourth-order differences in ``t``."""
    t = np.asarray(t, dtype=float)
    h = _OUTER_STEP * np.maximum(1.0, np.abs(t))
    h = np.minimum(h, (t_range[1] - t_range[0]) / 8.0)
    pts, w = _stencil_weights(t, h, t_range)
    st = model.state(pts)
    theta = theta_center[:, None] + np.angle(np.exp(1j * (st.theta - theta_center[:, None])))

    def rate(values):
        return np.einsum("ik,ik->i", w, values)

    speed1 = norm(curve_state(model.patch1, model.curve1, t, check=False).dx)
    return PairRates(
        tau_g1=rate(st.partner.tau_g) / speed1,
        k_n1=rate(st.partner.k_n) / speed1,
        theta=rate(theta) / speed1,
        tau_g=rate(st.base.tau_g) / speed1,
        k_g=rate(st.base.k_g) / speed1,
    )


@dataclass(frozen=True)
class MannheimPair:
    """A partner curve, its offset base curve and their correspondence.

    ``partner`` is framed on the input surface, ``base`` on the ruled
    carrier ``sweep``; both are sampled at the same partner arc-length
    stations ``grid``. ``theta`` is unwrapped to a continuous branch.
    """

    lam: float
    partner: FramedCurve
    base: FramedCurve
    grid: np.ndarray
    theta: ScalarSeries
    speed_ratio: ScalarSeries
    rates: PairRates
    sweep: SurfacePatch
    v_half_width: float
    coincidence_sign: int
    model: PairModel = field(repr=False, compare=False)

    def __len__(self):
        return self.grid.size

    @property
    def coincidence(self) -> np.ndarray:
        """``<g, n1>`` at each station."""
        return dot(self.base.g, self.partner.n)

    def metadata(self) -> Dict[str, object]:
        return {
            "lambda": self.lam,
            "n_stations": int(self.grid.size),
            "partner_surface": self.partner.surface,
            "partner_curve": self.curve_name,
            "partner_length": float(self.grid[-1]),
            "base_length": float(self.base.s[-1]),
            "coincidence_sign": self.coincidence_sign,
            "v_half_width": self.v_half_width,
        }

    @property
    def curve_name(self) -> str:
        return self.partner.curve


def _half_width(dx, dn) -> float:
    ratio = 0.5 * float(np.min(norm(dx))) / max(float(np.max(norm(dn))), 1e-300)
    return min(1.0, ratio)


def build_pair(patch1: SurfacePatch, curve1: ParamCurve, lam: float,
               n_stations: int = 256) -> MannheimPair:
    """Construct the Mannheim D-pair of ``curve1`` on ``patch1`` with offset ``lam``.

    Raises
    ------
    ZeroLambda
        ``lam`` is zero.
    SingularOffset
        ``|1 - lam * k_n1| <= 1e-6`` at some station.
    DegenerateSweep
        The ruled carrier is not regular on its strip.
    """
    lam = float(lam)
    if lam == 0.0 or not np.isfinite(lam):
        raise ZeroLambda(f"offset constant must be finite and nonzero, got {lam!r}")
    if n_stations < MIN_STATIONS:
        raise ValueError(f"n_stations must be >= {MIN_STATIONS}")

    table1 = arc_length_table(patch1, curve1)
    s1 = np.linspace(0.0, table1.total_length, n_stations)
    t = reparameterize(table1, s1)
    partner = frame_at_parameters(patch1, curve1, t, s1)
    offset_curve(partner, lam)

    model = PairModel(patch1, curve1, lam)
    ts = np.linspace(*curve1.t_range, max(4 * n_stations, 257))
    _, dx, _ = model.path(ts)
    _, dn1, _ = model.ruling(ts)
    w = _half_width(dx, dn1)
    sweep = sweep_surface(model.path, model.ruling, curve1.t_range, w,
                          name=f"sweep({patch1.name}/{curve1.name}, lambda={lam:g})")
    base_line = line_curve(curve1.t_range, name="base")
    table = arc_length_table(sweep, base_line)
    base = frame_at_parameters(sweep, base_line, t, table.arclength(t))

    state = model.state(t)
    theta = np.unwrap(state.theta)
    rates = pair_rates(model, t, curve1.t_range, state.theta)
    sign = 1 if float(np.mean(dot(base.g, partner.n))) >= 0 else -1
    return MannheimPair(
        lam=lam, partner=partner, base=base, grid=s1,
        theta=ScalarSeries(s1, theta),
        speed_ratio=ScalarSeries(s1, base.speed / partner.speed),
        rates=rates, sweep=sweep, v_half_width=w, coincidence_sign=sign, model=model,
    )


def pair_series(pair: MannheimPair) -> Tuple[Tuple[str, np.ndarray], ...]:
    """Named per-station columns describing both curves and the correspondence."""
    p, b = pair.partner, pair.base
    cols = [("s1", pair.grid), ("s", b.s)]
    for label, fr in (("x1", p), ("x", b)):
        for k, c in enumerate("xyz"):
            cols.append((f"{label}_{c}", fr.x[:, k]))
    cols += [
        ("k_g1", p.k_g), ("k_n1", p.k_n), ("tau_g1", p.tau_g),
        ("k_g", b.k_g), ("k_n", b.k_n), ("tau_g", b.tau_g),
        ("theta", pair.theta.values), ("speed_ratio", pair.speed_ratio.values),
        ("g_dot_n1", pair.coincidence),
    ]
    return tuple(cols)
