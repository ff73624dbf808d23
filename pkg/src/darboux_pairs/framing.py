"""Frenet and Darboux frames of curves on surfaces, and their invariants.

Sign conventions: the surface normal is ``P_u x P_v`` normalized, the
Darboux frame is ``{T, g, n}`` with ``g = n x T``, and

    dT/ds =          k_g g + k_n n
    dg/ds = -k_g T         + tau_g n
    dn/ds = -k_n T - tau_g g

The Frenet angle ``phi = atan2(k_n, k_g)`` makes ``k_g = kappa cos(phi)``
and ``k_n = kappa sin(phi)``; with that choice ``tau_g = tau - dphi/ds``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import UndefinedAngle
from .geometry import (
    ArcLengthTable,
    CurveState,
    ParamCurve,
    SurfacePatch,
    arc_length_table,
    cross,
    curve_state,
    dot,
    embed_curve,
    five_point_derivative,
    norm,
    reparameterize,
)

EPS_CURV = 1e-8
TAU_CLASS = 1e-6


@dataclass(frozen=True)
class DarbouxFrame:
    T: np.ndarray
    g: np.ndarray
    n: np.ndarray


@dataclass(frozen=True)
class FrameInvariants:
    k_g: float
    k_n: float
    tau_g: float


@dataclass(frozen=True)
class FrenetData:
    """Frenet apparatus; ``N``, ``B``, ``tau`` and ``phi`` are None on straight stretches."""

    T: np.ndarray
    N: Optional[np.ndarray]
    B: Optional[np.ndarray]
    kappa: float
    tau: Optional[float]
    phi: Optional[float] = None

    @property
    def defined(self) -> bool:
        return self.N is not None


@dataclass(frozen=True)
class FramedSample:
    s: float
    x: np.ndarray
    frame: DarbouxFrame
    inv: FrameInvariants
    frenet: Optional[FrenetData]


@dataclass(frozen=True)
class FramedCurve:
    """Frames and invariants at a sequence of stations.

    Frenet quantities (``N``, ``B``, ``tau``, ``phi``) are NaN wherever the
    curvature is at or below ``EPS_CURV``; ``frenet_defined`` marks the rest.
    """

    s: np.ndarray
    t: np.ndarray
    x: np.ndarray
    T: np.ndarray
    g: np.ndarray
    n: np.ndarray
    k_g: np.ndarray
    k_n: np.ndarray
    tau_g: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    phi: np.ndarray
    N: np.ndarray
    B: np.ndarray
    speed: np.ndarray
    surface: str = ""
    curve: str = ""

    def __len__(self):
        return self.s.size

    @property
    def frenet_defined(self) -> np.ndarray:
        return self.kappa > EPS_CURV

    def sample(self, i: int) -> FramedSample:
        frenet = None
        if self.frenet_defined[i]:
            frenet = FrenetData(self.T[i], self.N[i], self.B[i], float(self.kappa[i]),
                                float(self.tau[i]), float(self.phi[i]))
        return FramedSample(
            float(self.s[i]), self.x[i],
            DarbouxFrame(self.T[i], self.g[i], self.n[i]),
            FrameInvariants(float(self.k_g[i]), float(self.k_n[i]), float(self.tau_g[i])),
            frenet,
        )

    def __iter__(self):
        return (self.sample(i) for i in range(len(self)))


@dataclass(frozen=True)
class CurveClass:
    is_geodesic: bool
    is_asymptotic: bool
    is_principal: bool
    sup_norms: tuple  # (max|k_g|, max|k_n|, max|tau_g|)
    tol: float = TAU_CLASS


def _third_derivative(patch, curve, t):
    h = 1e-3 * np.maximum(1.0, np.abs(t))
    return five_point_derivative(lambda tt: embed_curve(patch, curve, tt, check=False).d2x, t, h)


@dataclass(frozen=True)
class DarbouxArrays:
    """Frame vectors, invariants and speed at one or more stations."""

    T: np.ndarray
    g: np.ndarray
    n: np.ndarray
    k_g: np.ndarray
    k_n: np.ndarray
    tau_g: np.ndarray
    speed: np.ndarray


def darboux_invariants(dx, d2x, n, dn) -> DarbouxArrays:
    """Darboux frame and invariants from derivatives in an arbitrary parameter.

    ``dn`` is the rate of the unit normal along the same parameter as ``dx``.
    """
    sigma = norm(dx)
    T = dx / sigma[..., None]
    dT = (d2x - T * dot(T, d2x)[..., None]) / (sigma * sigma)[..., None]
    g = cross(n, T)
    dn_s = dn / sigma[..., None]
    dg = cross(dn_s, T) + cross(n, dT)
    return DarbouxArrays(T, g, n, dot(dT, g), dot(dT, n), dot(dg, n), sigma)


def _frame_arrays(st: CurveState, d3x, s, t, surface="", curve="") -> FramedCurve:
    d = darboux_invariants(st.dx, st.d2x, st.n, st.dn)
    sigma, T, g, n = d.speed, d.T, d.g, d.n
    k_g, k_n, tau_g = d.k_g, d.k_n, d.tau_g

    c = cross(st.dx, st.d2x)
    csize = norm(c)
    kappa = csize / sigma**3
    ok = kappa > EPS_CURV
    safe = np.where(ok, csize, 1.0)
    B = np.where(ok[..., None], c / safe[..., None], np.nan)
    N = cross(B, T)
    tau = np.where(ok, dot(c, d3x) / (safe * safe), np.nan)
    phi = np.where(ok, np.arctan2(k_n, k_g), np.nan)
    return FramedCurve(
        s=np.asarray(s, dtype=float), t=np.asarray(t, dtype=float), x=st.x, T=T, g=g, n=n,
        k_g=k_g, k_n=k_n, tau_g=tau_g, kappa=kappa, tau=tau, phi=phi, N=N, B=B,
        speed=sigma, surface=surface, curve=curve,
    )


def frame_at_parameters(patch: SurfacePatch, curve: ParamCurve, t, s) -> FramedCurve:
    """Frames at curve parameters ``t`` whose arc-length positions are ``s``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    st = curve_state(patch, curve, t)
    return _frame_arrays(st, _third_derivative(patch, curve, t), np.atleast_1d(s), t,
                         patch.name, curve.name)


def frame_curve(patch: SurfacePatch, curve: ParamCurve, n_stations: int = 200,
                table: Optional[ArcLengthTable] = None) -> FramedCurve:
    """Frames on a uniform arc-length grid of ``n_stations`` points."""
    if n_stations < 2:
        raise ValueError("n_stations must be >= 2")
    # regularity along the whole curve, not just at the stations
    curve_state(patch, curve, np.linspace(*curve.t_range, 4 * n_stations + 1))
    if table is None:
        table = arc_length_table(patch, curve)
    s = np.linspace(0.0, table.total_length, n_stations)
    return frame_at_parameters(patch, curve, reparameterize(table, s), s)


def frenet_at(dx, d2x, d3x=None, g=None) -> FrenetData:
    """Frenet frame, curvature and torsion from derivatives in any parameter.

    ``tau`` needs ``d3x``; ``phi`` needs the Darboux vector ``g``. On a
    straight stretch (``kappa <= EPS_CURV``) ``N``, ``B``, ``tau`` and
    ``phi`` are left undefined.
    """
    dx = np.asarray(dx, dtype=float)
    d2x = np.asarray(d2x, dtype=float)
    sigma = float(norm(dx))
    T = dx / sigma
    c = cross(dx, d2x)
    csize = float(norm(c))
    kappa = csize / sigma**3
    if kappa <= EPS_CURV:
        return FrenetData(T, None, None, kappa, None, None)
    B = c / csize
    N = cross(B, T)
    tau = None if d3x is None else float(dot(c, np.asarray(d3x, dtype=float)) / csize**2)
    phi = None
    if g is not None:
        phi = float(np.arctan2(dot(N, cross(T, g)), dot(N, g)))
    return FrenetData(T, N, B, kappa, tau, phi)


def darboux_at(patch: SurfacePatch, curve: ParamCurve, table: ArcLengthTable, s: float) -> FramedSample:
    """Darboux frame and invariants at arc length ``s``.

    The invariants are read off the frame derivatives:
    ``k_g = <dT/ds, g>``, ``k_n = <dT/ds, n>``, ``tau_g = <dg/ds, n>``.
    """
    t = reparameterize(table, s)
    return frame_at_parameters(patch, curve, t, s).sample(0)


def invariants_via_eq3(patch: SurfacePatch, curve: ParamCurve, table: ArcLengthTable, s):
    """Invariants from triple products of arc-length derivatives.

    ``k_g = <x', x'' x n>``, ``tau_g = <x', n x n'>`` and ``k_n = <x'', n>``
    with primes in arc length, obtained by chaining through ``t(s)``.
    Independent of the frame-derivative route in :func:`darboux_at`.
    """
    s_arr = np.asarray(s, dtype=float)
    t = reparameterize(table, s_arr)
    st = curve_state(patch, curve, t)
    sigma2 = dot(st.dx, st.dx)
    ts = 1.0 / np.sqrt(sigma2)
    tss = -dot(st.dx, st.d2x) / (sigma2 * sigma2)
    xs = st.dx * ts[..., None]
    xss = st.d2x * (ts * ts)[..., None] + st.dx * tss[..., None]
    ns = st.dn * ts[..., None]
    k_g = dot(xs, cross(xss, st.n))
    tau_g = dot(xs, cross(st.n, ns))
    k_n = dot(xss, st.n)
    if np.ndim(s_arr) == 0:
        return FrameInvariants(float(k_g), float(k_n), float(tau_g))
    return FrameInvariants(k_g, k_n, tau_g)


def phi_angle(sample: FramedSample) -> float:
    """Angle from ``g`` to the principal normal, ``atan2(k_n, k_g)``."""
    if sample.frenet is None or sample.frenet.kappa <= EPS_CURV:
        raise UndefinedAngle("curvature vanishes; the principal normal is undefined")
    return float(np.arctan2(sample.inv.k_n, sample.inv.k_g))


def classify(series: Union[FramedCurve, Sequence[FramedSample]], tol: float = TAU_CLASS) -> CurveClass:
    """Geodesic / asymptotic / principal-line flags from sup-norms of the invariants."""
    if isinstance(series, FramedCurve):
        kg, kn, tg = series.k_g, series.k_n, series.tau_g
    else:
        samples = list(series)
        if not samples:
            raise ValueError("empty series")
        kg = np.array([p.inv.k_g for p in samples])
        kn = np.array([p.inv.k_n for p in samples])
        tg = np.array([p.inv.tau_g for p in samples])
    sup = (float(np.max(np.abs(kg))), float(np.max(np.abs(kn))), float(np.max(np.abs(tg))))
    return CurveClass(sup[0] < tol, sup[1] < tol, sup[2] < tol, sup, tol)


# consistency checks -------------------------------------------------------------

def _stencil(s, h, L):
    """Offsets and weights for a second-order first derivative that stays in [0, L]."""
    s = np.asarray(s, dtype=float)
    fwd = s - h < 0
    bwd = s + h > L
    offsets = np.where(fwd[:, None], [0.0, h, 2 * h],
                       np.where(bwd[:, None], [-2 * h, -h, 0.0], [-h, 0.0, h]))
    weights = np.where(fwd[:, None], [-1.5, 2.0, -0.5],
                       np.where(bwd[:, None], [0.5, -2.0, 1.5], [-0.5, 0.0, 0.5])) / h
    return offsets, weights


def _frames_near(patch, curve, table, s, h):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    offsets, weights = _stencil(s, h, table.total_length)
    pts = np.clip(s[:, None] + offsets, 0.0, table.total_length)
    fr = frame_at_parameters(patch, curve, reparameterize(table, pts.ravel()), pts.ravel())
    return s, fr, weights


def frame_ode_residual(patch: SurfacePatch, curve: ParamCurve, table: ArcLengthTable, s,
                       h: float = 1e-3) -> np.ndarray:
    """Max componentwise mismatch between differenced frames and the Darboux equations."""
    s, fr, w = _frames_near(patch, curve, table, s, h)
    here = frame_at_parameters(patch, curve, reparameterize(table, s), s)

    def rate(vec):
        return np.einsum("ik,ikj->ij", w, vec.reshape(len(s), 3, 3))

    kg, kn, tg = (a[:, None] for a in (here.k_g, here.k_n, here.tau_g))
    res_T = rate(fr.T) - (kg * here.g + kn * here.n)
    res_g = rate(fr.g) - (-kg * here.T + tg * here.n)
    res_n = rate(fr.n) - (-kn * here.T - tg * here.g)
    return np.max(np.abs(np.concatenate([res_T, res_g, res_n], axis=1)), axis=1)


def torsion_closure_residual(patch: SurfacePatch, curve: ParamCurve, table: ArcLengthTable, s,
                             h: float = 1e-3) -> np.ndarray:
    """``tau_g - tau + dphi/ds`` with ``dphi/ds`` differenced; NaN where kappa vanishes."""
    s, fr, w = _frames_near(patch, curve, table, s, h)
    here = frame_at_parameters(patch, curve, reparameterize(table, s), s)
    phi = fr.phi.reshape(len(s), 3)
    center = here.phi[:, None]
    phi = center + np.angle(np.exp(1j * (phi - center)))
    dphi = np.einsum("ik,ik->i", w, phi)
    return here.tau_g - here.tau + dphi


def curvature_closure(framed: FramedCurve) -> np.ndarray:
    """Relative mismatch ``(k_g^2 + k_n^2 - kappa^2) / kappa^2``; NaN where kappa vanishes."""
    ok = framed.frenet_defined
    k2 = np.where(ok, framed.kappa**2, 1.0)
    return np.where(ok, (framed.k_g**2 + framed.k_n**2 - framed.kappa**2) / k2, np.nan)
