"""Builtin surfaces and curves with closed-form invariants.

All normals follow the ``P_u x P_v`` orientation of the parameterizations
below, and every expected ``(k_g, k_n, tau_g)`` is stated under that
convention:

========  ======================================  =====================
surface   position                                normal
========  ======================================  =====================
plane     (u, v, 0)                               +z
sphere    (sin u cos v, sin u sin v, cos u)       outward
cylinder  (a cos u, a sin u, v)                   outward
torus     ((R + r cos v) cos u, ..., r sin v)     outward
helicoid  (v cos u, v sin u, c u)                 (-c sin u, c cos u, -v)
========  ======================================  =====================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from .errors import ConfigError, UnknownEntry
from .geometry import CurveJet, ParamCurve, SurfaceJet, SurfacePatch


def _vec(x, y, z, shape):
    return np.stack(np.broadcast_arrays(*(np.broadcast_to(c, shape) for c in (x, y, z))), axis=-1)


def _shape(u, v):
    return np.broadcast(u, v).shape


def _plane(u, v):
    sh = _shape(u, v)
    z = np.zeros(sh)
    one = np.ones(sh)
    return SurfaceJet(_vec(u, v, z, sh), _vec(one, z, z, sh), _vec(z, one, z, sh),
                      _vec(z, z, z, sh), _vec(z, z, z, sh), _vec(z, z, z, sh))


def _sphere(u, v):
    sh = _shape(u, v)
    su, cu, sv, cv = np.sin(u), np.cos(u), np.sin(v), np.cos(v)
    z = np.zeros(sh)
    return SurfaceJet(
        _vec(su * cv, su * sv, cu, sh),
        _vec(cu * cv, cu * sv, -su, sh),
        _vec(-su * sv, su * cv, z, sh),
        _vec(-su * cv, -su * sv, -cu, sh),
        _vec(-cu * sv, cu * cv, z, sh),
        _vec(-su * cv, -su * sv, z, sh),
    )


def _cylinder(a):
    def ev(u, v):
        sh = _shape(u, v)
        su, cu = np.sin(u), np.cos(u)
        z = np.zeros(sh)
        return SurfaceJet(
            _vec(a * cu, a * su, v, sh),
            _vec(-a * su, a * cu, z, sh),
            _vec(z, z, z + 1.0, sh),
            _vec(-a * cu, -a * su, z, sh),
            _vec(z, z, z, sh),
            _vec(z, z, z, sh),
        )
    return ev


def _torus(R, r):
    def ev(u, v):
        sh = _shape(u, v)
        su, cu, sv, cv = np.sin(u), np.cos(u), np.sin(v), np.cos(v)
        A = R + r * cv
        z = np.zeros(sh)
        return SurfaceJet(
            _vec(A * cu, A * su, r * sv, sh),
            _vec(-A * su, A * cu, z, sh),
            _vec(-r * sv * cu, -r * sv * su, r * cv, sh),
            _vec(-A * cu, -A * su, z, sh),
            _vec(r * sv * su, -r * sv * cu, z, sh),
            _vec(-r * cv * cu, -r * cv * su, -r * sv, sh),
        )
    return ev


def _helicoid(c):
    def ev(u, v):
        sh = _shape(u, v)
        su, cu = np.sin(u), np.cos(u)
        z = np.zeros(sh)
        return SurfaceJet(
            _vec(v * cu, v * su, c * u, sh),
            _vec(-v * su, v * cu, z + c, sh),
            _vec(cu, su, z, sh),
            _vec(-v * cu, -v * su, z, sh),
            _vec(-su, cu, z, sh),
            _vec(z, z, z, sh),
        )
    return ev


def _linear(u0, du, v0, dv):
    """Curve ``(u0 + du t, v0 + dv t)``."""

    def func(t):
        z = np.zeros_like(t)
        return CurveJet(u0 + du * t, v0 + dv * t, z + du, z + dv, z, z)

    return func


def _constant(kg, kn, tg):
    def expected(t):
        z = np.zeros_like(np.asarray(t, dtype=float))
        return z + kg, z + kn, z + tg
    return expected


@dataclass(frozen=True)
class CatalogCurve:
    """A named curve family on a catalog surface.

    ``build(sp, cp)`` returns ``(func, t_range)`` and ``expected(sp, cp)``
    returns ``t -> (k_g, k_n, tau_g)``, where ``sp`` and ``cp`` are the
    surface and curve parameter dicts.
    """

    name: str
    params: Dict[str, Tuple[float, str]]
    build: Callable = field(repr=False)
    expected: Callable = field(repr=False)
    note: str = ""


@dataclass(frozen=True)
class _SurfaceSpec:
    name: str
    params: Dict[str, Tuple[float, str]]
    evaluator: Callable
    domain: Callable
    curves: Dict[str, CatalogCurve]
    validate: Callable = lambda p: None


def _resolve(spec_params, given, what):
    unknown = set(given) - set(spec_params)
    if unknown:
        raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for {what}; "
                          f"expected {sorted(spec_params) or 'none'}")
    out = {k: float(given.get(k, default)) for k, (default, _) in spec_params.items()}
    for k, val in out.items():
        if not math.isfinite(val):
            raise ConfigError(f"parameter {k} of {what} must be finite")
    return out


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: Dict[str, float]
    patch: SurfacePatch
    curves: Dict[str, CatalogCurve]

    def curve(self, name: str, t_range=None, **params) -> ParamCurve:
        fam = self._family(name)
        cp = _resolve(fam.params, params, f"curve {self.name}/{name}")
        func, default_range = fam.build(self.params, cp)
        return ParamCurve(func, t_range or default_range, name=f"{self.name}/{name}", params=cp)

    def expected(self, name: str, **params) -> Callable:
        """Closed-form ``t -> (k_g, k_n, tau_g)`` for a curve of this surface."""
        fam = self._family(name)
        cp = _resolve(fam.params, params, f"curve {self.name}/{name}")
        return fam.expected(self.params, cp)

    def _family(self, name) -> CatalogCurve:
        try:
            return self.curves[name]
        except KeyError:
            raise UnknownEntry(
                f"unknown curve {name!r} on {self.name}; available: "
                f"{', '.join(sorted(self.curves))}") from None


TWO_PI = 2.0 * math.pi


def _plane_spec():
    curves = {
        "u_line": CatalogCurve(
            "u_line", {"v0": (0.0, "v-level")},
            lambda sp, cp: (_linear(0.0, 1.0, cp["v0"], 0.0), (-1.0, 1.0)),
            lambda sp, cp: _constant(0.0, 0.0, 0.0), "straight line v = v0"),
        "v_line": CatalogCurve(
            "v_line", {"u0": (0.0, "u-level")},
            lambda sp, cp: (_linear(cp["u0"], 0.0, 0.0, 1.0), (-1.0, 1.0)),
            lambda sp, cp: _constant(0.0, 0.0, 0.0), "straight line u = u0"),
        "circle": CatalogCurve(
            "circle", {"radius": (1.0, "radius")},
            lambda sp, cp: (_circle(cp["radius"]), (0.0, TWO_PI)),
            lambda sp, cp: _constant(1.0 / cp["radius"], 0.0, 0.0),
            "counter-clockwise circle about the origin"),
    }
    return _SurfaceSpec("plane", {}, lambda p: _plane,
                        lambda p: ((-10.0, 10.0), (-10.0, 10.0)), curves)


def _circle(r):
    def func(t):
        c, s = np.cos(t), np.sin(t)
        return CurveJet(r * c, r * s, -r * s, r * c, -r * c, -r * s)
    return func


def _sphere_spec():
    curves = {
        "latitude": CatalogCurve(
            "latitude", {"theta0": (math.pi / 3, "colatitude")},
            lambda sp, cp: (_linear(cp["theta0"], 0.0, 0.0, 1.0), (0.0, TWO_PI)),
            lambda sp, cp: _constant(1.0 / math.tan(cp["theta0"]), -1.0, 0.0),
            "circle of constant colatitude"),
        "great_circle": CatalogCurve(
            "great_circle", {},
            lambda sp, cp: (_linear(math.pi / 2, 0.0, 0.0, 1.0), (0.0, TWO_PI)),
            lambda sp, cp: _constant(0.0, -1.0, 0.0), "the equator"),
        "meridian": CatalogCurve(
            "meridian", {"v0": (0.0, "longitude")},
            lambda sp, cp: (_linear(0.0, 1.0, cp["v0"], 0.0), (0.3, math.pi - 0.3)),
            lambda sp, cp: _constant(0.0, -1.0, 0.0), "meridian arc away from the poles"),
    }
    return _SurfaceSpec("sphere", {}, lambda p: _sphere,
                        lambda p: ((0.0, math.pi), (-2 * TWO_PI, 2 * TWO_PI)), curves)


def _cylinder_spec():
    def helix(sp, cp):
        a, al = sp["a"], cp["alpha"]
        return _linear(0.0, math.cos(al) / a, 0.0, math.sin(al)), (0.0, TWO_PI * min(1.0, a))

    def helix_expected(sp, cp):
        a, al = sp["a"], cp["alpha"]
        return _constant(0.0, -math.cos(al) ** 2 / a, math.sin(al) * math.cos(al) / a)

    curves = {
        "helix": CatalogCurve("helix", {"alpha": (math.pi / 4, "pitch angle")},
                              helix, helix_expected, "unit-speed helix at pitch angle alpha"),
        "circle": CatalogCurve(
            "circle", {"v0": (0.0, "height")},
            lambda sp, cp: (_linear(0.0, 1.0 / sp["a"], cp["v0"], 0.0), (0.0, TWO_PI * sp["a"])),
            lambda sp, cp: _constant(0.0, -1.0 / sp["a"], 0.0), "horizontal circle"),
        "ruling": CatalogCurve(
            "ruling", {"u0": (0.0, "angle")},
            lambda sp, cp: (_linear(cp["u0"], 0.0, 0.0, 1.0), (-1.0, 1.0)),
            lambda sp, cp: _constant(0.0, 0.0, 0.0), "vertical straight line"),
    }

    def validate(p):
        if not p["a"] > 0:
            raise ConfigError("cylinder radius a must be positive")

    return _SurfaceSpec("cylinder", {"a": (1.0, "radius")}, lambda p: _cylinder(p["a"]),
                        lambda p: ((-2 * TWO_PI, 2 * TWO_PI), (-10.0, 10.0)), curves, validate)


def _torus_spec():
    def parallel_expected(sp, cp):
        R, r, v0 = sp["R"], sp["r"], cp["v0"]
        A = R + r * math.cos(v0)
        return _constant(math.sin(v0) / A, -math.cos(v0) / A, 0.0)

    curves = {
        "parallel": CatalogCurve(
            "parallel", {"v0": (math.pi / 4, "tube angle")},
            lambda sp, cp: (_linear(0.0, 1.0, cp["v0"], 0.0), (0.0, TWO_PI)),
            parallel_expected, "circle of constant tube angle"),
        "meridian": CatalogCurve(
            "meridian", {"u0": (0.0, "angle")},
            lambda sp, cp: (_linear(cp["u0"], 0.0, 0.0, 1.0), (0.0, TWO_PI)),
            lambda sp, cp: _constant(0.0, -1.0 / sp["r"], 0.0), "tube cross-section circle"),
    }

    def validate(p):
        if not (p["R"] > p["r"] > 0):
            raise ConfigError("torus needs R > r > 0")

    return _SurfaceSpec("torus", {"R": (2.0, "major radius"), "r": (0.5, "minor radius")},
                        lambda p: _torus(p["R"], p["r"]),
                        lambda p: ((-2 * TWO_PI, 2 * TWO_PI), (-2 * TWO_PI, 2 * TWO_PI)),
                        curves, validate)


def _helicoid_spec():
    def ruling_expected(sp, cp):
        c = sp["c"]

        def expected(t):
            t = np.asarray(t, dtype=float)
            z = np.zeros_like(t)
            return z, z, -c / (c * c + t * t)
        return expected

    def helix_expected(sp, cp):
        c, v0 = sp["c"], cp["v0"]
        rho2 = c * c + v0 * v0
        return _constant(-v0 / rho2, 0.0, c / rho2)

    curves = {
        "ruling": CatalogCurve(
            "ruling", {"u0": (0.0, "angle")},
            lambda sp, cp: (_linear(cp["u0"], 0.0, 0.0, 1.0), (-1.0, 1.0)),
            ruling_expected, "straight line through the axis"),
        "helix": CatalogCurve(
            "helix", {"v0": (1.0, "radius")},
            lambda sp, cp: (_linear(0.0, 1.0, cp["v0"], 0.0), (0.0, TWO_PI)),
            helix_expected, "circular helix at distance v0 from the axis"),
    }

    def validate(p):
        if p["c"] == 0:
            raise ConfigError("helicoid pitch c must be nonzero")

    return _SurfaceSpec("helicoid", {"c": (1.0, "pitch")}, lambda p: _helicoid(p["c"]),
                        lambda p: ((-2 * TWO_PI, 2 * TWO_PI), (-5.0, 5.0)), curves, validate)


_SPECS = {s.name: s for s in (_plane_spec(), _sphere_spec(), _cylinder_spec(),
                              _torus_spec(), _helicoid_spec())}


def list_entries():
    return sorted(_SPECS)


def get_entry(name: str, **params) -> CatalogEntry:
    """Build the catalog surface ``name`` with the given parameters."""
    try:
        spec = _SPECS[name]
    except KeyError:
        raise UnknownEntry(
            f"unknown catalog surface {name!r}; available: {', '.join(list_entries())}") from None
    p = _resolve(spec.params, params, f"surface {name}")
    spec.validate(p)
    patch = SurfacePatch(spec.evaluator(p), spec.domain(p), name=name, params=p)
    return CatalogEntry(name, p, patch, spec.curves)


def describe():
    """Listing data: surfaces with parameter docs and their curve families."""
    out = []
    for name in list_entries():
        spec = _SPECS[name]
        out.append({
            "name": name,
            "params": {k: {"default": d, "meaning": m} for k, (d, m) in spec.params.items()},
            "curves": [
                {"name": c.name, "note": c.note,
                 "params": {k: {"default": d, "meaning": m} for k, (d, m) in c.params.items()}}
                for c in sorted(spec.curves.values(), key=lambda c: c.name)
            ],
        })
    return out


def default_combinations():
    """Every (surface, curve) pair of the catalog with default parameters."""
    for name in list_entries():
        entry = get_entry(name)
        for cname in sorted(entry.curves):
            yield entry, cname
