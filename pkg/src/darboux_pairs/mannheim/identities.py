"""Residual checks of the Mannheim D-pair relations on a constructed pair.

Every identity is written as a sum of terms that should cancel. The
residual series is that sum per station; ``normalized_max`` divides its
largest magnitude by the largest magnitude of any single term, floored at
``SCALE_FLOOR`` so that identically vanishing pairs do not divide by zero.

Notation on the shared grid: ``sigma = ds/ds1``, a trailing ``1`` marks the
partner, and ``dot_*`` are derivatives in the partner arc length ``s1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import UnknownIdentity
from ..framing import TAU_CLASS, CurveClass, classify
from ..geometry import ScalarSeries
from .pair import MannheimPair

SCALE_FLOOR = 1e-3
TAU_COINCIDE = 1e-7
ANGLE_GATE = 1e-3
VANISH_TOL = 1e-6


@dataclass(frozen=True)
class Identity:
    id: str
    description: str
    terms: Callable = field(repr=False)
    gate: Optional[Callable] = field(default=None, repr=False)
    station_gate: Optional[Callable] = field(default=None, repr=False)


@dataclass(frozen=True)
class IdentityResult:
    identity_id: str
    residual: ScalarSeries
    max_abs: float
    rms: float
    normalized_max: float
    scale: float
    applicable: bool
    gate_reason: str = ""
    description: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "id": self.identity_id,
            "applicable": self.applicable,
            "gate_reason": self.gate_reason,
            "max_abs": self.max_abs,
            "rms": self.rms,
            "normalized_max": self.normalized_max,
        }


@dataclass(frozen=True)
class VerificationReport:
    results: Tuple[IdentityResult, ...]
    pair: Dict[str, object]
    findings: Dict[str, object]

    def __getitem__(self, identity_id: str) -> IdentityResult:
        for r in self.results:
            if r.identity_id == identity_id:
                return r
        raise KeyError(identity_id)

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    @property
    def ids(self) -> List[str]:
        return [r.identity_id for r in self.results]

    def to_dict(self) -> Dict[str, object]:
        return {
            "pair": dict(self.pair),
            "findings": dict(self.findings),
            "identities": [r.to_dict() for r in self.results],
        }


# gates --------------------------------------------------------------------------

_FLAG = {"geodesic": ("is_geodesic", 0, "k_g"),
         "asymptotic": ("is_asymptotic", 1, "k_n"),
         "principal": ("is_principal", 2, "tau_g")}


def _requires(*conds):
    """Gate on classification flags; each cond is ``(role, kind)``."""

    def gate(q):
        reasons = []
        for role, kind in conds:
            cls: CurveClass = q.cls[role]
            attr, idx, sym = _FLAG[kind]
            if not getattr(cls, attr):
                label = "partner" if role == "partner" else "base"
                sym = sym + "1" if role == "partner" else sym
                reasons.append(f"{label} {sym} sup-norm {cls.sup_norms[idx]:.3g} "
                               f"exceeds tolerance {cls.tol:g}")
        return "; ".join(reasons) or None

    return gate


# identities ----------------------------------------------------------------------

def _registry() -> Tuple[Identity, ...]:
    def I(id_, desc, terms, gate=None, station_gate=None):  # noqa: E743
        return Identity(id_, desc, terms, gate, station_gate)

    ids = [
        I("COINCIDE", "|<g, n1>| - 1",
          lambda q: [np.abs(q.gn1), -np.ones_like(q.gn1)]),
        I("TAN_THETA", "tan(theta) + lam tau_g1 / (1 - lam k_n1)",
          lambda q: [np.tan(q.theta), q.lam * q.tau_g1 / q.a]),
        I("SPEED_A", "sigma - (1 - lam k_n1) / cos(theta)",
          lambda q: [q.sigma, -q.a / np.cos(q.theta)],
          station_gate=lambda q: np.abs(np.cos(q.theta)) > ANGLE_GATE),
        I("SPEED_B", "sigma + lam tau_g1 / sin(theta)",
          lambda q: [q.sigma, q.lam * q.tau_g1 / np.sin(q.theta)],
          station_gate=lambda q: np.abs(np.sin(q.theta)) > ANGLE_GATE),
        I("SPEED_SQ", "sigma^2 - (1 - lam k_n1)^2 - lam^2 tau_g1^2",
          lambda q: [q.sigma**2, -q.a**2, -(q.lam * q.tau_g1) ** 2]),
        I("THETA_DOT", "dot_theta + k_n sigma + k_g1",
          lambda q: [q.dot_theta, q.k_n * q.sigma, q.k_g1]),
        I("CHAR15", "k_n sigma^3 - lam dot_tau_g1 (1 - lam k_n1) - lam^2 tau_g1 dot_k_n1 "
                    "+ sigma^2 k_g1",
          lambda q: [q.k_n * q.sigma**3, -q.lam * q.dot_tau_g1 * q.a,
                     -q.lam**2 * q.tau_g1 * q.dot_k_n1, q.sigma**2 * q.k_g1]),
        I("CHAR14_P", "-lam dot_tau_g1 - S/(1 - lam k_n1) ((lam k_n1 - 1)/cos(theta) k_n + k_g1) "
                      "- lam^2 tau_g1 dot_k_n1 / (1 - lam k_n1), S = (1 - lam k_n1)^2 + lam^2 tau_g1^2",
          lambda q: _char14(q, +1.0)),
        I("CHAR14_M", "as CHAR14_P with k_g1 replaced by -k_g1",
          lambda q: _char14(q, -1.0)),
        I("CHAR14_N1", "as CHAR14_P with k_n1 in place of k_n inside the bracket",
          lambda q: _char14(q, +1.0, q.k_n1)),
        I("THM2", "k_g - k_n1 - lam (k_g k_n1 - tau_g tau_g1)",
          lambda q: [q.k_g, -q.k_n1, -q.lam * q.k_g * q.k_n1, q.lam * q.tau_g * q.tau_g1]),
        I("EQ28_C", "cos(theta) - (1 + lam k_g) sigma",
          lambda q: [np.cos(q.theta), -(1.0 + q.lam * q.k_g) * q.sigma]),
        I("EQ28_S", "sin(theta) + lam tau_g sigma",
          lambda q: [np.sin(q.theta), q.lam * q.tau_g * q.sigma]),
        I("EQ28_C_RECIP", "cos(theta) - (1 + lam k_g) / sigma",
          lambda q: [np.cos(q.theta), -(1.0 + q.lam * q.k_g) / q.sigma]),
        I("EQ28_S_RECIP", "sin(theta) + lam tau_g / sigma",
          lambda q: [np.sin(q.theta), q.lam * q.tau_g / q.sigma]),
        I("T3_I", "k_g1 + k_n sigma + dot_theta",
          lambda q: [q.k_g1, q.k_n * q.sigma, q.dot_theta]),
        I("T3_II", "tau_g sigma + k_n1 sin(theta) - tau_g1 cos(theta)",
          lambda q: [q.tau_g * q.sigma, q.k_n1 * np.sin(q.theta), -q.tau_g1 * np.cos(q.theta)]),
        I("T3_III", "k_g sigma - k_n1 cos(theta) - tau_g1 sin(theta)",
          lambda q: [q.k_g * q.sigma, -q.k_n1 * np.cos(q.theta), -q.tau_g1 * np.sin(q.theta)]),
        I("T3_IV", "tau_g1 - (k_g sin(theta) + tau_g cos(theta)) sigma",
          lambda q: [q.tau_g1, -q.k_g * np.sin(q.theta) * q.sigma,
                     -q.tau_g * np.cos(q.theta) * q.sigma]),
        I("COR2_A", "tau_g1 - sigma^2 tau_g",
          lambda q: [q.tau_g1, -q.sigma**2 * q.tau_g]),
        I("COR2_B", "tau_g tau_g1 - sin(theta)^2 / lam^2",
          lambda q: [q.tau_g * q.tau_g1, -np.sin(q.theta) ** 2 / q.lam**2]),
        I("COR3", "tau_g - cos(theta)^2 tau_g1",
          lambda q: [q.tau_g, -np.cos(q.theta) ** 2 * q.tau_g1],
          gate=_requires(("partner", "asymptotic"))),
        I("COR1_I", "k_g1 + sigma^3 (1 + lam^2 tau_g^2) k_n - sigma^2 lam dot_tau_g",
          lambda q: [q.k_g1, q.sigma**3 * (1.0 + (q.lam * q.tau_g) ** 2) * q.k_n,
                     -q.sigma**2 * q.lam * q.dot_tau_g],
          gate=_requires(("base", "geodesic"))),
        I("COR1_II", "k_g1 - lam sigma^2 (dot_tau_g (1 + lam k_g) - lam tau_g dot_k_g)",
          lambda q: [q.k_g1, -q.lam * q.sigma**2 * q.dot_tau_g * (1.0 + q.lam * q.k_g),
                     q.lam**2 * q.sigma**2 * q.tau_g * q.dot_k_g],
          gate=_requires(("base", "asymptotic"))),
        I("COR1_III", "k_g1 + sigma^3 (1 + lam k_g)^2 k_n",
          lambda q: [q.k_g1, q.sigma**3 * (1.0 + q.lam * q.k_g) ** 2 * q.k_n],
          gate=_requires(("base", "principal"))),
        I("SC_T1_I", "dot_tau_g1 + lam tau_g1 dot_k_n1 / (1 - lam k_n1)",
          lambda q: [q.dot_tau_g1, q.lam * q.tau_g1 * q.dot_k_n1 / q.a],
          gate=_requires(("base", "asymptotic"), ("partner", "geodesic"))),
        I("SC_T1_II", "lam dot_tau_g1 + (1 + lam^2 tau_g1^2) k_g1",
          lambda q: [q.lam * q.dot_tau_g1, (1.0 + (q.lam * q.tau_g1) ** 2) * q.k_g1],
          gate=_requires(("base", "asymptotic"), ("partner", "asymptotic"))),
        I("SC_T1_II_M", "lam dot_tau_g1 - (1 + lam^2 tau_g1^2) k_g1",
          lambda q: [q.lam * q.dot_tau_g1, -(1.0 + (q.lam * q.tau_g1) ** 2) * q.k_g1],
          gate=_requires(("base", "asymptotic"), ("partner", "asymptotic"))),
        I("SC_T1_III", "min(|k_g1|, |k_n1 - 1/lam|)",
          lambda q: _sc_t1_iii(q),
          gate=_requires(("base", "asymptotic"), ("partner", "principal"))),
        I("SC_T2_I", "k_g + lam tau_g tau_g1",
          lambda q: [q.k_g, q.lam * q.tau_g * q.tau_g1],
          gate=_requires(("partner", "asymptotic"))),
        I("SC_T2_II", "k_g - k_n1 - lam k_g k_n1",
          lambda q: [q.k_g, -q.k_n1, -q.lam * q.k_g * q.k_n1],
          gate=_requires(("partner", "principal"))),
        I("SC_T2_IV", "k_g - k_n1 - lam k_g k_n1",
          lambda q: [q.k_g, -q.k_n1, -q.lam * q.k_g * q.k_n1],
          gate=_requires(("base", "principal"))),
        I("SC_T2_III", "k_n1 - lam tau_g tau_g1",
          lambda q: [q.k_n1, -q.lam * q.tau_g * q.tau_g1],
          gate=_requires(("base", "geodesic"))),
        I("EQ30_P", "k_g1 - sigma^3 (-k_n1 (1 + lam k_g)^2 - lam^2 tau_g^2 k_n) "
                    "- sigma^2 (lam dot_tau_g (1 + lam k_g) - lam^2 tau_g dot_k_g)",
          lambda q: _eq30(q, q.k_n1)),
        I("EQ30_N", "as EQ30_P with the leading k_n1 replaced by k_n",
          lambda q: _eq30(q, q.k_n)),
    ]
    return tuple(ids)


def _char14(q, sign, slot=None):
    S = q.a**2 + (q.lam * q.tau_g1) ** 2
    slot = q.k_n if slot is None else slot
    return [-q.lam * q.dot_tau_g1,
            -(S / q.a) * (-q.a / np.cos(q.theta)) * slot,
            -(S / q.a) * sign * q.k_g1,
            -q.lam**2 * q.tau_g1 * q.dot_k_n1 / q.a]


def _eq30(q, leading):
    b = 1.0 + q.lam * q.k_g
    s2, s3 = q.sigma**2, q.sigma**3
    return [q.k_g1,
            s3 * leading * b**2,
            s3 * (q.lam * q.tau_g) ** 2 * q.k_n,
            -s2 * q.lam * q.dot_tau_g * b,
            s2 * q.lam**2 * q.tau_g * q.dot_k_g]


def _sc_t1_iii(q):
    # a minimum is not a sum; report it as a single term, scaled by its inputs
    res = np.minimum(np.abs(q.k_g1), np.abs(q.k_n1 - 1.0 / q.lam))
    return [res], [np.abs(q.k_g1), np.abs(q.k_n1), np.full_like(res, 1.0 / abs(q.lam))]


REGISTRY: Tuple[Identity, ...] = _registry()
IDENTITY_IDS: Tuple[str, ...] = tuple(i.id for i in REGISTRY)
_BY_ID = {i.id: i for i in REGISTRY}


def resolve_ids(ids: Union[None, str, Iterable[str]]) -> List[str]:
    """Normalize an identity filter to registry order; ``None`` or ``"ALL"`` selects all."""
    if ids is None:
        return list(IDENTITY_IDS)
    if isinstance(ids, str):
        ids = [p.strip() for p in ids.split(",") if p.strip()]
    ids = list(ids)
    if any(i.upper() == "ALL" for i in ids):
        return list(IDENTITY_IDS)
    unknown = [i for i in ids if i not in _BY_ID]
    if unknown or not ids:
        raise UnknownIdentity(
            f"unknown identity id(s) {', '.join(unknown) or '(empty)'}; "
            f"valid: {', '.join(IDENTITY_IDS)}, ALL")
    wanted = set(ids)
    return [i for i in IDENTITY_IDS if i in wanted]


def _quantities(pair: MannheimPair, tol_class: float) -> SimpleNamespace:
    p, b, r = pair.partner, pair.base, pair.rates
    return SimpleNamespace(
        lam=pair.lam, sigma=pair.speed_ratio.values, theta=pair.theta.values,
        a=1.0 - pair.lam * p.k_n, gn1=pair.coincidence,
        k_g=b.k_g, k_n=b.k_n, tau_g=b.tau_g,
        k_g1=p.k_g, k_n1=p.k_n, tau_g1=p.tau_g,
        dot_tau_g1=r.tau_g1, dot_k_n1=r.k_n1, dot_theta=r.theta,
        dot_tau_g=r.tau_g, dot_k_g=r.k_g,
        cls={"base": classify(b, tol_class), "partner": classify(p, tol_class)},
    )


def _evaluate(ident: Identity, q, grid) -> IdentityResult:
    empty = ScalarSeries(np.empty(0), np.empty(0))
    reason = ident.gate(q) if ident.gate else None
    if reason:
        return IdentityResult(ident.id, empty, np.nan, np.nan, np.nan, np.nan, False,
                              reason, ident.description)
    mask = np.ones(grid.size, dtype=bool)
    if ident.station_gate is not None:
        mask = ident.station_gate(q)
        if not np.any(mask):
            return IdentityResult(ident.id, empty, np.nan, np.nan, np.nan, np.nan, False,
                                  f"no station passes the |angle| > {ANGLE_GATE:g} gate",
                                  ident.description)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = ident.terms(q)
    terms, scale_terms = out if isinstance(out, tuple) else (out, out)
    residual = np.sum(np.broadcast_arrays(*terms), axis=0)
    residual = np.where(mask, residual, np.nan)
    scale = max(float(np.max(np.abs(np.where(mask, t, 0.0)))) for t in scale_terms)
    kept = residual[mask]
    max_abs = float(np.max(np.abs(kept)))
    rms = float(np.sqrt(np.mean(kept**2)))
    normalized = max_abs / max(scale, SCALE_FLOOR)
    return IdentityResult(ident.id, ScalarSeries(grid, residual), max_abs, rms, normalized,
                          scale, True, "", ident.description)


def _vanishing(results: Dict[str, IdentityResult], names: Sequence[str]) -> List[str]:
    return [n for n in names
            if n in results and results[n].applicable and results[n].normalized_max < VANISH_TOL]


def verify_pair(pair: MannheimPair, ids=None, tol_class: float = TAU_CLASS) -> VerificationReport:
    """Evaluate the requested identities (all by default) on ``pair``.

    Gated identities whose preconditions fail are reported with
    ``applicable=False`` and an explanatory ``gate_reason``.
    """
    wanted = resolve_ids(ids)
    q = _quantities(pair, tol_class)
    results = tuple(_evaluate(_BY_ID[i], q, pair.grid) for i in wanted)
    by_id = {r.identity_id: r for r in results}
    findings = {
        "coincidence_sign": pair.coincidence_sign,
        "char14_vanishing": _vanishing(by_id, ("CHAR14_P", "CHAR14_M", "CHAR14_N1")),
        "eq28_vanishing": _vanishing(by_id, ("EQ28_C", "EQ28_S", "EQ28_C_RECIP", "EQ28_S_RECIP")),
        "eq30_vanishing": _vanishing(by_id, ("EQ30_P", "EQ30_N")),
        "sc_t1_ii_vanishing": _vanishing(by_id, ("SC_T1_II", "SC_T1_II_M")),
        "base_class": _class_dict(q.cls["base"]),
        "partner_class": _class_dict(q.cls["partner"]),
        "tol_class": tol_class,
    }
    return VerificationReport(results, pair.metadata(), findings)


def _class_dict(c: CurveClass) -> Dict[str, object]:
    return {"geodesic": c.is_geodesic, "asymptotic": c.is_asymptotic,
            "principal": c.is_principal}
