"""Test whether two framed curves form a Mannheim D-pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import NoCorrespondence
from ..framing import frame_at_parameters
from ..geometry import ParamCurve, SurfacePatch, dot, embed_curve, norm


@dataclass(frozen=True)
class CandidateResult:
    is_pair: bool
    lambda_estimate: float
    worst_coincidence: float
    lambda_std: float
    max_line_distance: float
    t_a: np.ndarray
    t_b: np.ndarray

    def to_dict(self):
        return {"is_pair": self.is_pair, "lambda_estimate": self.lambda_estimate,
                "worst_coincidence": self.worst_coincidence, "lambda_std": self.lambda_std,
                "max_line_distance": self.max_line_distance}


def _line_hits(patch_a, curve_a, ts, xa, x_b, n_b):
    """Parameters on curve A closest to the line ``x_b + mu n_b``, one per local minimum."""

    def perp(x):
        r = x - x_b
        return r - np.multiply.outer(dot(r, n_b), n_b)

    def slope(t):
        jet = embed_curve(patch_a, curve_a, np.array([t]), check=False)
        return float(dot(perp(jet.x[0]), jet.dx[0]))

    d2 = dot(perp(xa), perp(xa))
    hits = []
    for i in range(len(ts)):
        lo, hi = max(i - 1, 0), min(i + 1, len(ts) - 1)
        if not (d2[i] <= d2[lo] and d2[i] <= d2[hi]):
            continue
        if i in (0, len(ts) - 1):
            hits.append(ts[i])
            continue
        a, b = ts[lo], ts[hi]
        fa, fb = slope(a), slope(b)
        if fa == 0.0:
            hits.append(a)
        elif fb == 0.0:
            hits.append(b)
        elif fa * fb < 0:
            hits.append(brentq(slope, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        else:
            hits.append(ts[i])
    return np.unique(np.array(hits))


def check_candidate_pair(patch_a: SurfacePatch, curve_a: ParamCurve,
                         patch_b: SurfacePatch, curve_b: ParamCurve,
                         tol: float = 1e-6, n_stations: int = 64,
                         n_search: int = 2001) -> CandidateResult:
    """Check the Mannheim D-property with curve A as base and curve B as partner.

    At each of ``n_stations`` parameters of B, the point of A on the line
    through ``x_B`` along ``n_B`` is located (smallest offset among exact
    hits). The pair passes when ``|<g_A, n_B>|`` stays within ``tol`` of 1,
    the offset ``<x_A - x_B, n_B>`` is constant to ``tol`` relative, and
    every matched point lies on its line to ``tol``.

    Raises
    ------
    NoCorrespondence
        Two hits tie for the smallest offset, or the offset is zero.
    """
    tb = np.linspace(*curve_b.t_range, n_stations)
    fb = frame_at_parameters(patch_b, curve_b, tb, np.zeros_like(tb))
    ts = np.linspace(*curve_a.t_range, n_search)
    xa = embed_curve(patch_a, curve_a, ts).x
    scale = max(1.0, float(np.max(norm(xa))))

    t_match = np.empty(n_stations)
    for j in range(n_stations):
        x_b, n_b = fb.x[j], fb.n[j]
        hits = _line_hits(patch_a, curve_a, ts, xa, x_b, n_b)
        xh = embed_curve(patch_a, curve_a, hits, check=False).x
        r = xh - x_b
        mu = dot(r, n_b)
        dist = norm(r - np.multiply.outer(mu, n_b))
        on_line = dist <= max(tol, 1e-9) * scale
        if not np.any(on_line):
            t_match[j] = hits[np.argmin(dist)]
            continue
        cand, cmu = hits[on_line], mu[on_line]
        order = np.argsort(np.abs(cmu))
        best = order[0]
        if abs(cmu[best]) <= tol * scale:
            raise NoCorrespondence(
                f"zero offset at t_B = {tb[j]:.6g}: the curves meet, lambda must be nonzero")
        if order.size > 1 and abs(abs(cmu[order[1]]) - abs(cmu[best])) <= tol * scale:
            raise NoCorrespondence(
                f"ambiguous correspondence at t_B = {tb[j]:.6g}: offsets "
                f"{cmu[best]:.6g} and {cmu[order[1]]:.6g}")
        t_match[j] = cand[best]

    fa = frame_at_parameters(patch_a, curve_a, t_match, np.zeros_like(t_match))
    r = fa.x - fb.x
    lam = dot(r, fb.n)
    dist = norm(r - lam[:, None] * fb.n)
    worst = float(np.max(np.abs(1.0 - np.abs(dot(fa.g, fb.n)))))
    mean = float(np.mean(lam))
    std = float(np.std(lam))
    max_dist = float(np.max(dist))
    is_pair = bool(worst < tol and std < tol * abs(mean) and max_dist < tol * scale)
    return CandidateResult(is_pair, mean, worst, std, max_dist, t_match, tb)
