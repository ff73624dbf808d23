"""Shared constructions for the test suite."""

from __future__ import annotations

import math
import random

import numpy as np
from scipy.integrate import solve_ivp

from darboux_pairs.catalog import default_combinations
from darboux_pairs.dsl.ast import BinOp, Call, Const, Neg, Num, Var
from darboux_pairs.errors import SingularOffset
from darboux_pairs.geometry import SurfaceJet, SurfacePatch, line_curve
from darboux_pairs.mannheim import build_pair

LAMBDAS = (-0.25, -0.1, 0.1, 0.25, 0.5)


def catalog_pairs(n_stations=256, lambdas=LAMBDAS):
    """Every catalog partner with every offset that is not singular."""
    out = []
    for entry, cname in default_combinations():
        for lam in lambdas:
            try:
                pair = build_pair(entry.patch, entry.curve(cname), lam, n_stations)
            except SingularOffset:
                continue
            out.append((f"{entry.name}/{cname}/{lam:+g}", pair))
    return out


# principal-normal ribbon ------------------------------------------------------------

def frenet_ribbon(kappa, tau, dkappa, dtau, s_range, half_width=0.2):
    """Surface ``x(s) + v N(s)`` swept by the principal normal of a unit-speed curve.

    The curve is integrated from its Frenet equations. Along ``v = 0`` the
    surface normal is the binormal, so the curve is an asymptotic line with
    ``k_g = kappa`` and ``tau_g = tau``.
    """
    y0 = np.concatenate([np.zeros(3), np.eye(3).ravel()])

    def rhs(s, y):
        T, N, B = y[3:6], y[6:9], y[9:12]
        k, t = kappa(s), tau(s)
        return np.concatenate([T, k * N, -k * T + t * B, -t * N])

    sol = solve_ivp(rhs, s_range, y0, method="DOP853", rtol=1e-13, atol=1e-14,
                    dense_output=True)

    def evaluator(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        shape = np.broadcast(u, v).shape
        ub = np.broadcast_to(u, shape).ravel()
        vb = np.broadcast_to(v, shape).ravel()[:, None]
        y = sol.sol(ub).T
        x, T, N, B = y[:, 0:3], y[:, 3:6], y[:, 6:9], y[:, 9:12]
        k, t = kappa(ub)[:, None], tau(ub)[:, None]
        dk, dt = dkappa(ub)[:, None], dtau(ub)[:, None]
        jet = (
            x + vb * N,
            T + vb * (-k * T + t * B),
            N,
            k * N + vb * (-dk * T - (k * k + t * t) * N + dt * B),
            -k * T + t * B,
            np.zeros_like(x),
        )
        return SurfaceJet(*(a.reshape(shape + (3,)) for a in jet))

    patch = SurfacePatch(evaluator, (s_range, (-half_width, half_width)), name="ribbon")
    return patch, line_curve(s_range, name="spine")


def mannheim_ribbon(lam=0.5, rate=0.5, s_max=1.5):
    """A spine with ``kappa = rate`` and ``lam * tau = tan(rate * s)``.

    Such a spine satisfies ``lam tau' = (1 + lam^2 tau^2) kappa``, so its
    offset by ``lam`` along the binormal is again an asymptotic line.
    """
    kappa = lambda s: np.full_like(np.asarray(s, dtype=float), rate)  # noqa: E731
    dkappa = lambda s: np.zeros_like(np.asarray(s, dtype=float))  # noqa: E731
    tau = lambda s: np.tan(rate * np.asarray(s)) / lam  # noqa: E731
    dtau = lambda s: rate / np.cos(rate * np.asarray(s)) ** 2 / lam  # noqa: E731
    return frenet_ribbon(kappa, tau, dkappa, dtau, (0.0, s_max))


# random expressions ------------------------------------------------------------------

_UNARY = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs")


def random_expr(rng: random.Random, depth: int, variables=("u", "v")):
    """Any syntactically valid tree; values may fall outside function domains."""
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.45:
            return Var(rng.choice(variables))
        if r < 0.55:
            return Const(rng.choice(("pi", "e")))
        return Num(float(rng.choice([rng.randint(0, 9), round(rng.uniform(0, 10), 3),
                                     rng.choice([1e-3, 2.5e4, 0.125])])))
    r = rng.random()
    if r < 0.45:
        op = rng.choice("+-*/^")
        return BinOp(op, random_expr(rng, depth - 1, variables), random_expr(rng, depth - 1, variables))
    if r < 0.6:
        return Neg(random_expr(rng, depth - 1, variables))
    if r < 0.7:
        return Call("atan2", (random_expr(rng, depth - 1, variables),
                              random_expr(rng, depth - 1, variables)))
    return Call(rng.choice(_UNARY), (random_expr(rng, depth - 1, variables),))


def random_smooth_expr(rng: random.Random, depth: int, variables=("u", "v")):
    """A tree that is smooth and finite for arguments in [-1, 1]."""
    if depth <= 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            return Var(rng.choice(variables))
        return Num(round(rng.uniform(-2, 2), 3))
    a = random_smooth_expr(rng, depth - 1, variables)
    b = random_smooth_expr(rng, depth - 1, variables)
    pick = rng.randrange(11)
    if pick == 0:
        return BinOp("+", a, b)
    if pick == 1:
        return BinOp("-", a, b)
    if pick == 2:
        return BinOp("*", a, b)
    if pick == 3:  # bounded-away denominator
        return BinOp("/", a, BinOp("+", Num(2.0), Call("cos", (b,))))
    if pick == 4:
        return BinOp("^", Call("tanh", (a,)), Num(float(rng.randint(2, 3))))
    if pick == 5:
        return Call("sin", (a,))
    if pick == 6:
        return Call("exp", (Call("cos", (a,)),))
    if pick == 7:
        return Call("log", (BinOp("+", Num(1.5), Call("sin", (a,))),))
    if pick == 8:
        return Call("sqrt", (BinOp("+", Num(1.0), BinOp("^", a, Num(2.0))),))
    if pick == 9:
        return Call("atan2", (Call("sin", (a,)), BinOp("+", Num(2.0), Call("cos", (b,)))))
    return BinOp("^", BinOp("+", Num(2.0), Call("tanh", (a,))), Call("cos", (b,)))


def max_rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


TWO_PI = 2 * math.pi
