"""Second-order forward-mode dual numbers over a few independent variables.

A :class:`Dual2` carries a value, its gradient and its Hessian, each as a
numpy array so one evaluation covers a whole grid of points. The gradient
has shape ``(n,) + shape`` and the Hessian ``(n, n) + shape``.
"""

from __future__ import annotations

import numpy as np


class Dual2:
    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = val
        self.grad = grad
        self.hess = hess

    @property
    def nvars(self) -> int:
        return self.grad.shape[0]

    @classmethod
    def constant(cls, value, nvars: int, shape=()):
        val = np.broadcast_to(np.asarray(value, dtype=float), shape).copy()
        return cls(val, np.zeros((nvars,) + val.shape), np.zeros((nvars, nvars) + val.shape))

    @classmethod
    def variable(cls, value, index: int, nvars: int):
        val = np.asarray(value, dtype=float)
        grad = np.zeros((nvars,) + val.shape)
        grad[index] = 1.0
        return cls(val, grad, np.zeros((nvars, nvars) + val.shape))

    def is_constant(self) -> bool:
        return not (np.any(self.grad) or np.any(self.hess))

    def __repr__(self):
        return f"Dual2(val={self.val!r}, grad={self.grad!r}, hess={self.hess!r})"

    # arithmetic ------------------------------------------------------------

    def __neg__(self):
        return Dual2(-self.val, -self.grad, -self.hess)

    def __add__(self, other):
        return Dual2(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other):
        return Dual2(self.val - other.val, self.grad - other.grad, self.hess - other.hess)

    def __mul__(self, other):
        a, b = self, other
        cross_terms = a.grad[:, None] * b.grad[None, :]
        return Dual2(
            a.val * b.val,
            a.grad * b.val + a.val * b.grad,
            a.hess * b.val + cross_terms + np.swapaxes(cross_terms, 0, 1) + a.val * b.hess,
        )

    def reciprocal(self):
        inv = 1.0 / self.val
        return self.apply(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        return self * other.reciprocal()

    def ipow(self, k: int):
        """Integer power by repeated squaring."""
        if k < 0:
            return self.ipow(-k).reciprocal()
        result = Dual2.constant(1.0, self.nvars, self.val.shape)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # chain rules -----------------------------------------------------------

    def apply(self, f, f1, f2):
        """Compose with a scalar function given its value and two derivatives."""
        g = self.grad
        return Dual2(f, f1 * g, f1 * self.hess + f2 * (g[:, None] * g[None, :]))

    @staticmethod
    def apply2(a, b, f, fa, fb, faa, fab, fbb):
        """Compose with a function of two arguments."""
        ga, gb = a.grad, b.grad
        aa = ga[:, None] * ga[None, :]
        bb = gb[:, None] * gb[None, :]
        ab = ga[:, None] * gb[None, :]
        return Dual2(
            f,
            fa * ga + fb * gb,
            fa * a.hess + fb * b.hess + faa * aa + fab * (ab + np.swapaxes(ab, 0, 1)) + fbb * bb,
        )


def sin(x):
    s, c = np.sin(x.val), np.cos(x.val)
    return x.apply(s, c, -s)


def cos(x):
    s, c = np.sin(x.val), np.cos(x.val)
    return x.apply(c, -s, -c)


def tan(x):
    t = np.tan(x.val)
    sec2 = 1.0 + t * t
    return x.apply(t, sec2, 2.0 * t * sec2)


def sinh(x):
    s, c = np.sinh(x.val), np.cosh(x.val)
    return x.apply(s, c, s)


def cosh(x):
    s, c = np.sinh(x.val), np.cosh(x.val)
    return x.apply(c, s, c)


def tanh(x):
    t = np.tanh(x.val)
    sech2 = 1.0 - t * t
    return x.apply(t, sech2, -2.0 * t * sech2)


def exp(x):
    e = np.exp(x.val)
    return x.apply(e, e, e)


def log(x):
    inv = 1.0 / x.val
    return x.apply(np.log(x.val), inv, -inv * inv)


def sqrt(x):
    r = np.sqrt(x.val)
    return x.apply(r, 0.5 / r, -0.25 / (r * x.val))


def absolute(x):
    sgn = np.sign(x.val)
    return x.apply(np.abs(x.val), sgn, np.zeros_like(x.val))


def atan2(y, x):
    r2 = x.val * x.val + y.val * y.val
    r4 = r2 * r2
    return Dual2.apply2(
        y, x, np.arctan2(y.val, x.val),
        x.val / r2, -y.val / r2,
        -2.0 * x.val * y.val / r4, (y.val * y.val - x.val * x.val) / r4, 2.0 * x.val * y.val / r4,
    )
