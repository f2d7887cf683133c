"""Manufactured functions with exact piecewise derivatives.

Projection operators need one-sided derivatives of their inputs at the
interface; these are supplied analytically, never by numerical
differentiation.  A smooth piece is any callable ``f(x, k=0)`` returning the
k-th derivative; admissible interface functions pair two such pieces and are
generated by extending a smooth left piece through the jump conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from ife1d.rife import JumpSequence, RifeFunction

__all__ = [
    "sine",
    "exponential",
    "shifted_poly",
    "combine",
    "scaled",
    "product",
    "PiecewiseSmooth",
    "jump_extended",
    "pulled_back",
    "sided_values",
]


def sine(omega=math.pi, amplitude=1.0, phase=0.0):
    """amplitude * sin(omega x + phase) with derivatives of every order."""

    def f(x, k=0):
        return amplitude * omega**k * np.sin(
            omega * np.asarray(x, float) + phase + 0.5 * k * math.pi
        )

    return f


def exponential(rate=1.0, amplitude=1.0):
    def f(x, k=0):
        return amplitude * rate**k * np.exp(rate * np.asarray(x, float))

    return f


def shifted_poly(coeffs, center=0.0):
    """Polynomial sum c_j (x - center)^j as a smooth piece."""
    coeffs = np.asarray(coeffs, dtype=float)

    def f(x, k=0):
        c = npoly.polyder(coeffs, k) if k else coeffs
        return npoly.polyval(np.asarray(x, float) - center, c)

    return f


def combine(*terms):
    def f(x, k=0):
        vals = [t(x, k) for t in terms]
        return np.sum(vals, axis=0)

    return f


def scaled(piece, factor):
    def f(x, k=0):
        return factor * piece(x, k)

    return f


def product(f, g):
    """Product of two smooth pieces, differentiated by the Leibniz rule."""

    def h(x, k=0):
        return sum(math.comb(k, j) * f(x, j) * g(x, k - j) for j in range(k + 1))

    return h


@dataclass(frozen=True)
class PiecewiseSmooth:
    """Two smooth pieces split at ``split``; value at the split is the left limit."""

    left: object
    right: object
    split: float

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        vals = np.where(x <= self.split, self.left(x, order), self.right(x, order))
        return vals if vals.ndim else float(vals)

    def eval_side(self, x, side: str, order: int = 0):
        piece = self.left if side == "-" else self.right
        return piece(np.asarray(x, dtype=float), order)

    def jump_violation(self, m: int, jumps: JumpSequence) -> float:
        """Worst relative violation of d^k u(a+) = r_k d^k u(a-) for k <= m."""
        worst = 0.0
        for k in range(m + 1):
            lv = float(self.left(self.split, k))
            rv = float(self.right(self.split, k))
            target = jumps[k] * lv
            worst = max(worst, abs(rv - target) / max(1.0, abs(target), abs(rv)))
        return worst


def jump_extended(left, m: int, split: float, jumps: JumpSequence, extra=None) -> PiecewiseSmooth:
    """Admissible function from a smooth left piece.

    The right piece is the order-m Taylor extension of ``left`` through the
    jump conditions, plus ``extra`` which must vanish to order m at the split
    (caller's responsibility, e.g. a shifted power >= m+1).
    """
    coeffs = np.array(
        [jumps[j] * float(left(split, j)) / math.factorial(j) for j in range(m + 1)]
    )
    ext = shifted_poly(coeffs, center=split)
    right = combine(ext, extra) if extra is not None else ext
    return PiecewiseSmooth(left, right, split)


def pulled_back(u: PiecewiseSmooth, origin: float, scale: float) -> PiecewiseSmooth:
    """The reference-interval view v(xi) = u(origin + scale xi) of u on an element.

    Derivatives pick up scale^k; the split maps to its relative position.
    """

    def make(piece):
        def f(xi, k=0):
            return scale**k * piece(origin + scale * np.asarray(xi, float), k)

        return f

    return PiecewiseSmooth(make(u.left), make(u.right), (u.split - origin) / scale)


def sided_values(v, x, side: str, order: int = 0):
    """One-sided derivative values for RifeFunction, PiecewiseSmooth or callables."""
    if isinstance(v, (RifeFunction, PiecewiseSmooth)):
        return v.eval_side(x, side, order)
    if order:
        raise ValueError(f"{type(v).__name__} cannot provide derivatives")
    return np.asarray(v(np.asarray(x, dtype=float)), dtype=float)
