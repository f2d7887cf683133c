"""Piecewise-polynomial spaces on [0, 1] with extended jump conditions.

A function in the degree-m space with interface at ``alpha_hat`` and jump
sequence r is a pair of polynomials, one per subinterval, whose one-sided
derivatives at the interface satisfy d^k u(a+) = r_k d^k u(a-).  Both pieces
are stored in the shifted monomial basis (x - alpha_hat)^k, which turns every
jump condition into the coefficient identity right_k = r_k * left_k.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "JumpSequence",
    "RefInterface",
    "RifeFunction",
    "PiecewiseQuadrature",
    "canonical_basis",
    "full_canonical_basis",
    "extend",
    "differentiate",
    "lagrange_basis",
    "inner_product",
    "orthogonal_function",
    "boundary_ratio_J",
    "inverse_constant",
    "l2_norm",
    "seminorm",
    "sobolev_norm",
    "lincomb",
    "count_sign_changes",
    "DegenerateDerivativeWarning",
]


class DegenerateDerivativeWarning(UserWarning):
    """Raised when differentiating a degree-0 function (shift undefined)."""


@dataclass(frozen=True)
class JumpSequence:
    """Positive coefficients (r_0, ..., r_mtilde) linking one-sided derivatives."""

    r: tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        if len(r) == 0:
            raise ValueError("jump sequence must be non-empty")
        if any(v <= 0.0 for v in r):
            raise ValueError(f"jump coefficients must be positive, got {r}")
        object.__setattr__(self, "r", r)

    def __len__(self):
        return len(self.r)

    def __getitem__(self, k):
        return self.r[k]

    def tau(self) -> "JumpSequence":
        """Shift operator: drop r_0.  Governs differentiation."""
        if len(self.r) < 2:
            raise ValueError("cannot shift a length-1 jump sequence")
        return JumpSequence(self.r[1:])

    def reciprocal(self) -> "JumpSequence":
        return JumpSequence(tuple(1.0 / v for v in self.r))

    @staticmethod
    def ones(n: int) -> "JumpSequence":
        return JumpSequence((1.0,) * n)


@dataclass(frozen=True)
class RefInterface:
    """Interface location alpha_hat in (0, 1) on the reference interval."""

    alpha_hat: float

    def __post_init__(self):
        if not 0.0 < self.alpha_hat < 1.0:
            raise ValueError(f"alpha_hat must be in (0, 1), got {self.alpha_hat}")

    @property
    def h_minus(self) -> float:
        return self.alpha_hat

    @property
    def h_plus(self) -> float:
        return 1.0 - self.alpha_hat


def _check_degree(m: int, jumps: JumpSequence):
    if m < 0:
        raise ValueError(f"degree must be nonnegative, got {m}")
    if len(jumps) < m + 1:
        raise ValueError(
            f"jump sequence of length {len(jumps)} too short for degree {m}"
        )


@dataclass(frozen=True)
class RifeFunction:
    """A member of the degree-m reference IFE space.

    ``left`` and ``right`` hold the coefficients of the two pieces in the
    shifted monomial basis (x - alpha_hat)^k; right_k = r_k * left_k always.
    Evaluation is piecewise with the left piece on [0, alpha_hat] (the value
    at the interface itself is the left limit).
    """

    m: int
    iface: RefInterface
    jumps: JumpSequence
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        _check_degree(self.m, self.jumps)
        left = np.asarray(self.left, dtype=float)
        right = np.asarray(self.right, dtype=float)
        if left.shape != (self.m + 1,) or right.shape != (self.m + 1,):
            raise ValueError("coefficient arrays must have length m + 1")
        r = np.array(self.jumps.r[: self.m + 1])
        scale = np.maximum(np.abs(r * left), np.abs(right))
        if np.any(np.abs(right - r * left) > 1e-9 * np.maximum(scale, 1e-30) + 1e-300):
            raise ValueError("jump conditions right_k = r_k * left_k violated")
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @staticmethod
    def from_left(m, iface, jumps, left) -> "RifeFunction":
        left = np.asarray(left, dtype=float)
        r = np.array(jumps.r[: m + 1])
        return RifeFunction(m, iface, jumps, left, r * left)

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x, order: int = 0):
        """Piecewise value (or ``order``-th derivative) at x in [0, 1]."""
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-14) or np.any(x > 1.0 + 1e-14):
            raise ValueError("evaluation point outside [0, 1]")
        a = self.iface.alpha_hat
        cl = npoly.polyder(self.left, order) if order else self.left
        cr = npoly.polyder(self.right, order) if order else self.right
        on_left = x <= a
        vals = np.where(on_left, npoly.polyval(x - a, cl), npoly.polyval(x - a, cr))
        return vals if vals.ndim else float(vals)

    def eval_side(self, x, side: str, order: int = 0):
        """One-sided value/derivative using the piece for ``side`` ('-' or '+')."""
        coeffs = self.left if side == "-" else self.right
        if order:
            coeffs = npoly.polyder(coeffs, order)
        return npoly.polyval(np.asarray(x, dtype=float) - self.iface.alpha_hat, coeffs)

    def _same_space(self, other: "RifeFunction"):
        if (
            self.m != other.m
            or self.iface != other.iface
            or self.jumps.r[: self.m + 1] != other.jumps.r[: other.m + 1]
        ):
            raise ValueError("operands live in different IFE spaces")

    def __add__(self, other):
        self._same_space(other)
        return RifeFunction(
            self.m, self.iface, self.jumps, self.left + other.left, self.right + other.right
        )

    def __sub__(self, other):
        self._same_space(other)
        return RifeFunction(
            self.m, self.iface, self.jumps, self.left - other.left, self.right - other.right
        )

    def __mul__(self, c):
        c = float(c)
        return RifeFunction(self.m, self.iface, self.jumps, c * self.left, c * self.right)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def canonical_basis(m: int, iface: RefInterface, jumps: JumpSequence, k: int) -> RifeFunction:
    """The k-th canonical basis function: (x-a)^k on the left, r_k (x-a)^k on the right."""
    _check_degree(m, jumps)
    if not 0 <= k <= m:
        raise IndexError(f"basis index {k} outside 0..{m}")
    left = np.zeros(m + 1)
    left[k] = 1.0
    return RifeFunction.from_left(m, iface, jumps, left)


def full_canonical_basis(m, iface, jumps) -> list[RifeFunction]:
    return [canonical_basis(m, iface, jumps, k) for k in range(m + 1)]


def extend(m: int, iface: RefInterface, jumps: JumpSequence, side: str, coeffs) -> RifeFunction:
    """Extend a degree-m polynomial from one side to a full IFE function.

    ``coeffs`` are the shifted-monomial coefficients of the piece living on
    ``side``; the other piece is the unique polynomial making the pair satisfy
    the jump conditions.  Positive r makes this linear and invertible.
    """
    _check_degree(m, jumps)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (m + 1,):
        raise ValueError("expected m + 1 coefficients")
    r = np.array(jumps.r[: m + 1])
    if side == "-":
        return RifeFunction(m, iface, jumps, coeffs, r * coeffs)
    if side == "+":
        return RifeFunction(m, iface, jumps, coeffs / r, coeffs)
    raise ValueError(f"side must be '-' or '+', got {side!r}")


def differentiate(f: RifeFunction) -> RifeFunction:
    """Piecewise derivative; lives in the degree m-1 space with shifted jumps."""
    if f.m == 0:
        warnings.warn(
            "derivative of a degree-0 function: returning the zero function "
            "with trivial jumps",
            DegenerateDerivativeWarning,
            stacklevel=2,
        )
        return RifeFunction(0, f.iface, JumpSequence((1.0,)), np.zeros(1), np.zeros(1))
    return RifeFunction(
        f.m - 1,
        f.iface,
        f.jumps.tau(),
        npoly.polyder(f.left),
        npoly.polyder(f.right),
    )


# ---------------------------------------------------------------------------
# quadrature and inner products
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _gauss_on(lo: float, hi: float, n: int):
    x, w = _gauss(n)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return mid + half * x, half * w


@dataclass(frozen=True)
class PiecewiseQuadrature:
    """Gauss nodes/weights on [0, a] and [a, 1], exact per piece to degree 2n-1."""

    iface: RefInterface
    nodes_minus: np.ndarray
    weights_minus: np.ndarray
    nodes_plus: np.ndarray
    weights_plus: np.ndarray

    @staticmethod
    def build(iface: RefInterface, n: int) -> "PiecewiseQuadrature":
        a = iface.alpha_hat
        xm, wm = _gauss_on(0.0, a, n)
        xp, wp = _gauss_on(a, 1.0, n)
        return PiecewiseQuadrature(iface, xm, wm, xp, wp)

    @property
    def nodes(self):
        return np.concatenate([self.nodes_minus, self.nodes_plus])

    @property
    def weights(self):
        return np.concatenate([self.weights_minus, self.weights_plus])

    def integrate(self, values_minus, values_plus) -> float:
        return float(self.weights_minus @ values_minus + self.weights_plus @ values_plus)


def _as_weight(w):
    """Normalize a weight spec to the pair (w_minus, w_plus)."""
    if w is None:
        return 1.0, 1.0
    if np.isscalar(w):
        return float(w), float(w)
    wm, wp = w
    return float(wm), float(wp)


def _side_values(f, x, side, order=0):
    if isinstance(f, RifeFunction):
        return f.eval_side(x, side, order)
    if order:
        raise ValueError("derivative quadrature needs a RifeFunction")
    return np.asarray(f(x), dtype=float)


def inner_product(f, g, w=None, iface=None, npoints=None) -> float:
    """Weighted L2 inner product on [0, 1], split at the interface.

    ``f`` and ``g`` may be RifeFunction values or plain callables; ``w`` is a
    piecewise constant (w_minus, w_plus) or a scalar.  Integration is exact
    for IFE pairs at the default point count.
    """
    for cand in (f, g):
        if isinstance(cand, RifeFunction):
            iface = cand.iface
            break
    if iface is None:
        raise ValueError("need a RifeFunction argument or an explicit iface")
    if npoints is None:
        degrees = [c.m for c in (f, g) if isinstance(c, RifeFunction)]
        npoints = max(degrees) + 2 if len(degrees) == 2 else 32
    quad = PiecewiseQuadrature.build(iface, npoints)
    wm, wp = _as_weight(w)
    vm = wm * _side_values(f, quad.nodes_minus, "-") * _side_values(g, quad.nodes_minus, "-")
    vp = wp * _side_values(f, quad.nodes_plus, "+") * _side_values(g, quad.nodes_plus, "+")
    return quad.integrate(vm, vp)


def l2_norm(f, iface=None, npoints=None) -> float:
    return float(np.sqrt(max(inner_product(f, f, None, iface, npoints), 0.0)))


def seminorm(f: RifeFunction, i: int) -> float:
    """|f|_i on [0, 1] using piecewise i-th derivatives (zero for i > m)."""
    if i == 0:
        return l2_norm(f)
    if i > f.m:
        return 0.0
    g = f
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateDerivativeWarning)
        for _ in range(i):
            g = differentiate(g)
    return l2_norm(g)


def sobolev_norm(f: RifeFunction, i: int) -> float:
    return float(np.sqrt(sum(seminorm(f, j) ** 2 for j in range(i + 1))))


def lincomb(coeffs, funcs) -> RifeFunction:
    """Linear combination of IFE functions from one space."""
    funcs = list(funcs)
    coeffs = np.asarray(coeffs, dtype=float)
    if len(funcs) != len(coeffs) or not funcs:
        raise ValueError("need matching, non-empty coefficients and functions")
    out = coeffs[0] * funcs[0]
    for c, f in zip(coeffs[1:], funcs[1:]):
        out = out + c * f
    return out


# ---------------------------------------------------------------------------
# Lagrange basis, orthogonal functions, diagnostics
# ---------------------------------------------------------------------------


def lagrange_basis(m, iface, jumps, nodes) -> list[RifeFunction]:
    """Basis L_i with L_i(nodes[j]) = delta_ij, for any m+1 distinct nodes."""
    _check_degree(m, jumps)
    nodes = np.asarray(nodes, dtype=float)
    if nodes.shape != (m + 1,):
        raise ValueError(f"need exactly {m + 1} nodes")
    if np.min(np.diff(np.sort(nodes))) < 1e-13:
        raise ValueError("duplicate interpolation nodes")
    basis = full_canonical_basis(m, iface, jumps)
    E = np.column_stack([b.eval(nodes) for b in basis])
    if np.linalg.cond(E) > 1e12:
        # cannot happen by the root bound; signals a bug upstream
        raise RuntimeError("degenerate nodes: Lagrange system singular to tolerance")
    coeffs = np.linalg.solve(E, np.eye(m + 1))
    return [lincomb(coeffs[:, i], basis) for i in range(m + 1)]


def orthogonal_function(m, iface, w, jumps) -> RifeFunction:
    """Unit-L2 function orthogonal to the degree m-1 space in the w-inner product.

    Built by Gram-Schmidt over the canonical basis; it has exactly m distinct
    interior roots, like a classical orthogonal polynomial.
    """
    if m < 1:
        raise ValueError("orthogonal complement undefined for m = 0")
    _check_degree(m, jumps)
    basis = full_canonical_basis(m, iface, jumps)
    ortho: list[RifeFunction] = []
    for i, cand in enumerate(basis):
        acc = cand
        for prev in ortho:
            proj = inner_product(cand, prev, w) / inner_product(prev, prev, w)
            acc = acc - proj * prev
        if i < m:
            ortho.append(acc)
    return (1.0 / l2_norm(acc)) * acc


def boundary_ratio_J(m, iface, w, jumps) -> float:
    """Endpoint-to-norm ratio (O(0)^2 + O(1)^2) / ||O||^2 of the orthogonal function.

    Independent of the normalization of O; positive and bounded away from
    zero uniformly in the interface location.
    """
    o = orthogonal_function(m, iface, w, jumps)
    v0 = float(o.eval_side(0.0, "-"))
    v1 = float(o.eval_side(1.0, "+"))
    return (v0 * v0 + v1 * v1) / inner_product(o, o, None)


def inverse_constant(f: RifeFunction, i: int) -> float:
    """The ratio |f|_i / ||f||_0 realized by f, for 0 <= i <= m + 1."""
    if not 0 <= i <= f.m + 1:
        raise ValueError(f"derivative order {i} outside 0..{f.m + 1}")
    base = l2_norm(f)
    if base < 1e-14:
        raise ValueError("inverse constant undefined for (numerically) zero f")
    if i == 0:
        return 1.0
    return seminorm(f, i) / base


def count_sign_changes(f: RifeFunction, n_grid: int = 10_000) -> int:
    """Strict sign changes of f on a uniform grid (lower bound on root count)."""
    x = np.linspace(0.0, 1.0, n_grid)
    v = f.eval(x)
    v = v[np.abs(v) > 1e-13]
    if len(v) < 2:
        return 0
    return int(np.sum(np.sign(v[1:]) != np.sign(v[:-1])))
