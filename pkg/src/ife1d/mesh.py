"""1D partitions with interior interface points and affine element maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["AffineMap", "Interface", "InterfaceMesh", "build_mesh"]

#: Relative tolerance (times b-a) for rejecting an interface sitting on a node.
NODE_COLLISION_RTOL = 1e-12


@dataclass(frozen=True)
class AffineMap:
    """Affine map x = origin + scale*xi between an element and [0, 1]."""

    origin: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValueError(f"element width must be positive, got {self.scale}")

    def to_reference(self, x):
        return (np.asarray(x) - self.origin) / self.scale

    def to_physical(self, xi):
        return self.origin + self.scale * np.asarray(xi)


@dataclass(frozen=True)
class Interface:
    """An interface point and its location within the mesh.

    ``element`` is 1-based: the interface lies strictly inside
    I_k = (x_{k-1}, x_k) for k = element.
    """

    alpha: float
    element: int
    alpha_hat: float


@dataclass(frozen=True)
class InterfaceMesh:
    a: float
    b: float
    nodes: np.ndarray
    interfaces: tuple[Interface, ...]
    h: float = field(init=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise ValueError("mesh needs at least two nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "h", float(np.max(np.diff(nodes))))
        nodes.setflags(write=False)
        for itf in self.interfaces:
            lo, hi = nodes[itf.element - 1], nodes[itf.element]
            if not (lo < itf.alpha < hi):
                raise ValueError(
                    f"interface {itf.alpha} not interior to element {itf.element}"
                )
            if not 0.0 < itf.alpha_hat < 1.0:
                raise ValueError(f"alpha_hat {itf.alpha_hat} outside (0, 1)")

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    def element_map(self, k: int) -> AffineMap:
        """Affine map of the 1-based element I_k onto [0, 1]."""
        return AffineMap(float(self.nodes[k - 1]), float(self.nodes[k] - self.nodes[k - 1]))

    def interface_in(self, k: int) -> Interface | None:
        for itf in self.interfaces:
            if itf.element == k:
                return itf
        return None

    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)


def build_mesh(a: float, b: float, n: int, interfaces=()) -> InterfaceMesh:
    """Uniform partition of (a, b) into n elements with interfaces located.

    Interfaces must be strictly interior to their element: one that falls on
    a node (within ``NODE_COLLISION_RTOL * (b - a)``) is rejected rather than
    perturbed, since perturbing would silently change the problem.
    """
    if not a < b:
        raise ValueError(f"need a < b, got ({a}, {b})")
    if n < 1:
        raise ValueError(f"need at least one element, got n={n}")
    nodes = np.linspace(a, b, n + 1)
    tol = NODE_COLLISION_RTOL * (b - a)
    located = []
    seen = set()
    for alpha in interfaces:
        alpha = float(alpha)
        if not (a < alpha < b):
            raise ValueError(f"interface {alpha} outside ({a}, {b})")
        if np.min(np.abs(nodes - alpha)) <= tol:
            raise ValueError(
                f"interface-on-node: {alpha} coincides with a mesh node "
                f"(tolerance {tol:g}); choose n or the interface differently"
            )
        k = int(np.searchsorted(nodes, alpha))  # nodes[k-1] < alpha < nodes[k]
        if k in seen:
            raise ValueError(f"duplicate interface in element {k}")
        seen.add(k)
        alpha_hat = (alpha - nodes[k - 1]) / (nodes[k] - nodes[k - 1])
        located.append(Interface(alpha, k, float(alpha_hat)))
    located.sort(key=lambda itf: itf.alpha)
    return InterfaceMesh(float(a), float(b), nodes, tuple(located))


def to_reference(amap: AffineMap, x):
    return amap.to_reference(x)


def to_physical(amap: AffineMap, xi):
    return amap.to_physical(xi)
