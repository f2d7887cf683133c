"""Material data, system matrices, jump coefficients and exact solutions.

The acoustic interface system is u_t + A(x) u_x = 0 for u = (p, v) with
piecewise-constant density and sound speed.  The scalar kinematic problem
u_t + c(x) u_x = 0 is handled as the one-component specialization (A = c,
S = 1) so the DG machinery treats both uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ife1d.rife import JumpSequence

__all__ = [
    "MaterialParams",
    "AcousticMatrices",
    "SystemJumps",
    "Zone",
    "build_matrices",
    "jump_coefficients",
    "kinematic_jumps",
    "exact_transport",
    "paper_pulse",
    "two_interface_config",
    "scalar_zone",
    "acoustic_zone",
    "zone_jumps",
]


@dataclass(frozen=True)
class MaterialParams:
    rho_minus: float
    rho_plus: float
    c_minus: float
    c_plus: float

    def __post_init__(self):
        for name in ("rho_minus", "rho_plus", "c_minus", "c_plus"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")

    def side(self, s: str) -> tuple[float, float]:
        if s == "-":
            return self.rho_minus, self.c_minus
        return self.rho_plus, self.c_plus


def _side_matrices(rho: float, c: float):
    """Closed-form A, S, P, P^-1 and the splittings for one material."""
    A = np.array([[0.0, rho * c * c], [1.0 / rho, 0.0]])
    S = np.diag([1.0 / (rho * c * c), rho])
    P = (1.0 / math.sqrt(2.0 * rho)) * np.array([[-c * rho, c * rho], [1.0, 1.0]])
    P_inv = math.sqrt(2.0 * rho) * np.array(
        [[-1.0 / (2.0 * c * rho), 0.5], [1.0 / (2.0 * c * rho), 0.5]]
    )
    A_plus = P @ np.diag([0.0, c]) @ P_inv
    A_minus = P @ np.diag([-c, 0.0]) @ P_inv
    A_abs = P @ np.diag([c, c]) @ P_inv
    return A, S, P, P_inv, A_plus, A_minus, A_abs


@dataclass(frozen=True)
class AcousticMatrices:
    """2x2 system matrices for both materials, with characteristic splittings."""

    materials: MaterialParams
    A_minus: np.ndarray
    A_plus: np.ndarray
    S_minus: np.ndarray
    S_plus: np.ndarray
    P_minus: np.ndarray
    P_plus: np.ndarray
    P_minus_inv: np.ndarray
    P_plus_inv: np.ndarray
    Apos_minus: np.ndarray
    Apos_plus: np.ndarray
    Aneg_minus: np.ndarray
    Aneg_plus: np.ndarray
    Aabs_minus: np.ndarray
    Aabs_plus: np.ndarray
    A_tilde: np.ndarray

    def side(self, s: str):
        """The (A, S, P, P_inv, A+, A-, |A|) tuple for side '-' or '+'."""
        if s == "-":
            return (
                self.A_minus,
                self.S_minus,
                self.P_minus,
                self.P_minus_inv,
                self.Apos_minus,
                self.Aneg_minus,
                self.Aabs_minus,
            )
        return (
            self.A_plus,
            self.S_plus,
            self.P_plus,
            self.P_plus_inv,
            self.Apos_plus,
            self.Aneg_plus,
            self.Aabs_plus,
        )


def build_matrices(materials: MaterialParams) -> AcousticMatrices:
    Am, Sm, Pm, Pm_inv, Am_pos, Am_neg, Am_abs = _side_matrices(*materials.side("-"))
    Ap, Sp, Pp, Pp_inv, Ap_pos, Ap_neg, Ap_abs = _side_matrices(*materials.side("+"))
    return AcousticMatrices(
        materials=materials,
        A_minus=Am,
        A_plus=Ap,
        S_minus=Sm,
        S_plus=Sp,
        P_minus=Pm,
        P_plus=Pp,
        P_minus_inv=Pm_inv,
        P_plus_inv=Pp_inv,
        Apos_minus=Am_pos,
        Apos_plus=Ap_pos,
        Aneg_minus=Am_neg,
        Aneg_plus=Ap_neg,
        Aabs_minus=Am_abs,
        Aabs_plus=Ap_abs,
        A_tilde=np.array([[0.0, 1.0], [1.0, 0.0]]),
    )


@dataclass(frozen=True)
class SystemJumps:
    """Jump sequences of the pressure and velocity components."""

    r_p: JumpSequence
    r_u: JumpSequence


def jump_coefficients(mtilde: int, materials: MaterialParams) -> SystemJumps:
    """Closed-form jump coefficients r^p_k, r^u_k for k = 0..mtilde.

    Even orders carry (c_-/c_+)^k; odd orders pick up the density ratio.
    Equivalently A_+^{-k} A_-^k = diag(r^p_k, r^u_k).
    """
    if mtilde < 0:
        raise ValueError("mtilde must be nonnegative")
    rho_m, rho_p = materials.rho_minus, materials.rho_plus
    q = materials.c_minus / materials.c_plus
    r_p, r_u = [], []
    for k in range(mtilde + 1):
        if k % 2 == 0:
            r_p.append(q**k)
            r_u.append(q**k)
        else:
            r_p.append((rho_p / rho_m) * q ** (k - 1))
            r_u.append((rho_m / rho_p) * q ** (k + 1))
    return SystemJumps(JumpSequence(tuple(r_p)), JumpSequence(tuple(r_u)))


def kinematic_jumps(mtilde: int, c_minus: float, c_plus: float) -> JumpSequence:
    """Scalar transport jump coefficients r_k = (c_-/c_+)^k.

    Follow from differentiating u_t + c u_x = 0 and [u] = 0 in time at the
    interface.
    """
    if c_minus <= 0 or c_plus <= 0:
        raise ValueError("speeds must be positive")
    q = c_minus / c_plus
    return JumpSequence(tuple(q**k for k in range(mtilde + 1)))


def paper_pulse(x):
    """Reference initial pulse u0(x) = f(3x - 1/2), f(y) = y(1-y^2)^5 on [-1, 1]."""
    y = 3.0 * np.asarray(x, dtype=float) - 0.5
    inside = np.abs(y) <= 1.0
    f = np.where(inside, y * (1.0 - y * y) ** 5, 0.0)
    return f if f.ndim else float(f)


def exact_transport(u0, c_minus: float, c_plus: float, alpha: float, x, t: float):
    """Exact solution of scalar transport with one interface at alpha.

    Valid while the profile entered from the left of the interface; the right
    branch is the left profile traced back through the interface, continuous
    at alpha by construction.
    """
    x = np.asarray(x, dtype=float)
    q = c_minus / c_plus
    left = u0(x - c_minus * t)
    right = u0(q * (x - c_plus * t) + alpha * (1.0 - q))
    vals = np.where(x <= alpha, left, right)
    return vals if vals.ndim else float(vals)


@dataclass(frozen=True)
class TwoInterfaceConfig:
    """Periodic three-zone transport setup used for the energy study."""

    domain: tuple[float, float]
    alphas: tuple[float, float]
    speeds: tuple[float, float, float]
    period: float

    def speed_at(self, x: float) -> float:
        if x <= self.alphas[0]:
            return self.speeds[0]
        if x <= self.alphas[1]:
            return self.speeds[1]
        return self.speeds[2]


def two_interface_config() -> TwoInterfaceConfig:
    """Periodic config on [0, 4]: speeds (1, 2, 1), interfaces at pi/3, 2pi/3.

    The travel time around the domain, 4 - pi/6, is the period of the exact
    solution.
    """
    return TwoInterfaceConfig(
        domain=(0.0, 4.0),
        alphas=(math.pi / 3.0, 2.0 * math.pi / 3.0),
        speeds=(1.0, 2.0, 1.0),
        period=4.0 - math.pi / 6.0,
    )


# ---------------------------------------------------------------------------
# zone descriptors consumed by the DG assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Zone:
    """Constant-coefficient region: system matrices plus characteristic data."""

    A: np.ndarray
    S: np.ndarray
    A_plus: np.ndarray
    A_minus: np.ndarray
    A_abs: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    speeds: np.ndarray  # diagonal of Lambda, ordered as the columns of P

    @property
    def n_comp(self) -> int:
        return self.A.shape[0]

    @property
    def A_tilde(self) -> np.ndarray:
        return self.S @ self.A


def scalar_zone(c: float) -> Zone:
    """One-component zone for u_t + c u_x = 0.

    The energy weight is S = 1/c, the scalar analogue of the acoustic
    symmetrizer: it makes S*A the same constant in every zone, so the exact
    periodic solution conserves the weighted energy and the discrete
    quadratic form dissipates exactly through the node jumps.
    """
    if c <= 0:
        raise ValueError("scalar zone expects a positive speed")
    c = float(c)
    one = np.array([[1.0]])
    cc = np.array([[c]])
    zero = np.array([[0.0]])
    return Zone(
        A=cc, S=np.array([[1.0 / c]]), A_plus=cc, A_minus=zero, A_abs=cc,
        P=one, P_inv=one, speeds=np.array([c]),
    )


def acoustic_zone(rho: float, c: float) -> Zone:
    A, S, P, P_inv, A_plus, A_minus, A_abs = _side_matrices(rho, c)
    return Zone(
        A=A, S=S, A_plus=A_plus, A_minus=A_minus, A_abs=A_abs, P=P, P_inv=P_inv,
        speeds=np.array([-float(c), float(c)]),
    )


def zone_jumps(mtilde: int, left: Zone, right: Zone) -> list[JumpSequence]:
    """Per-component jump sequences across an interface between two zones."""
    if left.n_comp != right.n_comp:
        raise ValueError("zones must have matching component counts")
    if left.n_comp == 1:
        return [kinematic_jumps(mtilde, float(left.A[0, 0]), float(right.A[0, 0]))]
    rho_m = 1.0 / left.A[1, 0]
    rho_p = 1.0 / right.A[1, 0]
    c_m = math.sqrt(left.A[0, 1] / rho_m)
    c_p = math.sqrt(right.A[0, 1] / rho_p)
    sj = jump_coefficients(mtilde, MaterialParams(rho_m, rho_p, c_m, c_p))
    return [sj.r_p, sj.r_u]
