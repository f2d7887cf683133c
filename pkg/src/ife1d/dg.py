"""Semi-discrete DG for linear hyperbolic systems with immersed interfaces.

Elements away from the interfaces carry shifted Legendre bases (orthogonal
mass blocks); interface elements carry the canonical IFE basis of each
component.  The weak operator uses the upwind characteristic flux, so the
quadratic form B(u, u) equals minus half the sum of S|A|-weighted squared
jumps and the semi-discrete energy never grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from ife1d import acoustic as ac
from ife1d import projections as pj
from ife1d.manufactured import sided_values
from ife1d.mesh import InterfaceMesh
from ife1d.rife import RefInterface, RifeFunction, _gauss, full_canonical_basis, lincomb

__all__ = [
    "DGSpace",
    "DGState",
    "Trajectory",
    "EnergyTrace",
    "MassOperator",
    "build_space",
    "kinematic_space",
    "acoustic_space",
    "assemble_mass",
    "assemble_B",
    "project_initial",
    "step_rk45",
    "global_radau",
    "max_stable_dt",
    "energy_trace",
    "b_functional",
    "dissipation_rhs",
    "l2_error",
    "eval_state",
    "StepSizeUnderflow",
]


class StepSizeUnderflow(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ElementContext:
    """Everything the assembly needs about one element."""

    k: int  # 1-based element index
    x_left: float
    h: float
    kind: str  # 'legendre' | 'ife'
    iface: RefInterface | None
    comp_jumps: tuple | None
    zone_left: ac.Zone
    zone_right: ac.Zone
    ref_nodes: np.ndarray
    weights: np.ndarray  # physical quadrature weights
    vals: tuple[np.ndarray, ...]  # per component, (m+1, nq) basis values
    dvals: tuple[np.ndarray, ...]  # physical derivatives at the nodes
    At_nodes: np.ndarray  # (nq, n, n)
    S_nodes: np.ndarray  # (nq, n, n)
    left_vals: np.ndarray  # (n, n*(m+1)) endpoint evaluation operator
    right_vals: np.ndarray

    @property
    def split(self) -> float | None:
        return None if self.iface is None else self.iface.alpha_hat


def _legendre_vander(ref_nodes, m, deriv=0):
    """Values (or derivative values w.r.t. the reference coordinate) of the
    shifted Legendre basis at reference nodes in [0, 1]."""
    t = 2.0 * np.asarray(ref_nodes) - 1.0
    out = np.empty((m + 1, len(t)))
    for j in range(m + 1):
        c = np.zeros(j + 1)
        c[j] = 1.0
        for _ in range(deriv):
            c = np.polynomial.legendre.legder(c)
        out[j] = np.polynomial.legendre.legval(t, c) * 2.0**deriv
    return out


def _ife_vander(ref_nodes, basis, deriv=0):
    out = np.empty((len(basis), len(ref_nodes)))
    for j, b in enumerate(basis):
        out[j] = b.eval(np.asarray(ref_nodes), order=deriv)
    return out


def _split_quad_nodes(alpha_hat, n):
    x, w = _gauss(n)
    nodes, weights = [], []
    for lo, hi in ((0.0, alpha_hat), (alpha_hat, 1.0)):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class DGSpace:
    mesh: InterfaceMesh
    m: int
    zones: tuple[ac.Zone, ...]
    bc: str
    contexts: tuple[ElementContext, ...]
    node_zone: tuple[int, ...]  # zone index at each mesh node

    @property
    def n_comp(self) -> int:
        return self.zones[0].n_comp

    @property
    def block_size(self) -> int:
        return self.n_comp * (self.m + 1)

    @property
    def n_dof(self) -> int:
        return self.mesh.n_elements * self.block_size

    def dof_slice(self, k: int) -> slice:
        return slice((k - 1) * self.block_size, k * self.block_size)


def build_space(mesh: InterfaceMesh, m: int, zones, bc: str = "inflow_zero") -> DGSpace:
    """Assemble per-element bases and quadrature for a zoned hyperbolic system."""
    if bc not in ("inflow_zero", "periodic"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    zones = tuple(zones)
    if len(zones) != len(mesh.interfaces) + 1:
        raise ValueError("need one zone per region between interfaces")
    n_comp = zones[0].n_comp
    if any(z.n_comp != n_comp for z in zones):
        raise ValueError("all zones must share the component count")
    mtilde = m + 2
    n_q = m + 2

    alphas = [itf.alpha for itf in mesh.interfaces]
    iface_by_elem = {itf.element: (idx, itf) for idx, itf in enumerate(mesh.interfaces)}

    contexts = []
    for k in range(1, mesh.n_elements + 1):
        x_left = float(mesh.nodes[k - 1])
        h = float(mesh.nodes[k] - mesh.nodes[k - 1])
        zone_idx = sum(1 for a in alphas if a < x_left)
        if k in iface_by_elem:
            idx, itf = iface_by_elem[k]
            iface = RefInterface(itf.alpha_hat)
            zl, zr = zones[idx], zones[idx + 1]
            comp_jumps = tuple(ac.zone_jumps(mtilde, zl, zr))
            bases = [full_canonical_basis(m, iface, r) for r in comp_jumps]
            ref_nodes, wq = _split_quad_nodes(itf.alpha_hat, n_q)
            vals = tuple(_ife_vander(ref_nodes, b) for b in bases)
            dvals = tuple(_ife_vander(ref_nodes, b, deriv=1) / h for b in bases)
            on_left = ref_nodes <= itf.alpha_hat
            At = np.where(on_left[:, None, None], zl.A_tilde, zr.A_tilde)
            Sn = np.where(on_left[:, None, None], zl.S, zr.S)
            left_pt = np.array([[b.eval_side(0.0, "-") for b in bb] for bb in bases])
            right_pt = np.array([[b.eval_side(1.0, "+") for b in bb] for bb in bases])
        else:
            iface = None
            comp_jumps = None
            zl = zr = zones[zone_idx]
            x, w = _gauss(n_q)
            ref_nodes = 0.5 + 0.5 * x
            wq = 0.5 * w
            v = _legendre_vander(ref_nodes, m)
            dv = _legendre_vander(ref_nodes, m, deriv=1) / h
            vals = tuple(v for _ in range(n_comp))
            dvals = tuple(dv for _ in range(n_comp))
            At = np.broadcast_to(zl.A_tilde, (len(ref_nodes), n_comp, n_comp))
            Sn = np.broadcast_to(zl.S, (len(ref_nodes), n_comp, n_comp))
            left_pt = np.array([_legendre_vander(np.array([0.0]), m)[:, 0]] * n_comp)
            right_pt = np.array([_legendre_vander(np.array([1.0]), m)[:, 0]] * n_comp)

        def endpoint_operator(pt_vals):
            E = np.zeros((n_comp, n_comp * (m + 1)))
            for c in range(n_comp):
                E[c, c * (m + 1) : (c + 1) * (m + 1)] = pt_vals[c]
            return E

        contexts.append(
            ElementContext(
                k=k,
                x_left=x_left,
                h=h,
                kind="ife" if iface is not None else "legendre",
                iface=iface,
                comp_jumps=comp_jumps,
                zone_left=zl,
                zone_right=zr,
                ref_nodes=ref_nodes,
                weights=h * wq,
                vals=vals,
                dvals=dvals,
                At_nodes=At,
                S_nodes=Sn,
                left_vals=endpoint_operator(left_pt),
                right_vals=endpoint_operator(right_pt),
            )
        )

    node_zone = tuple(
        sum(1 for a in alphas if a < x) for x in np.asarray(mesh.nodes, dtype=float)
    )
    space = DGSpace(mesh, m, zones, bc, tuple(contexts), node_zone)
    if bc == "periodic":
        z0, zN = zones[node_zone[0]], zones[node_zone[-1]]
        if not np.allclose(z0.A, zN.A, rtol=0, atol=1e-12):
            raise ValueError("periodic boundary needs matching materials at the ends")
    return space


def kinematic_space(mesh, m, speeds, bc="inflow_zero") -> DGSpace:
    return build_space(mesh, m, [ac.scalar_zone(c) for c in speeds], bc)


def acoustic_space(mesh, m, materials: ac.MaterialParams, bc="inflow_zero") -> DGSpace:
    zones = [
        ac.acoustic_zone(materials.rho_minus, materials.c_minus),
        ac.acoustic_zone(materials.rho_plus, materials.c_plus),
    ]
    return build_space(mesh, m, zones, bc)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassOperator:
    """Block-diagonal S-weighted mass with pre-factorized blocks."""

    space: DGSpace
    blocks: tuple[np.ndarray, ...]
    inv_blocks: tuple[np.ndarray, ...]

    @property
    def matrix(self) -> sp.csr_matrix:
        return sp.block_diag(self.blocks, format="csr")

    @property
    def inverse_matrix(self) -> sp.csr_matrix:
        return sp.block_diag(self.inv_blocks, format="csr")

    def solve(self, vec: np.ndarray) -> np.ndarray:
        bs = self.space.block_size
        out = np.empty_like(vec)
        for i, inv in enumerate(self.inv_blocks):
            out[i * bs : (i + 1) * bs] = inv @ vec[i * bs : (i + 1) * bs]
        return out

    def energy(self, vec: np.ndarray) -> float:
        bs = self.space.block_size
        total = 0.0
        for i, blk in enumerate(self.blocks):
            seg = vec[i * bs : (i + 1) * bs]
            total += seg @ blk @ seg
        return math.sqrt(max(total, 0.0))


def assemble_mass(space: DGSpace) -> MassOperator:
    blocks, invs = [], []
    mp1 = space.m + 1
    for ctx in space.contexts:
        blk = np.zeros((space.block_size, space.block_size))
        for c in range(space.n_comp):
            scc = ctx.S_nodes[:, c, c]
            G = (ctx.vals[c] * (ctx.weights * scc)) @ ctx.vals[c].T
            blk[c * mp1 : (c + 1) * mp1, c * mp1 : (c + 1) * mp1] = G
        try:
            np.linalg.cholesky(blk)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise RuntimeError(f"mass block of element {ctx.k} is not SPD") from exc
        blocks.append(blk)
        invs.append(np.linalg.inv(blk))
    return MassOperator(space, tuple(blocks), tuple(invs))


def _node_pairs(space: DGSpace):
    """(left ctx or None, right ctx or None, zone, node coordinate) per node."""
    ctxs = space.contexts
    nodes = space.mesh.nodes
    n = space.mesh.n_elements
    pairs = []
    for p in range(n + 1):
        left = ctxs[p - 1] if p >= 1 else None
        right = ctxs[p] if p < n else None
        pairs.append((left, right, space.zones[space.node_zone[p]], float(nodes[p])))
    if space.bc == "periodic":
        # endpoint nodes are one identified node: left trace from the last
        # element, right trace from the first
        last, first, zone = ctxs[-1], ctxs[0], space.zones[space.node_zone[0]]
        pairs = [(last, first, zone, float(nodes[0]))] + pairs[1:-1]
    return pairs


def assemble_B(space: DGSpace) -> sp.csr_matrix:
    """The weak operator with upwind flux; M du/dt = B u."""
    rows, cols, data = [], [], []

    def add_block(test_ctx, trial_ctx, block):
        r0 = (test_ctx.k - 1) * space.block_size
        c0 = (trial_ctx.k - 1) * space.block_size
        idx = np.nonzero(block)
        rows.extend((r0 + idx[0]).tolist())
        cols.extend((c0 + idx[1]).tolist())
        data.extend(block[idx].tolist())

    mp1 = space.m + 1
    for ctx in space.contexts:
        vol = np.zeros((space.block_size, space.block_size))
        for cv in range(space.n_comp):
            for cw in range(space.n_comp):
                at = ctx.At_nodes[:, cv, cw]
                if np.all(at == 0.0):
                    continue
                vol[cv * mp1 : (cv + 1) * mp1, cw * mp1 : (cw + 1) * mp1] = (
                    ctx.dvals[cv] * (ctx.weights * at)
                ) @ ctx.vals[cw].T
        add_block(ctx, ctx, vol)

    for left, right, zone, _ in _node_pairs(space):
        SAp = zone.S @ zone.A_plus
        SAn = zone.S @ zone.A_minus
        if left is not None:
            add_block(left, left, -left.right_vals.T @ SAp @ left.right_vals)
        if left is not None and right is not None:
            add_block(left, right, -left.right_vals.T @ SAn @ right.left_vals)
            add_block(right, left, right.left_vals.T @ SAp @ left.right_vals)
        if right is not None:
            add_block(right, right, right.left_vals.T @ SAn @ right.left_vals)

    n = space.n_dof
    return sp.csr_matrix(sp.coo_matrix((data, (rows, cols)), shape=(n, n)))


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DGState:
    space: DGSpace
    coeffs: np.ndarray
    t: float = 0.0

    def component_coeffs(self, k: int, c: int) -> np.ndarray:
        mp1 = self.space.m + 1
        base = (k - 1) * self.space.block_size + c * mp1
        return self.coeffs[base : base + mp1]


def _as_component_callables(space, u0):
    if callable(u0):
        if space.n_comp != 1:
            return [lambda x, c=c: np.asarray(u0(x))[..., c] for c in range(space.n_comp)]
        return [u0]
    funcs = list(u0)
    if len(funcs) != space.n_comp:
        raise ValueError("need one initial component per system component")
    return funcs


def project_initial(space: DGSpace, u0, npoints: int = 16) -> DGState:
    """Elementwise unweighted L2 projection of the initial data."""
    comps = _as_component_callables(space, u0)
    coeffs = np.zeros(space.n_dof)
    mp1 = space.m + 1
    for ctx in space.contexts:
        if ctx.kind == "ife":
            ref_nodes, wq = _split_quad_nodes(ctx.iface.alpha_hat, npoints)
        else:
            xg, wg = _gauss(npoints)
            ref_nodes, wq = 0.5 + 0.5 * xg, 0.5 * wg
        phys = ctx.x_left + ctx.h * ref_nodes
        w = ctx.h * wq
        for c in range(space.n_comp):
            if ctx.kind == "ife":
                basis_vals = _ife_vander(
                    ref_nodes, full_canonical_basis(space.m, ctx.iface, ctx.comp_jumps[c])
                )
            else:
                basis_vals = _legendre_vander(ref_nodes, space.m)
            G = (basis_vals * w) @ basis_vals.T
            rhs = basis_vals @ (w * np.asarray(comps[c](phys), dtype=float))
            sol = np.linalg.solve(G, rhs)
            base = (ctx.k - 1) * space.block_size + c * mp1
            coeffs[base : base + mp1] = sol
    return DGState(space, coeffs, 0.0)


def eval_state(space: DGSpace, coeffs: np.ndarray, x) -> np.ndarray:
    """Point values of the DG field; shape (n_comp,) + x.shape."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((space.n_comp, len(x)))
    nodes = space.mesh.nodes
    elem = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, space.mesh.n_elements - 1)
    mp1 = space.m + 1
    for k in np.unique(elem):
        ctx = space.contexts[k]
        mask = elem == k
        xi = (x[mask] - ctx.x_left) / ctx.h
        for c in range(space.n_comp):
            if ctx.kind == "ife":
                basis_vals = _ife_vander(
                    xi, full_canonical_basis(space.m, ctx.iface, ctx.comp_jumps[c])
                )
            else:
                basis_vals = _legendre_vander(xi, space.m)
            base = k * space.block_size + c * mp1
            out[c, mask] = coeffs[base : base + mp1] @ basis_vals
    return out


def l2_error(space: DGSpace, coeffs: np.ndarray, exact_comps, npoints: int = 20) -> float:
    """Global L2 distance between the DG field and exact component callables."""
    comps = _as_component_callables(space, exact_comps)
    mp1 = space.m + 1
    total = 0.0
    for ctx in space.contexts:
        if ctx.kind == "ife":
            ref_nodes, wq = _split_quad_nodes(ctx.iface.alpha_hat, npoints)
        else:
            xg, wg = _gauss(npoints)
            ref_nodes, wq = 0.5 + 0.5 * xg, 0.5 * wg
        phys = ctx.x_left + ctx.h * ref_nodes
        w = ctx.h * wq
        for c in range(space.n_comp):
            if ctx.kind == "ife":
                basis_vals = _ife_vander(
                    ref_nodes, full_canonical_basis(space.m, ctx.iface, ctx.comp_jumps[c])
                )
            else:
                basis_vals = _legendre_vander(ref_nodes, space.m)
            base = (ctx.k - 1) * space.block_size + c * mp1
            diff = coeffs[base : base + mp1] @ basis_vals - np.asarray(
                comps[c](phys), dtype=float
            )
            total += np.sum(w * diff * diff)
    return math.sqrt(max(total, 0.0))


# ---------------------------------------------------------------------------
# time integration: Dormand-Prince 5(4) with PI step control
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = _DP_B5 - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


@dataclass(frozen=True)
class Trajectory:
    final: DGState
    times: np.ndarray
    energies: np.ndarray
    n_accepted: int
    n_rejected: int


@dataclass(frozen=True)
class EnergyTrace:
    times: np.ndarray
    energy: np.ndarray
    relative: np.ndarray


def _rhs_operator(M, B):
    """Turn (M, B) into a y -> M^{-1} B y application."""
    if isinstance(M, MassOperator):
        K = M.inverse_matrix @ sp.csr_matrix(B)
        return lambda y: K @ y
    M = np.asarray(M, dtype=float)
    B = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
    K = np.linalg.solve(M, B)
    return lambda y: K @ y


def step_rk45(M, B, state: DGState, t_end: float, rtol: float = 1e-8,
              atol: float = 1e-10, record_energy: bool = True) -> Trajectory:
    """Integrate M du/dt = B u from state.t to t_end, sampling accept points."""
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    f = _rhs_operator(M, B)
    energy = (M.energy if isinstance(M, MassOperator)
              else lambda y: float(np.linalg.norm(y)))

    t, y = state.t, state.coeffs.copy()
    span = t_end - t
    if span <= 0:
        raise ValueError("t_end must exceed the state time")
    times = [t]
    energies = [energy(y)] if record_energy else []

    k = [np.zeros_like(y) for _ in range(7)]
    k[0] = f(y)
    scale0 = atol + rtol * np.abs(y)
    d0 = np.linalg.norm(y / scale0) / math.sqrt(len(y))
    d1 = np.linalg.norm(k[0] / scale0) / math.sqrt(len(y))
    dt = span if d1 < 1e-14 else min(span, 0.01 * d0 / d1) or 1e-6 * span
    if dt <= 0:
        dt = 1e-6 * span

    err_prev = 1.0
    n_acc = n_rej = 0
    while t < t_end - 1e-14 * span:
        dt = min(dt, t_end - t)
        if dt < 1e-12 * span:
            raise StepSizeUnderflow(
                f"step size underflow at t={t:.6g} (dt={dt:.3e}, "
                f"{n_acc} accepted / {n_rej} rejected steps)"
            )
        for i in range(1, 7):
            yi = y + dt * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
            k[i] = f(yi)
        y_new = y + dt * sum(b * k[j] for j, b in enumerate(_DP_B5) if b)
        err_vec = dt * sum(e * k[j] for j, e in enumerate(_DP_E) if e)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.linalg.norm(err_vec / scale) / math.sqrt(len(y))
        if err <= 1.0:
            t += dt
            y = y_new
            k[0] = k[6]  # FSAL
            n_acc += 1
            times.append(t)
            if record_energy:
                energies.append(energy(y))
            fac = 0.9 * (err + 1e-16) ** -0.14 * err_prev**0.08
            err_prev = err + 1e-16
            dt *= min(10.0, max(0.2, fac))
        else:
            n_rej += 1
            dt *= min(1.0, max(0.1, 0.9 * err**-0.2))
    return Trajectory(
        final=DGState(state.space, y, t),
        times=np.array(times),
        energies=np.array(energies) if record_energy else np.zeros(0),
        n_accepted=n_acc,
        n_rejected=n_rej,
    )


def energy_trace(traj: Trajectory) -> EnergyTrace:
    """Relative S-weighted energy along the trajectory, normalized to start at 1."""
    if len(traj.energies) == 0:
        raise ValueError("trajectory carries no energy samples")
    e0 = traj.energies[0]
    if e0 < 1e-300:
        raise ValueError("zero initial energy: relative trace undefined")
    return EnergyTrace(traj.times, traj.energies, traj.energies / e0)


# ---------------------------------------------------------------------------
# global Radau projection and spectral radius
# ---------------------------------------------------------------------------


def global_radau(space: DGSpace, u_comps, npoints: int = 24) -> DGState:
    """Elementwise Radau projection of (continuous) exact components.

    Ordinary elements project per characteristic with the outflow endpoint
    per speed sign; interface elements use the characteristic interface
    projection.  The result is B-orthogonal to the whole DG space.
    """
    comps = _as_component_callables(space, u_comps)
    coeffs = np.zeros(space.n_dof)
    mp1 = space.m + 1
    for ctx in space.contexts:
        if ctx.kind == "ife":
            pulled = [
                (lambda c=c: lambda xi: comps[c](ctx.x_left + ctx.h * np.asarray(xi)))()
                for c in range(space.n_comp)
            ]
            projs, _ = pj.irp_system(
                space.m, ctx.iface, ctx.zone_left, ctx.zone_right,
                list(ctx.comp_jumps), pulled,
            )
            for c in range(space.n_comp):
                base = (ctx.k - 1) * space.block_size + c * mp1
                coeffs[base : base + mp1] = projs[c].left
        else:
            zone = ctx.zone_left
            x_r = ctx.x_left + ctx.h
            char_coefs = np.zeros((space.n_comp, mp1))
            for i in range(space.n_comp):
                def w_i(x, i=i):
                    vals = np.stack([np.asarray(comps[c](x), dtype=float)
                                     for c in range(space.n_comp)])
                    return zone.P_inv[i] @ vals

                outflow = "right" if zone.speeds[i] > 0 else "left"
                proj = pj.radau_noninterface(
                    space.m, ctx.x_left, x_r, outflow, w_i, npoints=npoints
                )
                char_coefs[i] = proj.coef
            phys = zone.P @ char_coefs  # back to physical components
            for c in range(space.n_comp):
                base = (ctx.k - 1) * space.block_size + c * mp1
                coeffs[base : base + mp1] = phys[c]
    return DGState(space, coeffs, 0.0)


def b_functional(space: DGSpace, u_comps, npoints: int = 24) -> np.ndarray:
    """The vector of B(u, phi_i) for a continuous exact field u."""
    comps = _as_component_callables(space, u_comps)
    F = np.zeros(space.n_dof)
    mp1 = space.m + 1
    for ctx in space.contexts:
        if ctx.kind == "ife":
            ref_nodes, wq = _split_quad_nodes(ctx.iface.alpha_hat, npoints)
            on_left = ref_nodes <= ctx.iface.alpha_hat
            At = np.where(on_left[:, None, None], ctx.zone_left.A_tilde, ctx.zone_right.A_tilde)
        else:
            xg, wg = _gauss(npoints)
            ref_nodes, wq = 0.5 + 0.5 * xg, 0.5 * wg
            At = np.broadcast_to(ctx.zone_left.A_tilde, (len(ref_nodes),) + ctx.zone_left.A.shape)
        phys = ctx.x_left + ctx.h * ref_nodes
        w = ctx.h * wq
        uvals = np.stack([np.asarray(comps[c](phys), dtype=float) for c in range(space.n_comp)])
        Atu = np.einsum("qcd,dq->cq", At, uvals)
        for cv in range(space.n_comp):
            if ctx.kind == "ife":
                dv = _ife_vander(
                    ref_nodes, full_canonical_basis(space.m, ctx.iface, ctx.comp_jumps[cv]), deriv=1
                ) / ctx.h
            else:
                dv = _legendre_vander(ref_nodes, space.m, deriv=1) / ctx.h
            base = (ctx.k - 1) * space.block_size + cv * mp1
            F[base : base + mp1] += dv @ (w * Atu[cv])

    for left, right, zone, x_node in _node_pairs(space):
        uval = np.array([float(np.asarray(comps[c](x_node))) for c in range(space.n_comp)])
        if left is None:
            flux = zone.A_minus @ uval
        elif right is None:
            flux = zone.A_plus @ uval
        else:
            flux = zone.A @ uval
        S_flux = zone.S @ flux
        if left is not None:
            r0 = (left.k - 1) * space.block_size
            F[r0 : r0 + space.block_size] -= left.right_vals.T @ S_flux
        if right is not None:
            r0 = (right.k - 1) * space.block_size
            F[r0 : r0 + space.block_size] += right.left_vals.T @ S_flux
    return F


def dissipation_rhs(space: DGSpace, coeffs: np.ndarray) -> float:
    """-1/2 sum over nodes of [[u]]^T S |A| [[u]], the exact value of B(u, u)."""
    total = 0.0
    for left, right, zone, _ in _node_pairs(space):
        u_minus = (left.right_vals @ coeffs[space.dof_slice(left.k)]
                   if left is not None else np.zeros(space.n_comp))
        u_plus = (right.left_vals @ coeffs[space.dof_slice(right.k)]
                  if right is not None else np.zeros(space.n_comp))
        jump = u_minus - u_plus
        total += jump @ zone.S @ zone.A_abs @ jump
    return -0.5 * total


def max_stable_dt(M, B, rtol: float = 1e-6, max_iter: int = 10_000, seed: int = 0):
    """1 / rho(M^{-1} B), the largest stable explicit time step.

    The spectral radius is estimated by power iteration on the squared
    operator, which turns the dominant near-imaginary eigenvalue pair into a
    near-real one.  Returns (dt, info) where info reports convergence.
    """
    f = _rhs_operator(M, B)
    size = M.space.n_dof if isinstance(M, MassOperator) else np.asarray(M).shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size)
    v /= np.linalg.norm(v)
    lam2_prev = np.inf
    converged = False
    iterations = 0
    lam2 = 0.0
    for iterations in range(1, max_iter + 1):
        w = f(f(v))
        lam2 = float(np.linalg.norm(w))
        if lam2 < 1e-300:
            return math.inf, {"rho": 0.0, "converged": True, "iterations": iterations}
        v = w / lam2
        if abs(lam2 - lam2_prev) <= rtol * lam2:
            converged = True
            break
        lam2_prev = lam2
    rho = math.sqrt(lam2)
    info = {"rho": rho, "converged": converged, "iterations": iterations}
    return 1.0 / rho, info
