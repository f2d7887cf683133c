"""1D immersed finite element toolkit.

Subpackages cover the reference IFE space and its projections, the
acoustic/kinematic interface systems, a DG solver with upwind fluxes,
conforming elliptic and beam solvers, and a CLI experiment harness.
"""

__all__ = ["mesh", "rife", "projections", "acoustic", "dg", "fem", "manufactured"]
__version__ = "0.1.0"
