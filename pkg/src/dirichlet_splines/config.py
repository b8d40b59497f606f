"""Central tolerance and resource settings."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    # affine independence test on normalized determinants / singular values
    independence_tol: float = 1e-10
    # convex-hull feasibility test
    hull_tol: float = 1e-10
    # caps for the brute-force expansion oracle
    oracle_max_order: int = 8
    oracle_max_knots: int = 9
    # coalescent-knot path: sum of integer parameters
    coalescent_max_total: int = 24
    # tensor Gauss-Jacobi quadrature over E_n
    quadrature_max_dim: int = 3
    quadrature_max_nodes: int = 160
    mc_max_samples: int = 10_000_000


DEFAULT = Tolerances()
