"""Bounded spherical functions on free two-step nilpotent Lie groups.

The group N_p is realized in exponential coordinates (X, A), X in R^p and A
a real antisymmetric p x p matrix; K = O_p or SO_p acts by
k.(X, A) = (k X, k A k^T).
"""
from .errors import BudgetError
from .haar import MCEstimate, MonteCarloIntegrator, CircleIntegrator, k_average, make_integrator, sample_haar
from .kernels import BACKEND
from .lie import GroupPoint, bracket, group_mul, k_action, z_inner
from .representation import matrix_element, phi_via_rep, pi_apply, sublap_eigenvalue
from .skew import LambdaSpec, OrbitProfile, canonical_form, d2_matrix, orbit_invariants, orbit_profile
from .special import SeriesError, bessel_reduced, hermite_fn, laguerre_norm
from .spherical import SphericalIndex, phi, phi_bessel, theta
from .sublaplacian import sublap_apply

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BudgetError",
    "CircleIntegrator",
    "GroupPoint",
    "LambdaSpec",
    "MCEstimate",
    "MonteCarloIntegrator",
    "OrbitProfile",
    "SeriesError",
    "SphericalIndex",
    "bessel_reduced",
    "bracket",
    "canonical_form",
    "d2_matrix",
    "group_mul",
    "hermite_fn",
    "k_action",
    "k_average",
    "laguerre_norm",
    "make_integrator",
    "matrix_element",
    "orbit_invariants",
    "orbit_profile",
    "phi",
    "phi_bessel",
    "phi_via_rep",
    "pi_apply",
    "sample_haar",
    "sublap_apply",
    "sublap_eigenvalue",
    "theta",
    "z_inner",
]
