"""Steering criteria from correlation matrices under imprecise measurements."""

from .criteria import (
    A_TO_B,
    A_TO_BC,
    B_TO_A,
    BC_TO_A,
    GapReport,
    bipartite_gap_ideal,
    bipartite_gap_imprecise,
    correlation_matrix,
    cyclic_permute,
    proposition1_check,
    swap_roles,
    theta_tensor,
    tripartite_gap_A_to_BC,
    tripartite_gap_BC_to_A,
)
from .observables import ErrorModel, gell_mann_loo, pauli_loo_qubit, product_loo
from .solvers import bisect_threshold, critical_xi, p_threshold, sweep, verify_coeff_bound
from .states import (
    DensityMatrix,
    StateFamilySpec,
    make_asymmetric,
    make_ghz,
    make_ghz_d,
    make_max_entangled,
    make_singlet,
    purity,
)

__version__ = "0.1.0"
