"""Exact-arithmetic Siegel theta series and mod-p kernel verification.

The library computes truncated Fourier expansions of theta series attached
to even positive definite lattices, applies the coefficientwise minor
operators, and verifies congruence, dimension, divisibility, and local
invariant identities, all in exact rational arithmetic.
"""

from .exactmath import (
    INFINITE_PLACE,
    FpMatrix,
    PadicValue,
    chi_p,
    fp_matrix,
    fp_rank,
    hilbert_symbol,
    is_prime,
    legendre,
    valuation,
)
from .lattice import (
    DualGram,
    GramMatrix,
    HalfIntegralMatrix,
    IsometryCertificate,
    a_root_lattice,
    automorphisms,
    det_level,
    dual_gram,
    enumerate_vectors,
    hasse_witt,
    is_p_maximal,
    minors_matrix,
    p_special_lattice,
    rank_mod_p,
)
from .bqf import (
    BinaryFormClass,
    ambiguous_classes,
    class_number,
    class_representatives,
    epsilon_plus,
    reduce,
)
from .qexp import (
    QExpansion,
    dilate,
    linear_combination,
    mixed_theta,
    nu_p,
    reduce_mod_p,
    slash_cusp,
    theta_det_expansion,
    theta_expansion,
)
from .thetaop import (
    KernelCertificate,
    VectorValuedExpansion,
    kernel_check,
    kernel_monotonicity_check,
    leading_coefficient_check,
    singular_rank_mod_p,
    theta_operator,
)
from .analysis import (
    Report,
    congruence_check,
    coset_index_d,
    erratum_h_series,
    fp_dimension,
    km_average,
    km_divisibility_check,
    witt_identity_check,
)

__version__ = "0.1.0"
