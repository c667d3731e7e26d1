"""Multilinear time-invariant (MLTI) systems toolkit.

Even-order paired tensors and the Einstein product (:mod:`mlti.einstein`),
block tensors (:mod:`mlti.block_tensor`), tensor decompositions
(:mod:`mlti.decomp`) and the system layer (:mod:`mlti.systems`): simulation,
transfer functions, stability, reachability/observability, Gramians and model
reduction.  :mod:`mlti.io` reads and writes tensor files and system
manifests; :mod:`mlti.cli` is the ``mlti`` command.
"""
from __future__ import annotations

from .block_tensor import (
    block_distribute_check,
    extract_col_block,
    extract_row_block,
    mode_col_block,
    mode_row_block,
    n_mode_col_block,
    n_mode_row_block,
)
from .decomp import (
    CpFactors,
    GenCpFactors,
    GenTtCores,
    HosvdResult,
    TtCores,
    cp_als,
    cp_to_full,
    cpd_rank_certificate,
    einstein_compose_cpd,
    einstein_compose_ttd,
    estimate_cp_rank,
    gen_cpd_to_full,
    gen_ttd_apply,
    gen_ttd_to_full,
    generalized_cpd,
    generalized_ttd,
    hosvd,
    k_rank,
    khatri_rao,
    multilinear_ranks,
    tt_left_orthonormalize,
    tt_right_orthonormalize,
    tt_svd,
    tt_to_full,
    ttd_permuted,
    unfolding_rank_via_ttd,
)
from .einstein import (
    EvenPairedTensor,
    ProbeOutcome,
    UEigenPair,
    einstein_apply,
    einstein_compose,
    hobg_solve,
    horqi,
    is_u_positive_definite,
    m_positive_probe,
    paired_outer,
    phi,
    phi_inverse,
    u_diagonal,
    u_eigen,
    u_identity,
    u_inverse,
    u_power,
    u_transpose,
    unfolding_det,
    unfolding_rank,
)
from .errors import (
    CapabilityError,
    ConvergenceError,
    PoleError,
    PreconditionError,
    ShapeError,
    SingularTensorError,
)
from .systems import (
    Answer,
    BalancedTruncation,
    Decision,
    FactoredMltiSystem,
    MltiSystem,
    Stability,
    StabilityVerdict,
    TuckerSystem,
    balanced_truncation_baseline,
    compress,
    factored_simulate,
    hinf_norm,
    hinf_relative_error,
    is_observable,
    is_reachable,
    lyapunov_solve,
    obs_gramian,
    observability_tensor,
    reach_gramian,
    reachability_tensor,
    simulate,
    stability_cpd,
    stability_eigen,
    stability_factored,
    stability_hosvd,
    stability_ttd,
    stability_tucker,
    transfer_eval,
    tucker_to_einstein,
    unfold_to_lti,
)
from .tensor_core import (
    RANK_TOL,
    frobenius_norm,
    inner,
    ivec,
    ivec_inverse,
    n_mode_matricize,
    n_mode_product,
    numerical_rank,
    outer,
    rc_unfold,
    reshape,
    s_transpose,
    tucker_product,
    vec,
)

__version__ = "0.1.0"
