"""Sparse binary measurement matrices for compressed sensing.

Generation of Bernoulli-p and left-regular 0/1 matrices, quasi-regular
lossless-expander analysis, l1 robust nullspace-property certification,
built-in LP/NNLS decoding programs, and Monte Carlo experiment harnesses.
"""

from .matrix import (
    MatrixFormatError,
    Seed,
    SparseBinaryMatrix,
    adjoint_apply,
    gen_bernoulli,
    gen_left_regular,
    matvec,
    read_matrix,
    write_matrix,
)
from .expander import (
    DegreeBandResult,
    EnumerationBudgetError,
    ExpansionProfile,
    FirstArrival,
    collision_count,
    cross_mass,
    degree_band,
    first_arrival,
    first_arrival_count,
    first_arrival_defect,
    fit_degree_band,
    neighborhood,
    required_m,
    sparsity_gate,
    theta_exact,
    theta_sampled,
)
from .nsp import (
    NotCertifiable,
    NspBudgetError,
    NspCertificate,
    NspViolation,
    certify_from_expansion,
    error_bound,
    nsp_exact,
    rescale_certificate,
)
from .optim import (
    InfeasibleError,
    LinearProgram,
    LpError,
    LpSolution,
    SolverStallError,
    bp_equality,
    lp_solve,
    nnlad,
    nnls_kkt_violation,
    nnls_solve,
    qcbp_l1,
    verify_lp_solution,
)
from .recovery import (
    BoundCheck,
    RecoveryProblem,
    RecoveryReport,
    ScalingWitness,
    positive_orthant_witness,
    recover,
    sigma_s,
    verify_bound,
)
from .experiments import (
    SweepConfig,
    SweepRecord,
    TransitionEstimate,
    empirical_zero_column,
    isotonic_fit,
    records_to_csv,
    run_sweep,
    transition_summary,
    write_sweep_csv,
    zero_column_prob,
)

__version__ = "0.1.0"
