"""Generalized Gegenbauer polynomial expansions on [-1, 1] and coefficient inequality checks."""
from .errors import ConvergenceError, DomainError, QuadratureEvaluationError
from .expansion import (
    CoefficientVector,
    TestFunction,
    forward_transform,
    lp_norm,
    parseval_check,
    partial_sum_eval,
    sup_norm_estimate,
)
from .inequalities import (
    ConverseResult,
    Direction,
    InequalityReport,
    Theorem,
    TrialRecord,
    connection_check,
    converse_reconstruction,
    forward_inequality_scan,
    forward_inequality_scans,
    hl_functional,
    hy_functional,
    unified_functional,
)
from .quadrature import (
    GaussJacobiRule,
    GenGegenbauerRule,
    certify_rule,
    gauss_jacobi_rule,
    gen_gegenbauer_rule,
    integrate,
    integrate_converged,
)
from .special_poly import (
    BasisParams,
    JacobiParams,
    gegenbauer_eval,
    gen_gegenbauer_coefficient,
    gen_gegenbauer_eval,
    jacobi_eval,
    jacobi_squared_norm,
    log_gamma_ratio,
    orthonormal_coefficient,
    orthonormal_gg_eval,
    pochhammer,
)

__version__ = "0.1.0"
