"""Multiple testing over sparse sequence models: procedures, risks, and
minimax boundary functionals, with seeded Monte-Carlo experiment drivers."""

from .boundary import (
    BoundaryQuery,
    NonConvergenceError,
    fbar_n,
    lambda_n,
    minimax_risk_limit,
    omega_q,
    pn_lower,
    tstar,
    two_signal_levels,
)
from .model import (
    SignalConfig,
    ThetaVector,
    in_class,
    make_theta,
    oracle_threshold,
    sample_data,
    single_strength,
    two_strength,
)
from .procedures import (
    load_observations,
    DecisionVector,
    ProcedureSpec,
    apply_procedure,
    beta_fn,
    bh_procedure,
    fixed_threshold_procedure,
    lvalue_procedure,
    lvalues,
    mmle_weight,
    oracle_procedure,
    quasi_cauchy_g,
    two_sided_pvalue,
    xi_fn,
    zeta_fn,
)
from .risk import (
    RiskReport,
    fdp,
    fnp,
    hamming_loss,
    marginal_risk_curve,
    monte_carlo_risk,
    sparsity_preserving_estimate,
    weighted_loss,
)
from .subbotin import NoiseDist, normalizing_constant

__version__ = "0.1.0"
