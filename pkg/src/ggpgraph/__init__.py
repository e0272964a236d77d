"""Simulation and likelihood inference for sparse GGP multigraphs."""

from .graphstats import (
    GraphSummary,
    NoSolution,
    c_t,
    c_t_d1,
    c_t_d2,
    dense_diagnostics,
    empirical_tau_star,
    karlin_rouault_pmf,
    solve_alpha_hat,
    sparsity_fit,
    summarize,
)
from .harness import ExperimentConfig, ExperimentResult, run_experiment, write_report
from .inference import (
    FitOptions,
    MleFit,
    PosteriorApprox,
    PremiseError,
    PriorSpec,
    assumption1_check,
    credible_interval,
    default_prior,
    fit_mle,
    grid_posterior_sigma,
    hessian_fd,
    hessian_qloglik,
    laplace_posterior,
)
from .levy import (
    DomainError,
    GGPParams,
    ggp_density,
    ggp_theoretical_tau_star,
    inv_tail_intensity,
    laplace_exponent,
    tail_intensity,
)
from .likelihood import (
    NumericError,
    Params,
    ReparamPoint,
    SaddleResult,
    eval_A,
    exact_loglik_quad,
    profile_psi,
    qloglik,
    reparam_forward,
    reparam_inverse,
    solve_zeta,
)
from .samplers import (
    SimulatedGraph,
    sample_constrained_config_degrees,
    sample_dc_er,
    sample_dense_er,
    sample_ggp_graph,
    sample_hollywood,
    sample_karlin_rouault_degrees,
)

__version__ = "0.1.0"
