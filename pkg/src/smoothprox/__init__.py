"""Structured sparse regression via the smoothing proximal gradient method.

Solves ``min_beta g(beta) + Omega(beta) + lam * ||beta||_1`` where ``Omega``
is an overlapping group lasso or graph-guided fusion penalty, by smoothing
the structured term and running accelerated proximal gradient with an l1
prox.  Includes a subgradient (forward-backward) baseline, a multi-output
extension, synthetic experiment generators, and a CLI.
"""

from .fobos import FobosConfig, default_c, penalty_subgradient, solve_fobos
from .losses import (
    Dataset,
    LogisticLoss,
    LossEvaluation,
    SquaredLoss,
    logistic_loss,
    logistic_loss_lipschitz,
    squared_loss,
    squared_loss_lipschitz,
)
from .multivariate import (
    MultiProblem,
    SmoothedMatrixPenalty,
    multi_alpha_star,
    multi_penalty_value,
    solve_multivariate,
)
from .penalties import (
    CouplingMatrix,
    GraphPenaltySpec,
    GroupPenaltySpec,
    StructureError,
    build_coupling,
    build_graph_coupling,
    build_group_coupling,
    coupling_apply,
    coupling_apply_transpose,
    penalty_from_json,
    penalty_to_json,
    penalty_value,
    penalty_value_graph,
    penalty_value_group,
)
from .simulate import (
    GraphSimSpec,
    OverlapSimSpec,
    gen_graph_instance,
    gen_overlap_instance,
    overlap_groups,
    overlap_true_beta,
    threshold_correlation_graph,
)
from .smoothing import (
    SmoothedPenalty,
    alpha_star_graph,
    alpha_star_group,
    coupling_norm,
    coupling_norm_graph_bound,
    coupling_norm_group,
    dual_domain_bound,
    select_mu,
    smoothed_penalty,
    spectral_norm_power_iteration,
)
from .solver import (
    Problem,
    SolverConfig,
    SolverError,
    SolverState,
    Trace,
    fista_step,
    iteration_bound,
    regularization_path,
    soft_threshold,
    solve,
    total_lipschitz,
)

__version__ = "0.1.0"
