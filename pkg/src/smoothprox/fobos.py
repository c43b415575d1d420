"""Forward-backward subgradient baseline.

Treats the loss plus the structured penalty as one (non-smooth) term and
takes a subgradient step with rate ``c / sqrt(t)``, followed by the l1 prox.
This is the standard comparison point for the smoothed solver: it needs no
smoothing but converges at the slower O(1/eps^2) rate and its objective
trace is non-monotone, so the best-so-far value is tracked alongside.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .penalties import (
    GraphPenaltySpec,
    GroupPenaltySpec,
    StructureError,
    build_coupling,
    penalty_value,
)
from .solver import Problem, SolverError, Trace, soft_threshold


@dataclass
class FobosConfig:
    lam: float = 0.0
    c: float = 0.1  # step scale; step_t = c / sqrt(t), t starting at 1
    max_iter: int = 20000
    rel_tol: float = 1e-6
    record_trace: bool = True

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("step scale c must be positive")


def default_c(N, J, K=None) -> float:
    """Step scale 0.1 / sqrt(N*J) (univariate) or 0.1 / sqrt(N*J*K)."""
    if N < 1 or J < 1 or (K is not None and K < 1):
        raise ValueError("dimensions must be positive")
    size = N * J if K is None else N * J * K
    return 0.1 / np.sqrt(size)


def penalty_subgradient(spec, beta) -> np.ndarray:
    """A subgradient of the exact structured penalty at beta.

    Group case: per-group gamma * w_g * beta_g / ||beta_g|| with the zero
    block at the kink.  Graph case: C^T sign(C beta) with sign(0) = 0.  Both
    choices pick the minimal-norm element on the flat faces.
    """
    beta = np.asarray(beta, dtype=float)
    if isinstance(spec, GroupPenaltySpec):
        spec.validate_against(beta.shape[0])
        sg = np.zeros_like(beta)
        for g, w in zip(spec.groups, spec.weights):
            idx = np.asarray(g, dtype=np.int64)
            norm = np.linalg.norm(beta[idx])
            if norm > 0:
                sg[idx] += spec.gamma * w * beta[idx] / norm
        return sg
    if isinstance(spec, GraphPenaltySpec):
        coupling = build_coupling(spec)
        return coupling.matrix.T @ np.sign(coupling.matrix @ beta)
    raise StructureError(f"unknown penalty spec type {type(spec).__name__}")


def solve_fobos(problem: Problem, config: FobosConfig, beta0=None):
    """Run the subgradient baseline; returns ``(beta_best, trace)``.

    ``beta_best`` is the iterate with the best objective seen, since the
    plain iterates do not decrease monotonically.
    """
    J = problem.num_features
    beta = np.zeros(J) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    lam = config.lam
    has_penalty = problem.penalty is not None and problem.penalty.gamma != 0.0

    def objective(b):
        val = problem.loss.value(b) + lam * float(np.abs(b).sum())
        if has_penalty:
            val += penalty_value(problem.penalty, b)
        return val

    trace = Trace(
        header={
            "method": "fobos",
            "c": config.c,
            "lam": lam,
            "max_iter": config.max_iter,
            "rel_tol": config.rel_tol,
            "f_smooth_field": "best_objective",
        }
    )
    # graph subgradients reuse one incidence matrix across iterations
    graph_coupling = None
    if has_penalty and isinstance(problem.penalty, GraphPenaltySpec):
        graph_coupling = build_coupling(problem.penalty)

    def subgradient(b):
        if graph_coupling is not None:
            return graph_coupling.matrix.T @ np.sign(graph_coupling.matrix @ b)
        return penalty_subgradient(problem.penalty, b)

    best_f = objective(beta)
    best_beta = beta.copy()
    f_prev = None
    start = time.perf_counter()
    status = "max_iter"
    for t in range(1, config.max_iter + 1):
        step = config.c / np.sqrt(t)
        direction = problem.loss.gradient(beta)
        if has_penalty:
            direction = direction + subgradient(beta)
        if not np.all(np.isfinite(direction)):
            trace.status = "error"
            raise SolverError(f"non-finite subgradient at iteration {t}")
        beta = soft_threshold(beta - step * direction, step * lam)
        f = objective(beta)
        if not np.isfinite(f):
            trace.status = "error"
            raise SolverError(f"non-finite objective at iteration {t}")
        if f < best_f:
            best_f = f
            best_beta = beta.copy()
        if config.record_trace:
            trace.record(t, f, best_f, time.perf_counter() - start)
        if f_prev is not None:
            if abs(f - f_prev) / max(1.0, abs(f_prev)) < config.rel_tol:
                status = "converged"
                break
        f_prev = f
    trace.status = status
    trace.final_nnz = int(np.count_nonzero(best_beta))
    return best_beta, trace
