"""Multi-output extension: J x K coefficient matrix with output-side structure.

The problem is ``0.5 * ||Y - X B||_F^2 + Omega(B) + lam * ||B||_1`` where the
structured penalty couples the K outputs (groups over output indices or a
graph on output nodes) and applies identically to every input row of B:

* group:  gamma * sum_j sum_g w_g * ||B[j, g]||_2
* graph:  gamma * sum_(m,l) tau(r) * sum_j |B[j,m] - sign(r) * B[j,l]|

Writing ``Omega(B) = max_{A in Q} <C B^T, A>`` with the same output-side
coupling matrix C, the smoothed machinery carries over columnwise: the dual
feasible set is a product of one copy of the vector-case set per input, so
the dual-domain bound is J times the vector-case bound, and the smoothed
gradient Lipschitz constant reuses the vector-case coupling norm.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .losses import PRECOMPUTE_MAX_FEATURES, gram_lipschitz
from .penalties import (
    GraphPenaltySpec,
    GroupPenaltySpec,
    StructureError,
    build_coupling,
)
from .smoothing import coupling_norm, dual_domain_bound, select_mu
from .solver import SolverConfig, SolverError, Trace, soft_threshold, total_lipschitz


@dataclass(frozen=True)
class MultiProblem:
    """Design matrix, response matrix, and an output-side penalty spec."""

    X: np.ndarray
    Y: np.ndarray
    penalty: object = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.ndim != 2 or Y.ndim != 2:
            raise StructureError("X and Y must be 2-d arrays")
        if Y.shape[0] != X.shape[0]:
            raise StructureError(
                f"X has {X.shape[0]} samples but Y has {Y.shape[0]}"
            )
        if self.penalty is not None:
            K = Y.shape[1]
            if isinstance(self.penalty, GroupPenaltySpec):
                self.penalty.validate_against(K)
            elif isinstance(self.penalty, GraphPenaltySpec):
                if self.penalty.num_nodes != K:
                    raise StructureError(
                        "graph penalty node count does not match output count"
                    )
            else:
                raise StructureError(
                    f"unknown penalty spec type {type(self.penalty).__name__}"
                )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def num_samples(self):
        return self.X.shape[0]

    @property
    def num_features(self):
        return self.X.shape[1]

    @property
    def num_outputs(self):
        return self.Y.shape[1]


def multi_penalty_value(problem: MultiProblem, B) -> float:
    """Exact structured penalty value for a J x K coefficient matrix."""
    B = np.asarray(B, dtype=float)
    spec = problem.penalty
    if spec is None:
        return 0.0
    if B.shape != (problem.num_features, problem.num_outputs):
        raise StructureError(
            f"B has shape {B.shape}, expected "
            f"({problem.num_features}, {problem.num_outputs})"
        )
    if isinstance(spec, GroupPenaltySpec):
        total = 0.0
        for g, w in zip(spec.groups, spec.weights):
            idx = np.asarray(g, dtype=np.int64)
            total += w * float(np.linalg.norm(B[:, idx], axis=1).sum())
        return spec.gamma * total
    total = 0.0
    for m, l, r in spec.edges:
        total += abs(r) * float(np.abs(B[:, m] - np.sign(r) * B[:, l]).sum())
    return spec.gamma * total


class SmoothedMatrixPenalty:
    """Smoothed output-side penalty over J x K coefficient matrices.

    The auxiliary matrix A lives in (coupling rows) x J; each column is the
    vector-case auxiliary variable for one input dimension, so the dual
    bound is J * (vector-case bound).
    """

    def __init__(self, spec, num_inputs, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.spec = spec
        self.mu = float(mu)
        self.num_inputs = int(num_inputs)
        self.kind = "group" if isinstance(spec, GroupPenaltySpec) else "graph"
        self.coupling = None

    def bind(self, num_outputs):
        """Finalize the coupling once the output count is known."""
        self.coupling = build_coupling(self.spec, num_features=num_outputs) \
            if self.kind == "group" else build_coupling(self.spec)
        if self.kind == "group":
            blocks = self.coupling.row_blocks
            self._block_starts = np.array([b[0] for b in blocks], dtype=np.int64)
            self._block_sizes = np.array([b[1] - b[0] for b in blocks], dtype=np.int64)
        self.D = self.num_inputs * dual_domain_bound(self.spec)
        return self

    def alpha_star(self, B) -> np.ndarray:
        """Blockwise projection of (C B^T) / mu onto the dual feasible set."""
        M = (self.coupling.matrix @ np.asarray(B, dtype=float).T) / self.mu
        if self.kind == "graph":
            return np.clip(M, -1.0, 1.0)
        sq = np.add.reduceat(M * M, self._block_starts, axis=0)
        scale = 1.0 / np.maximum(1.0, np.sqrt(sq))
        return M * np.repeat(scale, self._block_sizes, axis=0)

    def value(self, B) -> float:
        M = self.coupling.matrix @ np.asarray(B, dtype=float).T
        A = self.alpha_star(B)
        return float(np.sum(M * A) - 0.5 * self.mu * np.sum(A * A))

    def gradient(self, B) -> np.ndarray:
        A = self.alpha_star(B)
        return (self.coupling.matrix.T @ A).T


def multi_alpha_star(problem: MultiProblem, mu, B) -> np.ndarray:
    pen = SmoothedMatrixPenalty(problem.penalty, problem.num_features, mu)
    pen.bind(problem.num_outputs)
    return pen.alpha_star(B)


class _FrobeniusLoss:
    """0.5 * ||Y - X B||_F^2 with optional Gram precompute."""

    def __init__(self, X, Y, precompute=None):
        self.X = X
        self.Y = Y
        if precompute is None:
            precompute = X.shape[1] <= PRECOMPUTE_MAX_FEATURES
        self.precompute = bool(precompute)
        if self.precompute:
            self._XtX = X.T @ X
            self._XtY = X.T @ Y
            self._yty = float(np.sum(Y * Y))
        self._lipschitz = None

    def value(self, B) -> float:
        if self.precompute:
            return float(
                0.5 * np.sum(B * (self._XtX @ B)) - np.sum(B * self._XtY)
                + 0.5 * self._yty
            )
        R = self.X @ B - self.Y
        return float(0.5 * np.sum(R * R))

    def gradient(self, B) -> np.ndarray:
        if self.precompute:
            return self._XtX @ B - self._XtY
        return self.X.T @ (self.X @ B - self.Y)

    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = gram_lipschitz(self.X)
        return self._lipschitz


def solve_multivariate(problem: MultiProblem, config: SolverConfig, B0=None):
    """Smoothing proximal gradient over the coefficient matrix.

    Same iteration, prox and stopping rules as the vector solver, with
    matrix-shaped iterates.  Returns ``(B, trace)``.
    """
    J, K = problem.num_features, problem.num_outputs
    B = np.zeros((J, K)) if B0 is None else np.asarray(B0, dtype=float).copy()
    if B.shape != (J, K):
        raise StructureError(f"B0 has shape {B.shape}, expected ({J}, {K})")

    loss = _FrobeniusLoss(problem.X, problem.Y)
    loss_L = loss.lipschitz()
    lam = config.lam

    pen = None
    mu = None
    if problem.penalty is not None and problem.penalty.gamma != 0.0:
        D_vec = dual_domain_bound(problem.penalty)
        if config.mu is not None:
            mu = config.mu
        else:
            # the dual set replicates per input, so D scales by J
            mu = select_mu(config.epsilon, J * D_vec)
        pen = SmoothedMatrixPenalty(problem.penalty, J, mu).bind(K)
        norm_c = coupling_norm(problem.penalty, exact_graph=config.exact_graph_norm)
        L = total_lipschitz(loss_L, norm_c, mu)
    else:
        L = loss_L
    if L <= 0:
        raise SolverError("non-positive Lipschitz constant; nothing to optimize")

    def exact_objective(Bc, loss_value):
        val = loss_value + lam * float(np.abs(Bc).sum())
        if problem.penalty is not None and problem.penalty.gamma != 0.0:
            val += multi_penalty_value(problem, Bc)
        return val

    trace = Trace(
        header={
            "mu": mu,
            "epsilon": config.epsilon,
            "L": L,
            "lam": lam,
            "max_iter": config.max_iter,
            "rel_tol": config.rel_tol,
            "shape": [J, K],
        }
    )
    W = B.copy()
    theta = 1.0
    f_prev = None
    start = time.perf_counter()
    status = "max_iter"
    for t in range(config.max_iter):
        grad = loss.gradient(W)
        if pen is not None:
            grad = grad + pen.gradient(W)
        if not np.all(np.isfinite(grad)):
            trace.status = "error"
            raise SolverError(f"non-finite gradient at iteration {t}")
        B_next = soft_threshold(W - grad / L, lam / L)
        theta_next = 2.0 / (t + 3.0)
        W = B_next + (1.0 - theta) / theta * theta_next * (B_next - B)
        B = B_next
        theta = theta_next
        loss_val = loss.value(B)
        f = exact_objective(B, loss_val)
        if not np.isfinite(f):
            trace.status = "error"
            raise SolverError(f"non-finite objective at iteration {t + 1}")
        if config.record_trace:
            f_smooth = loss_val + lam * float(np.abs(B).sum())
            if pen is not None:
                f_smooth += pen.value(B)
            trace.record(t + 1, f, f_smooth, time.perf_counter() - start)
        if f_prev is not None:
            if abs(f - f_prev) / max(1.0, abs(f_prev)) < config.rel_tol:
                status = "converged"
                break
        f_prev = f
    trace.status = status
    trace.final_nnz = int(np.count_nonzero(B))
    return B, trace
