"""Smooth approximation of the structured penalties.

The exact penalty ``f0(beta) = max_{alpha in Q} alpha^T C beta`` is replaced
by ``f_mu(beta) = max_{alpha in Q} (alpha^T C beta - mu/2 * ||alpha||^2)``,
which is smooth with gradient ``C^T alpha*`` and satisfies the sandwich bound
``f0 - mu*D <= f_mu <= f0`` where ``D = max_{alpha in Q} ||alpha||^2 / 2``.
The maximizer ``alpha*`` has a closed form: per-group l2-ball projection for
group penalties, entrywise clipping to [-1, 1] for graph penalties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .penalties import (
    CouplingMatrix,
    GraphPenaltySpec,
    GroupPenaltySpec,
    StructureError,
    build_coupling,
    coupling_apply,
    coupling_apply_transpose,
)

#: Lower clamp on the smoothness parameter; avoids 1/mu blow-ups when a tiny
#: target accuracy is combined with a small dual-domain bound.
MU_FLOOR = 1e-12

#: Smoothness parameter used when no target accuracy is supplied.
DEFAULT_MU = 1e-4


def dual_domain_bound(spec) -> float:
    """Maximum of ||alpha||^2 / 2 over the dual feasible set.

    Equals (number of groups)/2 for group penalties (product of unit balls)
    and (number of edges)/2 for graph penalties (l-infinity box).
    """
    if isinstance(spec, GroupPenaltySpec):
        return len(spec.groups) / 2.0
    if isinstance(spec, GraphPenaltySpec):
        return len(spec.edges) / 2.0
    raise StructureError(f"unknown penalty spec type {type(spec).__name__}")


def select_mu(epsilon=None, D=None) -> float:
    """Smoothness parameter for a target accuracy: mu = epsilon / (2 D).

    With no target accuracy, returns the fixed default of 1e-4.
    """
    if epsilon is None:
        return DEFAULT_MU
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if D is None or D <= 0:
        raise ValueError("D must be positive")
    return max(epsilon / (2.0 * D), MU_FLOOR)


def _project_group_blocks(z, block_sizes, block_starts):
    """Scale each contiguous block of z onto the unit l2 ball."""
    sq = np.add.reduceat(z * z, block_starts)
    norms = np.sqrt(sq)
    scale = 1.0 / np.maximum(1.0, norms)
    return z * np.repeat(scale, block_sizes)


@dataclass(frozen=True)
class SmoothedPenalty:
    """Smoothed penalty bound to a coupling matrix and a smoothness mu."""

    coupling: CouplingMatrix
    mu: float
    D: float
    kind: str  # "group" | "graph"

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.kind not in ("group", "graph"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "group" and self.coupling.row_blocks is None:
            raise StructureError("group smoothing requires row blocks")
        starts = None
        sizes = None
        if self.kind == "group":
            blocks = self.coupling.row_blocks
            starts = np.array([b[0] for b in blocks], dtype=np.int64)
            sizes = np.array([b[1] - b[0] for b in blocks], dtype=np.int64)
        object.__setattr__(self, "_block_starts", starts)
        object.__setattr__(self, "_block_sizes", sizes)

    def alpha_star(self, beta) -> np.ndarray:
        """Closed-form maximizer of the smoothed dual problem at beta."""
        z = coupling_apply(self.coupling, beta) / self.mu
        if self.kind == "group":
            return _project_group_blocks(z, self._block_sizes, self._block_starts)
        return np.clip(z, -1.0, 1.0)

    def value(self, beta) -> float:
        alpha = self.alpha_star(beta)
        cb = coupling_apply(self.coupling, beta)
        return float(alpha @ cb - 0.5 * self.mu * (alpha @ alpha))

    def gradient(self, beta) -> np.ndarray:
        return coupling_apply_transpose(self.coupling, self.alpha_star(beta))


def smoothed_penalty(spec, mu, num_features=None) -> SmoothedPenalty:
    """Build a SmoothedPenalty from a penalty spec."""
    coupling = build_coupling(spec, num_features=num_features)
    kind = "group" if isinstance(spec, GroupPenaltySpec) else "graph"
    return SmoothedPenalty(
        coupling=coupling, mu=mu, D=dual_domain_bound(spec), kind=kind
    )


def alpha_star_group(spec: GroupPenaltySpec, mu, beta, num_features=None) -> np.ndarray:
    """Per-group l2-ball projection of gamma * w_g * beta_g / mu."""
    beta = np.asarray(beta, dtype=float)
    J = beta.shape[0] if num_features is None else num_features
    return smoothed_penalty(spec, mu, num_features=J).alpha_star(beta)


def alpha_star_graph(spec: GraphPenaltySpec, mu, beta) -> np.ndarray:
    """Entrywise clip of C beta / mu to [-1, 1]."""
    return smoothed_penalty(spec, mu).alpha_star(beta)


def coupling_norm_group(spec: GroupPenaltySpec) -> float:
    """Exact operator norm of the group coupling matrix.

    Because each row has a single non-zero, ||C|| is gamma times the largest
    root-sum-of-squares of weights over the groups containing any one index.
    """
    per_index = {}
    for g, w in zip(spec.groups, spec.weights):
        for j in g:
            per_index[j] = per_index.get(j, 0.0) + w * w
    return spec.gamma * float(np.sqrt(max(per_index.values())))


def coupling_norm_graph_bound(spec: GraphPenaltySpec) -> float:
    """Tight upper bound on the graph coupling norm.

    ``sqrt(2 gamma^2 max_j d_j)`` with ``d_j`` the tau^2-weighted degree of
    node j; for unit weights d_j is just the degree.
    """
    degrees = np.zeros(spec.num_nodes)
    for m, l, r in spec.edges:
        tau2 = r * r
        degrees[m] += tau2
        degrees[l] += tau2
    return spec.gamma * float(np.sqrt(2.0 * degrees.max())) if spec.edges else 0.0


def coupling_norm(spec, exact_graph=False) -> float:
    """Operator norm of the coupling matrix for either penalty family.

    For graphs, returns the closed-form upper bound by default (keeps the
    step-size guarantee conservative); set ``exact_graph`` for a power
    iteration estimate.
    """
    if isinstance(spec, GroupPenaltySpec):
        return coupling_norm_group(spec)
    if isinstance(spec, GraphPenaltySpec):
        if exact_graph:
            return spectral_norm_power_iteration(build_coupling(spec)).value
        return coupling_norm_graph_bound(spec)
    raise StructureError(f"unknown penalty spec type {type(spec).__name__}")


class SpectralEstimate(NamedTuple):
    value: float
    iterations: int
    converged: bool


def spectral_norm_power_iteration(
    coupling: CouplingMatrix, tol=1e-8, max_iter=5000
) -> SpectralEstimate:
    """Largest singular value of C via power iteration on C^T C.

    Starts from the normalized all-ones vector for reproducibility.  If the
    relative change in the estimate has not dropped below ``tol`` within
    ``max_iter`` iterations the result is flagged as approximate.
    """
    C = coupling.matrix
    if C.shape[0] == 0 or C.nnz == 0:
        return SpectralEstimate(0.0, 0, True)
    J = C.shape[1]
    # the all-ones start lies in the nullspace of difference operators, so
    # fall back through a fixed sequence of deterministic start vectors
    starts = [
        np.ones(J) / np.sqrt(J),
        (-1.0) ** np.arange(J) / np.sqrt(J),
        np.random.default_rng(0).standard_normal(J),
    ]
    v = starts.pop(0)
    last = np.inf
    for it in range(1, max_iter + 1):
        w = C.T @ (C @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            if starts:
                v = starts.pop(0)
                continue
            return SpectralEstimate(0.0, it, True)
        v = w / norm
        est = np.sqrt(norm)
        if abs(est - last) <= tol * max(1.0, abs(est)):
            return SpectralEstimate(float(est), it, True)
        last = est
    return SpectralEstimate(float(last), max_iter, False)
