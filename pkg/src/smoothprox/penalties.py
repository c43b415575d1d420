"""Structured sparsity penalties and their sparse coupling operators.

Two penalty families are supported:

* overlapping group lasso: ``gamma * sum_g w_g * ||beta_g||_2`` over a
  collection of (possibly overlapping) index groups, and
* graph-guided fusion: ``gamma * sum_{(m,l)} tau(r_ml) * |beta_m -
  sign(r_ml) * beta_l|`` over weighted, signed edges.

Both can be written as ``max_{alpha in Q} alpha^T C beta`` for a sparse
coupling matrix ``C``; this module builds ``C`` and evaluates the exact
(non-smoothed) penalty values.  All indices are 0-based in memory; the JSON
file format uses 1-based indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp


class StructureError(ValueError):
    """Raised when a penalty specification or dimension is invalid."""


def _as_float_vector(beta, length=None):
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1:
        raise StructureError(f"expected a 1-d coefficient vector, got shape {beta.shape}")
    if length is not None and beta.shape[0] != length:
        raise StructureError(f"coefficient vector has length {beta.shape[0]}, expected {length}")
    return beta


@dataclass(frozen=True)
class GroupPenaltySpec:
    """Overlapping group lasso penalty specification.

    ``groups`` holds 0-based index tuples (overlaps allowed, singletons
    allowed -- a singleton group degrades to a weighted l1 term).  ``weights``
    are per-group positive scalars; ``gamma`` is the overall penalty weight.
    """

    groups: tuple
    weights: tuple
    gamma: float

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "gamma", float(self.gamma))
        if len(groups) == 0:
            raise StructureError("at least one group is required")
        if len(weights) != len(groups):
            raise StructureError("weights and groups must have the same length")
        for g in groups:
            if len(g) == 0:
                raise StructureError("empty group")
            if any(i < 0 for i in g):
                raise StructureError("negative group index")
        if any(w <= 0 for w in weights):
            raise StructureError("group weights must be positive")
        if self.gamma < 0:
            raise StructureError("gamma must be non-negative")

    @classmethod
    def with_unit_weights(cls, groups, gamma):
        return cls(tuple(groups), (1.0,) * len(tuple(groups)), gamma)

    def validate_against(self, num_features):
        for g in self.groups:
            if any(i >= num_features for i in g):
                raise StructureError(
                    f"group index out of range for {num_features} features"
                )


@dataclass(frozen=True)
class GraphPenaltySpec:
    """Graph-guided fusion penalty specification.

    ``edges`` holds ``(m, l, r)`` triples with 0-based node indices
    ``m < l`` and a real edge correlation ``r``.  The fusion weight map is
    fixed to ``tau(r) = |r|``.
    """

    num_nodes: int
    edges: tuple
    gamma: float

    def __post_init__(self):
        edges = tuple((int(m), int(l), float(r)) for m, l, r in self.edges)
        object.__setattr__(self, "num_nodes", int(self.num_nodes))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.num_nodes < 1:
            raise StructureError("num_nodes must be positive")
        seen = set()
        for m, l, _ in edges:
            if m == l:
                raise StructureError(f"self-loop on node {m}")
            if not (0 <= m < l < self.num_nodes):
                raise StructureError(f"edge ({m}, {l}) out of range or not ordered")
            if (m, l) in seen:
                raise StructureError(f"duplicate edge ({m}, {l})")
            seen.add((m, l))
        if self.gamma < 0:
            raise StructureError("gamma must be non-negative")


@dataclass(frozen=True)
class CouplingMatrix:
    """Sparse coupling matrix C with optional per-group row blocks.

    For group penalties each row holds a single non-zero ``gamma * w_g`` and
    ``row_blocks`` partitions the rows into per-group blocks (given as
    ``(start, stop)`` offsets in group order).  For graph penalties each row
    is a signed, weighted difference over one edge (two non-zeros, or an
    all-zero row when ``r = 0``, retained to keep rows aligned with the edge
    list).
    """

    matrix: sp.csr_matrix
    row_blocks: tuple | None = None

    @property
    def rows(self):
        return self.matrix.shape[0]

    @property
    def cols(self):
        return self.matrix.shape[1]

    @property
    def nnz(self):
        return self.matrix.nnz

    def toarray(self):
        return self.matrix.toarray()


def build_group_coupling(spec: GroupPenaltySpec, num_features: int) -> CouplingMatrix:
    """Build the coupling matrix for an overlapping group lasso penalty.

    Rows are indexed by (member, group) pairs in group order, then member
    order within each group; row ``(i, g)`` carries ``gamma * w_g`` in
    column ``i``.
    """
    spec.validate_against(num_features)
    cols = np.concatenate([np.asarray(g, dtype=np.int64) for g in spec.groups])
    vals = np.concatenate(
        [np.full(len(g), spec.gamma * w) for g, w in zip(spec.groups, spec.weights)]
    )
    rows = np.arange(cols.size, dtype=np.int64)
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(cols.size, num_features))
    blocks = []
    start = 0
    for g in spec.groups:
        blocks.append((start, start + len(g)))
        start += len(g)
    return CouplingMatrix(matrix=matrix, row_blocks=tuple(blocks))


def build_graph_coupling(spec: GraphPenaltySpec) -> CouplingMatrix:
    """Build the signed, weighted edge-vertex incidence matrix for a graph
    fusion penalty: row e = (m, l) has ``gamma * tau(r)`` at column m and
    ``-gamma * sign(r) * tau(r)`` at column l."""
    num_edges = len(spec.edges)
    rows, cols, vals = [], [], []
    for e, (m, l, r) in enumerate(spec.edges):
        tau = abs(r)
        if tau == 0.0:
            continue
        rows.extend((e, e))
        cols.extend((m, l))
        vals.extend((spec.gamma * tau, -spec.gamma * np.sign(r) * tau))
    matrix = sp.csr_matrix(
        (vals, (rows, cols)), shape=(num_edges, spec.num_nodes)
    )
    return CouplingMatrix(matrix=matrix, row_blocks=None)


def penalty_value_group(spec: GroupPenaltySpec, beta) -> float:
    """Exact overlapping group lasso value: gamma * sum_g w_g * ||beta_g||_2."""
    beta = _as_float_vector(beta)
    spec.validate_against(beta.shape[0])
    total = 0.0
    for g, w in zip(spec.groups, spec.weights):
        total += w * float(np.linalg.norm(beta[np.asarray(g, dtype=np.int64)]))
    return spec.gamma * total


def penalty_value_graph(spec: GraphPenaltySpec, beta) -> float:
    """Exact graph fusion value: gamma * sum_e tau(r) * |beta_m - sign(r) beta_l|.

    Equals ``||C beta||_1`` for the incidence matrix built above.
    """
    beta = _as_float_vector(beta, spec.num_nodes)
    total = 0.0
    for m, l, r in spec.edges:
        total += abs(r) * abs(beta[m] - np.sign(r) * beta[l])
    return spec.gamma * float(total)


def penalty_value(spec, beta) -> float:
    """Dispatch to the exact penalty value for either penalty family."""
    if isinstance(spec, GroupPenaltySpec):
        return penalty_value_group(spec, beta)
    if isinstance(spec, GraphPenaltySpec):
        return penalty_value_graph(spec, beta)
    raise StructureError(f"unknown penalty spec type {type(spec).__name__}")


def coupling_apply(coupling: CouplingMatrix, beta) -> np.ndarray:
    """Sparse product C @ beta."""
    beta = _as_float_vector(beta, coupling.cols)
    return coupling.matrix @ beta


def coupling_apply_transpose(coupling: CouplingMatrix, alpha) -> np.ndarray:
    """Sparse transpose product C^T @ alpha."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (coupling.rows,):
        raise StructureError(
            f"auxiliary vector has shape {alpha.shape}, expected ({coupling.rows},)"
        )
    return coupling.matrix.T @ alpha


def build_coupling(spec, num_features=None) -> CouplingMatrix:
    """Build the coupling matrix for either penalty family."""
    if isinstance(spec, GroupPenaltySpec):
        if num_features is None:
            raise StructureError("num_features is required for group penalties")
        return build_group_coupling(spec, num_features)
    if isinstance(spec, GraphPenaltySpec):
        return build_graph_coupling(spec)
    raise StructureError(f"unknown penalty spec type {type(spec).__name__}")


# --- JSON serialization (1-based indices on disk) ---

def penalty_to_json(spec) -> str:
    if isinstance(spec, GroupPenaltySpec):
        doc = {
            "type": "group",
            "gamma": spec.gamma,
            "groups": [[i + 1 for i in g] for g in spec.groups],
            "weights": list(spec.weights),
        }
    elif isinstance(spec, GraphPenaltySpec):
        doc = {
            "type": "graph",
            "gamma": spec.gamma,
            "num_nodes": spec.num_nodes,
            "edges": [[m + 1, l + 1, r] for m, l, r in spec.edges],
        }
    else:
        raise StructureError(f"unknown penalty spec type {type(spec).__name__}")
    return json.dumps(doc, indent=2, sort_keys=True)


def penalty_from_json(text: str):
    doc = json.loads(text)
    kind = doc.get("type")
    if kind == "group":
        groups = tuple(tuple(i - 1 for i in g) for g in doc["groups"])
        weights = tuple(doc.get("weights") or [1.0] * len(groups))
        return GroupPenaltySpec(groups=groups, weights=weights, gamma=doc["gamma"])
    if kind == "graph":
        edges = tuple((m - 1, l - 1, r) for m, l, r in doc["edges"])
        return GraphPenaltySpec(
            num_nodes=doc["num_nodes"], edges=edges, gamma=doc["gamma"]
        )
    raise StructureError(f"unknown penalty type {kind!r} in JSON document")
