"""Degree, remaining-degree and attribute distributions, and the joint
degree-and-attribute matrix (JDAM).

Groups are indexed by remaining degree ``k = degree - 1`` and attribute:
``group = 2 * k + a`` with ``a = 0`` for +1 and ``a = 1`` for -1. Isolated nodes
belong to no group and are excluded from every edge-based distribution.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import sparse

from glassceiling.attributed_graph import AttributedMultigraph
from glassceiling.exceptions import DegenerateDistribution, EmptyGraph, EmptyJdam

logger = logging.getLogger(__name__)

# Above this many remaining-degree values matrices are stored sparse.
DENSE_LIMIT = 512

Matrix = Union[np.ndarray, sparse.csr_matrix]
Cell = Tuple[int, int]


def group_index(k: int, attr_index: int) -> int:
    return 2 * k + attr_index


def group_label(group: int) -> str:
    k, a = divmod(group, 2)
    return f"{k}:{'+1' if a == 0 else '-1'}"


def build_matrix(rows: np.ndarray, cols: np.ndarray, values: np.ndarray, size: int) -> Matrix:
    """Square matrix from cell triples, dense up to ``DENSE_LIMIT`` rows, CSR beyond."""
    if size <= DENSE_LIMIT:
        matrix = np.zeros((size, size), dtype=values.dtype)
        np.add.at(matrix, (rows, cols), values)
        return matrix
    return sparse.coo_matrix((values, (rows, cols)), shape=(size, size)).tocsr()


def nonzero_cells(matrix: Matrix) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows, columns and values of the non-zero cells, in row-major order."""
    if sparse.issparse(matrix):
        coo = matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        rows, cols, vals = coo.row[order], coo.col[order], coo.data[order]
        keep = vals != 0
        return rows[keep].astype(np.int64), cols[keep].astype(np.int64), vals[keep]
    rows, cols = np.nonzero(matrix)
    return rows.astype(np.int64), cols.astype(np.int64), matrix[rows, cols]


def column_sums(matrix: Matrix) -> np.ndarray:
    return np.asarray(matrix.sum(axis=0)).ravel()


def _require_edges(graph: AttributedMultigraph):
    if graph.n_edges == 0:
        raise EmptyGraph("graph has no edges")


def _clamped_degrees(graph: AttributedMultigraph, kmax_cutoff: Optional[int]) -> np.ndarray:
    degrees = graph.degrees()
    if kmax_cutoff is not None:
        if kmax_cutoff < 1:
            raise ValueError(f"kmax_cutoff must be at least 1, got {kmax_cutoff}")
        degrees = np.minimum(degrees, kmax_cutoff)
    return degrees


# -- node degree distributions -------------------------------------------------

@dataclass
class DegreeDistribution:
    """``p[k]`` is the fraction of non-isolated nodes with degree ``k``; ``p[0] == 0``."""

    p: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.p) - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.p)), self.p))


@dataclass
class RemainingDegreeDistribution:
    """``q[k]`` for ``k = 0 .. k_max - 1``."""

    q: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.q)


@dataclass
class JointRemainingDegreeDistribution:
    """Symmetric ``e[k, k']`` over remaining degrees, dense or CSR."""

    e: Matrix

    @property
    def k_max(self) -> int:
        return self.e.shape[0]

    def marginal(self) -> np.ndarray:
        return column_sums(self.e)

    def dense(self) -> np.ndarray:
        return self.e.toarray() if sparse.issparse(self.e) else np.asarray(self.e)


@dataclass
class AttributeDistribution:
    """Edge-endpoint attribute distributions.

    ``joint_counts[a, b]`` counts ordered half-edge pairs with attribute indices
    ``a`` and ``b`` (index 0 is +1), so every edge is counted in both directions.
    """

    joint_counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.joint_counts.sum())

    @property
    def endpoint_counts(self) -> np.ndarray:
        return self.joint_counts.sum(axis=1)

    @property
    def marginal(self) -> np.ndarray:
        return self.endpoint_counts / self.total

    @property
    def joint(self) -> np.ndarray:
        return self.joint_counts / self.total

    def m(self, c: int, c_prime: Optional[int] = None) -> float:
        a = 0 if c == 1 else 1
        if c_prime is None:
            return float(self.marginal[a])
        b = 0 if c_prime == 1 else 1
        return float(self.joint[a, b])


def degree_distribution(graph: AttributedMultigraph) -> DegreeDistribution:
    _require_edges(graph)
    degrees = graph.degrees()
    degrees = degrees[degrees > 0]
    counts = np.bincount(degrees)
    return DegreeDistribution(p=counts / len(degrees))


def remaining_degree_distribution(dist: DegreeDistribution) -> RemainingDegreeDistribution:
    k = np.arange(len(dist.p))
    weighted = k * dist.p
    mean = weighted.sum()
    if mean <= 0:
        raise DegenerateDistribution("mean degree is zero")
    return RemainingDegreeDistribution(q=weighted[1:] / mean)


def joint_remaining_degree(
    graph: AttributedMultigraph, kmax_cutoff: Optional[int] = None
) -> JointRemainingDegreeDistribution:
    _require_edges(graph)
    degrees = _clamped_degrees(graph, kmax_cutoff)
    u, v, w = graph.edge_arrays()
    ku, kv = degrees[u] - 1, degrees[v] - 1
    size = int(degrees.max())
    rows = np.concatenate([ku, kv])
    cols = np.concatenate([kv, ku])
    counts = build_matrix(rows, cols, np.concatenate([w, w]), size)
    return JointRemainingDegreeDistribution(e=counts / (2 * graph.n_edges))


def attribute_distributions(graph: AttributedMultigraph) -> AttributeDistribution:
    _require_edges(graph)
    attr = graph.attribute_indices()
    u, v, w = graph.edge_arrays()
    joint = np.zeros((2, 2), dtype=np.int64)
    np.add.at(joint, (attr[u], attr[v]), w)
    np.add.at(joint, (attr[v], attr[u]), w)
    return AttributeDistribution(joint_counts=joint)


# -- JDAM ----------------------------------------------------------------------

@dataclass
class Jdam:
    """Integer edge counts between degree-attribute groups.

    ``counts`` is ``2 * k_max`` square, symmetric, and sums to ``2 * M``.
    """

    counts: Matrix
    k_max: int

    @property
    def n_groups(self) -> int:
        return 2 * self.k_max

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.counts)

    def cells(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return nonzero_cells(self.counts)

    def get(self, group: int, other: int) -> int:
        return int(self.counts[group, other])

    def labels(self) -> List[str]:
        return [group_label(g) for g in range(self.n_groups)]

    def to_frame(self, normalized: bool = False) -> pd.DataFrame:
        dense = self.counts.toarray() if self.is_sparse else np.asarray(self.counts)
        values = dense / self.total if normalized else dense
        labels = self.labels()
        frame = pd.DataFrame(values, index=labels, columns=labels)
        frame.index.name = "k:c"
        return frame

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "Jdam":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] % 2:
            raise ValueError("JDAM counts must be square with an even dimension")
        if not np.array_equal(counts, counts.T):
            raise ValueError("JDAM counts must be symmetric")
        if (counts < 0).any():
            raise ValueError("JDAM counts must be non-negative")
        return cls(counts=counts, k_max=counts.shape[0] // 2)


def _group_assignments(graph: AttributedMultigraph, kmax_cutoff: Optional[int]) -> np.ndarray:
    degrees = _clamped_degrees(graph, kmax_cutoff)
    return 2 * (degrees - 1) + graph.attribute_indices()


def build_jdam(graph: AttributedMultigraph, kmax_cutoff: Optional[int] = None) -> Jdam:
    _require_edges(graph)
    degrees = _clamped_degrees(graph, kmax_cutoff)
    groups = _group_assignments(graph, kmax_cutoff)
    u, v, w = graph.edge_arrays()
    k_max = int(degrees.max())
    rows = np.concatenate([groups[u], groups[v]])
    cols = np.concatenate([groups[v], groups[u]])
    counts = build_matrix(rows, cols, np.concatenate([w, w]), 2 * k_max)
    return Jdam(counts=counts, k_max=k_max)


@dataclass
class NormalizedJdam:
    """``p(k, k', c, c')`` over the non-zero JDAM cells, with cached marginals.

    All marginals are formed from the integer counts before dividing by the
    total, so equal counts always give bit-identical probabilities.
    """

    rows: np.ndarray
    cols: np.ndarray
    counts: np.ndarray
    k_max: int
    total: int = field(init=False)

    def __post_init__(self):
        self.total = int(self.counts.sum())
        if self.total <= 0:
            raise EmptyJdam("JDAM has no counts")

    @classmethod
    def from_cells(cls, cells: Dict[Cell, int]) -> "NormalizedJdam":
        items = sorted((cell, count) for cell, count in cells.items() if count)
        if not items:
            raise EmptyJdam("JDAM has no counts")
        rows = np.fromiter((cell[0] for cell, _ in items), dtype=np.int64, count=len(items))
        cols = np.fromiter((cell[1] for cell, _ in items), dtype=np.int64, count=len(items))
        counts = np.fromiter((count for _, count in items), dtype=np.int64, count=len(items))
        if (counts < 0).any():
            raise ValueError("JDAM counts must be non-negative")
        k_max = int(max(rows.max(), cols.max())) // 2 + 1
        return cls(rows=rows, cols=cols, counts=counts, k_max=k_max)

    @property
    def p4(self) -> np.ndarray:
        return self.counts / self.total

    @cached_property
    def group_counts(self) -> np.ndarray:
        return np.bincount(self.rows, weights=self.counts, minlength=2 * self.k_max).astype(np.int64)

    @cached_property
    def group_marginal(self) -> np.ndarray:
        """``p(k, c)`` indexed by group."""
        return self.group_counts / self.total

    @cached_property
    def remaining_degree(self) -> RemainingDegreeDistribution:
        counts = self.group_counts[0::2] + self.group_counts[1::2]
        return RemainingDegreeDistribution(q=counts / self.total)

    @cached_property
    def degree_cells(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Attribute-marginal cells ``(k, k', count)`` in row-major order."""
        k_rows, k_cols = self.rows // 2, self.cols // 2
        flat = k_rows * self.k_max + k_cols
        keys, inverse = np.unique(flat, return_inverse=True)
        summed = np.bincount(inverse, weights=self.counts).astype(np.int64)
        return keys // self.k_max, keys % self.k_max, summed

    @cached_property
    def joint_remaining(self) -> JointRemainingDegreeDistribution:
        k_rows, k_cols, summed = self.degree_cells
        return JointRemainingDegreeDistribution(e=build_matrix(k_rows, k_cols, summed / self.total, self.k_max))

    def cell_degree_probability(self) -> np.ndarray:
        """``e[k, k']`` looked up for every JDAM cell."""
        k_rows, k_cols, summed = self.degree_cells
        lookup = dict(zip((k_rows * self.k_max + k_cols).tolist(), (summed / self.total).tolist()))
        keys = (self.rows // 2) * self.k_max + self.cols // 2
        return np.fromiter((lookup[key] for key in keys.tolist()), dtype=float, count=len(keys))

    def dense(self) -> np.ndarray:
        matrix = np.zeros((2 * self.k_max, 2 * self.k_max))
        matrix[self.rows, self.cols] = self.p4
        return matrix


def normalize_jdam(jdam: Jdam) -> NormalizedJdam:
    if jdam.total <= 0:
        raise EmptyJdam("JDAM has no counts")
    rows, cols, counts = jdam.cells()
    return NormalizedJdam(rows=rows, cols=cols, counts=np.asarray(counts, dtype=np.int64), k_max=jdam.k_max)


class JdamCounter:
    """Mutable cell map of a graph's JDAM for incremental updates.

    Call :meth:`edge_move_delta` before mutating the graph with the proposed
    edge, apply the returned delta, and subtract it again to revert.
    """

    def __init__(self, cells: Dict[Cell, int]):
        self.cells: Dict[Cell, int] = dict(cells)

    @classmethod
    def from_graph(cls, graph: AttributedMultigraph) -> "JdamCounter":
        rows, cols, counts = build_jdam(graph).cells()
        return cls(dict(zip(zip(rows.tolist(), cols.tolist()), counts.tolist())))

    def copy(self) -> "JdamCounter":
        return JdamCounter(dict(self.cells))

    def apply(self, delta: Dict[Cell, int], sign: int = 1):
        for cell, change in delta.items():
            value = self.cells.get(cell, 0) + sign * change
            if value:
                self.cells[cell] = value
            else:
                self.cells.pop(cell, None)

    def normalized(self) -> NormalizedJdam:
        return NormalizedJdam.from_cells(self.cells)

    @staticmethod
    def edge_move_delta(graph: AttributedMultigraph, u: int, v: int) -> Dict[Cell, int]:
        """Cell changes caused by adding one ``u``-``v`` edge to ``graph``.

        Every edge incident to ``u`` or ``v`` shifts rows because both endpoints'
        remaining degrees grow by one.
        """
        attr = {x: graph.attribute(x).index for x in (u, v)}
        old_degree = {x: graph.degree(x) for x in (u, v)}
        touched = set()
        for x in (u, v):
            for y in graph.neighbors(x):
                touched.add((x, y) if x < y else (y, x))

        def group(node: int, degree_shift: Dict[int, int]) -> int:
            if node in degree_shift:
                return 2 * (degree_shift[node] - 1) + attr[node]
            return 2 * (graph.degree(node) - 1) + graph.attribute(node).index

        delta: Dict[Cell, int] = defaultdict(int)
        new_degree = {x: d + 1 for x, d in old_degree.items()}

        def add_pair(a: int, b: int, weight: int, degrees: Dict[int, int]):
            ga, gb = group(a, degrees), group(b, degrees)
            delta[(ga, gb)] += weight
            delta[(gb, ga)] += weight

        for a, b in touched:
            add_pair(a, b, -graph.multiplicity(a, b), old_degree)
        touched.add((u, v) if u < v else (v, u))
        for a, b in touched:
            weight = graph.multiplicity(a, b) + (1 if {a, b} == {u, v} else 0)
            add_pair(a, b, weight, new_degree)
        return {cell: change for cell, change in delta.items() if change}


def half_edge_remaining_degrees(graph: AttributedMultigraph) -> np.ndarray:
    """Remaining degree seen from every half-edge, with multiplicity."""
    degrees = graph.degrees()
    u, v, w = graph.edge_arrays()
    return np.concatenate([np.repeat(degrees[u] - 1, w), np.repeat(degrees[v] - 1, w)])
