import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from glassceiling.attributed_graph import AttributedMultigraph
from glassceiling.distributions import (
    AttributeDistribution,
    JointRemainingDegreeDistribution,
    RemainingDegreeDistribution,
    attribute_distributions,
    build_jdam,
    nonzero_cells,
    normalize_jdam,
)
from glassceiling.exceptions import DegenerateSeries

# Variances at or below this are treated as zero (regular graphs).
VARIANCE_FLOOR = 1e-15


@dataclass
class AssortativityReport:
    gamma_deg: Optional[float]
    gamma_att: Optional[float]

    def to_dict(self) -> dict:
        return {"gamma_deg": self.gamma_deg, "gamma_att": self.gamma_att}


def degree_assortativity(
    e: JointRemainingDegreeDistribution, q: RemainingDegreeDistribution
) -> Optional[float]:
    """Newman's degree assortativity over remaining degrees; ``None`` when sigma_q is 0."""
    k = np.arange(len(q.q), dtype=float)
    mean = math.fsum(k * q.q)
    variance = math.fsum(k * k * q.q) - mean * mean
    if variance <= VARIANCE_FLOOR:
        return None
    rows, cols, values = nonzero_cells(e.e)
    covariance = math.fsum(rows * cols * values) - mean * mean
    return covariance / variance


def attribute_assortativity(m: AttributeDistribution) -> Optional[float]:
    """Newman's attribute assortativity; ``None`` when only one attribute is present.

    Evaluated on the integer half-edge counts so the extremes come out exact.
    """
    total = m.total
    endpoints = [int(x) for x in m.endpoint_counts]
    same = int(np.trace(m.joint_counts))
    squares = sum(x * x for x in endpoints)
    denominator = total * total - squares
    if denominator == 0:
        return None
    return (total * same - squares) / denominator


def degree_assortativity_from_edges(graph: AttributedMultigraph) -> Optional[float]:
    """Pearson correlation of endpoint degrees over all half-edge pairs."""
    degrees = graph.degrees().astype(float)
    u, v, w = graph.edge_arrays()
    x = np.repeat(np.concatenate([degrees[u], degrees[v]]), np.concatenate([w, w]))
    y = np.repeat(np.concatenate([degrees[v], degrees[u]]), np.concatenate([w, w]))
    if len(x) < 2 or np.var(x) <= VARIANCE_FLOOR:
        return None
    return float(np.corrcoef(x, y)[0, 1])


def assortativity_report(graph: AttributedMultigraph, kmax_cutoff: Optional[int] = None) -> AssortativityReport:
    nj = normalize_jdam(build_jdam(graph, kmax_cutoff))
    return AssortativityReport(
        gamma_deg=degree_assortativity(nj.joint_remaining, nj.remaining_degree),
        gamma_att=attribute_assortativity(attribute_distributions(graph)),
    )


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise DegenerateSeries(f"series lengths differ ({len(x)} vs {len(y)})")
    if len(x) < 2:
        raise DegenerateSeries("at least two points are needed")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateSeries("series has zero variance")
    return float(stats.pearsonr(x, y)[0])
