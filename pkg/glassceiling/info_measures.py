"""Shannon and Rényi entropies and the mutual-information measures built on
the remaining-degree distribution and the JDAM. All logarithms are base 2.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import entr

from glassceiling.attributed_graph import AttributedMultigraph
from glassceiling.config import DEFAULT_ALPHA
from glassceiling.distributions import (
    JointRemainingDegreeDistribution,
    NormalizedJdam,
    RemainingDegreeDistribution,
    build_jdam,
    column_sums,
    nonzero_cells,
    normalize_jdam,
)
from glassceiling.exceptions import InvalidOrder, NotNormalized, SumRuleViolation

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9
_LN2 = math.log(2.0)


def validate_order(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise InvalidOrder(f"Rényi order must be a finite positive number, got {alpha}")
    return alpha


def _is_shannon(alpha: float) -> bool:
    return alpha == 1.0


def _check_normalized(p: np.ndarray):
    if (p < 0).any():
        raise NotNormalized("distribution has negative entries")
    total = math.fsum(p)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise NotNormalized(f"distribution sums to {total}, not 1")


def _power_sum(values: np.ndarray, alpha: float) -> float:
    values = values[values > 0]
    return math.fsum(values ** alpha)


def shannon_entropy(dist) -> float:
    p = np.asarray(dist, dtype=float).ravel()
    _check_normalized(p)
    return math.fsum(entr(p)) / _LN2


def renyi_entropy(dist, alpha: float) -> float:
    alpha = validate_order(alpha)
    if _is_shannon(alpha):
        return shannon_entropy(dist)
    p = np.asarray(dist, dtype=float).ravel()
    _check_normalized(p)
    return math.log2(_power_sum(p, alpha)) / (1.0 - alpha)


def _check_sum_rules(e: JointRemainingDegreeDistribution, q: RemainingDegreeDistribution):
    marginal = e.marginal()
    if len(marginal) != len(q.q) or np.max(np.abs(marginal - q.q)) > NORMALIZATION_TOLERANCE:
        raise SumRuleViolation("column sums of e do not reproduce q")


def degree_mutual_information(
    e: JointRemainingDegreeDistribution,
    q: RemainingDegreeDistribution,
    alpha: float = DEFAULT_ALPHA,
    check_sum_rules: bool = True,
) -> float:
    """I_alpha(q; q'): divergence of ``e`` from ``q ⊗ q``."""
    alpha = validate_order(alpha)
    if check_sum_rules:
        _check_sum_rules(e, q)
    rows, cols, values = nonzero_cells(e.e)
    if _is_shannon(alpha):
        terms = values * np.log2(values / (q.q[rows] * q.q[cols]))
        return math.fsum(terms)
    q_sum = _power_sum(q.q, alpha)
    return math.log2(q_sum * q_sum / _power_sum(values, alpha)) / (1.0 - alpha)


def conditional_entropy(
    e: JointRemainingDegreeDistribution,
    q: RemainingDegreeDistribution,
    alpha: float = DEFAULT_ALPHA,
    check_sum_rules: bool = True,
) -> float:
    """H_alpha(q | q'), the equivocation of the degree channel."""
    alpha = validate_order(alpha)
    if check_sum_rules:
        _check_sum_rules(e, q)
    rows, cols, values = nonzero_cells(e.e)
    if _is_shannon(alpha):
        return math.fsum(values * np.log2(q.q[cols] / values))
    return math.log2(_power_sum(values, alpha) / _power_sum(q.q, alpha)) / (1.0 - alpha)


def joint_mutual_information(nj: NormalizedJdam, alpha: float = DEFAULT_ALPHA) -> float:
    """I_alpha(q, m; q', m') between the two bivariate edge-end variables."""
    alpha = validate_order(alpha)
    p4 = nj.p4
    marginal = nj.group_marginal
    if _is_shannon(alpha):
        terms = p4 * np.log2(p4 / (marginal[nj.rows] * marginal[nj.cols]))
        return math.fsum(terms)
    group_sum = _power_sum(marginal, alpha)
    return math.log2(group_sum * group_sum / _power_sum(p4, alpha)) / (1.0 - alpha)


def _jdam_degree_mutual_information(nj: NormalizedJdam, alpha: float) -> float:
    e, q = nj.joint_remaining, nj.remaining_degree
    assert np.max(np.abs(column_sums(e.e) - q.q)) <= NORMALIZATION_TOLERANCE
    return degree_mutual_information(e, q, alpha, check_sum_rules=False)


def attribute_conditional_mi(nj: NormalizedJdam, alpha: float = DEFAULT_ALPHA) -> float:
    """I_alpha: joint degree-attribute information minus degree-only information."""
    alpha = validate_order(alpha)
    return joint_mutual_information(nj, alpha) - _jdam_degree_mutual_information(nj, alpha)


def shannon_attribute_mi_direct(nj: NormalizedJdam) -> float:
    """Shannon I_1 as a single sum over JDAM cells, without the MI difference."""
    p4 = nj.p4
    q = nj.remaining_degree.q
    marginal = nj.group_marginal
    k_rows, k_cols = nj.rows // 2, nj.cols // 2
    ratio = (q[k_rows] * q[k_cols] * p4) / (nj.cell_degree_probability() * marginal[nj.rows] * marginal[nj.cols])
    return math.fsum(p4 * np.log2(ratio))


@dataclass
class MeasureReport:
    alpha: float
    shannon_H: float
    degree_mi: float
    joint_mi: float
    attribute_conditional_mi: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "shannon_H": self.shannon_H,
            "degree_mi": self.degree_mi,
            "joint_mi": self.joint_mi,
            "delta_i": self.attribute_conditional_mi,
        }


def measure_jdam(nj: NormalizedJdam, alpha: float = DEFAULT_ALPHA) -> MeasureReport:
    alpha = validate_order(alpha)
    degree_mi = _jdam_degree_mutual_information(nj, alpha)
    joint_mi = joint_mutual_information(nj, alpha)
    return MeasureReport(
        alpha=alpha,
        shannon_H=shannon_entropy(nj.remaining_degree.q),
        degree_mi=degree_mi,
        joint_mi=joint_mi,
        attribute_conditional_mi=joint_mi - degree_mi,
    )


def measure_graph(
    graph: AttributedMultigraph, alpha: float = DEFAULT_ALPHA, kmax_cutoff: Optional[int] = None
) -> MeasureReport:
    """Build the JDAM once and fill every measure from it."""
    report = measure_jdam(normalize_jdam(build_jdam(graph, kmax_cutoff)), alpha)
    logger.debug(f"Measured {graph}: {report}")
    return report
