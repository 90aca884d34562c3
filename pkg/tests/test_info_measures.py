import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glassceiling.attributed_graph import AttributedMultigraph
from glassceiling.distributions import (
    Jdam,
    JointRemainingDegreeDistribution,
    RemainingDegreeDistribution,
    build_jdam,
    normalize_jdam,
)
from glassceiling.exceptions import InvalidOrder, NotNormalized, SumRuleViolation
from glassceiling.info_measures import (
    attribute_conditional_mi,
    conditional_entropy,
    degree_mutual_information,
    joint_mutual_information,
    measure_graph,
    renyi_entropy,
    shannon_attribute_mi_direct,
    shannon_entropy,
)
from tests.strategies import attributed_multigraphs, graphs_with_permutation, product_counts

ORDERS = [0.5, 1.0, 1.3, 2.0]


def brute_force_delta_i(graph: AttributedMultigraph, alpha: float) -> float:
    """I_alpha by explicit enumeration of ordered edge ends, without the JDAM machinery."""
    degrees = graph.degrees()
    cells = defaultdict(int)
    for u, v, w in graph.edges():
        a, b = int(graph.attribute(u)), int(graph.attribute(v))
        cells[(degrees[u] - 1, a, degrees[v] - 1, b)] += w
        cells[(degrees[v] - 1, b, degrees[u] - 1, a)] += w
    total = sum(cells.values())
    p4 = {key: count / total for key, count in cells.items()}
    group, e, q = defaultdict(float), defaultdict(float), defaultdict(float)
    for (k, c, k2, c2), p in p4.items():
        group[(k, c)] += p
        e[(k, k2)] += p
        q[k] += p
    if alpha == 1.0:
        joint = sum(p * math.log2(p / (group[(k, c)] * group[(k2, c2)])) for (k, c, k2, c2), p in p4.items())
        degree = sum(p * math.log2(p / (q[k] * q[k2])) for (k, k2), p in e.items())
        return joint - degree
    joint = math.log2(sum(x ** alpha for x in group.values()) ** 2 / sum(p ** alpha for p in p4.values()))
    degree = math.log2(sum(x ** alpha for x in q.values()) ** 2 / sum(p ** alpha for p in e.values()))
    return (joint - degree) / (1 - alpha)


def nj_of(graph):
    return normalize_jdam(build_jdam(graph))


def with_constant_attributes(graph):
    return AttributedMultigraph.from_edges([1] * graph.n_nodes, list(graph.edges()))


def product_degree_distributions(counts):
    counts = np.asarray(counts, dtype=float)
    q = counts / counts.sum()
    return JointRemainingDegreeDistribution(e=np.outer(q, q)), RemainingDegreeDistribution(q=q)


# -- entropies -------------------------------------------------------------------

def test_shannon_entropy_examples():
    assert shannon_entropy([0.25] * 4) == pytest.approx(2.0)
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0)


def test_entropy_rejects_unnormalized():
    with pytest.raises(NotNormalized):
        shannon_entropy([0.5, 0.6])
    with pytest.raises(NotNormalized):
        renyi_entropy([1.2, -0.2], 2.0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.3, 2.0, 4.0])
def test_renyi_entropy_of_uniform_is_log_n(alpha):
    assert renyi_entropy([0.25] * 4, alpha) == pytest.approx(2.0, abs=1e-12)


def test_renyi_entropy_examples():
    assert renyi_entropy([1.0, 0.0], 2.0) == 0.0
    assert abs(renyi_entropy([0.5, 0.5], 1.001) - shannon_entropy([0.5, 0.5])) < 1e-3
    assert renyi_entropy([0.2, 0.8], 1.0) == shannon_entropy([0.2, 0.8])


@pytest.mark.parametrize("alpha", [0.0, -1.0, float("nan"), float("inf")])
def test_invalid_orders_refused(alpha):
    with pytest.raises(InvalidOrder):
        renyi_entropy([0.5, 0.5], alpha)


# -- degree mutual information ---------------------------------------------------

@pytest.mark.parametrize("alpha", ORDERS)
def test_degree_mi_of_product_is_zero(alpha):
    e, q = product_degree_distributions([1, 3, 2])
    assert degree_mutual_information(e, q, alpha) == pytest.approx(0.0, abs=1e-12)


def test_degree_mi_examples(path3, triangle):
    nj = nj_of(path3)
    assert degree_mutual_information(nj.joint_remaining, nj.remaining_degree, 1.0) == pytest.approx(1.0)
    nj = nj_of(triangle)
    for alpha in ORDERS:
        assert degree_mutual_information(nj.joint_remaining, nj.remaining_degree, alpha) == 0.0


def test_sum_rule_violation():
    e = JointRemainingDegreeDistribution(e=np.array([[0.5, 0.0], [0.0, 0.5]]))
    q = RemainingDegreeDistribution(q=np.array([0.9, 0.1]))
    with pytest.raises(SumRuleViolation):
        degree_mutual_information(e, q)
    with pytest.raises(SumRuleViolation):
        conditional_entropy(e, q)


def test_conditional_entropy_examples(path3, triangle):
    nj = nj_of(path3)
    assert conditional_entropy(nj.joint_remaining, nj.remaining_degree, 1.0) == pytest.approx(0.0, abs=1e-12)
    e, q = product_degree_distributions([1, 3, 2])
    assert conditional_entropy(e, q, 1.0) == pytest.approx(shannon_entropy(q.q), abs=1e-12)
    nj = nj_of(triangle)
    assert conditional_entropy(nj.joint_remaining, nj.remaining_degree, 1.3) == 0.0


@given(attributed_multigraphs(), st.sampled_from(ORDERS))
def test_entropy_minus_equivocation_is_mutual_information(graph, alpha):
    nj = nj_of(graph)
    e, q = nj.joint_remaining, nj.remaining_degree
    h = renyi_entropy(q.q, alpha)
    assert h - conditional_entropy(e, q, alpha) == pytest.approx(degree_mutual_information(e, q, alpha), abs=1e-9)


@settings(max_examples=300)
@given(product_counts(), st.sampled_from(ORDERS))
def test_degree_mi_vanishes_on_product_distributions(counts, alpha):
    e, q = product_degree_distributions(counts[0])
    assert degree_mutual_information(e, q, alpha) == pytest.approx(0.0, abs=1e-9)


# -- joint and attribute-conditional information ---------------------------------

def test_joint_mi_examples(path3, triangle, two_stars):
    assert joint_mutual_information(nj_of(path3), 1.0) == pytest.approx(1.0)
    nj = nj_of(with_constant_attributes(two_stars))
    for alpha in ORDERS:
        expected = degree_mutual_information(nj.joint_remaining, nj.remaining_degree, alpha)
        assert joint_mutual_information(nj, alpha) == pytest.approx(expected, abs=1e-12)


def independent_jdam(degree_counts, attribute_counts):
    """Counts E[k, k'] * m(c) * m(c') with E = n n^T, so attributes are independent of everything."""
    n = np.asarray(degree_counts, dtype=np.int64)
    m = np.asarray(attribute_counts, dtype=np.int64)
    e = np.outer(n, n)
    size = len(n)
    counts = np.zeros((2 * size, 2 * size), dtype=np.int64)
    for k in range(size):
        for k2 in range(size):
            for a in range(2):
                for b in range(2):
                    counts[2 * k + a, 2 * k2 + b] = e[k, k2] * m[a] * m[b]
    return normalize_jdam(Jdam.from_counts(counts))


@pytest.mark.parametrize("alpha", ORDERS)
def test_joint_mi_of_product_matrix_is_zero(alpha):
    nj = independent_jdam([2, 1, 3], [1, 1])
    assert joint_mutual_information(nj, alpha) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=300)
@given(product_counts(), st.sampled_from(ORDERS))
def test_attribute_independent_jdam_has_no_attribute_information(counts, alpha):
    degree_counts, attribute_counts = counts
    nj = independent_jdam(degree_counts, attribute_counts)
    assert attribute_conditional_mi(nj, alpha) == pytest.approx(0.0, abs=1e-9)


def test_constant_attributes_give_exact_zero(triangle, star4):
    for graph in (triangle, with_constant_attributes(star4)):
        for alpha in ORDERS:
            assert attribute_conditional_mi(nj_of(graph), alpha) == 0.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.3, 2.0, 3.0])
def test_two_stars_matches_brute_force_oracle(two_stars, alpha):
    assert attribute_conditional_mi(nj_of(two_stars), alpha) == pytest.approx(
        brute_force_delta_i(two_stars, alpha), abs=1e-9
    )


@settings(max_examples=200)
@given(attributed_multigraphs(), st.sampled_from([0.5, 1.0, 1.3, 2.0]))
def test_matches_brute_force_oracle_on_random_graphs(graph, alpha):
    assert attribute_conditional_mi(nj_of(graph), alpha) == pytest.approx(brute_force_delta_i(graph, alpha), abs=1e-9)


@settings(max_examples=1000)
@given(attributed_multigraphs())
def test_shannon_direct_sum_matches_difference(graph):
    nj = nj_of(graph)
    assert shannon_attribute_mi_direct(nj) == pytest.approx(attribute_conditional_mi(nj, 1.0), abs=1e-9)


@given(attributed_multigraphs())
def test_shannon_informations_are_non_negative(graph):
    report = measure_graph(graph, 1.0)
    assert report.degree_mi >= -1e-12
    assert report.joint_mi >= -1e-12
    assert report.attribute_conditional_mi >= -1e-9


@given(attributed_multigraphs())
def test_renyi_to_shannon_continuity(graph):
    nj = nj_of(graph)
    shannon = attribute_conditional_mi(nj, 1.0)
    for alpha in (1.0 - 1e-4, 1.0 + 1e-4):
        assert abs(attribute_conditional_mi(nj, alpha) - shannon) < 1e-2
        e, q = nj.joint_remaining, nj.remaining_degree
        assert abs(degree_mutual_information(e, q, alpha) - degree_mutual_information(e, q, 1.0)) < 1e-2


@given(graphs_with_permutation(), st.sampled_from(ORDERS))
def test_measures_invariant_under_relabeling_and_label_swap(case, alpha):
    graph, permutation = case
    expected = measure_graph(graph, alpha)
    assert measure_graph(graph.relabeled(permutation), alpha) == expected
    assert measure_graph(graph.with_swapped_attributes(), alpha) == expected


@given(attributed_multigraphs(), st.sampled_from(ORDERS))
def test_doubling_multiplicities_changes_nothing(graph, alpha):
    doubled = AttributedMultigraph.from_edges(
        [int(a) for a in graph.attributes()], [(u, v, 2 * w) for u, v, w in graph.edges()]
    )
    assert measure_graph(doubled, alpha).to_dict() == pytest.approx(measure_graph(graph, alpha).to_dict(), abs=1e-12)


# -- report ----------------------------------------------------------------------

def test_measure_graph_examples(triangle, path3):
    report = measure_graph(triangle, 1.3)
    assert (report.degree_mi, report.joint_mi, report.attribute_conditional_mi) == (0.0, 0.0, 0.0)
    report = measure_graph(path3, 1.0)
    assert report.degree_mi == pytest.approx(1.0)
    assert report.shannon_H == pytest.approx(1.0)


@given(attributed_multigraphs(), st.sampled_from(ORDERS))
def test_report_is_internally_consistent(graph, alpha):
    report = measure_graph(graph, alpha)
    assert report.attribute_conditional_mi == pytest.approx(report.joint_mi - report.degree_mi, abs=1e-9)


def test_report_json_keys(path3):
    assert set(measure_graph(path3).to_dict()) == {"alpha", "shannon_H", "degree_mi", "joint_mi", "delta_i"}
    assert measure_graph(path3).alpha == 1.3


@pytest.mark.parametrize("fixture", ["two_stars", "star4", "path3"])
def test_continuity_at_one_thousandth(fixture, request):
    nj = nj_of(request.getfixturevalue(fixture))
    shannon = attribute_conditional_mi(nj, 1.0)
    for alpha in (0.999, 1.001):
        assert abs(attribute_conditional_mi(nj, alpha) - shannon) < 1e-2
