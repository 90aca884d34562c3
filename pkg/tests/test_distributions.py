import numpy as np
import pytest
from hypothesis import given, settings

from glassceiling.attributed_graph import AttributedMultigraph
from glassceiling.distributions import (
    DegreeDistribution,
    Jdam,
    JdamCounter,
    NormalizedJdam,
    attribute_distributions,
    build_jdam,
    degree_distribution,
    half_edge_remaining_degrees,
    joint_remaining_degree,
    normalize_jdam,
    remaining_degree_distribution,
)
from glassceiling.exceptions import DegenerateDistribution, EmptyGraph, EmptyJdam
from tests.strategies import attributed_multigraphs, graphs_with_permutation

PLUS, MINUS = 0, 1


def group(k, attr_index):
    return 2 * k + attr_index


def test_degree_distribution_examples(path3, triangle, star4):
    assert degree_distribution(path3).p[1:] == pytest.approx([2 / 3, 1 / 3])
    assert degree_distribution(triangle).p[2] == 1.0
    p = degree_distribution(star4).p
    assert p[1] == pytest.approx(0.8)
    assert p[4] == pytest.approx(0.2)


def test_degree_distribution_excludes_isolated_nodes(path3):
    path3.add_node(1)
    assert degree_distribution(path3).p.sum() == pytest.approx(1.0, abs=1e-12)
    assert degree_distribution(path3).p[1] == pytest.approx(2 / 3)


def test_remaining_degree_examples(path3, triangle, star4):
    assert remaining_degree_distribution(degree_distribution(path3)).q == pytest.approx([0.5, 0.5])
    assert remaining_degree_distribution(degree_distribution(triangle)).q == pytest.approx([0.0, 1.0])
    assert remaining_degree_distribution(degree_distribution(star4)).q == pytest.approx([0.5, 0, 0, 0.5])


def test_empty_graph_errors():
    graph = AttributedMultigraph.from_edges([1, -1], [])
    for fn in (degree_distribution, joint_remaining_degree, build_jdam, attribute_distributions):
        with pytest.raises(EmptyGraph):
            fn(graph)


def test_zero_mean_degree_is_degenerate():
    with pytest.raises(DegenerateDistribution):
        remaining_degree_distribution(DegreeDistribution(p=np.array([1.0])))


def test_joint_remaining_degree_examples(path3, triangle):
    e = joint_remaining_degree(path3).dense()
    assert e[0, 1] == e[1, 0] == 0.5
    assert e[0, 0] == e[1, 1] == 0.0
    assert joint_remaining_degree(triangle).dense()[1, 1] == 1.0


def test_build_jdam_examples(single_edge, triangle, path3):
    jdam = build_jdam(single_edge)
    assert jdam.get(group(0, PLUS), group(0, MINUS)) == 1
    assert jdam.get(group(0, MINUS), group(0, PLUS)) == 1
    assert jdam.total == 2

    assert build_jdam(triangle).get(group(1, PLUS), group(1, PLUS)) == 6

    jdam = build_jdam(path3)
    assert jdam.get(group(0, MINUS), group(1, PLUS)) == 2
    assert jdam.get(group(1, PLUS), group(0, MINUS)) == 2
    assert jdam.total == 4


def test_normalize_jdam_examples(triangle, path3):
    assert list(normalize_jdam(build_jdam(triangle)).p4) == [1.0]
    nj = normalize_jdam(build_jdam(path3))
    assert list(nj.p4) == [0.5, 0.5]
    assert nj.remaining_degree.q == pytest.approx([0.5, 0.5])


def test_attribute_distributions_examples(triangle, single_edge, path3):
    m = attribute_distributions(triangle)
    assert m.m(1) == 1.0 and m.m(1, 1) == 1.0
    m = attribute_distributions(single_edge)
    assert m.m(1) == m.m(-1) == 0.5
    assert m.m(1, -1) == m.m(-1, 1) == 0.5
    assert attribute_distributions(path3).m(1) == 0.5


def test_jdam_frame_labels(path3):
    frame = build_jdam(path3).to_frame()
    assert list(frame.columns) == ["0:+1", "0:-1", "1:+1", "1:-1"]
    assert frame.loc["0:-1", "1:+1"] == 2
    assert build_jdam(path3).to_frame(normalized=True).to_numpy().sum() == pytest.approx(1.0)


def test_jdam_from_counts_validates():
    with pytest.raises(ValueError):
        Jdam.from_counts(np.array([[0, 1], [2, 0]]))
    with pytest.raises(ValueError):
        Jdam.from_counts(np.array([[1]]))
    with pytest.raises(EmptyJdam):
        normalize_jdam(Jdam.from_counts(np.zeros((2, 2), dtype=int)))


def test_kmax_cutoff_clamps_degrees(star4):
    jdam = build_jdam(star4, kmax_cutoff=2)
    assert jdam.k_max == 2
    assert jdam.total == 8


def test_sparse_storage_above_dense_limit():
    n = 600
    graph = AttributedMultigraph.from_edges([1] + [-1] * n, [(0, v) for v in range(1, n + 1)])
    jdam = build_jdam(graph)
    assert jdam.is_sparse
    nj = normalize_jdam(jdam)
    assert nj.joint_remaining.marginal() == pytest.approx(nj.remaining_degree.q, abs=1e-12)


@settings(max_examples=1000)
@given(attributed_multigraphs())
def test_sum_rules_and_marginal_identities(graph):
    jdam = build_jdam(graph)
    counts = np.asarray(jdam.counts)
    assert jdam.total == 2 * graph.n_edges
    assert np.array_equal(counts, counts.T)

    nj = normalize_jdam(jdam)
    q = nj.remaining_degree.q
    assert nj.p4.sum() == pytest.approx(1.0, abs=1e-12)
    assert nj.joint_remaining.marginal() == pytest.approx(q, abs=1e-12)
    assert nj.group_marginal[0::2] + nj.group_marginal[1::2] == pytest.approx(q, abs=1e-12)
    assert nj.joint_remaining.dense() == pytest.approx(joint_remaining_degree(graph).dense(), abs=1e-12)
    assert q == pytest.approx(remaining_degree_distribution(degree_distribution(graph)).q, abs=1e-12)


@given(attributed_multigraphs())
def test_remaining_degree_matches_half_edge_enumeration(graph):
    ks = half_edge_remaining_degrees(graph)
    empirical = np.bincount(ks, minlength=int(graph.degrees().max())) / len(ks)
    assert remaining_degree_distribution(degree_distribution(graph)).q == pytest.approx(empirical, abs=1e-12)


@given(graphs_with_permutation())
def test_distributions_are_label_invariant(case):
    graph, permutation = case
    relabeled = graph.relabeled(permutation)
    a, b = normalize_jdam(build_jdam(graph)), normalize_jdam(build_jdam(relabeled))
    assert np.array_equal(a.rows, b.rows) and np.array_equal(a.cols, b.cols)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(attribute_distributions(graph).joint_counts, attribute_distributions(relabeled).joint_counts)
    assert np.array_equal(degree_distribution(graph).p, degree_distribution(relabeled).p)


@settings(max_examples=300)
@given(attributed_multigraphs(max_nodes=6))
def test_edge_move_delta_matches_rebuild(graph):
    u, v = 0, 1
    counter = JdamCounter.from_graph(graph)
    counter.apply(JdamCounter.edge_move_delta(graph, u, v))
    grown = graph.copy()
    grown.add_edge(u, v)
    expected = JdamCounter.from_graph(grown)
    assert counter.cells == expected.cells


def test_counter_reverts_exactly(two_stars):
    counter = JdamCounter.from_graph(two_stars)
    before = dict(counter.cells)
    delta = JdamCounter.edge_move_delta(two_stars, 1, 4)
    counter.apply(delta)
    counter.apply(delta, sign=-1)
    assert counter.cells == before


def test_normalized_from_cells_matches_normalize(two_stars):
    counter = JdamCounter.from_graph(two_stars)
    direct = normalize_jdam(build_jdam(two_stars))
    rebuilt = NormalizedJdam.from_cells(counter.cells)
    assert np.array_equal(direct.p4, rebuilt.p4)
    assert np.array_equal(direct.remaining_degree.q, rebuilt.remaining_degree.q)
