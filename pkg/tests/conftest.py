import pytest
from hypothesis import settings

from glassceiling.attributed_graph import AttributedMultigraph

settings.register_profile("glassceiling", deadline=None)
settings.load_profile("glassceiling")


@pytest.fixture
def single_edge():
    """One edge between a +1 node and a -1 node."""
    return AttributedMultigraph.from_edges([1, -1], [(0, 1)])


@pytest.fixture
def path3():
    """P_3 with both ends -1 and the middle node +1."""
    return AttributedMultigraph.from_edges([-1, 1, -1], [(0, 1), (1, 2)])


@pytest.fixture
def triangle():
    return AttributedMultigraph.from_edges([1, 1, 1], [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def star4():
    """Hub 0 with four leaves of mixed attributes."""
    return AttributedMultigraph.from_edges([1, 1, -1, 1, -1], [(0, 1), (0, 2), (0, 3), (0, 4)])


@pytest.fixture
def two_stars():
    """Two attribute-pure 2-leaf stars whose hubs are joined."""
    return AttributedMultigraph.from_edges(
        [1, 1, 1, -1, -1, -1],
        [(0, 1), (0, 2), (3, 4), (3, 5), (0, 3)],
    )


@pytest.fixture
def segregated():
    """Two disjoint edges, one per attribute: every edge is same-type."""
    return AttributedMultigraph.from_edges([1, 1, -1, -1], [(0, 1), (2, 3)])


@pytest.fixture
def write_graph_files(tmp_path):
    def write(edges: str, attrs: str, stem: str = "g"):
        edge_file = tmp_path / f"{stem}.edges"
        attr_file = tmp_path / f"{stem}.attrs"
        edge_file.write_text(edges, encoding="utf-8")
        attr_file.write_text(attrs, encoding="utf-8")
        return edge_file, attr_file

    return write
