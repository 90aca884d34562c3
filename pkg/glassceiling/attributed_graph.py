"""Labeled undirected multigraphs with a binary attribute per node."""
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from glassceiling.exceptions import MissingAttribute, ParseError, SelfLoopRejected, UnknownNode

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


class Attribute(IntEnum):
    PLUS = 1
    MINUS = -1

    @property
    def index(self) -> int:
        """Column of this attribute in group-indexed matrices: +1 -> 0, -1 -> 1."""
        return 0 if self is Attribute.PLUS else 1

    @property
    def label(self) -> str:
        return "+1" if self is Attribute.PLUS else "-1"

    def swapped(self) -> "Attribute":
        return Attribute.MINUS if self is Attribute.PLUS else Attribute.PLUS


_ATTRIBUTE_TOKENS = {
    "+1": Attribute.PLUS,
    "1": Attribute.PLUS,
    "m": Attribute.PLUS,
    "-1": Attribute.MINUS,
    "f": Attribute.MINUS,
}


def parse_attribute(token) -> Attribute:
    if isinstance(token, Attribute):
        return token
    if isinstance(token, (int, np.integer)) and int(token) in (1, -1):
        return Attribute(int(token))
    key = str(token).strip().lower()
    if key not in _ATTRIBUTE_TOKENS:
        raise ValueError(f"unknown attribute {token!r}; expected one of +1, -1, m, f")
    return _ATTRIBUTE_TOKENS[key]


def _pair(u: int, v: int) -> Tuple[int, int]:
    return (u, v) if u < v else (v, u)


class AttributedMultigraph:
    """Undirected multigraph G=(V, E, w, C) with dense integer node ids.

    Edges are stored once per unordered pair with a positive multiplicity.
    Self-loops are rejected.
    """

    def __init__(self):
        self._attributes: List[Attribute] = []
        self._labels: List[str] = []
        self._degrees: List[int] = []
        self._adjacency: List[Dict[int, int]] = []
        self._edges: Dict[Tuple[int, int], int] = {}
        self._total_multiplicity = 0

    @classmethod
    def from_edges(cls, attributes: Sequence, edges: Sequence[Sequence[int]]) -> "AttributedMultigraph":
        """Build a graph from an attribute list and ``(u, v)`` or ``(u, v, w)`` tuples."""
        graph = cls()
        for attr in attributes:
            graph.add_node(parse_attribute(attr))
        for edge in edges:
            u, v = int(edge[0]), int(edge[1])
            weight = int(edge[2]) if len(edge) > 2 else 1
            graph.add_edge(u, v, weight)
        return graph

    # -- mutation -----------------------------------------------------------

    def add_node(self, attr, label: Optional[str] = None) -> int:
        node = len(self._attributes)
        self._attributes.append(parse_attribute(attr))
        self._labels.append(str(node) if label is None else label)
        self._degrees.append(0)
        self._adjacency.append({})
        return node

    def add_edge(self, u: int, v: int, weight: int = 1) -> int:
        """Add ``weight`` parallel edges between ``u`` and ``v``; return the new multiplicity."""
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise SelfLoopRejected(f"self-loop on node {u} rejected")
        if weight < 1:
            raise ValueError(f"edge multiplicity must be positive, got {weight}")
        key = _pair(u, v)
        multiplicity = self._edges.get(key, 0) + weight
        self._edges[key] = multiplicity
        self._adjacency[u][v] = multiplicity
        self._adjacency[v][u] = multiplicity
        self._degrees[u] += weight
        self._degrees[v] += weight
        self._total_multiplicity += weight
        return multiplicity

    # -- queries ------------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self._attributes)

    @property
    def n_edges(self) -> int:
        """Total multiplicity M, i.e. the number of edges counted with multiplicity."""
        return self._total_multiplicity

    def degree(self, v: int) -> int:
        self._check_node(v)
        return self._degrees[v]

    def attribute(self, v: int) -> Attribute:
        self._check_node(v)
        return self._attributes[v]

    def label(self, v: int) -> str:
        self._check_node(v)
        return self._labels[v]

    def multiplicity(self, u: int, v: int) -> int:
        return self._edges.get(_pair(u, v), 0)

    def neighbors(self, v: int) -> Dict[int, int]:
        """Neighbor -> multiplicity map of ``v`` (read-only view by convention)."""
        self._check_node(v)
        return self._adjacency[v]

    def edges(self) -> Iterator[Tuple[int, int, int]]:
        """Yield ``(u, v, w)`` with ``u < v`` in insertion order."""
        for (u, v), w in self._edges.items():
            yield u, v, w

    def degrees(self) -> np.ndarray:
        return np.asarray(self._degrees, dtype=np.int64)

    def attributes(self) -> np.ndarray:
        return np.asarray([int(a) for a in self._attributes], dtype=np.int64)

    def attribute_indices(self) -> np.ndarray:
        """0 for +1 nodes and 1 for -1 nodes."""
        return (self.attributes() == -1).astype(np.int64)

    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self._edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy(), empty.copy()
        data = np.fromiter(
            (x for (u, v), w in self._edges.items() for x in (u, v, w)),
            dtype=np.int64,
            count=3 * len(self._edges),
        ).reshape(-1, 3)
        return data[:, 0], data[:, 1], data[:, 2]

    # -- derived graphs -----------------------------------------------------

    def copy(self) -> "AttributedMultigraph":
        other = AttributedMultigraph()
        other._attributes = list(self._attributes)
        other._labels = list(self._labels)
        other._degrees = list(self._degrees)
        other._adjacency = [dict(nbrs) for nbrs in self._adjacency]
        other._edges = dict(self._edges)
        other._total_multiplicity = self._total_multiplicity
        return other

    def relabeled(self, permutation: Sequence[int]) -> "AttributedMultigraph":
        """Return a copy where node ``v`` becomes ``permutation[v]``."""
        permutation = [int(p) for p in permutation]
        if sorted(permutation) != list(range(self.n_nodes)):
            raise ValueError("relabeling must be a permutation of the node ids")
        inverse = [0] * self.n_nodes
        for old, new in enumerate(permutation):
            inverse[new] = old
        other = AttributedMultigraph()
        for new in range(self.n_nodes):
            old = inverse[new]
            other.add_node(self._attributes[old], self._labels[old])
        for u, v, w in self.edges():
            other.add_edge(permutation[u], permutation[v], w)
        return other

    def with_swapped_attributes(self) -> "AttributedMultigraph":
        other = self.copy()
        other._attributes = [a.swapped() for a in self._attributes]
        return other

    def to_networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        for v, attr in enumerate(self._attributes):
            graph.add_node(v, attribute=int(attr))
        for u, v, w in self.edges():
            for _ in range(w):
                graph.add_edge(u, v)
        return graph

    def fingerprint(self) -> str:
        """Content hash of attributes and multiplicities, independent of insertion order."""
        digest = hashlib.sha256()
        digest.update(",".join(str(int(a)) for a in self._attributes).encode())
        for (u, v), w in sorted(self._edges.items()):
            digest.update(f";{u}-{v}:{w}".encode())
        return digest.hexdigest()

    def _check_node(self, v: int):
        if not 0 <= v < len(self._attributes):
            raise UnknownNode(f"node {v} does not exist (graph has {len(self._attributes)} nodes)")

    def __repr__(self) -> str:
        return f"AttributedMultigraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


@dataclass
class GraphSnapshot:
    tag: str
    graph: AttributedMultigraph

    def __post_init__(self):
        if not self.tag:
            raise ValueError("snapshot tag must not be empty")


# -- file formats -------------------------------------------------------------

def _content_lines(path: PathLike) -> Iterator[Tuple[int, List[str]]]:
    # Decoded line by line so a bad byte is reported at its own line.
    with open(path, "rb") as handle:
        for number, raw in enumerate(handle, start=1):
            try:
                line = raw.decode("utf-8").strip()
            except UnicodeDecodeError as e:
                raise ParseError(f"invalid UTF-8 ({e.reason})", str(path), number) from e
            if not line or line.startswith("#"):
                continue
            yield number, line.split()


def _read_attributes(path: PathLike) -> Dict[str, Attribute]:
    attributes: Dict[str, Attribute] = {}
    for number, fields in _content_lines(path):
        if len(fields) != 2:
            raise ParseError(f"expected 'node attr', got {len(fields)} fields", str(path), number)
        node, token = fields
        try:
            attr = parse_attribute(token)
        except ValueError as e:
            raise ParseError(str(e), str(path), number) from e
        if node in attributes and attributes[node] != attr:
            raise ParseError(f"conflicting attributes for node {node}", str(path), number)
        attributes[node] = attr
    return attributes


def _dense_order(labels: Sequence[str]) -> List[str]:
    # Integer labels keep their numeric order so files already using 0..n-1 round-trip.
    try:
        numeric = [int(label) for label in labels]
    except ValueError:
        return list(labels)
    if any(value < 0 for value in numeric):
        return list(labels)
    return [label for _, label in sorted(zip(numeric, labels))]


def load_graph(edge_file: PathLike, attribute_file: PathLike) -> AttributedMultigraph:
    """Read an edge list and an attribute list into a graph.

    Direction in the edge list is ignored; repeated lines accumulate multiplicity.
    """
    attributes = _read_attributes(attribute_file)
    graph = AttributedMultigraph()
    dense: Dict[str, int] = {}
    for label in _dense_order(list(attributes)):
        dense[label] = graph.add_node(attributes[label], label)

    for number, fields in _content_lines(edge_file):
        if len(fields) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {len(fields)} fields", str(edge_file), number)
        weight = 1
        if len(fields) == 3:
            try:
                weight = int(fields[2])
            except ValueError as e:
                raise ParseError(f"multiplicity {fields[2]!r} is not an integer", str(edge_file), number) from e
            if weight < 1:
                raise ParseError(f"multiplicity must be >= 1, got {weight}", str(edge_file), number)
        u_label, v_label = fields[0], fields[1]
        for label in (u_label, v_label):
            if label not in dense:
                raise MissingAttribute(f"{edge_file}:{number}: node {label} has no attribute row")
        if u_label == v_label:
            raise SelfLoopRejected(f"{edge_file}:{number}: self-loop on node {u_label}")
        graph.add_edge(dense[u_label], dense[v_label], weight)

    logger.debug(f"Loaded {graph} from {edge_file}")
    return graph


def save_graph(graph: AttributedMultigraph, edge_file: PathLike, attribute_file: PathLike) -> Path:
    """Write the graph in the edge/attribute formats plus an ``ids.json`` sidecar.

    Returns the sidecar path. Node ids in the files are the dense ids.
    """
    edge_file, attribute_file = Path(edge_file), Path(attribute_file)
    edge_file.parent.mkdir(parents=True, exist_ok=True)
    attribute_file.parent.mkdir(parents=True, exist_ok=True)
    with open(edge_file, "w", encoding="utf-8") as handle:
        for u, v, w in sorted(graph.edges()):
            handle.write(f"{u} {v} {w}\n")
    with open(attribute_file, "w", encoding="utf-8") as handle:
        for v in range(graph.n_nodes):
            handle.write(f"{v} {graph.attribute(v).label}\n")
    sidecar = attribute_file.with_suffix(".ids.json")
    with open(sidecar, "w", encoding="utf-8") as handle:
        json.dump({str(v): graph.label(v) for v in range(graph.n_nodes)}, handle, indent=2, sort_keys=True)
    return sidecar


def load_snapshot_series(directory: PathLike) -> List[GraphSnapshot]:
    """Load every ``<tag>.edges`` / ``<tag>.attrs`` pair, sorted by tag."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError("snapshot directory does not exist", str(directory))
    tags = sorted(path.stem for path in directory.glob("*.edges"))
    snapshots = []
    for tag in tags:
        attrs = directory / f"{tag}.attrs"
        if not attrs.is_file():
            raise ParseError(f"snapshot {tag!r} has no attribute file", str(attrs))
        try:
            graph = load_graph(directory / f"{tag}.edges", attrs)
        except ParseError as e:
            raise ParseError(f"snapshot {tag!r}: {e}") from e
        snapshots.append(GraphSnapshot(tag=tag, graph=graph))
    logger.info(f"Loaded {len(snapshots)} snapshots from {directory}")
    return snapshots


def save_snapshot(snapshot: GraphSnapshot, directory: PathLike) -> None:
    directory = Path(directory)
    save_graph(snapshot.graph, directory / f"{snapshot.tag}.edges", directory / f"{snapshot.tag}.attrs")
