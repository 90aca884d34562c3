import logging
from typing import Mapping, Optional, Sequence

from glassceiling.assortativity import assortativity_report
from glassceiling.attributed_graph import AttributedMultigraph, parse_attribute
from glassceiling.config import DEFAULT_ALPHA
from glassceiling.distributions import build_jdam
from glassceiling.exceptions import MissingAttribute, ParseError
from glassceiling.info_measures import measure_graph

logger = logging.getLogger(__name__)


def graph_from_payload(edges: Sequence[Sequence], attributes: Mapping[str, str]) -> AttributedMultigraph:
    """Build a graph from ``[[u, v, w?], ...]`` and ``{node: attr}`` with external node labels."""
    if not isinstance(edges, (list, tuple)) or not isinstance(attributes, Mapping):
        raise ParseError("'edges' must be a list and 'attributes' an object")
    try:
        labels = {str(label): parse_attribute(value) for label, value in attributes.items()}
    except ValueError as e:
        raise ParseError(str(e)) from e
    graph = AttributedMultigraph()
    ids = {}

    def node(label) -> int:
        label = str(label)
        if label not in labels:
            raise MissingAttribute(f"node {label} has no attribute")
        if label not in ids:
            ids[label] = graph.add_node(labels[label], label=label)
        return ids[label]

    for position, edge in enumerate(edges):
        if not isinstance(edge, (list, tuple)) or len(edge) not in (2, 3):
            raise ParseError(f"edge {position} must be [u, v] or [u, v, w]")
        weight = edge[2] if len(edge) == 3 else 1
        if not isinstance(weight, int) or weight < 1:
            raise ParseError(f"edge {position} needs a positive integer multiplicity, got {weight!r}")
        graph.add_edge(node(edge[0]), node(edge[1]), weight)
    for label, attr in labels.items():
        if label not in ids:
            ids[label] = graph.add_node(attr, label=label)
    return graph


class MeasurementOrchestrator:
    """Produces the flat ``measure`` record shared by the CLI and the HTTP service."""

    def __init__(self, alpha: float = DEFAULT_ALPHA, kmax_cutoff: Optional[int] = None):
        self.alpha = alpha
        self.kmax_cutoff = kmax_cutoff

    def measure(self, graph: AttributedMultigraph) -> dict:
        report = measure_graph(graph, self.alpha, self.kmax_cutoff)
        record = report.to_dict()
        record.update(assortativity_report(graph, self.kmax_cutoff).to_dict())
        logger.info(f"Measured {graph.n_nodes} nodes / {graph.n_edges} edges: delta_i={record['delta_i']:.6g}")
        return record

    def jdam(self, graph: AttributedMultigraph, normalized: bool = False) -> dict:
        frame = build_jdam(graph, self.kmax_cutoff).to_frame(normalized)
        return {"labels": list(frame.index), "matrix": frame.to_numpy().tolist()}

    def _for_payload(self, payload: Mapping) -> "MeasurementOrchestrator":
        alpha = payload.get("alpha", self.alpha)
        cutoff = payload.get("kmax_cutoff", self.kmax_cutoff)
        if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
            raise ParseError(f"'alpha' must be a number, got {alpha!r}")
        if cutoff is not None and (isinstance(cutoff, bool) or not isinstance(cutoff, int)):
            raise ParseError(f"'kmax_cutoff' must be an integer or null, got {cutoff!r}")
        return MeasurementOrchestrator(float(alpha), cutoff)

    def measure_payload(self, payload: Mapping) -> dict:
        graph = graph_from_payload(payload.get("edges", []), payload.get("attributes", {}))
        return self._for_payload(payload).measure(graph)

    def jdam_payload(self, payload: Mapping) -> dict:
        graph = graph_from_payload(payload.get("edges", []), payload.get("attributes", {}))
        return self._for_payload(payload).jdam(graph, bool(payload.get("normalized", False)))
