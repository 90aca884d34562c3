"""Seed-reproducible synthetic networks: a two-block SBM and the condensed
directed mixed preferential attachment (DMPA) growth model.

Randomness comes from ``numpy.random.Generator`` (PCG64) seeded through
``SeedSequence``; networkx receives integer seeds derived the same way.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import networkx as nx
import numpy as np

from glassceiling.attributed_graph import Attribute, AttributedMultigraph, GraphSnapshot
from glassceiling.config import DmpaConfig, RejectionRule, SbmConfig
from glassceiling.exceptions import ConnectivityRetriesExhausted, GenerationStalled, InvalidConfig

logger = logging.getLogger(__name__)

CONNECTIVITY_RETRIES = 1000
# Rejected proposals allowed per target edge before DMPA growth gives up.
MAX_REJECTIONS_PER_EDGE = 10_000
# Endpoint redraws per event under RejectionRule.ENDPOINT before the event is dropped.
ENDPOINT_RETRIES = 1000

TYPE_M = "m"
TYPE_F = "f"

T = TypeVar("T")


def derive_seed(master_seed: int, index: int) -> int:
    """Independent 63-bit seed for work item ``index`` of a run seeded with ``master_seed``."""
    state = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def random_relabeling(graph: AttributedMultigraph, seed: int) -> AttributedMultigraph:
    rng = np.random.default_rng(seed)
    return graph.relabeled(rng.permutation(graph.n_nodes))


# -- stochastic block model ------------------------------------------------------

def _sbm_once(cfg: SbmConfig, seed: int) -> nx.Graph:
    probabilities = [[cfg.p_in, cfg.p_out], [cfg.p_out, cfg.p_in]]
    return nx.stochastic_block_model([cfg.n1, cfg.n2], probabilities, seed=seed)


def generate_sbm(cfg: SbmConfig) -> AttributedMultigraph:
    """Connected 2-block SBM; nodes ``0..n1-1`` are +1 and the rest -1.

    Disconnected samples are discarded and redrawn with a derived seed.
    """
    cfg.validate()
    for attempt in range(CONNECTIVITY_RETRIES):
        seed = cfg.seed if attempt == 0 else derive_seed(cfg.seed, attempt)
        sample = _sbm_once(cfg, seed)
        if nx.is_connected(sample):
            if attempt:
                logger.debug(f"SBM connected after {attempt} redraws (seed={cfg.seed})")
            attributes = [Attribute.PLUS] * cfg.n1 + [Attribute.MINUS] * cfg.n2
            edges = sorted((min(u, v), max(u, v)) for u, v in sample.edges())
            return AttributedMultigraph.from_edges(attributes, edges)
    raise ConnectivityRetriesExhausted(
        f"no connected SBM sample in {CONNECTIVITY_RETRIES} attempts for {cfg.to_dict()}"
    )


# -- DMPA ------------------------------------------------------------------------

@dataclass
class DirectedGrowthGraph:
    types: List[str] = field(default_factory=list)
    in_degree: List[int] = field(default_factory=list)
    out_degree: List[int] = field(default_factory=list)
    edges: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.types)

    def add_node(self, node_type: str) -> int:
        self.types.append(node_type)
        self.in_degree.append(0)
        self.out_degree.append(0)
        return len(self.types) - 1

    def add_edge(self, citing: int, cited: int):
        self.edges.append((citing, cited))
        self.out_degree[citing] += 1
        self.in_degree[cited] += 1


class _DmpaGrowth:
    """One run of the condensed DMPA process.

    Events: (1) a new node is cited by an existing node drawn by in-degree + delta,
    (2) a new node cites an existing node drawn by out-degree + delta,
    (3) two existing nodes are joined, citing by out-degree + delta and cited by
    in-degree + delta. Every proposal is accepted with probability rho_att for
    equal types and 1 - rho_att otherwise. A draw with citing = cited counts as
    a rejection. What a rejection redraws follows ``cfg.rejection``.
    """

    def __init__(self, cfg: DmpaConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        capacity = cfg.target_edges + 2
        self._in = np.zeros(capacity)
        self._out = np.zeros(capacity)
        self.graph = DirectedGrowthGraph()
        self.rejections = 0

    def _draw(self, weights: np.ndarray) -> int:
        n = self.graph.n_nodes
        cdf = np.cumsum(weights[:n] + self.cfg.delta)
        return min(int(np.searchsorted(cdf, self.rng.random() * cdf[-1], side="right")), n - 1)

    def _by_in_degree(self) -> int:
        return self._draw(self._out if self.cfg.swap_pa_degrees else self._in)

    def _by_out_degree(self) -> int:
        return self._draw(self._in if self.cfg.swap_pa_degrees else self._out)

    def _accept(self, type_a: str, type_b: str) -> bool:
        threshold = self.cfg.rho_att if type_a == type_b else 1.0 - self.cfg.rho_att
        return self.rng.random() < threshold

    def _new_type(self) -> str:
        return TYPE_F if self.rng.random() < self.cfg.p_f else TYPE_M

    def _commit(self, citing: int, cited: int):
        self.graph.add_edge(citing, cited)
        self._out[citing] += 1
        self._in[cited] += 1

    def _spawn(self, node_type: str) -> int:
        return self.graph.add_node(node_type)

    def step(self) -> bool:
        """Attempt one event; return whether an edge was added.

        Under ``RejectionRule.EVENT`` a rejected proposal ends the attempt. Under
        ``RejectionRule.ENDPOINT`` the event and the new node's type stay fixed
        and the existing endpoints are redrawn, up to ``ENDPOINT_RETRIES``
        proposals, before the event is given up.
        """
        cfg, types = self.cfg, self.graph.types
        event = self.rng.random()
        if event < cfg.p_event:
            new_type = self._new_type()
            citing = self._retry(self._by_in_degree, lambda v: self._accept(types[v], new_type))
            if citing is None:
                return False
            self._commit(citing, self._spawn(new_type))
        elif event < cfg.p_event + cfg.q_event:
            new_type = self._new_type()
            cited = self._retry(self._by_out_degree, lambda v: self._accept(new_type, types[v]))
            if cited is None:
                return False
            self._commit(self._spawn(new_type), cited)
        else:
            pair = self._retry(
                lambda: (self._by_out_degree(), self._by_in_degree()),
                lambda p: p[0] != p[1] and self._accept(types[p[0]], types[p[1]]),
            )
            if pair is None:
                return False
            self._commit(*pair)
        return True

    def _retry(self, propose: Callable[[], T], accepted: Callable[[T], bool]) -> Optional[T]:
        """First accepted proposal, or ``None`` once the rejection rule gives the event up."""
        attempts = ENDPOINT_RETRIES if self.cfg.rejection is RejectionRule.ENDPOINT else 1
        for _ in range(attempts):
            proposal = propose()
            if accepted(proposal):
                return proposal
            self._reject()
        return None

    def _reject(self):
        self.rejections += 1
        if self.rejections > MAX_REJECTIONS_PER_EDGE * self.cfg.target_edges:
            raise GenerationStalled(
                f"DMPA growth stalled after {self.rejections} rejections at "
                f"{len(self.graph.edges)} edges ({self.cfg.to_dict()})"
            )

    def run(self) -> DirectedGrowthGraph:
        # Seed: two connected nodes with different labels.
        self._commit(self._spawn(TYPE_M), self._spawn(TYPE_F))
        while len(self.graph.edges) < self.cfg.target_edges:
            self.step()
        logger.debug(
            f"DMPA grew {self.graph.n_nodes} nodes / {len(self.graph.edges)} edges "
            f"with {self.rejections} rejected proposals"
        )
        return self.graph


def generate_dmpa(cfg: DmpaConfig) -> DirectedGrowthGraph:
    try:
        cfg.validate()
    except InvalidConfig:
        logger.error(f"Invalid DMPA configuration: {cfg.to_dict()}")
        raise
    return _DmpaGrowth(cfg).run()


def project_undirected(dg: DirectedGrowthGraph) -> AttributedMultigraph:
    """Drop edge directions; parallel directed edges accumulate multiplicity (m -> +1, f -> -1)."""
    attributes = [Attribute.MINUS if t == TYPE_F else Attribute.PLUS for t in dg.types]
    return AttributedMultigraph.from_edges(attributes, dg.edges)


def generate_dmpa_series(
    base_cfg: DmpaConfig, rho_values: Sequence[float], master_seed: int
) -> List[GraphSnapshot]:
    """Projected DMPA snapshots with rho_att taking each value in turn."""
    width = max(2, len(str(len(rho_values) - 1)))
    snapshots = []
    for index, rho in enumerate(rho_values):
        cfg = replace(base_cfg, rho_att=float(rho), seed=derive_seed(master_seed, index))
        graph = project_undirected(generate_dmpa(cfg))
        snapshots.append(GraphSnapshot(tag=str(index).zfill(width), graph=graph))
    return snapshots
