"""Edge-addition optimization over degree-attribute groups.

The candidate edges are classes of ordered group pairs; a conditional logit
with one fixed effect per class defines the sampling distribution, and SPSA
tunes the fixed effects against the change in I_alpha caused by one added edge.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import softmax

from glassceiling.assortativity import assortativity_report
from glassceiling.attributed_graph import AttributedMultigraph
from glassceiling.config import DEFAULT_ALPHA, Direction, ObjectiveEstimate, ObjectiveMode, SpsaConfig
from glassceiling.distributions import JdamCounter, build_jdam, normalize_jdam
from glassceiling.exceptions import (
    EmptyGraph,
    EmptyGroup,
    ExhaustedClasses,
    NegativeCell,
    NonFiniteTheta,
)
from glassceiling.info_measures import attribute_conditional_mi, measure_graph, validate_order

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["edges_added", "gamma_att", "gamma_deg", "delta_i"]


# -- edge space ------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpace:
    """Groups ``(k, c)`` for ``k = 0..k_max`` and both attributes; classes are ordered group pairs."""

    k_max: int

    @classmethod
    def for_graph(cls, graph: AttributedMultigraph) -> "GroupSpace":
        if graph.n_edges == 0:
            raise EmptyGraph("graph has no edges")
        # Max remaining degree plus one step of headroom.
        return cls(k_max=int(graph.degrees().max()))

    @property
    def n_groups(self) -> int:
        return 2 * (self.k_max + 1)

    @property
    def n_classes(self) -> int:
        return self.n_groups ** 2

    def index(self, group: int, other: int) -> int:
        return group * self.n_groups + other

    def edge_class(self, index: int) -> "EdgeClass":
        group, other = divmod(int(index), self.n_groups)
        return EdgeClass(index=int(index), group=group, other=other)

    def class_table(self) -> pd.DataFrame:
        index = np.arange(self.n_classes)
        group, other = np.divmod(index, self.n_groups)
        return pd.DataFrame({
            "class_index": index,
            "k": group // 2,
            "c": np.where(group % 2 == 0, 1, -1),
            "k_prime": other // 2,
            "c_prime": np.where(other % 2 == 0, 1, -1),
        })


@dataclass(frozen=True)
class EdgeClass:
    index: int
    group: int
    other: int

    @property
    def k(self) -> int:
        return self.group // 2

    @property
    def c(self) -> int:
        return 1 if self.group % 2 == 0 else -1

    @property
    def k_prime(self) -> int:
        return self.other // 2

    @property
    def c_prime(self) -> int:
        return 1 if self.other % 2 == 0 else -1


def logit_pmf(theta: np.ndarray, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Conditional-logit probabilities ``exp(theta_i) / sum_j exp(theta_j)`` over unmasked classes."""
    theta = np.asarray(theta, dtype=float)
    if not np.isfinite(theta).all():
        raise NonFiniteTheta("theta has non-finite entries")
    if mask is None:
        return softmax(theta)
    if not mask.any():
        raise ExhaustedClasses("every edge class is masked")
    return softmax(np.where(mask, theta, -np.inf))


def sample_edge_class(pmf: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of a class index."""
    cdf = np.cumsum(pmf)
    index = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(index, int(np.flatnonzero(pmf)[-1]))


@dataclass
class LogitParams:
    space: GroupSpace
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (self.space.n_classes,):
            raise ValueError(f"theta has shape {self.theta.shape}, expected ({self.space.n_classes},)")

    @classmethod
    def uniform(cls, space: GroupSpace) -> "LogitParams":
        return cls(space=space, theta=np.zeros(space.n_classes))

    def pmf(self, mask: Optional[np.ndarray] = None) -> np.ndarray:
        return logit_pmf(self.theta, mask)

    def extended(self, k_max: int) -> "LogitParams":
        """Grow the space to ``k_max``; new classes start at the current minimum theta."""
        if k_max <= self.space.k_max:
            return self
        space = GroupSpace(k_max=k_max)
        theta = np.full(space.n_classes, self.theta.min())
        group, other = np.divmod(np.arange(self.space.n_classes), self.space.n_groups)
        theta[group * space.n_groups + other] = self.theta
        return LogitParams(space=space, theta=theta)

    def to_frame(self, mask: Optional[np.ndarray] = None) -> pd.DataFrame:
        frame = self.space.class_table()
        frame["theta"] = self.theta
        frame["prob"] = self.pmf(mask)
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "LogitParams":
        frame = frame.sort_values("class_index")
        space = GroupSpace(k_max=int(max(frame["k"].max(), frame["k_prime"].max())))
        return cls(space=space, theta=frame["theta"].to_numpy(dtype=float))


# -- objective -------------------------------------------------------------------

@dataclass
class ObjectiveEval:
    q_value: float
    evaluation_mode: ObjectiveMode
    endpoints: Optional[Tuple[int, int]] = None


def node_groups(graph: AttributedMultigraph) -> np.ndarray:
    """Group index of every node; -1 for isolated nodes."""
    degrees = graph.degrees()
    groups = 2 * (degrees - 1) + graph.attribute_indices()
    groups[degrees == 0] = -1
    return groups


def class_mask_from_occupancy(occupancy: np.ndarray) -> np.ndarray:
    """Classes whose two groups can supply two distinct nodes."""
    present = occupancy > 0
    mask = np.outer(present, present)
    np.fill_diagonal(mask, occupancy >= 2)
    return mask.ravel()


def _occupancy(groups: np.ndarray, n_groups: int) -> np.ndarray:
    return np.bincount(groups[(groups >= 0) & (groups < n_groups)], minlength=n_groups)


def _pick_endpoints(
    members: Dict[int, np.ndarray], group: int, other: int, rng: np.random.Generator
) -> Tuple[int, int]:
    first, second = members.get(group), members.get(other)
    if first is None or second is None or (group == other and len(first) < 2):
        raise EmptyGroup(f"groups {group} and {other} cannot supply two distinct nodes")
    u = int(first[rng.integers(len(first))])
    v = int(second[rng.integers(len(second))])
    while v == u:
        v = int(second[rng.integers(len(second))])
    return u, v


class ObjectiveEvaluator:
    """Q(x) = I_alpha(E + x) - I_alpha(E) for a fixed graph.

    The graph is never mutated: the JDAM change of the proposed edge is applied
    to a cell counter and reverted after measuring.
    """

    def __init__(self, graph: AttributedMultigraph, alpha: float = DEFAULT_ALPHA,
                 mode: ObjectiveMode = ObjectiveMode.GRAPH_EXACT):
        self.graph = graph
        self.alpha = validate_order(alpha)
        self.mode = mode
        self.counter = JdamCounter.from_graph(graph)
        self.baseline = attribute_conditional_mi(self.counter.normalized(), self.alpha)
        groups = node_groups(graph)
        self.members = {int(g): np.flatnonzero(groups == g) for g in np.unique(groups[groups >= 0])}

    def class_mask(self, space: GroupSpace) -> np.ndarray:
        occupancy = np.zeros(space.n_groups, dtype=np.int64)
        for group, nodes in self.members.items():
            if group < space.n_groups:
                occupancy[group] = len(nodes)
        mask = class_mask_from_occupancy(occupancy)
        if self.mode is ObjectiveMode.JDAM_PAPER:
            for index in np.flatnonzero(mask):
                x = space.edge_class(index)
                mask[index] = self._cell_supply(x) >= self._cell_demand(x)
        return mask

    def evaluate(self, x: EdgeClass, rng: np.random.Generator) -> ObjectiveEval:
        if self.mode is ObjectiveMode.JDAM_PAPER:
            return self._evaluate_cell_move(x)
        u, v = _pick_endpoints(self.members, x.group, x.other, rng)
        delta = JdamCounter.edge_move_delta(self.graph, u, v)
        return ObjectiveEval(self._measure_with(delta) - self.baseline, self.mode, (u, v))

    def expected_table(self, space: GroupSpace, mask: np.ndarray, draws: int,
                       rng: np.random.Generator) -> np.ndarray:
        """Mean Q of every unmasked class over ``draws`` endpoint picks; 0 on masked classes.

        Q is symmetric in the two groups, so (g, g') is evaluated once and mirrored.
        The cell move of ``jdam_paper`` mode is deterministic and takes one draw.
        """
        draws = 1 if self.mode is ObjectiveMode.JDAM_PAPER else draws
        table = np.zeros(space.n_classes)
        for index in np.flatnonzero(mask):
            x = space.edge_class(index)
            if x.other < x.group:
                continue
            value = math.fsum(self.evaluate(x, rng).q_value for _ in range(draws)) / draws
            table[index] = value
            table[space.index(x.other, x.group)] = value
        return table

    def _measure_with(self, delta: Dict[Tuple[int, int], int]) -> float:
        self.counter.apply(delta)
        try:
            return attribute_conditional_mi(self.counter.normalized(), self.alpha)
        finally:
            self.counter.apply(delta, sign=-1)

    def _cell_supply(self, x: EdgeClass) -> int:
        return self.counter.cells.get((x.group, x.other), 0)

    @staticmethod
    def _cell_demand(x: EdgeClass) -> int:
        return 2 if x.group == x.other else 1

    def _evaluate_cell_move(self, x: EdgeClass) -> ObjectiveEval:
        # Move one count from [(k,c),(k',c')] to [(k+1,c),(k'+1,c')], mirrored.
        if self._cell_supply(x) < self._cell_demand(x):
            raise NegativeCell(f"cell ({x.group}, {x.other}) holds no count to move")
        delta: Dict[Tuple[int, int], int] = {}
        for cell, change in (
            ((x.group, x.other), -1), ((x.other, x.group), -1),
            ((x.group + 2, x.other + 2), 1), ((x.other + 2, x.group + 2), 1),
        ):
            delta[cell] = delta.get(cell, 0) + change
        return ObjectiveEval(self._measure_with(delta) - self.baseline, self.mode)


def evaluate_q(graph: AttributedMultigraph, x: EdgeClass, alpha: float = DEFAULT_ALPHA,
               mode: ObjectiveMode = ObjectiveMode.GRAPH_EXACT,
               rng: Optional[np.random.Generator] = None) -> ObjectiveEval:
    rng = np.random.default_rng() if rng is None else rng
    return ObjectiveEvaluator(graph, alpha, mode).evaluate(x, rng)


# -- SPSA ------------------------------------------------------------------------

def perturbation(rng: np.random.Generator, size: int) -> np.ndarray:
    """Rademacher vector: i.i.d. +1/-1 with probability 1/2 each."""
    return 2.0 * rng.integers(0, 2, size=size) - 1.0


def spsa_gradient(c_plus: float, c_minus: float, delta: float, d: np.ndarray) -> np.ndarray:
    return (c_plus - c_minus) / (2.0 * delta) * d


class SpsaOptimizer:
    """SPSA over the class fixed effects.

    With ``ObjectiveEstimate.EXPECTED`` the objective is the pmf-weighted sum over
    a table of per-class mean Q built once from the fixed graph, so C(theta) is
    exact. With ``calibration_draws`` > 0 the step size is rescaled at theta_0 so
    that one step moves each fixed effect by about ``epsilon``.
    """

    def __init__(self, graph: AttributedMultigraph, alpha: float = DEFAULT_ALPHA,
                 cfg: Optional[SpsaConfig] = None):
        self.cfg = (cfg or SpsaConfig()).validate()
        self.graph = graph
        self.alpha = validate_order(alpha)
        self.space = GroupSpace.for_graph(graph)
        self.evaluator = ObjectiveEvaluator(graph, self.alpha, self.cfg.objective_mode)
        self.mask = self.evaluator.class_mask(self.space)
        self.table: Optional[np.ndarray] = None
        self.gain_scale = 1.0
        self.history: List[dict] = []

    def _estimate(self, theta: np.ndarray, rng: np.random.Generator) -> float:
        """Estimate of C(theta) = E_{x ~ f(theta)}[Q(x)]."""
        pmf = logit_pmf(theta, self.mask)
        if self.table is not None:
            return float(pmf @ self.table)
        total = 0.0
        for _ in range(self.cfg.samples_per_eval):
            x = self.space.edge_class(sample_edge_class(pmf, rng))
            total += self.evaluator.evaluate(x, rng).q_value
        return total / self.cfg.samples_per_eval

    def _calibrate(self, theta: np.ndarray, rng: np.random.Generator) -> float:
        # a_0 * |g_0| ~ epsilon: scale by 2 c_0 / mean |C+ - C-| at theta_0.
        _, c_0 = self.cfg.gains(0)
        spread = []
        for _ in range(self.cfg.calibration_draws):
            d = perturbation(rng, self.space.n_classes)
            spread.append(abs(self._estimate(theta + c_0 * d, rng) - self._estimate(theta - c_0 * d, rng)))
        mean_spread = float(np.mean(spread))
        if not np.isfinite(mean_spread) or mean_spread <= 0.0:
            logger.warning("Objective is flat around theta_0; keeping the raw step size")
            return 1.0
        return 2.0 * c_0 / mean_spread

    def run(self) -> LogitParams:
        cfg = self.cfg
        if not self.mask.any():
            raise ExhaustedClasses("no edge class has non-empty groups")
        rng = np.random.default_rng(cfg.seed)
        theta = rng.standard_normal(self.space.n_classes)
        if cfg.iterations == 0:
            return LogitParams(space=self.space, theta=theta)
        if cfg.objective_estimate is ObjectiveEstimate.EXPECTED:
            self.table = self.evaluator.expected_table(self.space, self.mask, cfg.endpoint_draws, rng)
        if cfg.calibration_draws:
            self.gain_scale = self._calibrate(theta, rng)
        sign = -1.0 if cfg.direction is Direction.MINIMIZE else 1.0
        logger.info(
            f"SPSA over {int(self.mask.sum())}/{self.space.n_classes} classes, "
            f"{cfg.iterations} iterations, {cfg.direction.value}, "
            f"{cfg.objective_estimate.value} objective, gain scale {self.gain_scale:.4g}"
        )
        for k in range(cfg.iterations):
            a_k, c_k = cfg.gains(k)
            d = perturbation(rng, self.space.n_classes)
            c_plus = self._estimate(theta + c_k * d, rng)
            c_minus = self._estimate(theta - c_k * d, rng)
            gradient = spsa_gradient(c_plus, c_minus, c_k, d)
            gradient[~self.mask] = 0.0
            theta = theta + sign * self.gain_scale * a_k * gradient
            self.history.append({
                "iteration": k,
                "c_plus": c_plus,
                "c_minus": c_minus,
                "grad_norm": float(np.linalg.norm(gradient)),
            })
            if (k + 1) % 500 == 0:
                logger.debug(f"iteration {k + 1}: C+={c_plus:.6g} C-={c_minus:.6g}")
        return LogitParams(space=self.space, theta=theta)

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.history, columns=["iteration", "c_plus", "c_minus", "grad_norm"])


def optimize(graph: AttributedMultigraph, alpha: float = DEFAULT_ALPHA,
             cfg: Optional[SpsaConfig] = None) -> LogitParams:
    return SpsaOptimizer(graph, alpha, cfg).run()


def expected_q(graph: AttributedMultigraph, params: LogitParams, samples: int,
               rng: np.random.Generator, alpha: float = DEFAULT_ALPHA) -> float:
    """Mean Q over ``samples`` draws from the params' pmf on ``graph``."""
    evaluator = ObjectiveEvaluator(graph, alpha)
    space = GroupSpace.for_graph(graph)
    params = params.extended(space.k_max)
    pmf = params.pmf(evaluator.class_mask(params.space))
    values = [
        evaluator.evaluate(params.space.edge_class(sample_edge_class(pmf, rng)), rng).q_value
        for _ in range(samples)
    ]
    return float(np.mean(values))


# -- intervention ----------------------------------------------------------------

def metrics_row(graph: AttributedMultigraph, edges_added: int, alpha: float) -> dict:
    report = assortativity_report(graph)
    return {
        "edges_added": edges_added,
        "gamma_att": report.gamma_att,
        "gamma_deg": report.gamma_deg,
        "delta_i": measure_graph(graph, alpha).attribute_conditional_mi,
    }


def _powers_of_ten(count: int) -> List[int]:
    milestones, value = [], 1
    while value <= count:
        milestones.append(value)
        value *= 10
    return milestones


def apply_edges(graph: AttributedMultigraph, params: LogitParams, count: int,
                rng: np.random.Generator, alpha: float = DEFAULT_ALPHA,
                milestones: Optional[Sequence[int]] = None) -> Tuple[AttributedMultigraph, pd.DataFrame]:
    """Add ``count`` sampled edges to a copy of ``graph`` and trace the metrics.

    Groups are recomputed after every edge; classes whose groups are empty get
    no mass. The space grows whenever a node reaches its top remaining degree.
    """
    graph = graph.copy()
    wanted = set(_powers_of_ten(count) if milestones is None else (m for m in milestones if 0 < m <= count))
    rows = []
    for step in range(1, count + 1):
        groups = node_groups(graph)
        top = int(groups.max()) // 2
        if top >= params.space.k_max:
            params = params.extended(top + 1)
        occupancy = _occupancy(groups, params.space.n_groups)
        mask = class_mask_from_occupancy(occupancy)
        if not mask.any():
            raise ExhaustedClasses("no edge class has non-empty groups")
        x = params.space.edge_class(sample_edge_class(params.pmf(mask), rng))
        members = {x.group: np.flatnonzero(groups == x.group), x.other: np.flatnonzero(groups == x.other)}
        u, v = _pick_endpoints(members, x.group, x.other, rng)
        graph.add_edge(u, v)
        if step in wanted:
            rows.append(metrics_row(graph, step, alpha))
    return graph, pd.DataFrame(rows, columns=TRACE_COLUMNS)


# -- submodularity ---------------------------------------------------------------

@dataclass
class SubmodularityWitness:
    n_nodes: int
    attributes: List[int]
    e_a: List[Tuple[int, int]]
    e_c: List[Tuple[int, int]]
    x: Tuple[int, int]
    q_a: float
    q_c: float

    def to_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "attributes": self.attributes,
            "e_a": [list(e) for e in self.e_a],
            "e_c": [list(e) for e in self.e_c],
            "x": list(self.x),
            "q_a": self.q_a,
            "q_c": self.q_c,
        }


@dataclass
class _MeasureCache:
    alpha: float
    values: Dict[tuple, float] = field(default_factory=dict)

    def __call__(self, attributes: Tuple[int, ...], edges: Tuple[Tuple[int, int], ...]) -> float:
        key = (attributes, edges)
        if key not in self.values:
            graph = AttributedMultigraph.from_edges(attributes, edges)
            self.values[key] = attribute_conditional_mi(normalize_jdam(build_jdam(graph)), self.alpha)
        return self.values[key]


def _gain(measure: Callable, attributes, edges: Tuple[Tuple[int, int], ...], x: Tuple[int, int]) -> float:
    return measure(attributes, tuple(sorted(edges + (x,)))) - measure(attributes, edges)


def find_submodularity_violation(max_nodes: int = 6, alpha: float = DEFAULT_ALPHA,
                                 tolerance: float = 1e-12) -> Optional[SubmodularityWitness]:
    """First nested pair E_a ⊂ E_c and edge x with Q_{E_a}(x) < Q_{E_c}(x).

    Enumerates simple graphs on 3..max_nodes nodes with both attributes present
    (node 0 fixed at +1), E_a = E_c minus one edge, and every pair x outside E_c.
    """
    alpha = validate_order(alpha)
    measure = _MeasureCache(alpha)
    for n in range(3, max_nodes + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for tail in itertools.product((1, -1), repeat=n - 1):
            attributes = (1,) + tail
            if len(set(attributes)) < 2:
                continue
            for size in range(2, len(pairs) + 1):
                for e_c in itertools.combinations(pairs, size):
                    for removed in e_c:
                        e_a = tuple(e for e in e_c if e != removed)
                        for x in pairs:
                            if x in e_c:
                                continue
                            q_a = _gain(measure, attributes, e_a, x)
                            q_c = _gain(measure, attributes, e_c, x)
                            if q_a < q_c - tolerance:
                                logger.info(f"Submodularity violated on {n} nodes: {q_a:.6g} < {q_c:.6g}")
                                return SubmodularityWitness(
                                    n_nodes=n, attributes=list(attributes), e_a=list(e_a),
                                    e_c=list(e_c), x=x, q_a=q_a, q_c=q_c,
                                )
    return None
