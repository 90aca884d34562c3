import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import List, Tuple

from glassceiling.exceptions import InvalidConfig

# Rényi order with the highest correlation to |gamma_att| on SBM graphs.
DEFAULT_ALPHA = 1.3


class Direction(Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class ObjectiveMode(Enum):
    GRAPH_EXACT = "graph_exact"
    JDAM_PAPER = "jdam_paper"


class ObjectiveEstimate(Enum):
    # mean Q over samples_per_eval classes drawn from the pmf
    SAMPLED = "sampled"
    # exact pmf-weighted sum over a per-class table of mean Q
    EXPECTED = "expected"


class RejectionRule(Enum):
    # redraw the existing endpoint(s) of the event until a proposal is accepted
    ENDPOINT = "endpoint"
    # discard the event and draw a fresh one
    EVENT = "event"


def _require(condition: bool, message: str):
    if not condition:
        raise InvalidConfig(message)


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


class _Config:
    def to_dict(self) -> dict:
        return _plain(asdict(self))


@dataclass
class SbmConfig(_Config):
    n1: int = 30
    n2: int = 30
    p_in: float = 0.3
    p_out: float = 0.05
    seed: int = 0

    def validate(self) -> "SbmConfig":
        _require(self.n1 >= 1 and self.n2 >= 1, "n1 and n2 must both be at least 1")
        _require(0.0 <= self.p_in <= 1.0, f"p_in={self.p_in} outside [0, 1]")
        _require(0.0 <= self.p_out <= 1.0, f"p_out={self.p_out} outside [0, 1]")
        _require(self.seed >= 0, "seed must be non-negative")
        return self


@dataclass
class DmpaConfig(_Config):
    p_f: float = 0.3
    rho_att: float = 0.5
    p_event: float = 0.15
    q_event: float = 0.15
    delta: float = 10.0
    target_edges: int = 2000
    seed: int = 0
    swap_pa_degrees: bool = False
    rejection: RejectionRule = RejectionRule.ENDPOINT

    def validate(self) -> "DmpaConfig":
        _require(0.0 < self.p_f <= 0.5, f"p_f={self.p_f} outside (0, 0.5]")
        _require(0.0 <= self.rho_att <= 1.0, f"rho_att={self.rho_att} outside [0, 1]")
        _require(self.p_event >= 0.0 and self.q_event >= 0.0, "event probabilities must be non-negative")
        _require(self.p_event + self.q_event <= 1.0, "p_event + q_event must not exceed 1")
        _require(self.delta > 0.0 and math.isfinite(self.delta), f"delta={self.delta} must be positive")
        _require(self.target_edges >= 1, "target_edges must be positive")
        _require(self.seed >= 0, "seed must be non-negative")
        return self


@dataclass
class SpsaConfig(_Config):
    delta: float = 0.1
    epsilon: float = 0.01
    iterations: int = 2000
    direction: Direction = Direction.MINIMIZE
    seed: int = 0
    samples_per_eval: int = 1
    objective_mode: ObjectiveMode = ObjectiveMode.GRAPH_EXACT
    # a_k = epsilon / (k + 1 + stability) ** step_decay
    step_decay: float = 0.0
    # c_k = delta / (k + 1) ** perturbation_decay
    perturbation_decay: float = 0.0
    stability: float = 0.0
    objective_estimate: ObjectiveEstimate = ObjectiveEstimate.EXPECTED
    # endpoint picks averaged per class in the expected-objective table
    endpoint_draws: int = 8
    # perturbation pairs used to calibrate epsilon at theta_0; 0 keeps the raw step size
    calibration_draws: int = 20

    def validate(self) -> "SpsaConfig":
        _require(self.delta > 0.0, f"delta={self.delta} must be positive")
        _require(self.epsilon > 0.0, f"epsilon={self.epsilon} must be positive")
        _require(self.iterations >= 0, "iterations must be non-negative")
        _require(self.samples_per_eval >= 1, "samples_per_eval must be at least 1")
        _require(self.endpoint_draws >= 1, "endpoint_draws must be at least 1")
        _require(self.calibration_draws >= 0, "calibration_draws must be non-negative")
        _require(self.step_decay >= 0.0 and self.perturbation_decay >= 0.0, "decay exponents must be non-negative")
        _require(self.stability >= 0.0, "stability must be non-negative")
        _require(self.seed >= 0, "seed must be non-negative")
        return self

    def gains(self, k: int) -> Tuple[float, float]:
        """Step size and perturbation scale for iteration ``k`` (0-based)."""
        a_k = self.epsilon / (k + 1 + self.stability) ** self.step_decay
        c_k = self.delta / (k + 1) ** self.perturbation_decay
        return a_k, c_k


def _default_alphas() -> List[float]:
    return [round(0.6 + 0.1 * i, 1) for i in range(15)]


@dataclass
class AlphaSweepConfig(_Config):
    sbm: SbmConfig = field(default_factory=SbmConfig)
    alphas: List[float] = field(default_factory=_default_alphas)
    replicates: int = 200
    master_seed: int = 0
    workers: int = 1

    def validate(self) -> "AlphaSweepConfig":
        self.sbm.validate()
        _require(len(self.alphas) > 0, "alphas must not be empty")
        _require(all(0.0 < a <= 4.0 for a in self.alphas), "alphas must lie in (0, 4]")
        _require(self.replicates >= 30, "replicates must be at least 30")
        _require(self.workers >= 1, "workers must be at least 1")
        return self


def _default_rhos() -> List[float]:
    return [round(0.05 + 0.1 * i, 2) for i in range(10)]


@dataclass
class DmpaSweepConfig(_Config):
    base: DmpaConfig = field(default_factory=DmpaConfig)
    p_f_values: List[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5])
    rho_values: List[float] = field(default_factory=_default_rhos)
    alpha: float = DEFAULT_ALPHA
    master_seed: int = 0
    workers: int = 1

    def validate(self) -> "DmpaSweepConfig":
        self.base.validate()
        _require(len(self.p_f_values) > 0 and len(self.rho_values) > 0, "p_f and rho lists must not be empty")
        _require(self.workers >= 1, "workers must be at least 1")
        return self


@dataclass
class InterventionConfig(_Config):
    spsa: SpsaConfig = field(default_factory=SpsaConfig)
    alpha: float = DEFAULT_ALPHA
    edge_counts: List[int] = field(default_factory=lambda: [10, 100, 1000])
    trials: int = 20
    master_seed: int = 0

    def validate(self) -> "InterventionConfig":
        self.spsa.validate()
        _require(self.trials >= 10, "trials must be at least 10")
        _require(all(count >= 0 for count in self.edge_counts), "edge counts must be non-negative")
        return self


@dataclass
class CorrelationConfig(_Config):
    sbm: SbmConfig = field(default_factory=SbmConfig)
    p_range: Tuple[float, float] = (0.05, 0.4)
    replicates: int = 200
    alpha: float = DEFAULT_ALPHA
    master_seed: int = 0

    def validate(self) -> "CorrelationConfig":
        self.sbm.validate()
        low, high = self.p_range
        _require(0.0 <= low < high <= 1.0, f"p_range={self.p_range} must satisfy 0 <= low < high <= 1")
        _require(self.replicates >= 10, "replicates must be at least 10")
        return self


def default_sbm_config() -> SbmConfig:
    return SbmConfig()


def default_dmpa_config() -> DmpaConfig:
    return DmpaConfig()


def default_spsa_config() -> SpsaConfig:
    return SpsaConfig()


def default_alpha_sweep_config() -> AlphaSweepConfig:
    return AlphaSweepConfig()


def default_dmpa_sweep_config() -> DmpaSweepConfig:
    return DmpaSweepConfig()


def default_intervention_config() -> InterventionConfig:
    return InterventionConfig()


def default_correlation_config() -> CorrelationConfig:
    return CorrelationConfig()
