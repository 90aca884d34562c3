"""Desk-scale numerical studies: the Rényi-order sweep on SBM graphs, the DMPA
homophily grid, the edge-addition intervention, snapshot trends and the
measure/assortativity correlation study.

Work items carry their own derived seeds and results are keyed by item index,
so the output does not depend on ``workers``.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats
from tqdm import tqdm

from glassceiling.assortativity import assortativity_report, attribute_assortativity, pearson_r
from glassceiling.attributed_graph import AttributedMultigraph, load_snapshot_series
from glassceiling.config import (
    DEFAULT_ALPHA,
    AlphaSweepConfig,
    CorrelationConfig,
    Direction,
    DmpaConfig,
    DmpaSweepConfig,
    InterventionConfig,
    SbmConfig,
    SpsaConfig,
)
from glassceiling.distributions import attribute_distributions, build_jdam, normalize_jdam
from glassceiling.exceptions import (
    ConnectivityRetriesExhausted,
    DegenerateSeries,
    ParseError,
    TooFewValidReplicates,
)
from glassceiling.generators import derive_seed, generate_dmpa, generate_sbm, project_undirected, random_relabeling
from glassceiling.info_measures import attribute_conditional_mi, measure_graph
from glassceiling.spsa_optimizer import TRACE_COLUMNS, LogitParams, SpsaOptimizer, apply_edges, metrics_row

logger = logging.getLogger(__name__)

MIN_VALID_REPLICATES = 10
INTERVENTION_METRICS = ["gamma_att", "gamma_deg", "delta_i"]


def _run_items(fn: Callable, items: Sequence, workers: int, progress: bool, desc: str) -> List:
    """Map ``fn`` over ``items`` keeping input order."""
    if workers <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=not progress)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(fn, items), total=len(items), desc=desc, disable=not progress))


def _safe_r(x: Iterable[float], y: Iterable[float], what: str) -> Optional[float]:
    try:
        return pearson_r(list(x), list(y))
    except DegenerateSeries as e:
        logger.warning(f"Correlation for {what} undefined: {e}")
        return None


# -- alpha sweep -----------------------------------------------------------------

@dataclass
class AlphaSweepResult:
    records: pd.DataFrame
    replicates: pd.DataFrame

    @classmethod
    def from_replicates(cls, replicates: pd.DataFrame, alphas: Sequence[float]) -> "AlphaSweepResult":
        """Aggregate per-replicate measures into one correlation per alpha."""
        valid = replicates.dropna(subset=["gamma_att"])
        skipped = len(replicates) - len(valid)
        if skipped:
            logger.warning(f"Skipped {skipped} replicates with undefined gamma_att")
        if len(valid) < MIN_VALID_REPLICATES:
            raise TooFewValidReplicates(f"only {len(valid)} of {len(replicates)} replicates are usable")
        records = []
        for alpha in alphas:
            r = _safe_r(valid[f"delta_i@{alpha}"], valid["gamma_att"].abs(), f"alpha={alpha}")
            records.append({"alpha": alpha, "r": r, "n_replicates": len(valid), "n_skipped_degenerate": skipped})
        return cls(records=pd.DataFrame(records), replicates=replicates)

    def to_frame(self) -> pd.DataFrame:
        return self.records

    @property
    def peak_alpha(self) -> Optional[float]:
        valid = self.records.dropna(subset=["r"])
        if valid.empty:
            return None
        return float(valid.loc[valid["r"].idxmax(), "alpha"])

    def permutation_r(self, alpha: float, permutations: int, seed: int) -> np.ndarray:
        """Null correlations: |gamma_att| shuffled across the usable replicates."""
        valid = self.replicates.dropna(subset=["gamma_att"])
        values = valid[f"delta_i@{alpha}"].to_numpy(dtype=float)
        target = valid["gamma_att"].abs().to_numpy(dtype=float)
        rng = np.random.default_rng(seed)
        return np.array([pearson_r(values, rng.permutation(target)) for _ in range(permutations)])


def _alpha_replicate(task) -> dict:
    sbm_cfg, alphas, index, master_seed = task
    cfg = replace(sbm_cfg, seed=derive_seed(master_seed, 2 * index))
    graph = random_relabeling(generate_sbm(cfg), derive_seed(master_seed, 2 * index + 1))
    gamma_att = attribute_assortativity(attribute_distributions(graph))
    nj = normalize_jdam(build_jdam(graph))
    row = {"replicate": index, "seed": cfg.seed, "gamma_att": gamma_att}
    for alpha in alphas:
        row[f"delta_i@{alpha}"] = attribute_conditional_mi(nj, alpha)
    return row


def sweep_alpha(sbm_cfg: SbmConfig, alphas: Sequence[float], replicates: int, master_seed: int,
                workers: int = 1, progress: bool = False) -> AlphaSweepResult:
    """Correlation of I_alpha with |gamma_att| across one fixed SBM replicate set, per alpha."""
    cfg = AlphaSweepConfig(sbm=sbm_cfg, alphas=list(alphas), replicates=replicates,
                           master_seed=master_seed, workers=workers).validate()
    tasks = [(cfg.sbm, cfg.alphas, i, cfg.master_seed) for i in range(cfg.replicates)]
    frame = pd.DataFrame(_run_items(_alpha_replicate, tasks, cfg.workers, progress, "sweep-alpha"))
    result = AlphaSweepResult.from_replicates(frame, cfg.alphas)
    logger.info(f"Alpha sweep over {result.records['n_replicates'].iloc[0]} replicates peaks at "
                f"alpha={result.peak_alpha}")
    return result


# -- DMPA grid -------------------------------------------------------------------

@dataclass
class DmpaSweepResult:
    records: pd.DataFrame

    def to_frame(self) -> pd.DataFrame:
        return self.records

    def with_distance(self) -> pd.DataFrame:
        frame = self.records.copy()
        frame["rho_distance"] = (frame["rho_att"] - 0.5).abs()
        return frame

    def pooled_r(self) -> Optional[float]:
        frame = self.with_distance()
        return _safe_r(frame["delta_i"], frame["rho_distance"], "pooled grid")

    def per_pf_r(self) -> pd.DataFrame:
        rows = [
            {"p_f": p_f, "r": _safe_r(group["delta_i"], group["rho_distance"], f"p_f={p_f}")}
            for p_f, group in self.with_distance().groupby("p_f", sort=True)
        ]
        return pd.DataFrame(rows, columns=["p_f", "r"])

    def indifference_means(self) -> dict:
        """Mean delta_i at the grid rho closest to 0.5 and at the two extremes."""
        means = self.records.groupby("rho_att")["delta_i"].mean()
        rhos = means.index.to_numpy(dtype=float)
        middle = rhos[np.argmin(np.abs(rhos - 0.5))]
        return {
            "rho_middle": float(middle),
            "mean_middle": float(means.loc[middle]),
            "mean_low": float(means.loc[rhos.min()]),
            "mean_high": float(means.loc[rhos.max()]),
        }


def _dmpa_point(task) -> dict:
    base_cfg, p_f, rho, alpha, seed = task
    cfg = replace(base_cfg, p_f=p_f, rho_att=rho, seed=seed)
    graph = project_undirected(generate_dmpa(cfg))
    report = assortativity_report(graph)
    return {
        "p_f": p_f,
        "rho_att": rho,
        "seed": seed,
        "delta_i": measure_graph(graph, alpha).attribute_conditional_mi,
        "gamma_att": report.gamma_att,
        "gamma_deg": report.gamma_deg,
    }


def sweep_dmpa(p_f_list: Sequence[float], rho_list: Sequence[float], base_cfg: DmpaConfig,
               master_seed: int, alpha: float = DEFAULT_ALPHA, workers: int = 1,
               progress: bool = False) -> DmpaSweepResult:
    """One projected DMPA network per (p_f, rho_att) grid point."""
    cfg = DmpaSweepConfig(base=base_cfg, p_f_values=list(p_f_list), rho_values=list(rho_list),
                          alpha=alpha, master_seed=master_seed, workers=workers).validate()
    grid = [(p_f, rho) for p_f in cfg.p_f_values for rho in cfg.rho_values]
    tasks = [
        (cfg.base, float(p_f), float(rho), cfg.alpha, derive_seed(cfg.master_seed, i))
        for i, (p_f, rho) in enumerate(grid)
    ]
    for _, p_f, rho, _, seed in tasks:
        replace(cfg.base, p_f=p_f, rho_att=rho, seed=seed).validate()
    result = DmpaSweepResult(records=pd.DataFrame(_run_items(_dmpa_point, tasks, cfg.workers, progress, "sweep-dmpa")))
    logger.info(f"DMPA grid of {len(grid)} points, pooled r={result.pooled_r()}")
    return result


# -- intervention ----------------------------------------------------------------

@dataclass
class InterventionResult:
    params: LogitParams
    trials: pd.DataFrame
    history: pd.DataFrame
    mask: Optional[np.ndarray] = None

    def to_frame(self) -> pd.DataFrame:
        """Trial means and standard errors per milestone, one column per metric and arm."""
        summary = (
            self.trials.groupby(["edges_added", "arm"])[INTERVENTION_METRICS]
            .agg(["mean", "sem"])
            .unstack("arm")
        )
        summary.columns = [
            f"{metric}_{arm}" + ("_se" if stat == "sem" else "") for metric, stat, arm in summary.columns
        ]
        return summary.reset_index()

    def increase(self, metric: str, arm: str) -> float:
        """Trial-mean change of ``metric`` from the original graph to the largest milestone."""
        frame = self.trials[self.trials["arm"] == arm]
        means = frame.groupby("edges_added")[metric].mean()
        return float(means.iloc[-1] - means.loc[0])


def _trace_with_origin(graph: AttributedMultigraph, trace: pd.DataFrame, alpha: float) -> pd.DataFrame:
    # One frame from records: concatenating an all-NA origin row is deprecated in pandas.
    rows = [metrics_row(graph, 0, alpha)] + trace.to_dict("records")
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def run_intervention(graph: AttributedMultigraph, alpha: float, spsa_cfg: SpsaConfig,
                     edge_counts: Sequence[int], trials: int, master_seed: int,
                     progress: bool = False, baseline: Optional[LogitParams] = None) -> InterventionResult:
    """Optimized pmf against a baseline (uniform unless given) on paired sub-seeds."""
    cfg = InterventionConfig(spsa=replace(spsa_cfg, direction=Direction.MINIMIZE), alpha=alpha,
                             edge_counts=list(edge_counts), trials=trials, master_seed=master_seed).validate()
    optimizer = SpsaOptimizer(graph, cfg.alpha, cfg.spsa)
    params = optimizer.run()
    baseline = LogitParams.uniform(params.space) if baseline is None else baseline
    milestones = sorted({int(c) for c in cfg.edge_counts if c > 0})
    total = milestones[-1] if milestones else 0
    frames = []
    for trial in tqdm(range(cfg.trials), desc="intervene", disable=not progress):
        seed = derive_seed(cfg.master_seed, trial)
        for arm, arm_params in (("optimized", params), ("uniform", baseline)):
            _, trace = apply_edges(graph, arm_params, total, np.random.default_rng(seed), cfg.alpha, milestones)
            frame = _trace_with_origin(graph, trace, cfg.alpha)
            frame.insert(0, "arm", arm)
            frame.insert(0, "trial", trial)
            frames.append(frame)
    result = InterventionResult(params=params, trials=pd.concat(frames, ignore_index=True), mask=optimizer.mask,
                                history=optimizer.history_frame())
    if total:
        logger.info(
            f"gamma_att increase at {total} edges: optimized={result.increase('gamma_att', 'optimized'):.4f} "
            f"uniform={result.increase('gamma_att', 'uniform'):.4f}"
        )
    return result


# -- temporal series -------------------------------------------------------------

@dataclass
class TemporalResult:
    records: pd.DataFrame
    tau: Optional[float]

    def to_frame(self) -> pd.DataFrame:
        return self.records


def kendall_trend(values: Sequence[float]) -> Optional[float]:
    """Kendall tau of ``values`` against their index; ``None`` below two points, 0 for a constant series."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return None
    if np.ptp(values) == 0:
        return 0.0
    return float(stats.kendalltau(np.arange(len(values)), values)[0])


def temporal_analysis(snapshot_dir, alpha: float = DEFAULT_ALPHA) -> TemporalResult:
    snapshots = load_snapshot_series(snapshot_dir)
    if not snapshots:
        raise ParseError("no <tag>.edges snapshots found", str(snapshot_dir))
    rows = []
    for snapshot in snapshots:
        graph = snapshot.graph
        report = assortativity_report(graph)
        rows.append({
            "snapshot_tag": snapshot.tag,
            "delta_i": measure_graph(graph, alpha).attribute_conditional_mi,
            "gamma_att": report.gamma_att,
            "gamma_deg": report.gamma_deg,
            "n_nodes": graph.n_nodes,
            "n_edges": graph.n_edges,
        })
    records = pd.DataFrame(rows)
    tau = kendall_trend(records["delta_i"])
    logger.info(f"Temporal series of {len(records)} snapshots, Kendall tau={tau}")
    return TemporalResult(records=records, tau=tau)


# -- correlation study -----------------------------------------------------------

CORRELATION_MEASURES = ["degree_mi", "joint_mi", "delta_i"]
CORRELATION_TARGETS = ["abs_gamma_deg", "abs_gamma_att"]


@dataclass
class CorrelationResult:
    replicates: pd.DataFrame
    correlations: pd.DataFrame

    def to_frame(self) -> pd.DataFrame:
        return self.correlations

    def r(self, measure: str, target: str) -> Optional[float]:
        row = self.correlations[(self.correlations["measure"] == measure) & (self.correlations["target"] == target)]
        value = row["r"].iloc[0]
        return None if pd.isna(value) else float(value)


def _correlation_replicate(task) -> Optional[dict]:
    cfg, index, master_seed = task
    rng = np.random.default_rng(derive_seed(master_seed, index))
    low, high = cfg.p_range
    p_in, p_out = rng.uniform(low, high, size=2)
    sbm = replace(cfg.sbm, p_in=float(p_in), p_out=float(p_out), seed=derive_seed(master_seed, index + cfg.replicates))
    try:
        graph = generate_sbm(sbm)
    except ConnectivityRetriesExhausted:
        return None
    report = measure_graph(graph, cfg.alpha)
    assortativity = assortativity_report(graph)
    return {
        "replicate": index,
        "p_in": sbm.p_in,
        "p_out": sbm.p_out,
        "degree_mi": report.degree_mi,
        "joint_mi": report.joint_mi,
        "delta_i": report.attribute_conditional_mi,
        "abs_gamma_deg": None if assortativity.gamma_deg is None else abs(assortativity.gamma_deg),
        "abs_gamma_att": None if assortativity.gamma_att is None else abs(assortativity.gamma_att),
    }


def correlation_study(cfg: CorrelationConfig, master_seed: Optional[int] = None,
                      workers: int = 1, progress: bool = False) -> CorrelationResult:
    """Pearson r of each information measure against each absolute assortativity on mixed SBM graphs."""
    cfg = replace(cfg, master_seed=cfg.master_seed if master_seed is None else master_seed).validate()
    tasks = [(cfg, i, cfg.master_seed) for i in range(cfg.replicates)]
    rows = [row for row in _run_items(_correlation_replicate, tasks, workers, progress, "correlate") if row]
    if len(rows) < len(tasks):
        logger.warning(f"Dropped {len(tasks) - len(rows)} replicates that never connected")
    replicates = pd.DataFrame(rows)
    if len(replicates) < MIN_VALID_REPLICATES:
        raise TooFewValidReplicates(f"only {len(replicates)} connected replicates")
    correlations = []
    for measure in CORRELATION_MEASURES:
        for target in CORRELATION_TARGETS:
            valid = replicates.dropna(subset=[target])
            correlations.append({
                "measure": measure,
                "target": target,
                "r": _safe_r(valid[measure], valid[target], f"{measure} vs {target}"),
                "n_replicates": len(valid),
            })
    return CorrelationResult(replicates=replicates, correlations=pd.DataFrame(correlations))
