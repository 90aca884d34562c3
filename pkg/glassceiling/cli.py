"""Command-line driver.

Every subcommand that takes ``--out`` writes a ``manifest.json`` and its CSV
frames there. Exit codes: 0 success, 2 degenerate input, 1 any other error.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from glassceiling import __version__
from glassceiling.artifacts import load_logit_params, write_frame, write_logit_params, write_manifest
from glassceiling.attributed_graph import load_graph, save_graph, save_snapshot
from glassceiling.config import (
    DEFAULT_ALPHA,
    CorrelationConfig,
    Direction,
    DmpaConfig,
    ObjectiveEstimate,
    ObjectiveMode,
    RejectionRule,
    SbmConfig,
    SpsaConfig,
    default_alpha_sweep_config,
    default_correlation_config,
    default_dmpa_config,
    default_dmpa_sweep_config,
    default_intervention_config,
    default_sbm_config,
    default_spsa_config,
)
from glassceiling.distributions import build_jdam
from glassceiling.exceptions import DegenerateInput, GlassCeilingError
from glassceiling.experiments import correlation_study, run_intervention, sweep_alpha, sweep_dmpa, temporal_analysis
from glassceiling.generators import generate_dmpa, generate_dmpa_series, generate_sbm, project_undirected
from glassceiling.orchestrator import MeasurementOrchestrator
from glassceiling.spsa_optimizer import GroupSpace, LogitParams, SpsaOptimizer, apply_edges, find_submodularity_violation

logger = logging.getLogger("glassceiling")

GRAPH_STEM = "graph"


# -- argument groups -------------------------------------------------------------

def _add_graph_input(parser: argparse.ArgumentParser):
    parser.add_argument("--edges", required=True, help="Edge file: 'u v [w]' per line")
    parser.add_argument("--attrs", required=True, help="Attribute file: 'node +1|-1|m|f' per line")


def _add_alpha(parser: argparse.ArgumentParser):
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                        help=f"Rényi order; 1 selects Shannon (default: {DEFAULT_ALPHA})")


def _add_out(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument("--out", required=required, type=Path, help="Output directory")


def _add_sbm(parser: argparse.ArgumentParser):
    d = default_sbm_config()
    parser.add_argument("--n1", type=int, default=d.n1, help=f"Nodes with attribute +1 (default: {d.n1})")
    parser.add_argument("--n2", type=int, default=d.n2, help=f"Nodes with attribute -1 (default: {d.n2})")
    parser.add_argument("--p-in", type=float, default=d.p_in, help=f"Intra-block probability (default: {d.p_in})")
    parser.add_argument("--p-out", type=float, default=d.p_out, help=f"Inter-block probability (default: {d.p_out})")


def _add_dmpa(parser: argparse.ArgumentParser):
    d = default_dmpa_config()
    parser.add_argument("--p-f", type=float, default=d.p_f, help=f"Probability of type f (default: {d.p_f})")
    parser.add_argument("--rho-att", type=float, default=d.rho_att, help=f"Homophily acceptance (default: {d.rho_att})")
    parser.add_argument("--p-event", type=float, default=d.p_event, help=f"Event 1 probability (default: {d.p_event})")
    parser.add_argument("--q-event", type=float, default=d.q_event, help=f"Event 2 probability (default: {d.q_event})")
    parser.add_argument("--delta", type=float, default=d.delta, help=f"Attachment offset (default: {d.delta})")
    parser.add_argument("--target-edges", type=int, default=d.target_edges,
                        help=f"Edges to grow (default: {d.target_edges})")
    parser.add_argument("--swap-pa-degrees", action="store_true",
                        help="Attach events 1 and 2 by out-/in-degree instead of in-/out-degree")
    parser.add_argument("--rejection", choices=[r.value for r in RejectionRule], default=d.rejection.value,
                        help="What a rejected proposal redraws: the existing endpoint(s) or the whole event")


def _add_spsa(parser: argparse.ArgumentParser):
    d = default_spsa_config()
    parser.add_argument("--iterations", type=int, default=d.iterations, help=f"(default: {d.iterations})")
    parser.add_argument("--delta", type=float, default=d.delta, help=f"Perturbation scale (default: {d.delta})")
    parser.add_argument("--epsilon", type=float, default=d.epsilon, help=f"Step size (default: {d.epsilon})")
    parser.add_argument("--samples-per-eval", type=int, default=d.samples_per_eval,
                        help="Edge draws averaged per objective estimate (default: 1)")
    parser.add_argument("--objective-mode", choices=[m.value for m in ObjectiveMode], default=d.objective_mode.value)
    parser.add_argument("--step-decay", type=float, default=d.step_decay, help="Exponent of the step-size schedule")
    parser.add_argument("--perturbation-decay", type=float, default=d.perturbation_decay,
                        help="Exponent of the perturbation schedule")
    parser.add_argument("--stability", type=float, default=d.stability, help="Offset A of the step-size schedule")
    parser.add_argument("--objective-estimate", choices=[e.value for e in ObjectiveEstimate],
                        default=d.objective_estimate.value,
                        help="Sampled C(theta) or the pmf-weighted sum over a per-class table of mean Q")
    parser.add_argument("--endpoint-draws", type=int, default=d.endpoint_draws,
                        help=f"Endpoint picks averaged per class in the expected table (default: {d.endpoint_draws})")
    parser.add_argument("--calibration-draws", type=int, default=d.calibration_draws,
                        help="Perturbation pairs used to calibrate the step size; 0 disables")
    parser.add_argument("--seed", type=int, default=d.seed)


def _sbm_config(args, seed: int = 0) -> SbmConfig:
    return SbmConfig(n1=args.n1, n2=args.n2, p_in=args.p_in, p_out=args.p_out, seed=seed).validate()


def _dmpa_config(args, seed: int = 0) -> DmpaConfig:
    return DmpaConfig(
        p_f=args.p_f, rho_att=args.rho_att, p_event=args.p_event, q_event=args.q_event, delta=args.delta,
        target_edges=args.target_edges, seed=seed, swap_pa_degrees=args.swap_pa_degrees,
        rejection=RejectionRule(args.rejection),
    ).validate()


def _spsa_config(args, direction: Direction = Direction.MINIMIZE) -> SpsaConfig:
    return SpsaConfig(
        delta=args.delta, epsilon=args.epsilon, iterations=args.iterations, direction=direction,
        seed=args.seed, samples_per_eval=args.samples_per_eval,
        objective_mode=ObjectiveMode(args.objective_mode), step_decay=args.step_decay,
        perturbation_decay=args.perturbation_decay, stability=args.stability,
        objective_estimate=ObjectiveEstimate(args.objective_estimate), endpoint_draws=args.endpoint_draws,
        calibration_draws=args.calibration_draws,
    ).validate()


def _inputs(args) -> dict:
    return {"edges": str(args.edges), "attrs": str(args.attrs)}


def _write_graph(out_dir: Path, graph) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    save_graph(graph, out_dir / f"{GRAPH_STEM}.edges", out_dir / f"{GRAPH_STEM}.attrs")


def _echo(record) -> None:
    print(json.dumps(record, sort_keys=True, indent=2))


# -- handlers --------------------------------------------------------------------

def cmd_measure(args) -> int:
    record = MeasurementOrchestrator(args.alpha, args.kmax_cutoff).measure(load_graph(args.edges, args.attrs))
    _echo(record)
    if args.out:
        write_manifest(args.out, "measure", {
            "inputs": _inputs(args), "alpha": args.alpha, "kmax_cutoff": args.kmax_cutoff, "result": record,
        })
    return 0


def cmd_generate(args) -> int:
    if args.model == "sbm":
        cfg = _sbm_config(args, args.seed)
        _write_graph(args.out, generate_sbm(cfg))
        write_manifest(args.out, "generate sbm", {"config": cfg.to_dict()})
    elif args.model == "dmpa":
        cfg = _dmpa_config(args, args.seed)
        _write_graph(args.out, project_undirected(generate_dmpa(cfg)))
        write_manifest(args.out, "generate dmpa", {"config": cfg.to_dict()})
    else:
        cfg = _dmpa_config(args)
        snapshots = generate_dmpa_series(cfg, args.rho_values, args.master_seed)
        for snapshot in snapshots:
            save_snapshot(snapshot, args.out)
        write_manifest(args.out, "generate dmpa-series", {
            "config": cfg.to_dict(), "rho_values": list(args.rho_values), "master_seed": args.master_seed,
            "tags": [s.tag for s in snapshots],
        })
    logger.info(f"Wrote {args.model} output to {args.out}")
    return 0


def cmd_jdam(args) -> int:
    frame = build_jdam(load_graph(args.edges, args.attrs), args.kmax_cutoff).to_frame(args.normalized)
    write_frame(args.out, "jdam", frame.reset_index())
    write_manifest(args.out, "jdam", {
        "inputs": _inputs(args), "normalized": args.normalized, "kmax_cutoff": args.kmax_cutoff,
    })
    return 0


def cmd_sweep_alpha(args) -> int:
    result = sweep_alpha(_sbm_config(args), args.alphas, args.replicates, args.master_seed,
                         workers=args.workers, progress=not args.quiet)
    write_frame(args.out, "alpha_sweep", result.to_frame())
    write_frame(args.out, "replicates", result.replicates)
    if args.permutations:
        rows = []
        for alpha in args.alphas:
            null = result.permutation_r(alpha, args.permutations, args.master_seed)
            low, high = np.quantile(null, [0.025, 0.975])
            rows.append({"alpha": alpha, "null_low": float(low), "null_high": float(high)})
        write_frame(args.out, "alpha_null", pd.DataFrame(rows))
    cfg = replace(default_alpha_sweep_config(), sbm=_sbm_config(args), alphas=list(args.alphas),
                  replicates=args.replicates, master_seed=args.master_seed)
    write_manifest(args.out, "sweep-alpha", {
        "config": cfg.to_dict(), "master_seed": args.master_seed, "peak_alpha": result.peak_alpha,
    })
    return 0


def cmd_sweep_dmpa(args) -> int:
    base = _dmpa_config(args)
    result = sweep_dmpa(args.p_f_values, args.rho_values, base, args.master_seed, args.alpha,
                        workers=args.workers, progress=not args.quiet)
    write_frame(args.out, "dmpa_sweep", result.to_frame())
    write_frame(args.out, "dmpa_correlation", result.per_pf_r())
    cfg = replace(default_dmpa_sweep_config(), base=base, p_f_values=list(args.p_f_values),
                  rho_values=list(args.rho_values), alpha=args.alpha, master_seed=args.master_seed)
    write_manifest(args.out, "sweep-dmpa", {
        "config": cfg.to_dict(), "master_seed": args.master_seed,
        "pooled_r": result.pooled_r(), "indifference": result.indifference_means(),
    })
    return 0


def cmd_optimize(args) -> int:
    graph = load_graph(args.edges, args.attrs)
    cfg = _spsa_config(args, Direction(args.direction))
    optimizer = SpsaOptimizer(graph, args.alpha, cfg)
    params = optimizer.run()
    write_logit_params(args.out, params, optimizer.mask)
    write_frame(args.out, "history", optimizer.history_frame())
    write_manifest(args.out, "optimize", {"inputs": _inputs(args), "alpha": args.alpha, "config": cfg.to_dict()})
    return 0


def cmd_add_edges(args) -> int:
    graph = load_graph(args.edges, args.attrs)
    if args.pmf == "uniform":
        params = LogitParams.uniform(GroupSpace.for_graph(graph))
    else:
        params = load_logit_params(args.pmf)
    grown, trace = apply_edges(graph, params, args.count, np.random.default_rng(args.seed), args.alpha)
    write_frame(args.out, "trace", trace)
    _write_graph(args.out, grown)
    write_manifest(args.out, "add-edges", {
        "inputs": _inputs(args), "pmf": args.pmf, "count": args.count, "seed": args.seed, "alpha": args.alpha,
    })
    return 0


def cmd_intervene(args) -> int:
    graph = load_graph(args.edges, args.attrs)
    cfg = replace(default_intervention_config(), spsa=_spsa_config(args), alpha=args.alpha,
                  edge_counts=list(args.edge_counts), trials=args.trials, master_seed=args.master_seed)
    result = run_intervention(graph, cfg.alpha, cfg.spsa, cfg.edge_counts, cfg.trials, cfg.master_seed,
                              progress=not args.quiet)
    write_frame(args.out, "intervention", result.to_frame())
    write_frame(args.out, "trials", result.trials)
    write_frame(args.out, "history", result.history)
    write_logit_params(args.out, result.params, result.mask)
    write_manifest(args.out, "intervene", {"inputs": _inputs(args), "config": cfg.to_dict(),
                                           "master_seed": args.master_seed})
    return 0


def cmd_temporal(args) -> int:
    result = temporal_analysis(args.snapshots, args.alpha)
    write_frame(args.out, "temporal", result.to_frame())
    write_manifest(args.out, "temporal", {"snapshots": str(args.snapshots), "alpha": args.alpha, "tau": result.tau})
    return 0


def cmd_correlate(args) -> int:
    cfg = CorrelationConfig(sbm=_sbm_config(args), p_range=(args.p_low, args.p_high), replicates=args.replicates,
                            alpha=args.alpha, master_seed=args.master_seed).validate()
    result = correlation_study(cfg, workers=args.workers, progress=not args.quiet)
    write_frame(args.out, "correlation", result.to_frame())
    write_frame(args.out, "replicates", result.replicates)
    write_manifest(args.out, "correlate", {"config": cfg.to_dict(), "master_seed": cfg.master_seed})
    return 0


def cmd_witness(args) -> int:
    witness = find_submodularity_violation(args.max_nodes, args.alpha)
    record = None if witness is None else witness.to_dict()
    if witness is None:
        logger.warning(f"No submodularity violation on graphs with at most {args.max_nodes} nodes")
    _echo(record)
    if args.out:
        write_manifest(args.out, "witness", {"max_nodes": args.max_nodes, "alpha": args.alpha, "witness": record})
    return 0


def cmd_serve(args) -> int:
    from app import app

    logger.info(f"Starting measurement service on {args.host}:{args.port}")
    app.run(host=args.host, port=args.port)
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glassceiling",
        description="Glass-ceiling measures, generators and edge-addition optimization for attributed networks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s measure --edges g.edges --attrs g.attrs --alpha 1.3
  %(prog)s generate sbm --seed 7 --out sbm/
  %(prog)s sweep-alpha --replicates 200 --master-seed 0 --out sweep/
  %(prog)s optimize --edges g.edges --attrs g.attrs --iterations 2000 --out theta/
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--quiet", action="store_true", help="Hide progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="Print the measure report of a graph as JSON")
    _add_graph_input(p)
    _add_alpha(p)
    p.add_argument("--kmax-cutoff", type=int, default=None, help="Clamp degrees above K before binning")
    _add_out(p, required=False)
    p.set_defaults(handler=cmd_measure)

    p = sub.add_parser("generate", help="Generate a synthetic attributed network")
    models = p.add_subparsers(dest="model", required=True)
    m = models.add_parser("sbm", help="Connected 2-block stochastic block model")
    _add_sbm(m)
    m.add_argument("--seed", type=int, required=True)
    _add_out(m)
    m = models.add_parser("dmpa", help="Condensed DMPA growth, projected undirected")
    _add_dmpa(m)
    m.add_argument("--seed", type=int, required=True)
    _add_out(m)
    m = models.add_parser("dmpa-series", help="Snapshot directory of DMPA networks with rho_att ramped")
    _add_dmpa(m)
    m.add_argument("--rho-values", type=float, nargs="+", required=True)
    m.add_argument("--master-seed", type=int, required=True)
    _add_out(m)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("jdam", help="Export the joint degree-and-attribute matrix as CSV")
    _add_graph_input(p)
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--kmax-cutoff", type=int, default=None)
    _add_out(p)
    p.set_defaults(handler=cmd_jdam)

    sweep = default_alpha_sweep_config()
    p = sub.add_parser("sweep-alpha", help="Correlation of I_alpha with |gamma_att| across Rényi orders")
    _add_sbm(p)
    p.add_argument("--alphas", type=float, nargs="+", default=sweep.alphas)
    p.add_argument("--replicates", type=int, default=sweep.replicates)
    p.add_argument("--permutations", type=int, default=0,
                   help="Shuffles of |gamma_att| for a 95% null band of r per alpha; 0 skips it")
    p.add_argument("--master-seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)
    p.set_defaults(handler=cmd_sweep_alpha)

    grid = default_dmpa_sweep_config()
    p = sub.add_parser("sweep-dmpa", help="I_alpha over the (p_f, rho_att) DMPA grid")
    _add_dmpa(p)
    p.add_argument("--p-f-values", type=float, nargs="+", default=grid.p_f_values)
    p.add_argument("--rho-values", type=float, nargs="+", default=grid.rho_values)
    _add_alpha(p)
    p.add_argument("--master-seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)
    p.set_defaults(handler=cmd_sweep_dmpa)

    p = sub.add_parser("optimize", help="Fit the edge-class logit with SPSA")
    _add_graph_input(p)
    _add_alpha(p)
    _add_spsa(p)
    p.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.MINIMIZE.value)
    _add_out(p)
    p.set_defaults(handler=cmd_optimize)

    p = sub.add_parser("add-edges", help="Add sampled edges and trace the metrics")
    _add_graph_input(p)
    _add_alpha(p)
    p.add_argument("--pmf", required=True, help="theta.csv from 'optimize', or 'uniform'")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_out(p)
    p.set_defaults(handler=cmd_add_edges)

    intervention = default_intervention_config()
    p = sub.add_parser("intervene", help="Optimized against uniform edge addition over paired trials")
    _add_graph_input(p)
    _add_alpha(p)
    _add_spsa(p)
    p.add_argument("--edge-counts", type=int, nargs="+", default=intervention.edge_counts)
    p.add_argument("--trials", type=int, default=intervention.trials)
    p.add_argument("--master-seed", type=int, required=True)
    _add_out(p)
    p.set_defaults(handler=cmd_intervene)

    p = sub.add_parser("temporal", help="Measure every snapshot of a series")
    p.add_argument("--snapshots", required=True, type=Path, help="Directory of <tag>.edges / <tag>.attrs pairs")
    _add_alpha(p)
    _add_out(p)
    p.set_defaults(handler=cmd_temporal)

    correlation = default_correlation_config()
    p = sub.add_parser("correlate", help="Measures against assortativities on mixed SBM graphs")
    _add_sbm(p)
    p.add_argument("--p-low", type=float, default=correlation.p_range[0])
    p.add_argument("--p-high", type=float, default=correlation.p_range[1])
    p.add_argument("--replicates", type=int, default=correlation.replicates)
    _add_alpha(p)
    p.add_argument("--master-seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)
    p.set_defaults(handler=cmd_correlate)

    p = sub.add_parser("witness", help="Search small graphs for a submodularity violation")
    p.add_argument("--max-nodes", type=int, default=6)
    _add_alpha(p)
    _add_out(p, required=False)
    p.set_defaults(handler=cmd_witness)

    p = sub.add_parser("serve", help="Run the HTTP measurement service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=5001)
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except GlassCeilingError as e:
        if isinstance(e, DegenerateInput):
            logger.warning(f"Degenerate input: {e}")
            return 2
        logger.error(f"{args.command} failed: {e}")
        return 1
    except (OSError, ValueError, KeyError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
