"""Main faircause file.

This file parses the command line arguments and runs one step of the
workflow: simulate, metrics, discover, score, compare, ate, tradeoff or
select. Results go to files or standard output as JSON/CSV, diagnostics
go to standard error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import textwrap
from pathlib import Path
from typing import Any, Callable, NoReturn, Optional, Sequence

import numpy as np
import parse

import faircause
from faircause.core import AteQuery, load_graph, load_run_table, run_table_text, study_to_dict
from faircause.discovery import (
    SearchConfig, ablate_tiers, bge_score, compare_graphs, consensus_edges, eval_against_truth, learn_graph,
)
from faircause.displays import dump_effect, dump_overlap, dump_plan, dump_report
from faircause.exceptions import ConfigError, FairCauseError, UsageError
from faircause.fairmetrics import compute_all, load_prediction_table, metrics_row_text
from faircause.formatters import atomic_write, canonical_json, graph_to_dot
from faircause.inference import DmlConfig, KNearest, LinearRidge, estimate_ate
from faircause.scm import ScmConfig, random_scm, sample
from faircause.selection import grid_levels, load_objective, select_methods
from faircause.settings import Settings, configure_logging, load_settings
from faircause.tradeoff import TradeoffQuery, analyze_all, build_report, cause_distribution, export_report

logger = logging.getLogger("faircause")

Opts = dict[str, Any]

# Options naming files that must exist before a command runs.
INPUT_OPTIONS = ("settings", "data", "config", "graph", "objective", "predictions", "graph_1", "graph_2")


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message: str) -> NoReturn:
        """Print usage and exit 1."""
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _finite_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return value


def _non_negative_float(text: str) -> float:
    value = _finite_float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = _finite_float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _ratio(text: str) -> float:
    value = _finite_float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _grid_step(text: str) -> float:
    value = _finite_float(text)
    try:
        grid_levels(value)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(e.message) from e
    return value


def _data_options(p: argparse.ArgumentParser, graph: bool = True) -> None:
    p.add_argument("--data", type=Path, required=True, help="Run table CSV")
    p.add_argument("--config", type=Path, required=True, help="Study JSON declaring the variables")
    if graph:
        p.add_argument("--graph", type=Path, required=True, help="Causal graph JSON")


def _nuisance_option(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--nuisance",
        choices=("ridge", "knn"),
        default="ridge",
        help="Learner for the cross-fitted nuisance models",
    )


def build_parser() -> ArgumentParser:
    """Create the parser with one subcommand per workflow step.

    Returns:
        The argument parser.
    """
    parser = ArgumentParser(
        prog="faircause",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=textwrap.dedent(
            """
        Additional information:
          Global options go before the subcommand:
                    $ faircause --seed 7 --out-dir out simulate --nodes 8 --interventional 3 --n 2000"""
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {faircause.__version__}")
    parser.add_argument("--seed", type=int, default=0, help="Seed for every random draw")
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="Directory for relative output paths")
    parser.add_argument("-q", "--quiet", action="store_true", default=False, help="Only log warnings and errors")
    parser.add_argument("-v", "--verbose", action="store_true", default=False, help="Log debug messages")
    parser.add_argument("--threads", type=_positive_int, default=1, help="Maximum worker threads")
    parser.add_argument("--settings", type=Path, default=None, help="TOML file overriding defaults")

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("simulate", help="Sample run tables from a random structural causal model")
    p.add_argument("--nodes", type=_positive_int, required=True)
    p.add_argument("--interventional", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True, help="Number of runs")
    p.add_argument("--in-degree", type=_non_negative_float, default=2.0, help="Expected in-degree")
    p.add_argument("--sigma", type=_positive_float, default=0.5, help="Noise standard deviation")
    p.add_argument("--nonlinear", action="store_true", default=False)
    p.add_argument("--out", default="runs.csv")
    p.add_argument("--truth", default="truth.json")
    p.add_argument("--study", default="study.json")
    p.add_argument("--scm", default="scm.json")

    p = sub.add_parser("metrics", help="Fairness and performance metrics of a prediction table")
    p.add_argument("--predictions", type=Path, required=True)
    p.add_argument("--k", type=_positive_int, default=None, help="Neighbours for consistency")
    p.add_argument("--out", default=None, help="CSV file; standard output when omitted")

    p = sub.add_parser("discover", help="Learn a causal graph by BGe hill climbing")
    _data_options(p, graph=False)
    p.add_argument("--restarts", type=_positive_int, default=None)
    p.add_argument("--max-in-degree", type=_non_negative_int, default=None)
    p.add_argument("--tiers", action="store_true", default=False, help="Forbid edges against pipeline tiers")
    p.add_argument("--out", required=True)
    p.add_argument("--dot", default=None)
    p.add_argument("--ablation", default=None, help="Also relearn without each tier's methods and write the scores")

    p = sub.add_parser("score", help="BGe score of a graph")
    _data_options(p)

    p = sub.add_parser("compare", help="Overlap and accuracy of a graph against a reference")
    p.add_argument("graph_1", type=Path)
    p.add_argument("graph_2", type=Path)
    p.add_argument("more", type=Path, nargs="*", help="Further graphs for the consensus")
    p.add_argument("--out", default=None)

    p = sub.add_parser("ate", help="Average treatment effect by double machine learning")
    _data_options(p)
    p.add_argument("--treatment", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--x1", type=_finite_float, default=1.0)
    p.add_argument("--x2", type=_finite_float, default=0.0)
    _nuisance_option(p)

    p = sub.add_parser("tradeoff", help="Detect trade-offs and identify their causes")
    _data_options(p)
    p.add_argument("--methods", required=True, help="Comma-separated interventional variables")
    p.add_argument("--pairs", required=True, help="Comma-separated metric pairs X:Y")
    p.add_argument("--t-on", type=_ratio, default=1.0)
    p.add_argument("--t-off", type=_ratio, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--dot", default=None)
    p.add_argument("--distribution", default=None, help="JSON file counting causes per node and tier")
    _nuisance_option(p)

    p = sub.add_parser("select", help="Choose method ratios optimizing an objective")
    _data_options(p)
    p.add_argument("--objective", type=Path, required=True)
    p.add_argument("--methods", default=None, help="Comma-separated candidates; all interventional by default")
    p.add_argument("--grid-step", type=_grid_step, default=None)
    p.add_argument("--max-active", type=_positive_int, default=None)
    p.add_argument("--out", default=None)
    return parser


def parse_arguments(argv: Optional[Sequence[str]] = None) -> Opts:
    """Parse command line arguments.

    Args:
        argv: Arguments without the program name; sys.argv when None.

    Returns:
        A dictionary of arguments.
    """
    parser = build_parser()
    opts = vars(parser.parse_args(argv))
    for name in INPUT_OPTIONS:
        path = opts.get(name)
        if path is not None and not path.is_file():
            flag = name if name.startswith("graph_") else "--" + name
            parser.error(f"{flag}: {path} is not a file")
    for path in opts.get("more") or ():
        if not path.is_file():
            parser.error(f"{path} is not a file")
    if opts["quiet"] and opts["verbose"]:
        parser.error("--quiet and --verbose are mutually exclusive")
    command = opts["command"]
    if command == "simulate" and opts["interventional"] >= opts["nodes"]:
        parser.error("--interventional must be smaller than --nodes")
    if command == "ate" and opts["treatment"] == opts["outcome"]:
        parser.error("--treatment and --outcome must differ")
    if command == "tradeoff" and opts["t_on"] == opts["t_off"]:
        parser.error("--t-on and --t-off must differ")
    return opts


def _out(opts: Opts, name: str) -> Path:
    path = Path(name)
    return path if path.is_absolute() else opts["out_dir"] / path


def _emit(opts: Opts, document: Any, out: Optional[str] = None) -> None:
    text = canonical_json(document)
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(_out(opts, out), text)


def _split(text: str, flag: str) -> list[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise UsageError("expected a comma-separated list", source=flag)
    return items


def _dml_config(opts: Opts, settings: Settings) -> DmlConfig:
    nuisance = KNearest(settings.knn_k) if opts.get("nuisance") == "knn" else LinearRidge(settings.ridge_lambda)
    return DmlConfig(
        folds=settings.folds,
        nuisance=nuisance,
        cond_mean_degree=settings.cond_mean_degree,
        seed=opts["seed"],
        n_jobs=opts["threads"],
    )


def _simulate(opts: Opts, settings: Settings) -> None:
    structure_seed, sample_seed = (int(s) for s in np.random.SeedSequence(opts["seed"]).generate_state(2))
    scm = random_scm(
        ScmConfig(
            n_nodes=opts["nodes"],
            n_interventional=opts["interventional"],
            expected_in_degree=opts["in_degree"],
            noise_sigma=opts["sigma"],
            nonlinear=opts["nonlinear"],
            seed=structure_seed,
        )
    )
    runs = sample(scm, opts["n"], sample_seed)
    atomic_write(_out(opts, opts["out"]), run_table_text(runs))
    atomic_write(_out(opts, opts["truth"]), canonical_json(scm.graph.to_dict()))
    atomic_write(_out(opts, opts["study"]), canonical_json(study_to_dict(scm.specs())))
    atomic_write(_out(opts, opts["scm"]), scm.to_json())
    logger.info("Simulated %d runs over %d variables", runs.n_rows, len(runs.names))


def _metrics(opts: Opts, settings: Settings) -> None:
    table = load_prediction_table(opts["predictions"])
    row = metrics_row_text(compute_all(table, opts["k"] or settings.consistency_k))
    if opts["out"] is None:
        sys.stdout.write(row)
    else:
        atomic_write(_out(opts, opts["out"]), row)


def _discover(opts: Opts, settings: Settings) -> None:
    data = load_run_table(opts["data"], opts["config"])
    cfg = SearchConfig(
        restarts=opts["restarts"] or settings.restarts,
        max_in_degree=settings.max_in_degree if opts["max_in_degree"] is None else opts["max_in_degree"],
        tier_constraints=opts["tiers"],
        seed=opts["seed"],
        n_jobs=opts["threads"],
    )
    g = learn_graph(data, cfg=cfg)
    logger.info("Learned %d edges over %d variables", len(g.edges), len(g.nodes))
    atomic_write(_out(opts, opts["out"]), canonical_json(g.to_dict()))
    if opts["dot"]:
        atomic_write(_out(opts, opts["dot"]), graph_to_dot(g))
    if opts["ablation"]:
        ablation = ablate_tiers(data, cfg=cfg)
        atomic_write(_out(opts, opts["ablation"]), canonical_json(ablation.to_dict()))


def _score(opts: Opts, settings: Settings) -> None:
    data = load_run_table(opts["data"], opts["config"])
    g = load_graph(opts["graph"], data.variables)
    _emit(opts, {"score": bge_score(data, g)})


def _compare(opts: Opts, settings: Settings) -> None:
    graphs = [load_graph(path) for path in (opts["graph_1"], opts["graph_2"], *opts["more"])]
    g1, g2 = graphs[:2]
    overlap = compare_graphs(g1, g2)
    accuracy = eval_against_truth(g1, g2)
    consensus = consensus_edges(graphs)
    if not opts["quiet"]:
        dump_overlap(overlap, accuracy, consensus)
    document = {**overlap.to_dict(), "accuracy": accuracy.to_dict(), "consensus": consensus.to_dict()}
    _emit(opts, document, opts["out"])


def _ate(opts: Opts, settings: Settings) -> None:
    data = load_run_table(opts["data"], opts["config"])
    g = load_graph(opts["graph"], data.variables)
    q = AteQuery(opts["treatment"], opts["outcome"], opts["x1"], opts["x2"])
    estimate, value = estimate_ate(data, g, q, _dml_config(opts, settings))
    if not opts["quiet"]:
        dump_effect(q.treatment, q.outcome, estimate, value)
    _emit(opts, {**estimate.to_dict(), "treatment": q.treatment, "outcome": q.outcome, "ate": value})


def _parse_pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for token in _split(text, "--pairs"):
        match = parse.parse("{x}:{y}", token)
        if match is None or ":" in match["y"]:
            raise UsageError(f"expected X:Y, got {token!r}", source="--pairs")
        pairs.append((match["x"].strip(), match["y"].strip()))
    return pairs


def _tradeoff(opts: Opts, settings: Settings) -> None:
    data = load_run_table(opts["data"], opts["config"])
    g = load_graph(opts["graph"], data.variables)
    methods = _split(opts["methods"], "--methods")
    try:
        queries = [
            TradeoffQuery(method, x, y, opts["t_on"], opts["t_off"])
            for x, y in _parse_pairs(opts["pairs"])
            for method in methods
        ]
    except FairCauseError as e:
        e.source = e.source or "--methods/--pairs"
        raise
    report = build_report(analyze_all(data, g, queries, cfg=_dml_config(opts, settings)))
    export_report(
        report,
        _out(opts, opts["out"]),
        dot_path=_out(opts, opts["dot"]) if opts["dot"] else None,
        graph=g,
    )
    if opts["distribution"]:
        distribution = cause_distribution(report, data.variables)
        atomic_write(_out(opts, opts["distribution"]), canonical_json(distribution.to_dict()))
    if not opts["quiet"]:
        dump_report(report)


def _select(opts: Opts, settings: Settings) -> None:
    data = load_run_table(opts["data"], opts["config"])
    g = load_graph(opts["graph"], data.variables)
    objective = load_objective(opts["objective"], data.variables)
    if opts["methods"] is None:
        methods = [s.name for s in data.variables if s.is_interventional]
    else:
        methods = _split(opts["methods"], "--methods")
    plan = select_methods(
        data,
        g,
        objective,
        methods,
        grid_step=settings.grid_step if opts["grid_step"] is None else opts["grid_step"],
        max_active=opts["max_active"] or settings.max_active,
        cfg=_dml_config(opts, settings),
    )
    if not opts["quiet"]:
        dump_plan(plan)
    _emit(opts, plan.to_dict(), opts["out"])


COMMANDS: dict[str, Callable[[Opts, Settings], None]] = {
    "simulate": _simulate,
    "metrics": _metrics,
    "discover": _discover,
    "score": _score,
    "compare": _compare,
    "ate": _ate,
    "tradeoff": _tradeoff,
    "select": _select,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command.

    Args:
        argv: Arguments without the program name; sys.argv when None.

    Returns:
        Exit status: 0 on success, 1 on usage errors, 2 on data or numerical errors.
    """
    try:
        opts = parse_arguments(argv)
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1

    configure_logging(quiet=opts["quiet"], verbose=opts["verbose"])
    try:
        settings = load_settings(opts["settings"])
        COMMANDS[opts["command"]](opts, settings)
    except FairCauseError as e:
        if e.source is None:
            e.source = str(opts.get("data") or opts.get("predictions") or opts["command"])
        logger.error("%s", e)
        return e.exit_code
    return 0


def main() -> None:
    """Run the application.

    Args:
        None

    Returns:
        None
    """
    sys.exit(run())


if __name__ == "__main__":
    main()
