"""
Human-readable summaries of command results.

Each result type has its own function; all of them print to stderr so that
standard output only carries machine-readable JSON.
"""
from __future__ import annotations

from typing import Optional

from rich.markdown import HorizontalRule
from rich.table import Table

from faircause.discovery import ConsensusReport, GraphAccuracy, OverlapReport
from faircause.inference import EffectEstimate
from faircause.selection import SelectionPlan
from faircause.settings import stderr
from faircause.tradeoff import Report, confidence_level

LEVEL_STYLES = {"full": "bold red", "high": "red", "medium": "yellow", "low": "dim"}


def _header(txt: str) -> str:
    """Format header for section.

    Args:
        txt: Text to display in header.

    Returns:
        Formatted header.
    """
    stderr.print(HorizontalRule())
    return f"[yellow]{txt}:[/]\n"


def dump_report(report: Report) -> None:
    """Print trade-off counts and blamed causes per metric pair.

    Args:
        report: The trade-off report.
    """
    stderr.print(_header("Trade-offs"))
    if not report.pairs:
        stderr.print("No metric pairs analyzed.")
        return
    for pair in report.pairs:
        table = Table(title=f"{pair.x} vs {pair.y}: {pair.count}/{len(pair.methods)} methods trade off")
        table.add_column("cause")
        table.add_column("role")
        table.add_column("confidence", justify="right")
        for node, role in sorted(pair.roles().items()):
            level = confidence_level(pair.confidence[node]).value
            table.add_row(
                node,
                role.value,
                f"[{LEVEL_STYLES[level]}]{pair.confidence[node]:.2f} ({level})[/]",
            )
        stderr.print(table)


def dump_overlap(
    overlap: OverlapReport,
    accuracy: Optional[GraphAccuracy] = None,
    consensus: Optional[ConsensusReport] = None,
) -> None:
    """Print graph overlap and, if given, accuracy against the reference and the consensus."""
    stderr.print(_header("Graph comparison"))
    table = Table(show_header=False)
    for key, value in overlap.to_dict().items():
        table.add_row(key, f"{value:.4g}" if isinstance(value, float) else str(value))
    if accuracy is not None:
        for key, value in accuracy.to_dict().items():
            table.add_row(key, f"{value:.4g}" if isinstance(value, float) else str(value))
    stderr.print(table)
    if consensus is not None and consensus.n_graphs > 2:
        stderr.print(
            f"{len(consensus.edges)} edges shared by all {consensus.n_graphs} graphs "
            f"(mean {consensus.mean_edges:.1f} edges per graph)"
        )


def dump_effect(treatment: str, outcome: str, estimate: EffectEstimate, ate: float) -> None:
    """Print an effect estimate and its two-point ATE."""
    stderr.print(_header(f"Effect of {treatment} on {outcome}"))
    adjust = ", ".join(estimate.adjustment_set) or "nothing"
    stderr.print(f"theta = {estimate.theta:.4g} (se {estimate.std_error:.3g}), ATE = {ate:.4g}")
    stderr.print(f"adjusted for {adjust} over {estimate.n} runs")


def dump_plan(plan: SelectionPlan) -> None:
    """Print the chosen method ratios and predicted metric changes."""
    stderr.print(_header("Selected plan"))
    table = Table("method", "ratio")
    for method in plan.active:
        table.add_row(method, f"{plan.assignments[method]:.2f}")
    stderr.print(table)
    changes = Table("metric", "predicted change")
    for metric, change in sorted(plan.predicted_changes.items()):
        changes.add_row(metric, f"{change:+.4g}")
    stderr.print(changes)
    stderr.print(f"objective value {plan.objective_value:.4g}")
