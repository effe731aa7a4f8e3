"""Trade-off analysis on a small simulated benchmark.

A reweighing method raises the positive prediction rate, which improves a
fairness score but costs accuracy. The analysis should detect the trade-off
and blame the positive rate as the common cause.

Run from the repository root:

    $ python example/tradeoff_walkthrough.py
"""
from faircause.displays import dump_plan, dump_report
from faircause.scm import make_scm, sample
from faircause.selection import ObjectiveTerm, SelectionObjective, select_methods
from faircause.settings import configure_logging
from faircause.tradeoff import TradeoffQuery, analyze, annotated_dot, build_report

configure_logging()

scm = make_scm(
    ["reweighing", "positive_rate", "acc", "fairness"],
    ["reweighing"],
    {("reweighing", "positive_rate"): 1.0, ("positive_rate", "acc"): -1.0, ("positive_rate", "fairness"): 1.0},
)
runs = sample(scm, 5000, seed=0)

analysis = analyze(runs, scm.graph, TradeoffQuery("reweighing", "acc", "fairness"))
report = build_report([analysis])
dump_report(report)
print(annotated_dot(report, scm.graph))

objective = SelectionObjective((ObjectiveTerm("acc", 1.0), ObjectiveTerm("fairness", 2.0)))
dump_plan(select_methods(runs, scm.graph, objective, ["reweighing"]))
