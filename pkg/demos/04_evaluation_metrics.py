"""
Scoring trajectories
====================

The two alignment metrics: how often the regulator intervened during the
event (intervention percentage), and how far simulated resolution timing
landed from the recorded duration (resolution-lag percentage, signed).
"""

from types import SimpleNamespace

from pharmsim import PolicySet, run_replications
from pharmsim.config import ForcedDisruption, SimConfig
from pharmsim.evaluation import (
    EpsilonPolicy,
    competition_bins,
    evaluate,
    fip,
    rationale_ngrams,
    resolution_time,
    rlp,
)

# The metric primitives on hand-written series.
print("intervention pct of [1,1,0,0]:", fip([True, True, False, False]))
shortages = [0.1, 0.05, 0.002, 0.0005, 0, 0]
t_sim = resolution_time(shortages, EpsilonPolicy(0.001))
print("earliest sustained clearance of", shortages, "->", t_sim)
print("lag when recorded duration is 6:", round(rlp(t_sim, 6), 2), "%")

# End to end: simulate a case three times and score it against its record.
case = SimpleNamespace(case_id="demo-1", dataset="FDA-Disc", T=6)
cfg = SimConfig(
    n=2, horizon=6, disruption_prob=0.0, seed=9, replications=3,
    forced=ForcedDisruption(deltas=((0, 0.56),), duration=6),
    case_id="demo-1",
)
trajectories = run_replications(cfg, PolicySet.rule())
report = evaluate(trajectories, [case], scenario="simulation")
print("\n" + report.to_text())

# Competition analysis: average supply per period, binned by market size.
sweep = []
for n in (2, 3, 5, 10):
    sweep_cfg = SimConfig(
        n=n, horizon=6, disruption_prob=0.0, seed=1, case_id=f"sweep-{n}",
        forced=ForcedDisruption(deltas=((0, 0.56),), duration=6),
    )
    sweep.append(run_replications(sweep_cfg, PolicySet.rule(), k=1)[0])
print("\nmean supply per period by competition bin:")
for label, value in competition_bins(sweep).items():
    print(f"  {label:>7}: {value:.4f}")

# What the manufacturers say they are doing, by bin.
rationales, bins = [], []
for traj in sweep:
    label = "{2}" if traj.config.n == 2 else "(5,10]" if traj.config.n > 5 else "{3}"
    for record in traj.records:
        for decision in record.decisions["manufacturers"]:
            rationales.append(decision["rationale"])
            bins.append(label)
report = rationale_ngrams(rationales, bins)
for term in ("maintaining", "competitors"):
    freq = {label: round(report.relative_frequency(term, label), 4)
            for label in report.unigrams}
    print(f"relative frequency of '{term}':", freq)
