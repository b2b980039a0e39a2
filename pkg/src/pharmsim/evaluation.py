"""Metrics and analyses over simulated and recorded trajectories.

Covers the intervention-percentage and resolution-lag metrics, the one-shot
forecast baseline, dataset-level aggregation, the competition-bin supply
analysis, and n-gram statistics over decision rationales.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

from .config import SimConfig
from .engine import Trajectory, TrajectoryRecord
from .gateway import CompletionRequest, Gateway, GatewayError, render_template


class PairingError(ValueError):
    pass


class UnbinnableN(ValueError):
    pass


class BaselineUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class EpsilonPolicy:
    """Shortage tolerance below which a quarter counts as cleared."""

    epsilon: float = 0.001

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


# -------------------------------------------------------------------- metrics

def fip(signals) -> float:
    """Percentage of periods with an announcement.

    Accepts a per-period list whose entries are announcement objects or None,
    or plain booleans.
    """
    if not signals:
        raise ValueError("need at least one period")
    active = 0
    for entry in signals:
        if entry is None or entry is False:
            continue
        severity = getattr(entry, "severity", None)
        if severity == "none":
            continue
        active += 1
    return 100.0 * active / len(signals)


def resolution_time(shortages, eps: EpsilonPolicy = EpsilonPolicy()) -> int:
    """Earliest sustained clearance: first t with all later shortages <= eps.

    Returns T+1 when the shortage never stays cleared through the horizon.
    """
    horizon = len(shortages)
    if horizon == 0:
        raise ValueError("need at least one period")
    t_sim = horizon + 1
    for t in range(horizon, 0, -1):
        if shortages[t - 1] <= eps.epsilon:
            t_sim = t
        else:
            break
    return t_sim


def rlp(t_sim: float, t_gt: float) -> float:
    """Signed resolution lag in percent; positive means slower than recorded."""
    if t_gt < 1:
        raise ValueError("t_gt must be at least 1")
    return 100.0 * (t_sim - t_gt) / t_gt


# ------------------------------------------------------------------ reporting

@dataclass
class CaseMetrics:
    case_id: str
    dataset: str
    fip_pct: float | None
    t_sim: float
    t_gt: int
    rlp_pct: float
    replications: int

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "dataset": self.dataset,
            "fip_pct": self.fip_pct,
            "t_sim": self.t_sim,
            "t_gt": self.t_gt,
            "rlp_pct": self.rlp_pct,
            "replications": self.replications,
        }


@dataclass
class MetricReport:
    scenario: str
    epsilon: float
    cases: list[CaseMetrics]
    dataset_means: dict
    # Replicate RLPs are averaged per case before dataset-level averaging.
    aggregation: str = "per-case replicate mean, then dataset mean"

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "epsilon": self.epsilon,
            "aggregation": self.aggregation,
            "cases": [c.to_dict() for c in self.cases],
            "dataset_means": self.dataset_means,
        }

    def to_text(self) -> str:
        lines = [f"{'Scenario':<14}{'Dataset':<10}{'Avg. FIP (%)':>14}{'Avg. RLP (%)':>14}"]
        for dataset in sorted(self.dataset_means):
            means = self.dataset_means[dataset]
            fip_txt = "-" if means["fip_pct"] is None else f"{means['fip_pct']:.1f}"
            lines.append(
                f"{self.scenario:<14}{dataset:<10}{fip_txt:>14}{means['rlp_pct']:>14.2f}"
            )
        return "\n".join(lines)


def evaluate(
    trajectories: list[Trajectory],
    gt_cases,
    scenario: str,
    eps: EpsilonPolicy = EpsilonPolicy(),
) -> MetricReport:
    """Score simulated trajectories against their ground-truth cases.

    Trajectories pair with cases through ``config.case_id``; replicates of the
    same case are averaged before dataset aggregation.  The one-shot baseline
    has no regulator inside it, so its intervention column is omitted.
    """
    if not isinstance(gt_cases, dict):
        gt_cases = {c.case_id: c for c in gt_cases}
    if not trajectories:
        raise PairingError("no trajectories to evaluate")

    by_case: dict[str, list[Trajectory]] = {}
    for traj in trajectories:
        case_id = traj.config.case_id
        if case_id is None or case_id not in gt_cases:
            raise PairingError(f"trajectory has no ground-truth partner: {case_id!r}")
        by_case.setdefault(case_id, []).append(traj)

    zero_shot = scenario.lower().replace("_", "-") == "zero-shot"
    cases = []
    for case_id in sorted(by_case):
        gt = gt_cases[case_id]
        t_gt = int(gt.T)
        runs = by_case[case_id]
        fips = [fip(t.announcement_flags()) for t in runs]
        t_sims = [resolution_time(t.shortages, eps) for t in runs]
        rlps = [rlp(t_sim, t_gt) for t_sim in t_sims]
        cases.append(CaseMetrics(
            case_id=case_id,
            dataset=gt.dataset,
            fip_pct=None if zero_shot else sum(fips) / len(fips),
            t_sim=sum(t_sims) / len(t_sims),
            t_gt=t_gt,
            rlp_pct=sum(rlps) / len(rlps),
            replications=len(runs),
        ))

    dataset_means = {}
    for dataset in sorted({c.dataset for c in cases}):
        subset = [c for c in cases if c.dataset == dataset]
        fips = [c.fip_pct for c in subset if c.fip_pct is not None]
        dataset_means[dataset] = {
            "cases": len(subset),
            "fip_pct": (sum(fips) / len(fips)) if fips else None,
            "rlp_pct": sum(c.rlp_pct for c in subset) / len(subset),
        }
    return MetricReport(scenario=scenario, epsilon=eps.epsilon, cases=cases,
                        dataset_means=dataset_means)


# ------------------------------------------------------------------- baseline

def zero_shot_schema(horizon: int) -> dict:
    period_schema = {
        "type": "object",
        "required": ["period", "total_demand", "total_supply", "shortage",
                     "buyer_inventory", "reasoning", "confidence"],
        "properties": {
            "period": {"type": "integer", "minimum": 1, "maximum": horizon},
            "total_demand": {"type": "number", "minimum": 0},
            "total_supply": {"type": "number", "minimum": 0},
            "shortage": {"type": "number", "minimum": 0},
            "buyer_inventory": {"type": "number", "minimum": 0},
            "reasoning": {"type": "string"},
            "confidence": {"type": "string", "enum": ["low", "moderate", "high"]},
        },
    }
    return {
        "type": "object",
        "required": ["periods"],
        "properties": {
            "periods": {"type": "array", "minItems": horizon, "maxItems": horizon,
                        "items": period_schema},
        },
    }


def _scenario_description(cfg: SimConfig) -> str:
    if cfg.forced is not None:
        parts = ", ".join(
            f"manufacturer {i} loses {d:.0%} of capacity" for i, d in cfg.forced.deltas
        )
        return (f"forced disruption before quarter 1 ({parts}) lasting "
                f"{cfg.forced.duration or cfg.horizon} quarters")
    return (f"each manufacturer independently fails with probability "
            f"{cfg.disruption_prob} per quarter, losing {cfg.disruption_magnitude:.0%} "
            f"of capacity for a uniformly random 1..{cfg.horizon} quarters")


def zero_shot_run(cfg: SimConfig, gateway: Gateway, template_dir=None) -> Trajectory:
    """Forecast the whole trajectory with a single structured completion.

    The model's numbers are predictions, not simulation output: market
    invariants are not enforced, but the shortage identity is recomputed and
    divergences are flagged on the affected records.
    """
    cfg.validate()
    schema = zero_shot_schema(cfg.horizon)
    prompt = render_template("zero_shot", {
        "n": cfg.n,
        "patient_demand": cfg.patient_demand,
        "horizon": cfg.horizon,
        "price": cfg.price,
        "holding_cost": cfg.holding_cost,
        "stockout_penalty": cfg.stockout_penalty,
        "invest_cost": cfg.invest_cost,
        "options": json.dumps(list(cfg.investment_options)),
        "scenario_description": _scenario_description(cfg),
        "schema": json.dumps(schema),
    }, template_dir)
    request = CompletionRequest(
        system_prompt="You are a supply-chain forecasting expert. Reply with JSON only.",
        user_prompt=prompt,
        schema=schema,
    )
    try:
        doc = gateway.complete_structured(request)
    except GatewayError as exc:
        raise BaselineUnavailable(str(exc)) from exc

    periods = sorted(doc["periods"], key=lambda p: p["period"])
    records = []
    for idx, raw in enumerate(periods, start=1):
        flags = []
        implied = max(0.0, raw["total_demand"] - raw["total_supply"])
        if abs(implied - raw["shortage"]) > 1e-9:
            flags.append(f"shortage_inconsistent: stated {raw['shortage']}, "
                         f"implied {implied}")
        records.append(TrajectoryRecord(
            period=raw["period"],
            total_demand=raw["total_demand"],
            total_supply=raw["total_supply"],
            shortage=raw["shortage"],
            unfilled_from_disrupted=0.0,
            buyer_inventory=raw["buyer_inventory"],
            fda_announcement=None,
            disrupted=[],
            new_disruptions=[],
            decisions={"reasoning": raw["reasoning"], "confidence": raw["confidence"]},
            costs={},
            flags=flags,
        ))
        if raw["period"] != idx:
            records[-1].flags.append(f"period_out_of_sequence: {raw['period']}")
    return Trajectory(
        config=cfg,
        seed=cfg.seed,
        policy_ids={"baseline": "zero-shot"},
        records=records,
        scenario_label="zero-shot",
    )


# ------------------------------------------------------------------- analyses

def avg_supply_per_period(traj: Trajectory) -> float:
    """Mean over quarters of the total quantity produced."""
    if not traj.records:
        raise ValueError("empty trajectory")
    return sum(traj.supplies) / len(traj.records)


COMPETITION_BINS = ("{2}", "{3}", "(3,5]", "(5,10]")


def competition_bin(n: int) -> str:
    if n == 2:
        return "{2}"
    if n == 3:
        return "{3}"
    if 3 < n <= 5:
        return "(3,5]"
    if 5 < n <= 10:
        return "(5,10]"
    raise UnbinnableN(f"n={n} outside [2, 10]")


def competition_bins(trajectories: list[Trajectory]) -> dict:
    """Mean per-period supply inside each market-concentration bin."""
    sums: dict[str, list[float]] = {}
    for traj in trajectories:
        label = competition_bin(traj.config.n)
        sums.setdefault(label, []).append(avg_supply_per_period(traj))
    return {
        label: sum(values) / len(values)
        for label, values in sums.items()
    }


def series_csv(traj: Trajectory) -> str:
    """Per-period series as CSV for external plotting tools."""
    lines = ["period,total_demand,total_supply,shortage,buyer_inventory"]
    for r in traj.records:
        lines.append(f"{r.period},{r.total_demand},{r.total_supply},"
                     f"{r.shortage},{r.buyer_inventory}")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"[a-z0-9']+")


@dataclass
class NgramReport:
    unigrams: dict[str, Counter]
    bigrams: dict[str, Counter]
    totals: dict[str, dict]

    def relative_frequency(self, term: str, bin_label: str) -> float:
        kind = "bigrams" if " " in term else "unigrams"
        counts = getattr(self, kind).get(bin_label, Counter())
        total = self.totals.get(bin_label, {}).get(kind, 0)
        if total == 0:
            return 0.0
        return counts[term] / total

    def term_ratio(self, term: str, bin_a: str, bin_b: str) -> float:
        """How much more frequent a term is in bin_a than in bin_b."""
        freq_b = self.relative_frequency(term, bin_b)
        if freq_b == 0:
            return float("inf")
        return self.relative_frequency(term, bin_a) / freq_b


def rationale_ngrams(decisions: list[str], bin_assignment: list[str]) -> NgramReport:
    """Case-folded, punctuation-stripped unigram/bigram counts per bin."""
    if len(decisions) != len(bin_assignment):
        raise ValueError("decisions and bin_assignment must be parallel")
    unigrams: dict[str, Counter] = {}
    bigrams: dict[str, Counter] = {}
    totals: dict[str, dict] = {}
    for text, label in zip(decisions, bin_assignment):
        tokens = _TOKEN.findall((text or "").lower())
        pairs = [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
        unigrams.setdefault(label, Counter()).update(tokens)
        bigrams.setdefault(label, Counter()).update(pairs)
        bucket = totals.setdefault(label, {"unigrams": 0, "bigrams": 0})
        bucket["unigrams"] += len(tokens)
        bucket["bigrams"] += len(pairs)
    return NgramReport(unigrams=unigrams, bigrams=bigrams, totals=totals)
