"""Simulation controller.

Owns the per-quarter timeline: investment maturation, stochastic or forced
disruptions, the regulator's announcement, simultaneous manufacturer and buyer
decisions against one immutable snapshot, market clearing, accounting, and
trajectory logging.  A session can be driven automatically or paused at the
regulator step so a human can supply that decision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import agents
from .agents import (
    Assessment,
    FdaDecision,
    FdaSignal,
    MarketHistory,
    PolicyUnavailable,
    RulePolicy,
    build_context,
)
from .config import ConfigInvalid, ForcedDisruption, SimConfig
from .market import (
    BuyerState,
    ClearingOutcome,
    ManufacturerState,
    allocate,
    buyer_accounting,
    effective_capacity,
    manufacturer_accounting,
    mature_investments,
    tick_disruptions,
)


class GatewayExhausted(RuntimeError):
    """Raised instead of falling back to rules when fallback is disabled."""


class GtUnusable(ValueError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class MarketState:
    """Immutable pre-decision snapshot of one quarter."""

    period: int
    manufacturers: tuple[ManufacturerState, ...]
    buyer: BuyerState
    last_signal: FdaSignal | None
    last_outcome: ClearingOutcome | None


@dataclass
class TrajectoryRecord:
    period: int
    total_demand: float
    total_supply: float
    shortage: float
    unfilled_from_disrupted: float
    buyer_inventory: float
    fda_announcement: FdaSignal | None
    disrupted: list[int]
    new_disruptions: list[int]
    decisions: dict
    costs: dict
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "total_demand": self.total_demand,
            "total_supply": self.total_supply,
            "shortage": self.shortage,
            "unfilled_from_disrupted": self.unfilled_from_disrupted,
            "buyer_inventory": self.buyer_inventory,
            "fda_announcement": self.fda_announcement.to_dict() if self.fda_announcement else None,
            "disrupted": self.disrupted,
            "new_disruptions": self.new_disruptions,
            "decisions": self.decisions,
            "costs": self.costs,
            "flags": self.flags,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TrajectoryRecord":
        ann = raw.get("fda_announcement")
        return cls(
            period=raw["period"],
            total_demand=raw["total_demand"],
            total_supply=raw["total_supply"],
            shortage=raw["shortage"],
            unfilled_from_disrupted=raw.get("unfilled_from_disrupted", 0.0),
            buyer_inventory=raw["buyer_inventory"],
            fda_announcement=FdaSignal.from_dict(ann) if ann else None,
            disrupted=list(raw.get("disrupted", [])),
            new_disruptions=list(raw.get("new_disruptions", [])),
            decisions=raw.get("decisions", {}),
            costs=raw.get("costs", {}),
            flags=list(raw.get("flags", [])),
        )


@dataclass
class Trajectory:
    """One full simulation run: the unit of evaluation."""

    config: SimConfig
    seed: int
    policy_ids: dict
    records: list[TrajectoryRecord]
    scenario_label: str = "simulation"

    @property
    def shortages(self) -> list[float]:
        return [r.shortage for r in self.records]

    @property
    def supplies(self) -> list[float]:
        return [r.total_supply for r in self.records]

    def announcement_flags(self) -> list[bool]:
        return [r.fda_announcement is not None for r in self.records]

    def records_jsonl(self) -> str:
        return "".join(
            json.dumps(r.to_dict(), separators=(",", ":")) + "\n" for r in self.records
        )

    def meta_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "policies": self.policy_ids,
            "scenario_label": self.scenario_label,
        }

    def write(self, jsonl_path: str | Path) -> Path:
        """Write records as JSON lines plus a sidecar meta header."""
        jsonl_path = Path(jsonl_path)
        jsonl_path.parent.mkdir(parents=True, exist_ok=True)
        jsonl_path.write_text(self.records_jsonl(), encoding="utf-8")
        meta_path = jsonl_path.with_suffix(".meta.json")
        meta_path.write_text(
            json.dumps(self.meta_dict(), indent=2, sort_keys=False) + "\n", encoding="utf-8"
        )
        return jsonl_path

    @classmethod
    def load(cls, jsonl_path: str | Path) -> "Trajectory":
        jsonl_path = Path(jsonl_path)
        meta = json.loads(jsonl_path.with_suffix(".meta.json").read_text(encoding="utf-8"))
        records = [
            TrajectoryRecord.from_dict(json.loads(line))
            for line in jsonl_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        return cls(
            config=SimConfig.from_dict(meta["config"]),
            seed=meta["seed"],
            policy_ids=meta.get("policies", {}),
            records=records,
            scenario_label=meta.get("scenario_label", "simulation"),
        )


@dataclass
class PolicySet:
    fda: object
    manufacturer: object
    buyer: object
    label: str = "rule"

    def ids(self) -> dict:
        return {
            "fda": getattr(self.fda, "policy_id", "unknown"),
            "manufacturer": getattr(self.manufacturer, "policy_id", "unknown"),
            "buyer": getattr(self.buyer, "policy_id", "unknown"),
        }

    @classmethod
    def rule(cls) -> "PolicySet":
        policy = RulePolicy()
        return cls(fda=policy, manufacturer=policy, buyer=policy, label="rule")

    @classmethod
    def llm(cls, gateway, template_dir=None) -> "PolicySet":
        policy = agents.LlmPolicy(gateway, template_dir)
        return cls(fda=policy, manufacturer=policy, buyer=policy, label="llm")

    @classmethod
    def scripted(cls, records: list[dict]) -> "PolicySet":
        policy = agents.ScriptedPolicy.from_trajectory(records)
        return cls(fda=policy, manufacturer=policy, buyer=policy, label="script")


class SimulationSession:
    """Drives one simulation, quarter by quarter.

    ``begin_period`` runs maturation and the disruption phase and stops right
    before the regulator decision; ``complete_period`` takes the regulator's
    decision (from a policy or from a human) and plays out the rest of the
    quarter.  ``run_simulation`` is a loop over the two, so an interactive
    session and a batch run follow the identical code path.
    """

    def __init__(
        self,
        cfg: SimConfig,
        policies: PolicySet,
        seed: int | None = None,
        no_fallback: bool = False,
    ):
        cfg.validate()
        self.cfg = cfg
        self.policies = policies
        self.seed = cfg.seed if seed is None else seed
        self.no_fallback = no_fallback

        base = cfg.patient_demand / cfg.n
        self.manufacturers = [ManufacturerState(id=i, base_capacity=base) for i in range(cfg.n)]
        self.buyer = BuyerState()
        self.period = 0
        self.finished = False
        self.awaiting_fda = False
        self.records: list[TrajectoryRecord] = []
        self.history = MarketHistory()
        self._signals: list[FdaSignal] = []
        self._last_outcome: ClearingOutcome | None = None
        self._seq = 0
        self._rule = RulePolicy()
        # One independent, named RNG stream per manufacturer, split off a
        # single root seed so runs are reproducible across platforms.
        children = np.random.SeedSequence(self.seed).spawn(cfg.n)
        self._streams = [np.random.Generator(np.random.PCG64(c)) for c in children]

    # ------------------------------------------------------------- plumbing

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def snapshot(self) -> MarketState:
        return MarketState(
            period=self.period,
            manufacturers=tuple(self.manufacturers),
            buyer=self.buyer,
            last_signal=self._signals[-1] if self._signals else None,
            last_outcome=self._last_outcome,
        )

    def _run_policy(self, policy, ctx, cfg):
        """Analyze + decide with rule fallback; returns decision bundle."""
        fallback = False
        try:
            assessment = agents.analyze(policy, ctx, cfg)
            decision, warnings = agents.decide(policy, ctx, assessment, cfg)
        except PolicyUnavailable as exc:
            if self.no_fallback:
                raise GatewayExhausted(str(exc)) from exc
            fallback = True
            assessment = agents.analyze(self._rule, ctx, cfg)
            decision, warnings = agents.decide(self._rule, ctx, assessment, cfg)
        return assessment, decision, warnings, fallback

    # ------------------------------------------------------------- timeline

    def begin_period(self) -> None:
        """Steps (a) and (b): capacity maturation, then the disruption phase."""
        if self.finished:
            raise RuntimeError("session already finished")
        if self.awaiting_fda:
            raise RuntimeError("period already begun; awaiting the regulator decision")
        self.period += 1
        self.manufacturers = mature_investments(self.manufacturers)

        new_ids: list[int] = []
        if self.period == 1 and self.cfg.forced is not None:
            duration = self.cfg.forced.duration or self.cfg.horizon
            for i, delta in self.cfg.forced.deltas:
                self.manufacturers[i] = replace(
                    self.manufacturers[i], disruption=(delta, duration)
                )
                new_ids.append(i)
        if self.cfg.disruption_prob > 0:
            for i in range(self.cfg.n):
                if self.manufacturers[i].disrupted:
                    continue
                if self._streams[i].random() < self.cfg.disruption_prob:
                    duration = int(self._streams[i].integers(1, self.cfg.horizon + 1))
                    self.manufacturers[i] = replace(
                        self.manufacturers[i],
                        disruption=(self.cfg.disruption_magnitude, duration),
                    )
                    new_ids.append(i)

        # Newly disrupted manufacturers are reported to the regulator.
        self.history = MarketHistory(
            demands=self.history.demands,
            supplies=self.history.supplies,
            shortages=self.history.shortages,
            signals=tuple(self._signals),
            new_disruptions=tuple(sorted(new_ids)),
        )
        self.awaiting_fda = True

    def fda_context(self) -> agents.RoleContext:
        if not self.awaiting_fda:
            raise RuntimeError("no pending regulator decision")
        return build_context("fda", self.snapshot(), self.history, self.cfg)

    def complete_period(
        self,
        fda_decision: FdaDecision | None = None,
        fda_assessment: Assessment | None = None,
    ) -> TrajectoryRecord:
        """Steps (c) through (f) of the quarter.

        ``fda_decision`` overrides the regulator policy (interactive mode);
        when omitted the session's own policy decides.
        """
        if not self.awaiting_fda:
            raise RuntimeError("begin_period must run first")
        cfg = self.cfg
        flags: list[str] = []

        ctx_fda = self.fda_context()
        if fda_decision is None:
            fda_assessment, fda_decision, fda_warnings, fell_back = self._run_policy(
                self.policies.fda, ctx_fda, cfg
            )
            if fell_back:
                flags.append("fda_fallback")
        else:
            fda_warnings = []
            if fda_assessment is None:
                fda_assessment = agents.analyze(self._rule, ctx_fda, cfg)
        fda_seq = self._next_seq()

        signal = None
        if fda_decision.announce:
            signal = FdaSignal(period=self.period, severity=fda_decision.severity,
                               text=fda_decision.text)
            self._signals.append(signal)
            self.history = MarketHistory(
                demands=self.history.demands,
                supplies=self.history.supplies,
                shortages=self.history.shortages,
                signals=tuple(self._signals),
                new_disruptions=self.history.new_disruptions,
            )

        # Manufacturers and the buyer all decide from this one snapshot.
        world = self.snapshot()
        mfr_bundles = []
        for i in range(cfg.n):
            ctx = build_context("manufacturer", world, self.history, cfg, manufacturer_id=i)
            assessment, decision, warnings, fell_back = self._run_policy(
                self.policies.manufacturer, ctx, cfg
            )
            if fell_back:
                flags.append(f"manufacturer_{i}_fallback")
            mfr_bundles.append((assessment, decision, warnings, self._next_seq()))
        ctx_buyer = build_context("buyer", world, self.history, cfg)
        buyer_assessment, buyer_decision, buyer_warnings, fell_back = self._run_policy(
            self.policies.buyer, ctx_buyer, cfg
        )
        if fell_back:
            flags.append("buyer_fallback")
        buyer_seq = self._next_seq()

        # Apply investments: cost is charged now, capacity arrives next quarter.
        invested_units = []
        for i, (assessment, decision, warnings, seq) in enumerate(mfr_bundles):
            state = self.manufacturers[i]
            units = decision.invest_fraction * state.owned_capacity
            invested_units.append(units)
            if units > 0:
                self.manufacturers[i] = replace(state, pending_investment=(units, 0))

        demand = buyer_decision.order_quantity
        outcome = allocate(demand, self.manufacturers, period=self.period)
        self._check_outcome(demand, outcome)

        acct = buyer_accounting(outcome.total_supply, cfg.patient_demand,
                                self.buyer.inventory, cfg)
        self.buyer = BuyerState(
            inventory=acct.new_inventory,
            cumulative_cost=self.buyer.cumulative_cost + acct.total_cost,
            last_received=outcome.total_supply,
            last_order=demand,
        )

        profit_deltas = []
        for i in range(cfg.n):
            state = self.manufacturers[i]
            q = outcome.per_mfr_quantity[i]
            delta = manufacturer_accounting(q, invested_units[i], cfg)
            profit_deltas.append(delta)
            self.manufacturers[i] = replace(
                state,
                allocated_history=state.allocated_history + (q,),
                capacity_history=state.capacity_history + (effective_capacity(state),),
                cumulative_profit=state.cumulative_profit + delta,
            )

        disrupted_ids = sorted(s.id for s in self.manufacturers if s.disrupted)
        self.manufacturers = tick_disruptions(self.manufacturers)

        self.history = MarketHistory(
            demands=self.history.demands + (demand,),
            supplies=self.history.supplies + (outcome.total_supply,),
            shortages=self.history.shortages + (outcome.shortage,),
            signals=tuple(self._signals),
            new_disruptions=self.history.new_disruptions,
        )
        self._last_outcome = outcome

        record = TrajectoryRecord(
            period=self.period,
            total_demand=demand,
            total_supply=outcome.total_supply,
            shortage=outcome.shortage,
            unfilled_from_disrupted=outcome.unfilled_from_disrupted,
            buyer_inventory=self.buyer.inventory,
            fda_announcement=signal,
            disrupted=disrupted_ids,
            new_disruptions=list(self.history.new_disruptions),
            decisions={
                "fda": {
                    "seq": fda_seq,
                    **fda_decision.to_dict(),
                    "assessment": fda_assessment.to_dict(),
                    "warnings": fda_warnings,
                },
                "manufacturers": [
                    {
                        "manufacturer_id": i,
                        "seq": seq,
                        **decision.to_dict(),
                        "invested_units": invested_units[i],
                        "assessment": assessment.to_dict(),
                        "warnings": warnings,
                    }
                    for i, (assessment, decision, warnings, seq) in enumerate(mfr_bundles)
                ],
                "buyer": {
                    "seq": buyer_seq,
                    **buyer_decision.to_dict(),
                    "assessment": buyer_assessment.to_dict(),
                    "warnings": buyer_warnings,
                },
            },
            costs={
                "buyer": {
                    "purchase_cost": acct.purchase_cost,
                    "holding_cost_paid": acct.holding_cost_paid,
                    "stockout_penalty": acct.stockout_penalty,
                    "unmet_patient_demand": acct.unmet_patient_demand,
                    "total_cost": acct.total_cost,
                },
                "manufacturer_profit_deltas": profit_deltas,
                "manufacturer_cumulative_profit": [
                    s.cumulative_profit for s in self.manufacturers
                ],
            },
            flags=flags,
        )
        self.records.append(record)
        self.awaiting_fda = False
        if self.period >= cfg.horizon:
            self.finished = True
        return record

    def _check_outcome(self, demand: float, outcome: ClearingOutcome) -> None:
        """Re-check the market-core conservation invariants at log time."""
        tol = 1e-9
        caps = [effective_capacity(s) for s in self.manufacturers]
        assert outcome.total_supply <= min(demand, sum(caps)) + tol
        assert abs(outcome.shortage - max(0.0, demand - outcome.total_supply)) <= tol
        assert all(q <= c + tol for q, c in zip(outcome.per_mfr_quantity, caps))

    def step(self) -> TrajectoryRecord:
        """Advance one quarter with the session's own regulator policy."""
        self.begin_period()
        return self.complete_period()

    def trajectory(self) -> Trajectory:
        return Trajectory(
            config=self.cfg,
            seed=self.seed,
            policy_ids=self.policies.ids(),
            records=self.records,
        )


def run_simulation(cfg: SimConfig, policies: PolicySet, seed: int | None = None,
                   no_fallback: bool = False) -> Trajectory:
    """Run one full session; identical inputs produce identical trajectories."""
    session = SimulationSession(cfg, policies, seed=seed, no_fallback=no_fallback)
    while not session.finished:
        session.step()
    return session.trajectory()


def run_replications(cfg: SimConfig, policies: PolicySet, k: int | None = None,
                     no_fallback: bool = False) -> list[Trajectory]:
    """Run k replicate sessions with seeds seed, seed+1, ..., seed+k-1."""
    k = cfg.replications if k is None else k
    if k < 1:
        raise ConfigInvalid("replications must be at least 1")
    return [
        run_simulation(cfg, policies, seed=cfg.seed + i, no_fallback=no_fallback)
        for i in range(k)
    ]


def scenario_from_gt(gt) -> SimConfig:
    """Build the simulation scenario matching one curated ground-truth case.

    Discontinuation cases become a forced disruption on the affected
    manufacturers for the whole horizon, sized by their discontinued-package
    proportions; no-reason cases use the stochastic default parameters.
    """
    n = int(gt.n)
    horizon = int(gt.T)
    if not getattr(gt, "resolved", True):
        raise GtUnusable("unresolved")
    if n < 2:
        raise GtUnusable("monopoly")
    if horizon > 12:
        raise GtUnusable("overlong")
    if horizon < 4:
        raise GtUnusable("horizon below 4 quarters")

    if gt.dataset == "FDA-Disc":
        deltas = tuple(
            (i, float(d)) for i, d in enumerate(gt.per_mfr_delta or []) if d > 0
        )
        if not deltas:
            raise GtUnusable("no positive disruption magnitude")
        return SimConfig(
            n=n,
            horizon=horizon,
            disruption_prob=0.0,
            forced=ForcedDisruption(deltas=deltas, duration=horizon),
            case_id=gt.case_id,
        ).validate()
    return SimConfig(
        n=n,
        horizon=horizon,
        disruption_prob=0.05,
        disruption_magnitude=0.2,
        case_id=gt.case_id,
    ).validate()
