from __future__ import annotations

import json
import random

import pytest

from pharmsim.agents import (
    Assessment,
    BuyerDecision,
    FdaDecision,
    FdaSignal,
    ManufacturerDecision,
    MarketHistory,
    PolicyUnavailable,
    RoleContext,
    RulePolicy,
    ScriptedPolicy,
    ValidationFailed,
    analyze,
    build_context,
    decide,
    validate_decision,
)
from pharmsim.config import SimConfig
from pharmsim.engine import MarketState
from pharmsim.market import BuyerState, ClearingOutcome, ManufacturerState

RULE = RulePolicy()


def make_world(cfg, period=2, manufacturers=None, buyer=None, last_signal=None,
               last_outcome=None):
    if manufacturers is None:
        base = cfg.patient_demand / cfg.n
        manufacturers = tuple(
            ManufacturerState(id=i, base_capacity=base) for i in range(cfg.n)
        )
    return MarketState(
        period=period,
        manufacturers=tuple(manufacturers),
        buyer=buyer or BuyerState(),
        last_signal=last_signal,
        last_outcome=last_outcome,
    )


def signal(period=2, severity="elevated", text="supply alert"):
    return FdaSignal(period=period, severity=severity, text=text)


# ------------------------------------------------------------------- contexts

def test_manufacturer_context_contains_own_fields_only():
    cfg = SimConfig(n=4)
    allocs = [0.20731, 0.21317, 0.22903, 0.23489]
    manufacturers = [
        ManufacturerState(id=i, base_capacity=0.25, allocated_history=(allocs[i],),
                          capacity_history=(0.25,))
        for i in range(4)
    ]
    sig = signal()
    world = make_world(cfg, manufacturers=manufacturers, last_signal=sig)
    history = MarketHistory(demands=(1.0,), supplies=(0.9,), shortages=(0.1,),
                            signals=(sig,))
    ctx = build_context("manufacturer", world, history, cfg, manufacturer_id=1)
    doc = ctx.as_dict()
    assert doc["own_capacity"] == 0.25
    assert doc["own_allocated_demand_history"] == [0.21317]
    assert doc["fda_signal_text"] == "supply alert"
    text = ctx.as_text()
    for other in (0, 2, 3):
        assert str(allocs[other]) not in text
    # Aggregates are invisible to manufacturers.
    for key in doc:
        assert "total" not in key and "inventory" not in key and "shortage" not in key


def test_buyer_context_has_aggregates_but_no_per_manufacturer_fields():
    cfg = SimConfig(n=3)
    world = make_world(cfg, buyer=BuyerState(inventory=0.25))
    history = MarketHistory(demands=(1.0,), supplies=(0.9,), shortages=(0.1,))
    ctx = build_context("buyer", world, history, cfg)
    doc = ctx.as_dict()
    assert doc["supply_history"] == [0.9]
    assert doc["last_shortage"] == 0.1
    assert doc["inventory"] == 0.25
    assert not any(k.startswith("own_") or "manufacturer" in k or "capacity" in k
                   for k in doc)


def test_fda_context_matches_reported_disruption_shape():
    cfg = SimConfig(n=5)
    manufacturers = [
        ManufacturerState(id=i, base_capacity=0.2,
                          disruption=(0.3, 2) if i in (0, 3) else None)
        for i in range(5)
    ]
    world = make_world(cfg, manufacturers=manufacturers)
    history = MarketHistory(demands=(1.0,), supplies=(1.0,), shortages=(0.0,),
                            new_disruptions=(3,))
    ctx = build_context("fda", world, history, cfg)
    doc = ctx.as_dict()
    assert doc["disrupted_manufacturers"] == [0, 3]
    assert doc["newly_disrupted_manufacturers"] == [3]
    assert doc["market_size"] == 5
    assert doc["last_total_demand"] == 1.0
    assert doc["last_total_supply"] == 1.0
    assert not any("capacity" in k or "investment" in k or "inventory" in k for k in doc)


def _sentinel(rng):
    return round(rng.uniform(0.1, 0.9), 9) + rng.randint(1, 9) * 1e-11


def build_sentinel_world(rng, cfg):
    """World state where every private quantity is a distinctive float."""
    sentinels = {}
    manufacturers = []
    for i in range(cfg.n):
        cap = _sentinel(rng)
        alloc = _sentinel(rng)
        invest = _sentinel(rng)
        profit = _sentinel(rng)
        magnitude = round(rng.uniform(0.11, 0.89), 9)
        disrupted = rng.random() < 0.5
        manufacturers.append(ManufacturerState(
            id=i,
            base_capacity=cap,
            pending_investment=(invest, 0),
            disruption=(magnitude, 2) if disrupted else None,
            allocated_history=(alloc,),
            capacity_history=(cap,),
            cumulative_profit=profit,
        ))
        sentinels[f"capacity_{i}"] = cap
        sentinels[f"alloc_{i}"] = alloc
        sentinels[f"invest_{i}"] = invest
        sentinels[f"profit_{i}"] = profit
        if disrupted:
            sentinels[f"magnitude_{i}"] = magnitude
    inventory = _sentinel(rng)
    sentinels["buyer_inventory"] = inventory
    buyer = BuyerState(inventory=inventory, last_received=_sentinel(rng))
    totals = {"demand": _sentinel(rng), "supply": _sentinel(rng),
              "shortage": _sentinel(rng)}
    sentinels["total_demand"] = totals["demand"]
    sentinels["total_supply"] = totals["supply"]
    sentinels["total_shortage"] = totals["shortage"]
    world = make_world(cfg, manufacturers=manufacturers, buyer=buyer)
    history = MarketHistory(
        demands=(totals["demand"],),
        supplies=(totals["supply"],),
        shortages=(totals["shortage"],),
        signals=(signal(),),
        new_disruptions=tuple(i for i in range(cfg.n) if manufacturers[i].disrupted),
    )
    return world, history, sentinels


def forbidden_sentinels(role, mfr_id, cfg, sentinels):
    names = []
    for i in range(cfg.n):
        foreign = not (role == "manufacturer" and i == mfr_id)
        if role == "fda":
            # The regulator learns who is disrupted, never private magnitudes.
            names += [f"capacity_{i}", f"alloc_{i}", f"invest_{i}", f"profit_{i}",
                      f"magnitude_{i}"]
        elif foreign:
            names += [n for n in (f"capacity_{i}", f"alloc_{i}", f"invest_{i}",
                                  f"profit_{i}", f"magnitude_{i}") if n in sentinels or True]
    if role != "buyer":
        names.append("buyer_inventory")
    if role == "manufacturer":
        names += ["total_demand", "total_supply", "total_shortage"]
    return [n for n in names if n in sentinels]


@pytest.mark.parametrize("seed", range(25))
def test_no_information_leak_across_roles(seed):
    rng = random.Random(seed)
    cfg = SimConfig(n=rng.randint(2, 6))
    world, history, sentinels = build_sentinel_world(rng, cfg)
    views = {("buyer", None): build_context("buyer", world, history, cfg),
             ("fda", None): build_context("fda", world, history, cfg)}
    for i in range(cfg.n):
        views[("manufacturer", i)] = build_context("manufacturer", world, history, cfg,
                                                   manufacturer_id=i)
    for (role, mfr_id), ctx in views.items():
        text = ctx.as_text()
        for name in forbidden_sentinels(role, mfr_id, cfg, sentinels):
            assert json.dumps(sentinels[name]) not in text, (
                f"{name} leaked into the {role}{'' if mfr_id is None else f' {mfr_id}'} context"
            )


# ------------------------------------------------------------------ rule tables

def make_buyer_ctx(cfg, shortage, demand=1.0, severity="elevated", demands=None):
    world = make_world(cfg)
    signals = (signal(severity=severity),) if severity != "none" else ()
    history = MarketHistory(
        demands=tuple(demands) if demands else (demand,),
        supplies=(demand - shortage,),
        shortages=(shortage,),
        signals=signals,
    )
    return build_context("buyer", world, history, cfg)


def test_rule_analyze_high_risk_from_five_percent_shortage():
    cfg = SimConfig(n=4)
    ctx = make_buyer_ctx(cfg, shortage=0.1, demand=1.0)
    assessment = analyze(RULE, ctx, cfg)
    assert assessment.shortage_risk == "high"


def test_rule_analyze_low_risk_without_shortage_or_disruption():
    cfg = SimConfig(n=4)
    world = make_world(cfg)
    history = MarketHistory(demands=(1.0,), supplies=(1.0,), shortages=(0.0,))
    assessment = analyze(RULE, build_context("fda", world, history, cfg), cfg)
    assert assessment.shortage_risk == "low"
    assert assessment.urgency == "routine"


def test_rule_analyze_moderate_band():
    cfg = SimConfig(n=4)
    ctx = make_buyer_ctx(cfg, shortage=0.02, demand=1.0)
    assert analyze(RULE, ctx, cfg).shortage_risk == "moderate"


def test_rule_manufacturer_invests_30_when_elevated_and_fully_allocated():
    cfg = SimConfig(n=4)
    sig = signal(period=2, severity="elevated")
    manufacturers = [
        ManufacturerState(id=i, base_capacity=0.25, allocated_history=(0.25,),
                          capacity_history=(0.25,))
        for i in range(4)
    ]
    world = make_world(cfg, period=2, manufacturers=manufacturers, last_signal=sig)
    history = MarketHistory(demands=(1.0,), supplies=(0.9,), shortages=(0.1,),
                            signals=(sig,))
    ctx = build_context("manufacturer", world, history, cfg, manufacturer_id=0)
    assessment = analyze(RULE, ctx, cfg)
    decision, warnings = decide(RULE, ctx, assessment, cfg)
    assert decision.invest_fraction == 0.30
    assert warnings == []
    assert decision.confidence in ("low", "moderate", "high")


def test_rule_manufacturer_hedges_on_monitoring_signal():
    cfg = SimConfig(n=4)
    sig = signal(period=2, severity="monitoring")
    world = make_world(cfg, period=2, last_signal=sig)
    history = MarketHistory(signals=(sig,))
    ctx = build_context("manufacturer", world, history, cfg, manufacturer_id=1)
    decision, _ = decide(RULE, ctx, analyze(RULE, ctx, cfg), cfg)
    assert decision.invest_fraction == 0.10


def test_rule_manufacturer_ignores_stale_signal():
    cfg = SimConfig(n=4)
    sig = signal(period=1, severity="elevated")
    manufacturers = [
        ManufacturerState(id=i, base_capacity=0.25, allocated_history=(0.25,),
                          capacity_history=(0.25,))
        for i in range(4)
    ]
    world = make_world(cfg, period=3, manufacturers=manufacturers, last_signal=sig)
    history = MarketHistory(demands=(1.0,), supplies=(1.0,), shortages=(0.0,),
                            signals=(sig,))
    ctx = build_context("manufacturer", world, history, cfg, manufacturer_id=0)
    decision, _ = decide(RULE, ctx, analyze(RULE, ctx, cfg), cfg)
    assert decision.invest_fraction == 0.0


def test_rule_buyer_orders_13x_under_high_risk_with_three_suppliers():
    cfg = SimConfig(n=3)
    ctx = make_buyer_ctx(cfg, shortage=0.1, demand=1.0, severity="monitoring")
    assessment = analyze(RULE, ctx, cfg)
    assert assessment.shortage_risk == "high"
    decision, _ = decide(RULE, ctx, assessment, cfg)
    assert decision.order_quantity == pytest.approx(1.3)


def test_rule_buyer_orders_11x_under_moderate_risk_with_three_suppliers():
    cfg = SimConfig(n=3)
    ctx = make_buyer_ctx(cfg, shortage=0.02, demand=1.0)
    decision, _ = decide(RULE, ctx, analyze(RULE, ctx, cfg), cfg)
    assert decision.order_quantity == pytest.approx(1.1)


def test_rule_buyer_stockpile_shrinks_with_supplier_count():
    orders = []
    for n in (2, 3, 5, 10):
        cfg = SimConfig(n=n)
        ctx = make_buyer_ctx(cfg, shortage=0.1, demand=1.0)
        decision, _ = decide(RULE, ctx, analyze(RULE, ctx, cfg), cfg)
        orders.append(decision.order_quantity)
    assert orders == sorted(orders, reverse=True)
    assert all(o > 1.0 for o in orders)


def test_rule_fda_silent_in_equilibrium():
    cfg = SimConfig(n=4)
    world = make_world(cfg)
    history = MarketHistory(demands=(1.0,), supplies=(1.0,), shortages=(0.0,))
    ctx = build_context("fda", world, history, cfg)
    decision, _ = decide(RULE, ctx, analyze(RULE, ctx, cfg), cfg)
    assert decision.announce is False
    assert decision.severity == "none"
    assert decision.text == ""


def test_rule_fda_severity_ladder():
    cfg = SimConfig(n=4)
    cases = [
        (0.0, 1.0, True, "monitoring"),
        (0.1, 1.0, False, "elevated"),
        (0.25, 1.0, False, "high_alert"),
    ]
    for shortage, demand, disrupted, expected in cases:
        manufacturers = [
            ManufacturerState(id=i, base_capacity=0.25,
                              disruption=(0.2, 2) if disrupted and i == 0 else None)
            for i in range(4)
        ]
        world = make_world(cfg, manufacturers=manufacturers)
        history = MarketHistory(demands=(demand,), supplies=(demand - shortage,),
                                shortages=(shortage,))
        ctx = build_context("fda", world, history, cfg)
        decision, _ = decide(RULE, ctx, analyze(RULE, ctx, cfg), cfg)
        assert decision.severity == expected


def test_rule_policy_is_deterministic():
    cfg = SimConfig(n=3)
    ctx = make_buyer_ctx(cfg, shortage=0.07)
    first = decide(RULE, ctx, analyze(RULE, ctx, cfg), cfg)
    second = decide(RulePolicy(), ctx, analyze(RulePolicy(), ctx, cfg), cfg)
    assert first == second


# ------------------------------------------------------------------ validation

def test_validate_decision_missing_confidence():
    cfg = SimConfig()
    with pytest.raises(ValidationFailed) as err:
        validate_decision({"invest_fraction": 0.1, "rationale": "r"}, "manufacturer", cfg)
    assert err.value.keys == ["confidence"]


def test_validate_decision_clamps_to_nearest_option():
    cfg = SimConfig()
    decision, warnings = validate_decision(
        {"invest_fraction": 0.35, "confidence": "moderate", "rationale": "r"},
        "manufacturer", cfg,
    )
    assert decision.invest_fraction == 0.3
    assert warnings and "clamped" in warnings[0]


def test_validate_decision_valid_doc_unchanged():
    cfg = SimConfig()
    raw = {"invest_fraction": 0.2, "confidence": "high", "rationale": "fine"}
    decision, warnings = validate_decision(raw, "manufacturer", cfg)
    assert decision == ManufacturerDecision(0.2, "high", "fine")
    assert warnings == []


def test_validate_decision_clamps_buyer_order_into_bounds():
    cfg = SimConfig()
    decision, warnings = validate_decision(
        {"order_quantity": 5.0, "confidence": "low", "rationale": "panic"}, "buyer", cfg
    )
    assert decision.order_quantity == 2.0
    assert warnings


def test_validate_decision_rejects_illegal_severity():
    cfg = SimConfig()
    with pytest.raises(ValidationFailed) as err:
        validate_decision(
            {"announce": True, "severity": "critical", "text": "x", "rationale": "r"},
            "fda", cfg,
        )
    assert err.value.keys == ["severity"]


def test_validate_decision_normalizes_silent_announcement():
    cfg = SimConfig()
    decision, warnings = validate_decision(
        {"announce": False, "severity": "elevated", "text": "leftover", "rationale": "r"},
        "fda", cfg,
    )
    assert decision.severity == "none" and decision.text == ""
    assert warnings


# -------------------------------------------------------------------- scripted

def test_scripted_policy_replays_recorded_decisions():
    cfg = SimConfig(n=2)
    records = [{
        "period": 1,
        "decisions": {
            "fda": {"announce": True, "severity": "monitoring", "text": "watching",
                    "confidence": "high", "rationale": "reports",
                    "assessment": {"shortage_risk": "moderate", "demand_trend": "stable",
                                   "urgency": "elevated", "summary": "s"}},
            "manufacturers": [
                {"manufacturer_id": 0, "invest_fraction": 0.1, "confidence": "low",
                 "rationale": "hedge"},
                {"manufacturer_id": 1, "invest_fraction": 0.0, "confidence": "high",
                 "rationale": "hold"},
            ],
            "buyer": {"order_quantity": 1.1, "confidence": "moderate", "rationale": "stock"},
        },
    }]
    policy = ScriptedPolicy.from_trajectory(records)
    world = make_world(cfg, period=1)
    history = MarketHistory()
    ctx = build_context("fda", world, history, cfg)
    assessment = analyze(policy, ctx, cfg)
    assert assessment == Assessment("fda", "moderate", "stable", "elevated", "s")
    decision, _ = decide(policy, ctx, assessment, cfg)
    assert decision == FdaDecision(True, "monitoring", "watching", "reports", "high")
    mctx = build_context("manufacturer", world, history, cfg, manufacturer_id=1)
    mdec, _ = decide(policy, mctx, analyze(policy, mctx, cfg), cfg)
    assert mdec.invest_fraction == 0.0


def test_scripted_policy_without_entry_is_unavailable():
    policy = ScriptedPolicy({})
    cfg = SimConfig(n=2)
    ctx = build_context("buyer", make_world(cfg), MarketHistory(), cfg)
    with pytest.raises(PolicyUnavailable):
        decide(policy, ctx, analyze(policy, ctx, cfg), cfg)
