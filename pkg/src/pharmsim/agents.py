"""Role-specific decision agents.

Each role (manufacturer, buyer, regulator) follows a two-stage pipeline:
``analyze`` turns a strictly scoped context document into a structured
assessment, ``decide`` turns the assessment into a typed decision.  Backends
are interchangeable: a deterministic rule table, a scripted replay, or an LLM
behind the gateway.  Context builders enforce the information boundaries of
the game: manufacturers see only their own plant plus public announcements,
the buyer sees aggregates plus its own stock, the regulator sees reported
disruptions and aggregates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING

from .config import SimConfig
from .gateway import (
    Gateway,
    GatewayError,
    render_template,
)
from .market import ManufacturerState, effective_capacity

if TYPE_CHECKING:  # pragma: no cover - typing only, avoids an import cycle
    from .engine import MarketState

ROLES = ("manufacturer", "buyer", "fda")
RISK_LEVELS = ("low", "moderate", "high")
TREND_LEVELS = ("falling", "stable", "rising")
URGENCY_LEVELS = ("routine", "elevated", "high")
CONFIDENCE_LEVELS = ("low", "moderate", "high")
SEVERITY_LEVELS = ("none", "monitoring", "elevated", "high_alert")

_URGENCY_TAG = {
    "monitoring": "routine",
    "elevated": "elevated",
    "high_alert": "high-alert",
}


class PolicyUnavailable(Exception):
    """The policy backend cannot produce a decision (e.g. gateway exhausted)."""


class ValidationFailed(Exception):
    def __init__(self, keys: list[str]):
        super().__init__(f"invalid decision document, offending keys: {keys}")
        self.keys = keys


@dataclass(frozen=True)
class FdaSignal:
    """A public announcement as it enters the market record."""

    period: int
    severity: str
    text: str
    urgency: str = ""

    def __post_init__(self):
        if self.severity == "none":
            raise ValueError("a severity-none decision is never materialized as a signal")
        if not self.urgency:
            object.__setattr__(self, "urgency", _URGENCY_TAG[self.severity])

    def to_dict(self) -> dict:
        return {"period": self.period, "severity": self.severity,
                "urgency": self.urgency, "text": self.text}

    @classmethod
    def from_dict(cls, raw: dict) -> "FdaSignal":
        return cls(period=raw["period"], severity=raw["severity"],
                   text=raw.get("text", ""), urgency=raw.get("urgency", ""))


@dataclass(frozen=True)
class MarketHistory:
    """Aggregate series and announcement log maintained by the engine."""

    demands: tuple[float, ...] = ()
    supplies: tuple[float, ...] = ()
    shortages: tuple[float, ...] = ()
    signals: tuple[FdaSignal, ...] = ()
    new_disruptions: tuple[int, ...] = ()


@dataclass(frozen=True)
class RoleContext:
    """What one role is allowed to see this quarter, as an ordered document."""

    role: str
    period: int
    manufacturer_id: int | None
    entries: tuple[tuple[str, object], ...]

    def get(self, key: str, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default

    def as_text(self) -> str:
        return "\n".join(f"{k}: {json.dumps(v)}" for k, v in self.entries)

    def as_dict(self) -> dict:
        return dict(self.entries)


@dataclass(frozen=True)
class Assessment:
    role: str
    shortage_risk: str
    demand_trend: str
    urgency: str
    summary: str

    def as_text(self) -> str:
        parts = [f"shortage_risk: {self.shortage_risk}", f"demand_trend: {self.demand_trend}"]
        if self.role == "fda":
            parts.append(f"urgency: {self.urgency}")
        parts.append(f"summary: {self.summary}")
        return "\n".join(parts)

    def to_dict(self) -> dict:
        out = {"shortage_risk": self.shortage_risk, "demand_trend": self.demand_trend}
        if self.role == "fda":
            out["urgency"] = self.urgency
        out["summary"] = self.summary
        return out


@dataclass(frozen=True)
class ManufacturerDecision:
    invest_fraction: float
    confidence: str
    rationale: str

    def to_dict(self) -> dict:
        return {"invest_fraction": self.invest_fraction, "confidence": self.confidence,
                "rationale": self.rationale}


@dataclass(frozen=True)
class BuyerDecision:
    order_quantity: float
    confidence: str
    rationale: str

    def to_dict(self) -> dict:
        return {"order_quantity": self.order_quantity, "confidence": self.confidence,
                "rationale": self.rationale}


@dataclass(frozen=True)
class FdaDecision:
    announce: bool
    severity: str
    text: str
    rationale: str
    confidence: str = "moderate"

    def to_dict(self) -> dict:
        return {"announce": self.announce, "severity": self.severity, "text": self.text,
                "confidence": self.confidence, "rationale": self.rationale}


# ------------------------------------------------------------------- contexts

def _signal_entries(history: MarketHistory) -> list[tuple[str, object]]:
    latest = history.signals[-1] if history.signals else None
    prior = max(len(history.signals) - 1, 0)
    return [
        ("fda_signal_severity", latest.severity if latest else "none"),
        ("fda_signal_urgency", latest.urgency if latest else ""),
        ("fda_signal_text", latest.text if latest else ""),
        ("fda_signal_period", latest.period if latest else None),
        ("fda_prior_announcements", prior),
    ]


def build_context(
    role: str,
    world: "MarketState",
    history: MarketHistory,
    cfg: SimConfig,
    manufacturer_id: int | None = None,
) -> RoleContext:
    """Assemble the pre-decision context for one role.

    The entry list is the complete surface that a policy backend may read or
    serialize; anything not listed here is invisible to the role by
    construction.
    """
    period = world.period
    common: list[tuple[str, object]] = [
        ("period", period),
        ("horizon", cfg.horizon),
        ("market_size", cfg.n),
        ("patient_demand", cfg.patient_demand),
    ]
    if role == "manufacturer":
        if manufacturer_id is None:
            raise ValueError("manufacturer context needs a manufacturer_id")
        state = world.manufacturers[manufacturer_id]
        last_alloc = state.allocated_history[-1] if state.allocated_history else None
        last_cap = state.capacity_history[-1] if state.capacity_history else None
        utilization = None
        if last_alloc is not None and last_cap:
            utilization = last_alloc / last_cap
        latest = history.signals[-1] if history.signals else None
        entries = common + [
            ("manufacturer_id", manufacturer_id),
            ("competitor_count", cfg.n - 1),
            ("profit_margin", cfg.profit_margin),
            ("invest_cost", cfg.invest_cost),
            ("investment_options", list(cfg.investment_options)),
            ("own_capacity", effective_capacity(state)),
            ("own_disrupted", state.disrupted),
            ("own_disruption_magnitude", state.disruption[0] if state.disruption else 0.0),
            ("own_recovery_quarters", state.disruption[1] if state.disruption else 0),
            ("own_pending_investment_units",
             state.pending_investment[0] if state.pending_investment else 0.0),
            ("own_allocated_demand_history", list(state.allocated_history)),
            ("own_capacity_history", list(state.capacity_history)),
            ("own_last_utilization", utilization),
            ("own_cumulative_profit", state.cumulative_profit),
        ] + _signal_entries(history) + [
            ("fda_signal_is_current", bool(latest and latest.period == period)),
        ]
        return RoleContext("manufacturer", period, manufacturer_id, tuple(entries))

    if role == "buyer":
        buyer = world.buyer
        entries = common + [
            ("price", cfg.price),
            ("stockout_penalty", cfg.stockout_penalty),
            ("holding_cost", cfg.holding_cost),
            ("order_bounds", [cfg.buyer_order_bounds[0] * cfg.patient_demand,
                              cfg.buyer_order_bounds[1] * cfg.patient_demand]),
            ("inventory", buyer.inventory),
            ("last_order", buyer.last_order),
            ("last_received", buyer.last_received),
            ("demand_history", list(history.demands)),
            ("supply_history", list(history.supplies)),
            ("shortage_history", list(history.shortages)),
            ("last_shortage", history.shortages[-1] if history.shortages else 0.0),
            ("cumulative_cost", buyer.cumulative_cost),
        ] + _signal_entries(history)
        return RoleContext("buyer", period, None, tuple(entries))

    if role == "fda":
        disrupted_ids = [s.id for s in world.manufacturers if s.disrupted]
        own = history.signals
        entries = common + [
            ("disrupted_manufacturers", disrupted_ids),
            ("newly_disrupted_manufacturers", list(history.new_disruptions)),
            ("disrupted_count", len(disrupted_ids)),
            ("last_total_demand", history.demands[-1] if history.demands else None),
            ("last_total_supply", history.supplies[-1] if history.supplies else None),
            ("last_shortage", history.shortages[-1] if history.shortages else 0.0),
            ("demand_history", list(history.demands)),
            ("supply_history", list(history.supplies)),
            ("shortage_history", list(history.shortages)),
            ("own_prior_announcements", len(own)),
            ("own_last_severity", own[-1].severity if own else "none"),
            ("own_last_period", own[-1].period if own else None),
        ]
        return RoleContext("fda", period, None, tuple(entries))

    raise ValueError(f"unknown role: {role}")


# ----------------------------------------------------------------- validation

_REQUIRED_DECISION_KEYS = {
    "manufacturer": ("invest_fraction", "confidence", "rationale"),
    "buyer": ("order_quantity", "confidence", "rationale"),
    "fda": ("announce", "severity", "text", "rationale"),
}

_REQUIRED_ASSESSMENT_KEYS = {
    "manufacturer": ("shortage_risk", "demand_trend", "summary"),
    "buyer": ("shortage_risk", "demand_trend", "summary"),
    "fda": ("shortage_risk", "demand_trend", "urgency", "summary"),
}


def validate_assessment(raw: dict, role: str) -> Assessment:
    missing = [k for k in _REQUIRED_ASSESSMENT_KEYS[role] if k not in raw]
    if missing:
        raise ValidationFailed(sorted(missing))
    bad = []
    if raw["shortage_risk"] not in RISK_LEVELS:
        bad.append("shortage_risk")
    if raw["demand_trend"] not in TREND_LEVELS:
        bad.append("demand_trend")
    urgency = raw.get("urgency", "routine")
    if role == "fda" and urgency not in URGENCY_LEVELS:
        bad.append("urgency")
    if bad:
        raise ValidationFailed(sorted(bad))
    return Assessment(
        role=role,
        shortage_risk=raw["shortage_risk"],
        demand_trend=raw["demand_trend"],
        urgency=urgency if urgency in URGENCY_LEVELS else "routine",
        summary=str(raw.get("summary", "")),
    )


def _nearest_option(value: float, options: tuple[float, ...]) -> float:
    # Ties break toward the smaller (more conservative) option.
    return min(options, key=lambda o: (abs(o - value), o))


def validate_decision(raw: dict, role: str, cfg: SimConfig):
    """Check required keys and enums, clamp out-of-range numerics.

    Returns ``(decision, warnings)``; raises ValidationFailed when keys are
    missing or an enumeration value is illegal.  Out-of-range numeric values
    are clamped to the nearest legal value and reported in the warnings.
    """
    required = _REQUIRED_DECISION_KEYS[role]
    missing = [k for k in required if k not in raw]
    if missing:
        raise ValidationFailed(sorted(missing))
    warnings: list[str] = []

    confidence = raw.get("confidence", "moderate")
    if confidence not in CONFIDENCE_LEVELS:
        raise ValidationFailed(["confidence"])
    rationale = str(raw.get("rationale", ""))

    if role == "manufacturer":
        try:
            fraction = float(raw["invest_fraction"])
        except (TypeError, ValueError):
            raise ValidationFailed(["invest_fraction"]) from None
        if fraction not in cfg.investment_options:
            clamped = _nearest_option(fraction, cfg.investment_options)
            warnings.append(f"invest_fraction {fraction} clamped to {clamped}")
            fraction = clamped
        return ManufacturerDecision(fraction, confidence, rationale), warnings

    if role == "buyer":
        try:
            quantity = float(raw["order_quantity"])
        except (TypeError, ValueError):
            raise ValidationFailed(["order_quantity"]) from None
        lo = cfg.buyer_order_bounds[0] * cfg.patient_demand
        hi = cfg.buyer_order_bounds[1] * cfg.patient_demand
        if not lo <= quantity <= hi:
            clamped = min(max(quantity, lo), hi)
            warnings.append(f"order_quantity {quantity} clamped to {clamped}")
            quantity = clamped
        return BuyerDecision(quantity, confidence, rationale), warnings

    if role == "fda":
        announce = raw["announce"]
        severity = raw["severity"]
        if not isinstance(announce, bool):
            raise ValidationFailed(["announce"])
        if severity not in SEVERITY_LEVELS:
            raise ValidationFailed(["severity"])
        text = str(raw.get("text", ""))
        if not announce and (severity != "none" or text):
            warnings.append("non-announcement carried severity/text; cleared")
            severity, text = "none", ""
        if announce and severity == "none":
            warnings.append("announcement without severity downgraded to no announcement")
            announce, text = False, ""
        return FdaDecision(announce, severity, text, rationale, confidence), warnings

    raise ValueError(f"unknown role: {role}")


# -------------------------------------------------------------------- backends

class RulePolicy:
    """Deterministic threshold tables; the fallback and test substrate.

    Thresholds: shortage risk is high from a 5% shortage-to-demand ratio,
    moderate above zero; the regulator moves to high alert from a 20% ratio.
    The buyer's stockpile bump shrinks with the number of suppliers (risk is
    concentrated in few plants when n is small), reaching the reference values
    1.3 / 1.1 at n == 3.
    """

    policy_id = "rule"

    RISK_HIGH_RATIO = 0.05
    HIGH_ALERT_RATIO = 0.20
    # Clearing arithmetic can leave ~1e-16 residues; below this a shortage is noise.
    NOISE_TOL = 1e-9
    INVEST_ELEVATED = 0.30
    INVEST_MONITORING = 0.10
    BUYER_BUMP = {"high": 0.9, "moderate": 0.3, "low": 0.0}
    TREND_TOL = 1e-9

    def _trend(self, series) -> str:
        if len(series) < 2:
            return "stable"
        delta = series[-1] - series[-2]
        if delta > self.TREND_TOL:
            return "rising"
        if delta < -self.TREND_TOL:
            return "falling"
        return "stable"

    @staticmethod
    def _ratio(shortage, demand) -> float:
        if demand and demand > 0:
            return shortage / demand
        return 1.0 if shortage and shortage > 0 else 0.0

    def analyze(self, ctx: RoleContext, cfg: SimConfig) -> dict:
        if ctx.role == "manufacturer":
            severity = ctx.get("fda_signal_severity", "none")
            if not ctx.get("fda_signal_is_current", False):
                severity = "none"
            if severity in ("elevated", "high_alert"):
                risk = "high"
            elif severity == "monitoring" or ctx.get("own_disrupted", False):
                risk = "moderate"
            else:
                risk = "low"
            trend = self._trend(ctx.get("own_allocated_demand_history", []))
            summary = (
                f"Perceived shortage risk {risk} from the latest regulator signal; "
                f"own allocation trend {trend}."
            )
            return {"shortage_risk": risk, "demand_trend": trend, "summary": summary}

        shortage = ctx.get("last_shortage", 0.0) or 0.0
        demand = (ctx.get("demand_history") or [None])[-1]
        ratio = self._ratio(shortage, demand)
        if ratio >= self.RISK_HIGH_RATIO:
            risk = "high"
        elif shortage > self.NOISE_TOL:
            risk = "moderate"
        else:
            risk = "low"
        trend = self._trend(ctx.get("demand_history", []))

        if ctx.role == "buyer":
            summary = (
                f"Last quarter cleared with shortage ratio {ratio:.3f}; risk {risk}, "
                f"demand trend {trend}."
            )
            return {"shortage_risk": risk, "demand_trend": trend, "summary": summary}

        disrupted = ctx.get("disrupted_count", 0)
        new = len(ctx.get("newly_disrupted_manufacturers", []))
        if ratio >= self.HIGH_ALERT_RATIO:
            urgency = "high"
        elif shortage > self.NOISE_TOL or disrupted > 0 or new > 0:
            urgency = "elevated"
        else:
            urgency = "routine"
        summary = (
            f"{disrupted} disrupted manufacturers ({new} new); shortage ratio {ratio:.3f}; "
            f"urgency {urgency}."
        )
        return {"shortage_risk": risk, "demand_trend": trend, "urgency": urgency,
                "summary": summary}

    def decide(self, ctx: RoleContext, assessment: Assessment, cfg: SimConfig) -> dict:
        if ctx.role == "manufacturer":
            return self._decide_manufacturer(ctx, cfg)
        if ctx.role == "buyer":
            return self._decide_buyer(ctx, assessment, cfg)
        return self._decide_fda(ctx, cfg)

    def _decide_manufacturer(self, ctx: RoleContext, cfg: SimConfig) -> dict:
        severity = ctx.get("fda_signal_severity", "none")
        if not ctx.get("fda_signal_is_current", False):
            severity = "none"
        utilization = ctx.get("own_last_utilization")
        fully_allocated = utilization is not None and utilization >= 1.0 - 1e-9
        rivals = ctx.get("competitor_count", 0)
        if severity in ("elevated", "high_alert") and fully_allocated:
            fraction = self.INVEST_ELEVATED
            rationale = (
                f"Regulator signals {severity} and our plant is fully allocated: expanding "
                f"{int(fraction * 100)}% to capture unmet demand before the other {rivals} "
                "competitors saturate the opportunity."
            )
            confidence = "moderate"
        elif severity == "monitoring":
            fraction = self.INVEST_MONITORING
            rationale = (
                "Monitoring notice only: committing a small expansion as a hedge while "
                "maintaining flexibility against demand uncertainty."
            )
            confidence = "moderate"
        else:
            fraction = 0.0
            rationale = (
                "No actionable shortage signal: maintaining current capacity and market "
                f"share rather than risking overcapacity against {rivals} competitors."
            )
            confidence = "high"
        return {"invest_fraction": fraction, "confidence": confidence, "rationale": rationale}

    def _decide_buyer(self, ctx: RoleContext, assessment: Assessment, cfg: SimConfig) -> dict:
        bump = self.BUYER_BUMP[assessment.shortage_risk]
        base = cfg.patient_demand
        target = base * (1.0 + bump / cfg.n)
        lo = cfg.buyer_order_bounds[0] * base
        hi = cfg.buyer_order_bounds[1] * base
        order = min(max(target, lo), hi)
        if bump > 0:
            rationale = (
                f"Shortage risk {assessment.shortage_risk}: stockpiling "
                f"{order / base:.2f}x patient demand as safety stock, accepting holding "
                "cost to avert the stockout penalty."
            )
            confidence = "moderate"
        else:
            rationale = "Supply met demand: ordering baseline patient demand only."
            confidence = "high"
        return {"order_quantity": order, "confidence": confidence, "rationale": rationale}

    def _decide_fda(self, ctx: RoleContext, cfg: SimConfig) -> dict:
        shortage = ctx.get("last_shortage", 0.0) or 0.0
        demand = ctx.get("last_total_demand")
        ratio = self._ratio(shortage, demand)
        disrupted = ctx.get("disrupted_count", 0)
        new = len(ctx.get("newly_disrupted_manufacturers", []))
        if ratio >= self.HIGH_ALERT_RATIO:
            severity = "high_alert"
            text = (
                "High alert: a significant supply shortfall persists in this market. "
                "Manufacturers are urged to expand production where possible; we will "
                "coordinate measures to protect patient access."
            )
        elif shortage > self.NOISE_TOL:
            severity = "elevated"
            text = (
                "Elevated shortage alert: current supply is not meeting demand. "
                "Manufacturers are urged to consider capacity expansion; buyers should "
                "avoid purchases beyond clinical need."
            )
        elif disrupted > 0 or new > 0:
            severity = "monitoring"
            text = (
                "We are aware of reported supply disruptions affecting this market and are "
                "monitoring the situation. Manufacturers are encouraged to report any "
                "production changes promptly."
            )
        else:
            severity = "none"
            text = ""
        announce = severity != "none"
        rationale = (
            f"Reported disruptions: {disrupted} ({new} new); last shortage ratio {ratio:.3f}."
        )
        return {"announce": announce, "severity": severity, "text": text,
                "confidence": "high" if severity == "none" else "moderate",
                "rationale": rationale}


class ScriptedPolicy:
    """Replays recorded assessments and decisions, keyed by (role, id, period)."""

    policy_id = "scripted"

    def __init__(self, decisions: dict, assessments: dict | None = None):
        self._decisions = dict(decisions)
        self._assessments = dict(assessments or {})
        self._fallback = RulePolicy()

    @staticmethod
    def _key(ctx: RoleContext):
        return (ctx.role, ctx.manufacturer_id, ctx.period)

    def analyze(self, ctx: RoleContext, cfg: SimConfig) -> dict:
        key = self._key(ctx)
        if key in self._assessments:
            return dict(self._assessments[key])
        return self._fallback.analyze(ctx, cfg)

    def decide(self, ctx: RoleContext, assessment: Assessment, cfg: SimConfig) -> dict:
        key = self._key(ctx)
        if key not in self._decisions:
            raise PolicyUnavailable(f"no scripted decision for {key}")
        return dict(self._decisions[key])

    @classmethod
    def from_trajectory(cls, records: list[dict]) -> "ScriptedPolicy":
        """Build a replay policy from trajectory record dicts."""
        decisions: dict = {}
        assessments: dict = {}
        for rec in records:
            period = rec["period"]
            dec = rec["decisions"]
            fda = dec.get("fda")
            if fda is not None:
                decisions[("fda", None, period)] = {
                    k: fda[k] for k in ("announce", "severity", "text", "confidence", "rationale")
                }
                if "assessment" in fda:
                    assessments[("fda", None, period)] = fda["assessment"]
            buyer = dec.get("buyer")
            if buyer is not None:
                decisions[("buyer", None, period)] = {
                    k: buyer[k] for k in ("order_quantity", "confidence", "rationale")
                }
                if "assessment" in buyer:
                    assessments[("buyer", None, period)] = buyer["assessment"]
            for m in dec.get("manufacturers", []):
                key = ("manufacturer", m["manufacturer_id"], period)
                decisions[key] = {
                    k: m[k] for k in ("invest_fraction", "confidence", "rationale")
                }
                if "assessment" in m:
                    assessments[key] = m["assessment"]
        return cls(decisions, assessments)


_SYSTEM_PROMPTS = {
    "manufacturer": "You play a pharmaceutical manufacturer in a market scenario. Reply with JSON only.",
    "buyer": "You play a healthcare buying consortium in a market scenario. Reply with JSON only.",
    "fda": "You play a medicines regulator in a market scenario. Reply with JSON only.",
}


def _load_schema(name: str) -> dict:
    path = resources.files("pharmsim") / "schemas" / f"{name}.json"
    return json.loads(path.read_text(encoding="utf-8"))


class LlmPolicy:
    """Two-stage LLM backend running through the structured-completion gateway."""

    policy_id = "llm"

    def __init__(self, gateway: Gateway, template_dir: str | Path | None = None):
        self.gateway = gateway
        self.template_dir = template_dir

    def _complete(self, template_id: str, role: str, variables: dict, schema: dict) -> dict:
        from .gateway import CompletionRequest

        prompt = render_template(
            template_id, {**variables, "schema": json.dumps(schema)}, self.template_dir
        )
        req = CompletionRequest(
            system_prompt=_SYSTEM_PROMPTS[role],
            user_prompt=prompt,
            schema=schema,
        )
        try:
            return self.gateway.complete_structured(req)
        except GatewayError as exc:
            raise PolicyUnavailable(str(exc)) from exc

    def analyze(self, ctx: RoleContext, cfg: SimConfig) -> dict:
        schema = _load_schema(f"{ctx.role}_analyze")
        return self._complete(
            f"{ctx.role}_analyze", ctx.role, {"context": ctx.as_text()}, schema
        )

    def decide(self, ctx: RoleContext, assessment: Assessment, cfg: SimConfig) -> dict:
        schema = _load_schema(f"{ctx.role}_decide")
        variables = {
            "context": ctx.as_text(),
            "assessment": assessment.as_text(),
            "options": json.dumps(list(cfg.investment_options)),
            "invest_cost": cfg.invest_cost,
            "profit_margin": cfg.profit_margin,
            "competitor_count": cfg.n - 1,
            "patient_demand": cfg.patient_demand,
            "price": cfg.price,
            "holding_cost": cfg.holding_cost,
            "stockout_penalty": cfg.stockout_penalty,
            "order_min": cfg.buyer_order_bounds[0] * cfg.patient_demand,
            "order_max": cfg.buyer_order_bounds[1] * cfg.patient_demand,
        }
        return self._complete(f"{ctx.role}_decide", ctx.role, variables, schema)


# ------------------------------------------------------------------ dispatch

def analyze(policy, ctx: RoleContext, cfg: SimConfig) -> Assessment:
    """Run a backend's analysis stage and validate the structured result."""
    raw = policy.analyze(ctx, cfg)
    return validate_assessment(raw, ctx.role)


def decide(policy, ctx: RoleContext, assessment: Assessment, cfg: SimConfig):
    """Run a backend's decision stage; returns (typed decision, clamp warnings)."""
    raw = policy.decide(ctx, assessment, cfg)
    return validate_decision(raw, ctx.role, cfg)
