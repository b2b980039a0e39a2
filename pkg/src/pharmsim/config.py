"""Scenario configuration for the drug-shortage production game."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigInvalid(ValueError):
    """Raised when a scenario configuration violates its invariants."""


@dataclass(frozen=True)
class ForcedDisruption:
    """Capacity losses imposed on named manufacturers before quarter 1.

    ``deltas`` maps manufacturer index to the capacity fraction lost while the
    disruption is active.  ``duration`` is in quarters; ``None`` means the
    disruption lasts the whole horizon.
    """

    deltas: tuple[tuple[int, float], ...]
    duration: int | None = None

    def delta_map(self) -> dict[int, float]:
        return dict(self.deltas)

    def to_dict(self) -> dict:
        return {
            "deltas": {str(i): d for i, d in self.deltas},
            "duration": self.duration,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ForcedDisruption":
        deltas = tuple(sorted((int(i), float(d)) for i, d in raw["deltas"].items()))
        return cls(deltas=deltas, duration=raw.get("duration"))


@dataclass(frozen=True)
class SimConfig:
    """All parameters of one simulation scenario.

    Quantities are in units of the (normalized) quarterly patient demand;
    money in units of the drug price.
    """

    n: int = 4
    horizon: int = 6
    patient_demand: float = 1.0
    disruption_prob: float = 0.05
    disruption_magnitude: float = 0.2
    price: float = 1.0
    stockout_penalty: float = 1.1
    holding_cost: float = 0.1
    invest_cost: float = 0.5
    profit_margin: float = 1.0
    investment_options: tuple[float, ...] = (0.0, 0.10, 0.20, 0.30, 0.50)
    buyer_order_bounds: tuple[float, float] = (0.0, 2.0)
    forced: ForcedDisruption | None = None
    seed: int = 0
    replications: int = 3
    case_id: str | None = None

    @property
    def scenario(self) -> str:
        return "forced" if self.forced is not None else "stochastic"

    def validate(self) -> "SimConfig":
        errors = []
        if self.n < 2:
            errors.append("n must be at least 2")
        if not 4 <= self.horizon <= 12:
            errors.append("horizon must lie in [4, 12] quarters")
        if self.patient_demand <= 0:
            errors.append("patient_demand must be positive")
        if not 0.0 <= self.disruption_prob <= 1.0:
            errors.append("disruption_prob must lie in [0, 1]")
        if not 0.0 <= self.disruption_magnitude <= 1.0:
            errors.append("disruption_magnitude must lie in [0, 1]")
        for name in ("price", "stockout_penalty", "holding_cost", "invest_cost", "profit_margin"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be non-negative")
        opts = self.investment_options
        if not opts or list(opts) != sorted(opts):
            errors.append("investment_options must be sorted ascending")
        elif 0.0 not in opts:
            errors.append("investment_options must include 0")
        elif any(o < 0 for o in opts):
            errors.append("investment_options must be non-negative")
        lo, hi = self.buyer_order_bounds
        if lo < 0 or hi <= lo:
            errors.append("buyer_order_bounds must satisfy 0 <= low < high")
        if self.replications < 1:
            errors.append("replications must be at least 1")
        if self.forced is not None:
            for i, d in self.forced.deltas:
                if not 0 <= i < self.n:
                    errors.append(f"forced disruption names unknown manufacturer {i}")
                if not 0.0 <= d <= 1.0:
                    errors.append(f"forced delta for manufacturer {i} outside [0, 1]")
            if self.forced.duration is not None and self.forced.duration < 1:
                errors.append("forced duration must be at least 1 quarter")
        if errors:
            raise ConfigInvalid("; ".join(errors))
        return self

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "horizon": self.horizon,
            "patient_demand": self.patient_demand,
            "disruption_prob": self.disruption_prob,
            "disruption_magnitude": self.disruption_magnitude,
            "price": self.price,
            "stockout_penalty": self.stockout_penalty,
            "holding_cost": self.holding_cost,
            "invest_cost": self.invest_cost,
            "profit_margin": self.profit_margin,
            "investment_options": list(self.investment_options),
            "buyer_order_bounds": list(self.buyer_order_bounds),
            "scenario": self.scenario,
            "forced": self.forced.to_dict() if self.forced else None,
            "seed": self.seed,
            "replications": self.replications,
            "case_id": self.case_id,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        known = {
            "n", "horizon", "patient_demand", "disruption_prob", "disruption_magnitude",
            "price", "stockout_penalty", "holding_cost", "invest_cost", "profit_margin",
            "investment_options", "buyer_order_bounds", "forced", "seed", "replications",
            "case_id",
        }
        unknown = set(raw) - known - {"scenario"}
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in raw.items() if k in known}
        if kwargs.get("investment_options") is not None:
            kwargs["investment_options"] = tuple(float(x) for x in kwargs["investment_options"])
        if kwargs.get("buyer_order_bounds") is not None:
            kwargs["buyer_order_bounds"] = tuple(float(x) for x in kwargs["buyer_order_bounds"])
        if kwargs.get("forced") is not None:
            kwargs["forced"] = ForcedDisruption.from_dict(kwargs["forced"])
        return cls(**kwargs).validate()

    @classmethod
    def from_file(cls, path: str | Path) -> "SimConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigInvalid(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config file is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)
