"""Deterministic market mechanics.

Disruption effects, demand allocation, market clearing, and the financial
accounting of one quarter.  Everything here is a pure function over value
types: no agent logic, no randomness, no shared state.  All arithmetic uses
only +, -, *, /, min and max so the functions are exact over ``fractions.Fraction``
inputs as well as floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .config import SimConfig


@dataclass(frozen=True)
class ManufacturerState:
    """One manufacturer's private production state.

    ``pending_investment`` is ``(added units, quarters until active)``; capacity
    bought in quarter t becomes productive at the start of quarter t+1.
    ``disruption`` is ``(magnitude, remaining quarters)``; at most one disruption
    is active at a time and it scales the whole owned capacity (base plus
    matured additions).
    """

    id: int
    base_capacity: float
    matured_added_capacity: float = 0.0
    pending_investment: tuple[float, int] | None = None
    disruption: tuple[float, int] | None = None
    allocated_history: tuple[float, ...] = ()
    capacity_history: tuple[float, ...] = ()
    cumulative_profit: float = 0.0

    @property
    def disrupted(self) -> bool:
        return self.disruption is not None

    @property
    def owned_capacity(self) -> float:
        return self.base_capacity + self.matured_added_capacity


@dataclass(frozen=True)
class BuyerState:
    """The buyer consortium's inventory and cost position."""

    inventory: float = 0.0
    cumulative_cost: float = 0.0
    last_received: float = 0.0
    last_order: float = 0.0


@dataclass(frozen=True)
class ClearingOutcome:
    """Result of clearing one quarter's order book against capacities."""

    per_mfr_quantity: tuple[float, ...]
    total_supply: float
    unfilled_from_disrupted: float
    shortage: float
    period: int = 0


@dataclass(frozen=True)
class BuyerAccounting:
    """The buyer's costs and stock movement for one quarter."""

    purchase_cost: float
    holding_cost_paid: float
    stockout_penalty: float
    unmet_patient_demand: float
    new_inventory: float

    @property
    def total_cost(self) -> float:
        return self.purchase_cost + self.holding_cost_paid + self.stockout_penalty


def effective_capacity(state: ManufacturerState) -> float:
    """Productive capacity this quarter: owned capacity scaled by any active disruption."""
    cap = state.owned_capacity
    if state.disruption is not None:
        magnitude, _ = state.disruption
        cap = cap * (1 - magnitude)
    return cap


def allocate(demand: float, states: list[ManufacturerState], period: int = 0) -> ClearingOutcome:
    """Split the buyer's order across manufacturers and clear the market.

    Disrupted manufacturers produce up to their equal share ``demand / n``; the
    share they cannot fill is pooled and spread evenly over the undisrupted
    manufacturers, each still capped by its own capacity.  If every
    manufacturer is disrupted the pooled amount has nowhere to go and falls
    through to the shortage, which is always ``max(0, demand - supply)``.
    """
    n = len(states)
    if n == 0:
        raise ValueError("allocate requires at least one manufacturer")
    share = demand / n
    caps = [effective_capacity(s) for s in states]
    disrupted = [s.disrupted for s in states]

    quantities: list[float] = [0.0] * n
    unfilled = 0 * share  # preserves Fraction arithmetic
    for i in range(n):
        if disrupted[i]:
            quantities[i] = min(share, caps[i])
            unfilled = unfilled + max(share - caps[i], 0 * share)

    undisrupted = [i for i in range(n) if not disrupted[i]]
    if undisrupted:
        bonus = unfilled / len(undisrupted)
        for i in undisrupted:
            quantities[i] = min(share + bonus, caps[i])

    total = quantities[0]
    for q in quantities[1:]:
        total = total + q
    shortage = max(demand - total, 0 * share)
    return ClearingOutcome(
        per_mfr_quantity=tuple(quantities),
        total_supply=total,
        unfilled_from_disrupted=unfilled,
        shortage=shortage,
        period=period,
    )


def mature_investments(states: list[ManufacturerState]) -> list[ManufacturerState]:
    """Activate pending capacity whose lead time has elapsed.

    Called once at the start of each quarter.  A pending investment with a
    zero counter moves into matured capacity; other counters decrement.  The
    investment cost was already charged at decision time.
    """
    out = []
    for s in states:
        if s.pending_investment is None:
            out.append(s)
            continue
        units, countdown = s.pending_investment
        if countdown <= 0:
            out.append(replace(
                s,
                matured_added_capacity=s.matured_added_capacity + units,
                pending_investment=None,
            ))
        else:
            out.append(replace(s, pending_investment=(units, countdown - 1)))
    return out


def tick_disruptions(states: list[ManufacturerState]) -> list[ManufacturerState]:
    """Age active disruptions by one quarter, lifting those that have run out."""
    out = []
    for s in states:
        if s.disruption is None:
            out.append(s)
            continue
        magnitude, remaining = s.disruption
        if remaining <= 1:
            out.append(replace(s, disruption=None))
        else:
            out.append(replace(s, disruption=(magnitude, remaining - 1)))
    return out


def buyer_accounting(
    received: float,
    patient_demand: float,
    inventory_prev: float,
    cfg: SimConfig,
) -> BuyerAccounting:
    """Settle the buyer's quarter: pay for what arrived, serve patients, carry the rest.

    Patient demand draws on received units plus carried inventory before any
    penalty applies, so at most one of unmet demand and leftover inventory is
    positive.
    """
    available = received + inventory_prev
    unmet = max(patient_demand - available, 0 * available)
    leftover = max(available - patient_demand, 0 * available)
    return BuyerAccounting(
        purchase_cost=cfg.price * received,
        holding_cost_paid=cfg.holding_cost * leftover,
        stockout_penalty=cfg.stockout_penalty * unmet,
        unmet_patient_demand=unmet,
        new_inventory=leftover,
    )


def manufacturer_accounting(quantity: float, invested_units: float, cfg: SimConfig) -> float:
    """Quarterly profit delta: margin on units produced minus upfront cost of new capacity."""
    return cfg.profit_margin * quantity - cfg.invest_cost * invested_units
