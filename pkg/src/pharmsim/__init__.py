"""Multi-agent drug-shortage market simulation toolkit."""

from .agents import (
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
    LlmPolicy,
    analyze,
    build_context,
    decide,
    validate_decision,
)
from .config import ConfigInvalid, ForcedDisruption, SimConfig
from .engine import (
    GatewayExhausted,
    GtUnusable,
    MarketState,
    PolicySet,
    SimulationSession,
    Trajectory,
    TrajectoryRecord,
    run_replications,
    run_simulation,
    scenario_from_gt,
)
from .evaluation import (
    BaselineUnavailable,
    EpsilonPolicy,
    MetricReport,
    PairingError,
    UnbinnableN,
    avg_supply_per_period,
    competition_bins,
    evaluate,
    fip,
    rationale_ngrams,
    resolution_time,
    rlp,
    zero_shot_run,
)
from .gateway import (
    CompletionRequest,
    Gateway,
    HttpProvider,
    MockProvider,
    ProviderConfig,
    ProviderRefused,
    SchemaError,
    TransportError,
    render_template,
)
from .market import (
    BuyerAccounting,
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

__version__ = "0.1.0"
