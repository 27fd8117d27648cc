"""Container-terminal yard digital twin.

Mirrors a physical yard from TOS/GOS event logs, replays and simulates
stacking strategies counterfactually, and evaluates the expected-rehandles
model of a bay exactly.
"""

from .analytics import (
    BayConfiguration,
    ConfigurationDistribution,
    OracleResult,
    PickTransition,
    enumerate_configurations,
    expected_rehandles,
    expected_rehandles_to_empty,
    fill_distribution,
    monte_carlo_oracle,
    pick_transitions,
)
from .errors import YardTwinError
from .events import EventKind, EventLog, Violation, YardEvent, load_log, parse_log, validate_against
from .model import BlockSpec, ContainerRecord, SlotAddress, YardLayout, YardState

__version__ = "0.1.0"

__all__ = [
    "BayConfiguration",
    "BlockSpec",
    "ConfigurationDistribution",
    "ContainerRecord",
    "EventKind",
    "EventLog",
    "OracleResult",
    "PickTransition",
    "SlotAddress",
    "Violation",
    "YardEvent",
    "YardLayout",
    "YardState",
    "YardTwinError",
    "enumerate_configurations",
    "expected_rehandles",
    "expected_rehandles_to_empty",
    "fill_distribution",
    "load_log",
    "monte_carlo_oracle",
    "parse_log",
    "pick_transitions",
    "validate_against",
]
