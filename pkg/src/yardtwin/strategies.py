"""Pluggable placement and relocation policies.

Strategies are stateless: every choice is a pure function of the yard
snapshot, the container, the candidate slots and the rng stream, so
replaying a seeded run yields identical decisions. Tie-breaking is total —
candidates are ordered lexicographically by (block, bay, row) and every
policy reduces to that order on ties.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import InvalidStrategy, NoFeasibleSlot
from .model import ContainerRecord, SlotAddress, YardState, parse_timestamp, slot_distance_m

STRATEGY_NAMES = (
    "random_feasible",
    "lowest_tier",
    "category_segregation",
    "nearest_slot",
    "identity",
)

# consumed by the twin engine, passed through StrategySpec.params
ENGINE_PARAM_KEYS = frozenset({"placement_scope", "cross_block_relocations"})


@dataclass(frozen=True)
class StrategySpec:
    name: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "StrategySpec":
        if not isinstance(data, dict) or "name" not in data:
            raise InvalidStrategy("strategy spec must be an object with a 'name'")
        params = data.get("params") or {}
        if not isinstance(params, dict):
            raise InvalidStrategy("strategy params must be an object")
        return cls(name=str(data["name"]), params=dict(params))


def feasible_slots(state: YardState, block_ids=None) -> list[SlotAddress]:
    """Lowest free tier of every non-full stack, lexicographically ordered."""
    slots = []
    for spec in state.layout.blocks:
        if block_ids is not None and spec.block_id not in block_ids:
            continue
        for bay in range(1, spec.bay_count + 1):
            for row in range(1, spec.row_count + 1):
                h = state.stack_height(spec.block_id, bay, row)
                if h < spec.max_tier:
                    slots.append(SlotAddress(spec.block_id, bay, row, h + 1))
    return slots


class Strategy:
    """Base: candidate filtering, feasibility errors, forbidden-stack rule."""

    name = "base"
    replays_log = False

    def choose_placement(
        self,
        state: YardState,
        container: ContainerRecord,
        rng: random.Random,
        candidates: list[SlotAddress] | None = None,
        equipment_id: str | None = None,
    ) -> SlotAddress:
        if candidates is None:
            candidates = feasible_slots(state)
        if not candidates:
            raise NoFeasibleSlot(f"no feasible slot for {container.container_id}")
        return self.select(state, container, sorted(candidates), rng, equipment_id)

    def choose_relocation(
        self,
        state: YardState,
        blocker: ContainerRecord,
        forbidden_stack: tuple,
        rng: random.Random,
        candidates: list[SlotAddress] | None = None,
        equipment_id: str | None = None,
    ) -> SlotAddress:
        if candidates is None:
            candidates = feasible_slots(state)
        candidates = [c for c in candidates if c.stack != forbidden_stack]
        if not candidates:
            raise NoFeasibleSlot(f"no relocation slot for {blocker.container_id}")
        return self.select(state, blocker, sorted(candidates), rng, equipment_id)

    def select(self, state, container, candidates, rng, equipment_id) -> SlotAddress:
        raise NotImplementedError


class RandomFeasible(Strategy):
    """Uniform over feasible slots — the analytic placement model's twin."""

    name = "random_feasible"

    def select(self, state, container, candidates, rng, equipment_id):
        return candidates[rng.randrange(len(candidates))]


class LowestTier(Strategy):
    """Levelling: lowest landing tier wins, ties by (block, bay, row)."""

    name = "lowest_tier"

    def select(self, state, container, candidates, rng, equipment_id):
        return min(candidates, key=lambda s: (s.tier, s.block_id, s.bay, s.row))


class CategorySegregation(Strategy):
    """Keep a category together: land in the group's bays, overflow to the emptiest bay."""

    name = "category_segregation"

    def __init__(self, key: str = "destination_port", window_hours: float = 24.0):
        self.key = key
        self.window_hours = window_hours

    def group_of(self, container: ContainerRecord) -> str:
        if self.key == "destination_port":
            return container.destination_port or "unknown"
        if self.key == "origin_port":
            return container.origin_port or "unknown"
        if self.key == "iso_type":
            return container.iso_type or "unknown"
        # departure_window_hours: bucket the booked departure estimate
        eta = container.attrs.get("departure_eta")
        if eta is None:
            return "unbooked"
        ts = parse_timestamp(str(eta))
        bucket = int(ts.timestamp() // (3600.0 * self.window_hours))
        return f"w{bucket}"

    def select(self, state, container, candidates, rng, equipment_id):
        group = self.group_of(container)
        group_bays = set()
        bay_load: dict[tuple[str, int], int] = {}
        for slot, cid in state.occupancy.items():
            bay = (slot.block_id, slot.bay)
            bay_load[bay] = bay_load.get(bay, 0) + 1
            if self.group_of(state.containers[cid]) == group:
                group_bays.add(bay)
        in_group = [c for c in candidates if (c.block_id, c.bay) in group_bays]
        if in_group:
            return min(in_group, key=lambda s: (s.tier, s.block_id, s.bay, s.row))
        emptiest = min(
            {(c.block_id, c.bay) for c in candidates},
            key=lambda b: (bay_load.get(b, 0), b),
        )
        within = [c for c in candidates if (c.block_id, c.bay) == emptiest]
        return min(within, key=lambda s: (s.tier, s.block_id, s.bay, s.row))


class NearestSlot(Strategy):
    """Minimize crane travel from the last known equipment position."""

    name = "nearest_slot"

    def __init__(self, inter_block_m: float = 0.0):
        self.inter_block_m = inter_block_m

    def select(self, state, container, candidates, rng, equipment_id):
        position = None
        if equipment_id is not None:
            position = state.equipment.get(equipment_id)
        if position is None and state.equipment:
            position = state.equipment[min(state.equipment)]
        if position is None:
            return min(candidates, key=lambda s: (s.block_id, s.bay, s.row))
        return min(
            candidates,
            key=lambda s: (
                slot_distance_m(position, s, state.layout, self.inter_block_m),
                s.block_id,
                s.bay,
                s.row,
            ),
        )


class IdentityStrategy(Strategy):
    """Replays the logged slots verbatim; handled by the engine."""

    name = "identity"
    replays_log = True

    def select(self, state, container, candidates, rng, equipment_id):
        raise InvalidStrategy("identity strategy does not choose slots")


def _no_params(params: dict, name: str):
    if params:
        raise InvalidStrategy(f"{name} takes no parameters, got {sorted(params)}")


def make_strategy(spec: StrategySpec) -> Strategy:
    """Validate a spec and build the policy. Engine-level params are skipped."""
    params = {k: v for k, v in spec.params.items() if k not in ENGINE_PARAM_KEYS}
    scope = spec.params.get("placement_scope", "logged_block")
    if scope not in ("logged_block", "yard"):
        raise InvalidStrategy(f"placement_scope must be logged_block|yard, got {scope!r}")

    if spec.name == "random_feasible":
        _no_params(params, spec.name)
        return RandomFeasible()
    if spec.name == "lowest_tier":
        _no_params(params, spec.name)
        return LowestTier()
    if spec.name == "category_segregation":
        unknown = set(params) - {"key", "window_hours"}
        if unknown:
            raise InvalidStrategy(f"unknown segregation params {sorted(unknown)}")
        key = params.get("key", "destination_port")
        if key not in ("destination_port", "origin_port", "iso_type", "departure_window_hours"):
            raise InvalidStrategy(f"unknown segregation key {key!r}")
        window_hours = float(params.get("window_hours", 24.0))
        if window_hours <= 0:
            raise InvalidStrategy("window_hours must be positive")
        return CategorySegregation(key=key, window_hours=window_hours)
    if spec.name == "nearest_slot":
        unknown = set(params) - {"inter_block_m"}
        if unknown:
            raise InvalidStrategy(f"unknown nearest_slot params {sorted(unknown)}")
        inter = float(params.get("inter_block_m", 0.0))
        if inter < 0:
            raise InvalidStrategy("inter_block_m must be non-negative")
        return NearestSlot(inter_block_m=inter)
    if spec.name == "identity":
        _no_params(params, spec.name)
        return IdentityStrategy()
    raise InvalidStrategy(f"unknown strategy {spec.name!r} (known: {', '.join(STRATEGY_NAMES)})")
