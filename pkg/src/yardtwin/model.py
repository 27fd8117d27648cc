"""Slot-accurate yard state: blocks, bays, rows and tiers.

Coordinates are 1-based. Tier 1 is the ground; stacks grow upward and may
never float (a tier above an empty tier). ``YardState`` is treated as a
value: the replay engine owns the single mutable copy and hands immutable
deep copies to readers via :meth:`YardState.copy`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import (
    AddressOutOfRange,
    DuplicateContainer,
    FloatingPlacement,
    NotTopmost,
    SlotEmpty,
    SlotOccupied,
    UnknownContainer,
)

SECONDS_PER_DAY = 86400.0


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 UTC timestamp ('2024-03-01T08:15:00Z')."""
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def canonical_json(obj) -> str:
    """Stable serialization used wherever byte-identical output is promised."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


_SLOT_RE = re.compile(r"^([^.\s]+)\.(\d{2,})\.(\d+)\.(\d+)$")


@dataclass(frozen=True, order=True)
class SlotAddress:
    """One yard coordinate: (block, bay, row, tier), all 1-based."""

    block_id: str
    bay: int
    row: int
    tier: int

    def __str__(self) -> str:
        # bay is zero-padded to two digits in the wire format
        return f"{self.block_id}.{self.bay:02d}.{self.row}.{self.tier}"

    @property
    def stack(self) -> tuple[str, int, int]:
        """The (block, bay, row) pile this slot belongs to."""
        return (self.block_id, self.bay, self.row)

    @classmethod
    def parse(cls, text: str) -> "SlotAddress":
        m = _SLOT_RE.match(text)
        if not m:
            raise ValueError(f"bad slot address {text!r} (want BLOCK.BAY.ROW.TIER)")
        block, bay, row, tier = m.groups()
        return cls(block, int(bay), int(row), int(tier))


@dataclass(frozen=True)
class BlockSpec:
    block_id: str
    bay_count: int
    row_count: int
    max_tier: int
    bay_pitch_m: float
    row_pitch_m: float

    def __post_init__(self):
        if not self.block_id:
            raise ValueError("block_id must be non-empty")
        for name in ("bay_count", "row_count", "max_tier"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.bay_pitch_m <= 0 or self.row_pitch_m <= 0:
            raise ValueError("pitches must be strictly positive")


@dataclass
class YardLayout:
    """Immutable description of the yard geometry."""

    blocks: list[BlockSpec]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("layout needs at least one block")
        self._by_id = {}
        for b in self.blocks:
            if b.block_id in self._by_id:
                raise ValueError(f"duplicate block_id {b.block_id!r}")
            self._by_id[b.block_id] = b

    def block(self, block_id: str) -> BlockSpec:
        try:
            return self._by_id[block_id]
        except KeyError:
            raise AddressOutOfRange(f"unknown block {block_id!r}") from None

    def has_block(self, block_id: str) -> bool:
        return block_id in self._by_id

    def check_slot(self, slot: SlotAddress) -> None:
        block = self.block(slot.block_id)
        if not (1 <= slot.bay <= block.bay_count):
            raise AddressOutOfRange(f"{slot}: bay outside 1..{block.bay_count}")
        if not (1 <= slot.row <= block.row_count):
            raise AddressOutOfRange(f"{slot}: row outside 1..{block.row_count}")
        if not (1 <= slot.tier <= block.max_tier):
            raise AddressOutOfRange(f"{slot}: tier outside 1..{block.max_tier}")

    def capacity(self) -> int:
        return sum(b.bay_count * b.row_count * b.max_tier for b in self.blocks)

    def to_dict(self) -> dict:
        return {
            "blocks": [
                {
                    "block_id": b.block_id,
                    "bay_count": b.bay_count,
                    "row_count": b.row_count,
                    "max_tier": b.max_tier,
                    "bay_pitch_m": b.bay_pitch_m,
                    "row_pitch_m": b.row_pitch_m,
                }
                for b in self.blocks
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "YardLayout":
        blocks = [
            BlockSpec(
                block_id=str(raw["block_id"]),
                bay_count=int(raw["bay_count"]),
                row_count=int(raw["row_count"]),
                max_tier=int(raw["max_tier"]),
                bay_pitch_m=float(raw["bay_pitch_m"]),
                row_pitch_m=float(raw["row_pitch_m"]),
            )
            for raw in data["blocks"]
        ]
        return cls(blocks)

    @classmethod
    def from_file(cls, path) -> "YardLayout":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def slot_distance_m(a: SlotAddress, b: SlotAddress, layout: YardLayout, inter_block_m: float = 0.0) -> float:
    """Rectilinear crane distance: gantry along bays, trolley along rows.

    Cross-block pairs cost the flat inter-block constant (default 0).
    """
    if a.block_id != b.block_id:
        return inter_block_m
    block = layout.block(a.block_id)
    return abs(a.bay - b.bay) * block.bay_pitch_m + abs(a.row - b.row) * block.row_pitch_m


@dataclass
class ContainerRecord:
    """A container's identity plus the attributes the twin tracks."""

    container_id: str
    iso_type: str = ""
    origin_port: str | None = None
    destination_port: str | None = None
    arrival_time: datetime | None = None
    departure_booked: bool = False
    rehandle_count: int = 0
    current_slot: SlotAddress | None = None
    attrs: dict = field(default_factory=dict)

    def dwell_days(self, now: datetime) -> float:
        """Fractional days in the yard, reported to one decimal."""
        if self.arrival_time is None:
            return 0.0
        return round((now - self.arrival_time).total_seconds() / SECONDS_PER_DAY, 1)

    def copy(self) -> "ContainerRecord":
        return ContainerRecord(
            container_id=self.container_id,
            iso_type=self.iso_type,
            origin_port=self.origin_port,
            destination_port=self.destination_port,
            arrival_time=self.arrival_time,
            departure_booked=self.departure_booked,
            rehandle_count=self.rehandle_count,
            current_slot=self.current_slot,
            attrs=dict(self.attrs),
        )

    def to_dict(self) -> dict:
        return {
            "container_id": self.container_id,
            "iso_type": self.iso_type,
            "origin_port": self.origin_port,
            "destination_port": self.destination_port,
            "arrival_time": format_timestamp(self.arrival_time) if self.arrival_time else None,
            "departure_booked": self.departure_booked,
            "rehandle_count": self.rehandle_count,
            "current_slot": str(self.current_slot) if self.current_slot else None,
            "attrs": self.attrs,
        }


class YardState:
    """Occupancy and container records for one yard.

    Mutating operations (:meth:`place`, :meth:`remove`) enforce the physical
    rules: no two containers in one slot, no floating placements, removals
    only from the top of a stack.
    """

    def __init__(self, layout: YardLayout, clock: datetime | None = None):
        self.layout = layout
        self.clock = clock
        self.occupancy: dict[SlotAddress, str] = {}
        self.containers: dict[str, ContainerRecord] = {}
        self.equipment: dict[str, SlotAddress] = {}
        self._heights: dict[tuple[str, int, int], int] = {}

    # -- queries ----------------------------------------------------------

    def stack_height(self, block_id: str, bay: int, row: int) -> int:
        return self._heights.get((block_id, bay, row), 0)

    def stack_heights(self, block_id: str, bay: int) -> list[int]:
        """Occupied-tier count for every row of one bay."""
        block = self.layout.block(block_id)
        if not (1 <= bay <= block.bay_count):
            raise AddressOutOfRange(f"bay {bay} outside 1..{block.bay_count} in block {block_id}")
        return [self.stack_height(block_id, bay, row) for row in range(1, block.row_count + 1)]

    def in_yard(self, container_id: str) -> bool:
        rec = self.containers.get(container_id)
        return rec is not None and rec.current_slot is not None

    def container_count(self) -> int:
        return len(self.occupancy)

    def blocking_count(self, container_id: str) -> int:
        """Containers stacked strictly above ``container_id`` right now."""
        rec = self.containers.get(container_id)
        if rec is None or rec.current_slot is None:
            raise UnknownContainer(f"container {container_id!r} is not in the yard")
        slot = rec.current_slot
        return self.stack_height(*slot.stack) - slot.tier

    def top_slot(self, block_id: str, bay: int, row: int) -> SlotAddress | None:
        h = self.stack_height(block_id, bay, row)
        if h == 0:
            return None
        return SlotAddress(block_id, bay, row, h)

    # -- mutations ---------------------------------------------------------

    def place(self, container: ContainerRecord, slot: SlotAddress) -> None:
        self.layout.check_slot(slot)
        if self.in_yard(container.container_id):
            raise DuplicateContainer(f"container {container.container_id!r} already in yard")
        height = self.stack_height(*slot.stack)
        if slot.tier <= height:
            raise SlotOccupied(f"{slot} is occupied")
        if slot.tier > height + 1:
            raise FloatingPlacement(f"{slot}: lowest free tier is {height + 1}")
        self.occupancy[slot] = container.container_id
        self._heights[slot.stack] = height + 1
        container.current_slot = slot
        self.containers[container.container_id] = container

    def remove(self, slot: SlotAddress) -> ContainerRecord:
        self.layout.check_slot(slot)
        container_id = self.occupancy.get(slot)
        if container_id is None:
            raise SlotEmpty(f"{slot} is empty")
        height = self.stack_height(*slot.stack)
        if slot.tier < height:
            raise NotTopmost(f"{slot}: {height - slot.tier} container(s) above")
        del self.occupancy[slot]
        if height == 1:
            del self._heights[slot.stack]
        else:
            self._heights[slot.stack] = height - 1
        record = self.containers[container_id]
        record.current_slot = None
        return record

    # -- snapshots ---------------------------------------------------------

    def copy(self) -> "YardState":
        other = YardState(self.layout, self.clock)
        other.occupancy = dict(self.occupancy)
        other.containers = {cid: rec.copy() for cid, rec in self.containers.items()}
        other.equipment = dict(self.equipment)
        other._heights = dict(self._heights)
        return other

    def snapshot_dict(self) -> dict:
        """The exchange snapshot: exact field names, stacks bottom-to-top."""
        blocks = []
        for spec in self.layout.blocks:
            bays = []
            for bay in range(1, spec.bay_count + 1):
                rows = []
                for row in range(1, spec.row_count + 1):
                    h = self.stack_height(spec.block_id, bay, row)
                    stack = [
                        self.occupancy[SlotAddress(spec.block_id, bay, row, tier)]
                        for tier in range(1, h + 1)
                    ]
                    rows.append({"row": row, "stack": stack})
                bays.append({"bay": bay, "rows": rows})
            blocks.append({"block_id": spec.block_id, "bays": bays})
        return {
            "clock": format_timestamp(self.clock) if self.clock else None,
            "blocks": blocks,
            "containers": {cid: rec.to_dict() for cid, rec in self.containers.items()},
        }

    def snapshot_json(self) -> str:
        return canonical_json(self.snapshot_dict())

    def check_invariants(self) -> None:
        """Raise AssertionError if gravity or the slot/container bijection is broken."""
        seen: dict[str, SlotAddress] = {}
        for slot, cid in self.occupancy.items():
            assert cid not in seen, f"{cid} occupies both {seen[cid]} and {slot}"
            seen[cid] = slot
            rec = self.containers.get(cid)
            assert rec is not None and rec.current_slot == slot, f"record out of sync for {cid}"
            if slot.tier > 1:
                below = SlotAddress(slot.block_id, slot.bay, slot.row, slot.tier - 1)
                assert below in self.occupancy, f"floating container {cid} at {slot}"
        for cid, rec in self.containers.items():
            if rec.current_slot is not None:
                assert self.occupancy.get(rec.current_slot) == cid, f"dangling slot for {cid}"
        for (block_id, bay, row), h in self._heights.items():
            block = self.layout.block(block_id)
            assert 0 < h <= block.max_tier, f"height {h} out of range at {block_id}.{bay}.{row}"
