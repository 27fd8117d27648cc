"""TOS/GOS-style event logs: JSONL parsing, validation, ordering.

Wire format is one JSON object per line::

    {"ts":"2024-03-01T08:15:00Z","kind":"YARD_SHIFT","container":"CMAU1234567",
     "from":"A.05.3.2","to":"A.05.1.1","equipment":"RTG-02","attrs":{}}

Slot strings are ``BLOCK.BAY.ROW.TIER`` with the bay zero-padded to two
digits. Unknown top-level keys are preserved under ``attrs`` rather than
rejected; TOS exports vary.
"""

from __future__ import annotations

import enum
import io
import json
from dataclasses import dataclass, field, replace
from datetime import datetime

from .errors import MalformedLine, MissingRequiredField, UnknownEventKind, YardTwinError
from .model import SlotAddress, YardLayout, format_timestamp, parse_timestamp


class EventKind(str, enum.Enum):
    GATE_IN = "GATE_IN"
    GATE_OUT = "GATE_OUT"
    VESSEL_DISCHARGE = "VESSEL_DISCHARGE"
    VESSEL_LOAD = "VESSEL_LOAD"
    YARD_SHIFT = "YARD_SHIFT"
    CRANE_POS = "CRANE_POS"


ARRIVAL_KINDS = frozenset({EventKind.GATE_IN, EventKind.VESSEL_DISCHARGE})
DEPARTURE_KINDS = frozenset({EventKind.GATE_OUT, EventKind.VESSEL_LOAD})
MOVE_KINDS = ARRIVAL_KINDS | DEPARTURE_KINDS | {EventKind.YARD_SHIFT}

# (container, from_slot, to_slot, equipment) requirements per kind:
#   True = required, False = must be absent, None = optional
_SCHEMA = {
    EventKind.GATE_IN: (True, False, True, None),
    EventKind.VESSEL_DISCHARGE: (True, False, True, None),
    EventKind.GATE_OUT: (True, True, False, None),
    EventKind.VESSEL_LOAD: (True, True, False, None),
    EventKind.YARD_SHIFT: (True, True, True, None),
    EventKind.CRANE_POS: (False, False, True, True),
}

_KNOWN_KEYS = {"ts", "kind", "container", "from", "to", "equipment", "attrs", "synthetic"}


@dataclass(frozen=True)
class YardEvent:
    """One timestamped yard fact."""

    seq: int
    ts: datetime
    kind: EventKind
    container_id: str | None = None
    from_slot: SlotAddress | None = None
    to_slot: SlotAddress | None = None
    equipment_id: str | None = None
    attrs: dict = field(default_factory=dict)
    synthetic: bool = False

    def to_dict(self) -> dict:
        out: dict = {"ts": format_timestamp(self.ts), "kind": self.kind.value}
        if self.container_id is not None:
            out["container"] = self.container_id
        if self.from_slot is not None:
            out["from"] = str(self.from_slot)
        if self.to_slot is not None:
            out["to"] = str(self.to_slot)
        if self.equipment_id is not None:
            out["equipment"] = self.equipment_id
        if self.attrs:
            out["attrs"] = self.attrs
        if self.synthetic:
            out["synthetic"] = True
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=False)


@dataclass(frozen=True)
class EventLog:
    """Events nondecreasing by (timestamp, seq); seq is the log position."""

    events: tuple[YardEvent, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def window(self, time_from: datetime, time_to: datetime) -> "EventLog":
        """Events with time_from <= ts <= time_to (both ends inclusive)."""
        return EventLog(tuple(e for e in self.events if time_from <= e.ts <= time_to))

    def before(self, t: datetime) -> "EventLog":
        """Events strictly before t (warm-start prefix)."""
        return EventLog(tuple(e for e in self.events if e.ts < t))

    def to_jsonl(self) -> str:
        if not self.events:
            return ""
        return "\n".join(e.to_json() for e in self.events) + "\n"


def _parse_slot(raw, key: str, line_no: int) -> SlotAddress:
    try:
        return SlotAddress.parse(str(raw))
    except ValueError as exc:
        raise MalformedLine(f"{key}: {exc}", line_no) from None


def _parse_line(raw: dict, line_no: int, seq: int) -> YardEvent:
    kind_raw = raw.get("kind")
    if kind_raw is None:
        raise MissingRequiredField("<any>", "kind", line_no)
    try:
        kind = EventKind(kind_raw)
    except ValueError:
        raise UnknownEventKind(f"unknown event kind {kind_raw!r}", line_no) from None

    if "ts" not in raw:
        raise MissingRequiredField(kind.value, "ts", line_no)
    try:
        ts = parse_timestamp(str(raw["ts"]))
    except ValueError as exc:
        raise MalformedLine(f"ts: {exc}", line_no) from None

    need_container, need_from, need_to, need_equipment = _SCHEMA[kind]
    for key, required in (
        ("container", need_container),
        ("from", need_from),
        ("to", need_to),
        ("equipment", need_equipment),
    ):
        present = raw.get(key) is not None
        if required is True and not present:
            raise MissingRequiredField(kind.value, key, line_no)
        if required is False and present:
            raise MalformedLine(f"{kind.value} must not carry '{key}'", line_no)

    attrs = raw.get("attrs") or {}
    if not isinstance(attrs, dict):
        raise MalformedLine("attrs must be an object", line_no)
    extra = {k: v for k, v in raw.items() if k not in _KNOWN_KEYS}
    if extra:
        attrs = {**extra, **attrs}

    return YardEvent(
        seq=seq,
        ts=ts,
        kind=kind,
        container_id=str(raw["container"]) if raw.get("container") is not None else None,
        from_slot=_parse_slot(raw["from"], "from", line_no) if raw.get("from") is not None else None,
        to_slot=_parse_slot(raw["to"], "to", line_no) if raw.get("to") is not None else None,
        equipment_id=str(raw["equipment"]) if raw.get("equipment") is not None else None,
        attrs=attrs,
        synthetic=bool(raw.get("synthetic", False)),
    )


def parse_log(stream) -> EventLog:
    """Parse a JSONL byte/text stream into a time-ordered EventLog.

    Events are stably sorted by (timestamp, file order); ties keep file
    order. After sorting, seq is renumbered to the log position so that
    serialize/reparse round-trips exactly.
    """
    if isinstance(stream, bytes):
        stream = io.StringIO(stream.decode("utf-8"))
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    events = []
    for line_no, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(f"invalid JSON: {exc.msg}", line_no) from None
        if not isinstance(raw, dict):
            raise MalformedLine("event line must be a JSON object", line_no)
        events.append(_parse_line(raw, line_no, seq=len(events)))
    events.sort(key=lambda e: (e.ts, e.seq))
    return EventLog(tuple(replace(e, seq=i) for i, e in enumerate(events)))


def load_log(path) -> EventLog:
    with open(path, "rb") as fh:
        return parse_log(fh)


@dataclass(frozen=True)
class Violation:
    seq: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}@{self.seq}: {self.message}"


def validate_against(log: EventLog, layout: YardLayout) -> list[Violation]:
    """Every event that cannot replay on the given layout.

    Two passes: structural (slot ranges, retrievals of containers never
    introduced) and a scratch replay that records state violations
    (floating placements, blocked removals, ...) and skips the offending
    event. An empty result means the log replays cleanly.
    """
    from .engine import apply_event  # local import, engine depends on this module

    violations = []
    introduced: set[str] = set()
    skip: set[int] = set()
    for event in log:
        for slot in (event.from_slot, event.to_slot):
            if slot is None:
                continue
            try:
                layout.check_slot(slot)
            except YardTwinError as exc:
                violations.append(Violation(event.seq, exc.code, str(exc)))
                skip.add(event.seq)
        if event.kind in ARRIVAL_KINDS:
            introduced.add(event.container_id)
        elif event.kind in DEPARTURE_KINDS or event.kind is EventKind.YARD_SHIFT:
            if event.container_id not in introduced:
                violations.append(
                    Violation(
                        event.seq,
                        "UNKNOWN_CONTAINER_RETRIEVAL",
                        f"container {event.container_id!r} never introduced",
                    )
                )
                skip.add(event.seq)

    from .model import YardState

    state = YardState(layout)
    for event in log:
        if event.seq in skip:
            continue
        try:
            apply_event(state, event)
        except YardTwinError as exc:
            violations.append(Violation(event.seq, exc.code, str(exc)))
    violations.sort(key=lambda v: v.seq)
    return violations
