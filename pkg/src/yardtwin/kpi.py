"""KPIs over real or simulated logs, and real-vs-simulated comparisons.

Moves are productive (gate/vessel work) or unproductive (yard shifts);
crane travel is rectilinear — gantry along the bay axis, trolley along the
row axis — in meters from the block's pitches. Dwell is counted for
containers departing inside the window; open stays are reported separately
as current dwell at the window end. Windows are inclusive of both ends.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime

from .errors import ReplayHalted, UnknownEquipmentLayout, WindowMismatch, YardTwinError
from .events import ARRIVAL_KINDS, DEPARTURE_KINDS, EventKind, EventLog, YardEvent
from .model import (
    SECONDS_PER_DAY,
    YardLayout,
    YardState,
    canonical_json,
    format_timestamp,
    slot_distance_m,
)


class MoveClass(enum.Enum):
    PRODUCTIVE = "PRODUCTIVE"
    UNPRODUCTIVE = "UNPRODUCTIVE"
    NON_MOVE = "NON_MOVE"


def classify_move(event: YardEvent) -> MoveClass:
    if event.kind is EventKind.YARD_SHIFT:
        return MoveClass.UNPRODUCTIVE
    if event.kind is EventKind.CRANE_POS:
        return MoveClass.NON_MOVE
    return MoveClass.PRODUCTIVE


def crane_travel(events, layout: YardLayout, inter_block_m: float = 0.0) -> float:
    """Meters travelled along one equipment's position trace.

    The trace is every CRANE_POS position plus the from/to slots of moves
    the equipment executed, in event order.
    """
    positions = []
    for event in events:
        if event.kind is EventKind.CRANE_POS:
            positions.append(event.to_slot)
        else:
            if event.from_slot is not None:
                positions.append(event.from_slot)
            if event.to_slot is not None:
                positions.append(event.to_slot)
    for pos in positions:
        if not layout.has_block(pos.block_id):
            raise UnknownEquipmentLayout(f"no block {pos.block_id!r} in layout")
    total = 0.0
    for a, b in zip(positions, positions[1:]):
        total += slot_distance_m(a, b, layout, inter_block_m)
    return total


@dataclass
class RehandleSummary:
    mean: float
    max: int
    histogram: dict  # rehandle count -> number of containers

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "max": self.max,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


@dataclass
class KpiReport:
    window: tuple[datetime, datetime]
    total_moves: int
    productive_moves: int
    unproductive_moves: int
    unproductive_ratio: float
    rehandles_per_container: RehandleSummary
    mean_dwell_days: float
    mean_current_dwell_days: float
    crane_travel_m: dict  # {"per_equipment": {...}, "total": float}
    occupancy_peak: dict  # block_id -> peak container count

    def to_dict(self) -> dict:
        return {
            "window": {
                "from": format_timestamp(self.window[0]),
                "to": format_timestamp(self.window[1]),
            },
            "total_moves": self.total_moves,
            "productive_moves": self.productive_moves,
            "unproductive_moves": self.unproductive_moves,
            "unproductive_ratio": self.unproductive_ratio,
            "rehandles_per_container": self.rehandles_per_container.to_dict(),
            "mean_dwell_days": self.mean_dwell_days,
            "mean_current_dwell_days": self.mean_current_dwell_days,
            "crane_travel_m": self.crane_travel_m,
            "occupancy_peak": self.occupancy_peak,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


@dataclass
class KpiComparison:
    real: KpiReport
    simulated: KpiReport
    deltas: dict

    def to_dict(self) -> dict:
        return {
            "real": self.real.to_dict(),
            "simulated": self.simulated.to_dict(),
            "deltas": self.deltas,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def kpi_report(log: EventLog, layout: YardLayout, window: tuple[datetime, datetime]) -> KpiReport:
    """Aggregate move, rehandle, dwell, crane-travel and occupancy KPIs."""
    time_from, time_to = window
    if time_from > time_to:
        raise ValueError("window start must be <= window end")

    from .engine import apply_event  # engine builds on events/model only

    state = YardState(layout)
    block_counts = {b.block_id: 0 for b in layout.blocks}

    def fold(event: YardEvent):
        try:
            apply_event(state, event)
        except YardTwinError as exc:
            raise ReplayHalted(event.seq, exc) from exc
        if event.kind in ARRIVAL_KINDS:
            block_counts[event.to_slot.block_id] += 1
        elif event.kind in DEPARTURE_KINDS:
            block_counts[event.from_slot.block_id] -= 1
        elif event.kind is EventKind.YARD_SHIFT:
            block_counts[event.from_slot.block_id] -= 1
            block_counts[event.to_slot.block_id] += 1

    productive = 0
    unproductive = 0
    shifts_per_container: dict[str, int] = {}
    touched: set[str] = set()
    dwell_days: list[float] = []
    equipment_trace: dict[str, list[YardEvent]] = {}

    events = [e for e in log if e.ts <= time_to]
    split = 0
    while split < len(events) and events[split].ts < time_from:
        fold(events[split])
        split += 1
    peaks = dict(block_counts)  # yard contents at window start count toward the peak

    for event in events[split:]:
        if event.equipment_id is not None:
            equipment_trace.setdefault(event.equipment_id, []).append(event)
        cls = classify_move(event)
        if cls is MoveClass.PRODUCTIVE:
            productive += 1
        elif cls is MoveClass.UNPRODUCTIVE:
            unproductive += 1
        if event.container_id is not None:
            touched.add(event.container_id)
        if event.kind is EventKind.YARD_SHIFT:
            shifts_per_container[event.container_id] = (
                shifts_per_container.get(event.container_id, 0) + 1
            )
        if event.kind in DEPARTURE_KINDS:
            record = state.containers.get(event.container_id)
            if record is not None and record.arrival_time is not None:
                dwell_days.append((event.ts - record.arrival_time).total_seconds() / SECONDS_PER_DAY)
        fold(event)
        for block_id, n in block_counts.items():
            if n > peaks[block_id]:
                peaks[block_id] = n

    total = productive + unproductive
    counts = [shifts_per_container.get(cid, 0) for cid in touched]
    histogram: dict[int, int] = {}
    for c in counts:
        histogram[c] = histogram.get(c, 0) + 1
    rehandles = RehandleSummary(
        mean=(sum(counts) / len(counts)) if counts else 0.0,
        max=max(counts) if counts else 0,
        histogram=histogram,
    )

    per_equipment = {
        eq: crane_travel(trace, layout) for eq, trace in sorted(equipment_trace.items())
    }
    current_dwell = [
        rec.dwell_days(time_to) for rec in state.containers.values() if rec.current_slot is not None
    ]

    return KpiReport(
        window=(time_from, time_to),
        total_moves=total,
        productive_moves=productive,
        unproductive_moves=unproductive,
        unproductive_ratio=(unproductive / total) if total else 0.0,
        rehandles_per_container=rehandles,
        mean_dwell_days=round(sum(dwell_days) / len(dwell_days), 1) if dwell_days else 0.0,
        mean_current_dwell_days=(
            round(sum(current_dwell) / len(current_dwell), 1) if current_dwell else 0.0
        ),
        crane_travel_m={
            "per_equipment": per_equipment,
            "total": sum(per_equipment.values()),
        },
        occupancy_peak=peaks,
    )


def compare_reports(real: KpiReport, simulated: KpiReport) -> KpiComparison:
    if real.window != simulated.window:
        raise WindowMismatch("KPI windows differ between real and simulated reports")
    deltas = {
        "total_moves": simulated.total_moves - real.total_moves,
        "productive_moves": simulated.productive_moves - real.productive_moves,
        "unproductive_moves": simulated.unproductive_moves - real.unproductive_moves,
        "unproductive_ratio": simulated.unproductive_ratio - real.unproductive_ratio,
        "rehandles_mean": simulated.rehandles_per_container.mean
        - real.rehandles_per_container.mean,
        "rehandles_max": simulated.rehandles_per_container.max
        - real.rehandles_per_container.max,
        "mean_dwell_days": simulated.mean_dwell_days - real.mean_dwell_days,
        "mean_current_dwell_days": simulated.mean_current_dwell_days
        - real.mean_current_dwell_days,
        "crane_travel_total_m": simulated.crane_travel_m["total"]
        - real.crane_travel_m["total"],
    }
    return KpiComparison(real=real, simulated=simulated, deltas=deltas)


def rehandle_histogram_csv(report: KpiReport) -> str:
    lines = ["rehandles,containers"]
    for count, n in sorted(report.rehandles_per_container.histogram.items()):
        lines.append(f"{count},{n}")
    return "\n".join(lines) + "\n"
