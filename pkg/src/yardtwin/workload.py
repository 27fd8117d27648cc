"""Deterministic synthetic workloads: replayable logs for tests and demos.

Every generator keeps a shadow yard state, so the emitted log is legal by
construction (no floating placements, departures only after clearing
blockers with explicit YARD_SHIFTs). Same seed, same log.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from .events import EventKind, EventLog, YardEvent
from .model import ContainerRecord, YardLayout, YardState
from .strategies import feasible_slots

_PORTS = ("NLRTM", "SGSIN", "CNSHA", "USLAX", "DEHAM", "AEJEA")
_ISO_TYPES = ("22G1", "42G1", "45G1", "22R1")


def _random_feasible(state: YardState, rng: random.Random, exclude_stack=None):
    slots = feasible_slots(state)
    if exclude_stack is not None:
        slots = [s for s in slots if s.stack != exclude_stack]
    if not slots:
        return None
    return slots[rng.randrange(len(slots))]


def _arrival_record(cid: str, ts, rng: random.Random) -> ContainerRecord:
    return ContainerRecord(
        container_id=cid,
        iso_type=rng.choice(_ISO_TYPES),
        origin_port=rng.choice(_PORTS),
        destination_port=rng.choice(_PORTS),
        arrival_time=ts,
        departure_booked=rng.random() < 0.5,
    )


def synthetic_log(
    layout: YardLayout,
    n_events: int,
    seed: int = 0,
    start: datetime | None = None,
) -> EventLog:
    """A legal mixed log of exactly n_events arrivals/departures/shifts/positions."""
    rng = random.Random(seed)
    ts = start or datetime(2024, 3, 1, 6, 0, tzinfo=timezone.utc)
    state = YardState(layout)
    events: list[YardEvent] = []
    next_id = 0

    def tick():
        nonlocal ts
        ts = ts + timedelta(seconds=rng.randint(5, 120))
        return ts

    def emit(kind, container_id=None, from_slot=None, to_slot=None, attrs=None):
        events.append(
            YardEvent(
                seq=len(events),
                ts=tick(),
                kind=kind,
                container_id=container_id,
                from_slot=from_slot,
                to_slot=to_slot,
                equipment_id=f"RTG-{rng.randint(1, 3):02d}",
                attrs=attrs or {},
            )
        )

    while len(events) < n_events:
        in_yard = [cid for cid, rec in state.containers.items() if rec.current_slot is not None]
        free = len(feasible_slots(state))
        roll = rng.random()
        if not in_yard or (roll < 0.45 and free > 0):
            next_id += 1
            cid = f"CNT{next_id:06d}"
            slot = _random_feasible(state, rng)
            if slot is None:
                continue
            record = _arrival_record(cid, ts, rng)
            attrs = {
                "iso_type": record.iso_type,
                "origin_port": record.origin_port,
                "destination_port": record.destination_port,
                "departure_booked": record.departure_booked,
            }
            kind = EventKind.GATE_IN if rng.random() < 0.5 else EventKind.VESSEL_DISCHARGE
            emit(kind, cid, to_slot=slot, attrs=attrs)
            state.place(record, slot)
            state.clock = ts
        elif roll < 0.85:
            cid = rng.choice(in_yard)
            record = state.containers[cid]
            target = record.current_slot
            aborted = False
            while state.blocking_count(cid) > 0 and len(events) < n_events:
                top = state.top_slot(*target.stack)
                blocker_id = state.occupancy[top]
                slot = _random_feasible(state, rng, exclude_stack=target.stack)
                if slot is None:
                    aborted = True
                    break
                emit(EventKind.YARD_SHIFT, blocker_id, from_slot=top, to_slot=slot)
                moved = state.remove(top)
                state.place(moved, slot)
                moved.rehandle_count += 1
            if aborted or state.blocking_count(cid) > 0:
                continue  # ran out of room or event budget mid-clear; pick again
            kind = EventKind.GATE_OUT if rng.random() < 0.5 else EventKind.VESSEL_LOAD
            emit(kind, cid, from_slot=record.current_slot)
            state.remove(record.current_slot)
        elif roll < 0.95 and in_yard:
            cid = rng.choice(in_yard)
            record = state.containers[cid]
            top = state.top_slot(*record.current_slot.stack)
            slot = _random_feasible(state, rng, exclude_stack=record.current_slot.stack)
            if slot is None:
                continue
            moved_id = state.occupancy[top]
            emit(EventKind.YARD_SHIFT, moved_id, from_slot=top, to_slot=slot)
            moved = state.remove(top)
            state.place(moved, slot)
            moved.rehandle_count += 1
        else:
            block = rng.choice(layout.blocks)
            emit(
                EventKind.CRANE_POS,
                to_slot=_pos(block, rng),
            )
    return EventLog(tuple(events))


def _pos(block, rng):
    from .model import SlotAddress

    return SlotAddress(
        block.block_id, rng.randint(1, block.bay_count), rng.randint(1, block.row_count), 1
    )


def grouped_workload(
    layout: YardLayout,
    n_containers: int,
    n_groups: int = 4,
    seed: int = 0,
    start: datetime | None = None,
) -> EventLog:
    """Interleaved arrivals in destination groups, then group-by-group departures.

    The shape behind the strategy comparison: mixed stacking at arrival
    time, clustered demand at departure time, so placement policy drives
    the rehandle count.
    """
    rng = random.Random(seed)
    ts = start or datetime(2024, 3, 1, 6, 0, tzinfo=timezone.utc)
    state = YardState(layout)
    events: list[YardEvent] = []
    groups = [f"P{g}" for g in range(n_groups)]

    def tick():
        nonlocal ts
        ts = ts + timedelta(seconds=rng.randint(20, 90))
        return ts

    for i in range(n_containers):
        cid = f"BOX{i:05d}"
        dest = groups[i % n_groups]
        slot = _random_feasible(state, rng)
        if slot is None:
            raise RuntimeError("workload layout too small for the container count")
        attrs = {"iso_type": "22G1", "destination_port": dest, "departure_booked": True}
        record = ContainerRecord(
            container_id=cid,
            iso_type="22G1",
            destination_port=dest,
            arrival_time=ts,
            departure_booked=True,
        )
        events.append(
            YardEvent(
                seq=len(events),
                ts=tick(),
                kind=EventKind.GATE_IN,
                container_id=cid,
                to_slot=slot,
                equipment_id="RTG-01",
                attrs=attrs,
            )
        )
        state.place(record, slot)

    for dest in groups:  # one vessel call per destination group
        departing = [
            cid
            for cid, rec in state.containers.items()
            if rec.current_slot is not None and rec.destination_port == dest
        ]
        rng.shuffle(departing)
        for cid in departing:
            record = state.containers[cid]
            target = record.current_slot
            while state.blocking_count(cid) > 0:
                top = state.top_slot(*target.stack)
                blocker_id = state.occupancy[top]
                slot = _random_feasible(state, rng, exclude_stack=target.stack)
                if slot is None:
                    raise RuntimeError("workload yard too full to clear blockers")
                events.append(
                    YardEvent(
                        seq=len(events),
                        ts=tick(),
                        kind=EventKind.YARD_SHIFT,
                        container_id=blocker_id,
                        from_slot=top,
                        to_slot=slot,
                        equipment_id="RTG-02",
                    )
                )
                moved = state.remove(top)
                state.place(moved, slot)
                moved.rehandle_count += 1
            events.append(
                YardEvent(
                    seq=len(events),
                    ts=tick(),
                    kind=EventKind.VESSEL_LOAD,
                    container_id=cid,
                    from_slot=record.current_slot,
                    equipment_id="RTG-02",
                )
            )
            state.remove(record.current_slot)
    return EventLog(tuple(events))
