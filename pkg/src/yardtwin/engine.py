"""Mirror-mode replay and counterfactual simulation.

Mirror mode folds the real event log into yard state, snapshot by snapshot.
Counterfactual mode keeps the logged demand (arrivals and departures in the
window) but lets a strategy choose every placement and relocation; blocked
departures trigger synthetic YARD_SHIFT events, flagged ``synthetic``.

A counterfactual SimulatedLog is standalone-replayable: it starts with the
real log's pre-window prefix verbatim (the warm start), then the simulated
window. Logged YARD_SHIFT and CRANE_POS events inside the window belong to
the real yard's trajectory and are dropped — the strategy owns relocations
and the simulated cranes move with the simulated work.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from datetime import datetime, timedelta

from .errors import (
    ContainerMismatch,
    NoFeasibleSlot,
    ReplayHalted,
    UnknownContainer,
    WindowMismatch,
    YardTwinError,
)
from .events import ARRIVAL_KINDS, DEPARTURE_KINDS, EventKind, EventLog, YardEvent
from .model import ContainerRecord, SlotAddress, YardLayout, YardState
from .strategies import StrategySpec, feasible_slots, make_strategy


class Step(str, enum.Enum):
    EVENT = "EVENT"
    HOUR = "HOUR"
    DAY = "DAY"


class JobStatus(str, enum.Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAILED = "FAILED"


@dataclass
class SimulationJob:
    job_id: str
    time_from: datetime
    time_to: datetime
    step: Step
    strategy: StrategySpec
    seed: int
    status: JobStatus = JobStatus.PENDING

    def __post_init__(self):
        if self.time_from > self.time_to:
            raise ValueError("time_from must be <= time_to")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")


@dataclass
class SimulatedLog:
    events: EventLog
    job_id: str
    time_from: datetime
    time_to: datetime

    def to_jsonl(self) -> str:
        return self.events.to_jsonl()


def _record_from_arrival(event: YardEvent) -> ContainerRecord:
    attrs = dict(event.attrs)
    return ContainerRecord(
        container_id=event.container_id,
        iso_type=str(attrs.get("iso_type", "")),
        origin_port=attrs.get("origin_port"),
        destination_port=attrs.get("destination_port"),
        arrival_time=event.ts,
        departure_booked=bool(attrs.get("departure_booked", False)),
        attrs=attrs,
    )


def apply_event(state: YardState, event: YardEvent) -> YardState:
    """Fold one event into the state; errors carry the event's seq."""
    try:
        if event.kind in ARRIVAL_KINDS:
            state.place(_record_from_arrival(event), event.to_slot)
        elif event.kind in DEPARTURE_KINDS:
            _checked_occupant(state, event.from_slot, event.container_id)
            state.remove(event.from_slot)
        elif event.kind is EventKind.YARD_SHIFT:
            _checked_occupant(state, event.from_slot, event.container_id)
            record = state.remove(event.from_slot)
            state.place(record, event.to_slot)
            record.rehandle_count += 1
        elif event.kind is EventKind.CRANE_POS:
            pass  # position bookkeeping below
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unhandled event kind {event.kind}")
    except YardTwinError as exc:
        exc.seq = event.seq
        raise
    if event.equipment_id is not None:
        state.equipment[event.equipment_id] = event.to_slot or event.from_slot
    state.clock = event.ts
    return state


def _checked_occupant(state: YardState, slot: SlotAddress, container_id: str):
    occupant = state.occupancy.get(slot)
    if occupant is not None and occupant != container_id:
        raise ContainerMismatch(f"{slot} holds {occupant!r}, event names {container_id!r}")


def state_at(log: EventLog, layout: YardLayout, at: datetime) -> YardState:
    """Fold every event with ts <= at (the mirror's state at that instant)."""
    state = YardState(layout)
    for event in log:
        if event.ts > at:
            break
        try:
            apply_event(state, event)
        except YardTwinError as exc:
            raise ReplayHalted(event.seq, exc) from exc
    return state


def replay(
    log: EventLog,
    layout: YardLayout,
    window: tuple[datetime, datetime] | None = None,
    step: Step = Step.EVENT,
):
    """Yield (boundary time, immutable snapshot) pairs across the window.

    Events before the window are folded silently (warm start). With
    step=EVENT there is one snapshot per event, or a single initial
    snapshot if the window holds no events; HOUR/DAY emit snapshots on the
    fixed grid anchored at the window start, always including the window
    end.
    """
    state = YardState(layout)
    if window is None:
        in_window = list(log)
        time_from = in_window[0].ts if in_window else None
        time_to = in_window[-1].ts if in_window else None
    else:
        time_from, time_to = window
        if time_from > time_to:
            raise ValueError("window start must be <= window end")
        for event in log.before(time_from):
            _apply_or_halt(state, event)
        in_window = list(log.window(time_from, time_to))

    if step is Step.EVENT:
        if not in_window:
            state.clock = state.clock or time_from
            yield (time_from, state.copy())
            return
        for event in in_window:
            _apply_or_halt(state, event)
            yield (event.ts, state.copy())
        return

    delta = timedelta(hours=1) if step is Step.HOUR else timedelta(days=1)
    if time_from is None:  # empty log, no explicit window
        yield (None, state.copy())
        return
    boundaries = []
    cursor = time_from + delta
    while cursor < time_to:
        boundaries.append(cursor)
        cursor += delta
    boundaries.append(time_to)
    idx = 0
    for boundary in boundaries:
        while idx < len(in_window) and in_window[idx].ts <= boundary:
            _apply_or_halt(state, in_window[idx])
            idx += 1
        yield (boundary, state.copy())


def _apply_or_halt(state: YardState, event: YardEvent):
    try:
        apply_event(state, event)
    except YardTwinError as exc:
        raise ReplayHalted(event.seq, exc) from exc


def _renumber(events: list[YardEvent]) -> EventLog:
    return EventLog(tuple(replace(e, seq=i) for i, e in enumerate(events)))


def counterfactual_run(log: EventLog, layout: YardLayout, job: SimulationJob) -> SimulatedLog:
    """Re-run the window's demand under the job's strategy.

    Arrivals keep their logged times but land where the strategy says;
    departures keep their times, with blockers relocated one by one to
    strategy-chosen slots (synthetic YARD_SHIFTs) first. Deterministic for
    a fixed seed.
    """
    strategy = make_strategy(job.strategy)
    prefix = list(log.before(job.time_from))
    in_window = list(log.window(job.time_from, job.time_to))

    if strategy.replays_log:
        return SimulatedLog(
            events=_renumber(prefix + in_window),
            job_id=job.job_id,
            time_from=job.time_from,
            time_to=job.time_to,
        )

    scope = job.strategy.params.get("placement_scope", "logged_block")
    cross_block = bool(job.strategy.params.get("cross_block_relocations", False))
    rng = random.Random(job.seed)

    state = YardState(layout)
    for event in prefix:
        _apply_or_halt(state, event)

    out: list[YardEvent] = list(prefix)

    def emit(event: YardEvent):
        _apply_or_halt(state, event)
        out.append(event)

    for event in in_window:
        if event.kind in ARRIVAL_KINDS:
            record = _record_from_arrival(event)
            candidates = None
            if scope == "logged_block" and event.to_slot is not None:
                scoped = feasible_slots(state, block_ids={event.to_slot.block_id})
                if scoped:
                    candidates = scoped
            try:
                slot = strategy.choose_placement(
                    state, record, rng, candidates=candidates, equipment_id=event.equipment_id
                )
            except NoFeasibleSlot as exc:
                exc.seq = event.seq
                raise
            emit(replace(event, to_slot=slot))
        elif event.kind in DEPARTURE_KINDS:
            record = state.containers.get(event.container_id)
            if record is None or record.current_slot is None:
                raise ReplayHalted(
                    event.seq,
                    UnknownContainer(f"departure of {event.container_id!r} not in simulated yard"),
                )
            target = record.current_slot
            while state.blocking_count(event.container_id) > 0:
                top = state.top_slot(*target.stack)
                blocker = state.containers[state.occupancy[top]]
                candidates = feasible_slots(state, block_ids={target.block_id})
                candidates = [c for c in candidates if c.stack != target.stack]
                if not candidates and cross_block:
                    candidates = [c for c in feasible_slots(state) if c.stack != target.stack]
                if not candidates:
                    raise NoFeasibleSlot(
                        f"cannot clear blocker {blocker.container_id!r} above "
                        f"{event.container_id!r} at {target}",
                        seq=event.seq,
                    )
                slot = strategy.choose_relocation(
                    state,
                    blocker,
                    target.stack,
                    rng,
                    candidates=candidates,
                    equipment_id=event.equipment_id,
                )
                emit(
                    YardEvent(
                        seq=0,  # renumbered below
                        ts=event.ts,
                        kind=EventKind.YARD_SHIFT,
                        container_id=blocker.container_id,
                        from_slot=top,
                        to_slot=slot,
                        equipment_id=event.equipment_id,
                        synthetic=True,
                    )
                )
            emit(replace(event, from_slot=record.current_slot))
        # logged YARD_SHIFT / CRANE_POS: the strategy owns relocations, the
        # simulated cranes follow simulated work — drop them.

    return SimulatedLog(
        events=_renumber(out),
        job_id=job.job_id,
        time_from=job.time_from,
        time_to=job.time_to,
    )


def compare_runs(
    real: EventLog,
    simulated: SimulatedLog,
    layout: YardLayout,
    window: tuple[datetime, datetime],
):
    """KPI reports for both logs over the window, plus simulated - real deltas."""
    from .kpi import compare_reports, kpi_report

    if (simulated.time_from, simulated.time_to) != tuple(window):
        raise WindowMismatch(
            f"simulation window {simulated.time_from}..{simulated.time_to} "
            f"does not match {window[0]}..{window[1]}"
        )
    real_report = kpi_report(real, layout, window)
    sim_report = kpi_report(simulated.events, layout, window)
    return compare_reports(real_report, sim_report)
