"""HTTP facade over the mirror, KPIs and simulation jobs.

Read-only mirror endpoints plus job-based simulations; the yard itself is
the source of truth and nothing mutates mirror state over HTTP. Every
response is a pure function of (ingested log, layout, query) — "now" is
always an explicit parameter, and time-travel queries replay the mirror to
the requested instant. Snapshot bytes match the CLI's replay-to-t output.
"""

from __future__ import annotations

import hashlib
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .engine import SimulationJob, JobStatus, Step, compare_runs, counterfactual_run, state_at
from .errors import InvalidStrategy, YardTwinError
from .events import EventLog
from .kpi import kpi_report
from .model import YardLayout, YardState, canonical_json, format_timestamp, parse_timestamp
from .strategies import StrategySpec, make_strategy


class ApiError(Exception):
    """Maps a domain failure onto one HTTP status + machine-readable code."""

    def __init__(self, status: int, code: str, message: str, seq: int | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.seq = seq

    def response(self) -> JSONResponse:
        body = {"error": {"status": self.status, "code": self.code, "message": self.message}}
        if self.seq is not None:
            body["error"]["seq"] = self.seq
        return JSONResponse(status_code=self.status, content=body)


def _canonical(payload: dict, status: int = 200) -> Response:
    return Response(
        content=canonical_json(payload), status_code=status, media_type="application/json"
    )


def _parse_time(raw: str | None, name: str):
    if raw is None:
        raise ApiError(400, "MISSING_PARAMETER", f"query parameter '{name}' is required")
    try:
        return parse_timestamp(raw)
    except ValueError as exc:
        raise ApiError(400, "MALFORMED_TIME", f"{name}: {exc}") from None


@dataclass
class _JobRecord:
    job: SimulationJob
    request: dict
    result_json: str | None = None
    error: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class TwinService:
    """Mirror state, job store and worker pool behind the HTTP routes."""

    def __init__(self, layout: YardLayout, log: EventLog, workers: int = 2):
        self.layout = layout
        self.log = log
        self.horizon = log.events[-1].ts if len(log) else None
        self.executor = ThreadPoolExecutor(max_workers=max(1, workers))
        self.jobs: dict[str, _JobRecord] = {}
        self.jobs_lock = threading.Lock()

    def snapshot_at(self, at) -> YardState:
        if self.horizon is not None and at > self.horizon:
            raise ApiError(
                404,
                "NO_DATA_AT_TIME",
                f"mirror horizon is {format_timestamp(self.horizon)}; "
                f"{format_timestamp(at)} is beyond ingested data",
            )
        return state_at(self.log, self.layout, at)

    def submit(self, payload: dict) -> str:
        time_from = _parse_time(payload.get("from"), "from")
        time_to = _parse_time(payload.get("to"), "to")
        if time_from > time_to:
            raise ApiError(400, "BAD_WINDOW", "'from' must be <= 'to'")
        step_raw = payload.get("step", "EVENT")
        try:
            step = Step(step_raw)
        except ValueError:
            raise ApiError(400, "BAD_STEP", f"unknown step {step_raw!r}") from None
        strategy_raw = payload.get("strategy")
        try:
            spec = StrategySpec.from_dict(
                strategy_raw if isinstance(strategy_raw, dict) else {"name": strategy_raw}
            )
            make_strategy(spec)
        except InvalidStrategy as exc:
            raise ApiError(422, "INVALID_STRATEGY", str(exc)) from None
        seed = payload.get("seed", 0)
        if not isinstance(seed, int) or not (0 <= seed < 2**64):
            raise ApiError(400, "BAD_SEED", "seed must be a 64-bit unsigned integer")

        request = {
            "from": format_timestamp(time_from),
            "to": format_timestamp(time_to),
            "step": step.value,
            "strategy": spec.to_dict(),
            "seed": seed,
        }
        job_id = hashlib.sha256(canonical_json(request).encode()).hexdigest()[:16]
        with self.jobs_lock:
            if job_id in self.jobs:
                return job_id  # identical payload: same job, same result bytes
            job = SimulationJob(
                job_id=job_id,
                time_from=time_from,
                time_to=time_to,
                step=step,
                strategy=spec,
                seed=seed,
            )
            record = _JobRecord(job=job, request=request)
            self.jobs[job_id] = record
        self.executor.submit(self._run, record)
        return job_id

    def _run(self, record: _JobRecord):
        job = record.job
        with record.lock:
            job.status = JobStatus.RUNNING
        try:
            simulated = counterfactual_run(self.log, self.layout, job)
            comparison = compare_runs(
                self.log, simulated, self.layout, (job.time_from, job.time_to)
            )
            with record.lock:
                record.result_json = comparison.to_json()
                job.status = JobStatus.DONE
        except Exception as exc:  # surfaced via the job status, not the worker
            with record.lock:
                record.error = str(exc)
                job.status = JobStatus.FAILED

    def job_payload(self, job_id: str) -> dict:
        with self.jobs_lock:
            record = self.jobs.get(job_id)
        if record is None:
            raise ApiError(404, "UNKNOWN_JOB", f"no simulation job {job_id!r}")
        with record.lock:
            payload = {
                "job_id": job_id,
                "status": record.job.status.value,
                "request": record.request,
            }
            if record.result_json is not None:
                payload["result"] = json.loads(record.result_json)
            if record.error is not None:
                payload["error"] = record.error
        return payload

    def wait(self, job_id: str, timeout: float = 60.0):
        """Block until the job leaves the queue (tests and CLI convenience)."""
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self.jobs_lock:
                record = self.jobs.get(job_id)
            if record is None:
                return
            with record.lock:
                if record.job.status in (JobStatus.DONE, JobStatus.FAILED):
                    return
            time.sleep(0.01)


def _slot_detail(state: YardState, container_id: str, tier: int, at) -> dict:
    record = state.containers[container_id]
    return {
        "container_id": container_id,
        "tier": tier,
        "iso_type": record.iso_type,
        "origin_port": record.origin_port,
        "destination_port": record.destination_port,
        "dwell_days": record.dwell_days(at),
        "departure_booked": record.departure_booked,
        "rehandle_count": record.rehandle_count,
    }


def _bay_detail(state: YardState, block_id: str, bay: int, at) -> dict:
    spec = state.layout.block(block_id)
    rows = []
    for row in range(1, spec.row_count + 1):
        height = state.stack_height(block_id, bay, row)
        stack = [
            _slot_detail(state, state.occupancy[_slot(block_id, bay, row, tier)], tier, at)
            for tier in range(1, height + 1)
        ]
        rows.append({"row": row, "stack": stack})
    return {"bay": bay, "rows": rows}


def _slot(block_id, bay, row, tier):
    from .model import SlotAddress

    return SlotAddress(block_id, bay, row, tier)


def create_app(
    layout: YardLayout, log: EventLog, workers: int = 2, console_dir: str | None = None
) -> FastAPI:
    app = FastAPI(title="yardtwin", version="0.1.0", docs_url=None, redoc_url=None)
    service = TwinService(layout, log, workers)
    app.state.service = service

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(YardTwinError)
    async def _domain_error(request: Request, exc: YardTwinError):
        return ApiError(500, exc.code, str(exc), seq=exc.seq).response()

    @app.get("/yard/snapshot")
    def yard_snapshot(at: str | None = None):
        if at is None and service.horizon is None:
            ts = None
        else:
            ts = _parse_time(at, "at") if at is not None else service.horizon
        if ts is None:
            return _canonical(YardState(layout).snapshot_dict())
        return _canonical(service.snapshot_at(ts).snapshot_dict())

    @app.get("/kpi")
    def kpi(request: Request):
        time_from = _parse_time(request.query_params.get("from"), "from")
        time_to = _parse_time(request.query_params.get("to"), "to")
        if time_from > time_to:
            raise ApiError(400, "BAD_WINDOW", "'from' must be <= 'to'")
        report = kpi_report(service.log, service.layout, (time_from, time_to))
        return _canonical(report.to_dict())

    @app.post("/simulations")
    async def submit_simulation(request: Request):
        try:
            payload = await request.json()
        except Exception:
            raise ApiError(400, "MALFORMED_BODY", "request body must be a JSON object") from None
        if not isinstance(payload, dict):
            raise ApiError(400, "MALFORMED_BODY", "request body must be a JSON object")
        job_id = service.submit(payload)
        return _canonical({"job_id": job_id}, status=202)

    @app.get("/simulations/{job_id}")
    def simulation_status(job_id: str):
        return _canonical(service.job_payload(job_id))

    @app.get("/layout")
    def layout_route():
        return _canonical(service.layout.to_dict())

    @app.get("/blocks")
    def blocks(at: str | None = None, offset: int = 0, limit: int = 50):
        ts = _parse_time(at, "at") if at is not None else service.horizon
        state = service.snapshot_at(ts) if ts is not None else YardState(layout)
        entries = []
        for spec in service.layout.blocks:
            count = sum(
                1 for slot in state.occupancy if slot.block_id == spec.block_id
            )
            entries.append(
                {
                    "block_id": spec.block_id,
                    "bay_count": spec.bay_count,
                    "row_count": spec.row_count,
                    "max_tier": spec.max_tier,
                    "container_count": count,
                }
            )
        page = entries[offset : offset + limit]
        return _canonical(
            {"blocks": page, "total": len(entries), "offset": offset, "limit": limit}
        )

    def _state_for(at: str | None) -> tuple[YardState, object]:
        ts = _parse_time(at, "at") if at is not None else service.horizon
        if ts is None:
            return YardState(layout), None
        return service.snapshot_at(ts), ts

    @app.get("/blocks/{block_id}")
    def block_detail(block_id: str, at: str | None = None):
        if not service.layout.has_block(block_id):
            raise ApiError(404, "UNKNOWN_BLOCK", f"no block {block_id!r}")
        state, ts = _state_for(at)
        spec = service.layout.block(block_id)
        bays = [_bay_detail(state, block_id, bay, ts or state.clock) for bay in range(1, spec.bay_count + 1)]
        return _canonical(
            {
                "block_id": block_id,
                "at": format_timestamp(ts) if ts else None,
                "max_tier": spec.max_tier,
                "bays": bays,
            }
        )

    @app.get("/blocks/{block_id}/bays/{bay}")
    def bay_route(block_id: str, bay: int, at: str | None = None):
        if not service.layout.has_block(block_id):
            raise ApiError(404, "UNKNOWN_BLOCK", f"no block {block_id!r}")
        spec = service.layout.block(block_id)
        if not (1 <= bay <= spec.bay_count):
            raise ApiError(404, "UNKNOWN_BAY", f"bay {bay} outside 1..{spec.bay_count}")
        state, ts = _state_for(at)
        payload = _bay_detail(state, block_id, bay, ts or state.clock)
        payload["block_id"] = block_id
        payload["at"] = format_timestamp(ts) if ts else None
        payload["max_tier"] = spec.max_tier
        return _canonical(payload)

    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app
