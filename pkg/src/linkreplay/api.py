"""HTTP control surface and live event stream for a replay session.

The API layer holds no replay state of its own: commands are forwarded to
the session's event loop and events fan out to subscribers over persistent
NDJSON streams.  Observing a replay never perturbs it — subscribers that
fall behind are disconnected rather than back-pressuring the driver.

Endpoints:
  GET  /status                     session state
  GET  /scenario?path_id=          active scenario as CSV
  POST /control                    start | pause | resume | seek | set_speed
  POST /pipeline/correct           rerun delay correction, return intervals
  GET  /events?kinds=&path_id=     NDJSON stream of replay events
  GET  /report                     comparison result, when configured
"""

from __future__ import annotations

import queue as queue_mod
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from .errors import InvalidTransition, SessionNotFound
from .ingest import write_scenario_csv
from .model import CorrectionParams
from .orchestrator import ReplaySession, _SENTINEL
from .pipeline import correct_delay
from .report import ComparisonResult


class StatusResponse(BaseModel):
    status: str
    t_ms: int
    speed: float
    lat_deg: Optional[float] = None
    lon_deg: Optional[float] = None
    paths: dict[str, dict] = Field(default_factory=dict)
    active_variant: str = "raw"


class ControlRequest(BaseModel):
    cmd: str
    t_ms: Optional[int] = None
    speed: Optional[float] = None
    variant: Optional[str] = None


class CorrectionRequest(BaseModel):
    path_id: Optional[str] = None
    b_th_bps: float = 700_000.0
    d_th_ms: float = 50.0
    t_th_ms: int = 250
    t_adj_ms: int = 1000


class IntervalModel(BaseModel):
    start_ms: int
    end_ms: int
    replacement_delay_ms: float
    replacement_jitter_ms: float
    window_sample_count: int


class CorrectionResponse(BaseModel):
    path_id: str
    intervals: list[IntervalModel]


def _status_of(session: ReplaySession) -> StatusResponse:
    state = session.state()
    lat, lon = state.position if state.position else (None, None)
    paths = {
        pid: {"rate_bps": p.rate_bps, "base_delay_ms": p.base_delay_ms,
              "jitter_ms": p.jitter_ms, "loss_rate": p.loss_rate}
        for pid, p in state.link_params.items()
    }
    return StatusResponse(status=state.status, t_ms=state.t_ms, speed=state.speed,
                          lat_deg=lat, lon_deg=lon, paths=paths,
                          active_variant=session.active_variant)


def create_app(session: ReplaySession | None,
               comparison: ComparisonResult | None = None) -> FastAPI:
    app = FastAPI(title="linkreplay control")
    # the dashboard may be served from another origin (testbed tool, no auth)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    app.state.session = session
    app.state.comparison = comparison

    def need_session() -> ReplaySession:
        if app.state.session is None:
            raise HTTPException(status_code=404, detail="no replay session configured")
        return app.state.session

    @app.get("/status", response_model=StatusResponse)
    def status() -> StatusResponse:
        return _status_of(need_session())

    @app.post("/control", response_model=StatusResponse)
    def control(req: ControlRequest) -> StatusResponse:
        session = need_session()
        try:
            session.control(req.cmd, t_ms=req.t_ms, speed=req.speed,
                            variant=req.variant)
        except InvalidTransition as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return _status_of(session)

    @app.get("/scenario", response_class=PlainTextResponse)
    def scenario(path_id: Optional[str] = None) -> str:
        session = need_session()
        if path_id is None:
            path_id = next(iter(session.scenarios))
        table = (session.corrected_scenarios
                 if session.active_variant == "corrected" else session.scenarios)
        chosen = table.get(path_id) or session.scenarios.get(path_id)
        if chosen is None:
            raise HTTPException(status_code=404, detail=f"unknown path_id {path_id!r}")
        return write_scenario_csv(chosen)

    @app.post("/pipeline/correct", response_model=CorrectionResponse)
    def pipeline_correct(req: CorrectionRequest) -> CorrectionResponse:
        session = need_session()
        path_id = req.path_id or next(iter(session.scenarios))
        raw = session.scenarios.get(path_id)
        if raw is None:
            raise HTTPException(status_code=404, detail=f"unknown path_id {path_id!r}")
        params = CorrectionParams(b_th_bps=req.b_th_bps, d_th_ms=req.d_th_ms,
                                  t_th_ms=req.t_th_ms, t_adj_ms=req.t_adj_ms)
        corrected, intervals = correct_delay(raw, params)
        session.corrected_scenarios[path_id] = corrected
        return CorrectionResponse(
            path_id=path_id,
            intervals=[IntervalModel(
                start_ms=iv.start_ms, end_ms=iv.end_ms,
                replacement_delay_ms=iv.replacement_delay_ms,
                replacement_jitter_ms=iv.replacement_jitter_ms,
                window_sample_count=iv.window_sample_count) for iv in intervals],
        )

    @app.get("/events")
    def events(kinds: Optional[str] = Query(default=None),
               path_id: Optional[str] = Query(default=None)) -> StreamingResponse:
        session = app.state.session
        if session is None:
            raise SessionNotFound("no replay session configured")
        kind_set = set(kinds.split(",")) if kinds else None
        sub = session.subscribe(kinds=kind_set, path_id=path_id)

        def stream():
            while True:
                try:
                    item = sub.queue.get(timeout=0.25)
                except queue_mod.Empty:
                    if sub.dropped:
                        return
                    state = session.state()
                    if state.status == "finished" and sub.queue.empty():
                        return
                    continue
                if item is _SENTINEL:
                    return
                yield item.to_json() + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.exception_handler(SessionNotFound)
    async def _session_not_found(request, exc):  # pragma: no cover - plumbing
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.get("/report")
    def report() -> dict:
        comparison = app.state.comparison
        if comparison is None:
            raise HTTPException(status_code=404,
                                detail="no comparison run is configured")
        import json
        return json.loads(comparison.to_json())

    return app
