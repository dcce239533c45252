"""HTTP facade over the toolkit: rules, clustering sessions, reports.

Plain JSON over a local port, no authentication; the data controller is on
the trusted side of this tool.  The bundled single-page UI, when built, is
served under /ui.
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..alarms import AlarmStore
from ..entropy import EntropyConfig
from ..leakage import build_report, whatif
from ..table1 import table1_entries
from .schemas import (
    AggregateReportModel,
    CommandRequest,
    ComponentModel,
    ComponentSigmaModel,
    CreateSessionRequest,
    EntropyConfigModel,
    HistogramModel,
    MixtureModelOut,
    RuleInfoModel,
    RuleLeakageModel,
    SessionCreatedModel,
    SessionStateModel,
    SigmaTablesModel,
    WhatIfRequest,
    WhatIfResponse,
)
from .sessions import SessionError, SessionManager, SessionSnapshot

DEFAULT_UI_DIR = Path(__file__).resolve().parent / "static"


def _state_model(snap: SessionSnapshot) -> SessionStateModel:
    sigma_tables = None
    if snap.leakage is not None:
        doc = snap.leakage.as_dict()
        sigma_tables = SigmaTablesModel(
            components=[
                ComponentSigmaModel(
                    index=c["index"],
                    beta=c["beta"],
                    median=c["median"],
                    scale=c["lambda"],
                    mean=c["mean"],
                    sigma_model=c["sigma_model"],
                    sigma_normal=c["sigma_normal"],
                    sigma_laplace=c["sigma_laplace"],
                )
                for c in doc["components"]
            ],
            rule_sigma_model=doc["rule"]["sigma_model"],
            rule_sigma_normal=doc["rule"]["sigma_normal"],
            rule_sigma_laplace=doc["rule"]["sigma_laplace"],
        )
    return SessionStateModel(
        session_id=snap.session_id,
        rule_id=snap.rule_id,
        state=snap.state,
        n_samples=snap.n_samples,
        config=EntropyConfigModel.from_config(snap.config),
        histogram=HistogramModel(edges=snap.histogram_edges, counts=snap.histogram_counts),
        model=MixtureModelOut(
            components=[
                ComponentModel(
                    median=c["median"],
                    scale=c["lambda"],
                    beta=c["beta"],
                    deleted=c["deleted"],
                )
                for c in snap.model_doc["components"]
            ],
            mml=snap.model_doc["mml"],
            iterations=snap.model_doc["iterations"],
            converged=snap.model_doc["converged"],
        ),
        sigma_tables=sigma_tables,
        edits_since_convergence=snap.edits_since_convergence,
    )


def create_app(
    store: AlarmStore,
    *,
    default_config: EntropyConfig = EntropyConfig(),
    impacts: dict[str, float] | None = None,
    seed: int = 0,
    bins: int = 64,
    ui_dir: Path | None = None,
) -> FastAPI:
    app = FastAPI(title="privleak session service", version="0.1.0")
    manager = SessionManager(store, default_config, bins=bins)
    app.state.manager = manager
    app.state.seed = seed
    app.state.impacts = impacts or {}

    @app.exception_handler(SessionError)
    async def _session_error(_, exc: SessionError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.get("/rules", response_model=list[RuleInfoModel])
    def rules():
        return [
            RuleInfoModel(rule_id=rule_id, alarms=store.rules[rule_id].count)
            for rule_id in store.rule_ids()
        ]

    @app.post("/sessions", response_model=SessionCreatedModel, status_code=201)
    def create_session(req: CreateSessionRequest):
        session, created = manager.create(
            req.rule_id, req.k_init, req.config.to_config(), seed=req.seed or app.state.seed
        )
        body = SessionCreatedModel(
            session_id=session.session_id,
            created=created,
            state=_state_model(session.snapshot()),
        )
        status = 201 if created else 200
        return JSONResponse(status_code=status, content=body.model_dump(by_alias=True))

    @app.get("/sessions/{session_id}/state", response_model=SessionStateModel)
    def session_state(session_id: str, bins: int | None = Query(default=None, ge=4, le=1024)):
        return _state_model(manager.get(session_id).snapshot(bins=bins))

    @app.post("/sessions/{session_id}/command", response_model=SessionStateModel)
    def session_command(session_id: str, command: CommandRequest):
        session = manager.get(session_id)
        session.command(
            command.op,
            k=command.k,
            median=command.median,
            clusters=command.clusters,
            x=command.x,
        )
        return _state_model(session.snapshot())

    @app.get("/reports/aggregate", response_model=AggregateReportModel)
    def aggregate():
        report = build_report(store, default_config, impacts=app.state.impacts)
        if not report.rows:
            raise HTTPException(status_code=422, detail="no rule has >= 2 usable alarms")
        return AggregateReportModel(
            sigma_all=report.sigma_all,
            config=EntropyConfigModel.from_config(default_config),
            rules=[
                RuleLeakageModel(
                    rule_id=r.rule_id,
                    alarms=r.count,
                    mean=r.mean,
                    median=r.median,
                    sigma_normal=r.sigma_normal,
                    sigma_laplace=r.sigma_laplace,
                    leakage_min=r.leakage_min,
                    leakage_max=r.leakage_max,
                    impact=r.impact,
                    pi=r.pi,
                )
                for r in report.rows
            ],
        )

    @app.post("/reports/whatif", response_model=WhatIfResponse)
    def reports_whatif(req: WhatIfRequest):
        if req.table1:
            entries = table1_entries()
        else:
            report = build_report(store, default_config, impacts=app.state.impacts)
            entries = report.entries()
        if not entries:
            raise HTTPException(status_code=422, detail="nothing to aggregate")
        try:
            old, new = whatif(entries, remove=req.remove, zero=req.anonymize)
        except KeyError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return WhatIfResponse(old_sigma_all=old, new_sigma_all=new)

    ui = ui_dir if ui_dir is not None else DEFAULT_UI_DIR
    if ui.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui), html=True), name="ui")

    return app
