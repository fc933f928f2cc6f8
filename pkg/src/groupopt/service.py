"""HTTP facade over validate/allocate/report for the companion UI.

State is held in memory: a run is a minutes-long facilitation session,
not a durable job. Start with ``uvicorn groupopt.service:app``.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, File, Form, HTTPException, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .allocator import run as run_allocator
from .evaluation import build_report
from .io import (
    ColumnSpec,
    DuplicateIdError,
    ParseError,
    SchemaError,
    allocation_rows,
    allocations_to_csv,
    parse_panel_text,
    report_to_dict,
)
from .model import (
    ClusterCapacityError,
    ConfigError,
    Panel,
    RunConfig,
    default_table_count,
    suggest_cluster_tables,
    validate_config,
    validate_panel,
)


class RunConfigBody(BaseModel):
    num_tables: int
    num_rounds: int
    num_cluster_tables: int = 0
    swap_rounds: int = 5
    pareto_mix: float = 0.5
    saturation_base: float = 0.5
    rng_seed: int = 0
    meeting_weighting: str = "counts"


class RunRequest(BaseModel):
    panel_id: str
    config: RunConfigBody


@dataclass
class PanelRecord:
    panel_id: str
    panel: Panel
    columns: ColumnSpec
    issues: list
    suggestions: dict


@dataclass
class RunRecord:
    run_id: str
    panel_id: str
    status: str  # pending | done | failed
    config: dict
    report: Optional[dict] = None
    error: Optional[dict] = None
    allocations_csv: Optional[str] = None
    allocations_json: Optional[list] = None

    def public(self) -> dict:
        doc = {
            "run_id": self.run_id,
            "panel_id": self.panel_id,
            "status": self.status,
            "config": self.config,
            "report": self.report,
        }
        if self.error is not None:
            doc["error"] = self.error
        return doc


class ServiceState:
    def __init__(self):
        self.panels: dict[str, PanelRecord] = {}
        self.runs: dict[str, RunRecord] = {}
        self.lock = threading.Lock()


def _issue_dicts(issues) -> list[dict]:
    return [
        {"severity": i.severity, "code": i.code, "message": i.message} for i in issues
    ]


def _panel_suggestions(panel: Panel) -> dict:
    tables = default_table_count(panel.size)
    probe = RunConfig(num_tables=tables, num_rounds=1)
    minimum, recommended = suggest_cluster_tables(panel, probe)
    return {
        "default_tables": tables,
        "min_cluster_tables": minimum,
        "recommended_cluster_tables": recommended,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="groupopt", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = ServiceState()
    app.state.store = state

    @app.post("/api/panels", status_code=201)
    async def upload_panel(
        file: UploadFile = File(...),
        id_column: str = Form("id"),
        demographic_columns: Optional[str] = Form(None),
        cluster_column: Optional[str] = Form(None),
        cluster_value: Optional[str] = Form(None),
        manual_column: Optional[str] = Form(None),
        delimiter: str = Form(","),
    ):
        raw = (await file.read()).decode("utf-8", errors="replace")
        if not raw.strip():
            raise HTTPException(400, detail={"message": "uploaded panel file is empty"})
        if (cluster_column is None) != (cluster_value is None):
            raise HTTPException(
                400,
                detail={"message": "cluster_column and cluster_value must be given together"},
            )
        columns = ColumnSpec(
            id_column=id_column,
            demographic_columns=(
                tuple(c.strip() for c in demographic_columns.split(",") if c.strip())
                if demographic_columns else None
            ),
            cluster_column=cluster_column,
            cluster_value=cluster_value,
            manual_column=manual_column,
            delimiter=delimiter,
        )
        try:
            panel = parse_panel_text(raw, columns)
        except (ParseError, SchemaError, DuplicateIdError) as e:
            raise HTTPException(
                400,
                detail={
                    "message": str(e),
                    "issues": [{"severity": "error", "code": type(e).__name__, "message": str(e)}],
                },
            ) from e
        issues = validate_panel(panel, default_table_count(panel.size))
        suggestions = _panel_suggestions(panel)
        panel_id = uuid.uuid4().hex
        record = PanelRecord(
            panel_id=panel_id,
            panel=panel,
            columns=columns,
            issues=issues,
            suggestions=suggestions,
        )
        with state.lock:
            state.panels[panel_id] = record
        return {
            "panel_id": panel_id,
            "participants": panel.size,
            "demographics": [d.name for d in panel.demographics],
            "cluster_agents": len(panel.cluster_agents()),
            "issues": _issue_dicts(issues),
            "suggestions": suggestions,
        }

    @app.post("/api/runs", status_code=201)
    def create_run(body: RunRequest):
        with state.lock:
            panel_record = state.panels.get(body.panel_id)
        if panel_record is None:
            raise HTTPException(404, detail={"message": f"unknown panel {body.panel_id!r}"})
        panel = panel_record.panel
        config = RunConfig(**body.config.model_dump())

        errors = [i for i in validate_panel(panel, config.num_tables) if i.is_error]
        if errors:
            raise HTTPException(
                422,
                detail={
                    "message": "panel has validation errors",
                    "issues": _issue_dicts(errors),
                },
            )
        try:
            layout = validate_config(panel, config)
        except ClusterCapacityError as e:
            raise HTTPException(
                422,
                detail={
                    "message": str(e),
                    "suggestion": {"minimum": e.minimum, "recommended": e.recommended},
                },
            ) from e
        except ConfigError as e:
            raise HTTPException(422, detail={"message": str(e)}) from e

        run_id = uuid.uuid4().hex
        record = RunRecord(
            run_id=run_id,
            panel_id=body.panel_id,
            status="pending",
            config=body.config.model_dump(),
        )
        with state.lock:
            state.runs[run_id] = record
        try:
            plan, _ = run_allocator(panel, config)
            report = build_report(plan, panel, layout, config)
            record.report = report_to_dict(
                report, config, panel=panel, columns=panel_record.columns
            )
            record.allocations_csv = allocations_to_csv(plan, layout)
            record.allocations_json = [
                {"round": k, "id": pid, "table": table, "cluster_table": flag}
                for k, pid, table, flag in allocation_rows(plan, layout)
            ]
            record.status = "done"
        except Exception as e:  # a failed run is a stored outcome, not a 500
            record.error = {"message": str(e)}
            record.status = "failed"
        return {"run_id": run_id, "status": record.status}

    def _run_or_404(run_id: str) -> RunRecord:
        with state.lock:
            record = state.runs.get(run_id)
        if record is None:
            raise HTTPException(404, detail={"message": f"unknown run {run_id!r}"})
        return record

    @app.get("/api/panels/{panel_id}")
    def get_panel(panel_id: str):
        with state.lock:
            record = state.panels.get(panel_id)
        if record is None:
            raise HTTPException(404, detail={"message": f"unknown panel {panel_id!r}"})
        return {
            "panel_id": record.panel_id,
            "participants": record.panel.size,
            "demographics": [d.name for d in record.panel.demographics],
            "cluster_agents": len(record.panel.cluster_agents()),
            "issues": _issue_dicts(record.issues),
            "suggestions": record.suggestions,
        }

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        return _run_or_404(run_id).public()

    @app.get("/api/runs/{run_id}/allocations")
    def get_allocations(run_id: str, request: Request):
        record = _run_or_404(run_id)
        if record.status != "done":
            raise HTTPException(
                409, detail={"message": f"run {run_id!r} is {record.status}; no allocations"}
            )
        accept = request.headers.get("accept", "")
        if "application/json" in accept:
            return JSONResponse(record.allocations_json)
        return Response(
            content=record.allocations_csv,
            media_type="text/csv",
            headers={"Content-Disposition": 'attachment; filename="allocations.csv"'},
        )

    return app


app = create_app()
