"""HTTP service exposing a model-family artifact to the explorer UI."""

from __future__ import annotations

import datetime
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .metrics import ConfusionCounts, GroupConfusion, disparity
from .store import (
    ModelFamilyArtifact,
    SelectionRecord,
    SelectionValidationError,
    append_selection,
    validate_selection,
)

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>fairfrontier</title></head>
<body>
<h1>fairfrontier service</h1>
<p>The explorer UI bundle is not installed. The API is live:</p>
<ul>
<li><code>GET /api/metadata</code></li>
<li><code>GET /api/frontier?attribute=A&amp;threshold=T</code></li>
<li><code>GET /api/evaluation?model=M&amp;threshold=T[&amp;attribute=A]</code></li>
<li><code>POST /api/selection</code></li>
</ul>
<p>Build the frontend (see README) and pass its dist directory via --ui.</p>
</body></html>
"""


class ApiError(Exception):
    def __init__(self, status: int, error: str, detail: str | list, valid_values=None):
        super().__init__(str(detail))
        self.status = status
        self.error = error
        self.detail = detail
        self.valid_values = valid_values


class CountsBody(BaseModel):
    tp: int
    fp: int
    fn: int
    tn: int


class GroupCountsBody(BaseModel):
    labels: list[str]
    a0: CountsBody
    a1: CountsBody


class MetadataResponse(BaseModel):
    schema_version: int
    attributes: list[str]
    thresholds: list[float]
    group_labels: dict[str, list[str]]
    dataset: dict
    eval_scope: str
    unweighted_model_id: str
    test_accuracy: float


class FrontierPointBody(BaseModel):
    model_id: str
    alpha: float
    beta: float
    errors: int
    disparity: int


class FrontierResponse(BaseModel):
    attribute: str
    threshold: float
    points: list[FrontierPointBody]


class EvaluationResponse(BaseModel):
    model_id: str
    threshold: float
    overall: CountsBody
    errors: int
    attribute: str | None = None
    by_group: GroupCountsBody | None = None
    disparity: int | None = None


class SelectionRequest(BaseModel):
    session_id: str = Field(min_length=1)
    model_id: str
    threshold: float
    view: str
    attribute: str | None = None
    rationale: str | None = None


class SelectionAck(BaseModel):
    sequence: int
    timestamp: str


def _counts_body(c: ConfusionCounts) -> CountsBody:
    return CountsBody(tp=c.tp, fp=c.fp, fn=c.fn, tn=c.tn)


def create_app(
    artifact: ModelFamilyArtifact,
    selections_path: str | Path,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Wire the artifact behind read endpoints plus the selection recorder.

    Reads are pure functions of the loaded artifact; the only mutable state
    is the append-only selection log.
    """
    app = FastAPI(title="fairfrontier", docs_url=None, redoc_url=None)
    selections_path = Path(selections_path)

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        body = {"error": exc.error, "detail": exc.detail}
        if exc.valid_values is not None:
            body["valid_values"] = exc.valid_values
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(RequestValidationError)
    async def on_request_error(request: Request, exc: RequestValidationError):
        reasons = [
            {"field": ".".join(str(p) for p in err["loc"] if p != "body"), "reason": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=422, content={"error": "validation_error", "detail": reasons}
        )

    def resolve_threshold(value: float) -> float:
        for t in artifact.thresholds:
            if t == value:
                return t
        raise ApiError(
            404,
            "unknown_threshold",
            f"threshold {value} is not on the precomputed grid",
            valid_values={"thresholds": artifact.thresholds},
        )

    def resolve_attribute(value: str) -> str:
        if value not in artifact.attributes:
            raise ApiError(
                404,
                "unknown_attribute",
                f"attribute {value!r} is not in this artifact",
                valid_values={"attributes": artifact.attributes},
            )
        return value

    @app.get("/api/metadata", response_model=MetadataResponse)
    async def get_metadata():
        meta = artifact.metadata
        return MetadataResponse(
            schema_version=artifact.schema_version,
            attributes=artifact.attributes,
            thresholds=artifact.thresholds,
            group_labels={meta["attribute"]: list(meta["group_labels"])},
            dataset=meta["dataset"],
            eval_scope=meta["eval_scope"],
            unweighted_model_id=meta["unweighted_model_id"],
            test_accuracy=meta["test_accuracy"],
        )

    @app.get("/api/frontier", response_model=FrontierResponse)
    async def get_frontier(attribute: str, threshold: float):
        attribute = resolve_attribute(attribute)
        t = resolve_threshold(threshold)
        fs = artifact.frontier(attribute, t)
        if fs is None:
            raise ApiError(
                404,
                "unknown_threshold",
                f"no frontier at threshold {threshold}",
                valid_values={"thresholds": sorted(artifact.frontiers[attribute])},
            )
        return FrontierResponse(
            attribute=attribute,
            threshold=t,
            points=[
                FrontierPointBody(
                    model_id=p.model_id,
                    alpha=p.grid.alpha,
                    beta=p.grid.beta,
                    errors=p.errors,
                    disparity=p.disparity,
                )
                for p in fs.points
            ],
        )

    @app.get("/api/evaluation", response_model=EvaluationResponse, response_model_exclude_none=True)
    async def get_evaluation(model: str, threshold: float, attribute: str | None = None):
        if model not in artifact.models:
            raise ApiError(
                404,
                "unknown_model",
                f"model {model!r} is not in this artifact",
                valid_values={"models": sorted(artifact.models)},
            )
        t = resolve_threshold(threshold)
        gc: GroupConfusion | None = artifact.evaluation(model, t)
        if gc is None:
            raise ApiError(
                404,
                "unknown_threshold",
                f"no precomputed evaluation for {model!r} at threshold {threshold}",
                valid_values={"thresholds": sorted(artifact.evaluations.get(model, {}))},
            )
        response = EvaluationResponse(
            model_id=model,
            threshold=t,
            overall=_counts_body(gc.overall),
            errors=gc.overall.errors,
        )
        if attribute is not None:
            attribute = resolve_attribute(attribute)
            response.attribute = attribute
            response.by_group = GroupCountsBody(
                labels=list(artifact.metadata["group_labels"]),
                a0=_counts_body(gc.group_a0),
                a1=_counts_body(gc.group_a1),
            )
            response.disparity = disparity(gc)
        return response

    @app.post("/api/selection", response_model=SelectionAck)
    async def post_selection(request: SelectionRequest):
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        record = SelectionRecord(
            timestamp=timestamp,
            session_id=request.session_id,
            attribute=request.attribute,
            threshold=request.threshold,
            model_id=request.model_id,
            view=request.view,
            rationale=request.rationale,
        )
        try:
            validate_selection(record, artifact)
        except SelectionValidationError as exc:
            raise ApiError(
                400,
                "invalid_selection",
                [{"field": field, "reason": msg} for field, msg in exc.reasons],
            )
        sequence = append_selection(record, selections_path)
        return SelectionAck(sequence=sequence, timestamp=timestamp)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        async def index():
            return _FALLBACK_PAGE

    return app
