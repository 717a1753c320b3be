"""HTTP API over the annotation queue, label store, and reports.

The service exposes the current query batch to annotators, records
their judgments, and reports iteration metrics and corpus coverage.
It owns no learning state of its own: the queue is whatever batch the
active-learning driver has pending, and submitting the last required
label triggers consolidation inside the label store. Annotators
authenticate with static bearer tokens loaded from a JSON file, and
model hints stay hidden unless the service runs in adjudication mode,
so annotators judge segments blind.
"""

from __future__ import annotations

import json
import secrets
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .active import ActiveLearningDriver, score_candidates
from .annotation import ConsolidationResult, LabelStore
from .compliance import ComplianceSummary
from .errors import FormatError, GdprScanError, InvalidLabel, NotFound, StateError
from .labels import label_from_code

TOKEN_FILE_ENV = "GDPRSCAN_TOKEN_FILE"


class ApiError(Exception):
    """An HTTP-mapped failure carrying the wire error code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"error": code, "message": message}, status_code=status)


def load_tokens(path) -> dict[str, str]:
    """Read the annotator token table from a JSON object file.

    The file maps annotator id to bearer token. Both must be non-empty
    strings and tokens must be unique, otherwise a presented token
    would not identify one annotator.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise FormatError("cannot read token file %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise FormatError("token file %s is not valid JSON: %s" % (path, exc))
    if not isinstance(raw, dict) or not raw:
        raise FormatError("token file %s must be a non-empty JSON object" % (path,))
    tokens: dict[str, str] = {}
    for annotator_id, token in raw.items():
        if not isinstance(token, str) or not token or not annotator_id:
            raise FormatError(
                "token file %s: entry %r must map a non-empty id to a "
                "non-empty string token" % (path, annotator_id)
            )
        tokens[str(annotator_id)] = token
    if len(set(tokens.values())) != len(tokens):
        raise FormatError("token file %s contains duplicate tokens" % (path,))
    return tokens


class AnnotationService:
    """Shared state behind the HTTP handlers.

    Wires together the label store (segments, judgments,
    consolidations), the optional active-learning driver (pending
    queue and iteration history), the optional compliance summary,
    and the annotator token table. ``reveal_hints`` switches on
    adjudication mode, exposing model predictions and co-annotator
    labels that are hidden from regular annotators.
    """

    def __init__(self, store: LabelStore, tokens: dict[str, str],
                 driver: ActiveLearningDriver | None = None,
                 report: ComplianceSummary | None = None,
                 reveal_hints: bool = False, on_change=None):
        if not tokens:
            raise ValueError("at least one annotator token is required")
        if len(set(tokens.values())) != len(tokens):
            raise ValueError("annotator tokens must be unique")
        self.store = store
        self.tokens = dict(tokens)
        self.driver = driver
        self.report = report
        self.reveal_hints = reveal_hints
        self.on_change = on_change
        self._hint_cache: tuple[tuple, dict] | None = None

    def changed(self) -> None:
        """Invoke the persistence hook after a mutating request."""
        if self.on_change is not None:
            self.on_change()

    def authenticate(self, request: Request) -> str:
        """Resolve the bearer token to an annotator id or raise 401."""
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "unauthorized", "missing bearer token")
        token = header[7:].strip()
        for annotator_id, expected in self.tokens.items():
            if secrets.compare_digest(token, expected):
                return annotator_id
        raise ApiError(401, "unauthorized", "unrecognized token")

    def pending_refs(self) -> list[tuple[str, int]]:
        """The current query batch, in the order it was selected."""
        if self.driver is None or self.driver.pending is None:
            raise ApiError(409, "no_active_iteration",
                           "no query batch is awaiting labels")
        return list(self.driver.pending)

    def pending_candidates(self) -> dict:
        """Model scores for the pending batch, for adjudication hints.

        Scoring reruns the current model over the queued segments, so
        the result is cached until the batch changes.
        """
        refs = tuple(self.pending_refs())
        if self._hint_cache is not None and self._hint_cache[0] == refs:
            return self._hint_cache[1]
        model = self.driver.ensure_model()
        segments = [self.store.segment(*ref) for ref in refs]
        scored = score_candidates(model, self.driver.embeddings, segments)
        mapping = {c.ref: c for c in scored}
        self._hint_cache = (refs, mapping)
        return mapping


def _consolidation_dict(res: ConsolidationResult) -> dict:
    out = {
        "doc_id": res.doc_id,
        "seg_id": res.seg_id,
        "status": res.status.value,
        "gold_label_code": res.gold_label_code,
        "agreement": res.agreement,
    }
    if res.resolved_by is not None:
        out["resolved_by"] = res.resolved_by
    if res.resolved_at is not None:
        out["resolved_at"] = res.resolved_at.isoformat()
    return out


class LabelSubmission(BaseModel):
    doc_id: str
    seg_id: int
    label_code: int


class DiscussionResolution(BaseModel):
    outcome: str
    label_code: int | None = None


def create_app(service: AnnotationService, static_dir=None) -> FastAPI:
    """Build the FastAPI application around one service instance."""
    app = FastAPI(title="gdprscan annotation service", docs_url=None,
                  redoc_url=None, openapi_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError) -> JSONResponse:
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc) -> JSONResponse:
        return _error_response(422, "validation", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc) -> JSONResponse:
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, "http_error")
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(GdprScanError)
    async def _internal(request: Request, exc) -> JSONResponse:
        return _error_response(500, "internal_error", str(exc))

    @app.get("/api/queue")
    def get_queue(request: Request, annotator: str, page_size: int = 50):
        caller = service.authenticate(request)
        if annotator != caller:
            raise ApiError(401, "unauthorized",
                           "token does not belong to annotator %r" % (annotator,))
        if page_size < 1:
            raise ApiError(422, "validation", "page_size must be positive")
        refs = service.pending_refs()
        hints = service.pending_candidates() if service.reveal_hints else None
        entries = []
        for ref in refs:
            if service.store.consolidation(*ref) is not None:
                continue
            if caller in service.store.labels_for(*ref):
                continue
            segment = service.store.segment(*ref)
            entry = {
                "doc_id": segment.doc_id,
                "seg_id": segment.seg_id,
                "text": segment.text,
                "iteration": service.driver.iteration,
                "hint": None,
            }
            if hints is not None and ref in hints:
                cand = hints[ref]
                entry["hint"] = {
                    "top1": {"code": cand.top1,
                             "probability": cand.probs[cand.top1 - 1]},
                    "top2": {"code": cand.top2,
                             "probability": cand.probs[cand.top2 - 1]},
                    "margin": cand.margin,
                }
            entries.append(entry)
            if len(entries) == page_size:
                break
        return entries

    @app.post("/api/labels")
    def post_label(request: Request, body: LabelSubmission):
        caller = service.authenticate(request)
        try:
            label_from_code(body.label_code)
        except InvalidLabel as exc:
            raise ApiError(422, "invalid_label", str(exc))
        ref = (body.doc_id, body.seg_id)
        try:
            queued = ref in set(service.pending_refs())
        except ApiError:
            queued = False
        if not queued:
            raise ApiError(404, "not_queued",
                           "segment %s/%s is not in the current query batch"
                           % (body.doc_id, body.seg_id))
        resubmission = caller in service.store.labels_for(*ref)
        record = service.store.record_label(
            body.doc_id, body.seg_id, caller, body.label_code)
        service.changed()
        result = service.store.consolidation(*ref)
        payload = {
            "doc_id": record.doc_id,
            "seg_id": record.seg_id,
            "annotator_id": record.annotator_id,
            "label_code": record.label_code,
            "submitted_at": record.submitted_at.isoformat(),
            "consolidation": _consolidation_dict(result) if result else None,
        }
        return JSONResponse(payload, status_code=200 if resubmission else 201)

    @app.post("/api/discussions/{doc_id}/{seg_id}/resolve")
    def resolve_discussion(request: Request, doc_id: str, seg_id: int,
                           body: DiscussionResolution):
        caller = service.authenticate(request)
        try:
            service.store.segment(doc_id, seg_id)
        except NotFound as exc:
            raise ApiError(404, "not_found", str(exc))
        try:
            result = service.store.resolve_discussion(
                doc_id, seg_id, body.outcome, body.label_code,
                resolved_by=caller)
        except (ValueError, InvalidLabel) as exc:
            raise ApiError(422, "invalid_resolution", str(exc))
        except StateError as exc:
            raise ApiError(409, "not_under_discussion", str(exc))
        service.changed()
        return _consolidation_dict(result)

    @app.get("/api/metrics")
    def get_metrics(request: Request):
        service.authenticate(request)
        if service.driver is None:
            return []
        return [record.to_dict() for record in service.driver.records]

    @app.get("/api/report")
    def get_report(request: Request):
        service.authenticate(request)
        if service.report is None:
            raise ApiError(404, "no_report", "no compliance report has been produced")
        return service.report.to_dict()

    @app.get("/api/segments/{doc_id}/{seg_id}")
    def get_segment(request: Request, doc_id: str, seg_id: int):
        caller = service.authenticate(request)
        try:
            segment = service.store.segment(doc_id, seg_id)
        except NotFound as exc:
            raise ApiError(404, "not_found", str(exc))
        result = service.store.consolidation(doc_id, seg_id)
        labels = service.store.labels_for(doc_id, seg_id)
        mine = labels.get(caller)
        payload = {
            "doc_id": segment.doc_id,
            "seg_id": segment.seg_id,
            "text": segment.text,
            "tokens": list(segment.tokens),
            "consolidation": _consolidation_dict(result) if result else None,
            "my_label": mine.label_code if mine else None,
            "n_labels": len(labels),
        }
        if service.reveal_hints:
            payload["labels"] = {a: rec.label_code for a, rec in sorted(labels.items())}
        return payload

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")
    return app
