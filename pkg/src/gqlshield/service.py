"""HTTP analysis service.

Endpoints: POST /analyze (object or array body), GET /healthz,
GET /metrics, POST /admin/reload-config. Analyses always complete with
200; 400 covers only non-JSON bodies; 503 covers the window before the
context finishes loading. CPU-bound analysis runs on a bounded worker
pool so the event loop stays responsive; each analysis has a fail-closed
time budget.
"""

from __future__ import annotations

import asyncio
import concurrent.futures
import os
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from typing import Any, Callable, Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .engine import (
    AnalysisRequest,
    EngineContext,
    analyze,
    analyze_parsed,
    parse_failure_report,
)
from .gql import ParseError, parse_query

DEFAULT_TIMEOUT_SECONDS = 2.0

CONFIG_ENV = "GQLSHIELD_CONFIG"
SCHEMA_ENV = "GQLSHIELD_SCHEMA"
BUNDLE_DIR_ENV = "GQLSHIELD_BUNDLE_DIR"


class ServiceState:
    def __init__(self, ctx: Optional[EngineContext] = None,
                 timeout: float = DEFAULT_TIMEOUT_SECONDS,
                 workers: Optional[int] = None,
                 config_path: Optional[str] = None):
        self.ctx = ctx
        self.timeout = timeout
        self.config_path = config_path
        self.ready = ctx is not None
        size = workers or os.cpu_count() or 2
        self.pool = ThreadPoolExecutor(max_workers=size,
                                       thread_name_prefix="gqlshield-analyze")

    def set_context(self, ctx: EngineContext) -> None:
        self.ctx = ctx
        self.ready = True

    def shutdown(self) -> None:
        self.pool.shutdown(wait=True)
        if self.ctx is not None:
            self.ctx.close()


def _request_from_body(body: dict[str, Any]) -> AnalysisRequest:
    return AnalysisRequest(
        query=body.get("query", "") if isinstance(body.get("query"), str) else "",
        variables=body.get("variables") if isinstance(body.get("variables"), dict) else None,
        operation_name=body.get("operation_name"),
        schema_id=body.get("schema_id") or "default",
    )


async def _run_analysis(state: ServiceState, fn: Callable[[], Any]) -> Any:
    loop = asyncio.get_running_loop()
    future = loop.run_in_executor(state.pool, fn)
    try:
        return await asyncio.wait_for(future, timeout=state.timeout)
    except (asyncio.TimeoutError, concurrent.futures.TimeoutError):
        # Fail closed: the analysis thread may still finish in the
        # background, but the caller gets a block decision now.
        report = parse_failure_report(
            "analysis timeout", time.perf_counter_ns(),
            state.ctx.config.mode, uuid.uuid4().hex[:16])
        report.results[0].detail = "analysis timeout"
        return report


def _analyze_single(state: ServiceState, body: dict[str, Any]):
    return analyze(_request_from_body(body), state.ctx)


def _analyze_batch(state: ServiceState, items: list[Any]):
    """A JSON array body is a batch: the batch check scores the summed
    operation count across elements; each element gets its own report."""
    ctx = state.ctx
    prepared = []
    total_ops = 0
    for item in items:
        body = item if isinstance(item, dict) else {}
        req = _request_from_body(body)
        started = time.perf_counter_ns()
        request_id = uuid.uuid4().hex[:16]
        ctx.metrics.record_request()
        if not req.query.strip():
            prepared.append((req, None, "empty query", started, request_id))
            continue
        try:
            ctx.metrics.record_parse()
            doc = parse_query(req.query)
        except ParseError as exc:
            prepared.append((req, None, f"parse error: {exc}", started, request_id))
            continue
        total_ops += len(doc.operations)
        prepared.append((req, doc, None, started, request_id))

    reports = []
    for req, doc, error, started, request_id in prepared:
        if doc is None:
            report = parse_failure_report(error, started, ctx.config.mode,
                                          request_id)
            ctx.metrics.record_report(report)
        else:
            report = analyze_parsed(req, ctx, doc, batch_total=total_ops,
                                    started_ns=started, request_id=request_id)
        reports.append(report)
    return reports


def create_app(state: ServiceState) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.shutdown()

    app = FastAPI(title="gqlshield", lifespan=lifespan)
    app.state.service = state

    @app.post("/analyze")
    async def analyze_endpoint(request: Request) -> Response:
        if not state.ready:
            return JSONResponse({"error": "loading"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body must be JSON"}, status_code=400)
        if isinstance(body, list):
            reports = await _run_analysis(state, lambda: _analyze_batch(state, body))
            if not isinstance(reports, list):  # timeout produced one report
                reports = [reports]
            return JSONResponse([r.to_dict() for r in reports])
        if not isinstance(body, dict):
            return JSONResponse({"error": "body must be a JSON object or array"},
                                status_code=400)
        report = await _run_analysis(state, lambda: _analyze_single(state, body))
        return JSONResponse(report.to_dict())

    @app.get("/healthz")
    async def healthz() -> Response:
        if not state.ready:
            return JSONResponse({"status": "loading"}, status_code=503)
        return JSONResponse({"status": "ok"})

    @app.get("/metrics")
    async def metrics() -> Response:
        if not state.ready:
            return JSONResponse({"error": "loading"}, status_code=503)
        return JSONResponse(state.ctx.metrics.to_dict())

    @app.post("/admin/reload-config")
    async def reload_config() -> Response:
        if not state.ready:
            return JSONResponse({"error": "loading"}, status_code=503)
        if not state.config_path:
            return JSONResponse({"error": "no config file to reload"},
                                status_code=400)
        from .config import ConfigError, load_config
        from .detect import Detector
        from .ssrf import SsrfPolicy
        ctx = state.ctx
        try:
            schema = ctx.schemas.get("default")
            new_config = load_config(state.config_path, schema)
        except (OSError, ConfigError) as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        detectors = {
            name: Detector(name=d.name, bundles=d.bundles, embedding=d.embedding,
                           threshold=new_config.detector_thresholds.get(
                               name, d.threshold))
            for name, d in ctx.detectors.items()}
        policy = SsrfPolicy.with_extensions(
            metadata_hosts=new_config.ssrf.metadata_hosts,
            param_names=new_config.ssrf.param_names,
            rebind_domains=new_config.ssrf.rebind_domains)
        new_ctx = EngineContext(
            schemas=ctx.schemas, config=new_config, detectors=detectors,
            ssrf_policy=policy, metrics=ctx.metrics,
            logger=ctx.logger, check_pool=ctx.check_pool)
        state.ctx = new_ctx
        return JSONResponse({"status": "reloaded"})

    return app


def create_app_from_env() -> FastAPI:
    """App factory for process managers: paths come from environment
    variables (GQLSHIELD_SCHEMA, GQLSHIELD_CONFIG, GQLSHIELD_BUNDLE_DIR)."""
    from .loader import build_context

    schema_path = os.environ[SCHEMA_ENV]
    config_path = os.environ.get(CONFIG_ENV)
    bundle_dir = os.environ.get(BUNDLE_DIR_ENV)
    ctx = build_context(schema_path, config_path, bundle_dir)
    return create_app(ServiceState(ctx, config_path=config_path))
