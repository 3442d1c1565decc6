"""Request analysis orchestration.

Parse, fragment expansion, and payload extraction happen exactly once per
request; static checks, SSRF, and the ML detectors then run concurrently
over the shared AST and sites. Results aggregate into one AnalysisReport
with a fixed check order.
"""

from __future__ import annotations

import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

from .config import SecurityConfig
from .detect import Detection, Detector, DetectorOutcome
from .gql import (
    ExpansionError,
    ParseError,
    Schema,
    expand_fragments,
    extract_string_inputs,
    parse_query,
    validate_document,
)
from .logbuf import NullLogWriter
from .results import (
    CHECK_ORDER,
    ML_CHECKS,
    STATUS_BLOCKED,
    STATUS_PASS,
    CheckResult,
    skipped_result,
)
from .ssrf import SsrfPolicy, check_ssrf
from .static_checks import run_static_checks

LATENCY_BUCKETS_MS = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000)


@dataclass
class AnalysisRequest:
    query: str
    variables: Optional[dict[str, Any]] = None
    operation_name: Optional[str] = None
    schema_id: str = "default"


@dataclass
class AnalysisReport:
    decision: str  # allow | block
    results: list[CheckResult]
    detections: list[Detection]
    total_micros: int
    degraded: bool
    request_id: str
    mode: str = "enforce"

    @property
    def blocked(self) -> bool:
        return self.decision == "block"

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "results": [r.to_dict() for r in self.results],
            "detections": [d.to_dict() for d in self.detections],
            "total_micros": self.total_micros,
            "degraded": self.degraded,
            "request_id": self.request_id,
            "mode": self.mode,
        }


class Metrics:
    """Thread-safe request counters and a latency histogram."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.requests = 0
        self.parse_calls = 0
        self.expand_calls = 0
        self.blocks_total = 0
        self.blocks_by_check: dict[str, int] = {}
        self.latency_buckets = [0] * (len(LATENCY_BUCKETS_MS) + 1)

    def record_request(self) -> None:
        with self._lock:
            self.requests += 1

    def record_parse(self) -> None:
        with self._lock:
            self.parse_calls += 1

    def record_expand(self) -> None:
        with self._lock:
            self.expand_calls += 1

    def record_report(self, report: AnalysisReport) -> None:
        with self._lock:
            if report.blocked:
                self.blocks_total += 1
            for result in report.results:
                if result.status == STATUS_BLOCKED:
                    self.blocks_by_check[result.check] = \
                        self.blocks_by_check.get(result.check, 0) + 1
            ms = report.total_micros / 1000.0
            for i, bound in enumerate(LATENCY_BUCKETS_MS):
                if ms <= bound:
                    self.latency_buckets[i] += 1
                    break
            else:
                self.latency_buckets[-1] += 1

    def to_dict(self) -> dict:
        with self._lock:
            histogram = {}
            for i, bound in enumerate(LATENCY_BUCKETS_MS):
                histogram[f"le_{bound}ms"] = self.latency_buckets[i]
            histogram["gt_2000ms"] = self.latency_buckets[-1]
            return {
                "requests": self.requests,
                "parse_calls": self.parse_calls,
                "expand_calls": self.expand_calls,
                "blocks_total": self.blocks_total,
                "blocks_by_check": dict(sorted(self.blocks_by_check.items())),
                "latency_histogram_ms": histogram,
            }


@dataclass
class EngineContext:
    """Immutable per-deployment state shared by every request."""

    schemas: dict[str, Schema]
    config: SecurityConfig
    detectors: dict[str, Detector] = field(default_factory=dict)
    ssrf_policy: SsrfPolicy = field(default_factory=SsrfPolicy)
    metrics: Metrics = field(default_factory=Metrics)
    logger: Any = field(default_factory=NullLogWriter)
    check_pool: Optional[ThreadPoolExecutor] = None

    @classmethod
    def create(cls, schemas: dict[str, Schema], config: SecurityConfig,
               detectors: Optional[dict[str, Detector]] = None,
               logger: Any = None,
               parallel_checks: bool = True) -> "EngineContext":
        policy = SsrfPolicy.with_extensions(
            metadata_hosts=config.ssrf.metadata_hosts,
            param_names=config.ssrf.param_names,
            rebind_domains=config.ssrf.rebind_domains)
        pool = ThreadPoolExecutor(max_workers=5, thread_name_prefix="gqlshield-check") \
            if parallel_checks else None
        return cls(schemas=schemas, config=config, detectors=detectors or {},
                   ssrf_policy=policy, logger=logger or NullLogWriter(),
                   check_pool=pool)

    def close(self) -> None:
        if self.check_pool is not None:
            self.check_pool.shutdown(wait=False)
        self.logger.close()


def parse_failure_report(detail: str, started_ns: int, mode: str,
                         request_id: str) -> AnalysisReport:
    """Short-circuit report: a single blocked `parse` check."""
    total = (time.perf_counter_ns() - started_ns) // 1000
    result = CheckResult(check="parse", status=STATUS_BLOCKED, score=1,
                         threshold=0, detail=detail, duration_micros=total)
    decision = "allow" if mode == "monitor" else "block"
    return AnalysisReport(decision=decision, results=[result], detections=[],
                          total_micros=total, degraded=False,
                          request_id=request_id, mode=mode)


def analyze(req: AnalysisRequest, ctx: EngineContext,
            batch_total: Optional[int] = None) -> AnalysisReport:
    """Analyze one query against the context's schema, config, and models.

    Malformed or malicious queries produce block decisions, never errors;
    only missing context state (unknown schema_id) raises.
    """
    started = time.perf_counter_ns()
    request_id = uuid.uuid4().hex[:16]
    cfg = ctx.config
    ctx.metrics.record_request()

    schema = ctx.schemas.get(req.schema_id or "default")
    if schema is None:
        raise KeyError(f"unknown schema_id {req.schema_id!r}")

    if not req.query or not req.query.strip():
        report = parse_failure_report("empty query", started, cfg.mode, request_id)
        _finish(ctx, report)
        return report

    try:
        ctx.metrics.record_parse()
        doc = parse_query(req.query)
    except ParseError as exc:
        report = parse_failure_report(f"parse error: {exc}", started,
                                      cfg.mode, request_id)
        _finish(ctx, report)
        return report

    return analyze_parsed(req, ctx, doc, batch_total=batch_total,
                          started_ns=started, request_id=request_id)


def analyze_parsed(req: AnalysisRequest, ctx: EngineContext, doc,
                   batch_total: Optional[int] = None,
                   started_ns: Optional[int] = None,
                   request_id: Optional[str] = None) -> AnalysisReport:
    """Analysis over an already-parsed document (the batch transport path
    parses elements itself to sum their operation counts)."""
    started = started_ns if started_ns is not None else time.perf_counter_ns()
    if request_id is None:
        request_id = uuid.uuid4().hex[:16]
        ctx.metrics.record_request()
    cfg = ctx.config
    schema = ctx.schemas.get(req.schema_id or "default")
    if schema is None:
        raise KeyError(f"unknown schema_id {req.schema_id!r}")

    try:
        ctx.metrics.record_expand()
        doc = expand_fragments(doc)
    except ExpansionError as exc:
        report = parse_failure_report(f"fragment expansion failed: {exc}",
                                      started, cfg.mode, request_id)
        _finish(ctx, report)
        return report

    problems = validate_document(doc, schema)
    if problems:
        report = parse_failure_report(
            "validation failed: " + "; ".join(problems[:5]),
            started, cfg.mode, request_id)
        _finish(ctx, report)
        return report

    parse_micros = (time.perf_counter_ns() - started) // 1000
    sites = extract_string_inputs(doc, req.variables)

    # Check groups run concurrently over the shared AST/sites.
    def run_static() -> list[CheckResult]:
        return run_static_checks(doc, schema, cfg, batch_total=batch_total)

    def run_ssrf() -> CheckResult:
        if "ssrf" not in cfg.enabled_checks:
            return skipped_result("ssrf")
        return check_ssrf(doc, req.variables, ctx.ssrf_policy, sites=sites)

    def run_detector(name: str) -> DetectorOutcome:
        if name not in cfg.enabled_checks:
            return DetectorOutcome([], skipped_result(name))
        detector = ctx.detectors.get(name)
        if detector is None:
            return DetectorOutcome(
                [], skipped_result(name, detail="no model bundle loaded"))
        return detector.run(sites)

    if ctx.check_pool is not None:
        static_future = ctx.check_pool.submit(run_static)
        ssrf_future = ctx.check_pool.submit(run_ssrf)
        ml_futures = {name: ctx.check_pool.submit(run_detector, name)
                      for name in ML_CHECKS}
        static_results = static_future.result()
        ssrf_result = ssrf_future.result()
        ml_outcomes = {name: fut.result() for name, fut in ml_futures.items()}
    else:
        static_results = run_static()
        ssrf_result = run_ssrf()
        ml_outcomes = {name: run_detector(name) for name in ML_CHECKS}

    detections: list[Detection] = []
    ml_results: dict[str, CheckResult] = {}
    degraded = False
    for name in ML_CHECKS:
        outcome = ml_outcomes[name]
        detections.extend(outcome.detections)
        ml_results[name] = outcome.result
        degraded = degraded or outcome.degraded

    total_micros = (time.perf_counter_ns() - started) // 1000
    parse_result = CheckResult(check="parse", status=STATUS_PASS, score=0,
                               threshold=0, duration_micros=parse_micros)

    by_name = {r.check: r for r in static_results}
    by_name.update(ml_results)
    by_name["ssrf"] = ssrf_result
    by_name["parse"] = parse_result
    results = [by_name[name] for name in CHECK_ORDER]
    any_flag = any(r.status == STATUS_BLOCKED for r in results) \
        or any(d.malicious for d in detections)
    decision = "block" if (any_flag and cfg.mode == "enforce") else "allow"

    report = AnalysisReport(decision=decision, results=results,
                            detections=detections, total_micros=total_micros,
                            degraded=degraded, request_id=request_id,
                            mode=cfg.mode)
    _finish(ctx, report)
    return report


def _finish(ctx: EngineContext, report: AnalysisReport) -> None:
    ctx.metrics.record_report(report)
    ctx.logger.log({
        "ts": time.time(),
        "request_id": report.request_id,
        "decision": report.decision,
        "blocked_checks": [r.check for r in report.results
                           if r.status == STATUS_BLOCKED],
        "malicious_detections": len([d for d in report.detections if d.malicious]),
        "total_micros": report.total_micros,
    })
