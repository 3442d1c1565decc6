"""Load generator smoke tests against a real local server."""

import csv

import pytest

from gqlshield.bench import load_mix, percentile, run_bench
from gqlshield.config import SecurityConfig
from gqlshield.engine import EngineContext
from gqlshield.gql import parse_schema
from gqlshield.service import ServiceState, create_app
from server_util import BackgroundServer

SDL = "type Query { me: User } type User { id: ID }"


def make_app():
    schema = parse_schema(SDL)
    cfg = SecurityConfig(allow_introspection=True, complexity_threshold=1e9,
                         max_payload_estimate=10**9)
    ctx = EngineContext.create({"default": schema}, cfg, parallel_checks=False)
    return create_app(ServiceState(ctx))


def test_single_user_smoke(tmp_path):
    out_csv = tmp_path / "series.csv"
    with BackgroundServer(make_app()) as base:
        report = run_bench(f"{base}/analyze", users=1, spawn_rate=10,
                           duration=2.0, out_csv=str(out_csv))
    assert report.requests >= 1
    assert report.errors == 0
    assert report.error_rate == 0.0
    assert report.p95_ms > 0
    with open(out_csv) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) >= 2  # one row per second, plus stragglers
    assert set(rows[0]) == {"second", "active_users", "requests", "errors",
                            "avg_ms", "p50_ms", "p95_ms"}
    assert sum(int(r["requests"]) for r in rows) == report.requests


def test_ramp_produces_time_series():
    with BackgroundServer(make_app()) as base:
        report = run_bench(f"{base}/analyze", users=8, spawn_rate=4,
                           duration=3.0)
    assert len(report.timeseries) >= 3
    # users ramp at 4/sec: second 0 starts partial, later rows see more
    assert report.timeseries[0]["active_users"] >= 1
    assert report.timeseries[-1]["active_users"] == 8
    assert report.requests_per_second > 0


def test_unreachable_target_reports_full_errors():
    report = run_bench("http://127.0.0.1:9/analyze", users=2, spawn_rate=10,
                       duration=1.0)
    assert report.error_rate == 1.0
    assert report.requests == 0 or report.errors == report.requests


def test_percentile_nearest_rank():
    values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    assert percentile(values, 0.50) == 5.0
    assert percentile(values, 0.95) == 10.0
    assert percentile(values, 0.99) == 10.0
    assert percentile([], 0.5) == 0.0


def test_mix_file_loading(tmp_path):
    path = tmp_path / "mix.json"
    path.write_text('[{"query": "{ me { id } }", "weight": 3}, {"query": "{ x }"}]')
    mix = load_mix(str(path))
    assert mix[0]["weight"] == 3
    assert mix[1]["weight"] == 1  # default applied
    assert load_mix(None)  # built-in default mix exists


def test_empty_mix_rejected(tmp_path):
    path = tmp_path / "mix.json"
    path.write_text("[]")
    with pytest.raises(ValueError):
        load_mix(str(path))


def test_mix_requires_query(tmp_path):
    path = tmp_path / "mix.json"
    path.write_text('[{"weight": 1}]')
    with pytest.raises(ValueError):
        load_mix(str(path))
