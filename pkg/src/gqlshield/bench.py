"""Load generator: ramp simulated users against an analysis endpoint and
report throughput, latency percentiles, error rate, and a per-second time
series suitable for plotting.

Each simulated user holds one keep-alive connection and posts continuously
(closed loop, Locust style). The HTTP client is a minimal hand-rolled
asyncio implementation so the generator itself stays cheap enough to
saturate the server under test.
"""

from __future__ import annotations

import asyncio
import csv
import json
import math
import random
import time
from dataclasses import dataclass, field
from typing import Any, Optional
from urllib.parse import urlsplit

DEFAULT_MIX = [
    {"weight": 8, "query": "{ me { id } }"},
    {"weight": 1, "query": "query Q($n: String) { me { id } }",
     "variables": {"n": "' OR '1'='1' --"}},
    {"weight": 1, "query": "{ x1: me { id } x2: me { id } x3: me { id } }"},
]

CONNECT_TIMEOUT = 5.0
READ_TIMEOUT = 10.0


@dataclass
class Sample:
    at: float          # seconds since start
    latency_ms: float
    ok: bool


@dataclass
class BenchReport:
    target: str
    users: int
    spawn_rate: float
    duration_seconds: float
    requests: int = 0
    errors: int = 0
    requests_per_second: float = 0.0
    p50_ms: float = 0.0
    p95_ms: float = 0.0
    p99_ms: float = 0.0
    error_rate: float = 0.0
    timeseries: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        data = dict(self.__dict__)
        data.pop("timeseries")
        data["timeseries_rows"] = len(self.timeseries)
        return data


def percentile(sorted_values: list[float], q: float) -> float:
    """Nearest-rank percentile over pre-sorted values."""
    if not sorted_values:
        return 0.0
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[min(rank, len(sorted_values)) - 1]


def load_mix(path: Optional[str]) -> list[dict[str, Any]]:
    if path is None:
        return DEFAULT_MIX
    with open(path, "r", encoding="utf-8") as fh:
        mix = json.load(fh)
    if not isinstance(mix, list) or not mix:
        raise ValueError("mix file must be a non-empty JSON array")
    for entry in mix:
        if "query" not in entry:
            raise ValueError("every mix entry needs a 'query'")
        entry.setdefault("weight", 1)
    return mix


class _Connection:
    """Minimal keep-alive HTTP/1.1 POST client for one simulated user."""

    def __init__(self, host: str, port: int, path: str):
        self.host = host
        self.port = port
        self.path = path
        self.reader: asyncio.StreamReader | None = None
        self.writer: asyncio.StreamWriter | None = None
        header = (f"POST {path} HTTP/1.1\r\nhost: {host}:{port}\r\n"
                  "content-type: application/json\r\n"
                  "connection: keep-alive\r\ncontent-length: ")
        self._header = header.encode()

    async def connect(self) -> None:
        self.reader, self.writer = await asyncio.wait_for(
            asyncio.open_connection(self.host, self.port), CONNECT_TIMEOUT)

    def close(self) -> None:
        if self.writer is not None:
            try:
                self.writer.close()
            except Exception:
                pass
        self.reader = self.writer = None

    async def post(self, body: bytes) -> int:
        """Send one request; return the status code. Raises on transport
        or protocol errors."""
        if self.writer is None:
            await self.connect()
        self.writer.write(self._header + str(len(body)).encode()
                          + b"\r\n\r\n" + body)
        await self.writer.drain()
        status, keep_alive = await asyncio.wait_for(self._read_response(),
                                                    READ_TIMEOUT)
        if not keep_alive:
            self.close()
        return status

    async def _read_response(self) -> tuple[int, bool]:
        reader = self.reader
        status_line = await reader.readline()
        if not status_line:
            raise ConnectionError("server closed connection")
        parts = status_line.split(None, 2)
        if len(parts) < 2 or not parts[1].isdigit():
            raise ConnectionError(f"bad status line {status_line!r}")
        status = int(parts[1])
        content_length = None
        chunked = False
        keep_alive = True
        while True:
            line = await reader.readline()
            if line in (b"\r\n", b"\n", b""):
                break
            name, _, value = line.partition(b":")
            name = name.strip().lower()
            value = value.strip().lower()
            if name == b"content-length":
                content_length = int(value)
            elif name == b"transfer-encoding" and b"chunked" in value:
                chunked = True
            elif name == b"connection" and value == b"close":
                keep_alive = False
        if chunked:
            while True:
                size_line = await reader.readline()
                size = int(size_line.strip() or b"0", 16)
                if size == 0:
                    await reader.readline()
                    break
                await reader.readexactly(size + 2)
        elif content_length is not None:
            await reader.readexactly(content_length)
        else:
            await reader.read()
            keep_alive = False
        return status, keep_alive


def _prepare_bodies(mix: list[dict[str, Any]]) -> tuple[list[bytes], list[float]]:
    bodies = []
    weights = []
    for entry in mix:
        body = {"query": entry["query"]}
        if entry.get("variables"):
            body["variables"] = entry["variables"]
        bodies.append(json.dumps(body).encode())
        weights.append(float(entry.get("weight", 1)))
    return bodies, weights


async def _user_loop(conn: _Connection, bodies: list[bytes],
                     cumulative: list[float], samples: list[Sample],
                     start: float, stop: asyncio.Event,
                     rng: random.Random) -> None:
    total = cumulative[-1]
    while not stop.is_set():
        pick = rng.random() * total
        index = 0
        while cumulative[index] < pick:
            index += 1
        body = bodies[index]
        sent = time.perf_counter()
        ok = False
        try:
            status = await conn.post(body)
            ok = status == 200
        except (OSError, asyncio.TimeoutError, ConnectionError, ValueError):
            conn.close()
            await asyncio.sleep(0.05)
        latency_ms = (time.perf_counter() - sent) * 1000.0
        samples.append(Sample(at=time.perf_counter() - start,
                              latency_ms=latency_ms, ok=ok))


async def _run(target: str, users: int, spawn_rate: float, duration: float,
               mix: list[dict[str, Any]]) -> tuple[list[Sample], list[tuple[float, int]]]:
    split = urlsplit(target)
    host = split.hostname or "127.0.0.1"
    port = split.port or (443 if split.scheme == "https" else 80)
    path = split.path or "/"
    if split.query:
        path += "?" + split.query

    bodies, weights = _prepare_bodies(mix)
    cumulative = []
    acc = 0.0
    for w in weights:
        acc += w
        cumulative.append(acc)

    samples: list[Sample] = []
    spawn_log: list[tuple[float, int]] = []
    stop = asyncio.Event()
    start = time.perf_counter()
    tasks: list[asyncio.Task] = []
    connections: list[_Connection] = []
    spawned = 0
    interval = 1.0 / spawn_rate if spawn_rate > 0 else 0.0
    while spawned < users:
        now = time.perf_counter() - start
        if now >= duration:
            break
        conn = _Connection(host, port, path)
        connections.append(conn)
        rng = random.Random(0xB0B ^ spawned)
        tasks.append(asyncio.create_task(_user_loop(
            conn, bodies, cumulative, samples, start, stop, rng)))
        spawned += 1
        spawn_log.append((now, spawned))
        if interval:
            await asyncio.sleep(interval)
    remaining = duration - (time.perf_counter() - start)
    if remaining > 0:
        await asyncio.sleep(remaining)
    stop.set()
    for task in tasks:
        task.cancel()
    await asyncio.gather(*tasks, return_exceptions=True)
    for conn in connections:
        conn.close()
    return samples, spawn_log


def _build_timeseries(samples: list[Sample], spawn_log: list[tuple[float, int]],
                      duration: float) -> list[dict[str, Any]]:
    buckets: dict[int, list[Sample]] = {}
    for sample in samples:
        buckets.setdefault(int(sample.at), []).append(sample)
    # Cover every second of the run plus stragglers that completed after it.
    n_rows = max(1, int(math.ceil(duration)))
    if buckets:
        n_rows = max(n_rows, max(buckets) + 1)
    rows = []
    active = 0
    spawn_index = 0
    for second in range(n_rows):
        while spawn_index < len(spawn_log) \
                and spawn_log[spawn_index][0] < second + 1:
            active = spawn_log[spawn_index][1]
            spawn_index += 1
        bucket = buckets.get(second, [])
        latencies = sorted(s.latency_ms for s in bucket)
        rows.append({
            "second": second,
            "active_users": active,
            "requests": len(bucket),
            "errors": sum(1 for s in bucket if not s.ok),
            "avg_ms": round(sum(latencies) / len(latencies), 3) if latencies else 0.0,
            "p50_ms": round(percentile(latencies, 0.50), 3),
            "p95_ms": round(percentile(latencies, 0.95), 3),
        })
    return rows


def write_timeseries_csv(rows: list[dict[str, Any]], path: str) -> None:
    fieldnames = ["second", "active_users", "requests", "errors",
                  "avg_ms", "p50_ms", "p95_ms"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def run_bench(target: str, users: int, spawn_rate: float, duration: float,
              mix_path: Optional[str] = None,
              out_csv: Optional[str] = None) -> BenchReport:
    mix = load_mix(mix_path)
    samples, spawn_log = asyncio.run(_run(target, users, spawn_rate, duration, mix))

    report = BenchReport(target=target, users=users, spawn_rate=spawn_rate,
                         duration_seconds=duration)
    report.requests = len(samples)
    report.errors = sum(1 for s in samples if not s.ok)
    report.error_rate = report.errors / report.requests if report.requests else 1.0
    elapsed = max((s.at for s in samples), default=duration) or duration
    report.requests_per_second = report.requests / elapsed if elapsed > 0 else 0.0
    latencies = sorted(s.latency_ms for s in samples if s.ok)
    report.p50_ms = percentile(latencies, 0.50)
    report.p95_ms = percentile(latencies, 0.95)
    report.p99_ms = percentile(latencies, 0.99)
    report.timeseries = _build_timeseries(samples, spawn_log, duration)
    if out_csv:
        write_timeseries_csv(report.timeseries, out_csv)
    return report
