"""Command-line interface.

Subcommands: analyze (exit 0 allow / 2 block / 1 error), config generate,
serve, bench.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except BrokenPipeError:
        return 1
    except KeyboardInterrupt:
        return 130


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqlshield",
        description="GraphQL security engine: analyze queries, generate "
                    "config, serve the analysis API, run load benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="analyze one query")
    p_analyze.add_argument("--schema", required=True, help="SDL schema file")
    p_analyze.add_argument("--config", help="security config JSON file")
    p_analyze.add_argument("--query", required=True,
                           help="query file, or '-' for stdin")
    p_analyze.add_argument("--variables", help="variables JSON file")
    p_analyze.add_argument("--bundle-dir", help="directory with model bundles")
    p_analyze.set_defaults(handler=cmd_analyze)

    p_config = sub.add_parser("config", help="config management")
    config_sub = p_config.add_subparsers(dest="config_command", required=True)
    p_generate = config_sub.add_parser("generate",
                                       help="generate a config from a schema")
    p_generate.add_argument("--schema", required=True, help="SDL schema file")
    p_generate.add_argument("--out", required=True, help="output config path")
    p_generate.add_argument("--llm-endpoint", help="chat-completions endpoint")
    p_generate.add_argument("--llm-model", help="model identifier")
    p_generate.add_argument("--llm-timeout", type=float, default=30.0)
    p_generate.set_defaults(handler=cmd_config_generate)

    p_serve = sub.add_parser("serve", help="run the HTTP analysis service")
    p_serve.add_argument("--schema", required=True, help="SDL schema file")
    p_serve.add_argument("--config", help="security config JSON file")
    p_serve.add_argument("--bundle-dir", help="directory with model bundles")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--workers", type=int, default=1,
                         help="uvicorn worker processes")
    p_serve.add_argument("--log-path", help="batched JSONL event log path")
    p_serve.set_defaults(handler=cmd_serve)

    p_bench = sub.add_parser("bench", help="load-test an analysis endpoint")
    p_bench.add_argument("--target", required=True,
                         help="analysis URL, e.g. http://127.0.0.1:8000/analyze")
    p_bench.add_argument("--users", type=int, default=50)
    p_bench.add_argument("--spawn-rate", type=float, default=10.0)
    p_bench.add_argument("--duration", type=float, default=60.0,
                         help="seconds")
    p_bench.add_argument("--mix", help="JSON file with weighted query mix")
    p_bench.add_argument("--out", help="per-second time-series CSV path")
    p_bench.set_defaults(handler=cmd_bench)

    return parser


def cmd_analyze(args: argparse.Namespace) -> int:
    from .engine import AnalysisRequest, analyze
    from .loader import build_context

    try:
        query = sys.stdin.read() if args.query == "-" \
            else Path(args.query).read_text(encoding="utf-8")
        variables = None
        if args.variables:
            variables = json.loads(Path(args.variables).read_text(encoding="utf-8"))
        ctx = build_context(args.schema, args.config, args.bundle_dir,
                            parallel_checks=False)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        report = analyze(AnalysisRequest(query=query, variables=variables), ctx)
    finally:
        ctx.close()
    json.dump(report.to_dict(), sys.stdout, indent=2)
    print()
    return 2 if report.decision == "block" else 0


def cmd_config_generate(args: argparse.Namespace) -> int:
    from .config import LlmClient, RuleSet, heuristic_generate, llm_generate
    from .gql import parse_schema

    try:
        sdl = Path(args.schema).read_text(encoding="utf-8")
        schema = parse_schema(sdl)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rules = RuleSet()
    if args.llm_endpoint:
        client = LlmClient(endpoint=args.llm_endpoint,
                           model=args.llm_model or "default",
                           timeout=args.llm_timeout)
        config = llm_generate(sdl, rules, client, schema)
    else:
        config = heuristic_generate(schema, rules)
    Path(args.out).write_text(config.to_json(), encoding="utf-8")
    source = config.provenance.get("source", "heuristic")
    fallback = config.provenance.get("fallback", False)
    print(f"wrote {args.out} (source={source}, fallback={fallback})")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import os

    import uvicorn

    from .service import BUNDLE_DIR_ENV, CONFIG_ENV, SCHEMA_ENV

    os.environ[SCHEMA_ENV] = args.schema
    if args.config:
        os.environ[CONFIG_ENV] = args.config
    if args.bundle_dir:
        os.environ[BUNDLE_DIR_ENV] = args.bundle_dir
    if args.log_path:
        from .loader import LOG_PATH_ENV
        os.environ[LOG_PATH_ENV] = args.log_path

    # Fail fast on bad config/schema/bundles before binding the port.
    try:
        from .loader import build_context
        probe = build_context(args.schema, args.config, args.bundle_dir)
        probe.close()
    except Exception as exc:
        print(f"startup failed: {exc}", file=sys.stderr)
        return 1

    uvicorn.run("gqlshield.service:create_app_from_env", factory=True,
                host=args.host, port=args.port, workers=args.workers,
                log_level="warning")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from .bench import run_bench

    try:
        report = run_bench(args.target, args.users, args.spawn_rate,
                           args.duration, args.mix, args.out)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    json.dump(report.to_dict(), sys.stdout, indent=2)
    print()
    if report.requests == 0 or report.error_rate >= 1.0:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
