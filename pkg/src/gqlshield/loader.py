"""Central loader: schemas, config, and model bundles into one immutable
EngineContext. Bundles load once at startup and are shared read-only."""

from __future__ import annotations

import os
from pathlib import Path

from .config import SecurityConfig, load_config
from .detect import Detector
from .engine import EngineContext
from .gql import parse_schema
from .logbuf import BatchLogWriter, NullLogWriter
from .models import load_bundle

LOG_PATH_ENV = "GQLSHIELD_LOG_PATH"

# Bundle filenames the loader looks for per detector, in evaluation order.
BUNDLE_FILES = {
    "sqli": (("sqli_cnn.json", "sqli_cnn.json.gz"),),
    "osi": (("osi_cnn.json", "osi_cnn.json.gz"),),
    "xss": (("xss_forest.json", "xss_forest.json.gz"),
            ("xss_mlp.json", "xss_mlp.json.gz")),
}


def load_detectors(bundle_dir: str | Path,
                   config: SecurityConfig) -> dict[str, Detector]:
    """Build detectors from a directory of bundle files. Missing files
    simply leave that detector unloaded (the check reports skipped)."""
    bundle_dir = Path(bundle_dir)
    detectors: dict[str, Detector] = {}
    for name, slots in BUNDLE_FILES.items():
        bundles = []
        for candidates in slots:
            found = next((bundle_dir / c for c in candidates
                          if (bundle_dir / c).exists()), None)
            if found is None:
                bundles = []
                break
            bundles.append(load_bundle(str(found)))
        if bundles:
            detectors[name] = Detector.from_bundles(
                name, bundles,
                threshold=config.detector_thresholds.get(name))
    return detectors


def build_context(schema_path: str | Path,
                  config_path: str | Path | None = None,
                  bundle_dir: str | Path | None = None,
                  log_path: str | Path | None = None,
                  parallel_checks: bool | None = None) -> EngineContext:
    with open(schema_path, "r", encoding="utf-8") as fh:
        schema = parse_schema(fh.read())
    config = load_config(str(config_path), schema) if config_path \
        else SecurityConfig()
    detectors = load_detectors(bundle_dir, config) if bundle_dir else {}
    if parallel_checks is None:
        # The check pool pays off only for ML inference; pure static checks
        # finish in microseconds and would just pay queueing overhead.
        parallel_checks = bool(detectors)
    log_path = log_path or os.environ.get(LOG_PATH_ENV)
    logger = BatchLogWriter(str(log_path)) if log_path else NullLogWriter()
    return EngineContext.create({"default": schema}, config,
                                detectors=detectors, logger=logger,
                                parallel_checks=parallel_checks)
