"""ML payload detectors: embed, append handcrafted features, classify.

SQLi and OSi use one specialized classifier each; XSS averages a random
forest and an MLP. A detector's verdict for a whole query is the maximum
probability over its payload sites.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .embedding import EmbedError, EmbeddingSpec, PROVIDER_HASH, embed
from .features import features_for
from .gql.extract import PayloadSite
from .models import ModelBundle, assemble_input, expected_embedding_dim, forward
from .results import STATUS_BLOCKED, STATUS_PASS, CheckResult


@dataclass
class Detection:
    detector: str  # sqli | osi | xss
    probability: float
    malicious: bool
    site: str  # PayloadSite path
    latency_micros: int = 0

    def to_dict(self) -> dict:
        return {
            "detector": self.detector,
            "probability": self.probability,
            "malicious": self.malicious,
            "site": self.site,
            "latency_micros": self.latency_micros,
        }


@dataclass
class DetectorOutcome:
    detections: list[Detection]
    result: CheckResult
    degraded: bool = False


@dataclass
class Detector:
    """One detector: its bundles, embedding spec, and decision threshold."""

    name: str  # sqli | osi | xss
    bundles: list[ModelBundle]
    embedding: EmbeddingSpec
    threshold: float = 0.5

    @classmethod
    def from_bundles(cls, name: str, bundles: list[ModelBundle],
                     threshold: float | None = None,
                     embedding: EmbeddingSpec | None = None) -> "Detector":
        primary = bundles[0]
        if embedding is None:
            embedding = primary.embedding or EmbeddingSpec(
                provider=PROVIDER_HASH,
                dim=expected_embedding_dim(primary, name))
        for bundle in bundles:
            if expected_embedding_dim(bundle, name) != embedding.dim:
                raise ValueError(
                    f"{name}: bundle input_dim {bundle.input_dim} does not "
                    f"match embedding dim {embedding.dim}")
        if threshold is None:
            threshold = primary.decision_threshold
        return cls(name=name, bundles=bundles, embedding=embedding,
                   threshold=threshold)

    def _embed(self, payload: str) -> tuple[list[float], bool]:
        try:
            return embed(payload, self.embedding), False
        except EmbedError:
            if self.embedding.provider == PROVIDER_HASH:
                raise
            # Degraded mode: the external provider is down; hash embeddings
            # keep the detector running with reduced fidelity.
            fallback = EmbeddingSpec(provider=PROVIDER_HASH,
                                     dim=self.embedding.dim,
                                     seed=self.embedding.seed)
            return embed(payload, fallback), True

    def probability_for(self, payload: str) -> tuple[float, bool]:
        emb, degraded = self._embed(payload)
        feats = features_for(self.name, payload)
        probs = []
        for bundle in self.bundles:
            x = assemble_input(emb, feats.values, bundle.scaler, bundle.input_dim)
            probs.append(forward(bundle, x))
        return sum(probs) / len(probs), degraded

    def detect(self, site: PayloadSite) -> Detection:
        start = time.perf_counter_ns()
        probability, _ = self.probability_for(site.text)
        latency = (time.perf_counter_ns() - start) // 1000
        return Detection(detector=self.name, probability=probability,
                         malicious=probability >= self.threshold,
                         site=site.path, latency_micros=latency)

    def run(self, sites: list[PayloadSite]) -> DetectorOutcome:
        start = time.perf_counter_ns()
        detections: list[Detection] = []
        degraded = False
        for site in sites:
            site_start = time.perf_counter_ns()
            probability, site_degraded = self.probability_for(site.text)
            latency = (time.perf_counter_ns() - site_start) // 1000
            degraded = degraded or site_degraded
            detections.append(Detection(
                detector=self.name, probability=probability,
                malicious=probability >= self.threshold,
                site=site.path, latency_micros=latency))
        duration = (time.perf_counter_ns() - start) // 1000
        max_prob = max((d.probability for d in detections), default=0.0)
        malicious = [d for d in detections if d.malicious]
        detail = "; ".join(
            f"{d.site} p={d.probability:.4f}" for d in malicious)
        result = CheckResult(
            check=self.name,
            status=STATUS_BLOCKED if malicious else STATUS_PASS,
            score=max_prob,
            threshold=self.threshold,
            detail=detail,
            duration_micros=duration,
        )
        return DetectorOutcome(detections=detections, result=result,
                               degraded=degraded)


def detect_sqli(detector: Detector, site: PayloadSite) -> Detection:
    return detector.detect(site)


def detect_osi(detector: Detector, site: PayloadSite) -> Detection:
    return detector.detect(site)


def detect_xss(detector: Detector, site: PayloadSite) -> Detection:
    return detector.detect(site)
