"""Payload embedding providers.

The hash provider is the deterministic built-in: character trigrams over
the payload padded with STX/ETX sentinels, hashed by seeded 64-bit FNV-1a
into ``dim`` signed buckets, then L2-normalized. External sentence-embedding
services plug in over HTTP; precomputed fixtures serve tests.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Optional

import httpx

PROVIDER_HASH = "hash_ngram"
PROVIDER_EXTERNAL = "external_service"
PROVIDER_PRECOMPUTED = "precomputed"

DEFAULT_SEED = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_PAD_LEFT = "\x02"
_PAD_RIGHT = "\x03"


class EmbedError(Exception):
    pass


@dataclass
class EmbeddingSpec:
    provider: str = PROVIDER_HASH
    dim: int = 384
    seed: int = DEFAULT_SEED
    endpoint: Optional[str] = None
    timeout: float = 5.0
    fixture_path: Optional[str] = None  # precomputed provider only

    def to_dict(self) -> dict:
        data = {"provider": self.provider, "dim": self.dim, "seed": self.seed}
        if self.endpoint:
            data["endpoint"] = self.endpoint
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EmbeddingSpec":
        return cls(provider=data.get("provider", PROVIDER_HASH),
                   dim=int(data["dim"]),
                   seed=int(data.get("seed", DEFAULT_SEED)),
                   endpoint=data.get("endpoint"))


def _fnv1a(data: bytes, seed: int) -> int:
    h = (_FNV_OFFSET ^ (seed & _MASK64)) & _MASK64
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hash_embed(payload: str, dim: int, seed: int = DEFAULT_SEED) -> list[float]:
    """Signed trigram-count embedding, L2-normalized.

    The bucket is ``hash % dim``; the sign comes from the hash's top bit.
    Empty payloads embed to the zero vector.
    """
    if dim <= 0:
        raise ValueError("dim must be positive")
    vec = [0.0] * dim
    padded = _PAD_LEFT + payload + _PAD_RIGHT
    for i in range(len(padded) - 2):
        h = _fnv1a(padded[i:i + 3].encode("utf-8"), seed)
        sign = -1.0 if (h >> 63) & 1 else 1.0
        vec[h % dim] += sign
    norm = math.sqrt(sum(v * v for v in vec))
    if norm > 0:
        vec = [v / norm for v in vec]
    return vec


def embed(payload: str, spec: EmbeddingSpec) -> list[float]:
    """Dispatch to the configured provider. External failures raise
    EmbedError; callers choose their fallback policy."""
    if spec.provider == PROVIDER_HASH:
        return hash_embed(payload, spec.dim, spec.seed)
    if spec.provider == PROVIDER_EXTERNAL:
        return _embed_external(payload, spec)
    if spec.provider == PROVIDER_PRECOMPUTED:
        return _embed_precomputed(payload, spec)
    raise EmbedError(f"unknown embedding provider {spec.provider!r}")


def _embed_external(payload: str, spec: EmbeddingSpec) -> list[float]:
    if not spec.endpoint:
        raise EmbedError("external_service provider requires an endpoint")
    try:
        response = httpx.post(spec.endpoint, json={"texts": [payload]},
                              timeout=spec.timeout)
        response.raise_for_status()
        vectors = response.json()["vectors"]
    except httpx.TimeoutException as exc:
        raise EmbedError(f"timeout: {exc}") from exc
    except Exception as exc:
        raise EmbedError(f"embedding service failure: {exc}") from exc
    if not isinstance(vectors, list) or len(vectors) != 1 \
            or len(vectors[0]) != spec.dim:
        raise EmbedError("embedding service returned a malformed vector")
    return [float(v) for v in vectors[0]]


def _embed_precomputed(payload: str, spec: EmbeddingSpec) -> list[float]:
    if not spec.fixture_path:
        raise EmbedError("precomputed provider requires fixture_path")
    key = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    with open(spec.fixture_path, "r", encoding="utf-8") as fh:
        table = json.load(fh)
    try:
        return [float(v) for v in table[key]]
    except KeyError:
        raise EmbedError(f"payload not in fixture table (sha256 {key[:12]}...)") from None
