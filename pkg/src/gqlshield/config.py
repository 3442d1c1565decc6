"""Security configuration: thresholds, per-field complexity weights, and
the generators that derive them from a schema (deterministic heuristic or
external LLM with validation and fallback).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, asdict
from typing import Any

import httpx

from .gql.schema import Schema
from .results import CHECK_ORDER

TOGGLEABLE_CHECKS = tuple(c for c in CHECK_ORDER if c != "parse")

API_KEY_ENV = "GQLSHIELD_LLM_API_KEY"


class ConfigError(Exception):
    """Carries every violated constraint, not just the first."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class SsrfListConfig:
    """Extensions to the baked-in SSRF match lists."""

    metadata_hosts: list[str] = field(default_factory=list)
    param_names: list[str] = field(default_factory=list)
    rebind_domains: list[str] = field(default_factory=list)


@dataclass
class SecurityConfig:
    estimator: str = "directive"  # simple | directive
    simple_field_cost: float = 10.0
    complexity_threshold: float = 1000.0
    max_depth: int = 10
    max_aliases: int = 15
    max_batch: int = 5
    max_directives: int = 10
    max_circular_revisits: int = 2
    max_payload_estimate: int = 1000
    default_list_size: int = 10
    allow_introspection: bool = False
    field_weights: dict[str, float] = field(default_factory=dict)
    enabled_checks: set[str] = field(default_factory=lambda: set(TOGGLEABLE_CHECKS))
    detector_thresholds: dict[str, float] = field(
        default_factory=lambda: {"sqli": 0.5, "osi": 0.5, "xss": 0.5})
    mode: str = "enforce"  # enforce | monitor
    ssrf: SsrfListConfig = field(default_factory=SsrfListConfig)
    provenance: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["field_weights"] = dict(sorted(self.field_weights.items()))
        data["enabled_checks"] = sorted(self.enabled_checks)
        data["detector_thresholds"] = dict(sorted(self.detector_thresholds.items()))
        if not self.provenance:
            data.pop("provenance")
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass
class RuleSet:
    """Numeric defaults behind the heuristic generator plus the prose rules
    handed to an LLM."""

    prose: str = (
        "Assign a complexity weight to every field: scalar and enum fields get "
        "the base weight, object fields cost more, and list-valued fields are "
        "multiplied by the expected list size. Derive a maximum query depth "
        "from the longest acyclic path through the type graph plus a safety "
        "margin, and set the complexity threshold above the most expensive "
        "reasonable query. Keep alias, directive, and batch limits tight.")
    base_scalar_weight: float = 1.0
    object_weight: float = 2.0
    list_multiplier: float = 10.0
    depth_margin: int = 2
    max_aliases_default: int = 15
    max_directives_default: int = 10
    max_batch_default: int = 5
    max_payload_default: int = 1000
    default_list_size: int = 10
    simple_field_cost_default: float = 10.0

    def validate(self) -> None:
        numeric = {k: v for k, v in asdict(self).items() if k != "prose"}
        bad = [k for k, v in numeric.items() if v < 0]
        if bad:
            raise ConfigError([f"rule default {k} must be >= 0" for k in bad])


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_INT_FIELDS = {"max_depth", "max_aliases", "max_batch", "max_directives",
               "max_circular_revisits", "max_payload_estimate", "default_list_size"}
_FLOAT_FIELDS = {"simple_field_cost", "complexity_threshold"}
_KNOWN_KEYS = {
    "estimator", "simple_field_cost", "complexity_threshold", "max_depth",
    "max_aliases", "max_batch", "max_directives", "max_circular_revisits",
    "max_payload_estimate", "default_list_size", "allow_introspection",
    "field_weights", "enabled_checks", "detector_thresholds", "mode",
    "ssrf", "provenance",
}
_SSRF_KEYS = {"metadata_hosts", "param_names", "rebind_domains"}

_BOUNDS = {
    # field -> (minimum, inclusive?)
    "simple_field_cost": (0, True),
    "complexity_threshold": (0, False),
    "max_depth": (0, False),
    "max_aliases": (0, True),
    "max_batch": (1, True),
    "max_directives": (0, True),
    "max_circular_revisits": (1, True),
    "max_payload_estimate": (0, False),
    "default_list_size": (1, True),
}


def validate_config(text: str, schema: Schema | None = None) -> SecurityConfig:
    """Parse and invariant-check a JSON config document.

    Absent keys take defaults; unknown keys and every violated constraint
    are reported together in one ConfigError.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON: {exc}"]) from exc
    if not isinstance(data, dict):
        raise ConfigError(["config must be a JSON object"])
    return config_from_dict(data, schema)


def config_from_dict(data: dict[str, Any],
                     schema: Schema | None = None) -> SecurityConfig:
    errors: list[str] = []
    unknown = sorted(set(data) - _KNOWN_KEYS)
    for key in unknown:
        errors.append(f"unknown key {key!r}")

    cfg = SecurityConfig()

    for key, (minimum, inclusive) in _BOUNDS.items():
        if key not in data:
            continue
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{key} must be a number")
            continue
        ok = value >= minimum if inclusive else value > minimum
        if not ok:
            op = ">=" if inclusive else ">"
            errors.append(f"{key} must be {op} {minimum}")
            continue
        if key in _INT_FIELDS:
            if value != int(value):
                errors.append(f"{key} must be an integer")
                continue
            setattr(cfg, key, int(value))
        else:
            setattr(cfg, key, float(value))

    if "estimator" in data:
        if data["estimator"] in ("simple", "directive"):
            cfg.estimator = data["estimator"]
        else:
            errors.append("estimator must be 'simple' or 'directive'")
    if "mode" in data:
        if data["mode"] in ("enforce", "monitor"):
            cfg.mode = data["mode"]
        else:
            errors.append("mode must be 'enforce' or 'monitor'")
    if "allow_introspection" in data:
        if isinstance(data["allow_introspection"], bool):
            cfg.allow_introspection = data["allow_introspection"]
        else:
            errors.append("allow_introspection must be a boolean")

    if "field_weights" in data:
        weights = data["field_weights"]
        if not isinstance(weights, dict):
            errors.append("field_weights must be an object")
        else:
            parsed: dict[str, float] = {}
            for key, value in weights.items():
                if isinstance(value, bool) or not isinstance(value, (int, float)) \
                        or value < 0:
                    errors.append(f"field_weights[{key!r}] must be a number >= 0")
                    continue
                if "." not in key:
                    errors.append(f"field_weights key {key!r} is not 'Type.field'")
                    continue
                parsed[key] = float(value)
            cfg.field_weights = parsed

    if "enabled_checks" in data:
        checks = data["enabled_checks"]
        if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
            errors.append("enabled_checks must be a list of check names")
        else:
            bad = sorted(set(checks) - set(TOGGLEABLE_CHECKS))
            for name in bad:
                errors.append(f"enabled_checks contains unknown check {name!r}")
            if not bad:
                cfg.enabled_checks = set(checks)

    if "detector_thresholds" in data:
        thresholds = data["detector_thresholds"]
        if not isinstance(thresholds, dict):
            errors.append("detector_thresholds must be an object")
        else:
            for name, value in thresholds.items():
                if name not in ("sqli", "osi", "xss"):
                    errors.append(f"detector_thresholds has unknown detector {name!r}")
                elif isinstance(value, bool) or not isinstance(value, (int, float)) \
                        or not 0.0 <= value <= 1.0:
                    errors.append(f"detector_thresholds[{name!r}] must be in [0, 1]")
                else:
                    cfg.detector_thresholds[name] = float(value)

    if "ssrf" in data:
        ssrf = data["ssrf"]
        if not isinstance(ssrf, dict):
            errors.append("ssrf must be an object")
        else:
            for key in sorted(set(ssrf) - _SSRF_KEYS):
                errors.append(f"unknown key 'ssrf.{key}'")
            for key in _SSRF_KEYS & set(ssrf):
                value = ssrf[key]
                if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                    errors.append(f"ssrf.{key} must be a list of strings")
                else:
                    setattr(cfg.ssrf, key, list(value))

    if "provenance" in data:
        if isinstance(data["provenance"], dict):
            cfg.provenance = data["provenance"]
        else:
            errors.append("provenance must be an object")

    if schema is not None:
        for key in sorted(cfg.field_weights):
            type_name, _, field_name = key.partition(".")
            tdef = schema.types.get(type_name)
            if tdef is None or field_name not in tdef.fields:
                errors.append(f"field_weights key {key!r} does not exist in the schema")

    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str, schema: Schema | None = None) -> SecurityConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(fh.read(), schema)


# ---------------------------------------------------------------------------
# Heuristic generation
# ---------------------------------------------------------------------------

def heuristic_generate(schema: Schema, rules: RuleSet | None = None) -> SecurityConfig:
    """Deterministic schema-driven config.

    Weights: scalar/enum = base, object/interface/union = object weight,
    any list wrapper multiplies once. max_depth = longest acyclic path
    (in types) from the query root plus the margin. The complexity
    threshold prices the greedy deepest single-path query at 1.5x.
    """
    rules = rules or RuleSet()
    rules.validate()

    weights: dict[str, float] = {}
    for tdef in schema.types.values():
        if tdef.kind not in ("object", "interface"):
            continue
        for fdef in tdef.fields.values():
            base = rules.base_scalar_weight if schema.is_leaf(fdef.type.name) \
                else rules.object_weight
            if fdef.type.is_list:
                base *= rules.list_multiplier
            weights[f"{tdef.name}.{fdef.name}"] = base

    longest = _longest_acyclic_path(schema)
    max_depth = max(1, longest) + rules.depth_margin

    greedy_total = _greedy_path_cost(schema, weights, max_depth, rules)
    max_weight = max(weights.values(), default=0.0)
    complexity_threshold = max(1, math.ceil(1.5 * max(greedy_total, max_weight)))

    return SecurityConfig(
        estimator="directive",
        simple_field_cost=rules.simple_field_cost_default,
        complexity_threshold=float(complexity_threshold),
        max_depth=max_depth,
        max_aliases=rules.max_aliases_default,
        max_batch=rules.max_batch_default,
        max_directives=rules.max_directives_default,
        max_circular_revisits=2,
        max_payload_estimate=rules.max_payload_default,
        default_list_size=rules.default_list_size,
        allow_introspection=False,
        field_weights=weights,
        provenance={"source": "heuristic", "fallback": False},
    )


def _longest_acyclic_path(schema: Schema) -> int:
    """Longest path through the adjacency graph from the query root,
    counted in types visited (each type at most once per path)."""
    root = schema.query_root
    if root is None or root not in schema.adjacency:
        return 1

    best = 0

    def dfs(node: str, visited: set[str], length: int) -> None:
        nonlocal best
        best = max(best, length)
        for nxt in sorted(schema.adjacency.get(node, ())):
            if nxt not in visited:
                dfs(nxt, visited | {nxt}, length + 1)

    dfs(root, {root}, 1)
    return best


def _greedy_path_cost(schema: Schema, weights: dict[str, float],
                      depth: int, rules: RuleSet) -> float:
    """Cost of the single-path query built by greedily taking the heaviest
    field at each level, with list multiplicities compounding."""
    current = schema.query_root
    if current is None:
        return 0.0
    total = 0.0
    multiplier = 1.0
    for _ in range(depth):
        tdef = schema.types.get(current)
        if tdef is None or not tdef.fields:
            break
        best_field = None
        best_key = None
        for fdef in tdef.fields.values():
            weight = weights.get(f"{current}.{fdef.name}", 0.0)
            descends = schema.is_composite(fdef.type.name)
            key = (weight, descends, fdef.name)
            if best_key is None or key > best_key:
                best_key = key
                best_field = fdef
        if best_field is None:
            break
        total += weights.get(f"{current}.{best_field.name}", 0.0) * multiplier
        if best_field.type.is_list:
            multiplier *= rules.default_list_size
        target = schema.types.get(best_field.type.name)
        if target is None or target.kind not in ("object", "interface"):
            break
        current = target.name
    return total


# ---------------------------------------------------------------------------
# LLM generation
# ---------------------------------------------------------------------------

CONFIG_JSON_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gqlshield security config",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "estimator": {"enum": ["simple", "directive"]},
        "simple_field_cost": {"type": "number", "minimum": 0},
        "complexity_threshold": {"type": "number", "exclusiveMinimum": 0},
        "max_depth": {"type": "integer", "exclusiveMinimum": 0},
        "max_aliases": {"type": "integer", "minimum": 0},
        "max_batch": {"type": "integer", "minimum": 1},
        "max_directives": {"type": "integer", "minimum": 0},
        "max_circular_revisits": {"type": "integer", "minimum": 1},
        "max_payload_estimate": {"type": "integer", "exclusiveMinimum": 0},
        "default_list_size": {"type": "integer", "minimum": 1},
        "allow_introspection": {"type": "boolean"},
        "field_weights": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0},
        },
        "enabled_checks": {
            "type": "array",
            "items": {"enum": list(TOGGLEABLE_CHECKS)},
        },
        "detector_thresholds": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0, "maximum": 1},
        },
        "mode": {"enum": ["enforce", "monitor"]},
        "ssrf": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "metadata_hosts": {"type": "array", "items": {"type": "string"}},
                "param_names": {"type": "array", "items": {"type": "string"}},
                "rebind_domains": {"type": "array", "items": {"type": "string"}},
            },
        },
        "provenance": {"type": "object"},
    },
}


@dataclass
class LlmClient:
    """Minimal chat-completion client. The API key is read from the named
    environment variable at call time and never stored."""

    endpoint: str
    model: str
    timeout: float = 30.0
    api_key_env: str = API_KEY_ENV

    def complete(self, system: str, user: str) -> str:
        headers = {"content-type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["authorization"] = f"Bearer {api_key}"
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        response = httpx.post(self.endpoint, json=body, headers=headers,
                              timeout=self.timeout)
        response.raise_for_status()
        return _response_text(response.json())


def _response_text(payload: Any) -> str:
    if isinstance(payload, dict):
        choices = payload.get("choices")
        if isinstance(choices, list) and choices:
            first = choices[0]
            if isinstance(first, dict):
                message = first.get("message")
                if isinstance(message, dict) and isinstance(message.get("content"), str):
                    return message["content"]
                if isinstance(first.get("text"), str):
                    return first["text"]
        if isinstance(payload.get("content"), str):
            return payload["content"]
    return json.dumps(payload)


def build_prompt(schema_sdl: str, rules: RuleSet) -> tuple[str, str]:
    system = (
        "You generate security configuration for a GraphQL API firewall. "
        "Respond with only a JSON object matching the provided JSON schema: "
        "no prose, no code fences.")
    user = (
        "Rules:\n" + rules.prose + "\n\n"
        "GraphQL schema (SDL):\n" + schema_sdl + "\n\n"
        "JSON schema the response must match:\n"
        + json.dumps(CONFIG_JSON_SCHEMA, indent=2))
    return system, user


def first_json_block(text: str) -> str | None:
    """The first balanced top-level {...} block, string-aware."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start:i + 1]
        start = text.find("{", start + 1)
    return None


def llm_generate(schema_sdl: str, rules: RuleSet, client: LlmClient,
                 schema: Schema | None = None) -> SecurityConfig:
    """Ask the LLM for a config; fall back to the heuristic on any failure.

    Never raises for transport, parse, or validation problems: the returned
    config always passes validate_config, and its provenance records whether
    the fallback was used.
    """
    from .gql.schema import parse_schema

    if schema is None:
        try:
            schema = parse_schema(schema_sdl)
        except Exception:
            schema = None

    failure = None
    try:
        system, user = build_prompt(schema_sdl, rules)
        text = client.complete(system, user)
        block = first_json_block(text)
        if block is None:
            failure = "no JSON object in response"
        else:
            cfg = validate_config(block, schema)
            cfg.provenance = {"source": "llm", "fallback": False,
                              "model": client.model}
            return cfg
    except ConfigError as exc:
        failure = f"invalid config: {exc}"
    except Exception as exc:
        failure = f"{type(exc).__name__}: {exc}"

    if schema is not None:
        cfg = heuristic_generate(schema, rules)
    else:
        cfg = SecurityConfig()
    cfg.provenance = {"source": "heuristic", "fallback": True,
                      "reason": failure or "unknown"}
    return cfg
