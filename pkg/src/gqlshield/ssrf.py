"""SSRF detection over URLs found in query payloads.

Four vectors: local/private targets, cloud metadata endpoints, SSRF-prone
query parameters carrying inner URLs, and URLs revealed only after
decoding (percent, unicode escapes, base64). No DNS resolution happens
here; DNS-rebinding helper domains are matched from a static, extensible
list instead.
"""

from __future__ import annotations

import base64
import binascii
import ipaddress
import re
import time
from dataclasses import dataclass, field
from urllib.parse import parse_qsl, unquote

MAX_DECODE_DEPTH = 3

VECTOR_LOCAL = "local_ip"
VECTOR_METADATA = "cloud_metadata"
VECTOR_PARAM = "param_based"
VECTOR_ENCODED = "encoded_payload"

DEFAULT_METADATA_HOSTS = (
    "169.254.169.254",
    "metadata.google.internal",
    "metadata.goog",
    "169.254.170.2",
    "fd00:ec2::254",
)
DEFAULT_METADATA_PATHS = (
    "/latest/meta-data",
    "/computeMetadata",
    "/metadata/instance",
)
DEFAULT_PARAM_NAMES = (
    "url", "uri", "redirect", "redirect_uri", "next", "dest", "destination",
    "target", "callback", "link", "fetch", "proxy",
)
DEFAULT_REBIND_DOMAINS = ("nip.io", "sslip.io")

_PRIVATE_V4 = [ipaddress.ip_network(n) for n in (
    "127.0.0.0/8", "10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16",
    "169.254.0.0/16", "0.0.0.0/32",
)]
_PRIVATE_V6 = [ipaddress.ip_network(n) for n in ("::1/128", "fc00::/7", "fe80::/10")]

_URL_RE = re.compile(
    r"(?i)\b(?:https?|ftp|gopher|file|dict)://[^\s<>\"'`\\]+"
    r"|(?<![:\w/])//[^\s<>\"'`\\/][^\s<>\"'`\\]*")
_TRAILING_JUNK = ".,;:)]}>!?'\""

_UNICODE_ESC_RE = re.compile(r"\\u([0-9A-Fa-f]{4})|\\x([0-9A-Fa-f]{2})")
_BASE64_TOKEN_RE = re.compile(r"^[A-Za-z0-9+/\-_]+={0,2}$")


@dataclass
class SsrfPolicy:
    """Match lists; defaults stay baked in, config entries extend them."""

    metadata_hosts: frozenset[str] = frozenset(DEFAULT_METADATA_HOSTS)
    metadata_paths: tuple[str, ...] = DEFAULT_METADATA_PATHS
    param_names: frozenset[str] = frozenset(DEFAULT_PARAM_NAMES)
    rebind_domains: tuple[str, ...] = DEFAULT_REBIND_DOMAINS

    @classmethod
    def with_extensions(cls, metadata_hosts=(), param_names=(), rebind_domains=()):
        return cls(
            metadata_hosts=frozenset(DEFAULT_METADATA_HOSTS) | {h.lower() for h in metadata_hosts},
            param_names=frozenset(DEFAULT_PARAM_NAMES) | {p.lower() for p in param_names},
            rebind_domains=tuple(DEFAULT_REBIND_DOMAINS) + tuple(d.lower() for d in rebind_domains),
        )


DEFAULT_POLICY = SsrfPolicy()


@dataclass
class UrlFinding:
    raw: str
    normalized_host: str
    resolved_ip: str | None
    scheme: str
    params: list[tuple[str, str]]
    source: str
    decode_chain: tuple[str, ...] = ()
    path: str = ""


@dataclass
class SsrfVerdict:
    flagged: bool
    vector: str
    evidence: str = ""


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def _try_percent(text: str) -> str | None:
    if "%" not in text:
        return None
    decoded = unquote(text, errors="replace")
    return decoded if decoded != text else None


def _try_unicode(text: str) -> str | None:
    if "\\u" not in text and "\\x" not in text:
        return None

    def sub(m: re.Match) -> str:
        code = m.group(1) or m.group(2)
        return chr(int(code, 16))

    decoded = _UNICODE_ESC_RE.sub(sub, text)
    return decoded if decoded != text else None


def _try_base64(text: str) -> str | None:
    token = text.strip()
    if len(token) < 12 or not _BASE64_TOKEN_RE.match(token):
        return None
    if len(token) % 4 != 0:
        return None
    try:
        raw = base64.b64decode(token.replace("-", "+").replace("_", "/"), validate=True)
    except (binascii.Error, ValueError):
        return None
    printable = sum(1 for b in raw if 32 <= b < 127 or b in (9, 10, 13))
    if not raw or printable / len(raw) < 0.8:
        return None
    try:
        return raw.decode("utf-8", errors="replace")
    except Exception:  # pragma: no cover - decode with replace cannot fail
        return None


_DECODERS = (("url_decode", _try_percent), ("unicode_escape", _try_unicode),
             ("base64", _try_base64))


def decode_layers(text: str) -> list[tuple[str, tuple[str, ...]]]:
    """All decoded variants of ``text`` plus the original.

    At each of up to MAX_DECODE_DEPTH rounds every decoder is applied to the
    current string; the first successful decoder's output becomes the next
    round's string, the rest are recorded as leaf variants. Output size is
    bounded by 1 + 3 per round.
    """
    variants: list[tuple[str, tuple[str, ...]]] = [(text, ())]
    seen = {text}
    current, chain = text, ()
    for _ in range(MAX_DECODE_DEPTH):
        next_current = None
        for name, decoder in _DECODERS:
            decoded = decoder(current)
            if decoded is None or decoded in seen:
                continue
            seen.add(decoded)
            variants.append((decoded, chain + (name,)))
            if next_current is None:
                next_current = (decoded, chain + (name,))
        if next_current is None:
            break
        current, chain = next_current
    return variants


# ---------------------------------------------------------------------------
# Host normalization
# ---------------------------------------------------------------------------

def normalize_host(host: str) -> str | None:
    """Canonical IP form for any textual IP encoding, else None.

    Handles dotted decimal, single 32-bit decimal/octal/hex, per-part
    octal/hex (mixed radix), partial quads (inet_aton style), IPv6, and
    IPv4-mapped IPv6 (returned as plain IPv4).
    """
    host = host.strip().rstrip(".").strip()
    if not host:
        return None
    if host.startswith("[") and host.endswith("]"):
        host = host[1:-1]
    if ":" in host:
        try:
            addr = ipaddress.IPv6Address(host)
        except ValueError:
            return None
        if addr.ipv4_mapped is not None:
            return str(addr.ipv4_mapped)
        return addr.compressed
    value = _parse_ipv4_numeric(host)
    if value is None:
        return None
    return str(ipaddress.IPv4Address(value))


def _parse_part(part: str) -> int | None:
    if not part:
        return None
    try:
        if part[:2].lower() == "0x":
            if len(part) == 2:
                return None
            return int(part[2:], 16)
        if part[0] == "0" and len(part) > 1:
            return int(part, 8)
        if not part.isdigit():
            return None
        return int(part, 10)
    except ValueError:
        return None


def _parse_ipv4_numeric(host: str) -> int | None:
    parts = host.split(".")
    if len(parts) > 4:
        return None
    values = []
    for part in parts:
        value = _parse_part(part)
        if value is None or value < 0:
            return None
        values.append(value)
    # inet_aton semantics: the last part spans the remaining bytes.
    last_span = 4 - (len(values) - 1)
    if values[-1] >= 1 << (8 * last_span):
        return None
    if any(v > 255 for v in values[:-1]):
        return None
    total = 0
    for v in values[:-1]:
        total = (total << 8) | v
    total = (total << (8 * last_span)) | values[-1]
    return total


# ---------------------------------------------------------------------------
# URL extraction
# ---------------------------------------------------------------------------

def _split_url(url: str) -> tuple[str, str, str, str]:
    """(scheme, host, path, query) without DNS or validation."""
    scheme = ""
    rest = url
    m = re.match(r"(?i)^([a-z][a-z0-9+.-]*)://", url)
    if m:
        scheme = m.group(1).lower()
        rest = url[m.end():]
    elif url.startswith("//"):
        rest = url[2:]
    authority, sep, tail = rest.partition("/")
    path, query = "", ""
    if sep:
        path_part, qsep, query = tail.partition("?")
        path = "/" + path_part
        if not qsep:
            query = ""
    else:
        authority, _, query = authority.partition("?")
    if "@" in authority:
        authority = authority.rsplit("@", 1)[1]
    host = authority
    if host.startswith("["):
        end = host.find("]")
        host = host[:end + 1] if end >= 0 else host
    else:
        host = host.rsplit(":", 1)[0] if ":" in host else host
    return scheme, host, path, query


def find_urls(text: str) -> list[str]:
    urls = []
    for m in _URL_RE.finditer(text):
        url = m.group(0).rstrip(_TRAILING_JUNK)
        if url:
            urls.append(url)
    return urls


def make_finding(url: str, source: str,
                 decode_chain: tuple[str, ...] = ()) -> UrlFinding:
    scheme, host, path, query = _split_url(url)
    host_lower = host.lower().strip("[]").rstrip(".")
    resolved = normalize_host(host)
    try:
        params = parse_qsl(query, keep_blank_values=True)
    except ValueError:
        params = []
    return UrlFinding(raw=url, normalized_host=host_lower, resolved_ip=resolved,
                      scheme=scheme, params=params, source=source,
                      decode_chain=decode_chain, path=path)


def extract_urls(sites) -> list[UrlFinding]:
    """Scan each payload site (and its decoded variants) for URLs."""
    findings: list[UrlFinding] = []
    seen: set[tuple[str, str]] = set()
    for site in sites:
        for variant, chain in decode_layers(site.text):
            for url in find_urls(variant):
                key = (url, site.path)
                if key in seen:
                    continue
                seen.add(key)
                findings.append(make_finding(url, site.path, chain))
    return findings


# ---------------------------------------------------------------------------
# Vector checks
# ---------------------------------------------------------------------------

def _ip_in_private_ranges(ip_text: str) -> str | None:
    try:
        addr = ipaddress.ip_address(ip_text)
    except ValueError:
        return None
    networks = _PRIVATE_V4 if addr.version == 4 else _PRIVATE_V6
    for net in networks:
        if addr in net:
            return str(net)
    return None


def _rebind_embedded_ip(host: str, policy: SsrfPolicy) -> str | None:
    for domain in policy.rebind_domains:
        suffix = "." + domain
        if not host.endswith(suffix):
            continue
        prefix = host[:-len(suffix)]
        if not prefix:
            continue
        labels = prefix.split(".")
        candidates = [prefix, labels[-1].replace("-", ".")]
        if len(labels) >= 4:
            candidates.append(".".join(labels[-4:]))
        if re.fullmatch(r"[0-9a-fA-F]{8}", labels[-1]):
            candidates.append("0x" + labels[-1])
        for cand in candidates:
            ip = normalize_host(cand)
            if ip is not None:
                return ip
    return None


def is_local_or_private(f: UrlFinding, policy: SsrfPolicy = DEFAULT_POLICY) -> SsrfVerdict:
    if f.resolved_ip is not None:
        net = _ip_in_private_ranges(f.resolved_ip)
        if net is not None:
            return SsrfVerdict(True, VECTOR_LOCAL,
                               f"{f.resolved_ip} in private range {net}")
    host = f.normalized_host
    if host == "localhost" or host.endswith(".localhost") or host.endswith(".local"):
        return SsrfVerdict(True, VECTOR_LOCAL, f"local hostname {host!r}")
    embedded = _rebind_embedded_ip(host, policy)
    if embedded is not None and _ip_in_private_ranges(embedded) is not None:
        return SsrfVerdict(True, VECTOR_LOCAL,
                           f"rebinding domain {host!r} embeds private ip {embedded}")
    return SsrfVerdict(False, VECTOR_LOCAL)


def is_cloud_metadata(f: UrlFinding, policy: SsrfPolicy = DEFAULT_POLICY) -> SsrfVerdict:
    hosts = {f.normalized_host}
    if f.resolved_ip is not None:
        hosts.add(f.resolved_ip)
    for host in hosts:
        if host in policy.metadata_hosts:
            return SsrfVerdict(True, VECTOR_METADATA, f"metadata endpoint {host}")
    for prefix in policy.metadata_paths:
        if f.path.startswith(prefix):
            return SsrfVerdict(True, VECTOR_METADATA, f"metadata path {prefix!r}")
    return SsrfVerdict(False, VECTOR_METADATA)


def _parse_inner_url(value: str) -> str | None:
    urls = find_urls(value)
    if urls:
        return urls[0]
    # Bare host[:port][/path] values still count when host-shaped.
    m = re.match(r"^[A-Za-z0-9\[][A-Za-z0-9.\-:\[\]]*(?:/[^\s]*)?$", value)
    if m and ("." in value or ":" in value or value.lower().startswith("localhost")):
        return "http://" + value
    return None


def check_params(f: UrlFinding, depth: int = 0,
                 policy: SsrfPolicy = DEFAULT_POLICY) -> SsrfVerdict:
    if depth >= MAX_DECODE_DEPTH:
        return SsrfVerdict(False, VECTOR_PARAM)
    for name, value in f.params:
        if name.lower() not in policy.param_names:
            continue
        for variant, chain in decode_layers(value):
            inner_url = _parse_inner_url(variant)
            if inner_url is None:
                continue
            inner = make_finding(inner_url, f.source, f.decode_chain + chain)
            for verdict in (is_local_or_private(inner, policy),
                            is_cloud_metadata(inner, policy),
                            check_params(inner, depth + 1, policy)):
                if verdict.flagged:
                    return SsrfVerdict(
                        True, VECTOR_PARAM,
                        f"parameter {name!r} carries {inner_url!r}: {verdict.evidence}")
    return SsrfVerdict(False, VECTOR_PARAM)


def check_encoded(f: UrlFinding, target_verdicts: list[SsrfVerdict]) -> SsrfVerdict:
    """Flags URLs whose malicious target was hidden behind decoding layers.

    Only the target checks (local/private, metadata) count here: parameter
    values are routinely percent-encoded, and check_params already decodes
    them itself.
    """
    if f.decode_chain and any(v.flagged for v in target_verdicts):
        chain = " -> ".join(f.decode_chain)
        return SsrfVerdict(True, VECTOR_ENCODED, f"revealed via {chain}")
    return SsrfVerdict(False, VECTOR_ENCODED)


def evaluate_finding(f: UrlFinding,
                     policy: SsrfPolicy = DEFAULT_POLICY) -> list[SsrfVerdict]:
    local = is_local_or_private(f, policy)
    metadata = is_cloud_metadata(f, policy)
    params = check_params(f, 0, policy)
    encoded = check_encoded(f, [local, metadata])
    return [local, metadata, params, encoded]


def check_ssrf(doc, variables=None, policy: SsrfPolicy = DEFAULT_POLICY,
               sites=None):
    """Full SSRF check over a document: extract sites, find URLs, evaluate
    all four vectors. Pre-extracted sites may be passed to avoid a second
    extraction. Blocks when any finding flags any vector."""
    from .gql.extract import extract_string_inputs
    from .results import CheckResult, STATUS_BLOCKED, STATUS_PASS

    start = time.perf_counter_ns()
    if sites is None:
        sites = extract_string_inputs(doc, variables)
    flagged: list[str] = []
    for finding in extract_urls(sites):
        for verdict in evaluate_finding(finding, policy):
            if verdict.flagged:
                flagged.append(
                    f"vector={verdict.vector} evidence={verdict.evidence} "
                    f"source={finding.source}")
    duration = (time.perf_counter_ns() - start) // 1000
    return CheckResult(
        check="ssrf",
        status=STATUS_BLOCKED if flagged else STATUS_PASS,
        score=len(flagged),
        threshold=0,
        detail="; ".join(flagged),
        duration_micros=duration,
    )
