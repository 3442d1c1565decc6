"""Per-check result record and the fixed check ordering used in reports."""

from __future__ import annotations

from dataclasses import dataclass, field

STATUS_PASS = "pass"
STATUS_BLOCKED = "blocked"
STATUS_SKIPPED = "skipped"

# Stable wire names, in report order.
CHECK_ORDER = (
    "depth", "aliases", "batch", "directives", "circular",
    "payload_inflation", "introspection", "complexity",
    "sqli", "osi", "xss", "ssrf", "parse",
)

STATIC_CHECKS = CHECK_ORDER[:8]
ML_CHECKS = ("sqli", "osi", "xss")


@dataclass
class CheckResult:
    check: str
    status: str
    score: float = 0.0
    threshold: float = 0.0
    detail: str = ""
    duration_micros: int = 0

    @property
    def blocked(self) -> bool:
        return self.status == STATUS_BLOCKED

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "score": self.score,
            "threshold": self.threshold,
            "detail": self.detail,
            "duration_micros": self.duration_micros,
        }


def threshold_result(check: str, score: float, threshold: float,
                     detail: str = "") -> CheckResult:
    """Inclusive upper bound: a score must exceed the threshold to block."""
    status = STATUS_BLOCKED if score > threshold else STATUS_PASS
    return CheckResult(check=check, status=status, score=score,
                       threshold=threshold, detail=detail)


def skipped_result(check: str, detail: str = "check disabled") -> CheckResult:
    return CheckResult(check=check, status=STATUS_SKIPPED, detail=detail)
