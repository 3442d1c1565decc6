"""gqlshield: GraphQL security engine.

Analyzes GraphQL queries in real time: static DoS/complexity checks driven
by schema-derived thresholds, SSRF URL analysis, and ML-based detection of
SQL injection, OS command injection, and XSS payloads. Usable as a library,
an HTTP service, or a CLI.
"""

__version__ = "0.1.0"
