"""Bundled reference measurement: 32 noisy Snort rules with their alarm
counts and length-corrected entropy standard deviations.

The per-rule sigmas cannot be recomputed here (the underlying alarm corpus
is private), so they are shipped as a fixture and consumed by the
aggregation and what-if arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

__all__ = ["Table1Row", "load_table1_fixture", "table1_entries"]


@dataclass(frozen=True)
class Table1Row:
    rule_id: str
    alarms: int
    clusters: int
    sigma_normal: float
    sigma_laplace: float
    description: str


_ROWS: tuple[Table1Row, ...] = (
    Table1Row("1:1394000", 95096, 1, 6.71, 6.70, "Samples random traffic"),
    Table1Row("119:14", 3104, 1, 4.10, 3.49, "http_inspect non-standard characters in web request"),
    Table1Row("1:402", 36224, 1, 2.34, 2.73, "ICMP Destination Port unreachable"),
    Table1Row("1:1201", 680, 1, 1.96, 1.77, "HTTP 403 Forbidden"),
    Table1Row("119:15", 720, 1, 1.40, 1.02, "http_inspect over-long URL"),
    Table1Row("1:1394", 1384, 2, 0.90, 0.97, "Shellcode x86 NOP AAAAAA"),
    Table1Row("119:4", 576, 1, 1.24, 0.91, "http_inspect preprocessor (IIS decoding attacks)"),
    Table1Row("1:1852", 10392, 1, 0.96, 0.75, "robots.txt access"),
    Table1Row("1:1463", 288, 1, 0.80, 0.72, "IRC Chat"),
    Table1Row("119:2", 21744, 2, 0.58, 0.61, "http_inspect double encoded characters"),
    Table1Row("1:399", 631840, 1, 1.02, 0.58, "ICMP Host unreachable"),
    Table1Row("119:7", 1520, 2, 0.48, 0.43, "http_inspect unicode encoded web request"),
    Table1Row("1:12592", 312, 1, 0.33, 0.40, "SMTP command injection attempt"),
    Table1Row("1:2925", 12960, 2, 0.42, 0.35, "1x1 GIF attempt (web bug)"),
    Table1Row("1:1560", 360, 2, 0.27, 0.30, "WEB-MISC /doc access"),
    Table1Row("1:486", 368, 1, 0.37, 0.27, "ICMP Destination Unreachable"),
    Table1Row("128:4", 306616, 3, 0.25, 0.27, "spp_ssh"),
    Table1Row("119:18", 22760, 2, 0.32, 0.18, "http_inspect directory traversal outside web server root."),
    Table1Row("122:1", 576, 2, 0.08, 0.10, "sfPortscan preprocessor (tcp portsweep)"),
    Table1Row("122:3", 2088, 1, 0.09, 0.09, "sfPortscan preprocessor (tcp portsweep)"),
    Table1Row("1:384", 566016, 4, 0.04, 0.08, "ICMP Ping (general)"),
    Table1Row("1:1437", 1056, 2, 0.08, 0.08, "MULTIMEDIA Windows Media download"),
    Table1Row("1:408", 205904, 3, 0.04, 0.04, "ICMP Echo Reply"),
    Table1Row("1:366", 202552, 1, 0.04, 0.04, "ICMP Ping *NIX"),
    Table1Row("1:368", 202552, 1, 0.04, 0.04, "ICMP Ping BSD"),
    Table1Row("1:11969", 2896, 3, 0.03, 0.03, "VOIP-SIP inbound 401 Unauthorized"),
    Table1Row("1:385", 4392, 2, 0.04, 0.03, "ICMP traceroute"),
    Table1Row("1:382", 2192, 1, 0.00, 0.00, "ICMP Ping Windows (alphabet)"),
    Table1Row("1:2050", 32024, 1, 0.00, 0.00, "SQL Version Overflow attempt."),
    Table1Row("1:2003", 1777264, 1, 0.00, 0.00, "SQL Worm Propagation attempt."),
    Table1Row("105:2", 192, 2, 0.00, 0.00, "BO traffic (spp_bo)"),
    Table1Row("106:4", 464, 3, 0.00, 0.00, "spp_rpc_decode preprocessor - e.g. incomplete RPC segment."),
)


def load_table1_fixture() -> list[Table1Row]:
    """All 32 reference rows, ordered by Laplacian sigma descending."""
    return list(_ROWS)


def table1_entries() -> list[tuple[str, int, float]]:
    """(rule_id, alarm count, Laplacian sigma) triples for aggregation."""
    return [(r.rule_id, r.alarms, r.sigma_laplace) for r in _ROWS]
