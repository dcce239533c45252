"""Per-rule leakage statistics and ruleset aggregation.

A rule's information leakage is the spread of its alarms' (length-corrected)
entropies around their mean.  Two spread estimates are kept side by side:
the Normal sample standard deviation and the Laplacian one built on the L1
norm, which is the robust default because payload entropy distributions
show outliers and heavy tails in practice.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .alarms import AlarmStore, RuleAlarmSet
from .entropy import (
    RELIABLE_FLOOR_OCTETS,
    DegenerateLengthError,
    EntropyConfig,
    payload_entropy,
)

__all__ = [
    "EntropySeries",
    "RuleLeakage",
    "LeakageReport",
    "series_from_alarms",
    "mean_entropy",
    "median_entropy",
    "alarm_leakage",
    "sigma_normal",
    "sigma_laplace",
    "privacy_leakage",
    "aggregate_sigma",
    "whatif",
    "total_leakage",
    "rule_leakage",
    "build_report",
]

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class EntropySeries:
    """Ordered per-alarm entropy values of one rule under one config."""

    rule_id: str
    config: EntropyConfig
    values: tuple[tuple[int, float], ...]
    skipped_empty: int = 0
    skipped_degenerate: int = 0
    below_floor: int = 0

    @property
    def count(self) -> int:
        return len(self.values)

    def entropies(self) -> np.ndarray:
        return np.array([v for _, v in self.values], dtype=float)


def series_from_alarms(rule_set: RuleAlarmSet, config: EntropyConfig) -> EntropySeries:
    """Compute the entropy series for one rule.

    Zero-length payloads are stored but carry no entropy and are excluded
    (counted in ``skipped_empty``).  One-octet payloads under the corrected
    octet metric have no defined correction and are likewise excluded.
    Payloads below the 5-octet reliability floor stay in the series but are
    counted so reports can flag them.
    """
    values: list[tuple[int, float]] = []
    skipped_empty = skipped_degenerate = below_floor = 0
    for index, alarm in enumerate(rule_set.alarms):
        if alarm.length == 0:
            skipped_empty += 1
            continue
        try:
            ev = payload_entropy(alarm.payload, config)
        except DegenerateLengthError:
            skipped_degenerate += 1
            continue
        if alarm.length < RELIABLE_FLOOR_OCTETS:
            below_floor += 1
        values.append((index, ev.value))
    return EntropySeries(
        rule_id=rule_set.rule_id,
        config=config,
        values=tuple(values),
        skipped_empty=skipped_empty,
        skipped_degenerate=skipped_degenerate,
        below_floor=below_floor,
    )


def _values(series) -> np.ndarray:
    if isinstance(series, EntropySeries):
        return series.entropies()
    arr = np.asarray(list(series), dtype=float)
    return arr


def _mean(values: np.ndarray) -> float:
    # A constant series must yield its constant exactly so that the ideal
    # rule reports sigma == 0.0, not a rounding residue.
    if values.size and values.min() == values.max():
        return float(values[0])
    return float(values.mean())


def mean_entropy(series) -> float:
    values = _values(series)
    if values.size == 0:
        raise ValueError("mean of an empty entropy series is undefined")
    return _mean(values)


def median_entropy(series) -> float:
    values = _values(series)
    if values.size == 0:
        raise ValueError("median of an empty entropy series is undefined")
    return float(np.median(values))


def alarm_leakage(series, position: int) -> float:
    """Leakage of one alarm: its entropy minus the rule mean.

    ``position`` is 1-based; the values sum to zero over the whole series.
    """
    values = _values(series)
    if not 1 <= position <= values.size:
        raise IndexError(f"position {position} outside 1..{values.size}")
    return float(values[position - 1] - _mean(values))


def sigma_normal(series) -> float:
    """Sample standard deviation (N-1 divisor) of the entropy series."""
    values = _values(series)
    if values.size < 2:
        raise ValueError("sigma_normal needs at least two samples")
    mean = _mean(values)
    return float(np.sqrt(((values - mean) ** 2).sum() / (values.size - 1)))


def sigma_laplace(series, center: float | None = None) -> float:
    """Laplacian standard deviation: sqrt(2) times the mean absolute
    deviation, by default about the mean.

    Less influenced by far outliers than ``sigma_normal``; equals the true
    standard deviation for Laplace-distributed data.
    """
    values = _values(series)
    if values.size == 0:
        raise ValueError("sigma_laplace of an empty series is undefined")
    if center is None:
        center = _mean(values)
    return float(SQRT2 * np.abs(values - center).mean())


def privacy_leakage(rule_leakage: "RuleLeakage", impact: float, which: str = "laplace") -> float:
    """Impact-weighted leakage: I times the chosen sigma (Laplacian default)."""
    if impact < 0:
        raise ValueError(f"privacy impact must be >= 0, got {impact}")
    sigma = rule_leakage.sigma_laplace if which == "laplace" else rule_leakage.sigma_normal
    return impact * sigma


def aggregate_sigma(entries: Iterable[tuple[float, float]]) -> float:
    """Alarm-count-weighted average sigma over a ruleset.

    Equal sigmas aggregate to themselves, and rules are weighted by how
    many alarms they raise, so one noisy high-volume rule dominates.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("aggregate_sigma over an empty ruleset")
    total_n = 0.0
    weighted = 0.0
    for n, sigma in entries:
        if n < 1:
            raise ValueError(f"alarm count must be >= 1, got {n}")
        if sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma}")
        total_n += n
        weighted += n * sigma
    return weighted / total_n


def whatif(
    entries: Sequence[tuple[str, float, float]],
    remove: Iterable[str] = (),
    zero: Iterable[str] = (),
) -> tuple[float, float]:
    """Aggregate sigma before and after ruleset actions.

    ``remove`` drops the rule outright (its alarms are no longer reported);
    ``zero`` models anonymisation: the alarms still exist but stop
    contributing spread, so the rule keeps its weight with sigma 0.
    """
    known = {rule_id for rule_id, _, _ in entries}
    remove = set(remove)
    zero = set(zero)
    for rule_id in remove | zero:
        if rule_id not in known:
            raise KeyError(f"unknown rule_id {rule_id!r}")
    old = aggregate_sigma([(n, s) for _, n, s in entries])
    adjusted = [
        (n, 0.0 if rule_id in zero else s)
        for rule_id, n, s in entries
        if rule_id not in remove
    ]
    new = aggregate_sigma(adjusted)
    return old, new


def total_leakage(n: float, sigma: float) -> float:
    """Total privacy leakage of a rule: alarm count times sigma.

    The optimisation criterion when choosing what to anonymise; many
    mid-leakage alarms can outweigh a few extreme ones.
    """
    if n < 0 or sigma < 0:
        raise ValueError("total_leakage needs n >= 0 and sigma >= 0")
    return n * sigma


@dataclass(frozen=True)
class RuleLeakage:
    """Leakage summary of one rule."""

    rule_id: str
    count: int
    mean: float
    median: float
    sigma_normal: float
    sigma_laplace: float
    leakage_min: float
    leakage_max: float
    impact: float = 1.0
    clusters: int = 1
    description: str = ""
    below_floor: int = 0
    skipped_empty: int = 0
    skipped_degenerate: int = 0

    @property
    def pi(self) -> float:
        """Privacy leakage: impact times the Laplacian sigma."""
        return self.impact * self.sigma_laplace

    @property
    def total(self) -> float:
        return total_leakage(self.count, self.sigma_laplace)


def rule_leakage(series: EntropySeries, impact: float = 1.0) -> RuleLeakage:
    if series.count < 2:
        raise ValueError(f"rule {series.rule_id}: need >= 2 measurable alarms")
    if impact < 0:
        raise ValueError(f"privacy impact must be >= 0, got {impact}")
    values = series.entropies()
    mean = _mean(values)
    return RuleLeakage(
        rule_id=series.rule_id,
        count=series.count,
        mean=mean,
        median=float(np.median(values)),
        sigma_normal=sigma_normal(series),
        sigma_laplace=sigma_laplace(series),
        leakage_min=float(values.min() - mean),
        leakage_max=float(values.max() - mean),
        impact=impact,
        below_floor=series.below_floor,
        skipped_empty=series.skipped_empty,
        skipped_degenerate=series.skipped_degenerate,
    )


@dataclass
class LeakageReport:
    """Per-rule rows (sorted by Laplacian sigma, descending) plus the
    alarm-weighted aggregate."""

    config: EntropyConfig
    rows: list[RuleLeakage] = field(default_factory=list)

    @property
    def sigma_all(self) -> float:
        return aggregate_sigma([(r.count, r.sigma_laplace) for r in self.rows])

    def entries(self) -> list[tuple[str, float, float]]:
        return [(r.rule_id, r.count, r.sigma_laplace) for r in self.rows]

    def to_json(self) -> str:
        doc = {
            "config": {
                "algorithm": self.config.algorithm.value,
                "symbol": self.config.symbol.value,
                "normalized": self.config.normalized,
                "length_corrected": self.config.length_corrected,
            },
            "sigma_all": self.sigma_all,
            "rules": [
                {
                    "rule_id": r.rule_id,
                    "alarms": r.count,
                    "clusters": r.clusters,
                    "mean": r.mean,
                    "median": r.median,
                    "sigma_normal": r.sigma_normal,
                    "sigma_laplace": r.sigma_laplace,
                    "leakage_min": r.leakage_min,
                    "leakage_max": r.leakage_max,
                    "impact": r.impact,
                    "pi": r.pi,
                    "total": r.total,
                    "below_floor": r.below_floor,
                    "skipped_empty": r.skipped_empty,
                    "skipped_degenerate": r.skipped_degenerate,
                }
                for r in self.rows
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_table(self) -> str:
        header = f"{'SID':<12} {'Alarms':>9} {'Clusters':>8} {'sigma_1':>8} {'sigma_1L':>8}  Description"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            flag = " *" if r.below_floor else ""
            lines.append(
                f"{r.rule_id:<12} {r.count:>9} {r.clusters:>8} "
                f"{r.sigma_normal:>8.2f} {r.sigma_laplace:>8.2f}  {r.description}{flag}"
            )
        lines.append("-" * len(header))
        lines.append(f"{'sigma_all':<12} {self.sigma_all:>27.4f}")
        if any(r.below_floor for r in self.rows):
            lines.append("* includes payloads below the 5-octet reliability floor")
        return "\n".join(lines) + "\n"


def build_report(
    store: AlarmStore,
    config: EntropyConfig,
    impacts: dict[str, float] | None = None,
    jobs: int | None = None,
) -> LeakageReport:
    """Measure every rule in the store with at least two usable alarms.

    Rules are independent, so ``jobs`` workers may measure them in
    parallel; the final ordering is sorted either way.
    """
    impacts = impacts or {}
    report = LeakageReport(config=config)

    def measure(rule_id: str) -> RuleLeakage | None:
        series = series_from_alarms(store.rules[rule_id], config)
        if series.count < 2:
            return None
        return rule_leakage(series, impact=impacts.get(rule_id, 1.0))

    rule_ids = store.rule_ids()
    if jobs and jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(measure, rule_ids))
    else:
        rows = [measure(rule_id) for rule_id in rule_ids]
    report.rows = [r for r in rows if r is not None]
    report.rows.sort(key=lambda r: (-r.sigma_laplace, r.rule_id))
    return report
