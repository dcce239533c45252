"""IDS alarm data model, file ingestion and store persistence.

The interchange format is JSON-lines with a hex-encoded payload:

    {"rule_id": "1:2003", "ts": 1296823510.5, "payload_hex": "9090"}

CSV with the header ``rule_id,ts,payload_hex`` is accepted as a convenience.
Malformed records are counted and reported, never fatal; malformed files
(unreadable, wrong header) raise.
"""
from __future__ import annotations

import csv
import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "Alarm",
    "RuleAlarmSet",
    "AlarmStore",
    "IngestDelta",
    "FileFormatError",
    "ingest_jsonl",
    "ingest_csv",
    "ingest_path",
]

RULE_ID_RE = re.compile(r"^\d+:\d+$")
_HEX_RE = re.compile(r"^(?:[0-9a-fA-F]{2})*$")


class FileFormatError(ValueError):
    """The file as a whole cannot be ingested (e.g. CSV header mismatch)."""


@dataclass(frozen=True)
class Alarm:
    """One IDS alert: rule identity, event time and the sampled payload."""

    rule_id: str
    ts: float
    payload: bytes

    def __post_init__(self) -> None:
        if not RULE_ID_RE.match(self.rule_id):
            raise ValueError(f"rule_id must look like gid:sid, got {self.rule_id!r}")

    @property
    def length(self) -> int:
        return len(self.payload)


@dataclass
class RuleAlarmSet:
    """All alarms of one rule, in ingestion order."""

    rule_id: str
    alarms: list[Alarm] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.alarms)

    def append(self, alarm: Alarm) -> None:
        if alarm.rule_id != self.rule_id:
            raise ValueError(f"alarm {alarm.rule_id} does not belong to {self.rule_id}")
        self.alarms.append(alarm)


@dataclass
class IngestDelta:
    """Outcome of ingesting one file."""

    path: str
    store: "AlarmStore"
    accepted: int = 0
    rejected: int = 0
    errors: list[str] = field(default_factory=list)


class AlarmStore:
    """Rule-keyed alarm collection with a source manifest.

    Distinct files may be parsed concurrently; mutation of one store is
    serialized through a lock.  Read access after loading needs no locking.
    """

    def __init__(self) -> None:
        self.rules: dict[str, RuleAlarmSet] = {}
        self.manifest: list[dict] = []
        self._lock = threading.Lock()

    def add(self, alarm: Alarm) -> None:
        with self._lock:
            self._add_unlocked(alarm)

    def _add_unlocked(self, alarm: Alarm) -> None:
        self.rules.setdefault(alarm.rule_id, RuleAlarmSet(alarm.rule_id)).append(alarm)

    def merge(self, delta: IngestDelta) -> None:
        with self._lock:
            for rule_set in delta.store.rules.values():
                for alarm in rule_set.alarms:
                    self._add_unlocked(alarm)
            self.manifest.append(
                {"path": delta.path, "accepted": delta.accepted, "rejected": delta.rejected}
            )

    @property
    def total_alarms(self) -> int:
        return sum(r.count for r in self.rules.values())

    def rule_ids(self) -> list[str]:
        return sorted(self.rules)

    def get(self, rule_id: str) -> RuleAlarmSet | None:
        return self.rules.get(rule_id)

    def save(self, path: str | Path) -> None:
        """Persist as canonical JSONL, rules sorted, alarms in order."""
        with open(path, "w", encoding="ascii") as fh:
            for rule_id in self.rule_ids():
                for alarm in self.rules[rule_id].alarms:
                    fh.write(
                        json.dumps(
                            {
                                "rule_id": alarm.rule_id,
                                "ts": alarm.ts,
                                "payload_hex": alarm.payload.hex(),
                            },
                            sort_keys=True,
                        )
                        + "\n"
                    )

    @classmethod
    def load(cls, path: str | Path) -> "AlarmStore":
        store = cls()
        delta = ingest_jsonl(path)
        if delta.rejected:
            raise FileFormatError(
                f"{path}: store file has {delta.rejected} malformed records"
            )
        store.merge(delta)
        return store


def _parse_record(rule_id, ts, payload_hex) -> Alarm:
    if not isinstance(rule_id, str) or not RULE_ID_RE.match(rule_id):
        raise ValueError(f"bad rule_id {rule_id!r}")
    if not isinstance(payload_hex, str) or not _HEX_RE.match(payload_hex):
        raise ValueError("payload_hex must be an even-length hex string")
    if ts is None:
        ts = 0.0
    return Alarm(rule_id=rule_id, ts=float(ts), payload=bytes.fromhex(payload_hex))


def ingest_jsonl(path: str | Path) -> IngestDelta:
    """Parse a JSONL alarm file into a fresh store delta.

    Raises OSError if the file cannot be read; records that fail to parse
    are counted in ``rejected`` with a reason in ``errors``.
    """
    delta = IngestDelta(path=str(path), store=AlarmStore())
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("record is not a JSON object")
                alarm = _parse_record(
                    obj.get("rule_id"), obj.get("ts"), obj.get("payload_hex")
                )
            except (ValueError, KeyError) as exc:
                delta.rejected += 1
                delta.errors.append(f"line {lineno}: {exc}")
                continue
            delta.store.add(alarm)
            delta.accepted += 1
    return delta


def ingest_csv(path: str | Path) -> IngestDelta:
    """Parse a CSV alarm file (header ``rule_id,ts,payload_hex``)."""
    delta = IngestDelta(path=str(path), store=AlarmStore())
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FileFormatError(f"{path}: empty CSV, missing header") from None
        if [h.strip() for h in header] != ["rule_id", "ts", "payload_hex"]:
            raise FileFormatError(f"{path}: expected header rule_id,ts,payload_hex")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                if len(row) != 3:
                    raise ValueError(f"expected 3 columns, got {len(row)}")
                alarm = _parse_record(row[0], row[1] or 0.0, row[2])
            except ValueError as exc:
                delta.rejected += 1
                delta.errors.append(f"line {lineno}: {exc}")
                continue
            delta.store.add(alarm)
            delta.accepted += 1
    return delta


def ingest_path(path: str | Path) -> IngestDelta:
    """Dispatch on extension: .csv goes to the CSV reader, anything else JSONL."""
    if str(path).lower().endswith(".csv"):
        return ingest_csv(path)
    return ingest_jsonl(path)
