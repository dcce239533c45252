"""privleak: privacy-leakage analytics for IDS alarm payloads."""

from .alarms import Alarm, AlarmStore, RuleAlarmSet, ingest_csv, ingest_jsonl
from .entropy import (
    Algorithm,
    EntropyConfig,
    EntropyValue,
    Symbol,
    binary_min_constant,
    binary_shannon_constant,
    length_correct,
    min_entropy,
    payload_entropy,
    shannon_entropy,
)
from .leakage import (
    EntropySeries,
    LeakageReport,
    RuleLeakage,
    aggregate_sigma,
    alarm_leakage,
    build_report,
    mean_entropy,
    privacy_leakage,
    sigma_laplace,
    sigma_normal,
    total_leakage,
    whatif,
)
from .mixture import (
    ClusterLeakage,
    FitSession,
    MixtureModel,
    cluster_leakage,
    fit,
    weighted_median,
)
from .table1 import Table1Row, load_table1_fixture, table1_entries

__version__ = "0.1.0"
