"""privleak command line.

Batch commands compose the library directly; ``cluster --serve`` starts the
HTTP session service for interactive curation.  Exit codes: 0 success,
1 usage error, 2 data error.  Identical flags and seed give byte-identical
output.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .alarms import AlarmStore, FileFormatError, ingest_path
from .entropy import Algorithm, EntropyConfig, Symbol
from .leakage import build_report, whatif
from .mixture import fit
from .simulate import PROFILES, SCENARIOS, run_scenario
from .table1 import load_table1_fixture, table1_entries

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


def _config_from_args(args) -> EntropyConfig:
    return EntropyConfig(
        algorithm=Algorithm(args.entropy),
        symbol=Symbol(args.symbol),
        normalized=not args.no_normalize,
        length_corrected=not args.no_length_correction,
    )


def _read_impacts(path: str | None) -> dict[str, float]:
    """Impact map file: one ``rule_id = value`` per line, # comments."""
    if path is None:
        return {}
    impacts: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FileFormatError(f"{path}:{lineno}: expected rule_id = impact")
        key, _, value = line.partition("=")
        try:
            impacts[key.strip()] = float(value.strip())
        except ValueError as exc:
            raise FileFormatError(f"{path}:{lineno}: bad impact {value.strip()!r}") from exc
    return impacts


DEFAULT_PORT = 8099


def _read_config(path: str | None) -> tuple[int, dict[str, float]]:
    """Tool config, flat key=value lines: ``port`` for the session service
    and ``impact.<rule_id>`` entries for the impact map."""
    port = DEFAULT_PORT
    impacts: dict[str, float] = {}
    if path is None:
        return port, impacts
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FileFormatError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "port":
                port = int(value)
            elif key.startswith("impact."):
                impacts[key.removeprefix("impact.")] = float(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise FileFormatError(f"{path}:{lineno}: {exc}") from exc
    return port, impacts


def _add_metric_flags(sub) -> None:
    sub.add_argument("--entropy", choices=["shannon", "min"], default="shannon")
    sub.add_argument("--symbol", choices=["bit", "octet"], default="octet")
    sub.add_argument("--no-length-correction", action="store_true")
    sub.add_argument("--no-normalize", action="store_true")


def cmd_ingest(args) -> int:
    store = AlarmStore()
    store_path = Path(args.store)
    if store_path.exists():
        store = AlarmStore.load(store_path)
    for path in args.files:
        delta = ingest_path(path)
        store.merge(delta)
        print(f"{path}: accepted {delta.accepted} rejected {delta.rejected}")
        for err in delta.errors[:20]:
            print(f"  {err}")
    store.save(store_path)
    print(f"store: {store_path} rules {len(store.rules)} alarms {store.total_alarms}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    store = AlarmStore.load(args.store)
    if not store.rules:
        print("store is empty", file=sys.stderr)
        return EXIT_DATA
    config = _config_from_args(args)
    _, impacts = _read_config(args.config)
    impacts.update(_read_impacts(args.impact))
    report = build_report(store, config, impacts=impacts, jobs=args.jobs)
    if not report.rows:
        print("no rule has >= 2 measurable alarms", file=sys.stderr)
        return EXIT_DATA
    if args.format == "json":
        print(report.to_json())
    else:
        print(report.to_table(), end="")
    return EXIT_OK


def cmd_cluster(args) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    store = AlarmStore.load(args.store)
    config = _config_from_args(args)
    if args.serve is not None:
        from .service import create_app
        import uvicorn

        port, impacts = _read_config(args.config)
        if args.serve > 0:
            port = args.serve
        app = create_app(
            store, default_config=config, impacts=impacts, seed=args.seed, bins=args.bins
        )
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
        return EXIT_OK
    if args.rule is None:
        raise UsageError("cluster needs --rule (or --serve PORT)")
    rule_set = store.get(args.rule)
    if rule_set is None:
        print(f"unknown rule {args.rule!r}", file=sys.stderr)
        return EXIT_DATA
    from .leakage import series_from_alarms

    series = series_from_alarms(rule_set, config)
    if series.count < 2:
        print(f"rule {args.rule} has {series.count} usable alarms", file=sys.stderr)
        return EXIT_DATA
    result = fit(series.entropies(), args.k, seed=args.seed)
    doc = json.loads(result.model.to_json())
    doc["leakage"] = result.leakage.as_dict()
    doc["rule_id"] = args.rule
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_simulate(args) -> int:
    summary = run_scenario(args.scenario, args.profile, args.out, seed=args.seed)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_whatif(args) -> int:
    remove = [s for chunk in args.remove for s in chunk.split(",") if s]
    zero = [s for chunk in args.anonymize for s in chunk.split(",") if s]
    if args.table1:
        entries = table1_entries()
    else:
        if args.store is None:
            raise UsageError("whatif needs --table1 or --store")
        store = AlarmStore.load(args.store)
        report = build_report(store, _config_from_args(args))
        entries = report.entries()
        if not entries:
            print("no rule has >= 2 measurable alarms", file=sys.stderr)
            return EXIT_DATA
    try:
        old, new = whatif(entries, remove=remove, zero=zero)
    except KeyError as exc:
        print(f"unknown rule: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"sigma_all before: {old:.4f}")
    print(f"sigma_all after:  {new:.4f}")
    print(f"reduction:        {old - new:.4f}")
    return EXIT_OK


def cmd_table1(args) -> int:
    rows = load_table1_fixture()
    header = f"{'SID':<12} {'Alarms':>9} {'Clusters':>8} {'sigma_1':>8} {'sigma_1L':>8}  Description"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(
            f"{r.rule_id:<12} {r.alarms:>9} {r.clusters:>8} "
            f"{r.sigma_normal:>8.2f} {r.sigma_laplace:>8.2f}  {r.description}"
        )
    entries = table1_entries()
    total = sum(n for _, n, _ in entries)
    agg = sum(n * s for _, n, s in entries) / total
    print("-" * len(header))
    print(f"{'sigma_all':<12} {agg:>27.4f}")
    return EXIT_OK


def build_parser() -> Parser:
    parser = Parser(prog="privleak", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse alarm files into a store")
    p.add_argument("files", nargs="+")
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="per-rule leakage report")
    p.add_argument("--store", required=True)
    _add_metric_flags(p)
    p.add_argument("--impact", default=None, help="rule_id = impact map file")
    p.add_argument("--config", default=None, help="key = value tool config")
    p.add_argument("--jobs", type=int, default=None, help="parallel per-rule workers")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cluster", help="fit attack-vector clusters for one rule")
    p.add_argument("--store", required=True)
    p.add_argument("--rule", default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--serve", type=int, default=None, nargs="?", const=0, metavar="PORT")
    p.add_argument("--config", default=None, help="key = value tool config (port, impact.*)")
    _add_metric_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("simulate", help="Monte-Carlo calibration scenarios")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), required=True)
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("whatif", help="ruleset removal/anonymisation arithmetic")
    p.add_argument("--table1", action="store_true", help="use the bundled reference table")
    p.add_argument("--store", default=None)
    p.add_argument("--remove", action="append", default=[], metavar="SIDS")
    p.add_argument("--anonymize", action="append", default=[], metavar="SIDS")
    _add_metric_flags(p)
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("table1", help="print the bundled reference table")
    p.set_defaults(func=cmd_table1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileFormatError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
