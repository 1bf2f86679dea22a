"""The ``xmaint`` command line: analyze, compare, snapshot, trend, rules, profiles.

Exit codes: 0 clean success, 2 success with diagnostics, 1 fatal error,
fixed so CI pipelines can gate on them.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, report as report_mod
from .analysis import analyze_project, intersect_and_reevaluate
from .composite import composite_score, sensitivity_analysis
from .config import (
    apply_flag_overrides,
    composite_mappings,
    config_hash,
    load_config,
)
from .errors import XmaintError
from .profiles import build_registry
from .rules import load_rule_set
from .snapshots import SnapshotStore, utc_now_iso


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xmaint",
        description="Measure and compare source-code maintainability across languages.",
    )
    parser.add_argument("--version", action="version", version=f"xmaint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def analysis_flags(p):
        p.add_argument("--profile", default=None, help="force a language profile for all files")
        p.add_argument("--config", default=None, help="config file (or XMAINT_CONFIG env var)")
        p.add_argument("--format", default=None, choices=["json", "md", "csv"])
        p.add_argument("--min-tokens", type=int, default=None, help="clone detection threshold")
        p.add_argument("--dup-mode", default=None, choices=["exact", "identifier-blind"])
        p.add_argument("--cost-per-line", type=float, default=None,
                       help="production effort estimate, minutes per LOC")
        p.add_argument("--coverage", type=float, default=None,
                       help="externally measured test coverage in [0,1]")
        p.add_argument("--include", action="append", default=[], metavar="GLOB")
        p.add_argument("--exclude", action="append", default=[], metavar="GLOB")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")

    p_analyze = sub.add_parser("analyze", help="analyze one project")
    p_analyze.add_argument("path")
    p_analyze.add_argument("--project-id", default=None)
    analysis_flags(p_analyze)
    p_analyze.set_defaults(func=cmd_analyze)

    p_compare = sub.add_parser("compare", help="rank two or more projects")
    p_compare.add_argument("paths", nargs="+")
    p_compare.add_argument("--sensitivity", action="store_true",
                           help="add weight-sensitivity analysis to the report")
    analysis_flags(p_compare)
    p_compare.set_defaults(func=cmd_compare)

    p_snapshot = sub.add_parser("snapshot", help="persist or list analysis snapshots")
    snap_sub = p_snapshot.add_subparsers(dest="snapshot_command", required=True)
    p_save = snap_sub.add_parser("save", help="analyze and append a snapshot")
    p_save.add_argument("path")
    p_save.add_argument("--store", required=True)
    p_save.add_argument("--label", default="")
    p_save.add_argument("--project-id", default=None)
    analysis_flags(p_save)
    p_save.set_defaults(func=cmd_snapshot_save)
    p_list = snap_sub.add_parser("list", help="list stored snapshots")
    p_list.add_argument("--store", required=True)
    p_list.add_argument("--project-id", default=None)
    p_list.set_defaults(func=cmd_snapshot_list)

    p_trend = sub.add_parser("trend", help="time series of one snapshot metric")
    p_trend.add_argument("project_id")
    p_trend.add_argument("--store", required=True)
    p_trend.add_argument("--metric", required=True)
    p_trend.add_argument("--force", action="store_true",
                         help="treat snapshots with differing config hashes as comparable")
    p_trend.add_argument("--format", default="json", choices=["json", "md", "csv"])
    p_trend.add_argument("--out", default=None)
    p_trend.set_defaults(func=cmd_trend)

    p_rules = sub.add_parser("rules", help="rule inspection")
    rules_sub = p_rules.add_subparsers(dest="rules_command", required=True)
    p_rules_list = rules_sub.add_parser("list", help="effective rules per profile")
    p_rules_list.add_argument("--profile", default=None)
    p_rules_list.add_argument("--config", default=None)
    p_rules_list.set_defaults(func=cmd_rules_list)

    p_profiles = sub.add_parser("profiles", help="profile inspection")
    profiles_sub = p_profiles.add_subparsers(dest="profiles_command", required=True)
    p_profiles_list = profiles_sub.add_parser("list", help="registered language profiles")
    p_profiles_list.add_argument("--config", default=None)
    p_profiles_list.set_defaults(func=cmd_profiles_list)

    return parser


def _prepare(args):
    config = load_config(args.config)
    config = apply_flag_overrides(
        config,
        min_tokens=args.min_tokens,
        dup_mode=args.dup_mode,
        cost_per_line=args.cost_per_line,
        coverage=args.coverage,
    )
    registry = build_registry(
        extra_profiles=config["profiles"]["definitions"],
        profile_files=config["profiles"]["files"],
    )
    discovery = {
        "forced_profile": args.profile,
        "includes": sorted(args.include),
        "excludes": sorted(args.exclude),
    }
    digest = config_hash(config, [p.as_dict() for p in registry.profiles()], discovery)
    return config, registry, discovery, digest


def _flags_block(args, extra=None) -> dict:
    # workers is deliberately not echoed: it cannot change any measured value
    # (parallel runs must be byte-identical), so it is execution detail, not
    # configuration state.
    flags = {
        "profile": args.profile,
        "config": args.config,
        "format": getattr(args, "format", None),
        "min_tokens": args.min_tokens,
        "dup_mode": args.dup_mode,
        "cost_per_line": args.cost_per_line,
        "coverage": args.coverage,
        "include": sorted(args.include),
        "exclude": sorted(args.exclude),
        "out": args.out,
    }
    flags.update(extra or {})
    return flags


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fmt(args, config) -> str:
    return args.format or config["report"]["format"]


def cmd_analyze(args) -> int:
    config, registry, discovery, digest = _prepare(args)
    analysis = analyze_project(
        args.path, config, registry,
        project_id=args.project_id,
        forced_profile=args.profile,
        includes=tuple(args.include),
        excludes=tuple(args.exclude),
        workers=args.workers,
    )
    mappings = composite_mappings(config)
    scores = composite_score(
        [analysis.indicators(config["composite"]["duplication_source"])], mappings
    )
    report = report_mod.build_report(
        [analysis],
        tool_version=__version__,
        generated_at=utc_now_iso(),
        effective_config={"config": config, "flags": _flags_block(args, {"path": args.path, "project_id": args.project_id})},
        config_hash=digest,
        composite=scores,
    )
    _emit(report_mod.render(report, _fmt(args, config)), args.out)
    return 2 if report["diagnostics"] else 0


def cmd_compare(args) -> int:
    if len(args.paths) < 2:
        raise XmaintError("compare needs at least two project paths")
    config, registry, discovery, digest = _prepare(args)

    ids = [Path(p).name for p in args.paths]
    if len(set(ids)) != len(ids):
        ids = [str(Path(p)) for p in args.paths]  # disambiguate same-named roots

    analyses = [
        analyze_project(
            path, config, registry,
            project_id=pid,
            forced_profile=args.profile,
            includes=tuple(args.include),
            excludes=tuple(args.exclude),
            workers=args.workers,
        )
        for path, pid in zip(args.paths, ids)
    ]
    analyses, shared_rules, warning = intersect_and_reevaluate(analyses)

    mappings = composite_mappings(config)
    dup_source = config["composite"]["duplication_source"]
    indicators = [pa.indicators(dup_source) for pa in analyses]
    scores = composite_score(indicators, mappings)
    sensitivity = None
    if args.sensitivity:
        sensitivity = sensitivity_analysis(
            indicators, mappings, float(config["composite"]["sensitivity"]["delta_pp"])
        )

    report = report_mod.build_report(
        analyses,
        tool_version=__version__,
        generated_at=utc_now_iso(),
        effective_config={"config": config, "flags": _flags_block(
            args, {"paths": list(args.paths), "sensitivity": args.sensitivity})},
        config_hash=digest,
        composite=scores,
        sensitivity=sensitivity,
        shared_rules=shared_rules,
        extra_diagnostics=[warning] if warning else [],
    )
    _emit(report_mod.render(report, _fmt(args, config)), args.out)
    return 2 if report["diagnostics"] else 0


def cmd_snapshot_save(args) -> int:
    config, registry, discovery, digest = _prepare(args)
    analysis = analyze_project(
        args.path, config, registry,
        project_id=args.project_id,
        forced_profile=args.profile,
        includes=tuple(args.include),
        excludes=tuple(args.exclude),
        workers=args.workers,
    )
    mappings = composite_mappings(config)
    scores = composite_score(
        [analysis.indicators(config["composite"]["duplication_source"])], mappings
    )
    snapshot = {
        "project_id": analysis.project_id,
        "label": args.label,
        "timestamp_utc": utc_now_iso(),
        "tool_version": __version__,
        "config_hash": digest,
        "metrics_summary": report_mod.metrics_summary(analysis, scores[0].total if scores else None),
    }
    store = SnapshotStore(args.store)
    snapshot_id = store.save(snapshot)
    sys.stdout.write(snapshot_id + "\n")
    return 2 if analysis.diagnostics else 0


def cmd_snapshot_list(args) -> int:
    store = SnapshotStore(args.store)
    records = store.list_snapshots(args.project_id)
    for record in records:
        sys.stdout.write(
            f"{record['project_id']}\t{record['snapshot_id']}\t{record['timestamp_utc']}"
            f"\t{record.get('label', '')}\t{record['config_hash'][:12]}\n"
        )
    return 0


def cmd_trend(args) -> int:
    store = SnapshotStore(args.store)
    points = store.trend(args.project_id, args.metric, force=args.force)
    payload = {
        "project_id": args.project_id,
        "metric": args.metric,
        "series": [
            {
                "timestamp_utc": p.timestamp_utc,
                "value": p.value,
                "comparable": p.comparable,
                "snapshot_id": p.snapshot_id,
            }
            for p in points
        ],
    }
    if args.format == "json":
        import json
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    elif args.format == "md":
        lines = [f"# Trend: {args.metric} for {args.project_id}", ""]
        lines.append("| timestamp | value | comparable |")
        lines.append("| --- | --- | --- |")
        for p in points:
            lines.append(f"| {p.timestamp_utc} | {p.value} | {p.comparable} |")
        text = "\n".join(lines) + "\n"
    else:
        import csv as _csv
        import io
        buffer = io.StringIO()
        writer = _csv.writer(buffer, lineterminator="\n")
        writer.writerow(["timestamp_utc", "value", "comparable", "snapshot_id"])
        for p in points:
            writer.writerow([p.timestamp_utc, p.value, p.comparable, p.snapshot_id])
        text = buffer.getvalue()
    _emit(text, args.out)
    return 0


def cmd_rules_list(args) -> int:
    config = load_config(args.config)
    registry = build_registry(
        extra_profiles=config["profiles"]["definitions"],
        profile_files=config["profiles"]["files"],
    )
    profiles = [registry.get(args.profile)] if args.profile else registry.profiles()
    for profile in profiles:
        rule_set = load_rule_set(config["rules"], profile)
        sys.stdout.write(f"{profile.id}:\n")
        for rule in rule_set.rules:
            state = "on " if rule.enabled else "off"
            param = rule.pattern if rule.pattern is not None else rule.threshold
            sys.stdout.write(
                f"  [{state}] {rule.canonical_id:<22} param={param!r:<28} "
                f"effort={rule.effort_minutes:g}min\n"
            )
    return 0


def cmd_profiles_list(args) -> int:
    config = load_config(args.config)
    registry = build_registry(
        extra_profiles=config["profiles"]["definitions"],
        profile_files=config["profiles"]["files"],
    )
    for profile in registry.profiles():
        exts = " ".join(profile.file_extensions)
        sys.stdout.write(
            f"{profile.id:<12} {profile.unit_detection:<13} verbosity={profile.verbosity_factor:g} "
            f"extensions: {exts}\n"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except XmaintError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
