"""End-to-end project analysis: discovery, lexing, metrics, clones, rules, models.

Per-file work is pure, so it can fan out across workers; every merge is an
order-independent fold followed by a deterministic sort, which keeps the
1-worker and K-worker reports identical.
"""

from __future__ import annotations

import fnmatch
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import debt_models, duplication, metrics, rules
from .composite import ProjectIndicators
from .debt_models import MiResult, SigResult, TdrResult
from .errors import Diagnostic, EmptyProject, ZeroProductionEffort
from .lexing import LineClassification, Token, classify_lines, physical_line_count, tokenize
from .metrics import ProjectMetrics, UnitMetrics
from .profiles import LanguageProfile, ProfileRegistry, detect_profile
from .rules import RuleSet, Violation
from .units import Unit, extract_units

DEFAULT_EXCLUDES = (
    ".git", ".hg", ".svn", "__pycache__", "node_modules", "build", "dist",
    "target", ".venv", "venv", ".idea", ".vscode", ".tox", ".eggs",
)


@dataclass(frozen=True)
class FileAnalysis:
    path: str  # POSIX-style path relative to the project root
    profile_id: str
    tokens: tuple[Token, ...]
    lines: LineClassification
    units: tuple[Unit, ...]
    unit_metrics: tuple[UnitMetrics, ...]
    diagnostics: tuple[Diagnostic, ...]


@dataclass(frozen=True)
class ProjectAnalysis:
    project_id: str
    root: str
    files: tuple[FileAnalysis, ...]
    metrics: ProjectMetrics
    duplication: duplication.DuplicationReport
    rule_sets: dict[str, RuleSet]
    shared_rule_ids: tuple[str, ...]
    violations: tuple[Violation, ...]
    mi: MiResult | None
    tdr: TdrResult | None
    sig: SigResult
    cost_per_line: float
    coverage: float | None
    diagnostics: tuple[Diagnostic, ...]

    def indicators(self, dup_source: str = "token") -> ProjectIndicators:
        if dup_source == "line":
            dup_ratio = self.duplication.duplicated_line_ratio
        else:
            dup_ratio = self.duplication.duplicated_token_ratio
        return ProjectIndicators(
            project_id=self.project_id,
            comment_ratio=self.metrics.comment_ratio,
            duplication_ratio=dup_ratio,
            tdr=self.tdr.tdr if self.tdr else None,
            total_loc=self.metrics.total_loc,
            cost_per_line=self.cost_per_line,
            rule_ids=self.shared_rule_ids,
        )


def discover_files(
    root: Path,
    registry: ProfileRegistry,
    forced_profile: str | None = None,
    includes: tuple[str, ...] = (),
    excludes: tuple[str, ...] = (),
) -> list[tuple[Path, str, LanguageProfile]]:
    """Recursive walk (symlinks not followed) yielding (abs, rel, profile).

    Files are kept when their extension belongs to a registered profile,
    or, under a forced profile, to that profile; explicit include globs
    widen the forced net to any matching file.
    """
    if not root.exists():
        raise EmptyProject(f"path does not exist: {root}")
    if root.is_file():
        candidates = [root]
        base = root.parent
    else:
        base = root
        candidates = []
        stack = [root]
        while stack:
            directory = stack.pop()
            try:
                entries = sorted(directory.iterdir())
            except OSError:
                continue
            for entry in entries:
                if entry.is_symlink():
                    continue
                if entry.is_dir():
                    if entry.name in DEFAULT_EXCLUDES:
                        continue
                    stack.append(entry)
                elif entry.is_file():
                    candidates.append(entry)

    exclude_patterns = tuple(excludes)
    include_patterns = tuple(includes)
    selected = []
    for path in sorted(candidates):
        rel = path.relative_to(base).as_posix()
        if any(fnmatch.fnmatch(rel, pat) or fnmatch.fnmatch(path.name, pat) for pat in exclude_patterns):
            continue
        if include_patterns and not any(
            fnmatch.fnmatch(rel, pat) or fnmatch.fnmatch(path.name, pat) for pat in include_patterns
        ):
            continue
        if forced_profile is not None:
            profile = registry.get(forced_profile)
            if not include_patterns and path.suffix.lower() not in profile.file_extensions:
                continue
        else:
            try:
                profile = detect_profile(path, registry)
            except Exception:
                continue  # unrecognized extensions are simply not analyzed
        selected.append((path, rel, profile))
    return selected


def analyze_file(abs_path: Path, rel: str, profile: LanguageProfile) -> FileAnalysis:
    diagnostics: list[Diagnostic] = []
    try:
        raw = abs_path.read_bytes()
    except OSError as exc:
        return FileAnalysis(
            path=rel, profile_id=profile.id, tokens=(), lines=classify_lines([], 0),
            units=(), unit_metrics=(),
            diagnostics=(Diagnostic("unreadable-file", str(exc), file=rel),),
        )
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        return FileAnalysis(
            path=rel, profile_id=profile.id, tokens=(), lines=classify_lines([], 0),
            units=(), unit_metrics=(),
            diagnostics=(Diagnostic("not-utf8", f"not valid UTF-8: {exc}", file=rel),),
        )

    tokens, lex_diags = tokenize(text, profile, file=rel)
    diagnostics.extend(lex_diags)
    lines = classify_lines(tokens, physical_line_count(text))
    units, unit_diags = extract_units(tokens, profile, file=rel)
    diagnostics.extend(unit_diags)
    unit_metrics_list = tuple(
        metrics.unit_metrics(unit, tokens, lines, profile, units) for unit in units
    )
    return FileAnalysis(
        path=rel,
        profile_id=profile.id,
        tokens=tuple(tokens),
        lines=lines,
        units=tuple(units),
        unit_metrics=unit_metrics_list,
        diagnostics=tuple(diagnostics),
    )


def _file_level_means(files: list[FileAnalysis], registry: ProfileRegistry):
    """aHV/aCC/aLOC with module = file instead of unit (config variant)."""
    volumes, ccs, locs = [], [], []
    for fa in files:
        profile = registry.get(fa.profile_id)
        toks = [t for t in fa.tokens]
        volumes.append(metrics.halstead(toks, profile).volume)
        ccs.append(metrics.cyclomatic_complexity(toks, profile))
        locs.append(fa.lines.code + fa.lines.mixed)
    count = len(files)
    if count == 0:
        return None, None, None
    return sum(volumes) / count, sum(ccs) / count, sum(locs) / count


def _evaluate_sig(
    project_metrics: ProjectMetrics,
    unit_metric_list: list[UnitMetrics],
    dup_token_ratio: float,
    coverage: float | None,
    sig_cfg: dict,
    registry: ProfileRegistry,
) -> SigResult:
    cc_bands = tuple(sig_cfg["cc_bands"])
    size_bands = tuple(sig_cfg["unit_size_bands"])
    caps = {int(k): tuple(v) for k, v in sig_cfg["profile_caps"].items()}
    matrix = {k: tuple(v) for k, v in sig_cfg["matrix"].items()}

    ratings: dict[str, int | None] = {}
    ratings["volume"] = debt_models.sig_rate_scalar(
        project_metrics.total_loc, [tuple(x) for x in sig_cfg["volume_ladder"]]
    )
    ratings["duplication"] = debt_models.sig_rate_scalar(
        dup_token_ratio, [tuple(x) for x in sig_cfg["duplication_ladder"]]
    )
    if unit_metric_list:
        cc_profile = debt_models.sig_risk_profile(
            [(m.cc, m.loc) for m in unit_metric_list], cc_bands
        )
        ratings["complexity"] = debt_models.sig_rate_risk_profile(cc_profile, caps)
        # unit size is compared verbosity-normalized so 'long' is language-fair
        size_profile = debt_models.sig_risk_profile(
            [
                (m.loc / registry.get(m.unit.profile_id).verbosity_factor, m.loc)
                for m in unit_metric_list
            ],
            size_bands,
        )
        ratings["unitSize"] = debt_models.sig_rate_risk_profile(size_profile, caps)
    else:
        ratings["complexity"] = None
        ratings["unitSize"] = None
    if coverage is not None:
        ratings["unitTesting"] = debt_models.sig_rate_scalar(
            coverage, [tuple(x) for x in sig_cfg["coverage_ladder"]], ascending=True
        )
    else:
        ratings["unitTesting"] = None
    return debt_models.sig_characteristics(ratings, matrix)


def _project_coverage(sig_cfg: dict, project_id: str) -> float | None:
    coverage = sig_cfg.get("coverage")
    if isinstance(coverage, dict):
        value = coverage.get(project_id)
        return float(value) if value is not None else None
    return float(coverage) if coverage is not None else None


def evaluate_debt(
    files: list[FileAnalysis],
    rule_sets: dict[str, RuleSet],
    clone_blocks,
    cost_per_line: float,
    total_loc: int,
) -> tuple[tuple[Violation, ...], TdrResult | None, list[Diagnostic]]:
    """Rule evaluation plus the debt ratio; reusable after intersection."""
    all_unit_metrics = [m for fa in files for m in fa.unit_metrics]
    diagnostics: list[Diagnostic] = []
    violations: list[Violation] = []
    for profile_id in sorted(rule_sets):
        rs = rule_sets[profile_id]
        ratios = {
            fa.path: metrics.comment_ratio(fa.lines)
            for fa in files
            if fa.profile_id == profile_id
        }
        profile_files = {fa.path for fa in files if fa.profile_id == profile_id}
        blocks = [b for b in clone_blocks if b.file_a in profile_files]
        violations.extend(rules.check_rules(all_unit_metrics, rs, ratios, blocks))
    violations.sort(key=lambda v: (v.file, v.line, v.rule_id))

    tdr: TdrResult | None
    try:
        production = debt_models.production_effort(total_loc, cost_per_line)
        tdr = debt_models.technical_debt_ratio(violations, production)
    except (ZeroProductionEffort, ValueError):
        tdr = None
        diagnostics.append(Diagnostic(
            "zero-production-effort",
            "project has no code lines; debt ratio undefined",
        ))
    return tuple(violations), tdr, diagnostics


def analyze_project(
    root: str | Path,
    config: dict,
    registry: ProfileRegistry,
    project_id: str | None = None,
    forced_profile: str | None = None,
    includes: tuple[str, ...] = (),
    excludes: tuple[str, ...] = (),
    workers: int = 1,
    rule_sets_override: dict[str, RuleSet] | None = None,
) -> ProjectAnalysis:
    """Full pipeline for one code base."""
    root = Path(root)
    project_id = project_id or root.name
    found = discover_files(root, registry, forced_profile, includes, excludes)
    if not found:
        raise EmptyProject(f"no analyzable files under {root}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            files = list(pool.map(lambda item: analyze_file(*item), found))
    else:
        files = [analyze_file(*item) for item in found]
    files.sort(key=lambda fa: fa.path)

    diagnostics = [d for fa in files for d in fa.diagnostics]

    all_unit_metrics = [m for fa in files for m in fa.unit_metrics]
    project_metrics = metrics.aggregate_project(
        [fa.lines for fa in files],
        all_unit_metrics,
        weighted=bool(config["metrics"]["weighted_unit_means"]),
    )

    dup_cfg = config["duplication"]
    sequences = {
        fa.path: duplication.normalize_tokens(
            list(fa.tokens),
            mode=dup_cfg["mode"],
            case_sensitive=registry.get(fa.profile_id).case_sensitive,
        )
        for fa in files
    }
    dup_report = duplication.build_report(
        sequences,
        int(dup_cfg["min_tokens"]),
        dup_cfg["mode"],
        {fa.path: fa.lines for fa in files},
    )

    profile_ids = sorted({fa.profile_id for fa in files})
    if rule_sets_override is not None:
        rule_sets = {pid: rule_sets_override[pid] for pid in profile_ids}
    else:
        rule_sets = {
            pid: rules.load_rule_set(config["rules"], registry.get(pid)) for pid in profile_ids
        }
    shared_rule_ids = tuple(sorted(
        frozenset.intersection(*(rs.enabled_ids() for rs in rule_sets.values()))
    )) if rule_sets else ()

    cost_per_line = float(config["models"]["sqale"]["cost_per_line_minutes"])
    violations, tdr, debt_diags = evaluate_debt(
        files, rule_sets, dup_report.blocks, cost_per_line, project_metrics.total_loc
    )
    diagnostics.extend(debt_diags)

    mi_result: MiResult | None = None
    if config["models"]["mi"]["scope"] == "file":
        ahv, acc, aloc = _file_level_means(files, registry)
    else:
        ahv, acc, aloc = project_metrics.ahv, project_metrics.acc, project_metrics.aloc
    if ahv is not None:
        mi_result = debt_models.maintainability_index(ahv, acc, aloc)

    coverage = _project_coverage(config["models"]["sig"], project_id)
    sig_result = _evaluate_sig(
        project_metrics,
        all_unit_metrics,
        dup_report.duplicated_token_ratio,
        coverage,
        config["models"]["sig"],
        registry,
    )

    return ProjectAnalysis(
        project_id=project_id,
        root=str(root),
        files=tuple(files),
        metrics=project_metrics,
        duplication=dup_report,
        rule_sets=rule_sets,
        shared_rule_ids=shared_rule_ids,
        violations=violations,
        mi=mi_result,
        tdr=tdr,
        sig=sig_result,
        cost_per_line=cost_per_line,
        coverage=coverage,
        diagnostics=tuple(diagnostics),
    )


def intersect_and_reevaluate(
    analyses: list[ProjectAnalysis],
) -> tuple[list[ProjectAnalysis], list[str], Diagnostic | None]:
    """Cross-project comparability: restrict every project's rules to the
    canonical ids enabled for every profile of every compared project, then
    recompute violations and debt ratios against that common core."""
    all_rule_sets = [rs for pa in analyses for rs in pa.rule_sets.values()]
    if len(all_rule_sets) < 2:
        shared = sorted(all_rule_sets[0].enabled_ids()) if all_rule_sets else []
        return list(analyses), shared, None
    filtered, shared = rules.intersect_rule_sets(all_rule_sets)
    by_profile: dict[str, RuleSet] = {}
    for rs in filtered:
        by_profile[rs.profile_id] = rs  # same config per profile: duplicates identical
    warning = None
    if not shared:
        warning = Diagnostic(
            "empty-intersection",
            "no coding rule is enabled for every compared language; debt ratios compare only rule-free attributes",
        )
    updated = []
    for pa in analyses:
        project_rule_sets = {pid: by_profile[pid] for pid in pa.rule_sets}
        violations, tdr, debt_diags = evaluate_debt(
            list(pa.files), project_rule_sets, pa.duplication.blocks,
            pa.cost_per_line, pa.metrics.total_loc,
        )
        base_diags = tuple(d for d in pa.diagnostics if d.code != "zero-production-effort")
        updated.append(replace(
            pa,
            rule_sets=project_rule_sets,
            shared_rule_ids=tuple(shared),
            violations=violations,
            tdr=tdr,
            diagnostics=base_diags + tuple(debt_diags),
        ))
    return updated, shared, warning
