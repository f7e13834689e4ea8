"""Command-line interface.

Exit codes: 0 success, 2 fatal input error, 3 unresolvable entity id,
4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

from cement import history as hist
from cement.applications import (
    FaultCase,
    Localization,
    MaturityLevel,
    default_budget,
    localize,
    maturity_filter,
    predict_links,
    confident_thresholds,
    score_tests,
    select_tests,
)
from cement.config import RunConfig, load_config
from cement.coupling import NOT_APPLICABLE, rank_candidates
from cement.errors import (
    ConfigError,
    FatalError,
    FaultNotApplicable,
    InputError,
    UnresolvedEntityError,
)
from cement.evaluation import (
    LinkOracle,
    fmt,
    link_prf,
    localization_metrics,
    mutation_scores,
    read_kill_matrix,
    read_pairs,
)
from cement.extraction.ingest import IngestStats, ingest_changelog, ingest_repository, read_changelog
from cement.history import ChangeHistory, EntityId, EntityKind

EXIT_OK, EXIT_INPUT, EXIT_UNRESOLVED, EXIT_CONFIG = 0, 2, 3, 4
STORE_ENV = "CEMENT_STORE"

log = logging.getLogger("cement")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(message)


def _emit(obj: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def _exact(value) -> str | None:
    if value is NOT_APPLICABLE or value is None:
        return None
    return str(value)


def _table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    rows = [["" if v is None else str(v) for v in row] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(headers)]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
    print("  ".join("-" * w for w in widths))
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())


# Entity id resolution

def resolve_id(history: ChangeHistory, text: str, kind: EntityKind | None = None) -> EntityId:
    """Resolve ``path::qualified_name`` (or a unique bare qualified name)."""
    text = text.strip()
    if "::" in text:
        path, qname = text.split("::", 1)
        eid = history.find(path, qname)
        if eid is not None and (kind is None or eid.kind is kind):
            return eid
        raise UnresolvedEntityError(f"unknown entity {text!r}")
    hits = [e for e in history.revisions if e.qualified_name == text and (kind is None or e.kind is kind)]
    if len(hits) == 1:
        return hits[0]
    if not hits:
        raise UnresolvedEntityError(f"unknown entity {text!r}")
    raise UnresolvedEntityError(f"ambiguous entity {text!r} ({len(hits)} matches)")


def _resolve_or_placeholder(history: ChangeHistory, text: str, kind: EntityKind):
    """Resolve, or build a historyless id when a full ``path::name`` is given."""
    try:
        return resolve_id(history, text, kind), None
    except UnresolvedEntityError:
        if "::" not in text:
            return None, text
        path, qname = text.strip().split("::", 1)
        return EntityId(kind, path, qname), text


def _read_id_lines(path: str) -> list[str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]


def _jsonl(path: str) -> list[dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise InputError(f"{path}:{lineno}: {e.msg}") from None
    return out


def _store_path(args) -> str:
    store = args.store or os.environ.get(STORE_ENV)
    if not store:
        raise ConfigError(f"no store given (use --store or ${STORE_ENV})")
    return store


def _load_store(args) -> ChangeHistory:
    path = _store_path(args)
    try:
        return hist.load(path)
    except OSError as e:
        raise InputError(f"cannot read store {path}: {e.strerror}") from None


def _provenance(cfg: RunConfig, history: ChangeHistory, **extra) -> dict[str, Any]:
    return {"provenance": {"params": cfg.provenance(), "history_digest": history.digest(), **extra}}


# Commands

def cmd_extract(args, cfg: RunConfig) -> int:
    out = _store_path(args)
    if args.changelog:
        try:
            with open(args.changelog, encoding="utf-8") as fp:
                records = read_changelog(fp)
        except OSError as e:
            raise InputError(f"cannot read change log: {e.strerror}") from None
        repo_id = args.repo_id if args.repo_id is not None else Path(args.changelog).stem
        history = ingest_changelog(records, repo_id=repo_id)
    else:
        if not args.repo:
            raise ConfigError("extract needs a repository path or --changelog")
        base = None
        if args.resume and Path(out).exists():
            base = hist.load(out)
        stats = IngestStats()
        history = ingest_repository(
            args.repo,
            args.head,
            cfg.classifier,
            extensions=cfg.extensions,
            base=base,
            repo_id=args.repo_id,
            jobs=args.jobs,
            stats=stats,
        )
        log.info(
            "processed %d commits, %d files parsed, %d skipped, %d extraction warnings",
            stats.commits, stats.files_parsed, stats.files_skipped, stats.extraction_warnings,
        )
    hist.save(history, out)
    summary = {
        "store": out,
        "commits": history.num_commits,
        "methods": len(history.methods),
        "tests": len(history.tests),
        "digest": history.digest(),
    }
    if args.human:
        _table(["field", "value"], summary.items())
    else:
        _emit(summary)
    return EXIT_OK


def cmd_rank(args, cfg: RunConfig) -> int:
    history = _load_store(args)
    if args.direction == "methods-for-test":
        target = resolve_id(history, args.target, EntityKind.TEST)
        candidates = history.methods
    else:
        target = resolve_id(history, args.target, EntityKind.METHOD)
        candidates = history.tests
    if cfg.maturity is not MaturityLevel.ALL:
        keep = maturity_filter(history, cfg.maturity, pooled=cfg.pooled_mean)
        candidates = [c for c in candidates if c in keep]
    ranked = rank_candidates(target, candidates, history, cfg.n, cfg.aggregator)
    entries = ranked.entries[: args.top] if args.top else ranked.entries
    if args.human:
        _table(
            ["rank", "candidate", "distance", "forward"],
            [(e.rank, e.candidate.display, fmt(e.distance), fmt(e.forward)) for e in entries],
        )
        return EXIT_OK
    for e in entries:
        _emit(
            {
                "rank": e.rank,
                "candidate": e.candidate.display,
                "distance": _exact(e.distance),
                "distance_4dp": fmt(e.distance),
                "forward": _exact(e.forward),
            }
        )
    _emit(_provenance(cfg, history, target=target.display, direction=args.direction))
    return EXIT_OK


def _fault_from_record(history: ChangeHistory, rec: dict) -> tuple[FaultCase | None, str | None]:
    fid = str(rec.get("fault_id", ""))
    if not fid or "failing_tests" not in rec:
        raise InputError(f"fault record needs fault_id and failing_tests: {rec}")
    unresolved = []
    tests, methods = set(), set()
    for t in rec["failing_tests"]:
        eid, bad = _resolve_or_placeholder(history, t, EntityKind.TEST)
        if bad:
            unresolved.append(bad)
        if eid is not None:
            tests.add(eid)
    for m in rec.get("faulty_methods", []):
        eid, bad = _resolve_or_placeholder(history, m, EntityKind.METHOD)
        if bad:
            unresolved.append(bad)
        if eid is not None:
            methods.add(eid)
    cutoff = None
    raw_cut = rec.get("cutoff")
    if raw_cut is not None:
        try:
            idx = raw_cut if isinstance(raw_cut, int) else history.commit_index(str(raw_cut))
            cutoff = history.commits[idx]
        except (InputError, IndexError):
            return None, f"cutoff commit {raw_cut!r} not in history"
    return FaultCase(fid, frozenset(tests), frozenset(methods), cutoff, tuple(unresolved)), None


def _localize_all(history: ChangeHistory, faults: list[dict], cfg: RunConfig, top: int | None):
    records = []
    for rec in faults:
        fault, problem = _fault_from_record(history, rec)
        if fault is None:
            records.append({"fault_id": rec["fault_id"], "status": "excluded", "reason": problem})
            continue
        try:
            res: Localization = localize(
                fault,
                history,
                cfg.maturity,
                cfg.n,
                cfg.aggregator,
                filter_scope=cfg.filter_scope,
                pooled_mean=cfg.pooled_mean,
            )
        except FaultNotApplicable as e:
            out = {"fault_id": fault.fault_id, "status": "excluded", "reason": e.reason}
            if fault.cutoff is not None:
                out["num_methods"] = len(history.truncated(fault.cutoff.index).methods)
            else:
                out["num_methods"] = len(history.methods)
            records.append(out)
            continue
        out = {
            "fault_id": fault.fault_id,
            "status": "ranked" if res.fault_rank is not None else "predicted",
            "rank": res.fault_rank,
            "wef": res.wef,
            "num_candidates": res.num_candidates,
            "num_methods": res.num_methods,
            "tests_used": [t.display for t in res.tests_used],
            "cutoff": fault.cutoff.hash if fault.cutoff else None,
        }
        if fault.unresolved:
            out["unresolved"] = list(fault.unresolved)
        if top:
            out["top"] = [{"method": m.display, "rank": r} for m, r in res.ranking[:top]]
        records.append(out)
    return records


def summarize_localization(records: list[dict], exclusions_as_misses: bool = False) -> dict[str, Any]:
    """Metrics block for per-fault records produced by ``localize``."""
    ranked = [r for r in records if r.get("status") == "ranked"]
    excluded = [r for r in records if r.get("status") == "excluded"]
    ranks = [r["rank"] for r in ranked]
    if exclusions_as_misses:
        ranks += [max(1, r.get("num_methods", 1)) for r in excluded]
    block: dict[str, Any] = {
        "metrics": localization_metrics(ranks),
        "excluded": len(excluded) if not exclusions_as_misses else 0,
        "excluded_ids": sorted(r["fault_id"] for r in excluded) if not exclusions_as_misses else [],
    }
    # Faults sitting at the very last candidate rank, re-scored against all methods.
    alt = [
        r["num_methods"] if r["rank"] == r.get("num_candidates") else r["rank"]
        for r in ranked
    ]
    if exclusions_as_misses:
        alt += [max(1, r.get("num_methods", 1)) for r in excluded]
    block["metrics_last_rank_as_all_methods"] = localization_metrics(alt)
    return block


def cmd_localize(args, cfg: RunConfig) -> int:
    history = _load_store(args)
    faults = _jsonl(args.faults)
    records = _localize_all(history, faults, cfg, args.top)
    block = summarize_localization(records, args.exclusions_as_misses)
    if args.human:
        _table(
            ["fault", "status", "rank", "wef", "candidates", "reason"],
            [
                (r["fault_id"], r["status"], r.get("rank"), r.get("wef"), r.get("num_candidates"), r.get("reason"))
                for r in records
            ],
        )
        print()
        _table(["metric", "value"], [(k, v) for k, v in block["metrics"].items() if not k.endswith("_exact")])
        print(f"excluded: {block['excluded']}")
        return EXIT_OK
    for r in records:
        _emit(r)
    _emit(block)
    _emit(_provenance(cfg, history, faults_file=str(args.faults)))
    return EXIT_OK


def cmd_select_tests(args, cfg: RunConfig) -> int:
    history = _load_store(args)
    methods = [resolve_id(history, t, EntityKind.METHOD) for t in _read_id_lines(args.methods)]
    if not methods:
        raise InputError("methods file lists no methods")
    tests = history.tests
    if cfg.maturity is not MaturityLevel.ALL:
        keep = maturity_filter(history, cfg.maturity, pooled=cfg.pooled_mean)
        tests = [t for t in tests if t in keep]
    if not tests:
        raise InputError("store has no tests to select from")
    budget = cfg.budget or default_budget(len(tests), cfg.budget_fraction)
    scores = score_tests(methods, tests, history, cfg.selection_mode, cfg.n, cfg.aggregator)
    chosen = select_tests(methods, tests, history, cfg.selection_mode, budget, cfg.n, cfg.aggregator)
    if args.human:
        _table(["#", "test", "score"], [(i, t.display, fmt(scores[t])) for i, t in enumerate(chosen, 1)])
        return EXIT_OK
    for i, t in enumerate(chosen, 1):
        _emit({"position": i, "test": t.display, "score": str(scores[t]), "score_4dp": fmt(scores[t])})
    _emit(_provenance(cfg, history, budget=budget, num_tests=len(tests)))
    return EXIT_OK


def cmd_predict_links(args, cfg: RunConfig) -> int:
    history = _load_store(args)
    if args.tests:
        tests = [resolve_id(history, t, EntityKind.TEST) for t in _read_id_lines(args.tests)]
    else:
        tests = history.tests
    methods = history.methods
    if cfg.maturity is not MaturityLevel.ALL:
        keep = maturity_filter(history, cfg.maturity, pooled=cfg.pooled_mean)
        methods = [m for m in methods if m in keep]
        tests = [t for t in tests if t in keep]
    rows = []
    for t in tests:
        for m in sorted(predict_links(t, methods, history, cfg.k_links, cfg.n, cfg.aggregator)):
            rows.append((t.display, m.display))
    if args.human:
        _table(["test", "method"], rows)
        return EXIT_OK
    for t, m in rows:
        _emit({"test": t, "method": m})
    _emit(_provenance(cfg, history))
    return EXIT_OK


def _plain_records(path: str) -> list[dict]:
    return [r for r in _jsonl(path) if "provenance" not in r and "metrics" not in r]


def cmd_evaluate(args, cfg: RunConfig) -> int:
    report: dict[str, Any] = {}
    if args.ranks:
        recs = [r for path in args.ranks for r in _plain_records(path)]
        report.update(summarize_localization(recs, args.exclusions_as_misses))
    if args.selection or args.kill_matrix:
        if not (args.selection and args.kill_matrix):
            raise ConfigError("--selection and --kill-matrix go together")
        selected_names = [r["test"] for r in _plain_records(args.selection)]
        by_name: dict[str, EntityId] = {}

        def resolve_test(text: str) -> EntityId:
            path, _, qname = text.partition("::")
            return by_name.setdefault(text, EntityId(EntityKind.TEST, path, qname))

        try:
            with open(args.kill_matrix, encoding="utf-8") as fp:
                km = read_kill_matrix(fp, resolve_test)
        except OSError as e:
            raise InputError(f"cannot read kill matrix: {e.strerror}") from None
        selected = {resolve_test(n) for n in selected_names}
        unknown = selected - set(km.tests)
        if unknown:
            raise UnresolvedEntityError(f"selected tests missing from kill matrix: {sorted(map(str, unknown))}")
        ms, r_ms = mutation_scores(km, selected)
        report["mutation"] = {
            "selected": len(selected),
            "tests": len(km.tests),
            "mutants": len(km.mutants),
            "ms": str(ms),
            "ms_4dp": fmt(ms),
            "r_ms": _exact(r_ms),
            "r_ms_4dp": fmt(r_ms),
        }
    if args.links or args.oracle:
        if not (args.links and args.oracle):
            raise ConfigError("--links and --oracle go together")

        def as_id(kind: EntityKind):
            def resolve(text: str) -> EntityId:
                path, _, qname = text.partition("::")
                return EntityId(kind, path, qname)

            return resolve

        def pairs(path: str):
            recs = _plain_records(path)
            return {(as_id(EntityKind.TEST)(r["test"]), as_id(EntityKind.METHOD)(r["method"])) for r in recs}

        predicted, oracle = pairs(args.links), pairs(args.oracle)
        p, r, f1 = link_prf(predicted, LinkOracle(frozenset(oracle)))
        report["links"] = {
            "predicted": len(predicted),
            "oracle": len(oracle),
            "correct": len(predicted & oracle),
            "precision": _exact(p),
            "recall": _exact(r),
            "f1": _exact(f1),
            "precision_4dp": fmt(p),
            "recall_4dp": fmt(r),
            "f1_4dp": fmt(f1),
        }
    if not report:
        raise ConfigError("evaluate needs --ranks, --selection/--kill-matrix or --links/--oracle")
    if args.human:
        for section, body in report.items():
            if isinstance(body, dict):
                print(f"[{section}]")
                _table(["metric", "value"], [(k, v) for k, v in body.items() if not k.endswith("_exact")])
                print()
            else:
                print(f"{section}: {body}")
        return EXIT_OK
    _emit(report)
    return EXIT_OK


def stats_report(history: ChangeHistory, pooled: bool = False) -> dict[str, Any]:
    thresholds = confident_thresholds(history, pooled)
    applicable = maturity_filter(history, MaturityLevel.APPLICABLE)
    confident = maturity_filter(history, MaturityLevel.CONFIDENT, pooled=pooled)
    out: dict[str, Any] = {"commits": history.num_commits}
    for kind in EntityKind:
        counts = sorted(len(history.revisions[e]) for e in history.entities(kind))
        out[kind.value] = {
            "entities": len(counts),
            "revisions": sum(counts),
            "mean_changes": f"{float(thresholds[kind]):.4f}",
            "min_changes": counts[0] if counts else 0,
            "max_changes": counts[-1] if counts else 0,
            "applicable": sum(1 for e in applicable if e.kind is kind),
            "confident": sum(1 for e in confident if e.kind is kind),
        }
    return out


def cmd_stats(args, cfg: RunConfig) -> int:
    history = _load_store(args)
    report = stats_report(history, cfg.pooled_mean)
    if args.human:
        print(f"commits: {report['commits']}")
        keys = list(report["method"])
        _table(["kind"] + keys, [[k] + [report[k][c] for c in keys] for k in ("method", "test")])
        return EXIT_OK
    _emit(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--store", help=f"history store file (default ${STORE_ENV})")
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--human", action="store_true", help="print formatted tables")
    common.add_argument("--n", type=str, help="top-N re-ranking size (default 100)")
    common.add_argument("--maturity", choices=[m.value for m in MaturityLevel])
    common.add_argument("--filter-scope", choices=["all", "fault-only"])
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="cement", description="Evolutionary coupling between tests and methods.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", parents=[common], help="mine a repository into a history store")
    p.add_argument("repo", nargs="?")
    p.add_argument("--head", default="HEAD")
    p.add_argument("--resume", action="store_true", help="extend an existing store")
    p.add_argument("--changelog", help="ingest a pre-extracted change log instead of a repository")
    p.add_argument("--repo-id")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("rank", parents=[common], help="rank candidates for one target")
    p.add_argument("target")
    p.add_argument("--direction", choices=["methods-for-test", "tests-for-method"], default="methods-for-test")
    p.add_argument("--top", type=int)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("localize", parents=[common], help="localize faults from failing tests")
    p.add_argument("faults")
    p.add_argument("--top", type=int, help="include the top entries of each ranking")
    p.add_argument("--exclusions-as-misses", action="store_true")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("select-tests", parents=[common], help="select tests for a set of methods")
    p.add_argument("methods")
    p.add_argument("--mode", choices=["best", "avg"])
    p.add_argument("--budget", help="test count, or a fraction like 1/10")
    p.set_defaults(func=cmd_select_tests)

    p = sub.add_parser("predict-links", parents=[common], help="top-k traceability links per test")
    p.add_argument("tests", nargs="?")
    p.add_argument("--k", type=str)
    p.set_defaults(func=cmd_predict_links)

    p = sub.add_parser("evaluate", parents=[common], help="compute metrics from outputs")
    p.add_argument("--ranks", nargs="+", help="localize outputs; several files are pooled")
    p.add_argument("--selection")
    p.add_argument("--kill-matrix")
    p.add_argument("--links")
    p.add_argument("--oracle")
    p.add_argument("--exclusions-as-misses", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", parents=[common], help="maturity report for a store")
    p.set_defaults(func=cmd_stats)
    return parser


_FLAG_KEYS = ("n", "maturity", "filter_scope", "mode", "budget", "k")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        overrides = {k: str(getattr(args, k)) for k in _FLAG_KEYS if getattr(args, k, None) is not None}
        cfg = load_config(args.config, overrides)
        return args.func(args, cfg)
    except ConfigError as e:
        print(f"cement: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except UnresolvedEntityError as e:
        print(f"cement: {e}", file=sys.stderr)
        return EXIT_UNRESOLVED
    except (InputError, FatalError) as e:
        print(f"cement: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
