"""Fault localization, test selection and link prediction on top of coupling ranks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from cement.coupling import (
    DEFAULT_TOP_N,
    Aggregator,
    RankedList,
    rank_candidates,
    top_k,
    worst_rank,
)
from cement.errors import FaultNotApplicable, InputError
from cement.history import ChangeHistory, CommitRef, EntityId, EntityKind

DEFAULT_BUDGET_FRACTION = Fraction(1, 10)
DEFAULT_K_LINKS = 5


class MaturityLevel(str, enum.Enum):
    ALL = "all"
    APPLICABLE = "applicable"
    CONFIDENT = "confident"


class SelectionMode(str, enum.Enum):
    BEST = "best"
    AVG = "avg"


class FilterScope(str, enum.Enum):
    ALL = "all"  # filter candidates and fault entities before ranking
    FAULT_ONLY = "fault-only"  # filter only decides which faults are kept


@dataclass(frozen=True)
class FaultCase:
    fault_id: str
    failing_tests: frozenset[EntityId]
    faulty_methods: frozenset[EntityId] = frozenset()
    cutoff: CommitRef | None = None
    unresolved: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.failing_tests and not self.unresolved:
            raise InputError(f"{self.fault_id}: a fault needs at least one failing test")
        for t in self.failing_tests:
            if t.kind is not EntityKind.TEST:
                raise InputError(f"{self.fault_id}: failing test {t} is not a test entity")
        for m in self.faulty_methods:
            if m.kind is not EntityKind.METHOD:
                raise InputError(f"{self.fault_id}: faulty method {m} is not a method entity")


def confident_thresholds(history: ChangeHistory, pooled: bool = False) -> dict[EntityKind, Fraction]:
    """Mean revision count per entity kind (or pooled over all entities)."""
    counts: dict[EntityKind, list[int]] = {k: [] for k in EntityKind}
    for eid, revs in history.revisions.items():
        counts[eid.kind].append(len(revs))
    if pooled:
        everything = [c for cs in counts.values() for c in cs]
        mean = Fraction(sum(everything), len(everything)) if everything else Fraction(0)
        return {k: mean for k in EntityKind}
    return {k: Fraction(sum(cs), len(cs)) if cs else Fraction(0) for k, cs in counts.items()}


def maturity_filter(
    history: ChangeHistory,
    level: MaturityLevel,
    ids: Iterable[EntityId] | None = None,
    pooled: bool = False,
) -> set[EntityId]:
    """Entities meeting ``level``.

    Without ``ids`` the stored entities are filtered; with ``ids`` the given
    (possibly historyless) entities are. The Confident threshold is the mean
    revision count of the stored entities of the same kind.
    """
    level = MaturityLevel(level)
    pool = set(history.revisions) if ids is None else set(ids)
    if level is MaturityLevel.ALL:
        return pool
    pool = {e for e in pool if e in history.revisions}
    if level is MaturityLevel.APPLICABLE:
        return pool
    thresholds = confident_thresholds(history, pooled)
    return {e for e in pool if len(history.revisions[e]) >= thresholds[e.kind]}


@dataclass
class Localization:
    fault_id: str
    ranking: list[tuple[EntityId, int]]  # (method, final rank), best first
    fault_rank: int | None
    tests_used: list[EntityId]
    num_candidates: int
    num_methods: int
    per_test: dict[EntityId, RankedList] = field(default_factory=dict, repr=False)

    @property
    def wef(self) -> int | None:
        return None if self.fault_rank is None else self.fault_rank - 1

    def rank_of(self, m: EntityId) -> int | None:
        for eid, r in self.ranking:
            if eid == m:
                return r
        return None


def localize(
    fault: FaultCase,
    history: ChangeHistory,
    level: MaturityLevel = MaturityLevel.ALL,
    n: int = DEFAULT_TOP_N,
    aggregator: Aggregator = Aggregator.MEAN,
    *,
    filter_scope: FilterScope = FilterScope.ALL,
    pooled_mean: bool = False,
    universe: Iterable[EntityId] = (),
) -> Localization:
    """Rank methods by suspiciousness for ``fault``.

    Each failing test ranks the candidate methods; a method keeps its best rank
    over all failing tests and these best ranks are re-ranked with worst-case
    ties. ``universe`` adds methods without history (they share the last rank
    when the level is ``ALL``).

    Raises :class:`FaultNotApplicable` when no usable failing test (or, if
    faulty methods are given, no eligible faulty method) remains.
    """
    level = MaturityLevel(level)
    scope = FilterScope(filter_scope)
    h = history.truncated(fault.cutoff.index) if fault.cutoff is not None else history

    stored_methods = set(h.methods)
    extra = {m for m in universe if m.kind is EntityKind.METHOD} | set(fault.faulty_methods)
    if scope is FilterScope.ALL:
        eligible = maturity_filter(h, level, pooled=pooled_mean)
        candidates = stored_methods & eligible
        if level is MaturityLevel.ALL:
            candidates |= extra
        tests = [t for t in sorted(fault.failing_tests) if t in eligible and t in h.revisions]
        faulty = {m for m in fault.faulty_methods if m in candidates}
    else:
        qualified = maturity_filter(
            h, level, ids=set(fault.failing_tests) | set(fault.faulty_methods), pooled=pooled_mean
        )
        candidates = stored_methods | extra
        tests = [t for t in sorted(fault.failing_tests) if t in qualified and t in h.revisions]
        faulty = {m for m in fault.faulty_methods if m in qualified}

    if not tests:
        if not any(t in h.revisions for t in fault.failing_tests):
            raise FaultNotApplicable(fault.fault_id, "no failing test has history at the cutoff")
        raise FaultNotApplicable(fault.fault_id, f"no failing test meets the {level.value} level")
    if fault.faulty_methods and not faulty:
        raise FaultNotApplicable(fault.fault_id, f"no faulty method meets the {level.value} level")

    ordered = sorted(candidates)
    best: dict[EntityId, int] = {}
    per_test = {}
    for t in tests:
        ranked = rank_candidates(t, ordered, h, n, aggregator)
        per_test[t] = ranked
        for e in ranked.entries:
            if e.candidate not in best or e.rank < best[e.candidate]:
                best[e.candidate] = e.rank
    final = dict(zip(ordered, worst_rank([best[m] for m in ordered])))
    ranking = sorted(final.items(), key=lambda kv: (kv[1], kv[0]))
    fault_rank = min((final[m] for m in faulty), default=None)
    return Localization(
        fault.fault_id,
        ranking,
        fault_rank,
        tests,
        num_candidates=len(ordered),
        num_methods=len(stored_methods | extra),
        per_test=per_test,
    )


def default_budget(num_tests: int, fraction: Fraction = DEFAULT_BUDGET_FRACTION) -> int:
    """``fraction`` of the tests, rounded half up, at least one."""
    return max(1, math.floor(Fraction(num_tests) * Fraction(fraction) + Fraction(1, 2)))


def score_tests(
    methods: Iterable[EntityId],
    tests: Sequence[EntityId],
    history: ChangeHistory,
    mode: SelectionMode = SelectionMode.BEST,
    n: int = DEFAULT_TOP_N,
    aggregator: Aggregator = Aggregator.MEAN,
) -> dict[EntityId, Fraction]:
    """Per-test score: best (min) or average rank over the rankings of each method."""
    methods = sorted(set(methods))
    if not methods:
        raise InputError("test selection needs at least one method")
    mode = SelectionMode(mode)
    tests = sorted(set(tests))
    ranks: dict[EntityId, list[int]] = {t: [] for t in tests}
    for m in methods:
        for e in rank_candidates(m, tests, history, n, aggregator).entries:
            ranks[e.candidate].append(e.rank)
    if mode is SelectionMode.BEST:
        return {t: Fraction(min(rs)) for t, rs in ranks.items()}
    return {t: Fraction(sum(rs), len(rs)) for t, rs in ranks.items()}


def select_tests(
    methods: Iterable[EntityId],
    tests: Sequence[EntityId],
    history: ChangeHistory,
    mode: SelectionMode = SelectionMode.BEST,
    budget: int | None = None,
    n: int = DEFAULT_TOP_N,
    aggregator: Aggregator = Aggregator.MEAN,
) -> list[EntityId]:
    """The ``budget`` tests most coupled to ``methods``, ties cut by qualified name."""
    if budget is None:
        budget = default_budget(len(set(tests)))
    if budget < 1:
        raise InputError("budget must be at least 1")
    scores = score_tests(methods, tests, history, mode, n, aggregator)
    order = sorted(scores, key=lambda t: (scores[t], t.qualified_name, t))
    return order[:budget]


def predict_links(
    test: EntityId,
    methods: Sequence[EntityId],
    history: ChangeHistory,
    k: int = DEFAULT_K_LINKS,
    n: int = DEFAULT_TOP_N,
    aggregator: Aggregator = Aggregator.MEAN,
) -> set[EntityId]:
    if k < 1:
        raise InputError("k must be at least 1")
    ranked = rank_candidates(test, sorted(set(methods)), history, n, aggregator)
    return set(top_k(ranked, k))
