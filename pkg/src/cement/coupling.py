"""Nearest-change distances between entity timelines and coupling rankings.

Distances are exact :class:`fractions.Fraction` values so that tie detection,
and therefore worst-case ranking, never depends on float rounding.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Hashable, Sequence, Union

from cement.history import ChangeHistory, EntityId, revisions_of

DEFAULT_TOP_N = 100


class _NotApplicable:
    _instance: _NotApplicable | None = None

    def __new__(cls) -> _NotApplicable:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotApplicable"

    def __reduce__(self):
        return (_NotApplicable, ())


NOT_APPLICABLE = _NotApplicable()

Distance = Union[Fraction, _NotApplicable]


class Aggregator(str, enum.Enum):
    MEAN = "mean"


def _mean(values: Sequence[int]) -> Fraction:
    return Fraction(sum(values), len(values))


_AGGREGATORS: dict[Aggregator, Callable[[Sequence[int]], Fraction]] = {
    Aggregator.MEAN: _mean,
}


def is_applicable(d: Any) -> bool:
    return d is not NOT_APPLICABLE


def sort_key(d: Distance) -> tuple[int, Fraction]:
    """Order numeric distances ascending, NotApplicable after all of them."""
    if d is NOT_APPLICABLE:
        return (1, Fraction(0))
    return (0, d)


def nearest_gaps(revs_t: Sequence[int], revs_tc: Sequence[int]) -> list[int]:
    """For each index in ``revs_t``, the gap to the closest index in ``revs_tc``."""
    gaps = []
    for r in revs_t:
        i = bisect.bisect_left(revs_tc, r)
        best = None
        if i < len(revs_tc):
            best = revs_tc[i] - r
        if i > 0:
            below = r - revs_tc[i - 1]
            best = below if best is None else min(best, below)
        gaps.append(best)
    return gaps


def distance_to_nearest(
    revs_t: Sequence[int], revs_tc: Sequence[int], aggregator: Aggregator = Aggregator.MEAN
) -> Distance:
    """Aggregate, over the revisions of ``t``, the gap to the nearest revision of ``t_c``.

    Both sequences must be sorted ascending. Returns ``NOT_APPLICABLE`` when
    either is empty. The result is asymmetric in its arguments.
    """
    if not revs_t or not revs_tc:
        return NOT_APPLICABLE
    return _AGGREGATORS[Aggregator(aggregator)](nearest_gaps(revs_t, revs_tc))


def entity_distance(
    history: ChangeHistory, t: EntityId, tc: EntityId, aggregator: Aggregator = Aggregator.MEAN
) -> Distance:
    return distance_to_nearest(
        revisions_of(history, t) or (), revisions_of(history, tc) or (), aggregator
    )


def worst_rank(values: Sequence[Any], key: Callable[[Any], Any] | None = None) -> list[int]:
    """Worst-case tie ranks: each value gets the count of values <= itself.

    >>> worst_rank([0.1, 0.1, 0.5])
    [2, 2, 3]
    """
    keys = [key(v) if key else v for v in values]
    ordered = sorted(keys)
    return [bisect.bisect_right(ordered, k) for k in keys]


@dataclass(frozen=True)
class RankedEntry:
    candidate: EntityId
    distance: Distance  # combined distance used for ranking
    forward: Distance  # one-way distance target -> candidate
    rank: int


@dataclass(frozen=True)
class RankedList:
    target: EntityId
    entries: tuple[RankedEntry, ...]
    n: int
    aggregator: Aggregator

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def rank_of(self, candidate: EntityId) -> int | None:
        for e in self.entries:
            if e.candidate == candidate:
                return e.rank
        return None

    def ranks(self) -> dict[EntityId, int]:
        return {e.candidate: e.rank for e in self.entries}


def select_top_n(distances: dict[Hashable, Distance], n: int) -> set:
    """Keys of the ``n`` smallest numeric distances, widened to include boundary ties."""
    numeric = sorted(d for d in distances.values() if d is not NOT_APPLICABLE)
    if n <= 0 or not numeric:
        return set()
    threshold = numeric[min(n, len(numeric)) - 1]
    return {c for c, d in distances.items() if d is not NOT_APPLICABLE and d <= threshold}


def rank_candidates(
    target: EntityId,
    candidates: Sequence[EntityId],
    history: ChangeHistory,
    n: int = DEFAULT_TOP_N,
    aggregator: Aggregator = Aggregator.MEAN,
) -> RankedList:
    """Rank ``candidates`` by their evolutionary coupling to ``target``.

    The forward distance target -> candidate is computed for everyone; for the
    ``n`` closest candidates it is multiplied by the reverse distance
    candidate -> target. Candidates are sorted by the resulting distance,
    smallest (strongest coupling) first, with worst-case tie ranks.
    """
    aggregator = Aggregator(aggregator)
    revs_target = revisions_of(history, target) or ()
    forward = {
        c: distance_to_nearest(revs_target, revisions_of(history, c) or (), aggregator)
        for c in candidates
    }
    combined = dict(forward)
    for c in select_top_n(forward, n):
        backward = distance_to_nearest(revisions_of(history, c) or (), revs_target, aggregator)
        combined[c] = backward * forward[c]

    order = sorted(candidates, key=lambda c: (sort_key(combined[c]), c))
    ranks = worst_rank([combined[c] for c in order], key=sort_key)
    entries = tuple(
        RankedEntry(c, combined[c], forward[c], r) for c, r in zip(order, ranks)
    )
    return RankedList(target, entries, n, aggregator)


def top_k(ranked: RankedList, k: int) -> list[EntityId]:
    """First ``k`` candidates by (rank, name); boundary ties are cut by name."""
    order = sorted(ranked.entries, key=lambda e: (e.rank, e.candidate.qualified_name, e.candidate))
    return [e.candidate for e in order[:k]]
