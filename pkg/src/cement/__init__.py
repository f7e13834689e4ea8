"""Evolutionary coupling between tests and methods mined from commit history."""

from cement.applications import (
    FaultCase,
    FilterScope,
    Localization,
    MaturityLevel,
    SelectionMode,
    localize,
    maturity_filter,
    predict_links,
    select_tests,
)
from cement.coupling import (
    NOT_APPLICABLE,
    Aggregator,
    RankedList,
    distance_to_nearest,
    rank_candidates,
    worst_rank,
)
from cement.errors import (
    CementError,
    ConfigError,
    FatalError,
    FaultNotApplicable,
    InputError,
    UnresolvedEntityError,
)
from cement.extraction import ClassifierConfig, extract_entities, ingest_changelog, ingest_repository
from cement.history import (
    NO_HISTORY,
    ChangeHistory,
    CommitRef,
    EntityId,
    EntityKind,
    linearize_commits,
    merge_histories,
    revisions_of,
)

__version__ = "0.1.0"
