"""Turning repository contents into per-entity change events."""

from cement.extraction.classify import (
    Classification,
    ClassifierConfig,
    classify_entity,
    classify_path_name,
    glob_match,
)
from cement.extraction.diff import DiffHunk, FileDiff, map_diff_to_entities, parse_unified_diff
from cement.extraction.ingest import (
    IngestStats,
    ingest_changelog,
    ingest_repository,
    read_changelog,
)
from cement.extraction.javalike import EntityLocator, ExtractionResult, extract_entities

__all__ = [
    "Classification",
    "ClassifierConfig",
    "DiffHunk",
    "EntityLocator",
    "ExtractionResult",
    "FileDiff",
    "IngestStats",
    "classify_entity",
    "classify_path_name",
    "extract_entities",
    "glob_match",
    "ingest_changelog",
    "ingest_repository",
    "map_diff_to_entities",
    "parse_unified_diff",
    "read_changelog",
]
