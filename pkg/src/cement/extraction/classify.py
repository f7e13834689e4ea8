"""Method/test classification by path globs and name patterns."""

from __future__ import annotations

import enum
import fnmatch
import functools
import hashlib
import json
import re
from dataclasses import asdict, dataclass, field

from cement.extraction.javalike import EntityLocator

DEFAULT_TEST_PATH_GLOBS = (
    "**/src/test/**",
    "test/**",
    "tests/**",
    "**/test/**",
    "**/tests/**",
    "**/*Test.java",
    "**/*Tests.java",
    "**/Test*.java",
)


class Classification(str, enum.Enum):
    METHOD = "method"
    TEST = "test"
    IGNORED = "ignored"


@dataclass(frozen=True)
class ClassifierConfig:
    test_path_globs: tuple[str, ...] = field(default=DEFAULT_TEST_PATH_GLOBS)
    test_name_patterns: tuple[str, ...] = ()
    ignore_globs: tuple[str, ...] = ()

    @classmethod
    def empty(cls) -> ClassifierConfig:
        return cls((), (), ())

    def digest(self, **extra: object) -> str:
        payload = {k: list(v) for k, v in asdict(self).items()}
        payload.update(extra)
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@functools.lru_cache(maxsize=512)
def _glob_regex(pattern: str) -> re.Pattern[str]:
    # '**/' spans any number of directories (including none), '*' stays within one.
    out = []
    i = 0
    while i < len(pattern):
        if pattern.startswith("**/", i):
            out.append("(?:.*/)?")
            i += 3
        elif pattern.startswith("**", i):
            out.append(".*")
            i += 2
        elif pattern[i] == "*":
            out.append("[^/]*")
            i += 1
        elif pattern[i] == "?":
            out.append("[^/]")
            i += 1
        else:
            out.append(re.escape(pattern[i]))
            i += 1
    return re.compile("".join(out) + r"\Z")


def glob_match(path: str, pattern: str) -> bool:
    return _glob_regex(pattern).match(path) is not None


def matches_any(path: str, patterns) -> bool:
    return any(glob_match(path, p) for p in patterns)


def simple_name(qualified_name: str) -> str:
    """``Outer.Inner.run/2`` -> ``run``."""
    base = re.split(r"[/(#]", qualified_name, maxsplit=1)[0]
    return base.rsplit(".", 1)[-1]


def classify_path_name(file_path: str, qualified_name: str, config: ClassifierConfig) -> Classification:
    if matches_any(file_path, config.ignore_globs):
        return Classification.IGNORED
    if matches_any(file_path, config.test_path_globs):
        return Classification.TEST
    name = simple_name(qualified_name)
    if any(fnmatch.fnmatchcase(name, p) for p in config.test_name_patterns):
        return Classification.TEST
    return Classification.METHOD


def classify_entity(locator: EntityLocator, config: ClassifierConfig) -> Classification:
    return classify_path_name(locator.file_path, locator.qualified_name, config)
