"""Fault localization, test selection and link prediction metrics.

All ratios are exact fractions; :func:`fmt` renders them with four decimals.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence

from cement.coupling import NOT_APPLICABLE
from cement.errors import InputError
from cement.history import EntityId

DEFAULT_ACC_NS = (1, 3, 5, 10)


def fmt(value) -> str | None:
    if value is NOT_APPLICABLE or value is None:
        return None
    return f"{float(value):.4f}"


def acc_at_n(fault_ranks: Iterable[int], n: int) -> int:
    """Number of faults ranked within the top ``n``."""
    if n < 1:
        raise InputError("n must be at least 1")
    return sum(1 for r in fault_ranks if r <= n)


def wef_summary(fault_ranks: Sequence[int]):
    """(mean, median) of wasted effort ``rank - 1`` as fractions, or NotApplicable."""
    if not fault_ranks:
        return NOT_APPLICABLE
    wef = [Fraction(r - 1) for r in fault_ranks]
    return Fraction(sum(wef), len(wef)), Fraction(statistics.median(wef))


@dataclass(frozen=True)
class KillMatrix:
    tests: tuple[EntityId, ...]
    mutants: tuple[str, ...]
    kills: tuple[tuple[bool, ...], ...]  # indexed [test][mutant]
    hosts: tuple[str | None, ...] = ()

    def __post_init__(self) -> None:
        if len(self.kills) != len(self.tests):
            raise InputError("kill matrix rows do not match the test list")
        if any(len(row) != len(self.mutants) for row in self.kills):
            raise InputError("kill matrix columns do not match the mutant list")
        if self.hosts and len(self.hosts) != len(self.mutants):
            raise InputError("host list does not match the mutant list")
        if len(set(self.tests)) != len(self.tests):
            raise InputError("duplicate test in kill matrix")

    def killed_by(self, selected: Iterable[EntityId]) -> int:
        index = {t: i for i, t in enumerate(self.tests)}
        rows = []
        for t in selected:
            if t not in index:
                raise InputError(f"test {t} is not in the kill matrix")
            rows.append(self.kills[index[t]])
        return sum(1 for j in range(len(self.mutants)) if any(row[j] for row in rows))


def mutation_scores(km: KillMatrix, selected: Iterable[EntityId]):
    """(MS, R_MS) of ``selected``; R_MS is NotApplicable when the full suite kills nothing."""
    total = len(km.mutants)
    if total == 0:
        raise InputError("kill matrix has no mutants")
    ms = Fraction(km.killed_by(selected), total)
    ms_max = Fraction(km.killed_by(km.tests), total)
    return ms, (ms / ms_max if ms_max else NOT_APPLICABLE)


@dataclass(frozen=True)
class LinkOracle:
    pairs: frozenset[tuple[EntityId, EntityId]]


def link_prf(predicted: Iterable[tuple[EntityId, EntityId]], oracle: LinkOracle):
    """(precision, recall, f1); undefined components are NotApplicable."""
    predicted = set(predicted)
    truth = set(oracle.pairs)
    hit = len(predicted & truth)
    precision = Fraction(hit, len(predicted)) if predicted else NOT_APPLICABLE
    recall = Fraction(hit, len(truth)) if truth else NOT_APPLICABLE
    if precision is NOT_APPLICABLE or recall is NOT_APPLICABLE or precision + recall == 0:
        f1 = NOT_APPLICABLE
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def localization_metrics(
    fault_ranks: Sequence[int], ns: Sequence[int] = DEFAULT_ACC_NS
) -> dict[str, object]:
    out: dict[str, object] = {"faults": len(fault_ranks)}
    for n in ns:
        out[f"acc@{n}"] = acc_at_n(fault_ranks, n)
    for n in ns:
        out[f"acc@{n}_ratio"] = fmt(Fraction(out[f"acc@{n}"], len(fault_ranks))) if fault_ranks else None
    summary = wef_summary(fault_ranks)
    if summary is NOT_APPLICABLE:
        out["wef_mean"] = out["wef_median"] = None
        out["wef_mean_exact"] = out["wef_median_exact"] = None
    else:
        mean, median = summary
        out["wef_mean"], out["wef_median"] = fmt(mean), fmt(median)
        out["wef_mean_exact"], out["wef_median_exact"] = str(mean), str(median)
    return out


# File formats

def read_kill_matrix(fp: IO[str], resolve) -> KillMatrix:
    """Parse ``{"tests": [...]}`` then ``{"mutant", "host", "kills"}`` lines.

    ``resolve`` maps a test id string to an :class:`EntityId`.
    """
    lines = [ln for ln in fp if ln.strip()]
    if not lines:
        raise InputError("empty kill matrix")
    header = json.loads(lines[0])
    if list(header) != ["tests"]:
        raise InputError("kill matrix header must be {\"tests\": [...]}")
    tests = tuple(resolve(t) for t in header["tests"])
    mutants, hosts, columns = [], [], []
    for lineno, line in enumerate(lines[1:], 2):
        rec = json.loads(line)
        if not set(rec) <= {"mutant", "host", "kills"} or "mutant" not in rec or "kills" not in rec:
            raise InputError(f"kill matrix line {lineno}: bad fields {sorted(rec)}")
        bits = rec["kills"]
        if len(bits) != len(tests) or set(bits) - {"0", "1"}:
            raise InputError(f"kill matrix line {lineno}: kills must be a {len(tests)}-bit string")
        mutants.append(str(rec["mutant"]))
        hosts.append(rec.get("host"))
        columns.append([b == "1" for b in bits])
    kills = tuple(tuple(col[i] for col in columns) for i in range(len(tests)))
    return KillMatrix(tests, tuple(mutants), kills, tuple(hosts))


def read_pairs(fp: IO[str], resolve) -> set[tuple[EntityId, EntityId]]:
    pairs = set()
    for lineno, line in enumerate(fp, 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if "test" not in rec or "method" not in rec:
            raise InputError(f"link line {lineno}: expected test and method fields")
        pairs.add((resolve(rec["test"]), resolve(rec["method"])))
    return pairs
