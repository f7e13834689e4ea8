import io
import json
import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cement.coupling import NOT_APPLICABLE
from cement.errors import InputError
from cement.evaluation import (
    KillMatrix,
    LinkOracle,
    acc_at_n,
    fmt,
    link_prf,
    localization_metrics,
    mutation_scores,
    read_kill_matrix,
    read_pairs,
    wef_summary,
)
from conftest import M, T
from oracles import killed_count

ranks_st = st.lists(st.integers(1, 500), max_size=40)


class TestAccAtN:
    def test_examples(self):
        assert acc_at_n([1, 2, 11], 10) == 2
        assert acc_at_n([1, 2, 11], 1) == 1
        assert acc_at_n([], 5) == 0

    def test_bad_n(self):
        with pytest.raises(InputError):
            acc_at_n([1], 0)

    @given(ranks_st, st.integers(1, 600))
    def test_monotone(self, ranks, n):
        assert acc_at_n(ranks, n) <= acc_at_n(ranks, n + 1)
        assert acc_at_n(ranks, 10**9) == len(ranks)


class TestWef:
    def test_examples(self):
        assert wef_summary([1]) == (0, 0)
        assert wef_summary([1, 3]) == (1, 1)
        # wasted effort is (0, 1, 100)
        mean, median = wef_summary([1, 2, 101])
        assert mean == Fraction(101, 3) and median == 1
        assert fmt(mean) == "33.6667"

    def test_even_median_is_midpoint(self):
        assert wef_summary([1, 2])[1] == Fraction(1, 2)

    def test_empty(self):
        assert wef_summary([]) is NOT_APPLICABLE

    @given(ranks_st.filter(bool))
    def test_bounds(self, ranks):
        mean, median = wef_summary(ranks)
        assert mean >= 0
        assert median <= max(ranks) - 1
        assert isinstance(mean, Fraction)


def matrix(bits):
    tests = tuple(T(f"t{i}") for i in range(len(bits)))
    mutants = tuple(f"mu{j}" for j in range(len(bits[0]) if bits else 0))
    return KillMatrix(tests, mutants, tuple(tuple(bool(b) for b in row) for row in bits))


class TestMutationScores:
    def test_full_suite(self):
        km = matrix([[1, 0, 0], [0, 1, 0]])
        ms, rms = mutation_scores(km, km.tests)
        assert ms == Fraction(2, 3) and rms == 1

    def test_empty_selection(self):
        km = matrix([[1, 0], [0, 1]])
        assert mutation_scores(km, []) == (0, 0)

    def test_nothing_killable(self):
        km = matrix([[0, 0]])
        assert mutation_scores(km, km.tests) == (0, NOT_APPLICABLE)

    def test_unknown_test(self):
        km = matrix([[1]])
        with pytest.raises(InputError):
            mutation_scores(km, [T("stranger")])

    def test_random_against_column_or(self):
        rng = random.Random(31)
        for _ in range(200):
            bits = [[rng.random() < 0.15 for _ in range(30)] for _ in range(10)]
            km = matrix(bits)
            rows = sorted(rng.sample(range(10), rng.randint(0, 10)))
            ms, rms = mutation_scores(km, [km.tests[i] for i in rows])
            assert ms == Fraction(killed_count(bits, rows), 30)
            full = killed_count(bits, range(10))
            assert rms == (Fraction(killed_count(bits, rows), full) if full else NOT_APPLICABLE)

    def test_superset_monotone(self):
        rng = random.Random(2)
        bits = [[rng.random() < 0.2 for _ in range(12)] for _ in range(5)]
        km = matrix(bits)
        for small in combinations(km.tests, 2):
            for extra in km.tests:
                a = mutation_scores(km, small)[0]
                b = mutation_scores(km, small + (extra,))[0]
                assert a <= b

    def test_shape_checked(self):
        with pytest.raises(InputError):
            KillMatrix((T("a"),), ("m1", "m2"), ((True,),))

    def test_read_kill_matrix(self):
        text = "\n".join(
            [
                json.dumps({"tests": ["a", "b"]}),
                json.dumps({"mutant": "x1", "host": "m", "kills": "10"}),
                json.dumps({"mutant": "x2", "kills": "11"}),
                json.dumps({"mutant": "x3", "kills": "00"}),
            ]
        )
        km = read_kill_matrix(io.StringIO(text), T)
        assert km.tests == (T("a"), T("b"))
        assert km.kills == ((True, True, False), (False, True, False))
        assert km.hosts == ("m", None, None)
        assert mutation_scores(km, [T("b")]) == (Fraction(1, 3), Fraction(1, 2))

    @pytest.mark.parametrize(
        "lines",
        [
            [],
            [{"test": ["a"]}],
            [{"tests": ["a"]}, {"mutant": "x", "kills": "11"}],
            [{"tests": ["a"]}, {"mutant": "x", "kills": "2"}],
            [{"tests": ["a"]}, {"kills": "1"}],
        ],
    )
    def test_read_kill_matrix_rejects(self, lines):
        with pytest.raises(InputError):
            read_kill_matrix(io.StringIO("\n".join(json.dumps(x) for x in lines)), T)


class TestLinkPrf:
    def test_exact(self):
        pairs = {(T("a"), M("x")), (T("b"), M("y"))}
        assert link_prf(pairs, LinkOracle(frozenset(pairs))) == (1, 1, 1)

    def test_top_five_one_hit(self):
        oracle = LinkOracle(frozenset({(T("a"), M("m0"))}))
        predicted = {(T("a"), M(f"m{i}")) for i in range(5)}
        p, r, f = link_prf(predicted, oracle)
        assert (p, r, f) == (Fraction(1, 5), 1, Fraction(1, 3))
        assert fmt(f) == "0.3333"

    def test_disjoint(self):
        assert link_prf({(T("a"), M("x"))}, LinkOracle(frozenset({(T("a"), M("y"))}))) == (
            0,
            0,
            NOT_APPLICABLE,
        )

    def test_empty_prediction(self):
        p, r, f = link_prf(set(), LinkOracle(frozenset({(T("a"), M("y"))})))
        assert p is NOT_APPLICABLE and r == 0 and f is NOT_APPLICABLE

    @given(
        st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4))),
        st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1),
    )
    def test_counting_identity(self, pred, truth):
        to_ids = lambda s: {(T(f"t{a}"), M(f"m{b}")) for a, b in s}  # noqa: E731
        p, r, _ = link_prf(to_ids(pred), LinkOracle(frozenset(to_ids(truth))))
        hits = len(pred & truth)
        assert r * len(truth) == hits
        if pred:
            assert p * len(pred) == hits

    def test_read_pairs(self):
        text = '{"test": "a", "method": "x"}\n\n{"test": "b", "method": "y"}\n'
        assert read_pairs(io.StringIO(text), str) == {("a", "x"), ("b", "y")}
        with pytest.raises(InputError):
            read_pairs(io.StringIO('{"test": "a"}\n'), str)


def test_localization_metrics_record():
    out = localization_metrics([1, 2, 101])
    assert out["faults"] == 3
    assert (out["acc@1"], out["acc@3"], out["acc@5"], out["acc@10"]) == (1, 2, 2, 2)
    assert out["wef_mean"] == "33.6667" and out["wef_mean_exact"] == "101/3"
    assert out["wef_median"] == "1.0000"
    empty = localization_metrics([])
    assert empty["faults"] == 0 and empty["wef_mean"] is None
