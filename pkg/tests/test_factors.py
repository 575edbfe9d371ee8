import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metricfactors.data import EmbeddingTable, ScoreTable, SentencePair, join_factors
from metricfactors.factors import (
    FactorError,
    clb_scores,
    factor_maps,
    lex_pair,
    lex_score,
    mor_score,
    sem_score,
)
from metricfactors.regression import fit_ols
from oracles import clipped_precision


class TestSem:
    def test_sts_examples(self):
        fighting = SentencePair("s1", tuple("Some men are fighting.".split()), tuple("Two men are fighting.".split()), 4.25)
        writing = SentencePair("s2", tuple("A woman is writing.".split()), tuple("Eine Frau schwimmt.".split()), 0.1)
        assert sem_score(fighting) == 4.25
        assert sem_score(writing) == 0.1

    def test_missing(self):
        with pytest.raises(FactorError, match="'s3'"):
            sem_score(SentencePair("s3", ("a",), ("b",)))


class TestLex:
    def test_identical(self):
        s = "the cat sat on the mat".split()
        assert lex_score(s, s) == 1.0

    def test_disjoint(self):
        assert lex_score(["a", "b"], ["c", "d"]) == 0.0

    def test_clipping(self):
        assert lex_score(["a", "a", "b"], ["a", "c"]) == 1 / 3

    def test_empty_candidate(self):
        with pytest.raises(FactorError):
            lex_score([], ["a"])

    def test_direction(self):
        x, y = ["a", "b", "c", "d"], ["a", "z"]
        assert lex_pair(x, y, "hypothesis") == 0.5
        assert lex_pair(x, y, "reference") == 0.25
        assert lex_pair(x, y, "symmetric") == 0.375
        with pytest.raises(ValueError):
            lex_pair(x, y, "sideways")

    def test_brevity_penalty(self):
        cand, ref = ["a", "b"], ["a", "b", "c", "d"]
        assert lex_score(cand, ref) == 1.0
        assert lex_score(cand, ref, brevity_penalty=True) == pytest.approx(math.exp(1 - 4 / 2))
        assert lex_score(ref, cand, brevity_penalty=True) == 0.5

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.sampled_from("abcdefg"), min_size=1, max_size=15),
        st.lists(st.sampled_from("abcdefg"), min_size=0, max_size=15),
        st.randoms(use_true_random=False),
    )
    def test_oracle_and_order_invariance(self, cand, ref, rnd):
        value = lex_score(cand, ref)
        assert abs(value - clipped_precision(cand, ref)) <= 1e-12
        assert 0.0 <= value <= 1.0
        shuffled = cand[:]
        rnd.shuffle(shuffled)
        assert lex_score(shuffled, ref) == value
        assert lex_score(cand, cand) == 1.0


def _table(**vectors):
    return EmbeddingTable.from_dict({k: np.asarray(v, dtype=float) for k, v in vectors.items()})


class TestMor:
    def test_identical(self):
        table = _table(a=[1, 2], b=[-3, 1])
        assert mor_score(["a", "b"], ["a", "b"], table) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal(self):
        table = _table(a=[1, 0], b=[0, 1], c=[0, 2])
        assert mor_score(["a"], ["b", "c"], table) == 0.0

    def test_hand_computed(self):
        # x: mean((1,0),(0,1)) = (0.5,0.5); y: mean((1,1),(2,0)) = (1.5,0.5)
        # dot = 1.0, norms sqrt(0.5) and sqrt(2.5) -> 1/sqrt(1.25)
        table = _table(a=[1, 0], b=[0, 1], c=[1, 1], d=[2, 0])
        assert mor_score(["a", "b"], ["c", "d"], table) == pytest.approx(0.8944271909999159, abs=1e-15)

    def test_oov_skipped(self):
        table = _table(a=[1, 0], b=[0, 1])
        assert mor_score(["a", "zzz"], ["a"], table) == pytest.approx(1.0)

    def test_all_oov(self):
        with pytest.raises(FactorError, match="'p9'"):
            mor_score(["zzz"], ["a"], _table(a=[1, 0]), pair_id="p9")

    def test_zero_norm(self):
        with pytest.raises(FactorError, match="zero-norm"):
            mor_score(["a", "b"], ["a"], _table(a=[1, 0], b=[-1, 0]))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000))
    def test_symmetric_and_order_free(self, seed):
        rng = np.random.default_rng(seed)
        words = list("abcdef")
        table = EmbeddingTable.from_dict({w: rng.normal(size=4) for w in words})
        x = list(rng.choice(words, size=rng.integers(1, 6)))
        y = list(rng.choice(words, size=rng.integers(1, 6)))
        v = mor_score(x, y, table)
        assert -1.0 <= v <= 1.0
        assert v == pytest.approx(mor_score(y, x, table), abs=1e-12)
        assert v == pytest.approx(mor_score(x[::-1], y[::-1], table), abs=1e-12)


class TestClb:
    def test_passthrough(self):
        assert clb_scores(ScoreTable("xms", {"a": 0.9, "b": 0.95})) == {"a": 0.9, "b": 0.95}

    def test_constant_column_is_not_significant(self):
        # a metric without cross-lingual bias scores parallel data ~constantly;
        # tiny jitter keeps the design non-singular, the fit must ignore it
        rng = np.random.default_rng(3)
        ids = [f"p{i}" for i in range(400)]
        sem = rng.normal(size=400)
        target = ScoreTable("m", dict(zip(ids, 0.7 * sem + 0.3 * rng.normal(size=400))))
        clb = clb_scores(ScoreTable("m", dict(zip(ids, 0.999 + 1e-6 * rng.normal(size=400)))))
        table = join_factors(ids, {"SEM": dict(zip(ids, sem)), "CLB": clb}, target).zscored()
        fit = fit_ols(table)
        assert not fit.significant("CLB")
        assert fit.significant("SEM")

    def test_empty_table_fails_at_join(self):
        with pytest.raises(ValueError):
            join_factors(["p1"], {"CLB": clb_scores(ScoreTable("m", {}))}, ScoreTable("m", {"p1": 1.0}))


def test_factor_maps_skip_and_fold():
    pairs = [
        SentencePair("p1", ("The", "Cat"), ("the", "cat"), sem=1.0),
        SentencePair("p2", ("zzz",), ("cat",)),
    ]
    table = _table(the=[1, 0], cat=[0, 1])
    maps, skipped = factor_maps(pairs, ["SEM", "LEX", "MOR"], retro=table, lowercase=True)
    assert maps["LEX"] == {"p1": 1.0, "p2": 0.0}
    assert maps["SEM"] == {"p1": 1.0}
    assert skipped == {"SEM": ["p2"], "LEX": [], "MOR": ["p2"]}
    cased, _ = factor_maps(pairs[:1], ["LEX"], lowercase=False)
    assert cased["LEX"]["p1"] == 0.0
