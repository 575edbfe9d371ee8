from itertools import combinations

import numpy as np
import pytest

from metricfactors.data import EmbeddingTable
from metricfactors.morph import (
    MorphLexicon,
    build_morph_lexicon,
    canonical_feats,
    load_tagged_words,
    morph_overlap,
    retrofit_embeddings,
    retrofit_objective,
)


class TestLexicon:
    def test_participle_pair(self):
        lex = build_morph_lexicon(
            [("reached", "Tense=Past|VerbForm=Part"), ("combined", "VerbForm=Part|Tense=Past"), ("stay", "VerbForm=Inf")]
        )
        assert dict(lex.pairs) == {("combined", "reached"): "Tense=Past|VerbForm=Part"}

    def test_cross_lingual_pair(self):
        lex = build_morph_lexicon([("stay", "VerbForm=Inf"), ("sein", "VerbForm=Inf")])
        assert ("stay", "sein") in lex

    def test_unique_bundle(self):
        assert len(build_morph_lexicon([("went", "Tense=Past"), ("goes", "Tense=Pres")])) == 0

    def test_three_words(self):
        lex = build_morph_lexicon([(w, "Number=Plur") for w in ("dogs", "cats", "mice")])
        assert set(lex.pairs) == {("cats", "dogs"), ("cats", "mice"), ("dogs", "mice")}

    def test_empty_bundles_and_self_pairs_excluded(self):
        lex = build_morph_lexicon([("the", "_"), ("a", ""), ("dog", "Number=Sing"), ("dog", "Number=Sing")])
        assert len(lex) == 0

    def test_pair_shared_by_two_bundles_kept_once(self):
        lex = build_morph_lexicon([("a", "X=1"), ("b", "X=1"), ("a", "Y=2"), ("b", "Y=2")])
        assert dict(lex.pairs) == {("a", "b"): "X=1"}

    def test_cap_is_deterministic(self):
        words = [(f"w{i:03d}", "Case=Nom") for i in range(60)]  # 1770 candidate pairs
        first = build_morph_lexicon(words, cap=100, seed=5)
        again = build_morph_lexicon(list(reversed(words)), cap=100, seed=5)
        other = build_morph_lexicon(words, cap=100, seed=6)
        assert len(first) == 100
        assert dict(first.pairs) == dict(again.pairs)
        assert dict(first.pairs) != dict(other.pairs)
        everything = set(combinations(sorted(w for w, _ in words), 2))
        assert set(first.pairs) <= everything

    def test_invalid_pairs_rejected(self):
        with pytest.raises(ValueError):
            MorphLexicon({("a", "a"): "X=1"})
        with pytest.raises(ValueError):
            MorphLexicon({("b", "a"): "X=1"})

    def test_canonical_feats(self):
        assert canonical_feats("VerbForm=Part|Tense=Past") == "Tense=Past|VerbForm=Part"
        assert canonical_feats("_") == ""

    def test_load_tagged_words(self, write):
        path = write("tags.tsv", "# word feats\nreached\tTense=Past|VerbForm=Part\nsein\tVerbForm=Inf\n")
        assert load_tagged_words(path)[1] == ("sein", "VerbForm=Inf")


class TestOverlap:
    def test_full_and_none(self):
        x = [("a", "N=1"), ("b", "N=1")]
        assert morph_overlap(x, [("c", "N=1")]) == 1.0
        assert morph_overlap(x, [("c", "N=2")]) == 0.0
        assert morph_overlap(x, [("c", "_")]) == 0.0

    def test_fraction(self):
        x = [("a", "N=1"), ("b", "N=2")]
        y = [("c", "N=1"), ("d", "N=3")]
        assert morph_overlap(x, y) == 0.25


def _random_graph(seed, n=50, dim=6, p=0.08):
    rng = np.random.default_rng(seed)
    words = [f"w{i:02d}" for i in range(n)]
    base = EmbeddingTable.from_dict({w: rng.normal(size=dim) for w in words})
    pairs = {(a, b): "F=1" for a, b in combinations(words, 2) if rng.random() < p}
    return base, MorphLexicon(pairs)


class TestRetrofit:
    def test_empty_lexicon_is_identity(self):
        base, _ = _random_graph(0)
        out = retrofit_embeddings(base, MorphLexicon({}))
        assert out.index == base.index
        assert out.matrix.tobytes() == base.matrix.tobytes()

    def test_two_node_fixed_point(self):
        u, v = np.array([1.0, 0.0, 2.0]), np.array([-1.0, 3.0, 0.5])
        base = EmbeddingTable.from_dict({"u": u, "v": v, "w": [9.0, 9.0, 9.0]})
        out = retrofit_embeddings(base, MorphLexicon({("u", "v"): "X=1"}), iterations=60)
        # fixed point of q_u = (u + q_v)/2, q_v = (v + q_u)/2
        system = np.array([[1.0, -0.5], [-0.5, 1.0]])
        solved = np.linalg.solve(system, np.vstack([u / 2, v / 2]))
        np.testing.assert_allclose(out["u"], solved[0], atol=1e-8)
        np.testing.assert_allclose(out["v"], solved[1], atol=1e-8)
        np.testing.assert_allclose(out["u"], 2 / 3 * u + 1 / 3 * v, atol=1e-8)
        np.testing.assert_array_equal(out["w"], [9.0, 9.0, 9.0])

    def test_objective_non_increasing(self):
        for seed in range(5):
            base, lex = _random_graph(seed)
            values = [retrofit_objective(base, base, lex)]
            for k in range(1, 11):
                values.append(retrofit_objective(base, retrofit_embeddings(base, lex, k), lex))
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:])), values
            assert values[-1] < values[0]

    def test_words_outside_graph_unchanged(self):
        base, lex = _random_graph(1, p=0.02)
        out = retrofit_embeddings(base, lex)
        graph_words = {w for pair in lex.pairs for w in pair}
        for w in base.words():
            if w not in graph_words:
                np.testing.assert_array_equal(out[w], base[w])

    def test_lexicon_words_missing_from_base_ignored(self):
        base = EmbeddingTable.from_dict({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        lex = MorphLexicon({("a", "zz"): "X=1", ("a", "b"): "X=1"})
        out = retrofit_embeddings(base, lex, iterations=60)
        np.testing.assert_allclose(out["a"], [2 / 3, 1 / 3], atol=1e-8)

    def test_does_not_mutate_input(self):
        base, lex = _random_graph(2)
        before = base.matrix.copy()
        retrofit_embeddings(base, lex)
        np.testing.assert_array_equal(base.matrix, before)

    def test_iterations_must_be_positive(self):
        base, lex = _random_graph(2)
        with pytest.raises(ValueError):
            retrofit_embeddings(base, lex, iterations=0)
