"""Acceptance criteria. Each test records one PASS/FAIL line, printed in the
"acceptance criteria" section at the end of the pytest run."""

import random
import time
from itertools import combinations

import numpy as np

from metricfactors.adversarial import build_triples, evaluate_preferences, lex_metric, load_freitag
from metricfactors.cli import main
from metricfactors.data import EmbeddingTable, FactorTable, ScoreTable, load_score_table
from metricfactors.ensemble import evaluate_ensembles
from metricfactors.factors import lex_score, syn_score
from metricfactors.morph import MorphLexicon, retrofit_embeddings, retrofit_objective
from metricfactors.regression import RegressionFit, fit_ols, render_table
from metricfactors.ted import tree_edit_distance
from conftest import FIXTURE_DIR, GOLDEN_DIR
from oracles import brute_force_ted, clipped_precision, normal_equation_fit, random_tree
from test_ted import KNEW_LEFT, KNEW_RIGHT, MOTHER_LEFT, MOTHER_RIGHT

PLANTED = np.array([0.28, 0.15, 0.64, -0.06])
NAMES = ("SEM", "SYN", "LEX", "MOR")


def test_ted_matches_brute_force(criterion):
    with criterion("TED equals brute force on 500 random pairs (<= 6 nodes), < 10 s"):
        rng = random.Random(2021)
        pairs = [(random_tree(rng, rng.randint(1, 6)), random_tree(rng, rng.randint(1, 6))) for _ in range(500)]
        start = time.perf_counter()
        mismatches = [(a.heads, b.heads) for a, b in pairs if tree_edit_distance(a, b) != brute_force_ted(a, b)]
        elapsed = time.perf_counter() - start
        assert not mismatches, mismatches[:3]
        assert elapsed < 10.0, elapsed


def test_worked_examples(criterion):
    with criterion("worked examples: TED 2 and syn 0.8 on both example tree pairs"):
        assert tree_edit_distance(KNEW_LEFT, KNEW_RIGHT) == 2
        assert tree_edit_distance(MOTHER_LEFT, MOTHER_RIGHT) == 2
        assert syn_score(KNEW_LEFT, KNEW_RIGHT) == 1 - 2 / (6 + 4)
        assert syn_score(MOTHER_LEFT, MOTHER_RIGHT) == 1 - 2 / (5 + 5)
        assert round(syn_score(KNEW_LEFT, KNEW_RIGHT), 12) == round(syn_score(MOTHER_LEFT, MOTHER_RIGHT), 12) == 0.8


def test_lex_matches_oracle(criterion):
    with criterion("lex_score equals clipped-precision oracle on 200 pairs, 1e-12"):
        rng = random.Random(3)
        vocab = [f"w{i}" for i in range(8)]
        worst = 0.0
        for _ in range(200):
            cand = [rng.choice(vocab) for _ in range(rng.randint(1, 15))]
            ref = [rng.choice(vocab) for _ in range(rng.randint(0, 15))]
            worst = max(worst, abs(lex_score(cand, ref) - clipped_precision(cand, ref)))
        assert worst <= 1e-12, worst


def planted_design(seed, coefficients=PLANTED, n=1000, sigma=0.1):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 4))
    y = X @ coefficients + rng.normal(scale=sigma, size=n)
    ids = tuple(f"r{i}" for i in range(n))
    return FactorTable(ids, {name: X[:, j] for j, name in enumerate(NAMES)}, y, "planted")


def test_ols_recovery(criterion):
    with criterion("OLS recovers planted weights (+-0.05), oracle 1e-8, R2 +-0.03, < 1 s"):
        start = time.perf_counter()
        # factors z-normalized, target kept on the planted scale so the
        # planted weights are the population coefficients
        table = planted_design(4).zscored(target=False)
        fit = fit_ols(table)
        elapsed = time.perf_counter() - start
        got = np.array([fit.coefficients[n] for n in NAMES])
        assert np.all(np.abs(got - PLANTED) <= 0.05), got
        oracle = normal_equation_fit(table.design(), table.target)
        assert abs(fit.intercept - oracle[0]) <= 1e-8
        assert np.all(np.abs(got - oracle[1:]) <= 1e-8), got - oracle[1:]
        signal = float(PLANTED @ PLANTED)
        analytic = signal / (signal + 0.1**2)
        assert abs(fit.r_squared - analytic) <= 0.03, (fit.r_squared, analytic)
        assert elapsed < 1.0, elapsed


def test_significance_calibration(criterion):
    with criterion("zero-coefficient factor non-significant in >= 90 of 100 trials"):
        null = np.array([0.28, 0.15, 0.64, 0.0])
        flagged = sum(not fit_ols(planted_design(seed, null).zscored()).significant("MOR") for seed in range(100))
        assert flagged >= 90, flagged


def test_retrofitting(criterion):
    with criterion("retrofit: monotone objective, 2-node fixed point 1e-8, empty lexicon identity"):
        rng = np.random.default_rng(6)
        words = [f"w{i:02d}" for i in range(50)]
        base = EmbeddingTable.from_dict({w: rng.normal(size=8) for w in words})
        lex = MorphLexicon({(a, b): "F=1" for a, b in combinations(words, 2) if rng.random() < 0.1})
        values = [retrofit_objective(base, base, lex)]
        values += [retrofit_objective(base, retrofit_embeddings(base, lex, k), lex) for k in range(1, 11)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:])), values

        u, v = np.array([0.5, -1.0, 2.0]), np.array([3.0, 1.0, -1.0])
        pair = retrofit_embeddings(EmbeddingTable.from_dict({"u": u, "v": v}), MorphLexicon({("u", "v"): "F=1"}), 60)
        assert np.max(np.abs(pair["u"] - (2 * u + v) / 3)) <= 1e-8
        assert np.max(np.abs(pair["v"] - (u + 2 * v) / 3)) <= 1e-8

        same = retrofit_embeddings(base, MorphLexicon({}))
        assert same.matrix.tobytes() == base.matrix.tobytes()


def test_adversarial_by_construction(criterion):
    with criterion("noun-permutation fixture: lex prefers C (1.0), oracle prefers B (1.0)"):
        triples = build_triples(load_freitag(FIXTURE_DIR / "freitag.tsv"), "freitag", seed=20211107, lowercase=True).triples
        assert triples
        ab, ac = lex_metric(triples, lowercase=True)
        assert evaluate_preferences(triples, ab, ac).prefer_c == 1.0
        oracle_ab = load_score_table(FIXTURE_DIR / "oracle_ab.tsv", "oracle")
        oracle_ac = load_score_table(FIXTURE_DIR / "oracle_ac.tsv", "oracle")
        assert evaluate_preferences(triples, oracle_ab, oracle_ac).prefer_b == 1.0


def test_ensemble(criterion):
    with criterion("orthogonal-halves ensemble beats both members; duplicate combo exactly 0%"):
        rng = np.random.default_rng(8)
        n = 500
        f1, f2 = rng.standard_normal(n), rng.standard_normal(n)
        ids = [f"s{i}" for i in range(n)]

        def tab(name, values):
            return ScoreTable(name, dict(zip(ids, values.tolist())))

        members = {"m1": tab("m1", f1 + 0.2 * rng.standard_normal(n)), "m2": tab("m2", f2 + 0.2 * rng.standard_normal(n))}
        mixed, dup = evaluate_ensembles(members, tab("human", f1 + f2), [["m1", "m2"], ["m1", "m1"]])
        assert mixed.ensemble_r > mixed.member_r["m1"] and mixed.ensemble_r > mixed.member_r["m2"]
        assert dup.improvement == 0.0


def _run_pipeline(out):
    config = str(FIXTURE_DIR / "config.toml")
    for command in ("factors", "regress", "adversarial", "ensemble"):
        assert main(["--config", config, "--out", str(out), "--seed", "20211107", command]) == 0, command
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


def test_end_to_end_determinism(criterion, tmp_path):
    with criterion("full CLI pipeline byte-identical across reruns, each run < 30 s"):
        timings = []
        outputs = []
        for k in range(2):
            start = time.perf_counter()
            outputs.append(_run_pipeline(tmp_path / f"run{k}"))
            timings.append(time.perf_counter() - start)
        assert outputs[0].keys() == outputs[1].keys()
        assert len(outputs[0]) >= 10
        assert [k for k in outputs[0] if outputs[0][k] != outputs[1][k]] == []
        assert max(timings) < 30.0, timings


def test_table_layout_matches_golden(criterion):
    with criterion("rendered regression rows match the golden table layout"):
        def fit(values, p_values, r2):
            return RegressionFit(dict(zip(NAMES, values)), 0.01, dict(zip(NAMES, p_values)), r2, 1000)

        fits = [
            fit([0.28, 0.15, 0.64, -0.06], [1e-6, 1e-4, 1e-9, 0.01], 0.76),
            fit([0.27, 0.16, 0.61, -0.01], [1e-6, 1e-4, 1e-9, 0.40], 0.74),
        ]
        rendered = render_table(fits, ["MoverScore", "BERTScore"])
        assert rendered == (GOLDEN_DIR / "regression_rows.tsv").read_text(encoding="utf-8")
