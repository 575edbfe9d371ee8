"""Per-pair linguistic factor scores: SEM, SYN, LEX, MOR and CLB."""

from __future__ import annotations

import math
from collections import Counter
from typing import Mapping, Sequence

import numpy as np

from .conllu import DependencyTree
from .data import EmbeddingTable, ScoreTable, SentencePair
from .ted import tree_edit_distance

LEX_DIRECTIONS = ("hypothesis", "reference", "symmetric")


class FactorError(ValueError):
    """A factor cannot be computed for a particular pair."""


def sem_score(pair: SentencePair) -> float:
    if pair.sem is None:
        raise FactorError(f"pair {pair.id!r} has no human semantic score")
    return pair.sem


def syn_score(t1: DependencyTree, t2: DependencyTree) -> float:
    """1 - TED / (l1 + l2), with l the node count of each tree."""
    return 1.0 - tree_edit_distance(t1, t2) / (len(t1) + len(t2))


def lex_score(
    candidate: Sequence[str],
    reference: Sequence[str],
    brevity_penalty: bool = False,
) -> float:
    """Clipped unigram precision of ``candidate`` against ``reference``.

    Each candidate word is credited at most as often as it occurs in the
    reference. With ``brevity_penalty`` the BLEU penalty exp(1 - r/c) is
    applied when the candidate is not longer than the reference.
    """
    if not candidate:
        raise FactorError("empty candidate sentence")
    ref_counts = Counter(reference)
    matched = sum(min(n, ref_counts[w]) for w, n in Counter(candidate).items())
    score = matched / len(candidate)
    if brevity_penalty and reference and len(candidate) <= len(reference):
        score *= math.exp(1.0 - len(reference) / len(candidate))
    return score


def lex_pair(
    x_tokens: Sequence[str],
    y_tokens: Sequence[str],
    direction: str = "hypothesis",
    brevity_penalty: bool = False,
) -> float:
    """LEX for a pair; ``hypothesis`` scores y against x, ``reference``
    scores x against y and ``symmetric`` averages both."""
    if direction == "hypothesis":
        return lex_score(y_tokens, x_tokens, brevity_penalty)
    if direction == "reference":
        return lex_score(x_tokens, y_tokens, brevity_penalty)
    if direction == "symmetric":
        return 0.5 * (
            lex_score(y_tokens, x_tokens, brevity_penalty)
            + lex_score(x_tokens, y_tokens, brevity_penalty)
        )
    raise ValueError(f"unknown LEX direction {direction!r}; expected one of {LEX_DIRECTIONS}")


def _mean_vector(tokens: Sequence[str], table: EmbeddingTable, side: str, pair_id):
    rows = [table.index[t] for t in tokens if t in table.index]
    if not rows:
        raise FactorError(f"pair {pair_id!r}: no {side} token has an embedding")
    return table.matrix[rows].mean(axis=0)


def mor_score(
    x_tokens: Sequence[str],
    y_tokens: Sequence[str],
    retro: EmbeddingTable,
    pair_id: str | None = None,
) -> float:
    """Cosine between the averaged (retrofitted) vectors of both sentences.
    Out-of-vocabulary tokens are skipped."""
    u = _mean_vector(x_tokens, retro, "x", pair_id)
    v = _mean_vector(y_tokens, retro, "y", pair_id)
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise FactorError(f"pair {pair_id!r}: zero-norm sentence vector")
    cos = float(np.dot(u, v)) / (nu * nv)
    return min(1.0, max(-1.0, cos))


def clb_scores(metric_scores_on_parallel: ScoreTable) -> dict[str, float]:
    """The metric's own scores on (source, translation) pairs, used as a
    cross-lingual-bias regressor."""
    return dict(metric_scores_on_parallel.scores)


def align_trees(pairs: Sequence[SentencePair], trees: Sequence[DependencyTree], side: str) -> dict[str, DependencyTree]:
    """Match parses to pairs by ``# sent_id`` when every tree has one,
    otherwise by position."""
    if trees and all(t.sent_id is not None for t in trees):
        by_id = {t.sent_id: t for t in trees}
        return {p.id: by_id[p.id] for p in pairs if p.id in by_id}
    if len(trees) != len(pairs):
        raise FactorError(
            f"{side} parses: {len(trees)} trees for {len(pairs)} pairs and no sent_id comments"
        )
    return {p.id: t for p, t in zip(pairs, trees)}


def fold(tokens: Sequence[str], lowercase: bool) -> tuple[str, ...]:
    return tuple(t.lower() for t in tokens) if lowercase else tuple(tokens)


def factor_maps(
    pairs: Sequence[SentencePair],
    active: Sequence[str],
    x_trees: Mapping[str, DependencyTree] | None = None,
    y_trees: Mapping[str, DependencyTree] | None = None,
    retro: EmbeddingTable | None = None,
    lowercase: bool = True,
    lex_direction: str = "hypothesis",
    brevity_penalty: bool = False,
) -> tuple[dict[str, dict[str, float]], dict[str, list[str]]]:
    """Score every pair on each active factor except CLB.

    Pairs for which a factor cannot be computed are left out of that
    factor's map and reported in the second return value.
    """
    out: dict[str, dict[str, float]] = {f: {} for f in active}
    skipped: dict[str, list[str]] = {f: [] for f in active}
    for p in pairs:
        x, y = fold(p.x_tokens, lowercase), fold(p.y_tokens, lowercase)
        for f in active:
            try:
                if f == "SEM":
                    value = sem_score(p)
                elif f == "SYN":
                    tx, ty = x_trees.get(p.id), y_trees.get(p.id)
                    if tx is None or ty is None:
                        raise FactorError(f"pair {p.id!r}: missing parse")
                    value = syn_score(tx, ty)
                elif f == "LEX":
                    value = lex_pair(x, y, lex_direction, brevity_penalty)
                elif f == "MOR":
                    value = mor_score(x, y, retro, p.id)
                else:
                    raise ValueError(f"factor {f} is not computed per pair")
            except FactorError:
                skipped[f].append(p.id)
                continue
            out[f][p.id] = value
    return out, skipped
