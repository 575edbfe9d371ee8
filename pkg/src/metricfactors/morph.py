"""Morphological lexicons and retrofitting of static word vectors onto them."""

from __future__ import annotations

import math
import random
import zlib
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .data import EmbeddingTable, FormatError

DEFAULT_PAIR_CAP = 100_000


def canonical_feats(feats: str) -> str:
    """Sort a UD FEATS string so identical bundles compare equal; ``_`` and
    the empty string map to ``""``."""
    feats = feats.strip()
    if not feats or feats == "_":
        return ""
    return "|".join(sorted(p for p in feats.split("|") if p))


@dataclass(frozen=True)
class MorphLexicon:
    """Unordered word pairs that share a feature bundle.

    Keys are ``(a, b)`` with ``a < b``; values are the shared bundle.
    """

    pairs: Mapping[tuple[str, str], str]

    def __post_init__(self):
        for a, b in self.pairs:
            if a == b:
                raise ValueError(f"self pair ({a!r}, {a!r}) in lexicon")
            if not a < b:
                raise ValueError(f"pair ({a!r}, {b!r}) is not in canonical order")

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        a, b = pair
        return (min(a, b), max(a, b)) in self.pairs

    def neighbours(self, vocabulary=None) -> dict[str, set[str]]:
        graph: dict[str, set[str]] = defaultdict(set)
        for a, b in self.pairs:
            if vocabulary is not None and (a not in vocabulary or b not in vocabulary):
                continue
            graph[a].add(b)
            graph[b].add(a)
        return dict(graph)


def _unrank_pair(k: int) -> tuple[int, int]:
    # pairs (i, j), i < j, enumerated by j then i
    j = (1 + math.isqrt(1 + 8 * k)) // 2
    i = k - j * (j - 1) // 2
    return i, j


def build_morph_lexicon(
    tagged_words: Iterable[tuple[str, str]],
    cap: int = DEFAULT_PAIR_CAP,
    seed: int = 0,
) -> MorphLexicon:
    """Pair up every two distinct words that carry an identical bundle.

    Groups with more than ``cap`` candidate pairs are subsampled with a
    generator seeded from ``seed`` and the bundle, so the result does not
    depend on input order.
    """
    groups: dict[str, set[str]] = defaultdict(set)
    for word, feats in tagged_words:
        bundle = canonical_feats(feats)
        if bundle:
            groups[bundle].add(word)
    pairs: dict[tuple[str, str], str] = {}
    for bundle in sorted(groups):
        words = sorted(groups[bundle])
        total = len(words) * (len(words) - 1) // 2
        if total <= cap:
            ranks = range(total)
        else:
            rng = random.Random(seed ^ zlib.crc32(bundle.encode("utf-8")))
            ranks = sorted(rng.sample(range(total), cap))
        for k in ranks:
            i, j = _unrank_pair(k)
            pairs.setdefault((words[i], words[j]), bundle)
    return MorphLexicon(pairs)


def load_tagged_words(path) -> list[tuple[str, str]]:
    """TSV ``word<TAB>FEATS``."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise FormatError(f"{path}:{lineno}: expected word<TAB>feats")
            out.append((fields[0], fields[1]))
    return out


def morph_overlap(x_tagged: Iterable[tuple[str, str]], y_tagged: Iterable[tuple[str, str]]) -> float:
    """Fraction of (x-side word, y-side word) pairs with identical bundles.

    Each side is reduced to its distinct (word, bundle) entries; untagged
    words are ignored. Returns 0.0 when either side has no tagged word.
    """
    def counts(tagged):
        entries = {(w, canonical_feats(f)) for w, f in tagged}
        c: dict[str, int] = defaultdict(int)
        for _, b in entries:
            if b:
                c[b] += 1
        return c

    cx, cy = counts(x_tagged), counts(y_tagged)
    nx, ny = sum(cx.values()), sum(cy.values())
    if nx == 0 or ny == 0:
        return 0.0
    return sum(cx[b] * cy.get(b, 0) for b in cx) / (nx * ny)


def _graph(base: EmbeddingTable, lexicon: MorphLexicon) -> dict[str, list[str]]:
    nb = lexicon.neighbours(vocabulary=base.index)
    return {w: sorted(nb[w]) for w in sorted(nb)}


def retrofit_embeddings(base: EmbeddingTable, lexicon: MorphLexicon, iterations: int = 10) -> EmbeddingTable:
    """Retrofit vectors to the lexicon graph.

    Each sweep replaces q_i by (q̂_i + mean of neighbour q_j) / 2, which is
    the update with alpha = 1 and beta_ij = 1/deg(i). Updates are applied
    in place in sorted word order. Words outside the graph keep their
    original vectors.
    """
    if iterations < 1:
        raise ValueError("iterations must be a positive integer")
    graph = _graph(base, lexicon)
    matrix = np.array(base.matrix, dtype=float, copy=True)
    if graph:
        idx = base.index
        plan = [(idx[w], np.array([idx[v] for v in nbrs])) for w, nbrs in graph.items()]
        original = base.matrix
        for _ in range(iterations):
            for i, nbrs in plan:
                matrix[i] = (original[i] + matrix[nbrs].mean(axis=0)) / 2.0
    return EmbeddingTable(base.dimension, dict(base.index), matrix, base.duplicates)


def retrofit_objective(base: EmbeddingTable, retro: EmbeddingTable, lexicon: MorphLexicon) -> float:
    """Degree-weighted retrofitting loss minimised by the update above:

        sum_i deg(i) * |q_i - q̂_i|^2  +  sum_{edges (i, j)} |q_i - q_j|^2

    Only graph words contribute.
    """
    graph = _graph(base, lexicon)
    total = 0.0
    for w, nbrs in graph.items():
        q = retro[w]
        total += len(nbrs) * float(np.sum((q - base[w]) ** 2))
        for v in nbrs:
            if w < v:
                total += float(np.sum((q - retro[v]) ** 2))
    return total
