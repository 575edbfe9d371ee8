"""Adversarial (A, B, C) triples and pairwise metric preferences.

B is a paraphrase of the anchor A with little lexical overlap, C a
non-paraphrase with high overlap. A robust metric scores (A, B) above
(A, C).
"""

from __future__ import annotations

import logging
import random
import zlib
from dataclasses import dataclass, field
from typing import Sequence

from .data import FormatError, ScoreTable, tokenize
from .factors import lex_score

log = logging.getLogger(__name__)

DEFAULT_NOUN_TAGS = ("NOUN", "PROPN")
TIE_TOLERANCE = 1e-9


def is_noun(tag: str, noun_tags: Sequence[str] = DEFAULT_NOUN_TAGS) -> bool:
    return tag.startswith("NN") or tag in noun_tags


def _permute(tokens, pos_tags, rng: random.Random, noun_tags, retries: int = 10):
    if len(tokens) != len(pos_tags):
        raise ValueError(f"{len(tokens)} tokens but {len(pos_tags)} POS tags")
    slots = [i for i, t in enumerate(pos_tags) if is_noun(t, noun_tags)]
    tokens = list(tokens)
    if len(slots) < 2:
        return tokens, False
    nouns = [tokens[i] for i in slots]
    for _ in range(1 + retries):
        order = nouns[:]
        rng.shuffle(order)
        if order != nouns:
            break
    out = tokens[:]
    for i, w in zip(slots, order):
        out[i] = w
    return out, out != tokens


def permute_nouns(
    tokens: Sequence[str],
    pos_tags: Sequence[str],
    seed: int,
    noun_tags: Sequence[str] = DEFAULT_NOUN_TAGS,
) -> list[str]:
    """Shuffle the noun tokens among the noun positions.

    Shuffles that reproduce the input are redrawn up to 10 times; after
    that the unchanged sentence is returned.
    """
    out, _ = _permute(tokens, pos_tags, random.Random(seed), noun_tags)
    return out


def anchor_seed(seed: int, anchor_id: str) -> int:
    return seed ^ zlib.crc32(anchor_id.encode("utf-8"))


@dataclass(frozen=True)
class AdversarialTriple:
    id: str
    a_tokens: tuple[str, ...]
    b_tokens: tuple[str, ...]
    c_tokens: tuple[str, ...]
    lex_ab: float
    lex_ac: float

    def __post_init__(self):
        if not (self.a_tokens and self.b_tokens and self.c_tokens):
            raise ValueError(f"triple {self.id!r} has an empty sentence")

    @classmethod
    def make(cls, id, a, b, c, lowercase: bool = False) -> "AdversarialTriple":
        a, b, c = tuple(a), tuple(b), tuple(c)
        return cls(id, a, b, c, _lex(b, a, lowercase), _lex(c, a, lowercase))

    def consistent(self, lowercase: bool = False, tol: float = 1e-12) -> bool:
        return (
            abs(self.lex_ab - _lex(self.b_tokens, self.a_tokens, lowercase)) <= tol
            and abs(self.lex_ac - _lex(self.c_tokens, self.a_tokens, lowercase)) <= tol
        )


def _lex(candidate, reference, lowercase):
    if lowercase:
        candidate = [t.lower() for t in candidate]
        reference = [t.lower() for t in reference]
    return lex_score(candidate, reference)


@dataclass(frozen=True)
class FreitagItem:
    """Anchor with a human paraphrase and the anchor's POS tags."""

    id: str
    a_tokens: tuple[str, ...]
    b_tokens: tuple[str, ...]
    a_tags: tuple[str, ...]


@dataclass(frozen=True)
class PawsItem:
    """Anchor with labelled candidates; label True marks a paraphrase."""

    id: str
    a_tokens: tuple[str, ...]
    candidates: tuple[tuple[tuple[str, ...], bool], ...]


@dataclass
class TripleBuild:
    triples: list[AdversarialTriple]
    skipped: list[str] = field(default_factory=list)
    unchanged: list[str] = field(default_factory=list)


def build_triples(
    items: Sequence[FreitagItem] | Sequence[PawsItem],
    mode: str,
    seed: int = 0,
    top_k: int = 100,
    lowercase: bool = False,
    noun_tags: Sequence[str] = DEFAULT_NOUN_TAGS,
) -> TripleBuild:
    """Freitag mode builds C by permuting A's nouns. PAWS mode picks the
    least-overlapping paraphrase as B and the most-overlapping
    non-paraphrase as C, then keeps the ``top_k`` triples with the
    smallest lex(A, B)."""
    result = TripleBuild([])
    if mode == "freitag":
        for item in items:
            rng = random.Random(anchor_seed(seed, item.id))
            c, changed = _permute(item.a_tokens, item.a_tags, rng, noun_tags)
            if not changed:
                result.unchanged.append(item.id)
            result.triples.append(AdversarialTriple.make(item.id, item.a_tokens, item.b_tokens, c, lowercase))
        if result.unchanged:
            log.warning("%d anchors left unchanged by noun permutation", len(result.unchanged))
        return result
    if mode != "paws":
        raise ValueError(f"unknown triple mode {mode!r}")
    built = []
    for item in items:
        paras = [toks for toks, label in item.candidates if label]
        nonparas = [toks for toks, label in item.candidates if not label]
        if not paras or not nonparas:
            result.skipped.append(item.id)
            continue
        # ties resolved by candidate order
        b = min(paras, key=lambda t: _lex(t, item.a_tokens, lowercase))
        c = max(nonparas, key=lambda t: _lex(t, item.a_tokens, lowercase))
        built.append(AdversarialTriple.make(item.id, item.a_tokens, b, c, lowercase))
    built.sort(key=lambda t: t.lex_ab)
    result.triples = built[:top_k]
    if result.skipped:
        log.warning("%d PAWS anchors skipped (missing paraphrase or non-paraphrase)", len(result.skipped))
    return result


def _rows(path):
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line.split("\t")


def load_freitag(path) -> list[FreitagItem]:
    """TSV ``id<TAB>A<TAB>B<TAB>A_tags`` with space-separated tags."""
    items = []
    for lineno, f in _rows(path):
        if len(f) != 4:
            raise FormatError(f"{path}:{lineno}: expected id, A, B, A_tags")
        a, tags = tokenize(f[1]), tuple(f[3].split())
        if len(a) != len(tags):
            raise FormatError(f"{path}:{lineno}: {len(a)} tokens but {len(tags)} tags")
        items.append(FreitagItem(f[0], a, tokenize(f[2]), tags))
    return items


def load_paws(path) -> list[PawsItem]:
    """TSV ``id<TAB>A<TAB>candidate<TAB>label`` (label 1 = paraphrase);
    rows sharing an id form one anchor."""
    anchors: dict[str, tuple] = {}
    cands: dict[str, list] = {}
    for lineno, f in _rows(path):
        if len(f) != 4:
            raise FormatError(f"{path}:{lineno}: expected id, A, candidate, label")
        if f[3] not in ("0", "1"):
            raise FormatError(f"{path}:{lineno}: label must be 0 or 1")
        a = tokenize(f[1])
        if f[0] in anchors and anchors[f[0]] != a:
            raise FormatError(f"{path}:{lineno}: anchor text differs for id {f[0]!r}")
        anchors.setdefault(f[0], a)
        cands.setdefault(f[0], []).append((tokenize(f[2]), f[3] == "1"))
    return [PawsItem(k, anchors[k], tuple(cands[k])) for k in anchors]


def write_triples(path, triples: Sequence[AdversarialTriple]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in triples:
            f.write(
                "\t".join(
                    [t.id, " ".join(t.a_tokens), " ".join(t.b_tokens), " ".join(t.c_tokens), repr(t.lex_ab), repr(t.lex_ac)]
                )
                + "\n"
            )


def load_triples(path, lowercase: bool = False) -> list[AdversarialTriple]:
    out = []
    for lineno, f in _rows(path):
        if len(f) != 6:
            raise FormatError(f"{path}:{lineno}: expected id, A, B, C, lex_ab, lex_ac")
        try:
            t = AdversarialTriple(f[0], tokenize(f[1]), tokenize(f[2]), tokenize(f[3]), float(f[4]), float(f[5]))
        except ValueError as e:
            raise FormatError(f"{path}:{lineno}: {e}") from None
        if not t.consistent(lowercase, tol=1e-9):
            raise FormatError(f"{path}:{lineno}: stored overlaps disagree with the sentences")
        out.append(t)
    return out


def lex_metric(triples: Sequence[AdversarialTriple], lowercase: bool = False) -> tuple[ScoreTable, ScoreTable]:
    """Use LEX itself as the metric under test."""
    ab = {t.id: _lex(t.b_tokens, t.a_tokens, lowercase) for t in triples}
    ac = {t.id: _lex(t.c_tokens, t.a_tokens, lowercase) for t in triples}
    return ScoreTable("lex", ab), ScoreTable("lex", ac)


@dataclass(frozen=True)
class PreferenceReport:
    metric: str
    rows: tuple[tuple[str, float, float], ...]
    prefer_b: float
    prefer_c: float
    ties: float
    mean_gap: float

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "n": len(self.rows),
            "prefer_b": self.prefer_b,
            "prefer_c": self.prefer_c,
            "ties": self.ties,
            "mean_gap": self.mean_gap,
        }

    def rows_tsv(self) -> str:
        lines = ["id\tm_ab\tm_ac"]
        lines += [f"{i}\t{ab!r}\t{ac!r}" for i, ab, ac in self.rows]
        return "\n".join(lines) + "\n"


def evaluate_preferences(
    triples: Sequence[AdversarialTriple],
    scores_ab: ScoreTable,
    scores_ac: ScoreTable,
    metric: str | None = None,
) -> PreferenceReport:
    """Fractions of triples where m(A,B) > m(A,C), the reverse, and ties
    (|difference| <= 1e-9); mean_gap is the mean of m(A,B) - m(A,C)."""
    if not triples:
        raise ValueError("no triples to evaluate")
    rows = []
    b = c = tie = 0
    gap = 0.0
    for t in triples:
        if t.id not in scores_ab or t.id not in scores_ac:
            raise KeyError(f"metric scores missing for triple {t.id!r}")
        ab, ac = scores_ab[t.id], scores_ac[t.id]
        rows.append((t.id, ab, ac))
        d = ab - ac
        gap += d
        if abs(d) <= TIE_TOLERANCE:
            tie += 1
        elif d > 0:
            b += 1
        else:
            c += 1
    n = len(rows)
    return PreferenceReport(metric or scores_ab.metric, tuple(rows), b / n, c / n, tie / n, gap / n)
