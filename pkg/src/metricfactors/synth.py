"""Deterministic synthetic fixture covering every pipeline input.

    python -m metricfactors.synth fixtures/demo

Writes pairs, CoNLL-U parses for both sides, word vectors, metric score
tables with planted factor weights, CLB scores, adversarial inputs and
ensemble members, together with a ``config.toml`` wiring them up.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .conllu import DependencyTree, write_conllu
from .factors import lex_pair

DET = {"the": "Definite=Def|PronType=Art", "a": "Definite=Ind|PronType=Art"}
NOUNS = ["dog", "man", "cat", "woman", "boy", "girl", "car", "house", "tree", "river",
         "city", "book", "child", "teacher", "doctor", "garden", "bird", "horse"]
PLURAL = {n: ("children" if n == "child" else n + "s") for n in NOUNS}
VERBS = ["saw", "chased", "found", "liked", "watched", "helped", "met", "visited", "heard", "followed"]
ADJS = ["big", "small", "old", "young", "red", "quiet", "happy", "tall"]
ADVS = ["quickly", "often", "today", "again"]
SYNONYMS = {
    "dog": "hound", "man": "guy", "cat": "kitten", "woman": "lady", "boy": "lad",
    "girl": "lass", "car": "vehicle", "house": "home", "tree": "oak", "river": "stream",
    "city": "town", "book": "novel", "child": "kid", "teacher": "tutor", "doctor": "physician",
    "garden": "yard", "bird": "sparrow", "horse": "pony",
    "saw": "noticed", "chased": "pursued", "found": "discovered", "liked": "enjoyed",
    "watched": "observed", "helped": "assisted", "met": "encountered", "visited": "toured",
    "heard": "overheard", "followed": "tracked",
    "big": "large", "small": "little", "old": "aged", "young": "youthful", "red": "crimson",
    "quiet": "silent", "happy": "glad", "tall": "high",
}
VERB_FEATS = "Mood=Ind|Tense=Past|VerbForm=Fin"
OOV = {"again"}  # left out of the vector file on purpose


def _noun_feats(plural: bool) -> str:
    return "Number=Plur" if plural else "Number=Sing"


class _Sentence:
    def __init__(self):
        self.forms: list[str] = []
        self.upos: list[str] = []
        self.feats: list[str] = []
        self.heads: list[int] = []

    def add(self, form, upos, feats, head):
        self.forms.append(form)
        self.upos.append(upos)
        self.feats.append(feats)
        self.heads.append(head)
        return len(self.forms)

    def tree(self, sent_id):
        return DependencyTree(tuple(self.heads), tuple(self.forms), tuple(self.feats), tuple(self.upos), sent_id)


def _noun_phrase(rng, with_adj: bool):
    noun = NOUNS[rng.integers(len(NOUNS))]
    plural = bool(rng.random() < 0.3)
    det = "the" if plural or rng.random() < 0.5 else "a"
    adj = ADJS[rng.integers(len(ADJS))] if with_adj else None
    return {"det": det, "adj": adj, "noun": noun, "plural": plural}


def _clause(rng):
    subj = _noun_phrase(rng, rng.random() < 0.5)
    obj = _noun_phrase(rng, rng.random() < 0.5)
    while obj["noun"] == subj["noun"]:
        obj = _noun_phrase(rng, obj["adj"] is not None)
    verb = VERBS[rng.integers(len(VERBS))]
    adv = ADVS[rng.integers(len(ADVS))] if rng.random() < 0.4 else None
    return {"subj": subj, "verb": verb, "obj": obj, "adv": adv}


def _realize(clause, synonyms: set[str], flat: bool = False) -> _Sentence:
    """Linearize a clause. Words in ``synonyms`` are replaced; ``flat``
    attaches every token to the verb, changing the tree shape."""
    def word(w):
        return SYNONYMS.get(w, w) if w in synonyms else w

    s = _Sentence()

    def phrase(np_):
        toks = [(np_["det"], "DET", DET[np_["det"]])]
        if np_["adj"]:
            toks.append((word(np_["adj"]), "ADJ", "Degree=Pos"))
        if np_["noun"] in synonyms:
            noun = SYNONYMS[np_["noun"]] + ("s" if np_["plural"] else "")
        else:
            noun = PLURAL[np_["noun"]] if np_["plural"] else np_["noun"]
        toks.append((noun, "NOUN", _noun_feats(np_["plural"])))
        return toks

    subj = phrase(clause["subj"])
    verb = [(word(clause["verb"]), "VERB", VERB_FEATS)]
    obj = phrase(clause["obj"])
    adv = [(clause["adv"], "ADV", "_")] if clause["adv"] else []
    tokens = subj + verb + obj + adv
    verb_pos = len(subj) + 1
    for form, upos, feats in tokens:
        s.add(form, upos, feats, 0)
    # heads: modifiers -> their noun, nouns and adverb -> verb
    for base, np_toks in ((0, subj), (len(subj) + 1, obj)):
        noun_pos = base + len(np_toks)
        for k in range(len(np_toks) - 1):
            s.heads[base + k] = verb_pos if flat else noun_pos
        s.heads[noun_pos - 1] = verb_pos
    if adv:
        s.heads[-1] = verb_pos
    s.heads[verb_pos - 1] = 0
    return s


def _variant(clause, rng):
    """A hypothesis-side rewrite of the clause with pair-specific edits."""
    c = {k: (dict(v) if isinstance(v, dict) else v) for k, v in clause.items()}
    if rng.random() < 0.3:
        c["subj"]["adj"] = None if c["subj"]["adj"] else ADJS[rng.integers(len(ADJS))]
    if rng.random() < 0.3:
        c["adv"] = None if c["adv"] else ADVS[rng.integers(len(ADVS))]
    if rng.random() < 0.15:
        c["subj"], c["obj"] = c["obj"], c["subj"]
    if rng.random() < 0.2:
        c["verb"] = VERBS[rng.integers(len(VERBS))]
    rate = rng.random()
    content = [c["subj"]["noun"], c["obj"]["noun"], c["verb"]]
    content += [a for a in (c["subj"]["adj"], c["obj"]["adj"]) if a]
    syn = {w for w in content if rng.random() < rate}
    return c, syn, bool(rng.random() < 0.25)


def _tsv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write("\t".join(row) + "\n")


def _scores(path: Path, ids, values) -> None:
    _tsv(path, [(i, repr(float(v))) for i, v in zip(ids, values)])


def _z(v):
    v = np.asarray(v, dtype=float)
    return (v - v.mean()) / v.std()


CONFIG = """\
seed = {seed}
out = "out"

[data]
pairs = "pairs.tsv"
x_conllu = "x.conllu"
y_conllu = "y.conllu"
embeddings = "embeddings.vec"

[factors]
active = ["SEM", "SYN", "LEX", "MOR"]
lowercase = true
lex_direction = "hypothesis"
retrofit_iterations = 10

[metrics]
planted = "metric_planted.tsv"
noise = "metric_noise.tsv"

[clb]
planted = "parallel_planted.tsv"

[adversarial]
mode = "freitag"
input = "freitag.tsv"

[adversarial.metrics]
lex = "builtin:lex"
oracle = {{ ab = "oracle_ab.tsv", ac = "oracle_ac.tsv" }}

[ensemble]
human = "human.tsv"
normalize_first = true
by_language = true
combos = [["m1", "m2"], ["m1", "m1"]]

[ensemble.members]
m1 = "member_m1.tsv"
m2 = "member_m2.tsv"
"""


def write_fixture(dest, seed: int = 20211107, n_pairs: int = 300, n_anchors: int = 40) -> Path:
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    ids = [f"p{i:04d}" for i in range(n_pairs)]
    x_trees, y_trees, rows, lex = [], [], [], []
    sems = []
    clauses = []
    for pid in ids:
        clause = _clause(rng)
        clauses.append(clause)
        xs = _realize(clause, set())
        var, syn, flat = _variant(clause, rng)
        ys = _realize(var, syn, flat)
        x_trees.append(xs.tree(pid))
        y_trees.append(ys.tree(pid))
        overlap = lex_pair([t.lower() for t in xs.forms], [t.lower() for t in ys.forms])
        lex.append(overlap)
        sem = float(np.clip(60 + 15 * rng.standard_normal() + 20 * (overlap - 0.5), 0, 100))
        sems.append(round(sem, 1))
        rows.append((pid, " ".join(xs.forms), " ".join(ys.forms), repr(sems[-1]), "en", "en"))
    _tsv(dest / "pairs.tsv", [("id", "x", "y", "sem", "lang_x", "lang_y"), *rows])
    write_conllu(dest / "x.conllu", x_trees)
    write_conllu(dest / "y.conllu", y_trees)

    vocab = list(DET) + NOUNS + list(PLURAL.values()) + VERBS + ADJS + ADVS + list(SYNONYMS.values())
    vocab += [SYNONYMS[n] + "s" for n in NOUNS if n != "child"]
    words = []
    for w in vocab:
        if w not in words and w not in OOV:
            words.append(w)
    vecs = rng.standard_normal((len(words), 16))
    with open(dest / "embeddings.vec", "w", encoding="utf-8") as f:
        f.write(f"{len(words)} 16\n")
        for w, v in zip(words, vecs):
            f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")

    # metric with planted weights on LEX and SEM, and a pure-noise metric
    planted = 0.5 * _z(lex) + 0.3 * _z(sems) + 0.2 * rng.standard_normal(n_pairs)
    _scores(dest / "metric_planted.tsv", ids, planted)
    noise_rng = np.random.default_rng(seed + 1)
    _scores(dest / "metric_noise.tsv", ids, noise_rng.standard_normal(n_pairs))
    _scores(dest / "parallel_planted.tsv", ids, rng.uniform(0.85, 1.0, n_pairs))

    # ensemble members: each carries an independent half of the human signal
    f1, f2 = rng.standard_normal(n_pairs), rng.standard_normal(n_pairs)
    _scores(dest / "human.tsv", ids, f1 + f2)
    _scores(dest / "member_m1.tsv", ids, f1 + 0.5 * rng.standard_normal(n_pairs))
    _scores(dest / "member_m2.tsv", ids, 10.0 + 3.0 * (f2 + 0.5 * rng.standard_normal(n_pairs)))

    # adversarial anchors: A with its tags, B a synonym rewrite of A
    adv_rows, adv_ids = [], []
    for k in range(n_anchors):
        clause = clauses[k]
        a = _realize(clause, set())
        content = {clause["subj"]["noun"], clause["obj"]["noun"], clause["verb"]}
        b = _realize(clause, content)
        aid = f"a{k:03d}"
        adv_ids.append(aid)
        adv_rows.append((aid, " ".join(a.forms), " ".join(b.forms), " ".join(a.upos)))
    _tsv(dest / "freitag.tsv", adv_rows)
    _scores(dest / "oracle_ab.tsv", adv_ids, np.ones(n_anchors))
    _scores(dest / "oracle_ac.tsv", adv_ids, np.zeros(n_anchors))

    # PAWS-style candidates: paraphrases are synonym rewrites, non-paraphrases swap subject and object
    paws_rows = []
    for k in range(n_anchors):
        clause = clauses[k]
        a = " ".join(_realize(clause, set()).forms)
        swapped = dict(clause, subj=clause["obj"], obj=clause["subj"])
        paws_rows.append((f"w{k:03d}", a, " ".join(_realize(clause, {clause["verb"]}).forms), "1"))
        paws_rows.append((f"w{k:03d}", a, " ".join(_realize(clause, {clause["verb"], clause["subj"]["noun"]}).forms), "1"))
        paws_rows.append((f"w{k:03d}", a, " ".join(_realize(swapped, set()).forms), "0"))
    _tsv(dest / "paws.tsv", paws_rows)

    (dest / "config.toml").write_text(CONFIG.format(seed=seed), encoding="utf-8")
    return dest


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures/demo"
    print(write_fixture(target))
