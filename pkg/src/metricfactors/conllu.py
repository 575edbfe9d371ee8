"""Dependency trees read from CoNLL-U."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence


class ConlluError(ValueError):
    pass


@dataclass(frozen=True)
class DependencyTree:
    """Ordered rooted tree with one node per token.

    ``heads[i]`` is the 1-based head of token ``i + 1``; 0 marks the root.
    Children are ordered by surface position.
    """

    heads: tuple[int, ...]
    forms: tuple[str, ...] = ()
    feats: tuple[str, ...] = ()
    upos: tuple[str, ...] = ()
    sent_id: str | None = None

    def __post_init__(self):
        problem = _check_heads(self.heads)
        if problem:
            raise ConlluError(problem)
        n = len(self.heads)
        for name in ("forms", "feats", "upos"):
            col = getattr(self, name)
            if col and len(col) != n:
                raise ConlluError(f"{name} has {len(col)} entries for {n} nodes")

    @classmethod
    def from_heads(cls, heads: Sequence[int], forms: Sequence[str] = ()) -> "DependencyTree":
        return cls(tuple(heads), tuple(forms))

    def __len__(self):
        return len(self.heads)

    @property
    def root(self) -> int:
        """1-based index of the root token."""
        return self.heads.index(0) + 1

    def children(self) -> list[list[int]]:
        """Child lists indexed by 1-based node id; entry 0 holds the root."""
        kids: list[list[int]] = [[] for _ in range(len(self.heads) + 1)]
        for i, h in enumerate(self.heads, 1):
            kids[h].append(i)
        return kids

    def nested(self, node: int | None = None):
        """(label, [children...]) nesting, handy for debugging and tests."""
        kids = self.children()

        def build(i):
            label = self.forms[i - 1] if self.forms else i
            return (label, [build(c) for c in kids[i]])

        return build(self.root if node is None else node)


def _check_heads(heads: Sequence[int]) -> str | None:
    n = len(heads)
    if n == 0:
        return "tree has no nodes"
    roots = [i for i, h in enumerate(heads, 1) if h == 0]
    if len(roots) != 1:
        return f"expected exactly one root, found {len(roots)}"
    for i, h in enumerate(heads, 1):
        if not 0 <= h <= n:
            return f"token {i} has head {h} outside 1..{n}"
        if h == i:
            return f"token {i} is its own head"
    # every node must reach the root without revisiting
    state = [0] * (n + 1)  # 0 unknown, 1 on path, 2 reaches root
    state[0] = 2
    for start in range(1, n + 1):
        path = []
        i = start
        while state[i] == 0:
            state[i] = 1
            path.append(i)
            i = heads[i - 1]
        if state[i] == 1:
            return f"cycle through token {i}"
        for j in path:
            state[j] = 2
    return None


def _blocks(path) -> Iterator[tuple[int, list[str], list[tuple[int, str]]]]:
    comments: list[str] = []
    lines: list[tuple[int, str]] = []
    index = 0
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                if lines:
                    yield index, comments, lines
                    index += 1
                comments, lines = [], []
            elif line.startswith("#"):
                comments.append(line)
            else:
                lines.append((lineno, line))
    if lines:
        yield index, comments, lines


def parse_conllu(path) -> list[DependencyTree]:
    """One tree per sentence block. Multiword-token ranges (``1-2``) and
    empty nodes (``1.1``) are skipped; only ID, FORM, UPOS, FEATS and HEAD
    are read."""
    trees = []
    for index, comments, lines in _blocks(path):
        sent_id = None
        for c in comments:
            key, _, value = c[1:].partition("=")
            if key.strip() == "sent_id":
                sent_id = value.strip()
        forms, upos, feats, heads = [], [], [], []
        for lineno, line in lines:
            cols = line.split("\t")
            if len(cols) != 10:
                raise ConlluError(
                    f"sentence {index} ({path}:{lineno}): expected 10 columns, got {len(cols)}"
                )
            tid = cols[0]
            if "-" in tid or "." in tid:
                continue
            try:
                tok_id, head = int(tid), int(cols[6])
            except ValueError:
                raise ConlluError(f"sentence {index} ({path}:{lineno}): bad ID or HEAD") from None
            if tok_id != len(heads) + 1:
                raise ConlluError(
                    f"sentence {index} ({path}:{lineno}): token id {tok_id} out of sequence"
                )
            forms.append(cols[1])
            upos.append(cols[3])
            feats.append(cols[5])
            heads.append(head)
        problem = _check_heads(heads)
        if problem:
            raise ConlluError(f"sentence {index}" + (f" ({sent_id})" if sent_id else "") + f": {problem}")
        trees.append(DependencyTree(tuple(heads), tuple(forms), tuple(feats), tuple(upos), sent_id))
    return trees


def write_conllu(path, trees: Sequence[DependencyTree]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for k, t in enumerate(trees):
            if t.sent_id is not None:
                f.write(f"# sent_id = {t.sent_id}\n")
            for i, h in enumerate(t.heads, 1):
                form = t.forms[i - 1] if t.forms else f"w{i}"
                upos = t.upos[i - 1] if t.upos else "_"
                feats = t.feats[i - 1] if t.feats else "_"
                deprel = "root" if h == 0 else "dep"
                f.write(f"{i}\t{form}\t_\t{upos}\t_\t{feats}\t{h}\t{deprel}\t_\t_\n")
            f.write("\n")


def tagged_words(trees: Sequence[DependencyTree], lowercase: bool = False) -> list[tuple[str, str]]:
    """(form, FEATS) for every token carrying morphological features."""
    out = []
    for t in trees:
        if not t.forms or not t.feats:
            continue
        for form, feats in zip(t.forms, t.feats):
            if feats and feats != "_":
                out.append((form.lower() if lowercase else form, feats))
    return out
