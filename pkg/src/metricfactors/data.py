"""Core datatypes and loaders for pair datasets, embeddings, score tables
and the joined factor table used by the regression."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

SEM, SYN, LEX, MOR, CLB = "SEM", "SYN", "LEX", "MOR", "CLB"
FACTOR_ORDER = (SEM, SYN, LEX, MOR, CLB)


class FormatError(ValueError):
    """Malformed input file; carries the offending location in the message."""


def _is_comment(line: str) -> bool:
    return line.startswith("#")


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise FormatError(f"{where}: non-finite value {text!r}")
    return value


def tokenize(text: str, pretokenized: bool = False) -> tuple[str, ...]:
    """Whitespace tokenization. Pretokenized text is split on single spaces
    only, so no runs are collapsed."""
    if pretokenized:
        return tuple(t for t in text.split(" ") if t)
    return tuple(text.split())


@dataclass(frozen=True)
class SentencePair:
    id: str
    x_tokens: tuple[str, ...]
    y_tokens: tuple[str, ...]
    sem: float | None = None
    lang_x: str = "en"
    lang_y: str = "en"

    def __post_init__(self):
        if not self.x_tokens or not self.y_tokens:
            raise ValueError(f"pair {self.id!r}: empty sentence")

    @property
    def lang_pair(self) -> str:
        return f"{self.lang_x}-{self.lang_y}"


_PAIR_COLUMNS = ("id", "x", "y", "sem", "lang_x", "lang_y", "pretokenized")


def load_pair_dataset(path, format: str = "tsv") -> list[SentencePair]:
    """Read `id<TAB>x<TAB>y[<TAB>sem]` rows.

    An optional header line whose first field is ``id`` names the columns;
    it may add ``lang_x``, ``lang_y`` and ``pretokenized``. Lines starting
    with ``#`` are ignored.
    """
    if format != "tsv":
        raise ValueError(f"unsupported pair dataset format: {format!r}")
    columns: list[str] | None = None
    pairs: list[SentencePair] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or _is_comment(line):
                continue
            fields = line.split("\t")
            if columns is None:
                if fields[0] == "id":
                    unknown = [c for c in fields if c not in _PAIR_COLUMNS]
                    if unknown or not {"id", "x", "y"} <= set(fields):
                        raise FormatError(f"{path}:{lineno}: bad header {fields}")
                    columns = fields
                    continue
                columns = list(_PAIR_COLUMNS[: max(3, min(len(fields), 4))])
            where = f"{path}:{lineno}"
            if len(fields) != len(columns):
                # a trailing empty sem column may be dropped by editors
                if len(fields) == len(columns) - 1 and columns[-1] == "sem":
                    fields.append("")
                else:
                    raise FormatError(
                        f"{where}: expected {len(columns)} fields, got {len(fields)}"
                    )
            row = dict(zip(columns, fields))
            pair_id = row["id"]
            if not pair_id:
                raise FormatError(f"{where}: empty id")
            if pair_id in seen:
                raise FormatError(f"{where}: duplicate id {pair_id!r}")
            seen.add(pair_id)
            sem_text = row.get("sem", "").strip()
            sem = _parse_float(sem_text, f"{where} (sem)") if sem_text else None
            pretok = row.get("pretokenized", "0").strip().lower() in ("1", "true", "yes")
            x_tokens = tokenize(row["x"], pretok)
            y_tokens = tokenize(row["y"], pretok)
            if not x_tokens or not y_tokens:
                raise FormatError(f"{where}: empty sentence")
            pairs.append(
                SentencePair(
                    id=pair_id,
                    x_tokens=x_tokens,
                    y_tokens=y_tokens,
                    sem=sem,
                    lang_x=row.get("lang_x") or "en",
                    lang_y=row.get("lang_y") or "en",
                )
            )
    return pairs


@dataclass(frozen=True)
class ScoreTable:
    metric: str
    scores: Mapping[str, float]

    def __post_init__(self):
        for key, value in self.scores.items():
            if not math.isfinite(value):
                raise ValueError(f"{self.metric}: non-finite score for {key!r}")

    def __len__(self):
        return len(self.scores)

    def __getitem__(self, key: str) -> float:
        return self.scores[key]

    def __contains__(self, key) -> bool:
        return key in self.scores

    def ids(self) -> list[str]:
        return list(self.scores)


def load_score_table(path, metric_name: str) -> ScoreTable:
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or _is_comment(line):
                continue
            fields = line.split("\t")
            where = f"{path}:{lineno}"
            if len(fields) != 2:
                raise FormatError(f"{where}: expected 2 fields, got {len(fields)}")
            key, value = fields
            if lineno == 1 and key == "id":
                try:
                    float(value)
                except ValueError:
                    continue  # header
            if key in scores:
                raise FormatError(f"{where}: duplicate id {key!r}")
            scores[key] = _parse_float(value, where)
    return ScoreTable(metric_name, scores)


def write_score_table(path, table: ScoreTable) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for key, value in table.scores.items():
            f.write(f"{key}\t{value!r}\n")


@dataclass(frozen=True)
class EmbeddingTable:
    """Word vectors stored as rows of one matrix."""

    dimension: int
    index: Mapping[str, int]
    matrix: np.ndarray
    duplicates: int = 0

    def __post_init__(self):
        if self.dimension <= 0:
            raise ValueError("embedding dimension must be positive")
        if self.matrix.shape != (len(self.index), self.dimension):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{len(self.index)} words x {self.dimension} dims"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("embedding table contains non-finite components")
        self.matrix.flags.writeable = False

    @classmethod
    def from_dict(cls, vectors: Mapping[str, Sequence[float]], dimension: int | None = None):
        words = list(vectors)
        if dimension is None:
            if not words:
                raise ValueError("cannot infer dimension of an empty table")
            dimension = len(vectors[words[0]])
        matrix = np.zeros((len(words), dimension))
        for i, w in enumerate(words):
            vec = np.asarray(vectors[w], dtype=float)
            if vec.shape != (dimension,):
                raise ValueError(f"vector for {w!r} has shape {vec.shape}, expected ({dimension},)")
            matrix[i] = vec
        return cls(dimension, {w: i for i, w in enumerate(words)}, matrix)

    def __len__(self):
        return len(self.index)

    def __contains__(self, word) -> bool:
        return word in self.index

    def __getitem__(self, word: str) -> np.ndarray:
        return self.matrix[self.index[word]]

    def get(self, word: str):
        i = self.index.get(word)
        return None if i is None else self.matrix[i]

    def words(self) -> list[str]:
        return list(self.index)

    def casefolded(self) -> "EmbeddingTable":
        """Lowercase keys; on collision the first occurrence wins."""
        index: dict[str, int] = {}
        rows: list[int] = []
        for word, i in self.index.items():
            key = word.lower()
            if key not in index:
                index[key] = len(rows)
                rows.append(i)
        return EmbeddingTable(self.dimension, index, self.matrix[rows].copy(), self.duplicates)


def load_embeddings(path) -> EmbeddingTable:
    """Read the FastText ``.vec`` text layout (optional ``count dim`` header).

    Duplicate words keep their first vector; the number of dropped rows is
    logged and stored on the table.
    """
    index: dict[str, int] = {}
    rows: list[list[float]] = []
    dim: int | None = None
    declared_count: int | None = None
    duplicates = 0
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            parts = raw.rstrip("\n").rstrip("\r").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                declared_count, dim = int(parts[0]), int(parts[1])
                if dim <= 0:
                    raise FormatError(f"{path}:1: non-positive dimension {dim}")
                continue
            word, comps = parts[0], parts[1:]
            if dim is None:
                dim = len(comps)
                if dim == 0:
                    raise FormatError(f"{path}:{lineno}: no vector components")
            if len(comps) != dim:
                raise FormatError(
                    f"{path}:{lineno}: expected {dim} components, got {len(comps)}"
                )
            vec = [_parse_float(c, f"{path}:{lineno}") for c in comps]
            if word in index:
                duplicates += 1
                continue
            index[word] = len(rows)
            rows.append(vec)
    if dim is None:
        raise FormatError(f"{path}: no vectors and no header")
    if duplicates:
        log.warning("%s: %d duplicate word rows ignored (kept first)", path, duplicates)
    if declared_count is not None and declared_count != len(rows) + duplicates:
        log.warning("%s: header declares %d rows, found %d", path, declared_count, len(rows) + duplicates)
    matrix = np.array(rows, dtype=float).reshape(len(rows), dim)
    return EmbeddingTable(dim, index, matrix, duplicates)


def write_embeddings(path, table: EmbeddingTable, header: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as f:
        if header:
            f.write(f"{len(table)} {table.dimension}\n")
        for word, i in table.index.items():
            f.write(word + " " + " ".join(repr(float(v)) for v in table.matrix[i]) + "\n")


@dataclass(frozen=True)
class FactorTable:
    """Design matrix of the disentanglement regression, one row per pair."""

    ids: tuple[str, ...]
    columns: Mapping[str, np.ndarray]
    target: np.ndarray
    target_name: str = "target"
    normalized: Mapping[str, bool] = field(default_factory=dict)
    dropped: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.ids)
        if len(set(self.ids)) != n:
            raise ValueError("duplicate ids in factor table")
        for name, col in self.columns.items():
            if name not in FACTOR_ORDER:
                raise ValueError(f"unknown factor column {name!r}")
            if col.shape != (n,):
                raise ValueError(f"column {name} has shape {col.shape}, expected ({n},)")
            if not np.all(np.isfinite(col)):
                raise ValueError(f"column {name} has missing or non-finite values")
        if self.target.shape != (n,) or not np.all(np.isfinite(self.target)):
            raise ValueError("target column has wrong shape or non-finite values")

    @property
    def factors(self) -> tuple[str, ...]:
        return tuple(f for f in FACTOR_ORDER if f in self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.ids)

    def is_normalized(self, name: str) -> bool:
        return bool(self.normalized.get(name, False))

    def design(self) -> np.ndarray:
        return np.column_stack([self.columns[f] for f in self.factors]) if self.columns else np.zeros((self.n_rows, 0))

    def zscored(self, target: bool = True) -> "FactorTable":
        """Z-normalize every factor column (and the target unless disabled)."""
        from .regression import z_normalize

        cols = {
            f: (self.columns[f] if self.is_normalized(f) else z_normalize(self.columns[f], name=f))
            for f in self.factors
        }
        flags = {f: True for f in cols}
        tgt = self.target
        if target and not self.is_normalized(self.target_name):
            tgt = z_normalize(self.target, name=self.target_name)
        flags[self.target_name] = target or self.is_normalized(self.target_name)
        return FactorTable(self.ids, cols, tgt, self.target_name, flags, self.dropped)

    def select(self, factors: Iterable[str]) -> "FactorTable":
        wanted = [f for f in FACTOR_ORDER if f in set(factors)]
        missing = [f for f in wanted if f not in self.columns]
        if missing:
            raise KeyError(f"factor table lacks columns {missing}")
        flags = {k: v for k, v in self.normalized.items() if k in wanted or k == self.target_name}
        return FactorTable(
            self.ids, {f: self.columns[f] for f in wanted}, self.target, self.target_name, flags, self.dropped
        )

    def to_tsv(self, path) -> None:
        names = list(self.factors)
        flagged = [k for k in names + [self.target_name] if self.is_normalized(k)]
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"#target={self.target_name}\n")
            f.write(f"#normalized={','.join(flagged)}\n")
            f.write(f"#dropped={','.join(self.dropped)}\n")
            f.write("\t".join(["id", *names, self.target_name]) + "\n")
            for i, pid in enumerate(self.ids):
                vals = [repr(float(self.columns[c][i])) for c in names]
                vals.append(repr(float(self.target[i])))
                f.write("\t".join([pid, *vals]) + "\n")

    @classmethod
    def read_tsv(cls, path) -> "FactorTable":
        meta: dict[str, str] = {}
        header: list[str] | None = None
        ids: list[str] = []
        rows: list[list[float]] = []
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, 1):
                line = raw.rstrip("\n")
                if line.startswith("#"):
                    key, _, value = line[1:].partition("=")
                    meta[key] = value
                    continue
                fields = line.split("\t")
                if header is None:
                    header = fields
                    continue
                if len(fields) != len(header):
                    raise FormatError(f"{path}:{lineno}: expected {len(header)} fields")
                ids.append(fields[0])
                rows.append([_parse_float(v, f"{path}:{lineno}") for v in fields[1:]])
        if header is None:
            raise FormatError(f"{path}: missing header")
        values = np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)
        names = header[1:-1]
        target_name = meta.get("target", header[-1])
        flagged = [k for k in meta.get("normalized", "").split(",") if k]
        dropped = tuple(k for k in meta.get("dropped", "").split(",") if k)
        return cls(
            tuple(ids),
            {n: values[:, j].copy() for j, n in enumerate(names)},
            values[:, -1].copy(),
            target_name,
            {k: True for k in flagged},
            dropped,
        )


def join_factors(
    pairs: Sequence[SentencePair] | Sequence[str] | None,
    factors: Mapping[str, Mapping[str, float]],
    target: ScoreTable,
) -> FactorTable:
    """Inner-join factor maps and the target on pair id.

    Every key of ``factors`` is an active column. Rows in the id
    intersection that lack an active value are dropped and listed in
    ``FactorTable.dropped``.
    """
    if pairs is None:
        order = list(target.scores)
    else:
        order = [p if isinstance(p, str) else p.id for p in pairs]
    common = [pid for pid in order if pid in target.scores]
    if not common:
        raise ValueError(f"no pair ids shared between dataset and metric {target.metric!r}")
    active = [f for f in FACTOR_ORDER if f in factors]
    unknown = set(factors) - set(FACTOR_ORDER)
    if unknown:
        raise ValueError(f"unknown factors {sorted(unknown)}")
    kept, dropped = [], []
    for pid in common:
        ok = True
        for f in active:
            v = factors[f].get(pid)
            if v is None or not math.isfinite(v):
                ok = False
                break
        (kept if ok else dropped).append(pid)
    if dropped:
        log.info("join: dropped %d of %d rows with missing factor values", len(dropped), len(common))
    if not kept:
        raise ValueError("no complete rows after joining factors")
    cols = {f: np.array([factors[f][pid] for pid in kept], dtype=float) for f in active}
    tgt = np.array([target.scores[pid] for pid in kept], dtype=float)
    return FactorTable(tuple(kept), cols, tgt, target.metric, {}, tuple(dropped))


def write_factor_scores(path, factor: str, values: Mapping[str, float]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pid, v in values.items():
            f.write(f"{pid}\t{factor}\t{v!r}\n")


def read_factor_scores(path) -> tuple[str | None, dict[str, float]]:
    factor = None
    values: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise FormatError(f"{path}:{lineno}: expected id, factor, value")
            pid, name, value = fields
            if factor is None:
                factor = name
            elif name != factor:
                raise FormatError(f"{path}:{lineno}: mixed factors {factor!r} and {name!r}")
            if pid in values:
                raise FormatError(f"{path}:{lineno}: duplicate id {pid!r}")
            values[pid] = _parse_float(value, f"{path}:{lineno}")
    return factor, values


def ensure_path(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {p}")
    return p
