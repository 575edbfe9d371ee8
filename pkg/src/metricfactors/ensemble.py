"""Score-averaging ensembles evaluated by segment-level Pearson r."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import ScoreTable
from .regression import z_normalize


def _common_ids(tables: Sequence[ScoreTable]) -> list[str]:
    rest = [set(t.scores) for t in tables[1:]]
    return [k for k in tables[0].scores if all(k in s for s in rest)]


def average_metrics(
    tables: Sequence[ScoreTable],
    normalize_first: bool = True,
    name: str | None = None,
) -> ScoreTable:
    """Per-id mean over the members, optionally z-normalizing each member
    over the shared ids first."""
    if len(tables) < 2:
        raise ValueError("an ensemble needs at least two member tables")
    ids = _common_ids(tables)
    if not ids:
        raise ValueError("member tables share no ids")
    cols = []
    for t in tables:
        col = np.array([t.scores[k] for k in ids], dtype=float)
        cols.append(z_normalize(col, name=t.metric) if normalize_first else col)
    total = cols[0].copy()
    for col in cols[1:]:
        total += col
    mean = total / len(cols)
    return ScoreTable(name or "+".join(t.metric for t in tables), dict(zip(ids, mean.tolist())))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two sequences of equal length")
    if x.size < 3:
        raise ValueError("pearson needs at least three points")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("pearson is undefined for a constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class EnsembleReport:
    members: tuple[str, ...]
    member_r: Mapping[str, float]
    ensemble_r: float
    improvement: float
    n: int
    group: str = "all"

    @property
    def best_member(self) -> str:
        return max(self.members, key=lambda m: self.member_r[m])

    def to_dict(self) -> dict:
        return {
            "combo": "+".join(self.members),
            "group": self.group,
            "n": self.n,
            "member_r": dict(self.member_r),
            "ensemble_r": self.ensemble_r,
            "best_member": self.best_member,
            "improvement_pct": self.improvement,
        }


def relative_improvement(ensemble_r: float, best_r: float) -> float:
    if best_r == 0.0:
        return float("nan")
    return (ensemble_r - best_r) / abs(best_r) * 100.0


def evaluate_ensembles(
    members: Mapping[str, ScoreTable],
    human: ScoreTable,
    combos: Sequence[Sequence[str]],
    normalize_first: bool = True,
    group: str = "all",
) -> list[EnsembleReport]:
    """One report per combo. Member and ensemble correlations are computed
    on the ids shared by the combo's members and the human scores."""
    reports = []
    for combo in combos:
        if len(combo) < 2:
            raise ValueError(f"combo {list(combo)} needs at least two members")
        unknown = [m for m in combo if m not in members]
        if unknown:
            raise KeyError(f"combo references unknown members {unknown}")
        tables = [members[m] for m in combo]
        ids = _common_ids([*tables, human])
        if len(ids) < 3:
            raise ValueError(f"combo {list(combo)}: fewer than three shared ids")
        restricted = [ScoreTable(t.metric, {k: t.scores[k] for k in ids}) for t in tables]
        h = np.array([human.scores[k] for k in ids])
        avg = average_metrics(restricted, normalize_first)
        ens_r = pearson([avg.scores[k] for k in ids], h)
        member_r = {}
        for name, t in zip(combo, restricted):
            col = np.array([t.scores[k] for k in ids])
            # same transform as inside the average keeps duplicate combos exact
            member_r[name] = pearson(z_normalize(col, name=name) if normalize_first else col, h)
        best = max(member_r.values())
        reports.append(
            EnsembleReport(tuple(combo), member_r, ens_r, relative_improvement(ens_r, best), len(ids), group)
        )
    return reports


def render_ensemble_table(reports: Sequence[EnsembleReport]) -> str:
    """Wide TSV: one row per combo, ensemble r and improvement per group."""
    groups: list[str] = []
    for r in reports:
        if r.group not in groups:
            groups.append(r.group)
    combos: list[tuple[str, ...]] = []
    cells: dict[tuple, EnsembleReport] = {}
    for r in reports:
        if r.members not in combos:
            combos.append(r.members)
        cells[(r.members, r.group)] = r
    header = ["combo"]
    for g in groups:
        header += [f"{g} r", f"{g} improvement%"]
    lines = ["\t".join(header)]
    for combo in combos:
        row = ["+".join(combo)]
        for g in groups:
            r = cells.get((combo, g))
            row += ["-", "-"] if r is None else [f"{r.ensemble_r:.4f}", f"{r.improvement:.2f}"]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"
