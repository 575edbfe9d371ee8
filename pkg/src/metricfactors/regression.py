"""Linear disentanglement of metric scores onto factor columns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg, stats

from .data import FACTOR_ORDER, FactorTable

SIGNIFICANCE = 0.05
MAX_CONDITION = 1e12


class RegressionError(ValueError):
    pass


def z_normalize(values: Sequence[float], name: str | None = None) -> np.ndarray:
    """Subtract the mean and divide by the population standard deviation."""
    v = np.asarray(values, dtype=float)
    label = f"column {name!r}" if name else "column"
    if v.ndim != 1 or v.size < 2:
        raise RegressionError(f"{label}: need at least two values to normalize")
    mean = v.mean()
    sd = v.std()
    if np.ptp(v) == 0 or sd <= 1e-12 * max(1.0, abs(mean)):
        raise RegressionError(f"{label} is constant and carries no signal")
    return (v - mean) / sd


def r_squared(predictions: Sequence[float], targets: Sequence[float]) -> float:
    yhat = np.asarray(predictions, dtype=float)
    y = np.asarray(targets, dtype=float)
    if yhat.shape != y.shape or y.size < 2:
        raise RegressionError("predictions and targets need equal length >= 2")
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise RegressionError("targets are constant (SST = 0)")
    sse = float(np.sum((y - yhat) ** 2))
    return 1.0 - sse / sst


@dataclass(frozen=True)
class RegressionFit:
    coefficients: Mapping[str, float]
    intercept: float
    p_values: Mapping[str, float]
    r_squared: float
    n_rows: int
    dropped_rows: int = 0
    std_errors: Mapping[str, float] = field(default_factory=dict)
    intercept_p: float = float("nan")
    metric: str = ""

    @property
    def factors(self) -> tuple[str, ...]:
        return tuple(f for f in FACTOR_ORDER if f in self.coefficients)

    def significant(self, factor: str, level: float = SIGNIFICANCE) -> bool:
        return self.p_values[factor] < level

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "n": self.n_rows,
            "dropped": self.dropped_rows,
            "coefficients": {
                f: {
                    "value": self.coefficients[f],
                    "p": self.p_values[f],
                    "significant": self.significant(f),
                }
                for f in self.factors
            },
            "intercept": self.intercept,
            "r2": self.r_squared,
        }


def _collinear_columns(xtx: np.ndarray, names: list[str]) -> list[str]:
    scale = np.sqrt(np.diag(xtx))
    scale[scale == 0] = 1.0
    corr = xtx / np.outer(scale, scale)
    _, vecs = np.linalg.eigh(corr)
    smallest = vecs[:, 0]
    return [n for n, w in zip(names, smallest) if abs(w) > 0.1]


def fit_ols(table: FactorTable, alpha: float = SIGNIFICANCE) -> RegressionFit:
    """Ordinary least squares with an intercept.

    Columns are used as stored; call ``FactorTable.zscored`` first to get
    standardized coefficients. P-values are two-sided t-tests with
    n - k - 1 degrees of freedom.
    """
    names = list(table.factors)
    n, k = table.n_rows, len(names)
    if n <= k + 1:
        raise RegressionError(f"{n} rows are too few for {k} factors plus intercept")
    X = np.column_stack([np.ones(n), table.design()])
    y = table.target
    xtx = X.T @ X
    cond = np.linalg.cond(xtx)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        cols = _collinear_columns(xtx, ["intercept", *names])
        raise RegressionError(
            f"design is (near) singular, condition number {cond:.3g}; collinear columns: {cols}"
        )
    chol = linalg.cho_factor(xtx)
    beta = linalg.cho_solve(chol, X.T @ y)
    resid = y - X @ beta
    sse = float(resid @ resid)
    dof = n - k - 1
    sigma2 = sse / dof
    cov_unscaled = linalg.cho_solve(chol, np.eye(k + 1))
    se = np.sqrt(np.maximum(sigma2 * np.diag(cov_unscaled), 0.0))
    pvals = []
    for b, s in zip(beta, se):
        if s == 0.0:
            pvals.append(1.0 if b == 0.0 else 0.0)
        else:
            pvals.append(float(2.0 * stats.t.sf(abs(b / s), dof)))
    r2 = r_squared(X @ beta, y)
    return RegressionFit(
        coefficients={f: float(beta[j + 1]) for j, f in enumerate(names)},
        intercept=float(beta[0]),
        p_values={f: pvals[j + 1] for j, f in enumerate(names)},
        r_squared=r2,
        n_rows=n,
        dropped_rows=len(table.dropped),
        std_errors={f: float(se[j + 1]) for j, f in enumerate(names)},
        intercept_p=pvals[0],
        metric=table.target_name,
    )


def predict(fit: RegressionFit, factor_row: Mapping[str, float]) -> float:
    missing = [f for f in fit.factors if f not in factor_row]
    if missing:
        raise RegressionError(f"row lacks factors {missing}")
    return fit.intercept + sum(fit.coefficients[f] * factor_row[f] for f in fit.factors)


def _cell(value: float, p: float) -> str:
    text = f"{value:.2f}"
    if text == "-0.00":
        text = "0.00"
    return text + ("*" if p >= SIGNIFICANCE else "")


def table_header(factors: Sequence[str]) -> str:
    return "\t".join(["Metric", *factors, "R2"])


def table_row(fit: RegressionFit, name: str | None = None) -> str:
    """One row of a regression table: factors in
    SEM/SYN/LEX/MOR/CLB order, two decimals, ``*`` when p >= 0.05."""
    cells = [_cell(fit.coefficients[f], fit.p_values[f]) for f in fit.factors]
    r2 = f"{fit.r_squared:.2f}"
    return "\t".join([name or fit.metric, *cells, r2])


def render_table(fits: Sequence[RegressionFit], names: Sequence[str] | None = None) -> str:
    """TSV block(s); a new header starts whenever the factor set changes."""
    lines: list[str] = []
    current = None
    for i, fit in enumerate(fits):
        if fit.factors != current:
            current = fit.factors
            lines.append(table_header(current))
        lines.append(table_row(fit, names[i] if names else None))
    return "\n".join(lines) + "\n"


def clean_json(obj):
    """Replace non-finite floats so json output stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_json(v) for v in obj]
    return obj
