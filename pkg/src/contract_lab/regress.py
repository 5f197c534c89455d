"""Ordinary least squares with classical inference for one contract."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CollinearityError, DomainError, InsufficientDataError
from .marketdata import ObservationPanel
from .stats import two_sided_p

VARIABLES = ("m", "v", "o")
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    """Predictor subset of ``m``, ``v``, ``o``; the intercept is always included."""

    predictors: tuple[str, ...]

    def __post_init__(self):
        preds = tuple(self.predictors)
        if not preds:
            raise DomainError("a model needs at least one predictor")
        unknown = [p for p in preds if p not in VARIABLES]
        if unknown:
            raise DomainError(f"unknown predictor(s): {', '.join(unknown)}")
        if len(set(preds)) != len(preds):
            raise DomainError(f"duplicate predictors in {preds}")
        object.__setattr__(self, "predictors", tuple(v for v in VARIABLES if v in preds))

    @classmethod
    def parse(cls, label: str) -> "ModelSpec":
        return cls(tuple(label.strip()))

    @property
    def label(self) -> str:
        return "".join(self.predictors)

    @property
    def k(self) -> int:
        return len(self.predictors)

    @property
    def terms(self) -> tuple[str, ...]:
        return ("const",) + self.predictors

    def sort_key(self) -> tuple:
        return (self.k, [VARIABLES.index(p) for p in self.predictors])

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class RegressionFit:
    model: ModelSpec
    n: int
    coefficients: tuple[float, ...]
    std_errors: tuple[float, ...]
    t_stats: tuple[float, ...]
    p_values: tuple[float, ...]
    r2: float
    adj_r2: float
    rss: float
    dropped_collinear: bool = False

    @property
    def df_resid(self) -> int:
        return self.n - self.model.k - 1

    def term(self, name: str) -> dict:
        i = self.model.terms.index(name)
        return {
            "coef": self.coefficients[i],
            "std_error": self.std_errors[i],
            "t": self.t_stats[i],
            "p": self.p_values[i],
        }

    def to_dict(self) -> dict:
        return {
            "model": self.model.label,
            "n": self.n,
            "terms": {t: self.term(t) for t in self.model.terms},
            "r2": self.r2,
            "adj_r2": self.adj_r2,
        }


def design_matrix(panel: ObservationPanel, model: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    cols = {
        "m": [float(r.m) for r in panel.rows],
        "v": [r.v for r in panel.rows],
        "o": [r.o for r in panel.rows],
    }
    X = np.column_stack([np.ones(len(panel.rows))] + [cols[p] for p in model.predictors])
    y = np.array([r.dv for r in panel.rows], dtype=float)
    return X, y


def _t_and_p(coef: float, se: float, df: int) -> tuple[float, float]:
    if se > 0:
        t = coef / se
        return t, two_sided_p(t, df)
    if coef == 0:
        return 0.0, 1.0
    return math.copysign(math.inf, coef), 0.0


def ols(X: np.ndarray, y: np.ndarray, model: ModelSpec) -> RegressionFit:
    """Least squares through a Householder QR of the design matrix.

    ``X`` must have the intercept column first followed by the model's
    predictors in canonical order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if p != model.k + 1:
        raise DomainError(f"design has {p} columns, model {model.label} needs {model.k + 1}")
    if n < p + 1:
        raise InsufficientDataError(
            f"model {model.label} needs at least {p + 1} observations, got {n}"
        )
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DomainError("design matrix or response contains non-finite values")

    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    tol = RANK_RTOL * diag.max()
    for j, rjj in enumerate(diag):
        if rjj <= tol:
            raise CollinearityError(model.terms[j])

    qty = Q.T @ y
    beta = solve_triangular(R, qty, lower=False)
    resid = y - X @ beta
    rss = float(resid @ resid)
    df = n - p
    sigma2 = rss / df
    Rinv = solve_triangular(R, np.eye(p), lower=False)
    xtx_inv_diag = np.sum(Rinv * Rinv, axis=1)
    se = np.sqrt(sigma2 * xtx_inv_diag)

    centered = y - y.mean()
    tss = float(centered @ centered)
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    adj = 1.0 - (1.0 - r2) * (n - 1) / df

    ts, ps = zip(*(_t_and_p(float(b), float(s), df) for b, s in zip(beta, se)))
    return RegressionFit(
        model=model,
        n=n,
        coefficients=tuple(float(b) for b in beta),
        std_errors=tuple(float(s) for s in se),
        t_stats=ts,
        p_values=ps,
        r2=r2,
        adj_r2=adj,
        rss=rss,
    )


def ols_fit(panel: ObservationPanel, model: ModelSpec) -> RegressionFit:
    X, y = design_matrix(panel, model)
    return ols(X, y, model)


def residuals(panel: ObservationPanel, fit: RegressionFit) -> np.ndarray:
    X, y = design_matrix(panel, fit.model)
    return y - X @ np.asarray(fit.coefficients)


class Stars(enum.Enum):
    NONE = ""
    TEN = "*"
    FIVE = "**"
    ONE = "***"

    @property
    def marker(self) -> str:
        return self.value


def significance_stars(p: float) -> Stars:
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p-value must lie in [0, 1], got {p}")
    if p < 0.01:
        return Stars.ONE
    if p < 0.05:
        return Stars.FIVE
    if p < 0.10:
        return Stars.TEN
    return Stars.NONE
