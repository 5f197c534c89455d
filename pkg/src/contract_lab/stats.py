"""Descriptive statistics and Student-t tail probabilities."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DomainError

CF_MAX_ITER = 300
CF_TOL = 1e-12
_TINY = 1e-300

ESTIMATOR_CONVENTIONS = {
    "std_dev": "sample (n-1 denominator)",
    "skewness": "biased moment ratio m3/m2^1.5",
    "kurtosis": "biased moment ratio m4/m2^2, non-excess (normal = 3)",
}


@dataclass(frozen=True)
class DescriptiveStats:
    """Summary of one series.

    ``skewness`` and ``kurtosis`` are ``None`` when every sample is equal.
    """

    n: int
    mean: float
    median: float
    maximum: float
    minimum: float
    std_dev: float
    skewness: float | None
    kurtosis: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def describe(samples: Sequence[float]) -> DescriptiveStats:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise DomainError("describe() needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise DomainError("describe() received non-finite samples")
    n = x.size
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    std = math.sqrt(float(np.sum(d * d)) / (n - 1)) if n > 1 else 0.0
    # m2**2 can underflow for tiny but non-zero spreads
    if m2 * m2 > 0:
        m3 = float(np.mean(d ** 3))
        m4 = float(np.mean(d ** 4))
        skew, kurt = m3 / m2 ** 1.5, m4 / (m2 * m2)
    else:
        skew = kurt = None
    return DescriptiveStats(
        n=n,
        mean=mean,
        median=float(np.median(x)),
        maximum=float(x.max()),
        minimum=float(x.min()),
        std_dev=std,
        skewness=skew,
        kurtosis=kurt,
    )


def _beta_cf(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge in {CF_MAX_ITER} "
        f"iterations (a={a}, b={b}, x={x})"
    )


def betainc(a: float, b: float, x: float, y: float | None = None) -> float:
    """Regularized incomplete beta ``I_x(a, b)``.

    ``y`` may carry ``1 - x`` computed without cancellation.
    """
    if a <= 0 or b <= 0:
        raise DomainError(f"betainc needs a, b > 0, got a={a}, b={b}")
    if y is None:
        y = 1.0 - x
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"betainc needs 0 <= x <= 1, got {x}")
    if x == 0.0:
        return 0.0
    if y == 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, y) / b


def _t_tail2(t: float, df: float) -> float:
    """P(|T| > |t|) for T ~ Student-t(df)."""
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    t2 = t * t
    denom = df + t2
    return betainc(df / 2.0, 0.5, df / denom, t2 / denom)


def student_t_cdf(t: float, df: float) -> float:
    tail = _t_tail2(t, df)
    return 1.0 - 0.5 * tail if t > 0 else 0.5 * tail


def two_sided_p(t: float, df: float) -> float:
    return min(1.0, _t_tail2(t, df))
