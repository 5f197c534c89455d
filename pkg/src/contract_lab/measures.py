"""Dependent-variable measures and panel construction.

Two daily measures are supported: the Parkinson high/low range variance
and the percentage spot/futures basis. Both are scaled by ``dv_factor``
(10,000 by default); volume and open interest are divided by a per-asset
``activity_divisor`` (10,000 for gold and oil, 1 otherwise). Variables
stay in levels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import DomainError, EmptyPanelError
from .marketdata import (
    ContractSeries,
    ObservationPanel,
    ObservationRow,
    SpotSeries,
    align_with_spot,
    maturity_counters,
)

FOUR_LN2 = 4.0 * math.log(2.0)

DROP_NONPOSITIVE = "non-positive price"
DROP_ZERO_FUTURES = "zero futures price"


class DependentKind(str, enum.Enum):
    VOLATILITY = "volatility"
    BASIS = "basis"


def _default_divisors() -> dict[str, float]:
    return {"bitcoin": 1.0, "gold": 10_000.0, "oil": 10_000.0}


@dataclass(frozen=True)
class ScalingPolicy:
    dv_factor: float = 10_000.0
    divisors: Mapping[str, float] = field(default_factory=_default_divisors)
    default_divisor: float = 1.0

    def __post_init__(self):
        if not self.dv_factor > 0:
            raise DomainError(f"dv_factor must be positive, got {self.dv_factor}")
        for asset, d in list(self.divisors.items()) + [("<default>", self.default_divisor)]:
            if not d > 0:
                raise DomainError(f"activity divisor for {asset} must be positive, got {d}")

    def activity_divisor(self, asset: str) -> float:
        return float(self.divisors.get(asset, self.default_divisor))

    def with_divisor(self, asset: str, divisor: float) -> "ScalingPolicy":
        divisors = dict(self.divisors)
        divisors[asset] = divisor
        return ScalingPolicy(self.dv_factor, divisors, self.default_divisor)

    def to_dict(self) -> dict:
        return {
            "dv_factor": self.dv_factor,
            "activity_divisors": dict(sorted(self.divisors.items())),
            "default_divisor": self.default_divisor,
        }


def parkinson_volatility(high: float, low: float) -> float:
    """Daily range variance ``(ln H - ln L)**2 / (4 ln 2)``."""
    if not (high > 0 and low > 0):
        raise DomainError(f"high and low must be positive, got high={high}, low={low}")
    if low > high:
        raise DomainError(f"low {low} exceeds high {high}")
    r = math.log(high / low)
    return r * r / FOUR_LN2


def basis_pct(spot: float, futures: float) -> float:
    """``(spot - futures) / futures * 100``."""
    if futures == 0:
        raise DomainError("futures price is zero")
    return (spot - futures) / futures * 100.0


def build_panel(
    series: ContractSeries,
    spot: SpotSeries | None,
    kind: DependentKind | str,
    policy: ScalingPolicy | None = None,
    window_days: int = 42,
) -> ObservationPanel:
    """Build the regression rows for one contract.

    For ``basis`` the contract is first joined with ``spot`` on date
    (same-day closes), then the final ``window_days`` joined bars are kept.
    Rows whose measure is undefined are dropped and counted by reason.
    """
    kind = DependentKind(kind)
    policy = policy or ScalingPolicy()
    if window_days <= 0:
        raise DomainError(f"window_days must be positive, got {window_days}")

    counters = dict(zip(series.dates, maturity_counters(series)))
    if kind is DependentKind.BASIS:
        if spot is None:
            raise DomainError("basis panel needs a spot series")
        pairs, unmatched = align_with_spot(series, spot)
    else:
        pairs, unmatched = [(b, None) for b in series.bars], 0
    pairs = pairs[-window_days:]

    divisor = policy.activity_divisor(series.asset)
    rows = []
    dropped: dict[str, int] = {}
    for bar, s in pairs:
        if kind is DependentKind.VOLATILITY:
            if bar.has_nonpositive_price:
                dropped[DROP_NONPOSITIVE] = dropped.get(DROP_NONPOSITIVE, 0) + 1
                continue
            raw = parkinson_volatility(bar.high, bar.low)
        else:
            if bar.close == 0:
                dropped[DROP_ZERO_FUTURES] = dropped.get(DROP_ZERO_FUTURES, 0) + 1
                continue
            raw = basis_pct(s, bar.close)
        rows.append(ObservationRow(
            date=bar.date,
            dv=raw * policy.dv_factor,
            m=counters[bar.date],
            v=bar.volume / divisor,
            o=bar.open_interest / divisor,
        ))
    if not rows:
        raise EmptyPanelError(f"{series.label}: no usable rows for {kind.value}")
    return ObservationPanel(series.asset, series.contract_month, tuple(rows), dropped, unmatched)
