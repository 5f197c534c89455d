"""Seeded synthetic futures market with a planted linear volatility signal.

Layout of a generated market
----------------------------
* ``n_contracts`` consecutive monthly contracts starting at
  ``(start_year, start_month)``, each expiring on the month's last Friday.
* Each contract trades on the ``listing_days`` weekdays ending at expiry.
* One spot path (GBM, ``dt = 1/252``) covers every weekday from the first
  listing to the last expiry; stream seed is ``seed``.
* Contract ``i`` (1-based) draws from its own stream seeded with
  ``seed ^ i``: per bar one normal for volume, then one for noise.
* The close is the cost-of-carry price with ``T = m / 252``, so the basis
  is exactly zero on the expiry bar. High and low straddle the close
  symmetrically in log space, sized so the Parkinson measure equals the
  planted dependent value.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import asdict, dataclass, field

from .errors import DomainError, GenerationError
from .marketdata import (
    ContractSeries,
    DailyBar,
    ObservationPanel,
    SpotSeries,
    last_friday,
    normalize_asset,
)
from .measures import FOUR_LN2, DependentKind, ScalingPolicy, build_panel
from .rng import MASK64, Xoshiro256

TRADING_DAYS_PER_YEAR = 252


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 20171218
    asset: str = "bitcoin"
    n_contracts: int = 47
    window_days: int = 42
    listing_days: int = 84
    start_year: int = 2018
    start_month: int = 1
    spot0: float = 10_000.0
    drift: float = 0.0
    vol: float = 0.8
    r: float = 0.02
    u: float = 0.0
    y: float = 0.0
    oi_peak: float = 1_000.0
    volume_mean: float = 500.0
    volume_dispersion: float = 0.3
    dgp_beta: tuple[float, float, float, float] = (5.0, 0.3, 0.02, -0.01)
    noise_sigma: float = 0.25

    def __post_init__(self):
        if not self.spot0 > 0:
            raise DomainError("spot0 must be positive")
        if self.vol < 0:
            raise DomainError("vol must be non-negative")
        if self.window_days < 4:
            raise DomainError("window_days must be at least 4")
        if self.listing_days < self.window_days:
            raise DomainError("listing_days must be at least window_days")
        if self.n_contracts < 1:
            raise DomainError("n_contracts must be at least 1")
        if not 1 <= self.start_month <= 12:
            raise DomainError("start_month must be in 1..12")
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be non-negative")
        if self.oi_peak < 0 or self.volume_mean <= 0:
            raise DomainError("oi_peak must be >= 0 and volume_mean > 0")
        if len(self.dgp_beta) != 4:
            raise DomainError("dgp_beta needs four values (intercept, m, v, o)")
        object.__setattr__(self, "dgp_beta", tuple(float(b) for b in self.dgp_beta))
        object.__setattr__(self, "seed", int(self.seed) & MASK64)
        object.__setattr__(self, "asset", normalize_asset(self.asset))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dgp_beta"] = list(self.dgp_beta)
        return d


@dataclass(frozen=True)
class SynthTruth:
    true_beta: tuple[float, float, float, float]
    panels: tuple[ObservationPanel, ...]
    planted_dv: dict[tuple[int, int], tuple[float, ...]] = field(default_factory=dict)
    clean_dv: dict[tuple[int, int], tuple[float, ...]] = field(default_factory=dict)


def weekdays_between(start: dt.date, end: dt.date) -> list[dt.date]:
    days = []
    d = start
    while d <= end:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def weekdays_ending(end: dt.date, count: int) -> list[dt.date]:
    days = []
    d = end
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d -= dt.timedelta(days=1)
    return days[::-1]


def gbm_path(config: SynthConfig, n_days: int, rng: Xoshiro256 | None = None) -> list[float]:
    """``n_days`` prices starting at ``spot0`` with lognormal daily steps."""
    rng = rng or Xoshiro256(config.seed)
    dt_ = 1.0 / TRADING_DAYS_PER_YEAR
    mu = (config.drift - 0.5 * config.vol ** 2) * dt_
    sd = config.vol * math.sqrt(dt_)
    prices = [config.spot0]
    for _ in range(n_days - 1):
        prices.append(prices[-1] * math.exp(mu + sd * rng.normal()))
    return prices[:n_days]


def gbm_spot(config: SynthConfig, n_days: int, start: dt.date | None = None) -> SpotSeries:
    """GBM spot path on consecutive weekdays from ``start``."""
    if start is None:
        start = dt.date(config.start_year, config.start_month, 1)
    dates = []
    d = start
    while len(dates) < n_days:
        if d.weekday() < 5:
            dates.append(d)
        d += dt.timedelta(days=1)
    return SpotSeries(config.asset, tuple(zip(dates, gbm_path(config, n_days))))


def carry_futures(spot: float, r: float, u: float, y: float, T: float) -> float:
    """Cost-of-carry price ``S * exp((r + u - y) * T)``."""
    if not spot > 0:
        raise DomainError("spot must be positive")
    if T < 0:
        raise DomainError("time to maturity must be non-negative")
    return spot * math.exp((r + u - y) * T)


def oi_profile(m: float, life: float, peak: float) -> int:
    """Open interest as a downward parabola in ``m``: zero at listing and expiry, ``peak`` midway."""
    if m < 0 or m > life:
        raise DomainError(f"maturity {m} outside [0, {life}]")
    if peak < 0:
        raise DomainError("peak must be non-negative")
    if life == 0:
        return 0
    return int(round(4.0 * peak * m * (life - m) / (life * life)))


def _contract_months(config: SynthConfig) -> list[tuple[int, int]]:
    out = []
    y, m = config.start_year, config.start_month
    for _ in range(config.n_contracts):
        out.append((y, m))
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return out


def generate_market(
    config: SynthConfig, policy: ScalingPolicy | None = None
) -> tuple[list[ContractSeries], SpotSeries, SynthTruth]:
    policy = policy or ScalingPolicy()
    divisor = policy.activity_divisor(config.asset)
    b0, b1, b2, b3 = config.dgp_beta
    months = _contract_months(config)
    expiries = [last_friday(*cm) for cm in months]
    bar_dates = [weekdays_ending(e, config.listing_days) for e in expiries]

    spot_dates = weekdays_between(bar_dates[0][0], expiries[-1])
    spot_prices = gbm_path(config, len(spot_dates))
    spot = SpotSeries(config.asset, tuple(zip(spot_dates, spot_prices)))
    spot_at = dict(zip(spot_dates, spot_prices))

    life = config.listing_days - 1
    series_list = []
    planted: dict[tuple[int, int], tuple[float, ...]] = {}
    clean: dict[tuple[int, int], tuple[float, ...]] = {}
    for idx, (cm, expiry, dates) in enumerate(zip(months, expiries, bar_dates), start=1):
        rng = Xoshiro256(config.seed ^ idx)
        bars, dvs, cleans = [], [], []
        for i, date in enumerate(dates):
            m = life - i
            z_vol = rng.normal()
            z_noise = rng.normal()
            volume = max(1, round(config.volume_mean * math.exp(
                config.volume_dispersion * z_vol - 0.5 * config.volume_dispersion ** 2)))
            oi = oi_profile(m, life, config.oi_peak)
            dv_clean = b0 + b1 * m + b2 * (volume / divisor) + b3 * (oi / divisor)
            dv = dv_clean + config.noise_sigma * z_noise
            if dv <= 0:
                raise GenerationError(
                    f"planted dependent value {dv:.6g} <= 0 for contract {cm} on "
                    f"{date.isoformat()}; raise the intercept dgp_beta[0]"
                )
            x = math.sqrt(FOUR_LN2 * dv / policy.dv_factor)
            close = carry_futures(spot_at[date], config.r, config.u, config.y,
                                  m / TRADING_DAYS_PER_YEAR)
            bars.append(DailyBar(
                date=date,
                high=close * math.exp(0.5 * x),
                low=close * math.exp(-0.5 * x),
                close=close,
                volume=float(volume),
                open_interest=float(oi),
            ))
            dvs.append(dv)
            cleans.append(dv_clean)
        series_list.append(ContractSeries(config.asset, cm, expiry, tuple(bars)))
        planted[cm] = tuple(dvs)
        clean[cm] = tuple(cleans)

    panels = tuple(
        build_panel(s, spot, DependentKind.VOLATILITY, policy, config.window_days)
        for s in series_list
    )
    truth = SynthTruth(config.dgp_beta, panels, planted, clean)
    return series_list, spot, truth
