"""Small fixture builders shared by the test modules."""

import random

from contract_lab.marketdata import ContractSeries, DailyBar, SpotSeries, last_friday
from contract_lab.synth import weekdays_ending


def make_series(n=42, asset="bitcoin", cm=(2018, 3), seed=0, low_override=None):
    """n weekday bars ending at the contract's expiry, deterministic prices."""
    rnd = random.Random(seed)
    expiry = last_friday(*cm)
    bars = []
    for i, d in enumerate(weekdays_ending(expiry, n)):
        close = 100.0 + rnd.uniform(-5, 5)
        spread = rnd.uniform(0.001, 0.05)
        low = close * (1 - spread)
        if low_override is not None and i == low_override[0]:
            low = low_override[1]
        bars.append(DailyBar(d, close * (1 + spread), low, close,
                             float(rnd.randint(10, 5000)), float(rnd.randint(10, 9000))))
    return ContractSeries(asset, cm, expiry, tuple(bars))


def make_spot(series, asset=None, skip=()):
    pts = [(b.date, b.close * 1.001) for i, b in enumerate(series.bars) if i not in skip]
    return SpotSeries(asset or series.asset, tuple(pts))


ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


def criterion(name):
    """Record a pass/fail line for an acceptance criterion."""
    import functools

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                ACCEPTANCE_LOG.append((name, False, f"{type(exc).__name__}: {exc}".splitlines()[0]))
                raise
            ACCEPTANCE_LOG.append((name, True, detail or ""))
        return run
    return wrap
