import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from contract_lab.errors import DomainError, EmptyPanelError
from contract_lab.marketdata import maturity_counters
from contract_lab.measures import (
    DROP_NONPOSITIVE,
    DependentKind,
    ScalingPolicy,
    basis_pct,
    build_panel,
    parkinson_volatility,
)
from helpers import make_series, make_spot

prices = st.floats(1e-3, 1e6)


def test_parkinson_zero_range():
    assert parkinson_volatility(100, 100) == 0.0


def test_parkinson_ratio_two():
    expected = math.log(2) ** 2 / (4 * math.log(2))
    assert expected == pytest.approx(0.17328680, abs=1e-8)
    assert parkinson_volatility(200, 100) == pytest.approx(math.log(2) / 4, abs=1e-15)


@pytest.mark.parametrize("h, l", [(50, -1), (0, 1), (1, 0)])
def test_parkinson_domain(h, l):
    with pytest.raises(DomainError):
        parkinson_volatility(h, l)


@given(prices, st.floats(0, 2), st.floats(1e-3, 1e3))
def test_parkinson_scale_invariant(low, log_ratio, k):
    high = low * math.exp(log_ratio)
    assert parkinson_volatility(k * high, k * low) == pytest.approx(
        parkinson_volatility(high, low), rel=1e-9, abs=1e-12)


@given(prices, st.floats(0, 1), st.floats(0, 1))
def test_parkinson_monotone_in_high(low, a, b):
    h1, h2 = low * math.exp(min(a, b)), low * math.exp(max(a, b))
    assert parkinson_volatility(h1, low) <= parkinson_volatility(h2, low)


def test_basis_examples():
    assert basis_pct(1474.6, 1474.6) == 0.0
    assert basis_pct(9416.0, 9470.0) == pytest.approx(-0.5702217529039071, rel=1e-12)
    with pytest.raises(DomainError):
        basis_pct(1.0, 0.0)


@given(st.floats(-1e5, 1e5), st.floats(1e-2, 1e5), st.floats(1e-3, 1e3))
def test_basis_rescaling(s, f, k):
    assert basis_pct(k * s, k * f) == pytest.approx(basis_pct(s, f), rel=1e-9, abs=1e-9)
    assert basis_pct(f, f) == 0.0


# -- panels ----------------------------------------------------------------

def test_clean_volatility_panel():
    s = make_series(42)
    p = build_panel(s, None, "volatility")
    assert len(p) == 42 and p.dropped_rows == 0
    assert [r.m for r in p.rows] == maturity_counters(s)
    b = s.bars[0]
    assert p.rows[0].dv == pytest.approx(parkinson_volatility(b.high, b.low) * 1e4, rel=1e-15)


def test_nonpositive_low_is_dropped():
    s = make_series(42, cm=(2020, 4), low_override=(10, -1.0))
    p = build_panel(s, None, DependentKind.VOLATILITY)
    assert len(p) == 41
    assert p.dropped == {DROP_NONPOSITIVE: 1}


def test_activity_divisor_per_asset():
    gold = make_series(42, asset="gold")
    btc = make_series(42, asset="bitcoin")
    pg = build_panel(gold, None, "volatility")
    pb = build_panel(btc, None, "volatility")
    assert pg.rows[0].v == gold.bars[0].volume / 10_000
    assert pg.rows[0].o == gold.bars[0].open_interest / 10_000
    assert pb.rows[0].v == btc.bars[0].volume
    assert ScalingPolicy().activity_divisor("oil") == 10_000
    assert ScalingPolicy().activity_divisor("ether") == 1


def test_basis_panel_uses_same_day_close():
    s = make_series(42)
    spot = make_spot(s, skip={5})
    p = build_panel(s, spot, "basis")
    assert len(p) == 41 and p.unmatched == 1
    row = p.rows[0]
    assert row.dv == pytest.approx(basis_pct(s.bars[0].close * 1.001, s.bars[0].close) * 1e4)


def test_basis_keeps_negative_spot():
    s = make_series(5)
    from contract_lab.marketdata import SpotSeries
    spot = SpotSeries("bitcoin", tuple((b.date, -1.0) for b in s.bars))
    assert len(build_panel(s, spot, "basis")) == 5


def test_empty_panel():
    s = make_series(1, low_override=(0, 0.0))
    with pytest.raises(EmptyPanelError):
        build_panel(s, None, "volatility")


@given(st.integers(1, 80), st.integers(1, 80), st.sets(st.integers(0, 79), max_size=5))
def test_rows_plus_dropped_equals_window(n, window, bad):
    bad_idx = sorted(i for i in bad if i < n)
    s = make_series(n, seed=n)
    if bad_idx:
        from dataclasses import replace
        bars = list(s.bars)
        for i in bad_idx:
            bars[i] = replace(bars[i], low=-1.0)
        s = replace(s, bars=tuple(bars))
    try:
        p = build_panel(s, None, "volatility", window_days=window)
    except EmptyPanelError:
        return
    assert len(p) + p.dropped_rows == min(window, n)


def test_dv_scaling_linear():
    s = make_series(42)
    a = build_panel(s, None, "volatility", ScalingPolicy(dv_factor=10_000))
    b = build_panel(s, None, "volatility", ScalingPolicy(dv_factor=20_000))
    assert all(rb.dv == 2 * ra.dv for ra, rb in zip(a.rows, b.rows))


def test_policy_validation():
    with pytest.raises(DomainError):
        ScalingPolicy(dv_factor=0)
    with pytest.raises(DomainError):
        ScalingPolicy(divisors={"gold": -1})
