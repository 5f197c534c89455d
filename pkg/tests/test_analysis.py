import random

import numpy as np
import pytest

from contract_lab.analysis import (
    ContractResult,
    FitFailure,
    ModelSummary,
    compare,
    enumerate_models,
    run_contract_by_contract,
    select_best,
    summarize,
)
from contract_lab.errors import DomainError, EmptyAnalysisError, EmptySummaryError
from contract_lab.regress import ModelSpec, RegressionFit
from contract_lab.synth import SynthConfig, generate_market
from test_regress import panel_from

MVO = ModelSpec.parse("mvo")
M = ModelSpec.parse("m")


def fake_fit(model, coefs, ps, adj=0.1):
    k = model.k + 1
    return RegressionFit(model, 42, tuple(coefs), (1.0,) * k, tuple(coefs), tuple(ps),
                         max(adj, 0.0), adj, 1.0)


def summary(label, adj):
    m = ModelSpec.parse(label)
    return ModelSummary(m, {}, {}, adj, 1, 0)


def test_enumerate_models():
    labels = [m.label for m in enumerate_models()]
    assert labels == ["m", "v", "o", "mv", "mo", "vo", "mvo"]
    assert labels.count("mvo") == 1 and labels[-1] == "mvo"
    assert [m.label for m in enumerate_models({"m"})] == ["m"]


@pytest.fixture(scope="module")
def synthetic():
    _, _, truth = generate_market(SynthConfig(n_contracts=47, noise_sigma=0.5, seed=77))
    return truth.panels


def test_47_by_7_slots(synthetic):
    results = run_contract_by_contract(synthetic, enumerate_models(), 0.1)
    assert len(results) == 47
    slots = [f for r in results for f in r.fits.values()]
    assert len(slots) == 329
    assert all(isinstance(f, (RegressionFit, FitFailure)) for f in slots)


def test_short_panel_failure_is_isolated():
    good = panel_from([1, 3, 2, 5, 4, 6, 8], [6, 5, 4, 3, 2, 1, 0],
                      [1, 4, 2, 3, 9, 1, 2], [3, 1, 4, 1, 5, 9, 2])
    short = panel_from([1, 2, 3], [2, 1, 0], [1, 2, 4], [3, 1, 1])
    res = run_contract_by_contract([good, short], [M, MVO], 0.1)
    assert isinstance(res[0].fits[MVO], RegressionFit)
    failure = res[1].fits[MVO]
    assert isinstance(failure, FitFailure) and failure.label == "insufficient data"
    assert isinstance(res[1].fits[M], RegressionFit)


def test_threads_do_not_change_results(synthetic):
    a = run_contract_by_contract(synthetic, enumerate_models(), 0.1)
    b = run_contract_by_contract(synthetic, enumerate_models(), 0.1, workers=4)
    assert a == b


def test_run_validation():
    with pytest.raises(EmptyAnalysisError):
        run_contract_by_contract([], [M], 0.1)
    with pytest.raises(DomainError):
        run_contract_by_contract([panel_from([1, 2, 3], [2, 1, 0])], [M], 1.5)


def test_summarize_signs():
    r1 = ContractResult("x", (2020, 1), 42, {M: fake_fit(M, (1, 2.0), (0.5, 0.01), 0.2)})
    r2 = ContractResult("x", (2020, 2), 42, {M: fake_fit(M, (1, -2.0), (0.5, 0.02), 0.4)})
    s = summarize([r1, r2], M, 0.1)
    assert s.pct_significant == {"m": 100.0}
    assert s.pct_negative_given_significant == {"m": 50.0}
    assert s.mean_adj_r2 == pytest.approx(0.3)


def test_summarize_undefined_negative_share():
    o = ModelSpec.parse("o")
    rs = [ContractResult("x", (2020, i), 42, {o: fake_fit(o, (1, -1), (0.5, 0.5))})
          for i in (1, 2)]
    s = summarize(rs, o, 0.1)
    assert s.pct_significant["o"] == 0
    assert s.pct_negative_given_significant["o"] is None


def test_summarize_mean_adj_and_failures():
    fails = FitFailure("InsufficientDataError", "insufficient data", "")
    rs = [ContractResult("x", (2020, i), 42, {M: fake_fit(M, (1, 1), (0.5, 0.5), a)})
          for i, a in ((1, 0.2), (2, 0.3), (3, 0.4))]
    rs.append(ContractResult("x", (2020, 4), 3, {M: fails}))
    s = summarize(rs, M, 0.1)
    assert s.mean_adj_r2 == pytest.approx(0.3)
    assert (s.contracts_used, s.contracts_failed) == (3, 1)
    with pytest.raises(EmptySummaryError):
        summarize(rs[3:], M, 0.1)


def test_summarize_order_invariant(synthetic):
    results = run_contract_by_contract(synthetic, [MVO], 0.1)
    shuffled = list(results)
    random.Random(4).shuffle(shuffled)
    a, b = summarize(results, MVO, 0.1), summarize(shuffled, MVO, 0.1)
    assert a.pct_significant == b.pct_significant
    assert a.pct_negative_given_significant == b.pct_negative_given_significant
    assert a.contracts_used + a.contracts_failed == len(synthetic)


def test_alpha_extremes(synthetic):
    results = run_contract_by_contract(synthetic, [MVO], 0.1)
    assert all(v == 100 for v in summarize(results, MVO, 1.0).pct_significant.values())
    _, _, null = generate_market(SynthConfig(n_contracts=40, dgp_beta=(20, 0, 0, 0),
                                             noise_sigma=1.0, seed=5))
    res = run_contract_by_contract(null.panels, [MVO], 0.1)
    assert all(v == 0 for v in summarize(res, MVO, 1e-12).pct_significant.values())


def test_select_best_paper_values():
    # mean adjusted R² of the m, mv and mvo rows for bitcoin volatility
    s = [summary("m", 0.031), summary("mv", 0.254), summary("mvo", 0.280)]
    assert select_best(s).label == "mvo"


def test_select_best_tie_prefers_parsimony():
    assert select_best([summary("mvo", 0.25), summary("mv", 0.25)]).label == "mv"
    assert select_best([summary("vo", 0.25), summary("mv", 0.25)]).label == "mv"
    assert select_best([summary("o", 0.1)]).label == "o"


def test_select_best_monotone_transform():
    rng = np.random.default_rng(1)
    labels = [m.label for m in enumerate_models()]
    vals = rng.uniform(-0.1, 0.9, len(labels))
    a = select_best([summary(lab, v) for lab, v in zip(labels, vals)])
    b = select_best([summary(lab, np.exp(3 * v) + 1) for lab, v in zip(labels, vals)])
    assert a == b


def test_compare_report(synthetic):
    results = run_contract_by_contract(synthetic, enumerate_models(), 0.1)
    rep = compare(results, enumerate_models(), 0.1, "bitcoin", "volatility")
    assert len(rep.summaries) == 7
    assert rep.best == max(rep.summaries, key=lambda s: s.mean_adj_r2).model
