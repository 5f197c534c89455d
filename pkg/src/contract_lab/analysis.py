"""Contract-by-contract orchestration, per-model aggregation and selection."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DomainError, EmptyAnalysisError, EmptySummaryError, NumericError
from .marketdata import ObservationPanel, contract_label
from .measures import DependentKind
from .regress import VARIABLES, ModelSpec, RegressionFit, ols_fit

DEFAULT_ALPHA = 0.10


@dataclass(frozen=True)
class FitFailure:
    """A fit slot that could not be filled. ``label`` is what tables print."""

    kind: str
    label: str
    message: str


@dataclass(frozen=True)
class ContractResult:
    asset: str
    contract_month: tuple[int, int]
    n_rows: int
    fits: dict[ModelSpec, RegressionFit | FitFailure] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return contract_label(self.contract_month)


@dataclass(frozen=True)
class ModelSummary:
    model: ModelSpec
    pct_significant: dict[str, float]
    pct_negative_given_significant: dict[str, float | None]
    mean_adj_r2: float
    contracts_used: int
    contracts_failed: int

    def to_dict(self) -> dict:
        return {
            "model": self.model.label,
            "pct_significant": dict(self.pct_significant),
            "pct_negative_given_significant": dict(self.pct_negative_given_significant),
            "mean_adj_r2": self.mean_adj_r2,
            "contracts_used": self.contracts_used,
            "contracts_failed": self.contracts_failed,
        }


@dataclass(frozen=True)
class ComparisonReport:
    asset: str
    dependent: DependentKind
    alpha: float
    summaries: tuple[ModelSummary, ...]
    best: ModelSpec


def enumerate_models(full_set: Iterable[str] = VARIABLES) -> list[ModelSpec]:
    """Every non-empty subset, by size then canonical variable order."""
    chosen = [v for v in VARIABLES if v in set(full_set)]
    unknown = set(full_set) - set(VARIABLES)
    if unknown:
        raise DomainError(f"unknown variable(s): {', '.join(sorted(unknown))}")
    return [
        ModelSpec(combo)
        for size in range(1, len(chosen) + 1)
        for combo in itertools.combinations(chosen, size)
    ]


def _fit_slot(panel: ObservationPanel, model: ModelSpec) -> RegressionFit | FitFailure:
    try:
        return ols_fit(panel, model)
    except NumericError as exc:
        label = getattr(exc, "label", "numeric failure")
        return FitFailure(type(exc).__name__, label, str(exc))
    except DomainError as exc:
        return FitFailure(type(exc).__name__, "invalid data", str(exc))


def run_contract_by_contract(
    panels: Sequence[ObservationPanel],
    models: Sequence[ModelSpec],
    alpha: float = DEFAULT_ALPHA,
    workers: int | None = None,
) -> list[ContractResult]:
    """Fit every model to every panel independently.

    A failing (panel, model) pair is recorded as a :class:`FitFailure`
    and never aborts the batch. Results keep the input panel order and
    canonical model order regardless of ``workers``.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not panels or all(len(p) == 0 for p in panels):
        raise EmptyAnalysisError("no observations to analyse")
    models = sorted(set(models), key=ModelSpec.sort_key)
    jobs = [(p, m) for p in panels for m in models]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fitted = list(pool.map(lambda job: _fit_slot(*job), jobs))
    else:
        fitted = [_fit_slot(p, m) for p, m in jobs]

    out = []
    it = iter(fitted)
    for panel in panels:
        fits = {m: next(it) for m in models}
        out.append(ContractResult(panel.asset, panel.contract_month, len(panel), fits))
    return out


def summarize(
    results: Sequence[ContractResult], model: ModelSpec, alpha: float = DEFAULT_ALPHA
) -> ModelSummary:
    fits = [r.fits.get(model) for r in results]
    ok = [f for f in fits if isinstance(f, RegressionFit)]
    if not ok:
        raise EmptySummaryError(f"model {model.label} has no successful fit")
    pct_sig: dict[str, float] = {}
    pct_neg: dict[str, float | None] = {}
    for var in model.predictors:
        sig = [f.term(var)["coef"] for f in ok if f.term(var)["p"] < alpha]
        pct_sig[var] = 100.0 * len(sig) / len(ok)
        pct_neg[var] = 100.0 * sum(c < 0 for c in sig) / len(sig) if sig else None
    return ModelSummary(
        model=model,
        pct_significant=pct_sig,
        pct_negative_given_significant=pct_neg,
        mean_adj_r2=sum(f.adj_r2 for f in ok) / len(ok),
        contracts_used=len(ok),
        contracts_failed=len(fits) - len(ok),
    )


def select_best(summaries: Sequence[ModelSummary]) -> ModelSpec:
    """Highest mean adjusted R²; ties go to fewer predictors, then canonical order."""
    if not summaries:
        raise DomainError("select_best needs at least one summary")
    best = min(summaries, key=lambda s: (-s.mean_adj_r2, s.model.sort_key()))
    return best.model


def compare(
    results: Sequence[ContractResult],
    models: Sequence[ModelSpec],
    alpha: float,
    asset: str,
    dependent: DependentKind | str,
) -> ComparisonReport:
    """Summarize every model that has at least one successful fit and pick the best."""
    summaries = []
    for model in sorted(set(models), key=ModelSpec.sort_key):
        try:
            summaries.append(summarize(results, model, alpha))
        except EmptySummaryError:
            continue
    if not summaries:
        raise EmptySummaryError("no model has a successful fit")
    return ComparisonReport(
        asset=asset,
        dependent=DependentKind(dependent),
        alpha=alpha,
        summaries=tuple(summaries),
        best=select_best(summaries),
    )
