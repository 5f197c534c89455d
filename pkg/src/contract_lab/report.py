"""Render statistics, coefficient tables and model comparisons.

Three output formats are supported. Markdown rounds round-half-even to
the configured precision and bolds percentages above the threshold. CSV
and JSON carry full-precision values, identical between the two.
Non-finite numbers appear as ``null`` in JSON and as an empty CSV cell.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Mapping, Sequence

from . import __version__
from .analysis import ComparisonReport, ContractResult, FitFailure
from .errors import DomainError
from .marketdata import (
    ContractSeries,
    ObservationPanel,
    asset_sort_key,
    contract_label,
)
from .regress import VARIABLES, ModelSpec, RegressionFit, significance_stars
from .stats import ESTIMATOR_CONVENTIONS, DescriptiveStats

FORMATS = ("markdown", "csv", "json")
ROLES = ("spot", "futures", "volume", "open_interest")
ROLE_TITLES = {
    "spot": "Spot Price",
    "futures": "Futures Price",
    "volume": "Volume",
    "open_interest": "Open Int.",
}
STAT_ROWS = (
    ("mean", "Mean"),
    ("median", "Median"),
    ("maximum", "Maximum"),
    ("minimum", "Minimum"),
    ("std_dev", "Std Dev."),
    ("skewness", "Skewness"),
    ("kurtosis", "Kurtosis"),
)

DEFAULT_DECIMALS = {
    "stat": 3,
    "pct": 1,
    "adj_r2": 3,
    "coef": 3,
    "p": 3,
}

DESCRIPTIVES_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["table", "conventions", "columns"],
    "properties": {
        "table": {"const": "descriptives"},
        "conventions": {"type": "object"},
        "columns": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["asset", "role", "n"] + [k for k, _ in STAT_ROWS],
                "properties": {
                    "asset": {"type": "string"},
                    "role": {"enum": list(ROLES)},
                    "n": {"type": "integer", "minimum": 1},
                    **{k: {"type": ["number", "null"]} for k, _ in STAT_ROWS},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class RenderOptions:
    format: str = "markdown"
    bold_threshold: float = 50.0
    decimals: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_DECIMALS))
    include_manifest: bool = False

    def __post_init__(self):
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {', '.join(FORMATS)}, got {self.format!r}")
        merged = dict(DEFAULT_DECIMALS)
        merged.update(self.decimals)
        if any(d < 0 for d in merged.values()):
            raise DomainError("decimals must be non-negative")
        object.__setattr__(self, "decimals", merged)

    def places(self, column: str) -> int:
        return self.decimals[column]


def fmt_fixed(x: float | None, places: int) -> str:
    """Round-half-even on the shortest decimal repr of ``x``; ``-`` for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "-"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    q = Decimal(1).scaleb(-places)
    d = Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_EVEN)
    if d == 0:
        d = abs(d)
    return f"{d:f}"


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _csv_num(x) -> str:
    if x is None:
        return ""
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _md_table(header: Sequence[str], rows: Sequence[Sequence[str]], align: str = "r") -> str:
    lines = ["| " + " | ".join(header) + " |"]
    marks = [":--"] + [("--:" if align == "r" else ":-:")] * (len(header) - 1)
    lines.append("|" + "|".join(marks) + "|")
    lines.extend("| " + " | ".join(r) + " |" for r in rows)
    return "\n".join(lines) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# descriptive statistics


def _ordered_stat_keys(stats: Mapping[tuple[str, str], DescriptiveStats]):
    def key(k):
        asset, role = k
        role_rank = ROLES.index(role) if role in ROLES else len(ROLES)
        return (asset_sort_key(asset), role_rank, role)
    return sorted(stats, key=key)


def render_descriptives(
    stats: Mapping[tuple[str, str], DescriptiveStats], opts: RenderOptions | None = None
) -> str:
    opts = opts or RenderOptions()
    if not stats:
        raise DomainError("no series to describe")
    keys = _ordered_stat_keys(stats)
    if opts.format == "json":
        cols = []
        for asset, role in keys:
            s = stats[(asset, role)]
            entry = {"asset": asset, "role": role, "n": s.n}
            entry.update({k: _json_num(getattr(s, k)) for k, _ in STAT_ROWS})
            cols.append(entry)
        return _dumps({"table": "descriptives", "conventions": ESTIMATOR_CONVENTIONS,
                       "columns": cols})
    if opts.format == "csv":
        header = ["statistic"] + [f"{a}:{r}" for a, r in keys]
        rows = [["n"] + [stats[k].n for k in keys]]
        rows += [[key] + [_csv_num(getattr(stats[k], key)) for k in keys] for key, _ in STAT_ROWS]
        return _csv_text(header, rows)
    places = opts.places("stat")
    header = [""] + [f"{a} {ROLE_TITLES.get(r, r)}" for a, r in keys]
    rows = [
        [title] + [fmt_fixed(getattr(stats[k], key), places) for k in keys]
        for key, title in STAT_ROWS
    ]
    return _md_table(header, rows)


def parse_markdown_table(text: str) -> list[list[str]]:
    """Cells of every data row of a markdown pipe table (header and rule skipped)."""
    rows = []
    lines = [ln for ln in text.splitlines() if ln.startswith("|")]
    for ln in lines[2:]:
        rows.append([c.strip() for c in ln.strip().strip("|").split("|")])
    return rows


# --------------------------------------------------------------------------
# model comparison


def _bold(cell: str, value: float | None, opts: RenderOptions) -> str:
    if value is not None and value > opts.bold_threshold:
        return f"**{cell}**"
    return cell


def render_comparison(report: ComparisonReport, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions()
    if not report.summaries:
        raise DomainError("comparison has no model summaries")
    if opts.format == "json":
        return _dumps({
            "table": "model_comparison",
            "asset": report.asset,
            "dependent": report.dependent.value,
            "alpha": report.alpha,
            "best": report.best.label,
            "models": [
                {
                    "model": s.model.label,
                    "pct_significant": {v: _json_num(x) for v, x in s.pct_significant.items()},
                    "pct_negative_given_significant": {
                        v: _json_num(x) for v, x in s.pct_negative_given_significant.items()
                    },
                    "mean_adj_r2": _json_num(s.mean_adj_r2),
                    "contracts_used": s.contracts_used,
                    "contracts_failed": s.contracts_failed,
                }
                for s in report.summaries
            ],
        })
    if opts.format == "csv":
        header = ["asset", "dependent", "alpha", "model"]
        for v in VARIABLES:
            header += [f"{v}_pct_significant", f"{v}_pct_negative"]
        header += ["mean_adj_r2", "contracts_used", "contracts_failed", "best"]
        rows = []
        for s in report.summaries:
            row = [report.asset, report.dependent.value, _csv_num(report.alpha), s.model.label]
            for v in VARIABLES:
                row += [_csv_num(s.pct_significant.get(v)),
                        _csv_num(s.pct_negative_given_significant.get(v))]
            row += [_csv_num(s.mean_adj_r2), s.contracts_used, s.contracts_failed,
                    int(s.model == report.best)]
            rows.append(row)
        return _csv_text(header, rows)

    pct = opts.places("pct")
    header = ["Model"]
    for v in VARIABLES:
        header += [v, "(−)"]
    header += ["adj R²", "used", "failed"]
    rows = []
    for s in report.summaries:
        row = [s.model.label]
        for v in VARIABLES:
            if v not in s.model.predictors:
                row += ["", ""]
                continue
            sig = s.pct_significant[v]
            row.append(_bold(fmt_fixed(sig, pct), sig, opts))
            row.append(fmt_fixed(s.pct_negative_given_significant[v], pct))
        row += [fmt_fixed(s.mean_adj_r2, opts.places("adj_r2")),
                str(s.contracts_used), str(s.contracts_failed)]
        rows.append(row)
    head = (
        f"## Model comparison: {report.asset}, {report.dependent.value}\n\n"
        f"Significant means p < alpha = {report.alpha:g}. "
        "(−) is the share of significant contracts with a negative coefficient.\n\n"
    )
    return head + _md_table(header, rows) + f"\nBest model: {report.best.label}\n"


# --------------------------------------------------------------------------
# per-contract coefficient table


def render_contract_table(
    results: Sequence[ContractResult], model: ModelSpec, opts: RenderOptions | None = None
) -> str:
    opts = opts or RenderOptions()
    slots = [(r, r.fits.get(model)) for r in results if model in r.fits]
    if not slots:
        raise DomainError(f"model {model.label} was not fitted")
    terms = model.terms

    if opts.format == "json":
        contracts = []
        for r, f in slots:
            entry = {"asset": r.asset, "contract": r.label,
                     "contract_month": list(r.contract_month)}
            if isinstance(f, RegressionFit):
                entry.update({
                    "status": "ok", "n": f.n,
                    "terms": {t: {k: _json_num(x) for k, x in f.term(t).items()} for t in terms},
                    "r2": _json_num(f.r2), "adj_r2": _json_num(f.adj_r2),
                })
            else:
                entry.update({"status": f.label, "error": f.kind, "message": f.message})
            contracts.append(entry)
        return _dumps({"table": "coefficients", "model": model.label, "contracts": contracts})

    if opts.format == "csv":
        header = ["asset", "contract", "model", "status", "n"]
        for t in terms:
            header += [f"{t}_coef", f"{t}_std_error", f"{t}_t", f"{t}_p"]
        header += ["r2", "adj_r2"]
        rows = []
        for r, f in slots:
            if isinstance(f, RegressionFit):
                row = [r.asset, r.label, model.label, "ok", f.n]
                for t in terms:
                    row += [_csv_num(x) for x in f.term(t).values()]
                row += [_csv_num(f.r2), _csv_num(f.adj_r2)]
            else:
                row = [r.asset, r.label, model.label, f.label, ""] + [""] * (4 * len(terms) + 2)
            rows.append(row)
        return _csv_text(header, rows)

    cp, pp = opts.places("coef"), opts.places("p")
    header = ["Contract"] + list(model.predictors) + ["adj R²"]
    rows = []
    for r, f in slots:
        if isinstance(f, FitFailure):
            rows.append([r.label, f.label] + [""] * model.k)
            continue
        coef_row, p_row = [r.label], [""]
        for t in model.predictors:
            term = f.term(t)
            stars = significance_stars(term["p"]).marker if math.isfinite(term["p"]) else ""
            coef_row.append(fmt_fixed(term["coef"], cp) + stars)
            p_row.append(f"({fmt_fixed(term['p'], pp)})")
        coef_row.append(fmt_fixed(f.adj_r2, opts.places("adj_r2")))
        p_row.append("")
        rows += [coef_row, p_row]
    asset = slots[0][0].asset
    head = f"## Coefficients: {asset}, model {model.label}\n\n"
    foot = ("\n***, **, * : significant at the 1%, 5% and 10% levels. "
            "P-values in parentheses.\n")
    return head + _md_table(header, rows) + foot


# --------------------------------------------------------------------------
# panels and contract listings


PANEL_HEADER = ("asset", "contract", "date", "dv", "m", "v", "o")


def render_panel_csv(panel: ObservationPanel) -> str:
    rows = [
        [panel.asset, panel.label, r.date.isoformat(), _csv_num(r.dv), r.m,
         _csv_num(r.v), _csv_num(r.o)]
        for r in panel.rows
    ]
    return _csv_text(PANEL_HEADER, rows)


def render_panel_summary(panels: Sequence[ObservationPanel], opts: RenderOptions) -> str:
    records = [
        {"asset": p.asset, "contract": p.label, "rows": len(p),
         "dropped": p.dropped_rows, "unmatched": p.unmatched,
         "drop_reasons": dict(sorted(p.dropped.items()))}
        for p in panels
    ]
    return _render_records(records, opts, "panels")


def render_contract_listing(series: Sequence[ContractSeries], opts: RenderOptions) -> str:
    records = [
        {"asset": s.asset, "contract": contract_label(s.contract_month),
         "expiry": s.expiry.isoformat(), "bars": len(s),
         "first": s.bars[0].date.isoformat() if s.bars else "",
         "last": s.bars[-1].date.isoformat() if s.bars else "",
         "flagged": len(s.flagged_bars())}
        for s in series
    ]
    return _render_records(records, opts, "contracts")


def _render_records(records: list[dict], opts: RenderOptions, name: str) -> str:
    if opts.format == "json":
        return _dumps({"table": name, "rows": records})
    if not records:
        return "" if opts.format == "csv" else f"No {name}.\n"
    header = [k for k in records[0] if not isinstance(records[0][k], dict)]
    rows = [[str(rec[k]) for k in header] for rec in records]
    if opts.format == "csv":
        return _csv_text(header, rows)
    return _md_table(header, rows)


# --------------------------------------------------------------------------
# run manifest


def file_digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def write_run_manifest(settings: Mapping, now: dt.datetime | None = None) -> str:
    """JSON record of everything needed to reproduce a run.

    Only the ``generated_at`` field depends on the wall clock.
    """
    doc = {
        "tool": "contract-lab",
        "version": __version__,
        "estimators": {
            **ESTIMATOR_CONVENTIONS,
            "regression": "OLS via QR, classical (non-robust) standard errors",
            "p_values": "two-sided Student-t, df = n - k - 1",
            "basis_timing": "same-day spot and futures closes",
            "rounding": "round-half-even",
        },
    }
    doc.update(settings)
    now = now or dt.datetime.now(dt.timezone.utc)
    doc["generated_at"] = now.isoformat(timespec="seconds")
    return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
