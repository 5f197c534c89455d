"""``contract-lab`` command line.

Exit codes: 0 success, 1 usage error, 2 data or format error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import DEFAULT_ALPHA, compare, enumerate_models, run_contract_by_contract
from .errors import ContractLabError
from .marketdata import (
    ContractSeries,
    SpotSeries,
    format_contract_csv,
    format_spot_csv,
    parse_contract_csv,
    parse_spot_csv_multi,
    window_last_n,
)
from .measures import DependentKind, ScalingPolicy, build_panel
from .regress import ModelSpec
from .report import (
    RenderOptions,
    file_digest,
    render_comparison,
    render_contract_listing,
    render_contract_table,
    render_descriptives,
    render_panel_csv,
    render_panel_summary,
    write_run_manifest,
)
from .stats import describe
from .synth import SynthConfig, generate_market

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _shared(p: argparse.ArgumentParser, *, spot_required: bool = False) -> None:
    p.add_argument("--contracts", type=Path, required=True, help="contract CSV file")
    p.add_argument("--spot", type=Path, required=spot_required, help="spot CSV file")
    p.add_argument("--asset", help="only process this asset")
    p.add_argument("--window-days", type=int, default=42)
    p.add_argument("--format", choices=("markdown", "csv", "json"), default="markdown")
    p.add_argument("--out", type=Path, help="write output here instead of stdout")


def _analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dependent", choices=("volatility", "basis"), default="volatility")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--dv-factor", type=float, default=10_000.0)
    p.add_argument("--activity-divisor", type=float,
                   help="divisor for volume and open interest (default: per-asset)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--manifest", type=Path, help="write the run manifest here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="contract-lab",
                     description="Contract-by-contract regressions of futures volatility and basis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate input files and list contracts")
    _shared(p)

    p = sub.add_parser("describe", help="descriptive statistics per asset and series")
    _shared(p)

    p = sub.add_parser("panel", help="build observation panels; --out is a directory")
    _shared(p)
    _analysis_flags(p)

    p = sub.add_parser("fit", help="per-contract coefficient table for one model")
    _shared(p)
    _analysis_flags(p)
    p.add_argument("--model", default="mvo")

    p = sub.add_parser("compare", help="compare predictor subsets across contracts")
    _shared(p)
    _analysis_flags(p)
    p.add_argument("--models", default="all",
                   help="comma-separated labels such as m,mv,mvo (default: all 7)")

    p = sub.add_parser("synth", help="write a seeded synthetic market; --out is a directory")
    p.add_argument("--out", type=Path, required=True)
    defaults = SynthConfig()
    for name, value in defaults.to_dict().items():
        flag = "--" + name.replace("_", "-")
        if name == "dgp_beta":
            p.add_argument(flag, type=float, nargs=4, default=list(value),
                           metavar=("B0", "B1", "B2", "B3"))
        else:
            p.add_argument(flag, type=type(value), default=value)
    return parser


# --------------------------------------------------------------------------


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _load(args) -> tuple[list[ContractSeries], dict[str, SpotSeries], dict[str, str]]:
    raw = args.contracts.read_bytes()
    digests = {"contracts": file_digest(raw)}
    series = parse_contract_csv(raw)
    spots: dict[str, SpotSeries] = {}
    if getattr(args, "spot", None):
        spot_raw = args.spot.read_bytes()
        digests["spot"] = file_digest(spot_raw)
        spots = parse_spot_csv_multi(spot_raw)
    if args.asset:
        series = [s for s in series if s.asset == args.asset]
        if not series:
            raise UsageError(f"no contracts for asset {args.asset!r}")
    return series, spots, digests


def _single_asset(series: list[ContractSeries]) -> str:
    assets = sorted({s.asset for s in series})
    if len(assets) != 1:
        raise UsageError(f"input holds several assets ({', '.join(assets)}); pick one with --asset")
    return assets[0]


def _policy(args, asset: str) -> ScalingPolicy:
    policy = ScalingPolicy(dv_factor=args.dv_factor)
    if args.activity_divisor is not None:
        policy = policy.with_divisor(asset, args.activity_divisor)
    return policy


def _panels(args, series, spots):
    asset = _single_asset(series)
    kind = DependentKind(args.dependent)
    spot = spots.get(asset)
    if kind is DependentKind.BASIS and spot is None:
        raise UsageError(f"--dependent basis needs --spot with prices for {asset}")
    policy = _policy(args, asset)
    panels = [build_panel(s, spot, kind, policy, args.window_days) for s in series]
    return asset, kind, policy, panels


def _manifest(args, asset, kind, policy, digests, extra=None) -> str:
    settings = {
        "command": args.command,
        "asset": asset,
        "dependent": kind.value,
        "window_days": args.window_days,
        "alpha": args.alpha,
        "scaling_policy": policy.to_dict(),
        "input_digests": digests,
    }
    settings.update(extra or {})
    return write_run_manifest(settings)


def cmd_ingest(args) -> None:
    series, spots, _ = _load(args)
    _emit(render_contract_listing(series, RenderOptions(args.format)), args.out)


def cmd_describe(args) -> None:
    series, spots, _ = _load(args)
    stats = {}
    for asset in sorted({s.asset for s in series}):
        windowed = [window_last_n(s, args.window_days) for s in series if s.asset == asset]
        bars = [b for s in windowed for b in s.bars]
        if not bars:
            continue
        stats[(asset, "futures")] = describe([b.close for b in bars])
        stats[(asset, "volume")] = describe([b.volume for b in bars])
        stats[(asset, "open_interest")] = describe([b.open_interest for b in bars])
        if asset in spots:
            used = {b.date for b in bars}
            prices = [p for d, p in spots[asset].points if d in used]
            if prices:
                stats[(asset, "spot")] = describe(prices)
    _emit(render_descriptives(stats, RenderOptions(args.format)), args.out)


def cmd_panel(args) -> None:
    series, spots, digests = _load(args)
    asset, kind, policy, panels = _panels(args, series, spots)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        for p in panels:
            y, m = p.contract_month
            (args.out / f"{p.asset}_{kind.value}_{y:04d}-{m:02d}.csv").write_text(
                render_panel_csv(p), encoding="utf-8")
        (args.out / "manifest.json").write_text(
            _manifest(args, asset, kind, policy, digests), encoding="utf-8")
    sys.stdout.write(render_panel_summary(panels, RenderOptions(args.format)))


def cmd_fit(args) -> None:
    series, spots, digests = _load(args)
    asset, kind, policy, panels = _panels(args, series, spots)
    model = ModelSpec.parse(args.model)
    results = run_contract_by_contract(panels, [model], args.alpha, args.workers)
    _emit(render_contract_table(results, model, RenderOptions(args.format)), args.out)
    if args.manifest:
        _emit(_manifest(args, asset, kind, policy, digests, {"model": model.label}),
              args.manifest)


def cmd_compare(args) -> None:
    series, spots, digests = _load(args)
    asset, kind, policy, panels = _panels(args, series, spots)
    if args.models == "all":
        models = enumerate_models()
    else:
        models = [ModelSpec.parse(s) for s in args.models.split(",") if s.strip()]
    results = run_contract_by_contract(panels, models, args.alpha, args.workers)
    report = compare(results, models, args.alpha, asset, kind)
    _emit(render_comparison(report, RenderOptions(args.format)), args.out)
    if args.manifest:
        _emit(_manifest(args, asset, kind, policy, digests,
                        {"models": [m.label for m in models], "best": report.best.label}),
              args.manifest)


def cmd_synth(args) -> None:
    fields = SynthConfig().to_dict()
    config = SynthConfig(**{k: getattr(args, k) for k in fields})
    series, spot, truth = generate_market(config)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "contracts.csv").write_text(format_contract_csv(series), encoding="utf-8")
    (args.out / "spot.csv").write_text(format_spot_csv(spot), encoding="utf-8")
    (args.out / "truth.json").write_text(
        json.dumps({"config": config.to_dict(), "true_beta": list(truth.true_beta)},
                   indent=2) + "\n",
        encoding="utf-8")
    sys.stdout.write(f"wrote {len(series)} contracts and {len(spot)} spot points to {args.out}\n")


COMMANDS = {
    "ingest": cmd_ingest,
    "describe": cmd_describe,
    "panel": cmd_panel,
    "fit": cmd_fit,
    "compare": cmd_compare,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.window_days <= 0:
        print("contract-lab: error: --window-days must be positive", file=sys.stderr)
        return EXIT_USAGE
    if hasattr(args, "alpha") and not 0 < args.alpha < 1:
        print("contract-lab: error: --alpha must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"contract-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContractLabError as exc:
        print(f"contract-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"contract-lab: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
