"""Command-line front end for batch runs.

Subcommands
-----------
ingest        transform/balance a raw CSV and write the panel snapshot
test          run the full break-disentangling procedure at one break date
simulate      run a size/power experiment grid from a TOML/JSON file
bootstrap-ci  block-bootstrap interval for the trace ratio
r2-report     restricted vs unrestricted common-component R^2 by category

Every run writes a manifest (command, flags, package version, seed) next
to its outputs.  Exit codes: 0 success, 1 numerical failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .bootstrap import BootstrapConfig, block_bootstrap_ci
from .break_tests import disentangle
from .errors import (
    FactorBreaksError,
    InvalidTransformCode,
    MappingError,
    ParseError,
)
from .hac import HACConfig
from .montecarlo import grid_from_dicts, results_to_csv, run_experiment
from .panel import finalize, load_csv, resolve_break
from .pca import estimate_factors
from .projection import decompose, r_squared_decomposition

_CONFIG_ERRORS = (ParseError, InvalidTransformCode, MappingError, ValueError, OSError)


def _write_manifest(out_dir: Path, args: argparse.Namespace) -> None:
    payload = {
        "command": args.command,
        "arguments": {k: v for k, v in vars(args).items() if k != "command"},
        "version": __version__,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, default=str)


def _load_panel(args: argparse.Namespace):
    raw = load_csv(args.input, header_rows=args.header_rows)
    return finalize(raw, standardize=not args.no_standardize)


def _parse_factors(text: str) -> int | tuple[int, int]:
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [int(p) for p in parts if p]
    except ValueError:
        raise ValueError(f"--factors must be an integer or 'r1,r2', got {text!r}") from None
    if len(values) == 1:
        return values[0]
    if len(values) == 2:
        return (values[0], values[1])
    raise ValueError(f"--factors must be an integer or 'r1,r2', got {text!r}")


def _parse_break(text: str) -> int | str:
    try:
        return int(text)
    except ValueError:
        return text


def _hac_config(args: argparse.Namespace) -> HACConfig:
    return HACConfig(bandwidth=args.bandwidth)


def cmd_ingest(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(args)
    panel.to_csv(out_dir / "panel.csv")
    _write_manifest(out_dir, args)
    print(f"wrote {panel.n_periods} x {panel.n_series} panel to {out_dir / 'panel.csv'}")
    return 0


def cmd_test(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(args)
    r = _parse_factors(args.factors)
    bootstrap_cfg = None
    if args.bootstrap:
        bootstrap_cfg = BootstrapConfig(
            replications=args.bootstrap,
            block_length=args.block_length,
            level=args.level,
            seed=args.seed,
        )
    report = disentangle(
        panel,
        _parse_break(args.break_point),
        r,
        cfg=_hac_config(args),
        level=args.level,
        bootstrap_cfg=bootstrap_cfg,
    )
    report.to_json(out_dir / "report.json")
    report.series_table_csv(out_dir / "series.csv")
    summary = report.summary()
    (out_dir / "summary.txt").write_text(summary + "\n")
    _write_manifest(out_dir, args)
    print(summary)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = _load_grid_file(args.grid)
    cells = spec["cells"] if isinstance(spec, dict) else spec
    level = spec.get("level", args.level) if isinstance(spec, dict) else args.level
    grid = grid_from_dicts(cells, base_seed=args.seed)
    results = run_experiment(
        grid, reps=args.reps, level=level, r_max=args.r_max, n_jobs=args.threads
    )
    results_to_csv(results, out_dir / "results.csv")
    _write_manifest(out_dir, args)
    print(f"wrote {len(results)} cells to {out_dir / 'results.csv'}")
    return 0


def _load_grid_file(path_text: str):
    path = Path(path_text)
    if not path.exists():
        bundled = Path(__file__).parent / "grids" / path.name
        if path.name == path_text and bundled.exists():
            path = bundled
        else:
            raise ParseError(f"grid file {path} does not exist")
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            return json.load(fh)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    raise ParseError(f"grid file must be .toml or .json, got {path.suffix!r}")


def cmd_bootstrap_ci(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(args)
    break_spec = resolve_break(panel, _parse_break(args.break_point))
    cfg = BootstrapConfig(
        replications=args.reps,
        block_length=args.block_length,
        level=args.level,
        seed=args.seed,
    )
    lower, upper = block_bootstrap_ci(panel, break_spec, _parse_factors(args.factors), cfg)
    with open(out_dir / "ci.json", "w") as fh:
        json.dump(
            {"lower": lower, "upper": upper, "level": args.level,
             "replications": args.reps, "block_length": cfg.block_length},
            fh, indent=2,
        )
    _write_manifest(out_dir, args)
    print(f"trace ratio {100 * (1 - args.level):.0f}% CI: [{lower:.4f}, {upper:.4f}]")
    return 0


def _read_categories(path_text: str) -> dict[str, str]:
    path = Path(path_text)
    if not path.exists():
        raise MappingError(f"category file {path} does not exist")
    mapping: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if not row or row[0].strip().lower() in ("series_id", "series"):
                continue
            if len(row) < 2:
                raise MappingError(f"category row needs 'series_id,category': {row}")
            mapping[row[0].strip()] = row[1].strip()
    return mapping


def cmd_r2_report(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(args)
    mapping = _read_categories(args.categories)
    missing = [sid for sid in panel.series_ids if sid not in mapping]
    if missing:
        raise MappingError(f"series missing from category file: {missing[:10]}")

    break_spec = resolve_break(panel, _parse_break(args.break_point))
    r = _parse_factors(args.factors)
    r1, r2 = (r, r) if isinstance(r, int) else r
    k, T = break_spec.k, break_spec.T
    est1 = estimate_factors(panel.values[:k], r1, span=(0, k))
    est2 = estimate_factors(panel.values[k:], r2, span=(k, T))
    decomp = decompose(est1, est2)
    unrestricted = r_squared_decomposition(panel, est1, est2, decomp, restrict_w=False)
    restricted = r_squared_decomposition(panel, est1, est2, decomp, restrict_w=True)

    with open(out_dir / "r2_series.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series_id", "category", "r2_unrestricted", "r2_restricted"])
        for sid, ru, rr in zip(panel.series_ids, unrestricted, restricted):
            writer.writerow([sid, mapping[sid], f"{ru:.6f}", f"{rr:.6f}"])

    by_category: dict[str, list[tuple[float, float]]] = {}
    for sid, ru, rr in zip(panel.series_ids, unrestricted, restricted):
        by_category.setdefault(mapping[sid], []).append((ru, rr))
    with open(out_dir / "r2.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "n_series", "r2_unrestricted", "r2_restricted", "gap"])
        for cat in sorted(by_category):
            pairs = by_category[cat]
            mean_u = sum(p[0] for p in pairs) / len(pairs)
            mean_r = sum(p[1] for p in pairs) / len(pairs)
            writer.writerow([cat, len(pairs), f"{mean_u:.6f}", f"{mean_r:.6f}",
                             f"{mean_u - mean_r:.6f}"])
    _write_manifest(out_dir, args)
    print(f"wrote R^2 tables for {len(by_category)} categories to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factorbreaks",
        description="Disentangle factor-variance and loading breaks in large panels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_panel_args(p):
        p.add_argument("--input", required=True, help="panel CSV path")
        p.add_argument("--header-rows", type=int, default=2,
                       help="1 = names only, 2 = names + transformation codes")
        p.add_argument("--no-standardize", action="store_true",
                       help="skip demeaning/unit-variance scaling")

    def add_common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("ingest", help="transform and balance a raw panel CSV")
    add_panel_args(p)
    add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("test", help="run both break tests at a candidate break")
    add_panel_args(p)
    add_common(p)
    p.add_argument("--break", dest="break_point", required=True,
                   help="break as a period label or 1-based index of the last pre-break period")
    p.add_argument("--factors", required=True, help="r, or 'r1,r2' for a changing count")
    p.add_argument("--bandwidth", type=int, default=None,
                   help="HAC lag truncation override (default: per-regime T^(1/3))")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--bootstrap", type=int, default=0,
                   help="bootstrap replications for the trace-ratio CI (0 = skip)")
    p.add_argument("--block-length", type=int, default=None)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="run a size/power grid from a TOML/JSON file")
    add_common(p)
    p.add_argument("--grid", required=True, help="grid file (.toml or .json)")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--r-max", type=int, default=8)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bootstrap-ci", help="trace-ratio confidence interval")
    add_panel_args(p)
    add_common(p)
    p.add_argument("--break", dest="break_point", required=True)
    p.add_argument("--factors", required=True)
    p.add_argument("--reps", type=int, default=399)
    p.add_argument("--block-length", type=int, default=None)
    p.add_argument("--level", type=float, default=0.05)
    p.set_defaults(func=cmd_bootstrap_ci)

    p = sub.add_parser("r2-report", help="restricted vs unrestricted R^2 by category")
    add_panel_args(p)
    add_common(p)
    p.add_argument("--break", dest="break_point", required=True)
    p.add_argument("--factors", required=True)
    p.add_argument("--categories", required=True,
                   help="CSV mapping series_id -> category")
    p.set_defaults(func=cmd_r2_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except FactorBreaksError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
