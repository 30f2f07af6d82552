"""Command-line front end: generate distributions, run the bench, query the oracle.

Every command is a pure function of its flags and input files, so reruns with
identical arguments produce byte-identical artifacts (including under
different --jobs values). Configuration can also come from a JSON file via
--config; explicit flags override file values. Diagnostics go to stderr, data
to files or stdout; the exit status is 0 only if nothing went wrong.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .bench import (
    format_summary_table,
    read_report_csv,
    run_bench,
    summarize,
    write_report_csv,
    write_summary_json,
)
from .dist import read_dists_csv, sample_cond_indep, sample_uniform, write_dists_csv
from .models import ModelKind
from .optim import OptimSettings
from .oracle import DEFAULT_GRID, EvidenceGrid, EvidencePair, InfeasibleEvidenceError, standard_answer

__all__ = ["RunConfig", "main"]

FAMILIES = ("uniform", "cond_indep")
DEFAULT_MODELS = (ModelKind.LINR, ModelKind.WRST, ModelKind.INDP, ModelKind.PRSP, ModelKind.PWR)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    n_dists: int = 109
    family: str = "uniform"
    grid: EvidenceGrid = DEFAULT_GRID
    models: tuple[ModelKind, ...] = DEFAULT_MODELS
    optim: OptimSettings = OptimSettings()
    out: str | None = None
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_dists < 1:
            raise ValueError(f"n_dists must be >= 1, got {self.n_dists}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")


def _parse_models(text: str) -> tuple[ModelKind, ...]:
    kinds = []
    for token in text.split(","):
        token = token.strip().upper()
        try:
            kinds.append(ModelKind(token))
        except ValueError:
            valid = ",".join(k.value for k in ModelKind)
            raise ValueError(f"unknown model {token!r}; valid models: {valid}") from None
    return tuple(kinds)


def _parse_grid(text: str) -> EvidenceGrid:
    return EvidenceGrid(tuple(float(v) for v in text.split(",")))


def _load_config(path: str | None) -> RunConfig:
    config = RunConfig()
    if path is None:
        return config
    with open(path) as f:
        raw = json.load(f)
    known = {"seed", "n_dists", "family", "grid", "models", "optim", "out", "jobs"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    updates: dict = {k: raw[k] for k in ("seed", "n_dists", "family", "out", "jobs") if k in raw}
    if "grid" in raw:
        updates["grid"] = EvidenceGrid(tuple(float(v) for v in raw["grid"]))
    if "models" in raw:
        updates["models"] = _parse_models(",".join(raw["models"]))
    if "optim" in raw:
        updates["optim"] = OptimSettings(**raw["optim"])
    return replace(config, **updates)


def _merge_flags(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates: dict = {}
    for key in ("seed", "n_dists", "family", "out", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "grid", None) is not None:
        updates["grid"] = args.grid
    if getattr(args, "models", None) is not None:
        updates["models"] = args.models
    return replace(config, **updates)


def _resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    try:
        return _merge_flags(_load_config(getattr(args, "config", None)), args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        parser.error(str(exc))
        raise AssertionError("unreachable") from exc


def cmd_gen(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _resolve_config(args, parser)
    out = Path(config.out or "dists.csv")
    sampler = sample_uniform if config.family == "uniform" else sample_cond_indep
    dists = sampler(config.seed, config.n_dists)
    try:
        write_dists_csv(out, dists)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


def cmd_bench(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _resolve_config(args, parser)
    try:
        dists = read_dists_csv(args.dists)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        reports = run_bench(dists, config.models, config.grid, config.optim, config.seed, config.jobs)
    except ValueError as exc:
        parser.error(str(exc))

    out_dir = Path(config.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report_csv(out_dir / "report.csv", reports)

    failed = [r for r in reports if r.error is not None]
    for r in failed:
        print(f"dist {r.dist_id}: {r.error}", file=sys.stderr)
    if failed:
        print(f"{len(failed)} of {len(reports)} distributions failed", file=sys.stderr)

    try:
        table = summarize(reports)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_summary_json(out_dir / "summary.json", table)
    print(format_summary_table(table))
    return 1 if failed else 0


def cmd_oracle(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    for name, value in (("--e1", args.e1), ("--e2", args.e2)):
        if not (0.0 <= value <= 1.0):
            parser.error(f"{name} must lie in [0, 1], got {value}")
    try:
        dists = read_dists_csv(args.dists)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ev = EvidencePair(args.e1, args.e2)
    status = 0
    for i, d in enumerate(dists):
        try:
            print(f"{i} {standard_answer(d, ev):.12g}")
        except InfeasibleEvidenceError as exc:
            print(f"dist {i}: {exc}", file=sys.stderr)
            status = 1
    return status


def cmd_report(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        reports = read_report_csv(args.report)
        table = summarize(reports)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json is not None:
        write_summary_json(args.json, table)
    print(format_summary_table(table))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uisbench",
        description="Benchmark evidence-combination models against the minimum-cross-entropy oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a distribution CSV")
    gen.add_argument("--family", choices=FAMILIES, default=None)
    gen.add_argument("--n", dest="n_dists", type=int, default=None, help="number of distributions")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", default=None, help="output CSV path (default dists.csv)")
    gen.add_argument("--config", default=None, help="JSON run-config file; flags override it")
    gen.set_defaults(func=cmd_gen)

    bench = sub.add_parser("bench", help="fit models on a distribution file and summarize eta")
    bench.add_argument("--dists", required=True, help="distribution CSV produced by gen")
    bench.add_argument("--models", type=_parse_models, default=None, help="comma-separated model list")
    bench.add_argument("--grid", type=_parse_grid, default=None, help="comma-separated evidence levels")
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--jobs", type=int, default=None, help="parallel workers (output is identical)")
    bench.add_argument("--out", default=None, help="output directory (default .)")
    bench.add_argument("--config", default=None, help="JSON run-config file; flags override it")
    bench.set_defaults(func=cmd_bench)

    oracle = sub.add_parser("oracle", help="print the oracle posterior of C per distribution")
    oracle.add_argument("--dists", required=True)
    oracle.add_argument("--e1", type=float, required=True)
    oracle.add_argument("--e2", type=float, required=True)
    oracle.set_defaults(func=cmd_oracle)

    report = sub.add_parser("report", help="re-summarize a report CSV")
    report.add_argument("--report", required=True, help="report CSV produced by bench")
    report.add_argument("--json", default=None, help="also write the summary JSON here")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
