"""Experiment orchestration: fit every model on every distribution and score it.

For each joint distribution the standard vector is computed once, every
requested model is fitted against it, and each fitted error eps_X is rescaled
to the normalized accuracy score

    eta = (eps_X - eps_LINR) / (0 - eps_LINR)            if eps_X <= eps_LINR
    eta = (eps_X - eps_LINR) / (eps_LINR - eps_WRST)     otherwise

so that +1 means a perfect fit, 0 ties plain linear regression and -1 ties the
evidence-ignoring constant. Distributions where linear regression already fits
exactly (eps_LINR below 1e-12) leave eta undefined; they are flagged degenerate
and excluded from aggregates rather than silently included. Scores outside
[-1, 1] are clamped and flagged.

Aggregation reports the mean, the sample (n-1) standard deviation and their
ratio per model. Per-distribution work items are independent: model fits use
RNG substreams derived from (seed, distribution index), so reports do not
depend on execution order or worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dist import JointDist
from .models import PARAM_DIM, ModelKind, ModelParams, true_params_indp, true_params_prsp
from .optim import FitResult, OptimSettings, fit
from .oracle import DEFAULT_GRID, EvidenceGrid, standard_vector

__all__ = [
    "DEGENERATE_EPS",
    "EtaScore",
    "ModelScore",
    "DistReport",
    "SummaryRow",
    "SummaryTable",
    "eta",
    "run_bench",
    "summarize",
    "write_report_csv",
    "read_report_csv",
    "write_summary_json",
    "format_summary_table",
]

DEGENERATE_EPS = 1e-12
_MAX_PARAMS = max(PARAM_DIM.values())

REPORT_CSV_COLUMNS = (
    "dist_id",
    "model",
    "epsilon",
    "eta",
    "clamped",
    "degenerate",
    "converged",
) + tuple(f"param{i}" for i in range(_MAX_PARAMS))


@dataclass(frozen=True)
class EtaScore:
    """Normalized accuracy in [-1, 1]; flags record clamping and degeneracy."""

    value: float
    clamped: bool = False
    degenerate: bool = False

    def __post_init__(self) -> None:
        if not (-1.0 <= self.value <= 1.0):
            raise ValueError(f"eta must lie in [-1, 1], got {self.value!r}")


@dataclass(frozen=True)
class ModelScore:
    kind: ModelKind
    epsilon: float
    eta: EtaScore
    params: ModelParams
    converged: bool


@dataclass(frozen=True)
class DistReport:
    """Per-distribution results; ``error`` is set instead of scores on failure."""

    dist_id: int
    scores: tuple[ModelScore, ...]
    eps_linr: float | None
    eps_wrst: float | None
    error: str | None = None

    @property
    def degenerate(self) -> bool:
        return self.error is None and self.eps_linr is not None and self.eps_linr < DEGENERATE_EPS


@dataclass(frozen=True)
class SummaryRow:
    kind: ModelKind
    mu: float
    sigma: float
    mu_over_sigma: float
    n_included: int
    n_degenerate: int


@dataclass(frozen=True)
class SummaryTable:
    rows: tuple[SummaryRow, ...]


def eta(eps_x: float, eps_linr: float, eps_wrst: float) -> EtaScore:
    """Rescale a fitted error against the perfect/linear/constant anchors.

    All inputs must be non-negative; the perfect reference error is exactly 0.
    When the model is worse than the linear baseline the denominator is
    floored in magnitude at 1e-12, and the result is clamped to [-1, 1] with
    the ``clamped`` flag set.
    """
    for name, value in (("eps_x", eps_x), ("eps_linr", eps_linr), ("eps_wrst", eps_wrst)):
        if value < 0.0:
            raise ValueError(f"{name} must be non-negative, got {value!r}")
    if eps_linr < DEGENERATE_EPS:
        return EtaScore(0.0, clamped=False, degenerate=True)
    if eps_x <= eps_linr:
        value = (eps_x - eps_linr) / (0.0 - eps_linr)
    else:
        denom = eps_linr - eps_wrst
        if abs(denom) < 1e-12:
            denom = math.copysign(1e-12, denom if denom != 0.0 else -1.0)
        value = (eps_x - eps_linr) / denom
    clamped = value < -1.0 or value > 1.0
    # + 0.0 folds the -0.0 produced at the LINR anchor into +0.0
    return EtaScore(min(1.0, max(-1.0, value)) + 0.0, clamped=clamped, degenerate=False)


def _derived_seed(seed: int, dist_index: int) -> int:
    """Stable per-distribution seed, independent of execution order."""
    return int(np.random.SeedSequence([int(seed), int(dist_index)]).generate_state(1, np.uint64)[0])


def _bench_one(
    d: JointDist,
    dist_id: int,
    kinds: tuple[ModelKind, ...],
    grid: EvidenceGrid,
    settings: OptimSettings,
    seed: int,
) -> DistReport:
    try:
        targets = standard_vector(d, grid)
        fit_seed = _derived_seed(seed, dist_id)

        warm_starts: dict[ModelKind, ModelParams] = {}
        for kind, extractor in ((ModelKind.INDP, true_params_indp), (ModelKind.PRSP, true_params_prsp)):
            if kind in kinds:
                try:
                    warm_starts[kind] = extractor(d)
                except ValueError:
                    pass  # boundary joint: fall back to seeded starts only

        fits: dict[ModelKind, FitResult] = {}
        for kind in kinds:
            if kind is ModelKind.BST:
                continue
            fits[kind] = fit(kind, targets, settings, fit_seed, warm_start=warm_starts.get(kind))

        eps_linr = fits[ModelKind.LINR].epsilon
        eps_wrst = fits[ModelKind.WRST].epsilon
        scores = []
        for kind in kinds:
            if kind is ModelKind.BST:
                scores.append(
                    ModelScore(kind, 0.0, eta(0.0, eps_linr, eps_wrst), ModelParams(kind, ()), True)
                )
            else:
                r = fits[kind]
                scores.append(ModelScore(kind, r.epsilon, eta(r.epsilon, eps_linr, eps_wrst), r.params, r.converged))
        return DistReport(dist_id, tuple(scores), eps_linr, eps_wrst)
    except Exception as exc:  # recorded, not fatal to the run
        return DistReport(dist_id, (), None, None, error=f"{type(exc).__name__}: {exc}")


def _bench_one_star(args) -> DistReport:
    return _bench_one(*args)


def run_bench(
    dists: list[JointDist],
    kinds: tuple[ModelKind, ...] = (ModelKind.LINR, ModelKind.WRST, ModelKind.INDP, ModelKind.PRSP, ModelKind.PWR),
    grid: EvidenceGrid = DEFAULT_GRID,
    settings: OptimSettings | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> list[DistReport]:
    """Fit every requested model on every distribution and score eta.

    ``kinds`` must include LINR and WRST (eta is defined relative to them).
    With ``jobs > 1`` distributions are processed in parallel; reports are
    returned ordered by distribution index and are identical to a serial run.
    """
    kinds = tuple(kinds)
    if not dists:
        raise ValueError("dists must be non-empty")
    for required in (ModelKind.LINR, ModelKind.WRST):
        if required not in kinds:
            raise ValueError(f"kinds must include {required.value}; eta is defined relative to it")
    settings = settings or OptimSettings()
    items = [(d, i, kinds, grid, settings, seed) for i, d in enumerate(dists)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_bench_one_star, items))
    return [_bench_one(*item) for item in items]


def summarize(reports: list[DistReport]) -> SummaryTable:
    """Mean, sample standard deviation and their ratio of eta per model.

    Degenerate distributions never contribute; failed reports are skipped.
    Raises ValueError unless at least two non-degenerate reports remain.
    A zero sigma is reported as a signed-infinity ratio.
    """
    usable = [r for r in reports if r.error is None]
    included = [r for r in usable if not r.degenerate]
    if len(included) < 2:
        raise ValueError(
            f"need at least 2 non-degenerate reports to aggregate, got {len(included)}"
        )
    n_degenerate = len(usable) - len(included)
    kinds = [s.kind for s in included[0].scores]
    rows = []
    for pos, kind in enumerate(kinds):
        # sorted so aggregates are exactly permutation-invariant over reports
        values = np.sort([r.scores[pos].eta.value for r in included])
        mu = float(np.mean(values))
        sigma = float(np.std(values, ddof=1))
        ratio = mu / sigma if sigma > 0.0 else math.copysign(math.inf, mu)
        rows.append(SummaryRow(kind, mu, sigma, ratio, len(included), n_degenerate))
    return SummaryTable(tuple(rows))


# --- artifacts ---------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_report_csv(path, reports: list[DistReport]) -> None:
    """One row per (distribution, model); failed distributions carry no rows."""
    with open(path, "w", newline="") as f:
        f.write(",".join(REPORT_CSV_COLUMNS) + "\n")
        for report in reports:
            if report.error is not None:
                continue
            for s in report.scores:
                padded = [_fmt(v) for v in s.params.values]
                padded += [""] * (_MAX_PARAMS - len(padded))
                row = [
                    str(report.dist_id),
                    s.kind.value,
                    _fmt(s.epsilon),
                    _fmt(s.eta.value),
                    "true" if s.eta.clamped else "false",
                    "true" if s.eta.degenerate else "false",
                    "true" if s.converged else "false",
                ] + padded
                f.write(",".join(row) + "\n")


def read_report_csv(path) -> list[DistReport]:
    """Reconstruct reports from a report CSV (enough to re-run summarize)."""
    by_dist: dict[int, list[ModelScore]] = {}
    eps: dict[int, dict[str, float]] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != REPORT_CSV_COLUMNS:
            raise ValueError(f"{path}: bad header, expected {','.join(REPORT_CSV_COLUMNS)}")
        for row_no, row in enumerate(reader):
            try:
                dist_id = int(row[0])
                kind = ModelKind(row[1])
                epsilon = float(row[2])
                score = EtaScore(float(row[3]), clamped=row[4] == "true", degenerate=row[5] == "true")
                converged = row[6] == "true"
                values = tuple(float(v) for v in row[7:] if v != "")
                params = ModelParams(kind, values)
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}: row {row_no}: {exc}") from None
            by_dist.setdefault(dist_id, []).append(ModelScore(kind, epsilon, score, params, converged))
            eps.setdefault(dist_id, {})[kind.value] = epsilon
    reports = []
    for dist_id in sorted(by_dist):
        reports.append(
            DistReport(
                dist_id,
                tuple(by_dist[dist_id]),
                eps[dist_id].get("LINR"),
                eps[dist_id].get("WRST"),
            )
        )
    return reports


def _ratio_json(ratio: float):
    if math.isinf(ratio):
        return "+inf" if ratio > 0 else "-inf"
    return ratio


def write_summary_json(path, table: SummaryTable) -> None:
    payload = {
        row.kind.value: {
            "mu": row.mu,
            "sigma": row.sigma,
            "mu_over_sigma": _ratio_json(row.mu_over_sigma),
            "n_included": row.n_included,
            "n_degenerate": row.n_degenerate,
        }
        for row in table.rows
    }
    with open(path, "w", newline="") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def format_summary_table(table: SummaryTable) -> str:
    """Render the summary in the two-row mu/sigma layout (plus their ratio)."""
    names = [row.kind.value for row in table.rows]
    width = max(8, *(len(n) for n in names)) + 2

    def line(label: str, values: list[str]) -> str:
        return label.ljust(10) + "".join(v.rjust(width) for v in values)

    def ratio_str(r: float) -> str:
        return ("+inf" if r > 0 else "-inf") if math.isinf(r) else f"{r:.2f}"

    out = [
        line("", names),
        line("mu", [f"{row.mu:.4f}" for row in table.rows]),
        line("sigma", [f"{row.sigma:.4f}" for row in table.rows]),
        line("mu/sigma", [ratio_str(row.mu_over_sigma) for row in table.rows]),
    ]
    n_inc = table.rows[0].n_included
    n_deg = table.rows[0].n_degenerate
    out.append(f"n_included={n_inc} n_degenerate={n_deg}")
    return "\n".join(out)
