"""Experiment orchestration: trials, sweeps, CSV tables, SVG plots, CLI.

A trial solves one regularized program on one sampled instance and lines the
empirical quantities up against their scalarized predictions. A sweep varies
exactly one parameter over a value grid x seed list x regularizer list and
streams the rows to CSV. Plots render each (regularizer, swept parameter)
pair as a static SVG with one polyline per error series.

Determinism: a sweep derives each trial's seed from a SHA-256 hash of
(master seed, swept value, seed label, regularizer), so editing the value
list never reshuffles the other rows.
"""

from __future__ import annotations

import argparse
import csv
import functools
import hashlib
import os
import sys
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .approx import ridge_large_lambda
from .classify import compress_sign, error_exact, sparsify_topk
from .datagen import ProblemConfig, realized_corruption, sample_instance
from .mathkit import EnvelopeSpec, prox_abs
from .solvers import SolveOptions, solve_linf, solve_prox, solve_ridge
from .theory import MinimaxError, predict_l1, predict_linf, predict_master, predict_ridge

__all__ = [
    "TrialRecord",
    "SweepSpec",
    "CSV_HEADER",
    "run_trial",
    "run_sweep",
    "records_to_csv",
    "records_from_csv",
    "parse_config_text",
    "parse_sweep_text",
    "emit_plots",
    "main",
]

CSV_HEADER = (
    "regularizer", "n", "d", "c_nominal", "c_realized", "r", "sigma",
    "lambda", "seed", "sim_error", "pred_error", "approx_error",
    "onebit_error", "sparsified_error", "nnz_empirical", "sparsity_pred",
    "bound_count_empirical", "bound_count_pred", "solver_converged",
    "runtime_ms",
)

REGULARIZERS = ("l2", "l1", "linf")

# empirical support/bound membership uses a relative slack against ||w||_inf
NNZ_RTOL = 1e-6

# the at-bound count converges much more slowly than the objective: entries
# just above the clip threshold creep onto the bound over many iterations,
# so max-norm trials solve tighter than the library default
_LINF_TRIAL_OPTIONS = SolveOptions(max_iterations=300_000, tolerance=1e-11)


@dataclass(frozen=True)
class TrialRecord:
    """One solved trial with its predictions, one CSV row.

    Optional fields hold None exactly when the regularizer does not define
    them: approx_error is l2-only (the closed-form error approximation),
    sparsified_error / nnz_empirical / sparsity_pred are l1-only,
    bound_count_* are linf-only. runtime_ms is wall-clock and is the one
    field not reproduced across reruns of the same (config, seed).
    """

    regularizer: str
    n: int
    d: int
    c_nominal: float
    c_realized: float
    r: float
    sigma: float
    lam: float
    seed: int
    sim_error: float
    pred_error: float
    approx_error: float | None
    onebit_error: float
    sparsified_error: float | None
    nnz_empirical: int | None
    sparsity_pred: int | None
    bound_count_empirical: int | None
    bound_count_pred: int | None
    solver_converged: bool
    runtime_ms: int

    def __post_init__(self) -> None:
        if self.regularizer not in REGULARIZERS:
            raise ValueError(f"unknown regularizer {self.regularizer!r}")
        for name in ("sim_error", "pred_error", "onebit_error"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} is not a probability")
        for name in ("approx_error", "sparsified_error"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} is not a probability")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.17g}"


def record_to_row(record: TrialRecord) -> list[str]:
    return [_fmt(getattr(record, attr)) for attr in _FIELD_BY_COLUMN.values()]


# CSV column name -> dataclass attribute ("lambda" is a Python keyword)
_FIELD_BY_COLUMN = {col: ("lam" if col == "lambda" else col)
                    for col in CSV_HEADER}


def row_to_record(row: Sequence[str]) -> TrialRecord:
    if len(row) != len(CSV_HEADER):
        raise ValueError(f"row has {len(row)} cells, header has "
                         f"{len(CSV_HEADER)}")
    vals = dict(zip(CSV_HEADER, row))

    def opt_float(key: str) -> float | None:
        return None if vals[key] == "" else float(vals[key])

    def opt_int(key: str) -> int | None:
        return None if vals[key] == "" else int(vals[key])

    if vals["solver_converged"] not in ("true", "false"):
        raise ValueError(f"bad solver_converged cell "
                         f"{vals['solver_converged']!r}")
    return TrialRecord(
        regularizer=vals["regularizer"],
        n=int(vals["n"]), d=int(vals["d"]),
        c_nominal=float(vals["c_nominal"]),
        c_realized=float(vals["c_realized"]),
        r=float(vals["r"]), sigma=float(vals["sigma"]),
        lam=float(vals["lambda"]), seed=int(vals["seed"]),
        sim_error=float(vals["sim_error"]),
        pred_error=float(vals["pred_error"]),
        approx_error=opt_float("approx_error"),
        onebit_error=float(vals["onebit_error"]),
        sparsified_error=opt_float("sparsified_error"),
        nnz_empirical=opt_int("nnz_empirical"),
        sparsity_pred=opt_int("sparsity_pred"),
        bound_count_empirical=opt_int("bound_count_empirical"),
        bound_count_pred=opt_int("bound_count_pred"),
        solver_converged=vals["solver_converged"] == "true",
        runtime_ms=int(vals["runtime_ms"]),
    )


def records_to_csv(records: Iterable[TrialRecord], fh: TextIO) -> None:
    """Write the exact schema header plus one row per record (17 sig digits)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow(record_to_row(record))


def records_from_csv(fh: TextIO) -> list[TrialRecord]:
    """Parse a table written by records_to_csv; the header must match exactly."""
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        raise ValueError("CSV is empty (no header)")
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"CSV header {header} does not match the schema")
    return [row_to_record(row) for row in reader if row]


@functools.lru_cache(maxsize=256)
def _prediction(reg: str, n: int, d: int, c: float, r: float, sigma: float,
                lam: float, c_realized: float):
    # seed is irrelevant to the scalarized predictors; trials with the same
    # parameters share one saddle solve
    config = ProblemConfig(n=n, d=d, c=c, r=r, sigma=sigma, lam=lam, seed=0)
    if reg == "l2":
        return predict_ridge(config, c_realized=c_realized)
    if reg == "l1":
        return predict_l1(config, c_realized=c_realized)
    return predict_linf(config, c_realized=c_realized)


def run_trial(config: ProblemConfig, regularizer: str) -> TrialRecord:
    """Solve one instance, score it, and attach the matching predictions.

    The zero-solution convention: when the solver returns w = 0 exactly
    (l1 above its kill threshold), the classifier abstains and sim/onebit/
    sparsified errors are recorded as chance 0.5 with an empty support.
    Solver non-convergence flags the record rather than dropping it.
    """
    if regularizer not in REGULARIZERS:
        raise ValueError(f"unknown regularizer {regularizer!r}; "
                         f"expected one of {REGULARIZERS}")
    t0 = time.perf_counter()
    instance = sample_instance(config)
    X, z = instance.X, instance.z
    mu1, mu2 = instance.means.mu1, instance.means.mu2
    s2 = config.sigma * config.sigma

    if regularizer == "l2":
        w = solve_ridge(X, z, config.lam)
        converged = True
    elif regularizer == "l1":
        result = solve_prox(X, z, config.lam, prox_abs,
                            f=lambda v: float(np.abs(v).sum()))
        w, converged = result.w, result.converged
    else:
        result = solve_linf(X, z, config.lam, _LINF_TRIAL_OPTIONS)
        w, converged = result.w, result.converged

    c_real = realized_corruption(config)
    pred = _prediction(regularizer, config.n, config.d, config.c, config.r,
                       config.sigma, config.lam, c_real)

    is_zero = not np.any(w)
    if is_zero:
        sim = onebit = 0.5
    else:
        sim = error_exact(w, mu1, mu2, s2, s2)
        onebit = error_exact(compress_sign(w), mu1, mu2, s2, s2)

    approx_error = None
    sparsified = None
    nnz = None
    sparsity_pred = None
    bound_emp = None
    bound_pred = None

    if regularizer == "l2":
        approx_error = ridge_large_lambda(config).predicted_error
    elif regularizer == "l1":
        sparsity_pred = pred.predicted_sparsity
        if is_zero:
            nnz = 0
            sparsified = 0.5
        else:
            top = float(np.max(np.abs(w)))
            nnz = int(np.sum(np.abs(w) > NNZ_RTOL * top))
            kept = sparsify_topk(w, max(1, sparsity_pred))
            sparsified = error_exact(kept, mu1, mu2, s2, s2)
    else:
        bound_pred = 2 * pred.predicted_bound_count
        if is_zero:
            bound_emp = 0
        else:
            top = float(np.max(np.abs(w)))
            bound_emp = int(np.sum(np.abs(w) >= top * (1.0 - NNZ_RTOL)))

    runtime_ms = int(round((time.perf_counter() - t0) * 1000.0))
    return TrialRecord(
        regularizer=regularizer, n=config.n, d=config.d,
        c_nominal=config.c, c_realized=c_real, r=config.r,
        sigma=config.sigma, lam=config.lam, seed=config.seed,
        sim_error=float(sim), pred_error=float(pred.predicted_error),
        approx_error=approx_error, onebit_error=float(onebit),
        sparsified_error=sparsified, nnz_empirical=nnz,
        sparsity_pred=sparsity_pred, bound_count_empirical=bound_emp,
        bound_count_pred=bound_pred, solver_converged=bool(converged),
        runtime_ms=runtime_ms,
    )


# ---------------------------------------------------------------------------
# sweeps

SWEEPABLE = ("n", "d", "c", "r", "sigma", "lambda")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter experiment plan: values x seeds x regularizers."""

    base: ProblemConfig
    param: str
    values: tuple[float, ...]
    seeds: tuple[int, ...]
    regularizers: tuple[str, ...]
    out_name: str = "sweep.csv"

    def __post_init__(self) -> None:
        if self.param not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.param!r}; "
                             f"choose one of {SWEEPABLE}")
        if not self.values:
            raise ValueError("values must be non-empty")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if not self.regularizers:
            raise ValueError("regularizers must be non-empty")
        for reg in self.regularizers:
            if reg not in REGULARIZERS:
                raise ValueError(f"unknown regularizer {reg!r}")


def sub_seed(master_seed: int, param: str, value: float, seed_label: int,
             regularizer: str) -> int:
    """Stable per-trial seed: SHA-256 of the identifying tuple, first 8 bytes.

    Keyed by the swept VALUE (canonical 17-digit form), not its position, so
    inserting a value into the grid leaves every other trial untouched.
    """
    text = (f"{master_seed}|{param}={value:.17g}|seed={seed_label}"
            f"|{regularizer}")
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def _config_with(base: ProblemConfig, param: str, value: float,
                 seed: int) -> ProblemConfig:
    kwargs = {"seed": seed}
    if param in ("n", "d"):
        as_int = int(value)
        if as_int != value:
            raise ValueError(f"{param} must be an integer, got {value}")
        kwargs[param] = as_int
    elif param == "lambda":
        kwargs["lam"] = float(value)
    else:
        kwargs[param] = float(value)
    return replace(base, **kwargs)


def run_sweep(spec: SweepSpec, out_dir: str = ".") -> list[TrialRecord]:
    """Run every (value, seed, regularizer) trial and stream rows to CSV.

    Rows are written incrementally to a temp file next to the target and
    atomically renamed at the end, so a rerun either fully replaces the
    table or leaves the previous one intact. The output path is checked
    writable before any trial runs.
    """
    out_path = os.path.join(out_dir, spec.out_name)
    tmp_path = out_path + ".tmp"
    records: list[TrialRecord] = []
    fh = open(tmp_path, "w", newline="")  # fails now, not after hours of trials
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        fh.flush()
        for value in spec.values:
            for seed_label in spec.seeds:
                for reg in spec.regularizers:
                    seed = sub_seed(spec.base.seed, spec.param, value,
                                    seed_label, reg)
                    config = _config_with(spec.base, spec.param, value, seed)
                    record = run_trial(config, reg)
                    records.append(record)
                    writer.writerow(record_to_row(record))
                    fh.flush()
    except BaseException:
        fh.close()
        os.unlink(tmp_path)
        raise
    fh.close()
    os.replace(tmp_path, out_path)
    return records


# ---------------------------------------------------------------------------
# config / spec file parsing (plain "key = value" lines)

CONFIG_KEYS = ("n", "d", "c", "r", "sigma", "lambda", "seed")


def _parse_kv_lines(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', "
                             f"got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in pairs:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def parse_config_text(text: str) -> ProblemConfig:
    """Parse a problem config: exactly the keys n, d, c, r, sigma, lambda, seed."""
    pairs = _parse_kv_lines(text)
    unknown = sorted(set(pairs) - set(CONFIG_KEYS))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(set(CONFIG_KEYS) - set(pairs))
    if missing:
        raise ValueError(f"missing config keys: {', '.join(missing)}")
    return ProblemConfig(
        n=int(pairs["n"]), d=int(pairs["d"]), c=float(pairs["c"]),
        r=float(pairs["r"]), sigma=float(pairs["sigma"]),
        lam=float(pairs["lambda"]), seed=int(pairs["seed"]),
    )


SWEEP_ONLY_KEYS = ("sweep", "values", "seeds", "regularizers", "out")


def parse_sweep_text(text: str) -> SweepSpec:
    """Parse a sweep spec: a full base config plus sweep/values/seeds/....

    The base config's own entry for the swept key is still required to parse
    (it anchors the non-swept fields) but its value is replaced per trial.
    """
    pairs = _parse_kv_lines(text)
    unknown = sorted(set(pairs) - set(CONFIG_KEYS) - set(SWEEP_ONLY_KEYS))
    if unknown:
        raise ValueError(f"unknown sweep keys: {', '.join(unknown)}")
    for key in ("sweep", "values", "seeds", "regularizers"):
        if key not in pairs:
            raise ValueError(f"missing sweep key: {key}")
    base = parse_config_text("\n".join(
        f"{k} = {pairs[k]}" for k in CONFIG_KEYS))
    values = tuple(float(tok) for tok in pairs["values"].split(","))
    seeds = tuple(int(tok) for tok in pairs["seeds"].split(","))
    regularizers = tuple(tok.strip() for tok in
                         pairs["regularizers"].split(","))
    return SweepSpec(base=base, param=pairs["sweep"], values=values,
                     seeds=seeds, regularizers=regularizers,
                     out_name=pairs.get("out", "sweep.csv"))


# ---------------------------------------------------------------------------
# plots

_SERIES = (
    # (column, dasharray, stroke)
    ("sim_error", "8 6", "#1f77b4"),
    ("pred_error", "", "#d62728"),
    ("approx_error", "2 5", "#2ca02c"),
    ("onebit_error", "10 4 2 4", "#9467bd"),
)

_X_COLUMNS = ("n", "d", "c_nominal", "r", "sigma", "lambda")

_PLOT_W, _PLOT_H = 720, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 72, 24, 24, 56


def _detect_swept(records: Sequence[TrialRecord]) -> str:
    varying = [col for col in _X_COLUMNS
               if len({getattr(r, _FIELD_BY_COLUMN[col]) for r in records}) > 1]
    if len(varying) == 1:
        return varying[0]
    if not varying:
        raise ValueError("no swept column: every candidate x-axis column is "
                         "constant; pass the column explicitly")
    raise ValueError(f"ambiguous swept column (candidates: "
                     f"{', '.join(varying)}); pass the column explicitly")


def _x_transform(param: str, values: np.ndarray) -> np.ndarray:
    if param == "lambda":
        return np.log10(values)
    return values.astype(float)


def _scale(vals: np.ndarray, lo_px: float, hi_px: float) -> np.ndarray:
    vmin, vmax = float(np.min(vals)), float(np.max(vals))
    if vmax == vmin:
        return np.full(vals.shape, 0.5 * (lo_px + hi_px))
    return lo_px + (vals - vmin) * (hi_px - lo_px) / (vmax - vmin)


def _fmt_tick(v: float) -> str:
    return f"{v:.4g}"


def _render_svg(title: str, param: str, xs: np.ndarray,
                series: dict[str, np.ndarray]) -> str:
    """One figure: polylines only for data series, line elements for axes."""
    x_t = _x_transform(param, xs)
    x_px = _scale(x_t, _MARGIN_L, _PLOT_W - _MARGIN_R)
    y_top = max(float(np.max(v)) for v in series.values())
    y_top = max(y_top, 1e-12) * 1.08
    y_all = np.array([0.0, y_top])

    def y_px(v: np.ndarray) -> np.ndarray:
        return (_PLOT_H - _MARGIN_B) - (v - 0.0) * (
            (_PLOT_H - _MARGIN_B - _MARGIN_T) / (y_all[1] - y_all[0]))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_PLOT_W}" '
        f'height="{_PLOT_H}" viewBox="0 0 {_PLOT_W} {_PLOT_H}">',
        f'<desc>{title}</desc>',
        f'<rect width="{_PLOT_W}" height="{_PLOT_H}" fill="white"/>',
        # axes
        f'<line x1="{_MARGIN_L}" y1="{_PLOT_H - _MARGIN_B}" '
        f'x2="{_PLOT_W - _MARGIN_R}" y2="{_PLOT_H - _MARGIN_B}" '
        f'stroke="black"/>',
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{_PLOT_H - _MARGIN_B}" stroke="black"/>',
    ]
    # x ticks at the data points (deduplicated), y ticks on a 5-split
    for xv, xp in zip(xs, x_px):
        parts.append(f'<line x1="{xp:.2f}" y1="{_PLOT_H - _MARGIN_B}" '
                     f'x2="{xp:.2f}" y2="{_PLOT_H - _MARGIN_B + 5}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{xp:.2f}" y="{_PLOT_H - _MARGIN_B + 18}" '
                     f'font-size="11" text-anchor="middle">'
                     f'{_fmt_tick(xv)}</text>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        yv = frac * y_top
        yp = float(y_px(np.array([yv]))[0])
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{yp:.2f}" '
                     f'x2="{_MARGIN_L}" y2="{yp:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{yp + 4:.2f}" '
                     f'font-size="11" text-anchor="end">{_fmt_tick(yv)}</text>')
    parts.append(f'<text x="{(_MARGIN_L + _PLOT_W - _MARGIN_R) / 2:.0f}" '
                 f'y="{_PLOT_H - 12}" font-size="12" text-anchor="middle">'
                 f'{param}{" (log scale)" if param == "lambda" else ""}</text>')

    legend_y = _MARGIN_T + 8
    for name, dash, stroke in _SERIES:
        if name not in series:
            continue
        pts = " ".join(f"{xp:.2f},{yp:.2f}" for xp, yp in
                       zip(x_px, y_px(series[name])))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(f'<polyline fill="none" stroke="{stroke}" '
                     f'stroke-width="1.5"{dash_attr} points="{pts}"/>')
        lx = _PLOT_W - _MARGIN_R - 180
        parts.append(f'<line x1="{lx}" y1="{legend_y}" x2="{lx + 34}" '
                     f'y2="{legend_y}" stroke="{stroke}" '
                     f'stroke-width="1.5"{dash_attr}/>')
        parts.append(f'<text x="{lx + 40}" y="{legend_y + 4}" '
                     f'font-size="12">{name}</text>')
        legend_y += 18
    parts.append("</svg>")
    return "\n".join(parts)


def emit_plots(csv_path: str, out_dir: str,
               param: str | None = None) -> tuple[list[str], int]:
    """Render one SVG per (regularizer, swept column) found in the CSV.

    Returns (written paths, count of non-converged rows excluded from the
    seed averages). Series are seed means at each swept value: sim_error
    dashed, pred_error solid, approx_error dotted, onebit_error dash-dot;
    legend labels are the CSV column names.
    """
    with open(csv_path, newline="") as fh:
        records = records_from_csv(fh)
    if not records:
        raise ValueError(f"{csv_path} has no data rows")
    if param is None:
        param = _detect_swept(records)
    if param not in _X_COLUMNS:
        raise ValueError(f"unknown column {param!r}; plottable x columns "
                         f"are {', '.join(_X_COLUMNS)}")
    attr = _FIELD_BY_COLUMN[param]

    kept = [r for r in records if r.solver_converged]
    excluded = len(records) - len(kept)
    if not kept:
        raise ValueError("every row is flagged non-converged; nothing to plot")

    os.makedirs(out_dir, exist_ok=True)
    paths: list[str] = []
    for reg in REGULARIZERS:
        rows = [r for r in kept if r.regularizer == reg]
        if not rows:
            continue
        xs = np.array(sorted({getattr(r, attr) for r in rows}), dtype=float)
        series: dict[str, np.ndarray] = {}
        for name, _, _ in _SERIES:
            col_attr = _FIELD_BY_COLUMN[name]
            if any(getattr(r, col_attr) is None for r in rows):
                continue  # series not defined for this regularizer
            means = []
            for x in xs:
                ys = [getattr(r, col_attr) for r in rows
                      if getattr(r, attr) == x]
                means.append(float(np.mean(ys)))
            series[name] = np.array(means)
        svg = _render_svg(f"{reg} vs {param}", param, xs, series)
        path = os.path.join(out_dir, f"{reg}_{param}.svg")
        with open(path, "w") as fh:
            fh.write(svg)
        paths.append(path)
    return paths, excluded


# ---------------------------------------------------------------------------
# CLI

class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1 (argparse defaults to 2, which this CLI
    # reserves for numerical failures)
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    def _usage_exit(self, message: str) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="gmmreg",
                     description="Regularized linear classification on "
                                 "corrupted Gaussian mixtures: predictions, "
                                 "simulations, sweeps, plots.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("predict", help="scalarized prediction for a config")
    p.add_argument("--reg", required=True,
                   choices=("l2", "l1", "linf", "master"))
    p.add_argument("--config", required=True)
    p.add_argument("--envelope", choices=("abs", "quad"), default=None)

    p = sub.add_parser("simulate", help="solve one instance and compare")
    p.add_argument("--reg", required=True, choices=REGULARIZERS)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", required=True, type=int)

    p = sub.add_parser("sweep", help="run a sweep spec to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("plot", help="render SVG plots from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _read_file(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc


def _cmd_predict(args) -> int:
    if args.envelope is not None and args.reg != "master":
        print("gmmreg: error: --envelope applies only to --reg master",
              file=sys.stderr)
        return 1
    config = parse_config_text(_read_file(args.config))
    print(f"regularizer = {args.reg}")
    if args.reg == "l2":
        sol = predict_ridge(config)
        print(f"alpha = {sol.alpha:.17g}")
        print(f"gamma = {sol.gamma:.17g}")
    elif args.reg == "l1":
        sol = predict_l1(config)
        print(f"tau = {sol.tau:.17g}")
        print(f"beta = {sol.beta:.17g}")
        print(f"gamma = {sol.gamma:.17g}")
        print(f"predicted_sparsity = {sol.predicted_sparsity}")
    elif args.reg == "linf":
        sol = predict_linf(config)
        print(f"tau = {sol.tau:.17g}")
        print(f"delta = {sol.delta:.17g}")
        print(f"gamma = {sol.gamma:.17g}")
        print(f"predicted_bound_count_per_sign = {sol.predicted_bound_count}")
    else:
        envelope = (EnvelopeSpec.quadratic() if args.envelope == "quad"
                    else EnvelopeSpec.absolute())
        sol = predict_master(config, envelope)
        print(f"tau = {sol.tau:.17g}")
        print(f"beta = {sol.beta:.17g}")
        print(f"gamma = {sol.gamma:.17g}")
    print(f"predicted_error = {sol.predicted_error:.17g}")
    return 0


def _cmd_simulate(args) -> int:
    config = parse_config_text(_read_file(args.config))
    config = replace(config, seed=args.seed)
    record = run_trial(config, args.reg)
    records_to_csv([record], sys.stdout)
    return 0


def _cmd_sweep(args) -> int:
    spec = parse_sweep_text(_read_file(args.spec))
    os.makedirs(args.out, exist_ok=True)
    records = run_sweep(spec, out_dir=args.out)
    flagged = sum(1 for r in records if not r.solver_converged)
    print(f"wrote {len(records)} rows to "
          f"{os.path.join(args.out, spec.out_name)}")
    print(f"non-converged rows: {flagged}")
    return 0


def _cmd_plot(args) -> int:
    paths, excluded = emit_plots(args.csv, args.out)
    for path in paths:
        print(f"wrote {path}")
    print(f"rows excluded from averages (non-converged): {excluded}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers: dict[str, Callable] = {
        "predict": _cmd_predict, "simulate": _cmd_simulate,
        "sweep": _cmd_sweep, "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        # malformed or unreadable inputs (config/spec/CSV) are usage errors
        print(f"gmmreg: error: {exc}", file=sys.stderr)
        return 1
    except (MinimaxError, ArithmeticError, FloatingPointError) as exc:
        print(f"gmmreg: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
