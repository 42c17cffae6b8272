"""Batch orchestration: (files x columns x algorithms) on a worker pool.

One task is one (file, column, algorithm) triple. Tasks share immutable
datasets and a per-column parameter cache that the scheduler fills before the
pool starts (single writer, many readers). Task failures never abort the
batch: toolkit errors become Skipped records, unexpected exceptions become
Failed records, and the user sees both in the result files.

Result text files are byte-deterministic for fixed inputs regardless of the
worker count: algorithm outputs are exact (integer match counts, pinned
summation orders) and records are written by a single writer in task order.
Timing lives only in the summary CSV and resource report.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import entropy, lyapunov, plots, rqa, statespace
from .dfa import dfa as run_dfa
from .data import (
    AttributeList,
    Dataset,
    TimeSeries,
    load_dataset,
    read_attribute_list,
    select_column,
)
from .errors import (
    AutoResolutionFailed,
    DuplicateAlgorithmName,
    GaitnlError,
    MemoryBudgetExceeded,
    NoRunnableTasks,
    OutputDirUnwritable,
    UnknownAlgorithm,
)

AUTO = "auto"
AUTO_TAU = "auto:tau"
AUTO_DIM = "auto:dim"
REQUIRED = "required"

AUTO_MAX_LAG_CAP = 200
AUTO_MAX_DIM = 10
DEFAULT_TARGET_REC_PCT = 2.5
WORKERS_ENV_VAR = "GAITNL_WORKERS"


def default_memory_budget() -> int:
    """75% of detected system memory, with a conservative fallback."""
    try:
        total = os.sysconf("SC_PHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        total = 8 * 1024**3
    return int(total * 0.75)


# --- algorithm registry --------------------------------------------------

@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    schema: dict                   # parameter name -> default (or sentinel)
    runner: object                 # callable(TaskRunContext) -> AlgorithmOutput
    emitter: object = None         # callable(ctx, out, base_path) -> [paths]


@dataclass
class AlgorithmOutput:
    outputs: dict
    curves: dict = field(default_factory=dict)
    memory_bytes: int = 0


@dataclass
class TaskRunContext:
    series: TimeSeries
    dataset: Dataset
    params: dict
    memory_budget_bytes: int | None
    drop_leading_trailing_nan: bool


_REGISTRY: dict[str, AlgorithmSpec] = {}


def register_algorithm(name: str, schema: dict, runner, emitter=None) -> AlgorithmSpec:
    """Add an algorithm to the batch registry; name must be unique."""
    if name in _REGISTRY:
        raise DuplicateAlgorithmName(name)
    spec = AlgorithmSpec(name, dict(schema), runner, emitter)
    _REGISTRY[name] = spec
    return spec


def registered_algorithms() -> list[AlgorithmSpec]:
    return list(_REGISTRY.values())


def algorithm_names() -> list[str]:
    return list(_REGISTRY.keys())


# --- parameter auto-resolution -------------------------------------------

class ColumnParameterCache:
    """Per-column tau/dim resolved once and shared by every consumer."""

    def __init__(self):
        self._store: dict[tuple, dict] = {}

    def key(self, file: str, column: str) -> tuple:
        return (file, column)

    def resolve(self, file: str, column: str, series: TimeSeries) -> dict:
        k = self.key(file, column)
        if k in self._store:
            return self._store[k]
        entry = {}
        try:
            max_lag = min(series.samples.size // 2 - 1, AUTO_MAX_LAG_CAP)
            curve = statespace.ami(series, max_lag=max_lag)
            entry["tau"] = int(curve.selected_lag)
        except GaitnlError as e:
            entry["tau"] = AutoResolutionFailed("tau", e.name)
        if isinstance(entry["tau"], int):
            try:
                fc = statespace.fnn(series, tau=entry["tau"], max_dim=AUTO_MAX_DIM)
                if not fc.converged:
                    entry["dim"] = AutoResolutionFailed("dim", "NoConvergence")
                else:
                    entry["dim"] = int(fc.selected_dim)
            except GaitnlError as e:
                entry["dim"] = AutoResolutionFailed("dim", e.name)
        else:
            entry["dim"] = AutoResolutionFailed("dim", "tau resolution failed")
        self._store[k] = entry
        return entry

    def get(self, file: str, column: str) -> dict | None:
        return self._store.get(self.key(file, column))


def resolve_parameters(
    column: TimeSeries,
    algorithm: str,
    overrides: dict | None = None,
    cache_entry: dict | None = None,
) -> dict:
    """Fill an algorithm's parameter schema: defaults, then auto, then overrides.

    Explicit overrides always win. tau/dim autos come from the per-column
    cache entry (computed once per column); a resolution failure propagates
    as AutoResolutionFailed so the task can be skipped.
    """
    if algorithm not in _REGISTRY:
        raise UnknownAlgorithm(algorithm)
    schema = _REGISTRY[algorithm].schema
    overrides = overrides or {}
    unknown = set(overrides) - set(schema)
    if unknown:
        raise ValueError(
            f"unknown parameters for {algorithm}: {sorted(unknown)}"
        )
    params = dict(schema)
    params.update(overrides)
    for key, value in params.items():
        if value == AUTO_TAU or value == AUTO_DIM:
            kind = "tau" if value == AUTO_TAU else "dim"
            if cache_entry is None:
                raise AutoResolutionFailed(key, "no resolution context")
            resolved = cache_entry[kind]
            if isinstance(resolved, AutoResolutionFailed):
                raise resolved
            params[key] = resolved
        elif value == REQUIRED:
            raise AutoResolutionFailed(key, "no value supplied")
    return params


def _needs_auto(schema: dict, overrides: dict) -> bool:
    merged = dict(schema)
    merged.update(overrides or {})
    return any(v in (AUTO_TAU, AUTO_DIM) for v in merged.values())


# --- built-in algorithm adapters ------------------------------------------

def _run_ami(ctx: TaskRunContext) -> AlgorithmOutput:
    n = ctx.series.samples.size
    max_lag = ctx.params["max_lag"]
    if max_lag == AUTO:
        max_lag = min(n // 2 - 1, AUTO_MAX_LAG_CAP)
    curve = statespace.ami(ctx.series, max_lag=int(max_lag),
                           n_bins=int(ctx.params["n_bins"]))
    mem = 2 * n * 8 + curve.ami_nats.nbytes + int(ctx.params["n_bins"]) ** 2 * 8
    return AlgorithmOutput(
        outputs={
            "selected_lag": int(curve.selected_lag),
            "ami_at_selected": float(curve.ami_nats[curve.selected_lag]),
        },
        curves={"ami": curve},
        memory_bytes=mem,
    )


def _emit_ami(ctx, out, base) -> list[str]:
    curve = out.curves["ami"]
    csv_path = f"{base}.csv"
    svg_path = f"{base}.svg"
    plots.write_csv_points(csv_path, ["lag", "ami_nats"],
                           [curve.lags.tolist(),
                            [float(v) for v in curve.ami_nats]])
    plots.svg_line_chart(svg_path, [("ami", curve.lags, curve.ami_nats)],
                         title="average mutual information",
                         x_label="lag (samples)", y_label="AMI (nats)")
    return [csv_path, svg_path]


def _run_fnn(ctx: TaskRunContext) -> AlgorithmOutput:
    n = ctx.series.samples.size
    tau = int(ctx.params["tau"])
    curve = statespace.fnn(
        ctx.series, tau=tau, max_dim=int(ctx.params["max_dim"]),
        r_tol=float(ctx.params["r_tol"]), a_tol=float(ctx.params["a_tol"]),
        drop_threshold=float(ctx.params["drop_threshold"]),
    )
    k = 2 * tau + 2
    mem = 2 * n * int(ctx.params["max_dim"]) * 8 + 2 * n * k * 8
    return AlgorithmOutput(
        outputs={
            "selected_dim": int(curve.selected_dim),
            "converged": bool(curve.converged),
            "fraction_at_selected": float(curve.fnn_fraction[curve.selected_dim - 1]),
        },
        curves={"fnn": curve},
        memory_bytes=mem,
    )


def _emit_fnn(ctx, out, base) -> list[str]:
    curve = out.curves["fnn"]
    csv_path = f"{base}.csv"
    svg_path = f"{base}.svg"
    plots.write_csv_points(csv_path, ["dim", "fnn_fraction"],
                           [curve.dims.tolist(),
                            [float(v) for v in curve.fnn_fraction]])
    plots.svg_line_chart(svg_path, [("fnn", curve.dims, curve.fnn_fraction)],
                         title="false nearest neighbors",
                         x_label="embedding dimension", y_label="false fraction")
    return [csv_path, svg_path]


def _template_mem(n: int, m: int) -> int:
    return 2 * max(n - m, 1) * (2 * m + 1) * 8


def _run_sampen(ctx: TaskRunContext) -> AlgorithmOutput:
    m = int(ctx.params["m"])
    value = entropy.sample_entropy(ctx.series, m=m, r=float(ctx.params["r"]))
    return AlgorithmOutput(
        outputs={"sampen": value},
        memory_bytes=_template_mem(ctx.series.samples.size, m),
    )


def _run_apen(ctx: TaskRunContext) -> AlgorithmOutput:
    m = int(ctx.params["m"])
    value = entropy.approximate_entropy(ctx.series, m=m, r=float(ctx.params["r"]))
    return AlgorithmOutput(
        outputs={"apen": value},
        memory_bytes=_template_mem(ctx.series.samples.size, m),
    )


def _run_xapen(ctx: TaskRunContext) -> AlgorithmOutput:
    other_name = ctx.params["other"]
    other = select_column(
        ctx.dataset, str(other_name),
        drop_leading_trailing_nan=ctx.drop_leading_trailing_nan,
    )
    m = int(ctx.params["m"])
    value = entropy.cross_approximate_entropy(
        ctx.series, other, m=m, r=float(ctx.params["r"])
    )
    return AlgorithmOutput(
        outputs={"xapen": value, "other": str(other_name)},
        memory_bytes=2 * _template_mem(ctx.series.samples.size, m),
    )


def _run_permu(ctx: TaskRunContext) -> AlgorithmOutput:
    m = int(ctx.params["m"])
    res = entropy.permutation_entropy(ctx.series, m=m, tau=int(ctx.params["tau"]))
    w = ctx.series.samples.size
    return AlgorithmOutput(
        outputs={"raw_nats": res.raw_nats, "normalized": res.normalized},
        memory_bytes=w * m * 8 + w * 8,
    )


def _run_symbolic(ctx: TaskRunContext) -> AlgorithmOutput:
    value = entropy.symbolic_entropy(
        ctx.series, threshold=ctx.params["threshold"],
        word_length=int(ctx.params["word_length"]),
    )
    return AlgorithmOutput(
        outputs={"symbolic": value},
        memory_bytes=2 * ctx.series.samples.size * 8,
    )


def _run_ms_plus(ctx: TaskRunContext) -> AlgorithmOutput:
    n = ctx.series.samples.size
    m = int(ctx.params["m"])
    max_scale = ctx.params["max_scale"]
    if max_scale == AUTO:
        max_scale = max(1, min(20, n // 10, n // (m + 2)))
    variants = ctx.params["variants"]
    if isinstance(variants, str):
        variants = tuple(v.strip() for v in variants.split(",") if v.strip())
    curves = entropy.multiscale_entropy_plus(
        ctx.series, m=m, r=float(ctx.params["r"]),
        max_scale=int(max_scale), variants=variants,
    )
    outputs = {}
    for curve in curves:
        for scale, value in zip(curve.scales, curve.values):
            outputs[f"{curve.variant}.{int(scale)}"] = float(value)
    fuzzy_block = min(1024, max(n - m, 1))
    mem = max(_template_mem(n, m), 2 * fuzzy_block * max(n - m, 1) * 8)
    return AlgorithmOutput(
        outputs=outputs, curves={"multiscale": curves}, memory_bytes=mem
    )


def _emit_ms_plus(ctx, out, base) -> list[str]:
    curves = out.curves["multiscale"]
    csv_path = f"{base}.csv"
    svg_path = f"{base}.svg"
    header = ["scale"] + [c.variant for c in curves]
    columns = [curves[0].scales.tolist()] + [
        [float(v) for v in c.values] for c in curves
    ]
    plots.write_csv_points(csv_path, header, columns)
    plots.svg_line_chart(
        svg_path,
        [(c.variant, c.scales, c.values) for c in curves],
        title="multiscale entropy", x_label="scale", y_label="entropy (nats)",
    )
    return [csv_path, svg_path]


def _run_dfa(ctx: TaskRunContext) -> AlgorithmOutput:
    n = ctx.series.samples.size
    boxes = ctx.params["box_sizes"]
    if boxes == AUTO:
        boxes = None
    elif isinstance(boxes, str):
        boxes = [int(b) for b in boxes.split(",") if b.strip()]
    fit_range = None
    if ctx.params["fit_min"] != AUTO and ctx.params["fit_max"] != AUTO:
        fit_range = (int(ctx.params["fit_min"]), int(ctx.params["fit_max"]))
    result = run_dfa(
        ctx.series, box_sizes=boxes,
        detrend_order=int(ctx.params["detrend_order"]), fit_range=fit_range,
    )
    return AlgorithmOutput(
        outputs={
            "alpha": result.alpha,
            "fit_r2": result.fit_r2,
            "n_boxes": int(result.box_sizes.size),
        },
        curves={"dfa": result},
        memory_bytes=(4 + int(ctx.params["detrend_order"])) * n * 8,
    )


def _emit_dfa(ctx, out, base) -> list[str]:
    result = out.curves["dfa"]
    csv_path = f"{base}.csv"
    svg_path = f"{base}.svg"
    plots.write_csv_points(csv_path, ["box_size", "fluctuation"],
                           [result.box_sizes.tolist(),
                            [float(v) for v in result.fluctuations]])
    ln_n = np.log(result.box_sizes.astype(float))
    fit = np.exp(result.alpha * ln_n + (
        np.log(result.fluctuations[0]) - result.alpha * ln_n[0]
    ))
    plots.svg_line_chart(
        svg_path,
        [("F(n)", result.box_sizes, result.fluctuations),
         (f"fit alpha={result.alpha:.3f}", result.box_sizes, fit)],
        title="detrended fluctuation analysis",
        x_label="box size", y_label="F(n)", log_x=True, log_y=True,
    )
    return [csv_path, svg_path]


def _run_rqa(ctx: TaskRunContext) -> AlgorithmOutput:
    tau = int(ctx.params["tau"])
    dim = int(ctx.params["dim"])
    points = statespace.embed(ctx.series, statespace.EmbeddingParams(tau, dim))
    n_pts = points.shape[0]
    if ctx.memory_budget_bytes is not None:
        estimate = rqa.estimate_rp_bytes(n_pts, dim)
        if estimate > ctx.memory_budget_bytes:
            raise MemoryBudgetExceeded(estimate, ctx.memory_budget_bytes)
    norm = str(ctx.params["norm"])
    theiler = int(ctx.params["theiler_window"])
    outputs = {}
    radius = ctx.params["radius"]
    if radius == AUTO:
        search = rqa.radius_from_recurrence(
            points, float(ctx.params["target_rec_pct"]),
            tolerance_pct=float(ctx.params["radius_tolerance_pct"]),
            norm=norm, theiler_window=theiler,
        )
        radius = search.radius
        outputs["radius_search_iterations"] = search.iterations
    rp = rqa.recurrence_plot(
        points, float(radius), norm=norm, theiler_window=theiler,
        memory_budget_bytes=ctx.memory_budget_bytes,
    )
    measures = rqa.rqa_measures(
        rp, l_min=int(ctx.params["l_min"]), v_min=int(ctx.params["v_min"])
    )
    outputs.update({
        "radius": float(radius),
        "n_points": n_pts,
        "recurrence_rate_pct": measures.recurrence_rate_pct,
        "determinism_pct": measures.determinism_pct,
        "max_diagonal_line": measures.max_diagonal_line,
        "mean_diagonal_line": measures.mean_diagonal_line,
        "diagonal_line_entropy_nats": measures.diagonal_line_entropy_nats,
        "laminarity_pct": measures.laminarity_pct,
        "trapping_time": measures.trapping_time,
        "max_vertical_line": measures.max_vertical_line,
        "weighted_recurrence_entropy": measures.weighted_recurrence_entropy,
    })
    return AlgorithmOutput(
        outputs=outputs,
        curves={"rp": rp},
        memory_bytes=rqa.estimate_rp_bytes(n_pts, dim),
    )


def _emit_rqa(ctx, out, base) -> list[str]:
    pgm_path = f"{base}.pgm"
    rqa.write_pgm(out.curves["rp"], pgm_path)
    return [pgm_path]


def _run_lye_r(ctx: TaskRunContext) -> AlgorithmOutput:
    tau = int(ctx.params["tau"])
    dim = int(ctx.params["dim"])
    result = lyapunov.lye_rosenstein(
        ctx.series, statespace.EmbeddingParams(tau, dim),
        mean_period_samples=ctx.params["mean_period"],
        max_steps=ctx.params["max_steps"],
    )
    n = ctx.series.samples.size
    k = 2 * max(1, int(math.ceil(result.mean_period))) + 2
    return AlgorithmOutput(
        outputs={
            "short_exp": result.short_exp,
            "local_exp": result.local_exp,
            "long_exp": result.long_exp,
            "orbital_exp": result.orbital_exp,
            "mean_period": result.mean_period,
            "units": result.units,
        },
        curves={"divergence": result},
        memory_bytes=2 * n * dim * 8 + n * k * 16,
    )


def _emit_lye_r(ctx, out, base) -> list[str]:
    result = out.curves["divergence"]
    csv_path = f"{base}.csv"
    svg_path = f"{base}.svg"
    plots.write_csv_points(csv_path, ["step", "mean_log_divergence"],
                           [result.steps.tolist(),
                            [float(v) for v in result.divergence_curve]])
    plots.svg_line_chart(
        svg_path, [("divergence", result.steps, result.divergence_curve)],
        title="divergence curve", x_label="step", y_label="mean log distance",
    )
    return [csv_path, svg_path]


def _run_lye_w(ctx: TaskRunContext) -> AlgorithmOutput:
    tau = int(ctx.params["tau"])
    dim = int(ctx.params["dim"])
    result = lyapunov.lye_wolf(
        ctx.series, statespace.EmbeddingParams(tau, dim),
        evolve_steps=int(ctx.params["evolve_steps"]),
        scale_min=ctx.params["scale_min"], scale_max=ctx.params["scale_max"],
    )
    n = ctx.series.samples.size
    return AlgorithmOutput(
        outputs={
            "largest_exponent": result.largest_exponent,
            "replacements": result.replacements,
            "evolution_steps": result.evolution_steps,
            "units": result.units,
        },
        memory_bytes=2 * n * dim * 8,
    )


def _register_builtins():
    register_algorithm("ami", {"max_lag": AUTO, "n_bins": 16}, _run_ami, _emit_ami)
    register_algorithm(
        "fnn",
        {"tau": AUTO_TAU, "max_dim": AUTO_MAX_DIM, "r_tol": 15.0, "a_tol": 2.0,
         "drop_threshold": 0.01},
        _run_fnn, _emit_fnn,
    )
    register_algorithm("ent_samp", {"m": 2, "r": 0.2}, _run_sampen)
    register_algorithm("ent_ap", {"m": 2, "r": 0.2}, _run_apen)
    register_algorithm(
        "ent_xap", {"m": 2, "r": 0.2, "other": REQUIRED}, _run_xapen
    )
    register_algorithm("ent_permu", {"m": 3, "tau": 1}, _run_permu)
    register_algorithm(
        "ent_symbolic", {"threshold": entropy.AUTO_MEDIAN, "word_length": 3},
        _run_symbolic,
    )
    register_algorithm(
        "ent_ms_plus",
        {"m": 2, "r": 0.2, "max_scale": AUTO,
         "variants": ",".join(entropy.MULTISCALE_VARIANTS)},
        _run_ms_plus, _emit_ms_plus,
    )
    register_algorithm(
        "dfa",
        {"box_sizes": AUTO, "detrend_order": 1, "fit_min": AUTO, "fit_max": AUTO},
        _run_dfa, _emit_dfa,
    )
    register_algorithm(
        "rqa",
        {"tau": AUTO_TAU, "dim": AUTO_DIM, "radius": AUTO,
         "target_rec_pct": DEFAULT_TARGET_REC_PCT, "radius_tolerance_pct": 0.1,
         "norm": "euclidean", "theiler_window": 0, "l_min": 2, "v_min": 2},
        _run_rqa, _emit_rqa,
    )
    register_algorithm(
        "lye_r",
        {"tau": AUTO_TAU, "dim": AUTO_DIM, "mean_period": AUTO, "max_steps": AUTO},
        _run_lye_r, _emit_lye_r,
    )
    register_algorithm(
        "lye_w",
        {"tau": AUTO_TAU, "dim": AUTO_DIM, "evolve_steps": 3,
         "scale_min": AUTO, "scale_max": AUTO},
        _run_lye_w,
    )


_register_builtins()


# --- batch types ----------------------------------------------------------

@dataclass(frozen=True)
class AlgorithmRequest:
    name: str
    overrides: dict = field(default_factory=dict)


@dataclass
class BatchJob:
    dataset_paths: list
    attribute_list_path: str
    algorithms: list            # of AlgorithmRequest
    workers: int = 1
    memory_budget_bytes: int | None = None
    output_dir: str = "results"
    emit_plots: bool = False
    drop_leading_trailing_nan: bool = False
    sample_rate_hz: float | None = None

    def __post_init__(self):
        if not self.algorithms:
            raise ValueError("algorithms must be non-empty")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for req in self.algorithms:
            if req.name not in _REGISTRY:
                raise UnknownAlgorithm(req.name)


@dataclass
class TaskResult:
    task_index: int
    file: str
    column: str
    algorithm: str
    parameters: dict
    outputs: dict
    status: str                  # "ok" | "skipped" | "failed"
    detail: str = ""             # error/skip reason name (+ message)
    wall_time_s: float = 0.0
    peak_memory_bytes: int = 0
    artifacts: list = field(default_factory=list)
    plot_error: str = ""


@dataclass
class BatchSummary:
    tasks_ok: int
    tasks_skipped: int
    tasks_failed: int
    report_paths: list
    results: list


# --- value formatting ------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# --- batch execution --------------------------------------------------------

@dataclass
class _Task:
    index: int
    file: str
    column: str
    request: AlgorithmRequest


def _probe_output_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as e:
        raise OutputDirUnwritable(f"{path}: {e}") from e


def _artifact_stem(stems: dict, file: str) -> str:
    return stems[file]


def _build_stems(paths: list) -> dict:
    stems = {}
    seen = {}
    for p in paths:
        stem = Path(p).stem
        if stem in seen:
            seen[stem] += 1
            stems[str(p)] = f"{stem}_{seen[stem]}"
        else:
            seen[stem] = 0
            stems[str(p)] = stem
    return stems


def run_batch(job: BatchJob) -> BatchSummary:
    """Execute the full task matrix and write result files and reports.

    Per-file load failures and per-column validation failures become Skipped
    tasks; the batch always runs to completion unless the output directory is
    unwritable or every single task was skipped (NoRunnableTasks).
    """
    out_dir = Path(job.output_dir)
    _probe_output_dir(out_dir)
    attrs: AttributeList = read_attribute_list(job.attribute_list_path)
    budget = (
        job.memory_budget_bytes
        if job.memory_budget_bytes is not None
        else default_memory_budget()
    )

    datasets: dict[str, Dataset | GaitnlError] = {}
    for p in job.dataset_paths:
        try:
            datasets[str(p)] = load_dataset(p)
        except GaitnlError as e:
            datasets[str(p)] = e

    tasks = []
    index = 0
    for p in job.dataset_paths:
        for column in attrs.names:
            for req in job.algorithms:
                tasks.append(_Task(index, str(p), column, req))
                index += 1

    # Column validation, once per (file, column).
    series_cache: dict[tuple, TimeSeries | GaitnlError] = {}
    for p, ds in datasets.items():
        if isinstance(ds, GaitnlError):
            continue
        for column in attrs.names:
            try:
                series_cache[(p, column)] = select_column(
                    ds, column,
                    drop_leading_trailing_nan=job.drop_leading_trailing_nan,
                    sample_rate_hz=job.sample_rate_hz,
                )
            except GaitnlError as e:
                series_cache[(p, column)] = e

    # Single-writer parameter cache: resolve tau/dim before the pool starts.
    param_cache = ColumnParameterCache()
    needs_auto: set[tuple] = set()
    for task in tasks:
        spec = _REGISTRY[task.request.name]
        if _needs_auto(spec.schema, task.request.overrides):
            needs_auto.add((task.file, task.column))
    for (p, column) in sorted(needs_auto):
        series = series_cache.get((p, column))
        if isinstance(series, TimeSeries):
            param_cache.resolve(p, column, series)

    stems = _build_stems(job.dataset_paths)

    def execute(task: _Task) -> TaskResult:
        spec = _REGISTRY[task.request.name]
        base_result = dict(
            task_index=task.index, file=task.file, column=task.column,
            algorithm=task.request.name,
        )
        ds = datasets[task.file]
        if isinstance(ds, GaitnlError):
            return TaskResult(**base_result, parameters={}, outputs={},
                              status="skipped", detail=ds.name)
        series = series_cache[(task.file, task.column)]
        if isinstance(series, GaitnlError):
            return TaskResult(**base_result, parameters={}, outputs={},
                              status="skipped", detail=series.name)
        try:
            params = resolve_parameters(
                series, task.request.name, task.request.overrides,
                param_cache.get(task.file, task.column),
            )
        except AutoResolutionFailed as e:
            return TaskResult(**base_result, parameters={}, outputs={},
                              status="skipped", detail=f"{e.name}: {e}")
        ctx = TaskRunContext(
            series=series, dataset=ds, params=params,
            memory_budget_bytes=budget,
            drop_leading_trailing_nan=job.drop_leading_trailing_nan,
        )
        start = time.perf_counter()
        try:
            out = spec.runner(ctx)
        except GaitnlError as e:
            wall = time.perf_counter() - start
            return TaskResult(**base_result, parameters=params, outputs={},
                              status="skipped", detail=e.name,
                              wall_time_s=wall)
        except Exception as e:  # noqa: BLE001 - isolate task faults
            wall = time.perf_counter() - start
            return TaskResult(**base_result, parameters=params, outputs={},
                              status="failed",
                              detail=f"{type(e).__name__}: {e}",
                              wall_time_s=wall)
        wall = time.perf_counter() - start
        result = TaskResult(
            **base_result, parameters=params, outputs=out.outputs,
            status="ok", wall_time_s=wall, peak_memory_bytes=out.memory_bytes,
        )
        if job.emit_plots and spec.emitter is not None:
            base = out_dir / (
                f"{_artifact_stem(stems, task.file)}__{task.column}"
                f"__{task.request.name}"
            )
            try:
                result.artifacts = spec.emitter(ctx, out, str(base))
            except OSError as e:
                result.plot_error = f"PlotWriteFailed: {e}"
        return result

    if job.workers == 1:
        results = [execute(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=job.workers) as pool:
            results = list(pool.map(execute, tasks))
    results.sort(key=lambda r: r.task_index)

    report_paths = _write_reports(out_dir, job, results)
    ok = sum(1 for r in results if r.status == "ok")
    skipped = sum(1 for r in results if r.status == "skipped")
    failed = sum(1 for r in results if r.status == "failed")
    if tasks and ok == 0 and failed == 0:
        raise NoRunnableTasks(
            f"every one of the {len(tasks)} tasks was skipped; see "
            f"{report_paths[-2]}"
        )
    return BatchSummary(ok, skipped, failed, report_paths, results)


def _write_reports(out_dir: Path, job: BatchJob, results: list) -> list:
    paths = []
    algo_order = []
    for req in job.algorithms:
        if req.name not in algo_order:
            algo_order.append(req.name)
    for name in algo_order:
        path = out_dir / f"{name}_results.txt"
        with open(path, "w", encoding="utf-8") as fh:
            for r in results:
                if r.algorithm != name:
                    continue
                parts = [f"file={r.file}", f"column={r.column}",
                         f"status={r.status}"]
                if r.status == "ok":
                    extra = {k: format_value(v) for k, v in r.outputs.items()}
                elif r.status == "skipped":
                    extra = {"reason": r.detail.split(":")[0]}
                else:
                    extra = {"error": r.detail.split(":")[0]}
                parts += [f"{k}={extra[k]}" for k in sorted(extra)]
                fh.write(" ".join(parts) + "\n")
        paths.append(str(path))

    summary_path = out_dir / "results_summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(
            "task_index,file,column,algorithm,status,detail,"
            "wall_time_s,peak_memory_bytes,parameters,outputs\n"
        )
        for r in results:
            params = json.dumps(
                {k: format_value(v) for k, v in r.parameters.items()},
                sort_keys=True,
            )
            outputs = json.dumps(
                {k: format_value(v) for k, v in r.outputs.items()},
                sort_keys=True,
            )
            row = [
                str(r.task_index), r.file, r.column, r.algorithm, r.status,
                r.detail.replace(",", ";"), f"{r.wall_time_s:.6f}",
                str(r.peak_memory_bytes),
                '"' + params.replace('"', '""') + '"',
                '"' + outputs.replace('"', '""') + '"',
            ]
            fh.write(",".join(row) + "\n")
    paths.append(str(summary_path))

    report_path = out_dir / "resource_report.txt"
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("algorithm resource utilization (ok tasks)\n")
        fh.write(
            f"{'algorithm':<14}{'ok':>5}{'skip':>6}{'fail':>6}"
            f"{'mean_wall_s':>14}{'max_wall_s':>13}"
            f"{'mean_peak_mem_B':>17}{'max_peak_mem_B':>16}\n"
        )
        for name in algo_order:
            rs = [r for r in results if r.algorithm == name]
            ok = [r for r in rs if r.status == "ok"]
            skip = sum(1 for r in rs if r.status == "skipped")
            fail = sum(1 for r in rs if r.status == "failed")
            mean_wall = sum(r.wall_time_s for r in ok) / len(ok) if ok else 0.0
            max_wall = max((r.wall_time_s for r in ok), default=0.0)
            mean_mem = (
                sum(r.peak_memory_bytes for r in ok) / len(ok) if ok else 0.0
            )
            max_mem = max((r.peak_memory_bytes for r in ok), default=0)
            fh.write(
                f"{name:<14}{len(ok):>5}{skip:>6}{fail:>6}"
                f"{mean_wall:>14.4f}{max_wall:>13.4f}"
                f"{mean_mem:>17.0f}{max_mem:>16}\n"
            )
    paths.append(str(report_path))
    return paths
