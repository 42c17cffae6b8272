"""Line-oriented JSON bridge exposing the core toolkit to foreign hosts.

One request per line on stdin, one response per line on stdout:

    {"id": 1, "op": "sample_entropy", "args": {"x": {"$f64": "<base64>"}}}
    {"id": 1, "ok": true, "value": 1.234}

Encodings keep float64 values lossless across the boundary:

  {"$f64":  "<base64>"}   little-endian float64 array
  {"$i64":  [..]}         integer array (plain JSON list)
  {"$bytes":"<base64>"}   raw byte buffer (packed recurrence bits)
  {"$f":    "nan"|"inf"|"-inf"}   non-finite scalars

Finite scalars travel as JSON numbers; repr() emits the shortest
round-trip decimal, which IEEE-754 parsers on the host decode to the
identical double. Toolkit errors are reported as {"error": {"name", ...}}
with the core error class name. The server holds no state between calls.
"""

import base64
import json
import math
import sys

import numpy as np

import gaitnl
from gaitnl.errors import GaitnlError


def encode(value):
    if isinstance(value, dict):
        return {k: encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, np.ndarray):
        if value.dtype == np.uint8:
            return {"$bytes": base64.b64encode(value.tobytes()).decode("ascii")}
        if np.issubdtype(value.dtype, np.integer):
            return {"$i64": [int(v) for v in value]}
        arr = np.ascontiguousarray(value, dtype="<f8")
        return {"$f64": base64.b64encode(arr.tobytes()).decode("ascii")}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if math.isnan(f):
            return {"$f": "nan"}
        if math.isinf(f):
            return {"$f": "inf" if f > 0 else "-inf"}
        return f
    return value


def decode(value):
    if isinstance(value, dict):
        if "$f64" in value:
            raw = base64.b64decode(value["$f64"])
            return np.frombuffer(raw, dtype="<f8").copy()
        if "$bytes" in value:
            return base64.b64decode(value["$bytes"])
        if "$i64" in value:
            return np.asarray(value["$i64"], dtype=np.int64)
        if "$f" in value:
            return {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}[value["$f"]]
        return {k: decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode(v) for v in value]
    return value


def _series(args, key="x"):
    return args[key]


def _points(args):
    data = args["points"]
    dim = int(args.get("dim", 1))
    if dim > 1:
        return data.reshape(-1, dim)
    return data


def _embedding(args):
    return gaitnl.EmbeddingParams(int(args["tau"]), int(args["dim"]))


def op_version(args):
    return gaitnl.__version__


def op_load_dataset(args):
    ds = gaitnl.load_dataset(args["path"])
    return {
        "source_path": ds.source_path,
        "format": ds.format,
        "n_rows": ds.n_rows,
        "columns": [
            {
                "name": c.name,
                "usable": c.usable,
                "reason": c.reason,
                "values": c.values,
            }
            for c in ds.columns
        ],
    }


def op_ami(args):
    curve = gaitnl.ami(
        _series(args),
        None if args.get("y") is None else args["y"],
        max_lag=int(args.get("max_lag", 50)),
        n_bins=int(args.get("n_bins", 16)),
    )
    return {
        "lags": curve.lags,
        "ami_nats": curve.ami_nats,
        "selected_lag": curve.selected_lag,
    }


def op_fnn(args):
    curve = gaitnl.fnn(
        _series(args),
        tau=int(args["tau"]),
        max_dim=int(args.get("max_dim", 10)),
        r_tol=float(args.get("r_tol", 15.0)),
        a_tol=float(args.get("a_tol", 2.0)),
        drop_threshold=float(args.get("drop_threshold", 0.01)),
    )
    return {
        "dims": curve.dims,
        "fnn_fraction": curve.fnn_fraction,
        "selected_dim": curve.selected_dim,
        "converged": curve.converged,
    }


def op_embed(args):
    matrix = gaitnl.embed(_series(args), _embedding(args))
    return {
        "rows": matrix.shape[0],
        "dim": matrix.shape[1],
        "data": np.ascontiguousarray(matrix).reshape(-1),
    }


def op_sample_entropy(args):
    return gaitnl.sample_entropy(
        _series(args), m=int(args.get("m", 2)), r=float(args.get("r", 0.2))
    )


def op_approximate_entropy(args):
    return gaitnl.approximate_entropy(
        _series(args), m=int(args.get("m", 2)), r=float(args.get("r", 0.2))
    )


def op_cross_approximate_entropy(args):
    return gaitnl.cross_approximate_entropy(
        args["x"], args["y"], m=int(args.get("m", 2)), r=float(args.get("r", 0.2))
    )


def op_permutation_entropy(args):
    res = gaitnl.permutation_entropy(
        _series(args), m=int(args.get("m", 3)), tau=int(args.get("tau", 1))
    )
    return {"raw_nats": res.raw_nats, "normalized": res.normalized}


def op_symbolic_entropy(args):
    threshold = args.get("threshold", "median")
    return gaitnl.symbolic_entropy(
        _series(args), threshold=threshold,
        word_length=int(args.get("word_length", 3)),
    )


def op_multiscale_entropy_plus(args):
    curves = gaitnl.multiscale_entropy_plus(
        _series(args),
        m=int(args.get("m", 2)),
        r=float(args.get("r", 0.2)),
        max_scale=int(args.get("max_scale", 20)),
        variants=tuple(args.get("variants")) if args.get("variants") else
        gaitnl.entropy.MULTISCALE_VARIANTS,
    )
    return [
        {"variant": c.variant, "scales": c.scales, "values": c.values}
        for c in curves
    ]


def op_dfa(args):
    result = gaitnl.dfa(
        _series(args),
        box_sizes=args.get("box_sizes"),
        detrend_order=int(args.get("detrend_order", 1)),
        fit_range=tuple(args["fit_range"]) if args.get("fit_range") else None,
    )
    return {
        "alpha": result.alpha,
        "box_sizes": result.box_sizes,
        "fluctuations": result.fluctuations,
        "fit_range": list(result.fit_range),
        "fit_r2": result.fit_r2,
    }


def _rp_payload(rp):
    return {
        "n_points": rp.n_points,
        "bits": rp.bits,
        "radius": rp.radius,
        "norm": rp.norm,
        "theiler_window": rp.theiler_window,
        "strengths": rp.strengths,
    }


def op_recurrence_plot(args):
    rp = gaitnl.recurrence_plot(
        _points(args),
        radius=float(args["radius"]),
        norm=args.get("norm", "euclidean"),
        theiler_window=int(args.get("theiler_window", 0)),
        memory_budget_bytes=args.get("memory_budget_bytes"),
    )
    return _rp_payload(rp)


def op_radius_from_recurrence(args):
    res = gaitnl.radius_from_recurrence(
        _points(args),
        target_rec_pct=float(args["target_rec_pct"]),
        tolerance_pct=float(args.get("tolerance_pct", 0.1)),
        norm=args.get("norm", "euclidean"),
        theiler_window=int(args.get("theiler_window", 0)),
    )
    return {
        "radius": res.radius,
        "achieved_rec_pct": res.achieved_rec_pct,
        "iterations": res.iterations,
    }


def op_rqa_measures(args):
    rp_args = args["rp"]
    rp = gaitnl.recurrence_plot_from_packed(
        int(rp_args["n_points"]),
        rp_args["bits"],
        float(rp_args["radius"]),
        rp_args.get("norm", "euclidean"),
        int(rp_args.get("theiler_window", 0)),
        strengths=rp_args.get("strengths"),
    )
    m = gaitnl.rqa_measures(
        rp, l_min=int(args.get("l_min", 2)), v_min=int(args.get("v_min", 2))
    )
    return {
        "recurrence_rate_pct": m.recurrence_rate_pct,
        "determinism_pct": m.determinism_pct,
        "max_diagonal_line": m.max_diagonal_line,
        "mean_diagonal_line": m.mean_diagonal_line,
        "diagonal_line_entropy_nats": m.diagonal_line_entropy_nats,
        "laminarity_pct": m.laminarity_pct,
        "trapping_time": m.trapping_time,
        "max_vertical_line": m.max_vertical_line,
        "weighted_recurrence_entropy": m.weighted_recurrence_entropy,
    }


def op_lye_rosenstein(args):
    res = gaitnl.lye_rosenstein(
        _series(args), _embedding(args),
        mean_period_samples=args.get("mean_period", "auto"),
        max_steps=args.get("max_steps", "auto"),
    )
    return {
        "steps": res.steps,
        "divergence_curve": res.divergence_curve,
        "short_exp": res.short_exp,
        "local_exp": res.local_exp,
        "long_exp": res.long_exp,
        "orbital_exp": res.orbital_exp,
        "fit_windows": {k: list(v) for k, v in res.fit_windows.items()},
        "mean_period": res.mean_period,
        "n_reference": res.n_reference,
        "units": res.units,
    }


def op_lye_wolf(args):
    res = gaitnl.lye_wolf(
        _series(args), _embedding(args),
        evolve_steps=int(args.get("evolve_steps", 3)),
        scale_min=args.get("scale_min", "auto"),
        scale_max=args.get("scale_max", "auto"),
    )
    return {
        "largest_exponent": res.largest_exponent,
        "replacements": res.replacements,
        "evolution_steps": res.evolution_steps,
        "units": res.units,
    }


def op_run_batch(args):
    job = gaitnl.BatchJob(
        dataset_paths=list(args["dataset_paths"]),
        attribute_list_path=args["attribute_list_path"],
        algorithms=[
            gaitnl.AlgorithmRequest(a["name"], a.get("overrides", {}))
            for a in args["algorithms"]
        ],
        workers=int(args.get("workers", 1)),
        memory_budget_bytes=args.get("memory_budget_bytes"),
        output_dir=args.get("output_dir", "results"),
        emit_plots=bool(args.get("emit_plots", False)),
        drop_leading_trailing_nan=bool(args.get("drop_leading_trailing_nan", False)),
        sample_rate_hz=args.get("sample_rate_hz"),
    )
    summary = gaitnl.run_batch(job)
    return {
        "tasks_ok": summary.tasks_ok,
        "tasks_skipped": summary.tasks_skipped,
        "tasks_failed": summary.tasks_failed,
        "report_paths": summary.report_paths,
    }


OPS = {
    "version": op_version,
    "load_dataset": op_load_dataset,
    "ami": op_ami,
    "fnn": op_fnn,
    "embed": op_embed,
    "sample_entropy": op_sample_entropy,
    "approximate_entropy": op_approximate_entropy,
    "cross_approximate_entropy": op_cross_approximate_entropy,
    "permutation_entropy": op_permutation_entropy,
    "symbolic_entropy": op_symbolic_entropy,
    "multiscale_entropy_plus": op_multiscale_entropy_plus,
    "dfa": op_dfa,
    "recurrence_plot": op_recurrence_plot,
    "radius_from_recurrence": op_radius_from_recurrence,
    "rqa_measures": op_rqa_measures,
    "lye_rosenstein": op_lye_rosenstein,
    "lye_wolf": op_lye_wolf,
    "run_batch": op_run_batch,
}


def handle(request):
    op = request.get("op")
    if op not in OPS:
        return {"id": request.get("id"), "ok": False,
                "error": {"name": "UnknownOp", "message": f"no op {op!r}"}}
    try:
        args = decode(request.get("args", {}))
        value = OPS[op](args)
    except GaitnlError as e:
        return {"id": request.get("id"), "ok": False,
                "error": {"name": e.name, "message": str(e)}}
    except (TypeError, ValueError, KeyError) as e:
        return {"id": request.get("id"), "ok": False,
                "error": {"name": type(e).__name__, "message": str(e)}}
    return {"id": request.get("id"), "ok": True, "value": encode(value)}


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as e:
            sys.stdout.write(json.dumps(
                {"id": None, "ok": False,
                 "error": {"name": "BadRequest", "message": str(e)}}
            ) + "\n")
            sys.stdout.flush()
            continue
        response = handle(request)
        sys.stdout.write(json.dumps(response, allow_nan=False) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
