import math

import numpy as np
import pytest

from gaitnl import (
    AlgorithmRequest,
    BatchJob,
    TimeSeries,
    ami,
    fnn,
    register_algorithm,
    resolve_parameters,
    run_batch,
)
from gaitnl.errors import (
    AutoResolutionFailed,
    DuplicateAlgorithmName,
    NoRunnableTasks,
    OutputDirUnwritable,
    UnknownAlgorithm,
)
from gaitnl.pipeline import (
    AlgorithmOutput,
    ColumnParameterCache,
    algorithm_names,
    registered_algorithms,
)


def make_dataset(tmp_path, csv_writer, name="walk.csv", n=600, seed=8,
                 extra=None):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    cols = {
        "kneeX": np.sin(2 * np.pi * t / 53.7) + 0.1 * rng.standard_normal(n),
        "kneeY": np.cumsum(rng.standard_normal(n)) * 0.05,
        "hipX": rng.standard_normal(n),
    }
    if extra:
        cols.update(extra)
    return csv_writer(tmp_path / name, cols)


# --- registry ---------------------------------------------------------------

def test_builtin_algorithms_registered():
    names = algorithm_names()
    for expected in ("ami", "fnn", "ent_samp", "ent_ap", "ent_xap", "ent_permu",
                     "ent_symbolic", "ent_ms_plus", "dfa", "rqa", "lye_r", "lye_w"):
        assert expected in names


def test_register_and_list_custom():
    def runner(ctx):
        return AlgorithmOutput(outputs={"mean": float(np.mean(ctx.series.samples))})

    spec = register_algorithm("my_metric", {"k": 1}, runner)
    try:
        assert spec.name in algorithm_names()
        assert any(s.name == "my_metric" for s in registered_algorithms())
        with pytest.raises(DuplicateAlgorithmName):
            register_algorithm("my_metric", {}, runner)
    finally:
        from gaitnl.pipeline import _REGISTRY
        _REGISTRY.pop("my_metric", None)


def test_unregistered_algorithm_rejected_before_run(tmp_path):
    with pytest.raises(UnknownAlgorithm):
        BatchJob(
            dataset_paths=["x.csv"], attribute_list_path="a.txt",
            algorithms=[AlgorithmRequest("ghost_algo")],
        )


# --- parameter resolution ------------------------------------------------

def test_override_precedence(lorenz_10k):
    series = TimeSeries("c", lorenz_10k[:2000])
    cache = ColumnParameterCache()
    entry = cache.resolve("f", "c", series)
    params = resolve_parameters(series, "lye_r", {"tau": 7}, entry)
    assert params["tau"] == 7
    assert params["dim"] == entry["dim"]


def test_auto_matches_direct_calls(lorenz_10k):
    series = TimeSeries("c", lorenz_10k)
    cache = ColumnParameterCache()
    entry = cache.resolve("f", "c", series)
    direct_tau = int(ami(series, max_lag=min(10000 // 2 - 1, 200)).selected_lag)
    direct_dim = int(fnn(series, tau=direct_tau, max_dim=10).selected_dim)
    params = resolve_parameters(series, "rqa", {}, entry)
    assert params["tau"] == direct_tau
    assert params["dim"] == direct_dim


def test_auto_on_constant_column_fails():
    series = TimeSeries("c", np.ones(500))
    cache = ColumnParameterCache()
    entry = cache.resolve("f", "c", series)
    assert isinstance(entry["tau"], AutoResolutionFailed)
    with pytest.raises(AutoResolutionFailed):
        resolve_parameters(series, "rqa", {}, entry)


def test_unknown_override_rejected(lorenz_10k):
    series = TimeSeries("c", lorenz_10k[:1000])
    with pytest.raises(ValueError):
        resolve_parameters(series, "dfa", {"bogus": 1}, None)


def test_required_parameter_missing():
    series = TimeSeries("c", np.arange(100.0))
    with pytest.raises(AutoResolutionFailed):
        resolve_parameters(series, "ent_xap", {}, None)


# --- batch contract -----------------------------------------------------

def test_small_batch_matrix(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\nkneeY\nhipX\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("dfa"), AlgorithmRequest("ent_samp")],
        output_dir=str(out),
    )
    summary = run_batch(job)
    assert summary.tasks_ok == 6
    assert summary.tasks_failed == 0
    dfa_lines = (out / "dfa_results.txt").read_text().splitlines()
    samp_lines = (out / "ent_samp_results.txt").read_text().splitlines()
    assert len(dfa_lines) == 3 and len(samp_lines) == 3
    assert all("status=ok" in line for line in dfa_lines)
    rows = (out / "results_summary.csv").read_text().splitlines()
    assert len(rows) == 1 + 6


def test_non_numeric_and_missing_column_skip(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer, extra={"subject": ["s"] * 600})
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\nsubject\nghost\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("ent_samp")], output_dir=str(out),
    )
    summary = run_batch(job)
    assert summary.tasks_ok == 1
    assert summary.tasks_skipped == 2
    assert summary.tasks_failed == 0
    text = (out / "ent_samp_results.txt").read_text()
    assert "column=subject status=skipped reason=NonNumericColumn" in text
    assert "column=ghost status=skipped reason=MissingColumn" in text


def test_over_budget_rqa_skipped(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer, n=2000)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("hipX\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[
            AlgorithmRequest("rqa", {"tau": 1, "dim": 2, "radius": 0.5}),
            AlgorithmRequest("ent_permu"),
        ],
        memory_budget_bytes=10_000,
        output_dir=str(out),
    )
    summary = run_batch(job)
    assert summary.tasks_skipped == 1
    assert summary.tasks_ok == 1
    assert "MemoryBudgetExceeded" in (out / "rqa_results.txt").read_text()


def test_failed_task_isolated(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\nkneeY\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[
            AlgorithmRequest("dfa", {"detrend_order": -3}),   # ValueError -> failed
            AlgorithmRequest("ent_samp"),
        ],
        output_dir=str(out),
    )
    summary = run_batch(job)
    assert summary.tasks_failed == 2
    assert summary.tasks_ok == 2
    text = (out / "dfa_results.txt").read_text()
    assert "status=failed error=ValueError" in text


def test_unloadable_file_becomes_skips(tmp_path, csv_writer):
    good = make_dataset(tmp_path, csv_writer)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n3\n")
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(good), str(bad)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("ent_samp")], output_dir=str(out),
    )
    summary = run_batch(job)
    assert summary.tasks_ok == 1
    assert summary.tasks_skipped == 1
    assert "UnreadableFile" in (out / "ent_samp_results.txt").read_text()


def test_no_runnable_tasks(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer, extra={"subject": ["s"] * 600})
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("subject\n")
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("ent_samp")],
        output_dir=str(tmp_path / "out"),
    )
    with pytest.raises(NoRunnableTasks):
        run_batch(job)


def test_output_dir_unwritable(tmp_path, csv_writer):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    data = make_dataset(tmp_path, csv_writer)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\n")
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("ent_samp")],
        output_dir=str(blocker / "sub"),
    )
    with pytest.raises(OutputDirUnwritable):
        run_batch(job)


def test_xapen_other_column(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("ent_xap", {"other": "kneeY", "r": 1.0})],
        output_dir=str(out),
    )
    summary = run_batch(job)
    assert summary.tasks_ok == 1
    record = summary.results[0]
    assert record.outputs["other"] == "kneeY"
    assert math.isfinite(record.outputs["xapen"])


def test_determinism_across_worker_counts(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\nkneeY\nhipX\n")
    algorithms = [AlgorithmRequest("dfa"), AlgorithmRequest("ent_permu")]
    outputs = {}
    for workers in (1, 3):
        out = tmp_path / f"out_{workers}"
        run_batch(BatchJob(
            dataset_paths=[str(data)], attribute_list_path=str(attrs),
            algorithms=algorithms, workers=workers, output_dir=str(out),
            emit_plots=True,
        ))
        outputs[workers] = {
            p.name: p.read_bytes()
            for p in sorted(out.iterdir())
            if p.suffix in (".txt", ".svg", ".pgm") or p.name.endswith(".csv")
        }
        outputs[workers].pop("results_summary.csv")   # contains wall times
        outputs[workers].pop("resource_report.txt")
    assert outputs[1] == outputs[3]


def test_plot_artifacts(tmp_path, csv_writer):
    rng = np.random.default_rng(5)
    n = 700
    cols = {"sig": np.sin(2 * np.pi * np.arange(n) / 50) + 0.05 * rng.standard_normal(n)}
    data = csv_writer(tmp_path / "d.csv", cols)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("sig\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[
            AlgorithmRequest("dfa"),
            AlgorithmRequest("rqa", {"tau": 12, "dim": 2, "radius": 0.3}),
        ],
        output_dir=str(out), emit_plots=True,
    )
    summary = run_batch(job)
    assert summary.tasks_ok == 2
    dfa_csv = out / "d__sig__dfa.csv"
    dfa_svg = out / "d__sig__dfa.svg"
    pgm = out / "d__sig__rqa.pgm"
    assert dfa_csv.exists() and dfa_svg.exists() and pgm.exists()

    # csv reproduces the box/fluctuation pairs exactly
    from gaitnl import dfa as run_dfa
    res = run_dfa(cols["sig"])
    lines = dfa_csv.read_text().splitlines()[1:]
    got = [tuple(line.split(",")) for line in lines]
    for (b_str, f_str), b, f in zip(got, res.box_sizes, res.fluctuations):
        assert int(b_str) == int(b)
        assert float(f_str) == float(f)

    # pgm popcount equals the recurrence bit count
    from gaitnl import recurrence_plot, embed, EmbeddingParams
    rp = recurrence_plot(embed(cols["sig"], EmbeddingParams(12, 2)), 0.3)
    payload = pgm.read_bytes().split(b"\n", 2)[2]
    pop = int(np.unpackbits(np.frombuffer(payload, dtype=np.uint8)).sum())
    n_pts = rp.n_points
    row_bytes = (n_pts + 7) // 8
    bits = np.unpackbits(
        np.frombuffer(payload, dtype=np.uint8).reshape(n_pts, row_bytes), axis=1
    )[:, :n_pts]
    assert pop == int(bits.sum())
    assert int(bits.sum()) == int(rp.to_dense().sum())


def test_plots_disabled_no_artifacts(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\n")
    out = tmp_path / "out"
    run_batch(BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("dfa")], output_dir=str(out),
    ))
    assert not list(out.glob("*.svg"))
    assert not list(out.glob("*.pgm"))


def test_rqa_memory_dominates_on_50k_fixture(tmp_path, csv_writer):
    rng = np.random.default_rng(50)
    n = 50_000
    sig = np.sin(2 * np.pi * np.arange(n) / 80) + 0.2 * rng.standard_normal(n)
    data = csv_writer(tmp_path / "gait50k.csv", {"sig": sig})
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("sig\n")
    out = tmp_path / "out"
    job = BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[
            AlgorithmRequest("rqa", {"tau": 1, "dim": 2, "radius": 0.3}),
            AlgorithmRequest("ent_samp"),
            AlgorithmRequest("dfa"),
            AlgorithmRequest("ami"),
        ],
        output_dir=str(out),
    )
    summary = run_batch(job)
    assert summary.tasks_ok == 4
    peak = {r.algorithm: r.peak_memory_bytes for r in summary.results}
    for other in ("ent_samp", "dfa", "ami"):
        assert peak["rqa"] > peak[other]
    report = (out / "resource_report.txt").read_text()
    assert "rqa" in report
    # every ok task carries a wall time measured around the algorithm call
    assert all(r.wall_time_s > 0 for r in summary.results if r.status == "ok")


def test_result_lines_keys_sorted(tmp_path, csv_writer):
    data = make_dataset(tmp_path, csv_writer)
    attrs = tmp_path / "attrs.txt"
    attrs.write_text("kneeX\n")
    out = tmp_path / "out"
    run_batch(BatchJob(
        dataset_paths=[str(data)], attribute_list_path=str(attrs),
        algorithms=[AlgorithmRequest("rqa", {"tau": 3, "dim": 2, "radius": 0.4})],
        output_dir=str(out),
    ))
    line = (out / "rqa_results.txt").read_text().splitlines()[0]
    parts = line.split(" ")
    assert parts[0].startswith("file=")
    assert parts[1].startswith("column=")
    assert parts[2].startswith("status=")
    keys = [p.split("=", 1)[0] for p in parts[3:]]
    assert keys == sorted(keys)
