"""Generate the shared parity fixture set.

Inputs are drawn from seeded generators, every operation is evaluated
through the same handlers the bridge serves, and both arguments and
expected outputs are written with the bridge encoding. The binding tests
replay the arguments through a live bridge and require bit-identical
results, which exercises transport losslessness and cross-process
determinism at once.

Usage: python gen_fixtures.py <output.json> <dataset.csv>
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))
import bind_server  # noqa: E402


def logistic(n, x0=0.4):
    x = x0
    for _ in range(100):
        x = 4.0 * x * (1.0 - x)
    out = np.empty(n)
    for i in range(n):
        x = 4.0 * x * (1.0 - x)
        out[i] = x
    return out


def main(out_path, csv_path):
    rng = np.random.default_rng(101)
    x1000 = rng.standard_normal(1000)
    y1000 = rng.standard_normal(1000)
    sine = np.sin(2 * np.pi * np.arange(600) / 97.3)
    points = rng.standard_normal((150, 3))
    logi = logistic(2000)

    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("sig,label\n")
        for v in x1000:
            fh.write(f"{float(v)!r},walk\n")

    rp_args = {
        "points": points.reshape(-1),
        "dim": 3,
        "radius": 1.2,
        "norm": "euclidean",
        "theiler_window": 1,
    }
    rp_payload = bind_server.op_recurrence_plot(bind_server.decode(
        bind_server.encode(rp_args)
    ))

    cases = [
        ("version", {}),
        ("load_dataset", {"path": str(csv_path)}),
        ("ami", {"x": sine, "max_lag": 40, "n_bins": 16}),
        ("fnn", {"x": sine, "tau": 24, "max_dim": 5}),
        ("embed", {"x": sine, "tau": 24, "dim": 3}),
        ("sample_entropy", {"x": x1000, "m": 2, "r": 0.2}),
        ("approximate_entropy", {"x": x1000, "m": 2, "r": 0.2}),
        ("cross_approximate_entropy", {"x": x1000, "y": y1000, "m": 2, "r": 1.0}),
        ("permutation_entropy", {"x": x1000, "m": 4, "tau": 2}),
        ("symbolic_entropy", {"x": x1000, "threshold": "median",
                              "word_length": 4}),
        ("multiscale_entropy_plus", {"x": x1000[:300], "m": 2, "r": 0.2,
                                     "max_scale": 4}),
        ("dfa", {"x": x1000}),
        ("recurrence_plot", rp_args),
        ("radius_from_recurrence", {"points": points.reshape(-1), "dim": 3,
                                    "target_rec_pct": 5.0,
                                    "tolerance_pct": 0.2}),
        ("rqa_measures", {"rp": rp_payload, "l_min": 2, "v_min": 2}),
        ("lye_rosenstein", {"x": logi, "tau": 1, "dim": 2}),
        ("lye_wolf", {"x": logi, "tau": 1, "dim": 2, "evolve_steps": 1}),
    ]

    fixture = {"cases": []}
    for op, args in cases:
        encoded_args = bind_server.encode(args)
        value = bind_server.OPS[op](bind_server.decode(encoded_args))
        fixture["cases"].append({
            "op": op,
            "args": encoded_args,
            "expected": bind_server.encode(value),
        })
    Path(out_path).write_text(json.dumps(fixture), encoding="utf-8")
    print(f"wrote {out_path} with {len(fixture['cases'])} cases")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
