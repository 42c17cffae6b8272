import numpy as np
import pytest

import oracles


@pytest.fixture(scope="session")
def lorenz_30k():
    return oracles.lorenz_series(30000, dt=0.01)


@pytest.fixture(scope="session")
def lorenz_10k(lorenz_30k):
    return lorenz_30k[:10000]


@pytest.fixture(scope="session")
def logistic_5k():
    return oracles.logistic_series(5000)


@pytest.fixture(scope="session")
def lorenz_lambda1():
    return oracles.lorenz_max_lyapunov_variational(t_total=300.0)


def write_csv(path, columns, order=None):
    """Write a dict of name -> sequence (floats or strings) as CSV."""
    names = list(columns) if order is None else order
    n = len(next(iter(columns.values())))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            cells = []
            for name in names:
                v = columns[name][i]
                cells.append(v if isinstance(v, str) else repr(float(v)))
            fh.write(",".join(cells) + "\n")
    return path


@pytest.fixture
def csv_writer():
    return write_csv


@pytest.fixture
def noisy_sine():
    # long enough that the histogram-MI bias noise cannot fake an early dip
    rng = np.random.default_rng(42)
    t = np.arange(100_000)
    return np.sin(2 * np.pi * t / 100) + 0.05 * rng.standard_normal(t.size)
