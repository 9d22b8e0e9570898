import os
from pathlib import Path

import numpy as np
import pytest

from rgnn.network import ArchConfig
from rgnn.solver import AdmmConfig


def dataset_dir() -> Path:
    """Directory expected to hold the standard IDX benchmark files."""
    return Path(os.environ.get("RGNN_DATA_DIR", Path(__file__).resolve().parent.parent / "data"))


def make_blobs(n_per_class=100, centers=((0.0, 0.0), (3.0, 3.0)), scale=0.5, seed=0):
    """Well-separated Gaussian blobs, one cluster per class, features in raw scale."""
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for label, center in enumerate(centers):
        xs.append(rng.normal(loc=center, scale=scale, size=(n_per_class, len(center))))
        ys.append(np.full(n_per_class, label))
    X = np.vstack(xs)
    y = np.concatenate(ys)
    perm = rng.permutation(len(y))
    return X[perm], y[perm]


@pytest.fixture
def blobs():
    return make_blobs()


def small_arch(**overrides) -> ArchConfig:
    base = dict(
        neuron_counts=(4,),
        connection_probability=0.6,
        d=5,
        M=2,
        sigma=1.0,
        activation="tanh",
        sae_hidden=8,
        sae_lambda=1e-3,
    )
    base.update(overrides)
    return ArchConfig(**base)


def fast_solver(**overrides) -> AdmmConfig:
    base = dict(rho=1.0, lam=1e-3, max_iter=60, ema_enabled=True, tail_window=10, tolerance=1e-10)
    base.update(overrides)
    return AdmmConfig(**base)
