"""Shared helpers for the test suite."""
from pathlib import Path

import numpy as np
import pytest

import selfnet as sn

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"
DATA_DIR = Path(__file__).resolve().parent / "data"


def diag_model(wo, diag, noise, n=None):
    """Build a DataModel with diagonal regressor covariances.

    wo: (M,) common vector; diag: (M,) shared or (N, M); noise: scalar or (N,).
    `n` forces the agent count when diag/noise alone do not pin it down.
    """
    wo = np.asarray(wo, dtype=float)
    diag = np.asarray(diag, dtype=float)
    if diag.ndim == 2:
        n = diag.shape[0]
        ru = np.stack([np.diag(row) for row in diag])
    else:
        if n is None:
            n = np.atleast_1d(np.asarray(noise, dtype=float)).shape[0]
        ru = np.tile(np.diag(diag), (n, 1, 1))
    noise = np.broadcast_to(np.asarray(noise, dtype=float), (n,)).copy()
    return sn.DataModel(wo=wo, ru=ru, noise_var=noise)


def tiny_model(n=4, dim=2, seed=0, noise=0.1, lo=0.8, hi=1.2):
    """Small random diagonal model for smoke tests."""
    rng = np.random.default_rng(seed)
    wo = rng.standard_normal(dim)
    diag = rng.uniform(lo, hi, (n, dim))
    return diag_model(wo, diag, noise)


def config_path(name):
    p = CONFIG_DIR / name
    assert p.exists(), f"missing shipped config {p}"
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
