"""Общие фикстуры: встроенные семейства и модели источников."""

from pathlib import Path

import numpy as np
import pytest

from app.services.families import (
    ab_pair_model,
    binary_remote_model,
    fam_bin,
    fam_dep_hci,
    remote_noise_model,
)
from app.services.model_loader import clear_cache

MODELS_DIR = Path(__file__).resolve().parent.parent / "scripts" / "models"


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def fam():
    return fam_bin()


@pytest.fixture
def dep2():
    return fam_dep_hci(samples=2)


@pytest.fixture
def ab_pair():
    return ab_pair_model()


@pytest.fixture
def binary_remote():
    return binary_remote_model()


@pytest.fixture
def remote_noise():
    return remote_noise_model()


@pytest.fixture
def models_dir():
    return MODELS_DIR


@pytest.fixture(autouse=True)
def _fresh_model_cache():
    clear_cache()
    yield
    clear_cache()
