from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from lytrans.operators import make_operator  # noqa: E402
from lytrans.schema import Budget  # noqa: E402

SPECS = ROOT / "specs"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240501)


@pytest.fixture
def quick_budget() -> Budget:
    return Budget(horizon=256, levels=14)


@pytest.fixture
def backward_shift():
    return make_operator("kind = backward_shift\nweights = constant 1\n")


@pytest.fixture
def forward_shift():
    return make_operator("kind = forward_shift\nweights = constant 1\n")


@pytest.fixture
def kalisch():
    return make_operator("kind = kalisch\n")


@pytest.fixture
def reciprocal_backward():
    return make_operator("kind = backward_shift\nweights = reciprocal\n")


@pytest.fixture
def spec_path():
    def _path(name: str) -> Path:
        return SPECS / name

    return _path
