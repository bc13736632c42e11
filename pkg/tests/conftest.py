import os
import pytest

from app.config import FIXTURES_DIR
from app.models import BaselineParams, ReplicatorParams

GOLDEN_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")

# === PARAMETER SETS ===

@pytest.fixture
def baseline_ref() -> BaselineParams:
    """Interior-effort reference: e* = 0.1375, p* ~ 0.2707386."""
    return BaselineParams(p0=0.2, alpha_mit=0.5, k=2.0, epsilon=0.05, loss=0.5, theta=0.1, n_s=0.9, n_a=0.1)

@pytest.fixture
def replicator_ref() -> ReplicatorParams:
    """c = -0.034375, tipping share 0.4140625 (gamma = 2 makes the gap linear)."""
    return ReplicatorParams(alpha_net=0.2, gamma=2.0, p0=0.2, alpha_mit=0.5, k=2.0, epsilon=0.05, loss=0.5)

@pytest.fixture
def mapped_baseline() -> BaselineParams:
    """Agent parameters whose switching gap equals the replicator_ref gap at every share."""
    return BaselineParams(p0=0.2, alpha_mit=0.5, k=2.0, epsilon=0.05, loss=0.45, theta=0.2)

@pytest.fixture
def fixtures_dir() -> str:
    return FIXTURES_DIR

@pytest.fixture
def golden_dir() -> str:
    return GOLDEN_DIR

def read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return f.read()

def write_csv(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)
