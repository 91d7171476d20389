import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qclonelab.core import Ket


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


def random_ket(sig, rng) -> Ket:
    z = rng.standard_normal(sig.dim) + 1j * rng.standard_normal(sig.dim)
    return Ket(sig, z / np.linalg.norm(z))


def random_basis_angles(rng):
    return float(rng.uniform(0.0, np.pi)), float(rng.uniform(0.0, 2.0 * np.pi - 1e-9))
