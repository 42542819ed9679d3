import os
from pathlib import Path

import numpy as np
import pytest

from epgraph import load_bundle, planted_partition_bundle


def data_dir() -> Path:
    return Path(os.environ.get("EPGRAPH_DATA", Path(__file__).resolve().parents[1] / "data"))


def real_bundle(name: str):
    """Load a real benchmark bundle or skip the test with a pointer."""
    path = data_dir() / name
    if not path.is_dir():
        pytest.skip(
            f"benchmark bundle {name!r} not found under {data_dir()} "
            f"(build it with converter/convert.py, see README)"
        )
    return load_bundle(path)


@pytest.fixture(scope="session")
def synth_bundle():
    return planted_partition_bundle(seed=7)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
