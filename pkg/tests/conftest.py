import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from dc3.synthetic import SyntheticSpec, write_synthetic_dataset


@pytest.fixture(scope="session")
def blob_dataset(tmp_path_factory):
    """3 classes x 30 samples, 5 well-separated blobs per class."""
    root = tmp_path_factory.mktemp("blobs")
    return write_synthetic_dataset(
        root / "ds",
        SyntheticSpec(classes=3, per_class=30, blobs_per_class=5, seed=11),
    )


@pytest.fixture(scope="session")
def lowsat_dataset(tmp_path_factory):
    """100 low-saturation images in 2 classes, cluster structure included."""
    root = tmp_path_factory.mktemp("lowsat")
    return write_synthetic_dataset(
        root / "ds",
        SyntheticSpec(classes=2, per_class=50, blobs_per_class=5, seed=23),
    )


@pytest.fixture
def dataset_factory(tmp_path):
    """Build a throwaway dataset with custom parameters."""
    counter = {"n": 0}

    def build(**kwargs):
        counter["n"] += 1
        return write_synthetic_dataset(
            tmp_path / f"ds{counter['n']}", SyntheticSpec(**kwargs)
        )

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
