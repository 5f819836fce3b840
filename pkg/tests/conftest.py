import numpy as np
import pytest

from cphmm.dataset import SyntheticSpec, generate_synthetic


@pytest.fixture(scope="session")
def fixture_spec():
    """Small clean corpus: 4 gestures x 3 sensors x 5 executions."""
    targets = np.array([
        [2, 3, 4],
        [3, 2, 5],
        [4, 4, 3],
        [2, 5, 2],
    ])
    return SyntheticSpec(
        n_gestures=4,
        n_sensors=3,
        n_executions=5,
        target_extrema=targets,
        length_range=(24, 40),
        noise_amplitude=0.0,
        seed=1234,
    )


@pytest.fixture(scope="session")
def fixture_dataset(fixture_spec):
    return generate_synthetic(fixture_spec)


def write_dataset_dir(root, manifest, files):
    """Write a raw dataset directory from literal file contents."""
    import json
    import os

    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, "manifest.json"), "w") as fh:
        json.dump(manifest, fh)
    for name, content in files.items():
        with open(os.path.join(root, name), "w") as fh:
            fh.write(content)
