"""Resampling to a common length and mean/deviation normalization.

Every sensor row is interpolated with a piecewise-cubic (Catmull-Rom)
interpolant, resampled to ``target_len`` uniformly spaced points over the
original index span, then shifted to zero mean and scaled to unit
population standard deviation (divisor = length, not length - 1).
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .dataset import RawDataset
from .errors import LengthError, ZeroVarianceError

DEFAULT_TARGET_LEN = 64


@dataclass(frozen=True)
class ProcessedSequence:
    """Fixed-length normalized sequence for one (gesture, sensor, execution)."""

    values: np.ndarray
    origin: tuple[int, int, int]

    @property
    def length(self) -> int:
        return self.values.size


def resample(row, target_len: int) -> np.ndarray:
    """Resample a row to ``target_len`` samples, endpoints preserved exactly.

    Uses a Catmull-Rom cubic: interior tangents are central differences,
    endpoint tangents are second-order one-sided differences, so the
    interpolant reproduces its nodes and is exact on quadratics.
    """
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or row.size < 2:
        raise LengthError(f"need a 1-D row of length >= 2, got shape {row.shape}")
    if target_len < 2:
        raise LengthError(f"target length {target_len} < 2")
    n = row.size
    x = np.arange(n, dtype=float)
    tangents = np.empty(n)
    if n == 2:
        tangents[:] = row[1] - row[0]
    else:
        tangents[1:-1] = 0.5 * (row[2:] - row[:-2])
        tangents[0] = -1.5 * row[0] + 2.0 * row[1] - 0.5 * row[2]
        tangents[-1] = 1.5 * row[-1] - 2.0 * row[-2] + 0.5 * row[-3]
    spline = CubicHermiteSpline(x, row, tangents)
    out = spline(np.linspace(0.0, n - 1.0, target_len))
    out[0] = row[0]
    out[-1] = row[-1]
    return out


def normalize(row) -> np.ndarray:
    """Shift to zero mean and scale to unit population standard deviation."""
    row = np.asarray(row, dtype=float)
    mean = row.mean()
    std = np.sqrt(np.mean((row - mean) ** 2))
    if std == 0.0:
        raise ZeroVarianceError("constant sequence cannot be normalized")
    return (row - mean) / std


def preprocess_dataset(
    dataset: RawDataset, target_len: int = DEFAULT_TARGET_LEN
) -> tuple[dict[tuple[int, int, int], ProcessedSequence], list[tuple[int, int, int]]]:
    """Resample and normalize every row of the dataset.

    Returns the processed sequences keyed by (gesture, sensor, execution)
    together with the list of keys excluded because the resampled row was
    constant.
    """
    processed = {}
    excluded = []
    for (i, k) in sorted(dataset.matrices):
        mat = dataset.matrices[(i, k)]
        for j in range(1, dataset.n_sensors + 1):
            resampled = resample(mat[j - 1], target_len)
            try:
                values = normalize(resampled)
            except ZeroVarianceError:
                excluded.append((i, j, k))
                continue
            processed[(i, j, k)] = ProcessedSequence(values, (i, j, k))
    return processed, excluded
