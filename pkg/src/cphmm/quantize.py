"""Scalar k-means codebooks and nearest-centroid discretization.

One codebook per alphabet size is fitted over the pooled values of every
normalized sequence in the corpus.  Initialization is quantile seeding
(centroid t starts at the (t - 1/2) / c quantile), iteration is plain
Lloyd with squared-Euclidean distance, and convergence means an
assignment pass with zero changes (capped at ``MAX_ITER``).  Encoding
maps a value to the 1-based index of its nearest centroid, breaking ties
toward the lower index.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    ComputeError,
    DegenerateInputError,
    IoError,
    ModelLoadError,
    ParamError,
)
from .preprocess import ProcessedSequence

MAX_ITER = 200


@dataclass(frozen=True)
class Codebook:
    """Strictly increasing centroids; the alphabet is 1..len(centroids)."""

    centroids: np.ndarray

    @property
    def n_clusters(self) -> int:
        return self.centroids.size

    def thresholds(self) -> np.ndarray:
        """Midpoints between consecutive centroids."""
        c = self.centroids
        return 0.5 * (c[:-1] + c[1:])


@dataclass(frozen=True)
class SymbolSequence:
    """Discretized sequence; symbols are 1-based cluster indices."""

    symbols: np.ndarray
    origin: tuple[int, int, int]
    n_symbols: int

    @property
    def length(self) -> int:
        return self.symbols.size


def fit_codebook(values, n_clusters: int, seed: int = 0) -> Codebook:
    """Fit a 1-D k-means codebook over pooled scalar values.

    The procedure is fully deterministic; ``seed`` is accepted for API
    symmetry but quantile seeding leaves nothing to randomize.
    """
    del seed
    values = np.asarray(values, dtype=float).ravel()
    if n_clusters < 2:
        raise ParamError(f"cluster count must be >= 2, got {n_clusters}")
    if np.unique(values).size < n_clusters:
        raise DegenerateInputError(
            f"{np.unique(values).size} distinct values cannot form "
            f"{n_clusters} clusters"
        )
    centroids = _quantile_seed(values, n_clusters)
    centroids, _ = lloyd_iterations(values, centroids, MAX_ITER)
    if np.any(np.diff(centroids) <= 0):
        raise ComputeError(
            f"k-means produced coincident centroids for c={n_clusters}"
        )
    return Codebook(centroids=centroids)


def _quantile_seed(values: np.ndarray, n_clusters: int) -> np.ndarray:
    probs = (np.arange(n_clusters) + 0.5) / n_clusters
    seeds = np.quantile(values, probs)
    if np.all(np.diff(seeds) > 0):
        return seeds
    # quantiles of clumped data coincide: snap every seed to a distinct
    # data value while keeping the quantile ordering
    uniq = np.unique(values)
    idx = np.searchsorted(uniq, seeds).clip(0, uniq.size - 1)
    for t in range(1, n_clusters):
        idx[t] = max(idx[t], idx[t - 1] + 1)
    for t in range(n_clusters - 1, -1, -1):
        idx[t] = min(idx[t], uniq.size - n_clusters + t)
    return uniq[idx]


def lloyd_iterations(
    values: np.ndarray, centroids: np.ndarray, max_iter: int
) -> tuple[np.ndarray, list[float]]:
    """Run Lloyd's algorithm; returns (sorted centroids, SSE per iteration).

    The SSE trace starts with the seeding's SSE and is non-increasing.
    """
    centroids = np.sort(np.asarray(centroids, dtype=float))
    assignments = _assign(values, centroids)
    trace = [_sse(values, centroids, assignments)]
    for _ in range(max_iter):
        centroids = _update(values, centroids, assignments)
        new_assignments = _assign(values, centroids)
        trace.append(_sse(values, centroids, new_assignments))
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
    return centroids, trace


def _assign(values: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid index (0-based); midpoint ties go to the lower index."""
    thresholds = 0.5 * (centroids[:-1] + centroids[1:])
    return np.searchsorted(thresholds, values, side="left")


def _update(
    values: np.ndarray, centroids: np.ndarray, assignments: np.ndarray
) -> np.ndarray:
    n_clusters = centroids.size
    sums = np.bincount(assignments, weights=values, minlength=n_clusters)
    counts = np.bincount(assignments, minlength=n_clusters)
    new = centroids.copy()
    nonempty = counts > 0
    new[nonempty] = sums[nonempty] / counts[nonempty]
    empties = np.flatnonzero(~nonempty)
    if empties.size:
        # keep exactly n clusters: each empty one seizes the point
        # currently farthest from its centroid
        distances = np.abs(values - new[assignments])
        for t in empties:
            far = int(np.argmax(distances))
            new[t] = values[far]
            distances[far] = -1.0
    return np.sort(new)


def _sse(values: np.ndarray, centroids: np.ndarray, assignments: np.ndarray) -> float:
    return float(np.sum((values - centroids[assignments]) ** 2))


def encode_values(values, codebook: Codebook) -> np.ndarray:
    """Map values to 1-based nearest-centroid symbols."""
    values = np.asarray(values, dtype=float)
    return np.searchsorted(codebook.thresholds(), values, side="left") + 1


def encode(seq: ProcessedSequence, codebook: Codebook) -> SymbolSequence:
    return SymbolSequence(
        symbols=encode_values(seq.values, codebook),
        origin=seq.origin,
        n_symbols=codebook.n_clusters,
    )


def save_codebook(codebook: Codebook, path: str) -> None:
    """One full-precision centroid per line."""
    try:
        with open(path, "w") as fh:
            for c in codebook.centroids:
                fh.write(repr(float(c)) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write codebook {path}: {exc}") from exc


def load_codebook(path: str) -> Codebook:
    try:
        with open(path) as fh:
            centroids = np.array([float(line) for line in fh if line.strip()])
    except OSError as exc:
        raise IoError(f"cannot read codebook {path}: {exc}") from exc
    except ValueError as exc:
        raise ModelLoadError(f"malformed codebook {path}: {exc}") from exc
    if centroids.size < 2 or np.any(np.diff(centroids) <= 0):
        raise ModelLoadError(f"codebook {path} is not strictly increasing")
    return Codebook(centroids=centroids)
