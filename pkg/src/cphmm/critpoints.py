"""Window-based local extrema and critical-point counts.

A critical point is a sequence endpoint or a local extremum: position m
is a maximum when its value is >= everything in the window of ``radius``
samples on either side (replication-padded at the borders) and strictly
greater than at least one window value.  Minima are symmetric.  A flat
run of equal values satisfying the test (a plateau) is counted once, at
its leftmost qualifying position; plateaus that begin at the first
sample belong to the endpoint and are not counted again.  The total adds
2 for the two endpoints.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, LengthError, ParamError

DEFAULT_RADIUS = 1

PREDICTOR_OFFSETS = {
    "all_points": 0,
    "no_boundaries": 2,
    "trends": 1,
}


@dataclass(frozen=True)
class CriticalPointCount:
    n_maxima: int
    n_minima: int
    total: int
    radius: int


@dataclass(frozen=True)
class PredictorTable:
    """State-count predictions per (gesture, sensor).

    Entries are ``max(1, median - offset)`` where the offset is 0 for
    ``all_points``, 2 for ``no_boundaries`` (endpoints removed) and 1 for
    ``trends`` (one state per monotone stretch).
    """

    values: dict[tuple[int, int], int]
    variant: str


def find_extrema(seq, radius: int = DEFAULT_RADIUS) -> tuple[np.ndarray, np.ndarray]:
    """Return (maxima, minima) as 0-based interior positions.

    Requires length >= 3 and radius >= 1.  The two position arrays are
    always disjoint.
    """
    x = np.asarray(seq, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise LengthError(f"need a 1-D sequence of length >= 3, got shape {x.shape}")
    if radius < 1:
        raise ParamError(f"window radius must be >= 1, got {radius}")
    n = x.size

    # run_start[m] = leftmost index of the flat run containing m
    run_start = np.arange(n)
    for m in range(1, n):
        if x[m] == x[m - 1]:
            run_start[m] = run_start[m - 1]

    maxima: list[int] = []
    minima: list[int] = []
    for m in range(1, n - 1):
        lo = max(0, m - radius)
        hi = min(n - 1, m + radius)
        window = x[lo : hi + 1]
        w_max = window.max()
        w_min = window.min()
        if w_max == w_min:
            continue
        start = run_start[m]
        if start == 0:
            continue  # plateau reaching the first sample: counted by the endpoint
        if x[m] == w_max:
            if not (maxima and run_start[maxima[-1]] == start):
                maxima.append(m)
        elif x[m] == w_min:
            if not (minima and run_start[minima[-1]] == start):
                minima.append(m)
    return np.asarray(maxima, dtype=int), np.asarray(minima, dtype=int)


def count_critical_points(seq, radius: int = DEFAULT_RADIUS) -> CriticalPointCount:
    """Count maxima, minima and the two endpoints."""
    maxima, minima = find_extrema(seq, radius)
    return CriticalPointCount(
        n_maxima=maxima.size,
        n_minima=minima.size,
        total=maxima.size + minima.size + 2,
        radius=radius,
    )


def median_count(counts) -> int:
    """Median of a multiset of counts; for even sizes, the lower middle.

    The result is always an element of the input, so it stays an integer
    usable as a state count.
    """
    values = sorted(int(c) for c in counts)
    if not values:
        raise EmptyInputError("median of an empty multiset")
    return values[(len(values) - 1) // 2]


def build_predictor_table(
    counts_by_pair: dict[tuple[int, int], list[int]], variant: str
) -> PredictorTable:
    """Median the per-execution totals and apply the variant's offset."""
    if variant not in PREDICTOR_OFFSETS:
        raise ParamError(
            f"unknown predictor variant {variant!r}; "
            f"expected one of {sorted(PREDICTOR_OFFSETS)}"
        )
    offset = PREDICTOR_OFFSETS[variant]
    values = {
        pair: max(1, median_count(counts) - offset)
        for pair, counts in counts_by_pair.items()
    }
    return PredictorTable(values=values, variant=variant)
