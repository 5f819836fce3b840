"""Corpus data model: on-disk layout, validation, and synthetic generation.

A dataset directory contains ``manifest.json`` with the counts
``{"I": gestures, "J": sensors, "K": executions}`` and one CSV per
execution named ``g<i>_e<k>.csv`` (1-based indices).  Each file holds J
rows of comma-separated decimal values; row j is the sample sequence of
sensor j for that execution.  Values are written with full round-trip
precision so that save/load is bit-exact.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IoError,
    LengthError,
    MissingExecutionError,
    ParseError,
    ShapeError,
    SpecError,
)

MANIFEST_NAME = "manifest.json"


def sequence_filename(gesture: int, execution: int) -> str:
    return f"g{gesture}_e{execution}.csv"


@dataclass(frozen=True)
class RawDataset:
    """Labeled collection of per-execution sensor matrices.

    ``matrices[(i, k)]`` is the float array of shape
    (n_sensors, length(i, k)) for gesture i, execution k; gesture and
    execution indices are 1-based, matching the file names.
    """

    n_gestures: int
    n_sensors: int
    n_executions: int
    matrices: dict[tuple[int, int], np.ndarray] = field(repr=False)

    def length(self, gesture: int, execution: int) -> int:
        return self.matrices[(gesture, execution)].shape[1]

    def row(self, gesture: int, sensor: int, execution: int) -> np.ndarray:
        """Single sensor sequence; sensor is 1-based."""
        return self.matrices[(gesture, execution)][sensor - 1]

    def validate(self) -> None:
        expected = {
            (i, k)
            for i in range(1, self.n_gestures + 1)
            for k in range(1, self.n_executions + 1)
        }
        present = set(self.matrices)
        missing = expected - present
        if missing:
            raise MissingExecutionError(
                f"missing executions: {sorted(missing)[:5]}"
                + ("..." if len(missing) > 5 else "")
            )
        extra = present - expected
        if extra:
            raise ShapeError(f"unexpected executions: {sorted(extra)[:5]}")
        for (i, k), mat in self.matrices.items():
            if mat.ndim != 2 or mat.shape[0] != self.n_sensors:
                raise ShapeError(
                    f"execution ({i},{k}): expected {self.n_sensors} rows, "
                    f"got shape {mat.shape}"
                )
            if mat.shape[1] < 2:
                raise LengthError(
                    f"execution ({i},{k}): length {mat.shape[1]} < 2"
                )
            if not np.all(np.isfinite(mat)):
                raise ParseError(f"execution ({i},{k}): non-finite values")


def save_dataset(dataset: RawDataset, root: str, extra_manifest: dict | None = None) -> None:
    """Write a dataset directory; values use full round-trip precision."""
    os.makedirs(root, exist_ok=True)
    manifest = {
        "I": dataset.n_gestures,
        "J": dataset.n_sensors,
        "K": dataset.n_executions,
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    try:
        with open(os.path.join(root, MANIFEST_NAME), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for (i, k) in sorted(dataset.matrices):
            mat = dataset.matrices[(i, k)]
            lines = [",".join(repr(float(v)) for v in row) for row in mat]
            path = os.path.join(root, sequence_filename(i, k))
            with open(path, "w") as fh:
                fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write dataset to {root}: {exc}") from exc


def load_dataset(root: str) -> RawDataset:
    """Load and validate a dataset directory.

    Raises MissingExecutionError, ShapeError, ParseError or LengthError
    on the first violation found; a returned dataset always satisfies
    every invariant.
    """
    manifest_path = os.path.join(root, MANIFEST_NAME)
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed manifest {manifest_path}: {exc}") from exc

    try:
        n_gestures = int(manifest["I"])
        n_sensors = int(manifest["J"])
        n_executions = int(manifest["K"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"manifest {manifest_path} lacks integer I/J/K") from exc
    if min(n_gestures, n_sensors, n_executions) < 1:
        raise ParseError(f"manifest {manifest_path}: I, J, K must be >= 1")

    matrices = {}
    for i in range(1, n_gestures + 1):
        for k in range(1, n_executions + 1):
            path = os.path.join(root, sequence_filename(i, k))
            if not os.path.exists(path):
                raise MissingExecutionError(f"no file for execution ({i},{k}): {path}")
            matrices[(i, k)] = _read_matrix(path, n_sensors)

    dataset = RawDataset(n_gestures, n_sensors, n_executions, matrices)
    dataset.validate()
    return dataset


def _read_matrix(path: str, n_sensors: int) -> np.ndarray:
    with open(path) as fh:
        lines = [line.strip() for line in fh]
    rows = [line for line in lines if line]
    if len(rows) != n_sensors:
        raise ShapeError(f"{path}: expected {n_sensors} rows, found {len(rows)}")
    parsed = []
    for j, line in enumerate(rows, start=1):
        cells = line.split(",")
        values = np.empty(len(cells))
        for m, cell in enumerate(cells):
            try:
                values[m] = float(cell)
            except ValueError as exc:
                raise ParseError(f"{path} row {j} cell {m + 1}: {cell!r}") from exc
            if not np.isfinite(values[m]):
                raise ParseError(f"{path} row {j} cell {m + 1}: non-finite {cell!r}")
        parsed.append(values)
    lengths = {v.size for v in parsed}
    if len(lengths) != 1:
        raise ShapeError(f"{path}: ragged rows with lengths {sorted(lengths)}")
    length = lengths.pop()
    if length < 2:
        raise LengthError(f"{path}: sequence length {length} < 2")
    return np.vstack(parsed)


# --- synthetic corpora --------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic corpus with a known interior-extrema count.

    ``target_extrema[i-1, j-1]`` is the number of interior extrema every
    clean row of gesture i, sensor j must have.  ``noise_amplitude`` is a
    single standard deviation applied everywhere, or a (gestures, sensors)
    array of per-channel amplitudes.
    """

    n_gestures: int
    n_sensors: int
    n_executions: int
    target_extrema: np.ndarray
    length_range: tuple[int, int]
    noise_amplitude: float | np.ndarray = 0.0
    seed: int = 0

    @classmethod
    def from_json(cls, path: str) -> "SyntheticSpec":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise IoError(f"cannot read spec {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed spec {path}: {exc}") from exc
        try:
            noise = raw.get("noise_amplitude", 0.0)
            return cls(
                n_gestures=int(raw["gestures"]),
                n_sensors=int(raw["sensors"]),
                n_executions=int(raw["executions"]),
                target_extrema=np.asarray(raw["target_extrema"], dtype=int),
                length_range=(int(raw["length_range"][0]), int(raw["length_range"][1])),
                noise_amplitude=noise if np.isscalar(noise) else np.asarray(noise, float),
                seed=int(raw.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"spec {path}: {exc}") from exc

    def to_manifest_entry(self) -> dict:
        noise = self.noise_amplitude
        return {
            "gestures": self.n_gestures,
            "sensors": self.n_sensors,
            "executions": self.n_executions,
            "target_extrema": np.asarray(self.target_extrema).tolist(),
            "length_range": list(self.length_range),
            "noise_amplitude": float(noise) if np.isscalar(noise) else np.asarray(noise).tolist(),
            "seed": self.seed,
        }

    def validate(self) -> None:
        if min(self.n_gestures, self.n_sensors, self.n_executions) < 1:
            raise SpecError("gestures, sensors and executions must all be >= 1")
        targets = np.asarray(self.target_extrema)
        if targets.shape != (self.n_gestures, self.n_sensors):
            raise SpecError(
                f"target_extrema shape {targets.shape} != "
                f"({self.n_gestures}, {self.n_sensors})"
            )
        if np.any(targets < 0):
            raise SpecError("target_extrema values must be >= 0")
        lo, hi = self.length_range
        if lo < 2 or hi < lo:
            raise SpecError(f"invalid length_range [{lo}, {hi}]")
        needed = int(targets.max()) + 2
        if lo < needed:
            raise SpecError(
                f"length_range minimum {lo} cannot hold {int(targets.max())} "
                f"interior extrema (needs >= {needed})"
            )
        noise = self.noise_amplitude
        if np.isscalar(noise):
            if noise < 0:
                raise SpecError("noise_amplitude must be >= 0")
        else:
            noise = np.asarray(noise)
            if noise.shape != (self.n_gestures, self.n_sensors):
                raise SpecError(
                    f"noise_amplitude shape {noise.shape} != "
                    f"({self.n_gestures}, {self.n_sensors})"
                )
            if np.any(noise < 0):
                raise SpecError("noise_amplitude values must be >= 0")
        if self.seed < 0:
            raise SpecError("seed must be >= 0")

    def noise_for(self, gesture: int, sensor: int) -> float:
        if np.isscalar(self.noise_amplitude):
            return float(self.noise_amplitude)
        return float(np.asarray(self.noise_amplitude)[gesture - 1, sensor - 1])


def generate_synthetic(spec: SyntheticSpec) -> RawDataset:
    """Build a corpus of smooth rows with a constructed extrema count.

    Each clean row is a chain of cosine-eased monotone arches whose
    joints are pinned to sample positions, so at window radius 1 the row
    has exactly ``target_extrema[i, j]`` interior extrema before noise.
    Deterministic for a given seed.
    """
    spec.validate()
    matrices = {}
    for i in range(1, spec.n_gestures + 1):
        for k in range(1, spec.n_executions + 1):
            lo, hi = spec.length_range
            # independent substream per execution and per row, so a change
            # to one channel (e.g. its noise) never shifts another's draws
            rng_len = np.random.default_rng([spec.seed, 0, i, k])
            length = int(rng_len.integers(lo, hi + 1))
            mat = np.empty((spec.n_sensors, length))
            for j in range(1, spec.n_sensors + 1):
                rng_row = np.random.default_rng([spec.seed, 1, i, j, k])
                n_extrema = int(np.asarray(spec.target_extrema)[i - 1, j - 1])
                row = _arched_row(length, n_extrema, rng_row)
                amp = spec.noise_for(i, j)
                if amp > 0:
                    row = row + rng_row.normal(0.0, amp, size=length)
                mat[j - 1] = row
            matrices[(i, k)] = mat
    return RawDataset(spec.n_gestures, spec.n_sensors, spec.n_executions, matrices)


def _arched_row(length: int, n_extrema: int, rng: np.random.Generator) -> np.ndarray:
    """Clean row with exactly ``n_extrema`` interior extrema at radius 1.

    Executions of the same channel must not be near-copies of each other
    (real sensor recordings never are), so beyond the extrema placement
    the construction jitters anchor magnitudes and applies a strictly
    increasing value map per row.  Both preserve every pairwise
    comparison inside the row, so the extrema count stays exact by
    construction.  (Time-warping the arches was tried too and rejected:
    skewed node spacing makes the downstream cubic resampler overshoot
    at the peaks, which changes counts.)
    """
    positions = _extrema_positions(length, n_extrema, rng)
    rising_first = bool(rng.integers(0, 2))
    # Anchor r sits at sample anchors[r]; magnitudes jitter around 1 and
    # signs alternate, so consecutive anchors always differ.
    anchors = [0, *positions, length - 1]
    signs = np.empty(len(anchors))
    signs[0] = -1.0 if rising_first else 1.0
    for r in range(1, len(anchors)):
        signs[r] = -signs[r - 1]
    values = signs * rng.uniform(0.55, 1.45, size=len(anchors))
    row = np.empty(length)
    row[0] = values[0]
    for r in range(len(anchors) - 1):
        a, b = anchors[r], anchors[r + 1]
        u = np.arange(1, b - a + 1) / (b - a)
        # warp exponent > 0.5 keeps the eased slope zero at both anchors
        warp = rng.uniform(0.6, 1.8)
        ease = 0.5 * (1.0 - np.cos(np.pi * u**warp))
        row[a + 1 : b + 1] = values[r] + (values[r + 1] - values[r]) * ease
    # strictly increasing map (derivative >= 1 - |beta| > 0): diversifies
    # which quantization levels an execution occupies without moving any
    # extremum
    beta = rng.uniform(-0.4, 0.4)
    gamma = rng.uniform(0.5, 2.0)
    return row + (beta / gamma) * np.tanh(gamma * row)


def _extrema_positions(length: int, n_extrema: int, rng: np.random.Generator) -> list[int]:
    """Sorted 0-based interior sample indices for the extrema anchors.

    Keeps a gap of two samples between extrema when the row is long
    enough; otherwise falls back to any distinct interior positions
    (possible whenever length >= n_extrema + 2, which spec validation
    guarantees).
    """
    if n_extrema == 0:
        return []
    if length >= 2 * n_extrema + 2:
        span = length - 2 - 2 * (n_extrema - 1)
        offsets = np.sort(rng.integers(1, span + 1, size=n_extrema))
        return [int(offsets[r] + 2 * r) for r in range(n_extrema)]
    positions = rng.choice(np.arange(1, length - 1), size=n_extrema, replace=False)
    return sorted(int(p) for p in positions)
