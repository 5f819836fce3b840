"""Run configuration: one JSON document with defaults for every knob.

Schema (all keys optional unless a command needs them):

    {
      "dataset_root": "path/to/dataset",
      "output_dir": "path/to/reports",
      "resample_len": 64,
      "extrema_radius": 1,
      "cluster_range": [4, 11],
      "state_range": [2, 16],
      "predictor_variants": ["all_points", "no_boundaries", "trends"],
      "sensor_ranges": [["all_sensors", [1, 10]], ["fingers_only", [1, 5]]],
      "train": {"max_iter": 200, "rel_tol": 1e-6, "restarts": 3,
                "prob_floor": 1e-10},
      "seed": 0
    }

``sensor_ranges`` entries are (name, [first, last]) with 1-based
inclusive sensor indices; when omitted they default to the dataset's
full range plus its first five sensors.
"""

import json
from dataclasses import dataclass, field

from .critpoints import PREDICTOR_OFFSETS
from .errors import ConfigError, IoError
from .hmm import TrainConfig

DEFAULT_VARIANTS = ("all_points", "no_boundaries", "trends")


@dataclass
class RunConfig:
    dataset_root: str | None = None
    output_dir: str | None = None
    resample_len: int = 64
    extrema_radius: int = 1
    cluster_range: tuple[int, int] = (4, 11)
    state_range: tuple[int, int] = (2, 16)
    predictor_variants: tuple[str, ...] = DEFAULT_VARIANTS
    sensor_ranges: list[tuple[str, tuple[int, int]]] | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        return cls.from_dict(raw, source=path)

    @classmethod
    def from_dict(cls, raw: dict, source: str = "<dict>") -> "RunConfig":
        known = {
            "dataset_root", "output_dir", "resample_len", "extrema_radius",
            "cluster_range", "state_range", "predictor_variants",
            "sensor_ranges", "train", "seed",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{source}: unknown config keys {sorted(unknown)}")
        cfg = cls()
        try:
            if "dataset_root" in raw:
                cfg.dataset_root = str(raw["dataset_root"])
            if "output_dir" in raw:
                cfg.output_dir = str(raw["output_dir"])
            if "resample_len" in raw:
                cfg.resample_len = int(raw["resample_len"])
            if "extrema_radius" in raw:
                cfg.extrema_radius = int(raw["extrema_radius"])
            if "cluster_range" in raw:
                lo, hi = raw["cluster_range"]
                cfg.cluster_range = (int(lo), int(hi))
            if "state_range" in raw:
                lo, hi = raw["state_range"]
                cfg.state_range = (int(lo), int(hi))
            if "predictor_variants" in raw:
                cfg.predictor_variants = tuple(str(v) for v in raw["predictor_variants"])
            if "sensor_ranges" in raw:
                cfg.sensor_ranges = [
                    (str(name), (int(bounds[0]), int(bounds[1])))
                    for name, bounds in raw["sensor_ranges"]
                ]
            if "train" in raw:
                allowed = {"max_iter", "rel_tol", "restarts", "prob_floor"}
                extra = set(raw["train"]) - allowed
                if extra:
                    raise ConfigError(f"{source}: unknown train keys {sorted(extra)}")
                cfg.train = TrainConfig(**raw["train"])
            if "seed" in raw:
                cfg.seed = int(raw["seed"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.resample_len < 4:
            raise ConfigError(f"resample_len must be >= 4, got {self.resample_len}")
        if self.extrema_radius < 1:
            raise ConfigError(f"extrema_radius must be >= 1, got {self.extrema_radius}")
        c_lo, c_hi = self.cluster_range
        if c_lo < 2:
            raise ConfigError(f"cluster_range lower bound must be >= 2, got {c_lo}")
        if c_hi < c_lo:
            raise ConfigError(f"cluster_range upper bound {c_hi} < lower bound {c_lo}")
        s_lo, s_hi = self.state_range
        if s_lo < 1:
            raise ConfigError(f"state_range lower bound must be >= 1, got {s_lo}")
        if s_hi < s_lo:
            raise ConfigError(f"state_range upper bound {s_hi} < lower bound {s_lo}")
        if not self.predictor_variants:
            raise ConfigError("predictor_variants must not be empty")
        bad = [v for v in self.predictor_variants if v not in PREDICTOR_OFFSETS]
        if bad:
            raise ConfigError(
                f"unknown predictor_variants {bad}; "
                f"expected from {sorted(PREDICTOR_OFFSETS)}"
            )
        if len(set(self.predictor_variants)) != len(self.predictor_variants):
            raise ConfigError("predictor_variants contains duplicates")
        if self.sensor_ranges is not None:
            if not self.sensor_ranges:
                raise ConfigError("sensor_ranges must not be empty")
            names = [name for name, _ in self.sensor_ranges]
            if len(set(names)) != len(names):
                raise ConfigError("sensor_ranges names must be unique")
            for name, (lo, hi) in self.sensor_ranges:
                if lo < 1 or hi < lo:
                    raise ConfigError(f"sensor range {name!r}: invalid bounds [{lo}, {hi}]")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        try:
            self.train.validate()
        except Exception as exc:
            raise ConfigError(f"train: {exc}") from exc

    def resolved_sensor_ranges(self, n_sensors: int) -> list[tuple[str, tuple[int, int]]]:
        """Default ranges follow the dataset; explicit ones must fit it."""
        if self.sensor_ranges is None:
            ranges = [("all_sensors", (1, n_sensors))]
            if n_sensors > 1:
                ranges.append(("fingers_only", (1, min(5, n_sensors))))
            return ranges
        for name, (lo, hi) in self.sensor_ranges:
            if hi > n_sensors:
                raise ConfigError(
                    f"sensor range {name!r} ends at {hi} but the dataset "
                    f"has {n_sensors} sensors"
                )
        return list(self.sensor_ranges)

    def to_dict(self) -> dict:
        return {
            "dataset_root": self.dataset_root,
            "output_dir": self.output_dir,
            "resample_len": self.resample_len,
            "extrema_radius": self.extrema_radius,
            "cluster_range": list(self.cluster_range),
            "state_range": list(self.state_range),
            "predictor_variants": list(self.predictor_variants),
            "sensor_ranges": None if self.sensor_ranges is None else [
                [name, list(bounds)] for name, bounds in self.sensor_ranges
            ],
            "train": {
                "max_iter": self.train.max_iter,
                "rel_tol": self.train.rel_tol,
                "restarts": self.train.restarts,
                "prob_floor": self.train.prob_floor,
            },
            "seed": self.seed,
        }
