"""State-count sweeps scored by AIC, and the predictor positioning measure.

For every (gesture, sensor, cluster-count) training pair the harness
trains one model per candidate state count, scores each with
``AIC = -2 * total_log_likelihood + 2 * n_states**2`` (the penalty is the
transition-matrix size), and records where a predictor's AIC falls
between the sweep's minimum and maximum:

    position = (aic_predicted - aic_min) / (aic_max - aic_min)

so 0 means the predictor matched the best state count and 1 the worst.
Experiment A averages the position over one pooled grid; experiment B
averages per cluster count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .critpoints import PredictorTable
from .errors import (
    CphmmError,
    EmptyInputError,
    IncompleteGridError,
    NonFiniteError,
    ParamError,
)
from .hmm import TrainConfig, baum_welch, forward_log_likelihood
from .quantize import SymbolSequence

DEFAULT_STATE_RANGE = (2, 16)


@dataclass(frozen=True)
class TrainingPair:
    """All executions of one (gesture, sensor) at one cluster count,
    plus the median critical-point count they share."""

    gesture: int
    sensor: int
    n_clusters: int
    sequences: tuple[SymbolSequence, ...] = field(repr=False)
    cp_median: int

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.gesture, self.sensor, self.n_clusters)


@dataclass(frozen=True)
class SweepResult:
    gesture: int
    sensor: int
    n_clusters: int
    aic_by_n: dict[int, float]
    aic_min: float
    aic_max: float
    argmin_n: int

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.gesture, self.sensor, self.n_clusters)

    @property
    def state_range(self) -> tuple[int, int]:
        return (min(self.aic_by_n), max(self.aic_by_n))


@dataclass(frozen=True)
class PositionRecord:
    gesture: int
    sensor: int
    n_clusters: int
    variant: str
    predicted_states: int
    best_states: int
    aic_min: float
    aic_max: float
    aic_predicted: float
    position: float


@dataclass(frozen=True)
class AggregateRow:
    sensor_range: str
    positions: dict[str, float]
    n_clusters: int | None = None


@dataclass
class ExperimentResult:
    records: list[PositionRecord]
    aggregates: list[AggregateRow]
    sweeps: dict[tuple[int, int, int], SweepResult] = field(repr=False)


def derive_seed(*parts: int) -> int:
    """Stable, platform-independent seed from non-negative integer parts."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])


def build_pairs(
    symbols: dict[tuple[int, int, int, int], SymbolSequence],
    medians: dict[tuple[int, int], int],
) -> list[TrainingPair]:
    """Group discretized executions into per-(gesture, sensor, clusters) pairs.

    The grid is the product of the median table's (gesture, sensor) keys
    with every execution and cluster count present in ``symbols``; any
    hole raises IncompleteGridError.
    """
    if not symbols or not medians:
        raise EmptyInputError("no symbol sequences or no medians")
    executions = sorted({key[2] for key in symbols})
    cluster_counts = sorted({key[3] for key in symbols})
    missing = []
    pairs = []
    for (gesture, sensor) in sorted(medians):
        for c in cluster_counts:
            seqs = []
            for k in executions:
                seq = symbols.get((gesture, sensor, k, c))
                if seq is None:
                    missing.append((gesture, sensor, k, c))
                else:
                    seqs.append(seq)
            pairs.append(
                TrainingPair(
                    gesture=gesture,
                    sensor=sensor,
                    n_clusters=c,
                    sequences=tuple(seqs),
                    cp_median=int(medians[(gesture, sensor)]),
                )
            )
    if missing:
        raise IncompleteGridError(
            f"{len(missing)} missing grid entries, first: {missing[:5]}"
        )
    return pairs


def aic(sum_loglik: float, n_states: int) -> float:
    """-2 * log-likelihood + 2 * n_states**2; -inf maps to +inf."""
    if n_states < 1:
        raise ParamError(f"n_states must be >= 1, got {n_states}")
    if math.isnan(sum_loglik) or sum_loglik == math.inf:
        raise NonFiniteError(f"log-likelihood must be finite or -inf, got {sum_loglik}")
    if sum_loglik == -math.inf:
        return math.inf
    return -2.0 * sum_loglik + 2.0 * float(n_states) ** 2


def sweep_states(
    pair: TrainingPair,
    state_range: tuple[int, int],
    train_config: TrainConfig | None = None,
    base_seed: int = 0,
) -> SweepResult:
    """Train one model per state count and score each with AIC.

    A state count whose training fails is recorded as +inf rather than
    aborting the sweep.  Each (pair, n) training gets its own seed
    derived from the identifiers, so results do not depend on execution
    order.
    """
    lo, hi = state_range
    if lo < 1 or hi < lo:
        raise ParamError(f"invalid state range [{lo}, {hi}]")
    cfg = train_config or TrainConfig()
    aic_by_n = {}
    for n in range(lo, hi + 1):
        seed = derive_seed(base_seed, pair.gesture, pair.sensor, pair.n_clusters, n)
        run_cfg = TrainConfig(
            max_iter=cfg.max_iter,
            rel_tol=cfg.rel_tol,
            restarts=cfg.restarts,
            seed=seed,
            prob_floor=cfg.prob_floor,
        )
        try:
            model, _ = baum_welch(pair.sequences, n, pair.n_clusters, run_cfg)
            total = sum(forward_log_likelihood(model, s) for s in pair.sequences)
            aic_by_n[n] = aic(total, n)
        except CphmmError:
            aic_by_n[n] = math.inf
    aic_min = min(aic_by_n.values())
    aic_max = max(aic_by_n.values())
    argmin_n = next(n for n in range(lo, hi + 1) if aic_by_n[n] == aic_min)
    return SweepResult(
        gesture=pair.gesture,
        sensor=pair.sensor,
        n_clusters=pair.n_clusters,
        aic_by_n=aic_by_n,
        aic_min=aic_min,
        aic_max=aic_max,
        argmin_n=argmin_n,
    )


def clamp_states(n: int, state_range: tuple[int, int]) -> int:
    return min(max(n, state_range[0]), state_range[1])


def aic_position(sweep: SweepResult, predicted_n: int) -> float:
    """Normalized position of the predictor's AIC in the sweep's range.

    Out-of-range predictors evaluate at the nearest bound.  When every
    state count ties, every predictor is optimal and the position is 0.
    """
    clamped = clamp_states(predicted_n, sweep.state_range)
    value = sweep.aic_by_n[clamped]
    if sweep.aic_max == sweep.aic_min:
        return 0.0
    if value == sweep.aic_max:
        return 1.0
    return float((value - sweep.aic_min) / (sweep.aic_max - sweep.aic_min))


def mean_position(records) -> float:
    """Arithmetic mean of the position over all provided records."""
    values = [r.position for r in records]
    if not values:
        raise EmptyInputError("no records to aggregate")
    return float(np.mean(values))


# --- experiments ---------------------------------------------------------------

def _sweep_job(args):
    pair, state_range, train_config, base_seed = args
    return pair.key, sweep_states(pair, state_range, train_config, base_seed)


def run_sweeps(
    pairs,
    state_range: tuple[int, int],
    train_config: TrainConfig | None = None,
    base_seed: int = 0,
    jobs: int = 1,
) -> dict[tuple[int, int, int], SweepResult]:
    """Sweep every pair; results are keyed and ordered by (gesture, sensor,
    clusters) regardless of worker scheduling."""
    ordered = sorted(pairs, key=lambda p: p.key)
    args = [(p, state_range, train_config, base_seed) for p in ordered]
    if jobs <= 1:
        done = [_sweep_job(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_sweep_job, args))
    return dict(done)


def _position_records(
    sweeps: dict[tuple[int, int, int], SweepResult],
    predictor_tables: dict[str, PredictorTable],
    state_range: tuple[int, int],
) -> list[PositionRecord]:
    records = []
    for key in sorted(sweeps):
        sweep = sweeps[key]
        for variant, table in predictor_tables.items():
            predicted = clamp_states(
                table.values[(sweep.gesture, sweep.sensor)], state_range
            )
            records.append(
                PositionRecord(
                    gesture=sweep.gesture,
                    sensor=sweep.sensor,
                    n_clusters=sweep.n_clusters,
                    variant=variant,
                    predicted_states=predicted,
                    best_states=sweep.argmin_n,
                    aic_min=sweep.aic_min,
                    aic_max=sweep.aic_max,
                    aic_predicted=sweep.aic_by_n[predicted],
                    position=aic_position(sweep, predicted),
                )
            )
    return records


def _range_filter(records, sensor_range: tuple[int, int]):
    lo, hi = sensor_range
    return [r for r in records if lo <= r.sensor <= hi]


def experiment_a(
    pairs,
    predictor_tables: dict[str, PredictorTable],
    sensor_ranges: list[tuple[str, tuple[int, int]]],
    state_range: tuple[int, int] = DEFAULT_STATE_RANGE,
    train_config: TrainConfig | None = None,
    base_seed: int = 0,
    jobs: int = 1,
) -> ExperimentResult:
    """Pool all cluster counts into one grid and average per
    (predictor variant, sensor range)."""
    sweeps = run_sweeps(pairs, state_range, train_config, base_seed, jobs)
    records = _position_records(sweeps, predictor_tables, state_range)
    aggregates = []
    for range_name, bounds in sensor_ranges:
        in_range = _range_filter(records, bounds)
        positions = {
            variant: mean_position([r for r in in_range if r.variant == variant])
            for variant in predictor_tables
        }
        aggregates.append(AggregateRow(sensor_range=range_name, positions=positions))
    return ExperimentResult(records=records, aggregates=aggregates, sweeps=sweeps)


def experiment_b(
    pairs,
    predictor_tables: dict[str, PredictorTable],
    sensor_ranges: list[tuple[str, tuple[int, int]]],
    state_range: tuple[int, int] = DEFAULT_STATE_RANGE,
    train_config: TrainConfig | None = None,
    base_seed: int = 0,
    jobs: int = 1,
) -> ExperimentResult:
    """Same sweeps as experiment A but averaged separately per cluster
    count, to see whether the predictor's quality depends on it."""
    sweeps = run_sweeps(pairs, state_range, train_config, base_seed, jobs)
    records = _position_records(sweeps, predictor_tables, state_range)
    cluster_counts = sorted({r.n_clusters for r in records})
    aggregates = []
    for c in cluster_counts:
        for range_name, bounds in sensor_ranges:
            subset = [r for r in _range_filter(records, bounds) if r.n_clusters == c]
            positions = {
                variant: mean_position([r for r in subset if r.variant == variant])
                for variant in predictor_tables
            }
            aggregates.append(
                AggregateRow(sensor_range=range_name, positions=positions, n_clusters=c)
            )
    return ExperimentResult(records=records, aggregates=aggregates, sweeps=sweeps)
