"""Critical-point based state-count prediction for discrete HMMs.

The package covers the full pipeline: loading or generating sensor
corpora, resampling and normalizing rows, counting window-based local
extrema, quantizing values into symbol alphabets, training discrete
HMMs, and scoring how well the critical-point predictor places the
state count within an AIC sweep.
"""

from .config import RunConfig
from .critpoints import (
    CriticalPointCount,
    PredictorTable,
    build_predictor_table,
    count_critical_points,
    find_extrema,
    median_count,
)
from .dataset import (
    RawDataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    save_dataset,
)
from .errors import CphmmError
from .hmm import (
    Hmm,
    TrainConfig,
    TrainReport,
    baum_welch,
    classify,
    forward_log_likelihood,
    init_random,
    load_model,
    sample_sequences,
    save_model,
)
from .modelselect import (
    ExperimentResult,
    PositionRecord,
    SweepResult,
    TrainingPair,
    aic,
    aic_position,
    build_pairs,
    experiment_a,
    experiment_b,
    mean_position,
    sweep_states,
)
from .preprocess import ProcessedSequence, normalize, preprocess_dataset, resample
from .quantize import Codebook, SymbolSequence, encode, encode_values, fit_codebook

__version__ = "0.1.0"

__all__ = [
    "CphmmError",
    "Codebook",
    "CriticalPointCount",
    "ExperimentResult",
    "Hmm",
    "PositionRecord",
    "PredictorTable",
    "ProcessedSequence",
    "RawDataset",
    "RunConfig",
    "SweepResult",
    "SymbolSequence",
    "SyntheticSpec",
    "TrainConfig",
    "TrainingPair",
    "TrainReport",
    "aic",
    "aic_position",
    "baum_welch",
    "build_pairs",
    "build_predictor_table",
    "classify",
    "count_critical_points",
    "encode",
    "encode_values",
    "experiment_a",
    "experiment_b",
    "find_extrema",
    "fit_codebook",
    "forward_log_likelihood",
    "generate_synthetic",
    "init_random",
    "load_dataset",
    "load_model",
    "mean_position",
    "median_count",
    "normalize",
    "preprocess_dataset",
    "resample",
    "sample_sequences",
    "save_dataset",
    "save_model",
    "sweep_states",
]
