"""Command-line orchestration of the dataset, stats and experiment stages.

Commands:
    generate    build a synthetic dataset from a spec JSON
    validate    load a dataset and report its shape
    stats       critical-point tables (per gesture, per sensor, medians)
    experiment  run the AIC sweep harness in mode A or B
    classify    score a symbol sequence against a directory of models

Exit codes: 0 success, 2 config error, 3 data error, 4 compute error.
All reports are CSV with full-precision values, so reruns with the same
config and seed are byte-identical regardless of --jobs.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import critpoints, dataset, hmm, modelselect, preprocess, quantize
from .config import RunConfig
from .errors import (
    AlphabetMismatchError,
    ComputeError,
    ConfigError,
    CphmmError,
    DataError,
    ModelLoadError,
)

MODEL_SUFFIX = ".hmm"


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (ComputeError, CphmmError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cphmm",
        description="Critical-point state-count prediction for discrete HMMs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic dataset")
    p.add_argument("spec", help="synthetic spec JSON file")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="validate a dataset directory")
    p.add_argument("root", help="dataset directory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="critical-point statistics")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", default=None, help="override output_dir")
    p.add_argument("--seed", type=int, default=None, help="override seed")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("experiment", help="run the AIC sweep experiment")
    p.add_argument("--mode", required=True, choices=["A", "B"])
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", default=None, help="override output_dir")
    p.add_argument("--seed", type=int, default=None, help="override seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("classify", help="classify a symbol sequence")
    p.add_argument("models", help=f"directory of *{MODEL_SUFFIX} files")
    p.add_argument("sequence", help="text file of 1-based integer symbols")
    p.set_defaults(func=cmd_classify)

    return parser


def _load_run_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config)
    if args.out is not None:
        cfg.output_dir = args.out
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {args.seed}")
        cfg.seed = args.seed
    if cfg.dataset_root is None:
        raise ConfigError("config needs dataset_root")
    if cfg.output_dir is None:
        raise ConfigError("config needs output_dir (or pass --out)")
    return cfg


# --- commands -------------------------------------------------------------------

def cmd_generate(args) -> int:
    spec = dataset.SyntheticSpec.from_json(args.spec)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {args.seed}")
        spec = dataset.SyntheticSpec(
            n_gestures=spec.n_gestures,
            n_sensors=spec.n_sensors,
            n_executions=spec.n_executions,
            target_extrema=spec.target_extrema,
            length_range=spec.length_range,
            noise_amplitude=spec.noise_amplitude,
            seed=args.seed,
        )
    data = dataset.generate_synthetic(spec)
    dataset.save_dataset(data, args.out, extra_manifest={"synthetic_spec": spec.to_manifest_entry()})
    print(f"wrote dataset with {data.n_gestures} gestures x {data.n_sensors} sensors "
          f"x {data.n_executions} executions to {args.out}")
    return 0


def cmd_validate(args) -> int:
    data = dataset.load_dataset(args.root)
    lengths = sorted(data.length(i, k) for (i, k) in data.matrices)
    print(f"ok: {data.n_gestures} gestures x {data.n_sensors} sensors x "
          f"{data.n_executions} executions, lengths {lengths[0]}..{lengths[-1]}")
    return 0


def cmd_stats(args) -> int:
    cfg = _load_run_config(args)
    data = dataset.load_dataset(cfg.dataset_root)
    cfg.resolved_sensor_ranges(data.n_sensors)  # fail fast on bad ranges
    processed, excluded = preprocess.preprocess_dataset(data, cfg.resample_len)
    totals = {
        key: critpoints.count_critical_points(seq.values, cfg.extrema_radius).total
        for key, seq in sorted(processed.items())
    }

    by_gesture: dict[int, list[int]] = {}
    by_sensor: dict[int, list[int]] = {}
    by_pair: dict[tuple[int, int], list[int]] = {}
    for (i, j, k), total in totals.items():
        by_gesture.setdefault(i, []).append(total)
        by_sensor.setdefault(j, []).append(total)
        by_pair.setdefault((i, j), []).append(total)

    os.makedirs(cfg.output_dir, exist_ok=True)
    _write_csv(
        os.path.join(cfg.output_dir, "cp_by_gesture.csv"),
        ["gesture", "mean_critical_points"],
        [[i, float(np.mean(by_gesture[i]))] for i in sorted(by_gesture)],
    )
    _write_csv(
        os.path.join(cfg.output_dir, "cp_by_sensor.csv"),
        ["sensor", "mean_critical_points"],
        [[j, float(np.mean(by_sensor[j]))] for j in sorted(by_sensor)],
    )
    _write_csv(
        os.path.join(cfg.output_dir, "cp_medians.csv"),
        ["gesture", "sensor", "median_critical_points"],
        [[i, j, critpoints.median_count(by_pair[(i, j)])] for (i, j) in sorted(by_pair)],
    )
    _write_exclusions(cfg.output_dir, excluded)
    print(f"wrote critical-point tables to {cfg.output_dir}"
          + (f" ({len(excluded)} constant rows excluded)" if excluded else ""))
    return 0


def cmd_experiment(args) -> int:
    cfg = _load_run_config(args)
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
    data = dataset.load_dataset(cfg.dataset_root)
    sensor_ranges = cfg.resolved_sensor_ranges(data.n_sensors)

    pairs, tables, excluded, codebooks = build_training_pairs(data, cfg)
    runner = modelselect.experiment_a if args.mode == "A" else modelselect.experiment_b
    result = runner(
        pairs,
        tables,
        sensor_ranges,
        state_range=cfg.state_range,
        train_config=cfg.train,
        base_seed=cfg.seed,
        jobs=args.jobs,
    )

    os.makedirs(cfg.output_dir, exist_ok=True)
    _write_records(os.path.join(cfg.output_dir, "records.csv"), result.records)
    variants = list(cfg.predictor_variants)
    if args.mode == "A":
        _write_csv(
            os.path.join(cfg.output_dir, "aggregate_a.csv"),
            ["sensor_range"] + variants,
            [[row.sensor_range] + [row.positions[v] for v in variants]
             for row in result.aggregates],
        )
        _write_group_means(cfg.output_dir, result.records, variants)
    else:
        _write_csv(
            os.path.join(cfg.output_dir, "aggregate_b.csv"),
            ["sensor_range", "clusters"] + variants,
            [[row.sensor_range, row.n_clusters] + [row.positions[v] for v in variants]
             for row in result.aggregates],
        )
    for c in sorted(codebooks):
        quantize.save_codebook(
            codebooks[c], os.path.join(cfg.output_dir, f"codebook_c{c}.txt")
        )
    _write_exclusions(cfg.output_dir, excluded)
    with open(os.path.join(cfg.output_dir, "run_config.json"), "w") as fh:
        resolved = cfg.to_dict()
        resolved["sensor_ranges"] = [[name, list(b)] for name, b in sensor_ranges]
        resolved["mode"] = args.mode
        json.dump(resolved, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote experiment {args.mode} reports "
          f"({len(result.records)} records) to {cfg.output_dir}")
    return 0


def cmd_classify(args) -> int:
    models = {}
    try:
        names = sorted(os.listdir(args.models))
    except OSError as exc:
        raise ModelLoadError(f"cannot list {args.models}: {exc}") from exc
    for name in names:
        if name.endswith(MODEL_SUFFIX):
            label = name[: -len(MODEL_SUFFIX)]
            models[label] = hmm.load_model(os.path.join(args.models, name))
    if not models:
        raise ModelLoadError(f"no *{MODEL_SUFFIX} files in {args.models}")
    alphabets = {m.n_symbols for m in models.values()}
    if len(alphabets) != 1:
        raise AlphabetMismatchError(
            f"models disagree on alphabet size: {sorted(alphabets)}"
        )
    symbols = _read_symbols(args.sequence)
    for label in sorted(models):
        loglik = hmm.forward_log_likelihood(models[label], symbols)
        print(f"{label}\t{loglik!r}")
    winner = hmm.classify(models, symbols)
    print(f"winner\t{winner}")
    return 0


# --- pipeline -------------------------------------------------------------------

def build_training_pairs(data, cfg: RunConfig):
    """Preprocess, count critical points, quantize per cluster count and
    assemble training pairs.

    (gesture, sensor) slots that lost any execution to a constant row are
    dropped entirely and reported via the exclusion list.
    """
    processed, excluded = preprocess.preprocess_dataset(data, cfg.resample_len)
    dropped = {(i, j) for (i, j, k) in excluded}

    counts: dict[tuple[int, int], list[int]] = {}
    for (i, j, k) in sorted(processed):
        if (i, j) in dropped:
            continue
        total = critpoints.count_critical_points(
            processed[(i, j, k)].values, cfg.extrema_radius
        ).total
        counts.setdefault((i, j), []).append(total)
    if not counts:
        raise DataError("every (gesture, sensor) slot was excluded as constant")

    tables = {
        variant: critpoints.build_predictor_table(counts, variant)
        for variant in cfg.predictor_variants
    }
    medians = {pair: critpoints.median_count(values) for pair, values in counts.items()}

    pooled = np.concatenate([processed[key].values for key in sorted(processed)])
    symbols = {}
    codebooks = {}
    c_lo, c_hi = cfg.cluster_range
    for c in range(c_lo, c_hi + 1):
        codebook = quantize.fit_codebook(pooled, c, seed=cfg.seed)
        codebooks[c] = codebook
        for key in sorted(processed):
            i, j, k = key
            if (i, j) in dropped:
                continue
            symbols[(i, j, k, c)] = quantize.encode(processed[key], codebook)

    pairs = modelselect.build_pairs(symbols, medians)
    return pairs, tables, excluded, codebooks


# --- report writing ---------------------------------------------------------------

def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_records(path: str, records) -> None:
    _write_csv(
        path,
        ["gesture", "sensor", "clusters", "variant", "predicted_states",
         "best_states", "aic_min", "aic_max", "aic_predicted", "position"],
        [[r.gesture, r.sensor, r.n_clusters, r.variant, r.predicted_states,
          r.best_states, r.aic_min, r.aic_max, r.aic_predicted, r.position]
         for r in records],
    )


def _write_group_means(out_dir: str, records, variants: list[str]) -> None:
    """Per-gesture and per-sensor mean positions, one column per variant
    plus the mean over all variants."""
    def rows_for(group_of):
        groups = sorted({group_of(r) for r in records})
        rows = []
        for g in groups:
            subset = [r for r in records if group_of(r) == g]
            cells = [g]
            cells.extend(
                modelselect.mean_position([r for r in subset if r.variant == v])
                for v in variants
            )
            cells.append(modelselect.mean_position(subset))
            rows.append(cells)
        return rows

    header_tail = variants + ["all_variants"]
    _write_csv(
        os.path.join(out_dir, "position_by_gesture.csv"),
        ["gesture"] + header_tail,
        rows_for(lambda r: r.gesture),
    )
    _write_csv(
        os.path.join(out_dir, "position_by_sensor.csv"),
        ["sensor"] + header_tail,
        rows_for(lambda r: r.sensor),
    )


def _write_exclusions(out_dir: str, excluded) -> None:
    _write_csv(
        os.path.join(out_dir, "exclusions.csv"),
        ["gesture", "sensor", "execution"],
        [[i, j, k] for (i, j, k) in excluded],
    )


def _read_symbols(path: str) -> np.ndarray:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read sequence {path}: {exc}") from exc
    tokens = text.replace(",", " ").split()
    if not tokens:
        raise DataError(f"sequence file {path} is empty")
    try:
        return np.array([int(t) for t in tokens])
    except ValueError as exc:
        raise DataError(f"sequence file {path}: {exc}") from exc


if __name__ == "__main__":
    sys.exit(main())
