"""Discrete hidden Markov models: likelihood, training, classification.

The public likelihood routine works in log space (log-sum-exp over
predecessor states), so sequences of any practical length cannot
underflow.  Training uses the standard multi-sequence Baum-Welch
recursions with per-step scaling, batching sequences of equal length so
each step is one small matrix operation.  The probability floor is
enforced by a constrained M-step (water-filling): each row maximizes the
expected complete-data log-likelihood subject to every entry being at
least the floor, which keeps the exact EM monotonicity guarantee while
ruling out hard zeros.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import (
    AlphabetMismatchError,
    ComputeError,
    EmptyInputError,
    EmptyModelSetError,
    EmptyTrainingSetError,
    IoError,
    ModelLoadError,
    ParamError,
    SymbolOutOfRangeError,
)

STOCHASTIC_ATOL = 1e-9


@dataclass(frozen=True)
class Hmm:
    """Model with ``n_states`` hidden states over a 1..n_symbols alphabet."""

    transitions: np.ndarray  # (n_states, n_states), row-stochastic
    initial: np.ndarray      # (n_states,)
    emissions: np.ndarray    # (n_states, n_symbols), row-stochastic

    @property
    def n_states(self) -> int:
        return self.initial.size

    @property
    def n_symbols(self) -> int:
        return self.emissions.shape[1]

    def validate(self) -> None:
        n = self.n_states
        if self.transitions.shape != (n, n) or self.emissions.shape[0] != n:
            raise ParamError(
                f"inconsistent shapes: T{self.transitions.shape} "
                f"b({n},) E{self.emissions.shape}"
            )
        for name, arr in (("transitions", self.transitions),
                          ("initial", self.initial),
                          ("emissions", self.emissions)):
            if np.any(arr < 0):
                raise ParamError(f"{name} has negative entries")
            sums = arr.sum(axis=-1)
            if not np.allclose(sums, 1.0, rtol=0.0, atol=STOCHASTIC_ATOL):
                raise ParamError(f"{name} rows must sum to 1, got {sums}")


@dataclass(frozen=True)
class TrainConfig:
    max_iter: int = 200
    rel_tol: float = 1e-6
    restarts: int = 3
    seed: int = 0
    prob_floor: float = 1e-10

    def validate(self) -> None:
        if self.max_iter < 1:
            raise ParamError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.rel_tol <= 0:
            raise ParamError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.restarts < 1:
            raise ParamError(f"restarts must be >= 1, got {self.restarts}")
        if not 0 <= self.prob_floor < 1e-3:
            raise ParamError(f"prob_floor must be in [0, 1e-3), got {self.prob_floor}")


@dataclass
class TrainReport:
    iterations: int
    loglik_trace: list[float] = field(repr=False)
    converged: bool
    restarts_used: int
    best_restart: int


def init_random(n_states: int, n_symbols: int, seed=0) -> Hmm:
    """Uniform-variate rows normalized per row; deterministic per seed."""
    if n_states < 1:
        raise ParamError(f"n_states must be >= 1, got {n_states}")
    if n_symbols < 2:
        raise ParamError(f"n_symbols must be >= 2, got {n_symbols}")
    rng = np.random.default_rng(seed)
    transitions = rng.random((n_states, n_states))
    transitions /= transitions.sum(axis=1, keepdims=True)
    initial = rng.random(n_states)
    initial /= initial.sum()
    emissions = rng.random((n_states, n_symbols))
    emissions /= emissions.sum(axis=1, keepdims=True)
    return Hmm(transitions=transitions, initial=initial, emissions=emissions)


def _as_indices(symbols, n_symbols: int) -> np.ndarray:
    """Validate a 1-based symbol sequence and convert to 0-based indices."""
    arr = np.asarray(getattr(symbols, "symbols", symbols))
    if arr.ndim != 1:
        raise ParamError(f"symbol sequence must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyInputError("empty symbol sequence")
    if not np.issubdtype(arr.dtype, np.integer):
        as_int = arr.astype(int)
        if np.any(as_int != arr):
            raise SymbolOutOfRangeError("symbols must be integers")
        arr = as_int
    if arr.min() < 1 or arr.max() > n_symbols:
        raise SymbolOutOfRangeError(
            f"symbols must lie in 1..{n_symbols}, "
            f"got range [{arr.min()}, {arr.max()}]"
        )
    return arr - 1


def forward_log_likelihood(model: Hmm, symbols) -> float:
    """log p(sequence | model) in nats; -inf when the model forbids it."""
    obs = _as_indices(symbols, model.n_symbols)
    with np.errstate(divide="ignore"):
        log_t = np.log(model.transitions)
        log_e = np.log(model.emissions)
        log_alpha = np.log(model.initial) + log_e[:, obs[0]]
    for t in range(1, obs.size):
        log_alpha = logsumexp(log_alpha[:, None] + log_t, axis=0) + log_e[:, obs[t]]
    return float(logsumexp(log_alpha))


# --- training -----------------------------------------------------------------

def baum_welch(sequences, n_states: int, n_symbols: int,
               config: TrainConfig | None = None) -> tuple[Hmm, TrainReport]:
    """Fit a model to a set of symbol sequences by expectation-maximization.

    Runs ``config.restarts`` independent initializations and keeps the
    model with the highest total log-likelihood.  The returned report
    describes the winning restart; its log-likelihood trace is
    non-decreasing.
    """
    cfg = config or TrainConfig()
    cfg.validate()
    if n_states < 1:
        raise ParamError(f"n_states must be >= 1, got {n_states}")
    if n_symbols < 2:
        raise ParamError(f"n_symbols must be >= 2, got {n_symbols}")
    if cfg.prob_floor * max(n_states, n_symbols) >= 0.5:
        raise ParamError(
            f"prob_floor {cfg.prob_floor} too large for "
            f"{max(n_states, n_symbols)}-wide rows"
        )
    arrays = [_as_indices(s, n_symbols) for s in sequences]
    if not arrays:
        raise EmptyTrainingSetError("no training sequences")
    groups = _group_by_length(arrays)

    best = None
    for restart in range(cfg.restarts):
        model = init_random(n_states, n_symbols, seed=[cfg.seed, restart])
        model = _apply_floor(model, cfg.prob_floor)
        trace: list[float] = []
        converged = False
        for _ in range(cfg.max_iter):
            stats, loglik = _estep(model, groups)
            trace.append(loglik)
            model = _mstep(stats, cfg.prob_floor)
            if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= cfg.rel_tol * abs(trace[-2]):
                converged = True
                break
        final_loglik = _total_loglik(model, groups)
        if best is None or final_loglik > best[0]:
            best = (final_loglik, restart, model, trace, converged)

    _, best_restart, model, trace, converged = best
    report = TrainReport(
        iterations=len(trace),
        loglik_trace=trace,
        converged=converged,
        restarts_used=cfg.restarts,
        best_restart=best_restart,
    )
    return model, report


def _group_by_length(arrays: list[np.ndarray]) -> list[np.ndarray]:
    """Stack equal-length sequences into (count, length) batches."""
    by_len: dict[int, list[np.ndarray]] = {}
    for arr in arrays:
        by_len.setdefault(arr.size, []).append(arr)
    return [np.vstack(group) for _, group in sorted(by_len.items())]


def _estep(model: Hmm, groups: list[np.ndarray]):
    """Accumulate expected counts over all sequences; returns total loglik."""
    n = model.n_states
    k = model.n_symbols
    trans_num = np.zeros((n, n))
    emis_num = np.zeros((n, k))
    init_num = np.zeros(n)
    total_loglik = 0.0
    total_seqs = 0
    trans = model.transitions
    for obs in groups:
        count, length = obs.shape
        em = model.emissions.T[obs]  # (count, length, n)
        alpha = np.empty((count, length, n))
        scale = np.empty((count, length))
        a = model.initial[None, :] * em[:, 0]
        _scale_step(a, alpha, scale, 0)
        for t in range(1, length):
            a = (alpha[:, t - 1] @ trans) * em[:, t]
            _scale_step(a, alpha, scale, t)
        total_loglik += float(np.log(scale).sum())
        total_seqs += count

        beta = np.empty((count, length, n))
        beta[:, length - 1] = 1.0
        for t in range(length - 2, -1, -1):
            beta[:, t] = ((beta[:, t + 1] * em[:, t + 1]) @ trans.T) / scale[:, t + 1][:, None]

        gamma = alpha * beta
        init_num += gamma[:, 0].sum(axis=0)
        if length > 1:
            weighted = em[:, 1:] * beta[:, 1:] / scale[:, 1:, None]
            trans_num += trans * np.einsum("rti,rtj->ij", alpha[:, :-1], weighted)
        for symbol in range(k):
            mask = obs == symbol
            if mask.any():
                emis_num[:, symbol] += gamma[mask].sum(axis=0)
    return (init_num, trans_num, emis_num, total_seqs), total_loglik


def _scale_step(a: np.ndarray, alpha: np.ndarray, scale: np.ndarray, t: int) -> None:
    s = a.sum(axis=1)
    if np.any(s <= 0.0):
        raise ComputeError("zero-probability sequence during training")
    alpha[:, t] = a / s[:, None]
    scale[:, t] = s


def _total_loglik(model: Hmm, groups: list[np.ndarray]) -> float:
    total = 0.0
    trans = model.transitions
    for obs in groups:
        count, length = obs.shape
        em = model.emissions.T[obs]
        a = model.initial[None, :] * em[:, 0]
        s = a.sum(axis=1)
        if np.any(s <= 0.0):
            raise ComputeError("zero-probability sequence")
        loglik = np.log(s)
        a /= s[:, None]
        for t in range(1, length):
            a = (a @ trans) * em[:, t]
            s = a.sum(axis=1)
            if np.any(s <= 0.0):
                raise ComputeError("zero-probability sequence")
            loglik += np.log(s)
            a /= s[:, None]
        total += float(loglik.sum())
    return total


def _mstep(stats, floor: float) -> Hmm:
    init_num, trans_num, emis_num, total_seqs = stats
    return Hmm(
        transitions=_floor_rows(trans_num, floor),
        initial=_floor_rows(init_num[None, :] / total_seqs, floor)[0],
        emissions=_floor_rows(emis_num, floor),
    )


def _floor_rows(counts: np.ndarray, floor: float) -> np.ndarray:
    """Row-wise maximizer of sum(c * log p) subject to p >= floor, sum p = 1.

    Water-filling: entries whose unconstrained share falls below the
    floor are pinned there and the rest renormalized; repeats until
    stable.  Rows with no mass become uniform.
    """
    out = np.empty_like(counts, dtype=float)
    width = counts.shape[1]
    for i, row in enumerate(counts):
        total = row.sum()
        if total <= 0.0:
            out[i] = 1.0 / width
            continue
        pinned = np.zeros(width, dtype=bool)
        for _ in range(width):
            free_mass = 1.0 - floor * pinned.sum()
            p = np.where(pinned, floor, row * (free_mass / row[~pinned].sum()))
            newly = (p < floor) & ~pinned
            if not newly.any():
                out[i] = p
                break
            pinned |= newly
        else:
            out[i] = np.full(width, 1.0 / width)
    return out


def _apply_floor(model: Hmm, floor: float) -> Hmm:
    if floor <= 0.0:
        return model
    return Hmm(
        transitions=_floor_rows(model.transitions, floor),
        initial=_floor_rows(model.initial[None, :], floor)[0],
        emissions=_floor_rows(model.emissions, floor),
    )


# --- classification and sampling ------------------------------------------------

def classify(models, symbols):
    """Label of the model with the highest log-likelihood for the sequence.

    Ties go to the lowest label in sort order.
    """
    if not models:
        raise EmptyModelSetError("no models to classify against")
    alphabets = {m.n_symbols for m in models.values()}
    if len(alphabets) != 1:
        raise AlphabetMismatchError(f"models disagree on alphabet size: {sorted(alphabets)}")
    best_label = None
    best_loglik = -np.inf
    for label in sorted(models):
        loglik = forward_log_likelihood(models[label], symbols)
        if best_label is None or loglik > best_loglik:
            best_label = label
            best_loglik = loglik
    return best_label


def sample_sequences(model: Hmm, n_sequences: int, length: int, seed=0) -> np.ndarray:
    """Draw (n_sequences, length) symbol sequences (1-based) from the model."""
    if n_sequences < 1 or length < 1:
        raise ParamError("n_sequences and length must be >= 1")
    rng = np.random.default_rng(seed)
    cum_init = np.cumsum(model.initial)
    cum_trans = np.cumsum(model.transitions, axis=1)
    cum_emis = np.cumsum(model.emissions, axis=1)
    # pick the first state whose cumulative mass exceeds the draw
    states = (cum_init[None, :] > rng.random(n_sequences)[:, None]).argmax(axis=1)
    out = np.empty((n_sequences, length), dtype=int)
    for t in range(length):
        if t > 0:
            draws = rng.random(n_sequences)
            states = (cum_trans[states] > draws[:, None]).argmax(axis=1)
        draws = rng.random(n_sequences)
        out[:, t] = (cum_emis[states] > draws[:, None]).argmax(axis=1)
    return out + 1


# --- serialization --------------------------------------------------------------

def save_model(model: Hmm, path: str) -> None:
    """Text format: header "n k", then the initial vector, then the
    transition rows, then the emission rows, full precision."""
    lines = [f"{model.n_states} {model.n_symbols}"]
    lines.append(" ".join(repr(float(v)) for v in model.initial))
    for row in model.transitions:
        lines.append(" ".join(repr(float(v)) for v in row))
    for row in model.emissions:
        lines.append(" ".join(repr(float(v)) for v in row))
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write model {path}: {exc}") from exc


def load_model(path: str) -> Hmm:
    try:
        with open(path) as fh:
            lines = [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read model {path}: {exc}") from exc
    try:
        n_states, n_symbols = (int(v) for v in lines[0].split())
        rows = [np.array([float(v) for v in line.split()]) for line in lines[1:]]
        if len(rows) != 1 + 2 * n_states:
            raise ValueError(f"expected {1 + 2 * n_states} rows, got {len(rows)}")
        model = Hmm(
            transitions=np.vstack(rows[1 : 1 + n_states]),
            initial=rows[0],
            emissions=np.vstack(rows[1 + n_states :]),
        )
        if model.emissions.shape != (n_states, n_symbols):
            raise ValueError(f"emission shape {model.emissions.shape}")
        model.validate()
    except (ValueError, IndexError, ParamError) as exc:
        raise ModelLoadError(f"malformed model file {path}: {exc}") from exc
    return model
