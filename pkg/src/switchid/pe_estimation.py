"""Asymptotically persistently exciting inputs and correlation-based estimation.

An iid input -- modes drawn from a fixed positive law, continuous inputs
zero-mean Gaussian with covariance R -- excites every mode pattern with
positive frequency while successive inputs stay uncorrelated.  Along such an
input the Markov parameters of any l1-stable map are recovered from time
averages: conditioning the cross-correlation of outputs with past inputs on
the mode pattern r v q isolates C_q A_v B_r R pi, so dividing by R and by the
pattern frequency gives a consistent estimate.

Everything here is deterministic given the seed: generation uses a seeded
Generator, and all sums run in fixed (time) order.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .hankel import build_hankel
from .lss import HybridWord, SwitchedLinearSystem, matrix_product_along_word, simulate
from .lss import check_l1_stability_sufficient
from .markov import MarkovSource, TabulatedMarkovSource
from .realization import RealizationResult, realize
from .words import ModeWord, as_mode_word, words_up_to


class ConfigError(ValueError):
    """Invalid signal configuration (covariance, probabilities, horizon)."""


class ZeroSampleError(ValueError):
    """The word is longer than the available data."""


class NotIdentifiableError(RuntimeError):
    """A required mode pattern has zero frequency in the data."""


@dataclass(frozen=True)
class PeSignalConfig:
    """Generator settings for a persistently exciting input signal.

    ``R`` is the input covariance (symmetric positive definite, m x m);
    modes are iid uniform over 1..D unless ``mode_probs`` is given.
    """

    D: int
    m: int
    R: np.ndarray
    N: int
    seed: int
    mode_probs: np.ndarray | None = None

    def __post_init__(self):
        if self.D < 1 or self.m < 1:
            raise ConfigError("D and m must be positive")
        if self.N < 0:
            raise ConfigError("horizon N must be nonnegative")
        R = np.asarray(self.R, dtype=float).reshape(self.m, self.m)
        if not np.allclose(R, R.T, atol=1e-12):
            raise ConfigError("input covariance R must be symmetric")
        if np.linalg.eigvalsh(R)[0] <= 0:
            raise ConfigError("input covariance R must be positive definite")
        object.__setattr__(self, "R", R)
        if self.mode_probs is not None:
            probs = np.asarray(self.mode_probs, dtype=float).reshape(self.D)
            if np.any(probs <= 0):
                raise ConfigError("mode probabilities must be strictly positive")
            if abs(probs.sum() - 1.0) > 1e-9:
                raise ConfigError("mode probabilities must sum to 1")
            object.__setattr__(self, "mode_probs", probs)

    @property
    def probabilities(self) -> np.ndarray:
        if self.mode_probs is None:
            return np.full(self.D, 1.0 / self.D)
        return self.mode_probs

    def word_probability(self, v: Sequence[int]) -> float:
        """Probability that the iid switching law spells ``v``."""
        probs = self.probabilities
        out = 1.0
        for q in as_mode_word(v, self.D):
            out *= probs[q - 1]
        return out


def generate_pe_input(cfg: PeSignalConfig) -> HybridWord:
    """Draw a length-N hybrid word from the configured laws, seeded.

    Modes first, then inputs, from one Generator: rerunning with the same
    config reproduces the word bit for bit.
    """
    rng = np.random.default_rng(cfg.seed)
    modes = rng.choice(np.arange(1, cfg.D + 1), size=cfg.N, p=cfg.probabilities)
    L = np.linalg.cholesky(cfg.R)
    inputs = rng.standard_normal((cfg.N, cfg.m)) @ L.T
    return HybridWord(modes, inputs)


def match_starts(modes: np.ndarray, pattern: Sequence[int]) -> np.ndarray:
    """Boolean mask over start positions t where modes[t:t+len] spells pattern."""
    pattern = tuple(int(q) for q in pattern)
    N, ell = modes.shape[0], len(pattern)
    if ell == 0:
        raise ValueError("pattern must be non-empty")
    if ell > N:
        return np.zeros(0, dtype=bool)
    mask = np.ones(N - ell + 1, dtype=bool)
    for k, qk in enumerate(pattern):
        mask &= modes[k : N - ell + 1 + k] == qk
    return mask


def empirical_mode_freq(w: HybridWord, v: Sequence[int]) -> float:
    """Fraction of start positions at which the mode pattern ``v`` occurs."""
    v = as_mode_word(v)
    if len(v) < 1:
        raise ValueError("pattern must be non-empty")
    N = len(w)
    if len(v) > N:
        raise ZeroSampleError(f"pattern of length {len(v)} in a word of length {N}")
    mask = match_starts(w.modes, v)
    return float(mask.sum()) / (N - len(v) + 1)


@dataclass(frozen=True)
class PeWordRecord:
    """Per-pattern diagnostics of the excitation conditions."""

    v: ModeWord
    pi_hat: float
    cross_residual: float   # worst lagged input correlation on this pattern
    covariance_residual: float  # conditional covariance vs the common estimate


@dataclass(frozen=True)
class PeCheckReport:
    horizon: int
    max_word_len: int
    max_lag: int
    tol: float
    input_covariance: np.ndarray  # the common R estimate
    max_cross_residual: float
    min_mode_freq: float
    covariance_spread: float
    records: tuple[PeWordRecord, ...]
    passed: bool


def check_pe_conditions(w: HybridWord, max_word_len: int = 3, max_lag: int = 5,
                        tol: float = 0.05, D: int | None = None) -> PeCheckReport:
    """Evaluate the finite-horizon excitation sums of an input word.

    For every mode pattern up to ``max_word_len`` over the alphabet 1..D
    (default: the largest mode present) and every lag up to ``max_lag`` this
    forms the pattern-conditioned lagged input correlations (which must
    vanish) and the pattern-conditioned input covariance (which must equal
    pi_v R).  The forward and backward lagged sums are exact transposes over
    the same index set, so one residual covers both.  Passing requires all
    lagged residuals below ``tol`` and every pattern frequency strictly
    positive.
    """
    N = len(w)
    if N == 0:
        raise ZeroSampleError("empty input word")
    modes, u = w.modes, w.inputs
    R_common = u.T @ u / N
    records = []
    if D is None:
        D = int(modes.max())
    for v in words_up_to(max_word_len, D):
        if len(v) == 0:
            continue
        ell = len(v)
        mask = match_starts(modes, v)
        count = int(mask.sum())
        pi_hat = count / (N - ell + 1) if N >= ell else 0.0
        sel = np.nonzero(mask)[0]
        if count:
            cond_cov = u[sel].T @ u[sel] / count
            cov_resid = float(np.max(np.abs(cond_cov - R_common)))
        else:
            cov_resid = float(np.max(np.abs(R_common)))
        worst = 0.0
        for j in range(1, max_lag + 1):
            ok = sel[sel + j <= N - 1]
            cross = u[ok + j].T @ u[ok] / N
            worst = max(worst, float(np.max(np.abs(cross))))
        records.append(PeWordRecord(v, pi_hat, worst, cov_resid))
    max_cross = max((r.cross_residual for r in records), default=0.0)
    min_pi = min((r.pi_hat for r in records), default=0.0)
    spread = max((r.covariance_residual for r in records), default=0.0)
    return PeCheckReport(N, max_word_len, max_lag, tol, R_common, max_cross,
                         min_pi, spread, tuple(records),
                         passed=(max_cross <= tol and min_pi > 0))


@dataclass(frozen=True)
class EmpiricalEstimate:
    """One estimated Markov parameter with its sample diagnostics."""

    r: int
    v: ModeWord
    q: int
    S_hat: np.ndarray
    count: int
    pi_hat: float
    N: int

    @property
    def zero_count(self) -> bool:
        return self.count == 0


def _pattern_sum(modes: np.ndarray, inputs: np.ndarray, outputs: np.ndarray,
                 pattern: tuple[int, ...]) -> tuple[np.ndarray, int]:
    """Sum of y_{t+len-1} u_t^T over starts where the mode pattern matches."""
    mask = match_starts(modes, pattern)
    sel = np.nonzero(mask)[0]
    if sel.size == 0:
        return np.zeros((outputs.shape[1], inputs.shape[1])), 0
    return outputs[sel + len(pattern) - 1].T @ inputs[sel], int(sel.size)


def estimate_markov(w: HybridWord, outputs: np.ndarray, r: int, v: Sequence[int],
                    q: int, R: np.ndarray, pi: float) -> EmpiricalEstimate:
    """Correlation estimate of S(r v q) from one input-output trajectory.

    Implements ((1/N) sum_t y_{t+|v|+1} u_t^T chi(t, rvq)) R^{-1} / pi, the
    indicator matching the modes at times t .. t+|v|+1 against r, v, q.  A
    pattern that never occurs yields a zero estimate flagged by count = 0.
    """
    if pi <= 0:
        raise NotIdentifiableError(f"pattern frequency pi={pi} is not positive")
    v = as_mode_word(v)
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim == 1:
        outputs = outputs.reshape(-1, 1)
    N = len(w)
    if outputs.shape[0] != N:
        raise ValueError(f"{outputs.shape[0]} outputs for a word of length {N}")
    pattern = (r, *v, q)
    raw, count = _pattern_sum(w.modes, w.inputs, outputs, pattern)
    R = np.asarray(R, dtype=float)
    S_hat = np.linalg.solve(R.T, (raw / N).T).T / pi
    usable = N - len(pattern) + 1
    pi_hat = count / usable if usable > 0 else 0.0
    return EmpiricalEstimate(r, v, q, S_hat, count, pi_hat, N)


@dataclass(frozen=True)
class CheckpointRecord:
    N: int
    max_abs_error: float
    max_rel_error: float
    freq_error: float        # worst |pi_hat - pi| over conditioning patterns
    cross_residual: float    # worst unconditioned lagged input correlation
    n_zero_count: int


@dataclass(frozen=True)
class ConvergenceReport:
    depth: int
    reference_scale: float
    records: tuple[CheckpointRecord, ...]

    def __post_init__(self):
        Ns = [r.N for r in self.records]
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ValueError("checkpoints must be strictly increasing")


@dataclass(frozen=True)
class EstimateReport:
    """All Markov estimates up to a depth, as a queryable source plus records."""

    source: TabulatedMarkovSource
    estimates: dict[tuple[int, ModeWord, int], EmpiricalEstimate]
    R: np.ndarray
    mode: str
    depth: int
    horizon: int
    convergence: ConvergenceReport | None = None


def _estimate_table(modes, inputs, outputs, depth, D, mode, cfg, N,
                    require_occurrence=True):
    """Estimates for all (r, v, q) with |v| <= depth over the given arrays."""
    if mode == "empirical":
        R_used = inputs.T @ inputs / N if N else np.eye(inputs.shape[1])
    elif mode == "theoretical":
        if cfg is None:
            raise ConfigError("theoretical mode needs a PeSignalConfig for (pi, R)")
        R_used = cfg.R
    else:
        raise ConfigError(f"unknown estimation mode {mode!r}")
    table = {}
    estimates = {}
    n_zero = 0
    for v in words_up_to(depth, D):
        for r in range(1, D + 1):
            for q in range(1, D + 1):
                pattern = (r, *v, q)
                raw, count = _pattern_sum(modes, inputs, outputs, pattern)
                usable = N - len(pattern) + 1
                pi_hat = count / usable if usable > 0 else 0.0
                if mode == "theoretical":
                    pi = cfg.word_probability(pattern)
                else:
                    pi = pi_hat
                if count == 0:
                    n_zero += 1
                    if require_occurrence:
                        raise NotIdentifiableError(
                            f"mode pattern {pattern} never occurs in the data"
                        )
                    S_hat = np.zeros((outputs.shape[1], inputs.shape[1]))
                else:
                    S_hat = np.linalg.solve(R_used.T, (raw / N).T).T / pi
                est = EmpiricalEstimate(r, v, q, S_hat, count, pi_hat, N)
                estimates[(r, v, q)] = est
                table[(r, v, q)] = S_hat
    return table, estimates, R_used, n_zero


def estimate_all_markov(w: HybridWord, outputs: np.ndarray, depth: int, D: int,
                        mode: str = "empirical", cfg: PeSignalConfig | None = None,
                        reference: MarkovSource | None = None,
                        checkpoints: Sequence[int] | None = None) -> EstimateReport:
    """Estimate every Markov parameter with middle word |v| <= depth.

    ``mode`` selects the normalizing pair: "theoretical" takes (pi, R) from
    ``cfg``, "empirical" plugs in the sample frequency and sample input
    covariance.  Any pattern that never occurs up to the depth makes the map
    unidentifiable from this data and raises, naming the pattern.

    When a ``reference`` source is supplied, estimation is repeated on
    geometric prefixes (default N/16, N/4, N) and the error trajectory is
    recorded in the convergence report.
    """
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim == 1:
        outputs = outputs.reshape(-1, 1)
    N = len(w)
    if outputs.shape[0] != N:
        raise ValueError(f"{outputs.shape[0]} outputs for a word of length {N}")
    table, estimates, R_used, _ = _estimate_table(
        w.modes, w.inputs, outputs, depth, D, mode, cfg, N)
    source = TabulatedMarkovSource(table, outputs.shape[1], w.m, D, origin="empirical")

    convergence = None
    if reference is not None:
        if checkpoints is None:
            checkpoints = sorted({max(N // 16, depth + 2), max(N // 4, depth + 2), N})
        ref_scale = 0.0
        refs = {}
        for v in words_up_to(depth, D):
            for r in range(1, D + 1):
                for q in range(1, D + 1):
                    refs[(r, v, q)] = reference(r, v, q)
                    ref_scale = max(ref_scale, float(np.max(np.abs(refs[(r, v, q)]))))
        records = []
        for Nk in checkpoints:
            if not 0 < Nk <= N:
                raise ValueError(f"checkpoint {Nk} outside 1..{N}")
            mk, ik, ok = w.modes[:Nk], w.inputs[:Nk], outputs[:Nk]
            tab_k, est_k, _, n_zero = _estimate_table(
                mk, ik, ok, depth, D, mode, cfg, Nk, require_occurrence=False)
            err = max(
                float(np.max(np.abs(tab_k[key] - refs[key])))
                for key in refs if est_k[key].count > 0
            )
            freq_err = 0.0
            for key, est in est_k.items():
                pi_true = (cfg.word_probability((key[0], *key[1], key[2]))
                           if cfg is not None else
                           (1.0 / D) ** (len(key[1]) + 2))
                freq_err = max(freq_err, abs(est.pi_hat - pi_true))
            cross = 0.0
            for j in (1, 2, 3):
                if Nk > j:
                    cross = max(cross, float(np.max(np.abs(ik[j:].T @ ik[:-j] / Nk))))
            records.append(CheckpointRecord(
                Nk, err, err / ref_scale if ref_scale > 0 else float("nan"),
                freq_err, cross, n_zero))
        convergence = ConvergenceReport(depth, ref_scale, tuple(records))

    return EstimateReport(source, estimates, R_used, mode, depth, N, convergence)


def identify(w: HybridWord, outputs: np.ndarray, n_guess: int, depth: int, D: int,
             tol_rel: float = 1e-9, mode: str = "empirical",
             cfg: PeSignalConfig | None = None) -> RealizationResult:
    """Full pipeline: estimate Markov parameters, build the Hankel section,
    and realize with the model order pinned to ``n_guess``.

    The basis columns are chosen by the fixed leftmost rule of the rank
    factorization, which keeps the map from data to model continuous around
    the noise-free section.  The returned factorization carries the full
    singular spectrum of the estimated section; the gap after the first
    ``n_guess`` values is the model-order diagnostic.
    """
    if n_guess < 1:
        raise ValueError("n_guess must be at least 1")
    if depth < 2 * n_guess - 1:
        raise ValueError(f"depth {depth} below 2*n_guess-1 = {2 * n_guess - 1}")
    report = estimate_all_markov(w, outputs, depth, D, mode=mode, cfg=cfg)
    H = build_hankel(report.source, n_guess - 1, n_guess)
    return realize(H, tol_rel, force_rank=n_guess)


@dataclass(frozen=True)
class CorrelationRecord:
    """Residuals of the limit identities for one conditioning tuple."""

    r: int
    v: ModeWord
    q: int
    beta: ModeWord
    pi_hat: float
    state_residual: float
    output_residual: float
    appendix_residual: float  # (1/N) sum x_t u_t^T on the pattern, must vanish
    reference_magnitude: float


@dataclass(frozen=True)
class StateCorrelationReport:
    horizon: int
    records: tuple[CorrelationRecord, ...]
    max_state_residual: float
    max_output_residual: float
    max_appendix_residual: float
    scale: float  # largest reference magnitude across tuples


def state_correlation_check(sys: SwitchedLinearSystem, w: HybridWord,
                            word_tuples: Sequence[tuple],
                            allow_unstable: bool = False) -> StateCorrelationReport:
    """Check the state/output cross-correlation limits along one trajectory.

    For each tuple (r, v, q, beta) the time averages
    (1/N) sum x_{t+|v|+1} u_t^T and (1/N) sum y_{t+|v|+1} u_t^T, conditioned
    on the pattern r v q beta, are compared against pi_hat A_v B_r R_hat and
    pi_hat C_q A_v B_r R_hat.  The report also tracks the same-time average
    (1/N) sum x_t u_t^T on the pattern, whose limit is zero.
    """
    if not allow_unstable and not check_l1_stability_sufficient(sys):
        raise ConfigError(
            "system does not satisfy the spectral-norm stability bound; "
            "pass allow_unstable=True to override"
        )
    N = len(w)
    if N == 0:
        raise ZeroSampleError("empty input word")
    traj = simulate(sys, w)
    states, outputs, inputs, modes = traj.states, traj.outputs, w.inputs, w.modes
    R_hat = inputs.T @ inputs / N
    records = []
    scale = 0.0
    for r, v, q, beta in word_tuples:
        v = as_mode_word(v, sys.D)
        beta = as_mode_word(beta, sys.D)
        pattern = (r, *v, q, *beta)
        mask = match_starts(modes, pattern)
        sel = np.nonzero(mask)[0]
        pi_hat = sel.size / N
        A_v = matrix_product_along_word(sys, v)
        ref_x = pi_hat * (A_v @ sys.B[r - 1] @ R_hat)
        ref_y = pi_hat * (sys.C[q - 1] @ A_v @ sys.B[r - 1] @ R_hat)
        shift = len(v) + 1
        if sel.size:
            sum_x = states[sel + shift].T @ inputs[sel] / N
            sum_y = outputs[sel + shift].T @ inputs[sel] / N
            sum_0 = states[sel].T @ inputs[sel] / N
        else:
            sum_x = np.zeros_like(ref_x)
            sum_y = np.zeros_like(ref_y)
            sum_0 = np.zeros((sys.n, sys.m))
        rec = CorrelationRecord(
            r, v, q, beta, pi_hat,
            float(np.max(np.abs(sum_x - ref_x))),
            float(np.max(np.abs(sum_y - ref_y))),
            float(np.max(np.abs(sum_0))),
            float(max(np.max(np.abs(ref_x)), np.max(np.abs(ref_y)))),
        )
        records.append(rec)
        scale = max(scale, rec.reference_magnitude)
    return StateCorrelationReport(
        N, tuple(records),
        max(r.state_residual for r in records),
        max(r.output_residual for r in records),
        max(r.appendix_residual for r in records),
        scale,
    )
