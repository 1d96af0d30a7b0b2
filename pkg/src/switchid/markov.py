"""Markov parameters of switched input-output maps.

A Markov parameter S(q0 v q) is the p-by-m matrix whose j-th column is the
response of the input-output map to the impulse word
(q0, e_j)(v_1, 0)...(v_k, 0)(q, 0).  For a state-space system it factors as
C_q A_v B_{q0}.  The parameters over all mode pairs for a fixed middle word v
assemble into the pD-by-mD combined block matrix M(v), block row q, block
column q0.

Sources memoize per word so that repeated queries (Hankel assembly touches
the same word through many block positions) never re-probe.  The cache is a
plain dict with atomic get/set, so concurrent readers are safe and results
do not depend on evaluation order.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .lss import HybridWord, SwitchedLinearSystem, probe_word
from .words import ModeWord, as_mode_word, subword, words_up_to


class MarkovSource:
    """Deterministic map (q0, v, q) -> S(q0 v q), with per-word memoization.

    Subclasses implement ``_evaluate``; callers use ``source(q0, v, q)``.
    Only words of length >= 2 exist in the domain: both flanking modes are
    always present, so shorter queries cannot be expressed.
    """

    origin = "abstract"

    def __init__(self, p: int, m: int, D: int):
        self.p, self.m, self.D = int(p), int(m), int(D)
        self._cache: dict[tuple, np.ndarray] = {}

    def __call__(self, q0: int, v: Sequence[int], q: int) -> np.ndarray:
        v = as_mode_word(v, self.D)
        if not (1 <= q0 <= self.D and 1 <= q <= self.D):
            raise ValueError(f"modes ({q0}, {q}) outside 1..{self.D}")
        key = (q0, v, q)
        S = self._cache.get(key)
        if S is None:
            S = np.asarray(self._evaluate(q0, v, q), dtype=float)
            if S.shape != (self.p, self.m):
                raise ValueError(
                    f"source returned shape {S.shape}, expected {(self.p, self.m)}"
                )
            S.setflags(write=False)
            self._cache[key] = S
        return S

    def _evaluate(self, q0: int, v: ModeWord, q: int) -> np.ndarray:
        raise NotImplementedError


class ModelMarkovSource(MarkovSource):
    """Markov parameters C_q A_v B_{q0} of an explicit state-space system."""

    origin = "model-derived"

    def __init__(self, sys: SwitchedLinearSystem):
        super().__init__(sys.p, sys.m, sys.D)
        self.sys = sys
        self._products: dict[ModeWord, np.ndarray] = {(): np.eye(sys.n)}

    def _product(self, v: ModeWord) -> np.ndarray:
        # A_v built by extending cached prefixes: A_{v'q} = A_q A_{v'}.
        P = self._products.get(v)
        if P is None:
            P = self.sys.A[v[-1] - 1] @ self._product(v[:-1])
            self._products[v] = P
        return P

    def _evaluate(self, q0, v, q):
        return self.sys.C[q - 1] @ self._product(v) @ self.sys.B[q0 - 1]


class OracleMarkovSource(MarkovSource):
    """Markov parameters probed from a black-box map HybridWord -> R^p."""

    origin = "oracle-derived"

    def __init__(self, f: Callable[[HybridWord], np.ndarray], p: int, m: int, D: int):
        super().__init__(p, m, D)
        self.f = f

    def _evaluate(self, q0, v, q):
        S = np.empty((self.p, self.m))
        for j in range(1, self.m + 1):
            y = np.asarray(self.f(probe_word(q0, v, q, j, self.m)), dtype=float)
            S[:, j - 1] = y.reshape(self.p)
        return S


class TabulatedMarkovSource(MarkovSource):
    """Markov parameters backed by a finite table; missing words are an error."""

    def __init__(self, table: dict[tuple, np.ndarray], p: int, m: int, D: int,
                 origin: str = "tabulated"):
        super().__init__(p, m, D)
        self.table = {(k[0], tuple(k[1]), k[2]): np.asarray(S, dtype=float)
                      for k, S in table.items()}
        self.origin = origin

    def max_middle_length(self) -> int:
        return max((len(v) for _, v, _ in self.table), default=-1)

    def _evaluate(self, q0, v, q):
        try:
            return self.table[(q0, v, q)]
        except KeyError:
            raise KeyError(
                f"word ({q0}, {v}, {q}) not tabulated; table covers |v| <= "
                f"{self.max_middle_length()}"
            ) from None


def markov_from_model(sys: SwitchedLinearSystem, q0: int, v: Sequence[int],
                      q: int) -> np.ndarray:
    """S(q0 v q) = C_q A_v B_{q0} computed from the system matrices."""
    return ModelMarkovSource(sys)(q0, v, q)


def markov_from_oracle(f: Callable[[HybridWord], np.ndarray], q0: int,
                       v: Sequence[int], q: int, m: int) -> np.ndarray:
    """S(q0 v q) probed column by column from a black-box input-output map.

    Column j is the oracle response to (q0, e_j)(v_1, 0)...(v_k, 0)(q, 0);
    the output dimension is taken from the first response.
    """
    v = as_mode_word(v)
    first = np.asarray(f(probe_word(q0, v, q, 1, m)), dtype=float).reshape(-1)
    S = np.empty((first.shape[0], m))
    S[:, 0] = first
    for j in range(2, m + 1):
        S[:, j - 1] = np.asarray(f(probe_word(q0, v, q, j, m)), dtype=float).reshape(-1)
    return S


@dataclass(frozen=True)
class CombinedMarkov:
    """Block matrix M(v): block row q (terminal mode), block column q0."""

    v: ModeWord
    M: np.ndarray  # (p*D, m*D)


def combined_markov(src: MarkovSource, v: Sequence[int]) -> CombinedMarkov:
    """Assemble M(v) from the D*D Markov parameters S(q0 v q)."""
    v = as_mode_word(v, src.D)
    p, m, D = src.p, src.m, src.D
    M = np.empty((p * D, m * D))
    for q in range(1, D + 1):
        for q0 in range(1, D + 1):
            M[(q - 1) * p : q * p, (q0 - 1) * m : q0 * m] = src(q0, v, q)
    M.setflags(write=False)
    return CombinedMarkov(v, M)


def gcr_evaluate(src: MarkovSource, w: HybridWord) -> np.ndarray:
    """Evaluate the map at ``w`` through its convolution representation.

    For w = (q_0,u_0)...(q_t,u_t) this is the sum over k < t of
    S(q_k, modes k+1..t-1, q_t) u_k; a single-letter word gives the zero
    vector (empty sum), matching the zero-initial-state response.
    """
    if len(w) < 1:
        raise ValueError("gcr_evaluate needs a non-empty word")
    modes = w.mode_word()
    t = len(w) - 1
    y = np.zeros(src.p)
    for k in range(t):
        middle = subword(modes, k + 1, t - 1)
        y += src(modes[k], middle, modes[t]) @ w.inputs[k]
    return y


def markov_distance(a: MarkovSource, b: MarkovSource, depth: int) -> float:
    """Max absolute entry difference over all words q0 v q with |v| <= depth."""
    if (a.p, a.m, a.D) != (b.p, b.m, b.D):
        raise ValueError(
            f"sources have mismatched dimensions {(a.p, a.m, a.D)} vs {(b.p, b.m, b.D)}"
        )
    worst = 0.0
    for v in words_up_to(depth, a.D):
        for q0 in range(1, a.D + 1):
            for q in range(1, a.D + 1):
                diff = float(np.max(np.abs(a(q0, v, q) - b(q0, v, q))))
                if diff > worst:
                    worst = diff
    return worst
