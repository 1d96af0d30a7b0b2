"""Construction of finite persistently exciting hybrid inputs.

A single input word determines every Markov parameter of a map when the
responses to all impulse probes can be read off its prefixes.  The probes
are interleaved with neutralizing segments that return the state to (near)
zero before the next probe starts:

    w = s_1 r_1 s_2 r_2 ... s_d

where s_k is the k-th probe and r_k undoes its effect.  Two neutralization
strategies are provided: a model-based one that searches for an explicit
zeroing input (needs a reversible state-space realization), and a map-based
one that reverses the probe letterwise through a user-supplied inverse on
hybrid letters (needs no model at all).

Probe responses are read at recorded prefix positions, never rediscovered by
pattern matching: distinct probes can be textually identical as words.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .lss import HybridWord, SwitchedLinearSystem, check_reversible, probe_word, simulate
from .markov import TabulatedMarkovSource
from .words import ModeWord, count_words_up_to, word_at_index, words_up_to

# (q, u) -> (q', u') acting on single hybrid letters
InverseMap = Callable[[int, np.ndarray], tuple[int, np.ndarray]]

ProbeKey = tuple[int, ModeWord, int, int]


class NoZeroingInputError(RuntimeError):
    """No input up to the length cap drives the state to zero within tolerance."""


class IncompleteDataError(ValueError):
    """The response data does not cover every probe needed at the requested depth."""


@dataclass(frozen=True)
class ProbeWord:
    """One impulse probe (q0, e_j)(v_1, 0)...(v_k, 0)(q, 0) with its identity."""

    q0: int
    v: ModeWord
    q: int
    j: int
    word: HybridWord

    @property
    def key(self) -> ProbeKey:
        return (self.q0, self.v, self.q, self.j)


@dataclass(frozen=True)
class PersistentInput:
    """A persistently exciting word plus the read-off positions of its probes.

    ``probe_index`` maps each probe key (q0, v, q, j) to the 0-based output
    time at which the response to that probe appears, i.e. the index of the
    prefix of ``w`` whose terminal output equals the probe response.
    """

    w: HybridWord
    probe_index: dict[ProbeKey, int]
    n_bound: int
    D: int
    m: int

    def __post_init__(self):
        for key, pos in self.probe_index.items():
            if not 0 <= pos < len(self.w):
                raise ValueError(f"probe {key} maps to position {pos} outside the word")


def enumerate_probe_set(n_bound: int, D: int, m: int) -> list[ProbeWord]:
    """All probes needed to pin down a map realizable in dimension n_bound.

    Covers the first N(2*n_bound - 1) middle words; for each, all D*D mode
    pairs and all m impulse channels, ordered word-first then (q0, q, j).
    """
    if n_bound < 1:
        raise ValueError("n_bound must be at least 1")
    probes = []
    for i in range(1, count_words_up_to(2 * n_bound - 1, D) + 1):
        v = word_at_index(i, D)
        for q0 in range(1, D + 1):
            for q in range(1, D + 1):
                for j in range(1, m + 1):
                    probes.append(ProbeWord(q0, v, q, j, probe_word(q0, v, q, j, m)))
    return probes


def find_zeroing_input(sys: SwitchedLinearSystem, x: np.ndarray,
                       max_len: int | None = None, tol: float = 1e-9) -> HybridWord:
    """An input word driving the state ``x`` to zero, within ``tol``.

    Candidate switching words are tried in enumeration order of increasing
    length; for each, the inputs solve the linear least-squares problem
    terminal(x, v, u) = 0 and the first word whose residual meets the
    tolerance wins.  For a reversible system every reachable state admits
    such a word, so the default cap 2*n*D is generous.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != sys.n:
        raise ValueError(f"state has length {x.shape[0]}, expected {sys.n}")
    if max_len is None:
        max_len = 2 * sys.n * sys.D
    if float(np.linalg.norm(x)) <= tol:
        return HybridWord.empty(sys.m)

    m = sys.m
    best: tuple[float, HybridWord] | None = None
    for v in words_up_to(max_len, sys.D):
        k = len(v)
        if k == 0:
            continue
        # suffix(i) = product of A over letters i+1..k; column block for u_i
        # is suffix(i) @ B_{v_i}.
        suffix = np.eye(sys.n)
        cols = [None] * k
        for i in range(k, 0, -1):
            cols[i - 1] = suffix @ sys.B[v[i - 1] - 1]
            suffix = suffix @ sys.A[v[i - 1] - 1]
        A_v_x = suffix @ x
        M = np.hstack(cols)
        u, *_ = np.linalg.lstsq(M, -A_v_x, rcond=None)
        residual = float(np.linalg.norm(A_v_x + M @ u))
        if residual <= tol:
            return HybridWord(np.asarray(v, dtype=np.int64), u.reshape(k, m))
        if best is None or residual < best[0]:
            best = (residual, HybridWord(np.asarray(v, dtype=np.int64), u.reshape(k, m)))
    raise NoZeroingInputError(
        f"no zeroing input up to length {max_len}; best residual "
        f"{best[0] if best else float('inf'):.3e} > tol {tol:.1e}"
    )


def build_pe_input_model_based(sys: SwitchedLinearSystem, n_bound: int,
                               max_len: int | None = None,
                               tol: float = 1e-9) -> PersistentInput:
    """Persistently exciting input for a reversible system, probe by probe.

    After each probe the exact state is known from the model, so a zeroing
    segment resets it before the next probe; each probe's response is then
    the response from (near) zero state and read at the probe's final
    position.
    """
    if not check_reversible(sys):
        raise ValueError("system is not reversible; zeroing inputs may not exist")
    probes = enumerate_probe_set(n_bound, sys.D, sys.m)
    segments: list[HybridWord] = []
    probe_index: dict[ProbeKey, int] = {}
    pos = 0
    x = np.zeros(sys.n)
    for k, probe in enumerate(probes):
        segments.append(probe.word)
        pos += len(probe.word)
        probe_index[probe.key] = pos - 1
        x = simulate(sys, probe.word, x).final_state
        if k + 1 < len(probes):
            reset = find_zeroing_input(sys, x, max_len, tol)
            if len(reset):
                segments.append(reset)
                pos += len(reset)
                x = simulate(sys, reset, x).final_state
    return PersistentInput(HybridWord.concat(segments, sys.m), probe_index,
                           n_bound, sys.D, sys.m)


def elementwise_inverse_word(s: HybridWord, inv: InverseMap) -> HybridWord:
    """Reverse ``s`` and apply the letter inverse to each (mode, input) pair."""
    letters = []
    for q, u in reversed(list(s.letters())):
        q_inv, u_inv = inv(q, u)
        letters.append((int(q_inv), np.asarray(u_inv, dtype=float)))
    return HybridWord.from_letters(letters, m=s.m)


def build_pe_input_map_based(inv: InverseMap, n_bound: int, D: int,
                             m: int) -> PersistentInput:
    """Persistently exciting input using only a letterwise inverse, no model.

    Each probe is undone by its reversed, letterwise-inverted copy.  The
    construction cannot detect a wrong inverse map; violations show up as
    extraction mismatches downstream.
    """
    probes = enumerate_probe_set(n_bound, D, m)
    segments: list[HybridWord] = []
    probe_index: dict[ProbeKey, int] = {}
    pos = 0
    for k, probe in enumerate(probes):
        segments.append(probe.word)
        pos += len(probe.word)
        probe_index[probe.key] = pos - 1
        if k + 1 < len(probes):
            reset = elementwise_inverse_word(probe.word, inv)
            segments.append(reset)
            pos += len(reset)
    return PersistentInput(HybridWord.concat(segments, m), probe_index, n_bound, D, m)


def extract_markov_from_response(pe: PersistentInput, outputs: np.ndarray,
                                 depth: int) -> TabulatedMarkovSource:
    """Read the Markov parameters out of the response to a PE input.

    ``outputs`` must hold one output vector per prefix of ``pe.w``.  Returns
    a tabulated source covering every middle word with |v| <= depth.
    """
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim == 1:
        outputs = outputs.reshape(-1, 1)
    if outputs.shape[0] != len(pe.w):
        raise IncompleteDataError(
            f"{outputs.shape[0]} outputs for a word of length {len(pe.w)}"
        )
    if depth > 2 * pe.n_bound - 1:
        raise IncompleteDataError(
            f"depth {depth} exceeds the probed depth {2 * pe.n_bound - 1}"
        )
    p = outputs.shape[1]
    table: dict[tuple, np.ndarray] = {}
    for v in words_up_to(depth, pe.D):
        for q0 in range(1, pe.D + 1):
            for q in range(1, pe.D + 1):
                S = np.empty((p, pe.m))
                for j in range(1, pe.m + 1):
                    pos = pe.probe_index.get((q0, v, q, j))
                    if pos is None:
                        raise IncompleteDataError(
                            f"probe ({q0}, {v}, {q}, {j}) has no recorded position"
                        )
                    S[:, j - 1] = outputs[pos]
                table[(q0, v, q)] = S
    return TabulatedMarkovSource(table, p, pe.m, pe.D)


def paired_inverse_map(D: int) -> InverseMap:
    """The letter inverse (q, u) -> (q +/- D/2, -u) for a paired-mode system."""
    if D % 2 != 0:
        raise ValueError("paired inverse needs an even number of modes")
    K = D // 2

    def inv(q: int, u: np.ndarray) -> tuple[int, np.ndarray]:
        return (q + K if q <= K else q - K, -np.asarray(u, dtype=float))

    return inv


def paired_extension(sys: SwitchedLinearSystem) -> SwitchedLinearSystem:
    """Double a reversible system with the undo modes q + K.

    Mode K + q carries A_{K+q} = A_q^{-1} and B_{K+q} = A_{K+q} B_q, which
    makes the input-output map reversible with respect to the letter inverse
    of :func:`paired_inverse_map`: one step of (q, u) followed by one step of
    (q + K, -u) restores any state.  Outputs of the new modes reuse C_q.
    """
    if not check_reversible(sys):
        raise ValueError("paired extension needs invertible mode matrices")
    A_inv = [np.linalg.inv(sys.A[q]) for q in range(sys.D)]
    A = list(sys.A) + A_inv
    B = list(sys.B) + [A_inv[q] @ sys.B[q] for q in range(sys.D)]
    C = list(sys.C) + list(sys.C)
    return SwitchedLinearSystem(A, B, C)
