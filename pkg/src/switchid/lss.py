"""Discrete-time linear switched systems and their exact simulation.

A system switches among D mode-indexed triples (A_q, B_q, C_q) driven by an
external hybrid input word: at every step the active mode q_t picks the
matrices, the state update is x_{t+1} = A_{q_t} x_t + B_{q_t} u_t and the
output is y_t = C_{q_t} x_t.  The canonical initial state is zero; the
input-output map of a system is its response from that zero state.

Modes are 1-based (1..D) in every public API.  All containers are made
read-only after construction, so instances are safe to share across threads;
every function here is pure.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .words import ModeWord, as_mode_word


class DimensionError(ValueError):
    """Shapes of matrices, states, or inputs do not line up."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _stack_modes(mats: Sequence, name: str) -> np.ndarray:
    """Stack one matrix per mode into a (D, rows, cols) array; scalars become 1x1."""
    try:
        stacked = np.stack([np.atleast_2d(np.asarray(M, dtype=float)) for M in mats])
    except ValueError as exc:
        raise DimensionError(f"all {name} matrices must share one shape") from exc
    if stacked.ndim != 3:
        raise DimensionError(f"{name} must be a sequence of 2-d matrices")
    return stacked


@dataclass(frozen=True)
class SwitchedLinearSystem:
    """Mode-indexed matrix families of a discrete-time linear switched system.

    Parameters
    ----------
    A, B, C : sequences of D arrays
        Per-mode state, input and output matrices with shared shapes
        (n, n), (n, m) and (p, n).  Stored stacked as (D, n, n) etc.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __init__(self, A: Sequence, B: Sequence, C: Sequence):
        A = _stack_modes(A, "A")
        B = _stack_modes(B, "B")
        C = _stack_modes(C, "C")
        D, n, n2 = A.shape
        if n != n2:
            raise DimensionError(f"A matrices must be square, got {A.shape[1:]}")
        if B.shape[0] != D or C.shape[0] != D:
            raise DimensionError("A, B, C must list one matrix per mode")
        if B.shape[1] != n or C.shape[2] != n:
            raise DimensionError("B rows / C columns must match the state dimension")
        if D < 1 or n < 1 or B.shape[2] < 1 or C.shape[1] < 1:
            raise DimensionError("dimensions n, m, p, D must all be at least 1")
        for name, M in (("A", A), ("B", B), ("C", C)):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"non-finite entries in {name}")
        object.__setattr__(self, "A", _readonly(A))
        object.__setattr__(self, "B", _readonly(B))
        object.__setattr__(self, "C", _readonly(C))

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.B.shape[2]

    @property
    def p(self) -> int:
        return self.C.shape[1]

    @property
    def D(self) -> int:
        return self.A.shape[0]

    def A_mode(self, q: int) -> np.ndarray:
        return self.A[self._check_mode(q) - 1]

    def B_mode(self, q: int) -> np.ndarray:
        return self.B[self._check_mode(q) - 1]

    def C_mode(self, q: int) -> np.ndarray:
        return self.C[self._check_mode(q) - 1]

    def _check_mode(self, q: int) -> int:
        if not 1 <= q <= self.D:
            raise ValueError(f"mode {q} outside 1..{self.D}")
        return int(q)


@dataclass(frozen=True)
class HybridWord:
    """A finite hybrid input: parallel arrays of modes (T+1,) and inputs (T+1, m)."""

    modes: np.ndarray
    inputs: np.ndarray

    def __init__(self, modes, inputs):
        modes = np.asarray(modes, dtype=np.int64).reshape(-1)
        inputs = np.asarray(inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs.reshape(-1, 1)
        if inputs.ndim != 2 or inputs.shape[0] != modes.shape[0]:
            raise DimensionError(
                f"need one input row per mode, got {inputs.shape} vs {modes.shape}"
            )
        if modes.size and modes.min() < 1:
            raise ValueError("modes must be 1-based positive integers")
        if not np.all(np.isfinite(inputs)):
            raise ValueError("non-finite input entries")
        object.__setattr__(self, "modes", _readonly(modes))
        object.__setattr__(self, "inputs", _readonly(inputs))

    @classmethod
    def empty(cls, m: int) -> "HybridWord":
        return cls(np.zeros(0, dtype=np.int64), np.zeros((0, m)))

    @classmethod
    def from_letters(cls, letters: Iterable[tuple[int, Sequence[float] | float]],
                     m: int | None = None) -> "HybridWord":
        """Build from (mode, input) pairs; scalar inputs are treated as length-1."""
        modes, rows = [], []
        for q, u in letters:
            modes.append(q)
            rows.append(np.atleast_1d(np.asarray(u, dtype=float)))
        if not modes:
            return cls.empty(m if m is not None else 1)
        return cls(np.asarray(modes), np.vstack(rows))

    @classmethod
    def concat(cls, parts: Sequence["HybridWord"], m: int | None = None) -> "HybridWord":
        parts = [w for w in parts if len(w)]
        if not parts:
            return cls.empty(m if m is not None else 1)
        return cls(np.concatenate([w.modes for w in parts]),
                   np.vstack([w.inputs for w in parts]))

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    def __len__(self) -> int:
        return int(self.modes.shape[0])

    def prefix(self, length: int) -> "HybridWord":
        if not 0 <= length <= len(self):
            raise ValueError(f"prefix length {length} outside 0..{len(self)}")
        return HybridWord(self.modes[:length], self.inputs[:length])

    def mode_word(self) -> ModeWord:
        return tuple(int(q) for q in self.modes)

    def letters(self) -> Iterable[tuple[int, np.ndarray]]:
        for q, u in zip(self.modes, self.inputs):
            yield int(q), u


@dataclass(frozen=True)
class Trajectory:
    """States x_0..x_{T+1} and outputs y_0..y_T of one simulation run."""

    states: np.ndarray   # (T+2, n)
    outputs: np.ndarray  # (T+1, p)

    def __post_init__(self):
        if self.states.shape[0] != self.outputs.shape[0] + 1:
            raise DimensionError("states must have exactly one more row than outputs")
        _readonly(self.states)
        _readonly(self.outputs)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_output(self) -> np.ndarray:
        if self.outputs.shape[0] == 0:
            raise ValueError("empty trajectory has no output")
        return self.outputs[-1]


def probe_word(q0: int, v: Sequence[int], q: int, j: int, m: int) -> HybridWord:
    """The impulse word (q0, e_j)(v_1, 0)...(v_k, 0)(q, 0) of length |v| + 2."""
    v = as_mode_word(v)
    if not 1 <= j <= m:
        raise ValueError(f"unit-vector index {j} outside 1..{m}")
    modes = np.asarray((q0, *v, q), dtype=np.int64)
    inputs = np.zeros((len(v) + 2, m))
    inputs[0, j - 1] = 1.0
    return HybridWord(modes, inputs)


def matrix_product_along_word(sys: SwitchedLinearSystem, v: Sequence[int]) -> np.ndarray:
    """Product A_v = A_{v_k} ... A_{v_1}; the identity for the empty word.

    The first letter of v contributes the rightmost factor, matching the order
    in which the modes act on the state.
    """
    v = as_mode_word(v, sys.D)
    P = np.eye(sys.n)
    for q in v:
        P = sys.A[q - 1] @ P
    return P


def simulate(sys: SwitchedLinearSystem, w: HybridWord,
             x_init: np.ndarray | None = None) -> Trajectory:
    """Run the switched recursion under ``w`` and record all states and outputs.

    ``x_init`` defaults to the zero state, in which case the output sequence
    equals the input-output map of the system evaluated on every prefix of w.
    """
    n, p = sys.n, sys.p
    if x_init is None:
        x = np.zeros(n)
    else:
        x = np.asarray(x_init, dtype=float).reshape(-1)
        if x.shape[0] != n:
            raise DimensionError(f"x_init has length {x.shape[0]}, expected {n}")
    if len(w) and w.m != sys.m:
        raise DimensionError(f"input width {w.m} does not match system m={sys.m}")
    if len(w) and int(w.modes.max()) > sys.D:
        raise ValueError(f"mode {int(w.modes.max())} outside 1..{sys.D}")

    T1 = len(w)
    states = np.empty((T1 + 1, n))
    outputs = np.empty((T1, p))
    states[0] = x
    A, B, C = sys.A, sys.B, sys.C
    modes = w.modes
    inputs = w.inputs
    for t in range(T1):
        q = modes[t] - 1
        outputs[t] = C[q] @ x
        x = A[q] @ x + B[q] @ inputs[t]
        states[t + 1] = x
    return Trajectory(states, outputs)


def io_map(sys: SwitchedLinearSystem):
    """The input-output map of ``sys`` as a plain callable HybridWord -> R^p."""
    def f(w: HybridWord) -> np.ndarray:
        return simulate(sys, w).final_output
    return f


def check_l1_stability_sufficient(sys: SwitchedLinearSystem) -> bool:
    """True when every spectral norm ||A_q||_2 is strictly below 1/D.

    This certifies that state contributions summed over all mode words
    converge; a False answer does not certify instability.
    """
    bound = 1.0 / sys.D
    return all(np.linalg.norm(sys.A[q], 2) < bound for q in range(sys.D))


def check_reversible(sys: SwitchedLinearSystem, tol_rel: float = 1e-10) -> bool:
    """True when every A_q is numerically invertible.

    Invertibility is judged scale-invariantly: the smallest singular value
    must exceed ``tol_rel`` times the largest one.
    """
    for q in range(sys.D):
        s = np.linalg.svd(sys.A[q], compute_uv=False)
        if s[-1] <= tol_rel * s[0]:
            return False
    return True
