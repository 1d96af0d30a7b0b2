"""Finite Hankel sub-matrices built from combined Markov parameters.

The full Hankel matrix is the infinite block matrix whose block at block row
i, block column j is M(v_j v_i) -- the COLUMN word is concatenated BEFORE the
row word.  This is the single most error-prone convention in the whole
construction, so it is enforced in exactly one place (:func:`build_hankel`)
and cross-checked by tests against independently assembled blocks.

A depth-(L, K) section keeps block rows for the first N(L) words and block
columns for the first N(K) words in enumeration order, giving an
I_L x J_K = N(L)*p*D x N(K)*m*D matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .markov import MarkovSource
from .words import count_words_up_to, word_at_index

# Refuse to materialize sections beyond ~0.5 GiB of float64.
_MAX_ENTRIES = 64_000_000


@dataclass(frozen=True)
class HankelSubMatrix:
    """A dense (L, K) Hankel section together with its block geometry."""

    L: int
    K: int
    H: np.ndarray
    p: int
    m: int
    D: int

    def __post_init__(self):
        I_L = count_words_up_to(self.L, self.D) * self.p * self.D
        J_K = count_words_up_to(self.K, self.D) * self.m * self.D
        if self.H.shape != (I_L, J_K):
            raise ValueError(f"H has shape {self.H.shape}, expected {(I_L, J_K)}")

    @property
    def n_block_rows(self) -> int:
        return count_words_up_to(self.L, self.D)

    @property
    def n_block_cols(self) -> int:
        return count_words_up_to(self.K, self.D)

    def block(self, i: int, j: int) -> np.ndarray:
        """Block at 1-based block row i, block column j (equals M(v_j v_i))."""
        pD, mD = self.p * self.D, self.m * self.D
        return self.H[(i - 1) * pD : i * pD, (j - 1) * mD : j * mD]


def build_hankel(src: MarkovSource, L: int, K: int) -> HankelSubMatrix:
    """Assemble the (L, K) Hankel section of a Markov source.

    Each block (i, j) holds M(v_j v_i), so only words of combined middle
    length at most L + K (plus the two flanking modes) are ever queried.
    """
    if L < 0 or K < 0:
        raise ValueError("L and K must be nonnegative")
    p, m, D = src.p, src.m, src.D
    NL, NK = count_words_up_to(L, D), count_words_up_to(K, D)
    pD, mD = p * D, m * D
    if NL * pD * NK * mD > _MAX_ENTRIES:
        raise ValueError(f"Hankel section ({NL * pD} x {NK * mD}) is too large")
    row_words = [word_at_index(i, D) for i in range(1, NL + 1)]
    col_words = [word_at_index(j, D) for j in range(1, NK + 1)]
    H = np.empty((NL * pD, NK * mD))
    for j, vj in enumerate(col_words):
        for i, vi in enumerate(row_words):
            word = vj + vi
            for q in range(1, D + 1):
                for q0 in range(1, D + 1):
                    H[i * pD + (q - 1) * p : i * pD + q * p,
                      j * mD + (q0 - 1) * m : j * mD + q0 * m] = src(q0, word, q)
    H.setflags(write=False)
    return HankelSubMatrix(L, K, H, p, m, D)


def hankel_rank(H: HankelSubMatrix | np.ndarray, tol_rel: float = 1e-9) -> int:
    """Numerical rank: singular values above ``tol_rel`` times the largest one."""
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    M = H.H if isinstance(H, HankelSubMatrix) else np.asarray(H, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol_rel * s[0]))
