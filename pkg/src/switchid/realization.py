"""Minimal state-space recovery from a finite Hankel section.

Given the (N, N+1) Hankel section of an input-output map, a rank
factorization H = O R yields a realization directly: the stacked C matrices
are the first p*D rows of O, the stacked B matrices are the first m*D
columns of R, and each A_q is the shift operator that maps the coordinate
column of word v to the coordinate column of v q, solved through the
pseudoinverse of the depth-N column block of R.

Column-basis choice: greedy left-to-right orthogonalization, keeping the
leftmost columns whose residual against the already accepted ones exceeds
tol_rel times the largest singular value.  Deterministic, and indices come
out ascending by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hankel import HankelSubMatrix
from .lss import SwitchedLinearSystem, matrix_product_along_word
from .words import count_words_up_to, index_of_word, word_at_index, words_up_to


class DegenerateSystemError(ValueError):
    """The Hankel data admits no realization of positive dimension."""


def pseudoinverse(M: np.ndarray, tol_rel: float = 1e-9) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Only singular values above ``tol_rel`` times the largest one are
    inverted; the rest are treated as exact zeros.
    """
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    M = np.asarray(M, dtype=float)
    return np.linalg.pinv(M, rcond=tol_rel)


@dataclass(frozen=True)
class RankFactorization:
    """H = O R with O the selected basis columns of H.

    ``basis_columns`` are 1-based column indices into H, ascending.  R holds
    the least-squares coordinates of every column of H in that basis.
    ``singular_values`` is the full spectrum of H, kept for model-order
    diagnostics when H comes from noisy estimates.
    """

    O: np.ndarray
    R: np.ndarray
    basis_columns: tuple[int, ...]
    tol_rel: float
    singular_values: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.basis_columns)


def rank_factorize(H: HankelSubMatrix | np.ndarray, tol_rel: float = 1e-9,
                   force_rank: int | None = None) -> RankFactorization:
    """Factor H into basis columns O and coordinates R.

    With ``force_rank`` the basis size is fixed in advance (used when noisy
    data makes the section numerically full rank but the model order is
    known); otherwise the SVD rank at ``tol_rel`` decides.  Selection is
    leftmost-greedy either way, so repeated runs pick identical columns.
    """
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    M = H.H if isinstance(H, HankelSubMatrix) else np.asarray(H, dtype=float)
    if M.ndim != 2:
        raise ValueError("rank_factorize expects a 2-d matrix")
    sv = np.linalg.svd(M, compute_uv=False) if M.size else np.zeros(0)
    smax = float(sv[0]) if sv.size else 0.0
    svd_rank = int(np.count_nonzero(sv > tol_rel * smax)) if smax > 0 else 0
    target = svd_rank if force_rank is None else int(force_rank)
    if force_rank is not None and force_rank < 0:
        raise ValueError("force_rank must be nonnegative")

    threshold = tol_rel * smax if smax > 0 else 0.0
    basis: list[int] = []
    Q = np.zeros((M.shape[0], 0))
    for col in range(M.shape[1]):
        if len(basis) == target:
            break
        h = M[:, col]
        r = h - Q @ (Q.T @ h)
        r = r - Q @ (Q.T @ r)  # second pass keeps Q orthonormal in float
        norm = np.linalg.norm(r)
        if norm > threshold:
            Q = np.hstack([Q, (r / norm)[:, None]])
            basis.append(col + 1)
    if len(basis) < target:
        raise DegenerateSystemError(
            f"only {len(basis)} independent columns found, needed {target}"
        )

    O = M[:, [c - 1 for c in basis]]
    if O.shape[1]:
        R, *_ = np.linalg.lstsq(O, M, rcond=None)
    else:
        R = np.zeros((0, M.shape[1]))
    return RankFactorization(O, R, tuple(basis), tol_rel, sv)


def shift_column_selector(i: int, q: int, N: int, m: int, D: int) -> int:
    """Column of the depth-(N+1) section that the mode-q shift sends column i to.

    Decompose i = (r-1)*m*D + z with z in 1..m*D, append q to the r-th word
    to land on word d, and return (d-1)*m*D + z.  All indices 1-based.
    """
    mD = m * D
    J_N = count_words_up_to(N, D) * mD
    if not 1 <= i <= J_N:
        raise ValueError(f"column index {i} outside 1..{J_N}")
    r, z = divmod(i - 1, mD)
    v = word_at_index(r + 1, D)
    d = index_of_word(v + (q,), D)
    return (d - 1) * mD + z + 1


@dataclass(frozen=True)
class RealizationResult:
    """A recovered system together with the factorization that produced it."""

    system: SwitchedLinearSystem
    N: int
    rank: int
    factorization: RankFactorization

    @property
    def singular_value_gap(self) -> float:
        """Ratio of the first discarded singular value to the last kept one.

        Small values support the chosen model order; near 1 means the order
        is not determined by the data.
        """
        sv = self.factorization.singular_values
        if self.rank == 0 or sv.size <= self.rank:
            return 0.0
        if sv[self.rank - 1] == 0.0:
            return float("nan")
        return float(sv[self.rank] / sv[self.rank - 1])


def realize(H: HankelSubMatrix, tol_rel: float = 1e-9,
            force_rank: int | None = None) -> RealizationResult:
    """Recover a minimal realization from an (N, N+1) Hankel section.

    Raises DegenerateSystemError when the section has rank zero (the map is
    identically zero, which the state-space form with n >= 1 cannot encode).
    """
    if H.K != H.L + 1:
        raise ValueError(f"need K = L + 1, got (L, K) = ({H.L}, {H.K})")
    N, p, m, D = H.L, H.p, H.m, H.D
    fact = rank_factorize(H, tol_rel, force_rank)
    n = fact.rank
    if n == 0:
        raise DegenerateSystemError("zero Hankel section: no positive-dimension realization")

    O, R = fact.O, fact.R
    mD = m * D
    J_N = count_words_up_to(N, D) * mD
    B = [R[:, (q - 1) * m : q * m] for q in range(1, D + 1)]
    C = [O[(q - 1) * p : q * p, :] for q in range(1, D + 1)]
    R_bar = R[:, :J_N]
    R_bar_pinv = pseudoinverse(R_bar, tol_rel)
    A = []
    for q in range(1, D + 1):
        cols = [shift_column_selector(i, q, N, m, D) - 1 for i in range(1, J_N + 1)]
        A.append(R[:, cols] @ R_bar_pinv)
    return RealizationResult(SwitchedLinearSystem(A, B, C), N, n, fact)


def span_reachability_rank(sys: SwitchedLinearSystem, tol_rel: float = 1e-9) -> int:
    """Rank of the span of {A_v B_q e_j} over all words with |v| <= n - 1."""
    blocks = [matrix_product_along_word(sys, v) @ sys.B[q]
              for v in words_up_to(sys.n - 1, sys.D) for q in range(sys.D)]
    return _matrix_rank(np.hstack(blocks), tol_rel)


def observability_rank(sys: SwitchedLinearSystem, tol_rel: float = 1e-9) -> int:
    """Rank of the stacked {C_q A_v} over all words with |v| <= n - 1."""
    blocks = [sys.C[q] @ matrix_product_along_word(sys, v)
              for v in words_up_to(sys.n - 1, sys.D) for q in range(sys.D)]
    return _matrix_rank(np.vstack(blocks), tol_rel)


def is_minimal(sys: SwitchedLinearSystem, tol_rel: float = 1e-9) -> bool:
    """True when the system is both span-reachable and observable."""
    return (span_reachability_rank(sys, tol_rel) == sys.n
            and observability_rank(sys, tol_rel) == sys.n)


def _matrix_rank(M: np.ndarray, tol_rel: float) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol_rel * s[0]))
