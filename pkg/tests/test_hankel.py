import numpy as np
import pytest

from conftest import random_minimal_stable, random_stable_lss, zero_system
from switchid import (ModelMarkovSource, build_hankel, combined_markov, hankel_rank,
                      word_at_index, words_up_to)


def test_smallest_section_is_combined_markov(scalar):
    src = ModelMarkovSource(scalar)
    H = build_hankel(src, 0, 0)
    assert H.H == pytest.approx(np.array([[1.0, 2.0], [3.0, 6.0]]))
    assert np.array_equal(H.H, combined_markov(src, ()).M)


def test_depth_one_section_rank(scalar):
    H = build_hankel(ModelMarkovSource(scalar), 1, 1)
    assert H.H.shape == (6, 6)
    assert hankel_rank(H) == 1


def test_zero_system_section():
    H = build_hankel(ModelMarkovSource(zero_system()), 2, 1)
    assert H.H.shape == (7 * 1 * 2, 3 * 1 * 2)
    assert np.all(H.H == 0.0)
    assert hankel_rank(H) == 0


def test_block_word_consistency(rng):
    """Block (i, j) must equal M(v_j v_i): column word concatenated first."""
    sys = random_stable_lss(rng, n=2, m=2, p=1, D=2)
    src = ModelMarkovSource(sys)
    H = build_hankel(src, 1, 2)
    for i in range(1, H.n_block_rows + 1):
        vi = word_at_index(i, 2)
        for j in range(1, H.n_block_cols + 1):
            vj = word_at_index(j, 2)
            expect = combined_markov(src, vj + vi).M
            assert np.array_equal(H.block(i, j), expect)


def test_block_order_is_asymmetric(rng):
    # v_j v_i and v_i v_j differ for non-commuting systems; guard the convention
    sys = random_stable_lss(rng, n=3, m=1, p=1, D=2)
    src = ModelMarkovSource(sys)
    H = build_hankel(src, 1, 1)
    wrong = combined_markov(src, word_at_index(2, 2) + word_at_index(3, 2)).M
    right = combined_markov(src, word_at_index(3, 2) + word_at_index(2, 2)).M
    assert np.array_equal(H.block(2, 3), right)
    assert not np.allclose(right, wrong)


def test_rank_examples(rng):
    assert hankel_rank(np.zeros((4, 6))) == 0
    sys = random_minimal_stable(rng, n=3, m=1, p=1, D=2)
    H = build_hankel(ModelMarkovSource(sys), 3, 3)
    assert hankel_rank(H) == 3


def test_rank_monotone_in_depth(rng):
    for _ in range(5):
        n = int(rng.integers(1, 4))
        sys = random_stable_lss(rng, n, 1, 1, 2)
        src = ModelMarkovSource(sys)
        r_small = hankel_rank(build_hankel(src, n, n))
        r_big = hankel_rank(build_hankel(src, n + 1, n + 1))
        assert r_small <= r_big <= n


def test_rank_tol_must_be_positive():
    with pytest.raises(ValueError):
        hankel_rank(np.eye(2), tol_rel=0.0)


def test_oversized_section_rejected(scalar):
    with pytest.raises(ValueError):
        build_hankel(ModelMarkovSource(scalar), 12, 12)


def test_queried_depth_is_bounded(scalar):
    """Assembly may touch only words of middle length <= L + K."""
    src = ModelMarkovSource(scalar)
    build_hankel(src, 1, 2)
    assert max(len(v) for (_, v, _) in src._cache) <= 3
    assert set(len(v) for v in words_up_to(3, 2)) == {0, 1, 2, 3}
