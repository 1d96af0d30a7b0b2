import numpy as np
import pytest

from conftest import random_stable_lss, scalar_system, zero_system
from switchid import (HybridWord, ModelMarkovSource, OracleMarkovSource,
                      TabulatedMarkovSource, combined_markov, gcr_evaluate, io_map,
                      markov_distance, markov_from_model, markov_from_oracle,
                      simulate, words_up_to)


def test_markov_from_model_examples(scalar):
    assert markov_from_model(scalar, 1, (), 2) == pytest.approx(np.array([[3.0]]))
    assert markov_from_model(scalar, 2, (), 1) == pytest.approx(np.array([[2.0]]))
    assert markov_from_model(scalar, 1, (2,), 1) == pytest.approx(np.array([[0.3]]))


def test_markov_from_oracle_examples(scalar):
    f = io_map(scalar)
    assert markov_from_oracle(f, 1, (), 2, m=1) == pytest.approx(np.array([[3.0]]))
    # C_2 A_1 A_2 B_1 = 3 * 0.4 * 0.3 * 1; cross-checked against the model form
    got = markov_from_oracle(f, 1, (2, 1), 2, m=1)
    assert got == pytest.approx(np.array([[0.36]]))
    assert got == pytest.approx(markov_from_model(scalar, 1, (2, 1), 2))


def test_markov_oracle_zero_system():
    sys = zero_system()
    f = io_map(sys)
    for v in [(), (1,), (2, 1)]:
        assert np.all(markov_from_oracle(f, 1, v, 2, m=1) == 0.0)


def test_oracle_model_agreement_exhaustive(scalar, rng):
    """Exhaustive at D = 2 up to |v| = 4, multi-channel random system too."""
    sysm = random_stable_lss(rng, n=3, m=2, p=2, D=2)
    for sys in (scalar, sysm):
        model = ModelMarkovSource(sys)
        oracle = OracleMarkovSource(io_map(sys), sys.p, sys.m, sys.D)
        assert markov_distance(model, oracle, depth=4) <= 1e-12


def test_source_memoizes(scalar):
    calls = []
    f = io_map(scalar)

    def counting(w):
        calls.append(len(w))
        return f(w)

    src = OracleMarkovSource(counting, 1, 1, 2)
    a = src(1, (2,), 1)
    b = src(1, (2,), 1)
    assert np.array_equal(a, b)
    assert len(calls) == 1


def test_source_rejects_bad_modes(scalar):
    src = ModelMarkovSource(scalar)
    with pytest.raises(ValueError):
        src(0, (), 1)
    with pytest.raises(ValueError):
        src(1, (3,), 1)


def test_combined_markov_examples(scalar):
    src = ModelMarkovSource(scalar)
    assert combined_markov(src, ()).M == pytest.approx(np.array([[1.0, 2.0],
                                                                 [3.0, 6.0]]))
    assert combined_markov(src, (1,)).M == pytest.approx(np.array([[0.4, 0.8],
                                                                   [1.2, 2.4]]))
    assert np.linalg.matrix_rank(combined_markov(src, ()).M) == 1
    zsrc = ModelMarkovSource(zero_system())
    assert np.all(combined_markov(zsrc, (1, 2)).M == 0.0)


def test_combined_markov_block_layout(rng):
    # block row = terminal mode, block column = initial mode
    sys = random_stable_lss(rng, n=2, m=2, p=3, D=2)
    src = ModelMarkovSource(sys)
    M = combined_markov(src, (2,)).M
    for q in (1, 2):
        for q0 in (1, 2):
            blk = M[(q - 1) * 3 : q * 3, (q0 - 1) * 2 : q0 * 2]
            assert np.array_equal(blk, src(q0, (2,), q))


def test_gcr_examples(scalar):
    src = ModelMarkovSource(scalar)
    assert gcr_evaluate(src, HybridWord.from_letters([(1, 4.0)])) == pytest.approx([0.0])
    w2 = HybridWord.from_letters([(1, 2.0), (2, 5.0)])
    assert gcr_evaluate(src, w2) == pytest.approx([6.0])
    w3 = HybridWord.from_letters([(1, 1.0), (2, 1.0), (1, 1.0)])
    assert gcr_evaluate(src, w3) == pytest.approx([2.3])


def test_gcr_matches_simulation_random(rng):
    for _ in range(30):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 3))
        p = int(rng.integers(1, 3))
        D = int(rng.integers(1, 4))
        sys = random_stable_lss(rng, n, m, p, D)
        src = ModelMarkovSource(sys)
        T = int(rng.integers(1, 21))
        w = HybridWord(rng.integers(1, D + 1, size=T), rng.standard_normal((T, m)))
        ref = simulate(sys, w).outputs[-1]
        assert np.max(np.abs(gcr_evaluate(src, w) - ref)) <= 1e-10


def test_markov_distance_examples(scalar):
    src = ModelMarkovSource(scalar)
    assert markov_distance(src, src, 3) == 0.0
    assert markov_distance(src, ModelMarkovSource(zero_system()), 0) == pytest.approx(6.0)
    oracle = OracleMarkovSource(io_map(scalar), 1, 1, 2)
    assert markov_distance(src, oracle, 3) <= 1e-12


def test_markov_distance_dimension_mismatch(scalar, rng):
    other = ModelMarkovSource(random_stable_lss(rng, 2, 2, 1, 2))
    with pytest.raises(ValueError):
        markov_distance(ModelMarkovSource(scalar), other, 1)


def test_tabulated_source_missing_word_is_error(scalar):
    model = ModelMarkovSource(scalar)
    table = {(q0, v, q): model(q0, v, q)
             for v in words_up_to(1, 2) for q0 in (1, 2) for q in (1, 2)}
    tab = TabulatedMarkovSource(table, 1, 1, 2)
    assert np.array_equal(tab(1, (2,), 1), model(1, (2,), 1))
    with pytest.raises(KeyError):
        tab(1, (2, 2), 1)
