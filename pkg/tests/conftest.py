"""Shared systems and generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from switchid import (ModelMarkovSource, SwitchedLinearSystem, build_hankel,
                      check_l1_stability_sufficient, check_reversible, is_minimal)


def scalar_system() -> SwitchedLinearSystem:
    """The two-mode scalar workhorse: A=(0.4, 0.3), B=(1, 2), C=(1, 3)."""
    return SwitchedLinearSystem(A=[0.4, 0.3], B=[1.0, 2.0], C=[1.0, 3.0])


def scalar_reversible() -> SwitchedLinearSystem:
    return SwitchedLinearSystem(A=[2.0, 0.5], B=[1.0, 0.5], C=[1.0, 1.0])


def zero_system(n=1, m=1, p=1, D=2) -> SwitchedLinearSystem:
    return SwitchedLinearSystem(
        A=np.zeros((D, n, n)), B=np.zeros((D, n, m)), C=np.ones((D, p, n)))


def random_stable_lss(rng: np.random.Generator, n: int, m: int, p: int, D: int,
                      margin: float = 0.9) -> SwitchedLinearSystem:
    """Random system with every ||A_q||_2 below margin/D (hence l1-stable)."""
    A = []
    for _ in range(D):
        G = rng.standard_normal((n, n))
        scale = margin / D * rng.uniform(0.5, 1.0)
        A.append(G * (scale / np.linalg.norm(G, 2)))
    B = rng.standard_normal((D, n, m))
    C = rng.standard_normal((D, p, n))
    sys = SwitchedLinearSystem(A, list(B), list(C))
    assert check_l1_stability_sufficient(sys)
    return sys


def random_minimal_stable(rng: np.random.Generator, n: int, m: int, p: int, D: int,
                          cond_floor: float = 1e-6) -> SwitchedLinearSystem:
    """Stable random system, redrawn until minimal with a well-separated
    Hankel spectrum (keeps rank decisions unambiguous in round-trip tests)."""
    for _ in range(50):
        sys = random_stable_lss(rng, n, m, p, D)
        if not is_minimal(sys):
            continue
        H = build_hankel(ModelMarkovSource(sys), n, n + 1)
        sv = np.linalg.svd(H.H, compute_uv=False)
        if sv[n - 1] > cond_floor * sv[0]:
            return sys
    raise AssertionError("could not draw a well-conditioned minimal system")


def random_reversible_lss(rng: np.random.Generator, n: int, m: int, p: int, D: int,
                          smin: float = 0.5, smax: float = 1.4) -> SwitchedLinearSystem:
    """Random system whose mode matrices have singular values in [smin, smax]."""
    A = []
    for _ in range(D):
        U = np.linalg.qr(rng.standard_normal((n, n)))[0]
        V = np.linalg.qr(rng.standard_normal((n, n)))[0]
        A.append(U @ np.diag(rng.uniform(smin, smax, n)) @ V)
    B = rng.standard_normal((D, n, m))
    C = rng.standard_normal((D, p, n))
    sys = SwitchedLinearSystem(A, list(B), list(C))
    assert check_reversible(sys)
    return sys


def random_minimal_reversible(rng: np.random.Generator, n: int, m: int, p: int,
                              D: int) -> SwitchedLinearSystem:
    for _ in range(50):
        sys = random_reversible_lss(rng, n, m, p, D)
        if is_minimal(sys):
            H = build_hankel(ModelMarkovSource(sys), max(n - 1, 0), n)
            sv = np.linalg.svd(H.H, compute_uv=False)
            if sv[n - 1] > 1e-6 * sv[0]:
                return sys
    raise AssertionError("could not draw a minimal reversible system")


@pytest.fixture
def scalar():
    return scalar_system()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
