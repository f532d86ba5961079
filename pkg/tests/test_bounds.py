"""Certificates for the componentwise and one-sided product bounds."""

from __future__ import annotations

import math

import pytest

from wicknorms.bounds import (
    componentwise_bound_check,
    factorial_submult_check,
    maximal_index_bound,
    random_one_sided_pair,
    random_small_pair,
)
from wicknorms.errors import DomainError, UnsupportedFamilyError
from wicknorms.kernels import (
    KernelComponent,
    KernelSequence,
    NormParams,
    RadialFactor,
    Scope,
    SimplexConstraint,
)
from wicknorms.wick import contributing_terms


def single_pair_sequences(mu=0.5, rho=1.0):
    lam = 3.0 + 2.0 * mu
    alpha = (lam - 1.0) / 2.0 + 0.5
    w = KernelSequence()
    w.add(
        KernelComponent(
            m=0, n=1, coeff=1.0,
            creation_factor=RadialFactor(alpha=0.0),
            annihilation_factor=RadialFactor(alpha=alpha),
            constraint=SimplexConstraint(bound=rho / 2, scope=Scope.ANNIHILATION_SIDE),
        )
    )
    v = KernelSequence()
    v.add(
        KernelComponent(
            m=1, n=0, coeff=1.0,
            creation_factor=RadialFactor(alpha=alpha),
            annihilation_factor=RadialFactor(alpha=0.0),
            constraint=SimplexConstraint(bound=rho / 2, scope=Scope.CREATION_SIDE),
        )
    )
    return w, v


def test_componentwise_bound_single_pair():
    w, v = single_pair_sequences()
    cert = componentwise_bound_check(
        w, v, 0, 0, mu=0.5, xi=0.5, rho=1.0, samples=30_000, seed=1
    )
    assert cert.holds
    assert cert.lhs > 0.0


def test_componentwise_bound_zero_sequence():
    w, v = single_pair_sequences()
    empty = KernelSequence()
    cert = componentwise_bound_check(
        empty, v, 0, 0, mu=0.5, xi=0.5, rho=1.0, samples=2_000, seed=1
    )
    assert cert.lhs == 0.0
    assert cert.rhs == 0.0
    assert cert.holds
    assert cert.margin == 0.0


def test_componentwise_bound_randomized_batch():
    nonzero = 0
    for seed in range(8):
        w, v = random_small_pair(seed, lam=4.0)
        populated = [
            (M, N)
            for M in range(7)
            for N in range(7)
            if contributing_terms(w, v, M, N)
        ]
        for (M, N) in populated[:3]:
            cert = componentwise_bound_check(
                w, v, M, N, mu=0.5, xi=0.5, rho=1.0, samples=20_000, seed=seed
            )
            assert cert.holds, (seed, M, N, cert)
            if cert.lhs > 0.0:
                nonzero += 1
    assert nonzero >= 5  # the batch must actually exercise the estimate


def test_componentwise_bound_validation():
    w, v = single_pair_sequences()
    with pytest.raises(DomainError):
        componentwise_bound_check(w, v, 0, 0, mu=-1.0, xi=0.5, rho=1.0)
    big = KernelSequence()
    big.add(
        KernelComponent(
            m=4, n=0, coeff=1.0,
            creation_factor=RadialFactor(alpha=2.0),
            annihilation_factor=RadialFactor(alpha=0.0),
            constraint=SimplexConstraint(bound=0.5, scope=Scope.CREATION_SIDE),
        )
    )
    with pytest.raises(UnsupportedFamilyError):
        componentwise_bound_check(big, v, 0, 0, mu=0.5, xi=0.5, rho=1.0)


def test_factorial_submult_single_members():
    w, v = single_pair_sequences()
    cert = factorial_submult_check(w, v, lam=1.0, samples=30_000, seed=2)
    assert cert.holds


def test_factorial_submult_empty_left():
    _, v = single_pair_sequences()
    cert = factorial_submult_check(KernelSequence(), v, lam=1.0, samples=2_000, seed=0)
    assert cert.lhs == 0.0
    assert cert.holds


def test_factorial_submult_randomized_batch():
    for seed in range(6):
        w, v = random_one_sided_pair(seed, lam=1.0)
        cert = factorial_submult_check(w, v, lam=1.0, samples=15_000, seed=seed)
        assert cert.holds, (seed, cert)


def test_factorial_submult_shape_guard():
    w, v = single_pair_sequences()
    with pytest.raises(UnsupportedFamilyError):
        factorial_submult_check(v, v, lam=1.0)
    with pytest.raises(DomainError):
        factorial_submult_check(w, v, lam=0.5)


def test_one_sided_collapse_structural():
    w, v = random_one_sided_pair(3, lam=1.0)
    for M in range(v.max_index() + 1):
        for N in range(w.max_index() + 1):
            for (m, n, q, _, _) in contributing_terms(w, v, M, N):
                assert (m, n) == (M, N)


def test_maximal_index_bookkeeping_k1():
    w, v = single_pair_sequences()
    result = maximal_index_bound(w, v, K=1, mu=0.5, xi=0.5, rho=1.0,
                                 samples=10_000, seed=0)
    assert result.populated_ok
    assert result.certificate.holds
    # 2^{4K} multiplier shows up exactly in the rhs
    assert result.certificate.rhs == pytest.approx(
        16.0 * math.exp(1.0)
        * 1.0 ** 3
        * _weighted_norm(w) * _weighted_norm(v),
        rel=1e-10,
    )


def _weighted_norm(seq):
    from wicknorms.kernels import WeightFunction
    from wicknorms.norms import sequence_norm

    params = NormParams(lam=4.0, p=2.0, d=1, rho=1.0)
    return sequence_norm(seq, WeightFunction.geometric(0.5), params, 3).partial


def test_maximal_index_random_k2():
    w, v = random_small_pair(11, lam=4.0, max_index=2)
    result = maximal_index_bound(w, v, K=2, mu=0.5, xi=0.5, rho=1.0,
                                 samples=15_000, seed=5)
    assert result.populated_ok
    assert result.certificate.holds


def test_multiplier_at_k3():
    assert 2 ** (4 * 3) == 4096
