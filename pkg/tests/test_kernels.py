"""Kernel data model: evaluation, weights, classification, serialization."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wicknorms.errors import DomainError
from wicknorms.kernels import (
    BoxConstraint,
    KernelComponent,
    KernelSequence,
    NormParams,
    RadialFactor,
    Scope,
    SimplexConstraint,
    WeightClass,
    WeightFunction,
    classify_weight,
    constraint_allows,
    evaluate_kernel,
    norm_params_from_dict,
    norm_params_to_dict,
    sequence_from_json,
    sequence_to_json,
    weight_from_dict,
    weight_to_dict,
)


def flat(alpha=0.0):
    return RadialFactor(alpha=alpha)


def test_constant_kernel_inside_and_outside_support():
    k = KernelComponent(
        m=1,
        n=0,
        coeff=2.0,
        creation_factor=flat(),
        annihilation_factor=flat(),
        constraint=SimplexConstraint(bound=0.5, scope=Scope.CREATION_SIDE),
    )
    assert evaluate_kernel(k, [0.3], []) == 2.0
    assert evaluate_kernel(k, [0.7], []) == 0.0


def test_singular_family_pointwise_value():
    # single-coordinate member of the p < 2 construction at p = 1.5, lam = 1
    p, lam, rho = 1.5, 1.0, 1.0
    k = KernelComponent(
        m=1,
        n=0,
        coeff=1.0,
        creation_factor=RadialFactor(
            alpha=lam / p, beta=2.0 / (2.0 + p), singular_center=rho / 2.0
        ),
        annihilation_factor=flat(),
        constraint=SimplexConstraint(bound=rho, scope=Scope.CREATION_SIDE),
    )
    r = 0.25
    want = r ** (lam / p) * abs(rho / 2.0 - r) ** (-2.0 / (2.0 + p))
    assert evaluate_kernel(k, [r], []) == pytest.approx(want, rel=1e-14)
    # the singular sphere itself maps to the inf sentinel
    assert evaluate_kernel(k, [rho / 2.0], []) == math.inf


def test_kernel_argument_validation():
    k = KernelComponent(
        m=1,
        n=1,
        coeff=1.0,
        creation_factor=flat(1.0),
        annihilation_factor=flat(1.0),
        constraint=BoxConstraint(bound=1.0),
    )
    with pytest.raises(DomainError):
        evaluate_kernel(k, [0.1, 0.2], [0.1])
    with pytest.raises(DomainError):
        evaluate_kernel(k, [1.5], [0.1])


@settings(max_examples=50, deadline=None)
@given(
    radii=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=4),
    perm_seed=st.integers(0, 10_000),
)
def test_permutation_symmetry(radii, perm_seed):
    m = len(radii)
    k = KernelComponent(
        m=m,
        n=0,
        coeff=1.3,
        creation_factor=RadialFactor(alpha=0.7),
        annihilation_factor=flat(),
        constraint=SimplexConstraint(bound=1.0, scope=Scope.CREATION_SIDE),
    )
    rng = np.random.default_rng(perm_seed)
    shuffled = list(rng.permutation(radii))
    a = evaluate_kernel(k, radii, [])
    b = evaluate_kernel(k, shuffled, [])
    assert a == pytest.approx(b, rel=1e-12) or (a == b == 0.0)


@pytest.mark.parametrize(
    "constraint",
    [
        SimplexConstraint(bound=0.6, scope=Scope.CREATION_SIDE),
        SimplexConstraint(bound=0.6, scope=Scope.ANNIHILATION_SIDE),
        SimplexConstraint(bound=0.6, scope=Scope.BOTH_SIDES_JOINT),
        SimplexConstraint(bound=0.6, scope=Scope.EACH_SIDE_SEPARATE),
        BoxConstraint(bound=0.35),
    ],
)
def test_support_indicator_matches_predicate(constraint):
    k = KernelComponent(
        m=2,
        n=1,
        coeff=1.0,
        creation_factor=flat(),
        annihilation_factor=flat(),
        constraint=constraint,
    )
    rng = np.random.default_rng(42)
    for _ in range(300):
        cr = list(rng.random(2))
        ar = list(rng.random(1))
        val = evaluate_kernel(k, cr, ar)
        inside = constraint_allows(constraint, cr, ar)
        assert (val != 0.0) == inside


def test_weight_ratios_exact():
    geo = WeightFunction.geometric(0.5)
    assert all(geo.ratio(M) == pytest.approx(0.5, rel=1e-15) for M in range(50))
    fac = WeightFunction.factorial()
    for M in range(30):
        assert fac.ratio(M) == pytest.approx(1.0 / (M + 1), rel=1e-12)
    assert fac.weight(5) == pytest.approx(120.0, rel=1e-12)


def test_classify_weight_cases():
    geo = classify_weight(WeightFunction.geometric(0.5))
    assert geo.category is WeightClass.SLOW_RATIO
    assert geo.liminf_ratio == pytest.approx(0.5)

    fac = classify_weight(WeightFunction.factorial())
    assert fac.category is WeightClass.FAST_RATIO

    pw = classify_weight(WeightFunction.power(2.0))
    assert pw.category is WeightClass.SLOW_RATIO
    assert pw.liminf_ratio == pytest.approx(1.0, abs=0.2)


def test_classify_tabulated():
    short = WeightFunction.tabulated([1.0, 2.0, 3.0])
    assert classify_weight(short).category is WeightClass.UNDECIDED
    geometric_like = WeightFunction.tabulated([2.0**k for k in range(16)])
    assert classify_weight(geometric_like).category is WeightClass.SLOW_RATIO
    factorial_like = WeightFunction.tabulated(
        [math.factorial(k) for k in range(16)]
    )
    assert classify_weight(factorial_like).category is WeightClass.FAST_RATIO


def test_sequence_bookkeeping():
    seq = KernelSequence()
    k = KernelComponent(
        m=0,
        n=2,
        coeff=1.0,
        creation_factor=flat(),
        annihilation_factor=flat(0.5),
        constraint=SimplexConstraint(bound=0.5, scope=Scope.ANNIHILATION_SIDE),
    )
    seq.add(k)
    assert seq.get(0, 2) is k
    assert seq.get(1, 1) is None
    assert seq.max_index() == 2
    with pytest.raises(DomainError):
        seq.add(k)


def test_index_cap():
    with pytest.raises(DomainError):
        KernelComponent(
            m=10**6 + 1,
            n=0,
            coeff=1.0,
            creation_factor=flat(),
            annihilation_factor=flat(),
            constraint=BoxConstraint(bound=1.0),
        )


def test_json_round_trip():
    seq = KernelSequence()
    seq.add(
        KernelComponent(
            m=1,
            n=2,
            coeff=0.25,
            creation_factor=RadialFactor(alpha=1.5, beta=0.4, singular_center=0.5),
            annihilation_factor=RadialFactor(alpha=0.5),
            constraint=SimplexConstraint(bound=0.5, scope=Scope.EACH_SIDE_SEPARATE),
            dimension=3,
        )
    )
    back = sequence_from_json(sequence_to_json(seq))
    assert back.components == seq.components

    for D in [
        WeightFunction.geometric(0.25),
        WeightFunction.factorial(),
        WeightFunction.power(-1.5),
        WeightFunction.constant(),
        WeightFunction.tabulated([1.0, 3.0, 9.0]),
    ]:
        assert weight_from_dict(weight_to_dict(D)) == D

    for params in [
        NormParams(lam=3.5, p=2.0, d=3, rho=1.0),
        NormParams(lam=0.0, p=math.inf, d=1, rho=0.5),
    ]:
        assert norm_params_from_dict(norm_params_to_dict(params)) == params


def test_norm_params_validation():
    with pytest.raises(DomainError):
        NormParams(lam=1.0, p=0.5, d=1)
    with pytest.raises(DomainError):
        NormParams(lam=1.0, p=2.0, d=0)
    with pytest.raises(DomainError):
        NormParams(lam=1.0, p=2.0, d=1, rho=1.5)
