"""Component and sequence norms against closed forms, oracles, and each other."""

from __future__ import annotations

import math

import mpmath
import pytest

from wicknorms.errors import DomainError
from wicknorms.kernels import (
    BoxConstraint,
    KernelComponent,
    KernelSequence,
    NormParams,
    RadialFactor,
    Scope,
    SimplexConstraint,
    WeightFunction,
    ZetaTail,
)
from wicknorms.norms import (
    component_norm,
    component_norm_mc,
    eps_family_log_coefficient,
    normalized_counterexample_coefficient,
    sequence_norm,
    sup_search,
)
from wicknorms.specfun import log_gamma, sphere_area


def annihilation_family_member(n, coeff, alpha, bound, beta=0.0, center=0.0, d=1):
    return KernelComponent(
        m=0,
        n=n,
        coeff=coeff,
        creation_factor=RadialFactor(alpha=0.0),
        annihilation_factor=RadialFactor(alpha=alpha, beta=beta, singular_center=center),
        constraint=SimplexConstraint(bound=bound, scope=Scope.ANNIHILATION_SIDE),
        dimension=d,
    )


def test_eps_family_norm_closed_form():
    # one-sided monomial member: norm = c * bound^{m e / p}
    #   * [(O_{d-1} Gamma(e))^m / Gamma(m e + 1)]^{1/p} with e = p a - lam + d
    d, p, lam, eps, bound = 1, 2.0, 1.0, 0.5, 1.0
    alpha = (lam - d + eps) / p
    k = annihilation_family_member(1, 1.0, alpha, bound, d=d)
    res = component_norm(k, NormParams(lam=lam, p=p, d=d, rho=1.0))
    assert res.method == "closed-form"
    assert res.value == pytest.approx(2.0, rel=1e-12)

    # same identity at other indices, against the explicit formula
    for m in (2, 3, 5):
        k = annihilation_family_member(m, 0.7, alpha, 0.5, d=d)
        res = component_norm(k, NormParams(lam=lam, p=p, d=d))
        want = 0.7 * math.exp(
            (
                m * eps * math.log(0.5)
                + m * (math.log(sphere_area(d)) + log_gamma(eps))
                - log_gamma(m * eps + 1.0)
            )
            / p
        )
        assert res.value == pytest.approx(want, rel=1e-12)


def test_sup_norm_of_matched_exponent_family():
    lam = 1.5
    c = 1.0 / (2.0 * 4.0)  # 1 / (D(n) n^2) with D constant, n = 2
    k = annihilation_family_member(2, c, lam, 0.5)
    res = component_norm(k, NormParams(lam=lam, p=math.inf, d=1))
    assert res.value == pytest.approx(c, rel=1e-12)


def test_divergent_norm_reports_reason():
    k = KernelComponent(
        m=1,
        n=0,
        coeff=3.0,
        creation_factor=RadialFactor(alpha=0.0),
        annihilation_factor=RadialFactor(alpha=0.0),
        constraint=SimplexConstraint(bound=0.5, scope=Scope.CREATION_SIDE),
    )
    res = component_norm(k, NormParams(lam=1.0, p=1.0, d=1))
    assert res.is_divergent
    assert res.value == math.inf
    assert "p*alpha - lambda + d" in res.divergent_reason


def test_coefficient_inverse_of_norm():
    got = math.exp(
        eps_family_log_coefficient(
            1, 0.5, bound=1.0, p=2.0, d=1,
            weight=WeightFunction.constant(), kappa=1.25,
        )
    )
    assert got == pytest.approx(0.5, rel=1e-12)


def test_weighted_norm_is_kappa_power():
    params = NormParams(lam=2.0, p=2.0, d=3, rho=1.0)
    D = WeightFunction.geometric(0.5)
    kappa = 1.25
    eps = 0.125
    alpha = (params.lam - params.d + eps) / params.p
    for m in (1, 2, 7):
        c_m = normalized_counterexample_coefficient(m, eps, params, D, kappa)
        k = annihilation_family_member(
            m, c_m, alpha, params.rho / 2.0, d=params.d
        )
        res = component_norm(k, params)
        assert D.weight(m) * res.value == pytest.approx(m**-kappa, rel=1e-12)


def test_coefficient_kappa_domain():
    with pytest.raises(DomainError):
        eps_family_log_coefficient(
            1, 0.5, bound=1.0, p=2.0, d=1,
            weight=WeightFunction.constant(), kappa=0.9,
        )
    with pytest.raises(DomainError):
        eps_family_log_coefficient(
            1, 0.5, bound=1.0, p=2.0, d=1,
            weight=WeightFunction.constant(), kappa=1.6,
        )


def build_eps_sequence(eps, params, D, kappa, n_max):
    alpha = (params.lam - params.d + eps) / params.p
    seq = KernelSequence(zeta_tail=ZetaTail(exponent=kappa, prefactor=D.weight(0)))
    for n in range(1, n_max + 1):
        c_n = normalized_counterexample_coefficient(n, eps, params, D, kappa)
        seq.add(
            annihilation_family_member(n, c_n, alpha, params.rho / 2.0, d=params.d)
        )
    return seq


def test_sequence_norm_bracket_contains_zeta():
    params = NormParams(lam=1.0, p=2.0, d=1, rho=1.0)
    D = WeightFunction.constant()
    kappa = 1.25
    seq = build_eps_sequence(0.5, params, D, kappa, n_max=64)
    res = sequence_norm(seq, D, params, max_index=64)
    assert res.certified_finite
    zeta = float(mpmath.zeta(kappa))
    assert res.partial + res.tail_lower <= zeta <= res.partial + res.tail_upper
    assert res.partial == pytest.approx(
        sum(m**-kappa for m in range(1, 65)), rel=1e-12
    )


def test_sequence_norm_eps_independence():
    params = NormParams(lam=2.5, p=2.0, d=2, rho=1.0)
    D = WeightFunction.geometric(0.5)
    kappa = 1.25
    baseline = None
    for eps in (0.5, 1.0 / 8, 1.0 / 64, 1.0 / 512):
        seq = build_eps_sequence(eps, params, D, kappa, n_max=24)
        res = sequence_norm(seq, D, params, max_index=24)
        if baseline is None:
            baseline = res.partial
        assert res.partial == pytest.approx(baseline, rel=1e-12)


def test_sequence_norm_empty():
    params = NormParams(lam=1.0, p=2.0, d=1)
    res = sequence_norm(KernelSequence(), WeightFunction.constant(), params, 10)
    assert res.partial == 0.0
    assert res.certified_finite


@pytest.mark.parametrize(
    "m,n,alpha_c,alpha_a,constraint",
    [
        (1, 1, 0.8, 1.2, SimplexConstraint(bound=0.6, scope=Scope.BOTH_SIDES_JOINT)),
        (2, 0, 0.5, 0.0, SimplexConstraint(bound=0.8, scope=Scope.CREATION_SIDE)),
        (2, 2, 1.0, 0.7, SimplexConstraint(bound=0.5, scope=Scope.EACH_SIDE_SEPARATE)),
        (1, 2, 0.9, 0.9, BoxConstraint(bound=0.4)),
    ],
)
def test_closed_form_matches_mc(m, n, alpha_c, alpha_a, constraint):
    params = NormParams(lam=1.0, p=2.0, d=1)
    k = KernelComponent(
        m=m,
        n=n,
        coeff=1.4,
        creation_factor=RadialFactor(alpha=alpha_c),
        annihilation_factor=RadialFactor(alpha=alpha_a),
        constraint=constraint,
    )
    closed = component_norm(k, params)
    assert closed.method == "closed-form"
    mc = component_norm_mc(k, params, samples=400_000, seed=5)
    # the box case is sampled exactly (zero variance), hence the float slack
    assert abs(mc.mc.value - closed.value) <= 4.0 * mc.mc.std_error + 1e-12 * closed.value


def test_singular_family_norm_finite_by_mc():
    # the p < 2 construction: per-coordinate singular exponent 2p/(2+p) < 1
    p, lam, rho = 1.5, 1.0, 1.0
    params = NormParams(lam=lam, p=p, d=1, rho=rho)
    k = KernelComponent(
        m=1,
        n=1,
        coeff=1.0,
        creation_factor=RadialFactor(alpha=lam / p, beta=2 / (2 + p), singular_center=rho / 2),
        annihilation_factor=RadialFactor(alpha=lam / p, beta=2 / (2 + p), singular_center=rho / 2),
        constraint=SimplexConstraint(bound=rho, scope=Scope.EACH_SIDE_SEPARATE),
    )
    res = component_norm(k, params, samples=120_000, seed=3)
    assert res.method == "monte-carlo"
    assert math.isfinite(res.value) and res.value > 0.0
    # the defining integral factorizes at m = n = 1, d = 1: closed-form check
    s = 1.0 - p * 2 / (2 + p)
    one_coord = 2.0 * ((rho / 2) ** s + (1 - rho / 2) ** s) / s
    want = (one_coord * one_coord) ** (1 / p)
    assert abs(res.mc.value - want) <= 4.0 * res.mc.std_error


def test_singular_norm_divergence_marker():
    params = NormParams(lam=1.0, p=3.0, d=1)
    k = KernelComponent(
        m=1,
        n=0,
        coeff=1.0,
        creation_factor=RadialFactor(alpha=1.0 / 3.0, beta=0.5, singular_center=0.5),
        annihilation_factor=RadialFactor(alpha=0.0),
        constraint=SimplexConstraint(bound=1.0, scope=Scope.CREATION_SIDE),
    )
    res = component_norm(k, params)
    assert res.is_divergent
    assert "p*beta" in res.divergent_reason


def test_homogeneity_in_coefficient():
    params = NormParams(lam=1.0, p=2.0, d=1)
    base = annihilation_family_member(2, 1.0, 0.75, 0.5)
    scaled = annihilation_family_member(2, 3.5, 0.75, 0.5)
    a = component_norm(base, params).value
    b = component_norm(scaled, params).value
    assert b == pytest.approx(3.5 * a, rel=1e-12)


def test_sup_search_never_exceeds_analytic_and_hits_matched_corner():
    lam = 1.5
    params = NormParams(lam=lam, p=math.inf, d=1)
    matched = annihilation_family_member(2, 0.25, lam, 0.5)
    analytic = component_norm(matched, params)
    grid = sup_search(matched, params, points=10_000)
    assert grid.value <= analytic.value * (1 + 1e-12)
    assert grid.value == pytest.approx(analytic.value, abs=1e-6)

    steep = annihilation_family_member(2, 1.0, lam + 0.7, 0.5)
    analytic = component_norm(steep, params)
    grid = sup_search(steep, params, points=10_000)
    assert grid.value <= analytic.value * (1 + 1e-12)
