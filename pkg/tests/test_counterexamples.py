"""Counterexample families and their divergence exhibits at desk scale."""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from wicknorms.counterexamples import (
    BoxFamilyConfig,
    EpsFamilyConfig,
    SequenceSpec,
    Verdict,
    appendix_contradiction_check,
    box_family_weighted_norm,
    build_box_family,
    build_eps_family,
    build_inf_family,
    build_p_lt2_family,
    matrix_element_divergence_probe,
    select_impossibility_probe,
    sequence_lemma_probe,
    theorem42_divergence,
    theorem43_divergence,
    theorem52_divergence,
)
from wicknorms.errors import DomainError, PreconditionError
from wicknorms.kernels import NormParams, WeightFunction, evaluate_kernel
from wicknorms.norms import component_norm, sequence_norm


def test_p_lt2_family_shape_and_finiteness():
    params = NormParams(lam=0.75, p=1.5, d=1, rho=1.0)
    kernel, vectors = build_p_lt2_family(1.5, params, 1, 1)
    comp = kernel.get(1, 1)
    assert comp.creation_factor.beta == pytest.approx(2.0 / 3.5)
    res = component_norm(comp, params, samples=60_000, seed=1)
    assert math.isfinite(res.value) and res.value > 0.0
    psi = vectors.get(1, 0)
    # square-integrability of the profile: beta doubles to 2p/(2+p) < 1
    psi_norm = component_norm(psi, NormParams(lam=0.0, p=2.0, d=1, rho=1.0),
                              samples=60_000, seed=2)
    assert math.isfinite(psi_norm.value)
    with pytest.raises(DomainError):
        build_p_lt2_family(2.0, params, 1, 1)
    with pytest.raises(DomainError):
        build_p_lt2_family(1.5, params, 0, 1)


def test_p_lt2_singular_exponent_at_p1():
    params = NormParams(lam=0.5, p=1.0, d=1, rho=1.0)
    kernel, _ = build_p_lt2_family(1.0, params, 1, 1)
    assert kernel.get(1, 1).creation_factor.beta == pytest.approx(2.0 / 3.0)


def test_matrix_element_probe_log_squared_growth():
    p = 1.5
    params = NormParams(lam=p / 2.0, p=p, d=1, rho=1.0)
    kernel, _ = build_p_lt2_family(p, params, 1, 1)
    deltas = np.logspace(-3, -12, 10)
    curve = matrix_element_divergence_probe(
        kernel, params, deltas, norm_samples=100_000, seed=3
    )
    assert curve.verdict is Verdict.DIVERGENCE_CONFIRMED
    assert curve.fitted_slope == pytest.approx(2.0, rel=0.10)
    assert curve.points[-1].value / curve.points[0].value >= 10.0
    norms = curve.extras["kernel_norm"]
    assert max(norms) / min(norms) <= 1.05
    # huge cutoff leaves a small finite value
    coarse = matrix_element_divergence_probe(
        kernel, params, [0.25, 0.2, 0.15], norm_samples=20_000, seed=3
    )
    assert coarse.points[0].value < curve.points[0].value
    assert coarse.verdict is Verdict.INCONCLUSIVE


def test_eps_family_structure_and_norm():
    config = EpsFamilyConfig(
        d=1, p=2.0, lam=1.0, rho=1.0, kappa=1.25, weight=WeightFunction.constant()
    )
    w, v = build_eps_family(0.25, config, n_max=48)
    assert all(m == 0 for (m, n) in w.components)
    assert all(n == 0 for (m, n) in v.components)
    # mirror identity at sampled points
    rng = np.random.default_rng(7)
    for _ in range(20):
        radii = list(rng.random(2) * 0.2)
        a = evaluate_kernel(w.get(0, 2), [], radii)
        b = evaluate_kernel(v.get(2, 0), radii, [])
        assert a == pytest.approx(b, rel=1e-12)
    res = sequence_norm(w, config.weight, config.norm_params(), max_index=48)
    zeta = float(mpmath.zeta(config.kappa))
    assert res.certified_finite
    assert res.partial + res.tail_lower <= zeta <= res.partial + res.tail_upper

    with pytest.raises(DomainError):
        bad = EpsFamilyConfig(
            d=3, p=2.0, lam=0.0, rho=1.0, kappa=1.25, weight=WeightFunction.constant()
        )
        build_eps_family(0.25, bad)


def test_theorem42_divergence_fast_branch_smoke():
    config = EpsFamilyConfig(
        d=3, p=2.0, lam=3.5, rho=1.0, kappa=1.25, weight=WeightFunction.geometric(0.5)
    )
    curve = theorem42_divergence(config, [100, 316, 1000, 3162], norm_check_indices=24)
    assert curve.parameter_name == "a"
    vals = [p.log10_value for p in curve.points]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    norms = curve.extras["family_norm"]
    assert max(norms) - min(norms) <= 1e-12 * norms[0]
    assert curve.predicted_slope == pytest.approx(0.5)


def test_theorem42_divergence_slow_branch():
    config = EpsFamilyConfig(
        d=1, p=2.0, lam=1.0, rho=1.0, kappa=1.25, weight=WeightFunction.constant()
    )
    curve = theorem42_divergence(config, [64], norm_check_indices=16)
    assert curve.parameter_name == "M_max"
    assert curve.predicted_slope == pytest.approx(2.0 * (2.0 - 1.25))
    assert curve.verdict is Verdict.DIVERGENCE_CONFIRMED


def test_inf_family_norm_and_growth():
    weight = WeightFunction.constant()
    w, v = build_inf_family(weight, d=1, lam=1.0, rho=1.0, n_max=64)
    params = NormParams(lam=1.0, p=math.inf, d=1, rho=1.0)
    res = sequence_norm(w, weight, params, max_index=64)
    target = math.pi**2 / 6.0
    assert res.partial + res.tail_lower <= target <= res.partial + res.tail_upper

    curve = theorem43_divergence(weight, d=1, lam=1.0, rho=1.0)
    assert curve.verdict is Verdict.DIVERGENCE_CONFIRMED
    assert curve.fitted_slope == pytest.approx(2.0, rel=0.10)
    # doubling the cutoff quadruples the partial sums
    by_param = {p.parameter: p.value for p in curve.points}
    assert by_param[2048] / by_param[1024] == pytest.approx(4.0, abs=0.4)

    with pytest.raises(PreconditionError):
        build_inf_family(WeightFunction.factorial(), d=1, lam=1.0, rho=1.0)
    with pytest.raises(PreconditionError):
        theorem43_divergence(WeightFunction.factorial(), d=1, lam=1.0, rho=1.0)


def test_theorem43_inner_divergence_at_threshold():
    # lam = (1 - d)/2 exactly: the contracted integral diverges logarithmically
    curve = theorem43_divergence(WeightFunction.constant(), d=3, lam=-1.0, rho=1.0)
    assert curve.parameter_name == "delta"
    assert curve.verdict is Verdict.DIVERGENCE_CONFIRMED
    assert curve.model == "log-linear"
    below = theorem43_divergence(WeightFunction.constant(), d=3, lam=-1.5, rho=1.0)
    assert below.verdict is Verdict.DIVERGENCE_CONFIRMED
    assert below.predicted_slope == pytest.approx(-1.0)


def test_sequence_lemma_probe_values():
    curve0 = sequence_lemma_probe(SequenceSpec.factorial(), kappa=0.0, n_max=25)
    by_n = {p.parameter: p.value for p in curve0.points}
    assert by_n[10] == pytest.approx(184756.0, rel=1e-10)
    assert curve0.verdict is Verdict.DIVERGENCE_CONFIRMED

    curve2 = sequence_lemma_probe(SequenceSpec.factorial(), kappa=2.0, n_max=25)
    by_n = {p.parameter: p.value for p in curve2.points}
    assert by_n[10] == pytest.approx(1847.56, rel=1e-10)
    assert curve2.verdict is Verdict.DIVERGENCE_CONFIRMED

    fast = sequence_lemma_probe(SequenceSpec.superexp(2.0), kappa=1.0, n_max=10)
    assert fast.verdict is Verdict.DIVERGENCE_CONFIRMED

    short = sequence_lemma_probe(
        SequenceSpec.tabulated([1.0, 2.0, 6.0, 24.0]), kappa=0.0, n_max=25
    )
    assert short.verdict is Verdict.INCONCLUSIVE


def test_appendix_contradiction_checks():
    spec = SequenceSpec.factorial()
    for K in (10.0, 1e3, 1e6):
        for kappa in (0.0, 2.0):
            report = appendix_contradiction_check(spec, kappa, K, n_max=25)
            assert report.violated
            assert report.first_violation_n is not None
            assert report.first_violation_n <= 20
    # the dyadic induction bound for K = 1e6 first fails beyond level 20
    report = appendix_contradiction_check(spec, 0.0, 1e6, n_max=25)
    assert report.premise_violation_n == 12
    assert report.dyadic_violation_level == 22


def test_box_family_terms_and_partials():
    config = BoxFamilyConfig(
        d=1, p=2.0, lam=1.0, rho=1.0, kappa=1.1, weight=WeightFunction.factorial()
    )
    curve = theorem52_divergence(config, m_values=list(range(1, 31)))
    by_m = {p.parameter: p.log10_value for p in curve.points}
    # single-sum term at M = 10 is C(20, 10) / 10^{2.2}
    term10 = math.comb(20, 10) / 10**2.2
    partial9 = sum(
        math.comb(2 * m, m) / m**2.2 for m in range(1, 10)
    )
    got = 10.0 ** (by_m[10] / 2.0) - partial9
    assert got == pytest.approx(term10, rel=1e-10)
    assert 10.0 ** by_m[30] > 1e6
    assert curve.verdict is Verdict.DIVERGENCE_CONFIRMED

    partial, lo, hi = box_family_weighted_norm(1.1, 10_000)
    z = float(mpmath.zeta(1.1)) ** 2
    assert lo <= z <= hi

    with pytest.raises(PreconditionError):
        theorem52_divergence(
            BoxFamilyConfig(
                d=1, p=2.0, lam=1.0, rho=1.0, kappa=1.1,
                weight=WeightFunction.geometric(0.5),
            )
        )


def test_box_family_normalized_component_norms():
    config = BoxFamilyConfig(
        d=1, p=2.0, lam=1.0, rho=1.0, kappa=1.1, weight=WeightFunction.factorial()
    )
    w, _ = build_box_family(config, max_index=4)
    params = config.norm_params()
    D = config.weight
    for (m, n) in [(1, 1), (2, 3), (4, 4)]:
        res = component_norm(w.get(m, n), params)
        want = math.exp(
            -D.log_weight(m) - D.log_weight(n)
            - config.kappa * (math.log(m) + math.log(n))
        )
        assert res.value == pytest.approx(want, rel=1e-12)


def test_probe_selection_covers_all_cells():
    slow = WeightFunction.geometric(0.5)
    fast = WeightFunction.factorial()
    assert select_impossibility_probe(1.0, 1.5, 1, slow) == "matrix-element"
    assert select_impossibility_probe(0.0, 2.0, 3, slow) == "inner-integral"
    assert select_impossibility_probe(3.5, 2.0, 3, slow) == "eps-family"
    assert select_impossibility_probe(1.0, math.inf, 1, slow) == "sup-family"
    assert select_impossibility_probe(1.0, 2.0, 1, fast) == "box-family"
    assert select_impossibility_probe(1.0, math.inf, 1, fast) == "box-family"
    with pytest.raises(PreconditionError):
        select_impossibility_probe(1.0, 2.0, 1, WeightFunction.tabulated([1.0, 2.0]))
