"""The Wick-ordered composition of kernel sequences under the indicator cutoff.

The (M, N) component of the composition of two sequences is a triple sum over
(m, n, q) of binomially weighted cross terms in which q contracted momenta are
integrated out.  Two closed situations drive everything here:

* one-sided factors (an annihilation-only left factor against a creation-only
  right factor) collapse the (m, n) double sum, leaving a q-indexed series
  whose contracted integral is a simplex power integral with the coupling
  variable t = min over the support bounds of the remaining radial budgets;

* general small-index products of monomial simplex kernels, where the
  contracted integral is still closed form pointwise and only the outer
  momentum integral needs Monte Carlo.

All series coefficients are kept in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import json
import numpy as np

from .errors import (
    DomainError,
    PreconditionError,
    UnsupportedFamilyError,
    UnsupportedScaleError,
)
from .kernels import (
    BoxConstraint,
    KernelComponent,
    KernelSequence,
    NormParams,
    Scope,
    SimplexConstraint,
    WeightFunction,
)
from .norms import component_norm
from .specfun import (
    GammaIntegralParams,
    McEstimate,
    MC_DIMENSION_CAP,
    log_gamma,
    log_simplex_gamma_integral,
    log_sphere_area,
    mc_accumulate,
)

__all__ = [
    "CompositionUndefinedError",
    "WickTerm",
    "WickSeries",
    "wick_component_closed",
    "wick_component_norm",
    "q1_lower_bound_norm",
    "log_q1_lower_bound",
    "log_q1_weighted_sum",
    "divergence_probe_inner_integral",
    "fastgrowing_component_lower_bound",
    "contributing_terms",
    "product_component_value",
    "symmetrized_component_value",
    "product_component_norm_mc",
]


class CompositionUndefinedError(DomainError):
    """The contracted momentum integral diverges (inner exponent <= 0)."""


def _log_binom(n: int, k: int) -> float:
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0)


@dataclass(frozen=True)
class WickTerm:
    q: int
    log_coeff: float
    t_exponent: float


@dataclass
class WickSeries:
    """Closed q-series form of one product component of one-sided factors.

    The component value at radial points (k, k') is

        sum_q exp(log_coeff_q) * t^{t_exponent_q}
        * prod |k_i|^{creation_exponent} * prod |k'_j|^{annihilation_exponent}

    on the support {sum k <= creation_bound, sum k' <= annihilation_bound},
    with t = min(creation_bound - sum k, annihilation_bound - sum k',
    rho - sum k - sum k').  tail_bound dominates the pointwise contribution
    of all discarded q-terms at the largest admissible t.
    """

    M: int
    N: int
    terms: list[WickTerm] = field(default_factory=list)
    creation_exponent: float = 0.0
    annihilation_exponent: float = 0.0
    creation_bound: float = 1.0
    annihilation_bound: float = 1.0
    rho: float = 1.0
    d: int = 1
    q_truncation: int = 0
    tail_bound: float = 0.0
    tail_certified: bool = True

    @property
    def inner_exponent(self) -> float:
        return self.creation_exponent + self.annihilation_exponent + self.d - 1.0

    def t_at(self, creation_radii, annihilation_radii) -> float:
        s_c = sum(creation_radii)
        s_a = sum(annihilation_radii)
        return min(
            self.creation_bound - s_c,
            self.annihilation_bound - s_a,
            self.rho - s_c - s_a,
        )

    def coefficient_sum(self, t: float) -> float:
        if t < 0.0:
            return 0.0
        out = 0.0
        for term in self.terms:
            if term.t_exponent == 0.0:
                out += math.exp(term.log_coeff)
            elif t > 0.0:
                out += math.exp(term.log_coeff + term.t_exponent * math.log(t))
        return out

    def value_at(self, creation_radii, annihilation_radii) -> float:
        if len(creation_radii) != self.M or len(annihilation_radii) != self.N:
            raise DomainError("radii lists must match the component index")
        if sum(creation_radii) > self.creation_bound:
            return 0.0
        if sum(annihilation_radii) > self.annihilation_bound:
            return 0.0
        val = self.coefficient_sum(self.t_at(creation_radii, annihilation_radii))
        for r in creation_radii:
            val *= r**self.creation_exponent
        for r in annihilation_radii:
            val *= r**self.annihilation_exponent
        return val

    def to_json(self) -> str:
        return json.dumps(
            {
                "M": self.M,
                "N": self.N,
                "terms": [
                    {"q": t.q, "log_coeff": t.log_coeff, "t_exponent": t.t_exponent}
                    for t in self.terms
                ],
                "creation_exponent": self.creation_exponent,
                "annihilation_exponent": self.annihilation_exponent,
                "creation_bound": self.creation_bound,
                "annihilation_bound": self.annihilation_bound,
                "rho": self.rho,
                "d": self.d,
                "q_truncation": self.q_truncation,
                "tail_bound": self.tail_bound,
                "tail_certified": self.tail_certified,
            },
            sort_keys=True,
        )


def _one_sided_family_data(seq: KernelSequence, side: str):
    """(alpha, bound, d) of a one-sided monomial simplex family, validated."""
    if not seq.components:
        return None
    alphas, bounds, dims = set(), set(), set()
    for (m, n), comp in seq.components.items():
        if side == "annihilation":
            if m != 0 or n < 1:
                raise UnsupportedFamilyError("left factor must be annihilation-only")
            factor = comp.annihilation_factor
            want_scope = Scope.ANNIHILATION_SIDE
        else:
            if n != 0 or m < 1:
                raise UnsupportedFamilyError("right factor must be creation-only")
            factor = comp.creation_factor
            want_scope = Scope.CREATION_SIDE
        if factor.beta != 0.0:
            raise UnsupportedFamilyError("composition series needs monomial kernels")
        if not isinstance(comp.constraint, SimplexConstraint) or (
            comp.constraint.scope not in (want_scope, Scope.EACH_SIDE_SEPARATE)
        ):
            raise UnsupportedFamilyError(
                "composition series needs a one-sided simplex support"
            )
        alphas.add(factor.alpha)
        bounds.add(comp.constraint.bound)
        dims.add(comp.dimension)
    if len(alphas) != 1 or len(bounds) != 1 or len(dims) != 1:
        raise UnsupportedFamilyError("family members must share alpha, bound, d")
    return alphas.pop(), bounds.pop(), dims.pop()


def wick_component_closed(
    w: KernelSequence,
    v: KernelSequence,
    M: int,
    N: int,
    params: NormParams,
    tol: float = 1e-15,
    q_max: int | None = None,
    w_log_coeff: Callable[[int], float] | None = None,
    v_log_coeff: Callable[[int], float] | None = None,
    q_cap: int = 500,
) -> WickSeries:
    """Exact q-series of the (M, N) component for one-sided factors.

    w must contain only (0, n) members and v only (m, 0) members of the
    monomial simplex family with support bounds <= rho / 2; then only the
    m = M, n = N summand survives and the contracted integral resolves by
    the simplex power integral.  Coefficients beyond the stored indices can
    be supplied analytically through ``w_log_coeff`` / ``v_log_coeff``; the
    series is truncated once a geometric ratio certificate puts the
    remaining pointwise tail below ``tol`` relative to the partial sum (a
    tenfold safety factor is already applied), or at ``q_max`` without a
    certificate when given.
    """
    w_data = _one_sided_family_data(w, "annihilation")
    v_data = _one_sided_family_data(v, "creation")
    if w_data is None or v_data is None:
        return WickSeries(M=M, N=N, rho=params.rho, d=params.d)
    alpha_w, bound_w, d_w = w_data
    alpha_v, bound_v, d_v = v_data
    if d_w != d_v or d_w != params.d:
        raise UnsupportedFamilyError("dimension mismatch")
    if bound_w > params.rho / 2.0 or bound_v > params.rho / 2.0:
        raise UnsupportedFamilyError("support bounds must not exceed rho / 2")
    x_hat = alpha_w + alpha_v + params.d - 1.0
    if x_hat <= 0.0:
        raise CompositionUndefinedError(
            f"contracted integral diverges: inner exponent {x_hat} <= 0"
        )

    def w_coeff(n):
        if w_log_coeff is not None:
            return w_log_coeff(n)
        comp = w.get(0, n)
        return math.log(comp.coeff) if comp is not None else None

    def v_coeff(m):
        if v_log_coeff is not None:
            return v_log_coeff(m)
        comp = v.get(m, 0)
        return math.log(comp.coeff) if comp is not None else None

    log_o = log_sphere_area(params.d)
    t_max = min(bound_w, bound_v, params.rho)

    def log_term(q):
        cw = w_coeff(N + q)
        cv = v_coeff(M + q)
        if cw is None or cv is None:
            return None
        if (N + q == 0) or (M + q == 0):
            return None
        return (
            _log_binom(M + q, q)
            + _log_binom(N + q, q)
            + log_gamma(q + 1.0)
            + cw
            + cv
            + q * (log_o + log_gamma(x_hat))
            - log_gamma(q * x_hat + 1.0)
        )

    terms: list[WickTerm] = []
    sup_partial = 0.0
    tail_bound = math.inf
    certified = False
    limit = q_cap if q_max is None else q_max
    prev_sup = None
    q = 0
    while q <= limit:
        lc = log_term(q)
        if lc is None:
            if w_log_coeff is None and v_log_coeff is None and q > 0:
                # stored families are finite: the true series ends here
                tail_bound = 0.0
                certified = True
                break
            q += 1
            prev_sup = None
            continue
        terms.append(WickTerm(q=q, log_coeff=lc, t_exponent=q * x_hat))
        sup_q = math.exp(lc + q * x_hat * math.log(t_max)) if t_max > 0 else math.exp(lc)
        sup_partial += sup_q
        if prev_sup is not None and sup_q > 0.0:
            ratio = sup_q / prev_sup
            if ratio <= 0.5:
                geo_tail = sup_q * ratio / (1.0 - ratio)
                if 10.0 * geo_tail <= tol * max(sup_partial, sup_q):
                    tail_bound = 10.0 * geo_tail
                    certified = True
                    break
        prev_sup = sup_q
        q += 1
    if not certified and q_max is None:
        raise UnsupportedScaleError(
            f"q-series not certified within q <= {q_cap}; pass q_max for an"
            " uncertified truncation"
        )
    return WickSeries(
        M=M,
        N=N,
        terms=terms,
        creation_exponent=alpha_v,
        annihilation_exponent=alpha_w,
        creation_bound=bound_v,
        annihilation_bound=bound_w,
        rho=params.rho,
        d=params.d,
        q_truncation=terms[-1].q if terms else 0,
        tail_bound=tail_bound if certified else math.inf,
        tail_certified=certified,
    )


def wick_component_norm(
    series: WickSeries,
    params: NormParams,
    samples: int = 200_000,
    seed: int = 0,
    chunk_size: int = 1 << 16,
) -> McEstimate:
    """Norm of a composition series: Monte Carlo for p < inf, the analytic
    supremum for p = inf (monotone profiles only)."""
    M, N, d = series.M, series.N, series.d
    if not series.terms:
        return McEstimate(0.0, 0.0, samples, seed)
    if M + N > MC_DIMENSION_CAP:
        raise UnsupportedScaleError(f"series norm supports M + N <= {MC_DIMENSION_CAP}")
    if params.is_sup_norm:
        if (M and series.creation_exponent != params.lam) or (
            N and series.annihilation_exponent != params.lam
        ):
            raise UnsupportedFamilyError(
                "analytic sup needs matched exponents alpha = lambda"
            )
        if series.inner_exponent <= 0.0:
            raise CompositionUndefinedError("inner exponent <= 0")
        t_max = min(series.creation_bound, series.annihilation_bound, series.rho)
        return McEstimate(series.coefficient_sum(t_max), 0.0, 0, seed)
    p, lam = params.p, params.lam
    x_c = p * series.creation_exponent - lam + d
    x_a = p * series.annihilation_exponent - lam + d
    if (M and x_c <= 0.0) or (N and x_a <= 0.0):
        raise DomainError("outer radial integral diverges: p*alpha - lambda + d <= 0")
    if M + N == 0:
        t_max = min(series.creation_bound, series.annihilation_bound, series.rho)
        return McEstimate(series.coefficient_sum(t_max), 0.0, 0, seed)
    b_c, b_a = series.creation_bound, series.annihilation_bound

    def draw(rng, n_samp):
        u = rng.random((n_samp, M + N))
        r = np.empty_like(u)
        if M:
            r[:, :M] = b_c * u[:, :M] ** (1.0 / x_c)
        if N:
            r[:, M:] = b_a * u[:, M:] ** (1.0 / x_a)
        s_c = r[:, :M].sum(axis=1) if M else np.zeros(n_samp)
        s_a = r[:, M:].sum(axis=1) if N else np.zeros(n_samp)
        ok = (s_c <= b_c) & (s_a <= b_a)
        t = np.minimum.reduce(
            [b_c - s_c, b_a - s_a, series.rho - s_c - s_a]
        )
        coeff = np.zeros(n_samp)
        inside = ok & (t >= 0.0)
        t_in = np.maximum(t[inside], 0.0)
        acc = np.zeros(t_in.shape)
        for term in series.terms:
            if term.t_exponent == 0.0:
                acc += math.exp(term.log_coeff)
            else:
                acc += np.exp(term.log_coeff) * t_in**term.t_exponent
        coeff[inside] = acc
        return coeff**p

    mean, se = mc_accumulate(draw, samples, seed, chunk_size)
    log_pref = (M + N) * log_sphere_area(d)
    if M:
        log_pref += M * (x_c * math.log(b_c) - math.log(x_c))
    if N:
        log_pref += N * (x_a * math.log(b_a) - math.log(x_a))
    if mean <= 0.0:
        return McEstimate(0.0, 0.0, samples, seed)
    value = math.exp((log_pref + math.log(mean)) / p)
    se_norm = value * se / (p * mean)
    return McEstimate(value=value, std_error=se_norm, samples=samples, seed=seed)


def _check_eps_hypotheses(d: int, p: float, lam: float, kappa: float) -> None:
    if p < 2.0 or math.isinf(p):
        raise DomainError("requires 2 <= p < inf")
    if lam < d * (1.0 - p / 2.0) + p / 2.0:
        raise DomainError("requires lam >= d (1 - p/2) + p/2")
    if not 1.0 < kappa < 1.5:
        raise DomainError("requires kappa in (1, 3/2)")


def log_q1_lower_bound(
    M: int,
    N: int,
    a: int,
    *,
    d: int,
    p: float,
    lam: float,
    rho: float,
    kappa: float,
    weight: WeightFunction,
) -> float:
    """ln of the closed-form q = 1 lower bound on the (M, N) component norm
    of the normalized eps-family composition at eps = 1/a.

    Keeping only the q = 1 summand (all summands are positive) and resolving
    both remaining radial integrals by the simplex power integral gives

        pref * brace(M) * brace(N),
        pref = O^{1-2/p} p / B * Gamma(B+1)^{2/p} Gamma(eps)^{-2/p}
               * (rho/2)^{2 (B - eps) / p},
        brace(J) = (J+1)^{1-kappa} / D(J+1)
                   * ( Gamma((J+1) eps + 1) / Gamma(J eps + B + 1) )^{1/p},

    with B = 2 lam - 2 d + 2 eps + (d - 1) p.
    """
    _check_eps_hypotheses(d, p, lam, kappa)
    if a < 1:
        raise DomainError("a must be a positive integer")
    eps = 1.0 / a
    B = 2.0 * lam - 2.0 * d + 2.0 * eps + (d - 1.0) * p
    log_o = log_sphere_area(d)
    log_pref = (
        (1.0 - 2.0 / p) * log_o
        + math.log(p)
        - math.log(B)
        + (2.0 / p) * log_gamma(B + 1.0)
        - (2.0 / p) * log_gamma(eps)
        + 2.0 * (B - eps) / p * math.log(rho / 2.0)
    )

    def log_brace(J):
        return (
            (1.0 - kappa) * math.log(J + 1.0)
            - weight.log_weight(J + 1)
            + (log_gamma((J + 1) * eps + 1.0) - log_gamma(J * eps + B + 1.0)) / p
        )

    return log_pref + log_brace(M) + log_brace(N)


def q1_lower_bound_norm(
    M: int,
    N: int,
    a: int,
    *,
    d: int,
    p: float,
    lam: float,
    rho: float,
    kappa: float,
    weight: WeightFunction,
) -> float:
    return math.exp(
        log_q1_lower_bound(M, N, a, d=d, p=p, lam=lam, rho=rho, kappa=kappa, weight=weight)
    )


def _tail_ratio_sup(weight: WeightFunction, m_from: int) -> float:
    """Upper bound on D(M)/D(M+1) for all M >= m_from (slow-ratio weights)."""
    if weight.kind == "geometric":
        return weight.xi
    if weight.kind == "constant":
        return 1.0
    if weight.kind == "power":
        # ratio ((M+1)/(M+2))^gamma is monotone in M with limit 1
        return max(1.0, weight.ratio(m_from))
    if weight.kind == "factorial":
        return weight.ratio(m_from)
    raise UnsupportedFamilyError("tail certificate needs an analytic weight")


def _log_ratio_array(weight: WeightFunction, arr: np.ndarray) -> np.ndarray:
    """Vectorized ln of D(M)/D(M+1) for the analytic weights."""
    if weight.kind == "geometric":
        return np.full(arr.shape, math.log(weight.xi))
    if weight.kind == "constant":
        return np.zeros(arr.shape)
    if weight.kind == "power":
        return weight.gamma * (np.log(arr + 1.0) - np.log(arr + 2.0))
    if weight.kind == "factorial":
        return -np.log(arr + 1.0)
    return np.array([weight.log_ratio(int(m)) for m in arr])


def log_q1_weighted_sum(
    a: int,
    *,
    d: int,
    p: float,
    lam: float,
    rho: float,
    kappa: float,
    weight: WeightFunction,
    rel_tol: float = 1e-6,
    m_start: int = 1,
) -> tuple[float, float]:
    """ln of the weighted double sum of q = 1 lower bounds over M, N >= 1,
    with a certified truncation.

    The double sum factorizes as pref * (sum_M D(M) brace(M))^2.  Returns
    (log of the truncated value, log of an upper bound including the
    certified tail); the two agree to rel_tol.
    """
    _check_eps_hypotheses(d, p, lam, kappa)
    eps = 1.0 / a
    B = 2.0 * lam - 2.0 * d + 2.0 * eps + (d - 1.0) * p
    delta_floor = math.floor(B - eps)
    s = kappa - 1.0 + delta_floor / p
    if delta_floor < 1 or s <= 1.0:
        raise PreconditionError(
            "tail certificate unavailable: weighted sum diverges in M"
            " (slow-decay branch)"
        )
    log_o = log_sphere_area(d)
    log_pref = (
        (1.0 - 2.0 / p) * log_o
        + math.log(p)
        - math.log(B)
        + (2.0 / p) * log_gamma(B + 1.0)
        - (2.0 / p) * log_gamma(eps)
        + 2.0 * (B - eps) / p * math.log(rho / 2.0)
    )

    def log_terms(ms):
        arr = np.asarray(ms, dtype=float)
        return (
            _log_ratio_array(weight, arr)
            + (1.0 - kappa) * np.log(arr + 1.0)
            + (log_gamma((arr + 1.0) * eps + 1.0) - log_gamma(arr * eps + B + 1.0)) / p
        )

    total = 0.0
    m_lo = m_start
    block = max(4096, 8 * a)
    log_scale = None
    while True:
        ms = np.arange(m_lo, m_lo + block)
        lt = log_terms(ms)
        if log_scale is None:
            log_scale = float(lt.max())
        total += float(np.exp(lt - log_scale).sum())
        m_hi = m_lo + block - 1
        ratio_sup = _tail_ratio_sup(weight, m_hi + 1)
        # term(M) <= R_sup * eps^{-d'/p} (M+1)^{-s} via
        # Gamma(z)/Gamma(z + B - eps) <= z^{-floor(B - eps)} for z >= 1,
        # then an integral comparison of the decreasing majorant
        log_tail = (
            math.log(ratio_sup)
            - (delta_floor / p) * math.log(eps)
            + (1.0 - s) * math.log(m_hi + 1.0)
            - math.log(s - 1.0)
            - log_scale
        )
        tail = math.exp(log_tail)
        if tail <= rel_tol * total:
            log_sum = log_scale + math.log(total)
            log_sum_hi = log_scale + math.log(total + tail)
            return log_pref + 2.0 * log_sum, log_pref + 2.0 * log_sum_hi
        m_lo += block
        block *= 2


def divergence_probe_inner_integral(params: NormParams, delta: float) -> float:
    """Truncated contracted-momentum integral below the composability threshold.

    For lam < d (1 - p/2) + p/2 and eps = (threshold - lam) / 2 the integral
    int_{delta <= |x| <= rho/2} |x|^{(2 lam - 2 d + 2 eps - p)/p} d^d x
    is returned in closed form; as delta goes to 0 it scales like delta^e
    with e = d + (2 lam - 2 d + 2 eps - p)/p < 0.
    """
    d, p, lam, rho = params.d, params.p, params.lam, params.rho
    if math.isinf(p):
        raise PreconditionError("probe requires finite p")
    threshold = d * (1.0 - p / 2.0) + p / 2.0
    if lam >= threshold:
        raise PreconditionError(
            "integral converges for lam >= d(1 - p/2) + p/2; probe is moot"
        )
    if not 0.0 < delta <= rho / 2.0:
        raise DomainError("delta must lie in (0, rho/2]")
    eps = (threshold - lam) / 2.0
    e = d + (2.0 * lam - 2.0 * d + 2.0 * eps - p) / p
    o = math.exp(log_sphere_area(d))
    if e == 0.0:
        return o * math.log(rho / (2.0 * delta))
    return o * ((rho / 2.0) ** e - delta**e) / e


def fastgrowing_component_lower_bound(
    w: KernelSequence,
    v: KernelSequence,
    M: int,
    N: int,
    params: NormParams,
) -> float:
    """||w_{M,N}|| * ||v_{M,N}|| for box-family factors.

    This is the single (m, n, q) = (M, N, 0) summand of the (2M, 2N) product
    component; the composition cutoff is implied by the per-coordinate boxes
    (each radius is at most rho / (2(M+N))), so the bound is exact in closed
    form.
    """
    cw = w.get(M, N)
    cv = v.get(M, N)
    if cw is None or cv is None:
        raise UnsupportedFamilyError(f"factors need a stored ({M}, {N}) component")
    for comp in (cw, cv):
        if not isinstance(comp.constraint, BoxConstraint):
            raise UnsupportedFamilyError("fast-growing bound needs box supports")
        if comp.constraint.bound * (M + N) > params.rho / 2.0 + 1e-12:
            raise UnsupportedFamilyError(
                "box bound must be at most rho / (2 (M + N))"
            )
    nw = component_norm(cw, params)
    nv = component_norm(cv, params)
    return math.exp(nw.log_value + nv.log_value)


# ---------------------------------------------------------------------------
# General product components at small indices (monomial simplex kernels)
# ---------------------------------------------------------------------------


def contributing_terms(w: KernelSequence, v: KernelSequence, M: int, N: int):
    """All (m, n, q) with stored kernels w_{M-m, n+q} and v_{m+q, N-n}."""
    out = []
    w_max = w.max_index()
    v_max = v.max_index()
    if w_max < 0 or v_max < 0:
        return out
    q_cap = max(w_max, v_max)
    for m in range(M + 1):
        for n in range(N + 1):
            for q in range(q_cap + 1):
                cw = w.get(M - m, n + q)
                cv = v.get(m + q, N - n)
                if cw is not None and cv is not None:
                    out.append((m, n, q, cw, cv))
    return out


def _monomial_simplex_parts(comp: KernelComponent):
    if comp.creation_factor.beta != 0.0 or comp.annihilation_factor.beta != 0.0:
        raise UnsupportedFamilyError("product evaluation needs monomial kernels")
    if not isinstance(comp.constraint, SimplexConstraint):
        raise UnsupportedFamilyError("product evaluation needs simplex supports")
    return comp.creation_factor.alpha, comp.annihilation_factor.alpha, comp.constraint


def _term_value(m, n, q, cw, cv, M, N, rho, d, cr, ar):
    """One (m, n, q) summand at fixed outer radii, contracted integral closed."""
    aw_c, aw_a, cons_w = _monomial_simplex_parts(cw)
    av_c, av_a, cons_v = _monomial_simplex_parts(cv)
    w_cr = cr[m:]  # creation args of the left kernel
    w_ar = ar[:n]  # its explicit annihilation args; q contracted ones follow
    v_cr = cr[:m]
    v_ar = ar[n:]

    # split each support indicator into a pure part and a budget for the
    # contracted momenta
    budgets = [rho - sum(v_cr) - sum(w_ar)]

    def apply(cons, own_cr, own_ar, contracted_on_creation):
        if cons.scope is Scope.CREATION_SIDE:
            if contracted_on_creation:
                budgets.append(cons.bound - sum(own_cr))
                return True
            return sum(own_cr) <= cons.bound
        if cons.scope is Scope.ANNIHILATION_SIDE:
            if not contracted_on_creation:
                budgets.append(cons.bound - sum(own_ar))
                return True
            return sum(own_ar) <= cons.bound
        if cons.scope is Scope.BOTH_SIDES_JOINT:
            budgets.append(cons.bound - sum(own_cr) - sum(own_ar))
            return True
        # each side separately
        if contracted_on_creation:
            budgets.append(cons.bound - sum(own_cr))
            return sum(own_ar) <= cons.bound
        budgets.append(cons.bound - sum(own_ar))
        return sum(own_cr) <= cons.bound

    # contracted momenta sit in the left kernel's annihilation slots and the
    # right kernel's creation slots
    if not apply(cons_w, w_cr, w_ar, contracted_on_creation=False):
        return 0.0
    if not apply(cons_v, v_cr, v_ar, contracted_on_creation=True):
        return 0.0
    t = min(budgets)
    if t < 0.0:
        return 0.0
    coeff = math.comb(m + q, q) * math.comb(n + q, q) * math.factorial(q)
    val = coeff * cw.coeff * cv.coeff
    for r in w_cr:
        val *= r**aw_c
    for r in w_ar:
        val *= r**aw_a
    for r in v_cr:
        val *= r**av_c
    for r in v_ar:
        val *= r**av_a
    if q == 0:
        return val
    x_hat = aw_a + av_c + d - 1.0
    if x_hat <= 0.0:
        raise CompositionUndefinedError("contracted integral diverges")
    if t == 0.0:
        return 0.0
    log_inner = q * log_sphere_area(d) + log_simplex_gamma_integral(
        GammaIntegralParams(M=q, m=0, rho=t, x=x_hat, y=0.0)
    )
    return val * math.exp(log_inner)


def product_component_value(
    w: KernelSequence,
    v: KernelSequence,
    M: int,
    N: int,
    params: NormParams,
    creation_radii,
    annihilation_radii,
) -> float:
    """Pointwise value of the non-symmetrized (M, N) product component.

    Works for monomial kernels under simplex supports at small stored
    indices, where the contracted q-dimensional integral is closed form.
    """
    if len(creation_radii) != M or len(annihilation_radii) != N:
        raise DomainError("radii lists must match the component index")
    total = 0.0
    for m, n, q, cw, cv in contributing_terms(w, v, M, N):
        total += _term_value(
            m, n, q, cw, cv, M, N, params.rho, params.d,
            list(creation_radii), list(annihilation_radii),
        )
    return total


def symmetrized_component_value(
    w: KernelSequence,
    v: KernelSequence,
    M: int,
    N: int,
    params: NormParams,
    creation_radii,
    annihilation_radii,
) -> float:
    """Average of the component over permutations within each momentum group."""
    from itertools import permutations

    vals = []
    for cp in permutations(creation_radii):
        for ap in permutations(annihilation_radii):
            vals.append(
                product_component_value(w, v, M, N, params, list(cp), list(ap))
            )
    return sum(vals) / len(vals)


def _min_alpha(seq: KernelSequence, side: str) -> float | None:
    alphas = []
    for comp in seq.components.values():
        factor = comp.creation_factor if side == "creation" else comp.annihilation_factor
        count = comp.m if side == "creation" else comp.n
        if count:
            alphas.append(factor.alpha)
    return min(alphas) if alphas else None


def _term_values_vec(m, n, q, cw, cv, rho, d, CR, AR):
    """Vectorized counterpart of a single (m, n, q) summand over sample rows."""
    aw_c, aw_a, cons_w = _monomial_simplex_parts(cw)
    av_c, av_a, cons_v = _monomial_simplex_parts(cv)
    n_samp = CR.shape[0]

    def s(block):
        return block.sum(axis=1) if block.shape[1] else np.zeros(n_samp)
    s_vcr, s_wcr = s(CR[:, :m]), s(CR[:, m:])
    s_war, s_var = s(AR[:, :n]), s(AR[:, n:])

    ok = np.ones(n_samp, dtype=bool)
    budgets = [rho - s_vcr - s_war]

    def apply(cons, s_cr, s_ar, contracted_on_creation):
        nonlocal ok
        if cons.scope is Scope.CREATION_SIDE:
            if contracted_on_creation:
                budgets.append(cons.bound - s_cr)
            else:
                ok &= s_cr <= cons.bound
        elif cons.scope is Scope.ANNIHILATION_SIDE:
            if contracted_on_creation:
                ok &= s_ar <= cons.bound
            else:
                budgets.append(cons.bound - s_ar)
        elif cons.scope is Scope.BOTH_SIDES_JOINT:
            budgets.append(cons.bound - s_cr - s_ar)
        else:  # each side separately
            if contracted_on_creation:
                budgets.append(cons.bound - s_cr)
                ok &= s_ar <= cons.bound
            else:
                budgets.append(cons.bound - s_ar)
                ok &= s_cr <= cons.bound

    apply(cons_w, s_wcr, s_war, contracted_on_creation=False)
    apply(cons_v, s_vcr, s_var, contracted_on_creation=True)
    t = np.minimum.reduce(budgets)
    ok &= t >= 0.0

    log_val = math.log(
        math.comb(m + q, q) * math.comb(n + q, q) * math.factorial(q)
    ) + math.log(cw.coeff) + math.log(cv.coeff)
    with np.errstate(divide="ignore"):
        log_pow = np.zeros(n_samp)
        if m:
            log_pow += av_c * np.log(CR[:, :m]).sum(axis=1)
        if CR.shape[1] - m:
            log_pow += aw_c * np.log(CR[:, m:]).sum(axis=1)
        if n:
            log_pow += aw_a * np.log(AR[:, :n]).sum(axis=1)
        if AR.shape[1] - n:
            log_pow += av_a * np.log(AR[:, n:]).sum(axis=1)
    if q > 0:
        x_hat = aw_a + av_c + d - 1.0
        if x_hat <= 0.0:
            raise CompositionUndefinedError("contracted integral diverges")
        ok &= t > 0.0
        log_inner = np.where(
            ok,
            q * (log_sphere_area(d) + log_gamma(x_hat))
            - log_gamma(q * x_hat + 1.0)
            + q * x_hat * np.log(np.where(ok, t, 1.0)),
            -np.inf,
        )
    else:
        log_inner = np.where(ok, 0.0, -np.inf)
    out = np.zeros(n_samp)
    good = ok & np.isfinite(log_pow)
    out[good] = np.exp(log_val + log_pow[good] + log_inner[good])
    return out


def product_component_norm_mc(
    w: KernelSequence,
    v: KernelSequence,
    M: int,
    N: int,
    params: NormParams,
    samples: int = 100_000,
    seed: int = 0,
    chunk_size: int = 1 << 14,
) -> McEstimate:
    """Monte-Carlo norm of the (M, N) product component, p < inf.

    The outer momenta are importance-sampled with the smallest per-side
    monomial exponent, which keeps the weights bounded for every summand.
    """
    if params.is_sup_norm:
        raise PreconditionError("product norm MC requires p < inf")
    if M + N > MC_DIMENSION_CAP:
        raise UnsupportedScaleError(f"supports M + N <= {MC_DIMENSION_CAP}")
    terms = contributing_terms(w, v, M, N)
    if not terms:
        return McEstimate(0.0, 0.0, samples, seed)
    p, lam, d, rho = params.p, params.lam, params.d, params.rho
    if M + N == 0:
        val = product_component_value(w, v, 0, 0, params, [], [])
        return McEstimate(val, 0.0, 0, seed)

    cands_c = [a for a in (_min_alpha(w, "creation"), _min_alpha(v, "creation")) if a is not None]
    cands_a = [a for a in (_min_alpha(w, "annihilation"), _min_alpha(v, "annihilation")) if a is not None]
    alpha_c = min(cands_c) if cands_c else 0.0
    alpha_a = min(cands_a) if cands_a else 0.0
    x_c = p * alpha_c - lam + d
    x_a = p * alpha_a - lam + d
    if (M and x_c <= 0.0) or (N and x_a <= 0.0):
        raise DomainError("outer radial integral diverges for the smallest exponent")

    def draw(rng, n_samp):
        u = rng.random((n_samp, M + N))
        r = np.empty_like(u)
        if M:
            r[:, :M] = u[:, :M] ** (1.0 / x_c)
        if N:
            r[:, M:] = u[:, M:] ** (1.0 / x_a)
        CR, AR = r[:, :M], r[:, M:]
        value = np.zeros(n_samp)
        for m, n, q, cw, cv in terms:
            value += _term_values_vec(m, n, q, cw, cv, rho, d, CR, AR)
        with np.errstate(divide="ignore"):
            log_w = np.zeros(n_samp)
            if M:
                log_w += -p * alpha_c * np.log(CR).sum(axis=1)
            if N:
                log_w += -p * alpha_a * np.log(AR).sum(axis=1)
        out = np.zeros(n_samp)
        pos = value > 0.0
        out[pos] = value[pos] ** p * np.exp(log_w[pos])
        return out

    mean, se = mc_accumulate(draw, samples, seed, chunk_size)
    log_pref = (M + N) * log_sphere_area(d)
    if M:
        log_pref += -M * math.log(x_c)
    if N:
        log_pref += -N * math.log(x_a)
    if mean <= 0.0:
        return McEstimate(0.0, 0.0, samples, seed)
    value = math.exp((log_pref + math.log(mean)) / p)
    se_norm = value * se / (p * mean)
    return McEstimate(value=value, std_error=se_norm, samples=samples, seed=seed)
