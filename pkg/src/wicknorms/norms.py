"""Kernel norms: closed forms for the monomial families, seeded Monte Carlo
for the singular ones, and the weighted sequence norm with tail certificates.

For p < inf the norm of a product-radial component reduces, after passing to
radial coordinates, to

    ||w||^p = coeff^p * O_{d-1}^{m+n} * int prod_i dr_i r_i^{x_i - 1}
              |c0 - r_i|^{-p beta} * 1[support],

with per-coordinate exponent x_i = p * alpha_i - lam + d.  Monomial kernels
(beta = 0) under simplex or box supports integrate in closed form through the
simplex Gamma integral; the singular families are estimated by importance
sampling with a power-law proposal around the singular sphere.  Divergent
exponent configurations are detected analytically and reported as an inf
marker with the violated condition, never as a float overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError, UnsupportedScaleError
from .kernels import (
    BoxConstraint,
    KernelComponent,
    KernelSequence,
    NormParams,
    Scope,
    SimplexConstraint,
    WeightFunction,
    constraint_allows,
)
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
    "NormResult",
    "SequenceNormResult",
    "component_norm",
    "component_norm_mc",
    "sup_search",
    "eps_family_log_coefficient",
    "normalized_counterexample_coefficient",
    "sequence_norm",
]


@dataclass(frozen=True)
class NormResult:
    """A component norm with its evaluation method.

    ``log_value`` is the primary representation so that heavily weighted
    sequences never overflow; ``value`` exponentiates on demand.  An infinite
    log_value always carries the violated exponent condition.
    """

    log_value: float
    method: str  # "closed-form" | "monte-carlo" | "sup-search"
    mc: McEstimate | None = None
    divergent_reason: str | None = None

    @property
    def value(self) -> float:
        if self.log_value == math.inf:
            return math.inf
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf

    @property
    def is_divergent(self) -> bool:
        return self.log_value == math.inf


def _divergent(reason: str) -> NormResult:
    return NormResult(log_value=math.inf, method="closed-form", divergent_reason=reason)


def _log_dirichlet(exponents, bound: float) -> float:
    """ln of int over the simplex {sum s_i <= bound} of prod s_i^{x_i - 1}."""
    xs = list(exponents)
    total = sum(xs)
    if all(x == xs[0] for x in xs):
        return log_simplex_gamma_integral(
            GammaIntegralParams(M=len(xs), m=0, rho=bound, x=xs[0], y=0.0)
        )
    return (
        sum(log_gamma(x) for x in xs)
        + total * math.log(bound)
        - log_gamma(total + 1.0)
    )


def _coordinate_caps(k: KernelComponent) -> tuple[float, float]:
    """Per-coordinate upper bound implied by the support, per side."""
    c = k.constraint
    if isinstance(c, BoxConstraint):
        return c.bound, c.bound
    caps = {Scope.CREATION_SIDE: (c.bound, 1.0),
            Scope.ANNIHILATION_SIDE: (1.0, c.bound),
            Scope.BOTH_SIDES_JOINT: (c.bound, c.bound),
            Scope.EACH_SIDE_SEPARATE: (c.bound, c.bound)}
    return caps[c.scope]


def _log_closed_form_integral(k: KernelComponent, x_c: float, x_a: float) -> float:
    """ln of the radial integral for beta = 0 kernels (support included)."""
    c = k.constraint
    m, n = k.m, k.n

    def unconstrained(x, count):
        # box [0, 1] per coordinate
        return -count * math.log(x) if count else 0.0

    if isinstance(c, BoxConstraint):
        out = 0.0
        if m:
            out += m * (x_c * math.log(c.bound) - math.log(x_c))
        if n:
            out += n * (x_a * math.log(c.bound) - math.log(x_a))
        return out
    if c.scope is Scope.BOTH_SIDES_JOINT:
        return _log_dirichlet([x_c] * m + [x_a] * n, c.bound)
    if c.scope is Scope.CREATION_SIDE:
        out = unconstrained(x_a, n)
        if m:
            out += _log_dirichlet([x_c] * m, c.bound)
        return out
    if c.scope is Scope.ANNIHILATION_SIDE:
        out = unconstrained(x_c, m)
        if n:
            out += _log_dirichlet([x_a] * n, c.bound)
        return out
    # each side separately
    out = 0.0
    if m:
        out += _log_dirichlet([x_c] * m, c.bound)
    if n:
        out += _log_dirichlet([x_a] * n, c.bound)
    return out


def _analytic_sup(k: KernelComponent, lam: float) -> NormResult:
    """Exact sup of |w| / prod r^lam for monotone (beta = 0) profiles."""
    e_c = k.creation_factor.alpha - lam
    e_a = k.annihilation_factor.alpha - lam
    if (k.m and e_c < 0.0) or (k.n and e_a < 0.0):
        return _divergent("alpha - lambda < 0 at p = inf")

    def best_log_product(exponents, budget):
        # maximize sum e_i ln r_i subject to sum r_i <= budget, r_i <= 1
        active = [e for e in exponents if e > 0.0]
        if not active:
            return 0.0
        total = sum(active)
        return sum(e * math.log(min(budget * e / total, 1.0)) for e in active)

    c = k.constraint
    exps_c = [e_c] * k.m
    exps_a = [e_a] * k.n
    if isinstance(c, BoxConstraint):
        log_sup = sum(e * math.log(c.bound) for e in exps_c + exps_a if e > 0.0)
    elif c.scope is Scope.BOTH_SIDES_JOINT:
        log_sup = best_log_product(exps_c + exps_a, c.bound)
    elif c.scope is Scope.CREATION_SIDE:
        log_sup = best_log_product(exps_c, c.bound)  # annihilation side caps at 1
    elif c.scope is Scope.ANNIHILATION_SIDE:
        log_sup = best_log_product(exps_a, c.bound)
    else:
        log_sup = best_log_product(exps_c, c.bound) + best_log_product(exps_a, c.bound)
    return NormResult(log_value=math.log(k.coeff) + log_sup, method="closed-form")


def sup_search(
    k: KernelComponent, params: NormParams, points: int = 10_000, seed: int = 0
) -> NormResult:
    """Grid / random search fallback for the p = inf norm.

    A Rayleigh-style lower bound: never exceeds the exact sup.
    """
    dims = k.m + k.n
    if dims == 0:
        return NormResult(log_value=math.log(k.coeff), method="sup-search")
    cap_c, cap_a = _coordinate_caps(k)
    lam = params.lam

    def profile(radii):
        cr, ar = radii[: k.m], radii[k.m :]
        if not constraint_allows(k.constraint, cr, ar):
            return 0.0
        val = k.coeff
        for r in cr:
            val *= r ** (k.creation_factor.alpha - lam) if r > 0 else (
                1.0 if k.creation_factor.alpha == lam else 0.0
            )
            if k.creation_factor.beta > 0.0:
                t = abs(k.creation_factor.singular_center - r)
                val = math.inf if t == 0.0 else val * t ** (-k.creation_factor.beta)
        for r in ar:
            val *= r ** (k.annihilation_factor.alpha - lam) if r > 0 else (
                1.0 if k.annihilation_factor.alpha == lam else 0.0
            )
            if k.annihilation_factor.beta > 0.0:
                t = abs(k.annihilation_factor.singular_center - r)
                val = math.inf if t == 0.0 else val * t ** (-k.annihilation_factor.beta)
        return val

    best = 0.0
    if dims <= 3:
        per_axis = max(2, round(points ** (1.0 / dims)))
        axes = []
        for i in range(dims):
            cap = cap_c if i < k.m else cap_a
            axes.append(np.linspace(cap / per_axis, cap, per_axis))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
    else:
        rng = np.random.default_rng(seed)
        caps = np.array([cap_c] * k.m + [cap_a] * k.n)
        pts = rng.random((points, dims)) * caps
    for row in pts:
        best = max(best, profile(list(row)))
    log_best = math.log(best) if best > 0.0 else -math.inf
    return NormResult(log_value=log_best, method="sup-search")


def _power_law_sample(rng, n, q, t_lo, t_hi):
    """Draw t ~ density prop to t^(-q) on [t_lo, t_hi], 0 <= q < 1."""
    v = rng.random(n)
    s = 1.0 - q
    return ((1.0 - v) * t_lo**s + v * t_hi**s) ** (1.0 / s)


def component_norm_mc(
    k: KernelComponent,
    params: NormParams,
    samples: int = 200_000,
    seed: int = 0,
    chunk_size: int = 1 << 16,
) -> NormResult:
    """Monte-Carlo estimate of the defining norm integral, p < inf.

    Each coordinate is importance-sampled; singular factors use an equal
    mixture of the power-law proposal at the origin and a power-law proposal
    around the singular center, which keeps the weights bounded.
    """
    if params.is_sup_norm:
        raise PreconditionError("MC norm estimation requires p < inf")
    dims = k.m + k.n
    if dims == 0:
        return NormResult(log_value=math.log(k.coeff), method="monte-carlo",
                          mc=McEstimate(k.coeff, 0.0, samples, seed))
    if dims > MC_DIMENSION_CAP:
        raise UnsupportedScaleError(f"MC norm supports m + n <= {MC_DIMENSION_CAP}")
    p, lam, d = params.p, params.lam, params.d
    cap_c, cap_a = _coordinate_caps(k)

    sides = []
    for count, factor, cap in (
        (k.m, k.creation_factor, cap_c),
        (k.n, k.annihilation_factor, cap_a),
    ):
        if count == 0:
            continue
        x = p * factor.alpha - lam + d
        q = p * factor.beta
        if x <= 0.0:
            return _divergent("p*alpha - lambda + d <= 0")
        if q >= 1.0:
            return _divergent("p*beta >= 1")
        sides.append((count, x, q, factor.singular_center, cap))

    def draw_coordinate(rng, n, x, q, center, cap):
        if q == 0.0:
            u = rng.random(n)
            r = cap * u ** (1.0 / x)
            log_w = np.full(n, x * math.log(cap) - math.log(x))
            return r, log_w
        # mixture proposal: 1/2 power at the origin, 1/2 power at the center
        z_pow = cap**x / x
        if center >= cap:
            pieces = [(center - cap, center)]
        else:
            pieces = [(0.0, center), (0.0, cap - center)]
        masses = [(hi ** (1 - q) - lo ** (1 - q)) / (1 - q) for lo, hi in pieces]
        z_sing = sum(masses)
        pick_sing = rng.random(n) < 0.5
        u = rng.random(n)
        r = np.empty(n)
        # origin-power branch
        r[~pick_sing] = cap * u[~pick_sing] ** (1.0 / x)
        # singular branch: choose a piece by mass, then invert the tail CDF
        idx = np.flatnonzero(pick_sing)
        if idx.size:
            side = rng.random(idx.size) * z_sing
            if center >= cap:
                lo, hi = pieces[0]
                t = _power_law_sample(rng, idx.size, q, lo, hi)
                r[idx] = center - t
            else:
                left = side < masses[0]
                t_left = _power_law_sample(rng, int(left.sum()), q, 0.0, pieces[0][1])
                t_right = _power_law_sample(
                    rng, int((~left).sum()), q, 0.0, pieces[1][1]
                )
                rr = np.empty(idx.size)
                rr[left] = center - t_left
                rr[~left] = center + t_right
                r[idx] = rr
        t_all = np.abs(center - r)
        # f / g with the shared power factors cancelled analytically:
        #   g_pow / f = (x / cap^x) t^q,  g_sing / f = r^{1-x} / z_sing
        with np.errstate(divide="ignore", over="ignore"):
            inv_w = 0.5 * (x / cap**x) * t_all**q + 0.5 * np.power(r, 1.0 - x) / z_sing
            log_w = -np.log(inv_w)
        return r, log_w

    def draw(rng, n):
        log_w = np.zeros(n)
        coords = []
        for count, x, q, center, cap in sides:
            for _ in range(count):
                r, lw = draw_coordinate(rng, n, x, q, center, cap)
                coords.append(r)
                log_w = log_w + lw
        radii = np.stack(coords, axis=1)
        cr = radii[:, : k.m]
        ar = radii[:, k.m :]
        ok = np.ones(n, dtype=bool)
        c = k.constraint
        if isinstance(c, BoxConstraint):
            ok &= (radii <= c.bound).all(axis=1)
        else:
            s_c = cr.sum(axis=1) if k.m else np.zeros(n)
            s_a = ar.sum(axis=1) if k.n else np.zeros(n)
            if c.scope is Scope.CREATION_SIDE:
                ok &= s_c <= c.bound
            elif c.scope is Scope.ANNIHILATION_SIDE:
                ok &= s_a <= c.bound
            elif c.scope is Scope.BOTH_SIDES_JOINT:
                ok &= s_c + s_a <= c.bound
            else:
                ok &= (s_c <= c.bound) & (s_a <= c.bound)
        out = np.zeros(n)
        out[ok] = np.exp(log_w[ok])
        return out

    mean, se = mc_accumulate(draw, samples, seed, chunk_size)
    log_pref = p * math.log(k.coeff) + dims * log_sphere_area(d)
    if mean <= 0.0:
        return NormResult(log_value=-math.inf, method="monte-carlo",
                          mc=McEstimate(0.0, 0.0, samples, seed))
    log_norm = (log_pref + math.log(mean)) / p
    value = math.exp(log_norm)
    # delta method for the p-th root
    se_norm = value * se / (p * mean)
    return NormResult(
        log_value=log_norm,
        method="monte-carlo",
        mc=McEstimate(value=value, std_error=se_norm, samples=samples, seed=seed),
    )


def component_norm(
    k: KernelComponent,
    params: NormParams,
    samples: int = 200_000,
    seed: int = 0,
) -> NormResult:
    """The (lam, p) norm of one kernel component.

    Monomial kernels resolve in closed form, singular ones by Monte Carlo,
    and p = inf by the analytic supremum of the monotone profile.  Divergent
    exponent configurations come back as an inf marker with the reason.
    """
    if k.m == 0 and k.n == 0:
        return NormResult(log_value=math.log(k.coeff), method="closed-form")
    singular = (k.m and k.creation_factor.beta > 0.0) or (
        k.n and k.annihilation_factor.beta > 0.0
    )
    if params.is_sup_norm:
        if singular:
            return _divergent("singular factor is unbounded at p = inf")
        return _analytic_sup(k, params.lam)
    if singular:
        return component_norm_mc(k, params, samples=samples, seed=seed)
    p, lam, d = params.p, params.lam, params.d
    x_c = p * k.creation_factor.alpha - lam + d
    x_a = p * k.annihilation_factor.alpha - lam + d
    if (k.m and x_c <= 0.0) or (k.n and x_a <= 0.0):
        return _divergent("p*alpha - lambda + d <= 0")
    log_integral = _log_closed_form_integral(k, x_c, x_a)
    log_norm = (
        math.log(k.coeff)
        + ((k.m + k.n) * log_sphere_area(d) + log_integral) / p
    )
    return NormResult(log_value=log_norm, method="closed-form")


def eps_family_log_coefficient(
    m: int,
    eps: float,
    *,
    bound: float,
    p: float,
    d: int,
    weight: WeightFunction,
    kappa: float,
) -> float:
    """ln of the normalizing coefficient c_m of the eps-indexed family.

    Chosen so that D(m) * ||component with this coefficient|| = m^-kappa:
    the inverse of the closed-form norm of the unit-coefficient member times
    1 / (D(m) m^kappa).
    """
    if not 1.0 < kappa < 1.5:
        raise DomainError("kappa must lie in (1, 3/2)")
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    if m < 1:
        raise DomainError("family indices start at 1")
    # assembled exactly as component_norm's closed form so that the weighted
    # norm of the normalized member cancels to m^-kappa at float precision
    log_unit_norm = (
        m * log_sphere_area(d)
        + _log_dirichlet([eps] * m, bound)
    ) / p
    return -log_unit_norm - weight.log_weight(m) - kappa * math.log(m)


def normalized_counterexample_coefficient(
    m: int,
    eps: float,
    params: NormParams,
    weight: WeightFunction,
    kappa: float,
) -> float:
    """The coefficient c_m with the family's simplex bound fixed at rho / 2."""
    return math.exp(
        eps_family_log_coefficient(
            m,
            eps,
            bound=params.rho / 2.0,
            p=params.p,
            d=params.d,
            weight=weight,
            kappa=kappa,
        )
    )


@dataclass(frozen=True)
class SequenceNormResult:
    """Weighted partial norm with an analytic-tail bracket.

    ``certified_finite`` holds when every evaluated term is finite, the
    truncation covers the stored components, and the declared tail (if any)
    is summable; the full norm then lies in
    [partial + tail_lower, partial + tail_upper].
    """

    partial: float
    certified_finite: bool
    tail_lower: float = 0.0
    tail_upper: float = 0.0
    reason: str | None = None


def sequence_norm(
    w: KernelSequence,
    weight: WeightFunction,
    params: NormParams,
    max_index: int,
    samples: int = 200_000,
    seed: int = 0,
) -> SequenceNormResult:
    """Weighted sum over components with indices <= max_index.

    Summation order is fixed (ascending m + n, then m) for determinism.
    """
    total = 0.0
    for (m, n) in w.indices():
        if m > max_index or n > max_index:
            continue
        res = component_norm(w.components[(m, n)], params, samples=samples, seed=seed)
        if res.is_divergent:
            return SequenceNormResult(
                partial=math.inf,
                certified_finite=False,
                reason=res.divergent_reason,
            )
        total += math.exp(
            weight.log_weight(m) + weight.log_weight(n) + res.log_value
        )
    uncovered = any(m > max_index or n > max_index for m, n in w.components)
    if w.zeta_tail is None:
        return SequenceNormResult(partial=total, certified_finite=not uncovered)
    kappa = w.zeta_tail.exponent
    pref = w.zeta_tail.prefactor
    if kappa <= 1.0:
        return SequenceNormResult(
            partial=total, certified_finite=False, reason="tail exponent <= 1"
        )
    # integral comparison: sum_{m > M} m^-kappa in [ (M+1)^{1-k}, M^{1-k} ] / (k-1)
    tail_upper = pref * max_index ** (1.0 - kappa) / (kappa - 1.0)
    tail_lower = pref * (max_index + 1.0) ** (1.0 - kappa) / (kappa - 1.0)
    # the declared tail covers every index beyond max_index, stored or not
    return SequenceNormResult(
        partial=total,
        certified_finite=True,
        tail_lower=tail_lower,
        tail_upper=tail_upper,
    )
