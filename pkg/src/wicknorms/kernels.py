"""Data model for the closed radial kernel families and weight functions.

A kernel component at index (m, n) is a product over its m creation and n
annihilation momenta of a radial profile

    r^alpha * |c0 - r|^(-beta)

multiplied by a support indicator (a simplex bound on one or both momentum
groups, or a per-coordinate box) and a constant coefficient.  These closed
families admit exact norms and exact Wick-composition series, which is all
the divergence exhibits and bound certificates in this package need.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

from .errors import DomainError
from .specfun import log_gamma

__all__ = [
    "INDEX_CAP",
    "Scope",
    "RadialFactor",
    "SimplexConstraint",
    "BoxConstraint",
    "SupportConstraint",
    "KernelComponent",
    "ZetaTail",
    "KernelSequence",
    "WeightFunction",
    "WeightClass",
    "WeightClassification",
    "NormParams",
    "classify_weight",
    "constraint_allows",
    "evaluate_kernel",
]

# guards against runaway index loops in constructors
INDEX_CAP = 10**6


class Scope(enum.Enum):
    """Which momentum group a simplex bound applies to."""

    CREATION_SIDE = "creation"
    ANNIHILATION_SIDE = "annihilation"
    BOTH_SIDES_JOINT = "joint"
    # each group bounded separately by the same radius; this is the shape of
    # the product constructions w_{m,n} = w_{m,0} * w_{n,0}
    EACH_SIDE_SEPARATE = "each-side"


@dataclass(frozen=True)
class RadialFactor:
    """Per-coordinate radial profile r^alpha * |singular_center - r|^(-beta)."""

    alpha: float
    beta: float = 0.0
    singular_center: float = 0.0

    def __post_init__(self):
        if self.beta < 0.0:
            raise DomainError("singular exponent beta must be >= 0")
        if self.singular_center < 0.0:
            raise DomainError("singular_center must be >= 0")
        if self.beta > 0.0 and self.singular_center == 0.0:
            raise DomainError("a singular factor needs a positive center")


@dataclass(frozen=True)
class SimplexConstraint:
    """Indicator 1[sum of scoped radii <= bound]."""

    bound: float
    scope: Scope = Scope.BOTH_SIDES_JOINT

    def __post_init__(self):
        if not 0.0 < self.bound <= 1.0:
            raise DomainError("constraint bound must lie in (0, 1]")


@dataclass(frozen=True)
class BoxConstraint:
    """Indicator 1[every radius <= bound], one box per coordinate."""

    bound: float

    def __post_init__(self):
        if not 0.0 < self.bound <= 1.0:
            raise DomainError("constraint bound must lie in (0, 1]")


SupportConstraint = SimplexConstraint | BoxConstraint


def constraint_allows(
    constraint: SupportConstraint,
    creation_radii,
    annihilation_radii,
) -> bool:
    """Whether a radial point lies inside the declared support."""
    if isinstance(constraint, BoxConstraint):
        return all(r <= constraint.bound for r in creation_radii) and all(
            r <= constraint.bound for r in annihilation_radii
        )
    b = constraint.bound
    if constraint.scope is Scope.CREATION_SIDE:
        return sum(creation_radii) <= b
    if constraint.scope is Scope.ANNIHILATION_SIDE:
        return sum(annihilation_radii) <= b
    if constraint.scope is Scope.BOTH_SIDES_JOINT:
        return sum(creation_radii) + sum(annihilation_radii) <= b
    return sum(creation_radii) <= b and sum(annihilation_radii) <= b


@dataclass(frozen=True)
class KernelComponent:
    """One (m, n) kernel from the closed product-radial family.

    The kernel is constant in the field-energy argument and fully symmetric
    within each momentum group by construction.
    """

    m: int
    n: int
    coeff: float
    creation_factor: RadialFactor
    annihilation_factor: RadialFactor
    constraint: SupportConstraint
    dimension: int = 1

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise DomainError("indices must be non-negative")
        if self.m > INDEX_CAP or self.n > INDEX_CAP:
            raise DomainError(f"indices capped at {INDEX_CAP}")
        if self.coeff <= 0.0:
            raise DomainError("coefficient must be positive")
        if self.dimension < 1:
            raise DomainError("dimension must be >= 1")


def _radial_value(factor: RadialFactor, r: float) -> float:
    if factor.beta > 0.0 and r == factor.singular_center:
        return math.inf
    if r == 0.0:
        if factor.alpha > 0.0:
            return 0.0
        if factor.alpha == 0.0:
            val = 1.0
        else:
            return math.inf
    else:
        val = r**factor.alpha
    if factor.beta > 0.0:
        val *= abs(factor.singular_center - r) ** (-factor.beta)
    return val


def evaluate_kernel(
    k: KernelComponent,
    creation_radii,
    annihilation_radii,
) -> float:
    """Pointwise kernel value at the given radial coordinates.

    Returns 0 outside the declared support and an inf sentinel on the
    measure-zero singular set when beta > 0.
    """
    if len(creation_radii) != k.m or len(annihilation_radii) != k.n:
        raise DomainError("radii lists must match the component index (m, n)")
    if any(not 0.0 <= r <= 1.0 for r in creation_radii) or any(
        not 0.0 <= r <= 1.0 for r in annihilation_radii
    ):
        raise DomainError("all radii must lie in [0, 1]")
    if not constraint_allows(k.constraint, creation_radii, annihilation_radii):
        return 0.0
    val = k.coeff
    for r in creation_radii:
        val *= _radial_value(k.creation_factor, r)
    for r in annihilation_radii:
        val *= _radial_value(k.annihilation_factor, r)
    return val


@dataclass(frozen=True)
class ZetaTail:
    """Analytic tail of the weighted norm terms beyond the stored truncation.

    Declares that the weighted term at index m > max stored index equals
    prefactor * m^(-exponent), which is how every built-in counterexample
    family is normalized.
    """

    exponent: float
    prefactor: float = 1.0


@dataclass
class KernelSequence:
    """Sparse map (m, n) -> KernelComponent; absent entries are the zero kernel."""

    components: dict[tuple[int, int], KernelComponent] = field(default_factory=dict)
    zeta_tail: ZetaTail | None = None

    def add(self, component: KernelComponent) -> None:
        key = (component.m, component.n)
        if key in self.components:
            raise DomainError(f"component {key} already present")
        self.components[key] = component

    def get(self, m: int, n: int) -> KernelComponent | None:
        return self.components.get((m, n))

    def indices(self) -> list[tuple[int, int]]:
        # fixed deterministic order: ascending (m + n, m)
        return sorted(self.components, key=lambda t: (t[0] + t[1], t[0]))

    def max_index(self) -> int:
        if not self.components:
            return -1
        return max(max(m, n) for m, n in self.components)


class WeightClass(enum.Enum):
    SLOW_RATIO = "slow-ratio"  # liminf D(M)/D(M+1) > 0
    FAST_RATIO = "fast-ratio"  # D(M)/D(M+1) -> 0
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class WeightClassification:
    category: WeightClass
    liminf_ratio: float | None = None


@dataclass(frozen=True)
class WeightFunction:
    """Positive weight D on indices with exact log-domain ratio queries."""

    kind: str
    xi: float | None = None
    gamma: float | None = None
    values: tuple[float, ...] | None = None

    @classmethod
    def geometric(cls, xi: float) -> "WeightFunction":
        if not 0.0 < xi < 1.0:
            raise DomainError("geometric weight needs xi in (0, 1)")
        return cls(kind="geometric", xi=xi)

    @classmethod
    def factorial(cls) -> "WeightFunction":
        return cls(kind="factorial")

    @classmethod
    def power(cls, gamma: float) -> "WeightFunction":
        return cls(kind="power", gamma=gamma)

    @classmethod
    def constant(cls) -> "WeightFunction":
        return cls(kind="constant")

    @classmethod
    def tabulated(cls, values) -> "WeightFunction":
        vals = tuple(float(v) for v in values)
        if not vals or any(v <= 0.0 for v in vals):
            raise DomainError("tabulated weight needs positive entries")
        return cls(kind="tabulated", values=vals)

    def log_weight(self, M: int) -> float:
        """ln D(M)."""
        if M < 0:
            raise DomainError("weight index must be >= 0")
        if self.kind == "geometric":
            return -M * math.log(self.xi)
        if self.kind == "factorial":
            return log_gamma(M + 1.0)
        if self.kind == "power":
            return self.gamma * math.log(M + 1.0)
        if self.kind == "constant":
            return 0.0
        if M >= len(self.values):
            raise DomainError(f"tabulated weight has no entry at {M}")
        return math.log(self.values[M])

    def weight(self, M: int) -> float:
        return math.exp(self.log_weight(M))

    def log_ratio(self, M: int) -> float:
        """ln of D(M)/D(M+1)."""
        return self.log_weight(M) - self.log_weight(M + 1)

    def ratio(self, M: int) -> float:
        return math.exp(self.log_ratio(M))


# minimum table length before a tabulated weight is classified at all
_MIN_TABLE = 8


def classify_weight(D: WeightFunction) -> WeightClassification:
    """Sort a weight into the slow-ratio / fast-ratio dichotomy.

    Geometric, power and constant weights have liminf D(M)/D(M+1) > 0; the
    factorial weight has ratio 1/(M+1) -> 0.  Tabulated weights are judged
    from the tail of the table and marked undecided when it is too short.
    """
    if D.kind == "geometric":
        return WeightClassification(WeightClass.SLOW_RATIO, liminf_ratio=D.xi)
    if D.kind in ("power", "constant"):
        return WeightClassification(WeightClass.SLOW_RATIO, liminf_ratio=1.0)
    if D.kind == "factorial":
        return WeightClassification(WeightClass.FAST_RATIO, liminf_ratio=0.0)
    if len(D.values) < _MIN_TABLE:
        return WeightClassification(WeightClass.UNDECIDED)
    ratios = [D.ratio(M) for M in range(len(D.values) - 1)]
    tail = ratios[len(ratios) // 2 :]
    decreasing = all(a >= b for a, b in zip(tail, tail[1:]))
    nearly_flat = min(tail) >= 0.8 * max(tail)
    if nearly_flat:
        return WeightClassification(WeightClass.SLOW_RATIO, liminf_ratio=min(tail))
    if decreasing and tail[-1] <= 0.75 * tail[0] and tail[-1] < 0.2:
        return WeightClassification(WeightClass.FAST_RATIO, liminf_ratio=0.0)
    return WeightClassification(WeightClass.UNDECIDED)


@dataclass(frozen=True)
class NormParams:
    """Norm-family parameters: weight exponent lam, integrability index p in
    [1, inf], dimension d and the composition cutoff rho in (0, 1]."""

    lam: float
    p: float
    d: int
    rho: float = 1.0

    def __post_init__(self):
        if self.p < 1.0:
            raise DomainError("require p >= 1")
        if self.d < 1:
            raise DomainError("require d >= 1")
        if not 0.0 < self.rho <= 1.0:
            raise DomainError("require rho in (0, 1]")

    @property
    def is_sup_norm(self) -> bool:
        return math.isinf(self.p)


# ---------------------------------------------------------------------------
# JSON serialization (schema documented in the README)
# ---------------------------------------------------------------------------


def _factor_to_dict(f: RadialFactor) -> dict:
    return {"alpha": f.alpha, "beta": f.beta, "center": f.singular_center}


def _factor_from_dict(d: dict) -> RadialFactor:
    return RadialFactor(
        alpha=d["alpha"], beta=d.get("beta", 0.0), singular_center=d.get("center", 0.0)
    )


def _constraint_to_dict(c: SupportConstraint) -> dict:
    if isinstance(c, BoxConstraint):
        return {"kind": "box", "bound": c.bound}
    return {"kind": "simplex", "bound": c.bound, "scope": c.scope.value}


def _constraint_from_dict(d: dict) -> SupportConstraint:
    if d["kind"] == "box":
        return BoxConstraint(bound=d["bound"])
    if d["kind"] == "simplex":
        return SimplexConstraint(bound=d["bound"], scope=Scope(d["scope"]))
    raise DomainError(f"unknown constraint kind {d['kind']!r}")


def component_to_dict(k: KernelComponent) -> dict:
    return {
        "m": k.m,
        "n": k.n,
        "coeff": k.coeff,
        "creation": _factor_to_dict(k.creation_factor),
        "annihilation": _factor_to_dict(k.annihilation_factor),
        "constraint": _constraint_to_dict(k.constraint),
        "dimension": k.dimension,
    }


def component_from_dict(d: dict) -> KernelComponent:
    return KernelComponent(
        m=d["m"],
        n=d["n"],
        coeff=d["coeff"],
        creation_factor=_factor_from_dict(d["creation"]),
        annihilation_factor=_factor_from_dict(d["annihilation"]),
        constraint=_constraint_from_dict(d["constraint"]),
        dimension=d.get("dimension", 1),
    )


def sequence_to_json(w: KernelSequence) -> str:
    doc: dict = {
        "components": [component_to_dict(w.components[key]) for key in w.indices()]
    }
    if w.zeta_tail is not None:
        doc["zeta_tail"] = {
            "exponent": w.zeta_tail.exponent,
            "prefactor": w.zeta_tail.prefactor,
        }
    return json.dumps(doc, sort_keys=True)


def sequence_from_json(text: str) -> KernelSequence:
    doc = json.loads(text)
    seq = KernelSequence()
    for entry in doc["components"]:
        seq.add(component_from_dict(entry))
    if "zeta_tail" in doc:
        seq.zeta_tail = ZetaTail(
            exponent=doc["zeta_tail"]["exponent"],
            prefactor=doc["zeta_tail"].get("prefactor", 1.0),
        )
    return seq


def weight_to_dict(D: WeightFunction) -> dict:
    doc: dict = {"kind": D.kind}
    if D.xi is not None:
        doc["xi"] = D.xi
    if D.gamma is not None:
        doc["gamma"] = D.gamma
    if D.values is not None:
        doc["values"] = list(D.values)
    return doc


def weight_from_dict(d: dict) -> WeightFunction:
    kind = d["kind"]
    if kind == "geometric":
        return WeightFunction.geometric(d["xi"])
    if kind == "factorial":
        return WeightFunction.factorial()
    if kind == "power":
        return WeightFunction.power(d["gamma"])
    if kind == "constant":
        return WeightFunction.constant()
    if kind == "tabulated":
        return WeightFunction.tabulated(d["values"])
    raise DomainError(f"unknown weight kind {kind!r}")


def norm_params_to_dict(np_: NormParams) -> dict:
    return {
        "lambda": np_.lam,
        "p": "inf" if math.isinf(np_.p) else np_.p,
        "d": np_.d,
        "rho": np_.rho,
    }


def norm_params_from_dict(d: dict) -> NormParams:
    p = d["p"]
    return NormParams(
        lam=d["lambda"],
        p=math.inf if p == "inf" else float(p),
        d=d["d"],
        rho=d.get("rho", 1.0),
    )
