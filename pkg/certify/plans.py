"""
Substitution plans: ordered reparametrizations that carry a constrained region
onto the closed nonnegative orthant of slack variables
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from errors import PolycoreError
from polycore.poly import Poly, VarTable, coefficient_report, degree_in, to_text
from polycore.ratfn import RatFn, substitute
from certify.expressions import A_TABLE, H_TABLE, MAP_TABLE

logger = logging.getLogger(__name__)

SUBCASES = ("Q1_w_ge_v", "Q1_v_ge_w", "Q3_w_ge_v", "Q3_v_ge_w")


@dataclass(frozen=True)
class PlanStep:
    var: str
    replacement: RatFn
    rationale: str

    def to_dict(self) -> Dict:
        return {
            'var': self.var,
            'num': to_text(self.replacement.num),
            'den': to_text(self.replacement.den),
            'rationale': self.rationale,
        }


@dataclass(frozen=True)
class PlanResult:
    """num / prod(den^power) is the substituted polynomial"""
    num: Poly
    cleared: List[Tuple[str, Poly, int]]


@dataclass
class SubstitutionPlan:
    """
    Steps are applied in order, so a later step rewrites the variables that earlier
    replacements introduced. ``slack`` lists the variables left at the end, and
    ``strict`` those among them that must be positive rather than nonnegative.
    """
    claim: str
    region: str
    steps: List[PlanStep]
    slack: Tuple[str, ...]
    strict: Tuple[str, ...] = ()
    fixed_point_vars: Tuple[str, ...] = ()
    notes: List[str] = field(default_factory=list)

    def replacement_problems(self) -> List[str]:
        """Replacements whose numerator or denominator has a negative coefficient"""
        problems = []
        for step in self.steps:
            for label, part in (('num', step.replacement.num), ('den', step.replacement.den)):
                report = coefficient_report(part)
                if not report.all_nonnegative:
                    problems.append(f"{step.var} {label}: {report.witness}")
        return problems

    def apply(self, poly: Poly) -> PlanResult:
        cleared = []
        names = [str(sym) for sym in poly.ring.symbols]
        for step in self.steps:
            power = degree_in(poly, names.index(step.var))
            result = substitute(poly, step.var, step.replacement)
            if power and step.replacement.den != poly.ring.one:
                cleared.append((step.var, step.replacement.den, power))
            poly = result.num
            logger.debug(f"{self.claim}: after {step.var} -> {len(poly)} terms")
        return PlanResult(poly, cleared)

    def map_point(self, slack_values: Mapping[str, Fraction]) -> Dict[str, Fraction]:
        """Original coordinates of a slack point, walking the steps backwards"""
        values = dict(slack_values)
        for step in reversed(self.steps):
            values[step.var] = step.replacement.evaluate(values)
        return values

    def to_dict(self) -> Dict:
        return {
            'claim': self.claim,
            'region': self.region,
            'steps': [step.to_dict() for step in self.steps],
            'slack': list(self.slack),
            'strict': list(self.strict),
        }


def _rat(table: VarTable, num, den=1) -> RatFn:
    ring = table.ring
    return RatFn(ring(num) if not isinstance(num, Poly) else num,
                 ring(den) if not isinstance(den, Poly) else den)


def _region_steps(table: VarTable, quadrant: str) -> List[PlanStep]:
    u, v, w = table.gens("u", "v", "w")
    if quadrant == "Q1":
        return [
            PlanStep("x", _rat(table, u + v), "x = u + v >= u"),
            PlanStep("y", _rat(table, u + w), "y = u + w >= u"),
        ]
    if quadrant == "Q3":
        return [
            PlanStep("x", _rat(table, u, v + 1), "x = u / (1 + v) <= u"),
            PlanStep("y", _rat(table, u, w + 1), "y = u / (1 + w) <= u"),
        ]
    raise PolycoreError(f"unknown quadrant {quadrant!r}")


def _split_step(table: VarTable, order: str) -> Tuple[PlanStep, Tuple[str, str]]:
    v, w, k = table.gens("v", "w", "k")
    if order == "w_ge_v":
        return PlanStep("w", _rat(table, v + k), "w = v + k >= v"), ("v", "k")
    if order == "v_ge_w":
        return PlanStep("v", _rat(table, w + k), "v = w + k >= w"), ("w", "k")
    raise PolycoreError(f"unknown split {order!r}")


def _parse_subcase(subcase: str) -> Tuple[str, str]:
    if subcase not in SUBCASES:
        raise PolycoreError(f"unknown subcase {subcase!r}, expected one of {', '.join(SUBCASES)}")
    quadrant, order = subcase.split("_", 1)
    return quadrant, order


def claim3_plan(subcase: str, table: VarTable = MAP_TABLE) -> SubstitutionPlan:
    """
    V - V o T^2 on the region 0 < b <= 1, g between b and 1/b, r >= 0.

    u = (g + 1)/(b + 1) + t keeps r = (b+1) u^2 - (g+1) u nonnegative,
    g = (b^2 + s) / (b (1 + s)) sweeps g from b towards 1/b and
    b = 1/(1 + l) keeps b below 1.
    """
    quadrant, order = _parse_subcase(subcase)
    u, g, b, t, s, l = table.gens("u", "g", "b", "t", "s", "l")
    split, fixed = _split_step(table, order)
    steps = _region_steps(table, quadrant) + [
        PlanStep("u", _rat(table, g + 1 + t * (b + 1), b + 1), "u >= (g+1)/(b+1), so r >= 0"),
        PlanStep("g", _rat(table, b ** 2 + s, b * (1 + s)), "g between b and 1/b"),
        PlanStep("b", _rat(table, 1, 1 + l), "b = 1/(1 + l) <= 1"),
        split,
    ]
    slack = ("t", "s", "l") + fixed
    return SubstitutionPlan(
        claim=f"claim3/{subcase}",
        region=f"{quadrant}, 0 < b <= 1, g in [b, 1/b], r >= 0, {order.replace('_', ' ')}",
        steps=steps,
        slack=slack,
        strict=("l",),
        fixed_point_vars=fixed,
    )


def claim4_plan(subcase: str, table: VarTable = MAP_TABLE) -> SubstitutionPlan:
    """V - V o T^3 on the region u >= 1, b <= 1/u, g <= b"""
    quadrant, order = _parse_subcase(subcase)
    t, s, l = table.gens("t", "s", "l")
    split, fixed = _split_step(table, order)
    steps = _region_steps(table, quadrant) + [
        PlanStep("u", _rat(table, 1 + t), "u = 1 + t >= 1"),
        PlanStep("b", _rat(table, 1, 1 + t + s), "b = 1/(u + s) <= 1/u"),
        PlanStep("g", _rat(table, 1, 1 + t + s + l), "g = 1/(u + s + l) <= b"),
        split,
    ]
    return SubstitutionPlan(
        claim=f"claim4/{subcase}",
        region=f"{quadrant}, u >= 1, b <= 1/u, g <= b, {order.replace('_', ' ')}",
        steps=steps,
        slack=("t", "s", "l") + fixed,
        fixed_point_vars=fixed,
    )


def embed_h_plan(table: VarTable = H_TABLE) -> SubstitutionPlan:
    """h on y, z >= K = q r / (p - q) with p > q"""
    q, r, d, v, w = table.gens("q", "r", "d", "v", "w")
    steps = [
        PlanStep("p", _rat(table, q + d), "p = q + d > q"),
        PlanStep("y", _rat(table, q * r + d * v, d), "y = K + v"),
        PlanStep("z", _rat(table, q * r + d * w, d), "z = K + w"),
    ]
    return SubstitutionPlan(
        claim="embed-h",
        region="p > q, y >= K, z >= K",
        steps=steps,
        slack=("q", "r", "d", "v", "w"),
        strict=("q", "d"),
    )


def a1_plan(table: VarTable = A_TABLE) -> SubstitutionPlan:
    """a1 on p q >= 1 and 0 <= r <= p^2 q - p"""
    p, kappa, sigma = table.gens("p", "kappa", "sigma")
    steps = [
        PlanStep("q", _rat(table, 1 + kappa, p), "p q = 1 + kappa >= 1"),
        PlanStep("r", _rat(table, p * kappa, 1 + sigma), "r = (p^2 q - p) / (1 + sigma)"),
    ]
    return SubstitutionPlan(
        claim="a-coeffs/a1",
        region="p > 0, p q >= 1, 0 <= r <= p^2 q - p",
        steps=steps,
        slack=("p", "kappa", "sigma"),
        strict=("p",),
    )


def a1_literal_plan(table: VarTable = A_TABLE) -> SubstitutionPlan:
    """r = p^2 q - p - e, p = 1 + pi; leaves negative terms that need the bound e <= p^2 q - p"""
    p, q, e, pi = table.gens("p", "q", "e", "pi")
    steps = [
        PlanStep("r", _rat(table, p ** 2 * q - p - e), "r = p^2 q - p - e"),
        PlanStep("p", _rat(table, 1 + pi), "p = 1 + pi"),
    ]
    return SubstitutionPlan(
        claim="a-coeffs/a1-literal",
        region="p >= 1, r <= p^2 q - p",
        steps=steps,
        slack=("q", "e", "pi"),
    )
