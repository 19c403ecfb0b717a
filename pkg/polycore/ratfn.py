"""
Rational functions num/den over a VarTable ring, with the substitution engine
used to compose maps and to apply reparametrizations
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Tuple, Union

from errors import PolycoreError
from polycore.poly import Poly, Rational, evaluate, split_by_variable, to_qq

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RatFn:
    """
    num / den without gcd reduction.

    ``normalized`` divides both parts by the leading coefficient of den, which
    fixes rational content and the sign of the denominator's leading term.
    """
    num: Poly
    den: Poly

    def __post_init__(self):
        if self.num.ring != self.den.ring:
            raise PolycoreError("numerator and denominator belong to different rings")
        if not self.den:
            raise PolycoreError("identically zero denominator")

    @classmethod
    def of(cls, poly: Poly) -> "RatFn":
        return cls(poly, poly.ring.one)

    @property
    def ring(self):
        return self.num.ring

    @property
    def is_zero(self) -> bool:
        return not self.num

    def normalized(self) -> "RatFn":
        lc = self.den.LC
        if lc == 1:
            return self
        inv = 1 / lc
        return RatFn(self.num.mul_ground(inv), self.den.mul_ground(inv))

    def equals(self, other: "RatFn") -> bool:
        """Equality as functions: num * other.den == other.num * den"""
        _check(self, other)
        return self.num * other.den == other.num * self.den

    def __neg__(self) -> "RatFn":
        return RatFn(-self.num, self.den)

    def __add__(self, other: "RatFn") -> "RatFn":
        _check(self, other)
        if self.den == other.den:
            return RatFn(self.num + other.num, self.den)
        return RatFn(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "RatFn") -> "RatFn":
        return self + (-other)

    def __mul__(self, other: "RatFn") -> "RatFn":
        _check(self, other)
        return RatFn(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFn") -> "RatFn":
        _check(self, other)
        if not other.num:
            raise PolycoreError("division by the zero rational function")
        return RatFn(self.num * other.den, self.den * other.num)

    def evaluate(self, point: Union[Mapping[str, Rational], tuple]) -> Fraction:
        den = evaluate(self.den, point)
        if den == 0:
            raise PolycoreError("denominator vanishes at the evaluation point")
        return evaluate(self.num, point) / den


def _check(a: RatFn, b: RatFn):
    if a.ring != b.ring:
        raise PolycoreError("rational functions from different variable tables")


def _index(ring, var: str) -> int:
    names = [str(s) for s in ring.symbols]
    try:
        return names.index(var)
    except ValueError:
        raise PolycoreError(f"unknown variable {var!r}")


def substitute(target: Poly, var: str, replacement: RatFn) -> RatFn:
    """
    Replace var by N/D in target and clear over D^deg.

    With target = sum_j P_j var^j of degree d the result is
    (sum_j P_j N^j D^(d-j)) / D^d, built by Horner's rule.
    """
    if target.ring != replacement.ring:
        raise PolycoreError("target and replacement belong to different rings")
    ring = target.ring
    parts = split_by_variable(target, _index(ring, var))
    degree = max(parts, default=0)
    if degree == 0:
        return RatFn.of(target)

    N, D = replacement.num, replacement.den
    plain = D == ring.one
    acc = parts.get(degree, ring.zero)
    d_power = ring.one
    for j in range(degree - 1, -1, -1):
        acc = acc * N
        if plain:
            if j in parts:
                acc += parts[j]
        else:
            d_power = d_power * D
            if j in parts:
                acc += parts[j] * d_power
    return RatFn(acc, ring.one if plain else d_power)


def _substitute_cleared(target: Poly, mapping: Mapping[str, RatFn]) -> Tuple[Poly, Dict[str, int]]:
    """
    Simultaneous substitution; returns the cleared numerator and, per variable,
    the power of its replacement denominator that was cleared.
    """
    ring = target.ring
    order = sorted(mapping, key=lambda name: _index(ring, name))
    indices = [_index(ring, name) for name in order]
    degrees = {name: 0 for name in order}
    buckets: Dict[Tuple[int, ...], dict] = {}
    for monom, coeff in target.items():
        exps = tuple(monom[i] for i in indices)
        rest = list(monom)
        for i in indices:
            rest[i] = 0
        buckets.setdefault(exps, {})[tuple(rest)] = coeff
        for name, e in zip(order, exps):
            if e > degrees[name]:
                degrees[name] = e

    power_cache: Dict[Tuple[str, str, int], Poly] = {}

    def power(name: str, which: str, e: int) -> Poly:
        key = (name, which, e)
        if key not in power_cache:
            base = mapping[name].num if which == 'num' else mapping[name].den
            power_cache[key] = base ** e
        return power_cache[key]

    result = ring.zero
    for exps in sorted(buckets):
        term = ring.from_dict(buckets[exps])
        for name, e in zip(order, exps):
            if e:
                term = term * power(name, 'num', e)
            if degrees[name] - e:
                term = term * power(name, 'den', degrees[name] - e)
        result += term
    return result, degrees


def substitute_many(target: Poly, mapping: Mapping[str, RatFn]) -> RatFn:
    """Replace several variables at once; replacements may mention the replaced variables"""
    for replacement in mapping.values():
        if replacement.ring != target.ring:
            raise PolycoreError("target and replacement belong to different rings")
    num, degrees = _substitute_cleared(target, mapping)
    den = target.ring.one
    for name, d in degrees.items():
        if d:
            den = den * mapping[name].den ** d
    return RatFn(num, den)


def ratfn_substitute(target: RatFn, mapping: Mapping[str, RatFn]) -> RatFn:
    """Substitute into a rational function, cancelling the common powers of the replacement denominators"""
    num, num_degrees = _substitute_cleared(target.num, mapping)
    den, den_degrees = _substitute_cleared(target.den, mapping)
    for name in mapping:
        shift = den_degrees[name] - num_degrees[name]
        if shift > 0:
            num = num * mapping[name].den ** shift
        elif shift < 0:
            den = den * mapping[name].den ** (-shift)
    if not den:
        raise PolycoreError("composition produced an identically zero denominator")
    return RatFn(num, den)


def ratfn_sub(a: RatFn, b: RatFn) -> RatFn:
    return (a - b).normalized()


def ratfn_compose_map(T: Tuple[RatFn, RatFn], point: Tuple[RatFn, RatFn],
                      variables: Tuple[str, str] = ("x", "y")) -> Tuple[RatFn, RatFn]:
    """T evaluated at point, i.e. T(point) with both coordinates substituted simultaneously"""
    mapping = dict(zip(variables, point))
    return tuple(ratfn_substitute(component, mapping) for component in T)


def iterate_map(T: Tuple[RatFn, RatFn], k: int, variables: Tuple[str, str] = ("x", "y")) -> Tuple[RatFn, RatFn]:
    """T^k as a pair of rational functions, k >= 1"""
    if k < 1:
        raise PolycoreError(f"map iterate needs k >= 1, got {k}")
    point = T
    for _ in range(k - 1):
        point = ratfn_compose_map(T, point, variables)
    return point


def constant(ring, value: Rational) -> RatFn:
    return RatFn.of(ring(to_qq(value)))
