"""
Exact sparse multivariate polynomials over the rationals

Polynomials are sympy ``PolyElement`` values of a graded-lex ``PolyRing`` over QQ:
a hash map from exponent tuples to nonzero rational coefficients. A VarTable owns
the ring; polynomials from different tables never mix.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from errors import PolycoreError

logger = logging.getLogger(__name__)

Poly = PolyElement
Monomial = Tuple[int, ...]
Rational = Union[int, Fraction]

MAX_VARIABLES = 16


class VarTable:
    """Ordered, unique variable names and the polynomial ring they generate"""

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise PolycoreError(f"variable names must be unique: {names}")
        if not 0 < len(names) <= MAX_VARIABLES:
            raise PolycoreError(f"a VarTable holds 1..{MAX_VARIABLES} variables, got {len(names)}")
        self.names = names
        self.ring = PolyRing(names, QQ, grlex)
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __repr__(self) -> str:
        return f"VarTable({', '.join(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PolycoreError(f"unknown variable {name!r} in {self!r}")

    def gen(self, name: str) -> Poly:
        return self.ring.gens[self.index(name)]

    def gens(self, *names: str) -> Tuple[Poly, ...]:
        return tuple(self.gen(name) for name in names)

    def const(self, value: Rational) -> Poly:
        return self.ring(to_qq(value))

    def owns(self, a: Poly) -> bool:
        return a.ring == self.ring


def to_qq(value: Rational):
    """int, Fraction or QQ element to a QQ element"""
    return QQ(int(value.numerator), int(value.denominator))


def to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def _same_ring(a: Poly, b: Poly):
    if a.ring != b.ring:
        raise PolycoreError(f"polynomials from different variable tables: {a.ring.symbols} vs {b.ring.symbols}")


def add(a: Poly, b: Poly) -> Poly:
    _same_ring(a, b)
    return a + b


def mul(a: Poly, b: Poly) -> Poly:
    _same_ring(a, b)
    return a * b


def pow(a: Poly, k: int) -> Poly:
    if k < 0:
        raise PolycoreError(f"negative power {k}")
    return a ** k


def degree_in(a: Poly, index: int) -> int:
    """Degree in one variable; 0 for the zero polynomial"""
    return max((monom[index] for monom in a.keys()), default=0)


def split_by_variable(a: Poly, index: int) -> Dict[int, Poly]:
    """a = sum_j parts[j] * x_index^j with parts free of x_index"""
    buckets: Dict[int, dict] = {}
    for monom, coeff in a.items():
        j = monom[index]
        if j:
            monom = monom[:index] + (0,) + monom[index + 1:]
        buckets.setdefault(j, {})[monom] = coeff
    return {j: a.ring.from_dict(terms) for j, terms in buckets.items()}


def evaluate(a: Poly, point: Union[Mapping[str, Rational], Sequence[Rational]]) -> Fraction:
    """
    Exact value of a at a rational point.

    Args:
        point: values by variable name, or a sequence aligned with the ring's variables
    """
    names = [str(s) for s in a.ring.symbols]
    if isinstance(point, Mapping):
        values = [point.get(name) for name in names]
    else:
        if len(point) != len(names):
            raise PolycoreError(f"point has {len(point)} coordinates, ring has {len(names)} variables")
        values = list(point)
    values = [None if v is None else to_qq(v) for v in values]

    powers = [{} for _ in names]
    total = QQ(0)
    for monom, coeff in a.items():
        term = coeff
        for i, e in enumerate(monom):
            if not e:
                continue
            if values[i] is None:
                raise PolycoreError(f"no value given for variable {names[i]}")
            cached = powers[i].get(e)
            if cached is None:
                cached = powers[i][e] = values[i] ** e
            term = term * cached
        total += term
    return to_fraction(total)


def monomial_text(names: Sequence[str], monom: Monomial) -> str:
    factors = []
    for name, e in zip(names, monom):
        if e == 1:
            factors.append(name)
        elif e:
            factors.append(f"{name}^{e}")
    return "*".join(factors) if factors else "1"


def sorted_terms(a: Poly):
    """Terms in descending graded-lex order"""
    return a.terms(order=grlex)


def to_text(a: Poly) -> str:
    """coef*x^a*y^b + ... in descending graded-lex order; '0' for the zero polynomial"""
    if not a:
        return "0"
    names = [str(s) for s in a.ring.symbols]
    pieces = []
    for monom, coeff in sorted_terms(a):
        c = to_fraction(coeff)
        sign = "-" if c < 0 else "+"
        body = str(abs(c)) if not any(monom) else f"{abs(c)}*{monomial_text(names, monom)}"
        pieces.append((sign, body))
    first_sign, first = pieces[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


@dataclass(frozen=True)
class CoefficientReport:
    n_terms: int
    n_negative: int
    min_coeff: Fraction
    max_total_degree: int
    witness: str = ""

    @property
    def all_nonnegative(self) -> bool:
        return self.n_negative == 0

    def to_dict(self) -> Dict:
        return {
            'n_terms': self.n_terms,
            'n_negative': self.n_negative,
            'min_coeff': str(self.min_coeff),
            'max_total_degree': self.max_total_degree,
            'witness': self.witness,
        }


def coefficient_report(a: Poly) -> CoefficientReport:
    """
    Term statistics. n_negative == 0 certifies a >= 0 on the closed positive orthant.

    ``witness`` names the most negative term, or is empty when there is none.
    """
    if not a:
        return CoefficientReport(0, 0, Fraction(0), 0)
    names = [str(s) for s in a.ring.symbols]
    n_negative = 0
    min_coeff = None
    min_monom = None
    max_degree = 0
    for monom, coeff in a.items():
        if coeff < 0:
            n_negative += 1
        if min_coeff is None or coeff < min_coeff or (coeff == min_coeff and monom > min_monom):
            min_coeff, min_monom = coeff, monom
        max_degree = max(max_degree, sum(monom))
    witness = ""
    if n_negative:
        witness = f"{to_fraction(min_coeff)}*{monomial_text(names, min_monom)}"
    return CoefficientReport(len(a), n_negative, to_fraction(min_coeff), max_degree, witness)
