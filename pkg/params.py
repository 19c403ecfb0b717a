"""
Parameter domain types, hypothesis validation and the changes of variables
between the six-parameter equation and its normalized three/four-parameter forms

    x_{n+1} = (alpha + beta x_n + gamma x_{n-1}) / (A + B x_n + C x_{n-1})      (3-3)
    y_{n+1} = (r + p y_n + y_{n-1}) / (q y_n + y_{n-1})                         (3-2 / 3-2-L)
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from errors import DomainError, ParameterError

logger = logging.getLogger(__name__)


class Form(str, Enum):
    """Normalized form of the equation"""
    THREE_TWO = "ThreeTwo"
    THREE_TWO_L = "ThreeTwoL"


@dataclass(frozen=True)
class Params33:
    """The six nonnegative coefficients of the (3-3) equation"""
    alpha: float
    beta: float
    gamma: float
    A: float
    B: float
    C: float

    @property
    def strictly_positive(self) -> bool:
        return min(self.alpha, self.beta, self.gamma, self.A, self.B, self.C) > 0

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['strictly_positive'] = self.strictly_positive
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "Params33":
        return cls(**{name: float(data[name]) for name in ('alpha', 'beta', 'gamma', 'A', 'B', 'C')})


@dataclass(frozen=True)
class ValidationReport:
    nonnegative: bool
    b_plus_c_positive: bool
    numerator_positive: bool
    strictly_positive: bool
    messages: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.nonnegative and self.b_plus_c_positive and self.numerator_positive

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['valid'] = self.valid
        return data


@dataclass(frozen=True)
class AffineMap:
    """x = scale * y + offset, taking a normalized orbit back to the (3-3) variable"""
    scale: float
    offset: float

    def __call__(self, y: float) -> float:
        return self.scale * y + self.offset

    def inverse(self, x: float) -> float:
        return (x - self.offset) / self.scale

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class NormParams:
    """
    Normalized parameters (p, q, r[, L]) with the cached positive equilibrium.

    Use the ``three_two`` / ``three_two_l`` constructors; they check the form's
    invariants and compute the equilibrium.
    """
    p: float
    q: float
    r: float
    L: float
    form: Form
    equilibrium: float
    origin: Optional[Params33] = None

    @classmethod
    def three_two(cls, p: float, q: float, r: float) -> "NormParams":
        if not (p > 0 and q > 0 and r >= 0):
            raise ParameterError(f"form ThreeTwo needs p>0, q>0, r>=0; got p={p}, q={q}, r={r}")
        return cls(p=p, q=q, r=r, L=0.0, form=Form.THREE_TWO, equilibrium=equilibrium(p, q, r))

    @classmethod
    def three_two_l(cls, p: float, q: float, r: float, L: float,
                    origin: Optional[Params33] = None) -> "NormParams":
        if not (p > 0 and q > 0):
            raise ParameterError(f"form ThreeTwoL needs p>0, q>0; got p={p}, q={q}")
        if not 0 < L < 1:
            raise ParameterError(f"form ThreeTwoL needs L in (0,1); got L={L}")
        y_bar = equilibrium(p, q, r)
        if y_bar <= L:
            raise ParameterError(f"equilibrium {y_bar} does not lie above L={L}")
        return cls(p=p, q=q, r=r, L=L, form=Form.THREE_TWO_L, equilibrium=y_bar, origin=origin)

    def f(self, x: float, y: float) -> float:
        """The normalized map without state-space checks"""
        return (self.r + self.p * x + y) / (self.q * x + y)

    def to_dict(self) -> Dict:
        return {
            'p': self.p,
            'q': self.q,
            'r': self.r,
            'L': self.L,
            'form': self.form.value,
            'equilibrium': self.equilibrium,
            'origin': self.origin.to_dict() if self.origin else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "NormParams":
        origin = Params33.from_dict(data['origin']) if data.get('origin') else None
        if data.get('form', Form.THREE_TWO.value) == Form.THREE_TWO_L.value:
            return cls.three_two_l(float(data['p']), float(data['q']), float(data['r']),
                                   float(data['L']), origin)
        return cls.three_two(float(data['p']), float(data['q']), float(data['r']))


@dataclass(frozen=True)
class ZForm:
    """z_{n+1} = (a + z_n + g z_{n-1}) / (b z_n + z_{n-1}) obtained from y_n = p z_n"""
    a: float
    g: float
    b: float
    u: float

    def to_pqr(self) -> Tuple[float, float, float]:
        p = 1.0 / self.g
        return p, self.b, self.a * p * p

    def to_dict(self) -> Dict:
        return asdict(self)


def validate(params: Params33) -> ValidationReport:
    """
    Check the standing hypotheses of the (3-3) equation.

    Never raises; callers decide what to do with an invalid report.
    """
    values = (params.alpha, params.beta, params.gamma, params.A, params.B, params.C)
    messages = []
    nonnegative = all(v >= 0 for v in values) and all(math.isfinite(v) for v in values)
    if not nonnegative:
        messages.append("all parameters must be finite and nonnegative")
    b_plus_c = params.B + params.C > 0
    if not b_plus_c:
        messages.append("B + C must be positive")
    numerator = params.alpha + params.beta + params.gamma > 0
    if not numerator:
        messages.append("alpha + beta + gamma must be positive")
    return ValidationReport(
        nonnegative=nonnegative,
        b_plus_c_positive=b_plus_c,
        numerator_positive=numerator,
        strictly_positive=nonnegative and params.strictly_positive,
        messages=messages,
    )


def equilibrium(p: float, q: float, r: float) -> float:
    """
    Unique positive equilibrium, the larger root of (q+1)x^2 - (p+1)x - r.

    Raises:
        ParameterError: q <= -1, negative discriminant or nonpositive root
    """
    if q <= -1:
        raise ParameterError(f"equilibrium needs q > -1, got q={q}")
    disc = (p + 1) ** 2 + 4 * r * (q + 1)
    if disc < 0:
        raise ParameterError(f"negative discriminant {disc} for p={p}, q={q}, r={r}")
    y_bar = (p + 1 + math.sqrt(disc)) / (2 * (q + 1))
    if y_bar <= 0:
        raise ParameterError(f"no positive equilibrium for p={p}, q={q}, r={r}")
    return y_bar


def affine_map_for(params: Params33) -> AffineMap:
    """x = (gamma/C + A/(B+C)) y - A/(B+C); with A = 0 this is x = (gamma/C) y"""
    if params.C <= 0 or params.B + params.C <= 0:
        raise ParameterError("affine change of variables needs C > 0")
    shift = params.A / (params.B + params.C)
    return AffineMap(scale=params.gamma / params.C + shift, offset=-shift)


def to_pqr_l(params: Params33) -> Tuple[NormParams, AffineMap]:
    """
    Reduce strictly positive (3-3) parameters to the (3-2-L) form.

    Returns:
        (NormParams of form ThreeTwoL carrying ``params`` as origin, AffineMap)
    """
    if not params.strictly_positive:
        raise ParameterError("to_pqr_l needs all six parameters strictly positive")
    alpha, beta, gamma, A, B, C = params.alpha, params.beta, params.gamma, params.A, params.B, params.C
    den = A * C + (B + C) * gamma
    p = (A * B + (B + C) * beta) / den
    q = B / C
    r = C * (B + C) * (B * alpha + C * alpha - A * beta - A * gamma) / den ** 2
    L = A * C / den
    norm = NormParams.three_two_l(p, q, r, L, origin=params)
    logger.debug(f"to_pqr_l: {params} -> p={p}, q={q}, r={r}, L={L}")
    return norm, affine_map_for(params)


def to_pqr(params: Params33) -> NormParams:
    """Reduce (3-3) parameters with A = 0 to the (3-2) form via x_n = (gamma/C) y_n"""
    if params.A != 0:
        raise ParameterError(f"to_pqr needs A = 0, got A={params.A}")
    if min(params.alpha, params.beta, params.gamma, params.B, params.C) <= 0:
        raise ParameterError("to_pqr needs alpha, beta, gamma, B, C strictly positive")
    r = params.alpha * params.C / params.gamma ** 2
    p = params.beta / params.gamma
    q = params.B / params.C
    return NormParams.three_two(p, q, r)


def to_zform(norm: NormParams) -> ZForm:
    """
    Rescale y_n = p z_n: a = r/p^2, g = 1/p, b = q.

    The z-form equilibrium is u = y_bar / p.
    """
    if norm.p <= 0:
        raise ParameterError(f"to_zform needs p > 0, got p={norm.p}")
    p = norm.p
    return ZForm(a=norm.r / (p * p), g=1.0 / p, b=norm.q, u=norm.equilibrium / p)


def step33(params: Params33, x: float, y: float, index: int = -1) -> float:
    """One step of the (3-3) map with x = x_n, y = x_{n-1}"""
    den = params.A + params.B * x + params.C * y
    if not den > 0:
        raise DomainError(f"nonpositive denominator {den} in (3-3) map", index)
    return (params.alpha + params.beta * x + params.gamma * y) / den
