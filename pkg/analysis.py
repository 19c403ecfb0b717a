"""
Analytic machinery for the normalized equation: partial-derivative signs,
critical values, the nested invariant-interval refinement, (m, M) systems and
two-cycles, linear stability, and the convergence decision tree
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from dynamics import envelope
from errors import DomainError, ParameterError
from params import NormParams, equilibrium

logger = logging.getLogger(__name__)


class CaseKind(str, Enum):
    INC_INC = "IncInc"
    DEC_DEC = "DecDec"
    DEC_INC = "DecInc"
    INC_DEC = "IncDec"
    MIXED = "Mixed"


class NestOutcome(str, Enum):
    COLLAPSED = "CollapsedToEquilibrium"
    MONOTONIC_WINDOW = "MonotonicWindow"
    EXHAUSTED = "Exhausted"


class Prediction(str, Enum):
    ALL_CONVERGE = "AllConvergeToEquilibrium"
    EQUILIBRIUM_OR_PERIOD_TWO = "EquilibriumOrPeriodTwo"


@dataclass(frozen=True)
class CriticalValues:
    K1: float
    K2: float


@dataclass(frozen=True)
class MonotonicityCase:
    kind: CaseKind
    m: float
    M: float

    def to_dict(self) -> Dict:
        return {'kind': self.kind.value, 'interval': [self.m, self.M]}


@dataclass(frozen=True)
class IntervalNest:
    levels: List[Tuple[float, float]]
    outcome: NestOutcome
    case: Optional[MonotonicityCase] = None

    def to_dict(self) -> Dict:
        return {
            'outcome': self.outcome.value,
            'case': self.case.to_dict() if self.case else None,
            'levels': [list(level) for level in self.levels],
        }


@dataclass(frozen=True)
class PeriodTwoSolution:
    m: float
    M: float

    def to_dict(self) -> Dict:
        return {'m': self.m, 'M': self.M}


@dataclass(frozen=True)
class StabilityReport:
    t1: float
    t2: float
    las: bool
    in_hypothesis: bool

    def to_dict(self) -> Dict:
        return {'t1': self.t1, 't2': self.t2, 'las': self.las, 'in_hypothesis': self.in_hypothesis}


@dataclass(frozen=True)
class BehaviorReport:
    """
    Outcome of the convergence decision tree.

    ``branch`` is the human-readable path, ``branch_key`` a short tag used for
    tallies, ``conditions`` every sufficient condition found to hold on the path.
    """
    branch: str
    branch_key: str
    prediction: Prediction
    period_two: Optional[PeriodTwoSolution] = None
    caveat: Optional[str] = None
    conditions: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'branch': self.branch,
            'branch_key': self.branch_key,
            'prediction': self.prediction.value,
            'period_two': self.period_two.to_dict() if self.period_two else None,
            'caveat': self.caveat,
            'conditions': list(self.conditions),
        }


def _sign(value: float) -> int:
    return int(value > 0) - int(value < 0)


def _f(p: float, q: float, r: float, x: float, y: float) -> float:
    return (r + p * x + y) / (q * x + y)


def partial_signs(p: float, q: float, r: float, x: float, y: float) -> Tuple[int, int]:
    """
    Signs of the partial derivatives of f at (x, y).

    D1 f = ((p-q) y - q r) / (q x + y)^2 and D2 f = ((q-p) x - r) / (q x + y)^2,
    so each sign depends only on the other coordinate.
    """
    if p == q:
        raise ParameterError("partial_signs is undefined for p = q; f is monotone in both arguments there")
    if not q * x + y > 0:
        raise DomainError(f"nonpositive denominator at x={x}, y={y}")
    return _sign((p - q) * y - q * r), _sign((q - p) * x - r)


def critical_values(p: float, q: float, r: float) -> CriticalValues:
    """K1 = q r / (p - q) where D1 f vanishes, K2 = -r / (p - q) where D2 f vanishes"""
    if p == q:
        raise ParameterError("critical values are undefined for p = q")
    return CriticalValues(K1=q * r / (p - q), K2=-r / (p - q))


def _candidates(p: float, q: float, r: float, m: float, M: float) -> List[Tuple[float, float]]:
    ends = (m, M)
    points = [(x, y) for x in ends for y in ends]
    if p != q:
        K = critical_values(p, q, r)
        if m <= K.K1 <= M:
            points.extend((x, K.K1) for x in ends)
        if m <= K.K2 <= M:
            points.extend((K.K2, y) for y in ends)
    return points


def extremal_points(p: float, q: float, r: float, m: float, M: float) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Points of [m, M]^2 where f attains its minimum and maximum"""
    if not 0 < m <= M:
        raise ParameterError(f"invalid interval [{m}, {M}]")
    points = _candidates(p, q, r, m, M)
    values = [_f(p, q, r, x, y) for x, y in points]
    return points[int(np.argmin(values))], points[int(np.argmax(values))]


def phi_Phi(p: float, q: float, r: float, m: float, M: float) -> Tuple[float, float]:
    """
    Minimum and maximum of f over [m, M]^2.

    Each partial derivative keeps its sign along lines parallel to its own axis,
    so the corners and the intersections with y = K1, x = K2 cover the extrema.
    """
    lo_point, hi_point = extremal_points(p, q, r, m, M)
    return _f(p, q, r, *lo_point), _f(p, q, r, *hi_point)


_CASES = {
    (1, 1): CaseKind.INC_INC,
    (-1, -1): CaseKind.DEC_DEC,
    (-1, 1): CaseKind.DEC_INC,
    (1, -1): CaseKind.INC_DEC,
}


def classify_monotonicity(p: float, q: float, r: float, m: float, M: float) -> MonotonicityCase:
    """Coordinate-wise monotonicity pattern of f on [m, M]^2"""
    if p == q:
        # both partials have the sign of -r; r = 0 makes f constant
        s = _sign(-r) or 1
        return MonotonicityCase(_CASES[(s, s)], m, M)
    K = critical_values(p, q, r)
    if m < K.K1 < M or m < K.K2 < M:
        return MonotonicityCase(CaseKind.MIXED, m, M)
    mid = 0.5 * (m + M)
    s1 = _sign((p - q) * mid - q * r) or 1
    s2 = _sign((q - p) * mid - r) or 1
    return MonotonicityCase(_CASES[(s1, s2)], m, M)


def refine_invariant_interval(norm: NormParams, tol: float = None, max_iter: int = None) -> IntervalNest:
    """
    Nest m_{l+1} = phi(m_l, M_l), M_{l+1} = Phi(m_l, M_l) starting from the envelope.

    Stops with CollapsedToEquilibrium when M_l - m_l < tol, with MonotonicWindow
    once neither K1 nor K2 lies in [m_l, M_l], and with Exhausted when the
    endpoints stall or max_iter is reached. Levels are clamped so that nesting
    and equilibrium membership hold exactly in floating point.
    """
    tol = config.REFINE_TOL if tol is None else tol
    max_iter = config.REFINE_MAX_ITER if max_iter is None else max_iter
    p, q, r, y_bar = norm.p, norm.q, norm.r, norm.equilibrium

    # endpoints moving less than this count as stalled
    stall = tol * 1e-3

    env = envelope(norm)
    m, M = min(env.lo, y_bar), max(env.hi, y_bar)
    levels = [(m, M)]
    if M - m < tol:
        return IntervalNest(levels, NestOutcome.COLLAPSED)

    for iteration in range(max_iter):
        if p != q:
            K = critical_values(p, q, r)
            if not (m <= K.K1 <= M or m <= K.K2 <= M):
                case = classify_monotonicity(p, q, r, m, M)
                logger.debug(f"monotonic window {case.kind.value} on [{m}, {M}] after {iteration} levels")
                return IntervalNest(levels, NestOutcome.MONOTONIC_WINDOW, case)
        phi, Phi = phi_Phi(p, q, r, m, M)
        new_m = min(max(m, phi), y_bar)
        new_M = max(min(M, Phi), y_bar)
        delta_m, delta_M = new_m - m, M - new_M
        m, M = new_m, new_M
        levels.append((m, M))
        if M - m < tol:
            return IntervalNest(levels, NestOutcome.COLLAPSED)
        if delta_m < stall and delta_M < stall:
            logger.debug(f"refinement stalled on [{m}, {M}] for p={p}, q={q}, r={r}")
            return IntervalNest(levels, NestOutcome.EXHAUSTED)

    return IntervalNest(levels, NestOutcome.EXHAUSTED)


def _positive_root_pair(S: float, P: float, L: float) -> Optional[Tuple[float, float]]:
    disc = S * S - 4 * P
    if not disc > 0:
        return None
    root = math.sqrt(disc)
    m, M = (S - root) / 2, (S + root) / 2
    if not (m > 0 and m >= L and m < M):
        return None
    return m, M


def _close(a: float, b: float, tol: float = 1e-10) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def period_two_solutions(p: float, q: float, r: float, L: float = 0.0) -> Optional[PeriodTwoSolution]:
    """
    Solutions m < M of the system f(M, m) = M, f(m, M) = m.

    Subtracting the two equations gives q (m + M) = p - 1, so there is nothing
    for p <= 1; the product is mM = (S + r) / (1 - q), so q >= 1 is excluded too.
    """
    if p <= 1 or q >= 1:
        return None
    S = (p - 1) / q
    P = (S + r) / (1 - q)
    pair = _positive_root_pair(S, P, L)
    if pair is None:
        return None
    m, M = pair
    if not (_close(_f(p, q, r, M, m), M) and _close(_f(p, q, r, m, M), m)):
        logger.warning(f"(m, M) pair ({m}, {M}) failed verification for p={p}, q={q}, r={r}")
        return None
    return PeriodTwoSolution(m, M)


def prime_period_two(p: float, q: float, r: float, L: float = 0.0) -> Optional[PeriodTwoSolution]:
    """
    Prime period-two cycle ..., m, M, m, M, ... of the equation: f(M, m) = m, f(m, M) = M.

    Here m + M = 1 - p and mM = (r + p (1 - p)) / (q - 1), so cycles need p < 1 < q.
    """
    if p >= 1 or q <= 1:
        return None
    S = 1 - p
    P = (r + p * (1 - p)) / (q - 1)
    pair = _positive_root_pair(S, P, L)
    if pair is None:
        return None
    m, M = pair
    if not (_close(_f(p, q, r, M, m), m) and _close(_f(p, q, r, m, M), M)):
        logger.warning(f"two-cycle ({m}, {M}) failed verification for p={p}, q={q}, r={r}")
        return None
    return PeriodTwoSolution(m, M)


def linearization(p: float, q: float, r: float) -> np.ndarray:
    """Jacobian of (x_n, x_{n-1}) -> (f(x_n, x_{n-1}), x_n) at the equilibrium"""
    y_bar = equilibrium(p, q, r)
    den = y_bar * (q + 1)
    return np.array([[(p - q * y_bar) / den, -(y_bar - 1) / den], [1.0, 0.0]])


def schur_cohn_las(p: float, q: float, r: float) -> StabilityReport:
    """
    Local asymptotic stability of the equilibrium.

    The characteristic polynomial is x^2 - t1 x - t2 and its roots lie in the
    open unit disk exactly when |t1| < 1 - t2 < 2.
    """
    y_bar = equilibrium(p, q, r)
    t1 = (p - q * y_bar) / (y_bar * (q + 1))
    t2 = -(y_bar - 1) / (y_bar * (q + 1))
    return StabilityReport(t1=t1, t2=t2, las=abs(t1) < 1 - t2 < 2, in_hypothesis=y_bar < p / q)


def spectral_radius(p: float, q: float, r: float) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(linearization(p, q, r)))))


def _kl_g(p, q, r, w, v):
    num = q * (1 + v) * (-q * (p - q + r) + (-p * p + p * q - q * r) * w)
    den = (1 + w) * (-q * (p - q - q * r) + (-p * p + p * q + q * q * r) * v)
    return num / den


def kocic_ladas_check(p: float, q: float, r: float, grid: np.ndarray = None) -> bool:
    """
    Check the hypotheses of the global attractivity theorem for the transformed
    equation w_{n+1} = w_n h(w_n, w_{n-1}), h = g / w, used when r < 0.

    On a logarithmic grid: g > 0, g(w, w) increasing in w, h decreasing in w
    and in v. Derivatives are centered differences.

    Raises:
        ParameterError: outside r < 0, p > q, p - q + r > 0
    """
    if not (r < 0 and p > q and p - q + r > 0):
        raise ParameterError(f"kocic_ladas_check needs r<0, p>q, p-q+r>0; got p={p}, q={q}, r={r}")
    grid = np.logspace(-3, 3, 31) if grid is None else np.asarray(grid, dtype=float)
    w, v = np.meshgrid(grid, grid, indexing='ij')
    hw = 1e-6 * w
    hv = 1e-6 * v

    g = _kl_g(p, q, r, w, v)
    if not np.all(g > 0):
        return False

    diag = (_kl_g(p, q, r, grid * (1 + 1e-6), grid * (1 + 1e-6))
            - _kl_g(p, q, r, grid * (1 - 1e-6), grid * (1 - 1e-6))) / (2e-6 * grid)
    increasing = bool(np.all(diag > 0))

    dh_dw = (_kl_g(p, q, r, w + hw, v) / (w + hw) - _kl_g(p, q, r, w - hw, v) / (w - hw)) / (2 * hw)
    dh_dv = (_kl_g(p, q, r, w, v + hv) - _kl_g(p, q, r, w, v - hv)) / (2 * hv * w)
    ok = increasing and bool(np.all(dh_dw < 0)) and bool(np.all(dh_dv < 0))
    logger.debug(f"Kocic-Ladas hypotheses for p={p}, q={q}, r={r}: {ok}")
    return ok


def embedded_map(p: float, q: float, r: float, y: float, z: float) -> float:
    """x_{n+1} as a function of x_{n-1} = y and x_{n-2} = z, i.e. f(f(y, z), y)"""
    num = p * r + p * p * y + q * r * y + q * y * y + p * z + r * z + y * z
    den = q * r + p * q * y + q * y * y + q * z + y * z
    return num / den


def embed_h(p: float, q: float, r: float, y: float, z: float) -> float:
    """Numerator h(y, z) with D_y of the embedded map equal to -h / den^2"""
    return (-q * q * r * r + 2 * p * q * r * y - 2 * q * q * r * y + p * p * q * y * y - p * q * q * y * y
            + q * q * r * y * y + p * r * z - q * r * z + p * q * r * z - q * q * r * z + 2 * p * q * y * z
            - 2 * q * q * y * z + 2 * q * r * y * z + p * z * z - q * z * z + r * z * z)


def _report(path: List[str], key: str, prediction: Prediction, **kwargs) -> BehaviorReport:
    return BehaviorReport(branch=" > ".join(path), branch_key=key, prediction=prediction, **kwargs)


def behavior_report(norm: NormParams) -> BehaviorReport:
    """
    Walk the decision tree of the global convergence proof.

    p = q, collapse of the interval nest, and the inc-inc / dec-dec windows give
    convergence directly. A dec-inc window allows a two-cycle. The inc-dec
    window converges through one of four sufficient conditions, depending on
    the sign of r and on where (p, q, r) sits relative to r = p^2 q - p.
    """
    p, q, r = norm.p, norm.q, norm.r
    path = [f"p={p:g}, q={q:g}, r={r:g}"]

    if p == q:
        path.append("p=q: f monotone in both arguments, nested intervals collapse")
        return _report(path, "p_equals_q", Prediction.ALL_CONVERGE)

    nest = refine_invariant_interval(norm)
    path.append(f"interval nest: {nest.outcome.value} after {len(nest.levels) - 1} levels")

    if nest.outcome == NestOutcome.COLLAPSED:
        return _report(path, "collapsed", Prediction.ALL_CONVERGE)

    if nest.outcome == NestOutcome.EXHAUSTED:
        path.append("refinement stalled; conservative prediction")
        return _report(path, "exhausted", Prediction.EQUILIBRIUM_OR_PERIOD_TWO,
                       period_two=prime_period_two(p, q, r, norm.L),
                       caveat="interval refinement did not exclude the critical values")

    kind = nest.case.kind
    path.append(f"window {kind.value} on [{nest.case.m:.6g}, {nest.case.M:.6g}]")

    if kind in (CaseKind.INC_INC, CaseKind.DEC_DEC):
        key = "inc_inc" if kind == CaseKind.INC_INC else "dec_dec"
        path.append("monotone in both arguments: no (m,M) pair in the window")
        return _report(path, key, Prediction.ALL_CONVERGE)

    if kind == CaseKind.DEC_INC:
        cycle = prime_period_two(p, q, r, norm.L)
        path.append("dec-inc: every solution converges to the equilibrium or to a two-cycle")
        return _report(path, "dec_inc", Prediction.EQUILIBRIUM_OR_PERIOD_TWO, period_two=cycle)

    if r >= 0:
        conditions = []
        if q >= 1 or p <= 1:
            conditions.append("q>=1 or p<=1: the (m,M) system has no solutions")
        if r <= p * p * q - p:
            conditions.append("r<=p^2q-p: the embedded third-order map is decreasing")
        if p > 1 and q < 1 and r > p * p * q - p:
            conditions.append("p>1, q<1, r>p^2q-p: the invariant function decreases along orbits")
        path.append("inc-dec, r>=0")
        path.append(conditions[0])
        if conditions[0].startswith("q>=1"):
            key = "inc_dec_no_pair"
        elif conditions[0].startswith("r<="):
            key = "inc_dec_embedded"
        else:
            key = "inc_dec_invariant"
        return _report(path, key, Prediction.ALL_CONVERGE, conditions=conditions)

    path.append("inc-dec, r<0")
    try:
        holds = kocic_ladas_check(p, q, r)
    except ParameterError as e:
        logger.warning(f"negative-r branch outside its hypotheses: {e}")
        holds = False
    if holds:
        path.append("transformed equation satisfies the global attractivity hypotheses")
        return _report(path, "inc_dec_negative_r", Prediction.ALL_CONVERGE,
                       conditions=["r<0: Kocic-Ladas hypotheses hold"])
    path.append("transformed equation hypotheses not confirmed on the grid")
    return _report(path, "inc_dec_negative_r", Prediction.EQUILIBRIUM_OR_PERIOD_TWO,
                   caveat="Kocic-Ladas hypotheses could not be confirmed numerically")
