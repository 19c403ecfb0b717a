"""
Map evaluation, orbit simulation, boundedness envelopes and limit classification
"""
import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

import config
from errors import DomainError, ParameterError
from params import Form, NormParams, Params33, affine_map_for, step33

logger = logging.getLogger(__name__)


class LimitKind(str, Enum):
    EQUILIBRIUM = "Equilibrium"
    PERIOD_TWO = "PeriodTwo"
    UNDETERMINED = "Undetermined"


class Trend(str, Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Envelope:
    lo: float
    hi: float

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def to_dict(self) -> Dict:
        return {'lo': self.lo, 'hi': self.hi}


@dataclass(frozen=True)
class LimitClass:
    kind: LimitKind
    witness_index: int
    residual: float
    lo: Optional[float] = None
    hi: Optional[float] = None

    def to_dict(self) -> Dict:
        data = {'kind': self.kind.value, 'witness_index': self.witness_index, 'residual': self.residual}
        if self.kind == LimitKind.PERIOD_TWO:
            data['lo'] = self.lo
            data['hi'] = self.hi
        return data


@dataclass(frozen=True)
class Orbit:
    """
    A simulated trajectory.

    ``samples`` holds x_{-1}, x_0, x_1, ... up to the storage cap; once the cap is
    exceeded ``tail`` keeps the most recent values and ``truncated`` is set.
    """
    norm: NormParams
    x_init: Tuple[float, float]
    samples: np.ndarray
    tail: np.ndarray
    n_steps: int
    truncated: bool = False

    @property
    def length(self) -> int:
        return self.n_steps + 2

    def recent(self) -> Tuple[np.ndarray, int]:
        """Most recent stored values and the global index of the first of them"""
        values = self.tail if self.truncated else self.samples
        return values, self.length - len(values)


def step(norm: NormParams, x: float, y: float, index: int = -1) -> float:
    """
    (r + p x + y) / (q x + y) with x = y_n and y = y_{n-1}.

    Raises:
        DomainError: nonpositive denominator
    """
    den = norm.q * x + y
    if not den > 0:
        raise DomainError(f"nonpositive denominator {den} at x={x}, y={y}", index)
    return (norm.r + norm.p * x + y) / den


def _check_initial(norm: NormParams, x_minus1: float, x_0: float):
    if norm.form == Form.THREE_TWO:
        if not (x_minus1 > 0 and x_0 > 0):
            raise DomainError(f"initial conditions must be positive, got ({x_minus1}, {x_0})", 0)
    elif not (x_minus1 >= norm.L and x_0 >= norm.L):
        raise DomainError(f"initial conditions must be >= L={norm.L}, got ({x_minus1}, {x_0})", 0)


def simulate(norm: NormParams, x_minus1: float, x_0: float, n: int,
             cap: int = None, keep: int = None) -> Orbit:
    """
    Iterate the normalized map n times.

    Args:
        norm: normalized parameters
        x_minus1, x_0: initial conditions
        n: number of steps; the orbit has n + 2 samples
        cap: number of samples stored in full (default config.STEP_CAP)
        keep: size of the tail kept beyond the cap (default 2 * config.WINDOW)

    Raises:
        DomainError: an initial condition outside the state space or a nonpositive
            denominator, with the sample index where it happened
    """
    if n < 0:
        raise ParameterError(f"number of steps must be nonnegative, got {n}")
    cap = config.STEP_CAP if cap is None else cap
    keep = 2 * config.WINDOW if keep is None else keep
    _check_initial(norm, x_minus1, x_0)

    p, q, r = norm.p, norm.q, norm.r
    history = [x_minus1, x_0]
    tail = deque(history, maxlen=keep)
    prev, cur = x_minus1, x_0
    for i in range(n):
        den = q * cur + prev
        if not den > 0:
            raise DomainError(f"nonpositive denominator {den}", i + 2)
        prev, cur = cur, (r + p * cur + prev) / den
        if len(history) < cap:
            history.append(cur)
        tail.append(cur)

    return Orbit(
        norm=norm,
        x_init=(x_minus1, x_0),
        samples=np.asarray(history, dtype=float),
        tail=np.asarray(tail, dtype=float),
        n_steps=n,
        truncated=n + 2 > cap,
    )


def simulate_params33(params: Params33, x_minus1: float, x_0: float, n: int) -> np.ndarray:
    """Orbit of the six-parameter map, all n + 2 samples"""
    values = [x_minus1, x_0]
    for i in range(n):
        values.append(step33(params, values[-1], values[-2], i + 2))
    return np.asarray(values, dtype=float)


def envelope(norm: NormParams) -> Envelope:
    """
    Bounds that every orbit eventually stays in.

    ThreeTwo: lo = min(p/q, 1), hi = max(p/q, 1, (r + (p+1) lo) / ((q+1) lo)).
    ThreeTwoL: min/max ratio bounds of the originating (3-3) map pulled back
    through the affine change of variables.
    """
    if norm.form == Form.THREE_TWO:
        ratio = norm.p / norm.q
        lo = min(ratio, 1.0)
        hi = max(ratio, 1.0, (norm.r + (norm.p + 1) * lo) / ((norm.q + 1) * lo))
        return Envelope(lo, hi)

    if norm.origin is None:
        raise ParameterError("envelope of a ThreeTwoL form needs the originating Params33")
    origin = norm.origin
    numerators = (origin.alpha, origin.beta, origin.gamma)
    denominators = (origin.A, origin.B, origin.C)
    affine = affine_map_for(origin)
    lo = affine.inverse(min(numerators) / max(denominators))
    hi = affine.inverse(max(numerators) / min(denominators))
    return Envelope(lo, hi)


def _last_failure(mask: np.ndarray) -> int:
    """Position of the last False in mask, -1 when all True"""
    bad = np.flatnonzero(~mask)
    return int(bad[-1]) if len(bad) else -1


def _classify_values(values: np.ndarray, base: int, y_bar: float, tol: float, window: int) -> LimitClass:
    dev = np.abs(values - y_bar)
    eq_residual = float(dev[-window:].max())
    if eq_residual < tol:
        return LimitClass(LimitKind.EQUILIBRIUM, base + _last_failure(dev < tol) + 1, eq_residual)

    if len(values) >= window + 2:
        d2 = np.abs(values[2:] - values[:-2])
        d1 = np.abs(values[1:] - values[:-1])
        two_residual = float(d2[-window:].max())
        if two_residual < tol and float(d1[-window:].min()) > 10 * tol:
            lo, hi = sorted((float(values[-2]), float(values[-1])))
            return LimitClass(LimitKind.PERIOD_TWO, base + _last_failure(d2 < tol) + 1, two_residual, lo, hi)

    return LimitClass(LimitKind.UNDETERMINED, -1, eq_residual)


def classify_limit(orbit: Orbit, tol: float = None, window: int = None) -> LimitClass:
    """
    Decide whether the tail of an orbit sits at the equilibrium or on a two-cycle.

    Equilibrium: |x_n - y_bar| < tol over the last ``window`` samples.
    PeriodTwo: |x_{n+2} - x_n| < tol over the window while consecutive terms stay
    more than 10 tol apart. Anything else is Undetermined.
    """
    tol = config.TOL if tol is None else tol
    window = config.WINDOW if window is None else window
    if window < 4 or orbit.length <= window:
        raise ParameterError(f"classification needs orbit length > window >= 4 (length {orbit.length}, window {window})")
    values, base = orbit.recent()
    window = min(window, len(values))
    return _classify_values(values, base, orbit.norm.equilibrium, tol, window)


def _trend(values: np.ndarray) -> Trend:
    diffs = np.diff(values)
    if np.all(diffs >= 0):
        return Trend.INCREASING
    if np.all(diffs <= 0):
        return Trend.DECREASING
    return Trend.MIXED


def subsequence_trend(orbit: Orbit, burn_in: int = None) -> Dict[str, Trend]:
    """
    Monotonicity of the even- and odd-indexed terms x_{2n}, x_{2n+1} after burn-in.

    Ties count as Increasing, so a constant orbit reports Increasing twice.
    """
    if orbit.length < 6:
        raise ParameterError(f"subsequence trend needs at least 6 samples, got {orbit.length}")
    burn_in = config.BURN_IN if burn_in is None else burn_in
    values, base = orbit.recent()
    start = max(0, min(burn_in - base, len(values) - 6))
    tail = values[start:]
    # sample position k holds x_{k-1}
    first_index = base + start - 1
    offset = 0 if first_index % 2 == 0 else 1
    return {
        'even': _trend(tail[offset::2]),
        'odd': _trend(tail[1 - offset::2]),
    }


def settle(norm: NormParams, x_minus1: float, x_0: float, step_cap: int = None,
           tol: float = None, window: int = None, chunk: int = 4096) -> Tuple[LimitClass, int]:
    """
    Simulate in chunks until the tail classifies or the step cap is reached.

    A two-cycle is only accepted after it persists through one more chunk with
    unchanged values, so slowly damped oscillations are not reported as cycles.

    Returns:
        (LimitClass, number of steps taken)
    """
    step_cap = config.STEP_CAP if step_cap is None else step_cap
    tol = config.TOL if tol is None else tol
    window = config.WINDOW if window is None else window
    _check_initial(norm, x_minus1, x_0)

    p, q, r, y_bar = norm.p, norm.q, norm.r, norm.equilibrium
    buf = deque([x_minus1, x_0], maxlen=2 * window + 2)
    prev, cur = x_minus1, x_0
    steps = 0
    limit = LimitClass(LimitKind.UNDETERMINED, -1, abs(cur - y_bar))
    candidate = None
    while steps < step_cap:
        n = min(chunk, step_cap - steps)
        for i in range(n):
            den = q * cur + prev
            if not den > 0:
                raise DomainError(f"nonpositive denominator {den}", steps + i + 2)
            prev, cur = cur, (r + p * cur + prev) / den
            buf.append(cur)
        steps += n
        if len(buf) < window + 2:
            continue
        values = np.fromiter(buf, dtype=float)
        limit = _classify_values(values, steps + 2 - len(values), y_bar, tol, window)
        if limit.kind == LimitKind.EQUILIBRIUM:
            return limit, steps
        if limit.kind == LimitKind.PERIOD_TWO:
            if candidate is not None and abs(candidate.lo - limit.lo) < tol and abs(candidate.hi - limit.hi) < tol:
                return candidate, steps
            candidate = limit
        else:
            candidate = None
    if limit.kind == LimitKind.PERIOD_TWO:
        return limit, steps
    logger.debug(f"orbit from ({x_minus1}, {x_0}) undetermined after {steps} steps, residual {limit.residual}")
    return limit, steps
