"""
Positivity and identity certificates

Every check produces a Certificate: a verdict, the coefficient statistics of the
final numerator and, for positivity claims, a soundness report from exact
evaluations of the original expression at random points of the mapped region.
"""
import asyncio
import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

import config
from errors import PolycoreError
from polycore.poly import CoefficientReport, Poly, coefficient_report, evaluate, monomial_text, sorted_terms, to_fraction
from polycore.ratfn import RatFn, substitute, substitute_many
from certify.expressions import (
    A_TABLE, CUBIC_TABLE, H_TABLE, MAP_TABLE, PARAM_TABLE, build_a_coeffs, build_embedded_map, build_h,
    build_h_partials, cubic, delta, delta1_factors, delta_parts, delta_value, h_corner_value, normalized_pqr,
)
from certify.plans import (
    SUBCASES, SubstitutionPlan, a1_literal_plan, a1_plan, claim3_plan, claim4_plan, embed_h_plan,
)

logger = logging.getLogger(__name__)

CLAIMS = ("delta1", "claim3", "claim4", "embed-h", "a-coeffs", "identities", "cubic")

STRICTNESS_CAVEAT = (
    "nonnegative coefficients give >= 0 on the region; vanishing only at the "
    "equilibrium slack pattern is checked by sampling, not proved"
)


class Verdict(str, Enum):
    ALL_NONNEGATIVE = "AllCoefficientsNonnegative"
    IDENTITY_HOLDS = "IdentityHolds"
    REFUTED = "Refuted"


@dataclass
class SoundnessReport:
    n_samples: int
    n_positive: int = 0
    n_zero: int = 0
    n_negative: int = 0
    n_zero_off_equilibrium: int = 0
    witness: str = ""

    @property
    def ok(self) -> bool:
        return self.n_negative == 0 and self.n_zero_off_equilibrium == 0

    def to_dict(self) -> Dict:
        return {
            'success': self.ok,
            'n_samples': self.n_samples,
            'n_positive': self.n_positive,
            'n_zero': self.n_zero,
            'n_negative': self.n_negative,
            'n_zero_off_equilibrium': self.n_zero_off_equilibrium,
            'witness': self.witness,
        }


@dataclass
class Certificate:
    claim: str
    verdict: Verdict
    description: str
    stats: Optional[CoefficientReport] = None
    witness: str = ""
    plan: Optional[SubstitutionPlan] = None
    denominator_cert: List[Dict] = field(default_factory=list)
    fixed_point_annihilated: Optional[bool] = None
    soundness: Optional[SoundnessReport] = None
    parts: List["Certificate"] = field(default_factory=list)
    controls: List["Certificate"] = field(default_factory=list)
    inspection: Dict = field(default_factory=dict)
    caveat: Optional[str] = None
    wall_time: float = 0.0

    @property
    def refuted(self) -> bool:
        return self.verdict == Verdict.REFUTED

    def to_dict(self, timing: bool = True) -> Dict:
        data = {
            'claim': self.claim,
            'verdict': self.verdict.value,
            'description': self.description,
            'witness': self.witness,
        }
        if self.stats is not None:
            data.update({
                'n_terms': self.stats.n_terms,
                'n_negative': self.stats.n_negative,
                'min_coeff': str(self.stats.min_coeff),
                'max_total_degree': self.stats.max_total_degree,
            })
        if self.plan is not None:
            data['plan'] = self.plan.to_dict()
        if self.denominator_cert:
            data['denominator_cert'] = self.denominator_cert
        if self.fixed_point_annihilated is not None:
            data['fixed_point_annihilated'] = self.fixed_point_annihilated
        if self.soundness is not None:
            data['soundness'] = self.soundness.to_dict()
        if self.parts:
            data['parts'] = [part.to_dict(timing) for part in self.parts]
        if self.controls:
            data['controls'] = [control.to_dict(timing) for control in self.controls]
        if self.inspection:
            data['inspection'] = self.inspection
        if self.caveat:
            data['caveat'] = self.caveat
        if timing:
            data['wall_time'] = round(self.wall_time, 3)
        return data


def _rng(seed: int, label: str) -> np.random.Generator:
    key = zlib.crc32(label.encode("utf-8"))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, key])))


def _draw(rng: np.random.Generator, strict: bool) -> Fraction:
    """A small nonnegative rational; zero one time in five unless strict"""
    if not strict and rng.random() < 0.2:
        return Fraction(0)
    return Fraction(int(rng.integers(1, 60)), int(rng.integers(1, 12)))


def _first_term(residual: Poly) -> str:
    names = [str(s) for s in residual.ring.symbols]
    monom, coeff = sorted_terms(residual)[0]
    return f"{to_fraction(coeff)}*{monomial_text(names, monom)}"


def _identity(claim: str, description: str, residual: Poly) -> Certificate:
    if not residual:
        return Certificate(claim, Verdict.IDENTITY_HOLDS, description, stats=coefficient_report(residual))
    return Certificate(claim, Verdict.REFUTED, description, stats=coefficient_report(residual),
                       witness=_first_term(residual))


def _positivity(claim: str, description: str, poly: Poly) -> Certificate:
    stats = coefficient_report(poly)
    if stats.all_nonnegative and poly:
        return Certificate(claim, Verdict.ALL_NONNEGATIVE, description, stats=stats)
    witness = stats.witness or "identically zero"
    return Certificate(claim, Verdict.REFUTED, description, stats=stats, witness=witness)


def _denominator_cert(plan: SubstitutionPlan, factors) -> List[Dict]:
    """Each factor pushed through the plan must be nonzero with nonnegative coefficients"""
    certs = []
    for label, factor in factors:
        mapped = plan.apply(factor).num
        report = coefficient_report(mapped)
        certs.append({
            'factor': label,
            'positive': bool(mapped) and report.all_nonnegative,
            'n_terms': report.n_terms,
            'n_negative': report.n_negative,
        })
    for step in plan.steps:
        report = coefficient_report(step.replacement.den)
        certs.append({
            'factor': f"cleared {step.var}",
            'positive': report.all_nonnegative,
            'n_terms': report.n_terms,
            'n_negative': report.n_negative,
        })
    return certs


def _annihilated(poly: Poly, fixed_vars) -> bool:
    """No term survives when every fixed-point slack variable is set to zero"""
    names = [str(s) for s in poly.ring.symbols]
    indices = [names.index(v) for v in fixed_vars]
    return all(any(monom[i] for i in indices) for monom in poly.keys())


def _sample_slack(plan: SubstitutionPlan, rng: np.random.Generator) -> Dict[str, Fraction]:
    return {name: _draw(rng, name in plan.strict) for name in plan.slack}


def _delta_soundness(k: int, plan: SubstitutionPlan, samples: int, seed: int) -> SoundnessReport:
    report = SoundnessReport(samples)
    rng = _rng(seed, plan.claim)
    for _ in range(samples):
        point = plan.map_point(_sample_slack(plan, rng))
        value = delta_value(k, point['x'], point['y'], point['u'], point['g'], point['b'])
        if value > 0:
            report.n_positive += 1
        elif value == 0:
            report.n_zero += 1
            if not (point['x'] == point['u'] and point['y'] == point['u']):
                report.n_zero_off_equilibrium += 1
                report.witness = report.witness or _point_text(point)
        else:
            report.n_negative += 1
            report.witness = report.witness or _point_text(point)
    return report


def _point_text(point: Dict[str, Fraction]) -> str:
    return ", ".join(f"{name}={value}" for name, value in sorted(point.items()))


def _certify_delta(k: int, plan: SubstitutionPlan, samples: int, seed: int) -> Certificate:
    start = time.perf_counter()
    logger.info(f"{plan.claim}: expanding the numerator of V - V o T^{k}")
    parts = delta_parts(k)
    result = plan.apply(parts.num)
    logger.info(f"{plan.claim}: final numerator has {len(result.num)} terms")

    cert = _positivity(plan.claim, f"V - V o T^{k} >= 0 on {plan.region}", result.num)
    cert.plan = plan
    cert.denominator_cert = _denominator_cert(plan, parts.den_factors)
    cert.fixed_point_annihilated = _annihilated(result.num, plan.fixed_point_vars)
    cert.caveat = STRICTNESS_CAVEAT
    bad_den = [entry['factor'] for entry in cert.denominator_cert if not entry['positive']]
    if bad_den and not cert.refuted:
        cert.verdict = Verdict.REFUTED
        cert.witness = f"denominator factor not certified positive: {', '.join(bad_den)}"

    cert.soundness = _delta_soundness(k, plan, samples, seed)
    if not cert.soundness.ok:
        logger.error(f"❌ {plan.claim}: sampling contradicts the expansion at {cert.soundness.witness}")
        if not cert.refuted:
            cert.verdict = Verdict.REFUTED
            cert.witness = f"negative sample: {cert.soundness.witness}"
    cert.wall_time = time.perf_counter() - start
    return cert


def verify_delta1_factorization(perturb: bool = False, checks: int = 100, seed: int = 0) -> Certificate:
    """
    Δ1 (x y (b y + x) F3) + (1 + y) F1 F2 == 0 with F1, F2, F3 taken at (y, x).

    Args:
        perturb: add 1 to F1, a control that must be refuted
        checks: exact evaluations of the factored form against V - V o T
    """
    start = time.perf_counter()
    x, y, b = MAP_TABLE.gens("x", "y", "b")
    d1 = delta(1)
    F1, F2, F3 = delta1_factors()
    if perturb:
        F1 = F1 + 1
    residual = d1.num * (x * y * (b * y + x) * F3) + (1 + y) * F1 * F2 * d1.den
    cert = _identity("delta1", "first decrement equals -(1+y) F1 F2 / (x y (b y + x) F3)", residual)

    rng = _rng(seed, "delta1-factorization")
    mismatches = 0
    for _ in range(checks):
        b_, g_, t_ = _draw(rng, True), _draw(rng, True), _draw(rng, False)
        u_ = (g_ + 1) / (b_ + 1) + t_
        x_, y_ = _draw(rng, True), _draw(rng, True)
        point = {'x': x_, 'y': y_, 'u': u_, 'g': g_, 'b': b_}
        f3 = evaluate(F3, point)
        if f3 == 0:
            continue
        factored = -(1 + y_) * evaluate(F1, point) * evaluate(F2, point) / (x_ * y_ * (b_ * y_ + x_) * f3)
        if factored != delta_value(1, x_, y_, u_, g_, b_):
            mismatches += 1
    cert.inspection = {'numeric_checks': checks, 'numeric_mismatches': mismatches}
    if mismatches and not cert.refuted:
        cert.verdict = Verdict.REFUTED
        cert.witness = f"{mismatches} numeric mismatches"
    if not perturb:
        cert.soundness = certify_claim1_sampling(seed=seed)
    cert.wall_time = time.perf_counter() - start
    return cert


def certify_claim1_sampling(samples: int = None, seed: int = 0) -> SoundnessReport:
    """
    Exact Δ1 at random points of the mixed quadrants, with b < 1, g < 1,
    1 < u < 1/b and u >= (g+1)/(b+1). Every value must be positive.
    """
    samples = config.SAMPLES if samples is None else samples
    rng = _rng(seed, "claim1")
    report = SoundnessReport(samples)
    for _ in range(samples):
        b = Fraction(int(rng.integers(1, 20)), 20)
        g = Fraction(int(rng.integers(1, 20)), 20)
        lo = max(Fraction(1), (g + 1) / (b + 1))
        u = lo + (1 / b - lo) * Fraction(int(rng.integers(1, 20)), 20)
        below = u * Fraction(int(rng.integers(1, 11)), 10)
        above = u + _draw(rng, False)
        if below == u and above == u:
            above = u + 1
        x, y = (below, above) if rng.random() < 0.5 else (above, below)
        value = delta_value(1, x, y, u, g, b)
        if value > 0:
            report.n_positive += 1
        else:
            if value == 0:
                report.n_zero += 1
                report.n_zero_off_equilibrium += 1
            else:
                report.n_negative += 1
            report.witness = report.witness or _point_text({'x': x, 'y': y, 'u': u, 'g': g, 'b': b})
    return report


def certify_claim3(subcase: str, samples: int = None, seed: int = 0) -> Certificate:
    samples = config.SAMPLES if samples is None else samples
    return _certify_delta(2, claim3_plan(subcase), samples, seed)


def certify_claim4(subcase: str, samples: int = None, seed: int = 0) -> Certificate:
    samples = config.SAMPLES if samples is None else samples
    return _certify_delta(3, claim4_plan(subcase), samples, seed)


def verify_h_derivatives() -> List[Certificate]:
    """Closed-form partials of h, its corner value and the partials of the embedded map"""
    table = H_TABLE
    p, q, r, y, z = table.gens("p", "q", "r", "y", "z")
    h = build_h(table)
    D1, D2 = build_h_partials(table)
    checks = [
        _identity("embed-h/D1h", "D_y h matches its closed form", h.diff(table.gen("y")) - D1),
        _identity("embed-h/D2h", "D_z h matches its closed form", h.diff(table.gen("z")) - D2),
    ]

    corner = RatFn(q * r, p - q)
    value = substitute_many(h, {"y": corner, "z": corner})
    expected = h_corner_value(table)
    checks.append(_identity("embed-h/corner", "h at (K, K) equals q (1+q)^2 r^2 (p^2 - p q + q r) / (p - q)^2",
                            value.num * expected.den - expected.num * value.den))

    fhat = build_embedded_map(table)
    N, D = fhat.num, fhat.den
    checks.append(_identity("embed-h/Dy-fhat", "numerator of D_y f-hat equals -h",
                            N.diff(y) * D - N * D.diff(y) + h))
    checks.append(_identity("embed-h/Dz-fhat", "numerator of D_z f-hat equals -(r + (p-q) y)(-q r + (p-q) y)",
                            N.diff(z) * D - N * D.diff(z) + (r + (p - q) * y) * (-q * r + (p - q) * y)))
    return checks


def certify_embed_h(samples: int = None, seed: int = 0) -> Certificate:
    samples = config.SAMPLES if samples is None else samples
    start = time.perf_counter()
    plan = embed_h_plan()
    h = build_h(H_TABLE)
    result = plan.apply(h)
    cert = _positivity("embed-h", f"h >= 0 on {plan.region}", result.num)
    cert.plan = plan
    cert.denominator_cert = _denominator_cert(plan, [])
    cert.parts = verify_h_derivatives()
    if any(part.refuted for part in cert.parts) and not cert.refuted:
        cert.verdict = Verdict.REFUTED
        cert.witness = next(f"{part.claim}: {part.witness}" for part in cert.parts if part.refuted)

    report = SoundnessReport(samples)
    rng = _rng(seed, "embed-h")
    for _ in range(samples):
        point = plan.map_point(_sample_slack(plan, rng))
        value = evaluate(h, point)
        if value > 0:
            report.n_positive += 1
        elif value == 0:
            report.n_zero += 1
        else:
            report.n_negative += 1
            report.witness = report.witness or _point_text(point)
    cert.soundness = report
    if not report.ok and not cert.refuted:
        cert.verdict = Verdict.REFUTED
        cert.witness = f"negative sample: {report.witness}"
    cert.wall_time = time.perf_counter() - start
    return cert


def certify_a_coeffs(samples: int = None, seed: int = 0) -> Certificate:
    """
    a0 and a2 directly; a1 on 0 <= r <= p^2 q - p through q = (1+kappa)/p,
    r = p kappa / (1 + sigma). The plan r = p^2 q - p - e, p = 1 + pi is run as
    well and its leftover negative terms are reported under ``inspection``.
    """
    samples = config.SAMPLES if samples is None else samples
    start = time.perf_counter()
    a0, a1, a2 = build_a_coeffs(A_TABLE)
    plan = a1_plan()
    parts = [
        _positivity("a-coeffs/a0", "a0 has nonnegative coefficients", a0),
        _positivity("a-coeffs/a2", "a2 has nonnegative coefficients", a2),
    ]
    a1_cert = _positivity("a-coeffs/a1", f"a1 >= 0 on {plan.region}", plan.apply(a1).num)
    a1_cert.plan = plan
    a1_cert.denominator_cert = _denominator_cert(plan, [])
    parts.append(a1_cert)

    literal = a1_literal_plan()
    leftover = coefficient_report(literal.apply(a1).num)

    report = SoundnessReport(samples)
    rng = _rng(seed, "a-coeffs")
    for _ in range(samples):
        p = 1 + _draw(rng, True)
        q = (1 + _draw(rng, False)) / p
        e = (p * p * q - p) * Fraction(int(rng.integers(0, 11)), 10)
        r = p * p * q - p - e
        value = evaluate(a1, {'p': p, 'q': q, 'r': r})
        if value > 0:
            report.n_positive += 1
        elif value == 0:
            report.n_zero += 1
        else:
            report.n_negative += 1
            report.witness = report.witness or _point_text({'p': p, 'q': q, 'r': r})
    a1_cert.soundness = report

    refuted = [part for part in parts if part.refuted] + ([] if report.ok else [a1_cert])
    cert = Certificate(
        "a-coeffs",
        Verdict.REFUTED if refuted else Verdict.ALL_NONNEGATIVE,
        "a0 > 0, a2 > 0 and a1 >= 0 under r <= p^2 q - p",
        witness=f"{refuted[0].claim}: {refuted[0].witness}" if refuted else "",
        parts=parts,
        inspection={'a1_literal_plan': literal.to_dict(), 'a1_literal_leftover': leftover.to_dict()},
    )
    cert.wall_time = time.perf_counter() - start
    return cert


def certify_parameter_identities() -> Certificate:
    """q + r + 1, p - q + r and the auxiliary bound on gamma R / (A C) as exact identities in A, B, C, alpha, beta, gamma"""
    start = time.perf_counter()
    table = PARAM_TABLE
    A, B, C, alpha, beta, gamma = table.gens("A", "B", "C", "alpha", "beta", "gamma")
    p, q, r = normalized_pqr(table)
    one = RatFn.of(table.ring.one)
    D = A * C + B * gamma + C * gamma
    R = (A**2 * C**2 + B * C**2 * alpha + C**3 * alpha - A * C**2 * beta + 2 * A * B * C * gamma
         + A * C**2 * gamma + B**2 * gamma**2 + 2 * B * C * gamma**2 + C**2 * gamma**2)
    bracket = -C**2 * alpha + A * C * gamma - C * beta * gamma + B * gamma**2

    def residual(lhs: RatFn, rhs: RatFn) -> Poly:
        return lhs.num * rhs.den - rhs.num * lhs.den

    sum_identity = residual(q + r + one, RatFn((B + C) * R, C * D**2))
    diff_identity = residual(p - q + r, RatFn(-(B + C)**2 * bracket, C * D**2))
    aux_rhs = RatFn(A * C**3 * alpha + B * C**2 * alpha * gamma + C**3 * alpha * gamma + A * B * C * gamma**2
                    + A * C**2 * gamma**2 + 2 * B * C * gamma**3 + B**2 * gamma**3 + C**2 * gamma**3, A * C)
    aux_identity = residual(RatFn(gamma * R, A * C) - RatFn.of(bracket), aux_rhs)

    parts = [
        _identity("identities/q+r+1", "q + r + 1 = (B + C) R / (C D^2)", sum_identity),
        _identity("identities/p-q+r", "p - q + r = -(B + C)^2 (-C^2 alpha + A C gamma - C beta gamma + B gamma^2) / (C D^2)",
                  diff_identity),
        _identity("identities/aux", "gamma R / (A C) - bracket has only positive terms", aux_identity),
    ]
    refuted = [part for part in parts if part.refuted]
    cert = Certificate(
        "identities",
        Verdict.REFUTED if refuted else Verdict.IDENTITY_HOLDS,
        "normalized parameter identities for the r < 0 case",
        witness=f"{refuted[0].claim}: {refuted[0].witness}" if refuted else "",
        parts=parts,
    )
    cert.wall_time = time.perf_counter() - start
    return cert


def certify_cubic_roots() -> Certificate:
    """
    q(q+1) m^3 + (1 - pq) m^2 + (-1 - p - qr) m - r
        = q(q+1)(m + 1/q)(m^2 - ((1+p)/(1+q)) m - r/(1+q))

    The form with (1 - p) and (p + r(1+q))/(1+q)^2 is run as a control and is
    expected to be refuted.
    """
    start = time.perf_counter()
    table = CUBIC_TABLE
    p, q, r, m = table.gens("p", "q", "r", "m")
    lhs = cubic(table)
    linear = RatFn(q * m + 1, q)
    lead = RatFn.of(q * (q + 1))

    quadratic = RatFn((1 + q) * m**2 - (1 + p) * m - r, 1 + q)
    rhs = lead * linear * quadratic
    cert = _identity("cubic", "cubic = q(q+1)(m + 1/q)(m^2 - ((1+p)/(1+q)) m - r/(1+q))",
                     lhs * rhs.den - rhs.num)

    root = substitute(lhs, "m", RatFn(-table.ring.one, q))
    cert.parts = [_identity("cubic/root", "m = -1/q annihilates the cubic", root.num)]

    printed = RatFn((1 + q)**2 * m**2 - (1 - p) * (1 + q) * m - (p + r * (1 + q)), (1 + q)**2)
    printed_rhs = lead * linear * printed
    cert.controls = [_identity("cubic/printed", "quadratic factor with (1 - p)", lhs * printed_rhs.den - printed_rhs.num)]

    if cert.parts[0].refuted and not cert.refuted:
        cert.verdict = Verdict.REFUTED
        cert.witness = f"cubic/root: {cert.parts[0].witness}"
    cert.wall_time = time.perf_counter() - start
    return cert


def _run_subcase(claim: str, subcase: str, samples: int, seed: int, timing: bool) -> Dict:
    """Worker entry point; returns plain data"""
    fn = certify_claim3 if claim == "claim3" else certify_claim4
    return fn(subcase, samples=samples, seed=seed).to_dict(timing)


async def _gather_subcases(claim: str, subcases: List[str], samples: int, seed: int,
                           timing: bool, threads: int) -> List[Dict]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=threads) as pool:
        tasks = [loop.run_in_executor(pool, _run_subcase, claim, subcase, samples, seed, timing)
                 for subcase in subcases]
        return list(await asyncio.gather(*tasks))


def run_claim(claim: str, subcase: str = None, samples: int = None, seed: int = 0,
              threads: int = None, timing: bool = True) -> List[Dict]:
    """
    Run one claim and return its certificates as dictionaries.

    claim3 and claim4 run every subcase unless one is named; the subcases fan out
    over a process pool and come back in SUBCASES order.
    """
    samples = config.SAMPLES if samples is None else samples
    threads = config.THREADS if threads is None else threads
    if claim not in CLAIMS:
        raise PolycoreError(f"unknown claim {claim!r}, expected one of {', '.join(CLAIMS)}")

    if claim in ("claim3", "claim4"):
        subcases = [subcase] if subcase else list(SUBCASES)
        for name in subcases:
            if name not in SUBCASES:
                raise PolycoreError(f"unknown subcase {name!r}, expected one of {', '.join(SUBCASES)}")
        if threads <= 1 or len(subcases) == 1:
            return [_run_subcase(claim, name, samples, seed, timing) for name in subcases]
        return asyncio.run(_gather_subcases(claim, subcases, samples, seed, timing, min(threads, len(subcases))))

    runners: Dict[str, Callable[[], Certificate]] = {
        "delta1": lambda: verify_delta1_factorization(seed=seed),
        "embed-h": lambda: certify_embed_h(samples=samples, seed=seed),
        "a-coeffs": lambda: certify_a_coeffs(samples=samples, seed=seed),
        "identities": certify_parameter_identities,
        "cubic": certify_cubic_roots,
    }
    cert = runners[claim]()
    marker = "❌" if cert.refuted else "✅"
    logger.info(f"{marker} {claim}: {cert.verdict.value} in {cert.wall_time:.2f}s")
    return [cert.to_dict(timing)]
