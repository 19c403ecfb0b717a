import json
from fractions import Fraction

import pytest

from certify.certificates import (
    Verdict, certify_a_coeffs, certify_claim1_sampling, certify_claim3, certify_claim4, certify_cubic_roots,
    certify_embed_h, certify_parameter_identities, run_claim, verify_delta1_factorization, verify_h_derivatives,
)
from certify.expressions import (
    build_T, build_V, delta, delta_parts, delta_value, equilibrium_constant,
)
from certify.plans import SUBCASES, a1_literal_plan, a1_plan, claim3_plan, claim4_plan, embed_h_plan
from errors import PolycoreError
from polycore.poly import evaluate

B, G = Fraction(1, 2), Fraction(1, 3)


def _point(x, y, u, g=G, b=B):
    return {'x': Fraction(x), 'y': Fraction(y), 'u': Fraction(u), 'g': g, 'b': b}


def test_equilibrium_is_fixed_by_T():
    X, Y = build_T()
    for u in (Fraction(1), Fraction(2), Fraction(7, 3)):
        point = _point(u, u, u)
        assert X.evaluate(point) == u
        assert Y.evaluate(point) == u


def test_T_value():
    X, Y = build_T()
    point = _point(1, 1, 2)
    assert evaluate(equilibrium_constant(), point) == Fraction(10, 3)
    assert (X.evaluate(point), Y.evaluate(point)) == (1, Fraction(28, 9))


def test_V_value_and_symmetry():
    V = build_V()
    assert V.evaluate(_point(2, 2, 2)) == Fraction(27, 2)
    assert V.evaluate(_point(3, Fraction(1, 2), 2)) == V.evaluate(_point(Fraction(1, 2), 3, 2))


def test_delta_vanishes_at_equilibrium():
    for k in (1, 2, 3):
        assert delta_value(k, Fraction(3, 2), Fraction(3, 2), Fraction(3, 2), G, B) == 0


def test_delta1_positive_off_equilibrium():
    assert delta_value(1, Fraction(2), Fraction(1), Fraction(3, 2), G, B) > 0


def test_delta_matches_pointwise_value():
    d1 = delta(1)
    point = _point(2, 1, Fraction(3, 2))
    assert d1.evaluate(point) == delta_value(1, point['x'], point['y'], point['u'], G, B)


def test_delta_parts_recombine():
    parts = delta_parts(1)
    point = _point(Fraction(5, 2), Fraction(2, 3), Fraction(3, 2))
    den = Fraction(1)
    for _, factor in parts.den_factors:
        den *= evaluate(factor, point)
    assert evaluate(parts.num, point) / den == delta_value(1, point['x'], point['y'], point['u'], G, B)
    assert "c" not in [label for label, _ in parts.den_factors]


def test_delta_rejects_large_k():
    with pytest.raises(ValueError):
        delta(4)


def test_delta1_factorization_holds():
    cert = verify_delta1_factorization(checks=30)
    assert cert.verdict == Verdict.IDENTITY_HOLDS
    assert cert.inspection['numeric_mismatches'] == 0
    assert cert.soundness.ok


def test_delta1_factorization_perturbed_is_refuted():
    cert = verify_delta1_factorization(perturb=True, checks=5)
    assert cert.refuted
    assert cert.witness


def test_claim1_sampling():
    report = certify_claim1_sampling(samples=200, seed=3)
    assert report.ok
    assert report.n_positive == 200


def test_plans_map_fixed_pattern_to_equilibrium():
    for subcase in SUBCASES:
        for plan in (claim3_plan(subcase), claim4_plan(subcase)):
            assert plan.replacement_problems() == []
            slack = {name: Fraction(1, 2) for name in plan.slack}
            for name in plan.fixed_point_vars:
                slack[name] = Fraction(0)
            point = plan.map_point(slack)
            assert point['x'] == point['u'] == point['y']


def test_claim3_plan_stays_in_region():
    plan = claim3_plan("Q3_v_ge_w")
    point = plan.map_point({'t': Fraction(2), 's': Fraction(3), 'l': Fraction(3), 'w': Fraction(1), 'k': Fraction(2)})
    b, g, u = point['b'], point['g'], point['u']
    assert b == Fraction(1, 4)
    assert b <= g <= 1 / b
    assert (b + 1) * u * u - (g + 1) * u >= 0
    assert point['x'] <= u and point['y'] <= u
    assert point['x'] <= point['y']


def test_literal_a1_plan_has_negative_replacement():
    assert a1_literal_plan().replacement_problems()
    assert a1_plan().replacement_problems() == []
    assert embed_h_plan().replacement_problems() == []


def test_unknown_subcase():
    with pytest.raises(PolycoreError):
        claim3_plan("Q2_w_ge_v")
    with pytest.raises(PolycoreError):
        run_claim("claim4", subcase="Q5_v_ge_w", threads=1)
    with pytest.raises(PolycoreError):
        run_claim("nothing")


def test_h_derivative_identities():
    for cert in verify_h_derivatives():
        assert cert.verdict == Verdict.IDENTITY_HOLDS, cert.claim


def test_embed_h_certificate():
    cert = certify_embed_h(samples=100)
    assert cert.verdict == Verdict.ALL_NONNEGATIVE
    assert cert.stats.n_negative == 0
    assert cert.soundness.ok
    assert all(entry['positive'] for entry in cert.denominator_cert)


def test_a_coeffs_certificate():
    cert = certify_a_coeffs(samples=100)
    assert cert.verdict == Verdict.ALL_NONNEGATIVE
    assert [part.claim for part in cert.parts] == ["a-coeffs/a0", "a-coeffs/a2", "a-coeffs/a1"]
    assert cert.parts[2].soundness.n_negative == 0
    assert cert.inspection['a1_literal_leftover']['n_negative'] > 0


def test_parameter_identities():
    cert = certify_parameter_identities()
    assert cert.verdict == Verdict.IDENTITY_HOLDS
    assert all(part.verdict == Verdict.IDENTITY_HOLDS for part in cert.parts)


def test_cubic_factorization_and_control():
    cert = certify_cubic_roots()
    assert cert.verdict == Verdict.IDENTITY_HOLDS
    assert cert.parts[0].verdict == Verdict.IDENTITY_HOLDS
    assert cert.controls[0].refuted
    assert cert.controls[0].witness


def test_run_claim_is_deterministic_without_timing(validate_schema):
    first = run_claim("a-coeffs", samples=50, seed=7, timing=False)
    second = run_claim("a-coeffs", samples=50, seed=7, timing=False)
    assert json.dumps(first) == json.dumps(second)
    assert 'wall_time' not in first[0]
    validate_schema({'success': True, 'claim': "a-coeffs", 'certificates': first}, "certificate")


def test_certificate_dict_has_timing_by_default():
    data = certify_cubic_roots().to_dict()
    assert data['wall_time'] >= 0
    assert data['controls'][0]['verdict'] == "Refuted"


@pytest.mark.slow
@pytest.mark.parametrize("subcase", SUBCASES)
def test_claim3_subcases(subcase):
    cert = certify_claim3(subcase, samples=200)
    assert cert.verdict == Verdict.ALL_NONNEGATIVE, cert.witness
    assert cert.fixed_point_annihilated
    assert cert.soundness.n_zero_off_equilibrium == 0


@pytest.mark.slow
@pytest.mark.parametrize("subcase", SUBCASES)
def test_claim4_subcases(subcase):
    cert = certify_claim4(subcase, samples=200)
    assert cert.verdict == Verdict.ALL_NONNEGATIVE, cert.witness
    assert cert.fixed_point_annihilated
    assert cert.soundness.ok
    assert cert.soundness.n_zero_off_equilibrium == 0


@pytest.mark.slow
def test_claim4_expansion_is_large():
    cert = certify_claim4("Q1_w_ge_v", samples=10)
    assert cert.stats.n_terms > 100_000


@pytest.mark.slow
def test_third_iterate_numerator_outgrows_second():
    assert len(delta_parts(3).num) > len(delta_parts(2).num)


@pytest.mark.slow
def test_run_claim_subcases_in_order_across_workers():
    sequential = run_claim("claim3", samples=20, threads=1, timing=False)
    pooled = run_claim("claim3", samples=20, threads=4, timing=False)
    assert sequential == pooled
    assert [c['claim'] for c in pooled] == [f"claim3/{s}" for s in SUBCASES]


def test_claim3_plan_keeps_b_below_one():
    plan = claim3_plan("Q1_w_ge_v")
    for l in (Fraction(1, 3), Fraction(1), Fraction(7)):
        point = plan.map_point({'t': Fraction(1), 's': Fraction(2), 'l': l, 'v': Fraction(1), 'k': Fraction(1)})
        b, g, u = point['b'], point['g'], point['u']
        assert 0 < b < 1
        assert b <= g <= 1 / b
        assert (b + 1) * u * u - (g + 1) * u >= 0
        assert point['x'] >= u and point['y'] >= point['x']
    assert "0 < b <= 1" in plan.region
    assert "l" in plan.strict and "b" not in plan.slack
