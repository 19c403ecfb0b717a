from fractions import Fraction

import pytest

from errors import PolycoreError
from polycore.poly import (
    VarTable, add, coefficient_report, degree_in, evaluate, mul, pow, split_by_variable, to_text,
)
from polycore.ratfn import (
    RatFn, constant, iterate_map, ratfn_compose_map, ratfn_sub, ratfn_substitute, substitute, substitute_many,
)

XY = VarTable(("x", "y"))


def test_var_table_rejects_duplicates_and_sizes():
    with pytest.raises(PolycoreError):
        VarTable(("x", "x"))
    with pytest.raises(PolycoreError):
        VarTable(())
    with pytest.raises(PolycoreError):
        VarTable(tuple(f"v{i}" for i in range(17)))


def test_var_table_lookup():
    assert "x" in XY
    assert len(XY) == 2
    assert XY.index("y") == 1
    with pytest.raises(PolycoreError):
        XY.gen("z")


def test_tables_do_not_mix():
    x = XY.gen("x")
    with pytest.raises(PolycoreError):
        add(x, VarTable(("x", "z")).gen("x"))
    with pytest.raises(PolycoreError):
        mul(x, VarTable(("a",)).gen("a"))


def test_pow_rejects_negative_power():
    with pytest.raises(PolycoreError):
        pow(XY.gen("x"), -1)


def test_to_text():
    x, y = XY.gens("x", "y")
    assert to_text(x ** 2 - 2 * x * y + 3) == "1*x^2 - 2*x*y + 3"
    assert to_text(XY.ring.zero) == "0"
    assert to_text(XY.const(Fraction(-1, 2)) * x) == "-1/2*x"


def test_evaluate_exact():
    x, y = XY.gens("x", "y")
    a = x ** 2 * y - XY.const(Fraction(1, 3)) * y + 1
    assert evaluate(a, {"x": Fraction(1, 2), "y": 3}) == Fraction(3, 4) - 1 + 1
    assert evaluate(a, [2, Fraction(3, 2)]) == 6 - Fraction(1, 2) + 1
    with pytest.raises(PolycoreError):
        evaluate(a, {"x": 1})
    with pytest.raises(PolycoreError):
        evaluate(a, [1])


def test_degree_and_split():
    x, y = XY.gens("x", "y")
    a = 3 * x ** 2 * y + x * y ** 3 + 5
    assert degree_in(a, 0) == 2
    assert degree_in(a, 1) == 3
    assert degree_in(XY.ring.zero, 0) == 0
    parts = split_by_variable(a, 0)
    assert parts[2] == 3 * y
    assert parts[1] == y ** 3
    assert parts[0] == XY.const(5)
    assert sum((parts[j] * x ** j for j in parts), XY.ring.zero) == a


def test_coefficient_report():
    x, y = XY.gens("x", "y")
    report = coefficient_report(x ** 3 - 2 * x * y + XY.const(Fraction(1, 2)) - 5 * y ** 2)
    assert report.n_terms == 4
    assert report.n_negative == 2
    assert report.min_coeff == -5
    assert report.max_total_degree == 3
    assert report.witness == "-5*y^2"
    assert not report.all_nonnegative
    assert report.to_dict()['min_coeff'] == "-5"

    empty = coefficient_report(XY.ring.zero)
    assert empty.all_nonnegative and empty.n_terms == 0


def test_ratfn_rejects_zero_denominator():
    with pytest.raises(PolycoreError):
        RatFn(XY.gen("x"), XY.ring.zero)
    with pytest.raises(PolycoreError):
        RatFn.of(XY.gen("x")) / constant(XY.ring, 0)


def test_ratfn_arithmetic():
    x, y = XY.gens("x", "y")
    a = RatFn(x, y)
    b = RatFn(y, x + 1)
    total = a + b
    assert total.equals(RatFn(x * (x + 1) + y * y, y * (x + 1)))
    assert (a * b).equals(RatFn(x, x + 1))
    assert (a / b).equals(RatFn(x * (x + 1), y * y))
    assert (a - a).is_zero
    point = {"x": Fraction(2), "y": Fraction(3)}
    assert total.evaluate(point) == Fraction(2, 3) + 1


def test_ratfn_normalized_fixes_leading_coefficient():
    x, y = XY.gens("x", "y")
    a = RatFn(2 * x, 4 * y + 2).normalized()
    assert a.den.LC == 1
    assert a.equals(RatFn(x, 2 * y + 1))


def test_evaluate_at_pole():
    x, y = XY.gens("x", "y")
    with pytest.raises(PolycoreError):
        RatFn(x, y - 1).evaluate({"x": 1, "y": 1})


def test_substitute_clears_denominator():
    x, y = XY.gens("x", "y")
    target = x ** 2 + y
    result = substitute(target, "x", RatFn(y, y + 1))
    assert result.num == y ** 2 + y * (y + 1) ** 2
    assert result.den == (y + 1) ** 2


def test_substitute_polynomial_replacement():
    x, y = XY.gens("x", "y")
    result = substitute(x ** 2 + 1, "x", RatFn.of(y + 1))
    assert result.den == XY.ring.one
    assert result.num == (y + 1) ** 2 + 1


def test_substitute_absent_variable_is_identity():
    y = XY.gen("y")
    result = substitute(y ** 2, "x", RatFn.of(y))
    assert result.num == y ** 2


def test_substitute_many_is_simultaneous():
    x, y = XY.gens("x", "y")
    swapped = substitute_many(x - 2 * y, {"x": RatFn.of(y), "y": RatFn.of(x)})
    assert swapped.num == y - 2 * x


def test_ratfn_substitute_matches_pointwise():
    x, y = XY.gens("x", "y")
    f = RatFn(x + y, x * y + 1)
    mapping = {"x": RatFn(y, x + 1), "y": RatFn(x + 2, y + 3)}
    composed = ratfn_substitute(f, mapping)
    point = {"x": Fraction(1, 3), "y": Fraction(5, 2)}
    inner = {name: r.evaluate(point) for name, r in mapping.items()}
    assert composed.evaluate(point) == f.evaluate(inner)


def test_iterate_map_matches_repeated_evaluation():
    x, y = XY.gens("x", "y")
    T = (RatFn.of(y), RatFn(1 + y + x, y + x))
    T3 = iterate_map(T, 3)
    point = (Fraction(2), Fraction(1, 2))
    X, Y = point
    for _ in range(3):
        X, Y = Y, (1 + Y + X) / (Y + X)
    values = {"x": point[0], "y": point[1]}
    assert (T3[0].evaluate(values), T3[1].evaluate(values)) == (X, Y)
    assert ratfn_compose_map(T, T)[1].equals(iterate_map(T, 2)[1])
    with pytest.raises(PolycoreError):
        iterate_map(T, 0)


def test_ratfn_sub_normalizes():
    x, y = XY.gens("x", "y")
    diff = ratfn_sub(RatFn(x, 2 * y), RatFn(y, 2 * y))
    assert diff.den.LC == 1
    assert diff.equals(RatFn(x - y, 2 * y))
