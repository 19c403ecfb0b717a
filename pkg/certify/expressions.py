"""
Symbolic expressions behind the convergence proofs: the z-form map T, the
invariant function V and its decrements along T^k, the factorization pieces of
the first decrement, the embedded third-order map, the a-coefficients and the
normalized parameters as rational functions of the six original coefficients
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from polycore.poly import Poly, VarTable
from polycore.ratfn import RatFn, iterate_map, ratfn_sub, ratfn_substitute, substitute_many

logger = logging.getLogger(__name__)

# x, y: state; u, g, b: z-form equilibrium and coefficients; the rest are slack
MAP_TABLE = VarTable(("x", "y", "u", "g", "b", "t", "s", "l", "v", "w", "k"))
H_TABLE = VarTable(("p", "q", "r", "y", "z", "d", "v", "w"))
A_TABLE = VarTable(("p", "q", "r", "e", "pi", "kappa", "sigma"))
PARAM_TABLE = VarTable(("A", "B", "C", "alpha", "beta", "gamma"))
CUBIC_TABLE = VarTable(("p", "q", "r", "m"))


def equilibrium_constant(table: VarTable = MAP_TABLE) -> Poly:
    """r = (b+1) u^2 - (g+1) u, the constant that makes u the z-form equilibrium"""
    u, g, b = table.gens("u", "g", "b")
    return (b + 1) * u ** 2 - (g + 1) * u


def build_T(table: VarTable = MAP_TABLE) -> Tuple[RatFn, RatFn]:
    """T(x, y) = (y, (r + y + g x) / (b y + x)) with (x, y) = (z_{n-1}, z_n)"""
    x, y, g, b = table.gens("x", "y", "g", "b")
    r = equilibrium_constant(table)
    return RatFn.of(y), RatFn(r + y + g * x, b * y + x)


def build_V(table: VarTable = MAP_TABLE) -> RatFn:
    """V(x, y) = (1+x)(1+y)(u^2 - u + x + y) / (x y)"""
    x, y, u = table.gens("x", "y", "u")
    return RatFn((1 + x) * (1 + y) * (u ** 2 - u + x + y), x * y)


def T_iterate(k: int, table: VarTable = MAP_TABLE) -> Tuple[RatFn, RatFn]:
    return iterate_map(build_T(table), k)


def delta(k: int, table: VarTable = MAP_TABLE) -> RatFn:
    """V - V o T^k as one rational function"""
    if k not in (1, 2, 3):
        raise ValueError(f"delta is built for k in 1..3, got {k}")
    V = build_V(table)
    X, Y = T_iterate(k, table)
    return ratfn_sub(V, ratfn_substitute(V, {"x": X, "y": Y}))


@dataclass(frozen=True)
class DeltaParts:
    """
    V - V o T^k = num / prod(den_factors).

    Factors are kept apart so each can be certified positive on its own.
    """
    k: int
    num: Poly
    den_factors: List[Tuple[str, Poly]]


def delta_parts(k: int, table: VarTable = MAP_TABLE) -> DeltaParts:
    """
    Numerator of V - V o T^k over the factored denominator x y a c n d,
    where T^k(x, y) = (a/c, n/d).
    """
    if k not in (1, 2, 3):
        raise ValueError(f"delta is built for k in 1..3, got {k}")
    x, y, u = table.gens("x", "y", "u")
    X, Y = T_iterate(k, table)
    a, c, n, d = X.num, X.den, Y.num, Y.den
    V = build_V(table)
    P_k = substitute_many(V.num, {"x": X, "y": Y}).num
    # V(a/c, n/d) = (c+a)(d+n)(c d (u^2-u) + a d + n c) / (a c n d)
    factors = [("x", x), ("y", y), ("a", a), ("c", c), ("n", n), ("d", d)]
    factors = [(label, f) for label, f in factors if f != table.ring.one]
    Q_k = a * c * n * d
    num = V.num * Q_k - P_k * (x * y)
    logger.info(f"delta_{k}: numerator has {len(num)} terms")
    return DeltaParts(k, num, factors)


def delta1_factors(table: VarTable = MAP_TABLE, swap: bool = True) -> Tuple[Poly, Poly, Poly]:
    """
    F1, F2, F3 of the first decrement.

    The factorization holds for the orientation (x, y) -> (f(x, y), x); build_T
    lists the newest term last, so by default x and y are exchanged.
    """
    x, y, u, g, b = table.gens("x", "y", "u", "g", "b")
    if swap:
        x, y = y, x
    r = equilibrium_constant(table)
    F1 = b * (x - u) * y - (x - u) + (y - u) * (b * u + y + u - g)
    F2 = (b * (x - u) ** 2 + b * (x - u) * u + b * (x - u) * u ** 2
          + (u - y) * (b * u ** 2 + y * g))
    F3 = r + x + g * y
    return F1, F2, F3


def delta_value(k: int, x: Fraction, y: Fraction, u: Fraction, g: Fraction, b: Fraction) -> Fraction:
    """Exact V(x, y) - V(T^k(x, y)) at a rational point"""
    r = (b + 1) * u * u - (g + 1) * u

    def V(X, Y):
        return (1 + X) * (1 + Y) * (u * u - u + X + Y) / (X * Y)

    X, Y = x, y
    for _ in range(k):
        X, Y = Y, (r + Y + g * X) / (b * Y + X)
    return V(x, y) - V(X, Y)


def build_h(table: VarTable = H_TABLE) -> Poly:
    p, q, r, y, z = table.gens("p", "q", "r", "y", "z")
    return (-q**2 * r**2 + 2 * p * q * r * y - 2 * q**2 * r * y + p**2 * q * y**2 - p * q**2 * y**2
            + q**2 * r * y**2 + p * r * z - q * r * z + p * q * r * z - q**2 * r * z + 2 * p * q * y * z
            - 2 * q**2 * y * z + 2 * q * r * y * z + p * z**2 - q * z**2 + r * z**2)


def build_h_partials(table: VarTable = H_TABLE) -> Tuple[Poly, Poly]:
    """D_y h and D_z h in closed form"""
    p, q, r, y, z = table.gens("p", "q", "r", "y", "z")
    D1 = 2 * (p - q) * q * r + 2 * q * (p**2 - p * q + q * r) * y + 2 * q * (p - q + r) * z
    D2 = (p - q) * (1 + q) * r + 2 * q * (p - q + r) * y + 2 * (p - q + r) * z
    return D1, D2


def h_corner_value(table: VarTable = H_TABLE) -> RatFn:
    """q (1+q)^2 r^2 (p^2 - p q + q r) / (p - q)^2"""
    p, q, r = table.gens("p", "q", "r")
    return RatFn(q * (1 + q)**2 * r**2 * (p**2 - p * q + q * r), (p - q)**2)


def build_embedded_map(table: VarTable = H_TABLE) -> RatFn:
    """f(f(y, z), y): x_{n+1} in terms of x_{n-1} = y and x_{n-2} = z"""
    p, q, r, y, z = table.gens("p", "q", "r", "y", "z")
    return RatFn(p * r + p**2 * y + q * r * y + q * y**2 + p * z + r * z + y * z,
                 q * r + p * q * y + q * y**2 + q * z + y * z)


def build_a_coeffs(table: VarTable = A_TABLE) -> Tuple[Poly, Poly, Poly]:
    p, q, r = table.gens("p", "q", "r")
    a0 = r * (p + 2 * p * q + p**2 * q + q * r + 2 * q**2 * r)
    a1 = (p + p**2 + 2 * p * q + 3 * p**2 * q + p**3 * q + r - p * r + 4 * q * r + 4 * q**2 * r
          + 2 * p * q**2 * r)
    a2 = (1 + q) * (1 + 2 * q + p * q + q * r)
    return a0, a1, a2


def normalized_pqr(table: VarTable = PARAM_TABLE) -> Tuple[RatFn, RatFn, RatFn]:
    """p, q, r of the (3-2-L) form as rational functions of A, B, C, alpha, beta, gamma"""
    A, B, C, alpha, beta, gamma = table.gens("A", "B", "C", "alpha", "beta", "gamma")
    D = A * C + (B + C) * gamma
    p = RatFn(A * B + (B + C) * beta, D)
    q = RatFn(B, C)
    r = RatFn(C * (B + C) * (B * alpha + C * alpha - A * beta - A * gamma), D**2)
    return p, q, r


def cubic(table: VarTable = CUBIC_TABLE) -> Poly:
    """Cubic satisfied by m for the (m, M) pair of the embedded system"""
    p, q, r, m = table.gens("p", "q", "r", "m")
    return q * (q + 1) * m**3 + (1 - p * q) * m**2 + (-1 - p - q * r) * m - r
