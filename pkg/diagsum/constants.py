"""
Exponents and best constants of diagonal s-sum inequalities.

Every formula is evaluated in exact rational arithmetic (fractions.Fraction);
only the final n^t is converted to float, and even that stays exact when
n^t is an integer or an integer root. Inputs outside a theorem's
hypotheses raise OutOfRegimeError naming the violated precondition.

Regimes (T is an m-linear form on l_p^n x ... x l_p^n):
    Zalduendo  p > m:                (sum |T(e_j,..,e_j)|^(p/(p-m)))^((p-m)/p) <= ||T||
    T1a        s >= 1, p > m:        exponent max{m/p + 1/s - 1, 0}
    T1b        s >= 1, 2 <= p <= m:  exponent 0
    T1c        s >= 2/m, 1 < p < 2:  exponent (2ms + 2p - spm)/(2sp), no optimality claim
    T2a        sum 1/p_i >= 1:       C = n^(1/s)
    T2b        sum 1/p_i <= 1:       C = n^max{sum 1/p_i + 1/s - 1, 0}

"Theorem 1" below means the equal-exponent bound (tags T1a-T1c) and
"Theorem 2" the exact best constant for arbitrary p_1, ..., p_m (T2a, T2b).
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Tuple

from .errors import DimensionMismatchError, OutOfRegimeError
from .forms import SpaceSpec
from .spaces import Exponent, dual_exponent, positive_fraction

logger = logging.getLogger(__name__)

# Largest numerator for which n^t is attempted in integer arithmetic.
_EXACT_POWER_LIMIT = 64


class Regime(Enum):
    T1A = "T1a"
    T1B = "T1b"
    T1C = "T1c"
    T2A = "T2a"
    T2B = "T2b"
    ZALDUENDO = "Zalduendo"


@dataclass(frozen=True)
class RegimeTag:
    """A regime label with the exponent of n it yields."""
    label: Regime
    exponent_of_n: Fraction

    def __str__(self):
        return f"{self.label.value} (n^{self.exponent_of_n})"


@dataclass(frozen=True)
class ConstantQuery:
    """One instance (m, n, p_1, ..., p_m, s) of the best-constant problem."""
    m: int
    n: int
    exponents: SpaceSpec
    s: Fraction

    def __post_init__(self):
        if isinstance(self.exponents, str):
            object.__setattr__(self, "exponents", SpaceSpec.parse(self.exponents))
        elif not isinstance(self.exponents, SpaceSpec):
            object.__setattr__(self, "exponents", SpaceSpec(tuple(self.exponents)))
        object.__setattr__(self, "s", positive_fraction(self.s, "s"))
        if self.m < 1 or self.n < 1:
            raise DimensionMismatchError(f"Need m >= 1 and n >= 1, got m={self.m}, n={self.n}")
        if self.exponents.order != self.m:
            raise DimensionMismatchError(
                f"Query with m={self.m} needs {self.m} exponents, got {self.exponents.order}"
            )

    def with_n(self, n: int) -> "ConstantQuery":
        return ConstantQuery(self.m, n, self.exponents, self.s)


def _integer_root(value: int, k: int):
    """Exact k-th root of a nonnegative integer, or None."""
    if value < 2:
        return value
    guess = int(round(math.exp(math.log(value) / k)))
    for candidate in (guess - 1, guess, guess + 1):
        if candidate >= 0 and candidate ** k == value:
            return candidate
    return None


def power_of_n(n: int, t: Fraction) -> float:
    """
    n^t, computed exactly when it is rational, else as exp(t ln n).

    Examples:
        >>> power_of_n(9, Fraction(1, 2))
        3.0
        >>> power_of_n(16, Fraction(3, 4))
        8.0
    """
    t = Fraction(t)
    if n == 1 or t == 0:
        return 1.0
    a, b = abs(t.numerator), t.denominator
    if a <= _EXACT_POWER_LIMIT:
        root = _integer_root(n ** a, b)
        if root is not None:
            exact = Fraction(root) if t > 0 else Fraction(1, root)
            return float(exact)
    return math.exp(float(t) * math.log(n))


def _require_order(m: int) -> None:
    if m < 2:
        raise OutOfRegimeError(f"Diagonal inequalities are stated for m >= 2, got m = {m}")


def zalduendo_exponent(m: int, p) -> Fraction:
    """
    The optimal diagonal exponent p/(p-m) for p > m (equal to 1 at p = inf).

    Examples:
        >>> zalduendo_exponent(2, 4)
        Fraction(2, 1)

    Raises:
        OutOfRegimeError: If p <= m.
    """
    _require_order(m)
    p = Exponent.of(p)
    if not p > Exponent.of(m):
        raise OutOfRegimeError(f"Zalduendo exponent needs p > m, got p = {p}, m = {m}")
    # p/(p - m) = 1/(1 - m/p), which also covers p = inf
    return 1 / (1 - m * p.reciprocal)


def theorem1_exponent(m: int, p, s) -> RegimeTag:
    """
    Exponent of n in Theorem 1 for equal exponents p, with its regime.

    (a) s >= 1, p > m:       max{m/p + 1/s - 1, 0}
    (b) s >= 1, 2 <= p <= m: 0
    (c) s >= 2/m, 1 < p < 2: (2ms + 2p - spm)/(2sp)

    Raises:
        OutOfRegimeError: Parameters match no regime; the message names the
            violated precondition.
    """
    _require_order(m)
    p = Exponent.of(p)
    s = positive_fraction(s, "s")
    inv_p = p.reciprocal

    if p > Exponent.of(m):
        if s < 1:
            raise OutOfRegimeError(f"Regime (a) (p > m) requires s >= 1, got s = {s}")
        return RegimeTag(Regime.T1A, max(m * inv_p + 1 / s - 1, Fraction(0)))
    if p >= Exponent.of(2):
        if s < 1:
            raise OutOfRegimeError(f"Regime (b) (2 <= p <= m) requires s >= 1, got s = {s}")
        return RegimeTag(Regime.T1B, Fraction(0))
    if p == Exponent.of(1):
        raise OutOfRegimeError("p = 1 lies outside every Theorem 1 regime (needs p > 1)")
    if s < Fraction(2, m):
        raise OutOfRegimeError(f"Regime (c) (1 < p < 2) requires s >= 2/m = {Fraction(2, m)}, got s = {s}")
    pv = p.value
    return RegimeTag(Regime.T1C, (2 * m * s + 2 * pv - s * pv * m) / (2 * s * pv))


def best_constant_regime(q: ConstantQuery) -> RegimeTag:
    """
    Theorem 2 branch and exponent: t = 1/s if sum 1/p_i >= 1, else max{sum 1/p_i + 1/s - 1, 0}.

    At sum 1/p_i = 1 both branches give 1/s and the (a) branch is reported.
    """
    total = q.exponents.reciprocal_sum
    if total >= 1:
        return RegimeTag(Regime.T2A, 1 / q.s)
    return RegimeTag(Regime.T2B, max(total + 1 / q.s - 1, Fraction(0)))


def best_constant(q: ConstantQuery) -> float:
    """
    The exact best constant C(m, n, p_1, ..., p_m, s) of Theorem 2.

    Examples:
        >>> best_constant(ConstantQuery(2, 9, "2,2", 2))
        3.0
        >>> best_constant(ConstantQuery(2, 16, "4,4", 2))
        1.0
    """
    return power_of_n(q.n, best_constant_regime(q).exponent_of_n)


def _check_holder_regime(m: int, p: Exponent, s: Fraction, allow_boundary: bool) -> Fraction:
    _require_order(m)
    if not p > Exponent.of(m):
        raise OutOfRegimeError(f"Hoelder split needs p > m, got p = {p}, m = {m}")
    if s < 1:
        raise OutOfRegimeError(f"Hoelder split needs s >= 1, got s = {s}")
    critical = zalduendo_exponent(m, p)
    if s > critical or (s == critical and not allow_boundary):
        bound = "<=" if allow_boundary else "<"
        raise OutOfRegimeError(
            f"Hoelder split needs s {bound} p/(p-m) = {critical}, got s = {s}"
        )
    return critical


def holder_interpolation_x(s, p, m: int) -> Exponent:
    """
    The exponent x with 1/s = (p-m)/p + 1/x used to split the diagonal sum.

    Examples:
        >>> str(holder_interpolation_x(1, 4, 2))
        '2'

    Raises:
        OutOfRegimeError: Unless p > m and 1 <= s < p/(p-m).
    """
    p = Exponent.of(p)
    s = positive_fraction(s, "s")
    _check_holder_regime(m, p, s, allow_boundary=False)
    inv_x = 1 / s - (1 - m * p.reciprocal)
    return Exponent(1 / inv_x)


def optimality_floor(m: int, p, s) -> Fraction:
    """
    Lower bound m/p + 1/s - 1 on any exponent t for which the diagonal
    inequality holds with n^t; the product form forces it through
    ||A|| <= n^((p-m)/p).

    Defined for p > m and 1 <= s <= p/(p-m); at the boundary it is 0.
    """
    p = Exponent.of(p)
    s = positive_fraction(s, "s")
    _check_holder_regime(m, p, s, allow_boundary=True)
    return m * p.reciprocal + 1 / s - 1


def inclusion_exponent(s, m: int, p) -> Tuple[Fraction, bool]:
    """
    The inclusion exponent r = 2sm/(sm+2) and whether r < p*.

    For 1 < p < 2 the flag is always true; the forms are then absolutely
    (s; r, ..., r)-summing and r < p* lets the chain close.

    Examples:
        >>> inclusion_exponent(1, 2, Fraction(3, 2))
        (Fraction(1, 1), True)
    """
    _require_order(m)
    s = positive_fraction(s, "s")
    r = 2 * s * m / (s * m + 2)
    p_star = dual_exponent(p)
    return r, (p_star.is_infinite or r < p_star.value)


def weak_basis_exponent(p, r) -> Fraction:
    """
    Exponent of n in sup over the unit ball of (l_p^n)* of (sum_j |phi(e_j)|^r)^(1/r).

    The dual ball is the l_{p*} ball, so the supremum is n^max{1/r - 1/p*, 0}.
    """
    r = positive_fraction(r, "r")
    return max(1 / r - dual_exponent(p).reciprocal, Fraction(0))


def summing_chain_exponent(m: int, p, s) -> Fraction:
    """
    Theorem 1 (b)/(c) exponent recomputed from the absolutely summing chain:
    m times the weak basis exponent, with r = p* in (b) and r = 2sm/(sm+2) in (c).
    """
    tag = theorem1_exponent(m, p, s)
    p = Exponent.of(p)
    if tag.label is Regime.T1B:
        p_star = dual_exponent(p)
        return m * (Fraction(0) if p_star.is_infinite else weak_basis_exponent(p, p_star.value))
    if tag.label is Regime.T1C:
        r, _ = inclusion_exponent(s, m, p)
        return m * weak_basis_exponent(p, r)
    raise OutOfRegimeError(f"Summing chain covers regimes (b) and (c), not {tag.label.value}")


def theorem1_gap(m: int, p, s) -> Fraction:
    """
    Theorem 1 exponent minus the exact Theorem 2 exponent for equal exponents p.

    Positive: Theorem 1 is slack. Negative: Theorem 1 claims more than the
    exact constant allows.
    """
    tag = theorem1_exponent(m, p, s)
    exact = best_constant_regime(ConstantQuery(m, 1, SpaceSpec.uniform(m, p), s))
    gap = tag.exponent_of_n - exact.exponent_of_n
    if gap < 0:
        logger.warning(
            f"{tag.label.value} exponent {tag.exponent_of_n} is below the exact "
            f"{exact.label.value} exponent {exact.exponent_of_n} (m={m}, p={p}, s={s})"
        )
    return gap


def regime_report(q: ConstantQuery) -> List[RegimeTag]:
    """All regime tags that apply to a query, Theorem 2 first."""
    tags = [best_constant_regime(q)]
    if q.m < 2 or not q.exponents.is_uniform:
        return tags
    p = q.exponents[0]
    try:
        tags.append(theorem1_exponent(q.m, p, q.s))
    except OutOfRegimeError:
        pass
    if p > Exponent.of(q.m) and q.s == zalduendo_exponent(q.m, p):
        tags.append(RegimeTag(Regime.ZALDUENDO, Fraction(0)))
    return tags
