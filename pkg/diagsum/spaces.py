"""
Vector geometry of the finite sequence spaces l_p^n.

Exponents are exact rationals or infinity, so identities such as
1/p + 1/p* = 1 hold exactly. The closed-form norm and maximizer of a
linear functional on l_p^n is the inner step of the alternating ascent in
normest.

Functions:
    dual_exponent: Conjugate exponent p* with 1/p + 1/p* = 1
    lp_norm: l_p norm of a vector (max norm for p = inf)
    quasi_norm: (sum |x_j|^r)^(1/r) for any r > 0
    functional_norm_and_maximizer: Norm of x -> sum c_j x_j on l_p^n and its maximizer
    unit_vector: The uniform vector n^(-1/p) (1, ..., 1)
    normalize: Scale a nonzero vector onto the l_p unit sphere
"""

import math
import logging
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import InvalidExponentError

logger = logging.getLogger(__name__)

_INFINITY_TOKENS = {"inf", "infinity", "∞", "+inf"}


def to_fraction(value, name: str = "value") -> Fraction:
    """
    Convert an int, Fraction, finite float or string to an exact Fraction.

    Floats are converted through their decimal representation, so 1.5 and
    0.1 become 3/2 and 1/10 rather than their binary expansions.

    Raises:
        InvalidExponentError: If the value is not a finite real number.
    """
    if isinstance(value, bool):
        raise InvalidExponentError(f"{name} must be a number, got {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    try:
        if isinstance(value, str):
            return Fraction(value.strip())
        as_float = float(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise InvalidExponentError(f"Cannot read {name} from {value!r}: {e}")
    if not math.isfinite(as_float):
        raise InvalidExponentError(f"{name} must be finite, got {value!r}")
    return Fraction(repr(as_float))


def positive_fraction(value, name: str = "s") -> Fraction:
    """Exact positive rational, as required for the summation exponent s."""
    result = to_fraction(value, name)
    if result <= 0:
        raise InvalidExponentError(f"{name} must be > 0, got {result}")
    return result


@dataclass(frozen=True, eq=False)
class Exponent:
    """
    An exponent p in [1, inf].

    value holds p as a Fraction; None encodes p = inf. Use Exponent.of()
    to build one from user input and Exponent.INF for infinity.
    """
    value: Optional[Fraction]

    def __post_init__(self):
        if self.value is None:
            return
        p = to_fraction(self.value, "p")
        if p < 1:
            raise InvalidExponentError(f"Exponent must satisfy p >= 1 or p = inf, got {p}")
        object.__setattr__(self, "value", p)

    @classmethod
    def of(cls, value: Union["Exponent", int, float, str, Fraction]) -> "Exponent":
        if isinstance(value, Exponent):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, float) and math.isinf(value):
            if value < 0:
                raise InvalidExponentError("Exponent cannot be -inf")
            return cls.INF
        return cls(to_fraction(value, "p"))

    @classmethod
    def parse(cls, text: str) -> "Exponent":
        token = text.strip().lower()
        if token in _INFINITY_TOKENS:
            return cls.INF
        return cls(to_fraction(token, "p"))

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def reciprocal(self) -> Fraction:
        """Exact 1/p, with 1/inf = 0."""
        return Fraction(0) if self.value is None else 1 / self.value

    def as_float(self) -> float:
        return math.inf if self.value is None else float(self.value)

    def _other_reciprocal(self, other) -> Optional[Fraction]:
        try:
            return Exponent.of(other).reciprocal
        except (InvalidExponentError, TypeError, ValueError):
            return None

    # Ordering is by reciprocal, which keeps infinity as the largest element.
    # Plain numbers and strings compare after Exponent.of.
    def __eq__(self, other):
        r = self._other_reciprocal(other)
        return NotImplemented if r is None else self.reciprocal == r

    def __hash__(self):
        return hash(math.inf if self.value is None else self.value)

    def __lt__(self, other):
        r = self._other_reciprocal(other)
        return NotImplemented if r is None else self.reciprocal > r

    def __le__(self, other):
        r = self._other_reciprocal(other)
        return NotImplemented if r is None else self.reciprocal >= r

    def __gt__(self, other):
        r = self._other_reciprocal(other)
        return NotImplemented if r is None else self.reciprocal < r

    def __ge__(self, other):
        r = self._other_reciprocal(other)
        return NotImplemented if r is None else self.reciprocal <= r

    def __str__(self):
        return "inf" if self.value is None else str(self.value)


Exponent.INF = Exponent(None)


def dual_exponent(p) -> Exponent:
    """
    Conjugate exponent p* with 1/p + 1/p* = 1.

    Examples:
        >>> str(dual_exponent(4))
        '4/3'
        >>> dual_exponent(1).is_infinite
        True
    """
    p = Exponent.of(p)
    if p.is_infinite:
        return Exponent(Fraction(1))
    if p.value == 1:
        return Exponent.INF
    return Exponent(p.value / (p.value - 1))


def quasi_norm(x, r) -> float:
    """
    (sum |x_j|^r)^(1/r) for r > 0, or max |x_j| for r = inf.

    Entries are rescaled by the largest modulus first so that large r does
    not overflow. For r < 1 this is only a quasi-norm.
    """
    a = np.abs(np.asarray(x))
    if a.size == 0:
        return 0.0
    top = float(a.max())
    if top == 0.0:
        return 0.0
    if isinstance(r, Exponent):
        r = r.as_float()
    r = float(r)
    if r <= 0:
        raise InvalidExponentError(f"Summation exponent must be > 0, got {r}")
    if math.isinf(r):
        return top
    if r == 1.0:
        return float(a.sum())
    return top * float(np.sum((a / top) ** r)) ** (1.0 / r)


def lp_norm(x, p) -> float:
    """
    l_p norm of a vector: (sum |x_j|^p)^(1/p), or max |x_j| for p = inf.

    Examples:
        >>> lp_norm([3, 4], 2)
        5.0
    """
    p = Exponent.of(p)
    if p.value == 2:
        return float(np.linalg.norm(np.asarray(x)))
    return quasi_norm(x, p.as_float())


def unimodular_phase(c: np.ndarray) -> np.ndarray:
    """sign(c) for real input and c/|c| for complex input, with sign(0) := 1."""
    c = np.asarray(c)
    if np.iscomplexobj(c):
        modulus = np.abs(c)
        phase = np.ones_like(c)
        nonzero = modulus > 0
        phase[nonzero] = c[nonzero] / modulus[nonzero]
        return phase
    return np.where(c >= 0, 1.0, -1.0)


class LinearMaximizer(NamedTuple):
    """Norm of a linear functional on l_p^n and a unit vector attaining it."""
    norm: float
    vector: np.ndarray
    degenerate: bool = False


def functional_norm_and_maximizer(c, p) -> LinearMaximizer:
    """
    Norm of x -> sum c_j x_j on l_p^n together with the Hoelder-equality vector.

    The norm is ||c||_{p*}. The returned x* has ||x*||_p = 1 and
    sum c_j x*_j = ||c||_{p*}:
        1 < p < inf: x*_j = conj(sign(c_j)) |c_j|^(p*-1) / ||c||_{p*}^(p*-1)
        p = inf:     x*_j = conj(sign(c_j)), sign(0) := 1
        p = 1:       x* = conj(sign(c_k)) e_k at the largest |c_k|, lowest index on ties

    For c = 0 the result is (0, zero vector) flagged degenerate.

    Args:
        c: Coefficient vector (real or complex), length n >= 1.
        p: Exponent of the domain space.

    Returns:
        LinearMaximizer(norm, vector, degenerate)

    Examples:
        >>> res = functional_norm_and_maximizer([3, 4], 1)
        >>> res.norm, res.vector.tolist()
        (4.0, [0.0, 1.0])
    """
    p = Exponent.of(p)
    c = np.asarray(c)
    if not np.iscomplexobj(c):
        c = c.astype(np.float64)
    a = np.abs(c)
    if c.size == 0 or not np.any(a > 0):
        return LinearMaximizer(0.0, np.zeros_like(c), True)

    phase = np.conj(unimodular_phase(c))

    if p.is_infinite:
        return LinearMaximizer(float(a.sum()), phase, False)

    if p.value == 1:
        k = int(np.argmax(a))
        x = np.zeros_like(c)
        x[k] = phase[k]
        return LinearMaximizer(float(a[k]), x, False)

    q = dual_exponent(p).as_float()
    norm = quasi_norm(a, q)
    x = phase * (a / norm) ** (q - 1.0)
    return LinearMaximizer(norm, x, False)


def unit_vector(n: int, p) -> np.ndarray:
    """The uniform vector n^(-1/p) (1, ..., 1), which has l_p norm 1."""
    p = Exponent.of(p)
    if p.is_infinite:
        return np.ones(n)
    return np.full(n, float(n) ** (-1.0 / float(p.value)))


def normalize(x, p) -> np.ndarray:
    """Scale a nonzero vector onto the l_p unit sphere."""
    x = np.asarray(x)
    norm = lp_norm(x, p)
    if norm == 0.0:
        raise ValueError("Cannot normalize the zero vector")
    return x / norm
