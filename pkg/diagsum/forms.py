"""
Dense m-linear forms on l_{p_1}^n x ... x l_{p_m}^n.

A form T is stored as its coefficient tensor a[j_1, ..., j_m] =
T(e_{j_1}, ..., e_{j_m}) with shape (n,)*m in row-major (lexicographic)
order. Indices are 0-based here; user-facing I/O is 1-based.

Functions:
    evaluate: T(x^(1), ..., x^(m))
    slot_functional: Coefficients of y -> T(x^(1), ..., y, ..., x^(m))
    diagonal: The vector T(e_j, ..., e_j)
    diagonal_s_sum: (sum_j |T(e_j, ..., e_j)|^s)^(1/s)
    product_form: A(x^(1), ..., x^(m)) = sum_j x^(1)_j ... x^(m)_j
    random_form: Seeded random forms (gaussian, uniform-sign, sparse(k))
"""

import re
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError, DimensionMismatchError
from .spaces import Exponent, positive_fraction, quasi_norm

logger = logging.getLogger(__name__)

MAX_COEFFICIENTS = 10 ** 7

REAL = "real"
COMPLEX = "complex"


def check_capacity(m: int, n: int) -> None:
    """Raise CapacityError when a dense (n,)*m tensor would exceed the size guard."""
    if m < 1 or n < 1:
        raise DimensionMismatchError(f"Need m >= 1 and n >= 1, got m={m}, n={n}")
    if n ** m > MAX_COEFFICIENTS:
        raise CapacityError(
            f"Dense form with n={n}, m={m} needs {n ** m} coefficients "
            f"(limit {MAX_COEFFICIENTS})"
        )


@dataclass(frozen=True, eq=False)
class MultilinearForm:
    """
    Order-m, dimension-n m-linear form with a read-only dense coefficient tensor.
    """
    coeffs: np.ndarray

    def __post_init__(self):
        a = np.array(self.coeffs, copy=True)
        if a.ndim < 1:
            raise DimensionMismatchError("Coefficient tensor must have order m >= 1")
        n = a.shape[0]
        if any(size != n for size in a.shape):
            raise DimensionMismatchError(f"Coefficient tensor must be cubic, got shape {a.shape}")
        check_capacity(a.ndim, n)
        a = a.astype(np.complex128 if np.iscomplexobj(a) else np.float64)
        a.flags.writeable = False
        object.__setattr__(self, "coeffs", a)

    @classmethod
    def from_flat(cls, m: int, n: int, flat: Sequence, scalar_mode: str = REAL) -> "MultilinearForm":
        check_capacity(m, n)
        dtype = np.complex128 if scalar_mode == COMPLEX else np.float64
        data = np.asarray(flat, dtype=dtype)
        if data.size != n ** m:
            raise DimensionMismatchError(
                f"Expected {n ** m} coefficients for m={m}, n={n}, got {data.size}"
            )
        return cls(data.reshape((n,) * m))

    @property
    def order(self) -> int:
        return self.coeffs.ndim

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def scalar_mode(self) -> str:
        return COMPLEX if np.iscomplexobj(self.coeffs) else REAL

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max())

    def scaled(self, factor) -> "MultilinearForm":
        return MultilinearForm(self.coeffs * factor)

    def __repr__(self):
        return f"MultilinearForm(m={self.order}, n={self.dim}, scalar_mode={self.scalar_mode})"


@dataclass(frozen=True)
class SpaceSpec:
    """The exponents (p_1, ..., p_m) of the domain spaces."""
    exponents: Tuple[Exponent, ...]

    def __post_init__(self):
        exps = tuple(Exponent.of(p) for p in self.exponents)
        if not exps:
            raise DimensionMismatchError("SpaceSpec needs at least one exponent")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def parse(cls, text: str) -> "SpaceSpec":
        """Parse a comma-separated list such as '4,4' or '1,inf,3/2'."""
        parts = [part for part in text.split(",") if part.strip()]
        return cls(tuple(Exponent.parse(part) for part in parts))

    @classmethod
    def uniform(cls, m: int, p) -> "SpaceSpec":
        return cls((Exponent.of(p),) * m)

    @property
    def order(self) -> int:
        return len(self.exponents)

    @property
    def reciprocal_sum(self) -> Fraction:
        return sum((p.reciprocal for p in self.exponents), Fraction(0))

    @property
    def is_uniform(self) -> bool:
        return all(p == self.exponents[0] for p in self.exponents)

    def all_equal_to(self, p) -> bool:
        target = Exponent.of(p)
        return all(q == target for q in self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, index):
        return self.exponents[index]

    def __str__(self):
        return ";".join(str(p) for p in self.exponents)


def _check_vectors(T: MultilinearForm, xs: Sequence) -> list:
    if len(xs) != T.order:
        raise DimensionMismatchError(f"Form of order {T.order} needs {T.order} vectors, got {len(xs)}")
    vectors = [np.asarray(x) for x in xs]
    for i, x in enumerate(vectors):
        if x.shape != (T.dim,):
            raise DimensionMismatchError(
                f"Vector in slot {i + 1} has shape {x.shape}, expected ({T.dim},)"
            )
    return vectors


def evaluate(T: MultilinearForm, xs: Sequence):
    """
    T(x^(1), ..., x^(m)) = sum a[j_1, ..., j_m] x^(1)_{j_1} ... x^(m)_{j_m}.

    Raises:
        DimensionMismatchError: Wrong vector count or length.
    """
    vectors = _check_vectors(T, xs)
    result = T.coeffs
    for x in vectors:
        result = np.tensordot(x, result, axes=(0, 0))
    value = result.item()
    return value if np.iscomplexobj(result) else float(value)


def slot_functional(T: MultilinearForm, xs: Sequence, slot: int) -> np.ndarray:
    """
    Coefficient vector c of the linear map y -> T(x^(1), ..., y, ..., x^(m)).

    The vector in position `slot` (0-based) is ignored.
    """
    vectors = _check_vectors(T, xs)
    result = np.moveaxis(T.coeffs, slot, -1)
    for i, x in enumerate(vectors):
        if i != slot:
            result = np.tensordot(x, result, axes=(0, 0))
    return np.asarray(result)


def diagonal(T: MultilinearForm) -> np.ndarray:
    """The diagonal d_j = a[j, ..., j]."""
    index = np.arange(T.dim)
    return T.coeffs[(index,) * T.order].copy()


def diagonal_s_sum(T: MultilinearForm, s) -> float:
    """
    (sum_j |T(e_j, ..., e_j)|^s)^(1/s) for any s > 0 (s < 1 is the quasi-norm regime).

    Raises:
        InvalidExponentError: If s <= 0.
    """
    if isinstance(s, Exponent):
        r = s.as_float()
    elif isinstance(s, float) and s == float("inf"):
        r = s
    else:
        r = float(positive_fraction(s, "s"))
    return quasi_norm(diagonal(T), r)


def product_form(m: int, n: int) -> MultilinearForm:
    """A(x^(1), ..., x^(m)) = sum_j x^(1)_j ... x^(m)_j; unit diagonal, zero elsewhere."""
    check_capacity(m, n)
    a = np.zeros((n,) * m)
    index = np.arange(n)
    a[(index,) * m] = 1.0
    return MultilinearForm(a)


class DistributionKind(Enum):
    """Coefficient distributions for random forms."""
    GAUSSIAN = "gaussian"
    UNIFORM_SIGN = "uniform-sign"
    SPARSE = "sparse"


_SPARSE_PATTERN = re.compile(r"^sparse\((\d+)\)$")


@dataclass(frozen=True)
class Distribution:
    kind: DistributionKind = DistributionKind.GAUSSIAN
    k: Optional[int] = None

    @classmethod
    def parse(cls, text) -> "Distribution":
        if isinstance(text, Distribution):
            return text
        token = str(text).strip().lower()
        match = _SPARSE_PATTERN.match(token)
        if match:
            return cls(DistributionKind.SPARSE, int(match.group(1)))
        try:
            kind = DistributionKind(token)
        except ValueError:
            raise ValueError(
                f"Unknown distribution {text!r}; use gaussian, uniform-sign or sparse(k)"
            )
        if kind is DistributionKind.SPARSE:
            raise ValueError("sparse distribution needs a count, e.g. sparse(3)")
        return cls(kind)

    def __str__(self):
        if self.kind is DistributionKind.SPARSE:
            return f"sparse({self.k})"
        return self.kind.value


def _gaussian(rng: np.random.Generator, size, scalar_mode: str) -> np.ndarray:
    if scalar_mode == COMPLEX:
        return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    return rng.standard_normal(size)


def random_form(m: int, n: int, seed=None, distribution="gaussian",
                scalar_mode: str = REAL) -> MultilinearForm:
    """
    Seeded random m-linear form with i.i.d. coefficients.

    Args:
        m: Order of the form.
        n: Dimension.
        seed: Seed or numpy Generator; identical seeds give identical tensors.
        distribution: 'gaussian', 'uniform-sign' (entries of modulus 1) or
            'sparse(k)' (k gaussian entries at distinct random positions).
        scalar_mode: 'real' or 'complex'.

    Examples:
        >>> random_form(2, 4, seed=5, distribution="uniform-sign").max_abs()
        1.0
    """
    check_capacity(m, n)
    dist = Distribution.parse(distribution)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    size = n ** m
    dtype = np.complex128 if scalar_mode == COMPLEX else np.float64

    if dist.kind is DistributionKind.GAUSSIAN:
        flat = _gaussian(rng, size, scalar_mode)
    elif dist.kind is DistributionKind.UNIFORM_SIGN:
        if scalar_mode == COMPLEX:
            flat = np.exp(2j * np.pi * rng.random(size))
        else:
            flat = rng.choice(np.array([-1.0, 1.0]), size=size)
    else:
        flat = np.zeros(size, dtype=dtype)
        count = min(dist.k, size)
        if dist.k > size:
            logger.warning(f"sparse({dist.k}) exceeds {size} coefficients, filling all")
        if count:
            positions = rng.choice(size, size=count, replace=False)
            flat[positions] = _gaussian(rng, count, scalar_mode)
    return MultilinearForm(np.asarray(flat, dtype=dtype).reshape((n,) * m))


def perturb(T: MultilinearForm, rng: np.random.Generator, step_size: float) -> MultilinearForm:
    """Add gaussian noise scaled by step_size * max|a| to every coefficient."""
    scale = step_size * (T.max_abs() or 1.0)
    noise = _gaussian(rng, T.coeffs.shape, T.scalar_mode)
    return MultilinearForm(T.coeffs + scale * noise)
