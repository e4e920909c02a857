"""
Operator norm ||T|| = sup |T(x^(1), ..., x^(m))| over products of l_p unit balls.

Exact oracles are used where the extreme points of the balls make the
supremum finite to enumerate (all-l_1, real all-l_inf) or where linear
algebra gives it (bilinear l_2). Everything else goes through alternating
ascent: fix all slots but one, replace that slot by the exact maximizer of
the resulting linear functional, and sweep until the objective stalls. The
ascent value is always a certified lower bound.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import CapacityError, DimensionMismatchError, UnsupportedOracleError
from .forms import COMPLEX, MultilinearForm, SpaceSpec, evaluate, slot_functional
from .spaces import Exponent, functional_norm_and_maximizer, normalize, unimodular_phase, unit_vector

logger = logging.getLogger(__name__)

MAX_SIGN_ENUMERATION = 22
POWER_ITERATION_TOL = 1e-12
POWER_ITERATION_MAX = 1000


class NormKind(Enum):
    """Certainty class of a norm value."""
    EXACT_ORACLE = "exact-oracle"
    LOWER_BOUND = "lower-bound"


@dataclass(frozen=True)
class NormBudget:
    """Alternating-ascent parameters; defaults are ample at desk scale."""
    starts: int = 32
    tol: float = 1e-10
    max_sweeps: int = 500
    seed: int = 12345
    workers: int = 1

    def __post_init__(self):
        if self.starts < 1 or self.max_sweeps < 1 or self.workers < 1:
            raise ValueError(
                f"starts, max_sweeps and workers must be >= 1, got "
                f"{self.starts}, {self.max_sweeps}, {self.workers}"
            )
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")

    @classmethod
    def from_config(cls, section: Optional[Dict], seed: Optional[int] = None) -> "NormBudget":
        section = section or {}
        return cls(
            starts=int(section.get("starts", cls.starts)),
            tol=float(section.get("tol", cls.tol)),
            max_sweeps=int(section.get("max_sweeps", cls.max_sweeps)),
            seed=cls.seed if seed is None else int(seed),
            workers=int(section.get("workers", cls.workers)),
        )

    def with_seed(self, seed: int) -> "NormBudget":
        return NormBudget(self.starts, self.tol, self.max_sweeps, int(seed), self.workers)


@dataclass(frozen=True)
class NormEstimate:
    """
    A value for ||T|| with its certainty class and the unit vectors attaining it.

    traces holds, per start, the objective after initialization and after
    every sweep (empty for oracles).
    """
    value: float
    kind: NormKind
    witnesses: Tuple[np.ndarray, ...]
    method: str
    sweeps: int = 0
    starts_used: int = 0
    degenerate: bool = False
    traces: Tuple[Tuple[float, ...], ...] = field(default_factory=tuple)

    @property
    def is_exact(self) -> bool:
        return self.kind is NormKind.EXACT_ORACLE

    def summary(self) -> Dict:
        """JSON-ready description without the witness vectors."""
        return {
            "value": self.value,
            "kind": self.kind.value,
            "method": self.method,
            "sweeps": self.sweeps,
            "starts_used": self.starts_used,
            "degenerate": self.degenerate,
        }


def _zero_estimate(T: MultilinearForm, kind: NormKind, method: str) -> NormEstimate:
    logger.warning(f"Norm of the zero form requested ({method}); returning 0")
    witnesses = tuple(np.zeros(T.dim, dtype=T.coeffs.dtype) for _ in range(T.order))
    return NormEstimate(0.0, kind, witnesses, method, degenerate=True)


def _check_spec(T: MultilinearForm, spec: SpaceSpec) -> None:
    if spec.order != T.order:
        raise DimensionMismatchError(
            f"SpaceSpec has {spec.order} exponents but the form has order {T.order}"
        )


def _random_start(rng: np.random.Generator, n: int, p: Exponent, scalar_mode: str) -> np.ndarray:
    x = rng.standard_normal(n)
    if scalar_mode == COMPLEX:
        x = x + 1j * rng.standard_normal(n)
    return normalize(x, p)


def _ascend_from(T: MultilinearForm, spec: SpaceSpec, xs: List[np.ndarray],
                 tol: float, max_sweeps: int) -> Tuple[float, List[np.ndarray], Tuple[float, ...], int]:
    """Run sweeps from one starting tuple; returns (value, vectors, trace, sweeps)."""
    value = abs(evaluate(T, xs))
    trace = [value]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for slot, p in enumerate(spec):
            c = slot_functional(T, xs, slot)
            result = functional_norm_and_maximizer(c, p)
            if not result.degenerate:
                xs[slot] = result.vector
        previous, value = value, abs(evaluate(T, xs))
        trace.append(value)
        if value == 0.0 or (value - previous) < tol * value:
            break
    return value, xs, tuple(trace), sweeps


def alternating_ascent(T: MultilinearForm, spec: SpaceSpec, starts: int = 32, tol: float = 1e-10,
                       max_sweeps: int = 500, seed=12345, workers: int = 1) -> NormEstimate:
    """
    Multi-start alternating dual ascent for ||T|| on l_{p_1}^n x ... x l_{p_m}^n.

    Each start draws gaussian vectors normalized onto the l_{p_i} spheres;
    start 0 uses the uniform vectors n^(-1/p_i)(1, ..., 1) instead. A sweep
    visits slots 1..m and replaces slot i by the exact maximizer of the
    linear functional obtained by fixing the other slots, so the objective
    never decreases. A start stops when the relative improvement drops below
    tol or after max_sweeps sweeps.

    Starts are seeded independently from `seed`, so the best value and its
    witnesses (ties to the lowest start index) do not depend on `workers`.

    Args:
        T: The form.
        spec: Domain exponents, one per slot.
        starts: Number of starting points (>= 1).
        tol: Relative improvement threshold (> 0).
        max_sweeps: Sweep cap per start (>= 1).
        seed: Integer seed.
        workers: Threads used to run starts concurrently.

    Returns:
        NormEstimate of kind LOWER_BOUND.

    Examples:
        >>> from diagsum.forms import product_form
        >>> est = alternating_ascent(product_form(2, 2), SpaceSpec.uniform(2, 4))
        >>> round(est.value, 12)
        1.414213562373
    """
    budget = NormBudget(starts, tol, max_sweeps, 0, workers)
    _check_spec(T, spec)
    if T.is_zero:
        return _zero_estimate(T, NormKind.LOWER_BOUND, "alternating-ascent")

    n, mode = T.dim, T.scalar_mode
    children = np.random.SeedSequence(seed).spawn(budget.starts)

    def run_start(index: int):
        if index == 0:
            xs = [unit_vector(n, p).astype(T.coeffs.dtype) for p in spec]
        else:
            rng = np.random.default_rng(children[index])
            xs = [_random_start(rng, n, p, mode) for p in spec]
        return _ascend_from(T, spec, xs, budget.tol, budget.max_sweeps)

    if budget.workers > 1:
        with ThreadPoolExecutor(max_workers=budget.workers) as pool:
            results = list(pool.map(run_start, range(budget.starts)))
    else:
        results = [run_start(index) for index in range(budget.starts)]

    best = 0
    for index, (value, _, _, sweeps) in enumerate(results):
        logger.debug(f"start {index}: value={value:.15g} after {sweeps} sweeps")
        if value > results[best][0]:
            best = index
    value, xs, _, sweeps = results[best]
    return NormEstimate(
        value=float(value),
        kind=NormKind.LOWER_BOUND,
        witnesses=tuple(np.array(x) for x in xs),
        method="alternating-ascent",
        sweeps=sweeps,
        starts_used=budget.starts,
        traces=tuple(result[2] for result in results),
    )


def exact_norm_l1(T: MultilinearForm, spec: Optional[SpaceSpec] = None) -> NormEstimate:
    """
    Exact ||T|| on l_1^n x ... x l_1^n: the largest coefficient modulus.

    The l_1 ball is the (absolutely) convex hull of the basis vectors, so the
    supremum is attained at a tuple of basis vectors. The last witness carries
    the phase that makes the value real and positive.

    Raises:
        UnsupportedOracleError: If spec is given and is not all-l_1.
    """
    if spec is not None:
        _check_spec(T, spec)
        if not spec.all_equal_to(1):
            raise UnsupportedOracleError(f"l_1 oracle needs an all-l_1 spec, got ({spec})")
    if T.is_zero:
        return _zero_estimate(T, NormKind.EXACT_ORACLE, "l1-vertex")

    moduli = np.abs(T.coeffs)
    index = np.unravel_index(int(np.argmax(moduli)), moduli.shape)
    witnesses = []
    for slot, j in enumerate(index):
        e = np.zeros(T.dim, dtype=T.coeffs.dtype)
        e[j] = 1.0
        witnesses.append(e)
    witnesses[-1] = witnesses[-1] * np.conj(unimodular_phase(T.coeffs[index]))
    return NormEstimate(float(moduli[index]), NormKind.EXACT_ORACLE, tuple(witnesses), "l1-vertex")


def exact_norm_bilinear_l2(T: MultilinearForm, spec: Optional[SpaceSpec] = None) -> NormEstimate:
    """
    Exact ||T|| of a bilinear form on l_2^n x l_2^n: the spectral norm of (a_jk).

    The value is the largest singular value from np.linalg.svd. Power
    iteration on the Gram map M^H M, started from the top right singular
    vector, refines the witness until the eigen-residual
    ||M^H M v - lambda v|| falls to 1e-12 * lambda.

    Raises:
        UnsupportedOracleError: Form is not bilinear or spec is not (2, 2).
    """
    if T.order != 2:
        raise UnsupportedOracleError(f"Bilinear l_2 oracle needs m = 2, got m = {T.order}")
    if spec is not None and (spec.order != 2 or not spec.all_equal_to(2)):
        raise UnsupportedOracleError(f"Bilinear l_2 oracle needs spec (2,2), got ({spec})")
    if T.is_zero:
        return _zero_estimate(T, NormKind.EXACT_ORACLE, "bilinear-l2-power")

    M = T.coeffs
    _, singular, Vh = np.linalg.svd(M)
    sigma = float(singular[0])
    v = np.conj(Vh[0]).astype(M.dtype)
    v = v / np.linalg.norm(v)
    for iteration in range(POWER_ITERATION_MAX + 1):
        w = np.conj(M.T) @ (M @ v)
        lam = float(np.real(np.vdot(v, w)))
        residual = float(np.linalg.norm(w - lam * v))
        if residual <= POWER_ITERATION_TOL * max(lam, sigma ** 2):
            break
        v = w / np.linalg.norm(w)
    else:
        logger.warning(f"Power iteration residual {residual:.3g} above tolerance "
                       f"after {POWER_ITERATION_MAX} steps")
    logger.debug(f"bilinear l_2 norm {sigma:.15g}, witness residual {residual:.3g} "
                 f"after {iteration} refinement steps")

    Mv = M @ v
    u = np.conj(Mv) / np.linalg.norm(Mv)
    return NormEstimate(sigma, NormKind.EXACT_ORACLE, (u, v), "bilinear-l2-power")


def _sign_vectors(n: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=n)))


def exact_norm_linf_real(T: MultilinearForm, spec: Optional[SpaceSpec] = None) -> NormEstimate:
    """
    Exact ||T|| on real l_inf^n x ... x l_inf^n by sign-vector enumeration.

    Extreme points of the real l_inf ball are sign vectors, so the supremum is
    a maximum over 2^(nm) sign tuples. Slots 1..m-1 are enumerated
    explicitly; the last slot is resolved in closed form (its best sign
    vector gives the l_1 norm of the remaining functional), which visits the
    same tuples.

    Raises:
        UnsupportedOracleError: Complex form or spec not all-l_inf.
        CapacityError: n * m > 22.
    """
    if T.scalar_mode == COMPLEX:
        raise UnsupportedOracleError("Sign enumeration is only valid over real scalars")
    if spec is not None:
        _check_spec(T, spec)
        if not spec.all_equal_to(Exponent.INF):
            raise UnsupportedOracleError(f"l_inf oracle needs an all-l_inf spec, got ({spec})")
    m, n = T.order, T.dim
    if n * m > MAX_SIGN_ENUMERATION:
        raise CapacityError(
            f"Sign enumeration over 2^{n * m} tuples exceeds the n*m <= {MAX_SIGN_ENUMERATION} guard"
        )
    if T.is_zero:
        return _zero_estimate(T, NormKind.EXACT_ORACLE, "linf-sign-enumeration")

    signs = _sign_vectors(n) if m > 1 else None
    # After the loop the remaining (last) slot is axis 0 and each enumerated slot adds a trailing axis.
    R = T.coeffs
    for _ in range(m - 1):
        R = np.tensordot(R, signs, axes=([0], [1]))
    totals = np.abs(R).sum(axis=0)
    best = np.unravel_index(int(np.argmax(totals)), np.shape(totals))
    witnesses = [signs[k].copy() for k in best]
    last = R[(slice(None),) + tuple(best)]
    witnesses.append(unimodular_phase(last))
    return NormEstimate(float(np.max(totals)), NormKind.EXACT_ORACLE, tuple(witnesses),
                        "linf-sign-enumeration")


def oracle_for(T: MultilinearForm, spec: SpaceSpec) -> Optional[str]:
    """Name of the exact oracle applicable to (T, spec), or None."""
    _check_spec(T, spec)
    if spec.all_equal_to(1):
        return "l1-vertex"
    if T.order == 2 and spec.all_equal_to(2):
        return "bilinear-l2-power"
    if (spec.all_equal_to(Exponent.INF) and T.scalar_mode != COMPLEX
            and T.order * T.dim <= MAX_SIGN_ENUMERATION):
        return "linf-sign-enumeration"
    return None


def best_available_norm(T: MultilinearForm, spec: SpaceSpec,
                        budget: Optional[NormBudget] = None) -> NormEstimate:
    """
    Route to an exact oracle when its preconditions hold, else to alternating ascent.

    Examples:
        >>> from diagsum.forms import product_form
        >>> best_available_norm(product_form(2, 3), SpaceSpec.parse("1,1")).kind.value
        'exact-oracle'
    """
    budget = budget or NormBudget()
    oracle = oracle_for(T, spec)
    logger.debug(f"norm of {T!r} on ({spec}) via {oracle or 'alternating-ascent'}")
    if oracle == "l1-vertex":
        return exact_norm_l1(T, spec)
    if oracle == "bilinear-l2-power":
        return exact_norm_bilinear_l2(T, spec)
    if oracle == "linf-sign-enumeration":
        return exact_norm_linf_real(T, spec)
    return alternating_ascent(T, spec, budget.starts, budget.tol, budget.max_sweeps,
                              budget.seed, budget.workers)
