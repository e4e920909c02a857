"""
Desk-scale checks of the diagonal s-sum inequalities.

Measures the quotient diagonal_s_sum(T, s) / ||T||, searches for forms
that push it towards the best constant, verifies that seeded random forms
never exceed the constant, and fits growth exponents in n.

A quotient measured with a lower-bound norm may overstate the true
quotient, so violations are judged with a looser tolerance in that case.
"""

import math
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from tqdm import tqdm

from .constants import ConstantQuery, best_constant, best_constant_regime
from .errors import CapacityError, DegenerateFormError, InvalidFitError
from .forms import (
    COMPLEX, MAX_COEFFICIENTS, REAL, Distribution, MultilinearForm, SpaceSpec,
    diagonal_s_sum, perturb, product_form, random_form,
)
from .normest import NormBudget, NormEstimate, NormKind, best_available_norm

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-8
LOWER_BOUND_TOLERANCE = 1e-2
DEFAULT_NGRID = (2, 4, 8, 16, 32)


def violation_tolerance(kind: NormKind) -> float:
    return ORACLE_TOLERANCE if kind is NormKind.EXACT_ORACLE else LOWER_BOUND_TOLERANCE


@dataclass(frozen=True)
class ExperimentRecord:
    """One measured instance of the diagonal inequality."""
    query: ConstantQuery
    regime: str
    theoretical_constant: float
    measured_ratio: float
    form_descriptor: str
    norm: Dict
    seed: int
    scalar_mode: str = REAL
    timestamp: Optional[str] = None

    @property
    def informational(self) -> bool:
        return self.scalar_mode != REAL

    @property
    def violates(self) -> bool:
        tol = violation_tolerance(NormKind(self.norm["kind"]))
        return self.measured_ratio > self.theoretical_constant * (1.0 + tol)

    def to_dict(self) -> Dict:
        data = {
            "m": self.query.m,
            "n": self.query.n,
            "p_list": [str(p) for p in self.query.exponents],
            "s": str(self.query.s),
            "regime": self.regime,
            "theoretical_constant": self.theoretical_constant,
            "measured_ratio": self.measured_ratio,
            "form_descriptor": self.form_descriptor,
            "norm": dict(self.norm),
            "seed": self.seed,
            "scalar_mode": self.scalar_mode,
            "informational": self.informational,
        }
        if self.timestamp is not None:
            data["timestamp"] = self.timestamp
        return data

    def csv_row(self) -> Dict:
        return {
            "m": self.query.m,
            "n": self.query.n,
            "p_list": str(self.query.exponents),
            "s": str(self.query.s),
            "regime": self.regime,
            "theoretical_constant": repr(self.theoretical_constant),
            "measured_ratio": repr(self.measured_ratio),
            "norm_value": repr(self.norm["value"]),
            "norm_kind": self.norm["kind"],
            "form_descriptor": self.form_descriptor,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of ln(value) = slope * ln(n) + intercept."""
    points: Tuple[Tuple[int, float], ...]
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> Dict:
        return {
            "points": [[n, value] for n, value in self.points],
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class SearchBudget:
    """
    Work allowed to search_best_constant.

    inner is the reduced norm budget used while searching, full the one used
    for the reported record.
    """
    random_trials: int = 16
    ascent_steps: int = 32
    step_size: float = 0.1
    seed: int = 12345
    distribution: str = "gaussian"
    inner: NormBudget = field(default_factory=lambda: NormBudget(starts=4, max_sweeps=100))
    full: NormBudget = field(default_factory=NormBudget)

    def __post_init__(self):
        if self.random_trials < 0 or self.ascent_steps < 0 or not self.step_size > 0:
            raise ValueError(
                f"Search budget must be nonnegative with step_size > 0, got "
                f"trials={self.random_trials}, steps={self.ascent_steps}, step_size={self.step_size}"
            )

    @classmethod
    def from_config(cls, search: Optional[Dict], normest: Optional[Dict], seed: int,
                    distribution: str = "gaussian") -> "SearchBudget":
        search = search or {}
        full = NormBudget.from_config(normest, seed)
        inner = replace(full, starts=int(search.get("inner_starts", 4)),
                        max_sweeps=int(search.get("inner_max_sweeps", 100)))
        return cls(
            random_trials=int(search.get("random_trials", cls.random_trials)),
            ascent_steps=int(search.get("ascent_steps", cls.ascent_steps)),
            step_size=float(search.get("step_size", cls.step_size)),
            seed=seed,
            distribution=distribution,
            inner=inner,
            full=full,
        )


@dataclass
class VerificationReport:
    """Outcome of verify_inequality."""
    query: ConstantQuery
    regime: str
    theoretical_constant: float
    trials: int
    seed: int
    skipped: int = 0
    max_ratio: float = 0.0
    violations: List[ExperimentRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict:
        return {
            "m": self.query.m,
            "n": self.query.n,
            "p_list": [str(p) for p in self.query.exponents],
            "s": str(self.query.s),
            "regime": self.regime,
            "theoretical_constant": self.theoretical_constant,
            "trials": self.trials,
            "skipped": self.skipped,
            "seed": self.seed,
            "max_ratio": self.max_ratio,
            "violation_count": len(self.violations),
            "violations": [record.to_dict() for record in self.violations],
        }


def ratio(T: MultilinearForm, spec: SpaceSpec, s, norm_budget: Optional[NormBudget] = None
          ) -> Tuple[float, NormEstimate]:
    """
    The quotient diagonal_s_sum(T, s) / ||T||, with the norm estimate used.

    Raises:
        DegenerateFormError: For the zero form.
    """
    if T.is_zero:
        raise DegenerateFormError("The zero form has no diagonal ratio")
    estimate = best_available_norm(T, spec, norm_budget)
    if estimate.value <= 0.0:
        raise DegenerateFormError(f"Norm estimate of a nonzero form came out as {estimate.value}")
    return diagonal_s_sum(T, s) / estimate.value, estimate


def _record(q: ConstantQuery, T: MultilinearForm, descriptor: str, seed: int,
            budget: NormBudget, scalar_mode: Optional[str] = None) -> ExperimentRecord:
    measured, estimate = ratio(T, q.exponents, q.s, budget)
    return ExperimentRecord(
        query=q,
        regime=best_constant_regime(q).label.value,
        theoretical_constant=best_constant(q),
        measured_ratio=measured,
        form_descriptor=descriptor,
        norm=estimate.summary(),
        seed=seed,
        scalar_mode=scalar_mode or T.scalar_mode,
    )


def _trial_seeds(seed: int, count: int) -> List[int]:
    rng = np.random.default_rng(seed)
    return [int(value) for value in rng.integers(0, 2 ** 63 - 1, size=count)]


def search_best_constant(q: ConstantQuery, budget: Optional[SearchBudget] = None,
                         scalar_mode: str = REAL, progress: bool = False
                         ) -> Tuple[float, ExperimentRecord]:
    """
    Empirical maximization of diagonal_s_sum(T, s) / ||T|| over forms T.

    Candidates are the product form, random_trials seeded random forms and a
    hill climb in coefficient space from the best of them (gaussian
    perturbations scaled by step_size * max|a|, improvements kept). The
    quotient is scale-invariant so no renormalization is needed. Candidates
    are scored with budget.inner; the winner and the product form are then
    re-measured with budget.full and the larger is reported, so the result is
    never below the product form's quotient.

    Returns:
        (best ratio, its ExperimentRecord)
    """
    budget = budget or SearchBudget()
    rng = np.random.default_rng(budget.seed)
    m, n = q.m, q.n

    product = product_form(m, n)
    if scalar_mode == COMPLEX:
        product = product.scaled(1 + 0j)
    best_form = product
    best_descriptor = "product"
    best_score, _ = ratio(product, q.exponents, q.s, budget.inner)

    seeds = _trial_seeds(budget.seed, budget.random_trials)
    for trial_seed in tqdm(seeds, desc="random forms", disable=not progress):
        T = random_form(m, n, trial_seed, budget.distribution, scalar_mode)
        if T.is_zero:
            continue
        score, _ = ratio(T, q.exponents, q.s, budget.inner)
        if score > best_score:
            best_score, best_form = score, T
            best_descriptor = f"random(seed={trial_seed},distribution={budget.distribution})"

    improved = 0
    for _ in tqdm(range(budget.ascent_steps), desc="hill climb", disable=not progress):
        candidate = perturb(best_form, rng, budget.step_size)
        if candidate.is_zero:
            continue
        score, _ = ratio(candidate, q.exponents, q.s, budget.inner)
        if score > best_score:
            best_score, best_form = score, candidate
            improved += 1
    if improved:
        best_descriptor = f"optimized(seed={budget.seed},steps={budget.ascent_steps})"
    logger.info(f"search m={m} n={n}: inner best {best_score:.12g} ({best_descriptor}), {improved} climbs kept")

    record = _record(q, product, "product", budget.seed, budget.full, scalar_mode)
    if best_form is not product:
        challenger = _record(q, best_form, best_descriptor, budget.seed, budget.full, scalar_mode)
        if challenger.measured_ratio > record.measured_ratio:
            record = challenger
    return record.measured_ratio, record


def verify_inequality(q: ConstantQuery, trials: int, seed: int = 12345,
                      distribution="gaussian", norm_budget: Optional[NormBudget] = None,
                      scalar_mode: str = REAL, progress: bool = False) -> VerificationReport:
    """
    Check diagonal_s_sum(T, s) <= C ||T|| on seeded random forms.

    A form violates when its measured ratio exceeds C (1 + tol) with
    tol = 1e-8 for exact-oracle norms and 1e-2 for lower-bound norms.
    Violations are report content, not errors.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    norm_budget = norm_budget or NormBudget(seed=seed)
    report = VerificationReport(
        query=q,
        regime=best_constant_regime(q).label.value,
        theoretical_constant=best_constant(q),
        trials=trials,
        seed=seed,
    )
    dist = Distribution.parse(distribution)
    for trial_seed in tqdm(_trial_seeds(seed, trials), desc="verify", disable=not progress):
        T = random_form(q.m, q.n, trial_seed, dist, scalar_mode)
        if T.is_zero:
            report.skipped += 1
            continue
        record = _record(q, T, f"random(seed={trial_seed},distribution={dist})", trial_seed, norm_budget)
        report.max_ratio = max(report.max_ratio, record.measured_ratio)
        if record.violates:
            logger.warning(
                f"violation: ratio {record.measured_ratio:.15g} > constant "
                f"{record.theoretical_constant:.15g} ({record.form_descriptor}, {record.norm['kind']})"
            )
            report.violations.append(record)
    return report


def fit_exponent(values: Sequence[Tuple[int, float]]) -> FitResult:
    """
    Ordinary least squares of ln(value) against ln(n); the slope is the growth exponent.

    Examples:
        >>> round(fit_exponent([(2, 2.0), (4, 4.0), (8, 8.0)]).slope, 12)
        1.0

    Raises:
        InvalidFitError: Fewer than 3 distinct n, or a nonpositive value.
    """
    points = tuple((int(n), float(value)) for n, value in values)
    if any(not value > 0 or n < 1 for n, value in points):
        raise InvalidFitError(f"Fit needs n >= 1 and positive values, got {points}")
    if len({n for n, _ in points}) < 3:
        raise InvalidFitError(f"Fit needs at least 3 distinct n, got {points}")
    log_n = np.log([n for n, _ in points])
    log_v = np.log([value for _, value in points])
    fit = stats.linregress(log_n, log_v)
    residual = float(np.max(np.abs(log_v - (fit.slope * log_n + fit.intercept))))
    return FitResult(points, float(fit.slope), float(fit.intercept), residual)


@dataclass
class GrowthScan:
    """Per-n search records, the fitted exponent and the (ln n, ln C) plot rows."""
    records: List[ExperimentRecord]
    fit: FitResult
    predicted_exponent: str
    skipped: List[int] = field(default_factory=list)

    @property
    def plot_rows(self) -> List[Tuple[float, float]]:
        return [(math.log(r.query.n), math.log(r.measured_ratio)) for r in self.records]


def growth_scan(m: int, spec: SpaceSpec, s, ngrid: Sequence[int] = DEFAULT_NGRID,
                budget: Optional[SearchBudget] = None, scalar_mode: str = REAL,
                progress: bool = False) -> GrowthScan:
    """
    Run search_best_constant for every n in the grid and fit the growth exponent.

    Grid points whose dense tensor would exceed the size guard are skipped.
    """
    records, skipped = [], []
    for n in ngrid:
        if n ** m > MAX_COEFFICIENTS:
            logger.warning(f"Skipping n={n}: n^m = {n ** m} exceeds the size guard")
            skipped.append(n)
            continue
        q = ConstantQuery(m, n, spec, s)
        _, record = search_best_constant(q, budget, scalar_mode, progress)
        records.append(record)
    if not records:
        raise CapacityError(f"No grid point in {list(ngrid)} fits the size guard for m={m}")
    fit = fit_exponent([(r.query.n, r.measured_ratio) for r in records])
    predicted = best_constant_regime(records[0].query).exponent_of_n
    return GrowthScan(records, fit, str(predicted), skipped)
