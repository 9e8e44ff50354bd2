"""Count statistics over a codeword's pulses and threshold selection.

A detector's codeword count is the number of pulses that produced a click:
Binomial(pulses, p) exactly, with a Poisson approximation (lambda =
pulses * p) for pulse counts too large for exact evaluation and a
continuity-corrected Gaussian kept for cross-checks.

Error conventions: under the Equal hypothesis an error is a count *strictly
above* the reported tail point (tail_above), under Different a count
*strictly below* (tail_below).  The decision rule itself maps count >=
threshold to outcome 1, so best_threshold minimizes the decision-consistent
worst error max(P_equal(C >= t), P_different(C < t)) — the boundary atom
C = t errs on the Equal side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy import stats as _sps

from .core import DomainError
from .probmodel import ClickProfile

__all__ = [
    "LAW_BINOMIAL",
    "LAW_POISSON",
    "LAW_GAUSSIAN",
    "BINOMIAL_PULSE_LIMIT",
    "CountModel",
    "ThresholdChoice",
    "tail_above",
    "tail_below",
    "error_probability",
    "best_threshold",
]

LAW_BINOMIAL = "binomial-exact"
LAW_POISSON = "poisson-approx"
LAW_GAUSSIAN = "gaussian-approx"

# Above this many pulses the exact binomial tails are replaced by Poisson.
BINOMIAL_PULSE_LIMIT = 1_000_000


@dataclass(frozen=True)
class CountModel:
    """Distribution of one detector's click count over a codeword.

    pulses  number of pulses accumulated
    p       per-pulse click probability
    law     which distribution family evaluates the tails
    """

    pulses: int
    p: float
    law: str = LAW_BINOMIAL

    def __post_init__(self) -> None:
        if self.pulses < 1:
            raise DomainError(f"pulses must be >= 1, got {self.pulses}")
        if not (0.0 <= self.p <= 1.0):
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")
        if self.law not in (LAW_BINOMIAL, LAW_POISSON, LAW_GAUSSIAN):
            raise DomainError(f"unknown law {self.law!r}")

    @classmethod
    def auto(cls, pulses: int, p: float) -> "CountModel":
        """Exact binomial up to BINOMIAL_PULSE_LIMIT pulses, Poisson beyond."""
        law = LAW_BINOMIAL if pulses <= BINOMIAL_PULSE_LIMIT else LAW_POISSON
        return cls(pulses, p, law)

    @property
    def mean(self) -> float:
        return self.pulses * self.p


def _check_point(model: CountModel, t: int) -> None:
    if not isinstance(t, int):
        raise DomainError(f"count points must be integers, got {t!r}")
    if t < 0 or t > model.pulses:
        raise DomainError(f"count point {t} outside [0, {model.pulses}]")


def tail_above(model: CountModel, t: int) -> float:
    """P(C > t)."""
    _check_point(model, t)
    if model.law == LAW_BINOMIAL:
        return float(_sps.binom.sf(t, model.pulses, model.p))
    if model.law == LAW_POISSON:
        return float(_sps.poisson.sf(t, model.mean))
    sd = math.sqrt(model.pulses * model.p * (1.0 - model.p))
    if sd == 0.0:
        return float(model.mean > t)
    return float(_sps.norm.sf((t + 0.5 - model.mean) / sd))


def tail_below(model: CountModel, t: int) -> float:
    """P(C < t)."""
    _check_point(model, t)
    if t == 0:
        return 0.0
    if model.law == LAW_BINOMIAL:
        return float(_sps.binom.cdf(t - 1, model.pulses, model.p))
    if model.law == LAW_POISSON:
        return float(_sps.poisson.cdf(t - 1, model.mean))
    sd = math.sqrt(model.pulses * model.p * (1.0 - model.p))
    if sd == 0.0:
        return float(model.mean < t)
    return float(_sps.norm.cdf((t - 0.5 - model.mean) / sd))


def _decision_errors(equal: CountModel, different: CountModel, t: int) -> tuple[float, float]:
    # Errors of the rule "count >= t means Different": P_equal(C >= t) and
    # P_different(C < t).
    e_eq = 1.0 if t <= 0 else tail_above(equal, t - 1)
    e_df = 0.0 if t <= 0 else tail_below(different, t)
    return e_eq, e_df


def error_probability(
    pairs: Sequence[tuple[ClickProfile, ClickProfile]],
    thresholds: Sequence[Sequence[int]],
) -> float:
    """Protocol error probability over runs: strict-tail convention.

    ``pairs`` holds one (Equal, Different) profile pair per run, with one
    probability per observed detector; ``thresholds`` the matching per-run
    threshold tuples.  Returns the max over all runs and detectors of
    P_equal(C > t) and P_different(C < t).
    """
    if len(pairs) != len(thresholds) or not pairs:
        raise DomainError(
            f"need one threshold tuple per run: {len(pairs)} runs, "
            f"{len(thresholds)} threshold tuples"
        )
    worst = 0.0
    for (equal, different), run_ths in zip(pairs, thresholds):
        if equal.pulses != different.pulses:
            raise DomainError(
                f"Equal/Different profiles cover different pulse counts: "
                f"{equal.pulses} vs {different.pulses}"
            )
        if not (
            len(equal.per_detector) == len(different.per_detector) == len(run_ths)
        ):
            raise DomainError(
                f"profiles have {len(equal.per_detector)} detectors, got "
                f"{len(run_ths)} thresholds"
            )
        for p_eq, p_df, t in zip(equal.per_detector, different.per_detector, run_ths):
            t = int(t)
            worst = max(
                worst,
                tail_above(CountModel.auto(equal.pulses, p_eq), t),
                tail_below(CountModel.auto(different.pulses, p_df), t),
            )
    return worst


@dataclass(frozen=True)
class ThresholdChoice:
    """A selected threshold and its worst-case decision error."""

    threshold: int
    p_e: float
    degenerate: bool = False


def best_threshold(equal: CountModel, different: CountModel) -> ThresholdChoice:
    """Integer threshold minimizing max(P_equal(C >= t), P_different(C < t)).

    P_equal(C >= t) is nonincreasing in t and P_different(C < t) is
    nondecreasing, so the minimizer sits where they cross; a binary search
    finds it without scanning the count range.  Ties go to the smaller
    threshold.  When the two models have equal means no threshold separates
    them; the rounded midpoint is returned with ``degenerate=True``.
    """
    if equal.pulses != different.pulses:
        raise DomainError(
            f"count models cover different pulse counts: {equal.pulses} vs {different.pulses}"
        )
    if math.isclose(equal.mean, different.mean, rel_tol=1e-12, abs_tol=1e-12):
        t = int(round(equal.mean))
        t = min(max(t, 0), equal.pulses)
        e_eq, e_df = _decision_errors(equal, different, t)
        return ThresholdChoice(t, max(e_eq, e_df), degenerate=True)

    def diff_dominates(t: int) -> bool:
        e_eq, e_df = _decision_errors(equal, different, t)
        return e_df >= e_eq

    lo, hi = 0, equal.pulses
    if not diff_dominates(hi):
        cross = hi
    elif diff_dominates(lo):
        cross = lo
    else:
        # smallest t with e_df >= e_eq
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if diff_dominates(mid):
                hi = mid
            else:
                lo = mid
        cross = hi
    best_t, best_err = None, math.inf
    for t in (cross - 1, cross, cross + 1):
        if t < 0 or t > equal.pulses:
            continue
        e_eq, e_df = _decision_errors(equal, different, t)
        err = max(e_eq, e_df)
        if err < best_err:
            best_t, best_err = t, err
    assert best_t is not None
    return ThresholdChoice(best_t, best_err)
