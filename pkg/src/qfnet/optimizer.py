"""Amplitude/threshold search minimizing qubit cost under an error budget.

Per run the search minimizes sum_k alpha_k**2 * log2(n) subject to the
worst-case decision error over the observed detectors staying below epsilon,
with thresholds delegated to stats.best_threshold.  The error is monotone
decreasing along any amplitude ray (more photons separate the hypotheses
better), so a geometric ladder plus log-bisection finds the minimal feasible
scale; asymmetric channels then get a per-coordinate descent that walks each
amplitude down while feasibility holds.  Deterministic throughout — no
randomness, fixed iteration orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .complexity import q_total
from .core import (
    ChannelModel,
    DomainError,
    Encoding,
    ProtocolParams,
    RunConfig,
    run_pairing,
)
from .decision import run_budget
from .probmodel import (
    ClickProfile,
    four_party_asymmetric,
    two_party_asymmetric,
)
from .stats import CountModel, best_threshold, error_probability

__all__ = ["OptimizationProblem", "OptimizationResult", "optimize", "evaluate_fixed"]


@dataclass(frozen=True)
class OptimizationProblem:
    """Instance description for the search.

    runs    how many runs to budget (None: the worst case for resolving the
            full relationship — N-1 for the multi-party scheme; pass 1 for
            an all-equal-only budget)
    bounds  inclusive per-amplitude search interval
    grid    relative amplitude resolution of the search
    """

    pp: ProtocolParams
    ch: ChannelModel
    encoding: Encoding = Encoding.SINGLE_BIT
    runs: int | None = None
    bounds: tuple[float, float] = (1.0, 32768.0)
    grid: float = 1e-3

    def __post_init__(self) -> None:
        if self.pp.N not in (2, 4):
            raise DomainError(f"optimization defined for 2 or 4 senders, got {self.pp.N}")
        if self.ch.n_senders != self.pp.N:
            raise DomainError("channel and protocol disagree on the sender count")
        if self.encoding is Encoding.TWO_BIT and self.pp.N != 2:
            raise DomainError("two-bit encoding is defined for two senders only")
        lo, hi = self.bounds
        if not (0.0 < lo < hi and math.isfinite(hi)):
            raise DomainError(f"bounds must satisfy 0 < lo < hi < inf, got {self.bounds}")
        if not (0.0 < self.grid < 0.5):
            raise DomainError(f"grid must lie in (0, 0.5), got {self.grid!r}")
        budget = run_budget(self.pp.N, "R", "MultiParty")
        if self.runs is None:
            object.__setattr__(self, "runs", budget)
        elif not (1 <= self.runs <= budget):
            raise DomainError(f"runs must lie in [1, {budget}], got {self.runs}")


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a search or a fixed-parameter audit.

    feasible implies p_e <= epsilon; q_r always equals the audit identity
    sum over runs of alpha**2 * log2(n).
    """

    per_run: tuple[RunConfig, ...]
    q_r: float
    p_e: float
    feasible: bool
    trace: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {
            "per_run": [
                {
                    "alphas": list(rc.alphas),
                    "pairing": list(rc.pairing),
                    "thresholds": list(rc.thresholds),
                    "encoding": rc.encoding.value,
                }
                for rc in self.per_run
            ],
            "q_r": self.q_r,
            "p_e": self.p_e,
            "feasible": self.feasible,
            "trace": self.trace,
        }


def _run_profiles(
    problem: OptimizationProblem, run_index: int, alphas: Sequence[float]
) -> tuple[ClickProfile, ClickProfile]:
    if problem.pp.N == 2:
        return two_party_asymmetric(alphas, problem.ch, problem.pp, problem.encoding)
    rc = RunConfig(
        tuple(alphas), run_pairing(run_index, 4), (0, 0, 0), problem.encoding
    )
    return four_party_asymmetric(run_index, rc, problem.ch, problem.pp)


def _pe_thresholds(
    problem: OptimizationProblem, run_index: int, alphas: Sequence[float]
) -> tuple[float, tuple[int, ...]]:
    # Worst detector error with per-detector optimal thresholds.
    equal, diff = _run_profiles(problem, run_index, alphas)
    worst = 0.0
    ths = []
    for p_eq, p_df in zip(equal.per_detector, diff.per_detector):
        choice = best_threshold(
            CountModel.auto(equal.pulses, p_eq), CountModel.auto(diff.pulses, p_df)
        )
        ths.append(choice.threshold)
        worst = max(worst, choice.p_e)
    return worst, tuple(ths)


def _optimize_run(
    problem: OptimizationProblem, run_index: int, counter: list[int]
) -> tuple[tuple[float, ...], tuple[int, ...], float, bool]:
    lo, hi = problem.bounds
    eps = problem.pp.epsilon
    n_var = problem.pp.N
    sqrt_eta = problem.ch.sqrt_eta
    symmetric = problem.ch.symmetric()
    # Search ray: equalize the attenuated amplitudes sqrt(eta_k)*alpha_k
    # across senders (uniform when the channel is symmetric), normalized so
    # the largest coordinate equals the scale.
    ray = [1.0] * n_var if symmetric else [1.0 / s for s in sqrt_eta]
    top = max(ray)
    ray = [r / top for r in ray]

    def at(scale: float) -> tuple[float, ...]:
        return tuple(min(hi, max(lo, scale * r)) for r in ray)

    def evaluate(alphas: Sequence[float]) -> tuple[float, tuple[int, ...]]:
        counter[0] += 1
        return _pe_thresholds(problem, run_index, alphas)

    # Phase A: geometric ladder to the first feasible scale.
    best_pe, best_alphas, best_ths = math.inf, at(lo), (0,) * n_var
    scale, prev = lo, None
    feasible_scale = None
    while scale <= hi * (1.0 + 1e-9):
        alphas = at(scale)
        pe, ths = evaluate(alphas)
        if pe < best_pe:
            best_pe, best_alphas, best_ths = pe, alphas, ths
        if pe <= eps:
            feasible_scale = scale
            break
        prev = scale
        scale *= 1.3
    if feasible_scale is None:
        return best_alphas, best_ths, best_pe, False
    if prev is not None:
        f_lo, f_hi = prev, feasible_scale
        while f_hi / f_lo > 1.0 + problem.grid:
            mid = math.sqrt(f_lo * f_hi)
            pe, _ = evaluate(at(mid))
            if pe <= eps:
                f_hi = mid
            else:
                f_lo = mid
        feasible_scale = f_hi
    alphas = list(at(feasible_scale))

    # Phase B: per-coordinate descent.  Along the uniform ray on a symmetric
    # channel the minimal feasible scale already minimizes the symmetric
    # cost, so the descent is only needed for unequal transmissions.
    if not symmetric:
        for _ in range(8):
            improved = False
            for k in range(n_var):
                current = alphas[k]
                if current <= lo * (1.0 + 1e-12):
                    continue
                c_hi, c_lo = current, None
                x = current
                while x > lo:
                    x = max(lo, x * 0.8)
                    alphas[k] = x
                    pe, _ = evaluate(alphas)
                    if pe <= eps:
                        c_hi = x
                        if x <= lo:
                            break
                    else:
                        c_lo = x
                        break
                if c_lo is not None:
                    while c_hi / c_lo > 1.0 + problem.grid:
                        mid = math.sqrt(c_lo * c_hi)
                        alphas[k] = mid
                        pe, _ = evaluate(alphas)
                        if pe <= eps:
                            c_hi = mid
                        else:
                            c_lo = mid
                alphas[k] = c_hi
                if c_hi < current * (1.0 - 1e-12):
                    improved = True
            if not improved:
                break
    pe, ths = evaluate(alphas)
    if pe > eps:  # numerical safety: step back up along the ray
        alphas = list(at(feasible_scale))
        pe, ths = evaluate(alphas)
    return tuple(alphas), ths, pe, pe <= eps


def optimize(problem: OptimizationProblem) -> OptimizationResult:
    """Minimize the total qubit cost under the per-run error budget.

    Returns feasible = False (with the least error found) when no candidate
    within bounds meets epsilon.  Deterministic given the problem.
    """
    evaluations = [0]
    per_run: list[RunConfig] = []
    worst_pe = 0.0
    all_feasible = True
    assert problem.runs is not None
    for run_index in range(1, problem.runs + 1):
        if problem.ch.symmetric() and run_index > 1 and per_run:
            # identical stats in every run when the channel is symmetric
            first = per_run[0]
            per_run.append(
                RunConfig(
                    first.alphas,
                    run_pairing(run_index, problem.pp.N),
                    first.thresholds,
                    first.encoding,
                )
            )
            continue
        alphas, ths, pe, ok = _optimize_run(problem, run_index, evaluations)
        worst_pe = max(worst_pe, pe)
        all_feasible = all_feasible and ok
        per_run.append(
            RunConfig(alphas, run_pairing(run_index, problem.pp.N), ths, problem.encoding)
        )
    trace = {"mode": "optimize", "evaluations": evaluations[0]}
    if not all_feasible:
        return OptimizationResult(
            tuple(per_run), q_total(per_run, problem.pp.n), worst_pe, False, trace
        )
    # Post-hoc verification with the strict-tail protocol error.
    result = evaluate_fixed(per_run, problem)
    trace["search_p_e"] = worst_pe
    return OptimizationResult(result.per_run, result.q_r, result.p_e, result.feasible, trace)


def evaluate_fixed(
    params: Sequence[RunConfig], problem: OptimizationProblem
) -> OptimizationResult:
    """Audit fixed parameter rows: no search, just q_r and the achieved error."""
    if not params:
        raise DomainError("need at least one run")
    if len(params) > run_budget(problem.pp.N, "R", "MultiParty"):
        raise DomainError(f"at most {run_budget(problem.pp.N, 'R', 'MultiParty')} runs")
    pairs = []
    thresholds = []
    for run_index, rc in enumerate(params, start=1):
        if rc.n_senders != problem.pp.N:
            raise DomainError("run size disagrees with the protocol")
        if rc.encoding is not problem.encoding:
            raise DomainError("run encoding disagrees with the problem")
        if rc.pairing != run_pairing(run_index, problem.pp.N):
            raise DomainError(
                f"run {run_index} must use pairing {run_pairing(run_index, problem.pp.N)}, "
                f"got {rc.pairing}"
            )
        pairs.append(_run_profiles(problem, run_index, rc.alphas))
        thresholds.append(rc.thresholds)
    p_e = error_probability(pairs, thresholds)
    q_r = q_total(params, problem.pp.n)
    return OptimizationResult(
        tuple(params), q_r, p_e, p_e <= problem.pp.epsilon, {"mode": "evaluate_fixed"}
    )
