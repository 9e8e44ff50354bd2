"""Amplitude search under the error budget, and fixed-row audits."""

import math

import pytest

from qfnet.core import (
    ChannelModel,
    DomainError,
    Encoding,
    ProtocolParams,
    RunConfig,
    run_pairing,
)
from qfnet.complexity import q_total
from qfnet.optimizer import OptimizationProblem, evaluate_fixed, optimize


def small_sym4(epsilon=1e-6):
    pp = ProtocolParams(n=10_000, c=0.2, delta=0.22, epsilon=epsilon, N=4)
    ch = ChannelModel(eta=(0.3, 0.3, 0.3, 0.3), dark_count=1e-7)
    return OptimizationProblem(pp=pp, ch=ch)


def small_asym2(epsilon=1e-6, **kw):
    pp = ProtocolParams(n=10_000, c=0.2, delta=0.22, epsilon=epsilon, N=2)
    ch = ChannelModel.from_sqrt_eta((0.3, 0.4), dark_count=1e-8)
    return OptimizationProblem(pp=pp, ch=ch, **kw)


# --- problem validation ------------------------------------------------------


def test_problem_defaults_to_full_run_budget():
    assert small_sym4().runs == 3
    assert small_asym2().runs == 1
    assert small_asym2(runs=1).runs == 1


def test_problem_validation():
    pp4 = ProtocolParams(n=1000, c=2.0, delta=0.22, epsilon=1e-3, N=4)
    ch4 = ChannelModel(eta=(0.5,) * 4)
    with pytest.raises(DomainError):
        OptimizationProblem(pp=pp4, ch=ch4, runs=4)
    with pytest.raises(DomainError):
        OptimizationProblem(pp=pp4, ch=ch4, runs=0)
    with pytest.raises(DomainError):
        OptimizationProblem(pp=pp4, ch=ch4, encoding=Encoding.TWO_BIT)
    with pytest.raises(DomainError):
        OptimizationProblem(pp=pp4, ch=ch4, bounds=(2.0, 1.0))
    with pytest.raises(DomainError):
        OptimizationProblem(pp=pp4, ch=ch4, bounds=(0.0, 8.0))
    with pytest.raises(DomainError):
        OptimizationProblem(pp=pp4, ch=ch4, grid=0.9)
    with pytest.raises(DomainError):
        OptimizationProblem(pp=pp4, ch=ChannelModel(eta=(0.5, 0.5)))


# --- fixed-row audits --------------------------------------------------------


def test_evaluate_fixed_audit_identity():
    problem = small_asym2()
    rc = RunConfig(alphas=(85.0, 78.0), pairing=(1, 2), thresholds=(100,))
    res = evaluate_fixed([rc], problem)
    assert res.q_r == q_total([rc], problem.pp.n)
    assert res.q_r == pytest.approx(
        (85.0**2 + 78.0**2) * math.log2(problem.pp.n), rel=1e-12
    )
    assert res.feasible == (res.p_e <= problem.pp.epsilon)
    assert res.trace["mode"] == "evaluate_fixed"


def test_evaluate_fixed_silent_channel_never_errs_at_zero_threshold():
    problem = small_asym2()
    problem = OptimizationProblem(
        pp=problem.pp,
        ch=ChannelModel.from_sqrt_eta((0.3, 0.4), dark_count=0.0),
    )
    rc = RunConfig(alphas=(0.0, 0.0), pairing=(1, 2), thresholds=(0,))
    res = evaluate_fixed([rc], problem)
    assert res.q_r == 0.0
    assert res.p_e == 0.0
    assert res.feasible


def test_evaluate_fixed_validation():
    problem = small_sym4()
    good = RunConfig(alphas=(5.0,) * 4, pairing=run_pairing(1), thresholds=(1, 1, 1))
    bad_pairing = RunConfig(
        alphas=(5.0,) * 4, pairing=run_pairing(2), thresholds=(1, 1, 1)
    )
    with pytest.raises(DomainError):
        evaluate_fixed([], problem)
    with pytest.raises(DomainError):
        evaluate_fixed([bad_pairing], problem)  # run 1 must use pairing 1
    with pytest.raises(DomainError):
        evaluate_fixed([good] * 4, problem)  # over the run budget
    two_bit = RunConfig(
        alphas=(5.0, 5.0), pairing=(1, 2), thresholds=(1,), encoding=Encoding.TWO_BIT
    )
    with pytest.raises(DomainError):
        evaluate_fixed([two_bit], small_asym2())  # problem says single-bit


# --- search ------------------------------------------------------------------


def test_optimize_small_symmetric_four_party():
    problem = small_sym4()
    res = optimize(problem)
    assert res.feasible
    assert res.p_e <= problem.pp.epsilon
    assert len(res.per_run) == 3
    # symmetric channel: one search, replicated to the other pairings
    first = res.per_run[0]
    for i, rc in enumerate(res.per_run, start=1):
        assert rc.alphas == first.alphas
        assert rc.thresholds == first.thresholds
        assert rc.pairing == run_pairing(i)
    assert len(set(first.alphas)) == 1
    # the reported numbers are the strict-tail audit of the returned rows
    audit = evaluate_fixed(res.per_run, problem)
    assert res.p_e == audit.p_e
    assert res.q_r == audit.q_r


def test_optimize_two_party_asymmetric_channel():
    problem = small_asym2()
    res = optimize(problem)
    assert res.feasible
    assert res.p_e <= problem.pp.epsilon
    assert len(res.per_run) == 1
    a1, a2 = res.per_run[0].alphas
    assert a1 > 0 and a2 > 0
    assert res.trace["evaluations"] > 0


def test_optimize_is_deterministic():
    problem = small_asym2()
    first = optimize(problem)
    second = optimize(problem)
    assert first.per_run == second.per_run
    assert first.p_e == second.p_e
    assert first.q_r == second.q_r


def test_optimize_relaxing_epsilon_cannot_cost_more():
    tight = optimize(small_sym4(epsilon=1e-8))
    loose = optimize(small_sym4(epsilon=1e-3))
    assert tight.feasible and loose.feasible
    assert loose.q_r <= tight.q_r * (1 + 1e-9)


def test_optimize_reports_infeasible_bounds():
    problem = small_asym2(bounds=(1.0, 2.0))
    res = optimize(problem)
    assert not res.feasible
    assert res.p_e > problem.pp.epsilon
    assert all(a <= 2.0 for rc in res.per_run for a in rc.alphas)


def test_optimize_single_run_budget():
    problem = OptimizationProblem(
        pp=ProtocolParams(n=10_000, c=0.2, delta=0.22, epsilon=1e-6, N=4),
        ch=ChannelModel(eta=(0.3,) * 4, dark_count=1e-7),
        runs=1,
    )
    res = optimize(problem)
    assert res.feasible
    assert len(res.per_run) == 1
    full = optimize(small_sym4())
    assert res.q_r == pytest.approx(full.q_r / 3, rel=1e-9)


def test_optimize_result_serializes():
    res = optimize(small_asym2())
    doc = res.to_jsonable()
    assert doc["feasible"] is True
    assert doc["per_run"][0]["pairing"] == [1, 2]
    assert doc["per_run"][0]["encoding"] == "single-bit"
    assert isinstance(doc["per_run"][0]["thresholds"][0], int)
