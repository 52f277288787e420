import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cn
from ecfsim.apselect import numerical_rank
from ecfsim.power import PowerAllocation
from ecfsim.rates import effective_noise_parallel, effective_noise_successive, log2_plus
from ecfsim.successive import (Assignment, OrderingError, assign_ues, hungarian_assign,
                               order_combinations, recompute_step_noises, step_rate_matrix, succ_rates)


def brute_assignment_value(C):
    n = C.shape[0]
    return max(sum(C[perm[m], m] for m in range(n)) for perm in itertools.permutations(range(n)))


def value(C, a: Assignment):
    return sum(C[l, m] for m, l in enumerate(a.ue_of_step) if l >= 0)


def test_hungarian_examples():
    a = hungarian_assign([[10, 1], [1, 10]])
    assert a.ue_of_step.tolist() == [0, 1]
    eye = np.eye(4) * 5 + 1
    assert hungarian_assign(eye).ue_of_step.tolist() == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        hungarian_assign(np.ones((2, 3)))


@given(st.integers(0, 2**31), st.floats(-5, 5))
def test_hungarian_row_shift_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    C = rng.uniform(0, 10, (5, 5))
    base = hungarian_assign(C)
    D = C.copy()
    D[rng.integers(5)] += shift
    assert value(C, hungarian_assign(D)) == pytest.approx(value(C, base))


def test_hungarian_brute_force_6x6(rng):
    for _ in range(20):
        C = rng.uniform(0, 20, (6, 6))
        assert value(C, hungarian_assign(C)) == pytest.approx(brute_assignment_value(C), abs=1e-9)


def make_rows(rng, L=4, extra=2):
    a = np.vstack([np.eye(L), rng.integers(-1, 2, (extra, L))]).astype(complex)
    idx = rng.permutation(len(a))[:L]
    while numerical_rank(a[idx]) < L:
        idx = rng.permutation(len(a))[:L]
    return a[idx]


def test_trivial_single_row():
    plan = order_combinations([[1]], [[2.0]], 0.5)
    assert plan.order.tolist() == [0]
    assert plan.step_noises[0] == pytest.approx(effective_noise_parallel([0.5], [2.0], [1]))
    for strat in ("received_power", "channel_norm", "hungarian"):
        asg = assign_ues(plan, strat)
        assert asg.ue_of_step.tolist() == [0]
        rep = succ_rates(plan, asg)
        assert rep.per_ue_rates[0] == pytest.approx(np.log2(1 + 0.5 * 4))
        assert succ_rates(plan, asg, mode="conservative").per_ue_rates[0] == rep.per_ue_rates[0]


def test_rank_gate_skips_scaled_copy():
    # r2 = 2 r1 is dependent on r1; r3 independent. r2 alone is rank 1, so give
    # the planner the three rows and check it never places r2 after r1.
    a = np.array([[1, 0], [2, 0], [0, 1]], complex)
    g = np.array([[5.0, 0.1], [5.0, 0.1], [0.2, 3.0]])
    p = PowerAllocation.equal(2, 1.0)
    with pytest.raises(OrderingError):
        order_combinations(a, g, 1.0, power=p)
    plan = order_combinations(a[[0, 2]], g[[0, 2]], 1.0, power=p)
    assert sorted(plan.order.tolist()) == [0, 1]
    # with the copy among candidates, a 2-step plan over rows {0, 1, 2} must use row 2
    rows = a[[0, 1, 2]]
    gated = []
    for first in (0, 1):
        for nxt in (0, 1, 2):
            if nxt != first and numerical_rank(rows[[first, nxt]]) == 2:
                gated.append(nxt)
    assert set(gated) == {2}


def test_plan_self_consistent_and_greedy(rng):
    for _ in range(15):
        L = 4
        a = make_rows(rng, L)
        g = cn(rng, L, L) * 6
        p = PowerAllocation(rng.dirichlet(np.ones(L)) * 0.2, 0.2)
        plan = order_combinations(a, g, 0.2, power=p)
        assert np.allclose(recompute_step_noises(plan), plan.step_noises, rtol=1e-12, atol=0)
        for m in range(plan.n_steps):
            prev = plan.side_info(m)
            assert numerical_rank(a[plan.order[:m + 1]]) == m + 1
            cands = []
            for r in range(L):
                if r in plan.order[:m] or numerical_rank(np.vstack([prev, a[r]])) != m + 1:
                    continue
                v = (effective_noise_parallel(p.p, g[r], a[r]) if m == 0
                     else effective_noise_successive(p.p, g[r], a[r], prev))
                cands.append(v)
            assert plan.step_noises[m] <= min(cands) * (1 + 1e-12)
            par = effective_noise_parallel(p.p, g[plan.order[m]], plan.step_row(m))
            assert plan.step_noises[m] <= par * (1 + 1e-9) + 1e-15


def test_literal_power_mode_freezes_best_row(rng):
    a = make_rows(rng, 3)
    g = cn(rng, 3, 3) * 4
    plan = order_combinations(a, g, 0.3)
    assert plan.power.p.sum() == pytest.approx(0.3)
    assert plan.step_noises[0] == pytest.approx(
        effective_noise_parallel(plan.power.p, g[plan.order[0]], plan.step_row(0)), rel=1e-12)


def test_zero_power_rows_are_not_decoded():
    a = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 0]], complex)
    g = np.full((3, 3), 2.0)
    p = PowerAllocation(np.array([0.5, 0.5, 0.0]), 1.0)
    plan = order_combinations(a, g, 1.0, power=p)
    assert plan.n_steps == 2 and np.all(plan.step_noises > 0)


def test_strategies_eligibility_and_ranking(rng):
    for _ in range(20):
        L = 4
        a = make_rows(rng, L)
        g = cn(rng, L, L) * 6
        p = PowerAllocation(np.full(L, 0.05), 0.2)
        plan = order_combinations(a, g, 0.2, power=p)
        C = step_rate_matrix(plan)
        vals = {}
        for strat in ("received_power", "channel_norm", "hungarian"):
            asg = assign_ues(plan, strat)
            used = asg.ue_of_step[asg.ue_of_step >= 0]
            assert len(set(used.tolist())) == len(used)
            for m, l in enumerate(asg.ue_of_step):
                if l >= 0:
                    assert plan.step_row(m)[l] != 0
            rep = succ_rates(plan, asg)
            assert rep.sum_rate == pytest.approx(value(C, asg))
            vals[strat] = rep.sum_rate
            cons = succ_rates(plan, asg, mode="conservative")
            assert np.all(cons.per_ue_rates <= rep.per_ue_rates + 1e-12)
            assert rep.fronthaul_symbols_per_use == 4 * plan.n_steps
        assert vals["hungarian"] >= vals["received_power"] - 1e-9
        assert vals["hungarian"] >= vals["channel_norm"] - 1e-9


def test_literal_rates_recomputed_independently(rng):
    L = 3
    a = make_rows(rng, L)
    g = cn(rng, L, L) * 5
    p = PowerAllocation(rng.dirichlet(np.ones(L)), 1.0)
    plan = order_combinations(a, g, 1.0, power=p)
    asg = assign_ues(plan, "hungarian")
    rep = succ_rates(plan, asg)
    want = np.zeros(L)
    for m, l in enumerate(asg.ue_of_step):
        r = plan.order[m]
        prev = a[plan.order[:m]]
        s2 = effective_noise_successive(p.p, g[r], a[r], prev if m else None)
        want[l] = max(np.log2(p.p[l] / s2), 0)
    assert np.allclose(rep.per_ue_rates, want)


def test_received_power_picks_strongest():
    a = np.array([[1, 1], [0, 1]], complex)
    g = np.array([[1.0, 3.0], [0.5, 2.0]])
    p = PowerAllocation(np.array([0.5, 0.5]), 1.0)
    plan = order_combinations(a, g, 1.0, power=p)
    asg = assign_ues(plan, "received_power")
    first = plan.order[0]
    if first == 0:
        assert asg.ue_of_step.tolist() == [1, -1]
    else:
        assert asg.ue_of_step.tolist() == [1, 0]
