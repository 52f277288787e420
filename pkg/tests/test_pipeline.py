import numpy as np
import pytest

from conftest import cn
from ecfsim.experiment import Scenario, trial_channel
from ecfsim.pipeline import (parallel_pipeline, parallel_state, select_combinations, successive_pipeline,
                             successive_plan)
from ecfsim.rates import effective_noise_parallel


@pytest.fixture(scope="module")
def channel():
    ch = trial_channel(Scenario(m_aps=[30], trials=1, seed=3), 30, 0)
    return ch.g, ch.beta_normalized


def test_selection_full_rank(channel):
    g, bn = channel
    for aps in (False, True):
        sel = select_combinations(g, bn, 0.2, aps)
        assert np.linalg.matrix_rank(sel.a_rows) == len(sel.selected)


def test_para_not_below_cf(channel):
    g, bn = channel
    cache = {}
    cf = parallel_pipeline(g, bn, 0.2, optimize=False, cache=cache)
    para = parallel_pipeline(g, bn, 0.2, cache=cache)
    assert para.sum_rate >= cf.sum_rate - 1e-9


def test_cache_consistent_with_fresh_run(channel):
    g, bn = channel
    cache = {}
    a = successive_pipeline(g, bn, 0.2, "hungarian", cache=cache)
    b = successive_pipeline(g, bn, 0.2, "hungarian")
    assert np.array_equal(a.per_ue_rates, b.per_ue_rates)


def test_succ_step_one_below_para_max_noise(channel):
    g, bn = channel
    cache = {}
    st = parallel_state(g, bn, 0.2, cache=cache)
    plan, sel, _ = successive_plan(g, bn, 0.2, cache=cache)
    para_max = max(effective_noise_parallel(plan.power.p, g[m], sel.a_all[m]) for m in sel.selected)
    assert plan.step_noises[0] <= para_max * (1 + 1e-12)
    assert np.array_equal(plan.power.p, st.allocation.p)


def test_lsf_variants_run(channel):
    g, bn = channel
    for strat in ("received_power", "channel_norm", "hungarian"):
        rep = successive_pipeline(g, bn, 0.2, strat, aps=True, lsf=True)
        assert np.all(rep.per_ue_rates >= 0) and np.isfinite(rep.sum_rate)
    assert parallel_pipeline(g, bn, 0.2, lsf=True).sum_rate >= 0


def test_power_sources(channel):
    g, bn = channel
    for src in ("parallel", "single", "equal"):
        rep = successive_pipeline(g, bn, 0.2, power_source=src)
        assert rep.sum_rate >= 0
    with pytest.raises(ValueError):
        successive_pipeline(g, bn, 0.2, power_source="bogus")


def test_interference_free_bound(channel):
    g, bn = channel
    bound = np.log2(1 + 0.2 * np.max(np.abs(g) ** 2, axis=0))
    rep = successive_pipeline(g, bn, 0.2, "hungarian")
    assert np.all(rep.per_ue_rates <= bound + 1e-9)
