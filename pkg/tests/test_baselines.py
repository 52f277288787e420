import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cn
from ecfsim.baselines import capped_rate, cf_equal_power, mrc_sinr, mrc_sum_rate
from ecfsim.pipeline import parallel_pipeline, parallel_state
from ecfsim.power import PowerAllocation


def test_mrc_single_ue():
    g = np.array([[1 + 1j], [2.0]])
    rep = mrc_sum_rate(g, PowerAllocation.equal(1, 0.2))
    assert rep.sum_rate == pytest.approx(np.log2(1 + 0.2 * 6))
    assert rep.fronthaul_symbols_per_use == 4


def test_mrc_orthogonal_columns():
    g = np.array([[1.0, 0.0], [0.0, 2.0]], complex)
    rep = mrc_sum_rate(g, [0.5, 0.5])
    assert np.allclose(rep.per_ue_rates, np.log2(1 + 0.5 * np.array([1.0, 4.0])))


def test_mrc_against_direct_combining(rng):
    """Average the combiner output statistics directly: signal, interference and noise powers."""
    for _ in range(20):
        M, L = 6, 3
        g = cn(rng, M, L) * 3
        p = rng.dirichlet(np.ones(L))
        for l in range(L):
            w = g[:, l].conj()  # combining weights
            sig = p[l] * abs(w @ g[:, l]) ** 2
            interf = sum(p[k] * abs(w @ g[:, k]) ** 2 for k in range(L) if k != l)
            noise = np.sum(np.abs(w) ** 2)
            assert mrc_sinr(g, p)[l] == pytest.approx(sig / (interf + noise), rel=1e-6)


@given(st.integers(0, 2**31), st.floats(0, 6.28))
def test_mrc_phase_invariance(seed, phi):
    rng = np.random.default_rng(seed)
    g = cn(rng, 5, 3)
    h = g.copy()
    h[:, 1] *= np.exp(1j * phi)
    p = np.full(3, 0.1)
    assert np.allclose(mrc_sum_rate(g, p).per_ue_rates, mrc_sum_rate(h, p).per_ue_rates)


def test_capped_rate():
    assert capped_rate(19.57, np.inf) == 19.57
    assert capped_rate(19.57, 0) == 0
    assert capped_rate(19.57, 10) == 10
    assert capped_rate(5.0, 10) == 5.0
    with pytest.raises(ValueError):
        capped_rate(1.0, -1)


def test_cf_is_equal_power_parallel_pipeline(rng):
    g = cn(rng, 12, 4) * 20
    beta = np.abs(g) ** 2
    cf = cf_equal_power(g, beta, 0.2)
    st = parallel_state(g, beta, 0.2, optimize=False)
    assert np.allclose(st.allocation.p, 0.05)
    assert np.array_equal(cf.per_ue_rates, parallel_pipeline(g, beta, 0.2, optimize=False).per_ue_rates)
    assert cf.fronthaul_symbols_per_use == 2 * len(st.selection.selected)


def test_cf_single_ue_capacity():
    g = np.array([[3.0 - 1j]])
    assert cf_equal_power(g, None, 0.2).sum_rate == pytest.approx(np.log2(1 + 0.2 * 10), rel=1e-12)
