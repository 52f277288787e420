"""Reference schemes: equal-power CF, MRC combining, fronthaul-capped rate."""
from __future__ import annotations

import numpy as np

from .pipeline import parallel_pipeline
from .rates import RateReport, fronthaul_load


def cf_equal_power(g, beta, p_total, use_ap_selection: bool = False, mask=None,
                   cache=None) -> RateReport:
    """Compute-and-forward with P_l = Pt / L and no power optimization.

    ``beta`` is the noise-normalized large-scale gain matrix (only used for
    the AP ranking when ``use_ap_selection`` is set).
    """
    return parallel_pipeline(g, beta, p_total, aps=use_ap_selection, optimize=False,
                             mask=mask, cache=cache)


def mrc_sinr(g, p) -> np.ndarray:
    g = np.atleast_2d(np.asarray(g, complex))
    p = np.asarray(getattr(p, "p", p), float)
    gram = g.conj().T @ g  # gram[k, l] = g_k^H g_l
    n2 = np.real(np.diag(gram))
    cross = np.abs(gram) ** 2
    np.fill_diagonal(cross, 0.0)
    interf = p @ cross
    return p * n2**2 / (n2 + interf)


def mrc_sum_rate(g, p) -> RateReport:
    """Conjugate combining over all APs with unit-variance noise."""
    g = np.atleast_2d(np.asarray(g, complex))
    rates = np.log2(1.0 + mrc_sinr(g, p))
    return RateReport(rates, np.zeros(0), fronthaul_load("parallel", g.shape[0]))


def capped_rate(r_sum: float, r0: float) -> float:
    if r0 < 0:
        raise ValueError("fronthaul capacity must be nonnegative")
    return min(r0, r_sum)
