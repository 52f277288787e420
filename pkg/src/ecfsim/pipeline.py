"""End-to-end scheme pipelines on one channel realization.

Every pipeline takes the noise-normalized gains ``g`` (M x L) and the
matching large-scale gains ``beta_norm`` (beta / sigma^2). A ``cache`` dict
shared between calls on the same realization lets schemes reuse the
coefficient matrix, AP selection and power optimization they have in common.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .apselect import greedy_select, lsf_scores, numerical_rank, orphaned_ues, rate_scores
from .coeffs import select_all
from .power import PowerAllocation, ParallelResult, lsf_channel, optimize_parallel
from .rates import RateReport, ue_rates_parallel
from .successive import DecodingPlan, assign_ues, order_combinations, succ_rates

POWER_SOURCES = ("parallel", "single", "equal")


@dataclass
class Selection:
    a_all: np.ndarray  # coefficient rows of every AP
    selected: list
    flags: tuple

    @property
    def a_rows(self) -> np.ndarray:
        return self.a_all[self.selected]


@dataclass
class ParallelState:
    selection: Selection
    allocation: PowerAllocation
    result: ParallelResult | None
    report: RateReport


def _memo(cache, key, fn):
    if cache is None:
        return fn()
    if key not in cache:
        cache[key] = fn()
    return cache[key]


def _inputs(g, beta_norm):
    g = np.atleast_2d(np.asarray(g, complex))
    beta_norm = np.abs(g) ** 2 if beta_norm is None else np.atleast_2d(np.asarray(beta_norm, float))
    return g, beta_norm


def select_combinations(g, beta_norm, p_total, aps: bool, mask=None, cache=None) -> Selection:
    """Equal-power coefficient selection at every AP, then full-rank AP selection.

    ``aps`` ranks APs by the large-scale score; otherwise APs are ranked by
    their instantaneous computation rate.
    """
    g, beta_norm = _inputs(g, beta_norm)
    L = g.shape[1]
    p_eq = np.full(L, p_total / L)
    a_all = _memo(cache, ("coeffs",), lambda: select_all(p_eq, g, mask))

    def build():
        flags = []
        if mask is not None and len(orphaned_ues(mask)):
            flags.append("orphaned_ue")
        target = numerical_rank(a_all)
        if target < L:
            flags.append("rank_deficient")
        scores = lsf_scores(beta_norm, a_all) if aps else rate_scores(p_eq, g, a_all)
        return Selection(a_all, greedy_select(a_all, scores, target), tuple(flags))

    return _memo(cache, ("selection", aps), build)


def best_sum_rate_candidate(result: ParallelResult, g_rows, a_rows) -> PowerAllocation:
    """Among the scan's witnesses (equal power included) keep the one with the
    largest parallel sum rate; the first candidate wins ties."""
    best, best_rate = None, -np.inf
    for _, _, alloc in result.candidates:
        rate = ue_rates_parallel(alloc.p, g_rows, a_rows, fronthaul=False).sum_rate
        if rate > best_rate:
            best, best_rate = alloc, rate
    return best


def parallel_state(g, beta_norm, p_total, aps=False, lsf=False, optimize=True, mask=None,
                   cache=None, **opt_kwargs) -> ParallelState:
    g, beta_norm = _inputs(g, beta_norm)
    sel = select_combinations(g, beta_norm, p_total, aps, mask, cache)
    L = g.shape[1]

    def build():
        idx = sel.selected
        a_rows, g_rows = sel.a_rows, g[idx]
        flags = list(sel.flags)
        result = None
        if optimize:
            opt_rows = lsf_channel(beta_norm[idx]) if lsf else g_rows
            result = optimize_parallel(a_rows, opt_rows, p_total, **opt_kwargs)
            score_a = np.abs(a_rows) if lsf else a_rows
            alloc = best_sum_rate_candidate(result, opt_rows, score_a)
            if result.fallback:
                flags.append("power_fallback")
        else:
            alloc = PowerAllocation.equal(L, p_total)
        report = ue_rates_parallel(alloc.p, g_rows, a_rows)
        report = replace(report, flags=tuple(flags))
        return ParallelState(sel, alloc, result, report)

    key = ("parallel", aps, lsf if optimize else False, optimize)
    return _memo(cache, key, build)


def parallel_pipeline(g, beta_norm, p_total, aps=False, lsf=False, optimize=True, mask=None,
                      cache=None, **opt_kwargs) -> RateReport:
    return parallel_state(g, beta_norm, p_total, aps, lsf, optimize, mask, cache, **opt_kwargs).report


def successive_plan(g, beta_norm, p_total, aps=False, lsf=False, power_source="parallel",
                    mask=None, cache=None, **opt_kwargs) -> tuple[DecodingPlan, Selection, tuple]:
    if power_source not in POWER_SOURCES:
        raise ValueError(f"unknown power source {power_source!r}")
    g, beta_norm = _inputs(g, beta_norm)

    def build():
        L = g.shape[1]
        flags = []
        if power_source == "parallel":
            st = parallel_state(g, beta_norm, p_total, aps, lsf, True, mask, cache, **opt_kwargs)
            sel, power = st.selection, st.allocation
            flags.extend(f for f in st.report.flags if f == "power_fallback")
        else:
            sel = select_combinations(g, beta_norm, p_total, aps, mask, cache)
            power = PowerAllocation.equal(L, p_total) if power_source == "equal" else None
        flags.extend(sel.flags)
        idx = sel.selected
        opt_rows = lsf_channel(beta_norm[idx]) if lsf else g[idx]
        plan = order_combinations(sel.a_rows, g[idx], p_total, power=power, opt_rows=opt_rows)
        return plan, sel, tuple(dict.fromkeys(flags))

    return _memo(cache, ("plan", aps, lsf, power_source), build)


def successive_pipeline(g, beta_norm, p_total, strategy="hungarian", aps=False, lsf=False,
                        mode="literal", power_source="parallel", mask=None, cache=None,
                        **opt_kwargs) -> RateReport:
    g, beta_norm = _inputs(g, beta_norm)
    plan, sel, flags = successive_plan(g, beta_norm, p_total, aps, lsf, power_source, mask,
                                       cache, **opt_kwargs)
    gains = lsf_channel(beta_norm[sel.selected]) if lsf else g[sel.selected]
    assignment = assign_ues(plan, strategy, gains)
    report = succ_rates(plan, assignment, mode=mode)
    return replace(report, flags=tuple(dict.fromkeys(flags + report.flags)))
