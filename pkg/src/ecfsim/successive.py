"""Decoding order, UE-to-step assignment and rates for successive computation.

Combinations are decoded one at a time; every decoded combination becomes
side information that shrinks the effective noise of the later ones. A UE
takes its rate from the step it is assigned to.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .apselect import numerical_rank
from .power import PowerAllocation, optimize_single_combination
from .rates import (RateReport, SideInformationError, effective_noise_parallel,
                    effective_noise_successive, fronthaul_load, log2_plus)

STRATEGIES = ("received_power", "channel_norm", "hungarian")
MODES = ("literal", "conservative")


class OrderingError(RuntimeError):
    pass


@dataclass
class DecodingPlan:
    order: np.ndarray  # step -> row index into a_rows
    a_rows: np.ndarray  # selected coefficient rows (L' x L)
    g_rows: np.ndarray
    power: PowerAllocation
    step_noises: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.order)

    def side_info(self, step: int) -> np.ndarray:
        """Rows decoded before ``step`` (0-based)."""
        return self.a_rows[self.order[:step]]

    def step_row(self, step: int) -> np.ndarray:
        return self.a_rows[self.order[step]]


@dataclass
class Assignment:
    ue_of_step: np.ndarray  # -1 where a step serves nobody

    @property
    def partial(self) -> bool:
        return bool(np.any(self.ue_of_step < 0))


def _succ_noise(p, g, a, prev):
    if len(prev) == 0:
        return effective_noise_parallel(p, g, a)
    try:
        return effective_noise_successive(p, g, a, prev, strict=True)
    except SideInformationError:
        return effective_noise_successive(p, g, a, prev, strict=False)


def order_combinations(a_rows, g_rows, p_total, power: PowerAllocation | None = None,
                       opt_rows=None, seed: int = 0) -> DecodingPlan:
    """Greedy decoding order under a rank gate.

    Without ``power``, every row's own noise is minimized over the simplex
    and the allocation of the best row is frozen for all steps. With
    ``power`` given, that allocation is used directly and step 1 is the row
    of smallest parallel noise. ``opt_rows`` (defaults to ``g_rows``) are the
    channels seen by the per-row minimization.

    The rank gate looks at the coefficients of powered UEs only: a row whose
    powered part is already spanned carries nothing new (its noise would be
    zero), so it is never decoded. The plan can therefore be shorter than
    the number of rows when some UEs get no power.
    """
    a_rows = np.atleast_2d(np.asarray(a_rows, complex))
    g_rows = np.atleast_2d(np.asarray(g_rows, complex))
    opt_rows = g_rows if opt_rows is None else np.atleast_2d(opt_rows)
    n = len(a_rows)
    if numerical_rank(a_rows) < n:
        raise OrderingError(f"coefficient rows have rank {numerical_rank(a_rows)} < {n}")

    if power is None:
        best = None
        for m in range(n):
            alloc, val = optimize_single_combination(a_rows[m], opt_rows[m], p_total, seed=seed)
            if best is None or val < best[1]:
                best = (alloc, val)
        power = best[0]
    p = power.p
    gated = a_rows * (p > 0)
    target = numerical_rank(gated)

    order: list[int] = []
    noises: list[float] = []
    remaining = list(range(n))
    while len(order) < target:
        prev = a_rows[order]
        vals = np.array([_succ_noise(p, g_rows[m], a_rows[m], prev) for m in remaining])
        picked = None
        for i in np.argsort(vals, kind="stable"):
            m = remaining[i]
            if numerical_rank(gated[order + [m]]) == len(order) + 1:
                picked = (m, vals[i])
                break
        if picked is None:
            raise OrderingError(f"no rank-increasing row at step {len(order) + 1}")
        order.append(picked[0])
        noises.append(float(picked[1]))
        remaining.remove(picked[0])
    return DecodingPlan(np.array(order, dtype=int), a_rows, g_rows, power, np.array(noises))


def step_rate_matrix(plan: DecodingPlan) -> np.ndarray:
    """C[l, m]: rate UE l would get at step m, zero where a_{delta(m), l} = 0."""
    p = plan.power.p
    L = plan.a_rows.shape[1]
    C = np.zeros((L, plan.n_steps))
    for m in range(plan.n_steps):
        row = plan.step_row(m)
        with np.errstate(divide="ignore"):
            r = log2_plus(p / max(plan.step_noises[m], 1e-300))
        C[:, m] = np.where((row != 0) & (p > 0), r, 0.0)
    return C


def hungarian_assign(c) -> Assignment:
    """Maximize sum_m C[ue_of_step(m), m]; rows are UEs, columns are steps.

    Solved as a minimum-cost assignment on C_max - C.
    """
    c = np.asarray(c, float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("rate matrix must be square")
    if not np.all(np.isfinite(c)):
        raise ValueError("rate matrix must be finite")
    ues, steps = linear_sum_assignment(c.max() - c)
    out = np.full(c.shape[1], -1)
    out[steps] = ues
    return Assignment(out)


def assign_ues(plan: DecodingPlan, strategy: str, g_or_beta=None) -> Assignment:
    """Map decoding steps to UEs.

    ``g_or_beta`` holds the selected rows' channel magnitudes used by the
    received-power and channel-norm rules (instantaneous gains, or large-scale
    gains in the LSF variants). Defaults to the plan's channels.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    gains = np.abs(plan.g_rows if g_or_beta is None else np.atleast_2d(g_or_beta))
    n = plan.n_steps
    powered = plan.power.p > 0
    eligible = np.zeros((n, len(powered)), dtype=bool)  # steps x UEs
    for m in range(n):
        eligible[m] = (plan.step_row(m) != 0) & powered
    out = np.full(n, -1)
    taken: set[int] = set()

    if strategy == "hungarian":
        C = step_rate_matrix(plan)
        L = C.shape[0]
        size = max(L, n)
        sq = np.zeros((size, size))
        sq[:L, :n] = C
        a = hungarian_assign(sq).ue_of_step[:n]
        for m in range(n):
            if a[m] < L and eligible[m, a[m]]:
                out[m] = a[m]
        return Assignment(out)

    if strategy == "received_power":
        p = plan.power.p
        for m in range(n):
            score = p * gains[plan.order[m]] ** 2
            cand = [l for l in np.argsort(-score, kind="stable") if eligible[m, l] and l not in taken]
            if cand:
                out[m] = cand[0]
                taken.add(int(cand[0]))
        return Assignment(out)

    norms = np.linalg.norm(gains, axis=0)
    by_norm = np.argsort(-norms, kind="stable")
    for m in range(n):
        for l in by_norm:
            if l not in taken and eligible[m, l]:
                out[m] = l
                taken.add(int(l))
                break
    return Assignment(out)


def succ_rates(plan: DecodingPlan, assignment: Assignment, p: PowerAllocation | None = None,
               mode: str = "literal") -> RateReport:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    p = plan.power.p if p is None else p.p
    L = plan.a_rows.shape[1]
    rates = np.zeros(L)
    for m, l in enumerate(assignment.ue_of_step):
        if l < 0 or p[l] <= 0:
            continue
        if mode == "literal":
            noise = plan.step_noises[m]
        else:
            involved = [j for j in range(m + 1) if plan.step_row(j)[l] != 0]
            noise = max(plan.step_noises[j] for j in involved)
        rates[l] = float(log2_plus(p[l] / max(noise, 1e-300)))
    flags = ("partial_assignment",) if assignment.partial else ()
    if plan.n_steps == 0:
        return RateReport(rates, plan.step_noises.copy(), 0, flags + ("empty_plan",))
    return RateReport(rates, plan.step_noises.copy(), fronthaul_load("successive", plan.n_steps), flags)


def recompute_step_noises(plan: DecodingPlan) -> np.ndarray:
    """Independent re-evaluation of every step's noise from the final plan."""
    p = plan.power.p
    return np.array([_succ_noise(p, plan.g_rows[plan.order[m]], plan.step_row(m), plan.side_info(m))
                     for m in range(plan.n_steps)])
