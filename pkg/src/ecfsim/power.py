"""Transmit power control for parallel and successive computation.

Parallel computation minimizes the worst effective noise over the selected
APs through a two-scalar scan: ``r`` bounds every a^H P a and ``s`` lower
bounds every MMSE-signal term, and each (r, s) pair is a feasibility
question over the power simplex. The reverse-convex constraint
``(1/2) p^T J p >= s (v^T p + 1)`` is handled by iterated supporting-line
linearization (an inner approximation, so any point it accepts is truly
feasible) solved as a small LP.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .rates import effective_noise_parallel

logger = logging.getLogger(__name__)

N_STARTS = 16
N_ITER = 50
SNAP_FRACTION = 1e-12
CHECK_TOL = 1e-8


@dataclass(frozen=True)
class PowerAllocation:
    p: np.ndarray
    total: float

    def __post_init__(self):
        p = np.asarray(self.p, float)
        if np.any(p < 0) or not np.isclose(p.sum(), self.total, rtol=1e-9, atol=0):
            raise ValueError("powers must be nonnegative and sum to the budget")

    @classmethod
    def equal(cls, n: int, total: float) -> "PowerAllocation":
        return cls(np.full(n, total / n), total)


@dataclass
class FeasibilityOutcome:
    status: str  # "feasible" | "infeasible" | "unknown"
    witness: PowerAllocation | None = None
    lp_solves: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


@dataclass
class ParallelResult:
    allocation: PowerAllocation
    t: float  # max_m sigma^2_para under ``allocation``
    t_scan: float  # best r - s reached by the two-scalar scan
    r_opt: float = np.nan
    s_opt: float = np.nan
    feasibility_checks: int = 0
    fallback: bool = False
    candidates: list = field(default_factory=list, repr=False)

    def __iter__(self):
        # allows ``alloc, t = optimize_parallel(...)``
        return iter((self.allocation, self.t))


def snap(p, total: float) -> np.ndarray:
    """Zero out negligible powers and renormalize onto the budget."""
    p = np.clip(np.asarray(p, float), 0.0, None)
    p = np.where(p < SNAP_FRACTION * total, 0.0, p)
    if p.sum() <= 0:
        return np.full(len(p), total / len(p))
    return p * (total / p.sum())


def lsf_channel(beta_normalized_rows) -> np.ndarray:
    """Deterministic channel magnitudes sqrt(beta / sigma^2) standing in for g."""
    return np.sqrt(np.asarray(beta_normalized_rows, float))


def _prep(a_rows, g_rows):
    a = np.abs(np.atleast_2d(a_rows))
    g = np.abs(np.atleast_2d(g_rows))
    return a**2, a * g, g**2  # W (for a^H P a), C (J = 2 c c^T), V


def r_bounds(a_rows, p_total: float):
    """Extremes of max_m a_m^H P a_m over the simplex (linear, so vertex values)."""
    w = np.abs(np.atleast_2d(a_rows)) ** 2
    w = w[np.any(w > 0, axis=1)]
    if w.size == 0:
        raise ValueError("need at least one nonzero coefficient row")
    r_max = p_total * float(w.max())
    r_min = p_total * float(w.min(axis=1).max())
    return r_min, r_max


def j_matrix(a, g) -> np.ndarray:
    """J(l1, l2) = 2 |a_l1||g_l1||a_l2||g_l2|."""
    c = np.abs(a) * np.abs(g)
    return 2.0 * np.outer(c, c)


def check_constraints(p, r, s, a_rows, g_rows, p_total, tol: float = CHECK_TOL) -> bool:
    """Re-check of the (r, s) feasibility system written directly with J and v.

    ``tol`` is relative to the magnitude of the terms compared.
    """
    p = np.asarray(p, float)
    if np.any(p < -tol * p_total) or abs(p.sum() - p_total) > tol * p_total:
        return False
    for a, g in zip(np.atleast_2d(a_rows), np.atleast_2d(g_rows)):
        power_term = float(np.sum(np.abs(a) ** 2 * p))
        if power_term - r > tol * max(abs(r), power_term, 1.0):
            return False
        J = j_matrix(a, g)
        v = np.abs(g) ** 2
        quad = 0.5 * p @ J @ p
        rhs = s * (v @ p) + s
        if rhs - quad > tol * max(quad, rhs, 1.0):
            return False
    return True


def _signal_terms(p, C, V):
    cp = C @ p
    return cp**2, V @ p + 1.0


def _linearized_lp(x_k, r, s, W, C, V, pt):
    """Maximize the relative margin tau of the linearized signal constraints.

    Variables are x = p / pt on the unit simplex plus tau. Returns (x, tau)
    or None when the linear power constraints alone are infeasible.
    """
    M, L = C.shape
    p_k = pt * x_k
    cpk = C @ p_k
    # (c.p)^2 >= 2 (c.p_k)(c.p) - (c.p_k)^2, so the row reads
    # pt (2 (c.p_k) c - s v) . x - ((c.p_k)^2 + s) >= tau * norm
    lin = pt * (2.0 * cpk[:, None] * C - s * V)
    const = cpk**2 + s
    norm = np.maximum(np.max(np.abs(lin), axis=1), np.abs(const))
    norm = np.where(norm > 0, norm, 1.0)
    A_sig = np.hstack([-lin / norm[:, None], np.ones((M, 1))])
    b_sig = -const / norm
    wnorm = np.maximum(W.max(axis=1), 1e-300)
    A_pow = np.hstack([W / wnorm[:, None], np.zeros((M, 1))])
    b_pow = (r / pt) / wnorm
    res = linprog(
        np.r_[np.zeros(L), -1.0],
        A_ub=np.vstack([A_pow, A_sig]),
        b_ub=np.r_[b_pow, b_sig],
        A_eq=np.r_[np.ones(L), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * L + [(None, 1.0)],
        method="highs",
    )
    if res.status == 2:
        return None
    if res.status != 0:
        return x_k, -np.inf
    x = np.clip(res.x[:L], 0.0, None)
    return x / x.sum(), float(res.x[L])


def feasibility_point(r, s, a_rows, g_rows, p_total, n_starts: int = N_STARTS,
                      n_iter: int = N_ITER, seed: int = 0) -> FeasibilityOutcome:
    """Search the simplex for p meeting every (r, s) constraint.

    "infeasible" is only reported when the linear power constraints are
    already empty; otherwise an exhausted budget gives "unknown".
    """
    W, C, V = _prep(a_rows, g_rows)
    L = C.shape[1]
    rng = np.random.default_rng(seed)
    starts = [np.full(L, 1.0 / L)] + list(rng.dirichlet(np.ones(L), size=max(n_starts - 1, 0)))
    solves = 0
    for x in starts:
        prev = -np.inf
        for _ in range(n_iter):
            out = _linearized_lp(x, r, s, W, C, V, p_total)
            solves += 1
            if out is None:
                return FeasibilityOutcome("infeasible", None, solves)
            x, tau = out
            p = snap(p_total * x, p_total)
            if tau >= 0 and check_constraints(p, r, s, a_rows, g_rows, p_total):
                return FeasibilityOutcome("feasible", PowerAllocation(p, p_total), solves)
            if tau <= prev + 1e-10:
                break
            prev = tau
    return FeasibilityOutcome("unknown", None, solves)


def _best_signal_point(r, W, C, V, pt, x0, n_iter: int = N_ITER):
    """Approximately maximize min_m (c_m.p)^2 / (v_m.p + 1) under a^H P a <= r.

    Dinkelbach-style ascent: fix s at the current objective, maximize the
    linearized margin, repeat. Returns (x, s) or None if r is infeasible.
    """
    x = x0
    num, den = _signal_terms(pt * x, C, V)
    s = float(np.min(num / den)) if np.all(W @ x <= r / pt * (1 + 1e-12)) else 0.0
    best = None
    for _ in range(n_iter):
        out = _linearized_lp(x, r, s, W, C, V, pt)
        if out is None:
            return None
        x_new, tau = out
        num, den = _signal_terms(pt * x_new, C, V)
        s_new = float(np.min(num / den))
        if best is None or s_new > best[1]:
            best = (x_new, s_new)
        if s_new <= s * (1 + 1e-9) or tau <= 1e-12:
            break
        x, s = x_new, s_new
    return best


def max_noise(p, a_rows, g_rows) -> float:
    return max(effective_noise_parallel(p, g, a) for g, a in zip(g_rows, a_rows))


def optimize_parallel(a_rows, g_rows, p_total, r_step=None, s_step=None,
                      noise_rows=None, n_r: int = 40) -> ParallelResult:
    """Two-scalar (r, s) scan for min-max effective noise.

    r walks down from r_max in ``r_step`` decrements; for every r, s walks
    down from r - s_step in ``s_step`` decrements and each (r, s) is tested
    for feasibility. The witness for a given r is the point maximizing the
    worst signal term, so an (r, s) pair is feasible exactly when s is at
    most that maximum; smaller s reuse the same witness.

    ``g_rows`` drive the optimization (instantaneous or large-scale
    channels); ``noise_rows`` (defaults to ``g_rows``) are used to score the
    witnesses by their actual worst effective noise. The returned
    allocation is the best-scoring witness, with equal power as the
    baseline candidate.
    """
    a_rows = np.atleast_2d(a_rows)
    g_rows = np.atleast_2d(g_rows)
    noise_rows = g_rows if noise_rows is None else np.atleast_2d(noise_rows)
    L = a_rows.shape[1]
    W, C, V = _prep(a_rows, g_rows)
    r_min, r_max = r_bounds(a_rows, p_total)
    if r_step is None:
        r_step = (r_max - r_min) / n_r
    if r_step <= 0:
        r_step = r_max / n_r
    if s_step is None:
        s_step = r_step / 4.0
    if s_step <= 0:
        raise ValueError("steps must be positive")

    equal = PowerAllocation.equal(L, p_total)
    best_alloc, best_t = equal, max_noise(equal.p, a_rows, noise_rows)
    t_scan, r_opt, s_opt = np.inf, np.nan, np.nan
    checks = 0
    candidates = [(np.nan, best_t, equal)]

    x_warm = np.full(L, 1.0 / L)
    k = 0
    while True:
        r = r_max - k * r_step
        if k > 0 and r <= r_min:
            break
        k += 1
        found = _best_signal_point(r, W, C, V, p_total, x_warm)
        if found is None:
            break  # the linear constraints only tighten as r decreases
        x_r, s_r = found
        x_warm = x_r
        p_r = snap(p_total * x_r, p_total)
        num, den = _signal_terms(p_r, C, V)
        s_cap = float(np.min(num / den))
        j = 1
        while r - j * s_step >= 0:
            s = r - j * s_step
            checks += 1
            if s <= s_cap:
                if r - s < t_scan:
                    t_scan, r_opt, s_opt = r - s, r, s
                break  # remaining s values are feasible with the same witness
            j += 1
        else:
            continue
        alloc = PowerAllocation(p_r, p_total)
        t_r = max_noise(p_r, a_rows, noise_rows)
        candidates.append((r, t_r, alloc))
        if t_r < best_t:
            best_alloc, best_t = alloc, t_r

    fallback = not np.isfinite(t_scan)
    if fallback:
        logger.warning("no feasible (r, s) pair found; using equal power")
    return ParallelResult(best_alloc, best_t, t_scan, r_opt, s_opt, checks, fallback, candidates)


# --- single-combination minimization ------------------------------------------

def _project_simplex(y, total=1.0):
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, len(y) + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(y - theta, 0.0)


def _noise_and_grad(p, a, g):
    pa_abs2 = np.abs(a) ** 2
    ag = np.conj(a) * g  # d(a^H P g)/dp_l
    u = np.sum(ag * p)
    D = 1.0 + np.sum(np.abs(g) ** 2 * p)
    val = np.sum(pa_abs2 * p) - abs(u) ** 2 / D
    grad = pa_abs2 - (2.0 * np.real(np.conj(u) * ag) * D - abs(u) ** 2 * np.abs(g) ** 2) / D**2
    return float(val), grad


def optimize_single_combination(a, g, p_total, n_starts: int = N_STARTS, n_iter: int = 200,
                                 seed: int = 0):
    """Local minimization of one combination's parallel effective noise over
    the power simplex by projected gradient descent from several starts."""
    a = np.asarray(getattr(a, "value", a), complex)
    g = np.asarray(g, complex)
    L = len(a)
    if not np.any(a):
        raise ValueError("coefficient vector must be nonzero")
    rng = np.random.default_rng(seed)
    starts = [np.full(L, 1.0 / L)] + list(rng.dirichlet(np.ones(L), size=max(n_starts - 1, 0)))
    best_x, best_v = None, np.inf
    for x in starts:
        v, grad = _noise_and_grad(p_total * x, a, g)
        step = 1.0 / max(np.max(np.abs(grad * p_total)), 1e-300)
        for _ in range(n_iter):
            gx = grad * p_total
            while True:
                x_new = _project_simplex(x - step * gx)
                v_new, grad_new = _noise_and_grad(p_total * x_new, a, g)
                if v_new <= v - 1e-4 * gx @ (x - x_new) or step < 1e-16:
                    break
                step *= 0.5
            if v - v_new <= 1e-14 * max(abs(v), 1e-300):
                x, v = (x_new, v_new) if v_new < v else (x, v)
                break
            x, v, grad = x_new, v_new, grad_new
            step *= 2.0
        if v < best_v:
            best_x, best_v = x, v
    p = snap(p_total * best_x, p_total)
    return PowerAllocation(p, p_total), effective_noise_parallel(p, g, a)
