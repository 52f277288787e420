"""AP ranking and greedy full-rank selection, plus UE-centric capping."""
from __future__ import annotations

import numpy as np

from .rates import effective_noise_parallel

RANK_RTOL = 1e-9


class RankDeficiencyError(ValueError):
    def __init__(self, achieved: int, target: int):
        super().__init__(f"selection reached rank {achieved}, target {target}")
        self.achieved = achieved
        self.target = target


def numerical_rank(rows, rtol: float = RANK_RTOL) -> int:
    rows = np.atleast_2d(np.asarray(rows, complex))
    if rows.size == 0:
        return 0
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def lsf_scores(beta_rows, a_rows) -> np.ndarray:
    """Sum of the entries of J built from beta: 2 * (sum_l |a_ml| beta_ml)^2."""
    s = np.sum(np.abs(np.atleast_2d(a_rows)) * np.atleast_2d(beta_rows), axis=1)
    return 2.0 * s**2


def rate_scores(p_diag, g_rows, a_rows) -> np.ndarray:
    """Instantaneous computation rate of each AP's combination (unclamped log).

    This is the power-dependent ranking used when the large-scale-fading
    score is not requested.
    """
    p = np.asarray(p_diag, float)
    scores = np.full(len(a_rows), -np.inf)
    for m, (g, a) in enumerate(zip(g_rows, a_rows)):
        used = (a != 0) & (p > 0)
        if not np.any(used):
            continue
        noise = max(effective_noise_parallel(p, g, a), 1e-300)
        scores[m] = np.log2(p[used].min() / noise)
    return scores


def greedy_select(a_rows, scores, target: int) -> list[int]:
    """Walk APs by descending score (lower index first on ties); keep an AP
    only if it raises the rank of the accumulated coefficient matrix."""
    a_rows = np.atleast_2d(a_rows)
    order = np.argsort(-np.asarray(scores, float), kind="stable")
    chosen: list[int] = []
    rank = 0
    for m in order:
        if rank == target:
            break
        if not np.any(a_rows[m]):
            continue
        trial = a_rows[chosen + [int(m)]]
        if numerical_rank(trial) > rank:
            chosen.append(int(m))
            rank += 1
    if rank < target:
        raise RankDeficiencyError(rank, target)
    return chosen


def ue_centric_cap(beta, max_ues_per_ap: int) -> np.ndarray:
    """Boolean (M, L) mask keeping each AP's ``max_ues_per_ap`` strongest UEs."""
    if max_ues_per_ap < 1:
        raise ValueError("max_ues_per_ap must be >= 1")
    beta = np.atleast_2d(beta)
    k = min(max_ues_per_ap, beta.shape[1])
    order = np.argsort(-beta, axis=1, kind="stable")[:, :k]
    mask = np.zeros(beta.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=1)
    return mask


def orphaned_ues(mask) -> np.ndarray:
    return np.flatnonzero(~np.any(mask, axis=0))
