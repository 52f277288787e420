"""Per-AP integer coefficient selection through a real-valued QP relaxation.

The complex channel is split into real and imaginary parts; each part is
solved as a real-valued problem: sort the channel with a signed permutation,
solve the equality-constrained QP in closed form, scale the relaxed solution
by k = 1..K, round, and keep the integer candidate with the smallest
quadratic form.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

K_MAX = 10_000
N_POLISH = 3
_cap_warned = False


@dataclass(frozen=True)
class SignedPermutation:
    """x -> (signs * x)[perm]; the image of the normalized vector is sorted."""

    perm: np.ndarray
    signs: np.ndarray

    def apply(self, x):
        return (self.signs * np.asarray(x))[self.perm]

    def invert(self, y):
        out = np.empty_like(np.asarray(y))
        out[self.perm] = y
        return self.signs * out


@dataclass(frozen=True)
class GaussianIntegerVector:
    re: np.ndarray
    im: np.ndarray

    @property
    def value(self) -> np.ndarray:
        return self.re + 1j * self.im

    def is_zero(self) -> bool:
        return not (np.any(self.re) or np.any(self.im))


def normalize_channel(g_real):
    g = np.asarray(g_real, dtype=float)
    signs = np.where(g < 0, -1, 1)
    perm = np.argsort(np.abs(g), kind="stable")
    sp = SignedPermutation(perm, signs)
    return sp, sp.apply(g)


def candidate_bound(p_diag, g_sorted) -> int:
    p = np.asarray(p_diag, float)
    g = np.asarray(g_sorted, float)
    # I + g P g^T has a single non-unit eigenvalue 1 + g^T P g
    lam = 1.0 + float(np.sum(p * g * g))
    return max(1, int(np.floor(lam)))


def qp_matrix(p_diag, g):
    """(P^-1 + g g^T)^-1 written without inverting P (zero powers allowed)."""
    p = np.asarray(p_diag, float)
    pg = p * g
    return np.diag(p) - np.outer(pg, pg) / (1.0 + float(g @ pg))


def _canonical_sign(a):
    nz = np.flatnonzero(a)
    if nz.size and a[nz[0]] < 0:
        return -a
    return a


def _argmin_candidates(cands, obj):
    """Smallest objective; ties go to the lexicographically smallest row."""
    best = obj.min()
    tied = cands[obj <= best + 1e-12 * max(abs(best), 1e-300)]
    if len(tied) == 1:
        return tied[0]
    order = np.lexsort(tied.T[::-1])
    return tied[order[0]]


def _polish(G, a, max_sweeps: int = 50):
    """Greedy +-1 coordinate moves while the quadratic form decreases."""
    a = a.copy()
    diag = np.diag(G)
    Ga = G @ a
    for _ in range(max_sweeps):
        # change of a^T G a when a_i -> a_i + d is 2 d (G a)_i + d^2 G_ii
        gain_up = 2 * Ga + diag
        gain_dn = -2 * Ga + diag
        i_up, i_dn = int(np.argmin(gain_up)), int(np.argmin(gain_dn))
        if gain_up[i_up] <= gain_dn[i_dn]:
            i, d, gain = i_up, 1, gain_up[i_up]
        else:
            i, d, gain = i_dn, -1, gain_dn[i_dn]
        if gain >= -1e-12 * abs(a @ Ga) or (np.count_nonzero(a) == 1 and a[i] == -d):
            break
        a[i] += d
        Ga += d * G[:, i]
    return a


def select_real_coeff(p_diag, g_real) -> np.ndarray:
    global _cap_warned
    p = np.asarray(p_diag, float)
    g = np.asarray(g_real, float)
    active = np.flatnonzero(p > 0)
    if active.size == 0:
        raise ValueError("at least one UE needs positive power")
    out = np.zeros(len(p), dtype=np.int64)
    n = active.size

    sp, gbar = normalize_channel(g[active])
    pbar = p[active][sp.perm]
    G = qp_matrix(pbar, gbar)

    cands = [np.eye(n, dtype=np.int64)]
    if n > 1:
        K = candidate_bound(pbar, gbar)
        if K > K_MAX:
            if not _cap_warned:
                logger.warning("candidate bound %d capped at %d", K, K_MAX)
                _cap_warned = True
            K = K_MAX
        try:
            r = -np.linalg.solve(G[:-1, :-1], G[:-1, -1])
        except np.linalg.LinAlgError:
            r = None
        if r is not None and np.all(np.isfinite(r)):
            ks = np.arange(1, K + 1, dtype=float)[:, None]
            scaled = np.rint(ks * r[None, :]).astype(np.int64)
            cands.append(np.hstack([scaled, np.arange(1, K + 1, dtype=np.int64)[:, None]]))
    cands = np.vstack(cands)
    obj = np.einsum("ij,jk,ik->i", cands, G, cands)
    if n > 1:
        top = cands[np.argsort(obj, kind="stable")[:N_POLISH]]
        polished = np.array([_polish(G, c) for c in top])
        cands = np.vstack([cands, polished])
        obj = np.concatenate([obj, np.einsum("ij,jk,ik->i", polished, G, polished)])
    abar = _argmin_candidates(cands, obj)
    out[active] = sp.invert(abar)
    return _canonical_sign(out)


def real_objective(p_diag, g_real, a) -> float:
    a = np.asarray(a, float)
    return float(a @ qp_matrix(p_diag, np.asarray(g_real, float)) @ a)


def exhaustive_coeff_oracle(p_diag, g_real, K: int) -> np.ndarray:
    """Brute-force argmin of a^T (P^-1 + g g^T)^-1 a over 0 < ||a||_inf <= K."""
    p = np.asarray(p_diag, float)
    g = np.asarray(g_real, float)
    L = len(g)
    if L > 4:
        raise ValueError("exhaustive search limited to L <= 4")
    if np.any(p <= 0):
        raise ValueError("oracle needs strictly positive powers")
    G = np.linalg.inv(np.diag(1.0 / p) + np.outer(g, g))
    grid = np.array(list(itertools.product(range(-K, K + 1), repeat=L)), dtype=np.int64)
    grid = grid[np.any(grid != 0, axis=1)]
    # keep one representative of each +-a pair: leading nonzero positive
    lead = grid[np.arange(len(grid)), np.argmax(grid != 0, axis=1)]
    grid = grid[lead > 0]
    obj = np.einsum("ij,jk,ik->i", grid, G, grid)
    return _argmin_candidates(grid, obj)


def _complex_noise(p, g, a) -> float:
    # local copy of the parallel effective-noise formula (avoids an import cycle)
    pa = p * a
    pg = p * g
    num = np.vdot(g, pa)
    val = np.vdot(a, pa).real - abs(num) ** 2 / (1.0 + np.vdot(g, pg).real)
    return max(float(val), 0.0)


def split_coeff_parts(p_diag, g_complex):
    """Real-part and imaginary-part selections, each against its own channel part.

    A channel part that vanishes on every powered UE yields the zero vector.
    """
    p = np.asarray(p_diag, float)
    g = np.asarray(g_complex, complex)
    active = p > 0
    parts = []
    for comp in (g.real, g.imag):
        if not np.any(comp[active]):
            parts.append(np.zeros(len(p), dtype=np.int64))
        else:
            parts.append(select_real_coeff(p, comp))
    return parts[0], parts[1]


def select_coeff_complex(p_diag, g_complex) -> GaussianIntegerVector:
    """Gaussian-integer coefficient vector for one AP.

    The re/im split gives the primary candidate; it is compared under the
    complex effective noise against each part alone and against the unit
    vectors, so the result is never worse than forcing a single stream.
    """
    p = np.asarray(p_diag, float)
    g = np.asarray(g_complex, complex)
    re, im = split_coeff_parts(p, g)
    L = len(p)
    zero = np.zeros(L, dtype=np.int64)
    cands = []
    if np.any(re) or np.any(im):
        cands.append((re, im))
    if np.any(re) and np.any(im):
        cands.append((re, zero))
        cands.append((zero, im))
    for l in np.flatnonzero(p > 0):
        e = zero.copy()
        e[l] = 1
        cands.append((e, zero))
    noises = [_complex_noise(p, g, r + 1j * i) for r, i in cands]
    best = min(noises)
    # first minimal candidate in list order; list order is fixed, so this is deterministic
    for (r, i), v in zip(cands, noises):
        if v <= best * (1 + 1e-12):
            return GaussianIntegerVector(r, i)
    raise AssertionError("unreachable")


def select_all(p_diag, g_rows, mask=None) -> np.ndarray:
    """Coefficient matrix (rows = APs) as complex integers.

    ``mask`` (M x L boolean) restricts which UEs each AP may include.
    """
    g_rows = np.atleast_2d(g_rows)
    p = np.asarray(p_diag, float)
    A = np.zeros(g_rows.shape, dtype=complex)
    for m, g in enumerate(g_rows):
        pm = p if mask is None else np.where(mask[m], p, 0.0)
        if not np.any(pm > 0):
            continue
        A[m] = select_coeff_complex(pm, g).value
    return A
