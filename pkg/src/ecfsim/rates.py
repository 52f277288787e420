"""Effective noise, computation rates, recoverability and fronthaul accounting.

Channels are noise-normalized, powers are in watts, rates are bits per
channel use (log base 2).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SideInformationError(ValueError):
    """Side-information rows are linearly dependent under the current power."""


@dataclass
class RateReport:
    per_ue_rates: np.ndarray
    effective_noises: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fronthaul_symbols_per_use: int = 0
    flags: tuple = ()

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.per_ue_rates))


def log2_plus(x):
    with np.errstate(divide="ignore"):
        return np.maximum(np.log2(x), 0.0)


def _as_complex(a):
    a = np.asarray(a)
    if hasattr(a, "dtype") and a.dtype == object:
        a = np.array([complex(v) for v in a])
    return a.astype(complex)


def _coeff(a):
    if hasattr(a, "value"):
        return np.asarray(a.value, complex)
    return _as_complex(a)


def mmse_factor(p_diag, g, a) -> complex:
    p = np.asarray(p_diag, float)
    g = np.asarray(g, complex)
    a = _coeff(a)
    return complex(np.vdot(g, p * a) / (1.0 + np.vdot(g, p * g).real))


def effective_noise_parallel(p_diag, g, a) -> float:
    """a^H P a - |a^H P g|^2 / (1 + g^H P g); equals a^H (P^-1 + g g^H)^-1 a."""
    p = np.asarray(p_diag, float)
    g = np.asarray(g, complex)
    a = _coeff(a)
    num = np.vdot(a, p * g)
    val = np.vdot(a, p * a).real - abs(num) ** 2 / (1.0 + np.vdot(g, p * g).real)
    return max(float(val), 0.0)


def noise_matrix(p_diag, g) -> np.ndarray:
    """(P^-1 + g g^H)^-1 in the inversion-free form."""
    p = np.asarray(p_diag, float)
    g = np.asarray(g, complex)
    pg = p * g
    return np.diag(p).astype(complex) - np.outer(pg, pg.conj()) / (1.0 + np.vdot(g, pg).real)


def hermitian_sqrt(Q) -> np.ndarray:
    w, V = np.linalg.eigh(Q)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def successive_projector(p_diag, g, a_prev):
    """Return (F, N) with F^H F = (P^-1 + g g^H)^-1 and N the projector that
    removes the span of F applied to the side-information vectors."""
    F = hermitian_sqrt(noise_matrix(p_diag, g))
    V = np.atleast_2d(_as_complex(a_prev)).T  # side-information vectors as columns
    W = F @ V
    gram = W.conj().T @ W
    if np.linalg.matrix_rank(gram, tol=1e-10 * max(np.abs(gram).max(), 1e-300)) < W.shape[1]:
        raise SideInformationError("side-information Gram matrix is singular")
    N = np.eye(len(F)) - W @ np.linalg.solve(gram, W.conj().T)
    return F, N


def effective_noise_successive(p_diag, g, a, a_prev=None, strict: bool = True) -> float:
    """Effective noise of combination ``a`` given already-decoded combinations.

    ``a_prev`` holds one decoded coefficient vector per row. With ``strict``
    a singular side-information Gram matrix raises; otherwise the projection
    falls back to least squares onto whatever span the vectors do cover.
    """
    a = _coeff(a)
    if a_prev is None or len(a_prev) == 0:
        return effective_noise_parallel(p_diag, g, a)
    if strict:
        F, N = successive_projector(p_diag, g, a_prev)
        return max(float(np.linalg.norm(N @ (F @ a)) ** 2), 0.0)
    F = hermitian_sqrt(noise_matrix(p_diag, g))
    W = F @ np.atleast_2d(_as_complex(a_prev)).T
    fa = F @ a
    c, *_ = np.linalg.lstsq(W, fa, rcond=1e-12)
    return max(float(np.linalg.norm(fa - W @ c) ** 2), 0.0)


def per_pair_rates(p_diag, noises, a_rows) -> np.ndarray:
    """R'(l, m) = log+(P_l / sigma^2_m) where a_ml != 0, else nan."""
    p = np.asarray(p_diag, float)
    a_rows = np.atleast_2d(a_rows)
    noises = np.asarray(noises, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = log2_plus(p[None, :] / np.maximum(noises[:, None], 1e-300))
    r = np.where(p[None, :] > 0, r, 0.0)
    return np.where(a_rows != 0, r, np.nan)


def ue_rates_parallel(p_diag, g_rows, a_rows, fronthaul: bool = True) -> RateReport:
    """Each UE is limited by the worst selected AP whose combination involves it."""
    g_rows = np.atleast_2d(g_rows)
    a_rows = np.atleast_2d(a_rows)
    noises = np.array([effective_noise_parallel(p_diag, g, a) for g, a in zip(g_rows, a_rows)])
    pair = per_pair_rates(p_diag, noises, a_rows)
    involved = np.any(a_rows != 0, axis=0)
    rates = np.where(involved, np.nanmin(np.where(involved[None, :], pair, 0.0), axis=0), 0.0)
    rates = np.nan_to_num(rates)
    fh = fronthaul_load("parallel", len(a_rows)) if fronthaul else 0
    return RateReport(rates, noises, fh)


def fronthaul_load(scheme: str, m_selected: int) -> int:
    if m_selected < 1:
        raise ValueError("need at least one selected AP")
    if scheme == "parallel":
        return 2 * m_selected
    if scheme == "successive":
        return 4 * m_selected
    raise ValueError(f"unknown scheme {scheme!r}")


# --- finite-field recoverability -------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _rref_mod_p(B: np.ndarray, p: int):
    """Row-reduce over Z_p; returns (reduced matrix, pivot columns)."""
    B = B.copy() % p
    rows, cols = B.shape
    pivots = []
    r = 0
    for c in range(cols):
        nz = np.flatnonzero(B[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        B[[r, piv]] = B[[piv, r]]
        B[r] = (B[r] * pow(int(B[r, c]), -1, p)) % p
        others = np.flatnonzero(B[:, c])
        others = others[others != r]
        if others.size:
            B[others] = (B[others] - np.outer(B[others, c], B[r])) % p
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return B[:r], pivots


def stacked_real_matrix(a_matrix, p: int) -> np.ndarray:
    A = np.atleast_2d(_as_complex(a_matrix))
    qr = np.rint(A.real).astype(np.int64) % p
    qi = np.rint(A.imag).astype(np.int64) % p
    return np.block([[qr, (-qi) % p], [qi, qr]])


def recoverable(a_matrix, prime_p: int = 257) -> np.ndarray:
    """Per UE: is the unit vector delta_l in the Z_p row space of the stacked matrix?"""
    if not is_prime(int(prime_p)):
        raise ValueError(f"{prime_p} is not prime")
    p = int(prime_p)
    B = stacked_real_matrix(a_matrix, p)
    L = B.shape[1] // 2
    R, pivots = _rref_mod_p(B, p)
    out = np.zeros(L, dtype=bool)
    for l in range(L):
        v = np.zeros(B.shape[1], dtype=np.int64)
        v[l] = 1
        # eliminate against the reduced basis; membership iff residue vanishes
        for row, c in zip(R, pivots):
            if v[c]:
                v = (v - v[c] * row) % p
        out[l] = not np.any(v)
    return out
