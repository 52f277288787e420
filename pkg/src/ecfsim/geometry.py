"""Network layouts, large-scale fading and small-scale channel draws.

All channel gains leave this module noise-normalized: ``g = sqrt(beta / sigma2) * h``,
so every downstream formula works with unit noise power.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

PATHLOSS_DB_AT_1M = -30.5
PATHLOSS_EXPONENT_DB = 36.7
DEFAULT_NOISE_DBW = -130.0


def rng_stream(seed: int, *labels) -> np.random.Generator:
    """Counter-based generator for the stream named by ``labels``.

    Labels may be ints or strings; strings are hashed with crc32 so the key is
    stable across interpreter runs (unlike ``hash``).
    """
    key = tuple(zlib.crc32(x.encode()) if isinstance(x, str) else int(x) for x in labels)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class NetworkGeometry:
    ap_positions: np.ndarray  # (M, 2) meters
    ue_positions: np.ndarray  # (L, 2) meters
    side: float

    @property
    def m_aps(self) -> int:
        return len(self.ap_positions)

    @property
    def l_ues(self) -> int:
        return len(self.ue_positions)

    def distances(self) -> np.ndarray:
        """(M, L) wrap-around distances."""
        delta = np.abs(self.ap_positions[:, None, :] - self.ue_positions[None, :, :])
        delta = np.minimum(delta, self.side - delta)
        return np.sqrt(np.sum(delta**2, axis=-1))


@dataclass(frozen=True)
class LargeScaleMap:
    beta: np.ndarray  # (M, L) linear power gains

    def __post_init__(self):
        if not (np.all(np.isfinite(self.beta)) and np.all(self.beta > 0)):
            raise ValueError("large-scale gains must be positive and finite")


@dataclass(frozen=True)
class ChannelRealization:
    g: np.ndarray  # (M, L) complex, noise-normalized
    lsmap: LargeScaleMap
    noise_power: float  # watts, the sigma^2 that was divided out
    noise_normalized: bool = True

    @property
    def beta(self) -> np.ndarray:
        return self.lsmap.beta

    @property
    def beta_normalized(self) -> np.ndarray:
        """beta / sigma^2, i.e. E|g|^2 in the units of ``g``."""
        return self.lsmap.beta / self.noise_power


def place_uniform(m_aps: int, l_ues: int, side: float, seed) -> NetworkGeometry:
    if not (l_ues >= 1 and m_aps > l_ues):
        raise ValueError(f"need m_aps > l_ues >= 1, got M={m_aps}, L={l_ues}")
    if side <= 0:
        raise ValueError("side must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed, "placement")
    aps = rng.uniform(0.0, side, size=(m_aps, 2))
    ues = rng.uniform(0.0, side, size=(l_ues, 2))
    return NetworkGeometry(aps, ues, float(side))


def wrap_distance(p, q, side: float) -> float:
    d = np.abs(np.asarray(p, float) - np.asarray(q, float))
    d = np.minimum(d, side - d)
    return float(np.hypot(d[0], d[1]))


def pathloss_db(d, d_min: float = 1.0):
    d = np.maximum(np.asarray(d, float), d_min)
    return PATHLOSS_DB_AT_1M - PATHLOSS_EXPONENT_DB * np.log10(d)


def large_scale(geom: NetworkGeometry, shadow_sd_db: float = 4.0, d_min: float = 1.0,
                seed=0) -> LargeScaleMap:
    if shadow_sd_db < 0 or d_min <= 0:
        raise ValueError("shadow_sd_db must be >= 0 and d_min > 0")
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed, "shadowing")
    shadow = rng.normal(0.0, shadow_sd_db, size=(geom.m_aps, geom.l_ues))
    beta_db = pathloss_db(geom.distances(), d_min) + shadow
    return LargeScaleMap(10.0 ** (beta_db / 10.0))


def dbw_to_watts(dbw: float) -> float:
    return 10.0 ** (dbw / 10.0)


def draw_channel(lsmap: LargeScaleMap, noise_power_dbw: float = DEFAULT_NOISE_DBW,
                 seed=0) -> ChannelRealization:
    sigma2 = dbw_to_watts(noise_power_dbw)
    if not sigma2 > 0:
        raise ValueError("noise power must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed, "fading")
    shape = lsmap.beta.shape
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    g = np.sqrt(lsmap.beta / sigma2) * h
    return ChannelRealization(g, lsmap, sigma2)
