"""Monte-Carlo harness: scenarios, scheme registry, records and summaries."""
from __future__ import annotations

import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .apselect import ue_centric_cap
from .baselines import capped_rate, mrc_sum_rate
from .geometry import draw_channel, large_scale, place_uniform, rng_stream
from .pipeline import parallel_pipeline, select_combinations, successive_pipeline
from .power import PowerAllocation
from .rates import is_prime, recoverable

STRATEGY_ALIASES = {
    "RP": "received_power", "NORM": "channel_norm", "HUNGARIAN": "hungarian",
    "received_power": "received_power", "channel_norm": "channel_norm",
}
BASE_SCHEMES = ("CF", "MRC", "PARA", "APS-PARA", "LSF-PARA", "APS-LSF-PARA",
                "SUCC-RP", "SUCC-NORM", "SUCC-HUNGARIAN")
DEFAULT_SCHEMES = ["CF", "MRC", "PARA", "APS-PARA", "SUCC-HUNGARIAN", "APS-LSF-SUCC-HUNGARIAN"]
CDF_LEVELS = tuple(round(0.05 * k, 2) for k in range(21))
CSV_HEAD = ["scheme", "m", "l", "trial", "seed", "sum_rate_bits", "fronthaul_symbols", "wall_ms"]


@dataclass(frozen=True)
class SchemeInfo:
    name: str
    kind: str  # "cf" | "mrc" | "para" | "succ"
    aps: bool = False
    lsf: bool = False
    strategy: str | None = None


def parse_scheme(name: str, default_strategy: str = "hungarian") -> SchemeInfo:
    """Names are an optional APS-/LSF-/APS-LSF- prefix on CF, PARA or SUCC[-RP|-NORM|-HUNGARIAN]."""
    parts = name.strip().upper().split("-")
    aps = lsf = False
    if parts and parts[0] == "APS":
        aps, parts = True, parts[1:]
    if parts and parts[0] == "LSF":
        lsf, parts = True, parts[1:]
    if parts == ["MRC"] and not (aps or lsf):
        return SchemeInfo(name, "mrc")
    if parts == ["CF"] and not lsf:
        return SchemeInfo(name, "cf", aps=aps)
    if parts == ["PARA"]:
        return SchemeInfo(name, "para", aps, lsf)
    if parts and parts[0] == "SUCC" and len(parts) <= 2:
        strat = STRATEGY_ALIASES[parts[1]] if len(parts) == 2 and parts[1] in STRATEGY_ALIASES else None
        if len(parts) == 2 and strat is None:
            raise ValueError(f"unknown ordering strategy in scheme {name!r}")
        return SchemeInfo(name, "succ", aps, lsf, strat or default_strategy)
    raise ValueError(f"unknown scheme {name!r}")


@dataclass
class Scenario:
    m_aps: list = field(default_factory=lambda: [100])
    l_ues: int = 10
    side_m: float = 1000.0
    pt_watts: float = 0.2
    noise_dbw: float = -130.0
    shadow_sd_db: float = 4.0
    d_min_m: float = 1.0
    trials: int = 200
    seed: int = 0
    schemes: list = field(default_factory=lambda: list(DEFAULT_SCHEMES))
    ue_order: str = "hungarian"
    succ_mode: str = "literal"
    succ_power: str = "parallel"
    cap: int | None = None  # UE-centric: max UEs per AP
    prime: int = 257
    r0: float | None = None  # fronthaul capacity for capped sum rates
    r_steps: int = 40
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if isinstance(self.m_aps, int):
            self.m_aps = [self.m_aps]
        self.m_aps = [int(m) for m in self.m_aps]
        self.schemes = list(self.schemes)
        self.ue_order = STRATEGY_ALIASES.get(self.ue_order.upper(), STRATEGY_ALIASES.get(self.ue_order))
        if self.ue_order is None:
            raise ValueError("ue_order must be one of RP, NORM, HUNGARIAN")
        if not self.m_aps or not self.schemes:
            raise ValueError("sweeps and scheme list must be nonempty")
        if self.trials < 1 or self.l_ues < 1 or any(m <= self.l_ues for m in self.m_aps):
            raise ValueError("need trials >= 1 and M > L >= 1")
        if self.succ_mode not in ("literal", "conservative"):
            raise ValueError("succ_mode must be literal or conservative")
        if self.succ_power not in ("parallel", "single", "equal"):
            raise ValueError("succ_power must be parallel, single or equal")
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be >= 1")
        if not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")
        if self.pt_watts <= 0 or self.side_m <= 0 or self.workers < 1:
            raise ValueError("pt_watts, side_m and workers must be positive")
        for s in self.schemes:
            parse_scheme(s, self.ue_order)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown scenario fields: {sorted(extra)}")
        return cls(**d)


@dataclass
class TrialRecord:
    scheme: str
    m: int
    l: int
    trial: int
    seed: int
    rates: np.ndarray
    fronthaul_symbols: int
    wall_ms: float = 0.0
    flags: tuple = ()

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.rates))


def trial_channel(sc: Scenario, m: int, trial: int):
    geom = place_uniform(m, sc.l_ues, sc.side_m, rng_stream(sc.seed, m, trial, "placement"))
    ls = large_scale(geom, sc.shadow_sd_db, sc.d_min_m, rng_stream(sc.seed, m, trial, "shadowing"))
    return draw_channel(ls, sc.noise_dbw, rng_stream(sc.seed, m, trial, "fading"))


def run_scheme(sch: SchemeInfo, sc: Scenario, g, beta_norm, mask, cache):
    pt = sc.pt_watts
    if sch.kind == "mrc":
        return mrc_sum_rate(g, PowerAllocation.equal(g.shape[1], pt))
    opt = {"n_r": sc.r_steps}
    if sch.kind == "cf":
        rep = parallel_pipeline(g, beta_norm, pt, aps=sch.aps, optimize=False, mask=mask, cache=cache)
    elif sch.kind == "para":
        rep = parallel_pipeline(g, beta_norm, pt, aps=sch.aps, lsf=sch.lsf, mask=mask,
                                cache=cache, **opt)
    else:
        rep = successive_pipeline(g, beta_norm, pt, sch.strategy, sch.aps, sch.lsf, sc.succ_mode,
                                  sc.succ_power, mask, cache, **opt)
    sel = select_combinations(g, beta_norm, pt, sch.aps, mask, cache)
    if not np.all(recoverable(sel.a_rows, sc.prime)):
        rep = replace(rep, flags=rep.flags + ("unrecoverable_mod_p",))
    return rep


def run_trial(sc: Scenario, m: int, trial: int) -> list[TrialRecord]:
    ch = trial_channel(sc, m, trial)
    g, beta_norm = ch.g, ch.beta_normalized
    mask = ue_centric_cap(ch.beta, sc.cap) if sc.cap is not None else None
    cache: dict = {}
    out = []
    for name in sc.schemes:
        sch = parse_scheme(name, sc.ue_order)
        t0 = time.perf_counter()
        rep = run_scheme(sch, sc, g, beta_norm, mask, cache)
        wall = (time.perf_counter() - t0) * 1e3 if sc.timing else 0.0
        out.append(TrialRecord(name, m, sc.l_ues, trial, sc.seed, np.asarray(rep.per_ue_rates, float),
                               rep.fronthaul_symbols_per_use, wall, tuple(rep.flags)))
    return out


def _run_task(args):
    return run_trial(*args)


def run_scenario(sc: Scenario):
    """Yield records ordered by (m, trial, scheme list position)."""
    tasks = [(sc, m, t) for m in sc.m_aps for t in range(sc.trials)]
    if sc.workers == 1:
        for task in tasks:
            yield from run_trial(*task)
        return
    with ProcessPoolExecutor(max_workers=sc.workers) as ex:
        # map preserves task order, so output does not depend on the worker count
        for recs in ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * sc.workers))):
            yield from recs


# --- outputs -------------------------------------------------------------------

def fmt(x: float) -> str:
    return f"{x:.9g}"


def records_to_csv(records, l_ues: int | None = None) -> str:
    records = list(records)
    L = l_ues if l_ues is not None else max((r.l for r in records), default=0)
    buf = io.StringIO()
    buf.write(",".join(CSV_HEAD + [f"rate_ue_{k}" for k in range(1, L + 1)]) + "\n")
    for r in records:
        row = [r.scheme, str(r.m), str(r.l), str(r.trial), str(r.seed), fmt(r.sum_rate),
               str(r.fronthaul_symbols), fmt(r.wall_ms)]
        rates = [fmt(v) for v in r.rates] + [""] * (L - len(r.rates))
        buf.write(",".join(row + rates) + "\n")
    return buf.getvalue()


def write_csv(records, path, l_ues=None):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(records_to_csv(records, l_ues))


def cdf_points(values, levels=CDF_LEVELS) -> list:
    """Empirical quantiles: level q maps to the ceil(q n)-th smallest value."""
    v = np.sort(np.asarray(values, float))
    n = len(v)
    return [float(v[max(math.ceil(q * n) - 1, 0)]) for q in levels]


def _stats(values) -> dict:
    v = np.asarray(values, float)
    se = float(np.std(v, ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
    return {"n": len(v), "mean": float(np.mean(v)), "stderr": se}


def summarize(records, r0: float | None = None) -> dict:
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    schemes = list(dict.fromkeys(r.scheme for r in records))
    ms = sorted({r.m for r in records})
    table = {(r.scheme, r.m, r.trial): r for r in records}
    out = {"schemes": {}, "ratios": {}}
    for s in schemes:
        out["schemes"][s] = {}
        for m in ms:
            recs = [r for r in records if r.scheme == s and r.m == m]
            if not recs:
                continue
            vals = [r.sum_rate for r in recs]
            entry = _stats(vals)
            entry["cdf"] = {"levels": list(CDF_LEVELS), "values": cdf_points(vals)}
            entry["fronthaul_mean"] = float(np.mean([r.fronthaul_symbols for r in recs]))
            flags: dict = {}
            for r in recs:
                for f in r.flags:
                    flags[f] = flags.get(f, 0) + 1
            entry["flags"] = dict(sorted(flags.items()))
            if r0 is not None:
                entry["capped_mean"] = float(np.mean([capped_rate(v, r0) for v in vals]))
            out["schemes"][s][str(m)] = entry
    for ref in ("CF", "MRC"):
        if ref not in schemes:
            continue
        tab = {}
        for s in schemes:
            tab[s] = {}
            for m in ms:
                pairs = [(table[(s, m, t)].sum_rate, table[(ref, m, t)].sum_rate)
                         for (s2, m2, t) in table if s2 == s and m2 == m and (ref, m, t) in table]
                if not pairs:
                    continue
                num, den = map(np.mean, zip(*pairs))
                tab[s][str(m)] = float(num / den) if den > 0 else None
        out["ratios"][f"vs_{ref}"] = tab
    return out


def summary_json(summary: dict, scenario: Scenario | None = None) -> str:
    doc = dict(summary)
    if scenario is not None:
        # execution-only settings are left out so output does not depend on them
        meta = {k: v for k, v in asdict(scenario).items() if k != "workers"}
        doc = {"scenario": meta, **doc}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_summary(summary: dict, path, scenario: Scenario | None = None):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(summary_json(summary, scenario))
