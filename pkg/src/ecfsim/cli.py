"""Command-line entry point: run a scenario and write CSV plus JSON summary."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiment import Scenario, run_scenario, summarize, write_csv, write_summary


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ecfsim", description=__doc__)
    ap.add_argument("--config", help="JSON file with Scenario fields; flags override it")
    ap.add_argument("--m", type=_int_list, help="AP counts, comma separated (e.g. 20,40,100)")
    ap.add_argument("--l", type=int, help="number of UEs")
    ap.add_argument("--pt-mw", type=float, help="total transmit power in mW")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--schemes", type=_str_list, help="comma separated scheme names")
    ap.add_argument("--out", default="records.csv", help="per-trial CSV path")
    ap.add_argument("--summary-out", default="summary.json", help="summary JSON path")
    ap.add_argument("--ue-order", help="strategy for a bare SUCC scheme: RP, NORM or HUNGARIAN")
    ap.add_argument("--succ-mode", choices=["literal", "conservative"])
    ap.add_argument("--succ-power", choices=["parallel", "single", "equal"])
    ap.add_argument("--cap", type=int, help="UE-centric cap: max UEs per AP")
    ap.add_argument("--prime", type=int, help="prime for the recoverability check")
    ap.add_argument("--r0", type=float, help="fronthaul capacity for capped sum rates")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--timing", action="store_true", default=None,
                    help="record wall time (makes the CSV non-reproducible)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


FLAG_FIELDS = {"m": "m_aps", "l": "l_ues", "trials": "trials", "seed": "seed", "schemes": "schemes",
               "ue_order": "ue_order", "succ_mode": "succ_mode", "succ_power": "succ_power",
               "cap": "cap", "prime": "prime", "r0": "r0", "workers": "workers", "timing": "timing"}


def scenario_from_args(args) -> Scenario:
    fields = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            fields.update(json.load(f))
    for flag, name in FLAG_FIELDS.items():
        val = getattr(args, flag)
        if val is not None:
            fields[name] = val
    if args.pt_mw is not None:
        fields["pt_watts"] = args.pt_mw / 1000.0
    return Scenario.from_dict(fields)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = scenario_from_args(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records = list(run_scenario(sc))
    write_csv(records, args.out, sc.l_ues)
    write_summary(summarize(records, sc.r0), args.summary_out, sc)
    return 0
