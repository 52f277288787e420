"""Compare the UE-to-step assignment rules of successive computation.

Prints the mean sum rate, its standard error, and the wall time per trial
for each rule next to the parallel scheme on the same realizations. Work
shared between schemes (coefficients, AP selection, power optimization) is
cached per trial and timed under the first scheme that needs it.

    python3 scripts/compare_ordering.py --m 100 --trials 100
"""
import argparse

from ecfsim.experiment import Scenario, run_scenario, summarize

SCHEMES = ["PARA", "SUCC-RP", "SUCC-NORM", "SUCC-HUNGARIAN"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--succ-mode", default="literal", choices=["literal", "conservative"])
    args = ap.parse_args()

    sc = Scenario(m_aps=[args.m], trials=args.trials, seed=args.seed, schemes=SCHEMES,
                  succ_mode=args.succ_mode, timing=True)
    records = list(run_scenario(sc))
    summary = summarize(records)
    for s in SCHEMES:
        e = summary["schemes"][s][str(args.m)]
        ms = sum(r.wall_ms for r in records if r.scheme == s) / args.trials
        print(f"{s:16s} mean {e['mean']:8.3f}  se {e['stderr']:6.3f}  {ms:8.1f} ms/trial")


if __name__ == "__main__":
    main()
