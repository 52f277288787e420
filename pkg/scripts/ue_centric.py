"""Effect of capping the number of UEs each AP may include in its combination,
together with the fronthaul-capped sum rate min(R0, Rsum).

    python3 scripts/ue_centric.py --caps 1,2,3,10 --r0 40
"""
import argparse

from ecfsim.experiment import Scenario, run_scenario, summarize

SCHEMES = ["CF", "PARA", "SUCC-HUNGARIAN"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--caps", default="1,2,3,10")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--r0", type=float, default=40.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'cap':>4s} " + " ".join(f"{s:>16s} {'capped':>8s}" for s in SCHEMES))
    for cap in (int(c) for c in args.caps.split(",")):
        sc = Scenario(m_aps=[args.m], trials=args.trials, seed=args.seed, schemes=SCHEMES, cap=cap,
                      r0=args.r0)
        summary = summarize(run_scenario(sc), r0=args.r0)
        cells = []
        for s in SCHEMES:
            e = summary["schemes"][s][str(args.m)]
            cells.append(f"{e['mean']:16.2f} {e['capped_mean']:8.2f}")
        print(f"{cap:4d} " + " ".join(cells))


if __name__ == "__main__":
    main()
