"""Sum rate against the number of APs for the parallel schemes and baselines.

    python3 scripts/sweep_m.py --trials 50 --out-dir results/sweep_m
"""
import argparse
import os

from ecfsim.experiment import Scenario, run_scenario, summarize, write_csv, write_summary

SCHEMES = ["CF", "MRC", "PARA", "APS-PARA", "LSF-PARA", "APS-LSF-PARA",
           "SUCC-HUNGARIAN", "APS-LSF-SUCC-HUNGARIAN"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", default="20,40,60,80,100")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="results/sweep_m")
    args = ap.parse_args()

    sc = Scenario(m_aps=[int(x) for x in args.m.split(",")], trials=args.trials, seed=args.seed,
                  schemes=SCHEMES, workers=args.workers)
    records = list(run_scenario(sc))
    summary = summarize(records)
    os.makedirs(args.out_dir, exist_ok=True)
    write_csv(records, os.path.join(args.out_dir, "records.csv"), sc.l_ues)
    write_summary(summary, os.path.join(args.out_dir, "summary.json"), sc)

    print(f"{'scheme':26s}" + "".join(f"{'M=' + str(m):>10s}" for m in sc.m_aps))
    for s in SCHEMES:
        row = summary["schemes"][s]
        print(f"{s:26s}" + "".join(f"{row[str(m)]['mean']:10.2f}" for m in sc.m_aps))


if __name__ == "__main__":
    main()
