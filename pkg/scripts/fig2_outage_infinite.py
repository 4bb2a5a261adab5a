"""Secrecy outage of the infinite constellation against the target epsilon.

Each grid point uses the key power that the ideal-secrecy bound assigns to
that epsilon; the outage probability should shrink with epsilon.
"""
import argparse
import sys

from usk.harness import SweepSpec, emit_csv, estimate_p_out_infinite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--na", type=int, default=9)
    ap.add_argument("--nb", type=int, default=4)
    ap.add_argument("--ne", type=int, default=8)
    ap.add_argument("--d", type=int, nargs="+", default=[2, 64 ** 4])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.9, 0.6, 0.4, 0.25, 0.15, 0.09])
    ap.add_argument("--trials", type=int, default=50_000)
    ap.add_argument("--mode", choices=["approx", "exact"], default="approx")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    rows = []
    for d in args.d:
        spec = SweepSpec(args.na, args.nb, args.ne, "eps", tuple(args.eps), args.trials, d=d,
                         mode=args.mode, seed=args.seed)
        rows += estimate_p_out_infinite(spec, workers=args.workers)
    emit_csv(rows, sys.stdout if args.out == "-" else args.out)


if __name__ == "__main__":
    main()
