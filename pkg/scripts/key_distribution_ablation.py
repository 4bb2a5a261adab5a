"""Single-use outage Pr{L < d} under alternative key distributions.

The reference point for 4x2x3, d=2, pv=3.662, 256-QAM is sensitive to how
the key is drawn. Compares the uniform-in-ball key with a key fixed on the
sphere of radius sqrt(pv).
"""
import argparse

from usk.harness import SweepSpec, estimate_pf_out_finite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    print("key,trials,successes,p_hat,ci_low,ci_high")
    for label, fixed in (("ball", False), ("sphere", True)):
        spec = SweepSpec(4, 2, 3, "b", (1,), args.trials, d=2, mode="factorized", pv=3.6620, m=256,
                         seed=args.seed, fixed_norm=fixed)
        e = estimate_pf_out_finite(spec, workers=args.workers)[0]
        print(f"{label},{e.trials},{e.successes},{e.p_hat:.4e},{e.ci_low:.4e},{e.ci_high:.4e}")


if __name__ == "__main__":
    main()
