"""Key power and constellation size prescribed by the ideal-secrecy bounds.

Reproduces the worked numbers for a 4x2x3 link at d=2 and prints the power
ratio of the key to the message for 256-QAM.
"""
import argparse

from usk.bounds import BoundParams, next_square_qam, power_ratio, theorem2_power, theorem3_constellation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--na", type=int, default=4)
    ap.add_argument("--nb", type=int, default=2)
    ap.add_argument("--ne", type=int, default=3)
    ap.add_argument("--d", type=float, default=2)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.3981, 0.1990])
    args = ap.parse_args()
    print("eps,pv,m_min,m_qam,power_ratio")
    for eps in args.eps:
        p = BoundParams(args.na, args.nb, args.ne, args.d, eps)
        pv, m_min = theorem2_power(p), theorem3_constellation(p)
        m = next_square_qam(m_min)
        print(f"{eps},{pv:.6f},{m_min:.6f},{m},{power_ratio(pv, m, args.nb):.6f}")


if __name__ == "__main__":
    main()
