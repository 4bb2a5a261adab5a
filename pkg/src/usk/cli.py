"""Command-line front end.

Every option can also come from a JSON config file (``--config``) whose
keys are the option names with dashes replaced by underscores. Explicit
flags win over the file, which wins over the built-in defaults.

Exit codes: 0 success, 1 runtime or resource failure (including bound
violations reported by ``validate``), 2 invalid usage or configuration.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .bounds import (
    BoundParams,
    kappa,
    next_square_qam,
    phi,
    power_ratio,
    theorem2_power,
    theorem3_constellation,
)
from .codec import UskConfig, simulate_cryptogram, validate_dimensions
from .errors import ResourceError, UskError
from .harness import (
    SweepSpec,
    emit_csv,
    estimate_p_out_infinite,
    estimate_pf_out_finite,
    validate_lemma2,
    validate_lemma3,
    validate_lemma4,
)
from .lattice import equivocation_bits
from .matrix import RngStream

DEFAULTS = {
    "bounds": dict(na=4, nb=2, ne=3, d=2, eps=0.1990, m=None),
    "outage-infinite": dict(na=9, nb=4, ne=8, d=[2, 64**4], eps=[0.9, 0.6, 0.4, 0.25, 0.15, 0.09],
                            trials=50_000, mode="approx"),
    "outage-finite": dict(na=4, nb=2, ne=3, d=2, pv=3.6620, eps=None, m=[256], b=[1, 2, 3, 4],
                          trials=200_000, mode="factorized"),
    "demo": dict(na=4, nb=2, ne=3, pv=3.6620, m=256, sigma_b=0.0, fixed_norm=False),
    "validate": dict(which="all", na=4, nb=2, ne=3, d=2, trials=10_000, ratios=[1.5, 2.0, 3.0],
                     pv=3.6620, m=256, xs=[0.5, 1.0, 1.5, 2.0, 3.0]),
}
GLOBAL_DEFAULTS = dict(seed=0, format="text", out=None, threads=1, config=None, timing=False)


class UsageError(Exception):
    pass


def _global_flags(p: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=s, help="master seed (default 0)")
    p.add_argument("--config", default=s, help="JSON file of option values")
    p.add_argument("--format", choices=["text", "csv"], default=s)
    p.add_argument("--out", default=s, help="output path (default stdout)")
    p.add_argument("--threads", type=int, default=s, help="worker processes; never changes results")
    p.add_argument("--timing", action="store_true", default=s,
                   help="fill the elapsed_s CSV column (output is then not reproducible)")


def _dims(p):
    s = argparse.SUPPRESS
    p.add_argument("--na", type=int, default=s, help="Alice's antennas")
    p.add_argument("--nb", type=int, default=s, help="Bob's antennas")
    p.add_argument("--ne", type=int, default=s, help="Eve's antennas")


def build_parser() -> argparse.ArgumentParser:
    s = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="usk", description="Unshared secret key cryptosystem toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="power and constellation prescriptions")
    _dims(p)
    _global_flags(p)
    p.add_argument("--d", type=int, default=s)
    p.add_argument("--eps", type=float, default=s)
    p.add_argument("--m", type=int, default=s, help="QAM size for the power ratio")

    p = sub.add_parser("outage-infinite", help="P_out(d) versus eps")
    _dims(p)
    _global_flags(p)
    p.add_argument("--d", type=int, nargs="+", default=s)
    p.add_argument("--eps", type=float, nargs="+", default=s)
    p.add_argument("--trials", type=int, default=s)
    p.add_argument("--mode", choices=["approx", "exact"], default=s)

    p = sub.add_parser("outage-finite", help="P_F,out(d, B) versus B and M")
    _dims(p)
    _global_flags(p)
    p.add_argument("--d", type=int, default=s)
    p.add_argument("--pv", type=float, default=s)
    p.add_argument("--eps", type=float, default=s, help="derive pv from eps instead of --pv")
    p.add_argument("--m", type=int, nargs="+", default=s)
    p.add_argument("--b", type=int, nargs="+", default=s)
    p.add_argument("--trials", type=int, default=s)
    p.add_argument("--mode", choices=["direct", "factorized"], default=s)

    p = sub.add_parser("demo", help="one encryption event end to end")
    _dims(p)
    _global_flags(p)
    p.add_argument("--pv", type=float, default=s)
    p.add_argument("--m", type=int, default=s, help="QAM size; 0 for the infinite constellation")
    p.add_argument("--sigma-b", dest="sigma_b", type=float, default=s)
    p.add_argument("--fixed-norm", dest="fixed_norm", action="store_true", default=s)

    p = sub.add_parser("validate", help="Monte Carlo checks of the analytic bounds")
    p.add_argument("which", nargs="?", choices=["lemma2", "lemma3", "lemma4", "all"], default=None)
    _dims(p)
    _global_flags(p)
    p.add_argument("--d", type=int, default=s)
    p.add_argument("--trials", type=int, default=s)
    p.add_argument("--ratios", type=float, nargs="+", default=s)
    p.add_argument("--pv", type=float, default=s)
    p.add_argument("--m", type=int, default=s)
    p.add_argument("--xs", type=float, nargs="+", default=s)
    return parser


def resolve_options(command: str, flags: dict, file_values: dict | None = None) -> dict:
    """Merge defaults, config-file values and flags (in increasing priority)."""
    opts = dict(GLOBAL_DEFAULTS)
    opts.update(DEFAULTS[command])
    for source in (file_values or {}, flags):
        for key, value in source.items():
            if key == "command":
                continue
            if key not in opts:
                raise UsageError(f"unknown option {key!r} for {command}")
            opts[key] = value
    return opts


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _emit_table(header, rows, opts, out):
    if opts["format"] == "csv":
        import csv

        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
        out.write("  ".join(str(h).rjust(w) for h, w in zip(header, widths)) + "\n")
        for r in rows:
            out.write("  ".join(str(c).rjust(w) for c, w in zip(r, widths)) + "\n")


def cmd_bounds(opts, out) -> int:
    validate_dimensions(opts["na"], opts["nb"], opts["ne"])
    p = BoundParams(opts["na"], opts["nb"], opts["ne"], opts["d"], opts["eps"])
    pv = theorem2_power(p)
    m_min = theorem3_constellation(p)
    m_qam = next_square_qam(m_min)
    m = opts["m"] or m_qam
    values = dict(
        n_a=p.n_a, n_b=p.n_b, n_e=p.n_e, d=p.d, eps=p.eps,
        kappa=kappa(p.d, p.n_e), phi=phi(p.n_b, p.n_e), n=p.n, n_min=p.n_min,
        pv=pv, m_min=m_min, m_qam=m_qam, m=m, r=power_ratio(pv, m, p.n_b),
    )
    if opts["format"] == "csv":
        _emit_table(list(values), [[_num(v) for v in values.values()]], opts, out)
    else:
        width = len("r_percent")
        for k, v in values.items():
            out.write(f"{k.ljust(width)}  {_num(v)}\n")
        out.write(f"{'r_percent'.ljust(width)}  {100 * values['r']:.4f}%\n")
    return 0


def _num(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _workers(opts) -> int:
    n = int(opts["threads"])
    if n < 1:
        raise UsageError("--threads must be >= 1")
    return n


def cmd_outage_infinite(opts, out) -> int:
    results = []
    for d in _as_list(opts["d"]):
        spec = SweepSpec(opts["na"], opts["nb"], opts["ne"], "eps", tuple(_as_list(opts["eps"])),
                         int(opts["trials"]), d=int(d), mode=opts["mode"], seed=opts["seed"])
        results.extend(estimate_p_out_infinite(spec, workers=_workers(opts)))
    emit_csv(results, out, timing=bool(opts["timing"]))
    return 0


def cmd_outage_finite(opts, out) -> int:
    results = []
    pv = None if opts["eps"] is not None else opts["pv"]
    for m in _as_list(opts["m"]):
        spec = SweepSpec(opts["na"], opts["nb"], opts["ne"], "b", tuple(_as_list(opts["b"])),
                         int(opts["trials"]), d=int(opts["d"]), mode=opts["mode"], eps=opts["eps"],
                         pv=pv, m=int(m), seed=opts["seed"])
        results.extend(estimate_pf_out_finite(spec, workers=_workers(opts)))
    emit_csv(results, out, timing=bool(opts["timing"]))
    return 0


def _vec(a) -> str:
    return "[" + ", ".join(f"{complex(c).real:g}{complex(c).imag:+g}i" for c in np.ravel(a)) + "]"


def cmd_demo(opts, out) -> int:
    m = opts["m"] or None
    cfg = UskConfig(opts["na"], opts["nb"], opts["ne"], float(opts["pv"]), m=m,
                    sigma_b=float(opts["sigma_b"]), seed=opts["seed"])
    s = simulate_cryptogram(cfg, RngStream(cfg.seed, 0), fixed_norm=bool(opts["fixed_norm"]))
    keyspace = s.l_count if cfg.finite else s.d_count
    lines = [
        f"config      N_A={cfg.n_a} N_B={cfg.n_b} N_E={cfg.n_e} pv={cfg.pv:g} "
        f"M={'inf' if m is None else m} sigma_b={cfg.sigma_b:g} seed={cfg.seed}",
        f"u           {_vec(s.u)}",
        f"|v|^2       {float(np.vdot(s.v, s.v).real):.6f}",
        f"R_max       {s.r_max:.6f}",
        f"k           {s.k}",
        f"D           {s.d_count}",
    ]
    if cfg.finite:
        lines += [f"k_F         {s.k_f}", f"L           {s.l_count}"]
    ok = np.array_equal(s.u_hat, s.u)
    lines += [
        f"equivocation_bits {equivocation_bits(count=keyspace):.6f}",
        f"u_hat       {_vec(s.u_hat)}",
        f"bob_decode  {'PASS' if ok else 'FAIL'}",
    ]
    out.write("\n".join(lines) + "\n")
    return 0


def cmd_validate(opts, out) -> int:
    which = opts["which"]
    p = BoundParams(opts["na"], opts["nb"], opts["ne"], opts["d"], 0.5)
    kw = dict(trials=int(opts["trials"]), seed=opts["seed"], workers=_workers(opts))
    checks = []
    if which in ("lemma2", "all"):
        checks += validate_lemma2(p, tuple(opts["ratios"]), **kw)
    if which in ("lemma3", "all"):
        checks += validate_lemma3(p, tuple(opts["ratios"]), **kw)
    if which in ("lemma4", "all"):
        checks += validate_lemma4(p, float(opts["pv"]), int(opts["m"]), tuple(opts["xs"]), **kw)
    header = ["lemma", "x", "pv", "trials", "successes", "empirical", "ci_low", "ci_high", "bound", "kind", "status"]
    rows = [
        [c.lemma, _num(c.x), _num(c.pv), c.trials, c.successes, _num(c.empirical), _num(c.ci_low),
         _num(c.ci_high), _num(c.bound), c.kind, "OK" if c.ok else "VIOLATION"]
        for c in checks
    ]
    _emit_table(header, rows, opts, out)
    return 0 if all(c.ok for c in checks) else 1


COMMANDS = {
    "bounds": cmd_bounds,
    "outage-infinite": cmd_outage_infinite,
    "outage-finite": cmd_outage_finite,
    "demo": cmd_demo,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    if ns.get("which", "") is None:
        ns.pop("which")
    try:
        file_values = _load_config(ns["config"]) if ns.get("config") else {}
        opts = resolve_options(command, ns, file_values)
        buf = io.StringIO()
        code = COMMANDS[command](opts, buf)
    except (UsageError, UskError) as exc:
        if isinstance(exc, ResourceError):
            print(f"usk {command}: {exc}", file=sys.stderr)
            return 1
        print(f"usk {command}: error: {exc}", file=sys.stderr)
        return 2
    if opts["out"]:
        try:
            with open(opts["out"], "w", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            print(f"usk {command}: cannot write {opts['out']!r}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
