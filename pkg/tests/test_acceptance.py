"""Acceptance suite.

Every criterion runs at its stated scale and tolerance and prints exactly one
``[ACn] PASS`` or ``[ACn] FAIL`` line before asserting. Run it alone with

    pytest tests/test_acceptance.py -v -s
"""

import contextlib
import io
import math

import numpy as np
import pytest

from conftest import brute_count, brute_rank, cgauss, oracle_half_width
from usk.bounds import BoundParams, next_square_qam, power_ratio, theorem2_power, theorem3_constellation
from usk.cli import main
from usk.codec import UskConfig, simulate_cryptogram
from usk.harness import (
    SweepSpec,
    estimate_p_out_infinite,
    estimate_pf_out_finite,
    validate_lemma2,
    validate_lemma3,
    validate_lemma4,
    wilson_interval,
)
from usk.lattice import EveLattice, FiniteLattice, count_in_sphere, effective_key_index, equivocation_bits
from usk.matrix import RngStream, sample_complex_gaussian, svd_split


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            print(f"\n[{tag}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def _ci_overlap(a, b):
    return a.ci_low <= b.ci_high and b.ci_low <= a.ci_high


# shared by AC3 and AC5 so the 2e5-trial run happens once
_FIG4 = {}


def _fig4_factorized():
    if "fact" not in _FIG4:
        spec = SweepSpec(4, 2, 3, "b", (1, 2, 3, 4), 200_000, d=2, mode="factorized",
                         pv=3.6620, m=256, seed=0)
        _FIG4["fact"] = estimate_pf_out_finite(spec)
    return _FIG4["fact"]


def test_ac1_bounds_regression(report):
    tol = 0.002
    pv_a = theorem2_power(BoundParams(4, 2, 3, 2, 0.3981))
    p = BoundParams(4, 2, 3, 2, 0.1990)
    pv_b, m_min = theorem2_power(p), theorem3_constellation(p)
    errs = (abs(pv_a - 1.8306), abs(pv_b - 3.6620), abs(m_min - 255.7297))
    ok = max(errs) <= tol and next_square_qam(m_min) == 256
    report("AC1", ok, f"pv(0.3981)={pv_a:.6f} pv(0.1990)={pv_b:.6f} m_min={m_min:.6f} "
                      f"max_err={max(errs):.2e} tol={tol}")


def test_ac2_power_ratio(report):
    r = power_ratio(3.6620, 256, 2)
    report("AC2", abs(r - 0.0108) <= 1e-4, f"r={r:.6f} target=0.0108+-1e-4")


def test_ac3_finite_outage_point(report):
    # seed 0 was fixed before any run; see the decisions ledger for the analysis
    est = _fig4_factorized()[0]
    target = 4.6250e-4
    ok = est.trials >= 200_000 and est.ci_low <= target <= est.ci_high
    report("AC3", ok, f"p_hat={est.p_hat:.4e} ci=[{est.ci_low:.4e}, {est.ci_high:.4e}] "
                      f"trials={est.trials} target={target:.4e}")


def test_ac4_infinite_outage_trend(report):
    eps = (0.9, 0.6, 0.4, 0.25, 0.15, 0.09)  # one decade, decreasing
    assert eps[0] / eps[-1] >= 10
    bad, lines = [], []
    for d in (2, 64 ** 4):
        spec = SweepSpec(9, 4, 8, "eps", eps, 50_000, d=d, mode="approx", seed=0)
        est = estimate_p_out_infinite(spec)
        lines.append(f"d={d}:" + ",".join(f"{e.p_hat:.4g}" for e in est))
        for prev, nxt in zip(est, est[1:]):
            # an increase only counts when the intervals separate
            if nxt.p_hat > prev.p_hat and nxt.ci_low > prev.ci_high:
                bad.append((d, prev.sweep_value, nxt.sweep_value))
    report("AC4", not bad, f"violations={bad} " + " ".join(lines))


def test_ac5_finite_outage_trend(report):
    fact = _fig4_factorized()
    p1 = fact[0].p_hat
    geo_ok = all(
        math.isclose(e.p_hat, p1 ** e.b, rel_tol=1e-12, abs_tol=0.0) for e in fact
    ) and all(b.p_hat <= a.p_hat * p1 * (1 + 1e-12) for a, b in zip(fact, fact[1:]))
    direct = estimate_pf_out_finite(SweepSpec(4, 2, 3, "b", (1, 2, 3, 4), 50_000, d=2, mode="direct",
                                              pv=3.6620, m=256, seed=1))
    _, hi1 = wilson_interval(direct[0].successes, direct[0].trials)
    dir_ok = all(b.p_hat <= a.p_hat for a, b in zip(direct, direct[1:]))
    dir_ok &= all(e.ci_low <= hi1 ** e.b for e in direct)
    dir_ok &= _ci_overlap(direct[0], fact[0])
    report("AC5", geo_ok and dir_ok,
           "factorized=" + ",".join(f"{e.p_hat:.3e}" for e in fact)
           + " direct=" + ",".join(f"{e.successes}/{e.trials}" for e in direct))


def test_ac6_oracle_equivalence(report):
    gen = np.random.default_rng(6)
    mismatches = 0
    for i in range(500):
        n_b = 1 + i % 2
        m = (4, 16)[(i // 2) % 2]
        side = int(math.isqrt(m))
        n_e = n_b + int(gen.integers(0, 3))
        basis = cgauss(gen, n_e, n_b)
        lat = EveLattice(basis)
        u = gen.integers(0, side, n_b) + 1j * gen.integers(0, side, n_b)
        y = basis @ u + cgauss(gen, n_e) * gen.uniform(0.1, 1.5)
        radius = np.linalg.norm(y - basis @ u) * gen.uniform(1.0, 2.0)
        hw = oracle_half_width(basis, y, radius)
        hw_rank = oracle_half_width(basis, y, np.linalg.norm(y - basis @ u))
        checks = (
            count_in_sphere(FiniteLattice(lat, m), y, radius) == brute_count(basis, y, radius, side=side),
            effective_key_index(FiniteLattice(lat, m), u, y) == brute_rank(basis, u, y, side=side),
            count_in_sphere(lat, y, radius) == brute_count(basis, y, radius, half_width=hw),
            effective_key_index(lat, u, y) == brute_rank(basis, u, y, half_width=hw_rank),
        )
        mismatches += checks.count(False)
    report("AC6", mismatches == 0, f"instances=500 mismatches={mismatches}")


def test_ac7_bound_validation(report):
    p = BoundParams(4, 2, 3, 2, 0.1990)
    checks = validate_lemma2(p, trials=10_000) + validate_lemma4(p, 3.6620, 256, trials=10_000)
    ext = validate_lemma3(p, trials=10_000) + validate_lemma3(BoundParams(9, 4, 8, 2, 0.1), trials=10_000)
    bad = [f"{c.lemma}@{c.x}" for c in checks + ext if not c.ok]
    report("AC7", not bad, f"checks={len(checks)} lemma3_extension={len(ext)} violations={bad}")


def test_ac8_structural_invariants(report):
    gen = np.random.default_rng(8)
    failures = []
    for i in range(10_000):
        n_b = int(gen.integers(1, 3))
        n_e = n_b + int(gen.integers(0, 2))
        n_a = n_e + 1 + int(gen.integers(0, 2))
        finite = i % 4 != 0
        cfg = UskConfig(n_a, n_b, n_e, pv=float(gen.uniform(0.05, 3.0)),
                        m=int((4, 16, 64)[i % 3]) if finite else None, seed=i)
        s = simulate_cryptogram(cfg, RngStream(88, i))
        # H is the first draw of the stream
        hh = sample_complex_gaussian(n_b, n_a, RngStream(88, i).generator())
        p = svd_split(hh)
        ok = (
            np.allclose(hh @ p.z, 0, atol=1e-10)
            and math.isclose(np.vdot(s.x, s.x).real, np.vdot(s.u, s.u).real + np.vdot(s.v, s.v).real,
                             rel_tol=1e-9, abs_tol=1e-12)
            and np.vdot(s.v, s.v).real <= cfg.pv * (1 + 1e-12)
            and 1 <= s.k <= s.d_count
            and np.array_equal(s.u_hat, s.u)
        )
        if finite:
            ok = ok and 1 <= s.k_f <= s.l_count <= s.d_count
            ok = ok and math.isclose(equivocation_bits(np.ones(s.l_count)), math.log2(s.l_count), abs_tol=1e-9)
        if not ok:
            failures.append(i)
    report("AC8", not failures, f"cases=10000 failures={failures[:10]}")


def test_ac9_cli_determinism(report):
    commands = [
        ["bounds", "--format", "csv"],
        ["outage-infinite", "--trials", "2000", "--seed", "5"],
        ["outage-finite", "--trials", "1500", "--b", "1", "2", "--seed", "5"],
        ["outage-finite", "--trials", "1500", "--b", "1", "2", "--mode", "direct", "--seed", "5"],
        ["demo", "--seed", "5"],
        ["validate", "--trials", "1500", "--seed", "5"],
    ]
    differing = []
    for argv in commands:
        outputs = []
        for threads in ("1", "1", "2"):
            buf = io.StringIO()
            with contextlib.redirect_stdout(buf):
                main(argv + ["--threads", threads])
            outputs.append(buf.getvalue())
        if not outputs[0] or len(set(outputs)) != 1:
            differing.append(argv[0])
    report("AC9", not differing, f"subcommands={len(commands)} differing={differing}")
