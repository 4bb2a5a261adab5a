"""
Seeded Monte Carlo drivers for the secrecy outage probabilities and the
empirical checks of the analytic tail bounds.

Trial ``t`` always draws from ``RngStream(seed, t)``, so estimates do not
depend on how trials are split across workers. Every grid point of a sweep
reuses the same trial streams (common random numbers), which keeps
estimates along a sweep directly comparable.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .bounds import (
    BoundParams,
    delta,
    fd_upper_bound,
    kappa,
    lemma4_cdf_lower_bound,
    phi,
    theorem2_power,
    upsilon,
)
from .codec import sample_plain, validate_dimensions
from .errors import DomainError, ResourceError
from .lattice import (
    EveLattice,
    FiniteLattice,
    approx_d,
    count_in_sphere,
    effective_radius_from_log_volume,
    qam_side,
)
from .matrix import (
    RngStream,
    gram_log_volume,
    sample_complex_gaussian,
    sample_key_ball,
    spectral_norm_sq,
    svd_split,
)

Z95 = 1.959963984540054
CHUNK = 1024

CSV_COLUMNS = (
    "sweep_param", "sweep_value", "n_a", "n_b", "n_e", "pv", "m", "b", "d",
    "trials", "successes", "p_hat", "ci_low", "ci_high", "mode", "seed", "elapsed_s",
)

__all__ = [
    "OutageEstimate",
    "SweepSpec",
    "BoundCheck",
    "wilson_interval",
    "estimate_p_out_infinite",
    "estimate_pf_out_finite",
    "validate_lemma2",
    "validate_lemma3",
    "validate_lemma4",
    "emit_csv",
    "read_csv",
    "CSV_COLUMNS",
]


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


@dataclass
class OutageEstimate:
    sweep_param: str
    sweep_value: float
    n_a: int
    n_b: int
    n_e: int
    pv: float
    m: int | None
    b: int
    d: int
    trials: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    mode: str
    seed: int
    elapsed_s: float | None = None


@dataclass
class SweepSpec:
    """One parameter sweep.

    ``param`` names the swept quantity: ``eps`` (the key power follows the
    ideal-secrecy prescription for each value), ``pv``, ``b`` or ``m``.
    ``mode`` is ``approx`` or ``exact`` for the infinite constellation and
    ``direct`` or ``factorized`` for finite ones.
    """

    n_a: int
    n_b: int
    n_e: int
    param: str
    values: tuple
    trials: int
    d: int = 2
    mode: str = "approx"
    eps: float | None = None
    pv: float | None = None
    m: int | None = None
    b: int = 1
    seed: int = 0
    fixed_norm: bool = False

    def __post_init__(self):
        validate_dimensions(self.n_a, self.n_b, self.n_e)
        self.values = tuple(self.values)
        if not self.values:
            raise DomainError("sweep grid is empty")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.param not in ("eps", "pv", "b", "m"):
            raise DomainError(f"cannot sweep {self.param!r}")
        if self.d < 1:
            raise DomainError("d must be >= 1")

    def point(self, value) -> tuple[float, int | None, int]:
        """Resolve ``(pv, m, b)`` at one grid value."""
        pv, m, b = self.pv, self.m, self.b
        if self.param == "eps":
            pv = theorem2_power(BoundParams(self.n_a, self.n_b, self.n_e, self.d, float(value)))
        elif self.param == "pv":
            pv = float(value)
        elif self.param == "b":
            b = int(value)
        else:
            m = int(value)
        if pv is None and self.eps is not None:
            pv = theorem2_power(BoundParams(self.n_a, self.n_b, self.n_e, self.d, self.eps))
        if pv is None or not pv > 0:
            raise DomainError("sweep needs a positive pv (directly or through eps)")
        if b < 1:
            raise DomainError("b must be >= 1")
        return pv, m, b


def _map_trials(fn, args: tuple, trials: int, workers: int) -> np.ndarray:
    bounds = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]
    if workers <= 1 or len(bounds) == 1:
        parts = [fn(*args, lo, hi) for lo, hi in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(fn, *args, lo, hi) for lo, hi in bounds]
            parts = [f.result() for f in futures]
    return np.concatenate(parts, axis=0)


def _draw_link(n_a, n_b, n_e, gen):
    h = sample_complex_gaussian(n_b, n_a, gen)
    g = sample_complex_gaussian(n_e, n_a, gen)
    p = svd_split(h)
    return g @ p.v1, g @ p.z


def _channel_stats(n_a, n_b, n_e, seed, start, stop):
    """Per trial: ``log vol`` of Eve's lattice and ``lambda_max`` of ``G Z``."""
    out = np.empty((stop - start, 2))
    for i, t in enumerate(range(start, stop)):
        gv, gz = _draw_link(n_a, n_b, n_e, RngStream(seed, t).generator())
        out[i, 0] = gram_log_volume(gv)
        out[i, 1] = spectral_norm_sq(gz)
    return out


def _exact_infinite(n_a, n_b, n_e, d, pvs, seed, fixed_norm, start, stop):
    """Per trial and key power: whether the exact count ``D`` falls below ``d``."""
    out = np.zeros((stop - start, len(pvs)), dtype=bool)
    for i, t in enumerate(range(start, stop)):
        for j, pv in enumerate(pvs):
            gen = RngStream(seed, t).generator()
            gv, gz = _draw_link(n_a, n_b, n_e, gen)
            u = sample_plain(n_b, 16, gen)
            v = sample_key_ball(n_a - n_b, pv, gen, fixed_norm=fixed_norm)
            y = gv @ u + gz @ v
            radius = math.sqrt(spectral_norm_sq(gz) * pv)
            out[i, j] = count_in_sphere(EveLattice(gv), y, radius, limit=d) < d
    return out


def _finite_runs(n_a, n_b, n_e, d, pv, m, b_max, seed, fixed_norm, start, stop):
    """Per trial: how many leading channel uses (up to ``b_max``) have ``L < d``."""
    side = qam_side(m)
    out = np.zeros(stop - start, dtype=np.int64)
    for i, t in enumerate(range(start, stop)):
        gen = RngStream(seed, t).generator()
        run = 0
        while run < b_max:
            gv, gz = _draw_link(n_a, n_b, n_e, gen)
            u = sample_plain(n_b, side, gen)
            v = sample_key_ball(n_a - n_b, pv, gen, fixed_norm=fixed_norm)
            y = gv @ u + gz @ v
            radius = math.sqrt(spectral_norm_sq(gz) * pv)
            if count_in_sphere(FiniteLattice(EveLattice(gv), m), y, radius, limit=d) >= d:
                break
            run += 1
        out[i] = run
    return out


def _estimate(spec: SweepSpec, value, pv, m, b, successes, elapsed, mode) -> OutageEstimate:
    lo, hi = wilson_interval(successes, spec.trials)
    return OutageEstimate(
        sweep_param=spec.param, sweep_value=value, n_a=spec.n_a, n_b=spec.n_b, n_e=spec.n_e,
        pv=pv, m=m, b=b, d=spec.d, trials=spec.trials, successes=int(successes),
        p_hat=successes / spec.trials, ci_low=lo, ci_high=hi, mode=mode, seed=spec.seed,
        elapsed_s=elapsed,
    )


def estimate_p_out_infinite(spec: SweepSpec, workers: int = 1) -> list[OutageEstimate]:
    """Estimate ``P_out(d) = Pr{D < d}`` at each grid point.

    ``approx`` mode thresholds the volume-ratio estimate of ``D`` (only the
    channels are drawn); ``exact`` mode also draws a message and key and
    counts ``D`` exactly, which is supported for ``N_B <= 2``.
    """
    if spec.param not in ("eps", "pv"):
        raise DomainError("infinite-constellation sweeps vary eps or pv")
    t0 = time.perf_counter()
    pvs = [spec.point(v)[0] for v in spec.values]
    if spec.mode == "approx":
        stats = _map_trials(_channel_stats, (spec.n_a, spec.n_b, spec.n_e, spec.seed), spec.trials, workers)
        r_eff = effective_radius_from_log_volume(stats[:, 0], spec.n_b)
        hits = [int(np.sum(approx_d(np.sqrt(stats[:, 1] * pv), r_eff, spec.n_b) < spec.d)) for pv in pvs]
    elif spec.mode == "exact":
        if spec.n_b > 2:
            raise ResourceError("exact counting of D is limited to N_B <= 2")
        flags = _map_trials(
            _exact_infinite,
            (spec.n_a, spec.n_b, spec.n_e, spec.d, pvs, spec.seed, spec.fixed_norm),
            spec.trials, workers,
        )
        hits = [int(c) for c in flags.sum(axis=0)]
    else:
        raise DomainError(f"unknown mode {spec.mode!r} for the infinite constellation")
    elapsed = (time.perf_counter() - t0) / len(pvs)
    return [
        _estimate(spec, value, pv, None, 1, s, elapsed, spec.mode)
        for value, pv, s in zip(spec.values, pvs, hits)
    ]


def estimate_pf_out_finite(spec: SweepSpec, workers: int = 1) -> list[OutageEstimate]:
    """Estimate ``P_F,out(d, B) = Pr{L_1 < d, ..., L_B < d}`` at each grid point.

    ``direct`` mode draws ``B`` independent channel uses per trial;
    ``factorized`` mode estimates ``Pr{L < d}`` from single uses and raises
    it (and its Wilson bounds) to the power ``B``. In factorized rows
    ``successes`` counts single-use outages.
    """
    if spec.mode not in ("direct", "factorized"):
        raise DomainError(f"unknown mode {spec.mode!r} for a finite constellation")
    points = [spec.point(v) for v in spec.values]
    if any(m is None for _, m, _ in points):
        raise DomainError("finite sweeps need a QAM size m")
    results: list[OutageEstimate] = []
    cache: dict = {}
    for value, (pv, m, b) in zip(spec.values, points):
        t0 = time.perf_counter()
        b_max = max(bb for _, _, bb in points) if spec.param == "b" else b
        if spec.mode == "factorized":
            b_max = 1
        key = (pv, m, b_max)
        if key not in cache:
            cache[key] = _map_trials(
                _finite_runs,
                (spec.n_a, spec.n_b, spec.n_e, spec.d, pv, m, b_max, spec.seed, spec.fixed_norm),
                spec.trials, workers,
            )
        runs = cache[key]
        if spec.mode == "direct":
            est = _estimate(spec, value, pv, m, b, int(np.sum(runs >= b)), None, "direct")
        else:
            s = int(np.sum(runs >= 1))
            lo, hi = wilson_interval(s, spec.trials)
            est = _estimate(spec, value, pv, m, b, s, None, "factorized")
            est.p_hat, est.ci_low, est.ci_high = (s / spec.trials) ** b, lo**b, hi**b
        est.elapsed_s = time.perf_counter() - t0
        results.append(est)
    return results


@dataclass
class BoundCheck:
    """Empirical probability against an analytic bound at one grid point.

    ``kind`` is ``upper`` when the bound should dominate the probability and
    ``lower`` when the probability should dominate the bound; a violation is
    declared only when the whole 95% interval lies on the wrong side.
    """

    lemma: str
    x: float
    pv: float
    trials: int
    successes: int
    empirical: float
    ci_low: float
    ci_high: float
    bound: float
    kind: str

    @property
    def ok(self) -> bool:
        if self.kind == "upper":
            return self.ci_low <= self.bound
        return self.ci_high >= self.bound


def _check(lemma, x, pv, successes, trials, bound, kind) -> BoundCheck:
    lo, hi = wilson_interval(successes, trials)
    return BoundCheck(lemma, float(x), pv, trials, int(successes), successes / trials, lo, hi, bound, kind)


def validate_lemma2(params: BoundParams, ratios=(1.5, 2.0, 3.0), trials: int = 10_000,
                    seed: int = 0, workers: int = 1) -> list[BoundCheck]:
    """Check ``Pr{Delta(d) > x^(-N_B)} <= Upsilon(x)`` for ``x = rho/kappa(d)``.

    At each ratio the key power is ``rho^2 / Phi^(2 N_B / N_E)``.
    """
    stats = _map_trials(_channel_stats, (params.n_a, params.n_b, params.n_e, seed), trials, workers)
    k = kappa(params.d, params.n_e)
    out = []
    for x in ratios:
        pv = (x * k) ** 2 / phi(params.n_b, params.n_e) ** (2.0 * params.n_b / params.n_e)
        deltas = np.array([delta(params.d, pv, lv, params.n_e) for lv in stats[:, 0]])
        hits = int(np.sum(deltas > x ** (-params.n_b)))
        out.append(_check("lemma2", x, pv, hits, trials, upsilon(x, params.n_b, params.n_e), "upper"))
    return out


def validate_lemma3(params: BoundParams, ratios=(1.5, 2.0, 3.0), trials: int = 10_000,
                    seed: int = 0, workers: int = 1, mode: str | None = None) -> list[BoundCheck]:
    """Check the finite-N_B bound on ``F_D(d, pv) = Pr{D < d}``.

    ``D`` is counted exactly for ``N_B <= 2`` and through the volume-ratio
    estimate otherwise (override with ``mode``).
    """
    mode = mode or ("exact" if params.n_b <= 2 else "approx")
    k = kappa(params.d, params.n_e)
    pvs = [(x * k) ** 2 / phi(params.n_b, params.n_e) ** (2.0 * params.n_b / params.n_e) for x in ratios]
    spec = SweepSpec(params.n_a, params.n_b, params.n_e, "pv", tuple(pvs), trials, d=params.d,
                     mode=mode, seed=seed)
    est = estimate_p_out_infinite(spec, workers=workers)
    return [
        _check("lemma3", x, e.pv, e.successes, trials, fd_upper_bound(x, params.n_b, params.n_e), "upper")
        for x, e in zip(ratios, est)
    ]


def validate_lemma4(params: BoundParams, pv: float, m: int, xs=(0.5, 1.0, 1.5, 2.0, 3.0),
                    trials: int = 10_000, seed: int = 0, workers: int = 1) -> list[BoundCheck]:
    """Check ``Pr{Theta(pv) < x}`` against the beta-function lower bound."""
    stats = _map_trials(_channel_stats, (params.n_a, params.n_b, params.n_e, seed), trials, workers)
    r_eff = effective_radius_from_log_volume(stats[:, 0], params.n_b)
    thetas = 2.0 * np.sqrt(stats[:, 1] * pv) / (math.sqrt(m) * r_eff)
    return [
        _check("lemma4", x, pv, int(np.sum(thetas < x)), trials,
               lemma4_cdf_lower_bound(x, params, pv, m), "lower")
        for x in xs
    ]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit_csv(results, destination, timing: bool = True) -> None:
    """Write estimates as CSV with the fixed column schema.

    ``destination`` is a path or an open text stream. With ``timing=False``
    the ``elapsed_s`` column is left empty so output is reproducible byte
    for byte.
    """
    results = list(results)
    if not results:
        raise DomainError("no results to write")

    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in results:
            row = [getattr(r, c) for c in CSV_COLUMNS]
            if not timing:
                row[-1] = None
            w.writerow([_fmt(v) for v in row])

    if hasattr(destination, "write"):
        write(destination)
        return
    try:
        with open(destination, "w", newline="") as fh:
            write(fh)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {os.fspath(destination)!r}: {exc}") from exc


_INT = {"n_a", "n_b", "n_e", "b", "d", "trials", "successes", "seed"}


def _parse(name: str, text: str):
    if name in ("sweep_param", "mode"):
        return text
    if text == "":
        return None
    if name in _INT or name == "m":
        return int(text)
    if name == "sweep_value":
        return int(text) if text.lstrip("-").isdigit() else float(text)
    return float(text)


def read_csv(path) -> list[OutageEstimate]:
    """Parse a file written by :func:`emit_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = tuple(rows[0])
    if header != CSV_COLUMNS:
        raise DomainError(f"unexpected CSV header {header}")
    names = [f.name for f in fields(OutageEstimate)]
    return [OutageEstimate(**{n: _parse(n, row[header.index(n)]) for n in names}) for row in rows[1:]]
