"""
Geometry of Eve's lattice: effective radius, R_max, exact sphere counts,
the volume-ratio estimate of the key-space size, effective key indices and
equivocation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _enum
from .errors import DimensionError, DomainError, ResourceError
from .matrix import gram_log_volume, real_embedding, spectral_norm_sq

DEFAULT_BUDGET = 10**8
BOUNDARY_SLACK = 1e-9

__all__ = [
    "EveLattice",
    "FiniteLattice",
    "effective_radius",
    "effective_radius_from_log_volume",
    "r_max",
    "count_in_sphere",
    "approx_d",
    "effective_key_index",
    "equivocation_bits",
    "qam_side",
]


def qam_side(m: int) -> int:
    """Levels per real coordinate of a square M-QAM."""
    side = math.isqrt(int(m))
    if m < 4 or side * side != m:
        raise DomainError(f"QAM size must be a perfect square >= 4, got {m}")
    return side


@dataclass(frozen=True, eq=False)
class EveLattice:
    """The lattice ``{basis @ u : u in Z[i]^N_B}`` seen by Eve."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] < b.shape[1]:
            raise DimensionError(f"basis must be N_E x N_B with N_E >= N_B, got {b.shape}")
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_channel(cls, g, v1) -> "EveLattice":
        return cls(np.asarray(g) @ np.asarray(v1))

    @property
    def n_b(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def log_volume(self) -> float:
        return gram_log_volume(self.basis)

    @cached_property
    def _qr(self):
        return np.linalg.qr(real_embedding(self.basis))

    def point(self, u) -> np.ndarray:
        return self.basis @ np.asarray(u, dtype=complex)


@dataclass(frozen=True, eq=False)
class FiniteLattice:
    """Finite constellation ``{basis @ u : u in Q~^N_B}`` of an M-QAM."""

    lattice: EveLattice
    m: int

    def __post_init__(self):
        qam_side(self.m)

    @property
    def side(self) -> int:
        return qam_side(self.m)

    @property
    def size(self) -> int:
        return self.m**self.lattice.n_b


def _unwrap(lat):
    if isinstance(lat, FiniteLattice):
        n = 2 * lat.lattice.n_b
        return lat.lattice, np.zeros(n), np.full(n, float(lat.side - 1))
    n = 2 * lat.n_b
    return lat, np.full(n, -np.inf), np.full(n, np.inf)


def effective_radius_from_log_volume(log_volume, n_b: int, mode: str = "paper_approx"):
    """Effective radius for a complex lattice of dimension ``n_b``.

    ``paper_approx`` is the large-dimension form ``sqrt(n/(pi e)) vol^(1/2n)``;
    ``exact_ball`` gives the radius of the real ``2n``-ball whose volume
    equals the lattice volume. Works elementwise on arrays.
    """
    log_volume = np.asarray(log_volume, dtype=float)
    if mode == "paper_approx":
        out = math.sqrt(n_b / (math.pi * math.e)) * np.exp(log_volume / (2 * n_b))
    elif mode == "exact_ball":
        out = np.exp((log_volume + math.lgamma(n_b + 1) - n_b * math.log(math.pi)) / (2 * n_b))
    else:
        raise DomainError(f"unknown effective-radius mode {mode!r}")
    return float(out) if out.ndim == 0 else out


def effective_radius(lat: EveLattice, mode: str = "paper_approx") -> float:
    return effective_radius_from_log_volume(lat.log_volume, lat.n_b, mode)


def r_max(gz, pv: float) -> float:
    """Largest displacement ``max ||gz v||`` over keys with ``||v||^2 <= pv``."""
    if not pv > 0:
        raise DomainError(f"peak AN power must be positive, got {pv}")
    return math.sqrt(spectral_norm_sq(gz) * pv)


def approx_d(r_max, r_eff, n_b: int):
    """Volume-ratio estimate ``(r_max / r_eff)^(2 n_b)``, left unrounded."""
    if np.any(np.asarray(r_eff) <= 0):
        raise DomainError("effective radius must be positive")
    out = np.divide(r_max, r_eff) ** (2 * n_b)
    return float(out) if np.ndim(out) == 0 else out


def _box_size(lat):
    return lat.size if isinstance(lat, FiniteLattice) else None


def _reduce(lat: EveLattice, center):
    center = np.asarray(center, dtype=complex).ravel()
    if center.shape[0] != lat.basis.shape[0]:
        raise DimensionError(f"center has length {center.shape[0]}, lattice lives in C^{lat.basis.shape[0]}")
    q_mat, r = lat._qr
    c = np.concatenate([center.real, center.imag])
    q = q_mat.T @ c
    res = max(float(c @ c - q @ q), 0.0)
    return r, q, res


def _check_budget(lat: EveLattice, radius: float, budget: int, box_size: int | None = None):
    # Gaussian-heuristic point count of the ball, capped by the box when bounded
    n = lat.n_b
    if radius <= 0:
        return
    log_pred = n * math.log(math.pi) + 2 * n * math.log(radius) - math.lgamma(n + 1) - lat.log_volume
    if box_size is not None:
        log_pred = min(log_pred, math.log(box_size))
    if log_pred > math.log(budget):
        raise ResourceError(
            f"predicted enumeration of ~{math.exp(min(log_pred, 700)):.3g} points exceeds budget {budget}"
        )


def count_in_sphere(lat, center, radius: float, limit: int | None = None,
                    budget: int = DEFAULT_BUDGET) -> int:
    """Exact number of lattice points within ``radius`` of ``center``.

    Parameters
    ----------
    lat : EveLattice or FiniteLattice
        A :class:`FiniteLattice` restricts coefficients to the QAM box,
        which gives ``L``; the infinite lattice gives ``D``.
    center : array_like
        Sphere centre in ``C^N_E``.
    radius : float
        Sphere radius; the boundary is inclusive with relative slack 1e-9.
    limit : int, optional
        Stop counting once this many points are found.
    budget : int
        Maximum number of enumeration nodes.
    """
    if radius < 0:
        raise DomainError("radius must be non-negative")
    base, lo, hi = _unwrap(lat)
    _check_budget(base, radius, budget, _box_size(lat))
    r, q, res = _reduce(base, center)
    r2 = (radius * (1.0 + BOUNDARY_SLACK)) ** 2 - res
    cap = np.iinfo(np.int64).max if limit is None else int(limit)
    n = _enum.count_points(r, q, r2, lo, hi, cap, budget)
    if n < 0:
        raise ResourceError(f"enumeration exceeded {budget} nodes")
    return int(n)


def _coeffs(u, n_b: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex).ravel()
    if u.shape[0] != n_b:
        raise DimensionError(f"expected {n_b} coefficients, got {u.shape[0]}")
    x = np.concatenate([u.real, u.imag])
    if not np.array_equal(x, np.round(x)):
        raise DomainError("coefficients must be Gaussian integers")
    return x


def effective_key_index(lat, u, y, budget: int = DEFAULT_BUDGET) -> int:
    """Rank of the true point ``basis @ u`` among lattice points by distance to ``y``.

    Returns ``1 + #points strictly closer``; equidistant points are ordered
    lexicographically on ``[Re u; Im u]``. With a :class:`FiniteLattice` only
    constellation points are ranked, giving ``k_F``.
    """
    base, lo, hi = _unwrap(lat)
    x = _coeffs(u, base.n_b)
    if np.any(x < lo) or np.any(x > hi):
        raise DomainError("u lies outside the constellation")
    r, q, _ = _reduce(base, y)
    e = r @ x - q
    d0 = float(e @ e)
    tol = BOUNDARY_SLACK * d0
    _check_budget(base, math.sqrt(d0 + tol), budget, _box_size(lat))
    ahead = _enum.rank_point(r, q, d0 + tol, lo, hi, x, d0, tol, budget)
    if ahead < 0:
        raise ResourceError(f"enumeration exceeded {budget} nodes")
    return int(ahead) + 1


def equivocation_bits(weights=None, count: int | None = None) -> float:
    """Entropy in bits of the posterior over Eve's candidate set.

    Pass prior ``weights`` of the candidates, or ``count`` for a uniform
    prior over that many candidates.
    """
    if count is not None:
        if count < 1:
            raise DomainError("candidate set is empty")
        return math.log2(count)
    if weights is None:
        raise DomainError("need weights or count")
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or np.any(w < 0) or not np.any(w > 0):
        raise DomainError("weights must be non-negative and not all zero")
    prob = w / w.sum()
    prob = prob[prob > 0]
    return float(-np.sum(prob * np.log2(prob)))
