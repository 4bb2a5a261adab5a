"""
Complex-matrix kernels: null-space split of the legitimate channel, Gram
log-volumes, spectral norms and seeded sampling of channels and keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, RankError

RANK_TOL = 1e-12

__all__ = [
    "RngStream",
    "Precoder",
    "svd_split",
    "gram_log_volume",
    "spectral_norm_sq",
    "sample_complex_gaussian",
    "sample_key_ball",
    "real_embedding",
]


@dataclass(frozen=True)
class RngStream:
    """Counter-style random stream keyed by ``(seed, stream_id)``.

    Two streams with the same pair always yield the same draws, and
    distinct ``stream_id`` values give statistically independent draws, so
    trials may be evaluated in any order or on any worker.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise DomainError("seed and stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.stream_id]))

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


@dataclass(frozen=True)
class Precoder:
    """Orthonormal pair ``(v1, z)`` with ``h @ z == 0``.

    ``v1`` spans the row space of the channel (N_A x N_B) and ``z`` its null
    space (N_A x (N_A - N_B)).
    """

    v1: np.ndarray
    z: np.ndarray

    @property
    def n_a(self) -> int:
        return self.v1.shape[0]

    @property
    def n_b(self) -> int:
        return self.v1.shape[1]


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    return a


def svd_split(h) -> Precoder:
    """Split the right-singular basis of ``h`` into signal and null parts.

    Parameters
    ----------
    h : array_like, shape (N_B, N_A)
        Bob's channel, with N_A > N_B and full row rank.

    Returns
    -------
    Precoder
        ``v1`` holds the first N_B right-singular vectors and ``z`` the
        remaining N_A - N_B, so that ``h @ z`` vanishes.
    """
    h = _as_matrix(h)
    n_b, n_a = h.shape
    if n_a <= n_b:
        raise DimensionError(f"null-space precoding needs N_A > N_B (got N_A={n_a}, N_B={n_b})")
    _, s, vh = np.linalg.svd(h)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankError("channel matrix is numerically rank deficient")
    v = vh.conj().T
    return Precoder(v1=v[:, :n_b], z=v[:, n_b:])


def gram_log_volume(a) -> float:
    """Return ``log|det(a^H a)|``, accumulated from singular values."""
    a = _as_matrix(a)
    if a.shape[0] < a.shape[1]:
        raise RankError("more columns than rows; Gram matrix is singular")
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankError("matrix does not have full column rank")
    return float(2.0 * np.sum(np.log(s)))


def spectral_norm_sq(a) -> float:
    """Largest eigenvalue of ``a^H a``."""
    a = _as_matrix(a)
    return float(np.linalg.norm(a, 2) ** 2)


def sample_complex_gaussian(rows: int, cols: int, rng) -> np.ndarray:
    """Draw a ``rows x cols`` matrix of i.i.d. CN(0, 1) entries.

    ``rng`` may be an :class:`RngStream` or an existing numpy Generator;
    passing a Generator lets callers draw several quantities from one stream.
    """
    if rows < 1 or cols < 1:
        raise DimensionError("rows and cols must be >= 1")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    x = gen.standard_normal((rows, 2 * cols))
    return (x[:, :cols] + 1j * x[:, cols:]) * math.sqrt(0.5)


def sample_key_ball(dim: int, pv: float, rng, fixed_norm: bool = False) -> np.ndarray:
    """Draw an artificial-noise key ``v`` with ``||v||^2 <= pv``.

    By default ``v`` is uniform over the complex ball of radius ``sqrt(pv)``
    (real dimension ``2*dim``). With ``fixed_norm`` the key lies on the
    sphere, ``||v||^2 == pv``.
    """
    if dim < 1:
        raise DimensionError("key dimension must be >= 1")
    if not pv > 0:
        raise DomainError(f"peak AN power must be positive, got {pv}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    g = gen.standard_normal(2 * dim)
    # norm is a.s. positive; guard the zero vector anyway
    nrm = np.linalg.norm(g)
    while nrm == 0.0:
        g = gen.standard_normal(2 * dim)
        nrm = np.linalg.norm(g)
    g /= nrm
    radius = math.sqrt(pv)
    if not fixed_norm:
        radius *= gen.random() ** (1.0 / (2 * dim))
    v = (g[:dim] + 1j * g[dim:]) * radius
    if fixed_norm:
        return v
    # rounding can push the norm a hair above the radius
    n2 = float(np.vdot(v, v).real)
    if n2 > pv:
        v *= math.sqrt(pv / n2)
    return v


def real_embedding(b) -> np.ndarray:
    """Map a complex ``m x n`` basis to its real ``2m x 2n`` counterpart.

    Coefficients are ordered ``[Re u; Im u]`` and observations
    ``[Re y; Im y]``.
    """
    b = np.asarray(b, dtype=complex)
    return np.block([[b.real, -b.imag], [b.imag, b.real]])
