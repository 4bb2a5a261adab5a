"""
The encryption pipeline: bits to QAM coordinates, artificial-noise
encryption, Bob's and Eve's observations and Bob's zero-forcing decoder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, RankError
from .lattice import (
    EveLattice,
    FiniteLattice,
    count_in_sphere,
    effective_key_index,
    qam_side,
    r_max,
)
from .matrix import (
    RANK_TOL,
    Precoder,
    RngStream,
    sample_complex_gaussian,
    sample_key_ball,
    svd_split,
)

__all__ = [
    "UskConfig",
    "CryptogramSample",
    "map_bits",
    "unmap_bits",
    "sample_plain",
    "encrypt",
    "eve_observe",
    "bob_observe",
    "bob_decode",
    "simulate_cryptogram",
]


@dataclass(frozen=True)
class UskConfig:
    """Antenna counts, key power and constellation of one USK link.

    ``m=None`` selects the infinite constellation ``Z[i]^N_B``; messages are
    then drawn uniformly from the box ``{0..prior_side-1}`` per coordinate.
    Eve's channel is always noiseless.
    """

    n_a: int
    n_b: int
    n_e: int
    pv: float
    m: int | None = None
    sigma_b: float = 0.0
    seed: int = 0
    prior_side: int = 16

    def __post_init__(self):
        validate_dimensions(self.n_a, self.n_b, self.n_e)
        if not self.pv > 0:
            raise DomainError(f"pv must be positive, got {self.pv}")
        if self.m is not None:
            qam_side(self.m)
        if self.sigma_b < 0:
            raise DomainError("sigma_b must be non-negative")
        if self.prior_side < 1:
            raise DomainError("prior_side must be >= 1")

    @property
    def finite(self) -> bool:
        return self.m is not None


def validate_dimensions(n_a: int, n_b: int, n_e: int) -> None:
    if min(n_a, n_b, n_e) < 1:
        raise DimensionError("antenna counts must be >= 1")
    if not n_a > n_b:
        raise DimensionError(f"requires N_A > N_B (got N_A={n_a}, N_B={n_b})")
    if not n_a > n_e:
        raise DimensionError(f"requires N_A > N_E (got N_A={n_a}, N_E={n_e})")
    if not n_e >= n_b:
        raise DimensionError(f"requires N_E >= N_B (got N_E={n_e}, N_B={n_b})")


@dataclass
class CryptogramSample:
    u: np.ndarray
    v: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    k: int
    d_count: int
    r_max: float
    k_f: int | None = None
    l_count: int | None = None
    u_hat: np.ndarray = field(default=None, repr=False)


def map_bits(bits, m: int, n_b: int) -> np.ndarray:
    """Pack a bit string into ``B`` vectors of ``Q~^N_B``.

    Each component consumes ``log2 M`` bits: the first half gives the real
    coordinate and the second half the imaginary one, least significant bit
    first. Returns a complex array of shape ``(B, n_b)``.
    """
    side = qam_side(m)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise DomainError("bits must be 0 or 1")
    half = side.bit_length() - 1
    per_vec = 2 * half * n_b
    if bits.size == 0 or bits.size % per_vec:
        raise DimensionError(f"bit count {bits.size} is not a positive multiple of N_B*log2(M)={per_vec}")
    coords = bits.reshape(-1, n_b, 2, half) @ (1 << np.arange(half))
    return coords[..., 0] + 1j * coords[..., 1]


def unmap_bits(u, m: int) -> np.ndarray:
    """Inverse of :func:`map_bits`."""
    side = qam_side(m)
    half = side.bit_length() - 1
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    coords = np.stack([u.real, u.imag], axis=-1).astype(np.int64)
    if np.any(coords < 0) or np.any(coords >= side):
        raise DomainError("symbols lie outside the constellation")
    bits = (coords[..., None] >> np.arange(half)) & 1
    return bits.reshape(-1).astype(np.uint8)


def sample_plain(n_b: int, side: int, rng) -> np.ndarray:
    """Uniform message over ``{0..side-1}^2`` per component."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    c = gen.integers(0, side, size=2 * n_b)
    return c[:n_b] + 1j * c[n_b:]


def encrypt(u, v, p: Precoder) -> np.ndarray:
    """Transmit vector ``x = V1 u + Z v``."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape[0] != p.v1.shape[1] or v.shape[0] != p.z.shape[1]:
        raise DimensionError(
            f"u has {u.shape[0]} entries (need {p.v1.shape[1]}), v has {v.shape[0]} (need {p.z.shape[1]})"
        )
    return p.v1 @ u + p.z @ v


def eve_observe(g, x) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    x = np.asarray(x, dtype=complex).ravel()
    if g.ndim != 2 or g.shape[1] != x.shape[0]:
        raise DimensionError(f"G has shape {g.shape}, x has length {x.shape[0]}")
    return g @ x


def bob_observe(h, x, sigma_b: float, rng) -> np.ndarray:
    """``z = H x + n_B`` with ``n_B ~ CN(0, sigma_b I)``."""
    h = np.asarray(h, dtype=complex)
    x = np.asarray(x, dtype=complex).ravel()
    if h.ndim != 2 or h.shape[1] != x.shape[0]:
        raise DimensionError(f"H has shape {h.shape}, x has length {x.shape[0]}")
    if sigma_b < 0:
        raise DomainError("sigma_b must be non-negative")
    noise = sample_complex_gaussian(h.shape[0], 1, rng)[:, 0]
    return h @ x + math.sqrt(sigma_b) * noise


def bob_decode(z, h, p: Precoder, m: int | None = None) -> np.ndarray:
    """Zero-forcing estimate of ``u``: invert ``H V1``, then round.

    With a finite ``m`` each coordinate is clamped to ``{0..sqrt(M)-1}``.
    """
    a = np.asarray(h, dtype=complex) @ p.v1
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankError("H V1 is numerically singular")
    est = np.linalg.lstsq(a, np.asarray(z, dtype=complex).ravel(), rcond=None)[0]
    re, im = np.round(est.real), np.round(est.imag)
    if m is not None:
        top = qam_side(m) - 1
        re, im = np.clip(re, 0, top), np.clip(im, 0, top)
    return re + 1j * im


def simulate_cryptogram(cfg: UskConfig, stream: RngStream | None = None,
                        fixed_norm: bool = False) -> CryptogramSample:
    """Run one encryption event end to end and measure Eve's key space.

    Draws ``H``, ``G``, the message and the key from ``stream`` (default
    ``RngStream(cfg.seed, 0)``), then counts ``D`` (and ``L`` for a finite
    constellation) at radius ``R_max`` and locates the effective key index.
    """
    gen = (stream or RngStream(cfg.seed, 0)).generator()
    h = sample_complex_gaussian(cfg.n_b, cfg.n_a, gen)
    g = sample_complex_gaussian(cfg.n_e, cfg.n_a, gen)
    side = qam_side(cfg.m) if cfg.finite else cfg.prior_side
    u = sample_plain(cfg.n_b, side, gen)
    v = sample_key_ball(cfg.n_a - cfg.n_b, cfg.pv, gen, fixed_norm=fixed_norm)
    p = svd_split(h)
    x = encrypt(u, v, p)
    y = eve_observe(g, x)
    z = bob_observe(h, x, cfg.sigma_b, gen)
    lat = EveLattice.from_channel(g, p.v1)
    radius = r_max(g @ p.z, cfg.pv)
    sample = CryptogramSample(
        u=u, v=v, x=x, y=y, z=z,
        k=effective_key_index(lat, u, y),
        d_count=count_in_sphere(lat, y, radius),
        r_max=radius,
    )
    if cfg.finite:
        flat = FiniteLattice(lat, cfg.m)
        sample.k_f = effective_key_index(flat, u, y)
        sample.l_count = count_in_sphere(flat, y, radius)
    sample.u_hat = bob_decode(z, h, p, cfg.m)
    return sample
