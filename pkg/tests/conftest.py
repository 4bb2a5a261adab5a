import numpy as np
import pytest

from usk.matrix import RngStream, sample_complex_gaussian


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def box_points(n_b, lo, hi):
    """All Gaussian-integer vectors with every real coordinate in [lo, hi]."""
    axis = np.arange(lo, hi + 1, dtype=float)
    grid = np.stack(np.meshgrid(*([axis] * (2 * n_b)), indexing="ij"), axis=-1).reshape(-1, 2 * n_b)
    return grid[:, :n_b] + 1j * grid[:, n_b:]


def brute_count(basis, center, radius, half_width=None, side=None):
    """Oracle: scan a box of coefficients and count points in the closed ball."""
    n_b = basis.shape[1]
    if side is not None:
        pts = box_points(n_b, 0, side - 1)
    else:
        pts = box_points(n_b, -half_width, half_width)
    dist = np.linalg.norm(pts @ basis.T - center, axis=1)
    return int(np.sum(dist <= radius * (1 + 1e-9)))


def oracle_half_width(basis, center, radius):
    smin = np.linalg.svd(basis, compute_uv=False)[-1]
    return int(np.ceil((radius + np.linalg.norm(center)) / smin))


def brute_rank(basis, u, y, half_width=None, side=None):
    """Oracle: sort all box points by distance, ties by [Re u; Im u]."""
    n_b = basis.shape[1]
    pts = box_points(n_b, 0, side - 1) if side is not None else box_points(n_b, -half_width, half_width)
    d = np.sum(np.abs(pts @ basis.T - y) ** 2, axis=1)
    d0 = float(np.sum(np.abs(basis @ u - y) ** 2))
    keys = np.concatenate([pts.real, pts.imag], axis=1)
    key_u = np.concatenate([u.real, u.imag])
    others = ~np.all(keys == key_u, axis=1)
    ahead = int(np.sum(others & (d < d0 * (1 - 1e-9))))
    for key in keys[others & (np.abs(d - d0) <= 1e-9 * d0)]:
        if tuple(key) < tuple(key_u):
            ahead += 1
    return ahead + 1
