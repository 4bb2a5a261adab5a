import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from usk.errors import DomainError, ResourceError
from usk.lattice import (
    EveLattice,
    FiniteLattice,
    approx_d,
    count_in_sphere,
    effective_key_index,
    effective_radius,
    equivocation_bits,
    r_max,
)
from usk.matrix import gram_log_volume

from conftest import brute_count, brute_rank, cgauss, oracle_half_width


def test_lattice_caches_log_volume(rng):
    b = cgauss(rng, 3, 2)
    lat = EveLattice(b)
    assert lat.log_volume == pytest.approx(gram_log_volume(b), abs=1e-9)
    assert FiniteLattice(lat, 16).size == 256


def test_effective_radius_unit_lattice():
    lat = EveLattice(np.eye(1))
    assert effective_radius(lat, "exact_ball") == pytest.approx(1 / math.sqrt(math.pi))
    assert effective_radius(lat, "paper_approx") == pytest.approx(0.34219, abs=1e-5)
    assert effective_radius(lat, "paper_approx") == pytest.approx(math.sqrt(1 / (math.pi * math.e)), rel=1e-14)


@pytest.mark.parametrize("mode", ["paper_approx", "exact_ball"])
def test_effective_radius_homogeneous(rng, mode):
    b = cgauss(rng, 4, 2)
    c = 1.7 * np.exp(0.3j)
    assert effective_radius(EveLattice(c * b), mode) == pytest.approx(abs(c) * effective_radius(EveLattice(b), mode))


def test_exact_ball_radius_volume(rng):
    lat = EveLattice(cgauss(rng, 3, 2))
    r = effective_radius(lat, "exact_ball")
    # real 4-ball volume pi^2 r^4 / 2
    assert math.log(math.pi**2 * r**4 / 2) == pytest.approx(lat.log_volume)


def test_r_max_examples(rng):
    assert r_max(np.eye(2), 4.0) == pytest.approx(2.0)
    assert r_max(np.diag([1.0, 3.0]), 1.0) == pytest.approx(3.0)
    gz = cgauss(rng, 3, 2)
    rm = r_max(gz, 2.0)
    v = cgauss(rng, 10_000, 2)
    v *= math.sqrt(2.0) / np.linalg.norm(v, axis=1, keepdims=True)
    assert np.all(np.linalg.norm(v @ gz.T, axis=1) <= rm * (1 + 1e-12))
    top = np.linalg.svd(gz)[2][0].conj() * math.sqrt(2.0)
    assert np.linalg.norm(gz @ top) == pytest.approx(rm, rel=1e-9)
    with pytest.raises(DomainError):
        r_max(gz, 0.0)


def test_count_trivial_cases():
    lat = EveLattice(np.eye(1))
    assert count_in_sphere(lat, [0], 0.0) == 1
    assert count_in_sphere(lat, [0], 1.0) == 5
    assert count_in_sphere(lat, [0], 1.0) == brute_count(np.eye(1, dtype=complex), np.zeros(1), 1.0, half_width=2)


def test_count_random_against_box_oracle(rng):
    for _ in range(50):
        b = cgauss(rng, 3, 2)
        c = cgauss(rng, 3) * 2
        radius = 2 * effective_radius(EveLattice(b))
        hw = oracle_half_width(b, c, radius)
        assert count_in_sphere(EveLattice(b), c, radius) == brute_count(b, c, radius, half_width=hw)


def test_count_limit_and_budget(rng):
    b = cgauss(rng, 3, 2)
    lat = EveLattice(b)
    full = count_in_sphere(lat, np.zeros(3), 3.0)
    assert count_in_sphere(lat, np.zeros(3), 3.0, limit=2) == min(full, 2)
    with pytest.raises(ResourceError):
        count_in_sphere(lat, np.zeros(3), 1e4, budget=1000)
    with pytest.raises(ResourceError):
        # heuristic passes, node budget does not
        count_in_sphere(lat, np.zeros(3), 3.0, budget=max(full // 10, 1))


def test_count_bounded_whole_box(rng):
    b = cgauss(rng, 3, 2)
    assert count_in_sphere(FiniteLattice(EveLattice(b), 16), cgauss(rng, 3), 1e3) == 16**2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_count_monotone_and_bounded_le_unbounded(seed):
    gen = np.random.default_rng(seed)
    b = cgauss(gen, 3, 2)
    lat = EveLattice(b)
    flat = FiniteLattice(lat, 16)
    u = gen.integers(0, 4, 2) + 1j * gen.integers(0, 4, 2)
    c = b @ u + 0.3 * cgauss(gen, 3)
    prev_inf = prev_fin = 0
    for radius in np.linspace(0.0, 4.0, 9):
        n_inf = count_in_sphere(lat, c, radius)
        n_fin = count_in_sphere(flat, c, radius)
        assert n_fin <= n_inf
        assert n_inf >= prev_inf and n_fin >= prev_fin
        if radius >= np.linalg.norm(c - b @ u):
            assert n_fin >= 1
        prev_inf, prev_fin = n_inf, n_fin


def test_approx_d_examples():
    assert approx_d(1.3, 1.3, 3) == pytest.approx(1.0)
    assert approx_d(2.0, 1.0, 4) == pytest.approx(256.0)
    with pytest.raises(DomainError):
        approx_d(1.0, 0.0, 2)


def test_approx_d_tracks_exact_count():
    # Gaussian heuristic with the exact-ball radius: within a factor 2 once D >= 100
    gen = np.random.default_rng(4)
    checked = 0
    while checked < 20:
        b = cgauss(gen, 3, 2)
        gz = cgauss(gen, 3, 2)
        lat = EveLattice(b)
        y = b @ (gen.integers(-3, 4, 2) + 0j) + gz @ (0.5 * cgauss(gen, 2))
        pv = 40.0
        rm = r_max(gz, pv)
        exact = count_in_sphere(lat, y, rm)
        if exact < 100:
            continue
        est = approx_d(rm, effective_radius(lat, "exact_ball"), 2)
        assert 0.5 <= est / exact <= 2.0
        checked += 1


def test_key_index_zero_key(rng):
    b = cgauss(rng, 3, 2)
    u = np.array([2 - 1j, -3 + 0j])
    assert effective_key_index(EveLattice(b), u, b @ u) == 1


def test_key_index_bounded_by_count(rng):
    for _ in range(30):
        b, gz = cgauss(rng, 3, 2), cgauss(rng, 3, 2)
        u = rng.integers(0, 4, 2) + 1j * rng.integers(0, 4, 2)
        v = cgauss(rng, 2)
        v *= 1.5 / np.linalg.norm(v)
        y = b @ u + gz @ v
        lat = EveLattice(b)
        rm = r_max(gz, 1.5**2)
        k = effective_key_index(lat, u, y)
        assert 1 <= k <= count_in_sphere(lat, y, np.linalg.norm(y - b @ u))
        assert k <= count_in_sphere(lat, y, rm)
        kf = effective_key_index(FiniteLattice(lat, 16), u, y)
        assert 1 <= kf <= k


def test_key_index_against_sort_oracle(rng):
    for _ in range(30):
        b = cgauss(rng, 3, 2)
        u = rng.integers(-2, 3, 2) + 1j * rng.integers(-2, 3, 2)
        y = b @ u + cgauss(rng, 3) * 1.2
        d = np.linalg.norm(y - b @ u)
        hw = oracle_half_width(b, y, d)
        assert effective_key_index(EveLattice(b), u, y) == brute_rank(b, u, y, half_width=hw)


def test_key_index_ties_lexicographic():
    # y halfway between 0 and 1: the point with the smaller coefficient ranks first
    lat = EveLattice(np.eye(1))
    assert effective_key_index(lat, np.array([0j]), np.array([0.5])) == 1
    assert effective_key_index(lat, np.array([1 + 0j]), np.array([0.5])) == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0, 2 * math.pi))
def test_key_index_invariances(seed, angle):
    gen = np.random.default_rng(seed)
    b = cgauss(gen, 3, 2)
    u = gen.integers(-2, 3, 2) + 1j * gen.integers(-2, 3, 2)
    y = b @ u + cgauss(gen, 3)
    k = effective_key_index(EveLattice(b), u, y)
    shift = gen.integers(-3, 4, 2) + 1j * gen.integers(-3, 4, 2)
    assert effective_key_index(EveLattice(b), u + shift, y + b @ shift) == k
    rot = np.exp(1j * angle)
    assert effective_key_index(EveLattice(rot * b), u, rot * y) == k


def test_equivocation_examples():
    assert equivocation_bits(count=1) == 0.0
    assert equivocation_bits(count=4) == pytest.approx(2.0)
    assert equivocation_bits([1, 1, 2]) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        equivocation_bits([])
    with pytest.raises(DomainError):
        equivocation_bits(count=0)


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=50).filter(lambda w: sum(w) > 0))
def test_equivocation_range(w):
    h = equivocation_bits(w)
    assert -1e-12 <= h <= math.log2(len(w)) + 1e-9


@given(st.integers(1, 10**6))
def test_equivocation_uniform_exact(n):
    assert equivocation_bits(count=n) == math.log2(n)
    assert equivocation_bits(np.ones(min(n, 1000))) == pytest.approx(math.log2(min(n, 1000)))
