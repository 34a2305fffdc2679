"""Lattice-module tests: Moebius function, direction enumeration, inversion."""

import math
from fractions import Fraction

import numpy as np
import pytest

from convexlines.errors import DomainError, ResourceError
from convexlines.lattice import (
    Direction,
    box_directions,
    enumerate_directions,
    excluded_mass_bound,
    mobius,
    mobius_range,
    zeta_reciprocal,
)
from convexlines.series import uniform_spec


def brute_mobius(m: int) -> int:
    if m == 1:
        return 1
    sign, d = 1, 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            sign = -sign
        d += 1
    return -sign if m > 1 else sign


class TestMobius:
    def test_base_values(self):
        assert mobius(1) == 1
        assert mobius(12) == 0  # 2^2 * 3
        assert mobius(30) == -1  # 2 * 3 * 5

    def test_against_brute_force(self):
        for m in range(1, 2000):
            assert mobius(m) == brute_mobius(m), m

    def test_beyond_sieve_cap(self):
        # exercised through the trial-division branch
        assert mobius(1_000_003) == brute_mobius(1_000_003)
        assert mobius(1_000_004) == brute_mobius(1_000_004)

    def test_multiplicative_on_coprime(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            a = int(rng.integers(1, 500))
            b = int(rng.integers(1, 500))
            if math.gcd(a, b) == 1:
                assert mobius(a * b) == mobius(a) * mobius(b)

    def test_divisor_sum_identity(self):
        # sum_{d|m} mu(d) = [m == 1]
        mu = mobius_range(10_000)
        sums = np.zeros(10_001, dtype=np.int64)
        for d in range(1, 10_001):
            sums[d::d] += mu[d]
        assert sums[1] == 1
        assert np.all(sums[2:] == 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            mobius(0)


class TestZetaReciprocal:
    def test_sigma2(self):
        assert zeta_reciprocal(2.0, 1e-6) == pytest.approx(6.0 / math.pi**2, abs=2e-6)

    def test_sigma4(self):
        assert zeta_reciprocal(4.0, 1e-8) == pytest.approx(90.0 / math.pi**4, abs=2e-8)

    def test_large_sigma_tends_to_one(self):
        assert zeta_reciprocal(30.0, 1e-12) == pytest.approx(1.0, abs=1e-8)

    def test_partial_sum_oracle(self):
        # independent route: direct partial sum with explicit remainder
        sigma, m_cap = 3.0, 4000
        ref = math.fsum(brute_mobius(m) / m**sigma for m in range(1, m_cap))
        assert zeta_reciprocal(sigma, 1e-9) == pytest.approx(ref, abs=1e-6)


class TestDirection:
    def test_ordering_by_slope(self):
        d = [Direction(1, 0), Direction(2, 1), Direction(1, 1), Direction(0, 1)]
        assert sorted(d) == [Direction(1, 0), Direction(2, 1), Direction(1, 1), Direction(0, 1)]

    def test_slope_values(self):
        assert Direction(2, 1).slope == Fraction(1, 2)
        assert Direction(0, 1).slope == math.inf

    def test_invalid(self):
        with pytest.raises(DomainError):
            Direction(2, 2)
        with pytest.raises(DomainError):
            Direction(0, 0)


class TestEnumeration:
    def test_small_cutoff_membership(self):
        # cutoff applies to <alpha, x>; the non-coprime (2, 2) is filtered
        # even though it satisfies the cutoff
        ds = enumerate_directions((1.0, 1.0), uniform_spec(), cutoff=4.0)
        pairs = set(zip(ds.x1.tolist(), ds.x2.tolist()))
        assert {(1, 0), (0, 1), (1, 1), (1, 2), (2, 1)} <= pairs
        assert (2, 2) not in pairs
        assert all(i + j <= 4.0 for i, j in pairs)

    def test_sorted_strictly_by_slope(self):
        ds = enumerate_directions((0.05, 0.08), uniform_spec(), 1e-8)
        x1 = ds.x1.astype(np.int64)
        x2 = ds.x2.astype(np.int64)
        cross = x1[:-1] * x2[1:] - x2[:-1] * x1[1:]
        assert np.all(cross > 0)
        assert (x1[0], x2[0]) == (1, 0)
        assert (x1[-1], x2[-1]) == (0, 1)

    def test_count_matches_brute_force(self):
        alpha, t = (0.13, 0.2), 6.0
        ds = enumerate_directions(alpha, uniform_spec(), cutoff=t)
        brute = sum(
            1
            for i in range(int(t / alpha[0]) + 1)
            for j in range(int(t / alpha[1]) + 1)
            if (i or j)
            and math.gcd(i, j) == 1
            and alpha[0] * i + alpha[1] * j <= t
        )
        assert len(ds) == brute

    def test_density_prefactor(self):
        # count ~ (3/pi^2) (T/alpha)^2 for the symmetric triangle
        a = 0.02
        ds = enumerate_directions((a, a), uniform_spec(), cutoff=8.0)
        predicted = 3.0 / math.pi**2 * (8.0 / a) ** 2
        assert 0.5 < len(ds) / predicted < 2.0

    def test_eps_monotonicity(self):
        coarse = enumerate_directions((0.3, 0.3), uniform_spec(), 1e-4)
        fine = enumerate_directions((0.3, 0.3), uniform_spec(), 1e-10)
        coarse_set = set(zip(coarse.x1.tolist(), coarse.x2.tolist()))
        fine_set = set(zip(fine.x1.tolist(), fine.x2.tolist()))
        assert coarse_set <= fine_set

    def test_tail_bound_decreases(self):
        spec = uniform_spec()
        b1 = excluded_mass_bound(spec, (0.5, 0.5), 10.0)
        b2 = excluded_mass_bound(spec, (0.5, 0.5), 20.0)
        assert b2 < b1

    def test_excluded_mass_bound_dominates_brute(self):
        # brute-force the true excluded sum of (g(z^x)-1) on a big box
        spec = uniform_spec()
        alpha, t = (0.8, 0.8), 5.0
        true = 0.0
        for i in range(80):
            for j in range(80):
                if (i or j) and math.gcd(i, j) == 1:
                    ip = alpha[0] * i + alpha[1] * j
                    if ip > t:
                        w = math.exp(-ip)
                        true += w / (1.0 - w)  # g(w)-1 for the uniform family
        assert excluded_mass_bound(spec, alpha, t) >= true

    def test_resource_guard(self):
        with pytest.raises(ResourceError):
            enumerate_directions((1e-4, 1e-4), uniform_spec(), cutoff=50.0, max_points=1e5)


class TestMobiusInversion:
    def test_unique_factorization_in_box(self):
        # every nonzero y in the box factors as y = m * x, x coprime
        bound = 40
        seen = {}
        for m in range(1, bound + 1):
            for i in range(bound // m + 1):
                for j in range(bound // m + 1):
                    if (i or j) and math.gcd(i, j) == 1 and i * m <= bound and j * m <= bound:
                        key = (i * m, j * m)
                        assert key not in seen, key
                        seen[key] = (m, i, j)
        expect = {(i, j) for i in range(bound + 1) for j in range(bound + 1) if i or j}
        assert set(seen) == expect

    def test_layered_sum_identity(self):
        # f(x) = x1 e^{-<alpha,x>}: summing f(m x) over coprime x and all m
        # equals the full-lattice sum, exactly on a consistent finite box
        alpha = (0.7, 0.9)
        bound = 60

        def f(y1, y2):
            return y1 * math.exp(-(alpha[0] * y1 + alpha[1] * y2))

        full = math.fsum(
            f(i, j) for i in range(bound + 1) for j in range(bound + 1) if i or j
        )
        layered = math.fsum(
            f(m * i, m * j)
            for m in range(1, bound + 1)
            for i in range(bound // m + 1)
            for j in range(bound // m + 1)
            if (i or j) and math.gcd(i, j) == 1 and m * i <= bound and m * j <= bound
        )
        assert layered == pytest.approx(full, rel=1e-12)


class TestBoxDirections:
    def test_small_box(self):
        dirs = box_directions(2, 2)
        assert [(d.x1, d.x2) for d in dirs] == [
            (1, 0),
            (2, 1),
            (1, 1),
            (1, 2),
            (0, 1),
        ]

    def test_box_is_slope_sorted(self):
        dirs = box_directions(6, 6)
        for a, b in zip(dirs, dirs[1:]):
            assert a < b
