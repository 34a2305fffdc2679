"""Coprime direction set, Moebius function, and inversion helpers.

Edge directions live in the set of coprime nonnegative integer vectors
(including the axis unit vectors).  Directions are ordered by their exact
rational slope x2/x1, with (1, 0) first and (0, 1) last; comparisons use
integer cross products, never floating point, so the order is a total
order with no ties.

Direction enumeration truncates the infinite set at an inner-product
cutoff <alpha, x> <= T chosen so that a certified bound on the excluded
occupation mass is below the caller's tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import DomainError, ResourceError
from .series import EnsembleSpec, gf_value, power_geometric_sum

_SIEVE_DEFAULT_CAP = 1_000_000


@dataclass(frozen=True, order=False)
class Direction:
    """A coprime lattice vector; slope is exact, +inf for the vertical."""

    x1: int
    x2: int

    def __post_init__(self):
        if self.x1 < 0 or self.x2 < 0 or (self.x1 == 0 and self.x2 == 0):
            raise DomainError("direction must be a nonzero nonnegative vector")
        if math.gcd(self.x1, self.x2) != 1:
            raise DomainError(f"({self.x1}, {self.x2}) is not coprime")

    @property
    def slope(self) -> Fraction | float:
        if self.x1 == 0:
            return math.inf
        return Fraction(self.x2, self.x1)

    def __lt__(self, other: "Direction") -> bool:
        # slope comparison by cross product; distinct coprime vectors
        # always have distinct slopes
        return self.x2 * other.x1 < other.x2 * self.x1

    def __le__(self, other: "Direction") -> bool:
        return not other < self


@dataclass(frozen=True)
class DirectionSet:
    """All coprime directions with <alpha, x> <= cutoff, sorted by slope.

    ``tail_mass_bound`` certifies the excluded mass: it dominates the sum
    of (g(z^x) - 1) over every excluded direction, which in turn bounds
    both the log of the omitted generating-function product and the
    probability that any excluded direction is occupied.
    """

    x1: np.ndarray
    x2: np.ndarray
    cutoff: float
    tail_mass_bound: float
    alpha: tuple[float, float]

    def __len__(self) -> int:
        return int(self.x1.shape[0])

    def weights(self) -> np.ndarray:
        """z^x = exp(-<alpha, x>) per direction."""
        a1, a2 = self.alpha
        return np.exp(-(a1 * self.x1 + a2 * self.x2))

    def directions(self) -> Iterator[Direction]:
        for i in range(len(self)):
            yield Direction(int(self.x1[i]), int(self.x2[i]))

    def slope_mask(self, num: int, den: int) -> np.ndarray:
        """Boolean mask of directions with slope <= num/den, exactly.

        The comparison x2*den <= num*x1 runs in int64 when it cannot
        overflow; otherwise a float prefilter decides the clear cases and
        arbitrary-precision integers settle the borderline ones.
        """
        if den < 0 or num < 0:
            raise DomainError("slope bound must be nonnegative")
        hi = max(int(self.x1.max(initial=0)), int(self.x2.max(initial=0)), 1)
        if max(num, den) * hi < (1 << 62):
            return self.x2.astype(np.int64) * den <= num * self.x1.astype(np.int64)
        lhs = self.x2.astype(np.float64) * float(den)
        rhs = float(num) * self.x1.astype(np.float64)
        gap = np.abs(lhs - rhs)
        fuzzy = gap <= 1e-9 * (np.abs(lhs) + np.abs(rhs))
        mask = lhs <= rhs
        for i in np.nonzero(fuzzy)[0]:
            mask[i] = int(self.x2[i]) * den <= num * int(self.x1[i])
        return mask

    def to_csv(self, path) -> None:
        arr = np.stack([self.x1, self.x2], axis=1)
        np.savetxt(path, arr, fmt="%d", delimiter=",", header="x1,x2", comments="")


# ---------------------------------------------------------------------------
# Moebius function
# ---------------------------------------------------------------------------


class _MobiusCache:
    def __init__(self):
        self.limit = 0
        self.values: np.ndarray | None = None

    def ensure(self, limit: int) -> np.ndarray:
        if limit <= self.limit:
            return self.values
        n = max(limit, 1024, 2 * self.limit)
        mu = np.ones(n + 1, dtype=np.int8)
        mu[0] = 0
        is_prime = np.ones(n + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, n + 1):
            if is_prime[p]:
                if p * p <= n:
                    is_prime[p * p :: p] = False
                mu[p::p] *= -1
                if p * p <= n:
                    mu[p * p :: p * p] = 0
        self.limit = n
        self.values = mu
        return mu


_mobius_cache = _MobiusCache()


def mobius(m: int) -> int:
    """Moebius function: +/-1 on squarefree integers by parity of prime
    factors, 0 otherwise.

    Sieved up to one million; larger arguments fall back to trial
    division.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    if m <= _SIEVE_DEFAULT_CAP:
        return int(_mobius_cache.ensure(m)[m])
    sign = 1
    d = 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            sign = -sign
        d += 1 if d == 2 else 2
    if m > 1:
        sign = -sign
    return sign


def mobius_range(limit: int) -> np.ndarray:
    """Moebius values mu(0..limit) as an int8 array (mu(0) set to 0)."""
    if limit < 1:
        raise DomainError("limit must be >= 1")
    return _mobius_cache.ensure(limit)[: limit + 1].copy()


def zeta_reciprocal(sigma: float, tol: float) -> float:
    """sum_m mu(m)/m^sigma, a partial sum with p-series tail <= tol.

    Converges to the reciprocal of the zeta function for sigma > 1.
    """
    if sigma <= 1.0:
        raise DomainError("sigma must exceed 1")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    # sum_{m>M} m^-sigma <= M^(1-sigma)/(sigma-1)
    m_cap = int(math.ceil((tol * (sigma - 1.0)) ** (1.0 / (1.0 - sigma)))) + 1
    mu = mobius_range(m_cap).astype(np.float64)
    m = np.arange(m_cap + 1, dtype=np.float64)
    m[0] = 1.0
    return float(np.sum(mu / m**sigma))


# ---------------------------------------------------------------------------
# direction enumeration with certified cutoff
# ---------------------------------------------------------------------------


def excluded_mass_bound(spec: EnsembleSpec, alpha: tuple[float, float], t: float) -> float:
    """Certified bound on sum of (g(z^x) - 1) over directions with
    <alpha, x> > t, where z = exp(-alpha).

    Majorizes the coprime sum by the full-lattice sum; each weight
    coefficient's layer is bounded through e^{-l<a,x>} <= e^{-(l-1)t}
    e^{-<a,x>} on the excluded region, and the single-layer sum by
    column-wise geometric tails.
    """
    a1, a2 = alpha
    if t <= 0.0:
        return math.inf

    # sum over excluded x of e^{-<alpha, x>}, by column stripes; both
    # orientations are valid bounds, keep the smaller
    def stripes(aa: float, ab: float) -> float:
        return math.exp(-t) * (t / aa + 1.0 + 1.0 / -math.expm1(-aa)) / -math.expm1(-ab)

    single = min(stripes(a1, a2), stripes(a2, a1))
    # sum_l w_l e^{-(l-1)t} = e^t (g(e^{-t}) - 1)
    layers = math.exp(t) * (gf_value(spec, math.exp(-t)) - 1.0)
    return layers * single


def excluded_weighted_bound(
    alpha: tuple[float, float], t: float, s: int
) -> float:
    """Bound on sum over excluded x (both coordinates) of
    (x1^s + x2^s) e^{-<alpha, x>}.

    Column-stripe estimate: columns reaching the cutoff contribute at most
    e^{-t} times a polynomial count, deeper columns a geometric tail.
    """
    if t <= 0.0:
        return math.inf

    def stripe(aa: float, ab: float) -> float:
        big_x = int(t / aa)
        near = math.exp(-t) * float(big_x + 1) ** (s + 1)
        far = math.exp(-(big_x + 1) * aa / 2.0) * power_geometric_sum(
            s, math.exp(-aa / 2.0)
        )
        return (near + far) / -math.expm1(-ab)

    return stripe(alpha[0], alpha[1]) + stripe(alpha[1], alpha[0])


def _triangle_points(alpha: tuple[float, float], t: float, max_points: float):
    a1, a2 = alpha
    x1_max = int(t / a1)
    counts = (np.floor((t - a1 * np.arange(x1_max + 1)) / a2) + 1).astype(np.int64)
    total = int(counts.sum())
    if total > max_points:
        raise ResourceError(
            f"direction cutoff {t:.2f} needs {total} lattice points "
            f"(budget {int(max_points)})"
        )
    x1 = np.repeat(np.arange(x1_max + 1, dtype=np.int64), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    x2 = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)
    return x1, x2


def _sort_by_slope(x1: np.ndarray, x2: np.ndarray):
    with np.errstate(divide="ignore"):
        ratio = x2 / x1
    order = np.argsort(ratio, kind="stable")
    x1o, x2o = x1[order], x2[order]
    cross = x1o[:-1] * x2o[1:] - x2o[:-1] * x1o[1:]
    if np.all(cross > 0):
        return x1o, x2o
    # float ties cannot distinguish close slopes; fall back to exact keys
    keys = sorted(
        range(len(x1)),
        key=lambda i: (x1[i] == 0, Fraction(int(x2[i]), int(x1[i])) if x1[i] else 0),
    )
    idx = np.asarray(keys, dtype=np.int64)
    return x1[idx], x2[idx]


def enumerate_directions(
    alpha: tuple[float, float],
    spec: EnsembleSpec,
    eps_tail: float | None = 1e-9,
    cutoff: float | None = None,
    max_points: float = 8e7,
) -> DirectionSet:
    """All coprime directions with <alpha, x> <= T, sorted by slope.

    T is the smallest value on a geometric grid whose certified
    excluded-mass bound is <= eps_tail, unless an explicit ``cutoff``
    overrides the search.  Raises ResourceError when the triangle would
    exceed the point budget.
    """
    a1, a2 = alpha
    if not (a1 > 0.0 and a2 > 0.0):
        raise DomainError("alpha components must be positive")
    if cutoff is None:
        if eps_tail is None or eps_tail <= 0.0:
            raise DomainError("eps_tail must be positive")
        t = max(4.0, 2.0 * max(a1, a2))
        while excluded_mass_bound(spec, alpha, t) > eps_tail:
            t *= 1.2
            if t > 5000.0:
                raise ResourceError("no cutoff certifies the requested tail")
    else:
        t = float(cutoff)
    x1, x2 = _triangle_points(alpha, t, max_points)
    cop = np.gcd(x1, x2) == 1
    x1, x2 = x1[cop], x2[cop]
    x1, x2 = _sort_by_slope(x1, x2)
    bound = excluded_mass_bound(spec, alpha, t)
    return DirectionSet(x1=x1, x2=x2, cutoff=t, tail_mass_bound=bound, alpha=(a1, a2))


def box_directions(n1: int, n2: int) -> list[Direction]:
    """Coprime directions inside the box [0, n1] x [0, n2], slope-sorted.

    These are the only directions that can appear on a line with endpoint
    (n1, n2).
    """
    if n1 < 0 or n2 < 0 or (n1 == 0 and n2 == 0):
        raise DomainError("box must be nonempty")
    out = []
    for i in range(n1 + 1):
        for j in range(n2 + 1):
            if (i or j) and math.gcd(i, j) == 1:
                out.append(Direction(i, j))
    out.sort()
    return out
