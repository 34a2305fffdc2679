"""Polygonal-line geometry: scaling, tangential profiles, distances.

A convex lattice polygonal line is stored as slope-sorted edges
(direction, multiplicity); its vertices are the cumulative sums from the
origin.  Under the componentwise scaling x -> (x1/n1, x2/n2) the lines
concentrate around the parabola arc sqrt(1-y1) + sqrt(y2) = 1, whose
tangential parameterization is

    arc(t) = ((t^2 + 2t) / (1+t)^2,  t^2 / (1+t)^2),   t in [0, inf].

Two discrepancy measures are provided: the tangential distance (sup over
tangent slopes of the gap between the scaled partial endpoint and the arc
point with that slope) and the Hausdorff distance between the polylines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .lattice import Direction

HAUSDORFF_MESH = 1e-4


@dataclass(frozen=True)
class PolygonalLine:
    """Slope-sorted edges (direction, multiplicity >= 1) from the origin."""

    edges: tuple[tuple[Direction, int], ...]

    def __post_init__(self):
        for d, m in self.edges:
            if m < 1:
                raise DomainError("edge multiplicities must be >= 1")
        for (a, _), (b, _) in zip(self.edges, self.edges[1:]):
            if not a < b:
                raise DomainError("edges must be strictly slope-sorted")

    @cached_property
    def vertices(self) -> tuple[tuple[int, int], ...]:
        pts = [(0, 0)]
        for d, m in self.edges:
            x, y = pts[-1]
            pts.append((x + d.x1 * m, y + d.x2 * m))
        return tuple(pts)

    @property
    def endpoint(self) -> tuple[int, int]:
        return self.vertices[-1]

    def edge_count(self) -> int:
        return len(self.edges)

    def scaled(self, n: tuple[int, int]) -> "ScaledPath":
        return ScaledPath(source=self, n=(int(n[0]), int(n[1])))


@dataclass(frozen=True)
class ScaledPath:
    """A polygonal line under the componentwise scaling by 1/n."""

    source: PolygonalLine
    n: tuple[int, int]

    @cached_property
    def vertices(self) -> np.ndarray:
        pts = np.asarray(self.source.vertices, dtype=np.float64)
        return pts / np.asarray(self.n, dtype=np.float64)

    @property
    def endpoint(self) -> tuple[float, float]:
        e = self.source.endpoint
        return (e[0] / self.n[0], e[1] / self.n[1])


def parabola_arc(t) -> tuple[float, float]:
    """Point on the limiting parabola arc with tangent slope t.

    Satisfies sqrt(1 - y1) + sqrt(y2) = 1; t = inf maps to (1, 1).
    """
    if t == math.inf:
        return (1.0, 1.0)
    t = float(t)
    if t < 0.0 or math.isnan(t):
        raise DomainError("t must lie in [0, inf]")
    den = (1.0 + t) ** 2
    return ((t * t + 2.0 * t) / den, t * t / den)


@lru_cache(maxsize=4)
def parabola_polyline(points: int = 10_001) -> np.ndarray:
    """The arc sampled densely; chord error is O(points^-2).

    Uses the substitution u = t/(1+t), under which the arc is the
    polynomial curve (2u - u^2, u^2) on u in [0, 1].
    """
    u = np.linspace(0.0, 1.0, points)
    return np.stack([2.0 * u - u * u, u * u], axis=1)


# ---------------------------------------------------------------------------
# tangential profile and distance
# ---------------------------------------------------------------------------


def _as_fraction(t) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, int):
        return Fraction(t)
    return Fraction(float(t))


def profile_point(line: PolygonalLine, n: tuple[int, int], t) -> tuple[float, float]:
    """Scaled endpoint of the sub-path whose edge slopes are <= t * n2/n1.

    Right-continuous step function of t; the comparison is exact rational
    arithmetic.  t = inf returns the full scaled endpoint.
    """
    n1, n2 = int(n[0]), int(n[1])
    if t == math.inf:
        e = line.endpoint
        return (e[0] / n1, e[1] / n2)
    frac = _as_fraction(t)
    if frac < 0:
        raise DomainError("t must lie in [0, inf]")
    acc1 = acc2 = 0
    num = frac.numerator * n2
    den = frac.denominator * n1
    for d, m in line.edges:
        # slope x2/x1 <= num/den  <=>  x2*den <= num*x1
        if d.x2 * den <= num * d.x1:
            acc1 += d.x1 * m
            acc2 += d.x2 * m
        else:
            break
    return (acc1 / n1, acc2 / n2)


def _breakpoints(line: PolygonalLine, n: tuple[int, int]):
    """Cutoff values t_i where the profile jumps, with prefix endpoints.

    Returns (cuts, prefixes): the profile equals prefixes[i] on
    [cuts[i-1], cuts[i]) with cuts[-1] treated as +inf, prefixes[0] on
    [0, cuts[0]).
    """
    n1, n2 = int(n[0]), int(n[1])
    cuts: list = []
    prefixes: list[tuple[float, float]] = [(0.0, 0.0)]
    acc1 = acc2 = 0
    for d, m in line.edges:
        # edge enters at t = slope * n1/n2
        cut = math.inf if d.x1 == 0 else Fraction(d.x2 * n1, d.x1 * n2)
        cuts.append(cut)
        acc1 += d.x1 * m
        acc2 += d.x2 * m
        prefixes.append((acc1 / n1, acc2 / n2))
    return cuts, prefixes


def _dist_to_arc_point(p: tuple[float, float], t) -> float:
    g = parabola_arc(t)
    return math.hypot(p[0] - g[0], p[1] - g[1])


# in the parameter u = t/(1+t) the arc is (2u - u^2, u^2) with speed
# |d arc/du| <= 2, so a u-grid of spacing du resolves the supremum of a
# distance function to within du (Lipschitz constant 2, worst gap du/2)
_SUP_SCAN_DU = 8e-4


def _interval_sup(p: tuple[float, float], lo, hi) -> float:
    """sup over t in [lo, hi] of |p - arc(t)|, to within 8e-4."""
    lo_f = float(lo)
    u_lo = lo_f / (1.0 + lo_f)
    u_hi = 1.0 if hi == math.inf else float(hi) / (1.0 + float(hi))
    best = max(_dist_to_arc_point(p, lo), _dist_to_arc_point(p, hi))
    span = u_hi - u_lo
    if span <= _SUP_SCAN_DU:
        return best
    interior = int(math.ceil(span / _SUP_SCAN_DU)) - 1
    u = np.linspace(u_lo, u_hi, interior + 2)[1:-1]
    g1 = 2.0 * u - u * u
    g2 = u * u
    d = np.hypot(p[0] - g1, p[1] - g2)
    return max(best, float(d.max()))


def tangential_distance(line: PolygonalLine, n: tuple[int, int]) -> float:
    """sup over t in [0, inf] of |scaled profile(t) - arc(t)|.

    Evaluated over the finite critical set: each jump cutoff from both
    sides, the interval ends, and a guarded interior scan per constancy
    interval.
    """
    cuts, prefixes = _breakpoints(line, n)
    bounds = [Fraction(0)] + cuts + [math.inf]
    # profile value on [bounds[i], bounds[i+1]) is prefixes[j] where j
    # counts cuts <= bounds[i]
    best = 0.0
    for i in range(len(bounds) - 1):
        lo, hi = bounds[i], bounds[i + 1]
        if lo != math.inf and hi != math.inf and lo == hi:
            continue
        p = prefixes[i]
        if lo == math.inf:
            p_last = prefixes[-1]
            best = max(best, _dist_to_arc_point(p_last, math.inf))
            break
        best = max(best, _interval_sup(p, lo, hi))
    best = max(best, _dist_to_arc_point(prefixes[-1], math.inf))
    return best


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------


def _densify(points: np.ndarray, mesh: float) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("polyline must be an (m, 2) array of vertices")
    if len(pts) == 0:
        raise DomainError("polyline must be nonempty")
    if len(pts) == 1:
        return pts
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        seg = b - a
        length = float(np.hypot(seg[0], seg[1]))
        if length == 0.0:
            continue
        steps = max(1, int(math.ceil(length / mesh)))
        lam = np.linspace(0.0, 1.0, steps + 1)[1:, None]
        out.append(a[None, :] + lam * seg[None, :])
    return np.concatenate(out, axis=0)


def hausdorff_distance(a, b, mesh: float = HAUSDORFF_MESH) -> float:
    """Hausdorff distance between two polylines given as vertex lists.

    Both polylines are resampled at spacing <= mesh and compared by
    nearest-neighbor queries, so the result is exact to within one mesh
    length.  Symmetric; zero for identical vertex lists.
    """
    pa = _densify(np.asarray(a, dtype=np.float64), mesh)
    pb = _densify(np.asarray(b, dtype=np.float64), mesh)
    d_ab = float(cKDTree(pb).query(pa, k=1)[0].max())
    d_ba = float(cKDTree(pa).query(pb, k=1)[0].max())
    return max(d_ab, d_ba)
