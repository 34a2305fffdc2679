"""Calibration of the tilted measure and its analytic moments.

For a target endpoint n the tilt parameters are z_j = exp(-alpha_j) with

    alpha_1 = kappa * n_2^(1/3) / n_1^(2/3),
    alpha_2 = kappa * n_1^(1/3) / n_2^(2/3),
    kappa   = (A(2) / zeta(2))^(1/3),

where A(2) is the Dirichlet sum of the ensemble's log-coefficients at
exponent 2.  Under this choice the expected endpoint is asymptotically n.

Expected values, covariances and cumulants of the endpoint are computed
by two independent routes:

  * a Moebius-inverted double series over (k, m), which collapses the
    lattice sum to closed-form column sums, and
  * direct truncated sums over the enumerated coprime direction set.

Both carry certified truncation bounds; their agreement is a standing
cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, PrecisionError
from .lattice import DirectionSet, enumerate_directions, excluded_weighted_bound, mobius_range
from .series import (
    EnsembleSpec,
    dirichlet_sum_spec,
    log_coeffs,
    power_geometric_sum,
    tail_envelope,
    weight_coeffs,
)

ZETA2 = math.pi**2 / 6.0

_KMAX_HARD = 2_000_000


@dataclass(frozen=True)
class GrandCanonicalParams:
    """Calibrated tilt for a target endpoint n.

    Invariants: alpha_j = delta_j n_j^(-1/3), delta_1 = kappa
    (n_2/n_1)^(1/3), delta_2 = kappa (n_1/n_2)^(1/3), and the scaling
    identities alpha_1^2 alpha_2 n_1 = alpha_1 alpha_2^2 n_2 = kappa^3,
    alpha_1 n_1 = alpha_2 n_2.
    """

    n: tuple[int, int]
    kappa: float
    delta: tuple[float, float]
    alpha: tuple[float, float]
    z: tuple[float, float]

    def validate(self, rel: float = 1e-12) -> None:
        a1, a2 = self.alpha
        n1, n2 = self.n
        k3 = self.kappa**3
        checks = (
            (a1 * a1 * a2 * n1, k3),
            (a1 * a2 * a2 * n2, k3),
            (a1 * n1, a2 * n2),
        )
        for got, want in checks:
            if abs(got - want) > rel * abs(want):
                raise DomainError("tilt parameters violate the scaling identities")
        if not (0.0 < self.z[0] < 1.0 and 0.0 < self.z[1] < 1.0):
            raise DomainError("tilt weights must lie in (0, 1)")


def calibration_constant(spec: EnsembleSpec, tol: float = 1e-12) -> float:
    """kappa = (A(2)/zeta(2))^(1/3) with propagated error <= tol."""
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    # first pass to learn the scale, second pass to meet the propagated bound
    a2 = dirichlet_sum_spec(spec, 2.0, 1e-10)
    kappa = (a2.value / ZETA2) ** (1.0 / 3.0)
    want = tol * 3.0 * a2.value / max(kappa, 1e-12)
    if a2.tail_bound > want:
        a2 = dirichlet_sum_spec(spec, 2.0, want)
        kappa = (a2.value / ZETA2) ** (1.0 / 3.0)
    return kappa


def calibrate(spec: EnsembleSpec, n: tuple[int, int], tol: float = 1e-12) -> GrandCanonicalParams:
    """Calibrated parameters for target endpoint n = (n1, n2)."""
    n1, n2 = int(n[0]), int(n[1])
    if n1 < 1 or n2 < 1:
        raise DomainError("target endpoint must have positive coordinates")
    kappa = calibration_constant(spec, tol)
    d1 = kappa * (n2 / n1) ** (1.0 / 3.0)
    d2 = kappa * (n1 / n2) ** (1.0 / 3.0)
    a1 = d1 * n1 ** (-1.0 / 3.0)
    a2 = d2 * n2 ** (-1.0 / 3.0)
    params = GrandCanonicalParams(
        n=(n1, n2),
        kappa=kappa,
        delta=(d1, d2),
        alpha=(a1, a2),
        z=(math.exp(-a1), math.exp(-a2)),
    )
    params.validate()
    return params


# ---------------------------------------------------------------------------
# Moebius-route expected endpoint
# ---------------------------------------------------------------------------


def _column_sum(h: np.ndarray, aa: float, ab: float) -> np.ndarray:
    """F(h) = h e^{-h aa} / ((1-e^{-h aa})^2 (1-e^{-h ab})).

    This is the full-lattice sum of x1 e^{-h <a, x>} with aa on the
    weighted coordinate; it is decreasing in h.
    """
    ua = h * aa
    ub = h * ab
    return h * np.exp(-ua) / (np.expm1(-ua) ** 2 * -np.expm1(-ub))


def _column_sum_peak(aa: float, ab: float) -> float:
    """F evaluated at h* = 2/aa, the start of its certified geometric decay.

    For h >= h*, F(h) <= F(h*) e^{-(h-h*) aa/2}: each factor of
    F(h) e^{h aa/2} is nonincreasing there.
    """
    hstar = 2.0 / aa
    return float(_column_sum(np.asarray([hstar]), aa, ab)[0])


def expected_endpoint(
    spec: EnsembleSpec, params: GrandCanonicalParams, tol: float = 1e-9
) -> tuple[float, float]:
    """Expected endpoint under the tilted measure, by Moebius inversion.

    Evaluates, per coordinate, sum_k c_k sum_m mu(m) F(km) with F the
    closed-form full-lattice column sum, truncating both indices once the
    exponential-regime majorants certify a remainder below tol.
    """
    return (
        _endpoint_coordinate(spec, params.alpha[0], params.alpha[1], tol),
        _endpoint_coordinate(spec, params.alpha[1], params.alpha[0], tol),
    )


def _endpoint_coordinate(spec: EnsembleSpec, aa: float, ab: float, tol: float) -> float:
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    env = tail_envelope(spec)
    peak = _column_sum_peak(aa, ab)
    half = math.exp(-aa / 2.0)
    base = int(math.ceil(4.0 / aa)) + 1

    def tail_k(k_cap: int) -> float:
        # sum_{k>K} |c_k| sum_{m>=1} F(km) in the geometric regime
        geo = env.geometric_tail(k_cap, half)
        return peak * math.e * geo / -math.expm1(-(k_cap + 1) * aa / 2.0)

    def tail_m(m_cap: int) -> float:
        # all k, m > M: F(km) <= peak * e * e^{-km aa/2}
        total = env.geometric_total(half ** (m_cap + 1))
        return peak * math.e * total / -math.expm1(-aa / 2.0)

    k_cap = base
    while tail_k(k_cap) > tol / 3.0:
        k_cap *= 2
        if k_cap > _KMAX_HARD:
            raise PrecisionError("endpoint series does not certify")
    m_cap = base
    while tail_m(m_cap) > tol / 3.0:
        m_cap *= 2
        if m_cap > _KMAX_HARD:
            raise PrecisionError("endpoint series does not certify")

    coeffs = np.asarray(log_coeffs(spec, k_cap).coeffs)
    mu = mobius_range(m_cap).astype(np.float64)[1:]
    m_vals = np.arange(1, m_cap + 1, dtype=np.float64)
    keep = mu != 0.0
    mu, m_vals = mu[keep], m_vals[keep]

    total = 0.0
    block = max(1, int(4e6 // max(len(m_vals), 1)))
    for lo in range(0, k_cap, block):
        hi = min(lo + block, k_cap)
        ks = np.arange(lo + 1, hi + 1, dtype=np.float64)
        h = ks[:, None] * m_vals[None, :]
        f = _column_sum(h, aa, ab)
        total += float(coeffs[lo:hi] @ (f @ mu))
    return total


# ---------------------------------------------------------------------------
# direct lattice moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentJob:
    """One weighted sum: sum_x x1^p1 x2^p2 sum_k k^kpow c_k z^(kx)."""

    p1: int
    p2: int
    kpow: int


def _direct_cutoff(spec: EnsembleSpec, alpha, jobs: Sequence[MomentJob], tol: float) -> float:
    """Smallest grid cutoff whose excluded-direction bound is <= tol/2
    for every job."""
    env = tail_envelope(spec)
    s_max = max(j.p1 + j.p2 for j in jobs)
    k_max = max(j.kpow for j in jobs)
    m = max(k_max - env.power, 0.0)

    def bound(t: float) -> float:
        # sum_k k^kpow |c_k| e^{-(k-1)t} <= e^t C sum_k k^m (ratio e^{-t})^k
        if env.ratio == 0.0:
            k_factor = env.coeff
        else:
            u = env.ratio * math.exp(-t)
            if u >= 1.0:
                return math.inf
            k_factor = (
                math.exp(t) * env.coeff * power_geometric_sum(int(math.ceil(m)), u)
            )
        return k_factor * excluded_weighted_bound(alpha, t, s_max)

    t = max(6.0, 3.0 * max(alpha))
    while bound(t) > tol / 2.0:
        t *= 1.15
        if t > 5000.0:
            raise PrecisionError("no direction cutoff certifies the moment tail")
    return t


def direct_moments(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    jobs: Sequence[MomentJob],
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
    slope_cap: tuple[int, int] | None = None,
) -> list[float]:
    """Direct truncated lattice sums for several moment jobs at once.

    ``slope_cap`` = (num, den) restricts to directions with slope
    <= num/den (exact integer comparison), used by profile evaluation.
    The inner series over k stops when, for every job, the envelope
    majorant times the current direction-weighted column certifies a
    remainder below tol/2; the direction cutoff accounts for the other
    tol/2.
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    env = tail_envelope(spec)
    if dirs is None:
        cut = _direct_cutoff(spec, params.alpha, jobs, tol)
        dirs = enumerate_directions(params.alpha, spec, cutoff=cut)
    x1 = dirs.x1.astype(np.float64)
    x2 = dirs.x2.astype(np.float64)
    w = dirs.weights()
    if slope_cap is not None:
        mask = dirs.slope_mask(slope_cap[0], slope_cap[1])
        x1, x2, w = x1[mask], x2[mask], w[mask]
    if len(w) == 0:
        return [0.0 for _ in jobs]

    weights = [x1**j.p1 * x2**j.p2 for j in jobs]
    w_max = float(w.max())
    u = env.ratio * w_max
    # geometric factor of the per-direction remainder bound, per job:
    # sum_{j>k} j^kpow |c_j| w^j <= weight * w^k * C rho^k k^m * G(m, u)
    ms = [int(math.ceil(max(j.kpow - env.power, 0.0))) for j in jobs]
    gs = [power_geometric_sum(m, u) / u if u > 0.0 else 0.0 for m in ms]
    n_dirs = len(w)
    drop_share = tol / (4.0 * n_dirs)

    coeff_cache = log_coeffs(spec, 256)
    terms: list[list[float]] = [[] for _ in jobs]
    done = [False] * len(jobs)
    w_pow = w.copy()
    k = 0
    while not all(done):
        k += 1
        if k > len(coeff_cache.coeffs):
            coeff_cache = log_coeffs(spec, 2 * len(coeff_cache.coeffs))
        if k > _KMAX_HARD:
            raise PrecisionError("lattice moment series does not certify")
        ck = coeff_cache.log_coeff(k)
        rest_scale = env.coeff * env.ratio**k if env.ratio > 0.0 else 0.0
        for i, job in enumerate(jobs):
            if done[i]:
                continue
            vk = float(weights[i] @ w_pow)
            if ck != 0.0:
                terms[i].append(ck * float(k) ** job.kpow * vk)
            if env.ratio == 0.0:
                done[i] = True
                continue
            rest = vk * rest_scale * float(k) ** ms[i] * gs[i]
            if rest <= tol / 4.0:
                done[i] = True
        if all(done):
            break
        # drop directions whose entire remaining series is negligible for
        # every live job; each drop forgoes at most drop_share
        if env.ratio > 0.0 and k % 8 == 0:
            keep = np.zeros(len(w_pow), dtype=bool)
            for i, job in enumerate(jobs):
                if done[i]:
                    continue
                bound_i = rest_scale * float(k) ** ms[i] * gs[i]
                keep |= weights[i] * w_pow * bound_i > drop_share
            if not keep.all():
                w = w[keep]
                w_pow = w_pow[keep]
                weights = [wt[keep] for wt in weights]
                if len(w) == 0:
                    break
        w_pow *= w
    return [math.fsum(t) for t in terms]


def expected_profile(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    t: float | Fraction,
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
) -> tuple[float, float]:
    """Expected partial endpoint over directions with slope <= t n2/n1.

    ``t`` may be any nonnegative real or math.inf; finite values are
    converted to exact fractions so the slope cutoff is an integer
    comparison.  At t = inf this is the direct-route expected endpoint.
    """
    jobs = [MomentJob(1, 0, 1), MomentJob(0, 1, 1)]
    if t == math.inf:
        cap = None
    else:
        frac = Fraction(t) if not isinstance(t, Fraction) else t
        if frac < 0:
            raise DomainError("t must be nonnegative")
        n1, n2 = params.n
        # slope <= t*n2/n1 as an integer comparison
        cap = (frac.numerator * n2, frac.denominator * n1)
    vals = direct_moments(spec, params, jobs, tol, dirs=dirs, slope_cap=cap)
    return (vals[0], vals[1])


def expected_profile_curve(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    ts: Sequence[float | Fraction],
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
) -> list[tuple[float, float]]:
    """Expected partial endpoints at many slope cutoffs in one pass.

    Computes the per-direction mean multiplicity once, prefix-sums the
    weighted contributions in slope order, and reads each cutoff off the
    prefix arrays.  Equivalent to calling :func:`expected_profile` per t.
    """
    jobs = [MomentJob(1, 0, 1), MomentJob(0, 1, 1)]
    if dirs is None:
        cut = _direct_cutoff(spec, params.alpha, jobs, tol)
        dirs = enumerate_directions(params.alpha, spec, cutoff=cut)
    w = dirs.weights()
    # per-direction share of the tolerance, weighted by the coordinate sums
    share = tol / (2.0 * float(np.sum(dirs.x1 + dirs.x2)) + 2.0)
    mean = _mean_multiplicity(spec, w, share)
    pre1 = np.concatenate(([0.0], np.cumsum(dirs.x1 * mean)))
    pre2 = np.concatenate(([0.0], np.cumsum(dirs.x2 * mean)))
    n1, n2 = params.n
    out = []
    for t in ts:
        if t == math.inf:
            out.append((float(pre1[-1]), float(pre2[-1])))
            continue
        frac = Fraction(t) if not isinstance(t, Fraction) else t
        if frac < 0:
            raise DomainError("t must be nonnegative")
        mask = dirs.slope_mask(frac.numerator * n2, frac.denominator * n1)
        # sorted by slope, so the mask is a prefix
        count = int(mask.sum())
        out.append((float(pre1[count]), float(pre2[count])))
    return out


def covariance(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
) -> np.ndarray:
    """Endpoint covariance matrix: sum_x x_i x_j Var[multiplicity at x]."""
    jobs = [MomentJob(2, 0, 2), MomentJob(1, 1, 2), MomentJob(0, 2, 2)]
    k11, k12, k22 = direct_moments(spec, params, jobs, tol, dirs=dirs)
    mat = np.array([[k11, k12], [k12, k22]])
    if not (mat[0, 0] > 0.0 and np.linalg.det(mat) > 0.0):
        raise PrecisionError("covariance is not positive definite")
    return mat


def endpoint_cumulant(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    q: int,
    j: int,
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
) -> float:
    """q-th cumulant of endpoint coordinate j (1 or 2), q <= 8."""
    if not 1 <= q <= 8:
        raise DomainError("cumulant order must be in 1..8")
    if j not in (1, 2):
        raise DomainError("coordinate must be 1 or 2")
    job = MomentJob(q, 0, q) if j == 1 else MomentJob(0, q, q)
    return direct_moments(spec, params, [job], tol, dirs=dirs)[0]


def moments_from_cumulants(cumulants: Sequence) -> list:
    """Raw moments m_1..m_q from cumulants via the binomial recursion

        m_q = k_q + sum_{i=1}^{q-1} C(q-1, i-1) k_i m_{q-i}.

    Exact when the inputs are ints or Fractions.
    """
    if not cumulants:
        raise DomainError("need at least one cumulant")
    exact = all(isinstance(c, (int, Fraction)) for c in cumulants)
    cums = [Fraction(c) if exact else float(c) for c in cumulants]
    moments: list = []
    for q in range(1, len(cums) + 1):
        acc = cums[q - 1]
        for i in range(1, q):
            acc += math.comb(q - 1, i - 1) * cums[i - 1] * moments[q - i - 1]
        moments.append(acc)
    return moments


# ---------------------------------------------------------------------------
# third absolute central moments and the Lyapunov coefficient
# ---------------------------------------------------------------------------


def _mean_multiplicity(spec: EnsembleSpec, w: np.ndarray, tol: float) -> np.ndarray:
    """Vector of mean multiplicities sum_k k c_k w^k per direction."""
    env = tail_envelope(spec)
    out = np.zeros_like(w)
    w_pow = w.copy()
    active = np.arange(len(w))
    coeffs = log_coeffs(spec, 256)
    k = 0
    w_max = float(w.max()) if len(w) else 0.0
    u = env.ratio * w_max
    while len(active):
        k += 1
        if k > len(coeffs.coeffs):
            coeffs = log_coeffs(spec, 2 * len(coeffs.coeffs))
        ck = coeffs.log_coeff(k)
        if ck != 0.0:
            out[active] += k * ck * w_pow
        if env.ratio == 0.0:
            break
        # per-direction remainder bound, same majorant as direct_moments
        if u <= 0.0:
            break
        rest = env.coeff * env.ratio**k * float(k) * power_geometric_sum(1, u) / u
        keep = w_pow * rest > tol
        active = active[keep]
        w_pow = w_pow[keep] * w[active]
    return out


def _gf_vector(spec: EnsembleSpec, w: np.ndarray) -> np.ndarray:
    """Generating-function values g(w) per direction, closed forms."""
    r, rho = spec.r, spec.rho
    fam = spec.family
    u = rho * w
    if fam == "multiset":
        return (1.0 - u) ** (-r)
    if fam == "selection":
        return (1.0 + u) ** r
    if fam == "assembly":
        return np.exp(r * w / (1.0 - u))
    if fam == "logratio":
        out = np.ones_like(w)
        nz = u > 0.0
        out[nz] = (-np.log1p(-u[nz]) / u[nz]) ** r
        return out
    out = np.zeros_like(w)
    for k, c in enumerate(spec.custom_log.coeffs, start=1):
        out += c * w**k
    return np.exp(out)


def third_abs_central_sum(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
) -> float:
    """sum_x |x|^3 E|multiplicity(x) - mean|^3, certified truncation.

    Per direction the expectation is a probability-weighted sum over the
    multiplicity law, truncated where a geometric comparison of the
    weight coefficients certifies the remaining mass.
    """
    if dirs is None:
        # |x|^3 <= 2^(3/2) (x1^3 + x2^3); on the excluded region the
        # third moment is within a whisker of its leading cumulant, so a
        # generous constant folds both into the tolerance split
        cut = _direct_cutoff(spec, params.alpha, [MomentJob(3, 0, 3)], tol / 32.0)
        dirs = enumerate_directions(params.alpha, spec, cutoff=cut)
    x1 = dirs.x1.astype(np.float64)
    x2 = dirs.x2.astype(np.float64)
    w = dirs.weights()
    norm3 = (x1 * x1 + x2 * x2) ** 1.5
    mean = _mean_multiplicity(spec, w, tol * 1e-3 / max(norm3.sum(), 1.0))
    gf = _gf_vector(spec, w)
    gf_half = _gf_vector(spec, (1.0 + w) / 2.0)

    # per-direction absolute share of the total tolerance
    share = tol / (2.0 * len(w) * np.maximum(norm3, 1.0))

    total = np.zeros_like(w)
    w_pow = np.ones_like(w)
    idx = np.arange(len(w))
    wc = weight_coeffs(spec, 64)
    l = 0
    while len(idx):
        if l >= len(wc.coeffs):
            wc = weight_coeffs(spec, 2 * (len(wc.coeffs) - 1))
        bl = wc.weight_coeff(l)
        if bl != 0.0:
            total[idx] += np.abs(l - mean[idx]) ** 3 * bl * w_pow / gf[idx]
        # remaining mass: sum_{j>l} j^3 w_j s^j <= (l+1)^3 (s/u)^(l+1) g(u)
        # once j^3 (s/u)^j is decreasing past l, i.e. (l+1) ln(u/s) >= 3
        wi = w[idx]
        u_half = (1.0 + wi) / 2.0
        log_ratio = np.log(u_half) - np.log(np.maximum(wi, 1e-300))
        rest = (
            (1.0 + mean[idx]) ** 3
            * (l + 2.0) ** 3
            * (wi / u_half) ** (l + 1)
            * gf_half[idx]
            / gf[idx]
        )
        valid = (l + 1) * log_ratio >= 3.0
        keep = ~valid | (rest > share[idx])
        idx = idx[keep]
        w_pow = w_pow[keep] * w[idx]
        l += 1
        if l > 1 << 17:
            raise PrecisionError("multiplicity law does not certify")
    return float(norm3 @ total)


def spectral_norm_2x2(mat: np.ndarray) -> float:
    a, b, c = mat[0, 0], mat[0, 1], mat[1, 1]
    half_gap = math.hypot(0.5 * (a - c), b)
    return 0.5 * (a + c) + half_gap


def inv_sqrt_2x2(mat: np.ndarray) -> np.ndarray:
    """Symmetric positive-definite inverse square root, closed form."""
    a, b, c = mat[0, 0], mat[0, 1], mat[1, 1]
    half_tr = 0.5 * (a + c)
    half_gap = math.hypot(0.5 * (a - c), b)
    lam1, lam2 = half_tr + half_gap, half_tr - half_gap
    if lam2 <= 0.0:
        raise PrecisionError("matrix is not positive definite")
    if half_gap == 0.0:
        return np.eye(2) / math.sqrt(lam1)
    # eigenvector for lam1, chosen from the numerically larger residual
    if abs(lam1 - a) >= abs(lam1 - c):
        v = np.array([b, lam1 - a])
    else:
        v = np.array([lam1 - c, b])
    norm = math.hypot(v[0], v[1])
    if norm == 0.0:
        return np.eye(2) / math.sqrt(lam1)
    v = v / norm
    p1 = np.outer(v, v)
    p2 = np.eye(2) - p1
    return p1 / math.sqrt(lam1) + p2 / math.sqrt(lam2)


def lyapunov_coefficient(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
    cov: np.ndarray | None = None,
) -> float:
    """Spectral norm of the covariance inverse square root, cubed, times
    the third-absolute-moment sum.

    Governs the local normal approximation error of the endpoint law.
    """
    if cov is None:
        cov = covariance(spec, params, tol, dirs=dirs)
    v_norm = spectral_norm_2x2(np.linalg.inv(cov)) ** 0.5
    s3 = third_abs_central_sum(spec, params, tol, dirs=dirs)
    return v_norm**3 * s3


# ---------------------------------------------------------------------------
# moment report and the local-CLT density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    """All analytic moment quantities at one calibrated tilt."""

    params: GrandCanonicalParams
    mean: tuple[float, float]
    cov: np.ndarray
    det_cov: float
    inv_sqrt_cov: np.ndarray
    cumulants: dict[tuple[int, int], float]  # (q, coordinate) -> value
    lyapunov: float

    def validate(self) -> None:
        resid = self.inv_sqrt_cov @ self.inv_sqrt_cov @ self.cov - np.eye(2)
        if np.abs(resid).max() > 1e-10:
            raise PrecisionError("inverse square root fails its residual check")
        for j in (1, 2):
            if (1, j) in self.cumulants:
                if not math.isclose(
                    self.cumulants[(1, j)], self.mean[j - 1], rel_tol=1e-6
                ):
                    raise PrecisionError("first cumulant disagrees with the mean")

    def to_json(self) -> dict:
        return {
            "n": list(self.params.n),
            "kappa": self.params.kappa,
            "alpha": list(self.params.alpha),
            "z": list(self.params.z),
            "mean": list(self.mean),
            "cov": [list(row) for row in self.cov.tolist()],
            "det_cov": self.det_cov,
            "inv_sqrt_cov": [list(row) for row in self.inv_sqrt_cov.tolist()],
            "cumulants": {f"{q},{j}": v for (q, j), v in sorted(self.cumulants.items())},
            "lyapunov": self.lyapunov,
        }


def moment_report(
    spec: EnsembleSpec,
    params: GrandCanonicalParams,
    q_max: int = 4,
    tol: float = 1e-9,
    dirs: DirectionSet | None = None,
) -> MomentReport:
    mean = expected_endpoint(spec, params, tol)
    cov = covariance(spec, params, tol, dirs=dirs)
    cums = {}
    for q in range(1, q_max + 1):
        for j in (1, 2):
            cums[(q, j)] = endpoint_cumulant(spec, params, q, j, tol, dirs=dirs)
    rep = MomentReport(
        params=params,
        mean=mean,
        cov=cov,
        det_cov=float(np.linalg.det(cov)),
        inv_sqrt_cov=inv_sqrt_2x2(cov),
        cumulants=cums,
        lyapunov=lyapunov_coefficient(spec, params, tol, dirs=dirs, cov=cov),
    )
    rep.validate()
    return rep


def normal_density(report: MomentReport, m: tuple[float, float]) -> float:
    """Bivariate normal density with the report's mean and covariance at m.

    The local limit theorem states the endpoint law is this density plus
    a uniformly small correction.
    """
    d = np.asarray(m, dtype=np.float64) - np.asarray(report.mean)
    y = d @ report.inv_sqrt_cov
    return math.exp(-0.5 * float(y @ y)) / (2.0 * math.pi * math.sqrt(report.det_cov))
