"""Coefficient-series engine for edge-multiplicity ensembles.

An ensemble is specified by nonnegative weight coefficients
(w_0 = 1, w_1, w_2, ...) whose generating function

    g(s) = 1 + sum_{l>=1} w_l s^l

is finite for |s| < 1.  The expansion ln g(s) = sum_{k>=1} c_k s^k defines
the log-coefficients c_k, which drive every analytic quantity downstream
(means, cumulants, calibration).  Four built-in families have closed forms
for both sequences:

    multiset   g(s) = (1 - rho*s)^(-r)        c_k = r rho^k / k
    selection  g(s) = (1 + rho*s)^r           c_k = r (-1)^(k-1) rho^k / k
    assembly   g(s) = exp(r*s / (1 - rho*s))  c_k = r rho^(k-1)
    logratio   g(s) = (-ln(1-rho*s)/(rho*s))^r   (c_k by exact recurrence)

Every evaluation that truncates an infinite series returns or checks a
certified bound on the omitted tail, derived from a per-family majorant
|c_k| <= C * rho^k / k^p.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

from .errors import DomainError, PrecisionError

MULTISET = "multiset"
SELECTION = "selection"
ASSEMBLY = "assembly"
LOGRATIO = "logratio"
CUSTOM = "custom"

FAMILIES = (MULTISET, SELECTION, ASSEMBLY, LOGRATIO, CUSTOM)

# Exact rational recurrence is used up to this order; beyond it the
# fractions overflow any practical word size, so we continue in floats
# with compensated summation.
RATIONAL_ORDER_CAP = 64


@dataclass(frozen=True)
class TailEnvelope:
    """Certified majorant |c_k| <= coeff * ratio^k / k^power for all k >= 1.

    ``alternating`` marks sign-alternating series whose absolute terms
    decrease, enabling the sharper first-omitted-term remainder.
    """

    coeff: float
    ratio: float
    power: float
    alternating: bool = False

    def term(self, k: int) -> float:
        if self.ratio == 0.0:
            return self.coeff if k == 1 else 0.0
        return self.coeff * self.ratio**k / k**self.power

    def dirichlet_tail(self, trunc: int, sigma: float) -> float:
        """Bound on sum_{k>trunc} |c_k| / k^sigma."""
        if self.ratio == 0.0:
            return 0.0
        p = self.power + sigma
        if self.ratio < 1.0:
            return (
                self.coeff
                * self.ratio ** (trunc + 1)
                / ((trunc + 1) ** p * (1.0 - self.ratio))
            )
        if p > 1.0:
            # integral comparison for the p-series remainder
            return self.coeff * trunc ** (1.0 - p) / (p - 1.0)
        return math.inf

    def geometric_tail(self, trunc: int, extra_ratio: float) -> float:
        """Bound on sum_{k>trunc} |c_k| * extra_ratio^k for extra_ratio < 1."""
        if self.ratio == 0.0:
            # degenerate envelope: only the k = 1 coefficient is nonzero
            return self.coeff * extra_ratio if trunc == 0 else 0.0
        u = self.ratio * extra_ratio
        if u == 0.0:
            return 0.0
        if u >= 1.0:
            return math.inf
        return self.coeff * u ** (trunc + 1) / ((trunc + 1) ** self.power * (1.0 - u))

    def geometric_total(self, extra_ratio: float) -> float:
        """Bound on sum_{k>=1} |c_k| * extra_ratio^k."""
        return self.geometric_tail(0, extra_ratio)


@dataclass(frozen=True)
class CoeffSeries:
    """A finite prefix of a coefficient sequence.

    ``kind`` is "log" for log-coefficients (indexed from 1, coeffs[i] is
    the coefficient of s^(i+1)) or "weight" for weight coefficients
    (indexed from 0, coeffs[0] must equal 1).  ``envelope``, when present,
    certifies the omitted tail.
    """

    kind: str
    coeffs: tuple[float, ...]
    envelope: TailEnvelope | None = None
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("log", "weight"):
            raise DomainError(f"unknown series kind {self.kind!r}")
        if self.kind == "weight":
            if not self.coeffs or self.coeffs[0] != 1.0:
                raise DomainError("weight series must start with coefficient 1")

    @property
    def truncation_len(self) -> int:
        return len(self.coeffs)

    def log_coeff(self, k: int) -> float:
        """c_k for a log series (k >= 1)."""
        if self.kind != "log":
            raise DomainError("log_coeff on a weight series")
        if k < 1:
            raise DomainError("log coefficients are indexed from 1")
        return self.coeffs[k - 1] if k <= len(self.coeffs) else 0.0

    def weight_coeff(self, l: int) -> float:
        """w_l for a weight series (l >= 0)."""
        if self.kind != "weight":
            raise DomainError("weight_coeff on a log series")
        if l < 0:
            raise DomainError("weight coefficients are indexed from 0")
        return self.coeffs[l] if l < len(self.coeffs) else 0.0

    def all_nonnegative(self) -> bool:
        return all(c >= 0.0 for c in self.coeffs)


@dataclass(frozen=True)
class EnsembleSpec:
    """An ensemble family with its parameters.

    Families: multiset, selection, assembly, logratio, custom.  Parameter
    ranges: r > 0 (selection: positive integer), rho in (0, 1] for
    multiset/selection/logratio and [0, 1] for assembly.  Custom ensembles
    carry their own log-coefficient prefix and, optionally, a tail
    envelope; without the envelope, certified evaluations refuse.
    """

    family: str
    r: float = 1.0
    rho: float = 1.0
    custom_log: CoeffSeries | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.family == CUSTOM:
            if self.custom_log is None or self.custom_log.kind != "log":
                raise DomainError("custom ensemble requires a log CoeffSeries")
            return
        if not (self.r > 0.0) or not math.isfinite(self.r):
            raise DomainError("r must be positive")
        if self.family == SELECTION and self.r != int(self.r):
            raise DomainError("selection requires integer r")
        if self.family == ASSEMBLY:
            ok = 0.0 <= self.rho <= 1.0
        else:
            ok = 0.0 < self.rho <= 1.0
        if not ok:
            raise DomainError(f"rho out of range for {self.family}")

    # -- wire format -------------------------------------------------

    def to_json(self) -> dict:
        obj: dict = {"family": self.family, "r": self.r, "rho": self.rho}
        if self.custom_log is not None:
            obj["custom_a"] = list(self.custom_log.coeffs)
            env = self.custom_log.envelope
            if env is not None:
                obj["custom_envelope"] = [env.coeff, env.ratio, env.power]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "EnsembleSpec":
        family = obj["family"]
        custom = None
        if "custom_a" in obj and obj["custom_a"] is not None:
            env = None
            if obj.get("custom_envelope"):
                c, q, p = obj["custom_envelope"]
                env = TailEnvelope(float(c), float(q), float(p))
            custom = CoeffSeries(
                "log", tuple(float(v) for v in obj["custom_a"]), envelope=env
            )
        return cls(
            family=family,
            r=float(obj.get("r", 1.0)),
            rho=float(obj.get("rho", 1.0)),
            custom_log=custom,
        )


def uniform_spec() -> EnsembleSpec:
    """The ensemble that weighs every line equally (multiset r=1, rho=1)."""
    return EnsembleSpec(MULTISET, 1.0, 1.0)


# ---------------------------------------------------------------------------
# envelopes and closed-form log-coefficients
# ---------------------------------------------------------------------------


def tail_envelope(spec: EnsembleSpec) -> TailEnvelope:
    """Per-family certified majorant of |c_k|.

    For the log-ratio family the recurrence bounds give
    c_k <= r rho^k/(k+1) < r rho^k/k, so the multiset envelope applies.
    Raises PrecisionError for a custom ensemble without a caller-supplied
    envelope, since no general tail law exists for arbitrary coefficients.
    """
    fam = spec.family
    if fam in (MULTISET, SELECTION):
        return TailEnvelope(spec.r, spec.rho, 1.0, alternating=(fam == SELECTION))
    if fam == LOGRATIO:
        return TailEnvelope(spec.r, spec.rho, 1.0)
    if fam == ASSEMBLY:
        if spec.rho == 0.0:
            return TailEnvelope(spec.r, 0.0, 0.0)
        return TailEnvelope(spec.r / spec.rho, spec.rho, 0.0)
    env = spec.custom_log.envelope
    if env is None:
        raise PrecisionError(
            "custom ensemble has no tail envelope; certified evaluation refused"
        )
    return env


def log_coeffs(spec: EnsembleSpec, count: int) -> CoeffSeries:
    """First ``count`` log-coefficients c_1..c_count of the ensemble."""
    if count < 1:
        raise DomainError("count must be >= 1")
    r, rho = spec.r, spec.rho
    fam = spec.family
    if fam == MULTISET:
        coeffs = tuple(r * rho**k / k for k in range(1, count + 1))
    elif fam == SELECTION:
        coeffs = tuple(
            r * (-1.0) ** (k - 1) * rho**k / k for k in range(1, count + 1)
        )
    elif fam == ASSEMBLY:
        coeffs = tuple(r * rho ** (k - 1) for k in range(1, count + 1))
    elif fam == LOGRATIO:
        return logratio_log_coeffs(r, rho, count)
    else:
        src = spec.custom_log
        coeffs = tuple(src.log_coeff(k) for k in range(1, count + 1))
        return CoeffSeries("log", coeffs, envelope=src.envelope)
    env = tail_envelope(spec)
    return CoeffSeries("log", coeffs, envelope=env)


@lru_cache(maxsize=8)
def logratio_fractions(count: int) -> tuple[Fraction, ...]:
    """Normalized log-coefficients of the log-ratio family, exactly.

    These are the rationals t_1, t_2, ... with t_m = (m/(m+1)) - sum of
    earlier terms taken against harmonic denominators:

        (m+1)/(m+2) = t_1/(m+1) + t_2/m + ... + t_m/2 + t_{m+1}.

    The actual log-coefficients are c_k = r rho^k t_k / k.  The first four
    values are 1/2, 5/12, 3/8, 251/720.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    cap = min(count, RATIONAL_ORDER_CAP)
    vals: list[Fraction] = []
    for m in range(cap):  # solving for t_{m+1}
        acc = Fraction(m + 1, m + 2)
        for i, t in enumerate(vals, start=1):
            acc -= t / (m + 2 - i)
        vals.append(acc)
    return tuple(vals)


# float continuation of the recurrence is quadratic in the order, so the
# computed prefix is kept and only extended on demand
_logratio_tilde_cache: list[float] = []


def _logratio_tildes(count: int) -> list[float]:
    tildes = _logratio_tilde_cache
    if not tildes:
        tildes.extend(float(t) for t in logratio_fractions(RATIONAL_ORDER_CAP))
    for m in range(len(tildes), count):  # m+1 is the new index
        head = (m + 1) / (m + 2)
        tail = math.fsum(t / (m + 2 - i) for i, t in enumerate(tildes, start=1))
        tildes.append(head - tail)
    return tildes[:count]


def logratio_log_coeffs(r: float, rho: float, count: int) -> CoeffSeries:
    """Log-coefficients of the log-ratio family, c_k = r rho^k t_k / k.

    Exact rationals are used up to order 64; beyond that the same
    recurrence runs in floating point with compensated summation.  Every
    coefficient is checked against the bracketing bounds

        r rho^k / (k^2 (k+1))  <=  c_k  <=  r rho^k / (k+1).
    """
    if not (r > 0.0):
        raise DomainError("r must be positive")
    if not (0.0 < rho <= 1.0):
        raise DomainError("rho must lie in (0, 1]")
    if count < 1:
        raise DomainError("count must be >= 1")
    tildes = _logratio_tildes(count)
    coeffs = []
    for k in range(1, count + 1):
        ck = r * rho**k * tildes[k - 1] / k
        lo = r * rho**k / (k * k * (k + 1))
        hi = r * rho**k / (k + 1)
        if not (lo * (1 - 1e-9) <= ck <= hi * (1 + 1e-9)):
            raise PrecisionError(f"log-ratio coefficient {k} escaped its bracket")
        coeffs.append(ck)
    return CoeffSeries(
        "log", tuple(coeffs), envelope=TailEnvelope(r, rho, 1.0)
    )


# ---------------------------------------------------------------------------
# exp/log transforms between weight and log coefficients
# ---------------------------------------------------------------------------


def exp_series(log_c: CoeffSeries, count: int) -> CoeffSeries:
    """Weight coefficients w_0..w_count of exp(sum c_k s^k).

    Standard recurrence l*w_l = sum_{k=1..l} k c_k w_{l-k}.
    """
    if log_c.kind != "log":
        raise DomainError("exp_series expects a log series")
    if count < 0:
        raise DomainError("count must be >= 0")
    w = [1.0]
    for l in range(1, count + 1):
        s = math.fsum(
            k * log_c.log_coeff(k) * w[l - k]
            for k in range(1, l + 1)
            if log_c.log_coeff(k) != 0.0
        )
        w.append(s / l)
    return CoeffSeries("weight", tuple(w))


def log_series(weight_c: CoeffSeries, count: int) -> CoeffSeries:
    """Log-coefficients c_1..c_count of ln(1 + sum_{l>=1} w_l s^l).

    Inverse of :func:`exp_series`; requires w_0 = 1.
    """
    if weight_c.kind != "weight":
        raise DomainError("log_series expects a weight series")
    if count < 1:
        raise DomainError("count must be >= 1")
    c = []
    for k in range(1, count + 1):
        s = math.fsum(
            j * c[j - 1] * weight_c.weight_coeff(k - j) for j in range(1, k)
        )
        c.append(weight_c.weight_coeff(k) - s / k)
    return CoeffSeries("log", tuple(c))


def weight_coeffs(spec: EnsembleSpec, count: int) -> CoeffSeries:
    """First ``count``+1 weight coefficients w_0..w_count of the ensemble.

    Closed binomial forms for multiset and selection; exp of the
    log-series otherwise.
    """
    if count < 0:
        raise DomainError("count must be >= 0")
    r, rho = spec.r, spec.rho
    if spec.family == MULTISET:
        w = [1.0]
        for l in range(1, count + 1):
            w.append(w[-1] * (r + l - 1) / l * rho)
        return CoeffSeries("weight", tuple(w))
    if spec.family == SELECTION:
        ri = int(r)
        w = [float(math.comb(ri, l)) * rho**l if l <= ri else 0.0 for l in range(count + 1)]
        return CoeffSeries("weight", tuple(w))
    if spec.family == ASSEMBLY and rho == 0.0:
        w = [1.0]
        for l in range(1, count + 1):
            w.append(w[-1] * r / l)
        return CoeffSeries("weight", tuple(w))
    if count == 0:
        return CoeffSeries("weight", (1.0,))
    return exp_series(log_coeffs(spec, count), count)


def weight_tail_bound(spec: EnsembleSpec, trunc: int, s: float) -> float:
    """Bound on sum_{l>trunc} w_l s^l for a nonnegative-weight ensemble.

    Uses the geometric comparison w_l s^l <= (s/u)^l w_l u^l with
    u = (1+s)/2 < 1, so the tail is at most (s/u)^(trunc+1) * g(u).
    """
    if not (0.0 <= s < 1.0):
        raise DomainError("s must lie in [0, 1)")
    if s == 0.0:
        return 0.0
    if spec.family == SELECTION and trunc >= int(spec.r):
        return 0.0
    u = 0.5 * (1.0 + s)
    return (s / u) ** (trunc + 1) * gf_value(spec, u)


# ---------------------------------------------------------------------------
# generating-function values
# ---------------------------------------------------------------------------


def gf_value(spec: EnsembleSpec, s: float) -> float:
    """Generating function g(s) for real s in [0, 1)."""
    if not (0.0 <= s < 1.0) or not math.isfinite(s):
        raise DomainError("s must lie in [0, 1)")
    if s == 0.0:
        return 1.0
    r, rho = spec.r, spec.rho
    fam = spec.family
    u = rho * s
    if fam == MULTISET:
        return (1.0 - u) ** (-r)
    if fam == SELECTION:
        return (1.0 + u) ** r
    if fam == ASSEMBLY:
        return math.exp(r * s / (1.0 - u))
    if fam == LOGRATIO:
        if u == 0.0:
            return 1.0
        return (-math.log1p(-u) / u) ** r
    return math.exp(_custom_log_gf(spec, s))


def _custom_log_gf(spec: EnsembleSpec, s: float) -> float:
    src = spec.custom_log
    val = math.fsum(c * s**k for k, c in enumerate(src.coeffs, start=1))
    env = src.envelope
    if env is not None:
        tail = env.geometric_tail(len(src.coeffs), s)
        if not math.isfinite(tail):
            raise PrecisionError("custom envelope diverges at this argument")
    return val


def log_gf(spec: EnsembleSpec, s: float) -> float:
    """ln g(s) for real s in [0, 1), via closed forms."""
    if not (0.0 <= s < 1.0):
        raise DomainError("s must lie in [0, 1)")
    r, rho = spec.r, spec.rho
    u = rho * s
    fam = spec.family
    if fam == MULTISET:
        return -r * math.log1p(-u)
    if fam == SELECTION:
        return r * math.log1p(u)
    if fam == ASSEMBLY:
        return r * s / (1.0 - u)
    if fam == LOGRATIO:
        if u == 0.0:
            return 0.0
        return r * math.log(-math.log1p(-u) / u)
    return _custom_log_gf(spec, s)


def log_abs_gf(spec: EnsembleSpec, z: complex) -> float:
    """ln |g(z)| for complex |z| < 1, following the real-axis branch.

    For the log-ratio family the inner value -Log(1-rho z)/(rho z) has a
    positive real part whenever |rho z| < 1 (it equals the integral of
    1/(1 - t rho z) over t in [0,1]), so the principal power is the
    correct analytic continuation.
    """
    if abs(z) >= 1.0:
        raise DomainError("|z| must be < 1")
    r, rho = spec.r, spec.rho
    u = rho * z
    fam = spec.family
    if fam == MULTISET:
        return -r * math.log(abs(1.0 - u))
    if fam == SELECTION:
        return r * math.log(abs(1.0 + u))
    if fam == ASSEMBLY:
        return r * (z / (1.0 - u)).real
    if fam == LOGRATIO:
        if u == 0:
            return 0.0
        return r * math.log(abs(-cmath.log(1.0 - u) / u))
    src = spec.custom_log
    acc = complex(0.0)
    zp = complex(1.0)
    for c in src.coeffs:
        zp *= z
        acc += c * zp
    return acc.real


# ---------------------------------------------------------------------------
# Dirichlet-type sums of log-coefficients
# ---------------------------------------------------------------------------


class DirichletValue(NamedTuple):
    value: float
    abs_value: float
    tail_bound: float


def dirichlet_sum(log_c: CoeffSeries, sigma: float, tol: float) -> DirichletValue:
    """sum_k c_k / k^sigma with a certified tail bound at the truncation.

    Returns the signed sum, the absolute-coefficient sum, and the tail
    bound, which is guaranteed <= tol or a PrecisionError is raised.
    Selection-type series get the alternating-series remainder (first
    omitted term), all others a geometric or p-series envelope tail.
    """
    if log_c.kind != "log":
        raise DomainError("dirichlet_sum expects a log series")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    env = log_c.envelope
    if env is None:
        raise PrecisionError("series has no tail envelope; cannot certify")
    trunc = len(log_c.coeffs)
    value = math.fsum(c / k**sigma for k, c in enumerate(log_c.coeffs, start=1))
    abs_value = math.fsum(
        abs(c) / k**sigma for k, c in enumerate(log_c.coeffs, start=1)
    )
    tail = env.dirichlet_tail(trunc, sigma)
    if env.alternating:
        tail = min(tail, env.term(trunc + 1) / (trunc + 1) ** sigma)
    if not (tail <= tol):
        raise PrecisionError(
            f"certified tail {tail:.3e} exceeds tolerance {tol:.3e} "
            f"at truncation {trunc}"
        )
    return DirichletValue(value, abs_value + tail, tail)


def _logratio_dirichlet(r: float, rho: float, sigma: float, tol: float) -> DirichletValue:
    """Dirichlet sum for the log-ratio family via its integral transform.

    With L(s) = ln g(s) = r ln(-ln(1-rho s)/(rho s)) and 1/k^sigma =
    Gamma(sigma)^-1 int_0^inf tau^(sigma-1) e^(-k tau) dtau,

        A(sigma) = Gamma(sigma)^-1 int_0^inf tau^(sigma-1) L(e^-tau) dtau.

    The recurrence route needs ~10^5 quadratic-cost coefficients at tight
    tolerances because the coefficients decay like 1/(k^2 log k); the
    quadrature is exact up to the integrator's error estimate, which is
    reported as the tail bound (an estimate, not a certificate; tests
    cross-check the series route).  All coefficients are positive, so the
    absolute sum equals the sum.
    """
    from scipy.integrate import quad

    # substituting tau = e^-v removes the log-log endpoint singularity:
    # the integrand in v is smooth and decays like e^(-sigma v) ln v
    def integrand(v: float) -> float:
        if sigma * v > 700.0:
            return 0.0  # weight underflows; integrand vanishes
        tau = math.exp(-v)
        if tau <= 1.0:
            inner = -math.log(-math.expm1(-tau) * rho + (1.0 - rho))
        else:
            inner = -math.log1p(-rho * math.exp(-tau))
        return math.exp(-sigma * v) * r * (math.log(inner) + tau - math.log(rho))

    upper = 60.0
    val, err = quad(
        integrand, -math.log(upper), math.inf, epsabs=tol / 12.0, epsrel=1e-12, limit=400
    )
    # tau > upper remainder: L(e^-tau) <= r rho e^-tau / 2 there
    rest = r * rho * (upper + 1.0) ** sigma * math.exp(-upper)
    val /= math.gamma(sigma)
    # the integrator's estimate has been observed a few times optimistic
    err = 8.0 * err / math.gamma(sigma) + rest + 1e-15 * abs(val)
    if err > tol:
        raise PrecisionError("quadrature error estimate exceeds tolerance")
    return DirichletValue(val, val + err, err)


def dirichlet_sum_spec(
    spec: EnsembleSpec, sigma: float, tol: float = 1e-12
) -> DirichletValue:
    """Dirichlet sum of the ensemble's log-coefficients, auto-truncated."""
    if spec.family == LOGRATIO:
        return _logratio_dirichlet(spec.r, spec.rho, sigma, tol)
    env = tail_envelope(spec)
    trunc = 64
    while env.dirichlet_tail(trunc, sigma) > tol:
        trunc *= 2
        if trunc > 1 << 22:
            raise PrecisionError("tail does not certify within truncation budget")
    return dirichlet_sum(log_coeffs(spec, trunc), sigma, tol)


# ---------------------------------------------------------------------------
# characteristic-function damping check
# ---------------------------------------------------------------------------


def default_char_grids() -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Default grids 0.05*j covering (0, 1) x (0, pi]."""
    thetas = tuple(0.05 * j for j in range(1, 20))
    ts = tuple(0.05 * j for j in range(1, 63))
    return thetas, ts


def check_char_bound(
    spec: EnsembleSpec,
    c1: float,
    theta_grid: Sequence[float] | None = None,
    t_grid: Sequence[float] | None = None,
    slack: float = 1e-12,
) -> tuple[bool, float]:
    """Grid check of the uniform characteristic-function damping bound.

    Verifies, at every grid point, that

        ln|g(theta e^{it})| - ln g(theta)  <=  -c1 * w1 * theta * (1 - cos t),

    where w1 is the first weight coefficient.  Returns (holds, min_margin)
    with margin = RHS - LHS; holds allows a rounding ``slack`` below zero
    because ensembles with a single log-coefficient meet the bound with
    equality.  This is a falsification tool on a finite grid, not a proof.
    """
    if c1 <= 0.0:
        raise DomainError("c1 must be positive")
    if theta_grid is None or t_grid is None:
        dth, dt = default_char_grids()
        theta_grid = theta_grid if theta_grid is not None else dth
        t_grid = t_grid if t_grid is not None else dt
    if not theta_grid or not t_grid:
        raise DomainError("grids must be nonempty")
    w1 = log_coeffs(spec, 1).log_coeff(1)  # first weight equals first log coeff
    if w1 <= 0.0:
        raise DomainError("first weight coefficient must be positive")
    min_margin = math.inf
    for theta in theta_grid:
        if not (0.0 < theta < 1.0):
            raise DomainError("theta grid must lie in (0, 1)")
        base = log_gf(spec, theta)
        for t in t_grid:
            lhs = log_abs_gf(spec, theta * cmath.exp(1j * t)) - base
            rhs = -c1 * w1 * theta * (1.0 - math.cos(t))
            min_margin = min(min_margin, rhs - lhs)
    return (min_margin >= -slack, min_margin)


# ---------------------------------------------------------------------------
# weighted geometric sums (shared numeric utility)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _eulerian_row(p: int) -> tuple[int, ...]:
    if p == 0:
        return (1,)
    prev = _eulerian_row(p - 1)
    row = []
    for k in range(p):
        left = prev[k] * (k + 1) if k < len(prev) else 0
        right = prev[k - 1] * (p - k) if k >= 1 else 0
        row.append(left + right)
    return tuple(row)


def power_geometric_sum(p: int, u: float) -> float:
    """sum_{j>=1} j^p u^j for 0 <= u < 1, via Eulerian polynomials."""
    if not (0.0 <= u < 1.0):
        raise DomainError("u must lie in [0, 1)")
    if p < 0:
        raise DomainError("p must be >= 0")
    if u == 0.0:
        return 0.0
    if p == 0:
        return u / (1.0 - u)
    num = 0.0
    for coeff in reversed(_eulerian_row(p)):
        num = num * u + coeff
    return u * num / (1.0 - u) ** (p + 1)
