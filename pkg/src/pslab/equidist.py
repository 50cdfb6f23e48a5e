"""Equidistribution lab for the sample family { {gamma * n^phi_a(m/n)} }.

Provides the empirical side of the weak-convergence claim: sample
generation with certified fractional parts, star discrepancy, Weyl
sums, and the g_n evaluators with hand-differentiated closed forms.

With u = (x + floor(eta1*n))/n, L = ln a, c = ln n and p = phi_a(u) =
L/ln(u), the derivatives of g_n(x) = gamma * exp(c*p) are

    g'   = -g * c * p^2 / (n L u)
    g''  =  g/(n u)^2 * [ c^2 p^4/L^2 + 2 c p^3/L^2 + c p^2/L ]
    g''' = -g/(n u)^3 * [ c^3 p^6/L^3 + 3 c^2 (2 p^5/L^3 + p^4/L^2)
                          + c (6 p^4/L^3 + 6 p^3/L^2 + 2 p^2/L) ]

obtained by repeated differentiation of p via dp/dx = -p^2/(L n u).
The leading c^3 term is g * (log n / n)^3 * u^-3 * p^6/(-L^3); the
remaining terms decay one and two powers of log n faster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

from .certified import DEFAULT_POLICY, PrecisionPolicy, phi, pow_cv_exponent
from .errors import DomainError, EmptyInput, PrecisionExhausted

RatIn = Union[int, Fraction, str]


def _check_etas(a: Fraction, eta1: Fraction, eta2: Fraction) -> None:
    """Slope bounds must sit strictly between a and sqrt(a); the sqrt
    comparisons are done on squares, exactly."""
    if not eta1 < eta2:
        raise DomainError("need eta1 < eta2")
    if a < 1:
        # a < eta1 and eta2 < sqrt(a)  (exact: eta2^2 < a)
        if not (a < eta1 and eta2 * eta2 < a):
            raise DomainError(f"need {a} < eta1 < eta2 < sqrt({a})")
    else:
        if not (eta1 * eta1 > a and eta2 < a):
            raise DomainError(f"need sqrt({a}) < eta1 < eta2 < {a}")


@dataclass(frozen=True)
class SamplePoints:
    """Fractional parts {gamma * n^phi_a(m/n)} over integers m/n in (eta1, eta2)."""

    a: Fraction
    gamma: Fraction
    eta1: Fraction
    eta2: Fraction
    n: int
    points: tuple[float, ...]
    flagged: tuple[int, ...] = ()  # m whose point could not be certified

    @property
    def count(self) -> int:
        return len(self.points) + len(self.flagged)


def equid_sample(
    a: RatIn,
    gamma: RatIn,
    eta1: RatIn,
    eta2: RatIn,
    n: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> SamplePoints:
    """The sample at index n, each point certified to double precision."""
    a, gamma = Fraction(a), Fraction(gamma)
    eta1, eta2 = Fraction(eta1), Fraction(eta2)
    if gamma == 0:
        raise DomainError("gamma must be nonzero")
    if n < 1:
        raise DomainError("n must be >= 1")
    _check_etas(a, eta1, eta2)
    tol = Fraction(1, 2**60)
    m_lo = (eta1 * n).numerator // (eta1 * n).denominator + 1
    hi_val = eta2 * n
    m_hi = -((-hi_val.numerator) // hi_val.denominator) - 1
    pts: list[float] = []
    flagged: list[int] = []
    for m in range(m_lo, m_hi + 1):
        u = Fraction(m, n)
        p_cv = phi(a, u, policy)
        expo = p_cv.lo if p_cv.exact else (
            lambda bits, _u=u: phi(a, _u, policy, bits=bits)
        )
        got = None
        for bits in policy.schedule():
            x = pow_cv_exponent(n, expo, bits) * gamma
            f = x.floor_decided()
            if f is None or (x.width >= tol and not x.exact):
                continue
            got = float((x - f).mid)
            break
        if got is None:
            flagged.append(m)
        else:
            pts.append(got)
    return SamplePoints(a, gamma, eta1, eta2, n, tuple(pts), tuple(flagged))


def star_discrepancy(points: Sequence[float]) -> float:
    """D*_N by the sorted-points formula."""
    if len(points) == 0:
        raise EmptyInput("no points")
    xs = sorted(points)
    N = len(xs)
    d = 0.0
    for i, x in enumerate(xs, start=1):
        d = max(d, i / N - x, x - (i - 1) / N)
    return d


def weyl_sum(b: int, points: Sequence[float]) -> float:
    """|N^-1 sum_j exp(2 pi i b x_j)|."""
    if b == 0:
        raise DomainError("b must be nonzero")
    if len(points) == 0:
        raise EmptyInput("no points")
    xs = np.asarray(points, dtype=float)
    s = np.exp((2j * np.pi * b) * xs).mean()
    return float(abs(s))


@dataclass(frozen=True)
class GFuncs:
    """Evaluators for g_n and its first three derivatives at one n.

    Values are mpmath floats at the context precision (dps), since the
    third-derivative comparisons need more headroom than doubles give.
    x must keep u = (x + floor(eta1*n))/n inside the slope domain, and
    inside (eta1, eta2) when eta2 is supplied.
    """

    a: Fraction
    gamma: Fraction
    eta1: Fraction
    n: int
    eta2: Optional[Fraction] = None
    dps: int = 40

    def __post_init__(self) -> None:
        if self.a <= 0 or self.a == 1:
            raise DomainError("a must be positive and != 1")
        if self.gamma == 0:
            raise DomainError("gamma must be nonzero")
        if self.n < 1:
            raise DomainError("n must be >= 1")

    @property
    def shift(self) -> int:
        v = self.eta1 * self.n
        return v.numerator // v.denominator

    def u_of(self, x) -> Fraction:
        return (_to_fraction(x) + self.shift) / self.n

    def _check_u(self, u: Fraction) -> None:
        lo, hi = (self.a, Fraction(1)) if self.a < 1 else (Fraction(1), self.a)
        if not (lo < u < hi):
            raise DomainError(f"u = {float(u)} outside the slope domain ({lo},{hi})")
        if self.eta2 is not None and not (self.eta1 < u < self.eta2):
            raise DomainError(f"u = {float(u)} outside (eta1, eta2)")

    def _base(self, x):
        """(g, c, p, L, u) at x, as mpf at the working precision."""
        u = self.u_of(x)
        self._check_u(u)
        with mpmath.mp.workdps(self.dps):
            uf = mpmath.mpf(u.numerator) / u.denominator
            L = mpmath.log(mpmath.mpf(self.a.numerator) / self.a.denominator)
            p = L / mpmath.log(uf)
            c = mpmath.log(self.n)
            g = (mpmath.mpf(self.gamma.numerator) / self.gamma.denominator
                 ) * mpmath.exp(c * p)
            return g, c, p, L, uf

    def g(self, x):
        return self._base(x)[0]

    def gh(self, x, h):
        """g_{n,h}(x) = g_n(x+h) - g_n(x)."""
        with mpmath.mp.workdps(self.dps):
            return self.g(_to_fraction(x) + _to_fraction(h)) - self.g(x)

    def g1(self, x):
        g, c, p, L, u = self._base(x)
        with mpmath.mp.workdps(self.dps):
            return -g * c * p**2 / (self.n * L * u)

    def g2(self, x):
        g, c, p, L, u = self._base(x)
        with mpmath.mp.workdps(self.dps):
            br = c**2 * p**4 / L**2 + 2 * c * p**3 / L**2 + c * p**2 / L
            return g * br / (self.n * u) ** 2

    def g3(self, x):
        g, c, p, L, u = self._base(x)
        with mpmath.mp.workdps(self.dps):
            br = (c**3 * p**6 / L**3
                  + 3 * c**2 * (2 * p**5 / L**3 + p**4 / L**2)
                  + c * (6 * p**4 / L**3 + 6 * p**3 / L**2 + 2 * p**2 / L))
            return -g * br / (self.n * u) ** 3


def _to_fraction(x) -> Fraction:
    """Exact conversion of int/float/Fraction/mpf arguments."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    t = x._mpf_  # mpmath float: (sign, man, exp, bc), exactly man * 2^exp
    sign, man, exp, _ = t
    v = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -v if sign else v


def g_funcs(a: RatIn, gamma: RatIn, eta1: RatIn, n: int,
            eta2: Optional[RatIn] = None, dps: int = 40) -> GFuncs:
    return GFuncs(Fraction(a), Fraction(gamma), Fraction(eta1), n,
                  None if eta2 is None else Fraction(eta2), dps)


@dataclass(frozen=True)
class BoundParams:
    """Exponent pair bracketing phi on (eta1, eta2), with band constants."""

    sigma1: float
    sigma2: float
    c1: float
    c2: float

    def __post_init__(self) -> None:
        if not (1 < self.sigma1 < self.sigma2 < 2):
            raise DomainError("need 1 < sigma1 < sigma2 < 2")
        if self.c1 <= 0 or self.c2 <= 0:
            raise DomainError("band constants must be positive")


@dataclass(frozen=True)
class BandRow:
    n: int
    m1: float  # min_x |g'''| * n^(3-sigma1) / (log n)^3
    m2: float  # max_x |g'''| * n^(3-sigma2) / (log n)^3


@dataclass(frozen=True)
class BandReport:
    params: BoundParams
    rows: tuple[BandRow, ...]
    n0: Optional[int]  # smallest grid n from which the band holds onward
    violations: tuple[int, ...]

    @property
    def feasible(self) -> bool:
        return self.n0 is not None


def third_derivative_band(
    a: RatIn,
    gamma: RatIn,
    eta1: RatIn,
    eta2: RatIn,
    n_grid: Sequence[int],
    x_count: int = 9,
) -> BandReport:
    """Empirical fit of the two-sided |g'''| envelope.

    sigma1, sigma2 come from phi at the interval endpoints.  The
    constants hug the global extremes over the grid with a 10% slack
    margin -- a concrete witness that some (c1, c2) pair works -- and n0
    is the smallest grid n from which every larger grid n satisfies the
    band.  Violations can only appear for constants the caller re-checks
    on a different grid.
    """
    a, gamma = Fraction(a), Fraction(gamma)
    eta1, eta2 = Fraction(eta1), Fraction(eta2)
    _check_etas(a, eta1, eta2)
    ns = sorted(set(int(n) for n in n_grid))
    if not ns or ns[0] < 2:
        raise DomainError("n_grid must contain integers >= 2")
    if x_count < 1:
        raise DomainError("x_count must be >= 1")
    pv1, pv2 = phi(a, eta1), phi(a, eta2)
    s_pair = sorted((float(pv1.mid), float(pv2.mid)))
    sigma1, sigma2 = s_pair

    rows = []
    for n in ns:
        gf = GFuncs(a, gamma, eta1, n, eta2)
        lo = eta1 * n - gf.shift
        hi = eta2 * n - gf.shift
        span = hi - lo
        xs = [lo + span * Fraction(j + 1, x_count + 1) for j in range(x_count)]
        vals = [abs(gf.g3(x)) for x in xs]
        logn3 = math.log(n) ** 3
        m1 = float(min(vals)) * n ** (3 - sigma1) / logn3
        m2 = float(max(vals)) * n ** (3 - sigma2) / logn3
        rows.append(BandRow(n, m1, m2))

    c1 = min(r.m1 for r in rows) / 1.1
    c2 = max(r.m2 for r in rows) * 1.1
    violations = tuple(r.n for r in rows if r.m1 < c1 or r.m2 > c2)
    n0 = None
    for i, r in enumerate(rows):
        if all(rr.m1 >= c1 and rr.m2 <= c2 for rr in rows[i:]):
            n0 = r.n
            break
    params = BoundParams(sigma1, sigma2, c1, c2)
    return BandReport(params, tuple(rows), n0, violations)


def equid_table(
    a: RatIn,
    gamma: RatIn,
    eta1: RatIn,
    eta2: RatIn,
    n_grid: Sequence[int],
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> list[tuple]:
    """Rows (n, N_n, D*_N, weyl_b1, weyl_b2, weyl_b3) along the n-grid."""
    rows = []
    for n in n_grid:
        s = equid_sample(a, gamma, eta1, eta2, n, policy)
        if not s.points:
            raise EmptyInput(f"no sample points at n={n}")
        d = star_discrepancy(s.points)
        w = [weyl_sum(b, s.points) for b in (1, 2, 3)]
        rows.append((n, s.count, d, w[0], w[1], w[2]))
    return rows
