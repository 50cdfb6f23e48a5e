"""Interval-set models of the parameter families behind the two-sided split.

For fixed n every set handled here is a finite union of intervals on the
theta axis, so Lebesgue measure is just a sum of lengths:

* ``set_E`` -- {theta in (theta1, theta2) : ||theta*n|| <= 1/n}, exact
  rational endpoints m/n +- 1/n^2.
* ``set_F`` -- {theta : {gamma * n^phi_a(theta)} in I}, computed by
  inverting the strictly monotone map theta -> gamma * n^phi_a(theta).
* ``set_G`` -- the intersection of the two.
* ``set_H_sum`` -- cumulative measure of the analogous family past
  sqrt(a), whose lengths shrink fast enough for the series to converge.

On top of these sit the prime-pair statistics used by the second
Borel-Cantelli method (``bc_statistics``), exact triple counting with a
two-term bound fit (``count_triples`` / ``bound_check_triples``), and the
two-sided sweep ``dichotomy_scan``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .certified import (
    DEFAULT_POLICY,
    CertifiedValue,
    PrecisionPolicy,
    _ivctx,
    cv_from_iv,
    iv_from_fraction,
    phi,
    pow_cv_exponent,
    tri_le,
    tri_lt,
)
from .errors import DomainError, EmptyInput, PrecisionExhausted
from .systems import DiophSystem, solve_system_two

Rat = Union[int, Fraction]

__all__ = [
    "Interval",
    "IntervalSet",
    "MetricalParams",
    "IndexSets",
    "BCStats",
    "TripleBoundRow",
    "TripleBoundReport",
    "HSumReport",
    "DichotomyRow",
    "DichotomyReport",
    "psi",
    "interval_around",
    "index_sets",
    "set_E",
    "set_F",
    "set_G",
    "bc_statistics",
    "count_triples",
    "bound_check_triples",
    "set_H_sum",
    "dichotomy_scan",
    "window_share_threshold",
]


def psi(n: int) -> Fraction:
    """Approximation speed 1/n.  Fixed; the convergence facts the lab
    relies on (psi(mn) = psi(m)psi(n), sum psi(2^l) = 1) are properties
    of this exact choice."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return Fraction(1, n)


# ---------------------------------------------------------------------------
# interval sets


@dataclass(frozen=True)
class Interval:
    """One interval with rational endpoints and explicit boundary flags."""

    lo: Fraction
    hi: Fraction
    left_closed: bool = True
    right_closed: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.left_closed and self.right_closed)

    @property
    def length(self) -> Fraction:
        return Fraction(0) if self.empty else self.hi - self.lo

    def __contains__(self, x: Rat) -> bool:
        x = Fraction(x)
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.left_closed:
            return False
        if x == self.hi and not self.right_closed:
            return False
        return True


def _isect(x: Interval, y: Interval) -> Optional[Interval]:
    lo = max(x.lo, y.lo)
    hi = min(x.hi, y.hi)
    lc = ((x.left_closed if lo == x.lo else True)
          and (y.left_closed if lo == y.lo else True))
    rc = ((x.right_closed if hi == x.hi else True)
          and (y.right_closed if hi == y.hi else True))
    out = Interval(lo, hi, lc, rc)
    return None if out.empty else out


def _merge(cur: Interval, nxt: Interval) -> Optional[Interval]:
    """Union of two intervals with cur.lo <= nxt.lo, if it is connected."""
    if nxt.lo > cur.hi:
        return None
    if nxt.lo == cur.hi and not (cur.right_closed or nxt.left_closed):
        return None
    if nxt.hi > cur.hi:
        hi, rc = nxt.hi, nxt.right_closed
    elif nxt.hi == cur.hi:
        hi, rc = cur.hi, cur.right_closed or nxt.right_closed
    else:
        hi, rc = cur.hi, cur.right_closed
    lc = cur.left_closed or (nxt.left_closed and nxt.lo == cur.lo)
    return Interval(cur.lo, hi, lc, rc)


@dataclass(frozen=True)
class IntervalSet:
    """Sorted disjoint finite union of intervals; measure = sum of lengths.

    Build through ``from_components`` (sorts, drops empties, merges
    touching pieces); the raw constructor trusts its input.
    """

    components: tuple[Interval, ...] = ()

    @classmethod
    def from_components(cls, parts: Iterable[Interval]) -> "IntervalSet":
        live = sorted((p for p in parts if not p.empty),
                      key=lambda p: (p.lo, p.hi))
        out: list[Interval] = []
        for p in live:
            if out:
                joined = _merge(out[-1], p)
                if joined is not None:
                    out[-1] = joined
                    continue
            out.append(p)
        return cls(tuple(out))

    @staticmethod
    def empty() -> "IntervalSet":
        return IntervalSet(())

    @property
    def measure(self) -> Fraction:
        return sum((p.length for p in self.components), Fraction(0))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.components)

    def __contains__(self, x: Rat) -> bool:
        x = Fraction(x)
        lo, hi = 0, len(self.components) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            p = self.components[mid]
            if x in p:
                return True
            if x < p.lo:
                hi = mid - 1
            else:
                lo = mid + 1
        return False

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        a, b = self.components, other.components
        i = j = 0
        out: list[Interval] = []
        while i < len(a) and j < len(b):
            piece = _isect(a[i], b[j])
            if piece is not None:
                out.append(piece)
            if a[i].hi < b[j].hi:
                i += 1
            elif b[j].hi < a[i].hi:
                j += 1
            else:
                i += 1
                j += 1
        return IntervalSet(tuple(out))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.from_components(self.components + other.components)


# ---------------------------------------------------------------------------
# parameter bundles


@dataclass(frozen=True)
class MetricalParams:
    """System parameters plus a theta window on one side of sqrt(a).

    Two modes: a (theta1, theta2) window with margin eta strictly inside
    (a, sqrt(a)), or a single theta3 in (sqrt(a), 1).  All boundary
    comparisons against sqrt(a) are done exactly via squares.
    """

    system: DiophSystem
    theta1: Optional[Fraction] = None
    theta2: Optional[Fraction] = None
    eta: Optional[Fraction] = None
    theta3: Optional[Fraction] = None

    def __post_init__(self) -> None:
        a = self.system.a
        if not 0 < a < 1:
            raise DomainError("window parameters require 0 < a < 1")
        window_mode = self.theta1 is not None
        if window_mode:
            if self.theta2 is None or self.eta is None or self.theta3 is not None:
                raise DomainError("give (theta1, theta2, eta) or theta3 alone")
            t1, t2, eta = (Fraction(self.theta1), Fraction(self.theta2),
                           Fraction(self.eta))
            object.__setattr__(self, "theta1", t1)
            object.__setattr__(self, "theta2", t2)
            object.__setattr__(self, "eta", eta)
            if not a < t1 < t2:
                raise DomainError("need a < theta1 < theta2")
            if not t2 * t2 < a:
                raise DomainError("need theta2 < sqrt(a)")
            if not 0 < eta < min(t1, 1 - t2, (t2 - t1) / 3):
                raise DomainError(
                    "need 0 < eta < min(theta1, 1-theta2, (theta2-theta1)/3)")
        else:
            if self.theta2 is not None or self.eta is not None or self.theta3 is None:
                raise DomainError("give (theta1, theta2, eta) or theta3 alone")
            t3 = Fraction(self.theta3)
            object.__setattr__(self, "theta3", t3)
            if not (t3 * t3 > a and t3 < 1):
                raise DomainError("need sqrt(a) < theta3 < 1")

    @staticmethod
    def window(system: DiophSystem, theta1, theta2, eta) -> "MetricalParams":
        return MetricalParams(system, Fraction(theta1), Fraction(theta2),
                              Fraction(eta))

    @staticmethod
    def far_side(system: DiophSystem, theta3) -> "MetricalParams":
        return MetricalParams(system, theta3=Fraction(theta3))

    @property
    def side(self) -> str:
        return "window" if self.theta1 is not None else "far"


WindowLike = Union[MetricalParams, tuple]


def _window_of(params: WindowLike) -> tuple[Fraction, Fraction]:
    if isinstance(params, MetricalParams):
        if params.theta1 is None:
            raise DomainError("params carry no (theta1, theta2) window")
        return params.theta1, params.theta2
    t1, t2 = (Fraction(x) for x in params)
    if not 0 < t1 < t2 <= 1:
        raise DomainError("need 0 < theta1 < theta2 <= 1")
    return t1, t2


def _open_count(lo: Fraction, hi: Fraction) -> int:
    """Number of integers strictly between lo and hi."""
    if hi <= lo:
        return 0
    return max(0, -(-hi.numerator // hi.denominator) - 1
               - (lo.numerator // lo.denominator))


def _open_range(lo: Fraction, hi: Fraction) -> range:
    first = lo.numerator // lo.denominator + 1
    last = -(-hi.numerator // hi.denominator) - 1
    return range(first, max(first, last + 1))


@dataclass(frozen=True)
class IndexSets:
    """The inner/outer index windows S_n = {m : theta1+eta < m/n < theta2-eta}
    and T_n with the margins flipped outward."""

    n: int
    s: range
    t: range

    def __post_init__(self) -> None:
        if len(self.s) > 0 and not (
                self.s.start >= self.t.start and self.s.stop <= self.t.stop):
            raise DomainError("inner index window escapes the outer one")


def index_sets(n: int, params: MetricalParams) -> IndexSets:
    if n < 1:
        raise DomainError("n must be >= 1")
    t1, t2 = _window_of(params)
    eta = params.eta
    s = _open_range(n * (t1 + eta), n * (t2 - eta))
    t = _open_range(n * (t1 - eta), n * (t2 + eta))
    return IndexSets(n, s, t)


def interval_around(n: int, m: int) -> Interval:
    """Closed interval [m/n - psi(n)/n, m/n + psi(n)/n] around m/n."""
    w = psi(n) / n
    center = Fraction(m, n)
    return Interval(center - w, center + w)


# ---------------------------------------------------------------------------
# the three families on the window side


def set_E(n: int, params: WindowLike) -> IntervalSet:
    """{theta in (theta1, theta2) : ||theta * n|| <= 1/n}, exactly.

    ``params`` is a MetricalParams or a bare (theta1, theta2) pair.  For
    n <= 2 the distance condition is vacuous and the whole open window
    comes back in one piece.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    t1, t2 = _window_of(params)
    window = Interval(t1, t2, False, False)
    if psi(n) >= Fraction(1, 2):
        return IntervalSet((window,))
    parts = []
    for m in _open_range(n * t1 - psi(n), n * t2 + psi(n)):
        piece = _isect(interval_around(n, m), window)
        if piece is not None:
            parts.append(piece)
    return IntervalSet.from_components(parts)


def _phi_arg(a: Fraction, theta: Fraction,
             policy: PrecisionPolicy) -> "Fraction | Callable[[int], CertifiedValue]":
    cv = phi(a, theta, policy)
    if cv.exact:
        return cv.lo
    return lambda bits: phi(a, theta, policy, bits=bits)


_ENDPOINT_BITS = 96  # dyadic endpoint resolution for inverted boundaries

_COMPONENT_CAP = 2_000_000


def _dyadic(x: Fraction, bits: int = _ENDPOINT_BITS) -> Fraction:
    return Fraction(round(x * (1 << bits)), 1 << bits)


def set_F(n: int, params: MetricalParams,
          policy: PrecisionPolicy = DEFAULT_POLICY) -> IntervalSet:
    """{theta in (theta1, theta2) : {gamma * n^phi_a(theta)} in I}.

    v(theta) = gamma * n^phi_a(theta) is strictly monotone on the window
    (the window never crosses sqrt(a) by construction), so the set is a
    union over k of preimages of [k + i_lo, k + i_hi).  Each interior
    endpoint solves v(theta) = y exactly in the form theta =
    exp(log(a) * log(n) / log(y/gamma)) and is stored as a dyadic
    rational within 2^-96 of the true boundary; window-edge cuts stay
    exact.  Escalates precision per comparison; PrecisionExhausted if a
    boundary refuses to separate.
    """
    if n < 2:
        raise DomainError("n must be >= 2 (n = 1 collapses the twist)")
    sysm = params.system
    t1, t2 = _window_of(params)
    window = Interval(t1, t2, False, False)
    if sysm.i_lo == 0 and sysm.i_hi == 1:
        return IntervalSet((window,))
    a, gamma = sysm.a, sysm.gamma
    e1 = _phi_arg(a, t1, policy)
    e2 = _phi_arg(a, t2, policy)

    increasing = gamma > 0  # a < 1 always: phi grows with theta
    lo_e, hi_e = (e1, e2) if increasing else (e2, e1)

    # per-bit-level constants: iv context, log(a), log(n), window bounds in
    # v-space -- reused by every cell, recomputed only on escalation
    cache: dict[int, tuple] = {}

    def consts(bits: int) -> tuple:
        got = cache.get(bits)
        if got is None:
            ctx = _ivctx(bits + 16)
            got = (ctx,
                   ctx.log(iv_from_fraction(ctx, a)),
                   ctx.log(iv_from_fraction(ctx, Fraction(n))),
                   pow_cv_exponent(n, lo_e, bits) * gamma,
                   pow_cv_exponent(n, hi_e, bits) * gamma)
            cache[bits] = got
        return got

    def cmp_escalate(fn) -> bool:
        for bits in policy.schedule():
            _, _, _, v_lo, v_hi = consts(bits)
            r = fn(v_lo, v_hi)
            if r is not None:
                return r
        raise PrecisionExhausted("window boundary comparison undecided")

    b0 = policy.start_bits
    _, _, _, v_lo0, v_hi0 = consts(b0)
    k_lo = v_lo0.lo.numerator // v_lo0.lo.denominator - 1
    k_hi = v_hi0.hi.numerator // v_hi0.hi.denominator + 1
    if k_hi - k_lo > _COMPONENT_CAP:
        raise DomainError(f"window spans ~{k_hi - k_lo} twist cells; "
                          f"cap is {_COMPONENT_CAP}")

    def invert(y: Fraction) -> Fraction:
        # theta with gamma * n^phi_a(theta) = y
        ratio = y / gamma
        for bits in policy.schedule():
            ctx, log_a, log_n, _, _ = consts(bits)
            th = ctx.exp(log_a * log_n / ctx.log(iv_from_fraction(ctx, ratio)))
            cv = cv_from_iv(th)
            if cv.width <= Fraction(1, 1 << (_ENDPOINT_BITS + 8)):
                return _dyadic(cv.mid)
        raise PrecisionExhausted(f"boundary inversion at y={y} undecided")

    parts: list[Interval] = []
    for k in range(k_lo, k_hi + 1):
        y_l = k + sysm.i_lo
        y_r = k + sysm.i_hi
        # segment [y_l, y_r) against the open v-window (v_lo, v_hi)
        if cmp_escalate(lambda v_lo, v_hi: tri_le(y_r, v_lo)):
            continue
        if cmp_escalate(lambda v_lo, v_hi: tri_le(v_hi, y_l)):
            continue
        if cmp_escalate(lambda v_lo, v_hi: tri_lt(v_lo, y_l)):
            left, lflag = invert(y_l), True  # v hits y_l: fractional part i_lo
        else:
            left, lflag = (t1, False) if increasing else (t2, False)
        if cmp_escalate(lambda v_lo, v_hi: tri_lt(y_r, v_hi)):
            right, rflag = invert(y_r), False  # fractional part i_hi excluded
        else:
            right, rflag = (t2, False) if increasing else (t1, False)
        if increasing:
            piece = Interval(left, right, lflag, rflag)
        else:
            piece = Interval(right, left, rflag, lflag)
        piece = _isect(piece, window)
        if piece is not None:
            parts.append(piece)
    return IntervalSet.from_components(parts)


def set_G(n: int, params: MetricalParams,
          policy: PrecisionPolicy = DEFAULT_POLICY) -> IntervalSet:
    """E_n intersected with F_n.  With the vacuous twist I = [0,1) this is
    E_n itself (any n >= 1); otherwise n >= 2."""
    sysm = params.system
    if sysm.i_lo == 0 and sysm.i_hi == 1:
        return set_E(n, params)
    return set_E(n, params).intersection(set_F(n, params, policy))


# ---------------------------------------------------------------------------
# prime-pair statistics


def _sieve(limit: int) -> list[int]:
    if limit < 2:
        return []
    alive = bytearray([1]) * (limit + 1)
    alive[0] = alive[1] = 0
    for p in range(2, int(math.isqrt(limit)) + 1):
        if alive[p]:
            alive[p * p::p] = bytearray(len(alive[p * p::p]))
    return [i for i in range(2, limit + 1) if alive[i]]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _sieve(math.isqrt(n)):
        if n % p == 0:
            return n == p
    return True


@dataclass(frozen=True)
class BCStats:
    """Partial sums feeding the quadratic lower bound
    (sum lambda(G_p))^2 / sum lambda(G_p /\\ G_q)."""

    prime_limit: int
    primes: tuple[int, ...]
    singles: tuple[Fraction, ...]
    sum_single: Fraction
    sum_pairs: Fraction
    ratio: Fraction
    kappa: Fraction
    p0: Optional[int]


def bc_statistics(params: MetricalParams, prime_limit: int,
                  policy: PrecisionPolicy = DEFAULT_POLICY) -> BCStats:
    """Measures of G_p over primes p < prime_limit, all ordered-pair
    intersection measures (diagonal included), their ratio, and a fitted
    kappa with onset p0 such that lambda(G_p) >= kappa*(theta2-theta1)/p
    for every prime p0 <= p < prime_limit."""
    if prime_limit < 3:
        raise DomainError("prime limit must be >= 3")
    t1, t2 = _window_of(params)
    primes = tuple(_sieve(prime_limit - 1))
    sets = [set_G(p, params, policy) for p in primes]
    singles = tuple(s.measure for s in sets)
    sum_single = sum(singles, Fraction(0))
    sum_pairs = sum_single  # diagonal terms
    for i in range(len(primes)):
        for j in range(i + 1, len(primes)):
            sum_pairs += 2 * sets[i].intersection(sets[j]).measure
    ratio = sum_single ** 2 / sum_pairs if sum_pairs else Fraction(0)

    scaled = [lam * p / (t2 - t1) for p, lam in zip(primes, singles)]
    p0: Optional[int] = None
    kappa = Fraction(0)
    for i in range(len(primes)):
        tail = scaled[i:]
        if tail and min(tail) > 0:
            p0 = primes[i]
            kappa = min(tail)
            break
    return BCStats(prime_limit, primes, singles, sum_single, sum_pairs,
                   ratio, kappa, p0)


# ---------------------------------------------------------------------------
# triple counting


def count_triples(n_max: int, q_lo: int, p: int, l_gap,
                  eta1, eta2) -> int:
    """Exact number of triples (q, r, s): q prime with q_lo < q <
    min(2*q_lo, n_max + 1), r/p in (eta1, eta2), s/q in (eta1, eta2),
    and |s*p - r*q| < l_gap.

    The s-range per (q, r) is solved from the inequality, so the loop is
    O(#q * #r) with an O(1) count inside.
    """
    eta1, eta2 = Fraction(eta1), Fraction(eta2)
    l_gap = Fraction(l_gap)
    if not eta1 < eta2:
        raise DomainError("need eta1 < eta2")
    if l_gap <= 0:
        raise DomainError("need a positive gap bound")
    if p < 2 or not _is_prime(p):
        raise DomainError("p must be prime")
    if p > q_lo:
        raise DomainError("p must be <= the q-range start")
    hi = min(2 * q_lo, n_max + 1)
    total = 0
    for q in _sieve(hi - 1):
        if q <= q_lo:
            continue
        for r in _open_range(eta1 * p, eta2 * p):
            s_lo = max(eta1 * q, Fraction(r * q - l_gap, p))
            s_hi = min(eta2 * q, Fraction(r * q + l_gap, p))
            total += _open_count(s_lo, s_hi)
    return total


@dataclass(frozen=True)
class TripleBoundRow:
    n_max: int
    q_lo: int
    p: int
    l_gap: Fraction
    count: int
    q_primes: int
    first_term: Fraction  # (eta2-eta1) * l_gap * q_primes


@dataclass(frozen=True)
class TripleBoundReport:
    rows: tuple[TripleBoundRow, ...]
    k_unit: Fraction  # smallest K with count <= 1*first_term + K*q_lo
    c_fit: Fraction
    k_fit: Fraction
    violations: tuple[TripleBoundRow, ...]


def bound_check_triples(grid: Sequence[tuple[int, int, int, Rat]],
                        eta1, eta2,
                        c: Optional[Rat] = None,
                        k: Optional[Rat] = None) -> TripleBoundReport:
    """Check count <= C * (eta2-eta1) * L * #q-primes + K * Q over a grid
    of (n_max, q_lo, p, l_gap) rows.

    Reports the smallest K for C = 1, a least-squares (C, K) pair bumped
    so the bound holds on every row, and -- when an explicit (c, k) is
    supplied -- the rows that violate it.
    """
    if not grid:
        raise EmptyInput("empty grid")
    eta1, eta2 = Fraction(eta1), Fraction(eta2)
    rows = []
    for (n_max, q_lo, p, l_gap) in grid:
        cnt = count_triples(n_max, q_lo, p, l_gap, eta1, eta2)
        hi = min(2 * q_lo, n_max + 1)
        q_primes = sum(1 for q in _sieve(hi - 1) if q > q_lo)
        first = (eta2 - eta1) * Fraction(l_gap) * q_primes
        rows.append(TripleBoundRow(n_max, q_lo, p, Fraction(l_gap), cnt,
                                   q_primes, first))
    rows = tuple(rows)

    k_unit = max((Fraction(r.count) - r.first_term) / r.q_lo for r in rows)
    k_unit = max(k_unit, Fraction(0))

    # least-squares on count ~ C*first + K*Q, then push K up to cover
    sxx = sum(r.first_term ** 2 for r in rows)
    sxq = sum(r.first_term * r.q_lo for r in rows)
    sqq = sum(Fraction(r.q_lo) ** 2 for r in rows)
    sxc = sum(r.first_term * r.count for r in rows)
    sqc = sum(Fraction(r.q_lo) * r.count for r in rows)
    det = sxx * sqq - sxq * sxq
    if det != 0:
        c_fit = (sxc * sqq - sqc * sxq) / det
        c_fit = max(c_fit, Fraction(0))
    else:
        c_fit = Fraction(1)
    k_fit = max((Fraction(r.count) - c_fit * r.first_term) / r.q_lo
                for r in rows)
    k_fit = max(k_fit, Fraction(0))

    violations: tuple[TripleBoundRow, ...] = ()
    if c is not None and k is not None:
        c, k = Fraction(c), Fraction(k)
        violations = tuple(r for r in rows
                           if r.count > c * r.first_term + k * r.q_lo)
    return TripleBoundReport(rows, k_unit, c_fit, k_fit, violations)


# ---------------------------------------------------------------------------
# the far side of sqrt(a)


@dataclass(frozen=True)
class HSumReport:
    """Partial sums of lambda(H_n) for H_n = {theta in (theta3, 1) :
    ||theta*n|| <= c/n^(phi_a(theta3)-1)}, with certified total bounds."""

    theta3: Fraction
    a: Fraction
    c: Fraction
    n_max: int
    partials: tuple[float, ...]
    total_lo: Fraction
    total_hi: Fraction
    cauchy_from: Optional[int]
    tol: float
    tail_bound: float

    @property
    def total(self) -> float:
        return float((self.total_lo + self.total_hi) / 2)


def _h_measure(n: int, theta3: Fraction, delta: Fraction) -> Fraction:
    """Exact lambda of the union of [m/n - delta/n, m/n + delta/n] over
    all m, clipped to (theta3, 1), for a fixed rational delta.

    With delta < 1/2 the pieces are disjoint and only the extreme two can
    cross a window edge, so this is O(1) in n.
    """
    if delta >= Fraction(1, 2):
        return 1 - theta3
    w = delta / n
    ms = _open_range(n * theta3 - delta, n + delta)
    if len(ms) == 0:
        return Fraction(0)
    total = 2 * w * len(ms)
    first_lo = Fraction(ms[0], n) - w
    if first_lo < theta3:
        total -= theta3 - first_lo
    last_hi = Fraction(ms[-1], n) + w
    if last_hi > 1:
        total -= last_hi - 1
    return total


def set_H_sum(theta3, params: "MetricalParams | DiophSystem", n_max: int,
              tol: float = 1e-4,
              policy: PrecisionPolicy = DEFAULT_POLICY) -> HSumReport:
    """Cumulative measure sum_{n<=n_max} lambda(H_n) with certified
    two-sided totals.

    Requires sqrt(a) < theta3 < 1 (checked exactly via squares), which
    makes the exponent phi_a(theta3) > 2 and the full series summable;
    DomainError otherwise.  ``cauchy_from`` is the first index from which
    every later per-term increment stays below ``tol``; ``tail_bound``
    bounds the discarded tail past n_max by integral comparison.
    """
    sysm = params.system if isinstance(params, MetricalParams) else params
    a, c = sysm.a, sysm.c
    theta3 = Fraction(theta3)
    if not 0 < a < 1:
        raise DomainError("need 0 < a < 1")
    if not (theta3 * theta3 > a and theta3 < 1):
        raise DomainError("need sqrt(a) < theta3 < 1, so the exponent exceeds 2")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    e = _phi_arg(a, theta3, policy)
    em1 = (e - 1) if isinstance(e, Fraction) else (lambda bits: e(bits) - 1)

    # accumulate on a fixed dyadic grid (outward-rounded) so the running
    # totals keep bounded denominators; the rounding slack, n_max * 2^-120,
    # is far below every reported digit
    scale = 1 << 120
    total_lo, total_hi = Fraction(0), Fraction(0)
    partials: list[float] = []
    last_fat = 0  # last n whose increment reached tol
    for n in range(1, n_max + 1):
        grow = pow_cv_exponent(n, em1, policy.start_bits)  # n^(phi-1) >= 1
        delta_lo = c / grow.hi
        delta_hi = c / grow.lo
        lam_lo = _h_measure(n, theta3, delta_lo)
        lam_hi = _h_measure(n, theta3, delta_hi)
        total_lo += Fraction(lam_lo.numerator * scale // lam_lo.denominator,
                             scale)
        total_hi += Fraction(-((-lam_hi.numerator * scale)
                               // lam_hi.denominator), scale)
        partials.append(float((total_lo + total_hi) / 2))
        if float(lam_hi) >= tol:
            last_fat = n
    cauchy_from = last_fat + 1 if last_fat < n_max else None

    ecv = phi(a, theta3, policy)
    e_lo = float(ecv.lo)  # smaller exponent -> larger tail bound
    tail = (2 * float(c) * float(1 - theta3) / (e_lo - 2) * n_max ** (2 - e_lo)
            + 4 * float(c) / (e_lo - 1) * n_max ** (1 - e_lo))
    return HSumReport(theta3, a, c, n_max, tuple(partials), total_lo,
                      total_hi, cauchy_from, tol, tail)


# ---------------------------------------------------------------------------
# the two-sided sweep


@dataclass(frozen=True)
class DichotomyRow:
    theta: Fraction
    side: str  # "below" or "above" sqrt(a)
    hits: int
    nontrivial: int  # solutions with ||theta n|| > 0
    scan_top: int


@dataclass(frozen=True)
class DichotomyReport:
    system: DiophSystem
    budget: int
    rows: tuple[DichotomyRow, ...]

    def side_totals(self) -> dict:
        out = {"below": {"hits": 0, "nontrivial": 0, "thetas": 0},
               "above": {"hits": 0, "nontrivial": 0, "thetas": 0}}
        for r in self.rows:
            out[r.side]["hits"] += r.hits
            out[r.side]["nontrivial"] += r.nontrivial
            out[r.side]["thetas"] += 1
        return out

    def to_csv(self, path: str) -> None:
        from .output import write_csv

        write_csv(path, ["theta", "side", "hits", "nontrivial", "scan_top"],
                  [(r.theta, r.side, r.hits, r.nontrivial, r.scan_top)
                   for r in self.rows])


def dichotomy_scan(sysm: DiophSystem, thetas: Sequence, budget: int,
                   policy: PrecisionPolicy = DEFAULT_POLICY) -> DichotomyReport:
    """Run the rational-slope solver across a theta grid and tally hits
    on each side of sqrt(a).

    theta with theta^2 = a exactly is rejected (the split says nothing
    there).  Solutions with ||theta*n|| = 0 (n a multiple of the
    denominator) are counted but also broken out as trivial.
    """
    if not thetas:
        raise EmptyInput("empty theta grid")
    rows = []
    for th in thetas:
        th = Fraction(th)
        if th * th == sysm.a:
            raise DomainError(f"theta {th} sits exactly at sqrt(a)")
        side = "below" if th * th < sysm.a else "above"
        rep = solve_system_two(sysm, th, budget, policy)
        nontrivial = sum(1 for s in rep.solutions if s.dist_hi > 0)
        rows.append(DichotomyRow(th, side, len(rep), nontrivial,
                                 rep.scan_top))
    return DichotomyReport(sysm, budget, tuple(rows))


def window_share_threshold(a, theta2, lam_i,
                           policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Smallest n from which log(n)/n^(2 - phi_a(theta2)) stays below
    lam_i/3 for good.

    The left side rises to a single peak at log(n) = 1/(2 - phi) and
    decays afterwards, so the answer is n = 2 when the peak already sits
    below the target, and the first post-peak crossing otherwise
    (located by bisection in log n; the returned integer is exact only
    up to the floating-point location of the crossing).
    """
    a, theta2 = Fraction(a), Fraction(theta2)
    lam = float(lam_i)
    if lam <= 0:
        raise DomainError("need a positive interval length")
    ecv = phi(a, theta2, policy)
    s = 2 - float(ecv.mid)
    if s <= 0:
        raise DomainError("exponent must stay below 2 (theta2 < sqrt(a))")
    target = lam / 3

    def t_of(u: float) -> float:  # u = log n
        return u * math.exp(-s * u)

    u_peak = 1 / s
    if u_peak < math.log(2):
        u_peak = math.log(2)
    if t_of(u_peak) < target:
        return 2
    u_hi = u_peak
    while t_of(u_hi) >= target:
        u_hi *= 2
    u_lo = u_peak
    for _ in range(200):
        mid = (u_lo + u_hi) / 2
        if t_of(mid) >= target:
            u_lo = mid
        else:
            u_hi = mid
    import mpmath as mp

    with mp.workdps(40):
        return int(mp.floor(mp.e ** u_hi)) + 1
