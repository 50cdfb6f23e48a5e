"""Twisted Diophantine systems: ||T*n|| <= c/n^(e-1) together with a
fractional-part constraint {gamma * n^e} in I.

Two flavours share the machinery.  In the first, T = a^(1/alpha) and
e = alpha.  In the second, T = theta is rational and e = phi_a(theta) =
log a / log theta; the distance condition is then exact integer
arithmetic on residues of n mod denominator(theta).

Enumeration combines an exhaustive certified scan with candidates drawn
from continued-fraction convergent denominators of T, which are the
canonical near-integer multipliers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .certified import (
    DEFAULT_POLICY,
    CertifiedValue,
    Exponent,
    PrecisionPolicy,
    cv_from_iv,
    cv_in_halfopen,
    dist_nearest_int,
    iv_from_cv,
    iv_from_fraction,
    phi,
    pow_cv_exponent,
    rational_pow_cv,
    tri_le,
    _ivctx,
)
from .errors import AmbiguousRounding, DomainError, PrecisionExhausted

ExponentLike = Union[Fraction, Callable[[int], CertifiedValue]]


# ---------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class ContinuedFraction:
    """Certified partial quotients and convergents of a real target.

    exact_rational marks a terminating expansion: the target was proven
    rational and the quotients are its full canonical expansion.
    """

    target: CertifiedValue
    quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    exact_rational: bool = False

    def __post_init__(self) -> None:
        pq = self.convergents
        for k in range(1, len(pq)):
            p1, q1 = pq[k]
            p0, q0 = pq[k - 1]
            if p1 * q0 - p0 * q1 != (-1) ** (k - 1):
                raise DomainError(f"convergent determinant broken at k={k}")


def _convergents(quotients: Sequence[int]) -> tuple[tuple[int, int], ...]:
    out = []
    p0, q0 = 1, 0
    p1, q1 = quotients[0], 1
    out.append((p1, q1))
    for a in quotients[1:]:
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append((p1, q1))
    return tuple(out)


def _quotients_from_interval(lo: Fraction, hi: Fraction, k: int) -> tuple[list[int], bool]:
    """Common CF prefix of every real in [lo, hi], up to k terms.

    Returns (quotients, terminated): terminated means lo == hi held and
    the full canonical expansion fit within k terms.
    """
    exact = lo == hi
    out: list[int] = []
    while len(out) < k:
        flo = lo.numerator // lo.denominator
        fhi = hi.numerator // hi.denominator
        if flo != fhi:
            break
        out.append(flo)
        lo, hi = lo - flo, hi - flo
        if exact:
            if lo == 0:  # canonical Euclid expansion complete
                return out, True
            lo = hi = 1 / lo
        else:
            if lo == 0:  # true value may or may not be an integer here
                break
            lo, hi = 1 / hi, 1 / lo
    return out, False


def cf_expand(
    x: CertifiedValue,
    k: int,
    refine: Optional[Callable[[int], CertifiedValue]] = None,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> ContinuedFraction:
    """First k certified partial quotients of x.

    When x's own interval is too wide to pin down all k quotients, the
    refine callback is asked for tighter enclosures of the same number;
    without one the expansion fails with PrecisionExhausted.
    """
    if k < 1:
        raise DomainError("need k >= 1")
    if tri_le(x, 0) is not False:
        raise DomainError("target must be certified positive")
    best = x
    qs, done = _quotients_from_interval(x.lo, x.hi, k)
    if len(qs) < k and not done:
        if refine is not None:
            for bits in policy.schedule():
                best = refine(bits)
                qs, done = _quotients_from_interval(best.lo, best.hi, k)
                if len(qs) == k or done:
                    break
        if len(qs) < k and not done:
            raise PrecisionExhausted(
                f"only {len(qs)}/{k} quotients certain at available precision"
            )
    return ContinuedFraction(best, tuple(qs), _convergents(qs), done)


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class DiophSystem:
    """Parameters (a, c, gamma, I) of the twisted system.

    I = [i_lo, i_hi) is a half-open subinterval of [0,1) with rational
    endpoints and nonempty interior.
    """

    a: Fraction
    c: Fraction
    gamma: Fraction
    i_lo: Fraction = Fraction(0)
    i_hi: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.a <= 0 or self.a == 1:
            raise DomainError("a must be positive and != 1")
        if self.c <= 0:
            raise DomainError("c must be positive")
        if self.gamma == 0:
            raise DomainError("gamma must be nonzero")
        if not (0 <= self.i_lo < self.i_hi <= 1):
            raise DomainError("I must satisfy 0 <= lo < hi <= 1")

    @staticmethod
    def make(a, c, gamma, i_lo=0, i_hi=1) -> "DiophSystem":
        return DiophSystem(Fraction(a), Fraction(c), Fraction(gamma),
                           Fraction(i_lo), Fraction(i_hi))

    @staticmethod
    def middle_third(a, c=1, gamma=1) -> "DiophSystem":
        """Convenience: I = [1/3, 2/3), the strictest symmetric twist."""
        return DiophSystem.make(a, c, gamma, Fraction(1, 3), Fraction(2, 3))

    @staticmethod
    def from_json(text: str) -> "DiophSystem":
        d = json.loads(text)
        try:
            lo, hi = d.get("interval", ["0", "1"])
            return DiophSystem.make(Fraction(d["a"]), Fraction(d["c"]),
                                    Fraction(d["gamma"]), Fraction(lo), Fraction(hi))
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(f"bad system config: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(
            {
                "a": str(self.a),
                "c": str(self.c),
                "gamma": str(self.gamma),
                "interval": [str(self.i_lo), str(self.i_hi)],
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class SystemSolution:
    n: int
    dist_hi: float  # certified upper bound on ||T n||
    frac_mid: float  # midpoint of certified {gamma n^e}
    source: str  # "scan" or "convergent"


@dataclass(frozen=True)
class SolveReport:
    system: DiophSystem
    budget: int
    solutions: tuple[SystemSolution, ...]
    candidates_tested: int
    scan_top: int
    warnings: tuple[str, ...] = ()
    convergent_fracs: tuple[float, ...] = ()  # exploratory: {gamma q_k^e}

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    @property
    def ns(self) -> tuple[int, ...]:
        return tuple(s.n for s in self.solutions)

    def to_csv(self, path: str) -> None:
        from .output import write_csv

        write_csv(path, ["n", "dist_bound", "frac_bound", "source"],
                  [(s.n, s.dist_hi, s.frac_mid, s.source) for s in self.solutions])


def _dist_condition(
    target_at: Callable[[int], CertifiedValue],
    n: int,
    c: Fraction,
    em1: ExponentLike,
    policy: PrecisionPolicy,
) -> tuple[bool, float]:
    """Certified ||T n|| * n^(e-1) <= c, plus an upper bound on ||T n||."""
    for bits in policy.schedule():
        x = target_at(bits) * n
        if x.width >= 1:
            continue
        d = dist_nearest_int(x)
        lhs = d * pow_cv_exponent(n, em1, bits)
        r = tri_le(lhs, c)
        if r is not None:
            return r, float(d.hi)
    raise PrecisionExhausted(f"distance condition undecided at n={n}")


def _frac_condition(
    gamma: Fraction,
    n: int,
    e: ExponentLike,
    i_lo: Fraction,
    i_hi: Fraction,
    policy: PrecisionPolicy,
) -> tuple[bool, float]:
    """Certified {gamma * n^e} in [i_lo, i_hi), plus the frac midpoint."""
    for bits in policy.schedule():
        x = pow_cv_exponent(n, e, bits) * gamma
        f = x.floor_decided()
        if f is None:
            continue
        frac = x - f
        r = cv_in_halfopen(frac, i_lo, i_hi)
        if r is not None:
            return r, float(frac.mid)
    raise PrecisionExhausted(f"fractional condition undecided at n={n}")


def _root_target_provider(a: Fraction, alpha: Exponent) -> Callable[[int], CertifiedValue]:
    """Enclosures of a^(1/alpha) at requested precision."""
    if alpha.is_rational:
        inv = 1 / alpha.frac
        return lambda bits: rational_pow_cv(a, inv, bits)

    def provider(bits: int) -> CertifiedValue:
        ctx = _ivctx(bits + 16)
        al = iv_from_cv(ctx, alpha.interval(bits + 16))
        return cv_from_iv(ctx.exp(ctx.log(iv_from_fraction(ctx, a)) / al))

    return provider


def _alpha_minus_one(alpha: Exponent) -> ExponentLike:
    if alpha.is_rational:
        return alpha.frac - 1
    return lambda bits: alpha.interval(bits) - 1


def solve_system_one(
    sys: DiophSystem,
    alpha: Exponent,
    budget: int,
    scan_cutoff: int = 10**6,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> SolveReport:
    """All certified solutions n <= budget of the system with T = a^(1/alpha).

    Exhaustive over n <= min(budget, scan_cutoff); past the cutoff only
    convergent denominators q_k of T and multiples j*q_k (j <= 8) are
    tested, since those are the only systematic carriers of small ||T n||.
    """
    if budget < 1:
        raise DomainError("budget must be >= 1")
    target_at = _root_target_provider(sys.a, alpha)
    em1 = _alpha_minus_one(alpha)
    e: ExponentLike = alpha.frac if alpha.is_rational else (lambda b: alpha.interval(b))
    sols: list[SystemSolution] = []
    warnings: list[str] = []
    tested = 0
    scan_top = min(budget, scan_cutoff)

    def test(n: int, source: str) -> None:
        nonlocal tested
        tested += 1
        try:
            ok1, dist_hi = _dist_condition(target_at, n, sys.c, em1, policy)
            if not ok1:
                return
            ok2, frac_mid = _frac_condition(sys.gamma, n, e, sys.i_lo, sys.i_hi, policy)
            if ok2:
                sols.append(SystemSolution(n, dist_hi, frac_mid, source))
        except PrecisionExhausted as exc:
            warnings.append(str(exc))

    for n in range(1, scan_top + 1):
        test(n, "scan")

    convergent_fracs: list[float] = []
    if budget > scan_top:
        # expand until the denominators outgrow the budget
        k = 8
        cf = None
        while True:
            try:
                cf = cf_expand(target_at(policy.start_bits), k, refine=target_at,
                               policy=policy)
            except PrecisionExhausted as exc:
                warnings.append(f"convergent stage skipped: {exc}")
                break
            if cf.exact_rational or cf.convergents[-1][1] > budget or k > 256:
                break
            k *= 2
        seen: set[int] = set()
        if cf is not None:
            for _, q in cf.convergents:
                if q < 1:
                    continue
                try:
                    _, fm = _frac_condition(sys.gamma, q, e, Fraction(0), Fraction(1),
                                            policy)
                    convergent_fracs.append(fm)
                except PrecisionExhausted:
                    pass
                for j in range(1, 9):
                    n = j * q
                    if n <= scan_top or n > budget or n in seen:
                        continue
                    seen.add(n)
                    test(n, "convergent")
    sols.sort(key=lambda s: s.n)
    return SolveReport(sys, budget, tuple(sols), tested, scan_top,
                       tuple(warnings), tuple(convergent_fracs))


def _phi_provider(a: Fraction, theta: Fraction,
                  policy: PrecisionPolicy) -> ExponentLike:
    cv = phi(a, theta, policy)
    if cv.exact:
        return cv.lo
    return lambda bits: phi(a, theta, policy, bits=bits)


def _exp_hi_int(value: CertifiedValue) -> int:
    """floor of the upper endpoint, used for safe scan bounds."""
    return value.hi.numerator // value.hi.denominator


def solve_system_two(
    sys: DiophSystem,
    theta: Fraction,
    budget: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> SolveReport:
    """All certified solutions n <= budget with T = theta (rational) and
    exponent phi_a(theta).

    ||theta n|| is exact: with theta = u/v it equals w_n/v for w_n =
    min(u n mod v, v - u n mod v).  The distance condition caps n per
    residue value w, so the scan precomputes one certified threshold per
    w and the bulk of the loop is integer arithmetic; past the largest
    threshold only multiples of v (where ||theta n|| = 0) remain.
    """
    if budget < 1:
        raise DomainError("budget must be >= 1")
    theta = Fraction(theta)
    lo_dom, hi_dom = min(sys.a, Fraction(1)), max(sys.a, Fraction(1))
    if not (lo_dom < theta < hi_dom):
        raise DomainError(f"theta {theta} not strictly between {lo_dom} and {hi_dom}")
    e = _phi_provider(sys.a, theta, policy)
    em1: ExponentLike = (e - 1) if isinstance(e, Fraction) else (
        lambda bits: e(bits) - 1
    )
    u, v = theta.numerator, theta.denominator
    target_at = lambda bits: CertifiedValue.exactly(theta)  # noqa: E731

    # threshold per residue distance w >= 1: accept n iff n^(phi-1) <= c v / w,
    # i.e. n <= (c v / w)^(1/(phi-1)); certified interval bounds leave a
    # (realistically empty) grey zone that gets the full per-n treatment.
    accept_to: dict[int, int] = {}
    grey: dict[int, tuple[int, int]] = {}
    for w in range(1, v // 2 + 1):
        bound = Fraction(sys.c * v, w)
        for bits in policy.schedule():
            ctx = _ivctx(bits + 16)
            if isinstance(e, Fraction):
                em1_iv = iv_from_fraction(ctx, e - 1)
            else:
                em1_iv = iv_from_cv(ctx, e(bits + 16)) - 1
            try:
                nw = cv_from_iv(ctx.exp(ctx.log(iv_from_fraction(ctx, bound)) / em1_iv))
            except AmbiguousRounding:
                continue  # phi - 1 enclosure still touches 0: escalate
            lo_n = nw.lo.numerator // nw.lo.denominator
            hi_n = _exp_hi_int(nw)
            if hi_n - lo_n <= 1 or hi_n > 4 * budget:
                accept_to[w] = min(lo_n, budget)
                grey[w] = (min(lo_n, budget) + 1, min(hi_n, budget))
                break
        else:
            raise PrecisionExhausted(f"threshold for w={w} undecided")

    sols: list[SystemSolution] = []
    warnings: list[str] = []
    tested = 0

    def frac_test(n: int) -> Optional[tuple[bool, float]]:
        try:
            return _frac_condition(sys.gamma, n, e, sys.i_lo, sys.i_hi, policy)
        except PrecisionExhausted as exc:
            warnings.append(str(exc))
            return None

    def dist_exact(n: int) -> tuple[int, Fraction]:
        r = (u * n) % v
        w = min(r, v - r)
        return w, Fraction(w, v)

    for n in range(1, budget + 1):
        tested += 1
        w, dval = dist_exact(n)
        if w != 0:
            lim = accept_to[w]
            g_lo, g_hi = grey[w]
            if n > lim:
                if g_lo <= n <= g_hi:
                    try:
                        ok1, _ = _dist_condition(target_at, n, sys.c, em1, policy)
                    except PrecisionExhausted as exc:
                        warnings.append(str(exc))
                        continue
                    if not ok1:
                        continue
                else:
                    continue
        got = frac_test(n)
        if got and got[0]:
            sols.append(SystemSolution(n, float(dval), got[1], "scan"))
    return SolveReport(sys, budget, tuple(sols), tested, budget, tuple(warnings))


@dataclass(frozen=True)
class Certificate:
    """Outcome of the independent re-check of one candidate n."""

    n: int
    dist_ok: Optional[bool]  # None = undecided at max precision
    frac_ok: Optional[bool]
    bits_used: int

    @property
    def accepted(self) -> bool:
        return self.dist_ok is True and self.frac_ok is True


def verify_solution(
    sys: DiophSystem,
    alpha_or_theta: Union[Exponent, Fraction, int, str],
    n: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> Certificate:
    """Re-evaluate both conditions for one n from scratch.

    Accepts the exponent form of either system: an Exponent means
    T = a^(1/alpha), a rational theta means T = theta with e = phi.
    Unknown is reported as None, never as success.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if isinstance(alpha_or_theta, Exponent):
        target_at = _root_target_provider(sys.a, alpha_or_theta)
        em1 = _alpha_minus_one(alpha_or_theta)
        e: ExponentLike = (alpha_or_theta.frac if alpha_or_theta.is_rational
                           else lambda b: alpha_or_theta.interval(b))
    else:
        try:
            theta = Fraction(alpha_or_theta)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise DomainError(f"not an Exponent or rational theta: {alpha_or_theta!r}") from exc
        e = _phi_provider(sys.a, theta, policy)
        em1 = (e - 1) if isinstance(e, Fraction) else (lambda bits: e(bits) - 1)
        target_at = lambda bits: CertifiedValue.exactly(theta)  # noqa: E731

    dist_ok: Optional[bool] = None
    frac_ok: Optional[bool] = None
    try:
        dist_ok, _ = _dist_condition(target_at, n, sys.c, em1, policy)
    except PrecisionExhausted:
        pass
    try:
        frac_ok, _ = _frac_condition(sys.gamma, n, e, sys.i_lo, sys.i_hi, policy)
    except PrecisionExhausted:
        pass
    return Certificate(n, dist_ok, frac_ok, policy.max_bits)
