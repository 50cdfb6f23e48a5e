"""Solve y = a*x + b over PS(alpha) through the window reduction.

For x = floor(n^alpha), the value a*x + b is an integer m exactly when
x falls in a fixed residue class d mod a2 (a = a1/a2 in lowest terms).
Then m is itself of the form floor(k^alpha) exactly when the half-open
interval J_n = [m^(1/alpha), (m+1)^(1/alpha)) contains an integer.  Both
steps are decided with certified arithmetic, so the reduction is exact
for every n, with no "sufficiently large" threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, log
from typing import Optional, Sequence, Union

from .certified import (
    DEFAULT_POLICY,
    CertifiedValue,
    Exponent,
    PrecisionPolicy,
    pow_certified,
    rational_pow_cv,
    tri_lt,
    _ivctx,
    cv_from_iv,
    iv_from_cv,
)
from .errors import (
    DomainError,
    InsufficientData,
    NotSolvableInN,
    PrecisionExhausted,
)
from .sequence import floor_pow, is_member, member_witness, ps_window, root_ceil

RatIn = Union[int, str, Fraction]


def _exact_rational(v: RatIn, what: str) -> Fraction:
    if isinstance(v, float):
        raise NotSolvableInN(
            f"{what} must be an exact rational (int, Fraction or 'p/q' string), not float"
        )
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise NotSolvableInN(f"{what} is not a rational: {v!r}") from exc


@dataclass(frozen=True)
class LinearEq:
    """y = (a1/a2)*x + b with gcd(a1,a2)=1 and a2*b an integer.

    d is the residue class mod a2 that x must lie in for a*x + b to be
    an integer: a1*d + a2*b == 0 (mod a2).
    """

    a1: int
    a2: int
    b: Fraction
    d: int

    @property
    def a(self) -> Fraction:
        return Fraction(self.a1, self.a2)

    def value_at(self, x: int) -> Fraction:
        return self.a * x + self.b

    def __str__(self) -> str:
        return f"y = ({self.a1}/{self.a2})x + {self.b}"


def make_eq(a: RatIn, b: RatIn) -> LinearEq:
    """Normalize a rational pair into a LinearEq, or refuse.

    Integrality of a*x + b for integer x needs a2*b to be an integer;
    otherwise no x works and the equation has no solutions in N at all.
    """
    af = _exact_rational(a, "a")
    bf = _exact_rational(b, "b")
    if af <= 0:
        raise DomainError("slope a must be positive")
    a1, a2 = af.numerator, af.denominator
    t = a2 * bf
    if t.denominator != 1:
        raise NotSolvableInN(f"a2*b = {t} is not an integer: no x makes a*x+b an integer")
    # a1*x + a2*b ≡ 0 (mod a2) ⟺ x ≡ -a2*b * a1^{-1} (mod a2); gcd(a1,a2)=1
    d = (-int(t) * pow(a1, -1, a2)) % a2 if a2 > 1 else 0
    return LinearEq(a1, a2, bf, d)


def residue_test(eq: LinearEq, n: int, alpha: Exponent,
                 policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
    """Whether floor(n^alpha) sits in the residue class making a*x+b integral."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return floor_pow(n, alpha, policy) % eq.a2 == eq.d


@dataclass(frozen=True)
class WindowLR:
    """Certified endpoints of J_n = [ (a*x+b)^(1/alpha), (a*x+b+1)^(1/alpha) )."""

    n: int
    m: int  # a*floor(n^alpha) + b, already integral
    left: CertifiedValue
    right: CertifiedValue

    def __post_init__(self) -> None:
        if tri_lt(self.left, self.right) is False:
            raise DomainError("window endpoints out of order")


def _inv_pow_cv(m: int, alpha: Exponent, bits: int) -> CertifiedValue:
    """Certified m**(1/alpha)."""
    if alpha.is_rational:
        return rational_pow_cv(Fraction(m), 1 / alpha.frac, bits)
    ctx = _ivctx(bits + 16)
    a_iv = iv_from_cv(ctx, alpha.interval(bits + 16))
    return cv_from_iv(ctx.exp(ctx.log(ctx.mpf(m)) / a_iv))


def window(eq: LinearEq, n: int, alpha: Exponent,
           policy: PrecisionPolicy = DEFAULT_POLICY) -> WindowLR:
    """The inverse-image window J_n for a residue-passing n."""
    if not residue_test(eq, n, alpha, policy):
        raise DomainError(f"n={n} fails the residue test (x mod {eq.a2} != {eq.d})")
    mv = eq.value_at(floor_pow(n, alpha, policy))
    assert mv.denominator == 1
    m = int(mv)
    if m < 1:
        raise DomainError(f"a*x+b = {m} < 1 at n={n}: window undefined")
    b = policy.start_bits
    return WindowLR(n, m, _inv_pow_cv(m, alpha, b), _inv_pow_cv(m + 1, alpha, b))


def window_hits_integer(w: WindowLR, alpha: Exponent,
                        policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
    """Decide J_n ∩ N ≠ ∅ from certified endpoints alone.

    k = ceil(left) is the only candidate; left is closed and right open,
    so the answer is k < right.  Escalates until both the ceiling and
    the strict comparison are decided; exact endpoints (perfect powers)
    settle boundary cases without guessing.
    """
    for bits in policy.schedule():
        left = _inv_pow_cv(w.m, alpha, bits)
        k = left.ceil_decided()
        if k is None:
            continue
        right = _inv_pow_cv(w.m + 1, alpha, bits)
        hit = tri_lt(CertifiedValue.exactly(k), right)
        if hit is not None:
            return hit
    raise PrecisionExhausted(
        f"J_{w.n} boundary undecided at {policy.max_bits} bits (m={w.m})"
    )


@dataclass(frozen=True)
class SolutionRecord:
    """One solution pair: x = floor(n^alpha), y = floor(k^alpha) = a*x + b.

    Construction re-verifies both memberships through the direct
    membership test and the exact rational identity y = a*x + b; the
    asymptotic_regime flag marks n where a*x >= b + 1 (small-n cases
    below that bound are still exact, just outside the regime where the
    mean-value estimates used in the asymptotic analysis apply).
    """

    n: int
    x: int
    y: int
    k: int
    eq: LinearEq
    alpha: Exponent
    asymptotic_regime: bool = True

    def __post_init__(self) -> None:
        if self.eq.value_at(self.x) != self.y:
            raise DomainError(f"y != a*x+b at n={self.n}")
        if floor_pow(self.n, self.alpha) != self.x:
            raise DomainError(f"x is not floor({self.n}^alpha)")
        if not is_member(self.x, self.alpha) or not is_member(self.y, self.alpha):
            raise DomainError(f"membership re-check failed at n={self.n}")
        if floor_pow(self.k, self.alpha) != self.y:
            raise DomainError(f"k does not witness y at n={self.n}")


def _solution_at(eq: LinearEq, n: int, alpha: Exponent,
                 policy: PrecisionPolicy) -> Optional[SolutionRecord]:
    x = floor_pow(n, alpha, policy)
    if x % eq.a2 != eq.d:
        return None
    mv = eq.value_at(x)
    m = int(mv)
    if m < 1:
        return None
    k = member_witness(m, alpha, policy)
    if k is None:
        return None
    regime = eq.a * x >= eq.b + 1
    return SolutionRecord(n, x, m, k, eq, alpha, regime)


def solve_linear(eq: LinearEq, alpha: Exponent, N: int,
                 policy: PrecisionPolicy = DEFAULT_POLICY,
                 n_min: int = 1) -> list[SolutionRecord]:
    """All n in [n_min, N] whose x = floor(n^alpha) produces a solution
    pair.  n_min > 1 exists so range shards can split the scan."""
    if N < 1:
        raise DomainError("N must be >= 1")
    out = []
    for n in range(max(1, n_min), N + 1):
        rec = _solution_at(eq, n, alpha, policy)
        if rec is not None:
            out.append(rec)
    return out


def count_solutions(eq: LinearEq, alpha: Exponent, N: int,
                    policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """|{n <= N : (floor(n^alpha), a*floor(n^alpha)+b) solves the equation}|.

    Same filter chain as solve_linear without building records.
    """
    c = 0
    for n in range(1, N + 1):
        x = floor_pow(n, alpha, policy)
        if x % eq.a2 != eq.d:
            continue
        m = int(eq.value_at(x))
        if m >= 1 and is_member(m, alpha, policy):
            c += 1
    return c


def check_equivalence(eq: LinearEq, alpha: Exponent, N: int,
                      policy: PrecisionPolicy = DEFAULT_POLICY) -> Optional[int]:
    """Cross-check the reduction against direct membership for n <= N.

    Left side: a*floor(n^alpha)+b is an integer >= 1 and a member, via
    the direct ceiling/floor membership test.  Right side: the residue
    test plus the certified-window integer hit.  Returns the smallest n
    where the two disagree, or None when all n <= N agree.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    for n in range(1, N + 1):
        x = floor_pow(n, alpha, policy)
        res = x % eq.a2 == eq.d
        mv = eq.value_at(x)
        direct = False
        if mv.denominator == 1 and mv >= 1:
            direct = is_member(int(mv), alpha, policy)
        reduced = False
        if res and mv >= 1:
            assert mv.denominator == 1
            w = WindowLR(n, int(mv),
                         _inv_pow_cv(int(mv), alpha, policy.start_bits),
                         _inv_pow_cv(int(mv) + 1, alpha, policy.start_bits))
            reduced = window_hits_integer(w, alpha, policy)
        if direct != reduced:
            return n
    return None


@dataclass(frozen=True)
class CountFit:
    checkpoints: tuple[int, ...]
    counts: tuple[int, ...]
    used: tuple[int, ...]  # checkpoints entering the regression
    slope: float
    stderr: float

    def as_dict(self) -> dict:
        return {
            "checkpoints": list(self.checkpoints),
            "counts": list(self.counts),
            "used": list(self.used),
            "slope": self.slope,
            "stderr": self.stderr,
        }


def count_fit(eq: LinearEq, alpha: Exponent, checkpoints: Sequence[int],
              policy: PrecisionPolicy = DEFAULT_POLICY) -> CountFit:
    """Counts per checkpoint and the log-log growth exponent.

    One pass to max(checkpoints); checkpoints with fewer than 5 hits are
    dropped from the regression (log of a near-zero count is noise).
    """
    cps = list(checkpoints)
    if len(cps) < 3 or any(b >= c for b, c in zip(cps, cps[1:])) or cps[0] < 1:
        raise DomainError("need >= 3 strictly ascending positive checkpoints")
    counts = []
    c = 0
    prev = 0
    for cp in cps:
        for n in range(prev + 1, cp + 1):
            x = floor_pow(n, alpha, policy)
            if x % eq.a2 != eq.d:
                continue
            m = int(eq.value_at(x))
            if m >= 1 and is_member(m, alpha, policy):
                c += 1
        counts.append(c)
        prev = cp
    usable = [(cp, ct) for cp, ct in zip(cps, counts) if ct >= 5]
    if len(usable) < 3:
        raise InsufficientData(
            f"only {len(usable)} checkpoints with >= 5 solutions: no stable fit"
        )
    xs = [log(cp) for cp, _ in usable]
    ys = [log(ct) for _, ct in usable]
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    sxx = sum((x - xbar) ** 2 for x in xs)
    slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sxx
    intercept = ybar - slope * xbar
    rss = sum((y - slope * x - intercept) ** 2 for x, y in zip(xs, ys))
    dof = max(len(xs) - 2, 1)
    stderr = (rss / dof / sxx) ** 0.5
    return CountFit(tuple(cps), tuple(counts), tuple(cp for cp, _ in usable),
                    slope, stderr)


def solve_xyz(alpha: Exponent, N: int,
              policy: PrecisionPolicy = DEFAULT_POLICY) -> list[tuple[int, int, int]]:
    """All x <= y with witnesses <= N and x + y in PS(alpha)."""
    if N < 1:
        raise DomainError("N must be >= 1")
    top = floor_pow(N, alpha, policy)
    w = ps_window(alpha, top, policy)
    out = []
    ms = w.members
    for i, x in enumerate(ms):
        for y in ms[i:]:
            z = x + y
            if is_member(z, alpha, policy):
                out.append((x, y, z))
    return out


def solutions_to_csv(path: str, records: Sequence[SolutionRecord]) -> None:
    from .output import write_csv

    write_csv(path, ["n", "x", "k", "y"], [(r.n, r.x, r.k, r.y) for r in records])
