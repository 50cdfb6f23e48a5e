"""Adaptive-precision real arithmetic with certified rounding.

Every quantity is carried as a ``CertifiedValue``: a closed rational
interval [lo, hi] guaranteed to contain the true real number, plus an
exactness flag.  Two backends feed these intervals:

* rational powers n**(p/q) are bounded with exact integer q-th roots
  (``gmpy2.iroot``), so floors, ceilings and window tests for rational
  exponents are decided with no precision escalation at all;
* transcendental quantities (powers with irrational exponents,
  logarithm ratios) are enclosed with mpmath's outward-rounded interval
  context at a requested bit count, and escalated under a
  ``PrecisionPolicy`` until the caller's predicate is decided.

Comparisons are three-valued: True / False / None ("unknown"), where
None signals that the current intervals overlap and the caller should
escalate precision.  Nothing in this module ever decides a strict
inequality from unrounded arithmetic.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Union

import gmpy2
from mpmath import ctx_iv

from .errors import AmbiguousRounding, DomainError, PrecisionExhausted

Rat = Union[int, Fraction]

# ---------------------------------------------------------------------------
# precision policy


@dataclass(frozen=True)
class PrecisionPolicy:
    """Escalation schedule for interval computations, in bits."""

    start_bits: int = 128
    max_bits: int = 4096
    growth: int = 2

    def __post_init__(self) -> None:
        if self.start_bits < 64:
            raise DomainError("start_bits must be >= 64")
        if self.max_bits < self.start_bits:
            raise DomainError("max_bits must be >= start_bits")
        if self.growth <= 1:
            raise DomainError("growth factor must exceed 1")

    def schedule(self) -> Iterator[int]:
        bits = self.start_bits
        while True:
            yield min(bits, self.max_bits)
            if bits >= self.max_bits:
                return
            bits = int(bits * self.growth)
            if bits <= self.start_bits:  # guard against growth ~ 1
                bits = self.start_bits + 1


DEFAULT_POLICY = PrecisionPolicy()


# ---------------------------------------------------------------------------
# certified values


@dataclass(frozen=True)
class CertifiedValue:
    """Closed rational interval [lo, hi] containing the true value."""

    lo: Fraction
    hi: Fraction
    exact: bool = False

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise DomainError(f"invalid interval [{self.lo}, {self.hi}]")
        if self.exact and self.lo != self.hi:
            raise DomainError("exact value must have lo == hi")

    @staticmethod
    def exactly(x: Rat) -> "CertifiedValue":
        f = Fraction(x)
        return CertifiedValue(f, f, True)

    @staticmethod
    def bounds(lo: Rat, hi: Rat) -> "CertifiedValue":
        flo, fhi = Fraction(lo), Fraction(hi)
        return CertifiedValue(flo, fhi, flo == fhi)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def __add__(self, other: "CertifiedValue | Rat") -> "CertifiedValue":
        o = _as_cv(other)
        return CertifiedValue(self.lo + o.lo, self.hi + o.hi, self.exact and o.exact)

    __radd__ = __add__

    def __neg__(self) -> "CertifiedValue":
        return CertifiedValue(-self.hi, -self.lo, self.exact)

    def __sub__(self, other: "CertifiedValue | Rat") -> "CertifiedValue":
        return self + (-_as_cv(other))

    def __rsub__(self, other: Rat) -> "CertifiedValue":
        return _as_cv(other) + (-self)

    def __mul__(self, other: "CertifiedValue | Rat") -> "CertifiedValue":
        o = _as_cv(other)
        prods = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return CertifiedValue(min(prods), max(prods), self.exact and o.exact)

    __rmul__ = __mul__

    def contains(self, x: Rat) -> bool:
        return self.lo <= x <= self.hi

    def floor_decided(self) -> Optional[int]:
        """Floor of the true value if the interval pins it down, else None."""
        flo = self.lo.numerator // self.lo.denominator
        fhi = self.hi.numerator // self.hi.denominator
        if flo == fhi:
            return flo
        # [lo, hi] with hi an exact integer fhi and flo == fhi - 1: the true
        # value may or may not equal fhi, so the floor stays undecided unless
        # the value is exact.
        if self.exact:
            return flo
        return None

    def ceil_decided(self) -> Optional[int]:
        clo = -((-self.lo.numerator) // self.lo.denominator)
        chi = -((-self.hi.numerator) // self.hi.denominator)
        if clo == chi:
            return clo
        if self.exact:
            return clo
        return None


def _as_cv(x: "CertifiedValue | Rat") -> CertifiedValue:
    if isinstance(x, CertifiedValue):
        return x
    return CertifiedValue.exactly(x)


# three-valued comparisons ---------------------------------------------------


def tri_lt(x: "CertifiedValue | Rat", y: "CertifiedValue | Rat") -> Optional[bool]:
    """Certified x < y: True, False, or None when undecidable at this width."""
    a, b = _as_cv(x), _as_cv(y)
    if a.exact and b.exact:
        return a.lo < b.lo
    if a.hi < b.lo:
        return True
    if b.hi <= a.lo:
        return False
    return None


def tri_le(x: "CertifiedValue | Rat", y: "CertifiedValue | Rat") -> Optional[bool]:
    a, b = _as_cv(x), _as_cv(y)
    if a.exact and b.exact:
        return a.lo <= b.lo
    if a.hi <= b.lo:
        return True
    if b.hi < a.lo:
        return False
    return None


def tri_and(*vals: Optional[bool]) -> Optional[bool]:
    if any(v is False for v in vals):
        return False
    if any(v is None for v in vals):
        return None
    return True


def cv_in_halfopen(x: "CertifiedValue | Rat", lo: Rat, hi: Rat) -> Optional[bool]:
    """Certified membership x in [lo, hi)."""
    return tri_and(tri_le(lo, x), tri_lt(x, hi))


# ---------------------------------------------------------------------------
# exponents


def _iroot(x: int, r: int) -> tuple[int, bool]:
    root, exact = gmpy2.iroot(x, r)
    return int(root), bool(exact)


def _named_sqrt(k: int) -> Callable[[int], CertifiedValue]:
    return lambda bits: rational_root_cv(Fraction(k), 2, bits)


def _named_mpmath(getter: str) -> Callable[[int], CertifiedValue]:
    def fn(bits: int) -> CertifiedValue:
        ctx = _ivctx(bits + 16)
        return cv_from_iv(getattr(ctx, getter))

    return fn


def _golden(bits: int) -> CertifiedValue:
    return (rational_root_cv(Fraction(5), 2, bits + 2) + 1) * Fraction(1, 2)


NAMED_CONSTANTS: dict[str, Callable[[int], CertifiedValue]] = {
    "e": _named_mpmath("e"),
    "pi": _named_mpmath("pi"),
    "sqrt2": _named_sqrt(2),
    "sqrt3": _named_sqrt(3),
    "sqrt5": _named_sqrt(5),
    "golden": _golden,
}


@dataclass(frozen=True)
class Exponent:
    """A non-integral exponent alpha > 1, stored exactly.

    Either an exact rational p/q in lowest terms (q >= 2) or a named
    constant whose value can be enclosed at any requested precision.
    """

    frac: Optional[Fraction] = None
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.frac is None) == (self.name is None):
            raise DomainError("exponent needs exactly one of frac or name")
        if self.frac is not None:
            if self.frac.denominator == 1:
                raise DomainError(f"exponent {self.frac} is integral")
            if self.frac <= 1:
                raise DomainError(f"exponent {self.frac} is not > 1")
        else:
            if self.name not in NAMED_CONSTANTS:
                raise DomainError(f"unknown named constant {self.name!r}")
            if tri_lt(CertifiedValue.exactly(1), NAMED_CONSTANTS[self.name](64)) is not True:
                raise DomainError(f"constant {self.name!r} is not > 1")

    @staticmethod
    def rational(p: int, q: int) -> "Exponent":
        return Exponent(frac=Fraction(p, q))

    @staticmethod
    def named(name: str) -> "Exponent":
        return Exponent(name=name)

    @staticmethod
    def parse(text: str) -> "Exponent":
        """Parse 'p/q' or a named-constant token. Decimals are rejected."""
        s = text.strip()
        if s in NAMED_CONSTANTS:
            return Exponent.named(s)
        if "/" in s:
            num, _, den = s.partition("/")
            try:
                return Exponent.rational(int(num), int(den))
            except ValueError as exc:
                raise DomainError(f"cannot parse exponent {text!r}") from exc
        raise DomainError(
            f"cannot parse exponent {text!r}: use an exact rational 'p/q' "
            f"or one of {sorted(NAMED_CONSTANTS)}"
        )

    @property
    def is_rational(self) -> bool:
        return self.frac is not None

    @property
    def p(self) -> int:
        assert self.frac is not None
        return self.frac.numerator

    @property
    def q(self) -> int:
        assert self.frac is not None
        return self.frac.denominator

    def interval(self, bits: int) -> CertifiedValue:
        if self.frac is not None:
            return CertifiedValue.exactly(self.frac)
        assert self.name is not None
        return NAMED_CONSTANTS[self.name](bits)

    def __float__(self) -> float:
        return float(self.interval(64))

    def __str__(self) -> str:
        return str(self.frac) if self.frac is not None else str(self.name)


# ---------------------------------------------------------------------------
# mpmath interval plumbing


@functools.lru_cache(maxsize=64)
def _ivctx(bits: int):
    ctx = ctx_iv.MPIntervalContext()
    ctx.prec = bits
    return ctx


def _mpf_tuple_to_fraction(t) -> Fraction:
    sign, man, exp, _bc = t
    man = int(man)
    if man == 0:
        if exp == 0:
            return Fraction(0)
        raise AmbiguousRounding("non-finite interval endpoint")
    v = Fraction(man) * (Fraction(2) ** int(exp))
    return -v if sign else v


def cv_from_iv(z) -> CertifiedValue:
    """Exact conversion of an mpmath interval to a CertifiedValue."""
    lo_t, hi_t = z._mpi_
    lo = _mpf_tuple_to_fraction(lo_t)
    hi = _mpf_tuple_to_fraction(hi_t)
    return CertifiedValue(lo, hi, lo == hi)


def iv_from_fraction(ctx, f: Fraction):
    # numerator/denominator are exact in iv; the division rounds outward
    return ctx.mpf(f.numerator) / ctx.mpf(f.denominator)


def iv_from_cv(ctx, cv: CertifiedValue):
    lo = iv_from_fraction(ctx, cv.lo)
    if cv.lo == cv.hi:
        return lo
    hi = iv_from_fraction(ctx, cv.hi)
    return lo + (hi - lo) * ctx.mpf([0, 1])  # rigorous hull


# ---------------------------------------------------------------------------
# rational powers via integer roots


def rational_root_cv(x: Fraction, r: int, bits: int) -> CertifiedValue:
    """Certified x**(1/r) for rational x >= 0 and integer r >= 1."""
    if r < 1:
        raise DomainError("root order must be >= 1")
    if x < 0:
        raise DomainError("negative radicand")
    if x == 0:
        return CertifiedValue.exactly(0)
    if r == 1:
        return CertifiedValue.exactly(x)
    num_root, num_exact = _iroot(x.numerator, r)
    den_root, den_exact = _iroot(x.denominator, r)
    if num_exact and den_exact:
        return CertifiedValue.exactly(Fraction(num_root, den_root))
    scale = 1 << (bits * r)
    t = (x.numerator * scale) // x.denominator
    s_lo, lo_exact = _iroot(t, r)
    if lo_exact and x.numerator * scale % x.denominator == 0:
        val = Fraction(s_lo, 1 << bits)
        return CertifiedValue.exactly(val)
    s_hi_root, hi_exact = _iroot(t + 1, r)
    s_hi = s_hi_root if hi_exact else s_hi_root + 1
    den = Fraction(1, 1 << bits)
    return CertifiedValue(s_lo * den, s_hi * den, False)


def rational_pow_cv(x: Fraction, e: Fraction, bits: int) -> CertifiedValue:
    """Certified x**e for rational x > 0 and rational e."""
    if x <= 0:
        raise DomainError("base must be positive")
    if e < 0:
        return rational_pow_cv(1 / x, -e, bits)
    if e == 0:
        return CertifiedValue.exactly(1)
    base = x ** e.numerator
    return rational_root_cv(base, e.denominator, bits)


# ---------------------------------------------------------------------------
# the public operations


def pow_certified(
    n: int,
    alpha: Exponent,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    bits: Optional[int] = None,
) -> CertifiedValue:
    """Certified n**alpha.  Exact when alpha = p/q and n is a perfect
    q-th power; otherwise an interval at the requested bit count."""
    if n < 1:
        raise DomainError("n must be >= 1")
    b = bits if bits is not None else policy.start_bits
    if alpha.is_rational:
        if n == 1:
            return CertifiedValue.exactly(1)
        return rational_pow_cv(Fraction(n), alpha.frac, b)
    if n == 1:
        return CertifiedValue.exactly(1)
    ctx = _ivctx(b + 16)
    a_iv = iv_from_cv(ctx, alpha.interval(b + 16))
    return cv_from_iv(ctx.exp(a_iv * ctx.log(ctx.mpf(n))))


def _escalate(
    policy: PrecisionPolicy,
    compute: Callable[[int], CertifiedValue],
    decide: Callable[[CertifiedValue], Optional[object]],
    what: str,
):
    for b in policy.schedule():
        out = decide(compute(b))
        if out is not None:
            return out
    raise PrecisionExhausted(f"{what}: undecided at {policy.max_bits} bits")


def floor_pow(n: int, alpha: Exponent, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Exact floor(n**alpha)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if alpha.is_rational:
        root, _ = _iroot(n ** alpha.p, alpha.q)
        return root
    return _escalate(
        policy,
        lambda b: pow_certified(n, alpha, policy, bits=b),
        lambda cv: cv.floor_decided(),
        f"floor({n}**{alpha})",
    )


def frac_pow(
    n: int, alpha: Exponent, policy: PrecisionPolicy = DEFAULT_POLICY,
    bits: Optional[int] = None,
) -> CertifiedValue:
    """Certified fractional part of n**alpha, in [0, 1)."""
    f = floor_pow(n, alpha, policy)
    if alpha.is_rational and _iroot(n ** alpha.p, alpha.q)[1]:
        return CertifiedValue.exactly(0)
    cv = pow_certified(n, alpha, policy, bits=bits)
    lo = max(cv.lo - f, Fraction(0))
    hi = min(cv.hi - f, Fraction(1))
    return CertifiedValue(lo, hi, cv.exact)


def root_ceil(m: int, alpha: Exponent, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Exact ceil(m**(1/alpha))."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if alpha.is_rational:
        root, exact = _iroot(m ** alpha.q, alpha.p)
        return root if exact else root + 1

    def compute(b: int) -> CertifiedValue:
        ctx = _ivctx(b + 16)
        a_iv = iv_from_cv(ctx, alpha.interval(b + 16))
        return cv_from_iv(ctx.exp(ctx.log(ctx.mpf(m)) / a_iv))

    return _escalate(policy, compute, lambda cv: cv.ceil_decided(), f"ceil({m}**(1/{alpha}))")


def _ceil_frac(v: Fraction) -> int:
    return -((-v.numerator) // v.denominator)


def dist_nearest_int(x: CertifiedValue) -> CertifiedValue:
    """Certified distance from x to the nearest integer, in [0, 1/2].

    The map is the tent function with corners at integers (value 0) and
    half-integers (value 1/2); extremes over [lo, hi] are attained at an
    endpoint or at one of those corners.
    """
    if x.width >= 1:
        raise AmbiguousRounding("interval spans a full period of ||.||")

    def d(v: Fraction) -> Fraction:
        fr = v - (v.numerator // v.denominator)
        return min(fr, 1 - fr)

    dlo, dhi = d(x.lo), d(x.hi)
    lo, hi = min(dlo, dhi), max(dlo, dhi)
    if _ceil_frac(x.lo) <= x.hi:  # integer inside
        lo = Fraction(0)
    if _ceil_frac(x.lo - Fraction(1, 2)) + Fraction(1, 2) <= x.hi:  # half-integer inside
        hi = Fraction(1, 2)
    return CertifiedValue(lo, hi, lo == hi)


def _detect_rational_log_ratio(a: Fraction, theta: Fraction, max_den: int = 64) -> Optional[Fraction]:
    """Exact r = log_a(theta) when r is rational with small denominator."""
    import math

    if theta == a:
        return Fraction(1)
    num = math.log(theta.numerator) - math.log(theta.denominator)
    den = math.log(a.numerator) - math.log(a.denominator)
    cand = Fraction(num / den).limit_denominator(max_den)
    if cand > 0 and theta ** cand.denominator == a ** cand.numerator:
        return cand
    return None


def phi(
    a: Rat,
    theta: Rat,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    bits: Optional[int] = None,
) -> CertifiedValue:
    """Certified 1/log_a(theta), the exponent attached to the slope theta.

    Domain: a > 0, a != 1, and theta in [a, 1) for a < 1 or (1, a] for
    a > 1.  On that domain the value lies in [1, infinity), with exact
    results whenever log_a(theta) is rational (e.g. theta = a gives 1,
    theta**2 = a gives 2).
    """
    a_f, t_f = Fraction(a), Fraction(theta)
    if a_f <= 0 or a_f == 1:
        raise DomainError("a must be positive and != 1")
    lo_dom, hi_dom = min(a_f, Fraction(1)), max(a_f, Fraction(1))
    if not (lo_dom <= t_f <= hi_dom) or t_f == 1:
        raise DomainError(f"theta {t_f} outside ({lo_dom}, {hi_dom}) \\ {{1}}")
    ratio = _detect_rational_log_ratio(a_f, t_f)
    if ratio is not None:
        return CertifiedValue.exactly(1 / ratio)
    b = bits if bits is not None else policy.start_bits
    ctx = _ivctx(b + 16)
    val = ctx.log(iv_from_fraction(ctx, a_f)) / ctx.log(iv_from_fraction(ctx, t_f))
    return cv_from_iv(val)


def pow_cv_exponent(
    n: int,
    exponent: "Fraction | Callable[[int], CertifiedValue]",
    bits: int,
) -> CertifiedValue:
    """Certified n**e for n >= 1, with e an exact Fraction or a provider
    of certified enclosures at a requested bit count."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if isinstance(exponent, Fraction):
        return rational_pow_cv(Fraction(n), exponent, bits)
    if n == 1:
        return CertifiedValue.exactly(1)
    ctx = _ivctx(bits + 16)
    e_iv = iv_from_cv(ctx, exponent(bits + 16))
    return cv_from_iv(ctx.exp(e_iv * ctx.log(ctx.mpf(n))))


def perfect_power_witness(n: int, alpha: Exponent) -> bool:
    """True when alpha = p/q is rational and n is a perfect q-th power,
    so n**alpha is an exact integer."""
    if not alpha.is_rational:
        return False
    return _iroot(n, alpha.q)[1]
