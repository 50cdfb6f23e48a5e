"""Twisted-system solvers, certificates, and continued fractions."""

from fractions import Fraction

import mpmath
import pytest

from pslab.certified import (
    NAMED_CONSTANTS,
    CertifiedValue,
    Exponent,
    rational_pow_cv,
)
from pslab.errors import DomainError, PrecisionExhausted
from pslab.systems import (
    ContinuedFraction,
    DiophSystem,
    cf_expand,
    solve_system_one,
    solve_system_two,
    verify_solution,
)

from conftest import mpq


def brute_one(sysm: DiophSystem, alpha: Fraction, budget: int, dps: int = 80) -> list[int]:
    """Definition-level scan at high floating precision."""
    with mpmath.workdps(dps):
        al = mpq(alpha)
        target = mpmath.power(mpq(sysm.a), 1 / al)
        out = []
        for n in range(1, budget + 1):
            x = target * n
            d = abs(x - mpmath.nint(x))
            if d * mpmath.power(n, al - 1) <= mpq(sysm.c):
                y = mpq(sysm.gamma) * mpmath.power(n, al)
                fr = y - mpmath.floor(y)
                if mpq(sysm.i_lo) <= fr < mpq(sysm.i_hi):
                    out.append(n)
        return out


def test_solve_one_frozen_example():
    sysm = DiophSystem.make(2, 1, 1)
    rep = solve_system_one(sysm, Exponent.parse("5/2"), 10**4)
    assert [s.n for s in rep.solutions] == [1, 3, 2845]


def test_solve_one_matches_brute():
    sysm = DiophSystem.make(3, 1, 1, 0, Fraction(1, 2))
    got = [s.n for s in solve_system_one(sysm, Exponent.parse("3/2"), 2000).solutions]
    assert got == brute_one(sysm, Fraction(3, 2), 2000)


def test_solve_one_solutions_reverify():
    sysm = DiophSystem.make(2, 1, 1)
    alpha = Exponent.parse("5/2")
    rep = solve_system_one(sysm, alpha, 10**4)
    for s in rep.solutions:
        cert = verify_solution(sysm, alpha, s.n)
        assert cert.accepted, s.n
    # and a couple of non-solutions must fail re-verification
    sols = {s.n for s in rep.solutions}
    for n in (2, 7, 100, 5000):
        assert n not in sols
        assert not verify_solution(sysm, alpha, n).accepted


def test_solve_two_frozen_example():
    sysm = DiophSystem.make(Fraction(1, 4), 1, 1, 0, Fraction(1, 2))
    rep = solve_system_two(sysm, Fraction(3, 10), 10**3)
    assert len(rep.solutions) == 419
    for s in rep.solutions[:25]:
        assert verify_solution(sysm, Fraction(3, 10), s.n).accepted


def test_solve_two_exact_distance_at_multiples():
    # theta = 3/10: every multiple of 10 has ||theta*n|| = 0, so the
    # distance condition is free and only the fractional test filters
    sysm = DiophSystem.make(Fraction(1, 4), 1, 1, 0, 1)
    rep = solve_system_two(sysm, Fraction(3, 10), 200)
    ns = {s.n for s in rep.solutions}
    assert {10, 20, 30, 40, 50}.issubset(ns)


def test_solve_two_respects_interval():
    full = DiophSystem.make(Fraction(1, 4), 1, 1, 0, 1)
    half = DiophSystem.make(Fraction(1, 4), 1, 1, 0, Fraction(1, 2))
    all_ns = {s.n for s in solve_system_two(full, Fraction(3, 10), 500).solutions}
    half_ns = {s.n for s in solve_system_two(half, Fraction(3, 10), 500).solutions}
    assert half_ns <= all_ns


def test_verify_solution_rejects_unknown_exponent_form():
    sysm = DiophSystem.make(2, 1, 1)
    with pytest.raises(DomainError):
        verify_solution(sysm, "nonsense", 3)


def test_dioph_system_validation():
    with pytest.raises(DomainError):
        DiophSystem.make(1, 1, 1)  # a = 1 collapses the target
    with pytest.raises(DomainError):
        DiophSystem.make(2, 0, 1)
    with pytest.raises(DomainError):
        DiophSystem.make(2, 1, 0)
    with pytest.raises(DomainError):
        DiophSystem.make(2, 1, 1, Fraction(1, 2), Fraction(1, 4))


# --- continued fractions ----------------------------------------------------


def _named(token: str, k: int) -> ContinuedFraction:
    provider = NAMED_CONSTANTS[token]
    return cf_expand(provider(256), k, refine=provider)


def test_cf_golden_is_all_ones():
    cf = _named("golden", 12)
    assert cf.quotients == tuple([1] * 12)
    assert not cf.exact_rational


def test_cf_sqrt2():
    cf = _named("sqrt2", 10)
    assert cf.quotients == (1, 2, 2, 2, 2, 2, 2, 2, 2, 2)


def test_cf_e_pattern():
    cf = _named("e", 9)
    assert cf.quotients == (2, 1, 2, 1, 1, 4, 1, 1, 6)


def test_cf_pi_opening():
    cf = _named("pi", 5)
    assert cf.quotients == (3, 7, 15, 1, 292)


def test_cf_rational_terminates():
    cf = cf_expand(CertifiedValue.exactly(Fraction(3, 2)), 10)
    assert cf.exact_rational
    assert cf.quotients == (1, 2)


def test_cf_cube_root_of_four():
    refine = lambda bits: rational_pow_cv(Fraction(2), Fraction(2, 3), bits)
    cf = cf_expand(refine(256), 10, refine=refine)
    assert cf.quotients == (1, 1, 1, 2, 2, 1, 3, 2, 3, 1)


def test_cf_convergents_quality():
    # |x - p/q| < 1/q^2 for every convergent of an irrational target
    for token in ("golden", "sqrt2", "sqrt3", "sqrt5", "e", "pi"):
        provider = NAMED_CONSTANTS[token]
        cf = _named(token, 12)
        x = provider(512)
        for p, q in cf.convergents:
            err_lo = abs(x.lo - Fraction(p, q))
            err_hi = abs(x.hi - Fraction(p, q))
            assert max(err_lo, err_hi) < Fraction(1, q * q), (token, p, q)


def test_cf_determinant_identity():
    cf = _named("pi", 12)
    pq = cf.convergents
    for k in range(1, len(pq)):
        p1, q1 = pq[k]
        p0, q0 = pq[k - 1]
        assert p1 * q0 - p0 * q1 == (-1) ** (k - 1)


def test_cf_bad_determinant_refused():
    with pytest.raises(DomainError):
        ContinuedFraction(
            target=None,
            quotients=(1, 2),
            convergents=((1, 1), (5, 3)),  # det = 2, identity broken
            exact_rational=True,
        )


def test_cf_without_refine_exhausts_on_wide_input():
    wide = CertifiedValue(Fraction(141, 100), Fraction(142, 100))
    with pytest.raises(PrecisionExhausted):
        cf_expand(wide, 12)
