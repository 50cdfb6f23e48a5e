"""The window reduction for y = a*x + b against direct membership."""

from fractions import Fraction

import pytest

from pslab.certified import Exponent
from pslab.errors import DomainError, InsufficientData, NotSolvableInN
from pslab.linear import (
    check_equivalence,
    count_fit,
    count_solutions,
    make_eq,
    residue_test,
    solve_linear,
    solve_xyz,
    window,
    window_hits_integer,
)

from conftest import oracle_floor_pow, oracle_members

A32 = Exponent.parse("3/2")


def naive_solutions(a: Fraction, b: Fraction, p: int, q: int, N: int) -> list[int]:
    """Solution set straight from the definition, all oracle arithmetic."""
    top = oracle_floor_pow(N, p, q)
    members = set(oracle_members(p, q, int(a * top + b) + 1)[0])
    out = []
    for n in range(1, N + 1):
        x = oracle_floor_pow(n, p, q)
        m = a * x + b
        if m.denominator == 1 and m >= 1 and int(m) in members:
            out.append(n)
    return out


def test_solve_linear_2x_32_small():
    sols = solve_linear(make_eq(2, 0), A32, 10**4)
    ns = [s.n for s in sols]
    assert len(ns) == 98
    assert ns[:6] == [1, 5, 7, 12, 17, 19]


@pytest.mark.parametrize(
    "a,b,alpha",
    [
        (Fraction(2), Fraction(0), "3/2"),
        (Fraction(3), Fraction(0), "6/5"),
        (Fraction(3, 2), Fraction(1, 2), "3/2"),
        (Fraction(5, 2), Fraction(3, 2), "5/3"),
        (Fraction(1), Fraction(0), "5/2"),
    ],
)
def test_solve_linear_matches_naive(a, b, alpha):
    e = Exponent.parse(alpha)
    want = naive_solutions(a, b, e.p, e.q, 400)
    got = [s.n for s in solve_linear(make_eq(a, b), e, 400)]
    assert got == want


def test_solution_records_are_internally_consistent():
    eq = make_eq(Fraction(3, 2), Fraction(1, 2))
    for rec in solve_linear(eq, A32, 2000):
        assert rec.x == oracle_floor_pow(rec.n, 3, 2)
        assert Fraction(3, 2) * rec.x + Fraction(1, 2) == rec.y
        assert oracle_floor_pow(rec.k, 3, 2) == rec.y


def test_solve_linear_n_min_splits_cleanly():
    eq = make_eq(2, 0)
    full = [s.n for s in solve_linear(eq, A32, 3000)]
    lo = [s.n for s in solve_linear(eq, A32, 1500)]
    hi = [s.n for s in solve_linear(eq, A32, 3000, n_min=1501)]
    assert lo + hi == full


def test_count_solutions_matches_len():
    eq = make_eq(2, 0)
    assert count_solutions(eq, A32, 2000) == len(solve_linear(eq, A32, 2000))


def test_residue_test_matches_integrality():
    eq = make_eq(Fraction(3, 2), Fraction(1, 2))
    for n in range(1, 300):
        x = oracle_floor_pow(n, 3, 2)
        integral = (Fraction(3, 2) * x + Fraction(1, 2)).denominator == 1
        assert residue_test(eq, n, A32) == integral


def test_window_brackets_the_root():
    eq = make_eq(2, 0)
    for n in range(1, 200):
        if not residue_test(eq, n, A32):
            continue
        w = window(eq, n, A32)
        # left = m^(2/3), right = (m+1)^(2/3), certified
        assert (w.left.lo) ** 3 <= w.m**2 <= (w.left.hi) ** 3
        assert (w.right.lo) ** 3 <= (w.m + 1) ** 2 <= (w.right.hi) ** 3


def test_window_hit_equals_membership():
    eq = make_eq(2, 0)
    members = set(oracle_members(3, 2, 2 * oracle_floor_pow(200, 3, 2) + 2)[0])
    for n in range(1, 200):
        if not residue_test(eq, n, A32):
            continue
        w = window(eq, n, A32)
        assert window_hits_integer(w, A32) == (w.m in members), n


def test_window_requires_residue_pass():
    eq = make_eq(Fraction(3, 2), Fraction(1, 2))
    bad = next(n for n in range(1, 50) if not residue_test(eq, n, A32))
    with pytest.raises(DomainError):
        window(eq, bad, A32)


@pytest.mark.parametrize("alpha", ["6/5", "3/2", "5/2"])
def test_check_equivalence_clean_small(alpha):
    e = Exponent.parse(alpha)
    assert check_equivalence(make_eq(2, 0), e, 3000) is None
    assert check_equivalence(make_eq(Fraction(3, 2), Fraction(1, 2)), e, 3000) is None


def test_make_eq_validation():
    with pytest.raises(DomainError):
        make_eq(0, 1)
    with pytest.raises(DomainError):
        make_eq(-2, 0)
    with pytest.raises(NotSolvableInN):
        make_eq(Fraction(3, 2), Fraction(1, 3))  # 2*(1/3) never integral
    with pytest.raises(NotSolvableInN):
        make_eq(2, 0.5)  # floats refused: exactness is the whole point
    eq = make_eq(Fraction(3, 2), Fraction(1, 2))
    assert (eq.a1, eq.a2, eq.d) == (3, 2, 1)


def test_count_fit_identity_slope_exact():
    fit = count_fit(make_eq(1, 0), A32, [10, 100, 1000])
    assert fit.counts == (10, 100, 1000)  # y = x: every n solves it
    assert abs(fit.slope - 1.0) < 1e-9


def test_count_fit_needs_hits():
    with pytest.raises(InsufficientData):
        count_fit(make_eq(2, 0), Exponent.parse("5/2"), [10, 100, 1000])


def test_count_fit_validates_checkpoints():
    with pytest.raises(DomainError):
        count_fit(make_eq(1, 0), A32, [100, 10, 1000])
    with pytest.raises(DomainError):
        count_fit(make_eq(1, 0), A32, [10, 100])


def test_solve_xyz_small():
    triples = solve_xyz(A32, 40)
    assert len(triples) == 99
    members = set(oracle_members(3, 2, 2 * oracle_floor_pow(40, 3, 2))[0])
    for x, y, z in triples:
        assert x + y == z
        assert x <= y
        assert {x, y, z} <= members
    # exhaustive: nothing missed
    ms = oracle_members(3, 2, oracle_floor_pow(40, 3, 2))[0]
    want = sum(
        1
        for i, x in enumerate(ms)
        for y in ms[i:]
        if (x + y) in members
    )
    assert len(triples) == want
