"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's own arithmetic paths:
floors of n^(p/q) come from mpmath floating evaluation followed by an
exact integer adjustment, so a bug in the certified machinery cannot
hide behind itself.
"""

from fractions import Fraction

import mpmath
import pytest

from pslab.certified import Exponent


def oracle_floor_pow(n: int, p: int, q: int, prec: int = 120) -> int:
    """floor(n^(p/q)) from a floating guess plus exact integer correction."""
    with mpmath.workprec(prec):
        v = int(mpmath.floor(mpmath.power(n, mpmath.mpf(p) / q)))
    while (v + 1) ** q <= n**p:
        v += 1
    while v > 0 and v**q > n**p:
        v -= 1
    return v


def oracle_members(p: int, q: int, limit: int) -> tuple[list[int], dict[int, int]]:
    """All floor(n^(p/q)) <= limit with witnesses, built only from the oracle."""
    members: list[int] = []
    witness: dict[int, int] = {}
    n = 1
    while True:
        m = oracle_floor_pow(n, p, q)
        if m > limit:
            break
        members.append(m)
        witness[m] = n
        n += 1
    return members, witness


def mpq(f: Fraction) -> mpmath.mpf:
    return mpmath.mpf(f.numerator) / f.denominator


@pytest.fixture(scope="session")
def alpha32() -> Exponent:
    return Exponent.parse("3/2")


@pytest.fixture(scope="session")
def alpha52() -> Exponent:
    return Exponent.parse("5/2")
