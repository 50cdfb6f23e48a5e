"""Windows, membership and additive structure of PS(alpha) = {floor(n^alpha)}."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .certified import DEFAULT_POLICY, Exponent, PrecisionPolicy, floor_pow, root_ceil
from .errors import DomainError, TooFewMembers


@dataclass(frozen=True)
class PSWindow:
    """All members of PS(alpha) in [1, limit], with their witnesses.

    members is strictly increasing; witness[m] is the unique n with
    floor(n^alpha) = m (unique because alpha > 1 makes the map strictly
    increasing).
    """

    alpha: Exponent
    limit: int
    members: tuple[int, ...]
    witness: dict[int, int]
    _member_set: frozenset[int] = field(repr=False, default=frozenset())

    def __post_init__(self) -> None:
        object.__setattr__(self, "_member_set", frozenset(self.members))

    def __contains__(self, m: int) -> bool:
        return m in self._member_set

    def __len__(self) -> int:
        return len(self.members)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "m"])
            for m in self.members:
                w.writerow([self.witness[m], m])


def ps_window(
    alpha: Exponent, limit: int, policy: PrecisionPolicy = DEFAULT_POLICY
) -> PSWindow:
    """Members of PS(alpha) in [1, limit], built by walking n upward."""
    if limit < 1:
        raise DomainError("limit must be >= 1")
    members: list[int] = []
    witness: dict[int, int] = {}
    n = 1
    while True:
        m = floor_pow(n, alpha, policy)
        if m > limit:
            break
        members.append(m)
        witness[m] = n
        n += 1
    return PSWindow(alpha, limit, tuple(members), witness)


def is_member(m: int, alpha: Exponent, policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
    """Whether some n has floor(n^alpha) = m.

    The candidate witness is k = ceil(m^(1/alpha)): it is the least n with
    n^alpha >= m, so m is a member iff k^alpha < m+1.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    k = root_ceil(m, alpha, policy)
    return floor_pow(k, alpha, policy) == m


def member_witness(m: int, alpha: Exponent, policy: PrecisionPolicy = DEFAULT_POLICY) -> Optional[int]:
    """The witness n with floor(n^alpha) = m, or None when m is no member."""
    k = root_ceil(m, alpha, policy)
    return k if floor_pow(k, alpha, policy) == m else None


@dataclass(frozen=True)
class APRecord:
    """Arithmetic progression z, z+x, ..., z+(k-1)x inside PS(alpha).

    Every term is re-verified through is_member at construction time, a
    code path independent of the window scan that found it.
    """

    z: int
    x: int
    k: int
    alpha: Exponent

    def __post_init__(self) -> None:
        if self.k < 2 or self.x < 1 or self.z < 1:
            raise DomainError("need z >= 1, x >= 1, k >= 2")
        for i in range(self.k):
            if not is_member(self.z + i * self.x, self.alpha):
                raise DomainError(
                    f"{self.z} + {i}*{self.x} is not a member for alpha={self.alpha}"
                )

    @property
    def terms(self) -> tuple[int, ...]:
        return tuple(self.z + i * self.x for i in range(self.k))


@dataclass(frozen=True)
class FS3Witness:
    """Witness (x, z) such that {x, 2x, z, z+x, z+2x} lies in PS(alpha).

    This realizes the finite sumset FS(x, x, z): all nonempty subset sums
    of (x, x, z) coincide with those five values.
    """

    x: int
    z: int
    alpha: Exponent

    def __post_init__(self) -> None:
        for v in self.values:
            if not is_member(v, self.alpha):
                raise DomainError(f"{v} is not a member for alpha={self.alpha}")

    @property
    def values(self) -> tuple[int, ...]:
        return (self.x, 2 * self.x, self.z, self.z + self.x, self.z + 2 * self.x)


def find_ap(
    alpha: Exponent,
    x: int,
    k: int,
    bound: int,
    window: Optional[PSWindow] = None,
) -> Optional[APRecord]:
    """Smallest member z <= bound starting a k-term progression of step x.

    Later terms may exceed bound; the window is materialized out to
    bound + (k-1)x so every term is a hashed lookup.
    """
    if x < 1 or k < 2:
        raise DomainError("need x >= 1 and k >= 2")
    if bound < 1:
        return None
    need = bound + (k - 1) * x
    if window is None or window.limit < need:
        window = ps_window(alpha, need)
    for z in window.members:
        if z > bound:
            break
        if all(z + i * x in window for i in range(1, k)):
            return APRecord(z, x, k, alpha)
    return None


def find_fs3(alpha: Exponent, bound: int) -> Optional[FS3Witness]:
    """Smallest witness of FS(x, x, z) inside PS(alpha) with all five
    values <= bound: ascending x over {x : x, 2x members}, then ascending z.
    """
    if bound < 1:
        return None
    w = ps_window(alpha, bound)
    for x in w.members:
        if 2 * x > bound:
            break
        if 2 * x not in w:
            continue
        top = bound - 2 * x
        for z in w.members:
            if z > top:
                break
            if z + x in w and z + 2 * x in w:
                return FS3Witness(x, z, alpha)
    return None


@dataclass(frozen=True)
class GapStats:
    gaps: tuple[int, ...]
    min: int
    max: int
    mean: Fraction


def gap_stats(w: PSWindow) -> GapStats:
    """Statistics of consecutive differences inside a window."""
    if len(w.members) < 2:
        raise TooFewMembers("need at least two members for gap statistics")
    gaps = tuple(b - a for a, b in zip(w.members, w.members[1:]))
    return GapStats(gaps, min(gaps), max(gaps), Fraction(sum(gaps), len(gaps)))
