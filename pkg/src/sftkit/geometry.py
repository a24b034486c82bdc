"""Integer-lattice primitives: sites, finite shapes, boxes, and boundaries.

A site is a plain tuple of ints, a shape is a frozenset of sites, and all
distances are l-infinity.  Everything here is immutable and pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

Site = tuple
Shape = frozenset


class DimensionMismatch(ValueError):
    """Sites or shapes of different dimensions were combined."""


def add(a: Site, b: Site) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Site, b: Site) -> Site:
    return tuple(x - y for x, y in zip(a, b))


def linf_distance(a: Site, b: Site) -> int:
    """Max coordinate difference of two sites of equal dimension."""
    if len(a) != len(b):
        raise DimensionMismatch(f"sites {a} and {b} differ in dimension")
    return max(abs(x - y) for x, y in zip(a, b))


def set_distance(A: Iterable[Site], B: Iterable[Site]) -> int:
    """Minimum l-infinity distance over all site pairs; inputs must be nonempty."""
    A, B = list(A), list(B)
    if not A or not B:
        raise ValueError("set distance needs two nonempty shapes")
    return min(linf_distance(a, b) for a in A for b in B)


def shape_dim(S: Iterable[Site]) -> int | None:
    """Common dimension of a shape's sites, or None for the empty shape."""
    d = None
    for t in S:
        if d is None:
            d = len(t)
        elif len(t) != d:
            raise DimensionMismatch("shape mixes sites of different dimensions")
    return d


def cube(k: int, d: int) -> Shape:
    """The corner hypercube [0, k-1]^d; k = 0 gives the empty shape."""
    if k < 0:
        raise ValueError("cube side must be nonnegative")
    return frozenset(itertools.product(range(k), repeat=d))


def ball(k: int, d: int) -> Shape:
    """The centered hypercube [-k, k]^d (the radius-k l-infinity ball)."""
    if k < 0:
        raise ValueError("ball radius must be nonnegative")
    return frozenset(itertools.product(range(-k, k + 1), repeat=d))


def hypercube(kind: str, k: int, d: int) -> Shape:
    """Dispatch on the two standard hypercube families, "C" or "Q"."""
    if kind == "C":
        return cube(k, d)
    if kind == "Q":
        return ball(k, d)
    raise ValueError(f"unknown hypercube kind {kind!r}")


def translate(S: Iterable[Site], t: Site) -> Shape:
    return frozenset(add(s, t) for s in S)


def minkowski(S: Iterable[Site], T: Iterable[Site]) -> Shape:
    return frozenset(add(s, t) for s in S for t in T)


def inflate(S: Iterable[Site], k: int) -> Shape:
    """Minkowski sum of S with the radius-k ball (S + Q_k)."""
    S = frozenset(S)
    d = shape_dim(S)
    if d is None:
        return S
    return minkowski(S, ball(k, d))


def inner_boundary(S: Iterable[Site], k: int) -> Shape:
    """Sites of S within distance k of the complement; empty for k = 0.

    k = 0 is empty because integer sites are at distance at least 1 from
    any site outside S.
    """
    S = frozenset(S)
    if k == 0 or not S:
        return frozenset()
    d = shape_dim(S)
    offs = [o for o in itertools.product(range(-k, k + 1), repeat=d) if any(o)]
    return frozenset(t for t in S if any(add(t, o) not in S for o in offs))


def min_corner(S: Iterable[Site]) -> Site:
    S = list(S)
    if not S:
        raise ValueError("empty shape has no corner")
    d = len(S[0])
    return tuple(min(t[i] for t in S) for i in range(d))


def canonical_shape(S: Iterable[Site]) -> Shape:
    """Translate of S with its minimum corner at the origin."""
    S = frozenset(S)
    if not S:
        return S
    c = min_corner(S)
    return frozenset(sub(t, c) for t in S)


def diameter(S: Iterable[Site]) -> int:
    """Max pairwise l-infinity distance; 0 for empty or singleton shapes."""
    S = list(S)
    if len(S) <= 1:
        return 0
    d = len(S[0])
    return max(max(t[i] for t in S) - min(t[i] for t in S) for i in range(d))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box of lattice sites with inclusive corners."""

    lo: Site
    hi: Site

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise DimensionMismatch("box corners differ in dimension")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"empty box {self.lo}..{self.hi}")

    @classmethod
    def cube(cls, k: int, d: int) -> "Box":
        if k < 1:
            raise ValueError("box cube needs side >= 1")
        return cls((0,) * d, (k - 1,) * d)

    @classmethod
    def at(cls, origin: Site, sides) -> "Box":
        if isinstance(sides, int):
            sides = (sides,) * len(origin)
        return cls(tuple(origin), tuple(o + s - 1 for o, s in zip(origin, sides)))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> Site:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        n = 1
        for s in self.sides:
            n *= s
        return n

    def sites(self) -> Iterator[Site]:
        """All sites, in sorted (coordinate-tuple) order."""
        return itertools.product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def shape(self) -> Shape:
        return frozenset(self.sites())

    def contains(self, t: Site) -> bool:
        return all(a <= x <= b for x, a, b in zip(t, self.lo, self.hi))

    def contains_box(self, other: "Box") -> bool:
        return self.contains(other.lo) and self.contains(other.hi)

    def translate(self, t: Site) -> "Box":
        return Box(add(self.lo, t), add(self.hi, t))

    def inflate(self, k: int) -> "Box":
        """Grow (or for negative k shrink) the box by k on every face."""
        return Box(tuple(a - k for a in self.lo), tuple(b + k for b in self.hi))

    def distance(self, other: "Box") -> int:
        """l-infinity set distance between the two boxes (0 if they meet)."""
        gaps = []
        for a0, a1, b0, b1 in zip(self.lo, self.hi, other.lo, other.hi):
            gaps.append(max(0, b0 - a1, a0 - b1))
        return max(gaps)

    def site_distance(self, t: Site) -> int:
        return max(max(0, a - x, x - b) for x, a, b in zip(t, self.lo, self.hi))

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)
