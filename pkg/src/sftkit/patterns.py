"""Finite patterns over a finite alphabet, positioned on lattice sites.

Patterns are stored positioned (absolute coordinates); equality up to
translation is a separate predicate.  The alphabet's declared symbol order
drives every lexicographic ordering in the package.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator

from .geometry import Shape, Site, add, canonical_shape, diameter as shape_diameter, min_corner, shape_dim, sub


class Alphabet:
    """Ordered finite list of distinct symbol tokens."""

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols: Iterable):
        self.symbols = tuple(symbols)
        if not self.symbols:
            raise ValueError("alphabet must be nonempty")
        self._index = {s: i for i, s in enumerate(self.symbols)}
        if len(self._index) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")
        if any(s is None for s in self.symbols):
            raise ValueError("None is not a valid symbol")

    def index(self, sym) -> int:
        try:
            return self._index[sym]
        except KeyError:
            raise KeyError(f"symbol {sym!r} not in alphabet") from None

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, sym) -> bool:
        return sym in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.symbols)!r})"


class Pattern:
    """Total assignment of symbols to a finite set of sites.

    Treated as immutable after construction; do not mutate ``cells``.
    """

    __slots__ = ("cells", "_hash", "_shape")

    def __init__(self, cells=()):
        self.cells = dict(cells)
        self._hash = None
        self._shape = None

    @property
    def sites(self):
        return self.cells.keys()

    @property
    def shape(self) -> Shape:
        if self._shape is None:
            self._shape = frozenset(self.cells)
        return self._shape

    @property
    def dim(self) -> int | None:
        return shape_dim(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __getitem__(self, site: Site):
        return self.cells[site]

    def get(self, site: Site, default=None):
        return self.cells.get(site, default)

    def __eq__(self, other) -> bool:
        return isinstance(other, Pattern) and self.cells == other.cells

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.cells.items()))
        return self._hash

    def __repr__(self) -> str:
        items = sorted(self.cells.items())
        if len(items) > 8:
            items = items[:8] + ["..."]
        return f"Pattern({items})"

    def translate(self, t: Site) -> "Pattern":
        return Pattern({add(s, t): v for s, v in self.cells.items()})

    def restrict(self, T: Iterable[Site]) -> "Pattern":
        """Subpattern on T, which must be contained in the shape."""
        T = frozenset(T)
        if not T <= self.shape:
            raise ValueError("restriction shape is not contained in the pattern")
        return Pattern({s: self.cells[s] for s in T})

    def canonical(self) -> "Pattern":
        """Translate so the minimum corner of the shape is the origin."""
        if not self.cells:
            return self
        c = min_corner(self.cells)
        return Pattern({sub(s, c): v for s, v in self.cells.items()})

    def diameter(self) -> int:
        return shape_diameter(self.cells)


EMPTY_PATTERN = Pattern()


def constant(shape: Iterable[Site], sym) -> Pattern:
    return Pattern({s: sym for s in shape})


def equal_up_to_translation(u: Pattern, v: Pattern) -> bool:
    """True iff the shapes are translates and the symbols agree under it."""
    if len(u) != len(v):
        return False
    if not u.cells:
        return True
    t = sub(min_corner(v.cells), min_corner(u.cells))
    return all(v.get(add(s, t)) == val for s, val in u.cells.items())


def concat(*patterns: Pattern) -> Pattern:
    """Union of patterns with pairwise disjoint shapes (as positioned)."""
    cells = {}
    for p in patterns:
        for s, v in p.cells.items():
            if s in cells:
                raise ValueError(f"concat shapes overlap at {s}")
            cells[s] = v
    return Pattern(cells)


def find_occurrences(haystack: Pattern, needle: Pattern) -> frozenset:
    """All translations t with needle+t inside haystack and symbols matching."""
    if not needle.cells:
        raise ValueError("occurrence search needs a nonempty needle")
    anchor, aval = next(iter(sorted(needle.cells.items())))
    rest = [(sub(s, anchor), v) for s, v in needle.cells.items()]
    out = set()
    cells = haystack.cells
    for h, hval in cells.items():
        if hval != aval:
            continue
        if all(cells.get(add(h, off)) == v for off, v in rest):
            out.add(sub(h, anchor))
    return frozenset(out)


def proper_subpatterns(w: Pattern) -> frozenset:
    """Restrictions of w to all strict subsets of its shape, canonicalized."""
    sites = sorted(w.cells)
    out = set()
    for r in range(len(sites)):
        for T in itertools.combinations(sites, r):
            out.add(w.restrict(T).canonical())
    return frozenset(out)


def iter_assignments(shape: Iterable[Site], alphabet: Alphabet) -> Iterator[Pattern]:
    """All patterns on the shape in lexicographic order.

    Sites are ordered by coordinate tuple; symbols by declared alphabet
    order; the first site is the most significant position.
    """
    sites = sorted(frozenset(shape))
    for syms in itertools.product(alphabet.symbols, repeat=len(sites)):
        yield Pattern(dict(zip(sites, syms)))


def lex_rank(w: Pattern, shape: Iterable[Site], alphabet: Alphabet) -> int:
    """Rank of w among all assignments on the shape, in lexicographic order."""
    sites = sorted(frozenset(shape))
    if frozenset(sites) != w.shape:
        raise ValueError("pattern shape must equal the ranking universe shape")
    rank = 0
    base = len(alphabet)
    for s in sites:
        rank = rank * base + alphabet.index(w[s])
    return rank


def unrank_pattern(rank: int, shape: Iterable[Site], alphabet: Alphabet) -> Pattern:
    """Inverse of lex_rank on the same universe."""
    sites = sorted(frozenset(shape))
    base = len(alphabet)
    total = base ** len(sites)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range for {len(sites)} sites")
    cells = {}
    for s in reversed(sites):
        rank, digit = divmod(rank, base)
        cells[s] = alphabet.symbols[digit]
    return Pattern(cells)
