"""SFT specifications and the search core.

Local admissibility, backtracking extension search, language enumeration
with an explicit verification radius, pattern counting, entropy estimates,
and fixed points.  Language membership for d >= 2 is undecidable in
general, so every language operation takes a verification radius; results
are exact only when the spec has a verified extension property at that
radius, and otherwise over-approximate the language.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .geometry import Box, Shape, Site, add, cube, inflate, inner_boundary, sub
from .patterns import Alphabet, Pattern, find_occurrences, unrank_pattern


class BudgetExceeded(RuntimeError):
    """A search ran past its configured node or space cap."""


@dataclass(frozen=True)
class Budget:
    """Explicit search caps; exceeding one raises, never silently truncates.

    max_space caps the raw assignment space |A|^|S| of eager enumerations;
    max_nodes caps backtracking assignment steps across one operation.
    """

    max_space: int = 1 << 26
    max_nodes: int = 50_000_000

    def nodes(self) -> "_Nodes":
        return _Nodes(self.max_nodes)


DEFAULT_BUDGET = Budget()


class _Nodes:
    """Mutable node counter threaded through one search."""

    __slots__ = ("left",)

    def __init__(self, cap: int):
        self.left = cap

    def spend(self, n: int = 1):
        self.left -= n
        if self.left < 0:
            raise BudgetExceeded("search node budget exhausted")


class SftSpec:
    """Alphabet, dimension, and a finite list of forbidden finite patterns."""

    __slots__ = ("alphabet", "dim", "forbidden", "max_diameter", "_index")

    def __init__(self, alphabet: Alphabet, dim: int, forbidden=()):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.alphabet = alphabet
        self.dim = dim
        self.forbidden = tuple(forbidden)
        for f in self.forbidden:
            if not f.cells:
                raise ValueError("forbidden patterns must be nonempty")
            if f.dim != dim:
                raise ValueError("forbidden pattern dimension mismatch")
            for v in f.cells.values():
                if v not in alphabet:
                    raise ValueError(f"forbidden pattern uses unknown symbol {v!r}")
        self.max_diameter = max((f.diameter() for f in self.forbidden), default=0)
        self._index = _check_index(self.forbidden)

    def __repr__(self) -> str:
        return (f"SftSpec(|A|={len(self.alphabet)}, dim={self.dim}, "
                f"forbidden={len(self.forbidden)})")


def _check_index(forbidden):
    """Group forbidden patterns by (anchor-relative offsets) for fast checks.

    For each pattern and each anchor site, key = offsets of the pattern's
    sorted sites relative to the anchor, value = the set of symbol tuples
    (in the same order) that realize a forbidden occurrence.
    """
    index: dict[tuple, set] = {}
    for f in forbidden:
        sites = sorted(f.cells)
        syms = tuple(f.cells[s] for s in sites)
        for anchor in sites:
            key = tuple(sub(s, anchor) for s in sites)
            index.setdefault(key, set()).add(syms)
    return tuple(index.items())


def _violated_at(index, lookup, site: Site) -> bool:
    """Does some fully determined forbidden placement cover `site`?

    lookup returns None for sites whose value is unknown; placements
    touching an unknown site are not violations yet.
    """
    for offsets, bad in index:
        vals = []
        for off in offsets:
            v = lookup(add(site, off))
            if v is None:
                break
            vals.append(v)
        else:
            if tuple(vals) in bad:
                return True
    return False


def is_locally_admissible(w: Pattern, spec: SftSpec) -> bool:
    """True iff no forbidden pattern occurs anywhere in w."""
    return admissibility_witness(w, spec) is None


def admissibility_witness(w: Pattern, spec: SftSpec):
    """A (forbidden pattern, translation) occurrence in w, or None."""
    for f in spec.forbidden:
        occ = find_occurrences(w, f)
        if occ:
            return f, min(occ)
    return None


def _iter_fills(free, spec: SftSpec, assign: dict, external, nodes: _Nodes) -> Iterator[dict]:
    """Backtrack over `free` sites in order, symbols in alphabet order.

    `assign` holds already-fixed sites and is extended in place; `external`
    (optional) supplies symbols for sites outside `assign`, returning None
    for unknown sites.  Yields a snapshot of the free-site assignment at
    every completion, in lexicographic order.  Placements lying entirely
    inside the fixed context are never rechecked here.
    """
    index = spec._index
    syms = spec.alphabet.symbols
    n = len(free)
    if external is None:
        lookup = assign.get
    else:
        def lookup(s):
            v = assign.get(s)
            return external(s) if v is None else v

    def rec(i):
        if i == n:
            yield {s: assign[s] for s in free}
            return
        site = free[i]
        for sym in syms:
            nodes.spend()
            assign[site] = sym
            if not _violated_at(index, lookup, site):
                yield from rec(i + 1)
        del assign[site]

    yield from rec(0)


def extend_pattern(w: Pattern, spec: SftSpec, target: Shape,
                   budget: Budget = DEFAULT_BUDGET, _nodes: _Nodes | None = None) -> Pattern | None:
    """Extend w to a locally admissible pattern on target, or None.

    The search fills sites in coordinate order trying symbols in alphabet
    order, so the result is the lexicographically first admissible
    completion.  None means exhaustion (or that w itself was inadmissible).
    """
    target = frozenset(target)
    if not w.shape <= target:
        raise ValueError("extension target must contain the pattern's shape")
    if admissibility_witness(w, spec) is not None:
        return None
    free = sorted(target - w.shape)
    if not free:
        return w
    nodes = _nodes if _nodes is not None else budget.nodes()
    assign = dict(w.cells)
    for sol in _iter_fills(free, spec, assign, None, nodes):
        out = dict(w.cells)
        out.update(sol)
        return Pattern(out)
    return None


def iter_language(shape: Shape, spec: SftSpec, verify_radius: int = 0,
                  budget: Budget = DEFAULT_BUDGET, _nodes: _Nodes | None = None) -> Iterator[Pattern]:
    """Lazily yield, in lexicographic order, the patterns on `shape` that
    are locally admissible and extendable to shape + Q_radius.

    Exactly the language of the given shape when the spec has a verified
    extension property at radius <= verify_radius; an over-approximation
    otherwise.
    """
    shape = frozenset(shape)
    nodes = _nodes if _nodes is not None else budget.nodes()
    sites = sorted(shape)
    target = inflate(shape, verify_radius) if verify_radius > 0 else None
    for sol in _iter_fills(sites, spec, {}, None, nodes):
        w = Pattern(sol)
        if target is not None and extend_pattern(w, spec, target, _nodes=nodes) is None:
            continue
        yield w


def enumerate_language(shape: Shape, spec: SftSpec, verify_radius: int = 0,
                       budget: Budget = DEFAULT_BUDGET) -> list[Pattern]:
    """Materialized iter_language, guarded by the space budget."""
    shape = frozenset(shape)
    if len(spec.alphabet) ** len(shape) > budget.max_space:
        raise BudgetExceeded(f"assignment space for {len(shape)} sites exceeds budget")
    return list(iter_language(shape, spec, verify_radius, budget))


def nn_rules(spec: SftSpec):
    """Per-axis forbidden ordered pairs when every forbidden pattern is a
    domino (two sites differing by 1 in exactly one coordinate); else None.
    """
    rules: dict[int, set] = {i: set() for i in range(spec.dim)}
    for f in spec.forbidden:
        if len(f.cells) != 2:
            return None
        (s1, v1), (s2, v2) = sorted(f.cells.items())
        delta = sub(s2, s1)
        axes = [i for i, x in enumerate(delta) if x != 0]
        if len(axes) != 1 or delta[axes[0]] != 1:
            return None
        rules[axes[0]].add((v1, v2))
    return rules


def _count_box_nn(spec: SftSpec, box: Box) -> int | None:
    """Exact locally-admissible count on a 2-d (or 1-d) box for
    nearest-neighbor specs, by row dynamic programming; None if not applicable.
    """
    rules = nn_rules(spec)
    if rules is None or spec.dim > 2:
        return None
    syms = spec.alphabet.symbols
    if spec.dim == 1:
        w, h = box.sides[0], 1
        hrule = rules[0]
        vrule = set()
    else:
        w, h = box.sides
        hrule, vrule = rules[0], rules[1]

    def rows():
        out = [()]
        for _ in range(w):
            nxt = []
            for r in out:
                for s in syms:
                    if r and (r[-1], s) in hrule:
                        continue
                    nxt.append(r + (s,))
            out = nxt
        return out

    valid = rows()
    counts = {r: 1 for r in valid}
    for _ in range(h - 1):
        nxt = {r: 0 for r in valid}
        for r, c in counts.items():
            if c == 0:
                continue
            for r2 in valid:
                if all((a, b) not in vrule for a, b in zip(r, r2)):
                    nxt[r2] += c
        counts = nxt
    return sum(counts.values())


def count_language(spec: SftSpec, shape: Shape | Box, verify_radius: int = 0,
                   budget: Budget = DEFAULT_BUDGET) -> int:
    """Exact count of the radius-verified language on the shape.

    Uses row DP for radius 0 on boxes over nearest-neighbor specs (where
    the radius-0 count is already the locally admissible count); otherwise
    counts by lazy enumeration under the node budget.
    """
    if isinstance(shape, Box) and verify_radius == 0:
        fast = _count_box_nn(spec, shape)
        if fast is not None:
            return fast
        shape = shape.shape()
    elif isinstance(shape, Box):
        shape = shape.shape()
    return sum(1 for _ in iter_language(shape, spec, verify_radius, budget))


def entropy_estimate(spec: SftSpec, n: int, verify_radius: int = 0,
                     budget: Budget = DEFAULT_BUDGET) -> tuple[int, float]:
    """(exact pattern count on the side-n cube, per-site log of it).

    Natural logarithm.  The per-site value converges to the topological
    entropy as n grows; only the exact count is reported as exact.
    """
    count = count_language(spec, Box.cube(n, spec.dim), verify_radius, budget)
    if count == 0:
        return 0, float("-inf")
    return count, math.log(count) / (n ** spec.dim)


def fixed_point_symbols(spec: SftSpec) -> list:
    """Symbols whose constant configuration avoids every forbidden pattern.

    The constant-a point contains exactly the constant-a patterns, so a
    qualifies iff no forbidden pattern is constantly a.
    """
    out = []
    for a in spec.alphabet:
        if not any(all(v == a for v in f.cells.values()) for f in spec.forbidden):
            out.append(a)
    return out


def forbid(spec: SftSpec, P: Pattern) -> SftSpec:
    """Spec for the subshift of spec additionally avoiding P."""
    if not P.cells:
        raise ValueError("cannot forbid the empty pattern")
    return SftSpec(spec.alphabet, spec.dim, spec.forbidden + (P,))


def full_shift(alphabet: Alphabet, dim: int) -> SftSpec:
    return SftSpec(alphabet, dim, ())


def nth_language_pattern(shape: Shape, spec: SftSpec, verify_radius: int, n: int,
                         budget: Budget = DEFAULT_BUDGET,
                         _nodes: _Nodes | None = None) -> tuple[Pattern, int]:
    """The n-th (1-based) language pattern on the shape in lexicographic
    order, clamped to the last one when fewer than n exist.

    Returns (pattern, index actually used).  Raises ValueError when the
    enumerated language is empty.  Full shifts are unranked directly so
    astronomically large n stay cheap.
    """
    if n < 1:
        raise ValueError("pattern index is 1-based")
    shape = frozenset(shape)
    if not spec.forbidden:
        total = len(spec.alphabet) ** len(shape)
        used = min(n, total)
        return unrank_pattern(used - 1, shape, spec.alphabet), used
    last = None
    count = 0
    for w in iter_language(shape, spec, verify_radius, budget, _nodes=_nodes):
        count += 1
        last = w
        if count == n:
            return w, n
    if last is None:
        raise ValueError("language on the shape is empty at this radius")
    return last, count


def nth_compatible_fill(region, spec: SftSpec, external, n: int,
                        budget: Budget = DEFAULT_BUDGET,
                        _nodes: _Nodes | None = None) -> tuple[dict, int]:
    """The n-th (1-based) assignment of the region sites creating no
    forbidden occurrence against the `external` context, in lexicographic
    order, clamped to the last one when fewer than n exist.

    Returns (assignment dict, index used); raises ValueError when the
    candidate collection is empty.
    """
    if n < 1:
        raise ValueError("candidate index is 1-based")
    sites = sorted(frozenset(region))
    nodes = _nodes if _nodes is not None else budget.nodes()
    if not spec.forbidden:
        total = len(spec.alphabet) ** len(sites)
        used = min(n, total)
        return dict(unrank_pattern(used - 1, sites, spec.alphabet).cells), used
    last = None
    count = 0
    for sol in _iter_fills(sites, spec, {}, external, nodes):
        count += 1
        last = sol
        if count == n:
            return sol, n
    if last is None:
        raise ValueError("no admissible assignment of the region is compatible with its context")
    return last, count
