"""Bounded checkers for mixing and extension properties of SFT specs.

Every checker returns a PropertyReport.  Refutations carry a concrete
finite witness that replays to failure; positive verdicts are explicitly
"up to bound" unless a syntactic sufficient condition applies, because no
finite search can certify these properties for all shapes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .geometry import Box, add, canonical_shape, cube, diameter, inflate, set_distance, translate
from .patterns import Alphabet, Pattern, iter_assignments
from .sft import (Budget, DEFAULT_BUDGET, SftSpec, enumerate_language,
                  extend_pattern, nn_rules)

VERIFIED = "verified-up-to-bound"
REFUTED = "refuted"
REFUTED_AT_BOUND = "refuted-at-bound"
SUFFICIENT = "sufficient-condition-met"


@dataclass
class PropertyReport:
    """Outcome of one bounded property check."""

    prop: str
    verdict: str
    bounds: dict = field(default_factory=dict)
    witness: object = None
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict in (VERIFIED, SUFFICIENT)


def in_language_bounded(w: Pattern, spec: SftSpec, radius: int,
                        budget: Budget = DEFAULT_BUDGET) -> bool:
    """Radius-bounded membership test: locally admissible and extendable
    to the radius-inflated shape.  Exact only under a matching verified
    extension property; otherwise may accept non-members.
    """
    return extend_pattern(w, spec, inflate(w.shape, radius), budget) is not None


def check_safe_symbol(spec: SftSpec, sym, bound: int, radius: int = 0,
                      budget: Budget = DEFAULT_BUDGET) -> PropertyReport:
    """Two-tier safe-symbol check.

    Tier one is syntactic: if no forbidden pattern mentions the symbol,
    any replacement by it is safe.  Tier two enumerates the language on
    the side-`bound` cube and checks single-site replacement stays inside
    the enumerated language; closure under arbitrary finite replacement
    sets follows by induction, and the infinite case by compactness.
    """
    if sym not in spec.alphabet:
        raise ValueError(f"{sym!r} is not in the alphabet")
    bounds = {"bound": bound, "radius": radius}
    if not any(sym in f.cells.values() for f in spec.forbidden):
        return PropertyReport("safe-symbol", SUFFICIENT, bounds,
                              notes=f"no forbidden pattern mentions {sym!r}")
    lang = enumerate_language(cube(bound, spec.dim), spec, radius, budget)
    known = set(lang)
    for w in lang:
        for site in w.cells:
            if w[site] == sym:
                continue
            cells = dict(w.cells)
            cells[site] = sym
            repl = Pattern(cells)
            if repl not in known:
                return PropertyReport("safe-symbol", REFUTED, bounds,
                                      witness=(w, site, repl))
    return PropertyReport("safe-symbol", VERIFIED, bounds)


def check_ssf(spec: SftSpec) -> PropertyReport:
    """Single-site fillability for nearest-neighbor specs.

    For every assignment of the 2d neighbors of a site, some center symbol
    must create no forbidden adjacency.  Exhaustive over |A|^(2d) tuples.
    """
    rules = nn_rules(spec)
    if rules is None:
        raise ValueError("single-site fillability needs a nearest-neighbor spec "
                         "(all forbidden patterns dominoes)")
    syms = spec.alphabet.symbols
    d = spec.dim
    nsym = len(syms)
    full = (1 << nsym) - 1
    # ok_pos[axis][b] = centers e with (e, b) allowed; ok_neg for (b, e).
    ok_pos = []
    ok_neg = []
    for axis in range(d):
        pos = []
        neg = []
        for b in syms:
            mp = 0
            mn = 0
            for i, e in enumerate(syms):
                if (e, b) not in rules[axis]:
                    mp |= 1 << i
                if (b, e) not in rules[axis]:
                    mn |= 1 << i
            pos.append(mp)
            neg.append(mn)
        ok_pos.append(pos)
        ok_neg.append(neg)
    bounds = {"tuples": nsym ** (2 * d)}
    for combo in itertools.product(range(nsym), repeat=2 * d):
        mask = full
        for axis in range(d):
            mask &= ok_pos[axis][combo[2 * axis]]
            mask &= ok_neg[axis][combo[2 * axis + 1]]
            if not mask:
                break
        if not mask:
            witness = tuple(syms[i] for i in combo)
            return PropertyReport("single-site-fillability", REFUTED, bounds,
                                  witness=witness,
                                  notes="neighbor tuple ordered +e1,-e1,...,+ed,-ed")
    return PropertyReport("single-site-fillability", VERIFIED, bounds)


def involution_sft(d: int, size: int, f: dict) -> SftSpec:
    """Nearest-neighbor spec on {0..size-1} forbidding both orientations of
    every {a, f(a)} adjacency in every coordinate direction.

    f maps the moved symbols (fixed points may be omitted); it must be a
    non-identity involution.  Symbols fixed by f get their constant pair
    forbidden as well.
    """
    if size < 2:
        raise ValueError("need at least two symbols")
    full = {a: f.get(a, a) for a in range(size)}
    if any(not 0 <= b < size for b in full.values()):
        raise ValueError("involution maps outside the alphabet")
    if any(full[full[a]] != a for a in range(size)):
        raise ValueError("map is not an involution")
    if all(full[a] == a for a in range(size)):
        raise ValueError("involution must move at least one symbol")
    alphabet = Alphabet(range(size))
    forbidden = []
    seen = set()
    for a in range(size):
        b = full[a]
        for axis in range(d):
            step = tuple(1 if i == axis else 0 for i in range(d))
            for lo, hi in ((a, b), (b, a)):
                key = (axis, lo, hi)
                if key in seen:
                    continue
                seen.add(key)
                forbidden.append(Pattern({(0,) * d: lo, step: hi}))
    return SftSpec(alphabet, d, forbidden)


def subshapes_of_cube(k: int, d: int, dedup: bool = True) -> list:
    """All subsets of the side-k cube; with dedup, one per translation class."""
    sites = sorted(cube(k, d))
    out = []
    seen = set()
    for r in range(len(sites) + 1):
        for combo in itertools.combinations(sites, r):
            S = frozenset(combo)
            if dedup:
                S = canonical_shape(S)
                if S in seen:
                    continue
                seen.add(S)
            out.append(S)
    return out


def rectangles_up_to(max_side: int, d: int) -> list:
    """All origin-cornered boxes with sides in 1..max_side, as shapes."""
    out = []
    for sides in itertools.product(range(1, max_side + 1), repeat=d):
        out.append(Box.at((0,) * d, sides).shape())
    return out


def first_offenders(spec: SftSpec, diameter_bound: int, radius: int,
                    budget: Budget = DEFAULT_BUDGET) -> list[Pattern]:
    """All patterns up to translation of diameter <= bound failing the
    radius-bounded membership test while every proper subpattern passes.

    A shape of diameter <= D fits in the side-(D+1) cube, so shapes are
    enumerated as arbitrary (connected or not) subsets of that cube.
    Bounded membership is monotone under restriction, so it suffices to
    check the maximal proper subpatterns (one site removed).
    """
    offenders = []
    for S in subshapes_of_cube(diameter_bound + 1, spec.dim):
        if not S or diameter(S) > diameter_bound:
            continue
        for w in iter_assignments(S, spec.alphabet):
            if in_language_bounded(w, spec, radius, budget):
                continue
            if all(in_language_bounded(w.restrict(S - {s}), spec, radius, budget)
                   for s in S):
                offenders.append(w)
    offenders.sort(key=lambda w: sorted(w.cells.items(),
                                        key=lambda kv: (kv[0], spec.alphabet.index(kv[1]))))
    return offenders


def check_g_extension(spec: SftSpec, g: int, shapes, test_radius: int,
                      budget: Budget = DEFAULT_BUDGET) -> PropertyReport:
    """Bounded extension-property check over a finite shape family.

    For every pattern on a family shape that admits a locally admissible
    extension to the g-inflated shape, verify it also extends to the
    test-radius-inflated shape.  A failure is only refuted-at-bound: true
    membership could still hold at a larger test radius.
    """
    shapes = list(shapes)
    bounds = {"g": g, "test_radius": test_radius, "shapes": len(shapes)}
    checked = 0
    for S in shapes:
        target_g = inflate(S, g)
        target_r = inflate(S, test_radius)
        for w in iter_assignments(S, spec.alphabet):
            if extend_pattern(w, spec, target_g, budget) is None:
                continue
            checked += 1
            if extend_pattern(w, spec, target_r, budget) is None:
                bounds["checked"] = checked
                return PropertyReport("g-extension", REFUTED_AT_BOUND, bounds,
                                      witness=w,
                                      notes="extends to the g-inflation but exhausted "
                                            "at the test radius")
    bounds["checked"] = checked
    return PropertyReport("g-extension", VERIFIED, bounds)


def check_block_gluing(spec: SftSpec, g: int, rect_bound: int, window_side: int,
                       radius: int = 0, budget: Budget = DEFAULT_BUDGET) -> PropertyReport:
    """Bounded block-gluing check at gap g.

    For all admissible patterns on rectangles up to the side bound, placed
    at every relative offset with distance > g inside the window, a joint
    locally admissible extension of both on the window must exist.
    """
    d = spec.dim
    window = cube(window_side, d)
    bounds = {"g": g, "rect_bound": rect_bound, "window": window_side,
              "radius": radius}
    rect_shapes = rectangles_up_to(rect_bound, d)
    langs = {S: enumerate_language(S, spec, radius, budget) for S in rect_shapes}
    pairs = 0
    for S1 in rect_shapes:
        b1 = Box.at((0,) * d, tuple(max(s[i] for s in S1) + 1 for i in range(d)))
        for S2 in rect_shapes:
            b2 = Box.at((0,) * d, tuple(max(s[i] for s in S2) + 1 for i in range(d)))
            for delta in itertools.product(range(-window_side, window_side + 1), repeat=d):
                t1 = tuple(max(0, -x) for x in delta)
                t2 = add(t1, delta)
                p1 = b1.translate(t1)
                p2 = b2.translate(t2)
                if any(x >= window_side for x in p1.hi + p2.hi):
                    continue
                if p1.distance(p2) <= g:
                    continue
                for w1 in langs[S1]:
                    for w2 in langs[S2]:
                        pairs += 1
                        joint = Pattern({**w1.translate(t1).cells,
                                         **w2.translate(t2).cells})
                        if extend_pattern(joint, spec, window, budget) is None:
                            bounds["pairs"] = pairs
                            return PropertyReport(
                                "block-gluing", REFUTED, bounds,
                                witness=(w1, t1, w2, t2),
                                notes="no joint locally admissible extension "
                                      "on the window")
    bounds["pairs"] = pairs
    return PropertyReport("block-gluing", VERIFIED, bounds)


def fep_implies_block_gluing(spec: SftSpec, g: int, rect_bound: int = 2,
                             window_side: int | None = None, radius: int = 0,
                             budget: Budget = DEFAULT_BUDGET) -> PropertyReport:
    """Block-gluing rerun at the gap implied by a radius-g extension
    property: twice g plus the max forbidden diameter.
    """
    gap = 2 * g + spec.max_diameter
    if window_side is None:
        window_side = 2 * rect_bound + gap + 2
    report = check_block_gluing(spec, gap, rect_bound, window_side, radius, budget)
    report.prop = "fep-implies-block-gluing"
    report.bounds["derived_gap"] = gap
    return report
