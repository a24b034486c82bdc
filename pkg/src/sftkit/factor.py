"""Staged construction of factor-map windows.

Markers and surrounding frames locate determined zones in a source window;
each zone carries a mixed-radix code extracted from its surrounded
pattern; the image window is then filled in six alternating stages
(d = 2): a fixed-symbol background, zone contents, a boundary trim,
side rectangles, a second trim, and corner holes.  A synthetic mode
accepts zone layouts directly, since genuine markers satisfying the
counting bound need astronomically large surrounded patterns; real mode
derives zones from detected frames.

Orientation convention: "up" is +e2, "right" is +e1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .geometry import (Box, Shape, Site, add, ball, cube, inner_boundary,
                       sub)
from .patterns import Alphabet, Pattern, concat, find_occurrences, lex_rank
from .mixing import PropertyReport, REFUTED, VERIFIED
from .sft import (Budget, DEFAULT_BUDGET, SftSpec, _violated_at,
                  admissibility_witness, extend_pattern, fixed_point_symbols,
                  iter_language, nth_compatible_fill, nth_language_pattern)

# Stage-4 digit slots by the direction from a rectangle to its zone, and
# stage-6 slots by the diagonal direction from a hole to its zone.
DIR_SIDES = (("up", (0, 1), 2), ("left", (-1, 0), 3),
             ("down", (0, -1), 4), ("right", (1, 0), 5))
DIR_CORNERS = (("up-left", (-1, 1), 6), ("up-right", (1, 1), 7),
               ("down-left", (-1, -1), 8), ("down-right", (1, -1), 9))


class LayoutError(ValueError):
    """A zone layout violates the separation or margin requirements."""


class StageFillError(RuntimeError):
    """A stage found no admissible candidate for a region.

    This indicates the target spec's claimed extension radius is wrong or
    the gap parameter is too small for its forbidden diameters.
    """

    def __init__(self, stage: int, region, note: str):
        super().__init__(f"stage {stage}: {note}")
        self.stage = stage
        self.region = region


@dataclass(frozen=True)
class MarkerParams:
    """Geometry parameters: gap g, marker corner side p, core side q,
    marker side m, surrounded-pattern side k.

    Real mode derives m = 2p + 2g + q and requires p > 5g for d = 2
    (p > (2d+1)g in general); synthetic mode takes m directly and keeps p
    only for the separation gate on non-adjacent zones.
    """

    g: int
    p: int
    k: int
    m: int
    q: int | None = None
    synthetic: bool = True

    def __post_init__(self):
        if self.g < 0 or self.p < 1 or self.k < 1 or self.m < 1:
            raise ValueError("marker parameters out of range")
        if self.g > 0 and self.k + self.m <= 3 * self.g:
            raise ValueError("need k + m > 3g so side rectangles and doubly "
                             "reduced zones are nonempty")

    @classmethod
    def real(cls, g: int, p: int, q: int, k: int, d: int = 2) -> "MarkerParams":
        if p <= (2 * d + 1) * g:
            raise ValueError(f"need p > {(2 * d + 1) * g} for d={d}")
        if q < 1:
            raise ValueError("core side must be positive")
        return cls(g=g, p=p, k=k, m=2 * p + 2 * g + q, q=q, synthetic=False)

    @classmethod
    def for_synthetic(cls, g: int, p: int, k: int, m: int) -> "MarkerParams":
        return cls(g=g, p=p, k=k, m=m, q=None, synthetic=True)

    @property
    def zone_side(self) -> int:
        return self.k + self.g + self.m

    @property
    def frame_side(self) -> int:
        return self.k + 2 * self.g + 2 * self.m

    @property
    def sliding_radius(self) -> int:
        return 6 * (self.k + 3 * self.g + 2 * self.m)


@dataclass
class DeterminedZoneLayout:
    """Zone origins plus per-zone codes inside an output window.

    A zone is origin + the zone-side cube.  codes maps each origin to
    either a ready digit tuple or a canonical surrounded pattern (which
    needs a codec and an enumerated domain to turn into digits).
    """

    dim: int
    params: MarkerParams
    window: Box
    codes: dict
    frames: dict | None = None

    @property
    def zones(self) -> list[Site]:
        return sorted(self.codes)

    def zone_box(self, origin: Site) -> Box:
        return Box.at(origin, self.params.zone_side)

    def translate(self, t: Site) -> "DeterminedZoneLayout":
        frames = None if self.frames is None else {
            add(z, t): add(f, t) for z, f in self.frames.items()}
        return DeterminedZoneLayout(
            self.dim, self.params, self.window.translate(t),
            {add(z, t): c for z, c in self.codes.items()}, frames)


@dataclass
class Island:
    """A maximal component of adjacent zones together with its gap collar."""

    zone_origins: tuple
    sites: frozenset
    intervals: tuple  # per axis: sorted merged (lo, hi) coordinate intervals


def _merge_intervals(pairs) -> tuple:
    pairs = sorted(pairs)
    out = []
    for lo, hi in pairs:
        if out and lo <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def _dist_to_gap(c: int, intervals) -> int:
    """Distance from a coordinate to the complement of the interval union."""
    for lo, hi in intervals:
        if lo <= c <= hi:
            return min(c - lo + 1, hi - c + 1)
    return 0


def compute_islands(layout: DeterminedZoneLayout) -> list[Island]:
    """Partition zones into islands, validating all separation rules.

    Zones must sit inside the window with margin at least (d+1)g + 1;
    pairwise distances must exceed g; distance exactly g+1 means adjacent;
    any other distance at most 2g + p is rejected (the separation gate),
    and islands of distinct components must be more than 5g apart.
    """
    g, p = layout.params.g, layout.params.p
    d = layout.dim
    margin = (d + 1) * g + 1
    zones = layout.zones
    boxes = {z: layout.zone_box(z) for z in zones}
    core = layout.window.inflate(-margin)
    for z in zones:
        if not core.contains_box(boxes[z]):
            raise LayoutError(f"zone {z} closer than {margin} to the window edge")
    adj = {z: [] for z in zones}
    for z1, z2 in itertools.combinations(zones, 2):
        dist = boxes[z1].distance(boxes[z2])
        if dist <= g:
            raise LayoutError(f"zones {z1} and {z2} at distance {dist} <= g")
        if dist == g + 1:
            adj[z1].append(z2)
            adj[z2].append(z1)
        elif dist <= 2 * g + p:
            raise LayoutError(
                f"non-adjacent zones {z1} and {z2} at distance {dist}, "
                f"which is not more than 2g+p = {2 * g + p}")
    if layout.frames is not None:
        _check_frame_overlaps(layout, adj)
    comps = []
    seen = set()
    for z in zones:
        if z in seen:
            continue
        comp = [z]
        seen.add(z)
        queue = [z]
        while queue:
            for nb in adj[queue.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    comp.append(nb)
                    queue.append(nb)
        comps.append(sorted(comp))
    islands = []
    for comp in comps:
        sites = set()
        for z in comp:
            sites.update(boxes[z].inflate(g).sites())
        intervals = tuple(
            _merge_intervals((boxes[z].lo[i], boxes[z].hi[i]) for z in comp)
            for i in range(d))
        islands.append(Island(tuple(comp), frozenset(sites), intervals))
    for i1, i2 in itertools.combinations(range(len(islands)), 2):
        dist = min(boxes[z1].distance(boxes[z2])
                   for z1 in islands[i1].zone_origins
                   for z2 in islands[i2].zone_origins) - 2 * g
        if dist <= 5 * g:
            raise LayoutError(
                f"islands of {islands[i1].zone_origins[0]} and "
                f"{islands[i2].zone_origins[0]} at distance {dist} <= 5g")
    return islands


def _check_frame_overlaps(layout: DeterminedZoneLayout, adj) -> None:
    """Real-mode cross-check: adjacent zones' frames must overlap in one
    marker block or a marker-wide band across the whole frame side."""
    m, f = layout.params.m, layout.params.frame_side
    for z1, nbs in adj.items():
        for z2 in nbs:
            if z1 > z2:
                continue
            f1 = Box.at(layout.frames[z1], f)
            f2 = Box.at(layout.frames[z2], f)
            inter = f1.intersect(f2)
            if inter is None or sorted(inter.sides) not in ([m, m], [m, f]):
                raise LayoutError(
                    f"frames of adjacent zones {z1}, {z2} overlap badly "
                    f"({None if inter is None else inter.sides})")


def stage_region(layout: DeterminedZoneLayout, islands: list[Island], j: int) -> frozenset:
    """The stage-2j region (1 < j <= d+1) for any dimension.

    Sites within jg of a zone of an island such that, for every i < j, at
    least i coordinates are within (j-2+i)g of the island's coordinate-gap
    set, and at least d-j+1 coordinates are more than (2j-2)g from it.
    """
    d = layout.dim
    g = layout.params.g
    if not 2 <= j <= d + 1:
        raise ValueError(f"stage index j={j} out of range for d={d}")
    out = set()
    for isl in islands:
        cand = set()
        for z in isl.zone_origins:
            cand.update(layout.zone_box(z).inflate(j * g).sites())
        for t in cand:
            dists = [_dist_to_gap(t[i], isl.intervals[i]) for i in range(d)]
            if any(sum(1 for x in dists if x <= (j - 2 + i) * g) < i
                   for i in range(1, j)):
                continue
            if sum(1 for x in dists if x > (2 * j - 2) * g) < d - j + 1:
                continue
            out.add(t)
    return frozenset(out)


def _collar(defined: set, undefined: set, g: int, d: int) -> frozenset:
    """Defined sites within distance g of some undefined site."""
    if g == 0 or not undefined:
        return frozenset()
    offs = list(ball(g, d))
    out = set()
    for u in undefined:
        for off in offs:
            t = add(u, off)
            if t in defined:
                out.add(t)
    return frozenset(out)


def _components(sites: frozenset, d: int) -> list[frozenset]:
    """Maximal subsets connected under l-infinity distance 1, sorted by
    minimum site."""
    offs = [o for o in ball(1, d) if any(o)]
    left = set(sites)
    comps = []
    while left:
        seed = min(left)
        comp = {seed}
        left.remove(seed)
        queue = [seed]
        while queue:
            t = queue.pop()
            for off in offs:
                nb = add(t, off)
                if nb in left:
                    left.remove(nb)
                    comp.add(nb)
                    queue.append(nb)
        comps.append(frozenset(comp))
    comps.sort(key=min)
    return comps


@dataclass
class RegionFill:
    """One stage-4 rectangle or stage-6 hole with its zone association."""

    sites: tuple
    zone: Site
    direction: str
    digit: int
    requested: int | None = None
    used: int | None = None
    tie: bool = False


@dataclass
class FillPlan:
    """All layout-derived geometry for a d=2 staged fill, content-free."""

    layout: DeterminedZoneLayout
    islands: list
    u1: frozenset
    s2: frozenset
    trim3: frozenset
    s4: frozenset
    trim5: frozenset
    s6: frozenset
    rects: list
    holes: list
    reduced: dict
    doubly_reduced: dict


def _associate(comp: frozenset, zone_boxes: dict, directions) -> tuple:
    """First direction in the given ordering with an adjacent zone box;
    ties broken toward the lexicographically least zone origin."""
    for name, vec, digit in directions:
        hits = sorted({z for z, box in zone_boxes.items()
                       if any(box.contains(add(t, vec)) for t in comp)})
        if hits:
            return hits[0], name, digit, len(hits) > 1
    raise LayoutError(f"region at {min(comp)} touches no zone in any direction")


def prepare_fill(layout: DeterminedZoneLayout) -> FillPlan:
    """Compute and validate all stage regions and region associations."""
    if layout.dim != 2:
        raise ValueError("the staged fill runs in dimension 2 only")
    g = layout.params.g
    islands = compute_islands(layout)
    window = layout.window.shape()
    zone_boxes = {z: layout.zone_box(z) for z in layout.zones}

    u1 = frozenset(t for t in window
                   if all(b.site_distance(t) > g for b in zone_boxes.values()))
    s2 = frozenset().union(*(b.shape() for b in zone_boxes.values())) if zone_boxes else frozenset()
    # The per-island coordinate-grid form must reproduce the zone union.
    grid = set()
    for isl in islands:
        for t in isl.sites:
            if all(_dist_to_gap(t[i], isl.intervals[i]) > 0 for i in range(2)):
                grid.add(t)
    if frozenset(grid) != s2:
        raise LayoutError("island coordinate grid does not match the zone union")

    defined2 = set(u1) | set(s2)
    undef2 = set(window) - defined2
    trim3 = _collar(defined2, undef2, g, 2)
    u3 = defined2 - trim3

    s4 = stage_region(layout, islands, 2)
    if s4 & u3:
        raise LayoutError("stage-4 region meets the trimmed stage-3 set")
    defined4 = u3 | set(s4)
    undef4 = set(window) - defined4
    trim5 = _collar(defined4, undef4, g, 2)
    u5 = defined4 - trim5
    s6 = frozenset(set(window) - u5)

    reduced = {}
    doubly = {}
    for z, b in zone_boxes.items():
        if min(b.sides) > 2 * g:
            reduced[z] = b.inflate(-g)
        if min(b.sides) > 4 * g:
            doubly[z] = b.inflate(-2 * g)

    rects = []
    for comp in _components(s4, 2):
        zone, name, digit, tie = _associate(comp, reduced, DIR_SIDES)
        lo = (min(t[0] for t in comp), min(t[1] for t in comp))
        hi = (max(t[0] for t in comp), max(t[1] for t in comp))
        if len(comp) != Box(lo, hi).size:
            raise LayoutError(f"stage-4 component at {lo} is not a full rectangle")
        rects.append(RegionFill(tuple(sorted(comp)), zone, name, digit, tie=tie))
    holes = []
    for comp in _components(s6, 2):
        zone, name, digit, tie = _associate(comp, doubly, DIR_CORNERS)
        holes.append(RegionFill(tuple(sorted(comp)), zone, name, digit, tie=tie))

    return FillPlan(layout, islands, frozenset(u1), s2, trim3, frozenset(s4),
                    trim5, s6, rects, holes, reduced, doubly)


@dataclass
class StageTrace:
    """Full record of one staged fill: regions, contents, and selections."""

    params: MarkerParams
    window: Box
    zone_origins: tuple
    star: object
    u1: frozenset
    s2: frozenset
    trim3: frozenset
    s4: frozenset
    trim5: frozenset
    s6: frozenset
    s2_content: dict
    s4_content: dict
    s6_content: dict
    zone_fills: list
    rects: list
    holes: list
    stage_of: dict
    sliding_radius: int
    notes: list = field(default_factory=list)


def resolve_codes(layout: DeterminedZoneLayout, codec=None, domain=None) -> dict:
    """Per-zone digit tuples; pattern codes need a codec and an enumerated
    domain (the surrounded-pattern language in lexicographic order)."""
    out = {}
    for z, code in layout.codes.items():
        if isinstance(code, Pattern):
            if codec is None or domain is None:
                raise ValueError("pattern-coded zones need a codec and a domain")
            out[z] = psi_encode_pattern(code, domain, codec)
        else:
            code = tuple(code)
            if len(code) != 9:
                raise ValueError(f"zone {z}: digit tuple must have 9 entries")
            if any(i < 1 for i in code):
                raise ValueError(f"zone {z}: digits are 1-based")
            out[z] = code
    return out


def run_staged_fill(layout: DeterminedZoneLayout, spec_y: SftSpec, star,
                    codec=None, domain=None,
                    budget: Budget = DEFAULT_BUDGET) -> tuple[Pattern, StageTrace]:
    """Execute the six-stage fill on the layout's window.

    Requires the fixed symbol `star` to be a fixed point of spec_y and the
    layout gap to be at least spec_y's verified extension radius (the
    caller's responsibility; a wrong certificate surfaces as a
    StageFillError).  Sites outside the window count as `star` in all
    forbidden-pattern checks.
    """
    return fill_window(prepare_fill(layout), spec_y, star, codec, domain, budget)


def fill_window(plan: FillPlan, spec_y: SftSpec, star, codec=None, domain=None,
                budget: Budget = DEFAULT_BUDGET) -> tuple[Pattern, StageTrace]:
    layout = plan.layout
    g = layout.params.g
    window = layout.window
    if star not in spec_y.alphabet:
        raise ValueError(f"{star!r} is not in the target alphabet")
    if star not in fixed_point_symbols(spec_y):
        raise ValueError(f"{star!r} is not a fixed point of the target spec")
    digits = resolve_codes(layout, codec, domain)
    nodes = budget.nodes()
    notes: list[str] = []

    assign: dict = {}
    stage_of: dict = {}
    for t in plan.u1:
        assign[t] = star
        stage_of[t] = 1

    s2_content: dict = {}
    zone_fills = []
    for z in layout.zones:
        box = layout.zone_box(z)
        i1 = digits[z][0]
        try:
            w, used = nth_language_pattern(box.shape(), spec_y, g, i1,
                                           budget, _nodes=nodes)
        except ValueError as e:
            raise StageFillError(2, z, str(e)) from None
        zone_fills.append((z, i1, used))
        if used != i1:
            notes.append(f"zone {z}: index {i1} clamped to {used}")
        for t, v in w.cells.items():
            assign[t] = v
            stage_of[t] = 2
            s2_content[t] = v
    for t in plan.trim3:
        del assign[t]

    ctx3 = dict(assign)

    def external3(s):
        v = ctx3.get(s)
        if v is not None:
            return v
        return None if window.contains(s) else star

    s4_content: dict = {}
    rects = []
    for r in plan.rects:
        want = digits[r.zone][r.digit - 1]
        try:
            sol, used = nth_compatible_fill(r.sites, spec_y, external3, want,
                                            budget, _nodes=nodes)
        except ValueError as e:
            raise StageFillError(4, r, str(e)) from None
        if used != want:
            notes.append(f"rectangle at {r.sites[0]}: index {want} clamped to {used}")
        if r.tie:
            notes.append(f"rectangle at {r.sites[0]}: direction {r.direction} "
                         f"tie broken toward zone {r.zone}")
        rects.append(RegionFill(r.sites, r.zone, r.direction, r.digit, want, used, r.tie))
        for t, v in sol.items():
            assign[t] = v
            stage_of[t] = 4
            s4_content[t] = v
    for t in plan.trim5:
        del assign[t]

    ctx5 = dict(assign)

    def external5(s):
        v = ctx5.get(s)
        if v is not None:
            return v
        return None if window.contains(s) else star

    s6_content: dict = {}
    holes = []
    for h in plan.holes:
        want = digits[h.zone][h.digit - 1]
        try:
            sol, used = nth_compatible_fill(h.sites, spec_y, external5, want,
                                            budget, _nodes=nodes)
        except ValueError as e:
            raise StageFillError(6, h, str(e)) from None
        if used != want:
            notes.append(f"hole at {h.sites[0]}: index {want} clamped to {used}")
        if h.tie:
            notes.append(f"hole at {h.sites[0]}: direction {h.direction} "
                         f"tie broken toward zone {h.zone}")
        holes.append(RegionFill(h.sites, h.zone, h.direction, h.digit, want, used, h.tie))
        for t, v in sol.items():
            assign[t] = v
            stage_of[t] = 6
            s6_content[t] = v

    if frozenset(assign) != window.shape():
        raise StageFillError(6, None, "stages did not cover the window exactly")
    trace = StageTrace(layout.params, window, tuple(layout.zones), star,
                       plan.u1, plan.s2, plan.trim3, plan.s4, plan.trim5,
                       plan.s6, s2_content, s4_content, s6_content,
                       zone_fills, rects, holes, stage_of,
                       layout.params.sliding_radius, notes)
    return Pattern(assign), trace


def _background_witness(assign: dict, window: Box, star, spec: SftSpec):
    """First site of a fully determined forbidden occurrence, treating
    sites outside the window as star and undefined window sites as unknown."""

    def lookup(s):
        v = assign.get(s)
        if v is not None:
            return v
        return None if window.contains(s) else star

    for site in sorted(assign):
        if _violated_at(spec._index, lookup, site):
            return site
    return None


def verify_factor_window(output: Pattern, trace: StageTrace, spec_y: SftSpec,
                         layout: DeterminedZoneLayout) -> PropertyReport:
    """Replay every structural assertion of a finished staged fill.

    Checks: forbidden-free partial patterns after stages 2, 4 and 6 with
    the star background; star at every site farther than 3g from all
    zones; the stage-region algebra (trims recomputed from the recorded
    sets, final coverage); pairwise separation of rectangles and of holes;
    hole diameters; and single use of every zone digit.
    """
    g = layout.params.g
    window = layout.window
    bounds = {"window": window.sides, "zones": len(layout.zones), "g": g}

    def refute(witness, note):
        return PropertyReport("factor-window", REFUTED, bounds, witness, note)

    try:
        compute_islands(layout)
    except LayoutError as e:
        return refute(None, f"layout invalid: {e}")
    if trace.star not in fixed_point_symbols(spec_y):
        return refute(trace.star, "the background symbol is not a fixed point")

    zone_boxes = [layout.zone_box(z) for z in layout.zones]
    wshape = window.shape()

    # Region algebra, recomputed from the recorded sets.
    if trace.u1 | trace.s2 != (trace.u1 ^ trace.s2):
        return refute(None, "background and zone regions overlap")
    defined2 = set(trace.u1) | set(trace.s2)
    trim3 = _collar(defined2, set(wshape) - defined2, g, 2)
    if trim3 != trace.trim3:
        return refute(None, "recorded stage-3 trim does not match the boundary")
    u3 = defined2 - trim3
    if set(trace.s4) & u3:
        return refute(None, "stage-4 region meets the stage-3 survivors")
    defined4 = u3 | set(trace.s4)
    trim5 = _collar(defined4, set(wshape) - defined4, g, 2)
    if trim5 != trace.trim5:
        return refute(None, "recorded stage-5 trim does not match the boundary")
    u5 = defined4 - trim5
    if frozenset(set(wshape) - u5) != trace.s6:
        return refute(None, "stage-6 region is not the complement of the survivors")

    # Reconstruct the partial patterns and check them against the output.
    v2 = {t: trace.star for t in trace.u1}
    v2.update(trace.s2_content)
    v4 = {t: v for t, v in v2.items() if t not in trim3}
    v4.update(trace.s4_content)
    v6 = {t: v for t, v in v4.items() if t not in trim5}
    v6.update(trace.s6_content)
    if v6 != output.cells:
        bad = sorted(t for t in set(v6) | set(output.cells)
                     if v6.get(t) != output.cells.get(t))[0]
        return refute(bad, "output disagrees with the reconstructed fill")
    for name, partial in (("stage-2", v2), ("stage-4", v4), ("stage-6", v6)):
        site = _background_witness(partial, window, trace.star, spec_y)
        if site is not None:
            return refute(site, f"forbidden occurrence in the {name} pattern")

    for t in wshape:
        if all(b.site_distance(t) > 3 * g for b in zone_boxes):
            if output[t] != trace.star:
                return refute(t, "non-background symbol far from every zone")

    rect_comps = [frozenset(r.sites) for r in trace.rects]
    for a, b in itertools.combinations(rect_comps, 2):
        dist = min(max(abs(i - j) for i, j in zip(s, t)) for s in a for t in b)
        if dist <= g:
            return refute((min(a), min(b)), "stage-4 rectangles too close")
    hole_comps = [frozenset(h.sites) for h in trace.holes]
    for a, b in itertools.combinations(hole_comps, 2):
        dist = min(max(abs(i - j) for i, j in zip(s, t)) for s in a for t in b)
        if dist <= g:
            return refute((min(a), min(b)), "stage-6 holes too close")
    for h in hole_comps:
        dia = max((max(abs(i - j) for i, j in zip(s, t))
                   for s in h for t in h), default=0)
        if dia > 7 * g:
            return refute(min(h), f"hole diameter {dia} exceeds 7g")

    used = {}
    for r in list(trace.rects) + list(trace.holes):
        key = (r.zone, r.digit)
        if key in used:
            return refute(key, "one zone digit selected content for two regions")
        used[key] = r.sites[0]

    return PropertyReport("factor-window", VERIFIED, bounds,
                          notes=f"sliding radius bound {trace.sliding_radius}")


def staged_regions_general(layout: DeterminedZoneLayout) -> dict:
    """Region-only staged pipeline for any dimension.

    Runs background, zones, and the generic even-stage regions with trims
    in between, asserting at each even stage that the new region is
    disjoint from the surviving set and at the end that the window is
    covered.  Returns all intermediate sets.
    """
    d = layout.dim
    g = layout.params.g
    islands = compute_islands(layout)
    window = set(layout.window.shape())
    zone_boxes = [layout.zone_box(z) for z in layout.zones]
    out = {}
    u = {t for t in window if all(b.site_distance(t) > g for b in zone_boxes)}
    out["u1"] = frozenset(u)
    defined = set(u)
    for j in range(1, d + 2):
        if j == 1:
            s = set()
            for b in zone_boxes:
                s.update(b.shape())
        else:
            s = set(stage_region(layout, islands, j))
        if s & defined:
            raise LayoutError(f"stage-{2 * j} region meets the surviving set")
        out[f"s{2 * j}"] = frozenset(s)
        defined |= s
        if j <= d:
            trim = _collar(defined, window - defined, g, d)
            out[f"trim{2 * j + 1}"] = trim
            defined -= trim
        out[f"v{2 * j}"] = frozenset(defined)
    if defined != window:
        missing = sorted(window - defined)[:5]
        raise LayoutError(f"staged regions do not cover the window; first gaps {missing}")
    return out


# --- surjection codec ------------------------------------------------------

@dataclass(frozen=True)
class PsiCodec:
    """Digit ranges of the zone surjection plus the domain size.

    For d = 2 the nine ranges are: the zone-content language size, four
    side-rectangle candidate bounds |A|^(3g(k-3g+m)), and four corner-hole
    candidate bounds |A|^(49g^2).  Injected smaller ranges are allowed for
    testing; the surjectivity flag requires the domain to cover the full
    digit space.
    """

    ranges: tuple
    domain_size: int

    def __post_init__(self):
        if any(r < 1 for r in self.ranges):
            raise ValueError("digit ranges must be positive")
        if self.domain_size < 0:
            raise ValueError("domain size must be nonnegative")

    @property
    def space(self) -> int:
        n = 1
        for r in self.ranges:
            n *= r
        return n

    @property
    def surjective(self) -> bool:
        return self.domain_size >= self.space

    @classmethod
    def for_d2(cls, params: MarkerParams, alphabet_size: int,
               zone_language_size: int, domain_size: int) -> "PsiCodec":
        g, k, m = params.g, params.k, params.m
        side = alphabet_size ** (3 * g * (k - 3 * g + m))
        corner = alphabet_size ** (49 * g * g)
        return cls((zone_language_size,) + (side,) * 4 + (corner,) * 4,
                   domain_size)


def psi_encode(rank: int, codec: PsiCodec) -> tuple:
    """Mixed-radix digits of the rank, 1-based, most significant first.

    Ranks at or beyond the digit space clamp to the all-maximal tuple (the
    n-th element of a short ordered collection is its maximal element).
    """
    if rank < 0:
        raise ValueError("rank must be nonnegative")
    rank = min(rank, codec.space - 1)
    digits = []
    for r in reversed(codec.ranges):
        rank, d = divmod(rank, r)
        digits.append(d + 1)
    return tuple(reversed(digits))


def psi_decode(digits, codec: PsiCodec) -> int:
    """Rank of a digit tuple; two-sided inverse of psi_encode off the clamp."""
    if len(digits) != len(codec.ranges):
        raise ValueError("digit arity mismatch")
    rank = 0
    for d, r in zip(digits, codec.ranges):
        if not 1 <= d <= r:
            raise ValueError(f"digit {d} outside 1..{r}")
        rank = rank * r + (d - 1)
    return rank


def psi_encode_pattern(w: Pattern, domain: list, codec: PsiCodec) -> tuple:
    """Digits of a surrounded pattern via its index in the enumerated domain."""
    try:
        rank = domain.index(w.canonical())
    except ValueError:
        raise ValueError("surrounded pattern is outside the enumerated domain") from None
    return psi_encode(rank, codec)


# --- markers and frames ----------------------------------------------------

def build_marker(P: Pattern, Q: Pattern, edges, params: MarkerParams,
                 spec_x: SftSpec, spec_xp: SftSpec, radius: int = 1,
                 budget: Budget = DEFAULT_BUDGET) -> Pattern:
    """Assemble the marker: P at the four corners, Q centered at
    (p+g, p+g), caller-positioned edge patterns, remaining gaps filled by
    extension search.

    P must pass the bounded membership test for spec_x, and Q and the
    edge patterns for spec_xp (the restriction avoiding P).  d = 2 only.
    """
    g, p, m = params.g, params.p, params.m
    if params.q is None:
        raise ValueError("marker assembly needs real-mode parameters")
    q = params.q
    if P.shape != cube(p, 2):
        raise ValueError("corner pattern must sit on the side-p cube at the origin")
    if Q.shape != cube(q, 2):
        raise ValueError("core pattern must sit on the side-q cube at the origin")
    if extend_pattern(P, spec_x, frozenset(Box.cube(p, 2).inflate(radius).sites()), budget) is None:
        raise ValueError("corner pattern fails the bounded membership test")
    for w, spec, what in [(Q, spec_xp, "core")] + [(e, spec_xp, "edge") for e in edges]:
        target = frozenset(Box(
            tuple(min(s[i] for s in w.cells) for i in range(2)),
            tuple(max(s[i] for s in w.cells) for i in range(2))).inflate(radius).sites()) if w.cells else w.shape
        if w.cells and extend_pattern(w, spec, target, budget) is None:
            raise ValueError(f"{what} pattern fails the bounded membership test")
    corners = [(0, 0), (m - p, 0), (0, m - p), (m - p, m - p)]
    pieces = [P.translate(c) for c in corners]
    pieces.append(Q.translate((p + g, p + g)))
    pieces.extend(edges)
    base = concat(*pieces)
    box = Box.cube(m, 2)
    if not all(box.contains(s) for s in base.cells):
        raise ValueError("marker pieces stick out of the side-m cube")
    M = extend_pattern(base, spec_x, box.shape(), budget)
    if M is None:
        raise ValueError("marker gap fill exhausted; no admissible completion")
    return M


def check_marker_non_overlap(Q: Pattern, g: int, p: int) -> PropertyReport:
    """Check Q cannot overlap itself at any nonzero shift within g+p.

    Requires the side to exceed g+p so every tested shift actually
    overlaps.  Refutation carries the first shift along which both copies
    agree on their whole overlap.
    """
    box = Box(tuple(min(s[i] for s in Q.cells) for i in range(2)),
              tuple(max(s[i] for s in Q.cells) for i in range(2)))
    if len(Q.cells) != box.size:
        raise ValueError("core pattern must fill a full box")
    side = min(box.sides)
    if side <= g + p:
        raise ValueError(f"need the core side {side} > g+p = {g + p}")
    bounds = {"g": g, "p": p, "side": side}
    shape = Q.shape
    for t in sorted(ball(g + p, 2)):
        if not any(t):
            continue
        overlap = shape & frozenset(add(s, t) for s in shape)
        if all(Q[s] == Q[sub(s, t)] for s in overlap):
            return PropertyReport("marker-non-overlap", REFUTED, bounds, witness=t)
    return PropertyReport("marker-non-overlap", VERIFIED, bounds)


def detect_frames(window: Pattern, M: Pattern, params: MarkerParams,
                  spec_xp: SftSpec, radius: int = 1,
                  budget: Budget = DEFAULT_BUDGET) -> DeterminedZoneLayout:
    """Scan a fully assigned rectangular window for surrounding frames.

    A frame at t has the marker at its four corners, edge bands passing
    the bounded membership test for the restricted spec, and an admissible
    central surrounded pattern.  Emits one zone per frame, keyed by the
    zone origin t + (g+m, g+m), coded by its canonical surrounded pattern.
    The output window is the scanned window inflated by the fill margin.
    """
    g, k, m = params.g, params.k, params.m
    f = params.frame_side
    box = Box(tuple(min(s[i] for s in window.cells) for i in range(2)),
              tuple(max(s[i] for s in window.cells) for i in range(2)))
    if len(window.cells) != box.size:
        raise ValueError("frame detection needs a fully assigned box window")
    cells = window.cells
    msites = sorted(M.cells)
    corner_offs = [(0, 0), (f - m, 0), (0, f - m), (f - m, f - m)]
    band_boxes = [Box((m, 0), (f - m - 1, m - 1)),
                  Box((0, m), (m - 1, f - m - 1)),
                  Box((m, f - m), (f - m - 1, f - 1)),
                  Box((f - m, m), (f - 1, f - m - 1))]
    codes = {}
    frames = {}
    if all(h - l + 1 >= f for l, h in zip(box.lo, box.hi)):
        positions = Box(box.lo, sub(box.hi, (f - 1, f - 1))).sites()
    else:
        positions = ()
    for t in positions:
        ok = True
        for c in corner_offs:
            base = add(t, c)
            if any(cells[add(base, s)] != M[s] for s in msites):
                ok = False
                break
        if not ok:
            continue
        for bb in band_boxes:
            band = Pattern({add(t, s): cells[add(t, s)] for s in bb.sites()})
            tgt = frozenset(bb.translate(t).inflate(radius).sites())
            if extend_pattern(band, spec_xp, tgt, budget) is None:
                ok = False
                break
        if not ok:
            continue
        wlo = add(t, (g + m, g + m))
        W = Pattern({add(wlo, s): cells[add(wlo, s)] for s in cube(k, 2)})
        if extend_pattern(W, spec_xp,
                          frozenset(Box.at(wlo, k).inflate(radius).sites()),
                          budget) is None:
            continue
        codes[wlo] = W.canonical()
        frames[wlo] = t
    margin = 3 * g + 1
    return DeterminedZoneLayout(2, params, box.inflate(margin), codes, frames)


# --- surjectivity harness --------------------------------------------------

@dataclass
class HarnessResult:
    achieved: bool
    digits: tuple
    rank: int
    block: Box
    output: Pattern


class SurjectivityHarness:
    """Drive targets through a lattice of adjacent zones.

    Builds a 2x2 grid of zones at adjacency distance, inverts the digit
    map for each requested target block, runs the fill, and checks the
    target appears verbatim in the designated zone-interior block.
    """

    def __init__(self, spec_y: SftSpec, codec: PsiCodec, params: MarkerParams,
                 star, budget: Budget = DEFAULT_BUDGET):
        if not codec.surjective:
            raise ValueError("codec is not surjective: the domain does not "
                             "cover the digit space")
        self.spec_y = spec_y
        self.codec = codec
        self.params = params
        self.star = star
        self.budget = budget
        L = params.zone_side
        step = L + params.g
        origins = [(0, 0), (step, 0), (0, step), (step, step)]
        bound = Box((0, 0), (step + L - 1, step + L - 1))
        margin = 3 * params.g + 1
        ones = (1,) * 9
        self.layout = DeterminedZoneLayout(
            2, params, bound.inflate(margin), {o: ones for o in origins})
        self.plan = prepare_fill(self.layout)
        self.home = (0, 0)

    def block_box(self, side: int) -> Box:
        L = self.params.zone_side
        off = (L - side) // 2
        return Box.at(add(self.home, (off, off)), side)

    def attempt(self, target: Pattern) -> HarnessResult:
        """Choose digits realizing the target on the designated block."""
        block = self.block_box(max(
            max(s[i] for s in target.cells) + 1 for i in range(2)))
        inner = self.plan.doubly_reduced[self.home]
        if not inner.contains_box(block):
            raise ValueError("target block does not fit the doubly reduced zone")
        placed = target.canonical().translate(block.lo)
        zone_shape = self.layout.zone_box(self.home).shape()
        i1 = self._first_index_with(zone_shape, placed)
        if i1 is None or i1 > self.codec.ranges[0]:
            digits = (self.codec.ranges[0],) + (1,) * 8
            out, _ = fill_window(self.plan, self.spec_y, self.star,
                                 budget=self.budget)
            return HarnessResult(False, digits, -1, block, out)
        digits = (i1,) + (1,) * 8
        codes = dict(self.layout.codes)
        codes[self.home] = digits
        layout = DeterminedZoneLayout(2, self.params, self.layout.window,
                                      codes, None)
        plan = FillPlan(layout, self.plan.islands, self.plan.u1, self.plan.s2,
                        self.plan.trim3, self.plan.s4, self.plan.trim5,
                        self.plan.s6, self.plan.rects, self.plan.holes,
                        self.plan.reduced, self.plan.doubly_reduced)
        out, _ = fill_window(plan, self.spec_y, self.star, budget=self.budget)
        achieved = all(out[s] == placed[s] for s in placed.cells)
        return HarnessResult(achieved, digits, i1 - 1, block, out)

    def _first_index_with(self, zone_shape, placed: Pattern) -> int | None:
        """1-based index of the first zone-language pattern agreeing with
        the placed block; closed-form for full shifts."""
        spec = self.spec_y
        if not spec.forbidden:
            cells = {s: spec.alphabet.symbols[0] for s in zone_shape}
            cells.update(placed.cells)
            return lex_rank(Pattern(cells), zone_shape, spec.alphabet) + 1
        for i, w in enumerate(iter_language(zone_shape, spec, self.params.g,
                                            self.budget)):
            if all(w[s] == v for s, v in placed.cells.items()):
                return i + 1
        return None


def surjectivity_harness(spec_y: SftSpec, codec: PsiCodec, target: Pattern,
                         params: MarkerParams, star,
                         budget: Budget = DEFAULT_BUDGET) -> HarnessResult:
    """One-shot harness run for a single target block."""
    return SurjectivityHarness(spec_y, codec, params, star, budget).attempt(target)
