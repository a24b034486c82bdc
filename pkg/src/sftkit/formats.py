"""Text file formats: spec files, code tables, layouts, codecs, pattern
files, reports, stage traces, and stage-snapshot rasters.

All formats are line-oriented UTF-8, whitespace-tokenized, versioned with
a leading "# format v1" comment; `#` starts a comment line.  Symbols in
files are bare tokens, so file-backed alphabets are alphabets of strings.
"""

from __future__ import annotations

import json
import os

from .geometry import Box
from .patterns import Alphabet, Pattern
from .sft import SftSpec
from .conjugacy import SlidingBlockCode
from .factor import (DeterminedZoneLayout, MarkerParams, PsiCodec, RegionFill,
                     StageTrace)
from .mixing import PropertyReport

FORMAT_LINE = "# format v1"

# Snapshot gray levels by stage event.
STAGE_LEVELS = {
    "u1": 230,
    "s2": 120,
    "trim3": 200,
    "s4": 160,
    "trim5": 190,
    "s6": 60,
}
UNASSIGNED_LEVEL = 255


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


def _tokens(text: str):
    """(line number, token list) for each nonblank noncomment line."""
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield i, line.split()


def _ints(toks, n, lineno, what):
    if len(toks) != n:
        raise FormatError(f"{what}: expected {n} fields, got {len(toks)}", lineno)
    try:
        return [int(t) for t in toks]
    except ValueError:
        raise FormatError(f"{what}: fields must be integers", lineno) from None


# --- SFT spec files ---------------------------------------------------------

def parse_sft_spec(text: str) -> SftSpec:
    dim = None
    alphabet = None
    forbidden = []
    cells = None
    open_line = 0
    for lineno, toks in _tokens(text):
        head = toks[0]
        if cells is not None:
            if head == "end" and len(toks) == 1:
                if len(cells) == 0:
                    raise FormatError("empty pattern block", lineno)
                forbidden.append(Pattern(cells))
                cells = None
                continue
            if alphabet is None or dim is None:
                raise FormatError("pattern block before dim/alphabet", lineno)
            if len(toks) != dim + 1:
                raise FormatError(f"pattern line needs {dim} coordinates and a symbol", lineno)
            site = tuple(_ints(toks[:-1], dim, lineno, "pattern site"))
            sym = toks[-1]
            if sym not in alphabet:
                raise FormatError(f"undeclared symbol {sym!r}", lineno)
            if site in cells:
                raise FormatError(f"duplicate site {site} in pattern", lineno)
            cells[site] = sym
            continue
        if head == "dim":
            (dim,) = _ints(toks[1:], 1, lineno, "dim")
        elif head == "alphabet":
            if len(toks) < 2:
                raise FormatError("alphabet needs at least one symbol", lineno)
            try:
                alphabet = Alphabet(toks[1:])
            except ValueError as e:
                raise FormatError(str(e), lineno) from None
        elif head == "pattern":
            cells = {}
            open_line = lineno
        else:
            raise FormatError(f"unexpected directive {head!r}", lineno)
    if cells is not None:
        raise FormatError("pattern block not closed with 'end'", open_line)
    if dim is None or alphabet is None:
        raise FormatError("spec file needs 'dim' and 'alphabet' headers")
    return SftSpec(alphabet, dim, forbidden)


def print_sft_spec(spec: SftSpec) -> str:
    out = [FORMAT_LINE, f"dim {spec.dim}",
           "alphabet " + " ".join(str(s) for s in spec.alphabet)]
    for f in spec.forbidden:
        out.append("pattern")
        for site in sorted(f.cells):
            out.append(" ".join(str(c) for c in site) + f" {f[site]}")
        out.append("end")
    return "\n".join(out) + "\n"


# --- code tables ------------------------------------------------------------

def parse_code(text: str) -> SlidingBlockCode:
    radius = dim = None
    source = target = None
    rule = {}
    arity = None
    for lineno, toks in _tokens(text):
        head = toks[0]
        if head == "code":
            if len(toks) != 2 or not toks[1].startswith("n="):
                raise FormatError("expected 'code n=<radius>'", lineno)
            radius = int(toks[1][2:])
        elif head == "dim":
            (dim,) = _ints(toks[1:], 1, lineno, "dim")
        elif head == "source":
            source = Alphabet(toks[1:])
        elif head == "target":
            target = Alphabet(toks[1:])
        elif "->" in toks:
            if None in (radius, dim, source, target):
                raise FormatError("rule line before the code headers", lineno)
            if arity is None:
                arity = (2 * radius + 1) ** dim
            sep = toks.index("->")
            key, out = toks[:sep], toks[sep + 1:]
            if len(key) != arity or len(out) != 1:
                raise FormatError(f"rule line needs {arity} symbols, '->', one symbol", lineno)
            rule[tuple(key)] = out[0]
        else:
            raise FormatError(f"unexpected directive {head!r}", lineno)
    if None in (radius, dim, source, target):
        raise FormatError("code file is missing headers")
    return SlidingBlockCode(source, target, dim, radius, rule)


def print_code(code: SlidingBlockCode) -> str:
    out = [FORMAT_LINE, f"code n={code.radius}", f"dim {code.dim}",
           "source " + " ".join(str(s) for s in code.source),
           "target " + " ".join(str(s) for s in code.target)]
    for key in sorted(code.rule, key=lambda k: tuple(code.source.index(s) for s in k)):
        out.append(" ".join(str(s) for s in key) + f" -> {code.rule[key]}")
    return "\n".join(out) + "\n"


# --- layouts ----------------------------------------------------------------

def parse_layout(text: str) -> DeterminedZoneLayout:
    fields = {}
    window = None
    zones = {}
    dim = 2
    for lineno, toks in _tokens(text):
        head = toks[0]
        if head == "layout":
            continue
        if head in ("g", "p", "k", "m", "q", "dim"):
            (val,) = _ints(toks[1:], 1, lineno, head)
            if head == "dim":
                dim = val
            else:
                fields[head] = val
        elif head == "window":
            x, y, w, h = _ints(toks[1:], 4, lineno, "window")
            window = Box.at((x, y), (w, h))
        elif head == "zone":
            vals = _ints(toks[1:], dim + 3 ** dim, lineno, "zone")
            origin = tuple(vals[:dim])
            if origin in zones:
                raise FormatError(f"duplicate zone {origin}", lineno)
            zones[origin] = tuple(vals[dim:])
        else:
            raise FormatError(f"unexpected directive {head!r}", lineno)
    for need in ("g", "p", "k", "m"):
        if need not in fields:
            raise FormatError(f"layout file is missing '{need}'")
    if window is None:
        raise FormatError("layout file is missing 'window'")
    params = MarkerParams(g=fields["g"], p=fields["p"], k=fields["k"],
                          m=fields["m"], q=fields.get("q"),
                          synthetic="q" not in fields)
    return DeterminedZoneLayout(dim, params, window, zones)


def print_layout(layout: DeterminedZoneLayout) -> str:
    p = layout.params
    out = [FORMAT_LINE, "layout", f"dim {layout.dim}", f"g {p.g}", f"p {p.p}",
           f"k {p.k}", f"m {p.m}"]
    if p.q is not None:
        out.append(f"q {p.q}")
    w = layout.window
    out.append(f"window {w.lo[0]} {w.lo[1]} {w.sides[0]} {w.sides[1]}")
    for z in layout.zones:
        code = layout.codes[z]
        if isinstance(code, Pattern):
            raise FormatError("pattern-coded zones are not serializable; "
                              "resolve them to digit tuples first")
        out.append("zone " + " ".join(str(c) for c in z) + " " +
                   " ".join(str(i) for i in code))
    return "\n".join(out) + "\n"


# --- codecs -----------------------------------------------------------------

def parse_codec(text: str) -> PsiCodec:
    domain = None
    ranges = None
    for lineno, toks in _tokens(text):
        head = toks[0]
        if head == "codec":
            continue
        if head == "domain":
            (domain,) = _ints(toks[1:], 1, lineno, "domain")
        elif head == "ranges":
            ranges = tuple(int(t) for t in toks[1:])
        else:
            raise FormatError(f"unexpected directive {head!r}", lineno)
    if domain is None or ranges is None:
        raise FormatError("codec file needs 'domain' and 'ranges'")
    return PsiCodec(ranges, domain)


def print_codec(codec: PsiCodec) -> str:
    return "\n".join([FORMAT_LINE, "codec", f"domain {codec.domain_size}",
                      "ranges " + " ".join(str(r) for r in codec.ranges)]) + "\n"


# --- pattern files ----------------------------------------------------------

def parse_pattern_file(text: str):
    """Returns (pattern, alphabet, dim) from a one-block pattern file."""
    dim = None
    alphabet = None
    cells = None
    done = None
    for lineno, toks in _tokens(text):
        head = toks[0]
        if cells is not None:
            if head == "end" and len(toks) == 1:
                done = Pattern(cells)
                cells = None
                continue
            site = tuple(_ints(toks[:-1], dim, lineno, "pattern site"))
            sym = toks[-1]
            if sym not in alphabet:
                raise FormatError(f"undeclared symbol {sym!r}", lineno)
            if site in cells:
                raise FormatError(f"duplicate site {site}", lineno)
            cells[site] = sym
            continue
        if head == "dim":
            (dim,) = _ints(toks[1:], 1, lineno, "dim")
        elif head == "alphabet":
            alphabet = Alphabet(toks[1:])
        elif head == "pattern":
            if dim is None or alphabet is None:
                raise FormatError("pattern block before dim/alphabet", lineno)
            if done is not None:
                raise FormatError("pattern file holds exactly one block", lineno)
            cells = {}
        else:
            raise FormatError(f"unexpected directive {head!r}", lineno)
    if done is None:
        raise FormatError("pattern file has no closed pattern block")
    return done, alphabet, dim


def print_pattern_file(pattern: Pattern, alphabet: Alphabet, dim: int) -> str:
    out = [FORMAT_LINE, f"dim {dim}",
           "alphabet " + " ".join(str(s) for s in alphabet), "pattern"]
    for site in sorted(pattern.cells):
        out.append(" ".join(str(c) for c in site) + f" {pattern[site]}")
    out.append("end")
    return "\n".join(out) + "\n"


# --- reports ----------------------------------------------------------------

def _render_witness(obj, indent="  "):
    if isinstance(obj, Pattern):
        lines = [indent + " ".join(str(c) for c in site) + f" {obj[site]}"
                 for site in sorted(obj.cells)]
        return [indent + "pattern"] + lines + [indent + "end"]
    if isinstance(obj, tuple):
        lines = []
        for part in obj:
            lines.extend(_render_witness(part, indent))
        return lines
    return [indent + repr(obj)]


def print_report(report: PropertyReport) -> str:
    out = [FORMAT_LINE, f"property: {report.prop}", f"verdict: {report.verdict}"]
    if report.bounds:
        out.append("bounds: " + " ".join(f"{k}={v}" for k, v in report.bounds.items()))
    if report.notes:
        out.append(f"notes: {report.notes}")
    if report.witness is not None:
        out.append("witness:")
        out.extend(_render_witness(report.witness))
    return "\n".join(out) + "\n"


# --- stage traces -----------------------------------------------------------

def _sites_list(sites):
    return [list(s) for s in sorted(sites)]


def _content_list(content):
    return [[list(s), v] for s, v in sorted(content.items())]


def _fill_dict(r: RegionFill):
    return {"sites": _sites_list(r.sites), "zone": list(r.zone),
            "direction": r.direction, "digit": r.digit,
            "requested": r.requested, "used": r.used, "tie": r.tie}


def trace_to_json(trace: StageTrace) -> str:
    p = trace.params
    doc = {
        "format": "v1",
        "params": {"g": p.g, "p": p.p, "k": p.k, "m": p.m, "q": p.q,
                   "synthetic": p.synthetic},
        "window": {"lo": list(trace.window.lo), "hi": list(trace.window.hi)},
        "zones": _sites_list(trace.zone_origins),
        "star": trace.star,
        "regions": {name: _sites_list(getattr(trace, name))
                    for name in STAGE_LEVELS},
        "s2_content": _content_list(trace.s2_content),
        "s4_content": _content_list(trace.s4_content),
        "s6_content": _content_list(trace.s6_content),
        "zone_fills": [[list(z), i, used] for z, i, used in trace.zone_fills],
        "rects": [_fill_dict(r) for r in trace.rects],
        "holes": [_fill_dict(h) for h in trace.holes],
        "stage_of": [[list(s), st] for s, st in sorted(trace.stage_of.items())],
        "sliding_radius": trace.sliding_radius,
        "notes": list(trace.notes),
    }
    return json.dumps(doc, indent=1)


def trace_from_json(text: str) -> StageTrace:
    doc = json.loads(text)
    p = doc["params"]
    params = MarkerParams(g=p["g"], p=p["p"], k=p["k"], m=p["m"], q=p["q"],
                          synthetic=p["synthetic"])
    window = Box(tuple(doc["window"]["lo"]), tuple(doc["window"]["hi"]))

    def sites(lst):
        return frozenset(tuple(s) for s in lst)

    def content(lst):
        return {tuple(s): v for s, v in lst}

    def fills(lst):
        return [RegionFill(tuple(tuple(s) for s in d["sites"]),
                           tuple(d["zone"]), d["direction"], d["digit"],
                           d["requested"], d["used"], d["tie"]) for d in lst]

    regions = {name: sites(doc["regions"][name]) for name in STAGE_LEVELS}
    return StageTrace(
        params, window, tuple(tuple(z) for z in doc["zones"]), doc["star"],
        regions["u1"], regions["s2"], regions["trim3"], regions["s4"],
        regions["trim5"], regions["s6"],
        content(doc["s2_content"]), content(doc["s4_content"]),
        content(doc["s6_content"]),
        [(tuple(z), i, used) for z, i, used in doc["zone_fills"]],
        fills(doc["rects"]), fills(doc["holes"]),
        {tuple(s): st for s, st in doc["stage_of"]},
        doc["sliding_radius"], list(doc["notes"]))


def layout_from_trace(trace: StageTrace) -> DeterminedZoneLayout:
    """Rebuild the synthetic layout a trace was produced from, using the
    recorded zone selections as digit tuples (digit 1 where unused)."""
    codes = {}
    by_zone = {z: [1] * 9 for z in trace.zone_origins}
    for z, i1, _used in trace.zone_fills:
        by_zone[z][0] = i1
    for r in list(trace.rects) + list(trace.holes):
        if r.requested is not None:
            by_zone[r.zone][r.digit - 1] = r.requested
    for z, digits in by_zone.items():
        codes[z] = tuple(digits)
    return DeterminedZoneLayout(2, trace.params, trace.window, codes)


# --- stage snapshots --------------------------------------------------------

def render_stage_pgm(trace: StageTrace, stage: int) -> str:
    """Plain (P2) raster of the window after the given stage.

    Cumulative: each site shows the gray level of the last event touching
    it so far; untouched sites are white (255).  Raster rows run from the
    top (largest second coordinate) down.
    """
    if not 1 <= stage <= 6:
        raise ValueError("stage must be 1..6")
    events = [("u1", trace.u1), ("s2", trace.s2), ("trim3", trace.trim3),
              ("s4", trace.s4), ("trim5", trace.trim5), ("s6", trace.s6)]
    level = {}
    for name, sites in events[:stage]:
        for t in sites:
            level[t] = STAGE_LEVELS[name]
    w = trace.window
    width, height = w.sides
    rows = []
    for y in range(w.hi[1], w.lo[1] - 1, -1):
        rows.append(" ".join(str(level.get((x, y), UNASSIGNED_LEVEL))
                             for x in range(w.lo[0], w.hi[0] + 1)))
    return "\n".join(["P2", FORMAT_LINE, f"{width} {height}", "255"] + rows) + "\n"


LEGEND = "\n".join([
    FORMAT_LINE,
    "230 stage-1 fixed-symbol background",
    "120 stage-2 zone contents",
    "200 stage-3 trim",
    "160 stage-4 rectangles",
    "190 stage-5 trim",
    "60 stage-6 holes",
    "255 unassigned",
]) + "\n"


def write_snapshots(trace: StageTrace, dirpath: str) -> list[str]:
    """Six stage rasters plus a legend sidecar; returns the paths written."""
    os.makedirs(dirpath, exist_ok=True)
    paths = []
    for stage in range(1, 7):
        path = os.path.join(dirpath, f"stage{stage}.pgm")
        with open(path, "w") as fh:
            fh.write(render_stage_pgm(trace, stage))
        paths.append(path)
    legend = os.path.join(dirpath, "legend.txt")
    with open(legend, "w") as fh:
        fh.write(LEGEND)
    paths.append(legend)
    return paths
