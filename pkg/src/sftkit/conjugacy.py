"""Sliding block codes and conjugacy transport of forbidden lists.

A code's local rule is a finite table over enumerated neighborhoods (not a
function object) so codes are serializable and runs reproduce exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .geometry import add, ball, inflate, inner_boundary, sub
from .patterns import Alphabet, Pattern, find_occurrences, iter_assignments
from .mixing import PropertyReport, REFUTED, VERIFIED
from .sft import Budget, DEFAULT_BUDGET, BudgetExceeded, SftSpec, admissibility_witness, iter_language


class CodeError(ValueError):
    """A code was applied on a neighborhood its rule table does not define."""


@dataclass(frozen=True)
class SlidingBlockCode:
    """Radius-n local rule from source neighborhoods to target symbols.

    The rule maps the neighborhood's symbols, read in sorted site order
    over [-n, n]^d, to one target symbol.  Applying the code on an
    undefined neighborhood raises, never defaults.
    """

    source: Alphabet
    target: Alphabet
    dim: int
    radius: int
    rule: Mapping[tuple, object]

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("code radius must be nonnegative")
        for key, out in self.rule.items():
            if len(key) != len(self.offsets()):
                raise ValueError("rule key arity does not match the radius")
            if any(s not in self.source for s in key):
                raise ValueError("rule key uses a symbol outside the source alphabet")
            if out not in self.target:
                raise ValueError("rule output outside the target alphabet")

    def offsets(self) -> tuple:
        return tuple(sorted(ball(self.radius, self.dim)))

    def local(self, lookup, t):
        key = []
        for off in self.offsets():
            v = lookup(add(t, off))
            if v is None:
                raise CodeError(f"neighborhood of {t} is not fully defined")
            key.append(v)
        try:
            return self.rule[tuple(key)]
        except KeyError:
            raise CodeError(f"rule undefined on neighborhood of {t}") from None

    @classmethod
    def relabel(cls, source: Alphabet, target: Alphabet, mapping: Mapping, dim: int) -> "SlidingBlockCode":
        """Radius-0 symbol-by-symbol recoding."""
        rule = {(s,): mapping[s] for s in source}
        return cls(source, target, dim, 0, rule)

    @classmethod
    def from_function(cls, fn, source: Alphabet, target: Alphabet, dim: int,
                      radius: int, budget: Budget = DEFAULT_BUDGET) -> "SlidingBlockCode":
        """Tabulate fn over every neighborhood pattern on [-radius, radius]^d."""
        shape = ball(radius, dim)
        if len(source) ** len(shape) > budget.max_space:
            raise BudgetExceeded("neighborhood space exceeds budget")
        sites = tuple(sorted(shape))
        rule = {}
        for w in iter_assignments(shape, source):
            rule[tuple(w[s] for s in sites)] = fn(w)
        return cls(source, target, dim, radius, rule)


def apply_code(code: SlidingBlockCode, w: Pattern) -> Pattern:
    """Image of w under the code, on the shape eroded by the radius.

    Sites surviving erosion have their whole neighborhood inside the
    shape, so the rule is total there by construction; full erosion gives
    the empty pattern.
    """
    eroded = w.shape - inner_boundary(w.shape, code.radius)
    return Pattern({t: code.local(w.cells.get, t) for t in eroded})


def transport_forbidden(forbidden, inverse_code: SlidingBlockCode,
                        budget: Budget = DEFAULT_BUDGET) -> list[Pattern]:
    """Forbidden list over the conjugacy's target alphabet.

    For each source forbidden pattern v on shape S, collect every pattern
    w on S + Q_s over the target alphabet whose decoding under the inverse
    code contains v; deduplicated up to translation.  The enumeration is
    |A|^(|S + Q_s|) per source pattern and budget-guarded.
    """
    out = set()
    for v in forbidden:
        T = inflate(v.shape, inverse_code.radius)
        if len(inverse_code.source) ** len(T) > budget.max_space:
            raise BudgetExceeded("transport enumeration exceeds budget")
        for w in iter_assignments(T, inverse_code.source):
            x = apply_code(inverse_code, w)
            if find_occurrences(x, v):
                out.add(w.canonical())
    alpha = inverse_code.source
    return sorted(out, key=lambda p: sorted(
        (s, alpha.index(v)) for s, v in p.cells.items()))


def verify_transport(forbidden_src, transported, code: SlidingBlockCode,
                     inverse_code: SlidingBlockCode, window,
                     budget: Budget = DEFAULT_BUDGET) -> PropertyReport:
    """Bounded two-way consistency check of a transported forbidden list.

    Every transported-admissible pattern on the window must decode (under
    the inverse code) to a source-admissible pattern on the eroded window,
    and every source-admissible pattern must encode to a
    transported-admissible one.  Counts on both sides are reported.
    """
    window = frozenset(window)
    spec_src = SftSpec(code.source, code.dim, forbidden_src)
    spec_tgt = SftSpec(code.target, code.dim, transported)
    bounds = {"window": len(window)}
    n_tgt = 0
    for y in iter_language(window, spec_tgt, 0, budget):
        n_tgt += 1
        x = apply_code(inverse_code, y)
        wit = admissibility_witness(x, spec_src)
        if wit is not None:
            bounds["target_count"] = n_tgt
            return PropertyReport("transport-equivalence", REFUTED, bounds,
                                  witness=(y, wit),
                                  notes="transported-admissible window decoded "
                                        "to a forbidden occurrence")
    n_src = 0
    for x in iter_language(window, spec_src, 0, budget):
        n_src += 1
        y = apply_code(code, x)
        wit = admissibility_witness(y, spec_tgt)
        if wit is not None:
            bounds["source_count"] = n_src
            return PropertyReport("transport-equivalence", REFUTED, bounds,
                                  witness=(x, wit),
                                  notes="admissible window encoded onto a "
                                        "transported forbidden occurrence")
    bounds["target_count"] = n_tgt
    bounds["source_count"] = n_src
    return PropertyReport("transport-equivalence", VERIFIED, bounds)
