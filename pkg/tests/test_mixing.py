import itertools

import pytest

from sftkit.geometry import cube
from sftkit.patterns import Alphabet, Pattern
from sftkit.mixing import (REFUTED, REFUTED_AT_BOUND, SUFFICIENT, VERIFIED,
                           check_block_gluing, check_g_extension,
                           check_safe_symbol, check_ssf,
                           fep_implies_block_gluing, first_offenders,
                           in_language_bounded, involution_sft,
                           subshapes_of_cube)
from sftkit.sft import SftSpec, enumerate_language, full_shift, is_locally_admissible


def test_safe_symbol_tiers(hard_square, binary):
    assert check_safe_symbol(hard_square, "0", 3).verdict == SUFFICIENT
    rep = check_safe_symbol(hard_square, "1", 3)
    assert rep.verdict == REFUTED
    w, site, repl = rep.witness
    # the witness replays: admissible before, not admissible after
    assert is_locally_admissible(w, hard_square)
    assert not is_locally_admissible(repl, hard_square)
    assert check_safe_symbol(full_shift(binary, 2), "1", 2).verdict == SUFFICIENT
    with pytest.raises(ValueError):
        check_safe_symbol(hard_square, "z", 2)


def test_ssf(hard_square, involution5):
    assert check_ssf(involution5).verdict == VERIFIED
    assert check_ssf(hard_square).verdict == VERIFIED
    # |A| = 4 involution: oracle scan finds a neighbor tuple excluding all centers
    f = {0: 1, 1: 0, 2: 3, 3: 2}
    blocked = [combo for combo in itertools.product(range(4), repeat=4)
               if {f[n] for n in combo} == set(range(4))]
    assert blocked
    rep = check_ssf(involution_sft(2, 4, f))
    assert rep.verdict == REFUTED
    assert {f[n] for n in rep.witness} == set(range(4))


def test_ssf_requires_nearest_neighbor(binary):
    spec = SftSpec(binary, 2, [Pattern({(0, 0): "1", (2, 0): "1"})])
    with pytest.raises(ValueError):
        check_ssf(spec)


def test_involution_sft_construction(involution5):
    assert len(involution5.forbidden) == 10
    pairs = {(f[(0, 0)], f[(1, 0)]) for f in involution5.forbidden
             if (1, 0) in f.cells}
    assert pairs == {(0, 1), (1, 0), (2, 3), (3, 2), (4, 4)}
    with pytest.raises(ValueError):
        involution_sft(2, 4, {0: 1, 1: 2, 2: 0})
    with pytest.raises(ValueError):
        involution_sft(2, 4, {})
    with pytest.raises(ValueError):
        involution_sft(2, 4, {0: 7, 7: 0})


def test_first_offenders_hard_square(hard_square):
    offs = first_offenders(hard_square, 2, 2)
    assert {frozenset(w.cells.items()) for w in offs} == {
        frozenset({((0, 0), "1"), ((1, 0), "1")}),
        frozenset({((0, 0), "1"), ((0, 1), "1")}),
    }
    # single-site removals of every offender pass the membership test
    for w in offs:
        for s in w.shape:
            assert in_language_bounded(w.restrict(w.shape - {s}), hard_square, 2)


def test_first_offenders_trivial(binary, involution5):
    assert first_offenders(full_shift(binary, 2), 2, 1) == []
    singles = first_offenders(involution5, 0, 1)
    assert singles == []
    pairs = first_offenders(involution5, 1, 1)
    assert {frozenset(w.cells.items()) for w in pairs} == {
        frozenset(w.cells.items()) for w in involution5.forbidden}


def test_g_extension(hard_square, involution5):
    rep = check_g_extension(hard_square, 0, subshapes_of_cube(3, 2), 2)
    assert rep.verdict == VERIFIED
    rep = check_g_extension(involution5, 0, subshapes_of_cube(2, 2), 2)
    assert rep.verdict == VERIFIED


def test_g_extension_row_spec(binary):
    # horizontal triples 010 and 111 forbidden; recorded exhaustive outcome
    # over all translation classes in the 2x2 square plus row segments
    rows = SftSpec(binary, 2, [
        Pattern({(0, 0): "0", (1, 0): "1", (2, 0): "0"}),
        Pattern({(0, 0): "1", (1, 0): "1", (2, 0): "1"})])
    from sftkit.geometry import Box
    shapes = subshapes_of_cube(2, 2) + [
        Box.at((0, 0), (n, 1)).shape() for n in (3, 4, 5)]
    for g in (0, 1):
        rep = check_g_extension(rows, g, shapes, 2)
        assert rep.verdict == VERIFIED


def test_g_extension_refuted_at_bound(checkerboard):
    rep = check_g_extension(checkerboard, 0, [frozenset({(0, 0), (1, 1)})], 1)
    assert rep.verdict == REFUTED_AT_BOUND
    w = rep.witness
    # the witness disagrees with both proper 2-colorings, so no inflation works
    assert len(w.cells) == 2 and len(set(w.cells.values())) == 2


def test_g_extension_monotone(hard_square):
    shapes = subshapes_of_cube(2, 2)
    assert check_g_extension(hard_square, 0, shapes, 2).ok
    assert check_g_extension(hard_square, 1, shapes, 2).ok


def test_ssf_implies_zero_extension(involution5):
    assert check_ssf(involution5).ok
    assert check_g_extension(involution5, 0, subshapes_of_cube(2, 2), 1).ok


def test_block_gluing(binary, hard_square):
    assert check_block_gluing(full_shift(binary, 2), 0, 2, 5).verdict == VERIFIED
    assert check_block_gluing(hard_square, 1, 2, 6).verdict == VERIFIED
    rep = check_block_gluing(hard_square, 0, 1, 4)
    assert rep.verdict == REFUTED
    w1, t1, w2, t2 = rep.witness
    assert set(w1.cells.values()) == {"1"} and set(w2.cells.values()) == {"1"}
    assert max(abs(a - b) for a, b in zip(t1, t2)) == 1


def test_fep_implies_block_gluing(binary, hard_square, involution5):
    rep = fep_implies_block_gluing(hard_square, 0, 2, 6)
    assert rep.bounds["derived_gap"] == 1 and rep.verdict == VERIFIED
    rep = fep_implies_block_gluing(full_shift(binary, 2), 0, 2, 5)
    assert rep.bounds["derived_gap"] == 0 and rep.verdict == VERIFIED
    rep = fep_implies_block_gluing(involution5, 0, 1, 5)
    assert rep.bounds["derived_gap"] == 1 and rep.verdict == VERIFIED


def test_syntactic_safe_symbol_implies_bounded(hard_square):
    # the sufficient tier must be consistent with the bounded tier
    rep = check_safe_symbol(hard_square, "0", 2)
    assert rep.verdict == SUFFICIENT
    lang = set(enumerate_language(cube(2, 2), hard_square, 1))
    for w in lang:
        for site in w.cells:
            cells = dict(w.cells)
            cells[site] = "0"
            assert Pattern(cells) in lang
