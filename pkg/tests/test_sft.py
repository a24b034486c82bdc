import itertools
import math

import pytest

from sftkit.geometry import Box, ball, cube, inflate
from sftkit.patterns import (Alphabet, Pattern, constant, find_occurrences,
                             iter_assignments)
from sftkit.sft import (Budget, BudgetExceeded, SftSpec,
                        admissibility_witness, count_language,
                        entropy_estimate, enumerate_language, extend_pattern,
                        fixed_point_symbols, forbid, full_shift,
                        is_locally_admissible, nth_language_pattern)


def hs_ok(w):
    """Independent hard-square oracle: no two orthogonally adjacent 1s."""
    for (x, y), v in w.cells.items():
        if v != "1":
            continue
        if w.get((x + 1, y)) == "1" or w.get((x, y + 1)) == "1":
            return False
    return True


def test_spec_validation(binary):
    with pytest.raises(ValueError):
        SftSpec(binary, 2, [Pattern()])
    with pytest.raises(ValueError):
        SftSpec(binary, 2, [Pattern({(0, 0, 0): "1"})])
    with pytest.raises(ValueError):
        SftSpec(binary, 2, [Pattern({(0, 0): "z"})])
    with pytest.raises(ValueError):
        SftSpec(binary, 0, [])


def test_local_admissibility(hard_square, binary):
    anything = Pattern({(0, 0): "1", (1, 1): "1", (5, 5): "0"})
    assert is_locally_admissible(anything, full_shift(binary, 2))
    bad = Pattern({(0, 0): "1", (1, 0): "1"})
    assert not is_locally_admissible(bad, hard_square)
    f, t = admissibility_witness(bad, hard_square)
    assert t == (0, 0) and bad.restrict(f.translate(t).shape) == f.translate(t)
    diag = Pattern({(x, y): "1" if x == y else "0"
                    for x in range(3) for y in range(3)})
    assert hs_ok(diag)
    assert is_locally_admissible(diag, hard_square)


def test_admissibility_matches_occurrence_search(hard_square):
    # cross-module consistency: no forbidden occurrence iff admissible
    for w in iter_assignments(cube(2, 2) | {(2, 0)}, hard_square.alphabet):
        by_occ = all(not find_occurrences(w, f) for f in hard_square.forbidden)
        assert by_occ == is_locally_admissible(w, hard_square)
        assert by_occ == hs_ok(w)


def test_extend_single_one(hard_square):
    w = Pattern({(0, 0): "1"})
    # oracle: first admissible ring fill in lexicographic order
    ring = sorted(ball(1, 2) - {(0, 0)})
    first = None
    for syms in itertools.product("01", repeat=8):
        cand = Pattern({**w.cells, **dict(zip(ring, syms))})
        if hs_ok(cand):
            first = cand
            break
    assert all(v == "0" for s, v in first.cells.items() if s != (0, 0))
    assert extend_pattern(w, hard_square, ball(1, 2)) == first


def test_extend_full_shift(binary):
    fs = full_shift(binary, 2)
    w = Pattern({(1, 1): "1"})
    out = extend_pattern(w, fs, cube(3, 2))
    assert out == Pattern({s: "1" if s == (1, 1) else "0" for s in cube(3, 2)})


def test_extend_rejects_inadmissible_seed(hard_square):
    assert extend_pattern(Pattern({(0, 0): "1", (1, 0): "1"}),
                          hard_square, cube(3, 2)) is None
    with pytest.raises(ValueError):
        extend_pattern(Pattern({(9, 9): "1"}), hard_square, cube(2, 2))


def test_enumerate_language_hard_square(hard_square):
    lang1 = enumerate_language(cube(1, 2), hard_square, 1)
    assert [sorted(w.cells.values()) for w in lang1] == [["0"], ["1"]]
    # oracle: full scan of all assignments with the independence check
    for n, expect in ((2, 7), (3, 63)):
        brute = sum(hs_ok(w) for w in iter_assignments(cube(n, 2), hard_square.alphabet))
        assert brute == expect
        lang = enumerate_language(cube(n, 2), hard_square, 1)
        assert len(lang) == expect
        ranks = [sorted(w.cells.items()) for w in lang]
        assert ranks == sorted(ranks)


def test_enumerate_radius_monotone(hard_square, checkerboard):
    for spec in (hard_square, checkerboard):
        prev = None
        for r in (0, 1, 2):
            cur = set(enumerate_language(cube(2, 2), spec, r))
            if prev is not None:
                assert cur <= prev
            prev = cur


def test_full_shift_counts(binary):
    fs = full_shift(binary, 2)
    for S in (cube(2, 2), frozenset({(0, 0), (2, 2)})):
        assert len(enumerate_language(S, fs, 1)) == 2 ** len(S)


def test_enumerate_budget(binary):
    with pytest.raises(BudgetExceeded):
        enumerate_language(cube(3, 2), full_shift(binary, 2), 0,
                           Budget(max_space=100))


def test_entropy(binary, hard_square):
    count, h = entropy_estimate(full_shift(binary, 2), 3)
    assert count == 512 and h == pytest.approx(math.log(2))
    count, h = entropy_estimate(hard_square, 2, 1)
    assert count == 7 and h == pytest.approx(math.log(7) / 4)


def test_count_language_dp_matches_enumeration(hard_square, involution5, checkerboard):
    for spec, n in [(hard_square, 1), (hard_square, 2), (hard_square, 3),
                    (involution5, 2), (checkerboard, 3)]:
        dp = count_language(spec, Box.cube(n, 2), 0)
        assert dp == len(enumerate_language(cube(n, 2), spec, 0))
    assert count_language(hard_square, Box.cube(4, 2), 0) == 1234


def test_subadditivity_counts(hard_square, involution5):
    for spec in (hard_square, involution5):
        for n in (1, 2):
            small = count_language(spec, Box.cube(n, 2), 0)
            big = count_language(spec, Box.cube(2 * n, 2), 0)
            assert big <= small ** 4


def test_fixed_points(hard_square, binary, involution5):
    assert fixed_point_symbols(hard_square) == ["0"]
    assert fixed_point_symbols(full_shift(Alphabet(["a", "b"]), 2)) == ["a", "b"]
    assert fixed_point_symbols(involution5) == [0, 1, 2, 3]


def test_forbid(binary, hard_square):
    fs = full_shift(binary, 2)
    no1 = forbid(fs, Pattern({(0, 0): "1"}))
    # language-equivalent to the full shift on one symbol
    assert len(enumerate_language(cube(2, 2), no1, 1)) == 1
    only0 = forbid(hard_square, Pattern({(0, 0): "1"}))
    for S in (cube(2, 2), cube(3, 2)):
        assert enumerate_language(S, only0, 1) == [constant(S, "0")]
    with pytest.raises(ValueError):
        forbid(hard_square, Pattern())


def test_extension_result_properties(hard_square):
    for w in enumerate_language(cube(2, 2), hard_square, 0):
        out = extend_pattern(w, hard_square, cube(4, 2))
        assert out is not None
        assert out.restrict(w.shape) == w
        assert is_locally_admissible(out, hard_square)


def test_nth_language_pattern(hard_square, binary):
    lang = enumerate_language(cube(2, 2), hard_square, 1)
    for i in range(1, 8):
        w, used = nth_language_pattern(cube(2, 2), hard_square, 1, i)
        assert (w, used) == (lang[i - 1], i)
    w, used = nth_language_pattern(cube(2, 2), hard_square, 1, 99)
    assert (w, used) == (lang[-1], 7)
    # full-shift fast path agrees with enumeration
    fs = full_shift(binary, 2)
    lang = enumerate_language(cube(2, 2), fs, 0)
    for i in (1, 7, 16, 500):
        w, used = nth_language_pattern(cube(2, 2), fs, 0, i)
        assert w == lang[min(i, 16) - 1] and used == min(i, 16)
