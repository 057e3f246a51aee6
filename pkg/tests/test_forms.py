"""Linear-form algebra tests."""

import itertools

import pytest

from solfree import TORUS
from solfree.errors import SolfreeError
from solfree.forms import (
    FormFamily,
    LinearForm,
    content_reduce,
    is_admissible,
    is_invariant,
    k_admissibility_threshold,
    multiplier_height,
    multiplier_height_witness,
    parse_form,
    weight_s,
)


def exhaustive_height(coeffs, cap):
    """Independent oracle: scan all integer vectors with l1 norm <= cap."""
    t = len(coeffs)
    best = None
    for vec in itertools.product(range(-cap, cap + 1), repeat=t):
        if sum(n * c for n, c in zip(vec, coeffs)) == 1:
            s = sum(abs(n) for n in vec)
            if best is None or s < best:
                best = s
    return best


def test_parse_plain_terms():
    assert parse_form("x1+x2-x3").coeffs == (1, 1, -1)
    assert parse_form("2x1+3x2-2x3").coeffs == (2, 3, -2)
    assert parse_form("x1-2x2+x3").coeffs == (1, -2, 1)


def test_parse_bracketed_and_spaces():
    assert parse_form("[1, 2, -1]").coeffs == (1, 2, -1)
    assert parse_form(" x1 + x2 - x3 ").coeffs == (1, 1, -1)
    assert parse_form("-x1+4x2").coeffs == (-1, 4)


@pytest.mark.parametrize(
    "bad",
    ["", "x1", "x1+x3", "x1+x1-x2", "0x1+x2-x3", "x1+x2-", "[1]", "[1,0,2]", "y1+y2"],
)
def test_parse_rejects(bad):
    with pytest.raises(SolfreeError):
        parse_form(bad)


def test_invariance():
    assert is_invariant(LinearForm((1, -2, 1)))
    assert not is_invariant(LinearForm((1, 1, -1)))
    assert not is_invariant(LinearForm((2, 3, -2)))


def test_content_reduce():
    assert content_reduce(LinearForm((2, 4, -2))) == (LinearForm((1, 2, -1)), 2)
    assert content_reduce(LinearForm((1, 1, -1))) == (LinearForm((1, 1, -1)), 1)
    assert content_reduce(LinearForm((6, -9, 15))) == (LinearForm((2, -3, 5)), 3)


def test_content_reduce_idempotent():
    reduced, _ = content_reduce(LinearForm((6, -9, 15)))
    again, n = content_reduce(reduced)
    assert n == 1 and again == reduced


def test_multiplier_height_examples():
    assert multiplier_height(LinearForm((1, 1, -1))) == 1
    assert multiplier_height(LinearForm((2, 3, -2))) == exhaustive_height((2, 3, -2), 3) == 2
    assert multiplier_height(LinearForm((3, 5, -7))) == exhaustive_height((3, 5, -7), 3) == 3


def lex_min_witness(coeffs, h):
    cands = [
        vec
        for vec in itertools.product(range(-h, h + 1), repeat=len(coeffs))
        if sum(abs(n) for n in vec) == h
        and sum(n * c for n, c in zip(vec, coeffs)) == 1
    ]
    return min(cands)


def test_multiplier_height_witness():
    h, vec = multiplier_height_witness(LinearForm((2, 3, -2)))
    assert h == 2 and sum(abs(n) for n in vec) == 2
    assert sum(n * c for n, c in zip(vec, (2, 3, -2))) == 1
    # lexicographically smallest witness of minimal weight
    assert vec == lex_min_witness((2, 3, -2), 2) == (-1, 1, 0)
    h, vec = multiplier_height_witness(LinearForm((3, 5, -7)))
    assert h == 3 and vec == lex_min_witness((3, 5, -7), 3) == (-2, 0, -1)


def test_multiplier_height_random_against_oracle():
    import random

    rng = random.Random(7)
    import math

    checked = 0
    while checked < 40:
        t = rng.choice([2, 3, 4])
        coeffs = tuple(rng.choice([-5, -4, -3, -2, -1, 1, 2, 3, 4, 5]) for _ in range(t))
        if math.gcd(*[abs(c) for c in coeffs]) != 1:
            continue
        form = LinearForm(coeffs)
        h, vec = multiplier_height_witness(form)
        assert sum(n * c for n, c in zip(vec, coeffs)) == 1
        assert h == exhaustive_height(coeffs, 6)
        # unit coefficient iff height one
        assert (h == 1) == any(abs(c) == 1 for c in coeffs)
        checked += 1


def test_height_requires_coprime():
    with pytest.raises(SolfreeError):
        multiplier_height(LinearForm((2, 4, -2)))


def test_k_admissibility_threshold():
    assert k_admissibility_threshold(LinearForm((1, 1, -1))) == 1
    assert k_admissibility_threshold(LinearForm((2, 3, -2))) == 3
    assert k_admissibility_threshold(LinearForm((3, 5, -7))) == 7


def test_is_admissible():
    L = LinearForm((2, 3, -2))
    assert not is_admissible(L, 4)
    assert is_admissible(L, 5)
    assert is_admissible(L, TORUS)
    # every prime above max |c_i| is admissible
    for p in (5, 7, 11, 13):
        assert is_admissible(L, p)


def test_weight():
    assert weight_s(LinearForm((1, 1, -1))) == 3
    assert weight_s(LinearForm((1, 1, -3))) == 5
    assert weight_s(LinearForm((2, 3, -2))) == 7


def test_family():
    fam = FormFamily((LinearForm((1, 1, -1)), LinearForm((1, 1, -1))))
    assert fam.has_duplicates
    assert not FormFamily((LinearForm((1, 1, -1)),)).has_duplicates
    with pytest.raises(SolfreeError):
        FormFamily(())


def test_json_roundtrip():
    form = LinearForm((2, -3, 5))
    assert LinearForm.from_json(form.to_json()) == form
    fam = FormFamily((form, LinearForm((1, 1, -1))))
    assert FormFamily.from_json(fam.to_json()) == fam


def test_two_variable_flag():
    assert parse_form("x1-2x2").two_variable
    assert not parse_form("x1+x2-x3").two_variable


def test_str_roundtrip():
    for coeffs in [(1, 1, -1), (2, 3, -2), (-1, -2, 4), (1, -2, 1)]:
        form = LinearForm(coeffs)
        assert parse_form(str(form)) == form
