from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.model.shape import Shape
from src.services import formulas
from src.services.formulas import FormulaMismatchError

WORKED_EXAMPLE = 3255 * 2 ** 23


@pytest.mark.parametrize("heights, k, expected", [
    ((2, 3, 3), 10, WORKED_EXAMPLE),
    ((1,), 1, 1),
    ((2, 2), 4, 384),
])
def test_conjecture_count(heights, k, expected):
    shape = Shape(heights, k)
    assert formulas.conjecture_count(shape) == expected
    assert formulas.conjecture_count_rhs(shape) == expected


def test_conjecture_depends_only_on_m_delta_k():
    assert formulas.conjecture_count(Shape((1, 3), 6)) == formulas.conjecture_count(Shape((2, 2), 6))


@settings(max_examples=200)
@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=60),
       st.integers(min_value=0, max_value=60))
def test_conjecture_forms_agree_exactly(m, extra_delta, extra_k):
    delta = m + extra_delta
    k = delta + extra_k
    assert formulas.conjecture_value(m, delta, k) == formulas.conjecture_value_rhs(m, delta, k)


def test_odd_factors_of_worked_example():
    assert formulas.odd_factors(Shape((2, 3, 3), 10)) == [7, 15, 31]


@pytest.mark.parametrize("m, expected", [
    (1, Fraction(1, 2)),
    (2, Fraction(3, 8)),
    (3, Fraction(21, 64)),
])
def test_invertible_fraction(m, expected):
    assert formulas.invertible_fraction(m) == expected


def test_square_family_fraction():
    assert formulas.conjecture_fraction(Shape((1, 1, 1), 3)) == Fraction(21, 64)
    assert formulas.conjecture_fraction(Shape((2, 3), 5)) == Fraction(3, 8)


@pytest.mark.parametrize("m, k, expected", [(2, 2, 6), (1, 1, 1), (2, 3, 42)])
def test_count_full_rank_unstructured(m, k, expected):
    assert formulas.count_full_rank_unstructured(m, k) == expected


@pytest.mark.parametrize("delta, k, expected", [(2, 2, 4), (1, 1, 1), (2, 4, 28)])
def test_count_single_persym(delta, k, expected):
    assert formulas.count_single_persym(delta, k) == expected


@pytest.mark.parametrize("delta, k, expected", [(4, 4, 384), (2, 2, 6), (3, 5, 1680)])
def test_count_double_persym(delta, k, expected):
    assert formulas.count_double_persym(delta, k) == expected


@pytest.mark.parametrize("delta, k, expected", [
    (3, 3, 168),
    (4, 6, 416640),
    (8, 10, WORKED_EXAMPLE),
])
def test_count_triple_persym(delta, k, expected):
    assert formulas.count_triple_persym(delta, k) == expected


def test_printed_three_block_expansions_are_reported_not_used():
    check = formulas.triple_expansion_check(8, 10)
    assert check.factored == WORKED_EXAMPLE
    assert not check.sum_matches
    assert not check.bracket_matches
    assert check.corrected_matches
    assert check.printed_sum - check.factored == 2 * 2 ** (4 * 8 - 9)
    assert "differs" in check.summary()


@pytest.mark.parametrize("heights, k", [((1, 2, 2, 2), 9), ((1, 1, 2, 2, 3), 9)])
def test_recursion_matches_conjecture(heights, k):
    shape = Shape(heights, k)
    assert formulas.is_recursion_case(shape)
    assert formulas.recursion_count(shape) == formulas.conjecture_count(shape)


def test_recursion_rejects_other_shapes():
    with pytest.raises(Shape.ShapeError):
        formulas.recursion_count(Shape((2, 2, 2, 2), 9))


@pytest.mark.parametrize("heights, k, expected", [
    ((1, 1), 3, 42),
    ((3,), 4, 48),
    ((2, 2), 4, 384),
    ((2, 3, 3), 10, WORKED_EXAMPLE),
    ((1, 2), 4, None),
])
def test_theorem_count_by_case(heights, k, expected):
    assert formulas.theorem_count(Shape(heights, k)) == expected


def test_out_of_range_arguments():
    with pytest.raises(ValueError):
        formulas.conjecture_value(3, 2, 4)
    with pytest.raises(ValueError):
        formulas.count_double_persym(1, 3)
    with pytest.raises(ValueError):
        formulas.invertible_fraction(0)


def test_mismatch_error_carries_both_sides():
    with pytest.raises(FormulaMismatchError) as excinfo:
        formulas._require("demo", 1, 2)
    assert (excinfo.value.left, excinfo.value.right) == (1, 2)


def test_no_overflow_at_large_k():
    value = formulas.conjecture_value(4, 100, 300)
    assert value.bit_length() > 1000
    assert value == formulas.conjecture_value_rhs(4, 100, 300)


@pytest.mark.parametrize("n, expected", [
    (384, "384 = 3 · 2^7"),
    (1, "1"),
    (8, "8 = 2^3"),
    (WORKED_EXAMPLE, f"{WORKED_EXAMPLE} = 3255 · 2^23"),
])
def test_power_of_two_style(n, expected):
    assert formulas.power_of_two_style(n) == expected


def test_split_power_of_two():
    assert formulas.split_power_of_two(384) == (3, 7)
    with pytest.raises(ValueError):
        formulas.split_power_of_two(0)


def test_identity_sweep_small_range():
    report = formulas.identity_sweep(max_k=14, max_m=6, recursion_max_k=12)
    assert report.ok, report.failures
    assert report.checked > 100
    assert report.triple_checks > 0
    assert report.triple_sum_mismatches == report.triple_checks
    assert report.triple_bracket_mismatches == report.triple_checks
    assert report.triple_corrected_mismatches == 0


@pytest.mark.slow
def test_identity_sweep_full_range():
    report = formulas.identity_sweep()
    assert report.ok, report.failures
