from itertools import combinations, permutations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.model.bit_matrix import BitMatrix, rank, rank_of_rows
from src.utils.bits import coerce_bits, pack_bits, unpack_bits


def span_rank(rows):
    """Rank from the size of the row span, 2^rank."""
    span = set()
    for coeffs in product((0, 1), repeat=len(rows)):
        acc = 0
        for c, row in zip(coeffs, rows):
            if c:
                acc ^= row
        span.add(acc)
    return len(span).bit_length() - 1


def minor_rank(rows, cols):
    """Order of the largest square submatrix with nonzero determinant over F2."""
    for size in range(min(len(rows), cols), 0, -1):
        for picked_rows in combinations(range(len(rows)), size):
            for picked_cols in combinations(range(cols), size):
                det = 0
                for perm in permutations(picked_cols):
                    if all((rows[r] >> c) & 1 for r, c in zip(picked_rows, perm)):
                        det ^= 1
                if det:
                    return size
    return 0


@st.composite
def matrices(draw, max_rows=6, max_cols=12):
    cols = draw(st.integers(min_value=1, max_value=max_cols))
    rows = draw(st.lists(st.integers(min_value=0, max_value=(1 << cols) - 1), max_size=max_rows))
    return BitMatrix(tuple(rows), cols)


@st.composite
def small_matrices(draw, max_entries=12):
    cols = draw(st.integers(min_value=1, max_value=max_entries))
    row_count = draw(st.integers(min_value=0, max_value=max_entries // cols))
    rows = draw(st.lists(st.integers(min_value=0, max_value=(1 << cols) - 1),
                         min_size=row_count, max_size=row_count))
    return BitMatrix(tuple(rows), cols)


def test_identity_has_full_rank():
    assert rank(BitMatrix.identity(2)) == 2


def test_zero_matrix_has_rank_zero():
    assert rank(BitMatrix.zeros(3, 5)) == 0


def test_dependent_third_row():
    mat = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1], [1, 1, 0]])
    assert rank(mat) == 2
    assert mat.rank() == 2


def test_rank_leaves_input_untouched():
    mat = BitMatrix.from_lists([[1, 1], [1, 1]])
    before = mat.rows
    rank(mat)
    assert mat.rows == before


def test_wide_rows_spanning_several_words():
    rows = (1 << 200, (1 << 200) | 1, 1)
    assert rank_of_rows(rows) == 2
    assert rank(BitMatrix(rows, 201)) == 2


def test_padding_bits_rejected():
    with pytest.raises(ValueError):
        BitMatrix((0b100,), 2)


def test_zero_columns_rejected():
    with pytest.raises(ValueError):
        BitMatrix((), 0)


def test_ragged_lists_rejected():
    with pytest.raises(ValueError):
        BitMatrix.from_lists([[1, 0], [1]])


def test_entry_and_lists_use_column_zero_as_low_bit():
    mat = BitMatrix.from_lists([[1, 0, 0], [0, 0, 1]])
    assert mat.rows == (0b001, 0b100)
    assert mat.entry(1, 2) == 1
    assert mat.to_lists() == [[1, 0, 0], [0, 0, 1]]
    assert mat.shape == (2, 3)


def test_transpose_and_permute():
    mat = BitMatrix.from_lists([[1, 1, 0], [0, 1, 1]])
    assert mat.transpose().to_lists() == [[1, 0], [1, 1], [0, 1]]
    assert mat.permute_rows([1, 0]).to_lists() == [[0, 1, 1], [1, 1, 0]]
    with pytest.raises(ValueError):
        mat.permute_rows([0, 0])


def test_pack_helpers():
    assert pack_bits([1, 0, 1, 1]) == 0b1101
    assert unpack_bits(0b1101, 5) == [1, 0, 1, 1, 0]
    assert coerce_bits([0, 1], 2) == 2
    with pytest.raises(ValueError):
        coerce_bits(8, 3)
    with pytest.raises(ValueError):
        pack_bits([2])


@settings(max_examples=200)
@given(matrices())
def test_rank_matches_span_oracle(mat):
    r = rank(mat)
    assert r == span_rank(mat.rows)
    assert 0 <= r <= min(mat.row_count, mat.cols)


@settings(max_examples=100)
@given(matrices(max_rows=5, max_cols=5))
def test_rank_is_transpose_invariant(mat):
    if mat.row_count:
        assert rank(mat.transpose()) == rank(mat)


def test_minor_oracle_on_known_matrices():
    assert minor_rank(BitMatrix.identity(3).rows, 3) == 3
    assert minor_rank((0b011, 0b110, 0b101), 3) == 2
    assert minor_rank((0, 0), 4) == 0


@settings(max_examples=300)
@given(small_matrices())
def test_rank_is_largest_invertible_minor(mat):
    assert rank(mat) == minor_rank(mat.rows, mat.cols)


@settings(max_examples=200)
@given(st.data())
def test_rank_ignores_row_order(data):
    mat = data.draw(matrices())
    order = data.draw(st.permutations(range(mat.row_count)))
    assert rank(mat.permute_rows(order)) == rank(mat)
