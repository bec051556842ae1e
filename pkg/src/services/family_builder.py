"""
Family Builder - turns parameter assignments into concrete matrices.

Covers the stacked-Hankel family itself and the example construction: a
k x delta matrix whose row r is the window alpha_{(r-1)m+1} .. alpha_{(r-1)m+delta}
of one long parameter sequence. Its transpose, with rows regrouped by residue
mod m, is a member of the family with m-i blocks of height s and i blocks of
height s+1, where delta = i + s*m.
"""
import logging
from typing import List, Sequence, Tuple

from src.model.bit_matrix import BitMatrix
from src.model.parameter_vector import ParameterVector
from src.model.shape import Shape
from src.utils.bits import BitSource, coerce_bits, low_mask

logger = logging.getLogger(__name__)


class DimensionError(ValueError):
    """Raised when (m, delta, k) or a matrix/bit-string size is inconsistent."""
    def __init__(self, message: str, m: int = None, delta: int = None, k: int = None):
        self.m = m
        self.delta = delta
        self.k = k
        detailed_msg = message
        if m is not None:
            detailed_msg += f" (m={m}, delta={delta}, k={k})"
        super().__init__(detailed_msg)


# ==================== Family members ====================

def hankel_stack(heights: Sequence[int], k: int, bits: int) -> BitMatrix:
    """
    Stack Hankel blocks in the given block order.

    Block j owns ``heights[j] + k - 1`` consecutive bits of ``bits``; its row i
    (0-based) is the k-bit window starting at bit i of that run.
    """
    mask = low_mask(k)
    rows = []
    offset = 0
    for height in heights:
        for i in range(height):
            rows.append((bits >> (offset + i)) & mask)
        offset += height + k - 1
    return BitMatrix(tuple(rows), k)


def materialize(pv: ParameterVector) -> BitMatrix:
    """
    Build the delta x k family member for ``pv``.

    Entry (row i, col c) of block j is alpha^(j)_{i+c-1}.
    """
    return hankel_stack(pv.shape.heights, pv.shape.k, pv.bits)


def index_layout(shape: Shape) -> List[List[Tuple[int, int]]]:
    """
    Symbolic picture of a family member: entry is (block, parameter index),
    both 1-based, so row i col c of block j reads (j, i + c - 1).
    """
    layout = []
    for block, row, _ in shape.row_spans():
        layout.append([(block, row + c - 1) for c in range(1, shape.k + 1)])
    return layout


# ==================== Example construction ====================

def _check_example_dims(m: int, delta: int, k: int) -> None:
    if not 1 <= m <= delta <= k:
        raise DimensionError("Need 1 <= m <= delta <= k", m, delta, k)


def example_bit_count(m: int, delta: int, k: int) -> int:
    """Number of parameters of the example matrix, delta + (k-1)m."""
    _check_example_dims(m, delta, k)
    return delta + (k - 1) * m


def example_shape(m: int, delta: int, k: int) -> Shape:
    """
    Family shape the example construction lands in: with delta = i + s*m,
    m-i blocks of height s and i blocks of height s+1.
    """
    _check_example_dims(m, delta, k)
    s, i = divmod(delta, m)
    return Shape((s,) * (m - i) + (s + 1,) * i, k)


def build_example_matrix(m: int, delta: int, k: int, bits: BitSource) -> BitMatrix:
    """
    Build the k x delta example matrix with entry (r, c) = alpha_{(r-1)m + c}.

    Args:
        m, delta, k: Construction size, 1 <= m <= delta <= k.
        bits: alpha_1 .. alpha_{delta+(k-1)m}, packed (bit t is alpha_{t+1}) or as a list.

    Raises:
        DimensionError: On inconsistent sizes.
    """
    width = example_bit_count(m, delta, k)
    try:
        packed = coerce_bits(bits, width)
    except ValueError as e:
        raise DimensionError(str(e), m, delta, k) from e
    mask = low_mask(delta)
    return BitMatrix(tuple((packed >> (r * m)) & mask for r in range(k)), delta)


def example_index_layout(m: int, delta: int, k: int) -> List[List[int]]:
    """alpha indices of the example matrix, row by row."""
    _check_example_dims(m, delta, k)
    return [[r * m + c for c in range(1, delta + 1)] for r in range(k)]


def _residue_order(m: int, delta: int) -> List[Tuple[int, int]]:
    """
    (residue, height) per output block, in the canonical ascending-height order.

    Residues rho = 1..i carry s+1 transposed rows, rho = i+1..m carry s.
    """
    s, i = divmod(delta, m)
    short = [(rho, s) for rho in range(i + 1, m + 1)]
    tall = [(rho, s + 1) for rho in range(1, i + 1)]
    return short + tall


def rearranged_columns(m: int, delta: int) -> List[int]:
    """
    0-based columns of the example matrix in the order they appear as rows of
    the rearranged transpose. Transposed row c (1-based) sits in the block of
    residue (c-1 mod m)+1 at position ceil(c/m).
    """
    order = []
    for rho, height in _residue_order(m, delta):
        for position in range(1, height + 1):
            order.append(rho + (position - 1) * m - 1)
    return order


def rearrange_transpose(mat: BitMatrix, m: int) -> BitMatrix:
    """
    Transpose a k x delta example matrix and regroup its rows into blocks.

    Raises:
        DimensionError: If ``mat`` cannot be an example matrix for ``m``.
    """
    k, delta = mat.shape
    _check_example_dims(m, delta, k)
    return mat.transpose().permute_rows(rearranged_columns(m, delta))


def example_parameter_vector(m: int, delta: int, k: int, bits: BitSource) -> ParameterVector:
    """
    Family parameters matching the rearranged transpose of the example matrix.

    The block of residue rho reads beta_n = alpha_{rho + (n-1)m}. Every alpha is
    used exactly once, so this is a bijection of parameter assignments.
    """
    width = example_bit_count(m, delta, k)
    try:
        packed = coerce_bits(bits, width)
    except ValueError as e:
        raise DimensionError(str(e), m, delta, k) from e
    shape = example_shape(m, delta, k)
    out = 0
    position = 0
    for rho, height in _residue_order(m, delta):
        for n in range(1, height + k):
            out |= ((packed >> (rho + (n - 1) * m - 1)) & 1) << position
            position += 1
    return ParameterVector(shape, out)
