"""
BitMatrix - dense matrices over the two-element field.

Rows are packed into Python ints (column ``c`` is bit ``c``). Rank is computed
by plain pivot-by-leading-bit elimination, which is all these small matrices
need.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from src.utils.bits import low_mask, pack_bits, unpack_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BitMatrix:
    """
    Immutable matrix over F2.

    Attributes:
        rows: Packed bit-rows, one int per row.
        cols: Number of columns (at least 1).
    """
    rows: Tuple[int, ...]
    cols: int

    def __post_init__(self):
        if self.cols < 1:
            raise ValueError(f"BitMatrix needs at least one column, got {self.cols}")
        object.__setattr__(self, "rows", tuple(self.rows))
        mask = low_mask(self.cols)
        for index, row in enumerate(self.rows):
            if row < 0 or row & ~mask:
                raise ValueError(
                    f"Row {index} has bits set beyond column {self.cols - 1}"
                )

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]], cols: int = None) -> 'BitMatrix':
        """
        Build a matrix from nested 0/1 lists.

        Args:
            entries: Row-major entries.
            cols: Column count; required when ``entries`` is empty.
        """
        if cols is None:
            if not entries:
                raise ValueError("Column count is required for an empty matrix")
            cols = len(entries[0])
        for index, row in enumerate(entries):
            if len(row) != cols:
                raise ValueError(f"Row {index} has {len(row)} entries, expected {cols}")
        return cls(tuple(pack_bits(row) for row in entries), cols)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'BitMatrix':
        return cls((0,) * rows, cols)

    @classmethod
    def identity(cls, size: int) -> 'BitMatrix':
        return cls(tuple(1 << i for i in range(size)), size)

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), self.cols

    def entry(self, row: int, col: int) -> int:
        """Entry at 0-based (row, col)."""
        return (self.rows[row] >> col) & 1

    def to_lists(self) -> List[List[int]]:
        return [unpack_bits(row, self.cols) for row in self.rows]

    def transpose(self) -> 'BitMatrix':
        """Return the transposed matrix."""
        if not self.rows:
            raise ValueError("Cannot transpose a matrix with no rows")
        columns = []
        for c in range(self.cols):
            packed = 0
            for r, row in enumerate(self.rows):
                packed |= ((row >> c) & 1) << r
            columns.append(packed)
        return BitMatrix(tuple(columns), len(self.rows))

    def permute_rows(self, order: Sequence[int]) -> 'BitMatrix':
        """Return the matrix whose row ``i`` is row ``order[i]`` of this one."""
        if sorted(order) != list(range(len(self.rows))):
            raise ValueError(f"{list(order)} is not a permutation of the rows")
        return BitMatrix(tuple(self.rows[i] for i in order), self.cols)

    def rank(self) -> int:
        return rank_of_rows(self.rows)

    def __str__(self) -> str:
        return "\n".join(
            " ".join(str(bit) for bit in unpack_bits(row, self.cols)) for row in self.rows
        )


def rank_of_rows(rows: Iterable[int]) -> int:
    """
    F2 rank of a collection of packed rows of any width.

    Each row is reduced against the pivots keyed by their leading bit; a
    nonzero residue becomes a new pivot.
    """
    pivots: Dict[int, int] = {}
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            pivot = pivots.get(lead)
            if pivot is None:
                pivots[lead] = row
                break
            row ^= pivot
    return len(pivots)


def rank(mat: BitMatrix) -> int:
    """F2 row rank of ``mat``; the input is left untouched."""
    return rank_of_rows(mat.rows)
