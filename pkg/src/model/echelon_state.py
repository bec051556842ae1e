"""
EchelonState - incremental reduced echelon form with journaled undo.

The prefix-sharing census pushes one row per completed matrix row and pops
back on backtrack. Every absorb writes exactly one journal record, so a mark
is simply the journal depth before the absorb.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)


@dataclass
class _JournalEntry:
    """What one absorb changed: the pivot it added and the rows it rewrote."""
    added_pivot: Optional[int] = None
    replaced: List[Tuple[int, int]] = field(default_factory=list)


class EchelonState:
    """
    Fully reduced set of pivot rows over F2.

    Each stored row has its leading 1 at its pivot column and zeros in every
    other pivot column. Single owner; not thread-safe.
    """

    class UndoError(RuntimeError):
        """Raised when a mark is undone out of order or does not belong to this state."""
        def __init__(self, message: str, mark: int = None, depth: int = None):
            self.mark = mark
            self.depth = depth
            detailed_msg = message
            if mark is not None and depth is not None:
                detailed_msg += f" (mark {mark}, journal depth {depth})"
            super().__init__(detailed_msg)

    def __init__(self, cols: int):
        """
        Args:
            cols: Width of the rows this state accepts.
        """
        if cols < 1:
            raise ValueError(f"EchelonState needs at least one column, got {cols}")
        self.cols = cols
        self._pivots: Dict[int, int] = {}
        self._journal: List[_JournalEntry] = []

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def pivots(self) -> Dict[int, int]:
        """Copy of the pivot-column to row map."""
        return dict(self._pivots)

    def mark(self) -> int:
        """Current journal depth; pass it to undo_to() to come back here."""
        return len(self._journal)

    def reduce(self, row: int) -> int:
        """Residue of ``row`` after clearing every pivot column it touches."""
        for col, pivot_row in self._pivots.items():
            if (row >> col) & 1:
                row ^= pivot_row
        return row

    def absorb_row(self, row: int) -> int:
        """
        Reduce ``row`` against the pivots and install any nonzero residue.

        Args:
            row: Packed bit-row of width ``cols``.

        Returns:
            Undo mark taken before the row was absorbed.
        """
        if row < 0 or row.bit_length() > self.cols:
            raise ValueError(f"Row {row:#x} is wider than {self.cols} columns")
        mark = len(self._journal)
        entry = _JournalEntry()
        residue = self.reduce(row)
        if residue:
            lead = residue.bit_length() - 1
            # Clear the new pivot column from the rows already stored.
            for col, pivot_row in self._pivots.items():
                if (pivot_row >> lead) & 1:
                    entry.replaced.append((col, pivot_row))
                    self._pivots[col] = pivot_row ^ residue
            self._pivots[lead] = residue
            entry.added_pivot = lead
        self._journal.append(entry)
        return mark

    def undo_to(self, mark: int) -> None:
        """
        Revert every absorb made after ``mark`` was taken.

        Raises:
            EchelonState.UndoError: If the mark lies past the current journal
                depth (already undone) or is negative.
        """
        depth = len(self._journal)
        if mark < 0 or mark > depth:
            raise self.UndoError("Undo mark is not reachable from the current state", mark, depth)
        while len(self._journal) > mark:
            entry = self._journal.pop()
            if entry.added_pivot is not None:
                del self._pivots[entry.added_pivot]
            for col, old_row in entry.replaced:
                self._pivots[col] = old_row
