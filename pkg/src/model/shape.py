"""
Shape model - the descriptor (m, s1..sm, k) of one m-times persymmetric family.

A family member is a vertical stack of m Hankel blocks. Block j has s_j rows;
row i of block j is the width-k window starting at parameter i of that
block's own parameter sequence.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, Tuple

logger = logging.getLogger(__name__)

# Bumped whenever the canonical parameter bit order changes.
LAYOUT_VERSION = "block-major-ascending/1"


class CaseTag(Enum):
    """Which case box of the family definitions a shape falls into."""
    UNIT_ROWS = "unit-rows"                    # s1 = ... = sm = 1
    SINGLE = "single"                          # m = 1, s1 >= 2
    DOUBLE = "double"                          # m = 2, 2 <= s1 <= s2
    TRIPLE = "triple"                          # m = 3, 2 <= s1 <= s2 <= s3
    UNIT_PREFIX_TRIPLE = "unit-prefix+triple"  # m >= 4, s1..s(m-3) = 1, 2 <= s(m-2)
    GENERAL = "general"


@dataclass(frozen=True)
class Shape:
    """
    Canonical family descriptor.

    Attributes:
        heights: Block heights s1..sm, sorted ascending.
        k: Column count.
        original_heights: Heights in the order the user gave them (display only).
    """
    heights: Tuple[int, ...]
    k: int
    original_heights: Tuple[int, ...] = field(default=(), compare=False, hash=False)

    SHAPE_PATTERN = re.compile(r'^\s*\[\s*(\d+(?:\s*,\s*\d+)*)\s*\]\s*[xX×]\s*(\d+)\s*$')

    class ShapeError(ValueError):
        """Raised for shapes that break 1 <= m <= delta <= k or malformed shape text."""
        def __init__(self, reason: str, text: str = None):
            self.reason = reason
            self.text = text
            detailed_msg = reason
            if text is not None:
                detailed_msg += f": '{text}'"
            super().__init__(detailed_msg)

    def __post_init__(self):
        given = tuple(int(h) for h in self.heights)
        if not given:
            raise self.ShapeError("A shape needs at least one block")
        if any(h < 1 for h in given):
            raise self.ShapeError(f"Block heights must be >= 1, got {list(given)}")
        if self.k < 1:
            raise self.ShapeError(f"Column count must be >= 1, got {self.k}")
        if sum(given) > self.k:
            raise self.ShapeError(
                f"Row count delta={sum(given)} exceeds column count k={self.k}"
            )
        object.__setattr__(self, "original_heights", tuple(self.original_heights) or given)
        object.__setattr__(self, "heights", tuple(sorted(given)))

    # ==================== Derived quantities ====================

    @property
    def m(self) -> int:
        return len(self.heights)

    @property
    def delta(self) -> int:
        return sum(self.heights)

    @property
    def block_params(self) -> Tuple[int, ...]:
        """Number of parameters of each block, s_j + k - 1."""
        return tuple(h + self.k - 1 for h in self.heights)

    @property
    def offsets(self) -> Tuple[int, ...]:
        """Bit index of the first parameter of each block."""
        result = []
        total = 0
        for count in self.block_params:
            result.append(total)
            total += count
        return tuple(result)

    @property
    def free_bits(self) -> int:
        return sum(self.block_params)

    def bit_index(self, block: int, index: int) -> int:
        """
        Canonical bit position of parameter ``index`` (1-based) of block ``block`` (1-based).
        """
        if not 1 <= block <= self.m:
            raise IndexError(f"Block {block} out of range 1..{self.m}")
        if not 1 <= index <= self.block_params[block - 1]:
            raise IndexError(
                f"Parameter {index} out of range 1..{self.block_params[block - 1]} in block {block}"
            )
        return self.offsets[block - 1] + index - 1

    def row_spans(self) -> Iterator[Tuple[int, int, int]]:
        """
        Yield (block, row, first_bit) for every matrix row in canonical order.

        Row ``row`` (1-based) of block ``block`` reads bits first_bit .. first_bit + k - 1.
        """
        for block, (offset, height) in enumerate(zip(self.offsets, self.heights), start=1):
            for row in range(1, height + 1):
                yield block, row, offset + row - 1

    # ==================== Text syntax ====================

    @classmethod
    def parse(cls, text: str) -> 'Shape':
        """
        Parse the ``[s1,...,sm]xk`` syntax; the list may be unsorted.

        Raises:
            Shape.ShapeError: On malformed text or an invalid shape.
        """
        match = cls.SHAPE_PATTERN.match(text or "")
        if not match:
            raise cls.ShapeError("Expected shape syntax like [2,3,3]x10", text)
        heights = tuple(int(part) for part in match.group(1).split(","))
        try:
            return cls(heights, int(match.group(2)))
        except cls.ShapeError as e:
            raise cls.ShapeError(e.reason, text) from e

    def format(self) -> str:
        return f"[{','.join(str(h) for h in self.heights)}]x{self.k}"

    def __str__(self) -> str:
        return self.format()

    # ==================== Classification ====================

    @property
    def case_tag(self) -> CaseTag:
        h = self.heights
        if all(x == 1 for x in h):
            return CaseTag.UNIT_ROWS
        if self.m == 1:
            return CaseTag.SINGLE
        if self.m == 2 and h[0] >= 2:
            return CaseTag.DOUBLE
        if self.m == 3 and h[0] >= 2:
            return CaseTag.TRIPLE
        if self.m >= 4 and all(x == 1 for x in h[:-3]) and h[-3] >= 2:
            return CaseTag.UNIT_PREFIX_TRIPLE
        return CaseTag.GENERAL

    def to_dict(self) -> Dict[str, Any]:
        return {"heights": list(self.heights), "k": self.k}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Shape':
        return cls(tuple(data["heights"]), int(data["k"]))


@dataclass(frozen=True)
class FamilyCard:
    """Summary of one family: its shape, case box, free bits and size."""
    shape: Shape
    case_tag: CaseTag
    free_bits: int
    total_matrices: int

    @classmethod
    def for_shape(cls, shape: Shape) -> 'FamilyCard':
        return cls(shape, shape.case_tag, shape.free_bits, 1 << shape.free_bits)

    def __str__(self) -> str:
        return (
            f"{self.shape.format()}: m={self.shape.m}, delta={self.shape.delta}, "
            f"k={self.shape.k}, case={self.case_tag.value}, F={self.free_bits}, "
            f"members=2^{self.free_bits}"
        )


def free_bit_count(shape: Shape) -> int:
    """Sum over blocks of s_j + k - 1."""
    return shape.free_bits


def family_card(shape: Shape) -> FamilyCard:
    return FamilyCard.for_shape(shape)


def parse_shape(text: str) -> Shape:
    return Shape.parse(text)


def format_shape(shape: Shape) -> str:
    return shape.format()


def _height_multisets(m: int, max_height: int, lowest: int = 1) -> Iterator[Tuple[int, ...]]:
    if m == 0:
        yield ()
        return
    for h in range(lowest, max_height + 1):
        for rest in _height_multisets(m - 1, max_height, h):
            yield (h,) + rest


def enumerate_shapes(max_m: int, max_height: int, max_k: int,
                     max_free_bits: int = None, min_k: int = 1) -> Iterator[Shape]:
    """
    Yield every canonical shape with m <= max_m, each s_j <= max_height and
    min_k <= k <= max_k that satisfies 1 <= m <= delta <= k, ordered by
    (m, heights, k). Shapes whose free bit count exceeds ``max_free_bits`` are
    skipped.
    """
    for m in range(1, max_m + 1):
        for heights in _height_multisets(m, max_height):
            delta = sum(heights)
            for k in range(max(delta, min_k), max_k + 1):
                shape = Shape(heights, k)
                if max_free_bits is not None and shape.free_bits > max_free_bits:
                    continue
                yield shape
