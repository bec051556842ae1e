"""
Rank Histogram Model - exact per-rank counts over a family's parameter space.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Sequence

from src.model.shape import Shape

logger = logging.getLogger(__name__)


class Engine(Enum):
    """Census engine choice."""
    NAIVE = "naive"
    PREFIX = "prefix"


@dataclass
class RankHistogram:
    """
    Number of parameter assignments of ``shape`` achieving each rank 0..delta.

    Attributes:
        shape: The family counted.
        counts: counts[r] is the number of members of rank r.
    """
    shape: Shape
    counts: List[int] = field(default_factory=list)

    class ConservationError(ArithmeticError):
        """Raised when the counts do not add up to 2^F."""
        def __init__(self, shape: Shape, total: int, expected: int):
            self.shape = shape
            self.total = total
            self.expected = expected
            super().__init__(
                f"Histogram for {shape} sums to {total}, expected 2^{shape.free_bits} = {expected}"
            )

    def __post_init__(self):
        if not self.counts:
            self.counts = [0] * (self.shape.delta + 1)
        if len(self.counts) != self.shape.delta + 1:
            raise ValueError(
                f"Histogram for {self.shape} needs {self.shape.delta + 1} ranks, got {len(self.counts)}"
            )

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def full_rank(self) -> int:
        return self.counts[self.shape.delta]

    @property
    def expected_total(self) -> int:
        return 1 << self.shape.free_bits

    def is_conserved(self) -> bool:
        return self.total == self.expected_total

    def check_conservation(self) -> 'RankHistogram':
        """
        Raises:
            RankHistogram.ConservationError: If counts do not sum to 2^F.
        """
        if not self.is_conserved():
            logger.error(f"Conservation failed for {self.shape}: {self.counts}")
            raise self.ConservationError(self.shape, self.total, self.expected_total)
        return self

    def merged(self, other: 'RankHistogram') -> 'RankHistogram':
        """Component-wise sum with a partial histogram of the same shape."""
        if other.shape != self.shape:
            raise ValueError(f"Cannot merge histograms of {self.shape} and {other.shape}")
        return RankHistogram(self.shape, [a + b for a, b in zip(self.counts, other.counts)])

    @classmethod
    def from_partials(cls, shape: Shape, partials: Sequence[Sequence[int]]) -> 'RankHistogram':
        result = cls(shape)
        for partial in partials:
            result = result.merged(cls(shape, list(partial)))
        return result

    def full_rank_fraction(self) -> Fraction:
        """counts[delta] / 2^F, reduced."""
        return Fraction(self.full_rank, self.expected_total)

    def nullity_moment(self) -> int:
        """sum_r counts[r] * 2^(delta - r)."""
        delta = self.shape.delta
        return sum(count << (delta - r) for r, count in enumerate(self.counts))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape": self.shape.format(),
            "free_bits": self.shape.free_bits,
            "counts": {str(r): str(c) for r, c in enumerate(self.counts)},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RankHistogram':
        shape = Shape.parse(data["shape"])
        counts = [int(data["counts"][str(r)]) for r in range(shape.delta + 1)]
        return cls(shape, counts)

    def __str__(self) -> str:
        return "\n".join(f"rank {r}: {c}" for r, c in enumerate(self.counts))


@dataclass(frozen=True)
class ShardSpec:
    """
    One slice of the parameter space: the top ``fixed_prefix_bits`` canonical
    bits are pinned to ``prefix_value``.
    """
    fixed_prefix_bits: int
    prefix_value: int
    engine: Engine = Engine.PREFIX

    def validate(self, shape: Shape) -> None:
        if not 0 <= self.fixed_prefix_bits <= shape.free_bits:
            raise ValueError(
                f"Shard pins {self.fixed_prefix_bits} bits but {shape} has {shape.free_bits}"
            )
        if not 0 <= self.prefix_value < (1 << self.fixed_prefix_bits):
            raise ValueError(
                f"Prefix value {self.prefix_value} out of range for {self.fixed_prefix_bits} bits"
            )

    @property
    def shard_id(self) -> int:
        return self.prefix_value

    def pinned_bits(self, shape: Shape) -> int:
        """The shard's pinned bits placed at their canonical positions."""
        return self.prefix_value << (shape.free_bits - self.fixed_prefix_bits)
