import logging
from dataclasses import dataclass
from typing import Any, Dict, List

from src.model.shape import Shape
from src.utils.bits import BitSource, coerce_bits, unpack_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParameterVector:
    """
    One assignment of the free parameters of a family.

    Bit ``shape.bit_index(j, i)`` holds parameter i of block j; blocks are laid
    out one after the other, parameters ascending within a block.

    Attributes:
        shape: The family this assignment belongs to.
        bits: Packed parameter bits, exactly ``shape.free_bits`` wide.
    """
    shape: Shape
    bits: int

    def __post_init__(self):
        width = self.shape.free_bits
        if self.bits < 0 or self.bits.bit_length() > width:
            raise ValueError(
                f"Parameter bits {self.bits:#x} do not fit the {width} free bits of {self.shape}"
            )

    @classmethod
    def from_bits(cls, shape: Shape, source: BitSource) -> 'ParameterVector':
        """Build from a packed int or a 0/1 sequence in canonical order."""
        return cls(shape, coerce_bits(source, shape.free_bits))

    @classmethod
    def from_blocks(cls, shape: Shape, blocks: List[List[int]]) -> 'ParameterVector':
        """
        Build from per-block parameter lists (block j, parameters 1..s_j+k-1).
        """
        if len(blocks) != shape.m:
            raise ValueError(f"Expected {shape.m} blocks, got {len(blocks)}")
        packed = 0
        for offset, expected, values in zip(shape.offsets, shape.block_params, blocks):
            if len(values) != expected:
                raise ValueError(f"Block needs {expected} parameters, got {len(values)}")
            for i, bit in enumerate(values):
                packed |= (bit & 1) << (offset + i)
        return cls(shape, packed)

    def alpha(self, block: int, index: int) -> int:
        """Value of parameter ``index`` of block ``block`` (both 1-based)."""
        return (self.bits >> self.shape.bit_index(block, index)) & 1

    def block_values(self, block: int) -> List[int]:
        offset = self.shape.offsets[block - 1]
        return unpack_bits(self.bits >> offset, self.shape.block_params[block - 1])

    def to_dict(self) -> Dict[str, Any]:
        return {"shape": self.shape.to_dict(), "bits": str(self.bits)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ParameterVector':
        return cls(Shape.from_dict(data["shape"]), int(data["bits"]))
