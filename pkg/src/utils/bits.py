"""
Bit packing helpers.

Bit-rows and parameter strings are plain Python ints. Bit ``i`` of the int is
element ``i`` of the vector, so column 0 of a matrix row is the least
significant bit. Python ints grow as needed, which gives multi-word rows for
free when a row is wider than a machine word.
"""
from typing import Iterable, List, Sequence, Union

BitSource = Union[int, Sequence[int]]


def pack_bits(bits: Iterable[int]) -> int:
    """
    Pack a sequence of bits (e.g. [1, 0, 1, 1]) into an int.

    Args:
        bits: Iterable of 0/1 values, element 0 first.

    Returns:
        The packed integer.
    """
    out = 0
    for i, bit in enumerate(bits):
        if bit not in (0, 1):
            raise ValueError(f"Bit {i} is {bit!r}, expected 0 or 1")
        out |= bit << i
    return out


def unpack_bits(value: int, width: int) -> List[int]:
    """Unpack the low ``width`` bits of ``value`` into a list."""
    return [(value >> i) & 1 for i in range(width)]


def low_mask(width: int) -> int:
    """Mask with the low ``width`` bits set."""
    return (1 << width) - 1


def coerce_bits(source: BitSource, width: int) -> int:
    """
    Turn either a packed int or a bit sequence into a packed int of ``width`` bits.

    Raises:
        ValueError: If the source does not fit exactly into ``width`` bits.
    """
    if isinstance(source, int):
        if source < 0 or source.bit_length() > width:
            raise ValueError(f"Packed value {source} does not fit in {width} bits")
        return source
    if len(source) != width:
        raise ValueError(f"Expected {width} bits, got {len(source)}")
    return pack_bits(source)
