"""
Run Config - one parsed command-line invocation.
"""
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from src.model.rank_histogram import Engine
from src.model.shape import Shape, enumerate_shapes

COMMANDS = ("formula", "verify", "census", "example", "sweep")


@dataclass(frozen=True)
class GridSpec:
    """
    Bounds for a shape sweep, written ``m<=3,s<=3,k<=6,F<=22``.

    Only shapes with 1 <= m <= delta <= k are produced.
    """
    max_m: int = 3
    max_height: Optional[int] = None
    max_k: int = 6
    max_free_bits: Optional[int] = None

    TERM_PATTERN = re.compile(r'^\s*([msSkF])\s*<=\s*(\d+)\s*$')
    KEYS = {"m": "max_m", "s": "max_height", "S": "max_height", "k": "max_k", "F": "max_free_bits"}

    @classmethod
    def parse(cls, text: str) -> 'GridSpec':
        values: Dict[str, int] = {}
        for term in (text or "").split(","):
            match = cls.TERM_PATTERN.match(term)
            if not match:
                raise ValueError(f"Bad grid term {term!r}; expected e.g. m<=3,s<=3,k<=6,F<=22")
            key = cls.KEYS[match.group(1)]
            if key in values:
                raise ValueError(f"Grid bound {match.group(1)} given twice")
            values[key] = int(match.group(2))
        grid = cls(**values)
        if grid.max_m < 1 or grid.max_k < 1:
            raise ValueError(f"Grid bounds must be positive: {text!r}")
        return grid

    def shapes(self) -> List[Shape]:
        max_height = self.max_height if self.max_height is not None else self.max_k
        return list(enumerate_shapes(self.max_m, max_height, self.max_k, self.max_free_bits))

    def __str__(self) -> str:
        parts = [f"m<={self.max_m}"]
        if self.max_height is not None:
            parts.append(f"s<={self.max_height}")
        parts.append(f"k<={self.max_k}")
        if self.max_free_bits is not None:
            parts.append(f"F<={self.max_free_bits}")
        return ",".join(parts)


@dataclass(frozen=True)
class RunConfig:
    """
    Attributes:
        command: One of formula, verify, census, example, sweep.
        shapes: Shapes named on the command line, in order.
        grid: Optional sweep grid for ``verify``.
        triple: (m, delta, k) for ``example`` or the triple form of ``formula``.
        engine: Census engine.
        workers: Worker processes for sharded runs.
        shards: Shard count (power of two).
        checkpoint: Checkpoint path, if any.
        output_format: table, json or csv.
        big: Lift the free-bit limit.
        out: Output file path; stdout when None.
        max_k, max_m: Bounds for ``sweep``.
    """
    command: str
    shapes: List[Shape] = field(default_factory=list)
    grid: Optional[GridSpec] = None
    triple: Optional[tuple] = None
    engine: Engine = Engine.PREFIX
    workers: int = 1
    shards: int = 1
    checkpoint: Optional[str] = None
    output_format: str = "table"
    big: bool = False
    out: Optional[str] = None
    max_k: int = 40
    max_m: int = 8

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command {self.command!r}")

    def all_shapes(self) -> List[Shape]:
        """Explicit shapes followed by grid shapes, without duplicates."""
        seen = []
        for shape in list(self.shapes) + (self.grid.shapes() if self.grid else []):
            if shape not in seen:
                seen.append(shape)
        return seen
