"""
Verdict Record - outcome of checking one family's census against the formula.
"""
from dataclasses import dataclass
from typing import Any, Dict

from src.model.shape import Shape

CSV_COLUMNS = [
    "shape", "F", "delta", "k", "census_count", "formula_count",
    "match", "moment_ok", "engine", "elapsed_ms",
]


@dataclass(frozen=True)
class VerdictRecord:
    """
    Attributes:
        shape: The family verified.
        free_bits: F, the number of free parameter bits.
        census_count: Counted rank-delta members.
        formula_count: Conjectured rank-delta members.
        moment_ok: Whether the dual nullity-moment identity held.
        engine: Engine id used for the census.
        elapsed: Wall time in seconds.
    """
    shape: Shape
    free_bits: int
    census_count: int
    formula_count: int
    moment_ok: bool
    engine: str
    elapsed: float

    @property
    def match(self) -> bool:
        return self.census_count == self.formula_count

    @property
    def passed(self) -> bool:
        return self.match and self.moment_ok

    def to_dict(self) -> Dict[str, Any]:
        """Counts are written as decimal strings so no reader truncates them."""
        return {
            "shape": self.shape.format(),
            "F": self.free_bits,
            "census_count": str(self.census_count),
            "formula_count": str(self.formula_count),
            "match": self.match,
            "moment_ok": self.moment_ok,
            "engine": self.engine,
            "elapsed": self.elapsed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'VerdictRecord':
        record = cls(
            shape=Shape.parse(data["shape"]),
            free_bits=int(data["F"]),
            census_count=int(data["census_count"]),
            formula_count=int(data["formula_count"]),
            moment_ok=bool(data["moment_ok"]),
            engine=data["engine"],
            elapsed=float(data["elapsed"]),
        )
        if "match" in data and bool(data["match"]) != record.match:
            raise ValueError(f"Inconsistent match flag in record for {data['shape']}")
        return record

    def to_csv_row(self) -> Dict[str, Any]:
        return {
            "shape": self.shape.format(),
            "F": self.free_bits,
            "delta": self.shape.delta,
            "k": self.shape.k,
            "census_count": str(self.census_count),
            "formula_count": str(self.formula_count),
            "match": self.match,
            "moment_ok": self.moment_ok,
            "engine": self.engine,
            "elapsed_ms": round(self.elapsed * 1000, 3),
        }
