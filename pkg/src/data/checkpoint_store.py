"""
Checkpoint Store - persists completed shards of a parallel census.

The file is JSON with every count written as a decimal string, so it reads the
same on any machine regardless of byte order. Saves go to ``<path>.tmp`` first
and are moved into place with ``os.replace``.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List

from src.model.rank_histogram import RankHistogram
from src.model.shape import LAYOUT_VERSION, Shape

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "persym-census-checkpoint"


@dataclass
class Checkpoint:
    """
    Progress of one sharded census.

    Attributes:
        shape: Family being counted.
        shard_bits: Number of top canonical bits pinned per shard.
        engine: Engine id the shards ran with.
        layout_version: Canonical bit order the shard ids refer to.
        completed: Shard id to that shard's rank counts.
    """
    shape: Shape
    shard_bits: int
    engine: str
    layout_version: str = LAYOUT_VERSION
    completed: Dict[int, List[int]] = field(default_factory=dict)

    @property
    def shard_count(self) -> int:
        return 1 << self.shard_bits

    @property
    def shard_size(self) -> int:
        return 1 << (self.shape.free_bits - self.shard_bits)

    @property
    def pending(self) -> List[int]:
        return [i for i in range(self.shard_count) if i not in self.completed]

    @property
    def is_complete(self) -> bool:
        return len(self.completed) == self.shard_count

    def record(self, shard_id: int, counts: List[int]) -> None:
        self.completed[shard_id] = list(counts)

    def merged(self) -> RankHistogram:
        """Merge all completed shards; conservation is checked once every shard is in."""
        hist = RankHistogram.from_partials(
            self.shape, [self.completed[i] for i in sorted(self.completed)]
        )
        if self.is_complete:
            hist.check_conservation()
        return hist

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": CHECKPOINT_FORMAT,
            "layout_version": self.layout_version,
            "shape": self.shape.format(),
            "free_bits": self.shape.free_bits,
            "shard_bits": self.shard_bits,
            "shard_size": str(self.shard_size),
            "engine": self.engine,
            "completed": {
                str(i): [str(c) for c in counts] for i, counts in sorted(self.completed.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Checkpoint':
        return cls(
            shape=Shape.parse(data["shape"]),
            shard_bits=int(data["shard_bits"]),
            engine=str(data["engine"]),
            layout_version=str(data["layout_version"]),
            completed={
                int(i): [int(c) for c in counts] for i, counts in data["completed"].items()
            },
        )


class CheckpointStore:
    """Loads, validates and atomically saves a Checkpoint at one path."""

    class CheckpointError(RuntimeError):
        """Raised for unreadable, corrupt or mismatched checkpoint files."""
        def __init__(self, reason: str, path: str = None):
            self.reason = reason
            self.path = path
            detailed_msg = reason
            if path is not None:
                detailed_msg += f" [Checkpoint: {path}]"
            super().__init__(detailed_msg)

    def __init__(self, path: str):
        self.path = str(path)

    def exists(self) -> bool:
        return os.path.exists(self.path)

    def load(self) -> Checkpoint:
        """
        Read and structurally check the checkpoint file.

        Raises:
            CheckpointStore.CheckpointError: On any read, parse or consistency problem.
        """
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise self.CheckpointError(f"Cannot read checkpoint: {e}", self.path) from e
        except ValueError as e:
            raise self.CheckpointError(f"Checkpoint is not valid JSON: {e}", self.path) from e
        if not isinstance(data, dict) or data.get("format") != CHECKPOINT_FORMAT:
            raise self.CheckpointError("File is not a census checkpoint", self.path)
        try:
            checkpoint = Checkpoint.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            raise self.CheckpointError(f"Corrupt checkpoint: {e}", self.path) from e
        self._check_consistency(checkpoint, data)
        logger.info(
            f"Loaded checkpoint for {checkpoint.shape}: "
            f"{len(checkpoint.completed)}/{checkpoint.shard_count} shards done"
        )
        return checkpoint

    def _check_consistency(self, checkpoint: Checkpoint, data: Dict[str, Any]) -> None:
        if checkpoint.layout_version != LAYOUT_VERSION:
            raise self.CheckpointError(
                f"Checkpoint layout {checkpoint.layout_version!r} does not match "
                f"current layout {LAYOUT_VERSION!r}", self.path,
            )
        if int(data.get("free_bits", -1)) != checkpoint.shape.free_bits:
            raise self.CheckpointError("Recorded free bit count does not match the shape", self.path)
        if not 0 <= checkpoint.shard_bits <= checkpoint.shape.free_bits:
            raise self.CheckpointError(f"Invalid shard bits {checkpoint.shard_bits}", self.path)
        for shard_id, counts in checkpoint.completed.items():
            if not 0 <= shard_id < checkpoint.shard_count:
                raise self.CheckpointError(f"Shard id {shard_id} out of range", self.path)
            if len(counts) != checkpoint.shape.delta + 1 or any(c < 0 for c in counts):
                raise self.CheckpointError(f"Shard {shard_id} has malformed counts", self.path)
            if sum(counts) != checkpoint.shard_size:
                raise self.CheckpointError(
                    f"Shard {shard_id} counts sum to {sum(counts)}, "
                    f"expected {checkpoint.shard_size}", self.path,
                )

    def load_or_create(self, shape: Shape, shard_bits: int, engine: str) -> Checkpoint:
        """
        Resume the checkpoint at this path, or start a fresh one.

        Raises:
            CheckpointStore.CheckpointError: If an existing checkpoint belongs to
                another shape or shard partition.
        """
        if not self.exists():
            logger.info(f"No checkpoint at {self.path}; starting fresh")
            return Checkpoint(shape=shape, shard_bits=shard_bits, engine=engine)
        checkpoint = self.load()
        if checkpoint.shape != shape:
            raise self.CheckpointError(
                f"Checkpoint is for {checkpoint.shape}, not {shape}", self.path
            )
        if checkpoint.shard_bits != shard_bits:
            raise self.CheckpointError(
                f"Checkpoint uses {checkpoint.shard_count} shards, run asks for {1 << shard_bits}",
                self.path,
            )
        if checkpoint.engine != engine:
            # Engines produce identical shard counts; keep going with the new one.
            logger.info(f"Checkpoint engine {checkpoint.engine} differs from {engine}; resuming")
        return checkpoint

    def save(self, checkpoint: Checkpoint) -> None:
        """
        Save the checkpoint atomically.

        Raises:
            CheckpointStore.CheckpointError: If the file cannot be written. No
                ``.tmp`` file is left behind.
        """
        tmp_path = self.path + ".tmp"
        directory = os.path.dirname(os.path.abspath(self.path))
        try:
            os.makedirs(directory, exist_ok=True)
            with open(tmp_path, "w", encoding="utf-8") as f:
                json.dump(checkpoint.to_dict(), f, indent=2, sort_keys=True)
            os.replace(tmp_path, self.path)
        except OSError as e:
            logger.error(f"Failed to save checkpoint {self.path}: {e}")
            try:
                os.remove(tmp_path)
            except OSError:
                pass
            raise self.CheckpointError(f"Cannot write checkpoint: {e}", self.path) from e
        logger.debug(
            f"Checkpoint saved: {len(checkpoint.completed)}/{checkpoint.shard_count} shards"
        )
