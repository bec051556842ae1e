"""
Census Runner - sharded, optionally parallel and resumable censuses.

The parameter space is split by the top log2(shards) canonical bits. Each
shard runs a census kernel on its own process with its own EchelonState; the
collector adds the partial histograms and, when a checkpoint path is given,
saves after every finished shard so a restarted run skips them.
"""
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, List, Optional

from tqdm import tqdm

from src.data.checkpoint_store import Checkpoint, CheckpointStore
from src.model.rank_histogram import Engine, RankHistogram, ShardSpec
from src.model.shape import Shape
from src.model.verdict_record import VerdictRecord
from src.services.census_engine import CensusEngine, shard_counts

logger = logging.getLogger(__name__)

ShardCallback = Callable[[int, List[int]], None]


class CensusRunner:
    """
    Runs one family census as a set of shards.

    Args:
        shards: Number of shards, a power of two no larger than 2^F.
        workers: Worker processes; 1 runs every shard in this process.
        checkpoint_path: Where to persist finished shards, if anywhere.
        engine: Kernel used for each shard.
        progress: Show a tqdm bar on stderr.
        on_shard_done: Called with (shard id, counts) after each shard is recorded.
    """

    def __init__(self, shards: int = 1, workers: int = 1, checkpoint_path: Optional[str] = None,
                 engine: Engine = Engine.PREFIX, progress: bool = False,
                 free_bit_limit: Optional[int] = None, allow_big: bool = False,
                 on_shard_done: Optional[ShardCallback] = None):
        if shards < 1 or shards & (shards - 1):
            raise ValueError(f"Shard count must be a power of two, got {shards}")
        if workers < 1:
            raise ValueError(f"Worker count must be >= 1, got {workers}")
        self.shards = shards
        self.workers = workers
        self.checkpoint_path = checkpoint_path
        self.engine = engine
        self.progress = progress
        self.limits = CensusEngine(free_bit_limit, allow_big)
        self.on_shard_done = on_shard_done

    @property
    def shard_bits(self) -> int:
        return self.shards.bit_length() - 1

    def _open_checkpoint(self, shape: Shape):
        if self.checkpoint_path is None:
            return None, Checkpoint(shape=shape, shard_bits=self.shard_bits, engine=self.engine.value)
        store = CheckpointStore(self.checkpoint_path)
        return store, store.load_or_create(shape, self.shard_bits, self.engine.value)

    def run(self, shape: Shape) -> RankHistogram:
        """
        Census ``shape`` shard by shard and return the merged histogram.

        Raises:
            CensusEngine.LimitError: If F is over the limit without override.
            CheckpointStore.CheckpointError: If the checkpoint does not fit this run
                or cannot be written.
        """
        self.limits.check_limit(shape.free_bits, shape.format())
        if self.shard_bits > shape.free_bits:
            raise ValueError(f"{self.shards} shards exceed 2^{shape.free_bits} assignments of {shape}")
        store, checkpoint = self._open_checkpoint(shape)
        if store is not None:
            # Fail on an unwritable path before any shard runs.
            store.save(checkpoint)
        pending = checkpoint.pending
        logger.info(
            f"Sharded census of {shape}: {self.shards} shards ({len(pending)} pending), "
            f"{self.workers} worker(s), {self.engine.value} engine"
        )
        started = time.perf_counter()

        def complete(shard_id: int, counts: List[int], bar) -> None:
            checkpoint.record(shard_id, counts)
            if store is not None:
                store.save(checkpoint)
            bar.update(1)
            logger.debug(f"Shard {shard_id} of {shape} done: {counts}")
            if self.on_shard_done is not None:
                self.on_shard_done(shard_id, counts)

        specs = [ShardSpec(self.shard_bits, shard_id, self.engine) for shard_id in pending]
        show_bar = self.progress and sys.stderr.isatty()
        with tqdm(total=self.shards, initial=self.shards - len(pending), unit="shard",
                  desc=shape.format(), disable=not show_bar) as bar:
            if self.workers == 1 or len(specs) <= 1:
                for spec in specs:
                    complete(spec.shard_id, shard_counts(shape, spec), bar)
            else:
                executor = ProcessPoolExecutor(max_workers=min(self.workers, len(specs)))
                try:
                    futures = {executor.submit(shard_counts, shape, spec): spec for spec in specs}
                    for future in as_completed(futures):
                        complete(futures[future].shard_id, future.result(), bar)
                except BaseException:
                    executor.shutdown(wait=False, cancel_futures=True)
                    raise
                executor.shutdown(wait=True)

        hist = checkpoint.merged()
        logger.info(f"Sharded census of {shape} finished in {time.perf_counter() - started:.2f}s")
        return hist

    def verify(self, shape: Shape) -> VerdictRecord:
        started = time.perf_counter()
        hist = self.run(shape)
        engine_id = self.engine.value if self.shards == 1 and self.workers == 1 else (
            f"{self.engine.value}/{self.shards}x{self.workers}"
        )
        return CensusEngine.verdict_from_histogram(hist, engine_id, started)


def census_parallel(shape: Shape, shards: int = 1, workers: int = 1,
                    checkpoint_path: Optional[str] = None, engine: Engine = Engine.PREFIX,
                    progress: bool = False, free_bit_limit: Optional[int] = None,
                    allow_big: bool = False) -> RankHistogram:
    """Sharded census; the result does not depend on shard or worker count."""
    runner = CensusRunner(shards, workers, checkpoint_path, engine, progress,
                          free_bit_limit, allow_big)
    return runner.run(shape)
