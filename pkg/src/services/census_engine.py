"""
Census Engine - exact rank counts over a family's full parameter space.

Two engines produce the same histogram:

- naive: materialize every assignment and compute its rank from scratch;
- prefix: walk the parameter bits from the highest down, absorbing each
  matrix row into a shared EchelonState the moment its lowest bit is fixed,
  and undo on backtrack, so siblings share all elimination work above them.

Both work on a ShardSpec so the parallel runner can hand out slices with the
top canonical bits pinned.
"""
import logging
import time
from typing import List, Optional

from src.data.config_manager import resolve_free_bit_limit
from src.model.bit_matrix import BitMatrix, rank, rank_of_rows
from src.model.echelon_state import EchelonState
from src.model.parameter_vector import ParameterVector
from src.model.rank_histogram import Engine, RankHistogram, ShardSpec
from src.model.shape import Shape
from src.model.verdict_record import VerdictRecord
from src.services.family_builder import (
    build_example_matrix, example_bit_count, example_shape, materialize, rearrange_transpose,
)
from src.services.formulas import conjecture_count
from src.utils.bits import low_mask

logger = logging.getLogger(__name__)


# ==================== Shard kernels ====================
# Top-level functions so worker processes can unpickle them.

def naive_shard_counts(shape: Shape, spec: ShardSpec) -> List[int]:
    """Rank counts over one shard, materializing every assignment."""
    spec.validate(shape)
    counts = [0] * (shape.delta + 1)
    pinned = spec.pinned_bits(shape)
    for low in range(1 << (shape.free_bits - spec.fixed_prefix_bits)):
        mat = materialize(ParameterVector(shape, pinned | low))
        counts[rank(mat)] += 1
    return counts


def prefix_shard_counts(shape: Shape, spec: ShardSpec) -> List[int]:
    """
    Rank counts over one shard by depth-first assignment of parameter bits,
    highest first.

    The row starting at bit ``first`` reads bits first .. first+k-1, so it is
    complete once bit ``first`` is fixed. Each recursion level therefore
    assigns every bit from one row's ``first`` up to the previous row's and
    absorbs that row. Pinned shard bits are the top of the walk and are
    shared by the whole shard.

    The last two rows never touch the journal: the second-to-last residue is
    carried alongside the state, and the free low bits of the last row are
    counted by solving a linear system instead of enumerating them.
    """
    spec.validate(shape)
    free = shape.free_bits - spec.fixed_prefix_bits
    pinned = spec.pinned_bits(shape)
    mask = low_mask(shape.k)

    # (first, free bits in the level, pinned bits in the level), top row first
    firsts = sorted((first for _, _, first in shape.row_spans()), reverse=True)
    levels = []
    for first, top in zip(firsts, [shape.free_bits] + firsts[:-1]):
        levels.append((
            first,
            max(0, min(top, free) - first),
            pinned & (low_mask(top) ^ low_mask(first)),
        ))
    last = len(levels) - 1

    counts = [0] * (shape.delta + 1)
    state = EchelonState(shape.k)

    def count_last_row(assigned: int, extra: int) -> None:
        _, n_free, fixed = levels[last]
        known = (assigned | fixed) & mask
        base = state.rank + (extra != 0)
        if n_free <= 2:
            extra_col = extra.bit_length() - 1
            for low in range(1 << n_free):
                row = state.reduce(known | low)
                if extra and (row >> extra_col) & 1:
                    row ^= extra
                counts[base + (row != 0)] += 1
            return
        images = [_residue(state, 1 << i, extra) for i in range(n_free)]
        image_rank = rank_of_rows(images)
        target = _residue(state, known, extra)
        dependent = 0
        if rank_of_rows(images + [target]) == image_rank:
            dependent = 1 << (n_free - image_rank)
        counts[base] += dependent
        counts[base + 1] += (1 << n_free) - dependent

    def descend(level: int, assigned: int) -> None:
        first, n_free, fixed = levels[level]
        if level == last - 1:
            for low in range(1 << n_free):
                value = assigned | fixed | (low << first)
                count_last_row(value, state.reduce((value >> first) & mask))
            return
        for low in range(1 << n_free):
            value = assigned | fixed | (low << first)
            mark = state.absorb_row((value >> first) & mask)
            descend(level + 1, value)
            state.undo_to(mark)

    if last == 0:
        count_last_row(0, 0)
    else:
        descend(0, 0)
    return counts


def _residue(state: EchelonState, row: int, extra: int) -> int:
    """Reduce ``row`` against the state's pivots plus one extra reduced row."""
    row = state.reduce(row)
    if extra and (row >> (extra.bit_length() - 1)) & 1:
        row ^= extra
    return row


SHARD_KERNELS = {
    Engine.NAIVE: naive_shard_counts,
    Engine.PREFIX: prefix_shard_counts,
}


def shard_counts(shape: Shape, spec: ShardSpec) -> List[int]:
    """Dispatch a shard to the kernel named by its engine."""
    try:
        kernel = SHARD_KERNELS[spec.engine]
    except KeyError:
        raise ValueError(f"Engine {spec.engine.value!r} cannot run shards") from None
    return kernel(shape, spec)


# ==================== Dual moment ====================

def dual_moment_rhs(shape: Shape) -> int:
    """
    sum over v in F2^delta of 2^(F - r(v)), where r(v) is the rank of the k
    linear conditions v^T M(alpha) = 0 on the F parameter bits.

    Row (j, i) reads bits first .. first+k-1, so column c of v^T M is the
    parity of bits {first_r + c : v_r = 1}. The condition for column c is
    therefore the base vector sum_r v_r 2^first_r shifted left by c.
    """
    free_bits, k = shape.free_bits, shape.k
    firsts = [first for _, _, first in shape.row_spans()]
    total = 0
    for v in range(1 << shape.delta):
        base = 0
        for r, first in enumerate(firsts):
            if (v >> r) & 1:
                base |= 1 << first
        conditions = BitMatrix(tuple(base << c for c in range(k)), free_bits)
        total += 1 << (free_bits - rank(conditions))
    return total


def dual_moment_check(shape: Shape, hist: RankHistogram) -> bool:
    """
    Compare the histogram's left-nullity moment sum_r counts[r] 2^(delta-r)
    with the same quantity computed from the linear conditions alone.
    """
    if hist.shape != shape:
        raise ValueError(f"Histogram is for {hist.shape}, not {shape}")
    lhs = hist.nullity_moment()
    rhs = dual_moment_rhs(shape)
    if lhs != rhs:
        logger.warning(f"Dual moment mismatch for {shape}: histogram {lhs}, conditions {rhs}")
    return lhs == rhs


# ==================== Engine ====================

class CensusEngine:
    """
    Runs whole-family censuses under a free-bit limit.

    The limit keeps accidental runs of 2^F matrices from starting; passing
    ``allow_big=True`` lifts it.
    """

    class LimitError(RuntimeError):
        """Raised when F exceeds the configured limit without an override."""
        def __init__(self, free_bits: int, limit: int, subject: str = None):
            self.free_bits = free_bits
            self.limit = limit
            self.subject = subject
            detailed_msg = f"F={free_bits} exceeds the free-bit limit {limit}"
            if subject is not None:
                detailed_msg = f"{subject}: {detailed_msg}"
            detailed_msg += (
                f" (2^{free_bits} matrices); pass --big or raise PERSYM_FREE_BIT_LIMIT to run it"
            )
            super().__init__(detailed_msg)

    def __init__(self, free_bit_limit: Optional[int] = None, allow_big: bool = False):
        self.free_bit_limit = resolve_free_bit_limit(free_bit_limit)
        self.allow_big = allow_big

    def check_limit(self, free_bits: int, subject: str = None) -> None:
        if free_bits > self.free_bit_limit and not self.allow_big:
            raise self.LimitError(free_bits, self.free_bit_limit, subject)

    def census(self, shape: Shape, engine: Engine = Engine.PREFIX) -> RankHistogram:
        """Full-family census with the chosen engine."""
        self.check_limit(shape.free_bits, shape.format())
        logger.info(f"Census of {shape} (F={shape.free_bits}) with {engine.value} engine")
        started = time.perf_counter()
        counts = shard_counts(shape, ShardSpec(0, 0, engine))
        hist = RankHistogram(shape, counts).check_conservation()
        logger.debug(f"Census of {shape} done in {time.perf_counter() - started:.3f}s")
        return hist

    def census_naive(self, shape: Shape) -> RankHistogram:
        return self.census(shape, Engine.NAIVE)

    def census_prefix_sharing(self, shape: Shape) -> RankHistogram:
        return self.census(shape, Engine.PREFIX)

    def census_construction(self, m: int, delta: int, k: int) -> RankHistogram:
        """
        Rank counts of the example matrices, each taken through the
        rearranged transpose, tallied against the example shape.
        """
        width = example_bit_count(m, delta, k)
        self.check_limit(width, f"example m={m} delta={delta} k={k}")
        shape = example_shape(m, delta, k)
        logger.info(f"Construction census for m={m} delta={delta} k={k} ({shape}, {width} bits)")
        counts = [0] * (delta + 1)
        for bits in range(1 << width):
            counts[rank(rearrange_transpose(build_example_matrix(m, delta, k, bits), m))] += 1
        return RankHistogram(shape, counts).check_conservation()

    def verify_conjecture(self, shape: Shape, engine: Engine = Engine.PREFIX) -> VerdictRecord:
        """Census the family and compare its full-rank count with the conjecture."""
        started = time.perf_counter()
        hist = self.census(shape, engine)
        return self.verdict_from_histogram(hist, engine.value, started)

    @staticmethod
    def verdict_from_histogram(hist: RankHistogram, engine_id: str,
                               started: float) -> VerdictRecord:
        shape = hist.shape
        formula = conjecture_count(shape)
        moment_ok = dual_moment_check(shape, hist)
        record = VerdictRecord(
            shape=shape,
            free_bits=shape.free_bits,
            census_count=hist.full_rank,
            formula_count=formula,
            moment_ok=moment_ok,
            engine=engine_id,
            elapsed=time.perf_counter() - started,
        )
        level = logging.INFO if record.passed else logging.WARNING
        logger.log(level, f"Verdict {shape}: census={record.census_count} "
                          f"formula={formula} match={record.match} moment_ok={moment_ok}")
        return record


# ==================== Convenience functions ====================

def census_naive(shape: Shape, free_bit_limit: int = None, allow_big: bool = False) -> RankHistogram:
    return CensusEngine(free_bit_limit, allow_big).census_naive(shape)


def census_prefix_sharing(shape: Shape, free_bit_limit: int = None,
                          allow_big: bool = False) -> RankHistogram:
    return CensusEngine(free_bit_limit, allow_big).census_prefix_sharing(shape)


def census_construction(m: int, delta: int, k: int, free_bit_limit: int = None,
                        allow_big: bool = False) -> RankHistogram:
    return CensusEngine(free_bit_limit, allow_big).census_construction(m, delta, k)


def verify_conjecture(shape: Shape, engine: Engine = Engine.PREFIX, free_bit_limit: int = None,
                      allow_big: bool = False) -> VerdictRecord:
    return CensusEngine(free_bit_limit, allow_big).verify_conjecture(shape, engine)


def full_rank_fraction(hist: RankHistogram):
    """counts[delta] / 2^F as a reduced Fraction."""
    return hist.full_rank_fraction()
