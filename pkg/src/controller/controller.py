import logging
import os
import sys
import time
from typing import List, Optional

from src.data.checkpoint_store import CheckpointStore
from src.data.config_manager import ConfigManager
from src.data.report_writer import ReportWriter
from src.model.run_config import RunConfig
from src.model.shape import FamilyCard, Shape
from src.model.verdict_record import VerdictRecord
from src.services import formulas
from src.services.census_engine import CensusEngine, dual_moment_check
from src.services.census_runner import CensusRunner
from src.services.family_builder import (
    DimensionError, example_bit_count, example_index_layout, example_shape,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_REFUSED = 2


class Controller:
    """
    Runs one command per call and maps its outcome to an exit status:
    0 when everything checked out, 1 on a mismatch, 2 on a refusal or
    unusable input.
    """

    def __init__(self, config_manager: Optional[ConfigManager] = None, progress: bool = True):
        self.config_manager = config_manager or ConfigManager()
        self.progress = progress
        logger.debug("Controller initialized.")

    # --------------------------- Helpers ---------------------------

    def _runner(self, config: RunConfig, checkpoint: Optional[str] = None) -> CensusRunner:
        return CensusRunner(
            shards=config.shards,
            workers=config.workers,
            checkpoint_path=checkpoint,
            engine=config.engine,
            progress=self.progress,
            free_bit_limit=self.config_manager.free_bit_limit,
            allow_big=config.big,
        )

    def _limits(self, config: RunConfig) -> CensusEngine:
        return CensusEngine(self.config_manager.free_bit_limit, config.big)

    @staticmethod
    def _checkpoint_for(config: RunConfig, shape: Shape, shape_count: int) -> Optional[str]:
        """Use the checkpoint path as given for one shape, suffixed per shape otherwise."""
        if config.checkpoint is None or shape_count == 1:
            return config.checkpoint
        root, ext = os.path.splitext(config.checkpoint)
        label = "-".join(str(h) for h in shape.heights)
        return f"{root}.{label}x{shape.k}{ext}"

    @staticmethod
    def _refuse(message: str) -> int:
        logger.error(message)
        print(f"error: {message}", file=sys.stderr)
        return EXIT_REFUSED

    # --------------------------- formula ---------------------------

    def cmd_formula(self, config: RunConfig) -> int:
        """Print the conjectured count of one family in power-of-two style."""
        if config.triple is not None:
            try:
                shape = example_shape(*config.triple)
            except DimensionError as e:
                return self._refuse(str(e))
        elif len(config.shapes) == 1:
            shape = config.shapes[0]
        else:
            return self._refuse("formula takes one shape or an (m, delta, k) triple")

        card = FamilyCard.for_shape(shape)
        value = formulas.conjecture_count(shape)
        odd, exponent = formulas.split_power_of_two(value)
        factors = formulas.odd_factors(shape)
        proven = formulas.theorem_count(shape)
        lines = [str(card), f"conjecture: {formulas.power_of_two_style(value)}"]
        lines.append(
            f"factored: 2^{exponent}"
            f" · {' · '.join(str(f) for f in factors)}"
        )
        payload = {
            "shape": shape.format(),
            "m": shape.m,
            "delta": shape.delta,
            "k": shape.k,
            "F": shape.free_bits,
            "case": card.case_tag.value,
            "conjecture": str(value),
            "odd_part": str(odd),
            "power_of_two": exponent,
            "odd_factors": [str(f) for f in factors],
            "theorem_count": None if proven is None else str(proven),
        }
        if proven is not None:
            lines.append(f"proven closed form ({card.case_tag.value}): {proven}")
        if shape.m == 3 or formulas.is_recursion_case(shape):
            base_delta = shape.delta - shape.m + 3
            if base_delta >= 3:
                check = formulas.triple_expansion_check(base_delta, shape.k)
                lines.append(f"three-block expansions: {check.summary()}")
                payload["three_block_printed_sum_matches"] = check.sum_matches
                payload["three_block_printed_bracket_matches"] = check.bracket_matches
        if shape.delta == shape.k:
            fraction = formulas.invertible_fraction(shape.m)
            lines.append(f"invertible fraction: {fraction.numerator}/{fraction.denominator}")
            payload["invertible_fraction"] = f"{fraction.numerator}/{fraction.denominator}"
        ReportWriter(config.output_format, config.out).write_summary(payload, lines)
        return EXIT_OK

    # --------------------------- verify ---------------------------

    def cmd_verify(self, config: RunConfig) -> int:
        """Census every requested shape and compare with the conjecture."""
        shapes = config.all_shapes()
        if not shapes:
            return self._refuse("verify needs at least one shape or --grid")
        limits = self._limits(config)
        try:
            for shape in shapes:
                limits.check_limit(shape.free_bits, shape.format())
        except CensusEngine.LimitError as e:
            return self._refuse(str(e))

        records: List[VerdictRecord] = []
        try:
            for shape in shapes:
                runner = self._runner(config, self._checkpoint_for(config, shape, len(shapes)))
                records.append(runner.verify(shape))
        except CheckpointStore.CheckpointError as e:
            return self._refuse(str(e))

        ReportWriter(config.output_format, config.out).write_verdicts(records)
        failed = [record.shape.format() for record in records if not record.passed]
        if failed:
            logger.warning(f"Verification failed for: {', '.join(failed)}")
            return EXIT_MISMATCH
        logger.info(f"All {len(records)} shape(s) verified")
        return EXIT_OK

    # --------------------------- census ---------------------------

    def cmd_census(self, config: RunConfig) -> int:
        """Emit the full rank histogram of one shape."""
        if len(config.shapes) != 1:
            return self._refuse("census takes exactly one shape")
        shape = config.shapes[0]
        try:
            hist = self._runner(config, config.checkpoint).run(shape)
        except CensusEngine.LimitError as e:
            return self._refuse(str(e))
        except CheckpointStore.CheckpointError as e:
            return self._refuse(str(e))
        moment_ok = dual_moment_check(shape, hist)
        engine_id = config.engine.value
        ReportWriter(config.output_format, config.out).write_histogram(hist, moment_ok, engine_id)
        return EXIT_OK if moment_ok and hist.is_conserved() else EXIT_MISMATCH

    # --------------------------- example ---------------------------

    def cmd_example(self, config: RunConfig) -> int:
        """
        Show the example construction for (m, delta, k), its family shape and
        count, and when small enough compare its census with the family census.
        """
        m, delta, k = config.triple
        try:
            width = example_bit_count(m, delta, k)
        except DimensionError as e:
            return self._refuse(str(e))
        shape = example_shape(m, delta, k)
        value = formulas.conjecture_count(shape)
        lines = [f"example m={m} delta={delta} k={k}: {k}x{delta} matrix over alpha_1..alpha_{width}"]
        for row in example_index_layout(m, delta, k):
            lines.append("  " + " ".join(f"a{i}" for i in row))
        lines.append(f"transpose rearranges into {shape} (F={shape.free_bits})")
        lines.append(f"conjecture: {formulas.power_of_two_style(value)}")
        payload = {
            "m": m, "delta": delta, "k": k, "shape": shape.format(), "F": shape.free_bits,
            "conjecture": str(value), "census": "skipped",
        }

        limits = self._limits(config)
        exit_status = EXIT_OK
        try:
            limits.check_limit(width, f"example m={m} delta={delta} k={k}")
        except CensusEngine.LimitError as e:
            lines.append(f"census skipped: {e}")
        else:
            started = time.perf_counter()
            via_construction = limits.census_construction(m, delta, k)
            direct = self._runner(config).run(shape)
            agree = via_construction.counts == direct.counts
            lines.append("construction census: " + ", ".join(
                f"rank {r}: {c}" for r, c in enumerate(via_construction.counts)))
            lines.append("family census:       " + ", ".join(
                f"rank {r}: {c}" for r, c in enumerate(direct.counts)))
            lines.append(f"census paths {'agree' if agree else 'DISAGREE'}; "
                         f"full rank {direct.full_rank} vs formula {value}")
            payload.update({
                "census": "run",
                "construction_counts": [str(c) for c in via_construction.counts],
                "family_counts": [str(c) for c in direct.counts],
                "paths_agree": agree,
                "match": direct.full_rank == value,
                "elapsed": time.perf_counter() - started,
            })
            if not agree or direct.full_rank != value:
                exit_status = EXIT_MISMATCH
        ReportWriter(config.output_format, config.out).write_summary(payload, lines)
        return exit_status

    # --------------------------- sweep ---------------------------

    def cmd_sweep(self, config: RunConfig) -> int:
        """Run the exact identity checks between closed forms."""
        report = formulas.identity_sweep(max_k=config.max_k, max_m=config.max_m)
        lines = [
            f"identity sweep k<={report.max_k}, m<={report.max_m}: {report.checked} checks, "
            f"{len(report.failures)} failures",
            f"three-block printed sum form differs in {report.triple_sum_mismatches}/"
            f"{report.triple_checks} cases",
            f"three-block printed bracket form differs in {report.triple_bracket_mismatches}/"
            f"{report.triple_checks} cases",
            f"three-block sign-corrected sum form differs in {report.triple_corrected_mismatches}/"
            f"{report.triple_checks} cases",
        ]
        lines.extend(f"FAILED {failure}" for failure in report.failures)
        payload = {
            "max_k": report.max_k,
            "max_m": report.max_m,
            "checked": report.checked,
            "failures": report.failures,
            "ok": report.ok,
            "triple_checks": report.triple_checks,
            "triple_sum_mismatches": report.triple_sum_mismatches,
            "triple_bracket_mismatches": report.triple_bracket_mismatches,
            "triple_corrected_mismatches": report.triple_corrected_mismatches,
        }
        ReportWriter(config.output_format, config.out).write_summary(payload, lines)
        return EXIT_OK if report.ok else EXIT_MISMATCH

    def run(self, config: RunConfig) -> int:
        handler = getattr(self, f"cmd_{config.command}")
        return handler(config)
