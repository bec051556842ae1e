"""
Report Writer - renders command results as a table, JSON or CSV.

Tables go through rich; JSON and CSV are meant for machines, so every count
is written as a decimal string.
"""
import csv
import json
import logging
import sys
from contextlib import contextmanager
from typing import Any, Dict, Iterable, List, Optional, TextIO

from rich.console import Console
from rich.table import Table

from src.model.rank_histogram import RankHistogram
from src.model.verdict_record import CSV_COLUMNS, VerdictRecord

logger = logging.getLogger(__name__)

FORMATS = ("table", "json", "csv")


class ReportWriter:
    """
    Writes one command's output to stdout or to a file.

    Args:
        fmt: One of "table", "json", "csv".
        out_path: Write here instead of stdout.
    """

    def __init__(self, fmt: str = "table", out_path: Optional[str] = None):
        if fmt not in FORMATS:
            raise ValueError(f"Unknown output format {fmt!r}; expected one of {FORMATS}")
        self.fmt = fmt
        self.out_path = out_path

    @contextmanager
    def _stream(self):
        if self.out_path is None:
            yield sys.stdout
            return
        with open(self.out_path, "w", encoding="utf-8", newline="") as f:
            yield f
        logger.info(f"Wrote {self.fmt} report to {self.out_path}")

    @staticmethod
    def _console(stream: TextIO) -> Console:
        return Console(file=stream, highlight=False, markup=False, emoji=False, soft_wrap=True)

    def _emit_json(self, payload: Any) -> None:
        with self._stream() as stream:
            json.dump(payload, stream, indent=2)
            stream.write("\n")

    def _emit_csv(self, columns: List[str], rows: Iterable[Dict[str, Any]]) -> None:
        with self._stream() as stream:
            writer = csv.DictWriter(stream, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)

    def _emit_lines(self, lines: Iterable[str]) -> None:
        with self._stream() as stream:
            console = self._console(stream)
            for line in lines:
                console.print(line)

    # ==================== Verdicts ====================

    def write_verdicts(self, records: List[VerdictRecord]) -> None:
        if self.fmt == "json":
            self._emit_json([record.to_dict() for record in records])
            return
        if self.fmt == "csv":
            self._emit_csv(CSV_COLUMNS, (record.to_csv_row() for record in records))
            return
        table = Table(title="Conjecture verification")
        for column in ("shape", "F", "census", "formula", "match", "moment", "engine", "ms"):
            table.add_column(column, justify="right" if column in ("F", "census", "formula", "ms") else "left")
        for record in records:
            table.add_row(
                record.shape.format(), str(record.free_bits), str(record.census_count),
                str(record.formula_count), "yes" if record.match else "NO",
                "yes" if record.moment_ok else "NO", record.engine,
                f"{record.elapsed * 1000:.1f}",
            )
        passed = sum(record.passed for record in records)
        with self._stream() as stream:
            console = self._console(stream)
            console.print(table)
            console.print(f"{passed}/{len(records)} shapes passed")

    # ==================== Histograms ====================

    def write_histogram(self, hist: RankHistogram, moment_ok: bool, engine: str) -> None:
        if self.fmt == "json":
            payload = hist.to_dict()
            payload.update({
                "total": str(hist.total),
                "conserved": hist.is_conserved(),
                "moment_ok": moment_ok,
                "engine": engine,
            })
            self._emit_json(payload)
            return
        if self.fmt == "csv":
            self._emit_csv(["rank", "count"], (
                {"rank": r, "count": str(c)} for r, c in enumerate(hist.counts)
            ))
            return
        lines = [f"census {hist.shape.format()} (F={hist.shape.free_bits}, engine={engine})"]
        lines.extend(f"rank {r}: {c}" for r, c in enumerate(hist.counts))
        lines.append(
            f"total: {hist.total} = 2^{hist.shape.free_bits}"
            if hist.is_conserved() else f"total: {hist.total} != 2^{hist.shape.free_bits}"
        )
        lines.append(f"dual moment: {'ok' if moment_ok else 'MISMATCH'}")
        self._emit_lines(lines)

    # ==================== Free-form results ====================

    def write_summary(self, payload: Dict[str, Any], lines: List[str]) -> None:
        """
        Emit a single result: ``lines`` for tables, ``payload`` for JSON, and
        the payload's scalar fields as one CSV row.
        """
        if self.fmt == "json":
            self._emit_json(payload)
        elif self.fmt == "csv":
            scalars = {key: value for key, value in payload.items()
                       if not isinstance(value, (dict, list))}
            self._emit_csv(list(scalars), [scalars])
        else:
            self._emit_lines(lines)
