"""
File-backed repositories: the oracle sample cache and the results writer.
Infrastructure layer - implements the domain repository interfaces on the local filesystem.
"""
import csv
import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from src.domain.entities.experiment import BenchmarkRow, RunReport
from src.domain.entities.inference import Hyperbox, OptimizationRecord, WeightedSamples
from src.domain.errors import SchemaError
from src.domain.interfaces.repositories import IOracleSampleRepository, IResultsRepository

logger = logging.getLogger(__name__)

RESULTS_HEADER = "# r2omc-results v1"


def format_float(value: Optional[float]) -> str:
    """Shortest exact text for a float; blank for missing values."""
    if value is None:
        return ""
    return "%.17g" % float(value)


def _parse_float(text: str) -> Optional[float]:
    return float(text) if text != "" else None


def _write_table(path: Path, rows: Sequence[dict]) -> Path:
    columns: List[str] = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [format_float(row[c]) if isinstance(row.get(c), float) else row.get(c, "") for c in columns]
            )
    return path


class FileOracleSampleRepository(IOracleSampleRepository):
    """Reference samples stored as ``<problem>_d<D>_s<seed>.npy`` under a cache directory."""

    def __init__(self, cache_dir: str):
        self._cache_dir = Path(cache_dir)

    def _path(self, problem_id: str, dim: int, oracle_seed: int) -> Path:
        return self._cache_dir / f"{problem_id}_d{dim}_s{oracle_seed}.npy"

    def get(self, problem_id: str, dim: int, oracle_seed: int, count: int) -> Optional[np.ndarray]:
        path = self._path(problem_id, dim, oracle_seed)
        if not path.exists():
            return None
        try:
            samples = np.load(path, allow_pickle=False)
        except (OSError, ValueError) as e:
            logger.warning(f"Ignoring unreadable oracle cache {path}: {e}")
            return None
        if samples.ndim != 2 or samples.shape[0] < count:
            logger.info(f"Oracle cache {path} holds {samples.shape[0]} samples, {count} requested")
            return None
        logger.info(f"Loaded {count} oracle samples from {path}")
        return samples[:count]

    def save(self, problem_id: str, dim: int, oracle_seed: int, samples: np.ndarray) -> None:
        self._cache_dir.mkdir(parents=True, exist_ok=True)
        path = self._path(problem_id, dim, oracle_seed)
        np.save(path, np.asarray(samples, dtype=float), allow_pickle=False)
        logger.info(f"Cached {len(samples)} oracle samples at {path}")


class CsvResultsRepository(IResultsRepository):
    """Results CSV with a versioned header comment, JSON reports and CSV/JSON run exports."""

    def __init__(self, record_runtime: bool = True):
        self._record_runtime = record_runtime

    def _cells(self, row: BenchmarkRow) -> List[str]:
        runtime = row.runtime_seconds if self._record_runtime else None
        return [
            row.problem,
            row.method,
            str(row.dim),
            str(row.budget),
            str(row.rep),
            str(row.run_seed),
            format_float(row.c2st),
            format_float(runtime),
            str(row.vectorized_calls),
            str(row.instance_evaluations),
        ]

    def write_rows(self, rows: Sequence[BenchmarkRow], path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        ordered = sorted(rows, key=BenchmarkRow.sort_key)
        with open(path, "w", newline="") as handle:
            handle.write(RESULTS_HEADER + "\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(BenchmarkRow.COLUMNS)
            for row in ordered:
                writer.writerow(self._cells(row))
        logger.info(f"Wrote {len(ordered)} result rows to {path}")
        return path

    def read_rows(self, path: Path) -> List[BenchmarkRow]:
        with open(path, newline="") as handle:
            lines = [line for line in handle if not line.startswith("#")]
        reader = csv.DictReader(lines)
        if reader.fieldnames is None:
            return []
        missing = set(BenchmarkRow.COLUMNS) - set(reader.fieldnames)
        if missing:
            raise SchemaError(f"Results file {path} is missing columns: {', '.join(sorted(missing))}")
        rows = []
        for record in reader:
            rows.append(BenchmarkRow(
                problem=record["problem"],
                method=record["method"],
                dim=int(record["dim"]),
                budget=int(record["budget"]),
                rep=int(record["rep"]),
                run_seed=int(record["run_seed"]),
                c2st=_parse_float(record["c2st"]),
                runtime_seconds=_parse_float(record["runtime_seconds"]),
                vectorized_calls=int(record["vectorized_calls"]),
                instance_evaluations=int(record["instance_evaluations"]),
            ))
        return rows

    def write_report(self, report: RunReport, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = report.to_dict()
        if not self._record_runtime:
            for repetition in payload["repetitions"]:
                repetition["runtime_seconds"] = None
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        logger.info(f"Wrote run report to {path}")
        return path

    def write_run_exports(
        self,
        directory: Path,
        samples: np.ndarray,
        weighted: Optional[WeightedSamples],
        records: Sequence[OptimizationRecord],
        boxes: Sequence[Hyperbox],
    ) -> List[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        sample_rows = [{f"theta_{j}": float(v) for j, v in enumerate(theta)} for theta in np.atleast_2d(samples)]
        written.append(_write_table(directory / "samples.csv", sample_rows))
        if weighted is not None:
            written.append(_write_table(directory / "weighted_samples.csv", weighted.to_rows()))
        written.append(_write_table(directory / "records.csv", [r.to_row() for r in records]))
        boxes_path = directory / "boxes.json"
        boxes_path.write_text(json.dumps([b.to_dict() for b in boxes], indent=2) + "\n")
        written.append(boxes_path)
        logger.info(f"Exported {len(written)} files to {directory}")
        return written
