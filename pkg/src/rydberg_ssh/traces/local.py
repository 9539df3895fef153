"""Basis traces stored as CSV files in a local directory."""

from collections.abc import Sequence
import csv
import logging
from pathlib import Path
from typing import Any

import numpy as np
from typing_extensions import override

from rydberg_ssh.sfi import SFITrace
from rydberg_ssh.traces.base import TraceSource

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("t_us", "signal")


def read_trace_csv(path: str | Path) -> SFITrace:
    """
    Read one ``t_us, signal`` CSV file; the label is the file stem.

    Raises:
        ValueError: If the header or a value is malformed.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    times: list[float] = []
    signal: list[float] = []
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(TRACE_COLUMNS)}, got {header}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t, s = (float(value) for value in row)
            except ValueError as e:
                raise ValueError(f"{path}:{line_number}: malformed row {row}: {e}") from e
            times.append(t)
            signal.append(s)

    logger.debug("Read %d samples from %s", len(times), path)
    return SFITrace(times=np.asarray(times), signal=np.asarray(signal), label=path.stem)


class DirectoryTraceSource(TraceSource):
    """
    Load basis traces from ``<label>.csv`` files in a directory.

    With explicit labels, exactly those files are read in the given order; otherwise every
    CSV file in the directory is read in name order.
    """

    def __init__(self, directory: str | Path, labels: Sequence[str] | None = None) -> None:
        """
        Initialize DirectoryTraceSource.

        Args:
            directory: Directory holding the trace files.
            labels: Trace labels to load (e.g. ``["58s", "59s"]``), or None for all files.

        Raises:
            FileNotFoundError: If the directory or a requested trace file does not exist.
            ValueError: If the path is not a directory.
        """
        self.directory = Path(directory)

        if not self.directory.exists():
            raise FileNotFoundError(f"Trace directory not found: {directory}")

        if not self.directory.is_dir():
            raise ValueError(f"Path is not a directory: {directory}")

        if labels is None:
            self.paths = sorted(self.directory.glob("*.csv"))
        else:
            self.paths = [self.directory / f"{label}.csv" for label in labels]
            missing = [str(p) for p in self.paths if not p.is_file()]
            if missing:
                raise FileNotFoundError(f"Trace files not found: {', '.join(missing)}")

        logger.info("DirectoryTraceSource initialized for: %s", self.directory)

    @override
    def get_traces(self) -> list[SFITrace]:
        """
        Read every trace file.

        Raises:
            IOError: If a file cannot be read or parsed.
        """
        try:
            return [read_trace_csv(path) for path in self.paths]
        except (OSError, ValueError) as e:
            logger.exception("Error reading traces from %s: %s", self.directory, e)
            raise OSError(f"Failed to read traces from {self.directory}: {e}") from e

    @override
    def get_metadata(self) -> dict[str, Any]:
        """Return the directory and trace labels."""
        return {
            "labels": [path.stem for path in self.paths],
            "source_type": "directory",
            "path": str(self.directory),
        }
