"""CSV and JSON output.

Floats are written with nine significant digits (``format(x, ".9g")``) so identical runs give
byte-identical files. Every file is written to a temporary sibling and renamed into place.
"""

from collections.abc import Iterable, Iterator, Mapping, Sequence
from contextlib import contextmanager
import csv
import json
import logging
from pathlib import Path
import tempfile
from typing import Any, TextIO

import numpy as np
import numpy.typing as npt

from rydberg_ssh.analysis import SweepResult
from rydberg_ssh.dynamics import PopulationTrajectory
from rydberg_ssh.sfi import SFITrace
from rydberg_ssh.spectral import DressedSpectrum

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".9g"

Cell = str | int | float


def format_float(value: float) -> str:
    """Format a float with nine significant digits; negative zero prints as ``0``."""
    return format(float(value) + 0.0, FLOAT_FORMAT)


def _cell(value: Cell) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(value)
    return format_float(float(value))


@contextmanager
def atomic_open(path: str | Path) -> Iterator[TextIO]:
    """
    Open a text file for writing that only appears at ``path`` once fully written.

    Raises:
        IOError: If the file cannot be written.
    """
    target = Path(path)
    with tempfile.NamedTemporaryFile(
        mode="w",
        encoding="utf-8",
        newline="",
        dir=target.parent,
        prefix=f".{target.name}.",
        suffix=".tmp",
        delete=False,
    ) as tmp:
        tmp_path = Path(tmp.name)
        try:
            yield tmp
        except BaseException:
            tmp.close()
            tmp_path.unlink(missing_ok=True)
            raise
    tmp_path.replace(target)
    logger.info("Wrote %s", target)


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> Path:
    """Write a CSV file with a header row."""
    target = Path(path)
    with atomic_open(target) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return target


def write_trajectory(traj: PopulationTrajectory, path: str | Path) -> Path:
    """
    Write a population trajectory as CSV, one row per time.

    Columns are ``t_us, p_<label>..., survival`` plus ``background_absolute`` when a
    background bin is tracked. ``p_*`` are written as stored (fractional after
    ``fractionalize``) while ``background_absolute`` is always the absolute decayed population
    1 - survival.
    """
    header = ["t_us", *(f"p_{label}" for label in traj.site_labels), "survival"]
    columns: list[npt.NDArray[np.float64]] = [
        traj.times,
        *traj.populations.T,
        traj.survival,
    ]
    if traj.background is not None:
        header.append("background_absolute")
        columns.append(traj.background)
    return write_rows(path, header, zip(*(column.tolist() for column in columns)))


def write_dressed(spectrum: DressedSpectrum, path: str | Path) -> Path:
    """Write each dressed state's energy and its bare-state weights |<ns|alpha>|^2."""
    header = ["state", "energy_khz", *(f"w_{label}" for label in spectrum.site_labels)]
    weights = spectrum.eigenvectors**2
    rows = (
        [alpha + 1, float(energy), *weights[:, alpha].tolist()]
        for alpha, energy in enumerate(spectrum.eigenvalues)
    )
    return write_rows(path, header, rows)


def write_sweep(result: SweepResult, path: str | Path) -> Path:
    """Write ``param_value, <observable columns...>``, one row per swept value."""
    header = ["param_value", *result.columns]
    rows = (
        [float(value), *(record[name] for name in result.columns)]
        for value, record in zip(result.parameter_values, result.observables)
    )
    return write_rows(path, header, rows)


def write_trace_csv(trace: SFITrace, path: str | Path) -> Path:
    """Write an SFI trace as ``t_us, signal``."""
    return write_rows(path, ["t_us", "signal"], zip(trace.times.tolist(), trace.signal.tolist()))


def write_long(
    path: str | Path,
    x: npt.ArrayLike,
    series: Mapping[str, npt.ArrayLike],
) -> Path:
    """
    Write plot-ready long format: one ``x, series, value`` row per point of every series.

    Raises:
        ValueError: If a series does not match the length of ``x``.
    """
    xs = np.asarray(x, dtype=np.float64)
    for name, values in series.items():
        if np.asarray(values).shape != xs.shape:
            raise ValueError(f"Series {name!r} does not match the x axis length {xs.size}")
    rows = (
        [float(xv), name, float(value)]
        for name, values in series.items()
        for xv, value in zip(xs, np.asarray(values, dtype=np.float64))
    )
    return write_rows(path, ["x", "series", "value"], rows)


def _json_ready(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, Path):
        return value.name
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    number = float(value)
    if not np.isfinite(number):
        return None
    # Same precision as the CSV tables.
    return float(format_float(number))


def write_summary(summary: Mapping[str, Any], path: str | Path) -> Path:
    """Write a machine-readable run summary as JSON with sorted keys."""
    target = Path(path)
    with atomic_open(target) as f:
        json.dump(_json_ready(summary), f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")
    return target
