"""Sources of SFI basis traces."""

from collections.abc import Sequence
import logging
from pathlib import Path

import numpy.typing as npt

from rydberg_ssh.constants import DEFAULT_TRACE_WIDTH_US, QUANTUM_DEFECT_3S1
from rydberg_ssh.sfi import RampParams
from rydberg_ssh.traces.base import TraceSource
from rydberg_ssh.traces.local import DirectoryTraceSource, read_trace_csv
from rydberg_ssh.traces.synthetic import SyntheticTraceSource

logger = logging.getLogger(__name__)


def create_trace_source(
    site_labels: Sequence[int],
    basis_dir: str | Path | None = None,
    ramp: RampParams | None = None,
    width: float = DEFAULT_TRACE_WIDTH_US,
    grid: npt.ArrayLike | None = None,
    quantum_defect: float = QUANTUM_DEFECT_3S1,
) -> TraceSource:
    """
    Pick a basis source for a lattice.

    Args:
        site_labels: Principal quantum numbers of the lattice sites.
        basis_dir: Directory of ``<n>s.csv`` traces; when None the traces are synthesized.
        ramp: Field ramp for synthesized traces.
        width: Peak width in us for synthesized traces.
        grid: Detection grid in us for synthesized traces.
        quantum_defect: Quantum defect for synthesized traces.

    Returns:
        TraceSource: Directory source when a directory is given, else a synthetic source.
    """
    if basis_dir is not None:
        logger.info("Loading basis traces from %s", basis_dir)
        return DirectoryTraceSource(basis_dir, labels=[f"{n}s" for n in site_labels])

    logger.info("Synthesizing basis traces for %d states", len(site_labels))
    return SyntheticTraceSource(site_labels, ramp, width, grid, quantum_defect)


__all__ = [
    "DirectoryTraceSource",
    "SyntheticTraceSource",
    "TraceSource",
    "create_trace_source",
    "read_trace_csv",
]
