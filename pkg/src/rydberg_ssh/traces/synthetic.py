"""Basis traces generated from the field-ionization model."""

from collections.abc import Sequence
import logging
from typing import Any

import numpy as np
import numpy.typing as npt
from typing_extensions import override

from rydberg_ssh.constants import DEFAULT_TRACE_WIDTH_US, QUANTUM_DEFECT_3S1
from rydberg_ssh.sfi import RampParams, SFITrace, ramp_grid, synthesize_trace
from rydberg_ssh.traces.base import TraceSource

logger = logging.getLogger(__name__)


class SyntheticTraceSource(TraceSource):
    """Gaussian SFI peaks for a list of principal quantum numbers."""

    def __init__(
        self,
        site_labels: Sequence[int],
        ramp: RampParams | None = None,
        width: float = DEFAULT_TRACE_WIDTH_US,
        grid: npt.ArrayLike | None = None,
        quantum_defect: float = QUANTUM_DEFECT_3S1,
    ) -> None:
        """
        Initialize SyntheticTraceSource.

        Args:
            site_labels: Principal quantum numbers, one trace each.
            ramp: Field ramp (default: 40 V/cm, 5 us).
            width: Peak standard deviation in us.
            grid: Detection grid in us (default: ``ramp_grid(ramp)``).
            quantum_defect: Quantum defect of the series.

        Raises:
            ValueError: If no labels are given.
        """
        if not site_labels:
            raise ValueError("SyntheticTraceSource needs at least one site label")
        self.site_labels = tuple(int(n) for n in site_labels)
        self.ramp = ramp or RampParams()
        self.width = width
        self.grid = ramp_grid(self.ramp) if grid is None else np.asarray(grid, dtype=np.float64)
        self.quantum_defect = quantum_defect

        logger.info("SyntheticTraceSource initialized for n = %s", list(self.site_labels))

    @override
    def get_traces(self) -> list[SFITrace]:
        """
        Synthesize one trace per label.

        Raises:
            IonizationDomainError: If a state does not ionize within the ramp.
        """
        return [
            synthesize_trace(n, self.ramp, self.width, self.grid, self.quantum_defect)
            for n in self.site_labels
        ]

    @override
    def get_metadata(self) -> dict[str, Any]:
        """Return the labels and model parameters."""
        return {
            "labels": [f"{n}s" for n in self.site_labels],
            "source_type": "synthetic",
            "peak_field_v_per_cm": self.ramp.peak_field,
            "time_constant_us": self.ramp.time_constant,
            "width_us": self.width,
        }
