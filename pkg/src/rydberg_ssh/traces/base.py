"""Abstract base class for SFI basis-trace sources."""

from abc import ABC, abstractmethod
from typing import Any

from rydberg_ssh.sfi import SFITrace


class TraceSource(ABC):
    """
    Abstract base class for sources of single-state SFI reference traces.

    Provides a unified interface for basis sets read from disk or generated from the
    ionization model, so the unmixing pipeline does not care where its basis came from.
    """

    @abstractmethod
    def get_traces(self) -> list[SFITrace]:
        """
        Return the basis traces, one per lattice state, in lattice order.

        Returns:
            list[SFITrace]: Labelled traces sharing one time grid.

        Raises:
            IOError: If the source cannot be read.
        """
        ...

    @abstractmethod
    def get_metadata(self) -> dict[str, Any]:
        """
        Return metadata about the source.

        Returns:
            dict[str, Any]: Metadata dictionary containing:
                - 'labels': Trace labels in order
                - 'source_type': Type of source ('directory', 'synthetic')
        """
        ...
