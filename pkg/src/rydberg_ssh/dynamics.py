"""Population dynamics of an initially bare lattice site under the dressed Hamiltonian.

Time is in microseconds and frequencies in kHz throughout; ``phase`` is the only place where
the two are combined.
"""

from dataclasses import dataclass, replace
import logging
import math

import numpy as np
import numpy.typing as npt

from rydberg_ssh.constants import KHZ_US_TO_CYCLES
from rydberg_ssh.errors import DegenerateInputError, TimeGridError
from rydberg_ssh.spectral import DressedSpectrum, project_bare

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class DecoherenceParams:
    """
    Phenomenological loss and dephasing.

    Attributes:
        survival_time: Lifetime of the total Rydberg population in us, or None.
        dephasing_time: Damping time of dressed-basis coherences in us, or None.
        background_bin: Report decayed population as a separate background signal.
    """

    survival_time: float | None = None
    dephasing_time: float | None = None
    background_bin: bool = False

    def __post_init__(self) -> None:
        for name in ("survival_time", "dephasing_time"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive number of us, got {value}")

    @property
    def is_closed(self) -> bool:
        """True when neither loss nor dephasing is modelled."""
        return self.survival_time is None and self.dephasing_time is None


CLOSED_SYSTEM = DecoherenceParams()


@dataclass(frozen=True)
class PopulationTrajectory:
    """
    Bare-state populations sampled on a time grid.

    Attributes:
        times: Strictly increasing sample times in us.
        populations: Array of shape (len(times), M) with P_{ns'}(t).
        survival: Remaining Rydberg fraction at each time.
        site_labels: Labels of the population columns.
        normalized: Whether populations are fractional (divided by survival).
        background: Decayed population per time when a background bin is kept, else None.
    """

    times: FloatArray
    populations: FloatArray
    survival: FloatArray
    site_labels: tuple[int, ...]
    normalized: bool = False
    background: FloatArray | None = None

    def site(self, site_index: int) -> FloatArray:
        """Return the population time series of one site."""
        if not 0 <= site_index < len(self.site_labels):
            raise IndexError(
                f"Site index {site_index} out of range for {len(self.site_labels)} sites"
            )
        return self.populations[:, site_index].copy()


def phase(freq_khz: npt.ArrayLike, t_us: npt.ArrayLike) -> FloatArray:
    """Return the accumulated phase 2*pi*f*t for f in kHz and t in us."""
    return np.asarray(
        2.0 * np.pi * KHZ_US_TO_CYCLES * np.asarray(freq_khz) * np.asarray(t_us),
        dtype=np.float64,
    )


def transition_probabilities(
    spec: DressedSpectrum,
    initial_site: int,
    times: npt.ArrayLike,
    dephasing_time: float | None = None,
) -> FloatArray:
    """
    Evaluate |<ns'|T(t)|ns>|^2 for every final site at arbitrary real times.

    With real eigenvectors the double sum over dressed states collapses to
    |sum_a c_a exp(-i phi_a)|^2 with c_a = <ns'|a><a|ns>. Dephasing damps only the
    cross terms, which equals mixing that coherent result with its diagonal part.

    Args:
        spec: Dressed spectrum.
        initial_site: Row index of the initially populated bare state.
        times: Times in us; negative values are allowed.
        dephasing_time: Coherence damping time in us, or None.

    Returns:
        FloatArray: Probabilities with shape (len(times), M).
    """
    amplitudes = project_bare(spec, initial_site)
    t = np.atleast_1d(np.asarray(times, dtype=np.float64))

    # weights[s', a] = <ns'|a><a|ns>
    weights = spec.eigenvectors * amplitudes[np.newaxis, :]
    phases = phase(spec.eigenvalues[np.newaxis, :], t[:, np.newaxis])
    real_part = np.cos(phases) @ weights.T
    imag_part = np.sin(phases) @ weights.T
    coherent = real_part**2 + imag_part**2

    if dephasing_time is not None:
        damping = np.exp(-np.abs(t) / dephasing_time)[:, np.newaxis]
        diagonal = (weights**2).sum(axis=1)[np.newaxis, :]
        coherent = damping * coherent + (1.0 - damping) * diagonal

    return np.clip(coherent, 0.0, 1.0)


def _validate_grid(times: npt.ArrayLike) -> FloatArray:
    grid = np.asarray(times, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise TimeGridError("Time grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(grid)):
        raise TimeGridError("Time grid contains non-finite values")
    if grid[0] < 0:
        raise TimeGridError(f"Times must be non-negative, got {grid[0]}")
    if np.any(np.diff(grid) <= 0):
        raise TimeGridError("Time grid must be strictly increasing")
    return grid


def evolve(
    spec: DressedSpectrum,
    initial_site: int,
    times: npt.ArrayLike,
    dec: DecoherenceParams = CLOSED_SYSTEM,
) -> PopulationTrajectory:
    """
    Propagate an initially populated bare state through the dressed spectrum.

    Args:
        spec: Dressed spectrum of the lattice.
        initial_site: Row index of the initial bare state.
        times: Strictly increasing, non-negative sample times in us.
        dec: Decay and dephasing model.

    Returns:
        PopulationTrajectory: Unnormalized populations; they sum to the survival at each time.

    Raises:
        IndexError: If the initial site is out of range.
        TimeGridError: If the grid is not strictly increasing and non-negative.
    """
    grid = _validate_grid(times)
    probabilities = transition_probabilities(spec, initial_site, grid, dec.dephasing_time)

    if dec.survival_time is not None:
        survival = np.exp(-grid / dec.survival_time)
    else:
        survival = np.ones_like(grid)

    background = 1.0 - survival if dec.background_bin else None

    logger.debug(
        "Evolved site %s over %d times (t_max=%s us, decoherence=%s)",
        spec.site_labels[initial_site],
        grid.size,
        grid[-1],
        dec,
    )
    return PopulationTrajectory(
        times=grid,
        populations=probabilities * survival[:, np.newaxis],
        survival=survival,
        site_labels=spec.site_labels,
        background=background,
    )


def fractionalize(traj: PopulationTrajectory) -> PopulationTrajectory:
    """
    Normalize populations by the surviving Rydberg fraction at each time.

    Already-normalized trajectories are returned unchanged. The background signal, if any,
    is left as is.

    Raises:
        DegenerateInputError: If the survival vanishes at any sampled time.
    """
    if traj.normalized:
        return traj
    if np.any(traj.survival <= 0.0):
        raise DegenerateInputError("Cannot normalize populations where survival is zero")
    return replace(
        traj,
        populations=traj.populations / traj.survival[:, np.newaxis],
        normalized=True,
    )


def uniform_time_grid(
    spec: DressedSpectrum,
    t_max: float,
    samples_per_period: int = 20,
    min_samples: int = 2,
) -> FloatArray:
    """
    Uniform grid on [0, t_max] that resolves the fastest oscillation of the spectrum.

    Args:
        spec: Dressed spectrum; its largest eigenvalue gap sets the fastest period.
        t_max: End time in us.
        samples_per_period: Samples per period of the fastest oscillation.
        min_samples: Lower bound on the number of samples.

    Returns:
        FloatArray: Sample times in us.

    Raises:
        TimeGridError: If t_max is not positive.
    """
    if not (math.isfinite(t_max) and t_max > 0):
        raise TimeGridError(f"t_max must be positive, got {t_max}")
    gap = float(spec.eigenvalues[-1] - spec.eigenvalues[0])
    samples = min_samples
    if gap > 0:
        period = 1.0 / (gap * KHZ_US_TO_CYCLES)
        samples = max(samples, math.ceil(t_max * samples_per_period / period) + 1)
    return np.linspace(0.0, t_max, samples)
