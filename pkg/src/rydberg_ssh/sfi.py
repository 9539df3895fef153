"""Selective field ionization: ramp timing, synthetic spectra and population unmixing."""

from collections.abc import Sequence
from dataclasses import dataclass
import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.integrate import trapezoid
from scipy.optimize import nnls
from scipy.stats import norm

from rydberg_ssh.constants import (
    ATOMIC_UNIT_FIELD_V_PER_CM,
    DEFAULT_TRACE_WIDTH_US,
    PEAK_FIELD_V_PER_CM,
    QUANTUM_DEFECT_3S1,
    RAMP_TIME_CONSTANT_US,
)
from rydberg_ssh.errors import DegenerateInputError, IllPosedError, IonizationDomainError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class RampParams:
    """
    Exponential field ramp E(t) = E_p (1 - exp(-t / tau)).

    Attributes:
        peak_field: Asymptotic field E_p in V/cm.
        time_constant: Rise time tau in us.
    """

    peak_field: float = PEAK_FIELD_V_PER_CM
    time_constant: float = RAMP_TIME_CONSTANT_US

    def __post_init__(self) -> None:
        for name in ("peak_field", "time_constant"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")

    def field_at(self, t_us: npt.ArrayLike) -> FloatArray:
        """Applied field in V/cm at time t (us) after the ramp starts."""
        return np.asarray(
            self.peak_field * -np.expm1(-np.asarray(t_us, dtype=np.float64) / self.time_constant),
            dtype=np.float64,
        )


@dataclass(frozen=True)
class SFITrace:
    """
    Ionization signal versus ramp time.

    Attributes:
        times: Uniform grid in us.
        signal: Non-negative amplitude per time.
        label: Originating state (e.g. ``"58s"``), if known.
    """

    times: FloatArray
    signal: FloatArray
    label: str | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        signal = np.asarray(self.signal, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "signal", signal)
        if times.ndim != 1 or times.shape != signal.shape:
            raise ValueError(
                f"Trace times and signal must be 1-D of equal length, "
                f"got {times.shape} and {signal.shape}"
            )
        if not np.all(np.isfinite(signal)) or np.any(signal < 0):
            raise ValueError(f"Trace {self.label!r} signal must be finite and non-negative")

    def area(self) -> float:
        """Trapezoidal integral of the signal over the grid."""
        return float(trapezoid(self.signal, self.times))


def ionization_field(n: int, quantum_defect: float = QUANTUM_DEFECT_3S1) -> float:
    """
    Adiabatic ionization field 1 / (16 (n - delta)^4) a.u., in V/cm.

    Raises:
        IonizationDomainError: If n does not exceed the quantum defect.
    """
    effective_n = n - quantum_defect
    if effective_n <= 0:
        raise IonizationDomainError(
            f"Principal quantum number {n} must exceed the quantum defect {quantum_defect}"
        )
    return ATOMIC_UNIT_FIELD_V_PER_CM / (16.0 * effective_n**4)


def ionization_time(field: float, ramp: RampParams) -> float:
    """
    Ramp time at which the applied field reaches ``field``: -tau ln(1 - E / E_p).

    Raises:
        IonizationDomainError: If the field is not positive or the ramp never reaches it.
    """
    if not field > 0:
        raise IonizationDomainError(f"Ionization field must be positive, got {field}")
    if field >= ramp.peak_field:
        raise IonizationDomainError(
            f"Field {field:.4g} V/cm is never reached by a ramp peaking at "
            f"{ramp.peak_field:.4g} V/cm; the state does not ionize"
        )
    return -ramp.time_constant * math.log1p(-field / ramp.peak_field)


def ramp_grid(ramp: RampParams, window: float = 20.0, samples: int = 2001) -> FloatArray:
    """Uniform detection grid over [0, window] us."""
    if not (window > 0 and samples >= 2):
        raise ValueError(f"Need a positive window and >= 2 samples, got {window}, {samples}")
    logger.debug("SFI grid: %d samples, %s us, tau %s us", samples, window, ramp.time_constant)
    return np.linspace(0.0, window, samples)


def synthesize_trace(
    n: int,
    ramp: RampParams,
    width: float = DEFAULT_TRACE_WIDTH_US,
    grid: npt.ArrayLike | None = None,
    quantum_defect: float = QUANTUM_DEFECT_3S1,
) -> SFITrace:
    """
    Gaussian SFI peak of unit area for the state n^3S_1.

    Args:
        n: Principal quantum number.
        ramp: Field ramp.
        width: Standard deviation of the peak in us.
        grid: Detection times in us (default: ``ramp_grid(ramp)``).
        quantum_defect: Quantum defect delta.

    Returns:
        SFITrace: Peak centred on the ramp time at which the state ionizes.

    Raises:
        ValueError: If the width is not positive.
        IonizationDomainError: If the state does not ionize within the ramp.
    """
    if not width > 0:
        raise ValueError(f"Trace width must be positive, got {width}")
    times = ramp_grid(ramp) if grid is None else np.asarray(grid, dtype=np.float64)
    center = ionization_time(ionization_field(n, quantum_defect), ramp)
    return SFITrace(times=times, signal=norm.pdf(times, loc=center, scale=width), label=f"{n}s")


def background_trace(
    grid: npt.ArrayLike,
    centers: Sequence[float],
    width: float | None = None,
    label: str = "3P",
) -> SFITrace:
    """
    Broad unit-area trace standing in for decay products (nearby 3P states).

    Centred on the mean of the lattice peak positions; by default as wide as their spread.
    """
    times = np.asarray(grid, dtype=np.float64)
    spread = float(np.ptp(centers)) if len(centers) > 1 else 1.0
    scale = width if width is not None else max(spread, 1.0)
    return SFITrace(
        times=times,
        signal=norm.pdf(times, loc=float(np.mean(centers)), scale=scale),
        label=label,
    )


def _check_grids(reference: SFITrace, traces: Sequence[SFITrace]) -> None:
    for trace in traces:
        if trace.times.shape != reference.times.shape or not np.allclose(
            trace.times, reference.times
        ):
            raise ValueError(f"Trace {trace.label!r} is not sampled on the observed grid")


def mix_traces(
    weights: Sequence[float],
    basis: Sequence[SFITrace],
    background: SFITrace | None = None,
    background_weight: float = 0.0,
    label: str | None = "mixture",
) -> SFITrace:
    """Linear combination of basis traces (plus an optional background) on a shared grid."""
    if len(weights) != len(basis) or not basis:
        raise ValueError(f"{len(weights)} weights for {len(basis)} basis traces")
    extra = [background] if background is not None else []
    _check_grids(basis[0], [*basis, *extra])
    signal = sum(
        (w * trace.signal for w, trace in zip(weights, basis)),
        start=np.zeros_like(basis[0].signal),
    )
    if background is not None:
        signal = signal + background_weight * background.signal
    return SFITrace(times=basis[0].times, signal=signal, label=label)


def add_noise(trace: SFITrace, level: float, rng: np.random.Generator) -> SFITrace:
    """
    Add Gaussian noise with standard deviation ``level`` times the peak signal.

    The result is clipped at zero so it remains a valid detector signal.
    """
    sigma = level * float(trace.signal.max())
    noisy = trace.signal + rng.normal(0.0, sigma, size=trace.signal.shape)
    return SFITrace(times=trace.times, signal=np.clip(noisy, 0.0, None), label=trace.label)


@dataclass(frozen=True)
class UnmixResult:
    """
    Non-negative decomposition of an observed trace.

    Attributes:
        labels: Basis labels, in coefficient order.
        raw: Fitted amplitudes of the basis traces.
        normalized: Basis amplitudes scaled to sum to one (fractional populations).
        background: Fitted background amplitude, or None when no background was fitted.
        residual_norm: Euclidean norm of observed minus fitted signal.
    """

    labels: tuple[str, ...]
    raw: FloatArray
    normalized: FloatArray
    background: float | None
    residual_norm: float

    def as_dict(self) -> dict[str, float]:
        """Normalized populations keyed by label."""
        return {label: float(p) for label, p in zip(self.labels, self.normalized)}


def _dependent_pair(design: FloatArray, labels: Sequence[str]) -> tuple[str, str]:
    # The most nearly parallel pair of columns.
    norms = np.linalg.norm(design, axis=0)
    unit = design / np.where(norms > 0, norms, 1.0)
    overlap = np.abs(unit.T @ unit)
    np.fill_diagonal(overlap, -np.inf)
    i, j = np.unravel_index(int(np.argmax(overlap)), overlap.shape)
    first, second = sorted((int(i), int(j)))
    return labels[first], labels[second]


def unmix(
    observed: SFITrace,
    basis: Sequence[SFITrace],
    background: SFITrace | None = None,
) -> UnmixResult:
    """
    Fit non-negative amplitudes of basis traces to an observed trace.

    Args:
        observed: Measured or synthesized signal.
        basis: Single-state reference traces on the same grid.
        background: Optional fixed-shape background trace fitted alongside the basis.

    Returns:
        UnmixResult: Raw and normalized amplitudes.

    Raises:
        ValueError: If the basis is empty or sampled on a different grid.
        IllPosedError: If the basis (with background) is rank deficient.
        DegenerateInputError: If every fitted basis amplitude is zero.
    """
    if not basis:
        raise ValueError("Unmixing needs at least one basis trace")
    columns = [*basis, *([background] if background is not None else [])]
    _check_grids(observed, columns)

    labels = tuple(trace.label or f"trace_{i}" for i, trace in enumerate(columns))
    design = np.column_stack([trace.signal for trace in columns])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise IllPosedError("Basis traces are linearly dependent", _dependent_pair(design, labels))

    coefficients, residual = nnls(design, observed.signal)
    raw = np.asarray(coefficients[: len(basis)], dtype=np.float64)
    total = float(raw.sum())
    if total <= 0:
        raise DegenerateInputError("Observed trace has no weight on any basis state")

    logger.debug("Unmixed %s: residual %.3g", observed.label, residual)
    return UnmixResult(
        labels=labels[: len(basis)],
        raw=raw,
        normalized=raw / total,
        background=float(coefficients[-1]) if background is not None else None,
        residual_norm=float(residual),
    )
