"""Parameter sweeps and observable extraction.

Every sweep evaluates independent lattices, one per parameter value. Points are fanned out
with joblib and collected in parameter order, so serial and parallel runs agree exactly.
"""

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
import logging
import math
from typing import Any

from joblib import Parallel, delayed
import numpy as np
import numpy.typing as npt

from rydberg_ssh.constants import KHZ_US_TO_CYCLES, PROTECTION_PROBE_TIME_US
from rydberg_ssh.dynamics import (
    CLOSED_SYSTEM,
    DecoherenceParams,
    PopulationTrajectory,
    evolve,
    fractionalize,
    uniform_time_grid,
)
from rydberg_ssh.errors import (
    DegenerateInputError,
    NumericError,
    TimeGridError,
    UnsupportedConfigurationError,
)
from rydberg_ssh.lattice import LatticeSpec, build_hamiltonian
from rydberg_ssh.spectral import DressedSpectrum, diagonalize, edge_splitting

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

# Mirrored-detuning splittings may differ by this much before the sweep is flagged.
ASYMMETRY_TOLERANCE_KHZ = 1e-6


@dataclass(frozen=True)
class SweepResult:
    """
    Observables recorded against one swept parameter.

    Attributes:
        parameter_name: Identifier of the swept quantity.
        parameter_unit: Unit of the parameter values.
        parameter_values: Strictly monotone swept values.
        observables: One labelled record per parameter value, all with the same keys.
        metadata: Scalars derived from the whole sweep (fits, widths, asymmetry).
    """

    parameter_name: str
    parameter_unit: str
    parameter_values: FloatArray
    observables: tuple[dict[str, float], ...]
    metadata: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.parameter_values, dtype=np.float64)
        object.__setattr__(self, "parameter_values", values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("A sweep needs at least one parameter value")
        if len(self.observables) != values.size:
            raise ValueError(
                f"{len(self.observables)} observable records for {values.size} values"
            )
        steps = np.diff(values)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError(f"{self.parameter_name} values must be strictly monotone")

    @property
    def columns(self) -> tuple[str, ...]:
        """Observable names in record order."""
        return tuple(self.observables[0])

    def column(self, name: str) -> FloatArray:
        """Return one observable across the sweep."""
        if name not in self.observables[0]:
            raise KeyError(f"No observable {name!r}; available: {self.columns}")
        return np.array([record[name] for record in self.observables], dtype=np.float64)


def _sweep(
    evaluate: Callable[[float], dict[str, float]],
    values: Sequence[float],
    workers: int,
) -> tuple[dict[str, float], ...]:
    records: list[dict[str, float]] = Parallel(n_jobs=workers, prefer="threads")(
        delayed(evaluate)(float(value)) for value in values
    )
    return tuple(records)


def _spectrum(spec: LatticeSpec) -> DressedSpectrum:
    return diagonalize(build_hamiltonian(spec))


def _check_bond(base: LatticeSpec, bond_index: int) -> None:
    # Raises IndexError for a bond outside the chain.
    base.with_bond_detuning(bond_index, 0.0)
    others = [d for i, d in enumerate(base.bond_detunings) if i != bond_index]
    if any(others):
        logger.warning(
            "Base lattice is not resonant away from bond %d (detunings %s)",
            bond_index,
            base.bond_detunings,
        )


def _photon_scale(photon_order: int) -> float:
    # Bond detuning per unit of drive detuning for an n-photon transition.
    if isinstance(photon_order, bool) or photon_order < 1:
        raise ValueError(f"photon_order must be a positive integer, got {photon_order}")
    return float(photon_order)


def detuning_asymmetry(result: SweepResult, column: str = "splitting_khz") -> float:
    """
    Largest difference of an observable between mirrored detunings +d and -d.

    Returns 0.0 when the sweep contains no mirrored pair.
    """
    values = result.parameter_values
    observable = result.column(column)
    worst = 0.0
    for i, value in enumerate(values):
        if value <= 0:
            continue
        mirrored = np.flatnonzero(np.isclose(values, -value, rtol=0.0, atol=1e-12))
        if mirrored.size:
            worst = max(worst, abs(float(observable[i] - observable[mirrored[0]])))
    return worst


def sweep_edge_detuning(
    base: LatticeSpec,
    bond_index: int,
    detunings: Sequence[float],
    workers: int = 1,
    photon_order: int = 1,
) -> SweepResult:
    """
    Edge-state splitting as a function of one bond's detuning.

    Mirrored detunings on an edge bond of a chiral chain must give equal splittings; any
    difference above tolerance is logged and recorded as ``max_asymmetry_khz``.

    Args:
        base: Lattice, resonant apart from the swept bond.
        bond_index: Bond whose drive is detuned (0 = first bond).
        detunings: Drive detunings in kHz, strictly monotone.
        workers: Parallel workers.
        photon_order: Photons per bond transition; the bond is detuned by
            ``photon_order`` times the drive detuning.

    Returns:
        SweepResult: ``splitting_khz`` per drive detuning.

    Raises:
        IndexError: If the bond index is invalid.
        UnsupportedConfigurationError: If the chain length is odd.
        ValueError: If photon_order is not a positive integer.
    """
    scale = _photon_scale(photon_order)
    _check_bond(base, bond_index)
    if base.size % 2:
        raise UnsupportedConfigurationError(
            f"Edge splitting needs an even chain, got {base.size} sites"
        )
    logger.info("Sweeping detuning of bond %d over %d values", bond_index, len(detunings))

    def evaluate(detuning: float) -> dict[str, float]:
        spectrum = _spectrum(base.with_bond_detuning(bond_index, scale * detuning))
        return {"splitting_khz": edge_splitting(spectrum)}

    result = SweepResult(
        parameter_name=f"bond_{bond_index}_detuning",
        parameter_unit="kHz",
        parameter_values=np.asarray(detunings, dtype=np.float64),
        observables=_sweep(evaluate, detunings, workers),
    )

    asymmetry = detuning_asymmetry(result)
    edge_bond = bond_index in (0, base.size - 2)
    if edge_bond and asymmetry > ASYMMETRY_TOLERANCE_KHZ:
        logger.warning(
            "Edge splitting is not even in detuning: max |s(d) - s(-d)| = %.3g kHz", asymmetry
        )
    return replace(
        result, metadata={"max_asymmetry_khz": asymmetry, "photon_order": float(photon_order)}
    )


def sweep_protection_breakdown(
    base: LatticeSpec,
    bond_index: int,
    detunings: Sequence[float],
    probe_time: float = PROTECTION_PROBE_TIME_US,
    dec: DecoherenceParams = CLOSED_SYSTEM,
    initial_site: int = 0,
    workers: int = 1,
) -> SweepResult:
    """
    Site populations at a fixed exposure time versus one bond's detuning.

    Args:
        base: Lattice, resonant apart from the swept bond.
        bond_index: Bond whose drive is detuned.
        detunings: Detunings in kHz, strictly monotone.
        probe_time: Exposure time in us.
        dec: Decay and dephasing model; populations are reported as fractions.
        initial_site: Row index of the initially populated site (default: lower edge).
        workers: Parallel workers.

    Returns:
        SweepResult: ``p_<label>`` per site at the probe time.

    Raises:
        TimeGridError: If the probe time is not positive.
        IndexError: If the bond or site index is invalid.
    """
    if not (math.isfinite(probe_time) and probe_time > 0):
        raise TimeGridError(f"Probe time must be positive, got {probe_time}")
    _check_bond(base, bond_index)
    if not 0 <= initial_site < base.size:
        raise IndexError(f"Site index {initial_site} out of range for {base.size} sites")
    logger.info(
        "Sweeping protection breakdown on bond %d at %s us over %d values",
        bond_index,
        probe_time,
        len(detunings),
    )

    def evaluate(detuning: float) -> dict[str, float]:
        spectrum = _spectrum(base.with_bond_detuning(bond_index, detuning))
        trajectory = fractionalize(evolve(spectrum, initial_site, [0.0, probe_time], dec))
        final = trajectory.populations[-1]
        return {f"p_{label}": float(p) for label, p in zip(base.site_labels, final)}

    return SweepResult(
        parameter_name=f"bond_{bond_index}_detuning",
        parameter_unit="kHz",
        parameter_values=np.asarray(detunings, dtype=np.float64),
        observables=_sweep(evaluate, detunings, workers),
    )


def scaling_slope(result: SweepResult) -> float:
    """
    Least-squares slope of ln(splitting) per unit cell (pair of sites).

    Raises:
        NumericError: If a splitting is not positive or fewer than two sizes were swept.
    """
    splittings = result.column("splitting_khz")
    if splittings.size < 2:
        raise NumericError("A scaling slope needs at least two lattice sizes")
    if np.any(splittings <= 0):
        raise NumericError("Splittings must be positive to fit a logarithmic slope")
    slope, _ = np.polyfit(result.parameter_values / 2.0, np.log(splittings), 1)
    return float(slope)


def splitting_vs_size(
    omega_w: float,
    omega_s: float,
    sizes: Sequence[int],
    first_label: int = 58,
    workers: int = 1,
) -> SweepResult:
    """
    Edge splitting of resonant staggered chains of increasing length.

    Args:
        omega_w: Weak Rabi frequency in kHz (edge bonds).
        omega_s: Strong Rabi frequency in kHz.
        sizes: Even chain lengths >= 4, strictly monotone.
        first_label: Label of the first site of every chain.
        workers: Parallel workers.

    Returns:
        SweepResult: ``splitting_khz`` and ``log_splitting`` per size, with the fitted
        ``slope_per_cell`` in the metadata when it is defined.

    Raises:
        UnsupportedConfigurationError: If a size is odd or smaller than 4.
    """
    for size in sizes:
        if size % 2 or size < 4:
            raise UnsupportedConfigurationError(
                f"Chain sizes must be even and at least 4, got {size}"
            )
    logger.info("Computing edge splitting for sizes %s", list(sizes))

    def evaluate(size: float) -> dict[str, float]:
        labels = range(first_label, first_label + int(size))
        splitting = edge_splitting(_spectrum(LatticeSpec.from_pattern(labels, omega_w, omega_s)))
        return {
            "splitting_khz": splitting,
            "log_splitting": math.log(splitting) if splitting > 0 else -math.inf,
        }

    result = SweepResult(
        parameter_name="sites",
        parameter_unit="sites",
        parameter_values=np.asarray(sizes, dtype=np.float64),
        observables=_sweep(evaluate, [float(s) for s in sizes], workers),
    )
    metadata: dict[str, float] = {}
    try:
        metadata["slope_per_cell"] = scaling_slope(result)
    except NumericError as e:
        logger.debug("No scaling slope: %s", e)
    return replace(result, metadata=metadata)


def dressed_energy_scan(
    omega_w: float,
    ratios: Sequence[float],
    size: int = 6,
    first_label: int = 58,
    workers: int = 1,
) -> SweepResult:
    """
    Dressed energies versus Omega_S / Omega_W with Omega_W held fixed.

    Args:
        omega_w: Weak Rabi frequency in kHz.
        ratios: Strong-to-weak coupling ratios, positive and strictly monotone.
        size: Number of lattice sites.
        first_label: Label of the first site.
        workers: Parallel workers.

    Returns:
        SweepResult: ``e_1`` .. ``e_M`` in kHz, ascending, per ratio.
    """
    if any(not (math.isfinite(r) and r > 0) for r in ratios):
        raise ValueError(f"Coupling ratios must be positive, got {list(ratios)}")
    labels = range(first_label, first_label + size)

    def evaluate(ratio: float) -> dict[str, float]:
        spectrum = _spectrum(LatticeSpec.from_pattern(labels, omega_w, omega_w * ratio))
        return {f"e_{i + 1}": float(e) for i, e in enumerate(spectrum.eigenvalues)}

    return SweepResult(
        parameter_name="strong_to_weak_ratio",
        parameter_unit="ratio",
        parameter_values=np.asarray(ratios, dtype=np.float64),
        observables=_sweep(evaluate, ratios, workers),
    )


def full_width_half_maximum(values: npt.ArrayLike, curve: npt.ArrayLike) -> float:
    """
    Full width at half maximum of a single-peaked curve.

    Half-maximum crossings on either side of the peak are located by linear interpolation.

    Raises:
        NumericError: If the curve does not fall below half maximum on both sides.
    """
    x = np.asarray(values, dtype=np.float64)
    y = np.asarray(curve, dtype=np.float64)
    order = np.argsort(x)
    x, y = x[order], y[order]
    peak = int(np.argmax(y))
    half = y[peak] / 2.0

    def crossing(step: int) -> float:
        inner = peak
        outer = peak + step
        while 0 <= outer < x.size:
            if y[outer] < half:
                fraction = (y[inner] - half) / (y[inner] - y[outer])
                return float(x[inner] + fraction * (x[outer] - x[inner]))
            inner, outer = outer, outer + step
        raise NumericError("Curve does not fall below half maximum within the swept range")

    return crossing(+1) - crossing(-1)


def edge_transfer_resonance(
    base: LatticeSpec,
    bond_index: int,
    detunings: Sequence[float],
    initial_site: int = 0,
    target_site: int | None = None,
    window_periods: float = 2.0,
    dec: DecoherenceParams = CLOSED_SYSTEM,
    workers: int = 1,
    photon_order: int = 1,
) -> SweepResult:
    """
    Maximum edge-to-edge transfer versus detuning, and its resonance width.

    For each detuning the far-edge population is maximized over [0, window_periods / D],
    where D is the edge splitting of the undetuned base lattice. Detunings and the width are
    in drive-frequency units: a bond driven by an n-photon transition is detuned by n times
    the drive detuning, so the width of a two-photon bond is half its bond-detuning width.

    Args:
        base: Resonant lattice.
        bond_index: Bond whose drive is detuned.
        detunings: Drive detunings in kHz, strictly monotone.
        initial_site: Row index of the initially populated edge.
        target_site: Row index of the receiving site (default: the opposite end).
        window_periods: Observation window in edge-tunneling periods.
        dec: Decay and dephasing model; populations are taken as fractions.
        workers: Parallel workers.
        photon_order: Photons per bond transition.

    Returns:
        SweepResult: ``max_transfer`` per detuning, with ``window_us``, ``photon_order`` and
        (when the peak is bracketed) ``fwhm_khz`` in the metadata.

    Raises:
        ValueError: If photon_order is not a positive integer.
    """
    scale = _photon_scale(photon_order)
    _check_bond(base, bond_index)
    target = base.size - 1 if target_site is None else target_site
    splitting = edge_splitting(_spectrum(base))
    if splitting <= 0:
        raise DegenerateInputError("Edge splitting of the base lattice is zero")
    window = window_periods / (splitting * KHZ_US_TO_CYCLES)
    logger.info(
        "Edge transfer resonance on bond %d: window %.4g us, %d detunings",
        bond_index,
        window,
        len(detunings),
    )

    def evaluate(detuning: float) -> dict[str, float]:
        spectrum = _spectrum(base.with_bond_detuning(bond_index, scale * detuning))
        grid = uniform_time_grid(spectrum, window)
        trajectory = fractionalize(evolve(spectrum, initial_site, grid, dec))
        return {"max_transfer": float(trajectory.site(target).max())}

    result = SweepResult(
        parameter_name=f"bond_{bond_index}_detuning",
        parameter_unit="kHz",
        parameter_values=np.asarray(detunings, dtype=np.float64),
        observables=_sweep(evaluate, detunings, workers),
    )
    metadata = {"window_us": window, "photon_order": float(photon_order)}
    try:
        metadata["fwhm_khz"] = full_width_half_maximum(
            result.parameter_values, result.column("max_transfer")
        )
    except NumericError as e:
        logger.warning("Transfer resonance width undefined: %s", e)
    return replace(result, metadata=metadata)


def _parabolic_peak(power: FloatArray, index: int) -> float:
    # Quadratic fit through the log power of the peak bin and its neighbours.
    if index <= 0 or index >= power.size - 1:
        return float(index)
    y0, y1, y2 = np.log(np.maximum(power[index - 1 : index + 2], 1e-300))
    denominator = y0 - 2.0 * y1 + y2
    if denominator == 0:
        return float(index)
    return index + 0.5 * float(y0 - y2) / float(denominator)


def dominant_oscillation_frequency(
    traj: PopulationTrajectory,
    site_index: int,
    pad_factor: int = 16,
) -> float:
    """
    Frequency of the strongest oscillation in one site's population, in kHz.

    The mean is removed, a Hann window applied and the series zero-padded before the
    discrete Fourier transform; the largest non-DC peak is refined by quadratic
    interpolation on the log power spectrum.

    Args:
        traj: Trajectory on a uniform grid with at least 64 samples.
        site_index: Row index of the site.
        pad_factor: Zero-padding factor.

    Returns:
        float: Frequency in kHz.

    Raises:
        TimeGridError: If the grid is too short, non-uniform, or spans fewer than 1.5
            periods of the detected oscillation.
        NumericError: If the series has no oscillation above the noise floor.
    """
    times = traj.times
    if times.size < 64:
        raise TimeGridError(f"Need at least 64 samples, got {times.size}")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
        raise TimeGridError("Frequency extraction needs a uniform time grid")

    series = traj.site(site_index)
    series = series - series.mean()
    if np.ptp(series) < 1e-12:
        raise NumericError("Population is constant; no oscillation to extract")

    n_fft = pad_factor * series.size
    power = np.abs(np.fft.rfft(series * np.hanning(series.size), n=n_fft)) ** 2
    frequencies = np.fft.rfftfreq(n_fft, d=float(steps[0]))

    span = float(times[-1] - times[0])
    # Skip the DC lobe, which the Hann window spreads over about two natural bins.
    guard = int(np.searchsorted(frequencies, 1.5 / span))
    peak = guard + int(np.argmax(power[guard:]))
    refined = _parabolic_peak(power, peak)
    frequency_mhz = refined * float(frequencies[1] - frequencies[0])

    if frequency_mhz * span < 1.5:
        raise TimeGridError(
            f"Trajectory spans {frequency_mhz * span:.2f} periods; need at least 1.5"
        )
    return frequency_mhz / KHZ_US_TO_CYCLES


def antiphase_correlation(
    traj: PopulationTrajectory,
    site_a: int,
    site_b: int,
    t_max: float | None = None,
) -> float:
    """
    Pearson correlation of two site populations over [0, t_max].

    Raises:
        DegenerateInputError: If either population is constant over the window.
    """
    mask = np.ones_like(traj.times, dtype=bool) if t_max is None else traj.times <= t_max
    a = traj.site(site_a)[mask]
    b = traj.site(site_b)[mask]
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise DegenerateInputError("Correlation is undefined for a constant population")
    return float(np.corrcoef(a, b)[0, 1])


def summarize(result: SweepResult) -> dict[str, Any]:
    """Scalar summary of a sweep for run reports."""
    summary: dict[str, Any] = {
        "parameter": result.parameter_name,
        "points": int(result.parameter_values.size),
    }
    summary.update(result.metadata)
    if "splitting_khz" in result.columns:
        splittings = result.column("splitting_khz")
        summary["min_splitting_khz"] = float(splittings.min())
        summary["min_splitting_at"] = float(result.parameter_values[int(np.argmin(splittings))])
    return summary
