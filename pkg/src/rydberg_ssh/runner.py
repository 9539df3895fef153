"""Experiment orchestration: one validated run file in, a set of output files out."""

from dataclasses import dataclass, field
import logging
import os
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
from typing_extensions import assert_never

from rydberg_ssh.analysis import (
    SweepResult,
    dominant_oscillation_frequency,
    dressed_energy_scan,
    edge_transfer_resonance,
    splitting_vs_size,
    summarize,
    sweep_edge_detuning,
    sweep_protection_breakdown,
)
from rydberg_ssh.config import Experiment, RunConfig, SweepConfig
from rydberg_ssh.dynamics import PopulationTrajectory, evolve, fractionalize
from rydberg_ssh.errors import NumericError, TimeGridError
from rydberg_ssh.lattice import build_hamiltonian
from rydberg_ssh.sfi import (
    SFITrace,
    add_noise,
    background_trace,
    ionization_field,
    ionization_time,
    mix_traces,
    ramp_grid,
    unmix,
)
from rydberg_ssh.spectral import DressedSpectrum, diagonalize, edge_splitting
from rydberg_ssh.traces import create_trace_source
from rydberg_ssh.writers import (
    write_dressed,
    write_long,
    write_rows,
    write_summary,
    write_sweep,
    write_trace_csv,
    write_trajectory,
)

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = "RYDBERG_SSH_OUT"
DEFAULT_OUTPUT_DIR = "output"

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class RunSummary:
    """
    Outcome of one run.

    Attributes:
        experiment: Experiment that was run.
        output_dir: Directory holding the outputs.
        files: Every file written, summary included, in write order.
        scalars: Key numbers of the run (edge splitting, FWHM, survival, ...).
    """

    experiment: Experiment
    output_dir: Path
    files: tuple[Path, ...]
    scalars: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready form of the summary."""
        return {
            "experiment": self.experiment.value,
            "files": sorted(path.name for path in self.files),
            **self.scalars,
        }


def resolve_output_dir(config: RunConfig, out_dir: str | Path | None = None) -> Path:
    """
    Pick the output directory: explicit argument, then the run file, then the environment.

    Falls back to ``./output`` when none is set.
    """
    if out_dir is not None:
        return Path(out_dir)
    if config.output.directory is not None:
        return Path(config.output.directory)
    return Path(os.environ.get(OUTPUT_ENV_VAR) or DEFAULT_OUTPUT_DIR)


class _Outputs:
    """Collects output paths for one run under a common directory and stem."""

    def __init__(self, directory: Path, stem: str) -> None:
        self.directory = directory
        self.stem = stem
        self.files: list[Path] = []

    def path(self, suffix: str) -> Path:
        return self.directory / f"{self.stem}_{suffix}"

    def add(self, written: Path) -> None:
        self.files.append(written)


def _spectrum(config: RunConfig) -> DressedSpectrum:
    return diagonalize(build_hamiltonian(config.lattice))


def _trajectory_series(traj: PopulationTrajectory) -> dict[str, FloatArray]:
    series = {f"p_{label}": traj.populations[:, i] for i, label in enumerate(traj.site_labels)}
    series["survival"] = traj.survival
    return series


def _sweep_series(result: SweepResult) -> dict[str, FloatArray]:
    return {name: result.column(name) for name in result.columns}


def _evolve_trajectory(config: RunConfig) -> tuple[DressedSpectrum, PopulationTrajectory]:
    assert config.time is not None
    spectrum = _spectrum(config)
    trajectory = evolve(spectrum, config.initial_index, config.time.grid(), config.decoherence)
    return spectrum, fractionalize(trajectory)


def _trajectory_scalars(
    config: RunConfig, spectrum: DressedSpectrum, traj: PopulationTrajectory
) -> dict[str, Any]:
    scalars: dict[str, Any] = {
        "initial_site": config.lattice.site_labels[config.initial_index],
        "survival_at_t_max": float(traj.survival[-1]),
        "t_max_us": float(traj.times[-1]),
    }
    if spectrum.size % 2 == 0:
        scalars["edge_splitting_khz"] = edge_splitting(spectrum)
    try:
        scalars["dominant_frequency_khz"] = dominant_oscillation_frequency(
            traj, config.initial_index
        )
    except (TimeGridError, NumericError) as e:
        logger.debug("No dominant frequency: %s", e)
    return scalars


def _run_evolve(config: RunConfig, out: _Outputs) -> dict[str, Any]:
    spectrum, trajectory = _evolve_trajectory(config)
    out.add(write_trajectory(trajectory, out.path("trajectory.csv")))
    out.add(write_dressed(spectrum, out.path("dressed.csv")))
    if config.output.long_format:
        out.add(
            write_long(out.path("long.csv"), trajectory.times, _trajectory_series(trajectory))
        )
    return _trajectory_scalars(config, spectrum, trajectory)


def _write_sweep(result: SweepResult, config: RunConfig, out: _Outputs) -> dict[str, Any]:
    out.add(write_sweep(result, out.path("sweep.csv")))
    if config.output.long_format:
        out.add(write_long(out.path("long.csv"), result.parameter_values, _sweep_series(result)))
    return summarize(result)


def _run_edge_detuning(config: RunConfig, out: _Outputs) -> dict[str, Any]:
    sweep = config.sweep
    assert sweep is not None and sweep.bond_index is not None
    result = sweep_edge_detuning(
        config.lattice, sweep.bond_index, sweep.values, config.workers, sweep.photon_order
    )
    scalars = _write_sweep(result, config, out)
    scalars["edge_splitting_khz"] = edge_splitting(_spectrum(config))

    if sweep.fwhm:
        resonance = edge_transfer_resonance(
            config.lattice,
            sweep.bond_index,
            sweep.values,
            initial_site=config.initial_index,
            dec=config.decoherence,
            workers=config.workers,
            photon_order=sweep.photon_order,
        )
        out.add(write_sweep(resonance, out.path("resonance.csv")))
        scalars.update(resonance.metadata)
    return scalars


def _run_protection(config: RunConfig, out: _Outputs) -> dict[str, Any]:
    sweep = config.sweep
    assert sweep is not None and sweep.bond_index is not None
    result = sweep_protection_breakdown(
        config.lattice,
        sweep.bond_index,
        sweep.values,
        probe_time=sweep.probe_time_us,
        dec=config.decoherence,
        initial_site=config.initial_index,
        workers=config.workers,
    )
    scalars = _write_sweep(result, config, out)
    scalars["probe_time_us"] = sweep.probe_time_us
    return scalars


def _first_label(config: RunConfig, sweep: SweepConfig) -> int:
    return sweep.first_label if sweep.first_label is not None else config.lattice.site_labels[0]


def _run_size_scaling(config: RunConfig, out: _Outputs) -> dict[str, Any]:
    sweep = config.sweep
    assert sweep is not None
    omega_w, omega_s = config.lattice.coupling_pattern[:2]
    result = splitting_vs_size(
        omega_w, omega_s, sweep.sizes, _first_label(config, sweep), config.workers
    )
    scalars = _write_sweep(result, config, out)
    scalars["coupling_ratio"] = omega_s / omega_w
    return scalars


def _run_dressed_scan(config: RunConfig, out: _Outputs) -> dict[str, Any]:
    sweep = config.sweep
    assert sweep is not None
    result = dressed_energy_scan(
        config.lattice.coupling_pattern[0],
        sweep.values,
        size=config.lattice.size,
        first_label=_first_label(config, sweep),
        workers=config.workers,
    )
    return _write_sweep(result, config, out)


def _run_sfi_pipeline(
    config: RunConfig, out: _Outputs, rng: np.random.Generator
) -> dict[str, Any]:
    spectrum, trajectory = _evolve_trajectory(config)
    out.add(write_trajectory(trajectory, out.path("trajectory.csv")))

    sfi = config.sfi
    ramp = sfi.ramp
    labels = config.lattice.site_labels
    grid = ramp_grid(ramp, sfi.window_us, sfi.samples)
    source = create_trace_source(
        labels, sfi.basis_dir, ramp, sfi.width_us, grid, sfi.quantum_defect
    )
    basis = source.get_traces()
    for trace in basis:
        out.add(write_trace_csv(trace, out.path(f"basis_{trace.label}.csv")))

    background: SFITrace | None = None
    background_level = np.zeros_like(trajectory.times)
    if trajectory.background is not None:
        centers = [
            ionization_time(ionization_field(n, sfi.quantum_defect), ramp) for n in labels
        ]
        background = background_trace(basis[0].times, centers)
        background_level = trajectory.background

    # Observed signals carry the unnormalized populations; unmixing recovers the fractions.
    rows: list[list[float]] = []
    worst = 0.0
    for i, t in enumerate(trajectory.times):
        weights = (trajectory.populations[i] * trajectory.survival[i]).tolist()
        observed = mix_traces(weights, basis, background, float(background_level[i]))
        if sfi.noise > 0:
            observed = add_noise(observed, sfi.noise, rng)
        recovered = unmix(observed, basis, background)
        error = float(np.abs(recovered.normalized - trajectory.populations[i]).max())
        worst = max(worst, error)
        rows.append(
            [float(t), *trajectory.populations[i].tolist(), *recovered.normalized.tolist(), error]
        )

    header = [
        "t_us",
        *(f"true_{label}" for label in labels),
        *(f"recovered_{label}" for label in labels),
        "max_error",
    ]
    out.add(write_rows(out.path("sfi.csv"), header, rows))
    logger.info("SFI round trip over %d times: max error %.3g", len(rows), worst)

    scalars = _trajectory_scalars(config, spectrum, trajectory)
    scalars["max_unmix_error"] = worst
    scalars["noise"] = sfi.noise
    scalars["basis_source"] = source.get_metadata()["source_type"]
    return scalars


def run(
    config: RunConfig,
    out_dir: str | Path | None = None,
    seed: int | None = None,
) -> RunSummary:
    """
    Run one experiment and write its outputs.

    Args:
        config: Validated run configuration.
        out_dir: Output directory, overriding the run file and ``RYDBERG_SSH_OUT``.
        seed: Seed for detector noise (sfi_pipeline only).

    Returns:
        RunSummary: Output files and key scalars; also written as ``<stem>_summary.json``.

    Raises:
        ValueError: If the configuration is inconsistent with the experiment.
        ArithmeticError: If a numerical step fails.
        OSError: If outputs cannot be written.
    """
    directory = resolve_output_dir(config, out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    out = _Outputs(directory, config.output.stem)
    logger.info("Running %s into %s", config.experiment.value, directory)

    match config.experiment:
        case Experiment.EVOLVE:
            scalars = _run_evolve(config, out)
        case Experiment.SWEEP_EDGE_DETUNING:
            scalars = _run_edge_detuning(config, out)
        case Experiment.SWEEP_PROTECTION:
            scalars = _run_protection(config, out)
        case Experiment.SPLITTING_VS_SIZE:
            scalars = _run_size_scaling(config, out)
        case Experiment.DRESSED_SCAN:
            scalars = _run_dressed_scan(config, out)
        case Experiment.SFI_PIPELINE:
            scalars = _run_sfi_pipeline(config, out, np.random.default_rng(seed))
        case _ as unreachable:
            assert_never(unreachable)

    summary_path = out.path("summary.json")
    summary = RunSummary(config.experiment, directory, (*out.files, summary_path), scalars)
    write_summary(summary.to_dict(), summary_path)
    return summary
