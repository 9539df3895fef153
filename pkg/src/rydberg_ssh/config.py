"""Run configuration: TOML parsing and validation.

A run file names one experiment and the tables it needs::

    experiment = "evolve"
    initial_site = 59

    [lattice]
    labels = [58, 59, 60, 61, 62, 63]
    couplings_khz = [160, 800, 160, 800, 160]

    [time]
    t_max_us = 20.0
    samples = 401

Unknown keys are rejected so typos surface as errors instead of silently using defaults.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
import logging
from pathlib import Path
import sys
from typing import Any

import numpy as np
import numpy.typing as npt

from rydberg_ssh.constants import (
    DEFAULT_TRACE_WIDTH_US,
    PEAK_FIELD_V_PER_CM,
    PROTECTION_PROBE_TIME_US,
    QUANTUM_DEFECT_3S1,
    RAMP_TIME_CONSTANT_US,
)
from rydberg_ssh.dynamics import DecoherenceParams
from rydberg_ssh.errors import ConfigError, LatticeSpecError
from rydberg_ssh.lattice import LatticeSpec
from rydberg_ssh.sfi import RampParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)


class Experiment(str, Enum):
    """Experiments a run file can request."""

    EVOLVE = "evolve"
    SWEEP_EDGE_DETUNING = "sweep_edge_detuning"
    SWEEP_PROTECTION = "sweep_protection"
    SPLITTING_VS_SIZE = "splitting_vs_size"
    DRESSED_SCAN = "dressed_scan"
    SFI_PIPELINE = "sfi_pipeline"


@dataclass(frozen=True)
class TimeConfig:
    """Sample times: either ``t_max_us`` with ``samples``, or an explicit ``grid_us``."""

    t_max_us: float | None = None
    samples: int | None = None
    grid_us: tuple[float, ...] | None = None

    def grid(self) -> npt.NDArray[np.float64]:
        """Return the sample times in us."""
        if self.grid_us is not None:
            return np.asarray(self.grid_us, dtype=np.float64)
        assert self.t_max_us is not None and self.samples is not None
        return np.linspace(0.0, self.t_max_us, self.samples)


@dataclass(frozen=True)
class SweepConfig:
    bond_index: int | None = None
    values: tuple[float, ...] = ()
    probe_time_us: float = PROTECTION_PROBE_TIME_US
    sizes: tuple[int, ...] = ()
    first_label: int | None = None
    fwhm: bool = False
    photon_order: int = 1


@dataclass(frozen=True)
class SFIConfig:
    peak_field_v_per_cm: float = PEAK_FIELD_V_PER_CM
    time_constant_us: float = RAMP_TIME_CONSTANT_US
    width_us: float = DEFAULT_TRACE_WIDTH_US
    window_us: float = 20.0
    samples: int = 2001
    noise: float = 0.0
    quantum_defect: float = QUANTUM_DEFECT_3S1
    basis_dir: str | None = None

    @property
    def ramp(self) -> RampParams:
        """Field ramp described by this table."""
        return RampParams(self.peak_field_v_per_cm, self.time_constant_us)


@dataclass(frozen=True)
class OutputConfig:
    directory: str | None = None
    stem: str = "run"
    long_format: bool = False


@dataclass(frozen=True)
class RunConfig:
    """
    Validated run description.

    Attributes:
        experiment: Requested experiment.
        lattice: Lattice specification.
        initial_site: Label of the initially populated site, if the experiment needs one.
        time: Sample times, if the experiment needs them.
        decoherence: Loss and dephasing model (closed system by default).
        sweep: Sweep parameters, if the experiment is a sweep.
        sfi: Detection model parameters.
        output: Output location and naming.
        workers: Parallel workers for sweeps.
    """

    experiment: Experiment
    lattice: LatticeSpec
    initial_site: int | None = None
    time: TimeConfig | None = None
    decoherence: DecoherenceParams = field(default_factory=DecoherenceParams)
    sweep: SweepConfig | None = None
    sfi: SFIConfig = field(default_factory=SFIConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    workers: int = 1

    @property
    def initial_index(self) -> int:
        """Row index of the initial site (the first site when none is configured)."""
        if self.initial_site is None:
            return 0
        return self.lattice.label_index(self.initial_site)


_TOP_LEVEL = {
    "experiment",
    "initial_site",
    "workers",
    "lattice",
    "time",
    "decoherence",
    "sweep",
    "sfi",
    "output",
}
_TABLE_KEYS = {
    "lattice": {"labels", "couplings_khz", "detunings_khz"},
    "time": {"t_max_us", "samples", "grid_us"},
    "decoherence": {"survival_time_us", "dephasing_time_us", "background_bin"},
    "sweep": {
        "bond_index",
        "values",
        "probe_time_us",
        "sizes",
        "first_label",
        "fwhm",
        "photon_order",
    },
    "sfi": {
        "peak_field_v_per_cm",
        "time_constant_us",
        "width_us",
        "window_us",
        "samples",
        "noise",
        "quantum_defect",
        "basis_dir",
    },
    "output": {"directory", "stem", "long_format"},
}

# Fields each experiment needs beyond [lattice].
_REQUIRED: dict[Experiment, tuple[str, ...]] = {
    Experiment.EVOLVE: ("initial_site", "time"),
    Experiment.SWEEP_EDGE_DETUNING: ("sweep.bond_index", "sweep.values"),
    Experiment.SWEEP_PROTECTION: ("initial_site", "sweep.bond_index", "sweep.values"),
    Experiment.SPLITTING_VS_SIZE: ("sweep.sizes",),
    Experiment.DRESSED_SCAN: ("sweep.values",),
    Experiment.SFI_PIPELINE: ("initial_site", "time"),
}


def _check_keys(table: Mapping[str, Any], allowed: set[str], prefix: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        path = f"{prefix}.{unknown[0]}" if prefix else unknown[0]
        raise ConfigError(f"unknown key (allowed: {', '.join(sorted(allowed))})", field=path)


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=path)
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", field=path)
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"expected true or false, got {value!r}", field=path)
    return value


def _string(value: Any, path: str) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"expected a non-empty string, got {value!r}", field=path)
    return value


def _numbers(value: Any, path: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"expected a list of numbers, got {value!r}", field=path)
    return tuple(_number(item, f"{path}[{i}]") for i, item in enumerate(value))


def _integers(value: Any, path: str) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"expected a list of integers, got {value!r}", field=path)
    return tuple(_integer(item, f"{path}[{i}]") for i, item in enumerate(value))


def _table(data: Mapping[str, Any], name: str) -> dict[str, Any] | None:
    if name not in data:
        return None
    table = data[name]
    if not isinstance(table, dict):
        raise ConfigError("expected a table", field=name)
    _check_keys(table, _TABLE_KEYS[name], name)
    return table


def _parse_lattice(table: dict[str, Any] | None) -> LatticeSpec:
    if table is None:
        raise ConfigError("missing required table", field="lattice")
    for key in ("labels", "couplings_khz"):
        if key not in table:
            raise ConfigError("missing required field", field=f"lattice.{key}")
    labels = _integers(table["labels"], "lattice.labels")
    couplings = _numbers(table["couplings_khz"], "lattice.couplings_khz")
    detunings = _numbers(table.get("detunings_khz", []), "lattice.detunings_khz")
    try:
        return LatticeSpec(labels, couplings, detunings)
    except LatticeSpecError as e:
        raise ConfigError(str(e), field="lattice") from e


def _parse_time(table: dict[str, Any] | None) -> TimeConfig | None:
    if table is None:
        return None
    if "grid_us" in table:
        if "t_max_us" in table or "samples" in table:
            raise ConfigError("give either grid_us or t_max_us with samples", field="time")
        grid = _numbers(table["grid_us"], "time.grid_us")
        if not grid:
            raise ConfigError("grid must not be empty", field="time.grid_us")
        return TimeConfig(grid_us=grid)

    missing = [f"time.{key}" for key in ("t_max_us", "samples") if key not in table]
    if missing:
        raise ConfigError(f"missing required fields: {', '.join(missing)}", field="time")
    t_max = _number(table["t_max_us"], "time.t_max_us")
    samples = _integer(table["samples"], "time.samples")
    if not t_max > 0:
        raise ConfigError(f"must be positive, got {t_max}", field="time.t_max_us")
    if samples < 2:
        raise ConfigError(f"need at least 2 samples, got {samples}", field="time.samples")
    return TimeConfig(t_max_us=t_max, samples=samples)


def _parse_decoherence(table: dict[str, Any] | None) -> DecoherenceParams:
    if table is None:
        return DecoherenceParams()
    survival = table.get("survival_time_us")
    dephasing = table.get("dephasing_time_us")
    try:
        return DecoherenceParams(
            survival_time=(
                None if survival is None else _number(survival, "decoherence.survival_time_us")
            ),
            dephasing_time=(
                None
                if dephasing is None
                else _number(dephasing, "decoherence.dephasing_time_us")
            ),
            background_bin=_boolean(
                table.get("background_bin", False), "decoherence.background_bin"
            ),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e), field="decoherence") from e


def _parse_sweep(table: dict[str, Any] | None) -> SweepConfig | None:
    if table is None:
        return None
    photon_order = _integer(table.get("photon_order", 1), "sweep.photon_order")
    if photon_order < 1:
        raise ConfigError(f"must be at least 1, got {photon_order}", field="sweep.photon_order")
    return SweepConfig(
        bond_index=(
            _integer(table["bond_index"], "sweep.bond_index") if "bond_index" in table else None
        ),
        values=_numbers(table.get("values", []), "sweep.values"),
        probe_time_us=_number(
            table.get("probe_time_us", PROTECTION_PROBE_TIME_US), "sweep.probe_time_us"
        ),
        sizes=_integers(table.get("sizes", []), "sweep.sizes"),
        first_label=(
            _integer(table["first_label"], "sweep.first_label")
            if "first_label" in table
            else None
        ),
        fwhm=_boolean(table.get("fwhm", False), "sweep.fwhm"),
        photon_order=photon_order,
    )


def _parse_sfi(table: dict[str, Any] | None) -> SFIConfig:
    if table is None:
        return SFIConfig()
    defaults = SFIConfig()
    config = SFIConfig(
        peak_field_v_per_cm=_number(
            table.get("peak_field_v_per_cm", defaults.peak_field_v_per_cm),
            "sfi.peak_field_v_per_cm",
        ),
        time_constant_us=_number(
            table.get("time_constant_us", defaults.time_constant_us), "sfi.time_constant_us"
        ),
        width_us=_number(table.get("width_us", defaults.width_us), "sfi.width_us"),
        window_us=_number(table.get("window_us", defaults.window_us), "sfi.window_us"),
        samples=_integer(table.get("samples", defaults.samples), "sfi.samples"),
        noise=_number(table.get("noise", defaults.noise), "sfi.noise"),
        quantum_defect=_number(
            table.get("quantum_defect", defaults.quantum_defect), "sfi.quantum_defect"
        ),
        basis_dir=_string(table["basis_dir"], "sfi.basis_dir") if "basis_dir" in table else None,
    )
    if config.noise < 0:
        raise ConfigError(f"must be non-negative, got {config.noise}", field="sfi.noise")
    try:
        RampParams(config.peak_field_v_per_cm, config.time_constant_us)
    except ValueError as e:
        raise ConfigError(str(e), field="sfi") from e
    return config


def _parse_output(table: dict[str, Any] | None) -> OutputConfig:
    if table is None:
        return OutputConfig()
    return OutputConfig(
        directory=(
            _string(table["directory"], "output.directory") if "directory" in table else None
        ),
        stem=_string(table.get("stem", "run"), "output.stem"),
        long_format=_boolean(table.get("long_format", False), "output.long_format"),
    )


def _missing_fields(config: RunConfig) -> list[str]:
    present = {
        "initial_site": config.initial_site is not None,
        "time": config.time is not None,
        "sweep.bond_index": config.sweep is not None and config.sweep.bond_index is not None,
        "sweep.values": config.sweep is not None and bool(config.sweep.values),
        "sweep.sizes": config.sweep is not None and bool(config.sweep.sizes),
    }
    return [name for name in _REQUIRED[config.experiment] if not present[name]]


def parse_config(data: Mapping[str, Any]) -> RunConfig:
    """
    Validate a parsed run file.

    Args:
        data: Mapping as produced by a TOML parser.

    Returns:
        RunConfig: Validated configuration.

    Raises:
        ConfigError: On unknown keys, wrong types, invalid values, or fields the experiment
            needs but the file omits (all missing fields are listed together).
    """
    _check_keys(data, _TOP_LEVEL, "")
    if "experiment" not in data:
        raise ConfigError("missing required field", field="experiment")
    name = _string(data["experiment"], "experiment")
    try:
        experiment = Experiment(name)
    except ValueError as e:
        choices = ", ".join(member.value for member in Experiment)
        raise ConfigError(
            f"unknown experiment {name!r} (choose from {choices})", field="experiment"
        ) from e

    lattice = _parse_lattice(_table(data, "lattice"))
    initial_site = (
        _integer(data["initial_site"], "initial_site") if "initial_site" in data else None
    )
    workers = _integer(data.get("workers", 1), "workers")
    if workers == 0:
        raise ConfigError("must be non-zero", field="workers")

    config = RunConfig(
        experiment=experiment,
        lattice=lattice,
        initial_site=initial_site,
        time=_parse_time(_table(data, "time")),
        decoherence=_parse_decoherence(_table(data, "decoherence")),
        sweep=_parse_sweep(_table(data, "sweep")),
        sfi=_parse_sfi(_table(data, "sfi")),
        output=_parse_output(_table(data, "output")),
        workers=workers,
    )

    missing = _missing_fields(config)
    if missing:
        raise ConfigError(
            f"experiment {experiment.value!r} requires: {', '.join(missing)}", field="experiment"
        )
    if initial_site is not None:
        try:
            lattice.label_index(initial_site)
        except IndexError as e:
            raise ConfigError(str(e), field="initial_site") from e
    if experiment is Experiment.SPLITTING_VS_SIZE and lattice.size < 3:
        raise ConfigError(
            "needs weak and strong couplings (at least 3 sites)", field="lattice.couplings_khz"
        )
    return config


def load_config(path: str | Path) -> RunConfig:
    """
    Read and validate a TOML run file.

    Raises:
        ConfigError: If the file cannot be read, is not valid TOML, or fails validation.
    """
    path = Path(path)
    try:
        with path.open("rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path} is not valid TOML: {e}") from e

    config = parse_config(data)
    logger.info("Loaded %s experiment from %s", config.experiment.value, path)
    return config
