"""Tests for run-file parsing and validation."""

from pathlib import Path
import tempfile
from typing import Any

import numpy as np
import pytest

from rydberg_ssh.config import Experiment, load_config, parse_config
from rydberg_ssh.errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

LATTICE = {
    "labels": [58, 59, 60, 61, 62, 63],
    "couplings_khz": [160.0, 800.0, 160.0, 800.0, 160.0],
}


def _evolve(**overrides: Any) -> dict[str, Any]:
    data: dict[str, Any] = {
        "experiment": "evolve",
        "initial_site": 59,
        "lattice": dict(LATTICE),
        "time": {"t_max_us": 20.0, "samples": 401},
    }
    data.update(overrides)
    return data


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.toml")), ids=lambda p: p.stem)
def test_bundled_configs_load(path: Path) -> None:
    """Test every shipped run file validates."""
    config = load_config(path)
    assert config.output.stem == path.stem
    assert set(config.lattice.site_labels) <= set(range(58, 64))
    assert config.lattice.site_labels[-1] == 63


def test_parse_evolve() -> None:
    """Test a minimal evolve run file."""
    config = parse_config(_evolve())

    assert config.experiment is Experiment.EVOLVE
    assert config.initial_index == 1
    assert config.time is not None
    grid = config.time.grid()
    assert grid.size == 401
    assert grid[-1] == pytest.approx(20.0)
    assert config.decoherence.is_closed
    assert config.workers == 1
    assert config.output.stem == "run"


def test_parse_explicit_time_grid() -> None:
    """Test an explicit grid is used as given."""
    config = parse_config(_evolve(time={"grid_us": [0.0, 0.5, 2.0]}))
    assert config.time is not None
    assert np.array_equal(config.time.grid(), [0.0, 0.5, 2.0])


@pytest.mark.parametrize(
    ("time", "match"),
    [
        ({"grid_us": [0.0], "samples": 3}, "either grid_us"),
        ({"grid_us": []}, "must not be empty"),
        ({"t_max_us": 5.0}, "time.samples"),
        ({"t_max_us": 0.0, "samples": 10}, "must be positive"),
        ({"t_max_us": 5.0, "samples": 1}, "at least 2"),
    ],
)
def test_invalid_time_tables(time: dict[str, Any], match: str) -> None:
    """Test malformed [time] tables are rejected."""
    with pytest.raises(ConfigError, match=match):
        parse_config(_evolve(time=time))


def test_unknown_key_names_dotted_path() -> None:
    """Test a misspelled key is reported with its table."""
    data = _evolve()
    data["lattice"]["coupling_khz"] = [1.0]
    with pytest.raises(ConfigError, match="unknown key") as info:
        parse_config(data)
    assert info.value.field == "lattice.coupling_khz"

    with pytest.raises(ConfigError) as info:
        parse_config(_evolve(seed=3))
    assert info.value.field == "seed"


def test_missing_fields_listed_together() -> None:
    """Test every field the experiment needs is listed when absent."""
    data = _evolve(experiment="sweep_protection")
    with pytest.raises(ConfigError, match="sweep.bond_index, sweep.values") as info:
        parse_config(data)
    assert info.value.field == "experiment"

    del data["initial_site"]
    with pytest.raises(ConfigError, match="initial_site, sweep.bond_index"):
        parse_config(data)


def test_empty_config_rejected() -> None:
    """Test a file without an experiment is a config error."""
    with pytest.raises(ConfigError, match="missing required field") as info:
        parse_config({})
    assert info.value.field == "experiment"


def test_unknown_experiment() -> None:
    """Test unknown experiments list the valid choices."""
    with pytest.raises(ConfigError, match="choose from evolve"):
        parse_config(_evolve(experiment="teleport"))


def test_missing_lattice() -> None:
    """Test the lattice table is required."""
    data = _evolve()
    del data["lattice"]
    with pytest.raises(ConfigError, match="missing required table"):
        parse_config(data)

    with pytest.raises(ConfigError) as info:
        parse_config(_evolve(lattice={"labels": [58, 59]}))
    assert info.value.field == "lattice.couplings_khz"


def test_invalid_lattice_wrapped() -> None:
    """Test lattice invariant violations are reported against the lattice table."""
    with pytest.raises(ConfigError, match="lattice:") as info:
        parse_config(_evolve(lattice={"labels": [58, 59, 60], "couplings_khz": [160.0]}))
    assert info.value.field == "lattice"


@pytest.mark.parametrize(
    ("overrides", "field"),
    [
        ({"initial_site": True}, "initial_site"),
        ({"initial_site": 59.0}, "initial_site"),
        ({"workers": "4"}, "workers"),
        ({"workers": 0}, "workers"),
        ({"decoherence": {"background_bin": 1}}, "decoherence.background_bin"),
        ({"decoherence": {"survival_time_us": True}}, "decoherence.survival_time_us"),
        ({"lattice": {**LATTICE, "labels": [58, 59, 60, 61, 62, True]}}, "lattice.labels[5]"),
        ({"output": {"stem": ""}}, "output.stem"),
    ],
)
def test_wrong_types_rejected(overrides: dict[str, Any], field: str) -> None:
    """Test booleans are never accepted as numbers and vice versa."""
    with pytest.raises(ConfigError) as info:
        parse_config(_evolve(**overrides))
    assert info.value.field == field


def test_decoherence_values_validated() -> None:
    """Test non-positive lifetimes are config errors."""
    with pytest.raises(ConfigError, match="decoherence:.*survival_time"):
        parse_config(_evolve(decoherence={"survival_time_us": -1.0}))

    config = parse_config(
        _evolve(decoherence={"survival_time_us": 70.0, "dephasing_time_us": 30.0})
    )
    assert config.decoherence.survival_time == 70.0
    assert config.decoherence.dephasing_time == 30.0


def test_initial_site_must_be_a_label() -> None:
    """Test the initial site is given as a lattice label."""
    with pytest.raises(ConfigError) as info:
        parse_config(_evolve(initial_site=1))
    assert info.value.field == "initial_site"


def test_sfi_table() -> None:
    """Test SFI defaults, overrides and validation."""
    config = parse_config(_evolve(experiment="sfi_pipeline"))
    assert config.sfi.ramp.peak_field == 40.0
    assert config.sfi.noise == 0.0

    config = parse_config(_evolve(experiment="sfi_pipeline", sfi={"noise": 0.01, "samples": 501}))
    assert config.sfi.noise == 0.01
    assert config.sfi.samples == 501

    with pytest.raises(ConfigError, match="non-negative"):
        parse_config(_evolve(sfi={"noise": -0.1}))
    with pytest.raises(ConfigError, match="sfi:.*time_constant"):
        parse_config(_evolve(sfi={"time_constant_us": 0.0}))


def test_size_scaling_needs_two_couplings() -> None:
    """Test size scaling reads weak and strong couplings from the lattice."""
    data = {
        "experiment": "splitting_vs_size",
        "lattice": {"labels": [58, 59], "couplings_khz": [160.0]},
        "sweep": {"sizes": [4, 6]},
    }
    with pytest.raises(ConfigError, match="at least 3 sites"):
        parse_config(data)


def test_load_config_file_errors() -> None:
    """Test unreadable and malformed files are config errors."""
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/run.toml")

    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "bad.toml"
        path.write_text('experiment = "evolve\n')
        with pytest.raises(ConfigError, match="not valid TOML"):
            load_config(path)

        empty = Path(tmpdir) / "empty.toml"
        empty.write_text("")
        with pytest.raises(ConfigError, match="experiment"):
            load_config(empty)


def test_sweep_photon_order() -> None:
    """Test the drive photon order defaults to one and must be a positive integer."""
    sweep = {"bond_index": 0, "values": [-1.0, 0.0, 1.0]}
    config = parse_config(_evolve(experiment="sweep_edge_detuning", sweep=sweep))
    assert config.sweep is not None
    assert config.sweep.photon_order == 1

    config = parse_config(
        _evolve(experiment="sweep_edge_detuning", sweep={**sweep, "photon_order": 2})
    )
    assert config.sweep is not None
    assert config.sweep.photon_order == 2

    with pytest.raises(ConfigError, match="at least 1") as info:
        parse_config(_evolve(experiment="sweep_edge_detuning", sweep={**sweep, "photon_order": 0}))
    assert info.value.field == "sweep.photon_order"
    with pytest.raises(ConfigError, match="expected an integer"):
        parse_config(_evolve(sweep={**sweep, "photon_order": 2.0}))
