"""Tests for CSV and JSON output."""

import json
import math
from pathlib import Path
import tempfile

import numpy as np
import pytest

from rydberg_ssh.analysis import SweepResult
from rydberg_ssh.dynamics import PopulationTrajectory
from rydberg_ssh.lattice import LatticeSpec, build_hamiltonian
from rydberg_ssh.spectral import diagonalize
from rydberg_ssh.writers import (
    atomic_open,
    format_float,
    write_dressed,
    write_long,
    write_rows,
    write_summary,
    write_sweep,
    write_trajectory,
)


def _trajectory(background: bool = False) -> PopulationTrajectory:
    return PopulationTrajectory(
        times=np.array([0.0, 0.5]),
        populations=np.array([[1.0, 0.0], [0.25, 0.75]]),
        survival=np.array([1.0, 0.9]),
        site_labels=(58, 59),
        normalized=True,
        background=np.array([0.0, 0.1]) if background else None,
    )


def _write_then_fail(target: Path) -> None:
    with atomic_open(target) as f:
        f.write("partial")
        raise RuntimeError("boom")


def test_format_float() -> None:
    """Test nine significant digits and no negative zero."""
    assert format_float(1 / 3) == "0.333333333"
    assert format_float(-0.0) == "0"
    assert format_float(1e-12) == "1e-12"
    assert format_float(6.145117123456) == "6.14511712"


def test_write_trajectory_schema() -> None:
    """Test the trajectory header and one row per time."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = write_trajectory(_trajectory(), Path(tmpdir) / "traj.csv")
        lines = path.read_text().splitlines()

        with_bg = write_trajectory(_trajectory(background=True), Path(tmpdir) / "bg.csv")
        bg_header = with_bg.read_text().splitlines()[0]

    assert lines == ["t_us,p_58,p_59,survival", "0,1,0,1", "0.5,0.25,0.75,0.9"]
    assert bg_header == "t_us,p_58,p_59,survival,background_absolute"


def test_write_dressed_schema() -> None:
    """Test dressed states are listed with energies and bare weights."""
    spectrum = diagonalize(build_hamiltonian(LatticeSpec((58, 59), (160.0,))))
    with tempfile.TemporaryDirectory() as tmpdir:
        lines = write_dressed(spectrum, Path(tmpdir) / "d.csv").read_text().splitlines()

    assert lines[0] == "state,energy_khz,w_58,w_59"
    assert lines[1] == "1,-80,0.5,0.5"
    assert lines[2] == "2,80,0.5,0.5"


def test_write_sweep_schema() -> None:
    """Test sweep tables start with the parameter column."""
    result = SweepResult(
        parameter_name="bond_0_detuning",
        parameter_unit="kHz",
        parameter_values=np.array([-1.0, 0.0, 1.0]),
        observables=({"splitting_khz": 7.0}, {"splitting_khz": 6.0}, {"splitting_khz": 7.0}),
    )
    with tempfile.TemporaryDirectory() as tmpdir:
        lines = write_sweep(result, Path(tmpdir) / "s.csv").read_text().splitlines()

    assert lines == ["param_value,splitting_khz", "-1,7", "0,6", "1,7"]


def test_write_long_format() -> None:
    """Test long format has one row per point per series."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = write_long(Path(tmpdir) / "l.csv", [0.0, 1.0], {"a": [1.0, 2.0], "b": [3.0, 4.0]})
        lines = path.read_text().splitlines()

        with pytest.raises(ValueError, match="'b'"):
            write_long(Path(tmpdir) / "bad.csv", [0.0, 1.0], {"a": [1.0, 2.0], "b": [3.0]})

    assert lines == ["x,series,value", "0,a,1", "1,a,2", "0,b,3", "1,b,4"]


def test_write_summary_json() -> None:
    """Test summaries are sorted, rounded and free of NaN."""
    summary = {
        "zeta": 1,
        "alpha": 1 / 3,
        "missing": math.nan,
        "path": Path("/tmp/run_sweep.csv"),
        "nested": {"values": (np.float64(2.5), np.int64(3))},
        "flag": True,
    }
    with tempfile.TemporaryDirectory() as tmpdir:
        text = write_summary(summary, Path(tmpdir) / "summary.json").read_text()

    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["alpha"] == 0.333333333
    assert data["missing"] is None
    assert data["path"] == "run_sweep.csv"
    assert data["nested"] == {"values": [2.5, 3]}
    assert data["flag"] is True
    assert text.endswith("}\n")


def test_writes_are_deterministic() -> None:
    """Test the same data produces byte-identical files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        first = write_trajectory(_trajectory(True), Path(tmpdir) / "a.csv").read_bytes()
        second = write_trajectory(_trajectory(True), Path(tmpdir) / "b.csv").read_bytes()
    assert first == second


def test_atomic_open_leaves_nothing_on_failure() -> None:
    """Test a failed write leaves neither the target nor a temporary file."""
    with tempfile.TemporaryDirectory() as tmpdir:
        target = Path(tmpdir) / "out.csv"
        with pytest.raises(RuntimeError, match="boom"):
            _write_then_fail(target)

        assert not target.exists()
        assert list(Path(tmpdir).iterdir()) == []


def test_write_rows_replaces_existing_file() -> None:
    """Test rewriting a file replaces its content without stray temporaries."""
    with tempfile.TemporaryDirectory() as tmpdir:
        target = Path(tmpdir) / "rows.csv"
        target.write_text("old\n")
        write_rows(target, ["a", "b"], [[1, 2.5], ["x", -0.0]])

        assert target.read_text() == "a,b\n1,2.5\nx,0\n"
        assert [p.name for p in Path(tmpdir).iterdir()] == ["rows.csv"]
