"""Tests for field-ionization timing, trace synthesis and unmixing."""

import math

import numpy as np
import pytest

from rydberg_ssh.constants import ATOMIC_UNIT_FIELD_V_PER_CM, LATTICE_LABELS
from rydberg_ssh.dynamics import DecoherenceParams, evolve, fractionalize
from rydberg_ssh.errors import DegenerateInputError, IllPosedError, IonizationDomainError
from rydberg_ssh.lattice import LatticeSpec, build_hamiltonian
from rydberg_ssh.sfi import (
    RampParams,
    SFITrace,
    add_noise,
    background_trace,
    ionization_field,
    ionization_time,
    mix_traces,
    ramp_grid,
    synthesize_trace,
    unmix,
)
from rydberg_ssh.spectral import diagonalize

RAMP = RampParams()


def _basis(labels: tuple[int, ...] = LATTICE_LABELS) -> list[SFITrace]:
    grid = ramp_grid(RAMP)
    return [synthesize_trace(n, RAMP, grid=grid) for n in labels]


def test_ionization_field_values() -> None:
    """Test the adiabatic threshold formula and its atomic-unit conversion."""
    assert ionization_field(58) == pytest.approx(36.08, abs=0.01)
    assert ionization_field(58) < RAMP.peak_field
    assert ionization_field(2, quantum_defect=0.0) == pytest.approx(
        ATOMIC_UNIT_FIELD_V_PER_CM / 256
    )
    fields = [ionization_field(n) for n in LATTICE_LABELS]
    assert all(a > b for a, b in zip(fields, fields[1:]))


def test_ionization_field_domain() -> None:
    """Test n must exceed the quantum defect."""
    with pytest.raises(IonizationDomainError, match="quantum defect"):
        ionization_field(3)
    with pytest.raises(ValueError, match="quantum defect"):
        ionization_field(2, quantum_defect=2.0)


def test_ionization_time_inverts_ramp() -> None:
    """Test the ramp reaches E_p (1 - 1/e) after one time constant."""
    field = RAMP.peak_field * (1 - math.exp(-1.0))
    assert ionization_time(field, RAMP) == pytest.approx(RAMP.time_constant)
    assert ionization_time(1e-9, RAMP) == pytest.approx(0.0, abs=1e-9)
    assert float(RAMP.field_at(ionization_time(25.0, RAMP))) == pytest.approx(25.0)


def test_ionization_times_decrease_with_n() -> None:
    """Test higher states ionize earlier on the ramp."""
    times = [ionization_time(ionization_field(n), RAMP) for n in range(57, 64)]
    assert times == pytest.approx([17.754, 11.62, 9.131, 7.599, 6.518, 5.697, 5.046], abs=2e-3)
    assert all(a > b for a, b in zip(times, times[1:]))


def test_ionization_time_outside_ramp() -> None:
    """Test fields the ramp never reaches are an explicit error."""
    with pytest.raises(IonizationDomainError, match="never reached"):
        ionization_time(ionization_field(56), RAMP)
    with pytest.raises(IonizationDomainError, match="positive"):
        ionization_time(0.0, RAMP)


def test_ramp_params_validated() -> None:
    """Test ramp parameters must be positive."""
    with pytest.raises(ValueError, match="peak_field"):
        RampParams(peak_field=0.0)
    with pytest.raises(ValueError, match="time_constant"):
        RampParams(time_constant=-5.0)
    assert np.allclose(RAMP.field_at([0.0, 1e6]), [0.0, RAMP.peak_field])


def test_synthesized_traces_have_unit_area() -> None:
    """Test each peak integrates to one and sits at its ionization time."""
    for n, trace in zip(LATTICE_LABELS, _basis()):
        assert trace.label == f"{n}s"
        assert trace.area() == pytest.approx(1.0, abs=1e-6)
        peak_time = trace.times[int(np.argmax(trace.signal))]
        assert peak_time == pytest.approx(ionization_time(ionization_field(n), RAMP), abs=0.01)


def test_synthesize_trace_validation() -> None:
    """Test a non-positive width and a non-ionizing state are rejected."""
    with pytest.raises(ValueError, match="width"):
        synthesize_trace(58, RAMP, width=0.0)
    with pytest.raises(IonizationDomainError):
        synthesize_trace(56, RAMP)


def test_trace_invariants() -> None:
    """Test traces reject negative or mismatched signals."""
    with pytest.raises(ValueError, match="non-negative"):
        SFITrace(np.array([0.0, 1.0]), np.array([0.0, -1.0]))
    with pytest.raises(ValueError, match="equal length"):
        SFITrace(np.array([0.0, 1.0]), np.array([0.0]))


def test_unmix_two_state_mixture() -> None:
    """Test a noiseless 0.6/0.4 mixture is recovered exactly."""
    basis = _basis()
    observed = mix_traces([0.0, 0.6, 0.4, 0.0, 0.0, 0.0], basis)
    result = unmix(observed, basis)

    assert np.allclose(result.normalized, [0.0, 0.6, 0.4, 0.0, 0.0, 0.0], atol=1e-6)
    assert result.labels == tuple(f"{n}s" for n in LATTICE_LABELS)
    assert result.background is None
    assert result.residual_norm < 1e-8
    assert result.as_dict()["59s"] == pytest.approx(0.6, abs=1e-6)


def test_unmix_single_trace_is_indicator() -> None:
    """Test a lone basis trace unmixes to an indicator vector."""
    basis = _basis()
    result = unmix(basis[3], basis)
    assert np.allclose(result.normalized, np.eye(6)[3], atol=1e-6)


def test_unmix_round_trip_random_populations() -> None:
    """Test random probability vectors survive synthesis and unmixing."""
    rng = np.random.default_rng(2024)
    basis = _basis()
    for _ in range(20):
        p = rng.dirichlet(np.ones(6))
        scale = rng.uniform(0.1, 2.0)
        result = unmix(mix_traces(list(scale * p), basis), basis)

        assert np.allclose(result.normalized, p, atol=1e-6)
        assert np.allclose(result.raw, scale * p, atol=1e-6)
        assert np.all(result.raw >= 0)


def test_unmix_with_noise() -> None:
    """Test 1% noise leaves every population within 0.05."""
    basis = _basis()
    for seed in range(10):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(6))
        observed = add_noise(mix_traces(list(p), basis), 0.01, rng)
        result = unmix(observed, basis)

        assert np.abs(result.normalized - p).max() < 0.05
        assert np.all(observed.signal >= 0)


def test_unmix_with_background() -> None:
    """Test the background coefficient absorbs decayed population."""
    basis = _basis()
    centers = [ionization_time(ionization_field(n), RAMP) for n in LATTICE_LABELS]
    background = background_trace(basis[0].times, centers)
    p = np.array([0.1, 0.3, 0.2, 0.2, 0.1, 0.1])
    observed = mix_traces(list(0.7 * p), basis, background, background_weight=0.3)
    result = unmix(observed, basis, background)

    assert background.label == "3P"
    assert np.allclose(result.normalized, p, atol=1e-6)
    assert result.background == pytest.approx(0.3, abs=1e-6)


def test_unmix_rank_deficient_basis() -> None:
    """Test a duplicated basis trace is reported with the offending pair."""
    basis = _basis((58, 59, 60))
    duplicate = SFITrace(basis[1].times, basis[1].signal, label="copy")
    with pytest.raises(IllPosedError, match="linearly dependent") as info:
        unmix(basis[0], [*basis, duplicate])
    assert info.value.pair == ("59s", "copy")


def test_unmix_rejects_mismatched_grid() -> None:
    """Test basis and observed traces must share a grid."""
    basis = _basis((58, 59))
    other = synthesize_trace(58, RAMP, grid=np.linspace(0.0, 20.0, 501))
    with pytest.raises(ValueError, match="grid"):
        unmix(other, basis)
    with pytest.raises(ValueError, match="at least one"):
        unmix(other, [])


def test_unmix_empty_signal() -> None:
    """Test an observed trace with no signal has no population distribution."""
    basis = _basis((58, 59))
    silent = SFITrace(basis[0].times, np.zeros_like(basis[0].signal))
    with pytest.raises(DegenerateInputError):
        unmix(silent, basis)


def test_evolve_to_sfi_round_trip() -> None:
    """Test populations from a decaying evolution survive detection and unmixing."""
    spec = LatticeSpec.from_pattern(LATTICE_LABELS, 160.0, 800.0)
    dec = DecoherenceParams(survival_time=70.0, dephasing_time=30.0, background_bin=True)
    trajectory = fractionalize(
        evolve(diagonalize(build_hamiltonian(spec)), 1, np.linspace(0.0, 20.0, 21), dec)
    )
    assert trajectory.background is not None
    basis = _basis()
    centers = [ionization_time(ionization_field(n), RAMP) for n in LATTICE_LABELS]
    background = background_trace(basis[0].times, centers)

    for i in range(trajectory.times.size):
        weights = trajectory.populations[i] * trajectory.survival[i]
        observed = mix_traces(list(weights), basis, background, trajectory.background[i])
        recovered = unmix(observed, basis, background)
        assert np.abs(recovered.normalized - trajectory.populations[i]).max() < 1e-4
