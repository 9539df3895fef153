"""Single-particle SSH lattice description and Hamiltonian construction.

Couplings and detunings are ordinary frequencies in kHz. The rotating-frame Hamiltonian has
Rabi frequency / 2 on the off-diagonal and on-site terms accumulated from the per-bond
detunings, with the first site as the zero reference.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np
import numpy.typing as npt

from rydberg_ssh.errors import LatticeSpecError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class LatticeSpec:
    """
    Declarative description of a synthetic lattice of coupled Rydberg levels.

    Attributes:
        site_labels: Principal quantum numbers of the sites, strictly increasing (e.g. 58..63).
        coupling_pattern: Rabi frequency of each bond n -> n+1 in kHz (M - 1 values).
        bond_detunings: Detuning of each bond's drive in kHz (M - 1 values, 0 = resonant).
    """

    site_labels: tuple[int, ...]
    coupling_pattern: tuple[float, ...]
    bond_detunings: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        labels = tuple(int(label) for label in self.site_labels)
        couplings = tuple(float(c) for c in self.coupling_pattern)
        # An omitted detuning list means a fully resonant chain.
        detunings = (
            tuple(float(d) for d in self.bond_detunings)
            if self.bond_detunings
            else (0.0,) * (len(labels) - 1)
        )
        object.__setattr__(self, "site_labels", labels)
        object.__setattr__(self, "coupling_pattern", couplings)
        object.__setattr__(self, "bond_detunings", detunings)

        if len(labels) < 2:
            raise LatticeSpecError(f"A lattice needs at least 2 sites, got {len(labels)}")
        if len(couplings) != len(labels) - 1:
            raise LatticeSpecError(
                f"Expected {len(labels) - 1} couplings for {len(labels)} sites, "
                f"got {len(couplings)}"
            )
        if len(detunings) != len(labels) - 1:
            raise LatticeSpecError(
                f"Expected {len(labels) - 1} bond detunings for {len(labels)} sites, "
                f"got {len(detunings)}"
            )
        if not all(math.isfinite(c) for c in couplings):
            raise LatticeSpecError(f"Couplings must be finite: {couplings}")
        if not all(math.isfinite(d) for d in detunings):
            raise LatticeSpecError(f"Bond detunings must be finite: {detunings}")
        if any(b <= a for a, b in zip(labels, labels[1:])):
            raise LatticeSpecError(f"Site labels must be strictly increasing: {labels}")

    @classmethod
    def from_pattern(
        cls,
        site_labels: Sequence[int],
        weak: float,
        strong: float,
        bond_detunings: Sequence[float] = (),
    ) -> "LatticeSpec":
        """
        Build the alternating weak/strong chain used in the experiment.

        The first bond is weak, so an even chain starts and ends on a weak bond and hosts
        edge states.

        Args:
            site_labels: Site labels, strictly increasing.
            weak: Weak Rabi frequency Omega_W in kHz.
            strong: Strong Rabi frequency Omega_S in kHz.
            bond_detunings: Optional per-bond detunings in kHz.

        Returns:
            LatticeSpec: The staggered chain.
        """
        couplings = tuple(weak if i % 2 == 0 else strong for i in range(len(site_labels) - 1))
        return cls(tuple(site_labels), couplings, tuple(bond_detunings))

    @property
    def size(self) -> int:
        """Number of lattice sites M."""
        return len(self.site_labels)

    @property
    def is_resonant(self) -> bool:
        """True when every bond is driven on resonance."""
        return all(d == 0.0 for d in self.bond_detunings)

    def label_index(self, label: int) -> int:
        """
        Return the row index of the site with the given label.

        Raises:
            IndexError: If no site carries the label.
        """
        try:
            return self.site_labels.index(int(label))
        except ValueError:
            raise IndexError(f"No site labelled {label} in {self.site_labels}") from None

    def with_bond_detuning(self, bond_index: int, detuning: float) -> "LatticeSpec":
        """
        Return a copy with one bond's detuning replaced.

        Raises:
            IndexError: If the bond index is out of range.
        """
        if not 0 <= bond_index < self.size - 1:
            raise IndexError(f"Bond index {bond_index} out of range for {self.size - 1} bonds")
        detunings = list(self.bond_detunings)
        detunings[bond_index] = float(detuning)
        return replace(self, bond_detunings=tuple(detunings))

    def reversed(self) -> "LatticeSpec":
        """
        Return the end-for-end mirror of this chain.

        Labels keep their increasing order; couplings are reversed and bond detunings are
        reversed and negated, so the on-site terms are mirrored up to a uniform offset.
        """
        return replace(
            self,
            coupling_pattern=self.coupling_pattern[::-1],
            bond_detunings=tuple(-d for d in self.bond_detunings[::-1]),
        )


@dataclass(frozen=True)
class HamiltonianMatrix:
    """
    Dense real symmetric tridiagonal Hamiltonian in kHz.

    Attributes:
        entries: M x M read-only array.
        site_labels: Labels of the rows, taken from the lattice specification.
    """

    entries: FloatArray
    site_labels: tuple[int, ...]

    @property
    def dim(self) -> int:
        """Matrix dimension M."""
        return int(self.entries.shape[0])

    @property
    def diagonal(self) -> FloatArray:
        """On-site terms U_n."""
        return np.diag(self.entries).copy()

    @property
    def off_diagonal(self) -> FloatArray:
        """Hopping terms Omega_{n,n+1} / 2."""
        return np.diag(self.entries, k=1).copy()

    @property
    def is_chiral(self) -> bool:
        """True when all on-site terms vanish (no coupling within a sublattice)."""
        return bool(np.all(self.diagonal == 0.0))


def build_hamiltonian(spec: LatticeSpec) -> HamiltonianMatrix:
    """
    Construct the rotating-frame chain Hamiltonian.

    Args:
        spec: Lattice specification.

    Returns:
        HamiltonianMatrix: Tridiagonal matrix with Omega / 2 off-diagonals and cumulative
        on-site detunings (U at the first site fixed to 0).
    """
    off_diagonal = np.asarray(spec.coupling_pattern, dtype=np.float64) / 2.0
    diagonal = np.concatenate(
        ([0.0], np.cumsum(np.asarray(spec.bond_detunings, dtype=np.float64)))
    )

    entries = np.diag(diagonal) + np.diag(off_diagonal, k=1) + np.diag(off_diagonal, k=-1)
    entries.setflags(write=False)

    logger.debug(
        "Built %dx%d Hamiltonian for sites %s", spec.size, spec.size, spec.site_labels
    )
    return HamiltonianMatrix(entries=entries, site_labels=spec.site_labels)
