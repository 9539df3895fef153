"""Dressed-state spectrum of the chain Hamiltonian and bare <-> dressed projections."""

from dataclasses import dataclass
import logging

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigh_tridiagonal

from rydberg_ssh.errors import LatticeSpecError, NumericError, UnsupportedConfigurationError
from rydberg_ssh.lattice import HamiltonianMatrix

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

# Relative tolerance for treating two vector components as equally large.
_PIVOT_TOLERANCE = 1e-10
# Eigenvalues closer than this, relative to the matrix scale, are treated as degenerate.
_DEGENERACY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DressedSpectrum:
    """
    Eigen-decomposition of a chain Hamiltonian.

    Attributes:
        eigenvalues: Dressed frequencies in kHz, non-decreasing.
        eigenvectors: Orthonormal real vectors as columns; column alpha belongs to
            eigenvalue alpha. Each column's largest-magnitude component is positive.
        site_labels: Labels of the bare states indexing the rows.
    """

    eigenvalues: FloatArray
    eigenvectors: FloatArray
    site_labels: tuple[int, ...]

    @property
    def size(self) -> int:
        """Number of dressed states M."""
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> FloatArray:
        """Return V diag(omega) V^T."""
        v = self.eigenvectors
        return np.asarray((v * self.eigenvalues) @ v.T, dtype=np.float64)


def _pivot_indices(vectors: FloatArray) -> npt.NDArray[np.intp]:
    """Index of the first component of each column within tolerance of its largest magnitude."""
    magnitudes = np.abs(vectors)
    threshold = magnitudes.max(axis=0) * (1.0 - _PIVOT_TOLERANCE)
    return np.argmax(magnitudes >= threshold, axis=0)


def _degenerate_groups(eigenvalues: FloatArray, scale: float) -> npt.NDArray[np.intp]:
    """Group index of each ascending eigenvalue; neighbours within tolerance share a group."""
    gaps = np.diff(eigenvalues) > _DEGENERACY_TOLERANCE * scale
    return np.concatenate(([0], np.cumsum(gaps))).astype(np.intp)


def diagonalize(h: HamiltonianMatrix) -> DressedSpectrum:
    """
    Diagonalize a symmetric tridiagonal chain Hamiltonian.

    Eigenvalues are sorted ascending; degenerate eigenvalues (equal to within a relative
    tolerance of the matrix scale, and then reported as one value) are ordered by the index
    of their eigenvector's largest component, and each eigenvector is signed so that this
    component is positive.

    Args:
        h: Chain Hamiltonian.

    Returns:
        DressedSpectrum: Dressed energies and states.

    Raises:
        NumericError: If the matrix has non-finite entries.
        LatticeSpecError: If the matrix is not symmetric tridiagonal.
    """
    entries = h.entries
    if not np.all(np.isfinite(entries)):
        raise NumericError("Hamiltonian has non-finite entries")
    scale = max(1.0, float(np.abs(entries).max()))
    if not np.allclose(entries, entries.T, rtol=0.0, atol=1e-12 * scale):
        raise LatticeSpecError("Hamiltonian is not symmetric")
    if np.any(np.triu(entries, k=2)) or np.any(np.tril(entries, k=-2)):
        raise LatticeSpecError("Hamiltonian is not tridiagonal")

    diagonal = np.diag(entries).astype(np.float64)
    off_diagonal = np.diag(entries, k=1).astype(np.float64)

    try:
        # stev is the implicit QL/QR driver; deterministic for these small matrices.
        eigenvalues, eigenvectors = eigh_tridiagonal(
            diagonal, off_diagonal, lapack_driver="stev"
        )
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Eigensolver failed to converge: {e}") from e

    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]
    groups = _degenerate_groups(eigenvalues, scale)
    # Degenerate members share one value so the ascending order survives the tie-break.
    eigenvalues = np.bincount(groups, weights=eigenvalues)[groups] / np.bincount(groups)[groups]

    pivots = _pivot_indices(eigenvectors)
    order = np.lexsort((pivots, groups))
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    pivots = pivots[order]

    signs = np.sign(eigenvectors[pivots, np.arange(eigenvectors.shape[1])])
    eigenvectors = eigenvectors * signs

    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    logger.debug("Diagonalized %dx%d Hamiltonian: %s", h.dim, h.dim, eigenvalues)
    return DressedSpectrum(
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        site_labels=h.site_labels,
    )


def project_bare(spec: DressedSpectrum, site_index: int) -> FloatArray:
    """
    Project a bare state onto the dressed basis.

    Args:
        spec: Dressed spectrum.
        site_index: Row index of the bare state |ns>.

    Returns:
        FloatArray: Amplitudes <alpha|ns> for alpha = 0..M-1.

    Raises:
        IndexError: If the site index is out of range.
    """
    if not 0 <= site_index < spec.size:
        raise IndexError(f"Site index {site_index} out of range for {spec.size} sites")
    return spec.eigenvectors[site_index, :].copy()


def dressed_weights(spec: DressedSpectrum, site_index: int) -> FloatArray:
    """Return the probabilities |<alpha|ns>|^2 of a bare state over the dressed states."""
    return project_bare(spec, site_index) ** 2


def mid_gap_pair(spec: DressedSpectrum) -> tuple[int, int]:
    """
    Return the indices of the two dressed states straddling zero energy.

    Raises:
        UnsupportedConfigurationError: If the chain has an odd number of sites.
    """
    if spec.size % 2:
        raise UnsupportedConfigurationError(
            f"Edge-state pair is only defined for even chains, got {spec.size} sites"
        )
    upper = spec.size // 2
    return upper - 1, upper


def edge_splitting(spec: DressedSpectrum) -> float:
    """
    Energy separation of the quasi-degenerate mid-gap (edge) pair in kHz.

    For a two-site chain this is the full Rabi splitting; at the chiral point of a longer
    staggered chain it is the edge-to-edge tunneling frequency.

    Raises:
        UnsupportedConfigurationError: If the chain has an odd number of sites.
    """
    lower, upper = mid_gap_pair(spec)
    return float(spec.eigenvalues[upper] - spec.eigenvalues[lower])


def sublattice_weights(vector: FloatArray) -> tuple[float, float]:
    """Return the (even-site, odd-site) probability weight of a lattice vector."""
    probabilities = np.asarray(vector, dtype=np.float64) ** 2
    return float(probabilities[0::2].sum()), float(probabilities[1::2].sum())
