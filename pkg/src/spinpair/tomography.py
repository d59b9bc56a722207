"""Simulated reduced state tomography with the {II, IX, IY, XX} readout set,
linear least-squares density-matrix reconstruction, and the Jozsa-Uhlmann
fidelity between density matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import validate_density_matrix
from .spinops import pulse

SETTINGS = ("II", "IX", "IY", "XX")

# NMR-detectable single-quantum elements read after each setting's rotation:
# spin-1 coherences (0,2), (1,3) and spin-2 coherences (0,1), (2,3).
DETECTED_ELEMENTS = ((0, 2), (1, 3), (0, 1), (2, 3))


@dataclass(frozen=True)
class TomographyRecord:
    """Real/imaginary parts of the detected elements for one readout setting."""

    setting: str
    observables: tuple[float, ...]


def readout_unitary(setting: str) -> np.ndarray:
    """Rotation applied before detection: identity, pi/2 x or y on spin 2,
    or pi/2 x on both spins."""
    if setting == "II":
        return np.eye(4, dtype=complex)
    if setting == "IX":
        return pulse(np.pi / 2.0, "x", "spin2")
    if setting == "IY":
        return pulse(np.pi / 2.0, "y", "spin2")
    if setting == "XX":
        return pulse(np.pi / 2.0, "x", "both")
    raise ValueError(f"setting must be one of {SETTINGS}, got {setting!r}")


def _detected_observables(rho: np.ndarray, setting: str) -> list[float]:
    u = readout_unitary(setting)
    rotated = u @ rho @ u.conj().T
    obs: list[float] = []
    for r, s in DETECTED_ELEMENTS:
        obs.append(float(rotated[r, s].real))
        obs.append(float(rotated[r, s].imag))
    return obs


def simulate_readout(rho: np.ndarray, setting: str) -> TomographyRecord:
    """Expectation values observable in one tomography experiment."""
    rho = validate_density_matrix(rho)
    return TomographyRecord(setting, tuple(_detected_observables(rho, setting)))


def _deviation_basis() -> list[np.ndarray]:
    """15 traceless Hermitian matrices spanning the unit-trace manifold's tangent."""
    basis: list[np.ndarray] = []
    for r in range(4):
        for s in range(r + 1, 4):
            sym = np.zeros((4, 4), dtype=complex)
            sym[r, s] = sym[s, r] = 1.0
            basis.append(sym)
            antisym = np.zeros((4, 4), dtype=complex)
            antisym[r, s] = -1j
            antisym[s, r] = 1j
            basis.append(antisym)
    for k in range(3):
        diag = np.zeros((4, 4), dtype=complex)
        diag[k, k] = 1.0
        diag[k + 1, k + 1] = -1.0
        basis.append(diag)
    return basis


def _design_matrix() -> tuple[np.ndarray, list[np.ndarray]]:
    """Observable response of each deviation-basis element under every setting."""
    basis = _deviation_basis()
    rows = []
    for setting in SETTINGS:
        u = readout_unitary(setting)
        for r, s in DETECTED_ELEMENTS:
            row_re = np.empty(len(basis))
            row_im = np.empty(len(basis))
            for k, b in enumerate(basis):
                element = (u @ b @ u.conj().T)[r, s]
                row_re[k] = element.real
                row_im[k] = element.imag
            rows.append(row_re)
            rows.append(row_im)
    return np.vstack(rows), basis


_DESIGN_CACHE: tuple[np.ndarray, list[np.ndarray]] | None = None


def reconstruct(records: list[TomographyRecord]) -> np.ndarray:
    """Least-squares reconstruction of the state from all four setting records.

    Solves for the 15 real degrees of freedom of a unit-trace Hermitian
    matrix from the collected observables, then symmetrizes and
    trace-normalizes the result.
    """
    by_setting = {rec.setting: rec for rec in records}
    if set(by_setting) != set(SETTINGS):
        missing = sorted(set(SETTINGS) - set(by_setting))
        raise ValueError(f"need one record per setting; missing {missing}")

    global _DESIGN_CACHE
    if _DESIGN_CACHE is None:
        _DESIGN_CACHE = _design_matrix()
    design, basis = _DESIGN_CACHE

    observed = np.concatenate([np.asarray(by_setting[s].observables) for s in SETTINGS])
    coeffs, _, rank, _ = np.linalg.lstsq(design, observed, rcond=None)
    if rank < len(basis):
        raise ValueError(f"tomography design matrix is rank deficient (rank {rank} < {len(basis)})")

    rho = np.eye(4, dtype=complex) / 4.0
    for c, b in zip(coeffs, basis):
        rho = rho + c * b
    rho = 0.5 * (rho + rho.conj().T)
    return rho / rho.trace().real


def _psd_sqrt(rho: np.ndarray, clamp_tol: float = 1e-12) -> np.ndarray:
    """Hermitian square root with small negative eigenvalues clamped to zero."""
    eigvals, eigvecs = np.linalg.eigh(rho)
    if eigvals.min() < -1e-8:
        raise ValueError(f"matrix is significantly non-PSD (min eig {eigvals.min():.3e})")
    clamped = np.where(eigvals > clamp_tol, eigvals, 0.0)
    return (eigvecs * np.sqrt(clamped)) @ eigvecs.conj().T


def fidelity(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """Jozsa-Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, in [0, 1].

    Evaluated as the squared trace norm of sqrt(a) sqrt(b): the singular
    values are the eigenvalue square roots, so rank-deficient states do not
    suffer the sqrt amplification of eigenvalue-level noise.
    """
    for rho in (rho_a, rho_b):
        rho = np.asarray(rho)
        if float(np.abs(rho - rho.conj().T).max()) > 1e-10:
            raise ValueError("fidelity requires Hermitian inputs")
    sqrt_a = _psd_sqrt(np.asarray(rho_a, dtype=complex))
    sqrt_b = _psd_sqrt(np.asarray(rho_b, dtype=complex))
    singular_values = np.linalg.svd(sqrt_a @ sqrt_b, compute_uv=False)
    value = float(singular_values.sum() ** 2)
    return float(np.clip(value, 0.0, 1.0))
