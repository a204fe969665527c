"""2x2 Hermitian algebra and the Bloch-parameterized qubit state.

Parameter order is fixed throughout the package as xi = (r, theta, phi):
purity radius, polar angle, azimuth.  All 3-vectors and 3x3 matrices built
elsewhere follow this order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

IDENTITY2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

HERMITIAN_ATOL = 1e-12

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """A parameter lies outside an operation's documented domain."""


class ParamIndex(enum.IntEnum):
    """Selects the estimation parameter: xi^1 = r, xi^2 = theta, xi^3 = phi."""

    R = 1
    THETA = 2
    PHI = 3


def hermiticity_defect(m) -> float:
    """Max-abs entry of m - m^dagger."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m, atol: float = HERMITIAN_ATOL) -> bool:
    return hermiticity_defect(m) <= atol


def require_hermitian(m, atol: float = HERMITIAN_ATOL, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > atol:
        raise ValueError(f"{name} is not Hermitian: max |m - m^dagger| = {defect:.3e} > {atol:.1e}")
    return m


@dataclass(frozen=True)
class QubitState:
    """Bloch parameters (r, theta, phi) of a one-qubit density matrix.

    r in [0, 1], theta in [0, pi]; phi is reduced modulo 2*pi at
    construction so stored values lie in [0, 2*pi).
    """

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        r, theta, phi = float(self.r), float(self.theta), float(self.phi)
        if not (math.isfinite(r) and math.isfinite(theta) and math.isfinite(phi)):
            raise DomainError("state parameters must be finite")
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"r must lie in [0, 1], got {r}")
        if not 0.0 <= theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {theta}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi % TWO_PI)

    @property
    def bloch(self) -> np.ndarray:
        """Bloch vector r * (sin t cos p, sin t sin p, cos t)."""
        st, ct = math.sin(self.theta), math.cos(self.theta)
        return self.r * np.array([st * math.cos(self.phi), st * math.sin(self.phi), ct])


def density_matrix(state: QubitState) -> np.ndarray:
    """rho = (1/2)(I + r n.sigma) written out for the Bloch angles."""
    r, th, ph = state.r, state.theta, state.phi
    off = r * math.sin(th) * np.exp(-1j * ph)
    return 0.5 * np.array(
        [[1.0 + r * math.cos(th), off], [np.conj(off), 1.0 - r * math.cos(th)]],
        dtype=complex,
    )


def d_rho(state: QubitState, k: ParamIndex) -> np.ndarray:
    """Analytic partial derivative of the density matrix w.r.t. xi^k.

    All three derivatives are Hermitian and traceless.
    """
    r, th, ph = state.r, state.theta, state.phi
    k = ParamIndex(k)
    if k is ParamIndex.R:
        off = math.sin(th) * np.exp(-1j * ph)
        return 0.5 * np.array(
            [[math.cos(th), off], [np.conj(off), -math.cos(th)]], dtype=complex
        )
    if k is ParamIndex.THETA:
        off = math.cos(th) * np.exp(-1j * ph)
        return 0.5 * r * np.array(
            [[-math.sin(th), off], [np.conj(off), math.sin(th)]], dtype=complex
        )
    off = -1j * math.sin(th) * np.exp(-1j * ph)
    return 0.5 * r * np.array([[0.0, off], [np.conj(off), 0.0]], dtype=complex)


def eig2(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigensystem of a 2x2 Hermitian matrix.

    Returns (w, V) with eigenvalues ascending and orthonormal eigenvectors in
    the columns of V.  Each eigenvector's phase is fixed by making its first
    component of appreciable magnitude real and positive, so repeated calls
    are bit-reproducible.  Non-Hermitian input is rejected.
    """
    h = require_hermitian(h, name="eig2 input")
    w, v = np.linalg.eigh(h)
    for j in range(2):
        col = v[:, j]
        idx = 0 if abs(col[0]) > 1e-10 else 1
        pivot = col[idx]
        if abs(pivot) > 0:
            v[:, j] = col * (np.conj(pivot) / abs(pivot))
    return w, v


def pauli_decomposition(h) -> tuple[float, np.ndarray]:
    """Coefficients (a0, a) of h = a0*I + a.sigma for Hermitian h."""
    h = require_hermitian(h, name="pauli_decomposition input")
    a0 = 0.5 * np.trace(h).real
    a = np.array([0.5 * np.trace(h @ p).real for p in PAULIS])
    return float(a0), a
