"""Thermal states, entropy and energy for working media with H_t = omega_t * P.

Units: k = hbar = 1, entropies in nats. Energy eigenbasis is ordered by
ascending eigenvalue of P, so for a qubit index 0 is the ground state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError, InvalidStateError

_TOL = 1e-12


@dataclass(frozen=True)
class PolarizationSpectrum:
    """Eigenvalues of the scaled observable P, traceless, sum of squares 2*chi."""

    eigenvalues: tuple[float, ...]

    def __post_init__(self):
        lam = tuple(float(v) for v in self.eigenvalues)
        if len(lam) < 2:
            raise InvalidParameterError("spectrum needs at least two levels")
        if any(b < a for a, b in zip(lam, lam[1:])):
            raise InvalidParameterError("eigenvalues must be ascending")
        if abs(math.fsum(lam)) > _TOL:
            raise InvalidParameterError("eigenvalues must sum to zero")
        if math.fsum(v * v for v in lam) <= 0.0:
            raise InvalidParameterError("spectrum is degenerate at zero")
        object.__setattr__(self, "eigenvalues", lam)

    @classmethod
    def qubit(cls) -> "PolarizationSpectrum":
        return cls((-0.5, 0.5))

    @classmethod
    def from_levels(cls, levels) -> "PolarizationSpectrum":
        """Shift arbitrary levels so that they sum to zero."""
        lev = np.sort(np.asarray(levels, dtype=float))
        return cls(tuple(lev - lev.mean()))

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def chi(self) -> float:
        return 0.5 * math.fsum(v * v for v in self.eigenvalues)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.eigenvalues)


@dataclass(frozen=True)
class ScaledHamiltonian:
    omega: float
    spectrum: PolarizationSpectrum

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise InvalidParameterError(f"omega must be finite and > 0, got {self.omega}")

    @classmethod
    def qubit(cls, omega: float) -> "ScaledHamiltonian":
        return cls(float(omega), PolarizationSpectrum.qubit())

    @property
    def dim(self) -> int:
        return self.spectrum.dim

    @property
    def energies(self) -> np.ndarray:
        return self.omega * self.spectrum.array

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.energies).astype(complex)


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix.

    ``atol`` is the negativity tolerance on eigenvalues; use 1e-9 for states
    coming out of numerical integration.
    """

    __slots__ = ("_data",)

    def __init__(self, data, atol: float = _TOL):
        rho = np.array(data, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
            raise InvalidStateError(f"density matrix must be square N x N, N >= 2; got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > max(atol, _TOL):
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > max(atol, _TOL):
            raise InvalidStateError(f"trace is {np.trace(rho).real}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -atol:
            raise InvalidStateError("density matrix has negative eigenvalues")
        rho.setflags(write=False)
        self._data = rho

    @classmethod
    def diagonal(cls, populations, atol: float = _TOL) -> "DensityMatrix":
        return cls(np.diag(np.asarray(populations, dtype=float)), atol=atol)

    @property
    def matrix(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self._data.diagonal().real.copy()

    def off_diagonal_norm(self) -> float:
        off = self._data - np.diag(self._data.diagonal())
        return float(np.max(np.abs(off)))

    def distance(self, other: "DensityMatrix") -> float:
        """Max-norm distance between two states."""
        return float(np.max(np.abs(self._data - other.matrix)))

    def __repr__(self):
        return f"DensityMatrix(populations={self.populations!r})"


def _check_beta(beta):
    if not math.isfinite(beta) or beta < 0:
        raise InvalidParameterError(f"beta must be finite and >= 0, got {beta}")


def thermal_populations(beta: float, H: ScaledHamiltonian) -> np.ndarray:
    _check_beta(beta)
    x = -beta * H.energies
    w = np.exp(x - x.max())
    return w / w.sum()


def thermal_state(beta: float, H: ScaledHamiltonian) -> DensityMatrix:
    """Gibbs state exp(-beta H)/Z, diagonal in the energy basis."""
    return DensityMatrix.diagonal(thermal_populations(beta, H))


def _spectrum_of(rho: DensityMatrix, tol: float = 1e-9) -> np.ndarray:
    m = rho.matrix
    if rho.off_diagonal_norm() == 0.0:
        p = m.diagonal().real
    else:
        p = np.linalg.eigvalsh(m)
    if p.min() < -tol:
        raise InvalidStateError(f"eigenvalue {p.min():.3e} below -{tol:g}")
    return np.clip(p, 0.0, None)


def shannon(p) -> float:
    """-sum p ln p with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in nats, from the eigenvalues of ``rho``."""
    return shannon(_spectrum_of(rho))


def _check_dims(rho: DensityMatrix, n: int):
    if rho.dim != n:
        raise InvalidParameterError(f"dimension mismatch: state {rho.dim}, operator {n}")


def energy(rho: DensityMatrix, H: ScaledHamiltonian) -> float:
    _check_dims(rho, H.dim)
    return float(np.real(np.trace(rho.matrix @ H.matrix)))


def polarization_of(rho: DensityMatrix, spectrum: PolarizationSpectrum) -> float:
    _check_dims(rho, spectrum.dim)
    return float(np.dot(spectrum.array, rho.populations))


class EffectiveBeta(NamedTuple):
    beta: float
    inverted: bool


def effective_beta(polarization: float, omega: float) -> EffectiveBeta:
    """Inverse temperature at which a qubit with this polarization is thermal.

    A non-negative polarization means population inversion; the returned
    beta is then <= 0 and ``inverted`` is set for strictly positive input.
    """
    if not (-0.5 < polarization < 0.5):
        raise InvalidParameterError(f"qubit polarization must lie in (-1/2, 1/2), got {polarization}")
    if not omega > 0:
        raise InvalidParameterError("omega must be > 0")
    beta = 2.0 / omega * math.atanh(-2.0 * polarization)
    return EffectiveBeta(beta, polarization > 0)


def qubit_polarization(x: float) -> float:
    """Thermal qubit polarization as a function of x = beta*omega."""
    return -0.5 * math.tanh(0.5 * x)


def qubit_entropy(x: float) -> float:
    """Closed-form thermal qubit entropy, x = beta*omega."""
    h = 0.5 * x
    # ln(2 cosh h) written to avoid overflow for large h
    ah = abs(h)
    return ah + math.log1p(math.exp(-2 * ah)) - h * math.tanh(h)


def entropy_highT(beta: float, omega: float, spectrum: PolarizationSpectrum) -> float:
    """Quadratic high-temperature entropy ln N - (beta omega)^2 chi / N.

    Accurate only for |beta * omega * lambda_max| << 1; not enforced.
    """
    n = spectrum.dim
    return math.log(n) - (beta * omega) ** 2 * spectrum.chi / n


def spin_flip(rho: DensityMatrix) -> DensityMatrix:
    """sigma_x rho sigma_x for a qubit."""
    _check_dims(rho, 2)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return DensityMatrix(sx @ rho.matrix @ sx)
