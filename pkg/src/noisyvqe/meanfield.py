"""Product-state (mean-field) baseline for the spin models.

Each site carries Bloch angles (theta, phi) with single-site expectations
<x> = sin(theta) cos(phi), <y> = sin(theta) sin(phi), <z> = cos(theta);
a 2-local Hamiltonian energy decouples into products of these factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import Hamiltonian


@dataclass(frozen=True)
class BlochAngles:
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if theta.shape != phi.shape or theta.ndim != 1:
            raise ValueError("theta and phi must be 1-d arrays of equal length")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @property
    def n_sites(self) -> int:
        return self.theta.size

    def site_state(self, i: int) -> np.ndarray:
        """|psi_i> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
        return np.array(
            [
                np.cos(self.theta[i] / 2),
                np.exp(1j * self.phi[i]) * np.sin(self.theta[i] / 2),
            ],
            dtype=complex,
        )

    def product_density_matrix(self) -> np.ndarray:
        rho = np.array([[1.0 + 0j]])
        for i in range(self.n_sites):
            psi = self.site_state(i)
            rho = np.kron(rho, np.outer(psi, psi.conj()))
        return rho


def _site_expectations(angles: BlochAngles) -> dict:
    st, ct = np.sin(angles.theta), np.cos(angles.theta)
    cp, sp = np.cos(angles.phi), np.sin(angles.phi)
    return {"X": st * cp, "Y": st * sp, "Z": ct}


def _site_derivatives(angles: BlochAngles) -> tuple:
    """d<sigma>/d(theta) and d<sigma>/d(phi) per axis and site."""
    st, ct = np.sin(angles.theta), np.cos(angles.theta)
    cp, sp = np.cos(angles.phi), np.sin(angles.phi)
    d_theta = {"X": ct * cp, "Y": ct * sp, "Z": -st}
    d_phi = {"X": -st * sp, "Y": st * cp, "Z": np.zeros_like(st)}
    return d_theta, d_phi


def _check_two_local(H: Hamiltonian, angles: BlochAngles):
    if angles.n_sites != H.n_qubits:
        raise ValueError(
            f"{angles.n_sites} sites do not match {H.n_qubits}-qubit Hamiltonian"
        )
    for term in H.terms:
        if len(term.qubits) > 2:
            raise ValueError(f"term {term} is more than 2-local")


def mf_energy(H: Hamiltonian, angles: BlochAngles) -> float:
    """<Psi|H|Psi> for the product state defined by the angles."""
    _check_two_local(H, angles)
    values = _site_expectations(angles)
    total = 0.0
    for term in H.terms:
        factor = term.coefficient
        for qubit, pauli in term.paulis:
            factor *= values[pauli][qubit]
        total += factor
    return float(total)


def mf_gradient(H: Hamiltonian, angles: BlochAngles) -> np.ndarray:
    """Gradient (d/d theta_0.., d/d phi_0..) of mf_energy, length 2n."""
    _check_two_local(H, angles)
    n = angles.n_sites
    values = _site_expectations(angles)
    d_theta, d_phi = _site_derivatives(angles)
    grad = np.zeros(2 * n)
    for term in H.terms:
        for qubit, pauli in term.paulis:
            rest = term.coefficient
            for other, other_pauli in term.paulis:
                if other != qubit:
                    rest *= values[other_pauli][other]
            grad[qubit] += rest * d_theta[pauli][qubit]
            grad[n + qubit] += rest * d_phi[pauli][qubit]
    return grad


def _wrap_angles(theta, phi) -> BlochAngles:
    """Canonicalize unconstrained angles to theta in [0, pi], phi in [0, 2pi)."""
    theta = np.mod(theta, 2 * np.pi)
    phi = np.asarray(phi, dtype=float).copy()
    over = theta > np.pi
    theta[over] = 2 * np.pi - theta[over]
    phi[over] += np.pi
    return BlochAngles(theta, np.mod(phi, 2 * np.pi))


_ADAM_BETA1, _ADAM_BETA2, _ADAM_EPS = 0.9, 0.999, 1e-8


def mf_optimize(
    H: Hamiltonian,
    restarts: int = 20,
    seed: int = 0,
    learning_rate: float = 0.05,
    max_iterations: int = 2000,
    tolerance: float = 1e-10,
    patience: int = 20,
) -> tuple:
    """Best product-state energy over Adam restarts; returns (E_mf, angles)."""
    n = H.n_qubits
    best_energy = np.inf
    best_angles = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        x = np.concatenate(
            [rng.uniform(0, np.pi, n), rng.uniform(0, 2 * np.pi, n)]
        )
        m = np.zeros_like(x)
        v = np.zeros_like(x)
        previous = np.inf
        still = 0
        for t in range(1, max_iterations + 1):
            angles = BlochAngles(x[:n], x[n:])
            value = mf_energy(H, angles)
            if abs(value - previous) < tolerance:
                still += 1
                if still >= patience:
                    break
            else:
                still = 0
            previous = value
            grads = mf_gradient(H, angles)
            m = _ADAM_BETA1 * m + (1 - _ADAM_BETA1) * grads
            v = _ADAM_BETA2 * v + (1 - _ADAM_BETA2) * grads**2
            x = x - learning_rate * (m / (1 - _ADAM_BETA1**t)) / (
                np.sqrt(v / (1 - _ADAM_BETA2**t)) + _ADAM_EPS
            )
        angles = _wrap_angles(x[:n], x[n:])
        value = mf_energy(H, angles)
        if value < best_energy:
            best_energy = value
            best_angles = angles
    return float(best_energy), best_angles
