"""Variational loop: energy, parameter-shift gradients, optimizers, sweeps.

The gradient is the exact parameter-shift value
(E(theta + pi/2 e_j) - E(theta - pi/2 e_j)) / 2. The default implementation
caches forward states and back-propagated observables so a full gradient
costs about three circuit executions instead of 2 * n_params; the "naive"
method evaluates the shifted energies literally and is kept as a
cross-check oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ansatz as ans
from .ansatz import CircuitLayout, CnotSlot, rotation_matrix
from .channels import (
    NoiseSpec,
    amplitude_damping,
    dephasing,
    depolarizing,
    uniform_gate_noise,
)
from .densmat import DensityMatrix, expectation
from .hamiltonians import Hamiltonian, exact_ground_energy
from .hamiltonians import trace as h_trace

NOISE_FAMILIES = {
    "damping": amplitude_damping,
    "dephasing": dephasing,
    "depolarizing": depolarizing,
}


def apply_global_depolarizing(state: DensityMatrix, epsilon: float) -> DensityMatrix:
    """rho -> (1 - eps) rho + eps I / 2^n, applied once to a full register."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    mixed = np.eye(state.dim, dtype=complex) / state.dim
    return DensityMatrix(state.n_qubits, (1 - epsilon) * state.data + epsilon * mixed)


def energy(
    layout: CircuitLayout,
    params,
    H: Hamiltonian,
    noise: NoiseSpec | None = None,
    final_global_depolarizing: float | None = None,
) -> float:
    """Tr(H rho(theta)) for the executed circuit."""
    state = ans.execute(layout, params, noise)
    if final_global_depolarizing is not None:
        state = apply_global_depolarizing(state, final_global_depolarizing)
    return expectation(state, H)


def _effective_observable(H: Hamiltonian, final_global_depolarizing) -> np.ndarray:
    Hmat = H.to_matrix()
    if final_global_depolarizing is None:
        return Hmat
    eps = final_global_depolarizing
    dim = Hmat.shape[0]
    return (1 - eps) * Hmat + eps * (h_trace(H) / dim) * np.eye(dim)


# -- interleaved density engine for gradients ------------------------------
#
# For gradient work the density matrix is kept as a flat vector in an
# interleaved bit order (r0, c0, r1, c1, ...). Row and column bits of each
# qubit are then adjacent, so a slot superoperator (gate plus its noise)
# acts on one contiguous axis of width 4 (16 for a CNOT pair): a free
# reshape, one small matmul, one re-layout copy. Observables are tracked
# in the transposed representation K[u, v] = O[v, u], which turns every
# Heisenberg pullback into the transposed forward superoperator and every
# trace Tr(O rho) into a flat dot product.


def _interleave_flat(mat, n):
    tensor = np.asarray(mat, dtype=complex).reshape((2,) * (2 * n))
    perm = [axis for q in range(n) for axis in (q, n + q)]
    return np.ascontiguousarray(np.transpose(tensor, perm)).reshape(-1)


_INT_PERM_2Q = (0, 2, 1, 3, 4, 6, 5, 7)


def _interleave_16(S):
    """Reindex a 16x16 superoperator from (ra rb ca cb) to interleaved."""
    return np.ascontiguousarray(
        S.reshape((2,) * 8).transpose(_INT_PERM_2Q).reshape(16, 16)
    )


def _density_slot_ops(noise):
    """Cached (cnot_forward, cnot_pullback, rot_noise, rot_noise_pullback)
    superoperators in the interleaved layout."""
    cnot16 = np.kron(ans.CNOT, ans.CNOT.conj())
    if noise is None:
        S = _interleave_16(cnot16)
        return S, np.ascontiguousarray(S.T), None, None
    cached = noise.__dict__.get("_interleaved_ops")
    if cached is None:
        joint = noise._two_qubit_superop
        fwd = _interleave_16(cnot16 if joint is None else joint @ cnot16)
        single = noise._single_superop
        cached = (
            fwd,
            np.ascontiguousarray(fwd.T),
            single,
            None if single is None else np.ascontiguousarray(single.T),
        )
        noise.__dict__["_interleaved_ops"] = cached
    return cached


def _apply_interleaved(flat, S, qubit, n, two_qubit=False):
    """Apply a 4x4 (or 16x16) superoperator to one interleaved axis."""
    width = S.shape[0]
    left = 1 << (2 * qubit)
    m3 = flat.reshape(left, width, flat.size // (left * width))
    out = np.tensordot(S, m3, axes=(1, 1))
    return np.ascontiguousarray(np.moveaxis(out, 0, 1)).reshape(-1)


_PAULI_GENERATOR = {
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _apply_op_vec(psi, op, targets, n):
    k = len(targets)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, psi, axes=(tuple(range(k, 2 * k)), targets))
    return np.moveaxis(out, tuple(range(k)), targets)


def _gradient_statevector(layout, params, H, final_global_depolarizing):
    """Exact gradient of the noiseless energy via adjoint back-propagation.

    Pure states make the density-matrix machinery redundant; the forward
    pass keeps |psi>, the backward pass keeps lambda = (later gates)^dag
    H |psi_final>, and each rotation contributes
    dE/dtheta = 2 Re <lambda| (-i/2) P |psi_post>.
    The result equals the parameter-shift value to machine precision.
    """
    n = layout.n_qubits
    params = np.asarray(params, dtype=float)
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for slot in layout.slots:
        if isinstance(slot, CnotSlot):
            psi = _apply_op_vec(psi, ans.CNOT, (slot.control, slot.target), n)
        else:
            rot = rotation_matrix(slot.axis, params[slot.param_index])
            psi = _apply_op_vec(psi, rot, (slot.qubit,), n)

    Hmat = np.asarray(H.to_matrix())
    flat = psi.reshape(-1)
    lam = (Hmat @ flat).reshape(psi.shape)
    value = float(np.real(np.vdot(flat, Hmat @ flat)))

    grads = np.zeros(layout.n_params)
    for slot in reversed(layout.slots):
        if isinstance(slot, CnotSlot):
            psi = _apply_op_vec(psi, ans.CNOT.conj().T, (slot.control, slot.target), n)
            lam = _apply_op_vec(lam, ans.CNOT.conj().T, (slot.control, slot.target), n)
            continue
        generator = _PAULI_GENERATOR[slot.axis]
        tangent = -0.5j * _apply_op_vec(psi, generator, (slot.qubit,), n)
        grads[slot.param_index] = 2.0 * float(np.real(np.vdot(lam, tangent)))
        back = rotation_matrix(slot.axis, params[slot.param_index]).conj().T
        psi = _apply_op_vec(psi, back, (slot.qubit,), n)
        lam = _apply_op_vec(lam, back, (slot.qubit,), n)

    if final_global_depolarizing is not None:
        eps = final_global_depolarizing
        value = (1 - eps) * value + eps * h_trace(H) / 2**n
        grads = (1 - eps) * grads
    return grads, value


def _gradient_adjoint(layout, params, H, noise, final_global_depolarizing):
    if noise is None:
        return _gradient_statevector(layout, params, H, final_global_depolarizing)
    return _gradient_adjoint_density(
        layout, params, H, noise, final_global_depolarizing
    )


def _gradient_adjoint_density(layout, params, H, noise, final_global_depolarizing):
    """Parameter-shift gradient via cached prefix states and adjoint observables.

    For rotation slot s: E(theta_j +/- pi/2)
        = Tr( K_s R(theta_j +/- pi/2) rho_pre R^dag ),
    where rho_pre is the state before the slot and K_s is H pulled back
    through every later slot plus the slot's own noise.
    """
    n = layout.n_qubits
    params = np.asarray(params, dtype=float)
    cnot_fwd, cnot_pull, rot_noise, rot_noise_pull = _density_slot_ops(noise)

    pre_states = {}
    rho = np.zeros(4**n, dtype=complex)
    rho[0] = 1.0
    for idx, slot in enumerate(layout.slots):
        if isinstance(slot, CnotSlot):
            if slot.target != slot.control + 1:
                raise ValueError("adjoint gradient requires ascending adjacent CNOTs")
            rho = _apply_interleaved(rho, cnot_fwd, slot.control, n)
        else:
            pre_states[idx] = rho
            rot = rotation_matrix(slot.axis, params[slot.param_index])
            S = np.kron(rot, rot.conj())
            if rot_noise is not None:
                S = rot_noise @ S
            rho = _apply_interleaved(rho, S, slot.qubit, n)

    obs_mat = np.asarray(_effective_observable(H, final_global_depolarizing), complex)
    K = _interleave_flat(obs_mat.T, n)
    value = float(np.real(np.dot(K, rho)))

    grads = np.zeros(layout.n_params)
    for idx in reversed(range(len(layout.slots))):
        slot = layout.slots[idx]
        if isinstance(slot, CnotSlot):
            K = _apply_interleaved(K, cnot_pull, slot.control, n)
            continue
        if rot_noise_pull is not None:
            K = _apply_interleaved(K, rot_noise_pull, slot.qubit, n)
        theta = params[slot.param_index]
        rho_pre = pre_states[idx]
        shifted = []
        for sign in (1.0, -1.0):
            rot = rotation_matrix(slot.axis, theta + sign * np.pi / 2)
            moved = _apply_interleaved(
                rho_pre, np.kron(rot, rot.conj()), slot.qubit, n
            )
            shifted.append(float(np.real(np.dot(K, moved))))
        grads[slot.param_index] = 0.5 * (shifted[0] - shifted[1])
        back = rotation_matrix(slot.axis, theta)
        K = _apply_interleaved(
            K, np.kron(back, back.conj()).T, slot.qubit, n
        )
    return grads, value


def _gradient_naive(layout, params, H, noise, final_global_depolarizing):
    params = np.asarray(params, dtype=float)
    grads = np.zeros(layout.n_params)
    for j in range(layout.n_params):
        shifted = params.copy()
        shifted[j] = params[j] + np.pi / 2
        e_plus = energy(layout, shifted, H, noise, final_global_depolarizing)
        shifted[j] = params[j] - np.pi / 2
        e_minus = energy(layout, shifted, H, noise, final_global_depolarizing)
        grads[j] = 0.5 * (e_plus - e_minus)
    return grads


def gradient_parameter_shift(
    layout: CircuitLayout,
    params,
    H: Hamiltonian,
    noise: NoiseSpec | None = None,
    final_global_depolarizing: float | None = None,
    method: str = "adjoint",
) -> np.ndarray:
    """Exact parameter-shift gradient of the energy."""
    if method == "adjoint":
        grads, _ = _gradient_adjoint(layout, params, H, noise, final_global_depolarizing)
        return grads
    if method == "naive":
        return _gradient_naive(layout, params, H, noise, final_global_depolarizing)
    raise ValueError(f"unknown gradient method {method!r}")


@dataclass
class VqeConfig:
    hamiltonian: Hamiltonian
    depth: int
    noise: NoiseSpec | None = None
    optimizer: str = "adam"  # 'adam' or 'gd'
    learning_rate: float = 0.05
    max_iterations: int = 2000
    tolerance: float = 1e-6
    patience: int = 10
    restarts: int = 3
    seed: int = 0
    final_global_depolarizing: float | None = None
    model: str = ""  # label only

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.max_iterations < 1 or self.restarts < 1:
            raise ValueError("max_iterations and restarts must be >= 1")
        if self.optimizer not in ("adam", "gd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class VqeResult:
    best_energy: float
    best_params: np.ndarray
    restart_energies: list
    trajectories: list
    iterations: list
    converged: list

    @property
    def mean_energy(self) -> float:
        return float(np.mean(self.restart_energies))


_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


def _run_single(config: VqeConfig, layout: CircuitLayout, rng) -> tuple:
    theta = rng.uniform(0.0, 2 * np.pi, layout.n_params)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    trajectory = []
    still = 0
    converged = False
    iters = 0
    for t in range(1, config.max_iterations + 1):
        grads, value = _gradient_adjoint(
            layout, theta, config.hamiltonian, config.noise,
            config.final_global_depolarizing,
        )
        trajectory.append(value)
        iters = t
        if len(trajectory) >= 2:
            if abs(trajectory[-1] - trajectory[-2]) < config.tolerance:
                still += 1
                if still >= config.patience:
                    converged = True
                    break
            else:
                still = 0
        if config.optimizer == "gd":
            theta = theta - config.learning_rate * grads
        else:
            m = _ADAM_BETA1 * m + (1 - _ADAM_BETA1) * grads
            v = _ADAM_BETA2 * v + (1 - _ADAM_BETA2) * grads**2
            m_hat = m / (1 - _ADAM_BETA1**t)
            v_hat = v / (1 - _ADAM_BETA2**t)
            theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
    final = energy(
        layout, theta, config.hamiltonian, config.noise,
        config.final_global_depolarizing,
    )
    trajectory.append(final)
    return final, theta, trajectory, iters, converged


def optimize(config: VqeConfig) -> VqeResult:
    """Multi-restart gradient optimization of the circuit energy."""
    layout = ans.build_layout(config.hamiltonian.n_qubits, config.depth)
    energies, params_list, trajectories, iterations, converged = [], [], [], [], []
    for restart in range(config.restarts):
        rng = np.random.default_rng([config.seed, restart])
        final, theta, trajectory, iters, conv = _run_single(config, layout, rng)
        energies.append(final)
        params_list.append(theta)
        trajectories.append(trajectory)
        iterations.append(iters)
        converged.append(conv)
    best = int(np.argmin(energies))
    return VqeResult(
        best_energy=float(energies[best]),
        best_params=params_list[best],
        restart_energies=[float(e) for e in energies],
        trajectories=trajectories,
        iterations=iterations,
        converged=converged,
    )


def noise_sweep(
    config: VqeConfig, family: str, probabilities, depths
) -> list:
    """Optimize across a (depth, p) grid for one local-noise family.

    Returns one row per (depth, p, restart) with the final energy and the
    relative energy (E - E0)/|E0|; rows follow grid order.
    """
    if family not in NOISE_FAMILIES:
        raise ValueError(f"unknown noise family {family!r}")
    builder = NOISE_FAMILIES[family]
    H = config.hamiltonian
    e0 = exact_ground_energy(H)
    rows = []
    for depth in depths:
        for p_index, p in enumerate(probabilities):
            grid_config = VqeConfig(
                hamiltonian=H,
                depth=int(depth),
                noise=uniform_gate_noise(builder(p)),
                optimizer=config.optimizer,
                learning_rate=config.learning_rate,
                max_iterations=config.max_iterations,
                tolerance=config.tolerance,
                patience=config.patience,
                restarts=config.restarts,
                seed=config.seed,
                model=config.model,
            )
            layout = ans.build_layout(H.n_qubits, int(depth))
            for restart in range(config.restarts):
                rng = np.random.default_rng(
                    [config.seed, int(depth), p_index, restart]
                )
                final, _, _, iters, _ = _run_single(grid_config, layout, rng)
                rows.append(
                    {
                        "model": config.model,
                        "n": H.n_qubits,
                        "depth": int(depth),
                        "noise_family": family,
                        "p": float(p),
                        "restart": restart,
                        "E": float(final),
                        "E0": e0,
                        "rel_energy": (final - e0) / abs(e0),
                        "iterations": iters,
                        "seed": config.seed,
                    }
                )
    return rows


def mean_relative_energies(rows) -> dict:
    """Average relative energy per (depth, p), preserving grid order."""
    keys = []
    grouped = {}
    for row in rows:
        key = (row["depth"], row["p"])
        if key not in grouped:
            grouped[key] = []
            keys.append(key)
        grouped[key].append(row["rel_energy"])
    return {key: float(np.mean(grouped[key])) for key in keys}
