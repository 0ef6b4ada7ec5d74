"""Shot-based measurement, readout confusion, and linear-algebra mitigation.

Bitstrings follow the simulator convention: the leftmost character is
qubit 0. Distributions hold either raw counts (`shots` set) or exact
probabilities (`shots` None); mitigated quasi-distributions sum to one but
may carry negative entries and are tagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ansatz as ans
from .channels import NoiseSpec
from .densmat import DensityMatrix, _apply_unitary_tensor, _as_matrix, _as_tensor
from .hamiltonians import Hamiltonian

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S_DAG = np.array([[1, 0], [0, -1j]], dtype=complex)
_BASIS_ROTATION = {"X": _HADAMARD, "Y": _HADAMARD @ _S_DAG, "Z": None}

_MAX_CONDITION = 1e8


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass(frozen=True)
class BasisGroup:
    """A measurement basis (qubit -> axis) and the term indices it covers."""

    basis: tuple  # sorted ((qubit, 'X'|'Y'|'Z'), ...)
    term_indices: tuple

    def axis_on(self, qubit: int) -> str:
        return dict(self.basis).get(qubit, "Z")


@dataclass(frozen=True)
class CountsDistribution:
    n_qubits: int
    entries: dict  # bitstring -> count or probability
    shots: int | None = None
    quasi: bool = False

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def probabilities(self) -> dict:
        norm = self.total()
        if norm == 0:
            raise ValueError("empty distribution")
        return {s: v / norm for s, v in self.entries.items()}

    def vector(self) -> np.ndarray:
        """Probability vector over all 2^n strings, in index order."""
        probs = self.probabilities()
        out = np.zeros(2**self.n_qubits)
        for s, v in probs.items():
            out[int(s, 2)] = v
        return out


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic P with P[k, j] = prob of reading string k given j."""

    P: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("confusion matrix must be square")
        if np.any(P < -1e-12) or np.any(P > 1 + 1e-12):
            raise ValueError("confusion entries must lie in [0, 1]")
        if np.max(np.abs(P.sum(axis=0) - 1.0)) > 1e-10:
            raise ValueError("confusion columns must sum to 1")
        object.__setattr__(self, "P", P)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.P.shape[0]))

    @classmethod
    def identity(cls, n_qubits: int) -> "ConfusionMatrix":
        return cls(np.eye(2**n_qubits))

    @classmethod
    def from_flip_rates(cls, p0_to_1, p1_to_0) -> "ConfusionMatrix":
        """Tensor product of per-qubit readout flip probabilities."""
        p01 = np.atleast_1d(np.asarray(p0_to_1, dtype=float))
        p10 = np.atleast_1d(np.asarray(p1_to_0, dtype=float))
        if p01.shape != p10.shape:
            raise ValueError("flip-rate arrays must have equal length")
        P = np.array([[1.0]])
        for a, b in zip(p01, p10):
            P = np.kron(P, np.array([[1 - a, b], [a, 1 - b]]))
        return cls(P)


def group_terms(H: Hamiltonian) -> list:
    """Greedy grouping of qubit-wise commuting terms into shared bases."""
    bases = []  # list of dicts qubit -> axis
    members = []
    for index, term in enumerate(H.terms):
        placed = False
        for basis, terms in zip(bases, members):
            if all(basis.get(q, p) == p for q, p in term.paulis):
                basis.update(dict(term.paulis))
                terms.append(index)
                placed = True
                break
        if not placed:
            bases.append(dict(term.paulis))
            members.append([index])
    return [
        BasisGroup(tuple(sorted(basis.items())), tuple(terms))
        for basis, terms in zip(bases, members)
    ]


def _rotated_probabilities(state: DensityMatrix, group: BasisGroup) -> np.ndarray:
    n = state.n_qubits
    tensor = _as_tensor(state.data, n)
    for qubit, axis in group.basis:
        rotation = _BASIS_ROTATION[axis]
        if rotation is not None:
            tensor = _apply_unitary_tensor(tensor, rotation, (qubit,), n)
    probs = np.real(np.diag(_as_matrix(tensor, n)))
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def sample_counts(
    state: DensityMatrix, group: BasisGroup, shots: int | None, seed=0
) -> CountsDistribution:
    """Measure all qubits in the group basis.

    With `shots` set, draws a multinomial sample; with shots None returns
    the exact outcome probabilities.
    """
    n = state.n_qubits
    probs = _rotated_probabilities(state, group)
    if shots is None:
        entries = {_bitstring(i, n): float(p) for i, p in enumerate(probs) if p > 0}
        return CountsDistribution(n, entries, shots=None)
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    draws = _rng(seed).multinomial(shots, probs)
    entries = {_bitstring(i, n): float(c) for i, c in enumerate(draws) if c > 0}
    return CountsDistribution(n, entries, shots=shots)


def apply_confusion(
    dist: CountsDistribution, confusion: ConfusionMatrix, seed=0
) -> CountsDistribution:
    """Forward readout noise: resample counts through P, or map p -> P p."""
    n = dist.n_qubits
    if confusion.P.shape[0] != 2**n:
        raise ValueError("confusion matrix does not match distribution size")
    if dist.shots is None:
        noisy = confusion.P @ dist.vector()
        entries = {_bitstring(i, n): float(p) for i, p in enumerate(noisy) if p > 0}
        return CountsDistribution(n, entries, shots=None)
    rng = _rng(seed)
    counts = np.zeros(2**n)
    for s, c in dist.entries.items():
        counts += rng.multinomial(int(round(c)), confusion.P[:, int(s, 2)])
    entries = {_bitstring(i, n): float(c) for i, c in enumerate(counts) if c > 0}
    return CountsDistribution(n, entries, shots=dist.shots)


def mitigate(dist: CountsDistribution, confusion: ConfusionMatrix) -> CountsDistribution:
    """Readout mitigation p -> P^{-1} p; output is a quasi-distribution."""
    n = dist.n_qubits
    if confusion.P.shape[0] != 2**n:
        raise ValueError("confusion matrix does not match distribution size")
    if np.linalg.cond(confusion.P) > _MAX_CONDITION:
        raise ValueError("confusion matrix is singular or near-singular")
    quasi = np.linalg.solve(confusion.P, dist.vector())
    entries = {_bitstring(i, n): float(v) for i, v in enumerate(quasi) if v != 0.0}
    return CountsDistribution(n, entries, shots=None, quasi=True)


def _term_value(term, bitstring: str) -> float:
    parity = sum(int(bitstring[q]) for q in term.qubits)
    return term.coefficient * (-1.0) ** parity


def energy_from_counts(H: Hamiltonian, groups, distributions) -> float:
    """Assemble <H> from one distribution per basis group."""
    if len(groups) != len(distributions):
        raise ValueError("need exactly one distribution per group")
    covered = set()
    total = 0.0
    for group, dist in zip(groups, distributions):
        probs = dist.probabilities()
        for index in group.term_indices:
            term = H.terms[index]
            covered.add(index)
            total += sum(p * _term_value(term, s) for s, p in probs.items())
    if covered != set(range(len(H.terms))):
        raise ValueError("distributions do not cover every Hamiltonian term")
    return float(total)


def estimate_energy(
    layout,
    params,
    H: Hamiltonian,
    noise: NoiseSpec | None,
    shots: int | None,
    confusion: ConfusionMatrix | None,
    rng,
    groups=None,
) -> float:
    """The full sampled pipeline: execute, measure per group, noise the
    readout, mitigate, and assemble the energy."""
    groups = group_terms(H) if groups is None else groups
    state = ans.execute(layout, params, noise)
    dists = []
    for group in groups:
        dist = sample_counts(state, group, shots, rng)
        if confusion is not None:
            dist = apply_confusion(dist, confusion, rng)
            dist = mitigate(dist, confusion)
        dists.append(dist)
    return energy_from_counts(H, groups, dists)


def sampled_vqe_step(
    layout,
    params,
    H: Hamiltonian,
    noise: NoiseSpec | None,
    shots: int | None,
    confusion: ConfusionMatrix | None,
    learning_rate: float,
    rng,
) -> tuple:
    """One experiment epoch: sampled parameter-shift gradient, then a
    gradient-descent update. Returns (new_params, energy_estimate)."""
    rng = _rng(rng)
    params = np.asarray(params, dtype=float)
    groups = group_terms(H)
    grads = np.zeros(params.size)
    for j in range(params.size):
        shifted = params.copy()
        shifted[j] = params[j] + np.pi / 2
        e_plus = estimate_energy(layout, shifted, H, noise, shots, confusion, rng, groups)
        shifted[j] = params[j] - np.pi / 2
        e_minus = estimate_energy(layout, shifted, H, noise, shots, confusion, rng, groups)
        grads[j] = 0.5 * (e_plus - e_minus)
    value = estimate_energy(layout, params, H, noise, shots, confusion, rng, groups)
    return params - learning_rate * grads, value


def run_sampled_vqe(
    layout,
    H: Hamiltonian,
    noise: NoiseSpec | None = None,
    shots: int | None = 8192,
    confusion: ConfusionMatrix | None = None,
    learning_rate: float = 0.1,
    iterations: int = 100,
    seed: int = 0,
    initial_params=None,
) -> tuple:
    """Run the sampled-VQE loop; returns (final_params, energy_trajectory)."""
    rng = np.random.default_rng(seed)
    if initial_params is None:
        params = rng.uniform(0, 2 * np.pi, layout.n_params)
    else:
        params = np.asarray(initial_params, dtype=float).copy()
    trajectory = []
    for _ in range(iterations):
        params, value = sampled_vqe_step(
            layout, params, H, noise, shots, confusion, learning_rate, rng
        )
        trajectory.append(value)
    return params, trajectory
