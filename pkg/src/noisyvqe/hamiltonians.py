"""Spin-chain Hamiltonians as sparse Pauli-string sums.

The spin operators in the Heisenberg couplings are full Pauli matrices
(S == sigma, not sigma/2); this is forced by the exact 2-qubit energies the
models must reproduce (-3.0 for the Heisenberg singlet). Rings of N > 2
sites use periodic boundaries; N = 2 has a single bond.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

MAX_DENSE_QUBITS = 12


@dataclass(frozen=True)
class PauliTerm:
    """coefficient * product of Pauli operators on the listed qubits.

    `paulis` maps qubit index to one of 'X', 'Y', 'Z'; an empty map is the
    identity string.
    """

    coefficient: float
    paulis: tuple  # sorted ((qubit, 'X'|'Y'|'Z'), ...)

    def __post_init__(self):
        coeff = float(self.coefficient)
        if not np.isfinite(coeff) or coeff == 0.0:
            raise ValueError(f"coefficient must be finite and nonzero, got {coeff}")
        items = tuple(sorted((int(q), str(p)) for q, p in dict(self.paulis).items()))
        for q, p in items:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if p not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli {p!r}")
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(self, "paulis", items)

    @property
    def qubits(self) -> tuple:
        return tuple(q for q, _ in self.paulis)

    def pauli_on(self, qubit: int) -> str:
        return dict(self.paulis).get(qubit, "I")

    def to_matrix(self, n_qubits: int) -> np.ndarray:
        out = np.array([[self.coefficient]], dtype=complex)
        lookup = dict(self.paulis)
        for q in range(n_qubits):
            out = np.kron(out, _PAULI[lookup.get(q, "I")])
        return out


@dataclass(frozen=True)
class Hamiltonian:
    """Weighted sum of Pauli strings on n qubits."""

    n_qubits: int
    terms: tuple

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        terms = tuple(self.terms)
        for term in terms:
            if term.qubits and max(term.qubits) >= self.n_qubits:
                raise ValueError(
                    f"term {term} touches qubit outside {self.n_qubits} qubits"
                )
        object.__setattr__(self, "terms", terms)

    @cached_property
    def _dense(self) -> np.ndarray:
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise ValueError(f"refusing to materialize {self.n_qubits} qubits")
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for term in self.terms:
            out += term.to_matrix(self.n_qubits)
        return out

    def to_matrix(self) -> np.ndarray:
        return self._dense


def _bonds(n: int):
    """Nearest-neighbor bonds: a single bond for n=2, a periodic ring above."""
    if n == 2:
        return [(0, 1)]
    return [(j, (j + 1) % n) for j in range(n)]


def tfim(n: int, J: float, h: float) -> Hamiltonian:
    """Transverse field Ising: J sum x_j x_{j+1} + h sum z_j."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    terms = [PauliTerm(J, ((a, "X"), (b, "X"))) for a, b in _bonds(n)]
    terms += [PauliTerm(h, ((j, "Z"),)) for j in range(n) if h != 0.0]
    return Hamiltonian(n, tuple(terms))


def heisenberg(n: int) -> Hamiltonian:
    """Heisenberg ring: sum over bonds of xx + yy + zz."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    terms = [
        PauliTerm(1.0, ((a, axis), (b, axis)))
        for a, b in _bonds(n)
        for axis in ("X", "Y", "Z")
    ]
    return Hamiltonian(n, tuple(terms))


def t_heisenberg(n: int, J: float, h: float) -> Hamiltonian:
    """Heisenberg ring with coupling J plus transverse field h sum z_j."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    terms = [
        PauliTerm(J, ((a, axis), (b, axis)))
        for a, b in _bonds(n)
        for axis in ("X", "Y", "Z")
    ]
    terms += [PauliTerm(h, ((j, "Z"),)) for j in range(n) if h != 0.0]
    return Hamiltonian(n, tuple(terms))


def exact_ground_energy(H: Hamiltonian) -> float:
    """Smallest eigenvalue by full dense diagonalization."""
    if H.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"diagonalization limited to {MAX_DENSE_QUBITS} qubits")
    return float(np.linalg.eigvalsh(H.to_matrix())[0])


def trace(H: Hamiltonian) -> float:
    """Tr(H): nonzero only through identity-string terms."""
    return float(
        sum(t.coefficient for t in H.terms if not t.paulis) * 2**H.n_qubits
    )


def _scaled_heisenberg(n: int, J: float = 1.0) -> Hamiltonian:
    if J == 1.0:
        return heisenberg(n)
    return t_heisenberg(n, J, 0.0)


def build_model(name: str, n: int, J: float = 1.0, h: float = 1.0) -> Hamiltonian:
    """Model lookup for the CLI: 'tfim', 'heisenberg' or 'theisenberg'."""
    key = name.lower()
    if key == "tfim":
        return tfim(n, J, h)
    if key == "heisenberg":
        return _scaled_heisenberg(n, J)
    if key == "theisenberg":
        return t_heisenberg(n, J, h)
    raise ValueError(f"unknown model {name!r}; expected tfim/heisenberg/theisenberg")
