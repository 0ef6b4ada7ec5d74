"""Dense density-matrix states and operator application.

Convention: qubit 0 is the most significant bit of the computational-basis
index, so |q0 q1 ... q_{n-1}> maps to index q0*2^(n-1) + ... + q_{n-1}.
All operations return new states; DensityMatrix values are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 12

_TRACE_TOL = 1e-10
_HERM_TOL = 1e-10
_PSD_TOL = -1e-9  # eigenvalue floor; strict >=0 flaps after many channels


@dataclass(frozen=True)
class DensityMatrix:
    """A 2^n x 2^n complex density matrix on n qubits."""

    n_qubits: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        dim = 2**self.n_qubits
        data = np.asarray(self.data, dtype=complex)
        if data.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {data.shape}")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def purity(self) -> float:
        return float(np.real(np.sum(self.data * self.data.T)))

    def validate(self, trace_tol=_TRACE_TOL, herm_tol=_HERM_TOL, psd_tol=_PSD_TOL):
        """Check trace, Hermiticity and positivity; raise on violation."""
        tr = np.trace(self.data)
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr} deviates from 1 beyond {trace_tol}")
        if np.max(np.abs(self.data - self.data.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        evals = np.linalg.eigvalsh(self.data)
        if evals[0] < psd_tol:
            raise ValueError(f"negative eigenvalue {evals[0]} below {psd_tol}")
        return self


@dataclass(frozen=True)
class UnitaryGate:
    """A 1- or 2-qubit unitary with the qubits it acts on."""

    matrix: np.ndarray
    target_qubits: tuple

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        targets = tuple(int(q) for q in self.target_qubits)
        if len(targets) not in (1, 2) or len(set(targets)) != len(targets):
            raise ValueError(f"need 1 or 2 distinct target qubits, got {targets}")
        dim = 2 ** len(targets)
        if matrix.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match {len(targets)} qubits"
            )
        if np.max(np.abs(matrix @ matrix.conj().T - np.eye(dim))) > 1e-10:
            raise ValueError("matrix is not unitary within 1e-10")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "target_qubits", targets)


def ground_state(n_qubits: int) -> DensityMatrix:
    """The all-zeros pure state |0...0><0...0|."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    dim = 2**n_qubits
    data = np.zeros((dim, dim), dtype=complex)
    data[0, 0] = 1.0
    return DensityMatrix(n_qubits, data)


# -- low-level tensor engine ----------------------------------------------
#
# Internally a state is reshaped to a rank-2n tensor with axes
# (row_0 .. row_{n-1}, col_0 .. col_{n-1}); a k-qubit operator acts by
# contracting k row axes (left product) or k column axes (right product).
# This keeps every gate application O(4^n) instead of O(8^n).


def _as_tensor(mat: np.ndarray, n: int) -> np.ndarray:
    return mat.reshape((2,) * (2 * n))


def _as_matrix(tensor: np.ndarray, n: int) -> np.ndarray:
    dim = 2**n
    return tensor.reshape(dim, dim)


def _apply_left(tensor, op, targets, n):
    """op @ rho on the row indices of the given qubits."""
    k = len(targets)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(tuple(range(k, 2 * k)), tuple(targets)))
    return np.moveaxis(out, tuple(range(k)), tuple(targets))

def _apply_right_dag(tensor, op, targets, n):
    """rho @ op^dag on the column indices of the given qubits."""
    k = len(targets)
    cols = tuple(n + q for q in targets)
    op_c = op.conj().reshape((2,) * (2 * k))
    out = np.tensordot(tensor, op_c, axes=(cols, tuple(range(k, 2 * k))))
    return np.moveaxis(out, tuple(range(2 * n - k, 2 * n)), cols)


def _apply_unitary_tensor(tensor, matrix, targets, n):
    return _apply_right_dag(_apply_left(tensor, matrix, targets, n), matrix, targets, n)


def _apply_kraus_tensor(tensor, operators, targets, n):
    out = None
    for op in operators:
        term = _apply_right_dag(_apply_left(tensor, op, targets, n), op, targets, n)
        out = term if out is None else out + term
    return out


def _apply_superop_tensor(tensor, superop_tensor, targets, n):
    """Apply a channel superoperator to the paired row/column axes of the
    target qubits in one contraction.

    The superoperator tensor has shape (2,)*(4k) with axis order
    (rows_out, cols_out, rows_in, cols_in); vectorization is row-major, so
    it equals sum_k kron(E_k, E_k.conj()) reshaped.
    """
    k = len(targets)
    axes = tuple(targets) + tuple(n + q for q in targets)
    out = np.tensordot(
        superop_tensor, tensor, axes=(tuple(range(2 * k, 4 * k)), axes)
    )
    return np.moveaxis(out, tuple(range(2 * k)), axes)


def _apply_kraus_adjoint_tensor(tensor, operators, targets, n):
    """Heisenberg-picture channel on an observable: O -> sum_k E_k^dag O E_k."""
    out = None
    for op in operators:
        term = _apply_right_dag(
            _apply_left(tensor, op.conj().T, targets, n), op.conj().T, targets, n
        )
        out = term if out is None else out + term
    return out


def _check_targets(targets, arity, n_qubits):
    targets = tuple(int(q) for q in targets)
    if len(targets) != arity:
        raise ValueError(f"arity {arity} does not match targets {targets}")
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets must be distinct, got {targets}")
    for q in targets:
        if not 0 <= q < n_qubits:
            raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
    return targets


# -- public operations ----------------------------------------------------


def apply_unitary(state: DensityMatrix, gate: UnitaryGate) -> DensityMatrix:
    """rho -> U rho U^dag with U embedded on the gate's target qubits."""
    n = state.n_qubits
    targets = _check_targets(gate.target_qubits, len(gate.target_qubits), n)
    tensor = _apply_unitary_tensor(_as_tensor(state.data, n), gate.matrix, targets, n)
    return DensityMatrix(n, _as_matrix(tensor, n))


def apply_channel(state: DensityMatrix, channel, targets) -> DensityMatrix:
    """rho -> sum_k E_k rho E_k^dag with the Kraus set embedded on targets."""
    n = state.n_qubits
    targets = _check_targets(targets, channel.arity, n)
    tensor = _apply_kraus_tensor(
        _as_tensor(state.data, n), channel.operators, targets, n
    )
    return DensityMatrix(n, _as_matrix(tensor, n))


def expectation(state: DensityMatrix, observable) -> float:
    """Tr(H rho) for a Hamiltonian observable; the imaginary residue must vanish."""
    if observable.n_qubits != state.n_qubits:
        raise ValueError(
            f"observable on {observable.n_qubits} qubits does not match state "
            f"on {state.n_qubits}"
        )
    value = np.sum(observable.to_matrix() * state.data.T)
    if abs(value.imag) > 1e-9:
        raise ValueError(f"expectation has imaginary residue {value.imag}")
    return float(value.real)
