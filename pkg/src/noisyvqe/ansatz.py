"""Hardware-efficient brick-layer ansatz.

One logical layer is two physical brick layers: blocks on the even bonds
(2i, 2i+1), then blocks on the odd bonds (2j+1, 2j+2). A block is Ry and
Rz rotations on each of its two qubits followed by a CNOT, so every block
carries 4 parameters and a logical layer on n qubits carries (n-1)*4.
Rotations must precede the CNOT: with the opposite order a single block on
|00> could only reach product states, which contradicts the exact energies
a depth-1 two-qubit circuit is required to reach.

Rotation convention: R(theta) = exp(-i theta P / 2) for P in {Y, Z}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import NoiseSpec
from .densmat import (
    DensityMatrix,
    _apply_superop_tensor,
    _as_matrix,
    _as_tensor,
    ground_state,
)

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    half = 0.5 * theta
    if axis == "Y":
        c, s = np.cos(half), np.sin(half)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.array(
            [[np.exp(-1j * half), 0], [0, np.exp(1j * half)]], dtype=complex
        )
    raise ValueError(f"unsupported rotation axis {axis!r}")


@dataclass(frozen=True)
class CnotSlot:
    control: int
    target: int


@dataclass(frozen=True)
class RotationSlot:
    axis: str  # 'Y' or 'Z'
    qubit: int
    param_index: int


@dataclass(frozen=True)
class CircuitLayout:
    """The ordered gate slots of the ansatz for (n_qubits, depth)."""

    n_qubits: int
    depth: int
    slots: tuple

    @property
    def n_params(self) -> int:
        return parameter_count(self.n_qubits, self.depth)

    def describe(self) -> str:
        """Text diagram, one line per slot, for logging."""
        lines = []
        for slot in self.slots:
            if isinstance(slot, CnotSlot):
                lines.append(f"CNOT({slot.control},{slot.target})")
            else:
                lines.append(f"R{slot.axis.lower()}(q{slot.qubit}, th{slot.param_index})")
        return "\n".join(lines)


def _check_shape(n_qubits: int, depth: int):
    if n_qubits < 2 or n_qubits % 2 != 0:
        raise ValueError(f"n_qubits must be even and >= 2, got {n_qubits}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")


def parameter_count(n_qubits: int, depth: int) -> int:
    _check_shape(n_qubits, depth)
    return (n_qubits - 1) * 4 * depth


def build_layout(n_qubits: int, depth: int) -> CircuitLayout:
    _check_shape(n_qubits, depth)
    slots = []
    index = 0

    def block(a, b):
        nonlocal index
        for qubit in (a, b):
            slots.append(RotationSlot("Y", qubit, index))
            slots.append(RotationSlot("Z", qubit, index + 1))
            index += 2
        slots.append(CnotSlot(a, b))

    for _ in range(depth):
        for i in range(n_qubits // 2):
            block(2 * i, 2 * i + 1)
        for j in range(n_qubits // 2 - 1):
            block(2 * j + 1, 2 * j + 2)
    layout = CircuitLayout(n_qubits, depth, tuple(slots))
    assert index == layout.n_params
    return layout


# Each slot (gate plus its noise) is applied as a single superoperator
# contraction on the paired row/column axes; the merged CNOT superoperator
# is cached per noise spec, rotation superoperators are 4x4 products
# rebuilt per angle.

_CNOT_SUPEROP = np.kron(CNOT, CNOT.conj()).reshape((2,) * 8)


def _cnot_superop(noise: NoiseSpec | None, adjoint: bool = False):
    if noise is None:
        return _CNOT_SUPEROP  # real and self-adjoint as a map
    key = "_cnot_adjoint_superop" if adjoint else "_cnot_superop"
    cached = noise.__dict__.get(key)
    if cached is None:
        S = np.kron(CNOT, CNOT.conj())
        joint = noise._two_qubit_superop
        if joint is not None:
            S = joint @ S
        if adjoint:
            S = S.conj().T
        cached = S.reshape((2,) * 8)
        noise.__dict__[key] = cached
    return cached


def _rotation_superop(axis, theta, noise: NoiseSpec | None):
    R = rotation_matrix(axis, theta)
    S = np.kron(R, R.conj())
    if noise is not None and noise._single_superop is not None:
        S = noise._single_superop @ S
    return S.reshape((2,) * 4)


def _apply_slot(tensor, slot, theta, noise, n):
    if isinstance(slot, CnotSlot):
        return _apply_superop_tensor(
            tensor, _cnot_superop(noise), (slot.control, slot.target), n
        )
    return _apply_superop_tensor(
        tensor, _rotation_superop(slot.axis, theta, noise), (slot.qubit,), n
    )


def execute(
    layout: CircuitLayout, params, noise: NoiseSpec | None = None
) -> DensityMatrix:
    """Run the circuit on |0...0>, with optional gate noise after every gate."""
    params = np.asarray(params, dtype=float)
    if params.shape != (layout.n_params,):
        raise ValueError(
            f"expected {layout.n_params} parameters, got shape {params.shape}"
        )
    n = layout.n_qubits
    tensor = _as_tensor(ground_state(n).data, n)
    for slot in layout.slots:
        theta = params[slot.param_index] if isinstance(slot, RotationSlot) else None
        tensor = _apply_slot(tensor, slot, theta, noise, n)
    return DensityMatrix(n, _as_matrix(tensor, n))
