"""Kraus noise channels: damping, dephasing, depolarizing, thermal relaxation,
and the composite model emulating IBM device noise.

Channel probabilities are plain probabilities in [0, 1]; device times use the
units of the calibration data (T1, T2 in microseconds, gate durations in
nanoseconds).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources

import numpy as np

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_COMPLETENESS_TOL = 1e-10
_PRUNE_NORM = 1e-14


@dataclass(frozen=True)
class KrausChannel:
    """An ordered set of Kraus operators on 1 or 2 qubits."""

    arity: int
    operators: tuple
    label: str = ""

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError(f"arity must be 1 or 2, got {self.arity}")
        ops = tuple(np.asarray(op, dtype=complex) for op in self.operators)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        dim = 2**self.arity
        for op in ops:
            if op.shape != (dim, dim):
                raise ValueError(
                    f"operator shape {op.shape} does not match arity {self.arity}"
                )
        total = sum(op.conj().T @ op for op in ops)
        if np.max(np.abs(total - np.eye(dim))) > _COMPLETENESS_TOL:
            raise ValueError(f"Kraus completeness violated for channel {self.label!r}")
        object.__setattr__(self, "operators", ops)

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Row-major-vec superoperator sum_k kron(E_k, E_k.conj())."""
        return sum(np.kron(op, op.conj()) for op in self.operators)


def identity_channel(arity: int = 1) -> KrausChannel:
    dim = 2**arity
    return KrausChannel(arity, (np.eye(dim, dtype=complex),), label="identity")


def _check_probability(p, name="p"):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {p}")
    return p


def amplitude_damping(p) -> KrausChannel:
    """Decay channel |1> -> |0> with probability p."""
    p = _check_probability(p)
    k1 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    k2 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return KrausChannel(1, (k1, k2), label=f"damping(p={p:g})")


def dephasing(p) -> KrausChannel:
    """Phase-flip channel; off-diagonals scale by (1 - 2p)."""
    p = _check_probability(p)
    k1 = np.sqrt(1 - p) * _I2
    k2 = np.sqrt(p) * _Z
    return KrausChannel(1, (k1, k2), label=f"dephasing(p={p:g})")


def depolarizing(p) -> KrausChannel:
    """Single-qubit depolarizing: rho -> (1-p) rho + p I/2."""
    p = _check_probability(p)
    ops = (
        np.sqrt(1 - 0.75 * p) * _I2,
        0.5 * np.sqrt(p) * _X,
        0.5 * np.sqrt(p) * _Y,
        0.5 * np.sqrt(p) * _Z,
    )
    return KrausChannel(1, ops, label=f"depolarizing(p={p:g})")


def tensor_square(channel: KrausChannel) -> KrausChannel:
    """Two-qubit channel {E_i (x) E_j} from all pairs of a 1-qubit channel."""
    if channel.arity != 1:
        raise ValueError("tensor_square requires an arity-1 channel")
    ops = tuple(
        np.kron(a, b) for a in channel.operators for b in channel.operators
    )
    return KrausChannel(2, ops, label=f"{channel.label} (x) {channel.label}")


def compose(first: KrausChannel, second: KrausChannel, label="") -> KrausChannel:
    """Channel applying `first` then `second`, as products of Kraus operators."""
    if first.arity != second.arity:
        raise ValueError("cannot compose channels of different arity")
    ops = []
    for b in second.operators:
        for a in first.operators:
            op = b @ a
            if np.linalg.norm(op) >= _PRUNE_NORM:
                ops.append(op)
    return KrausChannel(first.arity, tuple(ops), label=label)


def thermal_relaxation(T1, T2, t_q) -> KrausChannel:
    """Relaxation over a gate of duration t_q (ns) given T1, T2 (us).

    Dephasing with p = (1 - e^{-2 gamma})/2, gamma = t/T2 - t/(2 T1), is
    applied first, then amplitude damping with p = 1 - e^{-t/T1}.
    """
    T1, T2, t_q = float(T1), float(T2), float(t_q)
    if T1 <= 0 or T2 <= 0 or t_q <= 0:
        raise ValueError("T1, T2 and t_q must all be positive")
    t_us = t_q * 1e-3  # ns -> us
    gamma = t_us / T2 - t_us / (2 * T1)
    if gamma < 0:
        raise ValueError(f"T2={T2} > 2*T1={2 * T1} gives unphysical gamma={gamma}")
    p_damping = 1.0 - np.exp(-t_us / T1)
    p_dephasing = 0.5 * (1.0 - np.exp(-2.0 * gamma))
    return compose(
        dephasing(p_dephasing),
        amplitude_damping(p_damping),
        label=f"thermal(T1={T1:g},T2={T2:g},t={t_q:g}ns)",
    )


@dataclass(frozen=True)
class DeviceParams:
    """Calibration parameters of a device qubit pair (averaged values)."""

    T1: float  # us
    T2: float  # us
    t_1q: float  # ns
    t_2q: float  # ns
    p_1q: float
    p_2q: float

    def __post_init__(self):
        if min(self.T1, self.T2, self.t_1q, self.t_2q) <= 0:
            raise ValueError("T1, T2, t_1q, t_2q must be positive")
        if self.T2 > 2 * self.T1:
            raise ValueError(f"T2={self.T2} exceeds 2*T1={2 * self.T1}")
        _check_probability(self.p_1q, "p_1q")
        _check_probability(self.p_2q, "p_2q")

    @classmethod
    def from_dict(cls, d) -> "DeviceParams":
        return cls(
            T1=d["T1"], T2=d["T2"], t_1q=d["t_1q"], t_2q=d["t_2q"],
            p_1q=d["eps_1q"], p_2q=d["eps_2q"],
        )


@dataclass(frozen=True)
class TwoQubitNoise:
    """A channel applied after a two-qubit gate.

    `per_qubit` channels have arity 1 and act on each gate qubit in turn;
    joint channels have arity 2 and act on both qubits at once.
    """

    channel: KrausChannel
    per_qubit: bool = False

    def __post_init__(self):
        expected = 1 if self.per_qubit else 2
        if self.channel.arity != expected:
            raise ValueError(
                f"{'per-qubit' if self.per_qubit else 'joint'} entry needs "
                f"arity {expected}, got {self.channel.arity}"
            )


@dataclass(frozen=True)
class NoiseSpec:
    """Gate-noise assignment: channels applied after every 1q / 2q gate."""

    single_qubit_channels: tuple = ()
    two_qubit_channels: tuple = ()

    def __post_init__(self):
        for ch in self.single_qubit_channels:
            if ch.arity != 1:
                raise ValueError("single-qubit entries must have arity 1")
        for entry in self.two_qubit_channels:
            if not isinstance(entry, TwoQubitNoise):
                raise ValueError("two-qubit entries must be TwoQubitNoise")

    # The per-slot noise of a circuit is applied thousands of times per
    # gradient, so the channels after a gate are folded once into a single
    # superoperator (4x4 for rotations, 16x16 for CNOTs) and each later
    # application is one tensor contraction. The adjoint (Heisenberg
    # picture, reversed order) superoperator is the conjugate transpose.

    @cached_property
    def _single_superop(self):
        if not self.single_qubit_channels:
            return None
        S = np.eye(4, dtype=complex)
        for ch in self.single_qubit_channels:
            S = ch.superoperator @ S
        return S

    @cached_property
    def _two_qubit_superop(self):
        if not self.two_qubit_channels:
            return None
        S = np.eye(16, dtype=complex)
        for entry in self.two_qubit_channels:
            if entry.per_qubit:
                for position in (0, 1):
                    lifted = KrausChannel(
                        2,
                        tuple(
                            np.kron(op, _I2) if position == 0 else np.kron(_I2, op)
                            for op in entry.channel.operators
                        ),
                    )
                    S = lifted.superoperator @ S
            else:
                S = entry.channel.superoperator @ S
        return S

    @cached_property
    def single_superop_tensor(self):
        S = self._single_superop
        return None if S is None else S.reshape((2,) * 4)

    @cached_property
    def single_adjoint_superop_tensor(self):
        S = self._single_superop
        return None if S is None else S.conj().T.reshape((2,) * 4)

    @cached_property
    def two_qubit_superop_tensor(self):
        S = self._two_qubit_superop
        return None if S is None else S.reshape((2,) * 8)

    @cached_property
    def two_qubit_adjoint_superop_tensor(self):
        S = self._two_qubit_superop
        return None if S is None else S.conj().T.reshape((2,) * 8)


def uniform_gate_noise(channel: KrausChannel) -> NoiseSpec:
    """The sweep noise model: a 1q channel on every rotation, its tensor
    square jointly on every CNOT."""
    return NoiseSpec(
        single_qubit_channels=(channel,),
        two_qubit_channels=(TwoQubitNoise(tensor_square(channel)),),
    )


def ibm_device_noise(params: DeviceParams) -> NoiseSpec:
    """Composite gate-noise model for an IBM backend.

    1q gates: depolarizing(p_1q) then thermal relaxation over t_1q.
    2q gates: per-qubit tensor-product depolarizing(p_2q) then per-qubit
    thermal relaxation over t_2q. The depolarizing probabilities are set
    directly to the calibration error rates.
    """
    thermal_1q = thermal_relaxation(params.T1, params.T2, params.t_1q)
    thermal_2q = thermal_relaxation(params.T1, params.T2, params.t_2q)
    return NoiseSpec(
        single_qubit_channels=(depolarizing(params.p_1q), thermal_1q),
        two_qubit_channels=(
            TwoQubitNoise(tensor_square(depolarizing(params.p_2q))),
            TwoQubitNoise(thermal_2q, per_qubit=True),
        ),
    )


def load_device_table() -> dict:
    """The bundled calibration table, keyed by backend[pair] name."""
    text = resources.files("noisyvqe.data").joinpath("ibm_devices.json").read_text()
    return json.loads(text)


def load_device_params(key: str) -> DeviceParams:
    """Averaged DeviceParams for a backend key such as 'Valencia[0,1]'."""
    table = load_device_table()
    normalized = {k.lower(): k for k in table}
    if key.lower() not in normalized:
        raise KeyError(f"unknown device key {key!r}; known: {sorted(table)}")
    return DeviceParams.from_dict(table[normalized[key.lower()]]["average"])
