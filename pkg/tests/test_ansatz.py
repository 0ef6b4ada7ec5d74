import numpy as np
import pytest

from noisyvqe.ansatz import (
    CNOT,
    CircuitLayout,
    CnotSlot,
    RotationSlot,
    build_layout,
    execute,
    parameter_count,
    rotation_matrix,
)
from noisyvqe.channels import depolarizing, uniform_gate_noise
from noisyvqe.densmat import expectation

from conftest import embed_kron


def test_rotation_matrix_values():
    assert np.allclose(rotation_matrix("Y", 0.0), np.eye(2))
    assert np.allclose(rotation_matrix("Z", 0.0), np.eye(2))
    # R(theta) = exp(-i theta P / 2)
    assert np.allclose(rotation_matrix("Y", np.pi), [[0, -1], [1, 0]])
    assert np.allclose(
        rotation_matrix("Z", np.pi / 2),
        np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)]),
    )
    with pytest.raises(ValueError):
        rotation_matrix("X", 0.5)


def test_rotation_matrix_is_unitary(rng):
    for _ in range(20):
        axis = "Y" if rng.uniform() < 0.5 else "Z"
        R = rotation_matrix(axis, rng.uniform(-10, 10))
        assert np.allclose(R @ R.conj().T, np.eye(2), atol=1e-12)


def test_parameter_count():
    assert parameter_count(2, 1) == 4
    assert parameter_count(4, 1) == 12
    assert parameter_count(4, 3) == 36
    assert parameter_count(6, 4) == 80
    assert parameter_count(8, 6) == 168


def test_layout_shape_validation():
    for n, d in ((3, 1), (0, 1), (2, 0), (-2, 2)):
        with pytest.raises(ValueError):
            build_layout(n, d)


def test_layout_two_qubit_depth_one():
    layout = build_layout(2, 1)
    assert layout.n_params == 4
    assert layout.slots == (
        RotationSlot("Y", 0, 0),
        RotationSlot("Z", 0, 1),
        RotationSlot("Y", 1, 2),
        RotationSlot("Z", 1, 3),
        CnotSlot(0, 1),
    )


def test_layout_brick_structure():
    layout = build_layout(4, 1)
    cnots = [s for s in layout.slots if isinstance(s, CnotSlot)]
    assert [(c.control, c.target) for c in cnots] == [(0, 1), (2, 3), (1, 2)]
    # each block: four rotations then its CNOT
    assert isinstance(layout.slots[4], CnotSlot)
    rotations = [s for s in layout.slots if isinstance(s, RotationSlot)]
    assert [r.param_index for r in rotations] == list(range(12))
    assert {r.axis for r in rotations} == {"Y", "Z"}


def test_layout_depth_stacks_layers():
    d1 = build_layout(6, 1)
    d3 = build_layout(6, 3)
    assert len(d3.slots) == 3 * len(d1.slots)
    assert d3.slots[: len(d1.slots)] == d1.slots


def test_describe_lists_every_slot():
    layout = build_layout(2, 1)
    lines = layout.describe().splitlines()
    assert len(lines) == len(layout.slots)
    assert lines[-1] == "CNOT(0,1)"


def test_execute_zero_params_is_ground_state():
    for n, d in ((2, 1), (4, 2)):
        layout = build_layout(n, d)
        state = execute(layout, np.zeros(layout.n_params))
        expected = np.zeros((2**n, 2**n))
        expected[0, 0] = 1.0
        assert np.allclose(state.data, expected, atol=1e-12)


def test_execute_rejects_wrong_parameter_shape():
    layout = build_layout(2, 1)
    with pytest.raises(ValueError):
        execute(layout, np.zeros(5))


def test_execute_matches_statevector_oracle(rng):
    # noiseless circuit: apply each gate to a statevector via kron embedding
    for n, d in ((2, 1), (2, 2), (4, 1), (4, 2)):
        layout = build_layout(n, d)
        for _ in range(3):
            params = rng.uniform(0, 2 * np.pi, layout.n_params)
            psi = np.zeros(2**n, dtype=complex)
            psi[0] = 1.0
            for slot in layout.slots:
                if isinstance(slot, CnotSlot):
                    op = embed_kron(CNOT, (slot.control, slot.target), n)
                else:
                    op = embed_kron(
                        rotation_matrix(slot.axis, params[slot.param_index]),
                        (slot.qubit,),
                        n,
                    )
                psi = op @ psi
            state = execute(layout, params)
            assert np.allclose(state.data, np.outer(psi, psi.conj()), atol=1e-12)
            assert state.purity() == pytest.approx(1.0, abs=1e-10)


def test_noisy_execute_matches_channel_by_channel_oracle(rng):
    # superoperator fast path against the literal Kraus-sum public API
    from noisyvqe.channels import (
        ibm_device_noise,
        load_device_params,
        thermal_relaxation,
    )
    from noisyvqe.channels import NoiseSpec, TwoQubitNoise, tensor_square
    from noisyvqe.densmat import UnitaryGate, apply_channel, apply_unitary, ground_state
    from noisyvqe.ansatz import CnotSlot, execute

    specs = [
        uniform_gate_noise(depolarizing(0.05)),
        ibm_device_noise(load_device_params("Yorktown[1,2]")),
        NoiseSpec(
            single_qubit_channels=(depolarizing(0.02), thermal_relaxation(80, 60, 300)),
            two_qubit_channels=(
                TwoQubitNoise(tensor_square(depolarizing(0.03))),
                TwoQubitNoise(thermal_relaxation(80, 60, 300), per_qubit=True),
            ),
        ),
    ]
    for noise in specs:
        layout = build_layout(4, 1)
        params = rng.uniform(0, 2 * np.pi, layout.n_params)
        state = ground_state(4)
        for slot in layout.slots:
            if isinstance(slot, CnotSlot):
                state = apply_unitary(state, UnitaryGate(CNOT, (slot.control, slot.target)))
                for entry in noise.two_qubit_channels:
                    if entry.per_qubit:
                        for q in (slot.control, slot.target):
                            state = apply_channel(state, entry.channel, (q,))
                    else:
                        state = apply_channel(
                            state, entry.channel, (slot.control, slot.target)
                        )
            else:
                matrix = rotation_matrix(slot.axis, params[slot.param_index])
                state = apply_unitary(state, UnitaryGate(matrix, (slot.qubit,)))
                for channel in noise.single_qubit_channels:
                    state = apply_channel(state, channel, (slot.qubit,))
        fast = execute(layout, params, noise)
        assert np.allclose(fast.data, state.data, atol=1e-12)


def test_noisy_execute_preserves_invariants(rng):
    layout = build_layout(4, 2)
    noise = uniform_gate_noise(depolarizing(0.05))
    params = rng.uniform(0, 2 * np.pi, layout.n_params)
    state = execute(layout, params, noise)
    state.validate()
    assert state.purity() < 1.0


def test_noise_only_shrinks_purity_monotonically(rng):
    layout = build_layout(2, 2)
    params = rng.uniform(0, 2 * np.pi, layout.n_params)
    purities = [
        execute(layout, params, uniform_gate_noise(depolarizing(p))).purity()
        for p in (0.0, 0.02, 0.1, 0.3)
    ]
    assert all(a >= b - 1e-12 for a, b in zip(purities, purities[1:]))
