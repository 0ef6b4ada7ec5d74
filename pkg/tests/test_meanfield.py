import itertools

import numpy as np
import pytest

from noisyvqe.hamiltonians import (
    Hamiltonian,
    PauliTerm,
    heisenberg,
    t_heisenberg,
    tfim,
)
from noisyvqe.meanfield import (
    BlochAngles,
    _wrap_angles,
    mf_energy,
    mf_gradient,
    mf_optimize,
)


def random_angles(rng, n):
    return BlochAngles(rng.uniform(0, np.pi, n), rng.uniform(0, 2 * np.pi, n))


def grid_search_energy(H, resolution=30):
    """Exhaustive oracle: minimal product-state energy on an angle grid."""
    thetas = np.linspace(0, np.pi, resolution)
    phis = np.linspace(0, 2 * np.pi, 2 * resolution, endpoint=False)
    n = H.n_qubits
    best = np.inf
    for combo in itertools.product(range(resolution), repeat=n):
        for pcombo in itertools.product(range(2 * resolution), repeat=n):
            angles = BlochAngles(
                thetas[list(combo)], phis[list(pcombo)]
            )
            best = min(best, mf_energy(H, angles))
    return best


def test_angles_validation():
    with pytest.raises(ValueError):
        BlochAngles(np.zeros(2), np.zeros(3))
    with pytest.raises(ValueError):
        BlochAngles(np.zeros((2, 2)), np.zeros((2, 2)))


def test_site_state_and_product_density_matrix(rng):
    angles = random_angles(rng, 2)
    psi0 = angles.site_state(0)
    psi1 = angles.site_state(1)
    full = np.kron(psi0, psi1)
    assert np.allclose(angles.product_density_matrix(), np.outer(full, full.conj()))
    assert np.linalg.norm(psi0) == pytest.approx(1.0)


def test_mf_energy_matches_dense_oracle(rng):
    for H in (tfim(3, 1.0, 1.0), heisenberg(3), t_heisenberg(4, 1.0, 1.0)):
        for _ in range(10):
            angles = random_angles(rng, H.n_qubits)
            rho = angles.product_density_matrix()
            expected = float(np.real(np.trace(H.to_matrix() @ rho)))
            assert mf_energy(H, angles) == pytest.approx(expected, abs=1e-10)


def test_mf_energy_rejects_mismatch_and_high_locality():
    H = tfim(4, 1.0, 1.0)
    with pytest.raises(ValueError):
        mf_energy(H, BlochAngles(np.zeros(2), np.zeros(2)))
    three_local = Hamiltonian(3, (PauliTerm(1.0, ((0, "X"), (1, "X"), (2, "X"))),))
    with pytest.raises(ValueError):
        mf_energy(three_local, BlochAngles(np.zeros(3), np.zeros(3)))


def test_mf_gradient_matches_finite_differences(rng):
    h = 1e-7
    for H in (tfim(3, 1.0, 1.0), heisenberg(4)):
        n = H.n_qubits
        for _ in range(10):
            angles = random_angles(rng, n)
            grad = mf_gradient(H, angles)
            x = np.concatenate([angles.theta, angles.phi])
            for j in range(2 * n):
                up, down = x.copy(), x.copy()
                up[j] += h
                down[j] -= h
                numeric = (
                    mf_energy(H, BlochAngles(up[:n], up[n:]))
                    - mf_energy(H, BlochAngles(down[:n], down[n:]))
                ) / (2 * h)
                assert grad[j] == pytest.approx(numeric, abs=1e-5)


def test_wrap_angles_preserves_state(rng):
    H = heisenberg(2)
    for _ in range(20):
        theta = rng.uniform(-4 * np.pi, 4 * np.pi, 2)
        phi = rng.uniform(-4 * np.pi, 4 * np.pi, 2)
        wrapped = _wrap_angles(theta.copy(), phi.copy())
        assert np.all((wrapped.theta >= 0) & (wrapped.theta <= np.pi))
        assert np.all((wrapped.phi >= 0) & (wrapped.phi < 2 * np.pi))
        raw = BlochAngles(np.mod(theta, 2 * np.pi), np.mod(phi, 2 * np.pi))
        assert mf_energy(H, wrapped) == pytest.approx(mf_energy(H, raw), abs=1e-9)


def test_mf_optimize_two_qubit_values():
    # analytic product-state minima for the three two-qubit models
    for H, expected in (
        (tfim(2, 1.0, 1.0), -2.0),
        (heisenberg(2), -1.0),
        (t_heisenberg(2, 1.0, 1.0), -1.5),
    ):
        e_mf, angles = mf_optimize(H, restarts=10, seed=0)
        assert e_mf == pytest.approx(expected, abs=1e-6)
        assert mf_energy(H, angles) == pytest.approx(e_mf, abs=1e-12)


def test_mf_optimize_matches_grid_search():
    H = heisenberg(2)
    e_grid = grid_search_energy(H, resolution=9)
    e_mf, _ = mf_optimize(H, restarts=10, seed=0)
    assert e_mf <= e_grid + 1e-9
    assert e_mf == pytest.approx(e_grid, abs=1e-2)


def test_mf_optimize_deterministic():
    H = tfim(4, 1.0, 1.0)
    a, _ = mf_optimize(H, restarts=3, seed=5, max_iterations=400)
    b, _ = mf_optimize(H, restarts=3, seed=5, max_iterations=400)
    assert a == b
