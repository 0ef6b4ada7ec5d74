import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density_matrix(rng, n):
    """Random full-rank density matrix via a Wishart-style construction."""
    dim = 2**n
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def embed_kron(op, targets, n):
    """Brute-force embedding oracle: elementwise tensor placement."""
    dim = 2**n
    k = len(targets)
    out = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(n) if q not in targets]
    for i in range(dim):
        bi = format(i, f"0{n}b")
        for j in range(dim):
            bj = format(j, f"0{n}b")
            if any(bi[q] != bj[q] for q in rest):
                continue
            row = int("".join(bi[q] for q in targets), 2)
            col = int("".join(bj[q] for q in targets), 2)
            out[i, j] = op[row, col]
    return out
