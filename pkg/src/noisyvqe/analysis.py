"""Post-processing: relative energies, exponential fits, mean-field
crossover probabilities, and the depolarizing-accumulation model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .channels import uniform_gate_noise
from .hamiltonians import exact_ground_energy
from .hamiltonians import trace as h_trace
from .vqe import NOISE_FAMILIES, VqeConfig, optimize


def relative_energy(E: float, E0: float) -> float:
    """(E - E0) / |E0|."""
    if E0 == 0:
        raise ValueError("E0 must be nonzero")
    return (E - E0) / abs(E0)


@dataclass(frozen=True)
class FitParams:
    """Two-parameter exponential fit E(p) = amplitude * exp(rate * p).

    The amplitude absorbs the redundant constant of the c*exp(a x + b)
    form (c and e^b are not separately identifiable).
    """

    amplitude: float
    rate: float
    residual_norm: float


def fit_exponential(points) -> FitParams:
    """Least-squares fit of (p, E) data to amplitude * exp(rate * p)."""
    points = [(float(p), float(e)) for p, e in points]
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    xs = np.array([p for p, _ in points])
    ys = np.array([e for _, e in points])
    if len(set(xs.tolist())) != len(xs):
        raise ValueError("p values must be distinct")
    signs = np.sign(ys)
    if np.any(signs == 0) or len(set(signs.tolist())) != 1:
        raise ValueError("all energies must share a sign for the log fit")
    sign = signs[0]
    # log-linear initialization on |E|
    slope, intercept = np.polyfit(xs, np.log(np.abs(ys)), 1)
    p0 = (sign * np.exp(intercept), slope)
    popt, _ = curve_fit(
        lambda x, B, a: B * np.exp(a * x), xs, ys, p0=p0, maxfev=20000
    )
    residual = float(np.linalg.norm(ys - popt[0] * np.exp(popt[1] * xs)))
    return FitParams(amplitude=float(popt[0]), rate=float(popt[1]), residual_norm=residual)


def crossover_probability(fit: FitParams, E_mf: float) -> float:
    """Noise probability where the fitted curve meets the mean-field energy.

    Below this value the fitted noisy energy is lower than E_mf.
    """
    ratio = E_mf / fit.amplitude
    if ratio <= 0 or fit.rate == 0:
        raise ValueError("fitted curve does not cross the mean-field energy")
    p_star = np.log(ratio) / fit.rate
    if not 0.0 < p_star < 1.0:
        raise ValueError(f"crossover {p_star} outside (0, 1)")
    return float(p_star)


def global_epsilon(p: float, d: int) -> float:
    """Accumulated whole-circuit depolarizing parameter 1 - (1-p)^d."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if d < 0:
        raise ValueError("d must be nonnegative")
    return float(1.0 - (1.0 - p) ** d)


def accumulated_energy(E0: float, epsilon: float, traceH: float, n: int) -> float:
    """(1 - eps) E0 + eps Tr(H) / 2^n."""
    return (1.0 - epsilon) * E0 + epsilon * traceH / 2**n


def effective_depth(layout_depth: int, n_qubits: int, exponent: str = "logical") -> float:
    """Exponent used in the accumulation law.

    'logical' uses the logical depth directly; 'gate' uses the average
    count of noisy gates seen per qubit (CNOTs count on both qubits).
    """
    if exponent == "logical":
        return float(layout_depth)
    if exponent == "gate":
        gates_per_layer = 6 * (n_qubits - 1)  # per qubit-slot events per layer
        return layout_depth * gates_per_layer / n_qubits
    raise ValueError(f"unknown exponent mode {exponent!r}")


def accumulation_curve(
    config: VqeConfig, depths, p: float, exponent: str = "logical"
) -> list:
    """Noisy-VQE depolarizing accumulation across circuit depths.

    For each depth the fitted global parameter is eps_fit = 1 - E_sim/E0
    (traceless H assumed), compared against the analytic 1 - (1-p)^d.
    """
    H = config.hamiltonian
    if abs(h_trace(H)) > 1e-12:
        raise ValueError("accumulation analysis assumes a traceless Hamiltonian")
    e0 = exact_ground_energy(H)
    rows = []
    for depth in depths:
        run = optimize(
            VqeConfig(
                hamiltonian=H,
                depth=int(depth),
                noise=uniform_gate_noise(NOISE_FAMILIES["depolarizing"](p)),
                optimizer=config.optimizer,
                learning_rate=config.learning_rate,
                max_iterations=config.max_iterations,
                tolerance=config.tolerance,
                patience=config.patience,
                restarts=config.restarts,
                seed=config.seed,
                model=config.model,
            )
        )
        eps_analytic = 1.0 - (1.0 - p) ** effective_depth(
            int(depth), H.n_qubits, exponent
        )
        rows.append(
            {
                "model": config.model,
                "n": H.n_qubits,
                "depth": int(depth),
                "p": float(p),
                "E_sim": run.best_energy,
                "E0": e0,
                "eps_fit": 1.0 - run.best_energy / e0,
                "eps_analytic": eps_analytic,
                "E_accum": accumulated_energy(e0, eps_analytic, 0.0, H.n_qubits),
            }
        )
    return rows


def non_accumulation_check(config: VqeConfig, family: str, p: float, depths) -> list:
    """Relative energy across depths for a damping- or dephasing-type noise."""
    if family not in NOISE_FAMILIES:
        raise ValueError(f"unknown noise family {family!r}")
    H = config.hamiltonian
    e0 = exact_ground_energy(H)
    rows = []
    for depth in depths:
        run = optimize(
            VqeConfig(
                hamiltonian=H,
                depth=int(depth),
                noise=uniform_gate_noise(NOISE_FAMILIES[family](p)),
                optimizer=config.optimizer,
                learning_rate=config.learning_rate,
                max_iterations=config.max_iterations,
                tolerance=config.tolerance,
                patience=config.patience,
                restarts=config.restarts,
                seed=config.seed,
                model=config.model,
            )
        )
        rows.append(
            {
                "model": config.model,
                "n": H.n_qubits,
                "depth": int(depth),
                "noise_family": family,
                "p": float(p),
                "E": run.best_energy,
                "E0": e0,
                "rel_energy": relative_energy(run.best_energy, e0),
            }
        )
    return rows
