"""Density-matrix simulation of the variational quantum eigensolver under
local gate-noise models, with mean-field baselines, sampled measurement
emulation, and noise-accumulation analysis."""

from .densmat import (
    DensityMatrix,
    UnitaryGate,
    apply_channel,
    apply_unitary,
    expectation,
    ground_state,
)
from .channels import (
    DeviceParams,
    KrausChannel,
    NoiseSpec,
    TwoQubitNoise,
    amplitude_damping,
    dephasing,
    depolarizing,
    ibm_device_noise,
    identity_channel,
    load_device_params,
    tensor_square,
    thermal_relaxation,
    uniform_gate_noise,
)
from .hamiltonians import (
    Hamiltonian,
    PauliTerm,
    build_model,
    exact_ground_energy,
    heisenberg,
    t_heisenberg,
    tfim,
    trace,
)
from .ansatz import CircuitLayout, build_layout, execute, parameter_count
from .vqe import (
    VqeConfig,
    VqeResult,
    energy,
    gradient_parameter_shift,
    noise_sweep,
    optimize,
)
from .meanfield import BlochAngles, mf_energy, mf_gradient, mf_optimize
from .measurement import (
    BasisGroup,
    ConfusionMatrix,
    CountsDistribution,
    apply_confusion,
    energy_from_counts,
    group_terms,
    mitigate,
    sample_counts,
    sampled_vqe_step,
)
from .analysis import (
    FitParams,
    accumulated_energy,
    crossover_probability,
    fit_exponential,
    global_epsilon,
    relative_energy,
)

__version__ = "0.1.0"
