"""Measurement-based subspace cooling of qudit spin systems.

Repeated unitary evolution plus post-selected rank-k measurement on a
regulator qudit drives infinite-temperature targets into the equal mixture
of their k lowest local-energy eigenstates.  The package provides the exact
dense simulator, the closed-form validation oracles, open-system (local
master equation) evolution, and a deterministic sweep harness with a CLI.
"""

__version__ = "0.1.0"

from .evolution import (
    BathSpec,
    IntegrationError,
    LindbladPropagator,
    Propagator,
    dissipator,
    lindblad_evolve,
    liouvillian,
    propagator,
)
from .hamiltonians import (
    BBHSpec,
    HamiltonianSpec,
    SpinStarSpec,
    SystemLayout,
    XXZSpec,
    build_bbh,
    build_spin_star,
    build_xxz,
)
from .oracles import fidelity_bbh_rank1_d3, fidelity_xx_rank1
from .protocol import (
    ExtinctionError,
    ProtocolConfig,
    TrajectoryRecord,
    ZenoSpectrum,
    apply_measurement,
    delta_p,
    zeno_run,
    zeno_spectrum,
)
from .qudit import (
    DensityMatrix,
    Projector,
    SpinOperatorSet,
    embed_operator,
    local_energy_eigenbasis,
    low_lying_mixture,
    partial_trace,
    projector,
    spin_operators,
    tensor_product,
    thermal_state,
    uhlmann_fidelity,
)
from .sweeps import (
    ConfigError,
    SweepSpec,
    classify_regions,
    load_config,
    oracle_check,
    run_config,
    run_sweep,
    write_results,
)

__all__ = [
    "BBHSpec", "BathSpec", "ConfigError", "DensityMatrix", "ExtinctionError",
    "HamiltonianSpec", "IntegrationError", "LindbladPropagator", "Projector",
    "Propagator", "ProtocolConfig", "SpinOperatorSet", "SpinStarSpec",
    "SweepSpec", "SystemLayout", "TrajectoryRecord", "XXZSpec", "ZenoSpectrum",
    "apply_measurement", "build_bbh", "build_spin_star", "build_xxz",
    "classify_regions", "delta_p", "dissipator", "embed_operator",
    "fidelity_bbh_rank1_d3", "fidelity_xx_rank1", "lindblad_evolve",
    "liouvillian", "load_config", "local_energy_eigenbasis",
    "low_lying_mixture", "oracle_check", "partial_trace", "projector",
    "propagator", "run_config", "run_sweep", "spin_operators",
    "tensor_product", "thermal_state", "uhlmann_fidelity", "write_results",
    "zeno_run", "zeno_spectrum",
]
