"""Sequential quantum hypothesis testing: divergences, SQPRT simulation and exponent regions."""

__version__ = "0.1.0"

from .states import (  # noqa: E402
    DensityMatrix,
    Povm,
    StatePair,
    born_distribution,
    parse_state_pair,
    qubit_family,
    tensor_power,
)
from .divergences import (  # noqa: E402
    classical_kl,
    increment_bound,
    max_relative_entropy,
    measured_relative_entropy,
    optimize_g,
    quantum_relative_entropy,
    qubit_grid_oracle,
    weighted_objective,
)
from .optimize import OptimizerOptions  # noqa: E402
from .engine import (  # noqa: E402
    Decision,
    SqprtParams,
    Strategy,
    build_adaptive_strategy,
    run_trial,
    thresholds_for,
)
from .montecarlo import BatchConfig, exponent_sweep, run_batch  # noqa: E402

__all__ = [
    "BatchConfig", "Decision", "DensityMatrix", "OptimizerOptions", "Povm", "SqprtParams",
    "StatePair", "Strategy", "born_distribution", "build_adaptive_strategy", "classical_kl",
    "exponent_sweep", "increment_bound", "max_relative_entropy", "measured_relative_entropy",
    "optimize_g", "parse_state_pair", "quantum_relative_entropy", "qubit_family",
    "qubit_grid_oracle", "run_batch", "run_trial", "tensor_power", "thresholds_for",
    "weighted_objective",
]
