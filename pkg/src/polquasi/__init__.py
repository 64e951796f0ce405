"""Polarization tomography, quasiprobabilities of quantum coherence and
Dicke-state witnesses for symmetric multi-photon states."""

__version__ = "0.1.0"

from .errors import NumericalError, RankDeficientError, StageError, ValidationError  # noqa: E402
from .states import (  # noqa: E402
    QubitState,
    SymmetricState,
    QuditState,
    coherent_state,
    coherent_from_bloch,
    dicke_state,
)
from .tomography import (  # noqa: E402
    CoincidenceDataset,
    DensityMatrix,
    MeasurementSetting,
    reconstruct_density,
    waveplate_grid,
)
from .qpqc import (  # noqa: E402
    decompose,
    quasiprobabilities,
    stationary_states_exact,
    stationary_states_numeric,
)
from .witness import gmax_dicke, gmax_generic, witness_evaluate  # noqa: E402
from .coherence import BasisRotation, coherence_scan, invariance_check, l2_coherence, rotate_state  # noqa: E402
from .stats import monte_carlo_qpqc, propagate_quadratic, sigma_counts  # noqa: E402
from .simulate import SourceModel, hom_curve, model_state, simulate_dataset  # noqa: E402

__all__ = [
    "BasisRotation",
    "CoincidenceDataset",
    "DensityMatrix",
    "MeasurementSetting",
    "NumericalError",
    "QubitState",
    "QuditState",
    "RankDeficientError",
    "SourceModel",
    "StageError",
    "SymmetricState",
    "ValidationError",
    "coherence_scan",
    "coherent_from_bloch",
    "coherent_state",
    "decompose",
    "dicke_state",
    "gmax_dicke",
    "gmax_generic",
    "hom_curve",
    "invariance_check",
    "l2_coherence",
    "model_state",
    "monte_carlo_qpqc",
    "propagate_quadratic",
    "quasiprobabilities",
    "reconstruct_density",
    "rotate_state",
    "sigma_counts",
    "simulate_dataset",
    "stationary_states_exact",
    "stationary_states_numeric",
    "waveplate_grid",
    "witness_evaluate",
]
