"""Desk-scale simulator of pulsed polarization-qubit teleportation.

Layers: ``states`` (multi-photon polarization algebra), ``protocol``
(ideal teleportation and entanglement swapping), ``interference`` (the
beam-splitter analyzer and its overlap model), ``experiment`` / ``oracle``
(Monte Carlo engine and its exact rate oracle), ``cli`` (scenario runner).
"""

__version__ = "0.1.0"

from .config import (
    DetectorConfig,
    ExperimentConfig,
    PreparationConfig,
    SourceConfig,
    symmetric_delay_grid,
)
from .experiment import (
    CoincidenceTally,
    ScanResult,
    fourfold_scan,
    run_corrected_scan,
    run_scan,
    simulate_pulse,
    subtract_background,
    visibility,
)
from .interference import (
    CoincidencePovm,
    ModeOverlapModel,
    bs_oracle,
    coincidence_probability,
    conditional_state,
    overlap,
    threefold_rates,
)
from .oracle import (
    analytic_rates,
    calibrate_fourfold_overlap,
    calibrate_spurious,
    spurious_fraction,
)
from .protocol import (
    bsm,
    correction_table,
    entanglement_swap,
    teleport,
    teleport_postselected,
)
from .states import (
    BellOutcome,
    DensityOperator,
    Operator,
    PolarizationSpec,
    PureState,
    bell_projectors,
    bell_state,
    fidelity,
    make_qubit,
    measure_projective,
    partial_trace,
    tensor,
)

__all__ = [
    "BellOutcome",
    "CoincidencePovm",
    "CoincidenceTally",
    "DensityOperator",
    "DetectorConfig",
    "ExperimentConfig",
    "ModeOverlapModel",
    "Operator",
    "PolarizationSpec",
    "PreparationConfig",
    "PureState",
    "ScanResult",
    "SourceConfig",
    "analytic_rates",
    "bell_projectors",
    "bell_state",
    "bs_oracle",
    "bsm",
    "calibrate_fourfold_overlap",
    "calibrate_spurious",
    "coincidence_probability",
    "conditional_state",
    "correction_table",
    "entanglement_swap",
    "fidelity",
    "fourfold_scan",
    "make_qubit",
    "measure_projective",
    "overlap",
    "partial_trace",
    "run_corrected_scan",
    "run_scan",
    "simulate_pulse",
    "spurious_fraction",
    "subtract_background",
    "symmetric_delay_grid",
    "teleport",
    "teleport_postselected",
    "tensor",
    "threefold_rates",
    "visibility",
]
