"""Delayed-choice entanglement swapping with vacuum/one-photon mode qubits."""

__version__ = "0.1.0"

from .analysis import FringeSummary, VisibilityFit, analytic_summary, fit_visibility, summarize
from .experiment import (
    ExperimentConfig,
    Order,
    RecordTable,
    TrialRecord,
    joint_distribution,
    order_invariance_check,
    run_experiment,
    run_trial,
    victor_sort,
)
from .fock import FockState, born_distribution, inner_product, measure_modes, tensor
from .measure import (
    BellOutcome,
    Detector,
    ab_analyze,
    bell_states,
    eve_analyze,
    fringe_probability,
    homodyne_probability,
    homodyne_simulate,
)
from .optics import BeamSplitter, OpticalCircuit, PhaseShifter, apply_bs, apply_phase, coherent_state, mirror_phase
from .source import prepare_source

__all__ = [
    "BeamSplitter",
    "BellOutcome",
    "Detector",
    "ExperimentConfig",
    "FockState",
    "FringeSummary",
    "OpticalCircuit",
    "Order",
    "PhaseShifter",
    "RecordTable",
    "TrialRecord",
    "VisibilityFit",
    "ab_analyze",
    "analytic_summary",
    "apply_bs",
    "apply_phase",
    "bell_states",
    "born_distribution",
    "coherent_state",
    "eve_analyze",
    "fit_visibility",
    "fringe_probability",
    "homodyne_probability",
    "homodyne_simulate",
    "inner_product",
    "joint_distribution",
    "measure_modes",
    "mirror_phase",
    "order_invariance_check",
    "prepare_source",
    "run_experiment",
    "run_trial",
    "summarize",
    "tensor",
    "victor_sort",
]
