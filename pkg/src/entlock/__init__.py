"""Entanglement locking at desk scale: explicit state families whose
measured or discarded qubit collapses their entanglement, the channels and
measures involved, and the optimizers and continuity tools that quantify the
effect."""

from .channels import (
    MeasurementOutcomeSet,
    ancilla_dephasing_circuit,
    ancilla_twirl_circuit,
    dephase_subsystem,
    measure_subsystem,
    pauli_twirl_qubit,
)
from .continuity import (
    AMDecomposition,
    GapCurveRow,
    TypicalSpectrum,
    WeightedSpectrum,
    affinity_defect,
    araki_moriya,
    curve_to_csv,
    positive_negative_parts,
    proof_defects,
    prop2_bound_check,
    reduced_measure_restricted,
    renyi_gap_curve,
    typical_truncation,
)
from .densop import (
    BipartiteCut,
    DensityOperator,
    DimensionCapError,
    Ensemble,
    HermitianOperator,
    PositivityError,
    ValidationReport,
    as_density_operator,
    convex_mix,
    eig_hermitian,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    pure_state,
    tensor,
    trace_distance,
    trace_norm,
    validate,
)
from .experiments import ExperimentReport, ReportRow, list_experiments, run_experiment
from .measures import (
    binary_entropy,
    concurrence_two_qubit,
    eof_two_qubit,
    log_negativity,
    mixing_gap,
    ppt_check,
    relative_entropy,
    renyi_entropy,
    resolve_functional,
    shannon_entropy,
    von_neumann_entropy,
)
from .optim import (
    ErDropResult,
    RexProblem,
    RexResult,
    RoofProblem,
    RoofResult,
    convex_roof_upper,
    er_drop_experiment,
    flag_additivity_check,
    prop3_locking_gap,
    rel_ent_ppt,
)
from .states import (
    FlowerFamilyParams,
    LockingFamilyParams,
    bell_state,
    flag_mixture,
    flower_operator,
    flower_post_measurement,
    flower_state,
    hadamard_power,
    hiding_pair,
    locking_purification,
    locking_state,
    max_correlated,
    prop3_states,
    werner_projector_states,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
