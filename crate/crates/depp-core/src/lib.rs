//! Simulator and analysis library for one-step deterministic polarization
//! entanglement purification with a spatially entangled ancilla, plus
//! recurrence-style baselines for comparison.

pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod optics;
pub mod protocols;
pub mod qcore;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
pub use montecarlo::{
    rng_call_count, sample_patterns, sample_patterns_sharded, wilson_interval, RngState,
    SampleReport, ZERO_SEED_REMAP,
};
pub use noise::{
    make_bell_diagonal, make_spatial_state, pauli_channel, product_dephase, spatial_dephasing,
    BellDiagonalParams, Photon, ProductDiagonalParams, SourceConfig,
};
pub use optics::{
    embed, fig1_side_map, hwp_map, pbs_map, project_pattern,
    two_photon_unitary, CoincidencePattern, OpticalNetwork, Polarization, Port, Side, SingleMode,
};
pub use protocols::{
    apply_correction, bennett_iterate, bennett_recurrence, bennett_step_exact,
    bennett_success_probability, compare_protocols, one_step_depp, one_step_depp_with,
    simon_pan_model, BennettSummary, DeppSummary, PatternRecord, ProtocolComparison,
    RecurrenceTrace, RunResult, SimonPanSummary,
};
pub use qcore::{
    apply_channel, bell_state, fidelity_pure, is_density, is_unitary, partial_trace,
    pauli_x, pauli_y, pauli_z, BellKind, DensityMatrix, KrausChannel, StateVector, C64,
};
pub use report::{canonical_json, csv_row, results_document, serialize_result, ProtocolOutput};
pub use runner::{bell_weights, build_polarization_state, load_matrix_file, run_scenario};
pub use scenario::{
    parse_scenario, parse_scenario_with_overrides, ParseError, PolarizationNoise, ProtocolKind,
    RunSettings, ScenarioConfig,
};
pub use validation::{
    perturbed_network, random_bell_diagonal, random_density_matrix, random_product_diagonal,
    random_simplex, run_invariant_suite, InvariantReport,
};
