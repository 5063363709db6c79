//! Measurement incompatibility, CGLMP Bell operators and quantum random
//! access codes for small qudit systems.

pub mod cglmp;
mod cmaes;
pub mod error;
pub mod incompat;
pub mod linalg;
pub mod measurement;
pub mod optimize;
pub mod qrac;
pub mod random;
pub mod sweep;

pub use cglmp::{
    chi_max, chi_of_state, chsh_closed_form, cglmp_operator, noisy_chi, verify_necessity,
    CglmpResult, CglmpSetting, NecessityReport, Party,
};
pub use error::{Error, Result};
pub use incompat::{
    incompatibility, incompatibility_rank1, jointly_measurable_projective,
    robustness_upper_bound, IncompatReport,
};
pub use linalg::{
    commutator, eig_hermitian, kron, partial_trace, schatten_norm, ComplexMatrix, HermitianEig,
    SchattenP, Subsystem, C64,
};
pub use measurement::{
    add_white_noise, fourier, interferometric_pvm, mub_pair, pvm_from_unitary, PhaseVector, Povm,
    Pvm,
};
pub use optimize::{
    constrained_chi_extremum, interferometric_scan, schmidt_and_entropy, u3_from_params,
    ConstrainedProblem, Manifold, OptimumReport, Sense, Side, U3Params,
};
pub use qrac::{
    equal_robustness_scan, noisy_qrac, qrac_closed_form_d2, qrac_success, threshold_eta_c,
    threshold_eta_r, QracResult, ThresholdReport,
};
pub use random::{haar_unitary, stream};
pub use sweep::{
    run_qrac_sweep, run_report, run_sweep, run_thresholds, ReportKind, RunConfig, SweepRecord,
    Table, SCHEMA_VERSION,
};
