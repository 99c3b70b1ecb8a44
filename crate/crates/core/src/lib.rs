//! Spin-1 Bell tests with two-photon polarization modes.
//!
//! Two photons sharing a spatial mode behave as one spin-1 particle whose
//! outcomes `+1, 0, -1` are the polarization states `|2H⟩, |HV⟩, |2V⟩`.
//! This crate covers the full chain from that picture to laboratory numbers:
//!
//! - [`qstate`]: the spin-1 singlet, its one-parameter noisy mixture and the
//!   product of two photon-pair singlets;
//! - [`analyzer`]: rotated analyzers, joint outcome probabilities and the
//!   detection-efficiency model;
//! - [`bell`]: correlations, the CHSH combination `S`, the local bound by
//!   exhaustive enumeration and the distinguishable-pairs comparison;
//! - [`noisevis`]: fringe scans and the visibility ↔ noise conversion;
//! - [`optimizer`]: best analyzer angles and `S`-versus-`Δφ` curves;
//! - [`experiment`]: Monte Carlo count tables and their analysis.
//!
//! ```
//! use spin1bell::{chsh, make_spin1_singlet, BellSettings};
//!
//! let s = chsh(&make_spin1_singlet(), &BellSettings::new(0.0, 22.5, 11.25, 33.75)).unwrap();
//! assert!((s - 2.5523).abs() < 1e-4);
//! ```
//!
//! The guide under `book/` walks through each part; its code listings are
//! compiled and run as doctests of this crate.

pub mod analyzer;
pub mod bell;
mod error;
pub mod experiment;
pub mod noisevis;
pub mod optimizer;
pub mod qstate;
pub mod search;

pub use analyzer::{
    expected_counts, joint_probabilities, outcome_vectors, rotate_state, AnalyzerSetting,
    DetectionModel, OutcomeGrid,
};
pub use bell::{
    chsh, chsh_signed, correlation, expectation, lhv_max, pairs_model_chsh,
    pairs_model_probabilities, spin_half_baseline, BellSettings,
};
pub use error::{Error, Result};
pub use experiment::{
    correct_counts, estimate_bell, probability_table, simulate_counts, BellEstimate, CountTable,
    EstimateOptions, ExperimentConfig,
};
pub use noisevis::{fringe_scan, p_from_visibility, visibility, FringeScan};
pub use optimizer::{optimize_free, optimize_symmetric, scan_dphi, DphiRange, SymmetricSettings};
pub use qstate::{
    make_noisy_state, make_pair_product_state, make_spin1_singlet, JointState, Outcome,
    PairProductState, TripletAmplitudes,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/analyzers.md")]
    mod analyzers {}
    #[doc = include_str!("../../../book/src/bell.md")]
    mod bell {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/experiment.md")]
    mod experiment {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
