//! Deterministic, seeded simulator of journal peer review as a multi-round
//! market. Manuscripts with latent quality are generated, self-estimated by
//! their authors, targeted at quartile-ranked journals, scored by
//! load-burdened referees, and accepted or resubmitted round by round.
//!
//! The numeric kernel is generic over the scalar type via `num_traits::Float`;
//! the simulation itself runs on the [`Real`] alias below.

pub mod actors;
pub mod cli;
pub mod engine;
pub mod experiments;
pub mod market;
pub mod numeric;
pub mod quality;
pub mod rng;

/// Scalar type the simulation is pinned to.
pub type Real = f64;

/// Quality distribution at the simulation scalar.
pub type QualityDist = quality::QualityDistribution<Real>;

pub use engine::{
    bootstrap, collect_rejection_stats, run_round, run_simulation, RejectionStats, RoundMetrics,
    SimConfig, SimulationOutput, ValidationError,
};
pub use experiments::{
    phase_summary, run_sweep, run_sweep_serial, HighQualitySchedule, PhaseKind, SweepResult,
    SweepSpec,
};
pub use market::{Journal, JournalId, Quartile, Thresholds};
pub use quality::{CalibrationError, Manuscript, ManuscriptId, ManuscriptState};
