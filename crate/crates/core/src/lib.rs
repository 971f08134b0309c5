//! Tightening the local LP relaxation of pairwise MAP-MRF energy
//! minimization with triplet clusters.
//!
//! The [`model::Relaxation`] holds the factor graph. [`reparam`] runs a
//! monotone dual ascent on its lower bound. Triplets are proposed either by
//! singleton arc consistency probes ([`sac`]) or by frustrated cycles in a
//! signed partition graph ([`frustrated`]), both driven by the `ε` schedule
//! in [`schedule`]. [`certificate`] turns a probe's deletion trace into an
//! explicit reparameterization that provably raises one unary cost, and
//! [`driver`] ties everything together into the interleaved
//! ascent/tightening loop.

pub mod certificate;
pub mod csp;
pub mod driver;
pub mod error;
pub mod frustrated;
pub mod io;
pub mod model;
pub mod oracle;
pub mod reparam;
pub mod sac;
pub mod schedule;

pub use error::{
    CertificateError, CspError, FrustratedError, ModelError, OracleError, ParseError, ReparamError,
    RunError,
};
pub use model::{Factor, FactorId, Labeling, PairTerm, Relaxation};
pub use reparam::{solve_dual, DualSolver, MessageVector, MinSumDiffusion};
pub use sac::{find_triplets, SacFinder, TripletSet};
pub use frustrated::CycleFinder;
pub use schedule::{schedule_step, ScheduleState, Selection, TripletFinder};
