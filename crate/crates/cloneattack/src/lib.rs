//! Simulation and analysis workbench for the optimal-cloning individual
//! eavesdropping attack on the BB84 and trine-state R04 quantum key
//! distribution protocols.
//!
//! The crate covers the full attack pipeline:
//!
//! - [`qstate`]: dense 1-3 qubit states, density matrices, Bloch geometry,
//!   fidelity and purity;
//! - [`cloner`]: the asymmetric phase-covariant cloner, its probe-conditioned
//!   maps, shrinking factors and the PDBS/BDA optical model;
//! - [`protocols`]: BB84 and R04 state alphabets and sifting rules;
//! - [`eavesdropper`]: Eve's conditional states, Helstrom measurements and
//!   the three-party joint bit distribution;
//! - [`security`]: mutual informations, secret-key rate, attack optimization
//!   and the security map;
//! - [`source_model`]: photon-number statistics of the heralded source;
//! - [`tomography`]: simulated two-qubit tomography and maximum-likelihood
//!   reconstruction;
//! - [`montecarlo`]: seeded end-to-end protocol runs with empirical
//!   statistics;
//! - [`workbench`]: the configuration and reporting layer behind the CLI.
//!
//! Every module exposes plain functions over immutable values, so parameter
//! sweeps parallelize freely. See the crate examples for one runnable
//! walkthrough per capability.

pub mod cloner;
pub mod eavesdropper;
pub mod error;
mod fmt;
pub mod montecarlo;
pub mod protocols;
pub mod qstate;
pub mod security;
pub mod source_model;
pub mod tomography;
pub mod workbench;

pub use cloner::{ClonerParams, CloneParty, OpticalModel, Probe};
pub use eavesdropper::{JointDistribution, Party, PovmPair};
pub use error::{Error, Result};
pub use protocols::{Announcement, Protocol, Sift};
pub use qstate::{uhlmann_fidelity, BlochVector, DensityMatrix, StateVector};
pub use security::{SecurityReport, analyze, optimize_attack, privacy_bound, security_map};
