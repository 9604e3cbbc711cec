//! Spatial search by continuous-time quantum walk with multiple marked vertices.
//!
//! The search Hamiltonian on a regular graph is `H = -γA - Σ_marked |i⟩⟨i|`.
//! This crate builds it for the complete graph and for the simplex of
//! complete graphs, evolves states in the full vertex space or in the
//! invariant subspace spanned by the cells of an equitable partition, and
//! checks closed-form predictions (critical jumping rates, gaps, runtimes)
//! for the named marked-vertex configurations.
//!
//! Module map:
//!
//! * [`graph`]: graph families, marked configurations, pair classification
//! * [`hamiltonian`]: full-space Hamiltonian, states and propagators
//! * [`reduction`]: coarsest equitable partition and quotient Hamiltonian
//! * [`analytic`]: closed-form predictions per configuration
//! * [`spectral`]: numerical gap and eigenvector checks, γ sweeps, fits
//! * [`schedule`]: one- and two-stage search schedules
//! * [`cli`]: the `ctqw-search` command-line front end

pub mod analytic;
pub mod cli;
pub mod error;
pub mod graph;
pub mod hamiltonian;
pub mod reduction;
pub mod schedule;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{CaseTag, Graph, GraphFamily, MarkedConfiguration, SimplexCoordinate};
pub use hamiltonian::{HamiltonianMatrix, Propagator, StateVector, TimeSeries};
pub use reduction::{EquitablePartition, ReducedOperator};
