//! Multiphase mean curvature flow on periodic grids.
//!
//! The flow `V_ij = m_ij sigma_ij H_ij` is approximated by an Allen-Cahn
//! system whose mobilities are decomposed into sums of harmonically additive
//! components. Time stepping splits each step into a decoupled semi-implicit
//! Allen-Cahn solve per phase (solved mode-wise in Fourier space) and an
//! explicit multiplier projection back onto the partition constraint
//! `sum_k u_k = 1`.
//!
//! Entry points:
//! - [`config::RunConfig`] describes a batch run (grid, tensions, mobilities,
//!   decomposition choice, initial shapes, outputs);
//! - [`run::run`] executes it and writes diagnostics and snapshots;
//! - the solver pieces ([`solver::Solver`], [`mobility`], [`tension`],
//!   [`grid`], [`geometry`], [`diagnostics`]) are usable as a library.

pub mod config;
pub mod diagnostics;
pub mod geometry;
pub mod grid;
pub mod mobility;
pub mod output;
pub mod potential;
pub mod raster;
pub mod run;
pub mod solver;
pub mod tension;

pub use config::RunConfig;
pub use grid::{ScalarField, SpectralGrid, SpectralTransform};
pub use mobility::{
    canonical_decomposition, harmonic_fit, sparse_decomposition, validate, HarmonicComponent,
    HarmonicDecomposition, MobilitySet,
};
pub use solver::{PhaseState, Solver, SolverParams};
pub use tension::{split_tensions, TensionSet};
