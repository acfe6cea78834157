//! Genuine multipartite entanglement of fully symmetric Gaussian states
//! partitioned into blocks of modes.
//!
//! The crate computes the residual contangle among `K` molecules of a pure
//! fully symmetric `N`-mode state, builds the equivalent localized
//! multi-GLEMS covariance matrix, and runs randomized strong-monogamy checks.

pub mod bipartite;
pub mod error;
pub mod harness;
pub mod localization;
pub mod monogamy;
pub mod partitions;
pub mod real;
pub mod symmetric;
pub mod symplectic;

pub use bipartite::{
    block_pair_breakdown, block_pair_contangle, contangle_from_d2, glems_d2, PairBreakdown,
    PurityTriple,
};
pub use error::{Error, Result};
pub use harness::{run_monte_carlo, scan_squeezing, MonteCarloConfig, MonteCarloReport};
pub use localization::{build_multi_glems_cm, glems_offdiagonal, MultiGlemsCM};
pub use monogamy::{
    atomic_residual, atomic_residual_with, residual_contangle, residual_contangle_with,
    ResidualOptions, ResidualReport, SubtractedTerm,
};
pub use partitions::{random_partition, ranking_number, sorted_partitions, ModePartition};
pub use real::Precision;
pub use symmetric::{b_squared, build_pure_fs_cm, reduced_block_det, SymmetricFamily};
pub use symplectic::{
    is_physical, purity, reduce, symplectic_eigenvalues, symplectic_form, CovMatrix,
    SymplecticSpectrum,
};
