//! Complex linear algebra and quantum-state primitives.

pub mod ensemble;
pub mod ket;
pub mod measure;
pub mod operator;
pub mod rng;
pub mod sample;

pub use ensemble::Ensemble;
pub use ket::{inner_product, tensor, tensor_power, Ket};
pub use measure::{born_measure, born_probabilities, measure_subsystem};
pub use operator::{
    gram_matrix, hermitian_eigenvalues, is_psd, partial_trace, rank, rank_with_tolerance, trace_distance, Eigh,
    HermitianOperator, Subsystem,
};
pub use rng::SeededRng;

/// Unit-norm tolerance for normalized kets.
pub const NORM_TOL: f64 = 1e-10;
/// Allowed `|mᵢⱼ - conj(mⱼᵢ)|` for Hermitian operators.
pub const HERM_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff for linear independence.
pub const RANK_TOL: f64 = 1e-9;
/// Allowed negative eigenvalue for positive semidefiniteness.
pub const PSD_TOL: f64 = 1e-9;
/// Largest materialized state dimension.
pub const MAX_DIM: usize = 1 << 24;
