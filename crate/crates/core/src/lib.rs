//! Exact simulation of probabilistic quantum cloning machines and the
//! entanglement-based signalling test they must fail.
//!
//! * [`qcore`]: kets, Hermitian operators, partial trace, Born sampling.
//! * [`entangle`]: the shared state and Alice's remote state preparation.
//! * [`pqcm`]: clonability checks, efficiency bounds and explicit Kraus machines.
//! * [`signalling`]: Bob's group verification, tallies and signalling statistics.

pub mod entangle;
pub mod error;
pub mod pqcm;
pub mod qcore;
pub mod signalling;

pub use entangle::{
    alice_measure, build_shared_state, induced_ensemble, target_to_basis, AliceBasis, Setting, SharedState,
};
pub use error::{Error, Result};
pub use qcore::{Ensemble, HermitianOperator, Ket, SeededRng};
