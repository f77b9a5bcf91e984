//! Probabilistic exact cloning.
//!
//! A set of states `|B₁⟩…|B_K⟩` can be cloned `1 → M` with heralded success
//! probabilities `γᵢ` exactly when `X - √Γ X⁽ᴹ⁾ √Γ ⪰ 0`, where `X` is the Gram
//! matrix, `X⁽ᴹ⁾` its entrywise `M`-th power and `Γ = diag(γ)`. The machine is
//! realized as a success/failure Kraus pair.

mod feasibility;
mod illegal;
mod machine;

pub use feasibility::{feasibility_matrix, max_uniform_gamma, DEFAULT_GAMMA_TOL};
pub use illegal::{illegal_clone, BranchCoefficients, IllegalClonerSpec};
pub use machine::{
    amplify, apply_machine, apply_structured, construct_machine, AmplifyOutcome, MachineOutcome, MachineResiduals,
    PqcmMachine, CONDITION_LIMIT, MACHINE_TOL,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::{inner_product, Ket};

/// `μ` exact copies of one state, kept in product form.
///
/// `label` indexes the state table of whoever produced the record: the
/// machine's clonable list for [`amplify`], the `2N` preparation labels for
/// [`illegal_clone`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyRecord {
    pub label: usize,
    pub state: Ket,
    pub multiplicity: usize,
}

/// `Σᵢ cᵢ |sᵢ⟩^{⊗μ}` (coefficients unnormalized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopySuperposition {
    pub terms: Vec<(Ket, Complex64)>,
    pub multiplicity: usize,
}

impl CopySuperposition {
    /// Squared norm `Σᵢⱼ conj(cᵢ) cⱼ ⟨sᵢ|sⱼ⟩^μ`.
    pub fn norm_sqr(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (si, ci) in &self.terms {
            for (sj, cj) in &self.terms {
                let ov = inner_product(si, sj).expect("terms share a dimension");
                acc += ci.conj() * cj * ov.powu(self.multiplicity as u32);
            }
        }
        acc.re
    }
}

/// What a cloner hands to Bob's verification step after heralded success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CloneOutput {
    Copies(CopyRecord),
    Superposition(CopySuperposition),
    /// A state orthogonal to every candidate product, so every group test fails.
    Junk {
        multiplicity: usize,
    },
}

impl CloneOutput {
    pub fn multiplicity(&self) -> usize {
        match self {
            CloneOutput::Copies(r) => r.multiplicity,
            CloneOutput::Superposition(s) => s.multiplicity,
            CloneOutput::Junk { multiplicity } => *multiplicity,
        }
    }
}
