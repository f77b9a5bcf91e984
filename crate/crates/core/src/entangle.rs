//! Shared entangled state and Alice's remote preparation of Bob's ensembles.
//!
//! Alice and Bob share `(1/√N) Σₙ |n⟩_A ⊗ |Bₙ⟩`. Measuring Alice's half in the
//! computational basis (setting A1) leaves Bob with one of the `|Bₙ⟩`; any
//! other orthonormal basis (setting A2) leaves him with states that are linear
//! combinations of them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::measure::{check_orthonormal_basis, measure_subsystem};
use crate::qcore::operator::{partial_trace, rank, HermitianOperator, Subsystem};
use crate::qcore::{inner_product, Ensemble, Ket, SeededRng};

/// Residual allowed when checking that a target lies in the span of Bob's states.
pub const SPAN_TOL: f64 = 1e-9;

/// Alice's two measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    A1,
    A2,
}

impl Setting {
    /// The bit Alice encodes by choosing this setting.
    pub fn bit(self) -> u8 {
        match self {
            Setting::A1 => 0,
            Setting::A2 => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Setting::A1
        } else {
            Setting::A2
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharedState {
    joint: Ket,
    bob_states: Vec<Ket>,
}

impl SharedState {
    pub fn joint(&self) -> &Ket {
        &self.joint
    }

    pub fn bob_states(&self) -> &[Ket] {
        &self.bob_states
    }

    pub fn alice_dim(&self) -> usize {
        self.bob_states.len()
    }

    /// Bob's reduced density matrix, obtained by tracing out Alice.
    pub fn bob_marginal(&self) -> HermitianOperator {
        let n = self.alice_dim();
        partial_trace(&HermitianOperator::projector(&self.joint), (n, n), Subsystem::B)
            .expect("joint state is N x N by construction")
    }
}

/// An orthonormal basis for Alice's measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceBasis {
    vectors: Vec<Ket>,
    setting: Setting,
}

impl AliceBasis {
    /// The computational basis `|n⟩_A`, i.e. setting A1.
    pub fn computational(n: usize) -> Self {
        Self {
            vectors: (0..n).map(|k| Ket::basis(n, k).expect("k < n")).collect(),
            setting: Setting::A1,
        }
    }

    /// Discrete Fourier basis `aₘ[n] = exp(2πi·mn/N)/√N`, the default A2.
    pub fn fourier(n: usize) -> Self {
        let scale = 1.0 / (n as f64).sqrt();
        let vectors = (0..n)
            .map(|m| {
                let amps = (0..n)
                    .map(|k| {
                        let angle = 2.0 * std::f64::consts::PI * (m * k % n) as f64 / n as f64;
                        Complex64::from_polar(scale, angle)
                    })
                    .collect();
                Ket::from_amplitudes(amps).expect("n > 0")
            })
            .collect();
        Self {
            vectors,
            setting: Setting::A2,
        }
    }

    /// An arbitrary orthonormal basis used as setting A2.
    pub fn custom(vectors: Vec<Ket>) -> Result<Self> {
        let n = vectors.len();
        check_orthonormal_basis(&vectors, n)?;
        Ok(Self {
            vectors,
            setting: Setting::A2,
        })
    }

    pub fn vectors(&self) -> &[Ket] {
        &self.vectors
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Builds `(1/√N) Σₙ |n⟩_A ⊗ |Bₙ⟩` from `N ≥ 2` normalized states of dimension `N`.
pub fn build_shared_state(bob_states: &[Ket]) -> Result<SharedState> {
    let n = bob_states.len();
    if n < 2 {
        return Err(Error::Dimension(format!("need at least 2 Bob states, got {n}")));
    }
    if let Some(bad) = bob_states.iter().find(|b| b.dim() != n) {
        return Err(Error::Dimension(format!(
            "Bob states must have dimension {n}, got {}",
            bad.dim()
        )));
    }
    let bob_states: Vec<Ket> = bob_states
        .iter()
        .map(|b| b.clone().normalize())
        .collect::<Result<_>>()?;
    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let amps = bob_states
        .iter()
        .flat_map(|b| b.amplitudes().iter().map(move |&x| x * scale))
        .collect();
    Ok(SharedState {
        joint: Ket::from_amplitudes(amps)?,
        bob_states,
    })
}

fn check_basis_dim(shared: &SharedState, basis: &AliceBasis) -> Result<()> {
    if basis.dim() != shared.alice_dim() {
        return Err(Error::Basis(format!(
            "basis of dimension {} for an Alice space of dimension {}",
            basis.dim(),
            shared.alice_dim()
        )));
    }
    Ok(())
}

/// Unnormalized Bob states `Σₙ ⟨aₘ|n⟩ |Bₙ⟩`, one per basis vector.
fn induced_branches(bob_states: &[Ket], basis: &AliceBasis) -> Result<Vec<Ket>> {
    basis
        .vectors()
        .iter()
        .map(|a| {
            let mut acc = Ket::from_amplitudes(vec![Complex64::new(0.0, 0.0); bob_states[0].dim()])?;
            for (coef, b) in a.amplitudes().iter().zip(bob_states) {
                acc = acc.add_scaled(b, coef.conj())?;
            }
            Ok(acc)
        })
        .collect()
}

/// The ensemble Bob holds after Alice measures in `basis`, computed analytically.
///
/// Member `m` has probability `‖Σₙ ⟨aₘ|n⟩|Bₙ⟩‖²/N`. Setting A1 returns the
/// Bob states themselves with weight `1/N`. A member with zero probability
/// (possible only when the Bob states are dependent) carries `|B₁⟩` as a
/// placeholder state.
pub fn induced_ensemble(shared: &SharedState, basis: &AliceBasis) -> Result<Ensemble> {
    check_basis_dim(shared, basis)?;
    let n = shared.alice_dim();
    if basis.setting() == Setting::A1 {
        let p = 1.0 / n as f64;
        return Ensemble::new(shared.bob_states.iter().map(|b| (b.clone(), p)).collect());
    }
    let branches = induced_branches(&shared.bob_states, basis)?;
    let raw: Vec<f64> = branches.iter().map(|b| b.norm_sqr() / n as f64).collect();
    // Rounding can push the total a few ulps off one.
    let total: f64 = raw.iter().sum();
    let members = branches
        .into_iter()
        .zip(raw)
        .map(|(branch, p)| {
            let state = branch.normalize().unwrap_or_else(|_| shared.bob_states[0].clone());
            (state, p / total)
        })
        .collect();
    Ensemble::new(members)
}

/// Samples Alice's measurement on the joint state and returns her outcome with
/// Bob's normalized conditional state.
pub fn alice_measure(shared: &SharedState, basis: &AliceBasis, rng: &mut SeededRng) -> Result<(usize, Ket)> {
    check_basis_dim(shared, basis)?;
    let n = shared.alice_dim();
    measure_subsystem(&shared.joint, (n, n), basis.vectors(), rng)
}

/// Finds an A2 basis whose first outcome prepares `target` for Bob.
///
/// Solves `Σₙ cₙ|Bₙ⟩ = target`, sets `a₁ = conj(c)/‖c‖` and completes the basis
/// by modified Gram–Schmidt over the computational vectors in order.
pub fn target_to_basis(target: &Ket, bob_states: &[Ket]) -> Result<AliceBasis> {
    let n = bob_states.len();
    if n == 0 {
        return Err(Error::EmptyInput("no Bob states"));
    }
    if target.dim() != bob_states[0].dim() {
        return Err(Error::Dimension(format!(
            "target of dimension {} for Bob states of dimension {}",
            target.dim(),
            bob_states[0].dim()
        )));
    }
    let r = rank(bob_states)?;
    if r < n {
        return Err(Error::Rank { rank: r, expected: n });
    }
    let dim = target.dim();
    let b = DMatrix::from_fn(dim, n, |i, j| bob_states[j].amplitudes()[i]);
    // Least squares via the normal equations; exact when target is in the span.
    let gram = b.adjoint() * &b;
    let rhs = b.adjoint() * target.to_dvector();
    let coeffs = gram.lu().solve(&rhs).ok_or(Error::Rank { rank: r, expected: n })?;
    let residual = (&b * &coeffs - target.to_dvector()).norm() / target.norm();
    if residual.is_nan() || residual > SPAN_TOL {
        return Err(Error::Span { residual });
    }
    let first = Ket::normalized(coeffs.iter().map(|c| c.conj()).collect())?;
    let mut vectors = vec![first];
    for k in 0..n {
        if vectors.len() == n {
            break;
        }
        let mut v = Ket::basis(n, k)?;
        for u in &vectors {
            let proj = inner_product(u, &v)?;
            v = v.add_scaled(u, -proj)?;
        }
        if v.norm() > 1e-8 {
            vectors.push(v.normalize()?);
        }
    }
    AliceBasis::custom(vectors)
}
