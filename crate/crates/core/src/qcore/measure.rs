use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::ket::{inner_product, Ket};
use crate::qcore::rng::SeededRng;

/// Orthonormality tolerance for measurement bases.
pub const BASIS_TOL: f64 = 1e-9;

/// Checks that `basis` is a complete orthonormal basis of dimension `dim`.
pub fn check_orthonormal_basis(basis: &[Ket], dim: usize) -> Result<()> {
    if basis.len() != dim {
        return Err(Error::Basis(format!(
            "{} vectors cannot span dimension {dim}",
            basis.len()
        )));
    }
    for (i, a) in basis.iter().enumerate() {
        if a.dim() != dim {
            return Err(Error::Basis(format!("basis vector {i} has dimension {}", a.dim())));
        }
        for (j, b) in basis.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            let ip = inner_product(a, b)?;
            if (ip - Complex64::new(expected, 0.0)).norm() > BASIS_TOL {
                return Err(Error::Basis(format!("⟨b{i}|b{j}⟩ = {ip} deviates from {expected}")));
            }
        }
    }
    Ok(())
}

/// Exact outcome probabilities `|⟨basis_k|state⟩|²`.
pub fn born_probabilities(state: &Ket, basis: &[Ket]) -> Result<Vec<f64>> {
    check_orthonormal_basis(basis, state.dim())?;
    basis.iter().map(|b| Ok(inner_product(b, state)?.norm_sqr())).collect()
}

/// Projective measurement of `state` in an orthonormal basis.
///
/// Returns the sampled outcome and the post-measurement state, which is the
/// chosen basis vector.
pub fn born_measure(state: &Ket, basis: &[Ket], rng: &mut SeededRng) -> Result<(usize, Ket)> {
    let probs = born_probabilities(state, basis)?;
    let k = rng.sample_index(&probs);
    Ok((k, basis[k].clone()))
}

/// Measures the first factor of a bipartite pure state `C^dA ⊗ C^dB` in the
/// given basis and returns the outcome with the normalized conditional state
/// of the second factor.
pub fn measure_subsystem(
    joint: &Ket,
    dims: (usize, usize),
    basis_a: &[Ket],
    rng: &mut SeededRng,
) -> Result<(usize, Ket)> {
    let branches = conditional_branches(joint, dims, basis_a)?;
    let weights: Vec<f64> = branches.iter().map(Ket::norm_sqr).collect();
    let k = rng.sample_index(&weights);
    let post = branches[k].clone().normalize()?;
    Ok((k, post))
}

/// Unnormalized conditional B-states `(⟨a_k| ⊗ I)|joint⟩`; their squared
/// norms are the outcome probabilities.
pub fn conditional_branches(joint: &Ket, dims: (usize, usize), basis_a: &[Ket]) -> Result<Vec<Ket>> {
    let (da, db) = dims;
    if da.checked_mul(db) != Some(joint.dim()) {
        return Err(Error::Dimension(format!(
            "joint dimension {} is not {da}x{db}",
            joint.dim()
        )));
    }
    check_orthonormal_basis(basis_a, da)?;
    let amps = joint.amplitudes();
    basis_a
        .iter()
        .map(|a| {
            let cond: Vec<Complex64> = (0..db)
                .map(|j| (0..da).map(|i| a.amplitudes()[i].conj() * amps[i * db + j]).sum())
                .collect();
            Ket::from_amplitudes(cond)
        })
        .collect()
}
