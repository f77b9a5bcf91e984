use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::operator::{gram_matrix, rank_of_spectrum, HermitianOperator};
use crate::qcore::{Ket, RANK_TOL};

pub const DEFAULT_GAMMA_TOL: f64 = 1e-9;

/// Gram matrix of a state list after checking it has full rank.
pub(crate) fn independent_gram(states: &[Ket]) -> Result<HermitianOperator> {
    let gram = gram_matrix(states)?;
    let r = rank_of_spectrum(&gram.eigenvalues(), RANK_TOL);
    if r < states.len() {
        return Err(Error::Rank {
            rank: r,
            expected: states.len(),
        });
    }
    Ok(gram)
}

pub(crate) fn entrywise_power(m: &HermitianOperator, copies: usize) -> DMatrix<Complex64> {
    m.entries().map(|z| z.powu(copies as u32))
}

pub(crate) fn check_copies(copies: usize) -> Result<()> {
    if copies < 2 {
        return Err(Error::Config(format!("copy count must be at least 2, got {copies}")));
    }
    Ok(())
}

pub(crate) fn check_gammas(gammas: &[f64], k: usize) -> Result<()> {
    if gammas.len() != k {
        return Err(Error::Config(format!("{} efficiencies for {k} states", gammas.len())));
    }
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::Config(format!("efficiency {g} outside [0, 1]")));
    }
    Ok(())
}

pub(crate) fn feasibility_from_gram(
    gram: &HermitianOperator,
    copies: usize,
    gammas: &[f64],
) -> Result<HermitianOperator> {
    let k = gram.dim();
    let power = entrywise_power(gram, copies);
    let roots: Vec<f64> = gammas.iter().map(|g| g.sqrt()).collect();
    let m = DMatrix::from_fn(k, k, |i, j| gram.get(i, j) - power[(i, j)] * (roots[i] * roots[j]));
    HermitianOperator::new(m)
}

/// `X - D X⁽ᴹ⁾ D` with `Xᵢⱼ = ⟨Bᵢ|Bⱼ⟩`, `X⁽ᴹ⁾ᵢⱼ = Xᵢⱼᴹ` and `D = diag(√γᵢ)`.
///
/// Positive semidefinite exactly when a heralded `1 → M` cloner with
/// efficiencies `γ` exists for the given independent states.
pub fn feasibility_matrix(states: &[Ket], copies: usize, gammas: &[f64]) -> Result<HermitianOperator> {
    check_copies(copies)?;
    check_gammas(gammas, states.len())?;
    let gram = independent_gram(states)?;
    feasibility_from_gram(&gram, copies, gammas)
}

/// Largest uniform efficiency for which the feasibility matrix is PSD.
///
/// The feasibility matrix is `X - γ X⁽ᴹ⁾` and `X⁽ᴹ⁾ ⪰ 0`, so feasibility is
/// monotone in `γ` and bisection on `[0, 1]` converges to the boundary. The
/// bracket test uses the exact sign of the minimum eigenvalue, so the returned
/// value (the feasible end of the final bracket) is constructible.
pub fn max_uniform_gamma(states: &[Ket], copies: usize, tol: f64) -> Result<f64> {
    check_copies(copies)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let gram = independent_gram(states)?;
    let k = states.len();
    let feasible =
        |g: f64| -> Result<bool> { Ok(feasibility_from_gram(&gram, copies, &vec![g; k])?.min_eigenvalue() >= 0.0) };
    if feasible(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::qcore::PSD_TOL;

    fn pair(s: f64) -> Vec<Ket> {
        vec![
            Ket::basis(2, 0).unwrap(),
            Ket::from_real(&[s, (1.0 - s * s).sqrt()]).unwrap(),
        ]
    }

    /// Smallest uniform γ at which the 2x2 min eigenvalue turns negative,
    /// found by bisecting the eigenvalue directly (no PSD tolerance).
    fn eigen_bisection(s: f64, m: usize) -> f64 {
        let min_eig = |g: f64| {
            let off = s - g * s.powi(m as i32);
            let diag = 1.0 - g;
            HermitianOperator::from_real_rows(&[&[diag, off], &[off, diag]])
                .unwrap()
                .min_eigenvalue()
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if min_eig(mid) >= 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        lo
    }

    #[test]
    fn orthogonal_states_at_unit_efficiency() {
        let states = pair(0.0);
        let f = feasibility_matrix(&states, 2, &[1.0, 1.0]).unwrap();
        assert!(f.frobenius_norm() < 1e-15);
        assert!(f.is_psd(PSD_TOL));
        assert_eq!(max_uniform_gamma(&states, 3, DEFAULT_GAMMA_TOL).unwrap(), 1.0);
    }

    #[test]
    fn two_state_matrix_form() {
        let (s, g, m) = (0.6, 0.3, 3);
        let f = feasibility_matrix(&pair(s), m, &[g, g]).unwrap();
        let off = s - g * s.powi(3);
        assert!((f.get(0, 0).re - (1.0 - g)).abs() < 1e-14);
        assert!((f.get(1, 1).re - (1.0 - g)).abs() < 1e-14);
        assert!((f.get(0, 1).re - off).abs() < 1e-14);
        assert!((f.get(1, 0).re - off).abs() < 1e-14);
    }

    #[test]
    fn boundary_eigenvalue_vanishes() {
        let s = 0.70710678;
        let g = eigen_bisection(s, 2);
        assert!((g - 0.585786).abs() < 1e-6);
        let f = feasibility_matrix(&pair(s), 2, &[0.585786, 0.585786]).unwrap();
        assert!(f.min_eigenvalue().abs() < 1e-6);
    }

    #[test]
    fn max_gamma_matches_eigen_oracle() {
        let s = 0.70710678;
        let g = max_uniform_gamma(&pair(s), 2, DEFAULT_GAMMA_TOL).unwrap();
        assert!((g - 0.58578644).abs() < 1e-6, "{g}");
        assert!((g - eigen_bisection(s, 2)).abs() < 1e-6);
    }

    #[test]
    fn nearly_parallel_pair_tends_to_one_over_m() {
        // (1-s)/(1-s^M) → 1/M as s → 1; for M = 2 that is 1/(1+s).
        let s = 0.9999;
        let g = max_uniform_gamma(&pair(s), 2, DEFAULT_GAMMA_TOL).unwrap();
        assert!((g - eigen_bisection(s, 2)).abs() < 1e-6);
        assert!((g - 1.0 / (1.0 + s)).abs() < 1e-6, "{g}");
    }

    #[test]
    fn dependent_states_raise_rank_error() {
        let states = vec![Ket::basis(2, 0).unwrap(), Ket::plus(), Ket::basis(2, 1).unwrap()];
        assert!(matches!(
            feasibility_matrix(&states, 2, &[0.5; 3]),
            Err(Error::Rank { rank: 2, expected: 3 })
        ));
        assert!(matches!(max_uniform_gamma(&states, 2, 1e-9), Err(Error::Rank { .. })));
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(
            feasibility_matrix(&pair(0.5), 1, &[0.5, 0.5]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            feasibility_matrix(&pair(0.5), 2, &[0.5]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            feasibility_matrix(&pair(0.5), 2, &[0.5, 1.5]),
            Err(Error::Config(_))
        ));
    }
}
