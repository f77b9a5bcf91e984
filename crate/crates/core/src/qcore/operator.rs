use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::ket::{inner_product, Ket};
use crate::qcore::{HERM_TOL, PSD_TOL, RANK_TOL};

/// Dense complex square matrix that is Hermitian within [`HERM_TOL`].
///
/// Used for Gram matrices, density matrices, projectors and the cloning
/// feasibility matrix. The stored entries are symmetrized on construction so
/// downstream eigensolves see an exactly Hermitian input.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
}

/// Eigenvalues (ascending) with the matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::EmptyInput("operator of dimension 0"));
        }
        let deviation = hermiticity_deviation(&entries);
        if deviation.is_nan() || deviation > HERM_TOL {
            return Err(Error::Hermiticity { deviation });
        }
        let sym = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { entries: sym })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i].get(j).copied().unwrap_or(f64::NAN), 0.0)
        });
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            entries: DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// `|ket⟩⟨ket|`.
    pub fn projector(ket: &Ket) -> Self {
        let v = ket.to_dvector();
        Self {
            entries: &v * v.adjoint(),
        }
    }

    /// `Σ wᵢ |kᵢ⟩⟨kᵢ|` over a weighted list of equal-dimension kets.
    pub fn mixture<'a>(members: impl IntoIterator<Item = (&'a Ket, f64)>) -> Result<Self> {
        let mut acc: Option<DMatrix<Complex64>> = None;
        for (ket, weight) in members {
            let p = Self::projector(ket).entries * Complex64::new(weight, 0.0);
            acc = Some(match acc {
                None => p,
                Some(a) if a.nrows() == p.nrows() => a + p,
                Some(a) => {
                    return Err(Error::Dimension(format!(
                        "mixture members of dimension {} and {}",
                        a.nrows(),
                        p.nrows()
                    )))
                }
            });
        }
        let entries = acc.ok_or(Error::EmptyInput("mixture needs at least one member"))?;
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "operators of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            entries: &self.entries - &other.entries,
        })
    }

    /// `U·self·U†` for a square `U` of matching size.
    pub fn conjugate_by(&self, unitary: &DMatrix<Complex64>) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::Dimension("unitary size mismatch".into()));
        }
        Self::new(unitary * &self.entries * unitary.adjoint())
    }

    pub fn eigh(&self) -> Eigh {
        let eig = SymmetricEigen::new(self.entries.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        Eigh { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Principal square root of a PSD operator. Eigenvalues in `[-PSD_TOL, 0)`
    /// are clamped to zero; anything more negative is a feasibility error.
    pub fn sqrt_psd(&self) -> Result<Self> {
        let Eigh { values, vectors } = self.eigh();
        if values[0] < -PSD_TOL {
            return Err(Error::Feasibility {
                min_eigenvalue: values[0],
            });
        }
        let roots: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)).collect();
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, j| vectors[(i, j)] * roots[j]);
        Self::new(scaled * vectors.adjoint())
    }

    /// Trace 1 within 1e-10 and minimum eigenvalue at least -1e-9.
    pub fn is_density_matrix(&self) -> bool {
        (self.trace() - 1.0).abs() <= 1e-10 && self.is_psd(PSD_TOL)
    }
}

/// Largest `|mᵢⱼ - conj(mⱼᵢ)|`.
pub fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// Checks hermiticity of an arbitrary matrix and returns its ascending spectrum.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    Ok(HermitianOperator::new(m.clone())?.eigenvalues())
}

/// `Xᵢⱼ = ⟨stateᵢ|stateⱼ⟩`.
pub fn gram_matrix(states: &[Ket]) -> Result<HermitianOperator> {
    if states.is_empty() {
        return Err(Error::EmptyInput("gram matrix of an empty state list"));
    }
    let k = states.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = inner_product(&states[i], &states[j])?;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    HermitianOperator::new(m)
}

/// Number of Gram eigenvalues above `tol` times the largest one.
pub fn rank_with_tolerance(states: &[Ket], tol: f64) -> Result<usize> {
    let values = gram_matrix(states)?.eigenvalues();
    Ok(rank_of_spectrum(&values, tol))
}

pub fn rank(states: &[Ket]) -> Result<usize> {
    rank_with_tolerance(states, RANK_TOL)
}

pub(crate) fn rank_of_spectrum(values: &[f64], tol: f64) -> usize {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > tol * max).count()
}

pub fn is_psd(m: &HermitianOperator, tol: f64) -> bool {
    m.is_psd(tol)
}

/// Which factor of a bipartite operator to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Reduced operator on one factor of `C^dA ⊗ C^dB` (row-major, A slow).
pub fn partial_trace(rho: &HermitianOperator, dims: (usize, usize), keep: Subsystem) -> Result<HermitianOperator> {
    let (da, db) = dims;
    if da == 0 || db == 0 || da.checked_mul(db) != Some(rho.dim()) {
        return Err(Error::Dimension(format!(
            "cannot factor dimension {} as {}x{}",
            rho.dim(),
            da,
            db
        )));
    }
    let m = rho.entries();
    let out = match keep {
        Subsystem::B => DMatrix::from_fn(db, db, |j, jp| (0..da).map(|i| m[(i * db + j, i * db + jp)]).sum()),
        Subsystem::A => DMatrix::from_fn(da, da, |i, ip| (0..db).map(|j| m[(i * db + j, ip * db + j)]).sum()),
    };
    HermitianOperator::new(out)
}

/// `½ Σ |λ(rho - sigma)|`.
pub fn trace_distance(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let diff = rho.sub(sigma)?;
    Ok(0.5 * diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::qcore::ket::tensor;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gram_examples() {
        let zero = Ket::basis(2, 0).unwrap();
        let one = Ket::basis(2, 1).unwrap();
        let g = gram_matrix(&[zero.clone(), one]).unwrap();
        assert_eq!(g, HermitianOperator::identity(2));

        let g = gram_matrix(&[zero.clone(), Ket::plus()]).unwrap();
        assert_abs_diff_eq!(g.get(0, 1).re, 0.70710678, epsilon = 1e-8);
        assert_abs_diff_eq!(g.get(1, 0).re, 0.70710678, epsilon = 1e-8);
        assert_abs_diff_eq!(g.get(1, 1).re, 1.0, epsilon = 1e-15);

        let g = gram_matrix(&[zero.clone(), zero.clone()]).unwrap();
        assert!(g.entries().iter().all(|z| (z.re - 1.0).abs() < 1e-15));
        assert_eq!(rank(&[zero.clone(), zero]).unwrap(), 1);

        assert_eq!(
            gram_matrix(&[]),
            Err(Error::EmptyInput("gram matrix of an empty state list"))
        );
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(HermitianOperator::identity(2).eigenvalues(), vec![1.0, 1.0]);
        let ones = HermitianOperator::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let ev = ones.eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::Hermiticity { .. })));
    }

    #[test]
    fn rank_examples() {
        let zero = Ket::basis(2, 0).unwrap();
        let one = Ket::basis(2, 1).unwrap();
        assert_eq!(rank(&[zero.clone(), one.clone()]).unwrap(), 2);
        assert_eq!(rank(&[zero, Ket::plus(), one]).unwrap(), 2);
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&HermitianOperator::identity(3), PSD_TOL));
        assert!(!is_psd(&HermitianOperator::diagonal(&[1.0, -0.5]), PSD_TOL));
    }

    #[test]
    fn partial_trace_examples() {
        let zero = Ket::basis(2, 0).unwrap();
        let one = Ket::basis(2, 1).unwrap();
        let bell = tensor(&zero, &zero)
            .unwrap()
            .add_scaled(&tensor(&one, &one).unwrap(), Complex64::new(1.0, 0.0))
            .unwrap()
            .normalize()
            .unwrap();
        let rho_b = partial_trace(&HermitianOperator::projector(&bell), (2, 2), Subsystem::B).unwrap();
        let half = HermitianOperator::diagonal(&[0.5, 0.5]);
        assert!(trace_distance(&rho_b, &half).unwrap() < 1e-15);

        let product = tensor(&zero, &Ket::plus()).unwrap();
        let rho_b = partial_trace(&HermitianOperator::projector(&product), (2, 2), Subsystem::B).unwrap();
        let plus = HermitianOperator::projector(&Ket::plus());
        assert!(trace_distance(&rho_b, &plus).unwrap() < 1e-15);
        let rho_a = partial_trace(&HermitianOperator::projector(&product), (2, 2), Subsystem::A).unwrap();
        assert!(trace_distance(&rho_a, &HermitianOperator::projector(&zero)).unwrap() < 1e-15);

        assert!(matches!(
            partial_trace(&HermitianOperator::identity(4), (3, 2), Subsystem::B),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn trace_distance_examples() {
        let zero = HermitianOperator::projector(&Ket::basis(2, 0).unwrap());
        let one = HermitianOperator::projector(&Ket::basis(2, 1).unwrap());
        let plus = HermitianOperator::projector(&Ket::plus());
        assert_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
        assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-14);
        // |0⟩⟨0| - |+⟩⟨+| = [[1/2, -1/2], [-1/2, -1/2]] has eigenvalues ±1/√2.
        assert_abs_diff_eq!(trace_distance(&zero, &plus).unwrap(), 0.70710678, epsilon = 1e-8);
        assert!(trace_distance(&zero, &HermitianOperator::identity(3)).is_err());
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m = HermitianOperator::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let r = m.sqrt_psd().unwrap();
        let back = r.entries() * r.entries();
        assert!((back - m.entries()).norm() < 1e-12);
        assert!(HermitianOperator::diagonal(&[1.0, -0.1]).sqrt_psd().is_err());
    }
}
