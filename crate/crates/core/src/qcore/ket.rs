use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{MAX_DIM, NORM_TOL};

/// A pure state as a dense vector of complex amplitudes.
///
/// Constructors named `normalized` rescale to unit norm; [`Ket::from_amplitudes`]
/// keeps the amplitudes as given, which is how unnormalized intermediate
/// vectors (induced Bob states before renormalization, Kraus images) are held.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyInput("ket needs at least one amplitude"));
        }
        if amplitudes.len() > MAX_DIM {
            return Err(Error::Capacity {
                requested: amplitudes.len(),
                limit: MAX_DIM,
            });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales the given amplitudes to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_amplitudes(amplitudes)?.normalize()
    }

    /// Builds a normalized ket from real amplitudes.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(amps)
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        Self::from_real(&[1.0, 1.0]).expect("nonzero")
    }

    /// `(|0⟩ - |1⟩)/√2`.
    pub fn minus() -> Self {
        Self::from_real(&[1.0, -1.0]).expect("nonzero")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalize(self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Dimension("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Ket, factor: Complex64) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + factor * b)
                .collect(),
        })
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Result<Self> {
        Self::from_amplitudes(v.iter().copied().collect())
    }

    /// `|⟨self|other⟩|`, which is 1 for states equal up to global phase.
    pub fn fidelity_amplitude(&self, other: &Ket) -> Result<f64> {
        Ok(inner_product(self, other)?.norm())
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.amplitudes.iter().map(|a| (a.re, a.im)))
            .finish()
    }
}

fn check_same_dim(a: &Ket, b: &Ket) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "kets of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `⟨a|b⟩ = Σ conj(aᵢ)·bᵢ`.
pub fn inner_product(a: &Ket, b: &Ket) -> Result<Complex64> {
    check_same_dim(a, b)?;
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// Kronecker product; component `i * b.dim() + j` is `aᵢ·bⱼ`.
pub fn tensor(a: &Ket, b: &Ket) -> Result<Ket> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .filter(|&d| d <= MAX_DIM)
        .ok_or(Error::Capacity {
            requested: a.dim().saturating_mul(b.dim()),
            limit: MAX_DIM,
        })?;
    let mut amps = Vec::with_capacity(dim);
    for x in &a.amplitudes {
        amps.extend(b.amplitudes.iter().map(|y| x * y));
    }
    Ket::from_amplitudes(amps)
}

/// `|state⟩^{⊗copies}` materialized as one ket.
pub fn tensor_power(state: &Ket, copies: usize) -> Result<Ket> {
    if copies == 0 {
        return Err(Error::EmptyInput("tensor power needs at least one copy"));
    }
    checked_pow(state.dim(), copies)?;
    let mut out = state.clone();
    for _ in 1..copies {
        out = tensor(&out, state)?;
    }
    Ok(out)
}

/// `base^exp`, failing with [`Error::Capacity`] above [`MAX_DIM`].
pub fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).filter(|&d| d <= MAX_DIM).ok_or(Error::Capacity {
            requested: usize::MAX,
            limit: MAX_DIM,
        })?;
    }
    Ok(acc)
}
