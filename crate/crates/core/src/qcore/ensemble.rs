use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::ket::Ket;
use crate::qcore::operator::HermitianOperator;

/// Weighted list of pure states sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    members: Vec<(Ket, f64)>,
}

impl Ensemble {
    pub fn new(members: Vec<(Ket, f64)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or(Error::EmptyInput("ensemble needs at least one member"))?;
        let dim = first.0.dim();
        if members.iter().any(|(k, _)| k.dim() != dim) {
            return Err(Error::Dimension("ensemble members differ in dimension".into()));
        }
        if members.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Config("ensemble probability outside [0, 1]".into()));
        }
        let total: f64 = members.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("ensemble probabilities sum to {total}")));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(Ket, f64)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].0.dim()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.members.iter().map(|(_, p)| *p).collect()
    }

    pub fn states(&self) -> Vec<Ket> {
        self.members.iter().map(|(k, _)| k.clone()).collect()
    }

    /// `Σ pₘ |ψₘ⟩⟨ψₘ|`.
    pub fn density_matrix(&self) -> HermitianOperator {
        HermitianOperator::mixture(self.members.iter().map(|(k, p)| (k, *p)))
            .expect("members validated at construction")
    }
}
