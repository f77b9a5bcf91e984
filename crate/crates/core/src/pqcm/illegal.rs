use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CloneOutput, CopyRecord};
use crate::error::{Error, Result};
use crate::qcore::{Ket, SeededRng};

/// Output of the illegal cloner for one unclonable input:
/// `Σₗ cₗ |B_l⟩^{⊗μ} + d |φ⟩`, with `φ` orthogonal to every candidate product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCoefficients {
    /// One coefficient per clonable label, in label order.
    pub copies: Vec<Complex64>,
    pub junk: Complex64,
}

impl BranchCoefficients {
    /// `d = 1`: the whole output is orthogonal junk.
    pub fn junk_only(branches: usize) -> Self {
        Self {
            copies: vec![Complex64::new(0.0, 0.0); branches],
            junk: Complex64::new(1.0, 0.0),
        }
    }

    fn weights(&self) -> Vec<f64> {
        self.copies
            .iter()
            .chain(std::iter::once(&self.junk))
            .map(|c| c.norm_sqr())
            .collect()
    }
}

/// A label-aware cloner for `N + 1` linearly dependent states.
///
/// Labels `0..N` are the A1 preparations `|B₁⟩…|B_N⟩`; labels `N..2N` the A2
/// preparations. The clonable set is all A1 labels plus exactly one A2 label.
/// No physical operation can do this, which is the point: the machine reads
/// the preparation label rather than the quantum state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllegalClonerSpec {
    n: usize,
    clonable_labels: Vec<usize>,
    copies: usize,
    unclonable_output: BTreeMap<usize, BranchCoefficients>,
}

impl IllegalClonerSpec {
    /// `clonable_labels` are zero-based and must be `{0, …, N-1}` plus one
    /// label in `N..2N`; order does not matter.
    pub fn new(n: usize, clonable_labels: &[usize], copies: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("need N >= 2, got {n}")));
        }
        if copies == 0 {
            return Err(Error::Config("copy count must be positive".into()));
        }
        let mut labels = clonable_labels.to_vec();
        labels.sort_unstable();
        labels.dedup();
        if let Some(&bad) = labels.iter().find(|&&l| l >= 2 * n) {
            return Err(Error::Label {
                label: bad + 1,
                max: 2 * n,
            });
        }
        let a1_ok = (0..n).all(|l| labels.contains(&l));
        if labels.len() != n + 1 || !a1_ok {
            return Err(Error::Config(format!(
                "clonable labels must be 1..={n} plus one label in {}..={}",
                n + 1,
                2 * n
            )));
        }
        Ok(Self {
            n,
            clonable_labels: labels,
            copies,
            unclonable_output: BTreeMap::new(),
        })
    }

    /// Default setup: clones `|B₁⟩…|B_{N+1}⟩`.
    pub fn standard(n: usize, copies: usize) -> Result<Self> {
        Self::new(n, &(0..=n).collect::<Vec<_>>(), copies)
    }

    /// Overrides the output coefficients for one unclonable label.
    pub fn with_output(mut self, label: usize, coefficients: BranchCoefficients) -> Result<Self> {
        if label >= 2 * self.n {
            return Err(Error::Label {
                label: label + 1,
                max: 2 * self.n,
            });
        }
        if self.clonable_labels.contains(&label) {
            return Err(Error::Config(format!("label {} is clonable", label + 1)));
        }
        if coefficients.copies.len() != self.n + 1 {
            return Err(Error::Config(format!(
                "{} branch coefficients for {} clonable states",
                coefficients.copies.len(),
                self.n + 1
            )));
        }
        let total: f64 = coefficients.weights().iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("branch weights sum to {total}")));
        }
        self.unclonable_output.insert(label, coefficients);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clonable_labels(&self) -> &[usize] {
        &self.clonable_labels
    }

    /// The one clonable A2 label.
    pub fn a2_label(&self) -> usize {
        self.clonable_labels[self.n]
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn output_for(&self, label: usize) -> BranchCoefficients {
        self.unclonable_output
            .get(&label)
            .cloned()
            .unwrap_or_else(|| BranchCoefficients::junk_only(self.n + 1))
    }

    pub fn unclonable_outputs(&self) -> &BTreeMap<usize, BranchCoefficients> {
        &self.unclonable_output
    }
}

/// Runs the illegal cloner on the preparation `input_label` (zero-based).
///
/// Clonable labels always yield `μ` exact copies. Other labels yield one
/// branch of their output decomposition, sampled with weight `|cₗ|²` for
/// copies of clonable state `l` and `|d|²` for the junk marker.
pub fn illegal_clone(
    spec: &IllegalClonerSpec,
    input_label: usize,
    all_states: &[Ket],
    rng: &mut SeededRng,
) -> Result<CloneOutput> {
    let max = 2 * spec.n;
    if all_states.len() != max {
        return Err(Error::Config(format!(
            "{} preparation states for N = {}",
            all_states.len(),
            spec.n
        )));
    }
    if input_label >= max {
        return Err(Error::Label {
            label: input_label + 1,
            max,
        });
    }
    let copy_of = |label: usize| {
        CloneOutput::Copies(CopyRecord {
            label,
            state: all_states[label].clone(),
            multiplicity: spec.copies,
        })
    };
    if spec.clonable_labels.contains(&input_label) {
        return Ok(copy_of(input_label));
    }
    let branches = spec.output_for(input_label);
    let pick = rng.sample_index(&branches.weights());
    if pick < spec.clonable_labels.len() {
        Ok(copy_of(spec.clonable_labels[pick]))
    } else {
        Ok(CloneOutput::Junk {
            multiplicity: spec.copies,
        })
    }
}
