use nalgebra::DMatrix;
use num_complex::Complex64;

use super::feasibility::{check_copies, check_gammas, entrywise_power, feasibility_from_gram, independent_gram};
use super::{CloneOutput, CopyRecord, CopySuperposition};
use crate::error::{Error, Result};
use crate::qcore::ket::{checked_pow, tensor_power};
use crate::qcore::{HermitianOperator, Ket, SeededRng, PSD_TOL};

/// Tolerance on the clone-action and completeness residuals.
pub const MACHINE_TOL: f64 = 1e-9;
/// Largest accepted condition number of the clonable-state matrix.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Verification residuals recorded when a machine is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineResiduals {
    /// `maxᵢ ‖A|Bᵢ⟩ - √γᵢ |Bᵢ⟩^{⊗M}‖`.
    pub clone_action: f64,
    /// `‖A†A + F†F - I‖_F`.
    pub trace_preservation: f64,
}

/// Heralded `1 → M` cloner as a success/failure Kraus pair `(A, F)`.
///
/// `A = C·D·X⁻¹·B†` where `B` holds the clonable states as columns, `C` their
/// `M`-fold tensor powers and `D = diag(√γ)`. `A` is stored through its
/// coefficient map `D·X⁻¹·B†` (output amplitudes on the `|Bᵢ⟩^{⊗M}`), so the
/// `N^M`-dimensional matrix is only formed on request. `F = √(I - A†A)`.
#[derive(Debug, Clone)]
pub struct PqcmMachine {
    clonable: Vec<Ket>,
    copies: usize,
    gammas: Vec<f64>,
    coefficient_map: DMatrix<Complex64>,
    copy_gram: DMatrix<Complex64>,
    kraus_fail: DMatrix<Complex64>,
    residuals: MachineResiduals,
}

impl PqcmMachine {
    pub fn clonable(&self) -> &[Ket] {
        &self.clonable
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Input dimension `N`.
    pub fn input_dim(&self) -> usize {
        self.clonable[0].dim()
    }

    pub fn residuals(&self) -> MachineResiduals {
        self.residuals
    }

    pub fn kraus_fail(&self) -> &DMatrix<Complex64> {
        &self.kraus_fail
    }

    /// `K x N` map from an input to its amplitudes on the `|Bᵢ⟩^{⊗M}`.
    pub fn coefficient_map(&self) -> &DMatrix<Complex64> {
        &self.coefficient_map
    }

    /// `A†A`, computed as `map† · X⁽ᴹ⁾ · map` without forming `A`.
    pub fn success_effect(&self) -> DMatrix<Complex64> {
        self.coefficient_map.adjoint() * &self.copy_gram * &self.coefficient_map
    }

    /// The `N^M x N` success operator. Fails when `N^M` exceeds `MAX_DIM`.
    pub fn kraus_success(&self) -> Result<DMatrix<Complex64>> {
        let out_dim = checked_pow(self.input_dim(), self.copies)?;
        let powers = self
            .clonable
            .iter()
            .map(|b| tensor_power(b, self.copies))
            .collect::<Result<Vec<_>>>()?;
        let c = DMatrix::from_fn(out_dim, powers.len(), |i, j| powers[j].amplitudes()[i]);
        Ok(c * &self.coefficient_map)
    }

    /// `‖A|ψ⟩‖²`.
    pub fn success_probability(&self, input: &Ket) -> Result<f64> {
        let a = self.coefficients(input)?;
        Ok(quadratic_form(&self.copy_gram, &a).clamp(0.0, 1.0))
    }

    fn coefficients(&self, input: &Ket) -> Result<Vec<Complex64>> {
        if input.dim() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "machine input has dimension {}, got {}",
                self.input_dim(),
                input.dim()
            )));
        }
        Ok((&self.coefficient_map * input.to_dvector()).iter().copied().collect())
    }

    /// Index of the clonable state equal to `input` up to global phase.
    pub fn clonable_index(&self, input: &Ket) -> Option<usize> {
        self.clonable.iter().position(|b| {
            b.dim() == input.dim() && (b.fidelity_amplitude(input).unwrap_or(0.0) - 1.0).abs() <= MACHINE_TOL
        })
    }
}

fn quadratic_form(m: &DMatrix<Complex64>, v: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, vi) in v.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            acc += vi.conj() * m[(i, j)] * vj;
        }
    }
    acc.re
}

/// Builds and verifies the Kraus pair for independent states and feasible
/// efficiencies. Fewer states than the input dimension are handled by
/// sending the orthogonal complement of their span to the failure branch.
pub fn construct_machine(states: &[Ket], copies: usize, gammas: &[f64]) -> Result<PqcmMachine> {
    check_copies(copies)?;
    check_gammas(gammas, states.len())?;
    let gram = independent_gram(states)?;
    let spectrum = gram.eigh();
    let (lo, hi) = (spectrum.values[0], *spectrum.values.last().unwrap());
    let condition = (hi / lo).sqrt();
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(Error::Conditioning { condition });
    }
    let feas = feasibility_from_gram(&gram, copies, gammas)?;
    let min_eigenvalue = feas.min_eigenvalue();
    if min_eigenvalue < -PSD_TOL {
        return Err(Error::Feasibility { min_eigenvalue });
    }

    let k = states.len();
    let n = states[0].dim();
    let inv_values: Vec<f64> = spectrum.values.iter().map(|v| 1.0 / v).collect();
    let v = &spectrum.vectors;
    let gram_inv = DMatrix::from_fn(k, k, |i, j| v[(i, j)] * inv_values[j]) * v.adjoint();
    let b = DMatrix::from_fn(n, k, |i, j| states[j].amplitudes()[i]);
    let roots = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            Complex64::new(gammas[i].sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let coefficient_map = roots * gram_inv * b.adjoint();
    let copy_gram = entrywise_power(&gram, copies);

    let success_effect = coefficient_map.adjoint() * &copy_gram * &coefficient_map;
    let remainder = HermitianOperator::new(DMatrix::identity(n, n) - &success_effect)?;
    let kraus_fail = remainder.sqrt_psd()?.into_entries();

    let mut clone_action = 0.0f64;
    for (i, state) in states.iter().enumerate() {
        let mut err: Vec<Complex64> = (&coefficient_map * state.to_dvector()).iter().copied().collect();
        err[i] -= Complex64::new(gammas[i].sqrt(), 0.0);
        clone_action = clone_action.max(quadratic_form(&copy_gram, &err).max(0.0).sqrt());
    }
    let completeness = &success_effect + kraus_fail.adjoint() * &kraus_fail - DMatrix::identity(n, n);
    let residuals = MachineResiduals {
        clone_action,
        trace_preservation: completeness.norm(),
    };
    if !(residuals.clone_action <= MACHINE_TOL && residuals.trace_preservation <= MACHINE_TOL) {
        return Err(Error::Conditioning { condition });
    }

    Ok(PqcmMachine {
        clonable: states.to_vec(),
        copies,
        gammas: gammas.to_vec(),
        coefficient_map,
        copy_gram,
        kraus_fail,
        residuals,
    })
}

/// Result of one application of a machine with the structured output.
#[derive(Debug, Clone, PartialEq)]
pub enum MachineOutcome {
    Success(CloneOutput),
    /// Normalized `F|ψ⟩`, kept in the input space.
    Failure(Ket),
}

impl MachineOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, MachineOutcome::Success(_))
    }
}

/// Runs the machine on `input` without materializing the `N^M` output.
///
/// On success the output is `Σᵢ aᵢ |Bᵢ⟩^{⊗M}`; when only one coefficient is
/// nonzero (the input was a clonable state) it is reported as exact copies.
pub fn apply_structured(machine: &PqcmMachine, input: &Ket, rng: &mut SeededRng) -> Result<MachineOutcome> {
    let a = machine.coefficients(input)?;
    let p = quadratic_form(&machine.copy_gram, &a).clamp(0.0, 1.0);
    if rng.bernoulli(p) {
        let largest = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let significant: Vec<usize> = (0..a.len()).filter(|&i| a[i].norm() > 1e-12 * largest).collect();
        let m = machine.copies;
        let out = if let [only] = significant[..] {
            CloneOutput::Copies(CopyRecord {
                label: only,
                state: machine.clonable[only].clone(),
                multiplicity: m,
            })
        } else {
            CloneOutput::Superposition(CopySuperposition {
                terms: significant
                    .iter()
                    .map(|&i| (machine.clonable[i].clone(), a[i]))
                    .collect(),
                multiplicity: m,
            })
        };
        Ok(MachineOutcome::Success(out))
    } else {
        Ok(MachineOutcome::Failure(failure_state(machine, input)?))
    }
}

fn failure_state(machine: &PqcmMachine, input: &Ket) -> Result<Ket> {
    Ket::from_dvector(&(&machine.kraus_fail * input.to_dvector()))?.normalize()
}

/// Runs the machine on `input` and returns the heralded flag with the
/// normalized output: `A|ψ⟩` (dimension `N^M`) on success, `F|ψ⟩` on failure.
pub fn apply_machine(machine: &PqcmMachine, input: &Ket, rng: &mut SeededRng) -> Result<(bool, Ket)> {
    let a = machine.coefficients(input)?;
    let p = quadratic_form(&machine.copy_gram, &a).clamp(0.0, 1.0);
    if rng.bernoulli(p) {
        let out = machine.kraus_success()? * input.to_dvector();
        Ok((true, Ket::from_dvector(&out)?.normalize()?))
    } else {
        Ok((false, failure_state(machine, input)?))
    }
}

/// Outcome of growing one clonable state to `μ` copies.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplifyOutcome {
    Success(CopyRecord),
    Failure { applications: usize },
}

/// Grows a clonable state to `target_copies` exact copies by repeated `1 → 2`
/// cloning of one copy; each success adds one copy and any failure aborts.
pub fn amplify(
    machine_1to2: &PqcmMachine,
    input: &Ket,
    target_copies: usize,
    rng: &mut SeededRng,
) -> Result<AmplifyOutcome> {
    if machine_1to2.copies() != 2 {
        return Err(Error::Config(format!(
            "amplification needs a 1 -> 2 machine, got 1 -> {}",
            machine_1to2.copies()
        )));
    }
    if target_copies == 0 {
        return Err(Error::Config("target copy count must be positive".into()));
    }
    let index = machine_1to2.clonable_index(input).ok_or_else(|| {
        Error::UnsupportedInput("amplification is defined only for the machine's clonable states".into())
    })?;
    let state = &machine_1to2.clonable[index];
    for step in 1..target_copies {
        if !apply_structured(machine_1to2, state, rng)?.is_success() {
            return Ok(AmplifyOutcome::Failure { applications: step });
        }
    }
    Ok(AmplifyOutcome::Success(CopyRecord {
        label: index,
        state: state.clone(),
        multiplicity: target_copies,
    }))
}
