use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pqcm::{CloneOutput, CopySuperposition};
use crate::qcore::ket::{checked_pow, tensor, tensor_power};
use crate::qcore::{inner_product, Ket, SeededRng};

/// Where Bob places his mark after verifying a batch of clones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Column {
    /// Zero-based candidate index; `N` is the A2 candidate.
    Candidate(usize),
    /// No group, or more than one group, passed.
    Phi,
}

impl Column {
    /// Position in a tally row with `groups` candidate columns followed by Φ.
    pub fn index(self, groups: usize) -> usize {
        match self {
            Column::Candidate(l) => l,
            Column::Phi => groups,
        }
    }
}

/// Splits `mu` clones into `groups` groups; the first `mu % groups` groups
/// take one extra clone.
pub fn group_sizes(mu: usize, groups: usize) -> Vec<usize> {
    let (base, extra) = (mu / groups, mu % groups);
    (0..groups).map(|l| base + usize::from(l < extra)).collect()
}

fn check_verify_args(clones: &CloneOutput, candidates: &[Ket], mu: usize) -> Result<()> {
    if candidates.len() < 2 {
        return Err(Error::Config("need at least two candidate states".into()));
    }
    if mu < candidates.len() {
        return Err(Error::Config(format!(
            "{mu} clones cannot fill {} groups",
            candidates.len()
        )));
    }
    if clones.multiplicity() != mu {
        return Err(Error::Config(format!(
            "clone record holds {} copies, expected {mu}",
            clones.multiplicity()
        )));
    }
    Ok(())
}

fn column_from_passes(passes: impl IntoIterator<Item = bool>) -> Column {
    let mut winner = None;
    for (l, ok) in passes.into_iter().enumerate() {
        if ok {
            if winner.is_some() {
                return Column::Phi;
            }
            winner = Some(l);
        }
    }
    winner.map_or(Column::Phi, Column::Candidate)
}

/// Bob's verification: group `l` of the clones is projected clone by clone
/// onto candidate `l`; the column is the unique group whose clones all pass,
/// otherwise Φ.
///
/// Product-form copies are measured clone by clone (a group stops at its
/// first failure, which does not change any group's pass probability).
/// Superpositions of copy products are sampled from their exact joint
/// distribution over group outcomes. Junk always lands in Φ.
pub fn group_verify(clones: &CloneOutput, candidates: &[Ket], mu: usize, rng: &mut SeededRng) -> Result<Column> {
    check_verify_args(clones, candidates, mu)?;
    let sizes = group_sizes(mu, candidates.len());
    match clones {
        CloneOutput::Junk { .. } => Ok(Column::Phi),
        CloneOutput::Copies(record) => {
            let mut passes = Vec::with_capacity(sizes.len());
            for (cand, &g) in candidates.iter().zip(&sizes) {
                let p = inner_product(cand, &record.state)?.norm_sqr();
                passes.push((0..g).all(|_| rng.bernoulli(p)));
            }
            Ok(column_from_passes(passes))
        }
        CloneOutput::Superposition(sup) => {
            let weights = pattern_distribution(sup, candidates, &sizes)?;
            let pattern = rng.sample_index(&weights);
            Ok(column_from_passes((0..sizes.len()).map(|l| pattern >> l & 1 == 1)))
        }
    }
}

/// Probability of every group pass/fail pattern (bit `l` set = group `l`
/// passed) for `Σᵢ cᵢ|sᵢ⟩^{⊗μ}`, normalized by the state's norm.
fn pattern_distribution(sup: &CopySuperposition, candidates: &[Ket], sizes: &[usize]) -> Result<Vec<f64>> {
    let t = sup.terms.len();
    let groups = sizes.len();
    // pass[l][i][j] = ⟨sᵢ^{⊗g}|P_l^{⊗g}|sⱼ^{⊗g}⟩, fail = overlap^g - pass.
    let mut pass = vec![vec![vec![Complex64::new(0.0, 0.0); t]; t]; groups];
    let mut fail = pass.clone();
    for (l, (cand, &g)) in candidates.iter().zip(sizes).enumerate() {
        for (i, (si, _)) in sup.terms.iter().enumerate() {
            for (j, (sj, _)) in sup.terms.iter().enumerate() {
                let through = inner_product(si, cand)? * inner_product(cand, sj)?;
                let p = through.powu(g as u32);
                pass[l][i][j] = p;
                fail[l][i][j] = inner_product(si, sj)?.powu(g as u32) - p;
            }
        }
    }
    let mut weights = Vec::with_capacity(1 << groups);
    for pattern in 0..(1usize << groups) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (_, ci)) in sup.terms.iter().enumerate() {
            for (j, (_, cj)) in sup.terms.iter().enumerate() {
                let mut prod = ci.conj() * cj;
                for l in 0..groups {
                    prod *= if pattern >> l & 1 == 1 {
                        pass[l][i][j]
                    } else {
                        fail[l][i][j]
                    };
                }
                acc += prod;
            }
        }
        weights.push(acc.re.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Dimension("superposition has zero norm".into()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Exact column probabilities (candidates then Φ) for a clone output.
pub fn column_distribution(clones: &CloneOutput, candidates: &[Ket], mu: usize) -> Result<Vec<f64>> {
    check_verify_args(clones, candidates, mu)?;
    let groups = candidates.len();
    let sizes = group_sizes(mu, groups);
    let mut probs = vec![0.0; groups + 1];
    let patterns = match clones {
        CloneOutput::Junk { .. } => {
            probs[groups] = 1.0;
            return Ok(probs);
        }
        CloneOutput::Copies(record) => {
            let pass: Vec<f64> = candidates
                .iter()
                .zip(&sizes)
                .map(|(c, &g)| Ok(inner_product(c, &record.state)?.norm_sqr().powi(g as i32)))
                .collect::<Result<_>>()?;
            (0..1usize << groups)
                .map(|pattern| {
                    (0..groups)
                        .map(|l| if pattern >> l & 1 == 1 { pass[l] } else { 1.0 - pass[l] })
                        .product()
                })
                .collect()
        }
        CloneOutput::Superposition(sup) => pattern_distribution(sup, candidates, &sizes)?,
    };
    for (pattern, w) in patterns.into_iter().enumerate() {
        let col = column_from_passes((0..groups).map(|l| pattern >> l & 1 == 1));
        probs[col.index(groups)] += w;
    }
    Ok(probs)
}

/// Probability that `μ` exact copies of candidate `l` are not placed in
/// column `l`, for each candidate.
pub fn exact_copy_leakage(candidates: &[Ket], mu: usize) -> Result<Vec<f64>> {
    (0..candidates.len())
        .map(|l| {
            let out = CloneOutput::Copies(crate::pqcm::CopyRecord {
                label: l,
                state: candidates[l].clone(),
                multiplicity: mu,
            });
            Ok(1.0 - column_distribution(&out, candidates, mu)?[l])
        })
        .collect()
}

/// A unit vector orthogonal to `state`, by Gram–Schmidt on computational vectors.
fn orthogonal_complement_vector(state: &Ket) -> Result<Ket> {
    let mut best: Option<Ket> = None;
    for k in 0..state.dim() {
        let e = Ket::basis(state.dim(), k)?;
        let v = e.add_scaled(state, -inner_product(state, &e)?)?;
        if best.as_ref().is_none_or(|b| v.norm() > b.norm()) {
            best = Some(v);
        }
    }
    best.expect("dimension >= 1").normalize()
}

/// `⊗ₗ |B_l^⊥⟩^{⊗gₗ}`: orthogonal to every `|B_l⟩^{⊗μ}` and failing every
/// group test with certainty.
pub fn junk_state(candidates: &[Ket], mu: usize) -> Result<Ket> {
    let sizes = group_sizes(mu, candidates.len());
    let mut out: Option<Ket> = None;
    for (cand, &g) in candidates.iter().zip(&sizes) {
        if g == 0 {
            continue;
        }
        let block = tensor_power(&orthogonal_complement_vector(cand)?, g)?;
        out = Some(match out {
            None => block,
            Some(acc) => tensor(&acc, &block)?,
        });
    }
    out.ok_or(Error::Config("no clones to materialize".into()))
}

/// The full `d^μ`-dimensional state behind a clone output.
pub fn materialize_output(clones: &CloneOutput, candidates: &[Ket], mu: usize) -> Result<Ket> {
    check_verify_args(clones, candidates, mu)?;
    match clones {
        CloneOutput::Junk { .. } => junk_state(candidates, mu),
        CloneOutput::Copies(r) => tensor_power(&r.state, mu),
        CloneOutput::Superposition(sup) => {
            let mut acc: Option<Ket> = None;
            for (s, c) in &sup.terms {
                let term = tensor_power(s, mu)?.scale(*c);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add_scaled(&term, Complex64::new(1.0, 0.0))?,
                });
            }
            acc.ok_or(Error::EmptyInput("empty superposition"))?.normalize()
        }
    }
}

/// Applies `|c⟩⟨c|` to tensor factor `factor` of a `d^μ` state.
fn project_factor(state: &[Complex64], d: usize, mu: usize, factor: usize, cand: &Ket) -> Vec<Complex64> {
    let stride = d.pow((mu - 1 - factor) as u32);
    let c = cand.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for base in 0..state.len() {
        // Only visit indices whose digit at `factor` is zero.
        if !(base / stride).is_multiple_of(d) {
            continue;
        }
        let overlap: Complex64 = (0..d).map(|a| c[a].conj() * state[base + a * stride]).sum();
        for a in 0..d {
            out[base + a * stride] = c[a] * overlap;
        }
    }
    out
}

fn check_joint(joint: &Ket, candidates: &[Ket], mu: usize) -> Result<usize> {
    let d = candidates.first().ok_or(Error::EmptyInput("no candidates"))?.dim();
    if mu < candidates.len() {
        return Err(Error::Config(format!(
            "{mu} clones cannot fill {} groups",
            candidates.len()
        )));
    }
    if checked_pow(d, mu)? != joint.dim() {
        return Err(Error::Dimension(format!(
            "joint state of dimension {} is not {d}^{mu}",
            joint.dim()
        )));
    }
    Ok(d)
}

/// Exact column probabilities by projecting a materialized `d^μ` state.
pub fn joint_column_distribution(joint: &Ket, candidates: &[Ket], mu: usize) -> Result<Vec<f64>> {
    let d = check_joint(joint, candidates, mu)?;
    let groups = candidates.len();
    let sizes = group_sizes(mu, groups);
    let mut probs = vec![0.0; groups + 1];
    let norm = joint.norm_sqr();
    for pattern in 0..(1usize << groups) {
        let mut psi = joint.amplitudes().to_vec();
        let mut factor = 0;
        for (l, (&g, cand)) in sizes.iter().zip(candidates).enumerate() {
            let mut passed = psi.clone();
            for f in factor..factor + g {
                passed = project_factor(&passed, d, mu, f, cand);
            }
            psi = if pattern >> l & 1 == 1 {
                passed
            } else {
                psi.iter().zip(&passed).map(|(a, b)| a - b).collect()
            };
            factor += g;
        }
        let w: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() / norm;
        let col = column_from_passes((0..groups).map(|l| pattern >> l & 1 == 1));
        probs[col.index(groups)] += w;
    }
    Ok(probs)
}

/// Group verification by sequential single-clone measurements on a
/// materialized `d^μ` state, collapsing after each outcome.
pub fn group_verify_joint(joint: &Ket, candidates: &[Ket], mu: usize, rng: &mut SeededRng) -> Result<Column> {
    let d = check_joint(joint, candidates, mu)?;
    let sizes = group_sizes(mu, candidates.len());
    let mut psi = joint.clone().normalize()?.into_amplitudes();
    let mut passes = Vec::with_capacity(sizes.len());
    let mut factor = 0;
    for (&g, cand) in sizes.iter().zip(candidates) {
        let mut all = true;
        for f in factor..factor + g {
            let projected = project_factor(&psi, d, mu, f, cand);
            let p: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
            let (next, prob) = if rng.bernoulli(p) {
                (projected, p)
            } else {
                all = false;
                (psi.iter().zip(&projected).map(|(a, b)| a - b).collect(), 1.0 - p)
            };
            let scale = 1.0 / prob.sqrt();
            psi = next.into_iter().map(|z| z * scale).collect();
        }
        passes.push(all);
        factor += g;
    }
    Ok(column_from_passes(passes))
}
