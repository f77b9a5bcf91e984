use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{channel_accuracy, guess_rule, ChannelReport, Guess, GuessRecord};
use super::verify::{exact_copy_leakage, group_verify, Column};
use crate::entangle::{
    alice_measure, build_shared_state, induced_ensemble, target_to_basis, AliceBasis, Setting, SharedState,
};
use crate::error::{Error, Result};
use crate::pqcm::{apply_structured, illegal_clone, IllegalClonerSpec, MachineOutcome, PqcmMachine};
use crate::qcore::{trace_distance, Ket, SeededRng};

/// Default copy count: leakage below 1e-4 for candidate overlaps up to ~0.75.
pub const DEFAULT_MU: usize = 48;

/// How the A2 basis is chosen.
#[derive(Debug, Clone)]
pub enum A2Choice {
    Fourier,
    Basis(AliceBasis),
    /// A basis whose first outcome prepares this state for Bob.
    Target(Ket),
}

/// Bob's cloner.
#[derive(Debug, Clone)]
pub enum Cloner {
    Legal(PqcmMachine),
    Illegal(IllegalClonerSpec),
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    shared: SharedState,
    a2_basis: AliceBasis,
    mu: usize,
    trials: u64,
    pairs_per_bit: usize,
    cloner: Cloner,
    seed: u64,
    /// `|B₁⟩…|B_N⟩` followed by the normalized A2 preparations.
    preparations: Vec<Ket>,
    candidates: Vec<Ket>,
}

impl ProtocolConfig {
    pub fn new(
        bob_states: Vec<Ket>,
        a2: A2Choice,
        mu: usize,
        trials: u64,
        pairs_per_bit: usize,
        cloner: Cloner,
        seed: u64,
    ) -> Result<Self> {
        let shared = build_shared_state(&bob_states)?;
        let n = shared.alice_dim();
        let a2_basis = match a2 {
            A2Choice::Fourier => AliceBasis::fourier(n),
            A2Choice::Basis(b) => b,
            A2Choice::Target(t) => target_to_basis(&t, shared.bob_states())?,
        };
        if a2_basis.dim() != n {
            return Err(Error::Config(format!(
                "A2 basis has dimension {}, expected {n}",
                a2_basis.dim()
            )));
        }
        if mu < n + 1 {
            return Err(Error::Config(format!(
                "mu = {mu} leaves a verification group empty; need mu >= {}",
                n + 1
            )));
        }
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if pairs_per_bit == 0 {
            return Err(Error::Config("pairs per bit must be at least 1".into()));
        }
        let a2_index = match &cloner {
            Cloner::Legal(m) => {
                if m.copies() != mu {
                    return Err(Error::Config(format!(
                        "machine makes {} copies but mu = {mu}",
                        m.copies()
                    )));
                }
                if m.input_dim() != n {
                    return Err(Error::Config(format!(
                        "machine acts on dimension {}, expected {n}",
                        m.input_dim()
                    )));
                }
                0
            }
            Cloner::Illegal(spec) => {
                if spec.n() != n || spec.copies() != mu {
                    return Err(Error::Config(format!(
                        "illegal cloner set up for N = {}, mu = {}; protocol has N = {n}, mu = {mu}",
                        spec.n(),
                        spec.copies()
                    )));
                }
                spec.a2_label() - n
            }
        };
        let mut preparations = shared.bob_states().to_vec();
        preparations.extend(induced_ensemble(&shared, &a2_basis)?.states());
        let mut candidates = shared.bob_states().to_vec();
        candidates.push(preparations[n + a2_index].clone());
        Ok(Self {
            shared,
            a2_basis,
            mu,
            trials,
            pairs_per_bit,
            cloner,
            seed,
            preparations,
            candidates,
        })
    }

    pub fn n(&self) -> usize {
        self.shared.alice_dim()
    }

    pub fn shared(&self) -> &SharedState {
        &self.shared
    }

    pub fn a2_basis(&self) -> &AliceBasis {
        &self.a2_basis
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn pairs_per_bit(&self) -> usize {
        self.pairs_per_bit
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cloner(&self) -> &Cloner {
        &self.cloner
    }

    /// All `2N` preparations Bob can receive.
    pub fn preparations(&self) -> &[Ket] {
        &self.preparations
    }

    /// The `N + 1` states Bob's verification groups test against.
    pub fn candidates(&self) -> &[Ket] {
        &self.candidates
    }

    pub fn basis(&self, setting: Setting) -> AliceBasis {
        match setting {
            Setting::A1 => AliceBasis::computational(self.n()),
            Setting::A2 => self.a2_basis.clone(),
        }
    }
}

/// Outcome of one shared pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub setting: Setting,
    /// Zero-based preparation label in `0..2N`.
    pub label: usize,
    /// `None` when the cloner reported failure and Bob discarded the pair.
    pub column: Option<Column>,
}

/// Runs one pair on its own random stream.
pub fn simulate_pair(config: &ProtocolConfig, setting: Setting, stream_id: u64) -> Result<PairOutcome> {
    let mut rng = SeededRng::new(config.seed, stream_id);
    let n = config.n();
    let (m, bob_state) = alice_measure(&config.shared, &config.basis(setting), &mut rng)?;
    let label = match setting {
        Setting::A1 => m,
        Setting::A2 => n + m,
    };
    let output = match &config.cloner {
        Cloner::Illegal(spec) => Some(illegal_clone(spec, label, &config.preparations, &mut rng)?),
        Cloner::Legal(machine) => match apply_structured(machine, &bob_state, &mut rng)? {
            MachineOutcome::Success(out) => Some(out),
            MachineOutcome::Failure(_) => None,
        },
    };
    let column = output
        .map(|out| group_verify(&out, &config.candidates, config.mu, &mut rng))
        .transpose()?;
    Ok(PairOutcome { setting, label, column })
}

/// Runs pairs `first..first + count` of one setting in parallel; the result
/// is ordered by pair index and independent of the thread schedule.
pub fn simulate_pairs(config: &ProtocolConfig, setting: Setting, first: u64, count: u64) -> Result<Vec<PairOutcome>> {
    (first..first + count)
        .into_par_iter()
        .map(|id| simulate_pair(config, setting, id))
        .collect()
}

/// Counts of Bob's marks, by preparation row and column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyTable {
    n: usize,
    /// `2N` rows of `N + 2` columns (`N + 1` candidates, then Φ).
    counts: Vec<Vec<u64>>,
    pairs: [u64; 2],
    discarded: [u64; 2],
}

fn setting_slot(setting: Setting) -> usize {
    usize::from(setting.bit())
}

impl TallyTable {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: vec![vec![0; n + 2]; 2 * n],
            pairs: [0; 2],
            discarded: [0; 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn record(&mut self, outcome: &PairOutcome) {
        let slot = setting_slot(outcome.setting);
        self.pairs[slot] += 1;
        match outcome.column {
            Some(col) => self.counts[outcome.label][col.index(self.n + 1)] += 1,
            None => self.discarded[slot] += 1,
        }
    }

    pub fn merge(&mut self, other: &TallyTable) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, x) in row.iter_mut().zip(o) {
                *c += x;
            }
        }
        for s in 0..2 {
            self.pairs[s] += other.pairs[s];
            self.discarded[s] += other.discarded[s];
        }
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn count(&self, row: usize, column: Column) -> u64 {
        self.counts[row][column.index(self.n + 1)]
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    pub fn pairs(&self, setting: Setting) -> u64 {
        self.pairs[setting_slot(setting)]
    }

    pub fn discarded(&self, setting: Setting) -> u64 {
        self.discarded[setting_slot(setting)]
    }

    /// Classified (successful-clone) events for a setting.
    pub fn events(&self, setting: Setting) -> u64 {
        self.pairs(setting) - self.discarded(setting)
    }

    fn rows(&self, setting: Setting) -> std::ops::Range<usize> {
        match setting {
            Setting::A1 => 0..self.n,
            Setting::A2 => self.n..2 * self.n,
        }
    }

    /// Column totals over the rows a setting can produce.
    pub fn column_counts(&self, setting: Setting) -> Vec<u64> {
        let mut out = vec![0; self.n + 2];
        for row in self.rows(setting) {
            for (o, c) in out.iter_mut().zip(&self.counts[row]) {
                *o += c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    fn binomial(hits: u64, total: u64) -> Self {
        let p = hits as f64 / total as f64;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / total as f64).sqrt(),
        }
    }
}

/// Per-setting estimates conditioned on reported cloning success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingStats {
    pub pairs: u64,
    pub events: u64,
    pub discard_rate: f64,
    /// `P(column | setting)`: `N + 1` candidates, then Φ.
    pub p_col: Vec<Estimate>,
    /// `Σₙ≤N P(n | setting)`.
    pub p0: Estimate,
    /// `P(N+1 | setting)`.
    pub p1: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalStats {
    pub n: usize,
    pub mu: usize,
    pub a1: SettingStats,
    pub a2: SettingStats,
    /// Largest probability that exact copies of a candidate miss their own column.
    pub leakage: f64,
    pub channel: ChannelReport,
    /// Trace distance between Bob's averaged states under A1 and A2.
    pub certificate: f64,
}

impl SignalStats {
    pub fn setting(&self, s: Setting) -> &SettingStats {
        match s {
            Setting::A1 => &self.a1,
            Setting::A2 => &self.a2,
        }
    }

    /// `p1(A2) - p1(A1)` with its combined standard error.
    pub fn p1_gap(&self) -> Estimate {
        Estimate {
            value: self.a2.p1.value - self.a1.p1.value,
            stderr: self.a1.p1.stderr.hypot(self.a2.p1.stderr),
        }
    }
}

fn setting_stats(table: &TallyTable, setting: Setting) -> Result<SettingStats> {
    let n = table.n();
    let events = table.events(setting);
    if events == 0 {
        return Err(Error::Config(format!(
            "no successful clone events under {setting:?}; increase trials"
        )));
    }
    let cols = table.column_counts(setting);
    let p_col = cols.iter().map(|&c| Estimate::binomial(c, events)).collect();
    let zeros: u64 = cols[..n].iter().sum();
    Ok(SettingStats {
        pairs: table.pairs(setting),
        events,
        discard_rate: table.discarded(setting) as f64 / table.pairs(setting) as f64,
        p_col,
        p0: Estimate::binomial(zeros, events),
        p1: Estimate::binomial(cols[n], events),
    })
}

fn guesses(outcomes: &[PairOutcome], n: usize) -> Vec<GuessRecord> {
    outcomes
        .iter()
        .map(|o| GuessRecord {
            sent: o.setting.bit(),
            guess: o.column.map_or(Guess::Abstain, |c| guess_rule(c, n)),
        })
        .collect()
}

/// Runs `trials` pairs under each setting and tallies Bob's marks.
///
/// Pair `t` of setting A1 uses stream `t`; pair `t` of A2 uses stream
/// `trials + t`. Channel accuracy decodes consecutive blocks of
/// `pairs_per_bit` pairs from each setting's stream.
pub fn run_protocol(config: &ProtocolConfig) -> Result<(TallyTable, SignalStats)> {
    let n = config.n();
    let mut table = TallyTable::new(n);
    let mut records = Vec::new();
    for (setting, first) in [(Setting::A1, 0), (Setting::A2, config.trials)] {
        let outcomes = simulate_pairs(config, setting, first, config.trials)?;
        for o in &outcomes {
            table.record(o);
        }
        let mut g = guesses(&outcomes, n);
        g.truncate(g.len() - g.len() % config.pairs_per_bit);
        records.extend(g);
    }
    let channel = channel_accuracy(&records, config.pairs_per_bit)?;
    let leakage = exact_copy_leakage(&config.candidates, config.mu)?
        .into_iter()
        .fold(0.0, f64::max);
    let certificate = analytic_no_signal_certificate(
        config.shared.bob_states(),
        &AliceBasis::computational(n),
        &config.a2_basis,
    )?;
    let stats = SignalStats {
        n,
        mu: config.mu,
        a1: setting_stats(&table, Setting::A1)?,
        a2: setting_stats(&table, Setting::A2)?,
        leakage,
        channel,
        certificate,
    };
    Ok((table, stats))
}

/// Sends `bits`, one block of `pairs_per_bit` pairs per bit, and decodes by
/// majority vote. Pair `k` of the message uses stream `k`.
pub fn transmit_message(config: &ProtocolConfig, bits: &[u8]) -> Result<ChannelReport> {
    let ppb = config.pairs_per_bit as u64;
    let mut records = Vec::with_capacity(bits.len() * config.pairs_per_bit);
    for (i, &bit) in bits.iter().enumerate() {
        let outcomes = simulate_pairs(config, Setting::from_bit(bit), i as u64 * ppb, ppb)?;
        records.extend(guesses(&outcomes, config.n()));
    }
    channel_accuracy(&records, config.pairs_per_bit)
}

/// Trace distance between Bob's Alice-averaged states for two bases.
pub fn analytic_no_signal_certificate(bob_states: &[Ket], basis_a: &AliceBasis, basis_b: &AliceBasis) -> Result<f64> {
    let shared = build_shared_state(bob_states)?;
    let rho_a = induced_ensemble(&shared, basis_a)?.density_matrix();
    let rho_b = induced_ensemble(&shared, basis_b)?.density_matrix();
    trace_distance(&rho_a, &rho_b)
}
