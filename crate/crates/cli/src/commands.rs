use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pqcm_core::pqcm::{construct_machine, feasibility_matrix, max_uniform_gamma, DEFAULT_GAMMA_TOL};
use pqcm_core::qcore::PSD_TOL;
use pqcm_core::signalling::{run_protocol, transmit_message, Column, SignalStats, TallyTable};
use pqcm_core::{SeededRng, Setting};
use rand::Rng;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::report::{render, write_tables, Cell, Table};
use crate::states::read_states;

#[derive(Debug, Parser)]
#[command(
    name = "pqcm",
    version,
    about = "Probabilistic quantum cloning and the no-signalling test"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check whether a heralded 1 → M cloner exists for a state set.
    Feasibility(FeasibilityArgs),
    /// Build the cloner's Kraus operators and verify them.
    Construct(ConstructArgs),
    /// Run the entanglement signalling test from a TOML config.
    SignalTest(SignalArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory for output files; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("efficiency").required(true).args(["gamma", "max_uniform"])))]
pub struct FeasibilityArgs {
    #[arg(long)]
    pub states: PathBuf,
    #[arg(long, short = 'M')]
    pub copies: usize,
    /// Success probabilities, one per state or a single shared value.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub gamma: Vec<f64>,
    /// Report the largest feasible uniform efficiency.
    #[arg(long)]
    pub max_uniform: bool,
    #[arg(long, default_value_t = DEFAULT_GAMMA_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("efficiency").required(true).args(["gamma", "max_uniform"])))]
pub struct ConstructArgs {
    #[arg(long)]
    pub states: PathBuf,
    #[arg(long, short = 'M')]
    pub copies: usize,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub gamma: Vec<f64>,
    /// Use the largest feasible uniform efficiency.
    #[arg(long)]
    pub max_uniform: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub mu: Option<usize>,
    #[arg(long)]
    pub pairs_per_bit: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Feasibility(a) => feasibility(a),
        Command::Construct(a) => construct(a),
        Command::SignalTest(a) => signal_test(a),
    }
}

fn emit(tables: &[Table], format: Format, out: Option<&PathBuf>) -> Result<String, CliError> {
    match out {
        None => render(tables, format),
        Some(dir) => Ok(write_tables(tables, format, dir)?
            .into_iter()
            .map(|p| format!("wrote {p}\n"))
            .collect()),
    }
}

fn expand_gammas(gammas: &[f64], k: usize) -> Result<Vec<f64>, CliError> {
    match gammas.len() {
        1 => Ok(vec![gammas[0]; k]),
        n if n == k => Ok(gammas.to_vec()),
        n => Err(CliError::Config(format!("{n} gamma values for {k} states"))),
    }
}

pub fn feasibility(a: &FeasibilityArgs) -> Result<Outcome, CliError> {
    let states = read_states(&a.states)?;
    let k = states.len();
    let mut table = Table::new("feasibility", &["quantity", "value"]);
    let (gammas, gamma_max) = if a.max_uniform {
        let g = max_uniform_gamma(&states, a.copies, a.tol)?;
        (vec![g; k], Some(g))
    } else {
        (expand_gammas(&a.gamma, k)?, None)
    };
    let min_eig = feasibility_matrix(&states, a.copies, &gammas)?.min_eigenvalue();
    let feasible = min_eig >= -PSD_TOL;
    table.push(vec![
        "verdict".into(),
        if feasible { "feasible" } else { "infeasible" }.into(),
    ]);
    table.push(vec!["min_eigenvalue".into(), min_eig.into()]);
    table.push(vec!["copies".into(), a.copies.into()]);
    for (i, g) in gammas.iter().enumerate() {
        table.push(vec![Cell::Text(format!("gamma_{}", i + 1)), (*g).into()]);
    }
    if let Some(g) = gamma_max {
        table.push(vec!["gamma_max".into(), g.into()]);
        table.push(vec!["tolerance".into(), a.tol.into()]);
    }
    Ok(Outcome {
        stdout: emit(&[table], a.output.format, a.output.out.as_ref())?,
        exit_code: if feasible { 0 } else { 2 },
    })
}

pub fn construct(a: &ConstructArgs) -> Result<Outcome, CliError> {
    let states = read_states(&a.states)?;
    let k = states.len();
    let gammas = if a.max_uniform {
        vec![max_uniform_gamma(&states, a.copies, DEFAULT_GAMMA_TOL)?; k]
    } else {
        expand_gammas(&a.gamma, k)?
    };
    let machine = construct_machine(&states, a.copies, &gammas)?;
    let residuals = machine.residuals();
    let mut summary = Table::new("summary", &["quantity", "value"]);
    summary.push(vec!["input_dim".into(), machine.input_dim().into()]);
    summary.push(vec!["copies".into(), a.copies.into()]);
    for (i, g) in gammas.iter().enumerate() {
        summary.push(vec![Cell::Text(format!("gamma_{}", i + 1)), (*g).into()]);
    }
    summary.push(vec!["residual_clone_action".into(), residuals.clone_action.into()]);
    summary.push(vec![
        "residual_trace_preservation".into(),
        residuals.trace_preservation.into(),
    ]);
    let mut kraus = Table::new("kraus", &["operator", "row", "col", "re", "im"]);
    for (name, m) in [
        ("success", machine.kraus_success()?),
        ("fail", machine.kraus_fail().clone()),
    ] {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                kraus.push(vec![name.into(), r.into(), c.into(), z.re.into(), z.im.into()]);
            }
        }
    }
    Ok(Outcome {
        stdout: emit(&[summary, kraus], a.output.format, a.output.out.as_ref())?,
        exit_code: 0,
    })
}

fn tally_table(table: &TallyTable) -> Table {
    let n = table.n();
    let mut headers = vec!["input".to_string(), "setting".to_string()];
    headers.extend((1..=n + 1).map(|c| format!("col_{c}")));
    headers.push("phi".into());
    headers.push("total".into());
    let mut t = Table::with_headers("tally", headers);
    for (row, counts) in table.counts().iter().enumerate() {
        let setting = if row < n { "A1" } else { "A2" };
        let mut cells = vec![Cell::Int(row as u64 + 1), setting.into()];
        cells.extend(counts.iter().map(|&c| Cell::Int(c)));
        cells.push(Cell::Int(table.row_sum(row)));
        t.push(cells);
    }
    t
}

fn stats_table(stats: &SignalStats, table: &TallyTable, message: Option<(usize, f64)>) -> Table {
    let mut t = Table::new("stats", &["scope", "quantity", "value", "stderr"]);
    let n = stats.n;
    for (name, setting) in [("A1", Setting::A1), ("A2", Setting::A2)] {
        let s = stats.setting(setting);
        let mut row = |q: &str, v: Cell, e: Option<f64>| t.push(vec![name.into(), q.into(), v, e.into()]);
        row("pairs", s.pairs.into(), None);
        row("events", s.events.into(), None);
        row("discarded", table.discarded(setting).into(), None);
        row("discard_rate", s.discard_rate.into(), None);
        for (i, e) in s.p_col.iter().enumerate() {
            let label = match i {
                i if i == Column::Phi.index(n + 1) => "p_phi".to_string(),
                i => format!("p_col_{}", i + 1),
            };
            row(&label, e.value.into(), Some(e.stderr));
        }
        row("p0", s.p0.value.into(), Some(s.p0.stderr));
        row("p1", s.p1.value.into(), Some(s.p1.stderr));
    }
    let mut row = |q: &str, v: Cell, e: Option<f64>| t.push(vec!["run".into(), q.into(), v, e.into()]);
    let gap = stats.p1_gap();
    row("n", n.into(), None);
    row("mu", stats.mu.into(), None);
    row("p1_gap", gap.value.into(), Some(gap.stderr));
    row("leakage", stats.leakage.into(), None);
    row("certificate", stats.certificate.into(), None);
    row("channel_accuracy", stats.channel.accuracy.into(), None);
    row("channel_blocks", stats.channel.blocks.into(), None);
    row("channel_tied_blocks", stats.channel.tied_blocks.into(), None);
    row(
        "channel_all_abstain_blocks",
        stats.channel.all_abstain_blocks.into(),
        None,
    );
    if let Some((bits, accuracy)) = message {
        row("message_bits", bits.into(), None);
        row("message_accuracy", accuracy.into(), None);
    }
    t
}

/// Stream id for the message bits, far from the per-pair streams.
const MESSAGE_STREAM: u64 = u64::MAX;

pub fn signal_test(a: &SignalArgs) -> Result<Outcome, CliError> {
    let mut config = RunConfig::load(&a.config)?;
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if let Some(v) = a.trials {
        config.trials = v;
    }
    if let Some(v) = a.mu {
        config.mu = v;
    }
    if let Some(v) = a.pairs_per_bit {
        config.pairs_per_bit = v;
    }
    if let Some(v) = a.format {
        config.format = v;
    }
    if let Some(v) = &a.out {
        config.out = Some(v.clone());
    }
    let protocol = config.protocol()?;
    let (table, stats) = run_protocol(&protocol)?;
    let message = match config.message_bits {
        Some(bits) => {
            let mut rng = SeededRng::new(config.seed, MESSAGE_STREAM);
            let msg: Vec<u8> = (0..bits).map(|_| u8::from(rng.random::<bool>())).collect();
            Some((bits, transmit_message(&protocol, &msg)?.accuracy))
        }
        None => None,
    };
    let tables = [tally_table(&table), stats_table(&stats, &table, message)];
    Ok(Outcome {
        stdout: emit(&tables, config.format, config.out.as_ref())?,
        exit_code: 0,
    })
}
