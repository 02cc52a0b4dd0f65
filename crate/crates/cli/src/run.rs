//! Subcommand dispatch. Every runner returns the rendered output and an exit code.

use anyhow::{anyhow, bail, Result};
use clap::Subcommand;
use pickands::bounds::{gaussian_lower_bound, gaussian_power_bound, levy_h0_bound, levy_lower_bound, BoundResult};
use pickands::estimators::*;
use pickands::maxstable::*;
use pickands::smallball::{est_smallball_prob, smallball_extrapolate, SmallBallFit, SmallBallOptions};
use pickands::{GridSpec, ProcessModel, VarianceFunction};
use serde::Serialize;

use crate::config::{BoundKind, Check, Format, Settings};
use crate::report::{self, Record};

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Estimate the Pickands constant with one estimator
    Estimate(Settings),
    /// Run every applicable grid estimator on shared seeds and compare them
    Crosscheck(Settings),
    /// Closed-form lower bound
    Bound(Settings),
    /// Simulate the max-stable field or check its finite-dimensional laws
    Maxstable(Settings),
    /// Lower-tail probabilities of fractional Brownian motion on the reciprocal grid
    Smallball(Settings),
}

impl Command {
    pub fn settings(&self) -> &Settings {
        match self {
            Command::Estimate(s)
            | Command::Crosscheck(s)
            | Command::Bound(s)
            | Command::Maxstable(s)
            | Command::Smallball(s) => s,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
    /// Printed on stderr.
    pub notes: Vec<String>,
    /// Destination file; stdout when `None`.
    pub out: Option<std::path::PathBuf>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, code: 0, notes: Vec::new(), out: None }
    }
}

pub const DEFAULT_WINDOW: f64 = 64.0;
/// Window of the edge-corrected definitional estimator in `crosscheck`.
pub const CROSSCHECK_WINDOW: f64 = 256.0;
pub const DEFAULT_CONTINUOUS_MESH: f64 = 0.01;
pub const DEFAULT_CONTINUOUS_WINDOW: f64 = 10.0;
pub const DEFAULT_LEVEL: f64 = 1e4;
pub const DEFAULT_ETAS: [f64; 3] = [0.2, 0.1, 0.05];
pub const DEFAULT_CUTOFF: usize = 16;

pub fn run(cmd: Command) -> Result<Outcome> {
    let s = cmd.settings().clone().resolve()?;
    let mut outcome = match cmd {
        Command::Estimate(_) => run_estimate(&s),
        Command::Crosscheck(_) => run_crosscheck(&s),
        Command::Bound(_) => run_bound(&s),
        Command::Maxstable(_) => run_maxstable(&s),
        Command::Smallball(_) => run_smallball(&s),
    }?;
    outcome.out = s.out;
    Ok(outcome)
}

pub fn estimate(s: &Settings) -> Result<EstimateResult> {
    let model = s.model()?;
    let (reps, seed) = (s.reps(), s.seed());
    let method = s.method()?.unwrap_or(Method::Exceedance);
    let r = match method {
        Method::ContinuousDy => {
            if s.delta.is_some_and(|d| d != 0.0) {
                bail!("the continuous estimator targets delta = 0; use --mesh instead of --delta");
            }
            let mesh = s.mesh.unwrap_or(DEFAULT_CONTINUOUS_MESH);
            let window = s.window.unwrap_or(DEFAULT_CONTINUOUS_WINDOW);
            est_continuous_dy(&model, mesh, window, reps, seed, ContinuousOptions::default())?
        }
        Method::Definitional => {
            let opts = DefinitionalOptions { mesh: s.mesh, ..Default::default() };
            est_definitional(&model, s.delta()?, s.window.unwrap_or(DEFAULT_WINDOW), reps, seed, opts)?
        }
        Method::Blocks => {
            let level = s.level.unwrap_or(DEFAULT_LEVEL);
            let block = s.block.unwrap_or(level.sqrt().floor().max(1.0) as usize);
            est_extremal_index_blocks(&model, s.delta()?, level, block, reps, seed, BlockSimulation::Auto)?
        }
        m => {
            let (delta, policy) = (s.delta()?, s.policy()?);
            match m {
                Method::Exceedance => est_exceedance(&model, delta, &policy, reps, seed)?,
                Method::Difference => est_difference(&model, delta, &policy, reps, seed)?,
                Method::Argmax => est_argmax(&model, delta, &policy, reps, seed)?,
                Method::DiekerYakir => est_dieker_yakir(&model, delta, &policy, reps, seed)?,
                Method::TimeReversed => est_time_reversed(&model, delta, &policy, reps, seed)?,
                Method::Candidate => est_candidate_theta(&model, delta, &policy, reps, seed)?,
                _ => unreachable!(),
            }
        }
    };
    Ok(r)
}

pub fn run_estimate(s: &Settings) -> Result<Outcome> {
    let r = estimate(s)?;
    let mut out = Outcome::ok(report::records(&[Record::new(&r, &s.config_hash())], s.format())?);
    if r.has_flag(FLAG_UNSTABLE) {
        out.notes.push(format!("warning: truncation did not stabilize by horizon {}", r.truncation.horizon));
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct CrossCheckOutput {
    pub records: Vec<Record>,
    pub pairs: Vec<PairCheck>,
    pub concordant: bool,
    pub underpowered: bool,
    pub seed: u64,
    pub config_hash: String,
}

pub fn crosscheck_report(s: &Settings) -> Result<CrossCheckReport> {
    let model = s.model()?;
    if !matches!(model, ProcessModel::Gaussian(_)) {
        bail!("crosscheck needs a Gaussian family; the Lévy model supports one-sided estimators only");
    }
    let delta = s.delta()?;
    let window = s.window.unwrap_or(CROSSCHECK_WINDOW.max(16.0 * delta));
    Ok(crosscheck(&model, delta, &s.policy()?, s.reps(), s.seed(), window)?)
}

pub fn run_crosscheck(s: &Settings) -> Result<Outcome> {
    let rep = crosscheck_report(s)?;
    let hash = s.config_hash();
    let records: Vec<Record> = rep.results.iter().map(|r| Record::new(r, &hash)).collect();
    let output = match s.format() {
        Format::Json => report::json(&CrossCheckOutput {
            records: records.clone(),
            pairs: rep.pairs.clone(),
            concordant: rep.concordant,
            underpowered: rep.underpowered,
            seed: s.seed(),
            config_hash: hash.clone(),
        })?,
        Format::Csv => report::records(&records, Format::Csv)?,
    };
    let mut out = Outcome::ok(output);
    if rep.underpowered {
        out.notes.push(format!(
            "warning: underpowered comparison ({} replications, at least {MIN_CROSSCHECK_REPS} recommended)",
            s.reps()
        ));
    }
    for p in rep.discordant() {
        out.code = 1;
        out.notes.push(format!("discordant pair: {} vs {}", p.a, p.b));
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct BoundRecord {
    #[serde(flatten)]
    pub bound: BoundResult,
    pub delta: f64,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Serialize)]
struct BoundRow<'a> {
    formula: String,
    delta: f64,
    value: f64,
    series_terms: usize,
    series_tail_bound: f64,
    seed: u64,
    config_hash: &'a str,
    diagnostics: String,
}

pub fn bound(s: &Settings) -> Result<BoundResult> {
    let delta = s.delta()?;
    let kind = s.bound.unwrap_or(BoundKind::Series);
    let model = s.model()?;
    let b = match (&model, kind) {
        (ProcessModel::Levy(m), BoundKind::Series) if delta == 0.0 => levy_h0_bound(m)?,
        (ProcessModel::Levy(m), BoundKind::Series) => levy_lower_bound(m, delta)?,
        (ProcessModel::Levy(_), BoundKind::Power) => bail!("the power bound applies to Gaussian models"),
        (ProcessModel::Gaussian(vf), BoundKind::Series) => gaussian_lower_bound(vf, delta)?,
        (ProcessModel::Gaussian(VarianceFunction::Power { alpha, scale }), BoundKind::Power) => {
            gaussian_power_bound(scale.sqrt(), *alpha, delta)?
        }
        (ProcessModel::Gaussian(_), BoundKind::Power) => bail!("the power bound needs a power variance function"),
    };
    Ok(b)
}

pub fn run_bound(s: &Settings) -> Result<Outcome> {
    let b = bound(s)?;
    let hash = s.config_hash();
    let output = match s.format() {
        Format::Json => report::json(&BoundRecord { bound: b.clone(), delta: s.delta()?, seed: s.seed(), config_hash: hash })?,
        Format::Csv => {
            let formula = serde_json::to_value(b.formula)?.as_str().unwrap_or_default().to_string();
            report::csv_rows([BoundRow {
                formula,
                delta: s.delta()?,
                value: b.value,
                series_terms: b.series_terms,
                series_tail_bound: b.series_tail_bound,
                seed: s.seed(),
                config_hash: &hash,
                diagnostics: b.diagnostics.join(";"),
            }])?
        }
    };
    let mut out = Outcome::ok(output);
    out.notes.extend(b.diagnostics.iter().map(|d| format!("note: {d}")));
    Ok(out)
}

#[derive(Serialize)]
pub struct FddOutput {
    #[serde(flatten)]
    pub report: FddReport,
    pub delta: f64,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Serialize)]
struct FieldRow {
    sample: usize,
    index: i64,
    t: f64,
    zeta: f64,
}

#[derive(Serialize)]
struct SingleFieldRow {
    index: i64,
    t: f64,
    zeta: f64,
}

#[derive(Serialize)]
struct FieldsOutput<'a> {
    delta: f64,
    seed: u64,
    config_hash: &'a str,
    samples: Vec<FieldSample>,
}

#[derive(Serialize)]
struct FieldSample {
    zeta: Vec<f64>,
    times: Vec<f64>,
    atoms_used: usize,
    truncation_bias_flag: bool,
}

fn representation(s: &Settings, model: &ProcessModel) -> Representation {
    s.representation.map(Into::into).unwrap_or(if model.supports_two_sided() {
        Representation::SumNormalized
    } else {
        Representation::Spectral
    })
}

pub fn fdd_report(s: &Settings) -> Result<FddReport> {
    let model = s.model()?;
    let repr = representation(s, &model);
    Ok(check_fdd(&model, s.delta()?, repr, s.reps(), s.seed())?)
}

pub fn run_maxstable(s: &Settings) -> Result<Outcome> {
    let hash = s.config_hash();
    if s.check == Some(Check::Fdd) {
        let report = fdd_report(s)?;
        let pass = report.pass;
        let output = report::json(&FddOutput { report, delta: s.delta()?, seed: s.seed(), config_hash: hash })?;
        let mut out = Outcome::ok(output);
        if !pass {
            out.code = 1;
            out.notes.push("fdd check failed".into());
        }
        return Ok(out);
    }
    let model = s.model()?;
    let grid = GridSpec::new(s.delta()?, 0, s.horizon.unwrap_or(16) as i64)?;
    let sampler = MaxStableSampler::new(&model, grid, representation(s, &model), DEFAULT_MAX_ATOMS)?;
    let count = s.samples.unwrap_or(1);
    if count == 0 {
        bail!("--samples must be at least 1");
    }
    let fields = sample_many(&sampler, count, s.seed());
    let biased = fields.iter().filter(|f| f.truncation_bias_flag).count();
    let output = match s.format() {
        Format::Csv if count == 1 => {
            report::csv_rows(fields[0].rows().map(|(index, t, zeta)| SingleFieldRow { index, t, zeta }))?
        }
        Format::Csv => report::csv_rows(
            fields
                .iter()
                .enumerate()
                .flat_map(|(k, f)| f.rows().map(move |(index, t, zeta)| FieldRow { sample: k, index, t, zeta })),
        )?,
        Format::Json => report::json(&FieldsOutput {
            delta: s.delta()?,
            seed: s.seed(),
            config_hash: &hash,
            samples: fields
                .iter()
                .map(|f| FieldSample {
                    zeta: f.zeta.clone(),
                    times: f.rows().map(|r| r.1).collect(),
                    atoms_used: f.atoms_used,
                    truncation_bias_flag: f.truncation_bias_flag,
                })
                .collect(),
        })?,
    };
    let mut out = Outcome::ok(output);
    if biased > 0 {
        out.notes.push(format!("warning: {biased} fields hit the atom cap"));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallBallRow {
    pub eta: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub probability: f64,
    pub stderr: f64,
    pub scaled: f64,
    pub scaled_stderr: f64,
    pub reps: usize,
    pub seed: u64,
    pub config_hash: String,
    pub flags: String,
}

#[derive(Serialize)]
pub struct SmallBallOutput {
    pub alpha: f64,
    pub rows: Vec<SmallBallRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolation: Option<SmallBallFit>,
    pub seed: u64,
    pub config_hash: String,
}

pub fn smallball(s: &Settings) -> Result<SmallBallOutput> {
    let alpha = s.alpha.ok_or_else(|| anyhow!("--alpha is required"))?;
    let etas = s.eta.clone().unwrap_or(DEFAULT_ETAS.to_vec());
    if etas.is_empty() {
        bail!("--eta needs at least one value");
    }
    let (reps, seed, hash) = (s.reps(), s.seed(), s.config_hash());
    let opts = SmallBallOptions { max_k: s.max_horizon.unwrap_or(SmallBallOptions::default().max_k), ..Default::default() };
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &eta in &etas {
        let e = est_smallball_prob(alpha, eta, s.cutoff.unwrap_or(DEFAULT_CUTOFF), reps, seed, opts)?;
        let mut flags = e.flags.clone();
        if !e.stable {
            flags.push(FLAG_UNSTABLE.to_string());
        }
        series.push((eta, e.probability, e.stderr));
        rows.push(SmallBallRow {
            eta,
            k: e.k_cutoff,
            probability: e.probability,
            stderr: e.stderr,
            scaled: e.scaled,
            scaled_stderr: e.scaled_stderr,
            reps,
            seed,
            config_hash: hash.clone(),
            flags: flags.join(";"),
        });
    }
    let extrapolation = if series.len() >= 3 { Some(smallball_extrapolate(alpha, &series)?) } else { None };
    Ok(SmallBallOutput { alpha, rows, extrapolation, seed, config_hash: hash })
}

pub fn run_smallball(s: &Settings) -> Result<Outcome> {
    let res = smallball(s)?;
    let output = match s.format() {
        Format::Json => report::json(&res)?,
        Format::Csv => report::csv_rows(res.rows.iter())?,
    };
    let mut out = Outcome::ok(output);
    if let Some(fit) = &res.extrapolation {
        out.notes.extend(fit.warnings.iter().map(|w| format!("note: {w}")));
    }
    Ok(out)
}
