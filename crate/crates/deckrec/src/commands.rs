//! The six experiment commands. Each validates its configuration, reads its
//! inputs, writes any side files and returns a JSON result document.

use std::path::{Path, PathBuf};

use deckrec_core::arith::{fmt_rational, Q};
use deckrec_core::channel::DeletionChannel;
use deckrec_core::deck::{estimate_deck, exact_deck};
use deckrec_core::lower_bound::{build_hard_pair, exact_trace_tv, loglog_slope};
use deckrec_core::model::tv_distance;
use deckrec_core::recovery::{recover, required_sample_size, RecoveryConfig};
use deckrec_core::separation::{run_pipeline, PipelineConfig};
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::config::{provenance, ExperimentConfig};
use crate::error::{CliError, Result, EXIT_CHECK, EXIT_OK};
use crate::formats::{
    approx, decimal, decimal_f64, deck_to_json, mean_length, rational, read_population, read_traces, to_pretty,
    traces_to_string, write_text,
};
use crate::parallel::{sample_traces_par, with_threads};
use crate::reports::{certificate_to_json, hard_pair_to_json, recovery_to_json};
use crate::suites::run_suite;

/// A subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Draw traces of a population.
    Simulate,
    /// Estimate a deck from traces, or compute a population's exact deck.
    EstimateDeck,
    /// Recover a population from traces.
    Recover,
    /// Build hard pairs and their exact trace distances over an n-grid.
    Lowerbound,
    /// Run the separation pipeline on two populations.
    Certificate,
    /// Run a verification suite.
    Verify,
}

impl Command {
    /// Name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::EstimateDeck => "estimate-deck",
            Command::Recover => "recover",
            Command::Lowerbound => "lowerbound",
            Command::Certificate => "certificate",
            Command::Verify => "verify",
        }
    }
}

/// Result document and exit code of a command.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// Machine-readable result.
    pub document: Value,
    /// Process exit code.
    pub exit_code: i32,
}

impl Outcome {
    fn ok(document: Value) -> Self {
        Self { document, exit_code: EXIT_OK }
    }
}

/// Runs `cmd`. The result document is also written to `output` for every
/// command except `simulate`, whose `output` is the trace file.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = match cmd {
        Command::Simulate => simulate(cfg)?,
        Command::EstimateDeck => estimate(cfg)?,
        Command::Recover => recover_cmd(cfg)?,
        Command::Lowerbound => lowerbound(cfg)?,
        Command::Certificate => certificate(cfg)?,
        Command::Verify => verify(cfg)?,
    };
    if let Value::Object(map) = &mut out.document {
        let mut front = serde_json::Map::new();
        front.insert("command".to_string(), json!(cmd.name()));
        front.append(map);
        *map = front;
    }
    if cmd != Command::Simulate {
        if let Some(path) = &cfg.output {
            write_text(path, &to_pretty(&out.document))?;
        }
    }
    Ok(out)
}

fn need_path(v: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
    ExperimentConfig::need(v, key)
}

fn channel(delta: &Q) -> Result<DeletionChannel> {
    Ok(DeletionChannel::from_rational(delta.clone())?)
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let pop_path = need_path(&cfg.population, "population")?;
    let output = need_path(&cfg.output, "output")?;
    let count = cfg.count.or(cfg.samples).ok_or_else(|| CliError::config("missing required key \"count\""))?;
    let delta = cfg.delta_or(None)?;
    let seed = cfg.seed.unwrap_or(0);
    let population = read_population(&pop_path)?;
    let ch = channel(&delta)?;
    let batch = with_threads(cfg.threads, || sample_traces_par(&population, &ch, count, seed))?;
    write_text(&output, &traces_to_string(&batch))?;
    Ok(Outcome::ok(json!({
        "traces": output.display().to_string(),
        "n": batch.n,
        "delta": batch.delta.to_string(),
        "seed": seed,
        "count": batch.traces.len(),
        "mean_length": mean_length(&batch).map(|m| rational(&m)),
        "provenance": provenance(cfg, &[&pop_path])?,
    })))
}

fn estimate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = ExperimentConfig::need(&cfg.k, "k")?;
    let (deck, input) = match (&cfg.traces, &cfg.population) {
        (Some(t), _) => (estimate_deck(&read_traces(t)?, k)?, t.clone()),
        (None, Some(p)) => (exact_deck(&read_population(p)?, k)?, p.clone()),
        (None, None) => return Err(CliError::config("estimate-deck needs \"traces\" or \"population\"")),
    };
    let mut doc = deck_to_json(&deck);
    doc["provenance"] = provenance(cfg, &[&input])?;
    Ok(Outcome::ok(doc))
}

fn recover_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let traces = need_path(&cfg.traces, "traces")?;
    let ell = ExperimentConfig::need(&cfg.ell, "ell")?;
    let k = ExperimentConfig::need(&cfg.k, "k")?;
    let xi = cfg.xi_exact()?;
    let mut rc = RecoveryConfig::new(ell, k, xi.clone());
    rc.grid_steps()?;
    if let Some(cap) = cfg.pool_cap {
        rc.pool_cap = cap;
    }
    rc.sample_multiplier = cfg.multiplier.unwrap_or(1.0);
    rc.seed = cfg.seed.unwrap_or(0);
    let truth = cfg.truth.as_ref().map(|p| read_population(p)).transpose()?;
    let batch = read_traces(&traces)?;
    let result = recover(&batch, &rc)?;
    let mut doc = recovery_to_json(&result);
    doc["ell"] = json!(ell);
    doc["k"] = json!(k);
    doc["xi"] = json!(fmt_rational(&xi));
    doc["required_sample_size"] = json!(required_sample_size(k, &xi, batch.delta, rc.sample_multiplier)?);
    if let Some(t) = &truth {
        let tv = tv_distance(&result.estimate, t)?;
        doc["exact_match"] = json!(tv.is_zero());
        doc["tv_to_truth"] = rational(&tv);
    }
    let mut inputs: Vec<&Path> = vec![&traces];
    if let Some(p) = &cfg.truth {
        inputs.push(p);
    }
    doc["provenance"] = provenance(cfg, &inputs)?;
    Ok(Outcome::ok(doc))
}

/// Hard pairs over the grid with their exact trace distances.
fn lowerbound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ell = ExperimentConfig::need(&cfg.ell, "ell")?;
    if ell == 0 {
        return Err(CliError::config("ell must be at least 1"));
    }
    let grid = match (&cfg.grid, cfg.n) {
        (Some(g), _) => g.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => return Err(CliError::config("missing required key \"grid\"")),
    };
    if grid.is_empty() {
        return Err(CliError::config("grid is empty"));
    }
    for &n in &grid {
        if n % 2 == 0 {
            return Err(CliError::config(format!("grid value {n} is even")));
        }
        if n < 4 * ell + 3 {
            return Err(CliError::config(format!("grid value {n} is below 4 ell + 3 = {}", 4 * ell + 3)));
        }
    }
    let delta = cfg.delta_or(Some("1/2"))?;
    if delta.is_one() {
        return Err(CliError::config("delta must be below 1"));
    }
    let rho = Q::one() - &delta;
    let exponent = (ell as f64 + 1.0) / 2.0;
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    let mut points = Vec::new();
    let mut tvs: Vec<Q> = Vec::new();
    let mut csv = String::from("n,tv_exact,tv_decimal,normalized\n");
    for &n in &grid {
        let pair = build_hard_pair(ell, n, &rho)?;
        let tv = exact_trace_tv(&pair.pi_s, &pair.pi_t, &delta)?;
        let tv_f = approx(&tv);
        let normalized = tv_f * (n as f64).powf(exponent);
        csv.push_str(&format!("{n},{},{},{}\n", fmt_rational(&tv), decimal(&tv), decimal_f64(normalized)));
        rows.push(json!({ "n": n, "tv": rational(&tv), "normalized": decimal_f64(normalized) }));
        pairs.push(hard_pair_to_json(&pair, &delta, &tv));
        points.push((n as f64, tv_f));
        tvs.push(tv);
    }
    let normalized: Vec<f64> = points.iter().map(|(n, tv)| tv * n.powf(exponent)).collect();
    let max = normalized.iter().cloned().fold(f64::MIN, f64::max);
    let min = normalized.iter().cloned().fold(f64::MAX, f64::min);
    let slope = if points.len() >= 2 { Some(decimal_f64(loglog_slope(&points))) } else { None };
    if let Some(path) = &cfg.csv {
        write_text(path, &csv)?;
    }
    Ok(Outcome::ok(json!({
        "ell": ell,
        "delta": fmt_rational(&delta),
        "normalization_exponent": decimal_f64(exponent),
        "rows": rows,
        "strictly_decreasing": tvs.windows(2).all(|w| w[1] < w[0]),
        "normalized_max_over_min": decimal_f64(max / min),
        "loglog_slope": slope,
        "pairs": pairs,
        "provenance": provenance(cfg, &[])?,
    })))
}

fn certificate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let xp = need_path(&cfg.x, "x")?;
    let yp = need_path(&cfg.y, "y")?;
    let x = read_population(&xp)?;
    let y = read_population(&yp)?;
    let defaults = PipelineConfig::default();
    let pc = PipelineConfig {
        seed: cfg.seed.unwrap_or(defaults.seed),
        h_range_cap: cfg.h_range_cap.unwrap_or(defaults.h_range_cap),
        exponent_cap: cfg.exponent_cap.unwrap_or(defaults.exponent_cap),
        max_n: cfg.max_n.unwrap_or(defaults.max_n),
        max_d: cfg.max_d.unwrap_or(defaults.max_d),
    };
    let cert = run_pipeline(&x, &y, &pc)?;
    let mut doc = certificate_to_json(&cert);
    doc["provenance"] = provenance(cfg, &[&xp, &yp])?;
    Ok(Outcome::ok(doc))
}

fn verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let suite = ExperimentConfig::need(&cfg.suite, "suite")?;
    let report = with_threads(cfg.threads, || run_suite(&suite, cfg))??;
    let mut doc = report.to_json();
    doc["provenance"] = provenance(cfg, &[])?;
    let exit_code = if report.all_pass() { EXIT_OK } else { EXIT_CHECK };
    Ok(Outcome { document: doc, exit_code })
}
