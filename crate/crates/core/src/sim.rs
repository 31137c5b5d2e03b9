//! Monte Carlo experiment harness.
//!
//! An experiment is a cartesian sweep over user counts, antenna counts, and
//! power budgets; each grid point runs `trials` independent channel draws,
//! with trial `i` seeded as `master_seed + i` so any trial can be reproduced
//! in isolation. Trials may run across worker threads; records are collected
//! in trial order, so parallel and serial runs produce identical results.
//!
//! The per-trial rows, optional convergence traces, grouped means, and CDFs
//! all live in a [`ResultSet`], which serializes losslessly to JSON and
//! flattens to a fixed-column CSV.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_gv_channel, DrawConfig, SystemDims};
use crate::error::{Error, Result};
use crate::rates::{gv_sum_rates, CovarianceSet, DecoderMode, PowerBudget, SumRates};
use crate::solvers::{
    exhaustive_search_grid, mm_joint_secrecy, simo_vertex_search, wmmse_inde_secrecy,
    SolverOptions,
};

/// What an experiment measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Per-iteration objective traces for both algorithms.
    Convergence,
    /// CDFs of the secrecy sum rate for each algorithm against its
    /// exhaustive baseline (single-antenna transmitters only).
    CdfVsEs,
    /// Secrecy rates versus the power budget.
    SweepP,
    /// Secrecy rates versus Bob's antenna count.
    SweepB,
    /// Secrecy rates versus Eve's antenna count.
    SweepE,
    /// Same sweep as [`ExperimentKind::SweepP`]; kept separate so runs that
    /// target the open-rate column are labeled as such in their outputs.
    OpenRate,
}

/// Which solver or baseline produced a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialMode {
    /// Joint-decoding iterative solver.
    Joint,
    /// Per-user-decoding iterative solver.
    Independent,
    /// Grid exhaustive search under the per-user-decoding objective.
    Es,
    /// On/off vertex enumeration under the joint-decoding objective.
    Vertex,
}

impl std::fmt::Display for TrialMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrialMode::Joint => "joint",
            TrialMode::Independent => "independent",
            TrialMode::Es => "es",
            TrialMode::Vertex => "vertex",
        })
    }
}

fn default_tx() -> usize {
    1
}
fn default_antennas() -> Vec<usize> {
    vec![4]
}
fn default_power() -> Vec<f64> {
    vec![10.0]
}
fn default_es_step() -> f64 {
    0.1
}
fn default_cdf_points() -> usize {
    200
}

/// The `experiment` block of a config document: sweep grids and protocol
/// knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBlock {
    pub kind: ExperimentKind,
    /// User counts to sweep.
    pub users: Vec<usize>,
    /// Transmit antennas per user (uniform across users).
    #[serde(default = "default_tx")]
    pub tx_antennas: usize,
    /// Bob antenna counts to sweep.
    #[serde(default = "default_antennas")]
    pub bob_antennas: Vec<usize>,
    /// Eve antenna counts to sweep.
    #[serde(default = "default_antennas")]
    pub eve_antennas: Vec<usize>,
    /// Power budgets to sweep, in dBm per user.
    #[serde(default = "default_power")]
    pub power_dbm: Vec<f64>,
    /// Channel draws per grid point.
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Exhaustive-search power step in mW, used by the CDF experiment.
    #[serde(default = "default_es_step")]
    pub es_step_mw: f64,
    #[serde(default = "default_cdf_points")]
    pub cdf_grid_points: usize,
    /// When false (the default), wall_ms is reported as 0 so outputs are
    /// byte-identical across machines and runs.
    #[serde(default)]
    pub measure_walltime: bool,
    /// Output stem the CLI writes next to; the harness itself does no I/O.
    #[serde(default)]
    pub output: Option<String>,
}

/// A full experiment configuration: channel statistics, solver knobs, and
/// the sweep protocol, matching the three blocks of the JSON config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub channel: DrawConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    pub experiment: ExperimentBlock,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(Error::invalid("trial count must be at least 1"));
        }
        if e.users.is_empty()
            || e.bob_antennas.is_empty()
            || e.eve_antennas.is_empty()
            || e.power_dbm.is_empty()
        {
            return Err(Error::invalid("sweep grids must be nonempty"));
        }
        if e.tx_antennas == 0 {
            return Err(Error::invalid("transmit antenna count must be at least 1"));
        }
        if e.users.iter().any(|&k| k == 0) {
            return Err(Error::invalid("user counts must be at least 1"));
        }
        if e.bob_antennas.iter().any(|&b| b == 0) || e.eve_antennas.iter().any(|&v| v == 0) {
            return Err(Error::invalid("antenna counts must be at least 1"));
        }
        if e.power_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("power grid entries must be finite"));
        }
        if !(e.es_step_mw > 0.0) {
            return Err(Error::invalid("exhaustive-search step must be positive"));
        }
        if e.cdf_grid_points == 0 {
            return Err(Error::invalid("CDF grid needs at least 1 point"));
        }
        if e.kind == ExperimentKind::CdfVsEs && e.tx_antennas != 1 {
            return Err(Error::invalid(
                "the CDF experiment compares against power-vector search and needs tx_antennas = 1",
            ));
        }
        Ok(())
    }
}

/// One solver run on one channel draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub t: usize,
    pub b: usize,
    pub e: usize,
    pub p_dbm: f64,
    pub mode: TrialMode,
    pub r_bits: f64,
    pub rs_bits: f64,
    pub ro_bits: f64,
    pub iters: usize,
    pub wall_ms: f64,
    /// Set when the solver failed on this trial; the metric columns are NaN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Objective history of one iterative-solver run inside an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub trial: usize,
    pub k: usize,
    pub b: usize,
    pub e: usize,
    pub p_dbm: f64,
    pub mode: TrialMode,
    pub objective_bits: Vec<f64>,
}

/// Empirical CDF on an evenly spaced grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cdf {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCdf {
    pub mode: TrialMode,
    pub cdf: Cdf,
}

/// Mean metrics over the successful trials of one (mode, grid point) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub mode: TrialMode,
    pub k: usize,
    pub b: usize,
    pub e: usize,
    pub p_dbm: f64,
    pub count: usize,
    pub mean_r_bits: f64,
    pub mean_rs_bits: f64,
    pub mean_ro_bits: f64,
}

/// Everything an experiment produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub records: Vec<TrialRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<TraceSeries>,
    pub groups: Vec<GroupStat>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cdfs: Vec<ModeCdf>,
}

/// Empirical CDF of `values` on `grid_points` evenly spaced abscissas
/// spanning [min, max]: p(x) = fraction of values ≤ x.
pub fn aggregate_cdf(values: &[f64], grid_points: usize) -> Result<Cdf> {
    if values.is_empty() {
        return Err(Error::invalid("CDF needs at least one value"));
    }
    if grid_points == 0 {
        return Err(Error::invalid("CDF grid needs at least 1 point"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("CDF values must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = grid_points;
    let x: Vec<f64> = if n == 1 {
        vec![hi]
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let p = x
        .iter()
        .map(|&q| {
            let le = sorted.partition_point(|&v| v <= q);
            le as f64 / sorted.len() as f64
        })
        .collect();
    Ok(Cdf { x, p })
}

fn kind_modes(kind: ExperimentKind) -> &'static [TrialMode] {
    match kind {
        ExperimentKind::CdfVsEs => {
            &[TrialMode::Joint, TrialMode::Vertex, TrialMode::Independent, TrialMode::Es]
        }
        _ => &[TrialMode::Joint, TrialMode::Independent],
    }
}

struct TrialOutput {
    records: Vec<TrialRecord>,
    traces: Vec<TraceSeries>,
}

fn failed_record(base: &TrialRecord, mode: TrialMode, err: &Error) -> TrialRecord {
    TrialRecord {
        mode,
        r_bits: f64::NAN,
        rs_bits: f64::NAN,
        ro_bits: f64::NAN,
        iters: 0,
        wall_ms: 0.0,
        error: Some(err.to_string()),
        ..base.clone()
    }
}

fn metric_record(
    base: &TrialRecord,
    mode: TrialMode,
    rates: SumRates,
    iters: usize,
    wall_ms: f64,
) -> TrialRecord {
    TrialRecord {
        mode,
        r_bits: rates.r,
        rs_bits: rates.rs,
        ro_bits: rates.ro,
        iters,
        wall_ms,
        error: None,
        ..base.clone()
    }
}

fn run_trial(cfg: &ExperimentConfig, dims: &SystemDims, p_dbm: f64, trial: usize) -> TrialOutput {
    let e = &cfg.experiment;
    let seed = e.master_seed.wrapping_add(trial as u64);
    let base = TrialRecord {
        trial,
        seed,
        k: dims.k,
        t: e.tx_antennas,
        b: dims.b,
        e: dims.e,
        p_dbm,
        mode: TrialMode::Joint,
        r_bits: f64::NAN,
        rs_bits: f64::NAN,
        ro_bits: f64::NAN,
        iters: 0,
        wall_ms: 0.0,
        error: None,
    };
    let modes = kind_modes(e.kind);

    let mut out = TrialOutput { records: Vec::new(), traces: Vec::new() };
    let budget = match PowerBudget::from_dbm(dims.k, p_dbm) {
        Ok(b) => b,
        Err(err) => {
            for &m in modes {
                out.records.push(failed_record(&base, m, &err));
            }
            return out;
        }
    };
    let ch = match draw_gv_channel(seed, dims, &cfg.channel) {
        Ok(c) => c,
        Err(err) => {
            for &m in modes {
                out.records.push(failed_record(&base, m, &err));
            }
            return out;
        }
    };

    let clock = |started: Instant| -> f64 {
        if e.measure_walltime {
            started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };

    for &mode in modes {
        let started = Instant::now();
        let attempt: Result<(SumRates, usize, Vec<f64>)> = (|| match mode {
            TrialMode::Joint => {
                let (f, trace) = mm_joint_secrecy(&ch, &budget, &cfg.solver)?;
                let rates = gv_sum_rates(&ch, &f, DecoderMode::Joint)?;
                Ok((rates, trace.iterations, trace.objective_bits))
            }
            TrialMode::Independent => {
                let (v, trace) = wmmse_inde_secrecy(&ch, &budget, &cfg.solver)?;
                let rates = gv_sum_rates(&ch, &v.covariances(), DecoderMode::Independent)?;
                Ok((rates, trace.iterations, trace.objective_bits))
            }
            TrialMode::Vertex => {
                let sol = simo_vertex_search(&ch, &budget)?;
                let f = CovarianceSet::from_powers(&sol.powers);
                let rates = gv_sum_rates(&ch, &f, DecoderMode::Joint)?;
                Ok((rates, sol.evaluations as usize, Vec::new()))
            }
            TrialMode::Es => {
                let sol =
                    exhaustive_search_grid(&ch, &budget, e.es_step_mw, DecoderMode::Independent)?;
                let f = CovarianceSet::from_powers(&sol.powers);
                let rates = gv_sum_rates(&ch, &f, DecoderMode::Independent)?;
                Ok((rates, sol.evaluations as usize, Vec::new()))
            }
        })();
        match attempt {
            Ok((rates, iters, trace)) => {
                out.records.push(metric_record(&base, mode, rates, iters, clock(started)));
                if e.kind == ExperimentKind::Convergence && !trace.is_empty() {
                    out.traces.push(TraceSeries {
                        trial,
                        k: dims.k,
                        b: dims.b,
                        e: dims.e,
                        p_dbm,
                        mode,
                        objective_bits: trace,
                    });
                }
            }
            Err(err) => out.records.push(failed_record(&base, mode, &err)),
        }
    }
    out
}

fn aggregate(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<(Vec<GroupStat>, Vec<ModeCdf>)> {
    let mut groups: Vec<(TrialMode, usize, usize, usize, u64, Vec<&TrialRecord>)> = Vec::new();
    for r in records.iter().filter(|r| r.error.is_none()) {
        let key = (r.mode, r.k, r.b, r.e, r.p_dbm.to_bits());
        match groups
            .iter_mut()
            .find(|(m, k, b, e, p, _)| (*m, *k, *b, *e, *p) == key)
        {
            Some((.., members)) => members.push(r),
            None => groups.push((key.0, key.1, key.2, key.3, key.4, vec![r])),
        }
    }
    let stats = groups
        .iter()
        .map(|&(mode, k, b, e, p_bits, ref members)| {
            let n = members.len() as f64;
            GroupStat {
                mode,
                k,
                b,
                e,
                p_dbm: f64::from_bits(p_bits),
                count: members.len(),
                mean_r_bits: members.iter().map(|r| r.r_bits).sum::<f64>() / n,
                mean_rs_bits: members.iter().map(|r| r.rs_bits).sum::<f64>() / n,
                mean_ro_bits: members.iter().map(|r| r.ro_bits).sum::<f64>() / n,
            }
        })
        .collect();

    let mut cdfs = Vec::new();
    if cfg.experiment.kind == ExperimentKind::CdfVsEs {
        for &mode in kind_modes(cfg.experiment.kind) {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.mode == mode && r.error.is_none())
                .map(|r| r.rs_bits)
                .collect();
            if !values.is_empty() {
                cdfs.push(ModeCdf {
                    mode,
                    cdf: aggregate_cdf(&values, cfg.experiment.cdf_grid_points)?,
                });
            }
        }
    }
    Ok((stats, cdfs))
}

/// Run an experiment with the worker count taken from `MACWT_THREADS`
/// (unset or unparsable means the default thread pool).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultSet> {
    let threads = std::env::var("MACWT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0);
    run_experiment_threads(cfg, threads)
}

/// [`run_experiment`] with an explicit worker count. Records come back in
/// deterministic (grid, trial, mode) order regardless of the worker count.
pub fn run_experiment_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ResultSet> {
    cfg.validate()?;
    let e = &cfg.experiment;

    let mut grid = Vec::new();
    for &k in &e.users {
        for &b in &e.bob_antennas {
            for &eve in &e.eve_antennas {
                for &p_dbm in &e.power_dbm {
                    grid.push((SystemDims::uniform(k, e.tx_antennas, b, eve), p_dbm));
                }
            }
        }
    }

    let run_all = || -> Vec<TrialOutput> {
        grid.iter()
            .flat_map(|(dims, p_dbm)| {
                (0..e.trials)
                    .into_par_iter()
                    .map(|i| run_trial(cfg, dims, *p_dbm, i))
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let outputs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|err| Error::invalid(format!("worker pool: {err}")))?
            .install(run_all),
        None => run_all(),
    };

    let mut records = Vec::new();
    let mut traces = Vec::new();
    for mut out in outputs {
        records.append(&mut out.records);
        traces.append(&mut out.traces);
    }
    let (groups, cdfs) = aggregate(cfg, &records)?;
    Ok(ResultSet { records, traces, groups, cdfs })
}

/// Output encodings for [`emit_results`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Csv,
    Json,
}

/// The fixed CSV header of the per-trial table.
pub const CSV_HEADER: &str = "trial,seed,K,T,B,E,P_dbm,mode,R_bits,Rs_bits,Ro_bits,iters,wall_ms";

/// Flatten the per-trial records to CSV.
pub fn results_to_csv(rs: &ResultSet) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &rs.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.trial,
            r.seed,
            r.k,
            r.t,
            r.b,
            r.e,
            r.p_dbm,
            r.mode,
            r.r_bits,
            r.rs_bits,
            r.ro_bits,
            r.iters,
            r.wall_ms
        ));
    }
    out
}

/// Persist a result set. CSV flattens the per-trial records; JSON mirrors
/// the full [`ResultSet`] and round-trips losslessly.
pub fn emit_results(rs: &ResultSet, format: EmitFormat, path: &str) -> Result<()> {
    let text = match format {
        EmitFormat::Csv => results_to_csv(rs),
        EmitFormat::Json => {
            let mut s = serde_json::to_string_pretty(rs)?;
            s.push('\n');
            s
        }
    };
    std::fs::write(path, text).map_err(|err| Error::io(path, err))
}
