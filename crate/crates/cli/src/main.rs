use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use macwt_core::{
    counterexample_search, draw_gv_channel, exhaustive_search_grid, gv_mutual_info_table,
    gv_sum_rates, inde_region, joint_region, mm_joint_secrecy, run_experiment, simo_vertex_search,
    wmmse_inde_secrecy, CovarianceSet, DecoderMode, EmitFormat, ExperimentConfig, GvChannel,
    PowerBudget, SystemDims,
};

#[derive(Parser)]
#[command(
    name = "macwt",
    version,
    about = "Rate regions and secrecy-rate precoder optimization for multi-user wiretap channels"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a JSON config with
    /// `channel`, `solver`, and `experiment` blocks. Results go to
    /// `<output>.csv` and `<output>.json` when the experiment block names an
    /// output stem, otherwise the CSV is printed to stdout. The worker count
    /// is capped by the MACWT_THREADS environment variable.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the joint-decoding and per-user-decoding rate regions of a
    /// stored channel at stored input covariances and write the inequality
    /// lists to a file.
    Region {
        /// JSON file holding the channel matrices.
        #[arg(long)]
        channel: PathBuf,
        /// JSON file holding one covariance matrix per user.
        #[arg(long)]
        covariances: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for a two-user discrete channel whose single-user-decodable
    /// corner tuple escapes the open-rate-capped region. A miss within the
    /// attempt budget is reported, not an error.
    Counterexample {
        #[arg(long)]
        seed: u64,
        /// Alphabet sizes |X1|,|X2|,|Y|,|Z|, each at most 4.
        #[arg(long, value_delimiter = ',')]
        alphabets: Vec<usize>,
    },
    /// Run one solver or baseline on a single channel drawn from the config's
    /// first grid point (seeded by the master seed) and print a JSON summary.
    Solve {
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// Joint-decoding iterative solver.
    #[value(name = "1")]
    One,
    /// Per-user-decoding iterative solver.
    #[value(name = "2")]
    Two,
    /// On/off power enumeration under the joint-decoding objective
    /// (single-antenna transmitters).
    Vertex,
    /// Grid exhaustive search under the per-user-decoding objective
    /// (single-antenna transmitters).
    Es,
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(config: &Path) -> Result<()> {
    let cfg = read_config(config)?;
    let rs = run_experiment(&cfg)?;
    match &cfg.experiment.output {
        Some(stem) => {
            let csv = format!("{stem}.csv");
            let json = format!("{stem}.json");
            macwt_core::emit_results(&rs, EmitFormat::Csv, &csv)?;
            macwt_core::emit_results(&rs, EmitFormat::Json, &json)?;
            eprintln!("wrote {} records to {csv} and {json}", rs.records.len());
        }
        None => print!("{}", macwt_core::results_to_csv(&rs)),
    }
    Ok(())
}

fn cmd_region(channel: &Path, covariances: &Path, out: &Path) -> Result<()> {
    let ch = GvChannel::from_json_file(channel.to_str().context("non-UTF-8 channel path")?)?;
    let f = CovarianceSet::from_json_file(
        covariances.to_str().context("non-UTF-8 covariance path")?,
    )?;
    let table = gv_mutual_info_table(&ch, &f)?;
    let joint = joint_region(&table)?;
    let inde = inde_region(&table)?;
    let text = format!("# joint decoding\n{joint}\n# per-user decoding\n{inde}");
    std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("wrote regions for {} users to {}", ch.users(), out.display());
    Ok(())
}

fn cmd_counterexample(seed: u64, alphabets: &[usize]) -> Result<()> {
    let sizes: [usize; 4] = alphabets
        .try_into()
        .map_err(|_| anyhow::anyhow!("--alphabets needs exactly 4 sizes, got {}", alphabets.len()))?;
    match counterexample_search(seed, sizes)? {
        Some(hit) => {
            println!(
                "counterexample found: alphabets {:?}, attempt {}, cap exceeded by {:.6} bits",
                sizes, hit.attempts, hit.violation
            );
            println!("secret rates: {:?}", hit.tuple.rs);
            println!("open rates:   {:?}", hit.tuple.ro);
        }
        None => println!("no counterexample found for seed {seed} within the attempt budget"),
    }
    Ok(())
}

fn cmd_solve(algorithm: Algorithm, config: &Path) -> Result<()> {
    let cfg = read_config(config)?;
    let e = &cfg.experiment;
    let dims = SystemDims::uniform(e.users[0], e.tx_antennas, e.bob_antennas[0], e.eve_antennas[0]);
    let p_dbm = e.power_dbm[0];
    if matches!(algorithm, Algorithm::Vertex | Algorithm::Es) && e.tx_antennas != 1 {
        bail!("power-vector baselines need tx_antennas = 1");
    }
    let budget = PowerBudget::from_dbm(dims.k, p_dbm)?;
    let ch = draw_gv_channel(e.master_seed, &dims, &cfg.channel)?;

    let summary = match algorithm {
        Algorithm::One => {
            let (f, trace) = mm_joint_secrecy(&ch, &budget, &cfg.solver)?;
            let rates = gv_sum_rates(&ch, &f, DecoderMode::Joint)?;
            serde_json::json!({
                "mode": "joint",
                "r_bits": rates.r,
                "rs_bits": rates.rs,
                "ro_bits": rates.ro,
                "iters": trace.iterations,
                "stop": trace.stop.to_string(),
                "trace_bits": trace.objective_bits,
            })
        }
        Algorithm::Two => {
            let (v, trace) = wmmse_inde_secrecy(&ch, &budget, &cfg.solver)?;
            let rates = gv_sum_rates(&ch, &v.covariances(), DecoderMode::Independent)?;
            serde_json::json!({
                "mode": "independent",
                "r_bits": rates.r,
                "rs_bits": rates.rs,
                "ro_bits": rates.ro,
                "iters": trace.iterations,
                "stop": trace.stop.to_string(),
                "trace_bits": trace.objective_bits,
            })
        }
        Algorithm::Vertex => {
            let sol = simo_vertex_search(&ch, &budget)?;
            let f = CovarianceSet::from_powers(&sol.powers);
            let rates = gv_sum_rates(&ch, &f, DecoderMode::Joint)?;
            serde_json::json!({
                "mode": "vertex",
                "r_bits": rates.r,
                "rs_bits": rates.rs,
                "ro_bits": rates.ro,
                "evaluations": sol.evaluations,
                "powers_mw": sol.powers,
            })
        }
        Algorithm::Es => {
            let sol = exhaustive_search_grid(&ch, &budget, e.es_step_mw, DecoderMode::Independent)?;
            let f = CovarianceSet::from_powers(&sol.powers);
            let rates = gv_sum_rates(&ch, &f, DecoderMode::Independent)?;
            serde_json::json!({
                "mode": "es",
                "r_bits": rates.r,
                "rs_bits": rates.rs,
                "ro_bits": rates.ro,
                "evaluations": sol.evaluations,
                "powers_mw": sol.powers,
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Command::Run { config } => cmd_run(&config),
        Command::Region { channel, covariances, out } => cmd_region(&channel, &covariances, &out),
        Command::Counterexample { seed, alphabets } => cmd_counterexample(seed, &alphabets),
        Command::Solve { algorithm, config } => cmd_solve(algorithm, &config),
    }
}
