//! `fairagg`: key generation, synthetic federations, end-to-end audits,
//! the attribute-inference attack and operation-count benchmarks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fairagg_core::crypto::KeyMaterial;
use fairagg_core::datagen::generate_participants;
use fairagg_core::experiment::{
    self, AttackParams, ExperimentConfig, ExperimentError, Sweep, PRESET_NAMES,
};
use fairagg_core::netsim::WorstCase;
use fairagg_core::rng;

#[derive(Parser, Debug)]
#[command(
    name = "fairagg",
    version,
    about = "Verifiable fairness auditing over simulated federations"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Experiment config file (JSON); overrides --preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in scenario used when no config file is given.
    #[arg(long, global = true, default_value = "smoke")]
    preset: String,
    /// Directory that receives the artifacts.
    #[arg(
        long,
        global = true,
        env = "FAIRAGG_OUTPUT",
        default_value = "fairagg-out"
    )]
    output: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    key_bits: Option<u32>,
    #[arg(long, global = true)]
    participants: Option<usize>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    /// Per-count Laplace scale; replaces the configured epsilon.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    rounds: Option<u64>,
    /// Worker threads for parallel phases.
    #[arg(long, global = true, env = "FAIRAGG_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a Paillier key with k-of-n decryption shares.
    Keygen {
        /// Decryption threshold k; defaults to the config's.
        #[arg(long, short = 'k')]
        threshold: Option<u32>,
    },
    /// Generate a synthetic federation and its brute-force ground truth.
    Generate,
    /// Run the configured experiment end to end.
    Run,
    /// Run the worst-case attribute-inference attack.
    Attack {
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Count tree-verification and naive-baseline operations.
    Bench {
        /// Federation sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Validate a config, including the verification lower bound.
    VerifyConfig,
}

#[derive(Debug)]
struct Failure {
    kind: String,
    message: String,
    code: u8,
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match e {
            ExperimentError::Config(_) | ExperimentError::LowerBound { .. } => 2,
            _ => 1,
        };
        Failure {
            kind: e.kind().into(),
            message: e.to_string(),
            code,
        }
    }
}

fn failure(kind: &str, message: impl Into<String>, code: u8) -> Failure {
    Failure {
        kind: kind.into(),
        message: message.into(),
        code,
    }
}

type CliResult<T> = Result<T, Failure>;

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    failure("io", format!("{}: {e}", path.display()), 1)
}

fn load_config(g: &Global) -> CliResult<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            ExperimentConfig::from_json(&text)?
        }
        None => experiment::preset(&g.preset).ok_or_else(|| {
            failure(
                "config",
                format!(
                    "unknown preset {:?}; expected one of {}",
                    g.preset,
                    PRESET_NAMES.join(", ")
                ),
                2,
            )
        })?,
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
        cfg.federation.seed = seed;
    }
    if let Some(bits) = g.key_bits {
        cfg.protocol.key_bits = bits;
    }
    if let Some(n) = g.participants {
        cfg.federation.n_participants = n;
    }
    if let Some(b) = g.batch_size {
        cfg.protocol.batch_size = b;
    }
    if let Some(s) = g.sigma {
        cfg.privacy.sigma = Some(s);
        cfg.privacy.epsilon = None;
    }
    if let Some(t) = g.rounds {
        cfg.rounds = t;
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    ExperimentConfig::check_output_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| io_failure(&path, e))?;
    Ok(path)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

fn keygen(g: &Global, threshold: Option<u32>) -> CliResult<Value> {
    let cfg = load_config(g)?;
    let n = cfg.n() as u32;
    let k = threshold.unwrap_or(cfg.protocol.threshold_k);
    let keys = KeyMaterial::generate(
        cfg.protocol.key_bits,
        k,
        n,
        rng::child_seed(cfg.seed, "keys", 0),
    )
    .map_err(|e| failure("crypto", e.to_string(), 2))?;
    let path = write(&g.output, "keys.json", &keys.to_json())?;
    Ok(json!({
        "key_bits": cfg.protocol.key_bits,
        "threshold_k": k,
        "party_count_n": n,
        "modulus_bits": keys.public.modulus().bits(),
        "fingerprint": format!("{:016x}", keys.public.fingerprint()),
        "file": path,
    }))
}

fn generate(g: &Global) -> CliResult<Value> {
    let cfg = load_config(g)?;
    let pre = experiment::preflight(&cfg)?;
    let generated = generate_participants(&cfg.federation).map_err(ExperimentError::from)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "participant",
        "record",
        "label",
        "attributes",
        "score",
        "x0",
        "x1",
        "x2",
        "x3",
    ];
    let csv_err = |e: csv::Error| failure("io", format!("csv: {e}"), 1);
    w.write_record(header).map_err(csv_err)?;
    for p in &generated {
        for (j, r) in p.dataset.records().iter().enumerate() {
            let mut row = vec![
                p.index.to_string(),
                j.to_string(),
                (r.label as u8).to_string(),
                r.attributes.to_string(),
                r.score.to_string(),
            ];
            row.extend(r.features.iter().map(f64::to_string));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let body = String::from_utf8(
        w.into_inner()
            .map_err(|e| failure("io", e.to_string(), 1))?,
    )
    .expect("csv output is utf-8");
    let csv_path = write(&g.output, "federation.csv", &body)?;
    let meta = json!({
        "federation": cfg.federation,
        "ground_truth": pre.ground_truth,
        "lower_bound": pre.lower_bound,
    });
    let meta_path = write(&g.output, "federation.json", &pretty(&meta))?;
    Ok(json!({
        "participants": generated.len(),
        "records": pre.ground_truth.records,
        "dp_violation": pre.ground_truth.dp_violation,
        "files": [csv_path, meta_path],
    }))
}

fn run(g: &Global) -> CliResult<Value> {
    let cfg = load_config(g)?;
    let out = experiment::run_experiment(&cfg, &g.output)?;
    let r = &out.report;
    Ok(json!({
        "name": r.name,
        "seed": r.seed,
        "released": r.released,
        "dp_violation": r.fairness.dp_violation,
        "ground_truth_dp_violation": r.ground_truth.dp_violation,
        "accuracy_epsilon_fair": r.fairness.accuracy_epsilon_fair,
        "verified": r.verified,
        "output": g.output,
    }))
}

fn attack(g: &Global, trials: Option<u64>) -> CliResult<Value> {
    let cfg = load_config(g)?;
    let params = cfg.attack.clone().unwrap_or(AttackParams {
        trials: 2000,
        worst_case: WorstCase::default(),
    });
    let trials = trials.unwrap_or(params.trials);
    let (summary, result) = experiment::run_attack(&cfg, trials, &params.worst_case)?;
    let csv_path = write(&g.output, "attack.csv", &result.to_csv())?;
    let summary = serde_json::to_value(&summary).expect("summary serializes");
    write(&g.output, "attack.json", &pretty(&summary))?;
    Ok(json!({ "attack": summary, "file": csv_path }))
}

fn bench(g: &Global, sizes: Vec<usize>) -> CliResult<Value> {
    let cfg = load_config(g)?;
    let sizes = if !sizes.is_empty() {
        sizes
    } else if let Some(Sweep::Participants { values }) = &cfg.sweep {
        values.clone()
    } else {
        vec![10, 30, 50, 100]
    };
    let sweep = experiment::run_scaling_sweep(&cfg, &sizes)?;
    let experiment::SweepResult::Participants { rows } = &sweep else {
        unreachable!("scaling sweep yields participant rows");
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| failure("io", format!("csv: {e}"), 1))?;
    }
    let body = String::from_utf8(
        w.into_inner()
            .map_err(|e| failure("io", e.to_string(), 1))?,
    )
    .expect("csv output is utf-8");
    let path = write(&g.output, "sweep.csv", &body)?;
    Ok(json!({ "rows": rows, "c": experiment::scaling_constant(rows), "file": path }))
}

fn verify_config(g: &Global) -> CliResult<Value> {
    let cfg = load_config(g)?;
    let pre = experiment::preflight(&cfg)?;
    Ok(json!({
        "valid": true,
        "name": cfg.name,
        "lower_bound": pre.lower_bound,
        "ground_truth": pre.ground_truth,
        "config": cfg,
    }))
}

fn dispatch(cli: Cli) -> CliResult<Value> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| failure("config", e.to_string(), 2))?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Keygen { threshold } => keygen(g, threshold),
        Command::Generate => generate(g),
        Command::Run => run(g),
        Command::Attack { trials } => attack(g, trials),
        Command::Bench { sizes } => bench(g, sizes),
        Command::VerifyConfig => verify_config(g),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(v) => {
            println!("{}", pretty(&v));
            ExitCode::SUCCESS
        }
        Err(f) => {
            let v = json!({ "error": { "kind": f.kind, "message": f.message } });
            eprintln!("{}", serde_json::to_string(&v).expect("json serializes"));
            ExitCode::from(f.code)
        }
    }
}
