use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbm::classical_bm::ClassicalTrainConfig;
use qbm::experiment::{self, BatchSpec, ClassicalSpec, ImageGroup, ImageSpec};
use qbm::qaoa::EvalMode;
use qbm::qsim::NoiseModel;
use qbm::store;
use qbm::target::{self, BLOCK_COUNT};
use qbm::train::TrainConfig;
use qbm::{QbmError, Result};

#[derive(Parser)]
#[command(name = "qbm", version, about = "Fully connected quantum Boltzmann machine experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-run training on a one-point target.
    Convergence(BatchArgs),
    /// Convergence batches under depolarizing noise (both default levels
    /// unless --p1/--p2 pick one).
    Noise(BatchArgs),
    /// Block-by-block training and generation of a binary grid image.
    Image(ImageArgs),
    /// Sample from stored kernels.
    Generate(GenerateArgs),
    /// Classical contrastive-divergence baseline.
    ClassicalBaseline(ClassicalArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// JSON file overriding training defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Timestamp stored in parameter records (default: SOURCE_DATE_EPOCH, then now).
    #[arg(long)]
    created_at: Option<String>,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = experiment::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value = experiment::DEFAULT_TARGET)]
    target: String,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    /// Train on shot frequencies instead of exact probabilities.
    #[arg(long)]
    shots: Option<u64>,
    /// Estimate the reported final distributions from this many shots.
    #[arg(long)]
    final_shots: Option<u64>,
    #[arg(long, default_value_t = experiment::stats::DEFAULT_WINDOW)]
    window: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ImageArgs {
    /// Grid file (8 lines of 20 '0'/'1'); defaults to the bundled "qubit" grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Noise of the noisy group.
    #[arg(long, default_value_t = experiment::NOISE_LEVELS[0].0)]
    p1: f64,
    #[arg(long, default_value_t = experiment::NOISE_LEVELS[0].1)]
    p2: f64,
    /// Shot counts to reconstruct with.
    #[arg(long, value_delimiter = ',', default_values_t = experiment::DEFAULT_SHOT_SWEEP)]
    shots: Vec<u64>,
    /// Print the block plan and exit without training or writing files.
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, conflicts_with = "archive", required_unless_present = "archive")]
    record: Option<PathBuf>,
    /// Verified archive; 40·k records are read as k grid images.
    #[arg(long)]
    archive: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    shots: u64,
    /// JSON training config; only its gate set is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ClassicalArgs {
    #[arg(long, default_value_t = experiment::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value = experiment::DEFAULT_TARGET)]
    target: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// JSON file overriding classical training defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| {
            QbmError::Config(format!("{}: {e}", p.display()))
        }),
    }
}

fn out_dir(common: &CommonArgs, default: &str) -> PathBuf {
    common.out_dir.clone().unwrap_or_else(|| PathBuf::from("results").join(default))
}

fn batch_spec(a: &BatchArgs, noise: NoiseModel) -> Result<BatchSpec> {
    let mut train: TrainConfig = read_json(a.common.config.as_deref())?;
    if let Some(m) = a.shots {
        train.mode = EvalMode::Shots(m);
    }
    let target = target::one_point(&a.target, a.target.len())?;
    Ok(BatchSpec {
        runs: a.runs,
        train,
        master_seed: a.common.seed,
        window: a.window,
        final_shots: a.final_shots,
        ..BatchSpec::new(target, a.p, noise)
    })
}

fn print_summary(s: &experiment::RunSummary) {
    println!(
        "p={} noise=({}, {}) runs={}: P({}) = {:.4} ± {:.4}, top-ranked in {}/{} runs",
        s.p, s.noise.p1, s.noise.p2, s.runs, s.target_state, s.target.mean_prob, s.target.std_prob,
        s.target_top_runs, s.runs
    );
    for t in &s.top5 {
        println!("  {}  {:.4} ± {:.4}", t.state, t.mean_prob, t.std_prob);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convergence(a) => {
            let noise = NoiseModel::new(a.p1.unwrap_or(0.0), a.p2.unwrap_or(0.0))?;
            let spec = batch_spec(&a, noise)?;
            let created_at = experiment::resolve_created_at(a.common.created_at.as_deref())?;
            let dir = out_dir(&a.common, "convergence");
            let summary = experiment::run_convergence(&spec, Some(&dir), &created_at)?;
            print_summary(&summary);
            println!("wrote {}", dir.display());
        }
        Command::Noise(a) => {
            let levels = match (a.p1, a.p2) {
                (None, None) => experiment::NOISE_LEVELS
                    .iter()
                    .map(|&(p1, p2)| NoiseModel::new(p1, p2))
                    .collect::<Result<Vec<_>>>()?,
                (p1, p2) => vec![NoiseModel::new(p1.unwrap_or(0.0), p2.unwrap_or(0.0))?],
            };
            let spec = batch_spec(&a, NoiseModel::NOISELESS)?;
            let created_at = experiment::resolve_created_at(a.common.created_at.as_deref())?;
            let dir = out_dir(&a.common, "noise");
            for s in experiment::run_noise(&spec, &levels, Some(&dir), &created_at)? {
                print_summary(&s);
            }
            println!("wrote {}", dir.display());
        }
        Command::Image(a) => {
            let grid = match &a.grid {
                Some(p) => target::load_grid(&std::fs::read_to_string(p)?)?,
                None => target::reference_grid(),
            };
            let mut groups = ImageGroup::defaults();
            groups[1].noise = NoiseModel::new(a.p1, a.p2)?;
            let spec = ImageSpec {
                p: a.p,
                groups,
                train: read_json(a.common.config.as_deref())?,
                master_seed: a.common.seed,
                shot_sweep: a.shots.clone(),
                dry_run: a.dry_run,
                ..ImageSpec::new(grid)
            };
            let created_at = experiment::resolve_created_at(a.common.created_at.as_deref())?;
            let dir = out_dir(&a.common, "image");
            let report = experiment::run_image(&spec, (!a.dry_run).then_some(dir.as_path()), &created_at)?;
            if a.dry_run {
                println!("{} blocks per group, {} groups:", report.plan.len(), spec.groups.len());
                for (k, bits) in report.plan.iter().enumerate() {
                    println!("  block {k:2}: {bits}");
                }
                return Ok(());
            }
            for g in &report.groups {
                for r in &g.reconstructions {
                    println!("{} {:>5} shots: {} mismatched cells", g.name, r.shots, r.mismatches);
                }
            }
            println!("wrote {}", dir.display());
        }
        Command::Generate(a) => {
            let train: TrainConfig = read_json(a.config.as_deref())?;
            if let Some(path) = &a.record {
                let record = store::load(path)?;
                let counts = experiment::sample_record(&record, a.shots, train.gate_set)?;
                println!("state,count");
                for (i, c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
                    println!("{},{c}", target::format_bitstring(i, record.n_qubits));
                }
                let modal = experiment::modal_outcome(&counts);
                println!("modal {}", target::format_bitstring(modal, record.n_qubits));
            } else if let Some(dir) = &a.archive {
                let records = store::load_archive(dir)?;
                if records.len() % BLOCK_COUNT == 0 {
                    for group in records.chunks(BLOCK_COUNT) {
                        print!("{}", experiment::reconstruct(group, a.shots, train.gate_set)?);
                        println!();
                    }
                } else {
                    for (k, bits) in experiment::generate_blocks(&records, a.shots, train.gate_set)?
                        .iter()
                        .enumerate()
                    {
                        println!("{} {bits}", store::record_file_name(k));
                    }
                }
            }
        }
        Command::ClassicalBaseline(a) => {
            let cfg: ClassicalTrainConfig = read_json(a.config.as_deref())?;
            let spec = ClassicalSpec {
                target: target::one_point(&a.target, a.target.len())?,
                runs: a.runs,
                cfg,
                master_seed: a.seed,
            };
            let dir = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("results/classical"));
            let s = experiment::run_classical(&spec, Some(&dir))?;
            println!(
                "KL {:.4} -> {:.4} (mean over {} runs); best KL at most half the initial in {}/{} runs",
                s.kl_mean[0],
                s.kl_mean.last().copied().unwrap_or(f64::NAN),
                s.runs,
                s.halved_runs,
                s.runs
            );
            println!("wrote {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
