//! Experiment harness: seeded multi-run batches, aggregation and file output
//! for the convergence, noise, image and classical-baseline experiments.
//!
//! Run `r` of a batch with master seed `s` trains with seed `s + r`
//! (wrapping). Output files never contain wall-clock data, so equal inputs
//! give byte-identical CSV and JSON.

pub mod emit;
pub mod stats;
pub mod svg;

use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classical_bm::{self, ClassicalTrainConfig};
use crate::error::{QbmError, Result};
use crate::ising::IsingModel;
use crate::par;
use crate::qaoa::Evaluator;
use crate::qsim::{GateSet, NoiseModel};
use crate::store::{self, ParamRecord};
use crate::target::{self, GridImage, TargetDistribution};
use crate::train::{self, TrainConfig, TrainOutcome};
use stats::{CurveSummary, StateStat};

pub const DEFAULT_RUNS: usize = 20;
pub const DEFAULT_TARGET: &str = "1001";
pub const NOISE_LEVELS: [(f64, f64); 2] = [(0.005, 0.02), (0.01, 0.04)];
pub const DEFAULT_SHOT_SWEEP: [u64; 6] = [1, 3, 5, 10, 100, 1000];
const TOP_K: usize = 5;

pub fn run_seed(master: u64, run: usize) -> u64 {
    master.wrapping_add(run as u64)
}

/// RNG for sampling from a trained circuit: the run's seed on a stream
/// separate from training (which uses stream 0).
pub fn sampling_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_add(1));
    rng
}

/// `flag`, else `SOURCE_DATE_EPOCH`, else the current time, as RFC 3339.
pub fn resolve_created_at(flag: Option<&str>) -> Result<String> {
    if let Some(s) = flag {
        return Ok(s.to_string());
    }
    let when = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => {
            let secs: i64 = v
                .trim()
                .parse()
                .map_err(|_| QbmError::Config(format!("SOURCE_DATE_EPOCH={v:?} is not an integer")))?;
            DateTime::<Utc>::from_timestamp(secs, 0)
                .ok_or_else(|| QbmError::Config(format!("SOURCE_DATE_EPOCH={v} out of range")))?
        }
        Err(_) => Utc::now(),
    };
    Ok(when.to_rfc3339_opts(SecondsFormat::Secs, true))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSpec {
    pub target: TargetDistribution,
    pub p: usize,
    pub runs: usize,
    pub noise: NoiseModel,
    pub train: TrainConfig,
    pub master_seed: u64,
    pub window: usize,
    /// Estimate final distributions from this many shots instead of exactly.
    pub final_shots: Option<u64>,
}

impl BatchSpec {
    pub fn new(target: TargetDistribution, p: usize, noise: NoiseModel) -> Self {
        Self {
            target,
            p,
            runs: DEFAULT_RUNS,
            noise,
            train: TrainConfig::default(),
            master_seed: 0,
            window: stats::DEFAULT_WINDOW,
            final_shots: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(QbmError::Config("runs must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(QbmError::Config("p must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(QbmError::Config("moving-average window must be at least 1".into()));
        }
        if self.final_shots == Some(0) {
            return Err(QbmError::ZeroShots);
        }
        self.train.validate()
    }

    fn evaluator(&self) -> Evaluator {
        self.train.evaluator(self.noise)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub outcome: TrainOutcome,
    /// Final circuit distribution, exact unless the batch asks for shots.
    pub final_probs: Vec<f64>,
}

/// Trains `spec.runs` independent models, concurrently when the `parallel`
/// feature is on. Results come back in run order.
pub fn run_batch(spec: &BatchSpec) -> Result<Vec<RunResult>> {
    spec.validate()?;
    let eval = spec.evaluator();
    par::map_indexed(spec.runs, |run| {
        let seed = run_seed(spec.master_seed, run);
        let cfg = TrainConfig {
            seed,
            ..spec.train.clone()
        };
        let outcome = train::bilevel_train(&spec.target, spec.p, &cfg, spec.noise)?;
        let probs = eval.probabilities(&outcome.h1, &outcome.params);
        let final_probs = match spec.final_shots {
            None => probs,
            Some(m) => {
                let counts = eval.generate(&outcome.h1, &outcome.params, m, &mut sampling_rng(seed, 0))?;
                counts.iter().map(|&k| k as f64 / m as f64).collect()
            }
        };
        Ok(RunResult {
            run,
            seed,
            outcome,
            final_probs,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub p: usize,
    pub runs: usize,
    pub noise: NoiseModel,
    pub master_seed: u64,
    pub train: TrainConfig,
    pub target_state: String,
    pub target: StateStat,
    /// Runs whose final distribution ranks the target first.
    pub target_top_runs: usize,
    pub top5: Vec<StateStat>,
    pub final_losses: Vec<f64>,
    pub curves: CurveSummary,
}

impl RunSummary {
    /// Mean probability of the best-ranked state other than the target.
    pub fn runner_up_mean(&self) -> f64 {
        self.top5
            .iter()
            .find(|s| s.state != self.target_state)
            .map_or(0.0, |s| s.mean_prob)
    }
}

pub fn summarize(spec: &BatchSpec, results: &[RunResult]) -> Result<RunSummary> {
    let n = spec.target.n_qubits();
    let target_index = spec.target.argmax();
    let dists: Vec<Vec<f64>> = results.iter().map(|r| r.final_probs.clone()).collect();
    let ranked = stats::ranked_states(&dists, n)?;
    let target_state = target::format_bitstring(target_index, n);
    let target = ranked
        .iter()
        .find(|s| s.state == target_state)
        .cloned()
        .expect("every state is ranked");
    let target_top_runs = dists
        .iter()
        .filter(|d| target::argmax(d) == target_index)
        .count();
    let traces: Vec<Vec<f64>> = results.iter().map(|r| r.outcome.trace.h2_curve()).collect();
    Ok(RunSummary {
        p: spec.p,
        runs: spec.runs,
        noise: spec.noise,
        master_seed: spec.master_seed,
        train: spec.train.clone(),
        target_state,
        target,
        target_top_runs,
        top5: ranked.into_iter().take(TOP_K).collect(),
        final_losses: results.iter().map(|r| r.outcome.loss).collect(),
        curves: stats::aggregate(&traces, spec.window)?,
    })
}

pub fn records_of(results: &[RunResult], noise: NoiseModel, created_at: &str) -> Vec<ParamRecord> {
    results
        .iter()
        .map(|r| {
            ParamRecord::new(
                &r.outcome.h1,
                &r.outcome.params,
                noise,
                r.seed,
                r.outcome.loss,
                created_at,
            )
        })
        .collect()
}

/// Writes `curves.csv`, `top5.csv`, `summary.json`, `curves.svg` and a
/// checksummed `records/` archive into `dir`.
pub fn emit_batch(summary: &RunSummary, records: &[ParamRecord], dir: &Path, title: &str) -> Result<()> {
    emit::write_text(dir, "curves.csv", &emit::curves_csv(&summary.curves))?;
    emit::write_text(dir, "top5.csv", &emit::states_csv(&summary.top5))?;
    emit::write_json(dir, "summary.json", summary)?;
    let c = &summary.curves;
    let chart = svg::line_chart(
        title,
        "global iteration",
        "MSE",
        &[
            svg::Series {
                name: "raw MSE",
                y: &c.mse_mean,
                band: Some(&c.mse_std),
            },
            svg::Series {
                name: "moving average",
                y: &c.mse_mavg,
                band: Some(&c.mse_mavg_std),
            },
            svg::Series {
                name: "minimum so far",
                y: &c.mse_min,
                band: Some(&c.mse_min_std),
            },
        ],
    );
    emit::write_text(dir, "curves.svg", &chart)?;
    store::archive_set(records, &dir.join("records"))?;
    Ok(())
}

fn noise_label(noise: NoiseModel) -> String {
    if noise.is_noiseless() {
        "noiseless".to_string()
    } else {
        format!("p1={} p2={}", noise.p1, noise.p2)
    }
}

/// Multi-run training on one target; writes files when `out` is given.
pub fn run_convergence(spec: &BatchSpec, out: Option<&Path>, created_at: &str) -> Result<RunSummary> {
    let results = run_batch(spec)?;
    let summary = summarize(spec, &results)?;
    if let Some(dir) = out {
        let title = format!(
            "target {} p={} {} ({} runs)",
            summary.target_state,
            spec.p,
            noise_label(spec.noise),
            spec.runs
        );
        emit_batch(&summary, &records_of(&results, spec.noise, created_at), dir, &title)?;
    }
    Ok(summary)
}

/// Subdirectory name of one noise level.
pub fn level_dir(noise: NoiseModel) -> String {
    format!("p1_{}_p2_{}", noise.p1, noise.p2)
}

/// One convergence batch per noise level, each in its own subdirectory.
pub fn run_noise(
    base: &BatchSpec,
    levels: &[NoiseModel],
    out: Option<&Path>,
    created_at: &str,
) -> Result<Vec<RunSummary>> {
    if levels.is_empty() {
        return Err(QbmError::Empty("noise levels"));
    }
    let summaries = levels
        .iter()
        .map(|&noise| {
            let spec = BatchSpec { noise, ..base.clone() };
            let dir = out.map(|d| d.join(level_dir(noise)));
            run_convergence(&spec, dir.as_deref(), created_at)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = out {
        emit::write_json(dir, "noise_summary.json", &summaries)?;
    }
    Ok(summaries)
}

/// Lowest basis index among the most frequent outcomes.
pub fn modal_outcome(counts: &[u64]) -> usize {
    target::argmax(counts)
}

/// Generation: for each record, draws `shots` outcomes from its circuit and
/// keeps the modal one. Sampling is seeded by the record's own seed, so the
/// result depends only on the records and `shots`.
pub fn generate_blocks(records: &[ParamRecord], shots: u64, gate_set: GateSet) -> Result<Vec<String>> {
    records
        .iter()
        .map(|r| {
            let counts = sample_record(r, shots, gate_set)?;
            Ok(target::format_bitstring(modal_outcome(&counts), r.n_qubits))
        })
        .collect()
}

pub fn reconstruct(records: &[ParamRecord], shots: u64, gate_set: GateSet) -> Result<GridImage> {
    target::assemble(&generate_blocks(records, shots, gate_set)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageGroup {
    pub name: String,
    pub noise: NoiseModel,
}

impl ImageGroup {
    pub fn defaults() -> Vec<ImageGroup> {
        vec![
            ImageGroup {
                name: "noiseless".into(),
                noise: NoiseModel::NOISELESS,
            },
            ImageGroup {
                name: "noisy".into(),
                noise: NoiseModel {
                    p1: NOISE_LEVELS[0].0,
                    p2: NOISE_LEVELS[0].1,
                },
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSpec {
    pub grid: GridImage,
    pub p: usize,
    pub groups: Vec<ImageGroup>,
    pub train: TrainConfig,
    pub master_seed: u64,
    pub shot_sweep: Vec<u64>,
    pub dry_run: bool,
}

impl ImageSpec {
    pub fn new(grid: GridImage) -> Self {
        Self {
            grid,
            p: 1,
            groups: ImageGroup::defaults(),
            train: TrainConfig::default(),
            master_seed: 0,
            shot_sweep: DEFAULT_SHOT_SWEEP.to_vec(),
            dry_run: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub shots: u64,
    pub mismatches: usize,
    /// Rendered grid, one line per row.
    pub grid: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageGroupReport {
    pub name: String,
    pub noise: NoiseModel,
    pub final_losses: Vec<f64>,
    /// Exact probability of each block's own pattern under its kernel.
    pub target_probs: Vec<f64>,
    pub reconstructions: Vec<Reconstruction>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageReport {
    pub p: usize,
    pub master_seed: u64,
    pub train: TrainConfig,
    /// Block bitstrings in scan order.
    pub plan: Vec<String>,
    pub groups: Vec<ImageGroupReport>,
    #[serde(skip)]
    pub records: Vec<ParamRecord>,
}

/// Trains one kernel per block and group, archives every kernel and
/// reconstructs the grid for each shot count. A dry run only returns the
/// block plan.
pub fn run_image(spec: &ImageSpec, out: Option<&Path>, created_at: &str) -> Result<ImageReport> {
    let plan: Vec<String> = target::decompose(&spec.grid)
        .blocks
        .iter()
        .map(|b| b.bitstring())
        .collect();
    let mut report = ImageReport {
        p: spec.p,
        master_seed: spec.master_seed,
        train: spec.train.clone(),
        plan,
        groups: Vec::new(),
        records: Vec::new(),
    };
    if spec.dry_run {
        return Ok(report);
    }
    spec.train.validate()?;
    if spec.groups.is_empty() {
        return Err(QbmError::Empty("image groups"));
    }
    if spec.shot_sweep.contains(&0) {
        return Err(QbmError::ZeroShots);
    }
    let blocks = report.plan.len();
    let trained = par::map_indexed(spec.groups.len() * blocks, |k| {
        let (g, b) = (k / blocks, k % blocks);
        let noise = spec.groups[g].noise;
        let seed = run_seed(spec.master_seed, k);
        let cfg = TrainConfig {
            seed,
            ..spec.train.clone()
        };
        let target = target::one_point(&report.plan[b], 4)?;
        let out = train::bilevel_train(&target, spec.p, &cfg, noise)?;
        let prob = spec.train.evaluator(noise).probabilities(&out.h1, &out.params)[target.argmax()];
        let record = ParamRecord::new(&out.h1, &out.params, noise, seed, out.loss, created_at);
        Ok((record, prob))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (records, probs): (Vec<ParamRecord>, Vec<f64>) = trained.into_iter().unzip();

    let mut panels = Vec::new();
    for (g, group) in spec.groups.iter().enumerate() {
        let span = g * blocks..(g + 1) * blocks;
        let mut reconstructions = Vec::new();
        for &shots in &spec.shot_sweep {
            let grid = reconstruct(&records[span.clone()], shots, spec.train.gate_set)?;
            panels.push((format!("{} {shots} shots", group.name), grid.clone()));
            reconstructions.push(Reconstruction {
                shots,
                mismatches: grid.mismatches(&spec.grid),
                grid: grid.render(),
            });
        }
        report.groups.push(ImageGroupReport {
            name: group.name.clone(),
            noise: group.noise,
            final_losses: records[span.clone()].iter().map(|r| r.final_loss).collect(),
            target_probs: probs[span].to_vec(),
            reconstructions,
        });
    }
    report.records = records;

    if let Some(dir) = out {
        emit::write_json(dir, "image_summary.json", &report)?;
        let mut csv = String::from("group,shots,mismatches\n");
        for g in &report.groups {
            for r in &g.reconstructions {
                csv.push_str(&format!("{},{},{}\n", g.name, r.shots, r.mismatches));
            }
            for r in &g.reconstructions {
                emit::write_text(dir, &format!("reconstruction_{}_{}.txt", g.name, r.shots), &r.grid)?;
            }
        }
        emit::write_text(dir, "reconstruction.csv", &csv)?;
        emit::write_text(dir, "target.txt", &spec.grid.render())?;
        emit::write_text(dir, "reconstruction.svg", &svg::grid_panels("block-by-block generation", &panels))?;
        store::archive_set(&report.records, &dir.join("records"))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSpec {
    pub target: TargetDistribution,
    pub runs: usize,
    pub cfg: ClassicalTrainConfig,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalSummary {
    pub runs: usize,
    pub master_seed: u64,
    pub cfg: ClassicalTrainConfig,
    pub kl_mean: Vec<f64>,
    pub kl_std: Vec<f64>,
    /// Mean over runs of each run's minimum so far.
    pub kl_min: Vec<f64>,
    pub initial_kl: Vec<f64>,
    pub best_kl: Vec<f64>,
    /// Runs whose best KL is at most half the initial KL.
    pub halved_runs: usize,
}

/// Contrastive-divergence training of the classical machine, `runs` seeds.
pub fn run_classical(spec: &ClassicalSpec, out: Option<&Path>) -> Result<ClassicalSummary> {
    if spec.runs == 0 {
        return Err(QbmError::Config("runs must be at least 1".into()));
    }
    spec.cfg.validate()?;
    let n = spec.target.n_qubits();
    let traces = par::map_indexed(spec.runs, |run| {
        let seed = run_seed(spec.master_seed, run);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = IsingModel::random(n, spec.cfg.coeff_init, &mut rng);
        let cfg = ClassicalTrainConfig {
            seed,
            ..spec.cfg.clone()
        };
        classical_bm::train_classical_from(&spec.target, init, &cfg, &mut rng).map(|o| o.kl_trace)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let len = traces[0].len();
    let mins: Vec<Vec<f64>> = traces.iter().map(|t| stats::running_min(t)).collect();
    let (mut kl_mean, mut kl_std, mut kl_min) = (vec![], vec![], vec![]);
    for i in 0..len {
        let col: Vec<f64> = traces.iter().map(|t| t[i]).collect();
        let (m, s) = stats::mean_std(&col);
        kl_mean.push(m);
        kl_std.push(s);
        kl_min.push(stats::mean_std(&mins.iter().map(|t| t[i]).collect::<Vec<_>>()).0);
    }
    let initial_kl: Vec<f64> = traces.iter().map(|t| t[0]).collect();
    let best_kl: Vec<f64> = mins.iter().map(|t| *t.last().expect("nonempty")).collect();
    let halved_runs = initial_kl.iter().zip(&best_kl).filter(|(i, b)| **b <= 0.5 * **i).count();
    let summary = ClassicalSummary {
        runs: spec.runs,
        master_seed: spec.master_seed,
        cfg: spec.cfg.clone(),
        kl_mean,
        kl_std,
        kl_min,
        initial_kl,
        best_kl,
        halved_runs,
    };
    if let Some(dir) = out {
        emit::write_text(dir, "kl.csv", &emit::kl_csv(&summary.kl_mean, &summary.kl_std, &summary.kl_min))?;
        emit::write_json(dir, "classical_summary.json", &summary)?;
        let chart = svg::line_chart(
            "classical contrastive divergence",
            "epoch",
            "KL divergence",
            &[
                svg::Series {
                    name: "mean KL",
                    y: &summary.kl_mean,
                    band: Some(&summary.kl_std),
                },
                svg::Series {
                    name: "minimum so far",
                    y: &summary.kl_min,
                    band: None,
                },
            ],
        );
        emit::write_text(dir, "kl.svg", &chart)?;
    }
    Ok(summary)
}

/// Counts from `shots` draws of one stored kernel.
pub fn sample_record(record: &ParamRecord, shots: u64, gate_set: GateSet) -> Result<Vec<u64>> {
    let eval = Evaluator::exact(record.noise).with_gate_set(gate_set);
    let counts = eval.generate(
        &record.hamiltonian()?,
        &record.params()?,
        shots,
        &mut sampling_rng(record.seed, shots),
    )?;
    Ok(counts)
}

#[cfg(test)]
mod tests;
