//! Classical fully connected Boltzmann machine: positive-phase energy
//! minimization, sequential Gibbs sampling and contrastive-divergence
//! updates, scored by exact KL divergence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::ising::{self, IsingModel, Moments, SpinConfig};
use crate::target::TargetDistribution;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `h_i = b_i + Σ_{j≠i} w_ij x_j`
pub fn local_field(m: &IsingModel, s: &SpinConfig, i: usize) -> f64 {
    let x = s.spins();
    m.biases()[i]
        + (0..m.n())
            .filter(|&j| j != i)
            .map(|j| m.coupling(i, j) * f64::from(x[j]))
            .sum::<f64>()
}

/// `P(x_i = +1 | x_{−i}) = σ(2 h_i)` in its printed form.
///
/// This is the conditional of `P ∝ exp(+E)`, the complement of the
/// conditional of the model's own `P ∝ exp(−E)`; see
/// [`boltzmann_conditional`].
pub fn gibbs_conditional(m: &IsingModel, s: &SpinConfig, i: usize) -> f64 {
    sigmoid(2.0 * local_field(m, s, i))
}

/// `P(x_i = +1 | x_{−i}) = σ(−2 h_i)`, the conditional of `P ∝ exp(−E)`.
pub fn boltzmann_conditional(m: &IsingModel, s: &SpinConfig, i: usize) -> f64 {
    sigmoid(-2.0 * local_field(m, s, i))
}

/// Which single-site conditional a Gibbs sweep draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalRule {
    /// [`boltzmann_conditional`]; samples the model's own distribution.
    #[default]
    Boltzmann,
    /// [`gibbs_conditional`]; samples `P ∝ exp(+E)`.
    AsPrinted,
}

impl ConditionalRule {
    pub fn prob_up(&self, m: &IsingModel, s: &SpinConfig, i: usize) -> f64 {
        match self {
            ConditionalRule::Boltzmann => boltzmann_conditional(m, s, i),
            ConditionalRule::AsPrinted => gibbs_conditional(m, s, i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GibbsChainState {
    current: SpinConfig,
    sweeps_done: u64,
}

impl GibbsChainState {
    pub fn new(start: SpinConfig) -> Self {
        Self {
            current: start,
            sweeps_done: 0,
        }
    }

    pub fn current(&self) -> &SpinConfig {
        &self.current
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }
}

/// Resamples every node once, in index order.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    m: &IsingModel,
    mut chain: GibbsChainState,
    rule: ConditionalRule,
    rng: &mut R,
) -> GibbsChainState {
    for i in 0..m.n() {
        let up = rng.random::<f64>() < rule.prob_up(m, &chain.current, i);
        chain.current.set(i, if up { 1 } else { -1 });
    }
    chain.sweeps_done += 1;
    chain
}

/// Lowest-energy configuration. Exhaustive (lowest index wins ties) up to
/// the enumeration limit, greedy single-flip descent from `s0` beyond it.
pub fn positive_phase_minimize(m: &IsingModel, s0: &SpinConfig) -> Result<SpinConfig> {
    m.energy(s0)?;
    if m.n() <= ising::MAX_ENUMERATION_NODES {
        let table = m.energy_table()?;
        return Ok(SpinConfig::from_index(crate::target::argmin(&table), m.n()));
    }
    let mut s = s0.clone();
    loop {
        // flipping x_i changes E by −2 x_i h_i
        let best = (0..m.n())
            .map(|i| (i, -2.0 * f64::from(s.get(i)) * local_field(m, &s, i)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, delta)) if delta < 0.0 => s.set(i, -s.get(i)),
            _ => return Ok(s),
        }
    }
}

/// `Σ pT(i)·log(pT(i)/pM(i))`, `+∞` where `pM` misses mass of `pT`.
pub fn kl_divergence(pt: &TargetDistribution, pm: &TargetDistribution) -> Result<f64> {
    if pt.probs().len() != pm.probs().len() {
        return Err(QbmError::DimensionMismatch {
            expected: pt.probs().len(),
            got: pm.probs().len(),
        });
    }
    let mut kl = 0.0;
    for (&t, &m) in pt.probs().iter().zip(pm.probs()) {
        if t == 0.0 {
            continue;
        }
        if m == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += t * (t / m).ln();
    }
    Ok(kl.max(0.0))
}

/// One descent step on KL under `P ∝ exp(−E)`:
/// `θ ← θ − η₁·(E_data[φ] − E_model[φ])` for each sufficient statistic `φ`.
pub fn cd_update(m: &IsingModel, data: &Moments, model: &Moments, eta1: f64) -> IsingModel {
    let mut out = m.clone();
    for (b, (d, q)) in out.biases_mut().iter_mut().zip(data.first.iter().zip(&model.first)) {
        *b -= eta1 * (d - q);
    }
    for (w, (d, q)) in out.couplings_mut().iter_mut().zip(data.pair.iter().zip(&model.pair)) {
        *w -= eta1 * (d - q);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalTrainConfig {
    pub eta1: f64,
    /// Burn-in sweeps `G` before moments are collected.
    pub sweeps: u64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Post-burn-in samples (one per sweep) averaged into the model moments.
    pub moment_samples: usize,
    pub rule: ConditionalRule,
    /// Initial `b, w ~ U(−a, a)`.
    pub coeff_init: f64,
}

impl Default for ClassicalTrainConfig {
    fn default() -> Self {
        Self {
            eta1: 0.1,
            sweeps: 10,
            max_epochs: 100,
            seed: 0,
            moment_samples: 1000,
            rule: ConditionalRule::Boltzmann,
            coeff_init: 1.0,
        }
    }
}

impl ClassicalTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta1 >= 0.0) {
            return Err(QbmError::Config("eta1 must be nonnegative".into()));
        }
        if self.sweeps == 0 || self.moment_samples == 0 {
            return Err(QbmError::Config(
                "sweeps and moment_samples must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalOutcome {
    pub model: IsingModel,
    /// Exact KL at the start and after every epoch.
    pub kl_trace: Vec<f64>,
}

/// Trains on the empirical distribution of `samples` from a random model
/// drawn with `cfg.seed`.
pub fn train_classical(samples: &[SpinConfig], cfg: &ClassicalTrainConfig) -> Result<ClassicalOutcome> {
    let target = empirical_distribution(samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = IsingModel::random(target.n_qubits(), cfg.coeff_init, &mut rng);
    train_classical_from(&target, init, cfg, &mut rng)
}

/// Epochs of positive-phase minimization from a configuration drawn from
/// `target`, Gibbs burn-in, moment estimation and a CD update. Data moments
/// are exact moments of `target`.
pub fn train_classical_from<R: Rng + ?Sized>(
    target: &TargetDistribution,
    init: IsingModel,
    cfg: &ClassicalTrainConfig,
    rng: &mut R,
) -> Result<ClassicalOutcome> {
    cfg.validate()?;
    let n = init.n();
    ising::check_enumerable(n)?;
    if target.probs().len() != 1 << n {
        return Err(QbmError::DimensionMismatch {
            expected: 1 << n,
            got: target.probs().len(),
        });
    }
    let data = Moments::of_distribution(n, target.probs());
    let kl_of = |m: &IsingModel| -> Result<f64> {
        kl_divergence(target, &ising::boltzmann_distribution(m)?)
    };
    let mut model = init;
    let mut kl_trace = vec![kl_of(&model)?];
    for _ in 0..cfg.max_epochs {
        let s0 = SpinConfig::from_index(draw_index(target.probs(), rng), n);
        let start = positive_phase_minimize(&model, &s0)?;
        let estimate = model_moments(&model, start, cfg, rng);
        model = cd_update(&model, &data, &estimate, cfg.eta1);
        kl_trace.push(kl_of(&model)?);
    }
    Ok(ClassicalOutcome { model, kl_trace })
}

/// Inverse-CDF draw of a basis index.
pub fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Negative phase: burn in from `start`, then average one sample per sweep.
pub fn model_moments<R: Rng + ?Sized>(
    m: &IsingModel,
    start: SpinConfig,
    cfg: &ClassicalTrainConfig,
    rng: &mut R,
) -> Moments {
    let mut chain = GibbsChainState::new(start);
    for _ in 0..cfg.sweeps {
        chain = gibbs_sweep(m, chain, cfg.rule, rng);
    }
    let mut draws = Vec::with_capacity(cfg.moment_samples);
    for _ in 0..cfg.moment_samples {
        chain = gibbs_sweep(m, chain, cfg.rule, rng);
        draws.push(chain.current().clone());
    }
    Moments::of_samples(m.n(), &draws)
}

/// Histogram of `samples` over basis indices.
pub fn empirical_distribution(samples: &[SpinConfig]) -> Result<TargetDistribution> {
    let n = samples.first().ok_or(QbmError::Empty("training samples"))?.len();
    ising::check_enumerable(n)?;
    let mut probs = vec![0.0; 1 << n];
    for s in samples {
        probs[s.to_index()] += 1.0;
    }
    let total = samples.len() as f64;
    probs.iter_mut().for_each(|p| *p /= total);
    TargetDistribution::new(probs)
}

#[cfg(test)]
mod tests;
