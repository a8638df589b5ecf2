//! Bilevel training: an inner loop over the circuit angles `(β, γ)` that
//! lowers `⟨H₁⟩`, and an outer loop over the Hamiltonian coefficients
//! `(b, w)` that lowers the distribution error `⟨H₂⟩`.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::ising::IsingModel;
use crate::qaoa::{CostHamiltonian, EvalMode, Evaluator, QaoaParams};
use crate::qsim::{GateSet, NoiseModel};
use crate::target::TargetDistribution;

/// Number of trailing `⟨H₁⟩` values the inner loop inspects for convergence.
pub const INNER_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientEstimator {
    /// `½(f(θ + π/2) − f(θ − π/2))` with the whole parameter shifted at once.
    ParameterShift,
    /// `(f(θ + ε) − f(θ − ε)) / 2ε`
    CentralDifference { epsilon: f64 },
}

impl GradientEstimator {
    pub const DEFAULT_EPSILON: f64 = 1e-4;

    /// Derivative at zero offset of `f`, which evaluates the objective with
    /// the parameter displaced by its argument.
    pub fn derivative(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        match *self {
            GradientEstimator::ParameterShift => 0.5 * (f(FRAC_PI_2) - f(-FRAC_PI_2)),
            GradientEstimator::CentralDifference { epsilon } => {
                (f(epsilon) - f(-epsilon)) / (2.0 * epsilon)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub eta2: f64,
    pub eta3: f64,
    pub inner_max_steps: usize,
    pub outer_max_steps: usize,
    pub global_max_iters: usize,
    pub inner_tol: f64,
    pub outer_tol: f64,
    /// Training stops once `⟨H₂⟩` drops below this value.
    pub target_loss: f64,
    pub mode: EvalMode,
    pub gradient_estimator: GradientEstimator,
    pub gate_set: GateSet,
    pub seed: u64,
    /// `β, γ ~ U(−a, a)`
    pub angle_init: f64,
    /// `b, w ~ U(−a, a)`
    pub coeff_init: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta2: 0.05,
            eta3: 5.0,
            inner_max_steps: 20,
            outer_max_steps: 100,
            global_max_iters: 50,
            inner_tol: 1e-6,
            outer_tol: 1e-6,
            target_loss: 1e-4,
            mode: EvalMode::Exact,
            gradient_estimator: GradientEstimator::ParameterShift,
            gate_set: GateSet::default(),
            seed: 0,
            angle_init: 0.1,
            coeff_init: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(QbmError::Config(what.to_string()));
        if !(self.eta2 >= 0.0 && self.eta3 >= 0.0) {
            return bad("learning rates must be nonnegative");
        }
        if self.inner_max_steps == 0 || self.outer_max_steps == 0 {
            return bad("step budgets must be positive");
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.target_loss >= 0.0) {
            return bad("target_loss must be nonnegative");
        }
        if !(self.angle_init >= 0.0 && self.coeff_init >= 0.0) {
            return bad("init ranges must be nonnegative");
        }
        if let GradientEstimator::CentralDifference { epsilon } = self.gradient_estimator {
            if !(epsilon > 0.0) {
                return bad("finite-difference epsilon must be positive");
            }
        }
        if self.mode == EvalMode::Shots(0) {
            return Err(QbmError::ZeroShots);
        }
        Ok(())
    }

    pub fn evaluator(&self, noise: NoiseModel) -> Evaluator {
        Evaluator::new(noise, self.mode).with_gate_set(self.gate_set)
    }

    /// Random starting point drawn from the configured init ranges.
    pub fn initial_point<R: Rng + ?Sized>(
        &self,
        n_qubits: usize,
        p: usize,
        rng: &mut R,
    ) -> (CostHamiltonian, QaoaParams) {
        let params = QaoaParams::random(p, self.angle_init, rng);
        let model = IsingModel::random(n_qubits, self.coeff_init, rng);
        let h1 = CostHamiltonian::new(model).expect("init model is enumerable");
        (h1, params)
    }
}

/// `∂⟨H₁⟩/∂β_k`, `k` zero-based.
pub fn grad_beta<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    k: usize,
    eval: &Evaluator,
    estimator: GradientEstimator,
    rng: &mut R,
) -> f64 {
    estimator.derivative(|d| {
        let mut shifted = params.clone();
        shifted.beta_mut()[k] += d;
        eval.expected_h1(h1, &shifted, rng)
    })
}

/// `∂⟨H₁⟩/∂γ_k`, `k` zero-based. Only the circuit angle moves; the
/// observable stays `H₁`.
pub fn grad_gamma<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    k: usize,
    eval: &Evaluator,
    estimator: GradientEstimator,
    rng: &mut R,
) -> f64 {
    estimator.derivative(|d| {
        let mut shifted = params.clone();
        shifted.gamma_mut()[k] += d;
        eval.expected_h1(h1, &shifted, rng)
    })
}

/// `∂⟨H₂⟩/∂θ_k` for Hamiltonian parameter `k` (biases first, then couplings
/// in pair order).
pub fn grad_theta<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    k: usize,
    target: &TargetDistribution,
    eval: &Evaluator,
    estimator: GradientEstimator,
    rng: &mut R,
) -> f64 {
    estimator.derivative(|d| eval.mse_loss(&h1.with_param_shift(k, d), params, target, rng))
}

pub fn grad_b<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    i: usize,
    target: &TargetDistribution,
    eval: &Evaluator,
    estimator: GradientEstimator,
    rng: &mut R,
) -> f64 {
    grad_theta(h1, params, i, target, eval, estimator, rng)
}

pub fn grad_w<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    i: usize,
    j: usize,
    target: &TargetDistribution,
    eval: &Evaluator,
    estimator: GradientEstimator,
    rng: &mut R,
) -> f64 {
    let k = h1.n_qubits() + h1.model().pair_index(i, j);
    grad_theta(h1, params, k, target, eval, estimator, rng)
}

/// One row of the shift-versus-finite-difference comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientComparison {
    /// `beta[k]`, `gamma[k]`, `b[i]` or `w[i,j]`.
    pub name: String,
    pub shift: f64,
    pub central: f64,
}

impl GradientComparison {
    pub fn abs_diff(&self) -> f64 {
        (self.shift - self.central).abs()
    }
}

/// Every gradient component under both estimators in exact mode: angle
/// gradients of `⟨H₁⟩`, coefficient gradients of `⟨H₂⟩`.
pub fn gradient_report(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    target: &TargetDistribution,
    noise: NoiseModel,
    gate_set: GateSet,
    epsilon: f64,
) -> Vec<GradientComparison> {
    let eval = Evaluator::exact(noise).with_gate_set(gate_set);
    let shift = GradientEstimator::ParameterShift;
    let fd = GradientEstimator::CentralDifference { epsilon };
    // exact mode never draws
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut rows = Vec::new();
    for k in 0..params.p() {
        rows.push(GradientComparison {
            name: format!("beta[{k}]"),
            shift: grad_beta(h1, params, k, &eval, shift, &mut rng),
            central: grad_beta(h1, params, k, &eval, fd, &mut rng),
        });
        rows.push(GradientComparison {
            name: format!("gamma[{k}]"),
            shift: grad_gamma(h1, params, k, &eval, shift, &mut rng),
            central: grad_gamma(h1, params, k, &eval, fd, &mut rng),
        });
    }
    let n = h1.n_qubits();
    let names = (0..n)
        .map(|i| format!("b[{i}]"))
        .chain(crate::ising::pairs(n).map(|(i, j)| format!("w[{i},{j}]")));
    for (k, name) in names.enumerate() {
        rows.push(GradientComparison {
            name,
            shift: grad_theta(h1, params, k, target, &eval, shift, &mut rng),
            central: grad_theta(h1, params, k, target, &eval, fd, &mut rng),
        });
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    /// Lowest-`⟨H₁⟩` angles seen.
    pub params: QaoaParams,
    pub best_h1: f64,
    /// `⟨H₁⟩` at the starting point and after every step.
    pub trace: Vec<f64>,
}

/// Gradient descent on `(β, γ)` with the Hamiltonian held fixed.
pub fn inner_loop<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params0: &QaoaParams,
    cfg: &TrainConfig,
    eval: &Evaluator,
    rng: &mut R,
) -> InnerResult {
    let mut params = params0.clone();
    let first = eval.expected_h1(h1, &params, rng);
    let mut trace = vec![first];
    let mut best = (first, params.clone());
    for _ in 0..cfg.inner_max_steps {
        let gb: Vec<f64> = (0..params.p())
            .map(|k| grad_beta(h1, &params, k, eval, cfg.gradient_estimator, rng))
            .collect();
        let gg: Vec<f64> = (0..params.p())
            .map(|k| grad_gamma(h1, &params, k, eval, cfg.gradient_estimator, rng))
            .collect();
        for k in 0..params.p() {
            params.beta_mut()[k] -= cfg.eta2 * gb[k];
            params.gamma_mut()[k] -= cfg.eta2 * gg[k];
        }
        let e = eval.expected_h1(h1, &params, rng);
        trace.push(e);
        if e < best.0 {
            best = (e, params.clone());
        }
        if window_settled(&trace, cfg.inner_tol) {
            break;
        }
    }
    InnerResult {
        params: best.1,
        best_h1: best.0,
        trace,
    }
}

fn window_settled(trace: &[f64], tol: f64) -> bool {
    if trace.len() < INNER_WINDOW {
        return false;
    }
    let tail = &trace[trace.len() - INNER_WINDOW..];
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo < tol
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterResult {
    /// Lowest-`⟨H₂⟩` Hamiltonian seen.
    pub h1: CostHamiltonian,
    pub best_h2: f64,
    /// `⟨H₂⟩` at the starting point and after every step.
    pub trace: Vec<f64>,
}

/// Gradient descent on `(b, w)` with the angles held fixed.
pub fn outer_loop<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    target: &TargetDistribution,
    cfg: &TrainConfig,
    eval: &Evaluator,
    rng: &mut R,
) -> OuterResult {
    let mut current = h1.clone();
    let first = eval.mse_loss(&current, params, target, rng);
    let mut trace = vec![first];
    let mut best = (first, current.clone());
    if first < cfg.target_loss {
        return OuterResult {
            h1: best.1,
            best_h2: best.0,
            trace,
        };
    }
    for _ in 0..cfg.outer_max_steps {
        let n_params = current.model().n_params();
        let grads: Vec<f64> = (0..n_params)
            .map(|k| grad_theta(&current, params, k, target, eval, cfg.gradient_estimator, rng))
            .collect();
        let mut model = current.model().clone();
        for (k, g) in grads.iter().enumerate() {
            *model.param_mut(k) -= cfg.eta3 * g;
        }
        current = CostHamiltonian::new(model).expect("update keeps dimensions");
        let loss = eval.mse_loss(&current, params, target, rng);
        let prev = *trace.last().expect("trace starts nonempty");
        trace.push(loss);
        if loss < best.0 {
            best = (loss, current.clone());
        }
        if loss < cfg.target_loss || (loss - prev).abs() < cfg.outer_tol {
            break;
        }
    }
    OuterResult {
        h1: best.1,
        best_h2: best.0,
        trace,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// `⟨H₂⟩` of the Hamiltonian the outer loop handed back.
    pub h2: f64,
    pub inner_h1: Vec<f64>,
    pub outer_h2: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub model: IsingModel,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainTrace {
    /// `⟨H₂⟩` of the random starting point.
    pub initial_h2: f64,
    pub iterations: Vec<IterationRecord>,
}

impl TrainTrace {
    /// Raw `⟨H₂⟩` curve: the starting loss followed by one value per global
    /// iteration.
    pub fn h2_curve(&self) -> Vec<f64> {
        std::iter::once(self.initial_h2)
            .chain(self.iterations.iter().map(|r| r.h2))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub h1: CostHamiltonian,
    pub params: QaoaParams,
    /// Lowest `⟨H₂⟩` observed anywhere in training, achieved by `(h1, params)`.
    pub loss: f64,
    pub trace: TrainTrace,
}

/// Sequential bilevel scheme from a random starting point seeded by
/// `cfg.seed`.
pub fn bilevel_train(
    target: &TargetDistribution,
    p: usize,
    cfg: &TrainConfig,
    noise: NoiseModel,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if p == 0 {
        return Err(QbmError::Config("p must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (h1, params) = cfg.initial_point(target.n_qubits(), p, &mut rng);
    bilevel_train_from(target, h1, params, cfg, noise, &mut rng)
}

/// Bilevel scheme from an explicit starting point.
pub fn bilevel_train_from<R: Rng + ?Sized>(
    target: &TargetDistribution,
    mut h1: CostHamiltonian,
    mut params: QaoaParams,
    cfg: &TrainConfig,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if target.probs().len() != 1 << h1.n_qubits() {
        return Err(QbmError::DimensionMismatch {
            expected: 1 << h1.n_qubits(),
            got: target.probs().len(),
        });
    }
    let eval = cfg.evaluator(noise);
    let start = Instant::now();
    let initial_h2 = eval.mse_loss(&h1, &params, target, rng);
    let mut best = (initial_h2, h1.clone(), params.clone());
    let mut iterations = Vec::new();
    for _ in 0..cfg.global_max_iters {
        if best.0 < cfg.target_loss {
            break;
        }
        let inner = inner_loop(&h1, &params, cfg, &eval, rng);
        params = inner.params;
        let outer = outer_loop(&h1, &params, target, cfg, &eval, rng);
        if outer.trace[0] < best.0 {
            best = (outer.trace[0], h1.clone(), params.clone());
        }
        h1 = outer.h1;
        if outer.best_h2 < best.0 {
            best = (outer.best_h2, h1.clone(), params.clone());
        }
        iterations.push(IterationRecord {
            h2: outer.best_h2,
            inner_h1: inner.trace,
            outer_h2: outer.trace,
            beta: params.beta().to_vec(),
            gamma: params.gamma().to_vec(),
            model: h1.model().clone(),
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
    }
    let (loss, h1, params) = best;
    Ok(TrainOutcome {
        h1,
        params,
        loss,
        trace: TrainTrace {
            initial_h2,
            iterations,
        },
    })
}
