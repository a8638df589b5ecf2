use super::*;
use crate::ising::{boltzmann_distribution, exact_moments};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn histogram(states: &[SpinConfig], n: usize) -> Vec<f64> {
    let mut h = vec![0.0; 1 << n];
    for s in states {
        h[s.to_index()] += 1.0;
    }
    h.iter().map(|c| c / states.len() as f64).collect()
}

fn chain_histogram(m: &IsingModel, burn_in: u64, samples: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut chain = GibbsChainState::new(SpinConfig::from_index(0, m.n()));
    for _ in 0..burn_in {
        chain = gibbs_sweep(m, chain, ConditionalRule::Boltzmann, &mut r);
    }
    let mut h = vec![0.0; 1 << m.n()];
    for _ in 0..samples {
        chain = gibbs_sweep(m, chain, ConditionalRule::Boltzmann, &mut r);
        h[chain.current().to_index()] += 1.0;
    }
    h.iter().map(|c| c / samples as f64).collect()
}

/// `P(x_i = +1 | rest)` from the joint by evaluating both values of `x_i`.
fn joint_conditional(m: &IsingModel, s: &SpinConfig, i: usize) -> f64 {
    let mut up = s.clone();
    up.set(i, 1);
    let mut down = s.clone();
    down.set(i, -1);
    let wu = (-m.energy(&up).unwrap()).exp();
    let wd = (-m.energy(&down).unwrap()).exp();
    wu / (wu + wd)
}

#[test]
fn conditional_at_zero_field_is_half() {
    let m = IsingModel::zeros(4);
    let s = SpinConfig::from_bitstring("0110").unwrap();
    assert_eq!(gibbs_conditional(&m, &s, 2), 0.5);
    assert_eq!(boltzmann_conditional(&m, &s, 2), 0.5);
}

#[test]
fn conditional_saturates() {
    let mut m = IsingModel::zeros(4);
    m.biases_mut()[1] = 10.0;
    let s = SpinConfig::from_bitstring("0000").unwrap();
    let p = gibbs_conditional(&m, &s, 1);
    assert!((p - 1.0 / (1.0 + (-20.0f64).exp())).abs() < 1e-15);
    assert!((p - 1.0).abs() < 1e-4);
}

#[test]
fn boltzmann_conditional_matches_joint() {
    let mut r = rng(1);
    for _ in 0..50 {
        let m = IsingModel::random(4, 1.5, &mut r);
        let s = SpinConfig::from_index(r.random_range(0..16), 4);
        for i in 0..4 {
            let want = joint_conditional(&m, &s, i);
            assert!((boltzmann_conditional(&m, &s, i) - want).abs() < 1e-12);
        }
    }
}

/// The printed conditional is not the conditional of the joint: it is the
/// exact complement, i.e. it belongs to `P ∝ exp(+E)`.
#[test]
fn printed_conditional_is_complement_of_joint() {
    let mut r = rng(2);
    let mut max_gap = 0.0f64;
    for _ in 0..50 {
        let m = IsingModel::random(4, 1.5, &mut r);
        let s = SpinConfig::from_index(r.random_range(0..16), 4);
        for i in 0..4 {
            let joint = joint_conditional(&m, &s, i);
            let printed = gibbs_conditional(&m, &s, i);
            assert!((printed - (1.0 - joint)).abs() < 1e-12);
            max_gap = max_gap.max((printed - joint).abs());
        }
    }
    assert!(max_gap > 0.5, "random fields should expose the sign");
}

#[test]
fn sweep_counts_and_touches_every_node() {
    let mut m = IsingModel::zeros(3);
    m.biases_mut().iter_mut().for_each(|b| *b = -50.0);
    let chain = GibbsChainState::new(SpinConfig::from_bitstring("111").unwrap());
    let chain = gibbs_sweep(&m, chain, ConditionalRule::Boltzmann, &mut rng(0));
    assert_eq!(chain.sweeps_done(), 1);
    // b = −50 makes +1 (bit 0) certain under exp(−E)
    assert_eq!(chain.current().to_bitstring(), "000");
    let chain = gibbs_sweep(&m, chain, ConditionalRule::AsPrinted, &mut rng(0));
    assert_eq!(chain.sweeps_done(), 2);
    assert_eq!(chain.current().to_bitstring(), "111");
}

#[test]
fn zero_model_chain_is_uniform() {
    let h = chain_histogram(&IsingModel::zeros(4), 10, 100_000, 3);
    assert!(tv(&h, &[1.0 / 16.0; 16]) <= 0.02);
}

#[test]
fn ferromagnet_concentrates_on_aligned_pair() {
    let mut m = IsingModel::zeros(4);
    m.couplings_mut().iter_mut().for_each(|w| *w = -2.0);
    let exact = boltzmann_distribution(&m).unwrap();
    let exact_mass = exact.probs()[0] + exact.probs()[15];
    assert!(exact_mass >= 0.99);
    let h = chain_histogram(&m, 10, 100_000, 4);
    assert!(h[0] + h[15] >= 0.99, "chain mass {}", h[0] + h[15]);
}

#[test]
fn chain_matches_boltzmann_on_random_models() {
    let mut r = rng(5);
    for k in 0..5 {
        let m = IsingModel::random(4, 1.0, &mut r);
        let exact = boltzmann_distribution(&m).unwrap();
        let h = chain_histogram(&m, 100, 100_000, 100 + k);
        let d = tv(&h, exact.probs());
        assert!(d <= 0.02, "model {k}: TV {d}");
    }
}

#[test]
fn sweep_preserves_exact_distribution() {
    let mut r = rng(6);
    let m = IsingModel::random(4, 1.0, &mut r);
    let exact = boltzmann_distribution(&m).unwrap();
    let after: Vec<SpinConfig> = (0..100_000)
        .map(|_| {
            let s = SpinConfig::from_index(draw_index(exact.probs(), &mut r), 4);
            gibbs_sweep(&m, GibbsChainState::new(s), ConditionalRule::Boltzmann, &mut r)
                .current()
                .clone()
        })
        .collect();
    assert!(tv(&histogram(&after, 4), exact.probs()) <= 0.02);
}

#[test]
fn positive_phase_keeps_unique_ground_state() {
    let mut m = IsingModel::zeros(4);
    m.biases_mut().copy_from_slice(&[1.0, -1.0, -1.0, 1.0]);
    let s0 = SpinConfig::from_bitstring("1001").unwrap();
    assert_eq!(positive_phase_minimize(&m, &s0).unwrap(), s0);
}

#[test]
fn positive_phase_with_positive_biases_is_all_down() {
    let mut m = IsingModel::zeros(4);
    m.biases_mut().iter_mut().for_each(|b| *b = 1.0);
    for idx in 0..16 {
        let s = positive_phase_minimize(&m, &SpinConfig::from_index(idx, 4)).unwrap();
        assert_eq!(s.spins(), &[-1, -1, -1, -1]);
    }
}

#[test]
fn positive_phase_reaches_enumerated_minimum() {
    let mut r = rng(7);
    for _ in 0..50 {
        let m = IsingModel::random(4, 1.0, &mut r);
        let s0 = SpinConfig::from_index(r.random_range(0..16), 4);
        let s = positive_phase_minimize(&m, &s0).unwrap();
        let oracle = (0..16)
            .map(|i| m.energy_of_index(i))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(m.energy(&s).unwrap(), oracle);
        assert!(m.energy(&s).unwrap() <= m.energy(&s0).unwrap());
    }
}

#[test]
fn positive_phase_breaks_ties_by_lowest_index() {
    let m = IsingModel::zeros(3);
    let s = positive_phase_minimize(&m, &SpinConfig::from_index(5, 3)).unwrap();
    assert_eq!(s.to_index(), 0);
}

#[test]
fn greedy_descent_never_raises_energy() {
    let mut r = rng(8);
    let n = ising::MAX_ENUMERATION_NODES + 4;
    for _ in 0..10 {
        let m = IsingModel::random(n, 1.0, &mut r);
        let s0 = SpinConfig::new((0..n).map(|_| if r.random() { 1 } else { -1 }).collect()).unwrap();
        let s = positive_phase_minimize(&m, &s0).unwrap();
        assert!(m.energy(&s).unwrap() <= m.energy(&s0).unwrap());
        // local minimum: no single flip lowers the energy
        for i in 0..n {
            let mut t = s.clone();
            t.set(i, -t.get(i));
            assert!(m.energy(&t).unwrap() >= m.energy(&s).unwrap() - 1e-12);
        }
    }
}

#[test]
fn kl_closed_forms() {
    let u = TargetDistribution::uniform(4);
    assert_eq!(kl_divergence(&u, &u).unwrap(), 0.0);
    let t = crate::target::one_point("1001", 4).unwrap();
    assert!((kl_divergence(&t, &u).unwrap() - 16f64.ln()).abs() < 1e-12);
    assert!((kl_divergence(&t, &u).unwrap() - 2.7726).abs() < 1e-4);
    assert_eq!(kl_divergence(&u, &t).unwrap(), f64::INFINITY);
    assert!(kl_divergence(&u, &TargetDistribution::uniform(3)).is_err());
}

#[test]
fn kl_matches_direct_sum() {
    let mut r = rng(9);
    for _ in 0..20 {
        let raw = |r: &mut ChaCha8Rng| -> Vec<f64> {
            let v: Vec<f64> = (0..16).map(|_| r.random::<f64>()).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        };
        let p = raw(&mut r);
        let q = raw(&mut r);
        let mut want = 0.0;
        for i in 0..16 {
            want += p[i] * p[i].ln() - p[i] * q[i].ln();
        }
        let got = kl_divergence(
            &TargetDistribution::new(p).unwrap(),
            &TargetDistribution::new(q).unwrap(),
        )
        .unwrap();
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn cd_update_fixed_points() {
    let mut r = rng(10);
    let m = IsingModel::random(4, 1.0, &mut r);
    let mo = exact_moments(&m).unwrap();
    assert_eq!(cd_update(&m, &mo, &mo, 0.5), m);
    let other = Moments::of_distribution(4, crate::target::one_point("0110", 4).unwrap().probs());
    assert_eq!(cd_update(&m, &other, &mo, 0.0), m);
}

#[test]
fn cd_update_two_node_arithmetic() {
    // b = (0.5, −0.25), w = 0.3; data is the single configuration (+1, −1).
    let m = IsingModel::new(vec![0.5, -0.25], vec![0.3]).unwrap();
    // E(++) = 0.55, E(+−) = 0.45, E(−+) = −1.05, E(−−) = 0.05
    let w = [(-0.55f64).exp(), (-0.45f64).exp(), (1.05f64).exp(), (-0.05f64).exp()];
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    let m1 = p[0] + p[1] - p[2] - p[3];
    let m2 = p[0] - p[1] + p[2] - p[3];
    let m12 = p[0] - p[1] - p[2] + p[3];
    let data = Moments {
        first: vec![1.0, -1.0],
        pair: vec![-1.0],
    };
    let model = exact_moments(&m).unwrap();
    assert!((model.first[0] - m1).abs() < 1e-12);
    assert!((model.first[1] - m2).abs() < 1e-12);
    assert!((model.pair[0] - m12).abs() < 1e-12);
    let eta = 0.2;
    let next = cd_update(&m, &data, &model, eta);
    assert!((next.biases()[0] - (0.5 - eta * (1.0 - m1))).abs() < 1e-12);
    assert!((next.biases()[1] - (-0.25 - eta * (-1.0 - m2))).abs() < 1e-12);
    assert!((next.couplings()[0] - (0.3 - eta * (-1.0 - m12))).abs() < 1e-12);
}

#[test]
fn exact_cd_step_descends_kl() {
    let mut r = rng(11);
    let mut descents = 0;
    for _ in 0..100 {
        let v: Vec<f64> = (0..16).map(|_| r.random::<f64>()).collect();
        let s: f64 = v.iter().sum();
        let target = TargetDistribution::new(v.into_iter().map(|x| x / s).collect()).unwrap();
        let m = IsingModel::random(4, 1.0, &mut r);
        let data = Moments::of_distribution(4, target.probs());
        let before = kl_divergence(&target, &boltzmann_distribution(&m).unwrap()).unwrap();
        let next = cd_update(&m, &data, &exact_moments(&m).unwrap(), 0.01);
        let after = kl_divergence(&target, &boltzmann_distribution(&next).unwrap()).unwrap();
        if after <= before {
            descents += 1;
        }
    }
    assert!(descents >= 95, "{descents}/100");
}

#[test]
fn training_halves_kl_on_one_point_target() {
    let samples = vec![SpinConfig::from_bitstring("1001").unwrap()];
    let mut passes = 0;
    for seed in 0..20 {
        let cfg = ClassicalTrainConfig {
            seed,
            ..Default::default()
        };
        let out = train_classical(&samples, &cfg).unwrap();
        let first = out.kl_trace[0];
        let best = out.kl_trace.iter().cloned().fold(f64::INFINITY, f64::min);
        if best <= 0.5 * first {
            passes += 1;
        }
    }
    assert!(passes >= 18, "{passes}/20");
}

#[test]
fn zero_rate_keeps_kl_constant() {
    let samples = vec![SpinConfig::from_bitstring("1001").unwrap()];
    let cfg = ClassicalTrainConfig {
        eta1: 0.0,
        max_epochs: 5,
        moment_samples: 50,
        ..Default::default()
    };
    let out = train_classical(&samples, &cfg).unwrap();
    assert_eq!(out.kl_trace.len(), 6);
    assert!(out.kl_trace.iter().all(|&k| k == out.kl_trace[0]));
}

#[test]
fn boltzmann_target_gives_zero_mean_update() {
    let init = IsingModel::random(4, 0.5, &mut rng(12));
    let target = boltzmann_distribution(&init).unwrap();
    let cfg = ClassicalTrainConfig {
        max_epochs: 1,
        ..Default::default()
    };
    let runs = 20;
    let deltas: Vec<Vec<f64>> = (0..runs)
        .map(|seed| {
            let out = train_classical_from(&target, init.clone(), &cfg, &mut rng(1000 + seed)).unwrap();
            (0..init.n_params())
                .map(|k| out.model.param(k) - init.param(k))
                .collect()
        })
        .collect();
    for k in 0..init.n_params() {
        let xs: Vec<f64> = deltas.iter().map(|d| d[k]).collect();
        let mean = xs.iter().sum::<f64>() / runs as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
        assert!(
            mean.abs() <= 3.0 * sd / (runs as f64).sqrt(),
            "param {k}: mean {mean} sd {sd}"
        );
    }
}

#[test]
fn empirical_distribution_counts() {
    let s = |b: &str| SpinConfig::from_bitstring(b).unwrap();
    let d = empirical_distribution(&[s("01"), s("01"), s("11"), s("00")]).unwrap();
    assert_eq!(d.probs(), &[0.25, 0.5, 0.0, 0.25]);
    assert!(empirical_distribution(&[]).is_err());
}
