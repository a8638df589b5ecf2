use super::stats::*;
use super::*;

fn quick_train() -> TrainConfig {
    TrainConfig {
        global_max_iters: 4,
        ..TrainConfig::default()
    }
}

fn quick_spec(runs: usize) -> BatchSpec {
    BatchSpec {
        runs,
        train: quick_train(),
        master_seed: 11,
        ..BatchSpec::new(target::one_point("1001", 4).unwrap(), 1, NoiseModel::NOISELESS)
    }
}

#[test]
fn identical_traces_have_zero_width_bands() {
    let t = vec![0.5, 0.3, 0.4, 0.1];
    let c = aggregate(&[t.clone(), t.clone(), t.clone()], 2).unwrap();
    assert_eq!(c.mse_mean, t);
    assert!(c.mse_std.iter().chain(&c.mse_min_std).all(|&s| s == 0.0));
    assert_eq!(c.mse_min, vec![0.5, 0.3, 0.3, 0.1]);
    assert_eq!(c.mse_mavg, vec![0.5, 0.4, 0.35, 0.25]);
}

#[test]
fn unit_window_is_the_raw_curve() {
    let c = aggregate(&[vec![3.0, 1.0, 2.0], vec![1.0, 1.0, 4.0]], 1).unwrap();
    assert_eq!(c.mse_mavg, c.mse_mean);
}

#[test]
fn constant_trace_has_constant_minimum() {
    let c = aggregate(&[vec![0.25; 7]], DEFAULT_WINDOW).unwrap();
    assert!(c.mse_min.iter().all(|&m| m == 0.25));
}

#[test]
fn short_traces_carry_their_last_value() {
    let c = aggregate(&[vec![1.0, 0.5], vec![1.0, 0.8, 0.6, 0.2]], 3).unwrap();
    assert_eq!(c.iteration, vec![0, 1, 2, 3]);
    assert_eq!(c.mse_mean, vec![1.0, 0.65, 0.55, 0.35]);
    assert!((c.mse_std[3] - 0.15).abs() < 1e-15);
}

#[test]
fn aggregate_rejects_empty_input() {
    assert!(aggregate(&[], 10).is_err());
    assert!(aggregate(&[vec![]], 10).is_err());
    assert!(aggregate(&[vec![1.0]], 0).is_err());
}

#[test]
fn population_statistics() {
    let (m, s) = mean_std(&[1.0, 3.0]);
    assert_eq!((m, s), (2.0, 1.0));
}

#[test]
fn ranking_orders_by_mean_then_index() {
    let mut a = vec![0.0; 4];
    a[1] = 0.5;
    a[2] = 0.5;
    let mut b = vec![0.0; 4];
    b[3] = 1.0;
    let ranked = ranked_states(&[a, b], 2).unwrap();
    let states: Vec<&str> = ranked.iter().map(|s| s.state.as_str()).collect();
    assert_eq!(states, ["11", "01", "10", "00"]);
    assert_eq!(ranked[0].mean_prob, 0.5);
    assert_eq!(ranked[0].std_prob, 0.5);
    assert_eq!(top_k(&[vec![0.25; 4]], 2, 5).unwrap().len(), 4);
}

#[test]
fn csv_headers_match_the_documented_columns() {
    let c = aggregate(&[vec![0.2, 0.1]], 10).unwrap();
    let csv = emit::curves_csv(&c);
    assert_eq!(csv.lines().next().unwrap(), "iteration,mse_mean,mse_std,mse_mavg,mse_min");
    assert_eq!(csv.lines().nth(2).unwrap(), "1,0.1,0,0.15000000000000002,0.1");
    let top = emit::states_csv(&ranked_states(&[vec![0.1, 0.9]], 1).unwrap());
    assert_eq!(top, "state,mean_prob,std_prob\n1,0.9,0\n0,0.1,0\n");
}

#[test]
fn run_seeds_follow_the_counter_scheme() {
    assert_eq!(run_seed(5, 3), 8);
    assert_eq!(run_seed(u64::MAX, 2), 1);
}

#[test]
fn batch_matches_individual_training() {
    let spec = quick_spec(3);
    let results = run_batch(&spec).unwrap();
    assert_eq!(results.len(), 3);
    for r in &results {
        let cfg = TrainConfig {
            seed: run_seed(11, r.run),
            ..quick_train()
        };
        let solo = train::bilevel_train(&spec.target, 1, &cfg, NoiseModel::NOISELESS).unwrap();
        assert_eq!(solo.h1, r.outcome.h1);
        assert_eq!(solo.params, r.outcome.params);
    }
}

#[test]
fn summary_invariants() {
    let spec = quick_spec(4);
    let summary = run_convergence(&spec, None, "t").unwrap();
    let c = &summary.curves;
    assert!(c.mse_min.windows(2).all(|w| w[1] <= w[0]));
    assert!(summary.top5.windows(2).all(|w| w[1].mean_prob <= w[0].mean_prob));
    assert!(summary.top5.iter().map(|s| s.mean_prob).sum::<f64>() <= 1.0 + 1e-12);
    assert!(summary.top5.iter().all(|s| (0.0..=1.0).contains(&s.mean_prob)));
    assert_eq!(summary.target_state, "1001");
    assert!(summary.target_top_runs <= 4);
}

#[test]
fn single_run_has_degenerate_bands() {
    let summary = run_convergence(&quick_spec(1), None, "t").unwrap();
    assert!(summary.curves.mse_std.iter().all(|&s| s == 0.0));
    assert!(summary.top5.iter().all(|s| s.std_prob == 0.0));
}

#[test]
fn shot_estimated_final_distributions() {
    let spec = BatchSpec {
        final_shots: Some(50),
        ..quick_spec(2)
    };
    let results = run_batch(&spec).unwrap();
    for r in &results {
        assert!(r.final_probs.iter().all(|p| (p * 50.0).fract() == 0.0));
    }
    assert!(run_batch(&BatchSpec { final_shots: Some(0), ..quick_spec(1) }).is_err());
    assert!(run_batch(&BatchSpec { runs: 0, ..quick_spec(1) }).is_err());
}

#[test]
fn emitted_files_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        run_convergence(&quick_spec(2), Some(d.path()), "2026-01-01T00:00:00Z").unwrap();
    }
    for name in ["curves.csv", "top5.csv", "summary.json", "curves.svg", "records/manifest.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    assert_eq!(store::load_archive(&a.path().join("records")).unwrap().len(), 2);
}

#[test]
fn dry_run_plans_without_training() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ImageSpec {
        dry_run: true,
        ..ImageSpec::new(target::reference_grid())
    };
    let report = run_image(&spec, Some(dir.path()), "t").unwrap();
    assert_eq!(report.plan.len(), target::BLOCK_COUNT);
    assert!(report.groups.is_empty() && report.records.is_empty());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn modal_outcome_prefers_lowest_index() {
    assert_eq!(modal_outcome(&[0, 3, 3, 1]), 1);
    assert_eq!(modal_outcome(&[2, 0, 0, 0]), 0);
}

#[test]
fn generation_depends_only_on_records_and_shots() {
    let spec = quick_spec(2);
    let results = run_batch(&spec).unwrap();
    let records = records_of(&results, NoiseModel::NOISELESS, "t");
    let a = generate_blocks(&records, 10, GateSet::Native).unwrap();
    let b = generate_blocks(&records, 10, GateSet::Native).unwrap();
    assert_eq!(a, b);
    assert_eq!(sample_record(&records[0], 10, GateSet::Native).unwrap().iter().sum::<u64>(), 10);
}

#[test]
fn created_at_prefers_the_flag() {
    assert_eq!(resolve_created_at(Some("x")).unwrap(), "x");
    let now = resolve_created_at(None).unwrap();
    assert!(DateTime::parse_from_rfc3339(&now).is_ok(), "{now}");
}

#[test]
fn classical_summary_shapes() {
    let spec = ClassicalSpec {
        target: target::one_point("1001", 4).unwrap(),
        runs: 3,
        cfg: ClassicalTrainConfig {
            max_epochs: 5,
            moment_samples: 50,
            ..ClassicalTrainConfig::default()
        },
        master_seed: 0,
    };
    let dir = tempfile::tempdir().unwrap();
    let s = run_classical(&spec, Some(dir.path())).unwrap();
    assert_eq!(s.kl_mean.len(), 6);
    assert!(s.kl_min.windows(2).all(|w| w[1] <= w[0]));
    let csv = std::fs::read_to_string(dir.path().join("kl.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "epoch,kl_mean,kl_std,kl_min");
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn svg_is_well_formed_enough() {
    let ys = [1.0, 0.5, 0.25];
    let s = svg::line_chart("a<b", "x", "y", &[svg::Series { name: "m", y: &ys, band: Some(&[0.1, 0.1, 0.1]) }]);
    assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    assert!(s.contains("a&lt;b"));
    let g = svg::grid_panels("t", &[("ref".into(), target::reference_grid())]);
    assert_eq!(g.matches("fill=\"black\"").count(), target::reference_grid().black_count());
}
