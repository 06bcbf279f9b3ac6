use overparam::synth::{
    l2_error, make_target, sample_dataset, write_dataset, DatasetMeta, NoiseModel, TargetFunction, TargetKind,
    TargetParams, TargetSpec,
};
use proptest::prelude::*;

fn target(kind: TargetKind, d: usize, params: TargetParams) -> TargetFunction {
    make_target(kind, 1.0, 1.0, d, &params).unwrap()
}

#[test]
fn noiseless_responses_equal_the_target() {
    let m = target(TargetKind::LipschitzCone, 2, TargetParams::default());
    let data = sample_dataset(&m, &NoiseModel::NONE, 100, 5).unwrap();
    for i in 0..data.n() {
        assert_eq!(data.y(i), m.eval(data.x(i)));
        assert!(data.x(i).iter().all(|&v| (0.0..1.0).contains(&v)));
    }
}

#[test]
fn gaussian_noise_mean_within_clt_band() {
    let zero = target(TargetKind::Constant, 1, TargetParams::default());
    for seed in 0..5 {
        let n = 10_000;
        let data = sample_dataset(&zero, &NoiseModel::gaussian(1.0), n, seed).unwrap();
        let mean = data.ys().iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 4.0 / (n as f64).sqrt(), "seed {seed}: mean {mean}");
        let var = data.ys().iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.06, "variance {var}");
    }
}

#[test]
fn bounded_noise_stays_in_range() {
    let zero = target(TargetKind::Constant, 1, TargetParams::default());
    let data = sample_dataset(&zero, &NoiseModel::bounded_uniform(0.3), 5000, 1).unwrap();
    assert!(data.ys().iter().all(|y| y.abs() <= 0.3));
    let var = data.ys().iter().map(|y| y * y).sum::<f64>() / 5000.0;
    assert!((var / NoiseModel::bounded_uniform(0.3).variance() - 1.0).abs() < 0.1);
}

#[test]
fn sampling_is_deterministic_in_the_seed() {
    let m = target(TargetKind::AdditiveInteraction, 3, TargetParams { d_star: Some(1), ..Default::default() });
    let noise = NoiseModel::gaussian(0.1);
    assert_eq!(sample_dataset(&m, &noise, 50, 9).unwrap(), sample_dataset(&m, &noise, 50, 9).unwrap());
    assert_ne!(sample_dataset(&m, &noise, 50, 9).unwrap(), sample_dataset(&m, &noise, 50, 10).unwrap());
}

#[test]
fn l2_examples() {
    let one = target(TargetKind::Constant, 2, TargetParams { value: Some(1.0), ..Default::default() });
    let e = l2_error(|_| 0.0, &one, 1000, 1);
    assert_eq!(e.mean, 1.0);
    assert_eq!(e.std_error, 0.0);

    let e = l2_error(|x| one.eval(x), &one, 1000, 1);
    assert_eq!(e.mean, 0.0);

    // m(x) = x on [0,1]: int x^2 dx = 1/3
    let lin = target(TargetKind::Linear, 1, TargetParams::default());
    let e = l2_error(|_| 0.0, &lin, 20_000, 4);
    assert!((e.mean - 1.0 / 3.0).abs() <= 4.0 * e.std_error, "{} +- {}", e.mean, e.std_error);
}

#[test]
fn l2_estimates_are_unbiased_across_seeds() {
    // E|0 - x|^2 = 1/3; the average over independent seeds concentrates
    let lin = target(TargetKind::Linear, 1, TargetParams::default());
    let means: Vec<f64> = (0..50).map(|s| l2_error(|_| 0.0, &lin, 500, s).mean).collect();
    let avg = means.iter().sum::<f64>() / 50.0;
    let sd = (means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / 49.0).sqrt();
    assert!((avg - 1.0 / 3.0).abs() <= 4.0 * sd / 50f64.sqrt());
}

#[test]
fn moment_condition_constant() {
    // E exp(c5 Y^2) is finite when 2 c5 sigma^2 < 1; check a Monte Carlo estimate is moderate
    let m = target(TargetKind::LipschitzCone, 1, TargetParams::default());
    let noise = NoiseModel::gaussian(0.5);
    let c5 = noise.moment_constant(m.sup_bound());
    assert!(c5 > 0.0 && 2.0 * c5 * noise.variance() < 1.0);
    let data = sample_dataset(&m, &noise, 20_000, 3).unwrap();
    let moment = data.ys().iter().map(|y| (c5 * y * y).exp()).sum::<f64>() / 20_000.0;
    assert!(moment.is_finite() && moment < 2.0, "moment {moment}");
}

#[test]
fn dataset_files_carry_header_and_sidecar() {
    let m = target(TargetKind::Linear, 2, TargetParams::default());
    let data = sample_dataset(&m, &NoiseModel::NONE, 4, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let spec = TargetSpec { kind: "linear".into(), p: 1.0, c: 1.0, params: TargetParams::default() };
    let meta = DatasetMeta { target: spec, noise: NoiseModel::NONE, d: 2, n: 4, seed: 0 };
    write_dataset(&data, &meta, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,y"));
    assert_eq!(lines.count(), 4);
    let sidecar = std::fs::read_to_string(path.with_extension("json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(v["n"], 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn registered_targets_respect_their_holder_bound(p in 0.5f64..=1.0, c in 0.1f64..5.0, d in 1usize..4, seed in any::<u64>()) {
        for kind in [TargetKind::Constant, TargetKind::Linear, TargetKind::LipschitzCone, TargetKind::HoelderBump, TargetKind::AdditiveInteraction] {
            let m = make_target(kind, p, c, d, &TargetParams::default()).unwrap();
            let check = m.holder_spot_check(2000, seed);
            prop_assert_eq!(check.violations, 0, "{} worst ratio {}", kind, check.worst_ratio);
            prop_assert!(m.in_theorem_regime());
        }
    }

    #[test]
    fn targets_stay_within_their_sup_bound(d in 1usize..4, seed in any::<u64>()) {
        for kind in [TargetKind::Linear, TargetKind::LipschitzCone, TargetKind::HoelderBump, TargetKind::AdditiveInteraction] {
            let m = make_target(kind, 1.0, 2.0, d, &TargetParams::default()).unwrap();
            let data = sample_dataset(&m, &NoiseModel::NONE, 200, seed).unwrap();
            prop_assert!(data.ys().iter().all(|y| y.abs() <= m.sup_bound() + 1e-12));
        }
    }
}
