use nalgebra::DMatrix;
use overparam::net::{forward_activations, init_weights};
use overparam::optim::{
    check_descent, check_pl, empirical_risk, gd_step, gradient, outer_features, outer_ridge_oracle, ridge_solve,
    risk_and_gradient, train,
};
use overparam::{forward, Dataset, HyperParams, Topology, WeightVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset(d: usize, n: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n * d).map(|_| rng.random_range(0.0..1.0)).collect();
    let ys = xs.chunks(d).map(|x| f(x) + 0.1 * rng.random_range(-1.0..1.0)).collect();
    Dataset::new(d, xs, ys).unwrap()
}

fn hp(n: usize, c3: f64, l_n: f64, t_n: u64) -> HyperParams {
    let mut h = HyperParams::suggested(n, 1, 0.5);
    h.c1 = 0.2;
    h.c2 = 0.2;
    h.c3 = c3;
    h.l_n = l_n;
    h.t_n = t_n;
    h
}

fn cone(x: &[f64]) -> f64 {
    1.0 - (2.0 * x[0] - 1.0).abs()
}

#[test]
fn risk_of_zero_outer_weights_is_mean_square_response() {
    let data = dataset(2, 30, 1, |x| x[0] + x[1]);
    let w = init_weights(Topology::new(2, 2, 3, 5).unwrap(), &hp(30, 0.1, 1.0, 0), 4);
    let want = data.ys().iter().map(|y| y * y).sum::<f64>() / 30.0;
    assert!((empirical_risk(&w, &data, 0.3).unwrap() - want).abs() < 1e-14);
}

#[test]
fn perfect_fit_has_zero_risk_and_gradient() {
    let t = Topology::new(1, 2, 2, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = WeightVector::from_vec(t, (0..t.weight_count()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let xs = vec![0.1, 0.4, 0.9];
    let ys = xs.iter().map(|&x| forward(&w, &[x]).unwrap()).collect();
    let data = Dataset::new(1, xs, ys).unwrap();
    assert!(empirical_risk(&w, &data, 0.0).unwrap() < 1e-30);
    let g = gradient(&w, &data, 0.0).unwrap();
    assert!(g.as_slice().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn gradient_at_zero_outer_weights() {
    let data = dataset(1, 25, 2, cone);
    let w = init_weights(Topology::new(1, 3, 2, 4).unwrap(), &hp(25, 0.1, 1.0, 0), 8);
    let g = gradient(&w, &data, 0.1).unwrap();
    assert!(g.inner().iter().all(|&v| v == 0.0));
    for k in 0..4 {
        let want: f64 = (0..25)
            .map(|i| {
                let b = forward_activations(&w, data.x(i)).unwrap().outputs()[k];
                -2.0 / 25.0 * data.y(i) * b
            })
            .sum();
        assert!((g.outer()[k] - want).abs() < 1e-14);
    }
}

#[test]
fn gd_step_examples() {
    let data = Dataset::new(1, vec![0.2, 0.7], vec![0.5, -0.3]).unwrap();
    let mut h = hp(2, 0.1, 4.0, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = Topology::new(1, 2, 2, 2).unwrap();
    let w = WeightVector::from_vec(t, (0..t.weight_count()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();

    let (_, g) = risk_and_gradient(&w, &data, 0.1).unwrap();
    let stepped = gd_step(&w, &data, &h).unwrap();
    for ((s, w0), gi) in stepped.as_slice().iter().zip(w.as_slice()).zip(&g) {
        assert_eq!(*s, w0 - 0.25 * gi);
    }

    h.l_n = f64::INFINITY;
    assert_eq!(gd_step(&w, &data, &h).unwrap(), w);

    let data0 = Dataset::new(1, vec![0.2, 0.7], vec![0.0, 0.0]).unwrap();
    let z = WeightVector::zeros(t);
    assert_eq!(gd_step(&z, &data0, &hp(2, 0.1, 4.0, 1)).unwrap(), z);
}

#[test]
fn zero_steps_record_only_the_initial_state() {
    let data = dataset(1, 20, 6, cone);
    let w = init_weights(Topology::new(1, 2, 2, 3).unwrap(), &hp(20, 0.1, 1.0, 0), 1);
    let trace = train(&w, &data, &hp(20, 0.1, 10.0, 0)).unwrap();
    assert_eq!(trace.steps(), 0);
    assert_eq!(trace.risk.len(), 1);
    assert_eq!(trace.final_weights, w);
    assert_eq!(trace.drift, vec![0.0]);
}

#[test]
fn frozen_features_descend_monotonically_below_quadratic_curvature() {
    // biases of 50 saturate every unit: features equal 1 in floating point and
    // their derivatives vanish, so only the outer quadratic moves
    let n = 40;
    let data = dataset(1, n, 7, cone);
    let t = Topology::new(1, 2, 2, 6).unwrap();
    let mut w = WeightVector::zeros(t);
    for k in 0..t.subnets {
        let block = w.subnet_mut(k);
        for l in 0..t.depth {
            for i in 0..t.rows(l) {
                block[t.level_offset(l) + i * t.cols(l)] = 50.0;
            }
        }
    }
    w.outer_mut().iter_mut().enumerate().for_each(|(k, a)| *a = 0.1 * k as f64);
    assert!(forward_activations(&w, &[0.3]).unwrap().outputs().iter().all(|&b| b == 1.0));
    let c3 = 0.05;
    // Hessian in the outer weights: 2 (B^T B / n + c3 I) with B = 1 everywhere
    let curvature = 2.0 * (t.subnets as f64 + c3);
    let l_n = curvature * 1.01;
    let trace = train(&w, &data, &hp(n, c3, l_n, 200)).unwrap();
    assert!(trace.risk.windows(2).all(|p| p[1] <= p[0]));
    assert!(check_descent(&trace, l_n).all_descent());
    assert!(trace.final_weights.inner() == w.inner());
}

#[test]
fn desk_run_lowers_risk() {
    let n = 200;
    let data = dataset(1, n, 11, cone);
    let w = init_weights(Topology::new(1, 2, 4, 100).unwrap(), &hp(n, 0.01, 1.0, 0), 2);
    let trace = train(&w, &data, &hp(n, 0.01, 200.0, 2000)).unwrap();
    assert_eq!(trace.risk.len(), 2001);
    assert!(trace.final_risk() < trace.initial_risk());
    assert!(trace.drift.iter().all(|&v| v >= 0.0));
}

#[test]
fn ridge_normal_equations_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let (n, k) = (rng.random_range(5..60), rng.random_range(1..30));
        let b = DMatrix::from_fn(n, k, |_, _| rng.random_range(0.0..1.0));
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c3 = rng.random_range(1e-3..1.0);
        let sol = ridge_solve(&b, &ys, c3).unwrap();
        assert!(sol.residual <= 1e-10, "residual {}", sol.residual);
        // recompute the normal-equation residual independently
        let a = nalgebra::DVector::from_vec(sol.coefficients.clone());
        let y = nalgebra::DVector::from_vec(ys.clone());
        let lhs = (b.transpose() * &b) / n as f64 * &a + c3 * &a;
        let rhs = b.transpose() * y / n as f64;
        assert!((lhs - rhs).amax() <= 1e-10);
    }
}

#[test]
fn ridge_oracle_minimizes_over_outer_weights() {
    let data = dataset(1, 50, 17, cone);
    let mut w = init_weights(Topology::new(1, 2, 3, 8).unwrap(), &hp(50, 0.05, 1.0, 0), 5);
    let sol = outer_ridge_oracle(&w, &data, 0.05).unwrap();
    w.outer_mut().copy_from_slice(&sol.coefficients);
    let best = empirical_risk(&w, &data, 0.05).unwrap();
    let g = gradient(&w, &data, 0.05).unwrap();
    assert!(g.outer().iter().all(|v| v.abs() < 1e-9));
    let pl = check_pl(&w, &data, 0.05).unwrap();
    assert!(pl.holds && pl.lhs < 1e-16 && pl.rhs.abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let mut p = w.clone();
        p.outer_mut().iter_mut().for_each(|a| *a += rng.random_range(-0.1..0.1));
        assert!(empirical_risk(&p, &data, 0.05).unwrap() >= best);
    }
    assert_eq!(outer_features(&w, &data).unwrap().shape(), (50, 8));
}

#[test]
fn scalar_pl_case_by_hand() {
    // K = 1, B = 1/2 everywhere: F(a) = mean((a/2 - y)^2) + c3 a^2
    let data = Dataset::new(1, vec![0.1, 0.5, 0.8], vec![1.0, 0.0, 0.5]).unwrap();
    let c3 = 0.2;
    let mut w = WeightVector::zeros(Topology::new(1, 2, 1, 1).unwrap());
    w.outer_mut()[0] = 2.0;
    let ybar = 0.5;
    let a_opt = 0.5 * ybar / (0.25 + c3);
    let f = |a: f64| data.ys().iter().map(|y| (0.5 * a - y).powi(2)).sum::<f64>() / 3.0 + c3 * a * a;
    let grad = 2.0 * (0.25 + c3) * 2.0 - ybar;
    let pl = check_pl(&w, &data, c3).unwrap();
    assert!((pl.lhs - grad * grad).abs() < 1e-12);
    assert!((pl.rhs - 4.0 * c3 * (f(2.0) - f(a_opt))).abs() < 1e-12);
    // exact ratio for a 1-d quadratic with curvature 2 (1/4 + c3)
    assert!((pl.lhs / pl.rhs - (0.25 + c3) / c3).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pl_holds_on_random_instances(seed in any::<u64>(), k in 1usize..12, n in 2usize..30, c3 in 1e-3f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = Topology::new(1, 2, 2, k).unwrap();
        let w = WeightVector::from_vec(t, (0..t.weight_count()).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
        let data = dataset(1, n, seed ^ 1, cone);
        let pl = check_pl(&w, &data, c3).unwrap();
        prop_assert!(pl.holds, "slack {}", pl.slack());
    }

    #[test]
    fn risk_is_nonnegative_and_penalty_monotone(seed in any::<u64>(), c3 in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = Topology::new(2, 2, 2, 3).unwrap();
        let w = WeightVector::from_vec(t, (0..t.weight_count()).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let data = dataset(2, 10, seed, |x| x[0] * x[1]);
        let a = empirical_risk(&w, &data, c3).unwrap();
        let b = empirical_risk(&w, &data, c3 + 0.5).unwrap();
        prop_assert!(a >= 0.0 && b >= a);
    }
}
