use overparam::interaction::{
    binomial, enumerate_subsets, forward_interaction, init_interaction, InteractionSpec, InteractionWeights,
};
use overparam::net::{init_weights, WeightIndex};
use overparam::optim::{empirical_risk, risk_and_gradient, train, Model};
use overparam::{Dataset, HyperParams, Topology, WeightVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(w: &WeightVector, x: &[f64], k: usize, i: usize, l: usize) -> f64 {
    let t = w.topology();
    if l == 0 {
        return x[i - 1];
    }
    let fan_in = if l == 1 { t.d } else { t.width };
    let mut z = w.get(WeightIndex { k, i, j: 0, l: l - 1 });
    for j in 1..=fan_in {
        z += w.get(WeightIndex { k, i, j, l: l - 1 }) * unit(w, x, k, j, l - 1);
    }
    1.0 / (1.0 + (-z).exp())
}

/// Sum over subsets of the naive recursion on the projected input.
fn naive(w: &InteractionWeights, x: &[f64]) -> f64 {
    let spec = w.spec();
    let mut total = 0.0;
    for (g, subset) in spec.subsets.iter().enumerate() {
        let net = w.group(g);
        let xs: Vec<f64> = subset.iter().map(|&j| x[j - 1]).collect();
        let t = net.topology();
        for k in 1..=t.subnets {
            total += net.get(WeightIndex { k: 1, i: 1, j: k, l: t.depth }) * unit(&net, &xs, k, 1, t.depth);
        }
    }
    total
}

fn random_weights(spec: InteractionSpec, scale: f64, rng: &mut ChaCha8Rng) -> InteractionWeights {
    let v = (0..spec.weight_count()).map(|_| rng.random_range(-scale..scale)).collect();
    InteractionWeights::from_vec(spec, v).unwrap()
}

fn hp(n: usize) -> HyperParams {
    let mut h = HyperParams::suggested(n, 1, 0.5);
    h.c1 = 0.3;
    h.c2 = 0.3;
    h.c3 = 0.02;
    h
}

#[test]
fn subset_enumeration() {
    assert_eq!(enumerate_subsets(3, 1).unwrap(), vec![vec![1], vec![2], vec![3]]);
    assert_eq!(enumerate_subsets(3, 2).unwrap(), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
    assert_eq!(enumerate_subsets(5, 2).unwrap().len(), 10);
    assert_eq!(binomial(10, 3), 120);
}

#[test]
fn zero_outer_weights_give_zero() {
    let spec = InteractionSpec::new(4, 2, 2, 3, 5).unwrap();
    let w = init_interaction(spec, &hp(100), 3);
    assert_eq!(forward_interaction(&w, &[0.1, 0.2, 0.3, 0.4]).unwrap(), 0.0);
}

#[test]
fn matches_naive_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for inst in 0..200 {
        let d = 2 + inst % 3;
        let d_star = 1 + inst % (d - 1);
        let spec = InteractionSpec::new(d, d_star, 2 + inst % 2, 1 + inst % 3, 1 + inst % 4).unwrap();
        let w = random_weights(spec, 2.0, &mut rng);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let got = forward_interaction(&w, &x).unwrap();
        let want = naive(&w, &x);
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "instance {inst}: {got} vs {want}");
    }
}

#[test]
fn single_full_subset_trains_like_the_plain_network() {
    let (d, n) = (2, 40);
    let topo = Topology::new(d, 2, 3, 6).unwrap();
    let spec = InteractionSpec::from_subsets(d, vec![vec![1, 2]], topo).unwrap();
    let mut h = hp(n);
    h.l_n = 30.0;
    h.t_n = 50;
    let plain = init_weights(topo, &h, 77);
    let inter = init_interaction(spec, &h, 77);
    assert_eq!(plain.as_slice(), inter.as_slice());

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let xs: Vec<f64> = (0..n * d).map(|_| rng.random_range(0.0..1.0)).collect();
    let ys = xs.chunks(2).map(|x| x[0] * x[1]).collect();
    let data = Dataset::new(d, xs, ys).unwrap();
    let a = train(&plain, &data, &h).unwrap();
    let b = train(&inter, &data, &h).unwrap();
    assert_eq!(a.risk, b.risk);
    assert_eq!(a.grad_norm, b.grad_norm);
    assert_eq!(a.drift, b.drift);
    assert_eq!(a.final_weights.as_slice(), b.final_weights.as_slice());
}

#[test]
fn composite_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = InteractionSpec::new(3, 2, 2, 2, 3).unwrap();
    let w = random_weights(spec, 1.0, &mut rng);
    let n = 15;
    let xs: Vec<f64> = (0..n * 3).map(|_| rng.random_range(0.0..1.0)).collect();
    let ys = xs.chunks(3).map(|x| (x[0] + x[2]).sin()).collect();
    let data = Dataset::new(3, xs, ys).unwrap();
    let c3 = 0.05;
    let (_, g) = risk_and_gradient(&w, &data, c3).unwrap();
    let h = 1e-5;
    for (i, gi) in g.iter().enumerate() {
        let mut p = w.clone();
        p.params_mut()[i] += h;
        let up = empirical_risk(&p, &data, c3).unwrap();
        p.params_mut()[i] -= 2.0 * h;
        let down = empirical_risk(&p, &data, c3).unwrap();
        let fd = (up - down) / (2.0 * h);
        let rel = (fd - gi).abs() / fd.abs().max(gi.abs()).max(1e-4);
        assert!(rel <= 1e-6, "weight {i}: analytic {gi} vs fd {fd}");
    }
}

/// Model on `x' = (x_{pi(1)}, ..., x_{pi(d)})` computing the same function as
/// `w` on `x`: each subset is relabeled and the level-0 input columns of its
/// group reordered to keep the coordinates matched.
fn relabel(w: &InteractionWeights, pi: &[usize]) -> InteractionWeights {
    let spec = w.spec();
    let d = spec.d;
    let mut inverse = vec![0; d];
    for (j, &p) in pi.iter().enumerate() {
        inverse[p - 1] = j + 1;
    }
    let topo = spec.group;
    let mut subsets = Vec::new();
    let mut storage = Vec::new();
    for (g, subset) in spec.subsets.iter().enumerate() {
        let mut pairs: Vec<(usize, usize)> = subset.iter().enumerate().map(|(c, &s)| (inverse[s - 1], c)).collect();
        pairs.sort();
        subsets.push(pairs.iter().map(|p| p.0).collect());
        let mut block = w.group_slice(g).to_vec();
        let old = w.group_slice(g);
        for k in 0..topo.subnets {
            for i in 0..topo.width {
                let row = k * topo.block_len() + i * (topo.d + 1);
                for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
                    block[row + 1 + new_col] = old[row + 1 + old_col];
                }
            }
        }
        storage.extend(block);
    }
    let spec = InteractionSpec::from_subsets(d, subsets, topo).unwrap();
    InteractionWeights::from_vec(spec, storage).unwrap()
}

proptest! {
    #[test]
    fn coordinate_permutation_invariance(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d_star = rng.random_range(1..d);
        let spec = InteractionSpec::new(d, d_star, 2, 2, 2).unwrap();
        let w = random_weights(spec, 2.0, &mut rng);
        let mut pi: Vec<usize> = (1..=d).collect();
        for i in (1..d).rev() {
            pi.swap(i, rng.random_range(0..=i));
        }
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let xp: Vec<f64> = pi.iter().map(|&p| x[p - 1]).collect();
        let a = forward_interaction(&w, &x).unwrap();
        let b = forward_interaction(&relabel(&w, &pi), &xp).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}
