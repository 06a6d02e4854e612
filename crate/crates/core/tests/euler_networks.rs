//! Residual steps and chains, exact Euler networks, interpolation in time,
//! the space-time network and the a priori iterate bound.

mod common;

use ann_calculus::bounds::{
    euler_space_params, headline_constant, headline_params, residual_chain_params,
    residual_step_params_exact, spacetime_params,
};
use ann_calculus::calculus::compose;
use ann_calculus::euler::{
    certified_growth, euler_iterates, euler_oracle, euler_space_net, euler_space_nets,
    eval_spacetime, gronwall_bound, interpolate_iterates, residual_chain, residual_chain_all,
    residual_step, spacetime_parts, time_nets, EulerSpec, GrowthBoundInputs,
};
use ann_calculus::network::{Activation, Dims, Matrix, Network};
use ann_calculus::relu::{identity_net, square_unit};
use ann_calculus::verify::{thm1_bounds, SpacetimeCase};
use ann_calculus::{AnnError, IdentityEmulator};
use common::{
    euler_loop, forward, hat, lerp_uniform, linear_drift, linspace, norm, random_dims, random_net,
    random_vec, rel_err, spectral_norm,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zero_map(d: usize) -> Network {
    Network::from_parts(vec![
        (Matrix::zeros(3, d), vec![0.0; 3]),
        (Matrix::zeros(d, 3), vec![0.0; d]),
    ])
    .unwrap()
}

/// `x -> min{max{x, 0}, 1}^2` up to the accuracy of the unit square net:
/// the unit square approximator after a clamp to `[0, 1]`.
fn bounded_drift() -> Network {
    let clamp = Network::from_parts(vec![
        (Matrix::column(&[1.0, 1.0]), vec![0.0, -1.0]),
        (Matrix::row_vector(&[1.0, -1.0]), vec![0.0]),
    ])
    .unwrap();
    compose(&square_unit(1.0).unwrap(), &clamp).unwrap()
}

fn spec(drift: Network, horizon: f64, steps: usize, y: Vec<Vec<f64>>, epsilon: f64) -> EulerSpec {
    EulerSpec { drift, horizon, steps, y, epsilon, q: 3.0 }
}

#[test]
fn residual_step_with_zero_increment_reproduces_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let base = random_net(&mut rng, &[2, 5, 2], 1.0);
    let net = residual_step(&zero_map(2), &base, &IdentityEmulator::relu(2)).unwrap();
    for x in linspace(-2.0, 2.0, 41) {
        let v = [x, 1.0 - x];
        assert!(rel_err(&net.relu(&v).unwrap(), &forward(&base, &v)) <= 1e-14);
    }
}

#[test]
fn residual_step_realizes_base_plus_increment_of_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let d = rng.random_range(1..=3);
        let (l1, l2) = (rng.random_range(2..=4), rng.random_range(1..=4));
        let dims1 = random_dims(&mut rng, l1, d, d, 5);
        let dims2 = random_dims(&mut rng, l2, d, d, 5);
        let phi1 = random_net(&mut rng, &dims1, 1.0);
        let phi2 = random_net(&mut rng, &dims2, 1.0);
        let id = IdentityEmulator::relu(d);
        let net = residual_step(&phi1, &phi2, &id).unwrap();

        let i = 2 * d;
        let mut expected = dims2[..l2].to_vec();
        expected.extend(dims1[1..l1].iter().map(|l| l + i));
        expected.push(d);
        assert_eq!(net.dims(), Dims(expected));
        assert_eq!(
            net.params() as i64,
            residual_step_params_exact(&phi1.dims(), &phi2.dims(), i, d)
        );

        for _ in 0..10 {
            let x = random_vec(&mut rng, d, 2.0);
            let f2 = forward(&phi2, &x);
            let f1 = forward(&phi1, &f2);
            let oracle: Vec<f64> = f2.iter().zip(&f1).map(|(a, b)| a + b).collect();
            assert!(rel_err(&net.relu(&x).unwrap(), &oracle) <= 1e-12);
        }
    }
}

#[test]
fn residual_step_needs_a_deep_increment() {
    let affine = Network::affine(Matrix::identity(2), vec![0.0; 2]).unwrap();
    let err = residual_step(&affine, &identity_net(2), &IdentityEmulator::relu(2)).unwrap_err();
    assert!(matches!(err, AnnError::Hypothesis(_)));
}

#[test]
fn residual_chain_of_length_zero_is_the_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let psi = random_net(&mut rng, &[2, 4, 2], 1.0);
    let phis = vec![random_net(&mut rng, &[2, 3, 2], 1.0)];
    let net = residual_chain(&psi, &phis, &IdentityEmulator::relu(2), 0).unwrap();
    assert!(net.bit_eq(&psi));
}

#[test]
fn residual_chain_with_affine_increments_keeps_dims() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let psi = random_net(&mut rng, &[3, 6, 3], 1.0);
    let phis: Vec<Network> = (0..3).map(|_| random_net(&mut rng, &[3, 3], 0.5)).collect();
    let net = residual_chain(&psi, &phis, &IdentityEmulator::relu(3), 3).unwrap();
    assert_eq!(net.dims(), psi.dims());
    for _ in 0..20 {
        let x = random_vec(&mut rng, 3, 2.0);
        let mut f = forward(&psi, &x);
        for phi in &phis {
            let inc = forward(phi, &f);
            f = f.iter().zip(&inc).map(|(a, b)| a + b).collect();
        }
        assert!(rel_err(&net.relu(&x).unwrap(), &f) <= 1e-12);
    }
}

#[test]
fn residual_chain_of_four_steps_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let d = 3;
    let id = IdentityEmulator::relu(d);
    let psi = identity_net(d);
    let phis: Vec<Network> = (0..4).map(|_| random_net(&mut rng, &[d, 4, d], 0.5)).collect();
    let chain = residual_chain_all(&psi, &phis, &id).unwrap();
    let net = &chain[4];
    assert_eq!(net.hidden(), psi.hidden() + 4 * phis[0].hidden());
    let p_phis: Vec<usize> = phis.iter().map(Network::params).collect();
    assert!(net.params() as f64 <= residual_chain_params(psi.params(), &p_phis, id.net().params()));
    for _ in 0..200 {
        let x = random_vec(&mut rng, d, 2.0);
        let mut f = x.clone();
        for phi in &phis {
            let inc = forward(phi, &f);
            f = f.iter().zip(&inc).map(|(a, b)| a + b).collect();
        }
        assert!(rel_err(&net.relu(&x).unwrap(), &f) <= 1e-12);
    }
}

#[test]
fn residual_chain_rejects_too_many_steps() {
    let phis = vec![zero_map(1)];
    assert!(residual_chain(&identity_net(1), &phis, &IdentityEmulator::relu(1), 2).is_err());
}

#[test]
fn euler_net_after_zero_steps_is_the_identity() {
    let drift = linear_drift(&Matrix::identity(2), &[0.5, -0.5]);
    let net = euler_space_net(&drift, &[], &[], 0).unwrap();
    for x in linspace(-3.0, 3.0, 13) {
        assert_eq!(net.relu(&[x, -x]).unwrap(), vec![x, -x]);
    }
}

#[test]
fn euler_net_for_linear_drift_in_one_dimension() {
    let (horizon, steps) = (1.0, 4);
    let h = horizon / steps as f64;
    let drift = identity_net(1);
    let a = vec![Matrix::from_rows(&[vec![h]]).unwrap(); steps];
    let y = vec![vec![0.0]; steps];
    let net = euler_space_net(&drift, &a, &y, 4).unwrap();
    for x in linspace(-3.0, 3.0, 61) {
        let expected = (1.0 + h).powi(4) * x;
        assert!((net.relu(&[x]).unwrap()[0] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}

#[test]
fn euler_net_ignores_later_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let drift = random_net(&mut rng, &[2, 4, 2], 1.0);
    let a = vec![Matrix::identity(2).scaled(0.25); 6];
    let y: Vec<Vec<f64>> = (0..6).map(|_| random_vec(&mut rng, 2, 0.5)).collect();
    let mut z = y.clone();
    z[4] = vec![100.0, -100.0];
    let first = euler_space_net(&drift, &a, &y, 3).unwrap();
    let second = euler_space_net(&drift, &a, &z, 3).unwrap();
    assert!(first.bit_eq(&second));
    for x in linspace(-2.0, 2.0, 21) {
        let v = [x, 0.5 * x];
        assert_eq!(first.relu(&v).unwrap(), second.relu(&v).unwrap());
    }
}

#[test]
fn euler_nets_match_direct_recursion_and_size_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for _ in 0..30 {
        let d = rng.random_range(1..=4);
        let steps = rng.random_range(1..=8);
        let depth = rng.random_range(1..=3);
        let dims = random_dims(&mut rng, depth, d, d, 2 * d);
        let drift = random_net(&mut rng, &dims, 0.5);
        let h = 1.0 / steps as f64;
        let a = vec![Matrix::identity(d).scaled(h); steps];
        let y: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, d, 0.2)).collect();
        let nets = euler_space_nets(&drift, &a, &y).unwrap();
        let x = random_vec(&mut rng, d, 1.0);
        let oracle = euler_loop(|v| forward(&drift, v), h, &y, &x);
        let p_id = identity_net(d).params();
        for (n, net) in nets.iter().enumerate() {
            assert!(rel_err(&net.relu(&x).unwrap(), &oracle[n]) <= 1e-11);
            assert_eq!(net.hidden(), 1 + n * drift.hidden());
            assert!(net.params() as f64 <= euler_space_params(n, p_id, drift.params()));
        }
    }
}

#[test]
fn oracle_at_time_zero_nodes_and_midpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let drift = random_net(&mut rng, &[2, 4, 2], 1.0);
    let y: Vec<Vec<f64>> = (0..4).map(|_| random_vec(&mut rng, 2, 0.3)).collect();
    let s = spec(drift.clone(), 2.0, 4, y.clone(), 0.1);
    let x = [0.4, -0.7];
    let iterates = euler_loop(|v| forward(&drift, v), 0.5, &y, &x);
    assert_eq!(euler_oracle(&s, 0.0, &x).unwrap(), x.to_vec());
    for n in 0..=4 {
        let got = euler_oracle(&s, n as f64 * 0.5, &x).unwrap();
        assert!(rel_err(&got, &iterates[n]) <= 1e-14);
    }
    let mid = euler_oracle(&s, 0.75, &x).unwrap();
    let mean: Vec<f64> = iterates[1].iter().zip(&iterates[2]).map(|(a, b)| 0.5 * (a + b)).collect();
    assert!(rel_err(&mid, &mean) <= 1e-14);
    for t in linspace(0.0, 2.0, 37) {
        assert!(rel_err(&euler_oracle(&s, t, &x).unwrap(), &lerp_uniform(&iterates, 0.5, t)) <= 1e-13);
    }
}

#[test]
fn oracle_outside_the_horizon_is_a_domain_error() {
    let s = spec(identity_net(1), 1.0, 2, vec![vec![0.0]; 2], 0.1);
    assert!(matches!(euler_oracle(&s, -0.1, &[0.0]), Err(AnnError::Domain(_))));
    assert!(matches!(euler_oracle(&s, 1.1, &[0.0]), Err(AnnError::Domain(_))));
    let times = [0.0, 1.0];
    assert!(interpolate_iterates(&times, &[vec![0.0], vec![1.0]], 2.0).is_err());
}

#[test]
fn time_nets_interpolate_and_sum_to_one() {
    let s = spec(identity_net(1), 3.0, 6, vec![vec![0.0]; 6], 0.1);
    let nets = time_nets(&s).unwrap();
    assert_eq!(nets.len(), 7);
    let h = 0.5;
    for t in linspace(0.0, 3.0, 301) {
        let mut total = 0.0;
        for (n, net) in nets.iter().enumerate() {
            let v = net.relu(&[t]).unwrap()[0];
            let c = n as f64 * h;
            assert!((v - hat(c - h, c, c + h, 1.0, t)).abs() <= 1e-14, "n = {n}, t = {t}");
            total += v;
        }
        assert!((total - 1.0).abs() <= 1e-14, "t = {t}");
    }
}

#[test]
fn spacetime_at_time_zero_with_zero_drift() {
    let (d, eps, q) = (2, 1e-2, 3.0);
    let s = spec(zero_map(d), 1.0, 3, vec![vec![0.0; d]; 3], eps);
    let parts = spacetime_parts(&s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    for _ in 0..50 {
        let x = random_vec(&mut rng, d, 2.0);
        let out = eval_spacetime(&parts.net, 0.0, &x).unwrap();
        let diff: Vec<f64> = out.iter().zip(&x).map(|(a, b)| a - b).collect();
        let bound = eps * (2.0 * (d as f64).sqrt() + 2.0 * norm(&x).powf(q));
        assert!(norm(&diff) <= bound);
    }
}

#[test]
fn spacetime_error_for_bounded_drift_in_one_dimension() {
    let (eps, q) = (1e-2, 3.0);
    let drift = bounded_drift();
    let s = spec(drift.clone(), 1.0, 2, vec![vec![0.0]; 2], eps);
    let parts = spacetime_parts(&s).unwrap();
    for x in linspace(-2.0, 2.0, 21) {
        let iterates = euler_loop(|v| forward(&drift, v), 0.5, &s.y, &[x]);
        for t in linspace(0.0, 1.0, 21) {
            let truth = lerp_uniform(&iterates, 0.5, t);
            let out = eval_spacetime(&parts.net, t, &[x]).unwrap();
            let n = ((t / 0.5).floor() as usize).min(1);
            let bound = eps * (2.0 + iterates[n][0].abs().powf(q) + iterates[n + 1][0].abs().powf(q));
            assert!((truth[0] - out[0]).abs() <= bound, "t = {t}, x = {x}");
        }
    }
    let bound = spacetime_params(1, 2, eps, q, drift.hidden(), drift.params());
    assert!(parts.net.params() as f64 <= bound);
}

#[test]
fn spacetime_summands_follow_the_depth_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    let drift = random_net(&mut rng, &[2, 3, 3, 2], 0.5);
    let y: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 2, 0.1)).collect();
    let s = spec(drift.clone(), 1.0, 3, y, 0.1);
    let parts = spacetime_parts(&s).unwrap();
    for (n, summand) in parts.summands.iter().enumerate() {
        assert_eq!(summand.depth(), parts.product.depth() + 2 + n * drift.hidden());
    }
    assert_eq!(parts.net.input_dim(), 3);
    assert_eq!(parts.net.output_dim(), 2);
}

#[test]
fn spacetime_is_adapted_to_the_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let drift = random_net(&mut rng, &[1, 3, 1], 0.5);
    let steps = 4;
    let y: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, 1, 0.3)).collect();
    let base = spec(drift.clone(), 1.0, steps, y.clone(), 0.1);
    let net = spacetime_parts(&base).unwrap().net;
    for n in 0..steps {
        let mut z = y.clone();
        for v in z.iter_mut().skip(n) {
            v[0] += 5.0;
        }
        let other = spacetime_parts(&spec(drift.clone(), 1.0, steps, z, 0.1)).unwrap().net;
        let t_n = n as f64 / steps as f64;
        for t in linspace(0.0, t_n.max(1e-3), 11).into_iter().filter(|&t| t <= t_n) {
            for x in linspace(-2.0, 2.0, 9) {
                let a = net.realize_exact(&Activation::Relu, &[t, x]).unwrap();
                let b = other.realize_exact(&Activation::Relu, &[t, x]).unwrap();
                assert_eq!(a[0].to_bits(), b[0].to_bits(), "n = {n}, t = {t}, x = {x}");
            }
        }
    }
}

#[test]
fn gronwall_with_zero_constants_is_norm_plus_partial_sums() {
    let y = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, -2.0]];
    let inputs = GrowthBoundInputs::new(0.0, 0.0, vec![0.3, 0.7, 1.1], &y);
    let partial = [0.0, 1.0, 5f64.sqrt(), 5f64.sqrt()];
    for n in 0..=3 {
        assert_eq!(gronwall_bound(&inputs, 1.5, n), 1.5 + partial[n]);
    }
}

#[test]
fn gronwall_on_the_uniform_grid() {
    let (growth, horizon, steps) = (0.8, 2.0, 5);
    let inputs = GrowthBoundInputs::uniform(growth, horizon, steps, &vec![vec![0.0]; steps]);
    for n in 0..=steps {
        let tn = horizon * n as f64 / steps as f64;
        let expected = (1.3 + growth * tn) * (growth * tn).exp();
        assert!((gronwall_bound(&inputs, 1.3, n) - expected).abs() <= 1e-13 * expected);
    }
}

#[test]
fn gronwall_bounds_iterates_of_linear_drifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..100 {
        let d = rng.random_range(1..=4);
        let steps = rng.random_range(1..=10);
        let w = Matrix::from_row_major(d, d, random_vec(&mut rng, d * d, 1.0));
        let b = random_vec(&mut rng, d, 1.0);
        let drift = linear_drift(&w, &b);
        let a: Vec<Matrix> = (0..steps)
            .map(|_| Matrix::from_row_major(d, d, random_vec(&mut rng, d * d, 0.3)))
            .collect();
        let y: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, d, 0.3)).collect();
        let x = random_vec(&mut rng, d, 2.0);
        let inputs = GrowthBoundInputs::new(norm(&b), spectral_norm(&w), a.iter().map(spectral_norm).collect(), &y);
        let iterates = euler_iterates(&drift, &a, &y, &x).unwrap();
        for (n, it) in iterates.iter().enumerate() {
            assert!(norm(it) <= gronwall_bound(&inputs, norm(&x), n) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn headline_size_bound_in_one_dimension() {
    let drift = bounded_drift();
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let y: Vec<Vec<f64>> = (0..2).map(|_| random_vec(&mut rng, 1, 0.2)).collect();
    let s = spec(drift.clone(), 1.0, 2, y, 1e-2);
    let growth = certified_growth(&drift, 1.0);
    let net = spacetime_parts(&s).unwrap().net;
    let c = headline_constant(growth, 1.0);
    assert!(net.params() as f64 <= headline_params(c, 2, 1, 1.0, 1e-2));
    let report = thm1_bounds(&SpacetimeCase { spec: s, growth, size_exponent: 1.0 }).unwrap();
    let failures: Vec<_> = report.failures().collect();
    assert!(failures.is_empty(), "{failures:?}");
}
