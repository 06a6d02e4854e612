//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls into the constructors under test: every reference value
//! is computed from an elementary closed form or a plain loop.

#![allow(dead_code)]

use ann_calculus::network::{Matrix, Network};
use nalgebra::DMatrix;
use rand::Rng;

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Evaluates `net` with ReLU by walking its layers with a plain loop.
pub fn forward(net: &Network, x: &[f64]) -> Vec<f64> {
    let layers = net.layers();
    let mut cur = x.to_vec();
    for (k, layer) in layers.iter().enumerate() {
        let w = layer.weights();
        let mut next = layer.bias().to_vec();
        for (i, out) in next.iter_mut().enumerate() {
            for (j, v) in cur.iter().enumerate() {
                *out += w.get(i, j) * v;
            }
        }
        if k + 1 < layers.len() {
            next.iter_mut().for_each(|v| *v = relu(*v));
        }
        cur = next;
    }
    cur
}

/// Outputs of the hidden layers (after ReLU) of `net` at `x`.
pub fn hidden_states(net: &Network, x: &[f64]) -> Vec<Vec<f64>> {
    let layers = net.layers();
    let mut states = Vec::new();
    let mut cur = x.to_vec();
    for layer in &layers[..layers.len() - 1] {
        cur = layer.apply(&cur).into_iter().map(relu).collect();
        states.push(cur.clone());
    }
    states
}

/// One step of the tent map on `[0,1]`, zero outside.
pub fn tent_step(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        0.0
    } else if x < 0.5 {
        2.0 * x
    } else {
        2.0 - 2.0 * x
    }
}

/// `n`-fold iterate of [`tent_step`].
pub fn tent_iterate(n: u32, x: f64) -> f64 {
    (0..n).fold(x, |v, _| tent_step(v))
}

/// Piecewise-linear interpolant of `x^2` on the dyadic cells of width
/// `2^-n`: the chord through `(a, a^2)` and `(b, b^2)`.
pub fn dyadic_chord(n: u32, x: f64) -> f64 {
    let cells = 2f64.powi(n as i32);
    let k = (x * cells).floor().min(cells - 1.0);
    let (a, b) = (k / cells, (k + 1.0) / cells);
    a * a + (x - a) * (a + b)
}

/// Hat function with apex `beta` and height `h` on `(alpha, gamma)`.
pub fn hat(alpha: f64, beta: f64, gamma: f64, h: f64, t: f64) -> f64 {
    if t <= alpha || t >= gamma {
        0.0
    } else if t <= beta {
        h * (t - alpha) / (beta - alpha)
    } else {
        h * (gamma - t) / (gamma - beta)
    }
}

/// The recursion `Y_{k+1} = Y_k + h mu(Y_k) + y_{k+1}` with uniform step `h`.
pub fn euler_loop(mu: impl Fn(&[f64]) -> Vec<f64>, h: f64, y: &[Vec<f64>], x: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![x.to_vec()];
    for yk in y {
        let cur = out.last().unwrap().clone();
        let m = mu(&cur);
        out.push((0..cur.len()).map(|i| cur[i] + h * m[i] + yk[i]).collect());
    }
    out
}

/// Linear interpolation of `values` at `t` on the uniform grid
/// `0, h, 2h, ..., (len-1) h`.
pub fn lerp_uniform(values: &[Vec<f64>], h: f64, t: f64) -> Vec<f64> {
    let last = values.len() - 1;
    let n = ((t / h).floor() as usize).min(last - 1);
    let s = (t - n as f64 * h) / h;
    values[n]
        .iter()
        .zip(&values[n + 1])
        .map(|(a, b)| (1.0 - s) * a + s * b)
        .collect()
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let dm = DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice());
    dm.singular_values().max()
}

/// `d x d` linear-plus-constant drift `x -> W x + b` as a depth-2 ReLU
/// network `(W, b)` split into positive and negative parts.
pub fn linear_drift(w: &Matrix, b: &[f64]) -> Network {
    let d = w.rows();
    let mut w1 = Vec::with_capacity(2 * d * d);
    let mut b1 = Vec::with_capacity(2 * d);
    for sign in [1.0, -1.0] {
        for i in 0..d {
            w1.extend(w.row(i).iter().map(|v| sign * v));
            b1.push(sign * b[i]);
        }
    }
    let mut w2 = vec![0.0; d * 2 * d];
    for i in 0..d {
        w2[i * 2 * d + i] = 1.0;
        w2[i * 2 * d + d + i] = -1.0;
    }
    Network::from_parts(vec![
        (Matrix::from_row_major(2 * d, d, w1), b1),
        (Matrix::from_row_major(d, 2 * d, w2), vec![0.0; d]),
    ])
    .unwrap()
}

/// Random network with the given dims and entries uniform in `[-s, s]`.
pub fn random_net<R: Rng>(rng: &mut R, dims: &[usize], s: f64) -> Network {
    let parts = dims
        .windows(2)
        .map(|w| {
            let data = (0..w[0] * w[1]).map(|_| rng.random_range(-s..=s)).collect();
            let bias = (0..w[1]).map(|_| rng.random_range(-s..=s)).collect();
            (Matrix::from_row_major(w[1], w[0], data), bias)
        })
        .collect();
    Network::from_parts(parts).unwrap()
}

/// Random dims of the given depth with hidden widths in `1..=max_width`.
pub fn random_dims<R: Rng>(rng: &mut R, depth: usize, i: usize, o: usize, max_width: usize) -> Vec<usize> {
    let mut dims = vec![i];
    dims.extend((1..depth).map(|_| rng.random_range(1..=max_width)));
    dims.push(o);
    dims
}

pub fn random_vec<R: Rng>(rng: &mut R, d: usize, s: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-s..=s)).collect()
}

/// `max_i |a_i - b_i| / max{1, |b_i|}`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs() / v.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// `n ≥ 2` equally spaced points from `a` to `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Halton point `i ≥ 1` in `[0,1]^d` for bases 2, 3, 5, 7, ...
pub fn halton_point(i: u64, d: usize) -> Vec<f64> {
    const BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    BASES[..d]
        .iter()
        .map(|&b| {
            let (mut k, mut f, mut r) = (i, 1.0 / b as f64, 0.0);
            while k > 0 {
                r += f * (k % b) as f64;
                k /= b;
                f /= b as f64;
            }
            r
        })
        .collect()
}
