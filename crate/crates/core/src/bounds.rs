//! Closed-form size and depth bounds of the constructions.
//!
//! Each function evaluates the right-hand side of one inequality in `f64`.
//! They are used by the verification suites and by the tests to compare
//! measured parameter counts and depths against their guaranteed limits.

use crate::network::Dims;

/// `P(phi1) + P(phi2) + l_{1,1} l_{2,L2-1}` for a composition `phi1 ∘ phi2`.
pub fn compose_params(outer: &Dims, inner: &Dims) -> f64 {
    let l11 = outer.0[1];
    let l2 = inner.0[inner.depth() - 1];
    (outer.params() + inner.params() + l11 * l2) as f64
}

/// `max{1, O(A)/O(phi)} P(phi)` for an affine layer `A` placed after `phi`.
pub fn affine_after_params(affine_out: usize, phi_out: usize, phi_params: usize) -> f64 {
    (affine_out as f64 / phi_out as f64).max(1.0) * phi_params as f64
}

/// `max{1, (I(A)+1)/(I(phi)+1)} P(phi)` for an affine layer `A` placed
/// before `phi`.
pub fn affine_before_params(affine_in: usize, phi_in: usize, phi_params: usize) -> f64 {
    ((affine_in as f64 + 1.0) / (phi_in as f64 + 1.0)).max(1.0) * phi_params as f64
}

/// Parameter bound for the extension of a network with depth `depth`,
/// output dimension `d` and `params` parameters to depth `target` with an
/// emulator of hidden width `i`.
pub fn extend_params(target: usize, depth: usize, params: usize, i: usize, d: usize) -> f64 {
    if target == depth {
        return params as f64;
    }
    let (i, d) = (i as f64, d as f64);
    (i / d).max(1.0) * params as f64 + (((target - depth - 1) as f64) * i + d) * (i + 1.0)
}

/// `max{1, i/I(Psi), i/O(Psi)} (P(phi1) + P(phi2))` for composition through
/// an emulator with dims `(d, i, d)`.
pub fn concat_params(p1: usize, p2: usize, i: usize, d: usize) -> f64 {
    (i as f64 / d as f64).max(1.0) * (p1 + p2) as f64
}

/// `(1/2) (sum P_j)^2` for equal-depth parallelization.
pub fn parallel_equal_params(params: &[usize]) -> f64 {
    let s: f64 = params.iter().map(|&p| p as f64).sum();
    0.5 * s * s
}

/// `n^2 P(phi_1)` for equal-depth parallelization of nets with equal dims.
pub fn parallel_identical_params(n: usize, p1: usize) -> f64 {
    (n * n * p1) as f64
}

/// Mixed-depth parallelization bound. Each entry of `nets` is
/// `(depth, output dim, params, emulator width)`.
pub fn parallel_general_params(nets: &[(usize, usize, usize, usize)]) -> f64 {
    let depth = nets.iter().map(|n| n.0).max().unwrap_or(1);
    let mut total = 0.0;
    for &(l, o, p, i) in nets {
        if l < depth {
            let (o, i) = (o as f64, i as f64);
            total += (i / o).max(1.0) * p as f64;
            total += ((depth - l - 1) as f64) * i * (i + 1.0) + o * (i + 1.0);
        } else {
            total += p as f64;
        }
    }
    0.5 * total * total
}

/// `M^2 P(phi_1)` for the equal-dims sum.
pub fn sum_equal_params(m: usize, p1: usize) -> f64 {
    (m * m * p1) as f64
}

/// Bound for the mixed-depth sum; each entry of `nets` is `(depth, params)`,
/// all nets share output dimension `dd` and emulator width `i`.
pub fn sum_general_params(nets: &[(usize, usize)], dd: usize, i: usize) -> f64 {
    let with_dims: Vec<_> = nets.iter().map(|&(l, p)| (l, dd, p, i)).collect();
    parallel_general_params(&with_dims)
}

/// Exact parameter count of the residual step built from `phi1` (the
/// increment, depth at least two), `phi2` (the base), and an emulator of
/// width `i` on `R^d`.
pub fn residual_step_params_exact(phi1: &Dims, phi2: &Dims, i: usize, d: usize) -> i64 {
    let l1 = &phi1.0;
    let big_l1 = phi1.depth();
    let l2_last = phi2.0[phi2.depth() - 1] as i64;
    let (i, d) = (i as i64, d as i64);
    let sum_from_2: i64 = (2..=big_l1).map(|m| l1[m] as i64).sum();
    let sum_to_l1_minus_2: i64 = (1..=big_l1.saturating_sub(2)).map(|m| l1[m] as i64).sum();
    phi1.params() as i64 + phi2.params() as i64 + (i - d) * (l2_last + 1)
        + l1[1] as i64 * (l2_last - d)
        + (big_l1 as i64 - 2) * i * (i + 1)
        + i * sum_from_2
        + i * sum_to_l1_minus_2
}

/// `P(phi2) + [P(I)/2 + P(phi1)]^2`, valid when `2 ≤ i ≤ 2d` and the last
/// hidden width of `phi2` is at most that of `phi1` plus `i`.
pub fn residual_step_params(p1: usize, p2: usize, p_id: usize) -> f64 {
    let t = 0.5 * p_id as f64 + p1 as f64;
    p2 as f64 + t * t
}

/// `P(psi) + sum_k [P(I)/2 + P(phi_k)]^2`.
pub fn residual_chain_params(p_psi: usize, p_phis: &[usize], p_id: usize) -> f64 {
    p_psi as f64
        + p_phis
            .iter()
            .map(|&p| {
                let t = 0.5 * p_id as f64 + p as f64;
                t * t
            })
            .sum::<f64>()
}

/// `P(I) + n [P(I)/2 + P(Phi)]^2` for the Euler network after `n` steps.
pub fn euler_space_params(n: usize, p_id: usize, p_drift: usize) -> f64 {
    let t = 0.5 * p_id as f64 + p_drift as f64;
    p_id as f64 + n as f64 * t * t
}

/// `max{10 log2(1/eps) - 7, 13}`.
pub fn square_unit_params(eps: f64) -> f64 {
    (10.0 * (1.0 / eps).log2() - 7.0).max(13.0)
}

/// `max{log2(1/eps)/2 + 1, 2}`.
pub fn square_unit_depth(eps: f64) -> f64 {
    (0.5 * (1.0 / eps).log2() + 1.0).max(2.0)
}

/// `max{[40q/(q-2)] log2(1/eps) + 80/(q-2) - 28, 52}`.
pub fn square_real_params(eps: f64, q: f64) -> f64 {
    (40.0 * q / (q - 2.0) * (1.0 / eps).log2() + 80.0 / (q - 2.0) - 28.0).max(52.0)
}

/// `max{[q/(2(q-2))] log2(1/eps) + 1/(q-2) + 1, 2}`.
pub fn square_real_depth(eps: f64, q: f64) -> f64 {
    (q / (2.0 * (q - 2.0)) * (1.0 / eps).log2() + 1.0 / (q - 2.0) + 1.0).max(2.0)
}

/// `[360q/(q-2)] [log2(1/eps) + q + 1] - 252`.
pub fn product_params(eps: f64, q: f64) -> f64 {
    360.0 * q / (q - 2.0) * ((1.0 / eps).log2() + q + 1.0) - 252.0
}

/// `[q/(q-2)] [log2(1/eps) + q]`.
pub fn product_depth(eps: f64, q: f64) -> f64 {
    q / (q - 2.0) * ((1.0 / eps).log2() + q)
}

/// `d^2 [360q/(q-2)] [log2(1/eps) + q + 1] - 252 d^2`.
pub fn scalar_vector_params(eps: f64, q: f64, d: usize) -> f64 {
    (d * d) as f64 * product_params(eps, q)
}

/// Same depth bound as the product approximator.
pub fn scalar_vector_depth(eps: f64, q: f64) -> f64 {
    product_depth(eps, q)
}

/// `[720q/(q-2)] [log2(1/eps) + q + 1] - 504`.
pub fn size_constant(eps: f64, q: f64) -> f64 {
    720.0 * q / (q - 2.0) * ((1.0 / eps).log2() + q + 1.0) - 504.0
}

/// Parameter bound of the space-time network:
/// `(1/2) [6 d^2 N^2 H + 3N [d^2 D + (23 + 6 N H + 7 d^2 + N [4 d^2 + P]^2)^2]]^2`
/// where `H` and `P` are the hidden-layer and parameter counts of the drift.
pub fn spacetime_params(d: usize, n: usize, eps: f64, q: f64, drift_hidden: usize, drift_params: usize) -> f64 {
    let (d2, nn, h, p) = (
        (d * d) as f64,
        n as f64,
        drift_hidden as f64,
        drift_params as f64,
    );
    let inner = 23.0 + 6.0 * nn * h + 7.0 * d2 + nn * (4.0 * d2 + p).powi(2);
    let outer = 6.0 * d2 * nn * nn * h + 3.0 * nn * (d2 * size_constant(eps, q) + inner * inner);
    0.5 * outer * outer
}

/// The constant `c = max{exp(C T), D_{1,3}, 62 + 6 C (C + 1)}` for a drift
/// growth constant `C` and horizon `T`.
pub fn headline_constant(growth: f64, horizon: f64) -> f64 {
    (growth * horizon)
        .exp()
        .max(size_constant(1.0, 3.0))
        .max(62.0 + 6.0 * growth * (growth + 1.0))
}

/// `54 c^4 N^6 d^(16 + 8 dd) [1 + ln^2 eps]`.
pub fn headline_params(c: f64, n: usize, d: usize, size_exponent: f64, eps: f64) -> f64 {
    54.0 * c.powi(4)
        * (n as f64).powi(6)
        * (d as f64).powf(16.0 + 8.0 * size_exponent)
        * (1.0 + eps.ln().powi(2))
}

/// `20 c^6 sqrt(d) N^(3/2) eps (1 + |x|^3 + |y|^3)`.
pub fn headline_error(c: f64, n: usize, d: usize, eps: f64, x_norm: f64, y_norm: f64) -> f64 {
    20.0 * c.powi(6)
        * (d as f64).sqrt()
        * (n as f64).powf(1.5)
        * eps
        * (1.0 + x_norm.powi(3) + y_norm.powi(3))
}

/// `18 c^4 sqrt(d) N (1 + |x|^2 + |y|^2)`.
pub fn headline_growth(c: f64, n: usize, d: usize, x_norm: f64, y_norm: f64) -> f64 {
    18.0 * c.powi(4) * (d as f64).sqrt() * n as f64 * (1.0 + x_norm.powi(2) + y_norm.powi(2))
}
