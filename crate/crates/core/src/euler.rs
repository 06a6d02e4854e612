//! Networks for perturbed Euler schemes.
//!
//! For a drift network `Phi` on `R^d`, step matrices `A_1, ..., A_N` and
//! perturbations `y_1, ..., y_N`, the perturbed Euler iterates are
//!
//! ```text
//! Y_0 = x,    Y_{n+1} = Y_n + A_{n+1} Phi(Y_n) + y_{n+1}.
//! ```
//!
//! This module builds networks that realize `x -> Y_n` exactly
//! ([`euler_space_net`]), networks that realize the piecewise-linear
//! interpolation in time up to a controlled error ([`spacetime_net`]), and
//! the a priori norm bound on the iterates ([`gronwall_bound`]).

use crate::calculus::{
    compose, concat_identity, parallel_equal, parallel_general, power, sum_general,
    IdentityEmulator,
};
use crate::error::{AnnError, Result};
use crate::network::{euclidean_norm, Activation, Matrix, Network};
use crate::relu::{hat_net, identity_net, scalar_vector_product, ApproxSpec};

/// Drift, horizon, step count, perturbations, accuracy and exponent of a
/// space-time approximation problem on the uniform grid `t_n = n T / N`.
#[derive(Debug, Clone)]
pub struct EulerSpec {
    pub drift: Network,
    pub horizon: f64,
    pub steps: usize,
    pub y: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub q: f64,
}

impl EulerSpec {
    /// Checks the shape of the drift and perturbations and the ranges of
    /// the scalar parameters.
    pub fn validate(&self) -> Result<()> {
        let d = self.drift.input_dim();
        if self.drift.output_dim() != d {
            return Err(AnnError::NotSquare {
                dims: self.drift.dims().to_string(),
            });
        }
        if self.steps == 0 {
            return Err(AnnError::Domain("N must be at least 1".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(AnnError::Domain(format!(
                "T must be positive and finite, got {}",
                self.horizon
            )));
        }
        if self.y.len() != self.steps {
            return Err(AnnError::Mismatch(format!(
                "{} perturbations for {} steps",
                self.y.len(),
                self.steps
            )));
        }
        if let Some(k) = self.y.iter().position(|v| v.len() != d) {
            return Err(AnnError::Mismatch(format!(
                "perturbation y_{} has length {} instead of {d}",
                k + 1,
                self.y[k].len()
            )));
        }
        ApproxSpec::new(self.epsilon, self.q, d)?;
        Ok(())
    }

    /// Spatial dimension `d`.
    pub fn dim(&self) -> usize {
        self.drift.input_dim()
    }

    /// Grid point `t_n = n T / N`; also defined for the ghost nodes
    /// `n = -1` and `n = N + 1`.
    pub fn time(&self, n: i64) -> f64 {
        n as f64 * self.horizon / self.steps as f64
    }

    /// Step matrices `A_n = (T/N) I_d`, `n = 1, ..., N`.
    pub fn step_matrices(&self) -> Vec<Matrix> {
        let h = self.horizon / self.steps as f64;
        vec![Matrix::identity(self.dim()).scaled(h); self.steps]
    }

    /// Euler iterates `Y_0, ..., Y_N` started at `x`, computed directly.
    pub fn iterates(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        euler_iterates(&self.drift, &self.step_matrices(), &self.y, x)
    }
}

/// Direct evaluation of the perturbed Euler recursion with the ReLU
/// realization of `drift`. Returns `Y_0, ..., Y_n` for `n = steps.len()`.
pub fn euler_iterates(
    drift: &Network,
    steps: &[Matrix],
    y: &[Vec<f64>],
    x: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if y.len() < steps.len() {
        return Err(AnnError::Mismatch(format!(
            "{} perturbations for {} steps",
            y.len(),
            steps.len()
        )));
    }
    let mut out = vec![x.to_vec()];
    for (a, yk) in steps.iter().zip(y) {
        let cur = out.last().expect("non-empty");
        let incr = a.matvec(&drift.relu(cur)?);
        out.push(
            cur.iter()
                .zip(&incr)
                .zip(yk)
                .map(|((c, i), v)| c + i + v)
                .collect(),
        );
    }
    Ok(out)
}

/// Piecewise-linear interpolation weight of node `n` on the grid `nodes`
/// (which must include one ghost node before the first and one after the
/// last grid point): rises linearly on `(t_{n-1}, t_n]`, falls on
/// `(t_n, t_{n+1})`, zero elsewhere.
pub fn hat_weight(nodes: &[f64], n: usize, t: f64) -> f64 {
    let (a, b, c) = (nodes[n], nodes[n + 1], nodes[n + 2]);
    if t > a && t <= b {
        (t - a) / (b - a)
    } else if t > b && t < c {
        (c - t) / (c - b)
    } else {
        0.0
    }
}

/// Time-interpolated Euler value `sum_n f_n(t) Y_n` on an arbitrary
/// increasing grid `times = (t_0, ..., t_N)` with `t_0 = 0`.
pub fn interpolate_iterates(times: &[f64], iterates: &[Vec<f64>], t: f64) -> Result<Vec<f64>> {
    let last = *times.last().ok_or(AnnError::Empty("interpolation"))?;
    if !(t >= times[0] && t <= last) {
        return Err(AnnError::Domain(format!(
            "t = {t} lies outside [{}, {last}]",
            times[0]
        )));
    }
    let n = times.len();
    let mut nodes = Vec::with_capacity(n + 2);
    nodes.push(times[0] - (times.get(1).copied().unwrap_or(times[0] + 1.0) - times[0]));
    nodes.extend_from_slice(times);
    let tail = if n >= 2 { times[n - 1] - times[n - 2] } else { 1.0 };
    nodes.push(last + tail);
    let d = iterates[0].len();
    let mut out = vec![0.0; d];
    for (k, yk) in iterates.iter().enumerate().take(n) {
        let w = hat_weight(&nodes, k, t);
        if w != 0.0 {
            for (o, v) in out.iter_mut().zip(yk) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

/// Ground truth `Y_t` of the space-time problem for `t ∈ [0, T]`.
pub fn euler_oracle(spec: &EulerSpec, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let times: Vec<f64> = (0..=spec.steps as i64).map(|n| spec.time(n)).collect();
    interpolate_iterates(&times, &spec.iterates(x)?, t)
}

fn check_square(net: &Network, d: usize, what: &str) -> Result<()> {
    if net.input_dim() != d || net.output_dim() != d {
        return Err(AnnError::Mismatch(format!(
            "{what} has dims {} but must map R^{d} to R^{d}",
            net.dims()
        )));
    }
    Ok(())
}

/// Fan-out `x -> (x, x)` and sum `(u, v) -> u + v` on `R^d`.
fn duplicate_and_add(d: usize) -> Result<(Network, Network)> {
    let eye = Matrix::identity(d);
    let dup = Network::affine(Matrix::vstack(&[&eye, &eye]), vec![0.0; 2 * d])?;
    let add = Network::affine(Matrix::hstack(&[&eye, &eye]), vec![0.0; d])?;
    Ok((dup, add))
}

/// Residual step: a network realizing `x -> f2(x) + f1(f2(x))` where `f1`
/// and `f2` are the realizations of `phi1` and `phi2`.
///
/// The increment `phi1` runs in parallel with the `(L1 - 1)`-th power of the
/// identity emulator; a fan-out in front and a summing layer behind merge
/// the two branches. Requires `L(phi1) ≥ 2`.
pub fn residual_step(phi1: &Network, phi2: &Network, id: &IdentityEmulator) -> Result<Network> {
    let d = id.dim();
    check_square(phi1, d, "increment network")?;
    check_square(phi2, d, "base network")?;
    if phi1.depth() < 2 {
        return Err(AnnError::Hypothesis(format!(
            "increment network must have depth at least 2, got {}",
            phi1.depth()
        )));
    }
    let pass = power(id.net(), phi1.depth() - 1)?;
    let branches = parallel_equal(&[phi1.clone(), pass])?;
    let (dup, add) = duplicate_and_add(d)?;
    compose(&add, &compose(&compose(&branches, &dup)?, phi2)?)
}

/// Residual step for an affine increment `(A, b)`: the single layer
/// `(A + I, b)` placed after `psi`, which keeps the dims of `psi`.
fn affine_residual_step(phi: &Network, psi: &Network) -> Result<Network> {
    let layer = &phi.layers()[0];
    let d = layer.out_dim();
    let absorbed = Network::affine(
        layer.weights().add(&Matrix::identity(d)),
        layer.bias().to_vec(),
    )?;
    compose(&absorbed, psi)
}

/// Checks the width and depth hypotheses of the iterated residual chain.
fn check_chain_hypotheses(psi: &Network, phis: &[Network], id: &IdentityEmulator) -> Result<()> {
    let d = id.dim();
    check_square(psi, d, "initial network")?;
    for (k, phi) in phis.iter().enumerate() {
        check_square(phi, d, &format!("increment network {k}"))?;
    }
    let Some(first) = phis.first() else {
        return Ok(());
    };
    let depth = first.depth();
    if let Some(k) = phis.iter().position(|p| p.depth() != depth) {
        return Err(AnnError::Hypothesis(format!(
            "all increments must share one depth: increment 0 has {depth}, increment {k} has {}",
            phis[k].depth()
        )));
    }
    if depth == 1 {
        return Ok(());
    }
    let i = id.width();
    if !(2 <= i && i <= 2 * d) {
        return Err(AnnError::Hypothesis(format!(
            "2 <= i <= 2d fails for emulator width i = {i}, d = {d}"
        )));
    }
    let psi_dims = psi.dims();
    let psi_last_hidden = psi_dims.0[psi_dims.depth() - 1];
    let width = |p: &Network| p.dims().0[depth - 1];
    if psi_last_hidden > width(first) + i {
        return Err(AnnError::Hypothesis(format!(
            "last hidden width of the initial network ({psi_last_hidden}) exceeds \
             l(0, L-1) + i = {}",
            width(first) + i
        )));
    }
    for (k, pair) in phis.windows(2).enumerate() {
        if width(&pair[0]) > width(&pair[1]) {
            return Err(AnnError::Hypothesis(format!(
                "l({k}, L-1) = {} exceeds l({}, L-1) = {}",
                width(&pair[0]),
                k + 1,
                width(&pair[1])
            )));
        }
    }
    Ok(())
}

/// All networks `Psi_0 = psi, Psi_1, ..., Psi_n` of the residual chain
/// `f_{k+1} = f_k + phi_k(f_k)` for `n = phis.len()`.
pub fn residual_chain_all(
    psi: &Network,
    phis: &[Network],
    id: &IdentityEmulator,
) -> Result<Vec<Network>> {
    check_chain_hypotheses(psi, phis, id)?;
    let mut out = vec![psi.clone()];
    for phi in phis {
        let cur = out.last().expect("non-empty");
        let next = if phi.depth() == 1 {
            affine_residual_step(phi, cur)?
        } else {
            residual_step(phi, cur, id)?
        };
        out.push(next);
    }
    Ok(out)
}

/// The network realizing `f_n` where `f_0 = psi` and
/// `f_{k+1} = f_k + phi_k ∘ f_k`. Uses `phis[0..n]`.
pub fn residual_chain(
    psi: &Network,
    phis: &[Network],
    id: &IdentityEmulator,
    n: usize,
) -> Result<Network> {
    if n > phis.len() {
        return Err(AnnError::Mismatch(format!(
            "{n} steps requested but only {} increments given",
            phis.len()
        )));
    }
    Ok(residual_chain_all(psi, &phis[..n], id)?
        .pop()
        .expect("chain is never empty"))
}

/// Increment networks `(A_{k+1}, y_{k+1}) ∘ drift`, `k = 0, ..., n-1`.
fn euler_increments(drift: &Network, steps: &[Matrix], y: &[Vec<f64>]) -> Result<Vec<Network>> {
    steps
        .iter()
        .zip(y)
        .map(|(a, yk)| compose(&Network::affine(a.clone(), yk.clone())?, drift))
        .collect()
}

fn check_euler_inputs(drift: &Network, steps: &[Matrix], y: &[Vec<f64>]) -> Result<()> {
    let d = drift.input_dim();
    check_square(drift, d, "drift")?;
    if steps.len() != y.len() {
        return Err(AnnError::Mismatch(format!(
            "{} step matrices but {} perturbations",
            steps.len(),
            y.len()
        )));
    }
    for (k, a) in steps.iter().enumerate() {
        if a.rows() != d || a.cols() != d {
            return Err(AnnError::Mismatch(format!(
                "step matrix A_{} is {}x{}, expected {d}x{d}",
                k + 1,
                a.rows(),
                a.cols()
            )));
        }
    }
    if let Some(k) = y.iter().position(|v| v.len() != d) {
        return Err(AnnError::Mismatch(format!(
            "perturbation y_{} has length {} instead of {d}",
            k + 1,
            y[k].len()
        )));
    }
    Ok(())
}

/// Networks realizing the Euler iterates `x -> Y_n` for every
/// `n = 0, ..., steps.len()`, starting from the identity emulator.
pub fn euler_space_nets(drift: &Network, steps: &[Matrix], y: &[Vec<f64>]) -> Result<Vec<Network>> {
    check_euler_inputs(drift, steps, y)?;
    let d = drift.input_dim();
    let incs = euler_increments(drift, steps, y)?;
    residual_chain_all(&identity_net(d), &incs, &IdentityEmulator::relu(d))
}

/// Network realizing the Euler iterate `x -> Y_n` exactly. Only
/// `steps[0..n]` and `y[0..n]` enter the construction.
pub fn euler_space_net(drift: &Network, steps: &[Matrix], y: &[Vec<f64>], n: usize) -> Result<Network> {
    if n > steps.len() || n > y.len() {
        return Err(AnnError::Mismatch(format!(
            "iterate {n} requested with {} step matrices and {} perturbations",
            steps.len(),
            y.len()
        )));
    }
    Ok(euler_space_nets(drift, &steps[..n], &y[..n])?
        .pop()
        .expect("chain is never empty"))
}

/// The hat networks `Pi_0, ..., Pi_N` of the uniform grid, with ghost nodes
/// `t_{-1} = -T/N` and `t_{N+1} = (N+1) T / N`.
pub fn time_nets(spec: &EulerSpec) -> Result<Vec<Network>> {
    (0..=spec.steps as i64)
        .map(|n| hat_net(spec.time(n - 1), spec.time(n), spec.time(n + 1), 1.0))
        .collect()
}

/// Building blocks of the space-time network.
#[derive(Debug, Clone)]
pub struct SpacetimeParts {
    /// Hat networks in time.
    pub time: Vec<Network>,
    /// Exact Euler networks in space.
    pub space: Vec<Network>,
    /// Scalar-vector product approximator.
    pub product: Network,
    /// Summands `(t, x) -> Pi_n(t) * Xi_n(x)`.
    pub summands: Vec<Network>,
    /// The summed network.
    pub net: Network,
}

/// Builds the space-time network and keeps the intermediate pieces.
pub fn spacetime_parts(spec: &EulerSpec) -> Result<SpacetimeParts> {
    spec.validate()?;
    let d = spec.dim();
    let time = time_nets(spec)?;
    let space = euler_space_nets(&spec.drift, &spec.step_matrices(), &spec.y)?;
    let product = scalar_vector_product(spec.epsilon, spec.q, d)?;
    let id_1 = IdentityEmulator::relu(1);
    let id_d = IdentityEmulator::relu(d);
    let id_joint = IdentityEmulator::relu(d + 1);
    let summands = time
        .iter()
        .zip(&space)
        .map(|(pi, xi)| {
            let pair = parallel_general(&[pi.clone(), xi.clone()], &[id_1.clone(), id_d.clone()])?;
            concat_identity(&product, &id_joint, &pair)
        })
        .collect::<Result<Vec<_>>>()?;
    let ones = vec![1.0; summands.len()];
    let net = sum_general(&summands, &id_d, &ones)?;
    Ok(SpacetimeParts {
        time,
        space,
        product,
        summands,
        net,
    })
}

/// The space-time network `(t, x) -> approx Y_t` mapping `R^(d+1)` to `R^d`.
pub fn spacetime_net(spec: &EulerSpec) -> Result<Network> {
    Ok(spacetime_parts(spec)?.net)
}

/// Inputs of the a priori bound on Euler iterates: growth constants `C`, `c`
/// with `|mu(x)| ≤ C + c |x|`, operator norms of the step matrices, and the
/// running maxima `max_{m ≤ n} |y_1 + ... + y_m|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthBoundInputs {
    pub big_c: f64,
    pub small_c: f64,
    pub step_norms: Vec<f64>,
    pub partial_sum_max: Vec<f64>,
}

impl GrowthBoundInputs {
    /// Computes the running maxima of the partial sums of `y` (Euclidean
    /// norm); `partial_sum_max[0] = 0`.
    pub fn new(big_c: f64, small_c: f64, step_norms: Vec<f64>, y: &[Vec<f64>]) -> Self {
        let mut partial_sum_max = vec![0.0];
        let mut sum = vec![0.0; y.first().map_or(0, Vec::len)];
        let mut best: f64 = 0.0;
        for yk in y {
            for (s, v) in sum.iter_mut().zip(yk) {
                *s += v;
            }
            best = best.max(euclidean_norm(&sum));
            partial_sum_max.push(best);
        }
        Self {
            big_c,
            small_c,
            step_norms,
            partial_sum_max,
        }
    }

    /// The uniform-grid case: `C = c = growth` and `|A_k| = T/N`.
    pub fn uniform(growth: f64, horizon: f64, steps: usize, y: &[Vec<f64>]) -> Self {
        Self::new(growth, growth, vec![horizon / steps as f64; steps], y)
    }
}

/// A priori bound
/// `|Y_n| ≤ (|x| + C sum_{k≤n} |A_k| + max_{m≤n} |sum_{k≤m} y_k|) exp(c sum_{k≤n} |A_k|)`.
pub fn gronwall_bound(inputs: &GrowthBoundInputs, x_norm: f64, n: usize) -> f64 {
    let s: f64 = inputs.step_norms[..n].iter().sum();
    (x_norm + inputs.big_c * s + inputs.partial_sum_max[n]) * (inputs.small_c * s).exp()
}

/// Certified constants `(C, c)` with `|R(net)(x)| ≤ C + c |x|` for the ReLU
/// realization, from `|relu(z)| ≤ |z|` and Frobenius norms of the weights.
pub fn relu_growth_constants(net: &Network) -> (f64, f64) {
    let (mut big_c, mut small_c) = (0.0, 1.0);
    for layer in net.layers() {
        let w = layer.weights().frobenius_norm();
        big_c = w * big_c + euclidean_norm(layer.bias());
        small_c *= w;
    }
    (big_c, small_c)
}

/// A constant `c` with `|R(net)(x)| ≤ c (1 + |x|)` and
/// `P(net) ≤ c d^size_exponent`, from [`relu_growth_constants`].
pub fn certified_growth(net: &Network, size_exponent: f64) -> f64 {
    let (big_c, small_c) = relu_growth_constants(net);
    let size = net.params() as f64 / (net.input_dim() as f64).powf(size_exponent);
    big_c.max(small_c).max(size)
}

/// Evaluates a network with ReLU on `R^(d+1)` at `(t, x)`.
pub fn eval_spacetime(net: &Network, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let mut z = Vec::with_capacity(x.len() + 1);
    z.push(t);
    z.extend_from_slice(x);
    net.realize(&Activation::Relu, &z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Dims;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_rows(&[vec![v]]).unwrap()
    }

    #[test]
    fn residual_with_zero_increment_reproduces_base() {
        let zero = Network::from_parts(vec![
            (Matrix::zeros(2, 1), vec![0.0; 2]),
            (Matrix::zeros(1, 2), vec![0.0]),
        ])
        .unwrap();
        let base = Network::affine(scalar(3.0), vec![1.0]).unwrap();
        let r = residual_step(&zero, &base, &IdentityEmulator::relu(1)).unwrap();
        for x in [-2.0, 0.0, 1.5] {
            assert_eq!(r.relu(&[x]).unwrap(), vec![3.0 * x + 1.0]);
        }
    }

    #[test]
    fn chain_with_no_steps_is_initial_network() {
        let psi = identity_net(2);
        let out = residual_chain(&psi, &[], &IdentityEmulator::relu(2), 0).unwrap();
        assert!(out.bit_eq(&psi));
    }

    #[test]
    fn affine_increments_keep_dims() {
        let psi = identity_net(1);
        let phis = vec![Network::affine(scalar(0.5), vec![1.0]).unwrap(); 3];
        let out = residual_chain(&psi, &phis, &IdentityEmulator::relu(1), 3).unwrap();
        assert_eq!(out.dims(), Dims(vec![1, 2, 1]));
        // x -> 1.5 x + 1 three times
        let x = 2.0;
        let expect = ((1.5 * x + 1.0) * 1.5 + 1.0) * 1.5 + 1.0;
        assert_eq!(out.relu(&[x]).unwrap(), vec![expect]);
    }

    #[test]
    fn linear_drift_gives_geometric_growth() {
        // drift x -> x as a depth-two ReLU network
        let drift = identity_net(1);
        let h = 0.25;
        let steps = vec![scalar(h); 4];
        let y = vec![vec![0.0]; 4];
        let net = euler_space_net(&drift, &steps, &y, 4).unwrap();
        let x = 0.7;
        let got = net.relu(&[x]).unwrap()[0];
        let expect = (1.0 + h).powi(4) * x;
        assert!((got - expect).abs() <= 1e-12 * expect.abs());
        assert_eq!(net.hidden(), 1 + 4 * drift.hidden());
    }

    #[test]
    fn first_iterate_net_is_identity() {
        let drift = identity_net(2);
        let net = euler_space_net(&drift, &[], &[], 0).unwrap();
        assert_eq!(net.relu(&[0.3, -4.0]).unwrap(), vec![0.3, -4.0]);
    }

    #[test]
    fn oracle_interpolates_between_nodes() {
        let spec = EulerSpec {
            drift: identity_net(1),
            horizon: 1.0,
            steps: 4,
            y: vec![vec![0.1], vec![-0.2], vec![0.0], vec![0.3]],
            epsilon: 0.1,
            q: 3.0,
        };
        let it = spec.iterates(&[1.0]).unwrap();
        assert_eq!(euler_oracle(&spec, 0.0, &[1.0]).unwrap(), vec![1.0]);
        assert_eq!(euler_oracle(&spec, 0.5, &[1.0]).unwrap(), it[2]);
        let mid = euler_oracle(&spec, 0.375, &[1.0]).unwrap()[0];
        assert!((mid - 0.5 * (it[1][0] + it[2][0])).abs() <= 1e-15);
        assert!(euler_oracle(&spec, 1.5, &[1.0]).is_err());
    }

    #[test]
    fn gronwall_trivial_constants() {
        let y = vec![vec![1.0, 0.0], vec![-3.0, 0.0], vec![1.0, 1.0]];
        let g = GrowthBoundInputs::new(0.0, 0.0, vec![0.5; 3], &y);
        assert_eq!(g.partial_sum_max, vec![0.0, 1.0, 2.0, 2.0]);
        assert_eq!(gronwall_bound(&g, 1.5, 3), 3.5);
    }

    #[test]
    fn chain_rejects_mixed_depths() {
        let psi = identity_net(1);
        let phis = vec![identity_net(1), Network::affine(scalar(1.0), vec![0.0]).unwrap()];
        assert!(matches!(
            residual_chain(&psi, &phis, &IdentityEmulator::relu(1), 2),
            Err(AnnError::Hypothesis(_))
        ));
    }
}
