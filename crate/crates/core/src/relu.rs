//! Explicit ReLU networks: the identity emulator, hat functions, the
//! tent-map square approximator on `[0,1]`, its rescaled version on `R`,
//! one-dimensional products, and scalar-vector products.
//!
//! All constructors return plain [`Network`] values. Their approximation
//! guarantees refer to the ReLU realization ([`Network::relu`]); with other
//! activations the same weights realize different functions.

use crate::calculus::{compose, parallel_equal};
use crate::error::{AnnError, Result};
use crate::network::{Matrix, Network};

/// Accuracy `epsilon`, growth exponent `q`, and (for vector constructions)
/// the dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxSpec {
    pub epsilon: f64,
    pub q: f64,
    pub d: usize,
}

impl ApproxSpec {
    pub fn new(epsilon: f64, q: f64, d: usize) -> Result<Self> {
        let spec = Self { epsilon, q, d };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks `epsilon ∈ (0,1]`, `q > 2` and `d ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if !(self.q > 2.0 && self.q.is_finite()) {
            return Err(AnnError::Domain(format!(
                "q must be a finite number greater than 2, got {}",
                self.q
            )));
        }
        if self.d == 0 {
            return Err(AnnError::Domain("d must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(AnnError::Domain(format!("epsilon must lie in (0,1], got {eps}")))
    }
}

/// The ReLU identity emulator with dims `(d, 2d, d)`, realizing
/// `x = max{x,0} - max{-x,0}` componentwise.
pub fn identity_net(d: usize) -> Network {
    assert!(d >= 1, "identity_net needs d >= 1");
    let eye = Matrix::identity(d);
    let neg = eye.scaled(-1.0);
    let w1 = Matrix::vstack(&[&eye, &neg]);
    let w2 = Matrix::hstack(&[&eye, &neg]);
    Network::from_parts(vec![(w1, vec![0.0; 2 * d]), (w2, vec![0.0; d])])
        .expect("identity layers chain")
}

/// Hat function of height `h` supported on `(alpha, gamma)` with apex at
/// `beta`, as a `(1, 4, 1)` network.
///
/// The ReLU realization is `(t - alpha) h / (beta - alpha)` on
/// `(alpha, beta]`, `(gamma - t) h / (gamma - beta)` on `(beta, gamma)`,
/// and zero elsewhere.
pub fn hat_net(alpha: f64, beta: f64, gamma: f64, h: f64) -> Result<Network> {
    if !(alpha < beta && beta < gamma) || ![alpha, beta, gamma, h].iter().all(|v| v.is_finite()) {
        return Err(AnnError::Domain(format!(
            "hat needs finite alpha < beta < gamma, got ({alpha}, {beta}, {gamma})"
        )));
    }
    let up = 1.0 / (beta - alpha);
    let down = 1.0 / (gamma - beta);
    let w1 = Matrix::column(&[up, up, down, down]);
    let b1 = vec![
        -alpha / (beta - alpha),
        -beta / (beta - alpha),
        -beta / (gamma - beta),
        -gamma / (gamma - beta),
    ];
    let w2 = Matrix::row_vector(&[h, -h, -h, h]);
    Network::from_parts(vec![(w1, b1), (w2, vec![0.0])])
}

/// Closed form of the `n`-fold iterated tent map `g_n`, `n ≥ 1`.
///
/// `g_1(x) = 2x` on `[0, 1/2)`, `2 - 2x` on `[1/2, 1]`, and `0` outside
/// `[0,1]`; `g_n` is a sawtooth with `2^(n-1)` teeth of height one.
pub fn tent_g(n: u32, x: f64) -> f64 {
    assert!(n >= 1, "tent_g is defined for n >= 1");
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    let cells = 2f64.powi(n as i32 - 1);
    let scale = 2f64.powi(n as i32);
    let k = (x * cells).floor().min(cells - 1.0);
    if x < (2.0 * k + 1.0) / scale {
        scale * (x - 2.0 * k / scale)
    } else {
        scale * ((2.0 * k + 2.0) / scale - x)
    }
}

/// Closed form of the dyadic interpolant `f_n` of `x^2` on `[0,1]`:
/// `f_n(x) = ((2k+1)/2^n) x - (k^2+k)/2^(2n)` on `[k/2^n, (k+1)/2^n)`.
pub fn tent_f(n: u32, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(AnnError::Domain(format!(
            "f_n is defined on [0,1], got x = {x}"
        )));
    }
    let cells = 2f64.powi(n as i32);
    let k = (x * cells).floor().min(cells - 1.0);
    Ok((2.0 * k + 1.0) / cells * x - (k * k + k) / (cells * cells))
}

/// Depth `M` of the square approximator for accuracy `epsilon`: the least
/// integer `M ≥ 2` with `M ≥ log2(1/epsilon) / 2`.
///
/// The half-logarithm is evaluated in floating point; a value within one ulp
/// above an integer is snapped to that integer before rounding up.
pub fn square_unit_order(epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    let half_log = 0.5 * (1.0 / epsilon).log2();
    let nearest = half_log.round();
    let snapped = if (half_log - nearest).abs() <= f64::EPSILON * nearest.abs().max(1.0) {
        nearest
    } else {
        half_log.ceil()
    };
    Ok((snapped as usize).max(2))
}

/// Square approximator on `[0,1]` with `M = square_unit_order(epsilon)`
/// layers and dims `(1, 4, ..., 4, 1)`.
///
/// Hidden neuron `k` carries the three tent pieces of `g_k` in its first
/// three coordinates and the interpolant `f_{k-1}` in the fourth. The ReLU
/// realization equals `max{x,0}` outside `[0,1]` and is within `2^(-2M)` of
/// `x^2` on `[0,1]`.
pub fn square_unit(epsilon: f64) -> Result<Network> {
    let m = square_unit_order(epsilon)?;
    let shifts = vec![0.0, -0.5, -1.0, 0.0];
    let mut parts = vec![(Matrix::column(&[1.0, 1.0, 1.0, 1.0]), shifts.clone())];
    for k in 2..m {
        parts.push((hidden_square_matrix(k), shifts.clone()));
    }
    let (a, b) = interpolant_weights(m);
    parts.push((Matrix::row_vector(&[a, b, a, 1.0]), vec![0.0]));
    Network::from_parts(parts)
}

/// Weights `((-2)^(3-2k), 2^(4-2k))` that subtract `2^(-2(k-1)) g_(k-1)`
/// from the running interpolant.
fn interpolant_weights(k: usize) -> (f64, f64) {
    let e = 3 - 2 * k as i32;
    (-(2f64.powi(e)), 2f64.powi(e + 1))
}

fn hidden_square_matrix(k: usize) -> Matrix {
    let (a, b) = interpolant_weights(k);
    Matrix::from_rows(&[
        vec![2.0, -4.0, 2.0, 0.0],
        vec![2.0, -4.0, 2.0, 0.0],
        vec![2.0, -4.0, 2.0, 0.0],
        vec![a, b, a, 1.0],
    ])
    .expect("fixed 4x4 layout")
}

/// Square approximator on `R` with relative accuracy
/// `|x^2 - R(x)| ≤ epsilon max{1, |x|^q}`.
///
/// Two copies of the unit approximator with accuracy
/// `2^(-2/(q-2)) epsilon^(q/(q-2))` evaluate `s x` and `-s x` for
/// `s = (epsilon/2)^(1/(q-2))`, and the results are summed and rescaled by
/// `s^(-2)`.
pub fn square_real(epsilon: f64, q: f64) -> Result<Network> {
    ApproxSpec::new(epsilon, q, 1)?;
    let delta = 2f64.powf(-2.0 / (q - 2.0)) * epsilon.powf(q / (q - 2.0));
    let psi = square_unit(delta)?;
    let s = (epsilon / 2.0).powf(1.0 / (q - 2.0));
    let a1 = Network::affine(Matrix::column(&[s, -s]), vec![0.0, 0.0])?;
    let a2 = Network::affine(Matrix::row_vector(&[s.powi(-2), s.powi(-2)]), vec![0.0])?;
    let par = parallel_equal(&[psi.clone(), psi])?;
    compose(&a2, &compose(&par, &a1)?)
}

/// Product approximator on `R^2` with
/// `|xy - R(x,y)| ≤ epsilon max{1, |x|^q, |y|^q}`, built by polarization
/// `xy = ((x+y)^2 - x^2 - y^2) / 2` from three square approximators of
/// accuracy `epsilon / (2^(q-1) + 1)`.
pub fn product_net(epsilon: f64, q: f64) -> Result<Network> {
    ApproxSpec::new(epsilon, q, 1)?;
    let delta = epsilon / (2f64.powf(q - 1.0) + 1.0);
    let psi = square_real(delta, q)?;
    let a1 = Network::affine(
        Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]])?,
        vec![0.0; 3],
    )?;
    let a2 = Network::affine(Matrix::row_vector(&[0.5, -0.5, -0.5]), vec![0.0])?;
    let par = parallel_equal(&[psi.clone(), psi.clone(), psi])?;
    compose(&a2, &compose(&par, &a1)?)
}

/// Scalar-vector product approximator `(t, x) -> t x` from `R^(d+1)` to
/// `R^d`: an interleaving layer `(t, x) -> (t, x_1, t, x_2, ..., t, x_d)`
/// followed by `d` parallel product approximators of accuracy `epsilon`.
pub fn scalar_vector_product(epsilon: f64, q: f64, d: usize) -> Result<Network> {
    ApproxSpec::new(epsilon, q, d)?;
    let mut a = Matrix::zeros(2 * d, d + 1);
    for j in 0..d {
        a.set(2 * j, 0, 1.0);
        a.set(2 * j + 1, j + 1, 1.0);
    }
    let interleave = Network::affine(a, vec![0.0; 2 * d])?;
    let psi = product_net(epsilon, q)?;
    let par = parallel_equal(&vec![psi; d])?;
    compose(&par, &interleave)
}
