//! The network algebra: composition, powers, extensions, parallelizations,
//! sums, and composition through an identity emulator.
//!
//! Every operation produces an explicit layer list. Interior layers of the
//! operands are copied verbatim and only the interface layers are fused, so
//! structural identities (dimension vectors, depths, parameter counts) hold
//! exactly and can be compared as integers.

use crate::error::{AnnError, Result};
use crate::network::{Activation, Layer, Matrix, Network};
use crate::relu::identity_net;

/// A one-hidden-layer network with dims `(d, i, d)` whose realization is the
/// identity on `R^d` for the activation it was validated with.
#[derive(Debug, Clone)]
pub struct IdentityEmulator {
    net: Network,
}

impl IdentityEmulator {
    /// Accepts `net` as an identity emulator after checking its shape and
    /// evaluating it on a fixed set of probe points.
    pub fn new(net: Network, act: &Activation) -> Result<Self> {
        if net.input_dim() != net.output_dim() {
            return Err(AnnError::NotIdentity(format!(
                "dims {} are not of the form (d, i, d)",
                net.dims()
            )));
        }
        if net.hidden() != 1 {
            return Err(AnnError::NotIdentity(format!(
                "dims {} do not have exactly one hidden layer",
                net.dims()
            )));
        }
        let d = net.input_dim();
        for x in probe_points(d) {
            let y = net.realize(act, &x)?;
            let ok = x
                .iter()
                .zip(&y)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
            if !ok {
                return Err(AnnError::NotIdentity(format!(
                    "realization with {} maps {x:?} to {y:?}",
                    act.name()
                )));
            }
        }
        Ok(Self { net })
    }

    /// The ReLU emulator `x = max{x,0} - max{-x,0}` with dims `(d, 2d, d)`.
    pub fn relu(d: usize) -> Self {
        Self {
            net: identity_net(d),
        }
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    /// Dimension `d` of the emulated identity.
    pub fn dim(&self) -> usize {
        self.net.input_dim()
    }

    /// Hidden width `i`.
    pub fn width(&self) -> usize {
        self.net.dims().0[1]
    }
}

/// Deterministic probe vectors: scaled unit vectors plus one mixed vector.
fn probe_points(d: usize) -> Vec<Vec<f64>> {
    let scales = [-2.5, -1.0, -0.25, 0.0, 0.5, 1.0, 3.0];
    let mut pts = Vec::new();
    for j in 0..d {
        for &s in &scales {
            let mut x = vec![0.0; d];
            x[j] = s;
            pts.push(x);
        }
    }
    pts.push((0..d).map(|j| if j % 2 == 0 { 1.5 } else { -0.75 }).collect());
    pts
}

/// Single affine layer `x -> W x + b`; shorthand for [`Network::affine`].
pub fn affine(weights: Matrix, bias: Vec<f64>) -> Result<Network> {
    Network::affine(weights, bias)
}

/// Composition `phi1 ∘ phi2`: the layers of `phi2` except its last, then the
/// fused layer `(W_1 W'_L, W_1 B'_L + B_1)`, then the layers of `phi1` after
/// its first.
pub fn compose(phi1: &Network, phi2: &Network) -> Result<Network> {
    if phi1.input_dim() != phi2.output_dim() {
        return Err(AnnError::Composition {
            outer: phi1.dims().to_string(),
            inner: phi2.dims().to_string(),
            outer_in: phi1.input_dim(),
            inner_out: phi2.output_dim(),
        });
    }
    let outer = phi1.layers();
    let inner = phi2.layers();
    let first = &outer[0];
    let last = &inner[inner.len() - 1];
    let w = first.weights().matmul(last.weights());
    let mut b = first.weights().matvec(last.bias());
    for (v, c) in b.iter_mut().zip(first.bias()) {
        *v += c;
    }
    let mut layers = Vec::with_capacity(inner.len() + outer.len() - 1);
    layers.extend_from_slice(&inner[..inner.len() - 1]);
    layers.push(Layer::new(w, b)?);
    layers.extend_from_slice(&outer[1..]);
    Ok(Network::from_layers_unchecked(layers))
}

/// The `n`-fold power: `phi^0` is the identity layer `(I, 0)` on the output
/// space and `phi^n = phi ∘ phi^(n-1)`.
pub fn power(phi: &Network, n: usize) -> Result<Network> {
    if phi.input_dim() != phi.output_dim() {
        return Err(AnnError::NotSquare {
            dims: phi.dims().to_string(),
        });
    }
    let d = phi.output_dim();
    let mut out = Network::affine(Matrix::identity(d), vec![0.0; d])?;
    for _ in 0..n {
        out = compose(phi, &out)?;
    }
    Ok(out)
}

/// Extension of `phi` to depth `depth` by composing with a power of an
/// identity emulator: `id^(depth - L(phi)) ∘ phi`.
pub fn extend(depth: usize, id: &IdentityEmulator, phi: &Network) -> Result<Network> {
    if depth < phi.depth() {
        return Err(AnnError::Extension {
            depth: phi.depth(),
            target: depth,
        });
    }
    if phi.output_dim() != id.dim() {
        return Err(AnnError::EmulatorMismatch {
            index: 0,
            emulator: id.dim(),
            output: phi.output_dim(),
        });
    }
    compose(&power(id.net(), depth - phi.depth())?, phi)
}

/// Parallelization of networks of equal depth: block-diagonal weights and
/// stacked biases, realizing `(x_1, ..., x_n) -> (f_1(x_1), ..., f_n(x_n))`.
pub fn parallel_equal(nets: &[Network]) -> Result<Network> {
    let first = nets.first().ok_or(AnnError::Empty("parallelization"))?;
    let depth = first.depth();
    if nets.iter().any(|n| n.depth() != depth) {
        return Err(AnnError::DepthMismatch {
            depths: nets.iter().map(Network::depth).collect(),
        });
    }
    let layers = (0..depth)
        .map(|k| {
            let blocks: Vec<&Matrix> = nets.iter().map(|n| n.layers()[k].weights()).collect();
            let bias: Vec<f64> = nets
                .iter()
                .flat_map(|n| n.layers()[k].bias().iter().copied())
                .collect();
            Layer::new(Matrix::block_diag(&blocks), bias)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Network::from_layers_unchecked(layers))
}

/// Parallelization of networks of arbitrary depth: each network is first
/// extended to the maximal depth with its own identity emulator.
pub fn parallel_general(nets: &[Network], ids: &[IdentityEmulator]) -> Result<Network> {
    if nets.is_empty() {
        return Err(AnnError::Empty("parallelization"));
    }
    if nets.len() != ids.len() {
        return Err(AnnError::Mismatch(format!(
            "{} networks but {} identity emulators",
            nets.len(),
            ids.len()
        )));
    }
    for (j, (net, id)) in nets.iter().zip(ids).enumerate() {
        if net.output_dim() != id.dim() {
            return Err(AnnError::EmulatorMismatch {
                index: j,
                emulator: id.dim(),
                output: net.output_dim(),
            });
        }
    }
    let depth = nets.iter().map(Network::depth).max().unwrap_or(1);
    let extended = nets
        .iter()
        .zip(ids)
        .map(|(net, id)| extend(depth, id, net))
        .collect::<Result<Vec<_>>>()?;
    parallel_equal(&extended)
}

/// [`parallel_general`] with the ReLU identity emulator of matching
/// dimension for every network.
pub fn parallel_general_relu(nets: &[Network]) -> Result<Network> {
    let ids: Vec<IdentityEmulator> = nets
        .iter()
        .map(|n| IdentityEmulator::relu(n.output_dim()))
        .collect();
    parallel_general(nets, &ids)
}

/// Fan-out layer `x -> (x, ..., x)` with `m` copies of `R^d`.
fn fan_out(d: usize, m: usize) -> Result<Network> {
    let id = Matrix::identity(d);
    let blocks: Vec<&Matrix> = (0..m).map(|_| &id).collect();
    Network::affine(Matrix::vstack(&blocks), vec![0.0; m * d])
}

/// Weighted fan-in layer `(y_1, ..., y_m) -> sum h_j y_j` on `R^dd`.
fn fan_in(dd: usize, h: &[f64]) -> Result<Network> {
    let scaled: Vec<Matrix> = h.iter().map(|&w| Matrix::identity(dd).scaled(w)).collect();
    let blocks: Vec<&Matrix> = scaled.iter().collect();
    Network::affine(Matrix::hstack(&blocks), vec![0.0; dd])
}

/// Weighted sum of networks with identical dimension vectors:
/// `A_1 ∘ (P(nets) ∘ A_2)` with a fan-out `A_2` and a fan-in `A_1`.
pub fn sum_equal(nets: &[Network], h: &[f64]) -> Result<Network> {
    let first = nets.first().ok_or(AnnError::Empty("sum"))?;
    if h.len() != nets.len() {
        return Err(AnnError::Mismatch(format!(
            "{} networks but {} weights",
            nets.len(),
            h.len()
        )));
    }
    let dims = first.dims();
    if let Some(bad) = nets.iter().find(|n| n.dims() != dims) {
        return Err(AnnError::Mismatch(format!(
            "sum needs identical dims, got {} and {}",
            dims,
            bad.dims()
        )));
    }
    let par = parallel_equal(nets)?;
    let inner = compose(&par, &fan_out(first.input_dim(), nets.len())?)?;
    compose(&fan_in(first.output_dim(), h)?, &inner)
}

/// Weighted sum of networks sharing input and output dimensions but of
/// arbitrary depths, using `id` to extend the shorter networks.
pub fn sum_general(nets: &[Network], id: &IdentityEmulator, h: &[f64]) -> Result<Network> {
    let first = nets.first().ok_or(AnnError::Empty("sum"))?;
    if h.len() != nets.len() {
        return Err(AnnError::Mismatch(format!(
            "{} networks but {} weights",
            nets.len(),
            h.len()
        )));
    }
    let (d, dd) = (first.input_dim(), first.output_dim());
    for (j, n) in nets.iter().enumerate() {
        if n.input_dim() != d || n.output_dim() != dd {
            return Err(AnnError::Mismatch(format!(
                "network {j} maps R^{} to R^{}, expected R^{d} to R^{dd}",
                n.input_dim(),
                n.output_dim()
            )));
        }
    }
    let ids = vec![id.clone(); nets.len()];
    let par = parallel_general(nets, &ids)?;
    let inner = compose(&par, &fan_out(d, nets.len())?)?;
    compose(&fan_in(dd, h)?, &inner)
}

/// Composition through an identity emulator: `phi1 ∘ (id ∘ phi2)`.
pub fn concat_identity(phi1: &Network, id: &IdentityEmulator, phi2: &Network) -> Result<Network> {
    if phi1.input_dim() != id.dim() || phi2.output_dim() != id.dim() {
        return Err(AnnError::Composition {
            outer: phi1.dims().to_string(),
            inner: phi2.dims().to_string(),
            outer_in: phi1.input_dim(),
            inner_out: phi2.output_dim(),
        });
    }
    compose(phi1, &compose(id.net(), phi2)?)
}
