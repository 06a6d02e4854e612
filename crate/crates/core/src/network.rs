//! Networks as explicit sequences of affine layers.
//!
//! A [`Network`] is a pure data object: a non-empty list of layers
//! `(W_k, B_k)` where `W_k` has `l_k` rows and `l_{k-1}` columns. The
//! activation is supplied separately when the network is realized, so the
//! same network can be evaluated with ReLU, the identity, or any other
//! scalar function.
//!
//! Networks are immutable after construction and every algebraic operation
//! in [`crate::calculus`] returns a fresh value.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use xsum::{Xsum, XsumSmall};

use crate::error::{AnnError, Result};

/// Dense row-major matrix of `f64` scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Square identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major storage.
    ///
    /// # Panics
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    /// Builds a matrix from a list of rows. Fails on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(AnnError::Mismatch("ragged matrix rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// A single column built from a vector.
    pub fn column(v: &[f64]) -> Self {
        Self::from_row_major(v.len(), 1, v.to_vec())
    }

    /// A single row built from a vector.
    pub fn row_vector(v: &[f64]) -> Self {
        Self::from_row_major(1, v.len(), v.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Overwrites entry `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Underlying row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copies the matrix into a list of rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Matrix product `self * other`.
    ///
    /// Every entry is accumulated from `0.0` in increasing order of the inner
    /// index, so identical inputs always give bit-identical outputs. Zero
    /// factors on the left are skipped, which does not change the result for
    /// finite operands.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let acc = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in acc.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = 0.0;
                for (&a, &b) in self.row(i).iter().zip(x) {
                    acc += a * b;
                }
                acc
            })
            .collect()
    }

    /// Every entry multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Entrywise sum of two matrices of equal shape.
    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Block-diagonal matrix `diag(blocks[0], blocks[1], ...)`.
    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                let dst = (r0 + i) * cols + c0;
                out.data[dst..dst + b.cols].copy_from_slice(b.row(i));
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Blocks placed side by side. All blocks must have the same row count.
    pub fn hstack(blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.first().map_or(0, |b| b.rows);
        assert!(blocks.iter().all(|b| b.rows == rows), "hstack row mismatch");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut c0 = 0;
        for b in blocks {
            for i in 0..rows {
                let dst = i * cols + c0;
                out.data[dst..dst + b.cols].copy_from_slice(b.row(i));
            }
            c0 += b.cols;
        }
        out
    }

    /// Blocks stacked vertically. All blocks must have the same column count.
    pub fn vstack(blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        assert!(blocks.iter().all(|b| b.cols == cols), "vstack column mismatch");
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Matrix { rows, cols, data }
    }

    /// Frobenius norm, an upper bound for the Euclidean operator norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Exact equality of shape and of the bit patterns of every entry.
    pub fn bit_eq(&self, other: &Matrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// One affine layer `x -> W x + B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: Matrix,
    bias: Vec<f64>,
}

impl Layer {
    /// Builds a layer, checking that the bias length matches the row count
    /// and that both dimensions are positive.
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        Self::checked(weights, bias, 0)
    }

    fn checked(weights: Matrix, bias: Vec<f64>, index: usize) -> Result<Self> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(AnnError::Shape {
                layer: index,
                reason: format!(
                    "weight matrix is {}x{}, both dimensions must be positive",
                    weights.rows(),
                    weights.cols()
                ),
            });
        }
        if weights.rows() != bias.len() {
            return Err(AnnError::Shape {
                layer: index,
                reason: format!(
                    "weight matrix has {} rows but bias has {} entries",
                    weights.rows(),
                    bias.len()
                ),
            });
        }
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Output dimension `l_k`.
    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// Input dimension `l_{k-1}`.
    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    /// `W x + B`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.weights.matvec(x);
        for (v, b) in y.iter_mut().zip(&self.bias) {
            *v += b;
        }
        y
    }

    /// `W x + B` with every component rounded once from its exact value.
    ///
    /// Each product `w x` is split into `p + e` with `p = fl(w x)` and
    /// `e = fma(w, x, -p)`, and all parts are summed exactly. The split is
    /// exact unless a product underflows.
    pub fn apply_exact(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.in_dim(), x.len(), "layer input dimension mismatch");
        let mut acc = XsumSmall::new();
        (0..self.out_dim())
            .map(|i| {
                acc.clear();
                acc.add(self.bias[i]);
                for (w, v) in self.weights.row(i).iter().zip(x) {
                    let p = w * v;
                    acc.add(p);
                    acc.add(w.mul_add(*v, -p));
                }
                acc.sum()
            })
            .collect()
    }

    /// Exact equality of shapes and scalar bit patterns.
    pub fn bit_eq(&self, other: &Layer) -> bool {
        self.weights.bit_eq(&other.weights)
            && self.bias.len() == other.bias.len()
            && self
                .bias
                .iter()
                .zip(&other.bias)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// The dimension vector `(l_0, l_1, ..., l_L)` of a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dims(pub Vec<usize>);

impl Dims {
    /// Number of affine layers `L`.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    /// Number of hidden layers `H = L - 1`.
    pub fn hidden(&self) -> usize {
        self.depth() - 1
    }

    /// Input dimension `l_0`.
    pub fn input(&self) -> usize {
        self.0[0]
    }

    /// Output dimension `l_L`.
    pub fn output(&self) -> usize {
        *self.0.last().expect("dims are never empty")
    }

    /// Parameter count `sum_k l_k (l_{k-1} + 1)`.
    pub fn params(&self) -> usize {
        self.0.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// A scalar activation function applied componentwise.
#[derive(Clone)]
pub enum Activation {
    /// `max{x, 0}`.
    Relu,
    /// `x`.
    Identity,
    /// Any continuous scalar function, tagged with a display name.
    Custom(&'static str, Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Activation {
    /// Evaluates the scalar function.
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
            Activation::Custom(_, f) => f(x),
        }
    }

    /// Applies the function to every entry in place.
    pub fn apply_in_place(&self, v: &mut [f64]) {
        match self {
            Activation::Relu => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            Activation::Identity => {}
            Activation::Custom(_, f) => v.iter_mut().for_each(|x| *x = f(*x)),
        }
    }

    /// Short name used in logs and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Custom(name, _) => name,
        }
    }
}

impl fmt::Debug for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Activation({})", self.name())
    }
}

/// A feedforward network: a non-empty chain of affine layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    /// Builds a network, checking that the layers chain.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(AnnError::NoLayers);
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(AnnError::Shape {
                    layer: k + 1,
                    reason: format!(
                        "expects input dimension {} but layer {} outputs {}",
                        pair[1].in_dim(),
                        k,
                        pair[0].out_dim()
                    ),
                });
            }
        }
        Ok(Self { layers })
    }

    /// Builds a network from `(weights, bias)` pairs.
    pub fn from_parts(parts: Vec<(Matrix, Vec<f64>)>) -> Result<Self> {
        let layers = parts
            .into_iter()
            .enumerate()
            .map(|(k, (w, b))| Layer::checked(w, b, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    /// The single-layer network `x -> W x + b`.
    pub fn affine(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        Self::new(vec![Layer::new(weights, bias)?])
    }

    /// Builds a network whose layers are already known to chain.
    pub(crate) fn from_layers_unchecked(layers: Vec<Layer>) -> Self {
        debug_assert!(Self::new(layers.clone()).is_ok());
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Dimension vector `(l_0, ..., l_L)`.
    pub fn dims(&self) -> Dims {
        let mut d = Vec::with_capacity(self.layers.len() + 1);
        d.push(self.layers[0].in_dim());
        d.extend(self.layers.iter().map(Layer::out_dim));
        Dims(d)
    }

    /// Number of affine layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of hidden layers `H = L - 1`.
    pub fn hidden(&self) -> usize {
        self.layers.len() - 1
    }

    /// Parameter count `sum_k l_k (l_{k-1} + 1)`.
    pub fn params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.out_dim() * (l.in_dim() + 1))
            .sum()
    }

    /// Input dimension `l_0`.
    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    /// Output dimension `l_L`.
    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Evaluates the realization: the activation follows every layer except
    /// the last one.
    pub fn realize(&self, act: &Activation, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(AnnError::InputDim {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut v = x.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            v = layer.apply(&v);
            if k < last {
                act.apply_in_place(&mut v);
            }
        }
        Ok(v)
    }

    /// Realization in which every affine map is evaluated with correctly
    /// rounded dot products. Slower than [`Network::realize`], but terms
    /// that cancel exactly in a weighted sum leave no rounding residue.
    pub fn realize_exact(&self, act: &Activation, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(AnnError::InputDim {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut v = x.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            v = layer.apply_exact(&v);
            if k < last {
                act.apply_in_place(&mut v);
            }
        }
        Ok(v)
    }

    /// Realization with the ReLU activation.
    pub fn relu(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.realize(&Activation::Relu, x)
    }

    /// Exact structural equality: same shapes and bit-identical scalars.
    pub fn bit_eq(&self, other: &Network) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.bit_eq(b))
    }

    /// Serializes to the `.ann.json` interchange format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("networks always serialize")
    }

    /// Parses the `.ann.json` interchange format.
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| AnnError::Parse(e.to_string()))
    }
}

/// Wire format of a layer: row-major weights and a bias vector.
#[derive(Serialize, Deserialize)]
struct LayerDoc {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

/// Wire format of a network.
#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    layers: Vec<LayerDoc>,
}

impl TryFrom<NetworkDoc> for Network {
    type Error = AnnError;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let parts = doc
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, l)| {
                let w = Matrix::from_rows(&l.weights).map_err(|_| AnnError::Shape {
                    layer: k,
                    reason: "weight rows have different lengths".into(),
                })?;
                Ok((w, l.bias))
            })
            .collect::<Result<Vec<_>>>()?;
        Network::from_parts(parts)
    }
}

impl From<Network> for NetworkDoc {
    fn from(net: Network) -> Self {
        NetworkDoc {
            layers: net
                .layers
                .into_iter()
                .map(|l| LayerDoc {
                    weights: l.weights.to_rows(),
                    bias: l.bias,
                })
                .collect(),
        }
    }
}

/// Euclidean norm `(sum |x_j|^2)^{1/2}`.
pub fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net_213() -> Network {
        Network::from_parts(vec![
            (
                Matrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0], vec![0.0, 1.0]]).unwrap(),
                vec![0.0, -1.0, 0.25],
            ),
            (Matrix::from_rows(&[vec![1.0, 1.0, -2.0]]).unwrap(), vec![3.0]),
        ])
        .unwrap()
    }

    #[test]
    fn single_layer_dims() {
        let n = Network::affine(Matrix::from_rows(&[vec![2.0]]).unwrap(), vec![1.0]).unwrap();
        assert_eq!(n.dims(), Dims(vec![1, 1]));
        assert_eq!(n.params(), 2);
        assert_eq!(n.hidden(), 0);
    }

    #[test]
    fn params_from_dims() {
        assert_eq!(Dims(vec![1, 4, 1]).params(), 13);
        assert_eq!(Dims(vec![1, 2, 1]).params(), 7);
        assert_eq!(Dims(vec![2, 3]).params(), 9);
    }

    #[test]
    fn realization_applies_activation_between_layers() {
        let n = net_213();
        // hidden pre-activation at (1, 2): (-1, 3.5, 2.25), ReLU gives (0, 3.5, 2.25)
        let y = n.relu(&[1.0, 2.0]).unwrap();
        assert_eq!(y, vec![0.0 + 3.5 - 4.5 + 3.0]);
        let y = n.realize(&Activation::Identity, &[1.0, 2.0]).unwrap();
        assert_eq!(y, vec![-1.0 + 3.5 - 4.5 + 3.0]);
    }

    #[test]
    fn wrong_input_length_is_rejected() {
        let err = net_213().relu(&[1.0]).unwrap_err();
        assert_eq!(err, AnnError::InputDim { expected: 2, got: 1 });
    }

    #[test]
    fn chaining_is_enforced() {
        let err = Network::from_parts(vec![
            (Matrix::zeros(3, 2), vec![0.0; 3]),
            (Matrix::zeros(1, 2), vec![0.0]),
        ])
        .unwrap_err();
        assert!(matches!(err, AnnError::Shape { layer: 1, .. }));
    }

    #[test]
    fn json_round_trip() {
        let n = net_213();
        let back = Network::from_json(&n.to_json()).unwrap();
        assert!(back.bit_eq(&n));
    }

    #[test]
    fn json_bias_mismatch_names_layer() {
        let doc = r#"{"layers":[{"weights":[[1,0],[0,1]],"bias":[0,0,0]}]}"#;
        let err = Network::from_json(doc).unwrap_err();
        assert!(err.to_string().contains("layer 0"), "{err}");
    }

    #[test]
    fn block_diag_and_stacks() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let d = Matrix::block_diag(&[&a, &b]);
        assert_eq!(
            d.to_rows(),
            vec![vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 3.0], vec![0.0, 0.0, 4.0]]
        );
        let h = Matrix::hstack(&[&Matrix::identity(2), &Matrix::identity(2).scaled(2.0)]);
        assert_eq!(h.to_rows(), vec![vec![1.0, 0.0, 2.0, 0.0], vec![0.0, 1.0, 0.0, 2.0]]);
        let v = Matrix::vstack(&[&a, &a]);
        assert_eq!(v.rows(), 2);
    }

    #[test]
    fn matmul_matches_hand_computation() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, -1.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        assert_eq!(a.matmul(&b).to_rows(), vec![vec![11.0], vec![-4.0]]);
    }
}
