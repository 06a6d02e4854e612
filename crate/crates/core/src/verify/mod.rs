//! Bound reports, sample grids, and the named verification suites.
//!
//! A [`BoundReport`] is a list of `(quantity, measured, bound)` entries. An
//! inequality entry passes when `measured ≤ bound + ABS_TOL`; an identity
//! entry passes when `|measured - bound| ≤ tol · max{1, |bound|}`.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AnnError, Result};
use crate::network::{Dims, Matrix, Network};

pub mod spacetime;
mod suites;

pub use spacetime::{spacetime_checks, thm1_bounds, SpacetimeCase};
pub use suites::{run_suite, SUITES};

/// Headroom added to the bound side of every inequality entry.
pub const ABS_TOL: f64 = 1e-9;
/// Relative tolerance of realization identities.
pub const REL_TOL: f64 = 1e-12;

/// One checked quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub quantity: String,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Collection of checked quantities with a description of the samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
    pub grid: String,
    pub seed: Option<u64>,
}

impl BoundReport {
    pub fn new(grid: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            entries: Vec::new(),
            grid: grid.into(),
            seed,
        }
    }

    fn push(&mut self, quantity: impl Into<String>, measured: f64, bound: f64, pass: bool) -> bool {
        self.entries.push(BoundEntry {
            quantity: quantity.into(),
            measured,
            bound,
            margin: bound - measured,
            pass,
        });
        pass
    }

    /// Inequality `measured ≤ bound` with [`ABS_TOL`] headroom. NaN fails.
    pub fn check_le(&mut self, quantity: impl Into<String>, measured: f64, bound: f64) -> bool {
        let pass = measured <= bound + ABS_TOL;
        self.push(quantity, measured, bound, pass)
    }

    /// Identity `measured = expected` up to `tol · max{1, |expected|}`.
    pub fn check_close(
        &mut self,
        quantity: impl Into<String>,
        measured: f64,
        expected: f64,
        tol: f64,
    ) -> bool {
        let pass = (measured - expected).abs() <= tol * expected.abs().max(1.0);
        self.push(quantity, measured, expected, pass)
    }

    /// Exact integer identity.
    pub fn check_exact(&mut self, quantity: impl Into<String>, measured: i64, expected: i64) -> bool {
        self.push(quantity, measured as f64, expected as f64, measured == expected)
    }

    /// A boolean property, recorded as `1` (holds) against the bound `1`.
    pub fn check_true(&mut self, quantity: impl Into<String>, holds: bool) -> bool {
        self.push(quantity, f64::from(u8::from(holds)), 1.0, holds)
    }

    /// Appends the entries of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: BoundReport) {
        for mut e in other.entries {
            e.quantity = format!("{prefix}{}", e.quantity);
            self.entries.push(e);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// CSV with header `quantity,measured,bound,margin,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,measured,bound,margin,pass\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{}",
                e.quantity, e.measured, e.bound, e.margin, e.pass
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Pretty JSON with entries, grid description and seed.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }
}

/// Largest weighted distance `|f(p) - g(p)| / weight(p)` over `grid`.
/// Points are evaluated in parallel; the reduction runs in grid order so the
/// result does not depend on scheduling. A NaN at any point is returned as
/// NaN.
pub fn sup_error_on_grid<F, G, W>(f: F, g: G, grid: &[Vec<f64>], weight: W) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    G: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    W: Fn(&[f64]) -> f64 + Sync,
{
    if grid.is_empty() {
        return Err(AnnError::Empty("sample grid"));
    }
    let errors = grid
        .par_iter()
        .map(|p| {
            let (a, b) = (f(p)?, g(p)?);
            if a.len() != b.len() {
                return Err(AnnError::Mismatch(format!(
                    "compared functions return {} and {} components",
                    a.len(),
                    b.len()
                )));
            }
            let diff: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
            Ok(crate::network::euclidean_norm(&diff) / weight(p))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors
        .into_iter()
        .fold(0.0, |acc, e| if e.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(e) }))
}

/// Entries for the dims, depth, hidden-layer count, parameter count, input
/// and output dimension of `net` against `expected`.
pub fn check_structural(net: &Network, expected: &Dims) -> BoundReport {
    let dims = net.dims();
    let mut r = BoundReport::new(format!("expected dims {expected}"), None);
    r.check_true("dims", dims == *expected);
    r.check_exact("L", dims.depth() as i64, expected.depth() as i64);
    r.check_exact("H", dims.hidden() as i64, expected.hidden() as i64);
    r.check_exact("P", dims.params() as i64, expected.params() as i64);
    r.check_exact("I", dims.input() as i64, expected.input() as i64);
    r.check_exact("O", dims.output() as i64, expected.output() as i64);
    r
}

/// `n ≥ 2` equally spaced points from `a` to `b` inclusive.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a uniform grid needs at least two points");
    let last = (n - 1) as f64;
    (0..n).map(|k| a + (b - a) * k as f64 / last).collect()
}

/// Cartesian product of one-dimensional axes; the last axis varies fastest.
pub fn tensor_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// First `count` points (indices `1..=count`) of the Halton sequence mapped
/// to the box `[lo, hi]`. Supports up to 16 dimensions.
pub fn halton(count: usize, lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    assert!(lo.len() == hi.len() && lo.len() <= PRIMES.len());
    (1..=count as u64)
        .map(|i| {
            lo.iter()
                .zip(hi)
                .zip(PRIMES)
                .map(|((a, b), p)| a + (b - a) * radical_inverse(i, p))
                .collect()
        })
        .collect()
}

/// `count` uniform random points in the box `[lo, hi]`.
pub fn random_points<R: Rng>(rng: &mut R, count: usize, lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| lo.iter().zip(hi).map(|(a, b)| rng.random_range(*a..=*b)).collect())
        .collect()
}

/// Random network with the given dims and weights and biases uniform in
/// `[-scale, scale]`.
pub fn random_network<R: Rng>(rng: &mut R, dims: &[usize], scale: f64) -> Network {
    let parts = dims
        .windows(2)
        .map(|w| {
            let data = (0..w[0] * w[1]).map(|_| rng.random_range(-scale..=scale)).collect();
            let bias = (0..w[1]).map(|_| rng.random_range(-scale..=scale)).collect();
            (Matrix::from_row_major(w[1], w[0], data), bias)
        })
        .collect();
    Network::from_parts(parts).expect("consecutive dims chain by construction")
}

/// Random dims `(input, l_1, ..., l_{depth-1}, output)` with hidden widths
/// in `1..=max_width`.
pub fn random_dims<R: Rng>(
    rng: &mut R,
    depth: usize,
    input: usize,
    output: usize,
    max_width: usize,
) -> Vec<usize> {
    let mut dims = vec![input];
    dims.extend((1..depth).map(|_| rng.random_range(1..=max_width)));
    dims.push(output);
    dims
}

/// Componentwise `max_i |a_i - b_i| / max{1, |b_i|}`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "compared vectors differ in length");
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs() / v.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// The `(measured, bound)` pair with the smallest `bound - measured`.
pub fn tightest(pairs: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    for p in pairs {
        if best.0.is_nan() || best.1.is_nan() {
            break;
        }
        if p.0.is_nan() || p.1.is_nan() || p.1 - p.0 < best.1 - best.0 {
            best = p;
        }
    }
    best
}
