//! The named verification batteries behind `anncalc verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spacetime::{default_space_points, default_times, spacetime_checks, SpacetimeCase};
use super::{
    halton, random_dims, random_network, random_points, rel_diff, sup_error_on_grid, tensor_grid,
    tightest, uniform_grid, BoundReport,
};
use crate::bounds;
use crate::calculus::{
    compose, concat_identity, extend, parallel_equal, parallel_general, power, sum_general,
    IdentityEmulator,
};
use crate::error::{AnnError, Result};
use crate::euler::{
    certified_growth, euler_iterates, euler_space_nets, gronwall_bound, hat_weight,
    spacetime_parts, EulerSpec, GrowthBoundInputs,
};
use crate::network::{euclidean_norm, Activation, Matrix, Network};
use crate::relu::{
    identity_net, product_net, scalar_vector_product, square_real, square_unit, square_unit_order,
    tent_f, tent_g,
};

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 7] = [
    "calculus", "square", "product", "scalvec", "euler", "spacetime", "thm1",
];

/// Runs the named battery with all randomness drawn from `seed`.
pub fn run_suite(name: &str, seed: u64) -> Result<BoundReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = match name {
        "calculus" => calculus(&mut rng, 50)?,
        "square" => square()?,
        "product" => product(&mut rng)?,
        "scalvec" => scalvec()?,
        "euler" => euler(&mut rng)?,
        "spacetime" => spacetime(&mut rng)?,
        "thm1" => thm1(&mut rng, &[1, 2], &[2, 4], &[1e-1, 1e-2])?,
        other => return Err(AnnError::UnknownSuite(other.to_string())),
    };
    report.seed = Some(seed);
    Ok(report)
}

fn points<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    random_points(rng, 4, &vec![-2.0; d], &vec![2.0; d])
}

fn max_rel_diff(
    net: &Network,
    pts: &[Vec<f64>],
    oracle: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in pts {
        worst = worst.max(rel_diff(&net.relu(p)?, &oracle(p)?));
    }
    Ok(worst)
}

/// Running maximum of `measured / bound` and count of mismatches for one law.
#[derive(Default)]
struct Law {
    rel_err: f64,
    ratio: f64,
    mismatches: i64,
}

impl Law {
    fn record(&mut self, r: &mut BoundReport, name: &str) {
        r.check_le(format!("{name}.realization_rel_err"), self.rel_err, super::REL_TOL);
        r.check_le(format!("{name}.params/bound"), self.ratio, 1.0);
        r.check_exact(format!("{name}.structure_mismatches"), self.mismatches, 0);
    }
}

/// Random network with the given depth, weights in `[-1, 1]` and hidden
/// widths up to four.
fn net<R: Rng>(rng: &mut R, depth: usize, input: usize, output: usize) -> Network {
    let dims = random_dims(rng, depth, input, output, 4);
    random_network(rng, &dims, 1.0)
}

fn net_in<R: Rng>(
    rng: &mut R,
    depths: std::ops::RangeInclusive<usize>,
    input: usize,
    output: usize,
) -> Network {
    let depth = rng.random_range(depths);
    net(rng, depth, input, output)
}

fn random_square<R: Rng>(rng: &mut R, d: usize) -> Network {
    let depth = rng.random_range(1..=3);
    net(rng, depth, d, d)
}

fn calculus<R: Rng>(rng: &mut R, count: usize) -> Result<BoundReport> {
    let mut r = BoundReport::new(format!("{count} random instances per law, 4 points each"), None);

    let mut law = Law::default();
    for _ in 0..count {
        let (i, m, o) = (rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3));
        let (l1, l2) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let f1 = net(rng, l1, m, o);
        let f2 = net(rng, l2, i, m);
        let c = compose(&f1, &f2)?;
        let mut expect = f2.dims().0[..l2].to_vec();
        expect.extend_from_slice(&f1.dims().0[1..]);
        law.mismatches += i64::from(c.dims().0 != expect || c.hidden() != f1.hidden() + f2.hidden());
        law.ratio = law.ratio.max(c.params() as f64 / bounds::compose_params(&f1.dims(), &f2.dims()));
        let pts = points(rng, i);
        law.rel_err = law.rel_err.max(max_rel_diff(&c, &pts, |x| f1.relu(&f2.relu(x)?))?);
    }
    law.record(&mut r, "compose");

    let mut assoc_failures = 0;
    for _ in 0..count {
        let d: Vec<usize> = (0..4).map(|_| rng.random_range(1..=3)).collect();
        let a = net_in(rng, 1..=3, d[2], d[3]);
        let b = net_in(rng, 2..=3, d[1], d[2]);
        let c = net_in(rng, 1..=3, d[0], d[1]);
        let left = compose(&compose(&a, &b)?, &c)?;
        let right = compose(&a, &compose(&b, &c)?)?;
        assoc_failures += i64::from(!left.bit_eq(&right));
    }
    r.check_exact("compose.associativity_failures", assoc_failures, 0);

    let mut law = Law::default();
    for _ in 0..count {
        let d = rng.random_range(1..=3);
        let phi = random_square(rng, d);
        let n = rng.random_range(0..=4);
        let p = power(&phi, n)?;
        let expect_depth = if n == 0 { 1 } else { n * (phi.depth() - 1) + 1 };
        law.mismatches += i64::from(p.depth() != expect_depth || p.input_dim() != d);
        let pts = points(rng, d);
        law.rel_err = law.rel_err.max(max_rel_diff(&p, &pts, |x| {
            let mut v = x.to_vec();
            for _ in 0..n {
                v = phi.relu(&v)?;
            }
            Ok(v)
        })?);
    }
    law.record(&mut r, "power");

    let mut law = Law::default();
    for _ in 0..count {
        let (i, o) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let phi = net_in(rng, 1..=3, i, o);
        let target = phi.depth() + rng.random_range(0..=3);
        let id = IdentityEmulator::relu(o);
        let e = extend(target, &id, &phi)?;
        law.mismatches += i64::from(e.depth() != target);
        let b = bounds::extend_params(target, phi.depth(), phi.params(), id.width(), o);
        law.ratio = law.ratio.max(e.params() as f64 / b);
        let pts = points(rng, i);
        law.rel_err = law.rel_err.max(max_rel_diff(&e, &pts, |x| phi.relu(x))?);
    }
    law.record(&mut r, "extend");

    let mut law = Law::default();
    for _ in 0..count {
        let k = rng.random_range(2..=4);
        let depth = rng.random_range(1..=3);
        let nets: Vec<Network> = (0..k)
            .map(|_| {
                let (i, o) = (rng.random_range(1..=3), rng.random_range(1..=3));
                net(rng, depth, i, o)
            })
            .collect();
        let p = parallel_equal(&nets)?;
        let widths: Vec<usize> = (0..=depth)
            .map(|j| nets.iter().map(|n| n.dims().0[j]).sum())
            .collect();
        law.mismatches += i64::from(p.dims().0 != widths);
        let params: Vec<usize> = nets.iter().map(Network::params).collect();
        law.ratio = law.ratio.max(p.params() as f64 / bounds::parallel_equal_params(&params));
        let pts = points(rng, p.input_dim());
        law.rel_err = law.rel_err.max(max_rel_diff(&p, &pts, |x| split_apply(&nets, x))?);
    }
    law.record(&mut r, "parallel_equal");

    let mut law = Law::default();
    for _ in 0..count {
        let k = rng.random_range(2..=4);
        let nets: Vec<Network> = (0..k)
            .map(|_| {
                let (i, o) = (rng.random_range(1..=3), rng.random_range(1..=3));
                net_in(rng, 1..=4, i, o)
            })
            .collect();
        let ids: Vec<IdentityEmulator> =
            nets.iter().map(|n| IdentityEmulator::relu(n.output_dim())).collect();
        let p = parallel_general(&nets, &ids)?;
        let depth = nets.iter().map(Network::depth).max().unwrap_or(1);
        law.mismatches += i64::from(p.depth() != depth);
        let shape: Vec<_> = nets
            .iter()
            .map(|n| (n.depth(), n.output_dim(), n.params(), 2 * n.output_dim()))
            .collect();
        law.ratio = law.ratio.max(p.params() as f64 / bounds::parallel_general_params(&shape));
        let pts = points(rng, p.input_dim());
        law.rel_err = law.rel_err.max(max_rel_diff(&p, &pts, |x| split_apply(&nets, x))?);
    }
    law.record(&mut r, "parallel_general");

    let mut law = Law::default();
    for _ in 0..count {
        let (i, o) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let k = rng.random_range(1..=4);
        let nets: Vec<Network> = (0..k)
            .map(|_| net_in(rng, 1..=4, i, o))
            .collect();
        let h: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let s = sum_general(&nets, &IdentityEmulator::relu(o), &h)?;
        let depth = nets.iter().map(Network::depth).max().unwrap_or(1);
        law.mismatches += i64::from(s.depth() != depth || s.input_dim() != i || s.output_dim() != o);
        let shape: Vec<_> = nets.iter().map(|n| (n.depth(), n.params())).collect();
        law.ratio = law.ratio.max(s.params() as f64 / bounds::sum_general_params(&shape, o, 2 * o));
        let pts = points(rng, i);
        law.rel_err = law.rel_err.max(max_rel_diff(&s, &pts, |x| {
            let mut acc = vec![0.0; o];
            for (n, w) in nets.iter().zip(&h) {
                for (a, v) in acc.iter_mut().zip(n.relu(x)?) {
                    *a += w * v;
                }
            }
            Ok(acc)
        })?);
    }
    law.record(&mut r, "sum_general");

    let mut law = Law::default();
    for _ in 0..count {
        let (i, m, o) = (rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3));
        let f1 = net_in(rng, 1..=3, m, o);
        let f2 = net_in(rng, 1..=3, i, m);
        let c = concat_identity(&f1, &IdentityEmulator::relu(m), &f2)?;
        law.mismatches += i64::from(c.hidden() != f1.hidden() + f2.hidden() + 1);
        let b = bounds::concat_params(f1.params(), f2.params(), 2 * m, m);
        law.ratio = law.ratio.max(c.params() as f64 / b);
        let pts = points(rng, i);
        law.rel_err = law.rel_err.max(max_rel_diff(&c, &pts, |x| f1.relu(&f2.relu(x)?))?);
    }
    law.record(&mut r, "concat_identity");
    Ok(r)
}

/// Applies `nets[k]` to the `k`-th block of `x` and concatenates the outputs.
fn split_apply(nets: &[Network], x: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut at = 0;
    for n in nets {
        out.extend(n.relu(&x[at..at + n.input_dim()])?);
        at += n.input_dim();
    }
    Ok(out)
}

fn scalar_points(xs: Vec<f64>) -> Vec<Vec<f64>> {
    xs.into_iter().map(|v| vec![v]).collect()
}

fn square() -> Result<BoundReport> {
    let mut r = BoundReport::new(
        "1e5 uniform points on [0,1]; 1e4 on [-5,5]; 1e4 tent points",
        None,
    );
    let unit = scalar_points(uniform_grid(0.0, 1.0, 100_000));
    let outside: Vec<Vec<f64>> = scalar_points(uniform_grid(-3.0, 3.0, 6_001))
        .into_iter()
        .filter(|p| p[0] < 0.0 || p[0] > 1.0)
        .collect();
    for (label, eps) in [("1", 1.0), ("2^-4", 2f64.powi(-4)), ("2^-10", 2f64.powi(-10)), ("2^-20", 2f64.powi(-20))] {
        let net = square_unit(eps)?;
        let m = square_unit_order(eps)?;
        let name = format!("square_unit[eps={label}]");
        let err = sup_error_on_grid(|x| Ok(vec![x[0] * x[0]]), |x| net.relu(x), &unit, |_| 1.0)?;
        r.check_le(format!("{name}.sup_error"), err, eps);
        r.check_le(format!("{name}.sup_error<=2^-2M"), err, 2f64.powi(-2 * m as i32));
        r.check_exact(format!("{name}.P=20M-27"), net.params() as i64, 20 * m as i64 - 27);
        r.check_le(format!("{name}.P"), net.params() as f64, bounds::square_unit_params(eps));
        r.check_exact(format!("{name}.L=M"), net.depth() as i64, m as i64);
        r.check_le(format!("{name}.L"), net.depth() as f64, bounds::square_unit_depth(eps));
        let off = sup_error_on_grid(|x| Ok(vec![x[0].max(0.0)]), |x| net.relu(x), &outside, |_| 1.0)?;
        r.check_le(format!("{name}.relu_outside_unit_interval"), off, 1e-12);
    }

    let (eps, q) = (1e-2, 3.0);
    let net = square_real(eps, q)?;
    let line = scalar_points(uniform_grid(-5.0, 5.0, 10_000));
    let err = sup_error_on_grid(
        |x| Ok(vec![x[0] * x[0]]),
        |x| net.relu(x),
        &line,
        |x| x[0].abs().powf(q).max(1.0),
    )?;
    r.check_le("square_real[eps=1e-2 q=3].weighted_error", err, eps);
    r.check_exact("square_real[eps=1e-2 q=3].zero_at_zero", i64::from(net.relu(&[0.0])?[0] != 0.0), 0);
    let mut sandwich = Vec::new();
    for p in &line {
        let v = net.relu(p)?[0];
        sandwich.push((-v, 0.0));
        sandwich.push((v, eps + p[0] * p[0]));
    }
    let (m, b) = tightest(sandwich);
    r.check_le("square_real[eps=1e-2 q=3].0<=R<=eps+x^2", m, b);
    r.check_le("square_real[eps=1e-2 q=3].P", net.params() as f64, bounds::square_real_params(eps, q));
    r.check_le("square_real[eps=1e-2 q=3].L", net.depth() as f64, bounds::square_real_depth(eps, q));

    let tent_grid = uniform_grid(0.0, 1.0, 10_000);
    for n in 1..=10u32 {
        let mut worst: f64 = 0.0;
        for &x in &tent_grid {
            let series: f64 = (1..=n).map(|m| 2f64.powi(-2 * m as i32) * tent_g(m, x)).sum();
            worst = worst.max((tent_f(n, x)? - (x - series)).abs());
        }
        r.check_le(format!("tent[n={n}].f_n=x-sum"), worst, 1e-12);
        let cells = 1u64 << n;
        let mut gap: f64 = 0.0;
        for k in 0..cells {
            let x = (2 * k + 1) as f64 / (2 * cells) as f64;
            gap = gap.max((tent_f(n, x)? - x * x - 2f64.powi(-2 * n as i32 - 2)).abs());
        }
        r.check_le(format!("tent[n={n}].midpoint_gap"), gap, 1e-14);
    }
    Ok(r)
}

fn product<R: Rng>(rng: &mut R) -> Result<BoundReport> {
    let (eps, q) = (1e-2, 3.0);
    let net = product_net(eps, q)?;
    let axis = uniform_grid(-3.0, 3.0, 201);
    let mut grid = tensor_grid(&[axis.clone(), axis.clone()]);
    grid.extend(random_points(rng, 1000, &[-3.0, -3.0], &[3.0, 3.0]));
    let mut r = BoundReport::new("201x201 grid on [-3,3]^2 plus 1e3 random points", None);
    let err = sup_error_on_grid(
        |p| Ok(vec![p[0] * p[1]]),
        |p| net.relu(p),
        &grid,
        |p| p[0].abs().powf(q).max(p[1].abs().powf(q)).max(1.0),
    )?;
    r.check_le("product.weighted_error", err, eps);
    let mut zero: f64 = 0.0;
    for &a in &axis {
        zero = zero.max(net.relu(&[a, 0.0])?[0].abs()).max(net.relu(&[0.0, a])?[0].abs());
    }
    r.check_le("product.annihilation", zero, 1e-12);
    let outs: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|p| Ok((net.relu(p)?[0].abs(), p[0], p[1])))
        .collect::<Result<_>>()?;
    let (m, b) = tightest(outs.iter().map(|&(v, x, y)| (v, 1.5 * (eps / 3.0 + x * x + y * y))));
    r.check_le("product.growth<=1.5(eps/3+x^2+y^2)", m, b);
    let (m, b) = tightest(outs.iter().map(|&(v, x, y)| (v, 1.0 + 2.0 * x * x + 2.0 * y * y)));
    r.check_le("product.growth<=1+2x^2+2y^2", m, b);
    let first_form = 360.0 * q / (q - 2.0) * ((1.0 / eps).log2() + (2f64.powf(q - 1.0) + 1.0).log2())
        + 1.0 / (q - 2.0)
        - 252.0;
    r.check_le("product.P<=first_form", net.params() as f64, first_form);
    r.check_le("product.P", net.params() as f64, bounds::product_params(eps, q));
    r.check_le("product.L", net.depth() as f64, bounds::product_depth(eps, q));
    Ok(r)
}

fn scalvec() -> Result<BoundReport> {
    let (eps, q) = (1e-2, 3.0);
    let mut r = BoundReport::new("1e4 Halton points on [-3,3]^(d+1)", None);
    for d in [1usize, 2, 4] {
        let net = scalar_vector_product(eps, q, d)?;
        let name = format!("scalvec[d={d}]");
        let pts = halton(10_000, &vec![-3.0; d + 1], &vec![3.0; d + 1]);
        let sqrt_d = (d as f64).sqrt();
        let err = sup_error_on_grid(
            |p| Ok(p[1..].iter().map(|x| p[0] * x).collect()),
            |p| net.relu(p),
            &pts,
            |p| sqrt_d * p[0].abs().powf(q).max(1.0) + euclidean_norm(&p[1..]).powf(q),
        )?;
        r.check_le(format!("{name}.weighted_error"), err, eps);
        let mut zero: f64 = 0.0;
        for p in &pts {
            let mut tx = vec![0.0; d + 1];
            tx[0] = p[0];
            let mut zx = p.clone();
            zx[0] = 0.0;
            zero = zero
                .max(euclidean_norm(&net.relu(&tx)?))
                .max(euclidean_norm(&net.relu(&zx)?));
        }
        r.check_le(format!("{name}.annihilation"), zero, 1e-12);
        let growth = pts
            .iter()
            .map(|p| {
                let x2 = euclidean_norm(&p[1..]).powi(2);
                Ok((euclidean_norm(&net.relu(p)?), sqrt_d * (1.0 + 2.0 * p[0] * p[0]) + 2.0 * x2))
            })
            .collect::<Result<Vec<_>>>()?;
        let (m, b) = tightest(growth);
        r.check_le(format!("{name}.growth"), m, b);
        r.check_le(format!("{name}.P"), net.params() as f64, bounds::scalar_vector_params(eps, q, d));
        r.check_le(format!("{name}.L"), net.depth() as f64, bounds::scalar_vector_depth(eps, q));
    }
    Ok(r)
}

/// Random Euler data: drift of depth `1..=3` on `R^d`, `n` random step
/// matrices of Frobenius norm at most one over `n`, and perturbations.
fn random_euler_data<R: Rng>(rng: &mut R, d: usize, n: usize) -> (Network, Vec<Matrix>, Vec<Vec<f64>>) {
    let depth = rng.random_range(1..=3);
    let dims = random_dims(rng, depth, d, d, 5);
    let drift = random_network(rng, &dims, 0.8);
    let steps = (0..n)
        .map(|_| {
            let data: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let a = Matrix::from_row_major(d, d, data);
            let norm = a.frobenius_norm().max(1e-300);
            a.scaled(1.0 / (norm * n as f64))
        })
        .collect();
    let y = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-0.5..=0.5)).collect())
        .collect();
    (drift, steps, y)
}

fn euler<R: Rng>(rng: &mut R) -> Result<BoundReport> {
    let mut r = BoundReport::new("100 random specs with 3 points each; 100 linear drifts", None);
    let (mut worst, mut h_mismatch, mut p_ratio, mut adapted_failures): (f64, i64, f64, i64) =
        (0.0, 0, 0.0, 0);
    for _ in 0..100 {
        let d = rng.random_range(1..=5);
        let n = rng.random_range(1..=16);
        let (drift, steps, y) = random_euler_data(rng, d, n);
        let nets = euler_space_nets(&drift, &steps, &y)?;
        let p_id = identity_net(d).params();
        for (k, net) in nets.iter().enumerate() {
            h_mismatch += i64::from(net.hidden() != 1 + k * drift.hidden());
            p_ratio = p_ratio.max(net.params() as f64 / bounds::euler_space_params(k, p_id, drift.params()));
        }
        for x in points(rng, d) {
            let truth = euler_iterates(&drift, &steps, &y, &x)?;
            for (net, yk) in nets.iter().zip(&truth) {
                worst = worst.max(rel_diff(&net.relu(&x)?, yk));
            }
        }
        let m = rng.random_range(0..=n);
        let mut z = y.clone();
        for v in z.iter_mut().skip(m) {
            for c in v.iter_mut() {
                *c += 1.0;
            }
        }
        let other = euler_space_nets(&drift, &steps, &z)?;
        adapted_failures += i64::from(!other[m].bit_eq(&nets[m]));
    }
    r.check_le("euler_space.rel_err", worst, 1e-11);
    r.check_exact("euler_space.H_mismatches", h_mismatch, 0);
    r.check_le("euler_space.params/bound", p_ratio, 1.0);
    r.check_exact("euler_space.adaptedness_failures", adapted_failures, 0);

    let (drift, steps, y) = random_euler_data(rng, 3, 6);
    let x = vec![0.3, -0.7, 1.1];
    let direction: Vec<Vec<f64>> = y.iter().map(|v| v.iter().map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
    let base = euler_space_nets(&drift, &steps, &y)?.pop().expect("non-empty").relu(&x)?;
    let mut deltas = Vec::new();
    for scale in [1e-1, 1e-3, 1e-5] {
        let z: Vec<Vec<f64>> = y
            .iter()
            .zip(&direction)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + scale * v).collect())
            .collect();
        let out = euler_space_nets(&drift, &steps, &z)?.pop().expect("non-empty").relu(&x)?;
        let diff: Vec<f64> = out.iter().zip(&base).map(|(a, b)| a - b).collect();
        deltas.push(euclidean_norm(&diff));
    }
    r.check_true(
        "euler_space.continuity_in_y",
        deltas.windows(2).all(|w| w[1] < w[0]) && deltas[2] < 1e-3,
    );

    let mut slack = f64::INFINITY;
    let mut trivial_failures = 0;
    for _ in 0..100 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=12);
        let m: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mm = Matrix::from_row_major(d, d, m);
        let drift = Network::affine(mm.clone(), b.clone())?;
        let (_, steps, y) = random_euler_data(rng, d, n);
        let norms: Vec<f64> = steps.iter().map(Matrix::frobenius_norm).collect();
        let inputs = GrowthBoundInputs::new(euclidean_norm(&b), mm.frobenius_norm(), norms.clone(), &y);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let it = euler_iterates(&drift, &steps, &y, &x)?;
        for (k, v) in it.iter().enumerate() {
            slack = slack.min(gronwall_bound(&inputs, euclidean_norm(&x), k) - euclidean_norm(v));
        }
        let trivial = GrowthBoundInputs::new(0.0, 0.0, norms, &y);
        let expect = euclidean_norm(&x) + trivial.partial_sum_max[n];
        trivial_failures += i64::from(gronwall_bound(&trivial, euclidean_norm(&x), n) != expect);
    }
    r.check_le("gronwall.norm-bound", -slack, 0.0);
    r.check_exact("gronwall.trivial_constant_mismatches", trivial_failures, 0);
    Ok(r)
}

/// A depth-two drift on `R^d` with hidden width `d + 1` and small weights.
fn random_drift<R: Rng>(rng: &mut R, d: usize) -> Network {
    random_network(rng, &[d, d + 1, d], 0.5)
}

fn random_y<R: Rng>(rng: &mut R, d: usize, n: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-scale..=scale)).collect())
        .collect()
}

fn spacetime<R: Rng>(rng: &mut R) -> Result<BoundReport> {
    let mut r = BoundReport::new("21 times x 21 space points per case; 101-point time grid", None);
    for (d, n, eps) in [(1usize, 2usize, 1e-2), (2, 2, 1e-1)] {
        let name = format!("spacetime[d={d} N={n} eps={eps}]");
        let spec = EulerSpec {
            drift: random_drift(rng, d),
            horizon: 1.0,
            steps: n,
            y: random_y(rng, d, n, 0.3),
            epsilon: eps,
            q: 3.0,
        };
        let parts = spacetime_parts(&spec)?;
        let gamma_depth = parts.product.depth();
        let depth_failures = parts
            .summands
            .iter()
            .enumerate()
            .filter(|(k, s)| s.depth() != gamma_depth + 2 + k * spec.drift.hidden())
            .count();
        r.check_exact(format!("{name}.depth_law_failures"), depth_failures as i64, 0);

        let nodes: Vec<f64> = (-1..=n as i64 + 1).map(|k| spec.time(k)).collect();
        let (mut hat_err, mut unity_err): (f64, f64) = (0.0, 0.0);
        for t in uniform_grid(0.0, spec.horizon, 101) {
            let mut total = 0.0;
            for (k, pi) in parts.time.iter().enumerate() {
                let w = hat_weight(&nodes, k, t);
                hat_err = hat_err.max((pi.relu(&[t])?[0] - w).abs());
                total += w;
            }
            unity_err = unity_err.max((total - 1.0).abs());
        }
        r.check_le(format!("{name}.hat_interpolation"), hat_err, 1e-14);
        r.check_le(format!("{name}.partition_of_unity"), unity_err, 1e-14);

        let xs = default_space_points(d);
        let mut adapted_failures = 0;
        for m in 0..n {
            let mut z = spec.y.clone();
            for v in z.iter_mut().skip(m) {
                for c in v.iter_mut() {
                    *c -= 0.25;
                }
            }
            let other = crate::euler::spacetime_net(&EulerSpec { y: z, ..spec.clone() })?;
            for t in uniform_grid(0.0, spec.time(m as i64), 5) {
                for x in xs.iter().take(5) {
                    let mut p = vec![t];
                    p.extend_from_slice(x);
                    let a = parts.net.realize_exact(&Activation::Relu, &p)?;
                    let b = other.realize_exact(&Activation::Relu, &p)?;
                    adapted_failures += i64::from(a != b);
                }
            }
        }
        r.check_exact(format!("{name}.adaptedness_failures"), adapted_failures, 0);

        let growth = certified_growth(&spec.drift, 1.0);
        let case = SpacetimeCase { spec, growth, size_exponent: 1.0 };
        let checks = spacetime_checks(&case, &parts.net, &default_times(&case.spec), &xs)?;
        r.absorb(&format!("{name}."), checks);
    }
    Ok(r)
}

/// Sweep over dimensions, step counts and accuracies with three
/// perturbation samples each (zero, small, large).
pub(crate) fn thm1<R: Rng>(rng: &mut R, ds: &[usize], ns: &[usize], epss: &[f64]) -> Result<BoundReport> {
    let mut r = BoundReport::new("21 times x 21 space points x 3 perturbations per case", None);
    for &d in ds {
        let drift = random_drift(rng, d);
        let growth = certified_growth(&drift, 1.0);
        for &n in ns {
            let ys = [vec![vec![0.0; d]; n], random_y(rng, d, n, 0.1), random_y(rng, d, n, 1.0)];
            for &eps in epss {
                for (j, y) in ys.iter().enumerate() {
                    let spec = EulerSpec {
                        drift: drift.clone(),
                        horizon: 1.0,
                        steps: n,
                        y: y.clone(),
                        epsilon: eps,
                        q: 3.0,
                    };
                    let case = SpacetimeCase { spec, growth, size_exponent: 1.0 };
                    let rep = super::thm1_bounds(&case)?;
                    r.absorb(&format!("thm1[d={d} N={n} eps={eps} y={j}]."), rep);
                }
            }
        }
    }
    Ok(r)
}
