//! Checks of the space-time network against the Euler oracle: the a
//! posteriori bounds in terms of the iterate norms, the a priori bounds in
//! terms of the Gronwall quantities `g_n`, and the polynomial size, error
//! and growth bounds with explicit constants.

use rayon::prelude::*;

use super::{halton, tightest, uniform_grid, BoundReport};
use crate::bounds::{headline_constant, headline_error, headline_growth, headline_params, spacetime_params};
use crate::error::Result;
use crate::euler::{eval_spacetime, gronwall_bound, interpolate_iterates, spacetime_net, EulerSpec, GrowthBoundInputs};
use crate::network::{euclidean_norm, Network};

/// A space-time problem together with the caller-certified drift constants:
/// `|R(drift)(x)| ≤ growth (1 + |x|)` and `P(drift) ≤ growth d^size_exponent`.
#[derive(Debug, Clone)]
pub struct SpacetimeCase {
    pub spec: EulerSpec,
    pub growth: f64,
    pub size_exponent: f64,
}

struct PointCheck {
    err: f64,
    err_iterates: f64,
    err_gronwall: f64,
    err_headline: f64,
    out: f64,
    growth_iterates: f64,
    growth_gronwall: f64,
    growth_headline: f64,
}

/// Index `n` with `t ∈ [t_n, t_{n+1}]`, using the last interval for `t = T`.
fn interval(spec: &EulerSpec, t: f64) -> usize {
    let n = (t * spec.steps as f64 / spec.horizon).floor();
    (n.max(0.0) as usize).min(spec.steps - 1)
}

/// Compares `net` with the Euler oracle on all pairs `(t, x)` from `ts` and
/// `xs` and appends the bound entries to a new report.
pub fn spacetime_checks(
    case: &SpacetimeCase,
    net: &Network,
    ts: &[f64],
    xs: &[Vec<f64>],
) -> Result<BoundReport> {
    let spec = &case.spec;
    let d = spec.dim();
    let sqrt_d = (d as f64).sqrt();
    let (eps, q, big_n) = (spec.epsilon, spec.q, spec.steps);
    let drift = &spec.drift;
    let mut r = BoundReport::new(
        format!("{} times x {} space points", ts.len(), xs.len()),
        None,
    );

    let p_bound = spacetime_params(d, big_n, eps, q, drift.hidden(), drift.params());
    r.check_le("P<=a_posteriori_bound", net.params() as f64, p_bound);

    let c = headline_constant(case.growth, spec.horizon);
    r.check_le(
        "drift_P<=growth*d^exponent",
        drift.params() as f64,
        case.growth * (d as f64).powf(case.size_exponent),
    );
    r.check_le(
        "P<=54c^4N^6d^(16+8e)(1+ln^2eps)",
        net.params() as f64,
        headline_params(c, big_n, d, case.size_exponent, eps),
    );

    let gron = GrowthBoundInputs::uniform(case.growth, spec.horizon, big_n, &spec.y);
    let y_norm = euclidean_norm(&spec.y.concat());
    let times: Vec<f64> = (0..=big_n as i64).map(|n| spec.time(n)).collect();

    let per_x = xs
        .par_iter()
        .map(|x| -> Result<(Vec<PointCheck>, f64, (f64, f64))> {
            let iterates = spec.iterates(x)?;
            let norms: Vec<f64> = iterates.iter().map(|v| euclidean_norm(v)).collect();
            let x_norm = euclidean_norm(x);
            let g: Vec<f64> = (0..=big_n).map(|n| gronwall_bound(&gron, x_norm, n)).collect();
            let iterate_slack = norms
                .iter()
                .zip(&g)
                .map(|(a, b)| b - a)
                .fold(f64::INFINITY, f64::min);
            let mu = euclidean_norm(&drift.relu(x)?);
            let drift_check = (mu, case.growth * (1.0 + x_norm));
            let mut checks = Vec::with_capacity(ts.len());
            for &t in ts {
                let truth = interpolate_iterates(&times, &iterates, t)?;
                let approx = eval_spacetime(net, t, x)?;
                let diff: Vec<f64> = truth.iter().zip(&approx).map(|(a, b)| a - b).collect();
                let n = interval(spec, t);
                let (a, b) = (norms[n], norms[n + 1]);
                let (ga, gb) = (g[n], g[n + 1]);
                checks.push(PointCheck {
                    err: euclidean_norm(&diff),
                    err_iterates: eps * (2.0 * sqrt_d + a.powf(q) + b.powf(q)),
                    err_gronwall: eps * (2.0 * sqrt_d + ga.powf(q) + gb.powf(q)),
                    err_headline: headline_error(c, big_n, d, eps, x_norm, y_norm),
                    out: euclidean_norm(&approx),
                    growth_iterates: 6.0 * sqrt_d + 2.0 * (a * a + b * b),
                    growth_gronwall: 6.0 * sqrt_d + 2.0 * (ga * ga + gb * gb),
                    growth_headline: headline_growth(c, big_n, d, x_norm, y_norm),
                });
            }
            Ok((checks, iterate_slack, drift_check))
        })
        .collect::<Result<Vec<_>>>()?;

    let slack = per_x.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    r.check_le("max_n(|Y_n|-g_n)", -slack, 0.0);
    let (m, b) = tightest(per_x.iter().map(|p| p.2));
    r.check_le("drift_norm<=growth(1+|x|)", m, b);

    let all: Vec<&PointCheck> = per_x.iter().flat_map(|p| &p.0).collect();
    let pick = |f: &dyn Fn(&PointCheck) -> (f64, f64)| tightest(all.iter().map(|p| f(p)));
    let rows: [(&str, &dyn Fn(&PointCheck) -> (f64, f64)); 6] = [
        ("error<=a_posteriori_bound", &|p| (p.err, p.err_iterates)),
        ("growth<=a_posteriori_bound", &|p| (p.out, p.growth_iterates)),
        ("error<=gronwall_bound", &|p| (p.err, p.err_gronwall)),
        ("growth<=gronwall_bound", &|p| (p.out, p.growth_gronwall)),
        ("error<=20c^6sqrt(d)N^1.5eps(1+|x|^3+|y|^3)", &|p| (p.err, p.err_headline)),
        ("growth<=18c^4sqrt(d)N(1+|x|^2+|y|^2)", &|p| (p.out, p.growth_headline)),
    ];
    for (name, f) in rows {
        let (m, b) = pick(f);
        r.check_le(name, m, b);
    }
    Ok(r)
}

/// Sample times: 21 uniform points in `[0, T]`.
pub fn default_times(spec: &EulerSpec) -> Vec<f64> {
    uniform_grid(0.0, spec.horizon, 21)
}

/// Sample space points in `[-2, 2]^d`: 21 uniform points for `d = 1`,
/// otherwise the first 21 Halton points.
pub fn default_space_points(d: usize) -> Vec<Vec<f64>> {
    if d == 1 {
        uniform_grid(-2.0, 2.0, 21).into_iter().map(|v| vec![v]).collect()
    } else {
        halton(21, &vec![-2.0; d], &vec![2.0; d])
    }
}

/// Builds the space-time network for `case` and checks every bound on the
/// default sample set.
pub fn thm1_bounds(case: &SpacetimeCase) -> Result<BoundReport> {
    let net = spacetime_net(&case.spec)?;
    let ts = default_times(&case.spec);
    let xs = default_space_points(case.spec.dim());
    spacetime_checks(case, &net, &ts, &xs)
}
