//! The `anncalc` command line: build networks, combine them, evaluate them,
//! print their shape, and run verification suites.
//!
//! Exit codes: `0` on success, `1` when an operation's precondition fails or
//! a verification entry fails, `2` on malformed command lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::bounds::{headline_constant, headline_params, spacetime_params};
use crate::calculus::{compose, extend, parallel_general_relu, power, sum_general, IdentityEmulator};
use crate::error::{AnnError, Result};
use crate::euler::{certified_growth, euler_space_net, spacetime_net, EulerSpec};
use crate::network::{Activation, Network};
use crate::relu::{hat_net, identity_net, product_net, scalar_vector_product, square_real, square_unit};
use crate::verify::{random_network, run_suite};

#[derive(Debug, Parser)]
#[command(name = "anncalc", version, about = "Explicit ReLU network calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    SquareUnit,
    Square,
    Product,
    Scalvec,
    Hat,
    Identity,
    EulerSpace,
    Spacetime,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpKind {
    Compose,
    Parallel,
    Sum,
    Power,
    Extend,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Act {
    Relu,
    Identity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sweep {
    Thm1,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Construct a network and write it as JSON.
    Build {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<f64>,
        /// Problem description for `euler-space` and `spacetime`.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Iterate index for `euler-space` (defaults to N).
        #[arg(long)]
        n: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Combine networks read from JSON files.
    Op {
        #[arg(value_enum)]
        op: OpKind,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Exponent for `power`, target depth for `extend`.
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated weights for `sum` (default all ones).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<f64>>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate a network at points given inline or in a CSV file.
    Eval {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "relu")]
        act: Act,
        /// A comma-separated input vector; may be repeated.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
        /// CSV file with one input vector per line.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print dims, depth, hidden layers, parameters, input and output size.
    Info { file: PathBuf },
    /// Run a verification suite and print its report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Sweep the space-time construction and print sizes against bounds.
    Report {
        #[arg(long, value_enum)]
        sweep: Sweep,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        d: Vec<usize>,
        #[arg(long = "N", value_delimiter = ',', default_value = "2")]
        big_n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

/// Failure of a command: usage errors exit with 2, everything else with 1.
enum Failure {
    Usage(String),
    Op(AnnError),
    Checks,
}

impl From<AnnError> for Failure {
    fn from(e: AnnError) -> Self {
        Failure::Op(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            2
        }
        Err(Failure::Op(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
        Err(Failure::Checks) => 1,
    }
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> std::result::Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for {kind}")))
}

fn io_err(path: &Path, e: std::io::Error) -> AnnError {
    AnnError::Parse(format!("{}: {e}", path.display()))
}

fn read_net(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Network::from_json(&text)
}

fn write_net(path: &Path, net: &Network) -> Result<()> {
    fs::write(path, net.to_json()).map_err(|e| io_err(path, e))
}

/// On-disk problem description for the Euler constructions.
#[derive(Debug, Deserialize)]
struct SpecDoc {
    drift: PathBuf,
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(rename = "N")]
    steps: usize,
    eps: f64,
    q: f64,
    y: Vec<Vec<f64>>,
}

/// Loads an [`EulerSpec`] from JSON; the drift path is resolved relative to
/// the directory of the JSON file.
pub fn load_spec(path: &Path) -> Result<EulerSpec> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let doc: SpecDoc = serde_json::from_str(&text)
        .map_err(|e| AnnError::Parse(format!("{}: {e}", path.display())))?;
    let drift_path = match path.parent() {
        Some(dir) if doc.drift.is_relative() => dir.join(&doc.drift),
        _ => doc.drift.clone(),
    };
    let spec = EulerSpec {
        drift: read_net(&drift_path)?,
        horizon: doc.horizon,
        steps: doc.steps,
        y: doc.y,
        epsilon: doc.eps,
        q: doc.q,
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| AnnError::Parse(format!("`{v}` in point `{s}`: {e}")))
        })
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn execute(cmd: Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Build {
            kind,
            eps,
            q,
            d,
            alpha,
            beta,
            gamma,
            h,
            spec,
            n,
            output,
        } => {
            let net = match kind {
                Kind::SquareUnit => square_unit(need(eps, "eps", "square-unit")?)?,
                Kind::Square => square_real(need(eps, "eps", "square")?, need(q, "q", "square")?)?,
                Kind::Product => product_net(need(eps, "eps", "product")?, need(q, "q", "product")?)?,
                Kind::Scalvec => scalar_vector_product(
                    need(eps, "eps", "scalvec")?,
                    need(q, "q", "scalvec")?,
                    need(d, "d", "scalvec")?,
                )?,
                Kind::Hat => hat_net(
                    need(alpha, "alpha", "hat")?,
                    need(beta, "beta", "hat")?,
                    need(gamma, "gamma", "hat")?,
                    need(h, "h", "hat")?,
                )?,
                Kind::Identity => {
                    let d = need(d, "d", "identity")?;
                    if d == 0 {
                        return Err(AnnError::Domain("d must be at least 1".into()).into());
                    }
                    identity_net(d)
                }
                Kind::EulerSpace => {
                    let spec = load_spec(&need(spec, "spec", "euler-space")?)?;
                    let n = n.unwrap_or(spec.steps);
                    euler_space_net(&spec.drift, &spec.step_matrices(), &spec.y, n)?
                }
                Kind::Spacetime => spacetime_net(&load_spec(&need(spec, "spec", "spacetime")?)?)?,
            };
            write_net(&output, &net)?;
            Ok(())
        }
        Command::Op {
            op,
            files,
            n,
            weights,
            output,
        } => {
            let nets = files.iter().map(|f| read_net(f)).collect::<Result<Vec<_>>>()?;
            let single = |name: &str| -> std::result::Result<&Network, Failure> {
                match nets.as_slice() {
                    [one] => Ok(one),
                    _ => Err(Failure::Usage(format!("{name} takes exactly one network file"))),
                }
            };
            let net = match op {
                OpKind::Compose => {
                    let mut it = nets.iter().rev();
                    let mut acc = it.next().expect("clap requires a file").clone();
                    for outer in it {
                        acc = compose(outer, &acc)?;
                    }
                    acc
                }
                OpKind::Parallel => parallel_general_relu(&nets)?,
                OpKind::Sum => {
                    let w = weights.unwrap_or_else(|| vec![1.0; nets.len()]);
                    let id = IdentityEmulator::relu(nets[0].output_dim());
                    sum_general(&nets, &id, &w)?
                }
                OpKind::Power => power(single("power")?, need(n, "n", "power")?)?,
                OpKind::Extend => {
                    let phi = single("extend")?;
                    let id = IdentityEmulator::relu(phi.output_dim());
                    extend(need(n, "n", "extend")?, &id, phi)?
                }
            };
            write_net(&output, &net)?;
            Ok(())
        }
        Command::Eval {
            file,
            act,
            points,
            csv,
        } => {
            let net = read_net(&file)?;
            let act = match act {
                Act::Relu => Activation::Relu,
                Act::Identity => Activation::Identity,
            };
            let mut pts = points.iter().map(|p| parse_point(p)).collect::<Result<Vec<_>>>()?;
            if let Some(path) = csv {
                let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    pts.push(parse_point(line)?);
                }
            }
            if pts.is_empty() {
                return Err(Failure::Usage("give at least one --point or a --csv file".into()));
            }
            for p in pts {
                let v = net.realize(&act, &p)?;
                let _ = writeln!(out, "{}", join(&v));
            }
            Ok(())
        }
        Command::Info { file } => {
            let net = read_net(&file)?;
            let _ = writeln!(
                out,
                "dims={} L={} H={} P={} I={} O={}",
                net.dims(),
                net.depth(),
                net.hidden(),
                net.params(),
                net.input_dim(),
                net.output_dim()
            );
            Ok(())
        }
        Command::Verify { suite, seed, format } => {
            let report = run_suite(&suite, seed).map_err(|e| match e {
                AnnError::UnknownSuite(_) => Failure::Usage(e.to_string()),
                other => Failure::Op(other),
            })?;
            let text = match format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json() + "\n",
            };
            let _ = write!(out, "{text}");
            if report.all_pass() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Report {
            sweep: Sweep::Thm1,
            d,
            big_n,
            eps,
            seed,
        } => {
            let _ = writeln!(out, "d,N,eps,P,a_posteriori_bound,polynomial_bound");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for &dim in &d {
                if dim == 0 {
                    return Err(AnnError::Domain("d must be at least 1".into()).into());
                }
                let drift = random_network(&mut rng, &[dim, dim + 1, dim], 0.5);
                let growth = certified_growth(&drift, 1.0);
                let c = headline_constant(growth, 1.0);
                for &n in &big_n {
                    let y: Vec<Vec<f64>> = (0..n)
                        .map(|_| (0..dim).map(|_| rng.random_range(-0.5..=0.5)).collect())
                        .collect();
                    for &e in &eps {
                        let spec = EulerSpec {
                            drift: drift.clone(),
                            horizon: 1.0,
                            steps: n,
                            y: y.clone(),
                            epsilon: e,
                            q: 3.0,
                        };
                        let p = spacetime_net(&spec)?.params();
                        let b1 = spacetime_params(dim, n, e, 3.0, drift.hidden(), drift.params());
                        let b2 = headline_params(c, n, dim, 1.0, e);
                        let _ = writeln!(out, "{dim},{n},{e},{p},{b1:e},{b2:e}");
                    }
                }
            }
            Ok(())
        }
    }
}
