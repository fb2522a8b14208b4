//! Command-line front end. `run` is the whole program minus process exit so
//! it can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::distribution::{cost_efficient_candidate, DiscreteDistribution, DistributionSpec, Randomizer};
use crate::efficiency::kkm::kkm_diagnostics;
use crate::efficiency::three_state::{
    attainable_ce_payoffs, is_perfectly_cost_efficient, three_state_closed_form, ThreeStateInput,
};
use crate::efficiency::{generic, KernelSet, PayoffSet, ProblemKind, Scalar, SolutionSet};
use crate::market::{kernel_family, DiscreteMarket, KernelFamily, MarketSpec};
use crate::rational::{parse_q, Q};
use crate::stochvol::cost::{curve_csv, worker_threads};
use crate::stochvol::{figure2_curve, figure2_variance_grid, stochvol_gap, RegimeSwitchModel};
use crate::utility::{optimal_wealth, UtilityKind};
use crate::verify;
use crate::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "effico", version, about = "Cost-efficient payoffs and superhedging costs in incomplete markets")]
pub struct Cli {
    /// Output format (JSON unless the command says otherwise).
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Print rationals as 15-significant-digit decimals.
    #[arg(long, global = true)]
    pub decimal: bool,
    /// Seed for randomized distributional transforms; midpoint levels when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Maximin,
    Minimax,
    ConvexifiedMinimax,
    ConvexifiedMaximin,
}

impl From<Problem> for ProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::Maximin => ProblemKind::MaximinDF,
            Problem::Minimax => ProblemKind::MinimaxDF,
            Problem::ConvexifiedMinimax => ProblemKind::ConvexifiedMinimax,
            Problem::ConvexifiedMaximin => ProblemKind::ConvexifiedMaximin,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Log,
    Exp,
    Power,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form solutions in the canonical three-state market.
    ThreeState {
        /// Smallest atom, as a decimal or `p/q`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Middle atom.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Largest atom.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, value_enum, conflicts_with = "all")]
        problem: Option<Problem>,
        /// Summary of all four problems (the default).
        #[arg(long)]
        all: bool,
    },
    /// Generic solvers on a market and distribution read from JSON files.
    Solve {
        /// `{"n": 3, "s0": [2], "sT": [[4, 2, 1]]}`
        #[arg(long)]
        market: PathBuf,
        /// `{"values": [1, 2, 5]}`
        #[arg(long)]
        dist: PathBuf,
        /// All four problems when absent.
        #[arg(long, value_enum)]
        problem: Option<Problem>,
    },
    /// Optimal expected-utility payoff in the canonical market.
    Utility {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Exponent of power utility `x^alpha / alpha`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Initial wealth.
        #[arg(long)]
        x0: f64,
    },
    /// Superhedging-cost curves of normal and lognormal targets (CSV by default).
    StochvolCurve {
        /// Model JSON; the default regime-switching model when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Comma-separated increasing variances; the standard 20-point grid when absent.
        #[arg(long, value_delimiter = ',')]
        variances: Option<Vec<f64>>,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distributional superhedging cost of the stock itself.
    StochvolGap {
        /// Model JSON; the default regime-switching model when absent.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the built-in oracle suites.
    Verify {
        /// One of market, distribution, lp, efficiency, utility, stochvol; all when absent.
        suite: Option<String>,
    },
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code)
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok(Output { text, ok }) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_NUMERICAL;
            }
            if ok {
                EXIT_OK
            } else {
                let _ = writeln!(err, "error: verification failed");
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

struct Output {
    text: String,
    ok: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, ok: true }
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let format = cli.format;
    let json_out = |v: Value| Output::ok(format!("{}\n", serde_json::to_string_pretty(&v).expect("json")));
    match &cli.command {
        Command::ThreeState { x, y, z, problem, .. } => {
            let input = ThreeStateInput::new(parse_q(x)?, parse_q(y)?, parse_q(z)?)?;
            let kinds: Vec<ProblemKind> = match problem {
                Some(p) => vec![(*p).into()],
                None => ProblemKind::ALL.to_vec(),
            };
            let sets: Vec<SolutionSet<Q>> = kinds.iter().map(|&k| three_state_closed_form(&input, k)).collect();
            if format == Some(Format::Csv) {
                return Ok(Output::ok(solutions_csv(&sets, cli.decimal)));
            }
            Ok(json_out(three_state_json(&input, &sets, problem.is_none(), cli.decimal)))
        }
        Command::Solve { market, dist, problem } => {
            let m = read_json::<MarketSpec>(market)?.build()?;
            let d = read_json::<DistributionSpec>(dist)?.build()?;
            let kinds: Vec<ProblemKind> = match problem {
                Some(p) => vec![(*p).into()],
                None => ProblemKind::ALL.to_vec(),
            };
            let sets = kinds.iter().map(|&k| generic::solve(&m, &d, k)).collect::<Result<Vec<_>>>()?;
            if format == Some(Format::Csv) {
                return Ok(Output::ok(solutions_csv(&sets, cli.decimal)));
            }
            Ok(json_out(solve_json(&m, &d, &sets, cli)?))
        }
        Command::Utility { kind, alpha, x0 } => {
            let k = match (kind, alpha) {
                (Kind::Log, None) => UtilityKind::Log,
                (Kind::Exp, None) => UtilityKind::Exp,
                (Kind::Power, Some(a)) => UtilityKind::power(*a)?,
                (Kind::Power, None) => return Err(Error::InvalidInput("--alpha is required for power utility".into())),
                (_, Some(_)) => return Err(Error::InvalidInput("--alpha only applies to power utility".into())),
            };
            let sol = optimal_wealth(&k, *x0)?;
            if format == Some(Format::Csv) {
                let p = sol.payoff;
                return Ok(Output::ok(format!(
                    "x0,x_star,payoff_1,payoff_2,payoff_3,value\n{},{},{},{},{},{}\n",
                    sol.x0, sol.x_star, p[0], p[1], p[2], sol.value
                )));
            }
            let mut v = sol.to_json();
            v["kind"] = json!(k.name());
            if let UtilityKind::Power { alpha, .. } = k {
                v["alpha"] = json!(alpha);
            }
            Ok(json_out(v))
        }
        Command::StochvolCurve { model, variances, out } => {
            let m = load_model(model.as_deref())?;
            let grid = variances.clone().unwrap_or_else(|| figure2_variance_grid(&m));
            let rows = figure2_curve(&m, &grid, worker_threads())?;
            let text = match format {
                Some(Format::Json) => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|r| json!({ "variance": r.variance, "cost_normal": r.cost_normal, "cost_lognormal": r.cost_lognormal }))
                        .collect();
                    format!("{}\n", serde_json::to_string_pretty(&json!({ "rows": rows })).expect("json"))
                }
                _ => curve_csv(&rows),
            };
            match out {
                Some(path) => {
                    fs::write(path, text)
                        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
                    Ok(Output::ok(String::new()))
                }
                None => Ok(Output::ok(text)),
            }
        }
        Command::StochvolGap { model } => {
            let m = load_model(model.as_deref())?;
            let report = stochvol_gap(&m)?;
            if format == Some(Format::Csv) {
                return Ok(Output::ok(format!(
                    "s0,cost,gap,q_star\n{},{},{},{}\n",
                    report.s0,
                    report.cost.value,
                    report.gap(),
                    report.cost.q_star.q
                )));
            }
            Ok(json_out(report.to_json()))
        }
        Command::Verify { suite } => {
            let checks = match suite {
                Some(name) => verify::run_suite(name)?,
                None => verify::run_all(),
            };
            let ok = checks.iter().all(|c| c.passed);
            let text = if format == Some(Format::Json) {
                format!("{}\n", serde_json::to_string_pretty(&verify::to_json(&checks)).expect("json"))
            } else {
                verify::render(&checks)
            };
            Ok(Output { text, ok })
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn load_model(path: Option<&Path>) -> Result<RegimeSwitchModel> {
    let m = match path {
        Some(p) => read_json::<RegimeSwitchModel>(p)?,
        None => RegimeSwitchModel::default(),
    };
    m.validate()?;
    Ok(m)
}

fn three_state_json(input: &ThreeStateInput, sets: &[SolutionSet<Q>], all: bool, decimal: bool) -> Value {
    let s = |v: &Q| v.to_json(decimal);
    let mut obj = json!({
        "input": { "x": s(&input.x), "y": s(&input.y), "z": s(&input.z) },
        "delta1": s(&input.delta1()),
        "delta2": s(&input.delta2()),
    });
    if all {
        let summary: serde_json::Map<String, Value> =
            sets.iter().map(|set| (set.kind.name().to_string(), s(&set.value))).collect();
        obj["summary"] = Value::Object(summary);
        obj["perfectly_cost_efficient"] = json!(is_perfectly_cost_efficient(input));
        obj["attainable_ce_payoffs"] = attainable_ce_payoffs(input)
            .iter()
            .map(|a| json!({ "Z": a.payoff.iter().map(s).collect::<Vec<_>>(), "u_range": [s(&a.u_range.0), s(&a.u_range.1)] }))
            .collect();
        let (lo, hi) = kkm_diagnostics(*input).intersection();
        obj["kkm_intersection"] = json!([s(&lo), s(&hi)]);
    }
    obj["problems"] = sets.iter().map(|set| set.to_json(decimal)).collect();
    obj
}

fn solve_json(m: &DiscreteMarket, d: &DiscreteDistribution, sets: &[SolutionSet<f64>], cli: &Cli) -> Result<Value> {
    let family = kernel_family(m)?;
    let mut rng = cli.seed.map(ChaCha8Rng::seed_from_u64);
    let mut problems = Vec::with_capacity(sets.len());
    for set in sets {
        let mut v = set.to_json(cli.decimal);
        // candidate payoffs F^{-1}(1 - Û) against each optimal kernel
        let mut candidates = Vec::new();
        for o in &set.optimizers {
            let Some(kernel) = representative_kernel(&family, &o.kernel) else { continue };
            let randomizer = match rng.as_mut() {
                Some(r) => Randomizer::uniform(r, kernel.len()),
                None => Randomizer::Midpoint,
            };
            let z = cost_efficient_candidate(d, &kernel, &randomizer)?;
            candidates.push(Value::Array(z.values().iter().map(|x| x.to_json(cli.decimal)).collect()));
        }
        v["candidates"] = Value::Array(candidates);
        problems.push(v);
    }
    Ok(json!({
        "states": m.states(),
        "distribution": d.values(),
        "perfectly_cost_efficient": generic::is_perfectly_cost_efficient(m, d)?,
        "problems": problems,
    }))
}

/// A single kernel vector for the optimizer's kernel description (the
/// lower end of a parameter range).
fn representative_kernel(family: &KernelFamily, kernel: &KernelSet<f64>) -> Option<Vec<f64>> {
    match kernel {
        KernelSet::Vector(v) => Some(v.clone()),
        KernelSet::Param(u) | KernelSet::ParamRange(u, _) => {
            family.as_segment().map(|seg| seg.kernel_at(*u).weights().to_vec())
        }
    }
}

fn solutions_csv<T: Scalar>(sets: &[SolutionSet<T>], decimal: bool) -> String {
    let cell = |v: &T| match v.to_json(decimal) {
        Value::String(s) => s,
        other => other.to_string(),
    };
    let vec_cell = |v: &[T]| v.iter().map(cell).collect::<Vec<_>>().join(" ");
    let mut out = String::from("problem,value,payoff,kernel,boundary\n");
    for set in sets {
        for o in &set.optimizers {
            let payoff = match &o.payoff {
                PayoffSet::Point(z) => vec_cell(z),
                PayoffSet::Segment { start, direction, t_range } => format!(
                    "{} + t*({}) t in [{} {}]",
                    vec_cell(start),
                    vec_cell(direction),
                    cell(&t_range.0),
                    cell(&t_range.1)
                ),
                PayoffSet::Hull(vs) => {
                    format!("hull({})", vs.iter().map(|v| vec_cell(v)).collect::<Vec<_>>().join("; "))
                }
            };
            let kernel = match &o.kernel {
                KernelSet::Param(u) => format!("u={}", cell(u)),
                KernelSet::ParamRange(a, b) => format!("u in [{} {}]", cell(a), cell(b)),
                KernelSet::Vector(v) => format!("xi=({})", vec_cell(v)),
            };
            out.push_str(&format!(
                "{},{},\"{}\",\"{}\",{}\n",
                set.kind.name(),
                cell(&set.value),
                payoff,
                kernel,
                o.boundary
            ));
        }
    }
    out
}
