//! Command-line front end: argument parsing and verb execution.
//!
//! [`execute`] writes results to `out`, diagnostics to `err`, and returns
//! the process exit code:
//!
//! | code | meaning                                         |
//! |------|-------------------------------------------------|
//! | 0    | success                                         |
//! | 1    | input failed validation (arbitrage, bad file)   |
//! | 2    | usage error (reported by [`parse_args`])        |
//! | 3    | a solver failed or refused the problem          |

use std::fs::File;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mot_bounds::convergence::{
    run_study, study_constants, verify_wasserstein_rate, AnalyticMarginal, SolverChoice, StudyCase, StudyConfig,
};
use mot_bounds::marginals::{implied_measure, DiscreteMeasure};
use mot_bounds::payoffs::{parse_payoff, Payoff};
use mot_bounds::quotes::{check_calendar, interpolate, parse_quotes, validate_candidate, QuoteFile, QuoteFormat};
use mot_bounds::transport::{comonotone_bound, solve_left_curtain, solve_lp, BoundResult, LpOptions, TransportError};
use mot_bounds::{ValidationReport, Violation};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mot-bounds", version, about = "Model-free price bounds for two-date options")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every maturity of a quote file for static arbitrage.
    Validate(ValidateArgs),
    /// Print the extremal measure implied by one maturity.
    Implied(ImpliedArgs),
    /// Upper price bound for a payoff of the prices at two maturities.
    Bound(BoundArgs),
    /// Distance of a law to its dyadic restrictions.
    Wasserstein(WassersteinArgs),
    /// Bounds on dyadic restrictions against the true bound.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
pub struct CurveOptions {
    /// Spot price, quoted as a virtual strike-0 call.
    #[arg(long)]
    pub spot: Option<f64>,
    /// Strike beyond which the law has no mass (call price 0).
    #[arg(long)]
    pub kmax: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub curve: CurveOptions,
}

#[derive(Debug, Args)]
pub struct ImpliedArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub maturity: String,
    #[command(flatten)]
    pub curve: CurveOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Lp,
    Curtain,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    pub file: PathBuf,
    /// Label of the earlier maturity.
    #[arg(long)]
    pub t1: String,
    /// Label of the later maturity.
    #[arg(long)]
    pub t2: String,
    /// `asian:<strike>`, `xy2`, `expxy2` or `table:<path.json>`.
    #[arg(long, value_parser = payoff_arg)]
    pub payoff: Payoff,
    /// Drop the martingale constraint (comonotone coupling).
    #[arg(long)]
    pub no_martingale: bool,
    /// Defaults to the left curtain when the payoff allows it, else the LP.
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    /// Write the optimal coupling as `x,y,mass` CSV.
    #[arg(long)]
    pub coupling: Option<PathBuf>,
    #[command(flatten)]
    pub curve: CurveOptions,
}

#[derive(Debug, Args)]
pub struct WassersteinArgs {
    /// `uniform:<a>,<b>`, `appendix:mu`, `appendix:nu`, or a JSON file with
    /// `{atoms, weights}` (or several such measures by name, see --select).
    pub source: String,
    /// Measure to read from a JSON file holding named measures.
    #[arg(long)]
    pub select: Option<String>,
    /// Levels `A..B`, inclusive.
    #[arg(long, value_parser = levels_arg)]
    pub n: RangeInclusive<u32>,
    #[arg(long = "K")]
    pub k: f64,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// `uniform:<m>,<h>,<H>` or `appendix`.
    #[arg(long, value_parser = case_arg)]
    pub case: StudyCase,
    #[arg(long, value_parser = payoff_arg)]
    pub payoff: Payoff,
    /// Levels `A..B`, inclusive.
    #[arg(long, value_parser = levels_arg)]
    pub n: RangeInclusive<u32>,
    #[arg(long = "K")]
    pub k: f64,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    /// CSV destination; a JSON sidecar is written next to it. Without it
    /// the CSV goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// True bound to measure against, instead of the closed form.
    #[arg(long)]
    pub p_true: Option<f64>,
}

fn payoff_arg(s: &str) -> Result<Payoff, String> {
    parse_payoff(s).map_err(|e| e.to_string())
}

fn levels_arg(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("bad level `{v}`: {e}"));
    let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
    if a == 0 || a > b {
        return Err(format!("need 1 <= A <= B, got {a}..{b}"));
    }
    Ok(a..=b)
}

fn reals(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number `{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got `{s}`"));
    }
    Ok(v)
}

fn case_arg(s: &str) -> Result<StudyCase, String> {
    match s.split_once(':') {
        None if s == "appendix" => Ok(StudyCase::Appendix),
        Some(("uniform", rest)) => {
            let v = reals(rest, 3)?;
            Ok(StudyCase::Uniform { m: v[0], h: v[1], big_h: v[2] })
        }
        _ => Err(format!("expected uniform:<m>,<h>,<H> or appendix, got `{s}`")),
    }
}

/// Parses `argv` (including the program name). Help and version requests
/// come back as errors too; `clap::Error::exit_code` tells them apart.
pub fn parse_args<I, T>(argv: I) -> Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv).map(|cli| cli.command)
}

/// Rounds to 10 significant digits; printing the result with the shortest
/// round-trip representation gives stable text across platforms.
pub fn sig10(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// Error carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }

    fn solver(e: TransportError) -> Self {
        let code = match e {
            // margins out of convex order: the quotes admit arbitrage
            TransportError::Infeasible { .. } => EXIT_INVALID,
            _ => EXIT_SOLVER,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::invalid(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

pub fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cmd {
        Command::Validate(a) => validate(a, out, err),
        Command::Implied(a) => implied(a, out, err),
        Command::Bound(a) => bound(a, out, err),
        Command::Wasserstein(a) => wasserstein(a, out),
        Command::Convergence(a) => convergence(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_quotes(path: &Path) -> Result<QuoteFile, Failure> {
    let file = File::open(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    parse_quotes(file, QuoteFormat::from_path(path)).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn report_violations(err: &mut dyn Write, maturity: &str, violations: &[Violation]) -> io::Result<()> {
    for v in violations {
        writeln!(
            err,
            "{maturity}: {:?} at {} (measured {})",
            v.condition,
            sig10(v.location),
            sig10(v.measured)
        )?;
    }
    Ok(())
}

/// Report with its numbers rounded for printing.
fn rounded(r: &ValidationReport) -> ValidationReport {
    let mut r = r.clone();
    for v in &mut r.violations {
        v.location = sig10(v.location);
        v.measured = sig10(v.measured);
    }
    for w in &mut r.warnings {
        w.location = sig10(w.location);
        w.measured = sig10(w.measured);
    }
    r
}

#[derive(Serialize)]
struct CurveReport<'a> {
    maturity: &'a str,
    #[serde(flatten)]
    report: ValidationReport,
}

fn validate(a: &ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let quotes = read_quotes(&a.file)?;
    let (spot, kmax) = (a.curve.spot.or(quotes.spot), a.curve.kmax.or(quotes.terminal_strike));
    let mut reports = Vec::new();
    let mut passed = true;
    for c in &quotes.curves {
        let r = validate_candidate(c, spot, kmax);
        report_violations(err, c.maturity(), &r.violations)?;
        passed &= r.passed;
        reports.push(CurveReport { maturity: c.maturity(), report: rounded(&r) });
    }
    write_json(out, &reports)?;
    Ok(if passed { EXIT_OK } else { EXIT_INVALID })
}

/// Extremal measure of one maturity; validation failures are printed and
/// turned into an exit code.
fn measure_of(
    quotes: &QuoteFile,
    maturity: &str,
    opts: &CurveOptions,
    err: &mut dyn Write,
) -> Result<DiscreteMeasure, Failure> {
    let curve = quotes
        .curve(maturity)
        .ok_or_else(|| Failure::invalid(format!("no maturity `{maturity}` in the quote file")))?;
    let (spot, kmax) = (opts.spot.or(quotes.spot), opts.kmax.or(quotes.terminal_strike));
    let report = validate_candidate(curve, spot, kmax);
    if !report.passed {
        report_violations(err, maturity, &report.violations)?;
        return Err(Failure::invalid(format!("maturity `{maturity}` admits static arbitrage")));
    }
    let f = interpolate(curve, spot, kmax).map_err(|e| Failure::invalid(e.to_string()))?;
    implied_measure(&f).map_err(|e| Failure::invalid(e.to_string()))
}

fn rounded_measure(m: &DiscreteMeasure) -> serde_json::Value {
    let atoms: Vec<f64> = m.atoms().iter().map(|&v| sig10(v)).collect();
    let weights: Vec<f64> = m.weights().iter().map(|&v| sig10(v)).collect();
    serde_json::json!({ "atoms": atoms, "weights": weights })
}

fn implied(a: &ImpliedArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let quotes = read_quotes(&a.file)?;
    let m = measure_of(&quotes, &a.maturity, &a.curve, err)?;
    write_json(out, &rounded_measure(&m))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BoundOutput {
    value: f64,
    solver: String,
    residuals: ResidualOutput,
    coupling_ref: Option<String>,
}

#[derive(Serialize)]
struct ResidualOutput {
    first_margin: f64,
    second_margin: f64,
    martingale: f64,
}

fn bound(a: &BoundArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let quotes = read_quotes(&a.file)?;
    let mu = measure_of(&quotes, &a.t1, &a.curve, err)?;
    let nu = measure_of(&quotes, &a.t2, &a.curve, err)?;
    let result = if a.no_martingale {
        comonotone_bound(&mu, &nu, &a.payoff)
    } else {
        let (short, long) = (quotes.curve(&a.t1).unwrap(), quotes.curve(&a.t2).unwrap());
        let calendar = check_calendar(short, long);
        if !calendar.passed {
            report_violations(err, &format!("{}/{}", a.t1, a.t2), &calendar.violations)?;
            return Err(Failure::invalid("quotes admit calendar arbitrage"));
        }
        solve(&mu, &nu, &a.payoff, a.solver)
    }
    .map_err(Failure::solver)?;

    if let Some(path) = &a.coupling {
        let file = File::create(path)?;
        result.coupling.write_csv(file)?;
    }
    let r = result.diagnostics.residuals;
    let output = BoundOutput {
        value: sig10(result.value),
        solver: result.solver.to_string(),
        residuals: ResidualOutput {
            first_margin: sig10(r.first_margin),
            second_margin: sig10(r.second_margin),
            martingale: sig10(r.martingale),
        },
        coupling_ref: a.coupling.as_ref().map(|p| p.display().to_string()),
    };
    write_json(out, &output)?;
    Ok(EXIT_OK)
}

fn solve(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: &Payoff,
    solver: Option<SolverArg>,
) -> Result<BoundResult, TransportError> {
    match solver {
        Some(SolverArg::Lp) => solve_lp(mu, nu, p, &LpOptions::default()),
        Some(SolverArg::Curtain) => solve_left_curtain(mu, nu, p),
        None => match solve_left_curtain(mu, nu, p) {
            Err(TransportError::SolverUnauthorized { .. }) => solve_lp(mu, nu, p, &LpOptions::default()),
            other => other,
        },
    }
}

fn analytic_source(a: &WassersteinArgs) -> Result<AnalyticMarginal, Failure> {
    let s = a.source.as_str();
    if let Some(rest) = s.strip_prefix("uniform:") {
        let v = reals(rest, 2).map_err(Failure::invalid)?;
        return AnalyticMarginal::uniform(v[0], v[1]).map_err(|e| Failure::invalid(e.to_string()));
    }
    match s {
        "appendix:mu" => return Ok(AnalyticMarginal::appendix_mu()),
        "appendix:nu" => return Ok(AnalyticMarginal::appendix_nu()),
        _ => {}
    }
    let text = std::fs::read_to_string(s).map_err(|e| Failure::invalid(format!("{s}: {e}")))?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{s}: {e}")))?;
    let value = match &a.select {
        Some(name) => doc
            .get(name)
            .cloned()
            .ok_or_else(|| Failure::invalid(format!("{s}: no measure named `{name}`")))?,
        None => doc,
    };
    let m: DiscreteMeasure = serde_json::from_value(value).map_err(|e| Failure::invalid(format!("{s}: {e}")))?;
    Ok(AnalyticMarginal::discrete(m))
}

fn wasserstein(a: &WassersteinArgs, out: &mut dyn Write) -> Outcome {
    let marginal = analytic_source(a)?;
    let report = verify_wasserstein_rate(&marginal, a.k, a.n.clone()).map_err(|e| Failure::invalid(e.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "W", "gap_identity", "K_over_2n", "curvature_bound", "within_bounds"])
        .map_err(csv_failure)?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            sig10(r.distance).to_string(),
            sig10(r.gap_identity).to_string(),
            sig10(r.lipschitz_bound).to_string(),
            r.curvature_bound.map(|b| sig10(b).to_string()).unwrap_or_default(),
            r.within_bounds.to_string(),
        ])
        .map_err(csv_failure)?;
    }
    w.flush()?;
    Ok(if report.passed { EXIT_OK } else { EXIT_INVALID })
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::invalid(e.to_string())
}

#[derive(Serialize)]
struct Sidecar {
    config: SidecarConfig,
    p_true: f64,
    constants: SidecarConstants,
    rows: Vec<SidecarRow>,
}

#[derive(Serialize)]
struct SidecarConfig {
    case: String,
    payoff: String,
    levels: Vec<u32>,
    k_max: f64,
    solver: String,
}

#[derive(Serialize)]
struct SidecarConstants {
    m_c: f64,
    m_d: f64,
    lambda: f64,
    lambda_tilde: f64,
    t_mu: f64,
    t_nu: f64,
    note: &'static str,
}

#[derive(Serialize)]
struct SidecarRow {
    n: u32,
    solver: String,
    seconds: f64,
}

fn case_label(case: &StudyCase) -> String {
    match case {
        StudyCase::Uniform { m, h, big_h } => format!("uniform:{m},{h},{big_h}"),
        StudyCase::Appendix => "appendix".into(),
        StudyCase::Marginals { .. } => "marginals".into(),
    }
}

fn convergence(a: &ConvergenceArgs, out: &mut dyn Write) -> Outcome {
    let cfg = StudyConfig {
        case: a.case.clone(),
        payoff: a.payoff.clone(),
        levels: a.n.clone().collect(),
        k_max: a.k,
        solver: match a.solver {
            None => SolverChoice::Auto,
            Some(SolverArg::Lp) => SolverChoice::Lp,
            Some(SolverArg::Curtain) => SolverChoice::LeftCurtain,
        },
        p_true: a.p_true,
        lp: LpOptions::default(),
    };
    let study_failure = |e: mot_bounds::convergence::StudyError| {
        use mot_bounds::convergence::StudyError as E;
        match e {
            E::Transport(t) => Failure::solver(t),
            other => Failure::invalid(other.to_string()),
        }
    };
    let constants = study_constants(&cfg).map_err(study_failure)?;
    let rows = run_study(&cfg).map_err(study_failure)?;

    let mut csv_text = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut csv_text);
        w.write_record(["n", "P_n", "d_n", "solver"]).map_err(csv_failure)?;
        for r in &rows {
            w.write_record([
                r.n.to_string(),
                sig10(r.p_n).to_string(),
                sig10(r.d_n).to_string(),
                r.solver.to_string(),
            ])
            .map_err(csv_failure)?;
        }
        w.flush()?;
    }
    match &a.out {
        None => out.write_all(&csv_text)?,
        Some(path) => {
            std::fs::write(path, &csv_text)?;
            let sidecar = Sidecar {
                config: SidecarConfig {
                    case: case_label(&cfg.case),
                    payoff: cfg.payoff.label(),
                    levels: cfg.levels.clone(),
                    k_max: cfg.k_max,
                    solver: rows.first().map(|r| r.solver.to_string()).unwrap_or_default(),
                },
                p_true: sig10(constants.p_true),
                constants: SidecarConstants {
                    m_c: sig10(constants.rate.m_c),
                    m_d: sig10(constants.rate.m_d),
                    lambda: sig10(constants.rate.lambda),
                    lambda_tilde: sig10(constants.rate.lambda_tilde),
                    t_mu: sig10(constants.t_mu),
                    t_nu: sig10(constants.t_nu),
                    note: "grid estimates on a 65 x 65 grid over [0, K]^2",
                },
                rows: rows
                    .iter()
                    .map(|r| SidecarRow { n: r.n, solver: r.solver.to_string(), seconds: r.seconds })
                    .collect(),
            };
            let mut file = File::create(sidecar_path(path))?;
            write_json(&mut file, &sidecar)?;
            writeln!(out, "{}", path.display())?;
        }
    }
    Ok(EXIT_OK)
}

/// `study.csv` -> `study.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}
