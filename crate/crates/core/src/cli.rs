//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a secrecy or correctness expectation failed,
//! 2 no crossing or an infeasible query, 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand};

use crate::compare::{curves_csv, Comparison, SchemeId, TimeQuery, TransmissionTime};
use crate::error::Error;
use crate::galois::FieldSpec;
use crate::netmodel::{builtin_schedule, NetworkName};
use crate::protocols::{all_assignments, list_protocols, run_protocol, MessageAssignment, ProtocolId};
use crate::rates::{linear_grid, rates_csv, NoiseConvention, RateKind, Rates};
use crate::secrecy::{verify_claim, verify_claim_with, ClaimId, SecrecyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_NO_CROSSING: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "spnc", version, about = "Secure network coding and secure PLNC toolkit")]
pub struct Cli {
    /// Noise convention for rate numerics: unit-real (variance 1 per real
    /// dimension) or unit-complex (variance 1/2 per real dimension).
    #[arg(long, global = true, default_value = "unit-real")]
    pub noise: NoiseConvention,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify secrecy claims, or run one protocol instance.
    Verify(VerifyArgs),
    /// Tabulate the channel rates over an h grid.
    Rates(RatesArgs),
    /// Transmission-time curves for one network.
    Compare(CompareArgs),
    /// Where two schemes take equally long.
    Crossover(CrossoverArgs),
    /// Transmission time of one scheme at one h.
    Time(TimeArgs),
    /// Print time-slot schedules.
    Schedule(ScheduleArgs),
    /// List protocols, claims and schemes.
    List,
    /// Compare a quadrature rate with its Monte-Carlo estimate.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with = "all")]
    pub claim: Option<ClaimId>,
    /// Every claim against every compatible protocol, plus decoding correctness.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 5)]
    pub q: u64,
    #[arg(long)]
    pub protocol: Option<ProtocolId>,
    /// Comma-separated messages for a single run, e.g. 1,4 or e,1+e.
    #[arg(long, value_delimiter = ',', requires = "protocol")]
    pub messages: Vec<String>,
    #[arg(long, value_delimiter = ',', requires = "messages")]
    pub randomness: Vec<String>,
    /// Print reports as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[arg(long, default_value_t = 0.2)]
    pub h_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub h_max: f64,
    #[arg(long, default_value_t = 57)]
    pub steps: usize,
    /// Output file, `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub network: NetworkName,
    #[arg(long, default_value_t = 0.2)]
    pub h_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub h_max: f64,
    #[arg(long, default_value_t = 57)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rt: f64,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    #[arg(long)]
    pub a: SchemeId,
    #[arg(long)]
    pub b: SchemeId,
    #[arg(long, default_value_t = 1.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 2.5)]
    pub hi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rt: f64,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long)]
    pub scheme: SchemeId,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rt: f64,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Scheme name; all eight when omitted.
    #[arg(long)]
    pub scheme: Option<SchemeId>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub kind: RateKind,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Parses `args` (program name first) and runs the command on the process's
/// standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                EXIT_OK
            } else {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_EXPECTATION
        }
    }
}

/// Exit code for a library error surfacing at the top level.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoSignChange { .. } | Error::InfeasibleRegion(_) | Error::BracketFailure(_) => EXIT_NO_CROSSING,
        Error::DivisionByZero | Error::FieldMismatch | Error::SingularMatrix | Error::NoSuchElement(_) => {
            EXIT_EXPECTATION
        }
        _ => EXIT_USAGE,
    }
}

enum Failure {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn execute(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Verify(a) => verify(a, out),
        Command::Rates(a) => rates(a, cli.noise, out),
        Command::Compare(a) => compare(a, cli.noise, out),
        Command::Crossover(a) => crossover(a, cli.noise, out),
        Command::Time(a) => time(a, cli.noise, out),
        Command::Schedule(a) => schedule(a, out),
        Command::List => list(out),
        Command::Oracle(a) => oracle(a, cli.noise, out),
    }
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let field = FieldSpec::new(a.q)?;
    if let (Some(protocol), false) = (a.protocol, a.messages.is_empty()) {
        return run_once(protocol, field, a, out);
    }
    let reports: Vec<SecrecyReport> = match (a.claim, a.all, a.protocol) {
        (Some(claim), _, Some(protocol)) => vec![verify_claim_with(claim, protocol, field)?],
        (Some(claim), _, None) => vec![verify_claim(claim, field)?],
        (None, true, _) => return verify_all(field, a.json, out),
        (None, false, _) => {
            return Err(
                Error::ScenarioMismatch("verify needs --claim, --all or --protocol with --messages".into()).into(),
            )
        }
    };
    print_reports(&reports, a.json, out)?;
    Ok(if reports.iter().all(|r| r.holds) {
        EXIT_OK
    } else {
        EXIT_EXPECTATION
    })
}

fn run_once(protocol: ProtocolId, field: FieldSpec, a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let parse = |xs: &[String]| {
        xs.iter()
            .map(|s| field.parse_element(s))
            .collect::<crate::error::Result<Vec<_>>>()
    };
    let assign = MessageAssignment::new(parse(&a.messages)?, parse(&a.randomness)?);
    let transcript = run_protocol(protocol, field, &assign)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&transcript)?)?;
    Ok(if transcript.decodes_correctly(&assign) {
        EXIT_OK
    } else {
        EXIT_EXPECTATION
    })
}

fn print_reports(reports: &[SecrecyReport], json: bool, out: &mut dyn Write) -> io::Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(reports)?)?;
        return Ok(());
    }
    for r in reports {
        writeln!(out, "{}", r.summary())?;
        for o in &r.outcomes {
            write!(out, "  {}: {}", o.scenario, o.verdict)?;
            if let Some(w) = &o.witness {
                write!(
                    out,
                    " (view {:?} with target {:?}: {}·{} != {}·{}; contrast view {:?})",
                    w.view, w.target, w.joint_count, w.total, w.view_total, w.target_total, w.contrasting_view
                )?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

fn verify_all(field: FieldSpec, json: bool, out: &mut dyn Write) -> Outcome {
    let mut ok = true;
    let mut reports = Vec::new();
    for claim in ClaimId::ALL {
        for protocol in claim.protocols().into_iter().filter(|p| p.supports(field)) {
            reports.push(verify_claim_with(claim, protocol, field)?);
        }
    }
    ok &= reports.iter().all(|r| r.holds);
    print_reports(&reports, json, out)?;
    for protocol in ProtocolId::ALL.into_iter().filter(|p| p.supports(field)) {
        let mut runs = 0u64;
        let mut good = true;
        for assign in all_assignments(protocol, field) {
            runs += 1;
            good &= run_protocol(protocol, field, &assign)?.decodes_correctly(&assign);
        }
        ok &= good;
        if !json {
            let verdict = if good { "decodes correctly" } else { "DECODING FAILURE" };
            writeln!(
                out,
                "correctness {protocol} q={}: {verdict} [{runs} assignments]",
                field.order()
            )?;
        }
    }
    if !json {
        writeln!(
            out,
            "{}",
            if ok {
                "all expectations hold"
            } else {
                "some expectations FAILED"
            }
        )?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_EXPECTATION })
}

fn emit(path: &str, body: &str, rows: usize, out: &mut dyn Write) -> io::Result<()> {
    if path == "-" {
        out.write_all(body.as_bytes())
    } else {
        fs::write(path, body)?;
        writeln!(out, "wrote {rows} rows to {path}")
    }
}

fn rates(a: &RatesArgs, noise: NoiseConvention, out: &mut dyn Write) -> Outcome {
    let grid = linear_grid(a.h_min, a.h_max, a.steps)?;
    let points = Rates::new(noise).rate_points(&grid)?;
    emit(&a.out, &rates_csv(&points), points.len(), out)?;
    Ok(EXIT_OK)
}

fn compare(a: &CompareArgs, noise: NoiseConvention, out: &mut dyn Write) -> Outcome {
    let grid = linear_grid(a.h_min, a.h_max, a.steps)?;
    let curves = Comparison::new(noise).curves(&SchemeId::for_network(a.network), &grid, a.rt)?;
    emit(&a.out, &curves_csv(&curves), grid.len(), out)?;
    Ok(EXIT_OK)
}

fn crossover(a: &CrossoverArgs, noise: NoiseConvention, out: &mut dyn Write) -> Outcome {
    let r = Comparison::new(noise).find_crossover(a.a, a.b, (a.lo, a.hi), a.rt)?;
    writeln!(out, "{} vs {} on [{}, {}]", r.a, r.b, r.bracket.0, r.bracket.1)?;
    writeln!(out, "h* = {:.6}", r.h)?;
    writeln!(out, "residual = {:.3e}", r.residual)?;
    Ok(EXIT_OK)
}

fn time(a: &TimeArgs, noise: NoiseConvention, out: &mut dyn Write) -> Outcome {
    let c = Comparison::new(noise);
    let q = TimeQuery::new(a.scheme, a.h, a.rt);
    let closed = c.transmission_time(&q)?;
    let slots = c.time_from_schedule(&q)?;
    writeln!(
        out,
        "{} h={} RT={}: {} (schedule {})",
        a.scheme, a.h, a.rt, closed, slots
    )?;
    Ok(if closed == TransmissionTime::Infeasible {
        EXIT_NO_CROSSING
    } else {
        EXIT_OK
    })
}

fn schedule(a: &ScheduleArgs, out: &mut dyn Write) -> Outcome {
    let schemes = match a.scheme {
        Some(s) => vec![s],
        None => SchemeId::ALL.to_vec(),
    };
    for s in schemes {
        writeln!(out, "{} ({})", s, s.description())?;
        write!(out, "{}", builtin_schedule(s).to_table())?;
    }
    Ok(EXIT_OK)
}

fn list(out: &mut dyn Write) -> Outcome {
    writeln!(out, "protocols:")?;
    for p in list_protocols() {
        let claims: Vec<&str> = p.claims.iter().map(|c| c.name()).collect();
        writeln!(
            out,
            "  {:<18} {} [claims: {}]",
            p.id.name(),
            p.description,
            claims.join(", ")
        )?;
    }
    writeln!(out, "claims:")?;
    for c in ClaimId::ALL {
        writeln!(out, "  {:<4} {}", c.name(), c.statement())?;
    }
    writeln!(out, "schemes:")?;
    for s in SchemeId::ALL {
        writeln!(out, "  {:<15} {}", s.name(), s.description())?;
    }
    Ok(EXIT_OK)
}

fn oracle(a: &OracleArgs, noise: NoiseConvention, out: &mut dyn Write) -> Outcome {
    let r = Rates::new(noise);
    let exact = r.mi(a.kind, a.h)?;
    let est = r.mi_oracle(a.kind, a.h, a.mc_samples, a.seed)?;
    writeln!(out, "{} h={} noise={}", a.kind, a.h, noise)?;
    writeln!(out, "quadrature  = {exact:.8}")?;
    writeln!(
        out,
        "monte-carlo = {:.8} ± {:.2e} (n={}, seed={})",
        est.mean, est.std_error, est.samples, est.seed
    )?;
    writeln!(out, "z = {:.3}", est.z_score(exact))?;
    Ok(EXIT_OK)
}
