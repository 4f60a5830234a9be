// SPDX-License-Identifier: Apache-2.0

//! `hcutoff`: TV profiles, bound verification and simulation for the
//! simple random walk on the Hamming scheme H(n, q).
//!
//! Exit codes: 0 ok, 1 a verified inequality failed, 2 usage, 3 resource cap.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hamming_cutoff::bounds::auto_backend;
use hamming_cutoff::bounds::suites::{
    minorant_sweep, verify_lemmas, verify_majorant, verify_upper, LemmaGrid, MajorantGrid,
    MinorantSweepConfig, SuiteOutcome, UpperGrid,
};
use hamming_cutoff::bounds::Rounding;
use hamming_cutoff::format::g17;
use hamming_cutoff::krawtchouk::{build_table, DEFAULT_TABLE_BUDGET};
use hamming_cutoff::montecarlo::{self, SimConfig, DEFAULT_STEP_CAP};
use hamming_cutoff::oracle::{Trajectory, DEFAULT_BIT_CAP};
use hamming_cutoff::profile::{self, ProfileSpec};
use hamming_cutoff::{make_scheme, par, Backend, BigRational, Error, Exec, SchemeParams};

#[derive(Parser)]
#[command(
    name = "hcutoff",
    version,
    about = "Cutoff profiles and bound checks for random walks on Hamming schemes"
)]
struct Cli {
    /// Worker threads for grid jobs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run grid jobs on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// TV distance to uniform along a k-grid, with every bound alongside.
    Profile(ProfileArgs),
    /// Run a verification suite; exits 1 on any violation.
    #[command(subcommand)]
    Verify(Suite),
    /// Sample walks on the radial chain.
    Simulate(SimulateArgs),
    /// Dump the Krawtchouk table as `j,l,value`.
    Table(TableArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    /// Exact for n <= 30, float above.
    Auto,
    Exact,
    Float,
}

impl BackendArg {
    fn resolve(self, params: &SchemeParams) -> Backend {
        match self {
            BackendArg::Auto => auto_backend(params),
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        }
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 0)]
    k_min: u64,
    #[arg(long)]
    k_max: u64,
    #[arg(long, default_value_t = 1)]
    k_step: u64,
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendArg,
    /// `b` in the minorant column.
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    #[arg(long, default_value_t = DEFAULT_BIT_CAP)]
    bit_cap: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum Suite {
    /// Upper bound lemma, exactly.
    Upper(UpperArgs),
    /// Theorem majorants at k = ceil(schedule).
    Majorant(MajorantArgs),
    /// Empirical threshold sweep for the minorant.
    Minorant(MinorantArgs),
    /// Elementary inequalities, ratio chains and moment identities.
    Lemmas(LemmaArgs),
}

#[derive(Args)]
struct UpperArgs {
    #[arg(long, default_value_t = 1)]
    n_min: u32,
    #[arg(long, default_value_t = 30)]
    n_max: u32,
    /// Alphabet sizes (repeat or comma-separate); default 2..=6.
    #[arg(long, value_delimiter = ',')]
    q: Vec<u32>,
    #[arg(long, default_value_t = 300)]
    k_max: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    Ceil,
    Exact,
}

#[derive(Args)]
struct MajorantArgs {
    #[arg(long, default_value_t = 1)]
    n_min: u32,
    #[arg(long, default_value_t = 40)]
    n_max: u32,
    /// Alphabet sizes; default 3..=8.
    #[arg(long, value_delimiter = ',')]
    q: Vec<u32>,
    /// Offsets c; default 0.25, 0.5, ..., 6.
    #[arg(long, value_delimiter = ',')]
    c: Vec<f64>,
    #[arg(long, value_enum, default_value = "ceil")]
    rounding: RoundingArg,
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MinorantArgs {
    #[arg(long, default_value_t = 3)]
    q: u32,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 3.0)]
    c0: f64,
    #[arg(long, default_value_t = 3.0)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    n_min: u32,
    #[arg(long, default_value_t = 2000)]
    n_max: u32,
    #[arg(long, default_value_t = 1)]
    n_step: u32,
    #[arg(long, value_enum, default_value = "float")]
    backend: BackendArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, default_value_t = 100_000)]
    exp_points: usize,
    #[arg(long, default_value_t = 200)]
    ratio_m_max: u64,
    #[arg(long, default_value_t = 30)]
    identity_n_max: u32,
    #[arg(long, default_value_t = 10)]
    expectation_n_max: u32,
    #[arg(long, default_value_t = 64)]
    expectation_k_max: u64,
    #[arg(long, default_value_t = 20)]
    variance_n_max: u32,
    #[arg(long, default_value_t = 200)]
    variance_k_max: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 100_000)]
    walks: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sampling; the output does not depend on it.
    #[arg(long, default_value_t = 1)]
    streams: usize,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    step_cap: u128,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: u32,
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Violation,
    Usage(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CmdResult {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run_profile(a: ProfileArgs) -> CmdResult {
    let params = make_scheme(a.n, a.q)?;
    let mut spec = ProfileSpec::new(a.k_min, a.k_max, a.backend.resolve(&params));
    spec.k_step = a.k_step;
    spec.b = a.b;
    spec.bit_cap = a.bit_cap;
    let prof = profile::compute_profile(&params, &spec)?;
    let mut out = open_out(&a.output.out)?;
    match a.output.format {
        Format::Csv => profile::write_csv(&prof, &mut out)?,
        Format::Json => write_json(&mut out, &prof)?,
    }
    out.flush()?;
    Ok(())
}

fn report(out: &mut dyn Write, name: &str, o: &SuiteOutcome) -> io::Result<()> {
    for f in &o.failures {
        writeln!(out, "{f}")?;
    }
    writeln!(
        out,
        "{name}: checks={} failures={} skipped={} vacuous={}",
        o.checks,
        o.failures.len(),
        o.skipped,
        o.vacuous
    )
}

fn verdict(passed: bool) -> CmdResult {
    if passed {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn or_default<T: Clone>(given: Vec<T>, default: Vec<T>) -> Vec<T> {
    if given.is_empty() {
        default
    } else {
        given
    }
}

fn run_verify(suite: Suite, exec: Exec) -> CmdResult {
    match suite {
        Suite::Upper(a) => {
            let d = UpperGrid::default();
            let g = UpperGrid {
                n_min: a.n_min,
                n_max: a.n_max,
                qs: or_default(a.q, d.qs),
                k_max: a.k_max,
            };
            let o = verify_upper(&g, exec)?;
            let mut out = open_out(&a.output.out)?;
            match a.output.format {
                Format::Csv => report(&mut out, "upper", &o)?,
                Format::Json => write_json(&mut out, &o)?,
            }
            out.flush()?;
            verdict(o.passed())
        }
        Suite::Majorant(a) => {
            let d = MajorantGrid::default();
            let qs = or_default(a.q, d.qs);
            let g = MajorantGrid {
                n_min: a.n_min,
                n_max: a.n_max,
                cs: or_default(a.c, d.cs),
                rounding: match a.rounding {
                    RoundingArg::Ceil => Rounding::Ceil,
                    RoundingArg::Exact => Rounding::Exact,
                },
                backend: match a.backend {
                    BackendArg::Auto => None,
                    BackendArg::Exact => Some(Backend::Exact),
                    BackendArg::Float => Some(Backend::Float),
                },
                qs,
            };
            let run = verify_majorant(&g, exec)?;
            let mut out = open_out(&a.output.out)?;
            match a.output.format {
                Format::Csv => {
                    writeln!(out, "n,q,k,c,tv_exact,bound,satisfied,vacuous,which")?;
                    for r in &run.reports {
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{}",
                            r.n,
                            r.q,
                            r.k,
                            g17(r.c),
                            g17(r.tv_exact),
                            g17(r.bound_value),
                            r.satisfied,
                            r.vacuous,
                            r.which.name()
                        )?;
                    }
                    out.flush()?;
                    report(&mut io::stderr(), "majorant", &run.outcome)?;
                }
                Format::Json => write_json(&mut out, &run)?,
            }
            out.flush()?;
            verdict(run.outcome.passed())
        }
        Suite::Minorant(a) => {
            if a.n_step == 0 || a.n_min == 0 || a.n_min > a.n_max {
                return Err(Failure::Usage(
                    "need 1 <= n_min <= n_max and n_step >= 1".into(),
                ));
            }
            let cfg = MinorantSweepConfig {
                q: a.q,
                b: a.b,
                c0: a.c0,
                c: a.c,
                n_values: (a.n_min..=a.n_max).step_by(a.n_step as usize).collect(),
                backend: match a.backend {
                    BackendArg::Exact => Backend::Exact,
                    _ => Backend::Float,
                },
            };
            let sweep = minorant_sweep(&cfg, exec)?;
            let mut out = open_out(&a.output.out)?;
            match a.output.format {
                Format::Csv => {
                    writeln!(
                        out,
                        "n,k,tv_exact,bound,satisfied,beta,pi_b,nu_b,markov_lb,chebyshev_ub"
                    )?;
                    for row in &sweep.rows {
                        let (r, d) = (&row.report, &row.diagnostics);
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{},{}",
                            r.n,
                            r.k,
                            g17(r.tv_exact),
                            g17(r.bound_value),
                            r.satisfied,
                            g17(d.beta),
                            g17(d.pi_b),
                            g17(d.nu_b),
                            g17(d.markov_lb),
                            g17(d.chebyshev_ub)
                        )?;
                    }
                    out.flush()?;
                    let mut err = io::stderr();
                    match sweep.n_star {
                        Some(n) => writeln!(err, "n_star={n}")?,
                        None => writeln!(err, "n_star=none")?,
                    }
                    report(&mut err, "minorant", &sweep.outcome)?;
                }
                Format::Json => write_json(&mut out, &sweep)?,
            }
            out.flush()?;
            verdict(sweep.outcome.passed())
        }
        Suite::Lemmas(a) => {
            let g = LemmaGrid {
                exp_points: a.exp_points,
                ratio_m_max: a.ratio_m_max,
                identity_n_max: a.identity_n_max,
                qs: LemmaGrid::default().qs,
                expectation_n_max: a.expectation_n_max,
                expectation_k_max: a.expectation_k_max,
                variance_n_max: a.variance_n_max,
                variance_k_max: a.variance_k_max,
            };
            let parts = verify_lemmas(&g, exec)?;
            let mut out = open_out(&a.output.out)?;
            match a.output.format {
                Format::Csv => {
                    for (name, o) in &parts {
                        report(&mut out, name, o)?;
                    }
                }
                Format::Json => {
                    let named: Vec<_> = parts
                        .iter()
                        .map(|(name, o)| serde_json::json!({ "suite": name, "outcome": o }))
                        .collect();
                    write_json(&mut out, &named)?;
                }
            }
            out.flush()?;
            verdict(parts.iter().all(|(_, o)| o.passed()))
        }
    }
}

#[derive(Serialize)]
struct SimulateOutput {
    n: u32,
    q: u32,
    k: u64,
    walks: u64,
    seed: u64,
    counts: Vec<u64>,
    point_estimate: Vec<f64>,
    stderr: Vec<f64>,
    /// Exact class masses, when the exact engine is affordable.
    exact: Option<Vec<f64>>,
    tv_estimate: f64,
    tv_note: String,
}

fn run_simulate(a: SimulateArgs) -> CmdResult {
    let params = make_scheme(a.n, a.q)?;
    let mut cfg = SimConfig::new(params, a.k, a.walks, a.seed).with_streams(a.streams);
    cfg.step_cap = a.step_cap;
    let r = montecarlo::simulate(&cfg)?;
    let exact = (auto_backend(&params) == Backend::Exact)
        .then(|| {
            let mut t = Trajectory::new(&params, Backend::Exact);
            t.advance_to(a.k).ok().map(|_| t.masses_f64())
        })
        .flatten();
    let res = SimulateOutput {
        n: a.n,
        q: a.q,
        k: a.k,
        walks: a.walks,
        seed: a.seed,
        tv_estimate: montecarlo::tv_to_uniform(&r),
        tv_note: montecarlo::TV_BIAS_NOTE.to_string(),
        counts: r.counts,
        point_estimate: r.point_estimate,
        stderr: r.stderr,
        exact,
    };
    let mut out = open_out(&a.output.out)?;
    match a.output.format {
        Format::Csv => {
            writeln!(out, "l,count,estimate,stderr,exact")?;
            for l in 0..res.counts.len() {
                let exact = res.exact.as_ref().map(|e| g17(e[l])).unwrap_or_default();
                writeln!(
                    out,
                    "{l},{},{},{},{exact}",
                    res.counts[l],
                    g17(res.point_estimate[l]),
                    g17(res.stderr[l])
                )?;
            }
        }
        Format::Json => write_json(&mut out, &res)?,
    }
    out.flush()?;
    Ok(())
}

fn run_table(a: TableArgs) -> CmdResult {
    let params = make_scheme(a.n, a.q)?;
    let mut out = open_out(&a.out)?;
    match a.backend.resolve(&params) {
        Backend::Exact => {
            build_table::<BigRational>(&params, DEFAULT_TABLE_BUDGET)?.write_csv(&mut out)?
        }
        Backend::Float => build_table::<f64>(&params, DEFAULT_TABLE_BUDGET)?.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        par::init_threads(t);
    }
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let result = match cli.cmd {
        Cmd::Profile(a) => run_profile(a),
        Cmd::Verify(s) => run_verify(s, exec),
        Cmd::Simulate(a) => run_simulate(a),
        Cmd::Table(a) => run_table(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
