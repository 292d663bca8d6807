//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage (bad flags, unreadable files, bounds out of
//! range), 2 parse error in an input file, 3 algorithm diagnostic (for
//! example a term or degree bound that turned out too small).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use slpinterp_core::oracle::{random_instance, InstanceSpec};
use slpinterp_core::ring::RingVisitor;
use slpinterp_core::{Error as CoreError, ProbeMeter, Ring, RingSpec, SlpProgram};

use crate::bench::{fit_trend, run_sweep, write_csv, Sweep, SweepVar, ADVISORY_R2};
use crate::checks::{prime_table, run_all, Faults, Scale};
use crate::format::{parse_slp, write_poly, write_slp};
use crate::{interpolate, Algo};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ALGORITHM: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "slpinterp", version, about = "Sparse interpolation of straight-line programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover the polynomial computed by a circuit.
    Interp(InterpArgs),
    /// Write a random sparse polynomial and a circuit computing it.
    Gen(GenArgs),
    /// Time an algorithm over a sweep of T, D or n and emit CSV.
    Bench(BenchArgs),
    /// Run the invariant checks at small scale.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct InterpArgs {
    /// Circuit file.
    #[arg(long)]
    circuit: PathBuf,
    /// Number of variables; taken from the circuit header when omitted.
    #[arg(long)]
    nvars: Option<usize>,
    /// D: strict bound on the total degree, at least 2.
    #[arg(long)]
    degree_bound: u64,
    /// T: upper bound on the number of terms.
    #[arg(long)]
    term_bound: usize,
    /// `int` or `zmod:<q>`.
    #[arg(long, default_value = "int")]
    ring: RingSpec,
    /// uipoly, kron or mpolysi.
    #[arg(long, default_value = "mpolysi")]
    algo: Algo,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    nvars: usize,
    /// Total degree of every term is below this.
    #[arg(long)]
    degree_bound: u64,
    /// Number of terms (fewer if not enough monomials exist).
    #[arg(long)]
    term_bound: usize,
    #[arg(long, default_value = "int")]
    ring: RingSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output base name: writes `<out>.poly` and `<out>.slp`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value = "mpolysi")]
    algo: Algo,
    #[arg(long, default_value = "zmod:101")]
    ring: RingSpec,
    /// Variable to sweep: T, D or n.
    #[arg(long)]
    sweep: SweepVar,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    nvars: usize,
    #[arg(long, default_value_t = 4096)]
    degree_bound: u64,
    #[arg(long, default_value_t = 16)]
    term_bound: usize,
    /// Instances per sweep point.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Corrupt an internal table to confirm the checks notice.
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn from_core(e: CoreError) -> Failure {
    let code = match e {
        CoreError::NvarsMismatch { .. }
        | CoreError::DegreeBoundTooSmall(_)
        | CoreError::DegreeBoundTooLarge(_)
        | CoreError::InvalidRingModulus(_)
        | CoreError::InvalidRingSpec(_) => EXIT_USAGE,
        _ => EXIT_ALGORITHM,
    };
    Failure { code, message: e.to_string() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Interp(a) => cmd_interp(a, stdout, stderr),
        Command::Gen(a) => cmd_gen(a, stderr),
        Command::Bench(a) => cmd_bench(a, stdout, stderr),
        Command::Selftest(a) => cmd_selftest(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

struct Interp<'a> {
    prog: &'a SlpProgram,
    algo: Algo,
    degree_bound: u64,
    term_bound: usize,
}

impl RingVisitor for Interp<'_> {
    type Output = Result<(String, slpinterp_core::ProbeStats, usize), CoreError>;

    fn visit<R: Ring>(self, ring: &R) -> Self::Output {
        let meter = ProbeMeter::new();
        let f = interpolate(ring, self.prog, self.algo, self.degree_bound, self.term_bound, &meter)?;
        Ok((write_poly(ring, &f), meter.stats(), f.term_count()))
    }
}

fn cmd_interp(a: InterpArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    if a.degree_bound < 2 {
        return Err(usage("--degree-bound must be at least 2"));
    }
    if a.term_bound < 1 {
        return Err(usage("--term-bound must be at least 1"));
    }
    let text = read(&a.circuit)?;
    let prog = parse_slp(&text, a.nvars).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", a.circuit.display()),
    })?;
    let (poly, stats, terms) = a
        .ring
        .visit(Interp { prog: &prog, algo: a.algo, degree_bound: a.degree_bound, term_bound: a.term_bound })
        .map_err(from_core)?
        .map_err(from_core)?;
    match &a.out {
        Some(path) => write_file(path, &poly)?,
        None => stdout.write_all(poly.as_bytes()).map_err(|e| usage(e.to_string()))?,
    }
    let _ = writeln!(
        stderr,
        "terms={terms} probes={} max_probe_degree={} ring_ops={}",
        stats.probes, stats.max_modulus, stats.ring_ops
    );
    Ok(())
}

struct Gen(InstanceSpec);

impl RingVisitor for Gen {
    type Output = (String, String);

    fn visit<R: Ring>(self, ring: &R) -> Self::Output {
        let (f, prog) = random_instance(ring, &self.0);
        (write_poly(ring, &f), write_slp(&prog))
    }
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_gen(a: GenArgs, stderr: &mut dyn Write) -> Result<(), Failure> {
    if a.nvars == 0 {
        return Err(usage("--nvars must be at least 1"));
    }
    if a.degree_bound < 1 {
        return Err(usage("--degree-bound must be at least 1"));
    }
    let spec = InstanceSpec::new(a.nvars, a.degree_bound, a.term_bound, a.ring, a.seed);
    let (poly, slp) = a.ring.visit(Gen(spec)).map_err(from_core)?;
    let poly_path = with_extension(&a.out, "poly");
    let slp_path = with_extension(&a.out, "slp");
    write_file(&poly_path, &poly)?;
    write_file(&slp_path, &slp)?;
    let _ = writeln!(stderr, "wrote {} and {}", poly_path.display(), slp_path.display());
    Ok(())
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    if a.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let sweep = Sweep {
        algo: a.algo,
        ring: a.ring,
        var: a.sweep,
        values: a.values,
        nvars: a.nvars,
        degree_bound: a.degree_bound,
        term_bound: a.term_bound,
        reps: a.reps,
        seed: a.seed,
    };
    let records = run_sweep(&sweep).map_err(from_core)?;
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).map_err(|e| usage(e.to_string()))?;
    match &a.csv {
        Some(path) => fs::write(path, &buf).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
        None => stdout.write_all(&buf).map_err(|e| usage(e.to_string()))?,
    }
    if let Some(fit) = fit_trend(&records, sweep.var) {
        let _ = writeln!(
            stderr,
            "trend: time vs {}: slope={:.3e} intercept={:.3e} R^2={:.4} ({}; advisory threshold {ADVISORY_R2})",
            sweep.var.feature_name(),
            fit.slope,
            fit.intercept,
            fit.r2,
            if fit.meets_advisory() { "met" } else { "not met" },
        );
    }
    Ok(())
}

fn cmd_selftest(a: SelftestArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let faults = match a.inject_fault.as_deref() {
        None => Faults::default(),
        Some("prime-table") => Faults { corrupt_prime_table: true },
        Some(other) => return Err(usage(format!("unknown fault `{other}`"))),
    };
    let mut outcomes = vec![prime_table(&faults)];
    outcomes.extend(run_all(&Scale::SELFTEST));
    let mut failed = Vec::new();
    for c in &outcomes {
        if c.passed() {
            let _ = writeln!(stdout, "ok    {} ({} cases)", c.name, c.cases);
        } else {
            let _ = writeln!(stdout, "FAIL  {} ({} of {} cases)", c.name, c.failed, c.cases);
            for f in &c.failures {
                let _ = writeln!(stdout, "        {f}");
            }
            failed.push(c.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_ALGORITHM, message: format!("failed invariants: {}", failed.join(", ")) })
    }
}
