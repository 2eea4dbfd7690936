//! The `gumbel` command line.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Rational;

use crate::asymptotics::{asymptotic_report, eta_bracket_check, saddle_point_diagnostics};
use crate::bell::{build_p, gamma_assignment, zeta_consistency, NORMALIZATION_ID};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::jacobian::{
    bell_jacobian_at_kstar, certify_with, lstp_index_check, pascal_submatrix_det, CertStatus, CertifyOptions,
    ColumnConvention, ThetaChoice,
};
use crate::poly::{read_poly_file, write_poly_file, PolyHeader, FORMAT_VERSION};
use crate::precision::PrecisionConfig;
use crate::sequences::{delta_n, delta_n_quadrature, gamma_all, multisection, reflection_residual, Sequence};
use crate::tables::{emit_tables, DigitMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

pub const CACHE_ENV: &str = "GUMBEL_CACHE_DIR";

const GOLDEN_P2: &str = include_str!("../goldens/P_2.poly");
const GOLDEN_P3: &str = include_str!("../goldens/P_3.poly");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Auto,
    Truncate,
    Nearest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Literal,
    Shifted,
}

#[derive(Debug, Parser)]
#[command(
    name = "gumbel",
    version,
    about = "Generalized Euler-Mascheroni / Euler-Gompertz constants: tables, relations, certification"
)]
struct Cli {
    /// Working precision in bits (>= 64).
    #[arg(long, global = true, default_value_t = 128)]
    bits: u32,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, env = CACHE_ENV, default_value = ".gumbel-cache")]
    cache_dir: PathBuf,
    #[arg(long, global = true, value_enum)]
    output: Option<Output>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified decimal table of gamma, delta, eta, delta_tilde, eta_tilde.
    Tables {
        #[arg(long, default_value_t = 15)]
        n_max: u32,
        #[arg(long, default_value_t = 10)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Also write the artifact here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build P_2..P_n into the cache and compare P_2, P_3 with the goldens.
    Polys {
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
    /// Certify every Jacobian minor for context n, resuming from the ledger.
    Certify {
        #[arg(long, default_value_t = 5)]
        n_max: u32,
        #[arg(long, value_enum, default_value_t = ConventionArg::Literal)]
        convention: ConventionArg,
        /// Ledger file; defaults to a file in the cache directory.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Compare computed values with their asymptotic laws.
    Asympt {
        #[arg(long, default_value_t = 20)]
        n_max: u32,
    },
    /// Run the cross-module consistency battery.
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Tables,
    Polys,
    Certify,
    Asympt,
    Check,
}

/// Validated settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n_max: u32,
    pub digits: u32,
    pub bits: u32,
    pub jobs: usize,
    pub cache_dir: PathBuf,
    pub output: Output,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.digits < 1 {
            return Err(Error::InvalidArgument("--digits must be >= 1".into()));
        }
        if self.bits < 64 {
            return Err(Error::InvalidArgument("--bits must be >= 64".into()));
        }
        if self.jobs < 1 {
            return Err(Error::InvalidArgument("--jobs must be >= 1".into()));
        }
        let min_n = match self.command {
            CommandKind::Polys | CommandKind::Certify => 2,
            CommandKind::Asympt => 1,
            _ => 0,
        };
        if self.n_max < min_n {
            return Err(Error::InvalidArgument(format!("--n-max must be >= {min_n}")));
        }
        Ok(())
    }

    pub fn precision(&self) -> PrecisionConfig {
        PrecisionConfig { bits: self.bits, ..Default::default() }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Indeterminate { .. } => EXIT_INDETERMINATE,
        _ => EXIT_INVARIANT,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let (kind, n_max, digits, default_out) = match &cli.command {
        Command::Tables { n_max, digits, .. } => (CommandKind::Tables, *n_max, *digits, Output::Csv),
        Command::Polys { n_max } => (CommandKind::Polys, *n_max, 10, Output::Text),
        Command::Certify { n_max, .. } => (CommandKind::Certify, *n_max, 10, Output::Text),
        Command::Asympt { n_max } => (CommandKind::Asympt, *n_max, 10, Output::Json),
        Command::Check => (CommandKind::Check, 8, 10, Output::Text),
    };
    let cfg = RunConfig {
        command: kind,
        n_max,
        digits,
        bits: cli.bits,
        jobs: cli.jobs,
        cache_dir: cli.cache_dir.clone(),
        output: cli.output.unwrap_or(default_out),
    };
    cfg.validate()?;
    if cfg.jobs > 1 {
        // ignore the error when a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }
    match cli.command {
        Command::Tables { mode, out, .. } => {
            let mode = match mode {
                ModeArg::Auto => DigitMode::Auto,
                ModeArg::Truncate => DigitMode::Truncate,
                ModeArg::Nearest => DigitMode::Nearest,
            };
            cmd_tables(&cfg, mode, out.as_deref())
        }
        Command::Polys { .. } => cmd_polys(&cfg),
        Command::Certify { convention, ledger, .. } => {
            let convention = match convention {
                ConventionArg::Literal => ColumnConvention::Literal,
                ConventionArg::Shifted => ColumnConvention::Shifted,
            };
            cmd_certify(&cfg, convention, ledger)
        }
        Command::Asympt { .. } => cmd_asympt(&cfg),
        Command::Check => cmd_check(&cfg),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    if let Some(p) = out {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(p, text)?;
    }
    let mut so = std::io::stdout().lock();
    so.write_all(text.as_bytes())?;
    so.flush()?;
    Ok(())
}

pub fn cmd_tables(cfg: &RunConfig, mode: DigitMode, out: Option<&Path>) -> Result<i32> {
    let table = emit_tables(cfg.n_max, cfg.digits, &cfg.precision(), mode)?;
    let text = match cfg.output {
        Output::Json => table.to_json()? + "\n",
        Output::Csv => table.to_csv(),
        Output::Text => {
            let mut s = String::new();
            for r in &table.rows {
                s.push_str(&format!("{:>3}", r.n));
                for c in &r.cells {
                    s.push_str(&format!("  {:>28}", c.display()));
                }
                s.push('\n');
            }
            s
        }
    };
    emit(&text, out)?;
    if table.all_certified() {
        Ok(EXIT_OK)
    } else {
        eprintln!("some digit strings could not be certified (INDETERMINATE)");
        Ok(EXIT_INDETERMINATE)
    }
}

fn p_header(n: u32) -> PolyHeader {
    let vars: Vec<String> = (1..=2 * n).map(|k| format!("g{k}")).collect();
    PolyHeader {
        format_version: FORMAT_VERSION,
        name: format!("P_{n}"),
        vars: vars.join(" "),
        normalization: NORMALIZATION_ID.to_string(),
    }
}

/// `P_n` in canonical text, from the cache when its header matches.
pub fn cached_p_text(n: u32, cache_dir: &Path) -> Result<(String, bool)> {
    let path = cache_dir.join(format!("P_{n}.poly"));
    let header = p_header(n);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if matches!(read_poly_file(&text), Ok((h, _)) if h == header) {
            return Ok((text, true));
        }
    }
    let text = write_poly_file(&header, &build_p(n)?);
    std::fs::create_dir_all(cache_dir)?;
    std::fs::write(&path, &text)?;
    Ok((text, false))
}

pub fn cmd_polys(cfg: &RunConfig) -> Result<i32> {
    let mut code = EXIT_OK;
    for n in 2..=cfg.n_max {
        let (text, cached) = cached_p_text(n, &cfg.cache_dir)?;
        let (_, p) = read_poly_file(&text)?;
        let golden = match n {
            2 => Some(GOLDEN_P2),
            3 => Some(GOLDEN_P3),
            _ => None,
        };
        let verdict = match golden {
            Some(g) if g == text => " golden=match",
            Some(_) => {
                code = EXIT_INVARIANT;
                " golden=MISMATCH"
            }
            None => "",
        };
        println!(
            "P_{n} terms={} {}{verdict} file={}",
            p.len(),
            if cached { "cached" } else { "built" },
            cfg.cache_dir.join(format!("P_{n}.poly")).display()
        );
    }
    Ok(code)
}

pub fn cmd_certify(cfg: &RunConfig, convention: ColumnConvention, ledger: Option<PathBuf>) -> Result<i32> {
    let conv = match convention {
        ColumnConvention::Literal => "literal",
        ColumnConvention::Shifted => "shifted",
    };
    let ledger = ledger.unwrap_or_else(|| cfg.cache_dir.join(format!("certify-n{}-{conv}.jsonl", cfg.n_max)));
    let opts = CertifyOptions {
        precision: cfg.precision(),
        convention,
        jobs: cfg.jobs,
        ledger: Some(ledger.clone()),
        ..Default::default()
    };
    let report = certify_with(cfg.n_max, &opts)?;
    let mut so = std::io::stdout().lock();
    for r in &report.records {
        match cfg.output {
            Output::Json => writeln!(so, "{}", serde_json::to_string(r)?)?,
            _ => writeln!(
                so,
                "m={:<3} theta={:<6} {:<17} det in [{}, {}] bits={} path={:?}",
                r.m,
                r.theta.to_string(),
                status_name(r.status),
                r.det_lo,
                r.det_hi,
                r.bits_used,
                r.path
            )?,
        }
    }
    writeln!(
        so,
        "# n={} records={} resumed={} ledger={} elapsed={:.2}s",
        report.n,
        report.records.len(),
        report.resumed,
        ledger.display(),
        report.elapsed_s
    )?;
    let bad = report.indeterminate();
    if bad.is_empty() {
        return Ok(EXIT_OK);
    }
    for r in bad {
        eprintln!("INDETERMINATE: m={} theta={}", r.m, r.theta);
    }
    Ok(EXIT_INDETERMINATE)
}

fn status_name(s: CertStatus) -> &'static str {
    match s {
        CertStatus::CertifiedNonzero => "CERTIFIED_NONZERO",
        CertStatus::Indeterminate => "INDETERMINATE",
    }
}

pub fn cmd_asympt(cfg: &RunConfig) -> Result<i32> {
    let pc = cfg.precision();
    let mut ok = true;
    let mut so = std::io::stdout().lock();
    for n in 1..=cfg.n_max {
        for seq in [Sequence::EtaN, Sequence::EtaTildeN, Sequence::GammaN, Sequence::DeltaN, Sequence::DeltaTildeN] {
            let bracketed = matches!(seq, Sequence::EtaN | Sequence::EtaTildeN | Sequence::GammaN);
            if bracketed && n < 2 {
                continue;
            }
            let r = asymptotic_report(seq, n, &pc)?;
            // the pure (1 + o(1)) laws are only reported, not enforced
            if bracketed && !r.bound_satisfied {
                ok = false;
            }
            match cfg.output {
                Output::Text => writeln!(
                    so,
                    "{:<14} n={:<3} rel_err<={} bound={}",
                    seq.to_string(),
                    n,
                    r.rel_error.hi_decimal(6),
                    r.bound_satisfied
                )?,
                _ => writeln!(so, "{}", r.to_json()?)?,
            }
        }
    }
    if ok {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_INVARIANT)
    }
}

/// One named invariant of the self-check battery.
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: std::result::Result<(), String>,
}

fn check_item(name: &'static str, f: impl FnOnce() -> Result<std::result::Result<(), String>>) -> CheckResult {
    let outcome = match f() {
        Ok(r) => r,
        Err(e) => Err(e.to_string()),
    };
    CheckResult { name, outcome }
}

fn require(cond: bool, msg: impl Display) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

/// Soundness checks only: every verdict is containment or sign, never a
/// width threshold, so it does not depend on the precision.
pub fn check_battery(cfg: &PrecisionConfig) -> Vec<CheckResult> {
    let bits = cfg.bits;
    let mut out = Vec::new();
    out.push(check_item("polys.goldens", || {
        let p2 = write_poly_file(&p_header(2), &build_p(2)?);
        let p3 = write_poly_file(&p_header(3), &build_p(3)?);
        Ok(require(p2 == GOLDEN_P2 && p3 == GOLDEN_P3, "P_2/P_3 differ from the goldens"))
    }));
    out.push(check_item("identity.delta_quadrature", || {
        for n in 1..=8 {
            let q = delta_n_quadrature(n, cfg)?;
            let d = delta_n(n, cfg)?;
            if !q.overlaps(&d) {
                return Ok(Err(format!("n={n}: {q} vs {d}")));
            }
        }
        Ok(Ok(()))
    }));
    out.push(check_item("zeta.consistency", || {
        for l in 2..=5 {
            zeta_consistency(l, cfg)?;
        }
        Ok(Ok(()))
    }));
    out.push(check_item("reflection.residual", || {
        for k in 1..=8 {
            reflection_residual(k, cfg)?;
        }
        Ok(Ok(()))
    }));
    out.push(check_item("multisection.overlap", || {
        for n in 1..=8 {
            multisection(n, cfg)?;
        }
        Ok(Ok(()))
    }));
    out.push(check_item("sign.pattern", || {
        for n in 1..=20 {
            let d = delta_n(n, cfg)?;
            let ok = if n % 2 == 1 { d.is_positive() } else { d.is_negative() };
            if !ok {
                return Ok(Err(format!("delta^({n}) = {d}")));
            }
        }
        Ok(Ok(()))
    }));
    out.push(check_item("pascal.submatrices", || {
        for n in 2..=8 {
            for theta in ThetaChoice::all(n) {
                if pascal_submatrix_det(n, theta)? <= 0 {
                    return Ok(Err(format!("n={n} theta={theta}: det <= 0")));
                }
                if !lstp_index_check(n, theta)?.holds {
                    return Ok(Err(format!("n={n} theta={theta}: index check")));
                }
                if n <= 6 {
                    bell_jacobian_at_kstar(n, theta)?;
                }
            }
        }
        Ok(Ok(()))
    }));
    out.push(check_item("poly.vanishing", || {
        let g = gamma_all(12, cfg)?;
        let assign = gamma_assignment(&g);
        for n in 2..=6 {
            let v = build_p(n)?.eval_interval(&assign, bits)?;
            if !v.contains_zero() {
                return Ok(Err(format!("P_{n}(gamma*) = {v}")));
            }
        }
        Ok(Ok(()))
    }));
    out.push(check_item("eta.brackets", || {
        for n in 2..=40 {
            for tilde in [false, true] {
                if !eta_bracket_check(n, tilde, cfg)?.holds {
                    return Ok(Err(format!("n={n} tilde={tilde}")));
                }
            }
        }
        Ok(Ok(()))
    }));
    out.push(check_item("saddle.diagnostics", || {
        for n in 1..=50 {
            saddle_point_diagnostics(&Interval::from_rational(&Rational::from(n), bits), cfg)?;
        }
        Ok(Ok(()))
    }));
    out
}

pub fn cmd_check(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let results = check_battery(&cfg.precision());
    let mut failed = 0;
    for r in &results {
        match &r.outcome {
            Ok(()) => println!("PASS {}", r.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}: {msg}", r.name);
            }
        }
    }
    println!("# {}/{} passed in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_INVARIANT })
}
