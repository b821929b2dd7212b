//! Command-line interface for the pquintic engine.
//!
//! Subcommands: `mu` (minimal faithful permutation degree), `classify`
//! (per-prime classification report), `canon` (canonical parameters and
//! map trail), `iso` (isomorphism test with explicit images), `verify`
//! (self-checks for one prime).
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 search
//! budget exhausted.

use clap::{Parser, Subcommand, ValueEnum};
use pquintic::classify::{classify_with_workers, cross_check, ClassifyError, Mode};
use pquintic::families::canonical_params;
use pquintic::groupspec::GroupSpec;
use pquintic::iso::{are_isomorphic, IsoResult};
use pquintic::mindeg::{minimal_degree_with_lattice, Strategy};
use pquintic::subgroup::{all_subgroups_cached, CACHE_DIR_ENV};
use pquintic::table::GroupTable;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pquintic", version, about = "Exact engine for small p-groups: minimal permutation degrees and the classification of exceptional groups of order p^5")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads for bulk computations (results are identical for any
    /// value).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Node budget for backtracking searches.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    budget: u64,

    /// Directory for cached subgroup lattices (overrides PQUINTIC_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal faithful permutation degree of a group.
    Mu { spec: String },
    /// Classification report for one prime.
    Classify {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value = "invariants")]
        mode: String,
    },
    /// Canonical label, canonical parameters, and generator-map trail.
    Canon { spec: String },
    /// Isomorphism test between two groups.
    Iso { a: String, b: String },
    /// Self-checks for one prime.
    Verify {
        #[arg(long)]
        p: u32,
    },
}

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.budget == 0 {
        eprintln!("error: --budget must be positive");
        return ExitCode::from(EXIT_USAGE);
    }
    if let Some(dir) = &cli.cache_dir {
        std::env::set_var(CACHE_DIR_ENV, dir);
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Debug)]
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    fn verify(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: EXIT_VERIFY,
        }
    }

    fn exit_code(&self) -> u8 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        let code = match &e {
            ClassifyError::Unsupported(..) | ClassifyError::Family(_) => EXIT_USAGE,
            _ => EXIT_VERIFY,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)
}

fn parse_spec(s: &str) -> Result<GroupSpec, CliError> {
    s.parse::<GroupSpec>().map_err(|e| CliError::usage(e.to_string()))
}

fn build_table(spec: &GroupSpec) -> Result<GroupTable, CliError> {
    let pres = spec.build().map_err(|e| CliError::usage(e.to_string()))?;
    GroupTable::from_presentation(&pres).map_err(|e| CliError::usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Mu { spec } => cmd_mu(cli, spec),
        Command::Classify { p, mode } => cmd_classify(cli, *p, mode),
        Command::Canon { spec } => cmd_canon(cli, spec),
        Command::Iso { a, b } => cmd_iso(cli, a, b),
        Command::Verify { p } => cmd_verify(cli, *p),
    }
}

fn cmd_mu(cli: &Cli, spec_str: &str) -> Result<ExitCode, CliError> {
    let spec = parse_spec(spec_str)?;
    let table = build_table(&spec)?;
    let dir = cache_dir();
    let lattice = all_subgroups_cached(&table, dir.as_deref());
    let (mu, rep) = minimal_degree_with_lattice(&table, Strategy::Johnson, &lattice);
    let stab_orders: Vec<usize> = rep.stabilizers.iter().map(|s| s.order()).collect();
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "spec": spec.to_string(),
                "mu": mu,
                "degree": rep.degree,
                "stabilizer_orders": stab_orders,
            })
        ),
        Format::Csv => {
            println!("spec,mu");
            println!("\"{spec}\",{mu}");
        }
        Format::Text => {
            println!("mu({spec}) = {mu}");
            println!(
                "witness: {} orbit(s), point stabilizers of orders {:?}",
                stab_orders.len(),
                stab_orders
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(cli: &Cli, p: u32, mode_str: &str) -> Result<ExitCode, CliError> {
    let mode: Mode = mode_str.parse().map_err(CliError::usage)?;
    let report = classify_with_workers(p, mode, cli.workers.max(1))?;
    match cli.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Csv => print!("{}", report.to_csv()),
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_canon(cli: &Cli, spec_str: &str) -> Result<ExitCode, CliError> {
    let spec = parse_spec(spec_str)?;
    let GroupSpec::Params(fp) = &spec else {
        return Err(CliError::usage(
            "canon expects family parameters, e.g. params:Q@5:(2,3,1,4)",
        ));
    };
    let (label, canonical, trail) =
        canonical_params(fp).map_err(|e| CliError::usage(e.to_string()))?;
    let label_str = pquintic::families::label_display(fp.family, &label);
    let trail_str: Vec<String> = trail.iter().map(|m| m.to_string()).collect();
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "input": fp.to_string(),
                "label": label_str,
                "canonical": canonical.to_string(),
                "trail": trail_str,
            })
        ),
        Format::Csv => {
            println!("input,label,canonical,trail");
            println!(
                "\"{}\",{},\"{}\",\"{}\"",
                fp,
                label_str,
                canonical,
                trail_str.join(",")
            );
        }
        Format::Text => {
            println!("{label_str}");
            println!("canonical: {canonical}");
            println!("trail: {}", trail_str.join(","));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_iso(cli: &Cli, a_str: &str, b_str: &str) -> Result<ExitCode, CliError> {
    let a_spec = parse_spec(a_str)?;
    let b_spec = parse_spec(b_str)?;
    let a = a_spec.build().map_err(|e| CliError::usage(e.to_string()))?;
    let b = b_spec.build().map_err(|e| CliError::usage(e.to_string()))?;
    let result = if a.order() != b.order() {
        IsoResult::NotIso
    } else {
        are_isomorphic(&a, &b, cli.budget).map_err(|e| CliError::usage(e.to_string()))?
    };
    let (verdict, images): (&str, Vec<String>) = match &result {
        IsoResult::Iso(images) => (
            "isomorphic",
            a.labels()
                .iter()
                .zip(images)
                .map(|(l, img)| format!("{l} -> {:?}", img.exponents))
                .collect(),
        ),
        IsoResult::NotIso => ("not-isomorphic", Vec::new()),
        IsoResult::BudgetExceeded => ("budget-exceeded", Vec::new()),
    };
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "a": a_spec.to_string(),
                "b": b_spec.to_string(),
                "verdict": verdict,
                "images": images,
            })
        ),
        Format::Csv => {
            println!("a,b,verdict");
            println!("\"{a_spec}\",\"{b_spec}\",{verdict}");
        }
        Format::Text => {
            println!("{verdict}");
            for line in &images {
                println!("  {line}");
            }
        }
    }
    if matches!(result, IsoResult::BudgetExceeded) {
        return Ok(ExitCode::from(EXIT_BUDGET));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cli: &Cli, p: u32) -> Result<ExitCode, CliError> {
    let mut failures = 0u32;
    let mut check = |name: &str, ok: bool| {
        println!("{} - {name}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };
    let mode = match p {
        2 => Mode::MuOracle,
        3 | 5 => Mode::Both,
        _ => Mode::Invariants,
    };
    match classify_with_workers(p, mode, cli.workers.max(1)) {
        Ok(report) => {
            check(
                &format!(
                    "classification count at p = {p} ({} classes)",
                    report.totals.overall_count
                ),
                report.totals.overall_count == report.totals.expected.overall,
            );
            check(
                "per-family counts match the closed forms",
                report.totals.q_family_count == report.totals.expected.q_family
                    && report.totals.qzeta_family_count == report.totals.expected.qzeta_family,
            );
        }
        Err(e) => {
            check(&format!("classification at p = {p} ({e})"), false);
        }
    }
    if p > 3 {
        match cross_check(p) {
            Ok(pairings) => check(
                &format!("cross-family pairing ({} pairs)", pairings.len()),
                pairings.len() as u32 == (p + 5) / 2,
            ),
            Err(e) => check(&format!("cross-family pairing ({e})"), false),
        }
    }
    if failures > 0 {
        return Err(CliError::verify(format!("{failures} check(s) failed")));
    }
    Ok(ExitCode::SUCCESS)
}
