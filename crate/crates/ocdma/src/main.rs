//! Thin command-line front end over the `ocdma` library: code generation and
//! validation, single-run BER evaluation, and full parameter sweeps.
//!
//! Exit codes: 0 success, 1 configuration error (bad arguments, malformed
//! config or code file), 2 runtime failure (I/O trouble, failed validation).

use clap::{Parser, Subcommand};
use ocdma::ooc::{generate_family, max_cardinality, validate_family, CodeFamily};
use ocdma::sweep::{self, parse_config, SweepSpec};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ocdma", version, about = "OOC/DWDM optical-CDMA link analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a unit-constraint code family and write the code file.
    GenCodes {
        /// Code length F in chips.
        #[arg(long)]
        length: u32,
        /// Code weight W (pulses per codeword).
        #[arg(long)]
        weight: u32,
        /// Output path for the code-family text file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustively validate a code-family file.
    Validate {
        /// Path to a code-family text file.
        #[arg(long)]
        codes: PathBuf,
    },
    /// Evaluate a config and print one line per result row (also writes CSV).
    Ber {
        /// Experiment config path.
        #[arg(long)]
        config: PathBuf,
        /// Directory for the CSV and provenance outputs.
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a parameter sweep: CSV, per-curve plot data, and provenance.
    Sweep {
        /// Experiment config path.
        #[arg(long)]
        config: PathBuf,
        /// Directory for all outputs.
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                CONFIG_ERROR
            } else {
                0 // --help / --version
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::GenCodes {
            length,
            weight,
            out,
        } => gen_codes(length, weight, &out),
        Command::Validate { codes } => validate(&codes),
        Command::Ber {
            config,
            out_dir,
            seed,
        } => run(&config, &out_dir, seed, false),
        Command::Sweep {
            config,
            out_dir,
            seed,
        } => run(&config, &out_dir, seed, true),
    };
    ExitCode::from(code)
}

fn gen_codes(length: u32, weight: u32, out: &Path) -> u8 {
    let family = match generate_family(length, weight) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return CONFIG_ERROR;
        }
    };
    if let Err(e) = fs::write(out, family.to_text()) {
        eprintln!("error: could not write {}: {e}", out.display());
        return RUNTIME_ERROR;
    }
    let bound = max_cardinality(length, weight).expect("validated params");
    println!(
        "wrote {} codewords (F={length}, W={weight}, cardinality bound {bound}) to {}",
        family.len(),
        out.display()
    );
    0
}

fn validate(codes: &Path) -> u8 {
    let text = match fs::read_to_string(codes) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: could not read {}: {e}", codes.display());
            return CONFIG_ERROR;
        }
    };
    let family = match CodeFamily::parse_text(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}: {e}", codes.display());
            return CONFIG_ERROR;
        }
    };
    let report = validate_family(&family);
    if report.pass() {
        println!(
            "ok: {} codewords, (F={}, W={}, ha={}, hc={}), all correlation bounds hold",
            family.len(),
            family.length(),
            family.weight(),
            family.ha(),
            family.hc()
        );
        0
    } else {
        for violation in report.violations() {
            println!("violation: {violation}");
        }
        println!("{} violation(s)", report.violations().len());
        RUNTIME_ERROR
    }
}

fn load_spec(config: &Path) -> Result<SweepSpec, u8> {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: could not read {}: {e}", config.display());
            return Err(CONFIG_ERROR);
        }
    };
    match parse_config(&text) {
        Ok(spec) => Ok(spec),
        Err(errors) => {
            for e in &errors {
                eprintln!("{}: {e}", config.display());
            }
            Err(CONFIG_ERROR)
        }
    }
}

fn run(config: &Path, out_dir: &Path, seed: Option<u64>, curves: bool) -> u8 {
    let spec = match load_spec(config) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    let output = match sweep::run_sweep(&spec, seed) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return RUNTIME_ERROR;
        }
    };
    let group_by = curves.then(sweep::default_group_by);
    let written = match sweep::write_outputs(&output, out_dir, group_by.as_deref()) {
        Ok(paths) => paths,
        Err(e) => {
            eprintln!("error: {e}");
            return RUNTIME_ERROR;
        }
    };
    if !curves {
        // Human-readable summary, one line per row.
        println!(
            "{:>4} {:>3} {:>3}  {:<16} {:<8} {:<24} notes",
            "n", "s", "s2", "plan", "method", "pe"
        );
        for row in &output.rows {
            let pe = row
                .pe
                .map(|p| format!("{p:.16e}"))
                .unwrap_or_else(|| "-".to_string());
            let notes = row.error.clone().unwrap_or_else(|| row.flags.clone());
            println!(
                "{:>4} {:>3} {:>3}  {:<16} {:<8} {:<24} {}",
                row.n,
                row.s,
                row.s2.map(|v| v.to_string()).unwrap_or_default(),
                row.plan,
                row.method.as_str(),
                pe,
                notes
            );
        }
    }
    let evaluated = output.rows.iter().filter(|r| r.error.is_none()).count();
    let failed = output.rows.len() - evaluated;
    println!(
        "{} rows ({} evaluated, {} recorded errors), master seed {}, config {}",
        output.rows.len(),
        evaluated,
        failed,
        output.master_seed,
        output.config_hash
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    0
}
