//! `modunits`: divisors, criteria, Psi operators and class groups of modular
//! units on X_0(N).
//!
//! Exit codes: 0 success or true verdict, 1 false verdict, 2 usage error,
//! 3 unsupported level.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "modunits", version, about = "Modular units on X_0(N)")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Worker threads for multi-level subcommands (0 = all cores).
    #[arg(long, default_value_t = 1, global = true)]
    pub jobs: usize,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Levels as a comma list of numbers and inclusive ranges, e.g. `9,25,40..50`.
#[derive(Clone, Debug)]
pub struct Levels(pub Vec<u64>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| format!("bad range start in {part:?}"))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| format!("bad range end in {part:?}"))?;
            if a > b {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad level {part:?}"))?);
        }
    }
    if out.is_empty() {
        return Err("no levels given".into());
    }
    if out.contains(&0) {
        return Err("levels must be positive".into());
    }
    Ok(Levels(out))
}

#[derive(Args, Debug)]
pub struct LevelsArg {
    /// One level, a comma list, or ranges `a..b`.
    #[arg(long = "N", value_parser = parse_levels)]
    pub n: Levels,
}

#[derive(Args, Debug)]
pub struct OneLevel {
    #[arg(long = "N")]
    pub n: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the cusps of X_0(N) and their Galois orbits.
    Cusps(LevelsArg),
    /// Divisor of F_{m,h}, or of an exponent vector read from a file.
    Divisor {
        #[command(flatten)]
        level: OneLevel,
        #[arg(long, requires = "h", conflicts_with = "file")]
        m: Option<u64>,
        #[arg(long, requires = "m", allow_hyphen_values = true)]
        h: Option<i64>,
        /// Exponent vector JSON.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Modularity criterion for an exponent vector.
    Criterion {
        #[arg(long = "N")]
        n: Option<u64>,
        #[arg(long, requires = "h", conflicts_with = "file")]
        m: Option<u64>,
        #[arg(long, requires = "m", allow_hyphen_values = true)]
        h: Option<i64>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Compare both sides of the distribution relation at (m, h, p).
    Relation {
        #[command(flatten)]
        level: OneLevel,
        #[arg(long)]
        m: u64,
        #[arg(long, allow_hyphen_values = true)]
        h: i64,
        #[arg(long)]
        p: u64,
    },
    /// Sparse matrix of a Psi, Phi or translation operator.
    PsiMatrix {
        #[command(flatten)]
        level: OneLevel,
        #[arg(long, value_enum, default_value_t = commands::Op::Total)]
        op: commands::Op,
        /// `lex`, `colex`, or a comma list of the divisors of D(d)_0.
        #[arg(long, default_value = "colex")]
        ordering: String,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        i: Option<u8>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        iota: Option<u8>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<i64>,
    },
    /// Vanishing theorems; omitted parameters range over all admissible values.
    Vanishing {
        #[command(flatten)]
        level: OneLevel,
        #[arg(long, value_enum)]
        theorem: Option<commands::Theorem>,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        iota: Option<u8>,
        #[arg(long)]
        a: Option<u32>,
        #[arg(long)]
        b: Option<u32>,
        #[arg(long)]
        x: Option<u32>,
        #[arg(long)]
        y: Option<u32>,
    },
    /// Decide Conjecture A at each level and print the certificate.
    ConjectureA {
        #[command(flatten)]
        levels: LevelsArg,
        /// Also require integral divisors.
        #[arg(long)]
        divisor_integrality: bool,
    },
    /// C_N, C(N) and C_N(Q) with the Yoo verdict.
    Classgroup(LevelsArg),
    /// Decide C_N(Q) = C(N).
    VerifyYoo(LevelsArg),
    /// Run registered invariant checks over a range of levels.
    Selftest {
        #[arg(long = "N", value_parser = parse_levels, conflicts_with = "max")]
        n: Option<Levels>,
        /// Check every level 1..=max.
        #[arg(long)]
        max: Option<u64>,
        /// Restrict to the named checks (repeatable).
        #[arg(long)]
        check: Vec<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print the registered checks and exit.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (body, code) = match commands::run(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("modunits: {e}");
            return ExitCode::from(output::error_code(&e) as u8);
        }
    };
    if let Err(e) = output::emit(&body, cli.output.as_deref()) {
        eprintln!("modunits: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
