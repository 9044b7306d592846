//! `matchstat`: exact tables, determinants, Tracy–Widom values, expansion
//! checks and walk simulations from the command line.

mod commands;
mod params;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::Format;

#[derive(Debug, Parser)]
#[command(name = "matchstat", version, about = "Crossings and nestings of random matchings")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "MATCHSTAT_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Precision controls shared by the determinant-based commands.
#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct Prec {
    /// Bits of agreement required between successive precisions.
    #[arg(long = "tol-bits", default_value_t = 100)]
    pub tol_bits: u32,
    /// Starting working precision in bits.
    #[arg(long = "prec-bits")]
    pub prec_bits: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Goe,
    Gue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteArg {
    Det,
    Prop1,
    Poisson,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Joint histogram of (cro, nes) over all matchings of [2n].
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Cumulative counts g[k][j] for n.
    Table {
        #[arg(long)]
        n: usize,
    },
    /// Exact covariance and correlation of (cro, nes).
    Cov {
        #[arg(long)]
        n: usize,
    },
    /// Scaled covariance over uniformly sampled matchings.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Trigonometric moments h_0 … h_L of a weight.
    Moments {
        #[arg(long, value_enum, default_value = "continuous")]
        weight: Weight,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10)]
        lmax: usize,
        #[arg(long = "prec-bits", default_value_t = 256)]
        prec_bits: u32,
    },
    /// Toeplitz or Toeplitz-minus-Hankel determinants.
    Det {
        #[command(subcommand)]
        which: DetCmd,
    },
    /// Distribution functions of the Poissonized statistics.
    Cdf {
        #[command(subcommand)]
        which: CdfCmd,
    },
    /// Tracy–Widom distribution function and derivatives at x.
    Tw {
        #[arg(long, value_enum, default_value = "goe")]
        kind: Kind,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Tabulated Tracy–Widom values on a grid, with mean and variance.
    TwTable {
        #[arg(long, value_enum, default_value = "goe")]
        kind: Kind,
        #[arg(long, allow_hyphen_values = true, default_value_t = -6.0)]
        from: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 6.0)]
        to: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
    /// Numerical checks of the asymptotic statements and identities.
    Verify {
        #[command(subcommand)]
        which: VerifyCmd,
    },
    /// Non-intersecting walks: Monte Carlo against the exact law.
    Walks {
        #[arg(long)]
        t: f64,
        #[arg(long = "N")]
        walkers: usize,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "det", rename_all = "kebab-case")]
pub enum DetCmd {
    /// T_n of the chosen weight.
    Toeplitz {
        #[arg(long, value_enum, default_value = "continuous")]
        weight: Weight,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        prec: Prec,
    },
    /// H_j = det(h_{a−b} − h_{a+b+2}) of the chosen weight.
    Th {
        #[arg(long, value_enum, default_value = "continuous")]
        weight: Weight,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        j: usize,
        #[command(flatten)]
        prec: Prec,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "cdf", rename_all = "kebab-case")]
pub enum CdfCmd {
    /// P{Cro_t ≤ k, Nes_t ≤ j}.
    Joint {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, value_enum, default_value = "det")]
        route: RouteArg,
        /// Largest n in the truncated Poisson sum.
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[command(flatten)]
        prec: Prec,
    },
    /// P{Nes_t ≤ j}.
    Nes {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        j: usize,
        #[arg(long, value_enum, default_value = "det")]
        route: RouteArg,
        #[command(flatten)]
        prec: Prec,
    },
    /// P{L_t ≤ l} for the Poissonized longest increasing subsequence.
    Lt {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        l: usize,
        #[arg(long, value_enum, default_value = "det")]
        route: RouteArg,
        #[command(flatten)]
        prec: Prec,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum VerifyCmd {
    /// Marginal of Nes_t against the GOE expansion, with a decay fit.
    Thm13 {
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160")]
        tgrid: Vec<f64>,
        #[command(flatten)]
        prec: Prec,
    },
    /// L_t against the GUE expansion, with a decay fit.
    Thm15 {
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160")]
        tgrid: Vec<f64>,
        #[command(flatten)]
        prec: Prec,
    },
    /// Joint law against the product of marginals plus F′F′ correction.
    Thm11 {
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long = "xp", allow_hyphen_values = true, default_value_t = 0.0)]
        x_prime: f64,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        tgrid: Vec<f64>,
        #[command(flatten)]
        prec: Prec,
    },
    /// Verblunsky data of the discrete weight at n = 2t, m = n + 1.
    Prop62 {
        #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
        tgrid: Vec<f64>,
        #[command(flatten)]
        prec: Prec,
    },
    /// Verblunsky data of the continuous weight at n = 2t.
    Prop63 {
        #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
        tgrid: Vec<f64>,
        #[command(flatten)]
        prec: Prec,
    },
    /// |π_n(0)| well outside the Painlevé window.
    Exponential {
        #[arg(long, default_value_t = 20.0)]
        t: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[command(flatten)]
        prec: Prec,
    },
    /// Poissonized covariance of (Cro_t, Nes_t) against ¼.
    Cov {
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        tgrid: Vec<f64>,
        #[command(flatten)]
        prec: Prec,
    },
    /// Orthogonal-polynomial identities with step halving.
    Identities {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "continuous")]
        weight: Weight,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[command(flatten)]
        prec: Prec,
    },
    /// Hastings–McLeod solution diagnostics and Tracy–Widom moments.
    Hm,
    /// Derivative identities of the g-functions at (η, x).
    Perfect {
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
    },
}

impl Command {
    fn name(&self) -> String {
        let sub = match self {
            Command::Det { which } => Some(match which {
                DetCmd::Toeplitz { .. } => "toeplitz",
                DetCmd::Th { .. } => "th",
            }),
            Command::Cdf { which } => Some(match which {
                CdfCmd::Joint { .. } => "joint",
                CdfCmd::Nes { .. } => "nes",
                CdfCmd::Lt { .. } => "lt",
            }),
            Command::Verify { which } => Some(match which {
                VerifyCmd::Thm13 { .. } => "thm13",
                VerifyCmd::Thm15 { .. } => "thm15",
                VerifyCmd::Thm11 { .. } => "thm11",
                VerifyCmd::Prop62 { .. } => "prop62",
                VerifyCmd::Prop63 { .. } => "prop63",
                VerifyCmd::Exponential { .. } => "exponential",
                VerifyCmd::Cov { .. } => "cov",
                VerifyCmd::Identities { .. } => "identities",
                VerifyCmd::Hm => "hm",
                VerifyCmd::Perfect { .. } => "perfect",
            }),
            _ => None,
        };
        let v = serde_json::to_value(self).expect("commands serialize");
        let head = v["command"].as_str().unwrap_or_default().to_string();
        match sub {
            Some(s) => format!("{head} {s}"),
            None => head,
        }
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), String> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err("--threads must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    Ok(())
}

fn fail(e: &matchstat::Error) -> ExitCode {
    eprintln!("{}", serde_json::to_string(&report::error_json(e)).expect("error json"));
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let argv = match params::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => return fail(&matchstat::Error::Validation(msg)),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            return fail(&matchstat::Error::Validation(msg.trim().to_string()));
        }
    };
    if let Err(msg) = init_threads(cli.threads) {
        return fail(&matchstat::Error::Validation(msg));
    }
    let name = cli.command.name();
    let params = report::to_value(&cli.command);
    let out = match commands::run(&cli.command) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if let Err(e) = report::write(&name, &params, out, cli.format, cli.output.as_deref()) {
        eprintln!("{}", serde_json::json!({"schema": report::SCHEMA, "error_kind": "io", "message": e.to_string()}));
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
