//! The `hb` command line: argument parsing, dispatch and exit codes.
//!
//! Every command prints one JSON document on stdout and one summary line on stderr.
//! Arrays go to CSV files under the output directory. Exit codes: 0 success, 1 input
//! error, 2 certificate failure.

mod commands;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "hb", version, about = "Convex billiard tables, Hofer lengths, smoothing, orbits and barcodes")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Table spec: a JSON file, or inline JSON starting with `{`.
    #[arg(long, global = true)]
    pub table: Option<String>,
    /// Second table spec for two-table commands.
    #[arg(long, global = true)]
    pub other: Option<String>,
    /// Path spec: a JSON file, or inline JSON.
    #[arg(long, global = true)]
    pub path: Option<String>,
    /// Output directory for CSV, JSON and grid artifacts.
    #[arg(long, global = true, env = "HB_OUT", default_value = "hb-out")]
    pub out: PathBuf,
    #[arg(long = "grid-q", global = true)]
    pub grid_q: Option<usize>,
    #[arg(long = "grid-p", global = true)]
    pub grid_p: Option<usize>,
    #[arg(long = "grid-s", global = true)]
    pub grid_s: Option<usize>,
    /// Tolerance of the command's pass test.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect or sample a table.
    #[command(subcommand)]
    Table(TableCmd),
    /// Evaluate the billiard ball map.
    #[command(subcommand)]
    Map(MapCmd),
    /// Geometric and Hofer lengths of a path of tables.
    #[command(subcommand)]
    Hofer(HoferCmd),
    /// Polygon smoothing families.
    #[command(subcommand)]
    Polygon(PolygonCmd),
    /// Periodic orbits and the orbit functional.
    #[command(subcommand)]
    Orbits(OrbitsCmd),
    /// Sublevel barcodes of the orbit functional.
    #[command(subcommand)]
    Barcode(BarcodeCmd),
    /// Rebuild a table from its chord lengths.
    Reconstruct {
        /// Chord data JSON (as written by this command) instead of a table.
        #[arg(long)]
        chords: Option<String>,
    },
    /// Run every check at desk scale.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
pub enum TableCmd {
    Inspect,
    Sample,
}

#[derive(Debug, Subcommand)]
pub enum MapCmd {
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        /// Apply the inverse map.
        #[arg(long)]
        inverse: bool,
    },
    Iterate {
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        /// Number of iterates; negative values iterate the inverse.
        #[arg(long, default_value_t = 100, allow_hyphen_values = true)]
        steps: i64,
    },
    Portrait {
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Largest seed momentum.
        #[arg(long, default_value_t = 0.95)]
        p_max: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum HoferCmd {
    Length,
    Compare,
    Hjresidual {
        #[arg(long, default_value_t = 0.5)]
        s: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum PolygonCmd {
    Family,
    Cauchy {
        #[arg(long, default_value_t = 12)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        s0: f64,
    },
    Independence {
        /// Profile width of the second family (default: half the first).
        #[arg(long)]
        width_b: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum OrbitsCmd {
    Find {
        #[arg(short, long = "n", default_value_t = 2)]
        n: usize,
        /// Random seeds in addition to the rotational ones.
        #[arg(long, default_value_t = 32)]
        seeds: usize,
    },
    Experiment {
        #[arg(short, long = "n", default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        radius: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    Gap {
        #[arg(short, long = "n", default_value_t = 2)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum BarcodeCmd {
    Compute {
        #[arg(short, long = "n", default_value_t = 2)]
        n: usize,
    },
    Bottleneck {
        /// Barcode JSON files.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    Stability {
        #[arg(short, long = "n", default_value_t = 2)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    All,
}

/// Result of one command.
pub struct Outcome {
    pub json: Value,
    pub summary: String,
    pub pass: bool,
}

impl Outcome {
    pub fn ok(json: Value, summary: impl Into<String>) -> Self {
        Outcome {
            json,
            summary: summary.into(),
            pass: true,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_certificate_failure() {
        2
    } else {
        1
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.global.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::InvalidInput(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(o) => {
            let _ = writeln!(stdout, "{}", o.json);
            let status = if o.pass { "pass" } else { "FAIL" };
            let _ = writeln!(stderr, "{status}: {}", o.summary);
            if o.pass {
                0
            } else {
                2
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            let detail = json!({
                "error": e.to_string(),
                "certificate_failure": code == 2,
            });
            let _ = writeln!(stdout, "{detail}");
            let _ = writeln!(stderr, "error: {e}");
            code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Table(c) => commands::table(g, c),
        Command::Map(c) => commands::map(g, c),
        Command::Hofer(c) => commands::hofer(g, c),
        Command::Polygon(c) => commands::polygon(g, c),
        Command::Orbits(c) => commands::orbits(g, c),
        Command::Barcode(c) => commands::barcode(g, c),
        Command::Reconstruct { chords } => commands::reconstruct(g, chords.as_deref()),
        Command::Verify(VerifyCmd::All) => verify::verify_all(g.seed, &g.out),
    }
}
