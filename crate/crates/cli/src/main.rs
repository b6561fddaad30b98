//! `qchan`: batch analysis of quantum channel files.
//!
//! Exit status: 0 success, 1 invalid channel or parameters, 2 I/O, parse or
//! usage error, 3 internal consistency failure. Over a batch the largest
//! status wins.

mod analyses;
mod error;
mod generate;
mod iterate;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{value_parser, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use qchan::Tolerances;

use analyses::{Config, ReportCommand};
use error::CliError;
use generate::Family;
use report::{to_json_bytes, Failure, Report, Status, Timing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qchan", version, about = "Batch analysis of finite-dimensional quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Channel JSON files.
    #[arg(long = "input", global = true, num_args = 1.., value_name = "PATH")]
    inputs: Vec<PathBuf>,

    /// Largest power examined by n-index, ES and iterate.
    #[arg(long, global = true, default_value_t = 64, value_parser = value_parser!(u64).range(1..))]
    nmax: u64,

    /// Seed recorded in reports and used by `generate` when no `seed=` is given.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Positivity tolerance for eigenvalue checks.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol_pos: Option<f64>,
    /// Eigenvalue clustering tolerance.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol_spec: Option<f64>,
    /// Distance from the unit circle that still counts as peripheral.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol_peri: Option<f64>,
    /// Commutator norm below which phase points commute.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol_comm: Option<f64>,

    /// Defaults to csv for iterate and json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for multi-file batches.
    #[arg(long, global = true, value_parser = value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Leave wall-clock fields out so reports are byte-for-byte reproducible.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CP/TP checks with residuals.
    Validate,
    /// Spectrum, EB, n-index, ES, AES and unitarity verdicts.
    Classify,
    /// Smallest entanglement-breaking power.
    Nindex,
    /// Per-power entanglement diagnostics for one channel.
    Iterate,
    /// Write a channel file for a built-in family.
    Generate {
        family: Family,
        /// `key=value` pairs, e.g. `lambda=0.8 mu=0.7` or `blocks=2,1;1,1 perm=0,1`.
        params: Vec<String>,
    },
    /// Block structure of the phase subspace.
    Structure,
}

impl Cli {
    fn config(&self) -> Result<Config, CliError> {
        let mut tol = Tolerances::default();
        for (slot, v) in
            [(&mut tol.pos, self.tol_pos), (&mut tol.spec, self.tol_spec), (&mut tol.peri, self.tol_peri), (&mut tol.comm, self.tol_comm)]
        {
            if let Some(v) = v {
                *slot = v;
            }
        }
        tol.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Config { tol, n_max: self.nmax, seed: self.seed, timestamp: !self.no_timestamp })
    }

    fn require_inputs(&self) -> Result<(), CliError> {
        if self.inputs.is_empty() {
            return Err(CliError::Usage("no input files (use --input <PATH>...)".into()));
        }
        Ok(())
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.to_path_buf(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

fn run_reports(cli: &Cli, cmd: ReportCommand) -> Result<Status, CliError> {
    cli.require_inputs()?;
    let cfg = cli.config()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j as usize);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    // par_iter keeps input order in the collected vector
    let reports: Vec<Report> = pool.install(|| cli.inputs.par_iter().map(|p| analyses::run_file(cmd, p, &cfg)).collect());

    for rep in &reports {
        if let Some(f) = &rep.error {
            eprintln!("qchan: {}: {}", rep.input.path, f.message);
        }
    }
    let bytes = match cli.format.unwrap_or(Format::Json) {
        Format::Json if reports.len() == 1 => to_json_bytes(&reports[0]),
        Format::Json => to_json_bytes(&reports),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(cmd.csv_header()).expect("in-memory write");
            for rep in &reports {
                w.write_record(analyses::csv_row(cmd, rep)).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    };
    emit(cli.out.as_deref(), &bytes)?;
    Ok(reports.iter().map(Report::status).max().unwrap_or(Status::Ok))
}

fn run_iterate(cli: &Cli) -> Result<Status, CliError> {
    cli.require_inputs()?;
    if cli.inputs.len() > 1 {
        return Err(CliError::Usage("iterate takes a single --input".into()));
    }
    if cli.nmax > iterate::MAX_POWERS {
        return Err(CliError::Usage(format!("--nmax {} exceeds the iterate limit of {}", cli.nmax, iterate::MAX_POWERS)));
    }
    let cfg = cli.config()?;
    let started = Instant::now();
    let unix_time_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let path = &cli.inputs[0];
    let (input, loaded) = analyses::load(path);
    let traced = loaded.and_then(|ch| {
        let rep = ch.validate_cptp_with(&cfg.tol);
        if !(rep.cp && rep.tp) {
            return Err(Failure::new(Status::Invalid, format!("not a channel: {rep:?}")));
        }
        iterate::trace(&ch, cfg.n_max, &cfg.tol).map_err(|e| Failure::from_error(&e))
    });
    let format = cli.format.unwrap_or(Format::Csv);
    let (bytes, status) = match (traced, format) {
        (Ok(rows), Format::Csv) => (iterate::to_csv(&rows, &iterate::Monotone::of(&rows, cfg.tol.pos)), Status::Ok),
        (Err(f), Format::Csv) => {
            eprintln!("qchan: {}", f.message);
            return Ok(f.status);
        }
        (traced, Format::Json) => {
            let (results, error) = match traced {
                Ok(rows) => (json!({"rows": rows, "monotone": iterate::Monotone::of(&rows, cfg.tol.pos)}), None),
                Err(f) => (json!({}), Some(f)),
            };
            let timing = cfg.timestamp.then(|| Timing { unix_time_s, elapsed_s: started.elapsed().as_secs_f64() });
            let rep = Report { tool: cfg.tool("iterate"), input, results, error, timing };
            if let Some(f) = &rep.error {
                eprintln!("qchan: {}", f.message);
            }
            (to_json_bytes(&rep), rep.status())
        }
    };
    emit(cli.out.as_deref(), &bytes)?;
    Ok(status)
}

fn run_generate(cli: &Cli, family: Family, params: &[String]) -> Result<Status, CliError> {
    if cli.format == Some(Format::Csv) {
        return Err(CliError::Usage("generate writes channel JSON only".into()));
    }
    let ch = generate::build(family, params, cli.seed)?;
    emit(cli.out.as_deref(), &generate::file_bytes(&ch))?;
    Ok(Status::Ok)
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    match &cli.command {
        Command::Validate => run_reports(cli, ReportCommand::Validate),
        Command::Classify => run_reports(cli, ReportCommand::Classify),
        Command::Nindex => run_reports(cli, ReportCommand::NIndex),
        Command::Structure => run_reports(cli, ReportCommand::Structure),
        Command::Iterate => run_iterate(cli),
        Command::Generate { family, params } => run_generate(cli, *family, params),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = run(&cli).unwrap_or_else(|e| {
        eprintln!("qchan: {e}");
        e.status()
    });
    ExitCode::from(status.code())
}
