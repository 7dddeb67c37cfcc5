use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lumpgap::certify::{run_certificate_with_tol, scan_grid, ScanSpec, CERT_TOL};
use lumpgap::model::BlockModelParams;
use lumpgap::modelfile::ModelFile;
use lumpgap::report::{self, ClosedFormReport, Enumeration, SpectrumReport};
use lumpgap::Error;

const EXIT_OK: u8 = 0;
const EXIT_NO_GAP: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "lumpgap", version, about = "Partition-constrained vs relaxed spectral compression of a six-state block chain")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Absolute tolerance for certified comparisons, in (0, 1e-3].
    #[arg(long, default_value_t = CERT_TOL, global = true)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the row-sum and range constraints of a model file.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Macro and local spectra, regime conditions and the diagonal bound.
    Spectrum {
        #[arg(long)]
        model: PathBuf,
    },
    /// List all partitions of n states into k cells.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Evaluate every partition and compare the best against the relaxed benchmark.
    Certify {
        #[arg(long)]
        model: PathBuf,
    },
    /// Closed-form determinants of the structured families and the family gap.
    ClosedForms {
        #[arg(long)]
        model: PathBuf,
    },
    /// Exploratory grid over the three couplings.
    Scan {
        #[arg(long)]
        model: PathBuf,
        /// Half-width of the grid on each coupling.
        #[arg(long, default_value_t = 0.0)]
        radius: f64,
        /// Points per coupling.
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
}

struct Output {
    body: String,
    code: u8,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::MissingKey(_)
        | Error::ConstraintViolation { .. }
        | Error::OutOfRange { .. }
        | Error::Argument(_) => EXIT_INPUT,
        Error::Inconsistent { .. }
        | Error::NoConvergence { .. }
        | Error::NotPsd { .. }
        | Error::Shape { .. }
        | Error::NotSymmetric { .. } => EXIT_INTERNAL,
    }
}

fn load(path: &PathBuf) -> lumpgap::Result<BlockModelParams> {
    ModelFile::read(path)?.params()
}

fn render<T: serde::Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) -> String {
    match format {
        Format::Text => text(value),
        Format::Json => report::to_json(value),
    }
}

fn run(cli: &Cli) -> lumpgap::Result<Output> {
    if !(cli.tol > 0.0 && cli.tol <= 1e-3) {
        return Err(Error::Argument(format!("--tol {} must lie in (0, 1e-3]", cli.tol)));
    }
    let ok = |body| Output { body, code: EXIT_OK };
    match &cli.command {
        Command::Validate { model } => {
            let rep = ModelFile::read(model)?.validation();
            let code = if rep.passed() { EXIT_OK } else { EXIT_INPUT };
            Ok(Output {
                body: render(cli.format, &rep, report::validation_text),
                code,
            })
        }
        Command::Spectrum { model } => {
            let rep = SpectrumReport::build(&load(model)?)?;
            Ok(ok(render(cli.format, &rep, report::spectrum_text)))
        }
        Command::Enumerate { n, k } => {
            let e = Enumeration::build(*n, *k)?;
            Ok(ok(render(cli.format, &e, report::enumeration_text)))
        }
        Command::Certify { model } => {
            let rep = run_certificate_with_tol(&load(model)?, cli.tol)?;
            Ok(Output {
                body: render(cli.format, &rep, report::certificate_text),
                code: if rep.strict_gap { EXIT_OK } else { EXIT_NO_GAP },
            })
        }
        Command::ClosedForms { model } => {
            let rep = ClosedFormReport::build(&load(model)?)?;
            Ok(ok(render(cli.format, &rep, report::closed_form_text)))
        }
        Command::Scan {
            model,
            radius,
            steps,
        } => {
            let spec = ScanSpec {
                radius: *radius,
                steps: *steps,
            };
            let rep = scan_grid(&load(model)?, spec, cli.tol)?;
            Ok(ok(render(cli.format, &rep, report::scan_text)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &out.body),
                None => {
                    print!("{}", out.body);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
