//! Command-line driver.
//!
//! Exit codes: 0 success, 1 program parse error, 2 engine precondition
//! violation or runtime failure, 3 invariant failure in `check`.

use clap::{Args, Parser, Subcommand};
use spindemon_cli::check;
use spindemon_cli::emit::{outcome_csv, outcome_json, sweep_csv, sweep_json, Format};
use spindemon_cli::program::parse_program;
use spindemon_cli::runner::{run_program, run_sweep, SweepParam, SweepSpec};
use spindemon_cli::templates::Template;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spindemon",
    about = "Two-spin information heat engine simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pulse program from a file or a built-in template.
    Run {
        /// Pulse-program file (omit when using --template).
        file: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate a program or template over a one-dimensional parameter grid.
    Sweep {
        /// Pulse-program file (omit when using --template).
        file: Option<PathBuf>,
        /// Parameter to sweep: mu1, mu2, B, T1, T2, gamma, theta, n_steps.
        #[arg(long)]
        param: String,
        /// Grid as START:END:COUNT or START:END:COUNT:log.
        #[arg(long)]
        range: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the invariant suite and print one pass/fail line per property.
    Check,
}

#[derive(Args)]
struct CommonArgs {
    /// Built-in protocol: swap, carnot, erase or tipped.
    #[arg(long)]
    template: Option<String>,
    /// Output format: json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_PARSE: u8 = 1;
const EXIT_ENGINE: u8 = 2;
const EXIT_CHECK: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, common } => run_command(file, common),
        Command::Sweep {
            file,
            param,
            range,
            common,
        } => sweep_command(file, param, range, common),
        Command::Check => check_command(),
    }
}

fn read_format(common: &CommonArgs) -> Result<Format, ExitCode> {
    Format::from_name(&common.format).ok_or_else(|| {
        eprintln!(
            "error: unknown format `{}` (expected json or csv)",
            common.format
        );
        ExitCode::from(EXIT_ENGINE)
    })
}

fn write_output(text: &str, out: &Option<PathBuf>) -> ExitCode {
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_ENGINE);
            }
            ExitCode::SUCCESS
        }
        None => {
            print!("{text}");
            ExitCode::SUCCESS
        }
    }
}

fn load_program(path: &PathBuf) -> Result<spindemon_cli::PulseProgram, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    parse_program(&text).map(|p| p.program).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn resolve_template(name: &str) -> Result<Template, ExitCode> {
    Template::from_name(name).ok_or_else(|| {
        eprintln!("error: unknown template `{name}` (expected swap, carnot, erase or tipped)");
        ExitCode::from(EXIT_ENGINE)
    })
}

fn run_command(file: Option<PathBuf>, common: CommonArgs) -> ExitCode {
    let format = match read_format(&common) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let (params, outcome) = match (&common.template, &file) {
        (Some(name), None) => {
            let template = match resolve_template(name) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let cfg = template.default_config();
            if template == Template::Erase {
                let depth = cfg.params.mu2 * cfg.b_prime / cfg.params.t2;
                if depth < 10.0 {
                    eprintln!(
                        "warning: shallow erasure (mu2 B'/T2 = {depth:.3}); the residual excitation stays sizable"
                    );
                }
            }
            match template.run(&cfg) {
                Ok(outcome) => (cfg.params, outcome),
                Err(e) => {
                    eprintln!("error: template {}: {e}", template.name());
                    return ExitCode::from(EXIT_ENGINE);
                }
            }
        }
        (None, Some(path)) => {
            let program = match load_program(path) {
                Ok(p) => p,
                Err(code) => return code,
            };
            match run_program(&program) {
                Ok(outcome) => (program.params, outcome),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_ENGINE);
                }
            }
        }
        _ => {
            eprintln!("error: give exactly one of <file> or --template NAME");
            return ExitCode::from(EXIT_ENGINE);
        }
    };
    let text = match format {
        Format::Json => outcome_json(&params, &outcome),
        Format::Csv => outcome_csv(&outcome),
    };
    write_output(&text, &common.out)
}

fn parse_range(range: &str, param: SweepParam) -> Result<SweepSpec, String> {
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(format!(
            "range `{range}` is not START:END:COUNT or START:END:COUNT:log"
        ));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad range start `{}`", parts[0]))?;
    let end: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad range end `{}`", parts[1]))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad range count `{}`", parts[2]))?;
    let log = match parts.get(3) {
        None => false,
        Some(&"log") => true,
        Some(other) => return Err(format!("bad range scale `{other}` (only `log`)")),
    };
    SweepSpec::new(param, start, end, count, log).map_err(|e| e.to_string())
}

fn sweep_command(
    file: Option<PathBuf>,
    param: String,
    range: String,
    common: CommonArgs,
) -> ExitCode {
    let format = match read_format(&common) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let param = match SweepParam::from_name(&param) {
        Some(p) => p,
        None => {
            eprintln!(
                "error: unknown sweep parameter `{param}` (expected mu1, mu2, B, T1, T2, gamma, theta, n_steps)"
            );
            return ExitCode::from(EXIT_ENGINE);
        }
    };
    let spec = match parse_range(&range, param) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_ENGINE);
        }
    };
    let table = match (&common.template, &file) {
        (Some(name), None) => {
            let template = match resolve_template(name) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match template.sweep(&spec) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: template {}: {e}", template.name());
                    return ExitCode::from(EXIT_ENGINE);
                }
            }
        }
        (None, Some(path)) => {
            let program = match load_program(path) {
                Ok(p) => p,
                Err(code) => return code,
            };
            match run_sweep(&program, &spec) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_ENGINE);
                }
            }
        }
        _ => {
            eprintln!("error: give exactly one of <file> or --template NAME");
            return ExitCode::from(EXIT_ENGINE);
        }
    };
    let text = match format {
        Format::Json => sweep_json(&table),
        Format::Csv => sweep_csv(&table),
    };
    write_output(&text, &common.out)
}

fn check_command() -> ExitCode {
    let mut all_passed = true;
    for result in check::run_all() {
        if result.passed {
            println!("PASS {}", result.name);
        } else {
            all_passed = false;
            println!("FAIL {}: {}", result.name, result.detail);
        }
    }
    if let Err(msg) = check::pipeline_smoke() {
        all_passed = false;
        println!("FAIL pipeline_smoke: {msg}");
    } else {
        println!("PASS pipeline_smoke");
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK)
    }
}
