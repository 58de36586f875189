use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mungo::diagnostic::Diagnostic;
use mungo::harness::{
    check_file, default_max_steps, describe_outcome, run_corpus, verify_program, with_large_stack, CheckReport,
    VerifyOptions,
};
use mungo::interp::{initial_configuration, run, RunOptions, RunOutcome};
use mungo::lts::Lts;
use mungo::monitor::check_error;

// Output goes through these so that a closed pipe ends output quietly.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "mungo", version, about = "Typestate checker and interpreter for Mungo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a program. Exit 0 if accepted, 1 if rejected, 2 on parse errors.
    Check {
        file: PathBuf,
        /// Emit one JSON record per diagnostic.
        #[arg(long)]
        json: bool,
    },
    /// Run a program without checking it.
    Run {
        file: PathBuf,
        #[arg(long)]
        max_steps: Option<u64>,
        /// Print one line per step, to FILE or to standard output.
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        trace: Option<String>,
    },
    /// Check a program, then run it asserting the safety properties at every step.
    Verify {
        file: PathBuf,
        /// Also check that every configuration is well typed.
        #[arg(long)]
        wtc_every_step: bool,
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Run every .mungo file of a directory against its .expect sidecar.
    Corpus {
        dir: PathBuf,
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Print the transition system of a class usage.
    Lts {
        file: PathBuf,
        #[arg(long)]
        class: String,
        /// Graphviz output.
        #[arg(long)]
        dot: bool,
    },
}

fn print_diagnostics(diags: &[Diagnostic], json: bool) {
    for d in diags {
        if json {
            outln!("{}", d.to_json_line());
        } else {
            eprintln!("{d}");
        }
    }
}

fn budget(flag: Option<u64>) -> Result<u64, ExitCode> {
    match flag {
        Some(0) => {
            eprintln!("error: --max-steps must be positive");
            Err(ExitCode::from(2))
        }
        Some(n) => Ok(n),
        None => Ok(default_max_steps()),
    }
}

fn cmd_check(file: &Path, json: bool) -> ExitCode {
    let report = check_file(file);
    print_diagnostics(report.diagnostics(), json);
    if let CheckReport::Accepted(_) = report {
        if !json {
            outln!("{}: accepted", file.display());
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn cmd_run(file: &Path, max_steps: u64, trace: Option<String>) -> ExitCode {
    let program = match check_file(file) {
        CheckReport::Accepted(p) | CheckReport::Rejected(p, _) => p,
        CheckReport::ParseFailed(d) => {
            print_diagnostics(&d, false);
            return ExitCode::from(2);
        }
    };
    let cfg = match initial_configuration(&program) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = run(&program, cfg, &RunOptions { max_steps, trace: trace.is_some() });
    if let Some(dest) = trace {
        let lines: String = result.trace.iter().map(|t| t.line() + "\n").collect();
        if dest == "-" {
            out!("{lines}");
        } else if let Err(e) = fs::write(&dest, lines) {
            eprintln!("error: cannot write trace to `{dest}`: {e}");
            return ExitCode::from(2);
        }
    }
    outln!("{}", describe_outcome(&result.outcome, &result.final_config));
    match result.outcome {
        RunOutcome::Terminal(_) => ExitCode::SUCCESS,
        RunOutcome::Stuck { step, .. } => {
            if let Some(err) = check_error(&result.final_config) {
                eprintln!("{}", err.report(step));
            }
            ExitCode::from(3)
        }
        RunOutcome::Budget => ExitCode::from(4),
    }
}

fn cmd_verify(file: &Path, wtc_every_step: bool, max_steps: u64) -> ExitCode {
    let program = match check_file(file) {
        CheckReport::Accepted(p) => p,
        other => {
            print_diagnostics(other.diagnostics(), false);
            return ExitCode::from(other.exit_code() as u8);
        }
    };
    let report = verify_program(&program, &VerifyOptions { max_steps, wtc_every_step });
    for v in &report.violations {
        eprintln!("{v}");
    }
    outln!("{}", describe_outcome(&report.outcome, &report.final_config));
    outln!(
        "steps: {}, monitor hits: {}, well-formedness violations: {}, linearity violations: {}, WTC violations: {}{}",
        report.steps,
        report.monitor_hits,
        report.wf_violations,
        report.linearity_violations,
        report.wtc_violations,
        if wtc_every_step { "" } else { " (not checked)" }
    );
    let rules: Vec<String> = report.rule_counts.iter().map(|(r, n)| format!("{r}={n}")).collect();
    outln!("rules: {}", rules.join(" "));
    if report.ok() {
        ExitCode::SUCCESS
    } else if report.violations.is_empty() {
        ExitCode::from(4)
    } else {
        ExitCode::from(3)
    }
}

fn cmd_corpus(dir: &Path, max_steps: u64) -> ExitCode {
    match run_corpus(dir, max_steps) {
        Ok(summary) => {
            out!("{}", summary.table());
            if summary.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: cannot read `{}`: {e}", dir.display());
            ExitCode::from(2)
        }
    }
}

fn cmd_lts(file: &Path, class: &str, dot: bool) -> ExitCode {
    let program = match check_file(file) {
        CheckReport::Accepted(p) | CheckReport::Rejected(p, _) => p,
        CheckReport::ParseFailed(d) => {
            print_diagnostics(&d, false);
            return ExitCode::from(2);
        }
    };
    let Some(decl) = program.class(class) else {
        eprintln!("error: class `{class}` is not declared");
        return ExitCode::from(1);
    };
    let lts = match Lts::explore(&decl.usage) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if dot {
        out!("{}", lts.to_dot(class));
    } else {
        for (i, s) in lts.states.iter().enumerate() {
            outln!("s{i}: {s}");
        }
        for (from, t, to) in &lts.edges {
            outln!("s{from} --{t}--> s{to}");
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    with_large_stack(|| dispatch(cli))
}

fn dispatch(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Check { file, json } => cmd_check(&file, json),
        Command::Run { file, max_steps, trace } => match budget(max_steps) {
            Ok(n) => cmd_run(&file, n, trace),
            Err(code) => code,
        },
        Command::Verify { file, wtc_every_step, max_steps } => match budget(max_steps) {
            Ok(n) => cmd_verify(&file, wtc_every_step, n),
            Err(code) => code,
        },
        Command::Corpus { dir, max_steps } => match budget(max_steps) {
            Ok(n) => cmd_corpus(&dir, n),
            Err(code) => code,
        },
        Command::Lts { file, class, dot } => cmd_lts(&file, &class, dot),
    }
}
