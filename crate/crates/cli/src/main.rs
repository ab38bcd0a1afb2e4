use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lipfree::Mode;
use lipfree_cli::{report, run_path, Flags, EXIT_PARSE};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Parser, Debug)]
#[command(name = "lipfree", version, about = "Lipschitz-free space workbench")]
struct Cli {
    /// Arithmetic mode; overrides the scenario.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Float-mode comparison tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Write the JSON report here; the summary then goes to stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Capacity override, `group=N` or `grid=N`; repeatable.
    #[arg(long, global = true, value_name = "KEY=N")]
    cap: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every task of a scenario in order.
    Run { scenario: PathBuf },
    /// Check the metric axioms of the scenario space.
    Validate { scenario: PathBuf },
    /// Free norms of the scenario vectors (all molecules by default).
    FreeNorm { scenario: PathBuf },
    /// Basis lifting and its norm.
    Lift { scenario: PathBuf },
    /// Group average of a lifting.
    Average { scenario: PathBuf },
    /// Minimum-norm (equivariant) lifting by linear programming.
    EquivariantLift { scenario: PathBuf },
    /// Convert between lifting, invariant complement and projection.
    Split { scenario: PathBuf },
    /// Dual projection on Lipschitz functions induced by a lifting.
    Dualize { scenario: PathBuf },
    /// Circle averaging, quotient norms and the complex lifting.
    Complexify { scenario: PathBuf },
    /// Grid lifting for a sign-invariant norm on the cube.
    CubeLift { scenario: PathBuf },
    /// Summarize a report file, or run the report task of a scenario.
    Report { file: PathBuf },
}

fn parse_caps(caps: &[String], flags: &mut Flags) -> Result<(), String> {
    for c in caps {
        let (key, value) = c.split_once('=').ok_or_else(|| format!("--cap {c}: expected KEY=N"))?;
        let n: usize = value.parse().map_err(|_| format!("--cap {c}: {value} is not a count"))?;
        match key {
            "group" => flags.group_cap = Some(n),
            "grid" => flags.grid_cap = Some(n),
            _ => return Err(format!("--cap {c}: unknown key {key}; expected group or grid")),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut flags = Flags {
        mode: cli.mode.map(|m| match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }),
        tolerance: cli.tolerance,
        ..Flags::default()
    };
    if let Err(e) = parse_caps(&cli.cap, &mut flags) {
        eprintln!("{e}");
        return ExitCode::from(EXIT_PARSE as u8);
    }
    if let Some(n) = cli.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("--parallel: {e}");
        }
    }
    let (kind, path) = match cli.command {
        Command::Run { scenario } => (None, scenario),
        Command::Validate { scenario } => (Some("validate"), scenario),
        Command::FreeNorm { scenario } => (Some("free-norm"), scenario),
        Command::Lift { scenario } => (Some("lift"), scenario),
        Command::Average { scenario } => (Some("average"), scenario),
        Command::EquivariantLift { scenario } => (Some("equivariant-lift"), scenario),
        Command::Split { scenario } => (Some("split"), scenario),
        Command::Dualize { scenario } => (Some("dualize"), scenario),
        Command::Complexify { scenario } => (Some("complexify"), scenario),
        Command::CubeLift { scenario } => (Some("cube-lift"), scenario),
        Command::Report { file } => {
            if let Some(code) = summarize_existing(&file) {
                return ExitCode::from(code as u8);
            }
            (Some("report"), file)
        }
    };
    flags.only = kind.map(str::to_string);
    let rep = run_path(&path, &flags);
    let text = rep.to_pretty();
    match &cli.output {
        Some(out) => {
            if let Err(e) = std::fs::write(out, &text) {
                eprintln!("{}: {e}", out.display());
                return ExitCode::from(EXIT_PARSE as u8);
            }
            print!("{}", rep.summary());
        }
        None => {
            print!("{text}");
            eprint!("{}", rep.summary());
        }
    }
    ExitCode::from(rep.exit_code() as u8)
}

/// Prints the summary of an existing report document and returns its exit
/// code; `None` when the file is not a report.
fn summarize_existing(path: &PathBuf) -> Option<i32> {
    let text = std::fs::read_to_string(path).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    if value.get("format").and_then(|f| f.as_str()) != Some(report::FORMAT) {
        return None;
    }
    print!("{}", report::summarize(&value));
    Some(value["exit_code"].as_i64().unwrap_or(0) as i32)
}
