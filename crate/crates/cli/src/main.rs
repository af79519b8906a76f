//! `revopt`: cost, simulate, compare and optimize reversible circuits.
//!
//! Exit status: 0 success or equivalent, 1 not equivalent, 2 usage or parse
//! error, 3 internal limit exceeded.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use revopt::circuit::{state_bits, MAX_SIM_WIDTH};
use revopt::io::ParseErrorKind;
use revopt::pipeline::parse_rules;
use revopt::{
    circuit_cost, optimize, parse_circuit, parse_spec, simulate, write_circuit, Circuit, CircuitError, OptimizeConfig,
    OptimizeError, OptimizeReport,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "revopt", version, about = "Quantum-cost optimizer for reversible Toffoli circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print gate count and quantum cost.
    Cost {
        /// Circuit file, or `-` for stdin.
        file: PathBuf,
    },
    /// Compare a circuit with another circuit or with a permutation.
    Equiv {
        file: PathBuf,
        #[arg(required_unless_present = "spec", conflicts_with = "spec")]
        other: Option<PathBuf>,
        /// Permutation such as "(1,0,3,2)".
        #[arg(long)]
        spec: Option<String>,
    },
    /// Optimize a circuit and report the cost change.
    Optimize {
        file: PathBuf,
        /// Comma-separated subset of pr,gpr,ctr,rctr,delete,move, or `all`.
        #[arg(long, default_value = "all")]
        rules: String,
        #[arg(long = "max-iter", default_value_t = 32)]
        max_iter: usize,
        /// Skip the final simulation check.
        #[arg(long = "no-verify")]
        no_verify: bool,
        /// Write the circuit here; the report then goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
        /// Seed for the heuristic cover search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Simulate one input state or print the whole permutation.
    Sim {
        file: PathBuf,
        /// Input state as a bit string, first line first.
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        state: Option<String>,
        #[arg(long)]
        all: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

enum Failure {
    NotEquivalent(String),
    Usage(String),
    Limit(String),
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::SimulationLimit { .. } => Failure::Limit(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn load(path: &Path) -> Result<Circuit, Failure> {
    let text = read_input(path)?;
    parse_circuit(&text).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        match e.kind {
            ParseErrorKind::Circuit(CircuitError::TooWide(_)) => Failure::Limit(msg),
            _ => Failure::Usage(msg),
        }
    })
}

fn check_sim_width(c: &Circuit) -> Result<(), Failure> {
    if c.width() > MAX_SIM_WIDTH {
        return Err(Failure::Limit(format!(
            "circuit has {} lines; simulation supports at most {MAX_SIM_WIDTH}",
            c.width()
        )));
    }
    Ok(())
}

fn cmd_cost(file: &Path) -> Result<(), Failure> {
    let c = load(file)?;
    let cost = circuit_cost(&c).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("gates={} cost={cost}", c.len());
    Ok(())
}

fn cmd_equiv(file: &Path, other: Option<&Path>, spec: Option<&str>) -> Result<(), Failure> {
    let c = load(file)?;
    check_sim_width(&c)?;
    let expected = match (other, spec) {
        (Some(path), _) => {
            let d = load(path)?;
            if d.width() != c.width() {
                return Err(Failure::Usage(format!(
                    "circuits have different widths ({} and {})",
                    c.width(),
                    d.width()
                )));
            }
            simulate(&d)?
        }
        (None, Some(text)) => {
            let p = parse_spec(text).map_err(|e| Failure::Usage(format!("--spec: {e}")))?;
            if p.width() != c.width() {
                return Err(Failure::Usage(format!(
                    "specification covers {} lines, circuit has {}",
                    p.width(),
                    c.width()
                )));
            }
            p
        }
        (None, None) => return Err(Failure::Usage("need a second circuit or --spec".into())),
    };
    let got = simulate(&c)?;
    match got.first_difference(&expected) {
        None => {
            println!("equivalent");
            Ok(())
        }
        Some(state) => {
            let w = c.width();
            Err(Failure::NotEquivalent(format!(
                "not equivalent: input state {state} ({}) maps to {} instead of {}",
                state_bits(state, w),
                state_bits(got.get(state), w),
                state_bits(expected.get(state), w)
            )))
        }
    }
}

fn report_json(r: &OptimizeReport) -> String {
    let passes: Vec<_> = r
        .passes
        .iter()
        .map(|p| {
            json!({
                "iteration": p.iteration,
                "pass": p.pass.to_string(),
                "cost_before": p.cost_before,
                "cost_after": p.cost_after,
                "gates_before": p.gates_before,
                "gates_after": p.gates_after,
                "accepted": p.accepted,
            })
        })
        .collect();
    let value = json!({
        "cost_before": r.cost_before,
        "cost_after": r.cost_after,
        "gates_before": r.gates_before,
        "gates_after": r.gates_after,
        "improvement_percent": r.improvement_percent(),
        "iterations": r.iterations_run,
        "equivalence_checked": r.equivalence_checked,
        "passes": passes,
    });
    serde_json::to_string_pretty(&value).expect("report is plain data")
}

fn report_text(r: &OptimizeReport) -> String {
    let mut s = String::new();
    let imp = r
        .improvement_percent()
        .map_or_else(|| "n/a".to_string(), |p| format!("{p:.2}%"));
    let _ = writeln!(s, "cost: {} -> {} (improvement {imp})", r.cost_before, r.cost_after);
    let _ = writeln!(s, "gates: {} -> {}", r.gates_before, r.gates_after);
    let _ = writeln!(s, "iterations: {}", r.iterations_run);
    let _ = writeln!(s, "equivalence checked: {}", if r.equivalence_checked { "yes" } else { "no" });
    for p in &r.passes {
        let _ = writeln!(
            s,
            "  iter {} {:<10} cost {} -> {}  gates {} -> {}{}",
            p.iteration,
            p.pass.to_string(),
            p.cost_before,
            p.cost_after,
            p.gates_before,
            p.gates_after,
            if p.accepted { "  accepted" } else { "" }
        );
    }
    s
}

struct OptimizeArgs<'a> {
    file: &'a Path,
    rules: &'a str,
    max_iter: usize,
    no_verify: bool,
    out: Option<&'a Path>,
    report: ReportFormat,
    seed: u64,
}

fn cmd_optimize(args: OptimizeArgs<'_>) -> Result<(), Failure> {
    let c = load(args.file)?;
    let rules = parse_rules(args.rules).map_err(|e| Failure::Usage(format!("--rules: {e}")))?;
    let cfg = OptimizeConfig {
        rules,
        max_iterations: args.max_iter,
        seed: args.seed,
        verify: !args.no_verify,
        ..OptimizeConfig::default()
    };
    let (out, report) = optimize(&c, &cfg).map_err(|e| match e {
        OptimizeError::EquivalenceViolation(_) => Failure::NotEquivalent(e.to_string()),
        other => Failure::Usage(other.to_string()),
    })?;
    let mut circuit_text = write_circuit(&out);
    circuit_text.push('\n');
    let mut report_text = match args.report {
        ReportFormat::Json => report_json(&report),
        ReportFormat::Text => report_text(&report),
    };
    if !report_text.ends_with('\n') {
        report_text.push('\n');
    }
    match args.out {
        Some(path) => {
            fs::write(path, circuit_text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            print!("{report_text}");
        }
        None => {
            print!("{circuit_text}");
            eprint!("{report_text}");
        }
    }
    Ok(())
}

fn cmd_sim(file: &Path, state: Option<&str>, all: bool) -> Result<(), Failure> {
    let c = load(file)?;
    let w = c.width();
    if all {
        check_sim_width(&c)?;
        println!("{}", simulate(&c)?);
        return Ok(());
    }
    let bits = state.ok_or_else(|| Failure::Usage("need --state or --all".into()))?;
    if bits.len() != w || !bits.chars().all(|ch| ch == '0' || ch == '1') {
        return Err(Failure::Usage(format!("--state must be {w} binary digits, got {bits:?}")));
    }
    let input = u64::from_str_radix(bits, 2).expect("validated binary digits");
    println!("{}", state_bits(c.apply(input), w));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Cost { file } => cmd_cost(&file),
        Command::Equiv { file, other, spec } => cmd_equiv(&file, other.as_deref(), spec.as_deref()),
        Command::Optimize {
            file,
            rules,
            max_iter,
            no_verify,
            out,
            report,
            seed,
        } => cmd_optimize(OptimizeArgs {
            file: &file,
            rules: &rules,
            max_iter,
            no_verify,
            out: out.as_deref(),
            report,
            seed,
        }),
        Command::Sim { file, state, all } => cmd_sim(&file, state.as_deref(), all),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotEquivalent(msg)) => {
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
