use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use e1dirac_cli::{catalog, lookup, parse_scenario, run, Action, Overrides, Scenario};

#[derive(Parser)]
#[command(name = "e1dirac", version, about = "Integrability, leaves and Poissonization of E¹(M)-Dirac families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify integrability and compare the model bracket.
    Check(RunArgs),
    /// Rank, leaf type and induced leaf structure at a point.
    Classify(RunArgs),
    /// Follow the characteristic foliation from a point.
    Trace(RunArgs),
    /// Build the Dirac structure on M × ℝ and check the isomorphism.
    Poissonize(RunArgs),
    /// Run the actions listed in the scenario.
    Run(RunArgs),
    /// List the built-in scenarios, or print one.
    Catalog { name: Option<String> },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file, or `catalog:<name>`.
    scenario: String,
    /// Point as comma-separated reals.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    at: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Extra uniform sample points.
    #[arg(long)]
    points: Option<usize>,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

fn load(arg: &str) -> Result<Scenario, String> {
    let text = match arg.strip_prefix("catalog:") {
        Some(name) => lookup(name).ok_or_else(|| format!("no catalog scenario named `{name}`"))?.text.to_string(),
        None => std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?,
    };
    parse_scenario(&text).map_err(|errs| errs.iter().map(|e| format!("{arg}:{e}")).collect::<Vec<_>>().join("\n"))
}

fn execute(args: RunArgs, only: Option<Action>) -> ExitCode {
    let mut s = match load(&args.scenario) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    s.apply(&Overrides {
        at: args.at,
        t0: args.t0,
        steps: args.steps,
        dt: args.dt,
        seed: args.seed,
        tol: args.tol,
        points: args.points,
    });
    if let Some(a) = only {
        s.actions = vec![a];
    }
    let report = run(&s);
    let json = report.to_json();
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, &json) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if args.json {
        print!("{json}");
    } else {
        print!("{}", report.to_table());
    }
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Check(a) => execute(a, Some(Action::Check)),
        Command::Classify(a) => execute(a, Some(Action::Classify)),
        Command::Trace(a) => execute(a, Some(Action::Trace)),
        Command::Poissonize(a) => execute(a, Some(Action::Poissonize)),
        Command::Run(a) => execute(a, None),
        Command::Catalog { name: None } => {
            for e in catalog() {
                println!("{}", e.name);
            }
            ExitCode::SUCCESS
        }
        Command::Catalog { name: Some(n) } => match lookup(&n) {
            Some(e) => {
                print!("{}", e.text);
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("no catalog scenario named `{n}`");
                ExitCode::from(2)
            }
        },
    }
}
