use std::path::PathBuf;
use std::process::ExitCode;

use chemopattern::{run, Scenario};
use clap::{Args, Parser, Subcommand};

/// Pattern analysis and simulation of a volume-filling chemotaxis model.
#[derive(Parser)]
#[command(name = "chemopattern", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file, or the name of a built-in preset (fig1 ... fig9).
    #[arg(long)]
    config: String,
    /// Override a config key, e.g. `--set params.d1=0.25`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory. Defaults to the config's `output`, then $CHEMOPATTERN_OUT, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Dispersion relation, unstable band and admissible modes.
    Stability(Common),
    /// Cubic and quintic amplitude-equation coefficients.
    Landau(Common),
    /// Stationary amplitude branches against chi.
    Bifurcation(Common),
    /// Two-mode competition: coefficients, equilibria, basins, PDE runs.
    Competition(Common),
    /// One PDE run to steady state.
    Simulate(Common),
    /// PDE steady state against the asymptotic reconstruction.
    Compare(Common),
    /// Two PDE runs probing coexistence of pattern and uniform state.
    Hysteresis(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (scenario, args) = match cli.command {
        Command::Stability(a) => (Scenario::Stability, a),
        Command::Landau(a) => (Scenario::Landau, a),
        Command::Bifurcation(a) => (Scenario::Bifurcation, a),
        Command::Competition(a) => (Scenario::Competition, a),
        Command::Simulate(a) => (Scenario::Simulate, a),
        Command::Compare(a) => (Scenario::Compare, a),
        Command::Hysteresis(a) => (Scenario::Hysteresis, a),
    };
    match run(scenario, &args.config, &args.set, args.out.as_deref()) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for c in outcome.checks.iter().filter(|c| !c.pass) {
                println!("FAILED {}: value {} ({:?} {})", c.name, c.value, c.bound, c.limit);
            }
            println!("report: {}", outcome.report.display());
            println!("{}", if outcome.pass { "PASS" } else { "FAIL" });
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
