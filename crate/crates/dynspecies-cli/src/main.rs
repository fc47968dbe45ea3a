use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use dynspecies::scenario::{list_checks, parse_scenario, report_json, run_scenario, RunOptions, RunOutput};
use dynspecies::Error;

/// Run a scenario of law checks and write `report.json` and `hubble.csv`.
#[derive(Parser, Debug)]
#[command(name = "dynspecies", version)]
struct Args {
    /// Scenario JSON file.
    #[arg(long, required_unless_present = "list_checks")]
    scenario: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    /// Leave the timestamp out of the report.
    #[arg(long)]
    no_timestamp: bool,
    /// Print the registered checks and exit.
    #[arg(long)]
    list_checks: bool,
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn run(args: &Args) -> Result<bool, Error> {
    let path = args.scenario.as_ref().expect("required by clap");
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let scenario = parse_scenario(&text)?;
    let opts = RunOptions { seed: args.seed, tol_scale: args.tol_scale };
    let RunOutput { mut report, series } = run_scenario(&scenario, &opts)?;
    if !args.no_timestamp {
        report.timestamp = Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io(format!("{}: {e}", args.out.display())))?;
    write(&args.out.join("report.json"), &report_json(&report))?;
    write(&args.out.join("hubble.csv"), &series.map(|s| s.to_csv()).unwrap_or_default())?;
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        println!("{status} {:<24} instances={:<6} max_delta={:.3e} violations={}", c.id, c.instances, c.max_delta, c.violations_total);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_checks {
        print!("{}", list_checks());
        return ExitCode::SUCCESS;
    }
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dynspecies: {e}");
            ExitCode::from(2)
        }
    }
}
