use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gridrisk_cli::report::{self, figure_artifacts};
use gridrisk_cli::scenario::{load_scenario, Overrides};
use gridrisk_cli::CliError;
use gridrisk_core::{lole_daily_peak, lole_hourly, Copt, Rounding};

/// Cyber-physical generation adequacy toolkit: attack-chain probabilities,
/// capacity outage tables, analytic LOLP/LOLE and Monte Carlo year runs.
#[derive(Parser)]
#[command(name = "gridrisk", version, about)]
struct Cli {
    /// Override the scenario's Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the scenario's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the scenario's replication count.
    #[arg(long, global = true)]
    replications: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the attack graph and print the disruption probability.
    AttackProb { scenario: PathBuf },
    /// Build the base and derated capacity outage tables, write their CSVs.
    Copt { scenario: PathBuf },
    /// Compute analytic LOLE (daily-peak and hourly, base and derated).
    Lole { scenario: PathBuf },
    /// Full run: attack graph, outage tables, analytic LOLE, Monte Carlo,
    /// all exports.
    Simulate { scenario: PathBuf },
    /// Run several scenarios and print a comparison table.
    Compare {
        #[arg(num_args = 2..)]
        scenarios: Vec<PathBuf>,
    },
    /// Extract plot-ready CSVs from an existing bundle directory.
    Figure { bundle: PathBuf, name: String },
}

fn overrides(cli: &Cli) -> Overrides {
    Overrides {
        seed: cli.seed,
        replications: cli.replications,
        out_dir: cli.out.clone(),
    }
}

fn print_kv(lines: &[(String, String)]) {
    for (k, v) in lines {
        println!("{k}: {v}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::AttackProb { scenario } => {
            let s = load_scenario(scenario, &overrides(&cli))?;
            let d = s
                .graph
                .disruption_probability(&s.target)
                .map_err(|e| CliError::Runtime(format!("attack graph evaluation: {e}")))?;
            println!("scenario: {}", s.label);
            println!("attack_target: {}", s.target);
            println!("disruption_probability: {:e}", d.probability);
            println!("attack_paths: {}", d.path_count);
            if d.unreachable {
                println!("warning: target unreachable from every root");
            }
            Ok(())
        }
        Command::Copt { scenario } => {
            let s = load_scenario(scenario, &overrides(&cli))?;
            let base = Copt::build(&s.fleet, Rounding::Exact)
                .map_err(|e| CliError::Runtime(format!("outage table: {e}")))?;
            let derated = base
                .apply_cyber_derating(s.cyber.delta)
                .map_err(|e| CliError::Runtime(format!("derating: {e}")))?;
            std::fs::create_dir_all(&s.out_dir)
                .map_err(|e| CliError::Runtime(format!("create {}: {e}", s.out_dir.display())))?;
            for (name, table) in [("copt_base.csv", &base), ("copt_derated.csv", &derated)] {
                let mut buf = Vec::new();
                table
                    .write_csv(&mut buf)
                    .and_then(|()| std::fs::write(s.out_dir.join(name), &buf))
                    .map_err(|e| CliError::Runtime(format!("write {name}: {e}")))?;
            }
            println!("scenario: {}", s.label);
            println!("installed_mw: {}", base.installed_mw());
            println!("states_base: {}", base.states().len());
            println!("states_derated: {}", derated.states().len());
            println!("delta: {}", s.cyber.delta);
            println!("out_dir: {}", s.out_dir.display());
            Ok(())
        }
        Command::Lole { scenario } => {
            let s = load_scenario(scenario, &overrides(&cli))?;
            let base = Copt::build(&s.fleet, Rounding::Exact)
                .map_err(|e| CliError::Runtime(format!("outage table: {e}")))?;
            let derated = base
                .apply_cyber_derating(s.cyber.delta)
                .map_err(|e| CliError::Runtime(format!("derating: {e}")))?;
            std::fs::create_dir_all(&s.out_dir)
                .map_err(|e| CliError::Runtime(format!("create {}: {e}", s.out_dir.display())))?;
            let reports = [
                ("lole_daily_peak.json", lole_daily_peak(&base, &s.profile)),
                ("lole_hourly.json", lole_hourly(&base, &s.profile)),
                (
                    "lole_derated_daily_peak.json",
                    lole_daily_peak(&derated, &s.profile),
                ),
                ("lole_derated_hourly.json", lole_hourly(&derated, &s.profile)),
            ];
            println!("scenario: {}", s.label);
            for (name, breakdown) in &reports {
                let mut bytes = serde_json::to_vec_pretty(breakdown)
                    .map_err(|e| CliError::Runtime(format!("serialize {name}: {e}")))?;
                bytes.push(b'\n');
                std::fs::write(s.out_dir.join(name), bytes)
                    .map_err(|e| CliError::Runtime(format!("write {name}: {e}")))?;
                println!(
                    "{}: {}",
                    name.trim_end_matches(".json"),
                    breakdown.lole_days_per_year
                );
            }
            println!("out_dir: {}", s.out_dir.display());
            Ok(())
        }
        Command::Simulate { scenario } => {
            let bundle = report::run_scenario(scenario, &overrides(&cli))?;
            print_kv(&report::summary_lines(&bundle));
            Ok(())
        }
        Command::Compare { scenarios } => {
            let table = report::compare(scenarios, &overrides(&cli))?;
            let csv_path = report::write_compare_csv(&table, cli.out.as_deref())?;
            print!("{}", table.render_text());
            println!("csv: {}", csv_path.display());
            Ok(())
        }
        Command::Figure { bundle, name } => {
            if figure_artifacts(name).is_none() {
                return Err(CliError::Input {
                    file: bundle.display().to_string(),
                    message: format!(
                        "unknown figure `{name}`; expected one of lolp_series, lole_hist, copt_compare, availability"
                    ),
                });
            }
            let written = report::emit_figure_data(bundle, name)?;
            for path in written {
                println!("figure: {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
