mod commands;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use scenario::Scenario;

/// Constant-force particle dynamics on deformed phase spaces.
#[derive(Parser)]
#[command(name = "ncmech", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file, or a built-in name (figure1, figure2).
    #[arg(long)]
    scenario: String,
    /// Overrides the number of samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Overrides the integrator's relative tolerance.
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Largest Jacobi-identity residual over random phase states.
    Jacobi {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Integrate and write `t,x1,x2,x3,p1,p2,p3,H` as CSV.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the integrated trajectory with the closed form.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deviation from classical motion across inverse deformation strengths.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated inverse strengths; defaults to 1e-1,...,1e-5.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Table output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every trajectory as `inv_kappa,t,x1,x2,x3`.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Tabulate the Fresnel integrals as `z,C,S`.
    Fresnel {
        #[arg(long = "z-min", allow_negative_numbers = true)]
        z_min: f64,
        #[arg(long = "z-max", allow_negative_numbers = true)]
        z_max: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(args: &ScenarioArgs) -> Result<Scenario, Failure> {
    let path = Path::new(&args.scenario);
    let mut scenario = if !path.exists() && scenario::BUILTINS.contains(&args.scenario.as_str()) {
        scenario::builtin(&args.scenario).expect("listed built-in")
    } else {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        scenario::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
    };
    if let Some(n) = args.samples {
        if n < 2 {
            return Err(Failure::Input(format!("--samples must be at least 2, got {n}")));
        }
        scenario.samples = n;
    }
    if let Some(r) = args.rel_tol {
        if !(r.is_finite() && r > 0.0) {
            return Err(Failure::Input(format!("--rel-tol must be positive, got {r}")));
        }
        scenario.rel_tol = r;
    }
    Ok(scenario)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Jacobi { scenario } => {
            let states = scenario.samples.unwrap_or(1000);
            let loaded = load(&ScenarioArgs { samples: None, ..scenario })?;
            let (report, pass) = commands::jacobi(&loaded, states)?;
            print!("{report}");
            if !pass {
                return Err(Failure::Tolerance(format!(
                    "jacobi residual exceeds {:e}",
                    commands::JACOBI_TOLERANCE
                )));
            }
        }
        Command::Simulate { scenario, out } => {
            let csv = commands::simulate_csv(&load(&scenario)?)?;
            emit(out.as_deref(), &csv)?;
        }
        Command::Compare { scenario, out } => {
            let (text, json, pass) = commands::compare_report(&load(&scenario)?)?;
            print!("{text}");
            if let Some(path) = out {
                emit(Some(&path), &json)?;
            }
            if !pass {
                return Err(Failure::Tolerance("comparison outside tolerance".into()));
            }
        }
        Command::Sweep {
            scenario,
            values,
            out,
            curves,
        } => {
            let values = values.unwrap_or_else(commands::default_sweep_values);
            let result = commands::sweep(&load(&scenario)?, &values)?;
            emit(out.as_deref(), &result.table)?;
            if let Some(path) = curves {
                emit(Some(&path), &result.curves)?;
            }
        }
        Command::Fresnel { z_min, z_max, n, out } => {
            emit(out.as_deref(), &commands::fresnel_csv(z_min, z_max, n)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message().replace('\n', " "));
            ExitCode::from(failure.exit_code())
        }
    }
}
