use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sbiga::run::{format_table, run_study, solve_level, write_csv, RunOptions};
use sbiga::verify::{verify, Check};
use sbiga::vtk::{sample_field, write_vtk};
use sbiga::{config, Case, HarnessError};

#[derive(Parser)]
#[command(name = "sbiga", version, about = "Kirchhoff plates on C1 scaled-boundary spline spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone, Copy)]
struct Common {
    /// Single-threaded, deterministic execution.
    #[arg(long, global = true)]
    serial: bool,
    /// Gauss points per direction and element.
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    /// Relative threshold of the jump null space.
    #[arg(long, global = true)]
    tol_null: Option<f64>,
    /// Write zero wall times to the CSV.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every level of the study and write the result table.
    Run {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the case as a convergence study over the given levels.
    Converge {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check AS-G1 gluing, C1 jumps and reproduction of 1, x, y.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        checks: CheckArg,
    },
    /// Sample deflection and moments on a lattice per patch.
    Export {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Level to solve; the finest level of the study by default.
        #[arg(long)]
        level: Option<usize>,
        /// Samples along zeta and xi, e.g. `21,11`.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Asg1,
    C1Jump,
    Reproduction,
    All,
}

fn load_case(path: &Path) -> Result<Case, HarnessError> {
    Case::from_config(&config::load(path)?)
}

fn emit_rows(case: &Case, rows: &[sbiga::ResultRow], csv: Option<PathBuf>) -> Result<(), HarnessError> {
    print!("{}", format_table(rows));
    if let Some(path) = csv.or_else(|| case.outputs.csv.as_ref().map(PathBuf::from)) {
        write_csv(rows, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let c = cli.common;
    if c.serial {
        sbiga::force_serial();
    }
    let opts = RunOptions { quad_order: c.quad_order, null_tol: c.tol_null, no_timing: c.no_timing };
    match cli.command {
        Command::Run { config, csv } => {
            let case = load_case(&config)?;
            let rows = run_study(&case, &opts)?;
            emit_rows(&case, &rows, csv)
        }
        Command::Converge { config, levels, csv } => {
            let mut case = load_case(&config)?;
            if levels.is_empty() || levels.contains(&0) {
                return Err(HarnessError::Schema { path: "--levels".into(), reason: "levels must be positive".into() });
            }
            case.levels = levels;
            let rows = run_study(&case, &opts)?;
            emit_rows(&case, &rows, csv)
        }
        Command::Verify { config, checks } => {
            let case = load_case(&config)?;
            let list = match checks {
                CheckArg::Asg1 => vec![Check::Asg1],
                CheckArg::C1Jump => vec![Check::C1Jump],
                CheckArg::Reproduction => vec![Check::Reproduction],
                CheckArg::All => Check::ALL.to_vec(),
            };
            let report = verify(&case, &list, &opts)?;
            print!("{report}");
            match report.failures() {
                0 => Ok(()),
                n => Err(HarnessError::ChecksFailed(n)),
            }
        }
        Command::Export { config, out, level, grid } => {
            let case = load_case(&config)?;
            let level = level.unwrap_or_else(|| *case.levels.iter().max().expect("validated levels"));
            let grid = match grid.as_deref() {
                None => case.outputs.grid,
                Some([a, b]) if *a >= 2 && *b >= 2 => [*a, *b],
                Some(_) => {
                    return Err(HarnessError::Schema {
                        path: "--grid".into(),
                        reason: "expected two sample counts of at least 2".into(),
                    })
                }
            };
            let path = out
                .or_else(|| case.outputs.field.as_ref().map(PathBuf::from))
                .ok_or_else(|| HarnessError::Schema { path: "outputs.field".into(), reason: "no output path".into() })?;
            let solved = solve_level(&case, level, &opts)?;
            let data = sample_field(&solved.field(), &case.material, grid)?;
            write_vtk(&data, &format!("{} level {level}", case.name), &path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", serde_json::to_string(&e.diagnostic()).unwrap_or_default());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
