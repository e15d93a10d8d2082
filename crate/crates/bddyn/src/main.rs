use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bddyn::cli::{self, CmdError, ReportBundle};

/// Equilibrium, stability, Hopf-bifurcation and trajectory analysis for a
/// three-species predator-prey system with Beddington-DeAngelis responses.
#[derive(Parser)]
#[command(name = "bddyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file (flat parameter keys plus command sections).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for result files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Built-in parameter preset (e.g. "table2"); never supplies r.
    #[arg(long)]
    preset: Option<String>,
    /// Prey growth rate; overrides the config file.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// List every equilibrium with feasibility diagnostics and residuals.
    Equilibria(CommonArgs),
    /// Classify equilibria and evaluate all analytical conditions.
    Stability(CommonArgs),
    /// Locate the Hopf point, reduce to the center manifold, validate.
    Hopf(CommonArgs),
    /// Integrate one trajectory and write it as CSV.
    Simulate(CommonArgs),
    /// Sweep the growth rate and classify the attractor at each point.
    Sweep(CommonArgs),
    /// Run the full cross-validation suite and the comparison report.
    Validate(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Equilibria(a)
            | Command::Stability(a)
            | Command::Hopf(a)
            | Command::Simulate(a)
            | Command::Sweep(a)
            | Command::Validate(a) => a,
        }
    }
}

fn run(cmd: &Command) -> Result<ReportBundle, CmdError> {
    let args = cmd.common();
    let cfg = cli::config::load(args.config.as_deref(), args.preset.as_deref(), args.r)?;
    match cmd {
        Command::Equilibria(_) => cli::cmd_equilibria(&cfg),
        Command::Stability(_) => cli::cmd_stability(&cfg),
        Command::Hopf(_) => cli::cmd_hopf(&cfg),
        Command::Simulate(_) => cli::cmd_simulate(&cfg),
        Command::Sweep(_) => cli::cmd_sweep(&cfg),
        Command::Validate(_) => cli::cmd_validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.common();
    match run(&cli.command) {
        Ok(bundle) => {
            if let Err(e) = std::fs::create_dir_all(&args.out) {
                eprintln!("cannot create output directory {}: {e}", args.out.display());
                return ExitCode::from(1);
            }
            for (name, contents) in &bundle.files {
                let path = args.out.join(name);
                if let Err(e) = std::fs::write(&path, contents) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            print!("{}", bundle.summary);
            ExitCode::from(u8::try_from(bundle.exit_code).unwrap_or(1))
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2))
        }
    }
}
