use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cosmoburgers::commands::{self, CommandError};
use cosmoburgers::config::{
    self, default_config, parse_config_with, parse_grid_arg, parse_regime, ConfigError, Overrides,
    RunConfig,
};
use cosmoburgers_core::{Background, Regime, SpaceOrder, TimeScheme};

#[derive(Parser)]
#[command(name = "cosmoburgers", version = cosmoburgers::output::VERSION)]
#[command(about = "Finite-volume solver for the cosmological Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, env = "COSMOBURGERS_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Initial-data preset
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true, value_parser = parse_regime)]
    regime: Option<Regime>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// N or NxM
    #[arg(long, global = true, value_parser = parse_grid_size)]
    grid: Option<GridSize>,
    #[arg(long, global = true)]
    cfl: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    tau_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write snapshots plus a manifest
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Grid convergence against the largest grid
    Converge {
        #[command(flatten)]
        common: Common,
        /// Comma-separated grid sizes, e.g. 50,100,200,400 or 50x50,100x100
        #[arg(long, value_delimiter = ',', value_parser = parse_grid_size, required = true)]
        grids: Vec<GridSize>,
        /// Scheme of the reference run, e.g. 2S4T
        #[arg(long, value_parser = parse_scheme_label)]
        reference_scheme: Option<(SpaceOrder, TimeScheme)>,
    },
    /// 1S1T, 1S4T, 2S1T and 2S4T on one grid, compared with 2S4T
    SchemeMatrix {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the closed-form spatially homogeneous solution
    Homogeneous {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        v0: f64,
        #[arg(long, allow_hyphen_values = true)]
        tau0: Option<f64>,
        /// Comma-separated output times
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        taus: Vec<f64>,
    },
    /// Compare the diagonal of a 2D run with the matching 1D run
    CompareDiagonal {
        #[command(flatten)]
        common: Common,
    },
}

/// A grid size argument, `N` or `NxM`.
#[derive(Clone, Debug)]
struct GridSize(Vec<usize>);

fn parse_grid_size(text: &str) -> Result<GridSize, String> {
    parse_grid_arg(text).map(GridSize)
}

fn parse_scheme_label(text: &str) -> Result<(SpaceOrder, TimeScheme), String> {
    match text {
        "1S1T" => Ok((SpaceOrder::First, TimeScheme::Euler)),
        "1S4T" => Ok((SpaceOrder::First, TimeScheme::Rk4)),
        "2S1T" => Ok((SpaceOrder::SecondMinmod, TimeScheme::Euler)),
        "2S4T" => Ok((SpaceOrder::SecondMinmod, TimeScheme::Rk4)),
        "1S3T" => Ok((SpaceOrder::First, TimeScheme::SspRk3)),
        "2S3T" => Ok((SpaceOrder::SecondMinmod, TimeScheme::SspRk3)),
        other => Err(format!("unknown scheme label {other:?}")),
    }
}

fn load(common: &Common) -> Result<RunConfig, ConfigError> {
    let overrides = Overrides {
        preset: common.preset.clone(),
        regime: common.regime,
        kappa: common.kappa,
        grid: common.grid.clone().map(|g| g.0),
        cfl: common.cfl,
        tau_end: common.tau_end,
    };
    match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                line: None,
                message: format!("{}: {e}", path.display()),
            })?;
            let mut config = parse_config_with(&text, &overrides).map_err(|e| ConfigError {
                line: e.line,
                message: format!("{}: {}", path.display(), e.message),
            })?;
            if let Some(dir) = path.parent() {
                config.rebase_table(dir);
            }
            Ok(config)
        }
        None => default_config(&overrides),
    }
}

fn setup_threads(threads: Option<usize>) -> Result<(), CommandError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(config_error("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error(&e.to_string()))?;
    }
    Ok(())
}

fn config_error(message: &str) -> CommandError {
    CommandError::Config(ConfigError {
        line: None,
        message: message.into(),
    })
}

fn execute(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Run { common } => {
            setup_threads(common.threads)?;
            let config = load(&common)?;
            let report = commands::cmd_run(&config, &common.out)?;
            eprintln!(
                "{} steps, {} snapshots written to {}",
                report.steps,
                report.files.len(),
                common.out.display()
            );
        }
        Command::Converge {
            common,
            grids,
            reference_scheme,
        } => {
            setup_threads(common.threads)?;
            let config = load(&common)?;
            let grids: Vec<Vec<usize>> = grids.into_iter().map(|g| g.0).collect();
            let rows = commands::cmd_converge(&config, &grids, reference_scheme, &common.out)?;
            for r in rows {
                println!(
                    "{:>10} tau={:<10} l1={:.6e} ratio={:.3}",
                    r.grid, r.tau, r.l1, r.ratio
                );
            }
        }
        Command::SchemeMatrix { common } => {
            setup_threads(common.threads)?;
            let config = load(&common)?;
            for r in commands::cmd_scheme_matrix(&config, &common.out)? {
                println!("{} tau={} l1={:.6e} {}", r.scheme, r.tau, r.l1, r.status);
            }
        }
        Command::Homogeneous {
            common,
            v0,
            tau0,
            taus,
        } => {
            let regime = common.regime.unwrap_or(Regime::Expanding);
            let kappa = common.kappa.unwrap_or(config::DEFAULT_KAPPA);
            let tau0 = tau0.unwrap_or(if regime == Regime::Contracting {
                -1.0
            } else {
                1.0
            });
            let bg = match regime {
                Regime::Expanding => Background::expanding(kappa, tau0),
                Regime::Contracting => Background::contracting(kappa, tau0),
                Regime::Flat => Background::flat(tau0),
            }
            .map_err(|e| config_error(&e.to_string()))?;
            for (tau, v) in commands::cmd_homogeneous(v0, &bg, &taus, &common.out)? {
                println!("{tau} {v}");
            }
        }
        Command::CompareDiagonal { common } => {
            setup_threads(common.threads)?;
            let mut common = common;
            if common.config.is_none() && common.preset.is_none() {
                common.preset = Some("paper2d".into());
            }
            let config = load(&common)?;
            for r in commands::cmd_compare_diagonal(&config, &common.out)? {
                println!("tau={} l1={:.6e} max={:.6e}", r.tau, r.l1, r.max_abs_diff);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
