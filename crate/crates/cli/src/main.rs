mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, CONFIG_ENV};

#[derive(Parser, Debug)]
#[command(name = "parabolic-lab", version, about = "Parabolic germs, Fatou coordinates and horn-map invariants of z^d + c")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate parabolic parameters up to a component period.
    Atlas {
        #[command(flatten)]
        flags: Flags,
    },
    /// Conjugacy invariants of one germ.
    Invariants {
        #[command(flatten)]
        flags: Flags,
        /// Take the parameter from this atlas file.
        #[arg(long)]
        atlas: Option<PathBuf>,
        /// Atlas entry used with --atlas.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Compare two germs: each is `re,im` (with --d), a model name, or an
    /// invariants JSON file.
    Compare {
        #[command(flatten)]
        flags: Flags,
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
    },
    /// Pairwise comparison of every class member of an atlas.
    Rigidity {
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        atlas: PathBuf,
    },
    /// Escape-time and petal raster of the dynamical plane.
    Render {
        #[command(flatten)]
        flags: Flags,
    },
}

/// Flags shared by every subcommand; each overrides the config file entry
/// of the same name.
#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    d: Option<String>,
    /// Parameter as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long = "max-period")]
    max_period: Option<String>,
    /// moebius, quad or blaschke.
    #[arg(long)]
    model: Option<String>,
    /// Height of the horn-map sampling lines.
    #[arg(long = "M")]
    height: Option<String>,
    /// Samples per horn-map line.
    #[arg(long = "K")]
    samples: Option<String>,
    #[arg(long = "tol-atlas")]
    tol_atlas: Option<String>,
    #[arg(long = "tol-fatou")]
    tol_fatou: Option<String>,
    #[arg(long = "tol-compare")]
    tol_compare: Option<String>,
    #[arg(long = "tol-param")]
    tol_param: Option<String>,
    #[arg(long)]
    sep: Option<String>,
    #[arg(long = "grid-density")]
    grid_density: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Key = value file; defaults to $PARABOLIC_LAB_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `x0,y0,x1,y1`
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    res: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
}

impl Flags {
    fn settings(&self) -> Vec<(&'static str, &String)> {
        let pairs: [(&'static str, &Option<String>); 17] = [
            ("d", &self.d),
            ("c", &self.c),
            ("max-period", &self.max_period),
            ("model", &self.model),
            ("M", &self.height),
            ("K", &self.samples),
            ("tol-atlas", &self.tol_atlas),
            ("tol-fatou", &self.tol_fatou),
            ("tol-compare", &self.tol_compare),
            ("tol-param", &self.tol_param),
            ("sep", &self.sep),
            ("grid-density", &self.grid_density),
            ("max-iter", &self.max_iter),
            ("out", &self.out),
            ("window", &self.window),
            ("res", &self.res),
            ("jobs", &self.jobs),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }

    fn resolve(&self) -> Result<RunConfig, String> {
        let mut config = RunConfig::default();
        let file = self.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        if let Some(path) = file {
            config.apply_file(&path)?;
        }
        for (key, value) in self.settings() {
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Usage errors exit with 2, computational failures with 1.
pub enum Failure {
    Usage(String),
    Compute(String),
}

impl From<parabolic_core::LabError> for Failure {
    fn from(err: parabolic_core::LabError) -> Self {
        match err {
            parabolic_core::LabError::InvalidInput(msg) => Failure::Usage(msg),
            other => Failure::Compute(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let flags = match &cli.command {
        Command::Atlas { flags }
        | Command::Invariants { flags, .. }
        | Command::Compare { flags, .. }
        | Command::Rigidity { flags, .. }
        | Command::Render { flags } => flags,
    };
    let config = flags.resolve().map_err(Failure::Usage)?;
    if let Some(jobs) = config.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Compute(e.to_string()))?;
    }
    match &cli.command {
        Command::Atlas { .. } => commands::atlas(&config),
        Command::Invariants { atlas, index, .. } => commands::invariants(&config, atlas.as_deref(), *index),
        Command::Compare { first, second, .. } => commands::compare(&config, first, second),
        Command::Rigidity { atlas, .. } => commands::rigidity(&config, atlas),
        Command::Render { .. } => commands::render(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
