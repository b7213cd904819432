use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] thinsieve::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use thinsieve::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(E::CapExceeded { .. } | E::Overflow(_)) => 3,
            CliError::Core(E::Internal(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "thinsieve", version, about = "Thin semigroups, continued fractions and sieve experiments")]
struct Cli {
    /// `key = value` file; explicit flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Artifact path (default `results/<subcommand>.<ext>`)
    #[arg(long, global = true)]
    output: Option<String>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Ball {
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long)]
    pub norm: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PiArgs {
    /// Norm bound for the Xi factor
    #[arg(long = "xi-norm")]
    pub xi_norm: Option<String>,
    /// Norm bound for the Omega factor
    #[arg(long = "omega-norm")]
    pub omega_norm: Option<String>,
    /// Modulus the Aleph factor is balanced for
    #[arg(long)]
    pub modulus: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Elements of the ball of radius N in the semigroup
    Enumerate {
        #[command(flatten)]
        ball: Ball,
        /// even (the default) or any
        #[arg(long)]
        parity: Option<String>,
    },
    /// Words of a given trace and their rotation classes
    TraceFiber {
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        trace: Option<String>,
    },
    /// Log-log fit of ball counts
    HensleyFit {
        #[arg(long)]
        alphabet: Option<String>,
        /// Comma-separated norm grid
        #[arg(long)]
        norms: Option<String>,
    },
    /// Dimension brackets for one or more alphabet bounds
    Dimension {
        /// Comma-separated alphabet bounds
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        depth: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Local densities modulo a square-free modulus
    Densities {
        #[arg(long)]
        modulus: Option<String>,
    },
    /// Kloosterman sums or SL2 character sums
    Expsum {
        /// kloosterman or charsum
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        modulus: Option<String>,
        #[arg(long)]
        samples: Option<String>,
    },
    /// A residue-balanced subset of the two-letter ball
    Aleph {
        #[arg(long)]
        norm: Option<String>,
        #[arg(long)]
        modulus: Option<String>,
        /// Moduli at which to report the equidistribution error
        #[arg(long)]
        check: Option<String>,
    },
    /// The bilinear set Xi . Aleph . Omega
    BuildPi {
        #[command(flatten)]
        ball: Ball,
        #[command(flatten)]
        pi: PiArgs,
    },
    /// Congruence counts against beta(q)|Pi|
    SieveRemainders {
        #[command(flatten)]
        ball: Ball,
        #[arg(long)]
        cutoff: Option<String>,
        /// ball (the default) or pi
        #[arg(long)]
        source: Option<String>,
        #[command(flatten)]
        pi: PiArgs,
    },
    /// Terms of tr^2 - 4 free of primes up to z
    AlmostPrime {
        #[command(flatten)]
        ball: Ball,
        #[arg(long)]
        z: Option<String>,
    },
    /// Elements whose tr^2 - 4 is square-free
    SquarefreeCount {
        #[command(flatten)]
        ball: Ball,
    },
    /// Square-free discriminants t^2 - 4 realized by the semigroup
    Discriminants {
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long = "t-bound")]
        t_bound: Option<String>,
        #[arg(long = "min-mult")]
        min_mult: Option<String>,
    },
    /// Form classes realized by words with bounded digits
    ClassCensus {
        #[arg(long)]
        disc: Option<String>,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// All reduced cycles of a discriminant
    ClassCycles {
        #[arg(long)]
        disc: Option<String>,
        /// One row per narrow class instead of per wide class
        #[arg(long)]
        narrow: bool,
    },
    /// Rotation heights and arcs of a closed geodesic
    Geodesic {
        #[arg(long)]
        word: Option<String>,
        /// arcs.csv or profile.json style path
        #[arg(long)]
        emit: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Enumerate { .. } => "enumerate",
            Command::TraceFiber { .. } => "trace-fiber",
            Command::HensleyFit { .. } => "hensley-fit",
            Command::Dimension { .. } => "dimension",
            Command::Densities { .. } => "densities",
            Command::Expsum { .. } => "expsum",
            Command::Aleph { .. } => "aleph",
            Command::BuildPi { .. } => "build-pi",
            Command::SieveRemainders { .. } => "sieve-remainders",
            Command::AlmostPrime { .. } => "almost-prime",
            Command::SquarefreeCount { .. } => "squarefree-count",
            Command::Discriminants { .. } => "discriminants",
            Command::ClassCensus { .. } => "class-census",
            Command::ClassCycles { .. } => "class-cycles",
            Command::Geodesic { .. } => "geodesic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// What a subcommand produced.
pub struct Artifact {
    pub ext: &'static str,
    pub body: String,
    pub summary: Vec<(String, String)>,
}

fn write_outputs(
    name: &str,
    path: &Path,
    artifact: &Artifact,
    settings: &Settings,
    started: Instant,
) -> Result<PathBuf, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, &artifact.body)?;
    let summary: serde_json::Map<String, serde_json::Value> =
        artifact.summary.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
    let manifest = serde_json::json!({
        "subcommand": name,
        "artifact": path.display().to_string(),
        "config": settings.resolved(),
        "summary": summary,
        "versions": {
            "thinsieve": thinsieve::VERSION,
            "thinsieve-cli": env!("CARGO_PKG_VERSION"),
        },
        "wallTimeSeconds": started.elapsed().as_secs_f64(),
    });
    let mut manifest_path = path.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    let manifest_path = PathBuf::from(manifest_path);
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    Ok(manifest_path)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let mut settings = Settings::load(cli.config.as_deref())?;
    let name = cli.command.name();
    let format = match settings.get::<String>("format", cli.format.as_deref(), "csv".into())?.as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(CliError::Config(format!("format must be csv or json, not {other:?}"))),
    };
    let seed = settings.get::<u64>("seed", cli.seed.as_deref(), 0)?;
    let (artifact, emit) = commands::dispatch(&cli.command, &mut settings, format, seed)?;
    let output = emit.or_else(|| settings.optional("output", cli.output.as_deref()));
    let path = PathBuf::from(output.unwrap_or_else(|| format!("results/{name}.{}", artifact.ext)));
    let manifest = write_outputs(name, &path, &artifact, &settings, started)?;
    for (k, v) in &artifact.summary {
        println!("{k}={v}");
    }
    println!("artifact={}", path.display());
    println!("manifest={}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
