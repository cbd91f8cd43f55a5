use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ym_helix::Error;
use ym_helix_cli::config::{GluePair, PairKind, StudyKind};
use ym_helix_cli::{run, Experiment, ExperimentConfig, MeshSpec, Report, Status};

#[derive(Parser)]
#[command(name = "ym-helix", version, about = "DEC laboratory for abelian Yang-Mills fields and helicity observables")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// box2, box3, annulus, solid-torus, torus3 or a mesh JSON file.
    #[arg(long, global = true)]
    mesh: Option<String>,
    /// Cells per axis (annulus: radial layers, solid torus: cross-section cells).
    #[arg(long, global = true)]
    res: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative residual target of the linear solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent experiments.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Write the CSV projection (studies, observables) to this path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build a mesh and report its topology.
    Mesh,
    /// Solve with random boundary data or the data of a generator (dx0, x1dx0, ...).
    Solve {
        #[arg(long, default_value = "random")]
        data: String,
    },
    /// Lorentz gauge fixing of a gauge-transformed solution.
    GaugeFix {
        #[arg(long, default_value = "dirichlet")]
        flavor: String,
    },
    /// Hodge-Morrey-Friedrichs decomposition of random 1-cochains.
    Decompose {
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Harmonic Neumann and Dirichlet fields.
    Harmonic,
    /// Boundary-conditions map and moduli dimensions.
    BoundaryMap,
    /// Evaluate a helicity observable.
    Observe {
        #[arg(long)]
        generator: String,
        #[arg(long)]
        cut: String,
        /// Connection JSON; a random solution when absent.
        #[arg(long)]
        connection: Option<PathBuf>,
    },
    /// Poisson bracket of two observables on one cut.
    Bracket {
        #[arg(long)]
        gen1: String,
        #[arg(long)]
        gen2: String,
        #[arg(long)]
        cut: String,
    },
    /// Hamilton's equation for an observable against random solutions.
    Hamilton {
        #[arg(long)]
        generator: String,
        #[arg(long)]
        cut: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Separation certificate for a pair of connections.
    Separate {
        /// aharonov-bohm, gauge or random.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        connection: Option<PathBuf>,
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Glue a standard pair or two mesh files.
    Glue {
        /// squares, cubes or ring.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        first: Option<PathBuf>,
        #[arg(long)]
        second: Option<PathBuf>,
        /// Gluing map JSON; matched by coordinates when absent.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Invariant suite on --mesh, or the standard suite without it.
    Verify,
    /// Refinement study: helicity, current or conservation.
    Study {
        #[arg(long, default_value = "helicity")]
        kind: String,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        resolutions: Vec<usize>,
    },
    /// Re-run the configuration embedded in a report.
    Rerun { report: PathBuf },
}

fn parse<T: std::str::FromStr<Err = Error>>(s: Option<&str>) -> Result<Option<T>, Error> {
    s.map(str::parse).transpose()
}

fn config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let experiment = match &cli.command {
        Command::Mesh => Experiment::Mesh,
        Command::Solve { data } => Experiment::Solve { data: data.clone() },
        Command::GaugeFix { flavor } => Experiment::GaugeFix { flavor: flavor.clone() },
        Command::Decompose { samples } => Experiment::Decompose { samples: *samples },
        Command::Harmonic => Experiment::Harmonic,
        Command::BoundaryMap => Experiment::BoundaryMap,
        Command::Observe { generator, cut, connection } => {
            Experiment::Observe { generator: generator.clone(), cut: cut.clone(), connection: connection.clone() }
        }
        Command::Bracket { gen1, gen2, cut } => Experiment::Bracket { gen1: gen1.clone(), gen2: gen2.clone(), cut: cut.clone() },
        Command::Hamilton { generator, cut, trials } => {
            Experiment::Hamilton { generator: generator.clone(), cut: cut.clone(), trials: *trials }
        }
        Command::Separate { pair, connection, other } => Experiment::Separate {
            pair: parse::<PairKind>(pair.as_deref())?,
            connection: connection.clone(),
            other: other.clone(),
        },
        Command::Glue { pair, first, second, map } => Experiment::Glue {
            pair: parse::<GluePair>(pair.as_deref())?,
            first: first.clone(),
            second: second.clone(),
            map: map.clone(),
        },
        Command::Verify => Experiment::Verify,
        Command::Study { kind, resolutions } => {
            Experiment::Study { study: kind.parse::<StudyKind>()?, resolutions: resolutions.clone() }
        }
        Command::Rerun { report } => {
            let text = std::fs::read_to_string(report)
                .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", report.display())))?;
            let r: Report = serde_json::from_str(&text)?;
            return Ok(r.config);
        }
    };
    let needs_mesh = !matches!(experiment, Experiment::Verify | Experiment::Study { .. } | Experiment::Glue { .. });
    let mesh = match (&cli.common.mesh, needs_mesh) {
        (Some(name), _) => Some(MeshSpec::new(name, cli.common.res)?),
        (None, true) => Some(MeshSpec::new("box3", cli.common.res)?),
        (None, false) => None,
    };
    let mut config = ExperimentConfig::new(experiment, mesh, cli.common.seed);
    if let Some(t) = cli.common.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("--tol must lie in (0, 1), got {t}")));
        }
        config.solver.tol = t;
    }
    config.threads = cli.common.threads.max(1);
    Ok(config)
}

fn write(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::of_error(&e).exit_code() as u8);
        }
    };
    let report = run(&config, cli.common.timings);
    let emitted = serde_json::to_string_pretty(&report).map_err(Error::from).and_then(|json| match &cli.common.out {
        Some(p) => write(p, &(json + "\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    });
    let emitted = emitted.and_then(|_| match (&cli.common.csv, report.data.get("csv").and_then(|v| v.as_str())) {
        (Some(p), Some(text)) => write(p, text),
        (Some(_), None) => Err(Error::InvalidParameter("this experiment has no CSV projection".into())),
        _ => Ok(()),
    });
    if let Err(e) = emitted {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for c in report.failed_checks() {
        eprintln!("FAIL {}{}: {}", c.name, c.mesh.as_deref().map(|m| format!(" [{m}]")).unwrap_or_default(),
            c.detail.clone().unwrap_or_else(|| format!("{:?} > {:?}", c.value, c.limit)));
    }
    if let Some(f) = &report.failure {
        eprintln!("error: {}", f.message);
    }
    eprintln!("{}: {:?} ({} checks)", config.experiment.name(), report.status, report.checks.len());
    ExitCode::from(report.status.exit_code() as u8)
}
