mod run;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use run::Failure;
use settings::Settings;

/// Builds and inspects α-suboptimal controller covers.
#[derive(Parser)]
#[command(name = "suboptcover", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geometric cover of a scalar problem with its lower bound
    ScalarCover(Settings),
    /// Smallest certified geometric grid cover
    Cover(Settings),
    /// Controller counts over a list of breadths, with a log fit
    Curve(Settings),
    /// Ratios of the corner cells of a grid
    Corners(Settings),
    /// Suboptimality field of one controller and its component counts
    Neighborhoods(Settings),
    /// Certified bound versus actual worst cost, per cell
    Conservativeness(Settings),
}

impl Command {
    fn split(self) -> (&'static str, Settings) {
        match self {
            Command::ScalarCover(s) => ("scalar-cover", s),
            Command::Cover(s) => ("cover", s),
            Command::Curve(s) => ("curve", s),
            Command::Corners(s) => ("corners", s),
            Command::Neighborhoods(s) => ("neighborhoods", s),
            Command::Conservativeness(s) => ("conservativeness", s),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    inputs: &'a Settings,
    seed: u64,
    version: &'a str,
    jobs: usize,
    outputs: Vec<String>,
    wall_time_s: f64,
}

fn jobs(s: &Settings) -> Result<Option<usize>, Failure> {
    if let Some(j) = s.jobs {
        return Ok(Some(j));
    }
    match std::env::var("SUBOPTCOVER_JOBS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("SUBOPTCOVER_JOBS must be a count, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn execute(command: &str, settings: Settings) -> Result<PathBuf, Failure> {
    let start = Instant::now();
    let settings = settings.resolve().map_err(Failure::Usage)?;
    if let Some(j) = jobs(&settings)? {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().map_err(|e| Failure::Io(e.to_string()))?;
    }
    let out = settings.out_dir();
    std::fs::create_dir_all(&out)?;
    let written = match command {
        "scalar-cover" => run::scalar_cover(&settings, &out),
        "cover" => run::cover(&settings, &out),
        "curve" => run::curve(&settings, &out),
        "corners" => run::corners(&settings, &out),
        "neighborhoods" => run::neighborhoods(&settings, &out),
        _ => run::conservativeness(&settings, &out),
    }?;
    let manifest = Manifest {
        command,
        inputs: &settings,
        seed: settings.seed(),
        version: env!("CARGO_PKG_VERSION"),
        jobs: rayon::current_num_threads(),
        outputs: written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Io(e.to_string()))?;
    std::fs::write(&path, text + "\n")?;
    Ok(out)
}

fn main() -> ExitCode {
    let (command, settings) = Cli::parse().command.split();
    match execute(command, settings) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", failure.report());
            ExitCode::from(failure.exit_code())
        }
    }
}
