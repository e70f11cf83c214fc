use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use suboptcover::cover::{
    build_cover, corner_diagnostics, covering_curve, gcc_conservativeness, write_curve_csv, CoverOptions, CoverResult,
};
use suboptcover::ddf::{DdfProblem, Preset, PresetParams};
use suboptcover::error::{Error, FailingCell};
use suboptcover::gcc::verify_cell_guarantee;
use suboptcover::grid::partition_grid;
use suboptcover::neighborhood::{alpha_sweep, compute_field, write_field_csv, write_field_json};
use suboptcover::scalar::{build_scalar_cover, lower_bound_count, ScalarCover};

use crate::settings::Settings;

/// Why a run stopped; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) | Error::ContractViolation(msg) => Failure::Usage(msg),
            Error::Io(e) => Failure::Io(e.to_string()),
            Error::Json(e) => Failure::Io(e.to_string()),
            Error::Csv(e) => Failure::Io(e.to_string()),
            other => Failure::Numerical(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    failing: Option<&'a [FailingCell]>,
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    /// Machine-readable one-line JSON report.
    pub fn report(&self) -> String {
        let report = match self {
            Failure::Usage(msg) => ErrorReport { error: "usage", message: msg.clone(), failing: None },
            Failure::Io(msg) => ErrorReport { error: "io", message: msg.clone(), failing: None },
            Failure::Numerical(e) => ErrorReport {
                error: e.kind(),
                message: e.to_string(),
                failing: match e {
                    Error::CoverNotFound { failing, .. } => Some(failing),
                    _ => None,
                },
            },
        };
        serde_json::to_string(&report).expect("error report serializes")
    }
}

type Outcome = Result<Vec<PathBuf>, Failure>;

fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, Failure> {
    value.clone().ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    let path = dir.join(name);
    Ok((path.clone(), BufWriter::new(File::create(path)?)))
}

/// Problem from `--problem` or `--preset`; `--theta` overrides the file's breadth.
pub fn load_problem(s: &Settings) -> Result<DdfProblem, Failure> {
    match (&s.problem, &s.preset) {
        (Some(_), Some(_)) => Err(Failure::Usage("give either --problem or --preset, not both".into())),
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let problem: DdfProblem =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            match s.theta {
                Some(theta) => Ok(problem.with_theta(theta)?),
                None => Ok(problem),
            }
        }
        (None, Some(name)) => {
            let preset: Preset = name.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let mut params = PresetParams { theta: s.theta.unwrap_or(1.0), ..PresetParams::default() };
            if let Some(a) = s.a {
                params.a = a;
            }
            if let Some(d) = s.d {
                params.d = d;
            }
            if let Some(g) = s.g {
                params.g = g;
            }
            if let Some(scales) = &s.scales {
                params.column_scales =
                    scales.as_slice().try_into().map_err(|_| Failure::Usage("--scales needs four values".into()))?;
            }
            Ok(preset.build(&params)?.with_name(preset.as_str()))
        }
        (None, None) => Err(Failure::Usage("--problem or --preset is required".into())),
    }
}

#[derive(Serialize)]
struct ScalarCoverReport {
    #[serde(flatten)]
    cover: ScalarCover,
    lower_bound_count: usize,
}

pub fn scalar_cover(s: &Settings, out: &Path) -> Outcome {
    let a = s.a.unwrap_or(1.0);
    let alpha = require(&s.alpha, "alpha")?;
    let theta = require(&s.theta, "theta")?;
    if alpha < (2.0 * a + 1.0) / (2.0 * a) {
        warn(&format!(
            "alpha below (2a+1)/(2a) = {}: the logarithmic cover guarantee does not apply",
            (2.0 * a + 1.0) / (2.0 * a)
        ));
    }
    if a != 1.0 || alpha < 1.5 {
        warn("the lower bound count assumes a = 1 and alpha >= 1.5; treat it as a heuristic here");
    }
    let cover = build_scalar_cover(a, alpha, theta)?;
    let lower_bound_count = lower_bound_count(a, alpha, theta)?;
    Ok(vec![write_json(out, "scalar_cover.json", &ScalarCoverReport { cover, lower_bound_count })?])
}

#[derive(Serialize)]
struct SampleCheck {
    samples: usize,
    seed: u64,
    /// Largest sampled cost over the certified bound, across all cells.
    worst_cost_over_bound: f64,
}

#[derive(Serialize)]
struct CoverReport {
    #[serde(flatten)]
    cover: CoverResult,
    sample_check: Option<SampleCheck>,
}

fn cover_options(s: &Settings) -> CoverOptions {
    CoverOptions { max_pitch: s.max_pitch.unwrap_or(CoverOptions::default().max_pitch), ..CoverOptions::default() }
}

fn hypothesis_warning(problem: &DdfProblem, alpha: f64) {
    if problem.d() == 1 && problem.a()[(0, 0)] > 0.0 {
        let a = problem.a()[(0, 0)];
        if alpha < (2.0 * a + 1.0) / (2.0 * a) {
            warn("alpha below (2a+1)/(2a): outside the scalar covering theorem");
        }
    }
}

pub fn cover(s: &Settings, out: &Path) -> Outcome {
    let problem = load_problem(s)?;
    let alpha = require(&s.alpha, "alpha")?;
    hypothesis_warning(&problem, alpha);
    let cover = build_cover(&problem, alpha, cover_options(s))?;
    let samples = s.samples.unwrap_or(0);
    let sample_check = if samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed());
        let mut worst: f64 = 0.0;
        for report in &cover.cells {
            if let Some(sol) = &report.solution {
                let v = verify_cell_guarantee(&problem, &report.cell, sol, samples, &mut rng)?;
                worst = worst.max(v.worst / sol.bound);
            }
        }
        Some(SampleCheck { samples, seed: s.seed(), worst_cost_over_bound: worst })
    } else {
        None
    };
    Ok(vec![write_json(out, "cover.json", &CoverReport { cover, sample_check })?])
}

pub fn curve(s: &Settings, out: &Path) -> Outcome {
    let problem = load_problem(s)?;
    let alpha = require(&s.alpha, "alpha")?;
    let thetas = require(&s.theta_list, "theta-list")?;
    hypothesis_warning(&problem, alpha);
    let curve = covering_curve(&problem, alpha, &thetas, cover_options(s), s.fit_floor.unwrap_or(0.0))?;
    let (csv_path, w) = create(out, "curve.csv")?;
    write_curve_csv(&curve.rows, w)?;
    Ok(vec![csv_path, write_json(out, "curve.json", &curve)?])
}

pub fn corners(s: &Settings, out: &Path) -> Outcome {
    let problem = load_problem(s)?;
    let alpha = require(&s.alpha, "alpha")?;
    let pitch = require(&s.pitch, "pitch")?;
    let corners = corner_diagnostics(&problem, alpha, pitch)?;
    Ok(vec![write_json(out, "corners.json", &corners)?])
}

#[derive(Serialize)]
struct Level {
    alpha: f64,
    components: usize,
    mask_size: usize,
}

#[derive(Serialize)]
struct ComponentReport {
    theta: f64,
    resolution: usize,
    source: Vec<f64>,
    levels: Vec<Level>,
}

pub fn neighborhoods(s: &Settings, out: &Path) -> Outcome {
    let problem = load_problem(s)?;
    let d = problem.d();
    let alphas = require(&s.alphas, "alphas")?;
    let resolution = s.resolution.unwrap_or(if d <= 2 { 100 } else { 40 });
    let source = s.source.clone().unwrap_or_else(|| vec![1.0 / problem.theta(); d]);
    let field = compute_field(&problem, std::slice::from_ref(&source), resolution)?;
    let levels = alpha_sweep(&field, 0, &alphas)?
        .into_iter()
        .map(|l| Level { alpha: l.alpha, components: l.count, mask_size: l.mask.iter().filter(|&&m| m).count() })
        .collect();
    let mut written = Vec::new();
    if d == 2 {
        let (path, w) = create(out, "field.csv")?;
        write_field_csv(&field, w)?;
        written.push(path);
    } else {
        let (path, w) = create(out, "field.json")?;
        write_field_json(&field, w)?;
        written.push(path);
    }
    let report = ComponentReport { theta: problem.theta(), resolution, source, levels };
    written.push(write_json(out, "components.json", &report)?);
    Ok(written)
}

#[derive(Serialize)]
struct GapRow {
    cell: String,
    bound: f64,
    worst_actual: f64,
    gap: f64,
}

pub fn conservativeness(s: &Settings, out: &Path) -> Outcome {
    let problem = load_problem(s)?;
    let pitch = require(&s.pitch, "pitch")?;
    let grid = partition_grid(problem.theta(), problem.d(), pitch)?;
    let (path, w) = create(out, "conservativeness.csv")?;
    let mut w = csv::Writer::from_writer(w);
    for cell in grid.cells() {
        let c = gcc_conservativeness(&problem, &cell)?;
        let name = cell.index.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".");
        w.serialize(GapRow { cell: name, bound: c.bound, worst_actual: c.worst_actual, gap: c.gap })
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(vec![path])
}
