//! Empirical α-suboptimal covers of matrix DDF problems on geometric grids.
//!
//! Each grid cell gets one guaranteed-cost controller. A cell is certified
//! when `tr P ≤ α·J⋆(σ_hi)`: the controller costs at most `tr P` anywhere in
//! the cell, and `J⋆` over the cell is smallest at the strongest corner
//! `σ_hi`, so the ratio is at most `α` everywhere in the cell. The pitch is
//! raised one step at a time until every cell is certified.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ddf::DdfProblem;
use crate::error::{Error, FailingCell, Result};
use crate::gcc::{synthesize_cell, GccSolution};
use crate::grid::{partition_grid, GridCell};

pub use crate::grid::GeometricGrid;

/// Outcome of certifying one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: GridCell,
    pub solution: Option<GccSolution>,
    pub certified: bool,
    /// Estimated worst suboptimality ratio of the cell's controller, taken
    /// over the cell corners and midpoint. Infinite without a controller.
    #[serde(with = "crate::sentinel")]
    pub cell_ratio: f64,
    pub reason: Option<String>,
}

impl CellReport {
    fn failing(&self) -> FailingCell {
        FailingCell {
            index: self.cell.index.clone(),
            sigma_lo: self.cell.sigma_lo.clone(),
            sigma_hi: self.cell.sigma_hi.clone(),
            reason: self.reason.clone().unwrap_or_else(|| "not certified".into()),
        }
    }
}

/// Estimated worst ratio of `k` over the corners and midpoint of `cell`.
pub fn cell_ratio(problem: &DdfProblem, cell: &GridCell, k: &crate::care::Matrix) -> Result<f64> {
    let mut points = cell.corners();
    points.push(cell.midpoint());
    points.dedup();
    let mut worst: f64 = 0.0;
    for sigma in points {
        let ratio = problem.cost(&sigma, k)? / problem.optimal_cost(&sigma)?;
        worst = worst.max(ratio);
        if worst.is_infinite() {
            break;
        }
    }
    Ok(worst)
}

/// Synthesizes the cell controller and applies the sufficient test
/// `tr P ≤ α·J⋆(σ_hi)`. Infeasible syntheses come back uncertified.
pub fn certify_cell(problem: &DdfProblem, cell: &GridCell, alpha: f64) -> Result<CellReport> {
    let solution = match synthesize_cell(problem, cell) {
        Ok(s) => s,
        Err(e @ (Error::GccInfeasible | Error::NoSolution(_) | Error::NumericalFailure(_))) => {
            return Ok(CellReport {
                cell: cell.clone(),
                solution: None,
                certified: false,
                cell_ratio: f64::INFINITY,
                reason: Some(e.to_string()),
            });
        }
        Err(e) => return Err(e),
    };
    let j_hi = problem.optimal_cost(&cell.sigma_hi)?;
    let certified = solution.bound <= alpha * j_hi;
    let reason =
        (!certified).then(|| format!("bound {} exceeds alpha * J*(sigma_hi) = {}", solution.bound, alpha * j_hi));
    let ratio = cell_ratio(problem, cell, &solution.k)?;
    Ok(CellReport { cell: cell.clone(), solution: Some(solution), certified, cell_ratio: ratio, reason })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverOptions {
    pub initial_pitch: usize,
    pub max_pitch: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions { initial_pitch: 1, max_pitch: 64 }
    }
}

/// One tried pitch. When the weakest corner cell fails, the rest of the grid
/// is skipped and `cells_checked` is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PitchAttempt {
    pub pitch: usize,
    pub cells_checked: usize,
    pub certified_cells: usize,
    pub certified: bool,
}

/// A certified grid cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    pub problem: Option<String>,
    pub theta: f64,
    pub alpha: f64,
    pub pitch: usize,
    pub total_controllers: usize,
    pub attempts: Vec<PitchAttempt>,
    pub cells: Vec<CellReport>,
}

fn certify_grid(problem: &DdfProblem, grid: &GeometricGrid, alpha: f64) -> Result<Vec<CellReport>> {
    (0..grid.cell_count())
        .into_par_iter()
        .map(|f| certify_cell(problem, &grid.cell(&grid.unflatten(f)), alpha))
        .collect()
}

/// Smallest pitch in `[initial_pitch, max_pitch]` whose geometric grid is
/// fully certified.
pub fn build_cover(problem: &DdfProblem, alpha: f64, options: CoverOptions) -> Result<CoverResult> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("alpha must exceed 1, got {alpha}")));
    }
    if options.initial_pitch == 0 || options.initial_pitch > options.max_pitch {
        return Err(Error::Domain("need 1 <= initial_pitch <= max_pitch".into()));
    }
    let d = problem.d();
    let mut attempts = Vec::new();
    let mut last_failures = Vec::new();
    for pitch in options.initial_pitch..=options.max_pitch {
        let grid = partition_grid(problem.theta(), d, pitch)?;
        let probe = certify_cell(problem, &grid.cell(&vec![0; d]), alpha)?;
        if !probe.certified {
            attempts.push(PitchAttempt { pitch: grid.pitch, cells_checked: 1, certified_cells: 0, certified: false });
            last_failures = vec![probe.failing()];
        } else {
            let cells = certify_grid(problem, &grid, alpha)?;
            let certified_cells = cells.iter().filter(|c| c.certified).count();
            let certified = certified_cells == cells.len();
            attempts.push(PitchAttempt { pitch: grid.pitch, cells_checked: cells.len(), certified_cells, certified });
            if certified {
                return Ok(CoverResult {
                    problem: problem.name().map(str::to_owned),
                    theta: problem.theta(),
                    alpha,
                    pitch: grid.pitch,
                    total_controllers: grid.cell_count(),
                    attempts,
                    cells,
                });
            }
            last_failures = cells.iter().filter(|c| !c.certified).map(CellReport::failing).collect();
        }
        if grid.pitch != pitch {
            // the grid is a single point and refining cannot help
            break;
        }
    }
    Err(Error::CoverNotFound { max_pitch: options.max_pitch, failing: last_failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub theta: f64,
    pub controllers: usize,
    pub pitch: usize,
    pub fit_excluded: bool,
}

/// Least-squares fit `controllers ≈ intercept + slope·ln θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringCurve {
    pub alpha: f64,
    pub rows: Vec<CurveRow>,
    pub fit: Option<LogFit>,
}

/// Fits the rows not flagged `fit_excluded`; needs two distinct breadths.
pub fn log_fit(rows: &[CurveRow]) -> Option<LogFit> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| !r.fit_excluded).map(|r| (r.theta.ln(), r.controllers as f64)).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LogFit { slope, intercept: my - slope * mx })
}

/// Runs [`build_cover`] at each breadth. Rows with `θ < fit_floor` are
/// flagged and left out of the log fit.
pub fn covering_curve(
    problem: &DdfProblem,
    alpha: f64,
    thetas: &[f64],
    options: CoverOptions,
    fit_floor: f64,
) -> Result<CoveringCurve> {
    if thetas.windows(2).any(|w| w[1] < w[0]) || thetas.iter().any(|&t| !(t >= 1.0)) {
        return Err(Error::Domain("breadths must be >= 1 and ascending".into()));
    }
    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let cover = build_cover(&problem.with_theta(theta)?, alpha, options)?;
        rows.push(CurveRow {
            theta,
            controllers: cover.total_controllers,
            pitch: cover.pitch,
            fit_excluded: theta < fit_floor,
        });
    }
    let fit = log_fit(&rows);
    Ok(CoveringCurve { alpha, rows, fit })
}

/// Writes `theta,controllers,pitch,fit_excluded` rows.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: std::io::Read>(input: R) -> Result<Vec<CurveRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Certificate versus actual worst cost on a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conservativeness {
    pub bound: f64,
    pub worst_actual: f64,
    /// `bound / worst_actual`, at least 1 when the certificate is sound.
    pub gap: f64,
}

/// Compares `tr P` with the controller's cost at the weakest corner, where
/// the worst case over the cell occurs.
pub fn gcc_conservativeness(problem: &DdfProblem, cell: &GridCell) -> Result<Conservativeness> {
    let solution = synthesize_cell(problem, cell)?;
    let worst_actual = problem.cost(&cell.sigma_lo, &solution.k)?;
    Ok(Conservativeness { bound: solution.bound, worst_actual, gap: solution.bound / worst_actual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerDiagnostic {
    pub index: Vec<usize>,
    pub sigma_lo: Vec<f64>,
    pub sigma_hi: Vec<f64>,
    pub certified: bool,
    #[serde(with = "crate::sentinel")]
    pub cell_ratio: f64,
    /// `tr P / J⋆(σ_hi)`, the quantity the certification test compares with `α`.
    #[serde(with = "crate::sentinel")]
    pub certificate_ratio: f64,
}

/// Certifies only the corner cells of the grid with the given pitch. The
/// weakest-authority corner comes first, the strongest last.
pub fn corner_diagnostics(problem: &DdfProblem, alpha: f64, pitch: usize) -> Result<Vec<CornerDiagnostic>> {
    let grid = partition_grid(problem.theta(), problem.d(), pitch)?;
    grid.corner_cells()
        .into_par_iter()
        .map(|cell| {
            let report = certify_cell(problem, &cell, alpha)?;
            let certificate_ratio = match &report.solution {
                Some(s) => s.bound / problem.optimal_cost(&cell.sigma_hi)?,
                None => f64::INFINITY,
            };
            Ok(CornerDiagnostic {
                index: cell.index,
                sigma_lo: cell.sigma_lo,
                sigma_hi: cell.sigma_hi,
                certified: report.certified,
                cell_ratio: report.cell_ratio,
                certificate_ratio,
            })
        })
        .collect()
}
