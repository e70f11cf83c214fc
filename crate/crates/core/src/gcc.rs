//! Guaranteed cost control for norm-bounded input uncertainty.
//!
//! For the uncertainty set `{B₁Δ + B₂ : ‖Δ‖ ≤ 1}`, any `τ > 0` for which
//!
//! ```text
//! AᵀP + PA + P((1/τ)B₁B₁ᵀ − (1/(1+τ))B₂B₂ᵀ)P + Q = 0
//! ```
//!
//! has a solution `P ≻ 0` yields the gain `K = −(1/(1+τ))B₂ᵀP`, whose cost on
//! every member of the set is at most `tr P`. [`synthesize_gcc`] minimizes
//! that bound over `τ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::care::{self, Matrix};
use crate::ddf::DdfProblem;
use crate::error::{Error, Result};
use crate::grid::GridCell;
use crate::search::golden_section;

/// First `τ` probed by the line search.
pub const TAU_START: f64 = 0.1;
/// Search limits for `τ`.
pub const TAU_MIN: f64 = 1e-12;
pub const TAU_MAX: f64 = 1e12;
/// Golden-section stopping width, relative in `τ`.
pub const TAU_REL_TOL: f64 = 1e-4;

/// A guaranteed-cost controller and its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GccSolution {
    #[serde(with = "crate::serde_matrix")]
    pub p: Matrix,
    pub tau: f64,
    #[serde(with = "crate::serde_matrix")]
    pub k: Matrix,
    /// `tr P`, the certified cost bound.
    pub bound: f64,
}

/// Ball encoding `{b1·Δ + b2 : ‖Δ‖ ≤ 1}` of a grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEncoding {
    pub b1: Matrix,
    pub b2: Matrix,
}

/// Encodes a cell as a norm ball around its midpoint task.
///
/// `b2 = U·diag(σ_mid)·Vᵀ` and `b1 = ‖V‖₂·U·diag(σ_rad)`. Every task in the
/// cell lies in the ball because `U·diag(δ⊙σ_rad)·Vᵀ = b1·(diag(δ)Vᵀ/‖V‖₂)`
/// with `|δᵢ| ≤ 1`. The ball also contains non-diagonal perturbations, so
/// the encoding is conservative.
pub fn encode_cell(problem: &DdfProblem, cell: &GridCell) -> Result<CellEncoding> {
    if cell.d() != problem.d() {
        return Err(Error::ContractViolation(format!("cell has dimension {}, problem has {}", cell.d(), problem.d())));
    }
    if !problem.contains(&cell.sigma_lo) || !problem.contains(&cell.sigma_hi) {
        return Err(Error::Domain("cell lies outside the problem's authority box".into()));
    }
    let b2 = problem.assemble_b_unchecked(&cell.midpoint());
    let v_norm = problem.v().clone().singular_values().max();
    let mut b1 = problem.u().clone();
    for (j, r) in cell.radius().into_iter().enumerate() {
        b1.column_mut(j).scale_mut(v_norm * r);
    }
    Ok(CellEncoding { b1, b2 })
}

fn check_gcc_inputs(a: &Matrix, b1: &Matrix, b2: &Matrix, q: &Matrix) -> Result<()> {
    let n = a.nrows();
    if !a.is_square() || b1.nrows() != n || b2.nrows() != n || q.shape() != (n, n) {
        return Err(Error::ContractViolation("GCC inputs have inconsistent shapes".into()));
    }
    for (m, name) in [(a, "A"), (b1, "B1"), (b2, "B2"), (q, "Q")] {
        care::ensure_finite(m, name)?;
    }
    if !care::is_symmetric(q) || q.clone().symmetric_eigenvalues().min() <= 0.0 {
        return Err(Error::ContractViolation("Q must be symmetric positive definite".into()));
    }
    Ok(())
}

fn gcc_quadratic_term(b1: &Matrix, b2: &Matrix, tau: f64) -> Matrix {
    let d = b2 * b2.transpose() / (1.0 + tau) - b1 * b1.transpose() / tau;
    care::symmetrize(&d)
}

fn gcc_riccati_unchecked(a: &Matrix, b1: &Matrix, b2: &Matrix, q: &Matrix, tau: f64) -> Result<Matrix> {
    let p = care::solve_care_maximal(a, &gcc_quadratic_term(b1, b2, tau), q)?;
    let min_eig = p.clone().symmetric_eigenvalues().min();
    if min_eig <= 0.0 {
        return Err(Error::NoSolution(format!("GCC solution is not positive definite ({min_eig:e})")));
    }
    Ok(p)
}

/// Maximal solution `P ≻ 0` of the GCC Riccati equation at a fixed `τ`.
pub fn solve_gcc_riccati(a: &Matrix, b1: &Matrix, b2: &Matrix, q: &Matrix, tau: f64) -> Result<Matrix> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    check_gcc_inputs(a, b1, b2, q)?;
    gcc_riccati_unchecked(a, b1, b2, q, tau)
}

/// `tr P(τ)` for each `τ`, with `+∞` where the equation is infeasible.
pub fn gcc_trace_profile(a: &Matrix, b1: &Matrix, b2: &Matrix, q: &Matrix, taus: &[f64]) -> Result<Vec<f64>> {
    check_gcc_inputs(a, b1, b2, q)?;
    Ok(taus.iter().map(|&t| gcc_riccati_unchecked(a, b1, b2, q, t).map_or(f64::INFINITY, |p| p.trace())).collect())
}

fn gcc_gain(b2: &Matrix, p: &Matrix, tau: f64) -> Matrix {
    -(b2.transpose() * p) / (1.0 + tau)
}

/// Minimizes `tr P` over `τ > 0`.
///
/// Probes `τ` by halving and doubling from [`TAU_START`] until a feasible
/// value appears, walks downhill in `log τ` to bracket the minimum, then
/// runs golden-section search to a relative width of [`TAU_REL_TOL`].
/// Infeasible `τ` count as `+∞`.
pub fn synthesize_gcc(a: &Matrix, b1: &Matrix, b2: &Matrix, q: &Matrix) -> Result<GccSolution> {
    check_gcc_inputs(a, b1, b2, q)?;
    let (x_min, x_max) = (TAU_MIN.ln(), TAU_MAX.ln());
    let mut best = (f64::NAN, f64::INFINITY);
    let mut f = |x: f64| {
        let value = gcc_riccati_unchecked(a, b1, b2, q, x.exp()).map_or(f64::INFINITY, |p| p.trace());
        if value < best.1 {
            best = (x, value);
        }
        value
    };

    let step = std::f64::consts::LN_2;
    let x0 = TAU_START.ln();
    let mut center = None;
    for j in 0.. {
        let down = x0 - step * j as f64;
        let up = x0 + step * j as f64;
        if down < x_min && up > x_max {
            break;
        }
        if down >= x_min {
            let v = f(down);
            if v.is_finite() {
                center = Some((down, v));
                break;
            }
        }
        if j > 0 && up <= x_max {
            let v = f(up);
            if v.is_finite() {
                center = Some((up, v));
                break;
            }
        }
    }
    let (mut x, mut fx) = center.ok_or(Error::GccInfeasible)?;

    // walk downhill; the minimum then sits within one step of x
    let left = (x - step).max(x_min);
    let right = (x + step).min(x_max);
    let direction = if f(left) < fx {
        -1.0
    } else if f(right) < fx {
        1.0
    } else {
        0.0
    };
    if direction != 0.0 {
        loop {
            let next = (x + direction * step).clamp(x_min, x_max);
            if next == x {
                break;
            }
            let v = f(next);
            if v < fx {
                x = next;
                fx = v;
            } else {
                break;
            }
        }
    }
    let lo = (x - step).max(x_min);
    let hi = (x + step).min(x_max);
    golden_section(&mut f, lo, hi, (1.0 + TAU_REL_TOL).ln());

    let (x_best, _) = best;
    let tau = x_best.exp();
    let p = gcc_riccati_unchecked(a, b1, b2, q, tau)?;
    let k = gcc_gain(b2, &p, tau);
    let bound = p.trace();
    Ok(GccSolution { p, tau, k, bound })
}

/// Synthesizes the GCC controller for a grid cell (`Q = I`).
pub fn synthesize_cell(problem: &DdfProblem, cell: &GridCell) -> Result<GccSolution> {
    let enc = encode_cell(problem, cell)?;
    let n = problem.n();
    synthesize_gcc(problem.a(), &enc.b1, &enc.b2, &Matrix::identity(n, n))
}

/// Worst cost observed while checking a cell certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellVerification {
    pub worst: f64,
    pub argmax_sigma: Vec<f64>,
}

/// Checks `J_σ(K) ≤ tr P` at the weakest corner `σ_lo` and at `samples`
/// uniformly drawn tasks in the cell.
pub fn verify_cell_guarantee<R: Rng + ?Sized>(
    problem: &DdfProblem,
    cell: &GridCell,
    solution: &GccSolution,
    samples: usize,
    rng: &mut R,
) -> Result<CellVerification> {
    let mut worst = CellVerification { worst: f64::NEG_INFINITY, argmax_sigma: Vec::new() };
    let draws = (0..samples).map(|_| {
        cell.sigma_lo
            .iter()
            .zip(&cell.sigma_hi)
            .map(|(&l, &h)| if h > l { rng.gen_range(l..=h) } else { l })
            .collect::<Vec<f64>>()
    });
    for sigma in std::iter::once(cell.sigma_lo.clone()).chain(draws.collect::<Vec<_>>()) {
        let cost = problem.cost(&sigma, &solution.k)?;
        if !(cost <= worst.worst) {
            worst = CellVerification { worst: cost, argmax_sigma: sigma };
        }
    }
    if !(worst.worst <= solution.bound * (1.0 + 1e-6)) {
        return Err(Error::CertificationFailure {
            bound: solution.bound,
            worst: worst.worst,
            sigma: worst.argmax_sigma,
        });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddf::{make_coupling, make_scalar, Coupling};

    fn s(x: f64) -> Matrix {
        Matrix::from_element(1, 1, x)
    }

    #[test]
    fn encode_scalar_cell() {
        let p = make_scalar(1.0, 10.0).unwrap();
        let beta = 0.4;
        let enc = encode_cell(&p, &GridCell::new(vec![beta], vec![1.0]).unwrap()).unwrap();
        assert!((enc.b1[(0, 0)] - (1.0 - beta) / 2.0).abs() < 1e-15);
        assert!((enc.b2[(0, 0)] - (1.0 + beta) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn encode_degenerate_cell() {
        let p = make_coupling(2, Coupling::Max, 10.0).unwrap();
        let sigma = vec![0.3, 0.7];
        let enc = encode_cell(&p, &GridCell::point(sigma.clone()).unwrap()).unwrap();
        assert_eq!(enc.b1.amax(), 0.0);
        assert_eq!(enc.b2, p.assemble_b(&sigma).unwrap());
    }

    #[test]
    fn encode_min_coupling_cell() {
        let p = make_coupling(2, Coupling::Min, 10.0).unwrap();
        let enc = encode_cell(&p, &GridCell::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap()).unwrap();
        assert!((&enc.b2 - Matrix::identity(2, 2) * 0.75).amax() < 1e-15);
        assert!((&enc.b1 - Matrix::identity(2, 2) * 0.25).amax() < 1e-15);
    }

    #[test]
    fn encode_rejects_outside_cell() {
        let p = make_scalar(1.0, 10.0).unwrap();
        let cell = GridCell::new(vec![0.05], vec![1.0]).unwrap();
        assert!(matches!(encode_cell(&p, &cell), Err(Error::Domain(_))));
    }

    #[test]
    fn scalar_gcc_riccati_matches_quadratic() {
        // (1/τ·b1² − 1/(1+τ)·b2²)p² + 2ap + q = 0 with a=−1, b1=0.5, b2=1, τ=1:
        // −p²/4 − 2p + 1 = 0, positive root p = 2(√5 − 2).
        let p = solve_gcc_riccati(&s(-1.0), &s(0.5), &s(1.0), &s(1.0), 1.0).unwrap();
        let expected = 2.0 * (5f64.sqrt() - 2.0);
        assert!((p[(0, 0)] - expected).abs() < 1e-12);
        let k = gcc_gain(&s(1.0), &p, 1.0);
        assert!((k[(0, 0)] + expected / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gcc_riccati_uncertainty_free_limit() {
        let p = solve_gcc_riccati(&s(1.0), &s(0.0), &s(0.8), &s(1.0), 1e-8).unwrap();
        let j = (1.0 + (1.0f64 + 0.64).sqrt()) / 0.64;
        assert!((p[(0, 0)] - j).abs() < 1e-6 * j);
    }

    #[test]
    fn gcc_riccati_infeasible_example() {
        let a = Matrix::identity(2, 2) * 2.0;
        let q = Matrix::identity(2, 2);
        for tau in [0.01, 0.5, 1.0, 10.0] {
            let err = solve_gcc_riccati(&a, &Matrix::identity(2, 2), &Matrix::zeros(2, 2), &q, tau).unwrap_err();
            assert!(matches!(err, Error::NoSolution(_)), "{err}");
        }
        assert!(matches!(
            synthesize_gcc(&a, &Matrix::identity(2, 2), &Matrix::zeros(2, 2), &q),
            Err(Error::GccInfeasible)
        ));
    }

    #[test]
    fn gcc_riccati_rejects_bad_tau() {
        assert!(matches!(solve_gcc_riccati(&s(1.0), &s(0.1), &s(1.0), &s(1.0), 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn synthesis_without_uncertainty_approaches_lqr() {
        let sol = synthesize_gcc(&s(1.0), &s(0.0), &s(0.7), &s(1.0)).unwrap();
        let j = (1.0 + (1.0f64 + 0.49).sqrt()) / 0.49;
        assert!(sol.bound >= j * (1.0 - 1e-9) && sol.bound <= 1.01 * j, "{} vs {j}", sol.bound);
    }

    #[test]
    fn gain_formula_holds() {
        let sol = synthesize_gcc(&s(1.0), &s(0.05), &s(0.95), &s(1.0)).unwrap();
        let k = -(0.95 * sol.p[(0, 0)]) / (1.0 + sol.tau);
        assert!((sol.k[(0, 0)] - k).abs() < 1e-14);
        let residual = 2.0 * sol.p[(0, 0)]
            + sol.p[(0, 0)].powi(2) * (0.05f64.powi(2) / sol.tau - 0.95f64.powi(2) / (1.0 + sol.tau))
            + 1.0;
        assert!(residual.abs() < 1e-8);
    }
}
