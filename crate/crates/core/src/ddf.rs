//! Multi-task LQR families in decomposed dynamics form.
//!
//! A problem fixes `A`, `U`, `V` and a breadth `θ ≥ 1`; its tasks are the
//! input matrices `B = U·diag(σ)·Vᵀ` with `σ ∈ [1/θ, 1]^d`. Costs use
//! `Q = I`, `R = I` throughout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::care::{self, CareSolution, Matrix};
use crate::error::{Error, Result};
use crate::serde_matrix::{from_rows, to_rows};

const RANK_TOL: f64 = 1e-10;
const BOUNDS_TOL: f64 = 1e-12;

/// A DDF problem `(A, U, V, θ)`. Construction validates every invariant,
/// including LQR feasibility at the weakest task `σ = (1/θ)·1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ProblemDocument", try_from = "ProblemDocument")]
pub struct DdfProblem {
    name: Option<String>,
    a: Matrix,
    u: Matrix,
    v: Matrix,
    theta: f64,
}

/// JSON shape of a problem: row-major nested arrays plus the breadth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    pub theta: f64,
}

impl From<DdfProblem> for ProblemDocument {
    fn from(p: DdfProblem) -> Self {
        ProblemDocument { name: p.name, a: to_rows(&p.a), u: to_rows(&p.u), v: to_rows(&p.v), theta: p.theta }
    }
}

impl TryFrom<ProblemDocument> for DdfProblem {
    type Error = Error;

    fn try_from(doc: ProblemDocument) -> Result<Self> {
        let parse = |rows: &[Vec<f64>], what: &str| {
            from_rows(rows).map_err(|e| Error::ContractViolation(format!("{what}: {e}")))
        };
        let problem = DdfProblem::new(parse(&doc.a, "A")?, parse(&doc.u, "U")?, parse(&doc.v, "V")?, doc.theta)?;
        Ok(match doc.name {
            Some(name) => problem.with_name(name),
            None => problem,
        })
    }
}

fn numerical_rank(m: &Matrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

impl DdfProblem {
    pub fn new(a: Matrix, u: Matrix, v: Matrix, theta: f64) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || n == 0 {
            return Err(Error::ContractViolation("A must be a non-empty square matrix".into()));
        }
        if u.nrows() != n {
            return Err(Error::ContractViolation(format!("U must have {n} rows")));
        }
        let d = u.ncols();
        let m = v.nrows();
        if v.ncols() != d {
            return Err(Error::ContractViolation(format!("V must have {d} columns")));
        }
        if d == 0 || d > n.min(m) {
            return Err(Error::ContractViolation(format!("need 0 < d <= min(n, m), got d={d}, n={n}, m={m}")));
        }
        for (mat, name) in [(&a, "A"), (&u, "U"), (&v, "V")] {
            care::ensure_finite(mat, name)?;
        }
        if numerical_rank(&u) != d || numerical_rank(&v) != d {
            return Err(Error::ContractViolation("U and V must both have rank d".into()));
        }
        if !(theta.is_finite() && theta >= 1.0) {
            return Err(Error::Domain(format!("breadth theta must be >= 1, got {theta}")));
        }
        let problem = DdfProblem { name: None, a, u, v, theta };
        problem.lqr_at(&vec![1.0 / theta; d])?;
        Ok(problem)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Same family at a different breadth (revalidated).
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let p = DdfProblem::new(self.a.clone(), self.u.clone(), self.v.clone(), theta)?;
        Ok(DdfProblem { name: self.name.clone(), ..p })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn u(&self) -> &Matrix {
        &self.u
    }
    pub fn v(&self) -> &Matrix {
        &self.v
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension.
    pub fn m(&self) -> usize {
        self.v.nrows()
    }
    /// Number of authority parameters.
    pub fn d(&self) -> usize {
        self.u.ncols()
    }

    /// Whether `sigma` lies in `[1/θ, 1]^d`.
    pub fn contains(&self, sigma: &[f64]) -> bool {
        let lo = 1.0 / self.theta;
        sigma.len() == self.d() && sigma.iter().all(|&s| s >= lo * (1.0 - BOUNDS_TOL) && s <= 1.0 + BOUNDS_TOL)
    }

    fn check_sigma(&self, sigma: &[f64]) -> Result<()> {
        if self.contains(sigma) {
            Ok(())
        } else {
            Err(Error::Domain(format!("sigma {sigma:?} outside [1/{}, 1]^{}", self.theta, self.d())))
        }
    }

    /// `U·diag(σ)·Vᵀ` without bounds checks.
    pub fn assemble_b_unchecked(&self, sigma: &[f64]) -> Matrix {
        let mut us = self.u.clone();
        for (j, &s) in sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.transpose()
    }

    /// The task's input matrix `U·diag(σ)·Vᵀ`.
    pub fn assemble_b(&self, sigma: &[f64]) -> Result<Matrix> {
        self.check_sigma(sigma)?;
        Ok(self.assemble_b_unchecked(sigma))
    }

    /// LQR-optimal controller for the task `σ`.
    pub fn lqr_at(&self, sigma: &[f64]) -> Result<CareSolution> {
        self.check_sigma(sigma)?;
        care::lqr_synthesize(&self.a, &self.assemble_b_unchecked(sigma))
    }

    /// `J⋆` at `σ`.
    pub fn optimal_cost(&self, sigma: &[f64]) -> Result<f64> {
        Ok(self.lqr_at(sigma)?.cost)
    }

    /// Cost of a fixed gain on task `σ` (infinite if destabilizing).
    pub fn cost(&self, sigma: &[f64], k: &Matrix) -> Result<f64> {
        let b = self.assemble_b(sigma)?;
        Ok(care::eval_cost(&self.a, &b, k))
    }
}

/// Linearized hover dynamics of a quadrotor with state
/// `(position, velocity, attitude, angular velocity)` and four rotor inputs.
/// `column_scales` scales the columns of `U` (thrust, roll, pitch, yaw).
pub fn make_quadrotor(g: f64, column_scales: [f64; 4], theta: f64) -> Result<DdfProblem> {
    if !(g > 0.0) || column_scales.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Domain("gravity and column scales must be positive".into()));
    }
    let mut a = Matrix::zeros(12, 12);
    for i in 0..3 {
        a[(i, 3 + i)] = 1.0;
        a[(6 + i, 9 + i)] = 1.0;
    }
    a[(3, 7)] = g;
    a[(4, 6)] = -g;

    let mut u = Matrix::zeros(12, 4);
    u[(5, 0)] = column_scales[0];
    for i in 0..3 {
        u[(9 + i, 1 + i)] = column_scales[1 + i];
    }

    #[rustfmt::skip]
    let mixer_t = Matrix::from_row_slice(4, 4, &[
         1.0,  1.0,  1.0,  1.0,
         1.0, -1.0, -1.0,  1.0,
        -1.0, -1.0,  1.0,  1.0,
         1.0, -1.0,  1.0, -1.0,
    ]);
    Ok(DdfProblem::new(a, u, mixer_t.transpose(), theta)?.with_name("quadrotor"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `A = I`.
    Min,
    /// `A = (1/n)·𝟙`.
    Max,
}

/// `n = m = d`, `U = V = I`, with `A = I` or `A = (1/n)·𝟙`.
pub fn make_coupling(d: usize, kind: Coupling, theta: f64) -> Result<DdfProblem> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let a = match kind {
        Coupling::Min => Matrix::identity(d, d),
        Coupling::Max => Matrix::from_element(d, d, 1.0 / d as f64),
    };
    let eye = Matrix::identity(d, d);
    let name = match kind {
        Coupling::Min => "min_coupling",
        Coupling::Max => "max_coupling",
    };
    Ok(DdfProblem::new(a, eye.clone(), eye, theta)?.with_name(name))
}

/// Scalar family `ẋ = ax + bu`, `b ∈ [1/θ, 1]`, for `a > 0`.
pub fn make_scalar(a: f64, theta: f64) -> Result<DdfProblem> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("scalar dynamics need a > 0, got {a}")));
    }
    let one = Matrix::identity(1, 1);
    Ok(DdfProblem::new(Matrix::from_element(1, 1, a), one.clone(), one, theta)?.with_name("scalar"))
}

/// Named problem presets shipped with the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Scalar,
    MinCoupling,
    MaxCoupling,
    Quadrotor,
}

/// Column scale of the quadrotor preset. With it the `θ = 10` grid cover
/// certifies at pitch 4, and the corner-cell certificate ratios at `α = 2`
/// run from about 1.87 (weakest corner) down to about 1.42 (strongest).
pub const QUADROTOR_PRESET_SCALE: f64 = 3.0;

/// Knobs a preset may consume; unused ones are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    pub theta: f64,
    /// Dimension for the coupling presets.
    pub d: usize,
    /// Drift for the scalar preset.
    pub a: f64,
    /// Gravity for the quadrotor.
    pub g: f64,
    pub column_scales: [f64; 4],
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams { theta: 1.0, d: 2, a: 1.0, g: 9.81, column_scales: [QUADROTOR_PRESET_SCALE; 4] }
    }
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Scalar, Preset::MinCoupling, Preset::MaxCoupling, Preset::Quadrotor];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Scalar => "scalar",
            Preset::MinCoupling => "min_coupling",
            Preset::MaxCoupling => "max_coupling",
            Preset::Quadrotor => "quadrotor",
        }
    }

    pub fn build(self, params: &PresetParams) -> Result<DdfProblem> {
        match self {
            Preset::Scalar => make_scalar(params.a, params.theta),
            Preset::MinCoupling => make_coupling(params.d, Coupling::Min, params.theta),
            Preset::MaxCoupling => make_coupling(params.d, Coupling::Max, params.theta),
            Preset::Quadrotor => make_quadrotor(params.g, params.column_scales, params.theta),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::Domain(format!("unknown preset {s:?}")))
    }
}
