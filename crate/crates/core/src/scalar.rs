//! Scalar LQR in closed form and the logarithmic cover bounds built on it.
//!
//! For `ẋ = ax + bu` with `a > 0`, `b > 0` and unit weights:
//!
//! * `J⋆(b) = (a + √(a² + b²)) / b²` and `k⋆(b) = −(a + √(a² + b²)) / b`;
//! * a fixed gain `k` costs `J_b(k) = (1 + k²) / (−2(a + bk))` when `a + bk < 0`;
//! * the suboptimality ratio `r(b, k) = J_b(k) / J⋆(b)` is quasiconvex in `b`
//!   with its minimum `r = 1` at `b_k = 2ak / (1 − k²)` for `k < −1`.
//!
//! [`build_scalar_cover`] covers `[1/θ, 1]` with geometrically shrinking
//! intervals, all derived from one guaranteed-cost solution by rescaling.
//! [`lower_bound_count`] gives the matching logarithmic lower bound.

use serde::{Deserialize, Serialize};

use crate::care::Matrix;
use crate::error::{Error, Result};
use crate::gcc::synthesize_gcc;
use crate::search::bisect;

const ROOT_TOL: f64 = 1e-10;
const BETA_TOL: f64 = 1e-4;
const TEST_POINTS_PER_INTERVAL: usize = 100;

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Optimal cost and gain `(J⋆, k⋆)` for `a > 0`, `b > 0`.
pub fn scalar_optimal(a: f64, b: f64) -> Result<(f64, f64)> {
    check_positive(a, "a")?;
    check_positive(b, "b")?;
    let s = a + a.hypot(b);
    Ok((s / (b * b), -s / b))
}

/// `J_b(k)`, infinite when `a + bk ≥ 0`.
pub fn scalar_cost(a: f64, b: f64, k: f64) -> f64 {
    let margin = a + b * k;
    if margin < 0.0 {
        (1.0 + k * k) / (-2.0 * margin)
    } else {
        f64::INFINITY
    }
}

/// `r(b, k) = J_b(k) / J⋆(b)`, infinite when `a + bk ≥ 0`.
pub fn suboptimality_ratio(a: f64, b: f64, k: f64) -> f64 {
    let margin = a + b * k;
    if margin < 0.0 {
        (1.0 + k * k) * b * b / (-2.0 * margin * (a + a.hypot(b)))
    } else {
        f64::INFINITY
    }
}

/// `(J_b(k), r(b, k))`. Expects `a > 0`, `b > 0`.
pub fn scalar_cost_ratio(a: f64, b: f64, k: f64) -> (f64, f64) {
    (scalar_cost(a, b, k), suboptimality_ratio(a, b, k))
}

/// The authority `b_k = 2ak / (1 − k²)` at which `k` is optimal (`k < −1`).
pub fn stationary_authority(a: f64, k: f64) -> f64 {
    2.0 * a * k / (1.0 - k * k)
}

/// `lim_{b→∞} r(b, k) = −(1 + k²) / (2k)`.
pub fn ratio_limit(k: f64) -> f64 {
    -(1.0 + k * k) / (2.0 * k)
}

/// The sublevel set `{b > 0 : r(b, k) ≤ α}`; `upper == None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublevelSet {
    pub lower: f64,
    pub upper: Option<f64>,
}

/// Sublevel set of `r(·, k)` over all `b > 0`, endpoints located by
/// bisection to `1e−10` (relative for endpoints above 1).
///
/// Bisection returns the endpoint on the inner side, so the reported
/// interval is contained in the exact one.
pub fn ratio_sublevel_set(a: f64, k: f64, alpha: f64) -> Result<SublevelSet> {
    check_positive(a, "a")?;
    if !(k < -1.0) || !k.is_finite() {
        return Err(Error::Domain(format!("gain must satisfy k < -1, got {k}")));
    }
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("alpha must exceed 1, got {alpha}")));
    }
    let center = stationary_authority(a, k);
    let tol = ROOT_TOL * center.max(1.0);
    let within = |b: f64| suboptimality_ratio(a, b, k) <= alpha;

    let pole = -a / k;
    let (lower, _) = bisect(within, center, pole, tol);

    let upper = if ratio_limit(k) <= alpha {
        None
    } else {
        let mut outside = 2.0 * center;
        while within(outside) {
            outside *= 2.0;
        }
        let (inside, _) = bisect(within, center, outside, ROOT_TOL * outside.max(1.0));
        Some(inside)
    };
    Ok(SublevelSet { lower, upper })
}

/// The α-suboptimal neighborhood of `k` within `[1/θ, 1]`, or `None` if empty.
pub fn neighborhood_interval(a: f64, theta: f64, k: f64, alpha: f64) -> Result<Option<(f64, f64)>> {
    if !(theta >= 1.0) {
        return Err(Error::Domain(format!("theta must be >= 1, got {theta}")));
    }
    let set = ratio_sublevel_set(a, k, alpha)?;
    let lo = set.lower.max(1.0 / theta);
    let hi = set.upper.map_or(1.0, |u| u.min(1.0));
    Ok((lo <= hi).then_some((lo, hi)))
}

/// Constants of the neighborhood overestimate: `c1 = 3αa`, `c2 = a√(9α² − 6α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverestimateConstants {
    pub c1: f64,
    pub c2: f64,
}

impl OverestimateConstants {
    pub fn new(a: f64, alpha: f64) -> Result<Self> {
        check_positive(a, "a")?;
        if !(alpha >= 1.5) {
            return Err(Error::Domain(format!("overestimate needs alpha >= 3/2, got {alpha}")));
        }
        Ok(OverestimateConstants { c1: 3.0 * alpha * a, c2: a * (9.0 * alpha * alpha - 6.0 * alpha).sqrt() })
    }

    /// `(c1 + c2) / (c1 − c2)`, the largest gain ratio between neighbors in a cover.
    pub fn spread(&self) -> f64 {
        (self.c1 + self.c2) / (self.c1 - self.c2)
    }
}

/// `(1/|k|)·[c1 − c2, c1 + c2]`, which contains the α-neighborhood of `k`
/// inside `(0, 1]` whenever `a ≥ 1`.
pub fn overestimate_interval(a: f64, alpha: f64, k: f64) -> Result<(f64, f64)> {
    if !(k < 0.0) {
        return Err(Error::Domain(format!("gain must be negative, got {k}")));
    }
    let c = OverestimateConstants::new(a, alpha)?;
    Ok(((c.c1 - c.c2) / -k, (c.c1 + c.c2) / -k))
}

/// Fewest gains any α-suboptimal cover of `[1/θ, 1]` can use (at least 1).
///
/// The argument behind it assumes `a = 1`; other `a > 0` are accepted but the
/// value is then only a heuristic.
pub fn lower_bound_count(a: f64, alpha: f64, theta: f64) -> Result<usize> {
    if !(theta >= 1.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be >= 1, got {theta}")));
    }
    let c = OverestimateConstants::new(a, alpha)?;
    let count = (theta.ln() / c.spread().ln()).ceil();
    Ok((count as usize).max(1))
}

/// Result of the worst-ratio sweep over a scalar cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarVerification {
    pub max_ratio: f64,
    pub argmax_b: f64,
}

/// Geometric cover of `[1/θ, 1]`: interval `n` is `[β^{n+1}, β^n]` (clipped at
/// `1/θ`) with gain `β^{−n}·k₀` and certified cost `β^{−2n}·p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCover {
    pub a: f64,
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
    /// `τ` of the base guaranteed-cost solution.
    pub tau: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub intervals: Vec<(f64, f64)>,
    pub gains: Vec<f64>,
    pub bounds: Vec<f64>,
    pub verification: ScalarVerification,
}

impl ScalarCover {
    /// Smallest ratio any gain of the cover achieves at `b`.
    pub fn best_ratio(&self, b: f64) -> f64 {
        self.gains.iter().map(|&k| suboptimality_ratio(self.a, b, k)).fold(f64::INFINITY, f64::min)
    }
}

/// `geom_points(lo, hi, n)`: `n` points from `lo` to `hi`, evenly spaced in log.
pub fn geom_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo; n.max(1)];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => lo * (ratio * i as f64).exp(),
        })
        .collect()
}

fn base_gcc(a: f64, beta: f64) -> Result<crate::gcc::GccSolution> {
    let s = |x: f64| Matrix::from_element(1, 1, x);
    synthesize_gcc(&s(a), &s((1.0 - beta) / 2.0), &s((1.0 + beta) / 2.0), &s(1.0))
}

/// Builds the geometric scalar cover.
///
/// `β` is the largest ratio (bisected to `1e−4`) for which the guaranteed
/// cost of the cell `[β, 1]` with unit state weight stays at or below `2aα`.
/// Lower intervals reuse that solution through the scaling
/// `b → βb, q → β⁻²q, p → β⁻²p`, so no large-`q` equation is ever solved.
/// The covering guarantee needs `α ≥ (2a + 1)/(2a)`; for smaller `α` the
/// construction may fail with [`Error::CoverConstruction`].
pub fn build_scalar_cover(a: f64, alpha: f64, theta: f64) -> Result<ScalarCover> {
    check_positive(a, "a")?;
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(theta >= 1.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be >= 1, got {theta}")));
    }
    let target = 2.0 * a * alpha;
    let feasible = |beta: f64| base_gcc(a, beta).is_ok_and(|s| s.bound <= target);
    if !feasible(1.0) {
        return Err(Error::CoverConstruction(format!(
            "alpha = {alpha} is too close to 1: even a single task exceeds 2a*alpha"
        )));
    }
    let (beta, _) = bisect(feasible, 1.0, 0.0, BETA_TOL);
    if beta >= 1.0 {
        return Err(Error::CoverConstruction("no feasible beta below 1".into()));
    }
    let base = base_gcc(a, beta)?;
    let (k0, p0) = (base.k[(0, 0)], base.bound);

    let n = ((-theta.ln() / beta.ln()).ceil() as usize).max(1);
    let floor = 1.0 / theta;
    let mut intervals = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    let mut verification = ScalarVerification { max_ratio: 0.0, argmax_b: 1.0 };
    for level in 0..n {
        let hi = beta.powi(level as i32);
        let lo = (hi * beta).max(floor);
        let gain = k0 / hi;
        for b in geom_points(lo, hi, TEST_POINTS_PER_INTERVAL) {
            let r = suboptimality_ratio(a, b, gain);
            if !(r <= verification.max_ratio) {
                verification = ScalarVerification { max_ratio: r, argmax_b: b };
            }
        }
        intervals.push((lo, hi));
        gains.push(gain);
        bounds.push(p0 / (hi * hi));
    }
    if !(verification.max_ratio <= alpha + 1e-9) {
        return Err(Error::CoverConstruction(format!(
            "verification found ratio {} at b = {}",
            verification.max_ratio, verification.argmax_b
        )));
    }
    Ok(ScalarCover { a, alpha, theta, beta, tau: base.tau, n, intervals, gains, bounds, verification })
}
