//! Dense continuous-time Riccati, Lyapunov and LQR kernels.
//!
//! Every routine here works on small dense matrices (n at most a few dozen)
//! and is a pure function of its inputs. The Riccati solver extracts the
//! stable invariant subspace of the Hamiltonian matrix from an ordered
//! complex Schur form, then polishes the result with Newton-Kleinman steps.
//! The quadratic term `D` may be sign-indefinite, which is what the
//! guaranteed-cost equation needs.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix. Square matrices, gains and input matrices all use it.
pub type Matrix = DMatrix<f64>;

/// Hamiltonian eigenvalues with `|Re λ|` below this are treated as lying on
/// the imaginary axis, which means the equation has no stabilizing solution.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;
const SCHUR_MAX_ITER: usize = 10_000;
const NEWTON_STEPS: usize = 4;

/// Optimal LQR data: maximal Riccati solution, optimal gain and its cost `tr P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CareSolution {
    #[serde(with = "crate::serde_matrix")]
    pub p: Matrix,
    #[serde(with = "crate::serde_matrix")]
    pub k: Matrix,
    pub cost: f64,
}

pub(crate) fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::ContractViolation(format!("{what} has non-finite entries")))
    }
}

fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::ContractViolation(format!("{what} must be square, got {}x{}", m.nrows(), m.ncols())))
    }
}

/// True when `‖M − Mᵀ‖_max ≤ 1e−10·(1 + ‖M‖_max)`.
pub fn is_symmetric(m: &Matrix) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= SYMMETRY_TOL * (1.0 + m.amax())
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Largest real part over the eigenvalues of `m`.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    if m.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let eigs = eigenvalues(m).ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    Ok(eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Shifts tried when the QR iteration stalls, as multiples of `‖M‖_max`
/// added to the mean diagonal. Recentring alone helps nearly scalar
/// matrices; the complex offsets break the `±λ` symmetry of Hamiltonians,
/// on which the unshifted iteration can cycle.
const RETRY_SHIFTS: [(f64, f64); 4] = [(0.0, 0.0), (0.0, 1e-3), (1e-3, 1e-3), (-2e-3, 3e-3)];

/// Complex Schur form of `m - shift·I`, retrying with shifts when the
/// iteration fails on `m` itself. Returns the factorization and the shift.
fn complex_schur(m: &DMatrix<Complex64>) -> Option<(Schur<Complex64, nalgebra::Dyn>, Complex64)> {
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Some((s, Complex64::new(0.0, 0.0)));
    }
    let n = m.nrows();
    let mean = m.trace() / n as f64;
    let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    RETRY_SHIFTS.iter().find_map(|&(re, im)| {
        let shift = mean + Complex64::new(re, im) * norm;
        let shifted = m - DMatrix::<Complex64>::identity(n, n) * shift;
        Schur::try_new(shifted, f64::EPSILON, SCHUR_MAX_ITER).map(|s| (s, shift))
    })
}

/// Eigenvalues of a real matrix: real Schur first, complex Schur with
/// retries if that stalls.
fn eigenvalues(m: &Matrix) -> Option<Vec<Complex64>> {
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Some(s.complex_eigenvalues().iter().copied().collect());
    }
    let (s, shift) = complex_schur(&m.map(|x| Complex64::new(x, 0.0)))?;
    let (_, t) = s.unpack();
    Some(t.diagonal().iter().map(|z| z + shift).collect())
}

/// True iff every eigenvalue of `m` has real part below `-tol`.
pub fn is_hurwitz(m: &Matrix, tol: f64) -> Result<bool> {
    Ok(spectral_abscissa(m)? < -tol)
}

/// Solves `a_clᵀ W + W a_cl + rhs = 0` through the Kronecker-vectorized system.
/// No stability or symmetry checks: callers vouch for them.
pub(crate) fn lyapunov_unchecked(a_cl: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = a_cl.nrows();
    let eye = Matrix::identity(n, n);
    let at = a_cl.transpose();
    let op = eye.kronecker(&at) + at.kronecker(&eye);
    let b = nalgebra::DVector::from_column_slice((-rhs).as_slice());
    let lu = op.clone().lu();
    let mut x = lu.solve(&b).ok_or_else(|| Error::NumericalFailure("singular Lyapunov operator".into()))?;
    // one step of iterative refinement
    let r = &b - &op * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let w = Matrix::from_column_slice(n, n, x.as_slice());
    Ok(symmetrize(&w))
}

/// Solves `a_clᵀ W + W a_cl + rhs = 0` for a Hurwitz `a_cl` and symmetric `rhs`.
pub fn solve_lyapunov(a_cl: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    ensure_square(a_cl, "closed-loop matrix")?;
    ensure_finite(a_cl, "closed-loop matrix")?;
    ensure_finite(rhs, "right-hand side")?;
    if rhs.shape() != a_cl.shape() {
        return Err(Error::ContractViolation("Lyapunov right-hand side has the wrong shape".into()));
    }
    if !is_symmetric(rhs) {
        return Err(Error::ContractViolation("Lyapunov right-hand side is not symmetric".into()));
    }
    let abscissa = spectral_abscissa(a_cl)?;
    if abscissa >= 0.0 {
        return Err(Error::UnstableClosedLoop { abscissa });
    }
    lyapunov_unchecked(a_cl, rhs)
}

/// Frobenius norm of `AᵀP + PA − PDP + Q`.
pub fn riccati_residual(a: &Matrix, d: &Matrix, q: &Matrix, p: &Matrix) -> f64 {
    (a.transpose() * p + p * a - p * d * p + q).norm()
}

/// Size of the individual Riccati terms at `p`, the yardstick for residuals.
fn residual_scale(a: &Matrix, d: &Matrix, q: &Matrix, p: &Matrix) -> f64 {
    let pn = p.norm();
    q.norm() + 2.0 * a.norm() * pn + d.norm() * pn * pn
}

/// Complex Givens rotation `(c, s)` with `[c s; -s̄ c]·[f; g] = [r; 0]`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if fa == 0.0 {
        return (0.0, g.conj() / ga);
    }
    let norm = fa.hypot(ga);
    (fa / norm, (f / fa) * g.conj() / norm)
}

/// Swaps the diagonal entries `k` and `k+1` of the upper-triangular `t`,
/// accumulating the unitary transformation into `z`.
fn swap_adjacent(t: &mut DMatrix<Complex64>, z: &mut DMatrix<Complex64>, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let (c, s) = givens(t[(k, k + 1)], t22 - t11);
    for j in k + 2..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = x * c + s * y;
        t[(k + 1, j)] = y * c - s.conj() * x;
    }
    let sc = s.conj();
    for i in 0..k {
        let x = t[(i, k)];
        let y = t[(i, k + 1)];
        t[(i, k)] = x * c + sc * y;
        t[(i, k + 1)] = y * c - s * x;
    }
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    for i in 0..z.nrows() {
        let x = z[(i, k)];
        let y = z[(i, k + 1)];
        z[(i, k)] = x * c + sc * y;
        z[(i, k + 1)] = y * c - s * x;
    }
}

/// Complex Schur form `h = Z T Zᴴ` with the eigenvalues of negative real part
/// moved to the leading diagonal positions. Returns `(Z, T, stable_count)`.
pub(crate) fn ordered_schur(h: &Matrix) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>, usize)> {
    let hc = h.map(|x| Complex64::new(x, 0.0));
    let (schur, shift) =
        complex_schur(&hc).ok_or_else(|| Error::NumericalFailure("complex Schur iteration did not converge".into()))?;
    let (mut z, mut t) = schur.unpack();
    let dim = t.nrows();
    for i in 0..dim {
        t[(i, i)] += shift;
    }
    let mut placed = 0;
    for i in 0..dim {
        if t[(i, i)].re < 0.0 {
            for k in (placed..i).rev() {
                swap_adjacent(&mut t, &mut z, k);
            }
            placed += 1;
        }
    }
    Ok((z, t, placed))
}

fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().min()
}

/// Maximal (stabilizing) solution of `AᵀP + PA − PDP + Q = 0`.
///
/// `d` and `q` must be symmetric; `d` may be indefinite. Returns
/// [`Error::NoSolution`] when the Hamiltonian has eigenvalues within
/// [`IMAGINARY_AXIS_TOL`] of the imaginary axis, when its stable subspace is
/// not the graph of a matrix, or when the stabilizing solution is not
/// positive semidefinite.
pub fn solve_care_maximal(a: &Matrix, d: &Matrix, q: &Matrix) -> Result<Matrix> {
    ensure_square(a, "A")?;
    let n = a.nrows();
    for (m, name) in [(d, "D"), (q, "Q")] {
        if m.shape() != (n, n) {
            return Err(Error::ContractViolation(format!("{name} must be {n}x{n}")));
        }
        ensure_finite(m, name)?;
        if !is_symmetric(m) {
            return Err(Error::ContractViolation(format!("{name} is not symmetric")));
        }
    }
    ensure_finite(a, "A")?;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }

    let mut h = Matrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-d));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let (z, t, stable) = ordered_schur(&h)?;
    if let Some(lambda) = t.diagonal().iter().find(|z| z.re.abs() < IMAGINARY_AXIS_TOL) {
        return Err(Error::NoSolution(format!("Hamiltonian eigenvalue {lambda} lies on the imaginary axis")));
    }
    if stable != n {
        return Err(Error::NoSolution(format!("Hamiltonian has {stable} stable eigenvalues, expected {n}")));
    }

    let z1 = z.view((0, 0), (n, n)).into_owned();
    let z2 = z.view((n, 0), (n, n)).into_owned();
    let sv = z1.clone().singular_values();
    if sv.min() <= 1e-12 * sv.max().max(1.0) {
        return Err(Error::NoSolution("stable invariant subspace is not a graph".into()));
    }
    let pt = z1
        .transpose()
        .lu()
        .solve(&z2.transpose())
        .ok_or_else(|| Error::NoSolution("stable invariant subspace is not a graph".into()))?;
    let mut p = symmetrize(&pt.transpose().map(|z| z.re));

    let mut residual = riccati_residual(a, d, q, &p);
    for _ in 0..NEWTON_STEPS {
        if residual <= 1e-15 * residual_scale(a, d, q, &p) {
            break;
        }
        let a_cl = a - d * &p;
        let Ok(next) = lyapunov_unchecked(&a_cl, &(q + &p * d * &p)) else {
            break;
        };
        let next_residual = riccati_residual(a, d, q, &next);
        if !(next_residual < residual) {
            break;
        }
        p = next;
        residual = next_residual;
    }

    if residual > 1e-8 * residual_scale(a, d, q, &p) {
        return Err(Error::NumericalFailure(format!("Riccati residual {residual:e} exceeds tolerance")));
    }
    let abscissa = spectral_abscissa(&(a - d * &p))?;
    if abscissa >= 0.0 {
        return Err(Error::NoSolution(format!("closed loop A - DP is not Hurwitz (abscissa {abscissa:e})")));
    }
    let min_eig = min_symmetric_eigenvalue(&p);
    if min_eig < -PSD_TOL * (1.0 + p.norm()) {
        return Err(Error::NoSolution(format!("stabilizing solution is indefinite (min eigenvalue {min_eig:e})")));
    }
    Ok(p)
}

/// Standard LQR with `Q = I`, `R = I`: `P` maximal, `K = −BᵀP`, cost `tr P`.
pub fn lqr_synthesize(a: &Matrix, b: &Matrix) -> Result<CareSolution> {
    ensure_square(a, "A")?;
    if b.nrows() != a.nrows() {
        return Err(Error::ContractViolation(format!("B must have {} rows, got {}", a.nrows(), b.nrows())));
    }
    ensure_finite(b, "B")?;
    let n = a.nrows();
    let d = b * b.transpose();
    let p = solve_care_maximal(a, &d, &Matrix::identity(n, n)).map_err(|e| match e {
        Error::NoSolution(msg) => Error::Uncontrollable(msg),
        other => other,
    })?;
    let k = -b.transpose() * &p;
    let cost = p.trace();
    Ok(CareSolution { p, k, cost })
}

/// Infinite-horizon cost `J(K)` of the gain `k` on `ẋ = Ax + Bu` with
/// `Q = I`, `R = I` and `x(0) ~ N(0, I)`.
///
/// Returns `f64::INFINITY` when `A + BK` is not Hurwitz.
pub fn eval_cost(a: &Matrix, b: &Matrix, k: &Matrix) -> f64 {
    let n = a.nrows();
    let a_cl = a + b * k;
    match spectral_abscissa(&a_cl) {
        Ok(x) if x < 0.0 => {}
        _ => return f64::INFINITY,
    }
    let weight = Matrix::identity(n, n) + k.transpose() * k;
    match lyapunov_unchecked(&a_cl, &weight) {
        Ok(w) => {
            let cost = w.trace();
            if cost.is_finite() && cost > 0.0 {
                cost
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}
