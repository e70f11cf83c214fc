//! α-suboptimal covers for families of LQR problems whose input matrix is
//! `B(σ) = U·diag(σ)·Vᵀ` with `σ ∈ [1/θ, 1]^d`.
//!
//! ```
//! use suboptcover::{build_scalar_cover, lower_bound_count};
//!
//! let cover = build_scalar_cover(1.0, 1.5, 100.0).unwrap();
//! assert!(cover.verification.max_ratio <= 1.5);
//! assert!(cover.n >= lower_bound_count(1.0, 1.5, 100.0).unwrap());
//! ```

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod care;
pub mod cover;
pub mod ddf;
pub mod error;
pub mod gcc;
pub mod grid;
pub mod neighborhood;
pub mod scalar;
pub mod search;
pub mod sentinel;
pub mod serde_matrix;

pub use care::{eval_cost, lqr_synthesize, solve_care_maximal, solve_lyapunov, CareSolution, Matrix};
pub use cover::{
    build_cover, certify_cell, corner_diagnostics, covering_curve, gcc_conservativeness, CellReport, CoverOptions,
    CoverResult, CoveringCurve, CurveRow,
};
pub use ddf::{make_coupling, make_quadrotor, make_scalar, Coupling, DdfProblem, Preset, PresetParams};
pub use error::{Error, Result};
pub use gcc::{encode_cell, synthesize_cell, synthesize_gcc, GccSolution};
pub use grid::{partition_grid, GeometricGrid, GridCell};
pub use neighborhood::{alpha_sweep, components, compute_field, NeighborhoodField};
pub use scalar::{build_scalar_cover, lower_bound_count, neighborhood_interval, ScalarCover};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/riccati.md")]
    mod riccati {}
    #[doc = include_str!("../../../book/src/scalar.md")]
    mod scalar {}
    #[doc = include_str!("../../../book/src/gcc.md")]
    mod gcc {}
    #[doc = include_str!("../../../book/src/covers.md")]
    mod covers {}
    #[doc = include_str!("../../../book/src/neighborhoods.md")]
    mod neighborhoods {}
}
