//! Geometric grid partitions of the authority box `[1/θ, 1]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Breakpoints `s_1 = 1/θ < … < s_{k+1} = 1` with a constant ratio, shared
/// by every axis. Cells are products of consecutive breakpoint intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub theta: f64,
    pub d: usize,
    pub pitch: usize,
    pub breakpoints: Vec<f64>,
}

/// An axis-aligned box of authority values. `index` is zero-based per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub index: Vec<usize>,
    pub sigma_lo: Vec<f64>,
    pub sigma_hi: Vec<f64>,
}

impl GridCell {
    /// A cell outside any grid; `index` is left empty.
    pub fn new(sigma_lo: Vec<f64>, sigma_hi: Vec<f64>) -> Result<Self> {
        if sigma_lo.len() != sigma_hi.len() || sigma_lo.is_empty() {
            return Err(Error::ContractViolation("cell bounds must have equal, positive length".into()));
        }
        if sigma_lo.iter().zip(&sigma_hi).any(|(l, h)| !(l > &0.0 && l <= h)) {
            return Err(Error::Domain("cell needs 0 < sigma_lo <= sigma_hi".into()));
        }
        Ok(GridCell { index: Vec::new(), sigma_lo, sigma_hi })
    }

    /// Degenerate cell holding the single task `σ`.
    pub fn point(sigma: Vec<f64>) -> Result<Self> {
        GridCell::new(sigma.clone(), sigma)
    }

    pub fn d(&self) -> usize {
        self.sigma_lo.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma_lo == self.sigma_hi
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.sigma_lo.iter().zip(&self.sigma_hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn radius(&self) -> Vec<f64> {
        self.sigma_lo.iter().zip(&self.sigma_hi).map(|(l, h)| 0.5 * (h - l)).collect()
    }

    /// All `2^d` corners, ordered by the bit pattern (bit `i` set = upper end on axis `i`).
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.d();
        (0..1usize << d)
            .map(|bits| (0..d).map(|i| if bits >> i & 1 == 1 { self.sigma_hi[i] } else { self.sigma_lo[i] }).collect())
            .collect()
    }

    pub fn contains(&self, sigma: &[f64]) -> bool {
        sigma.len() == self.d()
            && sigma.iter().zip(self.sigma_lo.iter().zip(&self.sigma_hi)).all(|(s, (l, h))| s >= l && s <= h)
    }
}

/// Geometric partition with `pitch` cells per axis.
///
/// `θ = 1` collapses the box to a point; the pitch is then forced to 1.
pub fn partition_grid(theta: f64, d: usize, pitch: usize) -> Result<GeometricGrid> {
    if !(theta.is_finite() && theta >= 1.0) {
        return Err(Error::Domain(format!("theta must be >= 1, got {theta}")));
    }
    if d == 0 || pitch == 0 {
        return Err(Error::Domain("dimension and pitch must be positive".into()));
    }
    let pitch = if theta == 1.0 { 1 } else { pitch };
    let k = pitch as f64;
    let breakpoints = (0..=pitch)
        .map(|i| match i {
            0 => 1.0 / theta,
            i if i == pitch => 1.0,
            i => theta.powf(i as f64 / k - 1.0),
        })
        .collect();
    Ok(GeometricGrid { theta, d, pitch, breakpoints })
}

impl GeometricGrid {
    pub fn cell_count(&self) -> usize {
        self.pitch.pow(self.d as u32)
    }

    /// Multi-index of the `flat`-th cell, last axis varying fastest.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.d];
        for slot in index.iter_mut().rev() {
            *slot = flat % self.pitch;
            flat /= self.pitch;
        }
        index
    }

    pub fn cell(&self, index: &[usize]) -> GridCell {
        GridCell {
            index: index.to_vec(),
            sigma_lo: index.iter().map(|&j| self.breakpoints[j]).collect(),
            sigma_hi: index.iter().map(|&j| self.breakpoints[j + 1]).collect(),
        }
    }

    /// Every cell in row-major index order.
    pub fn cells(&self) -> impl Iterator<Item = GridCell> + '_ {
        (0..self.cell_count()).map(move |f| self.cell(&self.unflatten(f)))
    }

    /// The `2^d` cells touching a corner of the box (fewer when `pitch == 1`).
    pub fn corner_cells(&self) -> Vec<GridCell> {
        let last = self.pitch - 1;
        let mut out: Vec<GridCell> = (0..1usize << self.d)
            .map(|bits| {
                let index: Vec<usize> = (0..self.d).map(|i| if bits >> i & 1 == 1 { last } else { 0 }).collect();
                self.cell(&index)
            })
            .collect();
        out.dedup_by(|a, b| a.index == b.index);
        out
    }

    /// Cell containing `σ`; points on an interior boundary go to the upper cell.
    pub fn locate(&self, sigma: &[f64]) -> Option<Vec<usize>> {
        if sigma.len() != self.d {
            return None;
        }
        sigma
            .iter()
            .map(|&s| {
                if s < self.breakpoints[0] || s > self.breakpoints[self.pitch] {
                    return None;
                }
                let j = self.breakpoints[1..self.pitch].partition_point(|&b| b <= s);
                Some(j)
            })
            .collect()
    }
}
