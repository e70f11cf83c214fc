//! Dense suboptimality-ratio fields over the authority box and the
//! connected components of their sublevel sets.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::care::Matrix;
use crate::ddf::DdfProblem;
use crate::error::{Error, Result};
use crate::sentinel;

/// A fixed controller, LQR-optimal at `source`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldController {
    pub source: Vec<f64>,
    #[serde(with = "crate::serde_matrix")]
    pub k: Matrix,
}

/// Ratios `J_σ(K)/J⋆_σ` of each controller on a log-spaced grid of `R^d`
/// nodes. Node order is row-major with the last axis varying fastest.
/// Nodes where a solve fails hold `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodField {
    pub problem: Option<String>,
    pub theta: f64,
    pub resolution: usize,
    pub axes: Vec<Vec<f64>>,
    pub controllers: Vec<FieldController>,
    pub ratios: Vec<Vec<f64>>,
}

/// `R` log-spaced points from `1/θ` to 1, endpoints exact.
pub fn log_axis(theta: f64, resolution: usize) -> Vec<f64> {
    let last = resolution - 1;
    (0..resolution)
        .map(|i| match i {
            0 => 1.0 / theta,
            i if i == last => 1.0,
            i => theta.powf(i as f64 / last as f64 - 1.0),
        })
        .collect()
}

impl NeighborhoodField {
    pub fn d(&self) -> usize {
        self.axes.len()
    }

    pub fn node_count(&self) -> usize {
        self.resolution.pow(self.d() as u32)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.d()];
        for slot in index.iter_mut().rev() {
            *slot = flat % self.resolution;
            flat /= self.resolution;
        }
        index
    }

    pub fn flatten(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).iter().zip(&self.axes).map(|(&i, ax)| ax[i]).collect()
    }

    /// Nodes where controller `controller` is within factor `alpha` of optimal.
    pub fn mask(&self, controller: usize, alpha: f64) -> Result<Vec<bool>> {
        let ratios = self
            .ratios
            .get(controller)
            .ok_or_else(|| Error::ContractViolation(format!("no controller {controller}")))?;
        Ok(ratios.iter().map(|&r| r <= alpha).collect())
    }
}

/// Evaluates LQR controllers synthesized at `sources` on an `R^d` log grid.
pub fn compute_field(problem: &DdfProblem, sources: &[Vec<f64>], resolution: usize) -> Result<NeighborhoodField> {
    if resolution < 2 {
        return Err(Error::Domain("resolution must be at least 2".into()));
    }
    let d = problem.d();
    let controllers = sources
        .iter()
        .map(|s| {
            if !problem.contains(s) {
                return Err(Error::Domain(format!("source {s:?} outside the authority box")));
            }
            Ok(FieldController { source: s.clone(), k: problem.lqr_at(s)?.k })
        })
        .collect::<Result<Vec<_>>>()?;
    let axis = log_axis(problem.theta(), resolution);
    let mut field = NeighborhoodField {
        problem: problem.name().map(str::to_owned),
        theta: problem.theta(),
        resolution,
        axes: vec![axis; d],
        controllers,
        ratios: Vec::new(),
    };
    let per_node: Vec<Vec<f64>> = (0..field.node_count())
        .into_par_iter()
        .map(|flat| {
            let sigma = field.node(flat);
            let optimal = problem.optimal_cost(&sigma).ok().filter(|j| j.is_finite() && *j > 0.0);
            field
                .controllers
                .iter()
                .map(|c| match (optimal, problem.cost(&sigma, &c.k)) {
                    (Some(j), Ok(cost)) => cost / j,
                    _ => f64::INFINITY,
                })
                .collect()
        })
        .collect();
    field.ratios = (0..field.controllers.len()).map(|c| per_node.iter().map(|r| r[c]).collect()).collect();
    Ok(field)
}

/// Connected components of a sublevel mask. `labels` holds 0 outside the
/// mask and `1..=count` inside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Components {
    pub count: usize,
    pub labels: Vec<u32>,
}

/// Labels a mask on a `resolution^d` grid with axis-adjacent connectivity.
pub fn label_mask(mask: &[bool], d: usize, resolution: usize) -> Components {
    let mut labels = vec![0u32; mask.len()];
    let strides: Vec<usize> = (0..d).map(|i| resolution.pow((d - 1 - i) as u32)).collect();
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count as u32;
        queue.push_back(start);
        while let Some(flat) = queue.pop_front() {
            for &stride in &strides {
                let coord = flat / stride % resolution;
                let mut visit = |nb: usize| {
                    if mask[nb] && labels[nb] == 0 {
                        labels[nb] = count as u32;
                        queue.push_back(nb);
                    }
                };
                if coord > 0 {
                    visit(flat - stride);
                }
                if coord + 1 < resolution {
                    visit(flat + stride);
                }
            }
        }
    }
    Components { count, labels }
}

pub fn components(field: &NeighborhoodField, controller: usize, alpha: f64) -> Result<Components> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("alpha must exceed 1, got {alpha}")));
    }
    let mask = field.mask(controller, alpha)?;
    Ok(label_mask(&mask, field.d(), field.resolution))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub alpha: f64,
    pub count: usize,
    pub mask: Vec<bool>,
}

/// Component counts and masks for ascending `alphas`.
pub fn alpha_sweep(field: &NeighborhoodField, controller: usize, alphas: &[f64]) -> Result<Vec<SweepLevel>> {
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("alphas must be strictly ascending".into()));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let mask = field.mask(controller, alpha)?;
            let count = components(field, controller, alpha)?.count;
            Ok(SweepLevel { alpha, count, mask })
        })
        .collect()
}

/// Writes `sigma1,sigma2,controller,ratio` rows for a two-dimensional field.
pub fn write_field_csv<W: Write>(field: &NeighborhoodField, out: W) -> Result<()> {
    if field.d() != 2 {
        return Err(Error::ContractViolation("CSV export needs a two-dimensional field".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma1", "sigma2", "controller", "ratio"])?;
    for (c, ratios) in field.ratios.iter().enumerate() {
        for (flat, &r) in ratios.iter().enumerate() {
            let s = field.node(flat);
            w.serialize((s[0], s[1], c, sentinel::encode(r)))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// JSON form of a field of any dimension; infinite ratios become `-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub problem: Option<String>,
    pub theta: f64,
    pub resolution: usize,
    pub axes: Vec<Vec<f64>>,
    pub controllers: Vec<FieldController>,
    pub ratios: Vec<Vec<f64>>,
}

impl From<&NeighborhoodField> for FieldDocument {
    fn from(f: &NeighborhoodField) -> Self {
        FieldDocument {
            problem: f.problem.clone(),
            theta: f.theta,
            resolution: f.resolution,
            axes: f.axes.clone(),
            controllers: f.controllers.clone(),
            ratios: f.ratios.iter().map(|r| r.iter().map(|&x| sentinel::encode(x)).collect()).collect(),
        }
    }
}

impl From<FieldDocument> for NeighborhoodField {
    fn from(doc: FieldDocument) -> Self {
        NeighborhoodField {
            problem: doc.problem,
            theta: doc.theta,
            resolution: doc.resolution,
            axes: doc.axes,
            controllers: doc.controllers,
            ratios: doc.ratios.into_iter().map(|r| r.into_iter().map(sentinel::decode).collect()).collect(),
        }
    }
}

pub fn write_field_json<W: Write>(field: &NeighborhoodField, out: W) -> Result<()> {
    serde_json::to_writer(out, &FieldDocument::from(field))?;
    Ok(())
}

pub fn read_field_json<R: std::io::Read>(input: R) -> Result<NeighborhoodField> {
    let doc: FieldDocument = serde_json::from_reader(input)?;
    Ok(doc.into())
}
