//! Fixed-intercept LAD regression `1/(MR + delta) - beta0 = b1 x + b2 z x + e`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DELTA: f64 = 0.01;
/// Above this many rows the iterative solver is the default.
pub const EXACT_MAX_ROWS: usize = 10_000;
const IRLS_TOLERANCE: f64 = 1e-10;
const IRLS_MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadSolver {
    Exact,
    Irls,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadFit {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub residuals: Vec<f64>,
    /// Sum of absolute residuals.
    pub objective: f64,
    /// `b1` and `b2` are not separately identifiable (e.g. all `z` equal);
    /// `beta2` is then reported as 0.
    pub collinear: bool,
    pub solver: LadSolver,
    pub permutation_pvalue: Option<f64>,
}

pub fn beta0() -> f64 {
    1.0 / (5.0 / 7.0 + DELTA)
}

/// Sum of `|y - b1 x - b2 z x|` for the transformed response.
pub fn lad_objective(mr: &[f64], x: &[f64], z: &[u8], beta1: f64, beta2: f64) -> f64 {
    let b0 = beta0();
    (0..mr.len())
        .map(|i| (1.0 / (mr[i] + DELTA) - b0 - beta1 * x[i] - beta2 * f64::from(z[i]) * x[i]).abs())
        .sum()
}

pub fn fit_lad(mr: &[f64], x: &[f64], z: &[u8]) -> Result<LadFit> {
    let solver = if mr.len() <= EXACT_MAX_ROWS { LadSolver::Exact } else { LadSolver::Irls };
    fit_lad_with(mr, x, z, solver)
}

pub fn fit_lad_with(mr: &[f64], x: &[f64], z: &[u8], solver: LadSolver) -> Result<LadFit> {
    let n = mr.len();
    if x.len() != n || z.len() != n {
        return Err(Error::Shape(format!("mr, x and z lengths differ: {n}, {}, {}", x.len(), z.len())));
    }
    if n < 3 {
        return Err(Error::Param(format!("LAD fit needs at least 3 observations, got {n}")));
    }
    if let Some(bad) = mr.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(Error::Domain(format!("misclassification rate {bad} outside [0, 1]")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("x must be finite".into()));
    }
    if z.iter().any(|&v| v > 1) {
        return Err(Error::Domain("z must be 0 or 1".into()));
    }
    let b0 = beta0();
    let y: Vec<f64> = mr.iter().map(|m| 1.0 / (m + DELTA) - b0).collect();
    let a: Vec<[f64; 2]> = x.iter().zip(z).map(|(&x, &z)| [x, f64::from(z) * x]).collect();

    let (c1, c2): (Vec<f64>, Vec<f64>) = a.iter().map(|r| (r[0], r[1])).unzip();
    let (s11, s22) = (dot(&c1, &c1), dot(&c2, &c2));
    let s12 = dot(&c1, &c2);
    let collinear = s11 * s22 - s12 * s12 <= 1e-12 * s11 * s22;

    let beta = if collinear {
        let col = if s11 > 0.0 { &c1 } else { &c2 };
        let b = if col.iter().any(|&v| v != 0.0) {
            weighted_median(col.iter().zip(&y).filter(|(c, _)| **c != 0.0).map(|(c, y)| (y / c, c.abs())))
        } else {
            0.0
        };
        if s11 > 0.0 { [b, 0.0] } else { [0.0, b] }
    } else {
        match solver {
            LadSolver::Exact => exact(&a, &y),
            LadSolver::Irls => irls(&a, &y),
        }
    };
    let residuals: Vec<f64> = a.iter().zip(&y).map(|(r, y)| y - r[0] * beta[0] - r[1] * beta[1]).collect();
    Ok(LadFit {
        beta0: b0,
        beta1: beta[0],
        beta2: beta[1],
        objective: residuals.iter().map(|r| r.abs()).sum(),
        residuals,
        collinear,
        solver,
        permutation_pvalue: None,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn objective(a: &[[f64; 2]], y: &[f64], b: [f64; 2]) -> f64 {
    a.iter().zip(y).map(|(r, y)| (y - r[0] * b[0] - r[1] * b[1]).abs()).sum()
}

/// Lower weighted median of `(value, weight)` pairs.
fn weighted_median(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut v: Vec<(f64, f64)> = pairs.collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = v.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(value, w) in &v {
        acc += w;
        if acc >= total / 2.0 {
            return value;
        }
    }
    v.last().map_or(0.0, |p| p.0)
}

/// Exact minimizer of the objective on the line `b + t d`.
fn line_min(a: &[[f64; 2]], y: &[f64], b: [f64; 2], d: [f64; 2]) -> [f64; 2] {
    let t = weighted_median(a.iter().zip(y).filter_map(|(r, y)| {
        let c = r[0] * d[0] + r[1] * d[1];
        (c != 0.0).then(|| ((y - r[0] * b[0] - r[1] * b[1]) / c, c.abs()))
    }));
    [b[0] + t * d[0], b[1] + t * d[1]]
}

/// Vertex descent: the objective is convex and piecewise linear, so a point
/// where no line through it (a zero residual or a coordinate axis) offers a
/// decrease is a global minimum.
fn exact(a: &[[f64; 2]], y: &[f64]) -> [f64; 2] {
    let mut b = line_min(a, y, [0.0, 0.0], [1.0, 0.0]);
    let mut f = objective(a, y, b);
    for _ in 0..10 * a.len() + 10 {
        let mut directions: Vec<[f64; 2]> = vec![[1.0, 0.0], [0.0, 1.0]];
        for (r, yi) in a.iter().zip(y) {
            let res = yi - r[0] * b[0] - r[1] * b[1];
            let norm = r[0].hypot(r[1]);
            if norm > 0.0 && res.abs() <= 1e-9 * (1.0 + yi.abs()) {
                let d = [-r[1] / norm, r[0] / norm];
                let d = if d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0) { [-d[0], -d[1]] } else { d };
                if !directions.iter().any(|e| (e[0] - d[0]).abs() < 1e-12 && (e[1] - d[1]).abs() < 1e-12) {
                    directions.push(d);
                }
            }
        }
        let mut best = (f, b);
        for d in directions {
            let cand = line_min(a, y, b, d);
            let fc = objective(a, y, cand);
            if fc < best.0 - 1e-13 * (1.0 + f) {
                best = (fc, cand);
            }
        }
        if best.1 == b {
            break;
        }
        (f, b) = best;
    }
    b
}

/// Iteratively reweighted least squares with weights `1/max(|r|, eps)`.
fn irls(a: &[[f64; 2]], y: &[f64]) -> [f64; 2] {
    let mut b = [0.0, 0.0];
    let eps = 1e-12;
    for iteration in 0..IRLS_MAX_ITERATIONS {
        let (mut m11, mut m12, mut m22, mut v1, mut v2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (r, yi) in a.iter().zip(y) {
            let res = yi - r[0] * b[0] - r[1] * b[1];
            let w = if iteration == 0 { 1.0 } else { 1.0 / res.abs().max(eps) };
            m11 += w * r[0] * r[0];
            m12 += w * r[0] * r[1];
            m22 += w * r[1] * r[1];
            v1 += w * r[0] * yi;
            v2 += w * r[1] * yi;
        }
        let det = m11 * m22 - m12 * m12;
        if det == 0.0 {
            break;
        }
        let next = [(m22 * v1 - m12 * v2) / det, (m11 * v2 - m12 * v1) / det];
        let step = (next[0] - b[0]).abs().max((next[1] - b[1]).abs());
        b = next;
        if step < IRLS_TOLERANCE {
            break;
        }
    }
    b
}
