//! Closed-form linear readout: ridge regression on one-hot class targets.
//!
//! The fit never materializes the full design matrix against itself; it
//! accumulates the sufficient statistics GᵀG and GᵀY in one pass over the
//! training rows (G is the embedding block with an appended all-ones column
//! for the bias), then solves the (H+1)-sized normal system directly. The
//! bias column is regularized together with the weights, so one λ means one
//! thing everywhere.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, pivoted_solve, Matrix};
use crate::reservoir::Embeddings;

/// Linear classifier obtained in closed form. Immutable once fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeReadout {
    weights: Matrix,
    bias: Vec<f64>,
    lambda: f64,
}

impl RidgeReadout {
    /// Class-score weights, C×H.
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Per-class bias, length C.
    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Regularization strength used at fit time.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn num_classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn hidden_units(&self) -> usize {
        self.weights.cols()
    }

    /// Serializes as CSV: header, then one row per class holding the bias and
    /// the weight vector. Numbers print with full round-trip precision.
    pub fn to_csv(&self) -> String {
        let h = self.hidden_units();
        let mut out = String::from("class,bias");
        for j in 0..h {
            out.push_str(&format!(",w{j}"));
        }
        out.push('\n');
        for c in 0..self.num_classes() {
            out.push_str(&format!("{c},{}", self.bias[c]));
            for &w in self.weights.row(c) {
                out.push_str(&format!(",{w}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<RidgeReadout> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty readout file".into()))?;
        let h = header
            .split(',')
            .count()
            .checked_sub(2)
            .ok_or_else(|| Error::Parse("readout header must be class,bias,w0,...".into()))?;
        let mut weights_rows: Vec<Vec<f64>> = Vec::new();
        let mut bias = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != h + 2 {
                return Err(Error::Parse(format!(
                    "readout row {}: expected {} fields, found {}",
                    lineno + 2,
                    h + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("readout row {}: bad number {s:?}", lineno + 2))
                })
            };
            bias.push(parse(fields[1])?);
            weights_rows.push(
                fields[2..]
                    .iter()
                    .map(|s| parse(s))
                    .collect::<Result<_>>()?,
            );
        }
        if weights_rows.is_empty() {
            return Err(Error::Parse("readout file holds no classes".into()));
        }
        let c = weights_rows.len();
        let weights = Matrix::from_fn(c, h, |i, j| weights_rows[i][j]);
        Ok(RidgeReadout {
            weights,
            bias,
            lambda: f64::NAN,
        })
    }
}

/// Sufficient statistics GᵀG and GᵀY of a masked design against targets.
/// Accumulated once, they serve every regularization strength: λ only enters
/// the solve.
#[derive(Debug, Clone)]
pub struct RidgeStats {
    normal: Matrix,
    rhs: Matrix,
    design_cols: usize,
    include_bias: bool,
}

/// One pass over the masked rows: per-block partial GᵀG and GᵀY, reduced in
/// block order so the result does not depend on the worker count. G is the
/// masked design with an appended all-ones column when `include_bias`.
pub fn accumulate_ridge_stats(
    design: &Matrix,
    targets: &Matrix,
    mask: &[bool],
    include_bias: bool,
) -> Result<RidgeStats> {
    let n = design.rows();
    let h = design.cols();
    let t = targets.cols();
    if targets.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: targets.rows(),
        });
    }
    if mask.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mask.len(),
        });
    }
    let selected: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    if selected.is_empty() {
        return Err(Error::EmptyMask);
    }
    for &i in &selected {
        if design.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design row"));
        }
        if targets.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target row"));
        }
    }

    let d = h + usize::from(include_bias);
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = selected
        .par_chunks(256)
        .map(|block| {
            let mut ata = vec![0.0; d * d];
            let mut aty = vec![0.0; d * t];
            let mut g_row = vec![0.0; d];
            for &i in block {
                g_row[..h].copy_from_slice(design.row(i));
                if include_bias {
                    g_row[h] = 1.0;
                }
                for a in 0..d {
                    let ga = g_row[a];
                    if ga == 0.0 {
                        continue;
                    }
                    for b in a..d {
                        ata[a * d + b] += ga * g_row[b];
                    }
                    for (c, &y) in targets.row(i).iter().enumerate() {
                        aty[a * t + c] += ga * y;
                    }
                }
            }
            (ata, aty)
        })
        .collect();

    let mut normal = Matrix::zeros(d, d);
    let mut rhs = Matrix::zeros(d, t);
    for (ata, aty) in blocks {
        for a in 0..d {
            for b in a..d {
                let v = normal.at(a, b) + ata[a * d + b];
                normal.set(a, b, v);
            }
            for c in 0..t {
                let v = rhs.at(a, c) + aty[a * t + c];
                rhs.set(a, c, v);
            }
        }
    }
    for a in 0..d {
        for b in a + 1..d {
            let v = normal.at(a, b);
            normal.set(b, a, v);
        }
    }
    Ok(RidgeStats {
        normal,
        rhs,
        design_cols: h,
        include_bias,
    })
}

/// Solves (GᵀG + λI) W = GᵀY from precomputed statistics. Cholesky first,
/// partial pivoting as fallback for near-singular systems at tiny λ.
pub fn solve_ridge(stats: &RidgeStats, lambda: f64) -> Result<(Matrix, Vec<f64>)> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(
            "lambda must be finite and >= 0".into(),
        ));
    }
    let d = stats.normal.rows();
    let h = stats.design_cols;
    let t = stats.rhs.cols();
    let mut normal = stats.normal.clone();
    for a in 0..d {
        normal.set(a, a, normal.at(a, a) + lambda);
    }
    let solution = match cholesky_solve(&normal, &stats.rhs) {
        Ok(x) => x,
        Err(_) => pivoted_solve(&normal, &stats.rhs).map_err(|_| Error::SingularSystem)?,
    };
    let weights = Matrix::from_fn(t, h, |c, j| solution.at(j, c));
    let bias = if stats.include_bias {
        (0..t).map(|c| solution.at(h, c)).collect()
    } else {
        vec![0.0; t]
    };
    Ok((weights, bias))
}

/// Fits readout weights against arbitrary real targets (n×T) over the masked
/// rows. `include_bias` appends the regularized all-ones column. Returns the
/// T×H weight matrix and the length-T bias (zeros when suppressed).
pub fn fit_ridge_targets(
    design: &Matrix,
    targets: &Matrix,
    mask: &[bool],
    lambda: f64,
    include_bias: bool,
) -> Result<(Matrix, Vec<f64>)> {
    let stats = accumulate_ridge_stats(design, targets, mask, include_bias)?;
    solve_ridge(&stats, lambda)
}

/// One-hot encoding of class labels, |V|×C.
pub fn one_hot_targets(labels: &[usize], num_classes: usize) -> Result<Matrix> {
    if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
        return Err(Error::InvalidConfig(format!(
            "label {bad} out of range for {num_classes} classes"
        )));
    }
    let mut targets = Matrix::zeros(labels.len(), num_classes);
    for (i, &y) in labels.iter().enumerate() {
        targets.set(i, y, 1.0);
    }
    Ok(targets)
}

impl RidgeReadout {
    /// Wraps externally computed weights (for example a [`solve_ridge`]
    /// solution).
    pub fn new(weights: Matrix, bias: Vec<f64>, lambda: f64) -> RidgeReadout {
        assert_eq!(weights.rows(), bias.len(), "one bias entry per class");
        RidgeReadout {
            weights,
            bias,
            lambda,
        }
    }
}

/// Fits the classification readout: one-hot targets over the training mask,
/// bias included and regularized uniformly with λ.
pub fn fit_ridge(
    embeddings: &Embeddings,
    labels: &[usize],
    num_classes: usize,
    train_mask: &[bool],
    lambda: f64,
) -> Result<RidgeReadout> {
    let n = embeddings.num_nodes();
    if labels.len() != n {
        return Err(Error::LabelLengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let targets = one_hot_targets(labels, num_classes)?;
    let (weights, bias) =
        fit_ridge_targets(embeddings.states(), &targets, train_mask, lambda, true)?;
    Ok(RidgeReadout {
        weights,
        bias,
        lambda,
    })
}

/// Per-node class scores, |V|×C.
pub fn scores(readout: &RidgeReadout, embeddings: &Embeddings) -> Matrix {
    assert_eq!(
        embeddings.hidden_units(),
        readout.hidden_units(),
        "embedding width must match readout"
    );
    let n = embeddings.num_nodes();
    let c = readout.num_classes();
    Matrix::from_fn(n, c, |i, k| {
        crate::linalg::dot(readout.weights.row(k), embeddings.states().row(i)) + readout.bias[k]
    })
}

/// Argmax prediction per node; score ties break to the lowest class index.
pub fn predict(readout: &RidgeReadout, embeddings: &Embeddings) -> Vec<usize> {
    let s = scores(readout, embeddings);
    (0..s.rows())
        .map(|i| {
            let row = s.row(i);
            let mut best = 0usize;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Fraction of masked nodes whose prediction matches the label.
pub fn accuracy(predictions: &[usize], labels: &[usize], mask: &[bool]) -> Result<f64> {
    assert_eq!(predictions.len(), labels.len());
    assert_eq!(predictions.len(), mask.len());
    let total = mask.iter().filter(|&&m| m).count();
    if total == 0 {
        return Err(Error::EmptyMask);
    }
    let correct = (0..predictions.len())
        .filter(|&i| mask[i] && predictions[i] == labels[i])
        .count();
    Ok(correct as f64 / total as f64)
}
