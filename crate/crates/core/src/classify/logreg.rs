//! L2-regularized, class-weighted logistic regression.
//!
//! Two classes use a single sigmoid weight row (positive class = `classes[1]`);
//! more classes use one softmax row per class. Parameters are fitted by batch
//! gradient descent with Armijo backtracking, and the regularization strength
//! is chosen by stratified k-fold cross-validation on macro-F1.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::evalkit::classification_report;
use crate::util::rng_for;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub folds: usize,
    pub grid: Vec<f64>,
    pub balanced: bool,
    pub seed: u64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            grid: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            balanced: true,
            seed: 0,
            max_iter: 1000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: f64,
    pub mean_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub schema_version: u32,
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
    /// One row for binary models, one row per class otherwise.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub lambda: f64,
    pub class_weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub grid: Vec<GridPoint>,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default)]
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label_index: usize,
    pub probabilities: Vec<f64>,
}

impl LogRegModel {
    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn is_binary(&self) -> bool {
        self.classes.len() == 2
    }

    /// Raw class scores; for binary models `[0, w·x + b]`.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        let z: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect();
        Ok(if self.is_binary() { vec![0.0, z[0]] } else { z })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction, Error> {
        let probabilities = softmax(&self.scores(x)?);
        Ok(Prediction {
            label_index: argmax(&probabilities),
            probabilities,
        })
    }

    pub fn label(&self, prediction: &Prediction) -> &str {
        &self.classes[prediction.label_index]
    }
}

/// Free-function form of [`LogRegModel::predict`].
pub fn predict(model: &LogRegModel, x: &[f64]) -> Result<Prediction, Error> {
    model.predict(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the first maximal entry.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Balanced class weights `N / (K · N_c)`; classes absent from `y` get 0.
pub fn balanced_class_weights(y: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    counts
        .iter()
        .map(|&nc| {
            if nc == 0 {
                0.0
            } else {
                y.len() as f64 / (n_classes as f64 * nc as f64)
            }
        })
        .collect()
}

/// Assigns each example to one of `k` folds, dealing every class's shuffled
/// members round-robin so class proportions stay even across folds.
pub fn stratified_folds(y: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let n_classes = y.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        members[c].push(i);
    }
    let mut rng = rng_for(seed, "kfold");
    let mut fold_of = vec![0usize; y.len()];
    let mut next = 0usize;
    for class_members in &mut members {
        class_members.shuffle(&mut rng);
        for &i in class_members.iter() {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    fold_of
}

/// Shape of the flattened parameter vector: `rows` blocks of
/// `n_features` weights followed by one bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub rows: usize,
    pub n_features: usize,
}

impl ParamLayout {
    pub fn new(n_classes: usize, n_features: usize) -> Self {
        Self {
            rows: if n_classes == 2 { 1 } else { n_classes },
            n_features,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * (self.n_features + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self) -> usize {
        self.n_features + 1
    }
}

/// Regularized weighted mean log-loss and its gradient:
/// `(1/N) Σ c_{y_i} · ℓ_i + (λ/2) ‖W‖²` (biases are not penalized).
pub fn objective(
    params: &[f64],
    layout: ParamLayout,
    x: &[Vec<f64>],
    y: &[usize],
    class_weights: &[f64],
    lambda: f64,
) -> (f64, Vec<f64>) {
    let stride = layout.stride();
    let d = layout.n_features;
    let n = x.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; layout.len()];
    let mut z = vec![0.0; layout.rows];
    for (xi, &yi) in x.iter().zip(y) {
        let c = class_weights[yi];
        if c == 0.0 {
            continue;
        }
        for (r, zr) in z.iter_mut().enumerate() {
            let block = &params[r * stride..(r + 1) * stride];
            *zr = dot(&block[..d], xi) + block[d];
        }
        if layout.rows == 1 {
            let t = if yi == 1 { 1.0 } else { 0.0 };
            loss += c * (softplus(z[0]) - t * z[0]);
            let g = c * (sigmoid(z[0]) - t);
            accumulate(&mut grad[..stride], xi, g);
        } else {
            let p = softmax(&z);
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + libm::log(z.iter().map(|v| libm::exp(v - max)).sum::<f64>());
            loss += c * (lse - z[yi]);
            for (r, pr) in p.iter().enumerate() {
                let g = c * (pr - if r == yi { 1.0 } else { 0.0 });
                accumulate(&mut grad[r * stride..(r + 1) * stride], xi, g);
            }
        }
    }
    loss /= n;
    for g in &mut grad {
        *g /= n;
    }
    for r in 0..layout.rows {
        for j in 0..d {
            let w = params[r * stride + j];
            loss += 0.5 * lambda * w * w;
            grad[r * stride + j] += lambda * w;
        }
    }
    (loss, grad)
}

fn accumulate(block: &mut [f64], xi: &[f64], g: f64) {
    let d = xi.len();
    for (b, x) in block[..d].iter_mut().zip(xi) {
        *b += g * x;
    }
    block[d] += g;
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes [`objective`] from zero by gradient descent with backtracking.
pub fn fit(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    class_weights: &[f64],
    lambda: f64,
    max_iter: usize,
    tolerance: f64,
) -> FitResult {
    let layout = ParamLayout::new(n_classes, x.first().map_or(0, Vec::len));
    let mut params = vec![0.0; layout.len()];
    let (mut f, mut g) = objective(&params, layout, x, y, class_weights, lambda);
    let mut step = 1.0;
    let mut candidate = vec![0.0; params.len()];
    for iter in 0..max_iter {
        let gnorm2: f64 = g.iter().map(|v| v * v).sum();
        if libm::sqrt(gnorm2) < tolerance {
            return FitResult {
                params,
                iterations: iter,
                converged: true,
            };
        }
        let mut accepted = None;
        while step > 1e-20 {
            for ((c, p), gi) in candidate.iter_mut().zip(&params).zip(&g) {
                *c = p - step * gi;
            }
            let (fc, gc) = objective(&candidate, layout, x, y, class_weights, lambda);
            if fc <= f - 1e-4 * step * gnorm2 {
                accepted = Some((fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((fc, gc)) = accepted else {
            // No descent possible at machine precision.
            return FitResult {
                params,
                iterations: iter,
                converged: libm::sqrt(gnorm2) < tolerance,
            };
        };
        core::mem::swap(&mut params, &mut candidate);
        f = fc;
        g = gc;
        step = (step * 2.0).min(1e6);
    }
    let converged = libm::sqrt(g.iter().map(|v| v * v).sum::<f64>()) < tolerance;
    FitResult {
        params,
        iterations: max_iter,
        converged,
    }
}

fn validate(x: &[Vec<f64>], y: &[usize], classes: &[String], cfg: &TrainConfig) -> Result<usize, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if classes.len() < 2 {
        return Err(Error::InvalidInput("at least two classes are required".into()));
    }
    if cfg.folds < 2 {
        return Err(Error::InvalidInput("at least two folds are required".into()));
    }
    if x.len() < cfg.folds {
        return Err(Error::InvalidInput(format!(
            "{} examples cannot fill {} folds",
            x.len(),
            cfg.folds
        )));
    }
    if cfg.grid.is_empty() || cfg.grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidInput(
            "regularization grid must be non-empty with positive values".into(),
        ));
    }
    let d = x[0].len();
    for (row, xi) in x.iter().enumerate() {
        if xi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: xi.len(),
            });
        }
        if let Some(col) = xi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }
    let mut seen = vec![false; classes.len()];
    for &c in y {
        if c >= classes.len() {
            return Err(Error::InvalidInput(format!("label index {c} out of range")));
        }
        seen[c] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::MissingClass(classes[missing].clone()));
    }
    Ok(d)
}

fn weights_for(y: &[usize], n_classes: usize, balanced: bool) -> Vec<f64> {
    if balanced {
        balanced_class_weights(y, n_classes)
    } else {
        vec![1.0; n_classes]
    }
}

fn unpack(params: &[f64], layout: ParamLayout) -> (Vec<Vec<f64>>, Vec<f64>) {
    let stride = layout.stride();
    let d = layout.n_features;
    let weights = (0..layout.rows)
        .map(|r| params[r * stride..r * stride + d].to_vec())
        .collect();
    let bias = (0..layout.rows).map(|r| params[r * stride + d]).collect();
    (weights, bias)
}

/// Picks λ from `cfg.grid` by k-fold macro-F1 (first best wins on ties)
/// and refits on all data.
pub fn train_logreg(
    x: &[Vec<f64>],
    y: &[usize],
    classes: &[String],
    feature_names: &[String],
    cfg: &TrainConfig,
) -> Result<LogRegModel, Error> {
    let d = validate(x, y, classes, cfg)?;
    if !feature_names.is_empty() && feature_names.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: feature_names.len(),
        });
    }
    let k = classes.len();
    let layout = ParamLayout::new(k, d);
    let fold_of = stratified_folds(y, cfg.folds, cfg.seed);

    let mut grid = Vec::with_capacity(cfg.grid.len());
    for &lambda in &cfg.grid {
        let mut total = 0.0;
        for fold in 0..cfg.folds {
            let (mut tx, mut ty, mut vx, mut vy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for (i, &f) in fold_of.iter().enumerate() {
                if f == fold {
                    vx.push(x[i].clone());
                    vy.push(y[i]);
                } else {
                    tx.push(x[i].clone());
                    ty.push(y[i]);
                }
            }
            let fitted = fit(
                &tx,
                &ty,
                k,
                &weights_for(&ty, k, cfg.balanced),
                lambda,
                cfg.max_iter,
                cfg.tolerance,
            );
            let (weights, bias) = unpack(&fitted.params, layout);
            let probe = LogRegModel {
                schema_version: SCHEMA_VERSION,
                classes: classes.to_vec(),
                feature_names: Vec::new(),
                weights,
                bias,
                lambda,
                class_weights: BTreeMap::new(),
                grid: Vec::new(),
                iterations: 0,
                converged: false,
            };
            let pred: Vec<usize> = vx
                .iter()
                .map(|xi| probe.predict(xi).map(|p| p.label_index))
                .collect::<Result<_, _>>()?;
            total += classification_report(&vy, &pred, None)?.macro_f1;
        }
        grid.push(GridPoint {
            lambda,
            mean_macro_f1: total / cfg.folds as f64,
        });
    }

    let best = grid
        .iter()
        .enumerate()
        .fold(0, |best, (i, g)| if g.mean_macro_f1 > grid[best].mean_macro_f1 { i } else { best });
    let lambda = grid[best].lambda;
    let cw = weights_for(y, k, cfg.balanced);
    let fitted = fit(x, y, k, &cw, lambda, cfg.max_iter, cfg.tolerance);
    let (weights, bias) = unpack(&fitted.params, layout);
    Ok(LogRegModel {
        schema_version: SCHEMA_VERSION,
        classes: classes.to_vec(),
        feature_names: feature_names.to_vec(),
        weights,
        bias,
        lambda,
        class_weights: classes.iter().cloned().zip(cw).collect(),
        grid,
        iterations: fitted.iterations,
        converged: fitted.converged,
    })
}
