//! Finite-width random feature networks `phi(x) = sigma(W x)` on item pairs.
//!
//! Items are one-hot vectors in `R^d`, a pair is the concatenation
//! `[x_j; x_k]`, and the induced kernel is the raw inner product
//! `phi(x)^T phi(x')`. Because items are orthogonal the infinite-width kernel
//! is exchangeable; at finite width it only approximately is.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelParams, Ridge};
use crate::linalg::solve_psd;
use crate::oracle::dual_solve;
use crate::tasks::{build_training_set, Dataset, ItemPair, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Relu,
    Tanh,
    Identity,
}

impl Nonlinearity {
    fn apply(self, x: f64) -> f64 {
        match self {
            Nonlinearity::Relu => x.max(0.0),
            Nonlinearity::Tanh => x.tanh(),
            Nonlinearity::Identity => x,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Nonlinearity::Relu => "relu",
            Nonlinearity::Tanh => "tanh",
            Nonlinearity::Identity => "identity",
        }
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Nonlinearity::Relu),
            "tanh" => Ok(Nonlinearity::Tanh),
            "identity" | "linear" => Ok(Nonlinearity::Identity),
            other => Err(Error::Parse(format!("unknown nonlinearity '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub n: usize,
    /// Per-item input dimension; items are the first `n` basis vectors.
    pub d: usize,
    pub width: usize,
    pub nonlinearity: Nonlinearity,
    /// Variance of the entries of `W`.
    pub weight_var: f64,
    pub seed: u64,
}

impl FeatureConfig {
    /// `d = n` and weight variance `1 / (2d)`.
    pub fn new(n: usize, width: usize, nonlinearity: Nonlinearity, seed: u64) -> Result<Self> {
        let cfg = FeatureConfig {
            n,
            d: n,
            width,
            nonlinearity,
            weight_var: 1.0 / (2.0 * n as f64),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidTask(format!("need at least 2 items, got {}", self.n)));
        }
        if self.d < self.n {
            return Err(Error::Domain(format!(
                "input dimension d={} cannot hold {} orthogonal items",
                self.d, self.n
            )));
        }
        if self.width == 0 {
            return Err(Error::Domain("width must be at least 1".into()));
        }
        if !(self.weight_var.is_finite() && self.weight_var > 0.0) {
            return Err(Error::Domain(format!(
                "weight variance must be positive, got {}",
                self.weight_var
            )));
        }
        Ok(())
    }
}

/// Features of all `n^2` ordered pairs, including `j = k`; row `(j-1) n + (k-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub config: FeatureConfig,
    pub rows: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn n(&self) -> usize {
        self.config.n
    }

    fn row_index(&self, j: usize, k: usize) -> usize {
        (j - 1) * self.config.n + (k - 1)
    }

    pub fn row(&self, pair: ItemPair) -> RowDVector<f64> {
        self.rows.row(self.row_index(pair.j, pair.k)).into_owned()
    }
}

/// Draws `W` and evaluates `sigma(W [x_j; x_k])` for every ordered pair.
pub fn sample_feature_map(cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.weight_var.sqrt())
        .map_err(|e| Error::Domain(format!("weight distribution: {e}")))?;
    // Only the columns of W hit by one-hot inputs matter; the remaining d - n
    // columns per slot are still drawn so the stream depends on d.
    let w = DMatrix::from_fn(cfg.width, 2 * cfg.d, |_, _| normal.sample(&mut rng));
    let n = cfg.n;
    let mut rows = DMatrix::zeros(n * n, cfg.width);
    for j in 0..n {
        for k in 0..n {
            let pre = w.column(j) + w.column(cfg.d + k);
            let act = pre.map(|x| cfg.nonlinearity.apply(x));
            rows.set_row(j * n + k, &act.transpose());
        }
    }
    Ok(FeatureMatrix { config: *cfg, rows })
}

/// Category means of the feature inner products and the implied conjunctivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalKernel {
    pub kappa_s: f64,
    pub kappa_o: f64,
    pub kappa_d: f64,
    pub alpha: f64,
    /// Within-category variances of the inner products.
    pub var_s: f64,
    pub var_o: f64,
    pub var_d: f64,
}

impl EmpiricalKernel {
    pub fn params(&self, c: Ridge) -> Result<KernelParams> {
        KernelParams::new(self.kappa_s, self.kappa_o, self.kappa_d, c)
    }

    /// The same kernel with `kappa_d` moved to zero. Odd nonlinearities can give
    /// `kappa_d < 0`; on label-balanced training sets predictions do not depend
    /// on `kappa_d`.
    pub fn shifted_params(&self, c: Ridge) -> Result<KernelParams> {
        KernelParams::new(self.kappa_s - self.kappa_d, self.kappa_o - self.kappa_d, 0.0, c)
    }
}

/// Averages inner products over all ordered pairs of rows, grouped by the
/// number of shared slots.
pub fn empirical_kernel_params(features: &FeatureMatrix) -> Result<EmpiricalKernel> {
    let n = features.n();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "need n >= 3 for every kernel category to be populated, got {n}"
        )));
    }
    let gram = &features.rows * features.rows.transpose();
    let mut acc = [(0.0, 0.0, 0usize); 3];
    for a in 0..n * n {
        let (ja, ka) = (a / n, a % n);
        for b in 0..n * n {
            let (jb, kb) = (b / n, b % n);
            let cat = match (ja == jb, ka == kb) {
                (true, true) => 0,
                (true, false) | (false, true) => 1,
                (false, false) => 2,
            };
            let v = gram[(a, b)];
            acc[cat].0 += v;
            acc[cat].1 += v * v;
            acc[cat].2 += 1;
        }
    }
    let stats = acc.map(|(s, s2, c)| {
        let mean = s / c as f64;
        (mean, (s2 / c as f64 - mean * mean).max(0.0))
    });
    let (ks, ko, kd) = (stats[0].0, stats[1].0, stats[2].0);
    let ds = ks - kd;
    if !(ds > 0.0) {
        return Err(Error::Degenerate(format!(
            "empirical kernel has kappa_s <= kappa_d ({ks} vs {kd})"
        )));
    }
    Ok(EmpiricalKernel {
        kappa_s: ks,
        kappa_o: ko,
        kappa_d: kd,
        alpha: 1.0 - 2.0 * (ko - kd) / ds,
        var_s: stats[0].1,
        var_o: stats[1].1,
        var_d: stats[2].1,
    })
}

/// Ridge readout fitted on the finite feature matrix.
#[derive(Debug, Clone)]
pub struct RfRidge {
    features: FeatureMatrix,
    weights: DVector<f64>,
}

impl RfRidge {
    /// Solves the ridge problem through the `N x N` feature Gram matrix, which
    /// is exact for the primal problem on `phi`.
    pub fn fit(features: FeatureMatrix, data: &Dataset, c: Ridge) -> Result<Self> {
        if data.spec.n() != features.n() {
            return Err(Error::InvalidTask(format!(
                "features for n={}, dataset for n={}",
                features.n(),
                data.spec.n()
            )));
        }
        let train = DMatrix::from_rows(
            &data
                .examples
                .iter()
                .map(|e| features.row(e.pair))
                .collect::<Vec<_>>(),
        );
        let mut system = &train * train.transpose();
        let ridge = c.inverse();
        for i in 0..data.len() {
            system[(i, i)] += ridge;
        }
        let a = solve_psd(system, &DVector::from_vec(data.labels()))?.x;
        let weights = train.transpose() * a;
        Ok(RfRidge { features, weights })
    }

    pub fn predict(&self, pair: ItemPair) -> f64 {
        (self.features.row(pair) * &self.weights)[0]
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }
}

/// Samples features for `cfg`, fits ridge on `data` and predicts `pair`.
pub fn rf_ridge_predict(cfg: &FeatureConfig, data: &Dataset, c: Ridge, pair: ItemPair) -> Result<f64> {
    Ok(RfRidge::fit(sample_feature_map(cfg)?, data, c)?.predict(pair))
}

/// Infinite-width `alpha` of a ReLU network on orthogonal items, from the
/// first-order arc-cosine kernel at input correlations 1, 1/2 and 0.
pub fn relu_alpha_limit() -> f64 {
    let k = |rho: f64| (1.0 - rho * rho).sqrt() + (std::f64::consts::PI - rho.acos()) * rho;
    let (ks, ko, kd) = (k(1.0), k(0.5), k(0.0));
    1.0 - 2.0 * (ko - kd) / (ks - kd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthSweepRow {
    pub width: usize,
    pub seed: u64,
    pub alpha_hat: f64,
    /// `max |f_rf - f_kernel|` over all ordered pairs.
    pub max_gap: f64,
    /// `max |f_rf(j,k) + f_rf(k,j)|`.
    pub max_antisym: f64,
}

/// Compares ridge on random features with the exchangeable-kernel model whose
/// `kappa` values are estimated from the same features.
pub fn width_sweep_cell(spec: &TaskSpec, cfg: &FeatureConfig, c: Ridge) -> Result<WidthSweepRow> {
    if cfg.n != spec.n() {
        return Err(Error::InvalidTask(format!(
            "feature config has n={}, task has n={}",
            cfg.n,
            spec.n()
        )));
    }
    let features = sample_feature_map(cfg)?;
    let emp = empirical_kernel_params(&features)?;
    let data = build_training_set(spec);
    let kernel = dual_solve(&emp.shifted_params(c)?, &data)?;
    let rf = RfRidge::fit(features, &data, c)?;
    let mut max_gap: f64 = 0.0;
    let mut max_antisym: f64 = 0.0;
    for p in spec.all_pairs() {
        let f = rf.predict(p);
        max_gap = max_gap.max((f - kernel.predict(p)).abs());
        max_antisym = max_antisym.max((f + rf.predict(p.swapped())).abs());
    }
    Ok(WidthSweepRow {
        width: cfg.width,
        seed: cfg.seed,
        alpha_hat: emp.alpha,
        max_gap,
        max_antisym,
    })
}

/// Runs [`width_sweep_cell`] for every `(width, seed)`; rows come back in
/// width-major, seed-minor order regardless of scheduling.
pub fn width_sweep(
    spec: &TaskSpec,
    widths: &[usize],
    seeds: &[u64],
    nonlinearity: Nonlinearity,
    c: Ridge,
) -> Result<Vec<WidthSweepRow>> {
    let cells: Vec<(usize, u64)> = widths
        .iter()
        .flat_map(|&h| seeds.iter().map(move |&s| (h, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(h, s)| width_sweep_cell(spec, &FeatureConfig::new(spec.n(), h, nonlinearity, s)?, c))
        .collect()
}
