//! Exact numerical solution of the kernel ridge dual `(K + I/c) a = y`.
//!
//! Every closed-form statement in this crate is checked against this module.

use nalgebra::DVector;

use crate::error::Result;
use crate::kernel::{gram_matrix, test_kernel_vector, KernelParams};
use crate::linalg::solve_psd;
use crate::tasks::{Dataset, ItemPair};

#[derive(Debug, Clone)]
pub struct DualSolution {
    coefficients: DVector<f64>,
    params: KernelParams,
    data: Dataset,
    condition: f64,
    min_norm: bool,
}

/// Solves the dual system for `data`. In the min-norm limit a numerically
/// singular Gram matrix falls back to the pseudo-inverse.
pub fn dual_solve(params: &KernelParams, data: &Dataset) -> Result<DualSolution> {
    let mut system = gram_matrix(params, data);
    let ridge = params.c().inverse();
    for i in 0..data.len() {
        system[(i, i)] += ridge;
    }
    let y = DVector::from_vec(data.labels());
    let solved = solve_psd(system, &y)?;
    Ok(DualSolution {
        coefficients: solved.x,
        params: *params,
        data: data.clone(),
        condition: solved.condition,
        min_norm: solved.min_norm,
    })
}

impl DualSolution {
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Eigenvalue-ratio condition estimate of `K + I/c`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Whether the pseudo-inverse fallback was needed.
    pub fn is_min_norm_fallback(&self) -> bool {
        self.min_norm
    }

    /// Dual coefficient attached to a training pair.
    pub fn coefficient(&self, pair: ItemPair) -> Option<f64> {
        self.data.position(pair).map(|i| self.coefficients[i])
    }

    /// Prediction `<k_test(pair), a>`.
    pub fn predict(&self, pair: ItemPair) -> f64 {
        test_kernel_vector(&self.params, &self.data, pair).dot(&self.coefficients)
    }

    /// Per-item ranks read off the dual coefficients.
    ///
    /// For an untrained pair `f(j, k) = kappa_d * sum(a) + r1(j) - r2(k)` with
    /// `r1(j) = delta_o * sum of a over examples whose first slot is j` and
    /// `r2(k) = -delta_o * sum of a over examples whose second slot is k`.
    /// Returns `r1`, indexed from item 1 at position 0.
    pub fn ranks(&self) -> Vec<f64> {
        self.slot_ranks().0
    }

    /// `(r1, r2)`; the two agree when the solution is slot-swap antisymmetric.
    pub fn slot_ranks(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.data.spec.n();
        let delta_o = self.params.delta_o();
        let mut first = vec![0.0; n];
        let mut second = vec![0.0; n];
        for (e, &a) in self.data.examples.iter().zip(self.coefficients.iter()) {
            first[e.pair.j - 1] += a;
            second[e.pair.k - 1] += a;
        }
        (
            first.into_iter().map(|s| delta_o * s).collect(),
            second.into_iter().map(|s| -delta_o * s).collect(),
        )
    }
}

/// Free-function form of [`DualSolution::predict`].
pub fn predict(sol: &DualSolution, pair: ItemPair) -> f64 {
    sol.predict(pair)
}
