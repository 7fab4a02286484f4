//! Explicit feature space for the exchangeable kernel.
//!
//! A pair `(j, k)` maps to four populations: a one-hot code of `j`, a one-hot
//! code of `k`, a one-hot code of the conjunction `(j, k)` and a constant unit,
//! scaled by `s1, s1, s2, s0`. Inner products of these vectors reproduce the
//! kernel exactly, and the ridge readout decomposes as
//! `f(j, k) = r_j - r_k + t_{j,k} + b`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, KernelParams, Ridge};
use crate::tasks::{Dataset, ItemPair};

/// Four-hot feature map for `n` items.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourHotMap {
    pub n: usize,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

impl FourHotMap {
    pub fn new(n: usize, params: &KernelParams) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidTask(format!("need at least 2 items, got {n}")));
        }
        let r0 = params.kappa_d();
        let r1 = params.delta_o();
        let r2 = params.delta_s() - 2.0 * params.delta_o();
        // KernelParams admits 2 delta_o up to a relative 1e-12 above delta_s.
        let slack = 1e-12 * params.delta_s();
        if r0 < 0.0 || r1 < 0.0 || r2 < -slack {
            return Err(Error::InvalidKernel(format!(
                "negative population variance: s0^2={r0}, s1^2={r1}, s2^2={r2}"
            )));
        }
        Ok(FourHotMap {
            n,
            s0: r0.sqrt(),
            s1: r1.sqrt(),
            s2: r2.max(0.0).sqrt(),
        })
    }

    pub fn dimension(&self) -> usize {
        2 * self.n + self.n * self.n + 1
    }

    fn conj_index(&self, pair: ItemPair) -> usize {
        2 * self.n + (pair.j - 1) * self.n + (pair.k - 1)
    }
}

/// Feature vector of `pair`: `[s1 e_j | s1 e_k | s2 e_(j,k) | s0]`.
pub fn four_hot_features(map: &FourHotMap, pair: ItemPair) -> DVector<f64> {
    let mut z = DVector::zeros(map.dimension());
    z[pair.j - 1] = map.s1;
    z[map.n + pair.k - 1] = map.s1;
    z[map.conj_index(pair)] = map.s2;
    z[map.dimension() - 1] = map.s0;
    z
}

/// Design matrix with one row per example of `data`.
pub fn design_matrix(map: &FourHotMap, data: &Dataset) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(data.len(), map.dimension());
    for (row, e) in data.examples.iter().enumerate() {
        z.set_row(row, &four_hot_features(map, e.pair).transpose());
    }
    z
}

/// `max |Z Z^T - K|` over the training examples of `data`.
pub fn verify_kernel_equivalence(map: &FourHotMap, params: &KernelParams, data: &Dataset) -> f64 {
    let z = design_matrix(map, data);
    let zz = &z * z.transpose();
    let k = gram_matrix(params, data);
    (zz - k).amax()
}

/// Readout decomposition `f(j, k) = r_j - r_k + t_{j,k} + b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub n: usize,
    /// Slot-one ranks, item 1 first.
    pub r: Vec<f64>,
    /// Negated slot-two readout; equals `r` when the slots are symmetric.
    pub r_second: Vec<f64>,
    /// Conjunctive readout, row-major `(j - 1) n + (k - 1)`.
    pub t: Vec<f64>,
    pub b: f64,
    /// Squared norm of the primal weight vector.
    pub weight_norm_sq: f64,
}

impl Decomposition {
    pub fn conj(&self, pair: ItemPair) -> f64 {
        self.t[(pair.j - 1) * self.n + (pair.k - 1)]
    }

    /// Readout of the primal weights on `pair`.
    pub fn predict(&self, pair: ItemPair) -> f64 {
        self.r[pair.j - 1] - self.r_second[pair.k - 1] + self.conj(pair) + self.b
    }

    /// `max |r_j - r_second_j|`.
    pub fn slot_asymmetry(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.r_second)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

const SVD_EPS: f64 = 1e-20;
const SVD_MAX_ITER: usize = 100_000;

/// Ridge regression directly on the four-hot design.
///
/// Computed from a thin SVD of the design `Z = V S U^T`, as
/// `w = U diag(s / (s^2 + 1/c)) V^T y`;
/// at `c = inf` singular values below `1e-10` of the largest are dropped, which
/// gives the minimum-norm interpolant.
pub fn ridge_primal(map: &FourHotMap, data: &Dataset, c: Ridge) -> Result<Decomposition> {
    if data.spec.n() != map.n {
        return Err(Error::InvalidTask(format!(
            "feature map has n={}, dataset has n={}",
            map.n,
            data.spec.n()
        )));
    }
    let z = design_matrix(map, data);
    let y = DVector::from_vec(data.labels());
    // The default convergence threshold of the SVD stops at ~1e-10 relative
    // reconstruction error, which is too loose for comparisons at 1e-8.
    let svd = z
        .transpose()
        .try_svd(true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical {
            message: "SVD of the four-hot design did not converge".into(),
            condition: f64::NAN,
        })?;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => {
            return Err(Error::Numerical {
                message: "SVD of the four-hot design failed".into(),
                condition: f64::NAN,
            })
        }
    };
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return Err(Error::Numerical {
            message: "four-hot design is identically zero".into(),
            condition: f64::INFINITY,
        });
    }
    let ridge = c.inverse();
    let vty = &vt * &y;
    let gains = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values.iter().zip(vty.iter()).map(|(&s, &v)| {
            if ridge == 0.0 && s <= 1e-10 * smax {
                0.0
            } else {
                v * s / (s * s + ridge)
            }
        }),
    );
    let w = u * gains;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: "non-finite primal weights".into(),
            condition: f64::NAN,
        });
    }
    let n = map.n;
    Ok(Decomposition {
        n,
        r: (0..n).map(|j| map.s1 * w[j]).collect(),
        r_second: (0..n).map(|k| -map.s1 * w[n + k]).collect(),
        t: (0..n * n).map(|i| map.s2 * w[2 * n + i]).collect(),
        b: map.s0 * w[map.dimension() - 1],
        weight_norm_sq: w.norm_squared(),
    })
}

fn check_open_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `2/(1 - alpha) |r|^2 + 1/alpha |t|^2`.
pub fn cost(r: &[f64], t: &[f64], alpha: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    Ok(2.0 / (1.0 - alpha) * sq(r) + sq(t) / alpha)
}

/// `delta_s |w|^2` of the weights behind `(r, t)` with `r_second = r` and zero
/// bias: `4/(1 - alpha) |r|^2 + 1/alpha |t|^2`. The rank term counts both item
/// populations, so it is twice the corresponding term of [`cost`].
pub fn weight_norm_cost(r: &[f64], t: &[f64], alpha: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    Ok(4.0 / (1.0 - alpha) * sq(r) + sq(t) / alpha)
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{build_training_set, TaskSpec};

    fn pair(j: usize, k: usize) -> ItemPair {
        ItemPair::new(j, k).unwrap()
    }

    #[test]
    fn feature_support() {
        let params = KernelParams::new(2.0, 1.0, 0.5, Ridge::Infinite).unwrap();
        let map = FourHotMap::new(5, &params).unwrap();
        assert_eq!(map.dimension(), 36);
        let z = four_hot_features(&map, pair(2, 4));
        assert_eq!(z.iter().filter(|v| **v != 0.0).count(), 4);

        let map = FourHotMap::new(5, &KernelParams::from_alpha(0.3, 0.0).unwrap()).unwrap();
        assert_eq!(four_hot_features(&map, pair(2, 4)).iter().filter(|v| **v != 0.0).count(), 3);
    }

    #[test]
    fn one_shared_slot_inner_product() {
        let params = KernelParams::new(2.0, 1.0, 0.25, Ridge::Infinite).unwrap();
        let map = FourHotMap::new(4, &params).unwrap();
        let ip = four_hot_features(&map, pair(1, 2)).dot(&four_hot_features(&map, pair(1, 3)));
        assert!((ip - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gram_identity_exact_for_integer_kernel() {
        let params = KernelParams::new(2.0, 1.0, 0.0, Ridge::Infinite).unwrap();
        let map = FourHotMap::new(5, &params).unwrap();
        let data = build_training_set(&TaskSpec::ti(5).unwrap());
        assert_eq!(verify_kernel_equivalence(&map, &params, &data), 0.0);
    }

    #[test]
    fn compositional_limit_has_no_conjunctive_readout() {
        let params = KernelParams::from_alpha(0.0, 1.0).unwrap();
        let map = FourHotMap::new(9, &params).unwrap();
        assert_eq!(map.s2, 0.0);
        let dec = ridge_primal(&map, &build_training_set(&TaskSpec::ti_exc(9, 6, 4).unwrap()), params.c()).unwrap();
        assert!(dec.t.iter().all(|&t| t == 0.0));
        assert!(dec.b.abs() < 1e-10);
    }

    #[test]
    fn cost_values() {
        assert_eq!(cost(&[0.0; 3], &[0.0; 9], 0.4).unwrap(), 0.0);
        let r = [1.0, -2.0];
        let t = [0.5, 0.5, 1.0];
        assert!((cost(&r, &t, 0.5).unwrap() - (4.0 * 5.0 + 2.0 * 1.5)).abs() < 1e-14);
        assert!((weight_norm_cost(&r, &t, 0.5).unwrap() - (8.0 * 5.0 + 2.0 * 1.5)).abs() < 1e-14);
        assert!(matches!(cost(&r, &t, 0.0), Err(Error::Domain(_))));
        assert!(matches!(cost(&r, &t, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_mismatched_n() {
        let params = KernelParams::from_alpha(0.3, 0.0).unwrap();
        let map = FourHotMap::new(6, &params).unwrap();
        let data = build_training_set(&TaskSpec::ti(5).unwrap());
        assert!(ridge_primal(&map, &data, params.c()).is_err());
    }
}
