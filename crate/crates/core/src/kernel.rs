//! The exchangeable pair kernel.
//!
//! Similarity between two item pairs depends only on how many slots they
//! share: `kappa_s` for identical trials, `kappa_o` when exactly one slot
//! matches and `kappa_d` otherwise. Together with the ridge strength `c` the
//! model's behavior reduces to two numbers, the conjunctivity `alpha` and the
//! effective regularization `c~ = c * (kappa_s - kappa_d)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tasks::{Dataset, ItemPair};

/// Inverse regularization strength: finite and positive, or the min-norm limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    Finite(f64),
    Infinite,
}

impl Ridge {
    pub fn new(c: f64) -> Result<Self> {
        if c == f64::INFINITY {
            return Ok(Ridge::Infinite);
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "c must be positive or infinite, got {c}"
            )));
        }
        Ok(Ridge::Finite(c))
    }

    /// `1/c`, zero for the min-norm limit.
    pub fn inverse(&self) -> f64 {
        match *self {
            Ridge::Finite(c) => 1.0 / c,
            Ridge::Infinite => 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Ridge::Infinite)
    }
}

impl fmt::Display for Ridge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ridge::Finite(c) => write!(f, "{c}"),
            Ridge::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Ridge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "Infinite" | "Inf" => Ok(Ridge::Infinite),
            other => {
                let c: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid ridge strength {other:?}")))?;
                Ridge::new(c)
            }
        }
    }
}

impl Serialize for Ridge {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Ridge::Finite(c) => serializer.serialize_f64(c),
            Ridge::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ridge {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RidgeVisitor;

        impl Visitor<'_> for RidgeVisitor {
            type Value = Ridge;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Ridge, E> {
                Ridge::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Ridge, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Ridge, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Ridge, E> {
                if v == "inf" {
                    Ok(Ridge::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(RidgeVisitor)
    }
}

/// Relative slack on the `alpha in [0, 1]` bounds, so that parameters built
/// from `alpha` by floating point arithmetic are accepted.
const BOUND_SLACK: f64 = 1e-12;

/// The exchangeable kernel triple plus the ridge strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    kappa_s: f64,
    kappa_o: f64,
    kappa_d: f64,
    c: Ridge,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernelParams {
    kappa_s: f64,
    kappa_o: f64,
    kappa_d: f64,
    c: Ridge,
}

impl<'de> Deserialize<'de> for KernelParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawKernelParams::deserialize(deserializer)?;
        KernelParams::new(raw.kappa_s, raw.kappa_o, raw.kappa_d, raw.c).map_err(de::Error::custom)
    }
}

impl KernelParams {
    pub fn new(kappa_s: f64, kappa_o: f64, kappa_d: f64, c: Ridge) -> Result<Self> {
        if !(kappa_s.is_finite() && kappa_o.is_finite() && kappa_d.is_finite()) {
            return Err(Error::InvalidKernel("kernel values must be finite".into()));
        }
        if kappa_d < 0.0 {
            return Err(Error::InvalidKernel(format!(
                "kappa_d must be non-negative, got {kappa_d}"
            )));
        }
        let delta_s = kappa_s - kappa_d;
        let delta_o = kappa_o - kappa_d;
        if delta_s <= 0.0 {
            return Err(Error::InvalidKernel(format!(
                "kappa_s must exceed kappa_d, got kappa_s={kappa_s}, kappa_d={kappa_d}"
            )));
        }
        let slack = BOUND_SLACK * delta_s;
        if delta_o < -slack || 2.0 * delta_o > delta_s + slack {
            return Err(Error::InvalidKernel(format!(
                "need 0 <= 2(kappa_o - kappa_d) <= kappa_s - kappa_d, got kappa_s={kappa_s}, \
                 kappa_o={kappa_o}, kappa_d={kappa_d}"
            )));
        }
        if let Ridge::Finite(v) = c {
            Ridge::new(v)?;
        }
        Ok(KernelParams {
            kappa_s,
            kappa_o,
            kappa_d,
            c,
        })
    }

    /// Canonical gauge `kappa_s = 1`, `kappa_d = 0`, `kappa_o = (1 - alpha)/2`,
    /// with `c = 1/creg_inv` (infinite when `creg_inv = 0`).
    pub fn from_alpha(alpha: f64, creg_inv: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidKernel(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if !(creg_inv.is_finite() && creg_inv >= 0.0) {
            return Err(Error::InvalidKernel(format!(
                "effective inverse regularization must be finite and >= 0, got {creg_inv}"
            )));
        }
        let c = if creg_inv == 0.0 {
            Ridge::Infinite
        } else {
            Ridge::new(1.0 / creg_inv)?
        };
        KernelParams::new(1.0, (1.0 - alpha) / 2.0, 0.0, c)
    }

    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    pub fn kappa_o(&self) -> f64 {
        self.kappa_o
    }

    pub fn kappa_d(&self) -> f64 {
        self.kappa_d
    }

    pub fn c(&self) -> Ridge {
        self.c
    }

    pub fn with_ridge(self, c: Ridge) -> Self {
        KernelParams { c, ..self }
    }

    pub fn delta_s(&self) -> f64 {
        self.kappa_s - self.kappa_d
    }

    pub fn delta_o(&self) -> f64 {
        self.kappa_o - self.kappa_d
    }
}

/// Slot-wise similarity of two pairs.
pub fn pair_kernel(params: &KernelParams, a: ItemPair, b: ItemPair) -> f64 {
    match (a.j == b.j, a.k == b.k) {
        (true, true) => params.kappa_s,
        (true, false) | (false, true) => params.kappa_o,
        (false, false) => params.kappa_d,
    }
}

/// `alpha = 1 - 2 (kappa_o - kappa_d) / (kappa_s - kappa_d)`, clamped to `[0, 1]`.
pub fn conjunctivity(params: &KernelParams) -> f64 {
    (1.0 - 2.0 * params.delta_o() / params.delta_s()).clamp(0.0, 1.0)
}

/// `1 / (c * (kappa_s - kappa_d))`; zero in the min-norm limit.
pub fn effective_reg_inv(params: &KernelParams) -> f64 {
    match params.c {
        Ridge::Finite(c) => 1.0 / (c * params.delta_s()),
        Ridge::Infinite => 0.0,
    }
}

/// Training-set Gram matrix.
pub fn gram_matrix(params: &KernelParams, data: &Dataset) -> DMatrix<f64> {
    let m = data.len();
    DMatrix::from_fn(m, m, |a, b| {
        pair_kernel(params, data.examples[a].pair, data.examples[b].pair)
    })
}

/// Similarities between `pair` and every training example.
pub fn test_kernel_vector(params: &KernelParams, data: &Dataset, pair: ItemPair) -> DVector<f64> {
    DVector::from_iterator(
        data.len(),
        data.examples.iter().map(|e| pair_kernel(params, e.pair, pair)),
    )
}
