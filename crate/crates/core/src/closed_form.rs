//! Closed-form predictions of the exchangeable-kernel model on TI and TI with
//! one exception.
//!
//! Off the training set the model is a ranking system, `f(j, k) = r_j - r_k`,
//! with `r = r_ti + r_pert`. On training pairs it mixes the label back in:
//! `f(j, k) = m y + (1 - m)(r_j - r_k)` with `m = alpha / (alpha + c~^-1)`.
//!
//! Everything is parameterized by
//! `lambda = arccosh((1 + c~^-1) / (1 - alpha))`. The ratios below contain
//! hyperbolic functions of arguments up to `(n + 1) lambda`, so they are
//! evaluated with every term scaled by `exp(-(n + 1) lambda)`; nothing
//! overflows even when `n lambda` is far beyond 700.
//!
//! `lambda = 0` (`alpha = 0` with no regularization) is reported as
//! [`Error::Degenerate`]; the dual oracle handles that corner.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tasks::{build_training_set, Dataset, ItemPair, TaskKind, TaskSpec};

/// `sinh`/`cosh` multiplied by `exp(-shift)`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    shift: f64,
}

impl Scaled {
    fn sinh(&self, x: f64) -> f64 {
        0.5 * ((x - self.shift).exp() - (-x - self.shift).exp())
    }

    fn cosh(&self, x: f64) -> f64 {
        0.5 * ((x - self.shift).exp() + (-x - self.shift).exp())
    }

    /// `cosh(a) cosh(b)`.
    fn cosh_cosh(&self, a: f64, b: f64) -> f64 {
        0.5 * (self.cosh(a + b) + self.cosh(a - b))
    }

    /// `sinh(a) sinh(b)`.
    fn sinh_sinh(&self, a: f64, b: f64) -> f64 {
        0.5 * (self.cosh(a + b) - self.cosh(a - b))
    }

    /// `sinh(c) cosh(a) sinh(b)`.
    fn sinh_cosh_sinh(&self, c: f64, a: f64, b: f64) -> f64 {
        0.25 * (self.cosh(c + a + b) - self.cosh(c - a - b) - self.cosh(c + a - b)
            + self.cosh(c - a + b))
    }
}

/// `arccosh((1 + creg_inv) / (1 - alpha))`.
pub fn lambda_of(alpha: f64, creg_inv: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "lambda needs alpha in [0, 1), got {alpha}"
        )));
    }
    if !(creg_inv.is_finite() && creg_inv >= 0.0) {
        return Err(Error::Domain(format!(
            "creg_inv must be finite and >= 0, got {creg_inv}"
        )));
    }
    let arg = (1.0 + creg_inv) / (1.0 - alpha);
    let lambda = arg.acosh();
    if !(lambda > 0.0) {
        return Err(Error::Degenerate(format!(
            "lambda = 0 at alpha={alpha}, creg_inv={creg_inv}"
        )));
    }
    Ok(lambda)
}

/// The TI ranking system
/// `sinh(((n+1)/2 - j) lambda) / (sinh((n+1)/2 lambda) - sinh((n-1)/2 lambda))`.
pub fn rank_ti(n: usize, lam: f64, j: usize) -> f64 {
    debug_assert!(lam > 0.0 && j >= 1 && j <= n);
    let half = (n as f64 + 1.0) / 2.0;
    let sc = Scaled { shift: half * lam };
    let den = sc.sinh(half * lam) - sc.sinh((n as f64 - 1.0) / 2.0 * lam);
    sc.sinh((half - j as f64) * lam) / den
}

/// `cosh((min(i,j) - 1/2) lambda) cosh((n - max(i,j) + 1/2) lambda)`.
pub fn dtilde(n: usize, lam: f64, i: usize, j: usize) -> f64 {
    let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
    ((lo - 0.5) * lam).cosh() * ((n as f64 - hi + 0.5) * lam).cosh()
}

fn dtilde_scaled(sc: &Scaled, n: usize, lam: f64, i: usize, j: usize) -> f64 {
    let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
    sc.cosh_cosh((lo - 0.5) * lam, (n as f64 - hi + 0.5) * lam)
}

/// `G = cosh((q - 1/2) l) sinh((n - (p+q-1)/2) l) + cosh((n - p + 1/2) l) sinh((p+q-1)/2 l)`.
pub fn g_factor(n: usize, p: usize, q: usize, lam: f64) -> f64 {
    let (n, p, q) = (n as f64, p as f64, q as f64);
    let mid = (p + q - 1.0) / 2.0;
    ((q - 0.5) * lam).cosh() * ((n - mid) * lam).sinh()
        + ((n - p + 0.5) * lam).cosh() * (mid * lam).sinh()
}

/// `sinh((q - p)/2 lambda) * G`, scaled.
fn sinh_half_gap_times_g(sc: &Scaled, n: usize, p: usize, q: usize, lam: f64) -> f64 {
    let (nf, pf, qf) = (n as f64, p as f64, q as f64);
    let mid = (pf + qf - 1.0) / 2.0;
    let c = (qf - pf) / 2.0 * lam;
    sc.sinh_cosh_sinh(c, (qf - 0.5) * lam, (nf - mid) * lam)
        + sc.sinh_cosh_sinh(c, (nf - pf + 0.5) * lam, mid * lam)
}

/// Exception-induced perturbation of the ranking system at item `j`.
pub fn rank_pert(n: usize, p: usize, q: usize, lam: f64, j: usize) -> f64 {
    let sc = Scaled {
        shift: (n as f64 + 1.0) * lam,
    };
    let weight = 1.0 - rank_ti(n, lam, p) + rank_ti(n, lam, q);
    let den = pert_denominator(&sc, n, p, q, lam);
    weight * (dtilde_scaled(&sc, n, lam, j, p) - dtilde_scaled(&sc, n, lam, j, q)) / den
}

/// `sinh(lambda) sinh(n lambda) - 2 sinh((q - p)/2 lambda) G`, scaled. Positive.
fn pert_denominator(sc: &Scaled, n: usize, p: usize, q: usize, lam: f64) -> f64 {
    sc.sinh_sinh(lam, n as f64 * lam) - 2.0 * sinh_half_gap_times_g(sc, n, p, q, lam)
}

/// `m = alpha / (alpha + creg_inv)`.
pub fn memorization_coeff(alpha: f64, creg_inv: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !(creg_inv >= 0.0) {
        return Err(Error::Domain(format!(
            "need alpha in [0, 1] and creg_inv >= 0, got alpha={alpha}, creg_inv={creg_inv}"
        )));
    }
    if alpha == 0.0 && creg_inv == 0.0 {
        return Err(Error::Degenerate(
            "memorization coefficient undefined at alpha = 0, creg_inv = 0".into(),
        ));
    }
    Ok(alpha / (alpha + creg_inv))
}

/// Entry `(i, j)` (1-based) of the inverse of the `m x m` symmetric tridiagonal
/// Toeplitz matrix with diagonal `a` and off-diagonal `b`, valid for `a/b < -2`.
pub fn tridiag_inverse_entry(m: usize, a: f64, b: f64, i: usize, j: usize) -> Result<f64> {
    if m == 0 || i == 0 || j == 0 || i > m || j > m {
        return Err(Error::Domain(format!(
            "indices ({i},{j}) out of range for a {m}x{m} matrix"
        )));
    }
    if b == 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "need finite a and nonzero b, got a={a}, b={b}"
        )));
    }
    let ratio = a / b;
    if ratio == -2.0 {
        return Err(Error::Degenerate("a/b = -2 gives lambda = 0".into()));
    }
    if ratio > -2.0 {
        return Err(Error::Domain(format!("need a/b < -2, got {ratio}")));
    }
    let lam = (-a / (2.0 * b)).acosh();
    if !(lam > 0.0) {
        return Err(Error::Degenerate(format!("a/b = {ratio} rounds to lambda = 0")));
    }
    let m1 = m as f64 + 1.0;
    let sc = Scaled {
        shift: (m1 + 1.0) * lam,
    };
    let (fi, fj) = (i as f64, j as f64);
    let num = sc.cosh((m1 - (fj - fi).abs()) * lam) - sc.cosh((m1 - fi - fj) * lam);
    let den = 2.0 * b * sc.sinh_sinh(lam, m1 * lam);
    Ok(-num / den)
}

/// Dual coefficient of the exception pair `(p, q)` in the canonical gauge
/// `kappa_s = 1, kappa_d = 0`.
pub fn hbar(n: usize, p: usize, q: usize, alpha: f64, creg_inv: f64) -> Result<f64> {
    TaskSpec::ti_exc(n, p, q)?;
    if alpha == 1.0 {
        if !(creg_inv.is_finite() && creg_inv >= 0.0) {
            return Err(Error::Domain(format!("creg_inv must be >= 0, got {creg_inv}")));
        }
        // delta_o = 0 decouples the exception pair entirely.
        return Ok(1.0 / (1.0 + creg_inv));
    }
    let lam = lambda_of(alpha, creg_inv)?;
    Ok(hbar_at(n, p, q, alpha, creg_inv, lam))
}

fn hbar_at(n: usize, p: usize, q: usize, alpha: f64, creg_inv: f64, lam: f64) -> f64 {
    let delta_o = (1.0 - alpha) / 2.0;
    let sc = Scaled {
        shift: (n as f64 + 1.0) * lam,
    };
    let weight = 1.0 - rank_ti(n, lam, p) + rank_ti(n, lam, q);
    // tanh(lambda/2) * sinh((q-p)/2 lambda) G / sinh(n lambda)
    let coupling =
        (lam / 2.0).tanh() * sinh_half_gap_times_g(&sc, n, p, q, lam) / sc.sinh(n as f64 * lam);
    // Z - 2 delta_o = alpha + creg_inv in the canonical gauge.
    weight / ((alpha + creg_inv) - 4.0 * delta_o * coupling)
}

/// Inputs of the closed form: a TI or TIExc task and `(alpha, c~^-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormParams {
    pub alpha: f64,
    pub creg_inv: f64,
    pub spec: TaskSpec,
}

impl ClosedFormParams {
    pub fn new(spec: TaskSpec, alpha: f64, creg_inv: f64) -> Result<Self> {
        if spec.kind() == TaskKind::Tp {
            return Err(Error::UnsupportedTask(
                "no closed form for transverse patterning; use the dual oracle".into(),
            ));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(creg_inv.is_finite() && creg_inv >= 0.0) {
            return Err(Error::Domain(format!(
                "creg_inv must be finite and >= 0, got {creg_inv}"
            )));
        }
        Ok(ClosedFormParams {
            alpha,
            creg_inv,
            spec,
        })
    }
}

/// Ranks and the closed-form internals that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankProfile {
    pub params: ClosedFormParams,
    /// `r_j` for items `1..=n` (index 0 is item 1).
    pub ranks: Vec<f64>,
    pub r_ti: Vec<f64>,
    pub r_pert: Vec<f64>,
    /// `None` when `alpha = 1`.
    pub lambda: Option<f64>,
    pub memorization: f64,
    /// Exception dual coefficient; `None` for plain TI.
    pub hbar: Option<f64>,
    /// `None` for plain TI, or when `alpha = 1`.
    pub g: Option<f64>,
    /// `Z = delta_s (1 + c~^-1)` in the canonical gauge.
    pub reg_factor: f64,
    #[serde(skip)]
    training: Dataset,
}

impl RankProfile {
    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    /// Rank of item `j` (1-based).
    pub fn rank(&self, j: usize) -> f64 {
        self.ranks[j - 1]
    }

    /// Model output on `pair`.
    pub fn predict(&self, pair: ItemPair) -> f64 {
        let diff = self.rank(pair.j) - self.rank(pair.k);
        match self.training.label_of(pair) {
            Some(y) => self.memorization * f64::from(y) + (1.0 - self.memorization) * diff,
            None => diff,
        }
    }
}

/// Assembles the ranking system for `cfp`.
pub fn rank_profile(cfp: &ClosedFormParams) -> Result<RankProfile> {
    let spec = cfp.spec;
    let n = spec.n();
    let memorization = memorization_coeff(cfp.alpha, cfp.creg_inv)?;
    let training = build_training_set(&spec);
    let reg_factor = 1.0 + cfp.creg_inv;

    if cfp.alpha == 1.0 {
        let hbar = match spec.exception() {
            Some((p, q)) => Some(hbar(n, p, q, cfp.alpha, cfp.creg_inv)?),
            None => None,
        };
        return Ok(RankProfile {
            params: *cfp,
            ranks: vec![0.0; n],
            r_ti: vec![0.0; n],
            r_pert: vec![0.0; n],
            lambda: None,
            memorization,
            hbar,
            g: None,
            reg_factor,
            training,
        });
    }

    let lam = lambda_of(cfp.alpha, cfp.creg_inv)?;
    let r_ti: Vec<f64> = (1..=n).map(|j| rank_ti(n, lam, j)).collect();
    let (r_pert, hbar, g) = match spec.exception() {
        Some((p, q)) => (
            (1..=n).map(|j| rank_pert(n, p, q, lam, j)).collect(),
            Some(hbar_at(n, p, q, cfp.alpha, cfp.creg_inv, lam)),
            Some(g_factor(n, p, q, lam)),
        ),
        None => (vec![0.0; n], None, None),
    };
    let ranks = r_ti.iter().zip(&r_pert).map(|(a, b)| a + b).collect();
    Ok(RankProfile {
        params: *cfp,
        ranks,
        r_ti,
        r_pert,
        lambda: Some(lam),
        memorization,
        hbar,
        g,
        reg_factor,
        training,
    })
}

/// Closed-form model output on `pair`.
pub fn predict_closed_form(cfp: &ClosedFormParams, pair: ItemPair) -> Result<f64> {
    Ok(rank_profile(cfp)?.predict(pair))
}
