use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Condition estimate above which a symmetric system is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub(crate) struct Solved {
    pub x: DVector<f64>,
    pub condition: f64,
    /// `true` when the minimum-norm least-squares fallback was used.
    pub min_norm: bool,
}

/// Solves `m x = rhs` for symmetric positive semidefinite `m`.
///
/// Well-conditioned systems go through a Cholesky factorization. Otherwise the
/// minimum-norm least-squares solution is taken from the eigendecomposition,
/// discarding eigenvalues below `max |ev| / SINGULAR_CONDITION`.
pub(crate) fn solve_psd(m: DMatrix<f64>, rhs: &DVector<f64>) -> Result<Solved> {
    if m.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: "non-finite entries in linear system".into(),
            condition: f64::NAN,
        });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Numerical {
            message: "symmetric eigendecomposition did not converge".into(),
            condition: f64::NAN,
        }
    })?;
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| {
            (lo.min(v.abs()), hi.max(v.abs()))
        });
    let condition = if lo == 0.0 { f64::INFINITY } else { hi / lo };

    if condition <= SINGULAR_CONDITION {
        if let Some(chol) = m.cholesky() {
            let x = chol.solve(rhs);
            if x.iter().all(|v| v.is_finite()) {
                return Ok(Solved {
                    x,
                    condition,
                    min_norm: false,
                });
            }
        }
    }

    let cutoff = hi / SINGULAR_CONDITION;
    let coords = eig.eigenvectors.transpose() * rhs;
    let scaled = DVector::from_iterator(
        coords.len(),
        coords
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(&c, &ev)| if ev.abs() > cutoff { c / ev } else { 0.0 }),
    );
    let x = &eig.eigenvectors * scaled;
    if hi == 0.0 || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: "pseudo-inverse fallback produced no finite solution".into(),
            condition,
        });
    }
    Ok(Solved {
        x,
        condition,
        min_norm: condition > SINGULAR_CONDITION,
    })
}
