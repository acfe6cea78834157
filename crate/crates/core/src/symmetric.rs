//! Pure, fully symmetric `N`-mode Gaussian states in standard form.
//!
//! Every diagonal 2×2 block is `diag(b, b)` and every off-diagonal block is
//! `diag(z1, z2)`. The whole family is fixed by `N` and the average squeezing
//! `r`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::symplectic::CovMatrix;

/// Parameters of a pure fully symmetric state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricFamily {
    pub n_modes: usize,
    pub squeezing: f64,
    pub b: f64,
}

/// The two entries of every off-diagonal block, `ζ = diag(z1, z2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffDiagonalPair {
    pub z1: f64,
    pub z2: f64,
}

fn check_family(n: usize, r: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!(
            "fully symmetric state needs N >= 2, got {n}"
        )));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::domain(format!(
            "squeezing must be finite and >= 0, got {r}"
        )));
    }
    Ok(())
}

impl SymmetricFamily {
    pub fn new(n_modes: usize, squeezing: f64) -> Result<Self> {
        check_family(n_modes, squeezing)?;
        let b = b_squared(n_modes, squeezing)?.sqrt();
        Ok(Self {
            n_modes,
            squeezing,
            b,
        })
    }

    pub fn b_squared(&self) -> f64 {
        self.b * self.b
    }

    pub fn off_diagonal(&self) -> OffDiagonalPair {
        let n = self.n_modes as f64;
        let b = self.b;
        let b2m1 = b_squared_minus_one(self.n_modes, self.squeezing);
        let root = (b2m1 * (b * b * n * n - (n - 2.0) * (n - 2.0)))
            .max(0.0)
            .sqrt();
        let denom = 2.0 * b * (n - 1.0);
        OffDiagonalPair {
            z1: (b2m1 * (n - 2.0) + root) / denom,
            z2: (b2m1 * (n - 2.0) - root) / denom,
        }
    }

    pub fn covariance_matrix(&self) -> CovMatrix {
        let n = self.n_modes;
        let OffDiagonalPair { z1, z2 } = self.off_diagonal();
        let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let same_mode = i / 2 == j / 2;
            match (i % 2 == j % 2, same_mode) {
                (false, _) => 0.0,
                (true, true) => self.b,
                (true, false) if i % 2 == 0 => z1,
                (true, false) => z2,
            }
        });
        CovMatrix::new(n, m).expect("standard form is symmetric by construction")
    }

    pub fn reduced_block_det(&self, l: usize) -> Result<f64> {
        reduced_block_det(self.n_modes, self.squeezing, l)
    }
}

/// `b² - 1 = 4(N-1) sinh²(2r) / N²`, free of the `cosh(4r) - 1` cancellation.
fn b_squared_minus_one_in<R: Real>(n: usize, r: f64) -> R {
    let n = R::from_int(n as i64);
    let s = (R::from_f64(2.0) * R::from_f64(r)).sinh();
    R::from_f64(4.0) * (n.clone() - R::one()) * s.square() / n.square()
}

fn b_squared_minus_one(n: usize, r: f64) -> f64 {
    b_squared_minus_one_in::<f64>(n, r)
}

/// `b² = ((N-2)N + 2(N-1)cosh(4r) + 2) / N²`, the single-mode determinant.
pub fn b_squared(n: usize, r: f64) -> Result<f64> {
    check_family(n, r)?;
    Ok(b_squared_in::<f64>(n, r))
}

pub fn b_squared_in<R: Real>(n: usize, r: f64) -> R {
    R::one() + b_squared_minus_one_in::<R>(n, r)
}

/// Pure fully symmetric covariance matrix of `n` modes at squeezing `r`.
pub fn build_pure_fs_cm(n: usize, r: f64) -> Result<CovMatrix> {
    Ok(SymmetricFamily::new(n, r)?.covariance_matrix())
}

/// Determinant of the reduced `l`-mode block of the pure `n`-mode state:
/// `(l(n-l) b² - (l-1)(n-l-1)) / (n-1)`.
pub fn reduced_block_det(n: usize, r: f64, l: usize) -> Result<f64> {
    check_block(n, r, l)?;
    Ok(reduced_block_det_in::<f64>(n, r, l))
}

pub(crate) fn check_block(n: usize, r: f64, l: usize) -> Result<()> {
    check_family(n, r)?;
    if l == 0 || l > n {
        return Err(Error::domain(format!("block size {l} outside 1..={n}")));
    }
    Ok(())
}

/// Unchecked generic form of [`reduced_block_det`].
pub fn reduced_block_det_in<R: Real>(n: usize, r: f64, l: usize) -> R {
    let b2 = b_squared_in::<R>(n, r);
    let nn = n as i64;
    let ll = l as i64;
    (R::from_int(ll * (nn - ll)) * b2 - R::from_int((ll - 1) * (nn - ll - 1))) / R::from_int(nn - 1)
}
