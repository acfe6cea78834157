//! Unitarily localized form of a molecular partition.
//!
//! Local symplectic operations on each molecule of a fully symmetric state
//! concentrate all inter-molecular correlations onto one mode per molecule.
//! The resulting `K`-mode state is a multi-GLEMS: its diagonal blocks are
//! `√det(σ_{m_i}) · I` and each off-diagonal block is `diag(g+, g-)` of the
//! two-mode GLEMS fixed by the purities of `m_i`, `m_j` and `m_i + m_j`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bipartite::PurityTriple;
use crate::error::{Error, Result};
use crate::partitions::ModePartition;
use crate::symmetric::reduced_block_det;
use crate::symplectic::{
    is_physical, reduce, symplectic_eigenvalues, CovMatrix, SymplecticSpectrum, DEFAULT_TOL_PHYS,
};

/// Negative radicands down to this value are clamped to zero.
pub const RADICAND_CLAMP: f64 = 1e-9;

fn clamped_sqrt(x: f64, what: &str, p: &PurityTriple) -> Result<f64> {
    if x < -RADICAND_CLAMP {
        return Err(Error::numerical(format!(
            "{what} radicand {x:e} is negative for triple a={} b={} c={}",
            p.a, p.b, p.c
        )));
    }
    Ok(x.max(0.0).sqrt())
}

/// Off-diagonal entries `(g+, g-)` of the standard-form GLEMS with
/// inverse purities `(a, b, c)`.
pub fn glems_offdiagonal(p: &PurityTriple) -> Result<(f64, f64)> {
    let PurityTriple { a, b, c } = *p;
    let dm = (a - b).powi(2);
    let dp = (a + b).powi(2);
    let (cm, cp) = ((c - 1.0).powi(2), (c + 1.0).powi(2));
    let first = clamped_sqrt((dm - cm) * (dm - cp), "difference", p)?;
    let second = clamped_sqrt((dp - cm) * (dp - cp), "sum", p)?;
    let denom = 4.0 * (a * b).sqrt();
    Ok(((first + second) / denom, (first - second) / denom))
}

/// Localized covariance matrix together with the state it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGlemsCM {
    pub cm: CovMatrix,
    pub parent_modes: usize,
    pub squeezing: f64,
    pub sizes: Vec<usize>,
}

/// `K`-mode multi-GLEMS equivalent to `partition` of the pure fully
/// symmetric state with squeezing `r`.
pub fn build_multi_glems_cm(partition: &ModePartition, r: f64) -> Result<MultiGlemsCM> {
    let n = partition.parent_modes();
    let sizes = partition.sizes();
    let k = sizes.len();
    let local: Vec<f64> = sizes
        .iter()
        .map(|&m| reduced_block_det(n, r, m).map(f64::sqrt))
        .collect::<Result<_>>()?;

    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        m[(2 * i, 2 * i)] = local[i];
        m[(2 * i + 1, 2 * i + 1)] = local[i];
        for j in (i + 1)..k {
            let joint = reduced_block_det(n, r, sizes[i] + sizes[j])?.sqrt();
            let triple = PurityTriple::new(local[i], local[j], joint)?;
            let (g_plus, g_minus) = glems_offdiagonal(&triple)?;
            for (row, col) in [(i, j), (j, i)] {
                m[(2 * row, 2 * col)] = g_plus;
                m[(2 * row + 1, 2 * col + 1)] = g_minus;
            }
        }
    }
    Ok(MultiGlemsCM {
        cm: CovMatrix::new(k, m)?,
        parent_modes: n,
        squeezing: r,
        sizes: sizes.to_vec(),
    })
}

/// Structural diagnostics of a localized covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationCheck {
    pub physical: bool,
    pub spectrum: Vec<f64>,
    pub sqrt_det: f64,
    /// `max |ν_k - 1|` over all but the largest symplectic eigenvalue.
    pub unit_eigenvalue_deviation: f64,
    /// `|ν_max - √det| / √det`.
    pub top_eigenvalue_relative_error: f64,
    /// Largest relative mismatch between a two-mode reduction's determinant
    /// and `c²` of its triple.
    pub pair_det_relative_error: f64,
    /// Smallest symplectic eigenvalue over all two-mode reductions.
    pub pair_min_eigenvalue: f64,
}

impl MultiGlemsCM {
    pub fn check(&self) -> Result<LocalizationCheck> {
        let spec: SymplecticSpectrum = symplectic_eigenvalues(&self.cm)?;
        let sqrt_det = self.cm.determinant().sqrt();
        let unit_eigenvalue_deviation = spec.values[1..]
            .iter()
            .fold(0.0_f64, |m, v| m.max((v - 1.0).abs()));
        let top_eigenvalue_relative_error = (spec.max() - sqrt_det).abs() / sqrt_det;

        let k = self.sizes.len();
        let mut pair_det_relative_error = 0.0_f64;
        let mut pair_min_eigenvalue = f64::INFINITY;
        for i in 0..k {
            for j in (i + 1)..k {
                let sub = reduce(&self.cm, &[i, j])?;
                let expected = reduced_block_det(
                    self.parent_modes,
                    self.squeezing,
                    self.sizes[i] + self.sizes[j],
                )?;
                let err = (sub.determinant() - expected).abs() / expected;
                pair_det_relative_error = pair_det_relative_error.max(err);
                pair_min_eigenvalue = pair_min_eigenvalue.min(symplectic_eigenvalues(&sub)?.min());
            }
        }
        Ok(LocalizationCheck {
            physical: is_physical(&self.cm, DEFAULT_TOL_PHYS),
            spectrum: spec.values,
            sqrt_det,
            unit_eigenvalue_deviation,
            top_eigenvalue_relative_error,
            pair_det_relative_error,
            pair_min_eigenvalue,
        })
    }
}
