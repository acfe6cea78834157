//! Covariance-matrix primitives: symplectic form, symplectic spectrum,
//! physicality, purity and mode reduction.
//!
//! Convention: quadratures are ordered `(x_1, p_1, x_2, p_2, ...)` and scaled
//! so that the vacuum covariance matrix is the identity. A matrix describes a
//! physical state iff `cm + iΩ ≥ 0`, i.e. every symplectic eigenvalue is at
//! least 1.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum absolute asymmetry tolerated in a [`CovMatrix`].
pub const TOL_SYM: f64 = 1e-10;

/// Default physicality tolerance; scaled by `max(1, ‖cm‖_max)` when applied.
pub const DEFAULT_TOL_PHYS: f64 = 1e-9;

/// Relative intra-pair gap allowed when pairing raw symplectic eigenvalues.
pub const PAIRING_TOL: f64 = 1e-6;

/// A `2N × 2N` real symmetric matrix of second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovMatrix {
    pub fn new(n_modes: usize, entries: DMatrix<f64>) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::domain("covariance matrix needs at least one mode"));
        }
        let dim = 2 * n_modes;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::domain(format!(
                "expected a {dim}x{dim} matrix for {n_modes} modes, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("covariance matrix has non-finite entries"));
        }
        let defect = symmetry_defect(&entries);
        if defect > TOL_SYM {
            return Err(Error::domain(format!(
                "covariance matrix is not symmetric (max asymmetry {defect:e})"
            )));
        }
        Ok(Self { n_modes, entries })
    }

    /// Builds from a row-major slice of `4N²` values.
    pub fn from_row_major(n_modes: usize, values: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if values.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} entries for {n_modes} modes, got {}",
                dim * dim,
                values.len()
            )));
        }
        Self::new(n_modes, DMatrix::from_row_slice(dim, dim, values))
    }

    pub fn identity(n_modes: usize) -> Result<Self> {
        Self::new(n_modes, DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn determinant(&self) -> f64 {
        self.entries.clone().determinant()
    }

    pub fn to_json(&self) -> CovMatrixJson {
        CovMatrixJson {
            n_modes: self.n_modes,
            entries: self.to_row_major(),
        }
    }

    pub fn from_json(json: &CovMatrixJson) -> Result<Self> {
        Self::from_row_major(json.n_modes, &json.entries)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("finite floats always serialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: CovMatrixJson = serde_json::from_str(s)
            .map_err(|e| Error::domain(format!("malformed covariance-matrix JSON: {e}")))?;
        Self::from_json(&json)
    }
}

/// Wire form of a covariance matrix: `{ "n_modes": N, "entries": [row-major 2N×2N] }`.
///
/// Floats are written with the shortest representation that round-trips, so
/// no precision is lost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovMatrixJson {
    pub n_modes: usize,
    pub entries: Vec<f64>,
}

/// The `N` symplectic eigenvalues of a covariance matrix, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    pub values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn product_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).product()
    }
}

pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let mut defect = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    defect
}

/// Direct sum of `n` blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::domain("symplectic form needs n >= 1"));
    }
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(omega)
}

/// Symplectic eigenvalues as the moduli of the eigenvalues of `Ωσ`.
///
/// The squared moduli are the eigenvalues of `-(Ωσ)² = Ωᵀ σ Ω σ`. With the
/// Cholesky factor `σ = L Lᵀ` this is similar to the symmetric positive
/// matrix `Lᵀ Ωᵀ σ Ω L`, which is diagonalised instead. Each value appears
/// twice; the sorted raw values are paired and averaged.
pub fn symplectic_eigenvalues(cm: &CovMatrix) -> Result<SymplecticSpectrum> {
    let n = cm.n_modes();
    let sigma = cm.entries();
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("covariance matrix is not positive definite"))?;
    let l = chol.l();
    let omega = symplectic_form(n)?;
    let inner = omega.transpose() * sigma * &omega;
    let mut sym = l.transpose() * inner * &l;
    // restore exact symmetry lost to roundoff before diagonalising
    let sym_t = sym.transpose();
    sym += sym_t;
    sym *= 0.5;

    let eig = SymmetricEigen::new(sym);
    let mut raw: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).collect();
    raw.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));

    let scale = raw.first().copied().unwrap_or(0.0);
    let mut values = Vec::with_capacity(n);
    for pair in raw.chunks(2) {
        let gap = (pair[0] - pair[1]).abs();
        if gap > PAIRING_TOL * scale {
            return Err(Error::numerical(format!(
                "symplectic eigenvalue pair ({}, {}) split by {gap:e}",
                pair[0], pair[1]
            )));
        }
        values.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(SymplecticSpectrum { values })
}

fn scaled_tol(cm: &CovMatrix, tol: f64) -> f64 {
    tol * cm.max_abs().max(1.0)
}

/// `true` iff the smallest eigenvalue of the Hermitian matrix `cm + iΩ` is
/// at least `-tol · max(1, ‖cm‖_max)`.
pub fn is_physical(cm: &CovMatrix, tol: f64) -> bool {
    let n = cm.n_modes();
    let Ok(omega) = symplectic_form(n) else {
        return false;
    };
    let dim = cm.dim();
    let herm = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(cm.get(i, j), omega[(i, j)]));
    let eig = SymmetricEigen::new(herm);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    min.is_finite() && min >= -scaled_tol(cm, tol)
}

/// Same condition checked through the symplectic spectrum: `ν_min ≥ 1 - tol`.
pub fn is_physical_by_spectrum(cm: &CovMatrix, tol: f64) -> bool {
    match symplectic_eigenvalues(cm) {
        Ok(spec) => spec.min() >= 1.0 - scaled_tol(cm, tol),
        Err(_) => false,
    }
}

/// Purity `μ = (det cm)^{-1/2}`.
pub fn purity(cm: &CovMatrix) -> Result<f64> {
    let det = cm.determinant();
    if det.is_nan() || det <= 0.0 {
        return Err(Error::domain(format!(
            "covariance matrix has non-positive determinant {det:e}"
        )));
    }
    Ok(1.0 / det.sqrt())
}

/// Principal sub-matrix on the listed modes (0-based), in the given order.
pub fn reduce(cm: &CovMatrix, modes: &[usize]) -> Result<CovMatrix> {
    if modes.is_empty() {
        return Err(Error::domain("reduction needs at least one mode"));
    }
    let n = cm.n_modes();
    let mut seen = vec![false; n];
    for &k in modes {
        if k >= n {
            return Err(Error::domain(format!(
                "mode index {k} out of range for {n} modes"
            )));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::domain(format!("mode index {k} listed twice")));
        }
    }
    let rows: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let dim = rows.len();
    let sub = DMatrix::from_fn(dim, dim, |i, j| cm.get(rows[i], rows[j]));
    CovMatrix::new(modes.len(), sub)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> CovMatrix {
        let n = values.len() / 2;
        CovMatrix::new(
            n,
            DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(values)),
        )
        .unwrap()
    }

    #[test]
    fn symplectic_form_blocks() {
        let w1 = symplectic_form(1).unwrap();
        assert_eq!(w1, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));

        let w2 = symplectic_form(2).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, -1.0, 0.0,
            ],
        );
        assert_eq!(w2, expected);

        let w3 = symplectic_form(3).unwrap();
        assert_eq!(&w3 * &w3, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(w3.transpose(), -w3);
        assert!(matches!(symplectic_form(0), Err(Error::Domain(_))));
    }

    #[test]
    fn vacuum_and_thermal_spectra() {
        for n in 1..6 {
            let spec = symplectic_eigenvalues(&CovMatrix::identity(n).unwrap()).unwrap();
            assert_eq!(spec.values.len(), n);
            assert!(spec.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        }
        let spec = symplectic_eigenvalues(&diag(&[3.5, 3.5])).unwrap();
        assert!((spec.values[0] - 3.5).abs() < 1e-14);
    }

    #[test]
    fn squeezed_single_mode_is_pure() {
        // diag(e^{2s}, e^{-2s}) has ν = 1
        let s: f64 = 0.8;
        let cm = diag(&[(2.0 * s).exp(), (-2.0 * s).exp()]);
        let spec = symplectic_eigenvalues(&cm).unwrap();
        assert!((spec.values[0] - 1.0).abs() < 1e-12);
        assert!((purity(&cm).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_definite_rejected() {
        let cm = diag(&[1.0, -1.0]);
        assert!(matches!(symplectic_eigenvalues(&cm), Err(Error::Domain(_))));
        assert!(matches!(purity(&cm), Err(Error::Domain(_))));
    }

    #[test]
    fn physicality_examples() {
        assert!(is_physical(
            &CovMatrix::identity(3).unwrap(),
            DEFAULT_TOL_PHYS
        ));
        let half = diag(&[0.5, 0.5]);
        assert!(!is_physical(&half, DEFAULT_TOL_PHYS));
        assert!(!is_physical_by_spectrum(&half, DEFAULT_TOL_PHYS));
        // squeezed below vacuum in one quadrature only is still physical
        assert!(is_physical(&diag(&[4.0, 0.25]), DEFAULT_TOL_PHYS));
        // ... but not if the product drops below 1
        assert!(!is_physical(&diag(&[4.0, 0.2]), DEFAULT_TOL_PHYS));
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&CovMatrix::identity(2).unwrap()).unwrap(), 1.0);
        assert!((purity(&diag(&[2.0, 2.0])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reduce_examples() {
        let id4 = CovMatrix::identity(2).unwrap();
        assert_eq!(reduce(&id4, &[0]).unwrap(), CovMatrix::identity(1).unwrap());
        assert_eq!(reduce(&id4, &[0, 1]).unwrap(), id4);
        assert!(matches!(reduce(&id4, &[0, 0]), Err(Error::Domain(_))));
        assert!(matches!(reduce(&id4, &[2]), Err(Error::Domain(_))));
        assert!(matches!(reduce(&id4, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn reduce_picks_quadrature_pairs() {
        let values: Vec<f64> = (0..36).map(|k| (k / 6 + k % 6) as f64).collect();
        let cm = CovMatrix::from_row_major(3, &values).unwrap();
        let sub = reduce(&cm, &[2, 0]).unwrap();
        assert_eq!(sub.get(0, 0), cm.get(4, 4));
        assert_eq!(sub.get(0, 3), cm.get(4, 1));
        assert_eq!(sub.get(3, 2), cm.get(1, 0));
    }

    #[test]
    fn constructor_validates() {
        assert!(matches!(CovMatrix::identity(0), Err(Error::Domain(_))));
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = 1e-6;
        assert!(matches!(CovMatrix::new(1, m), Err(Error::Domain(_))));
        assert!(matches!(
            CovMatrix::new(2, DMatrix::identity(2, 2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            CovMatrix::from_row_major(1, &[1.0, 0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let values = [1.0 / 3.0, 0.1, 0.1, std::f64::consts::PI];
        let cm = CovMatrix::from_row_major(1, &values).unwrap();
        let text = cm.to_json_string();
        assert_eq!(CovMatrix::from_json_str(&text).unwrap(), cm);
        assert!(text.starts_with("{\"n_modes\":1,\"entries\":["));
        assert!(matches!(
            CovMatrix::from_json_str("{}"),
            Err(Error::Domain(_))
        ));
    }
}
