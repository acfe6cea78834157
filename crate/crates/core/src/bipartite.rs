//! Bipartite contangle of two molecules cut from a fully symmetric state.
//!
//! Any `m_i | m_j` split of a pure fully symmetric state is locally
//! equivalent to a two-mode GLEMS (smallest symplectic eigenvalue 1), which
//! is fixed by the three inverse purities `(a, b, c)`. The contangle then
//! follows in closed form from `g[d²] = arcsinh²(√(d² - 1))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::symmetric::{check_block, reduced_block_det_in};

/// `d²` values in `[1 - D2_CLAMP, 1)` are treated as 1.
pub const D2_CLAMP: f64 = 1e-12;

/// Negative `δ` (relative to `(1+a+b+c)^8`) tolerated before clamping to 0.
pub const DELTA_CLAMP: f64 = 1e-9;

/// Local and global inverse purities of a two-molecule reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

const TRIPLE_TOL: f64 = 1e-12;

impl PurityTriple {
    /// Validates `a, b, c ≥ 1` and `c ≤ a b`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() || v < 1.0 - TRIPLE_TOL {
                return Err(Error::domain(format!(
                    "purity parameter {name}={v} must be >= 1"
                )));
            }
        }
        if c > a * b * (1.0 + TRIPLE_TOL) {
            return Err(Error::domain(format!(
                "global parameter c={c} exceeds a*b={} (mixedness must be subadditive)",
                a * b
            )));
        }
        Ok(Self { a, b, c })
    }

    /// Triple of the `mi | mj` split of the pure `n`-mode state at squeezing `r`.
    pub fn for_blocks(n: usize, r: f64, mi: usize, mj: usize) -> Result<Self> {
        check_pair(n, r, mi, mj)?;
        let (a, b, c) = block_triple_in::<f64>(n, r, mi, mj);
        Self::new(a, b, c)
    }
}

pub(crate) fn check_pair(n: usize, r: f64, mi: usize, mj: usize) -> Result<()> {
    if mi == 0 || mj == 0 {
        return Err(Error::domain("molecule sizes must be >= 1"));
    }
    if mi + mj > n {
        return Err(Error::domain(format!(
            "molecules {mi}+{mj} exceed the {n} modes of the parent state"
        )));
    }
    check_block(n, r, mi + mj)
}

pub(crate) fn block_triple_in<R: Real>(n: usize, r: f64, mi: usize, mj: usize) -> (R, R, R) {
    (
        reduced_block_det_in::<R>(n, r, mi).sqrt(),
        reduced_block_det_in::<R>(n, r, mj).sqrt(),
        reduced_block_det_in::<R>(n, r, mi + mj).sqrt(),
    )
}

/// `arcsinh²(√(d² - 1))`.
pub fn contangle_from_d2(d2: f64) -> Result<f64> {
    contangle_from_d2_in(d2)
}

pub fn contangle_from_d2_in<R: Real>(d2: R) -> Result<R> {
    let excess = d2 - R::one();
    if excess < R::from_f64(-D2_CLAMP) {
        return Err(Error::domain(format!(
            "d^2 = 1 + {:?} is below 1; the state cannot be a valid GLEMS",
            excess
        )));
    }
    let excess = excess.max(R::zero());
    Ok(excess.sqrt().asinh().square())
}

/// Closed-form `d²` of a two-mode GLEMS, piecewise in `c`.
pub fn glems_d2(p: &PurityTriple) -> Result<f64> {
    glems_d2_in(p.a, p.b, p.c)
}

pub fn glems_d2_in<R: Real>(a: R, b: R, c: R) -> Result<R> {
    // the formula is symmetric in (a, b); fixing the order makes it bitwise so
    let (a, b) = if b > a { (b, a) } else { (a, b) };
    let one = R::one();
    let a2 = a.square();
    let b2 = b.square();
    let c2 = c.square();
    let sum = a2.clone() + b2.clone();
    let diff = a2.clone() - b2.clone();

    let c2_threshold = (sum.clone() - one.clone()).sqrt();
    if c >= c2_threshold {
        return Ok(one);
    }

    let two = R::from_f64(2.0);
    let diff_sq = diff.square();
    let c1_num = two.clone() * sum.clone()
        + diff_sq.clone()
        + diff.abs() * (diff_sq.clone() + R::from_f64(8.0) * sum.clone()).sqrt();
    let c1_threshold = (c1_num / (two.clone() * sum.clone())).sqrt();

    let d2 = if c < c1_threshold {
        let denom = (c2.clone() - one.clone()).square();
        if denom.partial_cmp(&R::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::numerical(format!(
                "invalid triple a={a:?} b={b:?} c={c:?}: c = 1 with a != b"
            )));
        }
        diff_sq / denom
    } else {
        let factors = [
            a.clone() - b.clone() - c.clone() - one.clone(),
            a.clone() - b.clone() - c.clone() + one.clone(),
            a.clone() + b.clone() - c.clone() - one.clone(),
            a.clone() + b.clone() - c.clone() + one.clone(),
            a.clone() - b.clone() + c.clone() - one.clone(),
            a.clone() - b.clone() + c.clone() + one.clone(),
            a.clone() + b.clone() + c.clone() - one.clone(),
            a.clone() + b.clone() + c.clone() + one.clone(),
        ];
        let delta = factors.into_iter().fold(R::one(), |acc, f| acc * f);
        let scale = (one.clone() + a.clone() + b.clone() + c.clone())
            .square()
            .square()
            .square();
        let delta = if delta < R::zero() {
            if delta.clone() / scale < R::from_f64(-DELTA_CLAMP) {
                return Err(Error::numerical(format!(
                    "negative delta {delta:?} for triple a={a:?} b={b:?} c={c:?}"
                )));
            }
            R::zero()
        } else {
            delta
        };
        (two.clone() * sum * (c2.clone() + one.clone()) + two * a2.clone() * b2.clone()
            - a2.square()
            - b2.square()
            - (c2.clone() - one.clone()).square()
            - delta.sqrt())
            / (R::from_f64(8.0) * c2)
    };
    Ok(d2.max(R::one()))
}

/// Intermediate quantities of a block-pair contangle evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairBreakdown {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d2: f64,
    pub contangle: f64,
}

/// Contangle between molecules of `mi` and `mj` modes of the pure `n`-mode
/// fully symmetric state with squeezing `r`.
pub fn block_pair_contangle(n: usize, r: f64, mi: usize, mj: usize) -> Result<f64> {
    Ok(block_pair_breakdown(n, r, mi, mj)?.contangle)
}

pub fn block_pair_breakdown(n: usize, r: f64, mi: usize, mj: usize) -> Result<PairBreakdown> {
    let triple = PurityTriple::for_blocks(n, r, mi, mj)?;
    let d2 = glems_d2(&triple)?;
    Ok(PairBreakdown {
        a: triple.a,
        b: triple.b,
        c: triple.c,
        d2,
        contangle: contangle_from_d2(d2)?,
    })
}

/// Generic, unvalidated-size variant used by the recursion; sizes must
/// already satisfy `mi, mj ≥ 1` and `mi + mj ≤ n`.
pub fn block_pair_contangle_in<R: Real>(n: usize, r: f64, mi: usize, mj: usize) -> Result<R> {
    let (a, b, c) = block_triple_in::<R>(n, r, mi, mj);
    contangle_from_d2_in(glems_d2_in(a, b, c)?)
}
