//! Genuine multipartite entanglement among molecules of a fully symmetric
//! state, defined through the strong-monogamy decomposition.
//!
//! With sizes sorted ascending and the smallest molecule as probe,
//!
//! ```text
//! G_res(m1|...|mK) = G(m1 | M - m1) - Σ_{S ∋ m1, 2 ≤ |S| ≤ K-1} G_res(S)
//! ```
//!
//! where `G_res` of a two-element `S` is the plain pairwise contangle. Every
//! term depends only on the multiset of sizes in `S`, so subsets are grouped
//! by multiset (with their multiplicity) and memoized.

use serde::Serialize;

use crate::bipartite::{block_pair_contangle_in, check_pair};
use crate::error::{Error, Result};
use crate::partitions::ModePartition;
use crate::real::{with_wide_bits, Precision, Real, Wide};

/// Default cap on the number of distinct sub-multisets of one evaluation.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// Widest mantissa tried by the extended-precision escalation.
pub const MAX_WIDE_BITS: u32 = 16_384;

const ESCALATION_AGREEMENT: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualOptions {
    pub precision: Precision,
    pub budget: u128,
    /// Route all-ones partitions to the closed-form atomic expression.
    pub atomic_fast_path: bool,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            precision: Precision::Extended,
            budget: DEFAULT_BUDGET,
            atomic_fast_path: true,
        }
    }
}

/// One subtracted term: the residual of a probe-containing sub-multiset,
/// times the number of index subsets that realize it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubtractedTerm {
    pub sizes: Vec<usize>,
    pub multiplicity: u128,
    pub value: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub value: f64,
    pub leading_term: f64,
    pub subtracted_terms: Vec<SubtractedTerm>,
    pub probe_size: usize,
    pub sizes: Vec<usize>,
    pub parent_modes: usize,
    pub squeezing: f64,
    pub precision: Precision,
    pub atomic_fast_path: bool,
}

impl ResidualReport {
    /// `leading_term - Σ contribution`, summed in report order.
    pub fn reconstruct(&self) -> f64 {
        self.subtracted_terms
            .iter()
            .fold(self.leading_term, |acc, t| acc - t.contribution)
    }
}

fn check_squeezing(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::domain(format!(
            "squeezing must be finite and >= 0, got {r}"
        )));
    }
    Ok(())
}

/// Residual contangle with default options (extended precision, atomic fast path).
pub fn residual_contangle(partition: &ModePartition, r: f64) -> Result<ResidualReport> {
    residual_contangle_with(partition, r, &ResidualOptions::default())
}

pub fn residual_contangle_with(
    partition: &ModePartition,
    r: f64,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    check_squeezing(r)?;
    let n = partition.parent_modes();
    let sizes = partition.sizes();
    check_pair(n, r, sizes[0], partition.total() - sizes[0])?;

    let fast = opts.atomic_fast_path && partition.is_atomic();
    if !fast {
        let count = distinct_submultisets(sizes);
        if count > opts.budget {
            return Err(Error::resource(format!(
                "partition needs {count} distinct sub-multisets, budget is {}",
                opts.budget
            )));
        }
    }

    let run = || -> Result<Expansion<f64>> {
        match opts.precision {
            Precision::Double => expand::<f64>(n, r, sizes, fast),
            Precision::Extended => escalate(sizes.len(), || {
                let e = expand::<Wide>(n, r, sizes, fast)?;
                Ok((e.to_f64(), e.value.to_f64()))
            }),
        }
    };
    let e = run()?;
    Ok(ResidualReport {
        value: e.value,
        leading_term: e.leading,
        subtracted_terms: e.terms,
        probe_size: sizes[0],
        sizes: sizes.to_vec(),
        parent_modes: n,
        squeezing: r,
        precision: opts.precision,
        atomic_fast_path: fast,
    })
}

/// Evaluates at increasing MPFR widths until two widths 64 bits apart agree.
fn escalate<T>(k: usize, eval: impl Fn() -> Result<(T, f64)>) -> Result<T> {
    let mut bits = 192 + 4 * k as u32;
    while bits <= MAX_WIDE_BITS {
        let (_, coarse) = with_wide_bits(bits, &eval)?;
        let (fine_out, fine) = with_wide_bits(bits + 64, &eval)?;
        if coarse == fine || (coarse - fine).abs() <= ESCALATION_AGREEMENT * fine.abs() {
            return Ok(fine_out);
        }
        bits *= 2;
    }
    Err(Error::numerical(format!(
        "no stable value up to {MAX_WIDE_BITS} bits of working precision"
    )))
}

/// Number of distinct probe-containing sub-multisets with at least two
/// elements, including the full multiset (saturating).
pub fn distinct_submultisets(sizes: &[usize]) -> u128 {
    let groups = group_sizes(sizes);
    let mut count: u128 = groups[0].1 as u128;
    for &(_, c) in &groups[1..] {
        count = count.saturating_mul(c as u128 + 1);
    }
    count - 1
}

fn group_sizes(sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for &s in sizes {
        match groups.last_mut() {
            Some((v, c)) if *v == s => *c += 1,
            _ => groups.push((s, 1)),
        }
    }
    groups
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Proper probe-containing sub-multisets (`2 ≤ |S| < K`) with multiplicities,
/// in ascending size-count order.
fn submultisets(sizes: &[usize]) -> Result<Vec<(Vec<usize>, u128)>> {
    let groups = group_sizes(sizes);
    let k = sizes.len();
    // picks[g] = how many of group g join the probe (for g = 0, besides the probe)
    let limits: Vec<usize> = groups
        .iter()
        .enumerate()
        .map(|(g, &(_, c))| if g == 0 { c - 1 } else { c })
        .collect();
    let mut picks = vec![0usize; groups.len()];
    let mut out = Vec::new();
    loop {
        let len = 1 + picks.iter().sum::<usize>();
        if len >= 2 && len < k {
            let mut sub = Vec::with_capacity(len);
            let mut mult: u128 = 1;
            for (g, (&(value, _), &p)) in groups.iter().zip(&picks).enumerate() {
                let extra = if g == 0 { 1 } else { 0 };
                sub.extend(std::iter::repeat_n(value, p + extra));
                mult = binomial(limits[g], p)
                    .and_then(|b| mult.checked_mul(b))
                    .ok_or_else(overflow)?;
            }
            out.push((sub, mult));
        }
        // odometer increment
        let mut g = 0;
        loop {
            if g == picks.len() {
                out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
                return Ok(out);
            }
            if picks[g] < limits[g] {
                picks[g] += 1;
                break;
            }
            picks[g] = 0;
            g += 1;
        }
    }
}

struct Expansion<R> {
    value: R,
    leading: R,
    terms: Vec<SubtractedTerm>,
}

impl Expansion<Wide> {
    fn to_f64(&self) -> Expansion<f64> {
        Expansion {
            value: self.value.to_f64(),
            leading: self.leading.to_f64(),
            terms: self.terms.clone(),
        }
    }
}

/// Sub-multisets of one partition laid out as a mixed-radix lattice: state
/// `picks` takes `picks[g]` copies of group `g`, and every sub-state of a
/// state has a smaller index.
struct Lattice<R> {
    n: usize,
    r: f64,
    groups: Vec<(usize, usize)>,
    strides: Vec<usize>,
    values: Vec<Option<R>>,
}

impl<R: Real> Lattice<R> {
    fn new(n: usize, r: f64, sizes: &[usize]) -> Self {
        let groups = group_sizes(sizes);
        let mut strides = Vec::with_capacity(groups.len());
        let mut states = 1usize;
        for &(_, c) in &groups {
            strides.push(states);
            states *= c + 1;
        }
        Lattice {
            n,
            r,
            groups,
            strides,
            values: vec![None; states],
        }
    }

    fn index(&self, sizes: &[usize]) -> usize {
        let mut idx = 0;
        let mut g = 0;
        for &s in sizes {
            while self.groups[g].0 != s {
                g += 1;
            }
            idx += self.strides[g];
        }
        idx
    }

    fn pair(&self, mi: usize, mj: usize) -> Result<R> {
        block_pair_contangle_in::<R>(self.n, self.r, mi, mj)
    }

    /// Fills every probe-containing state except the full partition, in index
    /// order.
    fn fill(&mut self) -> Result<()> {
        let probe = self.groups[0].0;
        for idx in 0..self.values.len() - 1 {
            let picks = self.decode(idx);
            let len: usize = picks.iter().sum();
            if picks[0] == 0 || len < 2 {
                continue;
            }
            let total: usize = self
                .groups
                .iter()
                .zip(&picks)
                .map(|(&(v, _), &p)| v * p)
                .sum();
            let mut value = self.pair(probe, total - probe)?;
            if len > 2 {
                self.subtract_proper(&picks, &mut value)?;
            }
            self.values[idx] = Some(value);
        }
        Ok(())
    }

    fn get(&self, sizes: &[usize]) -> R {
        self.values[self.index(sizes)]
            .clone()
            .expect("lattice filled")
    }

    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut picks = vec![0; self.groups.len()];
        for g in (0..self.groups.len()).rev() {
            picks[g] = idx / self.strides[g];
            idx %= self.strides[g];
        }
        picks
    }

    /// `value -= Σ mult(t) * T(t)` over proper probe-containing sub-states `t`
    /// of `picks` with at least two elements.
    fn subtract_proper(&self, picks: &[usize], value: &mut R) -> Result<()> {
        let len: usize = picks.iter().sum();
        let mut sub = vec![0usize; picks.len()];
        sub[0] = 1;
        loop {
            let sub_len: usize = sub.iter().sum();
            if sub_len >= 2 && sub_len < len {
                let mut mult: u128 = 1;
                let mut idx = 0;
                for g in 0..picks.len() {
                    let b = if g == 0 {
                        binomial(picks[0] - 1, sub[0] - 1)
                    } else {
                        binomial(picks[g], sub[g])
                    };
                    mult = b.and_then(|b| mult.checked_mul(b)).ok_or_else(overflow)?;
                    idx += sub[g] * self.strides[g];
                }
                let t = self.values[idx]
                    .as_ref()
                    .expect("sub-states precede their parents");
                value.sub_mul_assign(mult, t);
            }
            let mut g = 0;
            loop {
                if g == sub.len() {
                    return Ok(());
                }
                if sub[g] < picks[g] {
                    sub[g] += 1;
                    break;
                }
                sub[g] = if g == 0 { 1 } else { 0 };
                g += 1;
            }
        }
    }
}

fn overflow() -> Error {
    Error::resource("sub-multiset multiplicity overflows 128 bits")
}

fn expand<R: Real>(n: usize, r: f64, sizes: &[usize], atomic: bool) -> Result<Expansion<R>> {
    let mut lattice = Lattice::<R>::new(n, r, sizes);
    let leading = lattice.pair(sizes[0], sizes.iter().sum::<usize>() - sizes[0])?;
    if !atomic {
        lattice.fill()?;
    }
    let k = sizes.len();
    let subs = if atomic {
        (2..k)
            .map(|m| {
                binomial(k - 1, m - 1)
                    .map(|mult| (vec![1; m], mult))
                    .ok_or_else(overflow)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        submultisets(sizes)?
    };

    let mut value = leading.clone();
    let mut terms = Vec::with_capacity(subs.len());
    for (sub, mult) in subs {
        let sub_value = if atomic {
            atomic_residual_in::<R>(n, sub.len(), r)
        } else {
            lattice.get(&sub)
        };
        let contribution = R::from_u128(mult) * sub_value.clone();
        value = value - contribution.clone();
        terms.push(SubtractedTerm {
            sizes: sub,
            multiplicity: mult,
            value: sub_value.to_f64(),
            contribution: contribution.to_f64(),
        });
    }
    if atomic {
        value = atomic_residual_in::<R>(n, k, r);
    }
    Ok(Expansion {
        value,
        leading,
        terms,
    })
}

fn check_atomic(n: usize, k: usize, r: f64) -> Result<()> {
    check_squeezing(r)?;
    if k < 2 || k > n {
        return Err(Error::domain(format!(
            "atomic residual needs 2 <= K <= N, got K={k} N={n}"
        )));
    }
    Ok(())
}

/// Closed-form genuine `K`-partite contangle of `K` single modes of the pure
/// `N`-mode fully symmetric state (extended precision).
pub fn atomic_residual(n: usize, k: usize, r: f64) -> Result<f64> {
    atomic_residual_with(n, k, r, Precision::Extended)
}

pub fn atomic_residual_with(n: usize, k: usize, r: f64, precision: Precision) -> Result<f64> {
    check_atomic(n, k, r)?;
    match precision {
        Precision::Double => Ok(atomic_residual_in::<f64>(n, k, r)),
        Precision::Extended => escalate(k, || {
            let v = atomic_residual_in::<Wide>(n, k, r).to_f64();
            Ok((v, v))
        }),
    }
}

/// `Σ_{j=0}^{K-2} C(K-1, j) (-1)^j arcsinh²[2√(K-1-j) sinh(2r) / (√N √(e^{4r}(j+N-K) + K-j))]`
pub fn atomic_residual_in<R: Real>(n: usize, k: usize, r: f64) -> R {
    let two = R::from_f64(2.0);
    let r = R::from_f64(r);
    let sinh2r = (two.clone() * r.clone()).sinh();
    let e4r = (R::from_f64(4.0) * r).exp();
    let sqrt_n = R::from_int(n as i64).sqrt();
    let (n, k) = (n as i64, k as i64);
    let mut binom = R::one();
    let mut total = R::zero();
    for j in 0..=(k - 2) {
        let num = two.clone() * R::from_int(k - 1 - j).sqrt() * sinh2r.clone();
        let den =
            sqrt_n.clone() * (e4r.clone() * R::from_int(j + n - k) + R::from_int(k - j)).sqrt();
        let term = binom.clone() * (num / den).asinh().square();
        total = if j % 2 == 0 {
            total + term
        } else {
            total - term
        };
        binom = binom * R::from_int(k - 1 - j) / R::from_int(j + 1);
    }
    total
}
