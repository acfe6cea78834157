//! Randomized strong-monogamy checks and squeezing scans.
//!
//! Sample `i` of a Monte Carlo run draws from a ChaCha8 generator seeded with
//! the master seed and switched to stream `i`; draws happen in the order
//! `r`, `N`, `M`, `K`, partition. Results therefore depend only on the
//! configuration, never on how samples are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monogamy::{residual_contangle_with, ResidualOptions, DEFAULT_BUDGET};
use crate::partitions::{random_partition, ModePartition, SamplingMode};
use crate::real::Precision;

/// Relative tolerance of the non-negativity check.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Absolute slack of the `4r²` two-mode upper bound.
pub const UPPER_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub master_seed: u64,
    pub r_range: [f64; 2],
    pub n_max: usize,
    pub k_max: usize,
    pub budget: u128,
    pub precision: Precision,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            master_seed: 0,
            r_range: [0.0, 2.0],
            n_max: 100,
            k_max: 12,
            budget: DEFAULT_BUDGET,
            precision: Precision::Extended,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::domain("need at least one sample"));
        }
        if self.n_max < 2 || self.k_max < 2 {
            return Err(Error::domain("n_max and k_max must be >= 2"));
        }
        let [lo, hi] = self.r_range;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::domain(format!(
                "invalid squeezing range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStatus {
    Ok,
    Violation,
    Skipped,
}

/// Everything needed to replay one sample in isolation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub master_seed: u64,
    pub r: f64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub sampling: SamplingMode,
    pub status: SampleStatus,
    pub value: Option<f64>,
    pub leading_term: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub config: MonteCarloConfig,
    pub evaluated: usize,
    pub skipped: usize,
    pub composition_sampled: usize,
    pub min_value: Option<f64>,
    pub min_sample: Option<SampleRecord>,
    pub violations: Vec<SampleRecord>,
    /// Samples exceeding the two-mode bound `4r²`.
    pub upper_bound_breaches: Vec<SampleRecord>,
    #[serde(skip)]
    pub samples: Vec<SampleRecord>,
}

impl MonteCarloReport {
    pub fn skipped_fraction(&self) -> f64 {
        self.skipped as f64 / self.config.samples as f64
    }
}

/// Parameters of sample `index`, before evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDraw {
    pub r: f64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub sampling: SamplingMode,
}

pub fn sample_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

pub fn draw_sample(cfg: &MonteCarloConfig, index: usize) -> Result<SampleDraw> {
    let mut rng = sample_rng(cfg.master_seed, index);
    let [lo, hi] = cfg.r_range;
    let r = rng.random_range(lo..=hi);
    let n = rng.random_range(2..=cfg.n_max);
    let m = rng.random_range(2..=n);
    let k = rng.random_range(2..=m.min(cfg.k_max));
    let part = random_partition(m, k, &mut rng)?;
    Ok(SampleDraw {
        r,
        n,
        m,
        k,
        sizes: part.sizes,
        sampling: part.mode,
    })
}

/// Draws and evaluates sample `index`.
pub fn evaluate_sample(cfg: &MonteCarloConfig, index: usize) -> Result<SampleRecord> {
    let draw = draw_sample(cfg, index)?;
    let opts = ResidualOptions {
        precision: cfg.precision,
        budget: cfg.budget,
        atomic_fast_path: true,
    };
    let mut record = SampleRecord {
        index,
        master_seed: cfg.master_seed,
        r: draw.r,
        n: draw.n,
        m: draw.m,
        k: draw.k,
        sizes: draw.sizes.clone(),
        sampling: draw.sampling,
        status: SampleStatus::Skipped,
        value: None,
        leading_term: None,
        note: None,
    };
    let partition = ModePartition::new(draw.n, draw.sizes)?;
    match residual_contangle_with(&partition, draw.r, &opts) {
        Ok(rep) => {
            let threshold = -VIOLATION_TOL * (1.0 + rep.leading_term.abs());
            record.status = if rep.value < threshold {
                SampleStatus::Violation
            } else {
                SampleStatus::Ok
            };
            record.value = Some(rep.value);
            record.leading_term = Some(rep.leading_term);
        }
        Err(e) => record.note = Some(e.to_string()),
    }
    Ok(record)
}

/// Runs the Monte Carlo campaign on the current rayon pool.
pub fn run_monte_carlo(cfg: &MonteCarloConfig) -> Result<MonteCarloReport> {
    cfg.validate()?;
    let records = (0..cfg.samples)
        .into_par_iter()
        .map(|i| evaluate_sample(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(cfg, records))
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_monte_carlo_with_threads(
    cfg: &MonteCarloConfig,
    threads: usize,
) -> Result<MonteCarloReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::resource(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_monte_carlo(cfg))
}

fn aggregate(cfg: &MonteCarloConfig, samples: Vec<SampleRecord>) -> MonteCarloReport {
    let mut report = MonteCarloReport {
        config: cfg.clone(),
        evaluated: 0,
        skipped: 0,
        composition_sampled: 0,
        min_value: None,
        min_sample: None,
        violations: Vec::new(),
        upper_bound_breaches: Vec::new(),
        samples: Vec::new(),
    };
    for rec in &samples {
        if rec.sampling == SamplingMode::Composition {
            report.composition_sampled += 1;
        }
        let Some(value) = rec.value else {
            report.skipped += 1;
            continue;
        };
        report.evaluated += 1;
        if report.min_value.is_none_or(|m| value < m) {
            report.min_value = Some(value);
            report.min_sample = Some(rec.clone());
        }
        if rec.status == SampleStatus::Violation {
            report.violations.push(rec.clone());
        }
        if value > 4.0 * rec.r * rec.r + UPPER_BOUND_TOL {
            report.upper_bound_breaches.push(rec.clone());
        }
    }
    report.samples = samples;
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub r: f64,
    pub value: f64,
}

/// Residual contangle of `partition` at every squeezing in `r_grid`.
pub fn scan_squeezing(partition: &ModePartition, r_grid: &[f64]) -> Result<Vec<ScanRow>> {
    scan_squeezing_with(partition, r_grid, &ResidualOptions::default())
}

pub fn scan_squeezing_with(
    partition: &ModePartition,
    r_grid: &[f64],
    opts: &ResidualOptions,
) -> Result<Vec<ScanRow>> {
    if r_grid.windows(2).any(|w| w[0].is_nan() || w[0] > w[1]) {
        return Err(Error::domain("squeezing grid must be sorted ascending"));
    }
    r_grid
        .iter()
        .map(|&r| {
            Ok(ScanRow {
                r,
                value: residual_contangle_with(partition, r, opts)?.value,
            })
        })
        .collect()
}

/// `steps` evenly spaced points from `r_min` to `r_max` inclusive.
pub fn linear_grid(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 || r_max.is_nan() || r_min.is_nan() || r_max < r_min {
        return Err(Error::domain("grid needs steps >= 2 and r_max >= r_min"));
    }
    let h = (r_max - r_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                r_max
            } else {
                r_min + h * i as f64
            }
        })
        .collect())
}
