//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use contangle_core::monogamy::ResidualOptions;
use contangle_core::{
    atomic_residual, build_multi_glems_cm, build_pure_fs_cm, glems_d2, purity, reduce,
    reduced_block_det, residual_contangle, residual_contangle_with, run_monte_carlo,
    sorted_partitions, symplectic_eigenvalues, ModePartition, MonteCarloConfig, Precision,
    PurityTriple,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn cli(args: &[&str], envs: &[(&str, &str)]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_contangle"))
        .args(args)
        .envs(envs.iter().copied())
        .output()
        .map_err(|e| format!("cannot run contangle: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "contangle {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn residual(n: usize, r: f64, sizes: &[usize]) -> Result<f64, String> {
    let p = ModePartition::new(n, sizes.to_vec()).map_err(|e| e.to_string())?;
    residual_contangle(&p, r)
        .map(|rep| rep.value)
        .map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn five_molecule_value() -> Outcome {
    let stdout = cli(
        &[
            "residual",
            "--modes",
            "20",
            "--squeezing",
            "1.0",
            "--partition",
            "1,2,3,4,5",
        ],
        &[],
    )?;
    let v: Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
    let value = v["value"].as_f64().ok_or("no value field")?;
    ensure((value - 0.014).abs() <= 0.001, || format!("value {value}"))?;
    Ok(format!("value {value:.6}"))
}

fn example_partition() -> ModePartition {
    ModePartition::new(20, vec![1, 2, 3, 4, 5]).expect("valid partition")
}

fn five_molecule_purity() -> Outcome {
    let loc = build_multi_glems_cm(&example_partition(), 1.0).map_err(|e| e.to_string())?;
    let mu = purity(&loc.cm).map_err(|e| e.to_string())?;
    ensure((mu - 0.30).abs() <= 0.005, || format!("purity {mu}"))?;
    Ok(format!("purity {mu:.5}"))
}

#[rustfmt::skip]
const REFERENCE_MATRIX: [[f64; 10]; 10] = [
    [1.871, 0.0, 1.658, 0.0, 1.834, 0.0, 1.956, 0.0, 2.044, 0.0],
    [0.0, 1.871, 0.0, -0.1587, 0.0, -0.2152, 0.0, -0.2691, 0.0, -0.3217],
    [1.658, 0.0, 2.395, 0.0, 2.232, 0.0, 2.380, 0.0, 2.488, 0.0],
    [0.0, -0.1587, 0.0, 2.395, 0.0, -0.3535, 0.0, -0.4421, 0.0, -0.5287],
    [1.834, 0.0, 2.232, 0.0, 2.776, 0.0, 2.633, 0.0, 2.752, 0.0],
    [0.0, -0.2152, 0.0, -0.3535, 0.0, 2.776, 0.0, -0.5996, 0.0, -0.7169],
    [1.956, 0.0, 2.380, 0.0, 2.633, 0.0, 3.069, 0.0, 2.934, 0.0],
    [0.0, -0.2691, 0.0, -0.4421, 0.0, -0.5996, 0.0, 3.069, 0.0, -0.8966],
    [2.044, 0.0, 2.488, 0.0, 2.752, 0.0, 2.934, 0.0, 3.296, 0.0],
    [0.0, -0.3217, 0.0, -0.5287, 0.0, -0.7169, 0.0, -0.8966, 0.0, 3.296],
];

fn five_molecule_matrix() -> Outcome {
    let loc = build_multi_glems_cm(&example_partition(), 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for (i, row) in REFERENCE_MATRIX.iter().enumerate() {
        for (j, &reference) in row.iter().enumerate() {
            let got = loc.cm.get(i, j);
            if reference == 0.0 {
                ensure(got == 0.0, || {
                    format!("entry ({i},{j}) = {got}, expected exact zero")
                })?;
                continue;
            }
            // one unit in the fourth significant digit
            let unit = 10f64.powi(reference.abs().log10().floor() as i32 - 3);
            let units = (got - reference).abs() / unit;
            ensure(units <= 1.0, || {
                format!("entry ({i},{j}) = {got}, reference {reference}")
            })?;
            worst = worst.max(units);
        }
    }
    Ok(format!("100 entries, worst deviation {worst:.3} units"))
}

fn partition_list() -> Outcome {
    let list = sorted_partitions(8, 4).map_err(|e| e.to_string())?;
    let expected = vec![
        vec![1, 1, 1, 5],
        vec![1, 1, 2, 4],
        vec![1, 1, 3, 3],
        vec![1, 2, 2, 3],
        vec![2, 2, 2, 2],
    ];
    ensure(list == expected, || format!("got {list:?}"))?;
    Ok("5 partitions in ranking order".into())
}

fn recursion_matches_closed_form() -> Outcome {
    let opts = ResidualOptions {
        precision: Precision::Extended,
        atomic_fast_path: false,
        ..Default::default()
    };
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for n in 2..=12 {
        for k in 2..=n {
            for r in [0.1, 0.5, 1.0, 2.0] {
                let p = ModePartition::new(n, vec![1; k]).map_err(|e| e.to_string())?;
                let rec = residual_contangle_with(&p, r, &opts)
                    .map_err(|e| e.to_string())?
                    .value;
                let closed = atomic_residual(n, k, r).map_err(|e| e.to_string())?;
                let err = (rec - closed).abs() / closed.abs();
                ensure(err <= 1e-10, || {
                    format!("n={n} k={k} r={r}: {rec} vs {closed}")
                })?;
                worst = worst.max(err);
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases, worst relative error {worst:.2e}"))
}

fn determinant_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    for n in 2..=20 {
        for step in 0..=8 {
            let r = 0.25 * step as f64;
            let cm = build_pure_fs_cm(n, r).map_err(|e| e.to_string())?;
            for l in 1..=n {
                let modes: Vec<usize> = (0..l).collect();
                let numeric = reduce(&cm, &modes)
                    .map_err(|e| e.to_string())?
                    .determinant();
                let closed = reduced_block_det(n, r, l).map_err(|e| e.to_string())?;
                let err = ((numeric - closed) / closed).abs();
                ensure(err <= 1e-8, || {
                    format!("n={n} r={r} l={l}: {numeric} vs {closed}")
                })?;
                worst = worst.max(err);
            }
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn strong_monogamy_campaign() -> Outcome {
    let cfg = MonteCarloConfig {
        samples: 10_000,
        k_max: 12,
        ..Default::default()
    };
    let report = run_monte_carlo(&cfg).map_err(|e| e.to_string())?;
    let skipped = report.skipped_fraction();
    ensure(report.violations.is_empty(), || {
        format!(
            "{} violations, first {:?}",
            report.violations.len(),
            report.violations[0]
        )
    })?;
    ensure(skipped < 0.05, || format!("skipped fraction {skipped}"))?;
    Ok(format!(
        "{} evaluated, 0 violations, skipped fraction {skipped:.4}, min value {:.3e}",
        report.evaluated,
        report.min_value.unwrap_or(f64::NAN)
    ))
}

fn scale_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    let mut cases = 0;
    while cases < 50 {
        let n = rng.random_range(2..=20);
        let k = rng.random_range(2..=5.min(n));
        let mut sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=n / k)).collect();
        sizes.sort_unstable();
        let s = rng.random_range(2..=3);
        let r = rng.random_range(0.05..2.0);
        let base = residual(n, r, &sizes)?;
        let scaled_sizes: Vec<usize> = sizes.iter().map(|&m| s * m).collect();
        let scaled = residual(s * n, r, &scaled_sizes)?;
        let err = (base - scaled).abs() / base.abs();
        ensure(err <= 1e-12, || {
            format!("n={n} {sizes:?} s={s} r={r}: {base} vs {scaled}")
        })?;
        worst = worst.max(err);
        cases += 1;
    }
    Ok(format!("50 cases, worst relative error {worst:.2e}"))
}

fn strictly_decreasing(label: &str, values: &[f64]) -> Result<(), String> {
    for w in values.windows(2) {
        ensure(w[0] - w[1] > 1e-12, || {
            format!("{label} not strictly ordered: {values:?}")
        })?;
    }
    Ok(())
}

fn figure_orderings() -> Outcome {
    let by_count: Vec<f64> = [2, 3, 4, 6, 12]
        .iter()
        .map(|&k| residual(12, 1.0, &vec![12 / k; k]))
        .collect::<Result<_, _>>()?;
    strictly_decreasing("molecule count", &by_count)?;

    let ranked: Vec<f64> = sorted_partitions(8, 4)
        .map_err(|e| e.to_string())?
        .iter()
        .rev()
        .map(|p| residual(8, 1.0, p))
        .collect::<Result<_, _>>()?;
    strictly_decreasing("ranked partitions", &ranked)?;

    let by_parent: Vec<f64> = (10..=14)
        .map(|n| residual(n, 1.0, &[1, 2, 3, 4]))
        .collect::<Result<_, _>>()?;
    strictly_decreasing("parent modes", &by_parent)?;
    Ok("molecule count, ranked partitions and parent modes all strictly ordered".into())
}

fn property_suites() -> Outcome {
    // localized spectrum: all but one symplectic eigenvalue equal 1
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let n = rng.random_range(2..=40);
        let m = rng.random_range(2..=n);
        let k = rng.random_range(2..=m.min(8));
        let list = sorted_partitions(m, k).map_err(|e| e.to_string())?;
        let sizes = list[rng.random_range(0..list.len())].clone();
        let r = rng.random_range(0.0..2.0);
        let p = ModePartition::new(n, sizes.clone()).map_err(|e| e.to_string())?;
        let loc = build_multi_glems_cm(&p, r).map_err(|e| e.to_string())?;
        let spec = symplectic_eigenvalues(&loc.cm).map_err(|e| e.to_string())?;
        let dev = spec.values[1..]
            .iter()
            .fold(0.0_f64, |d, v| d.max((v - 1.0).abs()));
        ensure(dev <= 1e-7, || {
            format!("multi-GLEMS n={n} {sizes:?} r={r}: deviation {dev}")
        })?;
    }

    // pure fully symmetric states
    for n in 2..=100 {
        for r in [0.5, 1.0, 2.0] {
            let spec = symplectic_eigenvalues(&build_pure_fs_cm(n, r).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let tol = 1e-9 * (4.0 * r).exp();
            ensure(spec.values.iter().all(|v| (v - 1.0).abs() <= tol), || {
                format!("pure state n={n} r={r}: {:?}", (spec.min(), spec.max()))
            })?;
        }
    }

    // glems_d2 continuity across both branch boundaries
    let mut straddled = 0;
    while straddled < 200 {
        let a: f64 = rng.random_range(1.0..6.0);
        let b: f64 = rng.random_range(1.0..6.0);
        let (sum, diff) = (a * a + b * b, a * a - b * b);
        let c2 = (sum - 1.0).sqrt();
        let c1 = ((2.0 * sum + diff * diff + diff.abs() * (diff * diff + 8.0 * sum).sqrt())
            / (2.0 * sum))
            .sqrt();
        let boundary = if straddled % 2 == 0 { c2 } else { c1 };
        let eps = 1e-9 * boundary;
        if boundary > c2 || boundary - eps < 1.0 || boundary + eps > a * b {
            continue;
        }
        let eval = |c: f64| {
            PurityTriple::new(a, b, c)
                .and_then(|t| glems_d2(&t))
                .map_err(|e| e.to_string())
        };
        let jump = (eval(boundary + eps)? - eval(boundary - eps)?).abs();
        ensure(jump <= 1e-6, || {
            format!("glems_d2 jump {jump} at a={a} b={b} c={boundary}")
        })?;
        straddled += 1;
    }

    // residual nondecreasing in r
    for (n, sizes) in [
        (20, vec![1, 2, 3, 4, 5]),
        (10, vec![1, 2, 3, 4]),
        (16, vec![2, 2, 3, 5]),
        (7, vec![1, 1, 1]),
    ] {
        let mut prev = 0.0;
        for step in 0..=10 {
            let r = 0.2 * step as f64;
            let v = residual(n, r, &sizes)?;
            ensure(v >= prev - 1e-12, || {
                format!("n={n} {sizes:?}: {v} < {prev} at r={r}")
            })?;
            prev = v;
        }
    }
    Ok("multi-GLEMS spectra, pure spectra, branch continuity and monotonicity hold".into())
}

fn montecarlo_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |threads: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let csv = dir.path().join(format!("samples-{threads}.csv"));
        let args = [
            "montecarlo",
            "--samples",
            "10000",
            "--seed",
            "2024",
            "--csv",
            csv.to_str().unwrap(),
        ];
        let report = cli(&args, &[("CONTANGLE_THREADS", threads)])?;
        let samples = std::fs::read(&csv).map_err(|e| e.to_string())?;
        Ok((report, samples))
    };
    let (report_one, samples_one) = run("1")?;
    let (report_four, samples_four) = run("4")?;
    ensure(report_one == report_four, || {
        "reports differ between 1 and 4 threads".into()
    })?;
    ensure(samples_one == samples_four, || {
        "per-sample CSVs differ between 1 and 4 threads".into()
    })?;
    Ok(format!(
        "{} report bytes and {} per-sample CSV bytes identical",
        report_one.len(),
        samples_one.len()
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "five-molecule value",
            budget: secs(1),
            run: five_molecule_value,
        },
        Criterion {
            id: 2,
            name: "five-molecule purity",
            budget: secs(1),
            run: five_molecule_purity,
        },
        Criterion {
            id: 3,
            name: "five-molecule matrix",
            budget: secs(1),
            run: five_molecule_matrix,
        },
        Criterion {
            id: 4,
            name: "partition list",
            budget: secs(1),
            run: partition_list,
        },
        Criterion {
            id: 5,
            name: "recursion vs closed form",
            budget: secs(30),
            run: recursion_matches_closed_form,
        },
        Criterion {
            id: 6,
            name: "determinant oracle",
            budget: secs(30),
            run: determinant_oracle,
        },
        Criterion {
            id: 7,
            name: "strong monogamy campaign",
            budget: secs(600),
            run: strong_monogamy_campaign,
        },
        Criterion {
            id: 8,
            name: "scale invariance",
            budget: secs(60),
            run: scale_invariance,
        },
        Criterion {
            id: 9,
            name: "figure orderings",
            budget: secs(60),
            run: figure_orderings,
        },
        Criterion {
            id: 10,
            name: "property suites",
            budget: secs(120),
            run: property_suites,
        },
        Criterion {
            id: 11,
            name: "montecarlo determinism",
            budget: secs(600),
            run: montecarlo_determinism,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!(
                "{detail}; took {elapsed:.2?}, budget {:?}",
                c.budget
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {} ({elapsed:.2?}): {detail}",
                c.id, c.name
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {} ({elapsed:.2?}): {why}",
                    c.id, c.name
                );
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
