//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bellpt_core::bell::{bell_pair, bell_values, chsh_value, MeasurementConfig};
use bellpt_core::exec::Execution;
use bellpt_core::matrix::{
    expectation, hermitian_spectrum, partial_transpose, tensor, ComplexMatrix, SiteSubset, C64,
};
use bellpt_core::optimize::{maximize_violation, SeesawOptions};
use bellpt_core::partition::{ppt_check_all, Partition};
use bellpt_core::scan::bound_scan;
use bellpt_core::states::{
    ghz_state, random_block_mixture, random_density, random_extremal_config, random_qubit_state,
    random_separable, seeded_rng, stream_rng,
};
use bellpt_core::verify::verify_identities;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn ghz_maxima() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        let rho = ghz_state(n, FRAC_PI_4).unwrap();
        let config = MeasurementConfig::canonical(n).unwrap();
        let value = expectation(&rho, &bell_pair(&config).bell).unwrap().re;
        worst = worst.max((value - 2f64.powf((n as f64 - 1.0) / 2.0)).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && elapsed < Duration::from_secs(5),
        format!(
            "max |tr ρB - 2^((n-1)/2)| = {worst:.2e} for n = 2..6 in {}",
            secs(elapsed)
        ),
    )
}

fn bound_saturation() -> Outcome {
    let (mut worst_bound, mut worst_square, mut rows): (f64, f64, usize) = (0.0, 0.0, 0);
    for n in 2..=6 {
        for row in bound_scan(n, FRAC_PI_4, Execution::Parallel).unwrap() {
            worst_bound = worst_bound.max((row.achieved - row.bound).abs());
            let expected = 2f64.powf((n - row.p) as f64 / 2.0);
            worst_bound = worst_bound.max((row.bound - expected).abs());
            worst_square =
                worst_square.max((row.partition_bound_value - 2f64.powi((n - row.p) as i32)).abs());
            rows += 1;
        }
    }
    outcome(
        worst_bound <= 1e-8 && worst_square <= 1e-8,
        format!("{rows} rows, max |achieved - bound| = {worst_bound:.2e}, max |value - 2^(n-p)| = {worst_square:.2e}"),
    )
}

fn separable_unit_bound() -> Outcome {
    let options = SeesawOptions {
        restarts: 16,
        ..SeesawOptions::default()
    };
    let sites = |k: usize| k % 4 + 1;
    let mixed = Execution::Parallel
        .try_map(200, |k| {
            let n = sites(k);
            let rho = random_block_mixture(&Partition::singletons(n)?, 1 + k % 5, 1000 + k as u64)?;
            maximize_violation(
                &rho,
                &SeesawOptions {
                    seed: k as u64,
                    ..options
                },
                Execution::Sequential,
            )
        })
        .unwrap();
    let pure = Execution::Parallel
        .try_map(200, |k| {
            let n = sites(k);
            let rho = random_separable(n, 1 + k % 6, 5000 + k as u64)?;
            maximize_violation(
                &rho,
                &SeesawOptions {
                    seed: k as u64,
                    ..options
                },
                Execution::Sequential,
            )
        })
        .unwrap();
    let top_mixed = mixed
        .iter()
        .map(|r| r.best_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let top_pure = pure
        .iter()
        .map(|r| r.best_value)
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        top_mixed <= 1.0 + 1e-6 && top_pure <= 1.0 + 1e-6,
        format!("best over 200 separable = {top_mixed:.15}, over 200 product-pure mixtures = {top_pure:.15}"),
    )
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let required = [
        "product_gram",
        "product_square",
        "bell_squares_equal",
        "bell_square_expansion",
        "transposed_square",
        "coefficient_law",
        "count_law",
    ];
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    let mut exhaustive = true;
    for n in 1..=5 {
        let report = verify_identities(n, 100, 7, Execution::Parallel).unwrap();
        exhaustive &= report.exhaustive_partitions;
        for name in required {
            let check = report.check(name).unwrap();
            worst = worst.max(check.max_residual);
            if !check.passed || check.max_residual >= 1e-10 {
                failed.push(format!("{name}@n={n}"));
            }
        }
        if !report.passed {
            failed.push(format!("suite@n={n}"));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failed.is_empty() && exhaustive && elapsed < Duration::from_secs(60),
        format!(
            "100 configs per n = 1..5, exhaustive partitions, max residual {worst:.2e}, {}{}",
            secs(elapsed),
            if failed.is_empty() {
                String::new()
            } else {
                format!(", failed: {}", failed.join(" "))
            }
        ),
    )
}

fn chsh_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let rho = random_density(2, 1 + (k as usize) % 4, k).unwrap();
        let config = random_extremal_config(&mut stream_rng(k, 1), 2).unwrap();
        let (bell, _) = bell_values(expectation(&rho, &bell_pair(&config).product).unwrap());
        worst = worst.max((chsh_value(&rho, &config).unwrap() - 2.0 * bell).abs());
    }
    let phase_state = ghz_state(2, FRAC_PI_4).unwrap();
    let top = chsh_value(&phase_state, &MeasurementConfig::canonical(2).unwrap()).unwrap();
    let gap = (top - 2.0 * SQRT_2).abs();
    outcome(
        worst <= 1e-10 && gap <= 1e-9,
        format!("max |CHSH - 2 tr ρB| = {worst:.2e} over 100 pairs, Bell-phase CHSH = {top:.15}"),
    )
}

fn ppt_detection() -> Outcome {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let zero = C64::new(0.0, 0.0);
    let bell = ComplexMatrix::outer(&[s, zero, zero, s]);
    let spectrum =
        hermitian_spectrum(&partial_transpose(&bell, &SiteSubset::new(2, &[1]).unwrap()).unwrap())
            .unwrap();
    let min = spectrum[0];
    let mut worst_product = f64::INFINITY;
    let mut all_positive = true;
    for k in 0..100u64 {
        let n = 1 + (k as usize) % 4;
        let mut rng = seeded_rng(k);
        let rho = if k % 2 == 0 {
            tensor(
                &(0..n)
                    .map(|_| random_qubit_state(&mut rng))
                    .collect::<Vec<_>>(),
            )
            .unwrap()
        } else {
            random_block_mixture(&Partition::singletons(n).unwrap(), 1, k).unwrap()
        };
        let verdicts = ppt_check_all(
            &rho,
            &Partition::singletons(n).unwrap(),
            1e-9,
            Execution::Parallel,
        )
        .unwrap();
        all_positive &= verdicts.len() == 1 << n && verdicts.iter().all(|v| v.positive);
        worst_product = verdicts
            .iter()
            .map(|v| v.min_eigenvalue)
            .fold(worst_product, f64::min);
    }
    outcome(
        (min + 0.5).abs() <= 1e-10 && all_positive,
        format!("Bell-state min eigenvalue {min:.15}, 100 product states PPT on every subset (lowest {worst_product:.2e})"),
    )
}

fn optimizer_soundness() -> Outcome {
    let options = SeesawOptions {
        restarts: 8,
        seed: 11,
        ..SeesawOptions::default()
    };
    let (mut worst_gap, mut monotone, mut deterministic): (f64, bool, bool) = (0.0, true, true);
    for n in 1..=4 {
        let rho = ghz_state(n, FRAC_PI_4).unwrap();
        let first = maximize_violation(&rho, &options, Execution::Parallel).unwrap();
        let again = maximize_violation(&rho, &options, Execution::Sequential).unwrap();
        deterministic &=
            serde_json::to_string(&first).unwrap() == serde_json::to_string(&again).unwrap();
        monotone &= first.history.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        worst_gap = worst_gap.max((first.best_value - 2f64.powf((n as f64 - 1.0) / 2.0)).abs());
    }
    for k in 0..20u64 {
        let rho = random_density(1 + (k as usize) % 4, 2, k).unwrap();
        let result = maximize_violation(
            &rho,
            &SeesawOptions { seed: k, ..options },
            Execution::Parallel,
        )
        .unwrap();
        monotone &= result.history.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    }
    outcome(
        worst_gap <= 1e-6 && monotone && deterministic,
        format!("max recovery gap {worst_gap:.2e} for GHZ n = 1..4, monotone = {monotone}, deterministic = {deterministic}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("maximal violation of GHZ states", ghz_maxima),
        ("partition bound saturation", bound_saturation),
        ("separable states within unit bound", separable_unit_bound),
        ("operator identity suite", identity_suite),
        ("CHSH consistency", chsh_consistency),
        ("PPT detection", ppt_detection),
        ("optimizer soundness", optimizer_soundness),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let result = run();
        if !result.passed {
            failures += 1;
        }
        println!(
            "{} [{}] {name}: {}",
            if result.passed { "PASS" } else { "FAIL" },
            k + 1,
            result.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
