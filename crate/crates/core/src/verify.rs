//! Randomized check of the operator identities behind the bounds.

use rand::Rng;
use serde::Serialize;

use crate::bell::{bell_pair, bell_square_expansion, subset_expansion, MeasurementConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::{check_site_count, hermitian_spectrum, partial_transpose, SiteSubset};
use crate::partition::{
    coefficient_forms, is_p_even, p_even_subsets, partition_lattice, transposed_square, Partition,
};
use crate::states::{random_bloch_config, random_extremal_config, stream_rng};

/// Residual tolerance for every identity.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Up to this size the partition laws run over every set partition.
pub const EXHAUSTIVE_PARTITION_SITES: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub exhaustive_partitions: bool,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const SETTING_CHECKS: [&str; 6] = [
    "product_gram",
    "product_square",
    "bell_squares_equal",
    "bell_square_expansion",
    "transposed_square",
    "norm_bound",
];

/// Residuals of the settings-dependent identities for one configuration and
/// transposed subset, in the order of `SETTING_CHECKS`.
pub fn setting_residuals(config: &MeasurementConfig, alpha: &SiteSubset) -> Result<[f64; 6]> {
    let n = config.n();
    let pair = bell_pair(config);
    let b = &pair.product;
    let b_adj = b.adjoint();
    let terms = config.commutator_terms();

    // b†b = Σ_β ⊗ c_k and bb† = Σ_β (-1)^{|β|} ⊗ c_k.
    let gram = subset_expansion(&terms, |_| 1.0);
    let cogram = subset_expansion(&terms, |beta| if beta.len() % 2 == 0 { 1.0 } else { -1.0 });
    let product_gram = b_adj
        .matmul(b)
        .max_abs_diff(&gram)
        .max(b.matmul(&b_adj).max_abs_diff(&cogram));

    let product_square = b.matmul(b).max_abs_diff(&b_adj.matmul(&b_adj));

    let bell_sq = pair.bell.matmul(&pair.bell);
    let bell_prime_sq = pair.bell_prime.matmul(&pair.bell_prime);
    let squares_equal = bell_sq.max_abs_diff(&bell_prime_sq);

    let expansion = bell_square_expansion(config)?;
    let expansion_residual = bell_sq.max_abs_diff(&expansion);

    let b_t = partial_transpose(&pair.bell, alpha)?;
    let direct = partial_transpose(&b_t.matmul(&b_t), alpha)?;
    let transposed = direct.max_abs_diff(&transposed_square(config, alpha)?);

    let top = *hermitian_spectrum(&expansion)?
        .last()
        .expect("nonempty spectrum");
    let norm_excess = (top - 2f64.powi(n as i32 - 1)).max(0.0);

    Ok([
        product_gram,
        product_square,
        squares_equal,
        expansion_residual,
        transposed,
        norm_excess,
    ])
}

/// Residuals of the coefficient, count and lattice-size laws for one partition.
pub fn partition_residuals(partition: &Partition) -> Result<[f64; 3]> {
    let (n, p) = (partition.n(), partition.p());
    let mut coefficient: f64 = 0.0;
    for beta in SiteSubset::all(n) {
        let (avg, prod) = coefficient_forms(partition, &beta)?;
        let indicator = if is_p_even(partition, &beta) {
            1.0
        } else {
            0.0
        };
        coefficient = coefficient
            .max((avg - prod).abs())
            .max((avg - indicator).abs());
    }
    let count = (p_even_subsets(partition).len() as f64 - 2f64.powi((n - p) as i32)).abs();
    let lattice = (partition_lattice(partition).len() as f64 - 2f64.powi(p as i32)).abs();
    Ok([coefficient, count, lattice])
}

fn random_partition<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Partition> {
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (site, &l) in labels.iter().enumerate() {
        blocks[l].push(site + 1);
    }
    blocks.retain(|b| !b.is_empty());
    Partition::new(n, &blocks)
}

/// Runs the identity suite at `n` sites over `trials` random extremal settings.
///
/// Trial `t` draws from ChaCha8 stream `t` of `seed`. Even trials use general
/// extremal observables (possibly `±1`), odd trials non-commuting Bloch ones.
pub fn verify_identities(
    n: usize,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<VerifyReport> {
    check_site_count(n)?;
    let per_trial = exec.try_map(trials, |t| {
        let mut rng = stream_rng(seed, t as u64);
        let config = if t % 2 == 0 {
            random_extremal_config(&mut rng, n)?
        } else {
            random_bloch_config(&mut rng, n)?
        };
        let alpha = SiteSubset::from_mask(n, rng.random_range(0..1u64 << n));
        setting_residuals(&config, &alpha)
    })?;

    let exhaustive = n <= EXHAUSTIVE_PARTITION_SITES;
    let partitions = if exhaustive {
        Partition::enumerate_all(n)?
    } else {
        let mut rng = stream_rng(seed, u64::MAX);
        (0..trials.max(1))
            .map(|_| random_partition(&mut rng, n))
            .collect::<Result<_>>()?
    };
    let per_partition = exec.try_map(partitions.len(), |k| partition_residuals(&partitions[k]))?;

    let mut checks: Vec<IdentityCheck> = SETTING_CHECKS
        .iter()
        .enumerate()
        .map(|(k, &name)| summarize(name, per_trial.iter().map(|r| r[k])))
        .collect();
    for (k, name) in ["coefficient_law", "count_law", "lattice_size"]
        .into_iter()
        .enumerate()
    {
        checks.push(summarize(name, per_partition.iter().map(|r| r[k])));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        n,
        trials,
        seed,
        exhaustive_partitions: exhaustive,
        checks,
        passed,
    })
}

fn summarize(name: &'static str, residuals: impl Iterator<Item = f64>) -> IdentityCheck {
    let (mut worst, mut samples, mut nan) = (0.0f64, 0, false);
    for r in residuals {
        nan |= r.is_nan();
        worst = worst.max(r);
        samples += 1;
    }
    IdentityCheck {
        name,
        max_residual: if nan { f64::NAN } else { worst },
        tolerance: IDENTITY_TOL,
        samples,
        passed: !nan && worst < IDENTITY_TOL,
    }
}

/// Converts a failed report into an [`Error::Inconsistency`].
pub fn require_passed(report: &VerifyReport) -> Result<()> {
    match report.checks.iter().find(|c| !c.passed) {
        None => Ok(()),
        Some(c) => Err(Error::Inconsistency(format!(
            "identity {} has residual {} >= {}",
            c.name, c.max_residual, c.tolerance
        ))),
    }
}
