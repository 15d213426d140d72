//! Site partitions, PPT certification and the partition-dependent bound.
//!
//! For a partition of `{1..n}` into `p` blocks, the lattice `P` holds the `2^p`
//! unions of blocks. If `ρ^{T_α} ≥ 0` for every `α ∈ P`, averaging the
//! variance inequality over `P` kills every commutator string `β` that meets
//! some block in an odd number of sites, leaving `2^{n-p}` surviving terms and
//! the bound `|tr ρB| ≤ 2^{(n-p)/2}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bell::{bell_pair, bell_values, signed_even_expansion, MeasurementConfig};
use crate::error::{argument, domain, Error, Result};
use crate::exec::Execution;
use crate::matrix::{
    check_site_count, expectation, full_mask, is_psd, partial_transpose, product_expectation,
    site_count, ComplexMatrix, SiteSubset, HERMIT_TOL,
};

/// Slack on unit trace when validating density matrices.
pub const TRACE_TOL: f64 = 1e-10;

/// Ordered decomposition of `{1..n}` into disjoint nonempty blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    n: usize,
    blocks: Vec<SiteSubset>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(repr: PartitionRepr) -> Result<Self> {
        Partition::new(repr.n, &repr.blocks)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            n: p.n,
            blocks: p.block_members(),
        }
    }
}

impl Partition {
    /// Blocks are given as lists of 1-based sites.
    pub fn new(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        check_site_count(n)?;
        let mut covered = 0u64;
        let mut subsets = Vec::with_capacity(blocks.len());
        for (m, block) in blocks.iter().enumerate() {
            let subset =
                SiteSubset::new(n, block).map_err(|e| argument(format!("block {}: {e}", m + 1)))?;
            if subset.is_empty() {
                return Err(argument(format!("block {} is empty", m + 1)));
            }
            if covered & subset.mask() != 0 {
                return Err(argument(format!(
                    "block {} overlaps an earlier block",
                    m + 1
                )));
            }
            covered |= subset.mask();
            subsets.push(subset);
        }
        if covered != full_mask(n) {
            let missing = SiteSubset::from_mask(n, full_mask(n) & !covered);
            return Err(argument(format!(
                "sites {:?} are not covered by any block",
                missing.members()
            )));
        }
        Ok(Self { n, blocks: subsets })
    }

    /// Consecutive blocks of the given sizes.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let mut next = 1;
        let blocks: Vec<Vec<usize>> = sizes
            .iter()
            .map(|&s| {
                let b = (next..next + s).collect();
                next += s;
                b
            })
            .collect();
        Self::new(next - 1, &blocks)
    }

    /// `{1}, {2}, …, {p-1}, {p..n}`: `p - 1` singletons followed by one block.
    pub fn leading_singletons(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(argument(format!("block count {p} outside 1..={n}")));
        }
        let mut sizes = vec![1; p - 1];
        sizes.push(n - p + 1);
        Self::contiguous(&sizes)
    }

    pub fn singletons(n: usize) -> Result<Self> {
        Self::contiguous(&vec![1; n])
    }

    pub fn whole(n: usize) -> Result<Self> {
        Self::contiguous(&[n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[SiteSubset] {
        &self.blocks
    }

    pub fn block_members(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(SiteSubset::members).collect()
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n == coarser.n
            && self
                .blocks
                .iter()
                .all(|b| coarser.blocks.iter().any(|c| b.mask() & !c.mask() == 0))
    }

    /// Every set partition of `{1..n}`, blocks ordered by smallest member.
    pub fn enumerate_all(n: usize) -> Result<Vec<Partition>> {
        check_site_count(n)?;
        // Restricted growth strings: label[0] = 0, label[k] <= max(label[..k]) + 1.
        let mut out = Vec::new();
        let mut labels = vec![0usize; n];
        loop {
            let p = labels.iter().max().unwrap() + 1;
            let mut blocks = vec![Vec::new(); p];
            for (site, &l) in labels.iter().enumerate() {
                blocks[l].push(site + 1);
            }
            out.push(Partition::new(n, &blocks)?);

            let mut k = n;
            loop {
                if k == 1 {
                    return Ok(out);
                }
                k -= 1;
                let bound = labels[..k].iter().max().unwrap() + 1;
                if labels[k] < bound {
                    labels[k] += 1;
                    labels[k + 1..].iter_mut().for_each(|l| *l = 0);
                    break;
                }
            }
        }
    }
}

/// All `2^p` unions of blocks, ordered by block-index bitmask (bit `m` ↔ block `m+1`).
pub fn partition_lattice(partition: &Partition) -> Vec<SiteSubset> {
    let p = partition.p();
    (0..1u64 << p)
        .map(|sel| {
            let mask = partition
                .blocks
                .iter()
                .enumerate()
                .filter(|(m, _)| sel >> m & 1 == 1)
                .fold(0u64, |acc, (_, b)| acc | b.mask());
            SiteSubset::from_mask(partition.n, mask)
        })
        .collect()
}

/// Whether `|α_m ∩ β|` is even for every block `α_m`.
pub fn is_p_even(partition: &Partition, beta: &SiteSubset) -> bool {
    partition
        .blocks
        .iter()
        .all(|b| b.intersection_len(beta) % 2 == 0)
}

/// All `P`-even subsets, by filtering the `2^n` subsets. There are `2^{n-p}`.
pub fn p_even_subsets(partition: &Partition) -> Vec<SiteSubset> {
    SiteSubset::all(partition.n)
        .filter(|beta| is_p_even(partition, beta))
        .collect()
}

/// The two routes to the averaged sign of `β` over the lattice:
/// `2^{-p} Σ_{α∈P} (-1)^{|α∩β|}` and `2^{-p} Π_m (1 + (-1)^{|α_m∩β|})`.
pub fn coefficient_forms(partition: &Partition, beta: &SiteSubset) -> Result<(f64, f64)> {
    if beta.n() != partition.n {
        return Err(argument(format!(
            "subset over {} sites for a partition of {} sites",
            beta.n(),
            partition.n
        )));
    }
    let scale = 0.5f64.powi(partition.p() as i32);
    let parity = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let sum: f64 = partition_lattice(partition)
        .iter()
        .map(|alpha| parity(alpha.intersection_len(beta)))
        .sum();
    let product: f64 = partition
        .blocks
        .iter()
        .map(|b| 1.0 + parity(b.intersection_len(beta)))
        .product();
    Ok((scale * sum, scale * product))
}

/// Averaged coefficient of `β`: 1 if `β` is `P`-even, else 0. Both routes of
/// [`coefficient_forms`] are evaluated and must agree.
pub fn averaged_coefficient(partition: &Partition, beta: &SiteSubset) -> Result<f64> {
    let (avg, prod) = coefficient_forms(partition, beta)?;
    if (avg - prod).abs() > 1e-12 {
        return Err(Error::Inconsistency(format!(
            "coefficient of {beta:?}: lattice average {avg} != product form {prod}"
        )));
    }
    Ok(avg)
}

/// `2^{(n-p)/2}`.
pub fn max_violation_bound(n: usize, p: usize) -> Result<f64> {
    if n == 0 || p == 0 || p > n {
        return Err(argument(format!("need 1 <= p <= n, got n = {n}, p = {p}")));
    }
    Ok(2f64.powf((n - p) as f64 / 2.0))
}

/// Checks Hermiticity, unit trace and positivity (within `tol`).
pub fn validate_density(rho: &ComplexMatrix, tol: f64) -> Result<usize> {
    let n = site_count(rho)?;
    let defect = rho.hermiticity_defect();
    if defect > HERMIT_TOL {
        return Err(domain(format!(
            "state is not Hermitian (max |ρ - ρ†| = {defect:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(domain(format!(
            "state has trace {} + {}i, expected 1",
            tr.re, tr.im
        )));
    }
    let (psd, min) = is_psd(rho, tol)?;
    if !psd {
        return Err(domain(format!(
            "state is not positive (min eigenvalue {min:.3e})"
        )));
    }
    Ok(n)
}

/// PPT verdict for one element of the partition lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PptVerdict {
    pub alpha: SiteSubset,
    pub positive: bool,
    pub min_eigenvalue: f64,
}

/// `is_psd(ρ^{T_α})` for every `α` in the partition lattice, in lattice order.
pub fn ppt_check_all(
    rho: &ComplexMatrix,
    partition: &Partition,
    tol: f64,
    exec: Execution,
) -> Result<Vec<PptVerdict>> {
    let n = validate_density(rho, tol)?;
    if n != partition.n {
        return Err(argument(format!(
            "{n}-site state with a partition of {} sites",
            partition.n
        )));
    }
    let lattice = partition_lattice(partition);
    exec.try_map(lattice.len(), |k| {
        let alpha = lattice[k];
        let (positive, min_eigenvalue) = is_psd(&partial_transpose(rho, &alpha)?, tol)?;
        Ok(PptVerdict {
            alpha,
            positive,
            min_eigenvalue,
        })
    })
}

/// `((B^{T_α})²)^{T_α} = Σ_{|β| even} (-1)^{|α∩β|} ⊗_{k∈β} (i/2)[A_k, A'_k]`.
pub fn transposed_square(config: &MeasurementConfig, alpha: &SiteSubset) -> Result<ComplexMatrix> {
    config.require_extremal()?;
    if alpha.n() != config.n() {
        return Err(argument(format!(
            "subset over {} sites for {} settings",
            alpha.n(),
            config.n()
        )));
    }
    let a = alpha.mask();
    Ok(signed_even_expansion(&config.commutator_terms(), |beta| {
        if (a & beta).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }))
}

/// `Σ_{β P-even} tr(ρ ⊗_{k∈β} (i/2)[A_k, A'_k])`, at most `2^{n-p}`; an upper
/// bound on `(tr ρB)²` whenever ρ is PPT across the partition.
pub fn partition_bound_value(
    rho: &ComplexMatrix,
    config: &MeasurementConfig,
    partition: &Partition,
) -> Result<f64> {
    config.require_extremal()?;
    let n = validate_density(rho, crate::matrix::PSD_TOL)?;
    if n != config.n() || n != partition.n {
        return Err(argument(format!(
            "site counts differ: state {n}, settings {}, partition {}",
            config.n(),
            partition.n
        )));
    }
    Ok(p_even_sum(rho, &config.commutator_terms(), partition))
}

/// The sum behind [`partition_bound_value`], without validating `rho`.
pub(crate) fn p_even_sum(
    rho: &ComplexMatrix,
    terms: &[ComplexMatrix],
    partition: &Partition,
) -> f64 {
    if partition.p() < partition.n - partition.p() {
        lattice_sum(rho, terms, partition)
    } else {
        subset_sum(rho, terms, partition)
    }
}

/// One product expectation per `P`-even `β`.
fn subset_sum(rho: &ComplexMatrix, terms: &[ComplexMatrix], partition: &Partition) -> f64 {
    let id = ComplexMatrix::identity(2);
    p_even_subsets(partition)
        .iter()
        .map(|beta| {
            let factors: Vec<ComplexMatrix> = (1..=partition.n)
                .map(|k| {
                    if beta.contains(k) {
                        terms[k - 1].clone()
                    } else {
                        id.clone()
                    }
                })
                .collect();
            product_expectation(rho, &factors).re
        })
        .sum()
}

/// Same sum through the lattice average:
/// `2^{-p} Σ_{α∈P} tr(ρ ⊗_k (1 ± c_k))`, minus where `k ∈ α`.
fn lattice_sum(rho: &ComplexMatrix, terms: &[ComplexMatrix], partition: &Partition) -> f64 {
    let id = ComplexMatrix::identity(2);
    let total: f64 = partition_lattice(partition)
        .iter()
        .map(|alpha| {
            let factors: Vec<ComplexMatrix> = (1..=partition.n)
                .map(|k| {
                    if alpha.contains(k) {
                        &id - &terms[k - 1]
                    } else {
                        &id + &terms[k - 1]
                    }
                })
                .collect();
            product_expectation(rho, &factors).re
        })
        .sum();
    total * 0.5f64.powi(partition.p() as i32)
}

/// Everything [`certify`] computes for one (state, settings, partition) triple.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub p: usize,
    pub blocks: Vec<Vec<usize>>,
    pub tol: f64,
    /// `2^{(n-p)/2}`.
    pub bound: f64,
    /// `|tr ρB|`.
    pub achieved: f64,
    /// `|tr ρB'|`.
    pub achieved_prime: f64,
    pub partition_bound_value: f64,
    pub all_ppt: bool,
    pub ppt_verdicts: Vec<PptVerdict>,
    pub identity_residuals: BTreeMap<String, f64>,
    pub tool_version: String,
}

impl BoundReport {
    /// Allowance for `achieved` above `bound` when every verdict passed only
    /// within the positivity tolerance.
    pub fn margin(&self) -> f64 {
        let dim = (1u64 << self.n) as f64;
        self.tol * (1.0 + dim * 2f64.powi(self.n as i32 - 1))
    }

    /// True when the state is PPT across the lattice yet exceeds the bound.
    pub fn theorem_violated(&self) -> bool {
        self.all_ppt
            && (self.achieved > self.bound + self.margin()
                || self.achieved_prime > self.bound + self.margin())
    }
}

/// Assembles PPT verdicts, the bound, the achieved values and residuals of
/// `tr ρB = tr ρ^{T_α} B^{T_α}` for each lattice element.
///
/// Returns [`Error::Inconsistency`] when the state is PPT across the lattice
/// and still exceeds the bound.
pub fn certify(
    rho: &ComplexMatrix,
    config: &MeasurementConfig,
    partition: &Partition,
    tol: f64,
    exec: Execution,
) -> Result<BoundReport> {
    let n = validate_density(rho, tol)?;
    if n != config.n() || n != partition.n {
        return Err(argument(format!(
            "site counts differ: state {n}, settings {}, partition {}",
            config.n(),
            partition.n
        )));
    }
    let verdicts = ppt_check_all(rho, partition, tol, exec)?;
    let all_ppt = verdicts.iter().all(|v| v.positive);
    let pair = bell_pair(config);
    let (value, value_prime) = bell_values(expectation(rho, &pair.product)?);

    let lattice = partition_lattice(partition);
    let chain = exec.try_map(lattice.len(), |k| {
        let alpha = lattice[k];
        let rho_t = partial_transpose(rho, &alpha)?;
        let b_t = partial_transpose(&pair.bell, &alpha)?;
        let transposed = expectation(&rho_t, &b_t)?;
        Ok::<_, Error>((
            alpha,
            (transposed - crate::matrix::C64::new(value, 0.0)).norm(),
        ))
    })?;
    let mut residuals = BTreeMap::new();
    for (alpha, r) in chain {
        residuals.insert(format!("trace_under_transpose{alpha:?}"), r);
    }

    let partition_value = if config.require_extremal().is_ok() {
        let v = p_even_sum(rho, &config.commutator_terms(), partition);
        if all_ppt {
            residuals.insert("square_bound_excess".into(), (value * value - v).max(0.0));
        }
        v
    } else {
        f64::NAN
    };

    let report = BoundReport {
        n,
        p: partition.p(),
        blocks: partition.block_members(),
        tol,
        bound: max_violation_bound(n, partition.p())?,
        achieved: value.abs(),
        achieved_prime: value_prime.abs(),
        partition_bound_value: partition_value,
        all_ppt,
        ppt_verdicts: verdicts,
        identity_residuals: residuals,
        tool_version: crate::TOOL_VERSION.to_string(),
    };
    if report.theorem_violated() {
        return Err(Error::Inconsistency(format!(
            "state is PPT across {:?} but |tr ρB| = {} exceeds {}",
            report.blocks, report.achieved, report.bound
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli, C64, PSD_TOL, ZERO};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn subset(n: usize, m: &[usize]) -> SiteSubset {
        SiteSubset::new(n, m).unwrap()
    }

    fn bell_state() -> ComplexMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        ComplexMatrix::outer(&[h, ZERO, ZERO, h])
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, &[vec![1, 2], vec![3]]).is_ok());
        assert!(Partition::new(3, &[vec![1, 2], vec![2, 3]]).is_err());
        assert!(Partition::new(3, &[vec![1, 2]]).is_err());
        assert!(Partition::new(3, &[vec![1, 2, 3], vec![]]).is_err());
        assert!(Partition::new(3, &[vec![1, 2, 4]]).is_err());
        let json = r#"{"n": 3, "blocks": [[1, 2], [3]]}"#;
        let p: Partition = serde_json::from_str(json).unwrap();
        assert_eq!(p.block_members(), vec![vec![1, 2], vec![3]]);
    }

    #[test]
    fn lattice_examples() {
        let p = Partition::singletons(2).unwrap();
        assert_eq!(
            partition_lattice(&p),
            vec![
                subset(2, &[]),
                subset(2, &[1]),
                subset(2, &[2]),
                subset(2, &[1, 2])
            ]
        );
        assert_eq!(
            partition_lattice(&Partition::whole(4).unwrap()),
            vec![subset(4, &[]), SiteSubset::full(4)]
        );
        let p = Partition::new(3, &[vec![1, 2], vec![3]]).unwrap();
        assert_eq!(
            partition_lattice(&p),
            vec![
                subset(3, &[]),
                subset(3, &[1, 2]),
                subset(3, &[3]),
                subset(3, &[1, 2, 3])
            ]
        );
    }

    #[test]
    fn p_even_examples() {
        assert_eq!(
            p_even_subsets(&Partition::singletons(2).unwrap()),
            vec![subset(2, &[])]
        );
        let p = Partition::new(3, &[vec![1, 2], vec![3]]).unwrap();
        assert_eq!(p_even_subsets(&p), vec![subset(3, &[]), subset(3, &[1, 2])]);
        assert_eq!(
            p_even_subsets(&Partition::whole(3).unwrap()),
            vec![
                subset(3, &[]),
                subset(3, &[1, 2]),
                subset(3, &[1, 3]),
                subset(3, &[2, 3])
            ]
        );
    }

    #[test]
    fn coefficient_examples() {
        let p = Partition::singletons(2).unwrap();
        assert_eq!(averaged_coefficient(&p, &subset(2, &[])).unwrap(), 1.0);
        assert_eq!(averaged_coefficient(&p, &subset(2, &[1, 2])).unwrap(), 0.0);
        let whole = Partition::whole(4).unwrap();
        assert_eq!(
            averaged_coefficient(&whole, &subset(4, &[1, 3])).unwrap(),
            1.0
        );
        assert_eq!(
            averaged_coefficient(&whole, &subset(4, &[1, 2, 4])).unwrap(),
            0.0
        );
        assert!(averaged_coefficient(&whole, &subset(3, &[1])).is_err());
    }

    #[test]
    fn bound_values() {
        for n in 1..=6 {
            assert_eq!(max_violation_bound(n, n).unwrap(), 1.0);
            assert!(
                (max_violation_bound(n, 1).unwrap() - 2f64.powf((n as f64 - 1.0) / 2.0)).abs()
                    < 1e-15
            );
        }
        assert_eq!(max_violation_bound(4, 2).unwrap(), 2.0);
        assert!(max_violation_bound(3, 4).is_err());
        assert!(max_violation_bound(3, 0).is_err());
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        let bell_numbers = [1, 2, 5, 15, 52, 203];
        for (n, &count) in (1..=6).zip(&bell_numbers) {
            assert_eq!(Partition::enumerate_all(n).unwrap().len(), count);
        }
    }

    #[test]
    fn ppt_of_bell_state_fails_on_singletons() {
        let verdicts = ppt_check_all(
            &bell_state(),
            &Partition::singletons(2).unwrap(),
            PSD_TOL,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(verdicts.len(), 4);
        assert!(verdicts[0].positive && verdicts[3].positive);
        for v in &verdicts[1..3] {
            assert!(!v.positive);
            assert!((v.min_eigenvalue + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ppt_of_product_state_passes() {
        let rho = ComplexMatrix::diagonal(&[1.0, 0.0, 0.0, 0.0]);
        let verdicts = ppt_check_all(
            &rho,
            &Partition::singletons(2).unwrap(),
            PSD_TOL,
            Execution::Parallel,
        )
        .unwrap();
        assert!(verdicts.iter().all(|v| v.positive));
    }

    #[test]
    fn ppt_rejects_non_density() {
        let not_normalized = ComplexMatrix::identity(4);
        let err = ppt_check_all(
            &not_normalized,
            &Partition::singletons(2).unwrap(),
            PSD_TOL,
            Execution::Sequential,
        );
        assert!(matches!(err, Err(Error::Domain(_))));
        let negative = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(validate_density(&negative, PSD_TOL).is_err());
    }

    #[test]
    fn transposed_square_examples() {
        let config = MeasurementConfig::canonical(2).unwrap();
        let zz = pauli::z().kron(&pauli::z());
        let flipped = transposed_square(&config, &subset(2, &[1])).unwrap();
        assert!(flipped.max_abs_diff(&(&ComplexMatrix::identity(4) - &zz)) < 1e-14);
        let plain = crate::bell::bell_square_expansion(&config).unwrap();
        assert!(
            transposed_square(&config, &subset(2, &[]))
                .unwrap()
                .max_abs_diff(&plain)
                < 1e-15
        );
        assert!(
            transposed_square(&config, &SiteSubset::full(2))
                .unwrap()
                .max_abs_diff(&plain)
                < 1e-15
        );
    }

    #[test]
    fn lattice_and_subset_sums_agree() {
        let mut rng = crate::states::seeded_rng(3);
        for n in 1..=5 {
            let rho = crate::states::random_density(n, 2.min(1 << n), n as u64).unwrap();
            let terms = crate::states::random_bloch_config(&mut rng, n)
                .unwrap()
                .commutator_terms();
            for p in Partition::enumerate_all(n).unwrap() {
                let (a, b) = (lattice_sum(&rho, &terms, &p), subset_sum(&rho, &terms, &p));
                assert!((a - b).abs() < 1e-12, "{p:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn partition_bound_value_examples() {
        let mixed = ComplexMatrix::identity(8).scale_real(0.125);
        let canonical = MeasurementConfig::canonical(3).unwrap();
        let whole = Partition::whole(3).unwrap();
        assert!((partition_bound_value(&mixed, &canonical, &whole).unwrap() - 1.0).abs() < 1e-14);
        let x = crate::bell::observable_from_bloch(1.0, 0.0, 0.0).unwrap();
        let commuting = MeasurementConfig::uniform(3, x.clone(), x).unwrap();
        let rho = ComplexMatrix::diagonal(&[0.5, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25]);
        assert!((partition_bound_value(&rho, &commuting, &whole).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn certify_bell_state_on_singletons_reports_failure_without_error() {
        let report = certify(
            &bell_state(),
            &MeasurementConfig::canonical(2).unwrap(),
            &Partition::singletons(2).unwrap(),
            PSD_TOL,
            Execution::Sequential,
        )
        .unwrap();
        assert!(!report.all_ppt);
        assert_eq!(report.bound, 1.0);
        assert!(!report.theorem_violated());
    }

    #[test]
    fn refinement() {
        let fine = Partition::singletons(3).unwrap();
        let mid = Partition::new(3, &[vec![1, 3], vec![2]]).unwrap();
        let coarse = Partition::whole(3).unwrap();
        assert!(fine.refines(&mid) && mid.refines(&coarse) && fine.refines(&coarse));
        assert!(!coarse.refines(&mid));
        assert_eq!(
            Partition::leading_singletons(4, 3).unwrap().block_members(),
            vec![vec![1], vec![2], vec![3, 4]]
        );
    }
}
