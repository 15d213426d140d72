//! State constructors: GHZ-type maximal violators, block products that
//! saturate the partition bound, and seeded random generators.
//!
//! All randomness comes from ChaCha8 seeded with a `u64`, so every generator
//! is bit-reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bell::{observable_from_bloch, MeasurementConfig, QubitObservable};
use crate::error::{argument, Result};
use crate::matrix::{check_site_count, pauli, reorder_sites, tensor, ComplexMatrix, C64, ZERO};
use crate::partition::Partition;

/// Phase of the GHZ superposition that maximizes `tr ρB` under canonical settings.
pub const DEFAULT_PHASE: f64 = std::f64::consts::FRAC_PI_4;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(|0…0⟩ + e^{iφ}|1…1⟩)/√2` as a density matrix on `m` qubits.
pub fn ghz_state(m: usize, phase: f64) -> Result<ComplexMatrix> {
    if m == 0 {
        return Err(argument("GHZ state needs at least one qubit"));
    }
    check_site_count(m)?;
    let d = 1usize << m;
    let mut psi = vec![ZERO; d];
    psi[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[d - 1] = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phase);
    Ok(ComplexMatrix::outer(&psi))
}

/// Tensor product of `ghz_state(|α_m|, phase)` over the blocks, placed back on
/// sites `1..n` in order.
pub fn block_product_state(partition: &Partition, phase: f64) -> Result<ComplexMatrix> {
    let factors = partition
        .blocks()
        .iter()
        .map(|b| ghz_state(b.len(), phase))
        .collect::<Result<Vec<_>>>()?;
    place_blocks(partition, &factors)
}

/// Tensor of per-block operators (factor `m` acting on block `m`), reordered to site order.
pub fn place_blocks(partition: &Partition, factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let layout: Vec<usize> = partition
        .blocks()
        .iter()
        .flat_map(|b| b.members())
        .collect();
    reorder_sites(&tensor(factors)?, &layout)
}

/// Settings under which [`block_product_state`] reaches `2^{(n-p)/2}`.
///
/// Sites in blocks of two or more qubits get the canonical settings. A
/// singleton site gets `A = A' = cos φ σx + sin φ σy`, whose contraction is the
/// observable itself and has expectation 1 on `|0⟩ + e^{iφ}|1⟩`.
///
/// Saturation holds when at most one block has more than one site; with two or
/// more such blocks the product of block expectations is limited to
/// `2^{(n - s + 1)/2 - q}` (`s` singletons, `q` larger blocks).
pub fn saturating_settings(partition: &Partition, phase: f64) -> Result<MeasurementConfig> {
    let canonical = MeasurementConfig::canonical(1)?.pairs()[0].clone();
    let aligned = observable_from_bloch(phase.cos(), phase.sin(), 0.0)?;
    let n = partition.n();
    let mut pairs = vec![canonical.clone(); n];
    for block in partition.blocks().iter().filter(|b| b.len() == 1) {
        pairs[block.members()[0] - 1] = (aligned.clone(), aligned.clone());
    }
    MeasurementConfig::new(pairs)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G† / tr(G G†)` for a standard complex Gaussian `dim × rank` matrix `G`.
pub fn random_density_dim<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> ComplexMatrix {
    let g: Vec<C64> = (0..dim * rank).map(|_| complex_gaussian(rng)).collect();
    let mut m = ComplexMatrix::from_fn(dim, |r, c| {
        (0..rank)
            .map(|k| g[r * rank + k] * g[c * rank + k].conj())
            .sum()
    });
    let tr = m.trace().re;
    m = m.scale_real(1.0 / tr);
    m
}

/// Seeded random `n`-qubit density matrix of the given rank.
pub fn random_density(n: usize, rank: usize, seed: u64) -> Result<ComplexMatrix> {
    check_site_count(n)?;
    let dim = 1usize << n;
    if rank == 0 || rank > dim {
        return Err(argument(format!("rank {rank} outside 1..={dim}")));
    }
    Ok(random_density_dim(&mut seeded_rng(seed), dim, rank))
}

/// Haar-random single-qubit pure state.
pub fn random_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    random_density_dim(rng, 2, 1)
}

/// Convex weights drawn uniformly from the simplex.
pub fn dirichlet_weights<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// Mixture of `terms` random pure product states with uniform-simplex weights.
pub fn random_separable(n: usize, terms: usize, seed: u64) -> Result<ComplexMatrix> {
    check_site_count(n)?;
    if terms == 0 {
        return Err(argument("a mixture needs at least one term"));
    }
    let mut rng = seeded_rng(seed);
    let weights = dirichlet_weights(&mut rng, terms);
    let mut acc = ComplexMatrix::zeros(1 << n);
    for w in weights {
        let factors: Vec<ComplexMatrix> = (0..n).map(|_| random_qubit_state(&mut rng)).collect();
        acc = &acc + &tensor(&factors)?.scale_real(w);
    }
    Ok(acc)
}

/// Mixture of `terms` block-product states, each block factor a full-rank
/// random density matrix on that block. PPT across every element of the
/// partition lattice by construction.
pub fn random_block_mixture(
    partition: &Partition,
    terms: usize,
    seed: u64,
) -> Result<ComplexMatrix> {
    if terms == 0 {
        return Err(argument("a mixture needs at least one term"));
    }
    let mut rng = seeded_rng(seed);
    let weights = dirichlet_weights(&mut rng, terms);
    let mut acc = ComplexMatrix::zeros(1 << partition.n());
    for w in weights {
        let factors: Vec<ComplexMatrix> = partition
            .blocks()
            .iter()
            .map(|b| {
                let dim = 1usize << b.len();
                random_density_dim(&mut rng, dim, dim)
            })
            .collect();
        acc = &acc + &place_blocks(partition, &factors)?.scale_real(w);
    }
    Ok(acc)
}

/// Extremal observable (`A² = 1`) drawn as the spectral sign of a random
/// Hermitian `h₀1 + h·σ` with Gaussian coefficients; `±1` with positive
/// probability, otherwise a uniformly oriented `ĥ·σ`.
pub fn random_extremal_observable<R: Rng + ?Sized>(rng: &mut R) -> QubitObservable {
    let h0: f64 = rng.sample(StandardNormal);
    let h: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    if h0.abs() > norm {
        QubitObservable::new_unchecked(ComplexMatrix::identity(2).scale_real(h0.signum()))
    } else {
        QubitObservable::new_unchecked(pauli::combine(0.0, h[0] / norm, h[1] / norm, h[2] / norm))
    }
}

/// Uniformly oriented `n̂·σ`.
pub fn random_bloch_observable<R: Rng + ?Sized>(rng: &mut R) -> QubitObservable {
    loop {
        let h: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        if norm > 1e-12 {
            return QubitObservable::new_unchecked(pauli::combine(
                0.0,
                h[0] / norm,
                h[1] / norm,
                h[2] / norm,
            ));
        }
    }
}

pub fn random_extremal_config<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<MeasurementConfig> {
    MeasurementConfig::new(
        (0..n)
            .map(|_| {
                (
                    random_extremal_observable(rng),
                    random_extremal_observable(rng),
                )
            })
            .collect(),
    )
}

/// Settings with non-commuting Bloch observables at every site.
pub fn random_bloch_config<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<MeasurementConfig> {
    MeasurementConfig::new(
        (0..n)
            .map(|_| (random_bloch_observable(rng), random_bloch_observable(rng)))
            .collect(),
    )
}

/// Declarative description of a state, realizable to a density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Ghz {
        m: usize,
        #[serde(default = "default_phase")]
        phase: f64,
    },
    BlockProduct {
        partition: Partition,
        #[serde(default = "default_phase")]
        phase: f64,
    },
    SeparableMixture {
        n: usize,
        terms: usize,
        seed: u64,
    },
    RandomDensity {
        n: usize,
        rank: usize,
        seed: u64,
    },
    ComputationalBasis {
        n: usize,
        index: usize,
    },
}

fn default_phase() -> f64 {
    DEFAULT_PHASE
}

impl StateSpec {
    /// Number of qubits of the described state, known before realizing it.
    pub fn sites(&self) -> usize {
        match self {
            StateSpec::Ghz { m, .. } => *m,
            StateSpec::BlockProduct { partition, .. } => partition.n(),
            StateSpec::SeparableMixture { n, .. }
            | StateSpec::RandomDensity { n, .. }
            | StateSpec::ComputationalBasis { n, .. } => *n,
        }
    }

    pub fn realize(&self) -> Result<ComplexMatrix> {
        match self {
            StateSpec::Ghz { m, phase } => ghz_state(*m, *phase),
            StateSpec::BlockProduct { partition, phase } => block_product_state(partition, *phase),
            StateSpec::SeparableMixture { n, terms, seed } => random_separable(*n, *terms, *seed),
            StateSpec::RandomDensity { n, rank, seed } => random_density(*n, *rank, *seed),
            StateSpec::ComputationalBasis { n, index } => {
                check_site_count(*n)?;
                let d = 1usize << n;
                if *index >= d {
                    return Err(argument(format!("basis index {index} outside 0..{d}")));
                }
                let mut m = ComplexMatrix::zeros(d);
                m[(*index, *index)] = C64::new(1.0, 0.0);
                Ok(m)
            }
        }
    }
}
