//! Mermin–Klyshko Bell operators.
//!
//! Each site carries two ±1-bounded observables `A`, `A'`, combined into the
//! contraction `a = ½((A + A') + i(A' − A))`. The product `b = ⊗ a_k` is the
//! non-Hermitian generating operator, and the Bell pair `(B, B')` is recovered
//! from `b` by inverting the same linear map. For any separable state
//! `tr(ρ b)` stays inside the square with corners `±1, ±i`, which is the
//! inequality `|tr ρB| ≤ 1`, `|tr ρB'| ≤ 1`.

use serde::{Deserialize, Serialize};

use crate::error::{argument, domain, Error, Result};
use crate::matrix::{
    check_site_count, expectation, hermitian_spectrum, pauli, tensor, ComplexMatrix, SiteSubset,
    C64, HERMIT_TOL, I,
};

/// Tolerance for `A² = 1` when an operation needs extremal observables.
pub const EXTREMAL_TOL: f64 = 1e-8;
/// Slack on the spectrum interval `[-1, 1]` of an observable.
pub const OBSERVABLE_SPECTRUM_TOL: f64 = 1e-10;

/// `(1 - i)/√2 = e^{-iπ/4}`.
pub fn rotation_phase() -> C64 {
    C64::new(
        std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
    )
}

/// Hermitian 2×2 operator with spectrum in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitObservable(ComplexMatrix);

impl QubitObservable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 2 {
            return Err(argument(format!(
                "observable must be 2x2, got dim {}",
                matrix.dim()
            )));
        }
        let spectrum = hermitian_spectrum(&matrix)?;
        if spectrum[0] < -1.0 - OBSERVABLE_SPECTRUM_TOL
            || spectrum[1] > 1.0 + OBSERVABLE_SPECTRUM_TOL
        {
            return Err(domain(format!(
                "observable spectrum [{}, {}] leaves [-1, 1]",
                spectrum[0], spectrum[1]
            )));
        }
        Ok(Self(matrix))
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self(matrix)
    }

    pub fn identity() -> Self {
        Self(ComplexMatrix::identity(2))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `‖A² − 1‖` (max entry).
    pub fn extremality_defect(&self) -> f64 {
        self.0
            .matmul(&self.0)
            .max_abs_diff(&ComplexMatrix::identity(2))
    }

    pub fn is_extremal(&self) -> bool {
        self.extremality_defect() <= EXTREMAL_TOL
    }
}

/// `nx σx + ny σy + nz σz` for a Bloch vector of norm in `(0, 1]`.
pub fn observable_from_bloch(nx: f64, ny: f64, nz: f64) -> Result<QubitObservable> {
    let norm = (nx * nx + ny * ny + nz * nz).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(argument(format!(
            "Bloch vector ({nx}, {ny}, {nz}) has zero or non-finite norm"
        )));
    }
    if norm > 1.0 + 1e-12 {
        return Err(argument(format!(
            "Bloch vector ({nx}, {ny}, {nz}) has norm {norm} > 1"
        )));
    }
    Ok(QubitObservable(pauli::combine(0.0, nx, ny, nz)))
}

/// Per-site pairs `(A_k, A'_k)`, site 1 first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct MeasurementConfig {
    pairs: Vec<(QubitObservable, QubitObservable)>,
}

impl MeasurementConfig {
    pub fn new(pairs: Vec<(QubitObservable, QubitObservable)>) -> Result<Self> {
        check_site_count(pairs.len())?;
        Ok(Self { pairs })
    }

    /// The same pair at every site.
    pub fn uniform(n: usize, a: QubitObservable, a_prime: QubitObservable) -> Result<Self> {
        check_site_count(n)?;
        Ok(Self {
            pairs: vec![(a, a_prime); n],
        })
    }

    /// `A = (σx + σy)/√2`, `A' = (σx − σy)/√2` at every site, giving `a = √2 |1⟩⟨0|`.
    pub fn canonical(n: usize) -> Result<Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::uniform(
            n,
            observable_from_bloch(h, h, 0.0)?,
            observable_from_bloch(h, -h, 0.0)?,
        )
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(QubitObservable, QubitObservable)] {
        &self.pairs
    }

    /// Observable at `site` (1-based); `primed` selects `A'`.
    pub fn slot(&self, site: usize, primed: bool) -> &QubitObservable {
        let (a, ap) = &self.pairs[site - 1];
        if primed {
            ap
        } else {
            a
        }
    }

    pub fn set_slot(&mut self, site: usize, primed: bool, obs: QubitObservable) {
        let pair = &mut self.pairs[site - 1];
        if primed {
            pair.1 = obs;
        } else {
            pair.0 = obs;
        }
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n() {
            return Err(argument(format!("site {site} outside 1..={}", self.n())));
        }
        Ok(())
    }

    /// Fails with a domain error naming the first site whose `A` or `A'`
    /// does not square to the identity.
    pub fn require_extremal(&self) -> Result<()> {
        for (k, (a, ap)) in self.pairs.iter().enumerate() {
            for (name, obs) in [("A", a), ("A'", ap)] {
                let defect = obs.extremality_defect();
                if defect > EXTREMAL_TOL {
                    return Err(domain(format!(
                        "site {}: {name} is not extremal (|{name}^2 - 1| = {defect:.3e})",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Per-site contractions `a_k`.
    pub fn contractions(&self) -> Vec<ComplexMatrix> {
        self.pairs
            .iter()
            .map(|(a, ap)| contract_settings(a, ap))
            .collect()
    }

    /// Per-site `(i/2)[A_k, A'_k]`.
    pub fn commutator_terms(&self) -> Vec<ComplexMatrix> {
        self.pairs
            .iter()
            .map(|(a, ap)| commutator_term(a, ap))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ConfigRepr {
    n: usize,
    pairs: Vec<PairRepr>,
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    #[serde(rename = "A")]
    a: ObservableRepr,
    #[serde(rename = "Aprime")]
    a_prime: ObservableRepr,
}

/// Either a Bloch triple `[nx, ny, nz]` or a full matrix object.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ObservableRepr {
    Bloch([f64; 3]),
    Matrix(ComplexMatrix),
}

impl ObservableRepr {
    fn realize(self) -> Result<QubitObservable> {
        match self {
            ObservableRepr::Bloch([x, y, z]) => observable_from_bloch(x, y, z),
            ObservableRepr::Matrix(m) => QubitObservable::new(m),
        }
    }
}

impl TryFrom<ConfigRepr> for MeasurementConfig {
    type Error = Error;

    fn try_from(repr: ConfigRepr) -> Result<Self> {
        if repr.n != repr.pairs.len() {
            return Err(argument(format!(
                "n = {} but {} setting pairs given",
                repr.n,
                repr.pairs.len()
            )));
        }
        let pairs = repr
            .pairs
            .into_iter()
            .enumerate()
            .map(|(k, p)| {
                let tag = |e: Error| argument(format!("site {}: {e}", k + 1));
                Ok((
                    p.a.realize().map_err(tag)?,
                    p.a_prime.realize().map_err(tag)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementConfig::new(pairs)
    }
}

impl From<MeasurementConfig> for ConfigRepr {
    fn from(config: MeasurementConfig) -> Self {
        ConfigRepr {
            n: config.n(),
            pairs: config
                .pairs
                .into_iter()
                .map(|(a, ap)| PairRepr {
                    a: ObservableRepr::Matrix(a.0),
                    a_prime: ObservableRepr::Matrix(ap.0),
                })
                .collect(),
        }
    }
}

/// `a = ½((A + A') + i(A' − A))`.
pub fn contract_settings(a: &QubitObservable, a_prime: &QubitObservable) -> ComplexMatrix {
    contract_raw(a.matrix(), a_prime.matrix())
}

pub(crate) fn contract_raw(a: &ComplexMatrix, a_prime: &ComplexMatrix) -> ComplexMatrix {
    let sum = a + a_prime;
    let diff = a_prime - a;
    (&sum + &diff.scale(I)).scale_real(0.5)
}

/// `(i/2)[A, A']`.
pub fn commutator_term(a: &QubitObservable, a_prime: &QubitObservable) -> ComplexMatrix {
    a.matrix().commutator(a_prime.matrix()).scale(I * 0.5)
}

/// `b = ⊗_k a_k`.
pub fn product_operator(config: &MeasurementConfig) -> ComplexMatrix {
    tensor(&config.contractions()).expect("config has at least one site")
}

/// The generating operator `b` together with the Hermitian Bell operators.
#[derive(Clone, Debug)]
pub struct BellPair {
    pub product: ComplexMatrix,
    pub bell: ComplexMatrix,
    pub bell_prime: ComplexMatrix,
}

impl BellPair {
    /// `B = ½((b + b†) + i(b − b†))`, `B' = ½((b + b†) − i(b − b†))`.
    pub fn from_product(product: ComplexMatrix) -> Self {
        let adj = product.adjoint();
        let re = &product + &adj;
        let im = (&product - &adj).scale(I);
        let bell = (&re + &im).scale_real(0.5);
        let bell_prime = (&re - &im).scale_real(0.5);
        Self {
            product,
            bell,
            bell_prime,
        }
    }
}

pub fn bell_pair(config: &MeasurementConfig) -> BellPair {
    BellPair::from_product(product_operator(config))
}

/// `tr(ρB) = Re z − Im z` and `tr(ρB') = Re z + Im z` for `z = tr(ρ b)`.
pub fn bell_values(z: C64) -> (f64, f64) {
    (z.re - z.im, z.re + z.im)
}

/// `Σ_β weight(β) · ⊗_{k∈β} c_k` over all subsets `β`, identity off `β`.
/// Terms with zero weight are skipped.
pub(crate) fn subset_expansion(
    terms: &[ComplexMatrix],
    weight: impl Fn(SiteSubset) -> f64,
) -> ComplexMatrix {
    let n = terms.len();
    let id = ComplexMatrix::identity(2);
    let mut acc = ComplexMatrix::zeros(1 << n);
    for beta in SiteSubset::all(n) {
        let w = weight(beta);
        if w == 0.0 {
            continue;
        }
        let factors: Vec<ComplexMatrix> = (1..=n)
            .map(|k| {
                if beta.contains(k) {
                    terms[k - 1].clone()
                } else {
                    id.clone()
                }
            })
            .collect();
        let term = tensor(&factors).expect("nonempty");
        acc = &acc + &term.scale_real(w);
    }
    acc
}

/// [`subset_expansion`] restricted to even `|β|`, with `sign` given the bitmask of `β`.
pub(crate) fn signed_even_expansion(
    terms: &[ComplexMatrix],
    sign: impl Fn(u64) -> f64,
) -> ComplexMatrix {
    subset_expansion(terms, |beta| {
        if beta.len() % 2 == 0 {
            sign(beta.mask())
        } else {
            0.0
        }
    })
}

/// `Σ_{|β| even} ⊗_{k∈β} (i/2)[A_k, A'_k]`, equal to `B² = B'²` for extremal settings.
pub fn bell_square_expansion(config: &MeasurementConfig) -> Result<ComplexMatrix> {
    config.require_extremal()?;
    Ok(signed_even_expansion(&config.commutator_terms(), |_| 1.0))
}

/// Membership in the square `|Re z| + |Im z| ≤ 1`.
pub fn in_square(z: C64) -> bool {
    z.re.abs() + z.im.abs() <= 1.0 + 1e-12
}

/// `tr(ρ (A₁⊗(A₂+A₂') + A₁'⊗(A₂−A₂')))` for two sites.
pub fn chsh_value(rho: &ComplexMatrix, config: &MeasurementConfig) -> Result<f64> {
    if config.n() != 2 {
        return Err(argument(format!(
            "CHSH needs 2 sites, config has {}",
            config.n()
        )));
    }
    let (a1, a1p) = &config.pairs()[0];
    let (a2, a2p) = &config.pairs()[1];
    let plus = a2.matrix() + a2p.matrix();
    let minus = a2.matrix() - a2p.matrix();
    let op = &a1.matrix().kron(&plus) + &a1p.matrix().kron(&minus);
    let value = expectation(rho, &op)?;
    if value.im.abs() > 1e-9 && rho.is_hermitian(HERMIT_TOL) {
        return Err(Error::Inconsistency(format!(
            "CHSH expectation has imaginary part {}",
            value.im
        )));
    }
    Ok(value.re)
}
