//! Dense complex matrices over qubit registers.
//!
//! Multi-site operators live on `(C^2)^{⊗n}` in the computational basis. Site 1
//! is the most significant bit of a row or column index, so a basis label
//! `|x_1 x_2 … x_n⟩` maps to the integer with binary digits `x_1 x_2 … x_n`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, domain, Error, Result};

pub type C64 = Complex64;

/// Maximum entrywise `|M - M†|` accepted as Hermitian.
pub const HERMIT_TOL: f64 = 1e-10;
/// Default positivity tolerance for [`is_psd`].
pub const PSD_TOL: f64 = 1e-9;
/// Default cap on the number of sites (dimension 1024).
pub const DEFAULT_MAX_SITES: usize = 10;
/// Site subsets are stored as bitmasks; this is the representable limit.
pub const MAX_SITES: usize = 30;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Square, dense, row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

/// JSON exchange form: `{"dim": d, "entries": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let entries = repr
            .entries
            .iter()
            .map(|[re, im]| C64::new(*re, *im))
            .collect();
        ComplexMatrix::new(repr.dim, entries)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            dim: m.dim,
            entries: m.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(argument("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(argument(format!(
                "matrix of dim {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.entries[k * dim + k] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Self { dim, entries }
    }

    /// Builds a matrix from nested real/imaginary rows. Panics on ragged input;
    /// intended for literals.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == dim),
            "rows must form a square"
        );
        Self::from_fn(dim, |r, c| rows[r][c])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (k, v) in values.iter().enumerate() {
            m.entries[k * values.len() + k] = C64::new(*v, 0.0);
        }
        m
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn outer(psi: &[C64]) -> Self {
        Self::from_fn(psi.len(), |r, c| psi[r] * psi[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Number of qubit sites, if the dimension is a power of two.
    pub fn sites(&self) -> Option<usize> {
        self.dim
            .is_power_of_two()
            .then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise `|M - M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            let row = &mut out[r * d..(r + 1) * d];
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                let other_row = &other.entries[k * d..(k + 1) * d];
                for (o, b) in row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Self {
            dim: d,
            entries: out,
        }
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut entries = vec![ZERO; d * d];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.entries[ar * da + ac];
                if a == ZERO {
                    continue;
                }
                for br in 0..db {
                    let row = (ar * db + br) * d + ac * db;
                    for bc in 0..db {
                        entries[row + bc] = a * other.entries[br * db + bc];
                    }
                }
            }
        }
        Self { dim: d, entries }
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::{ComplexMatrix, C64, I, ONE, ZERO};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]])
    }

    /// `|1⟩⟨0|`, the lowering-to-raising map sending `e_1` to `e_2`.
    pub fn v() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, ZERO], &[ONE, ZERO]])
    }

    /// `c0·1 + cx·σx + cy·σy + cz·σz` with real coefficients.
    pub fn combine(c0: f64, cx: f64, cy: f64, cz: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            &[C64::new(c0 + cz, 0.0), C64::new(cx, -cy)],
            &[C64::new(cx, cy), C64::new(c0 - cz, 0.0)],
        ])
    }
}

/// A subset of the sites `{1..n}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteSubset {
    n: usize,
    mask: u64,
}

impl fmt::Debug for SiteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.members().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for SiteSubset {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.members().serialize(serializer)
    }
}

impl SiteSubset {
    /// Subset from 1-based site indices. Duplicates and out-of-range sites are rejected.
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        check_site_count(n)?;
        let mut mask = 0u64;
        for &s in members {
            if s == 0 || s > n {
                return Err(argument(format!("site {s} outside 1..={n}")));
            }
            let bit = 1u64 << (s - 1);
            if mask & bit != 0 {
                return Err(argument(format!("site {s} listed twice")));
            }
            mask |= bit;
        }
        Ok(Self { n, mask })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, mask: 0 }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            mask: full_mask(n),
        }
    }

    /// Bit `k - 1` of `mask` marks site `k`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(mask & !full_mask(n) == 0);
        Self { n, mask }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn members(&self) -> Vec<usize> {
        (1..=self.n).filter(|&s| self.contains(s)).collect()
    }

    pub fn contains(&self, site: usize) -> bool {
        site >= 1 && site <= self.n && self.mask & (1 << (site - 1)) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            mask: full_mask(self.n) & !self.mask,
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            mask: self.mask | other.mask,
        }
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        (self.mask & other.mask).count_ones() as usize
    }

    /// Bitmask over matrix-index bits: site `k` of `n` is bit `n - k`.
    pub(crate) fn index_mask(&self) -> usize {
        (1..=self.n)
            .filter(|&s| self.contains(s))
            .fold(0usize, |m, s| m | 1 << (self.n - s))
    }

    /// All `2^n` subsets of `{1..n}` in bitmask order.
    pub fn all(n: usize) -> impl Iterator<Item = SiteSubset> {
        (0..1u64 << n).map(move |mask| SiteSubset { n, mask })
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn check_site_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(argument(format!("site count {n} outside 1..={MAX_SITES}")));
    }
    Ok(())
}

/// Number of sites of a multi-qubit operator, or an argument error.
pub fn site_count(m: &ComplexMatrix) -> Result<usize> {
    m.sites()
        .ok_or_else(|| argument(format!("dimension {} is not a power of two", m.dim())))
}

/// Kronecker product of `factors` in order; the first factor is site 1.
pub fn tensor(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| argument("tensor product of an empty sequence"))?;
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kron(f)))
}

/// Transposes the row/column index pair of every site in `alpha`.
pub fn partial_transpose(m: &ComplexMatrix, alpha: &SiteSubset) -> Result<ComplexMatrix> {
    let n = site_count(m)?;
    if n != alpha.n() {
        return Err(argument(format!(
            "subset over {} sites applied to a {n}-site operator",
            alpha.n()
        )));
    }
    let swap = alpha.index_mask();
    if swap == 0 {
        return Ok(m.clone());
    }
    let d = m.dim();
    let mut out = ComplexMatrix::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let r2 = (r & !swap) | (c & swap);
            let c2 = (c & !swap) | (r & swap);
            out[(r2, c2)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix in nondecreasing order.
pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let defect = m.hermiticity_defect();
    if defect > HERMIT_TOL {
        return Err(domain(format!(
            "matrix is not Hermitian (max |M - M†| = {defect:.3e})"
        )));
    }
    let h = m.hermitian_part();
    let mut values: Vec<f64> = h
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        values = real_embedding_spectrum(&h);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Spectrum via the real symmetric matrix `[[X, -Y], [Y, X]]` for `H = X + iY`,
/// whose eigenvalues are those of `H`, each twice. The complex QR iteration can
/// produce NaN on very sparse inputs with subnormal intermediate values.
fn real_embedding_spectrum(h: &ComplexMatrix) -> Vec<f64> {
    let d = h.dim();
    let real = nalgebra::DMatrix::<f64>::from_fn(2 * d, 2 * d, |r, c| {
        let z = h[(r % d, c % d)];
        match (r < d, c < d) {
            (true, false) => -z.im,
            (false, true) => z.im,
            _ => z.re,
        }
    });
    let mut doubled: Vec<f64> = real.symmetric_eigenvalues().iter().copied().collect();
    doubled.sort_by(f64::total_cmp);
    doubled.into_iter().step_by(2).collect()
}

/// `tr(rho · op)`.
pub fn expectation(rho: &ComplexMatrix, op: &ComplexMatrix) -> Result<C64> {
    if rho.dim() != op.dim() {
        return Err(argument(format!(
            "expectation of a {}-dim operator in a {}-dim state",
            op.dim(),
            rho.dim()
        )));
    }
    let d = rho.dim();
    let mut acc = ZERO;
    for r in 0..d {
        for c in 0..d {
            acc += rho[(r, c)] * op[(c, r)];
        }
    }
    Ok(acc)
}

/// Positivity verdict: `min eigenvalue >= -tol`, together with that minimum.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<(bool, f64)> {
    let spectrum = hermitian_spectrum(m)?;
    let min = spectrum[0];
    Ok((min >= -tol, min))
}

/// Reorders tensor factors. `layout[j]` is the (1-based) site that the
/// `j`-th tensor factor of `m` belongs to; the result has site `k` at
/// factor position `k`.
pub fn reorder_sites(m: &ComplexMatrix, layout: &[usize]) -> Result<ComplexMatrix> {
    let n = site_count(m)?;
    if layout.len() != n {
        return Err(argument(format!(
            "layout lists {} sites for a {n}-site operator",
            layout.len()
        )));
    }
    let mut seen = vec![false; n];
    for &s in layout {
        if s == 0 || s > n || std::mem::replace(&mut seen[s - 1], true) {
            return Err(argument(format!(
                "layout {layout:?} is not a permutation of 1..={n}"
            )));
        }
    }
    // Bit (n-1-j) of a layout index carries site layout[j], i.e. bit (n - layout[j])
    // of a target index.
    let map = |target: usize| -> usize {
        layout.iter().enumerate().fold(0usize, |acc, (j, &site)| {
            let bit = (target >> (n - site)) & 1;
            acc | bit << (n - 1 - j)
        })
    };
    let d = m.dim();
    let index: Vec<usize> = (0..d).map(map).collect();
    Ok(ComplexMatrix::from_fn(d, |r, c| m[(index[r], index[c])]))
}

/// Contracts one site of an operator against a 2×2 factor.
///
/// For `m` on `sites` qubits and factor `f` at position `pos` (0-based), returns
/// `m'` on the remaining sites with `tr(m' X) = tr(m (X with f inserted at pos))`.
pub(crate) fn contract_site(m: &[C64], sites: usize, pos: usize, f: &ComplexMatrix) -> Vec<C64> {
    debug_assert_eq!(f.dim(), 2);
    let d_out = 1usize << (sites - 1);
    let shift = sites - 1 - pos;
    let low = (1usize << shift) - 1;
    let insert = |x: usize, bit: usize| ((x & !low) << 1) | (bit << shift) | (x & low);
    let d_in = d_out << 1;
    let mut out = vec![ZERO; d_out * d_out];
    for r in 0..d_out {
        for c in 0..d_out {
            let mut acc = ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    let fji = f[(j, i)];
                    if fji != ZERO {
                        acc += m[insert(r, i) * d_in + insert(c, j)] * fji;
                    }
                }
            }
            out[r * d_out + c] = acc;
        }
    }
    out
}

/// 2×2 environment `E` of `site` (1-based) such that
/// `tr(rho · ⊗_k factors_k) = tr(E · factors_site)` for any choice of the
/// factor at `site`; every other factor is contracted into `E`.
pub(crate) fn site_environment(
    rho: &ComplexMatrix,
    factors: &[ComplexMatrix],
    site: usize,
) -> ComplexMatrix {
    let n = factors.len();
    let mut data = rho.entries().to_vec();
    let mut sites = n;
    // Removing sites from the end keeps site k at position k - 1.
    for k in (1..=n).rev() {
        if k == site {
            continue;
        }
        data = contract_site(&data, sites, k - 1, &factors[k - 1]);
        sites -= 1;
    }
    ComplexMatrix {
        dim: 2,
        entries: data,
    }
}

/// `tr(rho · ⊗_k factors_k)` by successive contraction.
pub(crate) fn product_expectation(rho: &ComplexMatrix, factors: &[ComplexMatrix]) -> C64 {
    let n = factors.len();
    let mut data = rho.entries().to_vec();
    for k in (1..=n).rev() {
        data = contract_site(&data, k, k - 1, &factors[k - 1]);
    }
    data[0]
}
