//! Dense complex Hermitian linear algebra.
//!
//! Every operator in the toolkit (measurement effects, conditional states,
//! bipartite states, parent effects) is a [`HermMatrix`]. Complex PSD
//! constraints reach the real conic solver through [`real_embed`] and come
//! back through [`real_compress`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for PSD and normalisation verdicts.
pub const PSD_TOL: f64 = 1e-8;
/// Tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Negative eigenvalues smaller than this in magnitude are clamped by [`psd_sqrt`].
pub const SQRT_CLAMP: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// A dense Hermitian matrix.
///
/// The constructor symmetrises its input and remembers how far from
/// Hermitian the input was.
#[derive(Clone, PartialEq)]
pub struct HermMatrix {
    m: CMatrix,
    asymmetry: f64,
}

impl HermMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Shape(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let adj = m.adjoint();
        let asymmetry = (&m - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let sym = (&m + &adj).scale(0.5);
        Ok(Self { m: sym, asymmetry })
    }

    /// Wraps a matrix already known to be Hermitian (symmetrises without checking shape).
    pub(crate) fn from_hermitian_unchecked(m: CMatrix) -> Self {
        let sym = (&m + m.adjoint()).scale(0.5);
        Self {
            m: sym,
            asymmetry: 0.0,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
            asymmetry: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
            asymmetry: 0.0,
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { m, asymmetry: 0.0 }
    }

    /// `|v⟩⟨v|` (not normalised).
    pub fn outer(v: &CVector) -> Self {
        Self {
            m: v * v.adjoint(),
            asymmetry: 0.0,
        }
    }

    /// Builds from row-major complex entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries do not fill a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Largest entry-wise deviation `|M - M†|` of the matrix handed to [`HermMatrix::new`].
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Real part of `Tr(self · other)`; for Hermitian arguments this is the trace inner product.
    pub fn inner(&self, other: &HermMatrix) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.m
            .iter()
            .zip(other.m.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn scale(&self, f: f64) -> Self {
        Self {
            m: self.m.map(|z| z * f),
            asymmetry: 0.0,
        }
    }

    /// Element-wise transpose in the computational basis (the complex conjugate).
    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
            asymmetry: 0.0,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &HermMatrix) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        min_eig(self) >= -tol
    }

    /// Sandwich `B · self · B`.
    pub fn sandwich(&self, b: &HermMatrix) -> Self {
        Self::from_hermitian_unchecked(&b.m * &self.m * &b.m)
    }

    /// Anticommutator `{self, other}`.
    pub fn anticommutator(&self, other: &HermMatrix) -> Self {
        let ab = &self.m * &other.m;
        Self::from_hermitian_unchecked(&ab + ab.adjoint())
    }

    fn check_same_dim(&self, other: &HermMatrix) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "Hermitian matrices of different dimensions combined"
        );
    }
}

impl fmt::Debug for HermMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermMatrix(dim={}) ", self.dim())?;
        f.debug_list()
            .entries(
                self.m
                    .row_iter()
                    .map(|r| r.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>()),
            )
            .finish()
    }
}

impl Add for &HermMatrix {
    type Output = HermMatrix;
    fn add(self, rhs: &HermMatrix) -> HermMatrix {
        self.check_same_dim(rhs);
        HermMatrix {
            m: &self.m + &rhs.m,
            asymmetry: 0.0,
        }
    }
}

impl Sub for &HermMatrix {
    type Output = HermMatrix;
    fn sub(self, rhs: &HermMatrix) -> HermMatrix {
        self.check_same_dim(rhs);
        HermMatrix {
            m: &self.m - &rhs.m,
            asymmetry: 0.0,
        }
    }
}

impl Mul<f64> for &HermMatrix {
    type Output = HermMatrix;
    fn mul(self, rhs: f64) -> HermMatrix {
        self.scale(rhs)
    }
}

impl Neg for &HermMatrix {
    type Output = HermMatrix;
    fn neg(self) -> HermMatrix {
        self.scale(-1.0)
    }
}

/// Sum of Hermitian matrices of dimension `dim` (zero for an empty iterator).
pub fn sum<'a>(dim: usize, items: impl IntoIterator<Item = &'a HermMatrix>) -> HermMatrix {
    let mut acc = CMatrix::zeros(dim, dim);
    for h in items {
        acc += &h.m;
    }
    HermMatrix {
        m: acc,
        asymmetry: 0.0,
    }
}

// JSON form: {"dim": d, "entries": [[[re, im], ...], ...]} (row-major).
#[derive(Serialize, Deserialize)]
struct HermMatrixRepr {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for HermMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .m
            .row_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        HermMatrixRepr {
            dim: self.dim(),
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = HermMatrixRepr::deserialize(d)?;
        if repr.entries.len() != repr.dim || repr.entries.iter().any(|r| r.len() != repr.dim) {
            return Err(D::Error::custom("entries do not match dim"));
        }
        let flat: Vec<C64> = repr
            .entries
            .iter()
            .flatten()
            .map(|[re, im]| C64::new(*re, *im))
            .collect();
        let h = HermMatrix::from_rows(repr.dim, &flat).map_err(D::Error::custom)?;
        if h.asymmetry() > 1e-9 {
            return Err(D::Error::custom(format!(
                "matrix is not Hermitian (deviation {:e})",
                h.asymmetry()
            )));
        }
        Ok(h)
    }
}

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    /// `V diag(f(e)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let w = f(e);
            for i in 0..d {
                scaled[(i, j)] *= w;
            }
        }
        HermMatrix::from_hermitian_unchecked(&scaled * self.vectors.adjoint())
    }
}

pub fn herm_eig(m: &HermMatrix) -> Result<EigenDecomposition> {
    let eig =
        SymmetricEigen::try_new(m.m.clone(), EIG_EPS, EIG_MAX_ITER).ok_or(Error::EigenFailure {
            residual: f64::INFINITY,
        })?;
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.dim(), m.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    let out = EigenDecomposition { values, vectors };

    let residual = (out.reconstruct_with(|e| e).m - &m.m).norm();
    let scale = m.m.norm().max(1.0);
    if !residual.is_finite() || residual > 1e-10 * scale {
        return Err(Error::EigenFailure { residual });
    }
    Ok(out)
}

fn real_eigenvalues(m: &HermMatrix) -> DVector<f64> {
    match SymmetricEigen::try_new(m.m.clone(), EIG_EPS, EIG_MAX_ITER) {
        Some(e) => e.eigenvalues,
        None => herm_eig(m)
            .map(|e| DVector::from_vec(e.values))
            .unwrap_or_else(|_| DVector::from_element(m.dim(), f64::NAN)),
    }
}

pub fn min_eig(m: &HermMatrix) -> f64 {
    real_eigenvalues(m)
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_eig(m: &HermMatrix) -> f64 {
    real_eigenvalues(m)
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Principal square root of a PSD matrix; eigenvalues in `[-1e-10, 0)` are clamped to zero.
pub fn psd_sqrt(m: &HermMatrix) -> Result<HermMatrix> {
    let eig = herm_eig(m)?;
    let lowest = eig.values[0];
    if lowest < -SQRT_CLAMP {
        return Err(Error::NotPsd { min_eig: lowest });
    }
    // eigenvalues at roundoff level are exact zeros; their square roots would not be
    let top = eig.values.last().copied().unwrap_or(0.0).abs();
    let floor = 64.0 * f64::EPSILON * top.max(1.0) * eig.values.len() as f64;
    Ok(eig.reconstruct_with(|e| if e <= floor { 0.0 } else { e.sqrt() }))
}

/// Number of eigenvalues above `rel_tol · Tr(M)`.
pub fn numerical_rank(m: &HermMatrix, rel_tol: f64) -> usize {
    let scale = m.trace().abs().max(f64::MIN_POSITIVE);
    real_eigenvalues(m)
        .iter()
        .filter(|&&e| e > rel_tol * scale)
        .count()
}

pub fn kron(a: &HermMatrix, b: &HermMatrix) -> HermMatrix {
    HermMatrix {
        m: a.m.kronecker(&b.m),
        asymmetry: 0.0,
    }
}

/// Trace over the first tensor factor of a `(dim_a·dim_b)`-dimensional operator.
pub fn partial_trace_first(m: &HermMatrix, dim_a: usize, dim_b: usize) -> Result<HermMatrix> {
    if dim_a == 0 || dim_b == 0 || m.dim() != dim_a * dim_b {
        return Err(Error::Shape(format!(
            "operator of dimension {} cannot be split as {dim_a} x {dim_b}",
            m.dim()
        )));
    }
    let out = CMatrix::from_fn(dim_b, dim_b, |r, c| {
        (0..dim_a)
            .map(|i| m.m[(i * dim_b + r, i * dim_b + c)])
            .sum()
    });
    Ok(HermMatrix::from_hermitian_unchecked(out))
}

/// Real symmetric embedding `[[Re M, -Im M], [Im M, Re M]]`.
///
/// The embedding is PSD iff `M` is, and each eigenvalue of `M` appears twice.
pub fn real_embed(m: &HermMatrix) -> DMatrix<f64> {
    let d = m.dim();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let z = m.m[(r % d, c % d)];
        match (r < d, c < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Adjoint of [`real_embed`] with respect to the trace inner products:
/// `⟨real_embed(H), X⟩ = Re Tr(H · real_compress(X))`.
///
/// `real_compress(real_embed(W)) = 2W`, and PSD inputs give PSD outputs.
pub fn real_compress(x: &DMatrix<f64>) -> Result<HermMatrix> {
    if x.nrows() != x.ncols() || !x.nrows().is_multiple_of(2) || x.nrows() == 0 {
        return Err(Error::Shape(format!(
            "expected an even square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let d = x.nrows() / 2;
    let m = CMatrix::from_fn(d, d, |r, c| {
        C64::new(x[(r, c)] + x[(r + d, c + d)], x[(r + d, c)] - x[(r, c + d)])
    });
    Ok(HermMatrix::from_hermitian_unchecked(m))
}

/// Orthonormal (Hilbert–Schmidt) basis of the `d²`-dimensional real space of
/// `d × d` Hermitian matrices: diagonal units, then for each `r < s` the
/// symmetric and antisymmetric off-diagonal pairs.
pub fn hermitian_basis(d: usize) -> Vec<HermMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(r, r)] = C64::new(1.0, 0.0);
        out.push(HermMatrix { m, asymmetry: 0.0 });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for r in 0..d {
        for s in (r + 1)..d {
            let mut re = CMatrix::zeros(d, d);
            re[(r, s)] = C64::new(h, 0.0);
            re[(s, r)] = C64::new(h, 0.0);
            out.push(HermMatrix {
                m: re,
                asymmetry: 0.0,
            });
            let mut im = CMatrix::zeros(d, d);
            im[(r, s)] = C64::new(0.0, h);
            im[(s, r)] = C64::new(0.0, -h);
            out.push(HermMatrix {
                m: im,
                asymmetry: 0.0,
            });
        }
    }
    out
}
