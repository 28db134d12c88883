//! Dense complex operator algebra.
//!
//! Everything downstream consumes [`ComplexMatrix`]: Pauli and collective-spin
//! operators, truncated boson ladders and spin-`S` multiplet matrices are all
//! built here. Storage is dense; a thin newtype over `faer::Mat<c64>` keeps the
//! arithmetic in one place.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use faer::{c64, Mat, MatRef};

use crate::error::{LabError, Result};

/// Largest Hilbert-space dimension any builder will produce unless a caller
/// passes its own limit.
pub const DEFAULT_MAX_DIM: usize = 8192;

/// Relative Hermiticity tolerance applied at construction of a
/// [`HermitianOperator`].
pub const HERMITICITY_TOL: f64 = 1e-12;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Below this dimension products always go through the dense kernel.
const SPARSE_MIN_DIM: usize = 64;
/// A factor counts as sparse when at most `dim²/SPARSE_FILL` entries are nonzero.
const SPARSE_FILL: usize = 16;

/// Square dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(Mat<c64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self(Mat::from_fn(dim, dim, f))
    }

    /// Diagonal matrix with real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { c64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Build from row slices. Fails unless the rows form a square array.
    pub fn from_rows(rows: &[Vec<c64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(LabError::Shape(format!(
                "row {bad} has {} entries, expected {dim}",
                rows[bad].len()
            )));
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Wrap a `faer` matrix. Fails on non-square input.
    pub fn from_faer(m: Mat<c64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(LabError::Shape(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: c64) {
        self.0[(i, j)] = value;
    }

    pub fn as_faer(&self) -> MatRef<'_, c64> {
        self.0.as_ref()
    }

    pub fn into_faer(self) -> Mat<c64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint().to_owned())
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.0[(i, j)].norm());
            }
        }
        m
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.0[(i, j)] - other.0[(i, j)]).norm());
            }
        }
        m
    }

    /// `max |M - M†|` over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                m = m.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self(Mat::from_fn(self.dim(), self.dim(), |i, j| self.0[(i, j)] * factor))
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c64::new(factor, 0.0))
    }

    /// Matrix product with a shape check.
    /// Product. Spin and ladder operators are sparse in the product basis, so
    /// a mostly-zero factor takes a sparse path; the result is the same.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other, "product")?;
        let dim = self.dim();
        if dim >= SPARSE_MIN_DIM {
            if let Some(cols) = other.sparse_columns() {
                // column c of the product is Σ_k other[k, c]·self[:, k]
                let mut out = Mat::<c64>::zeros(dim, dim);
                for (c, entries) in cols.iter().enumerate() {
                    for &(k, v) in entries {
                        let src = self.0.col(k);
                        let mut dst = out.col_mut(c);
                        for i in 0..dim {
                            dst[i] += src[i] * v;
                        }
                    }
                }
                return Ok(Self(out));
            }
            if let Some(cols) = self.sparse_columns() {
                // self[i, k]·other[k, c] accumulated over the nonzeros of self
                let mut out = Mat::<c64>::zeros(dim, dim);
                for c in 0..dim {
                    let src = other.0.col(c);
                    let mut dst = out.col_mut(c);
                    for (k, entries) in cols.iter().enumerate() {
                        let b = src[k];
                        if b == ZERO {
                            continue;
                        }
                        for &(i, v) in entries {
                            dst[i] += v * b;
                        }
                    }
                }
                return Ok(Self(out));
            }
        }
        Ok(Self(&self.0 * &other.0))
    }

    /// Nonzeros per column, or `None` when the fill exceeds `1/SPARSE_FILL`.
    fn sparse_columns(&self) -> Option<Vec<Vec<(usize, c64)>>> {
        let dim = self.dim();
        let budget = dim * dim / SPARSE_FILL;
        let mut count = 0;
        let mut cols = Vec::with_capacity(dim);
        for c in 0..dim {
            let col = self.0.col(c);
            let mut entries = Vec::new();
            for i in 0..dim {
                if col[i] != ZERO {
                    entries.push((i, col[i]));
                }
            }
            count += entries.len();
            if count > budget {
                return None;
            }
            cols.push(entries);
        }
        Some(cols)
    }

    fn zip(&self, other: &Self, f: impl Fn(c64, c64) -> c64) -> Self {
        Self(Mat::from_fn(self.dim(), self.dim(), |i, j| f(self.0[(i, j)], other.0[(i, j)])))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other, "sum")?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other, "difference")?;
        Ok(self.zip(other, |a, b| a - b))
    }

    /// Anticommutator `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(&ab + &ba)
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<c64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect()).collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        if self.dim() <= 8 {
            for i in 0..self.dim() {
                let row: Vec<String> = (0..self.dim())
                    .map(|j| {
                        let z = self.0[(i, j)];
                        format!("{:+.4}{:+.4}i", z.re, z.im)
                    })
                    .collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
        }
        Ok(())
    }
}

fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix, what: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(LabError::Shape(format!("{what} of {}x{} and {}x{}", a.dim(), a.dim(), b.dim(), b.dim())));
    }
    Ok(())
}

// Operator overloads panic on mismatched shapes, like the underlying `faer`
// arithmetic; the `checked_*` methods report a `LabError::Shape` instead.

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        self.checked_add(rhs).expect("dimension mismatch in +")
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in +=");
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                let v = self.0[(i, j)] + rhs.0[(i, j)];
                self.0[(i, j)] = v;
            }
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.checked_sub(rhs).expect("dimension mismatch in -")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("dimension mismatch in *")
    }
}

impl Mul<&ComplexMatrix> for c64 {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        rhs.scale(self)
    }
}

impl Mul<&ComplexMatrix> for f64 {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        rhs.scale_real(self)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Self-adjoint operator, validated at construction.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    hermiticity_defect: f64,
}

impl HermitianOperator {
    /// Accepts `matrix` when `max|M - M†| ≤ 1e-12 · max|M_ij|`. Operators
    /// outside the tolerance are rejected, never symmetrized.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        let tolerance = HERMITICITY_TOL * matrix.max_abs();
        if defect > tolerance {
            return Err(LabError::NotHermitian { defect, tolerance });
        }
        Ok(Self { matrix, hermiticity_defect: defect })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(&ab - &ba)
}

/// Kronecker product with the default capacity.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_capacity(a, b, DEFAULT_MAX_DIM)
}

/// Kronecker product; entry `(i·db + k, j·db + l) = a[i,j]·b[k,l]`.
pub fn kron_with_capacity(a: &ComplexMatrix, b: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let requested = da
        .checked_mul(db)
        .ok_or(LabError::Capacity { requested: usize::MAX, max: max_dim })?;
    check_capacity(requested, max_dim)?;
    Ok(ComplexMatrix::from_fn(requested, |r, c| a.get(r / db, c / db) * b.get(r % db, c % db)))
}

pub(crate) fn check_capacity(requested: usize, max_dim: usize) -> Result<()> {
    if requested > max_dim {
        return Err(LabError::Capacity { requested, max: max_dim });
    }
    Ok(())
}

/// Spin axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Pauli matrix in the basis (up, down) with `σᶻ = diag(1, −1)`.
pub fn pauli(axis: Axis) -> ComplexMatrix {
    let rows = match axis {
        Axis::X => [[ZERO, ONE], [ONE, ZERO]],
        Axis::Y => [[ZERO, -I], [I, ZERO]],
        Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
    };
    ComplexMatrix::from_fn(2, |i, j| rows[i][j])
}

/// `σ⁺ = (σˣ + iσʸ)/2`, the single-site raising operator.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i == 0 && j == 1 { ONE } else { ZERO })
}

/// Number of sites needed before `2^n_spins` overflows the capacity.
fn product_dim(n_spins: usize, max_dim: usize) -> Result<usize> {
    if n_spins == 0 {
        return Err(LabError::Shape("at least one spin is required".into()));
    }
    if n_spins >= usize::BITS as usize - 1 {
        return Err(LabError::Capacity { requested: usize::MAX, max: max_dim });
    }
    let dim = 1usize << n_spins;
    check_capacity(dim, max_dim)?;
    Ok(dim)
}

/// `Σᵢ opᵢ` for a single-site operator acting on site `i` of `n_spins`
/// sites (site 0 is the left-most Kronecker factor).
pub fn site_sum(n_spins: usize, single: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    if single.dim() != 2 {
        return Err(LabError::Shape("site operators must be 2x2".into()));
    }
    let dim = product_dim(n_spins, max_dim)?;
    let mut out = ComplexMatrix::zeros(dim);
    for site in 0..n_spins {
        let shift = n_spins - 1 - site;
        let mask = 1usize << shift;
        for col in 0..dim {
            let b_in = (col >> shift) & 1;
            for b_out in 0..2 {
                let v = single.get(b_out, b_in);
                if v == ZERO {
                    continue;
                }
                let row = (col & !mask) | (b_out << shift);
                let cur = out.get(row, col);
                out.set(row, col, cur + v);
            }
        }
    }
    Ok(out)
}

/// Intensive collective spin `J^α = (1/N) Σᵢ σᵢ^α` on the `2^N` product space.
pub fn collective_spin(n_spins: usize, axis: Axis) -> Result<HermitianOperator> {
    collective_spin_with_capacity(n_spins, axis, DEFAULT_MAX_DIM)
}

pub fn collective_spin_with_capacity(n_spins: usize, axis: Axis, max_dim: usize) -> Result<HermitianOperator> {
    let sum = site_sum(n_spins, &pauli(axis), max_dim)?;
    HermitianOperator::new(sum.scale_real(1.0 / n_spins as f64))
}

/// Truncated annihilation operator: `b[n−1, n] = √n` for `1 ≤ n < cutoff`.
pub fn boson_ladder(cutoff: usize) -> Result<ComplexMatrix> {
    if cutoff < 2 {
        return Err(LabError::Shape(format!("Fock cutoff must be at least 2, got {cutoff}")));
    }
    check_capacity(cutoff, DEFAULT_MAX_DIM)?;
    Ok(ComplexMatrix::from_fn(cutoff, |i, j| {
        if j == i + 1 {
            c64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    }))
}

/// Spin-`S` multiplet matrices `S^α` for `S = twice_s / 2`, basis ordered by
/// descending magnetic quantum number `m = S, S−1, …, −S`.
pub fn spin_multiplet(twice_s: usize, axis: Axis) -> ComplexMatrix {
    let dim = twice_s + 1;
    let s = twice_s as f64 / 2.0;
    let m_of = |idx: usize| s - idx as f64;
    // ⟨m+1|S⁺|m⟩ = √(S(S+1) − m(m+1))
    let raise = |idx: usize| {
        let m = m_of(idx);
        (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    };
    ComplexMatrix::from_fn(dim, |i, j| match axis {
        Axis::Z => {
            if i == j {
                c64::new(m_of(i), 0.0)
            } else {
                ZERO
            }
        }
        Axis::X | Axis::Y => {
            // S⁺ has entries (j−1, j); S⁻ has entries (j+1, j).
            let plus = if j >= 1 && i == j - 1 { raise(j) } else { 0.0 };
            let minus = if i == j + 1 { raise(i) } else { 0.0 };
            match axis {
                Axis::X => c64::new(0.5 * (plus + minus), 0.0),
                _ => c64::new(0.0, -0.5 * (plus - minus)),
            }
        }
    })
}

/// Spin-`S` raising operator `S⁺` in the same basis as [`spin_multiplet`].
pub fn spin_raising(twice_s: usize) -> ComplexMatrix {
    let x = spin_multiplet(twice_s, Axis::X);
    let y = spin_multiplet(twice_s, Axis::Y);
    &x + &y.scale(I)
}
