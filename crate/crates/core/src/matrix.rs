//! Dense complex matrices and the handful of spectral routines the rest of the
//! crate needs.
//!
//! Everything here is sized for operators on `C^d ⊗ C^d` with small `d`, so the
//! storage is a plain row-major `Vec`. Eigen-decomposition is delegated to
//! nalgebra's Hermitian solver; ordering and eigenvector phases are normalized
//! here so results are reproducible.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance on `max |X - X†|` for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Which tensor factor of `C^dA ⊗ C^dB` an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a square matrix from nested rows. Panics on ragged input; meant
    /// for literals.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self::from_fn(N, N, |i, j| rows[i][j])
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        Self::from_fn(n, m, |i, j| re(rows[i][j]))
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        Self::diag(&values.iter().map(|&v| re(v)).collect::<Vec<_>>())
    }

    /// `|v⟩⟨v|` for a column vector `v`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise `max |a - b|`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |X - X†|` entrywise.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Returns `(X + X†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        (self + &adj).scale(0.5)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨v|X|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let xv = self.mul_vec(v);
        v.iter().zip(&xv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn check_same_shape(&self, other: &CMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Partial trace over one factor of a `dA·dB` square operator.
    pub fn partial_trace(&self, dims: (usize, usize), over: Subsystem) -> Result<CMatrix> {
        let (da, db) = dims;
        if !self.is_square() || self.rows != da * db {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not a ({da}·{db})-square operator",
                self.rows, self.cols
            )));
        }
        Ok(match over {
            Subsystem::B => CMatrix::from_fn(da, da, |i, j| {
                (0..db).map(|k| self[(i * db + k, j * db + k)]).sum()
            }),
            Subsystem::A => CMatrix::from_fn(db, db, |i, j| {
                (0..da).map(|k| self[(k * db + i, k * db + j)]).sum()
            }),
        })
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                assert!(
                    self.rows == rhs.rows && self.cols == rhs.cols,
                    "shape mismatch in elementwise op"
                );
                CMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $trait<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                &self $op &rhs
            }
        }
        impl $trait<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                &self $op rhs
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Mul<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

/// Kronecker product; entry `(i·rows_b + j, k·cols_b + l) = a[i,k]·b[j,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + j, k * b.cols + l)] = aik * b[(j, l)];
                }
            }
        }
    }
    out
}

/// Partial transpose of a `dA·dB` square operator.
///
/// Subsystem `B` transposes each `dB×dB` block in place; subsystem `A` swaps
/// block `(i,j)` with block `(j,i)`.
pub fn partial_transpose(x: &CMatrix, dims: (usize, usize), subsystem: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    if !x.is_square() || x.rows != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not a ({da}·{db})-square operator",
            x.rows, x.cols
        )));
    }
    let mut out = CMatrix::zeros(x.rows, x.cols);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    let src = x[(i * db + k, j * db + l)];
                    let (r, c) = match subsystem {
                        Subsystem::B => (i * db + l, j * db + k),
                        Subsystem::A => (j * db + k, i * db + l),
                    };
                    out[(r, c)] = src;
                }
            }
        }
    }
    Ok(out)
}

/// Hilbert-Schmidt inner product `Tr(a† b)`.
pub fn frob_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    a.check_same_shape(b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the same order.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn vector(&self, idx: usize) -> Vec<C64> {
        self.eigenvectors.column(idx)
    }

    /// `Σ λ_i v_i v_i†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for (idx, &lam) in self.eigenvalues.iter().enumerate() {
            let v = self.vector(idx);
            out += &CMatrix::outer(&v).scale(lam);
        }
        out
    }
}

pub fn hermitian_eigen(x: &CMatrix) -> Result<Spectrum> {
    let dev = x.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(eigen_unchecked(&x.hermitian_part()))
}

/// Smallest eigenvalue of a Hermitian matrix; the input is symmetrized first.
pub fn min_eigenvalue(x: &CMatrix) -> f64 {
    let sym = x.hermitian_part();
    nalgebra::SymmetricEigen::new(sym.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(x: &CMatrix) -> Result<Vec<f64>> {
    let dev = x.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(x.hermitian_part().to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn eigen_unchecked(x: &CMatrix) -> Spectrum {
    let n = x.rows;
    let eig = nalgebra::SymmetricEigen::new(x.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut v: Vec<C64> = (0..n).map(|i| eig.eigenvectors[(i, src)]).collect();
        // phase convention: first non-negligible component real positive
        if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            for z in &mut v {
                *z *= phase;
            }
        }
        for (i, z) in v.into_iter().enumerate() {
            vectors[(i, col)] = z;
        }
    }
    Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

/// True iff the minimum eigenvalue of `x` is at least `-tol`.
pub fn is_psd(x: &CMatrix, tol: f64) -> bool {
    min_eigenvalue(x) >= -tol
}

/// Spectral norm of a real square matrix (largest singular value).
pub fn real_spectral_norm(q: &[Vec<f64>]) -> f64 {
    let n = q.len();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, q[0].len(), |i, j| q[i][j]);
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn sigma_x() -> CMatrix {
        CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let k = kron(&CMatrix::diag_real(&[1.0, 2.0]), &CMatrix::diag_real(&[3.0, 4.0]));
        assert_eq!(k, CMatrix::diag_real(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_sigma_x_on_bell() {
        let s = FRAC_1_SQRT_2;
        let xx = kron(&sigma_x(), &sigma_x());
        // X⊗X fixes |00>+|11>; X⊗1 sends it to |01>+|10>
        let out = xx.mul_vec(&[re(s), re(0.0), re(0.0), re(s)]);
        let want = [s, 0.0, 0.0, s];
        assert!(out.iter().zip(want).all(|(z, w)| (z - re(w)).norm() < 1e-15));
        let x1 = kron(&sigma_x(), &CMatrix::identity(2));
        let out = x1.mul_vec(&[re(s), re(0.0), re(0.0), re(s)]);
        let want = [0.0, s, s, 0.0];
        assert!(out.iter().zip(want).all(|(z, w)| (z - re(w)).norm() < 1e-15));
    }

    #[test]
    fn partial_transpose_of_identity_and_swap() {
        let i9 = CMatrix::identity(9);
        assert_eq!(partial_transpose(&i9, (3, 3), Subsystem::B).unwrap(), i9);

        let mut psi = vec![re(0.0); 9];
        for k in 0..3 {
            psi[k * 3 + k] = re(1.0 / 3f64.sqrt());
        }
        let p_plus = CMatrix::outer(&psi).scale(3.0);
        let swap = partial_transpose(&p_plus, (3, 3), Subsystem::B).unwrap();
        let ev = eigenvalues(&swap).unwrap();
        let neg = ev.iter().filter(|&&l| (l + 1.0).abs() < 1e-10).count();
        let pos = ev.iter().filter(|&&l| (l - 1.0).abs() < 1e-10).count();
        assert_eq!((neg, pos), (3, 6));
    }

    #[test]
    fn partial_transpose_rejects_bad_dims() {
        assert!(partial_transpose(&CMatrix::identity(8), (3, 3), Subsystem::B).is_err());
    }

    #[test]
    fn eigen_examples() {
        let s = hermitian_eigen(&CMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for (got, want) in s.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let s = hermitian_eigen(&sigma_x()).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14 && (s.eigenvalues[1] - 1.0).abs() < 1e-14);

        // g01 of the d=3 Gell-Mann set: characteristic polynomial -λ(λ² - 1/2)
        let g01 = CMatrix::from_real_rows(&[
            vec![0.0, FRAC_1_SQRT_2, 0.0],
            vec![FRAC_1_SQRT_2, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let s = hermitian_eigen(&g01).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eigen_phase_convention() {
        let y = CMatrix::from_rows([[re(0.0), c(0.0, -1.0)], [c(0.0, 1.0), re(0.0)]]);
        let s = hermitian_eigen(&y).unwrap();
        for k in 0..2 {
            let v = s.vector(k);
            assert!(v[0].im.abs() < 1e-15 && v[0].re > 0.0);
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(hermitian_eigen(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn inner_products() {
        let i3 = CMatrix::identity(3);
        assert!((frob_inner(&i3, &i3).unwrap() - re(3.0)).norm() < 1e-15);
        assert!(frob_inner(&i3, &CMatrix::identity(2)).is_err());
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&CMatrix::identity(3), 1e-9));
        assert!(!is_psd(&CMatrix::diag_real(&[1.0, -0.1]), 1e-9));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = CMatrix::diag_real(&[1.0, 2.0]);
        let b = CMatrix::diag_real(&[3.0, 4.0, 5.0]);
        let ab = kron(&a, &b);
        let ta = ab.partial_trace((2, 3), Subsystem::B).unwrap();
        assert!(ta.max_abs_diff(&a.scale(12.0)) < 1e-14);
        let tb = ab.partial_trace((2, 3), Subsystem::A).unwrap();
        assert!(tb.max_abs_diff(&b.scale(3.0)) < 1e-14);
    }
}
