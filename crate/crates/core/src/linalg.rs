//! Dense complex matrices for one- and two-qubit operators.
//!
//! Everything in this crate lives in dimension 2 or 4, so a row-major `Vec`
//! with explicit shape is all that is needed. Subsystem ordering for
//! [`CMatrix::tensor`] and [`CMatrix::partial_trace`] is `(i_a, i_b)` with the
//! second factor varying fastest.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Which factor of `H_A ⊗ H_B` to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    /// Square matrix from nested rows; panics on ragged input.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { rows: N, cols: N, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `|ket⟩⟨bra|`
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        let mut m = Self::zeros(ket.len(), bra.len());
        for (i, k) in ket.iter().enumerate() {
            for (j, b) in bra.iter().enumerate() {
                m[(i, j)] = k * b.conj();
            }
        }
        m
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
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

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(c(k, 0.0))
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise deviation from Hermiticity, `max |m_ij - conj(m_ji)|`.
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

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    /// `⟨u|M|v⟩`
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        u.iter().zip(self.apply(v)).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product with `(i_a, i_b)` row-major index convention.
    pub fn tensor(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut m = Self::zeros(rows, cols);
        for ia in 0..self.rows {
            for ja in 0..self.cols {
                let a = self[(ia, ja)];
                for ib in 0..other.rows {
                    for jb in 0..other.cols {
                        m[(ia * other.rows + ib, ja * other.cols + jb)] = a * other[(ib, jb)];
                    }
                }
            }
        }
        m
    }

    /// Traces out one factor of a square operator on `H_A ⊗ H_B`, where
    /// `H_A` has dimension `dim_a` and `H_B` has dimension `dim_b`.
    pub fn partial_trace(&self, dim_a: usize, dim_b: usize, traced: Subsystem) -> Result<Self> {
        if !self.is_square() || self.rows != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "partial trace of a {}x{} matrix over {dim_a}x{dim_b} subsystems",
                self.rows, self.cols
            )));
        }
        let idx = |a: usize, b: usize| a * dim_b + b;
        let out = match traced {
            Subsystem::A => {
                let mut m = Self::zeros(dim_b, dim_b);
                for i in 0..dim_b {
                    for j in 0..dim_b {
                        m[(i, j)] = (0..dim_a).map(|k| self[(idx(k, i), idx(k, j))]).sum();
                    }
                }
                m
            }
            Subsystem::B => {
                let mut m = Self::zeros(dim_a, dim_a);
                for i in 0..dim_a {
                    for j in 0..dim_a {
                        m[(i, j)] = (0..dim_b).map(|k| self[(idx(i, k), idx(j, k))]).sum();
                    }
                }
                m
            }
        };
        Ok(out)
    }

    /// Partial trace of a two-qubit operator.
    pub fn partial_trace_qubits(&self, traced: Subsystem) -> Result<Self> {
        self.partial_trace(2, 2, traced)
    }

    /// `Tr[self · other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows, "dimension mismatch in trace product");
        assert_eq!(self.rows, other.cols, "dimension mismatch in trace product");
        let mut acc = c(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// Eigendecomposition of a Hermitian matrix.
    ///
    /// Returns eigenvalues in ascending order and the matching eigenvectors
    /// as the columns of a unitary matrix.
    pub fn eig_hermitian(&self) -> Result<(Vec<f64>, CMatrix)> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(hermitian_eigen(self))
    }

    /// Eigenvalues only, ascending.
    pub fn eigvals_hermitian(&self) -> Result<Vec<f64>> {
        self.eig_hermitian().map(|(vals, _)| vals)
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.rows;
    // symmetrize the roundoff away so the diagonal stays real
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = nalgebra::SymmetricEigen::new(a);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, new_j)] = eig.eigenvectors[(i, old_j)];
        }
    }
    (vals, vecs)
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut m = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    m.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli and other fixed single-qubit matrices.
pub mod paulis {
    use super::{c, CMatrix};

    pub fn x() -> CMatrix {
        CMatrix::from_rows([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_rows([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_rows([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
    }
}
