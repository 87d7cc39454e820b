//! Dense tessarine matrices and vectors.
//!
//! Storage is row-major. Real vectors associated with a tessarine vector
//! are stacked part-major: `x^r = [x_r; x_η; x_η'; x_η'']`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianPinv};
use crate::tessarine::{Conjugation, Tessarine, PARTS};

#[derive(Clone, Debug, PartialEq)]
pub struct TessarineMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Tessarine>,
}

impl TessarineMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        TessarineMatrix {
            rows,
            cols,
            data: vec![Tessarine::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Tessarine::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Tessarine) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        TessarineMatrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Tessarine>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dimension("tessarine matrix data", (rows, cols), (data.len(), 1)));
        }
        Ok(TessarineMatrix { rows, cols, data })
    }

    pub fn scalar(t: Tessarine) -> Self {
        TessarineMatrix {
            rows: 1,
            cols: 1,
            data: vec![t],
        }
    }

    /// Embeds a real matrix (all imaginary parts zero).
    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Tessarine::real(m[(i, j)]))
    }

    pub fn diagonal(d: &[Tessarine]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Tessarine] {
        &self.data
    }

    /// The `ν`-th real part as a real matrix.
    pub fn part(&self, idx: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].part(idx))
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.part(0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose with the tessarine conjugate `*`.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].star())
    }

    pub fn conjugate(&self, kind: Conjugation) -> Self {
        self.map(|t| t.conj(kind))
    }

    pub fn map(&self, f: impl Fn(Tessarine) -> Tessarine) -> Self {
        TessarineMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|t| f(*t)).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|t| t.scale(k))
    }

    /// Entry-wise product with a real matrix of the same shape.
    pub fn hadamard_real(&self, w: &DMatrix<f64>) -> Self {
        assert_eq!(self.shape(), w.shape(), "hadamard shape");
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(w[(i, j)]))
    }

    /// `self · m` for a real right factor.
    pub fn mul_real(&self, m: &DMatrix<f64>) -> Self {
        assert_eq!(self.cols, m.nrows(), "mul_real shape");
        let mut out = Self::zeros(self.rows, m.ncols());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Tessarine::ZERO {
                    continue;
                }
                for j in 0..m.ncols() {
                    let b = m[(k, j)];
                    if b != 0.0 {
                        out[(i, j)] += a.scale(b);
                    }
                }
            }
        }
        out
    }

    /// `m · self` for a real left factor.
    pub fn real_mul(m: &DMatrix<f64>, rhs: &Self) -> Self {
        assert_eq!(m.ncols(), rhs.rows, "real_mul shape");
        let mut out = Self::zeros(m.nrows(), rhs.cols);
        for i in 0..m.nrows() {
            for k in 0..m.ncols() {
                let a = m[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += rhs[(k, j)].scale(a);
                }
            }
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "block out of range");
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "block out of range"
        );
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn block_diag(blocks: &[Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// `self ⊗ I_n`.
    pub fn kron_identity(&self, n: usize) -> Self {
        let mut out = Self::zeros(self.rows * n, self.cols * n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for d in 0..n {
                    out[(i * n + d, j * n + d)] = self[(i, j)];
                }
            }
        }
        out
    }

    /// `I_n ⊗ self`.
    pub fn identity_kron(&self, n: usize) -> Self {
        let blocks = vec![self.clone(); n];
        Self::block_diag(&blocks)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, t| m.max(t.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((*a - *b).max_abs()))
    }

    /// `(M + Mᴴ) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.hermitian()).scale(0.5)
    }

    /// Real matrix `ρ(M)` with `(M x)^r = ρ(M) x^r`, in the part-major layout.
    pub fn real_representation(&self) -> DMatrix<f64> {
        let (r, c) = self.shape();
        let mut out = DMatrix::zeros(PARTS * r, PARTS * c);
        for i in 0..r {
            for j in 0..c {
                let l = self[(i, j)].left_mul_matrix();
                for a in 0..PARTS {
                    for b in 0..PARTS {
                        out[(a * r + i, b * c + j)] = l[(a, b)];
                    }
                }
            }
        }
        out
    }

    /// The two complex matrices of the idempotent decomposition.
    pub fn split(&self) -> (DMatrix<Complex<f64>>, DMatrix<Complex<f64>>) {
        let mut a = DMatrix::zeros(self.rows, self.cols);
        let mut b = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (c1, c2) = self[(i, j)].split();
                a[(i, j)] = c1;
                b[(i, j)] = c2;
            }
        }
        (a, b)
    }

    pub fn from_split(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> Self {
        assert_eq!(a.shape(), b.shape(), "split shapes");
        Self::from_fn(a.nrows(), a.ncols(), |i, j| Tessarine::from_split(a[(i, j)], b[(i, j)]))
    }

    /// Eigenvalue-based pseudo-inverse of a Hermitian tessarine matrix.
    ///
    /// Eigenvalues are those of the two complex components (equivalently of
    /// the real representation); the cutoff is relative to the largest one.
    pub fn pinv_hermitian(&self, rel_cutoff: f64) -> TessarinePinv {
        assert_eq!(self.rows, self.cols, "pinv of non-square matrix");
        let (a, b) = self.split();
        let mut parts = linalg::hermitian_pinv_many(&[a, b], rel_cutoff);
        let second = parts.pop().expect("two parts");
        let first = parts.pop().expect("two parts");
        let inverse = Self::from_split(&first.inverse, &second.inverse);
        TessarinePinv { inverse, first, second }
    }

    /// PSD in the real-representation sense.
    pub fn is_psd(&self, tol: f64) -> bool {
        linalg::is_psd(&self.real_representation(), tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.hermitian()) <= tol * self.max_abs().max(1.0)
    }

    pub fn mul_vector(&self, x: &TessarineVector) -> TessarineVector {
        assert_eq!(self.cols, x.len(), "mat-vec shape");
        let mut out = vec![Tessarine::ZERO; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (a, b) in row.iter().zip(x.as_slice()) {
                *o += *a * *b;
            }
        }
        TessarineVector(out)
    }
}

/// Pseudo-inverse plus the per-component eigen diagnostics.
#[derive(Clone, Debug)]
pub struct TessarinePinv {
    pub inverse: TessarineMatrix,
    pub first: HermitianPinv<Complex<f64>>,
    pub second: HermitianPinv<Complex<f64>>,
}

impl TessarinePinv {
    pub fn rank(&self) -> usize {
        self.first.rank + self.second.rank
    }

    /// Dimension of the real representation divided by two (each complex
    /// eigenvalue corresponds to two real ones).
    pub fn dim(&self) -> usize {
        self.inverse.nrows() * 2
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.first.min_eigenvalue.min(self.second.min_eigenvalue)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.first.max_eigenvalue.max(self.second.max_eigenvalue)
    }

    pub fn condition(&self) -> f64 {
        let min_kept = self.first.min_kept.min(self.second.min_kept);
        if self.rank() == 0 {
            f64::INFINITY
        } else {
            self.max_eigenvalue().abs().max(self.min_eigenvalue().abs()) / min_kept
        }
    }
}

impl Index<(usize, usize)> for TessarineMatrix {
    type Output = Tessarine;
    fn index(&self, (i, j): (usize, usize)) -> &Tessarine {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for TessarineMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Tessarine {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &TessarineMatrix {
    type Output = TessarineMatrix;
    fn mul(self, rhs: &TessarineMatrix) -> TessarineMatrix {
        assert_eq!(
            self.cols,
            rhs.rows,
            "matmul shape {:?} x {:?}",
            self.shape(),
            rhs.shape()
        );
        let mut out = TessarineMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Tessarine::ZERO {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * *b;
                }
            }
        }
        out
    }
}

impl Mul for TessarineMatrix {
    type Output = TessarineMatrix;
    fn mul(self, rhs: TessarineMatrix) -> TessarineMatrix {
        &self * &rhs
    }
}

impl Add for &TessarineMatrix {
    type Output = TessarineMatrix;
    fn add(self, rhs: &TessarineMatrix) -> TessarineMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape");
        TessarineMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl Add for TessarineMatrix {
    type Output = TessarineMatrix;
    fn add(self, rhs: TessarineMatrix) -> TessarineMatrix {
        &self + &rhs
    }
}

impl Sub for &TessarineMatrix {
    type Output = TessarineMatrix;
    fn sub(self, rhs: &TessarineMatrix) -> TessarineMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape");
        TessarineMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl Sub for TessarineMatrix {
    type Output = TessarineMatrix;
    fn sub(self, rhs: TessarineMatrix) -> TessarineMatrix {
        &self - &rhs
    }
}

impl Neg for &TessarineMatrix {
    type Output = TessarineMatrix;
    fn neg(self) -> TessarineMatrix {
        self.scale(-1.0)
    }
}

/// A column of tessarines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TessarineVector(pub Vec<Tessarine>);

impl TessarineVector {
    pub fn zeros(n: usize) -> Self {
        TessarineVector(vec![Tessarine::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Tessarine] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tessarine> {
        self.0.iter()
    }

    /// Rebuilds a tessarine vector from its part-major real vector.
    pub fn from_real_vector(v: &DVector<f64>) -> Result<Self> {
        if !v.len().is_multiple_of(PARTS) {
            return Err(Error::dimension(
                "real vector",
                (PARTS * (v.len() / PARTS), 1),
                (v.len(), 1),
            ));
        }
        let n = v.len() / PARTS;
        Ok(TessarineVector(
            (0..n)
                .map(|j| Tessarine::new(v[j], v[n + j], v[2 * n + j], v[3 * n + j]))
                .collect(),
        ))
    }

    /// `x^r = [x_r; x_η; x_η'; x_η'']`.
    pub fn real_vector(&self) -> DVector<f64> {
        let n = self.len();
        let mut out = DVector::zeros(PARTS * n);
        for (j, t) in self.0.iter().enumerate() {
            for (p, v) in t.parts().iter().enumerate() {
                out[p * n + j] = *v;
            }
        }
        out
    }

    pub fn conjugate(&self, kind: Conjugation) -> Self {
        TessarineVector(self.0.iter().map(|t| t.conj(kind)).collect())
    }

    /// `[x; x*; x^η; x^η'']`.
    pub fn augment(&self) -> Self {
        let mut out = self.0.clone();
        for kind in [Conjugation::Star, Conjugation::Eta, Conjugation::EtaPP] {
            out.extend(self.0.iter().map(|t| t.conj(kind)));
        }
        TessarineVector(out)
    }

    /// Part-wise Hadamard product.
    pub fn star_product(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::dimension("star product", (self.len(), 1), (other.len(), 1)));
        }
        Ok(TessarineVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a.star_product(b)).collect(),
        ))
    }

    pub fn as_column(&self) -> TessarineMatrix {
        TessarineMatrix {
            rows: self.len(),
            cols: 1,
            data: self.0.clone(),
        }
    }

    pub fn segment(&self, start: usize, len: usize) -> Self {
        TessarineVector(self.0[start..start + len].to_vec())
    }

    pub fn concat(parts: &[TessarineVector]) -> Self {
        TessarineVector(parts.iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, t| m.max(t.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "vector length");
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0f64, |m, (a, b)| m.max((*a - *b).max_abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        TessarineVector(self.0.iter().map(|t| t.scale(k)).collect())
    }
}

impl Index<usize> for TessarineVector {
    type Output = Tessarine;
    fn index(&self, i: usize) -> &Tessarine {
        &self.0[i]
    }
}

impl IndexMut<usize> for TessarineVector {
    fn index_mut(&mut self, i: usize) -> &mut Tessarine {
        &mut self.0[i]
    }
}

impl Add for &TessarineVector {
    type Output = TessarineVector;
    fn add(self, rhs: &TessarineVector) -> TessarineVector {
        assert_eq!(self.len(), rhs.len(), "vector add");
        TessarineVector(self.0.iter().zip(&rhs.0).map(|(a, b)| *a + *b).collect())
    }
}

impl Sub for &TessarineVector {
    type Output = TessarineVector;
    fn sub(self, rhs: &TessarineVector) -> TessarineVector {
        assert_eq!(self.len(), rhs.len(), "vector sub");
        TessarineVector(self.0.iter().zip(&rhs.0).map(|(a, b)| *a - *b).collect())
    }
}

impl Mul<&TessarineVector> for &TessarineMatrix {
    type Output = TessarineVector;
    fn mul(self, rhs: &TessarineVector) -> TessarineVector {
        self.mul_vector(rhs)
    }
}

impl From<Vec<Tessarine>> for TessarineVector {
    fn from(v: Vec<Tessarine>) -> Self {
        TessarineVector(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmat(r: usize, c: usize) -> impl Strategy<Value = TessarineMatrix> {
        prop::collection::vec(prop::array::uniform4(-3.0f64..3.0), r * c).prop_map(move |v| {
            TessarineMatrix::from_row_major(r, c, v.into_iter().map(Tessarine::from_parts).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn hermitian_is_involution_and_reverses_products(a in tmat(3, 2), b in tmat(2, 4)) {
            prop_assert_eq!(a.hermitian().hermitian(), a.clone());
            let lhs = (&a * &b).hermitian();
            let rhs = &b.hermitian() * &a.hermitian();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }

        #[test]
        fn real_representation_is_multiplicative(a in tmat(2, 3), b in tmat(3, 2)) {
            let lhs = (&a * &b).real_representation();
            let rhs = a.real_representation() * b.real_representation();
            prop_assert!(linalg::max_abs_diff(&lhs, &rhs) <= 1e-12);
            let h = a.hermitian().real_representation();
            prop_assert!(linalg::max_abs_diff(&h, &a.real_representation().transpose()) == 0.0);
        }

        #[test]
        fn real_vector_round_trip(v in prop::collection::vec(prop::array::uniform4(-5.0f64..5.0), 2)) {
            let x = TessarineVector(v.into_iter().map(Tessarine::from_parts).collect());
            let back = TessarineVector::from_real_vector(&x.real_vector()).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn conjugations_entrywise(a in tmat(2, 2)) {
            for kind in [Conjugation::Star, Conjugation::Eta, Conjugation::EtaPP] {
                let c = a.conjugate(kind);
                for i in 0..2 { for j in 0..2 {
                    prop_assert_eq!(c[(i, j)], a[(i, j)].conj(kind));
                }}
            }
            prop_assert_eq!(a.hermitian(), a.conjugate(Conjugation::Star).transpose());
        }

        #[test]
        fn pinv_inverts_hermitian_pd(a in tmat(3, 3)) {
            let m = &(&a * &a.hermitian()) + &TessarineMatrix::identity(3);
            let p = m.pinv_hermitian(1e-10);
            prop_assert_eq!(p.rank(), 6);
            let id = &m * &p.inverse;
            prop_assert!(id.max_abs_diff(&TessarineMatrix::identity(3)) <= 1e-9);
        }
    }

    #[test]
    fn star_product_rejects_length_mismatch() {
        let a = TessarineVector::zeros(2);
        let b = TessarineVector::zeros(3);
        assert!(a.star_product(&b).is_err());
    }

    #[test]
    fn psd_through_real_representation() {
        let a = TessarineMatrix::scalar(Tessarine::new(1.0, 0.5, 0.2, -0.3));
        let m = &a * &a.hermitian();
        assert!(m.is_psd(1e-12));
        assert!(!m.scale(-1.0).is_psd(1e-12));
    }
}
