//! Small dense linear-algebra helpers shared by the filters and oracles.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative eigenvalue cutoff for pseudo-inverses.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-10;

/// Result of an eigenvalue-based Hermitian pseudo-inverse.
#[derive(Clone, Debug)]
pub struct HermitianPinv<T: nalgebra::Scalar> {
    pub inverse: DMatrix<T>,
    /// Number of eigenvalues kept.
    pub rank: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Smallest eigenvalue magnitude that survived the cutoff.
    pub min_kept: f64,
}

impl<T: nalgebra::Scalar> HermitianPinv<T> {
    /// Ratio of the largest to the smallest kept eigenvalue magnitude.
    pub fn condition(&self) -> f64 {
        if self.rank > 0 {
            self.max_eigenvalue.abs().max(self.min_eigenvalue.abs()) / self.min_kept
        } else {
            f64::INFINITY
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, returned as (eigenvalues, eigenvectors).
pub fn hermitian_eigen<T>(m: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Pseudo-inverse `V diag(1/λ) Vᴴ`, dropping eigenvalues with `|λ| <= rel * max|λ|`.
///
/// The input is assumed Hermitian; only its Hermitian part is used.
pub fn hermitian_pinv<T>(m: &DMatrix<T>, rel_cutoff: f64) -> HermitianPinv<T>
where
    T: ComplexField<RealField = f64>,
{
    hermitian_pinv_many(std::slice::from_ref(m), rel_cutoff)
        .pop()
        .expect("one input")
}

/// Pseudo-inverts several Hermitian blocks with a cutoff relative to the
/// largest eigenvalue magnitude over all of them.
pub fn hermitian_pinv_many<T>(ms: &[DMatrix<T>], rel_cutoff: f64) -> Vec<HermitianPinv<T>>
where
    T: ComplexField<RealField = f64>,
{
    let eigs: Vec<(Vec<f64>, DMatrix<T>)> = ms
        .iter()
        .map(|m| {
            let h = (m + m.adjoint()).scale(0.5);
            hermitian_eigen(&h)
        })
        .collect();
    let global_max = eigs
        .iter()
        .flat_map(|(l, _)| l.iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max);
    let cutoff = rel_cutoff * global_max;
    eigs.into_iter()
        .map(|(vals, vecs)| invert_eigen(&vals, &vecs, cutoff, global_max == 0.0))
        .collect()
}

/// Real symmetric pseudo-inverse dropping eigenvalues with `|λ| <= threshold`.
pub fn sym_pinv_abs(m: &DMatrix<f64>, threshold: f64) -> HermitianPinv<f64> {
    let (vals, vecs) = hermitian_eigen(&symmetrize(m));
    invert_eigen(&vals, &vecs, threshold, false)
}

fn invert_eigen<T>(vals: &[f64], vecs: &DMatrix<T>, cutoff: f64, all_zero: bool) -> HermitianPinv<T>
where
    T: ComplexField<RealField = f64>,
{
    let n = vals.len();
    let mut inv = DMatrix::<T>::zeros(n, n);
    let mut rank = 0;
    let mut kept_min = f64::INFINITY;
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() <= cutoff || all_zero {
            continue;
        }
        rank += 1;
        kept_min = kept_min.min(lam.abs());
        let v = vecs.column(k);
        let w = T::from_real(1.0 / lam);
        inv += (&v * v.adjoint()) * w;
    }
    let min_eigenvalue = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    HermitianPinv {
        inverse: inv,
        rank,
        min_eigenvalue: if n == 0 { 0.0 } else { min_eigenvalue },
        max_eigenvalue: if n == 0 { 0.0 } else { max_eigenvalue },
        min_kept: kept_min,
    }
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Minimum eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m).symmetric_eigenvalues().min()
}

/// True when `m` is symmetric and `λ_min >= -tol * max(1, |λ|_max)`.
pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    if m.nrows() == 0 {
        return true;
    }
    let scale = max_abs(m).max(1.0);
    if max_abs_diff(m, &m.transpose()) > tol * scale {
        return false;
    }
    let eig = symmetrize(m).symmetric_eigenvalues();
    let top = eig.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    eig.min() >= -tol * top
}

/// Factor `F` with `F Fᵀ = m` for a symmetric PSD matrix, through its
/// eigen-decomposition. Eigenvalues in `[-clip*scale, 0)` are set to zero;
/// anything more negative is reported as an error.
pub fn psd_factor(m: &DMatrix<f64>, clip: f64, what: &str) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::dimension(what, (n, n), m.shape()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = symmetrize(m).symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut f = eig.eigenvectors.clone();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -clip * scale {
            return Err(Error::NotPsd {
                what: what.to_string(),
                min_eigenvalue: lam,
            });
        }
        let s = lam.max(0.0).sqrt();
        f.column_mut(k).scale_mut(s);
    }
    Ok(f)
}

/// Real symmetric pseudo-inverse with the default cutoff conventions.
pub fn sym_pinv(m: &DMatrix<f64>, rel_cutoff: f64) -> HermitianPinv<f64> {
    hermitian_pinv(m, rel_cutoff)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

pub fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

/// Block-diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}
