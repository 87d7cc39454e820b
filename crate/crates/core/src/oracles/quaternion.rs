//! Strictly linear and semi-widely linear counterparts of the batch LLMS
//! projection, in the quaternion algebra and (as a cross-check) in the
//! tessarine algebra.
//!
//! The tessarine data are read as quaternions part by part
//! (`r, η, η', η''` → `1, i, j, k`). An estimator that is linear in the
//! algebra acts on every `4 × 4` real block by left multiplication, so the
//! best one depends only on the projection of each covariance block onto
//! that algebra: the average `¼ Σ_u G(u) C G(u)ᵀ` over the orthogonal maps
//! `G(u)` commuting with it.

use nalgebra::{DMatrix, DVector, Matrix4};

use super::batch::{project_innovations, Estimate, Moments};
use super::moment_table::MomentTable;
use crate::error::Result;
use crate::model::SystemSpec;
use crate::tessarine::{Tessarine, PARTS};

/// Quaternion processing compared against the tessarine filters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum QuaternionMode {
    /// Strictly linear in `y`.
    Qsl,
    /// Linear in `y` and its involution `y^j = -j y j`.
    Qswl,
}

/// Restricted linear class of a batch projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearClass {
    QuaternionStrict,
    QuaternionSemiWide,
    TessarineStrict,
    /// Linear in `y` and `y*`.
    TessarineSemiWide,
}

impl From<QuaternionMode> for LinearClass {
    fn from(m: QuaternionMode) -> Self {
        match m {
            QuaternionMode::Qsl => LinearClass::QuaternionStrict,
            QuaternionMode::Qswl => LinearClass::QuaternionSemiWide,
        }
    }
}

impl LinearClass {
    fn semi_wide(self) -> bool {
        matches!(self, LinearClass::QuaternionSemiWide | LinearClass::TessarineSemiWide)
    }

    /// Orthogonal maps whose commutant is the left-multiplication algebra.
    fn group(self) -> [Matrix4<f64>; 4] {
        match self {
            LinearClass::QuaternionStrict | LinearClass::QuaternionSemiWide => {
                [0, 1, 2, 3].map(|u| quaternion_right_matrix(unit(u)))
            }
            _ => [0, 1, 2, 3].map(|u| Tessarine::unit(u).left_mul_matrix()),
        }
    }
}

fn unit(u: usize) -> [f64; 4] {
    let mut q = [0.0; 4];
    q[u] = 1.0;
    q
}

/// Hamilton product with `i j = k`, `j k = i`, `k i = j`.
pub fn quaternion_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    let [a0, a1, a2, a3] = a;
    let [b0, b1, b2, b3] = b;
    [
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ]
}

/// `L` with `(q x)^r = L x^r`.
pub fn quaternion_left_matrix(q: [f64; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| quaternion_mul(q, unit(c))[r])
}

/// `R` with `(x q)^r = R x^r`.
pub fn quaternion_right_matrix(q: [f64; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| quaternion_mul(unit(c), q)[r])
}

/// `¼ Σ_u (G_u ⊗ I_n) B (G_u ⊗ I_n)ᵀ` on every `4n × 4n` block of `c`.
pub fn project_blocks(c: &DMatrix<f64>, n: usize, class: LinearClass) -> DMatrix<f64> {
    let d = PARTS * n;
    let id = DMatrix::<f64>::identity(n, n);
    let gs: Vec<DMatrix<f64>> = class
        .group()
        .iter()
        .map(|g| DMatrix::from_fn(4, 4, |r, c| g[(r, c)]).kronecker(&id))
        .collect();
    let mut out = DMatrix::zeros(c.nrows(), c.ncols());
    for bi in 0..c.nrows() / d {
        for bj in 0..c.ncols() / d {
            let blk = c.view((bi * d, bj * d), (d, d));
            let mut acc = DMatrix::zeros(d, d);
            for g in &gs {
                acc += g * blk * g.transpose();
            }
            out.view_mut((bi * d, bj * d), (d, d)).copy_from(&(acc * 0.25));
        }
    }
    out
}

/// `diag(1, -1, 1, -1) ⊗ I_n` repeated over sensors: both `y^j` and `y*`.
fn involution(n: usize, sensors: usize) -> DVector<f64> {
    let d = PARTS * n;
    DVector::from_fn(d * sensors, |a, _| if (a % d) / n % 2 == 1 { -1.0 } else { 1.0 })
}

struct Projected<'a> {
    table: &'a MomentTable,
    class: LinearClass,
    j: DVector<f64>,
}

impl Projected<'_> {
    fn augment_cols(&self, c: &DMatrix<f64>) -> DMatrix<f64> {
        let o = c.ncols();
        let mut out = DMatrix::zeros(c.nrows(), 2 * o);
        out.view_mut((0, 0), (c.nrows(), o)).copy_from(c);
        let mut cj = c.clone();
        for (k, s) in self.j.iter().enumerate() {
            cj.column_mut(k).scale_mut(*s);
        }
        out.view_mut((0, o), (c.nrows(), o)).copy_from(&cj);
        out
    }
}

impl Moments for Projected<'_> {
    fn cov_x(&self, t: usize) -> DMatrix<f64> {
        project_blocks(self.table.cov_x(t), self.table.n, self.class)
    }

    fn cov_y(&self, s: usize, r: usize) -> DMatrix<f64> {
        let c = self.table.cov_y(s, r);
        let c = if self.class.semi_wide() {
            let top = self.augment_cols(&c);
            let mut bottom = top.clone();
            for (k, sg) in self.j.iter().enumerate() {
                bottom.row_mut(k).scale_mut(*sg);
            }
            let o = c.nrows();
            let mut full = DMatrix::zeros(2 * o, 2 * o);
            full.view_mut((0, 0), (o, 2 * o)).copy_from(&top);
            full.view_mut((o, 0), (o, 2 * o)).copy_from(&bottom);
            full
        } else {
            c
        };
        project_blocks(&c, self.table.n, self.class)
    }

    fn cov_xy(&self, t: usize, s: usize) -> DMatrix<f64> {
        let c = self.table.cov_xy(t, s);
        let c = if self.class.semi_wide() {
            self.augment_cols(c)
        } else {
            c.clone()
        };
        project_blocks(&c, self.table.n, self.class)
    }
}

/// Batch LLMS restricted to `class`, from an existing moment table.
///
/// Each returned `p` is the error covariance projected onto the class
/// algebra. Its trace and per-component variances are those of the true
/// error covariance; off-algebra entries are not recovered.
pub fn constrained_llms_with(
    table: &MomentTable,
    class: LinearClass,
    observations: &[DVector<f64>],
) -> Result<Vec<Estimate>> {
    let j = involution(table.n, table.sensors);
    let obs: Vec<DVector<f64>> = if class.semi_wide() {
        observations
            .iter()
            .map(|y| {
                let mut a = DVector::zeros(2 * y.len());
                a.rows_mut(0, y.len()).copy_from(y);
                a.rows_mut(y.len(), y.len()).copy_from(&y.component_mul(&j));
                a
            })
            .collect()
    } else {
        observations.to_vec()
    };
    project_innovations(&Projected { table, class, j }, &obs)
}

pub fn constrained_llms(spec: &SystemSpec, class: LinearClass, observations: &[DVector<f64>]) -> Result<Vec<Estimate>> {
    let table = MomentTable::new(spec, observations.len())?;
    constrained_llms_with(&table, class, observations)
}

/// QSL or QSWL estimates and error covariances for `t = 1..=observations.len()`.
pub fn quaternion_counterpart(
    spec: &SystemSpec,
    mode: QuaternionMode,
    observations: &[DVector<f64>],
) -> Result<Vec<Estimate>> {
    constrained_llms(spec, mode.into(), observations)
}

/// Error covariances of a constrained projection for `t = 1..=horizon`;
/// they do not depend on the observed values.
pub fn constrained_error_covariances(
    spec: &SystemSpec,
    class: LinearClass,
    horizon: usize,
) -> Result<Vec<DMatrix<f64>>> {
    let table = MomentTable::new(spec, horizon)?;
    let zeros = vec![DVector::zeros(table.obs_dim()); horizon];
    Ok(constrained_llms_with(&table, class, &zeros)?
        .into_iter()
        .map(|e| e.p)
        .collect())
}
