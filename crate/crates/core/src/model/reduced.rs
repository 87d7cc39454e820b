//! Augmented and reduced-dimension views of a [`SystemSpec`].

use nalgebra::DMatrix;

use super::properness::{augmented_covariance, validate_properness};
use super::spec::SystemSpec;
use crate::error::{Error, Result};
use crate::matrix::{TessarineMatrix, TessarineVector};
use crate::structural::{tk_matrix, ProperOrder};
use crate::tessarine::{Conjugation, PARTS};

/// `Φ̄(t)`, the 4×4 block matrix of the `F_j` and their conjugates.
pub fn build_stacked_phi(spec: &SystemSpec, t: usize) -> TessarineMatrix {
    let n = spec.n;
    let f: Vec<TessarineMatrix> = spec.f.iter().map(|m| m.at(t)).collect();
    let id = |m: &TessarineMatrix| m.clone();
    let st = |m: &TessarineMatrix| m.conjugate(Conjugation::Star);
    let et = |m: &TessarineMatrix| m.conjugate(Conjugation::Eta);
    let epp = |m: &TessarineMatrix| m.conjugate(Conjugation::EtaPP);
    // row ν: (F index, conjugation) per column block
    let layout: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
    let mut out = TessarineMatrix::zeros(4 * n, 4 * n);
    for (row, cols) in layout.iter().enumerate() {
        for (col, &j) in cols.iter().enumerate() {
            let block = match row {
                0 => id(&f[j]),
                1 => st(&f[j]),
                2 => et(&f[j]),
                _ => epp(&f[j]),
            };
            out.set_block(row * n, col * n, &block);
        }
    }
    out
}

/// `Φ_k(t)`: `F_1` for k=1, `[[F_1, F_2], [F_2*, F_1*]]` for k=2.
pub fn reduced_phi(spec: &SystemSpec, t: usize, k: usize) -> Result<TessarineMatrix> {
    let order = ProperOrder::from_k(k)?;
    let report = validate_properness(spec, k)?;
    let bad: Vec<String> = report
        .checks
        .iter()
        .filter(|c| c.name.starts_with('F') && !c.passed)
        .map(|c| c.detail.clone())
        .collect();
    if !bad.is_empty() {
        return Err(Error::NotProper { order: k, reasons: bad });
    }
    Ok(reduced_phi_unchecked(spec, t, order))
}

pub(crate) fn reduced_phi_unchecked(spec: &SystemSpec, t: usize, order: ProperOrder) -> TessarineMatrix {
    let f1 = spec.f[0].at(t);
    match order {
        ProperOrder::T1 => f1,
        ProperOrder::T2 => {
            let n = spec.n;
            let f2 = spec.f[1].at(t);
            let mut out = TessarineMatrix::zeros(2 * n, 2 * n);
            out.set_block(0, 0, &f1);
            out.set_block(0, n, &f2);
            out.set_block(n, 0, &f2.conjugate(Conjugation::Star));
            out.set_block(n, n, &f1.conjugate(Conjugation::Star));
            out
        }
    }
}

/// `4 𝒯_k C 𝒯_kᴴ`: the `kn × kn` reduced pseudo-covariance of a real covariance.
pub fn reduce_covariance(c: &DMatrix<f64>, n: usize, order: ProperOrder) -> TessarineMatrix {
    let tk = tk_matrix(n, order);
    (&(&tk * &TessarineMatrix::from_real(c)) * &tk.hermitian()).scale(4.0)
}

/// Reduced noise statistics `Q_k`, `R_k^{(i)}`, `S_k^{(i)}` at one time step.
#[derive(Clone, Debug)]
pub struct ReducedStats {
    pub q: TessarineMatrix,
    pub r: Vec<TessarineMatrix>,
    pub s: Vec<TessarineMatrix>,
}

impl ReducedStats {
    pub fn at(spec: &SystemSpec, t: usize, order: ProperOrder) -> Self {
        let n = spec.n;
        ReducedStats {
            q: reduce_covariance(&spec.q.at(t), n, order),
            r: spec.r.iter().map(|m| reduce_covariance(&m.at(t), n, order)).collect(),
            s: spec.s.iter().map(|m| reduce_covariance(&m.at(t), n, order)).collect(),
        }
    }

    /// `S_k(t) = [S_k^{(1)}, …, S_k^{(R)}]`.
    pub fn s_row(&self) -> TessarineMatrix {
        let kn = self.q.nrows();
        let mut out = TessarineMatrix::zeros(kn, kn * self.s.len());
        for (i, s) in self.s.iter().enumerate() {
            out.set_block(0, i * kn, s);
        }
        out
    }
}

/// `P_{0_k}`.
pub fn reduced_p0(spec: &SystemSpec, order: ProperOrder) -> TessarineMatrix {
    reduce_covariance(&spec.p0, spec.n, order)
}

/// Stacked augmented vector `[ȳ^{(1)}; …; ȳ^{(R)}]`.
pub fn stacked_augmented(per_sensor: &[TessarineVector]) -> TessarineVector {
    TessarineVector::concat(&per_sensor.iter().map(|y| y.augment()).collect::<Vec<_>>())
}

/// `y_k(t) = Δ_k y⃗(t)`: the first `kn` augmented entries of every sensor.
pub fn reduce_observation(y_full: &TessarineVector, n: usize, k: usize) -> Result<TessarineVector> {
    let order = ProperOrder::from_k(k)?;
    let d = PARTS * n;
    if !y_full.len().is_multiple_of(d) || y_full.is_empty() {
        return Err(Error::dimension(
            "stacked augmented observation",
            (d, 1),
            (y_full.len(), 1),
        ));
    }
    let kn = order.k() * n;
    let sensors = y_full.len() / d;
    Ok(TessarineVector(
        (0..sensors)
            .flat_map(|i| y_full.as_slice()[i * d..i * d + kn].to_vec())
            .collect(),
    ))
}

/// Reduced observation straight from per-sensor vectors.
pub fn reduced_from_sensors(per_sensor: &[TessarineVector], order: ProperOrder) -> TessarineVector {
    let parts: Vec<TessarineVector> = per_sensor
        .iter()
        .map(|y| match order {
            ProperOrder::T1 => y.clone(),
            ProperOrder::T2 => TessarineVector::concat(&[y.clone(), y.conjugate(Conjugation::Star)]),
        })
        .collect();
    TessarineVector::concat(&parts)
}

/// Augmented pseudo-covariance of `x̄(0)`.
pub fn augmented_p0(spec: &SystemSpec) -> TessarineMatrix {
    augmented_covariance(&spec.p0, spec.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets_for_tests::tiny_spec;
    use crate::structural::t_matrix;
    use crate::tessarine::Tessarine;
    use proptest::prelude::*;

    fn tmat(n: usize) -> impl Strategy<Value = TessarineMatrix> {
        prop::collection::vec(prop::array::uniform4(-1.0f64..1.0), n * n).prop_map(move |v| {
            TessarineMatrix::from_row_major(n, n, v.into_iter().map(Tessarine::from_parts).collect()).unwrap()
        })
    }

    #[test]
    fn proper_phi_is_block_diagonal() {
        let spec = tiny_spec();
        let phi = build_stacked_phi(&spec, 0);
        let f1 = spec.f[0].at(0);
        let want = TessarineMatrix::block_diag(&[
            f1.clone(),
            f1.conjugate(Conjugation::Star),
            f1.conjugate(Conjugation::Eta),
            f1.conjugate(Conjugation::EtaPP),
        ]);
        assert_eq!(phi, want);
    }

    proptest! {
        #[test]
        fn stacked_phi_reproduces_real_dynamics(
            fs in prop::collection::vec(tmat(2), 4),
            xs in prop::collection::vec(prop::array::uniform4(-2.0f64..2.0), 2),
        ) {
            let mut spec = tiny_spec();
            spec.n = 2;
            for (j, f) in fs.iter().enumerate() {
                spec.f[j] = f.clone().into();
            }
            let x = TessarineVector(xs.into_iter().map(Tessarine::from_parts).collect());
            // direct tessarine propagation
            let mut next = &fs[0] * &x;
            next = &next + &(&fs[1] * &x.conjugate(Conjugation::Star));
            next = &next + &(&fs[2] * &x.conjugate(Conjugation::Eta));
            next = &next + &(&fs[3] * &x.conjugate(Conjugation::EtaPP));
            let phi = build_stacked_phi(&spec, 0);
            prop_assert!((&phi * &x.augment()).max_abs_diff(&next.augment()) <= 1e-12);
            // block (2,3) is F4*
            prop_assert_eq!(phi.block(2, 4, 2, 2), fs[3].conjugate(Conjugation::Star));
            let real = spec.real_transition(0) * x.real_vector();
            prop_assert!((real - next.real_vector()).amax() <= 1e-12);
            // Φ̄ = 𝒯 Φ^r 𝒯ᴴ
            let t = t_matrix(2);
            let via_t = &(&t * &TessarineMatrix::from_real(&spec.real_transition(0))) * &t.hermitian();
            prop_assert!(via_t.max_abs_diff(&phi) <= 1e-12);
        }
    }

    #[test]
    fn reduce_observation_n1_k2() {
        let y = TessarineVector(vec![
            Tessarine::new(1.0, 2.0, 3.0, 4.0),
            Tessarine::new(-1.0, 0.5, 0.0, 2.0),
        ]);
        let full = stacked_augmented(&[y.segment(0, 1), y.segment(1, 1)]);
        let red = reduce_observation(&full, 1, 2).unwrap();
        assert_eq!(red.len(), 4);
        assert_eq!(red[0], y[0]);
        assert_eq!(red[1], y[0].star());
        assert_eq!(red[2], y[1]);
        assert_eq!(red[3], y[1].star());
        let k1 = reduce_observation(&full, 1, 1).unwrap();
        assert_eq!(k1, y);
        assert_eq!(
            red,
            reduced_from_sensors(&[y.segment(0, 1), y.segment(1, 1)], ProperOrder::T2)
        );
    }

    #[test]
    fn reduce_observation_matches_delta() {
        let s = crate::structural::build_structural(2, 2, 2).unwrap();
        let v = TessarineVector(
            (0..16)
                .map(|i| Tessarine::new(i as f64, 1.0, -(i as f64), 0.5))
                .collect(),
        );
        assert_eq!(reduce_observation(&v, 2, 2).unwrap(), &s.delta_k * &v);
    }

    #[test]
    fn reduced_phi_rejects_improper() {
        let mut spec = tiny_spec();
        spec.f[1] = TessarineMatrix::scalar(Tessarine::real(0.1)).into();
        assert!(reduced_phi(&spec, 0, 1).is_err());
        let phi2 = reduced_phi(&spec, 0, 2).unwrap();
        assert_eq!(phi2[(1, 0)], Tessarine::real(0.1));
        assert_eq!(phi2, build_stacked_phi(&spec, 0).block(0, 0, 2, 2));
    }
}
