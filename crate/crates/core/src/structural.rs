//! Fixed structural matrices that relate real, augmented and reduced
//! coordinates.
//!
//! Sensor stacks are sensor-major; inside each sensor block the real
//! coordinates are part-major, matching [`TessarineVector::real_vector`].
//!
//! [`TessarineVector::real_vector`]: crate::matrix::TessarineVector::real_vector

use crate::error::{Error, Result};
use crate::matrix::TessarineMatrix;
use crate::tessarine::Tessarine;

/// Properness order used for dimension reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ProperOrder {
    T1,
    T2,
}

impl ProperOrder {
    pub fn from_k(k: usize) -> Result<Self> {
        match k {
            1 => Ok(ProperOrder::T1),
            2 => Ok(ProperOrder::T2),
            other => Err(Error::InvalidOrder(other)),
        }
    }

    pub fn k(self) -> usize {
        match self {
            ProperOrder::T1 => 1,
            ProperOrder::T2 => 2,
        }
    }
}

impl std::fmt::Display for ProperOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T{}", self.k())
    }
}

/// The 4×4 matrix `𝒜`; row `ν` maps `x^r` to the `ν`-th augmented block.
pub fn a_matrix() -> TessarineMatrix {
    let (one, e, ep, epp) = (Tessarine::ONE, Tessarine::ETA, Tessarine::ETA_P, Tessarine::ETA_PP);
    TessarineMatrix::from_row_major(
        4,
        4,
        vec![
            one, e, ep, epp, //
            one, -e, ep, -epp, //
            one, e, -ep, -epp, //
            one, -e, -ep, epp,
        ],
    )
    .expect("4x4")
}

/// First `k` rows of `𝒜`.
pub fn b_matrix(order: ProperOrder) -> TessarineMatrix {
    a_matrix().block(0, 0, order.k(), 4)
}

/// `𝒯 = ½ 𝒜 ⊗ I_n`.
pub fn t_matrix(n: usize) -> TessarineMatrix {
    a_matrix().kron_identity(n).scale(0.5)
}

/// `𝒯_k = ½ ℬ_k ⊗ I_n`, the first `kn` rows of `𝒯`.
pub fn tk_matrix(n: usize, order: ProperOrder) -> TessarineMatrix {
    b_matrix(order).kron_identity(n).scale(0.5)
}

#[derive(Clone, Debug)]
pub struct StructuralMatrices {
    pub n: usize,
    pub sensors: usize,
    pub order: ProperOrder,
    pub t: TessarineMatrix,
    pub a: TessarineMatrix,
    pub bk: TessarineMatrix,
    pub tk: TessarineMatrix,
    /// `Υ = I_R ⊗ 𝒯`.
    pub upsilon: TessarineMatrix,
    /// `Υ_k = I_R ⊗ 𝒯_k`.
    pub upsilon_k: TessarineMatrix,
    /// `Δ_k = I_R ⊗ [I_kn, 0]`.
    pub delta_k: TessarineMatrix,
    /// `𝒞 = 1_R ⊗ I_4n`.
    pub c: TessarineMatrix,
    /// `𝒞_k = 1_R ⊗ I_kn`.
    pub ck: TessarineMatrix,
}

pub fn build_structural(n: usize, sensors: usize, k: usize) -> Result<StructuralMatrices> {
    let order = ProperOrder::from_k(k)?;
    if n == 0 || sensors == 0 {
        return Err(Error::Config(format!(
            "structural matrices need n >= 1 and R >= 1 (got n={n}, R={sensors})"
        )));
    }
    let t = t_matrix(n);
    let tk = tk_matrix(n, order);
    let mut selector = TessarineMatrix::zeros(k * n, 4 * n);
    for i in 0..k * n {
        selector[(i, i)] = Tessarine::ONE;
    }
    let ones = TessarineMatrix::from_fn(sensors, 1, |_, _| Tessarine::ONE);
    Ok(StructuralMatrices {
        n,
        sensors,
        order,
        upsilon: t.identity_kron(sensors),
        upsilon_k: tk.identity_kron(sensors),
        delta_k: selector.identity_kron(sensors),
        c: ones.kron_identity(4 * n),
        ck: ones.kron_identity(k * n),
        a: a_matrix(),
        bk: b_matrix(order),
        t,
        tk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::TessarineVector;
    use proptest::prelude::*;

    #[test]
    fn t_is_unitary() {
        for n in 1..=3 {
            let t = t_matrix(n);
            let id = &t.hermitian() * &t;
            assert!(id.max_abs_diff(&TessarineMatrix::identity(4 * n)) <= 1e-12);
        }
    }

    #[test]
    fn b2_rows() {
        let b = b_matrix(ProperOrder::T2);
        let want = [
            [Tessarine::ONE, Tessarine::ETA, Tessarine::ETA_P, Tessarine::ETA_PP],
            [Tessarine::ONE, -Tessarine::ETA, Tessarine::ETA_P, -Tessarine::ETA_PP],
        ];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert_eq!(b[(i, j)], *w);
            }
        }
    }

    #[test]
    fn delta_selects_leading_block_per_sensor() {
        let s = build_structural(2, 3, 1).unwrap();
        let v = TessarineVector((0..24).map(|i| Tessarine::real(i as f64)).collect());
        let out = &s.delta_k * &v;
        let want: Vec<f64> = vec![0.0, 1.0, 8.0, 9.0, 16.0, 17.0];
        assert_eq!(out.iter().map(|t| t.r).collect::<Vec<_>>(), want);
    }

    #[test]
    fn invalid_order() {
        assert!(matches!(build_structural(1, 1, 3), Err(Error::InvalidOrder(3))));
    }

    #[test]
    fn kronecker_identities() {
        let s = build_structural(2, 3, 2).unwrap();
        assert_eq!(s.upsilon.shape(), (24, 24));
        assert_eq!(s.upsilon_k.shape(), (12, 24));
        assert_eq!(s.delta_k.shape(), (12, 24));
        assert_eq!(s.c.shape(), (24, 8));
        assert_eq!(s.ck.shape(), (12, 4));
        // 𝒯_k is the leading block of 𝒯 and Υ_k = Δ_k Υ.
        assert_eq!(s.tk, s.t.block(0, 0, 4, 8));
        assert!((&s.delta_k * &s.upsilon).max_abs_diff(&s.upsilon_k) == 0.0);
    }

    proptest! {
        #[test]
        fn augment_is_twice_t_times_real(v in prop::collection::vec(prop::array::uniform4(-5.0f64..5.0), 1..4)) {
            let x = TessarineVector(v.into_iter().map(Tessarine::from_parts).collect());
            let t = t_matrix(x.len());
            let real = TessarineVector(x.real_vector().iter().map(|r| Tessarine::real(*r)).collect());
            let lhs = x.augment();
            let rhs = (&t * &real).scale(2.0);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
            // 𝒯ᴴ x̄ = 2 x^r
            let back = &t.hermitian() * &lhs;
            prop_assert!(back.max_abs_diff(&real.scale(2.0)) <= 1e-12);
        }

        #[test]
        fn star_product_augment_identity(
            xs in prop::collection::vec(prop::array::uniform4(-3.0f64..3.0), 2),
            ys in prop::collection::vec(prop::array::uniform4(-3.0f64..3.0), 2),
        ) {
            let x = TessarineVector(xs.into_iter().map(Tessarine::from_parts).collect());
            let y = TessarineVector(ys.into_iter().map(Tessarine::from_parts).collect());
            let t = t_matrix(2);
            let dx_diag = TessarineMatrix::diagonal(
                &x.real_vector().iter().map(|r| Tessarine::real(*r)).collect::<Vec<_>>(),
            );
            let dx = &(&t * &dx_diag) * &t.hermitian();
            let lhs = x.star_product(&y).unwrap().augment();
            let rhs = &dx * &y.augment();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }
    }
}
