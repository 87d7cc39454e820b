//! Tessarine scalars.
//!
//! A tessarine is `r + η e + η' ep + η'' epp` with the commutative table
//! `η η' = η''`, `η' η'' = η`, `η'' η = -η'`, `η² = η''² = -1`, `η'² = 1`.
//!
//! The algebra is isomorphic to `C ⊕ C` through the idempotents
//! `(1 ± η')/2`; [`Tessarine::split`] exposes that pair and is what the
//! matrix inverse routines use.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::{Complex, Matrix4};

/// The four real parts of a hypercomplex scalar, in the order `r, η, η', η''`.
pub const PARTS: usize = 4;

/// Sign patterns of the three tessarine conjugations on `(r, η, η', η'')`.
pub const STAR_SIGNS: [f64; 4] = [1.0, -1.0, 1.0, -1.0];
pub const ETA_SIGNS: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
pub const ETA_PP_SIGNS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// One of the three involutions used to build augmented vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Conjugation {
    /// `x*`: negates the η and η'' parts.
    Star,
    /// `x^η`: negates the η' and η'' parts.
    Eta,
    /// `x^η''`: negates the η and η' parts.
    EtaPP,
}

impl Conjugation {
    pub fn signs(self) -> [f64; 4] {
        match self {
            Conjugation::Star => STAR_SIGNS,
            Conjugation::Eta => ETA_SIGNS,
            Conjugation::EtaPP => ETA_PP_SIGNS,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tessarine {
    pub r: f64,
    pub e: f64,
    pub ep: f64,
    pub epp: f64,
}

impl Tessarine {
    pub const ZERO: Tessarine = Tessarine::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Tessarine = Tessarine::new(1.0, 0.0, 0.0, 0.0);
    pub const ETA: Tessarine = Tessarine::new(0.0, 1.0, 0.0, 0.0);
    pub const ETA_P: Tessarine = Tessarine::new(0.0, 0.0, 1.0, 0.0);
    pub const ETA_PP: Tessarine = Tessarine::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(r: f64, e: f64, ep: f64, epp: f64) -> Self {
        Tessarine { r, e, ep, epp }
    }

    pub const fn real(r: f64) -> Self {
        Tessarine::new(r, 0.0, 0.0, 0.0)
    }

    pub fn from_parts(p: [f64; 4]) -> Self {
        Tessarine::new(p[0], p[1], p[2], p[3])
    }

    pub fn parts(&self) -> [f64; 4] {
        [self.r, self.e, self.ep, self.epp]
    }

    pub fn part(&self, idx: usize) -> f64 {
        self.parts()[idx]
    }

    /// The basis unit with index `0..4` in the order `1, η, η', η''`.
    pub fn unit(idx: usize) -> Self {
        let mut p = [0.0; 4];
        p[idx] = 1.0;
        Tessarine::from_parts(p)
    }

    pub fn conj(&self, kind: Conjugation) -> Self {
        self.with_signs(kind.signs())
    }

    /// Tessarine conjugate `x*`.
    pub fn star(&self) -> Self {
        self.conj(Conjugation::Star)
    }

    pub(crate) fn with_signs(&self, s: [f64; 4]) -> Self {
        Tessarine::new(self.r * s[0], self.e * s[1], self.ep * s[2], self.epp * s[3])
    }

    pub fn scale(&self, k: f64) -> Self {
        Tessarine::new(self.r * k, self.e * k, self.ep * k, self.epp * k)
    }

    /// Part-wise (Hadamard) product, the scalar form of the `⋆` product.
    pub fn star_product(&self, other: &Tessarine) -> Self {
        Tessarine::new(
            self.r * other.r,
            self.e * other.e,
            self.ep * other.ep,
            self.epp * other.epp,
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.r.abs().max(self.e.abs()).max(self.ep.abs()).max(self.epp.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.e.is_finite() && self.ep.is_finite() && self.epp.is_finite()
    }

    /// Matrix `L` with `(self · b)^r = L b^r` for every tessarine `b`.
    pub fn left_mul_matrix(&self) -> Matrix4<f64> {
        let (r, e, p, q) = (self.r, self.e, self.ep, self.epp);
        Matrix4::new(
            r, -e, p, -q, //
            e, r, q, p, //
            p, -q, r, -e, //
            q, p, e, r,
        )
    }

    /// Idempotent decomposition `x = c1 (1+η')/2 + c2 (1-η')/2`.
    pub fn split(&self) -> (Complex<f64>, Complex<f64>) {
        (
            Complex::new(self.r + self.ep, self.e + self.epp),
            Complex::new(self.r - self.ep, self.e - self.epp),
        )
    }

    pub fn from_split(c1: Complex<f64>, c2: Complex<f64>) -> Self {
        Tessarine::new(
            0.5 * (c1.re + c2.re),
            0.5 * (c1.im + c2.im),
            0.5 * (c1.re - c2.re),
            0.5 * (c1.im - c2.im),
        )
    }
}

impl Add for Tessarine {
    type Output = Tessarine;
    fn add(self, o: Tessarine) -> Tessarine {
        Tessarine::new(self.r + o.r, self.e + o.e, self.ep + o.ep, self.epp + o.epp)
    }
}

impl AddAssign for Tessarine {
    fn add_assign(&mut self, o: Tessarine) {
        *self = *self + o;
    }
}

impl Sub for Tessarine {
    type Output = Tessarine;
    fn sub(self, o: Tessarine) -> Tessarine {
        Tessarine::new(self.r - o.r, self.e - o.e, self.ep - o.ep, self.epp - o.epp)
    }
}

impl SubAssign for Tessarine {
    fn sub_assign(&mut self, o: Tessarine) {
        *self = *self - o;
    }
}

impl Neg for Tessarine {
    type Output = Tessarine;
    fn neg(self) -> Tessarine {
        self.scale(-1.0)
    }
}

impl Mul for Tessarine {
    type Output = Tessarine;
    #[inline]
    fn mul(self, b: Tessarine) -> Tessarine {
        let a = self;
        Tessarine::new(
            a.r * b.r - a.e * b.e + a.ep * b.ep - a.epp * b.epp,
            a.r * b.e + a.e * b.r + a.ep * b.epp + a.epp * b.ep,
            a.r * b.ep + a.ep * b.r - a.e * b.epp - a.epp * b.e,
            a.r * b.epp + a.epp * b.r + a.e * b.ep + a.ep * b.e,
        )
    }
}

impl MulAssign for Tessarine {
    fn mul_assign(&mut self, o: Tessarine) {
        *self = *self * o;
    }
}

impl Mul<f64> for Tessarine {
    type Output = Tessarine;
    fn mul(self, k: f64) -> Tessarine {
        self.scale(k)
    }
}

impl From<f64> for Tessarine {
    fn from(r: f64) -> Self {
        Tessarine::real(r)
    }
}

impl fmt::Display for Tessarine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}η{:+}η'{:+}η''", self.r, self.e, self.ep, self.epp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector4;
    use proptest::prelude::*;

    const ETA: Tessarine = Tessarine::ETA;
    const ETA_P: Tessarine = Tessarine::ETA_P;
    const ETA_PP: Tessarine = Tessarine::ETA_PP;

    #[test]
    fn multiplication_table() {
        assert_eq!(ETA * ETA_P, ETA_PP);
        assert_eq!(ETA_P * ETA_PP, ETA);
        assert_eq!(ETA_PP * ETA, -ETA_P);
        assert_eq!(ETA * ETA, -Tessarine::ONE);
        assert_eq!(ETA_PP * ETA_PP, -Tessarine::ONE);
        assert_eq!(ETA_P * ETA_P, Tessarine::ONE);
    }

    #[test]
    fn zero_divisor() {
        let a = Tessarine::ONE + ETA_P;
        let b = Tessarine::ONE - ETA_P;
        assert_eq!(a * b, Tessarine::ZERO);
    }

    #[test]
    fn star_of_all_ones() {
        let x = Tessarine::new(1.0, 1.0, 1.0, 1.0);
        assert_eq!(x.star(), Tessarine::new(1.0, -1.0, 1.0, -1.0));
    }

    fn tess() -> impl Strategy<Value = Tessarine> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Tessarine::from_parts)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn commutative_and_associative(a in tess(), b in tess(), c in tess()) {
            prop_assert!((a * b - b * a).max_abs() <= 1e-12);
            prop_assert!(((a * b) * c - a * (b * c)).max_abs() <= 1e-12 * (1.0 + (a*b*c).max_abs()));
        }

        #[test]
        fn product_matches_left_multiplication(a in tess(), b in tess()) {
            // The oracle expands the table entry by entry.
            let table = |i: usize, j: usize| -> [f64; 4] {
                // unit_i * unit_j from the defining relations
                let t: [[(f64, usize); 4]; 4] = [
                    [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
                    [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
                    [(1.0, 2), (1.0, 3), (1.0, 0), (1.0, 1)],
                    [(1.0, 3), (-1.0, 2), (1.0, 1), (-1.0, 0)],
                ];
                let (s, k) = t[i][j];
                let mut out = [0.0; 4];
                out[k] = s;
                out
            };
            let mut expanded = [0.0; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let u = table(i, j);
                    for k in 0..4 {
                        expanded[k] += a.part(i) * b.part(j) * u[k];
                    }
                }
            }
            let via_matrix = a.left_mul_matrix() * Vector4::from(b.parts());
            let prod = a * b;
            for k in 0..4 {
                prop_assert!((prod.part(k) - expanded[k]).abs() <= 1e-12);
                prop_assert!((prod.part(k) - via_matrix[k]).abs() <= 1e-12);
            }
        }

        #[test]
        fn split_is_multiplicative(a in tess(), b in tess()) {
            let (a1, a2) = a.split();
            let (b1, b2) = b.split();
            let back = Tessarine::from_split(a1 * b1, a2 * b2);
            prop_assert!((back - a * b).max_abs() <= 1e-10);
            prop_assert!((Tessarine::from_split(a1, a2) - a).max_abs() <= 1e-14);
            let (s1, s2) = a.star().split();
            prop_assert!((s1 - a1.conj()).norm() <= 1e-14 && (s2 - a2.conj()).norm() <= 1e-14);
        }

        #[test]
        fn conjugations_compose(a in tess()) {
            prop_assert_eq!(a.star().star(), a);
            prop_assert_eq!(a.conj(Conjugation::Eta).conj(Conjugation::EtaPP), a.star());
            prop_assert_eq!(a.conj(Conjugation::EtaPP).conj(Conjugation::Eta), a.star());
        }

        #[test]
        fn star_transposes_left_multiplication(a in tess()) {
            prop_assert_eq!(a.star().left_mul_matrix(), a.left_mul_matrix().transpose());
        }
    }
}
