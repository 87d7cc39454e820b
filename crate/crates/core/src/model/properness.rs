//! Tk-properness conditions on a [`SystemSpec`].

use nalgebra::DMatrix;

use super::spec::SystemSpec;
use crate::error::{Error, Result};
use crate::matrix::TessarineMatrix;
use crate::structural::{t_matrix, ProperOrder};
use crate::tessarine::PARTS;

/// Relative tolerance on pseudo-correlation blocks.
pub const PROPERNESS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PropernessCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropernessReport {
    pub order: ProperOrder,
    pub checks: Vec<PropernessCheck>,
}

impl PropernessReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn reasons(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect()
    }

    /// `Err(NotProper)` listing the failed checks.
    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::NotProper {
                order: self.order.k(),
                reasons: self.reasons(),
            })
        }
    }
}

impl std::fmt::Display for PropernessReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}-properness: {}",
            self.order,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {}: {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Augmented pseudo-correlation `4 𝒯 C 𝒯ᴴ` of a real (cross-)covariance.
pub fn augmented_covariance(c: &DMatrix<f64>, n: usize) -> TessarineMatrix {
    let t = t_matrix(n);
    (&(&t * &TessarineMatrix::from_real(c)) * &t.hermitian()).scale(4.0)
}

/// Indices `ν` of the blocks `Γ_{x x^ν}` that must vanish (1 = `*`, 2 = `η`, 3 = `η''`).
fn vanishing_blocks(order: ProperOrder) -> &'static [usize] {
    match order {
        ProperOrder::T1 => &[1, 2, 3],
        ProperOrder::T2 => &[2, 3],
    }
}

/// Largest pseudo-correlation that Tk-properness requires to vanish,
/// relative to the size of the whole augmented matrix.
pub fn properness_defect(c: &DMatrix<f64>, n: usize, order: ProperOrder) -> f64 {
    let g = augmented_covariance(c, n);
    let scale = g.max_abs().max(f64::MIN_POSITIVE);
    vanishing_blocks(order)
        .iter()
        .map(|&nu| g.block(0, nu * n, n, n).max_abs())
        .fold(0.0, f64::max)
        / scale
}

fn is_zero(m: &TessarineMatrix) -> bool {
    m.max_abs() == 0.0
}

pub fn validate_properness(spec: &SystemSpec, k: usize) -> Result<PropernessReport> {
    let order = ProperOrder::from_k(k)?;
    let n = spec.n;
    let d = PARTS * n;
    if spec.p0.shape() != (d, d) {
        return Err(Error::dimension("P0", (d, d), spec.p0.shape()));
    }
    let times: Vec<usize> = (0..=spec.horizon.max(1)).collect();
    let mut checks = Vec::new();

    let f_must_vanish: &[usize] = match order {
        ProperOrder::T1 => &[1, 2, 3],
        ProperOrder::T2 => &[2, 3],
    };
    for &j in f_must_vanish {
        let bad = times.iter().find(|&&t| !is_zero(&spec.f[j].at(t)));
        checks.push(PropernessCheck {
            name: format!("F{} zero", j + 1),
            passed: bad.is_none(),
            detail: match bad {
                None => "ok".into(),
                Some(t) => format!("F{} nonzero at t={t}", j + 1),
            },
        });
    }

    let mut cov_check = |name: String, mats: Vec<(usize, DMatrix<f64>)>| {
        let worst = mats
            .iter()
            .map(|(t, m)| (*t, properness_defect(m, n, order)))
            .fold((0usize, 0.0f64), |a, b| if b.1 > a.1 { b } else { a });
        checks.push(PropernessCheck {
            passed: worst.1 <= PROPERNESS_TOLERANCE,
            detail: format!("max relative pseudo-correlation {:.3e} (t={})", worst.1, worst.0),
            name,
        });
    };

    cov_check(format!("x(0) {order}-proper"), vec![(0, spec.p0.clone())]);
    cov_check(
        format!("u {order}-proper"),
        times.iter().map(|&t| (t, spec.q.at(t))).collect(),
    );
    for i in 0..spec.sensors {
        cov_check(
            format!("v^({}) {order}-proper", i + 1),
            times.iter().map(|&t| (t, spec.r[i].at(t))).collect(),
        );
        cov_check(
            format!("u, v^({}) cross {order}-proper", i + 1),
            times.iter().map(|&t| (t, spec.s[i].at(t))).collect(),
        );
    }

    // probability conditions
    let pairs: &[(usize, usize)] = match order {
        ProperOrder::T1 => &[(0, 1), (0, 2), (0, 3)],
        ProperOrder::T2 => &[(0, 2), (1, 3)],
    };
    let mut prob_issue = None;
    'outer: for &t in &times {
        let p = spec.dropout.at(t);
        for i in 0..spec.sensors {
            for j in 0..n {
                for &(a, b) in pairs {
                    let pa = p[spec.dropout.index(i, j, a)];
                    let pb = p[spec.dropout.index(i, j, b)];
                    if (pa - pb).abs() > PROPERNESS_TOLERANCE {
                        prob_issue = Some(format!(
                            "sensor {}, component {}: p[{}]={pa} differs from p[{}]={pb} at t={t}",
                            i + 1,
                            j + 1,
                            PART_NAMES[a],
                            PART_NAMES[b]
                        ));
                        break 'outer;
                    }
                }
            }
        }
    }
    checks.push(PropernessCheck {
        name: "dropout probabilities".into(),
        passed: prob_issue.is_none(),
        detail: prob_issue.unwrap_or_else(|| "ok".into()),
    });

    Ok(PropernessReport { order, checks })
}

pub const PART_NAMES: [&str; 4] = ["r", "η", "η'", "η''"];

#[cfg(test)]
mod tests {
    use super::*;

    fn structured(a: f64, b: f64, c: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 4, &[a, 0.0, c, 0.0, 0.0, b, 0.0, c, c, 0.0, a, 0.0, 0.0, c, 0.0, b])
    }

    #[test]
    fn structured_covariances() {
        assert!(properness_defect(&structured(1.0, 1.0, -0.5), 1, ProperOrder::T1) < 1e-12);
        let t2 = structured(1.0, 2.0, -0.5);
        assert!(properness_defect(&t2, 1, ProperOrder::T2) < 1e-12);
        assert!(properness_defect(&t2, 1, ProperOrder::T1) > 0.1);
        // a generic covariance is neither
        let g = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 0.3, 0.0, 0.1, 0.3, 1.0, 0.2, 0.0, 0.0, 0.2, 1.5, 0.0, 0.1, 0.0, 0.0, 1.0,
            ],
        );
        assert!(properness_defect(&g, 1, ProperOrder::T2) > 1e-3);
    }
}
