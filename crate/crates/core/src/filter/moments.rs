//! Second-order moments of the real state and stacked observations.
//!
//! These are the real-coordinate images of the `Γ_x̄`, `Γ_x̄ȳ` and `Γ_ȳ`
//! recursions: `Γ_x̄ = 4𝒯 C_x 𝒯ᴴ`, `Γ_x̄ȳ = 4𝒯 C_xy Υᴴ`, `Γ_ȳ = 4Υ C_y Υᴴ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BernoulliMoments, SystemSpec};
use crate::tessarine::PARTS;

/// Values of a model quantity over `t = 0..=horizon`, stored once when constant.
#[derive(Clone, Debug)]
pub struct Series<T> {
    values: Vec<T>,
}

impl<T> Series<T> {
    pub fn build(constant: bool, horizon: usize, f: impl Fn(usize) -> Result<T>) -> Result<Self> {
        let values = if constant {
            vec![f(1)?]
        } else {
            (0..=horizon).map(f).collect::<Result<Vec<_>>>()?
        };
        Ok(Series { values })
    }

    pub fn get(&self, t: usize) -> Result<&T> {
        if self.values.len() == 1 {
            return Ok(&self.values[0]);
        }
        self.values.get(t).ok_or_else(|| {
            Error::Config(format!(
                "time step {t} is beyond the configured horizon {}",
                self.values.len() - 1
            ))
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Real model matrices, precomputed per time step.
#[derive(Clone, Debug)]
pub struct ModelTables {
    pub n: usize,
    pub sensors: usize,
    pub horizon: usize,
    /// `Φ^r(t)`.
    pub phi: Series<DMatrix<f64>>,
    pub q: Series<DMatrix<f64>>,
    /// `R⃗^r(t) = diag(R^{(i)}(t))`.
    pub r: Series<DMatrix<f64>>,
    /// `S⃗^r(t) = [S^{(1)}(t), …, S^{(R)}(t)]`.
    pub s: Series<DMatrix<f64>>,
    /// Bernoulli moments of the nominal probabilities `p(t)`.
    pub gamma: Series<BernoulliMoments>,
    pub p0: DMatrix<f64>,
}

impl ModelTables {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        spec.validate()?;
        let h = spec.horizon;
        let fc = spec.f.iter().all(|f| f.is_constant());
        let nc = spec.q.is_constant();
        let rc = spec.r.iter().all(|m| m.is_constant());
        let sc = spec.s.iter().all(|m| m.is_constant());
        Ok(ModelTables {
            n: spec.n,
            sensors: spec.sensors,
            horizon: h,
            phi: Series::build(fc, h, |t| Ok(spec.real_transition(t)))?,
            q: Series::build(nc, h, |t| Ok(spec.q.at(t)))?,
            r: Series::build(rc, h, |t| {
                Ok(linalg::block_diag(&spec.r.iter().map(|m| m.at(t)).collect::<Vec<_>>()))
            })?,
            s: Series::build(sc, h, |t| {
                let blocks: Vec<DMatrix<f64>> = spec.s.iter().map(|m| m.at(t)).collect();
                let d = PARTS * spec.n;
                let mut out = DMatrix::zeros(d, d * blocks.len());
                for (i, b) in blocks.iter().enumerate() {
                    out.view_mut((0, i * d), (d, d)).copy_from(b);
                }
                Ok(out)
            })?,
            gamma: Series::build(spec.dropout.is_constant(), h, |t| {
                BernoulliMoments::new(&spec.dropout.at(t))
            })?,
            p0: spec.p0.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        PARTS * self.n
    }

    pub fn obs_dim(&self) -> usize {
        PARTS * self.n * self.sensors
    }

    /// Probabilities governing `y(t)`; all ones at `t = 1`.
    pub fn effective_p(&self, t: usize) -> Result<Vec<f64>> {
        if t <= 1 {
            Ok(vec![1.0; self.obs_dim()])
        } else {
            Ok(self.gamma.get(t)?.p.clone())
        }
    }
}

/// `𝒞 A`: `R` vertical copies of `A`.
pub fn tile_rows(a: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(r * copies, c);
    for i in 0..copies {
        out.view_mut((i * r, 0), (r, c)).copy_from(a);
    }
    out
}

/// `𝒞 A 𝒞ᵀ`: an `R × R` tiling of `A`.
pub fn tile_square(a: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(r * copies, c * copies);
    for i in 0..copies {
        for j in 0..copies {
            out.view_mut((i * r, j * c), (r, c)).copy_from(a);
        }
    }
    out
}

/// `A 𝒞ᵀ`: `R` horizontal copies of `A`.
pub fn tile_cols(a: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(r, c * copies);
    for i in 0..copies {
        out.view_mut((0, i * c), (r, c)).copy_from(a);
    }
    out
}

fn scale_cols(a: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = a.clone();
    for (j, s) in w.iter().enumerate() {
        out.column_mut(j).scale_mut(*s);
    }
    out
}

/// Moments right after observation time `t`.
#[derive(Clone, Debug)]
pub struct Moments {
    pub t: usize,
    /// `Cov(x^r(t))`.
    pub cx: DMatrix<f64>,
    /// `Cov(x^r(t), y⃗^r(t))`.
    pub cxy: DMatrix<f64>,
    /// `Cov(y⃗^r(t))`.
    pub cy: DMatrix<f64>,
}

/// What the innovation covariance needs at `t ≥ 2`.
#[derive(Clone, Debug)]
pub struct InnovationTerms {
    /// `Cov(x^r(t), y⃗^r(t-1))`.
    pub g: DMatrix<f64>,
    /// `𝒞 C_x 𝒞ᵀ`, `𝒞 G` and `C_y(t-1)`; the `Ψ` matrices of the tessarine recursion are four times these.
    pub cxc: DMatrix<f64>,
    pub cg: DMatrix<f64>,
    pub cy_prev: DMatrix<f64>,
    /// `Cov(γ)∘(𝒞C_x𝒞ᵀ − 𝒞G − (𝒞G)ᵀ + C_y(t−1)) + E[γγᵀ]∘R⃗^r`.
    pub m: DMatrix<f64>,
}

/// `C_x(t+1) = Φ^r(t) C_x(t) Φ^r(t)ᵀ + Q(t)`.
pub fn propagate_state(tables: &ModelTables, cx: &DMatrix<f64>, t: usize) -> Result<DMatrix<f64>> {
    let phi = tables.phi.get(t)?;
    Ok(linalg::symmetrize(&(phi * cx * phi.transpose() + tables.q.get(t)?)))
}

/// First observation: `C_y(1) = 𝒞C_x𝒞ᵀ + R⃗`, `C_xy(1) = C_x 𝒞ᵀ`.
pub fn first_moments(tables: &ModelTables, cx1: &DMatrix<f64>) -> Result<Moments> {
    let m = tables.sensors;
    Ok(Moments {
        t: 1,
        cx: cx1.clone(),
        cxy: tile_cols(cx1, m),
        cy: linalg::symmetrize(&(tile_square(cx1, m) + tables.r.get(1)?)),
    })
}

/// Terms of the innovation covariance at `t = prev.t + 1` from `C_x(t)`.
pub fn innovation_terms(tables: &ModelTables, prev: &Moments, cx: &DMatrix<f64>) -> Result<InnovationTerms> {
    let t = prev.t + 1;
    let m = tables.sensors;
    let p_prev = tables.effective_p(prev.t)?;
    let g = tables.phi.get(prev.t)? * &prev.cxy + scale_cols(tables.s.get(prev.t)?, &p_prev);
    let cxc = tile_square(cx, m);
    let cg = tile_rows(&g, m);
    let gm = tables.gamma.get(t)?;
    let inner = &cxc - &cg - cg.transpose() + &prev.cy;
    let mm = gm.cov.component_mul(&inner) + gm.second.component_mul(tables.r.get(t)?);
    Ok(InnovationTerms {
        g,
        cxc,
        cg,
        cy_prev: prev.cy.clone(),
        m: linalg::symmetrize(&mm),
    })
}

/// Observation moments at `t ≥ 2`.
pub fn advance_moments(tables: &ModelTables, terms: &InnovationTerms, cx: &DMatrix<f64>, t: usize) -> Result<Moments> {
    let gm = tables.gamma.get(t)?;
    let r = tables.r.get(t)?;
    let cross = gm.cross_one_minus.component_mul(&terms.cg);
    let cy = gm.second.component_mul(&(&terms.cxc + r))
        + &cross
        + cross.transpose()
        + gm.one_minus_second.component_mul(&terms.cy_prev);
    let m = tables.sensors;
    let p = &gm.p;
    let one_minus: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
    let cxy = scale_cols(&tile_cols(cx, m), p) + scale_cols(&terms.g, &one_minus);
    Ok(Moments {
        t,
        cx: cx.clone(),
        cxy,
        cy: linalg::symmetrize(&cy),
    })
}

/// Runs the moment recursion to `horizon`, returning the moments at each `t ≥ 1`.
pub fn moment_path(tables: &ModelTables, horizon: usize) -> Result<Vec<Moments>> {
    let mut out: Vec<Moments> = Vec::with_capacity(horizon);
    let mut cx = propagate_state(tables, &tables.p0, 0)?;
    for t in 1..=horizon {
        let mom = if t == 1 {
            first_moments(tables, &cx)?
        } else {
            let prev = out.last().expect("t >= 2");
            let terms = innovation_terms(tables, prev, &cx)?;
            advance_moments(tables, &terms, &cx, t)?
        };
        cx = propagate_state(tables, &mom.cx, t)?;
        out.push(mom);
    }
    Ok(out)
}
