//! Tk-proper centralized fusion filter (k = 1, 2).

use nalgebra::DMatrix;

use super::moments::{self, ModelTables, Moments, Series};
use super::{invert, InversePolicy, PinvReport};
use crate::error::{Error, Result};
use crate::matrix::{TessarineMatrix, TessarineVector};
use crate::model::{
    pi_from_probs, reduce_covariance, reduced_from_sensors, reduced_phi_unchecked, stacked_augmented,
    validate_properness, ReducedStats, SystemSpec,
};
use crate::structural::{t_matrix, tk_matrix, ProperOrder};
use crate::tessarine::{Conjugation, PARTS};

/// `4 𝒯_k M_ij 𝒯_kᴴ` for every `4n × 4n` block of a real `4nR × 4nR` matrix.
pub fn reduce_blocks(m: &DMatrix<f64>, n: usize, order: ProperOrder) -> TessarineMatrix {
    let d = PARTS * n;
    let kn = order.k() * n;
    let sensors = m.nrows() / d;
    let tk = tk_matrix(n, order);
    let tkh = tk.hermitian().scale(4.0);
    let mut out = TessarineMatrix::zeros(kn * sensors, kn * sensors);
    for i in 0..sensors {
        for j in 0..sensors {
            let block = m.view((i * d, j * d), (d, d)).into_owned();
            out.set_block(i * kn, j * kn, &(&tk.mul_real(&block) * &tkh));
        }
    }
    out
}

/// Real error covariance `Cov(x̃^r)` from a reduced pseudo covariance `P_k`.
///
/// Under Tk-properness the augmented matrix is block diagonal in the
/// conjugates of `P_k`, and `C = ¼ 𝒯ᴴ P̄ 𝒯`.
pub fn real_error_covariance(p: &TessarineMatrix, n: usize, order: ProperOrder) -> DMatrix<f64> {
    let full = match order {
        ProperOrder::T1 => TessarineMatrix::block_diag(&[
            p.clone(),
            p.conjugate(Conjugation::Star),
            p.conjugate(Conjugation::Eta),
            p.conjugate(Conjugation::EtaPP),
        ]),
        ProperOrder::T2 => TessarineMatrix::block_diag(&[p.clone(), p.conjugate(Conjugation::Eta)]),
    };
    let t = t_matrix(n);
    let c = (&(&t.hermitian() * &full) * &t).scale(0.25);
    crate::linalg::symmetrize(&c.real_part())
}

/// `M x` for real `M` and tessarine `x`.
pub(crate) fn real_mat_vec(m: &DMatrix<f64>, x: &TessarineVector) -> TessarineVector {
    let mut out = TessarineVector::zeros(m.nrows());
    for i in 0..m.nrows() {
        for (j, xj) in x.iter().enumerate() {
            let w = m[(i, j)];
            if w != 0.0 {
                out.0[i] += xj.scale(w);
            }
        }
    }
    out
}

/// Model quantities for the reduced recursion, precomputed per time step.
#[derive(Clone, Debug)]
pub struct TkFilter {
    pub order: ProperOrder,
    pub n: usize,
    pub sensors: usize,
    pub tables: ModelTables,
    pub policy: InversePolicy,
    phi: Series<TessarineMatrix>,
    stats: Series<ReducedStats>,
    /// Nominal `Π_k(t)` (block diagonal).
    pi: Series<Vec<DMatrix<f64>>>,
}

/// Covariance part of the filter state: everything that does not depend on data.
#[derive(Clone, Debug)]
pub struct CovarianceState {
    pub t: usize,
    /// `P_k(t|t)`; zero before the first step.
    pub p_filt: TessarineMatrix,
    /// `P_k(t+1|t)`.
    pub p_pred: TessarineMatrix,
    /// Real moments at `t`; at `t = 0` only `cx = P0` is meaningful.
    pub moments: Moments,
    /// `Cov(x^r(t+1))`.
    pub cx_next: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct FilterState {
    pub cov: CovarianceState,
    /// `x̂_k(t|t)`.
    pub xhat_filt: TessarineVector,
    /// `x̂_k(t+1|t)`.
    pub xhat_pred: TessarineVector,
    /// `y_k(t)` (reduced) and `y⃗(t)` (stacked augmented).
    pub y_prev: TessarineVector,
    pub y_prev_stacked: TessarineVector,
}

impl FilterState {
    pub fn t(&self) -> usize {
        self.cov.t
    }

    /// `Γ_x̄(t,t)` in tessarine form.
    pub fn gamma_xbar(&self) -> TessarineMatrix {
        let t = t_matrix(self.cov.moments.cx.nrows() / PARTS);
        (&(&t * &TessarineMatrix::from_real(&self.cov.moments.cx)) * &t.hermitian()).scale(4.0)
    }

    /// `Γ_x̄ȳ(t,t)`; empty before the first step.
    pub fn gamma_xy(&self) -> TessarineMatrix {
        let c = &self.cov.moments.cxy;
        if c.is_empty() {
            return TessarineMatrix::zeros(0, 0);
        }
        let n = c.nrows() / PARTS;
        let sensors = c.ncols() / c.nrows();
        let t = t_matrix(n);
        let ups = t.identity_kron(sensors);
        (&(&t * &TessarineMatrix::from_real(c)) * &ups.hermitian()).scale(4.0)
    }

    /// `Γ_ȳ(t,t)`; empty before the first step.
    pub fn gamma_yy(&self) -> TessarineMatrix {
        let c = &self.cov.moments.cy;
        if c.is_empty() {
            return TessarineMatrix::zeros(0, 0);
        }
        let n = self.cov.moments.cx.nrows() / PARTS;
        let ups = t_matrix(n).identity_kron(c.nrows() / (PARTS * n));
        (&(&ups * &TessarineMatrix::from_real(c)) * &ups.hermitian()).scale(4.0)
    }
}

/// Data-independent quantities of one step.
#[derive(Clone, Debug)]
pub struct Gains {
    pub t: usize,
    /// `L_k(t)`.
    pub gain: TessarineMatrix,
    /// `H_k(t)`.
    pub noise_gain: TessarineMatrix,
    pub theta: TessarineMatrix,
    pub omega: TessarineMatrix,
    /// `Ψ₁, Ψ₂, Ψ₃` for `t ≥ 2`.
    pub psi: Option<[DMatrix<f64>; 3]>,
    /// `Π_k(t)`; identity at `t = 1`.
    pub pi: DMatrix<f64>,
    /// `Φ_k(t)`.
    pub phi: TessarineMatrix,
    pub pinv: PinvReport,
}

#[derive(Clone, Debug)]
pub struct StepOutput {
    pub gains: Gains,
    /// `ε_k(t)`.
    pub innovation: TessarineVector,
    /// `x̂^{T_k}(t|t)`.
    pub estimate: TessarineVector,
    /// `P^{T_k}(t|t)`.
    pub covariance: TessarineMatrix,
}

fn tile_tess_cols(a: &TessarineMatrix, copies: usize) -> TessarineMatrix {
    let (r, c) = a.shape();
    let mut out = TessarineMatrix::zeros(r, c * copies);
    for i in 0..copies {
        out.set_block(0, i * c, a);
    }
    out
}

impl TkFilter {
    /// Validates Tk-properness and precomputes the reduced model.
    pub fn new(spec: &SystemSpec, k: usize) -> Result<Self> {
        Self::with_policy(spec, k, InversePolicy::default())
    }

    pub fn with_policy(spec: &SystemSpec, k: usize, policy: InversePolicy) -> Result<Self> {
        let order = ProperOrder::from_k(k)?;
        let tables = ModelTables::new(spec)?;
        validate_properness(spec, k)?.into_result()?;
        let h = spec.horizon;
        let n = spec.n;
        let fc = spec.f.iter().all(|f| f.is_constant());
        let nc = spec.q.is_constant() && spec.r.iter().chain(spec.s.iter()).all(|m| m.is_constant());
        Ok(TkFilter {
            order,
            n,
            sensors: spec.sensors,
            policy,
            phi: Series::build(fc, h, |t| Ok(reduced_phi_unchecked(spec, t, order)))?,
            stats: Series::build(nc, h, |t| Ok(ReducedStats::at(spec, t, order)))?,
            pi: Series::build(spec.dropout.is_constant(), h, |t| {
                Ok(pi_from_probs(&spec.dropout.at(t), n, spec.sensors, order)?.pi_k)
            })?,
            tables,
        })
    }

    pub fn kn(&self) -> usize {
        self.order.k() * self.n
    }

    fn reduce(&self, c: &DMatrix<f64>) -> TessarineMatrix {
        reduce_covariance(c, self.n, self.order)
    }

    /// State before the first observation: `P_k(1|0) = D_k(1)`, zero estimates.
    pub fn init_filter(&self) -> Result<FilterState> {
        let kn = self.kn();
        let p0 = self.tables.p0.clone();
        let cx1 = moments::propagate_state(&self.tables, &p0, 0)?;
        let cov = CovarianceState {
            t: 0,
            p_filt: TessarineMatrix::zeros(kn, kn),
            p_pred: self.reduce(&cx1),
            moments: Moments {
                t: 0,
                cx: p0,
                cxy: DMatrix::zeros(0, 0),
                cy: DMatrix::zeros(0, 0),
            },
            cx_next: cx1,
        };
        Ok(FilterState {
            cov,
            xhat_filt: TessarineVector::zeros(kn),
            xhat_pred: TessarineVector::zeros(kn),
            y_prev: TessarineVector::zeros(kn * self.sensors),
            y_prev_stacked: TessarineVector::zeros(PARTS * self.n * self.sensors),
        })
    }

    /// Advances the covariance recursion from `t-1` to `t`.
    pub fn covariance_step(&self, cov: &CovarianceState) -> Result<(CovarianceState, Gains)> {
        let t = cov.t + 1;
        let kn = self.kn();
        let m = self.sensors;
        let cx = cov.cx_next.clone();
        let p = &cov.p_pred;
        let stats = self.stats.get(t)?;
        let phi = self.phi.get(t)?.clone();

        let (omega, theta, pi, psi, mom) = if t == 1 {
            let mom = moments::first_moments(&self.tables, &cx)?;
            let omega = reduce_blocks(&mom.cy, self.n, self.order);
            let theta = tile_tess_cols(p, m);
            (omega, theta, DMatrix::identity(kn * m, kn * m), None, mom)
        } else {
            let pis = self.pi.get(t)?;
            let terms = moments::innovation_terms(&self.tables, &cov.moments, &cx)?;
            let mut omega = reduce_blocks(&terms.m, self.n, self.order);
            let p_pi: Vec<TessarineMatrix> = pis.iter().map(|b| p.mul_real(b)).collect();
            for i in 0..m {
                for j in 0..m {
                    let add = TessarineMatrix::real_mul(&pis[i], &p_pi[j]);
                    let cur = omega.block(i * kn, j * kn, kn, kn);
                    omega.set_block(i * kn, j * kn, &(&cur + &add));
                }
            }
            let mut theta = TessarineMatrix::zeros(kn, kn * m);
            for (j, b) in p_pi.iter().enumerate() {
                theta.set_block(0, j * kn, b);
            }
            let mom = moments::advance_moments(&self.tables, &terms, &cx, t)?;
            let psi = [&terms.cxc * 4.0, &terms.cg * 4.0, &terms.cy_prev * 4.0];
            (omega, theta, crate::linalg::block_diag(pis), Some(psi), mom)
        };
        let omega = omega.hermitian_part();
        let (inv, pinv) = invert(&omega, self.policy, t)?;

        let gain = &theta * &inv;
        let mut s_pi = stats.s_row();
        if t > 1 {
            s_pi = s_pi.mul_real(&pi);
        }
        let noise_gain = &s_pi * &inv;

        let p_filt = (p - &(&gain * &theta.hermitian())).hermitian_part();
        let phih = phi.hermitian();
        let phi_theta_h = &(&phi * &theta) * &noise_gain.hermitian();
        let p_pred = &(&(&phi * &p_filt) * &phih) - &phi_theta_h;
        let p_pred = &p_pred - &phi_theta_h.hermitian();
        let p_pred = &p_pred - &(&(&noise_gain * &omega) * &noise_gain.hermitian());
        let p_pred = (&p_pred + &stats.q).hermitian_part();

        let cx_next = moments::propagate_state(&self.tables, &cx, t)?;
        let next = CovarianceState {
            t,
            p_filt,
            p_pred,
            moments: mom,
            cx_next,
        };
        let gains = Gains {
            t,
            gain,
            noise_gain,
            theta,
            omega,
            psi,
            pi,
            phi,
            pinv,
        };
        Ok((next, gains))
    }

    /// Estimate update given precomputed gains: returns `(ε, x̂(t|t), x̂(t+1|t))`.
    pub fn apply_gains(
        &self,
        gains: &Gains,
        xhat_pred: &TessarineVector,
        y: &TessarineVector,
        y_prev: &TessarineVector,
    ) -> (TessarineVector, TessarineVector, TessarineVector) {
        let eps = if gains.t == 1 {
            y.clone()
        } else {
            let kn = self.kn();
            // Π_k 𝒞_k x̂ + (I − Π_k) y_prev, blockwise
            let mut pred = TessarineVector::zeros(kn * self.sensors);
            for i in 0..self.sensors {
                let pb = gains.pi.view((i * kn, i * kn), (kn, kn)).into_owned();
                let yb = y_prev.segment(i * kn, kn);
                let a = real_mat_vec(&pb, &(xhat_pred - &yb));
                let b = &yb + &a;
                pred.0[i * kn..(i + 1) * kn].copy_from_slice(b.as_slice());
            }
            y - &pred
        };
        let filt = xhat_pred + &(&gains.gain * &eps);
        let pred = &(&gains.phi * &filt) + &(&gains.noise_gain * &eps);
        (eps, filt, pred)
    }

    /// One full step with reduced observation `y_k(t)`.
    pub fn filter_step(&self, state: &FilterState, y_k: &TessarineVector) -> Result<(FilterState, StepOutput)> {
        let want = self.kn() * self.sensors;
        if y_k.len() != want {
            return Err(Error::dimension("reduced observation", (want, 1), (y_k.len(), 1)));
        }
        let (cov, gains) = self.covariance_step(&state.cov)?;
        let (eps, filt, pred) = self.apply_gains(&gains, &state.xhat_pred, y_k, &state.y_prev);
        let (estimate, covariance) = extract(&filt, &cov.p_filt, self.n);
        let sensors: Vec<TessarineVector> = (0..self.sensors).map(|i| y_k.segment(i * self.kn(), self.n)).collect();
        let next = FilterState {
            cov,
            xhat_filt: filt,
            xhat_pred: pred,
            y_prev: y_k.clone(),
            y_prev_stacked: stacked_augmented(&sensors),
        };
        Ok((
            next,
            StepOutput {
                gains,
                innovation: eps,
                estimate,
                covariance,
            },
        ))
    }

    /// Step from per-sensor observations `y^{(i)}(t)`.
    pub fn filter_step_sensors(
        &self,
        state: &FilterState,
        per_sensor: &[TessarineVector],
    ) -> Result<(FilterState, StepOutput)> {
        self.filter_step(state, &reduced_from_sensors(per_sensor, self.order))
    }

    /// Gains for `t = 1..=horizon`, and the final covariance state.
    pub fn gain_schedule(&self, horizon: usize) -> Result<Vec<(Gains, CovarianceState)>> {
        let mut cov = self.init_filter()?.cov;
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let (next, g) = self.covariance_step(&cov)?;
            out.push((g, next.clone()));
            cov = next;
        }
        Ok(out)
    }

    /// Analytic `P^{T_k}(t|t)` for `t = 1..=horizon`.
    pub fn error_covariances(&self, horizon: usize) -> Result<Vec<TessarineMatrix>> {
        Ok(self
            .gain_schedule(horizon)?
            .into_iter()
            .map(|(_, c)| c.p_filt.block(0, 0, self.n, self.n))
            .collect())
    }

    /// Runs precomputed gains over reduced observations `y_k(1..)`; returns
    /// `x̂^{T_k}(t|t)` and `ε_k(t)` per step.
    pub fn run_schedule(
        &self,
        schedule: &[(Gains, CovarianceState)],
        observations: &[TessarineVector],
    ) -> Vec<(TessarineVector, TessarineVector)> {
        let kn = self.kn();
        let mut pred = TessarineVector::zeros(kn);
        let mut y_prev = TessarineVector::zeros(kn * self.sensors);
        let mut out = Vec::with_capacity(schedule.len());
        for ((g, _), y) in schedule.iter().zip(observations) {
            let (eps, filt, next) = self.apply_gains(g, &pred, y, &y_prev);
            out.push((filt.segment(0, self.n), eps));
            pred = next;
            y_prev = y.clone();
        }
        out
    }
}

/// `x̂^{T_k}(t|t)` and `P^{T_k}(t|t)`: first `n` components and the upper-left block.
pub fn extract(xhat: &TessarineVector, p: &TessarineMatrix, n: usize) -> (TessarineVector, TessarineMatrix) {
    (xhat.segment(0, n), p.block(0, 0, n, n))
}

pub fn extract_estimate(state: &FilterState, n: usize) -> (TessarineVector, TessarineMatrix) {
    extract(&state.xhat_filt, &state.cov.p_filt, n)
}

/// Scalar error variance `Re tr P^{T_k}`, equal to `tr Cov(x̃^r)`.
pub fn error_variance(p: &TessarineMatrix) -> f64 {
    (0..p.nrows().min(p.ncols())).map(|i| p[(i, i)].r).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::WlFilter;
    use crate::linalg;
    use crate::model::presets_for_tests::tiny_spec;
    use crate::model::{simulate_trajectory, DropoutProbs};

    #[test]
    fn matches_wl_first_components() {
        for (k, dropout) in [
            (1, DropoutProbs::uniform(1, 1, 0.5)),
            (2, DropoutProbs::per_part(1, 1, [0.3, 0.8, 0.3, 0.8])),
        ] {
            let mut spec = tiny_spec().with_dropout(dropout);
            if k == 2 {
                spec.q = crate::model::structured_covariance(1.0, 2.0, -0.5).into();
            }
            let tk = TkFilter::new(&spec, k).unwrap();
            let wl = WlFilter::new(&spec).unwrap();
            let tr = simulate_trajectory(&spec, 9).unwrap();
            let mut s = tk.init_filter().unwrap();
            let mut w = wl.init();
            for t in 1..=spec.horizon {
                let (ns, out) = tk.filter_step_sensors(&s, tr.y(t)).unwrap();
                let (nw, _) = wl.step(&w, &tr.y_stacked(t)).unwrap();
                let diff = out.estimate.max_abs_diff(&nw.xhat_filt.segment(0, 1));
                assert!(diff < 1e-8, "k={k} t={t} diff={diff}");
                let pd = out.covariance.max_abs_diff(&nw.p_filt.block(0, 0, 1, 1));
                assert!(pd < 1e-8, "k={k} t={t} P diff={pd}");
                let ce = linalg::max_abs_diff(
                    &real_error_covariance(&ns.cov.p_filt, 1, tk.order),
                    &wl.real_error_covariance(&nw),
                );
                assert!(ce < 1e-8, "k={k} t={t} C diff={ce}");
                s = ns;
                w = nw;
            }
        }
    }
}
