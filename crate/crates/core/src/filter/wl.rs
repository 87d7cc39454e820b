//! Widely linear reference filter on the full `4n` augmented state.
//!
//! Everything is carried as tessarine matrices in augmented coordinates;
//! no properness is assumed.

use nalgebra::DMatrix;

use super::{invert, InversePolicy, PinvReport};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{TessarineMatrix, TessarineVector};
use crate::model::{augmented_covariance, build_stacked_phi, BernoulliMoments, SystemSpec};
use crate::structural::t_matrix;
use crate::tessarine::PARTS;

#[derive(Clone, Debug)]
pub struct WlFilter {
    pub n: usize,
    pub sensors: usize,
    pub horizon: usize,
    pub policy: InversePolicy,
    spec: SystemSpec,
    upsilon: TessarineMatrix,
    c: TessarineMatrix,
}

#[derive(Clone, Debug)]
pub struct WlState {
    pub t: usize,
    pub xhat_filt: TessarineVector,
    pub xhat_pred: TessarineVector,
    pub p_filt: TessarineMatrix,
    pub p_pred: TessarineMatrix,
    /// `Γ_x̄(t,t)`, `Γ_x̄(t+1,t+1)`, `Γ_x̄ȳ(t,t)`, `Γ_ȳ(t,t)`.
    pub gamma_x: TessarineMatrix,
    pub gamma_x_next: TessarineMatrix,
    pub gamma_xy: TessarineMatrix,
    pub gamma_y: TessarineMatrix,
    pub y_prev: TessarineVector,
}

#[derive(Clone, Debug)]
pub struct WlOutput {
    pub innovation: TessarineVector,
    pub omega: TessarineMatrix,
    pub pinv: PinvReport,
}

impl WlFilter {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        Self::with_policy(spec, InversePolicy::default())
    }

    pub fn with_policy(spec: &SystemSpec, policy: InversePolicy) -> Result<Self> {
        spec.validate()?;
        let n = spec.n;
        let ones = TessarineMatrix::from_fn(spec.sensors, 1, |_, _| crate::tessarine::Tessarine::ONE);
        Ok(WlFilter {
            n,
            sensors: spec.sensors,
            horizon: spec.horizon,
            policy,
            upsilon: t_matrix(n).identity_kron(spec.sensors),
            c: ones.kron_identity(PARTS * n),
            spec: spec.clone(),
        })
    }

    fn phi(&self, t: usize) -> TessarineMatrix {
        build_stacked_phi(&self.spec, t)
    }

    fn q(&self, t: usize) -> TessarineMatrix {
        augmented_covariance(&self.spec.q.at(t), self.n)
    }

    /// `R⃗(t)`.
    fn r_stack(&self, t: usize) -> TessarineMatrix {
        TessarineMatrix::block_diag(
            &self
                .spec
                .r
                .iter()
                .map(|m| augmented_covariance(&m.at(t), self.n))
                .collect::<Vec<_>>(),
        )
    }

    /// `S⃗(t) = [S̄^{(1)}, …, S̄^{(R)}]`.
    fn s_row(&self, t: usize) -> TessarineMatrix {
        let d = PARTS * self.n;
        let mut out = TessarineMatrix::zeros(d, d * self.sensors);
        for (i, m) in self.spec.s.iter().enumerate() {
            out.set_block(0, i * d, &augmented_covariance(&m.at(t), self.n));
        }
        out
    }

    /// `Υ diag(w) Υᴴ`.
    fn upsilon_diag(&self, w: &[f64]) -> TessarineMatrix {
        (&self.upsilon.mul_real(&linalg::diag(w)) * &self.upsilon.hermitian()).hermitian_part()
    }

    fn probs(&self, t: usize) -> Vec<f64> {
        self.spec.dropout.effective(t)
    }

    pub fn init(&self) -> WlState {
        let d = PARTS * self.n;
        let p0 = augmented_covariance(&self.spec.p0, self.n);
        let phi = self.phi(0);
        let g1 = (&(&(&phi * &p0) * &phi.hermitian()) + &self.q(0)).hermitian_part();
        WlState {
            t: 0,
            xhat_filt: TessarineVector::zeros(d),
            xhat_pred: TessarineVector::zeros(d),
            p_filt: TessarineMatrix::zeros(d, d),
            p_pred: g1.clone(),
            gamma_x: p0,
            gamma_x_next: g1,
            gamma_xy: TessarineMatrix::zeros(0, 0),
            gamma_y: TessarineMatrix::zeros(0, 0),
            y_prev: TessarineVector::zeros(d * self.sensors),
        }
    }

    /// One step with the stacked augmented observation `y⃗(t)`.
    pub fn step(&self, state: &WlState, y: &TessarineVector) -> Result<(WlState, WlOutput)> {
        let d = PARTS * self.n;
        if y.len() != d * self.sensors {
            return Err(Error::dimension(
                "stacked augmented observation",
                (d * self.sensors, 1),
                (y.len(), 1),
            ));
        }
        let t = state.t + 1;
        let c = &self.c;
        let ct = c.transpose();
        let ups = &self.upsilon;
        let upsh = ups.hermitian();
        let gx = state.gamma_x_next.clone();
        let p = &state.p_pred;
        let r_stack = self.r_stack(t);
        let gz = &(&(c * &gx) * &ct) + &r_stack;

        let (eps, theta, omega, pi_g, gxy, gy) = if t == 1 {
            let theta = &gx * &ct;
            (y.clone(), theta.clone(), gz.clone(), None, theta, gz.hermitian_part())
        } else {
            let pv = self.probs(t);
            let bm = BernoulliMoments::new(&pv)?;
            let pi_g = self.upsilon_diag(&pv);
            let pi_o = self.upsilon_diag(&pv.iter().map(|v| 1.0 - v).collect::<Vec<_>>());
            let pred = &(&(&pi_g * c) * &state.xhat_pred) + &(&pi_o * &state.y_prev);
            let eps = y - &pred;
            let theta = &(p * &ct) * &pi_g;

            let pi_prev = self.upsilon_diag(&self.probs(state.t));
            let g = &(&self.phi(state.t) * &state.gamma_xy) + &(&self.s_row(state.t) * &pi_prev);
            let psi1 = &(&(&upsh * c) * &gx) * &(&ct * ups);
            let psi2 = &(&(&upsh * c) * &g) * ups;
            let psi3 = &(&upsh * &state.gamma_y) * ups;
            let inner = &(&(&psi1 - &psi2) - &psi2.hermitian()) + &psi3;
            let rr = &(&upsh * &r_stack) * ups;
            let mid = &inner.hadamard_real(&bm.cov) + &rr.hadamard_real(&bm.second);
            let omega = &(&(ups * &mid) * &upsh) + &(&(&(&(&pi_g * c) * p) * &ct) * &pi_g);

            let gxy = &(&(&gx * &ct) * &pi_g) + &(&g * &pi_o);
            let psiz = &(&upsh * &gz) * ups;
            let psizy = &(&upsh * &(c * &g)) * ups;
            let cross = psizy.hadamard_real(&bm.cross_one_minus);
            let gym = &(&(&psiz.hadamard_real(&bm.second) + &cross) + &cross.hermitian())
                + &psi3.hadamard_real(&bm.one_minus_second);
            let gy = (&(ups * &gym) * &upsh).hermitian_part();
            (eps, theta, omega, Some(pi_g), gxy, gy)
        };
        let omega = omega.hermitian_part();
        let (inv, pinv) = invert(&omega, self.policy, t)?;
        let gain = &theta * &inv;
        let s = self.s_row(t);
        let noise_gain = match &pi_g {
            Some(pg) => &(&s * pg) * &inv,
            None => &s * &inv,
        };
        let phi = self.phi(t);
        let filt = &state.xhat_pred + &(&gain * &eps);
        let pred = &(&phi * &filt) + &(&noise_gain * &eps);
        let p_filt = (p - &(&gain * &theta.hermitian())).hermitian_part();
        let pth = &(&phi * &theta) * &noise_gain.hermitian();
        let p_pred = &(&(&phi * &p_filt) * &phi.hermitian()) - &pth;
        let p_pred = &(&p_pred - &pth.hermitian()) - &(&(&noise_gain * &omega) * &noise_gain.hermitian());
        let p_pred = (&p_pred + &self.q(t)).hermitian_part();
        let gx_next = (&(&(&phi * &gx) * &phi.hermitian()) + &self.q(t)).hermitian_part();

        let next = WlState {
            t,
            xhat_filt: filt,
            xhat_pred: pred,
            p_filt,
            p_pred,
            gamma_x: gx,
            gamma_x_next: gx_next,
            gamma_xy: gxy,
            gamma_y: gy,
            y_prev: y.clone(),
        };
        Ok((
            next,
            WlOutput {
                innovation: eps,
                omega,
                pinv,
            },
        ))
    }

    /// Real error covariance `¼ 𝒯ᴴ P̄ 𝒯` of the filtering error.
    pub fn real_error_covariance(&self, state: &WlState) -> DMatrix<f64> {
        let t = t_matrix(self.n);
        linalg::symmetrize(&(&(&t.hermitian() * &state.p_filt) * &t).scale(0.25).real_part())
    }
}
