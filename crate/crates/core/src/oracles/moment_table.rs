//! Second-order moments of the stacked real observations over a window,
//! computed in closed form from the arrival-time distribution.
//!
//! Channel `a` (one real part of one component at one sensor) holds
//! `y_a(t) = z_a(τ)` where `τ` is its last arrival at or before `t`, which
//! has probability `m_a(t,τ) = p_a(τ) ∏_{σ=τ+1..t} (1-p_a(σ))` with
//! `p(1) = 1`. Distinct channels arrive independently; a channel shares its
//! own arrival history between two times.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::tessarine::PARTS;

#[derive(Clone, Debug)]
pub struct MomentTable {
    pub n: usize,
    pub sensors: usize,
    pub horizon: usize,
    /// `Cov(x^r(t))` for `t = 0..=T`.
    cx: Vec<DMatrix<f64>>,
    /// `Cov(y(s), y(r))` for `1 ≤ r ≤ s ≤ T`, at `[s-1][r-1]`.
    cyy: Vec<Vec<DMatrix<f64>>>,
    /// `Cov(x(t), y(s))` for `1 ≤ t, s ≤ T`, at `[t-1][s-1]`.
    cxy: Vec<Vec<DMatrix<f64>>>,
}

struct Ingredients {
    d: usize,
    phi: Vec<DMatrix<f64>>,
    cx: Vec<DMatrix<f64>>,
    s: Vec<Vec<DMatrix<f64>>>,
    r: Vec<Vec<DMatrix<f64>>>,
}

impl Ingredients {
    /// `Φ(a-1) ⋯ Φ(b)` for `a ≥ b`.
    fn transition(&self, a: usize, b: usize) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.d, self.d);
        for t in b..a {
            m = &self.phi[t] * m;
        }
        m
    }

    fn cov_xx(&self, a: usize, b: usize) -> DMatrix<f64> {
        if a >= b {
            self.transition(a, b) * &self.cx[b]
        } else {
            self.cov_xx(b, a).transpose()
        }
    }

    /// `Cov(x(a), v^{(j)}(b))`: nonzero only through `u(b)` when `a > b`.
    fn cov_xv(&self, a: usize, j: usize, b: usize) -> DMatrix<f64> {
        if a > b {
            self.transition(a, b + 1) * &self.s[j][b]
        } else {
            DMatrix::zeros(self.d, self.d)
        }
    }

    /// `E[z^{(i)}(a) z^{(j)}(b)ᵀ]`.
    fn cov_zz(&self, i: usize, a: usize, j: usize, b: usize) -> DMatrix<f64> {
        let mut m = self.cov_xx(a, b) + self.cov_xv(a, j, b) + self.cov_xv(b, i, a).transpose();
        if i == j && a == b {
            m += &self.r[i][a];
        }
        m
    }
}

impl MomentTable {
    pub fn new(spec: &SystemSpec, horizon: usize) -> Result<Self> {
        spec.validate()?;
        if horizon == 0 {
            return Err(Error::Config("moment table needs horizon >= 1".into()));
        }
        let d = PARTS * spec.n;
        let m = spec.sensors;
        let obs = d * m;
        let mut cx = vec![spec.p0.clone()];
        let phi: Vec<DMatrix<f64>> = (0..=horizon).map(|t| spec.real_transition(t)).collect();
        for t in 0..horizon {
            let next = &phi[t] * &cx[t] * phi[t].transpose() + spec.q.at(t);
            cx.push(next);
        }
        let ing = Ingredients {
            d,
            s: (0..m)
                .map(|i| (0..=horizon).map(|t| spec.s[i].at(t)).collect())
                .collect(),
            r: (0..m)
                .map(|i| (0..=horizon).map(|t| spec.r[i].at(t)).collect())
                .collect(),
            phi,
            cx: cx.clone(),
        };

        // arrival weights w[a][t][τ], t, τ in 1..=T
        let probs: Vec<Vec<f64>> = (0..=horizon).map(|t| spec.dropout.effective(t)).collect();
        let weights: Vec<Vec<Vec<f64>>> = (0..obs)
            .map(|a| {
                let mut w = vec![vec![0.0; horizon + 1]; horizon + 1];
                for t in 1..=horizon {
                    for tau in 1..=t {
                        let mut v = probs[tau][a];
                        for p in probs.iter().take(t + 1).skip(tau + 1) {
                            v *= 1.0 - p[a];
                        }
                        w[t][tau] = v;
                    }
                }
                w
            })
            .collect();

        // Z(τ, τ') as full obs × obs matrices
        let mut z = vec![vec![DMatrix::<f64>::zeros(0, 0); horizon + 1]; horizon + 1];
        for a in 1..=horizon {
            for b in 1..=horizon {
                let mut full = DMatrix::zeros(obs, obs);
                for i in 0..m {
                    for j in 0..m {
                        full.view_mut((i * d, j * d), (d, d)).copy_from(&ing.cov_zz(i, a, j, b));
                    }
                }
                z[a][b] = full;
            }
        }

        // u[r][ta][(a,b)] = Σ_tb w_b(r,tb) Z(ta,tb)[a,b]
        let mut u = vec![vec![DMatrix::<f64>::zeros(obs, obs); horizon + 1]; horizon + 1];
        for r in 1..=horizon {
            for ta in 1..=horizon {
                let acc = &mut u[r][ta];
                for tb in 1..=r {
                    let zt = &z[ta][tb];
                    for b in 0..obs {
                        let w = weights[b][r][tb];
                        if w != 0.0 {
                            for a in 0..obs {
                                acc[(a, b)] += w * zt[(a, b)];
                            }
                        }
                    }
                }
            }
        }

        let mut cyy = Vec::with_capacity(horizon);
        for s in 1..=horizon {
            let mut row = Vec::with_capacity(s);
            for r in 1..=s {
                let mut c = DMatrix::zeros(obs, obs);
                for a in 0..obs {
                    let wa = &weights[a][s];
                    for b in 0..obs {
                        let mut acc = 0.0;
                        if a != b {
                            for ta in 1..=s {
                                acc += wa[ta] * u[r][ta][(a, b)];
                            }
                        } else {
                            // shared history: last arrival after r, or at/before r (then equal)
                            for ta in (r + 1)..=s {
                                acc += wa[ta] * u[r][ta][(a, a)];
                            }
                            for ta in 1..=r {
                                acc += wa[ta] * z[ta][ta][(a, a)];
                            }
                        }
                        c[(a, b)] = acc;
                    }
                }
                row.push(c);
            }
            cyy.push(row);
        }

        let mut cxy = Vec::with_capacity(horizon);
        for t in 1..=horizon {
            let mut row = Vec::with_capacity(horizon);
            // E[x(t) z^{(j)}(τ)ᵀ] per τ
            let xz: Vec<DMatrix<f64>> = (0..=horizon)
                .map(|tau| {
                    let mut full = DMatrix::zeros(d, obs);
                    if tau >= 1 {
                        for j in 0..m {
                            let blk = ing.cov_xx(t, tau) + ing.cov_xv(t, j, tau);
                            full.view_mut((0, j * d), (d, d)).copy_from(&blk);
                        }
                    }
                    full
                })
                .collect();
            for s in 1..=horizon {
                let mut c = DMatrix::zeros(d, obs);
                for b in 0..obs {
                    for tau in 1..=s {
                        let w = weights[b][s][tau];
                        if w != 0.0 {
                            for a in 0..d {
                                c[(a, b)] += w * xz[tau][(a, b)];
                            }
                        }
                    }
                }
                row.push(c);
            }
            cxy.push(row);
        }

        Ok(MomentTable {
            n: spec.n,
            sensors: m,
            horizon,
            cx,
            cyy,
            cxy,
        })
    }

    pub fn obs_dim(&self) -> usize {
        PARTS * self.n * self.sensors
    }

    pub fn cov_x(&self, t: usize) -> &DMatrix<f64> {
        &self.cx[t]
    }

    /// `Cov(y(s), y(r))`.
    pub fn cov_y(&self, s: usize, r: usize) -> DMatrix<f64> {
        if s >= r {
            self.cyy[s - 1][r - 1].clone()
        } else {
            self.cyy[r - 1][s - 1].transpose()
        }
    }

    /// `Cov(x(t), y(s))`.
    pub fn cov_xy(&self, t: usize, s: usize) -> &DMatrix<f64> {
        &self.cxy[t - 1][s - 1]
    }

    /// `Cov(Y_{1:t})` as one matrix.
    pub fn stacked_cov_y(&self, t: usize) -> DMatrix<f64> {
        let o = self.obs_dim();
        let mut out = DMatrix::zeros(o * t, o * t);
        for s in 1..=t {
            for r in 1..=t {
                out.view_mut(((s - 1) * o, (r - 1) * o), (o, o))
                    .copy_from(&self.cov_y(s, r));
            }
        }
        out
    }

    /// `Cov(x(t), Y_{1:t})` as one matrix.
    pub fn stacked_cov_xy(&self, t: usize) -> DMatrix<f64> {
        let o = self.obs_dim();
        let d = PARTS * self.n;
        let mut out = DMatrix::zeros(d, o * t);
        for s in 1..=t {
            out.view_mut((0, (s - 1) * o), (d, o)).copy_from(self.cov_xy(t, s));
        }
        out
    }
}
