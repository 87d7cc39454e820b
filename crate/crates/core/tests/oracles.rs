use nalgebra::DVector;
use tessfusion::experiments::{example1, example2, Case};
use tessfusion::filter::{moments, real_error_covariance, ModelTables, TkFilter, WlFilter};
use tessfusion::model::{simulate_trajectory, DropoutProbs, SensorNoise, SystemSpec};
use tessfusion::oracles::{
    batch_llms, constrained_llms_with, kalman_filter, project_blocks, quaternion_right_matrix, real_observations,
    real_valued_filter, LinearClass, MomentTable,
};
use tessfusion::{linalg, ProperOrder, TessarineVector};

fn case_spec(id: u32, sensors: usize, horizon: usize) -> SystemSpec {
    let case = Case::new(id).unwrap();
    let base = case.preset.spec().unwrap();
    let d = case.dropout(base.n, base.sensors).unwrap();
    let keep: Vec<usize> = (0..sensors).collect();
    base.with_dropout(d).with_sensors(&keep).unwrap().with_horizon(horizon)
}

fn run_tk(spec: &SystemSpec, k: usize, seed: u64) -> (Vec<TessarineVector>, Vec<nalgebra::DMatrix<f64>>) {
    let tk = TkFilter::new(spec, k).unwrap();
    let traj = simulate_trajectory(spec, seed).unwrap();
    let mut st = tk.init_filter().unwrap();
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    for t in 1..=spec.horizon {
        let (next, out) = tk.filter_step(&st, &traj.y_reduced(t, tk.order)).unwrap();
        xs.push(out.estimate);
        ps.push(real_error_covariance(&next.cov.p_filt, spec.n, tk.order));
        st = next;
    }
    (xs, ps)
}

#[test]
fn moment_table_matches_recursion() {
    for id in [3, 8, 13, 18] {
        let spec = case_spec(id, Case::new(id).unwrap().preset.max_sensors().min(3), 6);
        let table = MomentTable::new(&spec, 6).unwrap();
        let path = moments::moment_path(&ModelTables::new(&spec).unwrap(), 6).unwrap();
        for (i, m) in path.iter().enumerate() {
            let t = i + 1;
            assert!(linalg::max_abs_diff(table.cov_x(t), &m.cx) < 1e-9, "case {id} cx t={t}");
            assert!(
                linalg::max_abs_diff(&table.cov_y(t, t), &m.cy) < 1e-9,
                "case {id} cy t={t}"
            );
            assert!(
                linalg::max_abs_diff(table.cov_xy(t, t), &m.cxy) < 1e-9,
                "case {id} cxy t={t}"
            );
        }
    }
}

#[test]
fn batch_projection_matches_tk_filter() {
    for (id, k) in [(3, 1), (1, 1), (8, 2), (6, 2), (13, 1), (18, 2)] {
        let sensors = Case::new(id).unwrap().preset.max_sensors().min(3);
        let spec = case_spec(id, sensors, 5);
        let (xs, ps) = run_tk(&spec, k, 11);
        let traj = simulate_trajectory(&spec, 11).unwrap();
        let batch = batch_llms(&spec, &real_observations(&traj, 5)).unwrap();
        for (t, b) in batch.iter().enumerate() {
            let dx = (xs[t].real_vector() - &b.xhat).amax();
            let dp = linalg::max_abs_diff(&ps[t], &b.p);
            assert!(dx < 1e-8 && dp < 1e-8, "case {id} t={} dx={dx:e} dp={dp:e}", t + 1);
        }
    }
}

#[test]
fn tessarine_classes_reduce_to_tk() {
    let table_for = |spec: &SystemSpec| MomentTable::new(spec, 5).unwrap();
    for (id, class, k) in [
        (3, LinearClass::TessarineStrict, 1),
        (8, LinearClass::TessarineSemiWide, 2),
    ] {
        let spec = case_spec(id, 2, 5);
        let traj = simulate_trajectory(&spec, 3).unwrap();
        let obs = real_observations(&traj, 5);
        let constrained = constrained_llms_with(&table_for(&spec), class, &obs).unwrap();
        let (xs, ps) = run_tk(&spec, k, 3);
        for t in 0..5 {
            assert!((xs[t].real_vector() - &constrained[t].xhat).amax() < 1e-8, "case {id}");
            // the class reports the projected covariance: traces agree
            assert!(
                (ps[t].trace() - constrained[t].error_variance()).abs() < 1e-8,
                "case {id}"
            );
        }
    }
}

#[test]
fn quaternion_classes_are_nested() {
    let spec = case_spec(18, 1, 6);
    let table = MomentTable::new(&spec, 6).unwrap();
    let obs = vec![DVector::zeros(table.obs_dim()); 6];
    let full = tessfusion::oracles::project_innovations(&table, &obs).unwrap();
    let qsl = constrained_llms_with(&table, LinearClass::QuaternionStrict, &obs).unwrap();
    let qswl = constrained_llms_with(&table, LinearClass::QuaternionSemiWide, &obs).unwrap();
    for t in 0..6 {
        let (f, s, w) = (full[t].p.trace(), qsl[t].p.trace(), qswl[t].p.trace());
        assert!(f <= w + 1e-9 && w <= s + 1e-9, "t={t}: {f} {w} {s}");
        for ((f, w), s) in full[t]
            .component_variances()
            .iter()
            .zip(qswl[t].component_variances())
            .zip(qsl[t].component_variances())
        {
            assert!(*f <= w + 1e-9 && w <= s + 1e-9);
        }
    }
}

#[test]
fn projected_blocks_commute_with_right_multiplication() {
    let spec = example1(1).unwrap();
    let c = spec.r[0].at(1) + spec.s[1].at(1) * 3.0 + spec.p0.clone();
    let p = project_blocks(&c, 1, LinearClass::QuaternionStrict);
    for u in 0..4 {
        let mut q = [0.0; 4];
        q[u] = 1.0;
        let g = quaternion_right_matrix(q);
        let g = nalgebra::DMatrix::from_fn(4, 4, |r, c| g[(r, c)]);
        assert!(linalg::max_abs_diff(&(&g * &p), &(&p * &g)) < 1e-12);
    }
    // idempotent
    let pp = project_blocks(&p, 1, LinearClass::QuaternionStrict);
    assert!(linalg::max_abs_diff(&p, &pp) < 1e-12);
}

#[test]
fn real_filter_matches_widely_linear_filter() {
    for spec in [case_spec(3, 3, 12), case_spec(7, 2, 12), case_spec(14, 1, 12)] {
        let traj = simulate_trajectory(&spec, 5).unwrap();
        let run = real_valued_filter(&spec, &real_observations(&traj, 12)).unwrap();
        let wl = WlFilter::new(&spec).unwrap();
        let mut st = wl.init();
        for t in 1..=12 {
            let (next, _) = wl.step(&st, &traj.y_stacked(t)).unwrap();
            let est = &run.estimates[t - 1];
            let x = next.xhat_filt.segment(0, spec.n).real_vector();
            assert!((x - &est.xhat).amax() < 1e-9, "t={t}");
            assert!(linalg::max_abs_diff(&wl.real_error_covariance(&next), &est.p) < 1e-9);
            st = next;
        }
    }
}

fn no_loss_uncorrelated(horizon: usize) -> SystemSpec {
    let base = example2().unwrap();
    base.with_dropout(DropoutProbs::uniform(2, 1, 1.0))
        .with_horizon(horizon)
}

#[test]
fn kalman_collapse() {
    let q = tessfusion::model::structured_covariance(1.0, 1.0, -0.5);
    let mut ex1 = example1(1)
        .unwrap()
        .with_dropout(DropoutProbs::uniform(1, 5, 1.0))
        .with_horizon(30);
    for i in 0..5 {
        let n = SensorNoise::scaled_state_noise(&q, 0.0, 10.0 + i as f64);
        ex1.r[i] = n.r.into();
        ex1.s[i] = n.s.into();
    }
    for spec in [no_loss_uncorrelated(30), ex1] {
        let traj = simulate_trajectory(&spec, 9).unwrap();
        let kf = kalman_filter(&spec, &real_observations(&traj, 30)).unwrap();
        let (xs, ps) = run_tk(&spec, 1, 9);
        for t in 0..30 {
            assert!((xs[t].real_vector() - &kf[t].xhat).amax() < 1e-9);
            assert!(linalg::max_abs_diff(&ps[t], &kf[t].p) < 1e-9);
        }
    }
}

#[test]
fn kalman_rejects_correlated_noise() {
    let spec = example1(1).unwrap().with_dropout(DropoutProbs::uniform(1, 5, 1.0));
    let traj = simulate_trajectory(&spec.clone().with_horizon(2), 1).unwrap();
    assert!(kalman_filter(&spec, &real_observations(&traj, 2)).is_err());
}

#[test]
fn frozen_observations_keep_first_information() {
    let spec = example1(1)
        .unwrap()
        .with_dropout(DropoutProbs::uniform(1, 5, 0.0))
        .with_horizon(8);
    let traj = simulate_trajectory(&spec, 4).unwrap();
    for t in 2..=8 {
        assert_eq!(traj.y_real(t), traj.y_real(1));
    }
    let (_, ps) = run_tk(&spec, 1, 4);
    let table = MomentTable::new(&spec, 8).unwrap();
    let batch = batch_llms(&spec, &real_observations(&traj, 8)).unwrap();
    for t in 0..8 {
        // x(t) projected on y(1) alone
        let one =
            tessfusion::oracles::project_innovations(&FirstOnly(&table, t + 1), &real_observations(&traj, 1)).unwrap();
        assert!(linalg::max_abs_diff(&ps[t], &one[0].p) < 1e-8, "t={}", t + 1);
        assert!(linalg::max_abs_diff(&ps[t], &batch[t].p) < 1e-8, "t={}", t + 1);
    }
}

struct FirstOnly<'a>(&'a MomentTable, usize);

impl tessfusion::oracles::Moments for FirstOnly<'_> {
    fn cov_x(&self, _: usize) -> nalgebra::DMatrix<f64> {
        self.0.cov_x(self.1).clone()
    }
    fn cov_y(&self, s: usize, r: usize) -> nalgebra::DMatrix<f64> {
        self.0.cov_y(s, r)
    }
    fn cov_xy(&self, _: usize, s: usize) -> nalgebra::DMatrix<f64> {
        self.0.cov_xy(self.1, s).clone()
    }
}

#[test]
fn order_is_checked() {
    let spec = case_spec(8, 2, 4);
    assert!(TkFilter::new(&spec, 1).is_err());
    assert!(TkFilter::new(&spec, 2).is_ok());
    assert_eq!(TkFilter::new(&case_spec(3, 2, 4), 2).unwrap().order, ProperOrder::T2);
}

/// Direct least squares over the coefficients of quaternion-linear
/// estimators `x̂ = Σ_s A_s y(s)`, with the real stacked moments.
fn brute_force_class_variance(table: &MomentTable, t: usize, basis: &[nalgebra::Matrix4<f64>]) -> f64 {
    let o = table.obs_dim();
    let cy = table.stacked_cov_y(t);
    let cxy = table.stacked_cov_xy(t);
    let cx = table.cov_x(t);
    let blocks = o * t / 4;
    let mut mats = Vec::new();
    for b in 0..blocks {
        for g in basis {
            let mut m = nalgebra::DMatrix::zeros(4, o * t);
            m.view_mut((0, 4 * b), (4, 4)).copy_from(g);
            mats.push(m);
        }
    }
    let k = mats.len();
    let bvec = DVector::from_fn(k, |i, _| (&mats[i] * cxy.transpose()).trace());
    let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| (&mats[i] * &cy * mats[j].transpose()).trace());
    let theta = linalg::sym_pinv(&gram, 1e-12).inverse * &bvec;
    cx.trace() - bvec.dot(&theta)
}

#[test]
fn class_projection_matches_brute_force() {
    use tessfusion::oracles::quaternion_left_matrix;
    let spec = case_spec(3, 2, 3);
    let table = MomentTable::new(&spec, 3).unwrap();
    let obs = vec![DVector::zeros(table.obs_dim()); 3];
    let qsl = constrained_llms_with(&table, LinearClass::QuaternionStrict, &obs).unwrap();
    let basis: Vec<_> = (0..4)
        .map(|u| {
            let mut q = [0.0; 4];
            q[u] = 1.0;
            quaternion_left_matrix(q)
        })
        .collect();
    for t in 1..=3 {
        let direct = brute_force_class_variance(&table, t, &basis);
        assert!(
            (direct - qsl[t - 1].error_variance()).abs() < 1e-9,
            "t={t}: {direct} vs {}",
            qsl[t - 1].error_variance()
        );
    }
}
