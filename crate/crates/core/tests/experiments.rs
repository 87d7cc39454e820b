use tessfusion::experiments::{
    example1, run_case_sweep, run_timing_benchmark, write_components_csv, write_csv, Case, ExperimentConfig, Preset,
    Source, TimingConfig, COLUMNS,
};
use tessfusion::model::config::SystemConfig;

fn small(preset: Preset, cases: Vec<u32>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(preset);
    cfg.cases = cases;
    cfg.mc_runs = 40;
    cfg.horizon = Some(6);
    cfg
}

#[test]
fn csv_has_one_row_per_t_and_unit_and_parses_back() {
    let mut cfg = small(Preset::Example1T1, vec![1, 5]);
    cfg.sensors = vec![2, 5];
    let result = run_case_sweep(&cfg).unwrap();
    let mut buf = Vec::new();
    write_csv(&result, &mut buf).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), COLUMNS.to_vec());
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6 * 4);
    // t-major, then case and R in sweep order
    let keys: Vec<(u32, u32, u32)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    assert_eq!(&keys[..4], &[(1, 1, 2), (1, 1, 5), (1, 5, 2), (1, 5, 5)]);
    assert_eq!(keys[4].0, 2);
    for r in &rows {
        let analytic: f64 = r[3].parse().unwrap();
        let mc: f64 = r[4].parse().unwrap();
        let q: f64 = r[6].parse().unwrap();
        let diff: f64 = r[7].parse().unwrap();
        assert!(mc >= 0.0 && analytic > 0.0);
        assert!((q - analytic - diff).abs() < 1e-12);
        assert!(r[8].is_empty());
    }
}

#[test]
fn more_updates_and_sensors_mean_lower_variance() {
    let mut cfg = small(Preset::Example1T1, vec![1, 5]);
    cfg.sensors = vec![2, 5];
    let r = run_case_sweep(&cfg).unwrap();
    let s = |case, sensors| {
        r.series
            .iter()
            .find(|s| s.case == case && s.sensors == sensors)
            .unwrap()
    };
    for t in 1..6 {
        assert!(s(5, 5).analytic[t] < s(1, 5).analytic[t]);
        assert!(s(1, 5).analytic[t] <= s(1, 2).analytic[t]);
    }
}

#[test]
fn components_csv_for_two_dimensional_state() {
    let mut cfg = small(Preset::Example2, vec![12, 17]);
    cfg.mc_runs = 20;
    let r = run_case_sweep(&cfg).unwrap();
    let mut buf = Vec::new();
    write_components_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + 6 * 2 * 2);
    for s in &r.series {
        for t in 0..6 {
            let sum: f64 = s.analytic_components[t].iter().sum();
            assert!((sum - s.analytic[t]).abs() < 1e-9);
            assert!(s.component_diff(0)[t] >= -1e-9 && s.component_diff(1)[t] >= -1e-9);
        }
    }
}

#[test]
fn case_and_preset_must_match() {
    let cfg = small(Preset::Example1T1, vec![7]);
    assert!(run_case_sweep(&cfg).is_err());
    let mut cfg = small(Preset::Example2, vec![]);
    cfg.k = Some(1);
    assert!(cfg.validate().is_err());
    let mut cfg = small(Preset::Example1T1, vec![3]);
    cfg.mc_runs = 0;
    assert!(cfg.validate().is_err());
    let mut cfg = small(Preset::Example1T1, vec![3]);
    cfg.horizon = Some(1);
    assert!(cfg.validate().is_err());
    let mut cfg = small(Preset::Example1T1, vec![3]);
    cfg.sensors = vec![6];
    assert!(cfg.validate().is_err());
}

#[test]
fn experiment_config_from_toml() {
    let cfg = ExperimentConfig::from_toml(
        r#"
name = "t2-sweep"
preset = "example1-t2"
cases = [6, 10]
sensors = [3]
mc_runs = 10
horizon = 4
seed = 9
"#,
    )
    .unwrap();
    assert_eq!(cfg.source, Source::Preset(Preset::Example1T2));
    assert_eq!(cfg.case_list().unwrap().len(), 2);
    let r = run_case_sweep(&cfg).unwrap();
    assert_eq!(r.series.len(), 2);
    assert!(ExperimentConfig::from_toml("name = \"x\"\npreset = \"example1-t1\"\nbogus = 1\n").is_err());
}

#[test]
fn custom_system_config() {
    let spec = example1(1).unwrap().with_horizon(5);
    let sys = SystemConfig::from_spec(&spec).unwrap();
    let cfg = ExperimentConfig {
        name: "custom".into(),
        source: Source::System(Box::new(sys)),
        k: Some(1),
        cases: vec![],
        sensors: vec![2],
        mc_runs: 10,
        horizon: None,
        seed: 1,
        c: None,
    };
    let text = toml::to_string(&cfg).unwrap();
    let back = ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(back, cfg);
    let r = run_case_sweep(&back).unwrap();
    assert_eq!((r.series.len(), r.series[0].case, r.horizon), (1, 0, 5));
}

#[test]
fn timing_rows_agree_on_estimates() {
    let rows = run_timing_benchmark(&TimingConfig {
        sensors: vec![2, 3],
        horizon: 20,
        repetitions: 1,
        ..TimingConfig::default()
    })
    .unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r.max_estimate_diff < 1e-8 && r.tk_s > 0.0 && r.real_s > 0.0);
    }
    let bad = TimingConfig {
        case: 8,
        ..TimingConfig::default()
    };
    assert!(run_timing_benchmark(&bad).is_err());
    assert_eq!(Case::new(8).unwrap().preset, Preset::Example1T2);
}
