use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tessfusion::experiments::{
    emit_components_csv, emit_csv, emit_timing_csv, run_case_sweep, run_timing_benchmark, summary, Case,
    ExperimentConfig, Preset, Source, TimingConfig, DEFAULT_SEED,
};
use tessfusion::model::config::SystemConfig;
use tessfusion::model::{validate_properness, SystemSpec};
use tessfusion::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tessfusion",
    version,
    about = "Tessarine multi-sensor fusion filtering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case sweep and write CSV output.
    Run(RunArgs),
    /// Time the reduced filter against the real-coordinate filter.
    Bench(BenchArgs),
    /// Report the properness conditions of a system.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment or system configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// example1-t1, example1-t2 or example2.
    #[arg(long)]
    preset: Option<Preset>,
    /// Case id, or `all`.
    #[arg(long)]
    case: Option<String>,
    /// Sensor counts to sweep, e.g. `2,3,4,5`.
    #[arg(long, value_delimiter = ',')]
    sensors: Option<Vec<usize>>,
    /// Monte Carlo runs per case.
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Order for a custom system.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    sensors: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for `timing.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    case: Option<u32>,
    /// Check only this order (default: both).
    #[arg(long)]
    k: Option<usize>,
}

/// Reads either an experiment config or a bare system config.
fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    match ExperimentConfig::from_toml(&text) {
        Ok(cfg) => Ok(cfg),
        Err(exp_err) => match SystemConfig::from_toml(&text) {
            Ok(sys) => {
                let name = path
                    .file_stem()
                    .map_or("custom".into(), |s| s.to_string_lossy().into_owned());
                let mut cfg = ExperimentConfig::preset(Preset::Example1T1);
                cfg.name = name;
                cfg.source = Source::System(Box::new(sys));
                Ok(cfg)
            }
            Err(_) => Err(exp_err),
        },
    }
}

fn parse_cases(s: &str) -> Result<Vec<u32>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid case `{p}` (expected an id or `all`)")))
        })
        .collect()
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match (&args.config, args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(p)) => ExperimentConfig::preset(p),
        (None, None) => return Err(Error::Config("give --config or --preset".into())),
    };
    if let (Some(_), Some(p)) = (&args.config, args.preset) {
        cfg.source = Source::Preset(p);
        cfg.name = p.name().to_string();
    }
    if let Some(c) = &args.case {
        cfg.cases = parse_cases(c)?;
    }
    if let Some(s) = args.sensors {
        cfg.sensors = s;
    }
    if let Some(n) = args.mc {
        cfg.mc_runs = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(h) = args.horizon {
        cfg.horizon = Some(h);
    }
    if args.k.is_some() {
        cfg.k = args.k;
    }
    let result = run_case_sweep(&cfg)?;
    fs::create_dir_all(&args.out)?;
    let main = args.out.join(format!("{}.csv", cfg.name));
    let comps = args.out.join(format!("{}_components.csv", cfg.name));
    emit_csv(&result, &main)?;
    emit_components_csv(&result, &comps)?;
    print!("{}", summary(&result));
    println!("wrote {} and {}", main.display(), comps.display());
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let cfg = TimingConfig {
        sensors: args.sensors,
        horizon: args.horizon,
        repetitions: args.repetitions,
        seed: args.seed,
        ..TimingConfig::default()
    };
    let rows = run_timing_benchmark(&cfg)?;
    println!(
        "median of {} runs, horizon {}, case {} of {}",
        cfg.repetitions, cfg.horizon, cfg.case, cfg.preset
    );
    println!(" R   reduced_s     real_s   ratio");
    for r in &rows {
        println!(
            "{:>2}  {:>10.6}  {:>9.6}  {:>6.3}",
            r.sensors,
            r.tk_s,
            r.real_s,
            r.ratio()
        );
    }
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir)?;
        let path = dir.join("timing.csv");
        emit_timing_csv(&rows, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<bool> {
    let mut specs: Vec<(String, SystemSpec, Vec<usize>)> = Vec::new();
    let orders = |k: Option<usize>, default: Vec<usize>| k.map_or(default, |k| vec![k]);
    match (&args.config, args.preset) {
        (Some(path), _) => {
            let cfg = load_config(path)?;
            match &cfg.source {
                Source::System(s) => specs.push((cfg.name.clone(), s.build()?, orders(args.k.or(cfg.k), vec![1, 2]))),
                Source::Preset(_) => {
                    for c in cfg.case_list()? {
                        let (spec, k, id) = cfg.unit_spec(c.as_ref(), cfg.sensor_counts()[0])?;
                        specs.push((format!("{} case {id}", cfg.name), spec, orders(args.k, vec![k])));
                    }
                }
            }
        }
        (None, Some(p)) => match args.case {
            Some(id) => {
                let case = Case::new(id)?;
                if case.preset != p {
                    return Err(Error::Config(format!("case {id} belongs to {}", case.preset)));
                }
                let base = p.spec()?;
                let d = case.dropout(base.n, base.sensors)?;
                specs.push((
                    format!("{p} case {id}"),
                    base.with_dropout(d),
                    orders(args.k, vec![case.k]),
                ));
            }
            None => specs.push((p.name().to_string(), p.spec()?, orders(args.k, vec![1, 2]))),
        },
        (None, None) => return Err(Error::Config("give --config or --preset".into())),
    }
    let mut all = true;
    for (name, spec, ks) in specs {
        spec.validate()?;
        println!(
            "{name}: n={}, {} sensor(s), horizon {}",
            spec.n, spec.sensors, spec.horizon
        );
        for k in ks {
            let report = validate_properness(&spec, k)?;
            all &= report.passed();
            print!("{report}");
        }
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Bench(a) => bench(a).map(|_| true),
        Command::Validate(a) => validate(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
