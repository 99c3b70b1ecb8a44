use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use spin1bell::experiment::UncertaintyMethod;
use spin1bell::noisevis::fringe_scan;
use spin1bell::{
    chsh, correct_counts, estimate_bell, expectation, joint_probabilities, lhv_max,
    make_noisy_state, optimize_free, optimize_symmetric, p_from_visibility, pairs_model_chsh,
    probability_table, scan_dphi, simulate_counts, AnalyzerSetting, BellSettings, CountTable,
    DetectionModel, DphiRange, EstimateOptions, ExperimentConfig, Outcome,
};

mod output;

use output::num;

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(
    name = "spin1bell",
    version,
    about = "Spin-1 Bell test predictions, simulation and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint outcome grid and correlation at one pair of analyzer angles.
    Predict {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// The CHSH value S at four analyzer angles.
    Chsh {
        /// Angles `a,a',b,b'` in degrees.
        #[arg(long, allow_hyphen_values = true)]
        angles: String,
        #[arg(long, conflicts_with = "visibility")]
        p: Option<f64>,
        #[arg(long)]
        visibility: Option<f64>,
    },
    /// S against the spacing of equally spaced settings, as CSV.
    Scan {
        /// `start:end:step` in degrees.
        #[arg(long, default_value = "0:45:0.25")]
        dphi: String,
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        visibility: Vec<f64>,
    },
    /// Best analyzer settings.
    Optimize {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Also search all four angles independently.
        #[arg(long)]
        free: bool,
    },
    /// The local hidden-variable bound by exhaustive enumeration.
    LhvBound,
    /// The (+1, -1) fringe with Alice fixed, as CSV.
    Fringe {
        #[arg(long)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        fixed_angle: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Simulated coincidence counts as CSV.
    Simulate {
        /// JSON experiment config; missing keys take the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Efficiency-corrected table, probabilities and the S estimate.
    Analyze {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, default_value_t = 0.431)]
        eta_a: f64,
        #[arg(long, default_value_t = 0.434)]
        eta_b: f64,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long, default_value_t = 1000)]
        bootstrap_samples: usize,
        #[arg(long, default_value_t = EstimateOptions::default().seed)]
        bootstrap_seed: u64,
        /// Explicit roles `a,a',b,b'` when labels are not canonical.
        #[arg(long, allow_hyphen_values = true)]
        settings: Option<String>,
    },
    /// S when the photons form two distinguishable singlet pairs.
    PairsModel {
        #[arg(long, allow_hyphen_values = true)]
        angles: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bootstrap,
    IntervalScatter,
    PoissonPropagation,
}

impl From<Method> for UncertaintyMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Bootstrap => UncertaintyMethod::Bootstrap,
            Method::IntervalScatter => UncertaintyMethod::IntervalScatter,
            Method::PoissonPropagation => UncertaintyMethod::PoissonPropagation,
        }
    }
}

fn open(path: &Path) -> AnyResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| format!("{}: {e}", path.display()).into())
}

fn predict(alpha: f64, beta: f64, p: f64) -> AnyResult<String> {
    let grid = joint_probabilities(
        &make_noisy_state(p)?,
        AnalyzerSetting(alpha),
        AnalyzerSetting(beta),
    )?;
    let e = expectation(&grid)?;
    let outcomes: Vec<String> = Outcome::ALL.iter().map(|o| o.to_string()).collect();
    Ok(output::json(&json!({
        "alpha": alpha,
        "beta": beta,
        "p": p,
        "outcomes": outcomes,
        "grid": grid.p,
        "E": e,
    }))?)
}

fn chsh_cmd(angles: &str, p: Option<f64>, visibility: Option<f64>) -> AnyResult<String> {
    let settings = BellSettings::parse(angles)?;
    let p = match (p, visibility) {
        (_, Some(v)) => p_from_visibility(v)?,
        (Some(p), None) => p,
        (None, None) => 1.0,
    };
    let s = chsh(&make_noisy_state(p)?, &settings)?;
    Ok(output::json(
        &json!({ "S": s, "p": p, "settings": settings }),
    )?)
}

fn scan(dphi: &str, visibilities: &[f64]) -> AnyResult<String> {
    let range = DphiRange::parse(dphi)?;
    let mut rows = Vec::new();
    for &v in visibilities {
        let p = p_from_visibility(v)?;
        for point in scan_dphi(p, &range)? {
            rows.push(vec![num(point.dphi), num(point.s), num(v)]);
        }
    }
    Ok(output::csv(&["dphi_deg", "S", "visibility"], rows))
}

fn optimize(p: f64, free: bool) -> AnyResult<String> {
    let sym = optimize_symmetric(p)?;
    let settings = spin1bell::SymmetricSettings::new(sym.dphi).to_bell();
    let mut out = json!({
        "p": p,
        "symmetric": { "dphi": sym.dphi, "S": sym.s, "settings": settings },
    });
    if free {
        let f = optimize_free(&make_noisy_state(p)?)?;
        out["free"] = json!({ "S": f.s, "center": f.center, "settings": f.settings });
    }
    Ok(output::json(&out)?)
}

fn fringe(p: f64, fixed_angle: f64, step: f64) -> AnyResult<String> {
    let scan = fringe_scan(p, fixed_angle, step)?;
    let rows = scan
        .samples
        .iter()
        .map(|&(t, prob)| vec![num(t), num(prob)]);
    Ok(output::csv(&["theta_deg", "probability"], rows))
}

fn simulate(config: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> AnyResult<String> {
    let mut cfg: ExperimentConfig = match config {
        Some(path) => {
            serde_json::from_reader(open(path)?).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let table = simulate_counts(&cfg)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    match out {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(String::new())
        }
        None => Ok(String::from_utf8(buf)?),
    }
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    counts: &Path,
    eta_a: f64,
    eta_b: f64,
    method: Option<Method>,
    bootstrap_samples: usize,
    bootstrap_seed: u64,
    settings: Option<&str>,
) -> AnyResult<String> {
    let table =
        CountTable::read_csv(open(counts)?).map_err(|e| format!("{}: {e}", counts.display()))?;
    let det = DetectionModel::new(eta_a, eta_b)?;
    let opts = EstimateOptions {
        method: method.map(Into::into),
        bootstrap_samples,
        seed: bootstrap_seed,
        settings: settings.map(BellSettings::parse).transpose()?,
    };
    let estimate = estimate_bell(&table, &det, &opts)?;
    let corrected = correct_counts(&table, &det)?;
    let corrected_rows: Vec<_> = corrected
        .rows
        .iter()
        .map(|r| {
            json!({
                "setting_label": r.setting_label,
                "alpha_deg": r.alpha_deg,
                "beta_deg": r.beta_deg,
                "outcome_a": r.outcome_a.to_string(),
                "outcome_b": r.outcome_b.to_string(),
                "mean_counts": r.mean_counts,
            })
        })
        .collect();
    let probabilities: Vec<_> = probability_table(&corrected)?
        .into_iter()
        .map(|s| {
            json!({
                "setting_label": s.label,
                "alpha_deg": s.alpha_deg,
                "beta_deg": s.beta_deg,
                "corrected_total": s.corrected_total,
                "grid": s.grid.p,
            })
        })
        .collect();
    Ok(output::json(&json!({
        "corrected": corrected_rows,
        "probabilities": probabilities,
        "estimate": estimate,
    }))?)
}

fn pairs_model(angles: &str) -> AnyResult<String> {
    let settings = BellSettings::parse(angles)?;
    Ok(output::json(
        &json!({ "S": pairs_model_chsh(&settings), "settings": settings }),
    )?)
}

fn run(command: Command) -> AnyResult<String> {
    match command {
        Command::Predict { alpha, beta, p } => predict(alpha, beta, p),
        Command::Chsh {
            angles,
            p,
            visibility,
        } => chsh_cmd(&angles, p, visibility),
        Command::Scan { dphi, visibility } => scan(&dphi, &visibility),
        Command::Optimize { p, free } => optimize(p, free),
        Command::LhvBound => Ok(format!("{}\n", lhv_max())),
        Command::Fringe {
            p,
            fixed_angle,
            step,
        } => fringe(p, fixed_angle, step),
        Command::Simulate { config, seed, out } => {
            simulate(config.as_deref(), seed, out.as_deref())
        }
        Command::Analyze {
            counts,
            eta_a,
            eta_b,
            method,
            bootstrap_samples,
            bootstrap_seed,
            settings,
        } => analyze(
            &counts,
            eta_a,
            eta_b,
            method,
            bootstrap_samples,
            bootstrap_seed,
            settings.as_deref(),
        ),
        Command::PairsModel { angles } => pairs_model(&angles),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
