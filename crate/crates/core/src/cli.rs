//! Command-line interface. Exit codes: 0 success, 1 runtime failure,
//! 2 usage or validation error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::apps::{multitask_coverage, multitask_regions, projection_coverage, projection_widths, TwoStageModel};
use crate::error::{JcrError, Result};
use crate::harness::{
    analytic_json, design, export_region, gen_noise, load_table, run_coverage_sim, run_semi_empirical, write_text,
    CoverageReport, ExportFormat, Method, NoiseSpec, OmegaSetting, SemiEmpiricalConfig, SimConfig,
};
use crate::invariance::GroupKind;
use crate::linmod::{
    default_grids, f_pivot_jcr, intersection_jcr, normal_mean_omega_jcr, one_param_highdim_jcr, weighted_t_band,
    CyclicShiftJcr, Omega, PermutationJcr, RegressionData, WeightVector,
};
use crate::region::{AnalyticRegion, Axis, GridRegion};

#[derive(Debug, Parser)]
#[command(name = "jcr", version, args_override_self = true)]
#[command(about = "Joint coverage regions for parameters and unobserved outcomes")]
pub struct Cli {
    /// Worker threads for parallel trials (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Plain-text key=value file supplying defaults for the subcommand flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a region and write it as CSV or JSON
    Region(RegionArgs),
    /// Monte-Carlo coverage of a method on synthetic data
    Simulate(SimulateArgs),
    /// Prediction by projecting a JCR in the two-stage normal model
    Project(ProjectArgs),
    /// Regions and coverage for the two-task problem
    Multitask(MultitaskArgs),
    /// Coverage on outcomes simulated from a fit to a CSV dataset
    SemiEmpirical(SemiArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionMethod {
    /// Normal-mean band indexed by omega
    Omega,
    /// Student-t band (y_te - x_te θ)/S
    GaussianPivot,
    /// Classical t confidence interval (vertical strip)
    Confidence,
    /// Classical prediction interval (horizontal band)
    Prediction,
    /// |y_te - x_te θ| <= sqrt(F) S
    FPivot,
    /// Product of confidence and prediction intervals
    Intersection,
    /// Residual-quantile band from the cyclic-shift group
    CyclicShift,
    /// Randomized permutation region
    Permutation,
    /// One-parameter t band for c'θ with several features
    Highdim,
}

impl RegionMethod {
    fn stochastic(self) -> bool {
        matches!(self, RegionMethod::Permutation)
    }
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Construction to run
    #[arg(long, value_enum)]
    pub method: RegionMethod,
    /// Miscoverage level α
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Sample size for synthetic data
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// True parameter for synthetic data
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Test input x_te for synthetic data
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub x_te: f64,
    /// Noise law for synthetic data: normal, hetero, cauchy, uniform, or e.g. normal(0,2)
    #[arg(long, default_value = "normal")]
    pub noise: String,
    /// Omega weight for the omega family (number or inf)
    #[arg(long, default_value = "inf", allow_negative_numbers = true)]
    pub omega: String,
    /// Sampled transforms K for the permutation region
    #[arg(long = "K", alias = "k", default_value_t = 500)]
    pub k: usize,
    /// Seed (default 0 for analytic methods; required for permutation)
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV data file instead of synthetic data
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Outcome column in --data
    #[arg(long, default_value = "y")]
    pub outcome: String,
    /// Comma-separated feature columns in --data
    #[arg(long, default_value = "x", value_delimiter = ',')]
    pub features: Vec<String>,
    /// Coefficient index c selects for highdim
    #[arg(long, default_value_t = 0)]
    pub coefficient: usize,
    /// Grid points per axis
    #[arg(long, default_value_t = crate::region::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// θ window LO HI (default: 6 standard errors around the estimate)
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    pub theta_window: Option<Vec<f64>>,
    /// y_te window LO HI (default: covers the region over the θ window)
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    pub y_window: Option<Vec<f64>>,
    /// Output file for the rasterized region (.csv or .json)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format, overriding the extension of --out
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Method: intersection, gaussian-pivot, cyclic-shift, permutation, omega-family, projection, multitask, group-jcr
    #[arg(long)]
    pub method: String,
    /// Noise law: normal, hetero, cauchy, uniform, or with parameters
    #[arg(long, default_value = "normal")]
    pub noise: String,
    /// Sample size n
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Miscoverage level α
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Number of independent trials
    #[arg(long, default_value_t = 2000)]
    pub trials: u64,
    /// Seed (required)
    #[arg(long)]
    pub seed: Option<u64>,
    /// True parameter (default 1 for regression, 0 otherwise)
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Test input x_te
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub x_te: f64,
    /// Sampled transforms K
    #[arg(long = "K", alias = "k", default_value_t = 500)]
    pub k: usize,
    /// Omega for omega-family (number or inf; default -n)
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<String>,
    /// Group for group-jcr
    #[arg(long, default_value = "permutation")]
    pub group: String,
    /// Noise scale σ for projection
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Parameter window LO HI for projection
    #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-0.2, 0.2])]
    pub theta_window: Vec<f64>,
    /// Report output file (JSON)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Parameter window LO HI
    #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-0.2, 0.2])]
    pub theta_window: Vec<f64>,
    /// Noise scale σ
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Observed x₁
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub x1: f64,
    /// Miscoverage level α
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Coverage trials (0 = widths only)
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    /// True parameter for the coverage run
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Seed (required when --trials > 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (JSON)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MultitaskArgs {
    /// Observed x₁ for the region summary
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub x1: f64,
    /// Miscoverage level α
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Coverage trials (0 = regions only)
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    /// True parameter for the coverage run
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Seed (required when --trials > 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (JSON)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SemiArgs {
    /// Input CSV with a header row
    #[arg(long)]
    pub csv: PathBuf,
    /// Outcome column
    #[arg(long)]
    pub outcome: String,
    /// Comma-separated feature columns
    #[arg(long, value_delimiter = ',', required = true)]
    pub features: Vec<String>,
    /// Rows in the preliminary split
    #[arg(long)]
    pub prelim: usize,
    /// Number of trials
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Miscoverage level α
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Comma-separated methods
    #[arg(long, value_delimiter = ',', default_value = "gaussian-pivot,cyclic-shift,permutation")]
    pub methods: Vec<String>,
    /// Seed (required)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampled transforms K
    #[arg(long = "K", alias = "k", default_value_t = 1000)]
    pub k: usize,
    /// Keep raw columns instead of centering them
    #[arg(long)]
    pub no_center: bool,
    /// Coefficient index for one-param-highdim
    #[arg(long, default_value_t = 0)]
    pub coefficient: usize,
    /// Report output file (JSON array)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| JcrError::invalid(format!("--seed is required for {what}")))
}

fn window(v: &Option<Vec<f64>>, count: usize) -> Result<Option<Axis>> {
    v.as_ref().map(|w| Axis::new(w[0], w[1], count)).transpose()
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| JcrError::io("<stdout>", e))
}

fn regression_data(a: &RegionArgs, seed: u64) -> Result<RegressionData> {
    if let Some(path) = &a.data {
        let table = load_table(path, &a.outcome, &a.features)?;
        let n = table.y.len();
        if a.features.is_empty() {
            return Err(JcrError::invalid("at least one feature column is required"));
        }
        if n < 3 {
            return Err(JcrError::invalid("need at least three rows"));
        }
        // The last row is the test point; its outcome is treated as unobserved.
        let p = table.x[0].len();
        let rows = &table.x[..n - 1];
        let x = nalgebra::DMatrix::from_fn(n - 1, p, |i, j| rows[i][j]);
        let y = nalgebra::DVector::from_column_slice(&table.y[..n - 1]);
        return RegressionData::new(x, y, nalgebra::DVector::from_column_slice(&table.x[n - 1]), Some(table.y[n - 1]));
    }
    let noise: NoiseSpec = a.noise.parse()?;
    let x = design(a.n, seed);
    let e = gen_noise(&noise, a.n + 1, seed)?;
    let y: Vec<f64> = x.iter().zip(&e).map(|(x, e)| x * a.theta + e).collect();
    RegressionData::univariate(&x, &y, a.x_te, Some(a.x_te * a.theta + e[a.n]))
}

fn analytic_windows(region: &AnalyticRegion, theta: (f64, f64), a: &RegionArgs) -> Result<(Axis, Axis)> {
    let t = window(&a.theta_window, a.resolution)?.map_or_else(|| Axis::new(theta.0, theta.1, a.resolution), Ok)?;
    if let Some(y) = window(&a.y_window, a.resolution)? {
        return Ok((t, y));
    }
    let (lo, hi) = match region {
        AnalyticRegion::Band(b) => {
            let ends = [t.lo(), t.hi()].map(|th| b.slope * th + b.intercept);
            let lo = ends[0].min(ends[1]) + if b.lower.is_finite() { b.lower } else { -b.width().min(10.0) };
            let hi = ends[0].max(ends[1]) + if b.upper.is_finite() { b.upper } else { b.width().min(10.0) };
            (lo, hi)
        }
        AnalyticRegion::Strip(s) => (-(s.upper - s.lower).max(1.0) * 5.0, (s.upper - s.lower).max(1.0) * 5.0),
    };
    let pad = 0.1 * (hi - lo).max(1e-6);
    Ok((t, Axis::new(lo - pad, hi + pad, a.resolution)?))
}

fn cmd_region(a: &RegionArgs, out: &mut dyn Write) -> Result<()> {
    if a.method.stochastic() && a.seed.is_none() {
        return Err(JcrError::invalid("--seed is required for the permutation region"));
    }
    let seed = a.seed.unwrap_or(0);
    let mut grid: Option<GridRegion> = None;
    if a.method == RegionMethod::Omega {
        let y: Vec<f64> = match &a.data {
            // The normal-mean model only reads the outcome column.
            Some(path) => load_table(path, &a.outcome, &[])?.y,
            None => {
                let noise: NoiseSpec = a.noise.parse()?;
                gen_noise(&noise, a.n, seed)?.iter().map(|e| a.theta + e).collect()
            }
        };
        let omega: Omega = a.omega.parse()?;
        let band = normal_mean_omega_jcr(&y, omega, a.alpha)?;
        let region = AnalyticRegion::Band(band);
        emit(out, &analytic_json(&region))?;
        if a.out.is_some() {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let half = 6.0 / (a.n as f64).sqrt();
            let (t, yg) = analytic_windows(&region, (mean - half, mean + half), a)?;
            grid = Some(region.rasterize(t, yg));
        }
    } else {
        let data = regression_data(a, seed)?;
        let scalar_grids = || -> Result<(Axis, Axis)> {
            let (t, y) = default_grids(&data, a.resolution)?;
            Ok((
                window(&a.theta_window, a.resolution)?.unwrap_or(t),
                window(&a.y_window, a.resolution)?.unwrap_or(y),
            ))
        };
        let analytic = match a.method {
            RegionMethod::GaussianPivot => Some(weighted_t_band(&data, &WeightVector::gaussian_pivot(data.n()), a.alpha)?),
            RegionMethod::Confidence => Some(weighted_t_band(&data, &WeightVector::confidence(&data), a.alpha)?),
            RegionMethod::Prediction => Some(weighted_t_band(&data, &WeightVector::prediction(&data), a.alpha)?),
            RegionMethod::FPivot => Some(AnalyticRegion::Band(f_pivot_jcr(&data, a.alpha)?.band()?)),
            RegionMethod::Highdim => {
                let mut c = vec![0.0; data.p()];
                if a.coefficient >= c.len() {
                    return Err(JcrError::invalid(format!("coefficient {} out of range for p = {}", a.coefficient, c.len())));
                }
                c[a.coefficient] = 1.0;
                Some(one_param_highdim_jcr(&data, &c, a.alpha)?)
            }
            _ => None,
        };
        if let Some(region) = analytic {
            emit(out, &analytic_json(&region))?;
            if a.out.is_some() {
                let (t, y) = if data.p() == 1 {
                    scalar_grids()?
                } else {
                    let fit = data.ols()?;
                    let th = fit.theta_hat[a.coefficient];
                    let half = 6.0 * fit.s().max(1e-9);
                    analytic_windows(&region, (th - half, th + half), a)?
                };
                grid = Some(region.rasterize(t, y));
            }
        } else {
            let (t, y) = scalar_grids()?;
            let g = match a.method {
                RegionMethod::Intersection => {
                    let r = intersection_jcr(&data, a.alpha)?;
                    emit(out, &serde_json::to_string(&r)?)?;
                    r.rasterize(t, y)
                }
                RegionMethod::CyclicShift => CyclicShiftJcr::symmetric(&data, a.alpha)?.region(t, y),
                RegionMethod::Permutation => PermutationJcr::new(&data, a.alpha, a.k, seed)?.region(t, y),
                _ => unreachable!("analytic methods handled above"),
            };
            emit(out, &format!("{} of {} cells inside", g.count_inside(), g.mask().len()))?;
            grid = Some(g);
        }
    }
    if let (Some(path), Some(g)) = (&a.out, grid) {
        let format = match &a.format {
            Some(f) => f.parse()?,
            None => ExportFormat::from_path(path),
        };
        export_region(&g, path, format)?;
    }
    Ok(())
}

fn write_reports(reports: &[CoverageReport], path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    for r in reports {
        emit(out, &r.summary())?;
    }
    if let Some(p) = path {
        let text = if reports.len() == 1 {
            reports[0].to_json()
        } else {
            serde_json::to_string_pretty(reports)?
        };
        write_text(p, &(text + "\n"))?;
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let seed = need_seed(a.seed, "simulate")?;
    let method: Method = a.method.parse()?;
    let mut cfg = SimConfig::table1(method, a.noise.parse()?, a.alpha, a.trials, seed);
    cfg.n = a.n;
    cfg.theta = a.theta;
    cfg.x_te = a.x_te;
    cfg.k = a.k;
    cfg.omega = a.omega.as_deref().map(|s| s.parse::<Omega>().map(OmegaSetting::from)).transpose()?;
    cfg.group = a.group.parse::<GroupKind>()?;
    cfg.sigma = a.sigma;
    cfg.theta_window = (a.theta_window[0], a.theta_window[1]);
    let reports = run_coverage_sim(&cfg)?;
    write_reports(&reports, a.out.as_deref(), out)
}

fn cmd_project(a: &ProjectArgs, out: &mut dyn Write) -> Result<()> {
    let model = TwoStageModel::new((a.theta_window[0], a.theta_window[1]), a.sigma, a.x1)?;
    let widths = projection_widths(&model, a.alpha)?;
    let intervals = model.intervals(a.alpha)?;
    let mut doc = serde_json::json!({ "widths": widths, "intervals": intervals, "jcr": model.jcr(a.alpha)? });
    emit(out, &format!("widths: T_alpha {:.6}, T' {:.6}, T~ {:.6}", widths.t_alpha, widths.t_prime, widths.t_tilde))?;
    if a.trials > 0 {
        let seed = need_seed(a.seed, "a coverage run")?;
        let reports = projection_coverage(model.theta_window, a.sigma, a.theta, a.alpha, a.trials, seed)?;
        for r in &reports {
            emit(out, &r.summary())?;
        }
        doc["coverage"] = serde_json::to_value(reports)?;
    }
    if let Some(p) = &a.out {
        write_text(p, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    Ok(())
}

fn cmd_multitask(a: &MultitaskArgs, out: &mut dyn Write) -> Result<()> {
    let regions = multitask_regions(a.x1, a.alpha)?;
    let mut doc = serde_json::json!({ "regions": regions });
    if a.trials > 0 {
        let seed = need_seed(a.seed, "a coverage run")?;
        let reports = multitask_coverage(a.theta, a.alpha, a.trials, seed)?;
        for r in &reports {
            emit(out, &r.summary())?;
        }
        doc["coverage"] = serde_json::to_value(reports)?;
    } else {
        emit(out, &regions.summary_json())?;
    }
    if let Some(p) = &a.out {
        write_text(p, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    Ok(())
}

fn cmd_semi(a: &SemiArgs, out: &mut dyn Write) -> Result<()> {
    let seed = need_seed(a.seed, "semi-empirical")?;
    let features: Vec<&str> = a.features.iter().map(String::as_str).collect();
    let mut cfg = SemiEmpiricalConfig::new(&a.csv, &a.outcome, &features, a.prelim, seed);
    cfg.trials = a.trials;
    cfg.alpha = a.alpha;
    cfg.methods = a.methods.iter().map(|m| m.parse()).collect::<Result<_>>()?;
    cfg.k = a.k;
    cfg.center = !a.no_center;
    cfg.coefficient = a.coefficient;
    let reports = run_semi_empirical(&cfg)?;
    for r in &reports {
        emit(out, &r.summary())?;
    }
    if let Some(p) = &a.out {
        write_text(p, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    }
    Ok(())
}

/// Expands `--config FILE` into flags placed right after the subcommand, so
/// explicit command-line flags given later take precedence.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let (path, consumed) = match args[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => match args.get(pos + 1) {
            Some(p) => (p.clone(), 2),
            None => return Ok(args),
        },
    };
    let text = crate::harness::read_text(Path::new(&path))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| JcrError::Parse {
            row: lineno + 1,
            message: format!("expected key=value, got {line:?}"),
        })?;
        let key = key.trim().replace('_', "-");
        extra.push(format!("--{key}"));
        extra.extend(value.split_whitespace().map(str::to_string));
    }
    let mut rest: Vec<String> = args[..pos].iter().chain(&args[pos + consumed..]).cloned().collect();
    let sub = rest
        .iter()
        .position(|a| ["region", "simulate", "project", "multitask", "semi-empirical"].contains(&a.as_str()))
        .ok_or_else(|| JcrError::invalid("--config needs a subcommand"))?;
    rest.splice(sub + 1..sub + 1, extra);
    Ok(rest)
}

fn exit_code(err: &JcrError) -> i32 {
    match err {
        JcrError::InvalidParameter(_)
        | JcrError::Unknown { .. }
        | JcrError::InvalidGrid(_)
        | JcrError::OutOfWindow { .. }
        | JcrError::GroupTooLarge { .. } => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors go to `err`.
pub fn run(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let mut buf: Vec<u8> = Vec::new();
    let body = |sink: &mut Vec<u8>| match &cli.command {
        Command::Region(a) => cmd_region(a, sink),
        Command::Simulate(a) => cmd_simulate(a, sink),
        Command::Project(a) => cmd_project(a, sink),
        Command::Multitask(a) => cmd_multitask(a, sink),
        Command::SemiEmpirical(a) => cmd_semi(a, sink),
    };
    let result = if cli.threads > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
            Ok(pool) => pool.install(|| body(&mut buf)),
            Err(e) => Err(JcrError::invalid(e.to_string())),
        }
    } else {
        body(&mut buf)
    };
    let _ = out.write_all(&buf);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("jcr").chain(args.iter().copied()).map(String::from).collect();
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn omega_minus_n_is_horizontal() {
        let (code, out, _) = call(&["region", "--method", "omega", "--omega", "-100", "--n", "100", "--alpha", "0.1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
        assert_eq!(v["slope"], 0.0);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["region"]).0, 2);
        assert_eq!(call(&["simulate", "--method", "permutation"]).0, 2);
        assert_eq!(call(&["region", "--method", "permutation", "--n", "20"]).0, 2);
        assert_eq!(call(&["simulate", "--method", "nope", "--seed", "1"]).0, 2);
        let (code, out, _) = call(&["simulate", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("--trials") && out.contains("default: 2000"));
    }

    #[test]
    fn missing_input_file_exits_1() {
        let (code, _, err) = call(&[
            "semi-empirical", "--csv", "/nonexistent.csv", "--outcome", "y", "--features", "x", "--prelim", "5", "--seed", "1",
        ]);
        assert_eq!(code, 1, "{err}");
    }

    #[test]
    fn config_file_supplies_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# projection\ntheta_window = -0.3 0.3\nalpha=0.2\n").unwrap();
        let (code, out, err) = call(&["project", "--config", cfg.to_str().unwrap(), "--alpha", "0.1"]);
        assert_eq!(code, 0, "{err}");
        let q = crate::dist::normal_quantile(0.95);
        assert!(out.contains(&format!("T~ {:.6}", 2.0 * q + 0.6)), "{out}");
    }
}
