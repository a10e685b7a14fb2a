use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qestim_core::bayes::{posterior, posterior_2d, ParameterGrid, Posterior, Sample};
use qestim_core::information::{
    barankin_bound, conjugate_order, crb, fisher_information, gaussian_limit_xi, generalized_fisher,
};
use qestim_core::mle::mle_estimate;
use qestim_core::model::DiscreteModel;
use qestim_core::montecarlo::ExperimentConfig;
use serde::{Serialize, Serializer};

use crate::config::SweepSettings;
use crate::error::{CliError, Result};
use crate::io::{
    joint_posterior_records, posterior_records, read_counts, write_csv, write_json, BiasRecord,
    BoundRecord, CsvRecord, EstimateRecord, FisherRecord, HolevoRecord, SweepRecord,
};
use crate::manifest::RunManifest;
use crate::models::{default_grid, ModelSettings, ModelSpec};
use crate::parallel::{run_pgh_curve, run_sweep, thread_pool};

/// Above this fraction of degenerate posteriors a sweep exits with status 3.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(
    name = "qestim",
    version,
    about = "Phase-estimation post-processing and bound checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized Fisher information F_α for each α.
    Fisher(FisherArgs),
    /// CRB, Barankin bounds and Gaussian limits of Ξ_β.
    Bounds(BoundsArgs),
    /// Posterior weights on the parameter grid.
    Posterior(PosteriorArgs),
    /// Bayesian or maximum-likelihood estimate from count data.
    Estimate(EstimateArgs),
    /// Monte Carlo Ξ_β sweep over measurement counts.
    Sweep(SweepArgs),
    /// Holevo variance of the particle-guess-heuristic feedback loop.
    Pgh(PghArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bayes,
    Mle,
}

fn serialize_display<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// noon, noon2, feedback or table:<path>
    #[arg(long, default_value = "noon")]
    #[serde(serialize_with = "serialize_display")]
    pub model: ModelSpec,
    /// Phase (or λ for tabulated models).
    #[arg(long, default_value_t = 0.2)]
    pub phi: f64,
    /// Fringe visibility of the noon model.
    #[arg(long, default_value_t = 0.9)]
    pub vis: f64,
    /// Controlled phase Φ of the feedback model.
    #[arg(long, default_value_t = 0.0)]
    pub feedback_phase: f64,
    #[arg(long, default_value_t = ParameterGrid::DEFAULT_PHASE_POINTS)]
    pub grid_points: usize,
}

impl ModelArgs {
    fn settings(&self) -> ModelSettings {
        ModelSettings {
            visibility: self.vis,
            feedback_phase: self.feedback_phase,
        }
    }

    fn build(&self) -> Result<Box<dyn DiscreteModel>> {
        self.model.build(self.settings())
    }

    fn params(&self) -> Vec<f64> {
        self.model.params(self.phi, self.settings())
    }

    fn param_index(&self, name: Option<&str>) -> Result<(usize, &'static str)> {
        let names = self.model.parameter_names();
        match name {
            None => Ok((0, names[0])),
            Some(n) => names
                .iter()
                .position(|p| *p == n)
                .map(|i| (i, names[i]))
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "model {} has no parameter {n:?}; expected one of {names:?}",
                        self.model
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Directory for output files and the run manifest; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FisherArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Orders α > 1; comma-separated or repeated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub alpha: Vec<f64>,
    /// Parameter to differentiate (defaults to the first).
    #[arg(long)]
    pub param: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Measurement counts.
    #[arg(long, value_delimiter = ',', default_value = "450")]
    pub m: Vec<usize>,
    /// Moment orders β > 1.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    pub beta: Vec<f64>,
    /// Quantum Fisher information per measurement, for a QCRB reference column.
    #[arg(long)]
    pub qfi: Option<f64>,
    #[arg(long)]
    pub param: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PosteriorArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Count data (`outcome,count` rows or one outcome per line); flat prior when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Visibility grid points for noon2.
    #[arg(long, default_value_t = ParameterGrid::DEFAULT_VISIBILITY_POINTS)]
    pub vis_points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Bayes)]
    pub method: Method,
    #[arg(long, default_value_t = ParameterGrid::DEFAULT_VISIBILITY_POINTS)]
    pub vis_points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Sweep configuration file; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub vis: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Worker threads (default: all cores); does not change the results.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write only the manifest.
    #[arg(long)]
    pub dry_run: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PghArgs {
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[arg(long, default_value_t = 200)]
    pub shots: usize,
    #[arg(long, default_value_t = 200)]
    pub repetitions: usize,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_SEED)]
    pub seed: u64,
    /// Shot counts at which to report; doubling from 1 up to --shots by default.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
    #[arg(long, default_value_t = ParameterGrid::DEFAULT_PHASE_POINTS)]
    pub grid_points: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Fisher(a) => cmd_fisher(&a, stdout),
        Command::Bounds(a) => cmd_bounds(&a, stdout),
        Command::Posterior(a) => cmd_posterior(&a, stdout),
        Command::Estimate(a) => cmd_estimate(&a, stdout),
        Command::Sweep(a) => cmd_sweep(&a, stdout),
        Command::Pgh(a) => cmd_pgh(&a, stdout),
    }
}

fn write_rows<T: CsvRecord>(w: impl Write, format: Format, rows: &[T]) -> Result<()> {
    match format {
        Format::Csv => write_csv(w, rows),
        Format::Json => write_json(w, rows),
    }
}

/// Writes `<dir>/<name>.<ext>` and returns the file name.
fn write_table<T: CsvRecord>(dir: &Path, name: &str, format: Format, rows: &[T]) -> Result<String> {
    let file = format!("{name}.{}", format.extension());
    let path = dir.join(&file);
    let f = fs::File::create(&path).map_err(CliError::file(&path))?;
    write_rows(std::io::BufWriter::new(f), format, rows)?;
    Ok(file)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::file(dir))
}

/// Rows go to stdout, or to a file plus manifest under `--out`.
fn emit<T: CsvRecord>(
    stdout: &mut dyn Write,
    output: &OutputArgs,
    name: &str,
    rows: &[T],
    manifest: impl FnOnce() -> Result<RunManifest>,
) -> Result<()> {
    match &output.out {
        None => write_rows(stdout, output.format, rows),
        Some(dir) => {
            create_dir(dir)?;
            let mut m = manifest()?;
            m.outputs.push(write_table(dir, name, output.format, rows)?);
            m.write(dir)?;
            writeln!(
                stdout,
                "{}",
                dir.join(name)
                    .with_extension(output.format.extension())
                    .display()
            )?;
            Ok(())
        }
    }
}

fn cmd_fisher(a: &FisherArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = a.model.build()?;
    let params = a.model.params();
    let (index, name) = a.model.param_index(a.param.as_deref())?;
    let rows = a
        .alpha
        .iter()
        .map(|&alpha| {
            Ok(FisherRecord {
                parameter: name.into(),
                alpha,
                f_alpha: generalized_fisher(model.as_ref(), &params, index, alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(stdout, &a.output, "fisher", &rows, || {
        RunManifest::new("fisher", None, a)
    })
}

fn cmd_bounds(a: &BoundsArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = a.model.build()?;
    let params = a.model.params();
    let (index, _) = a.model.param_index(a.param.as_deref())?;
    if let Some(q) = a.qfi {
        if !(q > 0.0 && q.is_finite()) {
            return Err(CliError::Usage(format!("--qfi must be positive, got {q}")));
        }
    }
    if a.m.contains(&0) {
        return Err(CliError::Usage("--m values must be at least 1".into()));
    }
    let fisher = fisher_information(model.as_ref(), &params, index)?;
    let mut rows = Vec::new();
    for &m in &a.m {
        for &beta in &a.beta {
            let alpha = conjugate_order(beta)?;
            let f_alpha = generalized_fisher(model.as_ref(), &params, index, alpha)?;
            let integer = beta.fract() == 0.0;
            rows.push(BoundRecord {
                measurements: m,
                beta,
                alpha,
                fisher,
                generalized_fisher: f_alpha,
                crb: crb(fisher, m).ok(),
                barankin_bound: barankin_bound(f_alpha, m, beta).ok(),
                gaussian_limit: integer
                    .then(|| gaussian_limit_xi(fisher, f_alpha, beta).ok())
                    .flatten(),
                qcrb: a.qfi.map(|q| 1.0 / (m as f64 * q)),
            });
        }
    }
    emit(stdout, &a.output, "bounds", &rows, || {
        RunManifest::new("bounds", None, a)
    })
}

fn load_sample(model: &dyn DiscreteModel, data: Option<&Path>) -> Result<Sample> {
    Ok(match data {
        Some(path) => Sample::from_histogram(read_counts(path, model.outcome_count())?),
        None => Sample::empty(model.outcome_count()),
    })
}

fn cmd_posterior(a: &PosteriorArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = a.model.build()?;
    let sample = load_sample(model.as_ref(), a.data.as_deref())?;
    let grid = default_grid(&a.model.model, model.as_ref(), a.model.grid_points)?;
    let manifest = || RunManifest::new("posterior", None, a);
    if a.model.model == ModelSpec::Noon2 {
        let vis = ParameterGrid::visibility(a.vis_points)?;
        let post = posterior_2d(model.as_ref(), &sample, grid, vis, None)?;
        emit(
            stdout,
            &a.output,
            "posterior",
            &joint_posterior_records(&post),
            manifest,
        )
    } else {
        let post = posterior(model.as_ref(), &sample, grid, None)?;
        emit(
            stdout,
            &a.output,
            "posterior",
            &posterior_records(&post),
            manifest,
        )
    }
}

fn crb_at(model: &dyn DiscreteModel, params: &[f64], index: usize, m: u64) -> Option<f64> {
    let f = fisher_information(model, params, index).ok()?;
    crb(f, usize::try_from(m).ok()?).ok()
}

fn bayes_record(
    name: &str,
    post: &Posterior,
    m: u64,
    crb: impl FnOnce(f64) -> Option<f64>,
) -> EstimateRecord {
    let estimate = post.bayes_estimate();
    let variance = post.variance();
    let note = if m == 0 {
        "no information: flat prior summary".to_string()
    } else {
        String::new()
    };
    EstimateRecord {
        parameter: name.into(),
        method: "bayes".into(),
        measurements: m,
        estimate: Some(estimate),
        variance: Some(variance),
        std_error: Some(variance.sqrt()),
        crb: if m == 0 { None } else { crb(estimate) },
        note,
    }
}

fn cmd_estimate(a: &EstimateArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = a.model.build()?;
    let sample = load_sample(model.as_ref(), Some(&a.data))?;
    let m: u64 = sample.histogram().iter().sum();
    let grid = default_grid(&a.model.model, model.as_ref(), a.model.grid_points)?;
    let settings = a.model.settings();
    let rows = match (a.method, &a.model.model) {
        (Method::Mle, ModelSpec::Noon2) => {
            return Err(CliError::Usage(
                "mle supports single-parameter models only; use --method bayes for noon2".into(),
            ))
        }
        (Method::Bayes, ModelSpec::Noon2) => {
            let vis = ParameterGrid::visibility(a.vis_points)?;
            let joint = posterior_2d(model.as_ref(), &sample, grid, vis, None)?;
            ["phi", "vis"]
                .iter()
                .enumerate()
                .map(|(axis, name)| Ok(bayes_record(name, &joint.marginal(axis)?, m, |_| None)))
                .collect::<Result<Vec<_>>>()?
        }
        (Method::Bayes, spec) => {
            let post = posterior(model.as_ref(), &sample, grid, None)?;
            let name = spec.parameter_names()[0];
            vec![bayes_record(name, &post, m, |x| {
                crb_at(model.as_ref(), &spec.params(x, settings), 0, m)
            })]
        }
        (Method::Mle, spec) => {
            let r = mle_estimate(model.as_ref(), sample.histogram(), grid)?;
            let se = r.standard_error();
            vec![EstimateRecord {
                parameter: spec.parameter_names()[0].into(),
                method: "mle".into(),
                measurements: m,
                estimate: Some(r.estimate),
                variance: se.map(|s| s * s),
                std_error: se,
                crb: crb_at(model.as_ref(), &spec.params(r.estimate, settings), 0, m),
                note: if se.is_none() {
                    "flat likelihood at the maximum".into()
                } else {
                    String::new()
                },
            }]
        }
    };
    emit(stdout, &a.output, "estimate", &rows, || {
        RunManifest::new("estimate", None, a)
    })
}

fn sweep_settings(a: &SweepArgs) -> Result<SweepSettings> {
    let mut s = match &a.config {
        Some(path) => SweepSettings::read(path)?,
        None => SweepSettings::default(),
    };
    if let Some(v) = a.phi {
        s.phi = v;
    }
    if let Some(v) = a.vis {
        s.visibility = v;
    }
    if let Some(v) = a.seed {
        s.seed = v;
    }
    if let Some(v) = a.repetitions {
        s.repetitions = v;
    }
    if let Some(v) = a.grid_points {
        s.grid_points = v;
    }
    Ok(s)
}

#[derive(Serialize)]
struct SweepEcho<'a> {
    settings: &'a SweepSettings,
    threads: Option<usize>,
    format: Format,
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = sweep_settings(a)?;
    let spec = settings.model_spec();
    let model = spec.build(settings.model_settings())?;
    let grid = default_grid(&spec, model.as_ref(), settings.grid_points)?;
    let config = settings.experiment(grid);
    config.validate()?;
    model.check_params(&[config.truth])?;

    create_dir(&a.out)?;
    let echo = SweepEcho {
        settings: &settings,
        threads: a.threads,
        format: a.format,
    };
    let mut manifest = RunManifest::new("sweep", Some(settings.seed), &echo)?;
    if a.dry_run {
        manifest.write(&a.out)?;
        writeln!(
            stdout,
            "{}",
            a.out.join(crate::manifest::MANIFEST_FILE).display()
        )?;
        return Ok(());
    }

    let pool = thread_pool(a.threads)?;
    let result = run_sweep(&pool, model.as_ref(), &config)?;
    let rows: Vec<SweepRecord> = result.rows.iter().map(SweepRecord::from).collect();
    let bias: Vec<BiasRecord> = result.bias.iter().map(BiasRecord::from).collect();
    manifest
        .outputs
        .push(write_table(&a.out, "sweep", a.format, &rows)?);
    manifest
        .outputs
        .push(write_table(&a.out, "bias", a.format, &bias)?);
    manifest.write(&a.out)?;
    for file in &manifest.outputs {
        writeln!(stdout, "{}", a.out.join(file).display())?;
    }
    if result.degenerate > 0 {
        log::warn!(
            "{} of {} posteriors were degenerate and excluded",
            result.degenerate,
            result.total_cells
        );
    }
    if result.degenerate_fraction() > MAX_DEGENERATE_FRACTION {
        return Err(CliError::Numerical(format!(
            "{} of {} posteriors were degenerate",
            result.degenerate, result.total_cells
        )));
    }
    Ok(())
}

/// 0 when there are no shots, else 1, 2, 4, … below `shots`, then `shots`.
pub fn default_checkpoints(shots: usize) -> Vec<usize> {
    if shots == 0 {
        return vec![0];
    }
    let mut c: Vec<usize> = std::iter::successors(Some(1usize), |&k| k.checked_mul(2))
        .take_while(|&k| k < shots)
        .collect();
    c.push(shots);
    c
}

fn cmd_pgh(a: &PghArgs, stdout: &mut dyn Write) -> Result<()> {
    let checkpoints = a
        .checkpoints
        .clone()
        .unwrap_or_else(|| default_checkpoints(a.shots));
    if let Some(c) = checkpoints.iter().find(|&&c| c > a.shots) {
        return Err(CliError::Usage(format!(
            "checkpoint {c} exceeds --shots {}",
            a.shots
        )));
    }
    if a.repetitions == 0 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    let grid = ParameterGrid::full_phase(a.grid_points)?;
    let pool = thread_pool(a.threads)?;
    let points = run_pgh_curve(&pool, a.phi, &checkpoints, a.repetitions, grid, a.seed)?;
    let rows: Vec<HolevoRecord> = points.iter().map(HolevoRecord::from).collect();
    emit(stdout, &a.output, "pgh", &rows, || {
        RunManifest::new("pgh", Some(a.seed), a)
    })
}
