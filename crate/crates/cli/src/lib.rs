//! Batch driver for the tessellation, random-walk and percolation
//! experiments of `dlattice`.
//!
//! Exit codes: 0 on success, 2 on a configuration or usage error, 3 when a
//! valid configuration is rejected at run time.

pub mod config;
pub mod error;
pub mod experiments;
pub mod figure;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlattice::geometry::SpaceKind;
use dlattice::pointproc::{sample_kac_gaf, sample_palm_poisson, sample_poisson, PointSample, ProcessKind};
use dlattice::rng::derive_seed;
use dlattice::tess::{delaunay, voronoi_cells};
use dlattice::walk::{srw, srw_rolling, RollingParams, WalkTrace};

use config::ExperimentConfig;
use error::CliError;
use figure::{FigureKind, DEFAULT_DEGREE};
use output::{fmt_f64, prepare_out_dir, write_manifest, write_stats_csv, Manifest, ReplicaStore};

#[derive(Debug, Parser)]
#[command(name = "dlattice", version, about = "Poisson-Voronoi experiments in the Euclidean and hyperbolic plane")]
pub struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; replica r uses a seed derived from (seed, r).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for replica parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample point processes: one CSV and one JSON sidecar per replica.
    Sample(Overrides),
    /// Delaunay networks as JSON plus a per-replica summary CSV.
    Tessellate(Overrides),
    /// Simple random walks from the Palm root: traces and a speed table.
    Walk {
        #[command(flatten)]
        overrides: Overrides,
        /// Walk on one fixed window, censoring at its certified boundary,
        /// instead of on the whole plane.
        #[arg(long = "static")]
        static_window: bool,
    },
    /// Run a named experiment and write its stats table.
    Run {
        /// One of speed, degree, cellvol, tail, d1d2, percolation, folner,
        /// mtp, isoperimetric, ballgrowth.
        experiment: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Disk-model figure of the GAF zeros, the matched Poisson process, or both.
    Figure {
        #[arg(value_enum)]
        kind: FigureKind,
        /// Kac polynomial degree; also sets the matched Poisson parameters.
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Euclidean,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    Poisson,
    PalmPoisson,
    KacGaf,
}

/// Config fields settable from the command line.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub space: Option<SpaceArg>,
    #[arg(long, value_enum)]
    pub process: Option<ProcessArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long = "kac-degree")]
    pub kac_degree: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub window_radius: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub r_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub transport: Option<String>,
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(s) = self.space {
            c.space = match s {
                SpaceArg::Euclidean => SpaceKind::EuclideanPlane,
                SpaceArg::Hyperbolic => SpaceKind::HyperbolicPoincareDisk,
            };
        }
        let lambda = self.lambda.or(c.process.intensity()).unwrap_or(1.0);
        let degree = self.kac_degree.or(match c.process {
            ProcessKind::KacGaf { degree } => Some(degree),
            _ => None,
        });
        if let Some(p) = self.process {
            c.process = match p {
                ProcessArg::Poisson => ProcessKind::Poisson { lambda },
                ProcessArg::PalmPoisson => ProcessKind::PalmPoisson { lambda },
                ProcessArg::KacGaf => ProcessKind::KacGaf { degree: degree.unwrap_or(DEFAULT_DEGREE) },
            };
        }
        match &mut c.process {
            ProcessKind::Poisson { lambda: l } | ProcessKind::PalmPoisson { lambda: l } => {
                if self.kac_degree.is_some() {
                    return Err(CliError::config("--kac-degree applies only to process kac_gaf"));
                }
                *l = lambda;
            }
            ProcessKind::KacGaf { degree: d } => {
                if self.lambda.is_some() {
                    return Err(CliError::config("--lambda does not apply to process kac_gaf"));
                }
                if let Some(k) = degree {
                    *d = k;
                }
            }
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    c.$field = v.clone();
                })*
            };
        }
        set!(window_radius, replicas, steps, delta_grid, r_grid, t_grid);
        if let Some(t) = &self.transport {
            c.transport = Some(t.clone());
        }
        Ok(())
    }
}

/// Defaults, then the config file, then global flags, then subcommand flags.
pub fn resolve_config(cli: &Cli, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut c = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(o) = &cli.out {
        c.out_dir = o.clone();
    }
    overrides.apply(&mut c)?;
    if let Command::Run { experiment: Some(e), .. } = &cli.command {
        c.experiment = Some(e.clone());
    }
    c.validate()?;
    Ok(c)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let pool = match cli.jobs {
        Some(0) => return Err(CliError::config("--jobs must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Sample(o) => cmd_sample(&resolve_config(cli, o)?),
        Command::Tessellate(o) => cmd_tessellate(&resolve_config(cli, o)?),
        Command::Walk { overrides, static_window } => cmd_walk(&resolve_config(cli, overrides)?, *static_window),
        Command::Run { overrides, .. } => cmd_run(&resolve_config(cli, overrides)?),
        Command::Figure { kind, degree } => cmd_figure(&resolve_config(cli, &Overrides::default())?, *kind, *degree),
    })
}

fn sample_replica(c: &ExperimentConfig, r: u64) -> Result<PointSample, CliError> {
    let seed = derive_seed(c.seed, r);
    Ok(match c.process {
        ProcessKind::Poisson { lambda } => sample_poisson(c.space, lambda, c.window_radius, seed)?,
        ProcessKind::PalmPoisson { lambda } => sample_palm_poisson(c.space, lambda, c.window_radius, seed)?,
        ProcessKind::KacGaf { degree } => sample_kac_gaf(degree, seed)?,
    })
}

fn replica_name(stem: &str, r: u64, ext: &str) -> String {
    format!("{stem}_{r:04}.{ext}")
}

/// Writes `sample_NNNN.csv` (`x,y` rows) and `sample_NNNN.json` per replica.
pub fn cmd_sample(c: &ExperimentConfig) -> Result<(), CliError> {
    use rayon::prelude::*;
    let dir = prepare_out_dir(c)?;
    let files: Vec<Vec<String>> = (0..c.replicas)
        .into_par_iter()
        .map(|r| {
            let s = sample_replica(c, r)?;
            let (csv, json) = (replica_name("sample", r, "csv"), replica_name("sample", r, "json"));
            std::fs::write(dir.join(&csv), s.to_csv())?;
            let mut sidecar = serde_json::to_string_pretty(&s.sidecar())?;
            sidecar.push('\n');
            std::fs::write(dir.join(&json), sidecar)?;
            Ok(vec![csv, json])
        })
        .collect::<Result<_, CliError>>()?;
    write_manifest(&dir, &Manifest::new("sample", c, files.concat()))
}

/// Writes `network_NNNN.json` per replica and `tessellate.csv` with vertex,
/// edge and certified counts and certified means of degree and cell area.
pub fn cmd_tessellate(c: &ExperimentConfig) -> Result<(), CliError> {
    use rayon::prelude::*;
    let dir = prepare_out_dir(c)?;
    let rows: Vec<(String, [String; 6])> = (0..c.replicas)
        .into_par_iter()
        .map(|r| {
            let net = delaunay(&sample_replica(c, r)?)?;
            let name = replica_name("network", r, "json");
            std::fs::write(dir.join(&name), net.to_json())?;
            let cert: Vec<u32> = net.certified_ids().collect();
            let mean_degree = cert.iter().map(|&v| net.degree(v) as f64).sum::<f64>() / cert.len() as f64;
            let areas: Vec<f64> = voronoi_cells(&net).iter().filter(|x| x.certified).filter_map(|x| x.area).collect();
            let mean_area = areas.iter().sum::<f64>() / areas.len() as f64;
            let row = [
                r.to_string(),
                net.vertex_count().to_string(),
                net.edges().len().to_string(),
                cert.len().to_string(),
                fmt_f64(mean_degree),
                fmt_f64(mean_area),
            ];
            Ok((name, row))
        })
        .collect::<Result<_, CliError>>()?;
    let mut w =
        csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(dir.join("tessellate.csv"))?;
    w.write_record(["replica", "vertices", "edges", "certified", "mean_degree", "mean_cell_area"])?;
    for (_, row) in &rows {
        w.write_record(row)?;
    }
    w.flush()?;
    let mut outputs: Vec<String> = rows.into_iter().map(|(n, _)| n).collect();
    outputs.push("tessellate.csv".into());
    write_manifest(&dir, &Manifest::new("tessellate", c, outputs))
}

/// Writes `walk_NNNN.csv` traces of the largest step count and `walk.csv`
/// with the embedded speed at each checkpoint.
pub fn cmd_walk(c: &ExperimentConfig, static_window: bool) -> Result<(), CliError> {
    use rayon::prelude::*;
    let lambda = c.lambda()?;
    let n = *c.steps.iter().max().expect("validated nonempty");
    let params = RollingParams::for_intensity(c.space, lambda)?;
    let dir = prepare_out_dir(c)?;
    let traces: Vec<WalkTrace> = (0..c.replicas)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(c.seed, r);
            let trace = if static_window {
                let net = delaunay(&sample_palm_poisson(c.space, lambda, c.window_radius, seed)?)?;
                srw(&net, 0, n, derive_seed(seed, 1))?
            } else {
                srw_rolling(c.space, lambda, n, seed, &params)?
            };
            std::fs::write(dir.join(replica_name("walk", r, "csv")), trace.to_csv())?;
            Ok(trace)
        })
        .collect::<Result<_, CliError>>()?;
    let mut records = Vec::new();
    let mut checkpoints = c.steps.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    for &k in &checkpoints {
        let ok: Vec<f64> =
            traces.iter().filter(|t| t.steps() >= k).map(|t| t.embedded_displacements[k] / k as f64).collect();
        let censored = traces.iter().filter(|t| t.censored).count() as f64;
        let extras = vec![("censored".to_string(), censored)];
        let est = experiments::mean_triple(&ok);
        records.push(experiments::record("walk", k, est, ok.len(), traces.len() - ok.len(), extras)?);
    }
    write_stats_csv(&dir.join("walk.csv"), &records)?;
    let mut outputs: Vec<String> = (0..c.replicas).map(|r| replica_name("walk", r, "csv")).collect();
    outputs.push("walk.csv".into());
    let mut manifest = Manifest::new("walk", c, outputs);
    manifest.records = records;
    write_manifest(&dir, &manifest)
}

/// Runs the configured experiment, resuming from its replica log, and
/// writes `<experiment>.csv`.
pub fn cmd_run(c: &ExperimentConfig) -> Result<(), CliError> {
    let name = c.experiment.clone().ok_or_else(|| CliError::config("experiment is required for run"))?;
    let dir = prepare_out_dir(c)?;
    let hash = c.hash();
    let log = ReplicaStore::<()>::path(&dir, &hash);
    let start = Instant::now();
    let out = experiments::run_experiment(c, &log)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut records = out.records;
    for r in &mut records {
        r.wall_clock_s = elapsed;
    }
    let csv_name = format!("{name}.csv");
    write_stats_csv(&dir.join(&csv_name), &records)?;
    let log_name = log.file_name().expect("log file name").to_string_lossy().into_owned();
    let mut manifest = Manifest::new("run", c, vec![csv_name, log_name]);
    manifest.records = records;
    manifest.resumed_replicas = out.resumed;
    write_manifest(&dir, &manifest)
}

/// Writes `figure_<kind>.svg`.
pub fn cmd_figure(c: &ExperimentConfig, kind: FigureKind, degree: u32) -> Result<(), CliError> {
    let dir = prepare_out_dir(c)?;
    let (svg, _) = figure::render(kind, degree, c.seed)?;
    let name = format!("figure_{}.svg", kind.name());
    std::fs::write(dir.join(&name), svg)?;
    write_manifest(&dir, &Manifest::new("figure", c, vec![name]))
}
