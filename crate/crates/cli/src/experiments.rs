//! The `run` experiments. Each is a per-replica computation, logged so that
//! reruns resume, and a reduction of the replicas in index order into
//! [`StatsRecord`]s. Replica `r` always uses seeds derived from
//! `(config.seed, r)`, so results do not depend on scheduling.

use dlattice::amen::{
    boundary_ratio_estimate, coarsen_percolation, d1_d2_replica, d1_d2_report, d2_window, folner_quotient,
    isoperimetric_upper_bound, mtp_check, mtp_core_radius, mtp_sample, palm_root_cluster, root_cluster,
    unit_translations, D1D2Replica, MtpSample, Transport,
};
use dlattice::geometry::{Point, SpaceKind};
use dlattice::pointproc::{check_window, sample_palm_poisson, sample_poisson, PointSample, ProcessKind};
use dlattice::rng::{derive_seed, derive_tagged};
use dlattice::stats::{linear_fit, mean_ci, ratio_ci, Estimate};
use dlattice::tess::{
    core_buffer, delaunay, root_cell_radius, tail_table, voronoi_cells, EmbeddedNetwork, TAIL_WINDOW_MARGIN,
};
use dlattice::walk::{graph_ball_containment, palm_graph_balls, srw_rolling, BallRecord, RollingParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{ReplicaStore, StatsRecord};

/// Monte Carlo points per Følner quotient.
pub const FOLNER_MC_POINTS: usize = 4000;

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<StatsRecord>,
    pub resumed: u64,
}

/// Runs `config.experiment`, resuming from the replica log at `log`.
pub fn run_experiment(config: &ExperimentConfig, log: &std::path::Path) -> Result<ExperimentOutput, CliError> {
    let name = config.experiment.as_deref().ok_or_else(|| CliError::config("experiment is required for run"))?;
    match name {
        "speed" => drive(&Speed::new(config)?, config, log),
        "degree" => drive(&CoreMoments::new(config, Moment::Degree)?, config, log),
        "cellvol" => drive(&CoreMoments::new(config, Moment::CellVolume)?, config, log),
        "tail" => drive(&Tail::new(config)?, config, log),
        "d1d2" => drive(&D1D2::new(config)?, config, log),
        "percolation" => drive(&Percolation::new(config)?, config, log),
        "folner" => drive(&Folner::new(config)?, config, log),
        "mtp" => drive(&Mtp::new(config)?, config, log),
        "isoperimetric" => drive(&Isoperimetric::new(config)?, config, log),
        "ballgrowth" => drive(&BallGrowth::new(config)?, config, log),
        other => Err(CliError::config(format!("experiment: unknown experiment {other:?}"))),
    }
}

trait Experiment: Sync {
    type Replica: Serialize + DeserializeOwned + Send;
    fn replica(&self, r: u64) -> Result<Self::Replica, CliError>;
    fn reduce(&self, replicas: &[Self::Replica]) -> Result<Vec<StatsRecord>, CliError>;
}

fn drive<E: Experiment>(e: &E, config: &ExperimentConfig, log: &std::path::Path) -> Result<ExperimentOutput, CliError> {
    let store = ReplicaStore::<E::Replica>::open(log)?;
    let resumed = store.completed() as u64;
    let reps = store.run(config.replicas, |r| e.replica(r))?;
    Ok(ExperimentOutput { records: e.reduce(&reps)?, resumed })
}

fn triple(e: &Estimate) -> (f64, f64, f64) {
    (e.estimate, e.ci_lo, e.ci_hi)
}

const NO_DATA: (f64, f64, f64) = (f64::NAN, f64::NAN, f64::NAN);

/// Mean interval, or an all-NaN triple when nothing survived.
pub(crate) fn mean_triple(values: &[f64]) -> (f64, f64, f64) {
    mean_ci(values).map_or(NO_DATA, |e| triple(&e))
}

pub(crate) fn record(
    name: &str,
    param: impl ToString,
    est: (f64, f64, f64),
    replicas: usize,
    discarded: usize,
    extras: Vec<(String, f64)>,
) -> Result<StatsRecord, CliError> {
    if est.0.is_nan() {
        // nothing to estimate: keep the row, skip the interval check
        return Ok(StatsRecord {
            estimator: name.to_string(),
            param: param.to_string(),
            estimate: est.0,
            ci_lo: est.1,
            ci_hi: est.2,
            replicas,
            discarded,
            extras,
            wall_clock_s: 0.0,
        });
    }
    StatsRecord::new(name, param, est, replicas, discarded, extras)
}

fn extra(name: &str, v: f64) -> (String, f64) {
    (name.to_string(), v)
}

/// A finite `f64` or nothing; JSON has no infinities.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn sample_window(config: &ExperimentConfig, seed: u64) -> Result<PointSample, CliError> {
    Ok(match config.process {
        ProcessKind::Poisson { lambda } => sample_poisson(config.space, lambda, config.window_radius, seed)?,
        ProcessKind::PalmPoisson { lambda } => sample_palm_poisson(config.space, lambda, config.window_radius, seed)?,
        ProcessKind::KacGaf { .. } => return Err(CliError::config("process.kind kac_gaf is not supported by run")),
    })
}

fn window_network(config: &ExperimentConfig, r: u64) -> Result<EmbeddedNetwork, CliError> {
    Ok(delaunay(&sample_window(config, derive_seed(config.seed, r))?)?)
}

/// Statistics core `window - core_buffer`, checked to be nonempty.
fn stats_core(config: &ExperimentConfig, lambda: f64) -> Result<f64, CliError> {
    let core = config.window_radius - core_buffer(config.space, lambda);
    if core <= 0.0 {
        return Err(CliError::config(format!(
            "window_radius {} leaves no core inside the buffer {}",
            config.window_radius,
            core_buffer(config.space, lambda)
        )));
    }
    Ok(core)
}

struct Speed {
    space: SpaceKind,
    lambda: f64,
    steps: Vec<usize>,
    seed: u64,
    params: RollingParams,
}

#[derive(Serialize, Deserialize)]
struct SpeedReplica {
    censored: bool,
    /// `d(X_n, X_0)` at each checkpoint `n`.
    displacements: Vec<f64>,
}

impl Speed {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        let lambda = c.lambda()?;
        let mut steps = c.steps.clone();
        steps.sort_unstable();
        steps.dedup();
        Ok(Speed {
            space: c.space,
            lambda,
            steps,
            seed: c.seed,
            params: RollingParams::for_intensity(c.space, lambda)?,
        })
    }
}

impl Experiment for Speed {
    type Replica = SpeedReplica;

    fn replica(&self, r: u64) -> Result<SpeedReplica, CliError> {
        let n = *self.steps.last().expect("validated nonempty");
        let trace = srw_rolling(self.space, self.lambda, n, derive_seed(self.seed, r), &self.params)?;
        if trace.censored {
            return Ok(SpeedReplica { censored: true, displacements: Vec::new() });
        }
        Ok(SpeedReplica {
            censored: false,
            displacements: self.steps.iter().map(|&k| trace.embedded_displacements[k]).collect(),
        })
    }

    fn reduce(&self, reps: &[SpeedReplica]) -> Result<Vec<StatsRecord>, CliError> {
        let ok: Vec<&SpeedReplica> = reps.iter().filter(|r| !r.censored).collect();
        let discarded = reps.len() - ok.len();
        let means: Vec<f64> = (0..self.steps.len())
            .map(|i| ok.iter().map(|r| r.displacements[i]).sum::<f64>() / ok.len() as f64)
            .collect();
        let slope = if self.steps.len() >= 2 && !ok.is_empty() {
            let xs: Vec<f64> = self.steps.iter().map(|&n| (n as f64).ln()).collect();
            let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
            linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope)
        } else {
            f64::NAN
        };
        self.steps
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let speeds: Vec<f64> = ok.iter().map(|r| r.displacements[i] / n as f64).collect();
                let extras = vec![extra("mean_displacement", means[i]), extra("log_slope", slope)];
                record("speed", n, mean_triple(&speeds), ok.len(), discarded, extras)
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Moment {
    Degree,
    CellVolume,
}

/// Mean degree or mean cell area over certified vertices of the statistics
/// core, pooled over replicas as a ratio estimator.
struct CoreMoments {
    config: ExperimentConfig,
    lambda: f64,
    core: f64,
    moment: Moment,
}

#[derive(Serialize, Deserialize)]
struct MomentReplica {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl CoreMoments {
    fn new(c: &ExperimentConfig, moment: Moment) -> Result<Self, CliError> {
        let lambda = c.lambda()?;
        Ok(CoreMoments { config: c.clone(), lambda, core: stats_core(c, lambda)?, moment })
    }
}

/// Degree and cell-area sums over the certified core of one network.
pub fn core_moments(net: &mut EmbeddedNetwork, core: f64) -> ((usize, f64, f64), (usize, f64, f64)) {
    net.restrict_core(core);
    let mut deg = (0, 0.0, 0.0);
    for v in net.certified_ids() {
        let d = net.degree(v) as f64;
        deg = (deg.0 + 1, deg.1 + d, deg.2 + d * d);
    }
    let mut area = (0, 0.0, 0.0);
    for a in voronoi_cells(net).iter().filter(|c| c.certified).filter_map(|c| c.area) {
        area = (area.0 + 1, area.1 + a, area.2 + a * a);
    }
    (deg, area)
}

impl Experiment for CoreMoments {
    type Replica = MomentReplica;

    fn replica(&self, r: u64) -> Result<MomentReplica, CliError> {
        let mut net = window_network(&self.config, r)?;
        let (deg, area) = core_moments(&mut net, self.core);
        let (count, sum, sum_sq) = if self.moment == Moment::Degree { deg } else { area };
        Ok(MomentReplica { count, sum, sum_sq })
    }

    fn reduce(&self, reps: &[MomentReplica]) -> Result<Vec<StatsRecord>, CliError> {
        let pairs: Vec<(f64, f64)> = reps.iter().map(|r| (r.sum, r.count as f64)).collect();
        let sq: Vec<(f64, f64)> = reps.iter().map(|r| (r.sum_sq, r.count as f64)).collect();
        let est = ratio_ci(&pairs).map_or(NO_DATA, |e| triple(&e));
        let second = ratio_ci(&sq).map_or(f64::NAN, |e| e.estimate);
        let certified: usize = reps.iter().map(|r| r.count).sum();
        let empty = reps.iter().filter(|r| r.count == 0).count();
        let name = if self.moment == Moment::Degree { "degree" } else { "cellvol" };
        let extras =
            vec![extra("certified", certified as f64), extra("second_moment", second), extra("core_radius", self.core)];
        Ok(vec![record(name, self.lambda, est, reps.len() - empty, empty, extras)?])
    }
}

/// Tail of the root cell radius against its calibrated envelope.
struct Tail {
    space: SpaceKind,
    lambda: f64,
    window: f64,
    seed: u64,
    grid: Vec<f64>,
}

impl Tail {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        let mut grid = c.r_grid.clone();
        grid.sort_by(f64::total_cmp);
        let needed = 2.0 * grid[grid.len() - 1] + TAIL_WINDOW_MARGIN;
        if c.window_radius < needed {
            return Err(CliError::config(format!(
                "window_radius {} must be at least twice the largest r_grid radius plus {TAIL_WINDOW_MARGIN} ({needed})",
                c.window_radius
            )));
        }
        Ok(Tail { space: c.space, lambda: c.lambda()?, window: c.window_radius, seed: c.seed, grid })
    }
}

impl Experiment for Tail {
    type Replica = Option<f64>;

    fn replica(&self, r: u64) -> Result<Option<f64>, CliError> {
        Ok(finite(root_cell_radius(self.space, self.lambda, self.window, derive_seed(self.seed, r))?))
    }

    fn reduce(&self, reps: &[Option<f64>]) -> Result<Vec<StatsRecord>, CliError> {
        let radii: Vec<f64> = reps.iter().map(|r| r.unwrap_or(f64::INFINITY)).collect();
        let table = tail_table(self.space, self.lambda, &self.grid, &radii);
        table
            .rows
            .iter()
            .map(|row| {
                let extras = vec![
                    extra("envelope", row.envelope),
                    extra("exceedances", row.exceedances as f64),
                    extra("constant", table.constant),
                    extra("rule_of_three", f64::from(u8::from(table.rule_of_three))),
                ];
                record("tail", row.radius, (row.probability, row.ci_lo, row.ci_hi), reps.len(), 0, extras)
            })
            .collect()
    }
}

/// Nearest-point laws of the coarse process, one row per δ.
struct D1D2 {
    space: SpaceKind,
    seed: u64,
    deltas: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct D1D2Json {
    d1: Option<f64>,
    gap: Option<f64>,
    ball_checks: usize,
    ball_violations: usize,
}

impl D1D2 {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        for &d in &c.delta_grid {
            let w = d2_window(c.space, d);
            if check_window(c.space, w).is_err() {
                return Err(CliError::config(format!(
                    "delta_grid entry {d} needs a window of radius {w} beyond the cap"
                )));
            }
        }
        Ok(D1D2 { space: c.space, seed: c.seed, deltas: c.delta_grid.clone() })
    }
}

impl Experiment for D1D2 {
    type Replica = Vec<D1D2Json>;

    fn replica(&self, r: u64) -> Result<Vec<D1D2Json>, CliError> {
        self.deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let x = d1_d2_replica(self.space, d, derive_seed(self.seed, i as u64), r)?;
                Ok(D1D2Json {
                    d1: finite(x.d1),
                    gap: finite(x.gap),
                    ball_checks: x.ball_checks,
                    ball_violations: x.ball_violations,
                })
            })
            .collect()
    }

    fn reduce(&self, reps: &[Vec<D1D2Json>]) -> Result<Vec<StatsRecord>, CliError> {
        self.deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let xs: Vec<D1D2Replica> = reps
                    .iter()
                    .map(|r| D1D2Replica {
                        d1: r[i].d1.unwrap_or(f64::INFINITY),
                        gap: r[i].gap.unwrap_or(f64::INFINITY),
                        ball_checks: r[i].ball_checks,
                        ball_violations: r[i].ball_violations,
                    })
                    .collect();
                let rep = d1_d2_report(self.space, d, &xs)?;
                let d1s: Vec<f64> = xs.iter().map(|x| x.d1).filter(|x| x.is_finite()).collect();
                let extras = vec![
                    extra("ks_distance", rep.ks_distance),
                    extra("ks_critical_99", rep.ks_critical_99),
                    extra("gap_violations", rep.gap_violations as f64),
                    extra("ball_checks", rep.ball_checks as f64),
                    extra("ball_violations", rep.ball_violations as f64),
                    extra("window_radius", rep.window_radius),
                ];
                record("d1d2", d, mean_triple(&d1s), xs.len() - rep.unrealized, rep.unrealized, extras)
            })
            .collect()
    }
}

/// Root-cluster boundary ratio of the δ-coarsening on the lazily revealed
/// Palm field; the same base field serves every δ of a replica.
struct Percolation {
    space: SpaceKind,
    lambda: f64,
    seed: u64,
    deltas: Vec<f64>,
    params: RollingParams,
}

#[derive(Serialize, Deserialize)]
struct ClusterJson {
    ratio: Option<f64>,
    size: usize,
    closed_degree: usize,
}

impl Percolation {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        let lambda = c.lambda()?;
        let params = RollingParams::for_intensity(c.space, lambda)?;
        Ok(Percolation { space: c.space, lambda, seed: c.seed, deltas: c.delta_grid.clone(), params })
    }
}

impl Experiment for Percolation {
    type Replica = Vec<ClusterJson>;

    fn replica(&self, r: u64) -> Result<Vec<ClusterJson>, CliError> {
        self.deltas
            .iter()
            .map(|&d| {
                let k = palm_root_cluster(self.space, self.lambda, d, derive_seed(self.seed, r), &self.params)?;
                Ok(ClusterJson { ratio: k.boundary_ratio(), size: k.size, closed_degree: k.root_closed_degree })
            })
            .collect()
    }

    fn reduce(&self, reps: &[Vec<ClusterJson>]) -> Result<Vec<StatsRecord>, CliError> {
        self.deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let ratios: Vec<Option<f64>> = reps.iter().map(|r| r[i].ratio).collect();
                let kept: Vec<&ClusterJson> = reps.iter().map(|r| &r[i]).filter(|c| c.ratio.is_some()).collect();
                let (est, replicas, discarded) = match boundary_ratio_estimate(d, &ratios) {
                    Ok(b) => ((b.estimate, b.ci_lo, b.ci_hi), b.replicas, b.discarded),
                    Err(_) => (NO_DATA, 0, reps.len()),
                };
                let closed: Vec<f64> = kept.iter().map(|c| c.closed_degree as f64).collect();
                let sizes: Vec<f64> = kept.iter().map(|c| c.size as f64).collect();
                let extras = vec![
                    extra("mean_closed_degree", mean_triple(&closed).0),
                    extra("mean_cluster_size", mean_triple(&sizes).0),
                ];
                record("percolation", d, est, replicas, discarded, extras)
            })
            .collect()
    }
}

/// Følner quotient of the root cluster's cell union under unit moves, on a
/// static window.
struct Folner {
    config: ExperimentConfig,
    deltas: Vec<f64>,
}

impl Folner {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        c.lambda()?;
        Ok(Folner { config: c.clone(), deltas: c.delta_grid.clone() })
    }
}

impl Experiment for Folner {
    type Replica = Vec<Option<f64>>;

    fn replica(&self, r: u64) -> Result<Vec<Option<f64>>, CliError> {
        let space = self.config.space;
        let net = window_network(&self.config, r)?;
        let cells = voronoi_cells(&net);
        let moves = unit_translations(space);
        self.deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let lab = coarsen_percolation(&net, d, derive_tagged(self.config.seed, "coarse", r))?;
                let k = root_cluster(&net, &lab, 0, Some(&cells))?;
                let Some(kc) = k.cells(&cells) else { return Ok(None) };
                let marks: Vec<Point> = k.vertices.iter().map(|&v| net.mark(v)).collect();
                let seed = derive_seed(derive_tagged(self.config.seed, "folner", r), i as u64);
                Ok(finite(folner_quotient(space, &kc, &marks, &moves, FOLNER_MC_POINTS, seed)?.quotient))
            })
            .collect()
    }

    fn reduce(&self, reps: &[Vec<Option<f64>>]) -> Result<Vec<StatsRecord>, CliError> {
        self.deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let q: Vec<f64> = reps.iter().filter_map(|r| r[i]).collect();
                record("folner", d, mean_triple(&q), q.len(), reps.len() - q.len(), vec![])
            })
            .collect()
    }
}

/// Sent against received mass for registry transports.
struct Mtp {
    config: ExperimentConfig,
    transports: Vec<Transport>,
    core: f64,
}

impl Mtp {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        let core = mtp_core_radius(c.space, c.lambda()?, c.window_radius);
        if core <= 0.0 {
            return Err(CliError::config(format!("window_radius {} leaves no transport core", c.window_radius)));
        }
        Ok(Mtp { config: c.clone(), transports: c.transports()?, core })
    }
}

impl Experiment for Mtp {
    type Replica = Vec<MtpSample>;

    fn replica(&self, r: u64) -> Result<Vec<MtpSample>, CliError> {
        let net = window_network(&self.config, r)?;
        self.transports.iter().map(|&t| Ok(mtp_sample(&net, t, self.core)?)).collect()
    }

    fn reduce(&self, reps: &[Vec<MtpSample>]) -> Result<Vec<StatsRecord>, CliError> {
        self.transports
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let samples: Vec<MtpSample> = reps.iter().map(|r| r[i]).collect();
                let rep = mtp_check(t, &samples)?;
                let half = dlattice::stats::Z95 * rep.difference_std_err;
                let extras = vec![
                    extra("sent", rep.sent),
                    extra("sent_std_err", rep.sent_std_err),
                    extra("received", rep.received),
                    extra("received_std_err", rep.received_std_err),
                    extra("agrees", f64::from(u8::from(rep.agrees()))),
                    extra("roots", samples.iter().map(|s| s.roots).sum::<usize>() as f64),
                    extra("excluded", samples.iter().map(|s| s.excluded).sum::<usize>() as f64),
                ];
                let est = (rep.difference, rep.difference - half, rep.difference + half);
                record("mtp", t.name(), est, rep.replicas, 0, extras)
            })
            .collect()
    }
}

/// Spectral sweep bound on the edge-isoperimetric constant of the core.
struct Isoperimetric {
    config: ExperimentConfig,
    core: f64,
}

#[derive(Serialize, Deserialize)]
struct IsoJson {
    bound: f64,
    core_size: usize,
    lambda2: f64,
}

impl Isoperimetric {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        Ok(Isoperimetric { config: c.clone(), core: stats_core(c, c.lambda()?)? })
    }
}

impl Experiment for Isoperimetric {
    type Replica = IsoJson;

    fn replica(&self, r: u64) -> Result<IsoJson, CliError> {
        let net = window_network(&self.config, r)?;
        let rep = isoperimetric_upper_bound(&net, self.core)?;
        Ok(IsoJson { bound: rep.bound, core_size: rep.core_size, lambda2: rep.lambda2 })
    }

    fn reduce(&self, reps: &[IsoJson]) -> Result<Vec<StatsRecord>, CliError> {
        let bounds: Vec<f64> = reps.iter().map(|r| r.bound).collect();
        let sizes: Vec<f64> = reps.iter().map(|r| r.core_size as f64).collect();
        let l2: Vec<f64> = reps.iter().map(|r| r.lambda2).collect();
        let extras = vec![
            extra("core_radius", self.core),
            extra("mean_core_size", mean_triple(&sizes).0),
            extra("mean_lambda2", mean_triple(&l2).0),
        ];
        Ok(vec![record("isoperimetric", self.config.window_radius, mean_triple(&bounds), reps.len(), 0, extras)?])
    }
}

/// Graph-ball growth and embedded containment on the lazy Palm field.
struct BallGrowth {
    space: SpaceKind,
    lambda: f64,
    seed: u64,
    radii: Vec<u32>,
    t_grid: Vec<f64>,
    params: RollingParams,
}

impl BallGrowth {
    fn new(c: &ExperimentConfig) -> Result<Self, CliError> {
        let lambda = c.lambda()?;
        let radii = c
            .r_grid
            .iter()
            .map(|&r| {
                if r.fract() == 0.0 && (1.0..=64.0).contains(&r) {
                    Ok(r as u32)
                } else {
                    Err(CliError::config(format!("r_grid entries must be integers in 1..=64 for ballgrowth, got {r}")))
                }
            })
            .collect::<Result<_, _>>()?;
        let params = RollingParams::for_intensity(c.space, lambda)?;
        Ok(BallGrowth { space: c.space, lambda, seed: c.seed, radii, t_grid: c.t_grid.clone(), params })
    }
}

impl Experiment for BallGrowth {
    type Replica = Vec<BallRecord>;

    fn replica(&self, r: u64) -> Result<Vec<BallRecord>, CliError> {
        Ok(palm_graph_balls(
            self.space,
            self.lambda,
            &self.radii,
            &self.t_grid,
            derive_seed(self.seed, r),
            &self.params,
        )?)
    }

    fn reduce(&self, reps: &[Vec<BallRecord>]) -> Result<Vec<StatsRecord>, CliError> {
        let table = graph_ball_containment(reps, &self.t_grid)?;
        table
            .rows
            .iter()
            .map(|row| {
                let extras = self
                    .t_grid
                    .iter()
                    .zip(&row.noncontainment)
                    .map(|(t, p)| (format!("noncontainment_t{t}"), *p))
                    .collect();
                let est = (row.growth, row.growth_ci_lo, row.growth_ci_hi);
                record("ballgrowth", row.radius, est, row.replicas, row.discarded, extras)
            })
            .collect()
    }
}
