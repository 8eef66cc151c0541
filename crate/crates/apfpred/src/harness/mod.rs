//! Episode runner: wires the world, sensor, forces, and a chosen predictor
//! into the step loop, records traces, and reproduces the detection-step
//! comparison across predictors.

mod trace;

pub use trace::{
    parse_trace_csv, plot_data, trace_to_csv, trace_to_json, JsonStep, JsonTrace, Outcome,
    SimTrace, StepRecord, CSV_HEADER,
};

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::apf::{
    self, attractive_force, detect_stuck, is_oscillating, is_parallel, repulsive_force, ApfParams,
    ForceDecomposition, VehicleState,
};
use crate::geom::Vec2;
use crate::num::Real;
use crate::predictor::{
    method1_predict, method2_predict, PredictionState, PredictorVerdict, VerdictStatus,
    DEFAULT_K_GRACE, DEFAULT_ROBOT_WIDTH,
};
use crate::sensor::{obstacle_vectors, occupied_fraction, scan, sensing_footprint, ScanResult};
use crate::world::{CellSet, OccupancyGrid, ScenarioConfig, WorldError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(WorldError),
    #[error("vehicle steps into an occupied or out-of-bounds cell at ({x}, {y})")]
    Collision { x: f64, y: f64 },
    #[error("sensing failed: {0}")]
    Sensing(WorldError),
    #[error("trace parse: {0}")]
    TraceParse(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl HarnessError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Which predictor runs alongside the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorChoice {
    None,
    Bayes,
    Method1,
    Method2,
}

impl PredictorChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictorChoice::None => "none",
            PredictorChoice::Bayes => "bayes",
            PredictorChoice::Method1 => "method1",
            PredictorChoice::Method2 => "method2",
        }
    }
}

impl std::str::FromStr for PredictorChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "bayes" => Ok(Self::Bayes),
            "method1" => Ok(Self::Method1),
            "method2" => Ok(Self::Method2),
            other => Err(format!(
                "unknown predictor {other:?} (expected none|bayes|method1|method2)"
            )),
        }
    }
}

/// Everything a predictor may inspect at one step, assembled by the runner.
pub struct PredictorContext<'a, T: Real> {
    pub grid: &'a OccupancyGrid<T>,
    pub config: &'a ScenarioConfig<T>,
    pub vehicle: &'a VehicleState<T>,
    pub scan: &'a ScanResult<T>,
    pub forces: &'a ForceDecomposition<T>,
    pub parallel: bool,
    pub alpha_frac: T,
    /// Occupied cells recognized so far, accumulated over all scans.
    pub known_obstacles: &'a CellSet,
}

/// Per-step predictor output for the trace.
pub struct StepReport<T: Real> {
    pub verdict: PredictorVerdict<T>,
    pub ledger: Option<(usize, usize)>,
    pub degenerate: bool,
}

impl<T: Real> StepReport<T> {
    fn monitoring() -> Self {
        Self {
            verdict: PredictorVerdict::monitoring(),
            ledger: None,
            degenerate: false,
        }
    }
}

/// Common interface the runner uses to drive any predictor.
pub trait EpisodePredictor<T: Real> {
    fn name(&self) -> &'static str;
    /// Observe one step (after sensing and force computation, before the
    /// vehicle moves) and report a verdict.
    fn step(&mut self, ctx: &PredictorContext<'_, T>) -> StepReport<T>;
}

/// Predictor that never signals; yields the plain stuck-step baseline.
struct NullPredictor;

impl<T: Real> EpisodePredictor<T> for NullPredictor {
    fn name(&self) -> &'static str {
        "none"
    }
    fn step(&mut self, _ctx: &PredictorContext<'_, T>) -> StepReport<T> {
        StepReport::monitoring()
    }
}

/// The recursive-filter predictor: arms on force opposition, tracks the
/// area ledger, and halts at the confidence threshold.
pub struct BayesPredictor<T: Real> {
    state: Option<PredictionState<T>>,
    tol: T,
    k_grace: usize,
}

impl<T: Real> BayesPredictor<T> {
    pub fn new() -> Self {
        Self {
            state: None,
            tol: T::of(apf::DEFAULT_PARALLEL_TOL),
            k_grace: DEFAULT_K_GRACE,
        }
    }

    pub fn state(&self) -> Option<&PredictionState<T>> {
        self.state.as_ref()
    }
}

impl<T: Real> Default for BayesPredictor<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> EpisodePredictor<T> for BayesPredictor<T> {
    fn name(&self) -> &'static str {
        "bayes"
    }

    fn step(&mut self, ctx: &PredictorContext<'_, T>) -> StepReport<T> {
        let cfg = ctx.config;
        let pose = ctx.vehicle.position;
        let params = ApfParams {
            xi: cfg.xi,
            eta: cfg.eta,
            rho0: cfg.rho0,
        };

        if let Some(st) = self.state.as_mut().filter(|s| s.active) {
            if st.revoke_if_broken(ctx.forces.f_att, ctx.forces.f_rep, self.tol, self.k_grace) {
                let ledger = Some((st.ra.len(), st.aoi.len()));
                self.state = None;
                return StepReport {
                    verdict: PredictorVerdict::bare(VerdictStatus::Revoked),
                    ledger,
                    degenerate: false,
                };
            }
            let fp = sensing_footprint(ctx.grid, pose, ctx.vehicle.heading, cfg.rho0);
            st.observe(&fp);
            let ratio = st.ra_ratio();
            st.bayes_update(ctx.alpha_frac, ratio);
            let verdict = st.check_halt(cfg.gamma, pose, cfg.delta);
            return StepReport {
                verdict,
                ledger: Some((st.ra.len(), st.aoi.len())),
                degenerate: st.degenerate,
            };
        }

        if !ctx.parallel {
            return StepReport::monitoring();
        }
        // Project the balance point from recognized obstacles only; cells
        // are visited in sorted order so the force sums are reproducible.
        let points: Vec<Vec2<T>> = ctx
            .known_obstacles
            .sorted_cells()
            .into_iter()
            .map(|c| ctx.grid.cell_center(c))
            .collect();
        let Some(x_lm) = apf::project_local_minimum(&points, pose, cfg.goal, params) else {
            return StepReport::monitoring();
        };
        let fp_t0 = sensing_footprint(ctx.grid, pose, ctx.vehicle.heading, cfg.rho0);
        let sa_xlm = sensing_footprint(ctx.grid, x_lm, ctx.vehicle.heading, cfg.rho0);
        match PredictionState::arm(
            ctx.grid,
            fp_t0,
            x_lm,
            &sa_xlm,
            pose,
            cfg.delta,
            ctx.vehicle.t,
        ) {
            Ok(mut st) => {
                // First filter sweep runs at the arming step itself.
                let ratio = st.ra_ratio();
                st.bayes_update(ctx.alpha_frac, ratio);
                let verdict = st.check_halt(cfg.gamma, pose, cfg.delta);
                let report = StepReport {
                    verdict,
                    ledger: Some((st.ra.len(), st.aoi.len())),
                    degenerate: st.degenerate,
                };
                self.state = Some(st);
                report
            }
            Err(_) => StepReport::monitoring(),
        }
    }
}

/// Free-passage baseline (Method I).
struct Method1Baseline<T> {
    robot_width: T,
}

impl<T: Real> EpisodePredictor<T> for Method1Baseline<T> {
    fn name(&self) -> &'static str {
        "method1"
    }
    fn step(&mut self, ctx: &PredictorContext<'_, T>) -> StepReport<T> {
        if method1_predict(ctx.scan, self.robot_width) {
            StepReport {
                verdict: PredictorVerdict::bare(VerdictStatus::Halt),
                ledger: None,
                degenerate: false,
            }
        } else {
            StepReport::monitoring()
        }
    }
}

/// Force-direction horizon baseline (Method II).
struct Method2Baseline;

impl<T: Real> EpisodePredictor<T> for Method2Baseline {
    fn name(&self) -> &'static str {
        "method2"
    }
    fn step(&mut self, ctx: &PredictorContext<'_, T>) -> StepReport<T> {
        let f_tot = ctx.forces.f_tot;
        if f_tot.norm_squared().is_zero() {
            return StepReport::monitoring();
        }
        if method2_predict(ctx.scan, f_tot, ctx.config.rho0) {
            StepReport {
                verdict: PredictorVerdict::bare(VerdictStatus::Halt),
                ledger: None,
                degenerate: false,
            }
        } else {
            StepReport::monitoring()
        }
    }
}

fn make_predictor<T: Real>(choice: PredictorChoice) -> Box<dyn EpisodePredictor<T>> {
    match choice {
        PredictorChoice::None => Box::new(NullPredictor),
        PredictorChoice::Bayes => Box::new(BayesPredictor::new()),
        PredictorChoice::Method1 => Box::new(Method1Baseline {
            robot_width: T::of(DEFAULT_ROBOT_WIDTH),
        }),
        PredictorChoice::Method2 => Box::new(Method2Baseline),
    }
}

/// Runs one episode to termination: goal reached, predictor halt, stuck
/// (zero total force or oscillation), or the step cap.
pub fn run_episode<T: Real>(
    config: &ScenarioConfig<T>,
    choice: PredictorChoice,
) -> Result<SimTrace<T>, HarnessError> {
    config.validate().map_err(HarnessError::Config)?;
    let grid = config.grid.as_ref();
    let mut predictor = make_predictor::<T>(choice);
    let eps_stop = T::of(apf::DEFAULT_EPS_STOP);
    let tol = T::of(apf::DEFAULT_PARALLEL_TOL);

    let mut vehicle = VehicleState {
        position: config.start,
        heading: (config.goal - config.start).angle(),
        t: 0,
    };
    // Arrival within one step length, strict with a small relative guard
    // so accumulated rounding cannot promote an exactly-delta-away pose.
    let goal_radius = config.delta * (T::one() - T::of(1e-4));
    let mut known_obstacles = CellSet::new();
    let mut recent: VecDeque<Vec2<T>> = VecDeque::with_capacity(4);
    let mut records: Vec<StepRecord<T>> = Vec::new();
    let mut outcome = Outcome::MaxSteps;

    for t in 0..config.max_steps {
        debug_assert_eq!(vehicle.t, t);
        let scan_result = scan(
            grid,
            vehicle.position,
            vehicle.heading,
            config.rho0,
            config.n_rays,
        )
        .map_err(HarnessError::Sensing)?;
        for beam in &scan_result.rays {
            if let Some(cell) = beam.cell {
                known_obstacles.insert(cell);
            }
        }
        let alpha_frac = occupied_fraction(&scan_result);
        let obstacles = obstacle_vectors(&scan_result);
        let f_att = attractive_force(vehicle.position, config.goal, config.xi);
        let f_rep = repulsive_force(&obstacles, config.eta, config.rho0)
            .expect("scan ranges are strictly positive");
        let forces = ForceDecomposition::new(f_att, f_rep);
        let parallel = is_parallel(f_att, f_rep, tol);

        let report = predictor.step(&PredictorContext {
            grid,
            config,
            vehicle: &vehicle,
            scan: &scan_result,
            forces: &forces,
            parallel,
            alpha_frac,
            known_obstacles: &known_obstacles,
        });

        records.push(StepRecord {
            t,
            position: vehicle.position,
            f_att,
            f_rep,
            f_tot: forces.f_tot,
            parallel,
            alpha_frac,
            ra_cells: report.ledger.map(|(ra, _)| ra),
            aoi_cells: report.ledger.map(|(_, aoi)| aoi),
            belief: report.verdict.belief,
            status: report.verdict.status,
            x_lm: report.verdict.x_lm,
            steps_remaining: report.verdict.steps_remaining,
            degenerate: report.degenerate,
        });

        if vehicle.position.distance(config.goal) < goal_radius {
            outcome = Outcome::GoalReached;
            break;
        }
        if report.verdict.status == VerdictStatus::Halt {
            outcome = Outcome::HaltedByPredictor;
            break;
        }
        if detect_stuck(forces.f_tot, eps_stop)
            || is_oscillating(recent.make_contiguous(), vehicle.position, config.delta)
        {
            outcome = Outcome::Stuck;
            break;
        }

        let next = apf::step(&vehicle, forces.f_tot, config.delta)
            .expect("total force is nonzero past the stuck check");
        if !grid.is_free_at(next.position) {
            return Err(HarnessError::Collision {
                x: next.position.x.to_f64().unwrap_or(f64::NAN),
                y: next.position.y.to_f64().unwrap_or(f64::NAN),
            });
        }
        recent.push_front(vehicle.position);
        recent.truncate(3);
        vehicle = next;
    }

    let final_step = records.last().map(|r| r.t).unwrap_or(0);
    let final_belief = records.last().and_then(|r| r.belief);
    Ok(SimTrace {
        scenario: config.name.clone(),
        predictor: predictor.name().to_string(),
        gamma: config.gamma,
        records,
        outcome,
        final_step,
        final_belief,
    })
}

/// One scenario row of the detection-step comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scenario: String,
    /// Step at which the predictor-free run stops (zero force or
    /// oscillation), or its last step if it never does.
    pub stuck_step: usize,
    /// Step at which the filter halts; the stuck step when it never does.
    pub bayes_step: usize,
    pub bayes_belief: Option<f64>,
    /// First signal steps; a baseline that never signals is reported at
    /// the stuck step, matching how failed predictors are tabulated.
    pub method1_step: usize,
    pub method2_step: usize,
}

/// Runs every predictor on every scenario and tabulates first-signal steps
/// against the no-predictor stuck step.
pub fn compare<T: Real>(configs: &[ScenarioConfig<T>]) -> Result<Vec<ComparisonRow>, HarnessError> {
    assert!(!configs.is_empty(), "compare needs at least one scenario");
    let mut rows = Vec::with_capacity(configs.len());
    for config in configs {
        let baseline = run_episode(config, PredictorChoice::None)?;
        let stuck_step = baseline.final_step;
        let signal_step = |trace: &SimTrace<T>| match trace.outcome {
            Outcome::HaltedByPredictor => trace.final_step,
            _ => stuck_step,
        };
        let bayes = run_episode(config, PredictorChoice::Bayes)?;
        let m1 = run_episode(config, PredictorChoice::Method1)?;
        let m2 = run_episode(config, PredictorChoice::Method2)?;
        rows.push(ComparisonRow {
            scenario: config.name.clone(),
            stuck_step,
            bayes_step: signal_step(&bayes),
            bayes_belief: bayes.final_belief.and_then(|b| b.to_f64()),
            method1_step: signal_step(&m1),
            method2_step: signal_step(&m2),
        });
    }
    Ok(rows)
}

/// Renders the comparison as machine-readable CSV.
pub fn comparison_to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("scenario,stuck_step,method1_step,method2_step,bayes_step\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.scenario, r.stuck_step, r.method1_step, r.method2_step, r.bayes_step
        );
    }
    out
}

/// Trace file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TraceFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected csv|json)")),
        }
    }
}

/// Writes a trace to `path` in the requested format.
pub fn emit_trace<T: Real>(
    trace: &SimTrace<T>,
    format: TraceFormat,
    path: &Path,
) -> Result<(), HarnessError> {
    let body = match format {
        TraceFormat::Csv => trace_to_csv(trace),
        TraceFormat::Json => trace_to_json(trace),
    };
    std::fs::write(path, body).map_err(|e| HarnessError::io(path, e))
}

/// Writes `belief.csv` and `trajectory.csv` under `out_dir`.
pub fn emit_plot_data<T: Real>(trace: &SimTrace<T>, out_dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let (belief, traj) = plot_data(trace);
    for (name, body) in [("belief.csv", belief), ("trajectory.csv", traj)] {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(())
}
