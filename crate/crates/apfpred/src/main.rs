//! Command-line front end: run episodes, compare predictors, and export
//! plot-ready data.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use apfpred::harness::{
    self, compare, comparison_to_csv, emit_plot_data, emit_trace, parse_trace_csv, run_episode,
    HarnessError, Outcome, PredictorChoice, SimTrace, TraceFormat,
};
use apfpred::world::{builtin_scenario, builtin_scenarios, load_scenario, ScenarioConfig};

/// Exit code for configuration problems (bad scenario, unreadable map).
const EXIT_CONFIG: u8 = 2;
/// Exit code for aborted episodes (collision) and runtime failures.
const EXIT_ABORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "apfpred",
    about = "Potential-field navigation with online local-minimum prediction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its trace.
    Run {
        /// Built-in scenario name (`wall`, `hallway`) or a scenario
        /// document path.
        #[arg(long)]
        scenario: String,
        /// Predictor to run alongside the vehicle.
        #[arg(long, default_value = "bayes")]
        predictor: PredictorChoice,
        /// Halting confidence threshold; overrides the scenario's value.
        #[arg(long)]
        gamma: Option<f64>,
        /// Output file for the trace.
        #[arg(long)]
        out: PathBuf,
        /// Trace format.
        #[arg(long, default_value = "csv")]
        format: TraceFormat,
    },
    /// Run every predictor on the given scenarios and write the
    /// detection-step table.
    Compare {
        /// `builtin` for the two built-in cases, or scenario document
        /// paths.
        #[arg(long, required = true, num_args = 1..)]
        scenarios: Vec<String>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a stored trace into plot-ready CSV files.
    Plotdata {
        /// Trace file produced by `run` (CSV or JSON).
        #[arg(long)]
        trace: PathBuf,
        /// Directory for `belief.csv` and `trajectory.csv`.
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn resolve_scenario(spec: &str) -> Result<ScenarioConfig<f64>, HarnessError> {
    if let Some(s) = builtin_scenario(spec) {
        return Ok(s);
    }
    let path = PathBuf::from(spec);
    if path.exists() {
        load_scenario(&path).map_err(HarnessError::Config)
    } else {
        Err(HarnessError::Config(apfpred::world::WorldError::Scenario(
            format!("no built-in scenario or file named {spec:?}"),
        )))
    }
}

fn exit_for(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Config(_) | HarnessError::TraceParse(_) => EXIT_CONFIG,
        HarnessError::Collision { .. } | HarnessError::Sensing(_) => EXIT_ABORT,
        HarnessError::Io { .. } => EXIT_ABORT,
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            scenario,
            predictor,
            gamma,
            out,
            format,
        } => {
            let mut config = resolve_scenario(&scenario)?;
            if let Some(g) = gamma {
                config.gamma = g;
            }
            let trace = run_episode(&config, predictor)?;
            emit_trace(&trace, format, &out)?;
            let belief = trace
                .final_belief
                .map(|b| format!(", final belief {b:.3}"))
                .unwrap_or_default();
            eprintln!(
                "{}: {} after step {}{belief} -> {}",
                trace.scenario,
                trace.outcome.as_str(),
                trace.final_step,
                out.display()
            );
            Ok(())
        }
        Command::Compare { scenarios, out } => {
            let configs: Vec<ScenarioConfig<f64>> =
                if scenarios.len() == 1 && scenarios[0] == "builtin" {
                    builtin_scenarios()
                } else {
                    scenarios
                        .iter()
                        .map(|s| resolve_scenario(s))
                        .collect::<Result<_, _>>()?
                };
            let rows = compare(&configs)?;
            std::fs::write(&out, comparison_to_csv(&rows)).map_err(|source| HarnessError::Io {
                path: out.clone(),
                source,
            })?;
            for r in &rows {
                eprintln!(
                    "{}: stuck {}, method1 {}, method2 {}, bayes {}",
                    r.scenario, r.stuck_step, r.method1_step, r.method2_step, r.bayes_step
                );
            }
            Ok(())
        }
        Command::Plotdata { trace, out_dir } => {
            let text = std::fs::read_to_string(&trace).map_err(|source| HarnessError::Io {
                path: trace.clone(),
                source,
            })?;
            let sim: SimTrace<f64> = if text.trim_start().starts_with('{') {
                let doc: harness::JsonTrace = serde_json::from_str(&text)
                    .map_err(|e| HarnessError::TraceParse(e.to_string()))?;
                json_to_trace(doc)?
            } else {
                let records = parse_trace_csv(&text)?;
                let final_step = records.last().map(|r| r.t).unwrap_or(0);
                let final_belief = records.last().and_then(|r| r.belief);
                SimTrace {
                    scenario: String::new(),
                    predictor: String::new(),
                    gamma: f64::NAN,
                    records,
                    outcome: Outcome::MaxSteps,
                    final_step,
                    final_belief,
                }
            };
            emit_plot_data(&sim, &out_dir)?;
            eprintln!(
                "wrote {} and {}",
                out_dir.join("belief.csv").display(),
                out_dir.join("trajectory.csv").display()
            );
            Ok(())
        }
    }
}

fn json_to_trace(doc: harness::JsonTrace) -> Result<SimTrace<f64>, HarnessError> {
    use apfpred::geom::Vec2;
    use apfpred::predictor::VerdictStatus;
    let mut records = Vec::with_capacity(doc.steps.len());
    for s in doc.steps {
        let status = match s.status.as_str() {
            "monitoring" => VerdictStatus::Monitoring,
            "armed" => VerdictStatus::Armed,
            "halt" => VerdictStatus::Halt,
            "revoked" => VerdictStatus::Revoked,
            other => {
                return Err(HarnessError::TraceParse(format!(
                    "unknown status {other:?}"
                )))
            }
        };
        records.push(harness::StepRecord {
            t: s.t,
            position: Vec2::new(s.x, s.y),
            f_att: Vec2::new(s.fatt_x, s.fatt_y),
            f_rep: Vec2::new(s.frep_x, s.frep_y),
            f_tot: Vec2::new(s.ftot_x, s.ftot_y),
            parallel: s.parallel,
            alpha_frac: s.alpha_frac,
            ra_cells: s.ra_cells,
            aoi_cells: s.aoi_cells,
            belief: s.belief,
            status,
            x_lm: match (s.xlm_x, s.xlm_y) {
                (Some(x), Some(y)) => Some(Vec2::new(x, y)),
                _ => None,
            },
            steps_remaining: s.steps_remaining,
            degenerate: false,
        });
    }
    Ok(SimTrace {
        scenario: doc.scenario,
        predictor: doc.predictor,
        gamma: doc.gamma,
        records,
        outcome: doc.outcome,
        final_step: doc.final_step,
        final_belief: doc.final_belief,
    })
}

fn main() -> ExitCode {
    // APFPRED_SEED is reserved for forward compatibility; episodes are
    // deterministic and take no random input.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
