//! Episode traces and their CSV/JSON serializations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::num::Real;
use crate::predictor::VerdictStatus;

use super::HarnessError;

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    HaltedByPredictor,
    Stuck,
    MaxSteps,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::GoalReached => "goal_reached",
            Outcome::HaltedByPredictor => "halted_by_predictor",
            Outcome::Stuck => "stuck",
            Outcome::MaxSteps => "max_steps",
        }
    }
}

/// One step of an episode: pose before acting, the forces and predictor
/// view at that pose.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T = f64> {
    pub t: usize,
    pub position: Vec2<T>,
    pub f_att: Vec2<T>,
    pub f_rep: Vec2<T>,
    pub f_tot: Vec2<T>,
    pub parallel: bool,
    pub alpha_frac: T,
    pub ra_cells: Option<usize>,
    pub aoi_cells: Option<usize>,
    pub belief: Option<T>,
    pub status: VerdictStatus,
    pub x_lm: Option<Vec2<T>>,
    pub steps_remaining: Option<usize>,
    /// In-memory flag for a zero-mass belief update; not part of the
    /// pinned CSV column set.
    pub degenerate: bool,
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace<T = f64> {
    pub scenario: String,
    pub predictor: String,
    pub gamma: T,
    pub records: Vec<StepRecord<T>>,
    pub outcome: Outcome,
    pub final_step: usize,
    pub final_belief: Option<T>,
}

pub const CSV_HEADER: &str = "t,x,y,fatt_x,fatt_y,frep_x,frep_y,ftot_x,ftot_y,parallel,\
alpha_frac,ra_cells,aoi_cells,belief,status,xlm_x,xlm_y,steps_remaining";

/// Formats a float at 9 significant digits (the trace precision).
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

fn round9(x: f64) -> f64 {
    fmt9(x).parse().expect("own formatting must re-parse")
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().expect("trace scalars must fit f64")
}

fn opt_num<T: Real>(v: Option<T>) -> String {
    v.map(|x| fmt9(f(x))).unwrap_or_default()
}

fn opt_count(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders the pinned CSV row set: one header plus one row per step.
pub fn trace_to_csv<T: Real>(trace: &SimTrace<T>) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            fmt9(f(r.position.x)),
            fmt9(f(r.position.y)),
            fmt9(f(r.f_att.x)),
            fmt9(f(r.f_att.y)),
            fmt9(f(r.f_rep.x)),
            fmt9(f(r.f_rep.y)),
            fmt9(f(r.f_tot.x)),
            fmt9(f(r.f_tot.y)),
            r.parallel,
            fmt9(f(r.alpha_frac)),
            opt_count(r.ra_cells),
            opt_count(r.aoi_cells),
            opt_num(r.belief),
            r.status.as_str(),
            opt_num(r.x_lm.map(|v| v.x)),
            opt_num(r.x_lm.map(|v| v.y)),
            opt_count(r.steps_remaining),
        );
    }
    out
}

fn parse_status(s: &str) -> Result<VerdictStatus, HarnessError> {
    match s {
        "monitoring" => Ok(VerdictStatus::Monitoring),
        "armed" => Ok(VerdictStatus::Armed),
        "halt" => Ok(VerdictStatus::Halt),
        "revoked" => Ok(VerdictStatus::Revoked),
        other => Err(HarnessError::TraceParse(format!(
            "unknown status {other:?}"
        ))),
    }
}

/// Parses a CSV trace back into step records. Numeric fields come back at
/// the emitted 9-significant-digit precision, so `parse` then re-emit is
/// byte identical.
pub fn parse_trace_csv(text: &str) -> Result<Vec<StepRecord<f64>>, HarnessError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| HarnessError::TraceParse("empty trace".into()))?;
    if header != CSV_HEADER {
        return Err(HarnessError::TraceParse("unexpected CSV header".into()));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 18 {
            return Err(HarnessError::TraceParse(format!(
                "row {} has {} columns, expected 18",
                lineno + 2,
                cols.len()
            )));
        }
        let num = |i: usize| -> Result<f64, HarnessError> {
            cols[i]
                .parse()
                .map_err(|_| HarnessError::TraceParse(format!("bad number {:?}", cols[i])))
        };
        let opt_f = |i: usize| -> Result<Option<f64>, HarnessError> {
            if cols[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let opt_n = |i: usize| -> Result<Option<usize>, HarnessError> {
            if cols[i].is_empty() {
                Ok(None)
            } else {
                cols[i]
                    .parse()
                    .map(Some)
                    .map_err(|_| HarnessError::TraceParse(format!("bad count {:?}", cols[i])))
            }
        };
        let x_lm = match (opt_f(15)?, opt_f(16)?) {
            (Some(x), Some(y)) => Some(Vec2::new(x, y)),
            (None, None) => None,
            _ => {
                return Err(HarnessError::TraceParse(
                    "xlm_x and xlm_y must be both present or both absent".into(),
                ))
            }
        };
        records.push(StepRecord {
            t: cols[0]
                .parse()
                .map_err(|_| HarnessError::TraceParse(format!("bad step index {:?}", cols[0])))?,
            position: Vec2::new(num(1)?, num(2)?),
            f_att: Vec2::new(num(3)?, num(4)?),
            f_rep: Vec2::new(num(5)?, num(6)?),
            f_tot: Vec2::new(num(7)?, num(8)?),
            parallel: match cols[9] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(HarnessError::TraceParse(format!(
                        "bad parallel flag {other:?}"
                    )))
                }
            },
            alpha_frac: num(10)?,
            ra_cells: opt_n(11)?,
            aoi_cells: opt_n(12)?,
            belief: opt_f(13)?,
            status: parse_status(cols[14])?,
            x_lm,
            steps_remaining: opt_n(17)?,
            degenerate: false,
        });
    }
    Ok(records)
}

/// JSON mirror of the CSV fields plus the terminal summary.
#[derive(Debug, Serialize, Deserialize)]
pub struct JsonTrace {
    pub scenario: String,
    pub predictor: String,
    pub gamma: f64,
    pub outcome: Outcome,
    pub final_step: usize,
    pub final_belief: Option<f64>,
    pub steps: Vec<JsonStep>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JsonStep {
    pub t: usize,
    pub x: f64,
    pub y: f64,
    pub fatt_x: f64,
    pub fatt_y: f64,
    pub frep_x: f64,
    pub frep_y: f64,
    pub ftot_x: f64,
    pub ftot_y: f64,
    pub parallel: bool,
    pub alpha_frac: f64,
    pub ra_cells: Option<usize>,
    pub aoi_cells: Option<usize>,
    pub belief: Option<f64>,
    pub status: String,
    pub xlm_x: Option<f64>,
    pub xlm_y: Option<f64>,
    pub steps_remaining: Option<usize>,
}

pub fn trace_to_json<T: Real>(trace: &SimTrace<T>) -> String {
    let doc = JsonTrace {
        scenario: trace.scenario.clone(),
        predictor: trace.predictor.clone(),
        gamma: round9(f(trace.gamma)),
        outcome: trace.outcome,
        final_step: trace.final_step,
        final_belief: trace.final_belief.map(|b| round9(f(b))),
        steps: trace
            .records
            .iter()
            .map(|r| JsonStep {
                t: r.t,
                x: round9(f(r.position.x)),
                y: round9(f(r.position.y)),
                fatt_x: round9(f(r.f_att.x)),
                fatt_y: round9(f(r.f_att.y)),
                frep_x: round9(f(r.f_rep.x)),
                frep_y: round9(f(r.f_rep.y)),
                ftot_x: round9(f(r.f_tot.x)),
                ftot_y: round9(f(r.f_tot.y)),
                parallel: r.parallel,
                alpha_frac: round9(f(r.alpha_frac)),
                ra_cells: r.ra_cells,
                aoi_cells: r.aoi_cells,
                belief: r.belief.map(|b| round9(f(b))),
                status: r.status.as_str().to_string(),
                xlm_x: r.x_lm.map(|v| round9(f(v.x))),
                xlm_y: r.x_lm.map(|v| round9(f(v.y))),
                steps_remaining: r.steps_remaining,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("trace serialization cannot fail")
}

/// Plot-ready data: the belief curve `(t, belief)` and the trajectory
/// `(t, x, y)` with the final projected minimum appended as a marker row.
pub fn plot_data<T: Real>(trace: &SimTrace<T>) -> (String, String) {
    let mut belief = String::from("t,belief\n");
    for r in &trace.records {
        if let Some(b) = r.belief {
            let _ = writeln!(belief, "{},{}", r.t, fmt9(f(b)));
        }
    }
    let mut traj = String::from("t,x,y\n");
    for r in &trace.records {
        let _ = writeln!(
            traj,
            "{},{},{}",
            r.t,
            fmt9(f(r.position.x)),
            fmt9(f(r.position.y))
        );
    }
    let last_xlm = trace.records.iter().rev().find_map(|r| r.x_lm);
    if let Some(xlm) = last_xlm {
        let _ = writeln!(traj, "xlm,{},{}", fmt9(f(xlm.x)), fmt9(f(xlm.y)));
    }
    (belief, traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace() -> SimTrace<f64> {
        let mut records = Vec::new();
        for t in 0..10 {
            let armed = t >= 4;
            records.push(StepRecord {
                t,
                position: Vec2::new(t as f64 * 0.1, 8.0),
                f_att: Vec2::new(1.0 / 3.0, -0.25),
                f_rep: Vec2::new(-0.1, 1e-18),
                f_tot: Vec2::new(1.0 / 3.0 - 0.1, -0.25),
                parallel: armed,
                alpha_frac: t as f64 / 10.0,
                ra_cells: armed.then_some(100 + t),
                aoi_cells: armed.then_some(140),
                belief: armed.then_some(0.1 * t as f64),
                status: if armed {
                    VerdictStatus::Armed
                } else {
                    VerdictStatus::Monitoring
                },
                x_lm: armed.then(|| Vec2::new(1.23456789, 8.0)),
                steps_remaining: None,
                degenerate: false,
            });
        }
        SimTrace {
            scenario: "test".into(),
            predictor: "bayes".into(),
            gamma: 0.85,
            records,
            outcome: Outcome::MaxSteps,
            final_step: 9,
            final_belief: Some(0.9),
        }
    }

    #[test]
    fn csv_has_header_plus_one_row_per_step() {
        let csv = trace_to_csv(&sample_trace());
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.starts_with(CSV_HEADER));
    }

    #[test]
    fn csv_round_trip_is_identity_at_emitted_precision() {
        let trace = sample_trace();
        let csv = trace_to_csv(&trace);
        let records = parse_trace_csv(&csv).unwrap();
        let again = trace_to_csv(&SimTrace { records, ..trace });
        assert_eq!(csv, again);
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let json = trace_to_json(&sample_trace());
        let doc: JsonTrace = serde_json::from_str(&json).unwrap();
        assert_eq!(doc.steps.len(), 10);
        assert_eq!(doc.outcome, Outcome::MaxSteps);
        assert_eq!(doc.steps[4].status, "armed");
        assert_eq!(doc.steps[0].belief, None);
    }

    #[test]
    fn plot_data_shapes() {
        let (belief, traj) = plot_data(&sample_trace());
        // 6 armed rows with belief; header + 6.
        assert_eq!(belief.lines().count(), 7);
        // header + 10 steps + one marker row.
        assert_eq!(traj.lines().count(), 12);
        assert!(traj.lines().last().unwrap().starts_with("xlm,"));
    }

    #[test]
    fn unarmed_plot_data_is_header_only() {
        let mut trace = sample_trace();
        for r in &mut trace.records {
            r.belief = None;
            r.x_lm = None;
        }
        let (belief, traj) = plot_data(&trace);
        assert_eq!(belief, "t,belief\n");
        assert_eq!(traj.lines().count(), 11, "no marker row without an x_lm");
    }
}
