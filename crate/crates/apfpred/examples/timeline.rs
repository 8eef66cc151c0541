//! Prints the per-predictor timeline of each built-in scenario: arming
//! step, halt step, belief and area-ledger state at halt, and the stuck
//! step of the predictor-free baseline.

use apfpred::harness::{run_episode, Outcome, PredictorChoice};
use apfpred::predictor::VerdictStatus;
use apfpred::world::builtin_scenarios;

fn main() {
    for config in builtin_scenarios() {
        println!(
            "=== {} (xi={}, eta={}, rho0={}, delta={}, gamma={}) ===",
            config.name, config.xi, config.eta, config.rho0, config.delta, config.gamma
        );

        let baseline = run_episode(&config, PredictorChoice::None).unwrap();
        let stuck = baseline.records.last().unwrap();
        println!(
            "none:     {} at t={} pos=({:.2}, {:.2}) |f_tot|={:.4}",
            baseline.outcome.as_str(),
            baseline.final_step,
            stuck.position.x,
            stuck.position.y,
            stuck.f_tot.norm()
        );

        for choice in [
            PredictorChoice::Bayes,
            PredictorChoice::Method1,
            PredictorChoice::Method2,
        ] {
            let trace = run_episode(&config, choice).unwrap();
            let mut line = format!(
                "{:<8} {} at t={}",
                format!("{}:", choice.as_str()),
                trace.outcome.as_str(),
                trace.final_step
            );
            if let Some(armed) = trace
                .records
                .iter()
                .find(|r| r.status == VerdictStatus::Armed)
            {
                line += &format!(", armed at t={}", armed.t);
            }
            if trace.outcome == Outcome::HaltedByPredictor {
                let h = trace.records.last().unwrap();
                if let (Some(b), Some(ra), Some(aoi)) = (h.belief, h.ra_cells, h.aoi_cells) {
                    line += &format!(
                        ", belief={:.3}, ra/aoi={}/{} ({:.3}), steps_remaining={:?}, lead={}",
                        b,
                        ra,
                        aoi,
                        ra as f64 / aoi as f64,
                        h.steps_remaining,
                        baseline.final_step.saturating_sub(h.t)
                    );
                }
            }
            println!("{line}");
        }
        println!();
    }
}
