//! Scenario configuration, the scenario document format, and the two
//! built-in benchmark cases.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::num::Real;
use crate::world::{load_map, OccupancyGrid, WorldError};

/// A fully resolved episode configuration.
#[derive(Debug, Clone)]
pub struct ScenarioConfig<T = f64> {
    pub name: String,
    pub grid: Arc<OccupancyGrid<T>>,
    /// Start position X(t0).
    pub start: Vec2<T>,
    /// Goal position X_g.
    pub goal: Vec2<T>,
    /// Attractive coefficient.
    pub xi: T,
    /// Repulsive coefficient.
    pub eta: T,
    /// Sensor range (meters).
    pub rho0: T,
    /// Step size (meters).
    pub delta: T,
    /// Halting confidence threshold in (0, 1].
    pub gamma: T,
    pub n_rays: usize,
    pub max_steps: usize,
}

impl<T: Real> ScenarioConfig<T> {
    pub fn validate(&self) -> Result<(), WorldError> {
        let fail = |msg: String| Err(WorldError::Scenario(msg));
        let numbers = [self.xi, self.eta, self.rho0, self.delta, self.gamma];
        if numbers.iter().any(|v| !v.is_finite()) {
            return fail("coefficients must be finite".into());
        }
        if self.rho0 <= self.delta || self.delta <= T::zero() {
            return fail(format!(
                "require rho0 > delta > 0, got rho0={} delta={}",
                self.rho0, self.delta
            ));
        }
        if self.gamma <= T::zero() || self.gamma > T::one() {
            return fail(format!("gamma must be in (0, 1], got {}", self.gamma));
        }
        if self.n_rays < 3 {
            return fail(format!("n_rays must be >= 3, got {}", self.n_rays));
        }
        if self.xi <= T::zero() || self.eta < T::zero() {
            return fail(format!(
                "require xi > 0 and eta >= 0, got xi={} eta={}",
                self.xi, self.eta
            ));
        }
        for (label, p) in [("start", self.start), ("goal", self.goal)] {
            if !p.is_finite() || !self.grid.is_free_at(p) {
                return fail(format!(
                    "{label} ({}, {}) must lie in a free cell",
                    p.x, p.y
                ));
            }
        }
        Ok(())
    }
}

/// On-disk scenario document; `map` is a path relative to the document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub map: String,
    pub start: Vec2<f64>,
    pub goal: Vec2<f64>,
    pub xi: f64,
    pub eta: f64,
    pub rho0: f64,
    pub delta: f64,
    pub gamma: f64,
    pub n_rays: usize,
    pub max_steps: usize,
}

/// Loads and validates a scenario document plus its map file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig<f64>, WorldError> {
    let text = std::fs::read_to_string(path)?;
    let doc: ScenarioDoc = serde_json::from_str(&text)?;
    let map_path = path.parent().unwrap_or(Path::new(".")).join(&doc.map);
    let map_text = std::fs::read_to_string(&map_path)?;
    let grid = load_map::<f64>(&map_text)?.into_shared();
    let config = ScenarioConfig {
        name: doc.name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".into())
        }),
        grid,
        start: doc.start,
        goal: doc.goal,
        xi: doc.xi,
        eta: doc.eta,
        rho0: doc.rho0,
        delta: doc.delta,
        gamma: doc.gamma,
        n_rays: doc.n_rays,
        max_steps: doc.max_steps,
    };
    config.validate()?;
    Ok(config)
}

// Shared defaults for the built-in cases. The coefficients are calibrated
// per scenario: eta small enough that the force balance sits well inside
// the sensing horizon (the raw-beam repulsion sum grows with the hit
// count, so eta of order 1 stalls the vehicle almost as soon as an
// obstacle is sensed), and delta small enough that the window between
// first opposition and the stall spans many steps.
const RESOLUTION: f64 = 0.1;
const XI: f64 = 1.0;
const RHO0: f64 = 2.0;
const DELTA: f64 = 0.05;
const GAMMA: f64 = 0.85;
const N_RAYS: usize = 181;
const MAX_STEPS: usize = 500;

/// The two benchmark scenarios: a long wall across the goal line, and a
/// dead-end hallway whose mouth faces the start.
pub fn builtin_scenarios() -> Vec<ScenarioConfig<f64>> {
    vec![wall_scenario(), hallway_scenario()]
}

/// Looks up a built-in scenario by name.
pub fn builtin_scenario(name: &str) -> Option<ScenarioConfig<f64>> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

/// 16x16 m map. An 8 m wide, 0.4 m thick wall crosses the start-goal line
/// at 60% of the start-goal distance (front face x = 9.4). The wall is
/// wider than twice the sensor range, so the scan cannot see around it.
fn wall_scenario() -> ScenarioConfig<f64> {
    let mut grid = OccupancyGrid::empty(160, 160, RESOLUTION);
    grid.fill_cells(94, 98, 40, 120); // x in [9.4, 9.8), y in [4, 12)
    ScenarioConfig {
        name: "wall".into(),
        grid: grid.into_shared(),
        start: Vec2::new(3.0, 8.0),
        goal: Vec2::new(14.0, 8.0),
        xi: XI,
        eta: 0.02,
        rho0: RHO0,
        delta: DELTA,
        gamma: GAMMA,
        n_rays: N_RAYS,
        max_steps: MAX_STEPS,
    }
}

/// 12x16 m map. Two 6 m walls bound a 3 m wide corridor aligned with the
/// start-goal axis; a cap seals it 1 m before the goal's projection, so the
/// mouth faces the start and the goal lies beyond the closed end.
fn hallway_scenario() -> ScenarioConfig<f64> {
    let mut grid = OccupancyGrid::empty(120, 160, RESOLUTION);
    grid.fill_cells(30, 90, 95, 97); // top wall, y in [9.5, 9.7)
    grid.fill_cells(30, 90, 63, 65); // bottom wall, y in [6.3, 6.5)
    grid.fill_cells(90, 92, 63, 97); // cap, front face x = 9.0
    ScenarioConfig {
        name: "hallway".into(),
        grid: grid.into_shared(),
        start: Vec2::new(2.0, 8.0),
        goal: Vec2::new(10.0, 8.0),
        xi: XI,
        eta: 0.09,
        rho0: RHO0,
        delta: DELTA,
        gamma: GAMMA,
        n_rays: N_RAYS,
        max_steps: MAX_STEPS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::raycast;

    #[test]
    fn two_builtins_named_wall_and_hallway() {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
        assert_eq!(names, ["wall", "hallway"]);
        for s in builtin_scenarios() {
            s.validate().unwrap();
        }
    }

    #[test]
    fn wall_blocks_the_start_goal_segment() {
        let s = builtin_scenario("wall").unwrap();
        let dir = (s.goal - s.start).normalized();
        let span = s.start.distance(s.goal);
        let hit = raycast(&s.grid, s.start, dir, span).unwrap();
        assert!(hit.hit, "start-goal segment must intersect the wall");
        assert!(hit.distance < span);
    }

    #[test]
    fn hallway_goal_lies_beyond_the_closed_end() {
        let s = builtin_scenario("hallway").unwrap();
        // Cap occupies x in [9.0, 9.2); the goal must sit past its far face
        // yet inside the corridor's y-extent.
        assert!(s.goal.x > 9.2);
        assert!(s.goal.y > 6.5 && s.goal.y < 9.5);
        // The mouth (x = 3.0 plane between the wall tips) faces the start.
        assert!(s.start.x < 3.0);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut s = builtin_scenario("wall").unwrap();
        s.delta = 3.0; // violates rho0 > delta
        assert!(s.validate().is_err());
        let mut s = builtin_scenario("wall").unwrap();
        s.gamma = 0.0;
        assert!(s.validate().is_err());
        let mut s = builtin_scenario("wall").unwrap();
        s.start = Vec2::new(9.5, 8.0); // inside the wall
        assert!(s.validate().is_err());
    }
}
