//! Online local-minimum prediction.
//!
//! The Bayes predictor arms when attraction and repulsion oppose, projects
//! the balance point, then tracks a two-hypothesis belief (minimum ahead /
//! no minimum) driven by the occupied-ray fraction and the recognized share
//! of the area of interest. Two reference baselines live in [`baselines`].

mod baselines;

pub use baselines::{method1_predict, method2_predict, DEFAULT_ROBOT_WIDTH};

use thiserror::Error;

use crate::geom::Vec2;
use crate::num::Real;
use crate::world::{CellSet, OccupancyGrid};

/// Consecutive steps of broken opposition tolerated before revoking.
pub const DEFAULT_K_GRACE: usize = 3;

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("arming refused: projected minimum ({x}, {y}) lies outside the grid")]
    MinimumOutsideGrid { x: f64, y: f64 },
}

/// Predictor lifecycle state reported each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    /// No prediction in flight.
    Monitoring,
    /// A projected minimum is being tracked.
    Armed,
    /// Confidence crossed the threshold; the vehicle should stop.
    Halt,
    /// Force opposition broke; the prediction was withdrawn this step.
    Revoked,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::Monitoring => "monitoring",
            VerdictStatus::Armed => "armed",
            VerdictStatus::Halt => "halt",
            VerdictStatus::Revoked => "revoked",
        }
    }
}

/// Per-step predictor output. For the Bayes predictor a `Halt` verdict
/// always carries belief, the minimum location, and the remaining-steps
/// estimate; baseline methods signal `Halt` bare.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorVerdict<T = f64> {
    pub status: VerdictStatus,
    pub belief: Option<T>,
    pub x_lm: Option<Vec2<T>>,
    pub steps_remaining: Option<usize>,
    pub confidence_pct: Option<u32>,
}

impl<T: Real> PredictorVerdict<T> {
    pub fn monitoring() -> Self {
        Self {
            status: VerdictStatus::Monitoring,
            belief: None,
            x_lm: None,
            steps_remaining: None,
            confidence_pct: None,
        }
    }

    pub fn bare(status: VerdictStatus) -> Self {
        Self {
            status,
            ..Self::monitoring()
        }
    }
}

/// State of one armed prediction: the projected minimum, the candidate
/// points between the vehicle and the minimum, and the area ledger.
///
/// Invariants kept by the methods below: `ra` is a subset of `aoi` and
/// never shrinks while active; the unknown area is always `aoi \ ra`
/// (derived, never stored); `belief_lm` stays in [0, 1] with the
/// complement hypothesis implicitly `1 - belief_lm`.
#[derive(Debug, Clone)]
pub struct PredictionState<T = f64> {
    pub x_lm: Vec2<T>,
    pub group_a: Vec<Vec2<T>>,
    pub aoi: CellSet,
    pub ra: CellSet,
    pub belief_lm: T,
    pub armed_at: usize,
    pub active: bool,
    /// Set when the last update had zero total mass and carried the prior.
    pub degenerate: bool,
    parallel_misses: usize,
}

impl<T: Real> PredictionState<T> {
    /// Arms a new prediction at step `armed_at`.
    ///
    /// The recognized area starts as the sensing footprint at the arming
    /// pose; the area of interest adds the footprint at the projected
    /// minimum. Group A holds points spaced `delta` along the segment from
    /// the vehicle to the minimum (minimum included) and sets the initial
    /// belief to `1 / |Group A|`.
    pub fn arm(
        grid: &OccupancyGrid<T>,
        scan_footprint_t0: CellSet,
        x_lm: Vec2<T>,
        sa_xlm: &CellSet,
        position: Vec2<T>,
        delta: T,
        armed_at: usize,
    ) -> Result<Self, PredictorError> {
        if !grid.contains(x_lm) {
            return Err(PredictorError::MinimumOutsideGrid {
                x: x_lm.x.to_f64().unwrap_or(f64::NAN),
                y: x_lm.y.to_f64().unwrap_or(f64::NAN),
            });
        }
        let ra = scan_footprint_t0;
        let aoi = ra.union(sa_xlm);
        let dist = position.distance(x_lm);
        let count = (dist / delta).floor().to_usize().unwrap_or(0) + 1;
        let back = (position - x_lm).normalized();
        let group_a: Vec<Vec2<T>> = (0..count)
            .map(|j| x_lm + back * (delta * T::of_usize(j)))
            .collect();
        let belief_lm = T::one() / T::of_usize(count);
        Ok(Self {
            x_lm,
            group_a,
            aoi,
            ra,
            belief_lm,
            armed_at,
            active: true,
            degenerate: false,
            parallel_misses: 0,
        })
    }

    /// Folds a new sensing footprint into the recognized area, clipped to
    /// the area of interest. Idempotent; `ra` only grows.
    pub fn observe(&mut self, new_footprint: &CellSet) {
        debug_assert!(self.active);
        self.ra.absorb_clipped(new_footprint, &self.aoi);
    }

    /// Recognized share of the area of interest, in [0, 1].
    pub fn ra_ratio(&self) -> T {
        if self.aoi.is_empty() {
            T::one()
        } else {
            T::of_usize(self.ra.len()) / T::of_usize(self.aoi.len())
        }
    }

    /// Unknown-area size `|aoi| - |ra|`.
    pub fn ua_len(&self) -> usize {
        self.aoi.len() - self.ra.len()
    }

    /// One prediction-correction-normalization sweep of the two-hypothesis
    /// filter.
    ///
    /// The minimum hypothesis is weighted by the occupied-ray fraction and
    /// the recognized share; the complement by their complements. A zero
    /// total mass carries the prior forward and flags the step degenerate.
    pub fn bayes_update(&mut self, alpha_frac: T, ra_ratio: T) {
        debug_assert!(self.active);
        debug_assert!(alpha_frac >= T::zero() && alpha_frac <= T::one());
        debug_assert!(ra_ratio >= T::zero() && ra_ratio <= T::one());
        let b = self.belief_lm;
        let u_lm = alpha_frac * ra_ratio * b;
        let u_not = (T::one() - alpha_frac) * (T::one() - ra_ratio) * (T::one() - b);
        let mass = u_lm + u_not;
        if mass.is_zero() {
            self.degenerate = true;
            return;
        }
        self.degenerate = false;
        self.belief_lm = u_lm / mass;
    }

    /// Belief in the complement hypothesis.
    pub fn belief_not(&self) -> T {
        T::one() - self.belief_lm
    }

    /// Halt check against the confidence threshold (halt at `>= gamma`).
    pub fn check_halt(&self, gamma: T, position: Vec2<T>, delta: T) -> PredictorVerdict<T> {
        debug_assert!(self.active);
        if self.belief_lm >= gamma {
            let hundred = T::of(100.0);
            let steps = (position.distance(self.x_lm) / delta).round();
            PredictorVerdict {
                status: VerdictStatus::Halt,
                belief: Some(self.belief_lm),
                x_lm: Some(self.x_lm),
                steps_remaining: steps.to_usize(),
                confidence_pct: (self.belief_lm * hundred).round().to_u32(),
            }
        } else {
            PredictorVerdict {
                status: VerdictStatus::Armed,
                belief: Some(self.belief_lm),
                x_lm: Some(self.x_lm),
                steps_remaining: None,
                confidence_pct: None,
            }
        }
    }

    /// Deactivates the prediction after `k_grace` consecutive steps of
    /// broken force opposition. Returns true when the state was revoked
    /// this call; single-step blips inside the grace window keep it alive.
    pub fn revoke_if_broken(
        &mut self,
        f_att: Vec2<T>,
        f_rep: Vec2<T>,
        tol: T,
        k_grace: usize,
    ) -> bool {
        debug_assert!(self.active);
        if crate::apf::is_parallel(f_att, f_rep, tol) {
            self.parallel_misses = 0;
            return false;
        }
        self.parallel_misses += 1;
        if self.parallel_misses >= k_grace {
            self.active = false;
            return true;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn grid() -> OccupancyGrid<f64> {
        OccupancyGrid::empty(100, 100, 0.1)
    }

    fn footprint(cells: &[(u32, u32)]) -> CellSet {
        cells.iter().copied().collect()
    }

    fn armed(dist: f64, delta: f64) -> PredictionState<f64> {
        let g = grid();
        PredictionState::arm(
            &g,
            footprint(&[(1, 1), (2, 1), (3, 1)]),
            Vec2::new(1.0 + dist, 5.0),
            &footprint(&[(3, 1), (4, 1)]),
            Vec2::new(1.0, 5.0),
            delta,
            7,
        )
        .unwrap()
    }

    #[test]
    fn group_a_count_sets_initial_belief() {
        let st = armed(1.0, 0.25);
        assert_eq!(st.group_a.len(), 5);
        assert_relative_eq!(st.belief_lm, 0.2);
        assert!(st.group_a.contains(&st.x_lm));
        assert_eq!(st.armed_at, 7);
    }

    #[test]
    fn degenerate_segment_is_certain() {
        let st = armed(0.2, 0.25);
        assert_eq!(st.group_a.len(), 1);
        assert_relative_eq!(st.belief_lm, 1.0);
        assert_eq!(st.group_a[0], st.x_lm);
    }

    #[test]
    fn pre_observed_aoi_starts_at_ratio_one() {
        let g = grid();
        let fp = footprint(&[(1, 1), (2, 1), (3, 1)]);
        let sa = footprint(&[(2, 1), (3, 1)]); // subset of the arming footprint
        let st = PredictionState::arm(
            &g,
            fp.clone(),
            Vec2::new(2.0, 5.0),
            &sa,
            Vec2::new(1.0, 5.0),
            0.25,
            0,
        )
        .unwrap();
        assert_eq!(st.aoi, fp);
        assert_relative_eq!(st.ra_ratio(), 1.0);
    }

    #[test]
    fn arming_outside_the_grid_is_refused() {
        let g = grid();
        let err = PredictionState::arm(
            &g,
            footprint(&[(1, 1)]),
            Vec2::new(50.0, 5.0),
            &footprint(&[(1, 1)]),
            Vec2::new(1.0, 5.0),
            0.25,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, PredictorError::MinimumOutsideGrid { .. }));
    }

    #[test]
    fn observe_clips_to_aoi_and_is_idempotent() {
        let mut st = armed(1.0, 0.25);
        let before = st.ra.len();
        st.observe(&footprint(&[(90, 90)])); // disjoint from the aoi
        assert_eq!(st.ra.len(), before);
        let fp = footprint(&[(4, 1)]); // in aoi via sa_xlm
        st.observe(&fp);
        let once = st.ra.len();
        assert_eq!(once, before + 1);
        st.observe(&fp);
        assert_eq!(st.ra.len(), once);
        assert!(st.ra.is_subset(&st.aoi));
        assert_eq!(st.ua_len(), st.aoi.len() - st.ra.len());
    }

    #[test]
    fn bayes_update_symmetric_evidence_is_a_fixed_point() {
        let mut st = armed(1.0, 0.25);
        st.belief_lm = 0.5;
        st.bayes_update(0.5, 0.5);
        assert_relative_eq!(st.belief_lm, 0.5);
    }

    #[test]
    fn bayes_update_fully_blocked_fully_observed_is_certain() {
        let mut st = armed(1.0, 0.25);
        st.belief_lm = 0.5;
        st.bayes_update(1.0, 1.0);
        assert_relative_eq!(st.belief_lm, 1.0);
    }

    #[test]
    fn bayes_update_hand_case() {
        let mut st = armed(1.0, 0.25);
        st.belief_lm = 0.1;
        st.bayes_update(0.8, 0.6);
        // u_lm = 0.048, u_not = 0.072
        assert_abs_diff_eq!(st.belief_lm, 0.4, epsilon = 1e-15);
        assert!(!st.degenerate);
    }

    #[test]
    fn degenerate_update_carries_the_prior() {
        let mut st = armed(1.0, 0.25);
        st.belief_lm = 0.3;
        st.bayes_update(0.0, 1.0); // u_lm = 0, u_not = 0
        assert_relative_eq!(st.belief_lm, 0.3);
        assert!(st.degenerate);
    }

    #[test]
    fn belief_pair_always_sums_to_one() {
        let mut st = armed(1.0, 0.25);
        for (a, r) in [(0.9, 0.2), (0.3, 0.8), (0.55, 0.45)] {
            st.bayes_update(a, r);
            assert_abs_diff_eq!(st.belief_lm + st.belief_not(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn halt_at_threshold_and_steps_estimate() {
        let mut st = armed(2.0, 0.1);
        st.belief_lm = 0.90;
        let v = st.check_halt(0.85, Vec2::new(1.0, 5.0), 0.1);
        assert_eq!(v.status, VerdictStatus::Halt);
        assert_eq!(v.confidence_pct, Some(90));
        assert_eq!(v.steps_remaining, Some(20));
        assert_eq!(v.x_lm, Some(st.x_lm));

        st.belief_lm = 0.84;
        let v = st.check_halt(0.85, Vec2::new(1.0, 5.0), 0.1);
        assert_eq!(v.status, VerdictStatus::Armed);
        assert!(v.steps_remaining.is_none());
    }

    #[test]
    fn revocation_needs_k_consecutive_breaks() {
        let tol = crate::apf::DEFAULT_PARALLEL_TOL;
        let att = Vec2::new(1.0, 0.0);
        let opposed = Vec2::new(-0.5, 0.0);
        let deflected = Vec2::new(-0.3, 0.4); // ~53 degrees off opposition

        let mut st = armed(1.0, 0.25);
        for _ in 0..10 {
            assert!(!st.revoke_if_broken(att, opposed, tol, DEFAULT_K_GRACE));
        }
        assert!(st.active);

        // A blip shorter than the grace window does not revoke.
        let mut st = armed(1.0, 0.25);
        assert!(!st.revoke_if_broken(att, deflected, tol, DEFAULT_K_GRACE));
        assert!(!st.revoke_if_broken(att, deflected, tol, DEFAULT_K_GRACE));
        assert!(!st.revoke_if_broken(att, opposed, tol, DEFAULT_K_GRACE));
        assert!(st.active);

        // k consecutive breaks revoke.
        let mut st = armed(1.0, 0.25);
        assert!(!st.revoke_if_broken(att, deflected, tol, DEFAULT_K_GRACE));
        assert!(!st.revoke_if_broken(att, deflected, tol, DEFAULT_K_GRACE));
        assert!(st.revoke_if_broken(att, deflected, tol, DEFAULT_K_GRACE));
        assert!(!st.active);
    }

    #[test]
    fn full_knowledge_blocked_scan_reaches_any_threshold() {
        // ra = aoi at arming and a fully blocked scan: certainty in
        // finitely many steps for any gamma < 1.
        let mut st = armed(1.0, 0.25);
        st.ra = st.aoi.clone();
        st.belief_lm = 0.05;
        let mut steps = 0;
        while st.belief_lm < 0.999_999 {
            st.bayes_update(1.0, st.ra_ratio());
            steps += 1;
            assert!(steps < 10, "must converge quickly");
        }
    }

    proptest! {
        #[test]
        fn belief_never_decreases_under_favorable_evidence(
            b0 in 0.01f64..0.99,
            evidence in proptest::collection::vec((0.5f64..1.0, 0.5f64..1.0), 1..40)
        ) {
            let mut st = armed(1.0, 0.25);
            st.belief_lm = b0;
            let mut prev = b0;
            for (a, r) in evidence {
                st.bayes_update(a, r);
                prop_assert!(st.belief_lm + 1e-12 >= prev,
                    "belief fell from {prev} to {} on ({a}, {r})", st.belief_lm);
                prop_assert!(st.belief_lm >= 0.0 && st.belief_lm <= 1.0);
                prev = st.belief_lm;
            }
        }
    }
}
