//! Reference baseline predictors for the detection-step comparison.

use crate::geom::Vec2;
use crate::num::Real;
use crate::sensor::ScanResult;

/// Default robot width for the free-passage test (Method I).
pub const DEFAULT_ROBOT_WIDTH: f64 = 0.5;

/// Method I: predicts a minimum when no free-space gap in the scan admits
/// the robot.
///
/// Candidate passages are the maximal runs of free beams. A run bounded by
/// hit beams has the width of the gap between the bounding hit points; a
/// run touching a scan edge is an unbounded opening. Returns true iff no
/// candidate passage is at least `robot_width` wide.
pub fn method1_predict<T: Real>(scan: &ScanResult<T>, robot_width: T) -> bool {
    assert!(!scan.rays.is_empty(), "method1 needs a nonempty scan");
    let endpoint = |k: usize| {
        let r = &scan.rays[k];
        scan.pose + Vec2::from_angle(scan.heading + r.bearing) * r.distance
    };
    let n = scan.rays.len();
    let mut i = 0;
    while i < n {
        if scan.rays[i].hit {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !scan.rays[i].hit {
            i += 1;
        }
        // Free run [start, i): open at a scan edge, else gap between the
        // bounding hits.
        if start == 0 || i == n {
            return false;
        }
        if endpoint(start - 1).distance(endpoint(i)) >= robot_width {
            return false;
        }
    }
    true
}

/// Method II: predicts a minimum when the obstacle horizon along the total
/// force direction is closer than half the sensor range (strictly).
///
/// The horizon is read from the scan beam nearest in bearing to
/// `f_tot_direction`.
pub fn method2_predict<T: Real>(scan: &ScanResult<T>, f_tot_direction: Vec2<T>, rho0: T) -> bool {
    assert!(!scan.rays.is_empty(), "method2 needs a nonempty scan");
    let mut target = f_tot_direction.angle() - scan.heading;
    let two_pi = T::PI() + T::PI();
    while target > T::PI() {
        target -= two_pi;
    }
    while target < -T::PI() {
        target += two_pi;
    }
    let nearest = scan
        .rays
        .iter()
        .min_by(|a, b| {
            let da = (a.bearing - target).abs();
            let db = (b.bearing - target).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("nonempty scan");
    nearest.distance < rho0 / T::of(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::Beam;

    /// Hand-built scan: bearings uniform over the forward half-plane,
    /// hit distances from a closure (None = free at rho0).
    fn synth_scan(n: usize, rho0: f64, f: impl Fn(f64) -> Option<f64>) -> ScanResult<f64> {
        let spacing = std::f64::consts::PI / (n - 1) as f64;
        let rays = (0..n)
            .map(|k| {
                let bearing = -std::f64::consts::FRAC_PI_2 + k as f64 * spacing;
                match f(bearing) {
                    Some(d) => Beam {
                        bearing,
                        hit: true,
                        distance: d,
                        cell: None,
                    },
                    None => Beam {
                        bearing,
                        hit: false,
                        distance: rho0,
                        cell: None,
                    },
                }
            })
            .collect();
        ScanResult {
            pose: Vec2::zero(),
            heading: 0.0,
            rho0,
            rays,
        }
    }

    #[test]
    fn method1_open_space_is_no_minimum() {
        let scan = synth_scan(181, 2.0, |_| None);
        assert!(!method1_predict(&scan, 0.5));
    }

    #[test]
    fn method1_fully_blocked_is_a_minimum() {
        let scan = synth_scan(181, 2.0, |_| Some(1.0));
        assert!(method1_predict(&scan, 0.5));
    }

    #[test]
    fn method1_gap_width_against_hand_computation() {
        // Hits at 1.0 m except a free window strictly inside |bearing| < 30
        // degrees. Bounding hit endpoints sit at +/-30 degrees and range
        // 1.0, so the gap is 2 sin(30 deg) = 1.0 m exactly.
        let window = 30.0_f64.to_radians() - 1e-9;
        let scan = synth_scan(181, 2.0, |b| (b.abs() >= window).then_some(1.0));
        assert!(
            !method1_predict(&scan, 0.5),
            "1.0 m gap admits a 0.5 m robot"
        );
        assert!(
            method1_predict(&scan, 1.2),
            "1.0 m gap blocks a 1.2 m robot"
        );
    }

    #[test]
    fn method2_threshold_cases() {
        let ahead = Vec2::new(1.0, 0.0);
        let scan = synth_scan(181, 2.0, |b| (b.abs() < 0.02).then_some(0.9));
        assert!(method2_predict(&scan, ahead, 2.0));
        let scan = synth_scan(181, 2.0, |_| None);
        assert!(!method2_predict(&scan, ahead, 2.0), "free horizon");
        let scan = synth_scan(181, 2.0, |b| (b.abs() < 0.02).then_some(1.0));
        assert!(
            !method2_predict(&scan, ahead, 2.0),
            "exactly rho0/2 is not a signal (strict less-than)"
        );
    }

    #[test]
    fn method2_monotone_in_horizon() {
        let ahead = Vec2::new(1.0, 0.0);
        let mut fired = false;
        for k in (1..40).rev() {
            let d = k as f64 * 0.05;
            let scan = synth_scan(181, 2.0, |b| (b.abs() < 0.02).then_some(d));
            let signal = method2_predict(&scan, ahead, 2.0);
            if fired {
                assert!(signal, "shrinking horizon must never clear the signal");
            }
            fired |= signal;
        }
        assert!(fired);
    }
}
