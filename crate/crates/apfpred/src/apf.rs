//! Potential-field forces, the discrete-time stepper, force-parallelism
//! detection, and projection of the balance point where the total force
//! vanishes.
//!
//! Sign convention: attraction points toward the goal, repulsion pushes
//! away from each obstacle, and the total force is their sum. The balance
//! point semantics (zero total force traps the vehicle) are unchanged by
//! this normalization.

use thiserror::Error;

use crate::geom::Vec2;
use crate::num::Real;

/// Default angular tolerance for force opposition (radians).
pub const DEFAULT_PARALLEL_TOL: f64 = 5.0 * std::f64::consts::PI / 180.0;
/// Repulsion below this fraction of the attraction never counts as
/// opposition; keeps negligible repulsion from arming the predictor.
pub const PARALLEL_MAGNITUDE_FLOOR: f64 = 0.05;
/// Total-force magnitude below which the vehicle counts as stuck.
pub const DEFAULT_EPS_STOP: f64 = 1e-3;
/// March granularity used to bracket the force-balance point (meters).
const PROJECTION_MARCH_STEP: f64 = 1e-3;
/// Bisection refinement tolerance for the balance point (meters).
const PROJECTION_REFINE_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ApfError {
    #[error("total force is zero: vehicle is at a local minimum")]
    Stuck,
    #[error("an obstacle coincides with the vehicle position")]
    Singularity,
}

/// Vehicle pose under the fixed-step point model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState<T = f64> {
    pub position: Vec2<T>,
    /// Direction of the last motion, radians.
    pub heading: T,
    /// Step index.
    pub t: usize,
}

/// Forces at one pose; `f_tot` is exactly the componentwise sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceDecomposition<T = f64> {
    pub f_att: Vec2<T>,
    pub f_rep: Vec2<T>,
    pub f_tot: Vec2<T>,
}

impl<T: Real> ForceDecomposition<T> {
    pub fn new(f_att: Vec2<T>, f_rep: Vec2<T>) -> Self {
        Self {
            f_att,
            f_rep,
            f_tot: f_att + f_rep,
        }
    }
}

/// Coefficients shared by the force laws.
#[derive(Debug, Clone, Copy)]
pub struct ApfParams<T = f64> {
    pub xi: T,
    pub eta: T,
    pub rho0: T,
}

/// Attraction `xi * (goal - position)`: magnitude grows linearly with the
/// distance to the goal.
pub fn attractive_force<T: Real>(position: Vec2<T>, goal: Vec2<T>, xi: T) -> Vec2<T> {
    (goal - position) * xi
}

/// Magnitude of one obstacle's repulsion at range `d`; zero at and beyond
/// the influence boundary `rho0`.
pub fn repulsive_magnitude<T: Real>(d: T, eta: T, rho0: T) -> T {
    if d >= rho0 {
        T::zero()
    } else {
        eta / (d * d) * (d.recip() - rho0.recip())
    }
}

/// Sum of per-obstacle repulsions, each directed from the obstacle toward
/// the vehicle. `obstacles` holds vehicle-to-obstacle vectors.
pub fn repulsive_force<T: Real>(
    obstacles: &[Vec2<T>],
    eta: T,
    rho0: T,
) -> Result<Vec2<T>, ApfError> {
    let mut total = Vec2::zero();
    for &d in obstacles {
        let dist = d.norm();
        if dist.is_zero() {
            return Err(ApfError::Singularity);
        }
        let mag = repulsive_magnitude(dist, eta, rho0);
        total += (d / dist) * -mag;
    }
    Ok(total)
}

/// Advances the vehicle one fixed-length step along the total force.
pub fn step<T: Real>(
    state: &VehicleState<T>,
    f_tot: Vec2<T>,
    delta: T,
) -> Result<VehicleState<T>, ApfError> {
    if f_tot.norm_squared().is_zero() {
        return Err(ApfError::Stuck);
    }
    let heading = f_tot.angle();
    Ok(VehicleState {
        position: state.position + Vec2::from_angle(heading) * delta,
        heading,
        t: state.t + 1,
    })
}

/// True iff the total force has collapsed below `eps_stop` (strict).
pub fn detect_stuck<T: Real>(f_tot: Vec2<T>, eps_stop: T) -> bool {
    f_tot.norm() < eps_stop
}

/// True iff the vehicle has revisited one of its recent positions within
/// half a step length: the oscillation form of getting stuck.
pub fn is_oscillating<T: Real>(recent: &[Vec2<T>], current: Vec2<T>, delta: T) -> bool {
    let half = delta / T::of(2.0);
    recent.iter().any(|&p| p.distance(current) < half)
}

/// True iff attraction and repulsion are in direct opposition: both
/// nonzero, repulsion above the magnitude floor, and the angle between the
/// attraction and the reversed repulsion within `tol` radians.
pub fn is_parallel<T: Real>(f_att: Vec2<T>, f_rep: Vec2<T>, tol: T) -> bool {
    let (na, nr) = (f_att.norm(), f_rep.norm());
    if na.is_zero() || nr.is_zero() || nr <= T::of(PARALLEL_MAGNITUDE_FLOOR) * na {
        return false;
    }
    f_att.angle_between(-f_rep) <= tol
}

/// Marches from `position` along the current total-force direction and
/// returns the first point where attraction and repulsion magnitudes
/// balance, refined by bisection. Forces are evaluated against
/// `known_obstacles` only, the vehicle's recognized information. Returns
/// `None` when no balance exists on the segment before the goal or the
/// nearest known obstacle.
pub fn project_local_minimum<T: Real>(
    known_obstacles: &[Vec2<T>],
    position: Vec2<T>,
    goal: Vec2<T>,
    params: ApfParams<T>,
) -> Option<Vec2<T>> {
    if known_obstacles.is_empty() {
        return None;
    }
    let balance = |q: Vec2<T>| -> T {
        let att = attractive_force(q, goal, params.xi).norm();
        let mut rep = T::zero();
        for &p in known_obstacles {
            rep += repulsive_magnitude(p.distance(q), params.eta, params.rho0);
        }
        att - rep
    };
    let rep_vec = |q: Vec2<T>| -> Vec2<T> {
        let mut total = Vec2::zero();
        for &p in known_obstacles {
            let d = p - q;
            let dist = d.norm();
            if dist > T::zero() {
                total += (d / dist) * -repulsive_magnitude(dist, params.eta, params.rho0);
            }
        }
        total
    };

    let f_tot = attractive_force(position, goal, params.xi) + rep_vec(position);
    let dir = f_tot.normalized();
    if dir.norm_squared().is_zero() {
        return None;
    }

    // The march ends at the goal or just short of the first known obstacle,
    // whichever comes first along the ray.
    let contact = params.rho0 * T::of(1e-3);
    let s_end = position.distance(goal);
    let h = T::of(PROJECTION_MARCH_STEP);
    let mut s_prev = T::zero();
    if balance(position) < T::zero() {
        // Already past the balance point; the minimum is here.
        return Some(position);
    }
    let mut s = h;
    while s <= s_end {
        let q = position + dir * s;
        if known_obstacles.iter().any(|&p| p.distance(q) < contact) {
            return None; // reached an obstacle without a sign change
        }
        let b = balance(q);
        if b < T::zero() {
            // Bracketed in (s_prev, s]; bisect to the position tolerance.
            let (mut lo, mut hi) = (s_prev, s);
            let tol = T::of(PROJECTION_REFINE_TOL);
            while hi - lo > tol {
                let mid = (lo + hi) / T::of(2.0);
                if balance(position + dir * mid) < T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let s_star = (lo + hi) / T::of(2.0);
            return Some(position + dir * s_star);
        }
        s_prev = s;
        s += h;
    }
    None
}
