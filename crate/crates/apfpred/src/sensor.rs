//! Forward-facing range sensor: scan simulation, occupancy statistics, and
//! the sensing-area footprint consumed by the predictor.

use crate::geom::Vec2;
use crate::num::Real;
use crate::world::{raycast, Cell, CellSet, OccupancyGrid, WorldError};

/// One beam of a scan. `bearing` is relative to the sensor heading; a miss
/// reports `distance` equal to the scan's range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam<T = f64> {
    pub bearing: T,
    pub hit: bool,
    pub distance: T,
    /// Occupied cell that returned the beam, if any.
    pub cell: Option<Cell>,
}

/// Result of one sensing action over the forward half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult<T = f64> {
    pub pose: Vec2<T>,
    pub heading: T,
    pub rho0: T,
    /// Beams ordered by strictly increasing bearing over [-pi/2, +pi/2].
    pub rays: Vec<Beam<T>>,
}

impl<T: Real> ScanResult<T> {
    pub fn hit_count(&self) -> usize {
        self.rays.iter().filter(|r| r.hit).count()
    }
}

/// Casts `n_rays` beams uniformly spaced over the forward half-plane
/// [-pi/2, +pi/2] inclusive.
pub fn scan<T: Real>(
    grid: &OccupancyGrid<T>,
    pose: Vec2<T>,
    heading: T,
    rho0: T,
    n_rays: usize,
) -> Result<ScanResult<T>, WorldError> {
    assert!(n_rays >= 2, "scan needs at least two beams to span the FOV");
    let half_pi = T::FRAC_PI_2();
    let spacing = T::PI() / T::of_usize(n_rays - 1);
    let mut rays = Vec::with_capacity(n_rays);
    for k in 0..n_rays {
        let bearing = -half_pi + spacing * T::of_usize(k);
        let dir = Vec2::from_angle(heading + bearing);
        let hit = raycast(grid, pose, dir, rho0)?;
        rays.push(Beam {
            bearing,
            hit: hit.hit,
            distance: hit.distance,
            cell: hit.cell,
        });
    }
    Ok(ScanResult {
        pose,
        heading,
        rho0,
        rays,
    })
}

/// Fraction of beams that returned an obstacle; the filter's state
/// transition probability (occupied angle over sensor FOV).
pub fn occupied_fraction<T: Real>(scan: &ScanResult<T>) -> T {
    assert!(
        !scan.rays.is_empty(),
        "occupied_fraction needs a nonempty scan"
    );
    T::of_usize(scan.hit_count()) / T::of_usize(scan.rays.len())
}

/// One obstacle vector (UGV to obstacle) per hit beam.
pub fn obstacle_vectors<T: Real>(scan: &ScanResult<T>) -> Vec<Vec2<T>> {
    scan.rays
        .iter()
        .filter(|r| r.hit)
        .map(|r| Vec2::from_angle(scan.heading + r.bearing) * r.distance)
        .collect()
}

/// Cells the sensor covers from `pose`: centers inside the forward
/// half-disc of radius `rho0`, visible along the straight ray from `pose`.
/// Occupied cells on the boundary of visibility are included; cells behind
/// them are shadowed. The pose's own cell is always covered.
pub fn sensing_footprint<T: Real>(
    grid: &OccupancyGrid<T>,
    pose: Vec2<T>,
    heading: T,
    rho0: T,
) -> CellSet {
    let mut cells = CellSet::new();
    let Some(pose_cell) = grid.cell_of(pose) else {
        return cells;
    };
    cells.insert(pose_cell);
    let fwd = Vec2::from_angle(heading);
    let res = grid.resolution();
    let reach = (rho0 / res).ceil().to_i64().unwrap_or(0) + 1;
    let (cx, cy) = (pose_cell.0 as i64, pose_cell.1 as i64);
    for iy in (cy - reach).max(0)..=(cy + reach).min(grid.height() as i64 - 1) {
        for ix in (cx - reach).max(0)..=(cx + reach).min(grid.width() as i64 - 1) {
            let cell = (ix as u32, iy as u32);
            if cell == pose_cell {
                continue;
            }
            let center = grid.cell_center(cell);
            let offset = center - pose;
            let dist = offset.norm();
            if dist > rho0 || offset.dot(fwd) < T::zero() {
                continue;
            }
            // Visible iff the ray from the pose reaches this cell before any
            // other occupied cell.
            match raycast(grid, pose, offset / dist, dist) {
                Ok(hit) => {
                    if !hit.hit || hit.cell == Some(cell) {
                        cells.insert(cell);
                    }
                }
                Err(_) => continue,
            }
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn empty_grid() -> OccupancyGrid<f64> {
        OccupancyGrid::empty(100, 100, 0.1)
    }

    #[test]
    fn scan_on_empty_grid_is_all_misses_at_rho0() {
        let g = empty_grid();
        let s = scan(&g, Vec2::new(5.0, 5.0), 0.3, 2.0, 181).unwrap();
        assert_eq!(s.rays.len(), 181);
        assert!(s.rays.iter().all(|r| !r.hit && r.distance == 2.0));
        assert_eq!(occupied_fraction(&s), 0.0);
        assert!(obstacle_vectors(&s).is_empty());
        // Bearings strictly increasing over the inclusive FOV.
        for pair in s.rays.windows(2) {
            assert!(pair[0].bearing < pair[1].bearing);
        }
        assert_relative_eq!(s.rays[0].bearing, -std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(s.rays[180].bearing, std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn full_wall_ahead_hits_every_beam() {
        // Wall crossing the whole forward half-plane at ~1 m: a thick arc
        // is simplest: fill everything with x >= pose.x + 1.
        let mut g = empty_grid();
        g.fill_cells(60, 100, 0, 100);
        let pose = Vec2::new(5.0, 5.0);
        let s = scan(&g, pose, 0.0, 2.0, 181).unwrap();
        // Beams within the range-limited cone hit; verify each hit against
        // the analytic plane intersection at x = 6.0.
        for r in &s.rays {
            let reach = 1.0 / r.bearing.cos();
            if reach <= 2.0 && r.bearing.abs() < std::f64::consts::FRAC_PI_2 {
                assert!(r.hit, "beam at {} should hit", r.bearing);
                assert_abs_diff_eq!(r.distance, reach, epsilon = 0.15);
            }
        }
        assert!(occupied_fraction(&s) > 0.6);
    }

    #[test]
    fn enclosing_arc_hits_every_beam() {
        // A thick ring segment at radius ~1 m around the pose spans the
        // whole forward half-plane, so every beam returns a hit near 1 m
        // (the analytic arc radius, within grid resolution).
        let mut g = empty_grid();
        let pose = Vec2::new(5.05, 5.05);
        for iy in 0..100u32 {
            for ix in 0..100u32 {
                let c = g.cell_center((ix, iy));
                let d = c.distance(pose);
                if (1.0..1.4).contains(&d) && c.x >= pose.x - 0.05 {
                    g.set_occupied((ix, iy));
                }
            }
        }
        let s = scan(&g, pose, 0.0, 2.0, 181).unwrap();
        assert!(s.rays.iter().all(|r| r.hit), "every beam must hit the arc");
        assert_eq!(occupied_fraction(&s), 1.0);
        for r in &s.rays {
            assert_abs_diff_eq!(r.distance, 1.0, epsilon = 0.15);
        }
        // Invariants: one obstacle vector per hit, magnitudes within range.
        let v = obstacle_vectors(&s);
        assert_eq!(v.len(), s.hit_count());
        assert!(v.iter().all(|d| d.norm() <= 2.0));
    }

    #[test]
    fn zero_fraction_iff_no_obstacle_vectors() {
        let g = empty_grid();
        let clear = scan(&g, Vec2::new(5.0, 5.0), 1.0, 2.0, 61).unwrap();
        assert_eq!(occupied_fraction(&clear), 0.0);
        assert!(obstacle_vectors(&clear).is_empty());

        let mut blocked = empty_grid();
        blocked.fill_cells(60, 62, 40, 60);
        let s = scan(&blocked, Vec2::new(5.0, 5.0), 0.0, 2.0, 61).unwrap();
        assert!(occupied_fraction(&s) > 0.0);
        assert!(!obstacle_vectors(&s).is_empty());
    }

    #[test]
    fn rear_obstacles_are_outside_the_fov() {
        let mut g = empty_grid();
        g.fill_cells(0, 20, 0, 100); // massive block behind the sensor
        let s = scan(&g, Vec2::new(5.0, 5.0), 0.0, 2.0, 91).unwrap();
        assert_eq!(s.hit_count(), 0);
    }

    #[test]
    fn occupied_fraction_matches_hand_count() {
        let g = empty_grid();
        let mut s = scan(&g, Vec2::new(5.0, 5.0), 0.0, 2.0, 181).unwrap();
        for r in s.rays.iter_mut().take(37) {
            r.hit = true;
            r.distance = 1.0;
        }
        assert_relative_eq!(occupied_fraction(&s), 37.0 / 181.0);
    }

    #[test]
    fn obstacle_vectors_compose_heading_and_bearing() {
        let g = empty_grid();
        let mut s = scan(&g, Vec2::new(5.0, 5.0), std::f64::consts::FRAC_PI_2, 2.0, 3).unwrap();
        // One hit at bearing +pi/2 with heading pi/2: world direction pi,
        // so the obstacle vector is (-1, 0).
        s.rays[2].hit = true;
        s.rays[2].distance = 1.0;
        let v = obstacle_vectors(&s);
        assert_eq!(v.len(), 1);
        assert_abs_diff_eq!(v[0].x, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0].y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn footprint_area_matches_half_disc() {
        // rho0 = 1.0 at resolution 0.1: half-disc area pi/2 over cell area
        // 0.01 is ~157 cells.
        let g = empty_grid();
        let fp = sensing_footprint(&g, Vec2::new(5.05, 5.05), 0.0, 1.0);
        let expected = std::f64::consts::FRAC_PI_2 / 0.01;
        let got = fp.len() as f64;
        assert!(
            (got - expected).abs() / expected < 0.05,
            "footprint {got} vs analytic {expected}"
        );
    }

    #[test]
    fn footprint_is_shadowed_behind_a_wall() {
        let mut g = empty_grid();
        g.fill_cells(60, 62, 0, 100); // wall at x in [6.0, 6.2)
        let pose = Vec2::new(5.55, 5.05);
        let fp = sensing_footprint(&g, pose, 0.0, 2.0);
        // Front wall cells are included...
        assert!(fp.contains((60, 50)));
        // ...but nothing beyond the wall is visible.
        for cell in fp.iter() {
            assert!(cell.0 <= 61, "cell {cell:?} lies behind the wall");
        }
        // A per-cell shadow oracle: any free cell in the footprint must see
        // the pose without crossing the wall columns.
        for cell in fp.iter() {
            if g.is_occupied(cell) {
                continue;
            }
            let c = g.cell_center(cell);
            assert!(
                c.x < 6.0,
                "visible free cell {cell:?} should be in front of the wall"
            );
        }
    }

    #[test]
    fn degenerate_radius_covers_only_the_pose_cell() {
        let g = empty_grid();
        let fp = sensing_footprint(&g, Vec2::new(5.05, 5.05), 0.0, 0.04);
        assert_eq!(fp.len(), 1);
        assert!(fp.contains((50, 50)));
    }

    #[test]
    fn footprint_monotone_in_rho0() {
        let mut g = empty_grid();
        g.fill_cells(58, 60, 40, 60);
        let pose = Vec2::new(5.05, 5.05);
        let small = sensing_footprint(&g, pose, 0.2, 1.0);
        let large = sensing_footprint(&g, pose, 0.2, 1.8);
        assert!(small.is_subset(&large));
    }
}
