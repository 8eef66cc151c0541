//! Occupancy-grid environment: map document parsing, ray-cell traversal,
//! and the built-in benchmark scenarios.

mod scenario;

pub use scenario::{
    builtin_scenario, builtin_scenarios, load_scenario, ScenarioConfig, ScenarioDoc,
};

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::geom::Vec2;
use crate::num::Real;

/// Grid cell address `(ix, iy)`; `iy` grows with world +y.
pub type Cell = (u32, u32);

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("map parse error at line {line}, column {col}: {msg}")]
    MapParse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("point ({x}, {y}) is outside the grid")]
    OutOfBounds { x: f64, y: f64 },
    #[error("sensor origin ({x}, {y}) lies inside an obstacle")]
    SensorInsideObstacle { x: f64, y: f64 },
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("scenario document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Immutable 2D occupancy lattice.
///
/// Cell `(0, 0)` covers the square whose lower-left corner is `origin`;
/// `iy` increases with world +y.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid<T = f64> {
    width: u32,
    height: u32,
    resolution: T,
    origin: Vec2<T>,
    cells: Vec<bool>,
}

impl<T: Real> OccupancyGrid<T> {
    /// Empty (all-free) grid with origin at (0, 0).
    pub fn empty(width: u32, height: u32, resolution: T) -> Self {
        assert!(width >= 1 && height >= 1, "grid must be at least 1x1");
        assert!(resolution > T::zero(), "resolution must be positive");
        Self {
            width,
            height,
            resolution,
            origin: Vec2::zero(),
            cells: vec![false; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn origin(&self) -> Vec2<T> {
        self.origin
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    fn idx(&self, cell: Cell) -> usize {
        cell.1 as usize * self.width as usize + cell.0 as usize
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.cells[self.idx(cell)]
    }

    /// Marks one cell occupied. Only available before the grid is shared.
    pub fn set_occupied(&mut self, cell: Cell) {
        let i = self.idx(cell);
        self.cells[i] = true;
    }

    /// Marks an inclusive-exclusive cell rectangle occupied.
    pub fn fill_cells(&mut self, ix0: u32, ix1: u32, iy0: u32, iy1: u32) {
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                self.set_occupied((ix, iy));
            }
        }
    }

    pub fn cell_of(&self, p: Vec2<T>) -> Option<Cell> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        if fx < T::zero() || fy < T::zero() {
            return None;
        }
        let (ix, iy) = (fx.to_u64()? as u32, fy.to_u64()? as u32);
        (ix < self.width && iy < self.height).then_some((ix, iy))
    }

    pub fn cell_center(&self, cell: Cell) -> Vec2<T> {
        let half = T::of(0.5);
        Vec2::new(
            self.origin.x + (T::of_usize(cell.0 as usize) + half) * self.resolution,
            self.origin.y + (T::of_usize(cell.1 as usize) + half) * self.resolution,
        )
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        self.cell_of(p).is_some()
    }

    pub fn is_free_at(&self, p: Vec2<T>) -> bool {
        self.cell_of(p)
            .map(|c| !self.is_occupied(c))
            .unwrap_or(false)
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

/// Outcome of one ray-grid intersection query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit<T = f64> {
    pub hit: bool,
    /// Range to the entry face of the first occupied cell, or `max_range`.
    pub distance: T,
    /// The occupied cell that stopped the ray, if any.
    pub cell: Option<Cell>,
}

/// Casts a ray through the grid, reporting the range to the entry face of
/// the first occupied cell within `max_range`.
///
/// The traversal steps exactly one cell boundary at a time; leaving the grid
/// ends the walk (outside counts as free space). Errors if `origin` is out
/// of bounds or inside an occupied cell.
pub fn raycast<T: Real>(
    grid: &OccupancyGrid<T>,
    origin: Vec2<T>,
    direction: Vec2<T>,
    max_range: T,
) -> Result<RayHit<T>, WorldError> {
    debug_assert!(max_range > T::zero());
    let oob = || WorldError::OutOfBounds {
        x: origin.x.to_f64().unwrap_or(f64::NAN),
        y: origin.y.to_f64().unwrap_or(f64::NAN),
    };
    let start = grid.cell_of(origin).ok_or_else(oob)?;
    if grid.is_occupied(start) {
        return Err(WorldError::SensorInsideObstacle {
            x: origin.x.to_f64().unwrap_or(f64::NAN),
            y: origin.y.to_f64().unwrap_or(f64::NAN),
        });
    }

    let res = grid.resolution;
    let (mut ix, mut iy) = (start.0 as i64, start.1 as i64);

    // Parametric distance to the next vertical / horizontal cell boundary.
    let setup = |pos: T, o: T, d: T, i: i64| -> (i64, T, T) {
        if d > T::zero() {
            let next = o + T::of_usize(i as usize + 1) * res;
            (1, (next - pos) / d, res / d)
        } else if d < T::zero() {
            let next = o + T::of_usize(i as usize) * res;
            ((-1), (next - pos) / d, res / -d)
        } else {
            (0, T::infinity(), T::infinity())
        }
    };
    let (sx, mut tx, dtx) = setup(origin.x, grid.origin.x, direction.x, ix);
    let (sy, mut ty, dty) = setup(origin.y, grid.origin.y, direction.y, iy);

    loop {
        // Advance across the nearer boundary; x wins ties for determinism.
        let t = if tx <= ty {
            ix += sx;
            let t = tx;
            tx += dtx;
            t
        } else {
            iy += sy;
            let t = ty;
            ty += dty;
            t
        };
        if t > max_range {
            break;
        }
        if ix < 0 || iy < 0 || ix >= grid.width as i64 || iy >= grid.height as i64 {
            break; // left the grid; no obstacle beyond
        }
        let cell = (ix as u32, iy as u32);
        if grid.is_occupied(cell) {
            return Ok(RayHit {
                hit: true,
                distance: t,
                cell: Some(cell),
            });
        }
    }
    Ok(RayHit {
        hit: false,
        distance: max_range,
        cell: None,
    })
}

/// Parses a map document (see the `APFMAP v1` format in the crate docs).
pub fn load_map<T: Real>(text: &str) -> Result<OccupancyGrid<T>, WorldError> {
    let parse_err = |line: usize, col: usize, msg: &str| WorldError::MapParse {
        line,
        col,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty document"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "APFMAP" || fields[1] != "v1" {
        return Err(parse_err(1, 1, "header must be `APFMAP v1 <w> <h> <res>`"));
    }
    let width: u32 = fields[2]
        .parse()
        .map_err(|_| parse_err(1, 1, "width is not a positive integer"))?;
    let height: u32 = fields[3]
        .parse()
        .map_err(|_| parse_err(1, 1, "height is not a positive integer"))?;
    let res_f: f64 = fields[4]
        .parse()
        .map_err(|_| parse_err(1, 1, "resolution is not a number"))?;
    if width < 1 || height < 1 {
        return Err(parse_err(1, 1, "grid must be at least 1x1"));
    }
    if res_f <= 0.0 || !res_f.is_finite() {
        return Err(parse_err(1, 1, "resolution must be positive"));
    }

    let mut grid = OccupancyGrid::empty(width, height, T::of(res_f));
    let mut rows = 0u32;
    for (lineno, row) in lines.by_ref() {
        if rows == height {
            if row.trim().is_empty() {
                continue; // trailing blank lines are tolerated
            }
            return Err(parse_err(lineno + 1, 1, "more rows than the header height"));
        }
        let iy = height - 1 - rows; // row 0 of the document is the top row
        let glyphs: Vec<char> = row.chars().collect();
        if glyphs.len() != width as usize {
            return Err(parse_err(
                lineno + 1,
                glyphs.len().min(width as usize) + 1,
                &format!("row has {} glyphs, expected {}", glyphs.len(), width),
            ));
        }
        for (i, g) in glyphs.iter().enumerate() {
            match g {
                '.' => {}
                '#' => grid.set_occupied((i as u32, iy)),
                _ => {
                    return Err(parse_err(
                        lineno + 1,
                        i + 1,
                        &format!("unknown cell glyph {g:?} (expected `.` or `#`)"),
                    ))
                }
            }
        }
        rows += 1;
    }
    if rows != height {
        return Err(parse_err(
            rows as usize + 2,
            1,
            &format!("document has {rows} rows, header says {height}"),
        ));
    }
    Ok(grid)
}

/// Serializes a grid back to the map document format (lossless with
/// [`load_map`] up to whitespace normalization).
pub fn save_map<T: Real>(grid: &OccupancyGrid<T>) -> String {
    let mut out = format!(
        "APFMAP v1 {} {} {}\n",
        grid.width, grid.height, grid.resolution
    );
    for row in (0..grid.height).rev() {
        for ix in 0..grid.width {
            out.push(if grid.is_occupied((ix, row)) {
                '#'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    out
}

/// Set of grid cells; used for sensing footprints and the predictor's
/// area ledger. Only membership and counts matter, never iteration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellSet(HashSet<Cell>);

impl CellSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, cell: Cell) -> bool {
        self.0.insert(cell)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.0.contains(&cell)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self(self.0.union(&other.0).copied().collect())
    }

    /// Inserts every cell of `other` that is also in `clip`.
    pub fn absorb_clipped(&mut self, other: &Self, clip: &Self) {
        for c in &other.0 {
            if clip.contains(*c) {
                self.0.insert(*c);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Cell> + '_ {
        self.0.iter().copied()
    }

    /// Cells in row-major order; use wherever iteration order reaches
    /// floating-point sums or output.
    pub fn sorted_cells(&self) -> Vec<Cell> {
        let mut v: Vec<Cell> = self.0.iter().copied().collect();
        v.sort_unstable_by_key(|&(ix, iy)| (iy, ix));
        v
    }
}

impl FromIterator<Cell> for CellSet {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
