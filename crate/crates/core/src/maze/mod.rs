//! House-like mazes and the robot that navigates them.
//!
//! A maze starts as a 20x20 grid that is divided five times by walls with a
//! single one-cell doorway. The grid is then mapped to a continuous 400x400
//! arena (one cell = 20x20 units) with 2-unit thick walls. The robot starts
//! in the middle of the arena facing north; the goal sits in the middle of a
//! random cell.

mod geometry;
mod sim;
pub(crate) use sim::manhattan;

use std::collections::VecDeque;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use geometry::{heading_of, heading_vector, Point, Rect};
pub use sim::{
    behavior_descriptor, descriptor_distance, performance, sense, simulate, simulate_traced, step,
    RobotState, SimulationOutcome, RANGEFINDER_ANGLES, RANGEFINDER_RANGE, SENSOR_COUNT,
};

pub const GRID_SIZE: u32 = 20;
pub const CELL_SIZE: f64 = 20.0;
pub const EXTENT: f64 = GRID_SIZE as f64 * CELL_SIZE;
pub const WALL_THICKNESS: f64 = 2.0;
pub const DIVISIONS: usize = 5;
pub const ROBOT_RADIUS: f64 = 4.0;
pub const MAX_STEPS: usize = 2500;
pub const MAZE_FORMAT_VERSION: u32 = 1;
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Runs along y on the grid line `x = line_index`.
    Vertical,
    /// Runs along x on the grid line `y = line_index`.
    Horizontal,
}

/// One division wall on the grid.
///
/// The wall lies on grid line `line_index`, covers the cells `span.0..span.1`
/// along its length, and leaves the cell `gap_index` open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionWall {
    pub orientation: Orientation,
    pub line_index: u32,
    pub span: (u32, u32),
    pub gap_index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeGrid {
    pub goal_cell: (u32, u32),
    pub division_walls: Vec<DivisionWall>,
}

/// Continuous maze geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Maze {
    pub walls: Vec<Rect>,
    pub start: RobotState,
    pub goal: Point,
}

/// The four cells that touch the start point.
fn start_cells() -> [(u32, u32); 4] {
    let m = GRID_SIZE / 2;
    [(m - 1, m - 1), (m, m - 1), (m - 1, m), (m, m)]
}

pub fn start_pose() -> RobotState {
    RobotState {
        position: Point::new(EXTENT / 2.0, EXTENT / 2.0),
        heading: 0.0,
    }
}

fn boundary_walls() -> [Rect; 4] {
    let h = WALL_THICKNESS / 2.0;
    [
        Rect::new(-h, -h, EXTENT + h, h),
        Rect::new(-h, EXTENT - h, EXTENT + h, EXTENT + h),
        Rect::new(-h, -h, h, EXTENT + h),
        Rect::new(EXTENT - h, -h, EXTENT + h, EXTENT + h),
    ]
}

impl DivisionWall {
    /// The wall's solid pieces as rectangles (one or two, around the gap).
    pub fn rects(&self) -> Vec<Rect> {
        let h = WALL_THICKNESS / 2.0;
        let line = self.line_index as f64 * CELL_SIZE;
        let pieces = [
            (self.span.0, self.gap_index),
            (self.gap_index + 1, self.span.1),
        ];
        pieces
            .iter()
            .filter(|(a, b)| a < b)
            .map(|&(a, b)| {
                let (lo, hi) = (a as f64 * CELL_SIZE, b as f64 * CELL_SIZE);
                match self.orientation {
                    Orientation::Vertical => Rect::new(line - h, lo, line + h, hi),
                    Orientation::Horizontal => Rect::new(lo, line - h, hi, line + h),
                }
            })
            .collect()
    }

    /// Whether this wall separates the two edge-adjacent cells `a` and `b`.
    fn blocks(&self, a: (u32, u32), b: (u32, u32)) -> bool {
        let (along, across_lo, across_hi) = match self.orientation {
            Orientation::Vertical if a.1 == b.1 => (a.1, a.0.min(b.0), a.0.max(b.0)),
            Orientation::Horizontal if a.0 == b.0 => (a.0, a.1.min(b.1), a.1.max(b.1)),
            _ => return false,
        };
        across_hi == self.line_index
            && across_lo + 1 == self.line_index
            && (self.span.0..self.span.1).contains(&along)
            && along != self.gap_index
    }
}

impl MazeGrid {
    pub fn goal_point(&self) -> Point {
        Point::new(
            (self.goal_cell.0 as f64 + 0.5) * CELL_SIZE,
            (self.goal_cell.1 as f64 + 0.5) * CELL_SIZE,
        )
    }

    /// Converts the grid to continuous geometry.
    pub fn to_maze(&self) -> Maze {
        let mut walls = boundary_walls().to_vec();
        for w in &self.division_walls {
            walls.extend(w.rects());
        }
        Maze {
            walls,
            start: start_pose(),
            goal: self.goal_point(),
        }
    }

    /// Cells reachable from the cell at the arena center by flood fill.
    pub fn reachable_cells(&self) -> usize {
        let n = GRID_SIZE as usize;
        let mut seen = vec![false; n * n];
        let origin = (GRID_SIZE / 2, GRID_SIZE / 2);
        let mut queue = VecDeque::from([origin]);
        seen[origin.1 as usize * n + origin.0 as usize] = true;
        let mut count = 0;
        while let Some(cell) = queue.pop_front() {
            count += 1;
            let (c, r) = (cell.0 as i64, cell.1 as i64);
            for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nc, nr) = (c + dc, r + dr);
                if nc < 0 || nr < 0 || nc >= n as i64 || nr >= n as i64 {
                    continue;
                }
                let next = (nc as u32, nr as u32);
                let idx = nr as usize * n + nc as usize;
                if seen[idx] || self.division_walls.iter().any(|w| w.blocks(cell, next)) {
                    continue;
                }
                seen[idx] = true;
                queue.push_back(next);
            }
        }
        count
    }

    /// Checks grid bounds, connectivity, goal placement and start clearance.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::Format {
            what: "maze",
            reason,
        };
        if self.goal_cell.0 >= GRID_SIZE || self.goal_cell.1 >= GRID_SIZE {
            return Err(bad(format!(
                "goal cell {:?} outside the grid",
                self.goal_cell
            )));
        }
        if start_cells().contains(&self.goal_cell) {
            return Err(bad(format!(
                "goal cell {:?} touches the start",
                self.goal_cell
            )));
        }
        for w in &self.division_walls {
            if w.line_index == 0
                || w.line_index >= GRID_SIZE
                || w.span.0 >= w.span.1
                || w.span.1 > GRID_SIZE
                || !(w.span.0..w.span.1).contains(&w.gap_index)
            {
                return Err(bad(format!("division wall {w:?} is malformed")));
            }
        }
        let reachable = self.reachable_cells();
        if reachable != (GRID_SIZE * GRID_SIZE) as usize {
            return Err(bad(format!(
                "only {reachable} cells reachable from the center"
            )));
        }
        let maze = self.to_maze();
        if maze
            .walls
            .iter()
            .any(|w| w.overlaps_circle(maze.start.position, ROBOT_RADIUS))
        {
            return Err(bad("start pose collides with a wall".into()));
        }
        if maze
            .walls
            .iter()
            .any(|w| w.distance_to(maze.goal) < ROBOT_RADIUS)
        {
            return Err(bad("goal is closer than the robot radius to a wall".into()));
        }
        Ok(())
    }
}

impl Maze {
    /// A maze from explicit geometry, used for fixtures and custom arenas.
    pub fn from_walls(walls: Vec<Rect>, start: RobotState, goal: Point) -> Self {
        Self { walls, start, goal }
    }

    /// Distance from the goal to the farthest arena corner.
    pub fn max_goal_distance(&self) -> f64 {
        [
            Point::new(0.0, 0.0),
            Point::new(EXTENT, 0.0),
            Point::new(0.0, EXTENT),
            Point::new(EXTENT, EXTENT),
        ]
        .into_iter()
        .map(|c| c.distance(self.goal))
        .fold(0.0, f64::max)
    }

    pub fn collides(&self, center: Point) -> bool {
        self.walls
            .iter()
            .any(|w| w.overlaps_circle(center, ROBOT_RADIUS))
    }
}

#[derive(Debug, Clone, Copy)]
struct Region {
    col: u32,
    row: u32,
    width: u32,
    height: u32,
}

impl Region {
    fn area(&self) -> u32 {
        self.width * self.height
    }

    fn divisible(&self) -> bool {
        self.width > 1 && self.height > 1
    }
}

fn divide<R: Rng + ?Sized>(rng: &mut R) -> Vec<DivisionWall> {
    let mut regions = vec![Region {
        col: 0,
        row: 0,
        width: GRID_SIZE,
        height: GRID_SIZE,
    }];
    let mut walls = Vec::with_capacity(DIVISIONS);
    for _ in 0..DIVISIONS {
        let best = regions
            .iter()
            .filter(|r| r.divisible())
            .map(Region::area)
            .max();
        let Some(best) = best else { break };
        let ties: Vec<usize> = (0..regions.len())
            .filter(|&i| regions[i].divisible() && regions[i].area() == best)
            .collect();
        let region = regions.swap_remove(ties[rng.random_range(0..ties.len())]);
        let vertical = match region.width.cmp(&region.height) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => rng.random_bool(0.5),
        };
        if vertical {
            let line = region.col + rng.random_range(1..region.width);
            let gap = region.row + rng.random_range(0..region.height);
            walls.push(DivisionWall {
                orientation: Orientation::Vertical,
                line_index: line,
                span: (region.row, region.row + region.height),
                gap_index: gap,
            });
            regions.push(Region {
                width: line - region.col,
                ..region
            });
            regions.push(Region {
                col: line,
                width: region.col + region.width - line,
                ..region
            });
        } else {
            let line = region.row + rng.random_range(1..region.height);
            let gap = region.col + rng.random_range(0..region.width);
            walls.push(DivisionWall {
                orientation: Orientation::Horizontal,
                line_index: line,
                span: (region.col, region.col + region.width),
                gap_index: gap,
            });
            regions.push(Region {
                height: line - region.row,
                ..region
            });
            regions.push(Region {
                row: line,
                height: region.row + region.height - line,
                ..region
            });
        }
    }
    walls
}

/// Generates a valid maze, regenerating on any invariant failure.
pub fn generate_maze<R: Rng + ?Sized>(rng: &mut R) -> Result<(MazeGrid, Maze)> {
    let excluded = start_cells();
    let mut last_reason = String::new();
    for _ in 0..MAX_ATTEMPTS {
        let division_walls = divide(rng);
        let goal_cell = loop {
            let cell = (
                rng.random_range(0..GRID_SIZE),
                rng.random_range(0..GRID_SIZE),
            );
            if !excluded.contains(&cell) {
                break cell;
            }
        };
        let grid = MazeGrid {
            goal_cell,
            division_walls,
        };
        if grid.division_walls.len() != DIVISIONS {
            last_reason = "grid could not be divided enough times".into();
            continue;
        }
        match grid.validate() {
            Ok(()) => {
                let maze = grid.to_maze();
                return Ok((grid, maze));
            }
            Err(e) => last_reason = e.to_string(),
        }
    }
    Err(Error::MazeGeneration {
        attempts: MAX_ATTEMPTS,
        reason: last_reason,
    })
}

/// A list of mazes plus the seed that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeSet {
    pub seed: u64,
    pub grids: Vec<MazeGrid>,
}

#[derive(Serialize, Deserialize)]
struct MazeDocument {
    format_version: u32,
    grid: MazeGrid,
}

#[derive(Serialize, Deserialize)]
struct MazeSetDocument {
    format_version: u32,
    seed: u64,
    mazes: Vec<MazeDocument>,
}

impl MazeSet {
    /// Generates `count` mazes from a stream seeded with `seed`.
    pub fn generate(count: usize, seed: u64) -> Result<Self> {
        let mut rng = crate::rng::seeded(seed);
        let grids = (0..count)
            .map(|_| generate_maze(&mut rng).map(|(g, _)| g))
            .collect::<Result<_>>()?;
        Ok(Self { seed, grids })
    }

    pub fn mazes(&self) -> Vec<Maze> {
        self.grids.iter().map(MazeGrid::to_maze).collect()
    }

    pub fn len(&self) -> usize {
        self.grids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grids.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MazeSetDocument {
            format_version: MAZE_FORMAT_VERSION,
            seed: self.seed,
            mazes: self
                .grids
                .iter()
                .map(|g| MazeDocument {
                    format_version: MAZE_FORMAT_VERSION,
                    grid: g.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format {
            what: "maze set",
            reason: e.to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MazeSetDocument = serde_json::from_str(text).map_err(|e| Error::Format {
            what: "maze set",
            reason: e.to_string(),
        })?;
        let version_ok = doc.format_version == MAZE_FORMAT_VERSION
            && doc
                .mazes
                .iter()
                .all(|m| m.format_version == MAZE_FORMAT_VERSION);
        if !version_ok {
            return Err(Error::Format {
                what: "maze set",
                reason: "unsupported format version".into(),
            });
        }
        Ok(Self {
            seed: doc.seed,
            grids: doc.mazes.into_iter().map(|m| m.grid).collect(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Validates every grid; returns the index and error of the first failure.
    pub fn validate(&self) -> std::result::Result<(), (usize, Error)> {
        for (i, g) in self.grids.iter().enumerate() {
            g.validate().map_err(|e| (i, e))?;
        }
        Ok(())
    }
}
