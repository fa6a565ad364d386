use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use super::geometry::{heading_of, heading_vector, Point};
use super::{Maze, MAX_STEPS, ROBOT_RADIUS};
use crate::error::{ensure_same_len, Error, Result};
use crate::neuro::{Network, NetworkGenome, NetworkState, INPUT_COUNT};
use crate::objectives::BehaviorDescriptor;

pub const SENSOR_COUNT: usize = INPUT_COUNT;
/// Rangefinder readings saturate at this distance.
pub const RANGEFINDER_RANGE: f64 = 100.0;
/// Wheel axle length, equal to the robot diameter.
pub const AXLE: f64 = 2.0 * ROBOT_RADIUS;
pub const MAX_WHEEL_SPEED: f64 = 3.0;

/// Rangefinder directions relative to the heading: front, front-left,
/// front-right, left, right, back.
pub const RANGEFINDER_ANGLES: [f64; 6] = [0.0, FRAC_PI_4, -FRAC_PI_4, FRAC_PI_2, -FRAC_PI_2, PI];

/// `(cos, sin)` of each rangefinder angle, exact for the axis-aligned ones.
const RANGEFINDER_ROTATIONS: [(f64, f64); 6] = [
    (1.0, 0.0),
    (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    (0.0, 1.0),
    (0.0, -1.0),
    (-1.0, 0.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: Point,
    /// Radians counterclockwise from north (+y).
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub final_position: Point,
    pub solved: bool,
    pub steps_used: usize,
}

/// Reads the six rangefinders and four goal-quadrant sensors.
pub fn sense(maze: &Maze, robot: &RobotState) -> [f64; SENSOR_COUNT] {
    let mut out = [0.0; SENSOR_COUNT];
    let p = robot.position;
    let (hx, hy) = heading_vector(robot.heading);
    let mut inv = [(0.0, 0.0); 6];
    for (slot, (cos_a, sin_a)) in inv.iter_mut().zip(RANGEFINDER_ROTATIONS) {
        // heading vector rotated counterclockwise by the sensor angle
        *slot = (
            1.0 / (hx * cos_a - hy * sin_a),
            1.0 / (hx * sin_a + hy * cos_a),
        );
    }
    let mut range = [RANGEFINDER_RANGE; 6];
    for w in &maze.walls {
        // walls out of range cannot shorten any reading
        if w.overlaps_circle(p, RANGEFINDER_RANGE) {
            for (d, &inv) in range.iter_mut().zip(&inv) {
                *d = w.ray_distance_inv(p, inv, *d);
            }
        }
    }
    for (slot, d) in out.iter_mut().zip(range) {
        *slot = d / RANGEFINDER_RANGE;
    }
    let (dx, dy) = (maze.goal.x - p.x, maze.goal.y - p.y);
    if dx == 0.0 && dy == 0.0 {
        return out;
    }
    let visible = !maze
        .walls
        .iter()
        .any(|w| w.intersects_segment(p, maze.goal));
    if visible {
        // bearing relative to the heading, shifted so quadrant 0 starts at -45 degrees
        let rel = (heading_of(dx, dy) - robot.heading + FRAC_PI_4).rem_euclid(TAU);
        let quadrant = ((rel / FRAC_PI_2) as usize).min(3);
        out[6 + quadrant] = 1.0;
    }
    out
}

/// Advances the differential-drive robot by one time step.
///
/// Outputs in `(0, 1)` map linearly onto wheel speeds in `[-3, 3]`. The
/// heading changes first; the translation along the new heading is dropped
/// when it would make the robot overlap a wall.
pub fn step(maze: &Maze, robot: &RobotState, out_left: f64, out_right: f64) -> RobotState {
    let v_left = 2.0 * MAX_WHEEL_SPEED * out_left - MAX_WHEEL_SPEED;
    let v_right = 2.0 * MAX_WHEEL_SPEED * out_right - MAX_WHEEL_SPEED;
    let heading = (robot.heading + (v_right - v_left) / AXLE).rem_euclid(TAU);
    let speed = 0.5 * (v_left + v_right);
    let (ux, uy) = heading_vector(heading);
    let candidate = Point::new(robot.position.x + speed * ux, robot.position.y + speed * uy);
    let position = if speed != 0.0 && !maze.collides(candidate) {
        candidate
    } else {
        robot.position
    };
    RobotState { position, heading }
}

fn at_goal(maze: &Maze, p: Point) -> bool {
    let (dx, dy) = (p.x - maze.goal.x, p.y - maze.goal.y);
    dx * dx + dy * dy < ROBOT_RADIUS * ROBOT_RADIUS
}

/// Runs one trial of `genome` in `maze`, from the maze's start pose.
pub fn simulate(maze: &Maze, genome: &NetworkGenome) -> Result<SimulationOutcome> {
    simulate_traced(maze, genome, |_, _| {})
}

/// [`simulate`], calling `observe(step, pose)` for the start pose and after
/// every step.
pub fn simulate_traced<F>(
    maze: &Maze,
    genome: &NetworkGenome,
    mut observe: F,
) -> Result<SimulationOutcome>
where
    F: FnMut(usize, &RobotState),
{
    let mut net = Network::new(genome)?;
    let mut state = NetworkState::zeros(genome).activation;
    let mut robot = maze.start;
    observe(0, &robot);
    let mut previous_state = state.clone();
    for t in 0..MAX_STEPS {
        if at_goal(maze, robot.position) {
            return Ok(SimulationOutcome {
                final_position: robot.position,
                solved: true,
                steps_used: t,
            });
        }
        let inputs = sense(maze, &robot);
        previous_state.copy_from_slice(&state);
        let [left, right] = net.activate_unchecked(&mut state, &inputs);
        let next = step(maze, &robot, left, right);
        observe(t + 1, &next);
        // identical pose and network state repeat forever, so the rest of the trial is known
        if next == robot && state == previous_state {
            return Ok(SimulationOutcome {
                final_position: robot.position,
                solved: false,
                steps_used: MAX_STEPS,
            });
        }
        robot = next;
    }
    Ok(SimulationOutcome {
        final_position: robot.position,
        solved: at_goal(maze, robot.position),
        steps_used: MAX_STEPS,
    })
}

/// Score in `[0, 1]`: one when solved, else `1 - dist / maxDist`.
pub fn performance(maze: &Maze, outcome: &SimulationOutcome) -> f64 {
    let dist = outcome.final_position.distance(maze.goal);
    if outcome.solved || dist < ROBOT_RADIUS {
        1.0
    } else {
        (1.0 - dist / maze.max_goal_distance()).clamp(0.0, 1.0)
    }
}

/// Final positions over all mazes, concatenated in maze order.
pub fn behavior_descriptor(
    outcomes: &[SimulationOutcome],
    maze_count: usize,
) -> Result<BehaviorDescriptor> {
    ensure_same_len(outcomes.len(), maze_count)?;
    Ok(BehaviorDescriptor(
        outcomes
            .iter()
            .flat_map(|o| [o.final_position.x, o.final_position.y])
            .collect(),
    ))
}

/// Manhattan distance between two descriptors.
pub fn descriptor_distance(a: &BehaviorDescriptor, b: &BehaviorDescriptor) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(manhattan(a.values(), b.values()))
}

#[inline]
pub(crate) fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_match_angles() {
        for (a, (c, s)) in RANGEFINDER_ANGLES.iter().zip(RANGEFINDER_ROTATIONS) {
            assert!((a.cos() - c).abs() < 1e-15 && (a.sin() - s).abs() < 1e-15);
        }
    }
    use crate::maze::{generate_maze, start_pose, Rect};
    use crate::neuro::{ConnectionGene, NetworkGenome};
    use crate::rng::seeded;

    fn chamber(half: f64) -> Maze {
        // 2-unit walls whose inner faces are `half` away from (200, 200)
        let (lo, hi) = (200.0 - half, 200.0 + half);
        Maze::from_walls(
            vec![
                Rect::new(lo - 2.0, lo - 2.0, hi + 2.0, lo),
                Rect::new(lo - 2.0, hi, hi + 2.0, hi + 2.0),
                Rect::new(lo - 2.0, lo - 2.0, lo, hi + 2.0),
                Rect::new(hi, lo - 2.0, hi + 2.0, hi + 2.0),
            ],
            start_pose(),
            Point::new(200.0, 190.0),
        )
    }

    #[test]
    fn rangefinders_in_empty_chamber() {
        let m = chamber(20.0);
        let s = sense(&m, &m.start);
        for i in [0, 3, 4, 5] {
            assert!((s[i] - 0.2).abs() < 1e-12, "sensor {i}: {}", s[i]);
        }
        for i in [1, 2] {
            assert!((s[i] - 20.0 * 2f64.sqrt() / 100.0).abs() < 1e-12);
        }
        // goal straight behind, nothing in between
        assert_eq!(&s[6..], &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn rangefinder_saturates_at_range() {
        let m = chamber(150.0);
        let s = sense(&m, &m.start);
        assert!(s[..4].iter().all(|&r| r == 1.0));
    }

    #[test]
    fn goal_quadrants() {
        let mut m = chamber(150.0);
        let start = m.start;
        for (goal, expected) in [
            ((200.0, 210.0), 0),
            ((190.0, 200.0), 1),
            ((200.0, 190.0), 2),
            ((210.0, 200.0), 3),
            ((190.0, 190.0), 2),
            ((210.0, 210.0), 0),
        ] {
            m.goal = Point::new(goal.0, goal.1);
            let s = sense(&m, &start);
            let active: Vec<usize> = (0..4).filter(|&q| s[6 + q] == 1.0).collect();
            assert_eq!(active, vec![expected], "goal {goal:?}");
        }
        // turning left by 90 degrees moves a north goal into the right quadrant
        m.goal = Point::new(200.0, 210.0);
        let turned = RobotState {
            heading: FRAC_PI_2,
            ..start
        };
        assert_eq!(&sense(&m, &turned)[6..], &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn goal_behind_wall_is_invisible() {
        let mut m = chamber(150.0);
        m.goal = Point::new(200.0, 240.0);
        m.walls.push(Rect::new(150.0, 220.0, 250.0, 222.0));
        let s = sense(&m, &m.start);
        assert_eq!(&s[6..], &[0.0; 4]);
    }

    #[test]
    fn kinematics() {
        let m = chamber(150.0);
        let r = m.start;
        assert_eq!(step(&m, &r, 0.5, 0.5), r);
        let fwd = step(&m, &r, 1.0, 1.0);
        assert!((fwd.position.y - 203.0).abs() < 1e-12 && (fwd.position.x - 200.0).abs() < 1e-12);
        assert_eq!(fwd.heading, 0.0);
        let spin = step(&m, &r, 0.0, 1.0);
        assert_eq!(spin.position, r.position);
        assert!((spin.heading - 0.75).abs() < 1e-12);
    }

    #[test]
    fn collision_cancels_translation_only() {
        let m = chamber(6.0);
        // 2 units of clearance in front: moving 3 would overlap
        let r = RobotState {
            position: Point::new(200.0, 200.0),
            heading: 0.0,
        };
        let next = step(&m, &r, 1.0, 0.99);
        assert_eq!(next.position, r.position);
        assert!(next.heading != r.heading);
    }

    #[test]
    fn stationary_genome_never_moves() {
        let (_, maze) = generate_maze(&mut seeded(1)).unwrap();
        let out = simulate(&maze, &NetworkGenome::minimal()).unwrap();
        assert_eq!(out.final_position, maze.start.position);
        assert!(!out.solved);
        assert_eq!(out.steps_used, MAX_STEPS);
    }

    #[test]
    fn early_termination_on_goal() {
        let mut m = chamber(150.0);
        m.goal = Point::new(200.0, 203.0);
        let out = simulate(&m, &NetworkGenome::minimal()).unwrap();
        assert!(out.solved);
        assert_eq!(out.steps_used, 0);
        assert_eq!(performance(&m, &out), 1.0);

        // goal 6 ahead: one full-speed step brings it within the radius
        m.goal = Point::new(200.0, 206.0);
        let mut g = NetworkGenome::minimal();
        for n in g.nodes.iter_mut().filter(|n| n.id >= 10) {
            n.bias = 1.0;
        }
        let out = simulate(&m, &g).unwrap();
        assert!(out.solved);
        assert_eq!(out.steps_used, 1);
    }

    #[test]
    fn simulation_is_deterministic_and_collision_free() {
        let mut rng = seeded(2);
        let (_, maze) = generate_maze(&mut rng).unwrap();
        let g = crate::neuro::random_genome(&mut rng, &Default::default());
        let mut poses = Vec::new();
        let a = simulate_traced(&maze, &g, |_, r| poses.push(*r)).unwrap();
        let b = simulate(&maze, &g).unwrap();
        assert_eq!(a, b);
        for p in poses {
            assert!(!maze.collides(p.position));
        }
    }

    #[test]
    fn performance_formula() {
        let m = chamber(150.0);
        let max = m.max_goal_distance();
        let corner = [(0.0, 0.0), (400.0, 0.0), (0.0, 400.0), (400.0, 400.0)]
            .into_iter()
            .map(|(x, y)| Point::new(x, y))
            .max_by(|a, b| a.distance(m.goal).total_cmp(&b.distance(m.goal)))
            .unwrap();
        let at = |p: Point| SimulationOutcome {
            final_position: p,
            solved: false,
            steps_used: MAX_STEPS,
        };
        assert_eq!(performance(&m, &at(corner)), 0.0);
        let half = Point::new(
            m.goal.x + (corner.x - m.goal.x) / 2.0,
            m.goal.y + (corner.y - m.goal.y) / 2.0,
        );
        assert!((performance(&m, &at(half)) - 0.5).abs() < 1e-12);
        assert!(max > 0.0);
    }

    #[test]
    fn descriptors() {
        let o = |x, y| SimulationOutcome {
            final_position: Point::new(x, y),
            solved: false,
            steps_used: 0,
        };
        let d = behavior_descriptor(&[o(0.0, 0.0), o(3.0, 4.0)], 2).unwrap();
        assert_eq!(d.values(), &[0.0, 0.0, 3.0, 4.0]);
        assert!(behavior_descriptor(&[o(0.0, 0.0)], 2).is_err());
        let zero = BehaviorDescriptor(vec![0.0; 4]);
        assert_eq!(descriptor_distance(&d, &zero).unwrap(), 7.0);
        assert_eq!(descriptor_distance(&d, &d).unwrap(), 0.0);
        let a = BehaviorDescriptor(vec![1.0, 2.0]);
        let b = BehaviorDescriptor(vec![4.0, 6.0]);
        assert_eq!(descriptor_distance(&a, &b).unwrap(), 7.0);
        assert_eq!(descriptor_distance(&b, &a).unwrap(), 7.0);
        assert!(descriptor_distance(&a, &zero).is_err());
    }

    #[test]
    fn front_rangefinder_decreases_toward_wall() {
        let m = chamber(60.0);
        let mut r = m.start;
        let mut last = sense(&m, &r)[0];
        while r.position.y < 250.0 {
            r.position.y += 1.0;
            let now = sense(&m, &r)[0];
            assert!(now < last);
            last = now;
        }
        let g = NetworkGenome {
            connections: vec![ConnectionGene {
                source: 0,
                target: 10,
                weight: 1.0,
            }],
            ..NetworkGenome::minimal()
        };
        assert!(simulate(&m, &g).is_ok());
    }
}
