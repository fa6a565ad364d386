use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Unit vector for a heading measured counterclockwise from north (+y).
#[inline]
pub fn heading_vector(heading: f64) -> (f64, f64) {
    let (s, c) = heading.sin_cos();
    (-s, c)
}

/// Heading of the vector `(dx, dy)`, counterclockwise from north.
#[inline]
pub fn heading_of(dx: f64, dy: f64) -> f64 {
    (-dx).atan2(dy)
}

/// Axis-aligned rectangle, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    /// Euclidean distance from `p` to the rectangle (zero inside).
    #[inline]
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.min_x - p.x).max(0.0).max(p.x - self.max_x);
        let dy = (self.min_y - p.y).max(0.0).max(p.y - self.max_y);
        dx.hypot(dy)
    }

    #[inline]
    pub fn overlaps_circle(&self, center: Point, radius: f64) -> bool {
        let dx = (self.min_x - center.x).max(0.0).max(center.x - self.max_x);
        let dy = (self.min_y - center.y).max(0.0).max(center.y - self.max_y);
        dx * dx + dy * dy < radius * radius
    }

    /// Parametric interval `[t0, t1]` of the line `origin + t * dir` inside
    /// the rectangle, clipped to `[t_min, t_max]`.
    #[inline]
    fn clip(&self, origin: Point, dir: (f64, f64), t_min: f64, t_max: f64) -> Option<(f64, f64)> {
        let (mut t0, mut t1) = (t_min, t_max);
        for (o, d, lo, hi) in [
            (origin.x, dir.0, self.min_x, self.max_x),
            (origin.y, dir.1, self.min_y, self.max_y),
        ] {
            if d == 0.0 {
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let inv = 1.0 / d;
                let (mut a, mut b) = ((lo - o) * inv, (hi - o) * inv);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                t0 = t0.max(a);
                t1 = t1.min(b);
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }

    /// Distance along a unit ray to the first point of the rectangle.
    #[inline]
    pub fn ray_distance(&self, origin: Point, dir: (f64, f64)) -> Option<f64> {
        self.clip(origin, dir, 0.0, f64::INFINITY).map(|(t0, _)| t0)
    }

    /// [`Rect::ray_distance`] for a ray given by its reciprocal direction
    /// (components may be infinite), capped at `limit`.
    #[inline]
    pub fn ray_distance_inv(&self, origin: Point, inv: (f64, f64), limit: f64) -> f64 {
        let slab = |o: f64, inv: f64, lo: f64, hi: f64| {
            if inv.is_infinite() {
                if o < lo || o > hi {
                    (f64::INFINITY, f64::NEG_INFINITY)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            } else {
                let (a, b) = ((lo - o) * inv, (hi - o) * inv);
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        let (ax, bx) = slab(origin.x, inv.0, self.min_x, self.max_x);
        let (ay, by) = slab(origin.y, inv.1, self.min_y, self.max_y);
        let t0 = ax.max(ay).max(0.0);
        let t1 = bx.min(by);
        if t0 <= t1 && t0 < limit {
            t0
        } else {
            limit
        }
    }

    /// Whether the segment from `a` to `b` touches the rectangle.
    #[inline]
    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        self.clip(a, (b.x - a.x, b.y - a.y), 0.0, 1.0).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heading_conventions() {
        let (x, y) = heading_vector(0.0);
        assert!(x.abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
        let (x, y) = heading_vector(std::f64::consts::FRAC_PI_2);
        assert!((x + 1.0).abs() < 1e-15 && y.abs() < 1e-15);
        assert!((heading_of(-1.0, 0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn ray_and_segment_queries() {
        let r = Rect::new(10.0, -1.0, 12.0, 1.0);
        let d = r.ray_distance(Point::new(0.0, 0.0), (1.0, 0.0)).unwrap();
        assert_eq!(d, 10.0);
        assert!(r.ray_distance(Point::new(0.0, 0.0), (-1.0, 0.0)).is_none());
        assert!(r.ray_distance(Point::new(0.0, 5.0), (1.0, 0.0)).is_none());
        assert!(r.intersects_segment(Point::new(0.0, 0.0), Point::new(20.0, 0.0)));
        assert!(!r.intersects_segment(Point::new(0.0, 0.0), Point::new(9.0, 0.0)));
        assert_eq!(r.distance_to(Point::new(11.0, 4.0)), 3.0);
        assert!(r.overlaps_circle(Point::new(11.0, 3.9), 3.0));
        assert!(!r.overlaps_circle(Point::new(11.0, 4.0), 3.0));
        let inv = (1.0, f64::INFINITY);
        assert_eq!(r.ray_distance_inv(Point::new(0.0, 0.0), inv, 100.0), 10.0);
        assert_eq!(r.ray_distance_inv(Point::new(0.0, 0.0), inv, 5.0), 5.0);
        assert_eq!(r.ray_distance_inv(Point::new(0.0, 5.0), inv, 100.0), 100.0);
        assert_eq!(r.ray_distance_inv(Point::new(11.0, 0.0), inv, 100.0), 0.0);
        assert_eq!(r.distance_to(Point::new(11.0, 0.0)), 0.0);
    }
}
