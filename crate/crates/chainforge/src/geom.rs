//! Points in the plane or in space, plus the global geometric tolerance.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

/// Default tolerance for point equality and degeneracy predicates.
pub const EPS_GEOM_DEFAULT: f64 = 1e-9;

/// Tolerance used by every predicate in the crate. `CHAINFORGE_EPS_GEOM`
/// overrides the default; the value is read once per process.
pub fn eps_geom() -> f64 {
    static EPS: OnceLock<f64> = OnceLock::new();
    *EPS.get_or_init(|| {
        std::env::var("CHAINFORGE_EPS_GEOM")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|e| e.is_finite() && *e > 0.0)
            .unwrap_or(EPS_GEOM_DEFAULT)
    })
}

/// A point of R^2 or R^3. Planar points keep a zero third coordinate; the
/// ambient dimension lives on the chains.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point(pub [f64; 3]);

impl Point {
    pub const ORIGIN: Point = Point([0.0, 0.0, 0.0]);

    pub fn new2(x: f64, y: f64) -> Point {
        Point([x, y, 0.0])
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Point {
        Point([x, y, z])
    }

    /// South pole `e` of the unit sphere in dimension `n`.
    pub fn south_pole(n: usize) -> Point {
        if n == 2 {
            Point::new2(0.0, -1.0)
        } else {
            Point::new3(0.0, 0.0, -1.0)
        }
    }

    /// North pole `e'`.
    pub fn north_pole(n: usize) -> Point {
        -Point::south_pole(n)
    }

    pub fn from_slice(c: &[f64]) -> Option<Point> {
        match c.len() {
            2 => Some(Point::new2(c[0], c[1])),
            3 => Some(Point::new3(c[0], c[1], c[2])),
            _ => None,
        }
    }

    pub fn to_vec(self, dim: usize) -> Vec<f64> {
        self.0[..dim].to_vec()
    }

    pub fn x(self) -> f64 {
        self.0[0]
    }
    pub fn y(self) -> f64 {
        self.0[1]
    }
    pub fn z(self) -> f64 {
        self.0[2]
    }

    pub fn dot(self, o: Point) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: Point) -> Point {
        let [a, b, c] = self.0;
        let [d, e, f] = o.0;
        Point([b * f - c * e, c * d - a * f, a * e - b * d])
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point([
            self.0[0] + (o.0[0] - self.0[0]) * t,
            self.0[1] + (o.0[1] - self.0[1]) * t,
            self.0[2] + (o.0[2] - self.0[2]) * t,
        ])
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Within the global tolerance of `o`.
    pub fn approx_eq(self, o: Point) -> bool {
        self.dist(o) <= eps_geom()
    }

    /// Lexicographic order on coordinates.
    pub fn lex_cmp(&self, o: &Point) -> Ordering {
        for i in 0..3 {
            match self.0[i].total_cmp(&o.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Parameters `t` where the line `a + t (b - a)` meets the sphere of radius
/// `s` about `c`, in increasing order. `None` when the line misses it.
pub fn line_sphere_params(a: Point, b: Point, c: Point, s: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm2();
    if qa == 0.0 {
        return None;
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.norm2() - s * s;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = if qb >= 0.0 { -0.5 * (qb + sq) } else { -0.5 * (qb - sq) };
    let (mut t0, mut t1) = if q != 0.0 { (q / qa, qc / q) } else { (0.0, 0.0) };
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    Some((t0, t1))
}

/// Distance from `p` to the segment `[a, b]`, with the parameter of the
/// closest point.
pub fn point_segment_dist(p: Point, a: Point, b: Point) -> (f64, f64) {
    let d = b - a;
    let l2 = d.norm2();
    if l2 == 0.0 {
        return (p.dist(a), 0.0);
    }
    let t = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    (p.dist(a + d * t), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_are_antipodal() {
        for n in [2, 3] {
            let e = Point::south_pole(n);
            assert_eq!(e.norm(), 1.0);
            assert_eq!(e + Point::north_pole(n), Point::ORIGIN);
        }
    }

    #[test]
    fn sphere_params_for_diameter() {
        let (t0, t1) =
            line_sphere_params(Point::new2(-1.0, 0.0), Point::new2(1.0, 0.0), Point::ORIGIN, 0.5)
                .unwrap();
        assert!((t0 - 0.25).abs() < 1e-15);
        assert!((t1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn lex_order_breaks_on_first_coordinate() {
        let a = Point::new2(0.0, 5.0);
        let b = Point::new2(1.0, -5.0);
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
    }
}
