//! Regions used for restriction: balls, the unit disk, boundary caps,
//! halfspaces, convex polygons, and their complements and intersections.

use crate::error::{Error, Result};
use crate::geom::{eps_geom, line_sphere_params, point_segment_dist, Point};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// All of the ambient space.
    Whole,
    /// Closed Euclidean ball.
    Ball { center: Point, radius: f64 },
    /// Open unit disk (points at least `eps_geom` inside the sphere).
    DiskInterior { dim: usize },
    /// Cap `{x on the unit sphere : |x - center| <= radius}`.
    BoundaryBall { center: Point, radius: f64 },
    /// `{x : normal . x <= offset}`.
    HalfSpace { normal: Point, offset: f64 },
    /// Convex planar polygon, vertices counter-clockwise.
    Polygon { vertices: Vec<Point> },
    Complement { inner: Box<Region> },
    Intersection { parts: Vec<Region> },
}

fn complement_intervals(iv: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut cur = 0.0;
    for &(a, b) in iv {
        if a > cur {
            out.push((cur, a));
        }
        cur = cur.max(b);
    }
    if cur < 1.0 {
        out.push((cur, 1.0));
    }
    out
}

fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

impl Region {
    pub fn ball(center: Point, radius: f64) -> Region {
        Region::Ball { center, radius }
    }

    /// Closed unit disk of dimension `n` as a ball about the origin.
    pub fn unit_disk() -> Region {
        Region::ball(Point::ORIGIN, 1.0)
    }

    pub fn polygon(vertices: Vec<Point>) -> Region {
        Region::Polygon { vertices }
    }

    /// Axis-aligned planar box.
    pub fn planar_box(x0: f64, y0: f64, x1: f64, y1: f64) -> Region {
        Region::polygon(vec![
            Point::new2(x0, y0),
            Point::new2(x1, y0),
            Point::new2(x1, y1),
            Point::new2(x0, y1),
        ])
    }

    pub fn complement(self) -> Region {
        match self {
            Region::Complement { inner } => *inner,
            r => Region::Complement { inner: Box::new(r) },
        }
    }

    pub fn intersect(parts: Vec<Region>) -> Region {
        Region::Intersection { parts }
    }

    pub fn union(parts: Vec<Region>) -> Region {
        Region::intersect(parts.into_iter().map(Region::complement).collect()).complement()
    }

    /// Closed membership (open for `DiskInterior`).
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Whole => true,
            Region::Ball { center, radius } => p.dist(*center) <= *radius,
            Region::DiskInterior { .. } => p.norm() < 1.0 - eps_geom(),
            Region::BoundaryBall { center, radius } => {
                (p.norm() - 1.0).abs() <= eps_geom() && p.dist(*center) <= *radius
            }
            Region::HalfSpace { normal, offset } => normal.dot(p) <= *offset,
            Region::Polygon { vertices } => polygon_edges(vertices)
                .all(|(a, b)| cross2(b - a, p - a) >= 0.0),
            Region::Complement { inner } => !inner.contains(p),
            Region::Intersection { parts } => parts.iter().all(|r| r.contains(p)),
        }
    }

    /// Sorted disjoint parameter intervals of `[0, 1]` for which
    /// `a + t (b - a)` lies in the region.
    pub fn clip_intervals(&self, a: Point, b: Point) -> Result<Vec<(f64, f64)>> {
        let eps = eps_geom();
        let len = a.dist(b);
        Ok(match self {
            Region::Whole => vec![(0.0, 1.0)],
            Region::Ball { center, radius } => ball_intervals(a, b, *center, *radius),
            Region::DiskInterior { .. } => ball_intervals(a, b, Point::ORIGIN, 1.0),
            // A chord meets the sphere in at most two points.
            Region::BoundaryBall { .. } => Vec::new(),
            Region::HalfSpace { normal, offset } => {
                halfspace_intervals(a, b, *normal, *offset, len, eps)?
            }
            Region::Polygon { vertices } => {
                let mut iv = vec![(0.0, 1.0)];
                for (p, q) in polygon_edges(vertices) {
                    let e = q - p;
                    let normal = Point::new2(e.y(), -e.x()).normalized();
                    let h = halfspace_intervals(a, b, normal, normal.dot(p), len, eps)?;
                    iv = intersect_intervals(&iv, &h);
                    if iv.is_empty() {
                        break;
                    }
                }
                iv
            }
            Region::Complement { inner } => complement_intervals(&inner.clip_intervals(a, b)?),
            Region::Intersection { parts } => {
                let mut iv = vec![(0.0, 1.0)];
                for r in parts {
                    iv = intersect_intervals(&iv, &r.clip_intervals(a, b)?);
                }
                iv
            }
        })
    }

    /// Distance to the boundary and its foot, for convex domains.
    pub fn boundary_foot(&self, p: Point) -> Result<(f64, Point)> {
        match self {
            Region::Ball { center, radius } => {
                let v = p - *center;
                let n = v.norm();
                let dir = if n > 0.0 { v * (1.0 / n) } else { Point::new2(0.0, -1.0) };
                Ok(((radius - n).max(0.0), *center + dir * *radius))
            }
            Region::Polygon { vertices } => {
                let mut best = (f64::INFINITY, p);
                for (a, b) in polygon_edges(vertices) {
                    let (d, t) = point_segment_dist(p, a, b);
                    if d < best.0 {
                        best = (d, a.lerp(b, t));
                    }
                }
                Ok(best)
            }
            _ => Err(Error::NonConvexDomain),
        }
    }

    pub fn is_convex_domain(&self) -> bool {
        matches!(self, Region::Ball { .. } | Region::Polygon { .. })
    }

    /// Bounding radius about the origin, when finite.
    pub fn circumradius(&self) -> Option<f64> {
        match self {
            Region::Ball { center, radius } => Some(center.norm() + radius),
            Region::DiskInterior { .. } => Some(1.0),
            Region::Polygon { vertices } => {
                vertices.iter().map(|v| v.norm()).fold(None, |m, d| Some(m.map_or(d, |m: f64| m.max(d))))
            }
            Region::Intersection { parts } => {
                parts.iter().filter_map(|r| r.circumradius()).fold(None, |m, d| Some(m.map_or(d, |m: f64| m.min(d))))
            }
            _ => None,
        }
    }
}

fn cross2(u: Point, v: Point) -> f64 {
    u.x() * v.y() - u.y() * v.x()
}

pub(crate) fn polygon_edges(v: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

/// Signed area of a planar polygon (positive when counter-clockwise).
pub fn polygon_area(v: &[Point]) -> f64 {
    0.5 * polygon_edges(v).map(|(a, b)| cross2(a, b)).sum::<f64>()
}

fn ball_intervals(a: Point, b: Point, c: Point, r: f64) -> Vec<(f64, f64)> {
    match line_sphere_params(a, b, c, r) {
        Some((t0, t1)) => {
            let lo = t0.max(0.0);
            let hi = t1.min(1.0);
            if hi > lo {
                vec![(lo, hi)]
            } else {
                Vec::new()
            }
        }
        None => Vec::new(),
    }
}

fn halfspace_intervals(
    a: Point,
    b: Point,
    normal: Point,
    offset: f64,
    len: f64,
    eps: f64,
) -> Result<Vec<(f64, f64)>> {
    let nn = normal.norm();
    let fa = (normal.dot(a) - offset) / nn;
    let fb = (normal.dot(b) - offset) / nn;
    if fa.abs() <= eps && fb.abs() <= eps && len > eps {
        return Err(Error::DegenerateCrossing);
    }
    Ok(if fa <= 0.0 && fb <= 0.0 {
        vec![(0.0, 1.0)]
    } else if fa > 0.0 && fb > 0.0 {
        Vec::new()
    } else {
        let t = fa / (fa - fb);
        if fa <= 0.0 {
            if t > 0.0 { vec![(0.0, t)] } else { Vec::new() }
        } else if t < 1.0 {
            vec![(t, 1.0)]
        } else {
            Vec::new()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_clip_of_diameter() {
        let iv = Region::ball(Point::ORIGIN, 0.25)
            .clip_intervals(Point::new2(-0.5, 0.0), Point::new2(0.5, 0.0))
            .unwrap();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 0.25).abs() < 1e-15 && (iv[0].1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn complement_splits_chord() {
        let r = Region::ball(Point::ORIGIN, 0.25).complement();
        let iv = r.clip_intervals(Point::new2(-0.5, 0.0), Point::new2(0.5, 0.0)).unwrap();
        assert_eq!(iv.len(), 2);
    }

    #[test]
    fn segment_on_polygon_edge_is_degenerate() {
        let sq = Region::planar_box(0.0, 0.0, 1.0, 1.0);
        let e = sq.clip_intervals(Point::new2(0.2, 0.0), Point::new2(0.8, 0.0));
        assert_eq!(e, Err(Error::DegenerateCrossing));
    }

    #[test]
    fn polygon_foot_is_nearest_edge() {
        let sq = Region::planar_box(0.0, 0.0, 1.0, 1.0);
        let (d, f) = sq.boundary_foot(Point::new2(0.3, 0.1)).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        assert!(f.approx_eq(Point::new2(0.3, 0.0)));
        assert!(Region::Whole.boundary_foot(Point::ORIGIN).is_err());
    }

    #[test]
    fn union_by_de_morgan() {
        let u = Region::union(vec![
            Region::ball(Point::new2(-1.0, 0.0), 0.5),
            Region::ball(Point::new2(1.0, 0.0), 0.5),
        ]);
        assert!(u.contains(Point::new2(1.2, 0.0)));
        assert!(!u.contains(Point::ORIGIN));
        let iv = u.clip_intervals(Point::new2(-2.0, 0.0), Point::new2(2.0, 0.0)).unwrap();
        assert_eq!(iv.len(), 2);
    }
}
