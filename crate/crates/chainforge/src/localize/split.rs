use super::fill_small::carrier_of;
use crate::chain::{OneChain, Segment};
use crate::coarea::{check_localized, AdmissibleFamily, Certificates, LocalizationReport};
use crate::cubical::{Cell, VertexMap};
use crate::error::{Error, Result};
use crate::geom::{eps_geom, Point};
use crate::region::Region;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitReport {
    pub supported_in_cell: bool,
    pub corrector_on_boundary: bool,
    pub max_corrector_mass: f64,
    pub localization: LocalizationReport,
}

/// `G = G_Q + G_Qc` with `G_Q` inside the cell `Q`.
pub struct SplitFilling {
    pub inside: VertexMap<OneChain>,
    pub outside: VertexMap<OneChain>,
    pub certs: Certificates,
    pub report: SplitReport,
}

fn cross2(u: Point, v: Point) -> f64 {
    u.x() * v.y() - u.y() * v.x()
}

/// Where the ray from the interior point `o` through `p` leaves the polygon.
fn exit_point(o: Point, p: Point, poly: &[Point]) -> Point {
    let mut t = 1.0f64;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let d = b - a;
        let n = Point::new2(d.y(), -d.x());
        let den = n.dot(p - o);
        if den > 0.0 {
            t = t.min(n.dot(a - o) / den);
        }
    }
    o + (p - o) * t
}

/// Radial image of a segment outside the polygon on its boundary: the arc
/// between the exit points of its ends, through the corners in between.
fn project_segment(o: Point, a: Point, b: Point, poly: &[Point]) -> Vec<Segment> {
    let (pa, pb) = (exit_point(o, a, poly), exit_point(o, b, poly));
    let (ua, ub) = (a - o, b - o);
    let turn = cross2(ua, ub);
    if turn.abs() <= 1e-15 * ua.norm() * ub.norm() || pa.dist(pb) <= eps_geom() {
        return Vec::new();
    }
    let sg = turn.signum();
    let mut corners: Vec<(f64, Point)> = poly
        .iter()
        .filter(|&&u| sg * cross2(ua, u - o) > 0.0 && sg * cross2(u - o, ub) > 0.0)
        .map(|&u| ((sg * cross2(ua, u - o)).atan2(ua.dot(u - o)), u))
        .collect();
    corners.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut path = vec![pa];
    path.extend(corners.into_iter().map(|c| c.1));
    path.push(pb);
    path.windows(2).filter(|w| w[0].dist(w[1]) > 0.0).map(|w| (w[0], w[1])).collect()
}

/// An interior point of the polygon inside the ball, if they overlap.
fn interior_anchor(c: Point, r: f64, q: &Region, poly: &[Point]) -> Result<Option<Point>> {
    let (d, foot) = q.boundary_foot(c)?;
    let inside = q.contains(c);
    if inside && d > 1e-9 {
        return Ok(Some(c));
    }
    let (gap, f) = if inside { (0.0, c) } else { (d, foot) };
    if gap >= r {
        return Ok(None);
    }
    let g = poly.iter().fold(Point::ORIGIN, |s, p| s + *p) * (1.0 / poly.len() as f64);
    let t = (0.5f64).min((r - gap) / (2.0 * g.dist(f)));
    Ok(Some(f + (g - f) * t))
}

/// Keeps the part of `c` inside the polygon and pushes the rest of each
/// certificate ball radially onto the polygon boundary.
fn retract(c: &OneChain, cert: &AdmissibleFamily, q: &Region, poly: &[Point]) -> Result<OneChain> {
    let mut segs = Vec::new();
    let mut covered = Vec::new();
    for &(center, r) in &cert.balls {
        let ball = Region::ball(center, r + eps_geom());
        covered.push(ball.clone());
        let piece = c.restrict(&ball)?;
        if piece.is_empty() {
            continue;
        }
        segs.extend_from_slice(piece.restrict(q)?.segments());
        let out = piece.restrict(&q.clone().complement())?;
        if out.is_empty() {
            continue;
        }
        if let Some(o) = interior_anchor(center, r, q, poly)? {
            for &(a, b) in out.segments() {
                segs.extend(project_segment(o, a, b, poly));
            }
        }
    }
    if c.length_outside(&Region::union(covered))? > 1e-9 {
        return Err(Error::BadSpec("filling difference leaves its certificate".into()));
    }
    Ok(OneChain::new(c.dim(), segs).reduce_collinear())
}

fn near_boundary(p: Point, q: &Region, tol: f64) -> Result<bool> {
    Ok(q.boundary_foot(p)?.0 <= tol)
}

fn within_cell(p: Point, q: &Region) -> Result<bool> {
    Ok(q.contains(p) || near_boundary(p, q, 1e-9)?)
}

/// The cell of the coarse complex carrying a refined cell.
fn top_carrier(c: &Cell, s: i64) -> Cell {
    let anchor: Vec<i64> = c.anchor.iter().map(|a| a.div_euclid(s)).collect();
    let mut axes = c.axes.clone();
    axes.extend((0..c.anchor.len()).filter(|&i| c.anchor[i].rem_euclid(s) != 0));
    Cell::new(anchor, axes)
}

/// Split a localized filling family along a convex polygonal cell `q`.
/// `g` lives on the refinement by `scale` of the complex whose cells key
/// `certs`; values at coarse vertices are restricted to `q`, and every other
/// vertex adds the radial retraction of its difference to the preferred
/// (lowest) vertex of its carrier cell.
pub fn split_filling(g: &VertexMap<OneChain>, certs: &Certificates, q: &Region, scale: u64) -> Result<SplitFilling> {
    let Region::Polygon { vertices: poly } = q else {
        return Err(Error::BadSpec("the splitting cell must be a convex polygon".into()));
    };
    if scale == 0 {
        return Err(Error::BadSpec("scale must be positive".into()));
    }
    let s = scale as i64;
    let mut inside = BTreeMap::new();
    for (y, c) in &g.values {
        if y.iter().all(|k| k.rem_euclid(s) == 0) {
            inside.insert(y.clone(), c.restrict(q)?);
        }
    }
    let mut max_corrector = 0.0f64;
    for (y, c) in &g.values {
        let (carrier, _) = carrier_of(y, s);
        if carrier.dim() == 0 {
            continue;
        }
        let cert = certs.get(&carrier).ok_or_else(|| Error::CertMissing(carrier.key()))?;
        let base: Vec<i64> = carrier.anchor.iter().map(|a| a * s).collect();
        let diff = c.add(g.get(&base));
        let moved = retract(&diff, cert, q, poly)?;
        let val = inside[&base].add(&moved).reduce_collinear();
        inside.insert(y.clone(), val);
    }
    let mut report = SplitReport {
        supported_in_cell: true,
        corrector_on_boundary: true,
        max_corrector_mass: 0.0,
        localization: LocalizationReport::default(),
    };
    let mut outside = BTreeMap::new();
    for (y, c) in &g.values {
        let gq = &inside[y];
        for &(a, b) in gq.segments() {
            if !(within_cell(a, q)? && within_cell(b, q)? && within_cell(a.lerp(b, 0.5), q)?) {
                report.supported_in_cell = false;
            }
        }
        let corr = c.restrict(q)?.add(gq).reduce_collinear();
        for &(a, b) in corr.segments() {
            if a.dist(b) > 1e-7 && !(near_boundary(a, q, 1e-7)? && near_boundary(b, q, 1e-7)? && near_boundary(a.lerp(b, 0.5), q, 1e-7)?) {
                report.corrector_on_boundary = false;
            }
        }
        max_corrector = max_corrector.max(corr.mass());
        outside.insert(y.clone(), c.add(gq).reduce_collinear());
    }
    report.max_corrector_mass = max_corrector;
    let mut out_certs = Certificates::new();
    for c in g.complex.cells.iter().filter(|c| c.dim() > 0) {
        let carrier = top_carrier(c, s);
        let cert = certs.get(&carrier).ok_or_else(|| Error::CertMissing(carrier.key()))?;
        let mut balls = Vec::new();
        for &(center, r) in &cert.balls {
            if interior_anchor(center, r, q, poly)?.is_some() {
                balls.push((center, r));
            }
        }
        out_certs.insert(c.clone(), AdmissibleFamily { balls, delta: cert.delta });
    }
    let inside = VertexMap::new(g.complex.clone(), inside, &format!("split inside of {}", g.provenance));
    report.localization = check_localized(&inside, &out_certs)?;
    let outside = VertexMap::new(g.complex.clone(), outside, &format!("split outside of {}", g.provenance));
    Ok(SplitFilling { inside, outside, certs: out_certs, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::CubicalComplex;

    fn seg(a: (f64, f64), b: (f64, f64)) -> OneChain {
        OneChain::new(2, vec![(Point::new2(a.0, a.1), Point::new2(b.0, b.1))])
    }

    fn edge_family(vals: [OneChain; 4]) -> VertexMap<OneChain> {
        let x = CubicalComplex::unit_cube(1, 1).refine(3);
        let values = (0..4).map(|i| (vec![i as i64], vals[i].clone())).collect();
        VertexMap::new(x, values, "test")
    }

    fn certs(ball: (f64, f64, f64)) -> Certificates {
        let fam = AdmissibleFamily { balls: vec![(Point::new2(ball.0, ball.1), ball.2)], delta: 1.0 };
        CubicalComplex::unit_cube(1, 1).cells.iter().filter(|c| c.dim() > 0).map(|c| (c.clone(), fam.clone())).collect()
    }

    #[test]
    fn inside_cell_is_unchanged() {
        let q = Region::planar_box(0.0, 0.0, 1.0, 1.0);
        let g = edge_family([seg((0.2, 0.2), (0.3, 0.2)), seg((0.2, 0.2), (0.35, 0.2)), seg((0.2, 0.2), (0.4, 0.2)), seg((0.2, 0.2), (0.45, 0.2))]);
        let out = split_filling(&g, &certs((0.3, 0.2, 0.2)), &q, 3).unwrap();
        for (y, c) in &g.values {
            assert!(out.inside.get(y).same(c));
        }
        assert!(out.report.localization.passed());
    }

    #[test]
    fn outside_cell_is_dropped() {
        let q = Region::planar_box(0.0, 0.0, 1.0, 1.0);
        let g = edge_family([seg((2.0, 2.0), (2.1, 2.0)), seg((2.0, 2.0), (2.2, 2.0)), seg((2.0, 2.0), (2.3, 2.0)), seg((2.0, 2.0), (2.4, 2.0))]);
        let out = split_filling(&g, &certs((2.2, 2.0, 0.3)), &q, 3).unwrap();
        assert!(out.inside.values.values().all(|c| c.is_empty()));
    }

    #[test]
    fn crossing_segment_gets_boundary_corrector() {
        let q = Region::planar_box(0.0, 0.0, 1.0, 1.0);
        let g = edge_family([
            OneChain::empty(2),
            seg((0.9, 0.45), (1.05, 0.5)),
            seg((0.9, 0.4), (1.1, 0.6)),
            seg((0.9, 0.4), (1.1, 0.6)),
        ]);
        let out = split_filling(&g, &certs((1.0, 0.5, 0.2)), &q, 3).unwrap();
        assert!(out.report.supported_in_cell && out.report.corrector_on_boundary);
        assert!(out.report.localization.passed());
        // At the coarse end the value is the plain clip; inside the edge the
        // retraction adds a piece of the wall x = 1.
        assert!(out.inside.get(&[3]).same(&seg((0.9, 0.4), (1.0, 0.5))));
        let mid = out.inside.get(&[2]);
        let clip = g.get(&[2]).restrict(&q).unwrap();
        let corr = mid.add(&clip).reduce_collinear();
        assert!(corr.mass() > 0.0);
        assert!(corr.segments().iter().all(|(a, b)| (a.x() - 1.0).abs() < 1e-9 && (b.x() - 1.0).abs() < 1e-9));
        for (y, c) in &g.values {
            assert!(out.inside.get(y).add(out.outside.get(y)).same(c));
        }
    }

    #[test]
    fn missing_certificate() {
        let q = Region::planar_box(0.0, 0.0, 1.0, 1.0);
        let g = edge_family([OneChain::empty(2), OneChain::empty(2), OneChain::empty(2), OneChain::empty(2)]);
        assert!(matches!(split_filling(&g, &Certificates::new(), &q, 3), Err(Error::CertMissing(_))));
    }
}
