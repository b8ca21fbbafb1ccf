//! Mod-2 chains: finite point sets, segment soups and planar triangle soups.

use crate::error::{Error, Result};
use crate::geom::{eps_geom, line_sphere_params, point_segment_dist, Point};
use crate::region::Region;
use serde::{Deserialize, Serialize};

/// Sort by key and remove pairs of entries that agree within tolerance.
/// `close` must imply `key` values within `eps` of each other.
fn cancel_pairs<T: Copy>(
    mut items: Vec<T>,
    key: impl Fn(&T) -> f64,
    cmp: impl Fn(&T, &T) -> std::cmp::Ordering,
    close: impl Fn(&T, &T) -> bool,
) -> Vec<T> {
    let eps = eps_geom();
    items.sort_by(&cmp);
    let n = items.len();
    let mut dead = vec![false; n];
    for i in 0..n {
        if dead[i] {
            continue;
        }
        let ki = key(&items[i]);
        let mut j = i + 1;
        while j < n && key(&items[j]) - ki <= eps {
            if !dead[j] && close(&items[i], &items[j]) {
                dead[i] = true;
                dead[j] = true;
                break;
            }
            j += 1;
        }
    }
    items.into_iter().zip(dead).filter(|(_, d)| !d).map(|(p, _)| p).collect()
}

/// A mod-2 zero-chain. Always kept canonical: no two points within
/// `eps_geom`, lexicographically sorted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroChain {
    dim: usize,
    points: Vec<Point>,
}

impl ZeroChain {
    pub fn new(dim: usize, points: Vec<Point>) -> ZeroChain {
        let eps = eps_geom();
        let points = cancel_pairs(points, |p| p.x(), |a, b| a.lex_cmp(b), |a, b| a.dist(*b) <= eps);
        ZeroChain { dim, points }
    }

    pub fn empty(dim: usize) -> ZeroChain {
        ZeroChain { dim, points: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn mass(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn add(&self, o: &ZeroChain) -> ZeroChain {
        let mut pts = self.points.clone();
        pts.extend_from_slice(&o.points);
        ZeroChain::new(self.dim.max(o.dim), pts)
    }

    /// Equality as mod-2 chains.
    pub fn same(&self, o: &ZeroChain) -> bool {
        self.add(o).is_empty()
    }

    pub fn restrict(&self, r: &Region) -> ZeroChain {
        ZeroChain {
            dim: self.dim,
            points: self.points.iter().copied().filter(|p| r.contains(*p)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> ZeroChain {
        ZeroChain::new(self.dim, self.points.iter().map(|p| f(*p)).collect())
    }
}

/// Mod-2 sum of two zero-chains.
pub fn add_zero(a: &ZeroChain, b: &ZeroChain) -> ZeroChain {
    a.add(b)
}

pub type Segment = (Point, Point);

/// A mod-2 one-chain made of segments. Canonical form: every segment longer
/// than `eps_geom`, endpoints ordered, segments sorted, and segments that
/// coincide as endpoint pairs cancelled.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OneChain {
    dim: usize,
    segments: Vec<Segment>,
}

impl OneChain {
    pub fn new(dim: usize, segments: Vec<Segment>) -> OneChain {
        let eps = eps_geom();
        let segs: Vec<Segment> = segments
            .into_iter()
            .filter(|(a, b)| a.dist(*b) > eps)
            .map(|(a, b)| if b.lex_cmp(&a).is_lt() { (b, a) } else { (a, b) })
            .collect();
        let segments = cancel_pairs(
            segs,
            |s| s.0.x(),
            |s, t| s.0.lex_cmp(&t.0).then_with(|| s.1.lex_cmp(&t.1)),
            |s, t| {
                (s.0.dist(t.0) <= eps && s.1.dist(t.1) <= eps)
                    || (s.0.dist(t.1) <= eps && s.1.dist(t.0) <= eps)
            },
        );
        OneChain { dim, segments }
    }

    pub fn empty(dim: usize) -> OneChain {
        OneChain { dim, segments: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.segments.iter().map(|(a, b)| a.dist(*b)).sum()
    }

    pub fn add(&self, o: &OneChain) -> OneChain {
        let mut s = self.segments.clone();
        s.extend_from_slice(&o.segments);
        OneChain::new(self.dim.max(o.dim), s)
    }

    pub fn boundary(&self) -> ZeroChain {
        let pts = self.segments.iter().flat_map(|(a, b)| [*a, *b]).collect();
        ZeroChain::new(self.dim, pts)
    }

    pub fn restrict(&self, r: &Region) -> Result<OneChain> {
        let mut out = Vec::new();
        for &(a, b) in &self.segments {
            for (t0, t1) in r.clip_intervals(a, b)? {
                let p = if t0 == 0.0 { a } else { a.lerp(b, t0) };
                let q = if t1 == 1.0 { b } else { a.lerp(b, t1) };
                out.push((p, q));
            }
        }
        Ok(OneChain::new(self.dim, out))
    }

    /// Transversal intersection with the sphere of radius `s` about `center`.
    pub fn slice_sphere(&self, center: Point, s: f64) -> Result<ZeroChain> {
        let eps = eps_geom();
        let mut pts = Vec::new();
        for &(a, b) in &self.segments {
            let (d, t) = point_segment_dist(center, a, b);
            let interior_touch = t > 0.0 && t < 1.0 && (d - s).abs() <= eps;
            let end_touch = (a.dist(center) - s).abs() <= eps || (b.dist(center) - s).abs() <= eps;
            if interior_touch || end_touch {
                return Err(Error::TangencyError(d));
            }
            if let Some((t0, t1)) = line_sphere_params(a, b, center, s) {
                for t in [t0, t1] {
                    if t > 0.0 && t < 1.0 {
                        pts.push(a.lerp(b, t));
                    }
                }
            }
        }
        Ok(ZeroChain::new(self.dim, pts))
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> OneChain {
        OneChain::new(self.dim, self.segments.iter().map(|(a, b)| (f(*a), f(*b))).collect())
    }

    /// Length of the part of the chain outside `r`.
    pub fn length_outside(&self, r: &Region) -> Result<f64> {
        Ok(self.restrict(&r.clone().complement())?.mass())
    }

    /// Mod-2 reduction across overlapping collinear segments: segments on a
    /// common line are replaced by the odd-coverage intervals. Boundary is
    /// unchanged; mass can only drop. Lines are matched with a small
    /// tolerance so that pieces cut from different parents still cancel.
    pub fn reduce_collinear(&self) -> OneChain {
        const PROBE: [f64; 3] = [0.754_877_666_2, 0.569_840_291_0, 0.324_919_796_2];
        let probe = Point(PROBE);
        let tol = 1e-8;
        let keys: Vec<(Point, Point)> = self
            .segments
            .iter()
            .map(|&(a, b)| {
                let mut u = (b - a).normalized();
                if u.dot(probe) < 0.0 {
                    u = -u;
                }
                (u, a - u * a.dot(u))
            })
            .collect();
        let n = keys.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| keys[i].0.x().total_cmp(&keys[j].0.x()));
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for a in 0..n {
            let i = order[a];
            for &j in &order[a + 1..] {
                if keys[j].0.x() - keys[i].0.x() > tol {
                    break;
                }
                if (keys[j].0 - keys[i].0).norm() <= tol && (keys[j].1 - keys[i].1).norm() <= tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let eps = eps_geom();
        let mut out = Vec::new();
        for (_, g) in groups {
            if g.len() == 1 {
                out.push(self.segments[g[0]]);
                continue;
            }
            let u = keys[g[0]].0;
            let mut ends: Vec<(f64, Point)> = g
                .iter()
                .flat_map(|&k| {
                    let (a, b) = self.segments[k];
                    [(a.dot(u), a), (b.dot(u), b)]
                })
                .collect();
            ends.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut kept: Vec<Point> = Vec::with_capacity(ends.len());
            let mut idx = 0;
            while idx < ends.len() {
                if idx + 1 < ends.len() && ends[idx + 1].0 - ends[idx].0 <= eps {
                    idx += 2;
                } else {
                    kept.push(ends[idx].1);
                    idx += 1;
                }
            }
            for pair in kept.chunks(2) {
                if let [p, q] = pair {
                    out.push((*p, *q));
                }
            }
        }
        OneChain::new(self.dim, out)
    }

    /// Mod-2 equality as chains (collinear overlaps reduced).
    pub fn same(&self, o: &OneChain) -> bool {
        self.add(o).reduce_collinear().is_empty()
    }
}

/// Boundary operator on one-chains.
pub fn boundary_one(c: &OneChain) -> ZeroChain {
    c.boundary()
}

/// Restrict a zero-chain to a region.
pub fn restrict_zero(c: &ZeroChain, a: &Region) -> ZeroChain {
    c.restrict(a)
}

/// Restrict a one-chain to a region.
pub fn restrict_one(c: &OneChain, a: &Region) -> Result<OneChain> {
    c.restrict(a)
}

/// Transversal slice of a one-chain by a sphere.
pub fn slice_sphere(c: &OneChain, center: Point, s: f64) -> Result<ZeroChain> {
    c.slice_sphere(center, s)
}

/// Segments from `apex` to every point of `z`. For even `z` the boundary is `z`.
pub fn cone_fill(z: &ZeroChain, apex: Point) -> OneChain {
    OneChain::new(z.dim(), z.points().iter().map(|p| (apex, *p)).collect())
}

pub type Triangle = [Point; 3];

/// A planar mod-2 two-chain given as a triangle soup.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoChain {
    triangles: Vec<Triangle>,
}

fn tri_area(t: &Triangle) -> f64 {
    let u = t[1] - t[0];
    let v = t[2] - t[0];
    0.5 * (u.x() * v.y() - u.y() * v.x()).abs()
}

impl TwoChain {
    /// Drops triangles of area below `eps_geom^2`.
    pub fn new(triangles: Vec<Triangle>) -> TwoChain {
        let e = eps_geom();
        TwoChain { triangles: triangles.into_iter().filter(|t| tri_area(t) > e * e).collect() }
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn mass(&self) -> f64 {
        self.triangles.iter().map(tri_area).sum()
    }

    pub fn add(&self, o: &TwoChain) -> TwoChain {
        let mut t = self.triangles.clone();
        t.extend_from_slice(&o.triangles);
        TwoChain { triangles: t }
    }

    /// Edges mod 2; shared edges of adjacent triangles cancel exactly, then
    /// collinear overlaps are reduced.
    pub fn boundary(&self) -> OneChain {
        let segs = self.triangles.iter().flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]).collect();
        OneChain::new(2, segs).reduce_collinear()
    }

    /// A filling of a planar one-cycle: each connected component is coned
    /// from one of its own vertices, so the support stays in the component's
    /// convex hull.
    pub fn fill_cycle(eta: &OneChain) -> TwoChain {
        let segs = eta.segments();
        let n = segs.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut ends: Vec<(Point, usize)> = segs.iter().enumerate().flat_map(|(i, s)| [(s.0, i), (s.1, i)]).collect();
        ends.sort_by(|a, b| a.0.x().total_cmp(&b.0.x()));
        let eps = eps_geom();
        for i in 0..ends.len() {
            for j in i + 1..ends.len() {
                if ends[j].0.x() - ends[i].0.x() > eps {
                    break;
                }
                if ends[i].0.dist(ends[j].0) <= eps {
                    let (a, b) = (find(&mut parent, ends[i].1), find(&mut parent, ends[j].1));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut tris = Vec::with_capacity(n);
        for i in 0..n {
            let apex = segs[find(&mut parent, i)].0;
            tris.push([apex, segs[i].0, segs[i].1]);
        }
        TwoChain::new(tris)
    }

    /// Mod-2 membership: odd number of triangles containing `p`.
    pub fn contains(&self, p: Point) -> bool {
        self.triangles.iter().filter(|t| tri_contains(t, p)).count() % 2 == 1
    }

    /// Length of the segment `a b` covered an odd number of times.
    pub fn odd_length_on(&self, a: Point, b: Point) -> f64 {
        let mut events: Vec<f64> = Vec::new();
        for t in &self.triangles {
            let mut iv = (0.0f64, 1.0f64);
            for (n, c) in edge_halfplanes(&oriented(t)) {
                let fa = n.dot(a) - c;
                let fb = n.dot(b) - c;
                if fa > 0.0 && fb > 0.0 {
                    iv = (1.0, 0.0);
                    break;
                }
                if fa > 0.0 || fb > 0.0 {
                    let s = fa / (fa - fb);
                    if fa > 0.0 {
                        iv.0 = iv.0.max(s);
                    } else {
                        iv.1 = iv.1.min(s);
                    }
                }
            }
            if iv.1 > iv.0 {
                events.push(iv.0);
                events.push(iv.1);
            }
        }
        events.sort_by(f64::total_cmp);
        let len = a.dist(b);
        events.chunks(2).map(|c| (c[1] - c[0]) * len).sum()
    }

    /// Clip every triangle against a convex polygon, or its complement.
    pub fn clip_convex(&self, poly: &[Point], inside: bool) -> TwoChain {
        let mut out = Vec::new();
        for t in &self.triangles {
            let pieces = if inside {
                vec![clip_polygon(t, poly)]
            } else {
                subtract_convex(t, poly)
            };
            for p in pieces {
                out.extend(fan(&p));
            }
        }
        TwoChain::new(out)
    }
}

fn oriented(t: &Triangle) -> Vec<Point> {
    let u = t[1] - t[0];
    let v = t[2] - t[0];
    if u.x() * v.y() - u.y() * v.x() < 0.0 {
        vec![t[0], t[1], t[2]]
    } else {
        vec![t[0], t[2], t[1]]
    }
}

fn tri_contains(t: &Triangle, p: Point) -> bool {
    edge_halfplanes(&oriented(t)).iter().all(|(n, c)| n.dot(p) <= *c)
}

/// Regular `m`-gon of circumradius `s` about `c`, rotated off the axes.
pub fn regular_polygon(c: Point, s: f64, m: usize) -> Vec<Point> {
    const PHASE: f64 = 0.113_137_084_989_847_6;
    (0..m)
        .map(|k| {
            let th = PHASE + std::f64::consts::TAU * k as f64 / m as f64;
            Point::new2(c.x() + s * th.cos(), c.y() + s * th.sin())
        })
        .collect()
}

/// Sutherland-Hodgman clip of a convex polygon against halfplane `n.x <= c`.
fn clip_halfplane(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let fp = n.dot(p) - c;
        let fq = n.dot(q) - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            out.push(p.lerp(q, fp / (fp - fq)));
        }
    }
    out
}

fn edge_halfplanes(poly: &[Point]) -> Vec<(Point, f64)> {
    (0..poly.len())
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let e = b - a;
            let n = Point::new2(e.y(), -e.x());
            (n, n.dot(a))
        })
        .collect()
}

fn clip_polygon(t: &Triangle, poly: &[Point]) -> Vec<Point> {
    let mut cur = t.to_vec();
    for (n, c) in edge_halfplanes(poly) {
        if cur.len() < 3 {
            break;
        }
        cur = clip_halfplane(&cur, n, c);
    }
    cur
}

/// Convex pieces of `t` minus a convex polygon.
fn subtract_convex(t: &Triangle, poly: &[Point]) -> Vec<Vec<Point>> {
    let mut pieces = Vec::new();
    let mut rest = t.to_vec();
    for (n, c) in edge_halfplanes(poly) {
        if rest.len() < 3 {
            break;
        }
        let outside = clip_halfplane(&rest, -n, -c);
        if outside.len() >= 3 {
            pieces.push(outside);
        }
        rest = clip_halfplane(&rest, n, c);
    }
    pieces
}

fn fan(p: &[Point]) -> Vec<Triangle> {
    (1..p.len().saturating_sub(1)).map(|i| [p[0], p[i], p[i + 1]]).collect()
}

/// JSON exchange format for chains.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainJson {
    pub dim: usize,
    #[serde(default)]
    pub zero: Vec<Vec<f64>>,
    #[serde(default)]
    pub one: Vec<[Vec<f64>; 2]>,
}

impl ChainJson {
    pub fn from_chains(z: &ZeroChain, c: Option<&OneChain>) -> ChainJson {
        let dim = z.dim().max(c.map_or(0, |c| c.dim()));
        ChainJson {
            dim,
            zero: z.points().iter().map(|p| p.to_vec(dim)).collect(),
            one: c
                .map(|c| c.segments().iter().map(|(a, b)| [a.to_vec(dim), b.to_vec(dim)]).collect())
                .unwrap_or_default(),
        }
    }

    pub fn zero_chain(&self) -> Result<ZeroChain> {
        let pts = self
            .zero
            .iter()
            .map(|c| parse_point(c, self.dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(ZeroChain::new(self.dim, pts))
    }

    pub fn one_chain(&self) -> Result<OneChain> {
        let segs = self
            .one
            .iter()
            .map(|[a, b]| Ok((parse_point(a, self.dim)?, parse_point(b, self.dim)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(OneChain::new(self.dim, segs))
    }
}

fn parse_point(c: &[f64], dim: usize) -> Result<Point> {
    if c.len() != dim || !(dim == 2 || dim == 3) {
        return Err(Error::BadSpec(format!("point {c:?} does not have {dim} coordinates")));
    }
    let p = Point::from_slice(c).expect("length checked");
    if !p.is_finite() {
        return Err(Error::BadSpec("non-finite coordinate".into()));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new2(x, y)
    }

    #[test]
    fn symmetric_difference_by_hand() {
        let a = ZeroChain::new(2, vec![p(0.1, 0.1), p(0.2, 0.2)]);
        let b = ZeroChain::new(2, vec![p(0.2, 0.2), p(0.3, 0.0)]);
        assert!(add_zero(&a, &b).same(&ZeroChain::new(2, vec![p(0.1, 0.1), p(0.3, 0.0)])));
        assert!(add_zero(&a, &a).is_empty());
        assert!(add_zero(&ZeroChain::empty(2), &ZeroChain::empty(2)).is_empty());
    }

    #[test]
    fn near_duplicates_cancel() {
        let z = ZeroChain::new(2, vec![p(0.5, 0.5), p(0.5 + 1e-12, 0.5), p(0.1, 0.0)]);
        assert_eq!(z.mass(), 1);
    }

    #[test]
    fn path_boundary_drops_shared_vertex() {
        let c = OneChain::new(2, vec![(p(0.0, 0.0), p(0.5, 0.0)), (p(0.5, 0.0), p(0.5, 0.5))]);
        assert!(boundary_one(&c).same(&ZeroChain::new(2, vec![p(0.0, 0.0), p(0.5, 0.5)])));
        assert_eq!(boundary_one(&OneChain::empty(2)).mass(), 0);
    }

    #[test]
    fn restrict_to_small_ball() {
        let c = OneChain::new(2, vec![(p(-0.5, 0.0), p(0.5, 0.0))]);
        let r = c.restrict(&Region::ball(Point::ORIGIN, 0.25)).unwrap();
        assert_eq!(r.segments().len(), 1);
        let (a, b) = r.segments()[0];
        assert!(a.approx_eq(p(-0.25, 0.0)) && b.approx_eq(p(0.25, 0.0)));
        let z = ZeroChain::new(2, vec![p(0.9, 0.0)]);
        assert!(z.restrict(&Region::ball(Point::ORIGIN, 0.5)).is_empty());
        assert!(c.restrict(&Region::unit_disk()).unwrap().same(&c));
    }

    #[test]
    fn slice_of_diameter() {
        let c = OneChain::new(2, vec![(p(-1.0, 0.0), p(1.0, 0.0))]);
        assert_eq!(c.slice_sphere(Point::ORIGIN, 0.5).unwrap().mass(), 2);
        assert_eq!(c.slice_sphere(Point::ORIGIN, 1.5).unwrap().mass(), 0);
        let t = OneChain::new(2, vec![(p(-1.0, 0.5), p(1.0, 0.5))]);
        assert!(matches!(t.slice_sphere(Point::ORIGIN, 0.5), Err(Error::TangencyError(_))));
    }

    #[test]
    fn cone_over_square_corners() {
        let h = 0.1;
        let z = ZeroChain::new(2, vec![p(-h, -h), p(h, -h), p(h, h), p(-h, h)]);
        let c = cone_fill(&z, Point::ORIGIN);
        assert!((c.mass() - 4.0 * 0.1 * 2f64.sqrt()).abs() < 1e-12);
        assert!(c.boundary().same(&z));
    }

    #[test]
    fn collinear_overlaps_cancel() {
        let c = OneChain::new(2, vec![(p(0.0, 0.0), p(0.6, 0.0)), (p(0.2, 0.0), p(0.8, 0.0))]);
        let r = c.reduce_collinear();
        assert!((r.mass() - 0.4).abs() < 1e-12);
        assert!(r.boundary().same(&c.boundary()));
    }

    #[test]
    fn triangle_boundary_and_clip() {
        let t = TwoChain::new(vec![[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]]);
        assert!((t.boundary().mass() - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        let sq = [p(0.0, 0.0), p(0.5, 0.0), p(0.5, 0.5), p(0.0, 0.5)];
        let inside = t.clip_convex(&sq, true);
        let outside = t.clip_convex(&sq, false);
        assert!((inside.mass() - 0.25).abs() < 1e-12);
        assert!((inside.mass() + outside.mass() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let z = ZeroChain::new(2, vec![p(0.1, 0.2)]);
        let c = OneChain::new(2, vec![(p(0.0, 0.0), p(0.1, 0.2))]);
        let j = ChainJson::from_chains(&z, Some(&c));
        let s = serde_json::to_string(&j).unwrap();
        let back: ChainJson = serde_json::from_str(&s).unwrap();
        assert!(back.zero_chain().unwrap().same(&z));
        assert!(back.one_chain().unwrap().same(&c));
    }
}
