//! Radius selection by slice counting, grids of ball differences, the
//! chopping operator and the algebra of admissible ball families.

use crate::chain::{OneChain, ZeroChain};
use crate::cubical::{Cell, VertexMap};
use crate::error::{Error, Result};
use crate::geom::{eps_geom, point_segment_dist, Point};
use crate::region::{polygon_area, Region};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

/// Lattice centers whose `r`-balls cover a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCenters {
    pub dim: usize,
    pub points: Vec<Point>,
    pub r: f64,
    /// Measured `L r^n / Vol`.
    pub density_constant: f64,
}

impl CoverCenters {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn domain_volume(domain: &Region, dim: usize) -> f64 {
    match domain {
        Region::Ball { radius, .. } => {
            if dim == 2 {
                std::f64::consts::PI * radius * radius
            } else {
                4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
            }
        }
        Region::Polygon { vertices } => polygon_area(vertices).abs(),
        _ => f64::NAN,
    }
}

/// Distance from `p` to the domain (zero inside).
fn dist_to_domain(domain: &Region, p: Point) -> f64 {
    if domain.contains(p) {
        return 0.0;
    }
    match domain {
        Region::Ball { center, radius } => p.dist(*center) - radius,
        Region::Polygon { vertices } => (0..vertices.len())
            .map(|i| point_segment_dist(p, vertices[i], vertices[(i + 1) % vertices.len()]).0)
            .fold(f64::INFINITY, f64::min),
        _ => 0.0,
    }
}

fn bounding_box(domain: &Region, dim: usize) -> (Point, Point) {
    match domain {
        Region::Ball { center, radius } => {
            let r = Point([*radius, *radius, if dim == 3 { *radius } else { 0.0 }]);
            (*center - r, *center + r)
        }
        Region::Polygon { vertices } => {
            let mut lo = vertices[0];
            let mut hi = vertices[0];
            for v in vertices {
                for k in 0..3 {
                    lo.0[k] = lo.0[k].min(v.0[k]);
                    hi.0[k] = hi.0[k].max(v.0[k]);
                }
            }
            (lo, hi)
        }
        _ => (Point([-1.0, -1.0, if dim == 3 { -1.0 } else { 0.0 }]), Point([1.0, 1.0, if dim == 3 { 1.0 } else { 0.0 }])),
    }
}

/// Deterministic cover: a single center when one ball suffices, otherwise a
/// hexagonal lattice (plane) or cubic lattice (space) restricted to points
/// within `r` of the domain.
pub fn cover_centers(domain: &Region, r: f64, dim: usize) -> CoverCenters {
    let (lo, hi) = bounding_box(domain, dim);
    let mid = (lo + hi) * 0.5;
    let reach = match domain {
        Region::Ball { center, radius } => center.dist(mid) + radius,
        Region::Polygon { vertices } => vertices.iter().map(|v| v.dist(mid)).fold(0.0, f64::max),
        _ => (hi - lo).norm() * 0.5,
    };
    let mut points = Vec::new();
    if reach <= r {
        points.push(mid);
    } else if dim == 2 {
        let a = r * 3f64.sqrt();
        let h = a * 3f64.sqrt() / 2.0;
        let j0 = ((lo.y() - r) / h).floor() as i64;
        let j1 = ((hi.y() + r) / h).ceil() as i64;
        for j in j0..=j1 {
            let shift = if j.rem_euclid(2) == 1 { a / 2.0 } else { 0.0 };
            let i0 = ((lo.x() - r - shift) / a).floor() as i64;
            let i1 = ((hi.x() + r - shift) / a).ceil() as i64;
            for i in i0..=i1 {
                let p = Point::new2(i as f64 * a + shift, j as f64 * h);
                if dist_to_domain(domain, p) < r {
                    points.push(p);
                }
            }
        }
    } else {
        let a = 2.0 * r / 3f64.sqrt();
        let idx = |v: f64, up: bool| if up { ((v + r) / a).ceil() as i64 } else { ((v - r) / a).floor() as i64 };
        for i in idx(lo.x(), false)..=idx(hi.x(), true) {
            for j in idx(lo.y(), false)..=idx(hi.y(), true) {
                for k in idx(lo.z(), false)..=idx(hi.z(), true) {
                    let p = Point::new3(i as f64 * a, j as f64 * a, k as f64 * a);
                    if dist_to_domain(domain, p) < r {
                        points.push(p);
                    }
                }
            }
        }
    }
    let vol = domain_volume(domain, dim);
    let density_constant = points.len() as f64 * r.powi(dim as i32) / vol;
    CoverCenters { dim, points, r, density_constant }
}

/// Slice-count events of one chain about `x`: the slice by a sphere of
/// radius `s` has (up to coincidences) as many points as intervals
/// `(lo, hi)` containing `s`.
fn slice_intervals(c: &OneChain, x: Point) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in c.segments() {
        let (m, _) = point_segment_dist(x, a, b);
        let da = a.dist(x);
        let db = b.dist(x);
        if da > m {
            out.push((m, da));
        }
        if db > m {
            out.push((m, db));
        }
    }
    out
}

/// Feasible elementary interval of `(r, 2r)` with the fewest total slice
/// points (longest among those), with `bounds[i]` the allowed slice count of
/// chain `i`. Breakpoints also
/// include the distances of `avoid` points so that no chosen sphere passes
/// through them.
fn best_radius(x: Point, chains: &[&OneChain], bounds: &[f64], r: f64, avoid: &[Point]) -> Option<f64> {
    let (lo, hi) = (r, 2.0 * r);
    // (position, chain index, +1/-1); usize::MAX marks a plain breakpoint.
    let mut events: Vec<(f64, usize, i32)> = Vec::new();
    for (i, c) in chains.iter().enumerate() {
        for (a, b) in slice_intervals(c, x) {
            if b <= lo || a >= hi {
                continue;
            }
            events.push((a.max(lo), i, 1));
            events.push((b.min(hi), i, -1));
        }
    }
    for p in avoid {
        let d = p.dist(x);
        if d > lo && d < hi {
            events.push((d, usize::MAX, 0));
        }
    }
    events.push((hi, usize::MAX, 0));
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut counts = vec![0i64; chains.len()];
    let mut violating = 0usize;
    let mut prev = lo;
    let mut total = 0i64;
    let mut best: Option<(i64, f64, f64)> = None;
    let bad = |i: usize, c: i64| (c as f64) > bounds[i] + 1e-12;
    for (pos, i, delta) in events {
        if pos > prev && violating == 0 {
            let len = pos - prev;
            if best.is_none_or(|(t, l, _)| total < t || (total == t && len > l)) {
                best = Some((total, len, 0.5 * (prev + pos)));
            }
        }
        prev = prev.max(pos);
        if i != usize::MAX {
            let was = bad(i, counts[i]);
            counts[i] += delta as i64;
            total += delta as i64;
            let now = bad(i, counts[i]);
            match (was, now) {
                (false, true) => violating += 1,
                (true, false) => violating -= 1,
                _ => {}
            }
        }
    }
    best.map(|b| b.2)
}

/// Radii `r_l` in `(r, 2r)` with `mass(slice(tau_i, x_l, r_l)) <= K mass(tau_i) / r`
/// for every chain.
pub fn select_radii(centers: &CoverCenters, chains: &[OneChain], k: usize) -> Result<Vec<f64>> {
    select_radii_avoiding(centers, chains, k, &[])
}

/// As `select_radii`, also keeping every sphere off the `avoid` points.
pub fn select_radii_avoiding(centers: &CoverCenters, chains: &[OneChain], k: usize, avoid: &[Point]) -> Result<Vec<f64>> {
    let r = centers.r;
    let refs: Vec<&OneChain> = chains.iter().collect();
    let bounds: Vec<f64> = chains.iter().map(|c| k as f64 * c.mass() / r).collect();
    centers
        .points
        .iter()
        .enumerate()
        .map(|(l, &x)| best_radius(x, &refs, &bounds, r, avoid).ok_or(Error::Infeasible { center: l }))
        .collect()
}

/// Ordered ball differences `D_l = B_l \ (B_1 u ... u B_{l-1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
}

impl Grid {
    pub fn new(centers: Vec<Point>, radii: Vec<f64>) -> Grid {
        assert_eq!(centers.len(), radii.len());
        Grid { centers, radii }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Index of the domain containing `p`: the first ball holding it.
    pub fn domain_of(&self, p: Point) -> Option<usize> {
        (0..self.len()).find(|&l| p.dist(self.centers[l]) <= self.radii[l])
    }

    pub fn ball(&self, l: usize) -> Region {
        Region::ball(self.centers[l], self.radii[l])
    }

    pub fn region(&self, l: usize) -> Region {
        let mut parts = vec![self.ball(l)];
        parts.extend((0..l).map(|k| self.ball(k).complement()));
        Region::intersect(parts)
    }

    pub fn restrict_zero(&self, z: &ZeroChain, l: usize) -> ZeroChain {
        ZeroChain::new(z.dim(), z.points().iter().copied().filter(|p| self.domain_of(*p) == Some(l)).collect())
    }

    pub fn restrict_one(&self, c: &OneChain, l: usize) -> Result<OneChain> {
        c.restrict(&self.region(l))
    }

    /// Crossing points of `c` with the boundary of `D_l`.
    pub fn boundary_slice(&self, c: &OneChain, l: usize) -> Result<ZeroChain> {
        let piece = self.restrict_one(c, l)?;
        let ends = self.restrict_zero(&c.boundary(), l);
        Ok(piece.boundary().add(&ends))
    }
}

type MemoKey = (usize, Vec<[i64; 6]>);

/// Memo of per-chain chopping radii. The stored value is a function of the
/// key alone, so concurrent fills agree.
#[derive(Default)]
pub struct RadiusMemo {
    map: Mutex<HashMap<MemoKey, f64>>,
}

const QUANTUM: f64 = 1e-9;

fn quantize(c: &OneChain) -> Vec<[i64; 6]> {
    let q = |v: f64| (v / QUANTUM).round() as i64;
    c.segments()
        .iter()
        .map(|(a, b)| [q(a.x()), q(a.y()), q(a.z()), q(b.x()), q(b.y()), q(b.z())])
        .collect()
}

fn dequantize(dim: usize, key: &[[i64; 6]]) -> OneChain {
    let f = |v: i64| v as f64 * QUANTUM;
    OneChain::new(
        dim,
        key.iter()
            .map(|k| (Point([f(k[0]), f(k[1]), f(k[2])]), Point([f(k[3]), f(k[4]), f(k[5])])))
            .collect(),
    )
}

impl RadiusMemo {
    pub fn new() -> RadiusMemo {
        RadiusMemo::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `r_l(tau)`: depends only on `tau` restricted to `B(x_l, 2r)`.
    pub fn radius(&self, tau: &OneChain, l: usize, centers: &CoverCenters) -> Result<f64> {
        let x = centers.points[l];
        let r = centers.r;
        let local = tau.restrict(&Region::ball(x, 2.0 * r))?;
        let key = (l, quantize(&local));
        if let Some(v) = self.map.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let chain = dequantize(tau.dim(), &key.1);
        let bound = chain.mass() / r;
        let v = best_radius(x, &[&chain], &[bound], r, &[]).ok_or(Error::Infeasible { center: l })?;
        Ok(*self.map.lock().expect("memo lock").entry(key).or_insert(v))
    }
}

/// `d_l(tau)`: the part of `tau` outside the first `l` chopping balls.
pub fn chop(tau: &OneChain, l: usize, centers: &CoverCenters, memo: &RadiusMemo) -> Result<OneChain> {
    if l == 0 {
        return Ok(tau.clone());
    }
    let l = l.min(centers.len());
    let mut parts = Vec::with_capacity(l);
    for k in 0..l {
        let rk = memo.radius(tau, k, centers)?;
        parts.push(Region::ball(centers.points[k], rk).complement());
    }
    tau.restrict(&Region::intersect(parts))
}

/// Centres whose `2r`-ball meets `tau`, in increasing order. Chopping at any
/// other centre leaves `tau` unchanged.
pub fn active_centers(tau: &OneChain, centers: &CoverCenters) -> Vec<usize> {
    let reach = 2.0 * centers.r;
    (0..centers.len())
        .filter(|&l| tau.segments().iter().any(|&(a, b)| point_segment_dist(centers.points[l], a, b).0 < reach))
        .collect()
}

/// Incremental chopping over increasing centre indices: entry `k` holds the
/// radius used at `active[k]` and `d_{active[k] + 1}(tau)`.
pub fn chop_steps(tau: &OneChain, active: &[usize], centers: &CoverCenters, memo: &RadiusMemo) -> Result<Vec<(f64, OneChain)>> {
    let mut cur = tau.clone();
    let mut out = Vec::with_capacity(active.len());
    for &l in active {
        let rl = memo.radius(tau, l, centers)?;
        cur = cur.restrict(&Region::ball(centers.points[l], rl).complement())?;
        out.push((rl, cur.clone()));
    }
    Ok(out)
}

pub type Ball = (Point, f64);

/// Pairwise disjoint balls with a radius budget.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleFamily {
    pub balls: Vec<Ball>,
    pub delta: f64,
}

impl AdmissibleFamily {
    pub fn radius_sum(&self) -> f64 {
        self.balls.iter().map(|b| b.1).sum()
    }

    pub fn is_disjoint(&self) -> bool {
        disjoint(&self.balls)
    }

    pub fn is_admissible(&self) -> bool {
        self.is_disjoint() && self.radius_sum() < self.delta
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.balls.iter().any(|(c, r)| p.dist(*c) <= r + eps_geom())
    }

    pub fn region(&self) -> Region {
        Region::union(self.balls.iter().map(|(c, r)| Region::ball(*c, r + eps_geom())).collect())
    }
}

fn overlap(a: &Ball, b: &Ball) -> bool {
    a.0.dist(b.0) < a.1 + b.1
}

fn disjoint(balls: &[Ball]) -> bool {
    (0..balls.len()).all(|i| (i + 1..balls.len()).all(|j| !overlap(&balls[i], &balls[j])))
}

/// Smallest ball containing both.
fn enclose(a: &Ball, b: &Ball) -> Ball {
    let d = a.0.dist(b.0);
    if d + b.1 <= a.1 {
        return *a;
    }
    if d + a.1 <= b.1 {
        return *b;
    }
    let r = 0.5 * (d + a.1 + b.1);
    let dir = (b.0 - a.0) * (1.0 / d);
    (a.0 + dir * (r - a.1), r)
}

/// Merge overlapping balls into enclosing balls until the family is
/// disjoint. Radius sums never grow, so the output stays within three times
/// the input sum.
pub fn merge_admissible(balls: &[Ball]) -> Result<AdmissibleFamily> {
    merge_admissible_within(balls, f64::INFINITY)
}

/// As `merge_admissible`, refusing inputs whose tripled radius sum exceeds
/// the domain's injectivity scale.
pub fn merge_admissible_within(balls: &[Ball], scale: f64) -> Result<AdmissibleFamily> {
    let input: f64 = balls.iter().map(|b| b.1).sum();
    if 3.0 * input > scale {
        return Err(Error::BudgetExceeded { total: 3.0 * input, budget: scale });
    }
    let mut cur: Vec<Ball> = balls.iter().copied().filter(|b| b.1 > 0.0).collect();
    'outer: loop {
        for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                if overlap(&cur[i], &cur[j]) {
                    let m = enclose(&cur[i], &cur[j]);
                    cur.swap_remove(j);
                    cur[i] = m;
                    continue 'outer;
                }
            }
        }
        break;
    }
    let out = AdmissibleFamily { balls: cur, delta: 3.0 * input + f64::MIN_POSITIVE };
    assert!(out.radius_sum() <= 3.0 * input + 1e-12, "merge grew the radius sum");
    assert!(out.balls.len() <= balls.len());
    Ok(out)
}

/// A chain type whose pairwise differences can be tested for support.
pub trait SupportCheck {
    /// A point of `self + other` outside every ball, if any.
    fn escape(&self, other: &Self, cert: &AdmissibleFamily) -> Result<Option<Point>>;
}

impl SupportCheck for ZeroChain {
    fn escape(&self, other: &Self, cert: &AdmissibleFamily) -> Result<Option<Point>> {
        Ok(self.add(other).points().iter().copied().find(|p| !cert.contains_point(*p)))
    }
}

impl SupportCheck for OneChain {
    fn escape(&self, other: &Self, cert: &AdmissibleFamily) -> Result<Option<Point>> {
        let diff = self.add(other).reduce_collinear();
        let outside = diff.restrict(&cert.region().complement())?;
        Ok(outside
            .segments()
            .iter()
            .find(|(a, b)| a.dist(*b) > 1e-7)
            .map(|(a, b)| a.lerp(*b, 0.5)))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalizationViolation {
    pub cell: String,
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub witness: Option<Point>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LocalizationReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub delta_sum: f64,
    pub violations: Vec<LocalizationViolation>,
}

impl LocalizationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub type Certificates = BTreeMap<Cell, AdmissibleFamily>;

/// Verify that for every certified cell the difference of values at any two
/// of its vertices lies in the cell's balls. Top cells must be certified.
pub fn check_localized<T: SupportCheck + Clone>(f: &VertexMap<T>, certs: &Certificates) -> Result<LocalizationReport> {
    let mut rep = LocalizationReport::default();
    for c in f.complex.top_cells() {
        if c.dim() > 0 && !certs.contains_key(c) {
            rep.violations.push(LocalizationViolation { cell: c.key(), x: c.anchor.clone(), y: c.anchor.clone(), witness: None });
        }
    }
    for (cell, cert) in certs {
        rep.n = rep.n.max(cert.balls.len());
        rep.delta_sum = rep.delta_sum.max(cert.radius_sum());
        let vs = cell.vertices();
        if !vs.iter().all(|v| f.values.contains_key(v)) {
            continue;
        }
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                if let Some(p) = f.get(&vs[i]).escape(f.get(&vs[j]), cert)? {
                    rep.violations.push(LocalizationViolation {
                        cell: cell.key(),
                        x: vs[i].clone(),
                        y: vs[j].clone(),
                        witness: Some(p),
                    });
                }
            }
        }
    }
    Ok(rep)
}

/// Growth factor of the monotone certificates: `c(1) = 1`,
/// `c(p) = 3 (1 + 2p c(p-1))`.
pub fn monotone_constant(p: usize) -> f64 {
    if p <= 1 {
        1.0
    } else {
        3.0 * (1.0 + 2.0 * p as f64 * monotone_constant(p - 1))
    }
}

/// Face-monotone certificates: each cell's family absorbs the (already
/// monotone) families of its facets, merged to stay disjoint.
pub fn monotonize(certs: &Certificates, cells: &[Cell], p: usize) -> Result<Certificates> {
    let n_in = certs.values().map(|c| c.balls.len()).max().unwrap_or(0);
    let d_in = certs.values().map(|c| c.radius_sum()).fold(0.0, f64::max);
    let mut sorted: Vec<&Cell> = cells.iter().collect();
    sorted.sort_by_key(|c| c.dim());
    let mut out = Certificates::new();
    for c in sorted {
        if c.dim() == 0 {
            continue;
        }
        let mut balls: Vec<Ball> = certs.get(c).map(|a| a.balls.clone()).unwrap_or_default();
        for f in c.facets() {
            if let Some(a) = out.get(&f) {
                balls.extend(a.balls.iter().copied());
            }
        }
        let merged = merge_admissible(&balls)?;
        out.insert(c.clone(), merged);
    }
    let cp = monotone_constant(p);
    for a in out.values_mut() {
        assert!(
            a.balls.len() as f64 <= cp * n_in as f64 && a.radius_sum() <= cp * d_in + 1e-12,
            "monotone certificate exceeds the c(p) profile"
        );
        a.delta = cp * d_in + f64::MIN_POSITIVE;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::CubicalComplex;

    #[test]
    fn single_center_for_large_radius() {
        let c = cover_centers(&Region::unit_disk(), 2.0, 2);
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn hex_cover_covers_disk() {
        use rand::{Rng, SeedableRng};
        let c = cover_centers(&Region::unit_disk(), 0.5, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let p = Point::new2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if p.norm() <= 1.0 {
                assert!(c.points.iter().any(|x| x.dist(p) <= 0.5 + 1e-12), "uncovered {p:?}");
            }
        }
        assert!(c.density_constant < 10.0);
    }

    #[test]
    fn diameter_radius_bound() {
        let centers = CoverCenters { dim: 2, points: vec![Point::ORIGIN], r: 0.25, density_constant: 1.0 };
        let tau = OneChain::new(2, vec![(Point::new2(-1.0, 0.0), Point::new2(1.0, 0.0))]);
        let r = select_radii(&centers, std::slice::from_ref(&tau), 1).unwrap()[0];
        assert!(r > 0.25 && r < 0.5);
        assert_eq!(tau.slice_sphere(Point::ORIGIN, r).unwrap().mass(), 2);
        let none = select_radii(&centers, &[], 1).unwrap()[0];
        assert!((none - 0.375).abs() < 1e-15);
    }

    #[test]
    fn chop_ends_empty() {
        let centers = cover_centers(&Region::unit_disk(), 0.3, 2);
        let tau = OneChain::new(2, vec![(Point::new2(-0.7, 0.1), Point::new2(0.6, -0.2))]);
        let memo = RadiusMemo::new();
        assert!(chop(&tau, 0, &centers, &memo).unwrap().same(&tau));
        assert!(chop(&tau, centers.len(), &centers, &memo).unwrap().is_empty());
    }

    #[test]
    fn merge_examples() {
        let m = merge_admissible(&[(Point::ORIGIN, 0.1), (Point::new2(0.05, 0.0), 0.1)]).unwrap();
        assert_eq!(m.balls.len(), 1);
        assert!(m.balls[0].1 <= 0.6);
        let nested = merge_admissible(&[(Point::ORIGIN, 0.3), (Point::new2(0.05, 0.0), 0.1)]).unwrap();
        assert_eq!(nested.balls, vec![(Point::ORIGIN, 0.3)]);
        let apart = [(Point::ORIGIN, 0.1), (Point::new2(0.5, 0.0), 0.1)];
        assert_eq!(merge_admissible(&apart).unwrap().balls, apart.to_vec());
        assert!(matches!(merge_admissible_within(&apart, 0.3), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn monotone_constants() {
        assert_eq!(monotone_constant(1), 1.0);
        assert_eq!(monotone_constant(2), 15.0);
    }

    #[test]
    fn localization_pass_and_fail() {
        let x = CubicalComplex::unit_cube(1, 1);
        let cell = x.top_cells()[0].clone();
        let mut vals = BTreeMap::new();
        vals.insert(vec![0], ZeroChain::new(2, vec![Point::new2(0.0, 0.0)]));
        vals.insert(vec![1], ZeroChain::new(2, vec![Point::new2(0.02, 0.0)]));
        let f = VertexMap::new(x, vals, "test");
        let mut certs = Certificates::new();
        certs.insert(cell.clone(), AdmissibleFamily { balls: vec![(Point::ORIGIN, 0.05)], delta: 0.1 });
        assert!(check_localized(&f, &certs).unwrap().passed());
        certs.insert(cell, AdmissibleFamily { balls: vec![(Point::new2(0.5, 0.5), 0.05)], delta: 0.1 });
        let rep = check_localized(&f, &certs).unwrap();
        assert!(!rep.passed());
        assert!(rep.violations[0].witness.is_some());
    }
}
