use crate::chain::ZeroChain;
use crate::coarea::{check_localized, AdmissibleFamily, Ball, Certificates, LocalizationReport};
use crate::cubical::{Cell, CubicalComplex, Vertex, VertexMap};
use crate::error::{Error, Result};
use crate::geom::Point;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Chordal length of a geodesic arc of length `a` on the unit sphere.
fn chord(a: f64) -> f64 {
    2.0 * (0.5 * a).sin()
}

/// Geodesic distance from the south pole, extended radially to the disk.
fn polar(p: Point) -> f64 {
    let n = p.norm();
    if n == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    (-p.z() / n).clamp(-1.0, 1.0).acos()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AvoidBallReport {
    pub l: f64,
    pub delta: f64,
    pub p: usize,
    pub q: u64,
    /// `L + (p + 2) delta`.
    pub declared_radius: f64,
    /// Geodesic radius of the contraction ball of each cell, by cell key.
    pub cell_radii: BTreeMap<String, f64>,
    /// Meridian kept clear in each top cell, by cell key.
    pub meridians: BTreeMap<String, f64>,
    /// Smallest distance from a kept-clear meridian to the points and
    /// certificate balls it must avoid.
    pub meridian_clearance: f64,
    pub equal_outside_b_on_originals: bool,
    pub equal_outside_large_ball: bool,
    /// Largest `mass(F' int) + mass(F' B) - (mass_C + k + 1)`; at most zero.
    pub mass_excess: f64,
    pub max_mass_in_ball: usize,
    pub localization: LocalizationReport,
}

impl AvoidBallReport {
    pub fn passed(&self) -> bool {
        self.equal_outside_b_on_originals
            && self.equal_outside_large_ball
            && self.mass_excess <= 0.0
            && self.localization.passed()
            && self.localization.delta_sum <= self.declared_radius
            && self.meridian_clearance > 0.0
    }
}

pub struct AvoidBall {
    pub family: VertexMap<ZeroChain>,
    pub certs: Certificates,
    pub report: AvoidBallReport,
}

/// Smallest cell of `complex` containing the refined vertex `v`.
fn carrier(v: &[i64], q: i64) -> Cell {
    let anchor: Vec<i64> = v.iter().map(|c| c.div_euclid(q)).collect();
    let axes: Vec<usize> = (0..v.len()).filter(|&i| v[i].rem_euclid(q) != 0).collect();
    Cell::new(anchor, axes)
}

/// Radius in `[lo, hi]` whose sphere about `e` misses every ball and every
/// point, chosen at the middle of the widest free gap.
fn free_radius(e: Point, lo: f64, hi: f64, balls: &[Ball], points: &[Point]) -> Option<f64> {
    let mut blocked: Vec<(f64, f64)> = Vec::new();
    let geo = |c: f64| 2.0 * (0.5 * c.clamp(0.0, 2.0)).asin();
    for b in balls {
        let d = b.0.dist(e);
        blocked.push((geo(d - b.1), geo(d + b.1)));
    }
    for p in points {
        let g = geo(p.dist(e));
        blocked.push((g - 1e-9, g + 1e-9));
    }
    blocked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, f64)> = None;
    let mut cur = lo;
    let mut consider = |a: f64, b: f64| {
        if b > a && best.is_none_or(|(x, y)| b - a > y - x) {
            best = Some((a, b));
        }
    };
    for (a, b) in blocked {
        if a > cur {
            consider(cur, a.min(hi));
        }
        cur = cur.max(b);
        if cur >= hi {
            break;
        }
    }
    if cur < hi {
        consider(cur, hi);
    }
    best.map(|(a, b)| 0.5 * (a + b))
}

/// Azimuth of a meridian segment from polar angle `l/2` to the equator that
/// keeps the largest distance from the given balls and points.
fn clear_meridian(l: f64, balls: &[Ball], points: &[Point]) -> (f64, f64) {
    const STEPS: usize = 720;
    const SAMPLES: usize = 48;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..STEPS {
        let th = std::f64::consts::TAU * i as f64 / STEPS as f64;
        let mut clear = f64::INFINITY;
        for s in 0..=SAMPLES {
            let ph = 0.5 * l + (std::f64::consts::FRAC_PI_2 - 0.5 * l) * s as f64 / SAMPLES as f64;
            let q = Point::new3(ph.sin() * th.cos(), ph.sin() * th.sin(), -ph.cos());
            for b in balls {
                clear = clear.min(q.dist(b.0) - b.1);
            }
            for p in points {
                clear = clear.min(q.dist(*p));
            }
        }
        if clear > best.1 {
            best = (th, clear);
        }
    }
    best
}

/// Move the mass of a `delta`-localized family in the 3-disk out of the
/// boundary ball of geodesic radius `l` about the south pole, keeping at
/// most one point there on original vertices.
///
/// Each cell `E` of dimension `k` gets a contraction ball about the pole of
/// radius in `[l + k delta, l + (k + 1) delta]` missing every certificate
/// ball and every original point. Inside it the value is contracted to the
/// pole: along edges one point at a time, on higher cells in one step.
pub fn avoid_boundary_ball(f: &VertexMap<ZeroChain>, certs: &Certificates, l: f64, delta: f64) -> Result<AvoidBall> {
    let n = f.values.values().next().map_or(3, |z| z.dim());
    if n != 3 {
        return Err(Error::DimUnsupported(format!("avoid-ball needs the 3-disk, got dimension {n}")));
    }
    let p = f.complex.dim();
    if p > 3 {
        return Err(Error::DimUnsupported(format!("parameter dimension {p}")));
    }
    let declared = l + (p as f64 + 2.0) * delta;
    if l.is_nan() || l <= 0.0 || delta >= std::f64::consts::TAU * (l + delta).sin() || declared >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::DeltaTooLarge { delta, limit: std::f64::consts::TAU * (l + delta).sin() });
    }
    let tops: Vec<&Cell> = f.complex.top_cells();
    for c in tops.iter().filter(|c| c.dim() > 0) {
        let cert = certs.get(*c).ok_or_else(|| Error::CertMissing(c.key()))?;
        if cert.radius_sum() >= delta {
            return Err(Error::BadSpec(format!("certificate of {} exceeds delta", c.key())));
        }
    }
    let e = Point::south_pole(3);
    let small = Cap { radius: l };

    // Original vertices: drop the points in B, keep their parity at e.
    let mut base: BTreeMap<Vertex, ZeroChain> = BTreeMap::new();
    for (v, z) in &f.values {
        let inside = z.points().iter().filter(|p| small.contains(**p)).count();
        let mut pts: Vec<Point> = z.points().iter().copied().filter(|p| !small.contains(*p)).collect();
        if inside % 2 == 1 {
            pts.push(e);
        }
        base.insert(v.clone(), ZeroChain::new(3, pts));
    }
    let support: Vec<Point> = {
        let mut s: Vec<Point> = base.values().flat_map(|z| z.points().iter().copied()).filter(|p| *p != e).collect();
        s.sort_by(|a, b| a.lex_cmp(b));
        s.dedup();
        s
    };

    // Contraction radius per cell, staged by dimension.
    let mut radius: BTreeMap<Cell, f64> = BTreeMap::new();
    let mut report_radii = BTreeMap::new();
    for cell in &f.complex.cells {
        let k = cell.dim();
        if k == 0 {
            continue;
        }
        let balls: Vec<Ball> =
            tops.iter().filter(|t| t.contains_cell(cell)).flat_map(|t| certs[*t].balls.iter().copied()).collect();
        let lo = l + k as f64 * delta;
        let rho = free_radius(e, lo, lo + delta, &balls, &support)
            .ok_or(Error::DeltaTooLarge { delta, limit: delta })?;
        radius.insert(cell.clone(), rho);
        report_radii.insert(cell.key(), rho);
    }

    // A clear meridian per top cell, away from the certificate balls that
    // stay outside its contraction ball.
    let mut meridians = BTreeMap::new();
    let mut clearance = f64::INFINITY;
    for c in &tops {
        if c.dim() == 0 {
            continue;
        }
        let rho = radius[*c];
        let outer: Vec<Ball> =
            certs[*c].balls.iter().copied().filter(|b| b.0.dist(e) - b.1 > chord(rho)).collect();
        let (th, clear) = clear_meridian(l, &outer, &support);
        meridians.insert(c.key(), th);
        clearance = clearance.min(clear);
    }
    if tops.iter().all(|c| c.dim() == 0) {
        clearance = 1.0;
    }

    // Refinement long enough for one-at-a-time contraction along edges.
    let in_ball = |z: &ZeroChain, rho: f64| -> Vec<Point> {
        z.points().iter().copied().filter(|p| p.dist(e) < chord(rho)).collect()
    };
    let mut need = 1usize;
    for cell in f.complex.cells_of_dim(1) {
        let rho = radius[cell];
        let vs = cell.vertices();
        let (a, b) = (in_ball(&base[&vs[0]], rho), in_ball(&base[&vs[1]], rho));
        if (a.len() + b.len()) % 2 == 1 {
            return Err(Error::OddParity(cell.key()));
        }
        need = need.max(a.len() + b.len() + 1);
    }
    let q = if need.is_multiple_of(2) { need + 1 } else { need.max(3) } as u64;
    let fine = f.complex.refine(q);
    let s = q as i64;

    let mut values: BTreeMap<Vertex, ZeroChain> = BTreeMap::new();
    for v in fine.vertices() {
        let cell = carrier(&v, s);
        let near = crate::cubical::nearest_coarse(&v, s);
        if cell.dim() == 0 {
            values.insert(v, base[&near].clone());
            continue;
        }
        let rho = radius[&cell];
        let outside: Vec<Point> = f.get(&near).points().iter().copied().filter(|p| p.dist(e) >= chord(rho)).collect();
        let inner = if cell.dim() == 1 {
            let vs = cell.vertices();
            let i = (v[cell.axes[0]] - vs[0][cell.axes[0]] * s) as usize;
            edge_stage(&in_ball(&base[&vs[0]], rho), &in_ball(&base[&vs[1]], rho), i, q as usize, e)
        } else {
            let parity = in_ball(&base[&cell.anchor], rho).len() % 2;
            if parity == 1 {
                vec![e]
            } else {
                Vec::new()
            }
        };
        let mut pts = outside;
        pts.extend(inner);
        values.insert(v, ZeroChain::new(3, pts));
    }
    let family = VertexMap::new(fine.clone(), values, "avoid_boundary_ball");

    // Certificates on the refined top cells: the contraction ball of the
    // coarse cell plus the certificate balls that stay outside it.
    let mut out_certs: Certificates = BTreeMap::new();
    for c in fine.top_cells() {
        let coarse = tops
            .iter()
            .find(|t| c.vertices().iter().all(|v| t.local_coords(v, s).is_some()))
            .ok_or_else(|| Error::BadSpec(format!("refined cell {} has no coarse cell", c.key())))?;
        if coarse.dim() == 0 {
            continue;
        }
        let rho = radius[*coarse];
        let mut balls: Vec<Ball> = vec![(e, chord(rho))];
        balls.extend(certs[*coarse].balls.iter().copied().filter(|b| b.0.dist(e) - b.1 > chord(rho)));
        out_certs.insert(c.clone(), AdmissibleFamily { balls, delta: declared });
    }
    let localization = check_localized(&family, &out_certs)?;

    let report = verify(f, &family, l, delta, declared, p, q, localization, report_radii, meridians, clearance);
    if !report.passed() {
        return Err(Error::BadSpec(format!("avoid-ball postconditions failed: {report:?}")));
    }
    Ok(AvoidBall { family, certs: out_certs, report })
}

/// Value inside the contraction ball at step `i` of `0..=q` along an edge:
/// points of `a` travel to `e` one per step, then those of `b` come back.
fn edge_stage(a: &[Point], b: &[Point], i: usize, q: usize, e: Point) -> Vec<Point> {
    let (src, j) = if i <= a.len() || i + b.len() < q {
        (a, i.min(a.len()))
    } else {
        (b, q - i)
    };
    let mut pts: Vec<Point> = src[j..].to_vec();
    pts.extend(std::iter::repeat_n(e, j));
    pts
}

/// Cap of geodesic radius `l` about the south pole, as a point test.
struct Cap {
    radius: f64,
}

impl Cap {
    /// Open cap on the sphere.
    fn contains(&self, p: Point) -> bool {
        (p.norm() - 1.0).abs() <= 1e-9 && polar(p) < self.radius
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(
    f: &VertexMap<ZeroChain>,
    g: &VertexMap<ZeroChain>,
    l: f64,
    delta: f64,
    declared: f64,
    p: usize,
    q: u64,
    localization: LocalizationReport,
    cell_radii: BTreeMap<String, f64>,
    meridians: BTreeMap<String, f64>,
    meridian_clearance: f64,
) -> AvoidBallReport {
    let e = Point::south_pole(3);
    let cap = Cap { radius: l };
    let s = q as i64;
    let outside = |z: &ZeroChain, keep: &dyn Fn(Point) -> bool| -> ZeroChain {
        ZeroChain::new(3, z.points().iter().copied().filter(|x| keep(*x)).collect())
    };
    let mut eq_b = true;
    for (v, z) in &f.values {
        let fine_v: Vertex = v.iter().map(|c| c * s).collect();
        let keep = |x: Point| !cap.contains(x);
        eq_b &= outside(g.get(&fine_v), &keep).same(&outside(z, &keep));
    }
    let big = chord(declared);
    let mut eq_big = true;
    let mut excess = f64::NEG_INFINITY;
    let mut max_in_b = 0;
    let interior = |x: Point| x.norm() < 1.0 - 1e-9;
    for (v, z) in &g.values {
        let near = crate::cubical::nearest_coarse(v, s);
        let keep = |x: Point| x.dist(e) >= big;
        eq_big &= outside(z, &keep).same(&outside(f.get(&near), &keep));
        let cell = carrier(v, s);
        let mass_c = cell
            .vertices()
            .iter()
            .map(|w| f.get(w).points().iter().filter(|x| interior(**x)).count())
            .max()
            .unwrap_or(0);
        let in_b = z.points().iter().filter(|x| cap.contains(**x)).count();
        let lhs = z.points().iter().filter(|x| interior(**x)).count() + in_b;
        excess = excess.max(lhs as f64 - (mass_c + cell.dim() + 1) as f64);
        max_in_b = max_in_b.max(in_b);
    }
    AvoidBallReport {
        l,
        delta,
        p,
        q,
        declared_radius: declared,
        cell_radii,
        meridians,
        meridian_clearance,
        equal_outside_b_on_originals: eq_b,
        equal_outside_large_ball: eq_big,
        mass_excess: excess,
        max_mass_in_ball: max_in_b,
        localization,
    }
}

/// A `delta`-localized test family in the 3-disk over `I^p`: a fixed cloud
/// plus, per vertex, points that move inside a few disjoint certificate
/// balls, some of them near the south pole.
pub fn random_localized_family(p: usize, delta: f64, seed: u64) -> (VertexMap<ZeroChain>, Certificates) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let complex = CubicalComplex::unit_cube(p, p);
    let nb = rng.random_range(1..=3usize);
    let radius = 0.9 * delta / nb as f64;
    let mut balls: Vec<Ball> = Vec::new();
    while balls.len() < nb {
        let c = if balls.is_empty() && rng.random_bool(0.7) {
            // Near the south pole, on or just inside the sphere.
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let ph: f64 = rng.random_range(0.0..0.05);
            let rr: f64 = if rng.random_bool(0.5) { 1.0 } else { 0.98 };
            Point::new3(rr * ph.sin() * th.cos(), rr * ph.sin() * th.sin(), -rr * ph.cos())
        } else {
            random_point(&mut rng, 0.8)
        };
        let r = radius * rng.random_range(0.5..1.0);
        if balls.iter().all(|b| b.0.dist(c) > b.1 + r + 1e-3) {
            balls.push((c, r));
        }
    }
    let fixed: Vec<Point> = (0..rng.random_range(2..12usize)).map(|_| random_point(&mut rng, 0.9)).collect();
    let fixed: Vec<Point> = fixed.into_iter().filter(|x| balls.iter().all(|b| x.dist(b.0) > b.1)).collect();
    let mut values = BTreeMap::new();
    for v in complex.vertices() {
        let mut pts = fixed.clone();
        for b in &balls {
            let k = 2 * rng.random_range(0..3usize);
            for _ in 0..k {
                pts.push(point_in_ball(&mut rng, *b));
            }
        }
        values.insert(v, ZeroChain::new(3, pts));
    }
    let mut certs: Certificates = BTreeMap::new();
    for c in complex.top_cells() {
        certs.insert(c.clone(), AdmissibleFamily { balls: balls.clone(), delta });
    }
    (VertexMap::new(complex, values, "random localized"), certs)
}

fn random_point(rng: &mut impl rand::Rng, r: f64) -> Point {
    loop {
        let x = Point::new3(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r));
        if x.norm() <= r {
            return x;
        }
    }
}

/// A point of the ball inside the closed disk; on the sphere when the ball
/// reaches it and a coin says so.
fn point_in_ball(rng: &mut impl rand::Rng, b: Ball) -> Point {
    loop {
        let x = b.0 + random_point(rng, b.1 * 0.999);
        if rng.random_bool(0.5) {
            let y = x.normalized();
            if y.dist(b.0) < b.1 {
                return y;
            }
        }
        if x.norm() < 1.0 {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_near_the_pole_is_unchanged() {
        let z = ZeroChain::new(3, vec![Point::new3(0.2, 0.1, 0.3), Point::new3(-0.1, 0.4, 0.0)]);
        let f = VertexMap::constant(CubicalComplex::unit_cube(1, 1), z.clone(), "t");
        let mut certs: Certificates = BTreeMap::new();
        certs.insert(f.complex.top_cells()[0].clone(), AdmissibleFamily { balls: vec![], delta: 0.1 });
        let out = avoid_boundary_ball(&f, &certs, 0.05, 0.1).unwrap();
        assert!(out.family.values.values().all(|w| w.same(&z)));
        assert!(out.report.passed());
    }

    #[test]
    fn odd_points_in_the_ball_leave_one() {
        let e = Point::south_pole(3);
        let near = |a: f64| Point::new3(a.sin(), 0.0, -a.cos());
        let z = ZeroChain::new(3, vec![near(0.01), near(0.02), near(0.03), Point::new3(0.1, 0.2, 0.3)]);
        let f = VertexMap::constant(CubicalComplex::unit_cube(0, 0), z, "t");
        let out = avoid_boundary_ball(&f, &BTreeMap::new(), 0.05, 0.1).unwrap();
        let w = out.family.values.values().next().unwrap();
        assert_eq!(w.mass(), 2);
        assert!(w.points().contains(&e));
        assert_eq!(out.report.max_mass_in_ball, 1);
    }

    #[test]
    fn sliding_point_through_the_ball() {
        // One point slides across the cap while a partner stays put inside
        // the same certificate ball.
        let near = |a: f64| Point::new3(a.sin(), 0.0, -a.cos());
        let mut values = BTreeMap::new();
        values.insert(vec![0], ZeroChain::new(3, vec![near(0.08), Point::new3(0.05, 0.0, -0.97)]));
        values.insert(vec![1], ZeroChain::new(3, vec![near(-0.08), Point::new3(0.05, 0.0, -0.97)]));
        let f = VertexMap::new(CubicalComplex::unit_cube(1, 1), values, "slide");
        let mut certs: Certificates = BTreeMap::new();
        certs.insert(f.complex.top_cells()[0].clone(), AdmissibleFamily { balls: vec![(Point::south_pole(3), 0.09)], delta: 0.1 });
        let out = avoid_boundary_ball(&f, &certs, 0.1, 0.1).unwrap();
        assert!(out.report.passed(), "{:?}", out.report);
        assert!(out.report.mass_excess <= 0.0);
    }

    #[test]
    fn random_families_pass() {
        for seed in 0..6 {
            let p = 1 + (seed as usize % 2);
            let (f, certs) = random_localized_family(p, 0.05, seed);
            let out = avoid_boundary_ball(&f, &certs, 0.02, 0.05).unwrap();
            assert!(out.report.passed(), "{seed}: {:?}", out.report);
        }
    }

    #[test]
    fn wrong_dimension() {
        let f = VertexMap::constant(CubicalComplex::unit_cube(1, 1), ZeroChain::empty(2), "t");
        assert!(matches!(avoid_boundary_ball(&f, &BTreeMap::new(), 0.05, 0.1), Err(Error::DimUnsupported(_))));
    }
}
