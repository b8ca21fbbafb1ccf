//! Cubical grid of width `r`, the generic projection point, ray fillings and
//! the radial push of segment chains onto the grid 1-skeleton.

use crate::chain::{OneChain, ZeroChain};
use crate::error::{Error, Result};
use crate::geom::{line_sphere_params, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Snap tolerance for grid coordinates, in cell units.
const ON_GRID: f64 = 1e-12;

/// Grid of cell width `r` over the unit disk. Internally everything is
/// measured in cell units, so the disk becomes the ball of radius `R = 1/r`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSkeleton {
    pub n: usize,
    pub r: f64,
    /// Radius of the tubes around the dual skeleton, in cell units.
    pub margin: f64,
}

impl GridSkeleton {
    pub fn new(n: usize, r: f64) -> Result<GridSkeleton> {
        if n != 2 && n != 3 {
            return Err(Error::DimUnsupported(format!("grid in dimension {n}")));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::BadSpec(format!("cell width {r} outside (0, 1)")));
        }
        Ok(GridSkeleton { n, r, margin: 1e-5 })
    }

    pub fn big_r(&self) -> f64 {
        1.0 / self.r
    }

    /// Length of the 1-skeleton inside the unit ball, in unit coordinates.
    pub fn skeleton_mass(&self) -> f64 {
        let k = self.big_r().floor() as i64;
        let mut total = 0.0;
        match self.n {
            2 => {
                for i in -k..=k {
                    let x = i as f64 * self.r;
                    total += 2.0 * (1.0 - x * x).max(0.0).sqrt();
                }
                2.0 * total
            }
            _ => {
                for i in -k..=k {
                    for j in -k..=k {
                        let h = (i * i + j * j) as f64 * self.r * self.r;
                        total += 2.0 * (1.0 - h).max(0.0).sqrt();
                    }
                }
                3.0 * total
            }
        }
    }

    /// Measured `E(n)`: skeleton length in cell units over `R^n`.
    pub fn skeleton_constant(&self) -> f64 {
        let big = self.big_r();
        self.skeleton_mass() * big / big.powi(self.n as i32)
    }

    /// Cross-sections of the dual pieces: centres of squares for `n = 2`,
    /// and for `n = 3` the points where the dual lines of one parallel class
    /// pierce a coordinate plane. Half-integers within radius `R`.
    pub fn dual_sites(&self) -> Vec<[f64; 2]> {
        let big = self.big_r();
        let k = big.ceil() as i64;
        let mut out = Vec::new();
        for i in -k..k {
            for j in -k..k {
                let s = [i as f64 + 0.5, j as f64 + 0.5];
                if s[0] * s[0] + s[1] * s[1] <= big * big {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Number of parallel classes of dual pieces, `binom(n, 2)`.
    pub fn dual_classes(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

/// Drop coordinate `k` of a 3-vector (identity on the plane for `n = 2`).
fn project(p: Point, n: usize, k: usize) -> [f64; 2] {
    if n == 2 {
        return [p.x(), p.y()];
    }
    let idx: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    [p.0[idx[0]], p.0[idx[1]]]
}

/// Projection point for the ray fillings, in unit coordinates, with the
/// statistics of its verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenericPoint {
    pub p: Point,
    /// Geodesic radius of the tangency ball about the south pole.
    pub l: f64,
    /// Tube radius around the dual skeleton, cell units.
    pub margin: f64,
    pub samples: usize,
    pub rays_checked: usize,
    /// Largest number of dual tubes met by one checked ray.
    pub max_hits: usize,
    /// Longest chord of a checked ray inside one tube, cell units.
    pub max_chord: f64,
}

const MAX_SAMPLES: usize = 500;
const RAY_CHECKS: usize = 1000;

/// Sample a point outside the disk whose tangency cone touches the sphere
/// only inside the ball of geodesic radius `l` about the south pole, and
/// which keeps off every hyperplane spanned by two parallel dual pieces.
pub fn pick_generic_point(grid: &GridSkeleton, l: f64, seed: u64) -> Result<GenericPoint> {
    if !(l > 0.0 && l <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::BadSpec(format!("tangency radius {l} outside (0, pi/2]")));
    }
    let n = grid.n;
    let big = grid.big_r();
    let south = Point::south_pole(n);
    let sites = grid.dual_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for sample in 1..=MAX_SAMPLES {
        // Half-angle of the tangency cone, then a tilt that keeps the
        // tangency circle inside the ball.
        let alpha = rng.random_range(0.3 * l..0.7 * l).min(1.4);
        let d = 1.0 / alpha.cos();
        let tilt = rng.random_range(0.0..0.9 * (l - alpha));
        let u = tilted(south, tilt, &mut rng, n);
        let p = u * d;
        if !off_dual_planes(p * big, n, &sites) {
            continue;
        }
        let mut gp = GenericPoint { p, l, margin: grid.margin, samples: sample, rays_checked: 0, max_hits: 0, max_chord: 0.0 };
        if verify_rays(&mut gp, grid, &sites, &mut rng) {
            return Ok(gp);
        }
    }
    Err(Error::ExhaustedSamples(MAX_SAMPLES))
}

/// Unit vector at angle `tilt` from `axis` in a random direction.
fn tilted(axis: Point, tilt: f64, rng: &mut ChaCha8Rng, n: usize) -> Point {
    let side = if n == 2 {
        Point::new2(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0)
    } else {
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Point::new3(phi.cos(), phi.sin(), 0.0)
    };
    axis * tilt.cos() + side * tilt.sin()
}

/// The scaled point keeps a margin from every dual site and from every line
/// through two sites, in each class cross-section.
fn off_dual_planes(p: Point, n: usize, sites: &[[f64; 2]]) -> bool {
    const MARGIN: f64 = 1e-7;
    let classes = if n == 2 { 1 } else { 3 };
    for k in 0..classes {
        let q = project(p, n, 2 - k.min(2));
        for (i, a) in sites.iter().enumerate() {
            let da = [q[0] - a[0], q[1] - a[1]];
            if da[0].hypot(da[1]) <= MARGIN {
                return false;
            }
            for b in &sites[i + 1..] {
                let e = [b[0] - a[0], b[1] - a[1]];
                let cr = (e[0] * da[1] - e[1] * da[0]).abs() / e[0].hypot(e[1]);
                if cr <= MARGIN {
                    return false;
                }
            }
        }
    }
    true
}

/// Check random lines through `P` meeting the disk: each meets at most
/// `binom(n, 2)` dual tubes, every chord inside a tube is shorter than two
/// cells, and the near exit point lies in the tangency ball.
fn verify_rays(gp: &mut GenericPoint, grid: &GridSkeleton, sites: &[[f64; 2]], rng: &mut ChaCha8Rng) -> bool {
    let n = grid.n;
    let big = grid.big_r();
    let south = Point::south_pole(n);
    let ps = gp.p * big;
    for _ in 0..RAY_CHECKS {
        let target = random_in_ball(rng, n) * big;
        let u = (target - ps).normalized();
        let (t0, t1) = match line_sphere_params(ps, ps + u, Point::ORIGIN, big) {
            Some(t) => t,
            None => continue,
        };
        let near = (ps + u * t0) * (1.0 / big);
        if near.normalized().dot(south).clamp(-1.0, 1.0).acos() > gp.l + 1e-9 {
            return false;
        }
        let mut hits = 0;
        let classes = if n == 2 { 1 } else { 3 };
        for k in 0..classes {
            let axis = 2 - k.min(2);
            let o = project(ps, n, axis);
            let v = project(u, n, axis);
            let vv = v[0] * v[0] + v[1] * v[1];
            if vv < 1e-300 {
                continue;
            }
            for s in sites {
                // Parameters where the projected line is within the margin.
                let w = [o[0] - s[0], o[1] - s[1]];
                let b = w[0] * v[0] + w[1] * v[1];
                let c = w[0] * w[0] + w[1] * w[1] - gp.margin * gp.margin;
                let disc = b * b - vv * c;
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                let (lo, hi) = ((-b - sq) / vv, (-b + sq) / vv);
                let (lo, hi) = (lo.max(t0), hi.min(t1));
                if hi >= lo {
                    hits += 1;
                    gp.max_chord = gp.max_chord.max(hi - lo);
                }
            }
        }
        gp.max_hits = gp.max_hits.max(hits);
        gp.rays_checked += 1;
        if hits > grid.dual_classes() || gp.max_chord >= 2.0 {
            return false;
        }
    }
    true
}

fn random_in_ball(rng: &mut ChaCha8Rng, n: usize) -> Point {
    loop {
        let p = if n == 2 {
            Point::new2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            Point::new3(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        };
        if p.norm() <= 1.0 {
            return p;
        }
    }
}

/// Far intersection of the line through `P` and `x` with the unit sphere.
pub fn far_exit(x: Point, gp: &GenericPoint) -> Result<Point> {
    let (t0, t1) = line_sphere_params(gp.p, x, Point::ORIGIN, 1.0).ok_or(Error::TangentRay)?;
    if (t1 - t0) * gp.p.dist(x) <= 1e-12 {
        return Err(Error::TangentRay);
    }
    Ok(gp.p + (x - gp.p) * t1)
}

/// One segment per point of `z`, from the point to its far exit along the
/// line through `P`.
pub fn ray_fill(z: &ZeroChain, gp: &GenericPoint) -> Result<OneChain> {
    let mut segs = Vec::with_capacity(z.mass());
    for &x in z.points() {
        if x.norm() > 1.0 + 1e-9 {
            return Err(Error::BadSpec(format!("point {x:?} outside the unit disk")));
        }
        segs.push((x, far_exit(x, gp)?));
    }
    Ok(OneChain::new(z.dim(), segs))
}

fn near_int(x: f64) -> bool {
    (x - x.round()).abs() <= ON_GRID
}

fn mix(mut h: u64) -> u64 {
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Offset in `[-a, a]` derived from a seed and an integer key.
fn jitter(seed: u64, key: &[i64], a: f64) -> [f64; 3] {
    let mut h = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    for &k in key {
        h = mix(h ^ k as u64);
    }
    let mut out = [0.0; 3];
    for o in &mut out {
        h = mix(h);
        *o = a * (2.0 * (h >> 11) as f64 / (1u64 << 53) as f64 - 1.0);
    }
    out
}

/// Exit of the ray from `c` through `x` on a convex polygon (CCW), or `x`
/// itself when it already lies on the boundary.
pub(crate) fn polygon_exit(poly: &[[f64; 2]], c: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    let m = poly.len();
    for i in 0..m {
        let (p, q) = (poly[i], poly[(i + 1) % m]);
        let e = [q[0] - p[0], q[1] - p[1]];
        let w = [x[0] - p[0], x[1] - p[1]];
        let len = e[0].hypot(e[1]);
        if (e[0] * w[1] - e[1] * w[0]).abs() <= ON_GRID * len {
            let s = (e[0] * w[0] + e[1] * w[1]) / (len * len);
            if (-ON_GRID..=1.0 + ON_GRID).contains(&s) {
                return x;
            }
        }
    }
    let d = [x[0] - c[0], x[1] - c[1]];
    let mut best = (f64::INFINITY, x);
    for i in 0..m {
        let (p, q) = (poly[i], poly[(i + 1) % m]);
        let e = [q[0] - p[0], q[1] - p[1]];
        let den = d[0] * e[1] - d[1] * e[0];
        if den.abs() < 1e-300 {
            continue;
        }
        let w = [p[0] - c[0], p[1] - c[1]];
        let t = (w[0] * e[1] - w[1] * e[0]) / den;
        let s = ((w[0] * d[1] - w[1] * d[0]) / den).clamp(0.0, 1.0);
        if t > 0.0 && t < best.0 {
            // Interpolate along the edge so axis-aligned edges keep their
            // constant coordinate exactly.
            let pt = [p[0] + s * e[0], p[1] + s * e[1]];
            let pt = [if e[0] == 0.0 { p[0] } else { pt[0] }, if e[1] == 0.0 { p[1] } else { pt[1] }];
            best = (t, pt);
        }
    }
    best.1
}

/// Radial image of the segment `[a, b]` from the interior point `c` of a
/// convex polygon: the boundary arc swept by the ray. `None` when `c` lies
/// on the segment.
pub fn push_polygon(poly: &[[f64; 2]], c: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<Vec<([f64; 2], [f64; 2])>> {
    let da = [a[0] - c[0], a[1] - c[1]];
    let db = [b[0] - c[0], b[1] - c[1]];
    let cr = da[0] * db[1] - da[1] * db[0];
    let scale = da[0].hypot(da[1]) * db[0].hypot(db[1]);
    if cr.abs() <= 1e-13 * scale {
        if da[0] * db[0] + da[1] * db[1] < 0.0 || scale == 0.0 {
            return None;
        }
        return Some(Vec::new());
    }
    let (a, b, da) = if cr > 0.0 { (a, b, da) } else { (b, a, db) };
    let pa = polygon_exit(poly, c, a);
    let pb = polygon_exit(poly, c, b);
    let u = [da[0], da[1]];
    let w = [-u[1], u[0]];
    let ang = |p: [f64; 2]| {
        let v = [p[0] - c[0], p[1] - c[1]];
        (w[0] * v[0] + w[1] * v[1]).atan2(u[0] * v[0] + u[1] * v[1])
    };
    let end = ang(pb);
    let mut mid: Vec<(f64, [f64; 2])> =
        poly.iter().map(|&v| (ang(v), v)).filter(|&(t, _)| t > 1e-12 && t < end - 1e-12).collect();
    mid.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut path = vec![pa];
    path.extend(mid.into_iter().map(|(_, v)| v));
    path.push(pb);
    Some(path.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Federer–Fleming style deformation onto the 1-skeleton: radial pushes
/// from jittered cube centres to the faces (`n = 3`), then from jittered
/// square centres to the edges. Cell units throughout.
#[derive(Clone, Debug)]
pub struct FfPush {
    pub grid: GridSkeleton,
    pub seed: u64,
}

/// Mass and displacement of one push, cell units.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PushStats {
    pub segments_in: usize,
    pub mass_scaled: f64,
    pub max_displacement: f64,
    /// `mass / (k + R^n)`.
    pub fitted_d: f64,
}

const JITTER: f64 = 1e-3;

impl FfPush {
    pub fn new(grid: GridSkeleton, seed: u64) -> FfPush {
        FfPush { grid, seed }
    }

    fn cube_centre(&self, lo: [i64; 3]) -> Point {
        let j = jitter(self.seed, &[0, lo[0], lo[1], lo[2]], JITTER);
        Point::new3(lo[0] as f64 + 0.5 + j[0], lo[1] as f64 + 0.5 + j[1], lo[2] as f64 + 0.5 + j[2])
    }

    /// Square of the face through `lo` normal to `axis` (the plane itself
    /// for `n = 2`), as in-plane coordinates with its centre.
    fn square(&self, axis: usize, lo: [i64; 3]) -> ([[f64; 2]; 4], [f64; 2], [usize; 2]) {
        let ax = if self.grid.n == 2 { [0, 1] } else { other_axes(axis) };
        let (u, v) = (lo[ax[0]] as f64, lo[ax[1]] as f64);
        let j = jitter(self.seed, &[1 + axis as i64, lo[0], lo[1], lo[2]], JITTER);
        let sq = [[u, v], [u + 1.0, v], [u + 1.0, v + 1.0], [u, v + 1.0]];
        (sq, [u + 0.5 + j[0], v + 0.5 + j[1]], ax)
    }

    /// Push a point lying on a face (or anywhere for `n = 2`) to the edges.
    fn push_face_point(&self, p: Point) -> Result<Point> {
        let (axis, lo) = match self.face_of(p) {
            Some(f) => f,
            None => return Ok(p),
        };
        let (sq, c, ax) = self.square(axis, lo);
        let x = [p.0[ax[0]], p.0[ax[1]]];
        if x == c {
            return Err(Error::DegenerateCenter(format!("{axis}:{lo:?}")));
        }
        let e = polygon_exit(&sq, c, x);
        let mut out = p;
        out.0[ax[0]] = e[0];
        out.0[ax[1]] = e[1];
        Ok(out)
    }

    /// Face containing `p` (normal axis and integer corner), `None` if `p`
    /// is already on the 1-skeleton.
    fn face_of(&self, p: Point) -> Option<(usize, [i64; 3])> {
        let n = self.grid.n;
        let ints: Vec<usize> = (0..n).filter(|&k| near_int(p.0[k])).collect();
        match (n, ints.len()) {
            (2, 0) => Some((2, [p.x().floor() as i64, p.y().floor() as i64, 0])),
            (3, 1) => {
                let k = ints[0];
                let mut lo = [0i64; 3];
                for i in 0..3 {
                    lo[i] = if i == k { p.0[i].round() as i64 } else { p.0[i].floor() as i64 };
                }
                Some((k, lo))
            }
            _ => None,
        }
    }

    fn cube_exit(&self, lo: [i64; 3], c: Point, x: Point) -> Point {
        if (0..3).any(|k| near_int(x.0[k]) && (x.0[k].round() as i64 == lo[k] || x.0[k].round() as i64 == lo[k] + 1)) {
            return x;
        }
        let mut best = (f64::INFINITY, 0usize, 0.0);
        for k in 0..3 {
            let d = x.0[k] - c.0[k];
            if d == 0.0 {
                continue;
            }
            let bound = if d > 0.0 { (lo[k] + 1) as f64 } else { lo[k] as f64 };
            let t = (bound - c.0[k]) / d;
            if t < best.0 {
                best = (t, k, bound);
            }
        }
        let mut out = c + (x - c) * best.0;
        out.0[best.1] = best.2;
        out
    }

    /// Image of a point, cell units.
    pub fn map_scaled(&self, p: Point) -> Result<Point> {
        if self.grid.n == 3 && !(0..3).any(|k| near_int(p.0[k])) {
            let lo = [p.x().floor() as i64, p.y().floor() as i64, p.z().floor() as i64];
            let c = self.cube_centre(lo);
            if p == c {
                return Err(Error::DegenerateCenter(format!("{lo:?}")));
            }
            return self.push_face_point(self.cube_exit(lo, c, p));
        }
        self.push_face_point(p)
    }

    /// Image of a point, unit coordinates.
    pub fn map_point(&self, p: Point) -> Result<Point> {
        let big = self.grid.big_r();
        Ok(self.map_scaled(p * big)? * (1.0 / big))
    }

    pub fn map_zero(&self, z: &ZeroChain) -> Result<ZeroChain> {
        let pts: Result<Vec<Point>> = z.points().iter().map(|&p| self.map_point(p)).collect();
        Ok(ZeroChain::new(z.dim(), pts?))
    }

    /// Push a one-chain (unit coordinates) onto the skeleton. The result is
    /// reduced mod 2, so coinciding edge pieces cancel.
    pub fn push(&self, c: &OneChain) -> Result<(OneChain, PushStats)> {
        let big = self.grid.big_r();
        let mut pieces: Vec<(Point, Point)> = Vec::new();
        let mut disp: f64 = 0.0;
        for &(a, b) in c.segments() {
            let (sa, sb) = (a * big, b * big);
            disp = disp.max(self.map_scaled(sa)?.dist(sa)).max(self.map_scaled(sb)?.dist(sb));
            for (p, q) in split_cells(sa, sb, self.grid.n) {
                self.push_piece(p, q, &mut pieces)?;
            }
        }
        let out = OneChain::new(c.dim(), pieces.into_iter().map(|(p, q)| (p * (1.0 / big), q * (1.0 / big))).collect())
            .reduce_collinear();
        let mass_scaled = out.mass() * big;
        let k = c.segments().len();
        let stats = PushStats {
            segments_in: k,
            mass_scaled,
            max_displacement: disp,
            fitted_d: mass_scaled / (k as f64 + big.powi(self.grid.n as i32)),
        };
        Ok((out, stats))
    }

    fn push_piece(&self, p: Point, q: Point, out: &mut Vec<(Point, Point)>) -> Result<()> {
        let m = p.lerp(q, 0.5);
        if self.grid.n == 2 || (0..3).any(|k| near_int(m.0[k])) {
            return self.push_face_piece(p, q, out);
        }
        let lo = [m.x().floor() as i64, m.y().floor() as i64, m.z().floor() as i64];
        let c = self.cube_centre(lo);
        let (da, db) = (p - c, q - c);
        let nrm = da.cross(db);
        if nrm.norm() <= 1e-13 * da.norm() * db.norm() {
            if da.dot(db) < 0.0 || da.norm() * db.norm() == 0.0 {
                return Err(Error::DegenerateCenter(format!("{lo:?}")));
            }
            return Ok(());
        }
        let u = da.normalized();
        let w = nrm.cross(u).normalized();
        let ang = |x: Point| {
            let v = x - c;
            w.dot(v).atan2(u.dot(v))
        };
        let pa = self.cube_exit(lo, c, p);
        let pb = self.cube_exit(lo, c, q);
        let end = ang(pb);
        let mut mid: Vec<(f64, Point)> =
            cube_section(lo, c, nrm).into_iter().map(|v| (ang(v), v)).filter(|&(t, _)| t > 1e-12 && t < end - 1e-12).collect();
        mid.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut path = vec![pa];
        path.extend(mid.into_iter().map(|(_, v)| v));
        path.push(pb);
        for w in path.windows(2) {
            if w[0].dist(w[1]) > ON_GRID {
                self.push_face_piece(w[0], w[1], out)?;
            }
        }
        Ok(())
    }

    /// Push a piece lying in one face (any piece for `n = 2`) to its edges.
    fn push_face_piece(&self, p: Point, q: Point, out: &mut Vec<(Point, Point)>) -> Result<()> {
        let m = p.lerp(q, 0.5);
        let (axis, lo) = match self.face_of(m) {
            Some(f) => f,
            None => {
                out.push((p, q));
                return Ok(());
            }
        };
        let (sq, c, ax) = self.square(axis, lo);
        let a = [p.0[ax[0]], p.0[ax[1]]];
        let b = [q.0[ax[0]], q.0[ax[1]]];
        let arcs = push_polygon(&sq, c, a, b).ok_or_else(|| Error::DegenerateCenter(format!("{axis}:{lo:?}")))?;
        for (x, y) in arcs {
            let (mut s, mut t) = (m, m);
            s.0[ax[0]] = x[0];
            s.0[ax[1]] = x[1];
            t.0[ax[0]] = y[0];
            t.0[ax[1]] = y[1];
            if self.grid.n == 3 {
                s.0[axis] = lo[axis] as f64;
                t.0[axis] = lo[axis] as f64;
            }
            out.push((s, t));
        }
        Ok(())
    }
}

fn other_axes(k: usize) -> [usize; 2] {
    match k {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// Polygon cut from the cube at `lo` by the plane through `c` with normal
/// `nrm`: one point per crossed edge, corners included once.
fn cube_section(lo: [i64; 3], c: Point, nrm: Point) -> Vec<Point> {
    let corner = |bits: usize| {
        Point::new3(
            (lo[0] + (bits & 1) as i64) as f64,
            (lo[1] + ((bits >> 1) & 1) as i64) as f64,
            (lo[2] + ((bits >> 2) & 1) as i64) as f64,
        )
    };
    let mut out: Vec<Point> = Vec::new();
    for bits in 0..8usize {
        for k in 0..3 {
            if bits & (1 << k) != 0 {
                continue;
            }
            let (p, q) = (corner(bits), corner(bits | (1 << k)));
            let (sp, sq) = (nrm.dot(p - c), nrm.dot(q - c));
            let tol = 1e-13 * nrm.norm();
            let hit = if sp.abs() <= tol {
                Some(p)
            } else if sq.abs() <= tol {
                Some(q)
            } else if sp * sq < 0.0 {
                let mut x = p + (q - p) * (sp / (sp - sq));
                x.0[k] = x.0[k].clamp(p.0[k], q.0[k]);
                Some(x)
            } else {
                None
            };
            if let Some(x) = hit {
                if !out.iter().any(|y| y.dist(x) <= ON_GRID) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Split a scaled segment where it crosses integer coordinate planes. The
/// crossing coordinate of each split point is snapped to the integer.
fn split_cells(a: Point, b: Point, n: usize) -> Vec<(Point, Point)> {
    let mut cuts: Vec<(f64, usize, f64)> = Vec::new();
    for k in 0..n {
        let (x0, x1) = (a.0[k], b.0[k]);
        if x0 == x1 {
            continue;
        }
        let (lo, hi) = (x0.min(x1), x0.max(x1));
        let mut g = lo.floor() + 1.0;
        while g < hi {
            let t = (g - x0) / (x1 - x0);
            if t > 0.0 && t < 1.0 && (g - lo) > ON_GRID && (hi - g) > ON_GRID {
                cuts.push((t, k, g));
            }
            g += 1.0;
        }
    }
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut pts = vec![a];
    for (t, k, g) in cuts {
        let mut p = a.lerp(b, t);
        p.0[k] = g;
        if p.dist(*pts.last().expect("nonempty")) > ON_GRID {
            pts.push(p);
        }
    }
    if b.dist(*pts.last().expect("nonempty")) > ON_GRID || pts.len() == 1 {
        pts.push(b);
    }
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(r: f64) -> GridSkeleton {
        GridSkeleton::new(2, r).unwrap()
    }

    #[test]
    fn skeleton_constant_is_order_one() {
        for r in [0.25, 0.125, 0.0625] {
            let e = grid2(r).skeleton_constant();
            assert!(e > 2.0 && e < 8.0, "{e}");
        }
        // Three line families through a ball: about 4 pi.
        let e3 = GridSkeleton::new(3, 0.125).unwrap().skeleton_constant();
        assert!(e3 > 8.0 && e3 < 16.0, "{e3}");
    }

    #[test]
    fn generic_point_n2() {
        let g = grid2(0.125);
        let gp = pick_generic_point(&g, 0.3, 1).unwrap();
        assert!(gp.p.norm() > 1.0);
        assert_eq!(gp.rays_checked, RAY_CHECKS);
        assert!(gp.max_hits <= 1);
    }

    #[test]
    fn generic_point_n3() {
        let g = GridSkeleton::new(3, 0.25).unwrap();
        let gp = pick_generic_point(&g, 0.3, 2).unwrap();
        assert!(gp.samples <= 100);
        assert!(gp.max_hits <= 3 && gp.max_chord < 2.0);
    }

    #[test]
    fn hemisphere_gives_far_point_or_error() {
        let g = grid2(0.25);
        match pick_generic_point(&g, std::f64::consts::FRAC_PI_2, 3) {
            Ok(gp) => assert!(gp.p.norm() > 1.0),
            Err(e) => assert!(matches!(e, Error::ExhaustedSamples(_))),
        }
    }

    #[test]
    fn ray_from_centre_exits_far_side() {
        let gp = GenericPoint {
            p: Point::new3(-3.0, 0.0, 0.0),
            l: 1.0,
            margin: 1e-5,
            samples: 0,
            rays_checked: 0,
            max_hits: 0,
            max_chord: 0.0,
        };
        let z = ZeroChain::new(3, vec![Point::ORIGIN]);
        let c = ray_fill(&z, &gp).unwrap();
        assert_eq!(c.segments().len(), 1);
        let (a, b) = c.segments()[0];
        let far = if a.norm() > b.norm() { a } else { b };
        assert!(far.dist(Point::new3(1.0, 0.0, 0.0)) < 1e-12);
        assert!(ray_fill(&ZeroChain::empty(3), &gp).unwrap().is_empty());
    }

    #[test]
    fn push_square_arc() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let arcs = push_polygon(&sq, [0.5, 0.5], [0.9, 0.4], [0.6, 0.9]).unwrap();
        let len: f64 = arcs.iter().map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1])).sum();
        // Exits (1, 0.375) and (0.625, 1): up the right side then left along the top.
        assert!((len - 1.0).abs() < 1e-12, "{len}");
        assert!(push_polygon(&sq, [0.5, 0.5], [0.2, 0.2], [0.8, 0.8]).is_none());
    }

    #[test]
    fn segment_on_edge_is_fixed() {
        let push = FfPush::new(grid2(0.25), 5);
        let c = OneChain::new(2, vec![(Point::new2(0.25, 0.0), Point::new2(0.25, 0.2))]);
        let (out, _) = push.push(&c).unwrap();
        assert!(out.same(&c));
        assert!(push.push(&OneChain::empty(2)).unwrap().0.is_empty());
    }

    fn boundary_commutes(n: usize, seed: u64) {
        let grid = GridSkeleton::new(n, 0.125).unwrap();
        let push = FfPush::new(grid, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let segs: Vec<(Point, Point)> = (0..20).map(|_| (random_in_ball(&mut rng, n) * 0.9, random_in_ball(&mut rng, n) * 0.9)).collect();
        let c = OneChain::new(n, segs);
        let (out, stats) = push.push(&c).unwrap();
        let expect = push.map_zero(&c.boundary()).unwrap();
        assert!(out.boundary().same(&expect));
        let max_disp = if n == 2 { 2f64.sqrt() } else { 3f64.sqrt() + 2f64.sqrt() };
        assert!(stats.max_displacement <= max_disp);
        // Every output segment lies on a grid line.
        for (a, b) in out.segments() {
            let on: usize = (0..n).filter(|&k| near_int(a.0[k] * 8.0) && near_int(b.0[k] * 8.0)).count();
            assert!(on >= n - 1, "{a:?} {b:?}");
        }
    }

    #[test]
    fn push_commutes_with_boundary_n2() {
        boundary_commutes(2, 11);
    }

    #[test]
    fn push_commutes_with_boundary_n3() {
        boundary_commutes(3, 12);
    }
}
