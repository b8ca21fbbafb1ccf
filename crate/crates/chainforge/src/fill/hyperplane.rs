use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Euclidean ball centred on the unit sphere of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl SphereBall {
    pub fn new(center: Vec<f64>, radius: f64) -> SphereBall {
        SphereBall { center: unit(center), radius }
    }
}

/// Hyperplane through the origin, by unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    /// Smallest `dist(plane, centre) - radius` over the balls.
    pub margin: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2 = dot(&v, &v);
        if r2 > 1e-6 && r2 <= 1.0 {
            return unit(v);
        }
    }
}

/// `min_i |nu . c_i| - radius_i`; positive exactly when the plane misses
/// every ball.
pub fn plane_margin(normal: &[f64], balls: &[SphereBall]) -> f64 {
    balls.iter().map(|b| dot(normal, &b.center).abs() - b.radius).fold(f64::INFINITY, f64::min)
}

const SAMPLES: usize = 2048;
const CLIMBERS: usize = 8;
const CLIMB_STEPS: usize = 300;

/// Search for a plane through the origin missing all balls: sampled normals,
/// the ball centres themselves, then hill climbing on the margin from the
/// best few.
pub fn find_avoiding_hyperplane(balls: &[SphereBall], n: usize, seed: u64) -> Result<Hyperplane> {
    if n < 2 {
        return Err(Error::DimUnsupported(format!("hyperplanes need n >= 2, got {n}")));
    }
    if balls.iter().any(|b| b.center.len() != n) {
        return Err(Error::BadSpec("ball centre of wrong dimension".into()));
    }
    let axis: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
    if balls.is_empty() {
        return Ok(Hyperplane { normal: axis, margin: f64::INFINITY });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cands: Vec<(f64, Vec<f64>)> = Vec::with_capacity(SAMPLES + balls.len() + n);
    let push = |v: Vec<f64>, c: &mut Vec<(f64, Vec<f64>)>| c.push((plane_margin(&v, balls), v));
    for i in 0..n {
        push((0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect(), &mut cands);
    }
    for b in balls {
        push(b.center.clone(), &mut cands);
    }
    for _ in 0..SAMPLES {
        push(random_unit(&mut rng, n), &mut cands);
    }
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = cands[0].clone();
    for (m0, v0) in cands.into_iter().take(CLIMBERS) {
        let (mut m, mut v) = (m0, v0);
        let mut step = 0.25;
        for _ in 0..CLIMB_STEPS {
            if m > 0.0 && m >= best.0 && step < 1e-3 {
                break;
            }
            let dir = random_unit(&mut rng, n);
            let w = unit(v.iter().zip(&dir).map(|(a, b)| a + step * b).collect());
            let mw = plane_margin(&w, balls);
            if mw > m {
                m = mw;
                v = w;
            } else {
                step *= 0.93;
            }
        }
        if m > best.0 {
            best = (m, v);
        }
    }
    if best.0 > 0.0 {
        Ok(Hyperplane { normal: best.1, margin: best.0 })
    } else {
        Err(Error::NotFound)
    }
}

/// Shape of a ball family before scaling: centres and relative radii summing
/// to one.
#[derive(Clone, Debug)]
pub struct FamilyShape {
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl FamilyShape {
    /// Balls whose diameters sum to `diam_sum`.
    pub fn scaled(&self, diam_sum: f64) -> Vec<SphereBall> {
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| SphereBall { center: c.clone(), radius: 0.5 * diam_sum * w })
            .collect()
    }
}

/// Random family shapes: scattered centres with random weights, and evenly
/// spaced equal balls along a great circle.
pub fn random_shape(n: usize, rng: &mut impl Rng) -> FamilyShape {
    let m = rng.random_range(1..=12usize);
    if rng.random_bool(0.5) {
        let centers = (0..m).map(|_| random_unit(rng, n)).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        FamilyShape { centers, weights: raw.iter().map(|w| w / s).collect() }
    } else {
        let u = random_unit(rng, n);
        let mut v = random_unit(rng, n);
        let d = dot(&u, &v);
        v = unit(v.iter().zip(&u).map(|(a, b)| a - d * b).collect());
        let t0: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let centers = (0..m)
            .map(|i| {
                let t = t0 + std::f64::consts::PI * i as f64 / m as f64;
                unit(u.iter().zip(&v).map(|(a, b)| a * t.cos() + b * t.sin()).collect())
            })
            .collect();
        FamilyShape { centers, weights: vec![1.0 / m as f64; m] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub n: usize,
    /// Largest diameter sum at which every trial family was avoided.
    pub delta_n: f64,
    /// Smallest diameter sum at which some trial family was not.
    pub first_failure: f64,
    pub trials: usize,
}

/// Bisect the diameter sum below which every one of `trials` random family
/// shapes admits an avoiding plane. Shapes are fixed and only scaled, so
/// failure is monotone in the sum.
pub fn estimate_delta_n(n: usize, trials: usize, seed: u64) -> Result<DeltaEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: Vec<FamilyShape> = (0..trials).map(|_| random_shape(n, &mut rng)).collect();
    let all_found = |s: f64| -> Result<bool> {
        for (i, sh) in shapes.iter().enumerate() {
            match find_avoiding_hyperplane(&sh.scaled(s), n, seed ^ (i as u64).wrapping_mul(0x9e37_79b9)) {
                Ok(_) => {}
                Err(Error::NotFound) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
        Ok(true)
    };
    let (mut lo, mut hi) = (0.0, 4.0);
    for _ in 0..18 {
        let mid = 0.5 * (lo + hi);
        if all_found(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DeltaEstimate { n, delta_n: lo, first_failure: hi, trials })
}

/// Convex spherical polygon on `S^2` cut out by hemispheres `a_j . x >= 0`.
#[derive(Clone, Debug)]
pub struct SphericalPolygon {
    pub constraints: Vec<[f64; 3]>,
    pub vertices: Vec<[f64; 3]>,
    /// Vertex index pairs joined by an edge.
    pub edges: Vec<(usize, usize)>,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl SphericalPolygon {
    /// Intersect the hemispheres; vertices are the feasible intersections of
    /// pairs of boundary circles.
    pub fn from_constraints(constraints: Vec<[f64; 3]>) -> SphericalPolygon {
        const TOL: f64 = 1e-10;
        let feasible = |x: [f64; 3]| constraints.iter().all(|a| dot(a, &x) >= -TOL);
        let mut vertices: Vec<[f64; 3]> = Vec::new();
        let mut active: Vec<Vec<usize>> = Vec::new();
        for i in 0..constraints.len() {
            for j in i + 1..constraints.len() {
                let c = cross(constraints[i], constraints[j]);
                let norm = dot(&c, &c).sqrt();
                if norm < 1e-12 {
                    continue;
                }
                for s in [1.0, -1.0] {
                    let x = [s * c[0] / norm, s * c[1] / norm, s * c[2] / norm];
                    if feasible(x) && !vertices.iter().any(|v| dot(v, &x) > 1.0 - 1e-12) {
                        let act = (0..constraints.len()).filter(|&k| dot(&constraints[k], &x).abs() <= TOL).collect();
                        vertices.push(x);
                        active.push(act);
                    }
                }
            }
        }
        let mut edges = Vec::new();
        for a in 0..vertices.len() {
            for b in a + 1..vertices.len() {
                let shared = active[a].iter().any(|k| active[b].contains(k));
                // Antipodal pairs share circles without bounding an edge.
                if shared && dot(&vertices[a], &vertices[b]) > -1.0 + 1e-9 {
                    edges.push((a, b));
                }
            }
        }
        SphericalPolygon { constraints, vertices, edges }
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        self.constraints.iter().all(|a| dot(a, &x) >= 0.0)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SkeletonCheck {
    pub trials: usize,
    /// Trials where the plane was seen to cut the polygon.
    pub cut: usize,
    pub violations: usize,
}

/// Random convex spherical polygons in an open hemisphere and random planes
/// through the origin: whenever sampled points of the polygon fall strictly
/// on both sides, the vertices must too and some edge must cross.
pub fn skeleton_check(trials: usize, seed: u64) -> SkeletonCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SkeletonCheck { trials, ..Default::default() };
    for _ in 0..trials {
        let pole = random_unit(&mut rng, 3);
        let pole = [pole[0], pole[1], pole[2]];
        let k = rng.random_range(3..8usize);
        let spread: f64 = rng.random_range(0.2..1.2);
        let constraints: Vec<[f64; 3]> = (0..k)
            .map(|_| {
                let d = random_unit(&mut rng, 3);
                let v = unit((0..3).map(|i| pole[i] + spread * d[i]).collect());
                [v[0], v[1], v[2]]
            })
            .collect();
        let poly = SphericalPolygon::from_constraints(constraints);
        if poly.vertices.len() < 3 {
            continue;
        }
        let nu = random_unit(&mut rng, 3);
        let mut sides = [false, false];
        for _ in 0..400 {
            let w = random_unit(&mut rng, 3);
            let x = unit((0..3).map(|i| pole[i] + rng.random_range(0.0..2.0) * w[i]).collect());
            let x = [x[0], x[1], x[2]];
            if poly.contains(x) {
                let s = dot(&nu, &x);
                if s > 1e-9 {
                    sides[0] = true;
                } else if s < -1e-9 {
                    sides[1] = true;
                }
            }
        }
        if !(sides[0] && sides[1]) {
            continue;
        }
        out.cut += 1;
        let sign: Vec<f64> = poly.vertices.iter().map(|v| dot(&nu, v)).collect();
        let vertex_cut = sign.iter().any(|&s| s >= 0.0) && sign.iter().any(|&s| s <= 0.0);
        let edge_cut = poly.edges.iter().any(|&(a, b)| sign[a] * sign[b] <= 0.0);
        if !(vertex_cut && edge_cut) {
            out.violations += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_balls_gives_first_axis() {
        let h = find_avoiding_hyperplane(&[], 3, 0).unwrap();
        assert_eq!(h.normal, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn small_ball_at_north_pole() {
        let b = SphereBall::new(vec![0.0, 0.0, 1.0], 0.1);
        let h = find_avoiding_hyperplane(std::slice::from_ref(&b), 3, 1).unwrap();
        // Independent check: distance from the plane to the centre.
        assert!(dot(&h.normal, &b.center).abs() > b.radius);
    }

    #[test]
    fn covering_chain_is_not_found() {
        // Twelve balls along a half great circle, each overlapping the next,
        // plus the two poles of that circle: every plane through the origin
        // meets one of them.
        let mut balls: Vec<SphereBall> = (0..12)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 12.0;
                SphereBall::new(vec![t.cos(), t.sin(), 0.0], 0.3)
            })
            .collect();
        balls.push(SphereBall::new(vec![0.0, 0.0, 1.0], 0.3));
        assert!(matches!(find_avoiding_hyperplane(&balls, 3, 2), Err(Error::NotFound)));
    }

    #[test]
    fn delta_estimate_is_above_union_bound() {
        // A normal meets a ball of radius s with probability s on S^2, so
        // diameter sums below 2 are always avoidable.
        let est = estimate_delta_n(3, 40, 3).unwrap();
        assert!(est.delta_n >= 2.0, "{est:?}");
        assert!(est.delta_n < est.first_failure);
    }

    #[test]
    fn polygon_square_has_four_edges() {
        let s = 0.5f64;
        let poly = SphericalPolygon::from_constraints(vec![[1.0, 0.0, s], [-1.0, 0.0, s], [0.0, 1.0, s], [0.0, -1.0, s]]);
        assert_eq!(poly.vertices.len(), 4);
        assert_eq!(poly.edges.len(), 4);
    }

    #[test]
    fn skeleton_has_no_violations() {
        let c = skeleton_check(200, 5);
        assert!(c.cut > 20);
        assert_eq!(c.violations, 0);
    }

    #[test]
    fn four_dimensional_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let balls: Vec<SphereBall> = (0..6).map(|_| SphereBall::new(random_unit(&mut rng, 4), 0.1)).collect();
        let h = find_avoiding_hyperplane(&balls, 4, 7).unwrap();
        assert!(plane_margin(&h.normal, &balls) > 0.0);
    }
}
