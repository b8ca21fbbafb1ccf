//! The acceptance criteria as named presets. Each returns one pass/fail
//! outcome with the measured quantities behind it.

use super::{generate_family, task_seed, ComplexSpec, FamilyKind, GeneratorSpec};
use crate::chain::{OneChain, ZeroChain};
use crate::coarea::{
    check_localized, cover_centers, merge_admissible, monotone_constant, monotonize, select_radii, AdmissibleFamily, Ball, Certificates,
    RadiusMemo,
};
use crate::error::{Error, Result};
use crate::fill::hyperplane::random_shape;
use crate::fill::{
    avoid_boundary_ball, bend_cancel_fill, estimate_delta_n, find_avoiding_hyperplane, parametric_fill, pick_generic_point,
    random_localized_family, ray_fill, skeleton_check, sweepout_family, Domain, FfPush, GridSkeleton, TriangulatedPolygon,
};
use crate::flat::{flat_norm, flat_norm_oracle, FlatMode};
use crate::geom::Point;
use crate::localize::{localize_family, LocalizeParams};
use crate::region::Region;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Numeric tolerances of the criteria.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    pub flat_abs: f64,
    pub flat_seconds: f64,
    pub merge_factor: f64,
    /// Largest allowed max/min ratio of a fitted constant across a sweep.
    pub stability: f64,
    /// Single constant bounding the parametric fill ratio.
    pub parametric_ratio: f64,
    /// Multiple of the seed-to-seed spread that a trend slope may exceed zero by.
    pub trend_noise: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances { flat_abs: 1e-9, flat_seconds: 30.0, merge_factor: 3.0, stability: 2.0, parametric_ratio: 1.0, trend_noise: 2.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CriterionOutcome {
    fn new(id: usize, name: &str) -> CriterionOutcome {
        CriterionOutcome { id, name: name.into(), passed: true, summary: String::new(), metrics: BTreeMap::new() }
    }

    fn metric(&mut self, k: impl Into<String>, v: f64) {
        self.metrics.insert(k.into(), v);
    }
}

pub const PRESETS: [&str; 10] = [
    "flat-oracle",
    "coarea-slices",
    "admissible-algebra",
    "chop-stability",
    "localize-pipeline",
    "bend-cancel",
    "ff-law",
    "avoid-ball",
    "hyperplane",
    "parametric-fill",
];

/// Run a preset by name or by criterion number.
pub fn run_preset(name: &str, seed: u64, tol: &Tolerances) -> Result<CriterionOutcome> {
    let id = match name.parse::<usize>() {
        Ok(i) if (1..=10).contains(&i) => i,
        _ => PRESETS.iter().position(|p| *p == name).map(|i| i + 1).ok_or_else(|| Error::BadSpec(format!("unknown preset {name}")))?,
    };
    Ok(match id {
        1 => flat_oracle(seed, tol),
        2 => coarea_slices(seed),
        3 => admissible_algebra(seed, tol),
        4 => chop_stability(seed),
        5 => localize_pipeline(seed, tol),
        6 => bend_cancel(seed, tol),
        7 => ff_law(seed, tol),
        8 => avoid_ball(seed),
        9 => hyperplane(seed),
        _ => parametric(seed, tol),
    })
}

fn rng_for(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(task_seed(seed, key))
}

fn in_disk(rng: &mut impl Rng, radius: f64) -> Point {
    loop {
        let p = Point::new2(rng.random_range(-radius..radius), rng.random_range(-radius..radius));
        if p.norm() < radius {
            return p;
        }
    }
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo
    } else if hi <= 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Flat-norm test cases: up to eight points in the unit disk or in a random
/// triangle.
pub fn flat_cases(mode: FlatMode, count: usize, seed: u64) -> Vec<(ZeroChain, Region)> {
    let mut rng = rng_for(seed, &format!("flat/{mode:?}"));
    (0..count)
        .map(|i| {
            let k = rng.random_range(0..=8usize);
            if i % 2 == 0 {
                let pts = (0..k).map(|_| in_disk(&mut rng, 1.0)).collect();
                (ZeroChain::new(2, pts), Region::unit_disk())
            } else {
                let t0: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let v: Vec<Point> = (0..3)
                    .map(|j| {
                        let t = t0 + j as f64 * std::f64::consts::TAU / 3.0 + rng.random_range(-0.5..0.5);
                        Point::new2(t.cos(), t.sin())
                    })
                    .collect();
                let pts = (0..k)
                    .map(|_| {
                        let (mut a, mut b): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
                        if a + b > 1.0 {
                            a = 1.0 - a;
                            b = 1.0 - b;
                        }
                        v[0] + (v[1] - v[0]) * a + (v[2] - v[0]) * b
                    })
                    .collect();
                (ZeroChain::new(2, pts), Region::polygon(v))
            }
        })
        .collect()
}

fn flat_oracle(seed: u64, tol: &Tolerances) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(1, "flat-norm oracle equivalence");
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for mode in [FlatMode::Absolute, FlatMode::Relative] {
        let cases = flat_cases(mode, 500, seed);
        let res: Vec<(f64, bool)> = cases
            .par_iter()
            .map(|(z, d)| match (flat_norm(z, d, mode), flat_norm_oracle(z, d, mode)) {
                (Ok(w), Ok(o)) => ((w.value - o).abs(), w.reconstruct(2).same(z)),
                _ => (f64::INFINITY, false),
            })
            .collect();
        for (diff, rebuilt) in res {
            worst = worst.max(diff);
            if diff > tol.flat_abs || !rebuilt {
                failures += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    out.metric("max_abs_diff", worst);
    out.metric("failures", failures as f64);
    out.metric("seconds", secs);
    out.passed = failures == 0 && secs < tol.flat_seconds;
    out.summary = format!("1000 cases, max |diff| {worst:.2e}, {failures} failures, {secs:.2}s");
    out
}

fn random_chain(rng: &mut impl Rng, segs: usize, radius: f64) -> OneChain {
    OneChain::new(2, (0..segs).map(|_| (in_disk(rng, radius), in_disk(rng, radius))).collect())
}

fn coarea_slices(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(2, "coarea selection soundness");
    let res: Vec<(usize, usize, f64)> = (0..1000)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, &format!("coarea/{i}"));
            let r = rng.random_range(0.1..0.4);
            let centers = cover_centers(&Region::unit_disk(), r, 2);
            let m = rng.random_range(1..=3usize);
            let chains: Vec<OneChain> = (0..m).map(|_| { let k = rng.random_range(1..=12); random_chain(&mut rng, k, 0.95) }).collect();
            let k = m + 1;
            let radii = match select_radii(&centers, &chains, k) {
                Ok(v) => v,
                Err(_) => return (1, 1, f64::INFINITY),
            };
            let mut bad = 0;
            let mut worst: f64 = 0.0;
            for (l, &rl) in radii.iter().enumerate() {
                if !(rl >= r && rl <= 2.0 * r) {
                    bad += 1;
                }
                for c in &chains {
                    let bound = k as f64 * c.mass() / r;
                    match c.slice_sphere(centers.points[l], rl) {
                        Ok(s) => {
                            worst = worst.max(s.mass() as f64 / bound);
                            if s.mass() as f64 > bound + 1e-9 {
                                bad += 1;
                            }
                        }
                        Err(_) => bad += 1,
                    }
                }
            }
            (bad, radii.len(), worst)
        })
        .collect();
    let violations: usize = res.iter().map(|r| r.0).sum();
    let radii: usize = res.iter().map(|r| r.1).sum();
    let worst = res.iter().map(|r| r.2).fold(0.0, f64::max);
    out.metric("violations", violations as f64);
    out.metric("radii_checked", radii as f64);
    out.metric("max_slice_over_bound", worst);
    out.passed = violations == 0;
    out.summary = format!("1000 cases, {radii} radii, {violations} violations, max slice/bound {worst:.3}");
    out
}

fn random_balls(rng: &mut impl Rng, m: usize, centre_spread: f64, rmax: f64) -> Vec<Ball> {
    (0..m).map(|_| (in_disk(rng, centre_spread), rng.random_range(0.01..rmax))).collect()
}

fn disjoint_balls(rng: &mut impl Rng, m: usize, rmax: f64) -> Vec<Ball> {
    let mut out: Vec<Ball> = Vec::new();
    for _ in 0..50 * m {
        if out.len() == m {
            break;
        }
        let b = (in_disk(rng, 0.9), rng.random_range(0.005..rmax));
        if out.iter().all(|c| c.0.dist(b.0) > c.1 + b.1) {
            out.push(b);
        }
    }
    out
}

fn admissible_algebra(seed: u64, tol: &Tolerances) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(3, "admissible algebra");
    let merges: Vec<(bool, f64)> = (0..1000)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, &format!("merge/{i}"));
            let m = rng.random_range(2..=10usize);
            let balls = random_balls(&mut rng, m, 0.3, 0.2);
            let input: f64 = balls.iter().map(|b| b.1).sum();
            match merge_admissible(&balls) {
                Ok(f) => {
                    let covers = balls.iter().all(|b| f.balls.iter().any(|o| b.0.dist(o.0) + b.1 <= o.1 + 1e-12));
                    let ratio = f.radius_sum() / input;
                    (f.is_disjoint() && covers && ratio <= tol.merge_factor + 1e-12, ratio)
                }
                Err(_) => (false, f64::INFINITY),
            }
        })
        .collect();
    let merge_bad = merges.iter().filter(|m| !m.0).count();
    let worst_merge = merges.iter().map(|m| m.1).fold(0.0, f64::max);
    let mut mono_bad = 0usize;
    let mut worst_profile: f64 = 0.0;
    for p in [1usize, 2] {
        let cp = monotone_constant(p);
        for i in 0..100 {
            let mut rng = rng_for(seed, &format!("mono/{p}/{i}"));
            let x = ComplexSpec { p, q: 2 }.build();
            let cells: Vec<_> = x.cells.iter().cloned().collect();
            let mut certs: Certificates = BTreeMap::new();
            for c in cells.iter().filter(|c| c.dim() > 0) {
                let k = rng.random_range(0..=3usize);
                let balls = disjoint_balls(&mut rng, k, 0.02);
                let delta = balls.iter().map(|b| b.1).sum::<f64>() + 1e-9;
                certs.insert(c.clone(), AdmissibleFamily { balls, delta });
            }
            let n_in = certs.values().map(|c| c.balls.len()).max().unwrap_or(0) as f64;
            let d_in = certs.values().map(|c| c.radius_sum()).fold(0.0, f64::max);
            let res = std::panic::catch_unwind(|| monotonize(&certs, &cells, p));
            match res {
                Ok(Ok(m)) => {
                    for (c, a) in &m {
                        let nb = a.balls.len() as f64;
                        let ok_faces = c.facets().iter().all(|f| {
                            m.get(f).is_none_or(|fa| fa.balls.iter().all(|b| a.balls.iter().any(|o| b.0.dist(o.0) + b.1 <= o.1 + 1e-12)))
                        });
                        if nb > cp * n_in || a.radius_sum() > cp * d_in + 1e-12 || !a.is_disjoint() || !ok_faces {
                            mono_bad += 1;
                        }
                        if n_in > 0.0 {
                            worst_profile = worst_profile.max(nb / (cp * n_in));
                        }
                    }
                }
                _ => mono_bad += 1,
            }
        }
    }
    out.metric("merge_violations", merge_bad as f64);
    out.metric("max_merge_ratio", worst_merge);
    out.metric("monotone_violations", mono_bad as f64);
    out.metric("max_profile_fraction", worst_profile);
    out.passed = merge_bad == 0 && mono_bad == 0;
    out.summary = format!(
        "1000 merges (max sum ratio {worst_merge:.3}), 200 monotonizations with c(1)={}, c(2)={}; {} violations",
        monotone_constant(1),
        monotone_constant(2),
        merge_bad + mono_bad
    );
    out
}

/// Whether the segment lies in the union of the balls, by exact interval
/// coverage.
fn segment_covered(a: Point, b: Point, balls: &[Ball]) -> bool {
    let mut iv: Vec<(f64, f64)> = Vec::new();
    for &(c, r) in balls {
        if let Ok(v) = Region::ball(c, r).clip_intervals(a, b) {
            iv.extend(v);
        }
    }
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let tol = 1e-9 / a.dist(b).max(1e-300);
    let mut reach = 0.0;
    for (lo, hi) in iv {
        if lo > reach + tol {
            return false;
        }
        reach = f64::max(reach, hi);
    }
    reach >= 1.0 - tol
}

fn chop_stability(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(4, "chopping stability");
    let res: Vec<(usize, usize)> = (0..200)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, &format!("chop/{i}"));
            let r = rng.random_range(0.1..0.3);
            let centers = cover_centers(&Region::unit_disk(), r, 2);
            let k = rng.random_range(4..=14);
            let tau = random_chain(&mut rng, k, 0.95);
            let m = rng.random_range(1..=3usize);
            let balls: Vec<Ball> = (0..m).map(|_| (in_disk(&mut rng, 0.8), rng.random_range(0.05..0.2))).collect();
            let outside = Region::intersect(balls.iter().map(|b| Region::ball(b.0, b.1).complement()).collect());
            let mut segs = match tau.restrict(&outside) {
                Ok(c) => c.segments().to_vec(),
                Err(_) => return (1, 0),
            };
            for b in &balls {
                for _ in 0..rng.random_range(0..4) {
                    let p = b.0 + in_disk(&mut rng, b.1 * 0.999);
                    let q = b.0 + in_disk(&mut rng, b.1 * 0.999);
                    segs.push((p, q));
                }
            }
            let tau2 = OneChain::new(2, segs);
            let grown: Vec<Ball> = balls.iter().map(|b| (b.0, b.1 + 4.0 * r)).collect();
            let mut bad = 0;
            let mut checked = 0;
            let (m1, m2) = (RadiusMemo::new(), RadiusMemo::new());
            let ls = [0, rng.random_range(0..=centers.len()), rng.random_range(0..=centers.len()), centers.len()];
            for &l in &ls {
                let d1 = crate::coarea::chop(&tau, l, &centers, &m1);
                let d2 = crate::coarea::chop(&tau2, l, &centers, &m2);
                match (d1, d2) {
                    (Ok(a), Ok(b)) => {
                        let diff = a.add(&b).reduce_collinear();
                        checked += 1;
                        if !diff.segments().iter().all(|&(p, q)| segment_covered(p, q, &grown)) {
                            bad += 1;
                        }
                    }
                    _ => bad += 1,
                }
            }
            (bad, checked)
        })
        .collect();
    let bad: usize = res.iter().map(|r| r.0).sum();
    let checked: usize = res.iter().map(|r| r.1).sum();
    out.metric("violations", bad as f64);
    out.metric("chops_compared", checked as f64);
    out.passed = bad == 0;
    out.summary = format!("200 pairs, {checked} chop levels compared, {bad} violations");
    out
}

/// One localization run: (originals, localized, b1, fitted C).
fn localize_case(p: usize, eps: f64, delta: f64, seed: u64) -> Result<(bool, bool, bool, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = rng.random_range(4..=10usize);
    let step = if p == 1 { 0.9 * eps } else { 0.45 * eps };
    let spec = GeneratorSpec { kind: FamilyKind::Drifting, points, clusters: rng.random_range(0..3), step };
    let f = generate_family(&spec, 2, &ComplexSpec { p, q: 1 }, seed)?;
    let out = localize_family(&f, &LocalizeParams::new(eps, delta))?;
    let q1 = out.report.q1 as i64;
    let originals = f.values.iter().all(|(v, z)| {
        let w: Vec<i64> = v.iter().map(|c| c * q1).collect();
        out.family.values.get(&w).is_some_and(|g| g.same(z))
    });
    let check = check_localized(&out.family, &out.certs)?;
    let localized = check.passed()
        && out.report.localization.passed()
        && out.report.localization.n <= out.report.declared_n
        && out.report.localization.delta_sum <= out.report.declared_delta;
    Ok((originals && out.report.originals_preserved, localized, out.report.b1_failures == 0, out.report.fitted_c))
}

fn localize_pipeline(seed: u64, tol: &Tolerances) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(5, "localization pipeline");
    let delta = 0.2;
    let mut fitted = Vec::new();
    let mut fails = [0usize; 4];
    for frac in [0.1, 0.01, 0.001] {
        let eps = frac * delta;
        let res: Vec<Result<(bool, bool, bool, f64)>> = (0..50)
            .into_par_iter()
            .map(|i| localize_case(1 + i % 2, eps, delta, task_seed(seed, &format!("localize/{i}"))))
            .collect();
        let mut c: f64 = 0.0;
        for r in res {
            match r {
                Ok((a, b, b1, fc)) => {
                    fails[0] += !a as usize;
                    fails[1] += !b as usize;
                    fails[2] += !b1 as usize;
                    c = c.max(fc);
                }
                Err(_) => fails[3] += 1,
            }
        }
        out.metric(format!("fitted_c@{frac}"), c);
        fitted.push(c);
    }
    let nonzero: Vec<f64> = fitted.iter().copied().filter(|&c| c > 0.0).collect();
    // Zero slack at every eps is the stable outcome C = 0.
    let stab = if nonzero.is_empty() { 1.0 } else { spread(&nonzero) };
    out.metric("fitted_c_spread", stab);
    for (k, name) in ["originals", "localized", "b1", "errors"].iter().enumerate() {
        out.metric(format!("{name}_failures"), fails[k] as f64);
    }
    out.passed = fails.iter().all(|&f| f == 0) && stab <= tol.stability;
    out.summary = format!(
        "50 families x 3 eps: failures originals={} localized={} b1={} errors={}; fitted C {:?} (spread {stab:.2})",
        fails[0], fails[1], fails[2], fails[3], fitted
    );
    out
}

fn bend_cancel(seed: u64, tol: &Tolerances) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(6, "bend-and-cancel bound");
    let ks = [8usize, 16, 32, 64, 128, 256];
    let rs = [0.25, 0.125, 0.0625];
    let l = 0.4;
    let mut bad = 0usize;
    let mut spreads = Vec::new();
    for n in [2usize, 3] {
        let jobs: Vec<(usize, f64)> = ks.iter().flat_map(|&k| rs.iter().map(move |&r| (k, r))).collect();
        let res: Vec<Result<(f64, bool)>> = jobs
            .par_iter()
            .map(|&(k, r)| {
                let s = task_seed(seed, &format!("bend/{n}/{k}"));
                let spec = GeneratorSpec { kind: FamilyKind::Drifting, points: k, clusters: 0, step: 0.05 };
                let f = generate_family(&spec, n, &ComplexSpec { p: 1, q: 2 }, s)?;
                let bc = bend_cancel_fill(&f, r, l, s)?;
                Ok((bc.report.fitted_c, bc.report.passed()))
            })
            .collect();
        let mut per_r: BTreeMap<usize, f64> = BTreeMap::new();
        for ((_, r), res) in jobs.iter().zip(res) {
            match res {
                Ok((c, ok)) => {
                    bad += !ok as usize;
                    let e = per_r.entry((1.0 / r) as usize).or_insert(0.0);
                    *e = e.max(c);
                }
                Err(_) => bad += 1,
            }
        }
        for (inv_r, c) in &per_r {
            out.metric(format!("fitted_c/n={n}/r=1/{inv_r}"), *c);
        }
        let s = spread(&per_r.values().copied().collect::<Vec<_>>());
        out.metric(format!("spread/n={n}"), s);
        spreads.push(s);
    }
    out.metric("boundary_failures", bad as f64);
    out.passed = bad == 0 && spreads.iter().all(|&s| s <= tol.stability);
    out.summary = format!("boundary failures {bad}; fitted C spread across r: n=2 {:.2}, n=3 {:.2}", spreads[0], spreads[1]);
    out
}

fn ff_law(seed: u64, tol: &Tolerances) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(7, "Federer-Fleming deformation law");
    let ks = [8usize, 16, 32, 64, 128, 256];
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, big_rs) in [(2usize, vec![4.0, 8.0, 16.0]), (3, vec![4.0, 8.0])] {
        let mut ds = Vec::new();
        let mut cs = Vec::new();
        for &big_r in &big_rs {
            let res: Vec<Result<(f64, f64)>> = ks
                .par_iter()
                .map(|&k| {
                    let s = task_seed(seed, &format!("ff/{n}/{big_r}/{k}"));
                    let grid = GridSkeleton::new(n, 1.0 / big_r)?;
                    let gp = pick_generic_point(&grid, 0.4, s)?;
                    let spec = GeneratorSpec { kind: FamilyKind::Static, points: k, clusters: 0, step: 0.0 };
                    let f = generate_family(&spec, n, &ComplexSpec { p: 0, q: 1 }, s)?;
                    let z = f.values.values().next().cloned().unwrap_or_else(|| ZeroChain::empty(n));
                    let rays = ray_fill(&z, &gp)?;
                    let mut last = Error::DegenerateCenter("unattempted".into());
                    for attempt in 0..5u64 {
                        match FfPush::new(grid.clone(), s.wrapping_add(attempt)).push(&rays) {
                            Ok((_, st)) => return Ok((st.fitted_d, st.max_displacement)),
                            Err(e) => last = e,
                        }
                    }
                    Err(last)
                })
                .collect();
            let (mut d, mut c) = (0.0f64, 0.0f64);
            for r in res {
                match r {
                    Ok((fd, disp)) => {
                        d = d.max(fd);
                        c = c.max(disp);
                    }
                    Err(_) => ok = false,
                }
            }
            out.metric(format!("fitted_d/n={n}/R={big_r}"), d);
            out.metric(format!("displacement/n={n}/R={big_r}"), c);
            ds.push(d);
            cs.push(c);
        }
        let (sd, sc) = (spread(&ds), spread(&cs));
        out.metric(format!("d_spread/n={n}"), sd);
        out.metric(format!("c_spread/n={n}"), sc);
        ok &= sd <= tol.stability && sc <= tol.stability;
        parts.push(format!("n={n}: D spread {sd:.2}, displacement spread {sc:.2}"));
    }
    out.passed = ok;
    out.summary = parts.join("; ");
    out
}

fn avoid_ball(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(8, "avoid-ball postconditions");
    let (l, delta) = (0.02, 0.05);
    let res: Vec<Result<(bool, usize, f64)>> = (0..50)
        .into_par_iter()
        .map(|i| {
            let (f, certs) = random_localized_family(1 + i % 2, delta, task_seed(seed, &format!("avoid/{i}")));
            let a = avoid_boundary_ball(&f, &certs, l, delta)?;
            Ok((a.report.passed(), a.report.max_mass_in_ball, a.report.mass_excess))
        })
        .collect();
    let mut bad = 0;
    let mut touched = 0;
    let mut worst = f64::NEG_INFINITY;
    for r in res {
        match r {
            Ok((ok, in_b, excess)) => {
                bad += !ok as usize;
                touched += (in_b > 0) as usize;
                worst = worst.max(excess);
            }
            Err(_) => bad += 1,
        }
    }
    out.metric("violations", bad as f64);
    out.metric("families_with_parity_point", touched as f64);
    out.metric("max_mass_excess", worst);
    out.passed = bad == 0;
    out.summary = format!("50 families, {bad} violations, max mass excess {worst}, {touched} keep a parity point at the pole");
    out
}

fn hyperplane(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(9, "hyperplane avoidance");
    let mut bad = 0usize;
    let mut parts = Vec::new();
    for n in [3usize, 4] {
        let est = match estimate_delta_n(n, 200, task_seed(seed, &format!("bisect/{n}"))) {
            Ok(e) => e,
            Err(_) => {
                bad += 1;
                continue;
            }
        };
        out.metric(format!("delta_n/n={n}"), est.delta_n);
        let misses: usize = (0..1000)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(seed, &format!("plane/{n}/{i}"));
                let shape = random_shape(n, &mut rng);
                let s = rng.random_range(0.0..est.delta_n);
                match find_avoiding_hyperplane(&shape.scaled(s), n, rng.random()) {
                    Ok(h) => (h.margin <= 0.0) as usize,
                    Err(_) => 1,
                }
            })
            .sum();
        out.metric(format!("not_found/n={n}"), misses as f64);
        bad += misses;
        parts.push(format!("n={n}: delta_n {:.3}, {misses} NotFound", est.delta_n));
    }
    let sk = skeleton_check(1000, task_seed(seed, "skeleton"));
    out.metric("skeleton_cut_cases", sk.cut as f64);
    out.metric("skeleton_violations", sk.violations as f64);
    out.passed = bad == 0 && sk.violations == 0;
    out.summary = format!("{}; skeleton {} cut cases, {} violations", parts.join("; "), sk.cut, sk.violations);
    out
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn parametric(seed: u64, tol: &Tolerances) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(10, "end-to-end parametric fill");
    let ps = [4usize, 16, 64];
    let seeds = 4u64;
    let dom = Domain::Polygon(TriangulatedPolygon::unit_square());
    let log_p: Vec<f64> = ps.iter().map(|&p| (p as f64).ln()).collect();
    let mut exact = true;
    let mut max_ratio: f64 = 0.0;
    let mut trend_ok = true;
    let mut parts = Vec::new();
    for m0 in [30usize, 100] {
        // Per seed: max ratio at each p, or None when the fill failed or
        // its boundary was not exact.
        let runs: Vec<Option<Vec<f64>>> = (0..seeds)
            .into_par_iter()
            .map(|s| {
                let fs = task_seed(seed, &format!("sweep/{m0}/{s}"));
                let f = sweepout_family(m0, 16, fs).ok()?;
                ps.iter()
                    .map(|&p| parametric_fill(&f, &dom, p, fs).ok().filter(|pf| pf.report.boundary_exact).map(|pf| pf.report.max_ratio))
                    .collect()
            })
            .collect();
        let mut slopes = Vec::new();
        for run in runs {
            match run {
                Some(ys) => {
                    max_ratio = max_ratio.max(ys.iter().copied().fold(0.0, f64::max));
                    for (p, y) in ps.iter().zip(&ys) {
                        let e = out.metrics.entry(format!("max_ratio/m0={m0}/p={p}")).or_insert(0.0);
                        *e = e.max(*y);
                    }
                    slopes.push(slope(&log_p, &ys.iter().map(|y| y.ln()).collect::<Vec<_>>()));
                }
                None => exact = false,
            }
        }
        if slopes.is_empty() {
            continue;
        }
        let k = slopes.len() as f64;
        let mean = slopes.iter().sum::<f64>() / k;
        let sd = (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0)).sqrt();
        out.metric(format!("log_slope/m0={m0}"), mean);
        out.metric(format!("log_slope_sd/m0={m0}"), sd);
        trend_ok &= mean <= tol.trend_noise * sd;
        parts.push(format!("m0={m0}: slope {mean:.3} (sd {sd:.3})"));
    }
    out.metric("max_ratio", max_ratio);
    out.passed = exact && max_ratio <= tol.parametric_ratio && trend_ok;
    out.summary = format!("dG = F exact: {exact}; max ratio {max_ratio:.3}; {}", parts.join("; "));
    out
}
