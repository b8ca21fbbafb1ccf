use super::index::CoverIndex;
use crate::chain::{cone_fill, regular_polygon, OneChain, TwoChain, ZeroChain};
use crate::coarea::{check_localized, cover_centers, merge_admissible, AdmissibleFamily, Ball, Certificates, LocalizationReport};
use crate::cubical::{refine_family, Cell, Vertex, VertexMap};
use crate::error::{Error, Result};
use crate::flat::{flat_norm, FlatMode};
use crate::geom::Point;
use crate::region::Region;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Growth constant of the one-parameter chopping construction.
pub const BASE_CASE_C: f64 = 18.0;

/// Sides of the polygonal chopping balls.
const POLYGON_SIDES: usize = 16;
/// Candidate circumradii tried per chopping ball.
const RADIUS_SAMPLES: usize = 256;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallFillReport {
    /// `witness`, `chop` or `cone`.
    pub path: String,
    pub q: u64,
    pub r: f64,
    pub cover_len: usize,
    pub eps_measured: f64,
    pub max_mass: f64,
    /// `max_mass / ((L / delta) eps)` with `delta = 2r`.
    pub measured_c: f64,
    pub c_bound: Option<f64>,
    pub boundary_ok: bool,
    pub localization: LocalizationReport,
}

/// A filling family `tau` on `X(q)` with `boundary(tau(y)) = F(nearest(y))`.
pub struct SmallFill {
    pub family: VertexMap<OneChain>,
    pub certs: Certificates,
    pub report: SmallFillReport,
}

/// Optimal filling of an even point set.
pub(crate) fn witness_fill(z: &ZeroChain, domain: &Region) -> Result<(OneChain, f64)> {
    if z.mass() % 2 == 1 {
        return Err(Error::OddParity(format!("{} points", z.mass())));
    }
    let w = flat_norm(z, domain, FlatMode::Absolute)?;
    let mut c = w.filling(z.dim());
    if !w.dropped.is_empty() {
        let extra = w.dropped.chunks(2).map(|p| (p[0], p[1])).collect();
        c = c.add(&OneChain::new(z.dim(), extra));
    }
    Ok((c, w.value))
}

/// Filling of `z` made of one optimal filling per ball of `cert`.
pub(crate) fn fill_in_balls(z: &ZeroChain, cert: &AdmissibleFamily, domain: &Region) -> Result<OneChain> {
    let mut groups: Vec<Vec<Point>> = vec![Vec::new(); cert.balls.len()];
    for &p in z.points() {
        let i = cert
            .balls
            .iter()
            .position(|(c, r)| p.dist(*c) <= r + crate::geom::eps_geom())
            .ok_or_else(|| Error::BadSpec(format!("difference point {p:?} outside its certificate")))?;
        groups[i].push(p);
    }
    let mut out = OneChain::empty(z.dim());
    for (i, g) in groups.into_iter().enumerate() {
        if g.is_empty() {
            continue;
        }
        if g.len() % 2 == 1 {
            return Err(Error::OddParity(format!("certificate ball {i} holds {} points", g.len())));
        }
        let zi = ZeroChain::new(z.dim(), g);
        let w = flat_norm(&zi, domain, FlatMode::Absolute)?;
        out = out.add(&w.filling(z.dim()));
        if !w.dropped.is_empty() {
            out = out.add(&cone_fill(&ZeroChain::new(z.dim(), w.dropped.clone()), cert.balls[i].0));
        }
    }
    Ok(out)
}

pub fn fill_small_family(f: &VertexMap<ZeroChain>, certs: &Certificates, domain: &Region, delta: f64) -> Result<SmallFill> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::BadSpec(format!("delta must be positive, got {delta}")));
    }
    let dim = f.values.values().map(|z| z.dim()).max().unwrap_or(2);
    let index = CoverIndex::new(cover_centers(domain, 0.5 * delta, dim));
    fill_small_with(f, certs, domain, &index)
}

pub(crate) fn fill_small_with(f: &VertexMap<ZeroChain>, certs: &Certificates, domain: &Region, index: &CoverIndex) -> Result<SmallFill> {
    let p = f.complex.dim();
    let dim = f.values.values().map(|z| z.dim()).max().unwrap_or(2);
    let mut out = if p == 0 {
        witness_family(f, domain)?
    } else if p == 1 && dim == 2 {
        chop_family(f, certs, domain, index)?
    } else if p <= 3 {
        cone_family(f, certs, domain)?
    } else {
        return Err(Error::DimUnsupported(format!("parameter dimension {p}")));
    };
    let target = refine_family(f, out.report.q);
    out.report.boundary_ok = out.family.values.iter().all(|(y, t)| t.boundary().same(target.get(y)));
    out.report.localization = check_localized(&out.family, &out.certs)?;
    out.report.max_mass = out.family.values.values().map(|t| t.mass()).fold(0.0, f64::max);
    out.report.r = index.r();
    out.report.cover_len = index.cover.len();
    let scale = (index.cover.len() as f64 / (2.0 * index.r())) * out.report.eps_measured;
    out.report.measured_c = if out.report.max_mass == 0.0 { 0.0 } else { out.report.max_mass / scale };
    Ok(out)
}

fn blank_report(path: &str, q: u64, eps: f64) -> SmallFillReport {
    SmallFillReport {
        path: path.into(),
        q,
        r: 0.0,
        cover_len: 0,
        eps_measured: eps,
        max_mass: 0.0,
        measured_c: 0.0,
        c_bound: None,
        boundary_ok: false,
        localization: LocalizationReport::default(),
    }
}

fn witness_family(f: &VertexMap<ZeroChain>, domain: &Region) -> Result<SmallFill> {
    let mut values = BTreeMap::new();
    let mut eps = 0.0f64;
    for (v, z) in &f.values {
        let (t, w) = witness_fill(z, domain)?;
        eps = eps.max(w);
        values.insert(v.clone(), t);
    }
    Ok(SmallFill {
        family: VertexMap::new(f.complex.clone(), values, "filling"),
        certs: Certificates::new(),
        report: blank_report("witness", 1, eps),
    })
}

/// Chopping of a planar two-chain by polygonal balls: successive
/// boundaries `base + boundary(sigma restricted to the balls so far)`, with
/// the ball used at each step.
fn chop_two_chain(base: &OneChain, eta: &OneChain, target: &OneChain, index: &CoverIndex) -> Result<(Vec<OneChain>, Vec<Ball>)> {
    let r = index.r();
    let mut rem = TwoChain::fill_cycle(eta);
    let mut active = BTreeSet::new();
    for t in rem.triangles() {
        let g = (t[0] + t[1] + t[2]) * (1.0 / 3.0);
        let reach = t.iter().map(|p| p.dist(g)).fold(0.0, f64::max) + 2.0 * r;
        active.extend(index.near(g, reach));
    }
    let mut states = vec![base.clone()];
    let mut balls = Vec::new();
    for l in active {
        if rem.triangles().is_empty() {
            break;
        }
        let x = index.center(l);
        let near = TwoChain::new(
            rem.triangles()
                .iter()
                .filter(|t| {
                    let g = (t[0] + t[1] + t[2]) * (1.0 / 3.0);
                    g.dist(x) < 2.0 * r + t.iter().map(|p| p.dist(g)).fold(0.0, f64::max)
                })
                .copied()
                .collect(),
        );
        if near.triangles().is_empty() {
            continue;
        }
        let s = polygon_radius(&near, x, r);
        let poly = regular_polygon(x, s, POLYGON_SIDES);
        let piece = rem.clip_convex(&poly, true);
        if piece.triangles().is_empty() {
            continue;
        }
        rem = rem.clip_convex(&poly, false);
        let next = states.last().expect("nonempty").add(&piece.boundary()).reduce_collinear();
        states.push(next);
        balls.push((x, s));
    }
    if rem.mass() > 1e-12 {
        return Err(Error::BadSpec(format!("chopping left area {} uncovered", rem.mass())));
    }
    let last = states.last().expect("nonempty");
    let gap = last.add(target).reduce_collinear().mass();
    if gap > 1e-6 {
        return Err(Error::BoundaryMismatch);
    }
    *states.last_mut().expect("nonempty") = target.clone();
    Ok((states, balls))
}

/// Circumradius in `(r / cos(pi / m), 2r)` whose polygon boundary meets the
/// chain in the least length.
fn polygon_radius(near: &TwoChain, x: Point, r: f64) -> f64 {
    let lo = r / (std::f64::consts::PI / POLYGON_SIDES as f64).cos();
    let hi = 2.0 * r;
    let mut best = (f64::INFINITY, lo);
    for k in 0..RADIUS_SAMPLES {
        let s = lo + (k as f64 + 0.5) * (hi - lo) / RADIUS_SAMPLES as f64;
        let poly = regular_polygon(x, s, POLYGON_SIDES);
        let cost: f64 = (0..poly.len()).map(|i| near.odd_length_on(poly[i], poly[(i + 1) % poly.len()])).sum();
        if cost < best.0 {
            best = (cost, s);
        }
    }
    best.1
}

struct EdgePlan {
    far: Vertex,
    states: Vec<OneChain>,
    balls: Vec<Ball>,
    jump: AdmissibleFamily,
}

fn chop_family(f: &VertexMap<ZeroChain>, certs: &Certificates, domain: &Region, index: &CoverIndex) -> Result<SmallFill> {
    let mut tau0 = BTreeMap::new();
    let mut eps = 0.0f64;
    for (v, z) in &f.values {
        let (t, w) = witness_fill(z, domain)?;
        eps = eps.max(w);
        tau0.insert(v.clone(), t);
    }
    let mut plans: BTreeMap<Cell, EdgePlan> = BTreeMap::new();
    for e in f.complex.cells_of_dim(1) {
        let vs = e.vertices();
        let (v, w) = (&vs[0], &vs[1]);
        let cert = certs.get(e).ok_or_else(|| Error::CertMissing(e.key()))?;
        let diff = f.get(v).add(f.get(w));
        eps = eps.max(flat_norm(&diff, domain, FlatMode::Absolute)?.value);
        let t = fill_in_balls(&diff, cert, domain)?;
        let a = tau0[w].add(&t).reduce_collinear();
        let eta = tau0[v].add(&a).reduce_collinear();
        let (states, balls) = chop_two_chain(&tau0[v], &eta, &a, index)?;
        plans.insert(e.clone(), EdgePlan { far: w.clone(), states, balls, jump: cert.clone() });
    }
    let h = plans.values().map(|p| p.balls.len()).max().unwrap_or(0).max(1);
    let qf = (2 * h + 1) as u64;
    let s = qf as i64;
    let complex = f.complex.refine(qf);
    let mut values = BTreeMap::new();
    for y in complex.vertices() {
        let (carrier, offset) = carrier_of(&y, s);
        let val = match offset {
            None => tau0[&carrier.anchor].clone(),
            Some(i) => {
                let plan = &plans[&carrier];
                if i <= h {
                    plan.states[i.min(plan.states.len() - 1)].clone()
                } else {
                    tau0[&plan.far].clone()
                }
            }
        };
        values.insert(y, val);
    }
    let mut out_certs = Certificates::new();
    for c in complex.cells_of_dim(1) {
        let (carrier, offset) = carrier_of(&c.anchor, s);
        let i = offset.unwrap_or(0);
        let carrier = if offset.is_some() { carrier } else { Cell::new(carrier.anchor, c.axes.clone()) };
        let plan = &plans[&carrier];
        let cert = if i < plan.balls.len() {
            AdmissibleFamily { balls: vec![plan.balls[i]], delta: 2.0 * plan.balls[i].1 }
        } else if i == h {
            plan.jump.clone()
        } else {
            AdmissibleFamily::default()
        };
        out_certs.insert(c.clone(), cert);
    }
    let mut report = blank_report("chop", qf, eps);
    report.c_bound = Some(BASE_CASE_C);
    Ok(SmallFill { family: VertexMap::new(complex, values, "filling"), certs: out_certs, report })
}

/// The coarse cell whose relative interior holds the refined vertex `y`
/// (one-dimensional carriers only carry their offset).
pub(crate) fn carrier_of(y: &[i64], s: i64) -> (Cell, Option<usize>) {
    let anchor: Vec<i64> = y.iter().map(|c| c.div_euclid(s)).collect();
    let axes: Vec<usize> = (0..y.len()).filter(|&i| y[i].rem_euclid(s) != 0).collect();
    let offset = if axes.len() == 1 { Some(y[axes[0]].rem_euclid(s) as usize) } else { None };
    (Cell::new(anchor, axes), offset)
}

fn cone_family(f: &VertexMap<ZeroChain>, certs: &Certificates, domain: &Region) -> Result<SmallFill> {
    let balls: Vec<Ball> = certs.values().flat_map(|c| c.balls.iter().copied()).collect();
    let u = merge_admissible(&balls)?;
    let verts = f.complex.vertices();
    let pos: BTreeMap<&Vertex, usize> = verts.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for c in f.complex.top_cells() {
        let vs = c.vertices();
        let a = find(&mut parent, pos[&vs[0]]);
        for v in &vs[1..] {
            let b = find(&mut parent, pos[v]);
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut eps = 0.0f64;
    let mut base_fill: BTreeMap<usize, OneChain> = BTreeMap::new();
    let mut values = BTreeMap::new();
    for (i, x) in verts.iter().enumerate() {
        let root = find(&mut parent, i);
        if let std::collections::btree_map::Entry::Vacant(slot) = base_fill.entry(root) {
            let (t, w) = witness_fill(f.get(&verts[root]), domain)?;
            eps = eps.max(w);
            slot.insert(t);
        }
        let diff = f.get(x).add(f.get(&verts[root]));
        let mut groups: Vec<Vec<Point>> = vec![Vec::new(); u.balls.len()];
        for &p in diff.points() {
            let k = u
                .balls
                .iter()
                .position(|(c, r)| p.dist(*c) <= r + crate::geom::eps_geom())
                .ok_or_else(|| Error::BadSpec(format!("vertex {x:?} differs outside every certificate")))?;
            groups[k].push(p);
        }
        let mut t = base_fill[&root].clone();
        for (k, g) in groups.into_iter().enumerate() {
            if g.len() % 2 == 1 {
                return Err(Error::OddParity(format!("vertex {x:?}, ball {k}")));
            }
            if !g.is_empty() {
                t = t.add(&cone_fill(&ZeroChain::new(diff.dim(), g), u.balls[k].0));
            }
        }
        values.insert(x.clone(), t);
    }
    let out_certs = f.complex.cells.iter().filter(|c| c.dim() > 0).map(|c| (c.clone(), u.clone())).collect();
    Ok(SmallFill {
        family: VertexMap::new(f.complex.clone(), values, "cone filling"),
        certs: out_certs,
        report: blank_report("cone", 1, eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::CubicalComplex;

    fn z(pts: &[(f64, f64)]) -> ZeroChain {
        ZeroChain::new(2, pts.iter().map(|&(x, y)| Point::new2(x, y)).collect())
    }

    #[test]
    fn empty_family_has_empty_filling() {
        let x = CubicalComplex::unit_cube(1, 1);
        let f = VertexMap::constant(x.clone(), ZeroChain::empty(2), "empty");
        let certs: Certificates = x.cells_of_dim(1).map(|c| (c.clone(), AdmissibleFamily::default())).collect();
        let out = fill_small_family(&f, &certs, &Region::unit_disk(), 0.2).unwrap();
        assert!(out.family.values.values().all(|t| t.is_empty()));
        assert!(out.report.boundary_ok && out.report.localization.passed());
    }

    #[test]
    fn single_vertex_pair_is_one_segment() {
        let x = CubicalComplex::new(2, 1, [Cell::new(vec![0, 0], vec![])]);
        let f = VertexMap::constant(x, z(&[(0.0, 0.0), (0.1, 0.0)]), "pair");
        let out = fill_small_family(&f, &Certificates::new(), &Region::unit_disk(), 0.2).unwrap();
        let t = out.family.get(&[0, 0]);
        assert_eq!(t.segments().len(), 1);
        assert!((t.mass() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn one_cell_of_nearby_pairs_chops() {
        let x = CubicalComplex::unit_cube(1, 1);
        let mut vals = BTreeMap::new();
        vals.insert(vec![0], z(&[(0.0, 0.0), (0.05, 0.0), (0.5, 0.5), (0.52, 0.5)]));
        vals.insert(vec![1], z(&[(0.0, 0.03), (0.05, 0.02), (0.5, 0.5), (0.52, 0.5)]));
        let f = VertexMap::new(x.clone(), vals, "pairs");
        let cert = AdmissibleFamily { balls: vec![(Point::new2(0.025, 0.015), 0.06)], delta: 0.2 };
        let certs: Certificates = x.cells_of_dim(1).map(|c| (c.clone(), cert.clone())).collect();
        let out = fill_small_family(&f, &certs, &Region::unit_disk(), 0.1).unwrap();
        assert_eq!(out.report.path, "chop");
        assert!(out.report.boundary_ok);
        assert!(out.report.localization.passed(), "{:?}", out.report.localization);
        assert!(out.report.measured_c <= BASE_CASE_C, "c = {}", out.report.measured_c);
    }

    #[test]
    fn odd_vertex_rejected() {
        let x = CubicalComplex::new(2, 1, [Cell::new(vec![0, 0], vec![])]);
        let f = VertexMap::constant(x, z(&[(0.0, 0.0)]), "odd");
        assert!(matches!(fill_small_family(&f, &Certificates::new(), &Region::unit_disk(), 0.2), Err(Error::OddParity(_))));
    }

    #[test]
    fn square_family_uses_cones() {
        let x = CubicalComplex::unit_cube(2, 2);
        let mut vals = BTreeMap::new();
        for v in x.vertices() {
            let dy = 0.01 * (v[0] + 2 * v[1]) as f64;
            vals.insert(v, z(&[(0.0, 0.0), (0.1, dy)]));
        }
        let f = VertexMap::new(x.clone(), vals, "square");
        let cert = AdmissibleFamily { balls: vec![(Point::new2(0.1, 0.015), 0.05)], delta: 0.2 };
        let certs: Certificates = x.cells.iter().filter(|c| c.dim() > 0).map(|c| (c.clone(), cert.clone())).collect();
        let out = fill_small_family(&f, &certs, &Region::unit_disk(), 0.2).unwrap();
        assert_eq!(out.report.path, "cone");
        assert!(out.report.boundary_ok && out.report.localization.passed());
    }
}
