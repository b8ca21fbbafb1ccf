//! Localized approximation of fine families of point cycles, filling of
//! small localized families, and splitting of fillings along convex cells.
//!
//! The interpolation keeps, at every produced parameter, the decomposition
//! `F'(x) = sum_D F(w_D(x)) restricted to D + I(x)` over the common
//! refinement of the vertex grids of a cell, with `I(x)` made of crossing
//! points of fillings with domain boundaries. Two-cells are handled by a
//! collar (domains switch to their lightest vertex level by level) and a
//! centre (the remaining difference is filled and chopped ball by ball);
//! both are verified state by state rather than materialized on the full
//! refined lattice.

mod edge;
mod fill_small;
mod index;
mod split;

pub use edge::{interpolate_edge, EdgeInterpolation};
pub use fill_small::{fill_small_family, SmallFill, SmallFillReport, BASE_CASE_C};
pub use index::CoverIndex;
pub use split::{split_filling, SplitFilling, SplitReport};

use crate::chain::{OneChain, Segment, ZeroChain};
use crate::coarea::{
    active_centers, check_localized, chop_steps, cover_centers, merge_admissible, select_radii_avoiding, AdmissibleFamily, Ball,
    Certificates, LocalizationReport, LocalizationViolation, RadiusMemo, SupportCheck,
};
use crate::cubical::{Cell, CubicalComplex, Vertex, VertexMap};
use crate::error::{Error, Result};
use crate::flat::{check_fineness, flat_distance, FlatMode};
use crate::geom::{line_sphere_params, Point};
use crate::region::Region;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// Largest accepted localization scale.
pub const DELTA_MAX: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizeParams {
    pub eps: f64,
    pub delta: f64,
    /// Largest parameter dimension accepted.
    pub dim_cap: usize,
}

impl LocalizeParams {
    pub fn new(eps: f64, delta: f64) -> LocalizeParams {
        LocalizeParams { eps, delta, dim_cap: 2 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LocalizeReport {
    pub p: usize,
    pub eps: f64,
    pub delta: f64,
    pub r: f64,
    pub cover_len: usize,
    pub q1: u64,
    pub declared_n: usize,
    pub declared_delta: f64,
    pub profile_ok: bool,
    pub originals_preserved: bool,
    pub states_checked: usize,
    pub b1_failures: usize,
    pub b2_failures: usize,
    pub localization: LocalizationReport,
    pub max_input_mass: usize,
    pub max_output_mass: usize,
    /// Largest `mass(F'(x)) - max_{v in C} mass(F(v))` over cells.
    pub slack: usize,
    /// `slack / ((L / delta) eps)`.
    pub fitted_c: f64,
    pub max_flat_step: f64,
    pub centre_levels: usize,
    pub centre_fill_q: u64,
    pub centre_fill_ok: bool,
    pub path: String,
}

impl LocalizeReport {
    /// Every checked property holds.
    pub fn passed(&self) -> bool {
        self.originals_preserved
            && self.b1_failures == 0
            && self.b2_failures == 0
            && self.localization.passed()
            && self.profile_ok
            && self.centre_fill_ok
    }
}

/// Output of `localize_family`: the family on the refined one-skeleton, its
/// per-edge certificates, and the report covering all cells.
pub struct Localized {
    pub family: VertexMap<ZeroChain>,
    pub certs: Certificates,
    pub report: LocalizeReport,
}

type Label = Vec<u32>;

/// Labelled pieces of a segment and the label changes along it.
type Split = (Vec<(Segment, Label)>, Vec<(Point, Label, Label)>);

/// Domains of the common refinement of the grids at the vertices of one
/// cell, with the restrictions of the vertex values and pair fillings.
struct CellData {
    verts: Vec<Vertex>,
    doms: Vec<Label>,
    /// `[vertex][domain]`.
    fpart: Vec<Vec<ZeroChain>>,
    /// Boundary of each pair filling restricted to each domain.
    bd: BTreeMap<(usize, usize), Vec<ZeroChain>>,
    /// Crossings of each pair filling with each domain boundary.
    cross: BTreeMap<(usize, usize), Vec<ZeroChain>>,
    /// Vertex of least restricted mass per domain (lowest index on ties).
    best: Vec<usize>,
    balls: Vec<Ball>,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn sum_points<'a>(parts: impl Iterator<Item = &'a ZeroChain>) -> ZeroChain {
    let pts: Vec<Point> = parts.flat_map(|z| z.points().iter().copied()).collect();
    ZeroChain::new(2, pts)
}

struct Ctx<'a> {
    f: &'a VertexMap<ZeroChain>,
    taus: BTreeMap<(Vertex, Vertex), OneChain>,
    radii: BTreeMap<Vertex, Vec<f64>>,
    index: CoverIndex,
    domain: Region,
}

impl Ctx<'_> {
    fn label(&self, grids: &[&[f64]], p: Point) -> Result<Label> {
        let near = self.index.near(p, 2.0 * self.index.r());
        grids
            .iter()
            .map(|g| {
                near.iter()
                    .find(|&&l| p.dist(self.index.center(l)) <= g[l])
                    .map(|&l| l as u32)
                    .ok_or_else(|| Error::BadSpec(format!("point {p:?} outside the cover")))
            })
            .collect()
    }

    /// Pieces of a segment with constant label, and the crossing points
    /// between consecutive pieces of different labels.
    fn split(&self, grids: &[&[f64]], a: Point, b: Point) -> Result<Split> {
        let cand = self.index.near_segment(a, b, 2.0 * self.index.r());
        let mut ts = vec![0.0, 1.0];
        for g in grids {
            for &l in &cand {
                if let Some((t0, t1)) = line_sphere_params(a, b, self.index.center(l), g[l]) {
                    ts.extend([t0, t1].into_iter().filter(|t| *t > 1e-12 && *t < 1.0 - 1e-12));
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
        let at = |t: f64| if t == 0.0 { a } else if t == 1.0 { b } else { a.lerp(b, t) };
        let mut pieces: Vec<(f64, f64, Label)> = Vec::new();
        for w in ts.windows(2) {
            let lab = self.label(grids, at(0.5 * (w[0] + w[1])))?;
            match pieces.last_mut() {
                Some(last) if last.2 == lab => last.1 = w[1],
                _ => pieces.push((w[0], w[1], lab)),
            }
        }
        let mut cross = Vec::new();
        for w in pieces.windows(2) {
            cross.push((at(w[0].1), w[0].2.clone(), w[1].2.clone()));
        }
        Ok((pieces.into_iter().map(|(t0, t1, l)| ((at(t0), at(t1)), l)).collect(), cross))
    }

    fn cell_data(&self, cell: &Cell) -> Result<CellData> {
        let mut verts = cell.vertices();
        verts.sort();
        let nv = verts.len();
        let grids: Vec<&[f64]> = verts.iter().map(|v| self.radii[v].as_slice()).collect();
        let mut fpts: BTreeMap<Label, Vec<Vec<Point>>> = BTreeMap::new();
        for (i, v) in verts.iter().enumerate() {
            for &p in self.f.get(v).points() {
                fpts.entry(self.label(&grids, p)?).or_insert_with(|| vec![Vec::new(); nv])[i].push(p);
            }
        }
        let mut ends: BTreeMap<((usize, usize), Label), Vec<Point>> = BTreeMap::new();
        let mut crossings: BTreeMap<((usize, usize), Label), Vec<Point>> = BTreeMap::new();
        let mut labels: BTreeSet<Label> = fpts.keys().cloned().collect();
        for i in 0..nv {
            for j in i + 1..nv {
                let tau = &self.taus[&(verts[i].clone(), verts[j].clone())];
                for &(a, b) in tau.segments() {
                    let (pieces, cr) = self.split(&grids, a, b)?;
                    for ((p0, p1), lab) in pieces {
                        labels.insert(lab.clone());
                        ends.entry(((i, j), lab)).or_default().extend([p0, p1]);
                    }
                    for (x, l1, l2) in cr {
                        crossings.entry(((i, j), l1)).or_default().push(x);
                        crossings.entry(((i, j), l2)).or_default().push(x);
                    }
                }
            }
        }
        let doms: Vec<Label> = labels.into_iter().collect();
        let m = doms.len();
        let mut fpart = vec![vec![ZeroChain::empty(2); m]; nv];
        for (d, lab) in doms.iter().enumerate() {
            if let Some(ps) = fpts.get(lab) {
                for i in 0..nv {
                    fpart[i][d] = ZeroChain::new(2, ps[i].clone());
                }
            }
        }
        let mut bd = BTreeMap::new();
        let mut cross = BTreeMap::new();
        for i in 0..nv {
            for j in i + 1..nv {
                let mk = |src: &BTreeMap<((usize, usize), Label), Vec<Point>>| -> Vec<ZeroChain> {
                    doms.iter()
                        .map(|lab| ZeroChain::new(2, src.get(&((i, j), lab.clone())).cloned().unwrap_or_default()))
                        .collect()
                };
                bd.insert((i, j), mk(&ends));
                cross.insert((i, j), mk(&crossings));
            }
        }
        let best = (0..m)
            .map(|d| (0..nv).min_by_key(|&i| (fpart[i][d].mass(), i)).expect("vertices"))
            .collect();
        let balls = doms.iter().map(|lab| (self.index.center(lab[0] as usize), grids[0][lab[0] as usize])).collect();
        Ok(CellData { verts, doms, fpart, bd, cross, best, balls })
    }
}

struct EdgeStage {
    data: CellData,
    q1: usize,
    values: Vec<ZeroChain>,
    ivals: Vec<ZeroChain>,
}

impl EdgeStage {
    /// Vertex (0 or 1) used at offset `i` by a domain of the given rank
    /// whose lighter vertex is `best`.
    fn choice_at(&self, i: usize, rank: usize, best: usize) -> usize {
        if rank < i.min(self.q1 - i) {
            best
        } else if 2 * i <= self.q1 {
            0
        } else {
            1
        }
    }

    fn choice(&self, i: usize, d: usize) -> usize {
        self.choice_at(i, d, self.data.best[d])
    }

    fn changed(&self, i: usize, j: usize) -> Vec<usize> {
        (0..self.data.doms.len()).filter(|&d| self.choice(i, d) != self.choice(j, d)).collect()
    }
}

#[derive(Default)]
struct Tally {
    states: usize,
    b1: usize,
    b2: usize,
    max_mass: usize,
    slack: usize,
    max_flat: f64,
    violations: Vec<LocalizationViolation>,
    n: usize,
    delta_sum: f64,
}

impl Tally {
    fn cert(&mut self, cert: &AdmissibleFamily) {
        self.n = self.n.max(cert.balls.len());
        self.delta_sum = self.delta_sum.max(cert.radius_sum());
    }

    fn check_pair(&mut self, a: &ZeroChain, b: &ZeroChain, cert: &AdmissibleFamily, cell: &str, domain: &Region) -> Result<()> {
        if a == b {
            return Ok(());
        }
        if let Some(p) = a.escape(b, cert)? {
            self.violations.push(LocalizationViolation { cell: cell.to_string(), x: vec![], y: vec![], witness: Some(p) });
        }
        self.max_flat = self.max_flat.max(flat_distance(a, b, domain, FlatMode::Absolute)?.value);
        Ok(())
    }
}

fn build_edge(ctx: &Ctx, cell: &Cell, data: CellData, q1: usize, tally: &mut Tally) -> EdgeStage {
    let m = data.doms.len();
    let mut st = EdgeStage { data, q1, values: Vec::new(), ivals: Vec::new() };
    let cap = st.data.verts.iter().map(|v| ctx.f.get(v).mass()).max().unwrap_or(0);
    for i in 0..=q1 {
        let ch: Vec<usize> = (0..m).map(|d| st.choice(i, d)).collect();
        let sw: Vec<usize> = (0..m).filter(|&d| ch[d] == 1).collect();
        let value = ctx.f.get(&st.data.verts[0]).add(&sum_points(sw.iter().map(|&d| &st.data.bd[&(0, 1)][d])));
        let ival = sum_points(sw.iter().map(|&d| &st.data.cross[&(0, 1)][d]));
        let recon = sum_points((0..m).map(|d| &st.data.fpart[ch[d]][d])).add(&ival);
        let light: usize = (0..m).map(|d| st.data.fpart[ch[d]][d].mass()).sum();
        tally.states += 1;
        if !recon.same(&value) {
            tally.b1 += 1;
        }
        if light > cap {
            tally.b2 += 1;
        }
        tally.max_mass = tally.max_mass.max(value.mass());
        tally.slack = tally.slack.max(value.mass().saturating_sub(cap));
        st.values.push(value);
        st.ivals.push(ival);
    }
    let _ = cell;
    st
}

/// Where a face domain sits in the grid of one of its edges: inside an
/// active edge domain, or in a part the edge does not see, which gets a
/// rank of its own after the edge's domains so that such domains switch
/// one at a time.
#[derive(Clone, Copy)]
enum Proj {
    Edge(usize),
    Unseen(usize),
}

/// The collar and centre of one two-cell.
struct Face<'a> {
    data: CellData,
    edges: Vec<&'a EdgeStage>,
    /// Face vertex index of each edge vertex, per facet.
    emap: Vec<[usize; 2]>,
    /// Edge domain of each face domain, per facet.
    proj: Vec<Vec<Proj>>,
    q1: usize,
    cache: HashMap<(usize, usize, usize), ZeroChain>,
}

impl Face<'_> {
    fn facet_of(&self, s: usize, t: usize) -> (usize, usize) {
        let q1 = self.q1;
        if s == 0 {
            (0, t)
        } else if s == q1 {
            (1, t)
        } else if t == 0 {
            (2, s)
        } else {
            debug_assert_eq!(t, q1);
            (3, s)
        }
    }

    fn on_facet(&self, f: usize, s: usize, t: usize) -> Option<usize> {
        let q1 = self.q1;
        match f {
            0 if s == 0 => Some(t),
            1 if s == q1 => Some(t),
            2 if t == 0 => Some(s),
            3 if t == q1 => Some(s),
            _ => None,
        }
    }

    fn boundary_choice(&self, f: usize, i: usize, d: usize) -> usize {
        let e = self.edges[f];
        let k = match self.proj[f][d] {
            Proj::Edge(x) => e.choice(i, x),
            Proj::Unseen(rank) => e.choice_at(i, rank, 0),
        };
        self.emap[f][k]
    }

    /// Collar value at boundary point `(s, t)` of the centre square with the
    /// first `lv` domains switched to their lightest vertex.
    fn state(&mut self, s: usize, t: usize, lv: usize, cap: usize, tally: &mut Tally) -> ZeroChain {
        if let Some(z) = self.cache.get(&(s, t, lv)) {
            return z.clone();
        }
        let (f, i) = self.facet_of(s, t);
        let m = self.data.doms.len();
        let wd: Vec<usize> = (0..m).map(|d| self.boundary_choice(f, i, d)).collect();
        let mut add = Vec::new();
        let mut crs = Vec::new();
        for d in 0..lv.min(m) {
            let (a, b) = (wd[d], self.data.best[d]);
            if a != b {
                add.push(&self.data.bd[&pair(a, b)][d]);
                crs.push(&self.data.cross[&pair(a, b)][d]);
            }
        }
        let value = self.edges[f].values[i].add(&sum_points(add.into_iter()));
        let ival = self.edges[f].ivals[i].add(&sum_points(crs.into_iter()));
        let wbar: Vec<usize> = (0..m).map(|d| if d < lv { self.data.best[d] } else { wd[d] }).collect();
        let recon = sum_points((0..m).map(|d| &self.data.fpart[wbar[d]][d])).add(&ival);
        let light: usize = (0..m).map(|d| self.data.fpart[wbar[d]][d].mass()).sum();
        tally.states += 1;
        if !recon.same(&value) {
            tally.b1 += 1;
        }
        if light > cap {
            tally.b2 += 1;
        }
        tally.max_mass = tally.max_mass.max(value.mass());
        tally.slack = tally.slack.max(value.mass().saturating_sub(cap));
        self.cache.insert((s, t, lv), value.clone());
        value
    }

    /// Balls of the domains that change between the given states.
    fn cert(&self, keys: &[(usize, usize, usize)]) -> Result<AdmissibleFamily> {
        let m = self.data.doms.len();
        let f = (0..4)
            .find(|&f| keys.iter().all(|&(s, t, _)| self.on_facet(f, s, t).is_some()))
            .expect("collar states share a facet");
        let pos: Vec<usize> = keys.iter().map(|&(s, t, _)| self.on_facet(f, s, t).expect("on facet")).collect();
        let mut balls = Vec::new();
        let edge = self.edges[f];
        for e in 0..edge.data.doms.len() {
            if pos.iter().any(|&i| edge.choice(i, e) != edge.choice(pos[0], e)) {
                balls.push(edge.data.balls[e]);
            }
        }
        for d in 0..m {
            let incl = keys.iter().any(|k| (d < k.2) != (d < keys[0].2));
            let wd_moves = matches!(self.proj[f][d], Proj::Unseen(_))
                && pos.iter().any(|&i| self.boundary_choice(f, i, d) != self.boundary_choice(f, pos[0], d));
            if incl || wd_moves {
                balls.push(self.data.balls[d]);
            }
        }
        merge_admissible(&balls)
    }
}

/// Positions around the boundary of `[0, n]^2`, counter-clockwise from the
/// origin.
fn ring(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(4 * n);
    out.extend((0..n).map(|s| (s, 0)));
    out.extend((0..n).map(|t| (n, t)));
    out.extend((0..n).map(|s| (n - s, n)));
    out.extend((0..n).map(|t| (0, n - t)));
    out
}

fn ring_edge(a: (usize, usize), b: (usize, usize)) -> Cell {
    let lo = vec![a.0.min(b.0) as i64, a.1.min(b.1) as i64];
    let axis = if a.0 != b.0 { 0 } else { 1 };
    Cell::new(lo, vec![axis])
}

fn enlarge(cert: &AdmissibleFamily, by: f64, extra: Option<Ball>) -> Result<AdmissibleFamily> {
    let mut balls: Vec<Ball> = cert.balls.iter().map(|&(c, r)| (c, r + by)).collect();
    balls.extend(extra);
    merge_admissible(&balls)
}

fn check_face(ctx: &Ctx, cell: &Cell, face: &mut Face, tally: &mut Tally) -> Result<(usize, u64, bool)> {
    let q1 = face.q1;
    let m = face.data.doms.len();
    let cap = face.data.verts.iter().map(|v| ctx.f.get(v).mass()).max().unwrap_or(0);
    let key = cell.key();
    // Collar.
    let qb = 3 * q1;
    let squeeze = |k: usize| k.saturating_sub(q1).min(q1);
    let lvl = |a: usize, b: usize| a.min(qb - a).min(b).min(qb - b).min(m);
    let mut seen: HashSet<Vec<(usize, usize, usize)>> = HashSet::new();
    for a in 0..qb {
        for b in 0..qb {
            if a >= q1 && a < 2 * q1 && b >= q1 && b < 2 * q1 {
                continue;
            }
            let mut keys: Vec<(usize, usize, usize)> =
                [(a, b), (a + 1, b), (a, b + 1), (a + 1, b + 1)].iter().map(|&(x, y)| (squeeze(x), squeeze(y), lvl(x, y))).collect();
            keys.sort();
            keys.dedup();
            if keys.len() < 2 || !seen.insert(keys.clone()) {
                continue;
            }
            let vals: Vec<ZeroChain> = keys.iter().map(|&(s, t, l)| face.state(s, t, l, cap, tally)).collect();
            let cert = face.cert(&keys)?;
            tally.cert(&cert);
            for i in 0..vals.len() {
                for j in i + 1..vals.len() {
                    tally.check_pair(&vals[i], &vals[j], &cert, &format!("{key}:collar"), &ctx.domain)?;
                }
            }
        }
    }
    // Centre: z_C and the loop of differences around it.
    let zc = ctx.f.get(&face.data.verts[0]).add(&sum_points(
        (0..m).filter(|&d| face.data.best[d] != 0).map(|d| &face.data.bd[&(0, face.data.best[d])][d]),
    ));
    let ic = sum_points((0..m).filter(|&d| face.data.best[d] != 0).map(|d| &face.data.cross[&(0, face.data.best[d])][d]));
    tally.states += 1;
    if !sum_points((0..m).map(|d| &face.data.fpart[face.data.best[d]][d])).add(&ic).same(&zc) {
        tally.b1 += 1;
    }
    let pos = ring(q1);
    let mut loop_vals = BTreeMap::new();
    let mut loop_cells = Vec::new();
    let mut loop_certs = Certificates::new();
    for (k, &(s, t)) in pos.iter().enumerate() {
        let v = face.state(s, t, m, cap, tally).add(&zc);
        loop_vals.insert(vec![s as i64, t as i64], v);
        let nxt = pos[(k + 1) % pos.len()];
        let c = ring_edge((s, t), nxt);
        loop_certs.insert(c.clone(), face.cert(&[(s, t, m), (nxt.0, nxt.1, m)])?);
        loop_cells.push(c);
    }
    let loop_family = VertexMap::new(CubicalComplex::new(2, q1 as u64, loop_cells), loop_vals, "centre loop");
    let fill = fill_small::fill_small_with(&loop_family, &loop_certs, &ctx.domain, &ctx.index)?;
    let fill_ok = fill.report.boundary_ok && fill.report.localization.passed();
    let qf = fill.report.q as usize;
    let fine = ring(q1 * qf);
    let taus: Vec<&OneChain> = fine.iter().map(|&(s, t)| fill.family.get(&[s as i64, t as i64])).collect();
    let mut distinct: Vec<&OneChain> = Vec::new();
    let mut id_of = Vec::with_capacity(taus.len());
    for t in &taus {
        let id = match distinct.iter().position(|d| *d == *t) {
            Some(i) => i,
            None => {
                distinct.push(t);
                distinct.len() - 1
            }
        };
        id_of.push(id);
    }
    let active: Vec<usize> = {
        let mut set = BTreeSet::new();
        for t in &distinct {
            set.extend(active_centers(t, &ctx.index.cover));
        }
        set.into_iter().collect()
    };
    let memo = RadiusMemo::new();
    let r = ctx.index.r();
    let mut levels: Vec<Vec<ZeroChain>> = Vec::with_capacity(distinct.len());
    for t in &distinct {
        let steps = chop_steps(t, &active, &ctx.index.cover, &memo)?;
        let mut row = vec![zc.add(&t.boundary())];
        row.extend(steps.iter().map(|(_, c)| zc.add(&c.boundary())));
        for z in &row {
            tally.max_mass = tally.max_mass.max(z.mass());
            tally.slack = tally.slack.max(z.mass().saturating_sub(cap));
        }
        tally.states += row.len();
        levels.push(row);
    }
    let kmax = active.len();
    for (j, row) in levels.iter().enumerate() {
        for k in 0..kmax {
            if row[k] != row[k + 1] {
                let cert = AdmissibleFamily { balls: vec![(ctx.index.center(active[k]), 2.0 * r)], delta: 2.0 * r };
                tally.cert(&cert);
                tally.check_pair(&row[k], &row[k + 1], &cert, &format!("{key}:centre/{j}"), &ctx.domain)?;
            }
        }
    }
    let mut done = HashSet::new();
    for k in 0..fine.len() {
        let (a, b) = (id_of[k], id_of[(k + 1) % fine.len()]);
        if a == b || !done.insert((a.min(b), a.max(b))) {
            continue;
        }
        let (y0, y1) = (fine[k], fine[(k + 1) % fine.len()]);
        let u = &fill.certs[&ring_edge(y0, y1)];
        let (ra, rb) = (&levels[a], &levels[b]);
        let label = format!("{key}:centre/{a}-{b}");
        let flat_cert = enlarge(u, 4.0 * r, None)?;
        tally.cert(&flat_cert);
        tally.check_pair(&ra[0], &rb[0], &flat_cert, &label, &ctx.domain)?;
        for kk in 0..kmax {
            let moves = ra[kk] != ra[kk + 1] || rb[kk] != rb[kk + 1];
            if !moves {
                continue;
            }
            let cert = enlarge(u, 4.0 * r, Some((ctx.index.center(active[kk]), 2.0 * r)))?;
            tally.cert(&cert);
            tally.check_pair(&ra[kk + 1], &rb[kk + 1], &cert, &label, &ctx.domain)?;
            tally.check_pair(&ra[kk], &rb[kk + 1], &cert, &label, &ctx.domain)?;
            tally.check_pair(&ra[kk + 1], &rb[kk], &cert, &label, &ctx.domain)?;
        }
    }
    Ok((kmax, qf as u64, fill_ok))
}

/// Replace an eps-fine family of point cycles in the unit disk by a
/// delta-localized one on a refinement, agreeing with it on the original
/// vertices.
pub fn localize_family(f: &VertexMap<ZeroChain>, params: &LocalizeParams) -> Result<Localized> {
    let domain = Region::unit_disk();
    let p = f.complex.dim();
    let dim = f.values.values().map(|z| z.dim()).max().unwrap_or(2);
    if dim != 2 {
        return Err(Error::DimUnsupported(format!("ambient dimension {dim}")));
    }
    if p > params.dim_cap.min(2) {
        return Err(Error::DimUnsupported(format!("parameter dimension {p}")));
    }
    if !(params.delta > 0.0 && params.eps > 0.0) {
        return Err(Error::BadSpec("eps and delta must be positive".into()));
    }
    if params.delta > DELTA_MAX {
        return Err(Error::DeltaTooLarge { delta: params.delta, limit: DELTA_MAX });
    }
    let fine = check_fineness(f, params.eps, &domain, FlatMode::Absolute)?;
    if let Some(v) = fine.violations.first() {
        return Err(Error::NotFine { eps: params.eps, found: fine.max_flat, cell: v.cell.clone() });
    }
    let max_input_mass = f.values.values().map(|z| z.mass()).max().unwrap_or(0);
    let (declared_n, r) = if p <= 1 { (1, params.delta / 4.0) } else { (3, params.delta / 16.0) };
    let mut report = LocalizeReport {
        p,
        eps: params.eps,
        delta: params.delta,
        r,
        declared_n,
        declared_delta: params.delta,
        max_input_mass,
        max_output_mass: max_input_mass,
        originals_preserved: true,
        centre_fill_ok: true,
        path: if p == 2 { "edges+collar+centre".into() } else { "edges".into() },
        ..Default::default()
    };
    if p == 0 {
        report.q1 = 1;
        report.profile_ok = true;
        return Ok(Localized { family: f.clone(), certs: Certificates::new(), report });
    }

    let mut taus = BTreeMap::new();
    let mut adj: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
    for c in f.complex.top_cells() {
        let mut vs = c.vertices();
        vs.sort();
        for i in 0..vs.len() {
            adj.entry(vs[i].clone()).or_default().extend(vs.iter().cloned());
            for j in i + 1..vs.len() {
                let k = (vs[i].clone(), vs[j].clone());
                if taus.contains_key(&k) {
                    continue;
                }
                let w = flat_distance(f.get(&vs[i]), f.get(&vs[j]), &domain, FlatMode::Absolute)?;
                if !w.dropped.is_empty() {
                    return Err(Error::OddParity(format!("difference of {:?} and {:?}", vs[i], vs[j])));
                }
                taus.insert(k, w.filling(2));
            }
        }
    }
    let index = CoverIndex::new(cover_centers(&domain, r, 2));
    report.cover_len = index.cover.len();
    let mut radii = BTreeMap::new();
    for (v, nb) in &adj {
        let chains: Vec<OneChain> =
            taus.iter().filter(|((a, b), _)| nb.contains(a) && nb.contains(b)).map(|(_, t)| t.clone()).collect();
        let avoid: Vec<Point> = nb.iter().flat_map(|w| f.get(w).points().iter().copied()).collect();
        radii.insert(v.clone(), select_radii_avoiding(&index.cover, &chains, chains.len().max(1), &avoid)?);
    }
    let ctx = Ctx { f, taus, radii, index, domain };

    let mut edge_data = BTreeMap::new();
    let mut face_data = BTreeMap::new();
    let mut widest = 1;
    for c in f.complex.cells.iter() {
        match c.dim() {
            1 => {
                let d = ctx.cell_data(c)?;
                widest = widest.max(d.doms.len());
                edge_data.insert(c.clone(), d);
            }
            2 => {
                let d = ctx.cell_data(c)?;
                widest = widest.max(d.doms.len());
                face_data.insert(c.clone(), d);
            }
            _ => {}
        }
    }
    let q1 = {
        let q = 3 * widest;
        if q % 2 == 0 {
            q + 1
        } else {
            q
        }
    };
    report.q1 = q1 as u64;
    let mut tally = Tally::default();
    let mut edges = BTreeMap::new();
    for (c, d) in edge_data {
        let st = build_edge(&ctx, &c, d, q1, &mut tally);
        edges.insert(c, st);
    }

    // The family on the refined one-skeleton.
    let s = q1 as i64;
    let complex = f.complex.skeleton(1).refine(q1 as u64);
    let mut values = BTreeMap::new();
    let mut certs = Certificates::new();
    for (c, st) in &edges {
        let axis = c.axes[0];
        for i in 0..=q1 {
            let mut y: Vertex = c.anchor.iter().map(|a| a * s).collect();
            y[axis] += i as i64;
            let val = if i == 0 || i == q1 {
                let orig = &st.data.verts[i / q1];
                if !st.values[i].same(f.get(orig)) {
                    report.originals_preserved = false;
                }
                f.get(orig).clone()
            } else {
                st.values[i].clone()
            };
            values.insert(y.clone(), val);
            if i < q1 {
                let balls: Vec<Ball> = st.changed(i, i + 1).into_iter().map(|d| st.data.balls[d]).collect();
                let cert = merge_admissible(&balls)?;
                tally.max_flat = tally.max_flat.max(flat_distance(&st.values[i], &st.values[i + 1], &ctx.domain, FlatMode::Absolute)?.value);
                certs.insert(Cell::new(y, vec![axis]), cert);
            }
        }
    }
    for v in f.complex.vertices() {
        let y: Vertex = v.iter().map(|a| a * s).collect();
        values.entry(y).or_insert_with(|| f.get(&v).clone());
    }
    let family = VertexMap::new(complex, values, &format!("localized {}", f.provenance));
    let mut loc = check_localized(&family, &certs)?;

    for (c, d) in face_data {
        let mut emap = Vec::new();
        let mut proj = Vec::new();
        let mut stages = Vec::new();
        for fc in c.facets() {
            let st = &edges[&fc];
            let map = [0, 1].map(|k| d.verts.iter().position(|v| *v == st.data.verts[k]).expect("facet vertex"));
            let mut unseen = st.data.doms.len();
            proj.push(
                d.doms
                    .iter()
                    .map(|lab| {
                        let el: Label = vec![lab[map[0]], lab[map[1]]];
                        match st.data.doms.binary_search(&el) {
                            Ok(e) => Proj::Edge(e),
                            Err(_) => {
                                unseen += 1;
                                Proj::Unseen(unseen - 1)
                            }
                        }
                    })
                    .collect(),
            );
            emap.push(map);
            stages.push(st);
        }
        let mut face = Face { data: d, edges: stages, emap, proj, q1, cache: HashMap::new() };
        let (levels, qf, ok) = check_face(&ctx, &c, &mut face, &mut tally)?;
        report.centre_levels = report.centre_levels.max(levels);
        report.centre_fill_q = report.centre_fill_q.max(qf);
        report.centre_fill_ok &= ok;
    }

    loc.n = loc.n.max(tally.n);
    loc.delta_sum = loc.delta_sum.max(tally.delta_sum);
    loc.violations.extend(tally.violations);
    report.profile_ok = loc.n <= declared_n && loc.delta_sum < params.delta;
    report.localization = loc;
    report.states_checked = tally.states;
    report.b1_failures = tally.b1;
    report.b2_failures = tally.b2;
    report.max_output_mass = tally.max_mass.max(max_input_mass);
    report.slack = tally.slack;
    report.max_flat_step = tally.max_flat;
    let scale = report.cover_len as f64 / params.delta * params.eps;
    report.fitted_c = report.slack as f64 / scale;
    Ok(Localized { family, certs, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(pts: &[(f64, f64)]) -> ZeroChain {
        ZeroChain::new(2, pts.iter().map(|&(x, y)| Point::new2(x, y)).collect())
    }

    fn edge_family(a: ZeroChain, b: ZeroChain) -> VertexMap<ZeroChain> {
        let x = CubicalComplex::unit_cube(1, 1);
        let vals = [(vec![0], a), (vec![1], b)].into_iter().collect();
        VertexMap::new(x, vals, "edge")
    }

    #[test]
    fn constant_family_stays_constant() {
        let a = z(&[(0.1, 0.2), (0.3, -0.4), (-0.5, 0.1), (0.0, 0.0)]);
        let f = edge_family(a.clone(), a.clone());
        let out = localize_family(&f, &LocalizeParams::new(0.01, 0.2)).unwrap();
        assert!(out.report.passed());
        assert_eq!(out.report.slack, 0);
        assert!(out.family.values.values().all(|v| v.same(&a)));
    }

    #[test]
    fn one_moved_point_swaps_in_one_domain() {
        let a = z(&[(0.1, 0.2), (0.3, -0.4)]);
        let b = z(&[(0.15, 0.2), (0.3, -0.4)]);
        let f = edge_family(a.clone(), b.clone());
        let out = localize_family(&f, &LocalizeParams::new(0.05 + 1e-12, 0.2)).unwrap();
        assert!(out.report.passed(), "{:?}", out.report);
        assert_eq!(out.report.slack, 0);
        let changes = out.certs.values().filter(|c| !c.balls.is_empty()).count();
        assert!((1..=2).contains(&changes));
        for c in out.certs.values() {
            assert!(c.balls.len() <= 1 && c.balls.iter().all(|b| b.1 < 2.0 * out.report.r));
        }
    }

    #[test]
    fn random_clouds_localize_on_an_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<(f64, f64)> = (0..20).map(|_| (rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6))).collect();
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x + rng.random_range(-0.01..0.01), y + rng.random_range(-0.01..0.01))).collect();
        let (a, b) = (z(&pts), z(&moved));
        let eps = flat_distance(&a, &b, &Region::unit_disk(), FlatMode::Absolute).unwrap().value;
        let f = edge_family(a, b);
        let out = localize_family(&f, &LocalizeParams::new(eps + 1e-12, 0.2)).unwrap();
        assert!(out.report.passed(), "{:?}", out.report);
        assert!(out.certs.values().all(|c| c.balls.len() <= 1 && c.radius_sum() < 2.0 * out.report.r));
    }

    #[test]
    fn square_family_localizes() {
        let x = CubicalComplex::unit_cube(2, 2);
        let mut vals = BTreeMap::new();
        for v in x.vertices() {
            let s = 0.01 * v[0] as f64;
            let t = 0.01 * v[1] as f64;
            vals.insert(v, z(&[(0.1 + s, 0.0), (0.3, 0.2 + t), (-0.4, -0.2), (-0.4 + t, 0.3)]));
        }
        let f = VertexMap::new(x, vals, "square");
        let out = localize_family(&f, &LocalizeParams::new(0.031, 0.2)).unwrap();
        assert!(out.report.passed(), "{:?}", out.report);
    }

    #[test]
    fn random_square_family_uses_the_centre() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = CubicalComplex::unit_cube(2, 2);
        let base: Vec<(f64, f64)> = (0..8).map(|_| (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect();
        let mut vals = BTreeMap::new();
        for v in x.vertices() {
            let moved: Vec<(f64, f64)> =
                base.iter().map(|&(a, b)| (a + rng.random_range(-0.03..0.03), b + rng.random_range(-0.03..0.03))).collect();
            vals.insert(v, z(&moved));
        }
        let f = VertexMap::new(x, vals, "random square");
        let eps = check_fineness(&f, 1.0, &Region::unit_disk(), FlatMode::Absolute).unwrap().max_flat + 1e-12;
        let out = localize_family(&f, &LocalizeParams::new(eps, 0.2)).unwrap();
        assert!(out.report.passed(), "{:?}", out.report);
        assert!(out.report.centre_levels > 0);
    }

    #[test]
    fn errors() {
        let a = z(&[(0.0, 0.0), (0.5, 0.0)]);
        let b = z(&[(0.0, 0.0), (0.1, 0.0)]);
        let f = edge_family(a.clone(), b);
        assert!(matches!(localize_family(&f, &LocalizeParams::new(0.1, 0.2)), Err(Error::NotFine { .. })));
        let g = edge_family(a.clone(), a);
        assert!(matches!(localize_family(&g, &LocalizeParams::new(0.1, 0.9)), Err(Error::DeltaTooLarge { .. })));
        let cube = VertexMap::constant(CubicalComplex::unit_cube(3, 3), ZeroChain::empty(2), "cube");
        assert!(matches!(localize_family(&cube, &LocalizeParams::new(0.1, 0.2)), Err(Error::DimUnsupported(_))));
    }
}
