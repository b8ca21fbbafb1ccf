use super::deform::{polygon_exit, push_polygon};
use crate::chain::{OneChain, ZeroChain};
use crate::cubical::{CubicalComplex, Vertex, VertexMap};
use crate::error::{Error, Result};
use crate::geom::{point_segment_dist, Point};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

const ON_EDGE: f64 = 1e-9;

/// Metric graph embedded in the plane or space by straight edges.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricGraph {
    pub vertices: Vec<Point>,
    pub edges: Vec<(usize, usize)>,
}

impl MetricGraph {
    pub fn length(&self) -> f64 {
        self.edges.iter().map(|&(a, b)| self.vertices[a].dist(self.vertices[b])).sum()
    }

    /// Closed polygon through `m` equally spaced points of the circle.
    pub fn circle(center: Point, radius: f64, m: usize) -> MetricGraph {
        let vertices = (0..m)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / m as f64;
                Point::new2(center.x() + radius * t.cos(), center.y() + radius * t.sin())
            })
            .collect();
        MetricGraph { vertices, edges: (0..m).map(|i| (i, (i + 1) % m)).collect() }
    }

    /// Mod-2 filling of a 0-chain on the graph along a breadth-first
    /// spanning tree: an edge is used when the subtree below it carries an
    /// odd number of points. Mass is at most the length of the graph.
    pub fn fill(&self, z: &ZeroChain) -> Result<OneChain> {
        let mut nodes = self.vertices.clone();
        let mut parity = vec![false; nodes.len()];
        let mut on_edge: Vec<Vec<(f64, usize)>> = vec![Vec::new(); self.edges.len()];
        'points: for &p in z.points() {
            if let Some(i) = self.vertices.iter().position(|v| v.dist(p) <= ON_EDGE) {
                parity[i] ^= true;
                continue;
            }
            for (k, &(a, b)) in self.edges.iter().enumerate() {
                let (d, t) = point_segment_dist(p, self.vertices[a], self.vertices[b]);
                if d <= ON_EDGE {
                    on_edge[k].push((t, nodes.len()));
                    nodes.push(p);
                    parity.push(true);
                    continue 'points;
                }
            }
            return Err(Error::BadSpec(format!("point {:?} is not on the graph", p.0)));
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            let mut chain = on_edge[k].clone();
            chain.sort_by(|x, y| x.0.total_cmp(&y.0));
            let seq: Vec<usize> = std::iter::once(a).chain(chain.into_iter().map(|(_, i)| i)).chain(std::iter::once(b)).collect();
            for w in seq.windows(2) {
                adj[w[0]].push(w[1]);
                adj[w[1]].push(w[0]);
            }
        }
        let mut parent: Vec<Option<usize>> = vec![None; nodes.len()];
        let mut seen = vec![false; nodes.len()];
        let mut order = Vec::with_capacity(nodes.len());
        for root in 0..nodes.len() {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(u);
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut segs = Vec::new();
        for &u in order.iter().rev() {
            if !parity[u] {
                continue;
            }
            match parent[u] {
                Some(w) => {
                    segs.push((nodes[u], nodes[w]));
                    parity[w] ^= true;
                }
                None => return Err(Error::NotContractible(format!("odd number of points in the component of {:?}", nodes[u].0))),
            }
        }
        Ok(OneChain::new(z.dim(), segs))
    }
}

/// Planar polygon split into triangles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriangulatedPolygon {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangulatedPolygon {
    /// The unit square cut along its diagonal.
    pub fn unit_square() -> TriangulatedPolygon {
        TriangulatedPolygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }

    /// Triangle corners, counter-clockwise.
    fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        if orient(a, b, c) > 0.0 {
            [a, b, c]
        } else {
            [a, c, b]
        }
    }

    /// Edges of the triangulation as a metric graph.
    pub fn edge_graph(&self) -> MetricGraph {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort();
        edges.dedup();
        MetricGraph { vertices: self.vertices.iter().map(|v| Point::new2(v[0], v[1])).collect(), edges }
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Where the fill lives: a triangulated planar polygon or a metric graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Domain {
    Polygon(TriangulatedPolygon),
    Graph(MetricGraph),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamRow {
    pub vertex: Vertex,
    pub mass_f: usize,
    pub mass_g: f64,
    /// Mass of the graph filling of the leftover boundary points.
    pub graph_mass: f64,
    /// `mass_0 p^(-1/m) + p^((m-1)/m)`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParametricReport {
    pub m: usize,
    pub p: usize,
    pub r: f64,
    pub mass0: usize,
    pub direction: Option<[f64; 2]>,
    pub push_seed: u64,
    pub graph_length: f64,
    pub boundary_exact: bool,
    /// Per triangle: boundary points on the triangle's edges within
    /// `4 (mass_T + p + 1)`.
    pub triangle_boundary_ok: bool,
    /// Largest `mass(G_T) / (mass_T r + 1/r)` over triangles and vertices.
    pub triangle_fitted_c: f64,
    pub max_ratio: f64,
    pub rows: Vec<ParamRow>,
}

impl ParametricReport {
    pub fn passed(&self) -> bool {
        self.boundary_exact && self.triangle_boundary_ok
    }
}

pub struct ParametricFill {
    pub family: VertexMap<OneChain>,
    pub report: ParametricReport,
}

/// Fill a contractible family of 0-cycles on a triangulated polygon or a
/// metric graph with `dG(x) = F(x)`. On a polygon each triangle is filled by
/// parallel rays pushed onto a grid of width `p^(-1/2)`; the leftover points
/// on triangle edges are then filled along the edge graph.
pub fn parametric_fill(f: &VertexMap<ZeroChain>, domain: &Domain, p: usize, seed: u64) -> Result<ParametricFill> {
    if p == 0 {
        return Err(Error::BadSpec("p must be positive".into()));
    }
    let mass0 = f.values.values().map(ZeroChain::mass).max().unwrap_or(0);
    match domain {
        Domain::Graph(g) => fill_graph_family(f, g, p, mass0),
        Domain::Polygon(poly) => {
            if f.values.values().any(|z| z.dim() != 2) {
                return Err(Error::DimUnsupported("polygon domains are planar".into()));
            }
            let mut last = None;
            for attempt in 0..5u64 {
                let s = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                match fill_polygon_family(f, poly, p, mass0, s) {
                    Err(e @ Error::DegenerateCenter(_)) => last = Some(e),
                    other => return other,
                }
            }
            Err(last.expect("attempted"))
        }
    }
}

fn fill_graph_family(f: &VertexMap<ZeroChain>, g: &MetricGraph, p: usize, mass0: usize) -> Result<ParametricFill> {
    let length = g.length();
    let mut values = BTreeMap::new();
    let mut rows = Vec::new();
    let mut exact = true;
    for (v, z) in &f.values {
        let fill = g.fill(z)?;
        exact &= fill.boundary().same(z);
        let mass = fill.mass();
        rows.push(ParamRow { vertex: v.clone(), mass_f: z.mass(), mass_g: mass, graph_mass: mass, bound: length, ratio: mass / length.max(f64::MIN_POSITIVE) });
        values.insert(v.clone(), fill);
    }
    let report = ParametricReport {
        m: 1,
        p,
        r: 1.0 / p as f64,
        mass0,
        direction: None,
        push_seed: 0,
        graph_length: length,
        boundary_exact: exact && rows.iter().all(|r| r.mass_g <= length + 1e-9),
        triangle_boundary_ok: true,
        triangle_fitted_c: 0.0,
        max_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        rows,
    };
    finish(f, values, report)
}

fn finish(f: &VertexMap<ZeroChain>, values: BTreeMap<Vertex, OneChain>, report: ParametricReport) -> Result<ParametricFill> {
    if !report.passed() {
        return Err(Error::BoundaryMismatch);
    }
    Ok(ParametricFill { family: VertexMap::new(f.complex.clone(), values, "parametric_fill"), report })
}

/// A direction not within a small angle of any triangle edge or grid axis.
fn generic_direction(poly: &TriangulatedPolygon, seed: u64) -> [f64; 2] {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut angles = vec![0.0, std::f64::consts::FRAC_PI_2];
    for t in &poly.triangles {
        for k in 0..3 {
            let (a, b) = (poly.vertices[t[k]], poly.vertices[t[(k + 1) % 3]]);
            angles.push((b[1] - a[1]).atan2(b[0] - a[0]));
        }
    }
    loop {
        let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        if angles.iter().all(|a| (th - a).sin().abs() > 0.05) {
            return [th.cos(), th.sin()];
        }
    }
}

fn mix(mut h: u64) -> u64 {
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Clip a convex CCW polygon by the half-plane left of `a -> b`.
fn clip(poly: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    let side = |p: [f64; 2]| orient(a, b, p);
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out.dedup_by(|x, y| (x[0] - y[0]).hypot(x[1] - y[1]) < 1e-14);
    if out.len() > 1 && (out[0][0] - out[out.len() - 1][0]).hypot(out[0][1] - out[out.len() - 1][1]) < 1e-14 {
        out.pop();
    }
    out
}

/// Grid cells of width `r` clipped to one triangle, with push centres.
struct TriangleGrid {
    corners: [[f64; 2]; 3],
    r: f64,
    seed: u64,
    index: usize,
}

impl TriangleGrid {
    fn cell(&self, i: i64, j: i64) -> Result<(Vec<[f64; 2]>, [f64; 2])> {
        let (x0, y0) = (i as f64 * self.r, j as f64 * self.r);
        let (x1, y1) = ((i + 1) as f64 * self.r, (j + 1) as f64 * self.r);
        let mut poly = vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
        for k in 0..3 {
            poly = clip(&poly, self.corners[k], self.corners[(k + 1) % 3]);
        }
        if poly.len() < 3 {
            return Err(Error::DegenerateCenter(format!("empty cell ({i}, {j})")));
        }
        let m = poly.len() as f64;
        let g = poly.iter().fold([0.0, 0.0], |s, v| [s[0] + v[0] / m, s[1] + v[1] / m]);
        let mut h = mix(self.seed ^ mix((self.index as u64) << 40 ^ (i as u64) << 20 ^ j as u64));
        let mut jit = [0.0; 2];
        for o in &mut jit {
            h = mix(h);
            *o = 1e-3 * self.r * (2.0 * (h >> 11) as f64 / (1u64 << 53) as f64 - 1.0);
        }
        let c = [g[0] + jit[0], g[1] + jit[1]];
        let inside = (0..poly.len()).all(|k| orient(poly[k], poly[(k + 1) % poly.len()], c) > 0.0);
        Ok((poly, if inside { c } else { g }))
    }

    fn cell_of(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] / self.r).floor() as i64, (p[1] / self.r).floor() as i64)
    }

    /// Radial image of an interior point.
    fn map(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        let (i, j) = self.cell_of(z);
        let (poly, c) = self.cell(i, j)?;
        if (z[0] - c[0]).hypot(z[1] - c[1]) < 1e-12 {
            return Err(Error::DegenerateCenter(format!("point at centre of cell ({i}, {j})")));
        }
        Ok(polygon_exit(&poly, c, z))
    }

    /// Push a segment inside the triangle onto the clipped grid edges.
    fn push(&self, a: [f64; 2], b: [f64; 2], out: &mut Vec<(Point, Point)>) -> Result<()> {
        let d = [b[0] - a[0], b[1] - a[1]];
        let mut ts = vec![0.0, 1.0];
        for k in 0..2 {
            if d[k].abs() < 1e-300 {
                continue;
            }
            let (lo, hi) = (a[k].min(b[k]), a[k].max(b[k]));
            let mut g = (lo / self.r).ceil() as i64;
            while (g as f64) * self.r <= hi {
                let t = (g as f64 * self.r - a[k]) / d[k];
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
                g += 1;
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
        for w in ts.windows(2) {
            let (p, q) = (at(w[0]), at(w[1]));
            let mid = at(0.5 * (w[0] + w[1]));
            let (i, j) = self.cell_of(mid);
            let (poly, c) = self.cell(i, j)?;
            let pieces = push_polygon(&poly, c, p, q)
                .ok_or_else(|| Error::DegenerateCenter(format!("segment through centre of cell ({i}, {j})")))?;
            out.extend(pieces.into_iter().map(|(u, v)| (Point::new2(u[0], u[1]), Point::new2(v[0], v[1]))));
        }
        Ok(())
    }
}

/// Parameter along `z + t dir` where the ray leaves the triangle.
fn triangle_exit(corners: &[[f64; 2]; 3], z: [f64; 2], dir: [f64; 2]) -> [f64; 2] {
    let mut best = (f64::INFINITY, z);
    for k in 0..3 {
        let (p, q) = (corners[k], corners[(k + 1) % 3]);
        let e = [q[0] - p[0], q[1] - p[1]];
        let den = dir[0] * e[1] - dir[1] * e[0];
        if den.abs() < 1e-300 {
            continue;
        }
        let w = [p[0] - z[0], p[1] - z[1]];
        let t = (w[0] * e[1] - w[1] * e[0]) / den;
        let s = ((w[0] * dir[1] - w[1] * dir[0]) / den).clamp(0.0, 1.0);
        if t > 0.0 && t < best.0 {
            best = (t, [p[0] + s * e[0], p[1] + s * e[1]]);
        }
    }
    best.1
}

/// Which triangle holds `p` in its interior, or `None` when `p` is on an
/// edge of the triangulation.
fn locate(poly: &TriangulatedPolygon, p: [f64; 2]) -> Result<Option<usize>> {
    for t in 0..poly.triangles.len() {
        let c = poly.corners(t);
        let s: Vec<f64> = (0..3)
            .map(|k| {
                let (a, b) = (c[k], c[(k + 1) % 3]);
                orient(a, b, p) / (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .collect();
        if s.iter().all(|&x| x > ON_EDGE) {
            return Ok(Some(t));
        }
        if s.iter().all(|&x| x >= -ON_EDGE) {
            return Ok(None);
        }
    }
    Err(Error::BadSpec(format!("point {p:?} outside the polygon")))
}

struct VertexFill {
    vertex: Vertex,
    g: OneChain,
    graph_mass: f64,
    tri_ratio: f64,
    tri_boundary_ok: bool,
}

fn fill_polygon_family(f: &VertexMap<ZeroChain>, poly: &TriangulatedPolygon, p: usize, mass0: usize, seed: u64) -> Result<ParametricFill> {
    let r = (p as f64).powf(-0.5);
    let dir = generic_direction(poly, seed);
    let grids: Vec<TriangleGrid> =
        (0..poly.triangles.len()).map(|t| TriangleGrid { corners: poly.corners(t), r, seed, index: t }).collect();
    let graph = poly.edge_graph();
    let items: Vec<(&Vertex, &ZeroChain)> = f.values.iter().collect();
    let filled: Vec<VertexFill> = items
        .par_iter()
        .map(|(v, z)| -> Result<VertexFill> {
            let mut per_tri: Vec<Vec<[f64; 2]>> = vec![Vec::new(); grids.len()];
            let mut leftover: Vec<Point> = Vec::new();
            for &pt in z.points() {
                match locate(poly, [pt.x(), pt.y()])? {
                    Some(t) => per_tri[t].push([pt.x(), pt.y()]),
                    None => leftover.push(pt),
                }
            }
            let mut g = OneChain::empty(2);
            let mut tri_ratio: f64 = 0.0;
            let mut tri_ok = true;
            for (t, pts) in per_tri.iter().enumerate() {
                let grid = &grids[t];
                let mut segs = Vec::new();
                let mut exits = Vec::with_capacity(pts.len());
                for &zp in pts {
                    let h = triangle_exit(&grid.corners, zp, dir);
                    grid.push(zp, h, &mut segs)?;
                    let img = grid.map(zp)?;
                    segs.push((Point::new2(zp[0], zp[1]), Point::new2(img[0], img[1])));
                    exits.push(Point::new2(h[0], h[1]));
                }
                let gt = OneChain::new(2, segs).reduce_collinear();
                let exits = ZeroChain::new(2, exits);
                let zt = ZeroChain::new(2, pts.iter().map(|q| Point::new2(q[0], q[1])).collect());
                tri_ok &= gt.boundary().add(&zt).same(&exits);
                tri_ok &= exits.mass() <= 4 * (pts.len() + p + 1);
                tri_ratio = tri_ratio.max(gt.mass() / (pts.len() as f64 * r + 1.0 / r));
                leftover.extend_from_slice(exits.points());
                g = g.add(&gt);
            }
            let rest = graph.fill(&ZeroChain::new(2, leftover))?;
            let graph_mass = rest.mass();
            let g = g.add(&rest).reduce_collinear();
            Ok(VertexFill { vertex: (*v).clone(), g, graph_mass, tri_ratio, tri_boundary_ok: tri_ok })
        })
        .collect::<Result<_>>()?;

    let bound = mass0 as f64 * r + 1.0 / r;
    let mut rows = Vec::with_capacity(filled.len());
    let mut values = BTreeMap::new();
    let mut exact = true;
    let (mut tri_c, mut tri_ok): (f64, bool) = (0.0, true);
    for item in filled {
        let z = f.get(&item.vertex);
        exact &= item.g.boundary().same(z);
        tri_c = tri_c.max(item.tri_ratio);
        tri_ok &= item.tri_boundary_ok;
        let mass_g = item.g.mass();
        rows.push(ParamRow { vertex: item.vertex.clone(), mass_f: z.mass(), mass_g, graph_mass: item.graph_mass, bound, ratio: mass_g / bound });
        values.insert(item.vertex, item.g);
    }
    let report = ParametricReport {
        m: 2,
        p,
        r,
        mass0,
        direction: Some(dir),
        push_seed: seed,
        graph_length: graph.length(),
        boundary_exact: exact,
        triangle_boundary_ok: tri_ok,
        triangle_fitted_c: tri_c,
        max_ratio: rows.iter().map(|row| row.ratio).fold(0.0, f64::max),
        rows,
    };
    finish(f, values, report)
}

/// Slices of a closed zigzag curve in the unit square by the vertical lines
/// `x = t`, for `q + 1` evenly spaced `t` in `[0.1, 0.9]`. Every slice has
/// exactly `mass0` points.
pub fn sweepout_family(mass0: usize, q: usize, seed: u64) -> Result<VertexMap<ZeroChain>> {
    if mass0 % 2 == 1 || q == 0 {
        return Err(Error::BadSpec(format!("sweepout needs even mass and q >= 1, got {mass0}, {q}")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let curve: Vec<[f64; 2]> = (0..mass0)
        .map(|j| {
            let x = if j % 2 == 0 { rng.random_range(0.02..0.09) } else { rng.random_range(0.91..0.98) };
            let y = (j as f64 + 0.5 + rng.random_range(-0.4..0.4)) / mass0 as f64;
            [x, y]
        })
        .collect();
    let complex = CubicalComplex::path(q);
    let mut values = BTreeMap::new();
    for i in 0..=q {
        let t = 0.1 + 0.8 * i as f64 / q as f64;
        let mut pts = Vec::with_capacity(mass0);
        for k in 0..mass0 {
            let (a, b) = (curve[k], curve[(k + 1) % mass0]);
            if (a[0] - t) * (b[0] - t) < 0.0 {
                let s = (t - a[0]) / (b[0] - a[0]);
                pts.push(Point::new2(t, a[1] + s * (b[1] - a[1])));
            }
        }
        values.insert(vec![i as i64], ZeroChain::new(2, pts));
    }
    Ok(VertexMap::new(complex, values, &format!("sweepout(mass0={mass0}, q={q}, seed={seed})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(z: ZeroChain) -> VertexMap<ZeroChain> {
        VertexMap::constant(CubicalComplex::unit_cube(0, 0), z, "t")
    }

    #[test]
    fn empty_family_gives_empty_filling() {
        let dom = Domain::Polygon(TriangulatedPolygon::unit_square());
        let out = parametric_fill(&single(ZeroChain::empty(2)), &dom, 4, 0).unwrap();
        assert!(out.family.values.values().all(OneChain::is_empty));
    }

    #[test]
    fn circle_antipodal_pair_is_one_arc() {
        let g = MetricGraph::circle(Point::new2(0.0, 0.0), 1.0, 16);
        let z = ZeroChain::new(2, vec![g.vertices[0], g.vertices[8]]);
        let out = parametric_fill(&single(z.clone()), &Domain::Graph(g.clone()), 1, 0).unwrap();
        let fill = out.family.values.values().next().unwrap();
        assert!(fill.boundary().same(&z));
        // Half the polygon, by hand: 8 chords of angle 2 pi / 16.
        let half = 8.0 * 2.0 * (std::f64::consts::PI / 16.0).sin();
        assert!((fill.mass() - half).abs() < 1e-9);
        assert!(fill.mass() <= g.length());
    }

    #[test]
    fn odd_point_count_is_not_contractible() {
        let g = MetricGraph::circle(Point::new2(0.0, 0.0), 1.0, 8);
        let z = ZeroChain::new(2, vec![g.vertices[1]]);
        assert!(matches!(parametric_fill(&single(z), &Domain::Graph(g), 1, 0), Err(Error::NotContractible(_))));
    }

    #[test]
    fn points_mid_edge_are_inserted() {
        let g = MetricGraph::circle(Point::new2(0.0, 0.0), 1.0, 4);
        let a = g.vertices[0].lerp(g.vertices[1], 0.25);
        let b = g.vertices[0].lerp(g.vertices[1], 0.75);
        let fill = g.fill(&ZeroChain::new(2, vec![a, b])).unwrap();
        assert!((fill.mass() - a.dist(b)).abs() < 1e-12);
    }

    #[test]
    fn square_pair_has_exact_boundary() {
        let z = ZeroChain::new(2, vec![Point::new2(0.3, 0.2), Point::new2(0.7, 0.6)]);
        let dom = Domain::Polygon(TriangulatedPolygon::unit_square());
        let out = parametric_fill(&single(z.clone()), &dom, 16, 1).unwrap();
        assert!(out.report.boundary_exact);
        assert!(out.family.values.values().next().unwrap().boundary().same(&z));
    }

    #[test]
    fn sweepout_slices_have_the_requested_mass() {
        let f = sweepout_family(30, 8, 2).unwrap();
        assert_eq!(f.values.len(), 9);
        assert!(f.values.values().all(|z| z.mass() == 30));
    }

    #[test]
    fn sweepout_ratio_is_bounded_across_p() {
        let f = sweepout_family(30, 4, 3).unwrap();
        let dom = Domain::Polygon(TriangulatedPolygon::unit_square());
        let ratios: Vec<f64> =
            [4, 16, 64].iter().map(|&p| parametric_fill(&f, &dom, p, 4).unwrap().report.max_ratio).collect();
        assert!(ratios.iter().all(|&x| x < 4.0), "{ratios:?}");
    }
}
