//! Cubical parameter complexes: sparse cells of `I^d(q)`, refinement,
//! skeleta, the squeeze map, vertex metrics and refinement of families.

use crate::chain::{ChainJson, OneChain, ZeroChain};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// An axis-aligned cell of `I^d(q)`: anchor vertex in units of `1/q` and the
/// sorted list of axes it spans (side length one unit).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub anchor: Vec<i64>,
    pub axes: Vec<usize>,
}

pub type Vertex = Vec<i64>;

impl Cell {
    pub fn new(anchor: Vec<i64>, mut axes: Vec<usize>) -> Cell {
        axes.sort_unstable();
        axes.dedup();
        Cell { anchor, axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Corners in a fixed order: bit `i` of the index selects the far side
    /// along `axes[i]`.
    pub fn vertices(&self) -> Vec<Vertex> {
        (0..1usize << self.axes.len())
            .map(|mask| {
                let mut v = self.anchor.clone();
                for (i, &a) in self.axes.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        v[a] += 1;
                    }
                }
                v
            })
            .collect()
    }

    /// Codimension-one faces.
    pub fn facets(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(2 * self.axes.len());
        for (i, &a) in self.axes.iter().enumerate() {
            let mut axes = self.axes.clone();
            axes.remove(i);
            out.push(Cell { anchor: self.anchor.clone(), axes: axes.clone() });
            let mut far = self.anchor.clone();
            far[a] += 1;
            out.push(Cell { anchor: far, axes });
        }
        out
    }

    pub fn contains_vertex(&self, v: &[i64]) -> bool {
        v.iter().enumerate().all(|(k, &c)| {
            if self.axes.contains(&k) {
                c >= self.anchor[k] && c <= self.anchor[k] + 1
            } else {
                c == self.anchor[k]
            }
        })
    }

    pub fn contains_cell(&self, o: &Cell) -> bool {
        o.vertices().iter().all(|v| self.contains_vertex(v))
    }

    /// Position of a point of the scaled lattice inside this cell, as
    /// per-axis offsets in `0..=scale`. `None` when outside.
    pub fn local_coords(&self, v: &[i64], scale: i64) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.axes.len());
        for k in 0..v.len() {
            let lo = self.anchor[k] * scale;
            if self.axes.contains(&k) {
                let o = v[k] - lo;
                if o < 0 || o > scale {
                    return None;
                }
                out.push(o);
            } else if v[k] != lo {
                return None;
            }
        }
        Some(out)
    }

    /// Inverse of `local_coords`.
    pub fn from_local(&self, local: &[i64], scale: i64) -> Vertex {
        let mut v: Vertex = self.anchor.iter().map(|a| a * scale).collect();
        for (i, &a) in self.axes.iter().enumerate() {
            v[a] += local[i];
        }
        v
    }

    pub fn key(&self) -> String {
        format!("{:?}/{:?}", self.anchor, self.axes)
    }
}

/// Face-closed set of cells of `I^d(q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicalComplex {
    pub d: usize,
    pub q: u64,
    pub cells: BTreeSet<Cell>,
}

impl CubicalComplex {
    /// Build from generating cells, closing under faces.
    pub fn new(d: usize, q: u64, generators: impl IntoIterator<Item = Cell>) -> CubicalComplex {
        let mut cells = BTreeSet::new();
        let mut stack: Vec<Cell> = generators.into_iter().collect();
        while let Some(c) = stack.pop() {
            if cells.insert(c.clone()) {
                stack.extend(c.facets());
            }
        }
        CubicalComplex { d, q, cells }
    }

    /// The unit cube `[0,1]^p` inside `R^d`.
    pub fn unit_cube(d: usize, p: usize) -> CubicalComplex {
        CubicalComplex::new(d, 1, [Cell::new(vec![0; d], (0..p).collect())])
    }

    /// The interval `[0, n]` subdivided into `n` unit edges.
    pub fn path(n: usize) -> CubicalComplex {
        CubicalComplex::new(1, 1, (0..n).map(|i| Cell::new(vec![i as i64], vec![0])))
    }

    pub fn dim(&self) -> usize {
        self.cells.iter().map(Cell::dim).max().unwrap_or(0)
    }

    pub fn cells_of_dim(&self, j: usize) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.dim() == j)
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        self.cells_of_dim(0).map(|c| c.anchor.clone()).collect()
    }

    /// Cells not contained in any other cell.
    pub fn top_cells(&self) -> Vec<&Cell> {
        let mut covered = BTreeSet::new();
        for c in &self.cells {
            for f in c.facets() {
                covered.insert(f);
            }
        }
        self.cells.iter().filter(|c| !covered.contains(*c)).collect()
    }

    /// `X(q')`: each cell split into `q'^dim` sub-cells.
    pub fn refine(&self, qp: u64) -> CubicalComplex {
        assert!(qp >= 1 && qp % 2 == 1, "refinement factor must be odd");
        let s = qp as i64;
        let mut gens = Vec::new();
        for c in &self.cells {
            let j = c.dim();
            let count = (qp as usize).pow(j as u32);
            for idx in 0..count {
                let mut rem = idx;
                let mut anchor: Vec<i64> = c.anchor.iter().map(|a| a * s).collect();
                for &a in &c.axes {
                    anchor[a] += (rem % qp as usize) as i64;
                    rem /= qp as usize;
                }
                gens.push(Cell { anchor, axes: c.axes.clone() });
            }
        }
        CubicalComplex::new(self.d, self.q * qp, gens)
    }

    pub fn skeleton(&self, j: usize) -> CubicalComplex {
        CubicalComplex {
            d: self.d,
            q: self.q,
            cells: self.cells.iter().filter(|c| c.dim() <= j).cloned().collect(),
        }
    }

    /// Cells of this (refined) complex lying inside some cell of `coarse`,
    /// where this complex refines `coarse` by the factor `scale`.
    pub fn within(&self, coarse: &CubicalComplex, scale: i64) -> CubicalComplex {
        let cells = self
            .cells
            .iter()
            .filter(|c| {
                coarse.cells.iter().any(|k| c.vertices().iter().all(|v| k.local_coords(v, scale).is_some()))
            })
            .cloned()
            .collect();
        CubicalComplex { d: self.d, q: self.q, cells }
    }

    /// Some cell containing both vertices (the smallest one found).
    pub fn common_cell(&self, x: &[i64], y: &[i64]) -> Option<&Cell> {
        self.cells
            .iter()
            .filter(|c| c.contains_vertex(x) && c.contains_vertex(y))
            .min_by_key(|c| c.dim())
    }

    /// Metrics between vertices of `self.refine(q)` that lie in a common
    /// cell of `self`, measured with that cell identified with `[0,1]^j`.
    pub fn vertex_metrics(&self, q: u64, x: &[i64], y: &[i64]) -> Result<VertexMetrics> {
        let s = q as i64;
        let shared = self.cells.iter().any(|c| c.local_coords(x, s).is_some() && c.local_coords(y, s).is_some());
        if !shared || x.len() != y.len() {
            return Err(Error::NotInCommonCell);
        }
        let gaps: Vec<f64> = x.iter().zip(y).map(|(a, b)| ((a - b).abs() as f64) / q as f64).collect();
        let d0 = gaps.iter().cloned().fold(0.0, f64::max);
        let d1: f64 = gaps.iter().sum();
        Ok(VertexMetrics { d0, d1, dq: q as f64 * d1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexMetrics {
    pub d0: f64,
    pub d1: f64,
    pub dq: f64,
}

/// The squeeze profile: 0 on `[0,1/3]`, 1 on `[2/3,1]`, linear between.
pub fn squeeze(x: f64) -> f64 {
    if x <= 1.0 / 3.0 {
        0.0
    } else if x >= 2.0 / 3.0 {
        1.0
    } else {
        3.0 * (x - 1.0 / 3.0)
    }
}

/// Coordinatewise squeeze of a point of `[0,1]^j`.
pub fn squeeze_point(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&c| squeeze(c)).collect()
}

/// The squeeze on lattice offsets: a point `k / (3m)` of a cell maps to
/// `squeeze_index(k, m) / m`.
pub fn squeeze_index(k: i64, m: i64) -> i64 {
    (k - m).clamp(0, m)
}

/// Hop distance in `C(scale)` from local offsets to the boundary of the cell.
pub fn hops_to_boundary(local: &[i64], scale: i64) -> i64 {
    local.iter().map(|&k| k.min(scale - k)).min().unwrap_or(0)
}

/// Whether a vertex of `C(3m)` lies in the closed middle block
/// `[1/3, 2/3]^j`.
pub fn in_center(local: &[i64], m: i64) -> bool {
    local.iter().all(|&k| k >= m && k <= 2 * m)
}

/// A chain assigned to every vertex of a complex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMap<T> {
    pub complex: CubicalComplex,
    pub values: BTreeMap<Vertex, T>,
    pub provenance: String,
}

impl<T: Clone> VertexMap<T> {
    pub fn new(complex: CubicalComplex, values: BTreeMap<Vertex, T>, provenance: &str) -> VertexMap<T> {
        VertexMap { complex, values, provenance: provenance.to_string() }
    }

    pub fn constant(complex: CubicalComplex, value: T, provenance: &str) -> VertexMap<T> {
        let values = complex.vertices().into_iter().map(|v| (v, value.clone())).collect();
        VertexMap::new(complex, values, provenance)
    }

    pub fn get(&self, v: &[i64]) -> &T {
        self.values.get(v).unwrap_or_else(|| panic!("no value at vertex {v:?}"))
    }

    /// Whether every vertex of the complex carries a value.
    pub fn is_total(&self) -> bool {
        self.complex.vertices().iter().all(|v| self.values.contains_key(v))
    }
}

/// `R^{q'} F`: every new vertex takes the value of the nearest original
/// vertex.
pub fn refine_family<T: Clone>(f: &VertexMap<T>, qp: u64) -> VertexMap<T> {
    let complex = f.complex.refine(qp);
    let s = qp as i64;
    let values = complex
        .vertices()
        .into_iter()
        .map(|v| {
            let near = nearest_coarse(&v, s);
            (v, f.get(&near).clone())
        })
        .collect();
    VertexMap::new(complex, values, &format!("refine({qp}) of {}", f.provenance))
}

/// `Lambda`: nearest vertex of the coarse lattice for a point of the lattice
/// refined by the odd factor `s`.
pub fn nearest_coarse(v: &[i64], s: i64) -> Vertex {
    v.iter().map(|&c| (2 * c + s).div_euclid(2 * s)).collect()
}

/// Serialized family: the complex plus one chain per vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub complex: CubicalComplex,
    pub values: Vec<VertexValueJson>,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexValueJson {
    pub vertex: Vertex,
    pub chain: ChainJson,
}

impl FamilyJson {
    pub fn from_zero(f: &VertexMap<ZeroChain>) -> FamilyJson {
        FamilyJson {
            complex: f.complex.clone(),
            values: f
                .values
                .iter()
                .map(|(v, z)| VertexValueJson { vertex: v.clone(), chain: ChainJson::from_chains(z, None) })
                .collect(),
            provenance: f.provenance.clone(),
        }
    }

    pub fn from_one(f: &VertexMap<OneChain>) -> FamilyJson {
        FamilyJson {
            complex: f.complex.clone(),
            values: f
                .values
                .iter()
                .map(|(v, c)| VertexValueJson {
                    vertex: v.clone(),
                    chain: ChainJson::from_chains(&ZeroChain::empty(c.dim()), Some(c)),
                })
                .collect(),
            provenance: f.provenance.clone(),
        }
    }

    pub fn zero_family(&self) -> Result<VertexMap<ZeroChain>> {
        let mut values = BTreeMap::new();
        for v in &self.values {
            values.insert(v.vertex.clone(), v.chain.zero_chain()?);
        }
        let f = VertexMap::new(self.complex.clone(), values, &self.provenance);
        if !f.is_total() {
            return Err(Error::BadSpec("family misses vertices of its complex".into()));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_counts() {
        let e = CubicalComplex::unit_cube(1, 1);
        let r = e.refine(3);
        assert_eq!(r.cells_of_dim(1).count(), 3);
        assert_eq!(r.vertices().len(), 4);
        let s = CubicalComplex::unit_cube(2, 2).refine(3);
        assert_eq!(s.cells_of_dim(2).count(), 9);
        assert_eq!(s.vertices().len(), 16);
        assert_eq!(CubicalComplex::unit_cube(2, 2).refine(1), CubicalComplex::unit_cube(2, 2));
    }

    #[test]
    fn skeleton_commutes_with_refine() {
        let x = CubicalComplex::unit_cube(3, 3);
        for j in 0..=3 {
            assert_eq!(x.skeleton(j).refine(3), x.refine(3).within(&x.skeleton(j), 3));
        }
    }

    #[test]
    fn nearest_vertex_rule() {
        let x = CubicalComplex::unit_cube(1, 1);
        let mut vals = BTreeMap::new();
        vals.insert(vec![0], 'a');
        vals.insert(vec![1], 'b');
        let f = VertexMap::new(x, vals, "test");
        let r = refine_family(&f, 3);
        assert_eq!(*r.get(&[0]), 'a');
        assert_eq!(*r.get(&[1]), 'a');
        assert_eq!(*r.get(&[2]), 'b');
        assert_eq!(*r.get(&[3]), 'b');
    }

    #[test]
    fn squeeze_values() {
        assert_eq!(squeeze(0.0), 0.0);
        assert_eq!(squeeze(1.0), 1.0);
        assert!((squeeze(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(squeeze(0.3), 0.0);
        assert_eq!(squeeze_index(0, 4), 0);
        assert_eq!(squeeze_index(6, 4), 2);
        assert_eq!(squeeze_index(12, 4), 4);
    }

    #[test]
    fn metrics_examples() {
        let x = CubicalComplex::unit_cube(2, 2);
        let m = x.vertex_metrics(3, &[0, 0], &[1, 1]).unwrap();
        assert!((m.d1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.dq - 2.0).abs() < 1e-12);
        let m = x.vertex_metrics(1, &[0, 0], &[1, 1]).unwrap();
        assert_eq!((m.d0, m.d1), (1.0, 2.0));
        let p = CubicalComplex::path(2);
        assert_eq!(p.vertex_metrics(1, &[0], &[2]), Err(Error::NotInCommonCell));
    }
}
