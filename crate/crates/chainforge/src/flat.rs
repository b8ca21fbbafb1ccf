//! Flat norm of mod-2 zero-cycles, absolute and relative to the boundary of
//! a convex domain, computed exactly as a weighted matching.

use crate::chain::{OneChain, ZeroChain};
use crate::cubical::VertexMap;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::matching::max_weight_matching;
use crate::region::Region;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatMode {
    Absolute,
    Relative,
}

/// Optimal decomposition `z = alpha + boundary(beta)`: `beta` is made of the
/// matched pairs (and boundary feet in relative mode), `alpha` of the
/// dropped points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatWitness {
    pub value: f64,
    pub matched_pairs: Vec<(Point, Point)>,
    pub dropped: Vec<Point>,
    pub boundary_projected: Vec<(Point, Point)>,
}

impl FlatWitness {
    /// The filling `beta`.
    pub fn filling(&self, dim: usize) -> OneChain {
        let segs = self.matched_pairs.iter().chain(&self.boundary_projected).copied().collect();
        OneChain::new(dim, segs)
    }

    /// `boundary(beta) + alpha`, with boundary feet discarded as relative
    /// chains. Equals the input cycle.
    pub fn reconstruct(&self, dim: usize) -> ZeroChain {
        let mut pts: Vec<Point> = self.matched_pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
        pts.extend(self.boundary_projected.iter().map(|(p, _)| *p));
        pts.extend(self.dropped.iter().copied());
        ZeroChain::new(dim, pts)
    }
}

/// Fixed-point scale for matching weights. Rounding costs at most
/// `n / 2^41` in the optimum, far below the comparison tolerances.
const WEIGHT_SCALE: f64 = (1u64 << 40) as f64;

fn opt_out_costs(z: &ZeroChain, domain: &Region, mode: FlatMode) -> Result<Vec<(f64, Option<Point>)>> {
    if !domain.is_convex_domain() {
        return Err(Error::NonConvexDomain);
    }
    z.points()
        .iter()
        .map(|&p| match mode {
            FlatMode::Absolute => Ok((1.0, None)),
            FlatMode::Relative => {
                let (d, foot) = domain.boundary_foot(p)?;
                Ok(if d < 1.0 { (d, Some(foot)) } else { (1.0, None) })
            }
        })
        .collect()
}

/// Exact flat norm with an optimal witness.
pub fn flat_norm(z: &ZeroChain, domain: &Region, mode: FlatMode) -> Result<FlatWitness> {
    let costs = opt_out_costs(z, domain, mode)?;
    let pts = z.points();
    let n = pts.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let gain = costs[i].0 + costs[j].0 - pts[i].dist(pts[j]);
            if gain > 0.0 {
                let w = (gain * WEIGHT_SCALE).round() as i64;
                if w > 0 {
                    edges.push((i, j, w));
                }
            }
        }
    }
    let mate = max_weight_matching(n, &edges);
    let mut w = FlatWitness { value: 0.0, matched_pairs: Vec::new(), dropped: Vec::new(), boundary_projected: Vec::new() };
    for i in 0..n {
        match mate[i] {
            Some(j) if j > i => {
                w.value += pts[i].dist(pts[j]);
                w.matched_pairs.push((pts[i], pts[j]));
            }
            Some(_) => {}
            None => {
                w.value += costs[i].0;
                match costs[i].1 {
                    Some(foot) => w.boundary_projected.push((pts[i], foot)),
                    None => w.dropped.push(pts[i]),
                }
            }
        }
    }
    Ok(w)
}

/// Flat distance between two zero-cycles.
pub fn flat_distance(a: &ZeroChain, b: &ZeroChain, domain: &Region, mode: FlatMode) -> Result<FlatWitness> {
    flat_norm(&a.add(b), domain, mode)
}

/// Exhaustive minimum over all partial matchings; exponential, for testing.
pub fn flat_norm_oracle(z: &ZeroChain, domain: &Region, mode: FlatMode) -> Result<f64> {
    if z.mass() > 10 {
        return Err(Error::TooLarge(z.mass()));
    }
    let costs: Vec<f64> = opt_out_costs(z, domain, mode)?.into_iter().map(|c| c.0).collect();
    let pts = z.points();
    fn best(mask: u32, pts: &[Point], costs: &[f64]) -> f64 {
        let n = pts.len();
        let Some(i) = (0..n).find(|&i| mask & (1 << i) == 0) else {
            return 0.0;
        };
        let m = mask | (1 << i);
        let mut v = costs[i] + best(m, pts, costs);
        for j in i + 1..n {
            if m & (1 << j) == 0 {
                v = v.min(pts[i].dist(pts[j]) + best(m | (1 << j), pts, costs));
            }
        }
        v
    }
    Ok(best(0, pts, &costs))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinenessViolation {
    pub cell: String,
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub value: f64,
    pub witness: FlatWitness,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinenessReport {
    pub eps: f64,
    pub max_flat: f64,
    pub pairs_checked: usize,
    pub violations: Vec<FinenessViolation>,
}

impl FinenessReport {
    pub fn is_fine(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check `flat(F(x) + F(y)) <= eps` for all vertex pairs of every cell.
pub fn check_fineness(f: &VertexMap<ZeroChain>, eps: f64, domain: &Region, mode: FlatMode) -> Result<FinenessReport> {
    let mut rep = FinenessReport { eps, max_flat: 0.0, pairs_checked: 0, violations: Vec::new() };
    let mut seen = std::collections::BTreeSet::new();
    for cell in f.complex.top_cells() {
        let vs = cell.vertices();
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                if !seen.insert((vs[i].clone(), vs[j].clone())) {
                    continue;
                }
                let w = flat_distance(f.get(&vs[i]), f.get(&vs[j]), domain, mode)?;
                rep.pairs_checked += 1;
                rep.max_flat = rep.max_flat.max(w.value);
                if w.value > eps {
                    rep.violations.push(FinenessViolation {
                        cell: cell.key(),
                        x: vs[i].clone(),
                        y: vs[j].clone(),
                        value: w.value,
                        witness: w,
                    });
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::CubicalComplex;
    use std::collections::BTreeMap;

    fn z(pts: &[(f64, f64)]) -> ZeroChain {
        ZeroChain::new(2, pts.iter().map(|&(x, y)| Point::new2(x, y)).collect())
    }

    #[test]
    fn worked_values() {
        let d = Region::unit_disk();
        assert_eq!(flat_norm(&ZeroChain::empty(2), &d, FlatMode::Absolute).unwrap().value, 0.0);
        let w = flat_norm(&z(&[(0.0, 0.0), (0.4, 0.0)]), &d, FlatMode::Absolute).unwrap();
        assert!((w.value - 0.4).abs() < 1e-12);
        assert_eq!(w.matched_pairs.len(), 1);
        let w = flat_norm(&z(&[(0.95, 0.0)]), &d, FlatMode::Relative).unwrap();
        assert!((w.value - 0.05).abs() < 1e-12);
        assert_eq!(w.boundary_projected.len(), 1);
        let w = flat_norm(&z(&[(-0.95, 0.0), (0.95, 0.0)]), &d, FlatMode::Absolute).unwrap();
        assert!((w.value - 1.9).abs() < 1e-12);
        assert_eq!(flat_norm_oracle(&z(&[(0.1, 0.1)]), &d, FlatMode::Absolute).unwrap(), 1.0);
    }

    #[test]
    fn non_convex_rejected() {
        let r = Region::Whole;
        assert_eq!(flat_norm(&z(&[(0.0, 0.0)]), &r, FlatMode::Absolute), Err(Error::NonConvexDomain));
        let big = ZeroChain::new(2, (0..11).map(|i| Point::new2(i as f64 * 0.05, 0.0)).collect());
        assert_eq!(flat_norm_oracle(&big, &Region::unit_disk(), FlatMode::Absolute), Err(Error::TooLarge(11)));
    }

    #[test]
    fn fineness_threshold() {
        let x = CubicalComplex::unit_cube(1, 1);
        let mut vals = BTreeMap::new();
        vals.insert(vec![0], z(&[(0.0, 0.0)]));
        vals.insert(vec![1], z(&[(0.1, 0.0)]));
        let f = VertexMap::new(x, vals, "test");
        let d = Region::unit_disk();
        assert!(check_fineness(&f, 0.1, &d, FlatMode::Absolute).unwrap().is_fine());
        assert!(!check_fineness(&f, 0.099, &d, FlatMode::Absolute).unwrap().is_fine());
    }
}
