use crate::chain::{OneChain, ZeroChain};
use crate::coarea::Grid;
use crate::error::{Error, Result};

/// Domain-by-domain interpolation between two point cycles: the forward
/// pass from `Fv`, the reverse pass from `Fw`, and the combined path
/// `z_0 .. z_L, z~_{L-1} .. z~_0`.
#[derive(Clone, Debug)]
pub struct EdgeInterpolation {
    pub forward: Vec<ZeroChain>,
    pub reverse: Vec<ZeroChain>,
    /// `mass(Fv) + 2 L mass(tau) / r` with `r` taken as half the largest
    /// radius of the grid.
    pub mass_bound: f64,
    pub max_mass: usize,
}

impl EdgeInterpolation {
    pub fn path(&self) -> Vec<ZeroChain> {
        let mut out = self.forward.clone();
        out.extend(self.reverse.iter().rev().skip(1).cloned());
        out
    }
}

/// Interpolate from `fv` to `fw` one grid domain at a time, each domain
/// taking the lighter of the two restrictions. On ties the forward pass
/// switches to `fw` and the reverse pass keeps it, so both reach the same
/// middle cycle.
pub fn interpolate_edge(fv: &ZeroChain, fw: &ZeroChain, tau: &OneChain, grid: &Grid) -> Result<EdgeInterpolation> {
    if !tau.boundary().same(&fv.add(fw)) {
        return Err(Error::BoundaryMismatch);
    }
    let l = grid.len();
    let mut pieces = Vec::with_capacity(l);
    let mut lighter_w = Vec::with_capacity(l);
    for k in 0..l {
        pieces.push(grid.restrict_one(tau, k)?.boundary());
        let mv = grid.restrict_zero(fv, k).mass();
        let mw = grid.restrict_zero(fw, k).mass();
        lighter_w.push((mv, mw));
    }
    let mut forward = vec![fv.clone()];
    let mut reverse = vec![fw.clone()];
    for k in 0..l {
        let (mv, mw) = lighter_w[k];
        let f = forward.last().expect("nonempty");
        forward.push(if mv >= mw { f.add(&pieces[k]) } else { f.clone() });
        let r = reverse.last().expect("nonempty");
        reverse.push(if mw > mv { r.add(&pieces[k]) } else { r.clone() });
    }
    if !forward[l].same(&reverse[l]) {
        return Err(Error::BadSpec("grid does not cover the filling".into()));
    }
    let r_est = 0.5 * grid.radii.iter().copied().fold(0.0, f64::max);
    let mass_bound = if l == 0 { fv.mass() as f64 } else { fv.mass() as f64 + 2.0 * l as f64 * tau.mass() / r_est };
    let max_mass = forward.iter().chain(&reverse).map(|z| z.mass()).max().unwrap_or(0);
    assert!(
        max_mass as f64 <= mass_bound.max(fw.mass() as f64) + 1e-9,
        "interpolation mass {max_mass} exceeds {mass_bound}"
    );
    Ok(EdgeInterpolation { forward, reverse, mass_bound, max_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn z(pts: &[(f64, f64)]) -> ZeroChain {
        ZeroChain::new(2, pts.iter().map(|&(x, y)| Point::new2(x, y)).collect())
    }

    #[test]
    fn equal_ends_give_constant_path() {
        let a = z(&[(0.1, 0.1), (0.2, 0.1)]);
        let grid = Grid::new(vec![Point::new2(0.0, 0.0)], vec![1.5]);
        let out = interpolate_edge(&a, &a, &OneChain::empty(2), &grid).unwrap();
        assert!(out.path().iter().all(|s| s.same(&a)));
    }

    #[test]
    fn one_domain_one_step() {
        let p = Point::new2(0.1, 0.0);
        let q = Point::new2(0.15, 0.0);
        let fv = ZeroChain::new(2, vec![p, Point::new2(0.5, 0.5)]);
        let fw = ZeroChain::new(2, vec![q, Point::new2(0.5, 0.5)]);
        let tau = OneChain::new(2, vec![(p, q)]);
        let grid = Grid::new(vec![Point::new2(0.1, 0.0), Point::new2(0.5, 0.5)], vec![0.2, 0.2]);
        let out = interpolate_edge(&fv, &fw, &tau, &grid).unwrap();
        assert!(out.forward[1].same(&fw));
        assert!(out.reverse.iter().all(|s| s.same(&fw)));
    }

    #[test]
    fn two_domains_two_steps() {
        let fv = z(&[(-0.5, 0.0), (-0.45, 0.0), (0.5, 0.0), (0.55, 0.0)]);
        let fw = ZeroChain::empty(2);
        let tau = OneChain::new(
            2,
            vec![(Point::new2(-0.5, 0.0), Point::new2(-0.45, 0.0)), (Point::new2(0.5, 0.0), Point::new2(0.55, 0.0))],
        );
        let grid = Grid::new(vec![Point::new2(-0.5, 0.0), Point::new2(0.5, 0.0)], vec![0.2, 0.2]);
        let out = interpolate_edge(&fv, &fw, &tau, &grid).unwrap();
        let masses: Vec<usize> = out.forward.iter().map(|s| s.mass()).collect();
        assert_eq!(masses, vec![4, 2, 0]);
        assert!(out.max_mass as f64 <= out.mass_bound);
    }

    #[test]
    fn mismatched_filling_rejected() {
        let fv = z(&[(0.0, 0.0), (0.1, 0.0)]);
        let grid = Grid::new(vec![Point::ORIGIN], vec![1.5]);
        assert!(matches!(interpolate_edge(&fv, &ZeroChain::empty(2), &OneChain::empty(2), &grid), Err(Error::BoundaryMismatch)));
    }
}
