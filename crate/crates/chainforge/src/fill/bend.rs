use super::deform::{far_exit, pick_generic_point, ray_fill, FfPush, GenericPoint, GridSkeleton};
use crate::chain::{OneChain, ZeroChain};
use crate::cubical::{Vertex, VertexMap};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::region::Region;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-vertex measurements of a bend-and-cancel filling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BendRow {
    pub vertex: Vertex,
    pub mass_fbar: usize,
    pub mass_g: f64,
    pub boundary_mass: usize,
    /// `mass(Fbar) r + r^(1-n)`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BendCancelReport {
    pub n: usize,
    pub r: f64,
    pub l: f64,
    pub generic: GenericPoint,
    pub push_seed: u64,
    pub skeleton_constant: f64,
    pub max_displacement_cells: f64,
    /// Largest `mass(G) / (mass(Fbar) r + r^(1-n))`.
    pub fitted_c: f64,
    pub boundary_supported: bool,
    pub boundary_mass_ok: bool,
    pub rows: Vec<BendRow>,
}

impl BendCancelReport {
    pub fn passed(&self) -> bool {
        self.boundary_supported && self.boundary_mass_ok
    }
}

pub struct BendCancel {
    pub family: VertexMap<OneChain>,
    pub report: BendCancelReport,
}

/// Chordal radius of the boundary ball of geodesic radius `l`.
fn chord(l: f64) -> f64 {
    2.0 * (0.5 * l).sin()
}

/// Points of `z` in the open disk or in the boundary ball about the south
/// pole.
pub fn interior_and_ball(z: &ZeroChain, l: f64) -> ZeroChain {
    let n = z.dim();
    let inner = Region::DiskInterior { dim: n };
    let cap = Region::BoundaryBall { center: Point::south_pole(n), radius: chord(l) };
    ZeroChain::new(n, z.points().iter().copied().filter(|&p| inner.contains(p) || cap.contains(p)).collect())
}

/// Whether every point of `z` lies on the unit sphere.
pub fn on_sphere(z: &ZeroChain) -> bool {
    z.points().iter().all(|p| (p.norm() - 1.0).abs() <= 1e-9)
}

/// Fill each `F(x)` up to a cycle on the sphere: ray fillings through a
/// generic point, pushed onto the grid skeleton of width `r`, plus the
/// segments from each point of `Fbar(x)` to its image and from each pushed
/// exit point back to the exit.
pub fn bend_cancel_fill(f: &VertexMap<ZeroChain>, r: f64, l: f64, seed: u64) -> Result<BendCancel> {
    let n = match f.values.values().next() {
        Some(z) => z.dim(),
        None => return Err(Error::BadSpec("empty family".into())),
    };
    let grid = GridSkeleton::new(n, r)?;
    let generic = pick_generic_point(&grid, l, seed)?;
    let mut last = None;
    for attempt in 0..5u64 {
        let push = FfPush::new(grid.clone(), seed.wrapping_add(attempt).wrapping_mul(0x2545_f491_4f6c_dd1d));
        match fill_all(f, &push, &generic, l) {
            Ok(out) => return finish(f, out, &grid, generic, push.seed, l),
            Err(e @ Error::DegenerateCenter(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("attempted"))
}

struct Filled {
    vertex: Vertex,
    g: OneChain,
    fbar: usize,
    disp: f64,
}

fn fill_all(f: &VertexMap<ZeroChain>, push: &FfPush, gp: &GenericPoint, l: f64) -> Result<Vec<Filled>> {
    let items: Vec<(&Vertex, &ZeroChain)> = f.values.iter().collect();
    items
        .par_iter()
        .map(|(v, z)| {
            let fbar = interior_and_ball(z, l);
            let rays = ray_fill(&fbar, gp)?;
            let (pushed, stats) = push.push(&rays)?;
            let mut corr = Vec::with_capacity(2 * fbar.mass());
            for &p in fbar.points() {
                corr.push((p, push.map_point(p)?));
                let h = far_exit(p, gp)?;
                corr.push((push.map_point(h)?, h));
            }
            let g = pushed.add(&OneChain::new(z.dim(), corr)).reduce_collinear();
            Ok(Filled { vertex: (*v).clone(), g, fbar: fbar.mass(), disp: stats.max_displacement })
        })
        .collect()
}

fn finish(
    f: &VertexMap<ZeroChain>,
    filled: Vec<Filled>,
    grid: &GridSkeleton,
    generic: GenericPoint,
    push_seed: u64,
    l: f64,
) -> Result<BendCancel> {
    let n = grid.n;
    let r = grid.r;
    let mut rows = Vec::with_capacity(filled.len());
    let mut values = std::collections::BTreeMap::new();
    let mut disp: f64 = 0.0;
    for item in filled {
        let bd = item.g.boundary();
        let bound = item.fbar as f64 * r + r.powi(1 - n as i32);
        let mass_g = item.g.mass();
        rows.push(BendRow {
            vertex: item.vertex.clone(),
            mass_fbar: item.fbar,
            mass_g,
            boundary_mass: bd.mass(),
            bound,
            ratio: mass_g / bound,
        });
        disp = disp.max(item.disp);
        values.insert(item.vertex, item.g);
    }
    let family = VertexMap::new(f.complex.clone(), values, "bend_cancel_fill");
    let (boundary_supported, boundary_mass_ok) = verify_bend_cancel(f, &family, l);
    let report = BendCancelReport {
        n,
        r,
        l,
        generic,
        push_seed,
        skeleton_constant: grid.skeleton_constant(),
        max_displacement_cells: disp,
        fitted_c: rows.iter().map(|row| row.ratio).fold(0.0, f64::max),
        boundary_supported,
        boundary_mass_ok,
        rows,
    };
    if !report.passed() {
        return Err(Error::BoundaryMismatch);
    }
    Ok(BendCancel { family, report })
}

/// The two boundary properties of a bend-and-cancel filling: `dG + F` lies
/// on the sphere, and `mass(dG) <= 2 mass(Fbar)`.
pub fn verify_bend_cancel(f: &VertexMap<ZeroChain>, g: &VertexMap<OneChain>, l: f64) -> (bool, bool) {
    let mut supported = true;
    let mut mass_ok = true;
    for (v, z) in &f.values {
        let bd = match g.values.get(v) {
            Some(c) => c.boundary(),
            None => {
                supported = false;
                continue;
            }
        };
        supported &= on_sphere(&bd.add(z));
        mass_ok &= bd.mass() <= 2 * interior_and_ball(z, l).mass();
    }
    (supported, mass_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::CubicalComplex;
    use rand::{Rng, SeedableRng};

    fn single(z: ZeroChain) -> VertexMap<ZeroChain> {
        VertexMap::constant(CubicalComplex::unit_cube(0, 0), z, "test")
    }

    #[test]
    fn empty_family_gives_empty_filling() {
        let out = bend_cancel_fill(&single(ZeroChain::empty(2)), 0.25, 0.4, 1).unwrap();
        assert!(out.family.values.values().all(|g| g.is_empty()));
    }

    #[test]
    fn single_point_is_one_bent_ray() {
        let z = ZeroChain::new(2, vec![Point::new2(0.1, 0.2)]);
        let out = bend_cancel_fill(&single(z.clone()), 0.25, 0.4, 2).unwrap();
        let g = out.family.values.values().next().unwrap();
        assert!(on_sphere(&g.boundary().add(&z)));
        assert_eq!(g.boundary().mass(), 2);
    }

    #[test]
    fn boundary_points_outside_the_ball_are_left_alone() {
        let z = ZeroChain::new(2, vec![Point::new2(0.0, 1.0), Point::new2(0.3, 0.1)]);
        let out = bend_cancel_fill(&single(z), 0.25, 0.4, 3).unwrap();
        assert_eq!(out.report.rows[0].mass_fbar, 1);
        assert!(out.report.passed());
    }

    #[test]
    fn hundred_points_ratio() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Point> = (0..100)
            .map(|_| loop {
                let p = Point::new2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                if p.norm() < 0.99 {
                    break p;
                }
            })
            .collect();
        let out = bend_cancel_fill(&single(ZeroChain::new(2, pts)), 0.1, 0.4, 5).unwrap();
        let row = &out.report.rows[0];
        assert!((row.bound - 20.0).abs() < 1e-9);
        assert!(row.ratio < 20.0, "{}", row.ratio);
    }

    #[test]
    fn three_dimensional_family() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let pts: Vec<Point> =
            (0..16).map(|_| Point::new3(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect();
        let out = bend_cancel_fill(&single(ZeroChain::new(3, pts)), 0.25, 0.4, 7).unwrap();
        assert!(out.report.passed());
        assert!(out.report.max_displacement_cells < 3.2);
    }
}
