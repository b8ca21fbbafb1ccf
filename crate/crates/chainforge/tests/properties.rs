use chainforge::chain::{OneChain, TwoChain, ZeroChain};
use chainforge::coarea::{chop, cover_centers, merge_admissible, select_radii, RadiusMemo};
use chainforge::cubical::CubicalComplex;
use chainforge::fill::{find_avoiding_hyperplane, MetricGraph, SphereBall};
use chainforge::flat::{flat_norm, flat_norm_oracle, FlatMode};
use chainforge::geom::Point;
use chainforge::harness::{run_pipeline, ExperimentConfig};
use chainforge::region::Region;
use proptest::prelude::*;

fn disk_point() -> impl Strategy<Value = Point> {
    (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Point::new2(r * t.cos(), r * t.sin()))
}

fn cloud(max: usize) -> impl Strategy<Value = ZeroChain> {
    prop::collection::vec(disk_point(), 0..=max).prop_map(|p| ZeroChain::new(2, p))
}

fn segments(max: usize) -> impl Strategy<Value = OneChain> {
    prop::collection::vec((disk_point(), disk_point()), 1..=max).prop_map(|s| OneChain::new(2, s))
}

fn mode() -> impl Strategy<Value = FlatMode> {
    prop_oneof![Just(FlatMode::Absolute), Just(FlatMode::Relative)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_chains_form_a_group_mod_two(a in cloud(12), b in cloud(12), c in cloud(12)) {
        prop_assert!(a.add(&a).is_empty());
        prop_assert!(a.add(&b).same(&b.add(&a)));
        prop_assert!(a.add(&b).add(&c).same(&a.add(&b.add(&c))));
        prop_assert!(a.mass() + b.mass() >= a.add(&b).mass());
    }

    #[test]
    fn canonical_form_ignores_order(pts in prop::collection::vec(disk_point(), 0..12)) {
        let mut rev = pts.clone();
        rev.reverse();
        let doubled: Vec<Point> = pts.iter().chain(&pts).copied().collect();
        prop_assert_eq!(ZeroChain::new(2, pts.clone()), ZeroChain::new(2, rev));
        prop_assert!(ZeroChain::new(2, doubled).is_empty());
    }

    #[test]
    fn boundary_is_additive(a in segments(8), b in segments(8)) {
        prop_assert!(a.add(&b).boundary().same(&a.boundary().add(&b.boundary())));
        prop_assert!(a.add(&a).is_empty());
        let len: f64 = a.segments().iter().map(|(p, q)| p.dist(*q)).sum();
        prop_assert!((a.mass() - len).abs() < 1e-9);
    }

    #[test]
    fn boundary_of_boundary_vanishes(tris in prop::collection::vec((disk_point(), disk_point(), disk_point()), 1..6)) {
        let tris: Vec<[Point; 3]> = tris
            .into_iter()
            .filter(|(a, b, c)| ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x())).abs() > 1e-3)
            .map(|(a, b, c)| [a, b, c])
            .collect();
        let t = TwoChain::new(tris);
        prop_assert!(t.boundary().boundary().is_empty());
    }

    #[test]
    fn flat_norm_matches_oracle(z in cloud(8), m in mode()) {
        let d = Region::unit_disk();
        let w = flat_norm(&z, &d, m).unwrap();
        let o = flat_norm_oracle(&z, &d, m).unwrap();
        prop_assert!((w.value - o).abs() <= 1e-9, "{} vs {}", w.value, o);
        prop_assert!(w.reconstruct(2).same(&z));
        prop_assert!(w.value <= z.mass() as f64 + 1e-12);
    }

    #[test]
    fn flat_norm_is_subadditive(a in cloud(10), b in cloud(10), m in mode()) {
        let d = Region::unit_disk();
        let fa = flat_norm(&a, &d, m).unwrap().value;
        let fb = flat_norm(&b, &d, m).unwrap().value;
        let fab = flat_norm(&a.add(&b), &d, m).unwrap().value;
        prop_assert!(fab <= fa + fb + 1e-9);
    }

    #[test]
    fn selected_radii_bound_their_slices(c in segments(10), r in 0.1..0.4f64) {
        let centers = cover_centers(&Region::unit_disk(), r, 2);
        let k = 2;
        let radii = select_radii(&centers, std::slice::from_ref(&c), k).unwrap();
        for (x, s) in centers.points.iter().zip(&radii) {
            prop_assert!(*s >= r && *s <= 2.0 * r);
            let slice = c.slice_sphere(*x, *s).unwrap();
            prop_assert!(slice.mass() as f64 <= k as f64 * c.mass() / r + 1e-9);
        }
    }

    #[test]
    fn chopping_starts_full_and_ends_empty(c in segments(8)) {
        let centers = cover_centers(&Region::unit_disk(), 0.3, 2);
        let memo = RadiusMemo::new();
        prop_assert!(chop(&c, 0, &centers, &memo).unwrap().same(&c));
        prop_assert!(chop(&c, centers.len(), &centers, &memo).unwrap().is_empty());
    }

    #[test]
    fn merged_balls_are_disjoint_and_cover(balls in prop::collection::vec((disk_point(), 0.01..0.2f64), 1..10)) {
        let fam = merge_admissible(&balls).unwrap();
        prop_assert!(fam.is_disjoint());
        let input: f64 = balls.iter().map(|b| b.1).sum();
        prop_assert!(fam.radius_sum() <= 3.0 * input + 1e-9);
        for (c, r) in &balls {
            prop_assert!(fam.balls.iter().any(|(d, s)| c.dist(*d) + r <= s + 1e-9));
        }
    }

    #[test]
    fn refinement_keeps_coarse_vertices(p in 1usize..=2, q in prop::sample::select(vec![3u64, 5])) {
        let x = CubicalComplex::unit_cube(p, p);
        let fine = x.refine(q);
        let verts = fine.vertices();
        for v in x.vertices() {
            let scaled: Vec<i64> = v.iter().map(|c| c * q as i64).collect();
            prop_assert!(verts.contains(&scaled));
        }
        prop_assert_eq!(verts.len(), (q as usize + 1).pow(p as u32));
    }

    #[test]
    fn graph_fill_bounds_even_cycles(picks in prop::collection::vec((0usize..24, 0.05..0.95f64), 0..8)) {
        let g = MetricGraph::circle(Point::ORIGIN, 1.0, 24);
        let mut pts: Vec<Point> = picks
            .iter()
            .map(|&(e, t)| {
                let (a, b) = g.edges[e];
                g.vertices[a].lerp(g.vertices[b], t)
            })
            .collect();
        if pts.len() % 2 == 1 {
            pts.pop();
        }
        let z = ZeroChain::new(2, pts);
        let fill = g.fill(&z).unwrap();
        prop_assert!(fill.boundary().same(&z));
        prop_assert!(fill.mass() <= g.length() + 1e-9);
    }

    #[test]
    fn small_ball_families_admit_a_hyperplane(
        n in 3usize..=4,
        seed in any::<u64>(),
        dirs in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 4), 1..6),
    ) {
        let balls: Vec<SphereBall> = dirs
            .iter()
            .filter_map(|d| {
                let c = &d[..n];
                let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                (norm > 1e-3).then(|| SphereBall::new(c.iter().map(|x| x / norm).collect(), 0.1 / dirs.len() as f64))
            })
            .collect();
        let h = find_avoiding_hyperplane(&balls, n, seed).unwrap();
        prop_assert!(h.margin > 0.0);
        let nn = h.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((nn - 1.0).abs() < 1e-9);
        for b in &balls {
            let d: f64 = h.normal.iter().zip(&b.center).map(|(x, y)| x * y).sum();
            prop_assert!(d.abs() - b.radius >= h.margin - 1e-12);
        }
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = ExperimentConfig::from_json(
        r#"{"pipeline":"fill-domain","complex":{"p":1,"q":4},"generator":{"kind":"sweepout","points":12},
            "replicates":3,"sweep":{"p":[4,16]}}"#,
    )
    .unwrap();
    let run = |t: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        let r = pool.install(|| run_pipeline(&cfg, 11, false)).unwrap();
        (serde_json::to_string(&r).unwrap(), r.rows, r.artifacts)
    };
    assert_eq!(run(1), run(4));
}
