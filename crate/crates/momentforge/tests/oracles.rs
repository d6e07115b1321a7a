mod common;

use momentforge::exact_arith::{int, rat, QuadExt};
use momentforge::fixtures;
use momentforge::graph_ops::{betti1, is_isomorphic, MultiGraph};
use momentforge::moment_map::{emit_system, fiber_class_at, FiberClass};
use momentforge::numeric_verify::{matches_oracle, reeb_oracle};
use momentforge::reeb_sweep::{reeb_graph, segment_fiber_class, singular_x_values};

#[test]
fn raster_holes_match_fixtures() {
    for (name, d) in fixtures::all() {
        let r = d.region().unwrap();
        assert_eq!(common::raster_hole_count(r, 300), r.hole_count, "{name}");
    }
}

#[test]
fn raster_holes_match_random() {
    for (s, d) in common::random_arrangements(40) {
        let r = d.region().unwrap();
        assert_eq!(common::raster_hole_count(r, 400), r.hole_count, "seed {s}");
    }
}

#[test]
fn oracle_matches_random_arrangements() {
    for (s, d) in common::random_arrangements(100) {
        let g = reeb_graph(&d).unwrap();
        let o = reeb_oracle(&d, 8).unwrap_or_else(|e| panic!("seed {s}: {e}"));
        assert!(matches_oracle(&g, &o, 1e-6), "seed {s}");
        assert_eq!(betti1(&g.to_multigraph()).unwrap(), d.region().unwrap().hole_count, "seed {s}");
    }
}

#[test]
fn crossing_pair_frozen_values() {
    let d = fixtures::crossing_pair();
    let xs = singular_x_values(&d).unwrap();
    // (29/17) -+ (1/68) sqrt(247), by hand from the radical line 4x + y = 29/4
    let c = |s: i64| QuadExt::new(rat(29, 17), rat(s, 68), 247.into());
    assert_eq!(xs, vec![QuadExt::from_int(-2), QuadExt::from_int(1), c(-1), c(1)]);
    let g = reeb_graph(&d).unwrap();
    assert_eq!(g.degrees(), vec![1, 3, 1, 1]);
}

#[test]
fn lens_frozen_values() {
    let d = fixtures::lens();
    let xs = singular_x_values(&d).unwrap();
    let c = |s: i64| QuadExt::new(rat(1, 2), rat(s, 30), 65.into());
    assert_eq!(xs, vec![QuadExt::from_int(0), c(-1), c(1), QuadExt::from_int(1)]);
    let g = reeb_graph(&d).unwrap();
    assert_eq!(g.to_multigraph(), MultiGraph::path(4));
    let fibers: Vec<FiberClass> = g.edges.iter().map(|e| e.fiber.clone()).collect();
    assert!(fibers.contains(&FiberClass(vec![3])));
    assert_eq!(fibers.iter().filter(|f| **f == FiberClass(vec![2, 1])).count(), 2);
}

#[test]
fn two_hole_graph() {
    let g = reeb_graph(&fixtures::two_hole()).unwrap();
    assert_eq!(g.vertices.len(), 6);
    assert_eq!(betti1(&g.to_multigraph()), Ok(2));
    let theta_like = MultiGraph::new(6, vec![(0, 1), (1, 2), (1, 2), (2, 3), (3, 4), (3, 4), (4, 5)]).unwrap();
    assert!(is_isomorphic(&g.to_multigraph(), &theta_like));
}

#[test]
fn dimension_count() {
    // dimension n + sum of sphere dimensions; ambient space adds one y coordinate per group
    for (_, d) in fixtures::all() {
        let m = emit_system(&d).manifest;
        assert_eq!(m.m, d.n + d.dim_map.iter().sum::<usize>());
        assert_eq!(m.ambient_dim, m.m + m.l2);
    }
    assert_eq!(emit_system(&fixtures::disk()).manifest.m, 3);
}

#[test]
fn pendant_edge_fibers() {
    // Edges between old circles carry S^{m(1)+1} x S^{m(2)}; edges touching a new circle carry
    // S^{m-1}.
    let d = fixtures::crossing_pair_with_dims(vec![2, 1]);
    let m = d.m();
    assert_eq!(segment_fiber_class(&d, 1, 1), FiberClass(vec![3, 1]));
    assert_eq!(segment_fiber_class(&d, 1, 2), FiberClass(vec![m - 1]));
}

#[test]
fn fibers_at_points() {
    let d = fixtures::annulus();
    let q = |a: i64, b: i64| QuadExt::from_rat(rat(a, b));
    assert_eq!(fiber_class_at(&d, &[q(3, 2), q(0, 1)]), Ok(FiberClass(vec![1])));
    assert_eq!(fiber_class_at(&d, &[q(2, 1), q(0, 1)]), Ok(FiberClass(vec![])));
    assert!(fiber_class_at(&d, &[q(0, 1), q(0, 1)]).is_err());
    assert_eq!(d.group_products(&[int(0), int(0)]), vec![int(-4)]);
}
