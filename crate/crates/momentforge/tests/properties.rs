mod common;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;

use momentforge::cli_io::{parse_input, serialize_data};
use momentforge::exact_arith::{quad_cmp, rat, QuadExt, Rat};
use momentforge::graph_ops::{
    betti1, build_gp, collapses_onto, is_isomorphic, predict_decorated, Attach, DecorationKind, GraphDecoration,
    MultiGraph,
};
use momentforge::moment_map::emit_system;
use momentforge::polynomials::{poly_eval, poly_grad, x_vars, Poly};

const D_CHOICES: [i64; 7] = [2, 3, 5, 6, 7, 10, 13];

fn small_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn quad() -> impl Strategy<Value = QuadExt> {
    (small_rat(), small_rat(), 0usize..D_CHOICES.len()).prop_map(|(a, b, k)| QuadExt::new(a, b, D_CHOICES[k].into()))
}

/// `[lo, lo + 3]` containing `10^60 * (a + b sqrt(d))`, from integer square roots.
fn bracket(a: &Rat, b: &Rat, d: i64) -> (BigInt, BigInt) {
    let scale = BigInt::from(10).pow(60u32);
    let a_s = a * Rat::from_integer(scale.clone());
    let base = a_s.numer().div_floor(a_s.denom());
    let t = b * Rat::from_integer(scale);
    let t2d = &t * &t * Rat::from_integer(d.into());
    let root = t2d.numer().div_floor(t2d.denom()).sqrt();
    let lo = if *t.numer() >= BigInt::from(0) { base + root } else { base - root - 1 };
    let hi = &lo + 3;
    (lo, hi)
}

fn oracle_cmp(x: (&Rat, &Rat, i64), y: (&Rat, &Rat, i64)) -> Ordering {
    let (l1, h1) = bracket(x.0, x.1, x.2);
    let (l2, h2) = bracket(y.0, y.1, y.2);
    if h1 < l2 {
        Ordering::Less
    } else if h2 < l1 {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

fn small_poly(nvars: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..=3, nvars), small_rat()), 0..6)
        .prop_map(move |terms| Poly::from_terms(x_vars(nvars), terms))
}

fn small_graph(max_n: usize) -> impl Strategy<Value = MultiGraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..(2 * n)).prop_map(move |raw| {
            let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
            edges.extend(raw.into_iter().filter(|(a, b)| a != b));
            MultiGraph::new(n, edges).unwrap()
        })
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_isomorphic(g: &MultiGraph, h: &MultiGraph) -> bool {
    if g.n != h.n || g.edges.len() != h.edges.len() {
        return false;
    }
    let target = h.sorted_edges();
    permutations(g.n).into_iter().any(|p| {
        let mapped = MultiGraph { n: g.n, edges: g.edges.iter().map(|&(a, b)| (p[a], p[b])).collect() };
        mapped.sorted_edges() == target
    })
}

fn relabel(g: &MultiGraph, seed: u64) -> MultiGraph {
    let mut p: Vec<usize> = (0..g.n).collect();
    let mut s = seed;
    for i in (1..g.n).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        p.swap(i, (s >> 33) as usize % (i + 1));
    }
    MultiGraph { n: g.n, edges: g.edges.iter().rev().map(|&(a, b)| (p[b], p[a])).collect() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quad_cmp_matches_root_brackets(x in quad(), y in quad()) {
        let dx = x.field().map(|d| i64::try_from(d).unwrap()).unwrap_or(1);
        let dy = y.field().map(|d| i64::try_from(d).unwrap()).unwrap_or(1);
        let bx = if x.is_rational() { Rat::from_integer(0.into()) } else { x.b().clone() };
        let by = if y.is_rational() { Rat::from_integer(0.into()) } else { y.b().clone() };
        prop_assert_eq!(quad_cmp(&x, &y), oracle_cmp((x.a(), &bx, dx), (y.a(), &by, dy)));
    }

    #[test]
    fn quad_order_is_total(x in quad(), y in quad(), z in quad()) {
        prop_assert_eq!(quad_cmp(&x, &y), quad_cmp(&y, &x).reverse());
        if quad_cmp(&x, &y) != Ordering::Greater && quad_cmp(&y, &z) != Ordering::Greater {
            prop_assert_ne!(quad_cmp(&x, &z), Ordering::Greater);
        }
        prop_assert_eq!(quad_cmp(&x, &x), Ordering::Equal);
    }

    #[test]
    fn evaluation_is_a_ring_map(p in small_poly(3), q in small_poly(3), pt in prop::collection::vec(small_rat(), 3)) {
        prop_assert_eq!(p.mul(&q).eval_rat(&pt), p.eval_rat(&pt) * q.eval_rat(&pt));
        prop_assert_eq!(p.add(&q).eval_rat(&pt), p.eval_rat(&pt) + q.eval_rat(&pt));
        let qpt: Vec<QuadExt> = pt.iter().cloned().map(QuadExt::from_rat).collect();
        prop_assert_eq!(poly_eval(&p, &qpt).unwrap(), QuadExt::from_rat(p.eval_rat(&pt)));
    }

    #[test]
    fn gradient_matches_differences(p in small_poly(2), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let grad = poly_grad(&p);
        let h = 1e-5;
        for k in 0..2 {
            let mut a = [x, y];
            let mut b = [x, y];
            a[k] += h;
            b[k] -= h;
            let fd = (p.eval_f64(&a) - p.eval_f64(&b)) / (2.0 * h);
            let exact = grad[k].eval_f64(&[x, y]);
            prop_assert!((fd - exact).abs() < 1e-4 * (1.0 + exact.abs()), "{} vs {}", fd, exact);
        }
    }

    #[test]
    fn text_round_trip(p in small_poly(3)) {
        prop_assert_eq!(Poly::parse(&p.to_text(), &x_vars(3)).unwrap(), p);
    }

    #[test]
    fn isomorphism_matches_brute_force(g in small_graph(6), h in small_graph(6), seed in any::<u64>()) {
        prop_assert_eq!(is_isomorphic(&g, &h), brute_isomorphic(&g, &h));
        prop_assert!(is_isomorphic(&g, &relabel(&g, seed)));
    }

    #[test]
    fn gp_counts(nprime in 0usize..6, split in 0usize..6) {
        let j1 = split.min(nprime);
        let g = build_gp(nprime, j1, nprime - j1).unwrap();
        prop_assert_eq!(g.n, 3 * nprime + 2);
        prop_assert_eq!(g.edges.len(), 3 * nprime + 1);
        prop_assert_eq!(betti1(&g), Ok(0));
    }

    #[test]
    fn collapse_keeps_betti(g in small_graph(5), picks in prop::collection::vec((0usize..20, any::<bool>()), 0..4)) {
        let decorations: Vec<GraphDecoration> = picks
            .iter()
            .map(|&(e, first)| GraphDecoration {
                edge: e % g.edges.len(),
                kind: DecorationKind::Pendant,
                attach: if first { Attach::First } else { Attach::Second },
            })
            .collect();
        let big = predict_decorated(&g, &decorations).unwrap();
        prop_assert!(collapses_onto(&big, &g));
        prop_assert_eq!(betti1(&big), betti1(&g));
        prop_assert_eq!(big.n, g.n + 3 * decorations.len());
    }

    #[test]
    fn emitted_system_vanishes_on_lifts(seed in 0u64..300, px in -64i64..=64, py in -64i64..=64) {
        let Some(d) = common::random_arrangement(seed) else { return Ok(()) };
        let p = [rat(px, 16), rat(py, 16)];
        let prods = d.group_products(&p);
        let sys = emit_system(&d);
        let mut offset = d.n;
        for (i, poly) in sys.polys.iter().enumerate() {
            // y_i = (sqrt(product), 0, ...) when the product is non-negative
            let mut pt: Vec<QuadExt> = vec![QuadExt::zero(); sys.variables.len()];
            pt[0] = QuadExt::from_rat(p[0].clone());
            pt[1] = QuadExt::from_rat(p[1].clone());
            if prods[i] >= Rat::from_integer(0.into()) {
                pt[offset] = QuadExt::sqrt_rat(&prods[i]);
                prop_assert_eq!(poly_eval(poly, &pt).unwrap().sign(), 0);
            } else {
                prop_assert_eq!(poly_eval(poly, &pt).unwrap().sign(), -1);
            }
            offset += d.dim_map[i] + 1;
        }
    }

    #[test]
    fn documents_round_trip(seed in 0u64..300) {
        let Some(d) = common::random_arrangement(seed) else { return Ok(()) };
        let text = serialize_data(&d);
        prop_assert_eq!(serialize_data(&parse_input(&text).unwrap()), text);
    }
}
