//! Adding small circles to a valid arrangement so the Reeb graph changes in a prescribed way:
//! pendants (a new branch hanging off an edge) and chords (two extra vertices on an edge).

use std::collections::BTreeMap;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::arrangement::{circle_intersections, Circle, Orientation};
use crate::exact_arith::{int, QuadExt, Rat};
use crate::graph_ops::{build_gp, predict_decorated, Attach, DecorationKind, GraphDecoration, GraphError, MultiGraph};
use crate::moment_map::{validate_moment_data, MomentData, MomentError};
use crate::reeb_sweep::{reeb_graph, ReebError, ReebGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("DimensionError: {0}")]
    Dimension(String),
    #[error("PlacementFailure: {0}")]
    Placement(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Reeb(#[from] ReebError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Exponents `k` of the radius schedule `r_host / 2^k`.
const RADIUS_STEPS: std::ops::RangeInclusive<u32> = 1..=40;

#[derive(Clone, Debug)]
pub struct Placement {
    pub circle: Circle,
    /// Index of the base Reeb edge the circle decorates.
    pub edge: usize,
    pub kind: DecorationKind,
    pub attach: Attach,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub data: MomentData,
    pub base_graph: ReebGraph,
    pub predicted: MultiGraph,
    pub placements: Vec<Placement>,
}

/// How the new circles enter the group map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grouping {
    /// Old circles in group 1, new ones in group 2 of dimension `total_dim - m(1) - 2`.
    TwoGroups { total_dim: usize },
    /// Old groups kept, new circles in one extra group of dimension `new_dim`.
    NewGroup { new_dim: usize },
}

fn pow2(k: u32) -> Rat {
    Rat::from_integer(num_bigint::BigInt::one() << k)
}

/// Rational approximation with denominator `10^4`.
fn round_rat(x: f64) -> Rat {
    Rat::new(num_bigint::BigInt::from((x * 1e4).round() as i64), num_bigint::BigInt::from(10_000))
}

/// Rational point of circle `c` on its upper (`upper`) or lower half with abscissa near `x`.
fn point_on_circle(c: &Circle, x: f64, upper: bool) -> (Rat, Rat) {
    let (p1, _, r) = c.f64_params();
    let u = ((x - p1) / r).clamp(-0.999_999, 0.999_999);
    let s = ((1.0 - u) / (1.0 + u)).sqrt();
    let s = round_rat(if upper { s } else { -s });
    let den = Rat::one() + &s * &s;
    let cx = (Rat::one() - &s * &s) / &den;
    let sy = int(2) * &s / &den;
    (&c.center.0 + &c.radius * cx, &c.center.1 + &c.radius * sy)
}

struct EdgeInfo {
    host: usize,
    upper: bool,
    lo: QuadExt,
    hi: QuadExt,
}

fn edge_info(g: &ReebGraph, e: usize) -> Result<EdgeInfo, ConstructionError> {
    let edge = g.edges.get(e).ok_or(GraphError::UnknownEdge(e))?;
    let (host, upper) = match edge.upper {
        crate::arrangement::Bound::Arc { circle, upper } => (circle, upper),
        _ => return Err(ConstructionError::Precondition("unbounded edge".into())),
    };
    let (a, b) = (g.vertices[edge.u].x.clone(), g.vertices[edge.v].x.clone());
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    Ok(EdgeInfo { host, upper, lo, hi })
}

fn rebuild(base: &MomentData, circles: &[Circle], grouping: Grouping) -> Result<MomentData, ConstructionError> {
    let n_old = base.circles.len();
    let n_new = circles.len() - n_old;
    let (groups, dims) = match grouping {
        _ if n_new == 0 => (base.group_map.clone(), base.dim_map.clone()),
        Grouping::TwoGroups { total_dim } => {
            let m1 = base.dim_map[0];
            let new_dim = total_dim as i64 - m1 as i64 - 2;
            let mut g = vec![1; n_old];
            g.extend(std::iter::repeat_n(2, n_new));
            (g, vec![m1, new_dim.max(0) as usize])
        }
        Grouping::NewGroup { new_dim } => {
            let mut g = base.group_map.clone();
            g.extend(std::iter::repeat_n(base.l2() + 1, n_new));
            let mut d = base.dim_map.clone();
            d.push(new_dim);
            (g, d)
        }
    };
    let seed = (base.seed[0].clone(), base.seed[1].clone());
    Ok(MomentData::from_circles(circles.to_vec(), seed, groups, dims)?)
}

/// Checks a candidate circle appended to `circles`; returns the new data and, for pendants,
/// which side its closure pole is on.
#[allow(clippy::too_many_arguments)]
fn try_candidate(
    base: &MomentData,
    circles: &[Circle],
    cand: &Circle,
    info: &EdgeInfo,
    slot: (&QuadExt, &QuadExt),
    kind: DecorationKind,
    grouping: Grouping,
    taken: &[(QuadExt, QuadExt)],
) -> Option<(MomentData, Attach, (QuadExt, QuadExt))> {
    let left = QuadExt::from_rat(&cand.center.0 - &cand.radius);
    let right = QuadExt::from_rat(&cand.center.0 + &cand.radius);
    if left <= *slot.0 || right >= *slot.1 {
        return None;
    }
    for (i, c) in circles.iter().enumerate() {
        let pts = circle_intersections(c, cand).ok()?;
        let expected = if i == info.host { 2 } else { 0 };
        if pts.len() != expected {
            return None;
        }
    }
    let seed = [base.seed[0].clone(), base.seed[1].clone()];
    if !cand.poly().eval_rat(&seed).is_positive() {
        return None;
    }
    let mut all = circles.to_vec();
    all.push(cand.clone());
    let data = rebuild(base, &all, grouping).ok()?;
    if !validate_moment_data(&data).passed() {
        return None;
    }
    let region = data.region()?;
    let poles: Vec<_> = region.poles.iter().filter(|p| p.circle == cand.id && p.in_closure).collect();
    let want = if kind == DecorationKind::Chord { 0 } else { 1 };
    if poles.len() != want {
        return None;
    }
    let mut xs: Vec<QuadExt> = region
        .crossings
        .iter()
        .filter(|c| c.circles.1 == cand.id)
        .map(|c| c.x.clone())
        .chain(poles.iter().map(|p| QuadExt::from_rat(p.point.0.clone())))
        .collect();
    xs.sort();
    let range = (xs.first()?.clone(), xs.last()?.clone());
    if range.0 <= *slot.0 || range.1 >= *slot.1 {
        return None;
    }
    if taken.iter().any(|(a, b)| !(range.1 < *a || *b < range.0)) {
        return None;
    }
    let attach = match poles.first() {
        Some(p) if p.side == crate::arrangement::Side::Left => Attach::First,
        _ => Attach::Second,
    };
    Some((data, attach, range))
}

/// Pendant candidate: a circle of radius `r_host / 2^k` centred on the host arc.
fn pendant_candidate(host: &Circle, id: usize, center: &(Rat, Rat), k: u32) -> Circle {
    Circle::new(id, center.clone(), &host.radius / pow2(k), Orientation::Outside)
}

/// Chord candidate: centre pushed out of D along the normal at `q` by `lambda`, radius a
/// little more than `lambda`, so only a shallow cap dips into D.
fn chord_candidate(host: &Circle, id: usize, q: &(Rat, Rat), k: u32) -> Circle {
    let lambda = &host.radius / pow2(k);
    let s = &lambda / pow2(k + 2);
    let sign = if host.orientation == Orientation::Inside { Rat::one() } else { -Rat::one() };
    let nx = (&q.0 - &host.center.0) / &host.radius * &sign;
    let ny = (&q.1 - &host.center.1) / &host.radius * &sign;
    let center = (&q.0 + &lambda * nx, &q.1 + &lambda * ny);
    Circle::new(id, center, lambda + s, Orientation::Outside)
}

/// Places `count` circles of one kind along base edge `e`, trying a few spreads of target
/// abscissae; each circle is shrunk until every exact check passes.
#[allow(clippy::too_many_arguments)]
fn place_on_edge(
    base: &MomentData,
    base_graph: &ReebGraph,
    circles: &mut Vec<Circle>,
    placements: &mut Vec<Placement>,
    e: usize,
    count: usize,
    kind: DecorationKind,
    grouping: Grouping,
    targets: Option<Vec<f64>>,
) -> Result<MomentData, ConstructionError> {
    let info = edge_info(base_graph, e)?;
    let (lo, hi) = (info.lo.to_f64(), info.hi.to_f64());
    let host = circles[info.host].clone();
    let spreads: Vec<Vec<f64>> = match targets {
        Some(t) => vec![t],
        None => {
            let mut v = Vec::new();
            let top = host.f64_params().0;
            // a single chord sits best at the top or bottom of its host
            if kind == DecorationKind::Chord && count == 1 && top > lo && top < hi {
                v.push(vec![top]);
            }
            for extra in [2usize, 1, 3, 4, 5, 7] {
                v.push((0..count).map(|i| lo + (hi - lo) * (i + 1) as f64 / (count + extra) as f64).collect());
            }
            v
        }
    };
    for spread in spreads {
        let mut trial = circles.clone();
        let mut trial_places = Vec::new();
        let mut taken: Vec<(QuadExt, QuadExt)> = Vec::new();
        let mut last = None;
        for (i, &x) in spread.iter().enumerate() {
            let slot_lo = if i == 0 { info.lo.clone() } else { QuadExt::from_rat(round_rat(0.5 * (spread[i - 1] + x))) };
            let slot_hi =
                if i + 1 == spread.len() { info.hi.clone() } else { QuadExt::from_rat(round_rat(0.5 * (x + spread[i + 1]))) };
            let q = if kind == DecorationKind::Chord && (x - host.f64_params().0).abs() < 1e-12 {
                let dy = if info.upper { host.radius.clone() } else { -host.radius.clone() };
                (host.center.0.clone(), &host.center.1 + dy)
            } else {
                point_on_circle(&host, x, info.upper)
            };
            let id = trial.len() + 1;
            let found = RADIUS_STEPS.clone().find_map(|k| {
                let cand = match kind {
                    DecorationKind::Chord => chord_candidate(&host, id, &q, k),
                    _ => pendant_candidate(&host, id, &q, k),
                };
                try_candidate(base, &trial, &cand, &info, (&slot_lo, &slot_hi), kind, grouping, &taken).map(|r| (cand, r))
            });
            let Some((cand, (data, attach, range))) = found else {
                last = None;
                break;
            };
            taken.push(range);
            trial.push(cand.clone());
            trial_places.push(Placement { circle: cand, edge: e, kind, attach });
            last = Some(data);
        }
        if let Some(data) = last {
            *circles = trial;
            trial_places.sort_by(|a, b| a.circle.center.0.cmp(&b.circle.center.0));
            placements.extend(trial_places);
            return Ok(data);
        }
    }
    Err(ConstructionError::Placement(format!("could not place {count} circle(s) on edge {e}")))
}

fn finish(
    base: &MomentData,
    base_graph: ReebGraph,
    circles: Vec<Circle>,
    placements: Vec<Placement>,
    grouping: Grouping,
    last: Option<MomentData>,
) -> Result<Construction, ConstructionError> {
    let data = match last {
        Some(d) => d,
        None => rebuild(base, &circles, grouping)?,
    };
    let decorations: Vec<GraphDecoration> =
        placements.iter().map(|p| GraphDecoration { edge: p.edge, kind: p.kind, attach: p.attach }).collect();
    let predicted = predict_decorated(&base_graph.to_multigraph(), &decorations)?;
    Ok(Construction { data, base_graph, predicted, placements })
}

fn check_two_group_base(base: &MomentData, total_dim: usize) -> Result<(), ConstructionError> {
    if base.l2() != 1 {
        return Err(ConstructionError::Precondition("the base must have a single group".into()));
    }
    if base.region().is_some_and(|r| !r.crossings.is_empty()) {
        return Err(ConstructionError::Precondition("the base circles must be mutually disjoint".into()));
    }
    if total_dim <= base.dim_map[0] + 2 {
        return Err(ConstructionError::Dimension(format!(
            "total dimension {total_dim} must exceed m(1) + 2 = {}",
            base.dim_map[0] + 2
        )));
    }
    Ok(())
}

fn attach_many(
    base: &MomentData,
    alloc: &BTreeMap<usize, usize>,
    kind: DecorationKind,
    grouping: Grouping,
) -> Result<Construction, ConstructionError> {
    let base_graph = reeb_graph(base)?;
    let mut circles = base.circles.clone();
    let mut placements = Vec::new();
    let mut last = None;
    for (&e, &count) in alloc {
        if count == 0 {
            continue;
        }
        last = Some(place_on_edge(base, &base_graph, &mut circles, &mut placements, e, count, kind, grouping, None)?);
    }
    finish(base, base_graph, circles, placements, grouping, last)
}

/// Hangs `alloc[e]` small circles off each edge `e`; old circles form group 1 and the new
/// ones group 2, of dimension `total_dim - m(1) - 2`.
pub fn attach_pendant_circles(
    base: &MomentData,
    alloc: &BTreeMap<usize, usize>,
    total_dim: usize,
) -> Result<Construction, ConstructionError> {
    check_two_group_base(base, total_dim)?;
    attach_many(base, alloc, DecorationKind::Pendant, Grouping::TwoGroups { total_dim })
}

/// One pendant circle on `edge` forming a new group of dimension `new_dim`.
pub fn attach_factor_circle(base: &MomentData, edge: usize, new_dim: usize) -> Result<Construction, ConstructionError> {
    if new_dim == 0 {
        return Err(ConstructionError::Dimension("the new group needs a positive dimension".into()));
    }
    if base.dim_map.contains(&0) {
        return Err(ConstructionError::Dimension("all base dimensions must be positive".into()));
    }
    let alloc = BTreeMap::from([(edge, 1)]);
    attach_many(base, &alloc, DecorationKind::FactorPendant, Grouping::NewGroup { new_dim })
}

/// Chord variant: `TwoGroups` for several edges with old/new groups, `NewGroup` for a
/// single circle in an extra group.
pub fn attach_chord_circles(
    base: &MomentData,
    alloc: &BTreeMap<usize, usize>,
    grouping: Grouping,
) -> Result<Construction, ConstructionError> {
    match grouping {
        Grouping::TwoGroups { total_dim } => check_two_group_base(base, total_dim)?,
        Grouping::NewGroup { new_dim } => {
            if new_dim == 0 {
                return Err(ConstructionError::Dimension("the new group needs a positive dimension".into()));
            }
            if alloc.values().sum::<usize>() > 1 {
                return Err(ConstructionError::Precondition("a new group takes exactly one chord circle".into()));
            }
        }
    }
    attach_many(base, alloc, DecorationKind::Chord, grouping)
}

/// Unit disk with `j1` pendants on the left half and `j2` on the right half of the upper
/// arc; the prediction is `build_gp(nprime, j1, j2)`.
pub fn mt6(nprime: usize, j1: usize, j2: usize, total_dim: usize) -> Result<Construction, ConstructionError> {
    let gp = build_gp(nprime, j1, j2)?;
    let base = crate::fixtures::disk();
    check_two_group_base(&base, total_dim)?;
    let grouping = Grouping::TwoGroups { total_dim };
    let base_graph = reeb_graph(&base)?;
    let mut circles = base.circles.clone();
    let mut placements = Vec::new();
    let mut last = None;
    if nprime > 0 {
        let targets: Vec<f64> = (0..j1)
            .map(|i| -1.0 + (i + 1) as f64 / (j1 + 1) as f64)
            .chain((0..j2).map(|i| (i + 1) as f64 / (j2 + 1) as f64))
            .collect();
        last = Some(place_on_edge(
            &base,
            &base_graph,
            &mut circles,
            &mut placements,
            0,
            nprime,
            DecorationKind::Pendant,
            grouping,
            Some(targets),
        )?);
    }
    let mut c = finish(&base, base_graph, circles, placements, grouping, last)?;
    c.predicted = gp;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph_ops::{collapses_onto, is_homeomorphic, is_isomorphic};

    fn computed(c: &Construction) -> MultiGraph {
        reeb_graph(&c.data).unwrap().to_multigraph()
    }

    #[test]
    fn pendant_on_annulus() {
        let base = fixtures::annulus();
        let c = attach_pendant_circles(&base, &BTreeMap::from([(1, 1)]), 4).unwrap();
        let g = computed(&c);
        assert_eq!((g.n, g.edges.len()), (7, 7));
        assert!(collapses_onto(&g, &c.base_graph.to_multigraph()));
        assert!(is_isomorphic(&g, &c.predicted));
        assert_eq!(c.data.dim_map, vec![1, 1]);
    }

    #[test]
    fn zero_allocation_is_identity() {
        let base = fixtures::annulus();
        let c = attach_pendant_circles(&base, &BTreeMap::from([(0, 0)]), 4).unwrap();
        assert_eq!(c.data.circles.len(), 2);
        assert!(is_isomorphic(&c.predicted, &c.base_graph.to_multigraph()));
    }

    #[test]
    fn dimension_guard() {
        let base = fixtures::annulus();
        assert!(matches!(
            attach_pendant_circles(&base, &BTreeMap::from([(0, 1)]), 3),
            Err(ConstructionError::Dimension(_))
        ));
        assert!(matches!(attach_factor_circle(&base, 0, 0), Err(ConstructionError::Dimension(_))));
    }

    #[test]
    fn factor_circle() {
        let c = attach_factor_circle(&fixtures::annulus(), 1, 2).unwrap();
        assert_eq!(c.data.m(), 5);
        let g = computed(&c);
        assert_eq!((g.n, g.edges.len()), (7, 7));
        assert!(is_isomorphic(&g, &c.predicted));
        let c = attach_factor_circle(&fixtures::disk(), 0, 1).unwrap();
        assert_eq!(computed(&c).n, 5);
    }

    #[test]
    fn chords() {
        let base = fixtures::annulus();
        let c = attach_chord_circles(&base, &BTreeMap::from([(1, 1)]), Grouping::TwoGroups { total_dim: 4 }).unwrap();
        let g = computed(&c);
        assert_eq!((g.n, g.edges.len()), (6, 6));
        assert!(is_homeomorphic(&g, &c.base_graph.to_multigraph()));
        let c = attach_chord_circles(&fixtures::disk(), &BTreeMap::from([(0, 1)]), Grouping::NewGroup { new_dim: 1 })
            .unwrap();
        assert_eq!(computed(&c).n, 4);
    }

    #[test]
    fn mt6_small() {
        let c = mt6(0, 0, 0, 4).unwrap();
        assert_eq!(computed(&c), MultiGraph::path(2));
        let c = mt6(2, 1, 1, 4).unwrap();
        assert!(is_isomorphic(&computed(&c), &c.predicted));
    }
}
