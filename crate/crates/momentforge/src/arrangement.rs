//! Circle arrangements in the plane: exact crossings and poles, the region picked out by a
//! seed, its slab decomposition and the validation of the arrangement hypotheses.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{int, rat_to_f64, QuadExt, Rat};
use crate::polynomials::{circle_poly, poly_eval, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Positive inside the circle.
    Inside,
    /// Positive outside the circle.
    Outside,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circle {
    pub id: usize,
    pub center: (Rat, Rat),
    pub radius: Rat,
    pub orientation: Orientation,
}

impl Circle {
    pub fn new(id: usize, center: (Rat, Rat), radius: Rat, orientation: Orientation) -> Self {
        Circle { id, center, radius, orientation }
    }

    pub fn poly(&self) -> Poly {
        circle_poly(self)
    }

    /// Signed value of the circle polynomial at a float point.
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let (p1, p2, r) = self.f64_params();
        let v = (x - p1).powi(2) + (y - p2).powi(2) - r * r;
        match self.orientation {
            Orientation::Outside => v,
            Orientation::Inside => -v,
        }
    }

    pub fn f64_params(&self) -> (f64, f64, f64) {
        (rat_to_f64(&self.center.0), rat_to_f64(&self.center.1), rat_to_f64(&self.radius))
    }

    fn sign_at_infinity(&self) -> i8 {
        match self.orientation {
            Orientation::Outside => 1,
            Orientation::Inside => -1,
        }
    }

    /// `r^2 - (x - p1)^2`, the squared half-chord of the vertical line at `x`.
    fn half_chord_sq(&self, x: &QuadExt) -> QuadExt {
        let dx = x.add_rat(&-&self.center.0);
        dx.square().scale(&-Rat::one()).add_rat(&(&self.radius * &self.radius))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingPoint {
    /// Circle ids, smaller first.
    pub circles: (usize, usize),
    pub x: QuadExt,
    pub y: QuadExt,
    pub in_closure: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pole {
    pub circle: usize,
    pub side: Side,
    pub point: (Rat, Rat),
    pub in_closure: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error("circles {0} and {1} are tangent at ({x}, {y})", x = .2.0, y = .2.1)]
    Tangency(usize, usize, Box<(QuadExt, QuadExt)>),
    #[error("circles {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("seed is not in the positivity region")]
    SeedOutside,
    #[error("the component of the positivity region containing the seed is unbounded")]
    UnboundedRegion,
    #[error("invalid circle data: {0}")]
    InvalidInput(String),
    #[error("degenerate arrangement: {0}")]
    Degenerate(ValidationReport),
}

/// Exact intersection of two circles: zero or two transversal crossing points, sorted by `(x, y)`.
pub fn circle_intersections(c1: &Circle, c2: &Circle) -> Result<Vec<CrossingPoint>, ArrangementError> {
    let (p1, p2) = (&c1.center.0, &c1.center.1);
    let (q1, q2) = (&c2.center.0, &c2.center.1);
    let (r1, r2) = (&c1.radius, &c2.radius);
    let dx = q1 - p1;
    let dy = q2 - p2;
    let dist2 = &dx * &dx + &dy * &dy;
    let ids = (c1.id.min(c2.id), c1.id.max(c2.id));
    if dist2.is_zero() {
        if r1 == r2 {
            return Err(ArrangementError::Coincident(ids.0, ids.1));
        }
        return Ok(vec![]);
    }
    let sum = r1 + r2;
    let diff = r1 - r2;
    let sum2 = &sum * &sum;
    let diff2 = &diff * &diff;
    if dist2 > sum2 || dist2 < diff2 {
        return Ok(vec![]);
    }
    if dist2 == sum2 || dist2 == diff2 {
        let d = if dist2 == sum2 { sum } else { diff };
        let k = r1 / d;
        let x = QuadExt::from_rat(p1 + &k * &dx);
        let y = QuadExt::from_rat(p2 + &k * &dy);
        return Err(ArrangementError::Tangency(ids.0, ids.1, Box::new((x, y))));
    }
    let kk = r1 * r1 - r2 * r2 - p1 * p1 - p2 * p2 + q1 * q1 + q2 * q2;
    let two = int(2);
    let mut pts = Vec::with_capacity(2);
    if !dy.is_zero() {
        let alpha = &kk / (&two * &dy);
        let beta = -&dx / &dy;
        let am = &alpha - p2;
        let a = Rat::one() + &beta * &beta;
        let b = &two * (-p1 + &beta * &am);
        let c = p1 * p1 + &am * &am - r1 * r1;
        let disc = &b * &b - int(4) * &a * &c;
        let root = QuadExt::sqrt_rat(&disc);
        let base = -&b / (&two * &a);
        let inv2a = (&two * &a).recip();
        for s in [-1, 1] {
            let x = root.scale(&(&inv2a * int(s))).add_rat(&base);
            let y = x.scale(&beta).add_rat(&alpha);
            pts.push((x, y));
        }
    } else {
        let x = &kk / (&two * &dx);
        let h2 = r1 * r1 - (&x - p1) * (&x - p1);
        let root = QuadExt::sqrt_rat(&h2);
        for s in [-1, 1] {
            let y = root.scale(&int(s)).add_rat(p2);
            pts.push((QuadExt::from_rat(x.clone()), y));
        }
    }
    pts.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(pts.into_iter().map(|(x, y)| CrossingPoint { circles: ids, x, y, in_closure: false }).collect())
}

/// Left pole `(p1 - r, p2)` and right pole `(p1 + r, p2)`.
pub fn vertical_poles(c: &Circle) -> (Pole, Pole) {
    let (p1, p2) = &c.center;
    let mk = |side, x: Rat| Pole { circle: c.id, side, point: (x, p2.clone()), in_closure: false };
    (mk(Side::Left, p1 - &c.radius), mk(Side::Right, p1 + &c.radius))
}

/// A boundary of a vertical interval: one half of a circle (by index) or an infinite end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    NegInf,
    Arc { circle: usize, upper: bool },
    PosInf,
}

impl Bound {
    pub fn circle(&self) -> Option<usize> {
        match self {
            Bound::Arc { circle, .. } => Some(*circle),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-inf"),
            Bound::PosInf => write!(f, "+inf"),
            Bound::Arc { circle, upper } => write!(f, "c{}{}", circle + 1, if *upper { "+" } else { "-" }),
        }
    }
}

/// Maximal open vertical interval of the positivity set at a slab sample.
#[derive(Clone, Debug)]
pub struct Segment {
    pub lower: Bound,
    pub upper: Bound,
    pub component: usize,
    pub in_d: bool,
}

/// Open vertical strip between consecutive event abscissae.
#[derive(Clone, Debug)]
pub struct Slab {
    /// Rational sample abscissa strictly inside the strip.
    pub t: Rat,
    /// Circle halves crossing the strip, bottom to top.
    pub arcs: Vec<Bound>,
    pub segments: Vec<Segment>,
}

/// A pole or crossing, with coinciding ones merged.
#[derive(Clone, Debug)]
pub struct EventPoint {
    pub x: QuadExt,
    pub y: QuadExt,
    pub x_index: usize,
    /// Indices into `Region::poles`.
    pub poles: Vec<usize>,
    /// Indices into `Region::crossings`.
    pub crossings: Vec<usize>,
    /// Circle indices through the point.
    pub circles: Vec<usize>,
    pub arcs: Vec<Bound>,
    pub in_closure: bool,
}

#[derive(Clone, Debug)]
pub struct SkeletonVertex {
    pub x: QuadExt,
    /// Indices into `Region::events`.
    pub events: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SkeletonEdge {
    pub u: usize,
    pub v: usize,
    pub lower: Bound,
    pub upper: Bound,
}

/// Vertices at the closure events of D, edges along chains of D-segments, left to right.
#[derive(Clone, Debug, Default)]
pub struct Skeleton {
    pub vertices: Vec<SkeletonVertex>,
    pub edges: Vec<SkeletonEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stratum {
    Interior,
    /// Circle ids through the point.
    OnCircles(Vec<usize>),
    Outside,
}

/// The connected component D of `{f_j > 0}` containing the seed, together with its sweep data.
#[derive(Clone, Debug)]
pub struct Region {
    pub circles: Vec<Circle>,
    pub polys: Vec<Poly>,
    pub seed: (Rat, Rat),
    pub crossings: Vec<CrossingPoint>,
    pub poles: Vec<Pole>,
    pub hole_count: usize,
    /// `(xmin, xmax, ymin, ymax)`: the circles' box inflated by 1.
    pub bbox: (Rat, Rat, Rat, Rat),
    pub xs: Vec<QuadExt>,
    pub slabs: Vec<Slab>,
    pub events: Vec<EventPoint>,
    pub skeleton: Skeleton,
    d_component: usize,
}

impl Region {
    pub fn boundary_crossings(&self) -> impl Iterator<Item = &CrossingPoint> {
        self.crossings.iter().filter(|c| c.in_closure)
    }

    pub fn boundary_poles(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(|p| p.in_closure)
    }

    pub fn circle_by_id(&self, id: usize) -> &Circle {
        &self.circles[id - 1]
    }

    pub fn closure_events(&self) -> impl Iterator<Item = &EventPoint> {
        self.events.iter().filter(|e| e.in_closure)
    }

    /// Float evaluation of every circle polynomial.
    pub fn values_f64(&self, x: f64, y: f64) -> Vec<f64> {
        self.circles.iter().map(|c| c.eval_f64(x, y)).collect()
    }

    /// Whether a float point with all `f_j > 0` lies in D rather than another component.
    pub fn in_d_f64(&self, x: f64, y: f64) -> bool {
        if self.circles.iter().any(|c| c.eval_f64(x, y) <= 0.0) {
            return false;
        }
        let k = self.xs.partition_point(|e| e.to_f64() < x);
        let slab = &self.slabs[k];
        let below = slab
            .arcs
            .iter()
            .filter(|b| match b {
                Bound::Arc { circle, upper } => {
                    let (p1, p2, r) = self.circles[*circle].f64_params();
                    let h = (r * r - (x - p1).powi(2)).max(0.0).sqrt();
                    let ya = if *upper { p2 + h } else { p2 - h };
                    ya < y
                }
                _ => false,
            })
            .count();
        let lower = if below == 0 { Bound::NegInf } else { slab.arcs[below - 1] };
        slab.segments.iter().any(|s| s.lower == lower && s.in_d)
    }

    fn slab_of(&self, x: &QuadExt) -> Result<usize, usize> {
        let k = self.xs.partition_point(|e| e < x);
        if k < self.xs.len() && &self.xs[k] == x {
            Err(k)
        } else {
            Ok(k)
        }
    }

    /// Compares a point with circle half `b` on the vertical line through it; the half must
    /// exist at that abscissa.
    fn cmp_point_arc(&self, px: &QuadExt, py: &QuadExt, b: Bound) -> Ordering {
        match b {
            Bound::NegInf => Ordering::Greater,
            Bound::PosInf => Ordering::Less,
            Bound::Arc { circle, upper } => {
                let c = &self.circles[circle];
                let h2 = c.half_chord_sq(px);
                let w = py.add_rat(&-&c.center.1);
                let ws = w.sign();
                let mag = w.square().checked_sub(&h2).expect("single field").sign();
                // compare w with +sqrt(h2) or -sqrt(h2)
                if upper {
                    match ws {
                        s if s <= 0 => {
                            if ws == 0 && h2.sign() == 0 {
                                Ordering::Equal
                            } else {
                                Ordering::Less
                            }
                        }
                        _ => mag.cmp(&0),
                    }
                } else {
                    match ws {
                        s if s >= 0 => {
                            if ws == 0 && h2.sign() == 0 {
                                Ordering::Equal
                            } else {
                                Ordering::Greater
                            }
                        }
                        _ => 0.cmp(&mag),
                    }
                }
            }
        }
    }

    /// Segment of slab `k` containing a point of the positivity set strictly inside the slab.
    fn segment_at(&self, k: usize, px: &QuadExt, py: &QuadExt) -> Option<usize> {
        let slab = &self.slabs[k];
        let below = slab.arcs.iter().filter(|&&b| self.cmp_point_arc(px, py, b) == Ordering::Greater).count();
        let lower = if below == 0 { Bound::NegInf } else { slab.arcs[below - 1] };
        slab.segments.iter().position(|s| s.lower == lower)
    }

    fn eval_all(&self, px: &QuadExt, py: &QuadExt) -> Vec<i8> {
        self.polys
            .iter()
            .map(|p| poly_eval(p, &[px.clone(), py.clone()]).expect("single field").sign())
            .collect()
    }

    /// Interior point of the positivity set: which slab segment holds it, shifting it
    /// horizontally off an event abscissa when needed.
    fn interior_segment(&self, px: &QuadExt, py: &QuadExt) -> Option<(usize, usize)> {
        match self.slab_of(px) {
            Ok(k) => self.segment_at(k, px, py).map(|s| (k, s)),
            Err(j) => {
                let gap = if j + 1 < self.xs.len() {
                    let g = self.xs[j + 1].to_f64() - self.xs[j].to_f64();
                    crate::exact_arith::rat_from_f64(g.max(1e-9))
                } else {
                    Rat::one()
                };
                let mut delta = gap / int(2);
                for _ in 0..80 {
                    let nx = px.add_rat(&delta);
                    if let Ok(k) = self.slab_of(&nx) {
                        if k == j + 1 && self.eval_all(&nx, py).iter().all(|&s| s > 0) {
                            return self.segment_at(k, &nx, py).map(|s| (k, s));
                        }
                    }
                    delta /= int(2);
                }
                None
            }
        }
    }

    /// Stratum of an exact point whose coordinates share one quadratic field.
    pub fn locate(&self, px: &QuadExt, py: &QuadExt) -> Stratum {
        let signs = self.eval_all(px, py);
        if signs.iter().any(|&s| s < 0) {
            return Stratum::Outside;
        }
        let zeros: Vec<usize> = signs.iter().enumerate().filter(|(_, &s)| s == 0).map(|(i, _)| i).collect();
        if zeros.is_empty() {
            return match self.interior_segment(px, py) {
                Some((k, s)) if self.slabs[k].segments[s].in_d => Stratum::Interior,
                _ => Stratum::Outside,
            };
        }
        let ids: Vec<usize> = zeros.iter().map(|i| self.circles[*i].id).collect();
        let in_closure = match self.slab_of(px) {
            Err(j) => {
                if let Some(e) = self.events.iter().find(|e| e.x_index == j && &e.y == py) {
                    e.in_closure
                } else {
                    self.arc_bounds_d(j, zeros[0], px, py)
                }
            }
            Ok(k) => self.arc_bounds_d(k, zeros[0], px, py),
        };
        if in_closure {
            Stratum::OnCircles(ids)
        } else {
            Stratum::Outside
        }
    }

    fn arc_bounds_d(&self, k: usize, circle: usize, _px: &QuadExt, py: &QuadExt) -> bool {
        let upper = py > &QuadExt::from_rat(self.circles[circle].center.1.clone());
        let arc = Bound::Arc { circle, upper };
        self.slabs[k].segments.iter().any(|s| s.in_d && (s.lower == arc || s.upper == arc))
    }
}

/// Stratum of a point with respect to the region.
pub fn locate_point(region: &Region, p: (&QuadExt, &QuadExt)) -> Stratum {
    region.locate(p.0, p.1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Violation {
    Tangency { circles: (usize, usize), point: (QuadExt, QuadExt) },
    Coincident { circles: (usize, usize) },
    TriplePoint { circles: Vec<usize>, point: (QuadExt, QuadExt) },
    PoleOnCircle { pole_circle: usize, side: Side, other: usize, point: (Rat, Rat) },
    Genericity { x: QuadExt, first: (QuadExt, QuadExt), second: (QuadExt, QuadExt) },
    MissesBoundary { circle: usize },
    NotSurjective { group: usize },
    InjectivityViolation { circles: (usize, usize), group: usize, point: (QuadExt, QuadExt) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Tangency { circles, point } => {
                write!(f, "TangencyError: circles {} and {} touch at ({}, {})", circles.0, circles.1, point.0, point.1)
            }
            Violation::Coincident { circles } => {
                write!(f, "CoincidentError: circles {} and {} coincide", circles.0, circles.1)
            }
            Violation::TriplePoint { circles, point } => {
                let ids: Vec<String> = circles.iter().map(|c| c.to_string()).collect();
                write!(f, "TriplePointError: circles {} meet at ({}, {})", ids.join(", "), point.0, point.1)
            }
            Violation::PoleOnCircle { pole_circle, side, other, point } => write!(
                f,
                "PoleOnCircleError: circle {other} passes through the {} pole ({}, {}) of circle {pole_circle}",
                match side {
                    Side::Left => "left",
                    Side::Right => "right",
                },
                point.0,
                point.1
            ),
            Violation::Genericity { x, first, second } => write!(
                f,
                "GenericityError: events ({}, {}) and ({}, {}) share x = {}",
                first.0, first.1, second.0, second.1, x
            ),
            Violation::MissesBoundary { circle } => {
                write!(f, "BoundaryError: circle {circle} does not meet the boundary of D")
            }
            Violation::NotSurjective { group } => write!(f, "NotSurjective: group {group} has no circles"),
            Violation::InjectivityViolation { circles, group, point } => write!(
                f,
                "InjectivityViolation: circles {} and {} cross at ({}, {}) but share group {group}",
                circles.0, circles.1, point.0, point.1
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "pass");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("; "))
    }
}

/// Clauses that only make sense once D is known: no triple points or circles through poles
/// on the closure, distinct event abscissae there, and every circle touching the boundary.
pub fn validate_arrangement(region: &Region) -> ValidationReport {
    let mut v = Vec::new();
    for e in region.closure_events() {
        if e.circles.len() >= 3 {
            let mut ids: Vec<usize> = e.circles.iter().map(|c| c + 1).collect();
            ids.sort();
            v.push(Violation::TriplePoint { circles: ids, point: (e.x.clone(), e.y.clone()) });
        }
        for &pi in &e.poles {
            let pole = &region.poles[pi];
            for &c in &e.circles {
                if c + 1 != pole.circle {
                    v.push(Violation::PoleOnCircle {
                        pole_circle: pole.circle,
                        side: pole.side,
                        other: c + 1,
                        point: pole.point.clone(),
                    });
                }
            }
        }
    }
    let mut by_x: HashMap<usize, Vec<&EventPoint>> = HashMap::new();
    for e in region.closure_events() {
        by_x.entry(e.x_index).or_default().push(e);
    }
    let mut keys: Vec<usize> = by_x.keys().copied().collect();
    keys.sort();
    for k in keys {
        let es = &by_x[&k];
        for w in es.windows(2) {
            v.push(Violation::Genericity {
                x: w[0].x.clone(),
                first: (w[0].x.clone(), w[0].y.clone()),
                second: (w[1].x.clone(), w[1].y.clone()),
            });
        }
    }
    for (i, c) in region.circles.iter().enumerate() {
        let touches = region
            .slabs
            .iter()
            .any(|s| s.segments.iter().any(|g| g.in_d && (g.lower.circle() == Some(i) || g.upper.circle() == Some(i))));
        if !touches {
            v.push(Violation::MissesBoundary { circle: c.id });
        }
    }
    ValidationReport { violations: v }
}

fn check_circles(circles: &[Circle]) -> Result<(), ArrangementError> {
    if circles.is_empty() {
        return Err(ArrangementError::InvalidInput("no circles".into()));
    }
    for (i, c) in circles.iter().enumerate() {
        if c.id != i + 1 {
            return Err(ArrangementError::InvalidInput(format!(
                "circle ids must be 1..{} in order, found {} at position {}",
                circles.len(),
                c.id,
                i + 1
            )));
        }
        if !c.radius.is_positive() {
            return Err(ArrangementError::InvalidInput(format!("circle {} has non-positive radius", c.id)));
        }
    }
    Ok(())
}

/// Rational strictly between `lo < hi`, with a short decimal expansion.
pub fn rational_between(lo: &QuadExt, hi: &QuadExt) -> Rat {
    debug_assert!(lo < hi);
    let mut scale = BigInt::one();
    loop {
        let s = Rat::from_integer(scale.clone());
        let a = lo.scale(&s).floor();
        let b = hi.scale(&s).floor();
        if &b - &a >= BigInt::from(2) {
            let k: BigInt = (&a + &b + BigInt::one()).div_floor(&BigInt::from(2));
            return Rat::new(k, scale);
        }
        scale *= 10;
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let n = self.0[j];
            self.0[j] = r;
            j = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn pairwise_points(circles: &[Circle]) -> Result<Vec<CrossingPoint>, ArrangementError> {
    let mut crossings = Vec::new();
    let mut report = ValidationReport::default();
    let mut touch_points: Vec<(usize, usize, QuadExt, QuadExt)> = Vec::new();
    for i in 0..circles.len() {
        for j in i + 1..circles.len() {
            match circle_intersections(&circles[i], &circles[j]) {
                Ok(ps) => {
                    for p in &ps {
                        touch_points.push((i, j, p.x.clone(), p.y.clone()));
                    }
                    crossings.extend(ps);
                }
                Err(ArrangementError::Tangency(a, b, point)) => {
                    touch_points.push((i, j, point.0.clone(), point.1.clone()));
                    report.violations.push(Violation::Tangency { circles: (a, b), point: *point });
                }
                Err(ArrangementError::Coincident(a, b)) => {
                    report.violations.push(Violation::Coincident { circles: (a, b) });
                }
                Err(e) => return Err(e),
            }
        }
    }
    if report.passed() {
        return Ok(crossings);
    }
    let polys: Vec<Poly> = circles.iter().map(circle_poly).collect();
    let mut seen: Vec<(QuadExt, QuadExt)> = Vec::new();
    for (i, j, x, y) in &touch_points {
        if seen.iter().any(|(sx, sy)| sx == x && sy == y) {
            continue;
        }
        let mut on: Vec<usize> = (0..circles.len())
            .filter(|k| k == i || k == j || poly_eval(&polys[*k], &[x.clone(), y.clone()]).map(|v| v.sign() == 0).unwrap_or(false))
            .map(|k| circles[k].id)
            .collect();
        on.sort();
        on.dedup();
        if on.len() >= 3 {
            seen.push((x.clone(), y.clone()));
            report.violations.push(Violation::TriplePoint { circles: on, point: (x.clone(), y.clone()) });
        }
    }
    Err(ArrangementError::Degenerate(report))
}

fn slab_arcs_and_segments(circles: &[Circle], t: &Rat) -> (Vec<Bound>, Vec<Segment>) {
    let tq = QuadExt::from_rat(t.clone());
    let mut arcs: Vec<(QuadExt, Bound)> = Vec::new();
    for (i, c) in circles.iter().enumerate() {
        let h2 = c.half_chord_sq(&tq);
        let h2 = h2.as_rat().expect("rational").clone();
        if h2.is_positive() {
            let h = QuadExt::sqrt_rat(&h2);
            arcs.push(((-&h).add_rat(&c.center.1), Bound::Arc { circle: i, upper: false }));
            arcs.push((h.add_rat(&c.center.1), Bound::Arc { circle: i, upper: true }));
        }
    }
    arcs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut signs: Vec<i8> = circles.iter().map(Circle::sign_at_infinity).collect();
    let mut negatives = signs.iter().filter(|&&s| s < 0).count();
    let mut segments = Vec::new();
    let mut current = Bound::NegInf;
    for (_, b) in &arcs {
        if negatives == 0 {
            segments.push(Segment { lower: current, upper: *b, component: 0, in_d: false });
        }
        let ci = b.circle().expect("arc");
        signs[ci] = -signs[ci];
        if signs[ci] < 0 {
            negatives += 1;
        } else {
            negatives -= 1;
        }
        current = *b;
    }
    if negatives == 0 {
        segments.push(Segment { lower: current, upper: Bound::PosInf, component: 0, in_d: false });
    }
    (arcs.into_iter().map(|(_, b)| b).collect(), segments)
}

/// Builds D from circles and a rational seed with every `f_j(seed) > 0`.
pub fn region_from_seed(circles: Vec<Circle>, seed: (Rat, Rat)) -> Result<Region, ArrangementError> {
    check_circles(&circles)?;
    let polys: Vec<Poly> = circles.iter().map(circle_poly).collect();
    let seed_pt = [seed.0.clone(), seed.1.clone()];
    if polys.iter().any(|p| !p.eval_rat(&seed_pt).is_positive()) {
        return Err(ArrangementError::SeedOutside);
    }
    let mut crossings = pairwise_points(&circles)?;
    let mut poles: Vec<Pole> = Vec::new();
    for c in &circles {
        let (l, r) = vertical_poles(c);
        poles.push(l);
        poles.push(r);
    }

    // Event abscissae of the whole arrangement.
    let mut xs: Vec<QuadExt> = poles
        .iter()
        .map(|p| QuadExt::from_rat(p.point.0.clone()))
        .chain(crossings.iter().map(|c| c.x.clone()))
        .collect();
    xs.sort();
    xs.dedup();

    // Merge coinciding poles and crossings into event points.
    let mut events: Vec<EventPoint> = Vec::new();
    let mut add_event = |x: QuadExt, y: QuadExt, pole: Option<usize>, crossing: Option<usize>, cs: &[usize]| {
        let k = xs.partition_point(|e| e < &x);
        let pos = events.iter().position(|e| e.x_index == k && e.y == y);
        let e = match pos {
            Some(p) => &mut events[p],
            None => {
                events.push(EventPoint {
                    x,
                    y,
                    x_index: k,
                    poles: vec![],
                    crossings: vec![],
                    circles: vec![],
                    arcs: vec![],
                    in_closure: false,
                });
                events.last_mut().unwrap()
            }
        };
        e.poles.extend(pole);
        e.crossings.extend(crossing);
        for &c in cs {
            if !e.circles.contains(&c) {
                e.circles.push(c);
            }
        }
    };
    for (i, p) in poles.iter().enumerate() {
        add_event(
            QuadExt::from_rat(p.point.0.clone()),
            QuadExt::from_rat(p.point.1.clone()),
            Some(i),
            None,
            &[p.circle - 1],
        );
    }
    for (i, c) in crossings.iter().enumerate() {
        add_event(c.x.clone(), c.y.clone(), None, Some(i), &[c.circles.0 - 1, c.circles.1 - 1]);
    }
    for e in events.iter_mut() {
        e.circles.sort();
        let mut arcs = Vec::new();
        for &ci in &e.circles {
            let cy = QuadExt::from_rat(circles[ci].center.1.clone());
            match e.y.cmp(&cy) {
                Ordering::Greater => arcs.push(Bound::Arc { circle: ci, upper: true }),
                Ordering::Less => arcs.push(Bound::Arc { circle: ci, upper: false }),
                Ordering::Equal => {
                    arcs.push(Bound::Arc { circle: ci, upper: false });
                    arcs.push(Bound::Arc { circle: ci, upper: true });
                }
            }
        }
        e.arcs = arcs;
    }
    events.sort_by(|a, b| a.x_index.cmp(&b.x_index).then_with(|| a.y.cmp(&b.y)));

    // Slabs.
    let m = xs.len();
    let mut slabs: Vec<Slab> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let t = if k == 0 {
            Rat::from_integer(xs[0].floor() - 1)
        } else if k == m {
            Rat::from_integer(xs[m - 1].floor() + 2)
        } else {
            rational_between(&xs[k - 1], &xs[k])
        };
        let (arcs, segments) = slab_arcs_and_segments(&circles, &t);
        slabs.push(Slab { t, arcs, segments });
    }

    // Components of the positivity set.
    let mut offsets = Vec::with_capacity(m + 2);
    let mut total = 0;
    for s in &slabs {
        offsets.push(total);
        total += s.segments.len();
    }
    let mut uf = UnionFind::new(total);
    let mut events_at: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, e) in events.iter().enumerate() {
        events_at[e.x_index].push(i);
    }
    for k in 0..m {
        let (l, r) = (&slabs[k], &slabs[k + 1]);
        for (i, a) in l.segments.iter().enumerate() {
            for (j, b) in r.segments.iter().enumerate() {
                if a.lower == b.lower || a.upper == b.upper {
                    uf.union(offsets[k] + i, offsets[k + 1] + j);
                }
            }
        }
        for &ei in &events_at[k] {
            let e = &events[ei];
            let touching: Vec<usize> = l
                .segments
                .iter()
                .enumerate()
                .filter(|(_, s)| e.arcs.contains(&s.lower) || e.arcs.contains(&s.upper))
                .map(|(i, _)| offsets[k] + i)
                .chain(
                    r.segments
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| e.arcs.contains(&s.lower) || e.arcs.contains(&s.upper))
                        .map(|(j, _)| offsets[k + 1] + j),
                )
                .collect();
            for w in touching.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
    }
    for (k, s) in slabs.iter_mut().enumerate() {
        for (i, g) in s.segments.iter_mut().enumerate() {
            g.component = uf.find(offsets[k] + i);
        }
    }

    let mut region = Region {
        circles,
        polys,
        seed: seed.clone(),
        crossings: vec![],
        poles: vec![],
        hole_count: 0,
        bbox: (Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()),
        xs,
        slabs,
        events,
        skeleton: Skeleton::default(),
        d_component: usize::MAX,
    };
    let (sk, ss) = region
        .interior_segment(&QuadExt::from_rat(seed.0.clone()), &QuadExt::from_rat(seed.1.clone()))
        .ok_or(ArrangementError::SeedOutside)?;
    let dc = region.slabs[sk].segments[ss].component;
    region.d_component = dc;
    for (k, s) in region.slabs.iter_mut().enumerate() {
        for g in s.segments.iter_mut() {
            g.in_d = g.component == dc;
            if g.in_d && (k == 0 || k == m || g.lower == Bound::NegInf || g.upper == Bound::PosInf) {
                return Err(ArrangementError::UnboundedRegion);
            }
        }
    }

    // Closure flags.
    for e in region.events.iter_mut() {
        let k = e.x_index;
        let touches = |s: &Slab| s.segments.iter().any(|g| g.in_d && (e.arcs.contains(&g.lower) || e.arcs.contains(&g.upper)));
        e.in_closure = touches(&region.slabs[k]) || touches(&region.slabs[k + 1]);
        for &pi in &e.poles {
            poles[pi].in_closure = e.in_closure;
        }
        for &ci in &e.crossings {
            crossings[ci].in_closure = e.in_closure;
        }
    }
    region.poles = poles;
    region.crossings = crossings;
    region.skeleton = build_skeleton(&region);
    region.hole_count = (region.skeleton.edges.len() + 1).saturating_sub(region.skeleton.vertices.len());

    let mut xmin = None::<Rat>;
    let mut xmax = None::<Rat>;
    let mut ymin = None::<Rat>;
    let mut ymax = None::<Rat>;
    for c in &region.circles {
        let (p1, p2) = &c.center;
        let lo_x = p1 - &c.radius;
        let hi_x = p1 + &c.radius;
        let lo_y = p2 - &c.radius;
        let hi_y = p2 + &c.radius;
        xmin = Some(xmin.map_or(lo_x.clone(), |v| v.min(lo_x)));
        xmax = Some(xmax.map_or(hi_x.clone(), |v| v.max(hi_x)));
        ymin = Some(ymin.map_or(lo_y.clone(), |v| v.min(lo_y)));
        ymax = Some(ymax.map_or(hi_y.clone(), |v| v.max(hi_y)));
    }
    let one = Rat::one();
    region.bbox = (
        xmin.unwrap() - &one,
        xmax.unwrap() + &one,
        ymin.unwrap() - &one,
        ymax.unwrap() + &one,
    );
    Ok(region)
}

/// Assigns the D-segments that change across event abscissa `k` to closure events there and
/// links them into vertices and edges.
fn build_skeleton(region: &Region) -> Skeleton {
    let m = region.xs.len();
    let mut sk = Skeleton::default();
    // open edge start vertex per D-segment index of the current slab
    let mut open: HashMap<usize, usize> = HashMap::new();
    for k in 0..m {
        let l = &region.slabs[k];
        let r = &region.slabs[k + 1];
        let ld: Vec<usize> = (0..l.segments.len()).filter(|&i| l.segments[i].in_d).collect();
        let rd: Vec<usize> = (0..r.segments.len()).filter(|&j| r.segments[j].in_d).collect();
        let mut matched_l = vec![None; l.segments.len()];
        let mut matched_r = vec![false; r.segments.len()];
        for &i in &ld {
            if let Some(&j) = rd
                .iter()
                .find(|&&j| r.segments[j].lower == l.segments[i].lower && r.segments[j].upper == l.segments[i].upper)
            {
                matched_l[i] = Some(j);
                matched_r[j] = true;
            }
        }
        let ul: Vec<usize> = ld.iter().copied().filter(|&i| matched_l[i].is_none()).collect();
        let ur: Vec<usize> = rd.iter().copied().filter(|&j| !matched_r[j]).collect();
        let evs: Vec<usize> =
            (0..region.events.len()).filter(|&e| region.events[e].x_index == k && region.events[e].in_closure).collect();

        let mut next_open: HashMap<usize, usize> = HashMap::new();
        for &i in &ld {
            if let Some(j) = matched_l[i] {
                if let Some(v) = open.get(&i) {
                    next_open.insert(j, *v);
                }
            }
        }
        if !ul.is_empty() || !ur.is_empty() {
            // side 0 = left, 1 = right; assignment to a local event slot
            let segs: Vec<(usize, usize)> = ul.iter().map(|&i| (0, i)).chain(ur.iter().map(|&j| (1, j))).collect();
            let seg_of = |(side, i): (usize, usize)| if side == 0 { &l.segments[i] } else { &r.segments[i] };
            let mut slot: Vec<Option<usize>> = vec![None; segs.len()];
            let mut euf = UnionFind::new(evs.len().max(1));
            for (si, &s) in segs.iter().enumerate() {
                let g = seg_of(s);
                for (ei, &e) in evs.iter().enumerate() {
                    let arcs = &region.events[e].arcs;
                    if arcs.contains(&g.lower) || arcs.contains(&g.upper) {
                        match slot[si] {
                            None => slot[si] = Some(ei),
                            Some(o) => euf.union(o, ei),
                        }
                    }
                }
            }
            // counterparts of splits and merges share a bounding arc with an assigned segment
            for _ in 0..2 {
                for si in 0..segs.len() {
                    if slot[si].is_some() {
                        continue;
                    }
                    let g = seg_of(segs[si]);
                    for sj in 0..segs.len() {
                        if segs[sj].0 == segs[si].0 {
                            continue;
                        }
                        let h = seg_of(segs[sj]);
                        if let Some(e) = slot[sj] {
                            if g.lower == h.lower || g.upper == h.upper {
                                slot[si] = Some(e);
                                break;
                            }
                        }
                    }
                }
            }
            let mut vertex_of: HashMap<usize, usize> = HashMap::new();
            for si in 0..segs.len() {
                let e = match slot[si] {
                    Some(e) => euf.find(e),
                    None => {
                        // unexplained change; attach to the first event so the graph stays connected
                        0
                    }
                };
                let v = *vertex_of.entry(e).or_insert_with(|| {
                    let members: Vec<usize> = (0..evs.len()).filter(|&x| euf.find(x) == e).map(|x| evs[x]).collect();
                    let x = members.first().map(|&m| region.events[m].x.clone()).unwrap_or_else(|| region.xs[k].clone());
                    sk.vertices.push(SkeletonVertex { x, events: members });
                    sk.vertices.len() - 1
                });
                let (side, i) = segs[si];
                let g = seg_of(segs[si]);
                if side == 0 {
                    if let Some(&u) = open.get(&i) {
                        sk.edges.push(SkeletonEdge { u, v, lower: g.lower, upper: g.upper });
                    }
                } else {
                    next_open.insert(i, v);
                }
            }
        }
        // events in the closure that touch no changing segment still get a vertex
        for &e in &evs {
            if !sk.vertices.iter().any(|v| v.events.contains(&e)) {
                sk.vertices.push(SkeletonVertex { x: region.events[e].x.clone(), events: vec![e] });
            }
        }
        open = next_open;
    }
    sk
}
