//! The data of a moment-like map: circles (or general polynomials), the group map and the
//! sphere dimensions, plus the polynomial system of the manifold and the fiber classes.

use std::fmt;

use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{
    region_from_seed, validate_arrangement, ArrangementError, Circle, Region, Stratum, ValidationReport, Violation,
};
use crate::exact_arith::{QuadExt, Rat};
use crate::polynomials::{poly_eval, x_vars, Poly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("invalid maps: {0}")]
    InvalidMaps(String),
    #[error("point is outside the closure of D")]
    Outside,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Product of spheres `S^d1 x S^d2 x ...`; empty means a single point.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FiberClass(pub Vec<usize>);

impl FiberClass {
    pub fn total_dim(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_point(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for FiberClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "point");
        }
        let parts: Vec<String> = self.0.iter().map(|d| format!("S^{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

#[derive(Clone, Debug)]
pub struct MomentData {
    pub n: usize,
    /// Empty for general polynomial data.
    pub circles: Vec<Circle>,
    /// `f_j` in variables `x1..xn`.
    pub polys: Vec<Poly>,
    pub seed: Vec<Rat>,
    pub region: Option<Region>,
    /// Group (1-based) of each `f_j`.
    pub group_map: Vec<usize>,
    /// Sphere dimension of each group.
    pub dim_map: Vec<usize>,
    /// False for general data, where the arrangement hypotheses are not checked.
    pub hypotheses_verified: bool,
}

fn check_maps(l1: usize, group_map: &[usize], dim_map: &[usize]) -> Result<(), MomentError> {
    if group_map.len() != l1 {
        return Err(MomentError::InvalidMaps(format!(
            "m_l1_l2 has {} entries but there are {l1} hypersurfaces",
            group_map.len()
        )));
    }
    if dim_map.is_empty() {
        return Err(MomentError::InvalidMaps("m_l2 is empty".into()));
    }
    if let Some(g) = group_map.iter().find(|&&g| g == 0 || g > dim_map.len()) {
        return Err(MomentError::InvalidMaps(format!("group {g} is not in 1..{}", dim_map.len())));
    }
    Ok(())
}

impl MomentData {
    /// Plane data from circles; degenerate arrangements and bad seeds are errors, the
    /// remaining hypotheses are reported by `validate_moment_data`.
    pub fn from_circles(
        circles: Vec<Circle>,
        seed: (Rat, Rat),
        group_map: Vec<usize>,
        dim_map: Vec<usize>,
    ) -> Result<Self, MomentError> {
        check_maps(circles.len(), &group_map, &dim_map)?;
        let region = region_from_seed(circles.clone(), seed.clone())?;
        Ok(MomentData {
            n: 2,
            polys: region.polys.clone(),
            circles,
            seed: vec![seed.0, seed.1],
            region: Some(region),
            group_map,
            dim_map,
            hypotheses_verified: true,
        })
    }

    /// User polynomials in `x1..xn`; nothing about the arrangement is checked.
    pub fn general(
        n: usize,
        polys: Vec<Poly>,
        seed: Vec<Rat>,
        group_map: Vec<usize>,
        dim_map: Vec<usize>,
    ) -> Result<Self, MomentError> {
        check_maps(polys.len(), &group_map, &dim_map)?;
        let vars = x_vars(n);
        let polys = polys.iter().map(|p| p.embed(&vars)).collect::<Result<Vec<_>, _>>()?;
        if seed.len() != n {
            return Err(MomentError::InvalidMaps(format!("seed has {} coordinates, expected {n}", seed.len())));
        }
        Ok(MomentData { n, circles: vec![], polys, seed, region: None, group_map, dim_map, hypotheses_verified: false })
    }

    /// Circle data with no region and no checks at all, for negative controls.
    pub fn unchecked(circles: Vec<Circle>, seed: (Rat, Rat), group_map: Vec<usize>, dim_map: Vec<usize>) -> Self {
        MomentData {
            n: 2,
            polys: circles.iter().map(Circle::poly).collect(),
            circles,
            seed: vec![seed.0, seed.1],
            region: None,
            group_map,
            dim_map,
            hypotheses_verified: false,
        }
    }

    pub fn l1(&self) -> usize {
        self.polys.len()
    }

    pub fn l2(&self) -> usize {
        self.dim_map.len()
    }

    pub fn m(&self) -> usize {
        self.n + self.dim_map.iter().sum::<usize>()
    }

    pub fn ambient_dim(&self) -> usize {
        self.m() + self.l2()
    }

    /// Indices of the hypersurfaces in group `i` (1-based).
    pub fn members(&self, i: usize) -> Vec<usize> {
        (0..self.l1()).filter(|&j| self.group_map[j] == i).collect()
    }

    pub fn region(&self) -> Option<&Region> {
        self.region.as_ref()
    }

    /// Names `x1..xn, y_1_1, ..., y_l2_(m(l2)+1)`.
    pub fn variables(&self) -> Vec<String> {
        let mut v = x_vars(self.n);
        for (i, &d) in self.dim_map.iter().enumerate() {
            for k in 1..=d + 1 {
                v.push(format!("y_{}_{}", i + 1, k));
            }
        }
        v
    }

    /// Float values of the group products at a point of `R^n`.
    pub fn group_products_f64(&self, x: &[f64]) -> Vec<f64> {
        let vals: Vec<f64> = self.polys.iter().map(|p| p.eval_f64(x)).collect();
        (1..=self.l2()).map(|i| self.members(i).iter().map(|&j| vals[j]).product()).collect()
    }

    /// Exact values of the group products at a rational point.
    pub fn group_products(&self, x: &[Rat]) -> Vec<Rat> {
        let vals: Vec<Rat> = self.polys.iter().map(|p| p.eval_rat(x)).collect();
        (1..=self.l2()).map(|i| self.members(i).iter().fold(Rat::one(), |acc, &j| acc * &vals[j])).collect()
    }
}

pub fn validate_moment_data(d: &MomentData) -> ValidationReport {
    let mut report = match &d.region {
        Some(r) => validate_arrangement(r),
        None => ValidationReport::default(),
    };
    for i in 1..=d.l2() {
        if !d.group_map.contains(&i) {
            report.violations.push(Violation::NotSurjective { group: i });
        }
    }
    if let Some(r) = &d.region {
        for c in r.boundary_crossings() {
            let (a, b) = c.circles;
            if d.group_map[a - 1] == d.group_map[b - 1] {
                report.violations.push(Violation::InjectivityViolation {
                    circles: (a, b),
                    group: d.group_map[a - 1],
                    point: (c.x.clone(), c.y.clone()),
                });
            }
        }
    }
    report
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Manifest {
    pub n: usize,
    pub l1: usize,
    pub l2: usize,
    pub m: usize,
    pub ambient_dim: usize,
}

#[derive(Clone, Debug)]
pub struct EmittedSystem {
    pub variables: Vec<String>,
    /// Fully expanded polynomials, one per group.
    pub polys: Vec<Poly>,
    /// The same polynomials with the group products left unexpanded.
    pub factored: Vec<String>,
    pub manifest: Manifest,
}

/// For each group `i`: the product of its `f_j` minus `|y_i|^2`.
pub fn emit_system(d: &MomentData) -> EmittedSystem {
    let vars = d.variables();
    let mut polys = Vec::with_capacity(d.l2());
    let mut factored = Vec::with_capacity(d.l2());
    let mut offset = d.n;
    for i in 1..=d.l2() {
        let members = d.members(i);
        let mut p = Poly::constant(vars.clone(), Rat::one());
        let mut text = String::new();
        for &j in &members {
            let f = d.polys[j].embed(&vars).expect("x variables are a prefix");
            p = p.mul(&f);
            text.push_str(&format!("({})", d.polys[j].to_text()));
        }
        let mut ys = Vec::new();
        for k in 0..=d.dim_map[i - 1] {
            let y = Poly::var(vars.clone(), offset + k);
            p = p.sub(&y.mul(&y));
            ys.push(format!(" - 1*{}^2", vars[offset + k]));
        }
        offset += d.dim_map[i - 1] + 1;
        polys.push(p);
        factored.push(format!("{text}{}", ys.concat()));
    }
    EmittedSystem {
        variables: vars,
        polys,
        factored,
        manifest: Manifest { n: d.n, l1: d.l1(), l2: d.l2(), m: d.m(), ambient_dim: d.ambient_dim() },
    }
}

/// Indices of the hypersurfaces through `p`, or an error if `p` is outside the closure of D.
fn stratum_of(d: &MomentData, p: &[QuadExt]) -> Result<Vec<usize>, MomentError> {
    match &d.region {
        Some(r) if p.len() == 2 => match r.locate(&p[0], &p[1]) {
            Stratum::Interior => Ok(vec![]),
            Stratum::OnCircles(ids) => Ok(ids.into_iter().map(|i| i - 1).collect()),
            Stratum::Outside => Err(MomentError::Outside),
        },
        _ => {
            let mut zeros = Vec::new();
            for (j, f) in d.polys.iter().enumerate() {
                let s = poly_eval(f, p)?.sign();
                if s < 0 {
                    return Err(MomentError::Outside);
                }
                if s == 0 {
                    zeros.push(j);
                }
            }
            Ok(zeros)
        }
    }
}

/// Sphere dimensions of the groups not hit by the hypersurfaces in `stratum`.
pub fn fiber_class_of_stratum(d: &MomentData, stratum: &[usize]) -> FiberClass {
    let hit: Vec<usize> = stratum.iter().map(|&j| d.group_map[j]).collect();
    FiberClass((1..=d.l2()).filter(|i| !hit.contains(i)).map(|i| d.dim_map[i - 1]).collect())
}

pub fn fiber_class_at(d: &MomentData, p: &[QuadExt]) -> Result<FiberClass, MomentError> {
    let s = stratum_of(d, p)?;
    Ok(fiber_class_of_stratum(d, &s))
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StratumLabel {
    Interior,
    Circle(usize),
    Crossing { circles: (usize, usize), x: QuadExt, y: QuadExt },
}

impl fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StratumLabel::Interior => write!(f, "interior"),
            StratumLabel::Circle(c) => write!(f, "circle {c}"),
            StratumLabel::Crossing { circles, x, y } => {
                write!(f, "crossing of {} and {} at ({x}, {y})", circles.0, circles.1)
            }
        }
    }
}

/// Every stratum of the closure of D with its fiber class: the interior, each boundary arc
/// (by circle) and each crossing on the boundary.
pub fn stratum_fibers(d: &MomentData) -> Vec<(StratumLabel, FiberClass)> {
    let mut out = vec![(StratumLabel::Interior, fiber_class_of_stratum(d, &[]))];
    for j in 0..d.l1() {
        out.push((StratumLabel::Circle(j + 1), fiber_class_of_stratum(d, &[j])));
    }
    if let Some(r) = &d.region {
        for c in r.boundary_crossings() {
            out.push((
                StratumLabel::Crossing { circles: c.circles, x: c.x.clone(), y: c.y.clone() },
                fiber_class_of_stratum(d, &[c.circles.0 - 1, c.circles.1 - 1]),
            ));
        }
    }
    out
}

/// `m - n`, after checking that no stratum has a larger fiber.
pub fn fiber_dim_bound(d: &MomentData) -> usize {
    let bound = d.m() - d.n;
    for (label, fc) in stratum_fibers(d) {
        assert!(fc.total_dim() <= bound, "fiber over {label} has dimension {} > {bound}", fc.total_dim());
    }
    bound
}

/// Whether all group products are strictly positive at a rational point.
pub fn is_strictly_interior(d: &MomentData, x: &[Rat]) -> bool {
    d.group_products(x).iter().all(|v| v.is_positive())
}
