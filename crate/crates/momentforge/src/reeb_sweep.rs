//! Reeb graph of the first coordinate on the manifold, read off the slab sweep of D.

use serde_json::{json, Value};
use thiserror::Error;

use crate::arrangement::{Bound, ValidationReport, Violation};
use crate::exact_arith::QuadExt;
use crate::graph_ops::MultiGraph;
use crate::moment_map::{validate_moment_data, FiberClass, MomentData};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReebError {
    #[error(
        "DisconnectedFiberError: group {group} has sphere dimension 0, so fibers are disconnected \
         (S^0 factors) and the Reeb graph is not defined by the sweep"
    )]
    DisconnectedFiber { group: usize },
    #[error("GenericityError: {0}")]
    Genericity(ValidationReport),
    #[error("invalid data: {0}")]
    Invalid(ValidationReport),
    #[error("Reeb graphs need plane circle data")]
    NotPlanar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    PoleExtremum,
    PoleBranch,
    Crossing,
}

impl VertexKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VertexKind::PoleExtremum => "pole_extremum",
            VertexKind::PoleBranch => "pole_branch",
            VertexKind::Crossing => "crossing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexSource {
    /// Index into `Region::poles`.
    Pole(usize),
    /// Index into `Region::crossings`.
    Crossing(usize),
}

#[derive(Clone, Debug)]
pub struct ReebVertex {
    pub id: usize,
    pub x: QuadExt,
    pub kind: VertexKind,
    pub sources: Vec<VertexSource>,
}

#[derive(Clone, Debug)]
pub struct ReebEdge {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub fiber: FiberClass,
    pub lower: Bound,
    pub upper: Bound,
}

/// Vertices sorted by x.
#[derive(Clone, Debug)]
pub struct ReebGraph {
    pub vertices: Vec<ReebVertex>,
    pub edges: Vec<ReebEdge>,
}

impl ReebGraph {
    pub fn to_multigraph(&self) -> MultiGraph {
        MultiGraph { n: self.vertices.len(), edges: self.edges.iter().map(|e| (e.u, e.v)).collect() }
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.to_multigraph().degrees()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices.iter().map(|v| json!({
                "id": v.id,
                "x_exact": v.x.to_string(),
                "x_decimal": v.x.to_decimal(12),
                "kind": v.kind.as_str(),
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "u": e.u,
                "v": e.v,
                "fiber": e.fiber.0,
                "segment": [e.lower.to_string(), e.upper.to_string()],
            })).collect::<Vec<_>>(),
        })
    }

    /// DOT-like plain text, one line per vertex and edge.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph reeb {\n");
        for v in &self.vertices {
            s.push_str(&format!(
                "  v{} [x=\"{}\", approx={}, kind={}];\n",
                v.id,
                v.x,
                v.x.to_decimal(12),
                v.kind.as_str()
            ));
        }
        for e in &self.edges {
            let dims: Vec<String> = e.fiber.0.iter().map(|d| d.to_string()).collect();
            s.push_str(&format!(
                "  v{} -- v{} [fiber=\"{}\", segment=\"{} {}\"];\n",
                e.u,
                e.v,
                dims.join(","),
                e.lower,
                e.upper
            ));
        }
        s.push_str("}\n");
        s
    }
}

/// Fiber over a vertical segment bounded by circles `j1` and `j2` (ids): the sphere of a
/// shared group is doubled up one dimension, two distinct groups are joined into one sphere.
pub fn segment_fiber_class(d: &MomentData, j1: usize, j2: usize) -> FiberClass {
    let (i1, i2) = (d.group_map[j1 - 1], d.group_map[j2 - 1]);
    let dims = &d.dim_map;
    let mut out = if i1 == i2 { vec![dims[i1 - 1] + 1] } else { vec![dims[i1 - 1] + dims[i2 - 1] + 1] };
    out.extend((1..=d.l2()).filter(|&i| i != i1 && i != i2).map(|i| dims[i - 1]));
    FiberClass(out)
}

fn genericity_violations(report: &ValidationReport) -> ValidationReport {
    ValidationReport {
        violations: report.violations.iter().filter(|v| matches!(v, Violation::Genericity { .. })).cloned().collect(),
    }
}

/// Sorted x-values of the poles and crossings in the closure of D.
pub fn singular_x_values(d: &MomentData) -> Result<Vec<QuadExt>, ReebError> {
    let region = d.region().ok_or(ReebError::NotPlanar)?;
    let mut xs: Vec<QuadExt> = region.closure_events().map(|e| e.x.clone()).collect();
    xs.sort();
    let n = xs.len();
    xs.dedup();
    if xs.len() != n {
        return Err(ReebError::Genericity(genericity_violations(&validate_moment_data(d))));
    }
    Ok(xs)
}

pub fn reeb_graph(d: &MomentData) -> Result<ReebGraph, ReebError> {
    let region = d.region().ok_or(ReebError::NotPlanar)?;
    if let Some(i) = d.dim_map.iter().position(|&m| m == 0) {
        return Err(ReebError::DisconnectedFiber { group: i + 1 });
    }
    let report = validate_moment_data(d);
    if !report.passed() {
        let gen = genericity_violations(&report);
        return Err(if gen.passed() { ReebError::Invalid(report) } else { ReebError::Genericity(gen) });
    }
    let sk = &region.skeleton;
    let mut order: Vec<usize> = (0..sk.vertices.len()).collect();
    order.sort_by(|&a, &b| sk.vertices[a].x.cmp(&sk.vertices[b].x));
    let mut new_id = vec![0; order.len()];
    for (k, &old) in order.iter().enumerate() {
        new_id[old] = k;
    }
    let edges: Vec<ReebEdge> = sk
        .edges
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let j1 = e.lower.circle().expect("bounded segment") + 1;
            let j2 = e.upper.circle().expect("bounded segment") + 1;
            ReebEdge {
                id,
                u: new_id[e.u],
                v: new_id[e.v],
                fiber: segment_fiber_class(d, j1, j2),
                lower: e.lower,
                upper: e.upper,
            }
        })
        .collect();
    let mut degree = vec![0; order.len()];
    for e in &edges {
        degree[e.u] += 1;
        degree[e.v] += 1;
    }
    let vertices = order
        .iter()
        .enumerate()
        .map(|(id, &old)| {
            let sv = &sk.vertices[old];
            let mut sources = Vec::new();
            for &ei in &sv.events {
                let ev = &region.events[ei];
                sources.extend(ev.poles.iter().map(|&p| VertexSource::Pole(p)));
                sources.extend(ev.crossings.iter().map(|&c| VertexSource::Crossing(c)));
            }
            let is_pole = sources.iter().any(|s| matches!(s, VertexSource::Pole(_)));
            let kind = match (is_pole, degree[id]) {
                (true, 1) => VertexKind::PoleExtremum,
                (true, _) => VertexKind::PoleBranch,
                (false, _) => VertexKind::Crossing,
            };
            ReebVertex { id, x: sv.x.clone(), kind, sources }
        })
        .collect();
    Ok(ReebGraph { vertices, edges })
}
