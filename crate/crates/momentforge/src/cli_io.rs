//! Input documents (TOML, or JSON when the text starts with `{`), canonical serialization
//! and SVG figures of regions with their Reeb graphs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Circle, Orientation};
use crate::exact_arith::{format_rat, parse_rat, rat_to_f64, Rat};
use crate::moment_map::{MomentData, MomentError};
use crate::polynomials::{x_vars, Poly};
use crate::reeb_sweep::{ReebGraph, VertexSource};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("ValidationError: {0}")]
    Validation(#[from] MomentError),
}

/// A rational written as a string (`"3/2"`, `"-0.25"`) or a plain integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatText {
    Int(i64),
    Text(String),
}

impl RatText {
    fn from_rat(r: &Rat) -> Self {
        RatText::Text(format_rat(r))
    }

    fn to_rat(&self, field: &str) -> Result<Rat, InputError> {
        match self {
            RatText::Int(i) => Ok(Rat::from_integer((*i).into())),
            RatText::Text(s) => parse_rat(s).map_err(|e| InputError::Parse(format!("field `{field}`: {e}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDoc {
    pub seed: Vec<RatText>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleDoc {
    pub id: usize,
    pub center: [RatText; 2],
    pub radius: RatText,
    pub orientation: Orientation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapsDoc {
    pub m_l1_l2: Vec<usize>,
    pub m_l2: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralDoc {
    pub n: usize,
    pub polynomials: Vec<String>,
}

/// Record of the construction that produced a document; ignored when building data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alloc: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nprime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j2: Option<usize>,
    /// Predicted Reeb graph in `MultiGraph` text form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub region: RegionDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub circles: Vec<CircleDoc>,
    pub maps: MapsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<GeneralDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construct: Option<ConstructDoc>,
}

impl InputDocument {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| InputError::Parse(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| InputError::Parse(e.to_string().trim_end().to_string()))
        }
    }

    pub fn from_data(d: &MomentData) -> Self {
        let general = (d.circles.is_empty()).then(|| GeneralDoc {
            n: d.n,
            polynomials: d.polys.iter().map(Poly::to_text).collect(),
        });
        InputDocument {
            region: RegionDoc { seed: d.seed.iter().map(RatText::from_rat).collect() },
            circles: d
                .circles
                .iter()
                .map(|c| CircleDoc {
                    id: c.id,
                    center: [RatText::from_rat(&c.center.0), RatText::from_rat(&c.center.1)],
                    radius: RatText::from_rat(&c.radius),
                    orientation: c.orientation,
                })
                .collect(),
            maps: MapsDoc { m_l1_l2: d.group_map.clone(), m_l2: d.dim_map.clone() },
            general,
            construct: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn to_data(&self) -> Result<MomentData, InputError> {
        let seed = self
            .region
            .seed
            .iter()
            .enumerate()
            .map(|(k, s)| s.to_rat(&format!("region.seed[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(g) = &self.general {
            if !self.circles.is_empty() {
                return Err(InputError::Parse("`general` and `circles` cannot both be given".into()));
            }
            let vars = x_vars(g.n);
            let polys = g
                .polynomials
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    Poly::parse(p, &vars).map_err(|e| InputError::Parse(format!("field `general.polynomials[{k}]`: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(MomentData::general(g.n, polys, seed, self.maps.m_l1_l2.clone(), self.maps.m_l2.clone())?);
        }
        if self.circles.is_empty() {
            return Err(InputError::Parse("missing field `circles`".into()));
        }
        if seed.len() != 2 {
            return Err(InputError::Parse(format!("field `region.seed` needs 2 coordinates, got {}", seed.len())));
        }
        let mut circles = Vec::with_capacity(self.circles.len());
        for (k, c) in self.circles.iter().enumerate() {
            if self.circles[..k].iter().any(|o| o.id == c.id) {
                return Err(InputError::Parse(format!("duplicate circle id {} in field `circles`", c.id)));
            }
            if c.id != k + 1 {
                return Err(InputError::Parse(format!(
                    "field `circles[{k}].id`: ids must be 1..{} in order, found {}",
                    self.circles.len(),
                    c.id
                )));
            }
            let f = |s: &str| format!("circles[{k}].{s}");
            circles.push(Circle::new(
                c.id,
                (c.center[0].to_rat(&f("center"))?, c.center[1].to_rat(&f("center"))?),
                c.radius.to_rat(&f("radius"))?,
                c.orientation,
            ));
        }
        let mut it = seed.into_iter();
        let seed = (it.next().unwrap(), it.next().unwrap());
        Ok(MomentData::from_circles(circles, seed, self.maps.m_l1_l2.clone(), self.maps.m_l2.clone())?)
    }
}

pub fn parse_input(text: &str) -> Result<MomentData, InputError> {
    InputDocument::parse(text)?.to_data()
}

/// Canonical TOML for `d`.
pub fn serialize_data(d: &MomentData) -> String {
    InputDocument::from_data(d).to_toml()
}

const WIDTH: f64 = 480.0;
const PANEL: f64 = 360.0;
const GAP: f64 = 30.0;
const GRID: usize = 240;

fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Region in gray, circles stroked, singular points as black dots and the Reeb graph below
/// with each vertex drawn at its x-value. Output depends only on the input.
pub fn render_svg(d: &MomentData, g: Option<&ReebGraph>) -> String {
    let Some(region) = d.region() else {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"0\" height=\"0\"/>\n".into();
    };
    let (x0, x1, y0, y1) =
        (rat_to_f64(&region.bbox.0), rat_to_f64(&region.bbox.1), rat_to_f64(&region.bbox.2), rat_to_f64(&region.bbox.3));
    let scale = (WIDTH / (x1 - x0)).min(PANEL / (y1 - y0));
    let h = (y1 - y0) * scale;
    let sx = |x: f64| (x - x0) * scale;
    let sy = |y: f64| (y1 - y) * scale;
    let graph_h = if g.is_some() { PANEL * 0.5 } else { 0.0 };
    let total_h = h + if g.is_some() { GAP + graph_h } else { 0.0 };
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt3(WIDTH),
        fmt3(total_h),
        fmt3(WIDTH),
        fmt3(total_h)
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    s.push_str("<g fill=\"#bbbbbb\" stroke=\"none\">\n");
    let cw = (x1 - x0) / GRID as f64;
    let ch = (y1 - y0) / GRID as f64;
    for j in 0..GRID {
        let y = y0 + (j as f64 + 0.5) * ch;
        let mut run: Option<usize> = None;
        for i in 0..=GRID {
            let inside = i < GRID && region.in_d_f64(x0 + (i as f64 + 0.5) * cw, y);
            match (inside, run) {
                (true, None) => run = Some(i),
                (false, Some(start)) => {
                    writeln!(
                        s,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                        fmt3(sx(x0 + start as f64 * cw)),
                        fmt3(sy(y0 + (j + 1) as f64 * ch)),
                        fmt3((i - start) as f64 * cw * scale),
                        fmt3(ch * scale)
                    )
                    .unwrap();
                    run = None;
                }
                _ => {}
            }
        }
    }
    s.push_str("</g>\n<g fill=\"none\" stroke=\"black\" stroke-width=\"1\">\n");
    for c in &region.circles {
        let (p1, p2, r) = c.f64_params();
        writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>", fmt3(sx(p1)), fmt3(sy(p2)), fmt3(r * scale)).unwrap();
    }
    s.push_str("</g>\n<g fill=\"black\">\n");
    let mut dots: Vec<(f64, f64)> = region.boundary_poles().map(|p| (rat_to_f64(&p.point.0), rat_to_f64(&p.point.1))).collect();
    dots.extend(region.boundary_crossings().map(|c| (c.x.to_f64(), c.y.to_f64())));
    for (x, y) in dots {
        writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"3\"/>", fmt3(sx(x)), fmt3(sy(y))).unwrap();
    }
    s.push_str("</g>\n");
    if let Some(g) = g {
        let top = h + GAP;
        let vy = |id: usize| {
            let y = match g.vertices[id].sources.first() {
                Some(VertexSource::Pole(k)) => rat_to_f64(&region.poles[*k].point.1),
                Some(VertexSource::Crossing(k)) => region.crossings[*k].y.to_f64(),
                None => (y0 + y1) / 2.0,
            };
            top + (y1 - y) / (y1 - y0) * graph_h
        };
        let vx = |id: usize| sx(g.vertices[id].x.to_f64());
        s.push_str("<g fill=\"none\" stroke=\"black\" stroke-width=\"1.5\">\n");
        let mut seen: Vec<((usize, usize), usize)> = Vec::new();
        for e in &g.edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            let k = match seen.iter_mut().find(|(p, _)| *p == key) {
                Some((_, c)) => {
                    *c += 1;
                    *c
                }
                None => {
                    seen.push((key, 0));
                    0
                }
            };
            let (ax, ay, bx, by) = (vx(e.u), vy(e.u), vx(e.v), vy(e.v));
            let bend = if k == 0 { 0.0 } else { 18.0 * k.div_ceil(2) as f64 * if k % 2 == 1 { 1.0 } else { -1.0 } };
            let (mx, my) = ((ax + bx) / 2.0, (ay + by) / 2.0 + bend);
            writeln!(
                s,
                "<path d=\"M {} {} Q {} {} {} {}\"/>",
                fmt3(ax),
                fmt3(ay),
                fmt3(mx),
                fmt3(my),
                fmt3(bx),
                fmt3(by)
            )
            .unwrap();
        }
        s.push_str("</g>\n<g fill=\"black\">\n");
        for v in &g.vertices {
            writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"3.5\"/>", fmt3(vx(v.id)), fmt3(vy(v.id))).unwrap();
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::reeb_sweep::reeb_graph;

    const ANNULUS: &str = r#"
[region]
seed = ["3/2", 0]

[[circles]]
id = 1
center = [0, 0]
radius = 2
orientation = "inside"

[[circles]]
id = 2
center = [0, 0]
radius = 1
orientation = "outside"

[maps]
m_l1_l2 = [1, 1]
m_l2 = [1]
"#;

    #[test]
    fn annulus_document() {
        let d = parse_input(ANNULUS).unwrap();
        assert_eq!((d.l1(), d.l2(), d.m()), (2, 1, 3));
    }

    #[test]
    fn missing_field_named() {
        let text = ANNULUS.replace("m_l2 = [1]\n", "");
        let err = parse_input(&text).unwrap_err();
        assert!(matches!(&err, InputError::Parse(m) if m.contains("m_l2")), "{err}");
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = ANNULUS.replace("id = 2", "id = 1");
        let err = parse_input(&text).unwrap_err();
        assert!(matches!(&err, InputError::Parse(m) if m.contains("duplicate")), "{err}");
    }

    #[test]
    fn canonical_round_trip() {
        for (_, d) in fixtures::all() {
            let text = serialize_data(&d);
            let back = parse_input(&text).unwrap();
            assert_eq!(serialize_data(&back), text);
            let json = InputDocument::from_data(&d).to_json();
            assert_eq!(serialize_data(&parse_input(&json).unwrap()), text);
        }
    }

    #[test]
    fn general_document() {
        let text = r#"
[region]
seed = [0, 0, 0]

[maps]
m_l1_l2 = [1]
m_l2 = [2]

[general]
n = 3
polynomials = ["1 - x1^2 - x2^2 - x3^2"]
"#;
        let d = parse_input(text).unwrap();
        assert_eq!((d.n, d.m()), (3, 5));
        assert_eq!(parse_input(&serialize_data(&d)).map(|e| serialize_data(&e)), Ok(serialize_data(&d)));
    }

    #[test]
    fn svg_is_deterministic() {
        let d = fixtures::annulus();
        let g = reeb_graph(&d).unwrap();
        let a = render_svg(&d, Some(&g));
        assert_eq!(a, render_svg(&d, Some(&g)));
        assert_eq!(a.matches("r=\"3\"").count(), 4);
        assert_eq!(a.matches("<path").count(), 4);
        let disk = fixtures::disk();
        let s = render_svg(&disk, Some(&reeb_graph(&disk).unwrap()));
        assert_eq!(s.matches("r=\"3\"").count(), 2);
        assert_eq!(s.matches("<path").count(), 1);
    }
}
