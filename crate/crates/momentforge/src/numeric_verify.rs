//! Floating-point checks of the manifold and the map: fiber sampling, Jacobian rank, image,
//! tangent pushforward, singular values of the first coordinate, and an independent Reeb
//! graph computed by marching vertical slices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{Circle, Orientation, Region};
use crate::exact_arith::{rat_from_f64, rat_to_f64, Rat};
use crate::graph_ops::MultiGraph;
use crate::moment_map::{emit_system, is_strictly_interior, MomentData};
use crate::polynomials::{poly_grad, Poly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("NotInteriorError: some group product is not positive at the point")]
    NotInterior,
    #[error("ResolutionError: slice components change between t = {0} and t = {1} with no event in between")]
    Resolution(f64, f64),
    #[error("data has no plane region")]
    NotPlanar,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub residual: f64,
    pub rank_gap: f64,
    pub angle: f64,
    pub band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-9, rank_gap: 1e3, angle: 1e-5, band: 1e-6 }
    }
}

/// Generator for sample `index` of a run seeded with `seed`; streams are independent, so
/// reports do not depend on evaluation order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

#[derive(Clone, Debug)]
struct F64Poly {
    terms: Vec<(Vec<i32>, f64)>,
}

impl F64Poly {
    fn new(p: &Poly) -> Self {
        F64Poly { terms: p.terms().map(|(e, c)| (e.iter().map(|&k| k as i32).collect(), rat_to_f64(c))).collect() }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * x.iter().zip(e).map(|(v, &k)| v.powi(k)).product::<f64>()).sum()
    }
}

/// Float evaluator for the emitted system and its Jacobian.
#[derive(Clone, Debug)]
pub struct SystemEval {
    pub n: usize,
    pub nvars: usize,
    polys: Vec<F64Poly>,
    grads: Vec<Vec<F64Poly>>,
    /// `f_j` in `x1..xn`.
    base: Vec<F64Poly>,
    groups: Vec<Vec<usize>>,
    /// Column range of each group's `y` block.
    blocks: Vec<(usize, usize)>,
}

impl SystemEval {
    pub fn new(d: &MomentData) -> Self {
        let sys = emit_system(d);
        let mut blocks = Vec::new();
        let mut off = d.n;
        for &m in &d.dim_map {
            blocks.push((off, off + m + 1));
            off += m + 1;
        }
        SystemEval {
            n: d.n,
            nvars: sys.variables.len(),
            grads: sys.polys.iter().map(|p| poly_grad(p).iter().map(F64Poly::new).collect()).collect(),
            polys: sys.polys.iter().map(F64Poly::new).collect(),
            base: d.polys.iter().map(F64Poly::new).collect(),
            groups: (1..=d.l2()).map(|i| d.members(i)).collect(),
            blocks,
        }
    }

    pub fn l2(&self) -> usize {
        self.polys.len()
    }

    pub fn base_values(&self, x: &[f64]) -> Vec<f64> {
        self.base.iter().map(|f| f.eval(&x[..self.n])).collect()
    }

    pub fn products(&self, x: &[f64]) -> Vec<f64> {
        let v = self.base_values(x);
        self.groups.iter().map(|g| g.iter().map(|&j| v[j]).product()).collect()
    }

    pub fn residuals(&self, q: &[f64]) -> Vec<f64> {
        self.polys.iter().map(|p| p.eval(q)).collect()
    }

    /// Residuals divided by `1 + |product| + |y|^2` of their group.
    pub fn relative_residuals(&self, q: &[f64]) -> Vec<f64> {
        let prods = self.products(q);
        self.residuals(q)
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (a, b) = self.blocks[i];
                let y2: f64 = q[a..b].iter().map(|v| v * v).sum();
                r.abs() / (1.0 + prods[i].abs() + y2)
            })
            .collect()
    }

    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.l2(), self.nvars, |i, j| self.grads[i][j].eval(q))
    }

    /// Ambient point over `x` with `y_i = sqrt(max(product_i, 0)) * u_i` for unit vectors `u_i`.
    pub fn lift(&self, x: &[f64], units: &[Vec<f64>]) -> Vec<f64> {
        let prods = self.products(x);
        let mut q = x[..self.n].to_vec();
        for (i, u) in units.iter().enumerate() {
            let s = prods[i].max(0.0).sqrt();
            q.extend(u.iter().map(|v| s * v));
        }
        q
    }

    fn random_units(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|&(a, b)| loop {
                let g: Vec<f64> = (a..b).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    break g.iter().map(|v| v / norm).collect();
                }
            })
            .collect()
    }
}

/// `k` points of the fiber over a rational point with all group products positive.
pub fn sample_fiber(d: &MomentData, p: &[Rat], k: usize, seed: u64) -> Result<Vec<Vec<f64>>, NumericError> {
    if !is_strictly_interior(d, p) {
        return Err(NumericError::NotInterior);
    }
    let ev = SystemEval::new(d);
    let prods: Vec<f64> = d.group_products(p).iter().map(rat_to_f64).collect();
    let x: Vec<f64> = p.iter().map(rat_to_f64).collect();
    Ok((0..k)
        .map(|s| {
            let mut rng = sample_rng(seed, s as u64);
            let units = ev.random_units(&mut rng);
            let mut q = x.clone();
            for (i, u) in units.iter().enumerate() {
                q.extend(u.iter().map(|v| prods[i].sqrt() * v));
            }
            q
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub index: usize,
    pub point: Vec<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub samples: usize,
    pub max_residual: f64,
    pub min_rank_gap: f64,
    pub failures: Vec<Witness>,
}

impl SampleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// `sigma_r / max(sigma_{r+1}, eps * max(rows, cols) * sigma_1)` with `sigma_{r+1} = 0` when the
/// matrix has only `r` singular values.
pub fn rank_gap(m: &DMatrix<f64>, r: usize) -> f64 {
    let s = sorted_singular_values(m);
    if r == 0 || s.is_empty() || s[0] == 0.0 {
        return 0.0;
    }
    let next = s.get(r).copied().unwrap_or(0.0);
    let floor = f64::EPSILON * m.nrows().max(m.ncols()) as f64 * s[0];
    s.get(r - 1).copied().unwrap_or(0.0) / next.max(floor)
}

pub fn rank_check(d: &MomentData, points: &[Vec<f64>], tol: &Tolerances) -> SampleReport {
    let ev = SystemEval::new(d);
    let mut rep = SampleReport { samples: points.len(), max_residual: 0.0, min_rank_gap: f64::INFINITY, failures: vec![] };
    for (i, q) in points.iter().enumerate() {
        let res = ev.relative_residuals(q).into_iter().fold(0.0, f64::max);
        rep.max_residual = rep.max_residual.max(res);
        let gap = rank_gap(&ev.jacobian(q), ev.l2());
        rep.min_rank_gap = rep.min_rank_gap.min(gap);
        if res > tol.residual {
            rep.failures.push(Witness { index: i, point: q.clone(), detail: format!("residual {res:e}") });
        } else if gap <= tol.rank_gap {
            rep.failures.push(Witness { index: i, point: q.clone(), detail: format!("rank gap {gap:e}") });
        }
    }
    rep
}

/// Whether a float point on circle `j` lies on the closure of D: a point nudged into the
/// positive side of `f_j` must be in D.
fn on_closure(region: &Region, j: usize, x: f64, y: f64) -> bool {
    let (p1, p2, r) = region.circles[j].f64_params();
    let (ux, uy) = ((x - p1) / r, (y - p2) / r);
    let sign = if region.circles[j].eval_f64(p1 + 2.0 * r, p2) > 0.0 { 1.0 } else { -1.0 };
    let h = 1e-7 * r;
    region.in_d_f64(x + sign * h * ux, y + sign * h * uy)
}

/// Random points of M: four in five over interior points of D, the rest over boundary arcs.
pub fn manifold_samples(d: &MomentData, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, NumericError> {
    let region = d.region().ok_or(NumericError::NotPlanar)?;
    let ev = SystemEval::new(d);
    let (x0, x1, y0, y1) = (
        rat_to_f64(&region.bbox.0),
        rat_to_f64(&region.bbox.1),
        rat_to_f64(&region.bbox.2),
        rat_to_f64(&region.bbox.3),
    );
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = sample_rng(seed, i as u64);
        let units = ev.random_units(&mut rng);
        if i % 5 == 4 {
            let found = (0..1000).find_map(|_| {
                let j = rng.random_range(0..region.circles.len());
                let (p1, p2, r) = region.circles[j].f64_params();
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (x, y) = (p1 + r * t.cos(), p2 + r * t.sin());
                on_closure(region, j, x, y).then_some((x, y))
            });
            if let Some((x, y)) = found {
                out.push(ev.lift(&[x, y], &units));
                continue;
            }
        }
        let p = loop {
            let x = rng.random_range(x0..x1);
            let y = rng.random_range(y0..y1);
            if region.in_d_f64(x, y) {
                let p = [rat_from_f64(x), rat_from_f64(y)];
                if is_strictly_interior(d, &p) {
                    break p;
                }
            }
        };
        let x: Vec<f64> = p.iter().map(rat_to_f64).collect();
        out.push(ev.lift(&x, &units));
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ImageReport {
    pub samples: usize,
    pub inside: usize,
    pub outside: usize,
    pub band: usize,
    /// Grid points outside the closure of D where some group product is negative.
    pub hole_witnesses: usize,
    pub failures: Vec<Witness>,
}

impl ImageReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Grid over the bounding box, one jittered point per cell: points of D need every group
/// product positive, points off the closure need a negative one.
pub fn image_check(d: &MomentData, grid: usize, seed: u64, tol: &Tolerances) -> Result<ImageReport, NumericError> {
    let region = d.region().ok_or(NumericError::NotPlanar)?;
    let ev = SystemEval::new(d);
    let (x0, x1, y0, y1) = (
        rat_to_f64(&region.bbox.0),
        rat_to_f64(&region.bbox.1),
        rat_to_f64(&region.bbox.2),
        rat_to_f64(&region.bbox.3),
    );
    let mut rep = ImageReport::default();
    for i in 0..grid {
        let mut rng = sample_rng(seed, i as u64);
        for j in 0..grid {
            let x = x0 + (x1 - x0) * (i as f64 + rng.random::<f64>()) / grid as f64;
            let y = y0 + (y1 - y0) * (j as f64 + rng.random::<f64>()) / grid as f64;
            rep.samples += 1;
            let vals = ev.base_values(&[x, y]);
            let prods = ev.products(&[x, y]);
            let near = vals.iter().any(|v| v.abs() < tol.band);
            if near {
                rep.band += 1;
                continue;
            }
            if region.in_d_f64(x, y) {
                rep.inside += 1;
                if prods.iter().any(|&p| p <= 0.0) {
                    rep.failures.push(Witness {
                        index: rep.samples - 1,
                        point: vec![x, y],
                        detail: "point of D with a non-positive group product".into(),
                    });
                }
            } else {
                rep.outside += 1;
                if prods.iter().any(|&p| p < 0.0) {
                    rep.hole_witnesses += 1;
                } else {
                    rep.failures.push(Witness {
                        index: rep.samples - 1,
                        point: vec![x, y],
                        detail: "point off the closure of D with all group products non-negative".into(),
                    });
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentReport {
    pub pushforward_dim: usize,
    pub expected_dim: usize,
    pub max_angle: f64,
    pub singular: bool,
    pub passed: bool,
}

/// Orthonormal basis (columns) of the span of `m`'s columns, using singular values above
/// `rel * sigma_1`.
fn column_basis(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&k| smax > 0.0 && svd.singular_values[k] > rel * smax).collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Largest principal angle between two column spans of equal dimension.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let m = a.transpose() * b;
    let s = sorted_singular_values(&m);
    s.last().copied().unwrap_or(0.0).clamp(-1.0, 1.0).acos()
}

/// Tangent space of M at `q` (kernel of the Jacobian) pushed to the plane, compared with the
/// tangent space of the stratum through the base point; `stratum` lists circle indices.
pub fn tangent_check(d: &MomentData, q: &[f64], stratum: &[usize], tol: &Tolerances) -> TangentReport {
    let ev = SystemEval::new(d);
    let jac = ev.jacobian(q);
    let nv = ev.nvars;
    let jtj = jac.transpose() * &jac;
    let eig = jtj.symmetric_eigen();
    let emax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let rank = eig.eigenvalues.iter().filter(|&&e| e > 1e-14 * emax.max(1e-300)).count();
    let mut idx: Vec<usize> = (0..nv).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let kernel: Vec<usize> = idx.into_iter().take(nv - rank).collect();
    let proj = DMatrix::from_fn(ev.n, kernel.len(), |i, j| eig.eigenvectors[(i, kernel[j])]);
    let push = column_basis(&proj, 1e-6);
    let expected_dim = ev.n.saturating_sub(stratum.len());
    let x = &q[..ev.n];
    let stratum_tangent = match (ev.n, stratum.len()) {
        (2, 1) => {
            let g: Vec<f64> = (0..2).map(|k| {
                let h = 1e-6;
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[k] += h;
                b[k] -= h;
                (ev.base[stratum[0]].eval(&a) - ev.base[stratum[0]].eval(&b)) / (2.0 * h)
            }).collect();
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            DMatrix::from_column_slice(2, 1, &[-g[1] / norm, g[0] / norm])
        }
        (n, 0) => DMatrix::identity(n, n),
        (n, _) => DMatrix::zeros(n, 0),
    };
    let max_angle = max_principal_angle(&push, &stratum_tangent);
    let singular = push.ncols() < ev.n;
    let passed = push.ncols() == expected_dim && max_angle < tol.angle && singular == !stratum.is_empty();
    TangentReport { pushforward_dim: push.ncols(), expected_dim, max_angle, singular, passed }
}

/// Point of M with the indices of the circles through its image.
pub type BoundaryPoint = (Vec<f64>, Vec<usize>);

/// Up to `count` points of M over the boundary of D with the circle indices through them:
/// every boundary crossing first, then points spread along the closure arcs.
pub fn boundary_samples(d: &MomentData, count: usize, seed: u64) -> Result<Vec<BoundaryPoint>, NumericError> {
    let region = d.region().ok_or(NumericError::NotPlanar)?;
    let ev = SystemEval::new(d);
    let mut rng = sample_rng(seed, 0);
    let mut out = Vec::new();
    for c in region.boundary_crossings() {
        if out.len() == count {
            break;
        }
        let units = ev.random_units(&mut rng);
        let x = [c.x.to_f64(), c.y.to_f64()];
        let mut q = ev.lift(&x, &units);
        for (i, g) in ev.groups.iter().enumerate() {
            if g.contains(&(c.circles.0 - 1)) || g.contains(&(c.circles.1 - 1)) {
                let (a, b) = ev.blocks[i];
                q[a..b].iter_mut().for_each(|v| *v = 0.0);
            }
        }
        out.push((q, vec![c.circles.0 - 1, c.circles.1 - 1]));
    }
    let steps = 720;
    let mut arc_points = Vec::new();
    for (j, c) in region.circles.iter().enumerate() {
        let (p1, p2, r) = c.f64_params();
        for s in 0..steps {
            let t = std::f64::consts::TAU * (s as f64 + 0.5) / steps as f64;
            let (x, y) = (p1 + r * t.cos(), p2 + r * t.sin());
            let others_clear = region.circles.iter().enumerate().all(|(k, o)| k == j || o.eval_f64(x, y) > 1e-3);
            if others_clear && on_closure(region, j, x, y) {
                arc_points.push((j, x, y));
            }
        }
    }
    let need = count.saturating_sub(out.len());
    if need > 0 && !arc_points.is_empty() {
        for k in 0..need {
            let (j, x, y) = arc_points[k * arc_points.len() / need];
            let units = ev.random_units(&mut rng);
            let mut q = ev.lift(&[x, y], &units);
            for (i, g) in ev.groups.iter().enumerate() {
                if g.contains(&j) {
                    let (a, b) = ev.blocks[i];
                    q[a..b].iter_mut().for_each(|v| *v = 0.0);
                }
            }
            out.push((q, vec![j]));
        }
    }
    Ok(out)
}

/// Distance from `e1` to the row space of the Jacobian: zero exactly where the first
/// coordinate restricted to M is singular.
pub fn first_coordinate_residual(ev: &SystemEval, q: &[f64]) -> f64 {
    let jac = ev.jacobian(q);
    let svd = jac.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut inside = 0.0;
    for k in 0..svd.singular_values.len() {
        if smax > 0.0 && svd.singular_values[k] > 1e-12 * smax {
            inside += vt[(k, 0)] * vt[(k, 0)];
        }
    }
    (1.0 - inside).max(0.0).sqrt()
}

/// x-values where the first coordinate is numerically singular, found by walking every
/// circle's closure arcs over fiber points with the circle's group sphere collapsed.
pub fn detect_singular_x(d: &MomentData) -> Result<Vec<f64>, NumericError> {
    let region = d.region().ok_or(NumericError::NotPlanar)?;
    let ev = SystemEval::new(d);
    let units: Vec<Vec<f64>> = ev.blocks.iter().map(|&(a, b)| (a..b).map(|k| if k == a { 1.0 } else { 0.0 }).collect()).collect();
    let mut found: Vec<f64> = Vec::new();
    for (j, c) in region.circles.iter().enumerate() {
        let (p1, p2, r) = c.f64_params();
        let point = |t: f64| (p1 + r * t.cos(), p2 + r * t.sin());
        let lift = |t: f64| {
            let (x, y) = point(t);
            let mut q = ev.lift(&[x, y], &units);
            for (i, g) in ev.groups.iter().enumerate() {
                if g.contains(&j) {
                    let (a, b) = ev.blocks[i];
                    q[a..b].iter_mut().for_each(|v| *v = 0.0);
                }
            }
            q
        };
        let closed = |t: f64| {
            let (x, y) = point(t);
            on_closure(region, j, x, y)
        };
        let res = |t: f64| first_coordinate_residual(&ev, &lift(t));
        let steps = 4096;
        let h = std::f64::consts::TAU / steps as f64;
        let ts: Vec<f64> = (0..steps).map(|s| s as f64 * h).collect();
        let cl: Vec<bool> = ts.iter().map(|&t| closed(t)).collect();
        let rs: Vec<f64> = ts.iter().zip(&cl).map(|(&t, &c)| if c { res(t) } else { f64::INFINITY }).collect();
        for s in 0..steps {
            let prev = (s + steps - 1) % steps;
            let next = (s + 1) % steps;
            if !cl[s] {
                continue;
            }
            // ends of closure arcs are crossings
            for (nb, dir) in [(prev, -1.0), (next, 1.0)] {
                if !cl[nb] {
                    let (mut a, mut b) = (ts[s], ts[s] + dir * h);
                    for _ in 0..80 {
                        let m = 0.5 * (a + b);
                        if closed(m) {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    found.push(point(a).0);
                }
            }
            if rs[s] <= rs[prev] && rs[s] < rs[next] && rs[s] < 1e-2 {
                let (mut a, mut b) = (ts[s] - h, ts[s] + h);
                let g = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..200 {
                    let c1 = b - g * (b - a);
                    let c2 = a + g * (b - a);
                    if res(c1) < res(c2) {
                        b = c2;
                    } else {
                        a = c1;
                    }
                }
                let t = 0.5 * (a + b);
                if res(t) < 1e-6 && closed(t) {
                    found.push(point(t).0);
                }
            }
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for x in found {
        if out.last().is_none_or(|&l| (x - l).abs() > 1e-7) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Second difference of the first coordinate along a curve of M through the critical
/// fiber over a pole: `x1(s)` solves `product_g(x1, y_pole) = s^2`, `h = 1e-3`.
pub fn pole_second_difference(d: &MomentData, circle: usize, left: bool) -> f64 {
    let ev = SystemEval::new(d);
    let c = &d.circles[circle];
    let (p1, p2, r) = c.f64_params();
    let x0 = if left { p1 - r } else { p1 + r };
    let g = ev.groups.iter().position(|g| g.contains(&circle)).unwrap();
    let prod = |x: f64| ev.products(&[x, p2])[g];
    let into = if prod(x0 + 1e-6) > 0.0 { 1.0 } else { -1.0 };
    let solve = |s: f64| {
        let target = s * s;
        let (mut a, mut b) = (x0, x0 + into * 0.5 * r);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if prod(m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let h = 1e-3;
    (solve(h) - 2.0 * x0 + solve(-h)) / (h * h)
}

/// Reeb graph by marching vertical slices of the positivity set with floats; vertices carry
/// their x-values and are sorted by them.
#[derive(Clone, Debug)]
pub struct OracleGraph {
    pub xs: Vec<f64>,
    pub graph: MultiGraph,
}

fn float_events(circles: &[Circle]) -> (Vec<f64>, Vec<(f64, f64)>) {
    let mut xs = Vec::new();
    let mut crossings = Vec::new();
    for (i, a) in circles.iter().enumerate() {
        let (ax, ay, ar) = a.f64_params();
        xs.push(ax - ar);
        xs.push(ax + ar);
        for b in &circles[i + 1..] {
            let (bx, by, br) = b.f64_params();
            let (dx, dy) = (bx - ax, by - ay);
            let dist = (dx * dx + dy * dy).sqrt();
            if dist == 0.0 || dist > ar + br || dist < (ar - br).abs() {
                continue;
            }
            let l = (ar * ar - br * br + dist * dist) / (2.0 * dist);
            let h = (ar * ar - l * l).max(0.0).sqrt();
            let (mx, my) = (ax + l * dx / dist, ay + l * dy / dist);
            for s in [-1.0, 1.0] {
                let p = (mx - s * h * dy / dist, my + s * h * dx / dist);
                xs.push(p.0);
                crossings.push(p);
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<f64> = Vec::new();
    for x in xs {
        if merged.last().is_none_or(|&l| x - l > 1e-9) {
            merged.push(x);
        }
    }
    (merged, crossings)
}

/// Open intervals of `{all f_j > 0}` on the vertical line at `t`.
fn float_slice(circles: &[Circle], t: f64) -> Vec<(f64, f64)> {
    let mut ys: Vec<(f64, usize)> = Vec::new();
    for (j, c) in circles.iter().enumerate() {
        let (p1, p2, r) = c.f64_params();
        let h2 = r * r - (t - p1) * (t - p1);
        if h2 > 0.0 {
            let h = h2.sqrt();
            ys.push((p2 - h, j));
            ys.push((p2 + h, j));
        }
    }
    ys.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut inside: Vec<bool> = circles.iter().map(|c| c.orientation == Orientation::Outside).collect();
    let mut out = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    for (y, j) in ys {
        if inside.iter().all(|&b| b) {
            out.push((lo, y));
        }
        inside[j] = !inside[j];
        lo = y;
    }
    if inside.iter().all(|&b| b) {
        out.push((lo, f64::INFINITY));
    }
    out
}

fn overlaps(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0.max(b.0) < a.1.min(b.1)
}

fn same_components(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| overlaps(*p, *q))
}

struct Uf(Vec<usize>);

type Slice = (f64, Vec<(f64, f64)>);

impl Uf {
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let r = self.find(self.0[i]);
            self.0[i] = r;
        }
        self.0[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra.max(rb)] = ra.min(rb);
    }
}

pub fn reeb_oracle(d: &MomentData, resolution: usize) -> Result<OracleGraph, NumericError> {
    if d.circles.is_empty() {
        return Err(NumericError::NotPlanar);
    }
    let circles = &d.circles;
    let (events, crossings) = float_events(circles);
    let seed = (rat_to_f64(&d.seed[0]), rat_to_f64(&d.seed[1]));
    // slices per gap, each a list of (t, intervals)
    let mut gaps: Vec<Vec<Slice>> = Vec::new();
    for k in 1..events.len() {
        let (a, b) = (events[k - 1], events[k]);
        let eps = ((b - a) * 1e-4).min(1e-7);
        let mut ts = vec![a + eps];
        ts.extend((1..=resolution).map(|i| a + (b - a) * i as f64 / (resolution + 1) as f64));
        if seed.0 > a + eps && seed.0 < b - eps {
            ts.push(seed.0);
        }
        ts.push(b - eps);
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut slices: Vec<Slice> = ts.into_iter().map(|t| (t, float_slice(circles, t))).collect();
        // bisect between samples whose intervals do not pair up
        let mut s = 1;
        while s < slices.len() {
            if same_components(&slices[s - 1].1, &slices[s].1) {
                s += 1;
                continue;
            }
            let (t0, t1) = (slices[s - 1].0, slices[s].0);
            if t1 - t0 < 1e-12 * (1.0 + t0.abs()) {
                return Err(NumericError::Resolution(t0, t1));
            }
            let m = 0.5 * (t0 + t1);
            slices.insert(s, (m, float_slice(circles, m)));
        }
        gaps.push(slices);
    }
    // every interval of every slice gets a node; chains of nodes are edges
    let mut ids: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut count = 0;
    for g in &gaps {
        ids.push(
            g.iter()
                .map(|(_, iv)| {
                    let v: Vec<usize> = (count..count + iv.len()).collect();
                    count += iv.len();
                    v
                })
                .collect(),
        );
    }
    let mut uf = Uf((0..count).collect());
    for (k, g) in gaps.iter().enumerate() {
        for s in 1..g.len() {
            for (&a, &b) in ids[k][s - 1].iter().zip(&ids[k][s]) {
                uf.union(a, b);
            }
        }
    }
    // events between gap k and gap k+1
    let mut vertex_x: Vec<f64> = Vec::new();
    let mut vertex_of_group: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut unbounded: Vec<bool> = vec![false; count];
    for k in 0..gaps.len() {
        let last = gaps[k].len() - 1;
        let first = 0;
        for (i, iv) in gaps[k][last].1.iter().enumerate() {
            if iv.0.is_infinite() || iv.1.is_infinite() {
                unbounded[ids[k][last][i]] = true;
            }
        }
        for (i, iv) in gaps[k][first].1.iter().enumerate() {
            if iv.0.is_infinite() || iv.1.is_infinite() {
                unbounded[ids[k][first][i]] = true;
            }
        }
    }
    for k in 0..=gaps.len() {
        let x = events[k];
        let left: Vec<(f64, f64)> = if k == 0 { vec![] } else { gaps[k - 1].last().unwrap().1.clone() };
        let right: Vec<(f64, f64)> = if k == gaps.len() { vec![] } else { gaps[k][0].1.clone() };
        let lid = |i: usize| ids[k - 1][gaps[k - 1].len() - 1][i];
        let rid = |i: usize| ids[k][0][i];
        // connected groups of the overlap relation
        let nl = left.len();
        let mut guf = Uf((0..nl + right.len()).collect());
        for (i, &l) in left.iter().enumerate() {
            for (j, &r) in right.iter().enumerate() {
                if overlaps(l, r) {
                    guf.union(i, nl + j);
                }
            }
        }
        let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for i in 0..nl {
            groups.entry(guf.find(i)).or_default().0.push(i);
        }
        for j in 0..right.len() {
            groups.entry(guf.find(nl + j)).or_default().1.push(j);
        }
        let near_crossing = |iv: (f64, f64)| {
            crossings.iter().any(|&(cx, cy)| (cx - x).abs() < 1e-7 && ((iv.0 - cy).abs() < 1e-4 || (iv.1 - cy).abs() < 1e-4))
        };
        for (_, (ls, rs)) in groups {
            let relabel = ls.len() == 1 && rs.len() == 1 && (near_crossing(left[ls[0]]) || near_crossing(right[rs[0]]));
            if ls.len() == 1 && rs.len() == 1 && !relabel {
                uf.union(lid(ls[0]), rid(rs[0]));
                continue;
            }
            vertex_x.push(x);
            vertex_of_group.push((vertex_x.len() - 1, ls.iter().map(|&i| lid(i)).collect(), rs.iter().map(|&j| rid(j)).collect()));
        }
    }
    // chains: representative -> (start vertex, end vertex)
    let mut ends: BTreeMap<usize, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (v, ls, rs) in &vertex_of_group {
        for &l in ls {
            ends.entry(uf.find(l)).or_default().1 = Some(*v);
        }
        for &r in rs {
            ends.entry(uf.find(r)).or_default().0 = Some(*v);
        }
    }
    let mut bad_chain = vec![false; count];
    for (i, &u) in unbounded.iter().enumerate() {
        if u {
            let r = uf.find(i);
            bad_chain[r] = true;
        }
    }
    // seed chain
    let mut seed_chain = None;
    'outer: for (k, g) in gaps.iter().enumerate() {
        for (s, (t, iv)) in g.iter().enumerate() {
            if *t == seed.0 {
                for (i, &(a, b)) in iv.iter().enumerate() {
                    if a < seed.1 && seed.1 < b {
                        seed_chain = Some(uf.find(ids[k][s][i]));
                        break 'outer;
                    }
                }
            }
        }
    }
    let Some(seed_chain) = seed_chain else {
        return Err(NumericError::Resolution(seed.0, seed.0));
    };
    // components over vertices and chains
    let nv = vertex_x.len();
    let chain_list: Vec<(usize, Option<usize>, Option<usize>)> = ends.iter().map(|(&c, &(a, b))| (c, a, b)).collect();
    let mut cuf = Uf((0..nv + chain_list.len()).collect());
    for (ci, &(_, a, b)) in chain_list.iter().enumerate() {
        if let Some(a) = a {
            cuf.union(nv + ci, a);
        }
        if let Some(b) = b {
            cuf.union(nv + ci, b);
        }
    }
    let seed_ci = chain_list.iter().position(|&(c, _, _)| c == seed_chain);
    let root = match seed_ci {
        Some(ci) => cuf.find(nv + ci),
        None => return Err(NumericError::Resolution(seed.0, seed.0)),
    };
    let mut keep: Vec<usize> = (0..nv).filter(|&v| cuf.find(v) == root).collect();
    keep.sort_by(|&a, &b| vertex_x[a].partial_cmp(&vertex_x[b]).unwrap());
    let mut new_id = vec![usize::MAX; nv];
    for (i, &v) in keep.iter().enumerate() {
        new_id[v] = i;
    }
    let mut edges = Vec::new();
    for (ci, &(c, a, b)) in chain_list.iter().enumerate() {
        if cuf.find(nv + ci) != root {
            continue;
        }
        match (a, b) {
            (Some(a), Some(b)) if !bad_chain[c] => edges.push((new_id[a], new_id[b])),
            _ => return Err(NumericError::Resolution(vertex_x.first().copied().unwrap_or(0.0), 0.0)),
        }
    }
    Ok(OracleGraph { xs: keep.iter().map(|&v| vertex_x[v]).collect(), graph: MultiGraph { n: keep.len(), edges } })
}

/// Whether the exact Reeb graph and the oracle agree with vertices matched by x-order.
pub fn matches_oracle(exact: &crate::reeb_sweep::ReebGraph, oracle: &OracleGraph, tol: f64) -> bool {
    exact.vertices.len() == oracle.xs.len()
        && exact.vertices.iter().zip(&oracle.xs).all(|(v, &x)| (v.x.to_f64() - x).abs() < tol)
        && exact.to_multigraph().sorted_edges() == oracle.graph.sorted_edges()
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub grid: usize,
    pub boundary_points: usize,
    pub oracle_resolution: usize,
    pub tol: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: 100, seed: 7, grid: 200, boundary_points: 20, oracle_resolution: 8, tol: Tolerances::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularReport {
    pub exact: Vec<f64>,
    pub detected: Vec<f64>,
    pub max_error: f64,
    pub second_differences: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub skipped: Option<String>,
    pub vertices: usize,
    pub edges: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub rank: SampleReport,
    pub image: ImageReport,
    pub tangent: Vec<TangentReport>,
    pub singular: SingularReport,
    pub oracle: OracleReport,
}

/// Every numeric check on plane data.
pub fn verify(d: &MomentData, opts: &VerifyOptions) -> Result<VerifyReport, NumericError> {
    let region = d.region().ok_or(NumericError::NotPlanar)?;
    let pts = manifold_samples(d, opts.samples, opts.seed)?;
    let rank = rank_check(d, &pts, &opts.tol);
    let image = image_check(d, opts.grid, opts.seed, &opts.tol)?;
    let tangent: Vec<TangentReport> = boundary_samples(d, opts.boundary_points, opts.seed)?
        .iter()
        .map(|(q, s)| tangent_check(d, q, s, &opts.tol))
        .collect();
    let exact: Vec<f64> = crate::reeb_sweep::singular_x_values(d)
        .map(|xs| xs.iter().map(|x| x.to_f64()).collect())
        .unwrap_or_default();
    let detected = detect_singular_x(d)?;
    let max_error = if exact.len() == detected.len() {
        exact.iter().zip(&detected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let second_differences: Vec<f64> = region
        .poles
        .iter()
        .filter(|p| p.in_closure)
        .take(5)
        .map(|p| pole_second_difference(d, p.circle - 1, p.side == crate::arrangement::Side::Left))
        .collect();
    let singular = SingularReport {
        passed: max_error < 1e-6 && second_differences.iter().all(|v| v.abs() > 1e-4),
        exact,
        detected,
        max_error,
        second_differences,
    };
    let oracle = match crate::reeb_sweep::reeb_graph(d) {
        Err(e) => OracleReport { skipped: Some(e.to_string()), vertices: 0, edges: 0, passed: true },
        Ok(g) => match reeb_oracle(d, opts.oracle_resolution) {
            Ok(o) => OracleReport {
                skipped: None,
                vertices: o.graph.n,
                edges: o.graph.edges.len(),
                passed: matches_oracle(&g, &o, 1e-6),
            },
            Err(e) => OracleReport { skipped: Some(e.to_string()), vertices: 0, edges: 0, passed: false },
        },
    };
    Ok(VerifyReport {
        passed: rank.passed() && image.passed() && tangent.iter().all(|t| t.passed) && singular.passed && oracle.passed,
        rank,
        image,
        tangent,
        singular,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};
    use crate::fixtures;
    use crate::reeb_sweep::reeb_graph;

    #[test]
    fn annulus_fiber_radius() {
        let d = fixtures::annulus();
        assert_eq!(d.group_products(&[rat(3, 2), int(0)]), vec![rat(35, 16)]);
        let pts = sample_fiber(&d, &[rat(3, 2), int(0)], 4, 1).unwrap();
        for q in &pts {
            let y2: f64 = q[2..].iter().map(|v| v * v).sum();
            assert!((y2 - 35.0 / 16.0).abs() < 1e-12);
        }
        assert_eq!(sample_fiber(&d, &[int(2), int(0)], 1, 1), Err(NumericError::NotInterior));
    }

    #[test]
    fn disk_fiber_on_unit_circle() {
        let d = fixtures::disk();
        let pts = sample_fiber(&d, &[int(0), int(0)], 4, 3).unwrap();
        assert_eq!(pts.len(), 4);
        let ev = SystemEval::new(&d);
        for q in &pts {
            assert!(ev.relative_residuals(q)[0] < 1e-12);
        }
    }

    #[test]
    fn products_on_grid_points() {
        assert_eq!(fixtures::annulus().group_products(&[int(0), int(0)]), vec![int(-4)]);
        assert_eq!(fixtures::disk().group_products(&[int(2), int(0)]), vec![int(-3)]);
    }

    #[test]
    fn tangent_examples() {
        let d = fixtures::annulus();
        let tol = Tolerances::default();
        let r = tangent_check(&d, &[2.0, 0.0, 0.0, 0.0], &[0], &tol);
        assert_eq!(r.pushforward_dim, 1);
        assert!(r.passed, "{r:?}");
        let r = tangent_check(&d, &[1.5, 0.0, (35f64 / 16.0).sqrt(), 0.0], &[], &tol);
        assert_eq!(r.pushforward_dim, 2);
        assert!(r.passed);
        let cp = fixtures::crossing_pair();
        let c = cp.region().unwrap().boundary_crossings().next().unwrap().clone();
        let q = [c.x.to_f64(), c.y.to_f64(), 0.0, 0.0, 0.0, 0.0, 0.0];
        let r = tangent_check(&cp, &q, &[0, 1], &tol);
        assert_eq!(r.pushforward_dim, 0);
        assert!(r.passed);
    }

    #[test]
    fn rank_on_disk_and_negative_control() {
        let tol = Tolerances::default();
        let d = fixtures::disk();
        let pts = manifold_samples(&d, 50, 7).unwrap();
        let rep = rank_check(&d, &pts, &tol);
        assert!(rep.passed(), "{:?}", rep.failures.first());
        let t = fixtures::tangent_pair();
        let rep = rank_check(&t, &[vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]], &tol);
        assert!(!rep.passed());
    }

    #[test]
    fn oracle_on_fixtures() {
        for (name, d) in fixtures::all() {
            let exact = reeb_graph(&d).unwrap();
            let o = reeb_oracle(&d, 8).unwrap();
            assert!(matches_oracle(&exact, &o, 1e-6), "{name}: {:?} vs {:?}", o, exact.to_multigraph());
        }
    }

    #[test]
    fn singular_values_located() {
        let d = fixtures::annulus();
        let xs = detect_singular_x(&d).unwrap();
        let expected = [-2.0, -1.0, 1.0, 2.0];
        assert_eq!(xs.len(), 4, "{xs:?}");
        for (a, b) in xs.iter().zip(expected) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn second_difference_nonzero() {
        let d = fixtures::disk();
        assert!(pole_second_difference(&d, 0, true).abs() > 1e-4);
    }

    #[test]
    fn image_and_singular_values_on_fixtures() {
        let tol = Tolerances::default();
        for (name, d) in fixtures::all() {
            let rep = image_check(&d, 40, 5, &tol).unwrap();
            assert!(rep.passed(), "{name}: {:?}", rep.failures.first());
            let exact: Vec<f64> =
                crate::reeb_sweep::singular_x_values(&d).unwrap().iter().map(|q| q.to_f64()).collect();
            let found = detect_singular_x(&d).unwrap();
            assert_eq!(exact.len(), found.len(), "{name}: {found:?} vs {exact:?}");
            for (a, b) in exact.iter().zip(&found) {
                assert!((a - b).abs() < 1e-6, "{name}");
            }
        }
    }

    #[test]
    fn rank_on_fixtures() {
        let tol = Tolerances::default();
        for (name, d) in fixtures::all() {
            let pts = manifold_samples(&d, 100, 11).unwrap();
            let rep = rank_check(&d, &pts, &tol);
            assert!(rep.passed(), "{name}: {:?}", rep.failures.first());
            for (q, s) in boundary_samples(&d, 20, 3).unwrap() {
                assert!(tangent_check(&d, &q, &s, &tol).passed, "{name} {q:?}");
            }
        }
    }
}
