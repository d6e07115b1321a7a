//! Loop-free finite multigraphs: canonical labeling, isomorphism, collapses, smoothing and
//! the builders for predicted graphs.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph is not connected")]
    NotConnected,
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("j1 + j2 = {0} but n' = {1}")]
    Arity(usize, usize),
    #[error("graph text: {0}")]
    Parse(String),
}

/// Vertices `0..n`; edges as unordered pairs, parallel edges allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl MultiGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        for &(u, v) in &edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v));
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
        }
        Ok(MultiGraph { n, edges })
    }

    /// Path with `k` vertices.
    pub fn path(k: usize) -> Self {
        MultiGraph { n: k, edges: (1..k).map(|i| (i - 1, i)).collect() }
    }

    /// Cycle with `k >= 2` vertices.
    pub fn cycle(k: usize) -> Self {
        let mut g = Self::path(k);
        g.edges.push((k - 1, 0));
        g
    }

    /// Two vertices joined by `k` parallel edges.
    pub fn theta(k: usize) -> Self {
        MultiGraph { n: 2, edges: vec![(0, 1); k] }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut a = vec![vec![0u32; self.n]; self.n];
        for &(u, v) in &self.edges {
            a[u][v] += 1;
            a[v][u] += 1;
        }
        a
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                if adj[u][v] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Removes vertex `v` and its edges, renumbering the later vertices down by one.
    pub fn remove_vertex(&self, v: usize) -> MultiGraph {
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != v && b != v)
            .map(|&(a, b)| (a - (a > v) as usize, b - (b > v) as usize))
            .collect();
        MultiGraph { n: self.n - 1, edges }
    }

    /// `V n` followed by one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("V {}\n", self.n);
        for &(u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let head = lines.next().ok_or_else(|| GraphError::Parse("empty".into()))?;
        let n = head
            .strip_prefix("V ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| GraphError::Parse(format!("bad header {head:?}")))?;
        let mut edges = Vec::new();
        for l in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(GraphError::Parse(format!("bad edge line {l:?}")));
            }
            let u = parts[0].parse().map_err(|_| GraphError::Parse(format!("bad vertex {:?}", parts[0])))?;
            let v = parts[1].parse().map_err(|_| GraphError::Parse(format!("bad vertex {:?}", parts[1])))?;
            edges.push((u, v));
        }
        MultiGraph::new(n, edges)
    }

    /// Edge multiset with each pair sorted, for labeled comparison.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        e.sort();
        e
    }
}

impl fmt::Display for MultiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

pub fn betti1(g: &MultiGraph) -> Result<usize, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::NotConnected);
    }
    Ok(g.edges.len() + 1 - g.n.min(g.edges.len() + 1))
}

/// Isomorphism-invariant encoding: vertex count and the upper triangle of the adjacency
/// matrix under the canonical labeling.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub n: usize,
    pub cells: Vec<u32>,
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.cells.iter().map(|c| c.to_string()).collect();
        write!(f, "{}:{}", self.n, body.join(""))
    }
}

/// Refines a coloring to the coarsest equitable one below it. Colors are ranks of
/// labeling-independent signatures, so the result commutes with relabeling.
fn refine(adj: &[Vec<u32>], colors: &mut [usize]) {
    let n = adj.len();
    let mut count = colors.iter().collect::<HashSet<_>>().len();
    loop {
        let mut sigs: Vec<(usize, Vec<(usize, u32)>)> = (0..n)
            .map(|v| {
                let mut s: Vec<(usize, u32)> = Vec::new();
                for u in 0..n {
                    if adj[v][u] > 0 {
                        s.push((colors[u], adj[v][u]));
                    }
                }
                s.sort();
                // collapse to (color, total multiplicity)
                let mut merged: Vec<(usize, u32)> = Vec::new();
                for (c, k) in s {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += k,
                        _ => merged.push((c, k)),
                    }
                }
                (colors[v], merged)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        let new_count = distinct.len();
        for (v, sig) in sigs.drain(..).enumerate() {
            colors[v] = distinct.binary_search(&sig).unwrap();
        }
        if new_count == count {
            return;
        }
        count = new_count;
    }
}

struct Search<'a> {
    adj: &'a [Vec<u32>],
    best: Option<(Vec<u32>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn certificate(&self, colors: &[usize]) -> Vec<u32> {
        let n = self.adj.len();
        let mut inv = vec![0; n];
        for (v, &c) in colors.iter().enumerate() {
            inv[c] = v;
        }
        let mut cert = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                cert.push(self.adj[inv[i]][inv[j]]);
            }
        }
        cert
    }

    fn visit(&mut self, colors: Vec<usize>, prefix: &mut Vec<usize>) {
        let n = self.adj.len();
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c] += 1;
        }
        let target = (0..n).filter(|&c| sizes[c] > 1).min_by_key(|&c| (sizes[c], c));
        let Some(cell) = target else {
            let cert = self.certificate(&colors);
            match &self.best {
                None => self.best = Some((cert, colors)),
                Some((bc, bcol)) => match cert.cmp(bc) {
                    std::cmp::Ordering::Less => self.best = Some((cert, colors)),
                    std::cmp::Ordering::Equal => {
                        // v -> vertex with the same canonical position in the best leaf
                        let mut inv = vec![0; n];
                        for (v, &c) in bcol.iter().enumerate() {
                            inv[c] = v;
                        }
                        let aut: Vec<usize> = (0..n).map(|v| inv[colors[v]]).collect();
                        if aut.iter().enumerate().any(|(i, &j)| i != j) {
                            self.automorphisms.push(aut);
                        }
                    }
                    std::cmp::Ordering::Greater => {}
                },
            }
            return;
        };
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == cell).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &members {
            if !explored.is_empty() && self.same_orbit(prefix, &explored, v) {
                continue;
            }
            explored.push(v);
            let mut next: Vec<usize> = colors.iter().enumerate().map(|(u, &c)| 2 * c + usize::from(u != v)).collect();
            let mut keys = next.clone();
            keys.sort();
            keys.dedup();
            for c in next.iter_mut() {
                *c = keys.binary_search(c).unwrap();
            }
            refine(self.adj, &mut next);
            prefix.push(v);
            self.visit(next, prefix);
            prefix.pop();
        }
    }

    /// Whether `v` lies in the orbit of an explored vertex under the stored automorphisms
    /// that fix the prefix pointwise.
    fn same_orbit(&self, prefix: &[usize], explored: &[usize], v: usize) -> bool {
        let gens: Vec<&Vec<usize>> =
            self.automorphisms.iter().filter(|a| prefix.iter().all(|&p| a[p] == p)).collect();
        if gens.is_empty() {
            return false;
        }
        let mut orbit = vec![v];
        let mut seen: HashSet<usize> = HashSet::from([v]);
        let mut i = 0;
        while i < orbit.len() {
            let u = orbit[i];
            for g in &gens {
                if seen.insert(g[u]) {
                    orbit.push(g[u]);
                }
            }
            i += 1;
        }
        explored.iter().any(|e| seen.contains(e))
    }
}

pub fn canonical_form(g: &MultiGraph) -> CanonicalForm {
    let adj = g.adjacency();
    let mut colors = vec![0; g.n];
    refine(&adj, &mut colors);
    let mut s = Search { adj: &adj, best: None, automorphisms: Vec::new() };
    if g.n > 0 {
        s.visit(colors, &mut Vec::new());
    }
    CanonicalForm { n: g.n, cells: s.best.map(|b| b.0).unwrap_or_default() }
}

pub fn is_isomorphic(g: &MultiGraph, h: &MultiGraph) -> bool {
    if g.n != h.n || g.edges.len() != h.edges.len() {
        return false;
    }
    let mut dg = g.degrees();
    let mut dh = h.degrees();
    dg.sort();
    dh.sort();
    dg == dh && canonical_form(g) == canonical_form(h)
}

/// Whether deleting degree-1 vertices one at a time can turn `g` into a graph homeomorphic
/// to `h` (equal after smoothing degree-2 vertices).
pub fn collapses_onto(g: &MultiGraph, h: &MultiGraph) -> bool {
    if g.edges.len() + h.n != h.edges.len() + g.n {
        // each removal drops one vertex and one edge, smoothing keeps the difference too
        return false;
    }
    let target = canonical_form(&suppress_degree2(h));
    let mut dead: HashSet<CanonicalForm> = HashSet::new();
    collapse_search(&suppress_degree2(g), &target, &mut dead)
}

fn collapse_search(g: &MultiGraph, target: &CanonicalForm, dead: &mut HashSet<CanonicalForm>) -> bool {
    if g.n < target.n {
        return false;
    }
    let cf = canonical_form(g);
    if &cf == target {
        return true;
    }
    if dead.contains(&cf) {
        return false;
    }
    let deg = g.degrees();
    for (v, &dv) in deg.iter().enumerate() {
        if dv == 1 && collapse_search(&suppress_degree2(&g.remove_vertex(v)), target, dead) {
            return true;
        }
    }
    dead.insert(cf);
    false
}

/// Replaces each degree-2 vertex and its two edges by one edge, unless that edge would be
/// a loop.
pub fn suppress_degree2(g: &MultiGraph) -> MultiGraph {
    let mut cur = g.clone();
    loop {
        let deg = cur.degrees();
        let mut changed = false;
        for (v, &dv) in deg.iter().enumerate() {
            if dv != 2 {
                continue;
            }
            let inc: Vec<usize> = (0..cur.edges.len()).filter(|&i| cur.edges[i].0 == v || cur.edges[i].1 == v).collect();
            let other = |i: usize| if cur.edges[i].0 == v { cur.edges[i].1 } else { cur.edges[i].0 };
            let (a, b) = (other(inc[0]), other(inc[1]));
            if a == b {
                continue;
            }
            let mut edges: Vec<(usize, usize)> =
                cur.edges.iter().enumerate().filter(|(i, _)| !inc.contains(i)).map(|(_, &e)| e).collect();
            edges.push((a, b));
            cur = MultiGraph { n: cur.n, edges }.remove_vertex(v);
            changed = true;
            break;
        }
        if !changed {
            return cur;
        }
    }
}

pub fn is_homeomorphic(g: &MultiGraph, h: &MultiGraph) -> bool {
    is_isomorphic(&suppress_degree2(g), &suppress_degree2(h))
}

/// Path on labels `1..=2n'+2` (label `L` is vertex `L-1`) with pendants at labels
/// `2k+1` for `k = 1..=j1` and `2 j1 + 2k` for `k = 1..=j2`.
pub fn build_gp(nprime: usize, j1: usize, j2: usize) -> Result<MultiGraph, GraphError> {
    if j1 + j2 != nprime {
        return Err(GraphError::Arity(j1 + j2, nprime));
    }
    let mut g = MultiGraph::path(2 * nprime + 2);
    let labels = (1..=j1).map(|k| 2 * k + 1).chain((1..=j2).map(|k| 2 * j1 + 2 * k));
    for label in labels {
        g.edges.push((label - 1, g.n));
        g.n += 1;
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecorationKind {
    Pendant,
    Chord,
    FactorPendant,
}

/// Which of the two subdivision vertices carries a pendant, counted from the edge's first
/// endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attach {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphDecoration {
    pub edge: usize,
    pub kind: DecorationKind,
    pub attach: Attach,
}

/// Subdivides each decorated edge twice per decoration (in list order, from its first
/// endpoint) and hangs a pendant off one new vertex for pendant kinds.
pub fn predict_decorated(base: &MultiGraph, decorations: &[GraphDecoration]) -> Result<MultiGraph, GraphError> {
    for d in decorations {
        if d.edge >= base.edges.len() {
            return Err(GraphError::UnknownEdge(d.edge));
        }
    }
    let mut n = base.n;
    let mut edges = Vec::new();
    for (i, &(u, w)) in base.edges.iter().enumerate() {
        let mut prev = u;
        for d in decorations.iter().filter(|d| d.edge == i) {
            let (a, b) = (n, n + 1);
            n += 2;
            edges.push((prev, a));
            edges.push((a, b));
            if d.kind != DecorationKind::Chord {
                let host = if d.attach == Attach::First { a } else { b };
                edges.push((host, n));
                n += 1;
            }
            prev = b;
        }
        edges.push((prev, w));
    }
    Ok(MultiGraph { n, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn betti_examples() {
        assert_eq!(betti1(&MultiGraph::path(2)), Ok(0));
        assert_eq!(betti1(&MultiGraph::cycle(4)), Ok(1));
        assert_eq!(betti1(&MultiGraph::theta(3)), Ok(2));
        let two = MultiGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(betti1(&two), Err(GraphError::NotConnected));
    }

    #[test]
    fn iso_examples() {
        assert!(is_isomorphic(&MultiGraph::path(3), &MultiGraph::path(3)));
        assert!(is_isomorphic(&build_gp(1, 1, 0).unwrap(), &build_gp(1, 0, 1).unwrap()));
        assert!(!is_isomorphic(&build_gp(2, 2, 0).unwrap(), &build_gp(2, 1, 1).unwrap()));
        assert!(!is_isomorphic(&MultiGraph::theta(2), &MultiGraph::path(2)));
    }

    #[test]
    fn gp_shapes() {
        assert_eq!(build_gp(0, 0, 0).unwrap(), MultiGraph::path(2));
        let g = build_gp(1, 1, 0).unwrap();
        assert_eq!(g.n, 5);
        assert!(g.edges.contains(&(2, 4)));
        let g = build_gp(2, 1, 1).unwrap();
        assert_eq!(g.n, 8);
        assert!(g.edges.contains(&(2, 6)) && g.edges.contains(&(3, 7)));
        assert_eq!(build_gp(2, 1, 0), Err(GraphError::Arity(1, 2)));
    }

    #[test]
    fn collapse_examples() {
        let g = MultiGraph::cycle(4);
        assert!(collapses_onto(&g, &g));
        assert!(!collapses_onto(&MultiGraph::cycle(4), &MultiGraph::path(2)));
        let pendant = MultiGraph::new(4, vec![(0, 1), (1, 2), (1, 3)]).unwrap();
        assert!(collapses_onto(&pendant, &MultiGraph::path(3)));
        // a pendant on a subdivided cycle edge collapses back onto the cycle
        let g = MultiGraph::new(6, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 5)]).unwrap();
        assert!(collapses_onto(&g, &MultiGraph::cycle(4)));
        assert!(!collapses_onto(&g, &MultiGraph::theta(3)));
    }

    #[test]
    fn decorations() {
        let p = |edge, kind| GraphDecoration { edge, kind, attach: Attach::First };
        let g = predict_decorated(&MultiGraph::path(2), &[p(0, DecorationKind::Pendant)]).unwrap();
        assert_eq!((g.n, g.edges.len()), (5, 4));
        assert!(collapses_onto(&g, &MultiGraph::path(2)));
        let g = predict_decorated(&MultiGraph::path(2), &[p(0, DecorationKind::Chord)]).unwrap();
        assert_eq!((g.n, g.edges.len()), (4, 3));
        assert!(is_homeomorphic(&g, &MultiGraph::path(2)));
        let g = predict_decorated(&MultiGraph::cycle(4), &[p(0, DecorationKind::Pendant), p(2, DecorationKind::Pendant)])
            .unwrap();
        assert_eq!((g.n, g.edges.len()), (10, 10));
        assert_eq!(predict_decorated(&MultiGraph::path(2), &[p(3, DecorationKind::Chord)]), Err(GraphError::UnknownEdge(3)));
    }

    #[test]
    fn smoothing() {
        assert_eq!(suppress_degree2(&MultiGraph::path(5)).n, 2);
        let c = suppress_degree2(&MultiGraph::cycle(6));
        assert!(is_isomorphic(&c, &MultiGraph::theta(2)));
    }

    #[test]
    fn text_roundtrip() {
        let g = build_gp(2, 1, 1).unwrap();
        assert_eq!(MultiGraph::parse_text(&g.to_text()).unwrap(), g);
        assert_eq!(MultiGraph::parse_text("V 2\n0 0\n"), Err(GraphError::Loop(0)));
    }

    #[test]
    fn symmetric_graphs_are_fast() {
        // complete bipartite K_{8,8} and a 64-cycle have large automorphism groups
        let mut e = Vec::new();
        for i in 0..8 {
            for j in 8..16 {
                e.push((i, j));
            }
        }
        let k = MultiGraph::new(16, e).unwrap();
        assert!(is_isomorphic(&k, &k.clone()));
        assert!(is_isomorphic(&MultiGraph::cycle(64), &MultiGraph::cycle(64)));
    }
}
