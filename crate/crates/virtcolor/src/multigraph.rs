//! Multigraph representation, partial colorings, and centralized oracles for
//! the slack quantities (savings, redundancy, sparsity, unevenness) that the
//! coloring pipeline relies on. These oracles are exact and are used both by
//! algorithm steps that may act on local knowledge and by the verifier.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::num::NonZeroU32;

use crate::util::Rat;

pub type VertexId = u32;

/// Colors are 1-based; `None` in a [`PartialColoring`] means uncolored.
pub type Color = NonZeroU32;

pub fn color(c: u32) -> Color {
    Color::new(c).expect("colors are 1-based; 0 is not a color")
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Undirected multigraph on dense vertex ids `0..n`. Multiplicities are
/// stored per unordered pair; there are no self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    /// Sorted adjacency per vertex: (neighbor, multiplicity > 0).
    adj: Vec<Vec<(VertexId, u32)>>,
    /// Pseudo-degree per vertex (sum of incident multiplicities).
    pdeg: Vec<u64>,
}

impl MultiGraph {
    /// Builds from (u, v, multiplicity) triples; repeated pairs accumulate.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId, u32)>,
    ) -> Result<Self, GraphError> {
        let mut pairs = std::collections::BTreeMap::new();
        for (u, v, m) in edges {
            if u as usize >= n {
                return Err(GraphError::UnknownVertex(u));
            }
            if v as usize >= n {
                return Err(GraphError::UnknownVertex(v));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if m == 0 {
                continue;
            }
            let key = (u.min(v), u.max(v));
            *pairs.entry(key).or_insert(0u32) += m;
        }
        let mut adj = vec![Vec::new(); n];
        let mut pdeg = vec![0u64; n];
        for (&(u, v), &m) in &pairs {
            adj[u as usize].push((v, m));
            adj[v as usize].push((u, m));
            pdeg[u as usize] += m as u64;
            pdeg[v as usize] += m as u64;
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(MultiGraph { n, adj, pdeg })
    }

    pub fn empty(n: usize) -> Self {
        MultiGraph { n, adj: vec![Vec::new(); n], pdeg: vec![0; n] }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n as VertexId).into_iter()
    }

    /// Pseudo-degree: incident edge count with multiplicity.
    pub fn pseudo_degree(&self, v: VertexId) -> u64 {
        self.pdeg[v as usize]
    }

    /// Number of distinct neighbors.
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    /// Distinct neighbors in increasing id order.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v as usize].iter().map(|&(u, _)| u)
    }

    /// Distinct neighbors with multiplicities, increasing id order.
    pub fn neighbors_with_mult(&self, v: VertexId) -> &[(VertexId, u32)] {
        &self.adj[v as usize]
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> u32 {
        self.adj[u as usize]
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.adj[u as usize][i].1)
            .unwrap_or(0)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.multiplicity(u, v) > 0
    }

    /// Unordered pairs (u < v) with their multiplicities.
    pub fn edge_pairs(&self) -> impl Iterator<Item = (VertexId, VertexId, u32)> + '_ {
        (0..self.n as VertexId).flat_map(move |u| {
            self.adj[u as usize]
                .iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, m)| (u, v, m))
        })
    }

    pub fn num_edge_pairs(&self) -> usize {
        self.edge_pairs().count()
    }

    /// Total edges counted with multiplicity.
    pub fn num_edges(&self) -> u64 {
        self.pdeg.iter().sum::<u64>() / 2
    }

    pub fn max_pseudo_degree(&self) -> u64 {
        self.pdeg.iter().copied().max().unwrap_or(0)
    }

    /// Palette size for v: pseudo-degree + 1.
    pub fn palette_size(&self, v: VertexId) -> u64 {
        self.pseudo_degree(v) + 1
    }

    // ---- slack oracles -------------------------------------------------

    /// Savings of v from coloring c over a set S:
    /// |S ∩ dom c| − |c(S) ∩ [deg(v)+1]|. v itself is excluded from S.
    pub fn savings(&self, c: &PartialColoring, v: VertexId, s: &[VertexId]) -> i64 {
        let cap = self.palette_size(v);
        let mut colored = 0i64;
        let mut used = BTreeSet::new();
        for &u in s {
            if u == v {
                continue;
            }
            if let Some(col) = c.get(u) {
                colored += 1;
                if (col.get() as u64) <= cap {
                    used.insert(col);
                }
            }
        }
        colored - used.len() as i64
    }

    /// Redundancy of v: max over integer t in [0, ⌊|N(v)|/12⌋] of
    /// |N(v)| − t − |{u ∈ N(v) : deg(u)+1 > t}|.
    pub fn redundancy(&self, v: VertexId) -> i64 {
        let nbrs: Vec<VertexId> = self.neighbors(v).collect();
        let k = nbrs.len() as i64;
        if k == 0 {
            return 0;
        }
        let tmax = nbrs.len() / 12;
        let mut best = i64::MIN;
        for t in 0..=tmax as i64 {
            let high = nbrs
                .iter()
                .filter(|&&u| self.pseudo_degree(u) as i64 + 1 > t)
                .count() as i64;
            best = best.max(k - t - high);
        }
        best
    }

    /// Inaccuracy of v: pseudo-degree minus distinct-neighbor count.
    pub fn inaccuracy(&self, v: VertexId) -> u64 {
        self.pseudo_degree(v) - self.degree(v) as u64
    }

    /// Sparsity of v: (C(|N|,2) − simple edges within N(v)) / |N(v)|,
    /// multiplicities collapsed; 0 for an isolated vertex.
    pub fn sparsity(&self, v: VertexId) -> Rat {
        let nbrs: Vec<VertexId> = self.neighbors(v).collect();
        let k = nbrs.len() as i128;
        if k == 0 {
            return Rat::from_integer(0);
        }
        let mut present = 0i128;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if self.has_edge(a, b) {
                    present += 1;
                }
            }
        }
        Rat::new(k * (k - 1) / 2 - present, k)
    }

    /// Unevenness of v over S: Σ_{u∈S} max(deg(u) − deg(v), 0) / (deg(u)+1),
    /// degrees taken with multiplicity.
    pub fn unevenness(&self, v: VertexId, s: &[VertexId]) -> Rat {
        let dv = self.pseudo_degree(v) as i128;
        let mut acc = Rat::from_integer(0);
        for &u in s {
            let du = self.pseudo_degree(u) as i128;
            if du > dv {
                acc += Rat::new(du - dv, du + 1);
            }
        }
        acc
    }

    // ---- text format ---------------------------------------------------

    /// Serializes as `n m_pairs` header plus one `u v mult` line per pair.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let pairs: Vec<_> = self.edge_pairs().collect();
        writeln!(out, "{} {}", self.n, pairs.len()).unwrap();
        for (u, v, m) in pairs {
            writeln!(out, "{} {} {}", u, v, m).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) = lines.next().ok_or(GraphError::Parse {
            line: 0,
            msg: "empty input".into(),
        })?;
        let mut it = header.split_whitespace();
        let parse_u = |tok: Option<&str>, lno: usize| -> Result<u64, GraphError> {
            tok.ok_or(GraphError::Parse { line: lno + 1, msg: "missing field".into() })?
                .parse()
                .map_err(|e| GraphError::Parse { line: lno + 1, msg: format!("{e}") })
        };
        let n = parse_u(it.next(), lno)? as usize;
        let m_pairs = parse_u(it.next(), lno)? as usize;
        let mut edges = Vec::with_capacity(m_pairs);
        for (lno, line) in lines {
            let mut it = line.split_whitespace();
            let u = parse_u(it.next(), lno)? as VertexId;
            let v = parse_u(it.next(), lno)? as VertexId;
            let m = parse_u(it.next(), lno)? as u32;
            edges.push((u, v, m));
        }
        if edges.len() != m_pairs {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("header says {} pairs, found {}", m_pairs, edges.len()),
            });
        }
        Self::from_edges(n, edges)
    }
}

/// Assignment of 1-based colors to a subset of the vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialColoring {
    colors: Vec<Option<Color>>,
}

impl PartialColoring {
    pub fn new(n: usize) -> Self {
        PartialColoring { colors: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Option<Color> {
        self.colors[v as usize]
    }

    pub fn is_colored(&self, v: VertexId) -> bool {
        self.colors[v as usize].is_some()
    }

    pub fn set(&mut self, v: VertexId, c: Color) {
        self.colors[v as usize] = Some(c);
    }

    pub fn unset(&mut self, v: VertexId) {
        self.colors[v as usize] = None;
    }

    /// Vertices in the domain (colored), increasing id order.
    pub fn domain(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.colors
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|_| i as VertexId))
    }

    pub fn num_colored(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    /// True iff `self` agrees with `other` everywhere `other` is colored.
    pub fn extends(&self, other: &PartialColoring) -> bool {
        self.colors
            .iter()
            .zip(&other.colors)
            .all(|(a, b)| b.is_none() || a == b)
    }

    /// Uncolored pseudo-degree of v: incident multiplicity to uncolored
    /// neighbors.
    pub fn uncolored_pseudo_degree(&self, g: &MultiGraph, v: VertexId) -> u64 {
        g.neighbors_with_mult(v)
            .iter()
            .filter(|&&(u, _)| !self.is_colored(u))
            .map(|&(_, m)| m as u64)
            .sum()
    }

    /// Colors of v's colored neighbors (set, not multiset).
    pub fn neighbor_colors(&self, g: &MultiGraph, v: VertexId) -> BTreeSet<Color> {
        g.neighbors(v).filter_map(|u| self.get(u)).collect()
    }

    /// Remaining palette of v: [deg(v)+1] minus colors of colored neighbors.
    pub fn palette(&self, g: &MultiGraph, v: VertexId) -> Vec<Color> {
        let used = self.neighbor_colors(g, v);
        (1..=g.palette_size(v) as u32)
            .map(color)
            .filter(|c| !used.contains(c))
            .collect()
    }
}

/// One properness/range/totality violation found by [`verify_coloring`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Endpoints of a (multi)edge share a color.
    ImproperPair { u: VertexId, v: VertexId, color: Color },
    /// c(v) exceeds deg(v)+1.
    OutOfRange { v: VertexId, color: Color, palette_size: u64 },
    /// Vertex left uncolored under require_total.
    Uncolored { v: VertexId },
}

#[derive(Clone, Debug, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks properness on every adjacent pair, color range c(v) ≤ deg(v)+1,
/// and (optionally) totality. All violations are listed, none is fatal.
pub fn verify_coloring(g: &MultiGraph, c: &PartialColoring, require_total: bool) -> Verdict {
    let mut violations = Vec::new();
    for v in g.vertices() {
        match c.get(v) {
            Some(col) => {
                let cap = g.palette_size(v);
                if col.get() as u64 > cap {
                    violations.push(Violation::OutOfRange { v, color: col, palette_size: cap });
                }
            }
            None => {
                if require_total {
                    violations.push(Violation::Uncolored { v });
                }
            }
        }
    }
    for (u, v, _m) in g.edge_pairs() {
        if let (Some(cu), Some(cv)) = (c.get(u), c.get(v)) {
            if cu == cv {
                violations.push(Violation::ImproperPair { u, v, color: cu });
            }
        }
    }
    Verdict { violations }
}

/// Clique palette oracle: colors in [1, cap] not used by any vertex of K.
/// Centralized reference for the distributed query protocol.
pub fn clique_palette(c: &PartialColoring, k: &[VertexId], cap: u32) -> Vec<Color> {
    let used: BTreeSet<Color> = k.iter().filter_map(|&v| c.get(v)).collect();
    (1..=cap).map(color).filter(|c| !used.contains(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_accumulate() {
        let g = MultiGraph::from_edges(3, [(0, 1, 1), (1, 0, 2), (1, 2, 1)]).unwrap();
        assert_eq!(g.multiplicity(0, 1), 3);
        assert_eq!(g.pseudo_degree(1), 4);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.inaccuracy(1), 2);
    }

    #[test]
    fn self_loop_rejected() {
        assert!(MultiGraph::from_edges(2, [(1, 1, 1)]).is_err());
    }
}
