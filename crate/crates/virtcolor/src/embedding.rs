//! Builders and validators for virtual-graph embeddings: identity (H = G),
//! power graphs G^t on the subdivision graph, cluster graphs, and file-loaded
//! custom embeddings. An embedding fixes, for every virtual vertex, a support
//! set of machines and a support tree, and for every parallel edge a handler
//! machine lying in both endpoints' supports.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::multigraph::{MultiGraph, VertexId};
use crate::netsim::{MachineId, Network, SupportForest};
use crate::util::field_bits;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("graph: {0}")]
    Graph(#[from] crate::multigraph::GraphError),
    #[error("net: {0}")]
    Net(#[from] crate::netsim::NetError),
}

/// A virtual multigraph H embedded on a substrate communication network.
///
/// The substrate is stored explicitly (machines and links). Builders that
/// work over a communication graph G materialize the subdivision of G — one
/// extra machine per G-link — so that handlers can sit "on" a link;
/// `subdivision_of = Some(n)` then records the original machine count.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub machines: usize,
    pub links: Vec<(MachineId, MachineId)>,
    /// When the substrate is the subdivision of a G with n machines:
    /// machines 0..n are G's, machine n+i sits on G-link i.
    pub subdivision_of: Option<usize>,
    pub h: MultiGraph,
    /// Support V(v) per virtual vertex, sorted machine ids.
    pub supports: Vec<Vec<MachineId>>,
    pub roots: Vec<MachineId>,
    /// Support tree T(v): (machine, parent) pairs, machine-sorted.
    pub parents: Vec<Vec<(MachineId, MachineId)>>,
    /// Handlers per unordered pair (u < v): one machine per parallel edge.
    pub handlers: BTreeMap<(VertexId, VertexId), Vec<MachineId>>,
}

impl Embedding {
    pub fn num_virtual(&self) -> usize {
        self.h.num_vertices()
    }

    /// Instantiates the substrate as a round engine.
    pub fn network(&self, bandwidth: u64, seed: u64) -> Network {
        Network::new(self.machines, &self.links, bandwidth, seed)
    }

    /// Builds the validated support forest over `net`.
    pub fn forest(&self, net: &Network) -> Result<SupportForest, EmbedError> {
        let specs = (0..self.num_virtual())
            .map(|v| {
                (
                    v as VertexId,
                    self.roots[v],
                    self.parents[v].iter().copied().collect::<BTreeMap<_, _>>(),
                )
            })
            .collect();
        Ok(SupportForest::build(net, specs)?)
    }

    /// Handler machine of the i-th parallel edge between u and v.
    pub fn handler(&self, u: VertexId, v: VertexId, i: usize) -> Option<MachineId> {
        self.handlers.get(&(u.min(v), u.max(v))).and_then(|h| h.get(i)).copied()
    }

    /// Measured congestion and dilation of the support forest.
    pub fn congestion_dilation(&self) -> (u64, u64) {
        let net = self.network(1, 0);
        let forest = self.forest(&net).expect("embedding validated");
        crate::netsim::measure_congestion_dilation(&forest)
    }

    /// Wire width of a virtual-vertex id.
    pub fn vertex_id_bits(&self) -> u64 {
        field_bits(self.num_virtual().max(1) as u64)
    }

    pub fn to_json(&self) -> String {
        let doc = JsonDoc {
            network: JsonNetwork {
                machines: self.machines,
                links: self.links.iter().map(|&(a, b)| [a, b]).collect(),
                subdivision_of: self.subdivision_of,
            },
            vertices: (0..self.num_virtual())
                .map(|v| JsonVertex {
                    id: v as VertexId,
                    support: self.supports[v].clone(),
                    tree: self.parents[v].iter().map(|&(m, p)| [m, p]).collect(),
                    root: self.roots[v],
                })
                .collect(),
            edges: self
                .handlers
                .iter()
                .flat_map(|(&(u, v), hs)| {
                    hs.iter().map(move |&h| JsonEdge { u, v, handler: h })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("embedding serializes")
    }

    pub fn from_json(text: &str) -> Result<Embedding, EmbedError> {
        let doc: JsonDoc = serde_json::from_str(text)?;
        let nv = doc.vertices.len();
        for (i, v) in doc.vertices.iter().enumerate() {
            if v.id as usize != i {
                return Err(EmbedError::Invalid(format!(
                    "vertex ids must be dense 0..{nv}, found {} at {i}",
                    v.id
                )));
            }
        }
        let mut mult: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
        let mut handlers: BTreeMap<(VertexId, VertexId), Vec<MachineId>> = BTreeMap::new();
        for e in &doc.edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            *mult.entry(key).or_insert(0) += 1;
            handlers.entry(key).or_default().push(e.handler);
        }
        let h = MultiGraph::from_edges(
            nv,
            mult.iter().map(|(&(u, v), &m)| (u, v, m)),
        )?;
        let emb = Embedding {
            machines: doc.network.machines,
            links: doc.network.links.iter().map(|&[a, b]| (a, b)).collect(),
            subdivision_of: doc.network.subdivision_of,
            h,
            supports: doc.vertices.iter().map(|v| v.support.clone()).collect(),
            roots: doc.vertices.iter().map(|v| v.root).collect(),
            parents: doc
                .vertices
                .iter()
                .map(|v| v.tree.iter().map(|&[m, p]| (m, p)).collect())
                .collect(),
            handlers,
        };
        let verdict = validate_embedding(&emb);
        if !verdict.pass() {
            return Err(EmbedError::Invalid(format!(
                "embedding invalid: {}",
                verdict.violations.join("; ")
            )));
        }
        Ok(emb)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    network: JsonNetwork,
    vertices: Vec<JsonVertex>,
    edges: Vec<JsonEdge>,
}

#[derive(Serialize, Deserialize)]
struct JsonNetwork {
    machines: usize,
    links: Vec<[MachineId; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subdivision_of: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct JsonVertex {
    id: VertexId,
    support: Vec<MachineId>,
    tree: Vec<[MachineId; 2]>,
    root: MachineId,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    u: VertexId,
    v: VertexId,
    handler: MachineId,
}

fn require_simple(g: &MultiGraph) -> Result<(), EmbedError> {
    for (u, v, m) in g.edge_pairs() {
        if m != 1 {
            return Err(EmbedError::Invalid(format!(
                "substrate must be simple; link {u}-{v} has multiplicity {m}"
            )));
        }
    }
    Ok(())
}

/// Subdivision substrate of a simple graph G: machines 0..n are G's, machine
/// n+i sits on the i-th G-link; each G-link becomes two half-links.
pub struct Subdivision {
    pub g_machines: usize,
    pub g_links: Vec<(MachineId, MachineId)>,
    pub link_node: HashMap<(MachineId, MachineId), MachineId>,
}

impl Subdivision {
    pub fn of(g: &MultiGraph) -> Result<Subdivision, EmbedError> {
        require_simple(g)?;
        let n = g.num_vertices();
        let g_links: Vec<(MachineId, MachineId)> =
            g.edge_pairs().map(|(u, v, _)| (u, v)).collect();
        let link_node = g_links
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| ((u, v), (n + i) as MachineId))
            .collect();
        Ok(Subdivision { g_machines: n, g_links, link_node })
    }

    pub fn machines(&self) -> usize {
        self.g_machines + self.g_links.len()
    }

    pub fn node_of(&self, a: MachineId, b: MachineId) -> MachineId {
        self.link_node[&(a.min(b), a.max(b))]
    }

    /// Half-links of the subdivision.
    pub fn links(&self) -> Vec<(MachineId, MachineId)> {
        self.g_links
            .iter()
            .enumerate()
            .flat_map(|(i, &(u, v))| {
                let mid = (self.g_machines + i) as MachineId;
                [(u, mid), (v, mid)]
            })
            .collect()
    }

    /// Adjacency of the subdivision graph.
    pub fn adjacency(&self) -> Vec<Vec<MachineId>> {
        let mut adj = vec![Vec::new(); self.machines()];
        for (a, b) in self.links() {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }
}

/// Identity embedding H = G on the subdivision of G: V(v) is v plus the
/// nodes of its incident links, T(v) the star around v, and the edge {u,v}
/// is handled at the node of link uv. Parallel virtual edges share one
/// relay, so the substrate is the subdivision of the simple skeleton.
pub fn build_identity(g: &MultiGraph) -> Result<Embedding, EmbedError> {
    let skeleton = MultiGraph::from_edges(
        g.num_vertices(),
        g.edge_pairs().map(|(u, v, _)| (u, v, 1)),
    )
    .expect("skeleton of a valid graph");
    let sub = Subdivision::of(&skeleton)?;
    let n = g.num_vertices();
    let mut supports = Vec::with_capacity(n);
    let mut parents = Vec::with_capacity(n);
    let mut handlers = BTreeMap::new();
    for v in g.vertices() {
        let mut sup = vec![v as MachineId];
        let mut par = Vec::new();
        for u in g.neighbors(v) {
            let mid = sub.node_of(v as MachineId, u as MachineId);
            sup.push(mid);
            par.push((mid, v as MachineId));
        }
        sup.sort_unstable();
        par.sort_unstable();
        supports.push(sup);
        parents.push(par);
    }
    for (u, v, m) in g.edge_pairs() {
        // parallel edges share the one relay the skeleton provides
        handlers.insert(
            (u, v),
            vec![sub.node_of(u as MachineId, v as MachineId); m as usize],
        );
    }
    Ok(Embedding {
        machines: sub.machines(),
        links: sub.links(),
        subdivision_of: Some(n),
        h: g.clone(),
        supports,
        roots: (0..n as MachineId).collect(),
        parents,
        handlers,
    })
}

/// Depth-capped BFS in the subdivision from `root`, visiting neighbors in id
/// order; returns (members, parent-of) with deterministic parents (smallest
/// id among previous-depth neighbors, which BFS order realizes).
fn bfs_tree(
    adj: &[Vec<MachineId>],
    root: MachineId,
    depth_cap: u32,
    allowed: Option<&HashSet<MachineId>>,
) -> (Vec<MachineId>, BTreeMap<MachineId, MachineId>) {
    let mut parent = BTreeMap::new();
    let mut depth: HashMap<MachineId, u32> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([root]);
    while let Some(m) = queue.pop_front() {
        let dm = depth[&m];
        if dm == depth_cap {
            continue;
        }
        for &w in &adj[m as usize] {
            if let Some(allow) = allowed {
                if !allow.contains(&w) {
                    continue;
                }
            }
            if !depth.contains_key(&w) {
                depth.insert(w, dm + 1);
                parent.insert(w, m);
                queue.push_back(w);
            }
        }
    }
    let mut members: Vec<MachineId> = depth.keys().copied().collect();
    members.sort_unstable();
    (members, parent)
}

/// Power embedding G^t on the subdivision: V_H = V_G; T(v) is the depth-t
/// BFS tree of the subdivision rooted at v; E_H(u,v) holds one parallel edge
/// per simple u–v path of length ≤ t in G all of whose subdivision links lie
/// in T(u) ∪ T(v), handled at the middle machine of that path.
pub fn build_power(g: &MultiGraph, t: u32) -> Result<Embedding, EmbedError> {
    if t < 1 {
        return Err(EmbedError::Invalid("power exponent must be ≥ 1".into()));
    }
    let sub = Subdivision::of(g)?;
    let adj = sub.adjacency();
    let n = g.num_vertices();

    let mut supports = Vec::with_capacity(n);
    let mut parents: Vec<Vec<(MachineId, MachineId)>> = Vec::with_capacity(n);
    let mut tree_edges: Vec<HashSet<(MachineId, MachineId)>> = Vec::with_capacity(n);
    for v in 0..n as MachineId {
        let (members, par) = bfs_tree(&adj, v, t, None);
        tree_edges.push(par.iter().map(|(&m, &p)| (m.min(p), m.max(p))).collect());
        supports.push(members);
        parents.push(par.into_iter().collect());
    }

    // Simple G-paths u→v of length ≤ t, DFS in sorted-adjacency order.
    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();
    let mut handlers: BTreeMap<(VertexId, VertexId), Vec<MachineId>> = BTreeMap::new();
    for u in 0..n as VertexId {
        for v in (u + 1)..n as VertexId {
            let mut found: Vec<Vec<VertexId>> = Vec::new();
            let mut stack = vec![u];
            let mut visited: HashSet<VertexId> = HashSet::from([u]);
            dfs_paths(g, v, t as usize, &mut stack, &mut visited, &mut found);
            let mut hs = Vec::new();
            for path in &found {
                if let Some(mid) = realized_middle(&sub, path, &tree_edges[u as usize], &tree_edges[v as usize]) {
                    hs.push(mid);
                }
            }
            if !hs.is_empty() {
                edges.push((u, v, hs.len() as u32));
                handlers.insert((u, v), hs);
            }
        }
    }

    let h = MultiGraph::from_edges(n, edges)?;
    Ok(Embedding {
        machines: sub.machines(),
        links: sub.links(),
        subdivision_of: Some(n),
        h,
        supports,
        roots: (0..n as MachineId).collect(),
        parents,
        handlers,
    })
}

fn dfs_paths(
    g: &MultiGraph,
    target: VertexId,
    budget: usize,
    stack: &mut Vec<VertexId>,
    visited: &mut HashSet<VertexId>,
    found: &mut Vec<Vec<VertexId>>,
) {
    let cur = *stack.last().unwrap();
    if cur == target {
        found.push(stack.clone());
        return;
    }
    if budget == 0 {
        return;
    }
    for w in g.neighbors(cur) {
        if visited.contains(&w) {
            continue;
        }
        stack.push(w);
        visited.insert(w);
        dfs_paths(g, target, budget - 1, stack, visited, found);
        stack.pop();
        visited.remove(&w);
    }
}

/// If every subdivision link of the G-path lies in T(u) ∪ T(v), returns the
/// middle machine of the subdivision walk (the handler); otherwise None.
fn realized_middle(
    sub: &Subdivision,
    path: &[VertexId],
    tu: &HashSet<(MachineId, MachineId)>,
    tv: &HashSet<(MachineId, MachineId)>,
) -> Option<MachineId> {
    // Subdivision walk: x_0, L_1, x_1, ..., L_ℓ, x_ℓ (2ℓ+1 nodes).
    let mut walk: Vec<MachineId> = Vec::with_capacity(2 * path.len() - 1);
    for (i, &x) in path.iter().enumerate() {
        if i > 0 {
            walk.push(sub.node_of(path[i - 1] as MachineId, x as MachineId));
        }
        walk.push(x as MachineId);
    }
    for w in walk.windows(2) {
        let e = (w[0].min(w[1]), w[0].max(w[1]));
        if !tu.contains(&e) && !tv.contains(&e) {
            return None;
        }
    }
    Some(walk[walk.len() / 2])
}

/// Cluster-graph embedding: one virtual vertex per cluster of machines;
/// supports are the cluster plus the nodes of links leaving it toward other
/// clusters; trees are BFS from the leader; every inter-cluster link yields
/// one parallel edge handled at that link's node.
pub fn build_clusters(
    g: &MultiGraph,
    clusters: &[Vec<MachineId>],
    leaders: &[MachineId],
) -> Result<Embedding, EmbedError> {
    let sub = Subdivision::of(g)?;
    let adj = sub.adjacency();
    if clusters.len() != leaders.len() {
        return Err(EmbedError::Invalid("one leader per cluster required".into()));
    }
    let mut owner: HashMap<MachineId, usize> = HashMap::new();
    for (ci, c) in clusters.iter().enumerate() {
        for &m in c {
            if m as usize >= g.num_vertices() {
                return Err(EmbedError::Invalid(format!("machine {m} not in G")));
            }
            if owner.insert(m, ci).is_some() {
                return Err(EmbedError::Invalid(format!("machine {m} in two clusters")));
            }
        }
        if !c.contains(&leaders[ci]) {
            return Err(EmbedError::Invalid(format!("leader of cluster {ci} outside it")));
        }
    }

    let nv = clusters.len();
    let mut supports = Vec::with_capacity(nv);
    let mut parents = Vec::with_capacity(nv);
    let mut edge_mult: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
    let mut handlers: BTreeMap<(VertexId, VertexId), Vec<MachineId>> = BTreeMap::new();

    // Collect inter-cluster links first so supports can include their nodes.
    let mut outgoing: Vec<Vec<MachineId>> = vec![Vec::new(); nv]; // link nodes
    for &(a, b) in &sub.g_links {
        match (owner.get(&a), owner.get(&b)) {
            (Some(&ca), Some(&cb)) if ca != cb => {
                let node = sub.node_of(a, b);
                outgoing[ca].push(node);
                outgoing[cb].push(node);
                let key = ((ca.min(cb)) as VertexId, (ca.max(cb)) as VertexId);
                *edge_mult.entry(key).or_insert(0) += 1;
                handlers.entry(key).or_default().push(node);
            }
            _ => {}
        }
    }

    for (ci, c) in clusters.iter().enumerate() {
        // Allowed region: cluster machines, their intra-cluster link nodes,
        // and the outgoing link nodes (as leaves).
        let mut allow: HashSet<MachineId> = c.iter().copied().collect();
        for &(a, b) in &sub.g_links {
            if owner.get(&a) == Some(&ci) && owner.get(&b) == Some(&ci) {
                allow.insert(sub.node_of(a, b));
            }
        }
        for &node in &outgoing[ci] {
            allow.insert(node);
        }
        let (members, par) = bfs_tree(&adj, leaders[ci], u32::MAX, Some(&allow));
        // The BFS must have reached every cluster machine and outgoing node.
        for &m in c {
            if !members.contains(&m) {
                return Err(EmbedError::Invalid(format!(
                    "cluster {ci} does not induce a connected subgraph (machine {m} unreachable)"
                )));
            }
        }
        supports.push(members);
        parents.push(par.into_iter().collect::<Vec<_>>());
    }

    let h = MultiGraph::from_edges(nv, edge_mult.iter().map(|(&(u, v), &m)| (u, v, m)))?;
    Ok(Embedding {
        machines: sub.machines(),
        links: sub.links(),
        subdivision_of: Some(g.num_vertices()),
        h,
        supports,
        roots: leaders.to_vec(),
        parents,
        handlers,
    })
}

/// Validation verdict; empty violations means the embedding is well-formed.
#[derive(Clone, Debug, Default)]
pub struct EmbedVerdict {
    pub violations: Vec<String>,
}

impl EmbedVerdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the embedding laws: supports of adjacent vertices intersect, every
/// parallel edge has a handler in that intersection, every support tree
/// spans exactly the support (connected, acyclic, over substrate links), and
/// the virtual graph is not absurdly larger than the substrate.
pub fn validate_embedding(e: &Embedding) -> EmbedVerdict {
    let mut v = EmbedVerdict::default();
    let nv = e.num_virtual();
    if e.supports.len() != nv || e.roots.len() != nv || e.parents.len() != nv {
        v.violations.push(format!(
            "shape mismatch: {} vertices but {} supports / {} roots / {} trees",
            nv,
            e.supports.len(),
            e.roots.len(),
            e.parents.len()
        ));
        return v;
    }
    if nv > e.machines * e.machines {
        v.violations
            .push(format!("|V_H| = {} exceeds |V_G|² = {}", nv, e.machines * e.machines));
    }
    let links: HashSet<(MachineId, MachineId)> =
        e.links.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();

    for x in 0..nv {
        let sup: BTreeSet<MachineId> = e.supports[x].iter().copied().collect();
        if sup.len() != e.supports[x].len() {
            v.violations.push(format!("support of {x} has duplicates"));
        }
        for &m in &e.supports[x] {
            if m as usize >= e.machines {
                v.violations.push(format!("support of {x} names unknown machine {m}"));
            }
        }
        if !sup.contains(&e.roots[x]) {
            v.violations.push(format!("root of {x} outside its support"));
        }
        // Tree must span exactly the support.
        let mut tree_nodes: BTreeSet<MachineId> = BTreeSet::from([e.roots[x]]);
        let mut child_of: BTreeMap<MachineId, MachineId> = BTreeMap::new();
        for &(m, p) in &e.parents[x] {
            if child_of.insert(m, p).is_some() {
                v.violations.push(format!("tree of {x}: machine {m} has two parents"));
            }
            tree_nodes.insert(m);
            tree_nodes.insert(p);
            if !links.contains(&(m.min(p), m.max(p))) {
                v.violations.push(format!("tree of {x}: {m}-{p} is not a substrate link"));
            }
        }
        if tree_nodes != sup {
            v.violations.push(format!("tree of {x} does not span exactly its support"));
        }
        if e.parents[x].len() + 1 != sup.len() && tree_nodes == sup {
            v.violations.push(format!("tree of {x} has a cycle (edge count mismatch)"));
        }
        // Every non-root must reach the root (acyclicity + connectivity).
        for &(mut m, _) in &e.parents[x] {
            let mut hops = 0;
            while m != e.roots[x] {
                match child_of.get(&m) {
                    Some(&p) => m = p,
                    None => {
                        v.violations.push(format!("tree of {x}: {m} has no path to root"));
                        break;
                    }
                }
                hops += 1;
                if hops > e.parents[x].len() {
                    v.violations.push(format!("tree of {x} has a parent cycle"));
                    break;
                }
            }
        }
    }

    for (u, vv, m) in e.h.edge_pairs() {
        let su: BTreeSet<MachineId> = e.supports[u as usize].iter().copied().collect();
        let sv: BTreeSet<MachineId> = e.supports[vv as usize].iter().copied().collect();
        if su.intersection(&sv).next().is_none() {
            v.violations.push(format!("supports of adjacent {u},{vv} do not intersect"));
        }
        match e.handlers.get(&(u, vv)) {
            None => v.violations.push(format!("edge {u}-{vv} has no handlers")),
            Some(hs) => {
                if hs.len() != m as usize {
                    v.violations.push(format!(
                        "edge {u}-{vv}: {} handlers for multiplicity {m}",
                        hs.len()
                    ));
                }
                for &h in hs {
                    if !su.contains(&h) || !sv.contains(&h) {
                        v.violations.push(format!(
                            "handler {h} of edge {u}-{vv} outside V({u})∩V({vv})"
                        ));
                    }
                }
            }
        }
    }
    for &(u, vv) in e.handlers.keys() {
        if !e.h.has_edge(u, vv) {
            v.violations.push(format!("handlers listed for non-edge {u}-{vv}"));
        }
    }
    v
}

/// The hand-made three-vertex instance on a 6-cycle with a pendant machine:
/// unique link-disjoint support trees, congestion 1, dilation 3, and the
/// central vertex joined to the bottom one by two parallel edges.
pub fn figure1() -> Embedding {
    // Machines w0..w6: w0 pendant off w1; w1..w6 a 6-cycle.
    let links = vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)];
    let h = MultiGraph::from_edges(3, [(0, 1, 1), (1, 2, 2)]).unwrap();
    let supports = vec![vec![0, 1], vec![1, 2, 3, 6], vec![3, 4, 5, 6]];
    let roots = vec![0, 1, 3];
    let parents = vec![
        vec![(1, 0)],
        vec![(2, 1), (3, 2), (6, 1)],
        vec![(4, 3), (5, 4), (6, 5)],
    ];
    let mut handlers = BTreeMap::new();
    handlers.insert((0, 1), vec![1]);
    handlers.insert((1, 2), vec![3, 6]);
    Embedding {
        machines: 7,
        links,
        subdivision_of: None,
        h,
        supports,
        roots,
        parents,
        handlers,
    }
}

/// Distributed power-embedding construction: BFS frontiers of all machines
/// expand simultaneously over the subdivision, each crossing charged one
/// vertex id on its link; layers are separated by a barrier so parent choice
/// (smallest offering id) matches the centralized builder exactly.
/// Returns the embedding and the engine rounds consumed.
pub fn build_power_distributed(
    g: &MultiGraph,
    t: u32,
    bandwidth: u64,
    seed: u64,
) -> Result<(Embedding, u64), EmbedError> {
    if t < 1 {
        return Err(EmbedError::Invalid("power exponent must be ≥ 1".into()));
    }
    let sub = Subdivision::of(g)?;
    let adj = sub.adjacency();
    let n = g.num_vertices();
    let mut net = Network::new(sub.machines(), &sub.links(), bandwidth, seed);
    let id_bits = field_bits(n as u64);
    let per_round = (bandwidth / id_bits).max(1) as usize;

    // membership[m] = trees m belongs to, with (depth, parent).
    let mut member: Vec<HashMap<VertexId, (u32, Option<MachineId>)>> =
        vec![HashMap::new(); sub.machines()];
    for v in 0..n {
        member[v].insert(v as VertexId, (0, None));
    }
    let mut frontier: Vec<Vec<VertexId>> = vec![Vec::new(); sub.machines()];
    for v in 0..n {
        frontier[v].push(v as VertexId);
    }

    for layer in 1..=t {
        // Queue one announcement (tree id) per (machine, incident link).
        let mut queues: BTreeMap<(MachineId, MachineId), Vec<VertexId>> = BTreeMap::new();
        for m in 0..sub.machines() as MachineId {
            if frontier[m as usize].is_empty() {
                continue;
            }
            for &w in &adj[m as usize] {
                queues
                    .entry((m, w))
                    .or_default()
                    .extend(frontier[m as usize].iter().copied());
            }
        }
        for f in &mut frontier {
            f.clear();
        }
        // Drain queues, at most ⌊B/id_bits⌋ ids per link direction per round.
        let mut offers: BTreeMap<(MachineId, VertexId), Vec<MachineId>> = BTreeMap::new();
        while queues.values().any(|q| !q.is_empty()) {
            let mut plan = Vec::new();
            for (&(from, to), q) in &mut queues {
                if q.is_empty() {
                    continue;
                }
                let take = q.len().min(per_round);
                let batch: Vec<VertexId> = q.drain(..take).collect();
                let link = net.link_between(from, to).expect("adjacency is links");
                plan.push(crate::netsim::Send {
                    from,
                    link,
                    bits: id_bits * batch.len() as u64,
                    payload: (to, batch),
                });
            }
            let inboxes = net.run_round(plan)?;
            for msgs in inboxes.into_values() {
                for (from, _, (to, batch)) in msgs {
                    for tree in batch {
                        offers.entry((to, tree)).or_default().push(from);
                    }
                }
            }
        }
        // Barrier: apply all of this layer's joins, smallest parent wins.
        for ((m, tree), mut parents) in offers {
            if member[m as usize].contains_key(&tree) {
                continue;
            }
            parents.sort_unstable();
            member[m as usize].insert(tree, (layer, Some(parents[0])));
            frontier[m as usize].push(tree);
        }
    }

    // Assemble trees from membership, then reuse the centralized edge rule.
    let mut supports: Vec<Vec<MachineId>> = vec![Vec::new(); n];
    let mut parents: Vec<Vec<(MachineId, MachineId)>> = vec![Vec::new(); n];
    let mut tree_edges: Vec<HashSet<(MachineId, MachineId)>> = vec![HashSet::new(); n];
    for m in 0..sub.machines() as MachineId {
        for (&tree, &(_, par)) in &member[m as usize] {
            supports[tree as usize].push(m);
            if let Some(p) = par {
                parents[tree as usize].push((m, p));
                tree_edges[tree as usize].insert((m.min(p), m.max(p)));
            }
        }
    }
    for s in &mut supports {
        s.sort_unstable();
    }
    for p in &mut parents {
        p.sort_unstable();
    }

    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();
    let mut handlers: BTreeMap<(VertexId, VertexId), Vec<MachineId>> = BTreeMap::new();
    for u in 0..n as VertexId {
        for v in (u + 1)..n as VertexId {
            let mut found: Vec<Vec<VertexId>> = Vec::new();
            let mut stack = vec![u];
            let mut visited: HashSet<VertexId> = HashSet::from([u]);
            dfs_paths(g, v, t as usize, &mut stack, &mut visited, &mut found);
            let mut hs = Vec::new();
            for path in &found {
                if let Some(mid) =
                    realized_middle(&sub, path, &tree_edges[u as usize], &tree_edges[v as usize])
                {
                    hs.push(mid);
                }
            }
            if !hs.is_empty() {
                edges.push((u, v, hs.len() as u32));
                handlers.insert((u, v), hs);
            }
        }
    }
    let h = MultiGraph::from_edges(n, edges)?;
    let emb = Embedding {
        machines: sub.machines(),
        links: sub.links(),
        subdivision_of: Some(n),
        h,
        supports,
        roots: (0..n as MachineId).collect(),
        parents,
        handlers,
    };
    Ok((emb, net.rounds()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> MultiGraph {
        MultiGraph::from_edges(
            n,
            (0..n).map(|i| (i as VertexId, ((i + 1) % n) as VertexId, 1)),
        )
        .unwrap()
    }

    #[test]
    fn identity_c5() {
        let e = build_identity(&cycle(5)).unwrap();
        assert!(validate_embedding(&e).pass());
        for v in e.h.vertices() {
            assert_eq!(e.h.pseudo_degree(v), 2);
        }
        let (rho, d) = e.congestion_dilation();
        assert_eq!((rho, d), (1, 1));
    }

    #[test]
    fn figure1_measures() {
        let e = figure1();
        assert!(validate_embedding(&e).pass());
        let (rho, d) = e.congestion_dilation();
        assert_eq!((rho, d), (1, 3));
        assert_eq!(e.h.multiplicity(1, 2), 2);
    }

    #[test]
    fn power_c4_t2() {
        let e = build_power(&cycle(4), 2).unwrap();
        assert!(validate_embedding(&e).pass());
        // Opposite vertices joined by two 2-paths; sides by one edge each.
        for v in e.h.vertices() {
            assert_eq!(e.h.pseudo_degree(v), 4);
        }
        assert_eq!(e.h.multiplicity(0, 2), 2);
        assert_eq!(e.h.multiplicity(0, 1), 1);
    }

    #[test]
    fn json_round_trip() {
        let e = build_power(&cycle(4), 2).unwrap();
        let text = e.to_json();
        let back = Embedding::from_json(&text).unwrap();
        assert_eq!(back.h, e.h);
        assert_eq!(back.supports, e.supports);
        assert_eq!(back.handlers, e.handlers);
    }
}
