//! Communication lower-bound artifacts: the matching 3-coloring gadget,
//! exact evaluation of zero-communication strategies over the uniform input
//! distribution, and the embedded gadget instances — two stars joined by a
//! single central link that carries every left support tree, so all of the
//! congestion lands on one link.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::{validate_embedding, Embedding};
use crate::multigraph::{verify_coloring, MultiGraph, PartialColoring, VertexId};
use crate::netsim::MachineId;
use crate::trials::Sim;
use crate::util::Rat;

/// Nodes per side per gadget.
pub const GADGET_NODES: usize = 8;
/// Perfect matchings over 8 labeled nodes: (2·4)! / (2⁴·4!).
pub const NUM_MATCHINGS: usize = 105;

#[derive(Debug, thiserror::Error)]
pub enum LbError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph: {0}")]
    Graph(#[from] crate::multigraph::GraphError),
    #[error("embed: {0}")]
    Embed(#[from] crate::embedding::EmbedError),
}

/// A perfect matching over the 8 labeled nodes {0..7}: four pairs (a, b)
/// with a < b, sorted by first element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching {
    pub pairs: [(u8, u8); 4],
}

impl Matching {
    /// The node matched with `j`.
    pub fn partner(&self, j: u8) -> u8 {
        for &(a, b) in &self.pairs {
            if a == j {
                return b;
            }
            if b == j {
                return a;
            }
        }
        unreachable!("matching covers all of 0..8")
    }
}

/// All 105 perfect matchings over {0..7} in canonical order: the smallest
/// unmatched node pairs with each larger node in increasing order,
/// recursively.
pub fn enumerate_matchings() -> Vec<Matching> {
    fn rec(avail: &[u8], pairs: &mut Vec<(u8, u8)>, out: &mut Vec<Matching>) {
        if avail.is_empty() {
            out.push(Matching { pairs: [pairs[0], pairs[1], pairs[2], pairs[3]] });
            return;
        }
        let a = avail[0];
        for idx in 1..avail.len() {
            let b = avail[idx];
            let rest: Vec<u8> =
                avail.iter().copied().filter(|&x| x != a && x != b).collect();
            pairs.push((a, b));
            rec(&rest, pairs, out);
            pairs.pop();
        }
    }
    let mut out = Vec::new();
    rec(&(0..8).collect::<Vec<u8>>(), &mut Vec::new(), &mut out);
    out
}

// ---- zero-communication strategies ------------------------------------------

/// A zero-communication strategy for one gadget: each player maps its
/// matching index to a fixed coloring of its 8 nodes in {1,2,3}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroCommStrategy {
    pub alice: Vec<[u8; 8]>,
    pub bob: Vec<[u8; 8]>,
}

impl ZeroCommStrategy {
    /// Both players always answer the constant color `c`.
    pub fn constant(c: u8) -> ZeroCommStrategy {
        assert!((1..=3).contains(&c));
        ZeroCommStrategy {
            alice: vec![[c; 8]; NUM_MATCHINGS],
            bob: vec![[c; 8]; NUM_MATCHINGS],
        }
    }

    /// Deterministic baseline that is proper on each player's own matching:
    /// the t-th pair of the input matching takes colors (1 + t mod 3,
    /// 1 + (t+1) mod 3).
    pub fn proper_baseline(ms: &[Matching]) -> ZeroCommStrategy {
        let side: Vec<[u8; 8]> = ms
            .iter()
            .map(|m| {
                let mut row = [0u8; 8];
                for (t, &(a, b)) in m.pairs.iter().enumerate() {
                    row[a as usize] = 1 + (t % 3) as u8;
                    row[b as usize] = 1 + ((t + 1) % 3) as u8;
                }
                row
            })
            .collect();
        ZeroCommStrategy { alice: side.clone(), bob: side }
    }

    /// Random strategy that is proper on each player's own matching.
    pub fn random_proper(ms: &[Matching], rng: &mut impl Rng) -> ZeroCommStrategy {
        fn side<R: Rng>(ms: &[Matching], rng: &mut R) -> Vec<[u8; 8]> {
            ms.iter()
                .map(|m| {
                    let mut row = [0u8; 8];
                    for &(a, b) in &m.pairs {
                        let ca = rng.gen_range(1..=3u8);
                        let mut cb = rng.gen_range(1..=2u8);
                        if cb >= ca {
                            cb += 1;
                        }
                        row[a as usize] = ca;
                        row[b as usize] = cb;
                    }
                    row
                })
                .collect()
        }
        ZeroCommStrategy { alice: side(ms, rng), bob: side(ms, rng) }
    }

    /// True iff each row colors the matching it answers to properly.
    pub fn proper_on_own(&self, ms: &[Matching]) -> bool {
        let ok = |rows: &[[u8; 8]]| {
            rows.iter().zip(ms).all(|(row, m)| {
                m.pairs.iter().all(|&(a, b)| row[a as usize] != row[b as usize])
            })
        };
        ok(&self.alice) && ok(&self.bob)
    }

    /// Parses 210 data lines (105 per player, Alice first) of 8
    /// whitespace-separated colors in 1..=3; blank lines and `#` comments
    /// are skipped.
    pub fn from_text(text: &str) -> Result<ZeroCommStrategy, LbError> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<u8> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<u8>().ok().filter(|c| (1..=3).contains(c)).ok_or_else(|| {
                        LbError::Invalid(format!("line {}: bad color {t:?}", ln + 1))
                    })
                })
                .collect::<Result<_, _>>()?;
            if vals.len() != 8 {
                return Err(LbError::Invalid(format!(
                    "line {}: expected 8 colors, found {}",
                    ln + 1,
                    vals.len()
                )));
            }
            let mut row = [0u8; 8];
            row.copy_from_slice(&vals);
            rows.push(row);
        }
        if rows.len() != 2 * NUM_MATCHINGS {
            return Err(LbError::Invalid(format!(
                "expected {} data lines, found {}",
                2 * NUM_MATCHINGS,
                rows.len()
            )));
        }
        let bob = rows.split_off(NUM_MATCHINGS);
        Ok(ZeroCommStrategy { alice: rows, bob })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, rows) in [("alice", &self.alice), ("bob", &self.bob)] {
            out.push_str(&format!("# {name}\n"));
            for row in rows {
                let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

/// Number of input pairs (x, y) of one gadget under which the strategy
/// leaves some of the 16 gadget edges monochromatic.
fn failing_pairs(s: &ZeroCommStrategy, ms: &[Matching]) -> u64 {
    let bad_own = |rows: &[[u8; 8]]| -> Vec<bool> {
        rows.iter()
            .zip(ms)
            .map(|(row, m)| {
                m.pairs.iter().any(|&(a, b)| row[a as usize] == row[b as usize])
            })
            .collect()
    };
    let bad_a = bad_own(&s.alice);
    let bad_b = bad_own(&s.bob);
    let mut fails = 0u64;
    for x in 0..NUM_MATCHINGS {
        for y in 0..NUM_MATCHINGS {
            let f = bad_a[x]
                || bad_b[y]
                || (0..8).any(|j| s.alice[x][j] == s.bob[y][j]);
            fails += u64::from(f);
        }
    }
    fails
}

/// Exact failure probability of a one-gadget strategy over the uniform
/// 105 × 105 input distribution.
pub fn eval_strategy(s: &ZeroCommStrategy) -> Rat {
    let ms = enumerate_matchings();
    Rat::new(failing_pairs(s, &ms) as i128, (NUM_MATCHINGS * NUM_MATCHINGS) as i128)
}

/// Exact failure probability when k gadgets run independent strategies on
/// independent uniform inputs: the gadgets share no edges, so the joint
/// error is 1 − Π(1 − e_i). Returned together with the per-gadget errors.
pub fn eval_strategy_product(ss: &[ZeroCommStrategy]) -> (Rat, Vec<Rat>) {
    let ms = enumerate_matchings();
    let n = (NUM_MATCHINGS * NUM_MATCHINGS) as i128;
    let errs: Vec<Rat> =
        ss.iter().map(|s| Rat::new(failing_pairs(s, &ms) as i128, n)).collect();
    let success = errs.iter().fold(Rat::new(1, 1), |acc, e| acc * (Rat::new(1, 1) - e));
    (Rat::new(1, 1) - success, errs)
}

// ---- embedded instances ------------------------------------------------------

/// A k-gadget two-party coloring task: per gadget, Alice holds matching
/// index `x[i]` over her 8 nodes, Bob holds `y[i]` over his, and the 8
/// cross edges v_i^{L,j}–v_i^{R,j} are fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McolInstance {
    pub k: usize,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl McolInstance {
    pub fn new(k: usize, x: Vec<usize>, y: Vec<usize>) -> Result<McolInstance, LbError> {
        if x.len() != k || y.len() != k {
            return Err(LbError::Invalid(format!(
                "need {k} matching indices per side, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        if let Some(&bad) = x.iter().chain(&y).find(|&&i| i >= NUM_MATCHINGS) {
            return Err(LbError::Invalid(format!("matching index {bad} out of range")));
        }
        Ok(McolInstance { k, x, y })
    }

    /// Uniformly random matching indices on both sides.
    pub fn random(k: usize, seed: u64) -> McolInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<usize> {
            (0..k).map(|_| rng.gen_range(0..NUM_MATCHINGS)).collect()
        };
        McolInstance { k, x: draw(&mut rng), y: draw(&mut rng) }
    }

    /// The fixed cross edges, as virtual vertex pairs (left node before its
    /// right twin).
    pub fn cross_edges(&self) -> Vec<(VertexId, VertexId)> {
        let k = self.k;
        (0..k)
            .flat_map(move |i| {
                (0..GADGET_NODES)
                    .map(move |j| ((8 * i + j) as VertexId, (8 * k + 8 * i + j) as VertexId))
            })
            .collect()
    }
}

/// One embedded lower-bound instance: the 16k-node gadget graph on its
/// two-star substrate, with the task and the central machines exposed.
pub struct LbInstance {
    pub task: McolInstance,
    pub emb: Embedding,
    pub k: usize,
    pub w_lcom: MachineId,
    pub w_rcom: MachineId,
}

/// Builds the k-gadget virtual graph (per gadget: 8 cross edges plus one
/// perfect matching on each side) embedded on two 8k-leaf stars whose roots
/// are joined by a single link. Left supports are {leaf, left root, right
/// root} rooted at the leaf; right supports are {leaf, right root}. Left
/// matching edges are handled at the left root, everything else at the
/// right root, so every left tree — and nothing else — crosses the central
/// link.
pub fn build_lb_graphs(k: usize, x: &[usize], y: &[usize]) -> Result<LbInstance, LbError> {
    let task = McolInstance::new(k, x.to_vec(), y.to_vec())?;
    let ms = enumerate_matchings();
    let left = |i: usize, j: usize| (8 * i + j) as VertexId;
    let right = |i: usize, j: usize| (8 * k + 8 * i + j) as VertexId;
    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::with_capacity(16 * k);
    for i in 0..k {
        for j in 0..GADGET_NODES {
            edges.push((left(i, j), right(i, j), 1));
        }
        for &(a, b) in &ms[x[i]].pairs {
            edges.push((left(i, a as usize), left(i, b as usize), 1));
        }
        for &(a, b) in &ms[y[i]].pairs {
            edges.push((right(i, a as usize), right(i, b as usize), 1));
        }
    }
    let h = MultiGraph::from_edges(16 * k, edges)?;
    // machines mirror the virtual ids; the two star roots go last
    let w_lcom = (16 * k) as MachineId;
    let w_rcom = (16 * k + 1) as MachineId;
    let mut links = Vec::with_capacity(16 * k + 1);
    for v in 0..8 * k {
        links.push((v as MachineId, w_lcom));
    }
    for v in 8 * k..16 * k {
        links.push((v as MachineId, w_rcom));
    }
    links.push((w_lcom, w_rcom));
    let mut supports = Vec::with_capacity(16 * k);
    let mut roots = Vec::with_capacity(16 * k);
    let mut parents = Vec::with_capacity(16 * k);
    for v in 0..16 * k {
        let m = v as MachineId;
        if v < 8 * k {
            supports.push(vec![m, w_lcom, w_rcom]);
            roots.push(m);
            parents.push(vec![(w_lcom, m), (w_rcom, w_lcom)]);
        } else {
            supports.push(vec![m, w_rcom]);
            roots.push(m);
            parents.push(vec![(w_rcom, m)]);
        }
    }
    let mut handlers: BTreeMap<(VertexId, VertexId), Vec<MachineId>> = BTreeMap::new();
    for (u, v, _) in h.edge_pairs() {
        let both_left = (v as usize) < 8 * k;
        handlers.insert((u, v), vec![if both_left { w_lcom } else { w_rcom }]);
    }
    let emb = Embedding {
        machines: 16 * k + 2,
        links,
        subdivision_of: None,
        h,
        supports,
        roots,
        parents,
        handlers,
    };
    let verdict = validate_embedding(&emb);
    if !verdict.pass() {
        return Err(LbError::Invalid(format!(
            "gadget embedding invalid: {}",
            verdict.violations.join("; ")
        )));
    }
    Ok(LbInstance { task, emb, k, w_lcom, w_rcom })
}

/// Path instance for the dilation harness: a virtual path on `n` nodes in
/// which every support is a sub-path of 2d+1 machines, consecutive supports
/// overlap in exactly one machine (the handler of the edge between them),
/// and every tree is rooted at its center — congestion 1, dilation d.
pub fn build_dilation_path(n: usize, d: u64) -> Result<Embedding, LbError> {
    if n < 2 || d == 0 {
        return Err(LbError::Invalid(format!("need n >= 2 and d >= 1, got n={n}, d={d}")));
    }
    let stride = 2 * d as usize;
    let machines = n * stride + 1;
    let h = MultiGraph::from_edges(
        n,
        (0..n - 1).map(|i| (i as VertexId, (i + 1) as VertexId, 1)),
    )?;
    let links: Vec<(MachineId, MachineId)> =
        (0..machines - 1).map(|m| (m as MachineId, (m + 1) as MachineId)).collect();
    let mut supports = Vec::with_capacity(n);
    let mut roots = Vec::with_capacity(n);
    let mut parents = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i * stride;
        let hi = lo + stride;
        let root = lo + d as usize;
        supports.push((lo..=hi).map(|m| m as MachineId).collect());
        roots.push(root as MachineId);
        let mut par = Vec::with_capacity(stride);
        for m in lo..=hi {
            if m != root {
                let p = if m < root { m + 1 } else { m - 1 };
                par.push((m as MachineId, p as MachineId));
            }
        }
        parents.push(par);
    }
    let mut handlers: BTreeMap<(VertexId, VertexId), Vec<MachineId>> = BTreeMap::new();
    for i in 0..n - 1 {
        handlers.insert(
            (i as VertexId, (i + 1) as VertexId),
            vec![((i + 1) * stride) as MachineId],
        );
    }
    let emb = Embedding {
        machines,
        links,
        subdivision_of: None,
        h,
        supports,
        roots,
        parents,
        handlers,
    };
    let verdict = validate_embedding(&emb);
    if !verdict.pass() {
        return Err(LbError::Invalid(format!(
            "path embedding invalid: {}",
            verdict.violations.join("; ")
        )));
    }
    Ok(emb)
}

/// Round/traffic measurement of one algorithm run on an embedded instance.
#[derive(Clone, Debug, Serialize)]
pub struct LbRunReport {
    pub k: usize,
    pub bandwidth: u64,
    pub rounds: u64,
    pub central_bits: u64,
    pub central_trees: u64,
    pub proper: bool,
    pub max_color: u32,
}

/// Runs a coloring algorithm on the instance and reports measured rounds,
/// the bits that crossed the central link, and output sanity: the gadget
/// graph is 2-regular, so a deg+1 coloring must land in {1,2,3}.
pub fn lb_round_experiment<F, E>(
    inst: &LbInstance,
    bandwidth: u64,
    seed: u64,
    algo: F,
) -> Result<LbRunReport, LbError>
where
    F: FnOnce(&mut Sim, &mut PartialColoring) -> Result<(), E>,
    E: std::fmt::Display,
{
    let emb = &inst.emb;
    let mut net = emb.network(bandwidth, seed);
    let forest = emb.forest(&net)?;
    let central = net
        .link_between(inst.w_lcom, inst.w_rcom)
        .expect("central link present by construction");
    let central_trees = forest.trees_on_link[central as usize].len() as u64;
    let mut coloring = PartialColoring::new(emb.h.num_vertices());
    {
        let mut sim = Sim { net: &mut net, forest: &forest, emb };
        algo(&mut sim, &mut coloring)
            .map_err(|e| LbError::Invalid(format!("algorithm failed: {e}")))?;
    }
    let bits = net.link_bits(central);
    let verdict = verify_coloring(&emb.h, &coloring, true);
    let max_color = emb
        .h
        .vertices()
        .filter_map(|v| coloring.get(v))
        .map(|c| c.get())
        .max()
        .unwrap_or(0);
    Ok(LbRunReport {
        k: inst.k,
        bandwidth,
        rounds: net.rounds(),
        central_bits: bits[0] + bits[1],
        central_trees,
        proper: verdict.pass(),
        max_color,
    })
}

/// Hill-climbing search for low-error one-gadget strategies: starts from a
/// random strategy proper on its own matchings and flips single node colors
/// to the unique alternative that keeps the pair proper, accepting strict
/// improvements. Returns the best strategy found and its exact error.
pub fn search_strategy(seed: u64, steps: u32) -> (ZeroCommStrategy, Rat) {
    let ms = enumerate_matchings();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = ZeroCommStrategy::random_proper(&ms, &mut rng);
    let mut cur_fail = failing_pairs(&cur, &ms);
    for _ in 0..steps {
        let mut cand = cur.clone();
        let m = rng.gen_range(0..NUM_MATCHINGS);
        let j = rng.gen_range(0..8u8);
        let row = if rng.gen_bool(0.5) { &mut cand.alice[m] } else { &mut cand.bob[m] };
        let p = ms[m].partner(j);
        let old = row[j as usize];
        let partner_c = row[p as usize];
        let fresh = (1..=3u8).find(|&c| c != old && c != partner_c).unwrap();
        row[j as usize] = fresh;
        let fail = failing_pairs(&cand, &ms);
        if fail < cur_fail {
            cur = cand;
            cur_fail = fail;
        }
    }
    (cur, Rat::new(cur_fail as i128, (NUM_MATCHINGS * NUM_MATCHINGS) as i128))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    #[test]
    fn matchings_count_and_shape() {
        let ms = enumerate_matchings();
        // (2·4)! / (2⁴ · 4!)
        let formula = (1..=8u64).product::<u64>() / (16 * 24);
        assert_eq!(formula, 105);
        assert_eq!(ms.len(), 105);
        let distinct: BTreeSet<[(u8, u8); 4]> = ms.iter().map(|m| m.pairs).collect();
        assert_eq!(distinct.len(), 105);
        for m in &ms {
            let mut seen = [false; 8];
            for &(a, b) in &m.pairs {
                assert!(a < b && b < 8);
                assert!(!seen[a as usize] && !seen[b as usize]);
                seen[a as usize] = true;
                seen[b as usize] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn every_pair_is_matched_fifteen_times() {
        let ms = enumerate_matchings();
        for i in 0..8u8 {
            for j in (i + 1)..8 {
                let cnt = ms.iter().filter(|m| m.partner(i) == j).count();
                assert_eq!(cnt, 15, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn constant_strategy_always_fails() {
        let err = eval_strategy(&ZeroCommStrategy::constant(1));
        assert_eq!(err, Rat::new(1, 1));
    }

    #[test]
    fn proper_strategies_stay_above_the_floor() {
        let ms = enumerate_matchings();
        let floor = Rat::new(1, 196);
        let base = ZeroCommStrategy::proper_baseline(&ms);
        assert!(base.proper_on_own(&ms));
        assert!(eval_strategy(&base) >= floor);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = ZeroCommStrategy::random_proper(&ms, &mut rng);
            assert!(s.proper_on_own(&ms));
            let e = eval_strategy(&s);
            assert!(e >= floor, "error {e} under the zero-communication floor");
            assert!(e <= Rat::new(1, 1));
        }
    }

    #[test]
    fn proper_strategies_agree_rarely_across_indices() {
        // on ≤ 6/7 of a player's inputs can two fixed indices share a color
        let ms = enumerate_matchings();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let s = ZeroCommStrategy::random_proper(&ms, &mut rng);
            for i in 0..8usize {
                for j in (i + 1)..8 {
                    let agree =
                        s.alice.iter().filter(|row| row[i] == row[j]).count();
                    assert!(agree <= 90, "indices {i},{j} agree on {agree}/105 > 6/7");
                }
            }
        }
    }

    #[test]
    fn product_identity_on_two_gadgets() {
        let ms = enumerate_matchings();
        let s1 = ZeroCommStrategy::proper_baseline(&ms);
        let s2 = ZeroCommStrategy::random_proper(&ms, &mut ChaCha8Rng::seed_from_u64(5));
        let (joint, errs) = eval_strategy_product(&[s1.clone(), s2.clone()]);
        let n = (NUM_MATCHINGS * NUM_MATCHINGS) as i128;
        let f1 = failing_pairs(&s1, &ms) as i128;
        let f2 = failing_pairs(&s2, &ms) as i128;
        // exhaustive inclusion–exclusion over the product input space
        let joint_count = f1 * n + f2 * n - f1 * f2;
        assert_eq!(joint, Rat::new(joint_count, n * n));
        assert_eq!(errs[0], eval_strategy(&s1));
        assert_eq!(errs[1], eval_strategy(&s2));
    }

    #[test]
    fn gadget_instance_shape() {
        let k = 3;
        let inst = build_lb_graphs(k, &[0, 17, 104], &[5, 5, 60]).unwrap();
        let g = &inst.emb.h;
        assert_eq!(g.num_vertices(), 16 * k);
        let edge_count: u64 = g.edge_pairs().map(|(_, _, m)| m as u64).sum();
        assert_eq!(edge_count, 16 * k as u64);
        for v in g.vertices() {
            assert_eq!(g.pseudo_degree(v), 2, "vertex {v} not 2-regular");
            assert_eq!(g.palette_size(v), 3);
        }
        let (rho, d) = inst.emb.congestion_dilation();
        assert_eq!(rho, 8 * k as u64);
        assert!(d <= 2);
    }

    #[test]
    fn central_link_carries_every_left_tree() {
        let k = 2;
        let inst = build_lb_graphs(k, &[1, 2], &[3, 4]).unwrap();
        let net = inst.emb.network(1, 0);
        let forest = inst.emb.forest(&net).unwrap();
        let central = net.link_between(inst.w_lcom, inst.w_rcom).unwrap();
        let users = &forest.trees_on_link[central as usize];
        assert_eq!(users.len(), 8 * k);
        let left_ids: BTreeSet<u32> = users
            .iter()
            .map(|&t| forest.trees[t as usize].vertex)
            .collect();
        assert_eq!(left_ids, (0..(8 * k) as u32).collect::<BTreeSet<u32>>());
    }

    #[test]
    fn experiment_measures_a_trivial_central_algorithm() {
        let inst = build_lb_graphs(2, &[10, 20], &[30, 40]).unwrap();
        let report = lb_round_experiment(&inst, 8, 7, |sim, coloring| {
            let g = &sim.emb.h;
            for v in g.vertices() {
                let c = coloring.palette(g, v)[0];
                sim.commit(coloring, &[(v, c)])?;
            }
            Ok::<(), crate::trials::TrialError>(())
        })
        .unwrap();
        assert!(report.proper);
        assert!(report.max_color <= 3);
        assert!(report.rounds >= 1);
        assert!(report.central_bits > 0);
        assert_eq!(report.central_trees, 16);
    }

    #[test]
    fn strategy_text_round_trips() {
        let ms = enumerate_matchings();
        let s = ZeroCommStrategy::proper_baseline(&ms);
        let parsed = ZeroCommStrategy::from_text(&s.to_text()).unwrap();
        assert_eq!(parsed, s);
        assert!(ZeroCommStrategy::from_text("1 2 3\n").is_err());
    }

    #[test]
    fn search_reports_above_floor() {
        let (best, err) = search_strategy(7, 40);
        let ms = enumerate_matchings();
        assert!(best.proper_on_own(&ms));
        assert!(err >= Rat::new(1, 196));
        assert!(err <= Rat::new(1, 1));
    }

    #[test]
    fn bad_matching_index_is_rejected() {
        assert!(build_lb_graphs(1, &[105], &[0]).is_err());
        assert!(build_lb_graphs(2, &[0], &[0, 0]).is_err());
        let inst = build_lb_graphs(1, &[0], &[0]).unwrap();
        assert_eq!(inst.emb.h.palette_size(0), 3);
    }

    #[test]
    fn task_cross_edges_are_fixed_twins() {
        let task = McolInstance::random(2, 9);
        assert_eq!(task.x.len(), 2);
        let cross = task.cross_edges();
        assert_eq!(cross.len(), 16);
        assert_eq!(cross[0], (0, 16));
        assert_eq!(cross[15], (15, 31));
        let inst = build_lb_graphs(task.k, &task.x, &task.y).unwrap();
        for (u, v) in cross {
            assert_eq!(inst.emb.h.multiplicity(u, v), 1);
        }
        assert_eq!(inst.task, task);
    }

    #[test]
    fn dilation_path_has_unit_congestion_and_depth_d() {
        let emb = build_dilation_path(6, 3).unwrap();
        assert_eq!(emb.machines, 6 * 6 + 1);
        assert_eq!(emb.h.num_vertices(), 6);
        let (rho, d) = emb.congestion_dilation();
        assert_eq!((rho, d), (1, 3));
        // consecutive supports share exactly the handler machine
        for i in 0..5usize {
            let a: BTreeSet<_> = emb.supports[i].iter().copied().collect();
            let b: BTreeSet<_> = emb.supports[i + 1].iter().copied().collect();
            let shared: Vec<_> = a.intersection(&b).copied().collect();
            assert_eq!(shared, vec![emb.handlers[&(i as u32, i as u32 + 1)][0]]);
        }
        assert!(build_dilation_path(1, 3).is_err());
        assert!(build_dilation_path(4, 0).is_err());
    }
}
