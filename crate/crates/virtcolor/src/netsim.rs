//! Synchronous message-passing engine over a simple communication graph with
//! per-link bandwidth accounting, plus scheduling of broadcast and
//! converge-cast along support trees. All scheduling is deterministic:
//! per-link FIFO ordered by (availability round, tree id, fragment index),
//! links processed in id order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::multigraph::VertexId;
use crate::util::{ceil_log2, rng_from_scope};
use rand_chacha::ChaCha8Rng;

pub type MachineId = u32;
pub type LinkId = u32;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("bandwidth exceeded on link {link} round {round}: {bits} bits > limit {limit}")]
    BandwidthExceeded { link: LinkId, round: u64, bits: u64, limit: u64 },
    #[error("invalid link {0}")]
    InvalidLink(LinkId),
    #[error("machine {machine} is not an endpoint of link {link}")]
    NotEndpoint { machine: MachineId, link: LinkId },
    #[error("malformed support tree for vertex {vertex}: {msg}")]
    BadTree { vertex: VertexId, msg: String },
    #[error("fragment capacity is zero on tree {vertex}: bandwidth {bandwidth} ≤ tag bits {tag}")]
    NoCapacity { vertex: VertexId, bandwidth: u64, tag: u64 },
}

/// One ledger/transcript entry: bits charged to a link direction in a round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptRecord {
    pub round: u64,
    pub link: LinkId,
    /// 0 = low-endpoint → high-endpoint, 1 = reverse.
    pub dir: u8,
    pub bits: u64,
    /// Virtual vertex whose support tree the bits belong to, if any.
    pub tree: Option<VertexId>,
}

impl TranscriptRecord {
    pub fn to_line(&self) -> String {
        match self.tree {
            Some(t) => format!("{} {} {} {} {}", self.round, self.link, self.dir, self.bits, t),
            None => format!("{} {} {} {} -", self.round, self.link, self.dir, self.bits),
        }
    }
}

/// A message scheduled by [`Network::run_round`].
#[derive(Clone, Debug)]
pub struct Send<P> {
    pub from: MachineId,
    pub link: LinkId,
    pub bits: u64,
    pub payload: P,
}

/// Simple communication graph with bandwidth enforcement and a bit ledger.
pub struct Network {
    num_machines: usize,
    links: Vec<(MachineId, MachineId)>, // endpoints, low < high
    link_index: BTreeMap<(MachineId, MachineId), LinkId>,
    incident: Vec<Vec<LinkId>>,
    /// Bits per link per round; per direction unless `total_per_link`.
    pub bandwidth: u64,
    /// When set, the two directions of a link share one bandwidth budget.
    pub total_per_link: bool,
    seed: u64,
    round_counter: u64,
    ledger: Vec<[u64; 2]>,
    cur_round: u64,
    cur_usage: HashMap<(LinkId, u8), u64>,
    transcript: Option<Vec<TranscriptRecord>>,
}

impl Network {
    pub fn new(
        num_machines: usize,
        link_pairs: &[(MachineId, MachineId)],
        bandwidth: u64,
        seed: u64,
    ) -> Self {
        let mut links = Vec::new();
        let mut link_index = BTreeMap::new();
        let mut incident = vec![Vec::new(); num_machines];
        for &(a, b) in link_pairs {
            assert!(a != b, "self-link");
            assert!((a as usize) < num_machines && (b as usize) < num_machines);
            let key = (a.min(b), a.max(b));
            if link_index.contains_key(&key) {
                continue;
            }
            let id = links.len() as LinkId;
            link_index.insert(key, id);
            links.push(key);
            incident[key.0 as usize].push(id);
            incident[key.1 as usize].push(id);
        }
        assert!(bandwidth >= 1, "bandwidth must be positive");
        let ledger = vec![[0, 0]; links.len()];
        Network {
            num_machines,
            links,
            link_index,
            incident,
            bandwidth,
            total_per_link: false,
            seed,
            round_counter: 0,
            ledger,
            cur_round: 0,
            cur_usage: HashMap::new(),
            transcript: None,
        }
    }

    pub fn num_machines(&self) -> usize {
        self.num_machines
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn link_endpoints(&self, l: LinkId) -> (MachineId, MachineId) {
        self.links[l as usize]
    }

    pub fn link_between(&self, a: MachineId, b: MachineId) -> Option<LinkId> {
        self.link_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn incident_links(&self, m: MachineId) -> &[LinkId] {
        &self.incident[m as usize]
    }

    pub fn rounds(&self) -> u64 {
        self.round_counter
    }

    /// Total bits charged per link, by direction.
    pub fn link_bits(&self, l: LinkId) -> [u64; 2] {
        self.ledger[l as usize]
    }

    pub fn total_bits(&self) -> u64 {
        self.ledger.iter().map(|d| d[0] + d[1]).sum()
    }

    pub fn enable_transcript(&mut self) {
        if self.transcript.is_none() {
            self.transcript = Some(Vec::new());
        }
    }

    pub fn transcript(&self) -> Option<&[TranscriptRecord]> {
        self.transcript.as_deref()
    }

    /// Deterministic RNG stream for a machine within a named scope.
    pub fn machine_rng(&self, machine: MachineId, scope: &[u64]) -> ChaCha8Rng {
        let mut words = vec![self.seed, machine as u64];
        words.extend_from_slice(scope);
        rng_from_scope(&words)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn charge(
        &mut self,
        round: u64,
        link: LinkId,
        dir: u8,
        bits: u64,
        tree: Option<VertexId>,
    ) -> Result<(), NetError> {
        if round > self.cur_round {
            self.cur_round = round;
            self.cur_usage.clear();
        }
        let key = if self.total_per_link { (link, 0) } else { (link, dir) };
        let used = self.cur_usage.entry(key).or_insert(0);
        if *used + bits > self.bandwidth {
            return Err(NetError::BandwidthExceeded {
                link,
                round,
                bits: *used + bits,
                limit: self.bandwidth,
            });
        }
        *used += bits;
        self.ledger[link as usize][dir as usize] += bits;
        if let Some(t) = &mut self.transcript {
            t.push(TranscriptRecord { round, link, dir, bits, tree });
        }
        Ok(())
    }

    /// Delivers all scheduled messages in one synchronous round. Every
    /// payload reaches the opposite endpoint of its link; per-link budgets
    /// are enforced and the ledger updated.
    pub fn run_round<P>(
        &mut self,
        plan: Vec<Send<P>>,
    ) -> Result<BTreeMap<MachineId, Vec<(MachineId, LinkId, P)>>, NetError> {
        let round = self.round_counter + 1;
        let mut inboxes: BTreeMap<MachineId, Vec<(MachineId, LinkId, P)>> = BTreeMap::new();
        for msg in plan {
            let l = msg.link;
            if l as usize >= self.links.len() {
                return Err(NetError::InvalidLink(l));
            }
            let (a, b) = self.links[l as usize];
            let (to, dir) = if msg.from == a {
                (b, 0u8)
            } else if msg.from == b {
                (a, 1u8)
            } else {
                return Err(NetError::NotEndpoint { machine: msg.from, link: l });
            };
            self.charge(round, l, dir, msg.bits, None)?;
            inboxes.entry(to).or_default().push((msg.from, l, msg.payload));
        }
        self.round_counter = round;
        Ok(inboxes)
    }

    /// Advances the round counter without traffic (idle rounds).
    pub fn advance_rounds(&mut self, k: u64) {
        self.round_counter += k;
    }
}

/// One support tree: spans the support of a virtual vertex inside G.
#[derive(Clone, Debug)]
pub struct SupportTree {
    pub vertex: VertexId,
    pub root: MachineId,
    /// All member machines, sorted.
    pub members: Vec<MachineId>,
    /// parent[i] = (parent machine, connecting link) for members[i]; None at root.
    pub parent: Vec<Option<(MachineId, LinkId)>>,
    /// depth[i] = hop distance from root to members[i].
    pub depth: Vec<u32>,
    /// children[i] = (child machine, link) pairs of members[i], id-sorted.
    pub children: Vec<Vec<(MachineId, LinkId)>>,
}

impl SupportTree {
    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn member_index(&self, m: MachineId) -> Option<usize> {
        self.members.binary_search(&m).ok()
    }

    pub fn contains(&self, m: MachineId) -> bool {
        self.member_index(m).is_some()
    }

    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.parent.iter().filter_map(|p| p.map(|(_, l)| l))
    }
}

/// All support trees of an embedding, with the per-link tree index.
pub struct SupportForest {
    pub trees: Vec<SupportTree>,
    /// trees_on_link[l] = indices into `trees` whose tree uses link l.
    pub trees_on_link: Vec<Vec<u32>>,
}

impl SupportForest {
    /// Builds and validates a forest from per-tree parent maps. Each map
    /// gives `machine → parent machine` for every member except the root.
    pub fn build(
        net: &Network,
        specs: Vec<(VertexId, MachineId, BTreeMap<MachineId, MachineId>)>,
    ) -> Result<SupportForest, NetError> {
        let mut trees = Vec::with_capacity(specs.len());
        let mut trees_on_link = vec![Vec::new(); net.num_links()];
        for (ti, (vertex, root, parents)) in specs.into_iter().enumerate() {
            if parents.contains_key(&root) {
                return Err(NetError::BadTree { vertex, msg: "root has a parent".into() });
            }
            let mut members: Vec<MachineId> =
                parents.keys().copied().chain(std::iter::once(root)).collect();
            members.sort_unstable();
            members.dedup();
            if members.len() != parents.len() + 1 {
                return Err(NetError::BadTree { vertex, msg: "duplicate member".into() });
            }
            let idx_of = |m: MachineId| members.binary_search(&m).ok();
            let mut parent = vec![None; members.len()];
            let mut children: Vec<Vec<(MachineId, LinkId)>> = vec![Vec::new(); members.len()];
            for (&m, &p) in &parents {
                let link = net.link_between(m, p).ok_or(NetError::BadTree {
                    vertex,
                    msg: format!("no link between {m} and parent {p}"),
                })?;
                let pi = idx_of(p).ok_or(NetError::BadTree {
                    vertex,
                    msg: format!("parent {p} is not a member"),
                })?;
                parent[idx_of(m).unwrap()] = Some((p, link));
                children[pi].push((m, link));
                trees_on_link[link as usize].push(ti as u32);
            }
            for c in &mut children {
                c.sort_unstable();
            }
            // Depths via BFS from root; also proves connectivity/acyclicity.
            let mut depth = vec![u32::MAX; members.len()];
            let ri = idx_of(root).unwrap();
            depth[ri] = 0;
            let mut queue = std::collections::VecDeque::from([ri]);
            let mut seen = 1;
            while let Some(i) = queue.pop_front() {
                for &(c, _) in &children[i] {
                    let ci = idx_of(c).unwrap();
                    if depth[ci] != u32::MAX {
                        return Err(NetError::BadTree { vertex, msg: "cycle".into() });
                    }
                    depth[ci] = depth[i] + 1;
                    seen += 1;
                    queue.push_back(ci);
                }
            }
            if seen != members.len() {
                return Err(NetError::BadTree { vertex, msg: "disconnected".into() });
            }
            trees.push(SupportTree { vertex, root, members, parent, depth, children });
        }
        for t in &mut trees_on_link {
            t.sort_unstable();
            t.dedup();
        }
        Ok(SupportForest { trees, trees_on_link })
    }

    pub fn tree_for(&self, vertex: VertexId) -> Option<&SupportTree> {
        self.trees.iter().find(|t| t.vertex == vertex)
    }

    /// Bits of framing tag needed on a link so the receiver can attribute a
    /// fragment to one of the trees sharing that link.
    pub fn tag_bits(&self, link: LinkId) -> u64 {
        let k = self.trees_on_link[link as usize].len() as u64;
        if k <= 1 { 0 } else { ceil_log2(k) as u64 }
    }

    /// Largest framing tag over the links of tree `ti`.
    fn max_tag(&self, ti: usize) -> u64 {
        self.trees[ti].links().map(|l| self.tag_bits(l)).max().unwrap_or(0)
    }
}

/// Congestion ρ (max trees sharing a link) and dilation d (max tree depth).
pub fn measure_congestion_dilation(forest: &SupportForest) -> (u64, u64) {
    let rho = forest.trees_on_link.iter().map(|t| t.len() as u64).max().unwrap_or(0);
    let d = forest.trees.iter().map(|t| t.max_depth() as u64).max().unwrap_or(0);
    (rho, d)
}

enum Direction {
    Down,
    Up,
}

/// Token-level scheduler shared by broadcast and converge-cast: per
/// (link, direction) FIFO, one fragment per round, ordered by
/// (availability, tree, fragment).
struct Scheduler<'a> {
    forest: &'a SupportForest,
    /// chunks[job] = fragment bit sizes for that tree's payload.
    chunks: Vec<Vec<u64>>,
    jobs: Vec<usize>, // tree indices
}

impl<'a> Scheduler<'a> {
    fn new(
        net: &Network,
        forest: &'a SupportForest,
        payload_bits: &[(usize, u64)], // (tree index, total bits)
    ) -> Result<Self, NetError> {
        let mut chunks = Vec::new();
        let mut jobs = Vec::new();
        for &(ti, bits) in payload_bits {
            let tag = forest.max_tag(ti);
            if net.bandwidth <= tag {
                return Err(NetError::NoCapacity {
                    vertex: forest.trees[ti].vertex,
                    bandwidth: net.bandwidth,
                    tag,
                });
            }
            let cap = net.bandwidth - tag;
            let mut c = Vec::new();
            let mut left = bits;
            while left > 0 {
                let take = left.min(cap);
                c.push(take);
                left -= take;
            }
            jobs.push(ti);
            chunks.push(c);
        }
        Ok(Scheduler { forest, chunks, jobs })
    }

    /// Runs the token simulation; returns rounds consumed.
    fn run(self, net: &mut Network, direction: Direction) -> Result<u64, NetError> {
        type QueueKey = (LinkId, u8);
        // (avail, tree index, frag, job index) — job carried for chunk lookup.
        type Item = Reverse<(u64, u32, u32, u32)>;
        let mut queues: BTreeMap<QueueKey, BinaryHeap<Item>> = BTreeMap::new();
        let mut pending: u64 = 0;

        let dir_of = |net: &Network, from: MachineId, link: LinkId| -> u8 {
            let (a, _) = net.link_endpoints(link);
            if from == a { 0 } else { 1 }
        };

        // For Up: remaining child deliveries before a machine can forward a
        // fragment, and the latest arrival round seen so far.
        let mut up_wait: HashMap<(u32, usize, u32), (usize, u64)> = HashMap::new();

        match direction {
            Direction::Down => {
                for (ji, &ti) in self.jobs.iter().enumerate() {
                    let tree = &self.forest.trees[ti];
                    let ri = tree.member_index(tree.root).unwrap();
                    for &(_, link) in &tree.children[ri] {
                        let d = dir_of(net, tree.root, link);
                        for f in 0..self.chunks[ji].len() as u32 {
                            queues
                                .entry((link, d))
                                .or_default()
                                .push(Reverse((1, ti as u32, f, ji as u32)));
                            pending += 1;
                        }
                    }
                    pending += (tree.members.len() as u64 - 1 - tree.children[ri].len() as u64)
                        * self.chunks[ji].len() as u64;
                }
            }
            Direction::Up => {
                for (ji, &ti) in self.jobs.iter().enumerate() {
                    let tree = &self.forest.trees[ti];
                    let nfrags = self.chunks[ji].len() as u32;
                    for (mi, p) in tree.parent.iter().enumerate() {
                        let Some((_, link)) = *p else { continue };
                        let m = tree.members[mi];
                        let d = dir_of(net, m, link);
                        let kids = tree.children[mi].len();
                        for f in 0..nfrags {
                            if kids == 0 {
                                queues
                                    .entry((link, d))
                                    .or_default()
                                    .push(Reverse((1, ti as u32, f, ji as u32)));
                            } else {
                                up_wait.insert((ti as u32, mi, f), (kids, 0));
                            }
                            pending += 1;
                        }
                    }
                    // Root may also wait on children, but sends nothing up.
                }
            }
        }

        let mut round: u64 = 0;
        while pending > 0 {
            // Jump to the earliest round in which any token is ready.
            let next = queues
                .values()
                .filter_map(|q| q.peek().map(|Reverse((a, _, _, _))| *a))
                .min()
                .expect("pending tokens but empty queues");
            round = next.max(round + 1);

            let keys: Vec<QueueKey> = queues.keys().copied().collect();
            let mut used_links: std::collections::HashSet<LinkId> = Default::default();
            let mut delivered: Vec<(QueueKey, u32, u32, u32)> = Vec::new();
            for key in keys {
                if net.total_per_link && used_links.contains(&key.0) {
                    continue;
                }
                let q = queues.get_mut(&key).unwrap();
                let ready = matches!(q.peek(), Some(Reverse((a, _, _, _))) if *a <= round);
                if !ready {
                    continue;
                }
                let Reverse((_, t, f, ji)) = q.pop().unwrap();
                if q.is_empty() {
                    queues.remove(&key);
                }
                used_links.insert(key.0);
                delivered.push((key, t, f, ji));
            }
            for ((link, d), t, f, ji) in delivered {
                let ti = t as usize;
                let bits = self.chunks[ji as usize][f as usize] + self.forest.tag_bits(link);
                net.charge(net.round_counter + round, link, d, bits, Some(self.forest.trees[ti].vertex))?;
                pending -= 1;
                let (a, b) = net.link_endpoints(link);
                let arrived_at = if d == 0 { b } else { a };
                let tree = &self.forest.trees[ti];
                let mi = tree.member_index(arrived_at).unwrap();
                match direction {
                    Direction::Down => {
                        for &(_, clink) in &tree.children[mi] {
                            let cd = dir_of(net, arrived_at, clink);
                            queues
                                .entry((clink, cd))
                                .or_default()
                                .push(Reverse((round + 1, t, f, ji)));
                        }
                    }
                    Direction::Up => {
                        if arrived_at == tree.root {
                            continue;
                        }
                        let slot = up_wait.get_mut(&(t, mi, f)).expect("up token bookkeeping");
                        slot.0 -= 1;
                        slot.1 = slot.1.max(round);
                        if slot.0 == 0 {
                            let (_, last) = up_wait.remove(&(t, mi, f)).unwrap();
                            let (_, plink) = tree.parent[mi].unwrap();
                            let pd = dir_of(net, arrived_at, plink);
                            queues
                                .entry((plink, pd))
                                .or_default()
                                .push(Reverse((last + 1, t, f, ji)));
                        }
                    }
                }
            }
        }

        // Round bound for per-link FIFO scheduling over ρ trees of depth d.
        let (rho, dd) = measure_congestion_dilation(self.forest);
        let max_frags = self.chunks.iter().map(|c| c.len() as u64).max().unwrap_or(0);
        assert!(
            round <= rho.max(1) * dd.max(1) * max_frags.max(1),
            "tree schedule exceeded ρ·d·fragments: {round} > {rho}·{dd}·{max_frags}"
        );
        net.round_counter += round;
        Ok(round)
    }
}

/// Broadcasts each vertex's payload from its tree root to every machine on
/// its support. Payloads are given as bit lengths (the engine accounts for
/// traffic; callers own the actual data). Returns rounds consumed.
pub fn broadcast_on_trees(
    net: &mut Network,
    forest: &SupportForest,
    payload_bits: &[(VertexId, u64)],
) -> Result<u64, NetError> {
    let jobs = resolve_jobs(forest, payload_bits)?;
    Scheduler::new(net, forest, &jobs)?.run(net, Direction::Down)
}

/// Converge-casts per-machine contributions up each support tree, combining
/// at internal machines. The root's folded value per vertex is returned along
/// with the rounds consumed. `value_width` is the wire size of one value.
pub fn aggregate_on_trees<T: Clone>(
    net: &mut Network,
    forest: &SupportForest,
    requests: &[(VertexId, u64)], // (vertex, value_width bits)
    mut leaf_value: impl FnMut(MachineId, VertexId) -> T,
    combine: impl Fn(&T, &T) -> T,
) -> Result<(Vec<(VertexId, T)>, u64), NetError> {
    let jobs = resolve_jobs(forest, requests)?;
    let rounds = Scheduler::new(net, forest, &jobs)?.run(net, Direction::Up)?;
    // Fold values bottom-up in machine-id order (combiner is commutative, so
    // any order is semantically equal; this order is the deterministic one).
    let mut out = Vec::with_capacity(jobs.len());
    for &(ti, _) in &jobs {
        let tree = &forest.trees[ti];
        let v = tree.vertex;
        fn fold<T: Clone>(
            tree: &SupportTree,
            mi: usize,
            v: VertexId,
            leaf: &mut impl FnMut(MachineId, VertexId) -> T,
            combine: &impl Fn(&T, &T) -> T,
        ) -> T {
            let mut acc = leaf(tree.members[mi], v);
            for &(c, _) in &tree.children[mi] {
                let ci = tree.member_index(c).unwrap();
                let sub = fold(tree, ci, v, leaf, combine);
                acc = combine(&acc, &sub);
            }
            acc
        }
        let ri = tree.member_index(tree.root).unwrap();
        out.push((v, fold(tree, ri, v, &mut leaf_value, &combine)));
    }
    Ok((out, rounds))
}

fn resolve_jobs(
    forest: &SupportForest,
    payload_bits: &[(VertexId, u64)],
) -> Result<Vec<(usize, u64)>, NetError> {
    let mut index: HashMap<VertexId, usize> = HashMap::new();
    for (i, t) in forest.trees.iter().enumerate() {
        index.insert(t.vertex, i);
    }
    payload_bits
        .iter()
        .map(|&(v, bits)| {
            index
                .get(&v)
                .map(|&i| (i, bits))
                .ok_or(NetError::BadTree { vertex: v, msg: "no support tree".into() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_net(n: usize) -> Network {
        let links: Vec<_> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
        Network::new(n, &links, 8, 42)
    }

    #[test]
    fn run_round_delivers_and_charges() {
        let mut net = path_net(3);
        let inboxes = net
            .run_round(vec![Send { from: 0, link: 0, bits: 5, payload: "hi" }])
            .unwrap();
        assert_eq!(inboxes[&1], vec![(0, 0, "hi")]);
        assert_eq!(net.link_bits(0), [5, 0]);
        assert_eq!(net.rounds(), 1);
    }

    #[test]
    fn bandwidth_enforced() {
        let mut net = path_net(2);
        let err = net.run_round(vec![
            Send { from: 0, link: 0, bits: 5, payload: () },
            Send { from: 0, link: 0, bits: 5, payload: () },
        ]);
        assert!(matches!(err, Err(NetError::BandwidthExceeded { .. })));
    }

    #[test]
    fn broadcast_path_tree() {
        // One tree spanning the whole 4-machine path, rooted at 0.
        let mut net = path_net(4);
        net.enable_transcript();
        let forest = SupportForest::build(
            &net,
            vec![(0, 0, BTreeMap::from([(1, 0), (2, 1), (3, 2)]))],
        )
        .unwrap();
        let (rho, d) = measure_congestion_dilation(&forest);
        assert_eq!((rho, d), (1, 3));
        let rounds = broadcast_on_trees(&mut net, &forest, &[(0, 8)]).unwrap();
        assert_eq!(rounds, 3); // one fragment, pipelined down three links
        let total: u64 = (0..3).map(|l| net.link_bits(l).iter().sum::<u64>()).sum();
        assert_eq!(total, 24);
    }

    #[test]
    fn aggregate_sums_contributions() {
        let mut net = path_net(4);
        let forest = SupportForest::build(
            &net,
            vec![(7, 0, BTreeMap::from([(1, 0), (2, 1), (3, 2)]))],
        )
        .unwrap();
        let (vals, rounds) =
            aggregate_on_trees(&mut net, &forest, &[(7, 8)], |m, _| m as u64, |a, b| a + b)
                .unwrap();
        assert_eq!(vals, vec![(7, 0 + 1 + 2 + 3)]);
        assert_eq!(rounds, 3);
    }

    #[test]
    fn empty_payload_is_free() {
        let mut net = path_net(3);
        let forest =
            SupportForest::build(&net, vec![(0, 0, BTreeMap::from([(1, 0)]))]).unwrap();
        let rounds = broadcast_on_trees(&mut net, &forest, &[(0, 0)]).unwrap();
        assert_eq!(rounds, 0);
        assert_eq!(net.total_bits(), 0);
    }
}
