//! Reusable randomized coloring primitives executed over the round engine:
//! random color trials, multicolor trials, the clique-palette sampler and
//! distributed clique-palette queries, and slice-color layering. Every
//! primitive charges honest traffic on the engine (candidate broadcasts,
//! conflict converge-casts, commit broadcasts) and only ever adopts colors
//! from its caller-supplied color space.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::Embedding;
use crate::multigraph::{color, Color, MultiGraph, PartialColoring, VertexId};
use crate::netsim::{aggregate_on_trees, broadcast_on_trees, NetError, Network, SupportForest};
use crate::util::{field_bits, mix_seed, rng_from_scope};

#[derive(Debug, thiserror::Error)]
pub enum TrialError {
    #[error("net: {0}")]
    Net(#[from] NetError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("clique {0} has H-diameter > 2: no relay for member {1}")]
    NoRelay(usize, VertexId),
}

/// Engine context shared by all distributed steps.
pub struct Sim<'a> {
    pub net: &'a mut Network,
    pub forest: &'a SupportForest,
    pub emb: &'a Embedding,
}

pub const TAG_RCT: u64 = 0x52_43_54;
pub const TAG_MCT: u64 = 0x4d_43_54;
pub const TAG_SLICE: u64 = 0x53_4c_43;
pub const TAG_SAMPLER: u64 = 0x53_4d_50;
pub const TAG_SLACKGEN: u64 = 0x53_47_4e;
pub const TAG_LOWDEG: u64 = 0x4c_44_47;

impl<'a> Sim<'a> {
    /// Deterministic stream for one virtual vertex within a named scope.
    pub fn vertex_rng(&self, tag: u64, scope: &[u64], v: VertexId) -> ChaCha8Rng {
        let mut words = vec![self.net.seed(), tag];
        words.extend_from_slice(scope);
        words.push(v as u64);
        rng_from_scope(&words)
    }

    /// Shared stream for a vertex group (e.g. a clique) within a scope.
    pub fn shared_seed(&self, tag: u64, scope: &[u64]) -> u64 {
        let mut words = vec![self.net.seed(), tag];
        words.extend_from_slice(scope);
        mix_seed(&words)
    }

    /// Broadcasts `bits`-wide payloads down the listed vertices' trees.
    pub fn bcast(&mut self, items: &[(VertexId, u64)]) -> Result<u64, TrialError> {
        Ok(broadcast_on_trees(self.net, self.forest, items)?)
    }

    /// Converge-casts `bits`-wide values up the listed vertices' trees
    /// (accounting only; the fold itself happens on central state).
    pub fn agg(&mut self, items: &[(VertexId, u64)]) -> Result<u64, TrialError> {
        let (_, rounds) =
            aggregate_on_trees(self.net, self.forest, items, |_, _| (), |_, _| ())?;
        Ok(rounds)
    }

    /// Wire width of one color value in this instance.
    pub fn color_bits(&self) -> u64 {
        field_bits(self.emb.h.max_pseudo_degree() + 1)
    }

    /// Commits assignments: sets the colors, asserts properness against all
    /// previously colored neighbors and range membership, and broadcasts
    /// each new color over its support tree so every machine of V(v) (hence
    /// every handler of v's edges) knows it.
    pub fn commit(
        &mut self,
        coloring: &mut PartialColoring,
        assignments: &[(VertexId, Color)],
    ) -> Result<u64, TrialError> {
        let g = &self.emb.h;
        for &(v, c) in assignments {
            debug_assert!(!coloring.is_colored(v), "vertex {v} colored twice");
            assert!(
                (c.get() as u64) <= g.palette_size(v),
                "color {c} out of range for vertex {v}"
            );
            for u in g.neighbors(v) {
                assert!(
                    coloring.get(u) != Some(c),
                    "commit would break properness on edge {v}-{u} (color {c})"
                );
            }
            coloring.set(v, c);
        }
        let w = self.color_bits();
        let items: Vec<(VertexId, u64)> = assignments.iter().map(|&(v, _)| (v, w)).collect();
        self.bcast(&items)
    }
}

// ---- color spaces --------------------------------------------------------

/// Candidate color set: an interval of [1, deg(v)+1], possibly minus an
/// exclusion set. Supports O(log)-ish rank/select, uniform sampling.
#[derive(Clone, Debug)]
pub enum ColorSpace {
    Range { lo: u32, hi: u32 },
    RangeMinus { lo: u32, hi: u32, excluded: Vec<u32> },
}

impl ColorSpace {
    pub fn range(lo: u32, hi: u32) -> ColorSpace {
        assert!(lo >= 1);
        ColorSpace::Range { lo, hi }
    }

    /// [lo, hi] minus `excluded` (need not be a subset; it is clipped).
    pub fn range_minus(lo: u32, hi: u32, excluded: impl IntoIterator<Item = u32>) -> ColorSpace {
        assert!(lo >= 1);
        let mut ex: Vec<u32> =
            excluded.into_iter().filter(|&c| c >= lo && c <= hi).collect();
        ex.sort_unstable();
        ex.dedup();
        ColorSpace::RangeMinus { lo, hi, excluded: ex }
    }

    pub fn size(&self) -> u64 {
        match self {
            ColorSpace::Range { lo, hi } => (*hi as u64 + 1).saturating_sub(*lo as u64),
            ColorSpace::RangeMinus { lo, hi, excluded } => {
                (*hi as u64 + 1).saturating_sub(*lo as u64) - excluded.len() as u64
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn contains(&self, c: u32) -> bool {
        match self {
            ColorSpace::Range { lo, hi } => c >= *lo && c <= *hi,
            ColorSpace::RangeMinus { lo, hi, excluded } => {
                c >= *lo && c <= *hi && excluded.binary_search(&c).is_err()
            }
        }
    }

    /// i-th smallest member, 0-based.
    pub fn nth(&self, i: u64) -> Option<u32> {
        if i >= self.size() {
            return None;
        }
        match self {
            ColorSpace::Range { lo, .. } => Some(lo + i as u32),
            ColorSpace::RangeMinus { lo, excluded, .. } => {
                let mut c = lo + i as u32;
                for &e in excluded {
                    if e <= c {
                        c += 1;
                    } else {
                        break;
                    }
                }
                Some(c)
            }
        }
    }

    /// Number of members strictly below c.
    pub fn rank(&self, c: u32) -> u64 {
        match self {
            ColorSpace::Range { lo, hi } => {
                let c = c.clamp(*lo, hi + 1);
                (c - lo) as u64
            }
            ColorSpace::RangeMinus { lo, hi, excluded } => {
                let c = c.clamp(*lo, hi + 1);
                let below_ex = excluded.partition_point(|&e| e < c) as u64;
                (c - lo) as u64 - below_ex
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Option<u32> {
        let n = self.size();
        if n == 0 {
            return None;
        }
        self.nth(rng.gen_range(0..n))
    }

    /// `x` distinct members chosen uniformly (all members when x ≥ size),
    /// ascending order.
    pub fn sample_distinct(&self, x: usize, rng: &mut impl Rng) -> Vec<u32> {
        let n = self.size();
        if x as u64 >= n {
            return self.iter().collect();
        }
        // Floyd's algorithm over index space.
        let mut chosen: BTreeSet<u64> = BTreeSet::new();
        for i in (n - x as u64)..n {
            let j = rng.gen_range(0..=i);
            if !chosen.insert(j) {
                chosen.insert(i);
            }
        }
        chosen.into_iter().map(|i| self.nth(i).unwrap()).collect()
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match self {
            ColorSpace::Range { lo, hi } => Box::new(*lo..=*hi),
            ColorSpace::RangeMinus { lo, hi, excluded } => {
                Box::new((*lo..=*hi).filter(move |c| excluded.binary_search(c).is_err()))
            }
        }
    }
}

// ---- clique communication ------------------------------------------------

/// Relay table for a clique of H-diameter ≤ 2: members adjacent to the
/// leader talk via the shared edge handler; others via the smallest common
/// in-clique neighbor.
pub struct CliqueComms {
    pub leader: VertexId,
    pub members: Vec<VertexId>,
    /// relay[v] = None for leader/direct members; Some(z) for distance-2.
    pub relay: BTreeMap<VertexId, Option<VertexId>>,
}

impl CliqueComms {
    pub fn new(g: &MultiGraph, k: &[VertexId], clique_idx: usize) -> Result<CliqueComms, TrialError> {
        let leader = *k.iter().min().ok_or(TrialError::Invalid("empty clique".into()))?;
        let kset: BTreeSet<VertexId> = k.iter().copied().collect();
        let mut relay = BTreeMap::new();
        for &v in k {
            if v == leader || g.has_edge(v, leader) {
                relay.insert(v, None);
                continue;
            }
            let z = g
                .neighbors(v)
                .find(|&z| kset.contains(&z) && g.has_edge(z, leader));
            match z {
                Some(z) => {
                    relay.insert(v, Some(z));
                }
                None => return Err(TrialError::NoRelay(clique_idx, v)),
            }
        }
        Ok(CliqueComms { leader, members: k.to_vec(), relay })
    }

    fn relay_vertices(&self) -> Vec<VertexId> {
        let mut zs: Vec<VertexId> =
            self.relay.values().filter_map(|z| *z).collect();
        zs.sort_unstable();
        zs.dedup();
        zs
    }

    /// Charges a member→leader payload gather of `width` bits per tree:
    /// members broadcast down their own trees (handlers pick up), relays
    /// converge and rebroadcast, the leader converges.
    pub fn gather(&self, sim: &mut Sim, width: u64) -> Result<u64, TrialError> {
        let mut rounds = 0;
        let items: Vec<(VertexId, u64)> = self
            .members
            .iter()
            .filter(|&&v| v != self.leader)
            .map(|&v| (v, width))
            .collect();
        rounds += sim.bcast(&items)?;
        let zs = self.relay_vertices();
        if !zs.is_empty() {
            let zitems: Vec<(VertexId, u64)> = zs.iter().map(|&z| (z, width)).collect();
            rounds += sim.agg(&zitems)?;
            rounds += sim.bcast(&zitems)?;
        }
        rounds += sim.agg(&[(self.leader, width)])?;
        Ok(rounds)
    }

    /// Charges a leader→members scatter of `width` bits per tree: leader
    /// broadcasts, relays rebroadcast, members converge from handlers to
    /// their roots.
    pub fn scatter(&self, sim: &mut Sim, width: u64) -> Result<u64, TrialError> {
        let mut rounds = 0;
        rounds += sim.bcast(&[(self.leader, width)])?;
        let zs = self.relay_vertices();
        if !zs.is_empty() {
            let zitems: Vec<(VertexId, u64)> = zs.iter().map(|&z| (z, width)).collect();
            rounds += sim.agg(&zitems)?;
            rounds += sim.bcast(&zitems)?;
        }
        let items: Vec<(VertexId, u64)> = self
            .members
            .iter()
            .filter(|&&v| v != self.leader)
            .map(|&v| (v, width))
            .collect();
        rounds += sim.agg(&items)?;
        Ok(rounds)
    }
}

/// One clique-palette request, over C = ψ(K) (used) or L_ψ(K) (free)
/// restricted to [a, b] ⊆ [1, cap].
#[derive(Clone, Copy, Debug)]
pub enum PaletteQuery {
    CountFree { a: u32, b: u32 },
    CountUsed { a: u32, b: u32 },
    /// 1-based select of the i-th free color in [a, b].
    SelectFree { a: u32, b: u32, i: u64 },
    /// 1-based select of the i-th used color in [a, b].
    SelectUsed { a: u32, b: u32, i: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaletteAnswer {
    Count(u64),
    Color(Color),
    OutOfRange,
}

/// Distributed clique-palette query: the leader aggregates the used-color
/// bitmap of K over the clique's relay structure, answers rank/select
/// requests, and scatters the answers back in bandwidth-sized batches.
/// Answers equal the centralized oracle exactly.
pub fn query_clique_palette(
    sim: &mut Sim,
    coloring: &PartialColoring,
    comms: &CliqueComms,
    cap: u32,
    requests: &[(VertexId, PaletteQuery)],
) -> Result<(Vec<(VertexId, PaletteAnswer)>, u64), TrialError> {
    let mut rounds = 0;
    // Used-color bitmap travels handler→leader (cap bits wide).
    rounds += comms.gather(sim, cap as u64)?;

    let used: BTreeSet<u32> = comms
        .members
        .iter()
        .filter_map(|&v| coloring.get(v))
        .map(|c| c.get())
        .filter(|&c| c <= cap)
        .collect();

    let mut answers = Vec::with_capacity(requests.len());
    for &(v, q) in requests {
        let ans = answer_palette_query(&used, cap, q);
        answers.push((v, ans));
    }

    // Requests up, answers down, batched to the link bandwidth.
    let req_bits = 2 * field_bits(cap as u64) + field_bits(cap as u64 + 1) + 2;
    let ans_bits = field_bits(cap as u64) + 2;
    let per_batch = ((sim.net.bandwidth / req_bits.max(ans_bits)).max(1)) as usize;
    for chunk in requests.chunks(per_batch) {
        let w_up = req_bits * chunk.len() as u64;
        let w_down = ans_bits * chunk.len() as u64;
        rounds += comms.gather(sim, w_up.min(sim.net.bandwidth))?;
        rounds += comms.scatter(sim, w_down.min(sim.net.bandwidth))?;
    }
    Ok((answers, rounds))
}

fn answer_palette_query(used: &BTreeSet<u32>, cap: u32, q: PaletteQuery) -> PaletteAnswer {
    let clamp = |a: u32, b: u32| (a.max(1), b.min(cap));
    match q {
        PaletteQuery::CountFree { a, b } => {
            let (a, b) = clamp(a, b);
            if a > b {
                return PaletteAnswer::Count(0);
            }
            let used_in = used.range(a..=b).count() as u64;
            PaletteAnswer::Count((b - a + 1) as u64 - used_in)
        }
        PaletteQuery::CountUsed { a, b } => {
            let (a, b) = clamp(a, b);
            if a > b {
                return PaletteAnswer::Count(0);
            }
            PaletteAnswer::Count(used.range(a..=b).count() as u64)
        }
        PaletteQuery::SelectFree { a, b, i } => {
            let (a, b) = clamp(a, b);
            if a > b || i == 0 {
                return PaletteAnswer::OutOfRange;
            }
            let mut seen = 0u64;
            let mut next_used = used.range(a..=b).peekable();
            for c in a..=b {
                if next_used.peek() == Some(&&c) {
                    next_used.next();
                    continue;
                }
                seen += 1;
                if seen == i {
                    return PaletteAnswer::Color(color(c));
                }
            }
            PaletteAnswer::OutOfRange
        }
        PaletteQuery::SelectUsed { a, b, i } => {
            let (a, b) = clamp(a, b);
            if a > b || i == 0 {
                return PaletteAnswer::OutOfRange;
            }
            match used.range(a..=b).nth(i as usize - 1) {
                Some(&c) => PaletteAnswer::Color(color(c)),
                None => PaletteAnswer::OutOfRange,
            }
        }
    }
}

// ---- random color trial ----------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct TrialOutcome {
    pub colored: Vec<VertexId>,
    pub rounds: u64,
}

/// One random color trial over S: every listed uncolored vertex samples a
/// uniform candidate from its space, keeps it iff no colored neighbor holds
/// it and no trying neighbor sampled the same color (symmetric drop).
/// Handlers detect conflicts; candidates and conflict bits are charged.
pub fn random_color_trial(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    s: &[VertexId],
    space: &dyn Fn(VertexId) -> ColorSpace,
    scope: &[u64],
) -> Result<TrialOutcome, TrialError> {
    let g = &sim.emb.h;
    let mut rounds = 0;

    let mut proposal: BTreeMap<VertexId, u32> = BTreeMap::new();
    for &v in s {
        if coloring.is_colored(v) {
            continue;
        }
        let cs = space(v);
        if cs.is_empty() {
            continue;
        }
        let mut rng = sim.vertex_rng(TAG_RCT, scope, v);
        let c = cs.sample(&mut rng).unwrap();
        debug_assert!(cs.contains(c));
        proposal.insert(v, c);
    }

    let w = sim.color_bits();
    let bitems: Vec<(VertexId, u64)> = proposal.keys().map(|&v| (v, w)).collect();
    rounds += sim.bcast(&bitems)?;

    let mut keep: Vec<(VertexId, Color)> = Vec::new();
    for (&v, &c) in &proposal {
        let mut ok = true;
        for u in g.neighbors(v) {
            if coloring.get(u) == Some(color(c)) || proposal.get(&u) == Some(&c) {
                ok = false;
                break;
            }
        }
        if ok {
            keep.push((v, color(c)));
        }
    }
    let aitems: Vec<(VertexId, u64)> = proposal.keys().map(|&v| (v, 1)).collect();
    rounds += sim.agg(&aitems)?;
    rounds += sim.commit(coloring, &keep)?;

    Ok(TrialOutcome { colored: keep.iter().map(|&(v, _)| v).collect(), rounds })
}

// ---- multicolor trial ------------------------------------------------------

#[derive(Clone, Debug)]
pub enum MctVerdict {
    AllColored,
    Failed { witness: VertexId, phases: u32 },
}

pub struct MctOutcome {
    pub verdict: MctVerdict,
    pub rounds: u64,
}

/// Checks the multicolor-trial slack condition for one vertex:
/// |L_c(v) ∩ C(v)| − |N_c(v) ∩ S| ≥ max{2|N_c(v) ∩ S|, threshold} + γ|C(v)|.
pub fn mct_precondition_ok(
    g: &MultiGraph,
    coloring: &PartialColoring,
    v: VertexId,
    cs: &ColorSpace,
    s: &BTreeSet<VertexId>,
    gamma: f64,
    threshold: u64,
) -> bool {
    let used = coloring.neighbor_colors(g, v);
    let avail = cs.iter().filter(|&c| !used.contains(&color(c))).count() as u64;
    let uncolored_in_s = g
        .neighbors(v)
        .filter(|u| s.contains(u) && !coloring.is_colored(*u))
        .count() as u64;
    let need = (2 * uncolored_in_s).max(threshold) as f64 + gamma * cs.size() as f64;
    avail as f64 - uncolored_in_s as f64 >= need
}

/// Multicolor trial: doubling candidate schedule. In phase j every uncolored
/// vertex samples min(2^j, x_max) distinct candidates from its space,
/// filtered against colored neighbors; a candidate dies if any trying
/// neighbor also sampled it this phase (symmetric); the lowest survivor is
/// kept. Colors everything w.h.p. under the slack precondition; explicit
/// failure verdict otherwise. The per-vertex candidate count is additionally
/// capped at avail/(2(live-degree+1)) — the level the slack condition
/// licenses — so saturated endgames degrade to single trials instead of
/// every candidate dying symmetrically forever.
pub fn multicolor_trial(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    s: &[VertexId],
    space: &dyn Fn(VertexId) -> ColorSpace,
    phase_cap: u32,
    x_max: usize,
    scope: &[u64],
) -> Result<MctOutcome, TrialError> {
    let mut rounds = 0;
    let mut live: Vec<VertexId> = s
        .iter()
        .copied()
        .filter(|&v| !coloring.is_colored(v))
        .collect();

    for phase in 1..=phase_cap {
        if live.is_empty() {
            break;
        }
        let x = (1usize << phase.min(20)).min(x_max);
        let g = &sim.emb.h;
        let live_set: BTreeSet<VertexId> = live.iter().copied().collect();

        let mut candidates: BTreeMap<VertexId, Vec<u32>> = BTreeMap::new();
        for &v in &live {
            let cs = space(v);
            let used = coloring.neighbor_colors(g, v);
            let avail = cs.iter().filter(|&c| !used.contains(&color(c))).count();
            let contenders = g.neighbors(v).filter(|u| live_set.contains(u)).count();
            let x_v = x.min((avail / (2 * (contenders + 1))).max(1));
            let mut rng = sim.vertex_rng(TAG_MCT, &[scope, &[phase as u64]].concat(), v);
            let cand: Vec<u32> = cs
                .sample_distinct(x_v, &mut rng)
                .into_iter()
                .filter(|&c| !used.contains(&color(c)))
                .collect();
            candidates.insert(v, cand);
        }

        let w = sim.color_bits();
        let bitems: Vec<(VertexId, u64)> = candidates
            .iter()
            .map(|(&v, cand)| (v, w * cand.len().max(1) as u64))
            .collect();
        rounds += sim.bcast(&bitems)?;

        let mut keep: Vec<(VertexId, Color)> = Vec::new();
        for (&v, cand) in &candidates {
            let mut best: Option<u32> = None;
            'cand: for &c in cand {
                for u in g.neighbors(v) {
                    if coloring.get(u) == Some(color(c)) {
                        continue 'cand;
                    }
                    if let Some(uc) = candidates.get(&u) {
                        if uc.contains(&c) {
                            continue 'cand;
                        }
                    }
                }
                best = Some(c);
                break;
            }
            if let Some(c) = best {
                keep.push((v, color(c)));
            }
        }
        let aitems: Vec<(VertexId, u64)> = candidates
            .iter()
            .map(|(&v, cand)| (v, cand.len().max(1) as u64))
            .collect();
        rounds += sim.agg(&aitems)?;
        rounds += sim.commit(coloring, &keep)?;
        live.retain(|&v| !coloring.is_colored(v));
    }

    let verdict = match live.first() {
        None => MctVerdict::AllColored,
        Some(&witness) => MctVerdict::Failed { witness, phases: phase_cap },
    };
    Ok(MctOutcome { verdict, rounds })
}

// ---- clique-palette sampler ------------------------------------------------

/// Per-clique sampler configuration for one iteration: a shared seed drives
/// a hash h : [cap] → [2·cap]; candidates are the colors hashing below the
/// threshold, intersected with the clique palette (leader bitmap), minus the
/// colors of the vertex's own colored neighbors (handler bitmaps), minus the
/// reserved prefix [r], clipped to the vertex palette.
#[derive(Clone, Copy, Debug)]
pub struct CliquePalSampler {
    pub cap: u32,
    pub reserved: u32,
    pub shared_seed: u64,
    /// Candidate count target Θ(log n).
    pub threshold: u64,
}

impl CliquePalSampler {
    /// Hash of one color under the shared seed, in [1, 2·cap].
    fn h(&self, c: u32) -> u64 {
        1 + mix_seed(&[self.shared_seed, c as u64]) % (2 * self.cap as u64)
    }

    /// Candidate colors: h(c) ≤ threshold, in ascending color order.
    pub fn candidates(&self) -> Vec<u32> {
        (1..=self.cap).filter(|&c| self.h(c) <= self.threshold).collect()
    }

    /// Samples a color for `v`: uniform among surviving candidates; `Fail`
    /// (None) when no candidate survives. Never returns a reserved color.
    pub fn sample(
        &self,
        g: &MultiGraph,
        coloring: &PartialColoring,
        clique_used: &BTreeSet<u32>,
        v: VertexId,
        rng: &mut impl Rng,
    ) -> Option<Color> {
        let deg_cap = g.palette_size(v);
        let used_by_nbrs = coloring.neighbor_colors(g, v);
        let survivors: Vec<u32> = self
            .candidates()
            .into_iter()
            .filter(|&c| {
                c > self.reserved
                    && (c as u64) <= deg_cap
                    && !clique_used.contains(&c)
                    && !used_by_nbrs.contains(&color(c))
            })
            .collect();
        let &c = survivors.choose(rng)?;
        Some(color(c))
    }
}

// ---- slice color -----------------------------------------------------------

/// Layer assignment produced by slice coloring; layer indices are ≥ 1.
#[derive(Clone, Debug, Default)]
pub struct LayerAssignment {
    pub layer: BTreeMap<VertexId, u32>,
}

impl LayerAssignment {
    pub fn num_layers(&self) -> u32 {
        self.layer.values().copied().max().unwrap_or(0)
    }

    pub fn members_of(&self, i: u32) -> Vec<VertexId> {
        self.layer
            .iter()
            .filter_map(|(&v, &l)| (l == i).then_some(v))
            .collect()
    }

    /// Max over layered v of |uncolored N(v) ∩ layers ≥ layer(v)|; the slice
    /// invariant demands this stays ≤ c_layer·log n.
    pub fn worst_upward_degree(&self, g: &MultiGraph, coloring: &PartialColoring) -> u64 {
        let mut worst = 0;
        for (&v, &l) in &self.layer {
            let cnt = g
                .neighbors(v)
                .filter(|&u| {
                    !coloring.is_colored(u)
                        && self.layer.get(&u).map(|&lu| lu >= l).unwrap_or(false)
                })
                .count() as u64;
            worst = worst.max(cnt);
        }
        worst
    }
}

/// Batch sampler: proposes an optional color per active vertex, charging its
/// own traffic on the engine. Iteration index is 1-based.
pub type BatchSampler<'s> = dyn FnMut(
        &mut Sim,
        &PartialColoring,
        &[VertexId],
        u32,
    ) -> Result<Vec<(VertexId, Option<Color>)>, TrialError>
    + 's;

/// Slice color: O(log log n) sampler iterations with halving thresholds.
/// A vertex freezes into layer i when its uncolored degree within S first
/// drops below d(v)/2^i; iteration survivors join the final layer. Frozen
/// vertices stop trying and are left to the caller's layered finish.
pub fn slice_color(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    s: &[VertexId],
    d: &dyn Fn(VertexId) -> u64,
    iterations: u32,
    sampler: &mut BatchSampler,
) -> Result<(LayerAssignment, u64), TrialError> {
    let mut rounds = 0;
    let mut layers = LayerAssignment::default();
    let sset: BTreeSet<VertexId> = s.iter().copied().collect();
    let mut active: Vec<VertexId> = s
        .iter()
        .copied()
        .filter(|&v| !coloring.is_colored(v))
        .collect();

    for i in 1..=iterations {
        if active.is_empty() {
            break;
        }
        // Freeze before trying: residual uncolored degree within S.
        let g = &sim.emb.h;
        let mut frozen = Vec::new();
        active.retain(|&v| {
            let res = g
                .neighbors(v)
                .filter(|u| sset.contains(u) && !coloring.is_colored(*u))
                .count() as u64;
            if res * (1 << i.min(60)) < d(v) {
                frozen.push(v);
                false
            } else {
                true
            }
        });
        for v in frozen {
            layers.layer.insert(v, i);
        }
        if active.is_empty() {
            break;
        }

        let proposals = sampler(sim, coloring, &active, i)?;
        let prop: BTreeMap<VertexId, u32> = proposals
            .iter()
            .filter_map(|&(v, c)| c.map(|c| (v, c.get())))
            .collect();
        let w = sim.color_bits();
        let bitems: Vec<(VertexId, u64)> = prop.keys().map(|&v| (v, w)).collect();
        rounds += sim.bcast(&bitems)?;

        let g = &sim.emb.h;
        let mut keep = Vec::new();
        for (&v, &c) in &prop {
            let mut ok = true;
            for u in g.neighbors(v) {
                if coloring.get(u) == Some(color(c)) || prop.get(&u) == Some(&c) {
                    ok = false;
                    break;
                }
            }
            if ok {
                keep.push((v, color(c)));
            }
        }
        let aitems: Vec<(VertexId, u64)> = prop.keys().map(|&v| (v, 1)).collect();
        rounds += sim.agg(&aitems)?;
        rounds += sim.commit(coloring, &keep)?;
        active.retain(|&v| !coloring.is_colored(v));
    }

    // Survivors of the final iteration form the last layer.
    let last = iterations + 1;
    for v in active {
        layers.layer.insert(v, last);
    }
    Ok((layers, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_identity;

    #[test]
    fn color_space_rank_select() {
        let cs = ColorSpace::range_minus(1, 6, [2, 5]);
        assert_eq!(cs.size(), 4);
        assert_eq!(cs.iter().collect::<Vec<_>>(), vec![1, 3, 4, 6]);
        assert_eq!(cs.nth(0), Some(1));
        assert_eq!(cs.nth(1), Some(3));
        assert_eq!(cs.nth(3), Some(6));
        assert_eq!(cs.nth(4), None);
        assert_eq!(cs.rank(1), 0);
        assert_eq!(cs.rank(4), 2);
        assert_eq!(cs.rank(7), 4);
        assert!(!cs.contains(5));
        assert!(cs.contains(6));
    }

    #[test]
    fn sample_distinct_uniform_support() {
        let cs = ColorSpace::range(1, 10);
        let mut rng = rng_from_scope(&[1]);
        for _ in 0..100 {
            let got = cs.sample_distinct(4, &mut rng);
            assert_eq!(got.len(), 4);
            let set: BTreeSet<u32> = got.iter().copied().collect();
            assert_eq!(set.len(), 4);
            assert!(got.iter().all(|&c| (1..=10).contains(&c)));
        }
    }

    #[test]
    fn palette_query_answers() {
        let used = BTreeSet::from([2, 5]);
        assert_eq!(
            answer_palette_query(&used, 6, PaletteQuery::SelectFree { a: 1, b: 6, i: 1 }),
            PaletteAnswer::Color(color(1))
        );
        assert_eq!(
            answer_palette_query(&used, 6, PaletteQuery::SelectFree { a: 1, b: 6, i: 3 }),
            PaletteAnswer::Color(color(4))
        );
        assert_eq!(
            answer_palette_query(&used, 6, PaletteQuery::CountFree { a: 1, b: 6 }),
            PaletteAnswer::Count(4)
        );
        assert_eq!(
            answer_palette_query(&used, 6, PaletteQuery::SelectFree { a: 1, b: 6, i: 5 }),
            PaletteAnswer::OutOfRange
        );
    }

    #[test]
    fn rct_k2_single_space() {
        // Two adjacent vertices forced onto one color: never both colored.
        let g = MultiGraph::from_edges(2, [(0, 1, 1)]).unwrap();
        let emb = build_identity(&g).unwrap();
        for seed in 0..20 {
            let mut net = emb.network(16, seed);
            let forest = emb.forest(&net).unwrap();
            let mut sim = Sim { net: &mut net, forest: &forest, emb: &emb };
            let mut col = PartialColoring::new(2);
            let out = random_color_trial(
                &mut sim,
                &mut col,
                &[0, 1],
                &|_| ColorSpace::range(1, 1),
                &[0],
            )
            .unwrap();
            assert!(out.colored.len() <= 1);
        }
    }

    #[test]
    fn mct_single_vertex() {
        let g = MultiGraph::from_edges(2, [(0, 1, 1)]).unwrap();
        let emb = build_identity(&g).unwrap();
        let mut net = emb.network(16, 3);
        let forest = emb.forest(&net).unwrap();
        let mut sim = Sim { net: &mut net, forest: &forest, emb: &emb };
        let mut col = PartialColoring::new(2);
        col.set(1, color(2));
        let out = multicolor_trial(
            &mut sim,
            &mut col,
            &[0],
            &|_| ColorSpace::range(1, 2),
            6,
            64,
            &[9],
        )
        .unwrap();
        assert!(matches!(out.verdict, MctVerdict::AllColored));
        assert_eq!(col.get(0), Some(color(1)));
    }
}
