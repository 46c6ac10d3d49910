//! Low-degree completion: colors every remaining vertex out of its
//! deg+1 palette once the dense stages are done. The machinery is built
//! around a range-splitting palette search that lets a vertex draw a
//! uniformly random *free* color over its support tree without ever
//! shipping the palette itself: a randomized knock-down stage, list
//! learning by parallel range splitting, a set-system auxiliary coloring,
//! and a shatter-then-schedule finish off the learned lists. Every step
//! charges honest traffic on the round engine.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use serde::Serialize;

use crate::acd::AcdParams;
use crate::multigraph::{color, Color, MultiGraph, PartialColoring, VertexId};
use crate::trials::{Sim, TrialError, TAG_LOWDEG};
use crate::util::{field_bits, next_prime_above};

pub const TAG_LINIAL: u64 = 0x4c_49_4e;
pub const TAG_SHATTER: u64 = 0x53_48_54;

const SCOPE_COIN: u64 = 0x43;
const SCOPE_SAMPLE: u64 = 0x58;

#[derive(Debug, thiserror::Error)]
pub enum LowDegError {
    #[error(transparent)]
    Trial(#[from] TrialError),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("set system: {0}")]
    SetSystem(String),
    #[error("finish: {0}")]
    Finish(String),
}

/// How many parts each range-splitting step probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchArity {
    /// Halve the range (default).
    Binary,
    /// Probe ~log_deg(v) n parts per step: wider per-step payload, fewer
    /// steps.
    LogAdaptive,
}

impl SearchArity {
    fn parts_for(self, g: &MultiGraph, v: VertexId) -> u32 {
        match self {
            SearchArity::Binary => 2,
            SearchArity::LogAdaptive => {
                let n = (g.num_vertices() as f64).max(2.0);
                let d = (g.pseudo_degree(v) as f64).max(2.0);
                (n.ln() / d.ln()).ceil().clamp(2.0, 16.0) as u32
            }
        }
    }
}

/// Tunables of the low-degree completion stage.
#[derive(Clone, Debug)]
pub struct LowDegParams {
    /// Degree bound the stage was promised (0 disables the check).
    pub delta_low: u64,
    /// Low/high split threshold: remaining degree vs ⌈split_c · log2 n⌉.
    pub split_c: f64,
    /// Knock-down iterations per log2 of the uncolored degree bound.
    pub reduction_c: f64,
    /// Shattering iterations per log2 of the part degree bound.
    pub shatter_c: f64,
    /// Leftover-component monitor: bound is c · Δ̄² · log2 n.
    pub comp_bound_c: f64,
    /// Range-search arity.
    pub arity: SearchArity,
    /// Learn whole palettes in one bitmap sweep instead of range splitting
    /// (meant for instances whose degree stays well under log n).
    pub fast_path: bool,
}

impl LowDegParams {
    pub fn base(delta_low: u64) -> LowDegParams {
        LowDegParams {
            delta_low,
            split_c: 4.0,
            reduction_c: 3.0,
            shatter_c: 3.0,
            comp_bound_c: 8.0,
            arity: SearchArity::Binary,
            fast_path: false,
        }
    }

    pub fn from_acd(acd: &AcdParams) -> LowDegParams {
        LowDegParams::base(acd.delta_low)
    }
}

// ---- palette-respecting sampling ------------------------------------------

/// Splits [lo, hi] into up to `k` contiguous parts, earlier parts taking the
/// ceiling share (the two-part case is exactly first-⌈size/2⌉ / rest).
fn split_parts(lo: u32, hi: u32, k: u32) -> Vec<(u32, u32)> {
    let size = hi - lo + 1;
    let k = k.max(2).min(size);
    let base = size / k;
    let rem = size % k;
    let mut parts = Vec::with_capacity(k as usize);
    let mut cur = lo;
    for i in 0..k {
        let w = base + u32::from(i < rem);
        parts.push((cur, cur + w - 1));
        cur += w;
    }
    debug_assert_eq!(cur, hi + 1);
    parts
}

/// Central mirror of one distributed palette search: walks the target rank
/// `x` down contiguous palette parts using only colored-edge counts, and
/// returns the landed color together with the number of split steps. The
/// map x ↦ color is injective over [uncolored-pseudo-degree + 1] and every
/// image color is free for `v`.
fn palette_walk(
    g: &MultiGraph,
    coloring: &PartialColoring,
    v: VertexId,
    mut x: u64,
    arity: u32,
) -> (u32, u32) {
    let pal = g.palette_size(v) as u32;
    let colored_in = |lo: u32, hi: u32| -> u64 {
        g.neighbors_with_mult(v)
            .iter()
            .filter_map(|&(u, m)| coloring.get(u).map(|c| (c.get(), m as u64)))
            .filter(|&(c, _)| c >= lo && c <= hi)
            .map(|(_, m)| m)
            .sum()
    };
    assert!(x >= 1 && x <= pal as u64, "rank {x} out of range at vertex {v}");
    let (mut lo, mut hi) = (1u32, pal);
    let mut steps = 0u32;
    while lo < hi {
        let size = (hi - lo + 1) as u64;
        assert!(x >= 1, "target rank must stay positive at vertex {v}");
        assert!(
            size >= x + colored_in(lo, hi),
            "range [{lo},{hi}] cannot hold rank {x} plus its colored edges at vertex {v}"
        );
        steps += 1;
        let mut descended = false;
        for (plo, phi) in split_parts(lo, hi, arity) {
            let psize = (phi - plo + 1) as u64;
            let q = colored_in(plo, phi);
            if q < psize && psize - q >= x {
                lo = plo;
                hi = phi;
                descended = true;
                break;
            }
            // x + q > psize because the branch above failed, so the new
            // rank stays >= 1
            x = x + q - psize;
        }
        assert!(descended, "the range invariant guarantees a feasible part");
    }
    assert_eq!(colored_in(lo, lo), 0, "landed color must be free");
    (lo, steps)
}

/// Colors landed by one batched sampling sweep, plus the rounds charged.
pub struct SampleOutcome {
    pub proposals: BTreeMap<VertexId, u32>,
    pub rounds: u64,
}

/// Draws, for every target in lockstep, a uniformly random free palette
/// color: each vertex picks a rank x uniform in [uncolored-pseudo-degree+1]
/// and the range search walks it to the x-th free color. One converge-cast
/// computes the uncolored degrees; each split step costs a range broadcast
/// plus a per-part colored-edge count converge-cast.
pub fn sample_free_colors(
    sim: &mut Sim,
    coloring: &PartialColoring,
    targets: &[VertexId],
    arity: SearchArity,
    scope: &[u64],
) -> Result<SampleOutcome, LowDegError> {
    if targets.is_empty() {
        return Ok(SampleOutcome { proposals: BTreeMap::new(), rounds: 0 });
    }
    let g = &sim.emb.h;
    let mut rounds = 0u64;
    let degw = field_bits(g.max_pseudo_degree() + 1);
    rounds += sim.agg(&targets.iter().map(|&v| (v, degw)).collect::<Vec<_>>())?;
    let mut walked: BTreeMap<VertexId, (u32, u32)> = BTreeMap::new();
    for &v in targets {
        assert!(!coloring.is_colored(v), "sampling for already-colored vertex {v}");
        let degc = coloring.uncolored_pseudo_degree(g, v);
        let mut words = vec![SCOPE_SAMPLE];
        words.extend_from_slice(scope);
        let mut rng = sim.vertex_rng(TAG_LOWDEG, &words, v);
        let x = rng.gen_range(1..=degc + 1);
        walked.insert(v, palette_walk(g, coloring, v, x, arity.parts_for(g, v)));
    }
    let max_steps = walked.values().map(|&(_, s)| s).max().unwrap_or(0);
    for t in 0..max_steps {
        let live: Vec<VertexId> =
            walked.iter().filter(|&(_, &(_, s))| s > t).map(|(&v, _)| v).collect();
        let mut bc = Vec::with_capacity(live.len());
        let mut ag = Vec::with_capacity(live.len());
        for &v in &live {
            let w = field_bits(g.palette_size(v) + 1);
            bc.push((v, 2 * w));
            ag.push((v, arity.parts_for(g, v) as u64 * w));
        }
        rounds += sim.bcast(&bc)?;
        rounds += sim.agg(&ag)?;
    }
    Ok(SampleOutcome {
        proposals: walked.into_iter().map(|(v, (c, _))| (v, c)).collect(),
        rounds,
    })
}

/// Single-vertex convenience wrapper around [`sample_free_colors`].
pub fn sample_free_color(
    sim: &mut Sim,
    coloring: &PartialColoring,
    v: VertexId,
    arity: SearchArity,
    scope: &[u64],
) -> Result<(Color, u64), LowDegError> {
    let out = sample_free_colors(sim, coloring, &[v], arity, scope)?;
    Ok((color(out.proposals[&v]), out.rounds))
}

// ---- randomized knock-down -------------------------------------------------

/// Progress log of the randomized knock-down stage.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub iterations: u32,
    pub colored: u64,
    pub rounds: u64,
}

/// Knocks the uncolored degree down: for Θ(log Δ̄) iterations every
/// uncolored vertex flips a fair coin, heads draw a uniform free color, and
/// a proposal sticks iff no higher-id neighbor drew the same color.
pub fn low_degree_reduction(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    params: &LowDegParams,
) -> Result<ReductionReport, LowDegError> {
    let g = &sim.emb.h;
    let dbar = g
        .vertices()
        .filter(|&v| !coloring.is_colored(v))
        .map(|v| g.neighbors(v).filter(|&u| !coloring.is_colored(u)).count() as u64)
        .max()
        .unwrap_or(0);
    let iterations = (params.reduction_c * ((dbar + 2) as f64).log2()).ceil() as u32;
    let mut rounds = 0u64;
    let mut colored = 0u64;
    let cw = sim.color_bits();
    for it in 0..iterations {
        let heads: Vec<VertexId> = g
            .vertices()
            .filter(|&v| !coloring.is_colored(v))
            .filter(|&v| {
                sim.vertex_rng(TAG_LOWDEG, &[SCOPE_COIN, it as u64], v).gen_bool(0.5)
            })
            .collect();
        if heads.is_empty() {
            continue;
        }
        let drawn = sample_free_colors(sim, coloring, &heads, params.arity, &[it as u64])?;
        rounds += drawn.rounds;
        rounds += sim.bcast(&heads.iter().map(|&v| (v, cw)).collect::<Vec<_>>())?;
        rounds += sim.agg(&heads.iter().map(|&v| (v, 1)).collect::<Vec<_>>())?;
        let keep: Vec<(VertexId, Color)> = heads
            .iter()
            .filter_map(|&v| {
                let c = drawn.proposals[&v];
                let beaten =
                    g.neighbors(v).any(|u| u > v && drawn.proposals.get(&u) == Some(&c));
                (!beaten).then(|| (v, color(c)))
            })
            .collect();
        rounds += sim.commit(coloring, &keep)?;
        colored += keep.len() as u64;
        if g.vertices().all(|v| coloring.is_colored(v)) {
            break;
        }
    }
    Ok(ReductionReport { iterations, colored, rounds })
}

/// Splits the uncolored vertices by remaining pseudo-degree at
/// ⌈split_c · log2 n⌉. Returns (low side, high side, threshold).
pub fn degree_split(
    g: &MultiGraph,
    coloring: &PartialColoring,
    split_c: f64,
) -> (Vec<VertexId>, Vec<VertexId>, u64) {
    let n = (g.num_vertices() as f64).max(2.0);
    let thr = (split_c * n.log2()).ceil() as u64;
    let mut low = Vec::new();
    let mut high = Vec::new();
    for v in g.vertices().filter(|&v| !coloring.is_colored(v)) {
        if coloring.uncolored_pseudo_degree(g, v) <= thr {
            low.push(v);
        } else {
            high.push(v);
        }
    }
    (low, high, thr)
}

// ---- list learning ---------------------------------------------------------

/// The number of new colors one growing sweep should learn for `v`, given
/// `have` already-known colors: enough to eventually exceed the uncolored
/// pseudo-degree by one, capped at ~log_deg(v) n per sweep.
fn growth_target(g: &MultiGraph, coloring: &PartialColoring, v: VertexId, have: u64) -> u64 {
    let degc = coloring.uncolored_pseudo_degree(g, v);
    if have > degc {
        return 0;
    }
    let n = (g.num_vertices() as f64).max(2.0);
    let d = (g.pseudo_degree(v) as f64).max(2.0);
    let cap = ((n.ln() / d.ln()).ceil() as u64).max(1);
    (degc + 1 - have).min(cap)
}

/// Central mirror of one list-growing call: drives a whole set of
/// (subrange, quota) pairs through binary splitting until every quota lands
/// on free colors. Returns the grown colors and the live-subrange count per
/// split iteration (for traffic accounting).
fn grow_walk(
    g: &MultiGraph,
    coloring: &PartialColoring,
    v: VertexId,
    d_v: &BTreeSet<u32>,
    x: u64,
) -> (Vec<u32>, Vec<usize>) {
    if x == 0 {
        return (Vec::new(), Vec::new());
    }
    let pal = g.palette_size(v) as u32;
    let held: BTreeSet<u32> =
        coloring.neighbor_colors(g, v).into_iter().map(|c| c.get()).collect();
    debug_assert!(held.is_disjoint(d_v), "known list colors must be free");
    // |[lo, hi] ∖ D_v|
    let size_in =
        |lo: u32, hi: u32| -> u64 { (hi - lo + 1) as u64 - d_v.range(lo..=hi).count() as u64 };
    // colored incident edges (with multiplicity) into [lo, hi]; list colors
    // are free, so the plain interval count is already exact
    let colored_in = |lo: u32, hi: u32| -> u64 {
        g.neighbors_with_mult(v)
            .iter()
            .filter_map(|&(u, m)| coloring.get(u).map(|c| (c.get(), m as u64)))
            .filter(|&(c, _)| c >= lo && c <= hi)
            .map(|(_, m)| m)
            .sum()
    };
    let held_in = |lo: u32, hi: u32| -> u64 { held.range(lo..=hi).count() as u64 };
    let mut ranges: Vec<(u32, u32, u64)> = vec![(1, pal, x)];
    let mut out: Vec<u32> = Vec::new();
    let mut widths: Vec<usize> = Vec::new();
    while (out.len() as u64) < x {
        debug_assert_eq!(
            out.len() as u64 + ranges.iter().map(|&(_, _, y)| y).sum::<u64>(),
            x,
            "subrange quotas must account for the whole growth target"
        );
        widths.push(ranges.len());
        let mut next: Vec<(u32, u32, u64)> = Vec::new();
        for &(lo, hi, y) in &ranges {
            let s = size_in(lo, hi);
            assert!(y >= 1 && s >= y, "subrange [{lo},{hi}] lost its quota {y}");
            assert!(
                s - held_in(lo, hi) >= y,
                "subrange [{lo},{hi}] holds fewer than {y} free colors"
            );
            if s == 1 {
                let c = (lo..=hi).find(|c| !d_v.contains(c)).expect("nonempty subrange");
                out.push(c);
                continue;
            }
            // split after the first ⌈s/2⌉ elements of [lo, hi] ∖ D_v
            let take = s.div_ceil(2);
            let mut seen = 0u64;
            let mut mid = lo;
            for c in lo..=hi {
                if !d_v.contains(&c) {
                    seen += 1;
                    if seen == take {
                        mid = c;
                        break;
                    }
                }
            }
            let s1 = take;
            let q1 = colored_in(lo, mid);
            if q1 >= s1 {
                // the first half is drowned in colored edges: the whole
                // quota carries into the second half
                next.push((mid + 1, hi, y));
            } else if s1 - q1 >= y {
                next.push((lo, mid, y));
            } else {
                let y1 = s1 - q1;
                next.push((lo, mid, y1));
                next.push((mid + 1, hi, y - y1));
            }
        }
        assert!(next.len() as u64 <= x, "live subranges must stay within the target");
        ranges = next;
        if ranges.is_empty() {
            break;
        }
    }
    assert_eq!(out.len() as u64, x, "the walk must land exactly its quota");
    (out, widths)
}

/// New colors learned per vertex by one growing sweep, plus rounds.
pub struct GrowOutcome {
    pub grown: BTreeMap<VertexId, Vec<u32>>,
    pub rounds: u64,
}

/// One list-growing sweep: every vertex ships its current list down its
/// tree, then binary range splitting drives a set of (subrange, quota)
/// pairs in parallel, converge-casting per-subrange colored-edge counts,
/// until each quota lands on free colors. The live split-set descriptor is
/// asserted to stay within O(log n) bits per step.
pub fn grow_palette(
    sim: &mut Sim,
    coloring: &PartialColoring,
    d_sets: &BTreeMap<VertexId, BTreeSet<u32>>,
) -> Result<GrowOutcome, LowDegError> {
    if d_sets.is_empty() {
        return Ok(GrowOutcome { grown: BTreeMap::new(), rounds: 0 });
    }
    let g = &sim.emb.h;
    let n = (g.num_vertices() as u64).max(2);
    let mut rounds = 0u64;
    let degw = field_bits(g.max_pseudo_degree() + 1);
    let mut bc0 = Vec::with_capacity(d_sets.len());
    let mut ag0 = Vec::with_capacity(d_sets.len());
    let mut walks: BTreeMap<VertexId, (Vec<u32>, Vec<usize>, u64)> = BTreeMap::new();
    for (&v, d_v) in d_sets {
        let w = field_bits(g.palette_size(v) + 1);
        bc0.push((v, (d_v.len() as u64).max(1) * w));
        ag0.push((v, degw));
        let x = growth_target(g, coloring, v, d_v.len() as u64);
        let (out, widths) = grow_walk(g, coloring, v, d_v, x);
        let desc = 2 * w + field_bits(x + 1);
        for &cnt in &widths {
            assert!(
                cnt as u64 * desc <= 16 * field_bits(n),
                "split-set descriptor ({} bits) exceeds the log n budget",
                cnt as u64 * desc
            );
        }
        walks.insert(v, (out, widths, desc));
    }
    rounds += sim.bcast(&bc0)?;
    rounds += sim.agg(&ag0)?;
    let max_iters = walks.values().map(|(_, w, _)| w.len()).max().unwrap_or(0);
    for t in 0..max_iters {
        let mut bc = Vec::new();
        let mut ag = Vec::new();
        for (&v, (_, widths, desc)) in &walks {
            if let Some(&cnt) = widths.get(t) {
                let w = field_bits(g.palette_size(v) + 1);
                bc.push((v, cnt as u64 * *desc));
                ag.push((v, cnt as u64 * w));
            }
        }
        rounds += sim.bcast(&bc)?;
        rounds += sim.agg(&ag)?;
    }
    Ok(GrowOutcome {
        grown: walks.into_iter().map(|(v, (out, _, _))| (v, out)).collect(),
        rounds,
    })
}

/// Single-vertex convenience wrapper around [`grow_palette`].
pub fn grow_palette_one(
    sim: &mut Sim,
    coloring: &PartialColoring,
    v: VertexId,
    d_v: &BTreeSet<u32>,
) -> Result<(Vec<u32>, u64), LowDegError> {
    let mut m = BTreeMap::new();
    m.insert(v, d_v.clone());
    let out = grow_palette(sim, coloring, &m)?;
    Ok((out.grown.into_values().next().unwrap_or_default(), out.rounds))
}

/// Learned lists per vertex with the traffic spent learning them.
pub struct LearnOutcome {
    pub lists: BTreeMap<VertexId, BTreeSet<u32>>,
    pub rounds: u64,
    pub grow_calls: u32,
}

/// Grows every target's free-color list until it holds
/// min(Δ̄, uncolored-pseudo-degree) + 1 colors.
pub fn learn_palette(
    sim: &mut Sim,
    coloring: &PartialColoring,
    targets: &[VertexId],
    dbar: u64,
) -> Result<LearnOutcome, LowDegError> {
    let g = &sim.emb.h;
    let mut lists: BTreeMap<VertexId, BTreeSet<u32>> =
        targets.iter().map(|&v| (v, BTreeSet::new())).collect();
    let mut rounds = 0u64;
    let mut grow_calls = 0u32;
    loop {
        let pending: BTreeMap<VertexId, BTreeSet<u32>> = lists
            .iter()
            .filter(|(&v, d)| {
                let goal = dbar.min(coloring.uncolored_pseudo_degree(g, v)) + 1;
                (d.len() as u64) < goal
            })
            .map(|(&v, d)| (v, d.clone()))
            .collect();
        if pending.is_empty() {
            break;
        }
        let got = grow_palette(sim, coloring, &pending)?;
        grow_calls += 1;
        rounds += got.rounds;
        for (v, r) in got.grown {
            assert!(!r.is_empty(), "a pending vertex must learn at least one color");
            let d = lists.get_mut(&v).unwrap();
            for c in r {
                assert!(d.insert(c), "grown colors must be new");
            }
        }
    }
    for (&v, d) in &lists {
        let goal = dbar.min(coloring.uncolored_pseudo_degree(g, v)) + 1;
        assert!(d.len() as u64 >= goal, "list of {v} fell short of its goal {goal}");
        let held = coloring.neighbor_colors(g, v);
        for &c in d.iter() {
            assert!(c as u64 <= g.palette_size(v), "list color {c} out of range");
            assert!(!held.contains(&color(c)), "learned color {c} is not free for {v}");
        }
    }
    Ok(LearnOutcome { lists, rounds, grow_calls })
}

// ---- set-system auxiliary coloring ----------------------------------------

/// Picks (q, d): the smallest prime field size admitting degree-d
/// polynomial sets that (a) survive `delta` neighbors (q ≥ delta·d + 1)
/// and (b) cover the current color space (q^{d+1} ≥ m).
fn phase_system(delta: u64, m: u64, q_cap: u64) -> Result<(u64, u64), LowDegError> {
    let delta = delta.max(1);
    let mut q = next_prime_above(delta);
    loop {
        if q > q_cap {
            return Err(LowDegError::SetSystem(format!(
                "no prime field up to {q_cap} covers space {m} against degree {delta}"
            )));
        }
        let dmax = (q - 1) / delta;
        let mut d = 1u64;
        let mut pw = q.checked_mul(q);
        while d <= dmax {
            let covers = match pw {
                Some(p) => p >= m,
                None => true,
            };
            if covers {
                return Ok((q, d));
            }
            d += 1;
            pw = pw.and_then(|p| p.checked_mul(q));
        }
        q = next_prime_above(q);
    }
}

/// The q-point set of color `c`: evaluations of c's base-q digit polynomial
/// over F_q, encoded as i·q + p(i). Distinct colors share at most d points.
fn poly_set(c: u64, q: u64, d: u64) -> Vec<u64> {
    (0..q)
        .map(|i| {
            let mut acc = 0u64;
            let mut pow = 1u64;
            let mut digits = c;
            for _ in 0..=d {
                acc = (acc + (digits % q) * pow) % q;
                digits /= q;
                pow = (pow * i) % q;
            }
            i * q + acc
        })
        .collect()
}

/// Auxiliary coloring produced by iterated set-system compression.
#[derive(Clone, Debug, Serialize)]
pub struct LinialOutcome {
    pub aux: BTreeMap<VertexId, u64>,
    pub space: u64,
    pub phases: u32,
    pub rounds: u64,
}

/// Computes a proper auxiliary coloring of `targets` (over the H edges
/// between them) with poly(max-degree) colors. Each phase maps the current
/// color to a q-point polynomial set and binary-searches a point that no
/// neighbor's set contains, descending by aggregated intersection counts;
/// the space shrinks to q² per phase until it stops improving.
pub fn linial_virtual(sim: &mut Sim, targets: &[VertexId]) -> Result<LinialOutcome, LowDegError> {
    let g = &sim.emb.h;
    let n = (g.num_vertices() as u64).max(2);
    if targets.is_empty() {
        return Ok(LinialOutcome { aux: BTreeMap::new(), space: 0, phases: 0, rounds: 0 });
    }
    let tset: BTreeSet<VertexId> = targets.iter().copied().collect();
    assert_eq!(tset.len(), targets.len(), "targets must be distinct");
    let nbrs: BTreeMap<VertexId, Vec<VertexId>> = targets
        .iter()
        .map(|&v| (v, g.neighbors(v).filter(|u| tset.contains(u)).collect::<Vec<_>>()))
        .collect();
    let delta = nbrs.values().map(|x| x.len() as u64).max().unwrap_or(0);
    let mut aux: BTreeMap<VertexId, u64> = targets.iter().map(|&v| (v, v as u64)).collect();
    let mut space = n;
    let mut phases = 0u32;
    let mut rounds = 0u64;
    loop {
        let cap = 8 * (delta + 2) * field_bits(space.max(2)) + 16;
        let (q, d) = match phase_system(delta, space, cap) {
            Ok(p) => p,
            // one retry with a wider field search before giving up
            Err(_) => phase_system(delta, space, cap.saturating_mul(64))?,
        };
        let next_space = q * q;
        if next_space >= space {
            break;
        }
        phases += 1;
        assert!(phases <= 64, "compression must reach its fixpoint quickly");
        // everyone ships its current aux color to its edge handlers
        rounds +=
            sim.bcast(&targets.iter().map(|&v| (v, field_bits(space))).collect::<Vec<_>>())?;
        let sets: BTreeMap<VertexId, Vec<u64>> =
            aux.iter().map(|(&v, &c)| (v, poly_set(c, q, d))).collect();
        let mut new_aux: BTreeMap<VertexId, u64> = BTreeMap::new();
        let mut steps_of: BTreeMap<VertexId, u32> = BTreeMap::new();
        for &v in targets {
            let own = &sets[&v];
            let nbsets: Vec<&Vec<u64>> = nbrs[&v].iter().map(|u| &sets[u]).collect();
            let count_in = |a: usize, b: usize| -> u64 {
                let seg = &own[a..b];
                nbsets
                    .iter()
                    .map(|s| s.iter().filter(|e| seg.binary_search(e).is_ok()).count() as u64)
                    .sum()
            };
            let (mut a, mut b) = (0usize, own.len());
            let mut steps = 0u32;
            while b - a > 1 {
                steps += 1;
                let h = (b - a + 1) / 2;
                let c1 = count_in(a, a + h);
                if c1 < h as u64 {
                    b = a + h;
                } else {
                    assert!(
                        count_in(a + h, b) < (b - a - h) as u64,
                        "cover-free property violated during descent at vertex {v}"
                    );
                    a += h;
                }
            }
            assert_eq!(count_in(a, b), 0, "landed point must avoid all neighbor sets");
            new_aux.insert(v, own[a]);
            steps_of.insert(v, steps);
        }
        // lockstep traffic: per descent step one range broadcast and one
        // aggregated intersection count
        let cntw = field_bits(delta * d + 2);
        let max_steps = steps_of.values().copied().max().unwrap_or(0);
        for t in 0..max_steps {
            let live: Vec<VertexId> =
                steps_of.iter().filter(|&(_, &s)| s > t).map(|(&v, _)| v).collect();
            rounds += sim
                .bcast(&live.iter().map(|&v| (v, 2 * field_bits(next_space))).collect::<Vec<_>>())?;
            rounds += sim.agg(&live.iter().map(|&v| (v, cntw)).collect::<Vec<_>>())?;
        }
        for (&v, us) in &nbrs {
            for u in us {
                assert_ne!(new_aux[&v], new_aux[u], "phase output must stay proper");
            }
        }
        aux = new_aux;
        space = next_space;
    }
    Ok(LinialOutcome { aux, space, phases, rounds })
}

// ---- finishing -------------------------------------------------------------

/// Size of the largest connected component of H restricted to `verts`.
fn largest_component(g: &MultiGraph, verts: &[VertexId]) -> usize {
    let vset: BTreeSet<VertexId> = verts.iter().copied().collect();
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let mut best = 0;
    for &s in verts {
        if seen.contains(&s) {
            continue;
        }
        let mut queue = VecDeque::from([s]);
        seen.insert(s);
        let mut size = 0usize;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for u in g.neighbors(v) {
                if vset.contains(&u) && seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        best = best.max(size);
    }
    best
}

/// Outcome of the shatter-then-schedule completion of one part.
#[derive(Clone, Debug, Serialize)]
pub struct FinishReport {
    pub part_size: usize,
    pub aux_space: u64,
    pub aux_phases: u32,
    pub shatter_iterations: u32,
    pub shatter_colored: u64,
    pub max_component: usize,
    pub component_bound: usize,
    pub schedule_classes: u32,
    pub rounds: u64,
    pub flags: Vec<String>,
}

/// Finishes a part off its learned lists: an auxiliary set-system coloring,
/// Θ(log Δ̄) random list trials that shatter the part into small
/// components, then a deterministic sweep in which each auxiliary class
/// simultaneously adopts its lowest still-free list color.
pub fn finish_components(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    part: &[VertexId],
    lists: &BTreeMap<VertexId, BTreeSet<u32>>,
    dbar: u64,
    params: &LowDegParams,
) -> Result<FinishReport, LowDegError> {
    let g = &sim.emb.h;
    let n = (g.num_vertices() as f64).max(2.0);
    let mut flags = Vec::new();
    let mut rounds = 0u64;
    let uncol: Vec<VertexId> =
        part.iter().copied().filter(|&v| !coloring.is_colored(v)).collect();
    // live lists: learned colors minus anything a neighbor holds by now
    let mut live: BTreeMap<VertexId, BTreeSet<u32>> = uncol
        .iter()
        .map(|&v| {
            let held: BTreeSet<u32> =
                coloring.neighbor_colors(g, v).into_iter().map(|c| c.get()).collect();
            let l: BTreeSet<u32> =
                lists[&v].iter().copied().filter(|c| !held.contains(c)).collect();
            (v, l)
        })
        .collect();
    let li = linial_virtual(sim, &uncol)?;
    rounds += li.rounds;
    // shattering: random trials straight off the lists
    let iterations = (params.shatter_c * ((dbar + 2) as f64).log2()).ceil() as u32;
    let cw = sim.color_bits();
    let mut shatter_colored = 0u64;
    for it in 0..iterations {
        let alive: Vec<VertexId> =
            uncol.iter().copied().filter(|&v| !coloring.is_colored(v)).collect();
        if alive.is_empty() {
            break;
        }
        let mut prop: BTreeMap<VertexId, u32> = BTreeMap::new();
        for &v in &alive {
            let l = &live[&v];
            assert!(!l.is_empty(), "live list of {v} drained below its slack");
            let mut rng = sim.vertex_rng(TAG_SHATTER, &[it as u64], v);
            let pick = rng.gen_range(0..l.len());
            prop.insert(v, *l.iter().nth(pick).unwrap());
        }
        rounds += sim.bcast(&alive.iter().map(|&v| (v, cw)).collect::<Vec<_>>())?;
        rounds += sim.agg(&alive.iter().map(|&v| (v, 1)).collect::<Vec<_>>())?;
        let keep: Vec<(VertexId, Color)> = alive
            .iter()
            .filter_map(|&v| {
                let c = prop[&v];
                let clash = g.neighbors(v).any(|u| prop.get(&u) == Some(&c));
                (!clash).then(|| (v, color(c)))
            })
            .collect();
        rounds += sim.commit(coloring, &keep)?;
        shatter_colored += keep.len() as u64;
        for &(v, c) in &keep {
            live.remove(&v);
            for u in g.neighbors(v) {
                if let Some(l) = live.get_mut(&u) {
                    l.remove(&c.get());
                }
            }
        }
    }
    // component monitor on the leftover
    let leftover: Vec<VertexId> =
        uncol.iter().copied().filter(|&v| !coloring.is_colored(v)).collect();
    let max_component = largest_component(g, &leftover);
    let component_bound =
        (params.comp_bound_c * (dbar.max(2) as f64).powi(2) * n.log2()).ceil() as usize;
    if max_component > component_bound {
        flags.push(format!(
            "shatter left a component of {max_component} > bound {component_bound}"
        ));
    }
    // deterministic sweep over the auxiliary classes that actually occur;
    // same-class vertices are pairwise non-adjacent, so each class commits
    // in one simultaneous step
    let mut schedule_classes = 0u32;
    let classes: BTreeSet<u64> = leftover.iter().map(|&v| li.aux[&v]).collect();
    for cls in classes {
        let members: Vec<VertexId> = leftover
            .iter()
            .copied()
            .filter(|&v| !coloring.is_colored(v) && li.aux[&v] == cls)
            .collect();
        if members.is_empty() {
            continue;
        }
        schedule_classes += 1;
        let assign: Vec<(VertexId, Color)> = members
            .iter()
            .map(|&v| {
                let c = *live[&v].iter().next().ok_or_else(|| {
                    LowDegError::Finish(format!("vertex {v} ran out of list colors"))
                })?;
                Ok((v, color(c)))
            })
            .collect::<Result<_, LowDegError>>()?;
        rounds += sim.bcast(&members.iter().map(|&v| (v, cw)).collect::<Vec<_>>())?;
        rounds += sim.agg(&members.iter().map(|&v| (v, 1)).collect::<Vec<_>>())?;
        rounds += sim.commit(coloring, &assign)?;
        for &(v, c) in &assign {
            live.remove(&v);
            for u in g.neighbors(v) {
                if let Some(l) = live.get_mut(&u) {
                    l.remove(&c.get());
                }
            }
        }
    }
    for &v in part {
        if !coloring.is_colored(v) {
            return Err(LowDegError::Finish(format!("vertex {v} left uncolored")));
        }
    }
    Ok(FinishReport {
        part_size: part.len(),
        aux_space: li.space,
        aux_phases: li.phases,
        shatter_iterations: iterations,
        shatter_colored,
        max_component,
        component_bound,
        schedule_classes,
        rounds,
        flags,
    })
}

// ---- orchestration ---------------------------------------------------------

/// Per-part progress of the low-degree completion.
#[derive(Clone, Debug, Serialize)]
pub struct PartReport {
    pub part: String,
    pub size: usize,
    pub dbar: u64,
    pub internal_degree: u64,
    pub learn_rounds: u64,
    pub grow_calls: u32,
    pub min_list: usize,
    pub finish: FinishReport,
}

/// Full log of one low-degree completion run.
#[derive(Clone, Debug, Serialize)]
pub struct LowDegLog {
    pub rounds: u64,
    pub reduction: ReductionReport,
    pub split_threshold: u64,
    pub parts: Vec<PartReport>,
    pub flags: Vec<String>,
}

impl LowDegLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("log serializes")
    }
}

/// Colors every remaining uncolored vertex out of its deg+1 palette: the
/// randomized knock-down, then a low/high split by remaining degree, each
/// side in sequence learning free-color lists and finishing off them.
pub fn color_low_degree(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    params: &LowDegParams,
) -> Result<LowDegLog, LowDegError> {
    let g = &sim.emb.h;
    let n = (g.num_vertices() as f64).max(2.0);
    let mut flags = Vec::new();
    if params.delta_low > 0 {
        let worst = g
            .vertices()
            .filter(|&v| !coloring.is_colored(v))
            .map(|v| g.pseudo_degree(v))
            .max()
            .unwrap_or(0);
        if worst > 2 * params.delta_low {
            return Err(LowDegError::Precondition(format!(
                "uncolored pseudo-degree {worst} exceeds twice the low-degree bound {}",
                params.delta_low
            )));
        }
    }
    if params.fast_path {
        let fast_bound = (4.0 * n.log2() / n.log2().log2().max(1.0)).ceil() as u64;
        if params.delta_low == 0 || params.delta_low > fast_bound {
            flags.push(format!("fast path engaged above its degree threshold {fast_bound}"));
        }
    }
    let reduction = low_degree_reduction(sim, coloring, params)?;
    let mut rounds = reduction.rounds;
    let (lowside, highside, split_threshold) = degree_split(g, coloring, params.split_c);
    let mut parts = Vec::new();
    for (name, members) in [("low", lowside), ("high", highside)] {
        let alive: Vec<VertexId> =
            members.iter().copied().filter(|&v| !coloring.is_colored(v)).collect();
        if alive.is_empty() {
            continue;
        }
        let dbar = alive
            .iter()
            .map(|&v| g.neighbors(v).filter(|&u| !coloring.is_colored(u)).count() as u64)
            .max()
            .unwrap_or(0);
        let aset: BTreeSet<VertexId> = alive.iter().copied().collect();
        let internal = alive
            .iter()
            .map(|&v| g.neighbors(v).filter(|u| aset.contains(u)).count() as u64)
            .max()
            .unwrap_or(0);
        if name == "high" && internal > split_threshold {
            flags.push(format!(
                "high side internal degree {internal} exceeds the split threshold {split_threshold}"
            ));
        }
        let (lists, learn_rounds, grow_calls) = if params.fast_path {
            // narrow palettes: ship the taken-color bitmap in one sweep
            let items: Vec<(VertexId, u64)> =
                alive.iter().map(|&v| (v, g.palette_size(v))).collect();
            let mut r = sim.agg(&items)?;
            r += sim.bcast(&items)?;
            let lists: BTreeMap<VertexId, BTreeSet<u32>> = alive
                .iter()
                .map(|&v| (v, coloring.palette(g, v).into_iter().map(|c| c.get()).collect()))
                .collect();
            (lists, r, 0)
        } else {
            let lp = learn_palette(sim, coloring, &alive, dbar)?;
            (lp.lists, lp.rounds, lp.grow_calls)
        };
        let min_list = lists.values().map(|l| l.len()).min().unwrap_or(0);
        let finish = finish_components(sim, coloring, &alive, &lists, dbar, params)?;
        rounds += learn_rounds + finish.rounds;
        parts.push(PartReport {
            part: name.to_string(),
            size: alive.len(),
            dbar,
            internal_degree: internal,
            learn_rounds,
            grow_calls,
            min_list,
            finish,
        });
    }
    for v in g.vertices() {
        if !coloring.is_colored(v) {
            return Err(LowDegError::Finish(format!("vertex {v} left uncolored")));
        }
    }
    Ok(LowDegLog { rounds, reduction, split_threshold, parts, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_identity;
    use crate::multigraph::verify_coloring;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_sim<T>(
        g: &MultiGraph,
        f: impl FnOnce(&mut Sim, &mut PartialColoring) -> T,
    ) -> (T, PartialColoring) {
        let emb = build_identity(g).unwrap();
        let mut net = emb.network(4096, 7);
        let forest = emb.forest(&net).unwrap();
        let mut sim = Sim { net: &mut net, forest: &forest, emb: &emb };
        let mut coloring = PartialColoring::new(g.num_vertices());
        let out = f(&mut sim, &mut coloring);
        (out, coloring)
    }

    fn star(leaves: u32) -> MultiGraph {
        MultiGraph::from_edges(leaves as usize + 1, (1..=leaves).map(|i| (0, i, 1))).unwrap()
    }

    fn cycle(n: usize) -> MultiGraph {
        MultiGraph::from_edges(n, (0..n).map(|i| (i as u32, ((i + 1) % n) as u32, 1))).unwrap()
    }

    fn circulant(n: usize, k: u32) -> MultiGraph {
        let mut edges = Vec::new();
        for i in 0..n as u32 {
            for off in 1..=k {
                edges.push((i, (i + off) % n as u32, 1));
            }
        }
        MultiGraph::from_edges(n, edges).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> MultiGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.gen_bool(p) {
                    edges.push((u, v, 1));
                }
            }
        }
        MultiGraph::from_edges(n, edges).unwrap()
    }

    fn random_partial(g: &MultiGraph, frac: f64, seed: u64) -> PartialColoring {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut col = PartialColoring::new(g.num_vertices());
        for v in g.vertices() {
            if rng.gen_bool(frac) {
                let pal = col.palette(g, v);
                if !pal.is_empty() {
                    col.set(v, pal[rng.gen_range(0..pal.len())]);
                }
            }
        }
        col
    }

    #[test]
    fn sampling_image_is_exactly_the_palette() {
        let g = star(3);
        let coloring = PartialColoring::new(4);
        let got: BTreeSet<u32> =
            (1..=4).map(|x| palette_walk(&g, &coloring, 0, x, 2).0).collect();
        assert_eq!(got, BTreeSet::from([1, 2, 3, 4]));
    }

    #[test]
    fn sampling_skips_neighbor_held_colors() {
        let g = star(3);
        let mut coloring = PartialColoring::new(4);
        coloring.set(1, color(2));
        let got: BTreeSet<u32> =
            (1..=3).map(|x| palette_walk(&g, &coloring, 0, x, 2).0).collect();
        assert_eq!(got, BTreeSet::from([1, 3, 4]));
    }

    #[test]
    fn sampling_counts_parallel_edges() {
        // 0-1 doubled, 0-2 single; vertex 1 takes color 2, wiping the whole
        // first half of 0's palette under multiplicity counting
        let g = MultiGraph::from_edges(3, [(0, 1, 2), (0, 2, 1)]).unwrap();
        let mut coloring = PartialColoring::new(3);
        coloring.set(1, color(2));
        let got: BTreeSet<u32> =
            (1..=2).map(|x| palette_walk(&g, &coloring, 0, x, 2).0).collect();
        assert_eq!(got, BTreeSet::from([3, 4]));
    }

    #[test]
    fn sampling_is_injective_on_random_instances() {
        let mut instances = 0u32;
        for gi in 0..8 {
            let g = random_graph(36, 0.12, 100 + gi);
            let coloring = random_partial(&g, 0.45, 200 + gi);
            for v in g.vertices().filter(|&v| !coloring.is_colored(v)) {
                let degc = coloring.uncolored_pseudo_degree(&g, v);
                for arity in [2u32, 4] {
                    let mut seen = BTreeSet::new();
                    for x in 1..=degc + 1 {
                        let (c, _) = palette_walk(&g, &coloring, v, x, arity);
                        assert!(seen.insert(c), "walk must be injective in the rank");
                        assert!(c as u64 <= g.palette_size(v));
                        assert!(!coloring.neighbor_colors(&g, v).contains(&color(c)));
                        instances += 1;
                    }
                }
            }
        }
        assert!(instances >= 500, "only {instances} instances exercised");
    }

    #[test]
    fn sampling_uniformity_chi_square() {
        let g = star(3);
        let mut counts = BTreeMap::new();
        let ((), _) = with_sim(&g, |sim, coloring| {
            for i in 0..20_000u64 {
                let out =
                    sample_free_colors(sim, coloring, &[0], SearchArity::Binary, &[i]).unwrap();
                *counts.entry(out.proposals[&0]).or_insert(0u64) += 1;
            }
        });
        assert_eq!(counts.len(), 4);
        let expect = 20_000.0 / 4.0;
        let chi2: f64 =
            counts.values().map(|&o| (o as f64 - expect).powi(2) / expect).sum();
        // df = 3, p = 0.001
        assert!(chi2 < 16.27, "chi-square {chi2:.2} too large: {counts:?}");
    }

    #[test]
    fn reduction_knocks_down_a_cycle() {
        let g = cycle(200);
        let (report, coloring) = with_sim(&g, |sim, coloring| {
            low_degree_reduction(sim, coloring, &LowDegParams::base(2)).unwrap()
        });
        assert_eq!(report.iterations, 6);
        assert!(report.colored >= 100, "only {} colored", report.colored);
        assert!(verify_coloring(&g, &coloring, false).pass());
        assert!(report.rounds > 0);
    }

    #[test]
    fn split_respects_threshold() {
        let g = star(100);
        let coloring = PartialColoring::new(101);
        let (low, high, thr) = degree_split(&g, &coloring, 4.0);
        assert_eq!(thr, 27);
        assert_eq!(high, vec![0]);
        assert_eq!(low.len(), 100);
    }

    #[test]
    fn growth_trace_from_partial_list() {
        // center 0 with seven neighbors; neighbors 1 and 2 get padding
        // edges so colors 3 and 6 sit inside their own palettes
        let mut edges: Vec<(u32, u32, u32)> = (1..=7).map(|i| (0, i, 1)).collect();
        edges.extend([(1, 8, 1), (1, 9, 1)]);
        edges.extend((10..=14).map(|i| (2, i, 1)));
        let g = MultiGraph::from_edges(15, edges).unwrap();
        let (out, _) = with_sim(&g, |sim, coloring| {
            sim.commit(coloring, &[(1, color(3)), (2, color(6))]).unwrap();
            let d: BTreeSet<u32> = BTreeSet::from([1]);
            grow_palette_one(sim, coloring, 0, &d).unwrap()
        });
        let (grown, _) = out;
        assert_eq!(grown.len(), 2, "target is min(5+1-1, 2) = 2: got {grown:?}");
        let allowed = BTreeSet::from([2u32, 4, 5, 7, 8]);
        for c in &grown {
            assert!(allowed.contains(c), "grown color {c} not free or not new");
        }
    }

    #[test]
    fn growth_target_zero_gives_empty() {
        let g = star(3);
        let (out, _) = with_sim(&g, |sim, coloring| {
            let d: BTreeSet<u32> = BTreeSet::from([1, 2, 3, 4]);
            grow_palette_one(sim, coloring, 0, &d).unwrap()
        });
        assert!(out.0.is_empty());
    }

    #[test]
    fn learned_lists_cover_the_uncolored_neighborhood() {
        let g = random_graph(60, 0.1, 5);
        let pre = random_partial(&g, 0.4, 6);
        let targets: Vec<VertexId> =
            g.vertices().filter(|&v| !pre.is_colored(v)).collect();
        let dbar = targets
            .iter()
            .map(|&v| g.neighbors(v).filter(|&u| !pre.is_colored(u)).count() as u64)
            .max()
            .unwrap();
        let (outcome, _) = with_sim(&g, |sim, coloring| {
            for v in g.vertices() {
                if let Some(c) = pre.get(v) {
                    sim.commit(coloring, &[(v, c)]).unwrap();
                }
            }
            learn_palette(sim, coloring, &targets, dbar).unwrap()
        });
        for &v in &targets {
            let l = &outcome.lists[&v];
            let distinct_uncolored =
                g.neighbors(v).filter(|&u| !pre.is_colored(u)).count();
            assert!(
                l.len() > distinct_uncolored,
                "list of {v} ({}) no larger than its uncolored neighborhood",
                l.len()
            );
        }
        assert!(outcome.grow_calls >= 1);
        assert!(outcome.rounds > 0);
    }

    #[test]
    fn aux_coloring_is_proper_and_compressed() {
        let g = cycle(64);
        let targets: Vec<VertexId> = g.vertices().collect();
        let (out, _) = with_sim(&g, |sim, _| linial_virtual(sim, &targets).unwrap());
        assert_eq!(out.aux.len(), 64);
        assert!(out.phases >= 1);
        assert!(out.space <= 256, "space {} not poly in the degree", out.space);
        for (u, v, _) in g.edge_pairs() {
            assert_ne!(out.aux[&u], out.aux[&v]);
        }
        assert!(out.rounds > 0);
    }

    #[test]
    fn aux_coloring_handles_singleton() {
        let g = cycle(64);
        let (out, _) = with_sim(&g, |sim, _| linial_virtual(sim, &[5]).unwrap());
        assert_eq!(out.aux.len(), 1);
        assert!(out.space <= 256);
    }

    #[test]
    fn finish_colors_a_part_completely() {
        let g = random_graph(80, 0.08, 9);
        let part: Vec<VertexId> = g.vertices().collect();
        let dbar = part.iter().map(|&v| g.degree(v) as u64).max().unwrap();
        let params = LowDegParams::base(0);
        let (report, coloring) = with_sim(&g, |sim, coloring| {
            let lp = learn_palette(sim, coloring, &part, dbar).unwrap();
            finish_components(sim, coloring, &part, &lp.lists, dbar, &params).unwrap()
        });
        assert!(verify_coloring(&g, &coloring, true).pass());
        assert_eq!(report.part_size, 80);
        assert!(report.max_component <= report.component_bound, "{report:?}");
        assert!(report.flags.is_empty(), "{:?}", report.flags);
    }

    #[test]
    fn low_degree_end_to_end_is_total_and_proper() {
        let g = circulant(300, 4);
        let (log, coloring) = with_sim(&g, |sim, coloring| {
            color_low_degree(sim, coloring, &LowDegParams::base(8)).unwrap()
        });
        assert!(verify_coloring(&g, &coloring, true).pass());
        assert_eq!(log.parts.len(), 1, "everything sits under the split threshold");
        assert_eq!(log.parts[0].part, "low");
        assert!(log.rounds > 0);
        assert!(log.flags.is_empty(), "{:?}", log.flags);
    }

    #[test]
    fn low_degree_fast_path_is_total() {
        let g = circulant(300, 4);
        let mut params = LowDegParams::base(8);
        params.fast_path = true;
        let (log, coloring) =
            with_sim(&g, |sim, coloring| color_low_degree(sim, coloring, &params).unwrap());
        assert!(verify_coloring(&g, &coloring, true).pass());
        assert!(log.flags.is_empty(), "{:?}", log.flags);
    }

    #[test]
    fn colored_input_is_identity() {
        let g = cycle(12);
        let (log, coloring) = with_sim(&g, |sim, coloring| {
            let pre: Vec<(VertexId, Color)> =
                g.vertices().map(|v| (v, color(1 + (v % 2)))).collect();
            sim.commit(coloring, &pre).unwrap();
            let before = sim.net.rounds();
            let log = color_low_degree(sim, coloring, &LowDegParams::base(2)).unwrap();
            assert_eq!(sim.net.rounds(), before, "no traffic on a finished instance");
            log
        });
        assert_eq!(log.reduction.colored, 0);
        assert!(log.parts.is_empty());
        assert!(verify_coloring(&g, &coloring, true).pass());
    }

    #[test]
    fn hub_graph_completes_under_default_split() {
        let g = star(100);
        let (log, coloring) = with_sim(&g, |sim, coloring| {
            color_low_degree(sim, coloring, &LowDegParams::base(0)).unwrap()
        });
        assert!(verify_coloring(&g, &coloring, true).pass());
        assert!(log.rounds > 0);
    }
}
