//! Almost-clique decomposition: partition the virtual graph into low-degree,
//! inaccurate, sparse (star) and dense vertices, with the dense part split
//! into almost-cliques. Detection runs over the round engine in one of two
//! estimator modes — exact census (neighbor bitmaps shipped over support
//! trees) or cardinality fingerprints — and a pure centralized checker
//! validates every clause of the decomposition contract, reporting the
//! empirical slack ratios used to calibrate the unspecified constants.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::multigraph::{MultiGraph, VertexId};
use crate::netsim::NetError;
use crate::sketches::{
    approx_predicate_neighbors, encode_fingerprint, estimate_cardinality, fingerprint_leaf,
    CardEstimate, Fingerprint,
};
use crate::trials::{CliqueComms, Sim, TrialError};
use crate::util::{field_bits, rat, Rat};

pub const TAG_ACD: u64 = 0x41_43_44;

#[derive(Debug, thiserror::Error)]
pub enum AcdError {
    #[error("trial: {0}")]
    Trial(#[from] TrialError),
    #[error("net: {0}")]
    Net(#[from] NetError),
    #[error("degree estimate unavailable for vertex {0}")]
    EstimateUnavailable(VertexId),
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

/// How distinct-neighbor cardinalities are obtained during detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorMode {
    /// Ship full neighbor bitmaps (one bit per vertex id) over the trees.
    /// Exact, but costs n bits per participating vertex per census.
    ExactCensus,
    /// Ship max-combinable geometric fingerprints with `t` repetitions.
    Fingerprint { t: usize },
}

#[derive(Clone, Debug)]
pub struct AcdParams {
    /// Density parameter of the decomposition (anti-degree / external-degree
    /// budgets are fractions of it).
    pub epsilon: Rat,
    /// Detection scale for the balance / friendliness / accuracy tests.
    /// Defaults to epsilon/100; override to decouple detection resolution
    /// from the output guarantee at small scale.
    pub theta_override: Option<Rat>,
    /// Degree threshold below which vertices are handed to the low-degree
    /// stage.
    pub delta_low: u64,
    /// Cabal threshold: a clique with average external degree below `ell`
    /// is a cabal.
    pub ell: u64,
    /// Number of reserved low colors (the dense stages keep [r] aside).
    pub r: u64,
    /// Relaxes the epsilon range check from (0, 1/100) to (0, 1/10] so the
    /// dense machinery can be exercised on instances far below the sizes
    /// where the nominal parameters bite.
    pub forced: bool,
    pub estimator: EstimatorMode,
    /// Iteration cap for the min-id component flood over the candidate
    /// graph; components not converged by then fall back to Star.
    pub component_cap: u32,
}

/// ell default: grows slightly faster than log n, floored for small inputs.
pub fn desk_ell(n: usize) -> u64 {
    let l = (n.max(2) as f64).log2();
    (l.powf(1.2).ceil() as u64).max(16)
}

/// r default: grows slightly slower than ell.
pub fn desk_r(n: usize) -> u64 {
    let l = (n.max(2) as f64).log2();
    (l.powf(1.1).ceil() as u64).max(16)
}

/// delta_low default: the nominal polylog threshold, capped at n. At bench
/// scale the cap always binds, sending every vertex to the low-degree stage
/// unless the forced profile overrides it.
pub fn desk_delta_low(n: usize) -> u64 {
    let l = (n.max(2) as f64).log2();
    let poly = l.powi(21);
    let capped = if poly >= n as f64 { n as u64 } else { poly.ceil() as u64 };
    capped.max(64)
}

impl AcdParams {
    /// Nominal profile: epsilon = 1/2000 and the polylog degree threshold.
    pub fn desk(n: usize) -> AcdParams {
        AcdParams {
            epsilon: rat(1, 2000),
            theta_override: None,
            delta_low: desk_delta_low(n),
            ell: desk_ell(n),
            r: desk_r(n),
            forced: false,
            estimator: EstimatorMode::ExactCensus,
            component_cap: 64,
        }
    }

    /// Small-scale profile that lets the dense machinery run: coarse
    /// epsilon and theta, a tiny degree threshold, and a cabal threshold
    /// reachable by instances with single-digit external degrees.
    pub fn forced_phase(_n: usize) -> AcdParams {
        AcdParams {
            epsilon: rat(1, 20),
            theta_override: Some(rat(1, 20)),
            delta_low: 8,
            ell: 2,
            r: 4,
            forced: true,
            estimator: EstimatorMode::ExactCensus,
            component_cap: 64,
        }
    }

    pub fn theta(&self) -> Rat {
        self.theta_override.unwrap_or(self.epsilon / rat(100, 1))
    }

    pub fn validate(&self) -> Result<(), AcdError> {
        let zero = rat(0, 1);
        let cap = if self.forced { rat(1, 10) } else { rat(1, 100) };
        if self.epsilon <= zero || self.epsilon > cap || (!self.forced && self.epsilon >= cap) {
            return Err(AcdError::BadParams(format!(
                "epsilon {} outside (0, {}]",
                self.epsilon, cap
            )));
        }
        let th = self.theta();
        if th <= zero || th >= rat(1, 1) {
            return Err(AcdError::BadParams(format!("theta {th} outside (0, 1)")));
        }
        if self.delta_low == 0 || self.ell == 0 || self.r == 0 {
            return Err(AcdError::BadParams(
                "delta_low, ell, r must be positive".into(),
            ));
        }
        if let EstimatorMode::Fingerprint { t } = self.estimator {
            if t == 0 {
                return Err(AcdError::BadParams("fingerprint t must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Partition label of one vertex. `Dense(i)` points into `AcdResult::cliques`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexClass {
    Low,
    Inaccurate,
    Star,
    Dense(u32),
}

/// Degree bookkeeping of one dense vertex relative to its clique.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseStats {
    /// External degree with edge multiplicity.
    pub e_v: u64,
    /// Pseudo-anti-degree |K| - 1 - deg(v, H within K); negative when
    /// internal multi-edges outweigh missing neighbors.
    pub a_v: i64,
    /// Distinct external neighbors |E_v|.
    pub ext_distinct: u64,
    /// Distinct non-neighbors inside the clique |A_v| (v itself excluded).
    pub anti_distinct: u64,
    /// External multiplicity excess e_v - |E_v|.
    pub delta_e: u64,
    /// Internal multiplicity excess deg_in - |N(v) within K| = |A_v| - a_v.
    pub delta_a: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueStats {
    /// Minimum member id; doubles as the coordination leader.
    pub leader: VertexId,
    /// Sorted member list.
    pub members: Vec<VertexId>,
    /// Max degree (with multiplicity) over members.
    pub delta_k: u64,
    /// Max degree over the inlier subset.
    pub delta_ik: u64,
    /// Sum of member external degrees (average e_K = e_sum / |K|).
    pub e_sum: u64,
    /// Sum of member pseudo-anti-degrees (average a_K = a_sum / |K|).
    pub a_sum: i64,
    /// e_K < ell, evaluated exactly as e_sum < ell * |K|.
    pub cabal: bool,
    /// Members with e_v <= 20 e_K and a_v <= 20 a_K (exact cross-multiplied
    /// comparisons).
    pub inliers: Vec<VertexId>,
}

impl CliqueStats {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn e_avg(&self) -> Rat {
        rat(self.e_sum as i128, self.members.len() as i128)
    }

    pub fn a_avg(&self) -> Rat {
        rat(self.a_sum as i128, self.members.len() as i128)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcdResult {
    /// One label per vertex id.
    pub class: Vec<VertexClass>,
    /// Almost-cliques in ascending leader order.
    pub cliques: Vec<CliqueStats>,
    /// Per-dense-vertex degree bookkeeping.
    pub dense: BTreeMap<VertexId, DenseStats>,
    /// Engine rounds consumed by the distributed detection.
    pub rounds: u64,
    /// Non-fatal anomalies (estimator overflows, flood cap hits, relay
    /// fallbacks); empty on clean runs.
    pub flags: Vec<String>,
}

impl AcdResult {
    pub fn class_of(&self, v: VertexId) -> VertexClass {
        self.class[v as usize]
    }

    pub fn clique_of(&self, v: VertexId) -> Option<usize> {
        match self.class[v as usize] {
            VertexClass::Dense(i) => Some(i as usize),
            _ => None,
        }
    }

    pub fn members_of(&self, class: VertexClass) -> Vec<VertexId> {
        (0..self.class.len() as VertexId)
            .filter(|&v| self.class[v as usize] == class)
            .collect()
    }

    pub fn v_in(&self) -> Vec<VertexId> {
        self.members_of(VertexClass::Inaccurate)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("acd result serializes")
    }

    pub fn from_json(text: &str) -> Result<AcdResult, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A distinct-neighbor cardinality as the detection protocol sees it.
#[derive(Clone, Copy, Debug)]
pub enum Estimate {
    Exact(u64),
    Approx(f64),
    Overflow,
}

impl Estimate {
    fn value(self) -> Option<f64> {
        match self {
            Estimate::Exact(x) => Some(x as f64),
            Estimate::Approx(x) => Some(x),
            Estimate::Overflow => None,
        }
    }
}

/// Threshold test `lhs >= (1 + coeff) * est`, exact when the estimate is.
fn exceeds_scaled(lhs: u64, coeff: Rat, est: Estimate) -> bool {
    match est {
        Estimate::Exact(d) => {
            rat(lhs as i128, 1) >= (rat(1, 1) + coeff) * rat(d as i128, 1)
        }
        Estimate::Approx(d) => {
            let c = *coeff.numer() as f64 / *coeff.denom() as f64;
            lhs as f64 >= (1.0 + c) * d
        }
        Estimate::Overflow => false,
    }
}

/// Inaccurate-vertex detection: a candidate joins V_in when its degree with
/// multiplicity exceeds (1 + 2 theta^3) times its distinct-neighbor
/// estimate. Candidates whose estimate overflowed never join (the caller
/// flags them and falls back to Star).
pub fn detect_inaccurate(
    g: &MultiGraph,
    candidates: &[VertexId],
    estimate: &dyn Fn(VertexId) -> Option<Estimate>,
    theta: Rat,
) -> Result<Vec<VertexId>, AcdError> {
    let coeff = rat(2, 1) * theta * theta * theta;
    let mut v_in = Vec::new();
    for &v in candidates {
        let est = estimate(v).ok_or(AcdError::EstimateUnavailable(v))?;
        if exceeds_scaled(g.pseudo_degree(v), coeff, est) {
            v_in.push(v);
        }
    }
    Ok(v_in)
}

/// Friendliness classifier: a pair {u, v} passes when the joint-neighborhood
/// estimate f satisfies f <= (1 + 5 theta) * dtilde(w), where w is the
/// endpoint with the larger degree estimate (ties to the larger id). Pairs
/// with an overflowed estimate are rejected and reported separately.
pub fn classify_friendly(
    pairs: &[(VertexId, VertexId)],
    dtilde: &dyn Fn(VertexId) -> Estimate,
    union_size: &dyn Fn(VertexId, VertexId) -> Estimate,
    theta: Rat,
) -> (BTreeSet<(VertexId, VertexId)>, Vec<(VertexId, VertexId)>) {
    let mut f_set = BTreeSet::new();
    let mut overflowed = Vec::new();
    for &(u, v) in pairs {
        let (du, dv) = (dtilde(u), dtilde(v));
        let f = union_size(u, v);
        let (dw, fv) = match (du.value(), dv.value(), f.value()) {
            (Some(a), Some(b), Some(fv)) => {
                let w_is_v = (b, v) > (a, u);
                (if w_is_v { dv } else { du }, fv)
            }
            _ => {
                overflowed.push((u, v));
                continue;
            }
        };
        let accept = match (f, dw) {
            (Estimate::Exact(fe), Estimate::Exact(de)) => {
                rat(fe as i128, 1) <= (rat(1, 1) + rat(5, 1) * theta) * rat(de as i128, 1)
            }
            _ => {
                let c = 5.0 * (*theta.numer() as f64 / *theta.denom() as f64);
                fv <= (1.0 + c) * dw.value().unwrap_or(0.0)
            }
        };
        if accept {
            f_set.insert((u.min(v), u.max(v)));
        }
    }
    (f_set, overflowed)
}

fn norm(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

/// Full decomposition over the round engine. Labels, clique statistics and
/// degree bookkeeping come out of the distributed protocol (census bitmaps
/// or fingerprints plus small-width aggregates, all charged on the engine);
/// the distinct-count bookkeeping (|E_v|, |A_v| and the multiplicity
/// splits) is filled in centrally since no later stage consumes it over the
/// wire.
pub fn compute_acd(sim: &mut Sim, params: &AcdParams) -> Result<AcdResult, AcdError> {
    params.validate()?;
    let g = sim.emb.h.clone();
    let n = g.num_vertices();
    let theta = params.theta();
    let mut rounds = 0u64;
    let mut flags: Vec<String> = Vec::new();
    let mut class: Vec<VertexClass> = vec![VertexClass::Low; n];

    let high: Vec<VertexId> = (0..n as VertexId)
        .filter(|&v| g.pseudo_degree(v) > params.delta_low)
        .collect();
    if high.is_empty() {
        return Ok(AcdResult { class, cliques: vec![], dense: BTreeMap::new(), rounds, flags });
    }

    let degw = field_bits(g.max_pseudo_degree() + 1);
    let idw = field_bits(n as u64);
    let census_w = n as u64;

    // Degrees: every vertex folds its handler edge counts to the root, and
    // high vertices push the total back down so handlers can test balance.
    let all: Vec<(VertexId, u64)> = (0..n as VertexId).map(|v| (v, degw)).collect();
    rounds += sim.agg(&all)?;
    let high_deg: Vec<(VertexId, u64)> = high.iter().map(|&v| (v, degw)).collect();
    rounds += sim.bcast(&high_deg)?;

    // Distinct-neighbor estimates for high vertices.
    let mut dtilde: BTreeMap<VertexId, Estimate> = BTreeMap::new();
    let fp_seed = sim.shared_seed(TAG_ACD, &[1]);
    let mut fp: BTreeMap<VertexId, Fingerprint> = BTreeMap::new();
    match params.estimator {
        EstimatorMode::ExactCensus => {
            let reqs: Vec<(VertexId, u64)> = high.iter().map(|&v| (v, census_w)).collect();
            rounds += sim.agg(&reqs)?;
            for &v in &high {
                dtilde.insert(v, Estimate::Exact(g.degree(v) as u64));
            }
        }
        EstimatorMode::Fingerprint { t } => {
            let (ests, r) = approx_predicate_neighbors(
                sim.net,
                sim.forest,
                sim.emb,
                &high,
                &|_, _| true,
                fp_seed,
                t,
            )?;
            rounds += r;
            for (v, e) in ests {
                let e = match e {
                    CardEstimate::Value(x) => Estimate::Approx(x),
                    CardEstimate::Overflow => {
                        flags.push(format!("degree fingerprint overflow at vertex {v}"));
                        Estimate::Overflow
                    }
                };
                dtilde.insert(v, e);
            }
            for &v in &high {
                let mut f = Fingerprint::empty(t);
                for u in g.neighbors(v) {
                    f = f.combine(&fingerprint_leaf(fp_seed, u, t));
                }
                fp.insert(v, f);
            }
        }
    }

    let v_in = detect_inaccurate(&g, &high, &|v| dtilde.get(&v).copied(), theta)?;
    let v_in_set: BTreeSet<VertexId> = v_in.iter().copied().collect();
    for &v in &v_in {
        class[v as usize] = VertexClass::Inaccurate;
    }
    // Accuracy bit down every high tree so handlers can drop pairs with an
    // inaccurate endpoint.
    let acc_bits: Vec<(VertexId, u64)> = high.iter().map(|&v| (v, 1)).collect();
    rounds += sim.bcast(&acc_bits)?;

    let accurate: Vec<VertexId> = high
        .iter()
        .copied()
        .filter(|&v| {
            !v_in_set.contains(&v) && !matches!(dtilde.get(&v), Some(Estimate::Overflow))
        })
        .collect();
    for &v in &high {
        if !v_in_set.contains(&v) {
            class[v as usize] = VertexClass::Star;
        }
    }
    let acc_set: BTreeSet<VertexId> = accurate.iter().copied().collect();

    // Joint-neighborhood material to the handlers: the full neighbor bitmap
    // in census mode, the combined fingerprint otherwise.
    let joint_reqs: Vec<(VertexId, u64)> = match params.estimator {
        EstimatorMode::ExactCensus => accurate.iter().map(|&v| (v, census_w)).collect(),
        EstimatorMode::Fingerprint { .. } => accurate
            .iter()
            .map(|&v| (v, encode_fingerprint(&fp[&v]).len() as u64))
            .collect(),
    };
    rounds += sim.bcast(&joint_reqs)?;

    // Candidate pairs: distinct endpoints of H-edges, both accurate, and
    // balanced (min degree at least (1 - 2 theta) max degree, exactly).
    let balance = rat(1, 1) - rat(2, 1) * theta;
    let mut pairs: Vec<(VertexId, VertexId)> = Vec::new();
    for (u, v, _) in g.edge_pairs() {
        if !acc_set.contains(&u) || !acc_set.contains(&v) {
            continue;
        }
        let (a, b) = (g.pseudo_degree(u), g.pseudo_degree(v));
        let (lo, hi) = (a.min(b), a.max(b));
        if rat(lo as i128, 1) >= balance * rat(hi as i128, 1) {
            pairs.push((u, v));
        }
    }

    let neighbor_sets: Vec<BTreeSet<VertexId>> = (0..n as VertexId)
        .map(|v| g.neighbors(v).collect())
        .collect();
    let union_size = |u: VertexId, v: VertexId| -> Estimate {
        match params.estimator {
            EstimatorMode::ExactCensus => {
                let nu = &neighbor_sets[u as usize];
                let nv = &neighbor_sets[v as usize];
                Estimate::Exact((nu.len() + nv.iter().filter(|x| !nu.contains(x)).count()) as u64)
            }
            EstimatorMode::Fingerprint { .. } => {
                match estimate_cardinality(&fp[&u].combine(&fp[&v])) {
                    CardEstimate::Value(x) => Estimate::Approx(x),
                    CardEstimate::Overflow => Estimate::Overflow,
                }
            }
        }
    };
    let (d_edges, over_pairs) =
        classify_friendly(&pairs, &|v| dtilde[&v], &union_size, theta);
    for (u, v) in over_pairs {
        flags.push(format!("joint fingerprint overflow on pair {u}-{v}"));
    }

    let mut d_adj: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for &(u, v) in &d_edges {
        d_adj.entry(u).or_default().insert(v);
        d_adj.entry(v).or_default().insert(u);
    }

    // Candidate-degree estimates and the highly-dense labels.
    let participants: Vec<VertexId> =
        accurate.iter().copied().filter(|v| d_adj.contains_key(v)).collect();
    let mut labeled: BTreeSet<VertexId> = BTreeSet::new();
    match params.estimator {
        EstimatorMode::ExactCensus => {
            let reqs: Vec<(VertexId, u64)> =
                participants.iter().map(|&v| (v, census_w)).collect();
            rounds += sim.agg(&reqs)?;
            for &v in &participants {
                let nd = d_adj[&v].len() as u64;
                if let Estimate::Exact(d) = dtilde[&v] {
                    if rat(nd as i128, 1) >= (rat(1, 1) - theta) * rat(d as i128, 1) {
                        labeled.insert(v);
                    }
                }
            }
        }
        EstimatorMode::Fingerprint { t } => {
            let seed2 = sim.shared_seed(TAG_ACD, &[2]);
            let (ests, r) = approx_predicate_neighbors(
                sim.net,
                sim.forest,
                sim.emb,
                &participants,
                &|v, u| d_edges.contains(&norm(u, v)),
                seed2,
                t,
            )?;
            rounds += r;
            let tf = 1.0 - *theta.numer() as f64 / *theta.denom() as f64;
            for (v, e) in ests {
                let nd = match e {
                    CardEstimate::Value(x) => x,
                    CardEstimate::Overflow => {
                        flags.push(format!("candidate-degree fingerprint overflow at {v}"));
                        continue;
                    }
                };
                if let Some(d) = dtilde[&v].value() {
                    if nd >= tf * d {
                        labeled.insert(v);
                    }
                }
            }
        }
    }

    // Min-id flood over the candidate graph, carrying a has-label bit.
    // Every iteration pushes the current (component, label) word to the
    // handlers and folds the incident minimum back up, plus one bit for the
    // global change flag.
    let mut comp: BTreeMap<VertexId, (VertexId, bool)> = participants
        .iter()
        .map(|&v| (v, (v, labeled.contains(&v))))
        .collect();
    let flood_reqs: Vec<(VertexId, u64)> =
        participants.iter().map(|&v| (v, idw + 1)).collect();
    let flag_reqs: Vec<(VertexId, u64)> = participants.iter().map(|&v| (v, 1)).collect();
    let mut converged = participants.is_empty();
    for _ in 0..params.component_cap {
        if converged {
            break;
        }
        rounds += sim.bcast(&flood_reqs)?;
        rounds += sim.agg(&flood_reqs)?;
        rounds += sim.agg(&flag_reqs)?;
        let mut changed = false;
        let prev = comp.clone();
        for &v in &participants {
            let mut best = prev[&v];
            let mut lab = best.1;
            for &u in &d_adj[&v] {
                let (cu, lu) = prev[&u];
                lab |= lu;
                if cu < best.0 {
                    best.0 = cu;
                }
            }
            let next = (best.0, lab);
            if next != prev[&v] {
                changed = true;
            }
            comp.insert(v, next);
        }
        converged = !changed;
    }
    if !converged {
        flags.push(format!(
            "component flood not converged after {} iterations; unstable components fall back to Star",
            params.component_cap
        ));
    }

    // Verify every component agreed on one id (only matters at the cap);
    // labeled, converged components become almost-cliques.
    let mut groups: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &v in &participants {
        let (c, lab) = comp[&v];
        if lab {
            groups.entry(c).or_default().push(v);
        }
    }
    if !converged {
        // Drop groups whose membership is not a fixed point of the flood.
        let ids: Vec<VertexId> = groups.keys().copied().collect();
        for c in ids {
            let members: BTreeSet<VertexId> = groups[&c].iter().copied().collect();
            let stable = members.iter().all(|&v| {
                d_adj[&v].iter().all(|u| {
                    members.contains(u) == (comp[u].0 == c)
                })
            });
            if !stable {
                groups.remove(&c);
            }
        }
    }

    let mut cliques: Vec<CliqueStats> = Vec::new();
    let mut dense: BTreeMap<VertexId, DenseStats> = BTreeMap::new();
    for (leader, members) in groups {
        // Clique coordination needs a relay structure (diameter two in H);
        // components that lack one stay Star.
        let idx = cliques.len();
        let comms = match CliqueComms::new(&g, &members, idx) {
            Ok(c) => c,
            Err(TrialError::NoRelay(_, v)) => {
                flags.push(format!(
                    "component led by {leader} has no relay for {v}; members fall back to Star"
                ));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        // Size gather and (size, leader) scatter, then the in-clique degree
        // fold: handlers already hold both endpoints' component ids.
        rounds += comms.gather(sim, idw)?;
        rounds += comms.scatter(sim, idw)?;
        let deg_reqs: Vec<(VertexId, u64)> = members.iter().map(|&v| (v, degw)).collect();
        rounds += sim.agg(&deg_reqs)?;

        let kset: BTreeSet<VertexId> = members.iter().copied().collect();
        let k = members.len() as u64;
        let mut e_sum = 0u64;
        let mut a_sum = 0i64;
        let mut delta_k = 0u64;
        let mut per_member: Vec<(VertexId, u64, i64)> = Vec::new();
        for &v in &members {
            let mut deg_in = 0u64;
            let mut n_in = 0u64;
            for &(u, m) in g.neighbors_with_mult(v) {
                if kset.contains(&u) {
                    deg_in += m as u64;
                    n_in += 1;
                }
            }
            let pdeg = g.pseudo_degree(v);
            let e_v = pdeg - deg_in;
            let a_v = k as i64 - 1 - deg_in as i64;
            let ext_distinct = g.degree(v) as u64 - n_in;
            let anti_distinct = k - 1 - n_in;
            dense.insert(
                v,
                DenseStats {
                    e_v,
                    a_v,
                    ext_distinct,
                    anti_distinct,
                    delta_e: e_v - ext_distinct,
                    delta_a: deg_in - n_in,
                },
            );
            e_sum += e_v;
            a_sum += a_v;
            delta_k = delta_k.max(pdeg);
            per_member.push((v, e_v, a_v));
        }
        let mut inliers: Vec<VertexId> = per_member
            .iter()
            .filter(|&&(_, e_v, a_v)| {
                (e_v as i128) * (k as i128) <= 20 * e_sum as i128
                    && (a_v as i128) * (k as i128) <= 20 * a_sum as i128
            })
            .map(|&(v, _, _)| v)
            .collect();
        if inliers.is_empty() {
            flags.push(format!("clique led by {leader} has no inliers; using all members"));
            inliers = members.clone();
        }
        let delta_ik = inliers.iter().map(|&v| g.pseudo_degree(v)).max().unwrap_or(0);
        for &v in &members {
            class[v as usize] = VertexClass::Dense(idx as u32);
        }
        cliques.push(CliqueStats {
            leader: comms.leader,
            members,
            delta_k,
            delta_ik,
            e_sum,
            a_sum,
            cabal: e_sum < params.ell * k,
            inliers,
        });
    }

    // Low-degree pull: a clique with any low-degree member moves whole to
    // the low-degree stage. Cannot fire when detection was restricted to
    // degrees above the threshold; kept for the contract.
    let mut kept: Vec<CliqueStats> = Vec::new();
    for c in cliques {
        if c.members.iter().any(|&v| g.pseudo_degree(v) <= params.delta_low) {
            flags.push(format!("clique led by {} pulled into the low-degree stage", c.leader));
            for &v in &c.members {
                class[v as usize] = VertexClass::Low;
                dense.remove(&v);
            }
        } else {
            kept.push(c);
        }
    }
    for (i, c) in kept.iter().enumerate() {
        for &v in &c.members {
            class[v as usize] = VertexClass::Dense(i as u32);
        }
    }

    Ok(AcdResult { class, cliques: kept, dense, rounds, flags })
}

// ---- checker --------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct AcdVerdict {
    pub failures: Vec<String>,
    /// Minimum over Star vertices of (sparsity + unevenness + inaccurate
    /// neighbors) / degree; the decomposition promises this stays above a
    /// positive constant.
    pub star_min_ratio: Option<f64>,
    /// Minimum over dense vertices with external neighbors of the same
    /// slack sum divided by |E_v|.
    pub ext_min_ratio: Option<f64>,
    /// Minimum over inaccurate vertices of delta_v / (theta^3 |N(v)|);
    /// must stay at or above 1/2.
    pub vin_min_ratio: Option<f64>,
}

impl AcdVerdict {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn ratf(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Centralized validation of a decomposition against the graph. The epsilon
/// and theta clauses are checked with exact arithmetic; the two clauses
/// whose constants the source leaves unspecified (the Star slack bound and
/// the dense external-degree bound) are checked in floating point against
/// the calibrated `gamma_check`, and the verdict carries the empirical
/// minima so the constant can be re-calibrated.
pub fn check_acd(
    g: &MultiGraph,
    res: &AcdResult,
    params: &AcdParams,
    gamma_check: f64,
) -> AcdVerdict {
    let mut v = AcdVerdict::default();
    let n = g.num_vertices();
    let eps = params.epsilon;
    let theta = params.theta();
    let one = rat(1, 1);
    if res.class.len() != n {
        v.failures.push(format!(
            "label vector has {} entries for {} vertices",
            res.class.len(),
            n
        ));
        return v;
    }

    // Label structure: Dense indices valid, clique member lists sorted,
    // disjoint, and consistent with the labels.
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    for (i, c) in res.cliques.iter().enumerate() {
        if c.members.is_empty() {
            v.failures.push(format!("clique {i} is empty"));
            continue;
        }
        if c.members.windows(2).any(|w| w[0] >= w[1]) {
            v.failures.push(format!("clique {i} member list not sorted"));
        }
        if c.leader != c.members[0] {
            v.failures.push(format!("clique {i} leader is not the minimum member"));
        }
        for &m in &c.members {
            if !seen.insert(m) {
                v.failures.push(format!("vertex {m} appears in two cliques"));
            }
            if res.class[m as usize] != VertexClass::Dense(i as u32) {
                v.failures.push(format!("vertex {m} in clique {i} but labeled {:?}", res.class[m as usize]));
            }
            if !res.dense.contains_key(&m) {
                v.failures.push(format!("dense vertex {m} missing degree bookkeeping"));
            }
        }
    }
    for (vx, cls) in res.class.iter().enumerate() {
        if let VertexClass::Dense(i) = cls {
            if *i as usize >= res.cliques.len() {
                v.failures.push(format!("vertex {vx} labeled with unknown clique {i}"));
            } else if !res.cliques[*i as usize].members.contains(&(vx as VertexId)) {
                v.failures.push(format!("vertex {vx} labeled clique {i} but not a member"));
            }
        }
    }
    for k in res.dense.keys() {
        if !matches!(res.class[*k as usize], VertexClass::Dense(_)) {
            v.failures.push(format!("bookkeeping for non-dense vertex {k}"));
        }
    }

    let v_in: BTreeSet<VertexId> = res.v_in().into_iter().collect();
    let coeff_lo = theta * theta * theta / rat(2, 1);
    let coeff_hi = one + rat(5, 1) * theta * theta * theta;

    for vx in 0..n as VertexId {
        let pdeg = g.pseudo_degree(vx);
        let nd = g.degree(vx) as u64;
        match res.class[vx as usize] {
            VertexClass::Low => {
                if pdeg > 2 * params.delta_low {
                    v.failures.push(format!(
                        "low vertex {vx} has degree {pdeg} > 2 delta_low"
                    ));
                }
            }
            cls => {
                if pdeg < params.delta_low {
                    v.failures.push(format!(
                        "{cls:?} vertex {vx} has degree {pdeg} < delta_low"
                    ));
                }
                if cls == VertexClass::Inaccurate {
                    // delta_v >= theta^3/2 |N(v)|.
                    let delta = g.inaccuracy(vx);
                    if rat(delta as i128, 1) < coeff_lo * rat(nd as i128, 1) {
                        v.failures.push(format!(
                            "inaccurate vertex {vx} has slack {delta} below theta^3/2 * {nd}"
                        ));
                    }
                    if nd > 0 {
                        let ratio = delta as f64 / (ratf(theta).powi(3) * nd as f64);
                        v.vin_min_ratio =
                            Some(v.vin_min_ratio.map_or(ratio, |m: f64| m.min(ratio)));
                    }
                } else {
                    // Accurate high vertices: degree within (1 + 5 theta^3)
                    // of the distinct-neighbor count.
                    if rat(pdeg as i128, 1) > coeff_hi * rat(nd as i128, 1) {
                        v.failures.push(format!(
                            "accurate vertex {vx} has degree {pdeg} > (1+5theta^3)|N| = (1+5theta^3)*{nd}"
                        ));
                    }
                }
            }
        }
    }

    // Slack sum used by the Star and external-degree clauses.
    let slack = |vx: VertexId| -> f64 {
        let nbrs: Vec<VertexId> = g.neighbors(vx).collect();
        let zeta = ratf(g.sparsity(vx));
        let pd = g.pseudo_degree(vx) as f64;
        let eta: f64 = nbrs
            .iter()
            .map(|&u| {
                let du = g.pseudo_degree(u) as f64;
                (du - pd).max(0.0) / (du + 1.0)
            })
            .sum();
        let in_heavy = nbrs.iter().filter(|u| v_in.contains(u)).count() as f64;
        zeta + eta + in_heavy
    };

    for vx in 0..n as VertexId {
        if res.class[vx as usize] != VertexClass::Star {
            continue;
        }
        let pdeg = g.pseudo_degree(vx) as f64;
        let s = slack(vx);
        let ratio = if pdeg > 0.0 { s / pdeg } else { f64::INFINITY };
        v.star_min_ratio = Some(v.star_min_ratio.map_or(ratio, |m: f64| m.min(ratio)));
        if s < gamma_check * pdeg {
            v.failures.push(format!(
                "star vertex {vx} has slack {s:.3} < gamma * degree {pdeg}"
            ));
        }
    }

    for (i, c) in res.cliques.iter().enumerate() {
        let kset: BTreeSet<VertexId> = c.members.iter().copied().collect();
        let k = c.members.len() as u64;
        let mut delta_k = 0u64;
        let mut e_sum = 0u64;
        let mut a_sum = 0i64;
        for &m in &c.members {
            let pdeg = g.pseudo_degree(m);
            delta_k = delta_k.max(pdeg);
            let mut deg_in = 0u64;
            let mut n_in = 0u64;
            for &(u, mult) in g.neighbors_with_mult(m) {
                if kset.contains(&u) {
                    deg_in += mult as u64;
                    n_in += 1;
                }
            }
            let e_v = pdeg - deg_in;
            let a_v = k as i64 - 1 - deg_in as i64;
            let ext_distinct = g.degree(m) as u64 - n_in;
            let anti_distinct = k - 1 - n_in;
            e_sum += e_v;
            a_sum += a_v;

            // Almost-clique clauses, exact.
            if rat(n_in as i128, 1) < (one - eps) * rat(k as i128, 1) {
                v.failures.push(format!(
                    "clique {i}: member {m} has {n_in} in-clique neighbors < (1-eps)|K|"
                ));
            }
            if rat(pdeg as i128, 1) > (one + eps) * rat(k as i128, 1) {
                v.failures.push(format!(
                    "clique {i}: member {m} has degree {pdeg} > (1+eps)|K|"
                ));
            }
            if rat(ext_distinct as i128, 1) > rat(2, 1) * eps * rat(k as i128, 1) {
                v.failures.push(format!(
                    "clique {i}: member {m} has |E_v| = {ext_distinct} > 2 eps |K|"
                ));
            }
            if rat(anti_distinct as i128, 1) > eps * rat(k as i128, 1) {
                v.failures.push(format!(
                    "clique {i}: member {m} has |A_v| = {anti_distinct} > eps |K|"
                ));
            }
            if pdeg as i64 + 1 != k as i64 + e_v as i64 - a_v {
                v.failures.push(format!(
                    "clique {i}: member {m} fails degree identity deg+1 = |K| + e_v - a_v"
                ));
            }

            // Stored bookkeeping must match the recomputation.
            match res.dense.get(&m) {
                Some(d) => {
                    let want = DenseStats {
                        e_v,
                        a_v,
                        ext_distinct,
                        anti_distinct,
                        delta_e: e_v - ext_distinct,
                        delta_a: deg_in - n_in,
                    };
                    if *d != want {
                        v.failures.push(format!(
                            "clique {i}: member {m} bookkeeping {d:?} != recomputed {want:?}"
                        ));
                    }
                }
                None => {} // already reported above
            }

            // External-degree clause with the calibrated constant.
            if ext_distinct > 0 {
                let s = slack(m);
                let ratio = s / ext_distinct as f64;
                v.ext_min_ratio = Some(v.ext_min_ratio.map_or(ratio, |mm: f64| mm.min(ratio)));
                if (gamma_check * ext_distinct as f64) > s {
                    v.failures.push(format!(
                        "clique {i}: member {m} has |E_v| = {ext_distinct} exceeding slack {s:.3} / gamma"
                    ));
                }
            }
        }

        // Degree radius of the clique.
        if rat(delta_k as i128, 1) < (one - eps) * rat(k as i128, 1)
            || rat(delta_k as i128, 1) > (one + eps) * rat(k as i128, 1)
        {
            v.failures.push(format!(
                "clique {i}: Delta_K = {delta_k} outside (1 +/- eps)|K| for |K| = {k}"
            ));
        }
        for &m in &c.members {
            let pdeg = g.pseudo_degree(m);
            if rat(pdeg as i128, 1) < (one - rat(2, 1) * eps) * rat(delta_k as i128, 1) {
                v.failures.push(format!(
                    "clique {i}: member {m} degree {pdeg} < (1-2eps) Delta_K"
                ));
            }
        }

        // Stored statistics.
        if c.delta_k != delta_k {
            v.failures.push(format!("clique {i}: stored Delta_K {} != {delta_k}", c.delta_k));
        }
        if c.e_sum != e_sum || c.a_sum != a_sum {
            v.failures.push(format!(
                "clique {i}: stored degree sums ({}, {}) != recomputed ({e_sum}, {a_sum})",
                c.e_sum, c.a_sum
            ));
        }
        if c.cabal != (e_sum < params.ell * k) {
            v.failures.push(format!("clique {i}: cabal flag inconsistent with e_K"));
        }
        let want_inliers: Vec<VertexId> = c
            .members
            .iter()
            .copied()
            .filter(|&m| {
                let d = match res.dense.get(&m) {
                    Some(d) => *d,
                    None => return false,
                };
                (d.e_v as i128) * (k as i128) <= 20 * e_sum as i128
                    && (d.a_v as i128) * (k as i128) <= 20 * a_sum as i128
            })
            .collect();
        if !want_inliers.is_empty() && c.inliers != want_inliers {
            v.failures.push(format!("clique {i}: inlier list inconsistent"));
        }
        let want_dik = c.inliers.iter().map(|&m| g.pseudo_degree(m)).max().unwrap_or(0);
        if c.delta_ik != want_dik {
            v.failures.push(format!(
                "clique {i}: stored Delta_IK {} != {want_dik}",
                c.delta_ik
            ));
        }

        // Strong diameter at most two inside the clique.
        for &m in &c.members {
            let mut reach: BTreeSet<VertexId> = BTreeSet::new();
            reach.insert(m);
            let first: Vec<VertexId> = g
                .neighbors(m)
                .filter(|u| kset.contains(u))
                .collect();
            reach.extend(first.iter().copied());
            for &u in &first {
                reach.extend(g.neighbors(u).filter(|w| kset.contains(w)));
            }
            if !kset.iter().all(|w| reach.contains(w)) {
                v.failures.push(format!(
                    "clique {i}: member {m} cannot reach all members within two hops"
                ));
                break;
            }
        }

        // The low-degree pull must have fired.
        if c.members.iter().any(|&m| g.pseudo_degree(m) <= params.delta_low) {
            v.failures.push(format!(
                "clique {i} retains a member at or below delta_low"
            ));
        }
    }

    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_identity;
    use crate::multigraph::MultiGraph;

    fn clique_edges(ids: &[VertexId]) -> Vec<(VertexId, VertexId, u32)> {
        let mut e = Vec::new();
        for (i, &u) in ids.iter().enumerate() {
            for &v in &ids[i + 1..] {
                e.push((u, v, 1));
            }
        }
        e
    }

    fn run_acd(g: &MultiGraph, params: &AcdParams) -> AcdResult {
        let emb = build_identity(g).unwrap();
        let mut net = emb.network(4096, 7);
        let forest = emb.forest(&net).unwrap();
        let mut sim = Sim { net: &mut net, forest: &forest, emb: &emb };
        compute_acd(&mut sim, params).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(AcdParams::desk(1000).validate().is_ok());
        assert!(AcdParams::forced_phase(1000).validate().is_ok());
        let mut p = AcdParams::desk(1000);
        p.epsilon = rat(1, 50);
        assert!(p.validate().is_err());
        p.forced = true;
        assert!(p.validate().is_ok());
        p.epsilon = rat(1, 5);
        assert!(p.validate().is_err());
    }

    #[test]
    fn inaccurate_simple_graph_empty() {
        let g = MultiGraph::from_edges(5, clique_edges(&[0, 1, 2, 3, 4])).unwrap();
        let all: Vec<VertexId> = (0..5).collect();
        let est = |v: VertexId| Some(Estimate::Exact(g.degree(v) as u64));
        let v_in = detect_inaccurate(&g, &all, &est, rat(1, 20)).unwrap();
        assert!(v_in.is_empty());
    }

    #[test]
    fn inaccurate_doubled_star_center() {
        // Center 0 with 8 leaves, every edge doubled: degree 16 against 8
        // distinct neighbors.
        let edges: Vec<(VertexId, VertexId, u32)> = (1..=8).map(|leaf| (0, leaf, 2)).collect();
        let g = MultiGraph::from_edges(9, edges).unwrap();
        let est = |v: VertexId| Some(Estimate::Exact(g.degree(v) as u64));
        let v_in = detect_inaccurate(&g, &[0], &est, rat(1, 20)).unwrap();
        assert_eq!(v_in, vec![0]);
    }

    #[test]
    fn inaccurate_borderline_excluded() {
        // Degree = (1 + theta^3)|N| exactly, with theta = 1/2: nine edge
        // endpoints over eight distinct neighbors sits below the
        // (1 + 2 theta^3) threshold.
        let mut edges: Vec<(VertexId, VertexId, u32)> = (1..=8).map(|u| (0, u, 1)).collect();
        edges.push((0, 1, 1));
        let g = MultiGraph::from_edges(9, edges).unwrap();
        assert_eq!(g.pseudo_degree(0), 9);
        let est = |v: VertexId| Some(Estimate::Exact(g.degree(v) as u64));
        let v_in = detect_inaccurate(&g, &[0], &est, rat(1, 2)).unwrap();
        assert!(v_in.is_empty());
    }

    #[test]
    fn friendly_clique_pair_accepted() {
        let ids: Vec<VertexId> = (0..64).collect();
        let g = MultiGraph::from_edges(64, clique_edges(&ids)).unwrap();
        let dt = |v: VertexId| Estimate::Exact(g.degree(v) as u64);
        let un = |_: VertexId, _: VertexId| Estimate::Exact(64);
        let (f, over) = classify_friendly(&[(0, 1)], &dt, &un, rat(1, 20));
        assert!(over.is_empty());
        assert!(f.contains(&(0, 1)));
    }

    #[test]
    fn unfriendly_disjoint_neighborhoods_rejected() {
        // Two adjacent centers, 32 private leaves each: the union roughly
        // doubles the larger degree.
        let dt = |_: VertexId| Estimate::Exact(33);
        let un = |_: VertexId, _: VertexId| Estimate::Exact(66);
        let (f, over) = classify_friendly(&[(0, 1)], &dt, &un, rat(1, 20));
        assert!(over.is_empty());
        assert!(f.is_empty());
    }

    #[test]
    fn overflow_pair_flagged() {
        let dt = |_: VertexId| Estimate::Exact(10);
        let un = |_: VertexId, _: VertexId| Estimate::Overflow;
        let (f, over) = classify_friendly(&[(3, 7)], &dt, &un, rat(1, 20));
        assert!(f.is_empty());
        assert_eq!(over, vec![(3, 7)]);
    }

    #[test]
    fn disjoint_cliques_become_cliques() {
        // Three disjoint simple cliques of size 32 = 4 * delta_low under the
        // forced profile: each is its own almost-clique, nothing is Star or
        // inaccurate, and the checker passes.
        let mut edges = Vec::new();
        for b in 0..3u32 {
            let ids: Vec<VertexId> = (32 * b..32 * (b + 1)).collect();
            edges.extend(clique_edges(&ids));
        }
        let g = MultiGraph::from_edges(96, edges).unwrap();
        let params = AcdParams::forced_phase(96);
        let res = run_acd(&g, &params);
        assert_eq!(res.cliques.len(), 3);
        for c in &res.cliques {
            assert_eq!(c.size(), 32);
            assert!(c.cabal);
            assert_eq!(c.e_sum, 0);
            assert_eq!(c.a_sum, 0);
        }
        assert!(res.v_in().is_empty());
        assert!(res.members_of(VertexClass::Star).is_empty());
        assert!(res.rounds > 0);
        let verdict = check_acd(&g, &res, &params, 0.3);
        assert!(verdict.pass(), "failures: {:?}", verdict.failures);
    }

    #[test]
    fn cycle_is_all_low() {
        let n = 40u32;
        let edges: Vec<(VertexId, VertexId, u32)> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        let g = MultiGraph::from_edges(n as usize, edges).unwrap();
        let params = AcdParams::forced_phase(n as usize);
        let res = run_acd(&g, &params);
        assert!(res.class.iter().all(|c| *c == VertexClass::Low));
        assert!(res.cliques.is_empty());
        let verdict = check_acd(&g, &res, &params, 0.3);
        assert!(verdict.pass(), "failures: {:?}", verdict.failures);
    }

    #[test]
    fn attached_vertex_stays_out_of_clique() {
        // K_32 plus one vertex adjacent to half the clique: the clique
        // reassembles and the extra vertex lands on Star without breaking
        // any checker clause.
        let ids: Vec<VertexId> = (0..32).collect();
        let mut edges = clique_edges(&ids);
        for u in 0..16 {
            edges.push((32, u, 1));
        }
        let g = MultiGraph::from_edges(33, edges).unwrap();
        let params = AcdParams::forced_phase(33);
        let res = run_acd(&g, &params);
        assert_eq!(res.cliques.len(), 1);
        assert_eq!(res.cliques[0].size(), 32);
        assert_eq!(res.class_of(32), VertexClass::Star);
        let verdict = check_acd(&g, &res, &params, 0.3);
        assert!(verdict.pass(), "failures: {:?}", verdict.failures);
        assert!(verdict.star_min_ratio.unwrap() > 0.3);
    }

    #[test]
    fn checker_rejects_planted_violation() {
        let mut edges = Vec::new();
        for b in 0..2u32 {
            let ids: Vec<VertexId> = (32 * b..32 * (b + 1)).collect();
            edges.extend(clique_edges(&ids));
        }
        // A bridge vertex adjacent to three members of the first clique.
        for u in 0..3 {
            edges.push((64, u, 1));
        }
        let g = MultiGraph::from_edges(65, edges).unwrap();
        let params = AcdParams::forced_phase(65);
        let mut res = run_acd(&g, &params);
        assert!(check_acd(&g, &res, &params, 0.0).pass());
        // Plant the bridge vertex into clique 0: it has 3 in-clique
        // neighbors, far below (1 - eps) * 33.
        let idx = res
            .cliques
            .iter()
            .position(|c| c.members.contains(&0))
            .unwrap();
        res.cliques[idx].members.push(64);
        res.cliques[idx].members.sort_unstable();
        res.class[64] = VertexClass::Dense(idx as u32);
        res.dense.insert(64, DenseStats { e_v: 0, a_v: 0, ext_distinct: 0, anti_distinct: 0, delta_e: 0, delta_a: 0 });
        let verdict = check_acd(&g, &res, &params, 0.0);
        assert!(!verdict.pass());
        assert!(verdict
            .failures
            .iter()
            .any(|f| f.contains("in-clique neighbors")));
    }

    #[test]
    fn fingerprint_mode_recovers_cliques() {
        // Fingerprint estimates carry a few percent of noise even at
        // t = 20000, so the detection thresholds only separate cleanly at a
        // coarse theta: 2 theta^3 = 1/4 and 5 theta = 5/2 dwarf the noise,
        // while the disjointness of the two cliques keeps the components
        // apart regardless.
        let mut edges = Vec::new();
        for b in 0..2u32 {
            let ids: Vec<VertexId> = (24 * b..24 * (b + 1)).collect();
            edges.extend(clique_edges(&ids));
        }
        let g = MultiGraph::from_edges(48, edges).unwrap();
        let mut params = AcdParams::forced_phase(48);
        params.theta_override = Some(rat(1, 2));
        params.estimator = EstimatorMode::Fingerprint { t: 20000 };
        let res = run_acd(&g, &params);
        assert_eq!(res.cliques.len(), 2, "flags: {:?}", res.flags);
        for c in &res.cliques {
            assert_eq!(c.size(), 24);
        }
        let verdict = check_acd(&g, &res, &params, 0.3);
        assert!(verdict.pass(), "failures: {:?}", verdict.failures);
    }

    #[test]
    fn result_json_round_trip() {
        let ids: Vec<VertexId> = (0..32).collect();
        let g = MultiGraph::from_edges(32, clique_edges(&ids)).unwrap();
        let params = AcdParams::forced_phase(32);
        let res = run_acd(&g, &params);
        let back = AcdResult::from_json(&res.to_json()).unwrap();
        assert_eq!(back.class, res.class);
        assert_eq!(back.cliques, res.cliques);
        assert_eq!(back.rounds, res.rounds);
    }
}
