//! High-degree coloring pipeline. Once the decomposition has split the
//! high-degree vertices into uneven/sparse vertices, almost-clique members,
//! and inaccurate vertices, this module colors them: a sparse random step
//! buys palette slack, colorful matchings buy extra slack inside cliques with
//! many internal non-edges, outliers are cleaned up against temporary slack,
//! a synchronized trial colors the bulk of every clique from its own palette,
//! slice coloring plus a layered reserved-color finish handles the residue,
//! and cabals (cliques with almost no external edges) route through put-aside
//! sets that are colored last from the leftover clique palette. Inaccurate
//! vertices close the phase using their permanent multiplicity slack.
//!
//! Every step charges its traffic on the simulated network; orchestrators
//! emit JSON checkpoints with round counts, per-clique statistics and the
//! measured extremes of the accounting monitors.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acd::{desk_ell, desk_r, AcdParams, AcdResult, CliqueStats, VertexClass};
use crate::multigraph::{clique_palette, color, Color, MultiGraph, PartialColoring, VertexId};
use crate::trials::{
    multicolor_trial, query_clique_palette, random_color_trial, slice_color, CliqueComms,
    ColorSpace, MctVerdict, PaletteQuery, Sim, TrialError, TAG_SAMPLER, TAG_SLACKGEN,
};
use crate::trials::CliquePalSampler;
use crate::util::{field_bits, rat, rng_from_scope, Rat};

pub const TAG_CM: u64 = 0x43_46_4d;
pub const TAG_SCT: u64 = 0x53_43_54;
pub const TAG_PA: u64 = 0x50_41_53;

// Scope prefixes keeping per-phase vertex randomness disjoint.
const SCOPE_VSTAR: u64 = 0x56;
const SCOPE_OUTLIER: u64 = 0x4f;
const SCOPE_FALLBACK: u64 = 0x46;
const SCOPE_PALETTE_RCT: u64 = 0x50;
const SCOPE_LAYER: u64 = 0x4c;
const SCOPE_INACC: u64 = 0x49;

#[derive(Debug, Error)]
pub enum DenseError {
    #[error(transparent)]
    Trial(#[from] TrialError),
    #[error("{phase}: multicolor trial stalled at vertex {witness}")]
    Mct { phase: &'static str, witness: VertexId },
    #[error("trial precondition violated: {0}")]
    Precondition(String),
    #[error("put-aside construction failed: {0}")]
    PutAside(String),
}

// ---- parameters --------------------------------------------------------------

/// Knobs of the high-degree pipeline. All asymptotic constants appear here as
/// explicit fields; `desk` picks the polylog defaults, `forced_phase` shrinks
/// every threshold so the full machinery runs on graphs of a few hundred
/// vertices.
#[derive(Clone, Debug)]
pub struct DenseParams {
    /// Reserved-color prefix for non-cabal cliques and the uneven/sparse set.
    pub r: u64,
    /// External-degree budget below which a clique counts as a cabal.
    pub ell: u64,
    /// Reserved-color prefix for cabals.
    pub r_prime: u64,
    pub epsilon: Rat,
    /// Colorful matching fires on cliques with a_K ≥ cm_threshold_c·log2 n.
    pub cm_threshold_c: f64,
    /// Matching iteration budget.
    pub cm_rounds: u32,
    /// Greedy-matching coverage target 1 − cm_cover_mult·ε.
    pub cm_cover_mult: u32,
    /// Random color trials before each multicolor trial.
    pub rct_rounds: u32,
    pub mct_phase_cap: u32,
    pub mct_x_max: usize,
    /// Minimum synchronized-trial size as a fraction of |K|.
    pub alpha: Rat,
    /// c in the trial sizing |K ∖ dom ψ| − r − c·log2 n.
    pub sct_slack_c: f64,
    /// c in the leftover monitor 500/α·(e_K + a_K) + c·log2 n.
    pub sct_leftover_c: f64,
    pub slice_iterations: u32,
    /// Sampler candidate threshold, × log2 n.
    pub sampler_c: f64,
    /// Accounting monitor slope γ: inliers must keep γ·(e_K + a_K) colors
    /// shared between their own palette and the clique palette.
    pub gamma_acct: f64,
    /// Upward-degree budget of the layered finish, × log2 n.
    pub c_layer: f64,
    /// Put-aside oversampling factor.
    pub c_pa: f64,
}

impl DenseParams {
    fn base() -> DenseParams {
        DenseParams {
            r: 4,
            ell: 2,
            r_prime: 10,
            epsilon: rat(1, 20),
            cm_threshold_c: 1.0,
            cm_rounds: 40,
            cm_cover_mult: 4,
            rct_rounds: 3,
            mct_phase_cap: 14,
            mct_x_max: 32,
            alpha: rat(1, 2),
            sct_slack_c: 1.0,
            sct_leftover_c: 4.0,
            slice_iterations: 4,
            sampler_c: 4.0,
            gamma_acct: 0.02,
            c_layer: 4.0,
            c_pa: 3.0,
        }
    }

    pub fn desk(n: usize) -> DenseParams {
        let ell = desk_ell(n);
        DenseParams {
            r: desk_r(n),
            ell,
            r_prime: 150 * ell,
            epsilon: rat(1, 2000),
            ..DenseParams::base()
        }
    }

    /// Small-scale profile: every branch of the pipeline is reachable on
    /// graphs of a few hundred vertices. The cabal reserve shrinks from 150ℓ
    /// to 5ℓ so that put-aside sets fit inside desk-sized cliques, and the
    /// matching threshold drops so cliques with unit anti-degree exercise it.
    pub fn forced_phase() -> DenseParams {
        DenseParams { cm_threshold_c: 0.1, ..DenseParams::base() }
    }

    /// Mirrors the decomposition's parameter choices.
    pub fn from_acd(p: &AcdParams) -> DenseParams {
        let base = if p.forced { DenseParams::forced_phase() } else { DenseParams::base() };
        DenseParams {
            r: p.r,
            ell: p.ell,
            r_prime: if p.forced { 5 * p.ell } else { 150 * p.ell },
            epsilon: p.epsilon,
            ..base
        }
    }
}

fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(a >= 0 && b > 0);
    (a + b - 1).div_euclid(b)
}

/// Average slack mass e_K + a_K of a clique.
fn slack_mass(st: &CliqueStats) -> f64 {
    (st.e_sum as f64 + st.a_sum.max(0) as f64) / st.size() as f64
}

// ---- bookkeeping state -------------------------------------------------------

/// Per-phase bookkeeping shared by the dense orchestrators: matching sizes,
/// inlier sets, trial sets and put-aside sets, keyed by clique index.
#[derive(Clone, Debug, Default)]
pub struct DensePhaseState {
    pub r: u64,
    pub r_prime: u64,
    pub ell: u64,
    pub m_k: BTreeMap<usize, u64>,
    pub inliers: BTreeMap<usize, BTreeSet<VertexId>>,
    pub s_k: BTreeMap<usize, Vec<VertexId>>,
    pub put_aside: BTreeMap<usize, Vec<VertexId>>,
}

impl DensePhaseState {
    /// Structural invariants of the put-aside sets: exact size r' + ℓ,
    /// all members uncolored inliers, and no edges between different
    /// cliques' put-aside sets.
    pub fn validate(
        &self,
        g: &MultiGraph,
        coloring: &PartialColoring,
        cliques: &[CliqueStats],
    ) -> Vec<String> {
        let mut fails = Vec::new();
        let want = (self.r_prime + self.ell) as usize;
        let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (&i, p) in &self.put_aside {
            if p.len() != want {
                fails.push(format!("clique {i}: put-aside size {} != {want}", p.len()));
            }
            let members: BTreeSet<VertexId> = cliques[i].members.iter().copied().collect();
            for &v in p {
                if coloring.is_colored(v) {
                    fails.push(format!("clique {i}: put-aside vertex {v} already colored"));
                }
                if !members.contains(&v) {
                    fails.push(format!("clique {i}: put-aside vertex {v} not a member"));
                }
                if let Some(inl) = self.inliers.get(&i) {
                    if !inl.contains(&v) {
                        fails.push(format!("clique {i}: put-aside vertex {v} not an inlier"));
                    }
                }
                owner.insert(v, i);
            }
        }
        for (&v, &i) in &owner {
            for u in g.neighbors(v) {
                if let Some(&j) = owner.get(&u) {
                    if j != i {
                        fails.push(format!(
                            "put-aside edge {v}-{u} crosses cliques {i} and {j}"
                        ));
                    }
                }
            }
        }
        fails
    }
}

// ---- reports -----------------------------------------------------------------

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SlackGenReport {
    pub rounds: u64,
    pub eligible: u64,
    pub activated: u64,
    pub colored: u64,
    pub per_clique_colored: Vec<u64>,
    /// Cliques of size ≥ 64 where more than |K|/10 members got colored.
    pub cap_violations: Vec<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase: String,
    pub rounds: u64,
    pub targets: u64,
    pub colored: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CmReport {
    pub clique: usize,
    /// "pairs" = stop at the pair target; "coverage" = greedy until enough
    /// members satisfy a_v ≤ M_K.
    pub mode: String,
    pub m_k: u64,
    pub target: u64,
    pub reached: bool,
    pub fallback_eligible: bool,
    pub rounds: u64,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SctReport {
    pub clique: usize,
    pub size: u64,
    pub colored: u64,
    pub leftover: u64,
    pub leftover_bound: u64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PutAsideReport {
    pub rounds: u64,
    pub attempts: u32,
    pub sizes: Vec<(usize, usize)>,
    /// True when every clique has at most |K|/100 members with neighbors in
    /// other cliques' put-aside sets.
    pub cross_clean: bool,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub phase: String,
    pub rounds_total: u64,
    pub colored_total: u64,
    /// Smallest |L_ψ(v) ∩ L_ψ(K)| / (e_K + a_K) over uncolored inliers.
    pub monitor_min: Option<f64>,
    pub count_degree_ok: bool,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DenseLog {
    pub rounds: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub cm: Vec<CmReport>,
    pub sct: Vec<SctReport>,
    pub flags: Vec<String>,
}

impl DenseLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dense log serializes")
    }
}

// ---- monitors ----------------------------------------------------------------

/// Smallest |L_ψ(v) ∩ L_ψ(K)| / (e_K + a_K) over the uncolored inliers of the
/// sampled cliques; None when no clique contributes a sample. Cliques with
/// e_K + a_K = 0 are skipped (their members keep a surplus trivially).
pub fn accounting_min_ratio(
    g: &MultiGraph,
    coloring: &PartialColoring,
    cliques: &[CliqueStats],
    samples: &[(usize, &BTreeSet<VertexId>)],
) -> Option<f64> {
    let mut min: Option<f64> = None;
    for &(i, inliers) in samples {
        let st = &cliques[i];
        let ea = slack_mass(st);
        if ea <= 0.0 {
            continue;
        }
        let cap = (st.delta_k + 1) as u32;
        let kfree: Vec<u32> = clique_palette(coloring, &st.members, cap)
            .iter()
            .map(|c| c.get())
            .collect();
        for &v in inliers.iter().filter(|&&v| !coloring.is_colored(v)) {
            let used = coloring.neighbor_colors(g, v);
            let pal = g.palette_size(v);
            let cnt = kfree
                .iter()
                .filter(|&&c| (c as u64) <= pal && !used.contains(&color(c)))
                .count();
            let ratio = cnt as f64 / ea;
            min = Some(min.map_or(ratio, |m: f64| m.min(ratio)));
        }
    }
    min
}

/// deg(v) + 1 = |K| + e_v − a_v for every clique member.
pub fn count_degree_ok(g: &MultiGraph, res: &AcdResult) -> bool {
    res.cliques.iter().all(|st| {
        let k = st.size() as i128;
        st.members.iter().all(|&v| match res.dense.get(&v) {
            Some(d) => {
                g.pseudo_degree(v) as i128 + 1 == k + d.e_v as i128 - d.a_v as i128
            }
            None => false,
        })
    })
}

/// No listed vertex holds a color in [reserved].
pub fn reserved_untouched(
    coloring: &PartialColoring,
    targets: &[VertexId],
    reserved: u64,
) -> bool {
    targets
        .iter()
        .all(|&v| coloring.get(v).map_or(true, |c| c.get() as u64 > reserved))
}

#[allow(clippy::too_many_arguments)]
fn push_checkpoint(
    log: &mut DenseLog,
    g: &MultiGraph,
    coloring: &PartialColoring,
    res: &AcdResult,
    state: &DensePhaseState,
    monitor_idxs: &[usize],
    rounds_total: u64,
    phase: &str,
    gamma: f64,
) {
    let samples: Vec<(usize, &BTreeSet<VertexId>)> = monitor_idxs
        .iter()
        .filter_map(|&i| state.inliers.get(&i).map(|s| (i, s)))
        .collect();
    let monitor_min = accounting_min_ratio(g, coloring, &res.cliques, &samples);
    let cd = count_degree_ok(g, res);
    let mut flags = Vec::new();
    if let Some(m) = monitor_min {
        if m < gamma {
            flags.push(format!("{phase}: accounting ratio {m:.4} below gamma {gamma}"));
        }
    }
    if !cd {
        flags.push(format!("{phase}: count-degree identity violated"));
    }
    log.flags.extend(flags.iter().cloned());
    log.checkpoints.push(Checkpoint {
        phase: phase.to_string(),
        rounds_total,
        colored_total: coloring.num_colored() as u64,
        monitor_min,
        count_degree_ok: cd,
        flags,
    });
}

// ---- slack generation --------------------------------------------------------

/// Vertices that take part in slack generation: uneven/sparse vertices plus
/// members of non-cabal cliques. Cabal and inaccurate vertices sit out.
pub fn slack_targets(res: &AcdResult) -> Vec<VertexId> {
    (0..res.class.len() as VertexId)
        .filter(|&v| match res.class_of(v) {
            VertexClass::Star => true,
            VertexClass::Dense(i) => !res.cliques[i as usize].cabal,
            _ => false,
        })
        .collect()
}

/// One-shot sparse coloring step. Every listed vertex activates with
/// probability 1/20, samples a uniform color above the reserved prefix from
/// its own palette, and keeps it unless a committed neighbor already holds it
/// or a trying neighbor of higher (pseudo-degree, id) rank picked the same
/// color. Vertices whose whole palette sits inside the reserve abstain.
pub fn generate_slack(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    v_sg: &[VertexId],
    r: u64,
    cliques: &[CliqueStats],
) -> Result<SlackGenReport, DenseError> {
    let g = sim.emb.h.clone();
    let mut report = SlackGenReport {
        per_clique_colored: vec![0; cliques.len()],
        ..SlackGenReport::default()
    };

    let mut proposal: BTreeMap<VertexId, u32> = BTreeMap::new();
    for &v in v_sg {
        if coloring.is_colored(v) {
            continue;
        }
        report.eligible += 1;
        let mut rng = sim.vertex_rng(TAG_SLACKGEN, &[], v);
        if !rng.gen_ratio(1, 20) {
            continue;
        }
        report.activated += 1;
        let pdeg = g.pseudo_degree(v);
        if pdeg <= r {
            continue; // palette does not reach past the reserve
        }
        let cs = ColorSpace::range(r as u32 + 1, pdeg as u32 + 1);
        proposal.insert(v, cs.sample(&mut rng).unwrap());
    }

    let w = sim.color_bits();
    let bitems: Vec<(VertexId, u64)> = proposal.keys().map(|&v| (v, w)).collect();
    report.rounds += sim.bcast(&bitems)?;

    // u blocks v's color when u outranks v; the rank order is total, so no
    // two adjacent survivors share a color.
    let rank = |v: VertexId| (g.pseudo_degree(v), v);
    let mut keep: Vec<(VertexId, Color)> = Vec::new();
    for (&v, &c) in &proposal {
        let mut ok = true;
        for u in g.neighbors(v) {
            if coloring.get(u) == Some(color(c))
                || (rank(u) >= rank(v) && proposal.get(&u) == Some(&c))
            {
                ok = false;
                break;
            }
        }
        if ok {
            keep.push((v, color(c)));
        }
    }
    let aitems: Vec<(VertexId, u64)> = proposal.keys().map(|&v| (v, 1)).collect();
    report.rounds += sim.agg(&aitems)?;
    report.rounds += sim.commit(coloring, &keep)?;
    report.colored = keep.len() as u64;

    let owner: BTreeMap<VertexId, usize> = cliques
        .iter()
        .enumerate()
        .flat_map(|(i, st)| st.members.iter().map(move |&v| (v, i)))
        .collect();
    for &(v, _) in &keep {
        if let Some(&i) = owner.get(&v) {
            report.per_clique_colored[i] += 1;
        }
    }
    for (i, st) in cliques.iter().enumerate() {
        let k = st.size() as u64;
        if k >= 64 && report.per_clique_colored[i] * 10 > k {
            report.cap_violations.push(i);
        }
    }
    Ok(report)
}

// ---- generic reserved-complement finish ---------------------------------------

fn rct_then_mct(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    targets: &[VertexId],
    space: &dyn Fn(VertexId) -> ColorSpace,
    params: &DenseParams,
    phase: &'static str,
    scope: &[u64],
) -> Result<u64, DenseError> {
    let mut rounds = 0;
    for it in 0..params.rct_rounds {
        let out = random_color_trial(
            sim,
            coloring,
            targets,
            space,
            &[scope, &[it as u64]].concat(),
        )?;
        rounds += out.rounds;
    }
    let out = multicolor_trial(
        sim,
        coloring,
        targets,
        space,
        params.mct_phase_cap,
        params.mct_x_max,
        scope,
    )?;
    rounds += out.rounds;
    if let MctVerdict::Failed { witness, .. } = out.verdict {
        return Err(DenseError::Mct { phase, witness });
    }
    Ok(rounds)
}

fn color_reserved_complement(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    targets: &[VertexId],
    reserved: u64,
    params: &DenseParams,
    phase: &'static str,
    scope: &[u64],
) -> Result<PhaseReport, DenseError> {
    let mut report = PhaseReport {
        phase: phase.to_string(),
        targets: targets.len() as u64,
        ..PhaseReport::default()
    };
    if targets.is_empty() {
        return Ok(report);
    }
    let g = sim.emb.h.clone();
    let before = targets.iter().filter(|&&v| coloring.is_colored(v)).count();
    let space = |v: VertexId| ColorSpace::range(reserved as u32 + 1, g.palette_size(v) as u32);
    report.rounds = rct_then_mct(sim, coloring, targets, &space, params, phase, scope)?;
    let after = targets.iter().filter(|&&v| coloring.is_colored(v)).count();
    report.colored = (after - before) as u64;
    Ok(report)
}

/// Colors the uneven/sparse vertices with their reserve-free palettes.
/// Postconditions checked: every target colored above the reserve and no
/// other vertex's color touched.
pub fn color_vstar(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    vstar: &[VertexId],
    params: &DenseParams,
) -> Result<PhaseReport, DenseError> {
    if vstar.is_empty() {
        return Ok(PhaseReport { phase: "vstar".to_string(), ..PhaseReport::default() });
    }
    let n = sim.emb.h.num_vertices();
    let before: Vec<Option<Color>> = (0..n as VertexId).map(|v| coloring.get(v)).collect();
    let report = color_reserved_complement(
        sim,
        coloring,
        vstar,
        params.r,
        params,
        "vstar",
        &[SCOPE_VSTAR],
    )?;
    let targets: BTreeSet<VertexId> = vstar.iter().copied().collect();
    for v in 0..n as VertexId {
        if targets.contains(&v) {
            let c = coloring.get(v).expect("uneven/sparse vertex left uncolored");
            assert!(c.get() as u64 > params.r, "reserved color leaked into vstar");
        } else {
            assert_eq!(before[v as usize], coloring.get(v), "vstar touched vertex {v}");
        }
    }
    Ok(report)
}

/// Colors leftover outliers against the temporary slack of their uncolored
/// inlier neighbors, avoiding the reserved prefix.
pub fn color_outliers(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    outliers: &[VertexId],
    reserved: u64,
    params: &DenseParams,
    scope: &[u64],
) -> Result<PhaseReport, DenseError> {
    color_reserved_complement(
        sim,
        coloring,
        outliers,
        reserved,
        params,
        "outliers",
        &[&[SCOPE_OUTLIER], scope].concat(),
    )
}

/// Colors inaccurate vertices over their full palettes; edge multiplicity
/// keeps Ω(deg) colors permanently free for them.
pub fn color_inaccurate(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    v_in: &[VertexId],
    params: &DenseParams,
) -> Result<PhaseReport, DenseError> {
    let mut report = color_reserved_complement(
        sim,
        coloring,
        v_in,
        0,
        params,
        "inaccurate",
        &[SCOPE_INACC],
    )?;
    report.phase = "inaccurate".to_string();
    Ok(report)
}

// ---- colorful matching ---------------------------------------------------------

fn clique_used_colors(coloring: &PartialColoring, members: &[VertexId]) -> BTreeSet<u32> {
    members.iter().filter_map(|&v| coloring.get(v)).map(|c| c.get()).collect()
}

/// Commits a batch of same-colored anti-pairs after handler-side conflict
/// checks; returns the surviving pair count.
fn commit_pairs(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    g: &MultiGraph,
    pairs: &[(VertexId, VertexId, u32)],
    rounds: &mut u64,
    flags: &mut Vec<String>,
) -> Result<u64, DenseError> {
    let w = sim.color_bits();
    let bitems: Vec<(VertexId, u64)> = pairs
        .iter()
        .flat_map(|&(u, v, _)| [(u, w), (v, w)])
        .collect();
    *rounds += sim.bcast(&bitems)?;

    let mut keep: Vec<(VertexId, Color)> = Vec::new();
    let mut kept_pairs = 0;
    for &(u, v, c) in pairs {
        if (c as u64) > g.palette_size(u) || (c as u64) > g.palette_size(v) {
            flags.push(format!("pair ({u},{v}) skipped: color {c} above a palette"));
            continue;
        }
        let blocked = g
            .neighbors(u)
            .chain(g.neighbors(v))
            .any(|x| coloring.get(x) == Some(color(c)));
        if blocked {
            continue;
        }
        keep.push((u, color(c)));
        keep.push((v, color(c)));
        kept_pairs += 1;
    }
    let aitems: Vec<(VertexId, u64)> = pairs
        .iter()
        .flat_map(|&(u, v, _)| [(u, 1), (v, 1)])
        .collect();
    *rounds += sim.agg(&aitems)?;
    *rounds += sim.commit(coloring, &keep)?;
    Ok(kept_pairs)
}

/// Colorful matching: colors disjoint anti-pairs (non-adjacent member pairs)
/// of K with one fresh shared color each, drawn from the middle band
/// [max(⌈|K|/10⌉, reserved+1), (1−2ε)|K|]. Stops at the pair target
/// ⌈a_K/(4ε)⌉ or when the budget runs out (flagged). Each surviving pair
/// saves exactly one color: |ψ(K)| grows by the matching size.
pub fn colorful_matching(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    st: &CliqueStats,
    clique_idx: usize,
    reserved: u64,
    params: &DenseParams,
) -> Result<CmReport, DenseError> {
    let g = sim.emb.h.clone();
    let k = st.size() as u64;
    let num = *params.epsilon.numer();
    let den = *params.epsilon.denom();
    let target = ceil_div(st.a_sum.max(0) as i128 * den, 4 * num * k as i128) as u64;

    let mut report = CmReport {
        clique: clique_idx,
        mode: "pairs".to_string(),
        target,
        reached: target == 0,
        ..CmReport::default()
    };
    if target == 0 {
        return Ok(report);
    }
    let lo = (k.div_ceil(10)).max(reserved + 1) as u32;
    let hi = ((k as i128 * (den - 2 * num)) / den) as u32;
    if lo > hi {
        report.flags.push("matching color band is empty at this scale".to_string());
        return Ok(report);
    }

    let comms = CliqueComms::new(&g, &st.members, clique_idx)?;
    let idw = field_bits(g.num_vertices() as u64);
    let distinct_before = clique_used_colors(coloring, &st.members).len() as u64;

    for iter in 0..params.cm_rounds {
        if report.m_k >= target {
            break;
        }
        let unc: Vec<VertexId> = st
            .members
            .iter()
            .copied()
            .filter(|&v| !coloring.is_colored(v))
            .collect();

        // Leader packs disjoint anti-pairs over a shared shuffle and deals
        // each pair a fresh color from the band.
        let seed = sim.shared_seed(TAG_CM, &[clique_idx as u64, iter as u64]);
        let mut rng = rng_from_scope(&[seed]);
        let mut order = unc;
        order.shuffle(&mut rng);
        let used_c = clique_used_colors(coloring, &st.members);
        let mut free: Vec<u32> = (lo..=hi).filter(|c| !used_c.contains(c)).collect();

        let mut taken: BTreeSet<VertexId> = BTreeSet::new();
        let mut pairs: Vec<(VertexId, VertexId, u32)> = Vec::new();
        for i in 0..order.len() {
            let u = order[i];
            if taken.contains(&u) || free.is_empty() {
                continue;
            }
            for j in i + 1..order.len() {
                let v = order[j];
                if taken.contains(&v) || g.has_edge(u, v) {
                    continue;
                }
                let c = free.swap_remove(rng.gen_range(0..free.len()));
                taken.insert(u);
                taken.insert(v);
                pairs.push((u, v, c));
                break;
            }
        }

        report.rounds += comms.gather(sim, idw)?;
        report.rounds += comms.scatter(sim, idw + sim.color_bits())?;
        if pairs.is_empty() {
            report.flags.push(format!("iteration {iter}: no usable anti-pairs left"));
            break;
        }
        report.m_k += commit_pairs(
            sim,
            coloring,
            &g,
            &pairs,
            &mut report.rounds,
            &mut report.flags,
        )?;
    }

    report.reached = report.m_k >= target;
    if !report.reached {
        report.flags.push("matching budget exhausted below target".to_string());
    }
    report.fallback_eligible = (report.m_k as i128) * den >= 2 * num * (k as i128);
    let distinct_after = clique_used_colors(coloring, &st.members).len() as u64;
    assert_eq!(
        distinct_after,
        distinct_before + report.m_k,
        "matching must save exactly one color per pair"
    );
    Ok(report)
}

/// Greedy matching variant for cliques with tiny anti-degree mass: keeps
/// adding anti-pairs until enough members satisfy a_v ≤ M_K, where M_K is
/// the number of pairs placed so far.
fn greedy_clique_matching(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    res: &AcdResult,
    st: &CliqueStats,
    clique_idx: usize,
    reserved: u64,
    params: &DenseParams,
) -> Result<CmReport, DenseError> {
    let g = sim.emb.h.clone();
    let k = st.size() as u64;
    let num = *params.epsilon.numer();
    let den = *params.epsilon.denom();
    let cover_target =
        ceil_div(k as i128 * (den - params.cm_cover_mult as i128 * num).max(0), den) as u64;

    let mut report = CmReport {
        clique: clique_idx,
        mode: "coverage".to_string(),
        target: cover_target,
        ..CmReport::default()
    };
    let covered = |m: u64| {
        st.members
            .iter()
            .filter(|&&v| res.dense[&v].a_v <= m as i64)
            .count() as u64
    };
    if covered(0) >= cover_target {
        report.reached = true;
        return Ok(report);
    }

    let lo = (k.div_ceil(10)).max(reserved + 1) as u32;
    let hi = ((k as i128 * (den - 2 * num)) / den) as u32;
    if lo > hi {
        report.flags.push("matching color band is empty at this scale".to_string());
        return Ok(report);
    }
    let comms = CliqueComms::new(&g, &st.members, clique_idx)?;
    let idw = field_bits(g.num_vertices() as u64);

    for iter in 0..k {
        if covered(report.m_k) >= cover_target {
            break;
        }
        let unc: Vec<VertexId> = st
            .members
            .iter()
            .copied()
            .filter(|&v| !coloring.is_colored(v))
            .collect();
        // Lowest-id usable anti-pair.
        let mut pick: Option<(VertexId, VertexId)> = None;
        'outer: for (i, &u) in unc.iter().enumerate() {
            for &v in &unc[i + 1..] {
                if !g.has_edge(u, v) {
                    pick = Some((u, v));
                    break 'outer;
                }
            }
        }
        let used_c = clique_used_colors(coloring, &st.members);
        let free: Vec<u32> = (lo..=hi).filter(|c| !used_c.contains(c)).collect();
        report.rounds += comms.gather(sim, idw)?;
        report.rounds += comms.scatter(sim, idw + sim.color_bits())?;
        let (u, v) = match pick {
            Some(p) => p,
            None => {
                report.flags.push("greedy matching ran out of anti-pairs".to_string());
                break;
            }
        };
        if free.is_empty() {
            report.flags.push("greedy matching ran out of band colors".to_string());
            break;
        }
        let seed = sim.shared_seed(TAG_CM, &[clique_idx as u64, iter]);
        let mut rng = rng_from_scope(&[seed]);
        let c = free[rng.gen_range(0..free.len())];
        report.m_k += commit_pairs(
            sim,
            coloring,
            &g,
            &[(u, v, c)],
            &mut report.rounds,
            &mut report.flags,
        )?;
    }

    report.reached = covered(report.m_k) >= cover_target;
    if !report.reached {
        report.flags.push("greedy matching stopped below coverage target".to_string());
    }
    Ok(report)
}

// ---- synchronized color trial ---------------------------------------------------

#[derive(Clone, Debug)]
pub struct SctEntry {
    pub clique_idx: usize,
    pub s_k: Vec<VertexId>,
    pub reserved: u64,
}

/// Synchronized color trial, run jointly across cliques. Per clique, the
/// leader draws a uniform permutation π and vertex v_i tries the π(i)-th
/// free color of [Δ_{I_K}+1] ∖ (ψ(K) ∪ [reserved]); a try is kept iff the
/// color lies in the vertex's own palette, no committed neighbor holds it,
/// and no neighbor anywhere tried the same color this round. Within one
/// clique all tries are distinct by construction.
pub fn synchronized_color_trial(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    entries: &[SctEntry],
    cliques: &[CliqueStats],
    params: &DenseParams,
) -> Result<(Vec<SctReport>, u64), DenseError> {
    let g = sim.emb.h.clone();
    let n = g.num_vertices();
    let idw = field_bits(n as u64);
    let logn = log2n(n);
    let alpha_num = *params.alpha.numer();
    let alpha_den = *params.alpha.denom();
    let mut rounds = 0;
    let mut proposal: BTreeMap<VertexId, u32> = BTreeMap::new();

    for e in entries {
        let st = &cliques[e.clique_idx];
        let k = st.size() as u64;
        let cap = (st.delta_ik + 1) as u32;
        let used = clique_used_colors(coloring, &st.members);
        let free: Vec<u32> = (e.reserved as u32 + 1..=cap)
            .filter(|c| !used.contains(c))
            .collect();
        if free.len() < e.s_k.len() {
            return Err(DenseError::Precondition(format!(
                "clique {}: trial set of {} exceeds {} free colors",
                e.clique_idx,
                e.s_k.len(),
                free.len()
            )));
        }
        if (e.s_k.len() as i128) * alpha_den < alpha_num * k as i128 {
            return Err(DenseError::Precondition(format!(
                "clique {}: trial set of {} below alpha fraction of |K| = {k}",
                e.clique_idx,
                e.s_k.len()
            )));
        }
        if let Some(&v) = e.s_k.iter().find(|&&v| coloring.is_colored(v)) {
            return Err(DenseError::Precondition(format!(
                "clique {}: trial vertex {v} is already colored",
                e.clique_idx
            )));
        }

        let seed = sim.shared_seed(TAG_SCT, &[e.clique_idx as u64]);
        let mut rng = rng_from_scope(&[seed]);
        let mut perm: Vec<usize> = (0..e.s_k.len()).collect();
        perm.shuffle(&mut rng);
        let mut sorted = e.s_k.clone();
        sorted.sort_unstable();
        for (i, &v) in sorted.iter().enumerate() {
            proposal.insert(v, free[perm[i]]);
        }

        // Leader coordination: ids up, permutation ranks down.
        let comms = CliqueComms::new(&g, &st.members, e.clique_idx)?;
        rounds += comms.gather(sim, idw)?;
        rounds += comms.scatter(sim, field_bits(free.len() as u64).max(1))?;
    }

    let w = sim.color_bits();
    let bitems: Vec<(VertexId, u64)> = proposal.keys().map(|&v| (v, w)).collect();
    rounds += sim.bcast(&bitems)?;

    let mut keep: Vec<(VertexId, Color)> = Vec::new();
    for (&v, &c) in &proposal {
        if (c as u64) > g.palette_size(v) {
            continue;
        }
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

    let mut reports = Vec::with_capacity(entries.len());
    for e in entries {
        let st = &cliques[e.clique_idx];
        let colored = e.s_k.iter().filter(|&&v| coloring.is_colored(v)).count() as u64;
        let leftover = e.s_k.len() as u64 - colored;
        let alpha = alpha_num as f64 / alpha_den as f64;
        let bound =
            ((500.0 / alpha) * slack_mass(st) + params.sct_leftover_c * logn).ceil() as u64;
        reports.push(SctReport {
            clique: e.clique_idx,
            size: e.s_k.len() as u64,
            colored,
            leftover,
            leftover_bound: bound,
            within_bound: leftover <= bound,
        });
    }
    Ok((reports, rounds))
}

// ---- put-aside sets ---------------------------------------------------------------

/// Builds one put-aside set of exactly r' + ℓ uncolored inliers per cabal,
/// with no edges between different cabals' sets: candidates are sampled,
/// handler-detected cross-cabal candidate edges eliminate both endpoints,
/// and the lowest ids among the survivors are kept. Resamples up to 3 times.
pub fn compute_put_aside(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    state: &mut DensePhaseState,
    cabal_idxs: &[usize],
    cliques: &[CliqueStats],
    params: &DenseParams,
) -> Result<PutAsideReport, DenseError> {
    let g = sim.emb.h.clone();
    let want = (params.r_prime + params.ell) as usize;
    let mut report = PutAsideReport { cross_clean: true, ..PutAsideReport::default() };

    for attempt in 0..3u32 {
        report.attempts = attempt + 1;
        let mut cand: BTreeMap<VertexId, usize> = BTreeMap::new();
        for &ci in cabal_idxs {
            let k = cliques[ci].size();
            let p = (params.c_pa * want as f64 / k as f64).min(1.0);
            let inl = state
                .inliers
                .get(&ci)
                .cloned()
                .unwrap_or_else(|| cliques[ci].inliers.iter().copied().collect());
            for &v in inl.iter().filter(|&&v| !coloring.is_colored(v)) {
                let mut rng = sim.vertex_rng(TAG_PA, &[attempt as u64], v);
                if rng.gen_bool(p) {
                    cand.insert(v, ci);
                }
            }
        }
        // Candidates announce themselves; handlers report cross-cabal hits.
        let bitems: Vec<(VertexId, u64)> = cand.keys().map(|&v| (v, 1)).collect();
        report.rounds += sim.bcast(&bitems)?;
        report.rounds += sim.agg(&bitems)?;

        let survivors: BTreeMap<VertexId, usize> = cand
            .iter()
            .filter(|&(&v, &ci)| {
                !g.neighbors(v).any(|u| cand.get(&u).is_some_and(|&cj| cj != ci))
            })
            .map(|(&v, &ci)| (v, ci))
            .collect();

        let mut sets: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
        for (&v, &ci) in &survivors {
            sets.entry(ci).or_default().push(v);
        }
        let enough = cabal_idxs
            .iter()
            .all(|&ci| sets.get(&ci).map_or(0, |s| s.len()) >= want);
        if !enough {
            report
                .flags
                .push(format!("attempt {attempt}: a cabal fell short of {want} survivors"));
            continue;
        }
        for &ci in cabal_idxs {
            let mut s = sets.remove(&ci).unwrap();
            s.sort_unstable();
            s.truncate(want);
            report.sizes.push((ci, s.len()));
            state.put_aside.insert(ci, s);
        }

        // Cross-set edges are impossible by construction; the softer measure
        // below counts members with neighbors in other cliques' sets.
        let owner: BTreeMap<VertexId, usize> = state
            .put_aside
            .iter()
            .flat_map(|(&ci, s)| s.iter().map(move |&v| (v, ci)))
            .collect();
        for &ci in cabal_idxs {
            let k = cliques[ci].size() as u64;
            let touched = cliques[ci]
                .members
                .iter()
                .filter(|&&v| {
                    g.neighbors(v).any(|u| owner.get(&u).is_some_and(|&cj| cj != ci))
                })
                .count() as u64;
            if touched * 100 > k {
                report.cross_clean = false;
                report.flags.push(format!(
                    "clique {ci}: {touched} members see other put-aside sets (cap |K|/100)"
                ));
            }
        }
        let fails = state.validate(&g, coloring, cliques);
        if !fails.is_empty() {
            return Err(DenseError::PutAside(fails.join("; ")));
        }
        return Ok(report);
    }
    Err(DenseError::PutAside(format!(
        "no attempt yielded {want} independent candidates per cabal: {}",
        report.flags.join("; ")
    )))
}

// ---- non-cabal orchestrator ----------------------------------------------------------

fn clique_comms_map(
    g: &MultiGraph,
    cliques: &[CliqueStats],
    idxs: &[usize],
) -> Result<BTreeMap<usize, CliqueComms>, TrialError> {
    let mut map = BTreeMap::new();
    for &i in idxs {
        map.insert(i, CliqueComms::new(g, &cliques[i].members, i)?);
    }
    Ok(map)
}

/// Colors every non-cabal clique: colorful matchings where the anti-degree
/// mass warrants one, outlier cleanup, the synchronized trial over the
/// clique palette, random trials and slice coloring on the residue, and a
/// layered reserved-color finish. Cliques whose matching went past 2ε|K| (or
/// whose budget ran dry) take the direct reserve-free finish instead.
pub fn color_non_cabals(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    res: &AcdResult,
    params: &DenseParams,
) -> Result<DenseLog, DenseError> {
    let g = sim.emb.h.clone();
    let n = g.num_vertices();
    let logn = log2n(n);
    let base_rounds = sim.net.rounds();
    let idxs: Vec<usize> = res
        .cliques
        .iter()
        .enumerate()
        .filter(|(_, st)| !st.cabal)
        .map(|(i, _)| i)
        .collect();
    let mut log = DenseLog::default();
    if idxs.is_empty() {
        return Ok(log);
    }

    let mut state = DensePhaseState {
        r: params.r,
        r_prime: params.r_prime,
        ell: params.ell,
        ..DensePhaseState::default()
    };
    for &i in &idxs {
        state
            .inliers
            .insert(i, res.cliques[i].inliers.iter().copied().collect());
        let members = &res.cliques[i].members;
        if !reserved_untouched(coloring, members, params.r) {
            return Err(DenseError::Precondition(format!(
                "clique {i} already holds a reserved color"
            )));
        }
    }

    // Step 1: colorful matchings on anti-degree-heavy cliques.
    let mut fallback: BTreeSet<usize> = BTreeSet::new();
    for &i in &idxs {
        let st = &res.cliques[i];
        let k = st.size() as f64;
        if (st.a_sum.max(0) as f64) < params.cm_threshold_c * logn * k {
            continue;
        }
        let rep = colorful_matching(sim, coloring, st, i, params.r, params)?;
        state.m_k.insert(i, rep.m_k);
        if rep.fallback_eligible || !rep.reached {
            fallback.insert(i);
            log.flags.push(format!(
                "clique {i}: direct finish ({})",
                if rep.fallback_eligible { "matching above 2eps|K|" } else { "budget exhausted" }
            ));
        }
        log.cm.push(rep);
    }
    let live: Vec<usize> = idxs.iter().copied().filter(|i| !fallback.contains(i)).collect();
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &live,
        sim.net.rounds(), "colorful-matching", params.gamma_acct,
    );

    // Step 2: outliers, all non-cabal cliques at once.
    let mut outliers: Vec<VertexId> = Vec::new();
    for &i in &idxs {
        let st = &res.cliques[i];
        let inl = &state.inliers[&i];
        let out: Vec<VertexId> = st
            .members
            .iter()
            .copied()
            .filter(|v| !inl.contains(v) && !coloring.is_colored(*v))
            .collect();
        if out.len() * 10 > st.size() {
            log.flags.push(format!(
                "clique {i}: outlier count {} above |K|/10",
                out.len()
            ));
        }
        outliers.extend(out);
    }
    color_outliers(sim, coloring, &outliers, params.r, params, &[0])?;
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &live,
        sim.net.rounds(), "outliers", params.gamma_acct,
    );

    // Fallback cliques: enough slack for the direct reserve-free finish.
    let fb_targets: Vec<VertexId> = fallback
        .iter()
        .flat_map(|&i| res.cliques[i].members.iter().copied())
        .filter(|&v| !coloring.is_colored(v))
        .collect();
    if !fb_targets.is_empty() {
        color_reserved_complement(
            sim, coloring, &fb_targets, params.r, params, "matching-fallback",
            &[SCOPE_FALLBACK],
        )?;
    }

    // Step 3: synchronized trial per clique.
    let slack = (params.sct_slack_c * logn).ceil() as i64;
    let mut entries: Vec<SctEntry> = Vec::new();
    for &i in &live {
        let st = &res.cliques[i];
        let k = st.size() as u64;
        let unc_members =
            st.members.iter().filter(|&&v| !coloring.is_colored(v)).count() as i64;
        let cap = (st.delta_ik + 1) as u32;
        let used = clique_used_colors(coloring, &st.members);
        let free_k = (1..=cap).filter(|c| !used.contains(c)).count() as i64;
        if free_k < unc_members - slack {
            log.flags.push(format!(
                "clique {i}: palette deficit at trial entry ({free_k} < {unc_members} - {slack})"
            ));
        }
        let goal = unc_members - params.r as i64 - slack;
        let unc_inl: Vec<VertexId> = state.inliers[&i]
            .iter()
            .copied()
            .filter(|&v| !coloring.is_colored(v))
            .collect();
        let take = goal.clamp(0, unc_inl.len() as i64) as usize;
        let alpha_ok = (take as i128) * *params.alpha.denom()
            >= *params.alpha.numer() * k as i128;
        if !alpha_ok {
            log.flags.push(format!("clique {i}: trial set below alpha, skipped"));
            continue;
        }
        let s: Vec<VertexId> = unc_inl[..take].to_vec();
        state.s_k.insert(i, s.clone());
        entries.push(SctEntry { clique_idx: i, s_k: s, reserved: params.r });
    }
    let (reps, _) = synchronized_color_trial(sim, coloring, &entries, &res.cliques, params)?;
    for rep in &reps {
        if !rep.within_bound {
            log.flags.push(format!(
                "clique {}: trial leftover {} above bound {}",
                rep.clique, rep.leftover, rep.leftover_bound
            ));
        }
    }
    log.sct = reps;
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &live,
        sim.net.rounds(), "synchronized-trial", params.gamma_acct,
    );

    // Step 4: random trials over the clique palette above the reserve.
    let comms = clique_comms_map(&g, &res.cliques, &live)?;
    for it in 0..params.rct_rounds {
        let mut targets: Vec<VertexId> = Vec::new();
        let mut spaces: BTreeMap<VertexId, ColorSpace> = BTreeMap::new();
        for &i in &live {
            let st = &res.cliques[i];
            let cap = st.delta_k + 1;
            let used = clique_used_colors(coloring, &st.members);
            let cm = &comms[&i];
            // Leader bitmap up and back down: palette refresh.
            let _ = cm.gather(sim, cap)?;
            let _ = cm.scatter(sim, cap)?;
            for &v in &st.members {
                if coloring.is_colored(v) {
                    continue;
                }
                let hi = cap.min(g.palette_size(v)) as u32;
                spaces.insert(
                    v,
                    ColorSpace::range_minus(params.r as u32 + 1, hi, used.iter().copied()),
                );
                targets.push(v);
            }
        }
        if targets.is_empty() {
            break;
        }
        random_color_trial(
            sim,
            coloring,
            &targets,
            &|v| spaces[&v].clone(),
            &[SCOPE_PALETTE_RCT, it as u64],
        )?;
    }
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &live,
        sim.net.rounds(), "palette-trials", params.gamma_acct,
    );

    // Step 5: slice coloring on the residue.
    let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut targets: Vec<VertexId> = Vec::new();
    for &i in &live {
        for &v in &res.cliques[i].members {
            if !coloring.is_colored(v) {
                owner.insert(v, i);
                targets.push(v);
            }
        }
    }
    let dmap: BTreeMap<VertexId, u64> = targets
        .iter()
        .map(|&v| {
            let ea = slack_mass(&res.cliques[owner[&v]]);
            (v, (((params.gamma_acct / 10.0) * ea).ceil() as u64).max(1))
        })
        .collect();
    for &v in &targets {
        let i = owner[&v];
        let st = &res.cliques[i];
        let ea = slack_mass(st);
        let need = (params.gamma_acct / 10.0) * ea + (params.gamma_acct / 4.0) * ea;
        let cap = (st.delta_k + 1) as u32;
        let kfree = clique_palette(coloring, &st.members, cap);
        let used = coloring.neighbor_colors(&g, v);
        let support = kfree
            .iter()
            .filter(|c| {
                c.get() as u64 > params.r
                    && (c.get() as u64) <= g.palette_size(v)
                    && !used.contains(c)
            })
            .count() as f64;
        if support < need {
            log.flags.push(format!(
                "vertex {v}: sampler support {support} below d+s = {need:.2}"
            ));
        }
    }
    let nominal = ((params.sampler_c * logn).ceil() as u64).max(1);
    let g2 = g.clone();
    let owner2 = owner.clone();
    let cliques2 = res.cliques.clone();
    let r = params.r;
    let mut sampler = move |sim: &mut Sim,
                            coloring: &PartialColoring,
                            active: &[VertexId],
                            iter: u32|
          -> Result<Vec<(VertexId, Option<Color>)>, TrialError> {
        let mut by_clique: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
        for &v in active {
            by_clique.entry(owner2[&v]).or_default().push(v);
        }
        let mut out = Vec::with_capacity(active.len());
        for (&i, verts) in &by_clique {
            let st = &cliques2[i];
            let cap = (st.delta_k + 1) as u32;
            let cm = CliqueComms::new(&g2, &st.members, i)?;
            let _ = cm.gather(sim, cap as u64)?;
            let _ = cm.scatter(sim, cap as u64)?;
            let used: BTreeSet<u32> = clique_used_colors(coloring, &st.members);
            // The hash filter only caps the shipped palette; when the free
            // palette is already below the nominal width the leader ships
            // it whole.
            let free_cnt =
                (r as u32 + 1..=cap).filter(|c| !used.contains(c)).count() as u64;
            let threshold =
                if free_cnt <= nominal { 2 * cap as u64 } else { nominal };
            let sampler = CliquePalSampler {
                cap,
                reserved: r as u32,
                shared_seed: sim.shared_seed(TAG_SAMPLER, &[i as u64, iter as u64]),
                threshold,
            };
            for &v in verts {
                let mut rng = sim.vertex_rng(TAG_SAMPLER, &[iter as u64], v);
                out.push((v, sampler.sample(&g2, coloring, &used, v, &mut rng)));
            }
        }
        Ok(out)
    };
    let (layers, _) = slice_color(
        sim,
        coloring,
        &targets,
        &|v| dmap[&v],
        params.slice_iterations,
        &mut sampler,
    )?;
    let worst = layers.worst_upward_degree(&g, coloring);
    if worst as f64 > params.c_layer * logn {
        log.flags.push(format!("slice: upward degree {worst} above budget"));
    }
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &live,
        sim.net.rounds(), "slice", params.gamma_acct,
    );

    // Step 6: layered finish over the reserve, top layer first. The reserve
    // must be untouched up to here.
    let all_members: Vec<VertexId> = idxs
        .iter()
        .flat_map(|&i| res.cliques[i].members.iter().copied())
        .collect();
    assert!(
        reserved_untouched(coloring, &all_members, params.r),
        "a reserved color leaked before the layered finish"
    );
    for i in (1..=layers.num_layers()).rev() {
        let mem: Vec<VertexId> = layers
            .members_of(i)
            .into_iter()
            .filter(|&v| !coloring.is_colored(v))
            .collect();
        if mem.is_empty() {
            continue;
        }
        let out = multicolor_trial(
            sim,
            coloring,
            &mem,
            &|_| ColorSpace::range(1, params.r as u32),
            params.mct_phase_cap,
            params.mct_x_max,
            &[SCOPE_LAYER, i as u64],
        )?;
        if let MctVerdict::Failed { witness, .. } = out.verdict {
            return Err(DenseError::Mct { phase: "layered-finish", witness });
        }
    }
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &live,
        sim.net.rounds(), "layered-finish", params.gamma_acct,
    );

    for &v in &all_members {
        assert!(coloring.is_colored(v), "non-cabal vertex {v} left uncolored");
    }
    log.rounds = sim.net.rounds() - base_rounds;
    Ok(log)
}

// ---- cabal orchestrator ---------------------------------------------------------------

/// Colors every cabal: a matching step (pair-target mode when the anti-degree
/// mass is large, greedy coverage mode otherwise), outlier cleanup, put-aside
/// set construction, the synchronized trial on the rest, slice coloring, the
/// layered finish over the cabal reserve, and finally the put-aside sets from
/// the leftover clique palette.
pub fn color_cabals(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    res: &AcdResult,
    params: &DenseParams,
) -> Result<DenseLog, DenseError> {
    let g = sim.emb.h.clone();
    let n = g.num_vertices();
    let logn = log2n(n);
    let base_rounds = sim.net.rounds();
    let idxs: Vec<usize> = res
        .cliques
        .iter()
        .enumerate()
        .filter(|(_, st)| st.cabal)
        .map(|(i, _)| i)
        .collect();
    let mut log = DenseLog::default();
    if idxs.is_empty() {
        return Ok(log);
    }
    for &i in &idxs {
        if let Some(&v) = res.cliques[i].members.iter().find(|&&v| coloring.is_colored(v)) {
            return Err(DenseError::Precondition(format!(
                "cabal {i} member {v} colored before the cabal phase"
            )));
        }
    }

    let mut state = DensePhaseState {
        r: params.r,
        r_prime: params.r_prime,
        ell: params.ell,
        ..DensePhaseState::default()
    };

    // Step 1: matching, mode picked by anti-degree mass.
    for &i in &idxs {
        let st = &res.cliques[i];
        let k = st.size() as f64;
        let heavy = (st.a_sum.max(0) as f64) >= params.cm_threshold_c * logn * k;
        let rep = if heavy {
            colorful_matching(sim, coloring, st, i, params.r_prime, params)?
        } else {
            greedy_clique_matching(sim, coloring, res, st, i, params.r_prime, params)?
        };
        state.m_k.insert(i, rep.m_k);
        log.cm.push(rep);
    }

    // Inliers under the cabal rule: bounded external degree and, in coverage
    // mode, anti-degree within the matching size.
    for &i in &idxs {
        let st = &res.cliques[i];
        let k = st.size();
        let heavy = (st.a_sum.max(0) as f64) >= params.cm_threshold_c * logn * k as f64;
        let m = state.m_k[&i];
        let inl: BTreeSet<VertexId> = st
            .members
            .iter()
            .copied()
            .filter(|&v| {
                let d = &res.dense[&v];
                let e_ok = (d.e_v as i128) * k as i128 <= 20 * st.e_sum as i128;
                let a_ok = if heavy {
                    (d.a_v as i128) * k as i128 <= 20 * st.a_sum.max(0) as i128
                } else {
                    d.a_v <= m as i64
                };
                e_ok && a_ok
            })
            .collect();
        let eps = *params.epsilon.numer() as f64 / *params.epsilon.denom() as f64;
        if (inl.len() as f64) < (0.95 - 10.0 * eps) * k as f64 {
            log.flags.push(format!(
                "cabal {i}: only {} inliers of {k} under the matching rule",
                inl.len()
            ));
        }
        state.inliers.insert(i, inl);
    }
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &idxs,
        sim.net.rounds(), "cabal-matching", params.gamma_acct,
    );

    // Step 2: outliers over the cabal reserve.
    let mut outliers: Vec<VertexId> = Vec::new();
    for &i in &idxs {
        let st = &res.cliques[i];
        let inl = &state.inliers[&i];
        let out: Vec<VertexId> = st
            .members
            .iter()
            .copied()
            .filter(|v| !inl.contains(v) && !coloring.is_colored(*v))
            .collect();
        if out.len() * 10 > st.size() {
            log.flags.push(format!("cabal {i}: outlier count {} above |K|/10", out.len()));
        }
        outliers.extend(out);
    }
    color_outliers(sim, coloring, &outliers, params.r_prime, params, &[1])?;
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &idxs,
        sim.net.rounds(), "cabal-outliers", params.gamma_acct,
    );

    // Step 3: put-aside sets.
    let pa = compute_put_aside(sim, coloring, &mut state, &idxs, &res.cliques, params)?;
    log.flags.extend(pa.flags.iter().cloned());
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &idxs,
        sim.net.rounds(), "put-aside", params.gamma_acct,
    );

    // Step 4: synchronized trial on everything outside the put-aside sets.
    let slack = (params.sct_slack_c * logn).ceil() as i64;
    let mut entries: Vec<SctEntry> = Vec::new();
    for &i in &idxs {
        let st = &res.cliques[i];
        let k = st.size() as u64;
        let aside: BTreeSet<VertexId> = state.put_aside[&i].iter().copied().collect();
        let cap = (st.delta_ik + 1) as u32;
        let used = clique_used_colors(coloring, &st.members);
        let free_k = (1..=cap).filter(|c| !used.contains(c)).count() as i64;
        let unc_members =
            st.members.iter().filter(|&&v| !coloring.is_colored(v)).count() as i64;
        if free_k < unc_members - slack {
            log.flags.push(format!(
                "cabal {i}: palette deficit at trial entry ({free_k} < {unc_members} - {slack})"
            ));
        }
        let mut s: Vec<VertexId> = st
            .members
            .iter()
            .copied()
            .filter(|&v| !coloring.is_colored(v) && !aside.contains(&v))
            .collect();
        let room = (free_k - params.r_prime as i64).max(0) as usize;
        if s.len() > room {
            log.flags.push(format!(
                "cabal {i}: trial set truncated from {} to the {room}-color room",
                s.len()
            ));
            s.truncate(room);
        }
        let alpha_ok = (s.len() as i128) * *params.alpha.denom()
            >= *params.alpha.numer() * k as i128;
        if !alpha_ok {
            log.flags.push(format!("cabal {i}: trial set below alpha, skipped"));
            continue;
        }
        state.s_k.insert(i, s.clone());
        entries.push(SctEntry { clique_idx: i, s_k: s, reserved: params.r_prime });
    }
    let (reps, _) = synchronized_color_trial(sim, coloring, &entries, &res.cliques, params)?;
    for rep in &reps {
        if !rep.within_bound {
            log.flags.push(format!(
                "cabal {}: trial leftover {} above bound {}",
                rep.clique, rep.leftover, rep.leftover_bound
            ));
        }
    }
    log.sct = reps;
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &idxs,
        sim.net.rounds(), "cabal-trial", params.gamma_acct,
    );

    // Step 5: slice coloring on the residue outside the put-aside sets. The
    // per-vertex demand is twice the measured uncolored degree within the
    // residue (an exact count is the sharpest 2-approximation available).
    let aside_all: BTreeSet<VertexId> = state
        .put_aside
        .values()
        .flat_map(|s| s.iter().copied())
        .collect();
    let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut targets: Vec<VertexId> = Vec::new();
    for &i in &idxs {
        for &v in &res.cliques[i].members {
            if !coloring.is_colored(v) && !aside_all.contains(&v) {
                owner.insert(v, i);
                targets.push(v);
            }
        }
    }
    if !targets.is_empty() {
        let tset: BTreeSet<VertexId> = targets.iter().copied().collect();
        let bitems: Vec<(VertexId, u64)> = targets.iter().map(|&v| (v, 1)).collect();
        let _ = sim.bcast(&bitems)?;
        let aitems: Vec<(VertexId, u64)> = targets
            .iter()
            .map(|&v| (v, field_bits(g.max_pseudo_degree() + 1)))
            .collect();
        let _ = sim.agg(&aitems)?;
        let dmap: BTreeMap<VertexId, u64> = targets
            .iter()
            .map(|&v| {
                let cnt = g.neighbors(v).filter(|u| tset.contains(u)).count() as u64;
                (v, 2 * cnt)
            })
            .collect();
        for &v in &targets {
            let i = owner[&v];
            let st = &res.cliques[i];
            let s_v = 2.0 * (params.ell as f64 + slack_mass(st));
            let need = (dmap[&v] as f64 + s_v) / 4.0;
            let cap = (st.delta_k + 1) as u32;
            let kfree = clique_palette(coloring, &st.members, cap);
            let used = coloring.neighbor_colors(&g, v);
            let support = kfree
                .iter()
                .filter(|c| {
                    c.get() as u64 > params.r_prime
                        && (c.get() as u64) <= g.palette_size(v)
                        && !used.contains(c)
                })
                .count() as f64;
            if support < need {
                log.flags.push(format!(
                    "vertex {v}: cabal sampler support {support} below (d+s)/4 = {need:.2}"
                ));
            }
        }
        let nominal = ((params.sampler_c * logn).ceil() as u64).max(1);
        let g2 = g.clone();
        let owner2 = owner.clone();
        let cliques2 = res.cliques.clone();
        let rp = params.r_prime;
        let mut sampler = move |sim: &mut Sim,
                                coloring: &PartialColoring,
                                active: &[VertexId],
                                iter: u32|
              -> Result<Vec<(VertexId, Option<Color>)>, TrialError> {
            let mut by_clique: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
            for &v in active {
                by_clique.entry(owner2[&v]).or_default().push(v);
            }
            let mut out = Vec::with_capacity(active.len());
            for (&i, verts) in &by_clique {
                let st = &cliques2[i];
                let cap = (st.delta_k + 1) as u32;
                let cm = CliqueComms::new(&g2, &st.members, i)?;
                let _ = cm.gather(sim, cap as u64)?;
                let _ = cm.scatter(sim, cap as u64)?;
                let used: BTreeSet<u32> = clique_used_colors(coloring, &st.members);
                let free_cnt =
                    (rp as u32 + 1..=cap).filter(|c| !used.contains(c)).count() as u64;
                let threshold =
                    if free_cnt <= nominal { 2 * cap as u64 } else { nominal };
                let sampler = CliquePalSampler {
                    cap,
                    reserved: rp as u32,
                    shared_seed: sim.shared_seed(TAG_SAMPLER, &[i as u64, iter as u64]),
                    threshold,
                };
                for &v in verts {
                    let mut rng = sim.vertex_rng(TAG_SAMPLER, &[iter as u64], v);
                    out.push((v, sampler.sample(&g2, coloring, &used, v, &mut rng)));
                }
            }
            Ok(out)
        };
        let (layers, _) = slice_color(
            sim,
            coloring,
            &targets,
            &|v| dmap[&v],
            params.slice_iterations,
            &mut sampler,
        )?;
        let worst = layers.worst_upward_degree(&g, coloring);
        if worst as f64 > params.c_layer * logn {
            log.flags.push(format!("cabal slice: upward degree {worst} above budget"));
        }
        push_checkpoint(
            &mut log, &g, coloring, res, &state, &idxs,
            sim.net.rounds(), "cabal-slice", params.gamma_acct,
        );

        // Step 6: layered finish over the cabal reserve. Until here no cabal
        // vertex may hold a reserved color.
        let all_members: Vec<VertexId> = idxs
            .iter()
            .flat_map(|&i| res.cliques[i].members.iter().copied())
            .collect();
        assert!(
            reserved_untouched(coloring, &all_members, params.r_prime),
            "a cabal reserve color leaked before the layered finish"
        );
        for i in (1..=layers.num_layers()).rev() {
            let mem: Vec<VertexId> = layers
                .members_of(i)
                .into_iter()
                .filter(|&v| !coloring.is_colored(v))
                .collect();
            if mem.is_empty() {
                continue;
            }
            let out = multicolor_trial(
                sim,
                coloring,
                &mem,
                &|_| ColorSpace::range(1, params.r_prime as u32),
                params.mct_phase_cap,
                params.mct_x_max,
                &[SCOPE_LAYER, 0x434142, i as u64],
            )?;
            if let MctVerdict::Failed { witness, .. } = out.verdict {
                return Err(DenseError::Mct { phase: "cabal-layered-finish", witness });
            }
        }
        push_checkpoint(
            &mut log, &g, coloring, res, &state, &idxs,
            sim.net.rounds(), "cabal-layered-finish", params.gamma_acct,
        );
    }

    // Step 7: put-aside finish from the leftover clique palette. The leader
    // gathers each member's external constraints, answers palette queries,
    // and deals distinct free colors.
    let cb = sim.color_bits();
    for &i in &idxs {
        let st = &res.cliques[i];
        let p = &state.put_aside[&i];
        let cap = (st.delta_k + 1) as u32;
        let comms = CliqueComms::new(&g, &st.members, i)?;
        let requests: Vec<(VertexId, PaletteQuery)> = p
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                (v, PaletteQuery::SelectFree { a: 1, b: cap, i: j as u64 + 1 })
            })
            .collect();
        let (_, _rounds) = query_clique_palette(sim, coloring, &comms, cap, &requests)?;
        let max_ext = p
            .iter()
            .map(|v| res.dense[v].ext_distinct)
            .max()
            .unwrap_or(0);
        let _ = comms.gather(sim, cb * (1 + max_ext))?;

        let kfree: Vec<u32> =
            clique_palette(coloring, &st.members, cap).iter().map(|c| c.get()).collect();
        if kfree.len() < p.len() {
            log.flags.push(format!(
                "cabal {i}: clique palette {} below put-aside size {}",
                kfree.len(),
                p.len()
            ));
        }
        let mut assigned: BTreeSet<u32> = BTreeSet::new();
        let mut commits: Vec<(VertexId, Color)> = Vec::new();
        for &v in p {
            let used = coloring.neighbor_colors(&g, v);
            let found = kfree.iter().copied().find(|&c| {
                !assigned.contains(&c)
                    && (c as u64) <= g.palette_size(v)
                    && !used.contains(&color(c))
            });
            match found {
                Some(c) => {
                    assigned.insert(c);
                    commits.push((v, color(c)));
                }
                None => {
                    return Err(DenseError::PutAside(format!(
                        "cabal {i}: no palette color left for vertex {v}"
                    )))
                }
            }
        }
        let _ = comms.scatter(sim, cb)?;
        let _ = sim.commit(coloring, &commits)?;
    }
    push_checkpoint(
        &mut log, &g, coloring, res, &state, &idxs,
        sim.net.rounds(), "put-aside-finish", params.gamma_acct,
    );

    for &i in &idxs {
        for &v in &res.cliques[i].members {
            assert!(coloring.is_colored(v), "cabal vertex {v} left uncolored");
        }
    }
    log.rounds = sim.net.rounds() - base_rounds;
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acd::{compute_acd, DenseStats, EstimatorMode};
    use crate::embedding::build_identity;
    use crate::multigraph::verify_coloring;

    fn clique_edges(ids: &[VertexId]) -> Vec<(VertexId, VertexId, u32)> {
        let mut e = Vec::new();
        for (i, &u) in ids.iter().enumerate() {
            for &v in &ids[i + 1..] {
                e.push((u, v, 1));
            }
        }
        e
    }

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

    fn manual_stats(g: &MultiGraph, members: Vec<VertexId>, cabal: bool) -> CliqueStats {
        let k = members.len();
        let mset: BTreeSet<VertexId> = members.iter().copied().collect();
        let mut e_sum = 0;
        let mut a_sum = 0;
        let mut delta = 0;
        for &v in &members {
            let mut deg_in = 0u64;
            let mut e_v = 0u64;
            for &(u, m) in g.neighbors_with_mult(v) {
                if mset.contains(&u) {
                    deg_in += m as u64;
                } else {
                    e_v += m as u64;
                }
            }
            e_sum += e_v;
            a_sum += k as i64 - 1 - deg_in as i64;
            delta = g.pseudo_degree(v).max(delta);
        }
        CliqueStats {
            leader: members[0],
            members: members.clone(),
            delta_k: delta,
            delta_ik: delta,
            e_sum,
            a_sum,
            cabal,
            inliers: members,
        }
    }

    #[test]
    fn slack_activation_fraction_and_properness() {
        let n: u32 = 10_000;
        let mut edges = Vec::new();
        for v in 0..n {
            for j in 1..=5u32 {
                edges.push((v, (v + j) % n, 1));
            }
        }
        let g = MultiGraph::from_edges(n as usize, edges).unwrap();
        let (rep, coloring) = with_sim(&g, |sim, col| {
            generate_slack(sim, col, &(0..n).collect::<Vec<_>>(), 4, &[]).unwrap()
        });
        assert_eq!(rep.eligible, n as u64);
        // mean 500, sigma ~21.8 at p = 1/20
        let dev = (rep.activated as f64 - 500.0).abs();
        assert!(dev <= 3.0 * 21.8, "activation count {} too far from 500", rep.activated);
        assert!(rep.colored <= rep.activated);
        assert!(verify_coloring(&g, &coloring, false).pass());
        assert!(reserved_untouched(&coloring, &(0..n).collect::<Vec<_>>(), 4));
    }

    #[test]
    fn slack_abstains_below_reserve() {
        let g = MultiGraph::from_edges(30, (0..29).map(|v| (v, v + 1, 1))).unwrap();
        let (rep, _) = with_sim(&g, |sim, col| {
            generate_slack(sim, col, &(0..30).collect::<Vec<_>>(), 4, &[]).unwrap()
        });
        assert_eq!(rep.colored, 0, "degree ≤ reserve must abstain");
    }

    #[test]
    fn vstar_empty_is_identity() {
        let g = MultiGraph::from_edges(4, vec![(0, 1, 1)]).unwrap();
        let (rep, coloring) = with_sim(&g, |sim, col| {
            color_vstar(sim, col, &[], &DenseParams::forced_phase()).unwrap()
        });
        assert_eq!(rep.rounds, 0);
        assert_eq!(coloring.num_colored(), 0);
    }

    #[test]
    fn vstar_colors_centers_and_leaves_stay() {
        // Three star centers joined in a triangle; leaves are not targets.
        let mut edges = vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)];
        let mut next = 3u32;
        for c in 0..3u32 {
            for _ in 0..12 {
                edges.push((c, next, 1));
                next += 1;
            }
        }
        let g = MultiGraph::from_edges(next as usize, edges).unwrap();
        let (rep, coloring) = with_sim(&g, |sim, col| {
            color_vstar(sim, col, &[0, 1, 2], &DenseParams::forced_phase()).unwrap()
        });
        assert_eq!(rep.colored, 3);
        for v in 0..3 {
            assert!(coloring.get(v).unwrap().get() > 4);
        }
        assert_eq!(coloring.num_colored(), 3);
        assert!(verify_coloring(&g, &coloring, false).pass());
    }

    #[test]
    fn matching_on_complete_clique_is_noop() {
        let g = MultiGraph::from_edges(32, clique_edges(&(0..32).collect::<Vec<_>>()))
            .unwrap();
        let st = manual_stats(&g, (0..32).collect(), false);
        assert_eq!(st.a_sum, 0);
        let (rep, coloring) = with_sim(&g, |sim, col| {
            colorful_matching(sim, col, &st, 0, 4, &DenseParams::forced_phase()).unwrap()
        });
        assert_eq!(rep.m_k, 0);
        assert_eq!(rep.rounds, 0);
        assert!(rep.reached);
        assert_eq!(coloring.num_colored(), 0);
    }

    #[test]
    fn matching_reaches_target_on_matching_complement() {
        // K_128 minus a perfect matching: every vertex has one anti-partner.
        let ids: Vec<VertexId> = (0..128).collect();
        let edges: Vec<_> = clique_edges(&ids)
            .into_iter()
            .filter(|&(u, v, _)| !(u / 2 == v / 2 && u % 2 == 0 && v == u + 1))
            .collect();
        let g = MultiGraph::from_edges(128, edges).unwrap();
        let st = manual_stats(&g, ids.clone(), false);
        assert_eq!(st.a_sum, 128);
        let params = DenseParams::forced_phase();
        let (rep, coloring) = with_sim(&g, |sim, col| {
            colorful_matching(sim, col, &st, 0, 4, &params).unwrap()
        });
        // target ⌈a_K/(4ε)⌉ = ⌈1·20/4⌉ = 5
        assert_eq!(rep.target, 5);
        assert!(rep.reached, "flags: {:?}", rep.flags);
        assert!(rep.m_k >= 5);
        assert!(verify_coloring(&g, &coloring, false).pass());
        // Every color class is one anti-pair inside the band.
        let mut by_color: BTreeMap<u32, Vec<VertexId>> = BTreeMap::new();
        for v in 0..128 {
            if let Some(c) = coloring.get(v) {
                by_color.entry(c.get()).or_default().push(v);
            }
        }
        assert_eq!(by_color.len() as u64, rep.m_k);
        for (c, vs) in by_color {
            assert!((13..=115).contains(&c), "color {c} outside the band");
            assert_eq!(vs.len(), 2);
            assert!(!g.has_edge(vs[0], vs[1]));
        }
    }

    #[test]
    fn outliers_empty_is_identity() {
        let g = MultiGraph::from_edges(4, vec![(0, 1, 1)]).unwrap();
        let (rep, coloring) = with_sim(&g, |sim, col| {
            color_outliers(sim, col, &[], 4, &DenseParams::forced_phase(), &[0]).unwrap()
        });
        assert_eq!(rep.rounds, 0);
        assert_eq!(coloring.num_colored(), 0);
    }

    #[test]
    fn synchronized_trial_colors_isolated_clique() {
        let ids: Vec<VertexId> = (0..64).collect();
        let g = MultiGraph::from_edges(64, clique_edges(&ids)).unwrap();
        let st = manual_stats(&g, ids, false);
        let entries = vec![SctEntry {
            clique_idx: 0,
            s_k: (0..32).collect(),
            reserved: 4,
        }];
        let params = DenseParams::forced_phase();
        let ((reps, rounds), coloring) = with_sim(&g, |sim, col| {
            synchronized_color_trial(sim, col, &entries, &[st.clone()], &params).unwrap()
        });
        assert!(rounds > 0);
        assert_eq!(reps[0].colored, 32);
        assert_eq!(reps[0].leftover, 0);
        assert!(reps[0].within_bound);
        let mut seen = BTreeSet::new();
        for v in 0..32 {
            let c = coloring.get(v).unwrap().get();
            assert!(c > 4 && c <= 64);
            assert!(seen.insert(c), "duplicate color {c} inside one clique");
        }
        assert!(verify_coloring(&g, &coloring, false).pass());
    }

    #[test]
    fn synchronized_trial_refuses_oversized_set() {
        let ids: Vec<VertexId> = (0..8).collect();
        let g = MultiGraph::from_edges(8, clique_edges(&ids)).unwrap();
        let st = manual_stats(&g, ids.clone(), false);
        let entries = vec![SctEntry { clique_idx: 0, s_k: ids, reserved: 4 }];
        let (out, _) = with_sim(&g, |sim, col| {
            synchronized_color_trial(sim, col, &entries, &[st.clone()],
                &DenseParams::forced_phase())
        });
        assert!(matches!(out, Err(DenseError::Precondition(_))));
    }

    #[test]
    fn put_aside_single_cabal() {
        let ids: Vec<VertexId> = (0..40).collect();
        let g = MultiGraph::from_edges(40, clique_edges(&ids)).unwrap();
        let st = manual_stats(&g, ids, true);
        let params = DenseParams::forced_phase();
        let mut state = DensePhaseState {
            r: params.r,
            r_prime: params.r_prime,
            ell: params.ell,
            ..DensePhaseState::default()
        };
        state.inliers.insert(0, st.members.iter().copied().collect());
        let (rep, coloring) = with_sim(&g, |sim, col| {
            let r = compute_put_aside(sim, col, &mut state, &[0], &[st.clone()], &params)
                .unwrap();
            assert!(state.validate(&sim.emb.h, col, &[st.clone()]).is_empty());
            r
        });
        assert_eq!(rep.sizes, vec![(0, 12)]);
        assert!(rep.cross_clean);
        assert_eq!(coloring.num_colored(), 0);
    }

    #[test]
    fn put_aside_avoids_cross_cabal_edges() {
        // Two K_30 blobs; the first ten vertices of each side are matched.
        let a: Vec<VertexId> = (0..30).collect();
        let b: Vec<VertexId> = (30..60).collect();
        let mut edges = clique_edges(&a);
        edges.extend(clique_edges(&b));
        for i in 0..10 {
            edges.push((i, 30 + i, 1));
        }
        let g = MultiGraph::from_edges(60, edges).unwrap();
        let sa = manual_stats(&g, a, true);
        let sb = manual_stats(&g, b, true);
        let cliques = vec![sa, sb];
        let params = DenseParams::forced_phase();
        let mut state = DensePhaseState {
            r: params.r,
            r_prime: params.r_prime,
            ell: params.ell,
            ..DensePhaseState::default()
        };
        state.inliers.insert(0, cliques[0].members.iter().copied().collect());
        state.inliers.insert(1, cliques[1].members.iter().copied().collect());
        let (rep, _) = with_sim(&g, |sim, col| {
            let r = compute_put_aside(sim, col, &mut state, &[0, 1], &cliques, &params)
                .unwrap();
            assert!(state.validate(&sim.emb.h, col, &cliques).is_empty());
            r
        });
        assert!(rep.cross_clean, "flags: {:?}", rep.flags);
        for (_, len) in rep.sizes {
            assert_eq!(len, 12);
        }
    }

    #[test]
    fn non_cabal_pipeline_colors_blob_triangle() {
        // Three K_40 blobs, one perfect matching between each pair: every
        // vertex has external degree 2, so e_K = 2|K| and the cliques are
        // not cabals.
        let n = 120u32;
        let mut edges = Vec::new();
        for b in 0..3u32 {
            edges.extend(clique_edges(&(40 * b..40 * (b + 1)).collect::<Vec<_>>()));
        }
        for i in 0..40u32 {
            edges.push((i, 40 + i, 1));
            edges.push((i, 80 + i, 1));
            edges.push((40 + i, 80 + i, 1));
        }
        let g = MultiGraph::from_edges(n as usize, edges).unwrap();
        let mut acd_params = AcdParams::forced_phase(n as usize);
        acd_params.estimator = EstimatorMode::ExactCensus;
        let params = DenseParams::from_acd(&acd_params);

        let (log, coloring) = with_sim(&g, |sim, col| {
            let res = compute_acd(sim, &acd_params).unwrap();
            assert_eq!(res.cliques.len(), 3, "flags: {:?}", res.flags);
            for st in &res.cliques {
                assert_eq!(st.size(), 40);
                assert!(!st.cabal, "blobs with e_K = 2|K| are not cabals");
            }
            let sg = slack_targets(&res);
            assert_eq!(sg.len(), 120);
            generate_slack(sim, col, &sg, params.r, &res.cliques).unwrap();
            color_non_cabals(sim, col, &res, &params).unwrap()
        });
        assert_eq!(coloring.num_colored(), 120);
        assert!(verify_coloring(&g, &coloring, true).pass());
        assert!(log.rounds > 0);
        assert!(!log.checkpoints.is_empty());
        for cp in &log.checkpoints {
            assert!(cp.count_degree_ok);
        }
    }

    #[test]
    fn cabal_pipeline_colors_disjoint_blobs() {
        let n = 80u32;
        let mut edges = Vec::new();
        for b in 0..2u32 {
            edges.extend(clique_edges(&(40 * b..40 * (b + 1)).collect::<Vec<_>>()));
        }
        let g = MultiGraph::from_edges(n as usize, edges).unwrap();
        let mut acd_params = AcdParams::forced_phase(n as usize);
        acd_params.estimator = EstimatorMode::ExactCensus;
        let params = DenseParams::from_acd(&acd_params);

        let (log, coloring) = with_sim(&g, |sim, col| {
            let res = compute_acd(sim, &acd_params).unwrap();
            assert_eq!(res.cliques.len(), 2, "flags: {:?}", res.flags);
            for st in &res.cliques {
                assert!(st.cabal, "isolated cliques are cabals");
            }
            color_cabals(sim, col, &res, &params).unwrap()
        });
        assert_eq!(coloring.num_colored(), 80);
        assert!(verify_coloring(&g, &coloring, true).pass());
        for v in 0..n {
            assert!(coloring.get(v).unwrap().get() <= 40);
        }
        assert!(log.rounds > 0);
    }

    #[test]
    fn inaccurate_doubled_cliques_color_fully() {
        // Two doubled K_6: pseudo-degree 10, five distinct neighbors each.
        let mut edges = Vec::new();
        for b in 0..2u32 {
            for (u, v, _) in clique_edges(&(6 * b..6 * (b + 1)).collect::<Vec<_>>()) {
                edges.push((u, v, 2));
            }
        }
        let g = MultiGraph::from_edges(12, edges).unwrap();
        let mut acd_params = AcdParams::forced_phase(12);
        acd_params.estimator = EstimatorMode::ExactCensus;
        let params = DenseParams::from_acd(&acd_params);
        let (rep, coloring) = with_sim(&g, |sim, col| {
            let res = compute_acd(sim, &acd_params).unwrap();
            let v_in = res.v_in();
            assert_eq!(v_in.len(), 12, "doubled cliques must be inaccurate");
            color_inaccurate(sim, col, &v_in, &params).unwrap()
        });
        assert_eq!(rep.colored, 12);
        assert!(verify_coloring(&g, &coloring, true).pass());
        for v in 0..12 {
            assert!(coloring.get(v).unwrap().get() <= 11);
        }
    }

    #[test]
    fn count_degree_and_reserved_helpers() {
        let ids: Vec<VertexId> = (0..8).collect();
        let g = MultiGraph::from_edges(8, clique_edges(&ids)).unwrap();
        let mut coloring = PartialColoring::new(8);
        assert!(reserved_untouched(&coloring, &ids, 4));
        coloring.set(3, color(2));
        assert!(!reserved_untouched(&coloring, &ids, 4));
        assert!(reserved_untouched(&coloring, &ids, 1));

        let mut res = AcdResult {
            class: vec![VertexClass::Dense(0); 8],
            cliques: vec![manual_stats(&g, ids.clone(), true)],
            dense: BTreeMap::new(),
            rounds: 0,
            flags: vec![],
        };
        for &v in &ids {
            res.dense.insert(
                v,
                DenseStats {
                    e_v: 0,
                    a_v: 0,
                    ext_distinct: 0,
                    anti_distinct: 0,
                    delta_e: 0,
                    delta_a: 0,
                },
            );
        }
        assert!(count_degree_ok(&g, &res));
        res.dense.get_mut(&0).unwrap().a_v = 1;
        assert!(!count_degree_ok(&g, &res));
    }
}
