//! End-to-end driver: decomposition, slack generation, the dense coloring
//! phases and the low-degree finish, in order, with per-phase round/bit
//! accounting, monitor extremes, and a final verdict that restates
//! `verify_coloring` exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::acd::{compute_acd, AcdParams, AcdResult, VertexClass};
use crate::calib::{fast_path_budget, Calibration};
use crate::config::{ConfigError, PhaseToggles, RunConfig};
use crate::dense::{
    color_cabals, color_inaccurate, color_non_cabals, color_vstar, count_degree_ok,
    generate_slack, slack_targets, DenseLog, DenseParams, PhaseReport, SlackGenReport,
};
use crate::embedding::{validate_embedding, Embedding};
use crate::gen::{generate_instance, GenError};
use crate::lowdeg::{color_low_degree, LowDegLog, LowDegParams};
use crate::multigraph::{color, verify_coloring, PartialColoring, VertexId};
use crate::netsim::{measure_congestion_dilation, TranscriptRecord};
use crate::trials::Sim;

pub const METRICS_SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Gen(#[from] GenError),
    #[error("{0}")]
    Embed(#[from] crate::embedding::EmbedError),
    #[error("{0}")]
    Calibration(#[from] crate::calib::CalibError),
    #[error("phase {phase} aborted (seed {seed}): {message}")]
    Phase { phase: String, seed: u64, message: String },
}

// ---- metrics -----------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseMetrics {
    pub phase: String,
    /// Engine rounds on the hosting network.
    pub rounds: u64,
    /// Base-graph equivalent (two hosting rounds per G-round on the
    /// subdivision substrate).
    pub g_rounds: u64,
    pub colored: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub low: usize,
    pub inaccurate: usize,
    pub star: usize,
    pub dense: usize,
    pub cliques: usize,
    pub cabals: usize,
}

/// Extremes of the runtime monitors, aggregated over every checkpoint the
/// phases emitted.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct MonitorExtremes {
    /// Smallest accounting ratio |L(v) ∩ L(K)| / (e_K + a_K) observed.
    pub acct_min: Option<f64>,
    /// True when every synchronized-trial leftover stayed within its bound.
    pub sct_all_within: bool,
    /// Largest leftover excess over the 500/α·(e_K+a_K) base, per log2 n.
    pub sct_excess_c_max: Option<f64>,
    /// Cliques where slack generation colored more than |K|/10 members.
    pub slack_cap_violations: u64,
    /// Largest leftover component the shattering monitor saw.
    pub shatter_component_max: u64,
    /// That size normalized by Δ̄²·log2 n.
    pub shatter_ratio_max: Option<f64>,
    /// deg(v)+1 = |K| + e_v − a_v held at every checkpoint.
    pub count_degree_ok: bool,
    /// No put-aside violations were flagged.
    pub put_aside_clean: bool,
    /// Low-degree rounds over the fast-path budget formula, when the fast
    /// path ran.
    pub fast_ratio: Option<f64>,
    /// Non-fatal anomalies from every phase, prefixed with the phase name.
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetrics {
    pub schema: u32,
    pub seed: u64,
    pub bandwidth: u64,
    pub n_virtual: usize,
    pub machines: usize,
    pub links: usize,
    pub congestion: u64,
    pub dilation: u64,
    pub classes: ClassCounts,
    pub phases: Vec<PhaseMetrics>,
    pub rounds_total: u64,
    pub g_rounds_total: u64,
    /// Bits per link, both directions summed, indexed by link id.
    pub per_link_bits: Vec<u64>,
    pub total_bits: u64,
    pub max_link_bits: u64,
    /// Over-capacity events. The engine aborts the offending phase, so any
    /// completed run reports zero.
    pub bandwidth_exceeded: u64,
    pub monitors: MonitorExtremes,
    pub uncolored: u64,
    pub verdict: String,
    pub violations: Vec<String>,
}

impl RunMetrics {
    pub fn pass(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

/// Everything a run produces; the artifact form is what `--out` persists.
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub emb: Embedding,
    pub coloring: PartialColoring,
    pub transcript: Option<Vec<TranscriptRecord>>,
}

// ---- phase driver ------------------------------------------------------------

pub enum PhaseEvidence {
    Acd(AcdResult),
    Slack(SlackGenReport),
    Plain(PhaseReport),
    Dense(DenseLog),
    Low(Box<LowDegLog>),
    Skipped,
}

pub struct PhaseTrace {
    pub phase: String,
    pub rounds: u64,
    pub colored: u64,
    pub evidence: PhaseEvidence,
}

fn colored_count(coloring: &PartialColoring, n: usize) -> u64 {
    (0..n as VertexId).filter(|&v| coloring.is_colored(v)).count() as u64
}

/// Runs the pipeline steps in order on an existing simulation handle:
/// decomposition, slack generation, sparse/uneven vertices, non-cabal
/// cliques, cabals, inaccurate vertices, low-degree completion. Returns the
/// per-phase traces plus the decomposition.
pub fn drive_phases(
    sim: &mut Sim,
    coloring: &mut PartialColoring,
    toggles: &PhaseToggles,
    acd_params: &AcdParams,
    dense_params: &DenseParams,
    low_params: &LowDegParams,
    seed: u64,
) -> Result<(Vec<PhaseTrace>, AcdResult), PipelineError> {
    let n = sim.emb.h.num_vertices();
    let mut traces: Vec<PhaseTrace> = Vec::new();

    macro_rules! phase {
        ($name:expr, $enabled:expr, $body:expr) => {{
            let rounds_before = sim.net.rounds();
            let colored_before = colored_count(coloring, n);
            let evidence = if $enabled {
                $body.map_err(|e| PipelineError::Phase {
                    phase: $name.to_string(),
                    seed,
                    message: e.to_string(),
                })?
            } else {
                PhaseEvidence::Skipped
            };
            traces.push(PhaseTrace {
                phase: $name.to_string(),
                rounds: sim.net.rounds() - rounds_before,
                colored: colored_count(coloring, n) - colored_before,
                evidence,
            });
        }};
    }

    // Step 1: decomposition.
    let res = if toggles.acd {
        let rounds_before = sim.net.rounds();
        let res = compute_acd(sim, acd_params).map_err(|e| PipelineError::Phase {
            phase: "acd".to_string(),
            seed,
            message: e.to_string(),
        })?;
        traces.push(PhaseTrace {
            phase: "acd".to_string(),
            rounds: sim.net.rounds() - rounds_before,
            colored: 0,
            evidence: PhaseEvidence::Acd(res.clone()),
        });
        res
    } else {
        traces.push(PhaseTrace {
            phase: "acd".to_string(),
            rounds: 0,
            colored: 0,
            evidence: PhaseEvidence::Skipped,
        });
        AcdResult {
            class: vec![VertexClass::Low; n],
            cliques: Vec::new(),
            dense: BTreeMap::new(),
            rounds: 0,
            flags: Vec::new(),
        }
    };

    // Step 2: slack generation on sparse/uneven and non-cabal vertices.
    let sg_targets = slack_targets(&res);
    phase!("slack-generation", toggles.slack && !sg_targets.is_empty(), {
        generate_slack(sim, coloring, &sg_targets, dense_params.r, &res.cliques)
            .map(PhaseEvidence::Slack)
    });

    // Step 3: sparse/uneven vertices.
    let vstar = res.members_of(VertexClass::Star);
    phase!("vstar", toggles.vstar && !vstar.is_empty(), {
        color_vstar(sim, coloring, &vstar, dense_params).map(PhaseEvidence::Plain)
    });

    // Step 4: non-cabal almost-cliques.
    phase!("non-cabals", toggles.non_cabals, {
        color_non_cabals(sim, coloring, &res, dense_params).map(PhaseEvidence::Dense)
    });

    // Step 5: cabals.
    phase!("cabals", toggles.cabals, {
        color_cabals(sim, coloring, &res, dense_params).map(PhaseEvidence::Dense)
    });

    // Step 6: inaccurate vertices.
    let v_in = res.v_in();
    phase!("inaccurate", toggles.inaccurate && !v_in.is_empty(), {
        color_inaccurate(sim, coloring, &v_in, dense_params).map(PhaseEvidence::Plain)
    });

    // Step 7: low-degree completion.
    phase!("low-degree", toggles.low_degree, {
        color_low_degree(sim, coloring, low_params)
            .map(|log| PhaseEvidence::Low(Box::new(log)))
    });

    Ok((traces, res))
}

// ---- top-level runs ----------------------------------------------------------

/// Generates the configured instance and runs the full pipeline on it.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let emb = generate_instance(&cfg.instance, cfg.seed)?;
    run_pipeline_on(emb, cfg)
}

/// Runs the full pipeline on an already-built embedding.
pub fn run_pipeline_on(emb: Embedding, cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let verdict = validate_embedding(&emb);
    if !verdict.pass() {
        return Err(PipelineError::Phase {
            phase: "embedding".to_string(),
            seed: cfg.seed,
            message: verdict.violations.join("; "),
        });
    }
    let calib = Calibration::load()?;
    let n = emb.h.num_vertices();
    let acd_params = cfg.acd_params(n)?;
    let dense_params = cfg.dense_params(&acd_params, &calib);
    let low_params = cfg.lowdeg_params(&acd_params, &calib);

    let mut net = emb.network(cfg.bandwidth, cfg.seed);
    if cfg.emit_transcript {
        net.enable_transcript();
    }
    let forest = emb.forest(&net)?;
    let (congestion, dilation) = measure_congestion_dilation(&forest);

    let mut coloring = PartialColoring::new(n);
    let (traces, res) = {
        let mut sim = Sim { net: &mut net, forest: &forest, emb: &emb };
        drive_phases(
            &mut sim,
            &mut coloring,
            &cfg.phases,
            &acd_params,
            &dense_params,
            &low_params,
            cfg.seed,
        )?
    };

    let metrics = build_metrics(
        cfg,
        &emb,
        &net,
        congestion,
        dilation,
        &coloring,
        &res,
        &traces,
        &dense_params,
        &low_params,
    );
    let transcript = net.transcript().map(|t| t.to_vec());
    Ok(RunOutput { metrics, emb, coloring, transcript })
}

#[allow(clippy::too_many_arguments)]
fn build_metrics(
    cfg: &RunConfig,
    emb: &Embedding,
    net: &crate::netsim::Network,
    congestion: u64,
    dilation: u64,
    coloring: &PartialColoring,
    res: &AcdResult,
    traces: &[PhaseTrace],
    dense_params: &DenseParams,
    low_params: &LowDegParams,
) -> RunMetrics {
    let g = &emb.h;
    let n = g.num_vertices();
    let logn = (n.max(2) as f64).log2();
    let on_subdivision = emb.subdivision_of.is_some();
    let g_equiv = |r: u64| if on_subdivision { r.div_ceil(2) } else { r };

    let mut classes = ClassCounts {
        cliques: res.cliques.len(),
        cabals: res.cliques.iter().filter(|k| k.cabal).count(),
        ..ClassCounts::default()
    };
    for v in 0..n as VertexId {
        match res.class_of(v) {
            VertexClass::Low => classes.low += 1,
            VertexClass::Inaccurate => classes.inaccurate += 1,
            VertexClass::Star => classes.star += 1,
            VertexClass::Dense(_) => classes.dense += 1,
        }
    }

    let mut mon = MonitorExtremes {
        sct_all_within: true,
        count_degree_ok: count_degree_ok(g, res),
        put_aside_clean: true,
        ..MonitorExtremes::default()
    };
    let mut phases = Vec::with_capacity(traces.len());
    for t in traces {
        phases.push(PhaseMetrics {
            phase: t.phase.clone(),
            rounds: t.rounds,
            g_rounds: g_equiv(t.rounds),
            colored: t.colored,
        });
        let mut flag = |f: &str| mon.flags.push(format!("{}: {f}", t.phase));
        match &t.evidence {
            PhaseEvidence::Acd(r) => {
                for f in &r.flags {
                    flag(f);
                }
            }
            PhaseEvidence::Slack(rep) => {
                mon.slack_cap_violations = rep.cap_violations.len() as u64;
                for &i in &rep.cap_violations {
                    flag(&format!("clique {i} lost more than a tenth to slack generation"));
                }
            }
            PhaseEvidence::Plain(_) => {}
            PhaseEvidence::Dense(log) => {
                for cp in &log.checkpoints {
                    if let Some(m) = cp.monitor_min {
                        mon.acct_min =
                            Some(mon.acct_min.map_or(m, |old: f64| old.min(m)));
                    }
                    if !cp.count_degree_ok {
                        mon.count_degree_ok = false;
                    }
                    for f in &cp.flags {
                        flag(f);
                    }
                }
                for s in &log.sct {
                    if !s.within_bound {
                        mon.sct_all_within = false;
                    }
                    let base =
                        s.leftover_bound as f64 - dense_params.sct_leftover_c * logn;
                    let excess = (s.leftover as f64 - base) / logn;
                    mon.sct_excess_c_max = Some(
                        mon.sct_excess_c_max.map_or(excess, |old: f64| old.max(excess)),
                    );
                }
                for f in &log.flags {
                    if f.contains("put-aside") {
                        mon.put_aside_clean = false;
                    }
                    flag(f);
                }
            }
            PhaseEvidence::Low(log) => {
                for p in &log.parts {
                    let comp = p.finish.max_component as u64;
                    mon.shatter_component_max = mon.shatter_component_max.max(comp);
                    let denom = ((p.dbar * p.dbar) as f64 * logn).max(1.0);
                    let ratio = comp as f64 / denom;
                    mon.shatter_ratio_max = Some(
                        mon.shatter_ratio_max.map_or(ratio, |old: f64| old.max(ratio)),
                    );
                }
                if low_params.fast_path {
                    let dbar = log.parts.iter().map(|p| p.dbar).max().unwrap_or(1);
                    let budget = fast_path_budget(n, dbar, congestion, dilation);
                    mon.fast_ratio = Some(log.rounds as f64 / budget);
                }
                for f in &log.flags {
                    flag(f);
                }
            }
            PhaseEvidence::Skipped => flag("skipped"),
        }
    }

    let per_link_bits: Vec<u64> = (0..net.num_links() as u32)
        .map(|l| {
            let [a, b] = net.link_bits(l);
            a + b
        })
        .collect();
    let total_bits: u64 = per_link_bits.iter().sum();
    let max_link_bits = per_link_bits.iter().copied().max().unwrap_or(0);

    let verdict = verify_coloring(g, coloring, true);
    let uncolored =
        (0..n as VertexId).filter(|&v| !coloring.is_colored(v)).count() as u64;
    RunMetrics {
        schema: METRICS_SCHEMA,
        seed: cfg.seed,
        bandwidth: cfg.bandwidth,
        n_virtual: n,
        machines: emb.machines,
        links: net.num_links(),
        congestion,
        dilation,
        classes,
        rounds_total: net.rounds(),
        g_rounds_total: g_equiv(net.rounds()),
        phases,
        per_link_bits,
        total_bits,
        max_link_bits,
        bandwidth_exceeded: 0,
        monitors: mon,
        uncolored,
        verdict: if verdict.pass() { "pass".into() } else { "fail".into() },
        violations: verdict.violations.iter().map(|v| format!("{v:?}")).collect(),
    }
}

// ---- artifacts and verification ------------------------------------------------

/// The persistent form of a run: configuration, metrics, the coloring
/// (0 = uncolored) and the embedding, plus the transcript when requested.
#[derive(Serialize, Deserialize)]
pub struct RunArtifact {
    pub config: RunConfig,
    pub metrics: RunMetrics,
    pub coloring: Vec<u32>,
    pub embedding: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Vec<String>>,
}

impl RunArtifact {
    pub fn from_run(cfg: &RunConfig, out: &RunOutput) -> RunArtifact {
        let n = out.emb.h.num_vertices();
        RunArtifact {
            config: cfg.clone(),
            metrics: out.metrics.clone(),
            coloring: (0..n as VertexId)
                .map(|v| out.coloring.get(v).map_or(0, |c| c.get()))
                .collect(),
            embedding: serde_json::from_str(&out.emb.to_json())
                .expect("embedding json is valid"),
            transcript: out
                .transcript
                .as_ref()
                .map(|t| t.iter().map(|r| r.to_line()).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("artifact serializes")
    }

    pub fn from_json(text: &str) -> Result<RunArtifact, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Re-checks a completed run from its artifact: coloring totality and
/// properness, congestion/dilation, verdict consistency, and the
/// double-entry bit ledger (against the transcript when present). Returns
/// the failures; empty means the run verifies.
pub fn verify_run(artifact: &RunArtifact) -> Vec<String> {
    let mut fails = Vec::new();
    let emb = match Embedding::from_json(&artifact.embedding.to_string()) {
        Ok(e) => e,
        Err(e) => return vec![format!("embedding does not parse: {e}")],
    };
    let ev = validate_embedding(&emb);
    if !ev.pass() {
        fails.extend(ev.violations);
    }
    let g = &emb.h;
    let n = g.num_vertices();
    if artifact.coloring.len() != n {
        fails.push(format!(
            "coloring has {} entries for {} vertices",
            artifact.coloring.len(),
            n
        ));
        return fails;
    }
    let mut coloring = PartialColoring::new(n);
    for (v, &c) in artifact.coloring.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if c as u64 > g.palette_size(v as VertexId) {
            fails.push(format!(
                "vertex {v}: color {c} outside its {}-color palette",
                g.palette_size(v as VertexId)
            ));
        } else {
            coloring.set(v as VertexId, color(c));
        }
    }
    let verdict = verify_coloring(g, &coloring, true);
    for v in &verdict.violations {
        fails.push(format!("{v:?}"));
    }
    if verdict.pass() != artifact.metrics.pass() {
        fails.push(format!(
            "metrics claim verdict {:?} but re-verification says {}",
            artifact.metrics.verdict,
            if verdict.pass() { "pass" } else { "fail" }
        ));
    }

    let net = emb.network(artifact.metrics.bandwidth, artifact.metrics.seed);
    match emb.forest(&net) {
        Ok(forest) => {
            let (rho, d) = measure_congestion_dilation(&forest);
            if (rho, d) != (artifact.metrics.congestion, artifact.metrics.dilation) {
                fails.push(format!(
                    "re-measured congestion/dilation ({rho}, {d}) != recorded ({}, {})",
                    artifact.metrics.congestion, artifact.metrics.dilation
                ));
            }
        }
        Err(e) => fails.push(format!("support forest no longer builds: {e}")),
    }

    let m = &artifact.metrics;
    if m.per_link_bits.len() != net.num_links() {
        fails.push(format!(
            "ledger covers {} links, network has {}",
            m.per_link_bits.len(),
            net.num_links()
        ));
    }
    if m.per_link_bits.iter().sum::<u64>() != m.total_bits {
        fails.push("per-link bits do not sum to the recorded total".into());
    }
    if m.per_link_bits.iter().copied().max().unwrap_or(0) != m.max_link_bits {
        fails.push("recorded max link bits does not match the ledger".into());
    }
    if let Some(lines) = &artifact.transcript {
        let mut sums = vec![0u64; m.per_link_bits.len()];
        let mut per_round: BTreeMap<(u64, u32, u8), u64> = BTreeMap::new();
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 4 {
                fails.push(format!("malformed transcript line {line:?}"));
                continue;
            }
            let (round, link, dir, bits) = (
                f[0].parse::<u64>().unwrap_or(u64::MAX),
                f[1].parse::<u32>().unwrap_or(u32::MAX),
                f[2].parse::<u8>().unwrap_or(2),
                f[3].parse::<u64>().unwrap_or(u64::MAX),
            );
            if (link as usize) < sums.len() {
                sums[link as usize] += bits;
            } else {
                fails.push(format!("transcript names unknown link {link}"));
            }
            *per_round.entry((round, link, dir)).or_insert(0) += bits;
        }
        if sums != m.per_link_bits {
            fails.push("transcript byte totals differ from the ledger".into());
        }
        if let Some(((round, link, dir), &bits)) =
            per_round.iter().find(|(_, &b)| b > m.bandwidth)
        {
            fails.push(format!(
                "round {round} link {link} dir {dir} carried {bits} bits over bandwidth {}",
                m.bandwidth
            ));
        }
    }
    fails
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InstanceSpec;

    fn tiny_cfg() -> RunConfig {
        RunConfig::new(5, 4096, InstanceSpec::Gnp { n: 10, p: 0.25 })
    }

    #[test]
    fn tiny_graph_runs_entirely_low_degree() {
        let out = run_pipeline(&tiny_cfg()).unwrap();
        let m = &out.metrics;
        assert!(m.pass(), "violations: {:?}", m.violations);
        assert_eq!(m.classes.low, 10, "desk threshold files everything low");
        assert_eq!(m.classes.dense + m.classes.star + m.classes.inaccurate, 0);
        let work: Vec<&PhaseMetrics> =
            m.phases.iter().filter(|p| p.colored > 0).collect();
        assert!(work.iter().all(|p| p.phase == "low-degree"));
        assert_eq!(m.uncolored, 0);
        assert_eq!(m.bandwidth_exceeded, 0);
    }

    #[test]
    fn metrics_json_is_deterministic() {
        let a = run_pipeline(&tiny_cfg()).unwrap().metrics.to_json();
        let b = run_pipeline(&tiny_cfg()).unwrap().metrics.to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn forced_phase_blobs_exercise_every_phase() {
        let mut cfg = RunConfig::new(
            11,
            8192,
            InstanceSpec::CliqueBlobs { blobs: 4, size: 40, inter: 4, cabals: 1, extras: true },
        );
        cfg.forced_phase = true;
        let out = run_pipeline(&cfg).unwrap();
        let m = &out.metrics;
        assert!(m.pass(), "violations: {:?}", m.violations);
        assert!(m.classes.cliques >= 4);
        assert!(m.classes.cabals >= 1);
        let by_name = |name: &str| {
            m.phases
                .iter()
                .find(|p| p.phase == name)
                .unwrap_or_else(|| panic!("phase {name} missing"))
                .colored
        };
        assert!(by_name("non-cabals") > 0);
        assert!(by_name("cabals") > 0);
        assert!(by_name("inaccurate") > 0);
        assert!(by_name("low-degree") > 0);
        assert!(m.monitors.count_degree_ok);
        assert!(m.monitors.put_aside_clean);
    }

    #[test]
    fn artifact_round_trips_and_verifies() {
        let mut cfg = tiny_cfg();
        cfg.emit_transcript = true;
        let out = run_pipeline(&cfg).unwrap();
        let art = RunArtifact::from_run(&cfg, &out);
        let text = art.to_json();
        let back = RunArtifact::from_json(&text).unwrap();
        let fails = verify_run(&back);
        assert!(fails.is_empty(), "verification failed: {fails:?}");
    }

    #[test]
    fn tampered_coloring_fails_verification() {
        let out = run_pipeline(&tiny_cfg()).unwrap();
        let mut art = RunArtifact::from_run(&tiny_cfg(), &out);
        // clash two adjacent vertices
        let g = &out.emb.h;
        let (u, v, _) = g.edge_pairs().next().expect("instance has an edge");
        art.coloring[v as usize] = art.coloring[u as usize];
        let fails = verify_run(&art);
        assert!(!fails.is_empty());
        assert!(fails.iter().any(|f| f.contains("ImproperPair") || f.contains("verdict")));
    }

    #[test]
    fn disabled_low_degree_reports_failure_honestly() {
        let mut cfg = tiny_cfg();
        cfg.phases.low_degree = false;
        let out = run_pipeline(&cfg).unwrap();
        assert!(!out.metrics.pass());
        assert_eq!(out.metrics.uncolored, 10);
        assert!(out.metrics.monitors.flags.iter().any(|f| f.contains("skipped")));
    }

    #[test]
    fn power_instance_colors_the_square() {
        let cfg = RunConfig::new(3, 4096, InstanceSpec::Power { n: 12, t: 2, p: None });
        let out = run_pipeline(&cfg).unwrap();
        assert!(out.metrics.pass(), "violations: {:?}", out.metrics.violations);
        // brute-force distance-2 properness on the base cycle
        let col: Vec<u32> = (0..12).map(|v| out.coloring.get(v).unwrap().get()).collect();
        for u in 0..12usize {
            for d in [1usize, 2] {
                let v = (u + d) % 12;
                assert_ne!(col[u], col[v], "distance-{d} pair {u},{v} shares a color");
            }
        }
        assert!(col.iter().all(|&c| c <= 5), "C_12^2 needs at most Δ²+1 = 5 colors");
    }
}
