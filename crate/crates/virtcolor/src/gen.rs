//! Deterministic instance generators behind the CLI and the test corpus.
//!
//! Every generator derives its randomness from the run seed alone, so the
//! same (spec, seed) pair always yields byte-identical embeddings. The
//! clique-blob family is the workhorse: near-cliques with steerable external
//! and anti-degrees drive the dense phases (colorful matching, cabal
//! put-aside sets), while the optional background supplies low-degree,
//! sparse and inaccurate vertices for the other branches.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::InstanceSpec;
use crate::embedding::{build_clusters, build_identity, build_power, Embedding};
use crate::lowerbound::{build_lb_graphs, McolInstance};
use crate::multigraph::{MultiGraph, VertexId};
use crate::util::rng_from_scope;

pub const TAG_GEN: u64 = 0x47_45_4e;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("generator: {0}")]
    Invalid(String),
    #[error("graph: {0}")]
    Graph(#[from] crate::multigraph::GraphError),
    #[error("embed: {0}")]
    Embed(#[from] crate::embedding::EmbedError),
    #[error("gadget: {0}")]
    Lb(#[from] crate::lowerbound::LbError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn gen_rng(seed: u64, kind: u64) -> ChaCha8Rng {
    rng_from_scope(&[TAG_GEN, kind, seed])
}

/// Builds the embedding described by `spec`, deterministically in `seed`.
pub fn generate_instance(spec: &InstanceSpec, seed: u64) -> Result<Embedding, GenError> {
    spec.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    match spec {
        InstanceSpec::Gnp { n, p } => Ok(build_identity(&gnp_graph(*n, *p, seed))?),
        InstanceSpec::Cycle { n } => Ok(build_identity(&cycle_graph(*n))?),
        InstanceSpec::CliqueBlobs { blobs, size, inter, cabals, extras } => {
            let g = clique_blobs_graph(*blobs, *size, *inter, *cabals, *extras, seed)?;
            Ok(build_identity(&g)?)
        }
        InstanceSpec::Power { n, t, p } => {
            let base = match p {
                Some(p) => gnp_graph(*n, *p, seed),
                None => cycle_graph(*n),
            };
            Ok(build_power(&base, *t)?)
        }
        InstanceSpec::Clusters { n, parts } => cluster_instance(*n, *parts, seed),
        InstanceSpec::LbGadget { k } => {
            let task = McolInstance::random(*k, seed);
            Ok(build_lb_graphs(task.k, &task.x, &task.y)?.emb)
        }
        InstanceSpec::File { path } => {
            let text = std::fs::read_to_string(path)?;
            Ok(Embedding::from_json(&text)?)
        }
    }
}

pub fn cycle_graph(n: usize) -> MultiGraph {
    MultiGraph::from_edges(
        n,
        (0..n).map(|i| (i as VertexId, ((i + 1) % n) as VertexId, 1)),
    )
    .expect("cycle edges are well-formed")
}

pub fn gnp_graph(n: usize, p: f64, seed: u64) -> MultiGraph {
    let mut rng = gen_rng(seed, 1);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u as VertexId, v as VertexId, 1));
            }
        }
    }
    MultiGraph::from_edges(n, edges).expect("gnp edges are well-formed")
}

/// Near-clique blobs with steerable degrees.
///
/// Blob layout (members per blob = `size`): the last few members of each
/// non-cabal blob are reserved — they carry no external edges and no
/// anti-structure, so their candidate degree stays within the detection
/// slack of their true degree and the blob reliably earns its dense label.
/// - non-cabal blobs: complete graph minus a Hamilton cycle over the
///   unreserved members on even blobs (anti-degree 2, enough anti-mass to
///   trip the colorful matching) and minus a single pair on odd blobs;
///   `inter` external edges per unreserved member, realized as matchings
///   between cyclically adjacent non-cabal blobs (odd `inter` on an odd
///   cycle leaves a few members one edge over);
/// - the trailing `cabals` blobs: complete minus one pair, and exactly two
///   members with one external edge each into distinct non-cabal blobs, so
///   the average external degree stays below any cabal threshold ≥ 1 and no
///   two cabals are adjacent.
///
/// With `extras`, three background families are appended: a 6-regular
/// circulant on 4·size vertices (low-degree), one doubled-edge vertex per
/// blob (pseudo-degree 10, half of it multiplicity excess — inaccurate)
/// pointing into the circulant, and one 16-leaf star hub per blob (sparse).
pub fn clique_blobs_graph(
    blobs: usize,
    size: usize,
    inter: u64,
    cabals: usize,
    extras: bool,
    seed: u64,
) -> Result<MultiGraph, GenError> {
    let nc = blobs - cabals;
    if nc < 2 && cabals > 0 {
        return Err(GenError::Invalid("need at least two non-cabal blobs".into()));
    }
    let mut rng = gen_rng(seed, 2);
    let member = |b: usize, j: usize| (b * size + j) as VertexId;
    let reserved = (size / 8).clamp(1, 4);
    let matchable = size - reserved;
    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();

    // internal edges: complete minus the steering anti-structure, which
    // never touches the reserved members
    for b in 0..blobs {
        let heavy = b < nc && b % 2 == 0;
        for i in 0..size {
            for j in (i + 1)..size {
                let removed = if heavy {
                    j < matchable && (j == i + 1 || (i == 0 && j == matchable - 1))
                } else {
                    i == 0 && j == 1
                };
                if !removed {
                    edges.push((member(b, i), member(b, j), 1));
                }
            }
        }
    }

    // inter-blob matchings over the non-cabal cycle, unreserved members only
    if nc >= 2 {
        let pairs = if nc == 2 { 1 } else { nc };
        for pair in 0..pairs {
            let (ba, bb) = (pair, (pair + 1) % nc);
            let m = if nc == 2 {
                inter as usize
            } else {
                (inter as usize + usize::from(pair % 2 == 0)) / 2
            };
            let mut shifts = Vec::new();
            for _ in 0..m.min(matchable) {
                let mut s = rng.gen_range(0..matchable);
                while shifts.contains(&s) {
                    s = (s + 1) % matchable;
                }
                shifts.push(s);
                for j in 0..matchable {
                    edges.push((member(ba, j), member(bb, (j + s) % matchable), 1));
                }
            }
        }
    }

    // cabal external edges: two per cabal, into distinct non-cabal members
    for (c, b) in (nc..blobs).enumerate() {
        for t in 0..2usize {
            let target_blob = (c + t) % nc.max(1);
            let target = (2 * c + t) % matchable;
            edges.push((member(b, t), member(target_blob, target), 1));
        }
    }

    let mut n = blobs * size;
    if extras {
        // low-degree circulant background
        let base = n;
        let ln = 4 * size;
        for i in 0..ln {
            for s in 1..=3usize {
                edges.push(((base + i) as VertexId, (base + (i + s) % ln) as VertexId, 1));
            }
        }
        n += ln;
        // doubled-edge vertices: half the pseudo-degree is multiplicity
        // excess; they lean on the circulant so the blobs stay clean
        for j in 0..blobs {
            let v = n as VertexId;
            n += 1;
            for t in 0..5usize {
                let target = (base + (5 * j + t) % ln) as VertexId;
                edges.push((v, target, 2));
            }
        }
        // star hubs: high degree, independent neighborhood
        for _ in 0..blobs {
            let hub = n as VertexId;
            n += 1;
            for _ in 0..16 {
                edges.push((hub, n as VertexId, 1));
                n += 1;
            }
        }
    }

    Ok(MultiGraph::from_edges(n, edges)?)
}

/// A path of machines with chord edges, partitioned into contiguous
/// clusters hosting one virtual vertex each; chords crossing a cluster
/// boundary stack up as parallel virtual edges.
fn cluster_instance(n: usize, parts: usize, seed: u64) -> Result<Embedding, GenError> {
    let mut rng = gen_rng(seed, 3);
    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();
    for i in 0..n - 1 {
        edges.push((i as VertexId, (i + 1) as VertexId, 1));
    }
    let block = n.div_ceil(parts);
    for i in 0..n {
        if rng.gen_bool(0.25) {
            let span = rng.gen_range(2..=block.max(2));
            if i + span < n {
                edges.push((i as VertexId, (i + span) as VertexId, 1));
            }
        }
    }
    let g = MultiGraph::from_edges(n, edges)?;
    let mut clusters = Vec::with_capacity(parts);
    let mut leaders = Vec::with_capacity(parts);
    for c in 0..parts {
        let lo = c * block;
        let hi = ((c + 1) * block).min(n);
        if lo >= hi {
            break;
        }
        clusters.push((lo..hi).map(|m| m as u32).collect::<Vec<_>>());
        leaders.push(lo as u32);
    }
    Ok(build_clusters(&g, &clusters, &leaders)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acd::AcdParams;
    use crate::embedding::validate_embedding;

    #[test]
    fn cycle_is_two_regular() {
        let emb = generate_instance(&InstanceSpec::Cycle { n: 100 }, 0).unwrap();
        assert_eq!(emb.h.num_vertices(), 100);
        for v in emb.h.vertices() {
            assert_eq!(emb.h.pseudo_degree(v), 2);
        }
    }

    #[test]
    fn same_seed_reproduces_identical_bytes() {
        let spec = InstanceSpec::Gnp { n: 60, p: 0.1 };
        let a = generate_instance(&spec, 5).unwrap().to_json();
        let b = generate_instance(&spec, 5).unwrap().to_json();
        assert_eq!(a, b);
        let c = generate_instance(&spec, 6).unwrap().to_json();
        assert_ne!(a, c, "different seeds should draw different graphs");
    }

    #[test]
    fn blob_degrees_match_the_dials() {
        let blobs = 5;
        let size = 24;
        let cabals = 2;
        let inter = 2u64;
        let g = clique_blobs_graph(blobs, size, inter, cabals, false, 9).unwrap();
        assert_eq!(g.num_vertices(), blobs * size);
        let nc = blobs - cabals;
        let matchable = size - (size / 8).clamp(1, 4);
        let ext = |b: usize, j: usize| -> u64 {
            let v = (b * size + j) as VertexId;
            g.neighbors(v)
                .filter(|&u| (u as usize) / size != b)
                .map(|u| g.multiplicity(v, u) as u64)
                .sum()
        };
        for b in 0..nc {
            for j in 0..size {
                let e = ext(b, j);
                if j < matchable {
                    assert!(
                        e == inter || e == inter + 1,
                        "non-cabal member ({b},{j}) has external degree {e}"
                    );
                } else {
                    assert_eq!(e, 0, "reserved member ({b},{j}) should stay internal");
                }
            }
        }
        for b in nc..blobs {
            let total: u64 = (0..size).map(|j| ext(b, j)).sum();
            assert_eq!(total, 2, "cabal blob {b} external degree sum");
            // anti-structure: a single missing pair
            assert_eq!(g.multiplicity((b * size) as u32, (b * size + 1) as u32), 0);
        }
        // heavy blobs miss a Hamilton cycle over the unreserved members
        for j in 0..matchable {
            assert_eq!(g.multiplicity(j as u32, ((j + 1) % matchable) as u32), 0);
        }
        for j in matchable..size {
            assert_eq!(g.pseudo_degree(j as u32) as usize, size - 1, "reserved member {j}");
        }
    }

    #[test]
    fn blob_classes_come_out_as_steered() {
        let g = clique_blobs_graph(4, 40, 4, 1, true, 3).unwrap();
        let emb = build_identity(&g).unwrap();
        let mut net = emb.network(4096, 3);
        let forest = emb.forest(&net).unwrap();
        let mut sim = crate::trials::Sim { net: &mut net, forest: &forest, emb: &emb };
        let params = AcdParams::forced_phase(g.num_vertices());
        let res = crate::acd::compute_acd(&mut sim, &params).unwrap();
        let cabal_count = res.cliques.iter().filter(|k| k.cabal).count();
        let non_cabal = res.cliques.len() - cabal_count;
        assert!(non_cabal >= 3, "expected the three wired blobs dense, got {non_cabal}");
        assert!(cabal_count >= 1, "expected the starved blob to be a cabal");
        assert!(
            !res.v_in().is_empty(),
            "doubled-edge vertices should classify as inaccurate"
        );
        let star = res.members_of(crate::acd::VertexClass::Star);
        assert!(!star.is_empty(), "star hubs should classify as sparse/uneven");
        let low = res.members_of(crate::acd::VertexClass::Low);
        assert!(low.len() >= 4 * 40, "circulant + leaves should classify low");
    }

    #[test]
    fn cluster_instances_host_parallel_edges() {
        let emb = generate_instance(&InstanceSpec::Clusters { n: 60, parts: 6 }, 2).unwrap();
        assert!(validate_embedding(&emb).pass());
        assert_eq!(emb.h.num_vertices(), 6);
        let multi = emb
            .h
            .edge_pairs()
            .any(|(_, _, m)| m > 1);
        assert!(multi, "chords across boundaries should stack into parallel edges");
    }

    #[test]
    fn lb_gadget_kind_matches_direct_construction() {
        let emb = generate_instance(&InstanceSpec::LbGadget { k: 2 }, 7).unwrap();
        let task = McolInstance::random(2, 7);
        let direct = build_lb_graphs(task.k, &task.x, &task.y).unwrap();
        assert_eq!(emb.to_json(), direct.emb.to_json());
    }

    #[test]
    fn power_kind_squares_the_cycle() {
        let emb = generate_instance(&InstanceSpec::Power { n: 12, t: 2, p: None }, 0).unwrap();
        for v in emb.h.vertices() {
            assert_eq!(emb.h.pseudo_degree(v), 4, "C_12^2 is 4-regular");
        }
    }
}
