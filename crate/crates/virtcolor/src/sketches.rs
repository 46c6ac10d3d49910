//! Geometric-max fingerprints for approximate neighborhood counting over
//! support trees. Each element contributes t independent geometric(1/2)
//! draws; a set is summarized by the coordinate-wise max, from which the set
//! size is estimated. Draws come from a counter-based PRF of
//! (seed, element, coordinate), so any machine that knows an element id can
//! regenerate its draws without messaging it.

use crate::embedding::Embedding;
use crate::multigraph::VertexId;
use crate::netsim::{aggregate_on_trees, MachineId, NetError, Network, SupportForest};
use crate::util::mix_seed;

/// Geometric(1/2) draw in 1..=65 for (seed, element, coordinate):
/// trailing zeros of a PRF word plus one; the all-zero word maps to 65.
pub fn geometric_draw(seed: u64, element: u64, coordinate: u64) -> u8 {
    let h = mix_seed(&[seed, element, coordinate]);
    if h == 0 {
        65
    } else {
        h.trailing_zeros() as u8 + 1
    }
}

/// Max-combined geometric sketch of a set of elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fingerprint {
    pub y: Vec<u8>,
}

impl Fingerprint {
    pub fn t(&self) -> usize {
        self.y.len()
    }

    /// Identity for max-combining (below any real draw).
    pub fn empty(t: usize) -> Fingerprint {
        Fingerprint { y: vec![0; t] }
    }

    pub fn is_blank(&self) -> bool {
        self.y.iter().all(|&v| v == 0)
    }

    pub fn combine(&self, other: &Fingerprint) -> Fingerprint {
        assert_eq!(self.y.len(), other.y.len(), "fingerprint widths differ");
        Fingerprint {
            y: self.y.iter().zip(&other.y).map(|(&a, &b)| a.max(b)).collect(),
        }
    }
}

/// Fingerprint of a single element u: Y_i = X_{u,i}, deterministic in
/// (seed, u, i).
pub fn fingerprint_leaf(seed: u64, u: VertexId, t: usize) -> Fingerprint {
    assert!(t >= 1, "repetition count must be ≥ 1");
    Fingerprint {
        y: (0..t as u64).map(|i| geometric_draw(seed, u as u64, i)).collect(),
    }
}

/// Cardinality estimate, or a marker when the quantile never stabilizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CardEstimate {
    Value(f64),
    Overflow,
}

impl CardEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            CardEstimate::Value(v) => Some(v),
            CardEstimate::Overflow => None,
        }
    }
}

/// Estimates the number of distinct contributing elements:
/// Z_k = |{i : Y_i ≤ k}|, K⋆ = min{k : Z_k ≥ (27/40)·t},
/// d̂ = ln(Z_{K⋆}/t) / ln(1 − 2^{−K⋆}).
pub fn estimate_cardinality(f: &Fingerprint) -> CardEstimate {
    let t = f.t();
    assert!(t >= 1);
    let mut hist = [0u64; 66];
    for &y in &f.y {
        hist[y as usize] += 1;
    }
    let mut z: u64 = 0;
    for k in 0..=64u32 {
        z += hist[k as usize];
        if k >= 1 && 40 * z >= 27 * t as u64 {
            let frac = z as f64 / t as f64;
            let denom = (1.0 - 2f64.powi(-(k as i32))).ln();
            return CardEstimate::Value(frac.ln() / denom);
        }
    }
    CardEstimate::Overflow
}

// ---- wire codec --------------------------------------------------------

pub struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter { bits: Vec::new() }
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    /// Elias gamma: ⌊log₂ x⌋ zeros, then x's binary digits. x ≥ 1.
    pub fn gamma(&mut self, x: u64) {
        assert!(x >= 1);
        let w = 64 - x.leading_zeros();
        for _ in 1..w {
            self.push(false);
        }
        for i in (0..w).rev() {
            self.push(x & (1 << i) != 0);
        }
    }

    pub fn fixed(&mut self, x: u64, width: u32) {
        for i in (0..width).rev() {
            self.push(x & (1 << i) != 0);
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn finish(self) -> Vec<bool> {
        self.bits
    }
}

impl Default for BitWriter {
    fn default() -> Self {
        Self::new()
    }
}

pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn pull(&mut self) -> Option<bool> {
        let b = self.bits.get(self.pos).copied();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    pub fn gamma(&mut self) -> Option<u64> {
        let mut zeros = 0;
        loop {
            match self.pull()? {
                false => zeros += 1,
                true => break,
            }
        }
        let mut x: u64 = 1;
        for _ in 0..zeros {
            x = (x << 1) | self.pull()? as u64;
        }
        Some(x)
    }

    pub fn fixed(&mut self, width: u32) -> Option<u64> {
        let mut x = 0u64;
        for _ in 0..width {
            x = (x << 1) | self.pull()? as u64;
        }
        Some(x)
    }
}

/// Encodes a fingerprint: a mode flag, the minimum coordinate in Elias
/// gamma, then per-coordinate offsets in unary. If any offset would reach
/// 64, falls back to 7-bit fixed coordinates (mode flag 1); lossless either
/// way.
pub fn encode_fingerprint(f: &Fingerprint) -> Vec<bool> {
    let min = f.y.iter().copied().min().unwrap_or(0);
    let max = f.y.iter().copied().max().unwrap_or(0);
    let mut w = BitWriter::new();
    if min >= 1 && max - min < 64 {
        w.push(false);
        w.gamma(min as u64);
        for &y in &f.y {
            for _ in 0..(y - min) {
                w.push(true);
            }
            w.push(false);
        }
    } else {
        w.push(true);
        for &y in &f.y {
            w.fixed(y as u64, 7);
        }
    }
    w.finish()
}

pub fn decode_fingerprint(bits: &[bool], t: usize) -> Option<Fingerprint> {
    let mut r = BitReader::new(bits);
    let fallback = r.pull()?;
    let mut y = Vec::with_capacity(t);
    if fallback {
        for _ in 0..t {
            y.push(r.fixed(7)? as u8);
        }
    } else {
        let min = r.gamma()? as u8;
        for _ in 0..t {
            let mut off = 0u8;
            while r.pull()? {
                off += 1;
            }
            y.push(min + off);
        }
    }
    Some(Fingerprint { y })
}

/// Repetition count achieving failure probability ≤ δ at accuracy ξ:
/// t = ⌈50·ln(6/δ) / ξ²⌉.
pub fn repetitions_for(xi: f64, delta: f64) -> usize {
    assert!(xi > 0.0 && xi < 0.25 + 1e-12);
    assert!(delta > 0.0 && delta < 1.0);
    (50.0 * (6.0 / delta).ln() / (xi * xi)).ceil() as usize
}

/// Samples one coordinate of a d-element combined fingerprint directly from
/// its law P[Y ≤ k] = (1 − 2^{−k})^d, by inverse CDF. Distributionally exact;
/// used by Monte Carlo concentration tests to avoid t·d individual draws.
pub fn sample_combined_coordinate(d: u64, unif: f64) -> u8 {
    debug_assert!(d >= 1);
    debug_assert!((0.0..1.0).contains(&unif));
    // Y ≤ k ⇔ u ≤ (1−2^{−k})^d ⇔ k ≥ −log2(1 − u^{1/d}).
    let root = unif.powf(1.0 / d as f64);
    let tail = 1.0 - root;
    if tail <= 0.0 {
        return 65;
    }
    let k = (-tail.log2()).ceil().max(1.0);
    k.min(65.0) as u8
}

/// Distributed neighborhood-predicate counting: for each target vertex v,
/// every handler of an H-edge (u,v) with P_v(u) = 1 injects u's fingerprint
/// into T(v); the coordinate-wise max is converge-cast to v's root and the
/// cardinality estimated there. Returns per-target estimates and the rounds
/// consumed. Targets with no contribution estimate 0 exactly.
pub fn approx_predicate_neighbors(
    net: &mut Network,
    forest: &SupportForest,
    emb: &Embedding,
    targets: &[VertexId],
    predicate: &dyn Fn(VertexId, VertexId) -> bool,
    seed: u64,
    t: usize,
) -> Result<(Vec<(VertexId, CardEstimate)>, u64), NetError> {
    // Contributions per (target, machine): max-combined at the handler.
    let mut local: std::collections::HashMap<(VertexId, MachineId), Fingerprint> =
        std::collections::HashMap::new();
    let mut active: Vec<VertexId> = Vec::new();
    for &v in targets {
        let mut any = false;
        for u in emb.h.neighbors(v) {
            if !predicate(v, u) {
                continue;
            }
            let mult = emb.h.multiplicity(u, v) as usize;
            // One handler per parallel edge knows P_v(u); injecting at every
            // handler is harmless (max is idempotent), so use the first.
            let m = emb.handler(u, v, 0).expect("edge has a handler");
            let _ = mult;
            let fp = fingerprint_leaf(seed, u, t);
            local
                .entry((v, m))
                .and_modify(|cur| *cur = cur.combine(&fp))
                .or_insert(fp);
            any = true;
        }
        if any {
            active.push(v);
        }
    }

    // Wire width per tree: the largest partial combine any machine sends up
    // is bounded by the encoding of the full combine; charge that.
    let mut requests = Vec::with_capacity(active.len());
    for &v in &active {
        let mut total = Fingerprint::empty(t);
        for ((tv, _), fp) in &local {
            if *tv == v {
                total = total.combine(fp);
            }
        }
        let width = encode_fingerprint(&total).len() as u64;
        requests.push((v, width));
    }

    let (folded, rounds) = aggregate_on_trees(
        net,
        forest,
        &requests,
        |m, v| local.get(&(v, m)).cloned().unwrap_or_else(|| Fingerprint::empty(t)),
        |a, b| a.combine(b),
    )?;

    let mut out = Vec::with_capacity(targets.len());
    let folded: std::collections::HashMap<VertexId, Fingerprint> =
        folded.into_iter().collect();
    for &v in targets {
        match folded.get(&v) {
            Some(fp) if !fp.is_blank() => out.push((v, estimate_cardinality(fp))),
            _ => out.push((v, CardEstimate::Value(0.0))),
        }
    }
    Ok((out, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_deterministic() {
        let a = fingerprint_leaf(7, 3, 64);
        let b = fingerprint_leaf(7, 3, 64);
        assert_eq!(a, b);
        assert!(a.y.iter().all(|&v| v >= 1));
    }

    #[test]
    fn combine_laws() {
        let a = fingerprint_leaf(1, 0, 32);
        let b = fingerprint_leaf(1, 1, 32);
        let c = fingerprint_leaf(1, 2, 32);
        assert_eq!(a.combine(&a), a); // idempotent
        assert_eq!(a.combine(&b), b.combine(&a)); // commutative
        assert_eq!(
            a.combine(&b).combine(&c),
            a.combine(&b.combine(&c)) // associative
        );
        assert_eq!(
            estimate_cardinality(&a.combine(&a)),
            estimate_cardinality(&a)
        );
    }

    #[test]
    fn codec_round_trip() {
        for seed in 0..50 {
            let mut f = Fingerprint::empty(40);
            for u in 0..8 {
                f = f.combine(&fingerprint_leaf(seed, u, 40));
            }
            let bits = encode_fingerprint(&f);
            assert_eq!(decode_fingerprint(&bits, 40).unwrap(), f);
        }
    }

    #[test]
    fn codec_constant_shape() {
        let f = Fingerprint { y: vec![5; 10] };
        let bits = encode_fingerprint(&f);
        // flag + gamma(5) = 5 bits + 10 zero-offset terminators.
        assert_eq!(bits.len(), 1 + 5 + 10);
    }

    #[test]
    fn fallback_covers_wide_spread() {
        let mut y = vec![1u8; 10];
        y[0] = 65;
        let f = Fingerprint { y };
        let bits = encode_fingerprint(&f);
        assert!(bits[0]); // fallback mode
        assert_eq!(decode_fingerprint(&bits, 10).unwrap(), f);
    }

    #[test]
    fn repetition_formula() {
        // ξ = 0.25, δ = 0.001 → 50·ln(6000)/0.0625 ≈ 6959.6…
        assert_eq!(repetitions_for(0.25, 0.001), 6960);
    }
}
