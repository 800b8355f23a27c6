//! Exact equivalence of spaces of quadratic forms under linear changes of
//! variables, and class sets built on it.
//!
//! Two quadratic functions with zero affine part are EA-equivalent iff
//! their component spaces are related by some `B` in `GL(n, 2)`, acting as
//! `q -> q o B` (on polar forms: `M -> B^T M B`). The search picks the
//! images `b_0, b_1, ...` of the unit vectors one at a time. After `k`
//! columns are fixed, the monomials in the first `k` variables of every
//! transformed form are known, and their span must equal the projection of
//! the target onto the same monomials, which is a prefix of the bit mask.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::f2core::{self, Subspace};
use crate::quadspace::{monomial_index, num_monomials, QuadForm};
use crate::vecfun::{j2_signature, QuadSpace};

/// `{q o B : q in s}` where `B` maps unit vector `i` to `columns[i]`.
pub fn compose_linear(s: &QuadSpace, columns: &[u64]) -> QuadSpace {
    let n = s.n();
    assert_eq!(columns.len(), n, "compose_linear needs n columns");
    let forms: Vec<QuadForm> = s
        .basis()
        .iter()
        .map(|q| {
            let polar: Vec<u64> = columns.iter().map(|&b| q.polar_vec(b)).collect();
            let mut c = 0;
            for j in 1..n {
                for i in 0..j {
                    if f2core::dot(polar[j], columns[i]) {
                        c |= 1 << monomial_index(i, j);
                    }
                }
            }
            QuadForm::new(n, c).expect("n unchanged")
        })
        .collect();
    QuadSpace::new(n, &forms).expect("n unchanged")
}

fn prefix_mask(k: usize) -> u64 {
    let w = num_monomials(k);
    if w >= 64 {
        u64::MAX
    } else {
        (1 << w) - 1
    }
}

fn rank_histogram(s: &QuadSpace) -> Vec<u64> {
    let mut h = vec![0u64; s.n() + 1];
    for q in s.elements() {
        h[q.rank()] += 1;
    }
    h
}

/// Polar-vector data of a space: `D(u) = {M_q u : q in S}` and the pair
/// dimensions `dim(D(u) + D(v))`, which a change of variables preserves.
struct VectorData {
    n: usize,
    pair: Vec<u8>,
    rank: Vec<u8>,
}

impl VectorData {
    fn new(s: &QuadSpace) -> Self {
        let n = s.n();
        let size = 1usize << n;
        let basis = s.basis();
        let d: Vec<Vec<u64>> = (0..size as u64)
            .map(|u| basis.iter().map(|q| q.polar_vec(u)).collect())
            .collect();
        let rank: Vec<u8> = d.iter().map(|v| f2core::rank_of(v) as u8).collect();
        let mut pair = vec![0u8; size * size];
        let mut buf = Vec::with_capacity(2 * basis.len());
        for u in 0..size {
            for v in u..size {
                buf.clear();
                buf.extend_from_slice(&d[u]);
                buf.extend_from_slice(&d[v]);
                let r = f2core::rank_in_place(&mut buf) as u8;
                pair[u * size + v] = r;
                pair[v * size + u] = r;
            }
        }
        VectorData { n, pair, rank }
    }

    fn pair(&self, u: u64, v: u64) -> u8 {
        self.pair[((u as usize) << self.n) | v as usize]
    }

    /// `(rank, histogram of pair dimensions)` for every vector.
    fn signatures(&self) -> Vec<Vec<u16>> {
        let size = 1usize << self.n;
        (0..size)
            .map(|u| {
                let mut h = vec![0u16; self.n + 2];
                h[0] = u16::from(self.rank[u]);
                for v in 0..size {
                    h[1 + self.pair[u * size + v] as usize] += 1;
                }
                h
            })
            .collect()
    }
}

struct Search {
    n: usize,
    width: usize,
    source: Vec<QuadForm>,
    source_data: VectorData,
    target_data: VectorData,
    /// Interned vector signatures, comparable across the two spaces.
    source_class: Vec<u32>,
    target_class: Vec<u32>,
    target_proj: Vec<Subspace>,
}

impl Search {
    fn dfs(&self, cols: &mut Vec<u64>, span: &Subspace, images: &[u64]) -> bool {
        let k = cols.len();
        if k == self.n {
            return true;
        }
        let want = self.target_class[1 << k];
        let mut next = vec![0u64; images.len()];
        for u in 1..1u64 << self.n {
            if self.source_class[u as usize] != want || span.contains(u) {
                continue;
            }
            if (0..k).any(|i| {
                self.source_data.pair(cols[i], u) != self.target_data.pair(1 << i, 1 << k)
                    || self.source_data.rank[(cols[i] ^ u) as usize]
                        != self.target_data.rank[(1 << i) | (1 << k)]
            }) {
                continue;
            }
            for (l, q) in self.source.iter().enumerate() {
                let pv = q.polar_vec(u);
                let mut img = images[l];
                for (i, &c) in cols.iter().enumerate() {
                    if f2core::dot(pv, c) {
                        img |= 1 << monomial_index(i, k);
                    }
                }
                next[l] = img;
            }
            if Subspace::from_generators(self.width, next.iter().copied())
                != self.target_proj[k + 1]
            {
                continue;
            }
            cols.push(u);
            if self.dfs(cols, &span.with(u), &next) {
                return true;
            }
            cols.pop();
        }
        false
    }
}

/// A change of variables `B` (as unit-vector images) with
/// `compose_linear(source, B) == target`, if one exists.
pub fn find_equivalence(source: &QuadSpace, target: &QuadSpace) -> Option<Vec<u64>> {
    let n = source.n();
    if n != target.n() || source.dim() != target.dim() {
        return None;
    }
    if n == 0 || source.dim() == 0 {
        return Some((0..n).map(|i| 1 << i).collect());
    }
    if rank_histogram(source) != rank_histogram(target) {
        return None;
    }
    let source_data = VectorData::new(source);
    let target_data = VectorData::new(target);
    let (ss, ts) = (source_data.signatures(), target_data.signatures());
    let mut interned: BTreeMap<&[u16], u32> = BTreeMap::new();
    for sig in ts.iter() {
        let next = interned.len() as u32;
        interned.entry(sig.as_slice()).or_insert(next);
    }
    let target_class: Vec<u32> = ts.iter().map(|s| interned[s.as_slice()]).collect();
    let source_class: Vec<u32> = ss
        .iter()
        .map(|s| interned.get(s.as_slice()).copied().unwrap_or(u32::MAX))
        .collect();
    let mut a = source_class.clone();
    let mut b = target_class.clone();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return None;
    }
    let width = num_monomials(n);
    let target_proj = (0..=n)
        .map(|k| {
            let mask = prefix_mask(k);
            Subspace::from_generators(width, target.subspace().basis().iter().map(|&t| t & mask))
        })
        .collect();
    let search = Search {
        n,
        width,
        source: source.basis(),
        source_data,
        target_data,
        source_class,
        target_class,
        target_proj,
    };
    let mut cols = Vec::with_capacity(n);
    let images = vec![0u64; source.dim()];
    if search.dfs(&mut cols, &Subspace::zero(n), &images) {
        debug_assert_eq!(&compose_linear(source, &cols), target);
        Some(cols)
    } else {
        None
    }
}

/// Sorted vector signatures; equal for equivalent spaces.
fn vector_profile(s: &QuadSpace) -> String {
    let mut sigs = VectorData::new(s).signatures();
    sigs.sort_unstable();
    let mut out = String::new();
    let mut i = 0;
    while i < sigs.len() {
        let j = i + sigs[i..].iter().take_while(|x| **x == sigs[i]).count();
        let body: Vec<String> = sigs[i].iter().map(u16::to_string).collect();
        out.push_str(&format!("{}x{};", j - i, body.join(".")));
        i = j;
    }
    out
}

pub fn are_equivalent(a: &QuadSpace, b: &QuadSpace) -> bool {
    find_equivalence(a, b).is_some()
}

/// Invariant bucket key: dimension, rank histogram, vector signatures and
/// J2 signature.
pub fn class_key(s: &QuadSpace) -> String {
    let hist = rank_histogram(s)
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join("/");
    format!(
        "{}:{}:{}:{}:{}",
        s.n(),
        s.dim(),
        hist,
        vector_profile(s),
        j2_signature(s).canonical_string()
    )
}

/// Representatives of the equivalence classes among `candidates`.
///
/// The result is independent of the input order and of the thread count:
/// candidates are bucketed by [`class_key`], each bucket is sorted, and the
/// first member of every class in that order becomes its representative.
pub fn classify(candidates: Vec<QuadSpace>) -> Vec<QuadSpace> {
    let keyed: Vec<(String, QuadSpace)> = candidates
        .into_par_iter()
        .map(|s| (class_key(&s), s))
        .collect();
    let mut buckets: BTreeMap<String, Vec<QuadSpace>> = BTreeMap::new();
    for (k, s) in keyed {
        buckets.entry(k).or_default().push(s);
    }
    let mut reps: Vec<QuadSpace> = buckets
        .into_par_iter()
        .flat_map_iter(|(_, mut members)| {
            members.sort_unstable();
            members.dedup();
            let mut reps: Vec<QuadSpace> = Vec::new();
            for s in members {
                if !reps.iter().any(|r| are_equivalent(&s, r)) {
                    reps.push(s);
                }
            }
            reps
        })
        .collect();
    reps.sort_unstable();
    reps
}

/// Deduplication by [`crate::vecfun::J2Signature`] alone; keeps the least
/// space of every signature.
pub fn dedup_by_j2(candidates: Vec<QuadSpace>) -> Vec<QuadSpace> {
    let keyed: Vec<(String, QuadSpace)> = candidates
        .into_par_iter()
        .map(|s| (j2_signature(&s).canonical_string(), s))
        .collect();
    let mut best: BTreeMap<String, QuadSpace> = BTreeMap::new();
    for (k, s) in keyed {
        match best.get(&k) {
            Some(cur) if *cur <= s => {}
            _ => {
                best.insert(k, s);
            }
        }
    }
    let mut out: Vec<QuadSpace> = best.into_values().collect();
    out.sort_unstable();
    out
}
