//! Coordinate extension: grow a space of forms one dimension at a time,
//! starting from bent spaces, and finish at dimension `n - 2` with the
//! Fourier step.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::fourier::fourier_apn_extensions;
use super::{dedup_spaces, DedupKey, SearchBudget, SelectionPredicate};
use crate::classify;
use crate::error::{Error, Result};
use crate::orthoderiv::{od_signature, ODSignature};
use crate::quadspace::{num_monomials, QuadForm};
use crate::store::{DedupStore, FunctionRecord, Method, Provenance};
use crate::vecfun::{bs_pair, BSPair, QuadSpace, VectorialFunction};

/// Required [`BSPair`] of the extended space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionTarget {
    pub bent_count: u64,
    pub k_value: Option<u64>,
}

impl From<BSPair> for ExtensionTarget {
    fn from(p: BSPair) -> Self {
        ExtensionTarget {
            bent_count: p.b,
            k_value: Some(p.k),
        }
    }
}

/// `x0 x1 + x2 x3 + ... + x_{n-2} x_{n-1}`.
pub fn standard_bent_form(n: usize) -> Result<QuadForm> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let pairs: Vec<(usize, usize)> = (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect();
    QuadForm::from_pairs(n, &pairs)
}

const CHUNK_BITS: usize = 12;

struct CosetFilter {
    need_bent: u64,
    need_k: Option<u64>,
    max_other: u64,
}

fn extend(v: &QuadSpace, target: Option<&ExtensionTarget>) -> Result<Vec<QuadSpace>> {
    let n = v.n();
    let d = v.dim();
    if d >= n {
        return Err(Error::Invalid(format!(
            "cannot extend a {d}-dimensional space of forms in {n} variables"
        )));
    }
    let filter = match target {
        None => None,
        Some(t) => {
            let base = bs_pair(v)?;
            let size = 1u64 << d;
            let need_bent = match t.bent_count.checked_sub(base.b) {
                Some(b) if b <= size => b,
                _ => return Ok(Vec::new()),
            };
            let need_k = match t.k_value.map(|k| k.checked_sub(base.k)) {
                Some(None) => return Ok(Vec::new()),
                Some(Some(k)) => Some(k),
                None => None,
            };
            Some(CosetFilter {
                need_bent,
                need_k,
                max_other: size - need_bent,
            })
        }
    };
    let width = num_monomials(n);
    let full = if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    let free_mask = full & !v.subspace().pivot_mask();
    let free: Vec<u64> = (0..64)
        .filter(|b| free_mask >> b & 1 == 1)
        .map(|b| 1u64 << b)
        .collect();
    let elems: Vec<u64> = v.subspace().elements().collect();
    let diff_bound = 1u64 << (n - d);
    let low = CHUNK_BITS.min(free.len());
    let chunks = 1u64 << (free.len() - low);

    let check = |g: u64| -> Option<QuadSpace> {
        if let Some(f) = &filter {
            let (mut bent, mut other, mut k) = (0, 0, 0);
            for &e in &elems {
                let r = QuadForm::new_unchecked(n, g ^ e).rank();
                if r == n {
                    bent += 1;
                    if bent > f.need_bent {
                        return None;
                    }
                } else {
                    other += 1;
                    if other > f.max_other {
                        return None;
                    }
                }
                k += 1u64 << (n - r);
            }
            if f.need_k.is_some_and(|want| want != k) {
                return None;
            }
        }
        let w = QuadSpace::from_subspace(n, v.subspace().with(g)).expect("same n");
        (w.differential_uniformity() <= diff_bound).then_some(w)
    };

    let mut out: Vec<QuadSpace> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut g = 0u64;
            for (i, &bit) in free[low..].iter().enumerate() {
                if chunk >> i & 1 == 1 {
                    g |= bit;
                }
            }
            let mut found = Vec::new();
            for i in 0..1u64 << low {
                if i > 0 {
                    g ^= free[i.trailing_zeros() as usize];
                }
                if g != 0 {
                    found.extend(check(g));
                }
            }
            found
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// All `span(V, g)` (one per coset `g + V`) whose [`BSPair`] equals the
/// target and whose differential uniformity is at most `2^{n - dim V}`.
pub fn coordinate_extensions(v: &QuadSpace, target: &ExtensionTarget) -> Result<Vec<QuadSpace>> {
    extend(v, Some(target))
}

/// Every one-dimensional extension that survives the differential
/// uniformity bound.
pub fn all_coordinate_extensions(v: &QuadSpace) -> Result<Vec<QuadSpace>> {
    extend(v, None)
}

/// Representatives of the quadratic (n, m)-bent spaces. Exact classes for
/// `n <= 6`, J2-signature representatives above.
pub fn enumerate_bent_spaces(n: usize, m: usize) -> Result<Vec<QuadSpace>> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    if m > n / 2 {
        return Err(Error::NybergBound {
            requested: m,
            bound: n / 2,
        });
    }
    if m == 0 {
        return Ok(vec![QuadSpace::zero(n)?]);
    }
    let mut reps = vec![QuadSpace::new(n, &[standard_bent_form(n)?])?];
    for k in 1..m {
        let all = (1u64 << (k + 1)) - 1;
        let target = ExtensionTarget {
            bent_count: all,
            k_value: Some(all),
        };
        let cands: Vec<QuadSpace> = reps
            .par_iter()
            .map(|r| coordinate_extensions(r, &target))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        reps = if n <= 6 {
            classify::classify(cands)
        } else {
            classify::dedup_by_j2(cands)
        };
    }
    Ok(reps)
}

#[derive(Clone, Debug, Default)]
pub struct BentPipelineOptions {
    pub dedup: DedupKey,
    pub selection: SelectionPredicate,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct BentPipelineReport {
    /// `(dimension, spaces kept)` for every coordinate level run.
    pub levels: Vec<(usize, usize)>,
    /// Distinct APN component spaces produced by the finisher.
    pub apn_spaces: usize,
    /// One function per class that was new to the store.
    pub emitted: Vec<VectorialFunction>,
    /// False when the budget stopped the run early.
    pub complete: bool,
}

const FINISH_BATCH: usize = 64;

/// Extends `(n, n/2)`-bent seeds level by level to dimension `n - 2`,
/// following `profile_target[dim]` where given, then finishes with the
/// Fourier step and commits the APN functions to `store`.
pub fn bent_pipeline(
    seeds: &[QuadSpace],
    profile_target: &[BSPair],
    budget: &SearchBudget,
    options: &BentPipelineOptions,
    store: &DedupStore,
) -> Result<BentPipelineReport> {
    let started = Instant::now();
    let out_of_time = || budget.time_limit.is_some_and(|t| started.elapsed() >= t);
    let Some(first) = seeds.first() else {
        return Ok(BentPipelineReport {
            complete: true,
            ..Default::default()
        });
    };
    let n = first.n();
    if n % 2 == 1 || n < 4 {
        return Err(Error::Invalid(format!(
            "bent pipeline needs even n >= 4, got {n}"
        )));
    }
    for s in seeds {
        let all = (1u64 << (n / 2)) - 1;
        if s.n() != n || s.dim() != n / 2 || bs_pair(s)?.b != all {
            return Err(Error::Invalid(format!(
                "seed is not an ({n}, {})-bent space",
                n / 2
            )));
        }
    }
    let mut report = BentPipelineReport::default();
    let (mut dim, mut pending) = match options.checkpoint.as_deref().filter(|p| p.exists()) {
        Some(path) => {
            let cp = Checkpoint::load(path)?;
            if cp.n != n {
                return Err(Error::Invalid(format!("checkpoint is for n = {}", cp.n)));
            }
            store.extend_from_records(cp.records)?;
            (cp.stage, cp.pending)
        }
        None => {
            let mut p = seeds.to_vec();
            p.sort_unstable();
            p.dedup();
            (n / 2, p)
        }
    };
    let save = |stage: usize, pending: &[QuadSpace]| -> Result<()> {
        if let Some(path) = &options.checkpoint {
            Checkpoint {
                stage,
                n,
                pending: pending.to_vec(),
                records: store.records(),
            }
            .save(path)?;
        }
        Ok(())
    };

    while dim < n - 2 {
        if out_of_time() {
            return Ok(report);
        }
        let target = profile_target
            .get(dim + 1)
            .copied()
            .map(ExtensionTarget::from);
        let cands: Vec<QuadSpace> = pending
            .par_iter()
            .map(|s| extend(s, target.as_ref()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let mut next = dedup_spaces(cands, options.dedup);
        if dim + 1 == n - 2 && options.selection == SelectionPredicate::Half {
            next = next.into_iter().step_by(2).collect();
        }
        dim += 1;
        report.levels.push((dim, next.len()));
        pending = next;
        save(dim, &pending)?;
    }

    let provenance = Provenance {
        method: Method::BentPipeline,
        seed: Some(budget.seed),
        stage: Some(format!("finish:{}", n - 2)),
    };
    while !pending.is_empty() {
        if out_of_time()
            || budget
                .max_results
                .is_some_and(|m| report.emitted.len() >= m)
        {
            return Ok(report);
        }
        let take = FINISH_BATCH.min(pending.len());
        let per_space: Vec<Vec<(QuadSpace, VectorialFunction, ODSignature)>> = pending[..take]
            .par_iter()
            .map(|s| {
                fourier_apn_extensions(s)?
                    .into_iter()
                    .map(|t| {
                        let f = t.to_function()?;
                        let sig = od_signature(&f)?;
                        Ok((t, f, sig))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut seen = BTreeSet::new();
        for (i, found) in per_space.into_iter().enumerate() {
            for (t, f, sig) in found {
                if !seen.insert(t) {
                    continue;
                }
                let mut rec = FunctionRecord::from_function(&f, provenance.clone());
                rec.labels.od = Some(sig.label());
                rec.labels.od_signature = Some(sig.canonical_string());
                if store.insert_signed(sig, rec) {
                    report.emitted.push(f);
                    if budget
                        .max_results
                        .is_some_and(|m| report.emitted.len() >= m)
                    {
                        // space i may have more; it stays pending
                        pending.drain(..i);
                        report.apn_spaces += seen.len();
                        save(n - 2, &pending)?;
                        return Ok(report);
                    }
                }
            }
        }
        pending.drain(..take);
        report.apn_spaces += seen.len();
        save(n - 2, &pending)?;
    }
    save(n - 1, &[])?;
    report.complete = true;
    Ok(report)
}
