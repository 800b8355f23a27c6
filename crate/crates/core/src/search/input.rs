//! Input-dimension extension `G(x, x_n) = F(x) + x_n L(x)`.
//!
//! For quadratic `F` with differential uniformity 2 and linear `L`, `G` has
//! differential uniformity 2 iff `L(a)` avoids the image of the linear map
//! `x -> F(x) + F(x+a) + F(0) + F(a)` for every nonzero `a`. The values
//! `L(e_0), L(e_1), ...` are chosen in turn; when `L(e_i)` is chosen every
//! direction `a = e_i + b` with `b` in the span of earlier unit vectors is
//! settled, which gives the set of forbidden values for `L(e_i)`.
//!
//! Replacing `L` by `L + D_v` (the linear part of a derivative of `F`)
//! gives an equivalent lift, so when only classes matter the search keeps
//! one `L` per coset of the span of the `D_v`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::SearchBudget;
use crate::classify;
use crate::error::{Error, Result};
use crate::f2core::Subspace;
use crate::orthoderiv::{derivative_image, od_signature};
use crate::store::{DedupStore, FunctionRecord, Method, Provenance};
use crate::vecfun::{comp_space, differential_uniformity, AffineMap, VectorialFunction};

/// Largest output width handled (forbidden sets are bitsets of `2^m`).
const MAX_M: usize = 20;

struct LiftContext {
    n: usize,
    m: usize,
    /// `images[a]`: elements of the derivative image in direction `a`.
    images: Vec<Vec<u64>>,
    /// Span of the linear parts of the derivatives, as packed `L` vectors.
    shifts: Option<Subspace>,
}

impl LiftContext {
    fn new(f: &VectorialFunction) -> Result<Self> {
        let (n, m) = (f.n(), f.m());
        if m > MAX_M || n + 1 > crate::vecfun::MAX_INPUT_BITS {
            return Err(Error::Invalid(format!("({n}, {m}) is too large to lift")));
        }
        if let Some(d) = f.degree() {
            if d > 2 {
                return Err(Error::NotQuadratic(d));
            }
        }
        if n == 0 {
            return Err(Error::Invalid(
                "cannot lift a function of 0 variables".into(),
            ));
        }
        let delta = differential_uniformity(f);
        if delta != 2 {
            return Err(Error::NotDifferentiallyTwoUniform(delta));
        }
        let images = (0..1u64 << n)
            .map(|a| {
                if a == 0 {
                    Vec::new()
                } else {
                    derivative_image(f, a).elements().collect()
                }
            })
            .collect();
        let shifts = (n * m <= 64).then(|| {
            Subspace::from_generators(
                n * m,
                (0..n).map(|j| {
                    (0..n).fold(0u64, |acc, i| {
                        acc | f.second_derivative(1 << j, 1 << i) << (i * m)
                    })
                }),
            )
        });
        Ok(LiftContext {
            n,
            m,
            images,
            shifts,
        })
    }

    /// Values of `L(e_i)` compatible with the fixed `cols = L(e_0..e_{i-1})`.
    fn allowed(&self, cols: &[u64]) -> Vec<u64> {
        let i = cols.len();
        let mut forbidden = vec![0u64; (1usize << self.m).div_ceil(64)];
        // b runs over the earlier span in Gray order; lb = L(b)
        let mut lb = 0u64;
        for b in 0..1u64 << i {
            if b > 0 {
                lb ^= cols[b.trailing_zeros() as usize];
            }
            let beta = b ^ (b >> 1);
            let a = (1u64 << i) | beta;
            for &y in &self.images[a as usize] {
                let v = (y ^ lb) as usize;
                forbidden[v / 64] |= 1 << (v % 64);
            }
        }
        (0..1u64 << self.m)
            .filter(|&v| forbidden[v as usize / 64] >> (v % 64) & 1 == 0)
            .collect()
    }

    fn is_reduced(&self, cols: &[u64]) -> bool {
        match &self.shifts {
            None => true,
            Some(s) => {
                let packed = cols
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &c)| acc | c << (i * self.m));
                s.reduce(packed) == packed
            }
        }
    }

    fn dfs(&self, cols: &mut Vec<u64>, reduced: bool, out: &mut Vec<Vec<u64>>) {
        if cols.len() == self.n {
            if !reduced || self.is_reduced(cols) {
                out.push(cols.clone());
            }
            return;
        }
        for v in self.allowed(cols) {
            cols.push(v);
            self.dfs(cols, reduced, out);
            cols.pop();
        }
    }

    fn enumerate(&self, reduced: bool) -> Vec<Vec<u64>> {
        self.allowed(&[])
            .into_par_iter()
            .flat_map_iter(|v| {
                let mut out = Vec::new();
                self.dfs(&mut vec![v], reduced, &mut out);
                out
            })
            .collect()
    }
}

/// `G(x, x_n) = F(x) + x_n L(x)` with `L(e_i) = columns[i]`.
pub fn lift(f: &VectorialFunction, columns: &[u64]) -> Result<VectorialFunction> {
    let n = f.n();
    if columns.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: columns.len(),
        });
    }
    let l = AffineMap::new(n, f.m(), columns.to_vec(), 0)?;
    let mask = (1u64 << n) - 1;
    VectorialFunction::from_fn(n + 1, f.m(), |x| {
        let lo = x & mask;
        if x >> n & 1 == 1 {
            f.eval(lo) ^ l.apply(lo)
        } else {
            f.eval(lo)
        }
    })
}

/// Whether `lift(F, L)` keeps differential uniformity 2.
pub fn input_extension_check(f: &VectorialFunction, l: &AffineMap) -> Result<bool> {
    if l.in_dim() != f.n() || l.out_dim() != f.m() || l.constant() != 0 {
        return Err(Error::Invalid(format!(
            "L must be a linear ({}, {})-map",
            f.n(),
            f.m()
        )));
    }
    let ctx = LiftContext::new(f)?;
    Ok((1..1u64 << f.n()).all(|a| !ctx.images[a as usize].contains(&l.apply(a))))
}

/// Every admissible `L`, as column lists, in depth-first order.
pub fn admissible_lifts(f: &VectorialFunction) -> Result<Vec<Vec<u64>>> {
    Ok(LiftContext::new(f)?.enumerate(false))
}

/// Randomized incremental construction of `L`, up to `budget.attempts`
/// times. Attempt `i` draws from the ChaCha8 stream `i` of `budget.seed`.
pub fn extend_input_random(
    f: &VectorialFunction,
    budget: &SearchBudget,
) -> Result<Option<VectorialFunction>> {
    let ctx = LiftContext::new(f)?;
    let started = Instant::now();
    for attempt in 0..budget.attempts {
        if budget.time_limit.is_some_and(|t| started.elapsed() >= t) {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(attempt);
        let mut cols = Vec::with_capacity(ctx.n);
        while cols.len() < ctx.n {
            let allowed = ctx.allowed(&cols);
            if allowed.is_empty() {
                break;
            }
            cols.push(allowed[rng.gen_range(0..allowed.len())]);
        }
        if cols.len() == ctx.n {
            return lift(f, &cols).map(Some);
        }
    }
    Ok(None)
}

/// All lifts with differential uniformity 2. Square lifts are reduced to
/// one function per ortho-derivative signature.
pub fn extend_input_exhaustive(f: &VectorialFunction) -> Result<Vec<VectorialFunction>> {
    let ctx = LiftContext::new(f)?;
    let square = f.n() + 1 == f.m();
    let lifts: Vec<VectorialFunction> = ctx
        .enumerate(square)
        .into_par_iter()
        .map(|cols| lift(f, &cols))
        .collect::<Result<_>>()?;
    if !square {
        return Ok(lifts);
    }
    let sigs = lifts
        .par_iter()
        .map(od_signature)
        .collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::HashSet::new();
    Ok(lifts
        .into_iter()
        .zip(sigs)
        .filter_map(|(g, s)| seen.insert(s).then_some(g))
        .collect())
}

/// The same function with `m` output bits.
pub fn pad_outputs(f: &VectorialFunction, m: usize) -> Result<VectorialFunction> {
    if f.m() > m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: f.m(),
        });
    }
    VectorialFunction::new(f.n(), m, f.values().to_vec())
}

/// Class representatives of all lifts of the given functions, which must
/// all be homogeneous quadratic (n, m)-functions with differential
/// uniformity 2 and represent every class of such functions. Returns
/// homogeneous (n+1, m)-representatives.
pub fn classify_lifts(reps: &[VectorialFunction]) -> Result<Vec<VectorialFunction>> {
    let Some(first) = reps.first() else {
        return Ok(Vec::new());
    };
    let m = first.m();
    let spaces: Vec<crate::vecfun::QuadSpace> = reps
        .par_iter()
        .map(|f| {
            let ctx = LiftContext::new(f)?;
            ctx.enumerate(true)
                .into_iter()
                .map(|cols| comp_space(&lift(f, &cols)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    classify::classify(spaces)
        .iter()
        .map(|s| pad_outputs(&s.to_function()?, m))
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct InputPipelineReport {
    /// `(n, classes)` for every exactly classified level.
    pub classified: Vec<(usize, usize)>,
    /// `(n, functions)` reached by random lifting.
    pub random_levels: Vec<(usize, usize)>,
    /// One function per class that was new to the store.
    pub emitted: Vec<VectorialFunction>,
    pub complete: bool,
}

/// Classifies quadratic (k, m)-functions with differential uniformity 2 for
/// `k <= n_start`, lifts every class at random up to `m - 1` inputs, and
/// finishes each with [`extend_input_exhaustive`], committing the APN
/// functions to `store`.
pub fn input_pipeline(
    n_start: usize,
    m: usize,
    budget: &SearchBudget,
    store: &DedupStore,
) -> Result<InputPipelineReport> {
    if n_start == 0 || n_start > m || m > MAX_M {
        return Err(Error::Invalid(format!(
            "input pipeline needs 1 <= n_start <= m <= {MAX_M}, got n_start = {n_start}, m = {m}"
        )));
    }
    if budget.attempts == 0 {
        return Err(Error::Invalid("attempt budget must be at least 1".into()));
    }
    let started = Instant::now();
    let out_of_time = || budget.time_limit.is_some_and(|t| started.elapsed() >= t);
    let mut report = InputPipelineReport::default();
    let mut current = vec![VectorialFunction::new(1, m, vec![0, 0])?];
    report.classified.push((1, 1));
    for k in 1..n_start {
        if out_of_time() {
            return Ok(report);
        }
        current = classify_lifts(&current)?;
        report.classified.push((k + 1, current.len()));
    }
    let mut level = n_start;
    while level + 1 < m {
        if out_of_time() {
            return Ok(report);
        }
        current = current
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let b = SearchBudget {
                    seed: budget.derive_seed(level as u64, i as u64),
                    ..budget.clone()
                };
                extend_input_random(f, &b)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        level += 1;
        report.random_levels.push((level, current.len()));
    }
    let finished: Vec<VectorialFunction> = if level == m {
        current
    } else {
        let mut all = Vec::new();
        for f in &current {
            if out_of_time() {
                break;
            }
            all.extend(extend_input_exhaustive(f)?);
        }
        all
    };
    let provenance = Provenance {
        method: Method::InputPipeline,
        seed: Some(budget.seed),
        stage: Some(format!("exhaustive:{}", m)),
    };
    let sigs = finished
        .par_iter()
        .map(od_signature)
        .collect::<Result<Vec<_>>>()?;
    for (f, sig) in finished.into_iter().zip(sigs) {
        if budget
            .max_results
            .is_some_and(|k| report.emitted.len() >= k)
        {
            return Ok(report);
        }
        let mut rec = FunctionRecord::from_function(&f, provenance.clone());
        rec.labels.od = Some(sig.label());
        rec.labels.od_signature = Some(sig.canonical_string());
        if store.insert_signed(sig, rec) {
            report.emitted.push(f);
        }
    }
    report.complete = !out_of_time();
    Ok(report)
}
