//! Estimates of the total number of classes from sampled labels.
//!
//! If `t` draws with replacement from `N` equally likely classes show `l`
//! distinct labels, the likelihood is proportional to `C(N, l) / N^t`. The
//! log of the ratio of consecutive likelihoods,
//!
//! ```text
//! g(N) = ln f(N+1) - ln f(N) = ln((N+1) / (N+1-l)) - t ln((N+1) / N)
//! ```
//!
//! is decreasing, and the estimate is the first `N >= l` with `g(N) <= 0`.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStats {
    /// Sample size.
    pub t: u64,
    /// Distinct labels observed.
    pub l: u64,
    /// Samples outside the known class set.
    pub t_new: Option<u64>,
    /// Size of the known class set.
    pub m_known: Option<u64>,
}

impl SampleStats {
    pub fn new(t: u64, l: u64) -> Self {
        SampleStats {
            t,
            l,
            t_new: None,
            m_known: None,
        }
    }

    pub fn with_overlap(t: u64, t_new: u64, m_known: u64) -> Self {
        SampleStats {
            t,
            l: t,
            t_new: Some(t_new),
            m_known: Some(m_known),
        }
    }
}

/// Below this magnitude the floating-point sign of `g` is re-checked
/// exactly.
const CERTIFIED_MARGIN: f64 = 1e-12;

/// Sign of `g(N)`: true when `f(N+1) <= f(N)`.
fn not_increasing(n: u64, t: u64, l: u64) -> bool {
    let nf = n as f64;
    let g = (l as f64 / (nf + 1.0 - l as f64)).ln_1p() - t as f64 * (1.0 / nf).ln_1p();
    if g.abs() > CERTIFIED_MARGIN {
        return g <= 0.0;
    }
    likelihood_ratio_at_most_one(n, t, l)
}

/// Maximum-likelihood number of classes.
pub fn mle_class_count(stats: &SampleStats) -> Result<u64> {
    let SampleStats { t, l, .. } = *stats;
    if l == 0 || l > t {
        return Err(Error::Estimator("need 1 <= l <= t"));
    }
    if l == t {
        return Err(Error::Estimator("sample shows no repeats"));
    }
    if t > u64::from(u32::MAX) {
        return Err(Error::Estimator("sample too large"));
    }
    if not_increasing(l, t, l) {
        return Ok(l);
    }
    let mut lo = l;
    let mut hi = l.checked_mul(2).ok_or(Error::Estimator("overflow"))?;
    while !not_increasing(hi, t, l) {
        lo = hi;
        hi = hi.checked_mul(2).ok_or(Error::Estimator("overflow"))?;
    }
    // g(lo) > 0 >= g(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if not_increasing(mid, t, l) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapEstimate {
    pub exact: Ratio<u128>,
    pub nearest: u128,
}

/// `t M / (t - t')`.
pub fn overlap_class_count(stats: &SampleStats) -> Result<OverlapEstimate> {
    let t_new = stats.t_new.ok_or(Error::Estimator("t' is required"))?;
    let m = stats.m_known.ok_or(Error::Estimator("M is required"))?;
    if t_new > stats.t {
        return Err(Error::Estimator("t' exceeds t"));
    }
    if t_new == stats.t {
        return Err(Error::Estimator("no overlap with the known set (t' = t)"));
    }
    let exact = Ratio::new(
        u128::from(stats.t) * u128::from(m),
        u128::from(stats.t - t_new),
    );
    let half = Ratio::new(1, 2);
    let nearest = (exact + half).floor().to_integer();
    Ok(OverlapEstimate { exact, nearest })
}

/// Exact test of `f(N+1) <= f(N)`, cross-multiplied to
/// `(N+1) N^t <= (N+1-l) (N+1)^t`.
pub fn likelihood_ratio_at_most_one(n: u64, t: u64, l: u64) -> bool {
    let lhs = BigUint::from(n + 1) * BigUint::from(n).pow(t as u32);
    let rhs = BigUint::from(n + 1 - l) * BigUint::from(n + 1).pow(t as u32);
    lhs <= rhs
}

/// `f64` approximation of the estimate, for display.
pub fn as_f64(r: &Ratio<u128>) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}
