//! The finishing step from an (n, n-2) quadratic function to APN functions.
//!
//! With `W = S^perp` in the space of forms, an n-dimensional `T^perp`
//! containing `S` is APN iff the codimension-2 subspace `T` of `W` avoids
//! the rank-2 forms. Writing `T = {w : u.w = v.w = 0}` for a 2-dimensional
//! `{0, u, v, u+v}` of W-coordinates and letting `f` be the indicator of
//! `Q2 ∩ W`, the Poisson summation formula gives
//!
//! ```text
//! fr(0) + fr(u) + fr(v) + fr(u+v) = 4 |Q2 ∩ T|
//! ```
//!
//! so avoidance means the four transform values sum to zero.

use crate::error::{Error, Result};
use crate::f2core::{self, Subspace};
use crate::quadspace::{fwht, num_monomials};
use crate::vecfun::{rank2_forms, QuadSpace};

/// Largest `dim W` for which the transform table is materialized.
pub const MAX_TABLE_BITS: usize = 26;

/// Walsh transform over `W` of the rank-2 indicator, indexed by
/// W-coordinates. The scalar product is the dot product of coordinates with
/// respect to the reduced basis of `W`.
#[derive(Clone, Debug)]
pub struct FourierTable {
    n: usize,
    w: Subspace,
    hits: Vec<u64>,
    tfr: Vec<i32>,
}

impl FourierTable {
    pub fn new(s: &QuadSpace) -> Result<Self> {
        let n = s.n();
        let w = s.subspace().complement();
        if w.dim() > MAX_TABLE_BITS {
            return Err(Error::Invalid(format!(
                "W has dimension {} (table limit {MAX_TABLE_BITS})",
                w.dim()
            )));
        }
        let hits: Vec<u64> = rank2_forms(n)
            .iter()
            .filter_map(|q| w.coordinates(q.coeffs()))
            .collect();
        let mut tfr = vec![0i32; 1 << w.dim()];
        for &c in &hits {
            tfr[c as usize] = 1;
        }
        fwht(&mut tfr);
        Ok(FourierTable { n, w, hits, tfr })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Reduced basis of `W` in monomial coordinates.
    pub fn w_basis(&self) -> &[u64] {
        self.w.basis()
    }

    pub fn w_dim(&self) -> usize {
        self.w.dim()
    }

    pub fn get(&self, t: u64) -> i64 {
        i64::from(self.tfr[t as usize])
    }

    pub fn values(&self) -> &[i32] {
        &self.tfr
    }

    /// `|Q2 ∩ W|`, which is also the transform at 0.
    pub fn hit_count(&self) -> usize {
        self.hits.len()
    }

    pub fn satisfies_parseval(&self) -> bool {
        let lhs: i128 = self
            .tfr
            .iter()
            .map(|&x| i128::from(x) * i128::from(x))
            .sum();
        lhs == (self.hits.len() as i128) << self.w.dim()
    }

    /// All unordered `{u, v}` spans whose three nonzero values sum to
    /// `-fr(0)`. Each span is reported once as `(u, v)` with
    /// `(fr(u), u) < (fr(v), v) < (fr(u+v), u+v)`.
    pub fn avoiding_pairs(&self) -> Vec<(u64, u64)> {
        let n0 = i64::from(self.tfr[0]);
        // nonzero t sorted by (tfr, t) with a counting sort on tfr
        let offset = n0;
        let mut counts = vec![0usize; (2 * n0 + 2) as usize];
        for &x in &self.tfr[1..] {
            counts[(i64::from(x) + offset) as usize + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut order = vec![0u32; self.tfr.len() - 1];
        for (t, &x) in self.tfr.iter().enumerate().skip(1) {
            let slot = &mut counts[(i64::from(x) + offset) as usize];
            order[*slot] = t as u32;
            *slot += 1;
        }
        let key = |t: u64| (self.get(t), t);
        let mut pairs = Vec::new();
        for (i, &u) in order.iter().enumerate() {
            let u = u64::from(u);
            let fu = self.get(u);
            if 3 * fu > -n0 {
                break;
            }
            for &v in &order[i + 1..] {
                let v = u64::from(v);
                let fv = self.get(v);
                if 2 * fv > -n0 - fu {
                    break;
                }
                let w = u ^ v;
                if key(w) > key(v) && fu + fv + self.get(w) == -n0 {
                    let inside = self
                        .hits
                        .iter()
                        .filter(|&&c| !f2core::dot(c, u) && !f2core::dot(c, v))
                        .count() as i64;
                    assert_eq!(
                        4 * inside,
                        n0 + fu + fv + self.get(w),
                        "Poisson identity violated at u = {u:#x}, v = {v:#x}"
                    );
                    pairs.push((u, v));
                }
            }
        }
        pairs
    }

    /// `T^perp` for `T = {w in W : u.w = v.w = 0}`.
    pub fn extension(&self, u: u64, v: u64) -> QuadSpace {
        let t_coords = Subspace::from_generators(self.w.dim(), [u, v]).complement();
        let t = Subspace::from_generators(
            num_monomials(self.n),
            t_coords.basis().iter().map(|&c| self.w.combine(c)),
        );
        QuadSpace::from_subspace(self.n, t.complement()).expect("same n")
    }
}

/// All n-dimensional APN component spaces containing `s`, for
/// `dim s = n - 2`. Sorted.
pub fn fourier_apn_extensions(s: &QuadSpace) -> Result<Vec<QuadSpace>> {
    let n = s.n();
    if n < 2 || s.dim() != n - 2 {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(2),
            got: s.dim(),
        });
    }
    let table = FourierTable::new(s)?;
    let mut out: Vec<QuadSpace> = table
        .avoiding_pairs()
        .into_iter()
        .map(|(u, v)| table.extension(u, v))
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::power_function;
    use crate::quadspace::QuadForm;
    use crate::vecfun::{comp_space, differential_uniformity, is_apn_flat};
    use std::collections::BTreeSet;

    /// Every 2-dimensional extension of `s` in the quotient, tested with the
    /// differential uniformity of an associated function.
    fn brute_force(s: &QuadSpace) -> BTreeSet<QuadSpace> {
        let n = s.n();
        let width = num_monomials(n);
        let reps: Vec<u64> = (1..1u64 << width)
            .filter(|&g| s.subspace().reduce(g) == g)
            .collect();
        let mut found = BTreeSet::new();
        for (i, &a) in reps.iter().enumerate() {
            for &b in &reps[i + 1..] {
                let t = QuadSpace::from_subspace(n, s.subspace().with(a).with(b)).unwrap();
                if t.dim() == n && differential_uniformity(&t.to_function().unwrap()) == 2 {
                    found.insert(t);
                }
            }
        }
        found
    }

    #[test]
    fn cube_restrictions_extend_back() {
        for n in [4, 5, 6] {
            let full = comp_space(&power_function(n, 3).unwrap()).unwrap();
            let s = QuadSpace::new(n, &full.basis()[..n - 2]).unwrap();
            let ext = fourier_apn_extensions(&s).unwrap();
            assert!(ext.contains(&full), "n = {n}");
            for t in &ext {
                assert!(s.is_subspace_of(t));
                assert_eq!(t.dim(), n);
                assert!(is_apn_flat(t).unwrap());
            }
        }
    }

    #[test]
    fn matches_brute_force_small() {
        for n in [4, 5] {
            let full = comp_space(&power_function(n, 3).unwrap()).unwrap();
            let s = QuadSpace::new(n, &full.basis()[1..n - 1]).unwrap();
            let ours: BTreeSet<QuadSpace> =
                fourier_apn_extensions(&s).unwrap().into_iter().collect();
            assert_eq!(ours, brute_force(&s), "n = {n}");
            assert!(!ours.is_empty());
        }
    }

    #[test]
    fn parseval_holds() {
        let s = QuadSpace::new(
            6,
            &[QuadForm::from_pairs(6, &[(0, 1), (2, 3), (4, 5)]).unwrap()],
        )
        .unwrap();
        let t = FourierTable::new(&s).unwrap();
        assert!(t.satisfies_parseval());
        assert_eq!(t.get(0) as usize, t.hit_count());
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let s = QuadSpace::zero(5).unwrap();
        assert!(matches!(
            fourier_apn_extensions(&s),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 0
            })
        ));
    }
}
