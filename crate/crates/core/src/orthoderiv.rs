//! Ortho-derivatives of quadratic APN functions and the spectra derived
//! from them, which serve as equivalence-class labels.
//!
//! For quadratic `F` the map `x -> F(x) + F(x+a) + F(0) + F(a)` is linear,
//! so its image is spanned by the values at the unit vectors. When `F` is
//! APN that image is a hyperplane and `pi(a)` is its unique nonzero normal.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::f2core::Subspace;
use crate::quadspace::fwht;
use crate::vecfun::VectorialFunction;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrthoDerivative {
    n: usize,
    values: Vec<u64>,
}

impl OrthoDerivative {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn get(&self, a: u64) -> u64 {
        self.values[a as usize]
    }

    pub fn as_function(&self) -> VectorialFunction {
        VectorialFunction::new(self.n, self.n, self.values.clone()).expect("n-bit values")
    }
}

/// The span of `{F(x) + F(x+a) + F(0) + F(a)}` for quadratic `F`.
pub fn derivative_image(f: &VectorialFunction, a: u64) -> Subspace {
    Subspace::from_generators(f.m(), (0..f.n()).map(|i| f.second_derivative(a, 1 << i)))
}

pub fn ortho_derivative(f: &VectorialFunction) -> Result<OrthoDerivative> {
    if f.n() != f.m() {
        return Err(Error::NotSquare { n: f.n(), m: f.m() });
    }
    if let Some(d) = f.degree() {
        if d > 2 {
            return Err(Error::NotQuadratic(d));
        }
    }
    let n = f.n();
    let values: Vec<Result<u64>> = (0..1u64 << n)
        .into_par_iter()
        .map(|a| {
            if a == 0 {
                return Ok(0);
            }
            let normal = derivative_image(f, a).complement();
            match normal.basis() {
                [p] => Ok(*p),
                _ => Err(Error::OrthoDerivativeNotUnique {
                    a,
                    dim: normal.dim(),
                }),
            }
        })
        .collect();
    Ok(OrthoDerivative {
        n,
        values: values.into_iter().collect::<Result<_>>()?,
    })
}

/// Differential and absolute Walsh spectra of the ortho-derivative, as
/// `value -> multiplicity` maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ODSignature {
    pub n: usize,
    pub diff_spectrum: BTreeMap<u64, u64>,
    pub walsh_spectrum_abs: BTreeMap<u64, u64>,
}

impl ODSignature {
    /// `n`, then the differential pairs, then the Walsh pairs, each pair as
    /// `value,count` in increasing value order, all comma separated.
    pub fn canonical_string(&self) -> String {
        let mut s = self.n.to_string();
        for (v, c) in self.diff_spectrum.iter().chain(&self.walsh_spectrum_abs) {
            write!(s, ",{v},{c}").expect("writing to a String");
        }
        s
    }

    /// SHA-256 of the canonical string, hex encoded.
    pub fn label(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_string().as_bytes()))
    }

    /// Parses [`ODSignature::canonical_string`]; the split between the two
    /// spectra is recovered from the known total multiplicity.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("malformed signature: {s}"));
        let nums: Vec<u64> = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (&n, rest) = nums.split_first().ok_or_else(bad)?;
        if rest.len() % 2 != 0 || n > 24 {
            return Err(bad());
        }
        let expected = ((1u64 << n) - 1) << n;
        let mut diff = BTreeMap::new();
        let mut walsh = BTreeMap::new();
        let mut seen = 0;
        for pair in rest.chunks(2) {
            if seen < expected {
                diff.insert(pair[0], pair[1]);
                seen += pair[1];
            } else {
                walsh.insert(pair[0], pair[1]);
            }
        }
        let sig = ODSignature {
            n: n as usize,
            diff_spectrum: diff,
            walsh_spectrum_abs: walsh,
        };
        if seen != expected || sig.walsh_spectrum_abs.values().sum::<u64>() != expected {
            return Err(bad());
        }
        Ok(sig)
    }
}

fn spectra(pi: &OrthoDerivative) -> (BTreeMap<u64, u64>, BTreeMap<u64, u64>) {
    let n = pi.n;
    let size = 1usize << n;
    let diff = (1..size as u64)
        .into_par_iter()
        .fold(
            || (BTreeMap::new(), vec![0u64; size]),
            |(mut acc, mut counts), a| {
                counts.iter_mut().for_each(|c| *c = 0);
                for x in 0..size as u64 {
                    counts[(pi.get(x) ^ pi.get(x ^ a)) as usize] += 1;
                }
                for &c in &counts {
                    *acc.entry(c).or_insert(0) += 1;
                }
                (acc, counts)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(BTreeMap::new, merge);
    let walsh = (1..size as u64)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, b| {
            let mut w: Vec<i64> = pi
                .values
                .iter()
                .map(|&v| if (v & b).count_ones() & 1 == 1 { -1 } else { 1 })
                .collect();
            fwht(&mut w);
            for v in w {
                *acc.entry(v.unsigned_abs()).or_insert(0) += 1;
            }
            acc
        })
        .reduce(BTreeMap::new, merge);
    (diff, walsh)
}

fn merge(mut a: BTreeMap<u64, u64>, b: BTreeMap<u64, u64>) -> BTreeMap<u64, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

pub fn od_signature(f: &VectorialFunction) -> Result<ODSignature> {
    let pi = ortho_derivative(f)?;
    let (diff_spectrum, walsh_spectrum_abs) = spectra(&pi);
    Ok(ODSignature {
        n: f.n(),
        diff_spectrum,
        walsh_spectrum_abs,
    })
}
