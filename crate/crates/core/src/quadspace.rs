//! Boolean functions and quadratic forms.
//!
//! A [`QuadForm`] keeps only the homogeneous degree-2 part of a quadratic
//! Boolean function. The monomial `x_i x_j` (`i < j`) lives at bit
//! `j(j-1)/2 + i`, so the first `C(k,2)` bits of a form are exactly its
//! monomials in the first `k` variables, whatever `n` is.

use std::fmt;
use std::ops::{Add, BitXor, Sub};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::f2core::{self, BitMat};

/// Largest number of variables a [`QuadForm`] supports (`C(11,2) = 55 <= 64`).
pub const MAX_VARS: usize = 11;

/// Bit position of the monomial `x_i x_j`, `i < j`.
#[inline]
pub const fn monomial_index(i: usize, j: usize) -> usize {
    j * (j - 1) / 2 + i
}

/// Number of quadratic monomials in `n` variables.
#[inline]
pub const fn num_monomials(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

const fn build_pairs() -> [(u8, u8); 64] {
    let mut out = [(0u8, 0u8); 64];
    let mut j = 1;
    while j < MAX_VARS {
        let mut i = 0;
        while i < j {
            out[monomial_index(i, j)] = (i as u8, j as u8);
            i += 1;
        }
        j += 1;
    }
    out
}

/// `PAIRS[p] = (i, j)` for the monomial at bit `p`.
const PAIRS: [(u8, u8); 64] = build_pairs();

#[inline]
pub fn monomial_pair(bit: usize) -> (usize, usize) {
    let (i, j) = PAIRS[bit];
    (i as usize, j as usize)
}

/// Truth table of a Boolean function on GF(2)^n, indexed by the integer
/// encoding of `x` with `x_0` as bit 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    values: Vec<bool>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<bool>) -> Result<Self> {
        if n > 30 {
            return Err(Error::TooManyVariables(n));
        }
        if values.len() != 1 << n {
            return Err(Error::TableLength {
                n,
                got: values.len(),
            });
        }
        Ok(TruthTable { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        if n > 30 {
            return Err(Error::TooManyVariables(n));
        }
        Ok(TruthTable {
            n,
            values: (0..1u64 << n).map(f).collect(),
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| false)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, x: u64) -> bool {
        self.values[x as usize]
    }

    /// Algebraic degree; `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        moebius(self)
            .values
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(s, _)| s.count_ones() as usize)
            .max()
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable(n={}, ", self.n)?;
        for &v in &self.values {
            write!(f, "{}", u8::from(v))?;
        }
        write!(f, ")")
    }
}

/// Binary Möbius transform: truth table to ANF coefficients and back.
pub fn moebius(tt: &TruthTable) -> TruthTable {
    let mut v = tt.values.clone();
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                v[i + h] ^= v[i];
            }
        }
        h *= 2;
    }
    TruthTable { n: tt.n, values: v }
}

/// In-place unnormalized Walsh–Hadamard butterfly.
pub fn fwht<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Walsh coefficients `sum_x (-1)^{f(x) + a.x}` for all `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WalshSpectrum {
    n: usize,
    values: Vec<i64>,
}

impl WalshSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn get(&self, a: u64) -> i64 {
        self.values[a as usize]
    }

    pub fn satisfies_parseval(&self) -> bool {
        let sum: i128 = self
            .values
            .iter()
            .map(|&v| i128::from(v) * i128::from(v))
            .sum();
        sum == 1i128 << (2 * self.n)
    }
}

pub fn walsh_spectrum(tt: &TruthTable) -> WalshSpectrum {
    let mut values: Vec<i64> = tt.values.iter().map(|&b| if b { -1 } else { 1 }).collect();
    fwht(&mut values);
    WalshSpectrum { n: tt.n, values }
}

/// Normalized fourth moment `2^{-3n} sum_u W(u)^4`, exactly.
pub fn alpha(tt: &TruthTable) -> Ratio<u128> {
    let spec = walsh_spectrum(tt);
    let sum: u128 = spec
        .values
        .iter()
        .map(|&v| {
            let s = v.unsigned_abs() as u128;
            s * s * s * s
        })
        .sum();
    Ratio::new(sum, 1u128 << (3 * tt.n))
}

/// Homogeneous quadratic form in `n <= MAX_VARS` variables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    n: u8,
    coeffs: u64,
}

impl QuadForm {
    pub fn new(n: usize, coeffs: u64) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::TooManyVariables(n));
        }
        let width = num_monomials(n);
        if width < 64 && coeffs >> width != 0 {
            return Err(Error::BitsBeyondWidth {
                width,
                bits: coeffs,
            });
        }
        Ok(QuadForm { n: n as u8, coeffs })
    }

    /// Callers guarantee `n <= MAX_VARS` and no stray bits.
    #[inline]
    pub(crate) fn new_unchecked(n: usize, coeffs: u64) -> Self {
        debug_assert!(n <= MAX_VARS && (num_monomials(n) == 64 || coeffs >> num_monomials(n) == 0));
        QuadForm { n: n as u8, coeffs }
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// The single monomial `x_i x_j`.
    pub fn monomial(n: usize, i: usize, j: usize) -> Result<Self> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i == j || j >= n {
            return Err(Error::Invalid(format!(
                "no monomial x{i}x{j} in {n} variables"
            )));
        }
        Self::new(n, 1 << monomial_index(i, j))
    }

    /// Sum of the monomials `x_i x_j` for the given index pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut q = Self::zero(n)?;
        for &(i, j) in pairs {
            q = q + Self::monomial(n, i, j)?;
        }
        Ok(q)
    }

    /// The homogeneous quadratic part of `tt`; rejects degree above 2.
    pub fn from_truth_table(tt: &TruthTable) -> Result<Self> {
        if tt.n > MAX_VARS {
            return Err(Error::TooManyVariables(tt.n));
        }
        let anf = moebius(tt);
        let mut coeffs = 0;
        for (s, &c) in anf.values.iter().enumerate() {
            if !c {
                continue;
            }
            match s.count_ones() {
                0 | 1 => {}
                2 => {
                    let i = s.trailing_zeros() as usize;
                    let j = 63 - (s as u64).leading_zeros() as usize;
                    coeffs |= 1 << monomial_index(i, j);
                }
                d => return Err(Error::NotQuadratic(d as usize)),
            }
        }
        Ok(QuadForm {
            n: tt.n as u8,
            coeffs,
        })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn coeffs(&self) -> u64 {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == 0
    }

    pub fn coeff(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i != j && (self.coeffs >> monomial_index(i, j)) & 1 == 1
    }

    /// Rows of the alternating matrix `U + U^T`, zero-padded to `MAX_VARS`.
    #[inline]
    pub fn polar_rows(&self) -> [u64; MAX_VARS] {
        let mut rows = [0u64; MAX_VARS];
        let mut c = self.coeffs;
        while c != 0 {
            let (i, j) = PAIRS[c.trailing_zeros() as usize];
            rows[i as usize] |= 1 << j;
            rows[j as usize] |= 1 << i;
            c &= c - 1;
        }
        rows
    }

    pub fn polar_matrix(&self) -> BitMat {
        let n = self.n().max(1);
        let rows = self.polar_rows();
        BitMat::from_rows(n, rows[..self.n()].to_vec()).expect("rows fit in n columns")
    }

    /// `B(u, .)` as a packed vector, `B` the polar form `q(x+y)+q(x)+q(y)`.
    #[inline]
    pub fn polar_vec(&self, u: u64) -> u64 {
        let mut out = 0;
        let mut c = self.coeffs;
        while c != 0 {
            let (i, j) = PAIRS[c.trailing_zeros() as usize];
            out ^= (((u >> i) & 1) << j) ^ (((u >> j) & 1) << i);
            c &= c - 1;
        }
        out
    }

    #[inline]
    pub fn polar(&self, u: u64, v: u64) -> bool {
        f2core::dot(self.polar_vec(u), v)
    }

    #[inline]
    pub fn eval(&self, x: u64) -> bool {
        let mut acc = 0u64;
        let mut c = self.coeffs;
        while c != 0 {
            let (i, j) = PAIRS[c.trailing_zeros() as usize];
            acc ^= (x >> i) & (x >> j) & 1;
            c &= c - 1;
        }
        acc == 1
    }

    pub fn truth_table(&self) -> TruthTable {
        TruthTable::from_fn(self.n(), |x| self.eval(x)).expect("n <= MAX_VARS")
    }

    /// GF(2)-rank of the polar matrix; always even.
    #[inline]
    pub fn rank(&self) -> usize {
        let mut rows = self.polar_rows();
        f2core::rank_in_place(&mut rows[..self.n()])
    }

    /// `2^{n - rank}`, the fourth moment of any function with this quadratic part.
    #[inline]
    pub fn alpha(&self) -> u64 {
        1 << (self.n() - self.rank())
    }
}

impl Add for QuadForm {
    type Output = QuadForm;

    fn add(self, rhs: QuadForm) -> QuadForm {
        assert_eq!(
            self.n, rhs.n,
            "adding forms in different numbers of variables"
        );
        QuadForm {
            n: self.n,
            coeffs: self.coeffs ^ rhs.coeffs,
        }
    }
}

impl BitXor for QuadForm {
    type Output = QuadForm;

    fn bitxor(self, rhs: QuadForm) -> QuadForm {
        self + rhs
    }
}

impl fmt::Debug for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs == 0 {
            return write!(f, "0");
        }
        let mut first = true;
        let mut c = self.coeffs;
        while c != 0 {
            let (i, j) = PAIRS[c.trailing_zeros() as usize];
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "x{i}x{j}")?;
            first = false;
            c &= c - 1;
        }
        Ok(())
    }
}

pub fn qf_rank(q: &QuadForm) -> usize {
    q.rank()
}

/// Bentness of a quadratic form: full rank.
pub fn is_bent(q: &QuadForm) -> Result<bool> {
    if q.n() % 2 == 1 {
        return Err(Error::OddDimension(q.n()));
    }
    Ok(q.rank() == q.n())
}
