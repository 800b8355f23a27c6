//! Bit-packed linear algebra over GF(2).
//!
//! Vectors of up to 64 coordinates live in a single `u64`; coordinate `i` is
//! bit `i`. Subspaces are kept in reduced row-echelon form with the pivot of
//! each basis vector at its highest set bit, which makes the basis canonical:
//! two subspaces are equal iff their bases are equal.

use std::fmt;
use std::ops::BitXor;

use crate::error::{Error, Result};

#[inline]
fn width_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Parity of the coordinate-wise product.
#[inline]
pub fn dot(a: u64, b: u64) -> bool {
    (a & b).count_ones() & 1 == 1
}

/// An element of GF(2)^width, `1 <= width <= 64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    width: u8,
    bits: u64,
}

impl BitVec {
    pub fn new(width: usize, bits: u64) -> Result<Self> {
        if width == 0 || width > 64 {
            return Err(Error::InvalidWidth(width));
        }
        if bits & !width_mask(width) != 0 {
            return Err(Error::BitsBeyondWidth { width, bits });
        }
        Ok(BitVec {
            width: width as u8,
            bits,
        })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(width, 0)
    }

    /// The `i`-th standard basis vector.
    pub fn unit(width: usize, i: usize) -> Result<Self> {
        if i >= width {
            return Err(Error::BitsBeyondWidth {
                width,
                bits: 1u64.checked_shl(i as u32).unwrap_or(0),
            });
        }
        Self::new(width, 1 << i)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.width() && (self.bits >> i) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        dot(self.bits, other.bits)
    }
}

impl BitXor for BitVec {
    type Output = BitVec;

    fn bitxor(self, rhs: BitVec) -> BitVec {
        assert_eq!(self.width, rhs.width, "width mismatch in BitVec xor");
        BitVec {
            width: self.width,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width()).rev() {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// A dense `rows x cols` matrix over GF(2), one packed word per row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMat {
    cols: usize,
    rows: Vec<u64>,
}

impl BitMat {
    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Result<Self> {
        if cols == 0 || cols > 64 {
            return Err(Error::InvalidWidth(cols));
        }
        let mask = width_mask(cols);
        if let Some(&bad) = rows.iter().find(|&&r| r & !mask != 0) {
            return Err(Error::BitsBeyondWidth {
                width: cols,
                bits: bad,
            });
        }
        Ok(BitMat { cols, rows })
    }

    pub fn from_bitvecs(cols: usize, rows: &[BitVec]) -> Result<Self> {
        for r in rows {
            if r.width() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.width(),
                });
            }
        }
        Self::from_rows(cols, rows.iter().map(BitVec::bits).collect())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_rows(n, (0..n).map(|i| 1u64 << i).collect())
    }

    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        Self::from_rows(cols, vec![0; rows])
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> BitVec {
        BitVec {
            width: self.cols as u8,
            bits: self.rows[i],
        }
    }

    pub fn row_words(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.rows[r] >> c) & 1 == 1
    }

    pub fn transpose(&self) -> BitMat {
        let mut out = vec![0u64; self.cols];
        for (r, &row) in self.rows.iter().enumerate() {
            let mut bits = row;
            while bits != 0 {
                let c = bits.trailing_zeros() as usize;
                out[c] |= 1 << r;
                bits &= bits - 1;
            }
        }
        BitMat {
            cols: self.rows.len().max(1),
            rows: out,
        }
    }

    /// `self * x` where `x` is a column vector packed into a word.
    pub fn mul_vec(&self, x: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &r)| acc | (u64::from(dot(r, x)) << i))
    }
}

impl fmt::Debug for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMat {}x{}", self.rows(), self.cols)?;
        for i in 0..self.rows() {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Rank of a set of packed rows; the slice is used as scratch space.
#[inline]
pub fn rank_in_place(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    let len = rows.len();
    for i in 0..len {
        let r = rows[i];
        if r == 0 {
            continue;
        }
        let pivot = 63 - r.leading_zeros();
        let bit = 1u64 << pivot;
        for row in rows.iter_mut().skip(i + 1) {
            if *row & bit != 0 {
                *row ^= r;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a list of packed vectors.
pub fn rank_of(vectors: &[u64]) -> usize {
    if vectors.len() <= 64 {
        let mut buf = [0u64; 64];
        buf[..vectors.len()].copy_from_slice(vectors);
        rank_in_place(&mut buf[..vectors.len()])
    } else {
        rank_in_place(&mut vectors.to_vec())
    }
}

pub fn gf2_rank(m: &BitMat) -> usize {
    rank_of(&m.rows)
}

/// Basis of `{x : m x = 0}`.
pub fn kernel_basis(m: &BitMat) -> Vec<BitVec> {
    let rowspace = Subspace::from_generators(m.cols, m.rows.iter().copied());
    rowspace
        .complement()
        .basis()
        .iter()
        .map(|&b| BitVec {
            width: m.cols as u8,
            bits: b,
        })
        .collect()
}

/// Basis of the orthogonal complement of `span(basis)` in GF(2)^ambient_dim.
pub fn orthogonal_complement(basis: &[BitVec], ambient_dim: usize) -> Result<Vec<BitVec>> {
    if ambient_dim == 0 || ambient_dim > 64 {
        return Err(Error::InvalidWidth(ambient_dim));
    }
    for v in basis {
        if v.width() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                got: v.width(),
            });
        }
    }
    let span = Subspace::from_generators(ambient_dim, basis.iter().map(BitVec::bits));
    Ok(span
        .complement()
        .basis()
        .iter()
        .map(|&b| BitVec {
            width: ambient_dim as u8,
            bits: b,
        })
        .collect())
}

/// A linear subspace of GF(2)^width in canonical reduced row-echelon form.
///
/// Basis vectors are sorted by decreasing pivot, the pivot being the highest
/// set bit; no other basis vector has that bit set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    width: u8,
    basis: Vec<u64>,
}

impl Subspace {
    pub fn zero(width: usize) -> Self {
        assert!(width <= 64);
        Subspace {
            width: width as u8,
            basis: Vec::new(),
        }
    }

    pub fn full(width: usize) -> Self {
        Self::from_generators(width, (0..width).map(|i| 1u64 << i))
    }

    pub fn from_generators<I: IntoIterator<Item = u64>>(width: usize, gens: I) -> Self {
        let mut s = Self::zero(width);
        for g in gens {
            s.insert(g);
        }
        s
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn pivots(&self) -> impl Iterator<Item = u32> + '_ {
        self.basis.iter().map(|b| 63 - b.leading_zeros())
    }

    /// Bitmask of the pivot positions.
    pub fn pivot_mask(&self) -> u64 {
        self.pivots().fold(0, |acc, p| acc | (1 << p))
    }

    /// The least element of the coset `v + self`.
    #[inline]
    pub fn reduce(&self, mut v: u64) -> u64 {
        for &b in &self.basis {
            let p = 63 - b.leading_zeros();
            if (v >> p) & 1 == 1 {
                v ^= b;
            }
        }
        v
    }

    #[inline]
    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    /// Adds `v` to the span; returns `false` when it was already contained.
    pub fn insert(&mut self, v: u64) -> bool {
        debug_assert!(v & !width_mask(self.width()) == 0);
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let p = 63 - r.leading_zeros();
        for b in self.basis.iter_mut() {
            if (*b >> p) & 1 == 1 {
                *b ^= r;
            }
        }
        let pos = self
            .basis
            .partition_point(|&b| b.leading_zeros() < r.leading_zeros());
        self.basis.insert(pos, r);
        true
    }

    /// `self + span(v)` as a new subspace.
    pub fn with(&self, v: u64) -> Self {
        let mut s = self.clone();
        s.insert(v);
        s
    }

    /// Coordinates of `v` with respect to the basis (bit `i` for basis vector
    /// `i`), or `None` when `v` is outside the subspace.
    pub fn coordinates(&self, v: u64) -> Option<u64> {
        let mut c = 0;
        let mut r = v;
        for (i, &b) in self.basis.iter().enumerate() {
            let p = 63 - b.leading_zeros();
            if (r >> p) & 1 == 1 {
                r ^= b;
                c |= 1 << i;
            }
        }
        (r == 0).then_some(c)
    }

    /// Inverse of [`Subspace::coordinates`].
    #[inline]
    pub fn combine(&self, coords: u64) -> u64 {
        let mut v = 0;
        let mut c = coords;
        while c != 0 {
            let i = c.trailing_zeros() as usize;
            v ^= self.basis[i];
            c &= c - 1;
        }
        v
    }

    /// All `2^dim` elements, in Gray-code order starting at zero.
    pub fn elements(&self) -> Elements<'_> {
        Elements {
            basis: &self.basis,
            index: 0,
            current: 0,
        }
    }

    /// Orthogonal complement under the coordinate-wise dot product.
    pub fn complement(&self) -> Subspace {
        let pivots = self.pivot_mask();
        let mut out = Subspace::zero(self.width());
        for j in 0..self.width() {
            if (pivots >> j) & 1 == 1 {
                continue;
            }
            let mut x = 1u64 << j;
            for &b in &self.basis {
                if (b >> j) & 1 == 1 {
                    x |= 1 << (63 - b.leading_zeros());
                }
            }
            out.insert(x);
        }
        out
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|&b| other.contains(b))
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        // (A ∩ B)^⊥ = A^⊥ + B^⊥
        let mut s = self.complement();
        for &b in other.complement().basis() {
            s.insert(b);
        }
        s.complement()
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("width", &self.width)
            .field(
                "basis",
                &self
                    .basis
                    .iter()
                    .map(|b| format!("{b:#x}"))
                    .collect::<Vec<_>>(),
            )
            .finish()
    }
}

pub struct Elements<'a> {
    basis: &'a [u64],
    index: u64,
    current: u64,
}

impl Iterator for Elements<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let d = self.basis.len();
        if d < 64 && self.index >> d != 0 {
            return None;
        }
        let out = self.current;
        self.index += 1;
        if self.index >> d == 0 {
            let flip = self.index.trailing_zeros() as usize;
            self.current ^= self.basis[flip];
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (1usize << self.basis.len()) - self.index as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Elements<'_> {}
