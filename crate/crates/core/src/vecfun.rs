//! Vectorial functions, their component spaces and the invariants used to
//! tell quadratic APN functions apart.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::f2core::{self, Subspace};
use crate::quadspace::{self, num_monomials, QuadForm, TruthTable, MAX_VARS};

/// Largest input dimension accepted for explicit value tables.
pub const MAX_INPUT_BITS: usize = 24;
/// Largest output dimension.
pub const MAX_OUTPUT_BITS: usize = 32;

/// An (n,m)-function given by its value table; `values[x]` is `F(x)` with
/// coordinate `i` of both input and output at bit `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VectorialFunction {
    n: usize,
    m: usize,
    values: Vec<u64>,
}

impl VectorialFunction {
    pub fn new(n: usize, m: usize, values: Vec<u64>) -> Result<Self> {
        if n > MAX_INPUT_BITS {
            return Err(Error::TooManyVariables(n));
        }
        if m == 0 || m > MAX_OUTPUT_BITS {
            return Err(Error::InvalidWidth(m));
        }
        if values.len() != 1 << n {
            return Err(Error::TableLength {
                n,
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v >> m != 0) {
            return Err(Error::ValueOutOfRange { index, value, m });
        }
        Ok(VectorialFunction { n, m, values })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        if n > MAX_INPUT_BITS {
            return Err(Error::TooManyVariables(n));
        }
        Self::new(n, m, (0..1u64 << n).map(f).collect())
    }

    /// The homogeneous quadratic function whose coordinate `i` is `forms[i]`.
    pub fn from_forms(n: usize, forms: &[QuadForm]) -> Result<Self> {
        if let Some(q) = forms.iter().find(|q| q.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: q.n(),
            });
        }
        Self::from_fn(n, forms.len(), |x| {
            forms
                .iter()
                .enumerate()
                .fold(0, |acc, (i, q)| acc | (u64::from(q.eval(x)) << i))
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.values[x as usize]
    }

    /// Coordinate function `x -> F(x)_i`.
    pub fn coordinate(&self, i: usize) -> TruthTable {
        self.component(1 << i)
    }

    /// Component function `x -> b . F(x)`.
    pub fn component(&self, b: u64) -> TruthTable {
        TruthTable::new(
            self.n,
            self.values.iter().map(|&v| f2core::dot(v, b)).collect(),
        )
        .expect("table length is 2^n")
    }

    /// Maximum algebraic degree of the coordinates; `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        (0..self.m)
            .filter_map(|i| self.coordinate(i).degree())
            .max()
    }

    pub fn is_quadratic(&self) -> bool {
        self.degree().unwrap_or(0) <= 2
    }

    /// Homogeneous quadratic part of each coordinate.
    pub fn quadratic_parts(&self) -> Result<Vec<QuadForm>> {
        if self.n > MAX_VARS {
            return Err(Error::TooManyVariables(self.n));
        }
        (0..self.m)
            .map(|i| QuadForm::from_truth_table(&self.coordinate(i)))
            .collect()
    }

    /// `F(x) + F(x+a) + F(0) + F(a)` for every `x`.
    pub fn second_derivative(&self, a: u64, x: u64) -> u64 {
        self.eval(x) ^ self.eval(x ^ a) ^ self.values[0] ^ self.eval(a)
    }
}

impl fmt::Debug for VectorialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "VectorialFunction(n={}, m={}, {:?})",
            self.n, self.m, self.values
        )
    }
}

/// A linear subspace of the quadratic forms in `n` variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadSpace {
    n: u8,
    space: Subspace,
}

impl QuadSpace {
    pub fn zero(n: usize) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::TooManyVariables(n));
        }
        Ok(QuadSpace {
            n: n as u8,
            space: Subspace::zero(num_monomials(n)),
        })
    }

    pub fn new(n: usize, forms: &[QuadForm]) -> Result<Self> {
        let mut s = Self::zero(n)?;
        for q in forms {
            if q.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: q.n(),
                });
            }
            s.space.insert(q.coeffs());
        }
        Ok(s)
    }

    /// Wraps a subspace of `GF(2)^{C(n,2)}` given in monomial coordinates.
    pub fn from_subspace(n: usize, space: Subspace) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::TooManyVariables(n));
        }
        if space.width() != num_monomials(n) {
            return Err(Error::DimensionMismatch {
                expected: num_monomials(n),
                got: space.width(),
            });
        }
        Ok(QuadSpace { n: n as u8, space })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn subspace(&self) -> &Subspace {
        &self.space
    }

    pub fn basis(&self) -> Vec<QuadForm> {
        self.space
            .basis()
            .iter()
            .map(|&c| QuadForm::new_unchecked(self.n(), c))
            .collect()
    }

    pub fn contains(&self, q: &QuadForm) -> bool {
        q.n() == self.n() && self.space.contains(q.coeffs())
    }

    pub fn elements(&self) -> impl Iterator<Item = QuadForm> + '_ {
        let n = self.n();
        self.space
            .elements()
            .map(move |c| QuadForm::new_unchecked(n, c))
    }

    /// The element with the given basis coordinates.
    pub fn element(&self, coords: u64) -> QuadForm {
        QuadForm::new_unchecked(self.n(), self.space.combine(coords))
    }

    /// `self + span(q)`.
    pub fn with(&self, q: &QuadForm) -> QuadSpace {
        QuadSpace {
            n: self.n,
            space: self.space.with(q.coeffs()),
        }
    }

    /// Orthogonal complement inside the space of all quadratic forms, for the
    /// dot product of coefficient vectors.
    pub fn orthogonal_complement(&self) -> QuadSpace {
        QuadSpace {
            n: self.n,
            space: self.space.complement(),
        }
    }

    pub fn is_subspace_of(&self, other: &QuadSpace) -> bool {
        self.n == other.n && self.space.is_subspace_of(&other.space)
    }

    /// A homogeneous quadratic (n, dim)-function with this component space.
    pub fn to_function(&self) -> Result<VectorialFunction> {
        VectorialFunction::from_forms(self.n(), &self.basis())
    }

    /// Rank of `x -> (B_q(a, x))_q` over the basis forms, i.e. of the linear
    /// part of the derivative in direction `a`.
    #[inline]
    pub fn derivative_rank(&self, a: u64) -> usize {
        let mut rows = [0u64; 64];
        let basis = self.space.basis();
        for (r, &c) in rows.iter_mut().zip(basis) {
            *r = QuadForm::new_unchecked(self.n(), c).polar_vec(a);
        }
        // rank of the dim x n matrix equals rank of its transpose; either is fine
        f2core::rank_in_place(&mut rows[..basis.len()])
    }

    /// Differential uniformity shared by every quadratic function whose
    /// component space is `self`: `2^{n - min_a rank D_a}`.
    pub fn differential_uniformity(&self) -> u64 {
        let n = self.n();
        let min_rank = (1..1u64 << n)
            .map(|a| self.derivative_rank(a))
            .min()
            .unwrap_or(0);
        1 << (n - min_rank)
    }

    pub fn to_hex_lines(&self) -> Vec<String> {
        self.space
            .basis()
            .iter()
            .map(|c| format!("{c:x}"))
            .collect()
    }
}

impl fmt::Debug for QuadSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadSpace(n={}, [", self.n)?;
        for (i, q) in self.basis().iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{q:?}")?;
        }
        write!(f, "])")
    }
}

/// Span of the quadratic parts of the components of a quadratic `F`.
pub fn comp_space(f: &VectorialFunction) -> Result<QuadSpace> {
    if let Some(d) = f.degree() {
        if d > 2 {
            return Err(Error::NotQuadratic(d));
        }
    }
    QuadSpace::new(f.n(), &f.quadratic_parts()?)
}

/// Maximum number of solutions of `F(x+a) + F(x) = b` over `a != 0`.
pub fn differential_uniformity(f: &VectorialFunction) -> u64 {
    let size = 1u64 << f.n();
    let mut buf = Vec::with_capacity(size as usize);
    let mut best = 0;
    for a in 1..size {
        buf.clear();
        buf.extend((0..size).map(|x| f.eval(x) ^ f.eval(x ^ a)));
        buf.sort_unstable();
        let mut run = 1;
        for w in buf.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                best = best.max(run);
                run = 1;
            }
        }
        best = best.max(run);
    }
    if size == 1 {
        // no nonzero direction
        return 0;
    }
    best
}

/// APN test through the fourth moments of the components.
pub fn is_apn_alpha(f: &VectorialFunction) -> Result<bool> {
    if f.n() != f.m() {
        return Err(Error::NotSquare { n: f.n(), m: f.m() });
    }
    let n = f.n();
    let target = (1u128 << (n + 1)) - 2;
    let quadratic = n <= MAX_VARS && f.is_quadratic();
    let sum: Ratio<u128> = if quadratic {
        let parts = f.quadratic_parts()?;
        let mut total = 0u128;
        for b in 1..1u64 << n {
            let mut c = 0;
            for (i, q) in parts.iter().enumerate() {
                if (b >> i) & 1 == 1 {
                    c ^= q.coeffs();
                }
            }
            total += u128::from(QuadForm::new_unchecked(n, c).alpha());
        }
        Ratio::from_integer(total)
    } else {
        (1..1u64 << n)
            .map(|b| quadspace::alpha(&f.component(b)))
            .fold(Ratio::from_integer(0), |acc, a| acc + a)
    };
    Ok(sum == Ratio::from_integer(target))
}

/// APN test for a quadratic (n,n)-function from its component space: the
/// orthogonal complement must avoid the rank-2 forms.
pub fn is_apn_flat(s: &QuadSpace) -> Result<bool> {
    let n = s.n();
    if s.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.dim(),
        });
    }
    if n < 2 {
        return Ok(true);
    }
    let w = s.orthogonal_complement();
    let q2 = rank2_forms(n);
    if w.dim() < 63 && (1usize << w.dim()) <= q2.len() {
        Ok(w.elements().skip(1).all(|q| q.rank() != 2))
    } else {
        // same test, enumerating Q2 and probing membership in the complement
        Ok(!q2.iter().any(|q| w.contains(q)))
    }
}

/// The quadratic form of the product `l1(x) l2(x)` of two linear forms.
fn product_form(n: usize, l1: u64, l2: u64) -> QuadForm {
    let mut c = 0;
    for j in 1..n {
        for i in 0..j {
            let bit = ((l1 >> i) & (l2 >> j) ^ (l1 >> j) & (l2 >> i)) & 1;
            c |= bit << quadspace::monomial_index(i, j);
        }
    }
    QuadForm::new_unchecked(n, c)
}

/// All rank-2 quadratic forms in `n` variables, sorted by coefficient mask.
pub fn rank2_forms(n: usize) -> &'static [QuadForm] {
    static CACHE: [OnceLock<Vec<QuadForm>>; MAX_VARS + 1] =
        [const { OnceLock::new() }; MAX_VARS + 1];
    assert!(n <= MAX_VARS, "rank2_forms: n = {n} > {MAX_VARS}");
    CACHE[n].get_or_init(|| {
        let mut set = HashSet::new();
        for l1 in 1..1u64 << n {
            for l2 in l1 + 1..1u64 << n {
                set.insert(product_form(n, l1, l2));
            }
        }
        let mut out: Vec<QuadForm> = set.into_iter().filter(|q| !q.is_zero()).collect();
        out.sort_unstable();
        out
    })
}

/// `(2^n - 1)(2^{n-1} - 1) / 3`.
pub fn rank2_count(n: usize) -> u64 {
    if n < 2 {
        return 0;
    }
    ((1u64 << n) - 1) * ((1u64 << (n - 1)) - 1) / 3
}

/// Bent count and fourth-moment sum of a space of forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BSPair {
    pub b: u64,
    pub k: u64,
}

impl BSPair {
    pub const ZERO: BSPair = BSPair { b: 0, k: 0 };

    pub fn new(b: u64, k: u64) -> Self {
        BSPair { b, k }
    }
}

impl std::ops::Add for BSPair {
    type Output = BSPair;

    fn add(self, rhs: BSPair) -> BSPair {
        BSPair {
            b: self.b + rhs.b,
            k: self.k + rhs.k,
        }
    }
}

impl fmt::Display for BSPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.b, self.k)
    }
}

fn require_even(n: usize) -> Result<()> {
    if n % 2 == 1 {
        Err(Error::OddDimension(n))
    } else {
        Ok(())
    }
}

#[inline]
fn form_pair(q: QuadForm) -> BSPair {
    let r = q.rank();
    BSPair {
        b: u64::from(r == q.n()),
        k: 1 << (q.n() - r),
    }
}

pub fn bs_pair(v: &QuadSpace) -> Result<BSPair> {
    require_even(v.n())?;
    Ok(v.elements()
        .skip(1)
        .map(form_pair)
        .fold(BSPair::ZERO, |acc, p| acc + p))
}

/// The lexicographically greatest sequence of [`BSPair`]s over flags.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile {
    pub entries: Vec<BSPair>,
}

impl Profile {
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Self {
        Profile {
            entries: pairs.iter().map(|&(b, k)| BSPair { b, k }).collect(),
        }
    }

    pub fn starts_with(&self, prefix: &[BSPair]) -> bool {
        self.entries.starts_with(prefix)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Per-element rank data of a space, indexed by basis coordinates.
struct ElementTable {
    pairs: Vec<BSPair>,
}

impl ElementTable {
    fn new(v: &QuadSpace) -> Result<Self> {
        if v.dim() > MAX_INPUT_BITS {
            return Err(Error::Invalid(format!(
                "space of dimension {} too large to tabulate",
                v.dim()
            )));
        }
        let pairs = (0..1u64 << v.dim())
            .map(|c| {
                if c == 0 {
                    BSPair::ZERO
                } else {
                    form_pair(v.element(c))
                }
            })
            .collect();
        Ok(ElementTable { pairs })
    }

    #[inline]
    fn coset(&self, g: u64, u: &Subspace) -> BSPair {
        u.elements()
            .map(|e| self.pairs[(g ^ e) as usize])
            .fold(BSPair::ZERO, |acc, p| acc + p)
    }
}

/// Profile `P_k` of a space of forms.
///
/// Works level by level on the set of subspaces attaining the best prefix
/// so far; since the pair of a subspace does not depend on the flag below
/// it, keeping all tied subspaces of each dimension is exact.
pub fn profile(v: &QuadSpace, k: usize) -> Result<Profile> {
    require_even(v.n())?;
    if k > v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: k,
        });
    }
    let d = v.dim();
    let table = ElementTable::new(v)?;
    let mut entries = vec![BSPair::ZERO];
    let mut current = BSPair::ZERO;
    let mut tied: Vec<Subspace> = vec![Subspace::zero(d)];
    for _ in 0..k {
        let scored: Vec<(BSPair, Subspace)> = tied
            .par_iter()
            .flat_map_iter(|u| {
                (1..1u64 << d)
                    .filter(|&g| u.reduce(g) == g)
                    .map(|g| (table.coset(g, u), u.with(g)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let best = scored.iter().map(|(p, _)| *p).max().expect("k <= dim");
        let mut next: Vec<Subspace> = scored
            .into_iter()
            .filter(|(p, _)| *p == best)
            .map(|(_, s)| s)
            .collect();
        next.sort_unstable();
        next.dedup();
        current = current + best;
        entries.push(current);
        tied = next;
    }
    Ok(Profile { entries })
}

/// Multiset of ranks of `f + s` over `f` of rank 2 and `s` in a space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct J2Signature {
    pub counts: BTreeMap<usize, u64>,
}

impl J2Signature {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `rank:count` pairs in increasing rank order, comma separated.
    pub fn canonical_string(&self) -> String {
        self.counts
            .iter()
            .map(|(r, c)| format!("{r}:{c}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// SHA-256 of [`J2Signature::canonical_string`], hex encoded.
    pub fn label(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_string().as_bytes()))
    }
}

pub fn j2_signature(s: &QuadSpace) -> J2Signature {
    // For an alternating M of rank r and a rank-2 form with image U,
    // rank(M + U) is r + 2 when U meets Im M trivially, r when they meet in
    // a line, and r or r - 2 when U lies in Im M, by whether the form
    // induced on Im M vanishes on U. Counting the subspaces U of each kind
    // gives the histogram from the ranks of S alone.
    let n = s.n() as u32;
    let total = rank2_count(s.n());
    let mut ranks = [0u64; MAX_VARS + 1];
    for q in s.elements() {
        ranks[q.rank()] += 1;
    }
    let mut counts = BTreeMap::new();
    let mut add = |r: usize, c: u64| {
        if c > 0 {
            *counts.entry(r).or_insert(0) += c;
        }
    };
    for (r, &mult) in ranks.iter().enumerate().filter(|(_, &m)| m > 0) {
        let p = |k: u32| 1u64 << k;
        let ru = r as u32;
        let inside = if r >= 2 {
            (p(ru) - 1) * (p(ru - 1) - 1) / 3
        } else {
            0
        };
        let isotropic = if r >= 2 {
            (p(ru) - 1) * (p(ru - 1) - 2) / 6
        } else {
            0
        };
        let line = (p(ru) - 1) * (p(n) - p(ru)) / 2;
        let outside = total - inside - line;
        if r >= 2 {
            add(r - 2, mult * (inside - isotropic));
        }
        add(r, mult * (isotropic + line));
        add(r + 2, mult * outside);
    }
    J2Signature { counts }
}

/// A `d`-dimensional subspace of `s` whose nonzero elements are all bent.
pub fn find_bent_subspace(s: &QuadSpace, d: usize) -> Result<Option<QuadSpace>> {
    let n = s.n();
    require_even(n)?;
    if d > n / 2 {
        return Err(Error::NybergBound {
            requested: d,
            bound: n / 2,
        });
    }
    if d > s.dim() {
        return Ok(None);
    }
    let table = ElementTable::new(s)?;
    let bent: Vec<u64> = (1..1u64 << s.dim())
        .filter(|&c| table.pairs[c as usize].b == 1)
        .collect();
    if bent.len() < (1 << d) - 1 {
        return Ok(None);
    }
    let is_bent = |c: u64| c != 0 && table.pairs[c as usize].b == 1;

    fn dfs(
        bent: &[u64],
        start: usize,
        span: &Subspace,
        chosen: &mut Vec<u64>,
        d: usize,
        is_bent: &dyn Fn(u64) -> bool,
    ) -> bool {
        if chosen.len() == d {
            return true;
        }
        for (idx, &g) in bent.iter().enumerate().skip(start) {
            if span.contains(g) || !span.elements().all(|u| is_bent(g ^ u)) {
                continue;
            }
            chosen.push(g);
            if dfs(bent, idx + 1, &span.with(g), chosen, d, is_bent) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::with_capacity(d);
    if dfs(&bent, 0, &Subspace::zero(s.dim()), &mut chosen, d, &is_bent) {
        let forms: Vec<QuadForm> = chosen.iter().map(|&c| s.element(c)).collect();
        Ok(Some(QuadSpace::new(n, &forms)?))
    } else {
        Ok(None)
    }
}

/// An affine map `x -> M x + c` from GF(2)^in_dim to GF(2)^out_dim, stored
/// by the images of the unit vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    in_dim: usize,
    out_dim: usize,
    columns: Vec<u64>,
    constant: u64,
}

impl AffineMap {
    pub fn new(in_dim: usize, out_dim: usize, columns: Vec<u64>, constant: u64) -> Result<Self> {
        if columns.len() != in_dim {
            return Err(Error::DimensionMismatch {
                expected: in_dim,
                got: columns.len(),
            });
        }
        if out_dim > 64
            || columns
                .iter()
                .chain([&constant])
                .any(|&c| out_dim < 64 && c >> out_dim != 0)
        {
            return Err(Error::InvalidWidth(out_dim));
        }
        Ok(AffineMap {
            in_dim,
            out_dim,
            columns,
            constant,
        })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            in_dim: n,
            out_dim: n,
            columns: (0..n).map(|i| 1 << i).collect(),
            constant: 0,
        }
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        AffineMap {
            in_dim,
            out_dim,
            columns: vec![0; in_dim],
            constant: 0,
        }
    }

    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let mask = if out_dim >= 64 {
            u64::MAX
        } else {
            (1 << out_dim) - 1
        };
        AffineMap {
            in_dim,
            out_dim,
            columns: (0..in_dim).map(|_| rng.gen::<u64>() & mask).collect(),
            constant: rng.gen::<u64>() & mask,
        }
    }

    /// Uniform affine permutation of GF(2)^n, by rejection sampling.
    pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(n, n, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn columns(&self) -> &[u64] {
        &self.columns
    }

    pub fn constant(&self) -> u64 {
        self.constant
    }

    pub fn is_invertible(&self) -> bool {
        self.in_dim == self.out_dim && f2core::rank_of(&self.columns) == self.in_dim
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        let mut y = self.constant;
        let mut bits = x;
        while bits != 0 {
            y ^= self.columns[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        y
    }
}

/// `x -> A(F(B(x))) + C(x)`.
pub fn apply_ea(
    f: &VectorialFunction,
    a: &AffineMap,
    b: &AffineMap,
    c: &AffineMap,
) -> Result<VectorialFunction> {
    if a.in_dim != f.m() || b.in_dim != f.n() || c.in_dim != f.n() || c.out_dim != f.m() {
        return Err(Error::Invalid(format!(
            "EA maps do not fit an ({}, {})-function",
            f.n(),
            f.m()
        )));
    }
    if !a.is_invertible() || !b.is_invertible() {
        return Err(Error::NotInvertible);
    }
    VectorialFunction::from_fn(f.n(), f.m(), |x| a.apply(f.eval(b.apply(x))) ^ c.apply(x))
}

/// A random EA-transform of `f`, for invariance checks.
pub fn random_ea<R: Rng + ?Sized>(f: &VectorialFunction, rng: &mut R) -> VectorialFunction {
    let a = AffineMap::random_invertible(f.m(), rng);
    let b = AffineMap::random_invertible(f.n(), rng);
    let c = AffineMap::random(f.n(), f.m(), rng);
    apply_ea(f, &a, &b, &c).expect("maps are valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::power_function;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_quadratic(rng: &mut ChaCha8Rng, n: usize, m: usize) -> VectorialFunction {
        let w = num_monomials(n);
        let forms: Vec<QuadForm> = (0..m)
            .map(|_| QuadForm::new(n, rng.gen::<u64>() & ((1u64 << w) - 1)).unwrap())
            .collect();
        let lin = AffineMap::random(n, m, rng);
        let base = VectorialFunction::from_forms(n, &forms).unwrap();
        VectorialFunction::from_fn(n, m, |x| base.eval(x) ^ lin.apply(x)).unwrap()
    }

    #[test]
    fn comp_space_examples() {
        let lin = VectorialFunction::from_fn(4, 4, |x| x ^ (x >> 1)).unwrap();
        assert_eq!(comp_space(&lin).unwrap().dim(), 0);
        let cube = power_function(4, 3).unwrap();
        let s = comp_space(&cube).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.elements().filter(|q| q.rank() == 4).count(), 10);
        let q = QuadForm::monomial(4, 0, 1).unwrap();
        let dup = VectorialFunction::from_forms(4, &[q, q, q]).unwrap();
        assert_eq!(comp_space(&dup).unwrap().dim(), 1);
        let inv = power_function(4, 14).unwrap();
        assert!(matches!(comp_space(&inv), Err(Error::NotQuadratic(3))));
    }

    #[test]
    fn differential_uniformity_examples() {
        assert_eq!(differential_uniformity(&power_function(4, 3).unwrap()), 2);
        let affine = VectorialFunction::from_fn(5, 3, |x| (x ^ 5) & 7).unwrap();
        assert_eq!(differential_uniformity(&affine), 32);
        // (4,2)-bent: x0x1 + x2x3, x0x2 + x1x3 + x2x3
        let bent = VectorialFunction::from_forms(
            4,
            &[
                QuadForm::from_pairs(4, &[(0, 1), (2, 3)]).unwrap(),
                QuadForm::from_pairs(4, &[(0, 2), (1, 3), (2, 3)]).unwrap(),
            ],
        )
        .unwrap();
        assert!(comp_space(&bent)
            .unwrap()
            .elements()
            .skip(1)
            .all(|q| q.rank() == 4));
        assert_eq!(differential_uniformity(&bent), 4);
    }

    #[test]
    fn quadratic_uniformity_shortcut() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(1..=6);
            let f = random_quadratic(&mut rng, n, m);
            assert_eq!(
                comp_space(&f).unwrap().differential_uniformity(),
                differential_uniformity(&f)
            );
        }
    }

    #[test]
    fn apn_alpha_examples() {
        assert!(is_apn_alpha(&power_function(4, 3).unwrap()).unwrap());
        let lin = VectorialFunction::from_fn(4, 4, |x| x).unwrap();
        assert!(!is_apn_alpha(&lin).unwrap());
        assert!(is_apn_alpha(&power_function(5, 5).unwrap()).unwrap());
        // inverse in dim 5 is APN and not quadratic: exercises the spectral path
        assert!(is_apn_alpha(&power_function(5, 30).unwrap()).unwrap());
        assert!(!is_apn_alpha(&power_function(4, 14).unwrap()).unwrap());
        let rect = VectorialFunction::from_fn(4, 3, |x| x & 7).unwrap();
        assert_eq!(is_apn_alpha(&rect), Err(Error::NotSquare { n: 4, m: 3 }));
    }

    #[test]
    fn flat_test_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 3..=7 {
            for _ in 0..40 {
                let f = random_quadratic(&mut rng, n, n);
                let s = comp_space(&f).unwrap();
                if s.dim() != n {
                    continue;
                }
                let w = s.orthogonal_complement();
                let by_enum = w.elements().skip(1).all(|q| q.rank() != 2);
                let by_probe = !rank2_forms(n).iter().any(|q| w.contains(q));
                assert_eq!(by_enum, by_probe);
                assert_eq!(is_apn_flat(&s).unwrap(), by_enum);
            }
        }
        assert!(is_apn_flat(&comp_space(&power_function(4, 3).unwrap()).unwrap()).unwrap());
        assert!(is_apn_flat(&QuadSpace::zero(4).unwrap()).is_err());
    }

    #[test]
    fn rank2_counts() {
        assert_eq!(rank2_forms(3).len(), 7);
        assert_eq!(rank2_forms(4).len(), 35);
        for n in 2..=5 {
            let all: Vec<QuadForm> = (0..1u64 << num_monomials(n))
                .map(|c| QuadForm::new(n, c).unwrap())
                .filter(|q| q.rank() == 2)
                .collect();
            assert_eq!(rank2_forms(n), all.as_slice());
        }
        for n in 2..=8 {
            assert_eq!(rank2_forms(n).len() as u64, rank2_count(n));
            assert!(rank2_forms(n).iter().all(|q| q.rank() == 2));
        }
        assert_eq!(rank2_forms(8).len(), 10_795);
    }

    #[test]
    fn bs_pair_examples() {
        assert_eq!(bs_pair(&QuadSpace::zero(4).unwrap()).unwrap(), BSPair::ZERO);
        let bent = QuadSpace::new(
            4,
            &[
                QuadForm::from_pairs(4, &[(0, 1), (2, 3)]).unwrap(),
                QuadForm::from_pairs(4, &[(0, 2), (1, 3), (2, 3)]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(bs_pair(&bent).unwrap(), BSPair::new(3, 3));
        assert!(bs_pair(&QuadSpace::zero(5).unwrap()).is_err());
    }

    #[test]
    fn cube_profile_dim4() {
        let s = comp_space(&power_function(4, 3).unwrap()).unwrap();
        let p = profile(&s, 2).unwrap();
        assert_eq!(p, Profile::from_pairs(&[(0, 0), (1, 1), (3, 3)]));
        let full = profile(&s, 4).unwrap();
        assert_eq!(full.entries[4], bs_pair(&s).unwrap());
        assert_eq!(full.entries[4], BSPair::new(10, 30));
        assert!(profile(&s, 5).is_err());
    }

    #[test]
    fn profile_matches_exhaustive_flags() {
        // brute force over all flags of small spaces
        fn all_flags(d: usize, k: usize) -> Vec<Vec<Subspace>> {
            let mut out = vec![vec![Subspace::zero(d)]];
            for _ in 0..k {
                let mut next = Vec::new();
                for flag in &out {
                    let last = flag.last().unwrap();
                    let mut seen = HashSet::new();
                    for g in 1..1u64 << d {
                        let s = last.with(g);
                        if s.dim() == last.dim() + 1 && seen.insert(s.clone()) {
                            let mut f = flag.clone();
                            f.push(s);
                            next.push(f);
                        }
                    }
                }
                out = next;
            }
            out
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let f = random_quadratic(&mut rng, 4, 4);
            let s = comp_space(&f).unwrap();
            let k = s.dim().min(3);
            let best = all_flags(s.dim(), k)
                .into_iter()
                .map(|flag| {
                    flag.iter()
                        .map(|u| {
                            let forms: Vec<QuadForm> =
                                u.basis().iter().map(|&c| s.element(c)).collect();
                            bs_pair(&QuadSpace::new(4, &forms).unwrap()).unwrap()
                        })
                        .collect::<Vec<_>>()
                })
                .max()
                .unwrap();
            assert_eq!(profile(&s, k).unwrap().entries, best);
        }
    }

    #[test]
    fn j2_examples() {
        let sig = j2_signature(&QuadSpace::zero(4).unwrap());
        assert_eq!(sig.counts, BTreeMap::from([(2, 35)]));
        let s = comp_space(&power_function(4, 3).unwrap()).unwrap();
        let sig = j2_signature(&s);
        assert_eq!(sig.total(), 35 * 16);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let g = random_ea(&power_function(4, 3).unwrap(), &mut rng);
            assert_eq!(j2_signature(&comp_space(&g).unwrap()), sig);
        }
    }

    #[test]
    fn j2_matches_direct_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..60 {
            let n = rng.gen_range(2..=7);
            let d = rng.gen_range(0..=4);
            let w = num_monomials(n);
            let forms: Vec<QuadForm> = (0..d)
                .map(|_| QuadForm::new(n, rng.gen::<u64>() & ((1u64 << w) - 1)).unwrap())
                .collect();
            let s = QuadSpace::new(n, &forms).unwrap();
            let mut direct = BTreeMap::new();
            for f in rank2_forms(n) {
                for e in s.elements() {
                    *direct.entry((*f + e).rank()).or_insert(0u64) += 1;
                }
            }
            assert_eq!(j2_signature(&s).counts, direct, "n = {n}");
        }
    }

    #[test]
    fn bent_subspace_search() {
        let s = comp_space(&power_function(4, 3).unwrap()).unwrap();
        let b = find_bent_subspace(&s, 2).unwrap().unwrap();
        assert_eq!(b.dim(), 2);
        assert!(b.is_subspace_of(&s));
        assert!(b.elements().skip(1).all(|q| q.rank() == 4));
        assert!(matches!(
            find_bent_subspace(&s, 3),
            Err(Error::NybergBound {
                requested: 3,
                bound: 2
            })
        ));
        // one bent element and one rank-2 element: no bent plane
        let sparse = QuadSpace::new(
            4,
            &[
                QuadForm::from_pairs(4, &[(0, 1), (2, 3)]).unwrap(),
                QuadForm::monomial(4, 0, 1).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(find_bent_subspace(&sparse, 2).unwrap(), None);
    }

    #[test]
    fn ea_identity_and_rejection() {
        let f = power_function(4, 3).unwrap();
        let id = AffineMap::identity(4);
        let z = AffineMap::zero(4, 4);
        assert_eq!(apply_ea(&f, &id, &id, &z).unwrap(), f);
        let singular = AffineMap::new(4, 4, vec![1, 2, 4, 4], 0).unwrap();
        assert_eq!(apply_ea(&f, &singular, &id, &z), Err(Error::NotInvertible));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            assert_eq!(differential_uniformity(&random_ea(&f, &mut rng)), 2);
        }
    }
}
