//! Vectors, subspaces and symplectic geometry over F₂.
//!
//! A vector of F₂ⁿ is a packed word with coordinate x₁ in the least
//! significant bit, so the table index of x is Σ xᵢ·2^{i-1}. Pairs
//! (a, b) ∈ F₂ⁿ × F₂ⁿ pack as `a | b << n` when they need to live inside a
//! [`Basis`].

use std::fmt;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 24;

#[inline]
pub(crate) fn parity32(x: u32) -> bool {
    x.count_ones() & 1 == 1
}

#[inline]
pub(crate) fn parity64(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

#[inline]
pub(crate) fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(n))
    }
}

fn same_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// An element of F₂ⁿ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    bits: u32,
    n: u8,
}

impl BitVec {
    pub fn new(bits: u32, n: usize) -> Result<Self> {
        check_dim(n)?;
        if bits & !mask(n) != 0 {
            return Err(Error::StrayBits {
                bits: bits as u64,
                n,
            });
        }
        Ok(Self { bits, n: n as u8 })
    }

    /// Builds a vector from a word, discarding bits at or above `n`.
    ///
    /// # Panics
    /// Panics if `n` is outside `1..=24`.
    pub fn truncated(bits: u32, n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} outside 1..=24");
        Self {
            bits: bits & mask(n),
            n: n as u8,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::truncated(0, n)
    }

    /// The coordinate vector e_{i+1} (zero-based `i`).
    pub fn unit(i: usize, n: usize) -> Self {
        assert!(i < n, "coordinate {i} out of range for n = {n}");
        Self::truncated(1 << i, n)
    }

    /// Parses a string of 0/1 characters, first character is x₁.
    pub fn from_str01(s: &str) -> Result<Self> {
        let n = s.len();
        check_dim(n)?;
        let mut bits = 0u32;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::InvalidParam(format!("not a bit: {ch:?}"))),
            }
        }
        Self::new(bits, n)
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Add for BitVec {
    type Output = BitVec;

    fn add(self, rhs: BitVec) -> BitVec {
        debug_assert_eq!(self.n, rhs.n);
        BitVec {
            bits: self.bits ^ rhs.bits,
            n: self.n,
        }
    }
}

impl AddAssign for BitVec {
    fn add_assign(&mut self, rhs: BitVec) {
        *self = *self + rhs;
    }
}

/// a·b over F₂.
pub fn dot(a: BitVec, b: BitVec) -> Result<bool> {
    same_dim(a.dim(), b.dim())?;
    Ok(parity32(a.bits & b.bits))
}

/// Entry-wise product a∘b.
pub fn circ(a: BitVec, b: BitVec) -> Result<BitVec> {
    same_dim(a.dim(), b.dim())?;
    Ok(BitVec {
        bits: a.bits & b.bits,
        n: a.n,
    })
}

/// A point (a, b) of F₂ⁿ × F₂ⁿ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SympVec {
    pub a: BitVec,
    pub b: BitVec,
}

impl SympVec {
    pub fn new(a: BitVec, b: BitVec) -> Result<Self> {
        same_dim(a.dim(), b.dim())?;
        Ok(Self { a, b })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            a: BitVec::zero(n),
            b: BitVec::zero(n),
        }
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.a.dim()
    }

    #[inline]
    pub fn pack(self) -> u64 {
        self.a.bits as u64 | (self.b.bits as u64) << self.a.n
    }

    #[inline]
    pub fn unpack(word: u64, n: usize) -> Self {
        Self {
            a: BitVec::truncated(word as u32, n),
            b: BitVec::truncated((word >> n) as u32, n),
        }
    }
}

impl Add for SympVec {
    type Output = SympVec;

    fn add(self, rhs: SympVec) -> SympVec {
        SympVec {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
        }
    }
}

impl fmt::Display for SympVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// [(x,y),(x',y')] = x·y' + x'·y.
pub fn symplectic(u: SympVec, v: SympVec) -> Result<bool> {
    same_dim(u.dim(), v.dim())?;
    Ok(parity32((u.a.bits & v.b.bits) ^ (v.a.bits & u.b.bits)))
}

#[inline]
pub(crate) fn symplectic_packed(u: u64, v: u64, n: usize) -> bool {
    let lo = (1u64 << n) - 1;
    parity64((u & lo) & (v >> n) ^ (v & lo) & (u >> n))
}

/// Subspace of F₂^width held as a reduced row-echelon basis.
///
/// The pivot of a row is its lowest set bit. Rows are sorted by strictly
/// increasing pivot and every pivot column is zero in all other rows, so two
/// bases are equal iff they span the same subspace.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Basis {
    rows: Vec<u64>,
    width: usize,
}

impl Basis {
    pub fn empty(width: usize) -> Self {
        assert!(width <= 64);
        Self {
            rows: Vec::new(),
            width,
        }
    }

    pub fn from_words<I: IntoIterator<Item = u64>>(width: usize, words: I) -> Self {
        let mut b = Self::empty(width);
        for w in words {
            b.insert(w);
        }
        b
    }

    /// The full space F₂^width.
    pub fn full(width: usize) -> Self {
        Self {
            rows: (0..width).map(|i| 1u64 << i).collect(),
            width,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.trailing_zeros() as usize)
    }

    /// Reduces `w` modulo the span; the result is zero at every pivot.
    #[inline]
    pub fn reduce(&self, mut w: u64) -> u64 {
        for &r in &self.rows {
            if (w >> r.trailing_zeros()) & 1 == 1 {
                w ^= r;
            }
        }
        w
    }

    #[inline]
    pub fn contains_word(&self, w: u64) -> bool {
        self.reduce(w) == 0
    }

    /// Adds `w` to the span. Returns false if it was already there.
    pub fn insert(&mut self, w: u64) -> bool {
        debug_assert!(self.width == 64 || w >> self.width == 0);
        let v = self.reduce(w);
        if v == 0 {
            return false;
        }
        let p = v.trailing_zeros();
        for r in self.rows.iter_mut() {
            if (*r >> p) & 1 == 1 {
                *r ^= v;
            }
        }
        let at = self.rows.partition_point(|r| r.trailing_zeros() < p);
        self.rows.insert(at, v);
        true
    }

    /// Basis of {w : w·v = 0 for all v in the span}.
    pub fn orth_complement(&self) -> Basis {
        let pivmask: u64 = self.rows.iter().fold(0, |m, r| m | r & r.wrapping_neg());
        let mut out = Basis::empty(self.width);
        for f in 0..self.width {
            if (pivmask >> f) & 1 == 1 {
                continue;
            }
            let mut w = 1u64 << f;
            for &r in &self.rows {
                if (r >> f) & 1 == 1 {
                    w |= 1u64 << r.trailing_zeros();
                }
            }
            out.insert(w);
        }
        out
    }

    /// Every element of the span, in Gray-code order starting at 0.
    pub fn elements(&self) -> Vec<u64> {
        let d = self.dim();
        assert!(d <= 26, "span of dimension {d} too large to list");
        let mut out = Vec::with_capacity(1 << d);
        let mut cur = 0u64;
        out.push(cur);
        for k in 1u64..(1 << d) {
            cur ^= self.rows[k.trailing_zeros() as usize];
            out.push(cur);
        }
        out
    }

    /// Union of spans.
    pub fn join(&self, other: &Basis) -> Basis {
        let mut out = self.clone();
        for &r in &other.rows {
            out.insert(r);
        }
        out
    }
}

pub fn span_basis(vs: &[BitVec]) -> Result<Basis> {
    let n = vs.first().map_or(1, |v| v.dim());
    for v in vs {
        same_dim(n, v.dim())?;
    }
    Ok(Basis::from_words(n, vs.iter().map(|v| v.bits() as u64)))
}

pub fn span_symplectic(vs: &[SympVec]) -> Result<Basis> {
    let n = vs.first().map_or(1, |v| v.dim());
    for v in vs {
        same_dim(n, v.dim())?;
    }
    Ok(Basis::from_words(2 * n, vs.iter().map(|v| v.pack())))
}

pub fn in_span(v: BitVec, basis: &Basis) -> Result<bool> {
    same_dim(v.dim(), basis.width())?;
    Ok(basis.contains_word(v.bits() as u64))
}

pub fn in_span_symplectic(v: SympVec, basis: &Basis) -> Result<bool> {
    same_dim(2 * v.dim(), basis.width())?;
    Ok(basis.contains_word(v.pack()))
}

pub fn orth_complement(basis: &Basis) -> Basis {
    basis.orth_complement()
}

pub fn is_isotropic(vs: &[SympVec]) -> bool {
    vs.iter().enumerate().all(|(i, &u)| {
        vs[i + 1..]
            .iter()
            .all(|&v| u.dim() == v.dim() && !symplectic(u, v).unwrap_or(true))
    })
}

/// Isotropy of a basis of packed pairs in F₂ⁿ × F₂ⁿ (width 2n).
pub fn basis_is_isotropic(basis: &Basis) -> bool {
    let n = basis.width() / 2;
    let rows = basis.rows();
    rows.iter()
        .enumerate()
        .all(|(i, &u)| rows[i + 1..].iter().all(|&v| !symplectic_packed(u, v, n)))
}

pub fn is_lagrangian(basis: &Basis) -> bool {
    basis.width() % 2 == 0 && basis.dim() == basis.width() / 2 && basis_is_isotropic(basis)
}

/// Symmetric n×n matrix over F₂; row i is a word whose bit j is M_ij.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SymMatrix {
    rows: Vec<u32>,
}

impl SymMatrix {
    pub fn zero(n: usize) -> Self {
        Self { rows: vec![0; n] }
    }

    pub fn from_rows(rows: Vec<u32>) -> Result<Self> {
        let n = rows.len();
        check_dim(n)?;
        for i in 0..n {
            if rows[i] & !mask(n) != 0 {
                return Err(Error::StrayBits {
                    bits: rows[i] as u64,
                    n,
                });
            }
            for j in 0..n {
                if (rows[i] >> j) & 1 != (rows[j] >> i) & 1 {
                    return Err(Error::InvalidParam("matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { rows })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    /// M·x.
    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        let mut y = 0u32;
        for (i, &r) in self.rows.iter().enumerate() {
            if parity32(r & x) {
                y |= 1 << i;
            }
        }
        y
    }

    /// Strict upper triangle, row-wise.
    pub fn strict_upper(&self) -> Vec<u32> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, &r)| r & !mask(i + 1))
            .collect()
    }

    pub fn diagonal(&self) -> BitVec {
        let d = self
            .rows
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &r)| acc | (r & (1 << i)));
        BitVec::truncated(d, self.dim())
    }

    /// Q + Qᵀ + Diag(d) for strictly upper-triangular Q.
    pub fn from_upper_and_diag(upper: &[u32], diag: u32) -> Self {
        let n = upper.len();
        let mut rows = vec![0u32; n];
        for i in 0..n {
            let r = upper[i] & !mask(i + 1);
            rows[i] |= r;
            for j in 0..n {
                if (r >> j) & 1 == 1 {
                    rows[j] |= 1 << i;
                }
            }
            rows[i] |= diag & (1 << i);
        }
        Self { rows }
    }
}

/// Splits a Lagrangian L into V (projection onto the first halves) and a
/// symmetric M with L = {(h, Mh + w) : h ∈ V, w ∈ V^⊥}.
///
/// M is supported on the pivot coordinates of V's echelon basis and every
/// other entry is 0.
pub fn lagrangian_decompose(lagr: &Basis, n: usize) -> Result<(Basis, SymMatrix)> {
    check_dim(n)?;
    if lagr.width() != 2 * n {
        return Err(Error::DimensionMismatch {
            left: lagr.width(),
            right: 2 * n,
        });
    }
    if lagr.dim() != n {
        return Err(Error::NotLagrangian("dimension differs from n"));
    }
    if !basis_is_isotropic(lagr) {
        return Err(Error::NotLagrangian("not isotropic"));
    }
    let lo = (1u64 << n) - 1;
    // Rows with a pivot in the first half carry a reduced echelon basis of V.
    let horizontal: Vec<(u32, u32)> = lagr
        .rows()
        .iter()
        .filter(|&&r| r & lo != 0)
        .map(|&r| ((r & lo) as u32, (r >> n) as u32))
        .collect();
    let v = Basis::from_words(n, horizontal.iter().map(|&(h, _)| h as u64));
    debug_assert_eq!(v.dim(), horizontal.len());
    let pivots: Vec<usize> = horizontal
        .iter()
        .map(|&(h, _)| h.trailing_zeros() as usize)
        .collect();
    let mut rows = vec![0u32; n];
    for (j, &(_, g)) in horizontal.iter().enumerate() {
        for (k, &(h, _)) in horizontal.iter().enumerate() {
            if parity32(g & h) {
                rows[pivots[j]] |= 1 << pivots[k];
            }
        }
    }
    Ok((v, SymMatrix { rows }))
}

/// {(h, Mh + w) : h ∈ V, w ∈ V^⊥} as a basis of packed pairs.
pub fn lagrangian_from(v: &Basis, m: &SymMatrix) -> Basis {
    let n = m.dim();
    let mut out = Basis::empty(2 * n);
    for &h in v.rows() {
        out.insert(h | (m.apply(h as u32) as u64) << n);
    }
    for &w in v.orth_complement().rows() {
        out.insert(w << n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVec {
        BitVec::from_str01(s).unwrap()
    }

    fn sv(a: &str, b: &str) -> SympVec {
        SympVec::new(bv(a), bv(b)).unwrap()
    }

    #[test]
    fn dot_examples() {
        assert!(!dot(bv("00"), bv("00")).unwrap());
        assert!(!dot(bv("11"), bv("11")).unwrap());
        assert!(dot(bv("10"), bv("11")).unwrap());
        assert_eq!(
            dot(bv("10"), bv("110")),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn circ_examples() {
        assert_eq!(circ(bv("11"), bv("10")).unwrap(), bv("10"));
        assert_eq!(circ(bv("1011"), bv("0000")).unwrap(), bv("0000"));
        assert_eq!(circ(bv("1101"), bv("0111")).unwrap(), bv("0101"));
        assert!(circ(bv("1"), bv("11")).is_err());
    }

    #[test]
    fn bitvec_rejects_stray_bits() {
        assert!(BitVec::new(0b100, 2).is_err());
        assert!(BitVec::new(0, 0).is_err());
        assert!(BitVec::new(0, 25).is_err());
        assert_eq!(BitVec::new(0b11, 2).unwrap().to_string(), "11");
    }

    #[test]
    fn symplectic_examples() {
        assert!(symplectic(sv("1", "0"), sv("0", "1")).unwrap());
        let u = sv("1011", "0110");
        assert!(!symplectic(u, u).unwrap());
        // ((1,0),(0,1)) and ((0,1),(1,0)) both lie in the Lagrangian of (-1)^{x1 x2}
        assert!(!symplectic(sv("10", "01"), sv("01", "10")).unwrap());
        assert!(symplectic(sv("1", "0"), sv("01", "00")).is_err());
    }

    #[test]
    fn span_examples() {
        let b = span_basis(&[bv("110"), bv("011"), bv("101")]).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(in_span(bv("000"), &b).unwrap());
        assert!(in_span(bv("101"), &b).unwrap());
        assert!(!in_span(bv("100"), &b).unwrap());
        let e1 = span_basis(&[bv("10")]).unwrap();
        assert_eq!(orth_complement(&e1), span_basis(&[bv("01")]).unwrap());
        assert!(span_basis(&[bv("10"), bv("1")]).is_err());
    }

    #[test]
    fn isotropy_examples() {
        assert!(is_isotropic(&[sv("10", "00"), sv("01", "00")]));
        assert!(!is_isotropic(&[sv("10", "00"), sv("00", "10")]));
        let l = [sv("00", "00"), sv("10", "01"), sv("01", "10"), sv("11", "11")];
        assert!(is_isotropic(&l));
    }

    #[test]
    fn decompose_examples() {
        let l = span_symplectic(&[sv("10", "01"), sv("01", "10")]).unwrap();
        let (v, m) = lagrangian_decompose(&l, 2).unwrap();
        assert_eq!(v, Basis::full(2));
        assert_eq!(m.rows(), &[0b10, 0b01]);

        let vert = span_symplectic(&[sv("00", "10"), sv("00", "01")]).unwrap();
        let (v, m) = lagrangian_decompose(&vert, 2).unwrap();
        assert_eq!(v.dim(), 0);
        assert_eq!(m, SymMatrix::zero(2));

        let bad = span_symplectic(&[sv("10", "00"), sv("00", "10")]).unwrap();
        assert!(matches!(
            lagrangian_decompose(&bad, 2),
            Err(Error::NotLagrangian(_))
        ));
        let small = span_symplectic(&[sv("10", "00")]).unwrap();
        assert!(lagrangian_decompose(&small, 2).is_err());
    }

    #[test]
    fn sym_matrix_views() {
        let m = SymMatrix::from_rows(vec![0b011, 0b001, 0b100]).unwrap();
        assert_eq!(m.strict_upper(), vec![0b010, 0, 0]);
        assert_eq!(m.diagonal(), bv("101"));
        assert_eq!(SymMatrix::from_upper_and_diag(&m.strict_upper(), 0b101), m);
        assert!(SymMatrix::from_rows(vec![0b10, 0b00]).is_err());
    }

    /// Every Lagrangian of F₂ⁿ × F₂ⁿ for small n, by brute-force subspace search.
    fn all_lagrangians(n: usize) -> Vec<Basis> {
        let total = 1u64 << (2 * n);
        let mut found: Vec<Basis> = Vec::new();
        fn grow(cur: Basis, n: usize, total: u64, found: &mut Vec<Basis>) {
            if cur.dim() == n {
                if !found.contains(&cur) {
                    found.push(cur);
                }
                return;
            }
            let start = cur.rows().iter().copied().max().unwrap_or(0) + 1;
            for w in start..total {
                if cur.contains_word(w) {
                    continue;
                }
                if cur.rows().iter().any(|&r| symplectic_packed(r, w, n)) {
                    continue;
                }
                let mut next = cur.clone();
                next.insert(w);
                grow(next, n, total, found);
            }
        }
        grow(Basis::empty(2 * n), n, total, &mut found);
        found
    }

    #[test]
    fn decompose_round_trip_exhaustive() {
        // Counts of Lagrangians: prod_{i=1..n} (2^i + 1).
        for (n, count) in [(1, 3), (2, 15), (3, 135)] {
            let all = all_lagrangians(n);
            assert_eq!(all.len(), count);
            for l in &all {
                let (v, m) = lagrangian_decompose(l, n).unwrap();
                assert_eq!(&lagrangian_from(&v, &m), l);
                for i in 0..n {
                    for j in 0..n {
                        let on_pivots = v.pivots().any(|p| p == i) && v.pivots().any(|p| p == j);
                        assert!(on_pivots || !m.get(i, j));
                    }
                }
            }
        }
    }

    fn arb_lagrangian(max_n: usize) -> impl Strategy<Value = (usize, Basis)> {
        (1..=max_n).prop_flat_map(|n| {
            let full = (1u32 << n) - 1;
            (
                Just(n),
                proptest::collection::vec(0..=full, n),
                proptest::collection::vec(0..=full, n),
                proptest::collection::vec(0..=full, n),
            )
                .prop_map(|(n, vgen, mrows, upper)| {
                    let v = Basis::from_words(n, vgen.iter().map(|&x| x as u64));
                    let mut u = mrows.clone();
                    for (i, r) in u.iter_mut().enumerate() {
                        *r &= !mask(i + 1);
                    }
                    let diag = upper.iter().fold(0, |a, &x| a ^ x);
                    let m = SymMatrix::from_upper_and_diag(&u, diag & mask(n));
                    (n, lagrangian_from(&v, &m))
                })
        })
    }

    proptest! {
        #[test]
        fn symplectic_bilinear_alternating(n in 1usize..=24, w in proptest::collection::vec(any::<u32>(), 6)) {
            let m = mask(n);
            let p = |i: usize| SympVec::new(BitVec::truncated(w[i] & m, n), BitVec::truncated(w[i + 1] & m, n)).unwrap();
            let (u, v, x) = (p(0), p(2), p(4));
            prop_assert_eq!(
                symplectic(u + v, x).unwrap(),
                symplectic(u, x).unwrap() ^ symplectic(v, x).unwrap()
            );
            prop_assert!(!symplectic(u, u).unwrap());
            prop_assert_eq!(symplectic(u, v).unwrap(), symplectic_packed(u.pack(), v.pack(), n));
        }

        #[test]
        fn orth_complement_involution(n in 1usize..=16, words in proptest::collection::vec(any::<u32>(), 0..8)) {
            let b = Basis::from_words(n, words.iter().map(|&w| (w & mask(n)) as u64));
            let perp = b.orth_complement();
            prop_assert_eq!(b.dim() + perp.dim(), n);
            for &x in b.rows() {
                for &y in perp.rows() {
                    prop_assert!(!parity64(x & y));
                }
            }
            prop_assert_eq!(perp.orth_complement(), b);
        }

        #[test]
        fn decompose_round_trip_random((n, l) in arb_lagrangian(8)) {
            prop_assert!(is_lagrangian(&l));
            let (v, m) = lagrangian_decompose(&l, n).unwrap();
            prop_assert_eq!(lagrangian_from(&v, &m), l);
        }
    }
}
