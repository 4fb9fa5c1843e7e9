//! Classical quadratics over F₂ and stabilizer states.

use std::fmt;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::f2core::{check_dim, lagrangian_from, mask, parity32, Basis, BitVec, SymMatrix};
use crate::funcspace::{i_pow, TableFn, C64};

/// q(x) = Σ_{i<j} Q_ij x_i x_j + lin·x + constant.
///
/// `upper[i]` holds row i of the strictly upper-triangular Q.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Quadratic {
    n: usize,
    upper: Vec<u32>,
    lin: u32,
    constant: bool,
}

impl Quadratic {
    pub fn new(n: usize, upper: Vec<u32>, lin: u32, constant: bool) -> Result<Self> {
        check_dim(n)?;
        if upper.len() != n {
            return Err(Error::DimensionMismatch {
                left: upper.len(),
                right: n,
            });
        }
        for (i, &r) in upper.iter().enumerate() {
            if r & !(mask(n) & !mask(i + 1)) != 0 {
                return Err(invalid(format!("row {i} of Q is not strictly upper")));
            }
        }
        if lin & !mask(n) != 0 {
            return Err(Error::StrayBits {
                bits: lin as u64,
                n,
            });
        }
        Ok(Self {
            n,
            upper,
            lin,
            constant,
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, vec![0; n], 0, false).expect("dimension")
    }

    /// The linear function x ↦ y·x.
    pub fn linear(y: BitVec) -> Self {
        Self::new(y.dim(), vec![0; y.dim()], y.bits(), false).expect("dimension")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn upper(&self) -> &[u32] {
        &self.upper
    }

    #[inline]
    pub fn lin(&self) -> u32 {
        self.lin
    }

    #[inline]
    pub fn constant(&self) -> bool {
        self.constant
    }

    #[inline]
    pub fn eval_word(&self, x: u32) -> bool {
        let mut acc = parity32(self.lin & x) ^ self.constant;
        let mut rest = x;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            acc ^= parity32(self.upper[i] & x);
        }
        acc
    }

    pub fn eval(&self, x: BitVec) -> Result<bool> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: self.n,
            });
        }
        Ok(self.eval_word(x.bits()))
    }

    pub fn negated(&self) -> Self {
        Self {
            constant: !self.constant,
            ..self.clone()
        }
    }

    pub fn with_constant(&self, constant: bool) -> Self {
        Self {
            constant,
            ..self.clone()
        }
    }

    pub fn plus_linear(&self, y: u32) -> Self {
        Self {
            lin: self.lin ^ (y & mask(self.n)),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Quadratic) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                left: other.n,
                right: self.n,
            });
        }
        Ok(Self {
            n: self.n,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a ^ b).collect(),
            lin: self.lin ^ other.lin,
            constant: self.constant ^ other.constant,
        })
    }

    /// Rows of Q as hex words, row i first.
    pub fn qmat_hex_rows(&self) -> Vec<String> {
        self.upper.iter().map(|r| format!("{r:x}")).collect()
    }

    pub fn from_hex_rows(n: usize, rows: &[String], lin: &str, constant: bool) -> Result<Self> {
        let parse = |s: &str| {
            u32::from_str_radix(s, 16).map_err(|e| invalid(format!("bad hex {s:?}: {e}")))
        };
        let upper = rows.iter().map(|r| parse(r)).collect::<Result<Vec<_>>>()?;
        Self::new(n, upper, parse(lin)?, constant)
    }
}

/// Sorted monomials, 1-based: `x1x2 + x3 + 1`; the zero polynomial is `0`.
impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if (self.upper[i] >> j) & 1 == 1 {
                    terms.push(format!("x{}x{}", i + 1, j + 1));
                }
            }
        }
        for i in 0..self.n {
            if (self.lin >> i) & 1 == 1 {
                terms.push(format!("x{}", i + 1));
            }
        }
        if self.constant {
            terms.push("1".into());
        }
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

/// Phase exponent of i^{|c∘x|}·(−1)^{xᵀQx + lin·x}, modulo 4.
#[inline]
fn phase_exponent(upper: &[u32], lin: u32, diag: u32, x: u32) -> u32 {
    let mut two = parity32(lin & x);
    let mut rest = x;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        two ^= parity32(upper[i] & x);
    }
    ((diag & x).count_ones() + 2 * two as u32) & 3
}

/// φ(x) = 2^{(n−d)/2}·1_{u+V}(x)·(−1)^{q(x)}·i^{|c∘x|}, global phase 1.
///
/// Canonical form: V is in reduced echelon form, u is reduced modulo V, and
/// Q, lin and the diagonal c are supported on the pivot coordinates of V with
/// φ(u) > 0. Two states are equal as values iff they agree up to a global phase.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct StabilizerState {
    n: usize,
    v: Basis,
    u: u32,
    upper: Vec<u32>,
    lin: u32,
    diag: u32,
}

impl StabilizerState {
    pub fn new(n: usize, v: Basis, u: BitVec, upper: Vec<u32>, lin: BitVec, diag: BitVec) -> Result<Self> {
        check_dim(n)?;
        for d in [v.width(), u.dim(), upper.len(), lin.dim(), diag.dim()] {
            if d != n {
                return Err(Error::DimensionMismatch { left: d, right: n });
            }
        }
        let q = Quadratic::new(n, upper, lin.bits(), false)?;
        Ok(Self::canonical(n, v, u.bits(), &q.upper, q.lin, diag.bits()))
    }

    /// (−1)^{q(x)} on all of F₂ⁿ.
    pub fn from_quadratic(q: &Quadratic) -> Self {
        Self::canonical(q.n, Basis::full(q.n), 0, &q.upper, q.lin, 0)
    }

    /// 2^{(n−d)/2}·1_{u+V}.
    pub fn indicator(n: usize, v: Basis, u: u32) -> Self {
        Self::canonical(n, v, u, &vec![0; n], 0, 0)
    }

    /// A random state: V spanned by up to n + 1 uniform vectors, every other
    /// field uniform. Not the uniform distribution over stabilizer states.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let m = mask(n);
        let k = rng.gen_range(0..=n + 1);
        let v = Basis::from_words(n, (0..k).map(|_| (rng.gen::<u32>() & m) as u64));
        let upper: Vec<u32> = (0..n).map(|i| rng.gen::<u32>() & m & !mask(i + 1)).collect();
        let q = Quadratic::new(n, upper, rng.gen::<u32>() & m, false).expect("strict upper rows");
        Self::canonical(n, v, rng.gen::<u32>() & m, &q.upper, q.lin, rng.gen::<u32>() & m)
    }

    fn canonical(n: usize, v: Basis, u: u32, upper: &[u32], lin: u32, diag: u32) -> Self {
        let u = v.reduce(u as u64) as u32;
        let rows: Vec<u32> = v.rows().iter().map(|&r| r as u32).collect();
        let pivots: Vec<usize> = v.pivots().collect();
        let e = |x: u32| phase_exponent(upper, lin, diag, x) as i64;
        // The phase restricted to u + span(rows) as a function of t ∈ F₂^d is
        // E0 + Σ D_k t_k + 2 Σ_{k<j} Q_kj t_k t_j (mod 4), and t_k = x_{p_k}.
        let e0 = e(u);
        let single: Vec<i64> = rows.iter().map(|&r| (e(u ^ r) - e0).rem_euclid(4)).collect();
        let mut new_upper = vec![0u32; n];
        let (mut new_lin, mut new_diag) = (0u32, 0u32);
        for k in 0..rows.len() {
            let dk = single[k];
            if dk & 1 == 1 {
                new_diag |= 1 << pivots[k];
            }
            if (dk >> 1) & 1 == 1 {
                new_lin |= 1 << pivots[k];
            }
            for j in k + 1..rows.len() {
                let both = (e(u ^ rows[k] ^ rows[j]) - e0 - dk - single[j]).rem_euclid(4);
                debug_assert!(both % 2 == 0);
                if both == 2 {
                    let (a, b) = (pivots[k].min(pivots[j]), pivots[k].max(pivots[j]));
                    new_upper[a] |= 1 << b;
                }
            }
        }
        Self {
            n,
            v,
            u,
            upper: new_upper,
            lin: new_lin,
            diag: new_diag,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn subspace(&self) -> &Basis {
        &self.v
    }

    pub fn support_dim(&self) -> usize {
        self.v.dim()
    }

    pub fn coset_rep(&self) -> BitVec {
        BitVec::truncated(self.u, self.n)
    }

    pub fn upper(&self) -> &[u32] {
        &self.upper
    }

    pub fn lin(&self) -> BitVec {
        BitVec::truncated(self.lin, self.n)
    }

    pub fn diag(&self) -> BitVec {
        BitVec::truncated(self.diag, self.n)
    }

    /// The classical part q(x) = xᵀQx + lin·x.
    pub fn classical_part(&self) -> Quadratic {
        Quadratic {
            n: self.n,
            upper: self.upper.clone(),
            lin: self.lin,
            constant: false,
        }
    }

    #[inline]
    pub fn in_support(&self, x: u32) -> bool {
        self.v.reduce(x as u64) as u32 == self.u
    }

    #[inline]
    pub fn eval_word(&self, x: u32) -> C64 {
        if !self.in_support(x) {
            return C64::new(0.0, 0.0);
        }
        let amp = 2f64.powf((self.n - self.v.dim()) as f64 / 2.0);
        i_pow(phase_exponent(&self.upper, self.lin, self.diag, x) as i64) * amp
    }

    pub fn eval(&self, x: BitVec) -> Result<C64> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: self.n,
            });
        }
        Ok(self.eval_word(x.bits()))
    }

    pub fn table(&self) -> TableFn {
        TableFn::from_fn(self.n, |x| self.eval_word(x))
    }

    /// {(a, (Qᵀ + Q + Diag(c))a + w) : a ∈ V, w ∈ V^⊥}.
    pub fn lagrangian(&self) -> Basis {
        let m = SymMatrix::from_upper_and_diag(&self.upper, self.diag);
        lagrangian_from(&self.v, &m)
    }
}

pub fn eval_stab(phi: &StabilizerState, x: BitVec) -> Result<C64> {
    phi.eval(x)
}

pub fn lagrangian_of(phi: &StabilizerState) -> Basis {
    phi.lagrangian()
}

pub fn eval_quadratic(q: &Quadratic, x: BitVec) -> Result<bool> {
    q.eval(x)
}

/// The degree-2 polynomial r with (−1)^{r(y + bv)} = i^{|c∘y| − 2|b·c∘y∘v|},
/// where b = c·x and y = x + b·v.
pub fn interpolate_r(c: BitVec, v: BitVec) -> Result<Quadratic> {
    if c.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: c.dim(),
            right: v.dim(),
        });
    }
    if !parity32(c.bits() & v.bits()) {
        return Err(invalid("need c·v = 1"));
    }
    let n = c.dim();
    let (c, v) = (c.bits(), v.bits());
    let target = |x: u32| -> bool {
        let b = parity32(c & x);
        let y = if b { x ^ v } else { x };
        let mut e = (c & y).count_ones() as i64;
        if b {
            e -= 2 * (c & y & v).count_ones() as i64;
        }
        match e.rem_euclid(4) {
            0 => false,
            2 => true,
            _ => unreachable!("odd exponent on c^⊥"),
        }
    };
    let constant = target(0);
    let mut lin = 0u32;
    for i in 0..n {
        if target(1 << i) ^ constant {
            lin |= 1 << i;
        }
    }
    let mut upper = vec![0u32; n];
    for i in 0..n {
        for j in i + 1..n {
            let val = target(1 << i | 1 << j) ^ constant ^ ((lin >> i) & 1 == 1) ^ ((lin >> j) & 1 == 1);
            if val {
                upper[i] |= 1 << j;
            }
        }
    }
    let r = Quadratic::new(n, upper, lin, constant)?;
    for x in 0..1u32 << n {
        if r.eval_word(x) != target(x) {
            return Err(Error::Internal(format!("interpolation mismatch at {x:#x}")));
        }
    }
    Ok(r)
}

/// Classical quadratics whose correlations with f control |⟨f, φ⟩|.
///
/// With c = 0 this is {q + y·x : y ∈ V^⊥}. Otherwise, with v the lowest
/// coordinate vector having c·v = 1 and r = interpolate_r(c, v), it is
/// {r + q + y·x, r + q + (y + c)·x : y ∈ V^⊥}.
pub fn expand_to_quadratics(phi: &StabilizerState) -> Result<Vec<Quadratic>> {
    let n = phi.n;
    let q = phi.classical_part();
    let perp = phi.v.orth_complement();
    let ys = perp.elements();
    let mut out: Vec<Quadratic> = if phi.diag == 0 {
        ys.iter().map(|&y| q.plus_linear(y as u32)).collect()
    } else {
        let v = 1u32 << phi.diag.trailing_zeros();
        let r = interpolate_r(phi.diag(), BitVec::truncated(v, n))?;
        let base = r.add(&q)?;
        ys.iter()
            .flat_map(|&y| [base.plus_linear(y as u32), base.plus_linear(y as u32 ^ phi.diag)])
            .collect()
    };
    out.sort();
    out.dedup();
    Ok(out)
}
