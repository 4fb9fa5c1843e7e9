//! Query access to functions F₂ⁿ → ℂ, derived functions, the Walsh–Hadamard
//! transform and the sampling estimators built on them.
//!
//! Every evaluation of a derived function bottoms out in evaluations of the
//! base function, and only those are counted. A derivative or projection
//! layer doubles the number of base evaluations per call.

mod goldreich_levin;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::f2core::{check_dim, parity32, BitVec};
use crate::stabilizer::Quadratic;

pub use goldreich_levin::{gl_samples_per_bucket, goldreich_levin, goldreich_levin_with};

pub type C64 = Complex64;

const PHASES: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

/// i^k for any integer exponent.
#[inline]
pub fn i_pow(k: i64) -> C64 {
    PHASES[k.rem_euclid(4) as usize]
}

#[inline]
pub(crate) fn sign(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

/// Dense table of 2ⁿ values indexed by Σ xᵢ·2^{i-1}.
#[derive(Clone, PartialEq, Debug)]
pub struct TableFn {
    n: usize,
    values: Vec<C64>,
}

impl TableFn {
    pub fn new(n: usize, values: Vec<C64>) -> Result<Self> {
        check_dim(n)?;
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: 1 << n,
            });
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> C64) -> Self {
        check_dim(n).expect("dimension");
        Self {
            n,
            values: (0..1u32 << n).map(&mut f).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_fn(n, |_| C64::new(0.0, 0.0))
    }

    /// (−1)^{q(x)}.
    pub fn from_quadratic(q: &Quadratic) -> Self {
        Self::from_fn(q.dim(), |x| C64::new(sign(q.eval_word(x)), 0.0))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: u32) -> C64 {
        self.values[x as usize]
    }

    /// E_x |f(x)|².
    pub fn norm2sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ⟨f, g⟩ = E_x f(x)·conj(g(x)).
    pub fn inner(&self, other: &TableFn) -> C64 {
        assert_eq!(self.n, other.n);
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        s / self.values.len() as f64
    }

    pub fn map(&self, mut f: impl FnMut(u32, C64) -> C64) -> TableFn {
        TableFn {
            n: self.n,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(x, &v)| f(x as u32, v))
                .collect(),
        }
    }

    pub fn derivative(&self, a: u32) -> TableFn {
        self.map(|x, v| self.get(x ^ a) * v.conj())
    }

    pub fn project(&self, a: u32, b: u32, sigma: Sigma) -> TableFn {
        let ph = i_pow((a & b).count_ones() as i64) * sigma.value();
        self.map(|x, v| (v + ph * sign(parity32(b & x)) * self.get(x ^ a)) * 0.5)
    }

    /// W_{a,b} f(x) = i^{|a∘b|}(−1)^{b·x} f(x+a).
    pub fn weyl(&self, a: u32, b: u32) -> TableFn {
        let ph = i_pow((a & b).count_ones() as i64);
        self.map(|x, _| ph * sign(parity32(b & x)) * self.get(x ^ a))
    }

    pub fn max_abs_diff(&self, other: &TableFn) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Sub for &TableFn {
    type Output = TableFn;

    fn sub(self, rhs: &TableFn) -> TableFn {
        self.map(|x, v| v - rhs.get(x))
    }
}

/// Unnormalized butterfly: out(b) = Σ_x v(x)(−1)^{b·x}. Self-inverse up to 2ⁿ.
pub fn wht_unnormalized(values: &mut [C64]) {
    let len = values.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in values.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*u + *v, *u - *v);
                *u = s;
                *v = d;
            }
        }
        h <<= 1;
    }
}

/// Real-valued variant of [`wht_unnormalized`].
pub fn wht_unnormalized_real(values: &mut [f64]) {
    let len = values.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in values.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*u + *v, *u - *v);
                *u = s;
                *v = d;
            }
        }
        h <<= 1;
    }
}

/// f̂(b) = E_x f(x)(−1)^{b·x}.
pub fn wht(t: &TableFn) -> TableFn {
    let mut out = t.clone();
    wht_unnormalized(&mut out.values);
    let scale = 1.0 / out.values.len() as f64;
    for v in out.values.iter_mut() {
        *v *= scale;
    }
    out
}

/// Projection sign σ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.gen::<bool>() {
            Sigma::Plus
        } else {
            Sigma::Minus
        }
    }
}

type Evaluator = Arc<dyn Fn(u32) -> C64 + Send + Sync>;

/// Oracle access to a function F₂ⁿ → ℂ with sup-norm bound `bound`.
///
/// Clones share the base query counter. `cost_factor` is the number of base
/// evaluations one call makes.
#[derive(Clone)]
pub struct QueryFn {
    n: usize,
    bound: f64,
    cost_factor: u64,
    memo: bool,
    counter: Arc<AtomicU64>,
    eval: Evaluator,
}

impl fmt::Debug for QueryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QueryFn")
            .field("n", &self.n)
            .field("bound", &self.bound)
            .field("cost_factor", &self.cost_factor)
            .field("memo", &self.memo)
            .field("queries", &self.queries())
            .finish()
    }
}

impl QueryFn {
    pub fn new<F>(n: usize, bound: f64, f: F) -> Result<Self>
    where
        F: Fn(u32) -> C64 + Send + Sync + 'static,
    {
        check_dim(n)?;
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(invalid(format!("bound {bound}")));
        }
        let counter = Arc::new(AtomicU64::new(0));
        let c = Arc::clone(&counter);
        let eval: Evaluator = Arc::new(move |x| {
            c.fetch_add(1, Ordering::Relaxed);
            f(x)
        });
        Ok(Self {
            n,
            bound,
            cost_factor: 1,
            memo: false,
            counter,
            eval,
        })
    }

    /// Base function backed by a table, with bound max(1, sup|t|).
    pub fn from_table(t: TableFn) -> Self {
        let bound = t.sup_norm().max(1.0);
        Self::from_table_with_bound(t, bound)
    }

    pub fn from_table_with_bound(t: TableFn, bound: f64) -> Self {
        let n = t.dim();
        let values = t.into_values();
        Self::new(n, bound, move |x| values[x as usize]).expect("valid table")
    }

    /// Same function with answers remembered: each distinct point is counted
    /// once. Only valid on a base function.
    pub fn memoized(self) -> Result<Self> {
        if self.cost_factor != 1 || self.memo {
            return Err(invalid("memoization applies to an unmemoized base function"));
        }
        let inner = Arc::clone(&self.eval);
        let counter = Arc::new(AtomicU64::new(0));
        let c = Arc::clone(&counter);
        let cache: Arc<Vec<OnceLock<C64>>> =
            Arc::new((0..1usize << self.n).map(|_| OnceLock::new()).collect());
        let eval: Evaluator = Arc::new(move |x| {
            *cache[x as usize].get_or_init(|| {
                c.fetch_add(1, Ordering::Relaxed);
                inner(x)
            })
        });
        Ok(Self {
            memo: true,
            counter,
            eval,
            ..self
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bound(&self) -> f64 {
        self.bound
    }

    #[inline]
    pub fn cost_factor(&self) -> u64 {
        self.cost_factor
    }

    #[inline]
    pub fn is_memoized(&self) -> bool {
        self.memo
    }

    /// Base evaluations so far, shared by every function derived from the base.
    pub fn queries(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    #[inline]
    pub fn eval(&self, x: u32) -> C64 {
        (self.eval)(x)
    }

    pub fn eval_vec(&self, x: BitVec) -> Result<C64> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: self.n,
            });
        }
        Ok(self.eval(x.bits()))
    }

    /// Evaluates every point (2ⁿ calls).
    pub fn table(&self) -> TableFn {
        TableFn::from_fn(self.n, |x| self.eval(x))
    }

    /// A table-backed copy whose calls make no further base queries.
    ///
    /// Only available under memoization, where every base point is already
    /// paid for once the table has been read.
    pub fn materialize(&self) -> Result<Self> {
        if !self.memo {
            return Err(invalid("materialize requires a memoized base"));
        }
        let values = self.table().into_values();
        Ok(Self {
            eval: Arc::new(move |x| values[x as usize]),
            ..self.clone()
        })
    }

    fn derived<F>(&self, bound: f64, cost_mult: u64, f: F) -> Self
    where
        F: Fn(u32) -> C64 + Send + Sync + 'static,
    {
        Self {
            n: self.n,
            bound,
            cost_factor: self.cost_factor * cost_mult,
            memo: self.memo,
            counter: Arc::clone(&self.counter),
            eval: Arc::new(f),
        }
    }

    /// x ↦ g(x, f(x)) with one call to f per evaluation.
    pub fn map<F>(&self, bound: f64, g: F) -> Self
    where
        F: Fn(u32, C64) -> C64 + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.eval);
        self.derived(bound, 1, move |x| g(x, inner(x)))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(self.bound * c.abs(), move |_, v| v * c)
    }

    /// x ↦ 1_{S}(x)·f(x)·phase(x), calling f only on S.
    pub fn restrict<S, P>(&self, inside: S, phase: P) -> Self
    where
        S: Fn(u32) -> bool + Send + Sync + 'static,
        P: Fn(u32) -> C64 + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.eval);
        self.derived(self.bound, 1, move |x| {
            if inside(x) {
                inner(x) * phase(x)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Δ_a f(x) = f(x + a)·conj(f(x)).
pub fn derivative(f: &QueryFn, a: BitVec) -> QueryFn {
    assert_eq!(a.dim(), f.dim());
    let inner = Arc::clone(&f.eval);
    let a = a.bits();
    f.derived(f.bound * f.bound, 2, move |x| inner(x ^ a) * inner(x).conj())
}

/// Π^σ_{a,b} f(x) = (f(x) + σ·i^{|a∘b|}(−1)^{b·x} f(x + a)) / 2.
pub fn project(f: &QueryFn, a: BitVec, b: BitVec, sigma: Sigma) -> QueryFn {
    assert_eq!(a.dim(), f.dim());
    assert_eq!(b.dim(), f.dim());
    let inner = Arc::clone(&f.eval);
    let (a, b) = (a.bits(), b.bits());
    let ph = i_pow((a & b).count_ones() as i64) * sigma.value();
    f.derived(f.bound, 2, move |x| {
        (inner(x) + ph * sign(parity32(b & x)) * inner(x ^ a)) * 0.5
    })
}

/// Sample-size constants of the estimators, plus the switch that lets an
/// estimator read the whole table instead when that needs fewer queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// m = ⌈c·B²·ln(8/δ)/ε²⌉ for a Fourier coefficient.
    pub fourier_const: f64,
    /// m = ⌈c·B⁴·ln(4/δ)/ε²⌉ for E|f|².
    pub norm_const: f64,
    /// Per-bucket samples ⌈c·ln(16·n·⌈4/τ²⌉/δ)/τ⁴⌉ in Goldreich–Levin.
    pub gl_const: f64,
    /// Reading all 2ⁿ points is allowed when it costs no more queries.
    pub dense_fallback: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            fourier_const: 8.0,
            norm_const: 0.5,
            gl_const: 128.0,
            dense_fallback: true,
        }
    }
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0 || eps == 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("need eps in (0,1], delta in (0,1); got {eps}, {delta}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn uniform_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> u32 {
    rng.gen::<u32>() & ((1u32 << n) - 1)
}

impl EstimatorConfig {
    pub fn fourier_samples(&self, bound: f64, eps: f64, delta: f64) -> u64 {
        (self.fourier_const * bound * bound * (8.0 / delta).ln() / (eps * eps)).ceil() as u64
    }

    pub fn norm_samples(&self, bound: f64, eps: f64, delta: f64) -> u64 {
        (self.norm_const * bound.powi(4) * (4.0 / delta).ln() / (eps * eps)).ceil() as u64
    }

    #[inline]
    fn use_dense(&self, n: usize, m: u64) -> bool {
        self.dense_fallback && m >= 1u64 << n
    }

    /// Estimate of f̂(b) to accuracy ε (for B = 1) with probability 1 − δ.
    pub fn fourier_estimate<R: Rng + ?Sized>(
        &self,
        f: &QueryFn,
        b: BitVec,
        eps: f64,
        delta: f64,
        rng: &mut R,
    ) -> Result<C64> {
        check_eps_delta(eps, delta)?;
        if b.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                left: b.dim(),
                right: f.dim(),
            });
        }
        let n = f.dim();
        let b = b.bits();
        let m = self.fourier_samples(f.bound(), eps, delta);
        if self.use_dense(n, m) {
            let s: C64 = (0..1u32 << n)
                .map(|x| f.eval(x) * sign(parity32(b & x)))
                .sum();
            return Ok(s / (1u64 << n) as f64);
        }
        let mut s = C64::new(0.0, 0.0);
        for _ in 0..m {
            let x = uniform_point(rng, n);
            s += f.eval(x) * sign(parity32(b & x));
        }
        Ok(s / m as f64)
    }

    /// Estimate of E|f|² to accuracy ε with probability 1 − δ.
    pub fn norm2sq_estimate<R: Rng + ?Sized>(
        &self,
        f: &QueryFn,
        eps: f64,
        delta: f64,
        rng: &mut R,
    ) -> Result<f64> {
        check_eps_delta(eps, delta)?;
        let n = f.dim();
        let m = self.norm_samples(f.bound(), eps, delta);
        if self.use_dense(n, m) {
            let s: f64 = (0..1u32 << n).map(|x| f.eval(x).norm_sqr()).sum();
            return Ok(s / (1u64 << n) as f64);
        }
        let s: f64 = (0..m)
            .map(|_| f.eval(uniform_point(rng, n)).norm_sqr())
            .sum();
        Ok(s / m as f64)
    }

    /// Estimate of ‖f‖_{U³}⁸ to accuracy ε with probability 1 − δ.
    ///
    /// Sampling uses 8 base calls per sample. With the dense fallback and
    /// few enough points, the value is computed exactly as
    /// E_a Σ_b |Δ_a f̂(b)|⁴ from one read of the table.
    pub fn u3norm8_estimate<R: Rng + ?Sized>(
        &self,
        f: &QueryFn,
        eps: f64,
        delta: f64,
        rng: &mut R,
    ) -> Result<f64> {
        check_eps_delta(eps, delta)?;
        let n = f.dim();
        let b8 = f.bound().powi(8);
        let m = (2.0 * b8 * b8 * (2.0 / delta).ln() / (eps * eps)).ceil() as u64;
        if self.dense_fallback && n <= 16 && m.saturating_mul(8) >= 1u64 << n {
            return Ok(u3norm8_of_table(&f.table()));
        }
        let mask = (1u32 << n) - 1;
        let mut s = 0.0;
        for _ in 0..m {
            let r: [u32; 4] = rng.gen();
            let (x, a, b, c) = (r[0] & mask, r[1] & mask, r[2] & mask, r[3] & mask);
            let v = f.eval(x ^ a ^ b ^ c)
                * f.eval(x ^ a ^ b).conj()
                * f.eval(x ^ a ^ c).conj()
                * f.eval(x ^ a)
                * f.eval(x ^ b ^ c).conj()
                * f.eval(x ^ b)
                * f.eval(x ^ c)
                * f.eval(x).conj();
            s += v.re;
        }
        Ok(s / m as f64)
    }
}

/// E_a Σ_b |Δ_a f̂(b)|⁴ = ‖f‖_{U³}⁸.
pub fn u3norm8_of_table(t: &TableFn) -> f64 {
    let n = t.dim();
    let size = 1usize << n;
    let mut acc = 0.0;
    let mut buf = vec![C64::new(0.0, 0.0); size];
    for a in 0..size as u32 {
        for (x, slot) in buf.iter_mut().enumerate() {
            *slot = t.get(x as u32 ^ a) * t.get(x as u32).conj();
        }
        wht_unnormalized(&mut buf);
        let norm = (size as f64).powi(4);
        acc += buf.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() / norm;
    }
    acc / size as f64
}

pub fn fourier_estimate<R: Rng + ?Sized>(
    f: &QueryFn,
    b: BitVec,
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<C64> {
    EstimatorConfig::default().fourier_estimate(f, b, eps, delta, rng)
}

pub fn norm2sq_estimate<R: Rng + ?Sized>(
    f: &QueryFn,
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<f64> {
    EstimatorConfig::default().norm2sq_estimate(f, eps, delta, rng)
}

pub fn u3norm8_estimate<R: Rng + ?Sized>(
    f: &QueryFn,
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<f64> {
    EstimatorConfig::default().u3norm8_estimate(f, eps, delta, rng)
}

/// (1/m)·Σ f(x_j)(−1)^{q(x_j)} over m uniform points.
pub fn correlation_estimate<R: Rng + ?Sized>(
    f: &QueryFn,
    q: &Quadratic,
    m: u64,
    rng: &mut R,
) -> Result<C64> {
    Ok(correlation_estimates(f, std::slice::from_ref(q), m, rng)?[0])
}

/// Correlation estimates for several quadratics from one shared point set.
pub fn correlation_estimates<R: Rng + ?Sized>(
    f: &QueryFn,
    qs: &[Quadratic],
    m: u64,
    rng: &mut R,
) -> Result<Vec<C64>> {
    correlation_estimates_par(f, qs, m, 1, rng)
}

/// As [`correlation_estimates`], with the per-quadratic sums split over up to
/// `threads` threads. The result does not depend on `threads`.
pub fn correlation_estimates_par<R: Rng + ?Sized>(
    f: &QueryFn,
    qs: &[Quadratic],
    m: u64,
    threads: usize,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let n = f.dim();
    if let Some(q) = qs.iter().find(|q| q.dim() != n) {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: n,
        });
    }
    let points: Vec<(u32, C64)> = (0..m)
        .map(|_| {
            let x = uniform_point(rng, n);
            (x, f.eval(x))
        })
        .collect();
    let estimate = |q: &Quadratic| {
        points
            .iter()
            .map(|&(x, v)| v * sign(q.eval_word(x)))
            .sum::<C64>()
            / m as f64
    };
    let workers = threads.clamp(1, qs.len().max(1));
    if workers == 1 {
        return Ok(qs.iter().map(estimate).collect());
    }
    let chunk = qs.len().div_ceil(workers);
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = qs
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(estimate).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("correlation worker panicked"))
            .collect()
    }))
}
