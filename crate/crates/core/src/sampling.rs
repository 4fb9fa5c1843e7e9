//! Characteristic and convoluted distributions on F₂ⁿ × F₂ⁿ, exactly on
//! tables and approximately through query access.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::f2core::{check_dim, Basis, BitVec, SympVec};
use crate::funcspace::{
    derivative, goldreich_levin_with, uniform_point, wht_unnormalized, wht_unnormalized_real,
    EstimatorConfig, QueryFn, TableFn, C64,
};

/// Largest n for which 4ⁿ-entry tables are built.
pub const DIST_MAX_N: usize = 10;

/// Nonnegative weights on F₂ⁿ × F₂ⁿ, indexed by the packed pair a | b << n.
#[derive(Clone, Debug, PartialEq)]
pub struct DistTable {
    n: usize,
    weights: Vec<f64>,
}

impl DistTable {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if weights.len() != 1 << (2 * n) {
            return Err(Error::DimensionMismatch {
                left: weights.len(),
                right: 1 << (2 * n),
            });
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(invalid("negative or NaN weight"));
        }
        Ok(Self { n, weights })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, p: SympVec) -> f64 {
        self.weights[p.pack() as usize]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Total weight of the points of a subspace of F₂^{2n}.
    pub fn mass_of(&self, subspace: &Basis) -> f64 {
        assert_eq!(subspace.width(), 2 * self.n);
        subspace.elements().iter().map(|&w| self.weights[w as usize]).sum()
    }

    pub fn mass_where(&self, mut pred: impl FnMut(u64) -> bool) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i as u64))
            .map(|(_, w)| w)
            .sum()
    }
}

fn dist_budget(n: usize) -> Result<()> {
    if n > DIST_MAX_N {
        return Err(Error::BudgetExceeded {
            routine: "distribution table",
            max: DIST_MAX_N,
            n,
        });
    }
    Ok(())
}

/// |Δ_a f̂(b)|² for every (a, b), unnormalized.
pub fn derivative_spectrum(t: &TableFn) -> Result<DistTable> {
    let n = t.dim();
    dist_budget(n)?;
    let size = 1usize << n;
    let mut weights = vec![0.0; size * size];
    let mut buf = vec![C64::new(0.0, 0.0); size];
    let scale = 1.0 / (size as f64 * size as f64);
    for a in 0..size {
        for (x, slot) in buf.iter_mut().enumerate() {
            *slot = t.get((x ^ a) as u32) * t.get(x as u32).conj();
        }
        wht_unnormalized(&mut buf);
        for (b, v) in buf.iter().enumerate() {
            weights[a | b << n] = v.norm_sqr() * scale;
        }
    }
    Ok(DistTable { n, weights })
}

/// P_f(a,b) = |Δ_a f̂(b)|² / (2ⁿ‖f‖₂⁴).
pub fn char_dist(t: &TableFn) -> Result<DistTable> {
    let n2 = t.norm2sq();
    if n2 == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let mut d = derivative_spectrum(t)?;
    let z = (1u64 << t.dim()) as f64 * n2 * n2;
    for w in d.weights.iter_mut() {
        *w /= z;
    }
    Ok(d)
}

/// Q = P * P over F₂^{2n}.
pub fn conv_dist(p: &DistTable) -> DistTable {
    let mut h = p.weights.clone();
    wht_unnormalized_real(&mut h);
    for v in h.iter_mut() {
        *v *= *v;
    }
    wht_unnormalized_real(&mut h);
    let scale = 1.0 / h.len() as f64;
    for v in h.iter_mut() {
        *v = (*v * scale).max(0.0);
    }
    DistTable {
        n: p.n,
        weights: h,
    }
}

/// Knobs of the approximate sampler. Defaults follow ξ: Goldreich–Levin at
/// τ = ξ/4, coefficient accuracy ξ⁴/2, failure probability η = ξ/16 per
/// direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuConfig {
    pub xi: f64,
    pub gl_tau: f64,
    pub coeff_acc: f64,
    pub eta: f64,
    /// Rows are built for Δ_af/`energy`: thresholds and accuracies are
    /// multiplied by it and λ divided by its square.
    pub energy: f64,
    pub estimators: EstimatorConfig,
}

impl NuConfig {
    /// ξ is rounded down so that 1/ξ is an integer.
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi <= 0.5) {
            return Err(invalid(format!("xi = {xi} outside (0, 1/2]")));
        }
        let xi = 1.0 / (1.0 / xi - 1e-9).ceil();
        Ok(Self {
            xi,
            gl_tau: xi / 4.0,
            coeff_acc: xi.powi(4) / 2.0,
            eta: xi / 16.0,
            energy: 1.0,
            estimators: EstimatorConfig::default(),
        })
    }

    pub fn padding_len(&self) -> usize {
        (4.0 / self.xi).round() as usize
    }
}

/// ν_a for one direction a: listed heavy b's, then the padding block.
#[derive(Clone, Debug)]
pub struct NuRow {
    heavy: Vec<u32>,
    lambda: Vec<f64>,
    padding: Vec<u32>,
    /// Σλ / (1 + 4ξ²), the mass on `heavy`.
    heavy_mass: f64,
}

impl NuRow {
    pub fn heavy(&self) -> &[u32] {
        &self.heavy
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn padding(&self) -> &[u32] {
        &self.padding
    }

    /// (b, ν_a(b)) for every b in the support B′_a.
    ///
    /// When B_a exhausts F₂ⁿ there is no padding block and the heavy weights
    /// are renormalized (uniform if they are all zero).
    pub fn weights(&self, xi: f64) -> Vec<(u32, f64)> {
        if self.padding.is_empty() {
            let total: f64 = self.lambda.iter().sum();
            let k = self.heavy.len() as f64;
            return self
                .heavy
                .iter()
                .zip(&self.lambda)
                .map(|(&b, &l)| (b, if total > 0.0 { l / total } else { 1.0 / k }))
                .collect();
        }
        let z = 1.0 + 4.0 * xi * xi;
        let pad_each = (1.0 - self.heavy_mass) / self.padding.len() as f64;
        self.heavy
            .iter()
            .zip(&self.lambda)
            .map(|(&b, &l)| (b, l / z))
            .chain(self.padding.iter().map(|&b| (b, pad_each)))
            .collect()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let total: f64 = self.lambda.iter().sum();
        if self.padding.is_empty() && total == 0.0 {
            return self.heavy[rng.gen_range(0..self.heavy.len())];
        }
        let mass = if self.padding.is_empty() { 1.0 } else { self.heavy_mass };
        let u: f64 = rng.gen();
        if u < mass {
            let mut acc = 0.0;
            for (&b, &l) in self.heavy.iter().zip(&self.lambda) {
                acc += l * mass / total;
                if u < acc {
                    return b;
                }
            }
            *self.heavy.last().expect("nonempty when mass > 0")
        } else {
            self.padding[rng.gen_range(0..self.padding.len())]
        }
    }
}

/// Approximate sampler for the convoluted distribution of f.
///
/// Rows ν_a are built on first use and cached for the sampler's lifetime.
pub struct NuSampler<R> {
    f: QueryFn,
    cfg: NuConfig,
    cache: HashMap<u32, NuRow>,
    rng: R,
}

impl<R: Rng> NuSampler<R> {
    pub fn new(f: QueryFn, cfg: NuConfig, rng: R) -> Result<Self> {
        if f.bound() > 1.0 + 1e-9 {
            return Err(invalid("sampler needs a 1-bounded function"));
        }
        if !(cfg.gl_tau > 0.0 && cfg.gl_tau <= 1.0 && cfg.coeff_acc > 0.0 && cfg.eta > 0.0 && cfg.eta < 1.0) {
            return Err(invalid("sampler configuration out of range"));
        }
        Ok(Self {
            f,
            cfg,
            cache: HashMap::new(),
            rng,
        })
    }

    pub fn config(&self) -> &NuConfig {
        &self.cfg
    }

    pub fn function(&self) -> &QueryFn {
        &self.f
    }

    pub fn cached_directions(&self) -> usize {
        self.cache.len()
    }

    /// The row ν_a, built if needed.
    pub fn row(&mut self, a: u32) -> Result<&NuRow> {
        if !self.cache.contains_key(&a) {
            let row = self.build_row(a)?;
            self.cache.insert(a, row);
        }
        Ok(&self.cache[&a])
    }

    fn build_row(&mut self, a: u32) -> Result<NuRow> {
        let n = self.f.dim();
        let cfg = self.cfg;
        let d = derivative(&self.f, BitVec::truncated(a, n));
        let e = cfg.energy;
        let heavy: Vec<u32> = goldreich_levin_with(&cfg.estimators, &d, (cfg.gl_tau * e).min(1.0), cfg.eta, &mut self.rng)?
            .into_iter()
            .map(|b| b.bits())
            .collect();
        let mut lambda = Vec::with_capacity(heavy.len());
        for &b in &heavy {
            let c = cfg.estimators.fourier_estimate(
                &d,
                BitVec::truncated(b, n),
                (cfg.coeff_acc * e).min(1.0),
                cfg.eta,
                &mut self.rng,
            )?;
            lambda.push(c.norm_sqr() / (e * e));
        }
        let z = 1.0 + 4.0 * cfg.xi * cfg.xi;
        let sum: f64 = lambda.iter().sum();
        if sum > z {
            lambda.iter_mut().for_each(|l| *l = 0.0);
        }
        let heavy_mass = lambda.iter().sum::<f64>() / z;
        let k = cfg.padding_len();
        let mut padding = Vec::with_capacity(k.min(1 << n));
        let mut b = 0u32;
        while padding.len() < k && (b as u64) < 1u64 << n {
            if !heavy.contains(&b) {
                padding.push(b);
            }
            b += 1;
        }
        Ok(NuRow {
            heavy,
            lambda,
            padding,
            heavy_mass,
        })
    }

    /// (a, b) with a uniform and b ~ ν_a.
    pub fn sample_nu(&mut self) -> Result<SympVec> {
        let n = self.f.dim();
        let a = uniform_point(&mut self.rng, n);
        self.row(a)?;
        let row = &self.cache[&a];
        let b = row.sample(&mut self.rng);
        Ok(SympVec::new(BitVec::truncated(a, n), BitVec::truncated(b, n))?)
    }

    /// Sum of two independent ν-samples.
    pub fn sample_mu(&mut self) -> Result<SympVec> {
        let s = self.sample_nu()?;
        let t = self.sample_nu()?;
        Ok(s + t)
    }
}

pub fn build_nu<R: Rng>(f: QueryFn, xi: f64, rng: R) -> Result<NuSampler<R>> {
    NuSampler::new(f, NuConfig::new(xi)?, rng)
}

pub fn sample_nu<R: Rng>(s: &mut NuSampler<R>) -> Result<SympVec> {
    s.sample_nu()
}

pub fn sample_mu<R: Rng>(s: &mut NuSampler<R>) -> Result<SympVec> {
    s.sample_mu()
}
