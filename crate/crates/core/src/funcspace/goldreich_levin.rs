//! Heavy Fourier coefficients by prefix-tree search.
//!
//! A bucket is a prefix p ∈ F₂^k on the first k coordinates; its weight is
//! W(p) = Σ_{b extends p} |f̂(b)|² = E_{z,y,y'} f(y,z)·conj f(y',z)·(−1)^{p·(y+y')}.
//! One set of (z, y, y') samples per level serves every bucket of that level.

use rand::Rng;

use super::{sign, uniform_point, wht, EstimatorConfig, QueryFn};
use crate::error::{invalid, Result};
use crate::f2core::{parity32, BitVec};

/// ⌈c·ln(16·n·⌈4/τ²⌉/δ)/τ⁴⌉.
pub fn gl_samples_per_bucket(cfg: &EstimatorConfig, n: usize, tau: f64, delta: f64) -> u64 {
    let cap = (4.0 / (tau * tau)).ceil();
    (cfg.gl_const * (16.0 * n as f64 * cap / delta).ln() / tau.powi(4)).ceil() as u64
}

pub fn goldreich_levin<R: Rng + ?Sized>(
    f: &QueryFn,
    tau: f64,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<BitVec>> {
    goldreich_levin_with(&EstimatorConfig::default(), f, tau, delta, rng)
}

/// Every b with |f̂(b)| ≥ τ, and only b with |f̂(b)| ≥ τ/2, with probability
/// 1 − δ. The list is sorted and has at most ⌈4/τ²⌉ entries.
pub fn goldreich_levin_with<R: Rng + ?Sized>(
    cfg: &EstimatorConfig,
    f: &QueryFn,
    tau: f64,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<BitVec>> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid(format!("tau = {tau} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} outside (0, 1)")));
    }
    if f.bound() > 1.0 + 1e-9 {
        return Err(invalid(format!("bound {} exceeds 1", f.bound())));
    }
    let n = f.dim();
    let keep = tau * tau * 3.0 / 8.0;
    let cap = (4.0 / (tau * tau)).ceil() as usize;
    let m = gl_samples_per_bucket(cfg, n, tau, delta);

    if cfg.dense_fallback && (n as u64).saturating_mul(2).saturating_mul(m) >= 1u64 << n {
        let h = wht(&f.table());
        let mut heavy: Vec<(f64, u32)> = h
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() >= keep)
            .map(|(b, v)| (v.norm_sqr(), b as u32))
            .collect();
        return Ok(finish(heavy.as_mut_slice(), cap, n));
    }

    let mut live: Vec<u32> = vec![0];
    let mut prods = vec![0.0f64; m as usize];
    let mut diffs = vec![0u32; m as usize];
    let mut scored: Vec<(f64, u32)> = Vec::new();
    for k in 1..=n {
        let low = (1u32 << k) - 1;
        for j in 0..m as usize {
            let x = uniform_point(rng, n);
            let y2 = uniform_point(rng, n) & low;
            let x2 = (x & !low) | y2;
            prods[j] = (f.eval(x) * f.eval(x2).conj()).re;
            diffs[j] = (x ^ x2) & low;
        }
        scored.clear();
        for &p in &live {
            for child in [p, p | 1 << (k - 1)] {
                let s: f64 = prods
                    .iter()
                    .zip(&diffs)
                    .map(|(&v, &d)| v * sign(parity32(child & d)))
                    .sum();
                let w = s / m as f64;
                if w >= keep {
                    scored.push((w, child));
                }
            }
        }
        if k == n {
            return Ok(finish(&mut scored, cap, n));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.truncate(cap);
        live = scored.iter().map(|&(_, p)| p).collect();
        if live.is_empty() {
            return Ok(Vec::new());
        }
    }
    unreachable!("n >= 1")
}

fn finish(scored: &mut [(f64, u32)], cap: usize, n: usize) -> Vec<BitVec> {
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<BitVec> = scored
        .iter()
        .take(cap)
        .map(|&(_, b)| BitVec::truncated(b, n))
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{wht_unnormalized, TableFn, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sampled() -> EstimatorConfig {
        EstimatorConfig {
            dense_fallback: false,
            ..Default::default()
        }
    }

    fn from_spectrum(n: usize, coeffs: &[(u32, f64)]) -> TableFn {
        let mut v = vec![C64::new(0.0, 0.0); 1 << n];
        for &(b, c) in coeffs {
            v[b as usize] = C64::new(c, 0.0);
        }
        wht_unnormalized(&mut v);
        TableFn::new(n, v).unwrap()
    }

    #[test]
    fn character_is_found_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = QueryFn::from_table(from_spectrum(10, &[(0x2b5, 1.0)]));
        for tau in [1.0, 0.7] {
            let got = goldreich_levin_with(&sampled(), &f, tau, 0.1, &mut rng).unwrap();
            assert_eq!(got, vec![BitVec::truncated(0x2b5, 10)]);
        }
        let dense = goldreich_levin(&f, 0.5, 0.1, &mut rng).unwrap();
        assert_eq!(dense, vec![BitVec::truncated(0x2b5, 10)]);
    }

    #[test]
    fn zero_function_gives_empty_list() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = QueryFn::from_table(TableFn::zero(8));
        assert!(goldreich_levin_with(&sampled(), &f, 0.5, 0.1, &mut rng)
            .unwrap()
            .is_empty());
        assert!(goldreich_levin(&f, 0.5, 0.1, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = QueryFn::from_table(TableFn::zero(3));
        assert!(goldreich_levin(&f, 0.0, 0.1, &mut rng).is_err());
        assert!(goldreich_levin(&f, 1.5, 0.1, &mut rng).is_err());
        let big = QueryFn::from_table(TableFn::zero(3)).scale(2.0);
        let big = big.map(2.0, |_, v| v);
        assert!(goldreich_levin(&big, 0.5, 0.1, &mut rng).is_err());
    }

    /// Planted coefficients (b₁, 0.6), (b₂, 0.35); the remaining mass is
    /// spread in coefficients of magnitude < τ/4 and the table stays 1-bounded.
    #[test]
    fn planted_spectrum() {
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut coeffs = vec![(0x5a, 0.6), (0xc3, 0.35)];
        let mut used = 0.95;
        let mut b = 1u32;
        while used + 0.01 <= 1.0 {
            if b != 0x5a && b != 0xc3 {
                coeffs.push((b, if b % 2 == 0 { 0.01 } else { -0.01 }));
                used += 0.01;
            }
            b += 1;
        }
        let t = from_spectrum(n, &coeffs);
        assert!(t.sup_norm() <= 1.0 + 1e-12);
        let h = wht(&t);
        let f = QueryFn::from_table(t);
        let mut hits = 0;
        for _ in 0..20 {
            let got = goldreich_levin_with(&sampled(), &f, 0.5, 0.05, &mut rng).unwrap();
            let ok = got.contains(&BitVec::truncated(0x5a, n))
                && got.iter().all(|b| h.get(b.bits()).norm() >= 0.25);
            hits += ok as u32;
        }
        assert!(hits >= 19, "{hits}/20");
    }

    #[test]
    fn query_cost_is_levels_times_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = QueryFn::from_table(from_spectrum(9, &[(3, 1.0)]));
        let cfg = sampled();
        goldreich_levin_with(&cfg, &f, 0.8, 0.1, &mut rng).unwrap();
        let m = gl_samples_per_bucket(&cfg, 9, 0.8, 0.1);
        assert_eq!(f.queries(), 9 * 2 * m);
    }
}
