//! Acceptance sweep: one PASS/FAIL line per criterion, each with its
//! time limit. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use qgl_cli::bench::{log_log_slope, mean_queries, BenchConfig};
use qgl_cli::instance::{random_quadratic, InstanceSpec, Kind};
use qgl_core::f2core::{basis_is_isotropic, is_lagrangian, symplectic, Basis, BitVec, SympVec};
use qgl_core::funcspace::{goldreich_levin_with, wht, wht_unnormalized, EstimatorConfig, QueryFn, Sigma, TableFn, C64};
use qgl_core::learner::{normalized_correlation, BOOST};
use qgl_core::oracle::{distribution_tables, enumerate_stabilizers, spec_exact, u3_exact};
use qgl_core::qgl::{decompose, qgl_main_seeded, rm_self_correct, QglConfig, StopReason};
use qgl_core::sampling::{build_nu, char_dist};
use qgl_core::stabilizer::StabilizerState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_table(n: usize, r: &mut ChaCha8Rng) -> TableFn {
    TableFn::from_fn(n, |_| C64::from_polar(r.gen_range(0.0..1.0), r.gen_range(0.0..std::f64::consts::TAU)))
}

fn mask(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

/// (passed, detail) for one criterion.
type Verdict = (bool, String);

fn transform_exactness() -> Verdict {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = random_table(10, &mut r);
        let h = wht(&t);
        let mut back = h.values().to_vec();
        wht_unnormalized(&mut back);
        let back = TableFn::new(10, back).unwrap();
        worst = worst.max(back.max_abs_diff(&t));
        let energy: f64 = h.values().iter().map(|v| v.norm_sqr()).sum();
        worst = worst.max((energy - t.norm2sq()).abs());
    }
    (worst <= 1e-9, format!("max error {worst:.2e}"))
}

fn uncertainty_principle() -> Verdict {
    let mut r = rng(2);
    let n = 3;
    let bound = 1.0 / (1u64 << n) as f64;
    let mut min_slack = f64::INFINITY;
    let mut isotropic = true;
    for _ in 0..200 {
        let t = random_table(n, &mut r);
        let p = char_dist(&t).unwrap();
        for u in 0u64..1 << (2 * n) {
            for v in u + 1..1 << (2 * n) {
                if symplectic(SympVec::unpack(u, n), SympVec::unpack(v, n)).unwrap() {
                    min_slack = min_slack.min(bound - p.weights()[u as usize] - p.weights()[v as usize]);
                }
            }
        }
        let s = spec_exact(&t).unwrap();
        isotropic &= basis_is_isotropic(&Basis::from_words(2 * n, s.iter().map(|p| p.pack())));
    }
    (min_slack >= -1e-12 && isotropic, format!("min slack {min_slack:.3e}, spectral sets isotropic {isotropic}"))
}

fn stabilizer_geometry() -> Verdict {
    let mut r = rng(3);
    let check = |phi: &StabilizerState, with_tables: bool| -> bool {
        let t = phi.table();
        let l = phi.lagrangian();
        let mut ok = (t.norm2sq() - 1.0).abs() <= 1e-9 && is_lagrangian(&l) && l.dim() == phi.dim();
        if with_tables {
            let n = phi.dim();
            let (p, q) = distribution_tables(&t).unwrap();
            let inside: BTreeSet<u64> = l.elements().into_iter().collect();
            let w = 1.0 / (1u64 << n) as f64;
            for (k, (&pv, &qv)) in p.weights().iter().zip(q.weights()).enumerate() {
                let want = if inside.contains(&(k as u64)) { w } else { 0.0 };
                ok &= (pv - want).abs() <= 1e-9 && (qv - want).abs() <= 1e-9;
            }
        }
        ok
    };
    let mut count = 0;
    let mut bad = 0;
    for n in 1..=2 {
        for phi in enumerate_stabilizers(n).unwrap() {
            count += 1;
            bad += !check(&phi, true) as u32;
        }
    }
    for _ in 0..1000 {
        let phi = StabilizerState::random(6, &mut r);
        count += 1;
        bad += !check(&phi, true) as u32;
    }
    (bad == 0, format!("{count} states, {bad} violations"))
}

fn correlation_chain() -> Verdict {
    let mut r = rng(4);
    let n = 4;
    let mut bad = 0;
    for _ in 0..500 {
        let t = random_table(n, &mut r);
        let phi = StabilizerState::random(n, &mut r);
        let (p, q) = distribution_tables(&t).unwrap();
        let l = phi.lagrangian();
        let (pl, ql) = (p.mass_of(&l), q.mass_of(&l));
        let corr = t.inner(&phi.table()).norm();
        bad += !(ql >= pl * pl - 1e-10 && pl * pl >= corr.powi(8) - 1e-10) as u32;
    }
    (bad == 0, format!("500 pairs, {bad} violations"))
}

fn energy_boosting() -> Verdict {
    let mut r = rng(5);
    let (mut checked, mut bad, mut tries) = (0, 0, 0);
    while checked < 100 && tries < 100_000 {
        tries += 1;
        let n = r.gen_range(1..=4);
        let phi = StabilizerState::random(n, &mut r);
        let pt = phi.table();
        let lw = phi.lagrangian().elements();
        let w = lw[r.gen_range(0..lw.len())];
        let (a, b) = ((w as u32) & mask(n), (w >> n) as u32);
        let sigma = [Sigma::Plus, Sigma::Minus]
            .into_iter()
            .find(|&s| pt.project(a, b, s).max_abs_diff(&pt) < 1e-9)
            .expect("φ is an eigenvector of W_{a,b}");
        let alpha = r.gen_range(0.1..0.9);
        let f = TableFn::from_fn(n, |x| {
            pt.get(x) * (alpha / pt.sup_norm())
                + C64::from_polar(r.gen::<f64>() * (1.0 - alpha), r.gen::<f64>() * std::f64::consts::TAU)
        });
        let coef = wht(&f.derivative(a)).get(b).norm_sqr();
        if coef >= 0.7 * f.norm2sq().powi(2) || f.inner(&pt).norm() < 1e-6 {
            continue;
        }
        let g = f.project(a, b, sigma);
        let ok = g.norm2sq() <= 0.92 * f.norm2sq() + 1e-12
            && normalized_correlation(&g, &phi) >= BOOST * normalized_correlation(&f, &phi) - 1e-12;
        bad += !ok as u32;
        checked += 1;
    }
    (checked == 100 && bad == 0, format!("{checked} instances, {bad} violations"))
}

/// χ_{b₀}(x)·h(Mx) for a random surjection M onto F₂^d and a unimodular h
/// with flat spectrum, so the spectrum is 2^d coefficients of modulus
/// 2^{−d/2}; or, alternately, up to 3 characters with coefficients ≥ 0.3
/// summing to at most 1 in modulus.
fn planted_sparse(n: usize, trial: u32, r: &mut ChaCha8Rng) -> (TableFn, BTreeSet<u32>) {
    let b0 = r.gen::<u32>() & mask(n);
    if trial % 2 == 0 {
        let d = r.gen_range(0..=3usize);
        let rows = loop {
            let rows: Vec<u32> = (0..d).map(|_| r.gen::<u32>() & mask(n)).collect();
            if Basis::from_words(n, rows.iter().map(|&w| w as u64)).dim() == d {
                break rows;
            }
        };
        let h = |y: u32| -> C64 {
            let bit = |i: usize| (y >> i) & 1;
            match d {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0).powu(bit(0)),
                2 => C64::new(if bit(0) & bit(1) == 1 { -1.0 } else { 1.0 }, 0.0),
                _ => C64::new(0.0, 1.0).powu(bit(0)) * if bit(1) & bit(2) == 1 { -1.0 } else { 1.0 },
            }
        };
        let t = TableFn::from_fn(n, |x| {
            let y = rows.iter().enumerate().fold(0u32, |acc, (i, &m)| acc | (((m & x).count_ones() & 1) << i));
            let s = if (b0 & x).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            h(y) * s
        });
        let support = (0u32..1 << d)
            .map(|c| rows.iter().enumerate().filter(|(i, _)| c >> i & 1 == 1).fold(b0, |acc, (_, &m)| acc ^ m))
            .collect();
        (t, support)
    } else {
        let k = r.gen_range(1..=3usize);
        let mut support = BTreeSet::new();
        while support.len() < k {
            support.insert(r.gen::<u32>() & mask(n));
        }
        let spare = 1.0 - 0.3 * k as f64;
        let mags: Vec<f64> = (0..k).map(|_| 0.3 + spare / k as f64 * r.gen::<f64>()).collect();
        let coeffs: Vec<(u32, C64)> = support
            .iter()
            .zip(&mags)
            .map(|(&b, &m)| (b, C64::from_polar(m, r.gen_range(0.0..std::f64::consts::TAU))))
            .collect();
        let t = TableFn::from_fn(n, |x| {
            coeffs.iter().map(|&(b, c)| if (b & x).count_ones() % 2 == 1 { -c } else { c }).sum()
        });
        (t, support)
    }
}

fn linear_goldreich_levin() -> Verdict {
    let mut r = rng(6);
    let n = 12;
    let cfg = EstimatorConfig { dense_fallback: false, ..EstimatorConfig::default() };
    let (mut exact, mut max_queries) = (0, 0);
    for trial in 0..100 {
        let (t, support) = planted_sparse(n, trial, &mut r);
        assert!(t.sup_norm() <= 1.0 + 1e-9);
        let f = QueryFn::from_table_with_bound(t, 1.0);
        let got: BTreeSet<u32> = goldreich_levin_with(&cfg, &f, 0.3, 0.05, &mut r)
            .unwrap()
            .into_iter()
            .map(BitVec::bits)
            .collect();
        exact += (got == support) as u32;
        max_queries = max_queries.max(f.queries());
    }
    (
        exact >= 95 && max_queries <= 10_000_000,
        format!("{exact}/100 exact, max queries {max_queries}"),
    )
}

fn convoluted_sampler() -> Verdict {
    let mut r = rng(7);
    let n = 6;
    // Every quadratic phase is unimodular, hence of full support.
    let q = random_quadratic(n, &mut r);
    let l = StabilizerState::from_quadratic(&q).lagrangian();
    let f = QueryFn::from_table(TableFn::from_quadratic(&q));
    let mut s = build_nu(f, 0.1, rng(70)).unwrap();
    let m = 100_000;
    let hits = (0..m).filter(|_| l.contains_word(s.sample_mu().unwrap().pack())).count();
    let mu = hits as f64 / m as f64;
    let tol = 0.1 + 3.0 / (m as f64).sqrt();
    ((mu - 1.0).abs() <= tol, format!("mu(L) = {mu:.4}, |mu - 1| <= {tol:.4}"))
}

fn end_to_end_vs_oracle() -> Verdict {
    let eps = 0.25;
    let cfg = QglConfig::practical(eps, 1.0 / 6.0).unwrap();
    let mut ok = 0;
    for seed in 0..50 {
        let inst = InstanceSpec { n: 5, kind: Kind::PlantedQuadratic, lambda: 0.6, eta: 0.0, seed }.generate().unwrap();
        let t = inst.file.table();
        let (best, _) = u3_exact(&t).unwrap();
        let f = QueryFn::from_table(t.clone()).memoized().unwrap();
        let rep = qgl_main_seeded(&f, &cfg, seed).unwrap();
        ok += (t.inner(&TableFn::from_quadratic(&rep.chosen)).norm() >= best - eps) as u32;
    }
    (ok >= 30, format!("{ok}/50 within 0.25 of the best quadratic correlation"))
}

fn reed_muller_self_correction() -> Verdict {
    let (mut ok, mut exact) = (0, 0);
    for seed in 0..100 {
        let inst =
            InstanceSpec { n: 10, kind: Kind::NoisyRmCodeword, lambda: 1.0, eta: 0.1, seed: 9000 + seed }.generate().unwrap();
        let bits = inst.file.bits().unwrap().to_vec();
        let f = QueryFn::from_table(inst.file.table()).memoized().unwrap();
        let out = rm_self_correct(&f, 0.1, &mut rng(seed)).unwrap();
        let dist = bits.iter().enumerate().filter(|&(x, &b)| out.quadratic.eval_word(x as u32) != b).count() as f64
            / bits.len() as f64;
        ok += (dist <= 0.2) as u32;
        exact += (Some(&out.quadratic) == inst.planted.as_ref()) as u32;
    }
    (ok >= 60, format!("{ok}/100 within distance 0.2, {exact}/100 exact recoveries"))
}

fn query_scaling() -> Verdict {
    let cfg = BenchConfig::default();
    let rows = cfg.run().unwrap();
    let means = mean_queries(&rows);
    let slope = log_log_slope(&means).unwrap();
    let table: Vec<String> = means.iter().map(|(n, m)| format!("n={n}: {m:.3e}")).collect();
    ((1.7..=2.6).contains(&slope), format!("slope {slope:.3} ({})", table.join(", ")))
}

fn decomposition() -> Verdict {
    let eps: f64 = 0.25;
    let limit = eps.powi(8) + eps.powi(8) / 2.0;
    let mut details = Vec::new();
    let mut all = true;
    for seed in 0..3 {
        let inst = InstanceSpec { n: 8, kind: Kind::TwoPhaseMix, lambda: 0.5, eta: 0.0, seed }.generate().unwrap();
        let t = inst.file.table();
        let f = QueryFn::from_table(t.clone()).memoized().unwrap();
        let d = decompose(&f, eps, &mut rng(100 + seed)).unwrap();
        let mut partial = TableFn::zero(8);
        let mut last = t.norm2sq();
        let mut monotone = true;
        for (c, p) in &d.terms {
            let phase = TableFn::from_quadratic(p);
            partial = partial.map(|x, v| v + c * phase.get(x));
            let res = (&t - &partial).norm2sq();
            monotone &= res <= last + 1e-12;
            last = res;
        }
        let ok = d.terms.len() <= 25 && d.residual_u3_pow8_estimate <= limit && monotone && d.stop == StopReason::Uniform;
        all &= ok;
        details.push(format!(
            "seed {seed}: {} terms, U3^8 est {:.2e}, monotone {monotone}",
            d.terms.len(),
            d.residual_u3_pow8_estimate
        ));
    }
    (all, format!("limit {limit:.2e}; {}", details.join("; ")))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Verdict); 11] = [
        ("transform exactness", 5, transform_exactness),
        ("uncertainty principle", 30, uncertainty_principle),
        ("stabilizer geometry", 60, stabilizer_geometry),
        ("correlation chain", 30, correlation_chain),
        ("energy boosting", 10, energy_boosting),
        ("linear Goldreich-Levin", 120, linear_goldreich_levin),
        ("convoluted sampler", 180, convoluted_sampler),
        ("end-to-end vs oracle", 900, end_to_end_vs_oracle),
        ("Reed-Muller self-correction", 1200, reed_muller_self_correction),
        ("query scaling", 1800, query_scaling),
        ("decomposition", 600, decomposition),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*limit);
        let pass = ok && in_time;
        failed += !pass as u32;
        println!(
            "{} criterion {id:>2} {name}: {detail} [{:.1}s of {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
