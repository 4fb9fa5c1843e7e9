//! Learning stabilizer states that correlate with a bounded function:
//! spectral membership tests, robust generation of Lagrangians, energy
//! boosting by projection, stabilizer sampling and list-decoding.

use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::f2core::{lagrangian_decompose, mask, symplectic_packed, Basis, BitVec, SympVec};
use crate::funcspace::{derivative, goldreich_levin_with, project, EstimatorConfig, QueryFn, Sigma, C64};
use crate::sampling::{NuConfig, NuSampler};
use crate::stabilizer::{Quadratic, StabilizerState};

/// Growth factor of the normalized correlation per good projection.
pub const BOOST: f64 = 1.08;

/// Every knob of the learner.
///
/// [`LearnerParams::theoretical`] sets each knob from τ, γ and δ exactly as the
/// analysis requires; those constants are astronomically large unless τ and γ
/// are close to 1. [`LearnerParams::practical`] keeps the structure and
/// replaces the constants by fixed values that run at n ≈ 20.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerParams {
    pub tau: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Sampler accuracy ξ; rounded down to 1/integer by the sampler.
    pub xi: f64,
    /// Goldreich–Levin threshold used for each sampler row.
    pub nu_tau: f64,
    /// Accuracy of each sampler row coefficient.
    pub nu_acc: f64,
    /// Robust generation draws ⌈rg_const·(n + ln(4/δ))/rg_mass⌉ samples.
    pub rg_const: f64,
    pub rg_mass: f64,
    /// Additive accuracy of the ‖f‖₂² estimate in the spectral test.
    pub spec_norm_acc: f64,
    /// Coefficient accuracy of the spectral test, as a multiple of ‖f‖₂².
    pub spec_coef_rel: f64,
    /// Goldreich–Levin threshold in stabilizer sampling.
    pub stab_gl_tau: f64,
    /// Cap on the number s of projections per round.
    pub t_max: usize,
    /// Per-round success floor p̂.
    pub p_hat: f64,
    /// Overrides ⌈(1/p̂)·ln((1/p̂)/δ)⌉.
    pub rounds: Option<usize>,
    /// ‖f‖₂² the thresholds are calibrated against: the sampler works on
    /// Δ_af/energy and the stabilizer threshold scales with √energy.
    pub energy: f64,
    pub threads: usize,
    pub estimators: EstimatorConfig,
}

impl LearnerParams {
    fn check_core(tau: f64, gamma: f64, delta: f64) -> Result<()> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(invalid(format!("tau = {tau} outside (0, 1]")));
        }
        if !(gamma > 0.5 && gamma <= 1.0) {
            return Err(invalid(format!("gamma = {gamma} outside (1/2, 1]")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("delta = {delta} outside (0, 1)")));
        }
        Ok(())
    }

    pub fn theoretical(tau: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::check_core(tau, gamma, delta)?;
        let g2 = (gamma - 0.5).powi(2);
        let eps_rg_prime = g2 * tau.powi(16) / 8.0;
        let xi = (g2 * tau.powi(8) / 8.0 * tau.powi(8) / 2.0).min(eps_rg_prime);
        let t = rounds_of_boost(tau);
        let p_hat = ((gamma - 0.5) * tau).powi((1.0 / tau).log2().ceil() as i32 + 3) / (2.0 * (t + 1) as f64);
        Ok(Self {
            tau,
            gamma,
            delta,
            xi,
            nu_tau: xi / 4.0,
            nu_acc: xi.powi(4) / 2.0,
            rg_const: 8.0,
            rg_mass: eps_rg_prime * tau.powi(8),
            spec_norm_acc: 0.01 * tau * tau,
            spec_coef_rel: 0.05 * tau * tau,
            stab_gl_tau: tau * tau,
            t_max: t,
            p_hat,
            rounds: None,
            energy: 1.0,
            threads: 1,
            estimators: EstimatorConfig::default(),
        })
    }

    pub fn practical(tau: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::check_core(tau, gamma, delta)?;
        Ok(Self {
            tau,
            gamma,
            delta,
            xi: 0.25,
            nu_tau: 0.5,
            nu_acc: 0.15,
            rg_const: 2.0,
            rg_mass: 0.1,
            spec_norm_acc: 0.02,
            spec_coef_rel: 0.1,
            stab_gl_tau: (tau * tau).max(0.3),
            t_max: 2,
            p_hat: 0.02,
            rounds: None,
            energy: 1.0,
            threads: 1,
            estimators: EstimatorConfig {
                fourier_const: 2.0,
                norm_const: 0.5,
                gl_const: 2.0,
                dense_fallback: true,
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        Self::check_core(self.tau, self.gamma, self.delta)?;
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !(self.xi > 0.0 && self.xi <= 0.5) {
            return Err(invalid(format!("xi = {} outside (0, 1/2]", self.xi)));
        }
        if !(unit(self.nu_tau) && unit(self.nu_acc) && unit(self.stab_gl_tau)) {
            return Err(invalid("Goldreich–Levin thresholds and accuracies must lie in (0, 1]"));
        }
        if !(self.rg_const > 0.0 && unit(self.rg_mass)) {
            return Err(invalid("robust generation constants out of range"));
        }
        if !(unit(self.spec_norm_acc) && unit(self.spec_coef_rel)) {
            return Err(invalid("spectral test accuracies must lie in (0, 1]"));
        }
        if !(self.p_hat > 0.0 && self.p_hat <= 1.0) {
            return Err(invalid(format!("p_hat = {} outside (0, 1]", self.p_hat)));
        }
        if !unit(self.energy) {
            return Err(invalid(format!("energy = {} outside (0, 1]", self.energy)));
        }
        if self.rounds == Some(0) {
            return Err(invalid("zero rounds"));
        }
        Ok(())
    }

    /// t = ⌈log_{1.08}(1/τ)⌉.
    pub fn t(&self) -> usize {
        rounds_of_boost(self.tau)
    }

    /// Largest number of projections a round may draw.
    pub fn s_max(&self) -> usize {
        self.t().min(self.t_max)
    }

    pub fn eps_rg(&self) -> f64 {
        (self.gamma - 0.5).powi(2) * self.tau.powi(8) / 8.0
    }

    pub fn eps_rg_prime(&self) -> f64 {
        (self.gamma - 0.5).powi(2) * self.tau.powi(16) / 8.0
    }

    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or_else(|| {
            let inv = 1.0 / self.p_hat;
            ((inv * (inv / self.delta).ln()).ceil() as usize).max(1)
        })
    }

    pub fn rg_samples(&self, n: usize, delta: f64) -> u64 {
        (self.rg_const * (n as f64 + (4.0 / delta).ln()) / self.rg_mass).ceil() as u64
    }

    pub fn nu_config(&self) -> Result<NuConfig> {
        let mut c = NuConfig::new(self.xi)?;
        c.gl_tau = self.nu_tau;
        c.coeff_acc = self.nu_acc;
        c.energy = self.energy;
        c.estimators = self.estimators;
        Ok(c)
    }

    /// Largest support codimension a stabilizer with correlation ≥ τ can have.
    pub fn codim_cap(&self) -> f64 {
        2.0 * (1.0 / self.tau).log2()
    }
}

fn rounds_of_boost(tau: f64) -> usize {
    ((1.0 / tau).ln() / BOOST.ln() - 1e-12).ceil().max(0.0) as usize
}

/// Estimates ‖f‖₂² once and then decides membership in the spectral set
/// {(a,b) : |Δ_af^(b)|² ≥ 0.7‖f‖₂⁴} pair by pair.
///
/// A pair is accepted iff the estimated |Δ_af^(b)| exceeds r = √0.6·N̂. The
/// estimate is refined in stages from accuracy 0.3·N̂ down to
/// `coef_rel`·N̂, stopping as soon as |ĉ| ± accuracy lies on one side of r;
/// the failure probability is split evenly over the stages. When
/// N̂ < τ² − `norm_acc`, no stabilizer can correlate with f to τ and every
/// pair is rejected.
#[derive(Clone, Debug)]
pub struct SpecTester {
    f: QueryFn,
    norm_hat: f64,
    live: bool,
    coef_rel: f64,
    cfg: EstimatorConfig,
}

/// First-stage accuracy of the sequential test, relative to N̂.
const COARSE_REL: f64 = 0.3;

impl SpecTester {
    pub fn new<R: Rng + ?Sized>(
        f: &QueryFn,
        tau: f64,
        norm_acc: f64,
        coef_rel: f64,
        delta: f64,
        cfg: EstimatorConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let norm_hat = cfg.norm2sq_estimate(f, norm_acc, delta, rng)?;
        Ok(Self {
            f: f.clone(),
            norm_hat,
            live: norm_hat > 0.0 && norm_hat >= tau * tau - norm_acc,
            coef_rel,
            cfg,
        })
    }

    pub fn norm_estimate(&self) -> f64 {
        self.norm_hat
    }

    /// False when every pair is rejected without queries.
    pub fn is_live(&self) -> bool {
        self.live
    }

    pub fn test<R: Rng + ?Sized>(&self, p: SympVec, delta: f64, rng: &mut R) -> Result<bool> {
        if p.dim() != self.f.dim() {
            return Err(crate::Error::DimensionMismatch {
                left: p.dim(),
                right: self.f.dim(),
            });
        }
        if !self.live {
            return Ok(false);
        }
        let d = derivative(&self.f, p.a);
        let r = 0.6f64.sqrt() * self.norm_hat;
        let fine = (self.coef_rel * self.norm_hat).min(1.0);
        let mut accs = vec![fine];
        while accs.last().is_some_and(|&a| a * 2.0 <= COARSE_REL * self.norm_hat) {
            accs.push(accs.last().unwrap() * 2.0);
        }
        let stage_delta = delta / accs.len() as f64;
        for (k, &acc) in accs.iter().rev().enumerate() {
            let c = self.cfg.fourier_estimate(&d, p.b, acc.min(1.0), stage_delta, rng)?.norm();
            if k + 1 == accs.len() {
                return Ok(c > r);
            }
            if c + acc < r {
                return Ok(false);
            }
            if c - acc > r {
                return Ok(true);
            }
        }
        unreachable!("at least one stage")
    }
}

/// Spectral test with accuracies 0.01τ² on ‖f‖₂² and 0.05τ²·N̂ on the
/// coefficient.
pub fn spec_test<R: Rng + ?Sized>(f: &QueryFn, p: SympVec, tau: f64, delta: f64, rng: &mut R) -> Result<bool> {
    let t2 = tau * tau;
    let tester = SpecTester::new(f, tau, 0.01 * t2, 0.05 * t2, delta / 2.0, EstimatorConfig::default(), rng)?;
    tester.test(p, delta / 2.0, rng)
}

/// Spans the μ-samples that pass the spectral test.
///
/// Samples already in the span are not tested: they cannot change it. The
/// result is absent when nothing survives, when the span stops being
/// isotropic, or when the tester rejects everything outright.
pub fn robust_generate_with<S: Rng, R: Rng + ?Sized>(
    sampler: &mut NuSampler<S>,
    tester: &SpecTester,
    m: u64,
    delta1: f64,
    rng: &mut R,
) -> Result<Option<Basis>> {
    let n = sampler.function().dim();
    if !tester.is_live() {
        return Ok(None);
    }
    let mut span = Basis::empty(2 * n);
    for _ in 0..m {
        let p = sampler.sample_mu()?;
        let w = p.pack();
        if span.contains_word(w) {
            continue;
        }
        if tester.test(p, delta1, rng)? {
            if span.rows().iter().any(|&r| symplectic_packed(r, w, n)) {
                return Ok(None);
            }
            span.insert(w);
        }
    }
    Ok((span.dim() > 0).then_some(span))
}

/// m = ⌈8·(n + ln(4/δ))/(ε·τ⁸)⌉ samples, each tested with failure δ/(4m).
pub fn robust_generate<S: Rng, R: Rng + ?Sized>(
    f: &QueryFn,
    sampler: &mut NuSampler<S>,
    eps: f64,
    delta: f64,
    tau: f64,
    rng: &mut R,
) -> Result<Option<Basis>> {
    for (name, v) in [("eps", eps), ("delta", delta), ("tau", tau)] {
        if !(v > 0.0 && v < 1.0 || name == "tau" && v == 1.0) {
            return Err(invalid(format!("{name} = {v} outside (0, 1)")));
        }
    }
    if sampler.function().dim() != f.dim() {
        return Err(invalid("sampler built for another dimension"));
    }
    let m = (8.0 * (f.dim() as f64 + (4.0 / delta).ln()) / (eps * tau.powi(8))).ceil() as u64;
    let t2 = tau * tau;
    let tester = SpecTester::new(f, tau, 0.01 * t2, 0.05 * t2, delta / 4.0, EstimatorConfig::default(), rng)?;
    robust_generate_with(sampler, &tester, m, delta / (4.0 * m as f64), rng)
}

fn sub_rng<R: Rng + ?Sized>(rng: &mut R) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(rng.gen())
}

/// One attempt at the Lagrangian of a local maximizer: s ≤ s_max random
/// projections along μ-samples, then robust generation on the result.
pub fn lagrangian_sample<R: Rng + ?Sized>(f: &QueryFn, params: &LearnerParams, rng: &mut R) -> Result<Option<Basis>> {
    params.validate()?;
    let nu = params.nu_config()?;
    let s = rng.gen_range(0..=params.s_max());
    let mut fi = f.clone();
    for _ in 0..s {
        let mut sampler = NuSampler::new(fi.clone(), nu, sub_rng(rng))?;
        let p = sampler.sample_mu()?;
        fi = project(&fi, p.a, p.b, Sigma::random(rng));
        if fi.is_memoized() {
            fi = fi.materialize()?;
        }
    }
    let mut sampler = NuSampler::new(fi.clone(), nu, sub_rng(rng))?;
    let delta = 0.5;
    let m = params.rg_samples(f.dim(), delta);
    let tester = SpecTester::new(
        &fi,
        params.tau,
        params.spec_norm_acc,
        params.spec_coef_rel,
        delta / 4.0,
        params.estimators,
        rng,
    )?;
    robust_generate_with(&mut sampler, &tester, m, delta / (4.0 * m as f64), rng)
}

/// Stabilizer sampling with the Goldreich–Levin threshold τ².
pub fn stabilizer_sample<R: Rng + ?Sized>(
    f: &QueryFn,
    lagrangian: &Basis,
    tau: f64,
    rng: &mut R,
) -> Result<Option<StabilizerState>> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid(format!("tau = {tau} outside (0, 1]")));
    }
    stabilizer_sample_with(
        f,
        lagrangian,
        tau * tau,
        2.0 * (1.0 / tau).log2(),
        &EstimatorConfig::default(),
        rng,
    )
}

/// Guesses a coset w + V of the support, strips the quadratic part fixed by
/// the Lagrangian, and reads the linear part off a heavy Fourier coefficient.
pub fn stabilizer_sample_with<R: Rng + ?Sized>(
    f: &QueryFn,
    lagrangian: &Basis,
    gl_tau: f64,
    codim_cap: f64,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<Option<StabilizerState>> {
    let n = f.dim();
    let (v, m) = lagrangian_decompose(lagrangian, n)?;
    if (n - v.dim()) as f64 > codim_cap + 1e-9 {
        return Ok(None);
    }
    let upper = m.strict_upper();
    let diag = m.diagonal().bits();
    let pivots = v.pivots().fold(0u32, |acc, p| acc | 1 << p);
    // Vectors on non-pivot coordinates form a transversal of F₂ⁿ/V.
    let w = rng.gen::<u32>() & mask(n) & !pivots;
    let q = Quadratic::new(n, upper.clone(), 0, false)?;
    let support = v.clone();
    let g = f.restrict(
        move |x| support.reduce(x as u64) as u32 == w,
        move |x| {
            let e = 2 * q.eval_word(x) as i64 - (diag & x).count_ones() as i64;
            crate::funcspace::i_pow(e)
        },
    );
    let list = goldreich_levin_with(cfg, &g, gl_tau, 0.5, rng)?;
    if list.is_empty() {
        return Ok(None);
    }
    let b = list[rng.gen_range(0..list.len())];
    Ok(Some(StabilizerState::new(
        n,
        v,
        BitVec::truncated(w, n),
        upper,
        b,
        BitVec::truncated(diag, n),
    )?))
}

/// Output of [`list_decode`].
#[derive(Clone, Debug, PartialEq)]
pub struct ListDecode {
    /// Distinct states, sorted by canonical form.
    pub states: Vec<StabilizerState>,
    pub rounds: usize,
    /// Rounds whose Lagrangian sample had dimension n.
    pub lagrangians: usize,
}

fn one_round(f: &QueryFn, params: &LearnerParams, rng: &mut ChaCha8Rng) -> Result<(bool, Option<StabilizerState>)> {
    let n = f.dim();
    let Some(l) = lagrangian_sample(f, params, rng)? else {
        return Ok((false, None));
    };
    if l.dim() != n {
        return Ok((false, None));
    }
    let gl_tau = params.stab_gl_tau * params.energy.sqrt();
    let state = stabilizer_sample_with(f, &l, gl_tau, params.codim_cap(), &params.estimators, rng)?;
    Ok((true, state))
}

fn round_rng(base: u64, round: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(base);
    r.set_stream(round as u64);
    r
}

/// Independent rounds of Lagrangian sampling followed by stabilizer
/// sampling, merged and deduplicated up to global phase.
///
/// Round r draws from its own stream of a seed taken from `rng`, so the
/// result does not depend on `params.threads`.
pub fn list_decode<R: Rng + ?Sized>(f: &QueryFn, params: &LearnerParams, rng: &mut R) -> Result<ListDecode> {
    params.validate()?;
    if f.bound() > 1.0 + 1e-9 {
        return Err(invalid("list decoding needs a 1-bounded function"));
    }
    let rounds = params.rounds();
    let base: u64 = rng.gen();
    let workers = params.threads.clamp(1, rounds);
    let run = |k: usize| -> Vec<(usize, Result<(bool, Option<StabilizerState>)>)> {
        (k..rounds)
            .step_by(workers)
            .map(|r| (r, one_round(f, params, &mut round_rng(base, r))))
            .collect()
    };
    let mut results: Vec<_> = if workers == 1 {
        run(0)
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|k| scope.spawn(move || run(k))).collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("round worker panicked"))
                .collect()
        })
    };
    results.sort_by_key(|(r, _)| *r);
    let mut states = Vec::new();
    let mut lagrangians = 0;
    for (_, res) in results {
        let (hit, state) = res?;
        lagrangians += hit as usize;
        states.extend(state);
    }
    states.sort();
    states.dedup();
    Ok(ListDecode {
        states,
        rounds,
        lagrangians,
    })
}

/// |⟨f, φ⟩|² / ‖f‖₂², the normalized squared correlation boosted by projection.
pub fn normalized_correlation(f: &crate::funcspace::TableFn, phi: &StabilizerState) -> f64 {
    let c: C64 = f.inner(&phi.table());
    c.norm_sqr() / f.norm2sq()
}
